//! Syntax tree of the session language and its canonical printer.

use std::fmt;

use crate::scalar::{format_rational, Rational};

/// Noncommutative polynomial expressions; juxtaposition parses as `Mul`.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(Rational),
    Var(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
}

/// Constructor and option values.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Num(Rational),
    Ident(String),
    List(Vec<Value>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Arg {
    pub name: String,
    pub value: Value,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QueryKind {
    Phi,
    Kappa,
    Moments,
    Infdiv,
    LevyCheck,
    Limit,
}

impl QueryKind {
    pub const ALL: [QueryKind; 6] =
        [QueryKind::Phi, QueryKind::Kappa, QueryKind::Moments, QueryKind::Infdiv, QueryKind::LevyCheck, QueryKind::Limit];

    pub fn keyword(self) -> &'static str {
        match self {
            QueryKind::Phi => "phi",
            QueryKind::Kappa => "kappa",
            QueryKind::Moments => "moments",
            QueryKind::Infdiv => "infdiv",
            QueryKind::LevyCheck => "levy_check",
            QueryKind::Limit => "limit",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|q| q.keyword() == s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Stmt {
    Let { names: Vec<String>, ctor: String, args: Vec<Arg> },
    Free(Vec<String>),
    Query { kind: QueryKind, args: Vec<Expr>, options: Vec<Arg> },
}

/// Line and column (1-based) of a statement's first token.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Span {
    pub line: usize,
    pub column: usize,
}

/// Statements with their source positions; equality ignores positions.
#[derive(Debug, Clone, Default)]
pub struct Program {
    pub statements: Vec<Stmt>,
    pub spans: Vec<Span>,
}

impl PartialEq for Program {
    fn eq(&self, other: &Self) -> bool {
        self.statements == other.statements
    }
}

impl Program {
    pub fn new(statements: Vec<Stmt>) -> Self {
        let spans = vec![Span::default(); statements.len()];
        Program { statements, spans }
    }
}

pub fn is_keyword(s: &str) -> bool {
    s == "let" || s == "free" || QueryKind::from_keyword(s).is_some()
}

fn level(e: &Expr) -> u8 {
    match e {
        Expr::Add(..) | Expr::Sub(..) => 1,
        Expr::Mul(..) => 2,
        Expr::Neg(_) => 3,
        Expr::Num(_) | Expr::Var(_) => 4,
    }
}

fn write_at(f: &mut fmt::Formatter<'_>, e: &Expr, min: u8) -> fmt::Result {
    if level(e) < min {
        write!(f, "({})", e)
    } else {
        write!(f, "{}", e)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(r) => write!(f, "{}", format_rational(r)),
            Expr::Var(v) => write!(f, "{}", v),
            Expr::Neg(e) => {
                write!(f, "-")?;
                write_at(f, e, 3)
            }
            Expr::Add(l, r) | Expr::Sub(l, r) => {
                write_at(f, l, 1)?;
                write!(f, " {} ", if matches!(self, Expr::Add(..)) { "+" } else { "-" })?;
                write_at(f, r, 2)
            }
            Expr::Mul(l, r) => {
                write_at(f, l, 2)?;
                write!(f, " * ")?;
                write_at(f, r, 3)
            }
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Num(r) => write!(f, "{}", format_rational(r)),
            Value::Ident(s) => write!(f, "{}", s),
            Value::List(items) => {
                write!(f, "[")?;
                for (i, v) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{}", v)?;
                }
                write!(f, "]")
            }
        }
    }
}

impl fmt::Display for Arg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}={}", self.name, self.value)
    }
}

impl fmt::Display for Stmt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stmt::Let { names, ctor, args } => {
                let args: Vec<String> = args.iter().map(ToString::to_string).collect();
                write!(f, "let {} = {}({})", names.join(", "), ctor, args.join(", "))
            }
            Stmt::Free(names) => write!(f, "free({})", names.join(", ")),
            Stmt::Query { kind, args, options } => {
                let parts: Vec<String> =
                    args.iter().map(ToString::to_string).chain(options.iter().map(ToString::to_string)).collect();
                write!(f, "{}({})", kind.keyword(), parts.join(", "))
            }
        }
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.statements {
            writeln!(f, "{}", s)?;
        }
        Ok(())
    }
}
