//! Recursive-descent parser.

use super::ast::{is_keyword, Arg, Expr, Program, QueryKind, Span, Stmt, Value};
use super::lexer::{tokenize, Tok, Token};
use super::SyntaxError;

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

type PResult<T> = Result<T, SyntaxError>;

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn peek_at(&self, ahead: usize) -> &Tok {
        &self.toks[(self.pos + ahead).min(self.toks.len() - 1)].tok
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn fail<T>(&self, expected: &[&str]) -> PResult<T> {
        let t = self.peek();
        Err(SyntaxError {
            line: t.line,
            column: t.column,
            message: format!("unexpected {}", t.tok.describe()),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        })
    }

    fn expect(&mut self, tok: Tok, name: &str) -> PResult<()> {
        if self.peek().tok == tok {
            self.bump();
            Ok(())
        } else {
            self.fail(&[name])
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match &self.peek().tok {
            Tok::Ident(s) if !is_keyword(s) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            _ => self.fail(&["identifier"]),
        }
    }

    fn ident_list(&mut self) -> PResult<Vec<String>> {
        let mut names = vec![self.ident()?];
        while self.peek().tok == Tok::Comma {
            self.bump();
            names.push(self.ident()?);
        }
        Ok(names)
    }

    fn program(&mut self) -> PResult<Program> {
        let mut program = Program::default();
        loop {
            while self.peek().tok == Tok::Sep {
                self.bump();
            }
            if self.peek().tok == Tok::Eof {
                return Ok(program);
            }
            let span = Span { line: self.peek().line, column: self.peek().column };
            let stmt = self.statement()?;
            match self.peek().tok {
                Tok::Sep | Tok::Eof => {}
                _ => return self.fail(&["`;`", "newline"]),
            }
            program.statements.push(stmt);
            program.spans.push(span);
        }
    }

    fn statement(&mut self) -> PResult<Stmt> {
        let keyword = match &self.peek().tok {
            Tok::Ident(s) => s.clone(),
            _ => String::new(),
        };
        if keyword == "let" {
            self.bump();
            let names = self.ident_list()?;
            self.expect(Tok::Eq, "`=`")?;
            let ctor = self.ident()?;
            self.expect(Tok::LParen, "`(`")?;
            let mut args = vec![];
            if self.peek().tok != Tok::RParen {
                args.push(self.named_arg()?);
                while self.peek().tok == Tok::Comma {
                    self.bump();
                    args.push(self.named_arg()?);
                }
            }
            self.expect(Tok::RParen, "`)`")?;
            Ok(Stmt::Let { names, ctor, args })
        } else if keyword == "free" {
            self.bump();
            self.expect(Tok::LParen, "`(`")?;
            let names = self.ident_list()?;
            self.expect(Tok::RParen, "`)`")?;
            Ok(Stmt::Free(names))
        } else if let Some(kind) = QueryKind::from_keyword(&keyword) {
            self.bump();
            self.expect(Tok::LParen, "`(`")?;
            let (mut args, mut options) = (vec![], vec![]);
            if self.peek().tok != Tok::RParen {
                loop {
                    let named = matches!(&self.peek().tok, Tok::Ident(s) if !is_keyword(s)) && *self.peek_at(1) == Tok::Eq;
                    if named {
                        options.push(self.named_arg()?);
                    } else if options.is_empty() {
                        args.push(self.sum()?);
                    } else {
                        return self.fail(&["named argument"]);
                    }
                    if self.peek().tok != Tok::Comma {
                        break;
                    }
                    self.bump();
                }
            }
            self.expect(Tok::RParen, "`)`")?;
            Ok(Stmt::Query { kind, args, options })
        } else {
            let mut expected = vec!["let", "free"];
            expected.extend(QueryKind::ALL.iter().map(|q| q.keyword()));
            self.fail(&expected)
        }
    }

    fn named_arg(&mut self) -> PResult<Arg> {
        let name = self.ident()?;
        self.expect(Tok::Eq, "`=`")?;
        let value = self.value()?;
        Ok(Arg { name, value })
    }

    fn value(&mut self) -> PResult<Value> {
        match self.peek().tok.clone() {
            Tok::Number(r) => {
                self.bump();
                Ok(Value::Num(r))
            }
            Tok::Minus => {
                self.bump();
                match self.peek().tok.clone() {
                    Tok::Number(r) => {
                        self.bump();
                        Ok(Value::Num(-r))
                    }
                    _ => self.fail(&["number"]),
                }
            }
            Tok::Ident(s) if !is_keyword(&s) => {
                self.bump();
                Ok(Value::Ident(s))
            }
            Tok::LBracket => {
                self.bump();
                let mut items = vec![];
                if self.peek().tok != Tok::RBracket {
                    items.push(self.value()?);
                    while self.peek().tok == Tok::Comma {
                        self.bump();
                        items.push(self.value()?);
                    }
                }
                self.expect(Tok::RBracket, "`]`")?;
                Ok(Value::List(items))
            }
            _ => self.fail(&["number", "identifier", "`[`"]),
        }
    }

    fn sum(&mut self) -> PResult<Expr> {
        let mut e = self.term()?;
        loop {
            match self.peek().tok {
                Tok::Plus => {
                    self.bump();
                    e = Expr::Add(Box::new(e), Box::new(self.term()?));
                }
                Tok::Minus => {
                    self.bump();
                    e = Expr::Sub(Box::new(e), Box::new(self.term()?));
                }
                _ => return Ok(e),
            }
        }
    }

    fn term(&mut self) -> PResult<Expr> {
        let mut e = self.unary()?;
        loop {
            match self.peek().tok {
                Tok::Star => {
                    self.bump();
                    e = Expr::Mul(Box::new(e), Box::new(self.unary()?));
                }
                Tok::Ident(_) | Tok::Number(_) | Tok::LParen => {
                    e = Expr::Mul(Box::new(e), Box::new(self.unary()?));
                }
                _ => return Ok(e),
            }
        }
    }

    fn unary(&mut self) -> PResult<Expr> {
        if self.peek().tok == Tok::Minus {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        match self.peek().tok.clone() {
            Tok::Number(r) => {
                self.bump();
                Ok(Expr::Num(r))
            }
            Tok::Ident(s) if !is_keyword(&s) => {
                self.bump();
                Ok(Expr::Var(s))
            }
            Tok::LParen => {
                self.bump();
                let e = self.sum()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            _ => self.fail(&["number", "identifier", "`(`", "`-`"]),
        }
    }
}

/// Parses a whole program.
pub fn parse(text: &str) -> Result<Program, SyntaxError> {
    let toks = tokenize(text)?;
    Parser { toks, pos: 0 }.program()
}
