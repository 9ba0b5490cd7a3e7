//! A small declarative language for sessions.
//!
//! ```text
//! let a = semicircle(r=2)
//! let p = free_poisson(lambda=1, alpha=1)
//! free(a, p)
//! phi(a*p*a*p)
//! kappa(a + p, a - p)
//! ```

pub mod ast;
pub mod eval;
pub mod lexer;
pub mod parser;

use thiserror::Error;

pub use ast::{Arg, Expr, Program, QueryKind, Span, Stmt, Value};
pub use eval::{Output, QueryResult, Session};
pub use parser::parse;

/// A syntax error with the set of tokens that would have been accepted.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {message}{}", expected_suffix(.expected))]
pub struct SyntaxError {
    pub line: usize,
    pub column: usize,
    pub message: String,
    pub expected: Vec<String>,
}

fn expected_suffix(expected: &[String]) -> String {
    if expected.is_empty() {
        String::new()
    } else {
        format!("; expected one of: {}", expected.join(", "))
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DslError {
    #[error("syntax error at {0}")]
    Syntax(#[from] SyntaxError),
    #[error("{line}:{column}: {error}")]
    Eval { line: usize, column: usize, error: crate::Error },
}

/// Parses and evaluates `text` in a fresh session with order cap `order`.
pub fn run(text: &str, order: usize) -> Result<Vec<QueryResult>, DslError> {
    let program = parse(text)?;
    Session::new(order).run(&program)
}
