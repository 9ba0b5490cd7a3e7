//! Tokenizer for the session language.

use num_traits::Zero;

use super::SyntaxError;
use crate::scalar::Rational;

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    Number(Rational),
    Comma,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Eq,
    Plus,
    Minus,
    Star,
    /// `;` or a line break.
    Sep,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{}`", s),
            Tok::Number(r) => format!("number `{}`", r),
            Tok::Comma => "`,`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Sep => "end of statement".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub column: usize,
}

fn error(line: usize, column: usize, message: String) -> SyntaxError {
    SyntaxError { line, column, message, expected: vec![] }
}

pub fn tokenize(text: &str) -> Result<Vec<Token>, SyntaxError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let (start_line, start_col) = (line, col);
        let mut push = |tok: Tok| out.push(Token { tok, line: start_line, column: start_col });
        match c {
            '\n' => {
                push(Tok::Sep);
                i += 1;
                line += 1;
                col = 1;
                continue;
            }
            ' ' | '\t' | '\r' => {}
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                    col += 1;
                }
                continue;
            }
            ';' => push(Tok::Sep),
            ',' => push(Tok::Comma),
            '(' => push(Tok::LParen),
            ')' => push(Tok::RParen),
            '[' => push(Tok::LBracket),
            ']' => push(Tok::RBracket),
            '=' => push(Tok::Eq),
            '+' => push(Tok::Plus),
            '-' => push(Tok::Minus),
            '*' => push(Tok::Star),
            c if c.is_ascii_digit() => {
                let mut j = i;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                let num: String = chars[i..j].iter().collect();
                let mut den = String::from("1");
                if j + 1 < chars.len() && chars[j] == '/' && chars[j + 1].is_ascii_digit() {
                    let mut e = j + 1;
                    while e < chars.len() && chars[e].is_ascii_digit() {
                        e += 1;
                    }
                    den = chars[j + 1..e].iter().collect();
                    j = e;
                }
                if j < chars.len() && (chars[j] == '.' || chars[j] == '/') {
                    return Err(error(line, col + j - i, "only rational literals `p/q` are allowed".into()));
                }
                let (n, d): (num_bigint::BigInt, num_bigint::BigInt) = (num.parse().unwrap(), den.parse().unwrap());
                if d.is_zero() {
                    return Err(error(start_line, start_col, "zero denominator".into()));
                }
                push(Tok::Number(Rational::new(n, d)));
                col += j - i;
                i = j;
                continue;
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut j = i;
                while j < chars.len() && (chars[j].is_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                push(Tok::Ident(chars[i..j].iter().collect()));
                col += j - i;
                i = j;
                continue;
            }
            other => return Err(error(line, col, format!("unexpected character {:?}", other))),
        }
        i += 1;
        col += 1;
    }
    out.push(Token { tok: Tok::Eof, line, column: col });
    Ok(out)
}
