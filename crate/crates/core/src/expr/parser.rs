//! Recursive-descent parser.
//!
//! Grammar, lowest precedence first:
//!
//! ```text
//! sum     := product (('+' | '-') product)*
//! product := power (('*' | '/') power)*
//! power   := unary ('^' power)?
//! unary   := '-' unary | '+' unary | primary
//! primary := number | 'pi' | ident | ident '(' sum ')' | '(' sum ')'
//! ```
//!
//! Unary minus binds tighter than the base of `^`, so `-x^2` is `(-x)^2`.
//! A minus directly in front of a numeric literal folds into the literal.

use thiserror::Error;

use super::{Expr, Func};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    Empty,
    UnexpectedChar(char),
    UnexpectedToken(String),
    UnexpectedEnd,
    UnknownFunction(String),
    BadNumber(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{}", describe(.kind, *.position))]
pub struct ParseError {
    /// Byte offset into the source text.
    pub position: usize,
    pub kind: ParseErrorKind,
}

fn describe(kind: &ParseErrorKind, pos: usize) -> String {
    match kind {
        ParseErrorKind::Empty => "empty expression".to_string(),
        ParseErrorKind::UnexpectedChar(c) => format!("unexpected character `{c}` at {pos}"),
        ParseErrorKind::UnexpectedToken(t) => format!("unexpected `{t}` at {pos}"),
        ParseErrorKind::UnexpectedEnd => format!("unexpected end of input at {pos}"),
        ParseErrorKind::UnknownFunction(n) => format!("unknown function `{n}` at {pos}"),
        ParseErrorKind::BadNumber(s) => format!("malformed number `{s}` at {pos}"),
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

impl Token {
    fn text(&self) -> String {
        match self {
            Token::Num(v) => v.to_string(),
            Token::Ident(s) => s.clone(),
            Token::Plus => "+".into(),
            Token::Minus => "-".into(),
            Token::Star => "*".into(),
            Token::Slash => "/".into(),
            Token::Caret => "^".into(),
            Token::LParen => "(".into(),
            Token::RParen => ")".into(),
        }
    }
}

fn lex(src: &str) -> Result<Vec<(usize, Token)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let start = i;
        match c {
            ' ' | '\t' | '\n' | '\r' => {
                i += 1;
                continue;
            }
            '+' => out.push((start, Token::Plus)),
            '-' => out.push((start, Token::Minus)),
            '*' => out.push((start, Token::Star)),
            '/' => out.push((start, Token::Slash)),
            '^' => out.push((start, Token::Caret)),
            '(' => out.push((start, Token::LParen)),
            ')' => out.push((start, Token::RParen)),
            '0'..='9' | '.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                // exponent only when a digit follows, so `2e` stays an error
                // rather than swallowing an identifier
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let text = &src[start..i];
                let value: f64 = text.parse().map_err(|_| ParseError {
                    position: start,
                    kind: ParseErrorKind::BadNumber(text.to_string()),
                })?;
                out.push((start, Token::Num(value)));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((start, Token::Ident(src[start..i].to_string())));
                continue;
            }
            _ => {
                let ch = src[start..].chars().next().unwrap_or(c);
                return Err(ParseError {
                    position: start,
                    kind: ParseErrorKind::UnexpectedChar(ch),
                });
            }
        }
        i += 1;
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<(usize, Token)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.end, |(p, _)| *p)
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }

    fn unexpected(&self) -> ParseError {
        match self.peek() {
            Some(t) => ParseError {
                position: self.offset(),
                kind: ParseErrorKind::UnexpectedToken(t.text()),
            },
            None => ParseError {
                position: self.end,
                kind: ParseErrorKind::UnexpectedEnd,
            },
        }
    }

    fn expect(&mut self, tok: Token) -> Result<(), ParseError> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.unexpected())
        }
    }

    fn sum(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.product()?;
        loop {
            match self.peek() {
                Some(Token::Plus) => {
                    self.pos += 1;
                    lhs = Expr::add(lhs, self.product()?);
                }
                Some(Token::Minus) => {
                    self.pos += 1;
                    lhs = Expr::sub(lhs, self.product()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn product(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.power()?;
        loop {
            match self.peek() {
                Some(Token::Star) => {
                    self.pos += 1;
                    lhs = Expr::mul(lhs, self.power()?);
                }
                Some(Token::Slash) => {
                    self.pos += 1;
                    lhs = Expr::div(lhs, self.power()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.unary()?;
        if self.peek() == Some(&Token::Caret) {
            self.pos += 1;
            let exponent = self.power()?;
            Ok(Expr::pow(base, exponent))
        } else {
            Ok(base)
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Some(Token::Minus) => {
                self.pos += 1;
                if let Some(Token::Num(v)) = self.peek() {
                    let v = *v;
                    self.pos += 1;
                    return Ok(Expr::Num(-v));
                }
                Ok(Expr::neg(self.unary()?))
            }
            Some(Token::Plus) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let at = self.offset();
        match self.bump() {
            Some(Token::Num(v)) => Ok(Expr::Num(v)),
            Some(Token::LParen) => {
                let inner = self.sum()?;
                self.expect(Token::RParen)?;
                Ok(inner)
            }
            Some(Token::Ident(name)) => {
                if self.peek() == Some(&Token::LParen) {
                    let func = Func::from_name(&name).ok_or(ParseError {
                        position: at,
                        kind: ParseErrorKind::UnknownFunction(name.clone()),
                    })?;
                    self.pos += 1;
                    let arg = self.sum()?;
                    self.expect(Token::RParen)?;
                    Ok(Expr::call(func, arg))
                } else if name == "pi" {
                    Ok(Expr::Pi)
                } else {
                    Ok(Expr::Var(name))
                }
            }
            Some(_) => {
                self.pos -= 1;
                Err(self.unexpected())
            }
            None => Err(ParseError {
                position: self.end,
                kind: ParseErrorKind::UnexpectedEnd,
            }),
        }
    }
}

/// Parse expression text into a tree.
pub fn parse(src: &str) -> Result<Expr, ParseError> {
    let tokens = lex(src)?;
    if tokens.is_empty() {
        return Err(ParseError {
            position: 0,
            kind: ParseErrorKind::Empty,
        });
    }
    let mut p = Parser {
        tokens,
        pos: 0,
        end: src.len(),
    };
    let e = p.sum()?;
    if p.pos < p.tokens.len() {
        return Err(p.unexpected());
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n(v: f64) -> Expr {
        Expr::Num(v)
    }

    fn v(s: &str) -> Expr {
        Expr::var(s)
    }

    #[test]
    fn precedence_of_sum_and_product() {
        assert_eq!(
            parse("2*theta + 1").unwrap(),
            Expr::add(Expr::mul(n(2.0), v("theta")), n(1.0))
        );
    }

    #[test]
    fn power_of_call() {
        assert_eq!(parse("sin(theta)^2").unwrap(), Expr::pow(Expr::sin(v("theta")), n(2.0)));
    }

    #[test]
    fn power_is_right_associative() {
        assert_eq!(parse("a^b^c").unwrap(), Expr::pow(v("a"), Expr::pow(v("b"), v("c"))));
    }

    #[test]
    fn unary_minus_binds_to_base() {
        assert_eq!(parse("-x^2").unwrap(), Expr::pow(Expr::neg(v("x")), n(2.0)));
        assert_eq!(parse("-2").unwrap(), n(-2.0));
        assert_eq!(parse("-(2)").unwrap(), Expr::neg(n(2.0)));
        assert_eq!(parse("x^-1").unwrap(), Expr::pow(v("x"), n(-1.0)));
    }

    #[test]
    fn subtraction_is_left_associative() {
        assert_eq!(
            parse("a - b - c").unwrap(),
            Expr::sub(Expr::sub(v("a"), v("b")), v("c"))
        );
    }

    #[test]
    fn scientific_literals() {
        assert_eq!(parse("1.5e-3").unwrap(), n(1.5e-3));
        assert_eq!(parse("2E2").unwrap(), n(200.0));
    }

    #[test]
    fn identifiers_with_digits_and_case() {
        assert_eq!(parse("g1 + L").unwrap(), Expr::add(v("g1"), v("L")));
        assert_eq!(parse("pi").unwrap(), Expr::Pi);
    }

    #[test]
    fn unknown_function_is_reported() {
        let err = parse("1 + sinh(x)").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnknownFunction("sinh".into()));
        assert_eq!(err.position, 4);
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let err = parse("2 * (x + 1").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnexpectedEnd);
        let err = parse("2 + * 3").unwrap_err();
        assert_eq!(err.position, 4);
        let err = parse("x $ y").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnexpectedChar('$'));
        assert_eq!(err.position, 2);
        assert_eq!(parse("   ").unwrap_err().kind, ParseErrorKind::Empty);
        assert!(parse("x y").is_err());
        assert!(parse("1..2").is_err());
    }
}
