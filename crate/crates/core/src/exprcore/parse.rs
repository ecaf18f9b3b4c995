//! Recursive-descent parser for the coordinate-expression grammar:
//!
//! ```text
//! expr   := term (('+'|'-') term)*
//! term   := factor (('*'|'/') factor)*
//! factor := base ('^' factor)?
//! base   := NUMBER | SYMBOL | FUNC '(' expr ')' | '(' expr ')' | '-' base
//! ```

use thiserror::Error;

use super::num::parse_literal;
use super::{BinOp, Expr, Unary};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: expected one of {}", expected.join(", "))]
    Syntax {
        offset: usize,
        expected: Vec<&'static str>,
    },
    #[error("unknown function `{name}` at byte {offset}")]
    UnknownFunction { name: String, offset: usize },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Syntax { offset, .. } | ParseError::UnknownFunction { offset, .. } => {
                *offset
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok<'a> {
    Num(&'a str),
    Ident(&'a str),
    Op(char),
    LParen,
    RParen,
    End,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn skip_ws(&mut self) {
        let rest = &self.src[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    /// Returns the next token and its starting offset without consuming it.
    fn peek(&mut self) -> Result<(Tok<'a>, usize, usize), ParseError> {
        self.skip_ws();
        let start = self.pos;
        let bytes = self.src.as_bytes();
        let Some(&c) = bytes.get(start) else {
            return Ok((Tok::End, start, start));
        };
        let take_while = |mut i: usize, pred: &dyn Fn(u8) -> bool| {
            while i < bytes.len() && pred(bytes[i]) {
                i += 1;
            }
            i
        };
        let (tok, end) = match c {
            b'0'..=b'9' | b'.' => {
                let mut i = take_while(start, &|b| b.is_ascii_digit());
                if bytes.get(i) == Some(&b'.') {
                    i = take_while(i + 1, &|b| b.is_ascii_digit());
                }
                if i == start + 1 && c == b'.' {
                    return Err(ParseError::Syntax {
                        offset: start,
                        expected: vec!["number"],
                    });
                }
                if matches!(bytes.get(i), Some(b'e' | b'E')) {
                    let mut j = i + 1;
                    if matches!(bytes.get(j), Some(b'+' | b'-')) {
                        j += 1;
                    }
                    let k = take_while(j, &|b| b.is_ascii_digit());
                    if k > j {
                        i = k;
                    }
                }
                (Tok::Num(&self.src[start..i]), i)
            }
            b'A'..=b'Z' | b'a'..=b'z' | b'_' => {
                let i = take_while(start, &|b| b.is_ascii_alphanumeric() || b == b'_');
                (Tok::Ident(&self.src[start..i]), i)
            }
            b'+' | b'-' | b'*' | b'/' | b'^' => (Tok::Op(c as char), start + 1),
            b'(' => (Tok::LParen, start + 1),
            b')' => (Tok::RParen, start + 1),
            _ => {
                return Err(ParseError::Syntax {
                    offset: start,
                    expected: vec!["number", "symbol", "function", "'('", "'-'"],
                })
            }
        };
        Ok((tok, start, end))
    }

    fn bump(&mut self, end: usize) {
        self.pos = end;
    }
}

const BASE_START: &[&str] = &["number", "symbol", "function", "'('", "'-'"];

struct Parser<'a> {
    lex: Lexer<'a>,
}

impl<'a> Parser<'a> {
    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let (tok, _, end) = self.lex.peek()?;
            let op = match tok {
                Tok::Op('+') => BinOp::Add,
                Tok::Op('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.lex.bump(end);
            let rhs = self.term()?;
            lhs = Expr::raw_binary(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            let (tok, _, end) = self.lex.peek()?;
            let op = match tok {
                Tok::Op('*') => BinOp::Mul,
                Tok::Op('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.lex.bump(end);
            let rhs = self.factor()?;
            lhs = Expr::raw_binary(op, lhs, rhs);
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        let base = self.base()?;
        let (tok, _, end) = self.lex.peek()?;
        if tok == Tok::Op('^') {
            self.lex.bump(end);
            let exp = self.factor()?;
            Ok(Expr::raw_binary(BinOp::Pow, base, exp))
        } else {
            Ok(base)
        }
    }

    fn expect_rparen(&mut self) -> Result<(), ParseError> {
        let (tok, start, end) = self.lex.peek()?;
        if tok == Tok::RParen {
            self.lex.bump(end);
            Ok(())
        } else {
            Err(ParseError::Syntax {
                offset: start,
                expected: vec!["')'", "operator"],
            })
        }
    }

    fn base(&mut self) -> Result<Expr, ParseError> {
        let (tok, start, end) = self.lex.peek()?;
        match tok {
            Tok::Num(text) => {
                self.lex.bump(end);
                let n = parse_literal(text).ok_or(ParseError::Syntax {
                    offset: start,
                    expected: vec!["number"],
                })?;
                Ok(Expr::constant(n))
            }
            Tok::Ident(name) => {
                self.lex.bump(end);
                let (next, next_start, next_end) = self.lex.peek()?;
                if let Some(func) = Unary::from_name(name) {
                    if next != Tok::LParen {
                        return Err(ParseError::Syntax {
                            offset: next_start,
                            expected: vec!["'('"],
                        });
                    }
                    self.lex.bump(next_end);
                    let arg = self.expr()?;
                    self.expect_rparen()?;
                    Ok(Expr::raw_unary(func, arg))
                } else if next == Tok::LParen {
                    Err(ParseError::UnknownFunction {
                        name: name.to_string(),
                        offset: start,
                    })
                } else {
                    Ok(Expr::sym(name))
                }
            }
            Tok::LParen => {
                self.lex.bump(end);
                let inner = self.expr()?;
                self.expect_rparen()?;
                Ok(inner)
            }
            Tok::Op('-') => {
                self.lex.bump(end);
                let arg = self.base()?;
                Ok(Expr::raw_unary(Unary::Neg, arg))
            }
            _ => Err(ParseError::Syntax {
                offset: start,
                expected: BASE_START.to_vec(),
            }),
        }
    }
}

/// Parses `text` into an unsimplified expression tree.
pub fn parse(text: &str) -> Result<Expr, ParseError> {
    let mut p = Parser {
        lex: Lexer { src: text, pos: 0 },
    };
    let e = p.expr()?;
    let (tok, start, _) = p.lex.peek()?;
    if tok != Tok::End {
        return Err(ParseError::Syntax {
            offset: start,
            expected: vec!["operator", "end of input"],
        });
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn incomplete_input_reports_offset() {
        let err = parse("x0 + ").unwrap_err();
        assert_eq!(err.offset(), 5);
        assert!(matches!(err, ParseError::Syntax { ref expected, .. } if expected.contains(&"symbol")));
    }

    #[test]
    fn unknown_function_is_named() {
        let err = parse("2*foo(x0)").unwrap_err();
        assert_eq!(
            err,
            ParseError::UnknownFunction {
                name: "foo".into(),
                offset: 2
            }
        );
    }

    #[test]
    fn function_name_without_call_is_an_error() {
        assert!(matches!(parse("sin + 1"), Err(ParseError::Syntax { offset: 4, .. })));
    }

    #[test]
    fn unbalanced_and_trailing() {
        assert_eq!(parse("(x0 + 1").unwrap_err().offset(), 7);
        assert_eq!(parse("x0 x1").unwrap_err().offset(), 3);
        assert!(parse("x0 $ 1").is_err());
    }

    #[test]
    fn unary_minus_binds_tighter_than_power() {
        let e = parse("-x^2").unwrap();
        assert_eq!(
            e,
            Expr::raw_binary(
                BinOp::Pow,
                Expr::raw_unary(Unary::Neg, Expr::sym("x")),
                Expr::int(2)
            )
        );
    }

    #[test]
    fn power_is_right_associative() {
        let e = parse("2^3^x").unwrap();
        let expected = Expr::raw_binary(
            BinOp::Pow,
            Expr::int(2),
            Expr::raw_binary(BinOp::Pow, Expr::int(3), Expr::sym("x")),
        );
        assert_eq!(e, expected);
    }

    #[test]
    fn scientific_literals() {
        assert_eq!(parse("1.5e2").unwrap(), Expr::int(150));
        assert_eq!(parse(".25").unwrap(), Expr::ratio(1, 4));
    }
}
