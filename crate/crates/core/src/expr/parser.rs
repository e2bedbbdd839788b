//! Hand-written recursive-descent parser. Binary operators are parsed by
//! precedence climbing so every error carries an exact byte offset.

use std::fmt;

use thiserror::Error;

use super::ast::{BinOp, Expr, Func, Node};
use crate::jet::VarIndex;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ExprError {
    /// Zero-based byte offset into the source.
    pub position: usize,
    pub message: String,
}

impl fmt::Display for ExprError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at column {}", self.message, self.position + 1)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
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
        while let Some(c) = self.src[self.pos..].chars().next() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    /// Next token and its starting offset.
    fn next(&mut self) -> Result<(Tok, usize), ExprError> {
        self.skip_ws();
        let start = self.pos;
        let rest = &self.src[start..];
        let Some(c) = rest.chars().next() else {
            return Ok((Tok::End, start));
        };
        if c.is_ascii_digit() || c == '.' {
            let bytes = rest.as_bytes();
            let mut end = 0;
            while end < bytes.len() && (bytes[end].is_ascii_digit() || bytes[end] == b'.') {
                end += 1;
            }
            if end < bytes.len() && (bytes[end] == b'e' || bytes[end] == b'E') {
                let mut k = end + 1;
                if k < bytes.len() && (bytes[k] == b'+' || bytes[k] == b'-') {
                    k += 1;
                }
                if k < bytes.len() && bytes[k].is_ascii_digit() {
                    while k < bytes.len() && bytes[k].is_ascii_digit() {
                        k += 1;
                    }
                    end = k;
                }
            }
            let text = &rest[..end];
            let value: f64 = text.parse().map_err(|_| ExprError {
                position: start,
                message: format!("malformed number '{text}'"),
            })?;
            self.pos += end;
            return Ok((Tok::Num(value), start));
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let end = rest
                .find(|ch: char| !(ch.is_ascii_alphanumeric() || ch == '_'))
                .unwrap_or(rest.len());
            self.pos += end;
            return Ok((Tok::Ident(rest[..end].to_string()), start));
        }
        self.pos += c.len_utf8();
        Ok((
            match c {
                '+' | '-' | '*' | '/' | '^' => Tok::Op(c),
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                _ => {
                    return Err(ExprError {
                        position: start,
                        message: format!("unexpected character '{c}'"),
                    })
                }
            },
            start,
        ))
    }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    tok: Tok,
    at: usize,
    dim: usize,
}

impl<'a> Parser<'a> {
    fn bump(&mut self) -> Result<(), ExprError> {
        let (tok, at) = self.lexer.next()?;
        self.tok = tok;
        self.at = at;
        Ok(())
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, ExprError> {
        Err(ExprError {
            position: self.at,
            message: message.into(),
        })
    }

    fn binary_op(&self) -> Option<(BinOp, u8)> {
        match self.tok {
            Tok::Op('+') => Some((BinOp::Add, 1)),
            Tok::Op('-') => Some((BinOp::Sub, 1)),
            Tok::Op('*') => Some((BinOp::Mul, 2)),
            Tok::Op('/') => Some((BinOp::Div, 2)),
            _ => None,
        }
    }

    /// Precedence climbing over `+ -` (1) and `* /` (2), left associative.
    fn expr(&mut self, min_prec: u8) -> Result<Node, ExprError> {
        let mut lhs = self.unary()?;
        while let Some((op, prec)) = self.binary_op() {
            if prec < min_prec {
                break;
            }
            self.bump()?;
            let rhs = self.expr(prec + 1)?;
            lhs = Node::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Node, ExprError> {
        match self.tok {
            Tok::Op('-') => {
                self.bump()?;
                Ok(Node::Neg(Box::new(self.unary()?)))
            }
            Tok::Op('+') => {
                self.bump()?;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Node, ExprError> {
        let mut base = self.primary()?;
        while self.tok == Tok::Op('^') {
            self.bump()?;
            let exponent = match self.tok {
                Tok::Op('-') => {
                    self.bump()?;
                    Node::Neg(Box::new(self.primary()?))
                }
                Tok::Op('+') => {
                    self.bump()?;
                    self.primary()?
                }
                _ => self.primary()?,
            };
            base = Node::Pow(Box::new(base), Box::new(exponent));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Node, ExprError> {
        match self.tok.clone() {
            Tok::Num(v) => {
                self.bump()?;
                Ok(Node::Const(v))
            }
            Tok::LParen => {
                self.bump()?;
                let inner = self.expr(1)?;
                if self.tok != Tok::RParen {
                    return self.error("expected ')'");
                }
                self.bump()?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                let start = self.at;
                self.bump()?;
                if let Some(var) = self.variable(&name, start)? {
                    return Ok(Node::Var(var));
                }
                if name == "pi" {
                    return Ok(Node::Const(std::f64::consts::PI));
                }
                let Some(func) = Func::lookup(&name) else {
                    return Err(ExprError {
                        position: start,
                        message: format!("unknown identifier '{name}'"),
                    });
                };
                if self.tok != Tok::LParen {
                    return self.error(format!("expected '(' after '{name}'"));
                }
                self.bump()?;
                let arg = self.expr(1)?;
                if self.tok != Tok::RParen {
                    return self.error("expected ')'");
                }
                self.bump()?;
                Ok(Node::Call(func, Box::new(arg)))
            }
            Tok::End => self.error("unexpected end of input"),
            Tok::RParen => self.error("unexpected ')'"),
            Tok::Op(c) => self.error(format!("unexpected operator '{c}'")),
        }
    }

    fn variable(&self, name: &str, start: usize) -> Result<Option<VarIndex>, ExprError> {
        let mut chars = name.chars();
        let kind = chars.next();
        let digits = chars.as_str();
        if !matches!(kind, Some('x') | Some('y'))
            || digits.is_empty()
            || !digits.bytes().all(|b| b.is_ascii_digit())
        {
            return Ok(None);
        }
        let index: usize = digits.parse().unwrap_or(usize::MAX);
        if index == 0 || index > self.dim {
            return Err(ExprError {
                position: start,
                message: format!(
                    "variable index out of range: '{name}' (dimension {})",
                    self.dim
                ),
            });
        }
        Ok(Some(if kind == Some('x') {
            VarIndex::Base(index - 1)
        } else {
            VarIndex::Fiber(index - 1)
        }))
    }
}

/// Parse `src` as an expression over `x1..x{dim}`, `y1..y{dim}`.
pub fn parse(src: &str, dim: usize) -> Result<Expr, ExprError> {
    if dim == 0 {
        return Err(ExprError {
            position: 0,
            message: "dimension must be at least 1".into(),
        });
    }
    let mut parser = Parser {
        lexer: Lexer { src, pos: 0 },
        tok: Tok::End,
        at: 0,
        dim,
    };
    parser.bump()?;
    let root = parser.expr(1)?;
    if parser.tok != Tok::End {
        return parser.error("unexpected trailing input");
    }
    Ok(Expr::new(dim, root))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sum_of_squares() {
        let e = parse("y1^2 + y2^2", 2).unwrap();
        let sq = |i| {
            Node::Pow(
                Box::new(Node::Var(VarIndex::Fiber(i))),
                Box::new(Node::Const(2.0)),
            )
        };
        assert_eq!(
            e.root(),
            &Node::Binary(BinOp::Add, Box::new(sq(0)), Box::new(sq(1)))
        );
    }

    #[test]
    fn unclosed_paren_reports_end_offset() {
        let err = parse("x1*(y1^2", 2).unwrap_err();
        assert_eq!(err.position, 8);
        assert!(err.to_string().contains("column 9"), "{err}");
    }

    #[test]
    fn variable_out_of_range() {
        let err = parse("y3", 2).unwrap_err();
        assert!(err.message.contains("variable index out of range"));
        assert_eq!(err.position, 0);
        assert!(parse("x0", 2).is_err());
    }

    #[test]
    fn unknown_identifier() {
        let err = parse("1 + foo(y1)", 1).unwrap_err();
        assert!(err.message.contains("unknown identifier"));
        assert_eq!(err.position, 4);
        let err = parse("Y1", 1).unwrap_err();
        assert!(err.message.contains("unknown identifier"), "case-sensitive");
    }

    #[test]
    fn precedence_and_associativity() {
        let v = |s: &str| parse(s, 1).unwrap().eval::<f64>(&[2.0], &[3.0]).unwrap();
        assert_eq!(v("-y1^2"), -9.0);
        assert_eq!(v("10 - 4 - 3"), 3.0);
        assert_eq!(v("24 / 4 / 2"), 3.0);
        assert_eq!(v("1 + 2 * 3"), 7.0);
        assert_eq!(v("(1 + 2) * 3"), 9.0);
        assert_eq!(v("2^3^2"), 64.0);
        assert_eq!(v("y1^-1"), 1.0 / 3.0);
        assert_eq!(v("x1 * -y1"), -6.0);
        assert_eq!(v("1.5e1 + 2E-1"), 15.2);
    }

    #[test]
    fn whitespace_insensitive() {
        let a = parse("  x1*y1 +\n\t y1 ", 1).unwrap();
        let b = parse("x1*y1+y1", 1).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn trailing_and_stray_tokens() {
        assert_eq!(parse("y1 y1", 1).unwrap_err().position, 3);
        assert_eq!(parse("y1 + ", 1).unwrap_err().position, 5);
        assert_eq!(parse("y1 $ 2", 1).unwrap_err().position, 3);
        assert_eq!(parse(")", 1).unwrap_err().position, 0);
    }
}
