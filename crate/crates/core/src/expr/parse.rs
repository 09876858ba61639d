use super::{BinOp, Expr, Func};
use std::fmt;

#[derive(Clone, Debug, PartialEq)]
pub enum ParseErrorKind {
    /// Unexpected token; `expected` is a short hint such as "operand" or "')'".
    Syntax { expected: String, found: String },
    UnknownIdentifier(String),
}

/// Parse failure located at a byte offset into the source.
#[derive(Clone, Debug, PartialEq)]
pub struct ParseError {
    pub offset: usize,
    pub kind: ParseErrorKind,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ParseErrorKind::Syntax { expected, found } => write!(
                f,
                "syntax error at byte {}: expected {expected}, found {found}",
                self.offset
            ),
            ParseErrorKind::UnknownIdentifier(name) => {
                write!(f, "unknown identifier `{name}` at byte {}", self.offset)
            }
        }
    }
}

impl std::error::Error for ParseError {}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Op(c) => format!("'{c}'"),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::End => "end of input".into(),
        }
    }
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

    /// Returns the next token and its starting offset.
    fn next(&mut self) -> Result<(Tok, usize), ParseError> {
        self.skip_ws();
        let start = self.pos;
        let bytes = self.src.as_bytes();
        let Some(&c) = bytes.get(start) else {
            return Ok((Tok::End, start));
        };
        let tok = match c {
            b'+' | b'-' | b'*' | b'/' | b'^' => {
                self.pos += 1;
                Tok::Op(c as char)
            }
            b'(' => {
                self.pos += 1;
                Tok::LParen
            }
            b')' => {
                self.pos += 1;
                Tok::RParen
            }
            b'0'..=b'9' | b'.' => self.number(start)?,
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let mut end = start;
                while end < bytes.len() && (bytes[end].is_ascii_alphanumeric() || bytes[end] == b'_')
                {
                    end += 1;
                }
                self.pos = end;
                Tok::Ident(self.src[start..end].to_string())
            }
            _ => {
                let ch = self.src[start..].chars().next().unwrap_or('?');
                return Err(ParseError {
                    offset: start,
                    kind: ParseErrorKind::Syntax {
                        expected: "operand or operator".into(),
                        found: format!("'{ch}'"),
                    },
                });
            }
        };
        Ok((tok, start))
    }

    fn number(&mut self, start: usize) -> Result<Tok, ParseError> {
        let bytes = self.src.as_bytes();
        let mut end = start;
        let digits = |end: &mut usize| {
            let s = *end;
            while *end < bytes.len() && bytes[*end].is_ascii_digit() {
                *end += 1;
            }
            *end - s
        };
        let mut n = digits(&mut end);
        if end < bytes.len() && bytes[end] == b'.' {
            end += 1;
            n += digits(&mut end);
        }
        if n == 0 {
            return Err(ParseError {
                offset: start,
                kind: ParseErrorKind::Syntax {
                    expected: "digit".into(),
                    found: "'.'".into(),
                },
            });
        }
        if end < bytes.len() && (bytes[end] == b'e' || bytes[end] == b'E') {
            let mut e = end + 1;
            if e < bytes.len() && (bytes[e] == b'+' || bytes[e] == b'-') {
                e += 1;
            }
            if digits(&mut e) > 0 {
                end = e;
            }
        }
        self.pos = end;
        // the slice is a valid float literal by construction
        let v: f64 = self.src[start..end].parse().map_err(|_| ParseError {
            offset: start,
            kind: ParseErrorKind::Syntax {
                expected: "number".into(),
                found: self.src[start..end].to_string(),
            },
        })?;
        Ok(Tok::Num(v))
    }
}

struct Parser<'a> {
    lex: Lexer<'a>,
    tok: Tok,
    at: usize,
}

impl<'a> Parser<'a> {
    fn bump(&mut self) -> Result<(), ParseError> {
        let (tok, at) = self.lex.next()?;
        self.tok = tok;
        self.at = at;
        Ok(())
    }

    fn fail<T>(&self, expected: &str) -> Result<T, ParseError> {
        Err(ParseError {
            offset: self.at,
            kind: ParseErrorKind::Syntax {
                expected: expected.to_string(),
                found: self.tok.describe(),
            },
        })
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.tok {
                Tok::Op('+') => BinOp::Add,
                Tok::Op('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump()?;
            let rhs = self.term()?;
            lhs = Expr::bin(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.tok {
                Tok::Op('*') => BinOp::Mul,
                Tok::Op('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump()?;
            let rhs = self.unary()?;
            lhs = Expr::bin(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.tok == Tok::Op('-') {
            self.bump()?;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if self.tok == Tok::Op('^') {
            self.bump()?;
            let exp = self.unary()?;
            return Ok(Expr::bin(BinOp::Pow, base, exp));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        match std::mem::replace(&mut self.tok, Tok::End) {
            Tok::Num(v) => {
                self.bump()?;
                Ok(Expr::Num(v))
            }
            Tok::LParen => {
                self.bump()?;
                let e = self.expr()?;
                if self.tok != Tok::RParen {
                    return self.fail("')'");
                }
                self.bump()?;
                Ok(e)
            }
            Tok::Ident(name) => {
                let at = self.at;
                match name.as_str() {
                    "pi" => {
                        self.bump()?;
                        Ok(Expr::Pi)
                    }
                    "i" => {
                        self.bump()?;
                        Ok(Expr::I)
                    }
                    "t" => {
                        self.bump()?;
                        Ok(Expr::T)
                    }
                    _ => {
                        let Some(func) = Func::from_name(&name) else {
                            return Err(ParseError {
                                offset: at,
                                kind: ParseErrorKind::UnknownIdentifier(name),
                            });
                        };
                        self.bump()?;
                        if self.tok != Tok::LParen {
                            return self.fail("'(' after function name");
                        }
                        self.bump()?;
                        let arg = self.expr()?;
                        if self.tok != Tok::RParen {
                            return self.fail("')'");
                        }
                        self.bump()?;
                        Ok(Expr::call(func, arg))
                    }
                }
            }
            other => {
                self.tok = other;
                self.fail("operand")
            }
        }
    }
}

pub(super) fn parse(source: &str) -> Result<Expr, ParseError> {
    let mut p = Parser {
        lex: Lexer { src: source, pos: 0 },
        tok: Tok::End,
        at: 0,
    };
    p.bump()?;
    if p.tok == Tok::End {
        return p.fail("expression");
    }
    let e = p.expr()?;
    if p.tok != Tok::End {
        return p.fail("operator or end of input");
    }
    Ok(e)
}
