use super::{BinOp, CmpOp, Condition, Func, Node, ParseError};

/// Nesting limit that keeps recursive descent off the end of the stack.
pub const MAX_DEPTH: usize = 200;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    Cmp(CmpOp),
    LParen,
    RParen,
    Comma,
    End,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    offset: usize,
}

fn syntax(offset: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        offset,
        message: message.into(),
    }
}

fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
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
                let value: f64 = text
                    .parse()
                    .map_err(|_| syntax(start, format!("malformed number `{text}`")))?;
                if !value.is_finite() {
                    return Err(syntax(start, format!("number `{text}` overflows")));
                }
                out.push(Token {
                    tok: Tok::Num(value),
                    offset: start,
                });
                continue;
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push(Token {
                    tok: Tok::Ident(src[start..i].to_string()),
                    offset: start,
                });
                continue;
            }
            b'+' | b'-' | b'*' | b'/' | b'^' => {
                out.push(Token {
                    tok: Tok::Op(c as char),
                    offset: start,
                });
                i += 1;
                continue;
            }
            b'(' => out.push(Token {
                tok: Tok::LParen,
                offset: start,
            }),
            b')' => out.push(Token {
                tok: Tok::RParen,
                offset: start,
            }),
            b',' => out.push(Token {
                tok: Tok::Comma,
                offset: start,
            }),
            b'<' | b'>' | b'=' | b'!' => {
                let next_eq = bytes.get(i + 1) == Some(&b'=');
                let op = match (c, next_eq) {
                    (b'<', true) => CmpOp::Le,
                    (b'<', false) => CmpOp::Lt,
                    (b'>', true) => CmpOp::Ge,
                    (b'>', false) => CmpOp::Gt,
                    (b'=', true) => CmpOp::Eq,
                    (b'!', true) => CmpOp::Ne,
                    _ => return Err(syntax(start, format!("unexpected `{}`", c as char))),
                };
                i += if next_eq { 2 } else { 1 };
                out.push(Token {
                    tok: Tok::Cmp(op),
                    offset: start,
                });
                continue;
            }
            _ => {
                let ch = src[start..].chars().next().unwrap_or('?');
                return Err(syntax(start, format!("unexpected character `{ch}`")));
            }
        }
        i += 1;
    }
    out.push(Token {
        tok: Tok::End,
        offset: src.len(),
    });
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<Token>,
    pos: usize,
    var: &'a str,
    depth: usize,
}

pub(super) fn parse(src: &str, var: &str) -> Result<Node, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser {
        toks,
        pos: 0,
        var,
        depth: 0,
    };
    let node = p.expr()?;
    let t = p.peek();
    if t.tok != Tok::End {
        return Err(syntax(t.offset, "unexpected trailing input"));
    }
    Ok(node)
}

impl Parser<'_> {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if t.tok != Tok::End {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<Token, ParseError> {
        let t = self.bump();
        if t.tok == want {
            Ok(t)
        } else {
            Err(syntax(t.offset, format!("expected {what}")))
        }
    }

    fn enter(&mut self) -> Result<(), ParseError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(ParseError::TooDeep {
                offset: self.peek().offset,
            });
        }
        Ok(())
    }

    fn expr(&mut self) -> Result<Node, ParseError> {
        self.enter()?;
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek().tok {
                Tok::Op('+') => BinOp::Add,
                Tok::Op('-') => BinOp::Sub,
                _ => break,
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Node::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        self.depth -= 1;
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek().tok {
                Tok::Op('*') => BinOp::Mul,
                Tok::Op('/') => BinOp::Div,
                _ => break,
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Node::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Node, ParseError> {
        self.enter()?;
        let node = match self.peek().tok {
            Tok::Op('-') => {
                self.bump();
                Node::Neg(Box::new(self.unary()?))
            }
            Tok::Op('+') => {
                self.bump();
                self.unary()?
            }
            _ => self.power()?,
        };
        self.depth -= 1;
        Ok(node)
    }

    fn power(&mut self) -> Result<Node, ParseError> {
        let base = self.primary()?;
        if self.peek().tok == Tok::Op('^') {
            self.bump();
            let exponent = self.unary()?;
            return Ok(Node::Binary(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Node, ParseError> {
        let t = self.bump();
        match t.tok {
            Tok::Num(v) => Ok(Node::Num(v)),
            Tok::LParen => {
                let inner = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                if self.peek().tok == Tok::LParen {
                    if name == "piecewise" {
                        return self.piecewise(t.offset);
                    }
                    let func = Func::from_name(&name).ok_or(ParseError::UnknownFunction {
                        offset: t.offset,
                        name: name.clone(),
                    })?;
                    self.bump();
                    let arg = self.expr()?;
                    self.expect(Tok::RParen, "`)` after function argument")?;
                    Ok(Node::Call(func, Box::new(arg)))
                } else if name == self.var {
                    Ok(Node::Var)
                } else if name == "pi" {
                    Ok(Node::Num(std::f64::consts::PI))
                } else if Func::from_name(&name).is_some() || name == "piecewise" {
                    Err(syntax(t.offset, format!("`{name}` must be called")))
                } else {
                    Err(ParseError::UnknownIdentifier {
                        offset: t.offset,
                        name,
                        var: self.var.to_string(),
                    })
                }
            }
            Tok::End => Err(syntax(t.offset, "unexpected end of input")),
            _ => Err(syntax(t.offset, "expected a value")),
        }
    }

    // piecewise((cond, value), ..., (else, value))
    fn piecewise(&mut self, start: usize) -> Result<Node, ParseError> {
        self.expect(Tok::LParen, "`(`")?;
        let mut branches = Vec::new();
        loop {
            self.expect(Tok::LParen, "`(` opening a piecewise branch")?;
            if matches!(&self.peek().tok, Tok::Ident(s) if s == "else") {
                self.bump();
                self.expect(Tok::Comma, "`,` after `else`")?;
                let value = self.expr()?;
                self.expect(Tok::RParen, "`)` closing the else branch")?;
                self.expect(Tok::RParen, "`)`: `else` must be the last branch")?;
                return Ok(Node::Piecewise(branches, Box::new(value)));
            }
            let lhs = self.expr()?;
            let op = match self.bump() {
                Token {
                    tok: Tok::Cmp(op), ..
                } => op,
                other => return Err(syntax(other.offset, "expected a comparison operator")),
            };
            let rhs = self.expr()?;
            self.expect(Tok::Comma, "`,` after branch condition")?;
            let value = self.expr()?;
            self.expect(Tok::RParen, "`)` closing a piecewise branch")?;
            branches.push((Condition { lhs, op, rhs }, value));
            match self.peek().tok {
                Tok::Comma => {
                    self.bump();
                }
                Tok::RParen => return Err(ParseError::MissingElse { offset: start }),
                _ => return Err(syntax(self.peek().offset, "expected `,` or `)`")),
            }
        }
    }
}
