//! Initial-profile expressions over `theta` and `phi`.
//!
//! Grammar:
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | atom
//! atom   := number | 'pi' | 'e' | 'theta' | 'phi' | func '(' expr ')' | '(' expr ')'
//! func   := sin | cos | exp | cosh | sinh
//! ```

use std::f64::consts::{E, PI};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("column {col}: {msg}")]
pub struct ExprError {
    pub col: usize,
    pub msg: String,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Func {
    Sin,
    Cos,
    Exp,
    Cosh,
    Sinh,
}

impl Func {
    fn apply(self, x: f64) -> f64 {
        match self {
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Exp => x.exp(),
            Func::Cosh => x.cosh(),
            Func::Sinh => x.sinh(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(f64),
    Theta,
    Phi,
    Neg(Box<Node>),
    Bin(char, Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

impl Node {
    fn eval(&self, theta: f64, phi: f64) -> f64 {
        match self {
            Node::Num(v) => *v,
            Node::Theta => theta,
            Node::Phi => phi,
            Node::Neg(a) => -a.eval(theta, phi),
            Node::Bin(op, a, b) => {
                let (x, y) = (a.eval(theta, phi), b.eval(theta, phi));
                match op {
                    '+' => x + y,
                    '-' => x - y,
                    '*' => x * y,
                    _ => x / y,
                }
            }
            Node::Call(f, a) => f.apply(a.eval(theta, phi)),
        }
    }

    fn uses_phi(&self) -> bool {
        match self {
            Node::Phi => true,
            Node::Num(_) | Node::Theta => false,
            Node::Neg(a) | Node::Call(_, a) => a.uses_phi(),
            Node::Bin(_, a, b) => a.uses_phi() || b.uses_phi(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    Open,
    Close,
}

fn tokenize(src: &str) -> Result<Vec<(usize, Tok)>, ExprError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            // exponent, only when followed by a digit (optionally signed)
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let v = text.parse::<f64>().map_err(|_| ExprError {
                col,
                msg: format!("malformed number '{text}'"),
            })?;
            out.push((col, Tok::Num(v)));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((col, Tok::Ident(chars[start..i].iter().collect())));
        } else {
            let tok = match c {
                '+' | '-' | '*' | '/' => Tok::Op(c),
                '(' => Tok::Open,
                ')' => Tok::Close,
                _ => {
                    return Err(ExprError {
                        col,
                        msg: format!("unexpected character '{c}'"),
                    })
                }
            };
            out.push((col, tok));
            i += 1;
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(c, _)| *c)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ExprError> {
        Err(ExprError {
            col: self.col(),
            msg: msg.into(),
        })
    }

    fn expr(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.term()?;
        while let Some(Tok::Op(op @ ('+' | '-'))) = self.peek() {
            let op = *op;
            self.pos += 1;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(self.term()?));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.unary()?;
        while let Some(Tok::Op(op @ ('*' | '/'))) = self.peek() {
            let op = *op;
            self.pos += 1;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(self.unary()?));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Node, ExprError> {
        if let Some(Tok::Op('-')) = self.peek() {
            self.pos += 1;
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        self.atom()
    }

    fn close(&mut self) -> Result<(), ExprError> {
        match self.peek() {
            Some(Tok::Close) => {
                self.pos += 1;
                Ok(())
            }
            _ => self.err("expected ')'"),
        }
    }

    fn atom(&mut self) -> Result<Node, ExprError> {
        let Some(tok) = self.peek().cloned() else {
            return self.err("unexpected end of expression");
        };
        let col = self.col();
        self.pos += 1;
        match tok {
            Tok::Num(v) => Ok(Node::Num(v)),
            Tok::Open => {
                let inner = self.expr()?;
                self.close()?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                let func = match name.as_str() {
                    "pi" => return Ok(Node::Num(PI)),
                    "e" => return Ok(Node::Num(E)),
                    "theta" => return Ok(Node::Theta),
                    "phi" => return Ok(Node::Phi),
                    "sin" => Func::Sin,
                    "cos" => Func::Cos,
                    "exp" => Func::Exp,
                    "cosh" => Func::Cosh,
                    "sinh" => Func::Sinh,
                    _ => {
                        return Err(ExprError {
                            col,
                            msg: format!("unknown name '{name}'"),
                        })
                    }
                };
                if self.peek() != Some(&Tok::Open) {
                    return self.err(format!("expected '(' after '{name}'"));
                }
                self.pos += 1;
                let arg = self.expr()?;
                self.close()?;
                Ok(Node::Call(func, Box::new(arg)))
            }
            Tok::Op(c) => Err(ExprError {
                col,
                msg: format!("unexpected '{c}'"),
            }),
            Tok::Close => Err(ExprError {
                col,
                msg: "unexpected ')'".into(),
            }),
        }
    }
}

/// A parsed profile `rho(theta, phi)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    source: String,
    root: Node,
}

impl Expr {
    pub fn parse(src: &str) -> Result<Self, ExprError> {
        let toks = tokenize(src)?;
        let mut p = Parser {
            toks,
            pos: 0,
            end: src.chars().count() + 1,
        };
        let root = p.expr()?;
        if p.pos != p.toks.len() {
            return p.err("trailing input");
        }
        Ok(Self {
            source: src.to_string(),
            root,
        })
    }

    pub fn eval(&self, theta: f64, phi: f64) -> f64 {
        self.root.eval(theta, phi)
    }

    pub fn uses_phi(&self) -> bool {
        self.root.uses_phi()
    }

    pub fn source(&self) -> &str {
        &self.source
    }
}
