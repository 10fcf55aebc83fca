//! Small arithmetic expression grammar used for user-supplied warping
//! functions (`custom:<expr>` over the variable `r`) and custom chart
//! components (over `u1..um`).
//!
//! Grammar: `+ - * / ^`, unary minus, parentheses, the functions
//! `sin cos sinh cosh exp log`, numeric literals and the constant `pi`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Sinh,
    Cosh,
    Exp,
    Log,
}

impl Func {
    fn apply(self, x: f64) -> f64 {
        match self {
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Sinh => x.sinh(),
            Func::Cosh => x.cosh(),
            Func::Exp => x.exp(),
            Func::Log => x.ln(),
        }
    }

    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            "exp" => Func::Exp,
            "log" => Func::Log,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone)]
pub enum Expr {
    Num(f64),
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn eval(&self, vars: &[f64]) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Var(i) => vars[*i],
            Expr::Neg(a) => -a.eval(vars),
            Expr::Add(a, b) => a.eval(vars) + b.eval(vars),
            Expr::Sub(a, b) => a.eval(vars) - b.eval(vars),
            Expr::Mul(a, b) => a.eval(vars) * b.eval(vars),
            Expr::Div(a, b) => a.eval(vars) / b.eval(vars),
            Expr::Pow(a, b) => a.eval(vars).powf(b.eval(vars)),
            Expr::Call(f, a) => f.apply(a.eval(vars)),
        }
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

fn tokenize(src: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let bytes = src.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' => i += 1,
            '+' => {
                out.push(Token::Plus);
                i += 1;
            }
            // accept the unicode minus sign as well
            '-' => {
                out.push(Token::Minus);
                i += 1;
            }
            '*' => {
                out.push(Token::Star);
                i += 1;
            }
            '/' => {
                out.push(Token::Slash);
                i += 1;
            }
            '^' => {
                out.push(Token::Caret);
                i += 1;
            }
            '(' => {
                out.push(Token::LParen);
                i += 1;
            }
            ')' => {
                out.push(Token::RParen);
                i += 1;
            }
            _ if c.is_ascii_digit() || c == '.' => {
                let start = i;
                while i < bytes.len() {
                    let d = bytes[i] as char;
                    if d.is_ascii_digit() || d == '.' {
                        i += 1;
                    } else if (d == 'e' || d == 'E')
                        && i + 1 < bytes.len()
                        && ((bytes[i + 1] as char).is_ascii_digit()
                            || bytes[i + 1] == b'+'
                            || bytes[i + 1] == b'-')
                    {
                        i += 2;
                    } else {
                        break;
                    }
                }
                let text = &src[start..i];
                let v: f64 = text
                    .parse()
                    .map_err(|_| Error::Config(format!("bad numeric literal `{text}`")))?;
                out.push(Token::Num(v));
            }
            _ if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < bytes.len()
                    && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                out.push(Token::Ident(src[start..i].to_string()));
            }
            _ => {
                return Err(Error::Config(format!(
                    "unexpected character `{c}` in expression `{src}`"
                )))
            }
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    vars: &'a [&'a str],
    src: &'a str,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, t: Token) -> Result<()> {
        match self.bump() {
            Some(got) if got == t => Ok(()),
            other => Err(Error::Config(format!(
                "expected {t:?}, got {other:?} in `{}`",
                self.src
            ))),
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Token::Plus) => {
                    self.bump();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(Token::Minus) => {
                    self.bump();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Some(Token::Star) => {
                    self.bump();
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
                }
                Some(Token::Slash) => {
                    self.bump();
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.factor()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    // right-associative power binds tighter than unary minus on the left,
    // so -r^2 is -(r^2)
    fn factor(&mut self) -> Result<Expr> {
        if let Some(Token::Minus) = self.peek() {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        let base = self.primary()?;
        if let Some(Token::Caret) = self.peek() {
            self.bump();
            let exp = self.factor()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr> {
        match self.bump() {
            Some(Token::Num(v)) => Ok(Expr::Num(v)),
            Some(Token::LParen) => {
                let e = self.expr()?;
                self.expect(Token::RParen)?;
                Ok(e)
            }
            Some(Token::Ident(name)) => {
                if let Some(f) = Func::from_name(&name) {
                    self.expect(Token::LParen)?;
                    let arg = self.expr()?;
                    self.expect(Token::RParen)?;
                    return Ok(Expr::Call(f, Box::new(arg)));
                }
                if name == "pi" {
                    return Ok(Expr::Num(std::f64::consts::PI));
                }
                if let Some(idx) = self.vars.iter().position(|v| *v == name) {
                    return Ok(Expr::Var(idx));
                }
                Err(Error::Config(format!(
                    "unknown identifier `{name}` in `{}` (variables: {:?})",
                    self.src, self.vars
                )))
            }
            other => Err(Error::Config(format!(
                "unexpected token {other:?} in `{}`",
                self.src
            ))),
        }
    }
}

/// Parse `src` over the given variable names.
pub fn parse(src: &str, vars: &[&str]) -> Result<Expr> {
    let normalized = src.replace('\u{2212}', "-");
    let tokens = tokenize(&normalized)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        vars,
        src,
    };
    let e = p.expr()?;
    if p.pos != p.tokens.len() {
        return Err(Error::Config(format!("trailing tokens in `{src}`")));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn parses_arithmetic() {
        let e = parse("r + 0.1*r^3", &["r"]).unwrap();
        assert_relative_eq!(e.eval(&[2.0]), 2.0 + 0.1 * 8.0);
    }

    #[test]
    fn precedence_and_unary() {
        let e = parse("-r^2 + 2*r", &["r"]).unwrap();
        // unary minus applies to r^2
        assert_relative_eq!(e.eval(&[3.0]), -9.0 + 6.0);
    }

    #[test]
    fn functions_and_pi() {
        let e = parse("sinh(r)/cosh(r) + sin(pi)", &["r"]).unwrap();
        assert_relative_eq!(e.eval(&[1.0]), 1.0f64.tanh(), epsilon = 1e-15);
    }

    #[test]
    fn multiple_variables() {
        let e = parse("u1*cos(u2)", &["u1", "u2"]).unwrap();
        assert_relative_eq!(e.eval(&[2.0, 0.0]), 2.0);
    }

    #[test]
    fn rejects_unknown_identifier() {
        assert!(parse("q + 1", &["r"]).is_err());
    }

    #[test]
    fn rejects_trailing_tokens() {
        assert!(parse("r r", &["r"]).is_err());
    }
}
