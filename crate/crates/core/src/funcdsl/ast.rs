//! Expression trees over the single variable `t` and their parser.
//!
//! Grammar:
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := base ('^' number)?
//! base   := number | 't' | 'ln' '(' expr ')' | 'exp' '(' expr ')' | '(' expr ')'
//! ```

use std::fmt;

use serde::Serialize;

use super::logval::LogNum;
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub enum Expr<T> {
    Const(T),
    Var,
    Add(Box<Expr<T>>, Box<Expr<T>>),
    Sub(Box<Expr<T>>, Box<Expr<T>>),
    Mul(Box<Expr<T>>, Box<Expr<T>>),
    Div(Box<Expr<T>>, Box<Expr<T>>),
    /// Power with a constant exponent.
    Pow(Box<Expr<T>>, T),
    Ln(Box<Expr<T>>),
    Exp(Box<Expr<T>>),
}

impl<T: Real> Expr<T> {
    pub fn eval(&self, t: T) -> T {
        match self {
            Expr::Const(c) => *c,
            Expr::Var => t,
            Expr::Add(a, b) => a.eval(t) + b.eval(t),
            Expr::Sub(a, b) => a.eval(t) - b.eval(t),
            Expr::Mul(a, b) => a.eval(t) * b.eval(t),
            Expr::Div(a, b) => a.eval(t) / b.eval(t),
            Expr::Pow(a, c) => {
                let base = a.eval(t);
                if *c == T::one() {
                    base
                } else {
                    base.powf(*c)
                }
            }
            Expr::Ln(a) => a.eval(t).ln(),
            Expr::Exp(a) => a.eval(t).exp(),
        }
    }

    /// Evaluates with the variable given through its logarithm, so that
    /// arguments like `2^-8000` do not underflow.
    pub(crate) fn eval_log(&self, t: LogNum<T>) -> LogNum<T> {
        match self {
            Expr::Const(c) => LogNum::from_value(*c),
            Expr::Var => t,
            Expr::Add(a, b) => a.eval_log(t).add(b.eval_log(t)),
            Expr::Sub(a, b) => a.eval_log(t).sub(b.eval_log(t)),
            Expr::Mul(a, b) => a.eval_log(t).mul(b.eval_log(t)),
            Expr::Div(a, b) => a.eval_log(t).div(b.eval_log(t)),
            Expr::Pow(a, c) => a.eval_log(t).powf(*c),
            Expr::Ln(a) => a.eval_log(t).ln(),
            Expr::Exp(a) => a.eval_log(t).exp(),
        }
    }
}

impl<T: Real> fmt::Display for Expr<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Var => write!(f, "t"),
            Expr::Add(a, b) => write!(f, "add({a}, {b})"),
            Expr::Sub(a, b) => write!(f, "sub({a}, {b})"),
            Expr::Mul(a, b) => write!(f, "mul({a}, {b})"),
            Expr::Div(a, b) => write!(f, "div({a}, {b})"),
            Expr::Pow(a, c) => write!(f, "pow({a}, {c})"),
            Expr::Ln(a) => write!(f, "ln({a})"),
            Expr::Exp(a) => write!(f, "exp({a})"),
        }
    }
}

/// A parsed expression together with the text it came from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrliczExpr<T> {
    #[serde(skip)]
    pub ast: Expr<T>,
    pub source: String,
}

pub fn parse<T: Real>(text: &str) -> Result<OrliczExpr<T>> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    p.skip_ws();
    if p.at_end() {
        return Err(Error::Syntax {
            offset: 0,
            message: "empty expression".into(),
        });
    }
    let ast = p.expr()?;
    p.skip_ws();
    if !p.at_end() {
        return Err(p.error(format!("unexpected `{}`", p.src[p.pos] as char)));
    }
    Ok(OrliczExpr {
        ast,
        source: text.to_string(),
    })
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn at_end(&self) -> bool {
        self.pos >= self.src.len()
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn error(&self, message: String) -> Error {
        Error::Syntax {
            offset: self.pos,
            message,
        }
    }

    fn eat(&mut self, c: u8) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else if self.at_end() {
            Err(self.error(format!("expected `{}`, found end of input", c as char)))
        } else {
            Err(self.error(format!(
                "expected `{}`, found `{}`",
                c as char, self.src[self.pos] as char
            )))
        }
    }

    fn expr<T: Real>(&mut self) -> Result<Expr<T>> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat(b'-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term<T: Real>(&mut self) -> Result<Expr<T>> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat(b'*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat(b'/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    /// Leading minus binds looser than `^`: `-t^2` is `0 - t^2`.
    fn unary<T: Real>(&mut self) -> Result<Expr<T>> {
        self.skip_ws();
        if self.eat(b'-') {
            let inner = self.unary()?;
            Ok(Expr::Sub(Box::new(Expr::Const(T::zero())), Box::new(inner)))
        } else {
            self.factor()
        }
    }

    fn factor<T: Real>(&mut self) -> Result<Expr<T>> {
        let base = self.base()?;
        if self.eat(b'^') {
            self.skip_ws();
            let exponent = self.number()?;
            Ok(Expr::Pow(Box::new(base), exponent))
        } else {
            Ok(base)
        }
    }

    fn base<T: Real>(&mut self) -> Result<Expr<T>> {
        self.skip_ws();
        match self.peek() {
            None => Err(self.error("expected a number, `t`, a function or `(`".into())),
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                self.expect(b')')?;
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => Ok(Expr::Const(self.number()?)),
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'_') {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                match name {
                    "t" => Ok(Expr::Var),
                    "ln" | "exp" => {
                        self.expect(b'(')?;
                        let arg = Box::new(self.expr()?);
                        self.expect(b')')?;
                        Ok(if name == "ln" {
                            Expr::Ln(arg)
                        } else {
                            Expr::Exp(arg)
                        })
                    }
                    _ => Err(Error::UnknownIdentifier {
                        offset: start,
                        name: name.to_string(),
                    }),
                }
            }
            Some(c) => Err(self.error(format!("unexpected `{}`", c as char))),
        }
    }

    /// Decimal literal: `digits [. digits] [(e|E) [+-] digits]`.
    fn number<T: Real>(&mut self) -> Result<T> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            let s = p.pos;
            while matches!(p.peek(), Some(c) if c.is_ascii_digit()) {
                p.pos += 1;
            }
            p.pos - s
        };
        let mut n = digits(self);
        if self.peek() == Some(b'.') {
            self.pos += 1;
            n += digits(self);
        }
        if n == 0 {
            self.pos = start;
            return Err(self.error("expected a number".into()));
        }
        if matches!(self.peek(), Some(b'e' | b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.peek(), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if digits(self) == 0 {
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        let value: f64 = text.parse().map_err(|_| Error::Syntax {
            offset: start,
            message: format!("malformed number `{text}`"),
        })?;
        T::from_f64(value).ok_or_else(|| Error::Syntax {
            offset: start,
            message: format!("number `{text}` out of range"),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn show(text: &str) -> String {
        parse::<f64>(text).unwrap().ast.to_string()
    }

    #[test]
    fn parses_power() {
        assert_eq!(show("t^2"), "pow(t, 2)");
    }

    #[test]
    fn parses_log_damped_square() {
        assert_eq!(show("t^2 / (1 - ln(t))"), "div(pow(t, 2), sub(1, ln(t)))");
    }

    #[test]
    fn unary_minus() {
        let e = parse::<f64>("-t^2 + 3").unwrap();
        assert_eq!(e.ast.eval(2.0), -1.0);
        assert_eq!(parse::<f64>("exp(-1/t)").unwrap().ast.eval(1.0), (-1f64).exp());
        assert_eq!(parse::<f64>("2*-t").unwrap().ast.eval(3.0), -6.0);
        assert!(parse::<f64>("t - -").is_err());
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(show("1 + 2*t - t/4"), "sub(add(1, mul(2, t)), div(t, 4))");
        assert_eq!(show("exp(t)^0.5"), "pow(exp(t), 0.5)");
        assert_eq!(show("2.5e-1*t"), "mul(0.25, t)");
    }

    #[test]
    fn trailing_operator_is_a_syntax_error_at_end() {
        match parse::<f64>("t +") {
            Err(Error::Syntax { offset, .. }) => assert_eq!(offset, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn reports_unknown_identifiers_and_garbage() {
        assert_eq!(
            parse::<f64>("t * sin(t)").unwrap_err(),
            Error::UnknownIdentifier {
                offset: 4,
                name: "sin".into()
            }
        );
        assert!(matches!(parse::<f64>("").unwrap_err(), Error::Syntax { offset: 0, .. }));
        assert!(matches!(parse::<f64>("t ^ t").unwrap_err(), Error::Syntax { offset: 4, .. }));
        assert!(matches!(parse::<f64>("(t").unwrap_err(), Error::Syntax { offset: 2, .. }));
        assert!(matches!(parse::<f64>("t t").unwrap_err(), Error::Syntax { offset: 2, .. }));
    }

    #[test]
    fn evaluates() {
        let e = parse::<f64>("t^2/(1-ln(t))").unwrap();
        assert_eq!(e.ast.eval(1.0), 1.0);
        assert_eq!(e.ast.eval(0.0), 0.0);
        let v = e.ast.eval(0.5);
        assert!((v - 0.25 / (1.0 + 2f64.ln())).abs() < 1e-15);
    }
}
