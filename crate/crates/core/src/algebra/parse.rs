//! Parser for univariate rational-function expressions such as
//! `-64*(1+t)^2*(7t-4)*(17t+4)/(1+4t)^2`.
//!
//! Grammar: sums and differences of products/quotients of powers; juxtaposition
//! multiplies (`2t`, `(t+1)(t-2)`); exponents are integers, possibly negative.
//! At most one variable name may appear.

use num_bigint::BigInt;

use super::{AlgebraError, RatFunc, Rational};

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Num(BigInt),
    Ident(String),
    Op(char),
}

fn tokenize(src: &str) -> Result<Vec<Token>, AlgebraError> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            out.push(Token::Num(s.parse().expect("digits")));
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token::Ident(chars[start..i].iter().collect()));
        } else if "+-*/^()".contains(c) {
            out.push(Token::Op(c));
            i += 1;
        } else if c == '−' {
            out.push(Token::Op('-'));
            i += 1;
        } else {
            return Err(AlgebraError::Parse(format!("unexpected character {c:?}")));
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    var: Option<String>,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn eat_op(&mut self, op: char) -> bool {
        if self.peek() == Some(&Token::Op(op)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<RatFunc, AlgebraError> {
        let mut acc = self.term()?;
        loop {
            if self.eat_op('+') {
                acc = acc.add(&self.term()?);
            } else if self.eat_op('-') {
                acc = acc.sub(&self.term()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn starts_atom(&self) -> bool {
        matches!(
            self.peek(),
            Some(Token::Num(_)) | Some(Token::Ident(_)) | Some(Token::Op('('))
        )
    }

    fn term(&mut self) -> Result<RatFunc, AlgebraError> {
        let mut acc = self.unary()?;
        loop {
            if self.eat_op('*') {
                acc = acc.mul(&self.unary()?);
            } else if self.eat_op('/') {
                acc = acc.div(&self.unary()?)?;
            } else if self.starts_atom() {
                acc = acc.mul(&self.power()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<RatFunc, AlgebraError> {
        if self.eat_op('-') {
            return Ok(self.unary()?.neg());
        }
        if self.eat_op('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<RatFunc, AlgebraError> {
        let base = self.atom()?;
        if self.eat_op('^') {
            let neg = self.eat_op('-');
            let e = match self.peek() {
                Some(Token::Num(n)) => {
                    let e: i32 = n
                        .try_into()
                        .map_err(|_| AlgebraError::Parse("exponent too large".into()))?;
                    self.pos += 1;
                    e
                }
                _ => return Err(AlgebraError::Parse("expected integer exponent".into())),
            };
            return base.pow(if neg { -e } else { e });
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<RatFunc, AlgebraError> {
        match self.peek().cloned() {
            Some(Token::Num(n)) => {
                self.pos += 1;
                Ok(RatFunc::constant(Rational::from_integer(n)))
            }
            Some(Token::Ident(name)) => {
                self.pos += 1;
                match &self.var {
                    Some(v) if *v != name => Err(AlgebraError::Parse(format!(
                        "expression mixes variables {v:?} and {name:?}"
                    ))),
                    _ => {
                        self.var = Some(name);
                        Ok(RatFunc::x())
                    }
                }
            }
            Some(Token::Op('(')) => {
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat_op(')') {
                    return Err(AlgebraError::Parse("unbalanced parenthesis".into()));
                }
                Ok(inner)
            }
            other => Err(AlgebraError::Parse(format!("unexpected token {other:?}"))),
        }
    }
}

/// Parses an expression, returning the rational function and the variable name used
/// (if any).
pub fn parse_ratfunc_with_var(src: &str) -> Result<(RatFunc, Option<String>), AlgebraError> {
    let mut parser = Parser {
        tokens: tokenize(src)?,
        pos: 0,
        var: None,
    };
    if parser.tokens.is_empty() {
        return Err(AlgebraError::Parse("empty expression".into()));
    }
    let f = parser.expr()?;
    if parser.pos != parser.tokens.len() {
        return Err(AlgebraError::Parse(format!(
            "trailing input at token {}",
            parser.pos
        )));
    }
    Ok((f, parser.var))
}

pub fn parse_ratfunc(src: &str) -> Result<RatFunc, AlgebraError> {
    parse_ratfunc_with_var(src).map(|(f, _)| f)
}

/// Parses a constant expression (e.g. `13/7`, `-4`) to a rational.
pub fn parse_rational(src: &str) -> Result<Rational, AlgebraError> {
    let f = parse_ratfunc(src)?;
    f.as_constant()
        .ok_or_else(|| AlgebraError::Parse(format!("{src:?} is not a constant")))
}
