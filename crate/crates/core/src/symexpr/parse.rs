//! Recursive-descent parser.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' '-'? integer)?
//! atom   := number | 'x' index | func '(' expr ')' | '(' expr ')'
//! ```

use thiserror::Error;

use super::{Constant, Expr};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at token {token} (column {column}): {message}")]
    Syntax { token: usize, column: usize, message: String },
    #[error("unknown identifier `{name}` at token {token}")]
    UnknownIdentifier { name: String, token: usize },
    #[error("variable `{name}` exceeds dimension {dim}")]
    VariableOutOfRange { name: String, dim: usize },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(String),
    Ident(String),
    Sym(char),
    End,
}

struct Token {
    tok: Tok,
    column: usize,
}

fn tokenize(text: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let column = i + 1;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
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
            out.push(Token { tok: Tok::Num(chars[start..i].iter().collect()), column });
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token { tok: Tok::Ident(chars[start..i].iter().collect()), column });
        } else if "+-*/^()".contains(c) {
            out.push(Token { tok: Tok::Sym(c), column });
            i += 1;
        } else {
            return Err(ParseError::Syntax {
                token: out.len() + 1,
                column,
                message: format!("unexpected character `{c}`"),
            });
        }
    }
    out.push(Token { tok: Tok::End, column: chars.len() + 1 });
    Ok(out)
}

/// Is the decimal literal exactly representable as an `f64`?
///
/// A literal `M * 10^e` (M an integer) is exact when `e >= 0` and the value
/// fits in 53 bits, or when `e < 0`, `5^(-e)` divides M and the quotient fits
/// in 53 bits.
fn literal_is_exact(text: &str) -> bool {
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(p) => match text[p + 1..].parse::<i64>() {
            Ok(e) => (&text[..p], e),
            Err(_) => return false,
        },
        None => (text, 0),
    };
    let (int_part, frac_part) = match mantissa.find('.') {
        Some(p) => (&mantissa[..p], &mantissa[p + 1..]),
        None => (mantissa, ""),
    };
    let digits = format!("{int_part}{frac_part}");
    let digits = digits.trim_start_matches('0');
    let mut e = exponent - frac_part.len() as i64;
    let mut digits = digits.to_string();
    while digits.ends_with('0') {
        digits.pop();
        e += 1;
    }
    if digits.is_empty() {
        return true;
    }
    if digits.len() > 38 {
        return false;
    }
    let Ok(mut m) = digits.parse::<u128>() else { return false };
    const LIMIT: u128 = 1 << 53;
    if e >= 0 {
        for _ in 0..e {
            m = match m.checked_mul(10) {
                Some(v) => v,
                None => return false,
            };
        }
        // Powers of two beyond 53 bits are still exact.
        let tz = m.trailing_zeros();
        return (m >> tz) < LIMIT && m < (1u128 << 127) && ((m as f64) as u128 == m);
    }
    for _ in 0..(-e) {
        if m % 5 != 0 {
            return false;
        }
        m /= 5;
    }
    let tz = m.trailing_zeros();
    (m >> tz) < LIMIT
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    dim: Option<usize>,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError::Syntax { token: self.pos + 1, column: self.toks[self.pos].column, message: message.into() }
    }

    fn eat(&mut self, c: char) -> bool {
        if *self.peek() == Tok::Sym(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{c}`")))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat('/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat('-') {
            // A negated literal stays a literal unless it is raised to a power.
            if let Tok::Num(_) = self.peek() {
                if self.toks.get(self.pos + 1).map(|t| &t.tok) != Some(&Tok::Sym('^')) {
                    let Expr::Const(c) = self.atom()? else { unreachable!() };
                    return Ok(Expr::Const(Constant { value: -c.value, exact: c.exact }));
                }
            }
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if !self.eat('^') {
            return Ok(base);
        }
        let paren = self.eat('(');
        let negative = self.eat('-');
        let n = match self.peek().clone() {
            Tok::Num(s) => s
                .parse::<i32>()
                .map_err(|_| self.error(format!("exponent `{s}` is not an integer")))?,
            _ => return Err(self.error("expected integer exponent")),
        };
        self.pos += 1;
        if paren {
            self.expect(')')?;
        }
        Ok(Expr::Pow(Box::new(base), if negative { -n } else { n }))
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let token = self.pos + 1;
        match self.peek().clone() {
            Tok::Num(s) => {
                let value: f64 = s.parse().map_err(|_| self.error(format!("malformed number `{s}`")))?;
                if !value.is_finite() {
                    return Err(self.error(format!("number `{s}` is out of range")));
                }
                self.pos += 1;
                Ok(Expr::Const(Constant { value, exact: literal_is_exact(&s) }))
            }
            Tok::Ident(name) => {
                self.pos += 1;
                match name.as_str() {
                    "sin" | "cos" | "exp" => {
                        self.expect('(')?;
                        let arg = self.expr()?;
                        self.expect(')')?;
                        Ok(match name.as_str() {
                            "sin" => Expr::Sin(Box::new(arg)),
                            "cos" => Expr::Cos(Box::new(arg)),
                            _ => Expr::Exp(Box::new(arg)),
                        })
                    }
                    _ => {
                        let index = name
                            .strip_prefix('x')
                            .filter(|d| !d.is_empty() && !d.starts_with('0') && d.bytes().all(|b| b.is_ascii_digit()))
                            .and_then(|d| d.parse::<usize>().ok())
                            .ok_or_else(|| ParseError::UnknownIdentifier { name: name.clone(), token })?;
                        if let Some(dim) = self.dim {
                            if index > dim {
                                return Err(ParseError::VariableOutOfRange { name, dim });
                            }
                        }
                        Ok(Expr::Var(index - 1))
                    }
                }
            }
            Tok::Sym('(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::End => Err(self.error("unexpected end of input")),
            Tok::Sym(c) => Err(self.error(format!("unexpected `{c}`"))),
        }
    }
}

fn run(text: &str, dim: Option<usize>) -> Result<Expr, ParseError> {
    let mut p = Parser { toks: tokenize(text)?, pos: 0, dim };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(e)
}

/// Parses an expression over variables `x1, x2, ...`.
pub fn parse(text: &str) -> Result<Expr, ParseError> {
    run(text, None)
}

/// Parses an expression and rejects variables beyond `x{dim}`.
pub fn parse_in(text: &str, dim: usize) -> Result<Expr, ParseError> {
    run(text, Some(dim))
}
