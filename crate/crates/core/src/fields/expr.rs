//! Expression language for vector-field components.
//!
//! Grammar, loosest binding first:
//!
//! ```text
//! sum     := product (('+' | '-') product)*
//! product := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := atom ('^' exponent)?
//! exponent:= '-'? INTEGER | '(' '-'? INTEGER ')'
//! atom    := NUMBER | NUMBER 'i' | 'i' | VARIABLE
//!          | ('exp' | 'sqrt' | 'log') '(' sum ')' | '(' sum ')'
//! ```
//!
//! Variables are `z1` … `zn`, with `z` accepted for `z1` when n = 1. The
//! function set is holomorphic away from the principal branch cut of `sqrt`
//! and `log` (the negative real axis), so every parsed field is holomorphic
//! where it is finite.

use std::fmt;

use crate::{Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Sqrt,
    Log,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Sqrt => "sqrt",
            Func::Log => "log",
        }
    }

    fn from_name(name: &str) -> Option<Func> {
        match name {
            "exp" => Some(Func::Exp),
            "sqrt" => Some(Func::Sqrt),
            "log" => Some(Func::Log),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    /// Nonnegative real literal.
    Real(f64),
    /// Imaginary literal `b·i`; `i` itself is `Imag(1.0)`.
    Imag(f64),
    /// Zero-based variable index.
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Call(Func, Box<Expr>),
}

const MAX_EXPONENT: i32 = 1024;

impl Expr {
    /// Parse a single expression over `n` variables.
    pub fn parse(text: &str, n: usize) -> Result<Expr> {
        parse_at(text, 0, n)
    }

    /// Evaluate at `z`; `z` must have at least as many entries as the largest
    /// variable index used.
    pub fn eval(&self, z: &[C64]) -> Result<C64> {
        let v = self.eval_inner(z)?;
        if v.re.is_finite() && v.im.is_finite() {
            Ok(v)
        } else {
            Err(Error::FieldEvaluation(format!(
                "`{self}` is not finite at this point"
            )))
        }
    }

    fn eval_inner(&self, z: &[C64]) -> Result<C64> {
        Ok(match self {
            Expr::Real(x) => C64::new(*x, 0.0),
            Expr::Imag(y) => C64::new(0.0, *y),
            Expr::Var(k) => *z.get(*k).ok_or(Error::DimensionMismatch {
                expected: k + 1,
                found: z.len(),
            })?,
            Expr::Neg(a) => -a.eval_inner(z)?,
            Expr::Add(a, b) => a.eval_inner(z)? + b.eval_inner(z)?,
            Expr::Sub(a, b) => a.eval_inner(z)? - b.eval_inner(z)?,
            Expr::Mul(a, b) => a.eval_inner(z)? * b.eval_inner(z)?,
            Expr::Div(a, b) => {
                let num = a.eval_inner(z)?;
                let den = b.eval_inner(z)?;
                if den == C64::new(0.0, 0.0) {
                    return Err(Error::FieldEvaluation("division by zero".into()));
                }
                num / den
            }
            Expr::Pow(a, k) => {
                let base = a.eval_inner(z)?;
                if *k < 0 && base == C64::new(0.0, 0.0) {
                    return Err(Error::FieldEvaluation("negative power of zero".into()));
                }
                base.powi(*k)
            }
            Expr::Call(f, a) => {
                let arg = a.eval_inner(z)?;
                match f {
                    Func::Exp => arg.exp(),
                    Func::Sqrt | Func::Log if arg == C64::new(0.0, 0.0) => {
                        return Err(Error::FieldEvaluation(format!("{}(0)", f.name())))
                    }
                    Func::Sqrt => arg.sqrt(),
                    Func::Log => arg.ln(),
                }
            }
        })
    }

    /// Number of variables referenced, i.e. one more than the largest index.
    pub fn arity(&self) -> usize {
        match self {
            Expr::Real(_) | Expr::Imag(_) => 0,
            Expr::Var(k) => k + 1,
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Call(_, a) => a.arity(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.arity().max(b.arity())
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(_) => 3,
            Expr::Pow(..) => 4,
            _ => 5,
        }
    }

    /// Canonical rendering. `n` controls whether `z1` prints as `z`.
    pub fn display(&self, n: usize) -> Printer<'_> {
        Printer { expr: self, n }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display(self.arity().max(2)))
    }
}

/// Display adapter returned by [`Expr::display`].
pub struct Printer<'a> {
    expr: &'a Expr,
    n: usize,
}

impl fmt::Display for Printer<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, self.expr, self.n, 0)
    }
}

fn write_expr(f: &mut fmt::Formatter<'_>, e: &Expr, n: usize, min_prec: u8) -> fmt::Result {
    let paren = e.precedence() < min_prec;
    if paren {
        f.write_str("(")?;
    }
    match e {
        Expr::Real(x) => f.write_str(&crate::serial::format_real(*x))?,
        Expr::Imag(y) if *y == 1.0 => f.write_str("i")?,
        Expr::Imag(y) => write!(f, "{}i", crate::serial::format_real(*y))?,
        Expr::Var(0) if n == 1 => f.write_str("z")?,
        Expr::Var(k) => write!(f, "z{}", k + 1)?,
        Expr::Neg(a) => {
            f.write_str("-")?;
            write_expr(f, a, n, 3)?;
        }
        Expr::Add(a, b) | Expr::Sub(a, b) => {
            write_expr(f, a, n, 1)?;
            f.write_str(if matches!(e, Expr::Add(..)) {
                " + "
            } else {
                " - "
            })?;
            write_expr(f, b, n, 2)?;
        }
        Expr::Mul(a, b) | Expr::Div(a, b) => {
            write_expr(f, a, n, 2)?;
            f.write_str(if matches!(e, Expr::Mul(..)) { "*" } else { "/" })?;
            write_expr(f, b, n, 3)?;
        }
        Expr::Pow(a, k) => {
            write_expr(f, a, n, 5)?;
            write!(f, "^{k}")?;
        }
        Expr::Call(func, a) => {
            write!(f, "{}(", func.name())?;
            write_expr(f, a, n, 0)?;
            f.write_str(")")?;
        }
    }
    if paren {
        f.write_str(")")?;
    }
    Ok(())
}

/// Parse a closed constant such as `"0.5-2i"`.
pub fn parse_constant(text: &str) -> Result<C64> {
    Expr::parse(text, 0)?.eval(&[])
}

/// Parse `n` semicolon-separated components. Error offsets refer to `text`.
pub fn parse_components(text: &str, n: usize) -> Result<Vec<Expr>> {
    let mut out = Vec::new();
    let mut start = 0;
    for part in text.split(';') {
        out.push(parse_at(part, start, n)?);
        start += part.len() + 1;
    }
    if out.len() != n {
        return Err(Error::ArityMismatch {
            expected: n,
            found: out.len(),
        });
    }
    Ok(out)
}

/// Render components the way [`parse_components`] reads them.
pub fn print_components(exprs: &[Expr]) -> String {
    let n = exprs.len();
    exprs
        .iter()
        .map(|e| e.display(n).to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num { value: f64, integer: Option<i64> },
    ImagNum(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

struct Lexer<'a> {
    src: &'a [u8],
    text: &'a str,
    pos: usize,
    base: usize,
}

impl<'a> Lexer<'a> {
    fn err(&self, at: usize, message: impl Into<String>) -> Error {
        Error::Syntax {
            offset: self.base + at,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    /// Next token and its offset (relative to this component).
    fn next(&mut self) -> Result<(Tok, usize)> {
        self.skip_ws();
        let start = self.pos;
        let Some(&c) = self.src.get(self.pos) else {
            return Ok((Tok::End, start));
        };
        let simple = match c {
            b'+' => Some(Tok::Plus),
            b'-' => Some(Tok::Minus),
            b'*' => Some(Tok::Star),
            b'/' => Some(Tok::Slash),
            b'^' => Some(Tok::Caret),
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(t) = simple {
            self.pos += 1;
            return Ok((t, start));
        }
        if c.is_ascii_digit() || c == b'.' {
            return self.number(start);
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            while self
                .src
                .get(self.pos)
                .is_some_and(|b| b.is_ascii_alphanumeric() || *b == b'_')
            {
                self.pos += 1;
            }
            return Ok((Tok::Ident(self.text[start..self.pos].to_string()), start));
        }
        let ch = self.text[start..].chars().next().unwrap_or('?');
        Err(self.err(start, format!("unexpected character `{ch}`")))
    }

    fn digits(&mut self) -> usize {
        let s = self.pos;
        while self.src.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        self.pos - s
    }

    fn number(&mut self, start: usize) -> Result<(Tok, usize)> {
        let mut mantissa = self.digits();
        let mut integer = true;
        if self.src.get(self.pos) == Some(&b'.') {
            integer = false;
            self.pos += 1;
            mantissa += self.digits();
        }
        if mantissa == 0 {
            return Err(self.err(start, "malformed number"));
        }
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if self.digits() == 0 {
                self.pos = save;
            } else {
                integer = false;
            }
        }
        let lit = &self.text[start..self.pos];
        let value: f64 = lit
            .parse()
            .map_err(|_| self.err(start, format!("malformed number `{lit}`")))?;
        if !value.is_finite() {
            return Err(self.err(start, format!("number `{lit}` is out of range")));
        }
        let imag = self.src.get(self.pos) == Some(&b'i')
            && !self
                .src
                .get(self.pos + 1)
                .is_some_and(|b| b.is_ascii_alphanumeric() || *b == b'_');
        if imag {
            self.pos += 1;
            return Ok((Tok::ImagNum(value), start));
        }
        let integer = if integer {
            lit.parse::<i64>().ok()
        } else {
            None
        };
        Ok((Tok::Num { value, integer }, start))
    }
}

struct Parser<'a> {
    lex: Lexer<'a>,
    tok: Tok,
    at: usize,
    n: usize,
}

fn parse_at(text: &str, base: usize, n: usize) -> Result<Expr> {
    let mut lex = Lexer {
        src: text.as_bytes(),
        text,
        pos: 0,
        base,
    };
    let (tok, at) = lex.next()?;
    let mut p = Parser { lex, tok, at, n };
    let e = p.sum()?;
    if p.tok != Tok::End {
        return Err(p.error("unexpected input after expression"));
    }
    Ok(e)
}

impl Parser<'_> {
    fn advance(&mut self) -> Result<()> {
        let (tok, at) = self.lex.next()?;
        self.tok = tok;
        self.at = at;
        Ok(())
    }

    fn error(&self, message: &str) -> Error {
        let found = match &self.tok {
            Tok::End => "end of input".to_string(),
            t => format!("{t:?}"),
        };
        self.lex.err(self.at, format!("{message} (found {found})"))
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        if self.tok == tok {
            self.advance()
        } else {
            Err(self.error(&format!("expected {what}")))
        }
    }

    fn sum(&mut self) -> Result<Expr> {
        let mut lhs = self.product()?;
        loop {
            let op = match self.tok {
                Tok::Plus => Expr::Add as fn(Box<Expr>, Box<Expr>) -> Expr,
                Tok::Minus => Expr::Sub,
                _ => return Ok(lhs),
            };
            self.advance()?;
            let rhs = self.product()?;
            lhs = op(Box::new(lhs), Box::new(rhs));
        }
    }

    fn product(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.tok {
                Tok::Star => Expr::Mul as fn(Box<Expr>, Box<Expr>) -> Expr,
                Tok::Slash => Expr::Div,
                _ => return Ok(lhs),
            };
            self.advance()?;
            let rhs = self.unary()?;
            lhs = op(Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.tok == Tok::Minus {
            self.advance()?;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.tok != Tok::Caret {
            return Ok(base);
        }
        self.advance()?;
        let k = if self.tok == Tok::LParen {
            self.advance()?;
            let k = self.exponent()?;
            self.expect(Tok::RParen, "`)`")?;
            k
        } else {
            self.exponent()?
        };
        Ok(Expr::Pow(Box::new(base), k))
    }

    fn exponent(&mut self) -> Result<i32> {
        let negative = self.tok == Tok::Minus;
        if negative {
            self.advance()?;
        }
        let Tok::Num {
            integer: Some(k), ..
        } = self.tok
        else {
            return Err(self.error("expected an integer exponent"));
        };
        if k > MAX_EXPONENT as i64 {
            return Err(self.error("exponent too large"));
        }
        self.advance()?;
        let k = k as i32;
        Ok(if negative { -k } else { k })
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.tok.clone() {
            Tok::Num { value, .. } => {
                self.advance()?;
                Ok(Expr::Real(value))
            }
            Tok::ImagNum(value) => {
                self.advance()?;
                Ok(Expr::Imag(value))
            }
            Tok::LParen => {
                self.advance()?;
                let e = self.sum()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                let at = self.lex.base + self.at;
                self.advance()?;
                if name == "i" {
                    return Ok(Expr::Imag(1.0));
                }
                if let Some(func) = Func::from_name(&name) {
                    self.expect(Tok::LParen, &format!("`(` after `{name}`"))?;
                    let arg = self.sum()?;
                    self.expect(Tok::RParen, "`)`")?;
                    return Ok(Expr::Call(func, Box::new(arg)));
                }
                self.variable(&name)
                    .ok_or(Error::UnknownIdentifier { name, offset: at })
            }
            _ => Err(self.error("expected an expression")),
        }
    }

    fn variable(&self, name: &str) -> Option<Expr> {
        if name == "z" && self.n == 1 {
            return Some(Expr::Var(0));
        }
        let digits = name.strip_prefix('z')?;
        if digits.starts_with('0') {
            return None;
        }
        let k: usize = digits.parse().ok()?;
        (1..=self.n).contains(&k).then(|| Expr::Var(k - 1))
    }
}

/// Constant `c` as an expression (`a`, `bi`, `a + bi`, with negations).
pub fn constant(c: C64) -> Expr {
    let re = if c.re < 0.0 {
        Expr::Neg(Box::new(Expr::Real(-c.re)))
    } else {
        Expr::Real(c.re)
    };
    if c.im == 0.0 {
        return re;
    }
    let im = Expr::Imag(c.im.abs());
    match (c.re == 0.0, c.im < 0.0) {
        (true, false) => im,
        (true, true) => Expr::Neg(Box::new(im)),
        (false, false) => Expr::Add(Box::new(re), Box::new(im)),
        (false, true) => Expr::Sub(Box::new(re), Box::new(im)),
    }
}
