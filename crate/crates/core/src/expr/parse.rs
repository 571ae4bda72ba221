use alloc::format;
use alloc::string::{String, ToString};

use super::{Expr, ExprError, Func, Var};

/// Parses `text` as an expression in `n` independent variables.
///
/// Grammar (whitespace-insensitive):
///
/// ```text
/// expr   := term (("+" | "-") term)*
/// term   := factor (("*" | "/") factor)*
/// factor := base ("^" uint)?
/// base   := number | ident | fn "(" expr ")" | "(" expr ")" | "-" base
/// ```
///
/// Identifiers are `x1..xn`, `u`, `u1..un` and `uij` with `i <= j`; the
/// underscore forms `u_i` and `u_i_j` are accepted for any index.
pub fn parse(text: &str, n: usize) -> Result<Expr, ExprError> {
    if n < 2 {
        return Err(ExprError::UnsupportedDimension(n));
    }
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
        n,
    };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.syntax(format!("unexpected `{}`", p.src[p.pos] as char)));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    n: usize,
}

impl Parser<'_> {
    fn syntax(&self, message: impl Into<String>) -> ExprError {
        ExprError::Syntax {
            offset: self.pos,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                lhs = Expr::add(lhs, self.term()?);
            } else if self.eat(b'-') {
                lhs = Expr::sub(lhs, self.term()?);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.factor()?;
        loop {
            if self.eat(b'*') {
                lhs = Expr::mul(lhs, self.factor()?);
            } else if self.eat(b'/') {
                lhs = Expr::div(lhs, self.factor()?);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn factor(&mut self) -> Result<Expr, ExprError> {
        let base = self.base()?;
        if !self.eat(b'^') {
            return Ok(base);
        }
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.syntax("expected a non-negative integer exponent"));
        }
        let digits = core::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        let k: u32 = digits.parse().map_err(|_| ExprError::Syntax {
            offset: start,
            message: "exponent too large".to_string(),
        })?;
        Ok(Expr::pow(base, k))
    }

    fn base(&mut self) -> Result<Expr, ExprError> {
        match self.peek() {
            None => Err(self.syntax("unexpected end of input")),
            Some(b'-') => {
                self.pos += 1;
                Ok(Expr::neg(self.base()?))
            }
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.syntax("expected `)`"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.ident(),
            Some(c) => Err(self.syntax(format!("unexpected `{}`", c as char))),
        }
    }

    fn number(&mut self) -> Result<Expr, ExprError> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            let s = p.pos;
            while p.pos < p.src.len() && p.src[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
            p.pos - s
        };
        let mut count = digits(self);
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            count += digits(self);
        }
        if count == 0 {
            self.pos = start;
            return Err(self.syntax("malformed number"));
        }
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if digits(self) == 0 {
                self.pos = save;
            }
        }
        let text = core::str::from_utf8(&self.src[start..self.pos]).expect("ascii number");
        let v: f64 = text.parse().map_err(|_| ExprError::Syntax {
            offset: start,
            message: format!("malformed number `{text}`"),
        })?;
        Ok(Expr::Const(v))
    }

    fn ident(&mut self) -> Result<Expr, ExprError> {
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let name = core::str::from_utf8(&self.src[start..self.pos]).expect("ascii identifier");
        if let Some(f) = Func::from_name(name) {
            if !self.eat(b'(') {
                return Err(self.syntax(format!("expected `(` after `{name}`")));
            }
            let arg = self.expr()?;
            if !self.eat(b')') {
                return Err(self.syntax("expected `)`"));
            }
            return Ok(Expr::func(f, arg));
        }
        let var = classify_ident(name).ok_or_else(|| ExprError::UnknownVariable {
            name: name.to_string(),
            offset: start,
        })?;
        if !var.fits(self.n) {
            return Err(ExprError::Dimension {
                name: name.to_string(),
                offset: start,
                n: self.n,
            });
        }
        Ok(Expr::Var(var))
    }
}

fn index(s: &str) -> Option<usize> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    match s.parse::<usize>().ok()? {
        0 => None,
        i => Some(i - 1),
    }
}

fn classify_ident(name: &str) -> Option<Var> {
    if name == "u" {
        return Some(Var::U);
    }
    if let Some(rest) = name.strip_prefix('x') {
        return index(rest.strip_prefix('_').unwrap_or(rest)).map(Var::X);
    }
    let rest = name.strip_prefix('u')?;
    if let Some(under) = rest.strip_prefix('_') {
        return match under.split_once('_') {
            None => index(under).map(Var::P),
            Some((i, j)) => {
                let (i, j) = (index(i)?, index(j)?);
                (i <= j).then_some(Var::H(i, j))
            }
        };
    }
    match rest.len() {
        2 => {
            let b = rest.as_bytes();
            let i = index(core::str::from_utf8(&b[..1]).ok()?)?;
            let j = index(core::str::from_utf8(&b[1..]).ok()?)?;
            // uji with j > i is not an alias for uij
            (i <= j).then_some(Var::H(i, j))
        }
        _ => index(rest).map(Var::P),
    }
}
