//! Expressions over the jet variables `x_i, u, u_i, u_ij` of one dependent
//! and `n` independent variables.
//!
//! Expressions are immutable trees. Parsing folds literal subtrees into
//! constants and does nothing else, so `parse(print(e))` reproduces `e`
//! node for node. Differentiation prunes the zeros and ones it creates but
//! never rewrites the input.

mod jet;
mod parse;
mod taylor;

use alloc::boxed::Box;
use alloc::string::{String, ToString};
use core::fmt;

pub use jet::JetPoint;
pub use parse::parse;
pub use taylor::line_derivatives;

/// A jet coordinate. Indices are 0-based; second derivatives are stored
/// with `i <= j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    X(usize),
    U,
    P(usize),
    H(usize, usize),
}

impl Var {
    /// Second-derivative variable with the indices put in canonical order.
    pub fn hess(i: usize, j: usize) -> Self {
        if i <= j {
            Var::H(i, j)
        } else {
            Var::H(j, i)
        }
    }

    /// Largest 0-based index used, if any.
    fn max_index(self) -> Option<usize> {
        match self {
            Var::X(i) | Var::P(i) => Some(i),
            Var::H(_, j) => Some(j),
            Var::U => None,
        }
    }

    pub fn fits(self, n: usize) -> bool {
        self.max_index().is_none_or(|i| i < n)
    }

    /// Exchanges the two independent variables (`n = 2`).
    pub fn swap_planar(self) -> Self {
        let s = |i: usize| 1 - i;
        match self {
            Var::X(i) => Var::X(s(i)),
            Var::P(i) => Var::P(s(i)),
            Var::H(i, j) => Var::hess(s(i), s(j)),
            Var::U => Var::U,
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Var::X(i) => write!(f, "x{}", i + 1),
            Var::U => f.write_str("u"),
            Var::P(i) if i < 9 => write!(f, "u{}", i + 1),
            Var::P(i) => write!(f, "u_{}", i + 1),
            Var::H(i, j) if j < 9 => write!(f, "u{}{}", i + 1, j + 1),
            Var::H(i, j) => write!(f, "u_{}_{}", i + 1, j + 1),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    Tanh,
}

impl Func {
    pub const ALL: [Func; 6] = [Func::Sin, Func::Cos, Func::Exp, Func::Log, Func::Sqrt, Func::Tanh];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Tanh => "tanh",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.name() == s)
    }

    /// `None` outside the domain.
    pub fn apply(self, x: f64) -> Option<f64> {
        match self {
            Func::Sin => Some(libm::sin(x)),
            Func::Cos => Some(libm::cos(x)),
            Func::Exp => Some(libm::exp(x)),
            Func::Log => (x > 0.0).then(|| libm::log(x)),
            Func::Sqrt => (x >= 0.0).then(|| libm::sqrt(x)),
            Func::Tanh => Some(libm::tanh(x)),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(Var),
    Neg(Box<Expr>),
    Func(Func, Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    /// Non-negative integer power.
    Pow(Box<Expr>, u32),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExprError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown variable `{name}` at byte {offset}")]
    UnknownVariable { name: String, offset: usize },
    #[error("variable `{name}` at byte {offset} exceeds dimension n = {n}")]
    Dimension { name: String, offset: usize, n: usize },
    #[error("dimension n = {0} is not supported (need n >= 2)")]
    UnsupportedDimension(usize),
    #[error("variable `{0}` is not defined at this point")]
    Unbound(Var),
    #[error("{kind} in `{subexpr}`")]
    Domain { kind: DomainKind, subexpr: String },
    #[error("jet point has {0}")]
    BadPoint(&'static str),
}

impl ExprError {
    /// Byte offset into the source text for parse errors.
    pub fn offset(&self) -> Option<usize> {
        match self {
            ExprError::Syntax { offset, .. }
            | ExprError::UnknownVariable { offset, .. }
            | ExprError::Dimension { offset, .. } => Some(*offset),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainKind {
    LogNonPositive,
    SqrtNegative,
    DivisionByZero,
}

impl fmt::Display for DomainKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DomainKind::LogNonPositive => "log of a non-positive value",
            DomainKind::SqrtNegative => "sqrt of a negative value",
            DomainKind::DivisionByZero => "division by zero",
        })
    }
}

fn domain(kind: DomainKind, e: &Expr) -> ExprError {
    ExprError::Domain {
        kind,
        subexpr: e.to_string(),
    }
}

fn folded(v: f64) -> Option<Expr> {
    v.is_finite().then_some(Expr::Const(v))
}

// Constructors that fold literal subtrees. Folding is skipped when it would
// produce a non-finite constant.
impl Expr {
    pub fn var(v: Var) -> Self {
        Expr::Var(v)
    }

    pub fn constant(c: f64) -> Self {
        Expr::Const(c)
    }

    pub fn neg(a: Expr) -> Self {
        match a {
            Expr::Const(c) => Expr::Const(-c),
            a => Expr::Neg(Box::new(a)),
        }
    }

    pub fn func(f: Func, a: Expr) -> Self {
        if let Expr::Const(c) = a {
            if let Some(e) = f.apply(c).and_then(folded) {
                return e;
            }
        }
        Expr::Func(f, Box::new(a))
    }

    pub fn add(a: Expr, b: Expr) -> Self {
        match (&a, &b) {
            (Expr::Const(x), Expr::Const(y)) => folded(x + y),
            _ => None,
        }
        .unwrap_or_else(|| Expr::Add(Box::new(a), Box::new(b)))
    }

    pub fn sub(a: Expr, b: Expr) -> Self {
        match (&a, &b) {
            (Expr::Const(x), Expr::Const(y)) => folded(x - y),
            _ => None,
        }
        .unwrap_or_else(|| Expr::Sub(Box::new(a), Box::new(b)))
    }

    pub fn mul(a: Expr, b: Expr) -> Self {
        match (&a, &b) {
            (Expr::Const(x), Expr::Const(y)) => folded(x * y),
            _ => None,
        }
        .unwrap_or_else(|| Expr::Mul(Box::new(a), Box::new(b)))
    }

    pub fn div(a: Expr, b: Expr) -> Self {
        match (&a, &b) {
            (Expr::Const(x), Expr::Const(y)) if *y != 0.0 => folded(x / y),
            _ => None,
        }
        .unwrap_or_else(|| Expr::Div(Box::new(a), Box::new(b)))
    }

    pub fn pow(a: Expr, k: u32) -> Self {
        match a {
            Expr::Const(c) => folded(libm::pow(c, k as f64)).unwrap_or(Expr::Pow(Box::new(a), k)),
            a => Expr::Pow(Box::new(a), k),
        }
    }
}

// Pruning constructors used by differentiation.
fn d_add(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Const(z), _) if *z == 0.0 => b,
        (_, Expr::Const(z)) if *z == 0.0 => a,
        _ => Expr::add(a, b),
    }
}

fn d_sub(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (_, Expr::Const(z)) if *z == 0.0 => a,
        (Expr::Const(z), _) if *z == 0.0 => Expr::neg(b),
        _ => Expr::sub(a, b),
    }
}

fn d_mul(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Const(z), _) | (_, Expr::Const(z)) if *z == 0.0 => Expr::Const(0.0),
        (Expr::Const(o), _) if *o == 1.0 => b,
        (_, Expr::Const(o)) if *o == 1.0 => a,
        _ => Expr::mul(a, b),
    }
}

fn d_pow(a: Expr, k: u32) -> Expr {
    match k {
        0 => Expr::Const(1.0),
        1 => a,
        k => Expr::pow(a, k),
    }
}

impl Expr {
    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Const(c) if *c == 0.0)
    }

    /// Evaluates in double precision. Domain violations (log of a
    /// non-positive value, sqrt of a negative value, division by zero) are
    /// reported together with the offending subexpression.
    pub fn evaluate(&self, pt: &JetPoint) -> Result<f64, ExprError> {
        Ok(match self {
            Expr::Const(c) => *c,
            Expr::Var(v) => pt.get(*v).ok_or(ExprError::Unbound(*v))?,
            Expr::Neg(a) => -a.evaluate(pt)?,
            Expr::Func(f, a) => {
                let x = a.evaluate(pt)?;
                match f.apply(x) {
                    Some(y) => y,
                    None if *f == Func::Log => return Err(domain(DomainKind::LogNonPositive, self)),
                    None => return Err(domain(DomainKind::SqrtNegative, self)),
                }
            }
            Expr::Add(a, b) => a.evaluate(pt)? + b.evaluate(pt)?,
            Expr::Sub(a, b) => a.evaluate(pt)? - b.evaluate(pt)?,
            Expr::Mul(a, b) => a.evaluate(pt)? * b.evaluate(pt)?,
            Expr::Div(a, b) => {
                let num = a.evaluate(pt)?;
                let den = b.evaluate(pt)?;
                if den == 0.0 {
                    return Err(domain(DomainKind::DivisionByZero, self));
                }
                num / den
            }
            Expr::Pow(a, k) => powi(a.evaluate(pt)?, *k),
        })
    }

    /// Exact partial derivative with respect to `var`.
    pub fn differentiate(&self, var: Var) -> Expr {
        match self {
            Expr::Const(_) => Expr::Const(0.0),
            Expr::Var(v) => Expr::Const(if *v == var { 1.0 } else { 0.0 }),
            Expr::Neg(a) => {
                let da = a.differentiate(var);
                if da.is_zero() {
                    da
                } else {
                    Expr::neg(da)
                }
            }
            Expr::Add(a, b) => d_add(a.differentiate(var), b.differentiate(var)),
            Expr::Sub(a, b) => d_sub(a.differentiate(var), b.differentiate(var)),
            Expr::Mul(a, b) => d_add(
                d_mul(a.differentiate(var), (**b).clone()),
                d_mul((**a).clone(), b.differentiate(var)),
            ),
            Expr::Div(a, b) => {
                let da = a.differentiate(var);
                let db = b.differentiate(var);
                if db.is_zero() {
                    if da.is_zero() {
                        return da;
                    }
                    return Expr::div(da, (**b).clone());
                }
                let num = d_sub(d_mul(da, (**b).clone()), d_mul((**a).clone(), db));
                Expr::div(num, Expr::pow((**b).clone(), 2))
            }
            Expr::Pow(a, k) => {
                let da = a.differentiate(var);
                if *k == 0 || da.is_zero() {
                    return Expr::Const(0.0);
                }
                d_mul(
                    d_mul(Expr::Const(*k as f64), d_pow((**a).clone(), k - 1)),
                    da,
                )
            }
            Expr::Func(f, a) => {
                let da = a.differentiate(var);
                if da.is_zero() {
                    return da;
                }
                let a = (**a).clone();
                let outer = match f {
                    Func::Sin => Expr::func(Func::Cos, a),
                    Func::Cos => Expr::neg(Expr::func(Func::Sin, a)),
                    Func::Exp => Expr::func(Func::Exp, a),
                    Func::Log => return Expr::div(da, a),
                    Func::Sqrt => {
                        return Expr::div(da, Expr::mul(Expr::Const(2.0), Expr::func(Func::Sqrt, a)))
                    }
                    Func::Tanh => Expr::sub(
                        Expr::Const(1.0),
                        Expr::pow(Expr::func(Func::Tanh, a), 2),
                    ),
                };
                d_mul(outer, da)
            }
        }
    }

    /// Rebuilds the tree with every variable passed through `f`.
    pub fn map_vars(&self, f: &impl Fn(Var) -> Var) -> Expr {
        let bx = |e: &Expr| Box::new(e.map_vars(f));
        match self {
            Expr::Const(c) => Expr::Const(*c),
            Expr::Var(v) => Expr::Var(f(*v)),
            Expr::Neg(a) => Expr::Neg(bx(a)),
            Expr::Func(g, a) => Expr::Func(*g, bx(a)),
            Expr::Add(a, b) => Expr::Add(bx(a), bx(b)),
            Expr::Sub(a, b) => Expr::Sub(bx(a), bx(b)),
            Expr::Mul(a, b) => Expr::Mul(bx(a), bx(b)),
            Expr::Div(a, b) => Expr::Div(bx(a), bx(b)),
            Expr::Pow(a, k) => Expr::Pow(bx(a), *k),
        }
    }

    /// Calls `f` on every variable occurrence.
    pub fn visit_vars(&self, f: &mut impl FnMut(Var)) {
        match self {
            Expr::Const(_) => {}
            Expr::Var(v) => f(*v),
            Expr::Neg(a) | Expr::Func(_, a) | Expr::Pow(a, _) => a.visit_vars(f),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.visit_vars(f);
                b.visit_vars(f);
            }
        }
    }

    pub fn depends_on(&self, var: Var) -> bool {
        let mut hit = false;
        self.visit_vars(&mut |v| hit |= v == var);
        hit
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Var(_) => 1,
            Expr::Neg(a) | Expr::Func(_, a) | Expr::Pow(a, _) => 1 + a.size(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                1 + a.size() + b.size()
            }
        }
    }
}

pub(crate) fn powi(x: f64, k: u32) -> f64 {
    let mut acc = 1.0;
    for _ in 0..k {
        acc *= x;
    }
    acc
}

// Binding strength used by the printer: sums < products < powers < atoms.
fn level(e: &Expr) -> u8 {
    match e {
        Expr::Add(..) | Expr::Sub(..) => 1,
        Expr::Mul(..) | Expr::Div(..) => 2,
        Expr::Pow(..) => 3,
        Expr::Const(c) if c.is_sign_negative() => 3,
        Expr::Neg(..) => 3,
        Expr::Const(_) | Expr::Var(_) | Expr::Func(..) => 4,
    }
}

struct Wrapped<'a>(&'a Expr, bool);

impl fmt::Display for Wrapped<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.1 {
            write!(f, "({})", self.0)
        } else {
            write!(f, "{}", self.0)
        }
    }
}

/// Prints in the input grammar. Parentheses are added only where the
/// grammar needs them, so re-parsing yields the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Neg(a) => write!(f, "-{}", Wrapped(a, level(a) < 4)),
            Expr::Func(g, a) => write!(f, "{}({})", g.name(), a),
            Expr::Add(a, b) => write!(f, "{} + {}", Wrapped(a, level(a) < 1), Wrapped(b, level(b) <= 1)),
            Expr::Sub(a, b) => write!(f, "{} - {}", Wrapped(a, level(a) < 1), Wrapped(b, level(b) <= 1)),
            Expr::Mul(a, b) => write!(f, "{}*{}", Wrapped(a, level(a) < 2), Wrapped(b, level(b) <= 2)),
            Expr::Div(a, b) => write!(f, "{}/{}", Wrapped(a, level(a) < 2), Wrapped(b, level(b) <= 2)),
            Expr::Pow(a, k) => write!(f, "{}^{}", Wrapped(a, level(a) < 4), k),
        }
    }
}
