//! Principal and second symbols, zero-locus sampling and the
//! complete-exceptionality test `S²(F) = g · S(F)`.

mod sampling;

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::expr::{self, line_derivatives, Expr, ExprError, JetPoint, Var};
use crate::tensor::{
    factor_quartic, monomials, pair_exponent, rank_one_deform, upper_index, upper_len, upper_pairs,
    Form, QuadraticForm, QuarticForm, SymMatrix, TensorError,
};

pub use sampling::{draw_hessian, sample_zero_locus, SampleBox, ON_LOCUS_TOL};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SymbolError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error("variable `{0}` does not exist in dimension {1}")]
    VariableOutOfRange(Var, usize),
    #[error("no accessible zero locus: found {found} of {requested} samples")]
    SamplingFailure { found: usize, requested: usize },
    #[error("sample count must be positive")]
    EmptyRequest,
    #[error("invalid box [{lo}, {hi}]")]
    BadBox { lo: f64, hi: f64 },
    #[error("tolerance must be positive")]
    BadTolerance,
}

pub const DEFAULT_TOL: f64 = 1e-7;
pub const DEFAULT_SAMPLES: usize = 64;

/// Coefficients smaller than this many ulps of the summed magnitudes that
/// produced them are treated as rounding noise.
const NOISE_ULPS: f64 = 256.0;

/// A second-order equation `F = 0` together with the Hessian partials of
/// `F` that the symbol calculus needs.
#[derive(Clone, Debug)]
pub struct Pde {
    n: usize,
    expr: Expr,
    first: Vec<Expr>,
    /// Upper triangle over Hessian variables in [`upper_pairs`] order.
    second: Vec<Expr>,
}

impl Pde {
    pub fn new(expr: Expr, n: usize) -> Result<Self, SymbolError> {
        if n < 2 {
            return Err(ExprError::UnsupportedDimension(n).into());
        }
        let mut bad = None;
        expr.visit_vars(&mut |v| {
            if !v.fits(n) {
                bad.get_or_insert(v);
            }
        });
        if let Some(v) = bad {
            return Err(SymbolError::VariableOutOfRange(v, n));
        }
        let vars: Vec<Var> = upper_pairs(n).map(|(i, j)| Var::H(i, j)).collect();
        let first: Vec<Expr> = vars.iter().map(|&v| expr.differentiate(v)).collect();
        let m = vars.len();
        let mut second = Vec::with_capacity(upper_len(m));
        for a in 0..m {
            for b in a..m {
                second.push(first[a].differentiate(vars[b]));
            }
        }
        Ok(Self { n, expr, first, second })
    }

    pub fn parse(text: &str, n: usize) -> Result<Self, SymbolError> {
        Self::new(expr::parse(text, n)?, n)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn evaluate(&self, pt: &JetPoint) -> Result<f64, ExprError> {
        self.expr.evaluate(pt)
    }

    /// `∂F/∂u_ij`.
    pub fn first_partial(&self, i: usize, j: usize) -> &Expr {
        &self.first[upper_index(self.n, i, j)]
    }

    /// `∂²F/∂u_ij ∂u_kl`.
    pub fn second_partial(&self, ij: (usize, usize), kl: (usize, usize)) -> &Expr {
        let a = upper_index(self.n, ij.0, ij.1);
        let b = upper_index(self.n, kl.0, kl.1);
        &self.second[upper_index(upper_len(self.n), a, b)]
    }

    /// The equation `g · F = 0`.
    pub fn with_multiplier(&self, g: Expr) -> Result<Self, SymbolError> {
        Self::new(Expr::mul(g, self.expr.clone()), self.n)
    }

    /// Same equation with the two independent variables exchanged (`n = 2`).
    pub fn swap_planar(&self) -> Result<Self, SymbolError> {
        debug_assert_eq!(self.n, 2);
        Self::new(self.expr.map_vars(&Var::swap_planar), self.n)
    }

    /// Whether `F` does not involve any Hessian variable at second order.
    pub fn is_affine_in_hessian(&self) -> bool {
        self.second.iter().all(Expr::is_zero)
    }

    /// `S(F)(ξ) = Σ_{i≤j} ∂F/∂u_ij · ξ_i ξ_j`, which equals
    /// `d/dt F(H + t ξξᵀ)` at `t = 0`.
    pub fn principal_symbol(&self, pt: &JetPoint) -> Result<QuadraticForm, ExprError> {
        Ok(self.symbol_parts(pt)?.0)
    }

    /// `S²(F)(ξ) = d²/dt² F(H + t ξξᵀ)` at `t = 0`, assembled as
    /// `Σ_{ij} S(∂F/∂u_ij)(ξ) · ξ_i ξ_j`.
    pub fn second_symbol(&self, pt: &JetPoint) -> Result<QuarticForm, ExprError> {
        Ok(self.second_symbol_parts(pt)?.0)
    }

    fn symbol_parts(&self, pt: &JetPoint) -> Result<(QuadraticForm, QuadraticForm), ExprError> {
        let mut s = QuadraticForm::zero(self.n);
        let mut mag = QuadraticForm::zero(self.n);
        for ((i, j), d) in upper_pairs(self.n).zip(&self.first) {
            let v = d.evaluate(pt)?;
            s.set_entry(i, j, v);
            mag.set_entry(i, j, v.abs());
        }
        Ok((s, mag))
    }

    fn second_symbol_parts(&self, pt: &JetPoint) -> Result<(QuarticForm, QuarticForm), ExprError> {
        let n = self.n;
        let pairs: Vec<(usize, usize)> = upper_pairs(n).collect();
        let mut q = QuarticForm::zero(n);
        let mut mag = QuarticForm::zero(n);
        let mut e = alloc::vec![0u8; n];
        for (a, &(i, j)) in pairs.iter().enumerate() {
            // S(∂F/∂u_ij) contracted with ξ_i ξ_j
            let inner = pair_exponent(n, i, j);
            for (b, &(k, l)) in pairs.iter().enumerate() {
                let d = &self.second[upper_index(pairs.len(), a, b)];
                if d.is_zero() {
                    continue;
                }
                let v = d.evaluate(pt)?;
                for (slot, (&x, &y)) in e.iter_mut().zip(inner.iter().zip(&pair_exponent(n, k, l))) {
                    *slot = x + y;
                }
                let idx = q.index_of(&e).expect("degree 4 exponent");
                q.coeffs_mut()[idx] += v;
                mag.coeffs_mut()[idx] += v.abs();
            }
        }
        Ok((q, mag))
    }

    /// `S(F)` from directional derivatives along rank-one lines,
    /// interpolated at the exponent lattice `{α : |α| = 2}`.
    pub fn principal_symbol_rank_one(&self, pt: &JetPoint) -> Result<QuadraticForm, SymbolError> {
        self.rank_one_interpolate::<2>(pt, 1)
    }

    /// `S²(F)` from second directional derivatives along rank-one lines,
    /// interpolated at the exponent lattice `{α : |α| = 4}`.
    pub fn second_symbol_rank_one(&self, pt: &JetPoint) -> Result<QuarticForm, SymbolError> {
        self.rank_one_interpolate::<4>(pt, 2)
    }

    fn rank_one_interpolate<const D: usize>(&self, pt: &JetPoint, order: usize) -> Result<Form<D>, SymbolError> {
        let exps = monomials(self.n, D);
        let m = exps.len();
        let nodes: Vec<Vec<f64>> = exps
            .iter()
            .map(|a| a.iter().map(|&k| k as f64).collect())
            .collect();
        let vander = DMatrix::from_fn(m, m, |r, c| {
            nodes[r]
                .iter()
                .zip(&exps[c])
                .map(|(&x, &k)| expr::powi(x, k as u32))
                .product::<f64>()
        });
        let mut rhs = DVector::zeros(m);
        for (r, xi) in nodes.iter().enumerate() {
            let dir = rank_one_deform(&SymMatrix::zeros(self.n), xi, 1.0)?;
            rhs[r] = line_derivatives(&self.expr, pt, &dir)?[order];
        }
        let coeffs = vander.lu().solve(&rhs).ok_or(TensorError::Solve)?;
        Ok(Form::from_coeffs(self.n, coeffs.iter().copied().collect())?)
    }

    /// Divisibility check `S²(F) = g · S(F)` at one point.
    ///
    /// Coefficients that are pure rounding noise are zeroed first. When the
    /// symbol vanishes the point passes only if the second symbol vanishes
    /// too, and is flagged as degenerate.
    pub fn exceptionality_at_point(&self, pt: &JetPoint, tol: f64) -> Result<PointCheck, SymbolError> {
        if !(tol > 0.0) {
            return Err(SymbolError::BadTolerance);
        }
        let (mut s, s_mag) = self.symbol_parts(pt)?;
        let (mut q, q_mag) = self.second_symbol_parts(pt)?;
        flush_noise(&mut s, &s_mag);
        flush_noise(&mut q, &q_mag);
        let (residual, factor, degenerate) = if s.is_zero() {
            let residual = q.norm() / q_mag.norm().max(f64::EPSILON);
            let factor = (residual <= tol).then(|| QuadraticForm::zero(self.n));
            (residual, factor, true)
        } else {
            let f = factor_quartic(&q, &s, tol)?;
            (f.residual, f.factor, false)
        };
        Ok(PointCheck {
            point: pt.clone(),
            pass: factor.is_some(),
            residual,
            factor,
            degenerate,
            symbol: s,
            second_symbol: q,
        })
    }
}

fn flush_noise<const D: usize>(f: &mut Form<D>, mag: &Form<D>) {
    for (c, m) in f.coeffs_mut().iter_mut().zip(mag.coeffs()) {
        if c.abs() <= NOISE_ULPS * f64::EPSILON * m {
            *c = 0.0;
        }
    }
}

/// Result of the divisibility check at one point.
#[derive(Clone, Debug)]
pub struct PointCheck {
    pub point: JetPoint,
    pub pass: bool,
    pub residual: f64,
    pub factor: Option<QuadraticForm>,
    /// The symbol vanished at this point.
    pub degenerate: bool,
    pub symbol: QuadraticForm,
    pub second_symbol: QuarticForm,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Exceptional,
    NotExceptional,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Exceptional => "exceptional",
            Verdict::NotExceptional => "not-exceptional",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExceptionalityVerdict {
    pub samples: Vec<PointCheck>,
    pub verdict: Verdict,
    pub requested: usize,
    pub tol: f64,
}

impl ExceptionalityVerdict {
    /// Exceptional iff every sample passes; not exceptional iff some sample
    /// fails by more than `10·tol`; inconclusive otherwise.
    pub fn aggregate(samples: Vec<PointCheck>, requested: usize, tol: f64) -> Self {
        let verdict = if samples.iter().all(|s| s.pass) {
            Verdict::Exceptional
        } else if samples.iter().any(|s| !s.pass && s.residual > 10.0 * tol) {
            Verdict::NotExceptional
        } else {
            Verdict::Inconclusive
        };
        Self {
            samples,
            verdict,
            requested,
            tol,
        }
    }

    pub fn max_residual(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, s| m.max(s.residual))
    }

    pub fn passed(&self) -> usize {
        self.samples.iter().filter(|s| s.pass).count()
    }

    pub fn degenerate(&self) -> usize {
        self.samples.iter().filter(|s| s.degenerate).count()
    }
}

/// Runs the divisibility check over sampled points of `{F = 0}`.
pub fn is_completely_exceptional(
    pde: &Pde,
    bx: SampleBox,
    count: usize,
    seed: u64,
    tol: f64,
) -> Result<ExceptionalityVerdict, SymbolError> {
    let points = sample_zero_locus(pde, bx, count, seed)?;
    let checks = points
        .iter()
        .map(|pt| pde.exceptionality_at_point(pt, tol))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ExceptionalityVerdict::aggregate(checks, count, tol))
}
