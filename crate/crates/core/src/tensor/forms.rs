use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use nalgebra::{DMatrix, DVector};

use super::TensorError;

/// Exponent vectors `α` with `|α| = degree` in `n` variables, in lexicographic
/// descending order: for `n = 2, degree = 4` this is
/// `(4,0), (3,1), (2,2), (1,3), (0,4)`.
pub fn monomials(n: usize, degree: usize) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    let mut cur = vec![0u8; n];
    fill(&mut cur, 0, degree, &mut out);
    out
}

fn fill(cur: &mut [u8], pos: usize, left: usize, out: &mut Vec<Vec<u8>>) {
    if pos + 1 == cur.len() {
        cur[pos] = left as u8;
        out.push(cur.to_vec());
        return;
    }
    for e in (0..=left).rev() {
        cur[pos] = e as u8;
        fill(cur, pos + 1, left - e, out);
    }
    cur[pos] = 0;
}

/// Homogeneous polynomial of degree `D` in `n` covector variables
/// `ξ_1 … ξ_n`, stored densely by monomial in [`monomials`] order.
#[derive(Clone, PartialEq)]
pub struct Form<const D: usize> {
    n: usize,
    exps: Vec<Vec<u8>>,
    coeffs: Vec<f64>,
}

/// `q(ξ) = Σ_{i≤j} c_ij ξ_i ξ_j`.
pub type QuadraticForm = Form<2>;
pub type QuarticForm = Form<4>;

impl<const D: usize> Form<D> {
    pub fn zero(n: usize) -> Self {
        let exps = monomials(n, D);
        let coeffs = vec![0.0; exps.len()];
        Self { n, exps, coeffs }
    }

    pub fn from_coeffs(n: usize, coeffs: Vec<f64>) -> Result<Self, TensorError> {
        let mut f = Self::zero(n);
        if coeffs.len() != f.coeffs.len() {
            return Err(TensorError::Length {
                expected: f.coeffs.len(),
                found: coeffs.len(),
            });
        }
        f.coeffs = coeffs;
        Ok(f)
    }

    /// Builds a form from `(exponents, coefficient)` terms; repeated
    /// exponents accumulate.
    pub fn from_terms(n: usize, terms: &[(&[u8], f64)]) -> Result<Self, TensorError> {
        let mut f = Self::zero(n);
        for (e, c) in terms {
            let k = f.index_of(e).ok_or(TensorError::BadExponent)?;
            f.coeffs[k] += c;
        }
        Ok(f)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        D
    }

    pub fn exponents(&self) -> &[Vec<u8>] {
        &self.exps
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn index_of(&self, exps: &[u8]) -> Option<usize> {
        if exps.len() != self.n {
            return None;
        }
        self.exps.iter().position(|e| e.as_slice() == exps)
    }

    pub fn coeff(&self, exps: &[u8]) -> f64 {
        self.index_of(exps).map_or(0.0, |k| self.coeffs[k])
    }

    /// `(exponents, coefficient)` pairs in storage order.
    pub fn terms(&self) -> impl Iterator<Item = (&[u8], f64)> {
        self.exps.iter().map(|e| e.as_slice()).zip(self.coeffs.iter().copied())
    }

    pub fn eval(&self, xi: &[f64]) -> f64 {
        self.terms()
            .map(|(e, c)| {
                e.iter()
                    .zip(xi)
                    .fold(c, |acc, (&k, &x)| acc * libm::pow(x, k as f64))
            })
            .sum()
    }

    /// Euclidean norm of the coefficient vector.
    pub fn norm(&self) -> f64 {
        libm::sqrt(self.coeffs.iter().map(|c| c * c).sum())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|c| *c *= s);
        out
    }

    pub fn sub(&self, other: &Self) -> Result<Self, TensorError> {
        if self.n != other.n {
            return Err(TensorError::DimMismatch(self.n, other.n));
        }
        let mut out = self.clone();
        for (a, b) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *a -= b;
        }
        Ok(out)
    }
}

impl QuadraticForm {
    /// Coefficient of `ξ_i ξ_j` (0-based, either order).
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.coeff(&pair_exponent(self.n, i, j))
    }

    pub fn set_entry(&mut self, i: usize, j: usize, v: f64) {
        let k = self
            .index_of(&pair_exponent(self.n, i, j))
            .expect("index within dimension");
        self.coeffs[k] = v;
    }
}

pub(crate) fn pair_exponent(n: usize, i: usize, j: usize) -> Vec<u8> {
    let mut e = vec![0u8; n];
    e[i] += 1;
    e[j] += 1;
    e
}

impl<const D: usize> fmt::Debug for Form<D> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (e, c) in self.terms().filter(|(_, c)| *c != 0.0) {
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            write!(f, "{c}")?;
            for (i, &k) in e.iter().enumerate() {
                match k {
                    0 => {}
                    1 => write!(f, "·ξ{}", i + 1)?,
                    _ => write!(f, "·ξ{}^{}", i + 1, k)?,
                }
            }
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

/// Plain polynomial product of two quadratic forms.
pub fn multiply_quadratics(a: &QuadraticForm, b: &QuadraticForm) -> Result<QuarticForm, TensorError> {
    if a.n != b.n {
        return Err(TensorError::DimMismatch(a.n, b.n));
    }
    let mut out = QuarticForm::zero(a.n);
    let mut e = vec![0u8; a.n];
    for (ea, ca) in a.terms().filter(|(_, c)| *c != 0.0) {
        for (eb, cb) in b.terms().filter(|(_, c)| *c != 0.0) {
            for k in 0..a.n {
                e[k] = ea[k] + eb[k];
            }
            let idx = out.index_of(&e).expect("degree 4 exponent");
            out.coeffs[idx] += ca * cb;
        }
    }
    Ok(out)
}

/// Outcome of dividing a quartic by a quadratic.
#[derive(Clone, Debug)]
pub struct Factorization {
    /// Quotient `g` when the relative residual is within tolerance.
    pub factor: Option<QuadraticForm>,
    /// `‖q − g·s‖ / max(‖q‖, ε)` for the least-squares `g`.
    pub residual: f64,
}

/// Least-squares solve of `q = g · s` for a quadratic `g`.
///
/// Accepts `g` when `‖q − g·s‖ / max(‖q‖, ε) ≤ tol`, with `ε` the machine
/// epsilon and `‖·‖` the Euclidean norm of the dense quartic coefficients.
/// A zero `s` divides only a zero `q`.
pub fn factor_quartic(q: &QuarticForm, s: &QuadraticForm, tol: f64) -> Result<Factorization, TensorError> {
    if q.n != s.n {
        return Err(TensorError::DimMismatch(q.n, s.n));
    }
    let n = q.n;
    let q_norm = q.norm();
    let denom = q_norm.max(f64::EPSILON);
    if s.is_zero() {
        let residual = q_norm / denom;
        let factor = (residual <= tol).then(|| QuadraticForm::zero(n));
        return Ok(Factorization { factor, residual });
    }

    // column k holds the coefficients of (k-th quadratic monomial) · s
    let basis = QuadraticForm::zero(n);
    let rows = q.coeffs.len();
    let cols = basis.coeffs.len();
    let mut design = DMatrix::zeros(rows, cols);
    for (k, ek) in basis.exps.iter().enumerate() {
        let mut unit = QuadraticForm::zero(n);
        unit.coeffs[k] = 1.0;
        debug_assert_eq!(&unit.exps[k], ek);
        let col = multiply_quadratics(&unit, s)?;
        for r in 0..rows {
            design[(r, k)] = col.coeffs[r];
        }
    }
    let rhs = DVector::from_column_slice(&q.coeffs);
    let svd = design.clone().svd(true, true);
    let cutoff = svd.singular_values.max() * f64::EPSILON * rows.max(cols) as f64;
    let g = svd.solve(&rhs, cutoff).map_err(|_| TensorError::Solve)?;
    let residual = (&rhs - &design * &g).norm() / denom;
    let factor = (residual <= tol).then(|| QuadraticForm {
        n,
        exps: basis.exps.clone(),
        coeffs: g.iter().copied().collect(),
    });
    Ok(Factorization { factor, residual })
}
