use alloc::vec::Vec;

use super::{ExprError, Var};
use crate::tensor::SymMatrix;

/// A point of the second jet space in Darboux coordinates: independent
/// variables `x`, the value `u`, first derivatives `p` and the symmetric
/// Hessian.
#[derive(Clone, Debug, PartialEq)]
pub struct JetPoint {
    x: Vec<f64>,
    u: f64,
    p: Vec<f64>,
    hessian: SymMatrix,
}

impl JetPoint {
    pub fn new(x: Vec<f64>, u: f64, p: Vec<f64>, hessian: SymMatrix) -> Result<Self, ExprError> {
        let n = x.len();
        if p.len() != n || hessian.dim() != n {
            return Err(ExprError::BadPoint("inconsistent dimensions"));
        }
        let pt = Self { x, u, p, hessian };
        if !pt.is_finite() {
            return Err(ExprError::BadPoint("non-finite entries"));
        }
        Ok(pt)
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            x: alloc::vec![0.0; n],
            u: 0.0,
            p: alloc::vec![0.0; n],
            hessian: SymMatrix::zeros(n),
        }
    }

    /// A point with only the Hessian set.
    pub fn from_hessian(hessian: SymMatrix) -> Self {
        let mut pt = Self::zeros(hessian.dim());
        pt.hessian = hessian;
        pt
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn u(&self) -> f64 {
        self.u
    }

    pub fn p(&self) -> &[f64] {
        &self.p
    }

    pub fn hessian(&self) -> &SymMatrix {
        &self.hessian
    }

    pub fn with_hessian(&self, hessian: SymMatrix) -> Self {
        debug_assert_eq!(hessian.dim(), self.dim());
        Self {
            hessian,
            ..self.clone()
        }
    }

    pub fn get(&self, v: Var) -> Option<f64> {
        match v {
            Var::X(i) => self.x.get(i).copied(),
            Var::U => Some(self.u),
            Var::P(i) => self.p.get(i).copied(),
            Var::H(i, j) => (j < self.dim() && i <= j).then(|| self.hessian.get(i, j)),
        }
    }

    /// Sets one coordinate.
    ///
    /// # Panics
    /// If `v` does not fit the dimension of the point.
    pub fn set(&mut self, v: Var, value: f64) {
        match v {
            Var::X(i) => self.x[i] = value,
            Var::U => self.u = value,
            Var::P(i) => self.p[i] = value,
            Var::H(i, j) => self.hessian.set(i, j, value),
        }
    }

    /// All coordinates in the order `x, u, p, H` (Hessian upper triangle).
    pub fn vars(&self) -> impl Iterator<Item = Var> {
        let n = self.dim();
        (0..n)
            .map(Var::X)
            .chain(core::iter::once(Var::U))
            .chain((0..n).map(Var::P))
            .chain(crate::tensor::upper_pairs(n).map(|(i, j)| Var::H(i, j)))
    }

    pub fn is_finite(&self) -> bool {
        self.u.is_finite()
            && self.x.iter().chain(&self.p).all(|v| v.is_finite())
            && self.hessian.is_finite()
    }

    /// Exchanges the two independent variables (`n = 2` only).
    pub fn swap_planar(&self) -> Self {
        debug_assert_eq!(self.dim(), 2);
        let mut out = self.clone();
        for v in self.vars() {
            out.set(v.swap_planar(), self.get(v).unwrap_or(0.0));
        }
        out
    }
}
