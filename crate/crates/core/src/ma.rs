//! Monge-Ampère detection: at fixed `(x, u, p)`, is `F` an affine
//! combination of the minors of the Hessian?
//!
//! The fit is done by sampled interpolation: least squares on random
//! Hessians, judged on a held-out set, since a least-squares fit alone
//! always "succeeds".

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::expr::{ExprError, JetPoint, Var};
use crate::symbol::{draw_hessian, Pde, SampleBox, SymbolError};
use crate::tensor::{upper_pairs, MinorBasis, SymMatrix, TensorError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MaError {
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    Symbol(#[from] SymbolError),
    #[error("evaluation failed after {attempts} redraws: {source}")]
    Evaluation { attempts: usize, source: ExprError },
    #[error("base-point count must be positive")]
    EmptyRequest,
}

const MAX_REDRAWS: usize = 50;
const OVERSAMPLING: usize = 4;
/// Hessian entries of the training and validation sets are uniform here.
const HESSIAN_RANGE: SampleBox = SampleBox { lo: -2.0, hi: 2.0 };
/// Number of `x` draws and `(u, p)` quadruples in the linearity probe.
const LINEAR_PROBES: usize = 8;

/// Minor-basis coefficients `B_0, B_1^{ij}, …, B_n` of `F` at one base point,
/// aligned with [`MinorBasis`] order.
#[derive(Clone, Debug)]
pub struct MinorExpansion {
    /// Base point; its Hessian is zero.
    pub base: JetPoint,
    pub coefficients: Vec<f64>,
    /// Largest absolute residual on the training Hessians.
    pub fit_residual: f64,
    /// Largest absolute residual on the held-out Hessians.
    pub validation_residual: f64,
    /// `tol · (1 + max |F|)` over the held-out Hessians.
    pub threshold: f64,
}

impl MinorExpansion {
    pub fn accepted(&self) -> bool {
        self.validation_residual <= self.threshold
    }

    /// The coefficients, if `F` lies in the span of the minors here.
    pub fn coefficients(&self) -> Option<&[f64]> {
        self.accepted().then_some(self.coefficients.as_slice())
    }
}

fn eval_with_redraws(
    pde: &Pde,
    base: &JetPoint,
    rng: &mut impl Rng,
) -> Result<(SymMatrix, f64), MaError> {
    let mut last = None;
    for _ in 0..MAX_REDRAWS {
        let h = draw_hessian(pde.dim(), HESSIAN_RANGE, rng);
        match pde.evaluate(&base.with_hessian(h.clone())) {
            Ok(v) if v.is_finite() => return Ok((h, v)),
            Ok(_) => {}
            Err(e) => last = Some(e),
        }
    }
    Err(MaError::Evaluation {
        attempts: MAX_REDRAWS,
        source: last.unwrap_or(ExprError::BadPoint("non-finite value")),
    })
}

/// Fits `F(x, u, p, ·)` against the minor basis at a fixed base point.
pub fn minor_expansion(pde: &Pde, base: &JetPoint, tol: f64, seed: u64) -> Result<MinorExpansion, MaError> {
    let basis = MinorBasis::new(pde.dim())?;
    let base = base.with_hessian(SymMatrix::zeros(pde.dim()));
    let m = basis.len();
    let rows = OVERSAMPLING * m;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let draw_set = |rng: &mut ChaCha8Rng| -> Result<(DMatrix<f64>, DVector<f64>), MaError> {
        let mut design = DMatrix::zeros(rows, m);
        let mut values = DVector::zeros(rows);
        for r in 0..rows {
            let (h, v) = eval_with_redraws(pde, &base, rng)?;
            for (c, z) in basis.eval(&h).into_iter().enumerate() {
                design[(r, c)] = z;
            }
            values[r] = v;
        }
        Ok((design, values))
    };
    let (train, train_f) = draw_set(&mut rng)?;
    let (valid, valid_f) = draw_set(&mut rng)?;

    let svd = train.clone().svd(true, true);
    // the minors of a symmetric 4x4 matrix satisfy one linear relation, so
    // the design is rank deficient there; the cutoff picks the min-norm fit
    let cutoff = svd.singular_values.max() * 1e-10;
    let coeffs = svd.solve(&train_f, cutoff).map_err(|_| TensorError::Solve)?;

    let max_abs = |v: DVector<f64>| v.iter().fold(0.0, |m: f64, x| m.max(x.abs()));
    let fit_residual = max_abs(&train * &coeffs - &train_f);
    let validation_residual = max_abs(&valid * &coeffs - &valid_f);
    let threshold = tol * (1.0 + max_abs(valid_f.clone()));
    Ok(MinorExpansion {
        base,
        coefficients: coeffs.iter().copied().collect(),
        fit_residual,
        validation_residual,
        threshold,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MaKind {
    Linear,
    QuasiLinear,
    MongeAmpere,
    NonMongeAmpere,
}

impl MaKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MaKind::Linear => "linear",
            MaKind::QuasiLinear => "quasi-linear",
            MaKind::MongeAmpere => "monge-ampere",
            MaKind::NonMongeAmpere => "non-monge-ampere",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        [Self::Linear, Self::QuasiLinear, Self::MongeAmpere, Self::NonMongeAmpere]
            .into_iter()
            .find(|k| k.as_str() == s)
    }

    /// Linear and quasi-linear equations are Monge-Ampère equations too.
    pub fn is_monge_ampere(self) -> bool {
        self != MaKind::NonMongeAmpere
    }
}

#[derive(Clone, Debug)]
pub struct MaClassification {
    pub kind: MaKind,
    pub fits: Vec<MinorExpansion>,
    /// Largest `|B|` over minors of order `>= 2`, relative to `1 + max |B|`.
    pub max_higher_order: f64,
    pub tol: f64,
}

/// Classifies `F` as linear, quasi-linear, Monge-Ampère or none of these
/// from minor expansions at `count` random base points.
///
/// Linearity (affine in `(u, p)` with coefficients depending on `x` only) is
/// probed by random second differences and is best-effort: an adversarial
/// linear `F` may be reported as quasi-linear.
pub fn classify(pde: &Pde, bx: SampleBox, count: usize, seed: u64, tol: f64) -> Result<MaClassification, MaError> {
    if count == 0 {
        return Err(MaError::EmptyRequest);
    }
    let basis = MinorBasis::new(pde.dim())?;
    let first_higher = 1 + upper_pairs(pde.dim()).count();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fits = Vec::with_capacity(count);
    for _ in 0..count {
        let base = bx.draw_point(pde.dim(), &mut rng);
        fits.push(minor_expansion(pde, &base, tol, rng.next_u64())?);
    }
    debug_assert!(fits.iter().all(|f| f.coefficients.len() == basis.len()));

    let max_higher_order = fits
        .iter()
        .map(|f| {
            let scale = 1.0 + f.coefficients.iter().fold(0.0, |m: f64, c| m.max(c.abs()));
            f.coefficients[first_higher..]
                .iter()
                .fold(0.0, |m: f64, c| m.max(c.abs()))
                / scale
        })
        .fold(0.0, f64::max);

    let kind = if !fits.iter().all(MinorExpansion::accepted) {
        MaKind::NonMongeAmpere
    } else if max_higher_order > tol {
        MaKind::MongeAmpere
    } else if is_linear(pde, bx, &mut rng, tol) {
        MaKind::Linear
    } else {
        MaKind::QuasiLinear
    };
    Ok(MaClassification {
        kind,
        fits,
        max_higher_order,
        tol,
    })
}

/// For quasi-linear `F`: checks that `F(x, u, p, 0)` is affine in `(u, p)`
/// and that the Hessian coefficients do not depend on `(u, p)`.
fn is_linear(pde: &Pde, bx: SampleBox, rng: &mut impl Rng, tol: f64) -> bool {
    let n = pde.dim();
    let lower: Vec<Var> = core::iter::once(Var::U).chain((0..n).map(Var::P)).collect();
    let units: Vec<SymMatrix> = upper_pairs(n)
        .map(|(i, j)| {
            let mut e = SymMatrix::zeros(n);
            e.set(i, j, 1.0);
            e
        })
        .collect();

    // [B_0, A_11, A_12, …] at one point
    let coefficients = |pt: &JetPoint| -> Option<Vec<f64>> {
        let b0 = pde.evaluate(&pt.with_hessian(SymMatrix::zeros(n))).ok()?;
        let mut out = alloc::vec![b0];
        for e in &units {
            out.push(pde.evaluate(&pt.with_hessian(e.clone())).ok()? - b0);
        }
        out.iter().all(|v| v.is_finite()).then_some(out)
    };

    for _ in 0..LINEAR_PROBES {
        let mut z: [JetPoint; 3] = core::array::from_fn(|_| bx.draw_point(n, rng));
        let x: Vec<f64> = z[0].x().to_vec();
        for p in z.iter_mut() {
            for (i, &xi) in x.iter().enumerate() {
                p.set(Var::X(i), xi);
            }
        }
        // z3 = z1 + z2 − z0 in the (u, p) coordinates
        let mut z3 = z[0].clone();
        for &v in &lower {
            let g = |p: &JetPoint| p.get(v).unwrap_or(0.0);
            z3.set(v, g(&z[1]) + g(&z[2]) - g(&z[0]));
        }
        let Some(c0) = coefficients(&z[0]) else { return false };
        let Some(c1) = coefficients(&z[1]) else { return false };
        let Some(c2) = coefficients(&z[2]) else { return false };
        let Some(c3) = coefficients(&z3) else { return false };
        let scale = [&c0, &c1, &c2, &c3]
            .iter()
            .flat_map(|c| c.iter())
            .fold(1.0, |m: f64, v| m.max(v.abs()));
        let bound = tol * scale;
        if (c3[0] - c1[0] - c2[0] + c0[0]).abs() > bound {
            return false;
        }
        for k in 1..c0.len() {
            if [&c1, &c2, &c3].iter().any(|c| (c[k] - c0[k]).abs() > bound) {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pde(s: &str) -> Pde {
        Pde::parse(s, 2).unwrap()
    }

    fn base(x: [f64; 2], u: f64, p: [f64; 2]) -> JetPoint {
        JetPoint::new(x.to_vec(), u, p.to_vec(), SymMatrix::zeros(2)).unwrap()
    }

    #[test]
    fn constructed_combination() {
        let f = pde("3 + 2*u11 - 5*(u11*u22-u12^2)");
        let fit = minor_expansion(&f, &base([0.1, 0.2], 0.3, [0.4, 0.5]), 1e-7, 1).unwrap();
        let b = fit.coefficients().expect("in span");
        let want = [3.0, 2.0, 0.0, 0.0, -5.0];
        for (got, want) in b.iter().zip(want) {
            assert!((got - want).abs() < 1e-10, "{b:?}");
        }
        assert!(fit.validation_residual < 1e-10);
        assert!(fit.fit_residual < 1e-10);
    }

    #[test]
    fn square_is_outside_the_span() {
        let fit = minor_expansion(&pde("u11^2-u22"), &base([0.0; 2], 0.0, [0.0; 2]), 1e-7, 1).unwrap();
        assert!(fit.coefficients().is_none());
        assert!(fit.validation_residual > 0.1, "{}", fit.validation_residual);
    }

    #[test]
    fn transcendental_coefficients_at_base() {
        let f = pde("sin(x1)*u11 + u*(u11*u22-u12^2)");
        let fit = minor_expansion(&f, &base([core::f64::consts::FRAC_PI_2, 0.0], 1.0, [0.0; 2]), 1e-7, 9).unwrap();
        let b = fit.coefficients().unwrap();
        assert!((b[1] - 1.0).abs() < 1e-10);
        assert!((b[4] - 1.0).abs() < 1e-10);
        assert!(b[0].abs() < 1e-10 && b[2].abs() < 1e-10 && b[3].abs() < 1e-10);
    }

    #[test]
    fn three_dimensional_determinant() {
        let f = Pde::parse("u11*u22*u33 + 2*u12*u23*u13 - u11*u23^2 - u22*u13^2 - u33*u12^2 - x1", 3).unwrap();
        let fit = minor_expansion(&f, &JetPoint::zeros(3), 1e-7, 4).unwrap();
        let b = fit.coefficients().unwrap();
        assert_eq!(b.len(), 14);
        assert!((b[13] - 1.0).abs() < 1e-9);
        assert!(b[..13].iter().all(|c| c.abs() < 1e-9), "{b:?}");
    }

    #[test]
    fn four_dimensional_trace_is_found_despite_rank_deficiency() {
        let f = Pde::parse("u11 + u22 + u33 + u44", 4).unwrap();
        let fit = minor_expansion(&f, &JetPoint::zeros(4), 1e-7, 2).unwrap();
        let b = fit.coefficients().expect("in span");
        assert_eq!(b.len(), 43);
        assert!(b[11..].iter().all(|c| c.abs() < 1e-9));
    }

    #[test]
    fn classification_examples() {
        let bx = SampleBox::default();
        let kind = |s: &str| classify(&pde(s), bx, 8, 3, 1e-7).unwrap().kind;
        assert_eq!(kind("u11+u22"), MaKind::Linear);
        assert_eq!(kind("u11 - x1^2*u22 + sin(x2)*u1 + 3*u"), MaKind::Linear);
        assert_eq!(kind("u12 + u1*u11"), MaKind::QuasiLinear);
        assert_eq!(kind("u11 + u^2"), MaKind::QuasiLinear);
        assert_eq!(kind("u11*u22-u12^2-1"), MaKind::MongeAmpere);
        assert_eq!(kind("u11^2-u22"), MaKind::NonMongeAmpere);
    }

    #[test]
    fn kind_names_roundtrip() {
        for k in [MaKind::Linear, MaKind::QuasiLinear, MaKind::MongeAmpere, MaKind::NonMongeAmpere] {
            assert_eq!(MaKind::from_name(k.as_str()), Some(k));
        }
    }
}
