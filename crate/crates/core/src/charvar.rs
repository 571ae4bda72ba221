//! Characteristics of equations in two independent variables.
//!
//! A covector `ξ dx + η dy` is characteristic when
//! `a ξ² + b ξη + c η² = 0` with `(a, b, c) = (F_u11, F_u12, F_u22)`; with
//! `λ = η/ξ` this is `a + bλ + cλ² = 0`. Roots are kept as projective pairs
//! so that the root at infinity (`c = 0`) needs no special casing until an
//! affine speed is required. Lax residuals are evaluated in the chart where
//! the speed has modulus at most one, switching to the `x ↔ y` swapped
//! equation otherwise.

use alloc::vec::Vec;

use crate::expr::{ExprError, JetPoint, Var};
use crate::symbol::{sample_zero_locus, Pde, SampleBox, SymbolError, DEFAULT_TOL};
use crate::tensor::rank_one_deform;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CharError {
    #[error("characteristic analysis needs n = 2, got n = {0}")]
    NotPlanar(usize),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Symbol(#[from] SymbolError),
    #[error("symbol vanishes identically at this point")]
    TotallyDegenerate,
    #[error("point is not hyperbolic ({0:?})")]
    NotHyperbolic(CharType),
    #[error("branch {0} does not exist")]
    NoSuchBranch(usize),
    #[error("branch is the root at infinity")]
    InfiniteRoot,
    #[error("roots nearly coincide (|b + 2cλ| = {0:e})")]
    NearParabolic(f64),
}

/// Tolerance on `|b² − 4ac|` relative to `a² + b² + c²` below which a point
/// is parabolic.
pub const TYPE_TOL: f64 = 1e-9;
pub const LAX_TOL: f64 = 1e-6;
pub const STRONG_TOL: f64 = 1e-8;
pub const STRONG_GRID: usize = 21;
pub const STRONG_WINDOW: f64 = 1.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CharType {
    Hyperbolic,
    Parabolic,
    Elliptic,
    TotallyDegenerate,
}

impl CharType {
    pub fn as_str(self) -> &'static str {
        match self {
            CharType::Hyperbolic => "hyperbolic",
            CharType::Parabolic => "parabolic",
            CharType::Elliptic => "elliptic",
            CharType::TotallyDegenerate => "totally-degenerate",
        }
    }
}

/// One characteristic line `span{ξ dx + η dy}`, normalised to unit length
/// with the first nonzero coordinate positive.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CharRoot {
    pub xi: f64,
    pub eta: f64,
    /// `η/ξ`, absent for the root at infinity.
    pub speed: Option<f64>,
}

impl CharRoot {
    fn new(xi: f64, eta: f64) -> Self {
        let norm = libm::hypot(xi, eta);
        let (mut xi, mut eta) = (xi / norm, eta / norm);
        if xi < 0.0 || (xi == 0.0 && eta < 0.0) {
            xi = -xi;
            eta = -eta;
        }
        let speed = (xi != 0.0).then(|| eta / xi);
        Self { xi, eta, speed }
    }

    /// Rank-one deformation direction `(1, λ)`, or `(0, 1)` for the root at
    /// infinity (the `(1, 0)` direction of the swapped chart).
    pub fn deformation_vector(&self) -> [f64; 2] {
        match self.speed {
            Some(l) => [1.0, l],
            None => [0.0, 1.0],
        }
    }

    fn sort_key(&self) -> (bool, f64) {
        match self.speed {
            Some(l) => (false, l),
            None => (true, 0.0),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CharSpeeds {
    /// `(a, b, c) = (F_u11, F_u12, F_u22)`.
    pub coeffs: [f64; 3],
    pub discriminant: f64,
    pub kind: CharType,
    /// Sorted by affine speed, the root at infinity last. Two roots when
    /// hyperbolic, one when parabolic, none when elliptic.
    pub roots: Vec<CharRoot>,
}

/// Roots of `a ξ² + b ξη + c η²`.
pub fn speeds_from_coeffs(a: f64, b: f64, c: f64, tol: f64) -> Result<CharSpeeds, CharError> {
    let norm2 = a * a + b * b + c * c;
    if libm::sqrt(norm2) <= tol.min(TYPE_TOL) || norm2 == 0.0 {
        return Err(CharError::TotallyDegenerate);
    }
    let disc = b * b - 4.0 * a * c;
    let (kind, mut roots) = if disc > tol * norm2 {
        let sq = libm::sqrt(disc);
        let q = -0.5 * (b + libm::copysign(sq, b));
        // λ = q/c and λ = a/q, written projectively
        (CharType::Hyperbolic, alloc::vec![CharRoot::new(c, q), CharRoot::new(q, a)])
    } else if disc < -tol * norm2 {
        (CharType::Elliptic, Vec::new())
    } else {
        let root = if c.abs() >= a.abs() {
            CharRoot::new(2.0 * c, -b)
        } else {
            CharRoot::new(-b, 2.0 * a)
        };
        (CharType::Parabolic, alloc::vec![root])
    };
    roots.sort_by(|x, y| x.sort_key().partial_cmp(&y.sort_key()).unwrap_or(core::cmp::Ordering::Equal));
    Ok(CharSpeeds {
        coeffs: [a, b, c],
        discriminant: disc,
        kind,
        roots,
    })
}

/// An equation in two independent variables with its `x ↔ y` mirror image.
#[derive(Clone, Debug)]
pub struct PlanarPde {
    pde: Pde,
    swapped: Pde,
}

/// Result of the strong-characteristic test on one branch.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StrongCheck {
    pub pass: bool,
    pub max_deviation: f64,
    pub threshold: f64,
    pub t_range: (f64, f64),
}

/// Lax residual `λ_u11 + λ λ_u12 + λ² λ_u22` of one branch.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LaxResidual {
    pub value: f64,
    /// Computed for the `x ↔ y` swapped equation (speed modulus above one or
    /// infinite).
    pub swapped: bool,
}

impl PlanarPde {
    pub fn new(pde: Pde) -> Result<Self, CharError> {
        if pde.dim() != 2 {
            return Err(CharError::NotPlanar(pde.dim()));
        }
        let swapped = pde.swap_planar()?;
        Ok(Self { pde, swapped })
    }

    pub fn parse(text: &str) -> Result<Self, CharError> {
        Self::new(Pde::parse(text, 2)?)
    }

    pub fn pde(&self) -> &Pde {
        &self.pde
    }

    /// `(F_u11, F_u12, F_u22)` at `pt`.
    pub fn char_poly_coeffs(&self, pt: &JetPoint) -> Result<[f64; 3], CharError> {
        coeffs(&self.pde, pt)
    }

    pub fn characteristic_speeds(&self, pt: &JetPoint, tol: f64) -> Result<CharSpeeds, CharError> {
        let [a, b, c] = self.char_poly_coeffs(pt)?;
        speeds_from_coeffs(a, b, c, tol)
    }

    fn hyperbolic_root(&self, pt: &JetPoint, branch: usize) -> Result<(CharSpeeds, CharRoot), CharError> {
        let speeds = self.characteristic_speeds(pt, TYPE_TOL)?;
        if speeds.kind != CharType::Hyperbolic {
            return Err(CharError::NotHyperbolic(speeds.kind));
        }
        let root = *speeds.roots.get(branch).ok_or(CharError::NoSuchBranch(branch))?;
        Ok((speeds, root))
    }

    /// `(∂λ/∂u11, ∂λ/∂u12, ∂λ/∂u22)` of a finite branch, by implicit
    /// differentiation of `a + bλ + cλ² = 0`.
    pub fn speed_gradient(&self, pt: &JetPoint, branch: usize) -> Result<[f64; 3], CharError> {
        let (_, root) = self.hyperbolic_root(pt, branch)?;
        let lambda = root.speed.ok_or(CharError::InfiniteRoot)?;
        gradient_at(&self.pde, pt, lambda)
    }

    pub fn lax_residual(&self, pt: &JetPoint, branch: usize) -> Result<LaxResidual, CharError> {
        let (_, root) = self.hyperbolic_root(pt, branch)?;
        match root.speed {
            Some(l) if l.abs() <= 1.0 => Ok(LaxResidual {
                value: lax_at(&self.pde, pt, l)?,
                swapped: false,
            }),
            _ => {
                let mu = root.xi / root.eta;
                let spt = pt.swap_planar();
                let [a, b, c] = coeffs(&self.swapped, &spt)?;
                let swapped = speeds_from_coeffs(a, b, c, TYPE_TOL)?;
                // the swapped quadratic's own root nearest to ξ/η
                let mu = swapped
                    .roots
                    .iter()
                    .filter_map(|r| r.speed)
                    .min_by(|x, y| (x - mu).abs().total_cmp(&(y - mu).abs()))
                    .unwrap_or(mu);
                Ok(LaxResidual {
                    value: lax_at(&self.swapped, &spt, mu)?,
                    swapped: true,
                })
            }
        }
    }

    /// Evaluates `F(H + t vvᵀ)` along the branch's deformation vector `v` on `grid` equally spaced `t` in `[-window, window]`, clipped so
    /// the deformed Hessian stays in `bx`. Passes when the largest `|F|` is
    /// at most `tol · (1 + s)`, with `s` the size of the first-order change
    /// `|a| v1² + |b| |v1 v2| + |c| v2²`.
    pub fn strong_char_test(
        &self,
        pt: &JetPoint,
        branch: usize,
        grid: usize,
        window: f64,
        bx: Option<SampleBox>,
        tol: f64,
    ) -> Result<StrongCheck, CharError> {
        let (speeds, root) = self.hyperbolic_root(pt, branch)?;
        let v = root.deformation_vector();
        let [a, b, c] = speeds.coeffs;
        let scale = a.abs() * v[0] * v[0] + b.abs() * (v[0] * v[1]).abs() + c.abs() * v[1] * v[1];
        let threshold = tol * (1.0 + scale);

        let (mut lo, mut hi) = (-window, window);
        if let Some(bx) = bx {
            let h = pt.hessian();
            for (i, j) in [(0, 0), (0, 1), (1, 1)] {
                let d = v[i] * v[j];
                if d == 0.0 {
                    continue;
                }
                let (t1, t2) = ((bx.lo - h.get(i, j)) / d, (bx.hi - h.get(i, j)) / d);
                lo = lo.max(t1.min(t2));
                hi = hi.min(t1.max(t2));
            }
            // the point itself may sit marginally outside after root refinement
            lo = lo.min(0.0);
            hi = hi.max(0.0);
        }

        let mut max_deviation: f64 = 0.0;
        for k in 0..grid.max(1) {
            let t = if grid <= 1 {
                0.0
            } else {
                lo + (hi - lo) * k as f64 / (grid - 1) as f64
            };
            let h = rank_one_deform(pt.hessian(), &v, t).map_err(|_| CharError::TotallyDegenerate)?;
            let f = self.pde.evaluate(&pt.with_hessian(h))?;
            max_deviation = max_deviation.max(f.abs());
        }
        Ok(StrongCheck {
            pass: max_deviation <= threshold,
            max_deviation,
            threshold,
            t_range: (lo, hi),
        })
    }

    /// Types every sample by its characteristic polynomial.
    pub fn hyperbolicity_scan(&self, samples: &[JetPoint], tol: f64) -> Result<HyperbolicityScan, CharError> {
        let mut types = Vec::with_capacity(samples.len());
        for pt in samples {
            types.push(match self.characteristic_speeds(pt, tol) {
                Ok(s) => s.kind,
                Err(CharError::TotallyDegenerate) => CharType::TotallyDegenerate,
                Err(e) => return Err(e),
            });
        }
        Ok(HyperbolicityScan { types })
    }

    /// Compares the divisibility test, the Lax condition on both branches and
    /// the strong-characteristic test on both branches at every hyperbolic
    /// sample of `{F = 0}`.
    pub fn equivalence_report(
        &self,
        bx: SampleBox,
        count: usize,
        seed: u64,
        tols: &Tolerances,
    ) -> Result<EquivalenceReport, CharError> {
        let points = sample_zero_locus(&self.pde, bx, count, seed)?;
        let mut report = EquivalenceReport {
            sampled: points.len(),
            skipped_elliptic: 0,
            skipped_parabolic: 0,
            skipped_degenerate: 0,
            skipped_near_parabolic: 0,
            samples: Vec::new(),
        };
        for (index, pt) in points.into_iter().enumerate() {
            match self.characteristic_speeds(&pt, tols.char_type) {
                Err(CharError::TotallyDegenerate) => {
                    report.skipped_degenerate += 1;
                    continue;
                }
                Err(e) => return Err(e),
                Ok(s) => match s.kind {
                    CharType::Hyperbolic => {}
                    CharType::Elliptic => {
                        report.skipped_elliptic += 1;
                        continue;
                    }
                    CharType::Parabolic => {
                        report.skipped_parabolic += 1;
                        continue;
                    }
                    CharType::TotallyDegenerate => {
                        report.skipped_degenerate += 1;
                        continue;
                    }
                },
            }
            let div = self.pde.exceptionality_at_point(&pt, tols.divisibility)?;
            let mut lax = [0.0; 2];
            let mut strong = [0.0; 2];
            let mut strong_pass = true;
            let mut near_parabolic = false;
            for branch in 0..2 {
                match self.lax_residual(&pt, branch) {
                    Ok(r) => lax[branch] = r.value,
                    Err(CharError::NearParabolic(_)) => near_parabolic = true,
                    Err(e) => return Err(e),
                }
                let s = self.strong_char_test(&pt, branch, STRONG_GRID, STRONG_WINDOW, Some(bx), tols.strong)?;
                strong[branch] = s.max_deviation;
                strong_pass &= s.pass;
            }
            if near_parabolic {
                report.skipped_near_parabolic += 1;
                continue;
            }
            report.samples.push(EquivalenceSample {
                index,
                point: pt,
                divisibility: div.pass,
                divisibility_residual: div.residual,
                lax,
                lax_pass: lax.iter().all(|r| r.abs() <= tols.lax),
                strong_deviation: strong,
                strong_pass,
            });
        }
        Ok(report)
    }
}

fn coeffs(pde: &Pde, pt: &JetPoint) -> Result<[f64; 3], CharError> {
    Ok([
        pde.first_partial(0, 0).evaluate(pt)?,
        pde.first_partial(0, 1).evaluate(pt)?,
        pde.first_partial(1, 1).evaluate(pt)?,
    ])
}

fn gradient_at(pde: &Pde, pt: &JetPoint, lambda: f64) -> Result<[f64; 3], CharError> {
    let [a, b, c] = coeffs(pde, pt)?;
    let den = b + 2.0 * c * lambda;
    let size = a.abs() + b.abs() + c.abs();
    if den.abs() <= 1e-12 * size * (1.0 + lambda.abs()) {
        return Err(CharError::NearParabolic(den.abs()));
    }
    let vars = [(0, 0), (0, 1), (1, 1)];
    let mut out = [0.0; 3];
    for (slot, &v) in out.iter_mut().zip(&vars) {
        let da = pde.second_partial((0, 0), v).evaluate(pt)?;
        let db = pde.second_partial((0, 1), v).evaluate(pt)?;
        let dc = pde.second_partial((1, 1), v).evaluate(pt)?;
        *slot = -(da + db * lambda + dc * lambda * lambda) / den;
    }
    Ok(out)
}

fn lax_at(pde: &Pde, pt: &JetPoint, lambda: f64) -> Result<f64, CharError> {
    let g = gradient_at(pde, pt, lambda)?;
    Ok(g[0] + lambda * g[1] + lambda * lambda * g[2])
}

/// Per-sample types from [`PlanarPde::hyperbolicity_scan`].
#[derive(Clone, Debug, PartialEq)]
pub struct HyperbolicityScan {
    pub types: Vec<CharType>,
}

impl HyperbolicityScan {
    pub fn count(&self, kind: CharType) -> usize {
        self.types.iter().filter(|&&t| t == kind).count()
    }

    pub fn fraction(&self, kind: CharType) -> f64 {
        if self.types.is_empty() {
            0.0
        } else {
            self.count(kind) as f64 / self.types.len() as f64
        }
    }
}

/// Thresholds of the three-way comparison.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub divisibility: f64,
    pub lax: f64,
    pub strong: f64,
    pub char_type: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            divisibility: DEFAULT_TOL,
            lax: LAX_TOL,
            strong: STRONG_TOL,
            char_type: TYPE_TOL,
        }
    }
}

#[derive(Clone, Debug)]
pub struct EquivalenceSample {
    /// Position in the sampled locus.
    pub index: usize,
    pub point: JetPoint,
    pub divisibility: bool,
    pub divisibility_residual: f64,
    pub lax: [f64; 2],
    pub lax_pass: bool,
    pub strong_deviation: [f64; 2],
    pub strong_pass: bool,
}

impl EquivalenceSample {
    pub fn verdicts(&self) -> [bool; 3] {
        [self.divisibility, self.lax_pass, self.strong_pass]
    }

    pub fn agrees(&self) -> bool {
        let v = self.verdicts();
        v[0] == v[1] && v[1] == v[2]
    }
}

#[derive(Clone, Debug)]
pub struct EquivalenceReport {
    pub sampled: usize,
    pub skipped_elliptic: usize,
    pub skipped_parabolic: usize,
    pub skipped_degenerate: usize,
    pub skipped_near_parabolic: usize,
    /// Hyperbolic samples that were compared.
    pub samples: Vec<EquivalenceSample>,
}

impl EquivalenceReport {
    /// `m[i][j]` counts samples where criteria `i` and `j` agree, in the
    /// order divisibility, Lax, strong characteristics.
    pub fn agreement_matrix(&self) -> [[usize; 3]; 3] {
        let mut m = [[0; 3]; 3];
        for s in &self.samples {
            let v = s.verdicts();
            for i in 0..3 {
                for j in 0..3 {
                    m[i][j] += usize::from(v[i] == v[j]);
                }
            }
        }
        m
    }

    pub fn disagreements(&self) -> impl Iterator<Item = &EquivalenceSample> {
        self.samples.iter().filter(|s| !s.agrees())
    }

    pub fn all_agree(&self) -> bool {
        self.samples.iter().all(EquivalenceSample::agrees)
    }

    /// Samples on which all three criteria pass.
    pub fn all_pass(&self) -> usize {
        self.samples.iter().filter(|s| s.verdicts() == [true; 3]).count()
    }

    pub fn all_fail(&self) -> usize {
        self.samples.iter().filter(|s| s.verdicts() == [false; 3]).count()
    }
}

/// Jet variable of a Hessian slot in `[u11, u12, u22]` order.
pub fn hessian_var(slot: usize) -> Var {
    [Var::H(0, 0), Var::H(0, 1), Var::H(1, 1)][slot]
}
