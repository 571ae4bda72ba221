use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Pde, SymbolError};
use crate::expr::{JetPoint, Var};
use crate::tensor::{upper_pairs, SymMatrix};

/// Uniform coordinate range used for every jet coordinate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SampleBox {
    pub lo: f64,
    pub hi: f64,
}

impl Default for SampleBox {
    fn default() -> Self {
        Self { lo: -2.0, hi: 2.0 }
    }
}

impl SampleBox {
    pub fn new(lo: f64, hi: f64) -> Result<Self, SymbolError> {
        if lo.is_finite() && hi.is_finite() && lo < hi {
            Ok(Self { lo, hi })
        } else {
            Err(SymbolError::BadBox { lo, hi })
        }
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn draw(&self, rng: &mut impl Rng) -> f64 {
        rng.random_range(self.lo..=self.hi)
    }

    /// Point with every coordinate drawn uniformly.
    pub fn draw_point(&self, n: usize, rng: &mut impl Rng) -> JetPoint {
        let mut pt = JetPoint::zeros(n);
        let vars: Vec<Var> = pt.vars().collect();
        for v in vars {
            pt.set(v, self.draw(rng));
        }
        pt
    }
}

/// Number of pivot grid intervals scanned for sign changes.
const GRID: usize = 64;
const MAX_ATTEMPTS: usize = 50;
/// Accepted points satisfy `|F| <= ON_LOCUS_TOL · (1 + scale)`, with `scale`
/// the largest `|F|` seen on the pivot grid.
pub const ON_LOCUS_TOL: f64 = 1e-10;

/// Draws up to `count` points of `{F = 0}` inside the box.
///
/// Every coordinate is drawn uniformly except one Hessian entry (the pivot,
/// cycled over entries and attempts), which is then solved for by scanning
/// for sign changes and refining with safeguarded Newton steps. A sample is
/// abandoned after 50 attempts; fewer than `count / 2` points is a sampling
/// failure. The result depends only on the arguments.
pub fn sample_zero_locus(
    pde: &Pde,
    bx: SampleBox,
    count: usize,
    seed: u64,
) -> Result<Vec<JetPoint>, SymbolError> {
    if count == 0 {
        return Err(SymbolError::EmptyRequest);
    }
    let n = pde.dim();
    let pivots: Vec<(usize, usize)> = upper_pairs(n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for k in 0..count {
        for attempt in 0..MAX_ATTEMPTS {
            let (i, j) = pivots[(k + attempt) % pivots.len()];
            let pt = bx.draw_point(n, &mut rng);
            if let Some(found) = solve_pivot(pde, pt, Var::H(i, j), bx, &mut rng) {
                out.push(found);
                break;
            }
        }
    }
    if 2 * out.len() < count {
        return Err(SymbolError::SamplingFailure {
            found: out.len(),
            requested: count,
        });
    }
    Ok(out)
}

fn solve_pivot(pde: &Pde, mut pt: JetPoint, var: Var, bx: SampleBox, rng: &mut impl Rng) -> Option<JetPoint> {
    let step = (bx.hi - bx.lo) / GRID as f64;
    let eval_at = |pt: &mut JetPoint, v: f64| -> Option<f64> {
        pt.set(var, v);
        pde.expr().evaluate(pt).ok().filter(|f| f.is_finite())
    };
    let grid: Vec<(f64, Option<f64>)> = (0..=GRID)
        .map(|k| {
            let v = if k == GRID { bx.hi } else { bx.lo + k as f64 * step };
            (v, eval_at(&mut pt, v))
        })
        .collect();
    let scale = grid
        .iter()
        .filter_map(|(_, f)| *f)
        .fold(0.0, |m: f64, f| m.max(f.abs()));
    let brackets: Vec<(f64, f64, f64, f64)> = grid
        .windows(2)
        .filter_map(|w| match (w[0], w[1]) {
            ((a, Some(fa)), (b, Some(fb))) if fa == 0.0 || fa.signum() != fb.signum() => Some((a, b, fa, fb)),
            _ => None,
        })
        .collect();
    if brackets.is_empty() {
        return None;
    }
    let (a, b, fa, fb) = brackets[rng.random_range(0..brackets.len())];
    let root = refine(pde, &mut pt, var, a, b, fa, fb)?;
    pt.set(var, root);
    let f = pde.expr().evaluate(&pt).ok()?;
    (f.abs() <= ON_LOCUS_TOL * (1.0 + scale) && bx.contains(root) && pt.is_finite()).then_some(pt)
}

/// Safeguarded Newton iteration inside a sign-change bracket.
fn refine(pde: &Pde, pt: &mut JetPoint, var: Var, mut a: f64, mut b: f64, mut fa: f64, fb: f64) -> Option<f64> {
    if fa == 0.0 {
        return Some(a);
    }
    if fb == 0.0 {
        return Some(b);
    }
    let Var::H(i, j) = var else { return None };
    let slope = pde.first_partial(i, j);
    let mut x = 0.5 * (a + b);
    let mut best = (f64::INFINITY, x);
    for _ in 0..200 {
        pt.set(var, x);
        let fx = pde.expr().evaluate(pt).ok()?;
        if fx.abs() < best.0 {
            best = (fx.abs(), x);
        }
        if fx == 0.0 {
            break;
        }
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
        } else {
            b = x;
        }
        if (b - a).abs() <= 4.0 * f64::EPSILON * (a.abs() + b.abs()).max(f64::MIN_POSITIVE) {
            break;
        }
        let d = slope.evaluate(pt).unwrap_or(f64::NAN);
        let newton = x - fx / d;
        let lo = a.min(b);
        let hi = a.max(b);
        x = if newton.is_finite() && newton > lo && newton < hi && newton != x {
            newton
        } else {
            0.5 * (a + b)
        };
    }
    Some(best.1)
}

/// A random symmetric matrix with entries uniform in the box.
pub fn draw_hessian(n: usize, bx: SampleBox, rng: &mut impl Rng) -> SymMatrix {
    SymMatrix::from_fn(n, |_, _| bx.draw(rng))
}
