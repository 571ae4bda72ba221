//! Acceptance gate. Each criterion prints one PASS/FAIL line; the process
//! exits nonzero if any criterion fails. Tolerances and time budgets are
//! pinned below.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mongeampere::corpus::{self, CorpusEntry};
use mongeampere_core::charvar::{speeds_from_coeffs, CharSpeeds, CharType, PlanarPde, Tolerances, TYPE_TOL};
use mongeampere_core::expr::{parse, Expr, Func, JetPoint, Var};
use mongeampere_core::ma::classify;
use mongeampere_core::symbol::{is_completely_exceptional, sample_zero_locus, DEFAULT_TOL};
use mongeampere_core::tensor::{adjugate, compound, lie_quadric_residual, pluecker_embed, rank_one_deform, SymMatrix};
use mongeampere_core::{Pde, SampleBox, Verdict};

const SEED: u64 = 42;

const C1_COEFF_TOL: f64 = 1e-12;
const C1_POINTS: usize = 100;
const C1_BUDGET: Duration = Duration::from_secs(1);

const C2_SAMPLES: usize = 64;
const C2_MIN_SAMPLES: usize = 50;
const C2_MA_BASE_POINTS: usize = 4;
const C2_BUDGET: Duration = Duration::from_secs(30);

const C3_QUADRIC_TOL: f64 = 1e-10;
const C3_QUADRIC_COUNT: usize = 1000;
const C3_ADJ_TOL: f64 = 1e-10;
const C3_ADJ_COUNT: usize = 100;
const C3_BUDGET: Duration = Duration::from_secs(2);

const C4_LINE_TOL: f64 = 1e-9;
const C4_COUNT: usize = 200;
const C4_BUDGET: Duration = Duration::from_secs(1);

const C5_FD_STEP: f64 = 1e-5;
const C5_REL_TOL: f64 = 1e-5;
const C5_POINTS: usize = 50;
const C5_VALUE_TOL: f64 = 1e-6;
const C5_BUDGET: Duration = Duration::from_secs(5);

const C6_MULTIPLIERS: [&str; 3] = ["2", "1+u1^2", "exp(u)"];
const C6_ROOT_TOL: f64 = 1e-9;
const C6_SAMPLES: usize = 64;
const C6_BUDGET: Duration = Duration::from_secs(20);

const C7_EXPRESSIONS: usize = 100;
const C7_DEPTH: usize = 5;
const C7_FD_STEP: f64 = 1e-5;
const C7_REL_TOL: f64 = 1e-5;
const C7_BUDGET: Duration = Duration::from_secs(2);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn timed(budget: Duration, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let o = f();
    let elapsed = start.elapsed();
    let in_time = elapsed <= budget;
    let mut detail = format!("{}; {:.3} s of {} s", o.detail, elapsed.as_secs_f64(), budget.as_secs_f64());
    if !in_time {
        detail.push_str(" (over budget)");
    }
    outcome(o.pass && in_time, detail)
}

fn corpus_entries() -> Vec<CorpusEntry> {
    corpus::from_str(corpus::BUNDLED).expect("bundled corpus is valid")
}

fn random_point(n: usize, rng: &mut impl Rng) -> JetPoint {
    let mut v = || rng.random_range(-2.0..=2.0);
    let x = (0..n).map(|_| v()).collect();
    let u = v();
    let p = (0..n).map(|_| v()).collect();
    let h = SymMatrix::from_fn(n, |_, _| v());
    JetPoint::new(x, u, p, h).unwrap()
}

fn random_sym(n: usize, rng: &mut impl Rng) -> SymMatrix {
    SymMatrix::from_fn(n, |_, _| rng.random_range(-3.0..=3.0))
}

fn criterion_1() -> Outcome {
    let pde = Pde::parse("u11*u22-u12^2", 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst: f64 = 0.0;
    for _ in 0..C1_POINTS {
        let q = pde.second_symbol(&random_point(2, &mut rng)).unwrap();
        worst = q.coeffs().iter().fold(worst, |m, c| m.max(c.abs()));
    }
    outcome(
        worst <= C1_COEFF_TOL,
        format!("max |coefficient| {worst:.2e} over {C1_POINTS} points (tol {C1_COEFF_TOL:e})"),
    )
}

fn criterion_2() -> Outcome {
    let tols = Tolerances::default();
    let bx = SampleBox::default();
    let mut pass = true;
    let mut notes = Vec::new();
    let mut compared = 0;
    for e in corpus_entries() {
        let f = PlanarPde::parse(&e.expression).unwrap();
        let r = f.equivalence_report(bx, C2_SAMPLES, SEED, &tols).unwrap();
        let disagree = r.disagreements().count();
        compared += r.samples.len();
        if r.sampled < C2_MIN_SAMPLES || disagree > 0 {
            pass = false;
            notes.push(format!("{}: {} sampled, {} disagreeing", e.name, r.sampled, disagree));
        }
        let pde = f.pde();
        let ma = classify(pde, bx, C2_MA_BASE_POINTS, SEED, DEFAULT_TOL).unwrap();
        let exc = is_completely_exceptional(pde, bx, C2_SAMPLES, SEED, DEFAULT_TOL).unwrap();
        if ma.kind.is_monge_ampere() != (exc.verdict == Verdict::Exceptional) {
            pass = false;
            notes.push(format!("{}: {} vs {}", e.name, ma.kind.as_str(), exc.verdict.as_str()));
        }
    }
    let mut detail = format!("{compared} hyperbolic samples compared, all three criteria agree");
    if !pass {
        detail = notes.join("; ");
    }
    outcome(pass, detail)
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut quadric_worst: f64 = 0.0;
    for _ in 0..C3_QUADRIC_COUNT {
        let a = random_sym(2, &mut rng);
        let r = lie_quadric_residual(&pluecker_embed(&a).unwrap()).unwrap().abs();
        quadric_worst = quadric_worst.max(r / (1.0 + a.frobenius_norm().powi(4)));
    }
    let mut adj_worst: f64 = 0.0;
    for n in 2..=4 {
        for _ in 0..C3_ADJ_COUNT {
            let a = random_sym(n, &mut rng);
            let c = compound(&a, n - 1).unwrap();
            let adj = adjugate(&a);
            let scale = adj.max_abs().max(1.0);
            for i in 0..n {
                for j in 0..n {
                    let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                    let d = (sign * c[(n - 1 - i, n - 1 - j)] - adj.get(i, j)).abs() / scale;
                    adj_worst = adj_worst.max(d);
                }
            }
        }
    }
    outcome(
        quadric_worst <= C3_QUADRIC_TOL && adj_worst <= C3_ADJ_TOL,
        format!("quadric residual {quadric_worst:.2e}, compound vs adjugate {adj_worst:.2e}"),
    )
}

/// `‖a ∧ b‖ / (‖a‖ ‖b‖)`: the sine of the angle between two chords.
fn collinearity(a: &[f64], b: &[f64]) -> f64 {
    let mut wedge = 0.0;
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            let w = a[i] * b[j] - a[j] * b[i];
            wedge += w * w;
        }
    }
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    wedge.sqrt() / (norm(a) * norm(b)).max(1.0)
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst: f64 = 0.0;
    let mut tested = 0;
    while tested < C4_COUNT {
        let a = random_sym(2, &mut rng);
        let v = [rng.random_range(-2.0..=2.0), rng.random_range(-2.0..=2.0)];
        if v == [0.0, 0.0] {
            continue;
        }
        let z: Vec<Vec<f64>> = [0.0, 1.0, 2.0]
            .iter()
            .map(|&t| pluecker_embed(&rank_one_deform(&a, &v, t).unwrap()).unwrap())
            .collect();
        let d1: Vec<f64> = z[1].iter().zip(&z[0]).map(|(p, q)| p - q).collect();
        let d2: Vec<f64> = z[2].iter().zip(&z[0]).map(|(p, q)| p - q).collect();
        worst = worst.max(collinearity(&d1, &d2));
        tested += 1;
    }
    outcome(worst <= C4_LINE_TOL, format!("max collinearity residual {worst:.2e} over {tested} lines"))
}

fn nearest_root(f: &PlanarPde, pt: &JetPoint, lambda: f64) -> Option<f64> {
    let [a, b, c] = f.char_poly_coeffs(pt).ok()?;
    let s = speeds_from_coeffs(a, b, c, TYPE_TOL).ok()?;
    s.roots
        .iter()
        .filter_map(|r| r.speed)
        .min_by(|x, y| (x - lambda).abs().total_cmp(&(y - lambda).abs()))
}

fn fd_gradient(f: &PlanarPde, pt: &JetPoint, lambda: f64) -> Option<[f64; 3]> {
    let mut out = [0.0; 3];
    for (k, v) in [Var::H(0, 0), Var::H(0, 1), Var::H(1, 1)].into_iter().enumerate() {
        let x = pt.get(v).unwrap();
        let (mut p, mut m) = (pt.clone(), pt.clone());
        p.set(v, x + C5_FD_STEP);
        m.set(v, x - C5_FD_STEP);
        out[k] = (nearest_root(f, &p, lambda)? - nearest_root(f, &m, lambda)?) / (2.0 * C5_FD_STEP);
    }
    Some(out)
}

fn hyperbolic(f: &PlanarPde, pt: &JetPoint) -> Option<CharSpeeds> {
    f.characteristic_speeds(pt, TYPE_TOL).ok().filter(|s| s.kind == CharType::Hyperbolic)
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    let mut counts = Vec::new();
    let mut pass = true;
    for e in corpus_entries() {
        let f = PlanarPde::parse(&e.expression).unwrap();
        let mut points = 0;
        for _ in 0..100 * C5_POINTS {
            if points == C5_POINTS {
                break;
            }
            let pt = random_point(2, &mut rng);
            let Some(speeds) = hyperbolic(&f, &pt) else { continue };
            points += 1;
            for (branch, root) in speeds.roots.iter().enumerate() {
                let Some(lambda) = root.speed else { continue };
                let an = f.speed_gradient(&pt, branch).unwrap();
                let Some(fd) = fd_gradient(&f, &pt, lambda) else {
                    pass = false;
                    continue;
                };
                let err = an.iter().zip(&fd).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
                let scale = an.iter().fold(1.0f64, |m, a| m.max(a.abs()));
                worst = worst.max(err / scale);
                checked += 1;
            }
        }
        counts.push(format!("{}:{points}", e.name));
    }
    let f = PlanarPde::parse("u11 - u22^3/3 - u22").unwrap();
    let pt = JetPoint::from_hessian(SymMatrix::from_rows(&[[4.0 / 3.0, 0.0], [0.0, 1.0]]));
    let g = f.speed_gradient(&pt, 1).unwrap();
    let want = -(2.0f64).powf(-1.5);
    let value_err = (g[2] - want).abs();
    outcome(
        pass && worst <= C5_REL_TOL && value_err <= C5_VALUE_TOL && g[0] == 0.0 && g[1] == 0.0,
        format!(
            "max relative error {worst:.2e} over {checked} branches; lambda_u22 = {:.7} (error {value_err:.1e}); points per entry [{}]",
            g[2],
            counts.join(", ")
        ),
    )
}

fn criterion_6() -> Outcome {
    let bx = SampleBox::default();
    let mut notes = Vec::new();
    let mut roots_worst: f64 = 0.0;
    let mut roots_compared = 0;
    for e in corpus_entries() {
        let pde = Pde::parse(&e.expression, e.n).unwrap();
        let base = is_completely_exceptional(&pde, bx, C6_SAMPLES, SEED, DEFAULT_TOL).unwrap();
        let f = PlanarPde::new(pde.clone()).unwrap();
        let locus = sample_zero_locus(&pde, bx, C6_SAMPLES, SEED).unwrap();
        for g in C6_MULTIPLIERS {
            let gpde = pde.with_multiplier(parse(g, 2).unwrap()).unwrap();
            let v = is_completely_exceptional(&gpde, bx, C6_SAMPLES, SEED, DEFAULT_TOL).unwrap();
            if v.verdict != base.verdict {
                notes.push(format!("{} times {g}: {} vs {}", e.name, v.verdict.as_str(), base.verdict.as_str()));
            }
            let gf = PlanarPde::new(gpde).unwrap();
            for pt in &locus {
                match (f.characteristic_speeds(pt, TYPE_TOL), gf.characteristic_speeds(pt, TYPE_TOL)) {
                    (Ok(a), Ok(b)) if a.kind == b.kind && a.roots.len() == b.roots.len() => {
                        for (x, y) in a.roots.iter().zip(&b.roots) {
                            roots_worst = roots_worst.max((x.xi - y.xi).abs()).max((x.eta - y.eta).abs());
                            roots_compared += 1;
                        }
                    }
                    (Err(_), Err(_)) => {}
                    _ => notes.push(format!("{} times {g}: characteristic type differs", e.name)),
                }
            }
        }
    }
    if roots_worst > C6_ROOT_TOL {
        notes.push(format!("root difference {roots_worst:.2e}"));
    }
    let pass = notes.is_empty();
    let detail = if pass {
        format!("verdicts unchanged; max root difference {roots_worst:.2e} over {roots_compared} roots")
    } else {
        notes.join("; ")
    };
    outcome(pass, detail)
}

const LEAF_VARS: [Var; 8] = [
    Var::X(0),
    Var::X(1),
    Var::U,
    Var::P(0),
    Var::P(1),
    Var::H(0, 0),
    Var::H(0, 1),
    Var::H(1, 1),
];
const FUNCS: [Func; 6] = [Func::Sin, Func::Cos, Func::Exp, Func::Log, Func::Sqrt, Func::Tanh];

fn random_expr(depth: usize, rng: &mut impl Rng) -> Expr {
    if depth == 0 || rng.random_bool(0.25) {
        return if rng.random_bool(0.7) {
            Expr::var(LEAF_VARS[rng.random_range(0..LEAF_VARS.len())])
        } else {
            Expr::constant(f64::from(rng.random_range(-20..=20)) / 4.0)
        };
    }
    let d = depth - 1;
    match rng.random_range(0..7) {
        0 => Expr::add(random_expr(d, rng), random_expr(d, rng)),
        1 => Expr::sub(random_expr(d, rng), random_expr(d, rng)),
        2 => Expr::mul(random_expr(d, rng), random_expr(d, rng)),
        3 => Expr::div(random_expr(d, rng), random_expr(d, rng)),
        4 => Expr::pow(random_expr(d, rng), rng.random_range(0..4)),
        5 => Expr::neg(random_expr(d, rng)),
        _ => Expr::func(FUNCS[rng.random_range(0..FUNCS.len())], random_expr(d, rng)),
    }
}

/// Every subexpression evaluates to a moderate value away from the edges
/// of its domain.
fn well_inside(e: &Expr, pt: &JetPoint) -> bool {
    const MARGIN: f64 = 0.05;
    const BIG: f64 = 1e4;
    let Ok(v) = e.evaluate(pt) else { return false };
    if !v.is_finite() || v.abs() > BIG {
        return false;
    }
    match e {
        Expr::Const(_) | Expr::Var(_) => true,
        Expr::Neg(a) | Expr::Pow(a, _) => well_inside(a, pt),
        Expr::Func(f, a) => {
            let Ok(x) = a.evaluate(pt) else { return false };
            let ok = match f {
                Func::Log | Func::Sqrt => x > MARGIN,
                Func::Exp => x < 8.0,
                _ => true,
            };
            ok && well_inside(a, pt)
        }
        Expr::Div(a, b) => {
            let Ok(d) = b.evaluate(pt) else { return false };
            d.abs() > MARGIN && well_inside(a, pt) && well_inside(b, pt)
        }
        Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => well_inside(a, pt) && well_inside(b, pt),
    }
}

fn criterion_7() -> Outcome {
    let mut round_trip_failures = Vec::new();
    for e in corpus_entries() {
        let parsed = parse(&e.expression, e.n).unwrap();
        if parse(&parsed.to_string(), e.n).ok().as_ref() != Some(&parsed) {
            round_trip_failures.push(e.name);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut accepted = 0;
    let mut worst: f64 = 0.0;
    let mut attempts = 0;
    while accepted < C7_EXPRESSIONS && attempts < 100 * C7_EXPRESSIONS {
        attempts += 1;
        let e = random_expr(C7_DEPTH, &mut rng);
        let pt = random_point(2, &mut rng);
        let v = LEAF_VARS[rng.random_range(0..LEAF_VARS.len())];
        let shift = |h: f64| {
            let mut q = pt.clone();
            q.set(v, pt.get(v).unwrap() + h);
            q
        };
        let (plus, minus) = (shift(C7_FD_STEP), shift(-C7_FD_STEP));
        if !e.depends_on(v) || ![&pt, &plus, &minus].iter().all(|p| well_inside(&e, p)) {
            continue;
        }
        let fd = (e.evaluate(&plus).unwrap() - e.evaluate(&minus).unwrap()) / (2.0 * C7_FD_STEP);
        let d = e.differentiate(v).evaluate(&pt).unwrap();
        worst = worst.max((d - fd).abs() / (1.0 + d.abs()));
        accepted += 1;
    }
    outcome(
        round_trip_failures.is_empty() && accepted == C7_EXPRESSIONS && worst <= C7_REL_TOL,
        format!(
            "round trip failures {:?}; derivative error {worst:.2e} over {accepted} expressions",
            round_trip_failures
        ),
    )
}

fn criterion_8() -> Outcome {
    let file = concat!(env!("CARGO_MANIFEST_DIR"), "/corpus/bundled.json");
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_mongeampere"))
            .args(["corpus", "--file", file, "--seed", "42"])
            .output()
            .expect("binary runs")
    };
    let (a, b) = (run(), run());
    let codes = (a.status.code(), b.status.code());
    let identical = a.stdout == b.stdout && !a.stdout.is_empty();
    outcome(
        codes == (Some(0), Some(0)) && identical,
        format!("exit codes {codes:?}, {} bytes, identical: {identical}", a.stdout.len()),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("1 homogeneous MA second symbol vanishes", || timed(C1_BUDGET, criterion_1)),
        ("2 three-way equivalence and MA/exceptional agreement", || timed(C2_BUDGET, criterion_2)),
        ("3 Lie quadric and compound/adjugate", || timed(C3_BUDGET, criterion_3)),
        ("4 rank-one lines embed as straight lines", || timed(C4_BUDGET, criterion_4)),
        ("5 speed gradient vs finite differences", || timed(C5_BUDGET, criterion_5)),
        ("6 representative invariance", || timed(C6_BUDGET, criterion_6)),
        ("7 parser round trip and derivatives", || timed(C7_BUDGET, criterion_7)),
        ("8 CLI corpus output is byte-identical", criterion_8),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let o = run();
        println!("criterion {name}: {} ({})", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {} of 8 criteria pass", 8 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
