mod common;

use common::{max_abs, random_point, rng, CORPUS};
use mongeampere_core::expr::parse;
use mongeampere_core::symbol::{is_completely_exceptional, sample_zero_locus, DEFAULT_TOL};
use mongeampere_core::{Pde, SampleBox, Verdict};

const MULTIPLIERS: [&str; 3] = ["2", "1+u1^2", "exp(u)"];

fn rel_close(a: &[f64], b: &[f64], tol: f64) -> bool {
    let scale = max_abs(a.iter().chain(b).copied()).max(1.0);
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol * scale)
}

#[test]
fn corpus_verdicts() {
    for e in &CORPUS {
        let pde = Pde::parse(e.text, 2).unwrap();
        let v = is_completely_exceptional(&pde, SampleBox::default(), 64, 42, DEFAULT_TOL).unwrap();
        let want = if e.exceptional { Verdict::Exceptional } else { Verdict::NotExceptional };
        assert_eq!(v.verdict, want, "{}", e.text);
    }
}

#[test]
fn symbol_routes_agree_on_corpus() {
    let mut r = rng(21);
    for e in &CORPUS {
        let pde = Pde::parse(e.text, 2).unwrap();
        for _ in 0..20 {
            let pt = random_point(2, &mut r);
            let s1 = pde.principal_symbol(&pt).unwrap();
            let s2 = pde.principal_symbol_rank_one(&pt).unwrap();
            assert!(rel_close(s1.coeffs(), s2.coeffs(), 1e-9), "{}", e.text);
            let q1 = pde.second_symbol(&pt).unwrap();
            let q2 = pde.second_symbol_rank_one(&pt).unwrap();
            assert!(rel_close(q1.coeffs(), q2.coeffs(), 1e-9), "{}", e.text);
        }
    }
}

#[test]
fn symbol_routes_agree_in_higher_dimension() {
    let mut r = rng(22);
    for (text, n) in [
        ("u11*u22*u33 + sin(x2)*u12^2 - u13*u23 + u", 3),
        ("exp(u1)*u11*u44 - u23^3 + u12*u34", 4),
    ] {
        let pde = Pde::parse(text, n).unwrap();
        for _ in 0..10 {
            let pt = random_point(n, &mut r);
            let q1 = pde.second_symbol(&pt).unwrap();
            let q2 = pde.second_symbol_rank_one(&pt).unwrap();
            assert!(rel_close(q1.coeffs(), q2.coeffs(), 1e-9), "{text}");
        }
    }
}

#[test]
fn affine_in_hessian_has_zero_second_symbol() {
    let mut r = rng(23);
    for text in ["u11+u22", "u12+u1*u11", "sin(x1)*u11 - exp(u)*u22 + u1*u2"] {
        let pde = Pde::parse(text, 2).unwrap();
        assert!(pde.is_affine_in_hessian());
        for _ in 0..10 {
            assert!(pde.second_symbol(&random_point(2, &mut r)).unwrap().is_zero());
        }
    }
}

#[test]
fn verdicts_ignore_the_representative() {
    let bx = SampleBox::default();
    for e in &CORPUS {
        let pde = Pde::parse(e.text, 2).unwrap();
        let base = is_completely_exceptional(&pde, bx, 32, 42, DEFAULT_TOL).unwrap();
        let locus = sample_zero_locus(&pde, bx, 8, 42).unwrap();
        for g in MULTIPLIERS {
            let gexpr = parse(g, 2).unwrap();
            let scaled = pde.with_multiplier(gexpr.clone()).unwrap();
            let v = is_completely_exceptional(&scaled, bx, 32, 42, DEFAULT_TOL).unwrap();
            assert_eq!(v.verdict, base.verdict, "{} times {}", e.text, g);
            for pt in &locus {
                let gv = gexpr.evaluate(pt).unwrap();
                let want: Vec<f64> = pde.principal_symbol(pt).unwrap().coeffs().iter().map(|c| gv * c).collect();
                let got = scaled.principal_symbol(pt).unwrap();
                assert!(rel_close(got.coeffs(), &want, 1e-9));
            }
        }
    }
}

#[test]
fn same_seed_same_samples_and_verdict() {
    let bx = SampleBox::default();
    for e in &CORPUS {
        let pde = Pde::parse(e.text, 2).unwrap();
        let a = is_completely_exceptional(&pde, bx, 16, 7, DEFAULT_TOL).unwrap();
        let b = is_completely_exceptional(&pde, bx, 16, 7, DEFAULT_TOL).unwrap();
        assert_eq!(a.verdict, b.verdict);
        let pa: Vec<_> = a.samples.iter().map(|s| s.point.clone()).collect();
        let pb: Vec<_> = b.samples.iter().map(|s| s.point.clone()).collect();
        assert_eq!(pa, pb);
    }
}

#[test]
fn homogeneous_determinant_has_vanishing_second_symbol() {
    let pde = Pde::parse("u11*u22-u12^2", 2).unwrap();
    let mut r = rng(24);
    for _ in 0..100 {
        let q = pde.second_symbol(&random_point(2, &mut r)).unwrap();
        assert!(max_abs(q.coeffs().iter().copied()) <= 1e-12);
    }
}
