//! Second-order Taylor arithmetic along a straight line in the Hessian
//! fibre. This gives `d/dt` and `d²/dt²` of `F(H + t·D)` at `t = 0` without
//! symbolic differentiation.

use super::{domain, DomainKind, Expr, ExprError, Func, JetPoint, Var};
use crate::tensor::SymMatrix;

/// Truncated series `c0 + c1·t + c2·t²`.
#[derive(Clone, Copy, Debug)]
struct T2(f64, f64, f64);

impl T2 {
    fn constant(c: f64) -> Self {
        T2(c, 0.0, 0.0)
    }

    fn add(self, o: Self) -> Self {
        T2(self.0 + o.0, self.1 + o.1, self.2 + o.2)
    }

    fn sub(self, o: Self) -> Self {
        T2(self.0 - o.0, self.1 - o.1, self.2 - o.2)
    }

    fn mul(self, o: Self) -> Self {
        T2(
            self.0 * o.0,
            self.0 * o.1 + self.1 * o.0,
            self.0 * o.2 + self.1 * o.1 + self.2 * o.0,
        )
    }

    fn div(self, o: Self) -> Self {
        let q0 = self.0 / o.0;
        let q1 = (self.1 - q0 * o.1) / o.0;
        let q2 = (self.2 - q0 * o.2 - q1 * o.1) / o.0;
        T2(q0, q1, q2)
    }

    /// `f(c0 + h)` with `h = c1 t + c2 t²`, given `f, f', f''` at `c0`.
    fn compose(self, f0: f64, f1: f64, f2: f64) -> Self {
        T2(f0, f1 * self.1, f1 * self.2 + 0.5 * f2 * self.1 * self.1)
    }
}

fn eval(e: &Expr, pt: &JetPoint, dir: &SymMatrix) -> Result<T2, ExprError> {
    Ok(match e {
        Expr::Const(c) => T2::constant(*c),
        Expr::Var(v) => {
            let c0 = pt.get(*v).ok_or(ExprError::Unbound(*v))?;
            match v {
                Var::H(i, j) => T2(c0, dir.get(*i, *j), 0.0),
                _ => T2::constant(c0),
            }
        }
        Expr::Neg(a) => {
            let a = eval(a, pt, dir)?;
            T2(-a.0, -a.1, -a.2)
        }
        Expr::Add(a, b) => eval(a, pt, dir)?.add(eval(b, pt, dir)?),
        Expr::Sub(a, b) => eval(a, pt, dir)?.sub(eval(b, pt, dir)?),
        Expr::Mul(a, b) => eval(a, pt, dir)?.mul(eval(b, pt, dir)?),
        Expr::Div(a, b) => {
            let num = eval(a, pt, dir)?;
            let den = eval(b, pt, dir)?;
            if den.0 == 0.0 {
                return Err(domain(DomainKind::DivisionByZero, e));
            }
            num.div(den)
        }
        Expr::Pow(a, k) => {
            let a = eval(a, pt, dir)?;
            (0..*k).fold(T2::constant(1.0), |acc, _| acc.mul(a))
        }
        Expr::Func(f, a) => {
            let a = eval(a, pt, dir)?;
            let x = a.0;
            match f {
                Func::Sin => a.compose(libm::sin(x), libm::cos(x), -libm::sin(x)),
                Func::Cos => a.compose(libm::cos(x), -libm::sin(x), -libm::cos(x)),
                Func::Exp => {
                    let ex = libm::exp(x);
                    a.compose(ex, ex, ex)
                }
                Func::Log => {
                    if x <= 0.0 {
                        return Err(domain(DomainKind::LogNonPositive, e));
                    }
                    a.compose(libm::log(x), 1.0 / x, -1.0 / (x * x))
                }
                Func::Sqrt => {
                    if x < 0.0 {
                        return Err(domain(DomainKind::SqrtNegative, e));
                    }
                    let s = libm::sqrt(x);
                    a.compose(s, 0.5 / s, -0.25 / (s * x))
                }
                Func::Tanh => {
                    let th = libm::tanh(x);
                    let d1 = 1.0 - th * th;
                    a.compose(th, d1, -2.0 * th * d1)
                }
            }
        }
    })
}

/// `[F, dF/dt, d²F/dt²]` of `t ↦ F(pt with H → H + t·dir)` at `t = 0`.
pub fn line_derivatives(e: &Expr, pt: &JetPoint, dir: &SymMatrix) -> Result<[f64; 3], ExprError> {
    let s = eval(e, pt, dir)?;
    Ok([s.0, s.1, 2.0 * s.2])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::tensor::rank_one_deform;
    use alloc::vec;

    fn along(src: &str, h: [[f64; 2]; 2], v: [f64; 2]) -> [f64; 3] {
        let e = parse(src, 2).unwrap();
        let pt = JetPoint::from_hessian(SymMatrix::from_rows(&h));
        let dir = rank_one_deform(&SymMatrix::zeros(2), &v, 1.0).unwrap();
        line_derivatives(&e, &pt, &dir).unwrap()
    }

    #[test]
    fn determinant_is_affine_along_rank_one_lines() {
        let [f, d1, d2] = along("u11*u22 - u12^2", [[2.0, 1.0], [1.0, 3.0]], [1.0, 0.5]);
        assert_eq!(f, 5.0);
        // ξᵀ adj(H) ξ = 3 − 2·0.5·1 + 2·0.25
        assert!((d1 - 2.5).abs() < 1e-15);
        assert_eq!(d2, 0.0);
    }

    #[test]
    fn square_has_constant_second_derivative() {
        let [_, _, d2] = along("u11^2 - u22", [[1.0, 0.0], [0.0, 1.0]], [1.0, 7.0]);
        assert_eq!(d2, 2.0);
    }

    #[test]
    fn transcendental_matches_finite_differences() {
        let src = "exp(u11)*sin(u12) + log(u22)/sqrt(u11) + tanh(u12*u22) + cos(u11)";
        let h0 = [[0.7, -0.3], [-0.3, 1.4]];
        let v = [0.6, -1.1];
        let [f, d1, d2] = along(src, h0, v);
        let e = parse(src, 2).unwrap();
        let base = SymMatrix::from_rows(&h0);
        let at = |t: f64| {
            let hh = rank_one_deform(&base, &v, t).unwrap();
            e.evaluate(&JetPoint::from_hessian(hh)).unwrap()
        };
        let h = 1e-4;
        assert!((f - at(0.0)).abs() < 1e-14);
        assert!((d1 - (at(h) - at(-h)) / (2.0 * h)).abs() < 1e-7);
        assert!((d2 - (at(h) - 2.0 * at(0.0) + at(-h)) / (h * h)).abs() < 1e-5);
    }

    #[test]
    fn off_line_variables_are_constant() {
        let e = parse("u*u1 + x1", 2).unwrap();
        let pt = JetPoint::new(vec![1.0, 0.0], 2.0, vec![3.0, 0.0], SymMatrix::zeros(2)).unwrap();
        let r = line_derivatives(&e, &pt, &SymMatrix::identity(2)).unwrap();
        assert_eq!(r, [7.0, 0.0, 0.0]);
    }
}
