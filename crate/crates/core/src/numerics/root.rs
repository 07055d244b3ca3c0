//! Bracketed scalar root finding (Brent's hybrid of bisection, secant and
//! inverse quadratic interpolation). No derivatives are evaluated.

use crate::error::NumericsError;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootConfig {
    /// Absolute tolerance on the abscissa (a relative `4 eps |x|` is always added).
    pub x_tol: f64,
    /// Stop as soon as `|f(x)| <= f_tol`.
    pub f_tol: f64,
    pub max_iter: usize,
}

impl Default for RootConfig {
    fn default() -> Self {
        Self {
            x_tol: 1e-15,
            f_tol: 0.0,
            max_iter: 200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root<S> {
    pub x: S,
    pub fx: S,
    pub iterations: usize,
}

/// Finds a zero of `f` in `[a, b]`. `f(a)` and `f(b)` must differ in sign
/// (or one of them vanish).
pub fn brent<S: Real, F: FnMut(S) -> S>(
    mut f: F,
    a: S,
    b: S,
    cfg: &RootConfig,
) -> Result<Root<S>, NumericsError> {
    let fa = f(a);
    let fb = f(b);
    brent_with_values(f, a, fa, b, fb, cfg)
}

/// As [`brent`], reusing already known endpoint values.
pub fn brent_with_values<S: Real, F: FnMut(S) -> S>(
    mut f: F,
    mut a: S,
    mut fa: S,
    mut b: S,
    mut fb: S,
    cfg: &RootConfig,
) -> Result<Root<S>, NumericsError> {
    let zero = S::zero();
    let two = S::lit(2.0);
    let f_tol = S::lit(cfg.f_tol);
    if fa.is_nan() || fb.is_nan() {
        return Err(NumericsError::NotBracketed);
    }
    if fa == zero {
        return Ok(Root { x: a, fx: fa, iterations: 0 });
    }
    if fb == zero {
        return Ok(Root { x: b, fx: fb, iterations: 0 });
    }
    if (fa > zero) == (fb > zero) {
        return Err(NumericsError::NotBracketed);
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for iter in 1..=cfg.max_iter {
        if (fb > zero) == (fc > zero) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = two * S::epsilon() * b.abs() + S::lit(0.5) * S::lit(cfg.x_tol);
        let m = S::lit(0.5) * (c - b);
        if m.abs() <= tol || fb == zero || fb.abs() <= f_tol {
            return Ok(Root { x: b, fx: fb, iterations: iter });
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = two * m * s;
                q = S::one() - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (two * m * qa * (qa - r) - (b - a) * (r - S::one()));
                q = (qa - S::one()) * (r - S::one()) * (s - S::one());
            }
            if p > zero {
                q = -q;
            } else {
                p = -p;
            }
            let bound1 = S::lit(3.0) * m * q - (tol * q).abs();
            let bound2 = (e * q).abs();
            if two * p < bound1.min(bound2) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b = if d.abs() > tol {
            b + d
        } else if m > zero {
            b + tol
        } else {
            b - tol
        };
        fb = f(b);
        if fb.is_nan() {
            return Err(NumericsError::NoConvergence { iterations: iter });
        }
    }
    Err(NumericsError::NoConvergence { iterations: cfg.max_iter })
}

/// Expands `[lo, hi]` geometrically away from `anchor` until `f` changes sign.
/// Returns the bracket and the function values at its ends.
pub fn expand_bracket<S: Real, F: FnMut(S) -> S>(
    mut f: F,
    anchor: S,
    initial_step: S,
    max_doublings: usize,
) -> Result<(S, S, S, S), NumericsError> {
    let f_anchor = f(anchor);
    let mut step = initial_step;
    for _ in 0..max_doublings {
        let x = anchor + step;
        let fx = f(x);
        if fx.is_nan() {
            return Err(NumericsError::NotBracketed);
        }
        if (fx > S::zero()) != (f_anchor > S::zero()) || fx == S::zero() {
            return if x < anchor {
                Ok((x, fx, anchor, f_anchor))
            } else {
                Ok((anchor, f_anchor, x, fx))
            };
        }
        step = step * S::lit(2.0);
    }
    Err(NumericsError::NotBracketed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn finds_sqrt_two() {
        let r = brent(|x: f64| x * x - 2.0, 0.0, 2.0, &RootConfig::default()).unwrap();
        assert_relative_eq!(r.x, 2f64.sqrt(), max_relative = 1e-14);
        assert!(r.iterations < 20);
    }

    #[test]
    fn double_root_edge_is_still_located_by_sign_change() {
        // f changes sign only through the cubic factor
        let r = brent(|x: f64| (x - 1.0).powi(3), 0.0, 3.0, &RootConfig::default()).unwrap();
        assert!((r.x - 1.0).abs() < 1e-5);
    }

    #[test]
    fn rejects_unbracketed() {
        let r = brent(|x: f64| x * x + 1.0, -1.0, 1.0, &RootConfig::default());
        assert_eq!(r, Err(NumericsError::NotBracketed));
    }

    #[test]
    fn bracket_expansion_to_the_left() {
        let (lo, flo, hi, fhi) = expand_bracket(|x: f64| x + 37.0, 0.0, -1.0, 60).unwrap();
        assert!(lo <= -37.0 && hi == 0.0);
        assert!(flo <= 0.0 && fhi > 0.0);
    }

    #[test]
    fn works_in_single_precision() {
        let r = brent(|x: f32| x.cos() - x, 0.0, 1.0, &RootConfig { x_tol: 1e-6, ..RootConfig::default() }).unwrap();
        assert!((r.x - 0.739_085_1).abs() < 1e-5);
    }
}
