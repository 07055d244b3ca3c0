//! Critical constants of the branching mechanism, the resolvent root `y(λ)`,
//! the Riccati flow `A' = R(A) + λ` and the (limit) log-MGFs of the
//! integrated process built from it.

use serde::Serialize;

use crate::error::{Error, NumericsError, Result};
use crate::mechanisms::Mechanisms;
use crate::numerics::ode::{self, hermite, OdeConfig, Outcome, Trajectory};
use crate::numerics::quad::{self, QuadConfig};
use crate::numerics::root::{brent, brent_with_values, expand_bracket, RootConfig};
use crate::scalar::{extended, Real};

/// Within this distance of `λ_R` the resolvent root is taken to be `u_c`.
const NEAR_CRITICAL: f64 = 1e-8;

/// How the minimum of `R` on `[0, γ_R]` is attained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MinimumCase {
    /// `R'(u_c) = 0` with `u_c < γ_R`.
    Interior,
    /// `R' < 0` on `[0, γ_R)`, so the minimum sits at `u_c = γ_R`.
    Threshold,
    /// `σ = 0` and `μ = 0`: `R(u) = βu` is linear, `u_c = λ_R = +inf`.
    Linear,
}

/// Numerical settings for the Riccati solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiccatiOptions {
    pub ode: OdeConfig,
    /// Thresholds on `R(K) / K` that fix the three blow-up ceilings `K`
    /// used when `γ_R = +inf`, ascending. The time `A` needs to go from `K`
    /// to infinity is of order `K / R(K)`.
    pub ceilings: [f64; 3],
}

impl Default for RiccatiOptions {
    fn default() -> Self {
        Self {
            ode: OdeConfig::default(),
            ceilings: [1e6, 1e7, 1e8],
        }
    }
}

/// `u_c`, `λ_R`, `λ_F`, `λ_c` and `y_c` for a fixed pair of mechanisms.
#[derive(Debug, Clone)]
pub struct RiccatiProfile<S> {
    mech: Mechanisms<S>,
    u_c: S,
    lambda_r: S,
    lambda_f: S,
    lambda_c: S,
    y_c: S,
    case: MinimumCase,
    /// `(R(γ_R), R'(γ_R))` when `γ_R` is finite, for the extension of the
    /// vector field past the threshold.
    edge: Option<(S, S)>,
    options: RiccatiOptions,
}

/// Locates the minimum of `R` on `[0, γ_R]`: returns `(u_c, λ_R)`.
pub fn find_u_c<S: Real>(mech: &Mechanisms<S>) -> Result<(S, S)> {
    locate_minimum(mech).map(|(u, l, _)| (u, l))
}

fn locate_minimum<S: Real>(mech: &Mechanisms<S>) -> Result<(S, S, MinimumCase)> {
    if !mech.is_nondegenerate() {
        return Err(Error::DegenerateR);
    }
    let gamma_r = mech.gamma_r();
    if gamma_r <= S::zero() {
        return Err(Error::NoExponentialMoments);
    }
    let dr = |u: S| mech.r_eval(u, 1);
    let cfg = RootConfig::default();
    let u_c = if gamma_r.is_finite() {
        let edge_slope = mech.try_r_eval(gamma_r, 1)?;
        if edge_slope <= S::zero() {
            let lambda_r = -mech.try_r_eval(gamma_r, 0)?;
            return Ok((gamma_r, lambda_r, MinimumCase::Threshold));
        }
        // R' increases to a positive (possibly infinite) limit at γ_R;
        // back off until the slope is finite.
        let mut hi = gamma_r;
        let mut d_hi = edge_slope;
        let mut gap = gamma_r;
        while !d_hi.is_finite() {
            gap = gap * S::lit(0.5);
            hi = gamma_r - gap;
            d_hi = dr(hi);
            if gap < gamma_r * S::epsilon() {
                return Err(NumericsError::NotBracketed.into());
            }
        }
        if d_hi <= S::zero() {
            // the sign change sits in (hi, γ_R)
            let mut lo = hi;
            let mut d_lo = d_hi;
            let mut hi2 = gamma_r - gap * S::lit(0.5);
            let mut d_hi2 = dr(hi2);
            while !(d_hi2.is_finite() && d_hi2 > S::zero()) {
                if d_hi2.is_finite() {
                    lo = hi2;
                    d_lo = d_hi2;
                }
                gap = gap * S::lit(0.5);
                hi2 = gamma_r - gap;
                d_hi2 = dr(hi2);
                if gap < gamma_r * S::epsilon() {
                    // R' only turns positive closer to γ_R than a float can
                    // resolve (slow power-law divergence at the threshold)
                    let lambda_r = -mech.try_r_eval(gamma_r, 0)?;
                    return Ok((gamma_r, lambda_r, MinimumCase::Interior));
                }
            }
            brent_with_values(dr, lo, d_lo, hi2, d_hi2, &cfg)?.x
        } else {
            brent_with_values(dr, S::zero(), mech.beta(), hi, d_hi, &cfg)?.x
        }
    } else {
        let (lo, flo, hi, fhi) = expand_bracket(dr, S::zero(), S::one(), 200)?;
        brent_with_values(dr, lo, flo, hi, fhi, &cfg)?.x
    };
    let lambda_r = -mech.try_r_eval(u_c, 0)?;
    Ok((u_c, lambda_r, MinimumCase::Interior))
}

impl<S: Real> RiccatiProfile<S> {
    pub fn new(mech: Mechanisms<S>) -> Result<Self> {
        Self::with_options(mech, RiccatiOptions::default())
    }

    pub fn with_options(mech: Mechanisms<S>, options: RiccatiOptions) -> Result<Self> {
        let (u_c, lambda_r, case) = if mech.is_nondegenerate() {
            locate_minimum(&mech)?
        } else {
            (S::infinity(), S::infinity(), MinimumCase::Linear)
        };
        let gamma_f = mech.gamma_f();
        let lambda_f = if gamma_f >= u_c {
            S::infinity()
        } else {
            -mech.try_r_eval(gamma_f, 0)?
        };
        let gamma_r = mech.gamma_r();
        let edge = if gamma_r.is_finite() {
            Some((mech.try_r_eval(gamma_r, 0)?, mech.try_r_eval(gamma_r, 1)?))
        } else {
            None
        };
        Ok(Self {
            u_c,
            lambda_r,
            lambda_f,
            lambda_c: lambda_f.min(lambda_r),
            y_c: u_c.min(gamma_f),
            case,
            edge,
            options,
            mech,
        })
    }

    pub fn mechanisms(&self) -> &Mechanisms<S> {
        &self.mech
    }

    pub fn u_c(&self) -> S {
        self.u_c
    }

    pub fn lambda_r(&self) -> S {
        self.lambda_r
    }

    pub fn lambda_f(&self) -> S {
        self.lambda_f
    }

    pub fn lambda_c(&self) -> S {
        self.lambda_c
    }

    pub fn y_c(&self) -> S {
        self.y_c
    }

    pub fn case(&self) -> MinimumCase {
        self.case
    }

    pub fn options(&self) -> &RiccatiOptions {
        &self.options
    }

    /// `(λ_F, λ_c)`.
    pub fn critical_lambda(&self) -> (S, S) {
        (self.lambda_f, self.lambda_c)
    }

    /// Smallest solution of `R(y) + λ = 0`.
    pub fn resolvent_root(&self, lambda: S) -> Result<S> {
        if lambda.is_nan() {
            return Err(Error::OutOfDomain {
                lambda: f64::NAN,
                bound: self.lambda_r.to_f64_lossy(),
            });
        }
        if self.case == MinimumCase::Linear {
            return Ok(lambda / -self.mech.beta());
        }
        // λ_R itself carries roundoff from the minimization
        let slack = S::lit(64.0) * S::epsilon() * self.lambda_r.abs().max(S::one());
        if lambda > self.lambda_r + slack {
            return Err(Error::OutOfDomain {
                lambda: lambda.to_f64_lossy(),
                bound: self.lambda_r.to_f64_lossy(),
            });
        }
        if lambda == S::zero() {
            return Ok(S::zero());
        }
        if self.lambda_r - lambda < S::lit(NEAR_CRITICAL) {
            return Ok(self.u_c);
        }
        let g = |y: S| self.mech.r_eval(y, 0) + lambda;
        let cfg = RootConfig::default();
        if lambda > S::zero() {
            return Ok(brent_with_values(g, S::zero(), lambda, self.u_c, lambda - self.lambda_r, &cfg)?.x);
        }
        // R(u) >= |β| |u| on u < 0, so the root lies in [λ/|β|, 0]
        let lo = lambda / -self.mech.beta();
        let g_lo = g(lo);
        if g_lo >= S::zero() {
            return Ok(brent_with_values(g, lo, g_lo, S::zero(), lambda, &cfg)?.x);
        }
        let (lo, glo, hi, ghi) = expand_bracket(g, S::zero(), lo.min(-S::one()), 200)?;
        Ok(brent_with_values(g, lo, glo, hi, ghi, &cfg)?.x)
    }

    /// `y'(λ) = -1 / R'(y(λ))`.
    pub fn resolvent_slope(&self, lambda: S) -> Result<S> {
        let y = self.resolvent_root(lambda)?;
        Ok(-S::one() / self.mech.r_eval(y, 1))
    }

    /// `R` extended past a finite `γ_R` by its tangent there, so the Riccati
    /// flow can be integrated through the threshold.
    fn r_extended(&self, u: S) -> S {
        match self.edge {
            Some((r0, r1)) if u > self.mech.gamma_r() => {
                if r0.is_finite() && r1.is_finite() {
                    r0 + r1 * (u - self.mech.gamma_r())
                } else {
                    S::infinity()
                }
            }
            _ => self.mech.r_eval(u, 0),
        }
    }

    /// A horizon after which `|A(t, λ) - y(λ)|` is below `tol`.
    pub fn suggested_horizon(&self, lambda: S, tol: S) -> Result<S> {
        let y = self.resolvent_root(lambda)?;
        let rate = -self.mech.r_eval(y, 1);
        let scale = y.abs().max(S::lit(1e-3));
        if rate > S::lit(1e-6) {
            Ok((scale / tol).ln().max(S::one()) / rate + S::one())
        } else {
            // double root: A approaches u_c like 2 / (R''(u_c) t)
            let curvature = self.mech.r_eval(y, 2).max(S::lit(1e-12));
            Ok(S::lit(4.0) / (curvature * tol))
        }
    }

    /// Solves `A' = R(A) + λ`, `A(0) = 0`, on `[0, t_end]`; for `λ > λ_R` the
    /// integration continues up to the blow-up time.
    pub fn solve_a(&self, lambda: S, t_end: S) -> Result<RiccatiSolution<S>> {
        if !(t_end > S::zero()) {
            return Err(Error::InvalidParameter {
                name: "t_end",
                reason: format!("must be positive, got {t_end}"),
            });
        }
        let cfg = self.options.ode;
        if lambda <= self.lambda_r {
            let y = self.resolvent_root(lambda)?;
            // The exact flow never crosses the equilibrium y(λ); freezing the
            // field beyond it keeps roundoff from pushing the numerical
            // solution through a double root.
            let field = |_t: S, a: S| {
                let a = if lambda >= S::zero() { a.min(y) } else { a.max(y) };
                self.mech.r_eval(a, 0) + lambda
            };
            let traj = ode::integrate(field, S::zero(), S::zero(), t_end, None, &cfg)?;
            return Ok(RiccatiSolution::from_trajectory(
                lambda,
                traj,
                RiccatiStatus::Global { limit: y },
                cfg.rel_tol,
            ));
        }
        let t_quad = self.explosion_time(lambda)?;
        let horizon = t_end.max(S::lit(2.0) * t_quad + S::one());
        let gamma_r = self.mech.gamma_r();
        let field = |_t: S, a: S| self.r_extended(a) + lambda;
        if gamma_r.is_finite() {
            let traj = ode::integrate(field, S::zero(), S::zero(), horizon, Some(gamma_r), &cfg)?;
            let t_lambda = match traj.outcome {
                Outcome::LevelCrossed { t } => t,
                Outcome::Completed => S::infinity(),
            };
            return Ok(RiccatiSolution::from_trajectory(
                lambda,
                traj,
                RiccatiStatus::Exploding {
                    t_lambda,
                    crossings: None,
                },
                cfg.rel_tol,
            ));
        }
        let [k1, k2, k3] = self.ceiling_levels(lambda);
        let traj = ode::integrate(field, S::zero(), S::zero(), horizon, Some(k3), &cfg)?;
        let t3 = match traj.outcome {
            Outcome::LevelCrossed { t } => t,
            Outcome::Completed => S::infinity(),
        };
        let t1 = first_crossing(&traj, k1).unwrap_or(t3);
        let t2 = first_crossing(&traj, k2).unwrap_or(t3);
        // crossing times behave like T - c K / R(K) for large ceilings K
        let w = |k: S| k / (self.mech.r_eval(k, 0) + lambda);
        let (w2, w3) = (w(k2), w(k3));
        let t_lambda = if t3.is_finite() && t2 < t3 && w2 > w3 {
            (t3 * w2 - t2 * w3) / (w2 - w3)
        } else {
            t3
        };
        Ok(RiccatiSolution::from_trajectory(
            lambda,
            traj,
            RiccatiStatus::Exploding {
                t_lambda,
                crossings: Some([(k1, t1), (k2, t2), (k3, t3)]),
            },
            cfg.rel_tol,
        ))
    }

    /// Levels `K` where `(R(K) + λ) / K` first exceeds each threshold. A
    /// level where `R` overflows is pulled back to the last finite one.
    fn ceiling_levels(&self, lambda: S) -> [S; 3] {
        let grow = S::lit(1.5);
        let mut k = (S::lit(2.0) * self.u_c).max(S::one());
        self.options.ceilings.map(|threshold| {
            loop {
                let next = k * grow;
                let ratio = (self.mech.r_eval(k, 0) + lambda) / k;
                if ratio >= S::lit(threshold) || !(self.mech.r_eval(next, 0).is_finite()) {
                    return k;
                }
                k = next;
            }
        })
    }

    /// `T(λ) = int_0^{γ_R} du / (R(u) + λ)` for `λ > λ_R`.
    pub fn explosion_time(&self, lambda: S) -> Result<S> {
        if !(lambda > self.lambda_r) {
            return Err(Error::OutOfDomain {
                lambda: lambda.to_f64_lossy(),
                bound: self.lambda_r.to_f64_lossy(),
            });
        }
        let cfg = QuadConfig {
            rel_tol: 1e-12,
            ..QuadConfig::default()
        };
        let integrand = |u: S| {
            let r = self.mech.r_eval(u, 0);
            if r.is_pos_inf() {
                S::zero()
            } else {
                S::one() / (r + lambda)
            }
        };
        let gamma_r = self.mech.gamma_r();
        if gamma_r.is_finite() {
            // split at u_c where the integrand peaks
            let mid = self.u_c.min(gamma_r);
            let mut total = quad::integrate(integrand, S::zero(), mid, &cfg)?.value;
            if mid < gamma_r {
                total = total + quad::integrate(integrand, mid, gamma_r, &cfg)?.value;
            }
            return Ok(total);
        }
        let split = (S::lit(2.0) * self.u_c).max(S::one());
        let head = quad::integrate(integrand, S::zero(), split, &cfg)?.value;
        let tail = quad::integrate_algebraic_tail(integrand, split, S::lit(2.0), &cfg)?.value;
        Ok(head + tail)
    }

    /// `log E[exp(λ int_0^t X_s ds)]` for `X_0 = x0`, possibly `+inf`.
    pub fn integrated_log_mgf(&self, x0: S, t: S, lambda: S) -> Result<S> {
        if lambda == S::zero() {
            return Ok(S::zero());
        }
        let sol = self.solve_a(lambda, t)?;
        if let RiccatiStatus::Exploding { t_lambda, .. } = sol.status {
            // at t = T(λ) itself the value is decided by a limit the solver
            // cannot resolve; treat a tolerance band below T(λ) as infinite
            let band = S::lit(1e-8) * t_lambda.max(S::one());
            if t >= t_lambda - band {
                return Ok(S::infinity());
            }
        }
        let a_t = sol.eval(t);
        if a_t > self.mech.gamma_f() {
            return Ok(S::infinity());
        }
        let integral = sol.integrate_along(t, |a| self.mech.f_eval(a, 0));
        Ok(x0 * a_t + integral)
    }

    /// `Λ(λ) = F(y(λ))` for `λ <= λ_c`, `+inf` beyond.
    pub fn limit_mgf(&self, lambda: S) -> Result<S> {
        if lambda > self.lambda_c {
            return Ok(S::infinity());
        }
        if lambda == self.lambda_c {
            return self.mech.try_f_eval(self.y_c, 0);
        }
        let y = self.resolvent_root(lambda)?.min(self.y_c);
        self.mech.try_f_eval(y, 0)
    }

    /// `log E[exp(λ X_t)]` for `λ <= 0` through `v' = R(v)`, `v(0) = λ`.
    pub fn transition_log_laplace(&self, x0: S, t: S, lambda: S) -> Result<S> {
        if lambda > S::zero() {
            return Err(Error::OutOfDomain {
                lambda: lambda.to_f64_lossy(),
                bound: 0.0,
            });
        }
        if lambda == S::zero() {
            return Ok(S::zero());
        }
        let field = |_t: S, v: S| self.mech.r_eval(v.min(S::zero()), 0);
        let traj = ode::integrate(field, S::zero(), lambda, t, None, &self.options.ode)?;
        let sol = RiccatiSolution::from_trajectory(
            lambda,
            traj,
            RiccatiStatus::Global { limit: S::zero() },
            self.options.ode.rel_tol,
        );
        let integral = sol.integrate_along(t, |v| self.mech.f_eval(v, 0));
        Ok(x0 * sol.eval(t) + integral)
    }

    pub fn summary(&self) -> ProfileSummary {
        let f = |x: S| x.to_f64_lossy();
        ProfileSummary {
            u_c: f(self.u_c),
            lambda_r: f(self.lambda_r),
            lambda_f: f(self.lambda_f),
            lambda_c: f(self.lambda_c),
            y_c: f(self.y_c),
            gamma_f: f(self.mech.gamma_f()),
            gamma_r: f(self.mech.gamma_r()),
            case: self.case,
        }
    }
}

fn first_crossing<S: Real>(traj: &Trajectory<S>, level: S) -> Option<S> {
    let i = traj.y.iter().position(|&y| y >= level)?;
    if i == 0 {
        return Some(traj.t[0]);
    }
    let (t0, y0, d0) = (traj.t[i - 1], traj.y[i - 1], traj.dy[i - 1]);
    let (t1, y1, d1) = (traj.t[i], traj.y[i], traj.dy[i]);
    let g = |s: S| hermite(t0, y0, d0, t1, y1, d1, s) - level;
    Some(brent(g, t0, t1, &RootConfig::default()).map_or(t1, |r| r.x))
}

/// JSON-friendly record of a profile; infinities are written as `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfileSummary {
    #[serde(with = "extended")]
    pub u_c: f64,
    #[serde(with = "extended")]
    pub lambda_r: f64,
    #[serde(with = "extended")]
    pub lambda_f: f64,
    #[serde(with = "extended")]
    pub lambda_c: f64,
    #[serde(with = "extended")]
    pub y_c: f64,
    #[serde(with = "extended")]
    pub gamma_f: f64,
    #[serde(with = "extended")]
    pub gamma_r: f64,
    pub case: MinimumCase,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RiccatiStatus<S> {
    /// Global solution converging to `y(λ)`.
    Global { limit: S },
    /// Finite-time blow-up at `t_lambda`. With `γ_R = +inf` the raw
    /// `(ceiling, crossing time)` pairs are kept.
    Exploding {
        t_lambda: S,
        crossings: Option<[(S, S); 3]>,
    },
}

/// Stored solution of the Riccati equation with dense output.
#[derive(Debug, Clone)]
pub struct RiccatiSolution<S> {
    pub lambda: S,
    pub t: Vec<S>,
    pub a: Vec<S>,
    da: Vec<S>,
    pub status: RiccatiStatus<S>,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub rel_tol: f64,
}

// Gauss–Legendre 3-point rule on [0, 1].
const GL_NODES: [f64; 3] = [0.112_701_665_379_258_31, 0.5, 0.887_298_334_620_741_7];
const GL_WEIGHTS: [f64; 3] = [5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0];

impl<S: Real> RiccatiSolution<S> {
    fn from_trajectory(lambda: S, traj: Trajectory<S>, status: RiccatiStatus<S>, rel_tol: f64) -> Self {
        Self {
            lambda,
            t: traj.t,
            a: traj.y,
            da: traj.dy,
            status,
            accepted_steps: traj.accepted,
            rejected_steps: traj.rejected,
            rel_tol,
        }
    }

    pub fn last_t(&self) -> S {
        *self.t.last().expect("solution holds the initial point")
    }

    pub fn last_a(&self) -> S {
        *self.a.last().expect("solution holds the initial point")
    }

    /// Dense-output value at time `s` (clamped to the stored range).
    pub fn eval(&self, s: S) -> S {
        let n = self.t.len();
        if n == 1 || s <= self.t[0] {
            return self.a[0];
        }
        if s >= self.t[n - 1] {
            return self.a[n - 1];
        }
        let i = self.t.partition_point(|&x| x <= s) - 1;
        hermite(self.t[i], self.a[i], self.da[i], self.t[i + 1], self.a[i + 1], self.da[i + 1], s)
    }

    /// `int_0^t g(A(s)) ds`, composite Gauss–Legendre on the solver's own
    /// steps. Returns `+inf` as soon as `g` does.
    pub fn integrate_along<G: FnMut(S) -> S>(&self, t: S, mut g: G) -> S {
        let mut total = S::zero();
        for i in 0..self.t.len().saturating_sub(1) {
            let (t0, t1) = (self.t[i], self.t[i + 1].min(t));
            if t1 <= t0 {
                break;
            }
            let h = t1 - t0;
            let mut piece = S::zero();
            for (x, w) in GL_NODES.iter().zip(GL_WEIGHTS) {
                let s = t0 + S::lit(*x) * h;
                let a = hermite(self.t[i], self.a[i], self.da[i], self.t[i + 1], self.a[i + 1], self.da[i + 1], s);
                let v = g(a);
                if v.is_pos_inf() {
                    return S::infinity();
                }
                piece = piece + S::lit(w) * v;
            }
            total = total + piece * h;
        }
        total
    }

    /// Checks the sign and monotonicity table the exact solution obeys and
    /// returns a description of every violation.
    pub fn invariant_violations(&self, gamma_r: S) -> Vec<String> {
        let mut out = Vec::new();
        let lambda = self.lambda;
        let scale = self.a.iter().fold(S::one(), |m, a| m.max(a.abs()));
        let tol = S::lit(1e-9) * scale;
        let increasing = lambda >= S::zero();
        for (i, (&t, &a)) in self.t.iter().zip(&self.a).enumerate() {
            let ok = match self.status {
                RiccatiStatus::Global { limit } => {
                    if lambda < S::zero() {
                        a >= limit - tol && a <= tol
                    } else if lambda == S::zero() {
                        a == S::zero()
                    } else {
                        a >= -tol && a <= limit + tol
                    }
                }
                RiccatiStatus::Exploding { .. } => a >= -tol && (!gamma_r.is_finite() || a <= gamma_r + tol),
            };
            if !ok {
                out.push(format!("sign table violated at t = {t}: A = {a}"));
            }
            if i > 0 {
                let prev = self.a[i - 1];
                let mono = if increasing { a >= prev - tol } else { a <= prev + tol };
                if !mono {
                    out.push(format!("monotonicity violated at t = {t}: {prev} -> {a}"));
                }
            }
        }
        out
    }

    /// Two-column CSV `t,A`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,A\n");
        for (t, a) in self.t.iter().zip(&self.a) {
            s.push_str(&format!("{t},{a}\n"));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy::LevyMeasure;
    use crate::mechanisms::ModelParams;
    use approx::assert_relative_eq;

    fn cir(b: f64, beta: f64, sigma2: f64) -> RiccatiProfile<f64> {
        RiccatiProfile::new(Mechanisms::diffusion(b, beta, sigma2.sqrt()).unwrap()).unwrap()
    }

    fn cir_y(beta: f64, sigma2: f64, lambda: f64) -> f64 {
        let sigma = sigma2.sqrt();
        beta.abs() / sigma2 - (beta * beta / sigma2 - 2.0 * lambda).sqrt() / sigma
    }

    #[test]
    fn minimum_unresolvably_close_to_threshold() {
        // with η just below 2 and a tiny amplitude, R' < 0 at every float below γ_R
        let mech = Mechanisms::new(ModelParams {
            b: 1.16,
            beta: -1.556,
            sigma: 0.439,
            nu: LevyMeasure::point_mass(0.086, 0.7),
            mu: LevyMeasure::tempered_power_law(0.00357, 1.5, 1.9606416964084818, 0.0),
        })
        .unwrap();
        let p = RiccatiProfile::new(mech).unwrap();
        assert_eq!(p.case(), MinimumCase::Interior);
        assert_eq!(p.u_c(), 1.5);
        assert_relative_eq!(p.lambda_r(), -p.mechanisms().r_eval(1.5, 0), max_relative = 1e-14);
        assert!(p.resolvent_root(p.lambda_r()).unwrap() <= 1.5);
    }

    #[test]
    fn cir_critical_constants() {
        let p = cir(1.0, -1.0, 2.0);
        assert_relative_eq!(p.u_c(), 0.5, max_relative = 1e-12);
        assert_relative_eq!(p.lambda_r(), 0.25, max_relative = 1e-12);
        assert_eq!(p.case(), MinimumCase::Interior);
        let p = cir(1.0, -2.0, 2.0);
        assert_relative_eq!(p.u_c(), 1.0, max_relative = 1e-12);
        assert_relative_eq!(p.lambda_r(), 1.0, max_relative = 1e-12);
        assert!(p.lambda_f().is_pos_inf());
        assert_eq!(p.lambda_c(), p.lambda_r());
    }

    #[test]
    fn resolvent_matches_cir_formula() {
        let p = cir(1.0, -1.0, 2.0);
        assert_eq!(p.resolvent_root(0.0).unwrap(), 0.0);
        assert_relative_eq!(p.resolvent_root(0.25).unwrap(), 0.5, max_relative = 1e-12);
        assert_relative_eq!(p.resolvent_root(-4.0).unwrap(), cir_y(-1.0, 2.0, -4.0), max_relative = 1e-12);
        for &l in &[-30.0, -1.0, -1e-3, 1e-3, 0.1, 0.2499] {
            assert_relative_eq!(p.resolvent_root(l).unwrap(), cir_y(-1.0, 2.0, l), max_relative = 1e-10);
        }
        assert!(matches!(p.resolvent_root(0.3), Err(Error::OutOfDomain { .. })));
    }

    #[test]
    fn resolvent_slope_identity() {
        let p = cir(1.0, -1.0, 2.0);
        for &l in &[-2.0, 0.0, 0.1, 0.2] {
            let h = 1e-6;
            let fd = (p.resolvent_root(l + h).unwrap() - p.resolvent_root(l - h).unwrap()) / (2.0 * h);
            let y = p.resolvent_root(l).unwrap();
            assert!((fd * p.mechanisms().r_eval(y, 1) + 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn immigration_threshold_limits_lambda_c() {
        let mech = Mechanisms::<f64>::new(ModelParams {
            b: 1.0,
            beta: -1.0,
            sigma: 2f64.sqrt(),
            nu: LevyMeasure::tempered_power_law(1.0, 0.25, 1.5, 1.0),
            mu: LevyMeasure::Zero,
        })
        .unwrap();
        let p = RiccatiProfile::new(mech).unwrap();
        assert_relative_eq!(p.lambda_c(), 0.1875, max_relative = 1e-12);
        assert_eq!(p.y_c(), 0.25);
    }

    #[test]
    fn pure_jump_ou_is_linear() {
        let mech = Mechanisms::<f64>::new(ModelParams {
            b: 0.5,
            beta: -2.0,
            sigma: 0.0,
            nu: LevyMeasure::tempered_power_law(1.0, 1.0, 1.5, 1.0),
            mu: LevyMeasure::Zero,
        })
        .unwrap();
        assert_eq!(find_u_c(&mech), Err(Error::DegenerateR));
        let p = RiccatiProfile::new(mech).unwrap();
        assert_eq!(p.case(), MinimumCase::Linear);
        assert_relative_eq!(p.lambda_c(), 2.0);
        assert_eq!(p.resolvent_root(1.2).unwrap(), 0.6);
        let sol = p.solve_a(1.0, 20.0).unwrap();
        assert!((sol.last_a() - 0.5).abs() < 1e-9);
    }

    #[test]
    fn riccati_converges_to_resolvent_root() {
        let p = cir(1.0, -1.0, 2.0);
        let sol = p.solve_a(0.2, 50.0).unwrap();
        let y = p.resolvent_root(0.2).unwrap();
        assert!((sol.last_a() - y).abs() < 1e-6);
        assert!(sol.invariant_violations(f64::INFINITY).is_empty());
        let zero = p.solve_a(0.0, 5.0).unwrap();
        assert!(zero.a.iter().all(|&a| a == 0.0));
        let neg = p.solve_a(-3.0, 30.0).unwrap();
        assert!((neg.last_a() - p.resolvent_root(-3.0).unwrap()).abs() < 1e-8);
        assert!(neg.invariant_violations(f64::INFINITY).is_empty());
    }

    #[test]
    fn separation_of_variables() {
        let p = cir(1.0, -1.0, 2.0);
        let lambda = 0.15;
        let sol = p.solve_a(lambda, 10.0).unwrap();
        for &t in &[0.5, 1.0, 2.0, 4.0, 8.0] {
            let a = sol.eval(t);
            let h = quad::integrate(|u: f64| 1.0 / (u * u - u + lambda), 0.0, a, &QuadConfig::default())
                .unwrap()
                .value;
            assert!((h - t).abs() < 1e-6, "t = {t}, H = {h}");
        }
    }

    fn cir_explosion(beta: f64, sigma2: f64, lambda: f64) -> f64 {
        // int_0^inf du / (a u^2 + beta u + lambda), negative discriminant
        let a = sigma2 / 2.0;
        let w = (4.0 * a * lambda - beta * beta).sqrt();
        2.0 / w * (std::f64::consts::FRAC_PI_2 - (beta / w).atan())
    }

    #[test]
    fn cir_explosion_time_closed_form() {
        let p = cir(1.0, -1.0, 2.0);
        for &l in &[0.26, 0.5, 2.0] {
            assert_relative_eq!(p.explosion_time(l).unwrap(), cir_explosion(-1.0, 2.0, l), max_relative = 1e-8);
        }
        assert!(p.explosion_time(0.25).is_err());
    }

    #[test]
    fn ode_blow_up_matches_quadrature() {
        let p = cir(1.0, -1.0, 2.0);
        let sol = p.solve_a(0.5, 1.0).unwrap();
        let RiccatiStatus::Exploding { t_lambda, .. } = sol.status else {
            panic!("expected blow-up");
        };
        assert_relative_eq!(t_lambda, p.explosion_time(0.5).unwrap(), max_relative = 1e-4);
    }

    #[test]
    fn explosion_time_monotone_in_lambda() {
        let p = cir(1.0, -1.0, 2.0);
        let ts: Vec<f64> = [0.251, 0.26, 0.3, 0.5, 1.0].iter().map(|&l| p.explosion_time(l).unwrap()).collect();
        assert!(ts.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn tempered_stable_branching_has_finite_explosion() {
        let mech = Mechanisms::<f64>::new(ModelParams {
            b: 1.0,
            beta: -1.0,
            sigma: 0.0,
            nu: LevyMeasure::Zero,
            mu: LevyMeasure::tempered_power_law(1.0, 1.0, 2.5, 0.0),
        })
        .unwrap();
        let p = RiccatiProfile::new(mech).unwrap();
        let lambda = p.lambda_r() + 0.5;
        let t = p.explosion_time(lambda).unwrap();
        assert!(t.is_finite() && t <= 1.0 / 0.5);
        let sol = p.solve_a(lambda, 1.0).unwrap();
        let RiccatiStatus::Exploding { t_lambda, .. } = sol.status else {
            panic!("expected blow-up");
        };
        assert_relative_eq!(t_lambda, t, max_relative = 1e-4);
    }

    #[test]
    fn log_mgf_basic_properties() {
        let p = cir(1.0, -1.0, 2.0);
        assert_eq!(p.integrated_log_mgf(1.0, 2.0, 0.0).unwrap(), 0.0);
        let v = p.integrated_log_mgf(1.0, 2.0, -0.5).unwrap();
        assert!(v < 0.0 && v.is_finite());
        let t_exp = p.explosion_time(0.5).unwrap();
        assert!(p.integrated_log_mgf(1.0, t_exp + 0.1, 0.5).unwrap().is_pos_inf());
        assert!(p.integrated_log_mgf(1.0, 0.5 * t_exp, 0.5).unwrap().is_finite());
        assert_eq!(p.limit_mgf(0.0).unwrap(), 0.0);
        assert!(p.limit_mgf(0.3).unwrap().is_pos_inf());
    }

    #[test]
    fn log_mgf_grows_like_limit() {
        // (1/t) log E exp(λ int X) -> Λ(λ)
        let p = cir(1.0, -1.0, 2.0);
        let lambda = 0.2;
        let t = 400.0;
        let v = p.integrated_log_mgf(0.5, t, lambda).unwrap() / t;
        assert_relative_eq!(v, p.limit_mgf(lambda).unwrap(), max_relative = 1e-2);
    }

    #[test]
    fn cir_log_laplace_closed_form() {
        // CIR with beta=-1, sigma^2=2: v' = v^2 - v solves to v = λ e^{-t} / (1 - λ + λ e^{-t})
        let p = cir(1.0, -1.0, 2.0);
        let (lambda, t, x0): (f64, f64, f64) = (-1.0, 1.0, 1.0);
        let e = (-t).exp();
        let v = lambda * e / (1.0 - lambda + lambda * e);
        // int_0^t F(v) = b int v ds = -ln(1 - λ + λ e^{-t}) for b = 1
        let int_f = -(1.0 - lambda + lambda * e).ln();
        let expect = x0 * v + int_f;
        assert_relative_eq!(p.transition_log_laplace(x0, t, lambda).unwrap(), expect, max_relative = 1e-8);
        assert_eq!(p.transition_log_laplace(x0, t, 0.0).unwrap(), 0.0);
        assert!(p.transition_log_laplace(x0, t, 0.1).is_err());
    }

    #[test]
    fn limit_at_lambda_c_uses_boundary_test() {
        let mech = Mechanisms::<f64>::new(ModelParams {
            b: 0.5,
            beta: -1.0,
            sigma: 0.0,
            nu: LevyMeasure::tempered_power_law(1.0, 1.0, 1.5, 1.0),
            mu: LevyMeasure::Zero,
        })
        .unwrap();
        let p = RiccatiProfile::new(mech).unwrap();
        // at y_c = γ_F the tail behaves like int_1^inf z^{-1.5} dz < inf
        let v = p.limit_mgf(p.lambda_c()).unwrap();
        assert!(v.is_finite());
        assert!(p.limit_mgf(p.lambda_c() * 1.0001).unwrap().is_pos_inf());
    }

    #[test]
    fn summary_serializes_infinity() {
        let p = cir(1.0, -1.0, 2.0);
        let js = serde_json::to_string(&p.summary()).unwrap();
        assert!(js.contains("\"lambda_f\":\"inf\""));
    }

    #[test]
    fn single_precision_profile() {
        let m: Mechanisms<f32> = Mechanisms::diffusion(1.0, -1.0, 2f32.sqrt()).unwrap();
        let p = RiccatiProfile::new(m).unwrap();
        assert!((p.u_c() - 0.5).abs() < 1e-5);
        assert!((p.lambda_r() - 0.25).abs() < 1e-5);
    }
}
