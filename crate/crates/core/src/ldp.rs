//! Rate function of the time averages, the slope bound `α`, the steepness
//! verdict and the resulting large-deviation regime.
//!
//! The rate function is evaluated in the `y` variable:
//! `Λ*(x) = sup_{y <= y_c} ψ_x(y)` with `ψ_x(y) = -R(y) x - F(y)`, which is
//! strictly concave, so one bracketed root-find of `ψ_x'` per point suffices.

use serde::Serialize;

use crate::error::{Error, NumericsError, Result};
use crate::numerics::root::{brent_with_values, expand_bracket, RootConfig};
use crate::riccati::{MinimumCase, RiccatiProfile};
use crate::scalar::{extended, Real};

/// Which statement about the time averages applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Regime {
    /// Steep limit log-MGF: matching upper and lower bounds.
    #[serde(rename = "FullLDP")]
    FullLdp,
    /// Lower bound only on `(0, α)`.
    #[serde(rename = "BoundedLowerLDP")]
    BoundedLowerLdp,
    /// `F ≡ 0`: `Λ*(x) = λ_c x`, upper bound only.
    #[serde(rename = "DegenerateF0")]
    DegenerateF0,
}

/// One evaluation of the rate function with its maximizer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatePoint<S> {
    pub x: S,
    /// Maximizer of `ψ_x`, `-inf` when the supremum escapes to the left.
    pub y_star: S,
    /// `λ*(x) = -R(y*)`, the exposed slope.
    pub lambda_star: S,
    pub rate: S,
    /// `x >= α` without steepness: only the upper bound is established.
    pub upper_bound_only: bool,
}

#[derive(Debug, Clone)]
pub struct RateFunction<S> {
    profile: RiccatiProfile<S>,
    mean: S,
    alpha: Option<S>,
    steep: bool,
    regime: Regime,
    slope_sequence: Vec<(S, S)>,
}

/// Slopes `g(λ)` this large count as divergent.
const DIVERGENCE: f64 = 1e10;

impl<S: Real> RateFunction<S> {
    pub fn new(profile: RiccatiProfile<S>) -> Result<Self> {
        let mech = profile.mechanisms();
        let mean = mech.stationary_mean();
        if mech.is_f_zero() {
            return Ok(Self {
                profile,
                mean,
                alpha: None,
                steep: false,
                regime: Regime::DegenerateF0,
                slope_sequence: Vec::new(),
            });
        }
        let (alpha, steep, slope_sequence) = slope_limit(&profile)?;
        let regime = if steep { Regime::FullLdp } else { Regime::BoundedLowerLdp };
        Ok(Self {
            profile,
            mean,
            alpha: Some(alpha),
            steep,
            regime,
            slope_sequence,
        })
    }

    pub fn profile(&self) -> &RiccatiProfile<S> {
        &self.profile
    }

    pub fn mean(&self) -> S {
        self.mean
    }

    /// `α = lim_{λ↑λ_c} -F'(y(λ)) / R'(y(λ))`; `None` when `F ≡ 0`.
    pub fn alpha(&self) -> Option<S> {
        self.alpha
    }

    pub fn steepness(&self) -> bool {
        self.steep
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    /// `(λ_c - 10^{-k}, g)` for `k = 2..=10`, the numerical approach to `α`.
    pub fn slope_sequence(&self) -> &[(S, S)] {
        &self.slope_sequence
    }

    /// `ψ_x(y) = -R(y) x - F(y)`.
    pub fn psi(&self, x: S, y: S) -> S {
        let mech = self.profile.mechanisms();
        let f = mech.f_eval(y, 0);
        if f.is_pos_inf() {
            return S::neg_infinity();
        }
        -mech.r_eval(y, 0) * x - f
    }

    fn psi_slope(&self, x: S, y: S) -> S {
        let mech = self.profile.mechanisms();
        -mech.r_eval(y, 1) * x - mech.f_eval(y, 1)
    }

    pub fn rate_function(&self, x: S) -> Result<S> {
        Ok(self.evaluate(x)?.rate)
    }

    /// Rate, maximizer and exposed slope at `x >= 0`.
    pub fn evaluate(&self, x: S) -> Result<RatePoint<S>> {
        if !(x >= S::zero()) {
            return Err(Error::InvalidParameter {
                name: "x",
                reason: format!("rate function is defined on [0, inf), got {x}"),
            });
        }
        let lambda_c = self.profile.lambda_c();
        let y_c = self.profile.y_c();
        if self.regime == Regime::DegenerateF0 {
            let rate = if x == S::zero() { S::zero() } else { lambda_c * x };
            return Ok(self.point(x, y_c, lambda_c, rate));
        }
        let mech = self.profile.mechanisms();
        if x == S::zero() {
            // ψ_0 = -F is decreasing; the supremum is F's limit at -inf
            let rate = if mech.b() > S::zero() {
                S::infinity()
            } else {
                mech.nu().truncated_moment(0, S::zero(), S::infinity())
            };
            return Ok(self.point(x, S::neg_infinity(), S::neg_infinity(), rate));
        }
        let h = |y: S| self.psi_slope(x, y);
        let h0 = h(S::zero());
        let cfg = RootConfig::default();
        let y_star = if h0 == S::zero() {
            S::zero()
        } else if h0 > S::zero() {
            if y_c.is_infinite() {
                let (lo, flo, hi, fhi) = expand_bracket(h, S::zero(), S::one(), 200)?;
                brent_with_values(h, lo, flo, hi, fhi, &cfg)?.x
            } else {
                match self.right_bracket(x, y_c)? {
                    RightEnd::Boundary(y) => y,
                    RightEnd::Bracket(hi, h_hi) => brent_with_values(h, S::zero(), h0, hi, h_hi, &cfg)?.x,
                }
            }
        } else {
            match expand_bracket(h, S::zero(), -S::one(), 200) {
                Ok((lo, flo, hi, fhi)) => brent_with_values(h, lo, flo, hi, fhi, &cfg)?.x,
                // no stationary point: ψ_x increases without bound to the left
                Err(NumericsError::NotBracketed) => {
                    return Ok(self.point(x, S::neg_infinity(), S::neg_infinity(), S::infinity()));
                }
                Err(e) => return Err(e.into()),
            }
        };
        let lambda_star = -mech.r_eval(y_star, 0);
        Ok(self.point(x, y_star, lambda_star, self.psi(x, y_star)))
    }

    fn point(&self, x: S, y_star: S, lambda_star: S, rate: S) -> RatePoint<S> {
        let upper_bound_only = match self.alpha {
            Some(alpha) => !self.steep && x >= alpha,
            None => x > S::zero(),
        };
        RatePoint {
            x,
            y_star,
            lambda_star,
            rate,
            upper_bound_only,
        }
    }

    /// Right end of the search interval for `x > m`: either a point with
    /// `ψ_x' < 0` or the boundary `y_c` itself (when `ψ_x` still increases
    /// there, or the stationary point is within roundoff of it).
    fn right_bracket(&self, x: S, y_c: S) -> Result<RightEnd<S>> {
        let h_c = self.psi_slope(x, y_c);
        if h_c.is_finite() {
            return Ok(if h_c >= S::zero() {
                RightEnd::Boundary(y_c)
            } else {
                RightEnd::Bracket(y_c, h_c)
            });
        }
        let mut gap = y_c * S::lit(0.5);
        let mut last_nonneg = S::zero();
        for _ in 0..200 {
            let y = y_c - gap;
            if y <= last_nonneg {
                break;
            }
            let h = self.psi_slope(x, y);
            if h.is_finite() && h < S::zero() {
                return Ok(RightEnd::Bracket(y, h));
            }
            if h.is_finite() {
                last_nonneg = y;
            }
            gap = gap * S::lit(0.5);
        }
        // limit along y_c - 10^{-k}
        Ok(RightEnd::Boundary(last_nonneg))
    }

    /// `(lower, upper)` exponents for `[a1, a2]`.
    pub fn ldp_bounds(&self, a1: S, a2: S) -> Result<(S, S)> {
        if !(a1 < a2) || a1 < S::zero() {
            return Err(Error::InvalidParameter {
                name: "interval",
                reason: format!("need 0 <= a1 < a2, got [{a1}, {a2}]"),
            });
        }
        let m = self.mean;
        let inf_over = |lo: S, hi: S| -> Result<S> {
            if m >= lo && m <= hi {
                Ok(S::zero())
            } else if m < lo {
                self.rate_function(lo)
            } else {
                self.rate_function(hi)
            }
        };
        let upper = -inf_over(a1, a2)?;
        if self.regime == Regime::DegenerateF0 {
            return Ok((S::neg_infinity(), upper));
        }
        let alpha = self.alpha.unwrap_or(S::infinity());
        let hi = if self.steep { a2 } else { a2.min(alpha) };
        let lo = a1.max(S::zero());
        if !(lo < hi) {
            return Err(Error::EmptyEffectiveInterval);
        }
        let lower = -inf_over(lo, hi)?;
        Ok((lower, upper))
    }

    /// Table on `[0, max(4m, m + 10ρ)]`, refined geometrically towards `m`.
    pub fn table(&self, points_per_side: usize) -> Result<Vec<RatePoint<S>>> {
        let m = self.mean;
        let rho = self
            .profile
            .mechanisms()
            .clt_variance()
            .map(|v| v.sqrt())
            .unwrap_or(S::zero());
        let mut top = (S::lit(4.0) * m).max(m + S::lit(10.0) * rho);
        if top <= S::zero() {
            top = S::one();
        }
        let n = points_per_side.max(2);
        let mut xs = vec![S::zero(), m, top];
        for i in 0..n {
            // fractions 1e-4 .. 1 geometrically
            let q = S::lit(10f64.powf(-4.0 + 4.0 * i as f64 / (n - 1) as f64));
            if m > S::zero() {
                xs.push(m - m * q);
            }
            xs.push(m + (top - m) * q);
        }
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        xs.dedup();
        xs.into_iter().map(|x| self.evaluate(x)).collect()
    }

    /// Finite-difference `Λ*''(m)` next to the CLT prediction `1/ρ²`.
    pub fn curvature_at_mean(&self) -> Result<(S, S)> {
        let m = self.mean;
        let var = self.profile.mechanisms().clt_variance()?;
        let h = S::lit(1e-3) * m.max(var.sqrt()).max(S::lit(1e-3));
        let c = (self.rate_function(m + h)? - S::lit(2.0) * self.rate_function(m)? + self.rate_function(m - h)?) / (h * h);
        Ok((c, S::one() / var))
    }

    pub fn summary(&self) -> RateSummary {
        let f = |x: S| x.to_f64_lossy();
        RateSummary {
            m: f(self.mean),
            alpha: self.alpha.map_or(f64::NAN, f),
            lambda_c: f(self.profile.lambda_c()),
            steep: self.steep,
            regime: self.regime,
        }
    }
}

enum RightEnd<S> {
    Boundary(S),
    Bracket(S, S),
}

/// `α`, the steepness verdict, and the numerical slope sequence.
fn slope_limit<S: Real>(profile: &RiccatiProfile<S>) -> Result<(S, bool, Vec<(S, S)>)> {
    let mech = profile.mechanisms();
    let lambda_c = profile.lambda_c();
    let y_c = profile.y_c();
    if lambda_c.is_infinite() {
        // no finite boundary: the condition holds vacuously; g grows with F'
        let alpha = if mech.nu().is_zero() {
            mech.stationary_mean()
        } else {
            S::infinity()
        };
        return Ok((alpha, true, Vec::new()));
    }
    let slope = |y: S| {
        let f1 = mech.f_eval(y, 1);
        let r1 = mech.r_eval(y, 1);
        if r1 >= S::zero() {
            if f1 > S::zero() {
                S::infinity()
            } else {
                S::zero()
            }
        } else {
            f1 / -r1
        }
    };
    let mut sequence = Vec::new();
    for k in 2..=10 {
        let lambda = lambda_c - S::lit(10f64.powi(-k));
        if let Ok(y) = profile.resolvent_root(lambda) {
            sequence.push((lambda, slope(y.min(y_c))));
        }
    }
    let interior_minimum = profile.case() == MinimumCase::Interior && lambda_c == profile.lambda_r();
    let f1_edge = mech.f_eval(y_c, 1);
    // (i) the exposed boundary is the interior minimum of R
    if interior_minimum && f1_edge > S::zero() {
        return Ok((S::infinity(), true, sequence));
    }
    // (ii) the boundary is γ_F and int z e^{γ_F z} nu(dz) diverges
    if y_c == mech.gamma_f() && f1_edge.is_pos_inf() {
        return Ok((S::infinity(), true, sequence));
    }
    // (iii) otherwise the slope converges to its boundary value, unless the
    // numerical sequence says it blows up
    let edge = slope(y_c);
    let diverged = edge.is_pos_inf() || sequence.iter().any(|&(_, g)| g > S::lit(DIVERGENCE));
    if diverged {
        return Ok((S::infinity(), true, sequence));
    }
    Ok((edge, false, sequence))
}

/// JSON record `{m, alpha, lambda_c, steep, regime}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateSummary {
    #[serde(with = "extended")]
    pub m: f64,
    #[serde(with = "extended")]
    pub alpha: f64,
    #[serde(with = "extended")]
    pub lambda_c: f64,
    pub steep: bool,
    pub regime: Regime,
}
