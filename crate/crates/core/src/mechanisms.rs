//! The immigration mechanism `F` and branching mechanism `R` of a CBI
//! process, their first two derivatives and the constants derived from them.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::levy::{Integrand, LevyMeasure, Role};
use crate::scalar::Real;

/// Raw model parameters as they appear in configuration files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "S: Deserialize<'de> + Default"))]
pub struct ModelParams<S> {
    /// Immigration drift `b >= 0`.
    pub b: S,
    /// Branching drift, must be negative.
    pub beta: S,
    /// Diffusion coefficient `sigma >= 0` (the variance rate is `sigma^2`).
    #[serde(default)]
    pub sigma: S,
    #[serde(default)]
    pub nu: LevyMeasure<S>,
    #[serde(default)]
    pub mu: LevyMeasure<S>,
}

/// Validated pair `(F, R)`.
///
/// ```text
/// F(u) = b u + int (e^{uz} - 1) nu(dz)
/// R(u) = beta u + sigma^2 u^2 / 2 + int (e^{uz} - 1 - uz) mu(dz)
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "ModelParams<S>",
    into = "ModelParams<S>",
    bound(
        serialize = "S: Real + Serialize",
        deserialize = "S: Real + Deserialize<'de> + Default"
    )
)]
pub struct Mechanisms<S> {
    params: ModelParams<S>,
    gamma_f: S,
    gamma_r: S,
    nondegenerate: bool,
}

impl<S: Real> TryFrom<ModelParams<S>> for Mechanisms<S> {
    type Error = Error;

    fn try_from(params: ModelParams<S>) -> Result<Self> {
        Self::new(params)
    }
}

impl<S: Real> From<Mechanisms<S>> for ModelParams<S> {
    fn from(m: Mechanisms<S>) -> Self {
        m.params
    }
}

impl<S: Real> Mechanisms<S> {
    pub fn new(params: ModelParams<S>) -> Result<Self> {
        let ModelParams {
            b,
            beta,
            sigma,
            ref nu,
            ref mu,
        } = params;
        if !(beta < S::zero() && beta.is_finite()) {
            return Err(Error::NotSubcritical(beta.to_f64_lossy()));
        }
        if !(b >= S::zero() && b.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "b",
                reason: format!("must be nonnegative and finite, got {b}"),
            });
        }
        if !(sigma >= S::zero() && sigma.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "sigma",
                reason: format!("must be nonnegative and finite, got {sigma}"),
            });
        }
        nu.validate(Role::Immigration)?;
        mu.validate(Role::Branching)?;
        let gamma_f = nu.exp_threshold();
        let gamma_r = mu.exp_threshold();
        let nondegenerate = sigma > S::zero() || !mu.is_zero();
        Ok(Self {
            params,
            gamma_f,
            gamma_r,
            nondegenerate,
        })
    }

    /// Shorthand for a model without jumps.
    pub fn diffusion(b: S, beta: S, sigma: S) -> Result<Self> {
        Self::new(ModelParams {
            b,
            beta,
            sigma,
            nu: LevyMeasure::Zero,
            mu: LevyMeasure::Zero,
        })
    }

    pub fn params(&self) -> &ModelParams<S> {
        &self.params
    }

    pub fn b(&self) -> S {
        self.params.b
    }

    pub fn beta(&self) -> S {
        self.params.beta
    }

    pub fn sigma(&self) -> S {
        self.params.sigma
    }

    pub fn nu(&self) -> &LevyMeasure<S> {
        &self.params.nu
    }

    pub fn mu(&self) -> &LevyMeasure<S> {
        &self.params.mu
    }

    pub fn gamma_f(&self) -> S {
        self.gamma_f
    }

    pub fn gamma_r(&self) -> S {
        self.gamma_r
    }

    /// `sigma^2 + int z^2 mu(dz) > 0`, i.e. `R` is strictly convex.
    pub fn is_nondegenerate(&self) -> bool {
        self.nondegenerate
    }

    /// `F` vanishes identically (`b = 0` and `nu = 0`).
    pub fn is_f_zero(&self) -> bool {
        self.params.b == S::zero() && self.params.nu.is_zero()
    }

    /// `F`, `F'` or `F''` at `u`; `+inf` beyond the exponential-moment
    /// threshold. A quadrature failure surfaces as NaN, use
    /// [`Self::try_f_eval`] to see the error.
    pub fn f_eval(&self, u: S, order: u8) -> S {
        self.try_f_eval(u, order).unwrap_or_else(|_| S::nan())
    }

    pub fn try_f_eval(&self, u: S, order: u8) -> Result<S> {
        let nu = &self.params.nu;
        match order {
            0 => Ok(self.params.b * u + nu.integral(u, Integrand::compensated(0, 1))?),
            1 => Ok(self.params.b + nu.integral(u, Integrand::plain(1))?),
            2 => nu.integral(u, Integrand::plain(2)),
            _ => Err(Error::InvalidOrder(order as u32)),
        }
    }

    /// `R`, `R'` or `R''` at `u`; see [`Self::f_eval`] for error handling.
    pub fn r_eval(&self, u: S, order: u8) -> S {
        self.try_r_eval(u, order).unwrap_or_else(|_| S::nan())
    }

    pub fn try_r_eval(&self, u: S, order: u8) -> Result<S> {
        let ModelParams { beta, sigma, ref mu, .. } = self.params;
        let s2 = sigma * sigma;
        match order {
            0 => {
                let jumps = mu.integral(u, Integrand::compensated(0, 2))?;
                Ok(beta * u + S::lit(0.5) * s2 * u * u + jumps)
            }
            1 => Ok(beta + s2 * u + mu.integral(u, Integrand::compensated(1, 1))?),
            2 => Ok(s2 + mu.integral(u, Integrand::plain(2))?),
            _ => Err(Error::InvalidOrder(order as u32)),
        }
    }

    /// Mean of the invariant law, `m = (b + int z nu(dz)) / |beta|`.
    pub fn stationary_mean(&self) -> S {
        -self.f_eval(S::zero(), 1) / self.params.beta
    }

    /// Asymptotic variance of the CLT, `(R''(0) m + F''(0)) / beta^2`.
    pub fn clt_variance(&self) -> Result<S> {
        let r2 = self.try_r_eval(S::zero(), 2)?;
        let f2 = self.try_f_eval(S::zero(), 2)?;
        if !(r2.is_finite() && f2.is_finite()) {
            return Err(Error::SecondMomentInfinite);
        }
        let m = self.stationary_mean();
        let beta = self.params.beta;
        Ok((r2 * m + f2) / (beta * beta))
    }

    /// Converts every parameter to another precision.
    pub fn cast<T: Real>(&self) -> Result<Mechanisms<T>> {
        let c = |x: S| T::lit(x.to_f64_lossy());
        Mechanisms::new(ModelParams {
            b: c(self.params.b),
            beta: c(self.params.beta),
            sigma: c(self.params.sigma),
            nu: cast_measure(&self.params.nu),
            mu: cast_measure(&self.params.mu),
        })
    }
}

pub(crate) fn cast_measure<S: Real, T: Real>(m: &LevyMeasure<S>) -> LevyMeasure<T> {
    let c = |x: S| T::lit(x.to_f64_lossy());
    match *m {
        LevyMeasure::Zero => LevyMeasure::Zero,
        LevyMeasure::PointMass { mass, location } => LevyMeasure::point_mass(c(mass), c(location)),
        LevyMeasure::TemperedPowerLaw {
            amplitude,
            tempering,
            exponent,
            cutoff,
        } => LevyMeasure::tempered_power_law(c(amplitude), c(tempering), c(exponent), c(cutoff)),
        LevyMeasure::StretchedExp { exponent } => LevyMeasure::stretched_exp(c(exponent)),
        LevyMeasure::Mixture { ref parts } => LevyMeasure::Mixture {
            parts: parts.iter().map(cast_measure).collect(),
        },
    }
}

impl<S: Real> fmt::Display for Mechanisms<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = &self.params;
        write!(f, "F(u) = {}·u", p.b)?;
        if !p.nu.is_zero() {
            write!(f, " + ∫(e^(uz) - 1) ν(dz),  ν = {}", p.nu)?;
        }
        writeln!(f)?;
        write!(f, "R(u) = {}·u", p.beta)?;
        if p.sigma > S::zero() {
            write!(f, " + {}·u²", S::lit(0.5) * p.sigma * p.sigma)?;
        }
        if !p.mu.is_zero() {
            write!(f, " + ∫(e^(uz) - 1 - uz) μ(dz),  μ = {}", p.mu)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn model(b: f64, beta: f64, sigma: f64, nu: LevyMeasure<f64>, mu: LevyMeasure<f64>) -> Mechanisms<f64> {
        Mechanisms::new(ModelParams { b, beta, sigma, nu, mu }).unwrap()
    }

    #[test]
    fn rejects_supercritical_and_bad_parameters() {
        assert_eq!(Mechanisms::diffusion(1.0, 0.0, 1.0), Err(Error::NotSubcritical(0.0)));
        assert!(Mechanisms::diffusion(-1.0, -1.0, 1.0).is_err());
        assert!(Mechanisms::diffusion(1.0, -1.0, -0.1).is_err());
    }

    #[test]
    fn pure_drift_and_atom() {
        let m = model(1.0, -1.0, 0.0, LevyMeasure::Zero, LevyMeasure::Zero);
        assert_eq!(m.f_eval(0.3, 0), 0.3);
        let m = model(0.0, -1.0, 0.0, LevyMeasure::point_mass(1.0, 1.0), LevyMeasure::Zero);
        for &u in &[-2.0, 0.0, 0.7] {
            assert_relative_eq!(m.f_eval(u, 0), f64::exp_m1(u), max_relative = 1e-14);
        }
        assert!(!m.is_nondegenerate());
    }

    #[test]
    fn atom_against_narrow_density() {
        // unit mass spread uniformly over (1, 1 + w) approximates delta_1
        let w = 1e-3;
        let atom = model(0.0, -1.0, 0.0, LevyMeasure::point_mass(1.0, 1.0), LevyMeasure::Zero);
        // average of e^{uz} - 1 over z in (1, 1+w) by quadrature
        let u = 0.8;
        let avg = crate::numerics::quad::integrate(
            |z: f64| f64::exp_m1(u * z) / w,
            1.0,
            1.0 + w,
            &Default::default(),
        )
        .unwrap()
        .value;
        assert_relative_eq!(atom.f_eval(u, 0), avg, max_relative = 1e-3);
    }

    #[test]
    fn cir_branching_mechanism() {
        let m = Mechanisms::diffusion(1.0, -1.0, 2f64.sqrt()).unwrap();
        for &u in &[-3.0, 0.0, 0.25, 1.7] {
            assert_relative_eq!(m.r_eval(u, 0), -u + u * u, max_relative = 1e-14, epsilon = 1e-15);
        }
        assert_eq!(m.r_eval(0.0, 1), -1.0);
        assert_relative_eq!(m.r_eval(0.0, 2), 2.0);
    }

    #[test]
    fn stationary_means() {
        assert_relative_eq!(Mechanisms::diffusion(1.0, -2.0, 1.0).unwrap().stationary_mean(), 0.5);
        assert_eq!(Mechanisms::diffusion(0.0, -2.0, 1.0).unwrap().stationary_mean(), 0.0);
        let m = model(0.0, -1.0, 0.0, LevyMeasure::point_mass(2.0, 3.0), LevyMeasure::Zero);
        assert_relative_eq!(m.stationary_mean(), 6.0);
    }

    #[test]
    fn clt_variances() {
        let m = Mechanisms::diffusion(1.0, -2.0, 2f64.sqrt()).unwrap();
        assert_relative_eq!(m.clt_variance().unwrap(), 0.25, max_relative = 1e-14);
        let m = model(1.0, -1.0, 0.0, LevyMeasure::Zero, LevyMeasure::point_mass(1.0, 1.0));
        assert_relative_eq!(m.clt_variance().unwrap(), 1.0, max_relative = 1e-14);
        let f0 = Mechanisms::diffusion(0.0, -1.0, 1.0).unwrap();
        assert_eq!(f0.clt_variance().unwrap(), 0.0);
        let heavy = model(
            0.0,
            -1.0,
            1.0,
            LevyMeasure::tempered_power_law(1.0, 0.0, 2.5, 1.0),
            LevyMeasure::Zero,
        );
        assert_eq!(heavy.clt_variance(), Err(Error::SecondMomentInfinite));
    }

    #[test]
    fn thresholds_follow_measures() {
        let m = model(
            0.0,
            -1.0,
            1.0,
            LevyMeasure::tempered_power_law(1.0, 0.7, 1.5, 1.0),
            LevyMeasure::tempered_power_law(1.0, 1.0, 2.5, 0.0),
        );
        assert_eq!(m.gamma_f(), 0.7);
        assert_eq!(m.gamma_r(), 1.0);
        assert!(m.f_eval(0.71, 0).is_infinite());
    }

    #[test]
    fn config_round_trip() {
        let js = r#"{"b":1.0,"beta":-1.0,"sigma":0.5,"mu":{"type":"point_mass","mass":1.0,"location":0.5}}"#;
        let m: Mechanisms<f64> = serde_json::from_str(js).unwrap();
        assert_eq!(m.nu(), &LevyMeasure::Zero);
        let back: Mechanisms<f64> = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
        assert_eq!(back, m);
        let bad = r#"{"b":1.0,"beta":1.0}"#;
        assert!(serde_json::from_str::<Mechanisms<f64>>(bad).is_err());
    }

    #[test]
    fn pretty_printer_mentions_parts() {
        let m = model(1.0, -1.0, 1.0, LevyMeasure::point_mass(1.0, 2.0), LevyMeasure::Zero);
        let s = m.to_string();
        assert!(s.contains("F(u) = 1·u"));
        assert!(s.contains("δ_2"));
        assert!(s.contains("0.5·u²"));
    }

    #[test]
    fn single_precision_cast() {
        let m = Mechanisms::diffusion(1.0, -2.0, 2f64.sqrt()).unwrap();
        let m32: Mechanisms<f32> = m.cast().unwrap();
        assert!((m32.clt_variance().unwrap() - 0.25).abs() < 1e-5);
    }
}
