//! Parametric Lévy measures for the immigration (`nu`) and branching (`mu`)
//! jumps, and every integral against them that the mechanisms need.
//!
//! Integrals of the form `int z^k (e^{uz} - sum_{j<n} (uz)^j / j!) m(dz)` are
//! evaluated in closed form whenever the family allows it (atoms, tempered
//! power laws through (incomplete) gamma identities) and by adaptive
//! Gauss–Kronrod quadrature otherwise. Above the exponential-moment threshold
//! the result is `+inf`; exactly at the threshold the family's tail is tested
//! for convergence.

use std::fmt;

use rand::Rng;
use rand_distr::{Distribution, Exp, Gamma};
use serde::{Deserialize, Serialize};

use crate::error::{Error, NumericsError, Result};
use crate::numerics::quad::{self, QuadConfig};
use crate::scalar::Real;
use crate::special::{binomial_remainder, gamma, upper_gamma};

/// Which mechanism a measure feeds; the admissibility conditions differ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    /// `nu`: requires `int (1 ∧ z) nu(dz) < inf`.
    Immigration,
    /// `mu`: requires `int (z ∧ z^2) mu(dz) < inf`.
    Branching,
}

impl Role {
    fn label(self) -> &'static str {
        match self {
            Role::Immigration => "immigration measure",
            Role::Branching => "branching measure",
        }
    }

    /// Number of Taylor terms removed by the Lévy–Khinchine compensation.
    pub fn compensation_terms(self) -> u32 {
        match self {
            Role::Immigration => 1,
            Role::Branching => 2,
        }
    }
}

/// Integrand family `z^k (e^{uz} - sum_{j<terms} (uz)^j / j!)`.
/// `terms = 0` is the plain exponential polynomial `z^k e^{uz}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Integrand {
    pub k: u32,
    pub terms: u32,
}

impl Integrand {
    pub const fn plain(k: u32) -> Self {
        Self { k, terms: 0 }
    }

    pub const fn compensated(k: u32, terms: u32) -> Self {
        Self { k, terms }
    }
}

/// A jump measure on `(0, inf)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    tag = "type",
    rename_all = "snake_case",
    bound(deserialize = "S: Deserialize<'de> + Default")
)]
pub enum LevyMeasure<S> {
    Zero,
    /// `mass * delta_location`.
    PointMass { mass: S, location: S },
    /// Density `amplitude * e^{-tempering z} * z^{-exponent}` on `(cutoff, inf)`.
    TemperedPowerLaw {
        amplitude: S,
        tempering: S,
        exponent: S,
        #[serde(default)]
        cutoff: S,
    },
    /// Density `e^{-z^exponent}` on `(0, inf)`, `exponent > 1`.
    StretchedExp { exponent: S },
    Mixture { parts: Vec<LevyMeasure<S>> },
}

impl<S> Default for LevyMeasure<S> {
    fn default() -> Self {
        LevyMeasure::Zero
    }
}

/// `e^x - sum_{j<n} x^j / j!` without cancellation near zero.
pub fn exp_remainder<S: Real>(x: S, n: u32) -> S {
    match n {
        0 => x.exp(),
        1 if x.abs() > S::lit(1e-3) => x.exp_m1(),
        _ if x.abs() <= S::lit(0.5) || x < S::zero() && n == 1 => {
            let mut term = S::one();
            for j in 1..=n {
                term = term * x / S::from_usize_lossy(j as usize);
            }
            let mut sum = S::zero();
            let mut j = n;
            loop {
                sum = sum + term;
                j += 1;
                let next = term * x / S::from_usize_lossy(j as usize);
                if next.abs() <= S::epsilon() * sum.abs() || j > n + 60 {
                    break sum;
                }
                term = next;
            }
        }
        _ => {
            let mut poly = S::zero();
            let mut term = S::one();
            for j in 0..n {
                poly = poly + term;
                term = term * x / S::from_usize_lossy(j as usize + 1);
            }
            x.exp() - poly
        }
    }
}

fn near_integer<S: Real>(s: S) -> bool {
    (s - s.round()).abs() < S::lit(1e-6)
}

impl<S: Real> LevyMeasure<S> {
    pub fn point_mass(mass: S, location: S) -> Self {
        LevyMeasure::PointMass { mass, location }
    }

    pub fn tempered_power_law(amplitude: S, tempering: S, exponent: S, cutoff: S) -> Self {
        LevyMeasure::TemperedPowerLaw {
            amplitude,
            tempering,
            exponent,
            cutoff,
        }
    }

    pub fn stretched_exp(exponent: S) -> Self {
        LevyMeasure::StretchedExp { exponent }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            LevyMeasure::Zero => true,
            LevyMeasure::Mixture { parts } => parts.iter().all(|p| p.is_zero()),
            _ => false,
        }
    }

    /// Checks parameter ranges and the integrability condition for `role`.
    pub fn validate(&self, role: Role) -> Result<()> {
        let bad = |reason: String| {
            Err(Error::Inadmissible {
                role: role.label(),
                reason,
            })
        };
        match *self {
            LevyMeasure::Zero => Ok(()),
            LevyMeasure::PointMass { mass, location } => {
                if !(mass > S::zero() && mass.is_finite()) {
                    return bad(format!("point mass must be positive and finite, got {mass}"));
                }
                if !(location > S::zero() && location.is_finite()) {
                    return bad(format!("atom location must be positive, got {location}"));
                }
                Ok(())
            }
            LevyMeasure::TemperedPowerLaw {
                amplitude,
                tempering,
                exponent,
                cutoff,
            } => {
                if !(amplitude > S::zero() && amplitude.is_finite()) {
                    return bad(format!("amplitude must be positive, got {amplitude}"));
                }
                if !(tempering >= S::zero() && tempering.is_finite()) {
                    return bad(format!("tempering must be nonnegative, got {tempering}"));
                }
                if !(cutoff >= S::zero() && cutoff.is_finite()) {
                    return bad(format!("cutoff must be nonnegative, got {cutoff}"));
                }
                if !exponent.is_finite() {
                    return bad("exponent must be finite".into());
                }
                let near_zero_power = match role {
                    Role::Immigration => S::lit(2.0),
                    Role::Branching => S::lit(3.0),
                };
                if cutoff == S::zero() && exponent >= near_zero_power {
                    return bad(format!(
                        "exponent {exponent} not integrable near 0 (needs < {near_zero_power} without cutoff)"
                    ));
                }
                if tempering == S::zero() {
                    let tail_power = match role {
                        Role::Immigration => S::one(),
                        Role::Branching => S::lit(2.0),
                    };
                    if exponent <= tail_power {
                        return bad(format!(
                            "untempered tail z^-{exponent} needs exponent > {tail_power}"
                        ));
                    }
                }
                Ok(())
            }
            LevyMeasure::StretchedExp { exponent } => {
                if !(exponent > S::one() && exponent.is_finite()) {
                    return bad(format!("stretched exponent must exceed 1, got {exponent}"));
                }
                Ok(())
            }
            LevyMeasure::Mixture { ref parts } => parts.iter().try_for_each(|p| p.validate(role)),
        }
    }

    /// `sup { g >= 0 : int_1^inf e^{g z} m(dz) < inf }`.
    pub fn exp_threshold(&self) -> S {
        match *self {
            LevyMeasure::Zero | LevyMeasure::PointMass { .. } | LevyMeasure::StretchedExp { .. } => {
                S::infinity()
            }
            LevyMeasure::TemperedPowerLaw { tempering, .. } => tempering,
            LevyMeasure::Mixture { ref parts } => parts
                .iter()
                .map(|p| p.exp_threshold())
                .fold(S::infinity(), S::min),
        }
    }

    /// `int z^k (e^{uz} - [compensation]) m(dz)` as in the Lévy–Khinchine
    /// forms: `compensated = Some(role)` removes the role's Taylor terms.
    pub fn exp_poly_integral(&self, u: S, k: u32, compensated: Option<Role>) -> Result<S> {
        let terms = compensated.map_or(0, Role::compensation_terms);
        self.integral(u, Integrand { k, terms })
    }

    /// General entry point for the integrand family [`Integrand`].
    pub fn integral(&self, u: S, integrand: Integrand) -> Result<S> {
        if integrand.k > 4 {
            return Err(Error::InvalidOrder(integrand.k));
        }
        if u.is_nan() {
            return Ok(S::nan());
        }
        match *self {
            LevyMeasure::Zero => Ok(S::zero()),
            LevyMeasure::PointMass { mass, location } => {
                let zk = location.powi(integrand.k as i32);
                Ok(mass * zk * exp_remainder(u * location, integrand.terms))
            }
            LevyMeasure::TemperedPowerLaw {
                amplitude,
                tempering,
                exponent,
                cutoff,
            } => tempered_integral(amplitude, tempering, exponent, cutoff, u, integrand),
            LevyMeasure::StretchedExp { exponent } => stretched_integral(exponent, u, integrand),
            LevyMeasure::Mixture { ref parts } => {
                let mut total = S::zero();
                for p in parts {
                    total = total + p.integral(u, integrand)?;
                }
                Ok(total)
            }
        }
    }

    /// `int_lo^hi z^k m(dz)` (half-open `[lo, hi)`), `+inf` when divergent.
    pub fn truncated_moment(&self, k: u32, lo: S, hi: S) -> S {
        if hi <= lo {
            return S::zero();
        }
        match *self {
            LevyMeasure::Zero => S::zero(),
            LevyMeasure::PointMass { mass, location } => {
                if location >= lo && location < hi {
                    mass * location.powi(k as i32)
                } else {
                    S::zero()
                }
            }
            LevyMeasure::TemperedPowerLaw {
                amplitude,
                tempering,
                exponent,
                cutoff,
            } => {
                let a = lo.max(cutoff);
                if hi <= a {
                    return S::zero();
                }
                let s = S::from_u32(k).unwrap() + S::one() - exponent;
                if tempering == S::zero() {
                    if a == S::zero() && s <= S::zero() {
                        return S::infinity();
                    }
                    if near_integer(s) && s.round() == S::zero() {
                        return amplitude * (hi.ln() - a.ln());
                    }
                    if hi.is_infinite() {
                        return if s < S::zero() { amplitude * (-a.powf(s) / s) } else { S::infinity() };
                    }
                    return amplitude * (hi.powf(s) - a.powf(s)) / s;
                }
                if a == S::zero() && s <= S::zero() {
                    return S::infinity();
                }
                let th = tempering;
                let upper = if hi.is_infinite() { S::zero() } else { upper_gamma(s, th * hi) };
                amplitude * th.powf(-s) * (upper_gamma(s, th * a) - upper)
            }
            LevyMeasure::StretchedExp { exponent } => {
                let s = (S::from_u32(k).unwrap() + S::one()) / exponent;
                let upper = if hi.is_infinite() {
                    S::zero()
                } else {
                    upper_gamma(s, hi.powf(exponent))
                };
                (upper_gamma(s, lo.max(S::zero()).powf(exponent)) - upper) / exponent
            }
            LevyMeasure::Mixture { ref parts } => parts.iter().map(|p| p.truncated_moment(k, lo, hi)).sum(),
        }
    }

    /// The measure `e^{yz} m(dz)`, when it stays inside the parametric family.
    pub fn tilted(&self, y: S) -> Option<Self> {
        match *self {
            LevyMeasure::Zero => Some(LevyMeasure::Zero),
            LevyMeasure::PointMass { mass, location } => Some(LevyMeasure::PointMass {
                mass: mass * (y * location).exp(),
                location,
            }),
            LevyMeasure::TemperedPowerLaw {
                amplitude,
                tempering,
                exponent,
                cutoff,
            } => {
                let t = tempering - y;
                if t > S::zero() || (t == S::zero() && exponent > S::lit(2.0)) {
                    Some(LevyMeasure::TemperedPowerLaw {
                        amplitude,
                        tempering: t,
                        exponent,
                        cutoff,
                    })
                } else {
                    None
                }
            }
            LevyMeasure::StretchedExp { .. } => (y == S::zero()).then(|| self.clone()),
            LevyMeasure::Mixture { ref parts } => parts
                .iter()
                .map(|p| p.tilted(y))
                .collect::<Option<Vec<_>>>()
                .map(|parts| LevyMeasure::Mixture { parts }),
        }
    }

    /// Quadrature route for densities; used as the independent oracle for the
    /// closed forms and as the fallback where none exists.
    pub fn integral_by_quadrature(&self, u: S, integrand: Integrand) -> Result<S> {
        match *self {
            LevyMeasure::TemperedPowerLaw {
                amplitude,
                tempering,
                exponent,
                cutoff,
            } => {
                if let Some(v) = tempered_divergence(tempering, exponent, cutoff, u, integrand) {
                    return Ok(v);
                }
                let density = Density::tempered(amplitude, tempering, exponent);
                density_quadrature(density, cutoff, tail_rate(tempering, u, integrand), u, integrand)
            }
            LevyMeasure::StretchedExp { exponent } => stretched_integral(exponent, u, integrand),
            LevyMeasure::Mixture { ref parts } => {
                let mut total = S::zero();
                for p in parts {
                    total = total + p.integral_by_quadrature(u, integrand)?;
                }
                Ok(total)
            }
            _ => self.integral(u, integrand),
        }
    }
}

/// Returns `Some(+inf)` when the tempered integral diverges (or `Some(0)` for a
/// vanishing integrand), `None` when it is finite.
fn tempered_divergence<S: Real>(
    tempering: S,
    exponent: S,
    cutoff: S,
    u: S,
    integrand: Integrand,
) -> Option<S> {
    if integrand.terms > 0 && u == S::zero() {
        return Some(S::zero());
    }
    let kf = S::from_u32(integrand.k).unwrap();
    // near zero the integrand behaves like z^{k + m - exponent}, m = leading power kept
    let lead = if u == S::zero() { S::zero() } else { S::from_u32(integrand.terms).unwrap() };
    if cutoff == S::zero() && kf + lead - exponent <= -S::one() {
        return Some(S::infinity());
    }
    if u > tempering {
        return Some(S::infinity());
    }
    if u == tempering {
        // tail ~ z^{k - exponent} at the threshold
        if kf - exponent >= -S::one() {
            return Some(S::infinity());
        }
    }
    if tempering == S::zero() && u < S::zero() {
        return None;
    }
    None
}

fn tempered_integral<S: Real>(
    amplitude: S,
    tempering: S,
    exponent: S,
    cutoff: S,
    u: S,
    integrand: Integrand,
) -> Result<S> {
    if let Some(v) = tempered_divergence(tempering, exponent, cutoff, u, integrand) {
        return Ok(v);
    }
    let s = S::from_u32(integrand.k).unwrap() + S::one() - exponent;
    let rate = tempering - u;
    if integrand.terms == 0 {
        if rate > S::zero() {
            let value = if cutoff > S::zero() {
                rate.powf(-s) * upper_gamma(s, rate * cutoff)
            } else {
                rate.powf(-s) * gamma(s)
            };
            return Ok(amplitude * value);
        }
        // rate == 0 with a convergent algebraic tail (cutoff > 0 here)
        return Ok(amplitude * cutoff.powf(s) / (-s));
    }
    if cutoff == S::zero() && tempering > S::zero() && !near_integer(s) {
        let v = u / tempering;
        let rem = binomial_remainder(-s, v, integrand.terms as usize);
        return Ok(amplitude * gamma(s) * tempering.powf(-s) * rem);
    }
    if cutoff > S::zero() && tempering > S::zero() {
        if let Some(v) = tempered_cutoff_compensated(tempering, s, cutoff, u, integrand.terms) {
            return Ok(amplitude * v);
        }
    }
    let density = Density::tempered(amplitude, tempering, exponent);
    density_quadrature(density, cutoff, tail_rate(tempering, u, integrand), u, integrand)
}

/// `int_c^inf (e^{uz} - sum_{j<n} (uz)^j / j!) z^{s-1} e^{-θz} dz` for `c > 0`
/// via `int_c^inf z^{a-1} e^{-rz} dz = r^{-a} Γ(a, rc)`. Near `u = 0` the
/// remainder is summed as a series so the leading terms never cancel.
fn tempered_cutoff_compensated<S: Real>(theta: S, s: S, c: S, u: S, n: u32) -> Option<S> {
    let moment = |j: u32| {
        let a = s + S::from_u32(j).unwrap();
        theta.powf(-a) * upper_gamma(a, theta * c)
    };
    if u.abs() <= theta * S::lit(0.5) {
        // coeff = u^j / j!, starting at j = n
        let mut coeff = S::one();
        for j in 1..=n {
            coeff = coeff * u / S::from_u32(j).unwrap();
        }
        let mut sum = S::zero();
        for j in n..n + 200 {
            let term = coeff * moment(j);
            sum = sum + term;
            if term.abs() <= S::epsilon() * sum.abs() * S::lit(0.1) {
                return Some(sum);
            }
            coeff = coeff * u / S::from_u32(j + 1).unwrap();
        }
        return None;
    }
    let rate = theta - u;
    let head = if rate > S::zero() {
        rate.powf(-s) * upper_gamma(s, rate * c)
    } else if s < S::zero() {
        c.powf(s) / (-s)
    } else {
        return None;
    };
    let mut poly = S::zero();
    let mut coeff = S::one();
    for j in 0..n {
        if j > 0 {
            coeff = coeff * u / S::from_u32(j).unwrap();
        }
        poly = poly + coeff * moment(j);
    }
    Some(head - poly)
}

/// Exponential decay rate of the tempered integrand; for `u < 0` the
/// compensation polynomial dominates and only `tempering` is left.
fn tail_rate<S: Real>(tempering: S, u: S, integrand: Integrand) -> S {
    if integrand.terms > 0 {
        tempering - u.max(S::zero())
    } else {
        tempering - u
    }
}

fn stretched_integral<S: Real>(exponent: S, u: S, integrand: Integrand) -> Result<S> {
    if integrand.terms > 0 && u == S::zero() {
        return Ok(S::zero());
    }
    let density = Density {
        amplitude: S::one(),
        power: S::zero(),
        decay: DecayKind::Stretched(exponent),
    };
    // past the mode of e^{uz - z^p} the integrand decays at least like e^{-rate z}
    let mode = if u > S::zero() {
        (u / exponent).powf(S::one() / (exponent - S::one()))
    } else {
        S::zero()
    };
    let split = (S::lit(2.0) * mode).max(S::one());
    let rate = (exponent * split.powf(exponent - S::one()) - u).max(S::lit(0.5));
    let cfg = QuadConfig::default();
    let f = |z: S| density.weighted(z, u, integrand);
    let head = quad::integrate(f, S::zero(), split, &cfg)?;
    let tail = quad::integrate_to_infinity(f, split, rate, &cfg)?;
    Ok(head.value + tail.value)
}

#[derive(Clone, Copy)]
enum DecayKind<S> {
    /// `e^{-theta z}`
    Exponential(S),
    /// `e^{-z^p}`
    Stretched(S),
}

/// Density `amplitude * z^{-power} * e^{-decay(z)}`.
#[derive(Clone, Copy)]
struct Density<S> {
    amplitude: S,
    power: S,
    decay: DecayKind<S>,
}

impl<S: Real> Density<S> {
    fn tempered(amplitude: S, tempering: S, exponent: S) -> Self {
        Self {
            amplitude,
            power: exponent,
            decay: DecayKind::Exponential(tempering),
        }
    }

    /// `z^k (e^{uz} - poly) * density(z)`, with the growing and decaying
    /// exponentials combined before exponentiation so nothing overflows.
    fn weighted(&self, z: S, u: S, integrand: Integrand) -> S {
        if z <= S::zero() {
            return S::zero();
        }
        let d = match self.decay {
            DecayKind::Exponential(theta) => theta * z,
            DecayKind::Stretched(p) => z.powf(p),
        };
        let x = u * z;
        let damped = if x > S::one() {
            let mut poly = S::zero();
            let mut term = S::one();
            for j in 0..integrand.terms {
                poly = poly + term;
                term = term * x / S::from_usize_lossy(j as usize + 1);
            }
            let decay = (-d).exp();
            (x - d).exp() - if decay == S::zero() { S::zero() } else { poly * decay }
        } else {
            let r = exp_remainder(x, integrand.terms);
            if r == S::zero() {
                return S::zero();
            }
            r * (-d).exp()
        };
        if damped == S::zero() {
            return S::zero();
        }
        self.amplitude * z.powi(integrand.k as i32) * z.powf(-self.power) * damped
    }
}

/// Quadrature of `integrand * density` over `(cutoff, inf)` where the tail
/// decays like `e^{-rate z}` times a power (`rate == 0`: algebraic only).
fn density_quadrature<S: Real>(
    density: Density<S>,
    cutoff: S,
    rate: S,
    u: S,
    integrand: Integrand,
) -> Result<S> {
    let cfg = QuadConfig::default();
    let f = |z: S| density.weighted(z, u, integrand);
    let split = cutoff.max(S::one());
    let mut total = S::zero();
    if cutoff < split {
        total = total + quad::integrate(f, cutoff, split, &cfg)?.value;
    }
    let tail = if rate > S::zero() {
        quad::integrate_to_infinity(f, split, rate, &cfg)?
    } else {
        let k = S::from_u32(integrand.k).unwrap();
        quad::integrate_algebraic_tail(f, split, density.power - k, &cfg)?
    };
    total = total + tail.value;
    if total.is_nan() {
        return Err(NumericsError::QuadratureFailure { reason: "NaN integral" }.into());
    }
    Ok(total)
}

/// Draws jump sizes from a measure restricted to `[threshold, inf)`,
/// normalized to a probability law.
#[derive(Debug, Clone)]
pub struct JumpSampler {
    pieces: Vec<Piece>,
    /// Total mass of the restricted measure (the Poisson rate per unit time
    /// and, for branching, per unit of state).
    pub rate: f64,
}

#[derive(Debug, Clone)]
enum Piece {
    Atom { location: f64, weight: f64 },
    /// `z^{-eta}` on `[lo, hi)` times `e^{-theta z}`.
    Tempered { eta: f64, theta: f64, lo: f64, hi: f64, weight: f64 },
    Stretched { rho: f64, lo: f64, weight: f64 },
}

impl JumpSampler {
    pub fn new<S: Real>(measure: &LevyMeasure<S>, threshold: f64) -> Self {
        let mut pieces = Vec::new();
        collect_pieces(measure, threshold, &mut pieces);
        let rate = pieces.iter().map(Piece::weight).sum();
        Self { pieces, rate }
    }

    pub fn is_empty(&self) -> bool {
        self.rate <= 0.0
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let mut pick = rng.random::<f64>() * self.rate;
        let mut chosen = &self.pieces[self.pieces.len() - 1];
        for p in &self.pieces {
            if pick < p.weight() {
                chosen = p;
                break;
            }
            pick -= p.weight();
        }
        chosen.sample(rng)
    }
}

impl Piece {
    fn weight(&self) -> f64 {
        match *self {
            Piece::Atom { weight, .. } | Piece::Tempered { weight, .. } | Piece::Stretched { weight, .. } => {
                weight
            }
        }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Piece::Atom { location, .. } => location,
            Piece::Tempered { eta, theta, lo, hi, .. } => sample_tempered(eta, theta, lo, hi, rng),
            Piece::Stretched { rho, lo, .. } => {
                let g = Gamma::new(1.0 / rho, 1.0).expect("valid gamma shape");
                let floor = lo.powf(rho);
                loop {
                    let w: f64 = g.sample(rng);
                    if w >= floor {
                        return w.powf(1.0 / rho);
                    }
                }
            }
        }
    }
}

fn collect_pieces<S: Real>(measure: &LevyMeasure<S>, threshold: f64, out: &mut Vec<Piece>) {
    match *measure {
        LevyMeasure::Zero => {}
        LevyMeasure::PointMass { mass, location } => {
            let location = location.to_f64_lossy();
            if location >= threshold {
                out.push(Piece::Atom {
                    location,
                    weight: mass.to_f64_lossy(),
                });
            }
        }
        LevyMeasure::TemperedPowerLaw {
            amplitude,
            tempering,
            exponent,
            cutoff,
        } => {
            let m64 = LevyMeasure::<f64>::TemperedPowerLaw {
                amplitude: amplitude.to_f64_lossy(),
                tempering: tempering.to_f64_lossy(),
                exponent: exponent.to_f64_lossy(),
                cutoff: cutoff.to_f64_lossy(),
            };
            let lo = threshold.max(cutoff.to_f64_lossy());
            let mid = lo.max(1.0);
            let eta = exponent.to_f64_lossy();
            let theta = tempering.to_f64_lossy();
            if lo < mid {
                let w = m64.truncated_moment(0, lo, mid);
                if w > 0.0 {
                    out.push(Piece::Tempered { eta, theta, lo, hi: mid, weight: w });
                }
            }
            let w = m64.truncated_moment(0, mid, f64::INFINITY);
            if w > 0.0 {
                out.push(Piece::Tempered {
                    eta,
                    theta,
                    lo: mid,
                    hi: f64::INFINITY,
                    weight: w,
                });
            }
        }
        LevyMeasure::StretchedExp { exponent } => {
            let m64 = LevyMeasure::<f64>::StretchedExp {
                exponent: exponent.to_f64_lossy(),
            };
            let w = m64.truncated_moment(0, threshold, f64::INFINITY);
            out.push(Piece::Stretched {
                rho: exponent.to_f64_lossy(),
                lo: threshold,
                weight: w,
            });
        }
        LevyMeasure::Mixture { ref parts } => {
            for p in parts {
                collect_pieces(p, threshold, out);
            }
        }
    }
}

/// Exact draw from the density proportional to `z^{-eta} e^{-theta z}` on
/// `[lo, hi)` by rejection.
fn sample_tempered<R: Rng + ?Sized>(eta: f64, theta: f64, lo: f64, hi: f64, rng: &mut R) -> f64 {
    if hi.is_finite() {
        // power-law proposal on the bounded piece, accept with e^{-theta (z - lo)}
        loop {
            let u: f64 = rng.random();
            let z = if (eta - 1.0).abs() < 1e-12 {
                lo * (hi / lo).powf(u)
            } else {
                let p = 1.0 - eta;
                (lo.powf(p) + u * (hi.powf(p) - lo.powf(p))).powf(1.0 / p)
            };
            if theta == 0.0 || rng.random::<f64>() < (-theta * (z - lo)).exp() {
                return z;
            }
        }
    }
    if theta == 0.0 {
        // Pareto tail, eta > 1
        let u: f64 = 1.0 - rng.random::<f64>();
        return lo * u.powf(-1.0 / (eta - 1.0));
    }
    if eta >= 0.0 {
        let e = Exp::new(theta).expect("positive rate");
        loop {
            let z = lo + e.sample(rng);
            if rng.random::<f64>() < (lo / z).powf(eta) {
                return z;
            }
        }
    }
    let g = Gamma::new(1.0 - eta, 1.0 / theta).expect("valid gamma parameters");
    loop {
        let z: f64 = g.sample(rng);
        if z >= lo {
            return z;
        }
    }
}

impl<S: Real> fmt::Display for LevyMeasure<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LevyMeasure::Zero => write!(f, "0"),
            LevyMeasure::PointMass { mass, location } => write!(f, "{mass}·δ_{location}"),
            LevyMeasure::TemperedPowerLaw {
                amplitude,
                tempering,
                exponent,
                cutoff,
            } => write!(
                f,
                "{amplitude}·e^(-{tempering}z)·z^(-{exponent})·1{{z>{cutoff}}}dz"
            ),
            LevyMeasure::StretchedExp { exponent } => write!(f, "e^(-z^{exponent})dz"),
            LevyMeasure::Mixture { parts } => {
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        write!(f, " + ")?;
                    }
                    write!(f, "{p}")?;
                }
                Ok(())
            }
        }
    }
}
