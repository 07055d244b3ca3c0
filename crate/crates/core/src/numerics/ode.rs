//! Adaptive Dormand–Prince 5(4) integrator for scalar ODEs, with cubic
//! Hermite dense output and upward level-crossing detection.
//!
//! A right-hand side that evaluates to a non-finite value inside a trial step
//! is treated as a rejected step, so vector fields defined only on a half-line
//! (e.g. beyond an exponential-moment threshold) can be integrated up to the
//! edge of their domain.

use crate::error::NumericsError;
use crate::numerics::root::{brent, RootConfig};
use crate::scalar::Real;

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A2: [f64; 1] = [0.2];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
const B: [f64; 6] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339_200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub initial_step: f64,
    /// Smallest admissible step, relative to `max(1, |t|)`.
    pub min_step: f64,
    pub max_step: f64,
    pub max_steps: usize,
}

impl Default for OdeConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            initial_step: 1e-4,
            min_step: 1e-14,
            max_step: f64::INFINITY,
            max_steps: 2_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Outcome<S> {
    /// Reached the requested final time.
    Completed,
    /// The solution crossed the stop level from below at time `t`.
    LevelCrossed { t: S },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<S> {
    pub t: Vec<S>,
    pub y: Vec<S>,
    pub dy: Vec<S>,
    pub outcome: Outcome<S>,
    pub accepted: usize,
    pub rejected: usize,
}

impl<S: Real> Trajectory<S> {
    pub fn last_t(&self) -> S {
        *self.t.last().expect("trajectory holds the initial point")
    }

    pub fn last_y(&self) -> S {
        *self.y.last().expect("trajectory holds the initial point")
    }

    /// Cubic Hermite interpolation of the stored solution at time `s`.
    pub fn eval(&self, s: S) -> S {
        let n = self.t.len();
        if n == 1 || s <= self.t[0] {
            return self.y[0];
        }
        if s >= self.t[n - 1] {
            return self.y[n - 1];
        }
        let i = match self.t.binary_search_by(|p| p.partial_cmp(&s).unwrap()) {
            Ok(i) => return self.y[i],
            Err(i) => i - 1,
        };
        hermite(
            self.t[i],
            self.y[i],
            self.dy[i],
            self.t[i + 1],
            self.y[i + 1],
            self.dy[i + 1],
            s,
        )
    }
}

pub(crate) fn hermite<S: Real>(t0: S, y0: S, d0: S, t1: S, y1: S, d1: S, s: S) -> S {
    let h = t1 - t0;
    let th = (s - t0) / h;
    let one = S::one();
    let two = S::lit(2.0);
    let three = S::lit(3.0);
    let th2 = th * th;
    let th3 = th2 * th;
    let h00 = two * th3 - three * th2 + one;
    let h10 = th3 - two * th2 + th;
    let h01 = -two * th3 + three * th2;
    let h11 = th3 - th2;
    h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1
}

/// Integrates `y' = f(t, y)` from `(t0, y0)` to `t_end`, stopping early when
/// `y` reaches `stop_level` (if given).
pub fn integrate<S: Real, F: FnMut(S, S) -> S>(
    mut f: F,
    t0: S,
    y0: S,
    t_end: S,
    stop_level: Option<S>,
    cfg: &OdeConfig,
) -> Result<Trajectory<S>, NumericsError> {
    let rtol = S::lit(cfg.rel_tol).max(S::tol_floor());
    let atol = S::lit(cfg.abs_tol).max(S::min_positive_value());
    let k1 = f(t0, y0);
    if !k1.is_finite() {
        return Err(NumericsError::NonFiniteInitialSlope);
    }
    let mut traj = Trajectory {
        t: vec![t0],
        y: vec![y0],
        dy: vec![k1],
        outcome: Outcome::Completed,
        accepted: 0,
        rejected: 0,
    };
    if let Some(level) = stop_level {
        if y0 >= level {
            traj.outcome = Outcome::LevelCrossed { t: t0 };
            return Ok(traj);
        }
    }
    let mut t = t0;
    let mut y = y0;
    let mut k1 = k1;
    let mut h = S::lit(cfg.initial_step).min(t_end - t0);
    let max_step = S::lit(cfg.max_step);
    let lit = |x: f64| S::lit(x);
    while t < t_end {
        if traj.accepted + traj.rejected >= cfg.max_steps {
            return Err(NumericsError::StepSizeUnderflow {
                t: t.to_f64_lossy(),
                y: y.to_f64_lossy(),
            });
        }
        let h_min = lit(cfg.min_step) * t.abs().max(S::one());
        if h < h_min {
            if let Some(level) = stop_level {
                // Stuck against the edge of the field's domain: the remaining
                // distance is covered in well under one minimal step.
                if k1 > S::zero() && (level - y) <= lit(1e3) * h_min * k1 {
                    let cross = t + (level - y) / k1;
                    traj.t.push(cross);
                    traj.y.push(level);
                    traj.dy.push(k1);
                    traj.outcome = Outcome::LevelCrossed { t: cross };
                    return Ok(traj);
                }
            }
            return Err(NumericsError::StepSizeUnderflow {
                t: t.to_f64_lossy(),
                y: y.to_f64_lossy(),
            });
        }
        let last = t + h >= t_end;
        if last {
            h = t_end - t;
        }
        let k2 = f(t + lit(C[1]) * h, y + h * lit(A2[0]) * k1);
        let k3 = f(t + lit(C[2]) * h, y + h * (lit(A3[0]) * k1 + lit(A3[1]) * k2));
        let k4 = f(
            t + lit(C[3]) * h,
            y + h * (lit(A4[0]) * k1 + lit(A4[1]) * k2 + lit(A4[2]) * k3),
        );
        let k5 = f(
            t + lit(C[4]) * h,
            y + h * (lit(A5[0]) * k1 + lit(A5[1]) * k2 + lit(A5[2]) * k3 + lit(A5[3]) * k4),
        );
        let k6 = f(
            t + lit(C[5]) * h,
            y + h
                * (lit(A6[0]) * k1
                    + lit(A6[1]) * k2
                    + lit(A6[2]) * k3
                    + lit(A6[3]) * k4
                    + lit(A6[4]) * k5),
        );
        let y_new = y + h
            * (lit(B[0]) * k1 + lit(B[2]) * k3 + lit(B[3]) * k4 + lit(B[4]) * k5 + lit(B[5]) * k6);
        let k7 = if y_new.is_finite() { f(t + h, y_new) } else { S::nan() };
        let stages_finite = [k2, k3, k4, k5, k6].iter().all(|k| k.is_finite());
        if let Some(level) = stop_level {
            // Overshoot past an edge where the field is undefined: locate the
            // crossing on the chord.
            if stages_finite && y_new.is_finite() && y_new >= level && !k7.is_finite() {
                let cross = t + h * (level - y) / (y_new - y);
                traj.accepted += 1;
                traj.t.push(cross);
                traj.y.push(level);
                traj.dy.push(k6);
                traj.outcome = Outcome::LevelCrossed { t: cross };
                return Ok(traj);
            }
        }
        let finite = stages_finite && k7.is_finite();
        if !finite {
            traj.rejected += 1;
            h = h * lit(0.25);
            continue;
        }
        let err_est = h
            * (lit(E[0]) * k1
                + lit(E[2]) * k3
                + lit(E[3]) * k4
                + lit(E[4]) * k5
                + lit(E[5]) * k6
                + lit(E[6]) * k7);
        let scale = atol + rtol * y.abs().max(y_new.abs());
        let err = (err_est / scale).abs();
        if err <= S::one() {
            let t_new = if last { t_end } else { t + h };
            traj.accepted += 1;
            if let Some(level) = stop_level {
                if y_new >= level {
                    let (t_prev, y_prev, d_prev) = (t, y, k1);
                    let g = |s: S| hermite(t_prev, y_prev, d_prev, t_new, y_new, k7, s) - level;
                    let cross = brent(g, t_prev, t_new, &RootConfig::default())
                        .map(|r| r.x)
                        .unwrap_or(t_new);
                    traj.t.push(cross);
                    traj.y.push(level);
                    traj.dy.push(f(cross, level));
                    traj.outcome = Outcome::LevelCrossed { t: cross };
                    return Ok(traj);
                }
            }
            t = t_new;
            y = y_new;
            k1 = k7;
            traj.t.push(t);
            traj.y.push(y);
            traj.dy.push(k1);
            let factor = if err == S::zero() {
                lit(5.0)
            } else {
                (lit(0.9) * err.powf(lit(-0.2))).min(lit(5.0)).max(lit(0.2))
            };
            h = (h * factor).min(max_step);
        } else {
            traj.rejected += 1;
            let factor = (lit(0.9) * err.powf(lit(-0.2))).max(lit(0.1));
            h = h * factor;
        }
    }
    Ok(traj)
}
