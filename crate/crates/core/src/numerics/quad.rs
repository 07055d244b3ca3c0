//! Adaptive Gauss–Kronrod quadrature (21-point Kronrod extension of the
//! 10-point Gauss rule) with global error control.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::NumericsError;
use crate::scalar::Real;

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5, 7, 9).
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Tolerances and budget for adaptive quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-300,
            max_subdivisions: 10_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult<S> {
    pub value: S,
    pub error: S,
    pub subdivisions: usize,
}

struct Segment<S> {
    a: S,
    b: S,
    value: S,
    error: S,
}

impl<S: Real> PartialEq for Segment<S> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<S: Real> Eq for Segment<S> {}
impl<S: Real> PartialOrd for Segment<S> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<S: Real> Ord for Segment<S> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.partial_cmp(&other.error).unwrap_or(Ordering::Equal)
    }
}

fn kronrod<S: Real, F: FnMut(S) -> S>(f: &mut F, a: S, b: S) -> (S, S) {
    let half = S::lit(0.5);
    let center = half * (a + b);
    let half_len = half * (b - a);
    let fc = f(center);
    let mut resk = fc * S::lit(WGK[10]);
    let mut resg = S::zero();
    for j in 0..10 {
        let dx = half_len * S::lit(XGK[j]);
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        resk = resk + S::lit(WGK[j]) * (f1 + f2);
        if j % 2 == 1 {
            resg = resg + S::lit(WG[j / 2]) * (f1 + f2);
        }
    }
    let value = resk * half_len;
    let error = ((resk - resg) * half_len).abs();
    (value, error)
}

/// Integrates `f` over the finite interval `[a, b]`.
///
/// A `+inf` value anywhere on the nodes is reported as a divergent integral
/// (`value = +inf`) rather than an error; NaN is a failure.
pub fn integrate<S: Real, F: FnMut(S) -> S>(
    mut f: F,
    a: S,
    b: S,
    cfg: &QuadConfig,
) -> Result<QuadResult<S>, NumericsError> {
    if a == b {
        return Ok(QuadResult {
            value: S::zero(),
            error: S::zero(),
            subdivisions: 0,
        });
    }
    if b < a {
        let r = integrate(f, b, a, cfg)?;
        return Ok(QuadResult {
            value: -r.value,
            ..r
        });
    }
    let rel = S::lit(cfg.rel_tol).max(S::tol_floor());
    let abs = S::lit(cfg.abs_tol);
    let (v0, e0) = kronrod(&mut f, a, b);
    if v0.is_nan() {
        return Err(NumericsError::QuadratureFailure { reason: "integrand is NaN" });
    }
    if v0.is_infinite() {
        return Ok(QuadResult {
            value: v0,
            error: S::zero(),
            subdivisions: 1,
        });
    }
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value: v0, error: e0 });
    let mut total = v0;
    let mut total_err = e0;
    // Segments too narrow to split further are set aside as converged.
    let mut frozen_value = S::zero();
    let mut frozen_err = S::zero();
    let mut count = 1usize;
    loop {
        if total_err <= abs.max(rel * total.abs()) {
            break;
        }
        let Some(seg) = heap.pop() else {
            break;
        };
        let mid = S::lit(0.5) * (seg.a + seg.b);
        if mid <= seg.a || mid >= seg.b || (seg.b - seg.a) <= S::epsilon() * seg.a.abs().max(seg.b.abs()) {
            frozen_value = frozen_value + seg.value;
            frozen_err = frozen_err + seg.error;
            if heap.is_empty() {
                break;
            }
            continue;
        }
        if count >= cfg.max_subdivisions {
            return Err(NumericsError::QuadratureFailure {
                reason: "subdivision budget exhausted",
            });
        }
        let (v1, e1) = kronrod(&mut f, seg.a, mid);
        let (v2, e2) = kronrod(&mut f, mid, seg.b);
        if v1.is_nan() || v2.is_nan() {
            return Err(NumericsError::QuadratureFailure { reason: "integrand is NaN" });
        }
        if v1.is_infinite() || v2.is_infinite() {
            return Ok(QuadResult {
                value: v1 + v2,
                error: S::zero(),
                subdivisions: count,
            });
        }
        count += 1;
        heap.push(Segment { a: seg.a, b: mid, value: v1, error: e1 });
        heap.push(Segment { a: mid, b: seg.b, value: v2, error: e2 });
        if count.is_multiple_of(64) {
            total = heap.iter().map(|s| s.value).sum::<S>() + frozen_value;
            total_err = heap.iter().map(|s| s.error).sum::<S>() + frozen_err;
        } else {
            total = total + v1 + v2 - seg.value;
            total_err = (total_err + e1 + e2 - seg.error).max(S::zero());
        }
    }
    if frozen_err > abs.max(rel * total.abs()) * S::lit(1e3) {
        return Err(NumericsError::QuadratureFailure {
            reason: "roundoff limits attainable accuracy",
        });
    }
    Ok(QuadResult {
        value: total,
        error: total_err,
        subdivisions: count,
    })
}

/// Integrates over `[a, inf)` with `z = a - ln(1 - s) / rate`, which turns an
/// integrand decaying like `e^{-rate z}` into a bounded one on `[0, 1)`.
pub fn integrate_to_infinity<S: Real, F: FnMut(S) -> S>(
    mut f: F,
    a: S,
    rate: S,
    cfg: &QuadConfig,
) -> Result<QuadResult<S>, NumericsError> {
    let one = S::one();
    let mapped = |s: S| {
        let w = one - s;
        if w <= S::zero() {
            return S::zero();
        }
        let z = a - w.ln() / rate;
        let v = f(z);
        if v == S::zero() {
            S::zero()
        } else {
            v / (rate * w)
        }
    };
    integrate(mapped, S::zero(), one, cfg)
}

/// Integrates over `[a, inf)`, `a > 0`, for integrands decaying like
/// `z^{-p}` with `p > 1`, via `z = a (1 - s)^{-m}` and `m = max(1, 2/(p-1))`,
/// which leaves a mapped integrand vanishing linearly at `s = 1`.
pub fn integrate_algebraic_tail<S: Real, F: FnMut(S) -> S>(
    mut f: F,
    a: S,
    decay_power: S,
    cfg: &QuadConfig,
) -> Result<QuadResult<S>, NumericsError> {
    let one = S::one();
    let m = (S::lit(2.0) / (decay_power - one)).max(one);
    let mapped = |s: S| {
        let w = one - s;
        if w <= S::zero() {
            return S::zero();
        }
        let z = a * w.powf(-m);
        if !z.is_finite() {
            return S::zero();
        }
        let v = f(z);
        if v == S::zero() {
            S::zero()
        } else {
            v * a * m * w.powf(-m - one)
        }
    };
    integrate(mapped, S::zero(), one, cfg)
}
