//! Smoke tests in `f32`. Tolerances here only confirm that the generic code
//! runs and lands near the double-precision answers.

use cbi_core::{
    simulate_batch, LevyMeasureF32, MechanismsF32, ModelParams, PathConfig, RateFunctionF32, RiccatiProfileF32,
};

fn cir() -> MechanismsF32 {
    MechanismsF32::new(ModelParams {
        b: 1.0,
        beta: -1.0,
        sigma: 2f32.sqrt(),
        nu: LevyMeasureF32::Zero,
        mu: LevyMeasureF32::Zero,
    })
    .unwrap()
}

#[test]
fn critical_constants() {
    let p = RiccatiProfileF32::new(cir()).unwrap();
    assert!((p.u_c() - 0.5).abs() < 1e-4);
    assert!((p.lambda_r() - 0.25).abs() < 1e-4);
    let y = p.resolvent_root(0.1).unwrap();
    let closed = 0.5 - (1.0f32 / 2.0 - 2.0 * 0.1).sqrt() / 2f32.sqrt();
    assert!((y - closed).abs() < 1e-4);
}

#[test]
fn riccati_flow_settles() {
    let p = RiccatiProfileF32::new(cir()).unwrap();
    let sol = p.solve_a(0.1, 40.0).unwrap();
    assert!((sol.last_a() - p.resolvent_root(0.1).unwrap()).abs() < 1e-3);
}

#[test]
fn rate_function_near_mean() {
    let rf = RateFunctionF32::new(RiccatiProfileF32::new(cir()).unwrap()).unwrap();
    assert!(rf.rate_function(1.0).unwrap().abs() < 1e-5);
    // (|β|x - b)^2 / (2σ²x) at x = 2
    assert!((rf.rate_function(2.0).unwrap() - 0.125).abs() < 1e-3);
}

#[test]
fn simulation_accepts_f32_models() {
    let batch = simulate_batch(&cir(), &PathConfig::new(1.0, 1.0, 0.01).with_seed(1), 16).unwrap();
    assert_eq!(batch.n_paths(), 16);
}
