use cbi_core::{LevyMeasure, Mechanisms, ModelParams, RateFunction, RiccatiProfile};
use proptest::prelude::*;

fn model() -> impl Strategy<Value = Mechanisms<f64>> {
    (0.0..2.0f64, -3.0..-0.2f64, 0.1..1.5f64, 0.001..1.0f64, 0.001..1.0f64, 1.2..2.8f64).prop_map(
        |(b, beta, sigma, nu_mass, mu_amp, eta)| {
            Mechanisms::new(ModelParams {
                b,
                beta,
                sigma,
                nu: LevyMeasure::point_mass(nu_mass, 0.7),
                mu: LevyMeasure::tempered_power_law(mu_amp, 1.5, eta, 0.0),
            })
            .unwrap()
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn resolvent_root_solves_equation(mech in model(), frac in -3.0..1.0f64) {
        let p = RiccatiProfile::new(mech).unwrap();
        let lam = frac * p.lambda_r();
        let y = p.resolvent_root(lam).unwrap();
        let r = p.mechanisms().r_eval(y, 0);
        prop_assert!((r + lam).abs() < 1e-10 * (1.0 + lam.abs()));
        prop_assert!(y <= p.u_c() + 1e-12);
        prop_assert!(p.mechanisms().r_eval(y, 1) <= 1e-9);
    }

    #[test]
    fn resolvent_root_increases(mech in model(), a in -2.0..0.9f64, b in -2.0..0.9f64) {
        let p = RiccatiProfile::new(mech).unwrap();
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assume!(hi - lo > 1e-6);
        let ylo = p.resolvent_root(lo * p.lambda_r()).unwrap();
        let yhi = p.resolvent_root(hi * p.lambda_r()).unwrap();
        prop_assert!(ylo < yhi);
    }

    #[test]
    fn mechanisms_are_convex(mech in model(), u in -3.0..0.5f64) {
        prop_assert!(mech.r_eval(u, 2) > 0.0);
        prop_assert!(mech.f_eval(u, 2) >= 0.0);
        prop_assert!(mech.f_eval(u, 1) >= 0.0);
    }

    #[test]
    fn rate_function_vanishes_only_at_mean(mech in model(), dx in 0.01..2.0f64) {
        let rf = RateFunction::new(RiccatiProfile::new(mech).unwrap()).unwrap();
        let m = rf.mean();
        prop_assert!(rf.rate_function(m).unwrap().abs() < 1e-12);
        prop_assert!(rf.rate_function(m + dx).unwrap() > 0.0);
        if m - dx > 0.0 {
            prop_assert!(rf.rate_function(m - dx).unwrap() > 0.0);
        }
    }

    #[test]
    fn rate_function_is_convex(mech in model(), x in 0.05..4.0f64, h in 0.01..0.5f64) {
        let rf = RateFunction::new(RiccatiProfile::new(mech).unwrap()).unwrap();
        let l = rf.rate_function(x).unwrap();
        let c = rf.rate_function(x + h).unwrap();
        let r = rf.rate_function(x + 2.0 * h).unwrap();
        prop_assume!(l.is_finite() && r.is_finite());
        prop_assert!(c <= 0.5 * (l + r) + 1e-10 * (1.0 + c.abs()));
    }

    #[test]
    fn legendre_duality(mech in model(), x in 0.05..4.0f64) {
        let rf = RateFunction::new(RiccatiProfile::new(mech).unwrap()).unwrap();
        let pt = rf.evaluate(x).unwrap();
        prop_assume!(pt.rate.is_finite() && pt.lambda_star < rf.profile().lambda_c());
        let big_lambda = rf.profile().limit_mgf(pt.lambda_star).unwrap();
        let residual = pt.rate + big_lambda - pt.lambda_star * x;
        prop_assert!(residual.abs() < 1e-9 * (1.0 + pt.rate.abs()));
    }
}
