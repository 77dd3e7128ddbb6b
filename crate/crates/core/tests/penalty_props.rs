use admm_mcp_core::penalties::{
    etf_value, hard_threshold, ltf_value, mcp_prox_exact, mcp_prox_unified, mcp_value, penalty_value_vec, scad_value,
    soft_threshold,
};
use admm_mcp_core::{PenaltyFamily, PenaltyParams, ProxBranch};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn mcp_is_continuous_at_the_knot(lambda in 0.01f64..5.0, gamma in 1.01f64..8.0) {
        let p = PenaltyParams::mcp(lambda, gamma).unwrap();
        let knot = gamma * lambda;
        let below = mcp_value(knot - 1e-6, &p).unwrap();
        let above = mcp_value(knot + 1e-6, &p).unwrap();
        prop_assert!((below - above).abs() <= 1e-9);
    }

    #[test]
    fn penalties_are_even_nonnegative_and_nondecreasing(
        lambda in 0.01f64..5.0,
        gamma in 2.01f64..8.0,
        a in 0.0f64..20.0,
        da in 0.0f64..5.0,
    ) {
        for family in [PenaltyFamily::Mcp, PenaltyFamily::Scad, PenaltyFamily::Etf, PenaltyFamily::Ltf] {
            let p = PenaltyParams::new(family, lambda, gamma).unwrap();
            let (v, w) = (p.value(a), p.value(a + da));
            prop_assert!(v >= 0.0);
            prop_assert_eq!(v, p.value(-a));
            prop_assert!(w >= v - 1e-12 * v.abs().max(1.0), "{:?} decreasing at {}", family, a);
        }
    }

    #[test]
    fn scad_is_continuous_at_both_knots(lambda in 0.01f64..5.0, gamma in 2.01f64..8.0) {
        let p = PenaltyParams::new(PenaltyFamily::Scad, lambda, gamma).unwrap();
        for knot in [lambda, gamma * lambda] {
            let jump = (scad_value(knot - 1e-7, &p).unwrap() - scad_value(knot + 1e-7, &p).unwrap()).abs();
            prop_assert!(jump <= 1e-6 * lambda.max(1.0));
        }
    }

    #[test]
    fn vector_penalty_is_the_elementwise_sum(u in prop::collection::vec(-10.0f64..10.0, 0..16), lambda in 0.1f64..2.0) {
        let p = PenaltyParams::mcp(lambda, 1.5).unwrap();
        let sum: f64 = u.iter().map(|&x| mcp_value(x, &p).unwrap()).sum();
        prop_assert!((penalty_value_vec(&u, &p) - sum).abs() <= 1e-12 * sum.max(1.0));
    }

    #[test]
    fn unified_prox_never_grows_magnitude(s in -20.0f64..20.0, lambda in 0.01f64..5.0, gamma in 1.01f64..8.0) {
        let p = PenaltyParams::mcp(lambda, gamma).unwrap();
        let r = mcp_prox_unified(s, &p).unwrap();
        prop_assert!(r.value.abs() <= s.abs());
        prop_assert_eq!(mcp_prox_unified(-s, &p).unwrap().value, -r.value);
    }

    #[test]
    fn exact_prox_at_the_boundary_case_is_a_hard_threshold(s in -10.0f64..10.0, lambda in 0.05f64..3.0, gamma in 1.01f64..6.0) {
        let p = PenaltyParams::mcp(lambda, gamma).unwrap();
        let r = mcp_prox_exact(s, &p, 1.0 / gamma).unwrap();
        if s.abs() <= gamma * lambda {
            prop_assert_eq!(r.value, 0.0);
            prop_assert_eq!(r.branch, ProxBranch::Zeroed);
        } else {
            prop_assert_eq!(r.value, s);
        }
    }

    #[test]
    fn thresholds_are_odd(z in prop::collection::vec(-10.0f64..10.0, 1..20), eta in 0.0f64..3.0, tau_frac in 0.0f64..1.0) {
        let tau = (tau_frac * z.len() as f64) as usize;
        let neg: Vec<f64> = z.iter().map(|v| -v).collect();
        let h = hard_threshold(&z, tau).unwrap();
        let hn = hard_threshold(&neg, tau).unwrap();
        prop_assert!(h.iter().zip(&hn).all(|(a, b)| *a == -*b));
        for &v in &z {
            prop_assert_eq!(soft_threshold(-v, eta), -soft_threshold(v, eta));
            prop_assert!(soft_threshold(v, eta).abs() <= v.abs());
        }
    }
}

#[test]
fn family_values_at_reference_points() {
    let etf = PenaltyParams::new(PenaltyFamily::Etf, 1.0, 1.0).unwrap();
    assert!((etf_value(1.0, &etf).unwrap() - 1.0).abs() < 1e-15);
    let ltf = PenaltyParams::new(PenaltyFamily::Ltf, 2.0, 0.5).unwrap();
    assert_eq!(ltf_value(0.0, &ltf).unwrap(), 0.0);
    let scad = PenaltyParams::new(PenaltyFamily::Scad, 1.0, 3.0).unwrap();
    assert_eq!(scad_value(5.0, &scad).unwrap(), 2.0);
}

#[test]
fn parameter_domains_are_enforced() {
    assert!(PenaltyParams::mcp(1.0, 1.0).is_err());
    assert!(PenaltyParams::mcp(0.0, 2.0).is_err());
    assert!(PenaltyParams::new(PenaltyFamily::Scad, 1.0, 2.0).is_err());
    assert!(PenaltyParams::new(PenaltyFamily::Etf, 1.0, 0.0).is_err());
    assert!(PenaltyParams::new(PenaltyFamily::Ltf, 1.0, f64::NAN).is_err());
    let scad = PenaltyParams::new(PenaltyFamily::Scad, 1.0, 3.0).unwrap();
    assert!(mcp_value(1.0, &scad).is_err());
    assert!(mcp_prox_exact(1.0, &PenaltyParams::mcp(1.0, 2.0).unwrap(), 0.0).is_err());
}
