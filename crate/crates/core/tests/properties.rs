use locop::experiments::{indicator_diagonal, tail_rule_truncation, Rule, SweepRecord};
use locop::operators::{radial_toeplitz_diagonal, SpectralSummary, SymbolDomain, SymbolSpec};
use locop::spaces::SpaceParams;
use proptest::prelude::*;
use std::collections::BTreeMap;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn indicator_diagonal_decreases_past_transition(alpha in 5.0f64..1500.0, rho in 0.1f64..0.85) {
        let d = indicator_diagonal(alpha, rho).unwrap();
        let x = rho * rho;
        let start = ((alpha + 1.0) * x / (1.0 - x)).ceil() as usize;
        for w in d[start.min(d.len() - 1)..].windows(2) {
            prop_assert!(w[1] <= w[0]);
        }
        prop_assert_eq!(d.len(), tail_rule_truncation(alpha, rho).unwrap());
    }

    #[test]
    fn trace_of_indicator_matches_hyperbolic_area(alpha in 0.0f64..400.0, rho in 0.1f64..0.8) {
        let d = indicator_diagonal(alpha, rho).unwrap();
        let trace: f64 = d.iter().sum();
        let x = rho * rho;
        prop_assert!((trace / (alpha + 1.0) - x / (1.0 - x)).abs() < 1e-6 * x / (1.0 - x) + 1e-12);
    }

    #[test]
    fn radial_diagonal_respects_sup_bound(alpha in 0.0f64..50.0, r in 0.05f64..0.95, amp in 0.1f64..3.0) {
        let space = SpaceParams::bergman(alpha).unwrap();
        let sym = SymbolSpec::disc_indicator(SymbolDomain::Disc, r).unwrap();
        let d: Vec<f64> = radial_toeplitz_diagonal(&space, &sym, 64).unwrap().iter().map(|v| amp * v).collect();
        let s = SpectralSummary::from_diagonal(&d, None, &[]);
        prop_assert!(s.op_norm <= amp + 1e-12);
        prop_assert!(s.min_eigenvalue() >= 0.0);
    }

    #[test]
    fn record_errors_are_absolute_differences(c in prop::collection::vec(-5.0f64..5.0, 1..10), t in -5.0f64..5.0) {
        let n = c.len();
        let r = SweepRecord::new("p", BTreeMap::new(), "i", (0..n).map(|i| i as f64).collect(), c.clone(), vec![t; n], Rule::AllWithin { tol: 1.0 });
        for (e, v) in r.errors.iter().zip(&c) {
            prop_assert_eq!(*e, (v - t).abs());
        }
        prop_assert_eq!(r.passed(), c.iter().all(|v| (v - t).abs() <= 1.0));
    }
}
