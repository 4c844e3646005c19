use proptest::prelude::*;

use qbackflow::backflow::{
    analytic_ddt_path, analytic_ddt_switch, asymptotic_threshold, path_bracket, path_prefactor, switch_bracket,
    switch_prefactor, ControlMode, Dynamics, StatePairParams,
};
use qbackflow::channel::{compose, phi_t_kraus, KrausChannel};
use qbackflow::control::{controlled_output, switch_kraus, ControlConfig, Outcome};
use qbackflow::qmat::{eig_hermitian, trace_distance, ComplexMatrix, DensityOperator, C64};

/// Qubit state from a Bloch vector of length `r ≤ 1`.
fn qubit() -> impl Strategy<Value = DensityOperator> {
    (0.0..=1.0f64, 0.0..std::f64::consts::PI, 0.0..std::f64::consts::TAU).prop_map(|(r, theta, phi)| {
        let (x, y, z) = (r * theta.sin() * phi.cos(), r * theta.sin() * phi.sin(), r * theta.cos());
        let m = ComplexMatrix::from_row_major(
            2,
            &[
                C64::new(0.5 * (1.0 + z), 0.0),
                C64::new(0.5 * x, -0.5 * y),
                C64::new(0.5 * x, 0.5 * y),
                C64::new(0.5 * (1.0 - z), 0.0),
            ],
        )
        .unwrap();
        DensityOperator::new(m).unwrap()
    })
}

/// Random 4×4 density matrix `G G† / tr(G G†)`.
fn ququart() -> impl Strategy<Value = DensityOperator> {
    prop::collection::vec(-1.0..1.0f64, 32).prop_filter_map("degenerate", |v| {
        let entries: Vec<C64> = v.chunks(2).map(|c| C64::new(c[0], c[1])).collect();
        let g = ComplexMatrix::from_row_major(4, &entries).ok()?;
        let m = g.matmul(&g.adjoint()).ok()?;
        let tr = m.trace().re;
        (tr > 1e-3).then(|| DensityOperator::normalized(&m).ok()).flatten()
    })
}

fn channels() -> impl Strategy<Value = KrausChannel> {
    (0.0..6.0f64, 0.0..6.0f64, any::<bool>()).prop_map(|(t1, t2, composed)| {
        let (e, f) = (phi_t_kraus(t1).unwrap(), phi_t_kraus(t2).unwrap());
        if composed {
            compose(&e, &f).unwrap()
        } else {
            e
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn trace_distance_is_a_bounded_metric(r1 in qubit(), r2 in qubit(), r3 in qubit()) {
        let d12 = trace_distance(&r1, &r2).unwrap();
        let d21 = trace_distance(&r2, &r1).unwrap();
        let d13 = trace_distance(&r1, &r3).unwrap();
        let d32 = trace_distance(&r3, &r2).unwrap();
        prop_assert!((d12 - d21).abs() < 1e-14);
        prop_assert!(d12 <= d13 + d32 + 1e-12);
        prop_assert!((-1e-15..=1.0 + 1e-12).contains(&d12));
        prop_assert!(trace_distance(&r1, &r1).unwrap() < 1e-14);
    }

    #[test]
    fn channels_are_contractive(r1 in qubit(), r2 in qubit(), ch in channels()) {
        let before = trace_distance(&r1, &r2).unwrap();
        let after = trace_distance(&ch.apply(&r1).unwrap(), &ch.apply(&r2).unwrap()).unwrap();
        prop_assert!(after <= before + 1e-10);
    }

    #[test]
    fn joint_switch_is_contractive(r1 in ququart(), r2 in ququart(), t1 in 0.0..5.0f64, t2 in 0.0..5.0f64) {
        let s = switch_kraus(&phi_t_kraus(t1).unwrap(), &phi_t_kraus(t2).unwrap()).unwrap();
        let before = trace_distance(&r1, &r2).unwrap();
        let after = trace_distance(&s.apply(&r1).unwrap(), &s.apply(&r2).unwrap()).unwrap();
        prop_assert!(after <= before + 1e-10);
    }

    #[test]
    fn eigenvalues_sum_to_trace(rho in ququart()) {
        let ev = eig_hermitian(rho.matrix()).unwrap();
        prop_assert!((ev.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(ev.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(*ev.last().unwrap() >= -1e-12);
    }

    #[test]
    fn outcome_probabilities_sum_to_one(rho in qubit(), t in 0.0..5.0f64, p in 0.0..=1.0f64, switched in any::<bool>()) {
        let base = if switched { ControlConfig::switch(p) } else { ControlConfig::path(p) }.unwrap();
        let prob = |o: Outcome| match controlled_output(&base.clone().with_outcome(o), &rho, t) {
            Ok(out) => out.probability,
            Err(_) => 0.0,
        };
        prop_assert!((prob(Outcome::Plus) + prob(Outcome::Minus) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn probe_distance_in_unit_interval(a in 0.01..=1.0f64, p in 0.0..=1.0f64, t in 0.0..8.0f64, mode in prop_oneof![Just(ControlMode::Path), Just(ControlMode::Switch)]) {
        let probe = StatePairParams::new(a).unwrap();
        for dynamics in [Dynamics::Bare, Dynamics::controlled(mode, p).unwrap()] {
            let d = dynamics.distance(&probe, t).unwrap();
            prop_assert!((0.0..=1.0 + 1e-12).contains(&d));
        }
    }

    #[test]
    fn thresholds_are_monotone_in_p(p in 0.0..1.0f64, dp in 0.0..0.5f64) {
        let q = (p + dp).min(1.0);
        for mode in [ControlMode::Path, ControlMode::Switch] {
            let lo = asymptotic_threshold(mode, p).unwrap();
            let hi = asymptotic_threshold(mode, q).unwrap();
            prop_assert!(hi >= lo);
            prop_assert!((0.0..=1.0).contains(&lo));
        }
        prop_assert!(asymptotic_threshold(ControlMode::Switch, p).unwrap() <= asymptotic_threshold(ControlMode::Path, p).unwrap());
    }

    #[test]
    fn brackets_decide_the_sign(a in 0.01..0.999f64, p in 0.0..=1.0f64, t in 0.001..6.0f64) {
        prop_assert!(path_prefactor(a, p, t) > 0.0);
        prop_assert!(switch_prefactor(a, p, t) > 0.0);
        let path = analytic_ddt_path(a, p, t);
        let switch = analytic_ddt_switch(a, p, t);
        let pb = path_bracket(a, p, t);
        let sb = switch_bracket(a, p, t);
        if pb.abs() > 1e-9 * (2.0 * t).exp() { prop_assert_eq!(path > 0.0, pb > 0.0); }
        if sb.abs() > 1e-9 * (8.0 * t).exp() { prop_assert_eq!(switch > 0.0, sb > 0.0); }
        let rel = |x: f64, y: f64| (x - y).abs() / x.abs().max(y.abs()).max(1e-300);
        prop_assert!(rel(path, path_prefactor(a, p, t) * pb) < 1e-8 || path.abs() < 1e-14);
        prop_assert!(rel(switch, switch_prefactor(a, p, t) * sb) < 1e-8 || switch.abs() < 1e-14);
    }
}
