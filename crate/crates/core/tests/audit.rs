use fracgrad::audit::{
    audit_trajectory, counterexample_geometric, sigma_coefficients, AuditConfig, AuditReport, GeometricGrid,
};
use fracgrad::functions::DifferentiableFunction;
use fracgrad::optimize::{run, Algorithm, FractionalConfig, StopRule, TerminalStatus, Warmup};
use fracgrad::special_fn::GammaMode;
use proptest::prelude::*;
use statrs::function::gamma::gamma as statrs_gamma;

fn audit_all(f: &DifferentiableFunction, cfg: &FractionalConfig) -> Option<AuditReport> {
    let traj = run(f, cfg, Algorithm::Algo1).unwrap();
    let spread = 10.0 * (1.0 + traj.last().abs());
    let acfg = AuditConfig {
        x_star: traj.last() + spread,
        epsilon: Some(spread / 2.0),
        tail_start: Some(0),
        ..AuditConfig::new(0.0)
    };
    audit_trajectory(&traj, f, cfg, &acfg).ok()
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}

#[test]
fn constant_function_has_zero_left_side() {
    let f = DifferentiableFunction::constant(5.0);
    let cfg = FractionalConfig {
        x0: 1.0,
        stop: StopRule {
            step_tol: 0.0,
            max_iters: 10,
        },
        ..Default::default()
    };
    let report = audit_all(&f, &cfg).unwrap();
    assert!(!report.steps.is_empty());
    for s in &report.steps {
        assert_eq!(s.lhs_12a, 0.0);
        assert!(s.flags.corrected_direction_holds);
        assert!(s.flags.paper_direction_holds);
    }
    assert_eq!(report.sigma.sigma_abs, 0.0);
}

#[test]
fn single_term_series_is_its_own_triangle_sum() {
    let f = DifferentiableFunction::polynomial(vec![0.0, 1.0]);
    let cfg = FractionalConfig {
        alpha: 0.4,
        x0: 2.0,
        stop: StopRule {
            step_tol: 0.0,
            max_iters: 30,
        },
        ..Default::default()
    };
    let report = audit_all(&f, &cfg).unwrap();
    for s in &report.steps {
        assert!(close(s.series_12c, s.lhs_12a, 1e-12));
        assert!(close(s.triangle_12d, s.lhs_12a, 1e-12));
        assert!(s.flags.corrected_direction_holds);
    }
    // A single coefficient, 1/Γ(2 - α), is its own supremum.
    let a0 = 1.0 / statrs_gamma(1.6);
    assert!((report.sigma.sigma_abs - a0).abs() < 1e-10);
    assert_eq!(report.sigma.sigma_abs, report.sigma.sigma_paper);
}

#[test]
fn replicated_start_never_leaves_x0() {
    // Zero gap on the first step gives a zero derivative, so x0 is a fixed point.
    let f = DifferentiableFunction::polynomial(vec![0.0, 0.0, 1.0]);
    let cfg = FractionalConfig {
        mu: 0.9,
        x0: 2.0,
        warmup: Warmup::ReplicateX0,
        ..Default::default()
    };
    let traj = run(&f, &cfg, Algorithm::Algo1).unwrap();
    assert_eq!(traj.terminal_status, TerminalStatus::StoppedByTolerance);
    assert!(traj.iterates.iter().all(|&x| x == 2.0));
}

#[test]
fn sigma_coefficients_of_pole_function_match_closed_form() {
    // -1/(1-x): f^(n)(x) = -n! / (1-x)^(n+1)
    let f = DifferentiableFunction::rational_pole(-1.0, 1.0);
    let alpha = 0.5;
    for x in [0.1, 0.5, 0.8] {
        let coeffs = sigma_coefficients(&f, alpha, x, 20, GammaMode::Extended).unwrap();
        for (i, &a) in coeffs.iter().enumerate() {
            let binom: f64 = (0..i).map(|t| (alpha - 1.0 - t as f64) / (t + 1) as f64).product();
            let n = i + 1;
            let deriv = -statrs_gamma(n as f64 + 1.0) / (1.0 - x).powi(n as i32 + 1);
            let expected = binom * deriv / statrs_gamma(i as f64 + 2.0 - alpha);
            assert!(
                (a - expected).abs() <= 1e-9 * expected.abs(),
                "i={i} x={x}: {a} vs {expected}"
            );
            assert_eq!(a.signum(), if i % 2 == 0 { -1.0 } else { 1.0 });
        }
    }
    let a0 = sigma_coefficients(&f, 0.5, 0.5, 1, GammaMode::Extended).unwrap()[0];
    assert!((a0 + 4.5135166684).abs() < 1e-9);
}

#[test]
fn large_step_breaks_geometric_condition() {
    let f = DifferentiableFunction::polynomial(vec![0.0, 0.0, 1.0]);
    let grid = GeometricGrid {
        mus: vec![1.5],
        x0s: vec![3.0],
        lags: vec![1],
    };
    let w = counterexample_geometric(&f, &FractionalConfig::default(), &grid).unwrap();
    assert!(w.offending.iter().all(|g| g.delta >= 1.0));
    let first = w.offending[0];
    // The warmup moves by μ|f'(3)| = 9, the first fractional step sees that gap.
    assert_eq!(w.trajectory.iterates[1], -6.0);
    assert_eq!(first.k, 1);
    assert!((first.delta - 9.0).abs() < 1e-12);
}

fn arb_function() -> impl Strategy<Value = DifferentiableFunction> {
    prop_oneof![
        proptest::collection::vec(-2.0f64..2.0, 2..7).prop_map(DifferentiableFunction::polynomial),
        (0.2f64..2.0, -3.0f64..3.0).prop_map(|(s, x)| DifferentiableFunction::shifted_quadratic(x, s)),
        (0.1f64..1.0, -1.0f64..1.0).prop_map(|(a, b)| DifferentiableFunction::exponential(a, b)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn chain_links_are_consistent(
        f in arb_function(),
        alpha in 0.05f64..0.95,
        mu in 0.01f64..0.3,
        lag in 1usize..4,
        x0 in -2.0f64..2.0,
    ) {
        let cfg = FractionalConfig { alpha, mu, lag, x0, stop: StopRule { step_tol: 1e-12, max_iters: 60 }, ..Default::default() };
        let Some(report) = audit_all(&f, &cfg) else { return Ok(()) };
        let sigma = &report.sigma;
        prop_assert!(sigma.sigma_abs >= 0.0);
        prop_assert!(sigma.sigma_abs >= sigma.sigma_paper);
        let cap = report.resolved.index_cap;
        for s in report.steps.iter().filter(|s| s.lhs_12a.is_finite() && s.delta.is_finite()) {
            prop_assert!(close(s.series_12c, s.lhs_12a, 1e-9), "k={} {} vs {}", s.k, s.series_12c, s.lhs_12a);
            if s.power_sum_12c.is_finite() && s.power_sum_12d.is_finite() {
                prop_assert!(close(s.power_sum_12c, s.power_sum_12d, 1e-12), "{} vs {}", s.power_sum_12c, s.power_sum_12d);
            }
            if s.flags.tail_within_tol {
                prop_assert!(s.lhs_12a <= s.triangle_12d * (1.0 + 1e-12) + cap as f64 * cfg.truncation.abs_tol * mu);
            }
            prop_assert!(s.triangle_12d <= s.bound_12d_corrected * (1.0 + 1e-12));
            prop_assert_eq!(s.flags.geometric_ok, s.delta < 1.0);
            match s.geom_sum_12e {
                Some(g) => {
                    let remainder = s.delta.powf(cap as f64 + 1.0 - alpha) / (1.0 - s.delta);
                    prop_assert!((g - s.power_sum_12c).abs() <= remainder * (1.0 + 1e-9) + 1e-15 * g);
                }
                None => prop_assert!(!s.flags.geometric_ok),
            }
        }
    }
}
