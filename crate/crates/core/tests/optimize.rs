use std::path::Path;

use fracgrad::config::ExperimentConfig;
use fracgrad::functions::{DifferentiableFunction, EvaluationPoint, OrderSchedule};
use fracgrad::io::{trajectory_csv, TrajectorySidecar};
use fracgrad::optimize::{run, Algorithm, FractionalConfig, StepKind, StopRule, TerminalStatus, Warmup};
use fracgrad::special_fn::GammaMode;
use proptest::prelude::*;

fn load(name: &str) -> ExperimentConfig {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name);
    ExperimentConfig::parse(&std::fs::read_to_string(path).unwrap(), GammaMode::Extended).unwrap()
}

#[test]
fn algo1_shifted_quadratic_matches_golden_file() {
    let cfg = load("algo1_shifted_quadratic.cfg");
    let traj = run(&cfg.function, &cfg.fractional, cfg.algorithm).unwrap();
    let golden_path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/algo1_shifted_quadratic.csv");
    let golden = std::fs::read_to_string(golden_path).unwrap();
    assert_eq!(trajectory_csv(&traj), golden);
    // Distance to the minimiser after 300 steps, as frozen in the golden file.
    assert!((traj.last() - 3.0).abs() < 0.07);
}

#[test]
fn classical_gd_config_reaches_minimiser() {
    let cfg = load("gd_shifted_quadratic.cfg");
    let traj = run(&cfg.function, &cfg.fractional, cfg.algorithm).unwrap();
    assert_eq!(traj.terminal_status, TerminalStatus::StoppedByTolerance);
    assert!((traj.last() - 3.0).abs() < 1e-8);
}

#[test]
fn fixed_terminal_iteration_settles_off_the_minimiser() {
    // With a fixed terminal the iteration stops where the fractional
    // derivative vanishes, not where f' does.
    let cfg = load("algo3_sigmoid_extended.cfg");
    let traj = run(&cfg.function, &cfg.fractional, cfg.algorithm).unwrap();
    assert_eq!(traj.terminal_status, TerminalStatus::StoppedByTolerance);
    assert!(traj.last().abs() > 0.1);
}

#[test]
fn order_evaluation_point_changes_the_run() {
    let f = DifferentiableFunction::polynomial(vec![0.0, 0.0, 1.0]);
    let base = OrderSchedule::sigmoidal(0.2, 0.8, 0.5, 4.0).unwrap();
    let runs: Vec<Vec<f64>> = [
        EvaluationPoint::AtCurrentIterate,
        EvaluationPoint::AtLowerTerminal,
        EvaluationPoint::Frozen { x0: 2.0 },
    ]
    .into_iter()
    .map(|at| {
        let cfg = FractionalConfig {
            schedule: Some(base.evaluated_at(at)),
            lower_terminal: -1.0,
            stop: StopRule {
                step_tol: 1e-12,
                max_iters: 20,
            },
            ..Default::default()
        };
        run(&f, &cfg, Algorithm::Algo3).unwrap().iterates
    })
    .collect();
    assert_ne!(runs[0], runs[1]);
    assert_ne!(runs[0], runs[2]);
    assert_ne!(runs[1], runs[2]);
}

#[test]
fn sidecar_round_trips_the_trajectory() {
    let cfg = load("witness_direction.cfg");
    let traj = run(&cfg.function, &cfg.fractional, cfg.algorithm).unwrap();
    let sidecar = TrajectorySidecar::new(&cfg, &traj);
    let parsed = TrajectorySidecar::from_json(&sidecar.to_json()).unwrap();
    assert_eq!(parsed, sidecar);
    assert_eq!(parsed.trajectory(&trajectory_csv(&traj)).unwrap(), traj);
}

fn arb_function() -> impl Strategy<Value = DifferentiableFunction> {
    prop_oneof![
        proptest::collection::vec(-2.0f64..2.0, 1..6).prop_map(DifferentiableFunction::polynomial),
        (0.2f64..2.0, -3.0f64..3.0).prop_map(|(s, x)| DifferentiableFunction::shifted_quadratic(x, s)),
        (0.1f64..1.0, -1.0f64..1.0).prop_map(|(a, b)| DifferentiableFunction::exponential(a, b)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn update_identity_and_determinism(
        f in arb_function(),
        alpha in 0.05f64..1.0,
        mu in 0.01f64..0.5,
        lag in 1usize..4,
        x0 in -2.0f64..2.0,
        replicate in any::<bool>(),
        algo3 in any::<bool>(),
    ) {
        let cfg = FractionalConfig {
            alpha,
            mu,
            lag,
            x0,
            lower_terminal: x0 - 1.0,
            warmup: if replicate { Warmup::ReplicateX0 } else { Warmup::GdBootstrap },
            stop: StopRule { step_tol: 1e-12, max_iters: 40 },
            ..Default::default()
        };
        let algorithm = if algo3 { Algorithm::Algo3 } else { Algorithm::Algo1 };
        let traj = run(&f, &cfg, algorithm).unwrap();
        prop_assert_eq!(traj.iterates.len(), traj.steps.len() + 1);
        for (k, step) in traj.steps.iter().enumerate() {
            let next = traj.iterates[k + 1];
            prop_assert_eq!(next.to_bits(), (traj.iterates[k] - mu * step.derivative).to_bits());
        }
        let again = run(&f, &cfg, algorithm).unwrap();
        prop_assert_eq!(trajectory_csv(&traj), trajectory_csv(&again));
    }

    #[test]
    fn order_one_moving_terminal_is_gradient_descent(
        coeffs in proptest::collection::vec(-2.0f64..2.0, 1..6),
        mu in 0.01f64..0.3,
        lag in 1usize..4,
        x0 in -1.5f64..1.5,
        replicate in any::<bool>(),
    ) {
        let f = DifferentiableFunction::polynomial(coeffs);
        let cfg = FractionalConfig {
            alpha: 1.0,
            mu,
            lag,
            x0,
            warmup: if replicate { Warmup::ReplicateX0 } else { Warmup::GdBootstrap },
            stop: StopRule { step_tol: 1e-12, max_iters: 60 },
            ..Default::default()
        };
        let frac = run(&f, &cfg, Algorithm::Algo1).unwrap();
        let gd = run(&f, &cfg, Algorithm::ClassicalGd).unwrap();
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        prop_assert_eq!(bits(&frac.iterates), bits(&gd.iterates));
        let blew_up = |s: TerminalStatus| matches!(s, TerminalStatus::Diverged | TerminalStatus::SeriesDivergence);
        if !blew_up(gd.terminal_status) {
            prop_assert_eq!(frac.terminal_status, gd.terminal_status);
        }
    }
}

#[test]
fn warmup_steps_are_labelled() {
    let f = DifferentiableFunction::shifted_quadratic(3.0, 1.0);
    let cfg = FractionalConfig {
        lag: 3,
        x0: 0.0,
        stop: StopRule {
            step_tol: 0.0,
            max_iters: 6,
        },
        ..Default::default()
    };
    let traj = run(&f, &cfg, Algorithm::Algo1).unwrap();
    let kinds: Vec<StepKind> = traj.steps.iter().map(|s| s.kind).collect();
    assert!(kinds[..3].iter().all(|k| *k == StepKind::Warmup));
    assert!(kinds[3..].iter().all(|k| k.is_fractional()));
    // step k = 3 uses x_0 as its terminal
    assert_eq!(traj.steps[3].lag_gap, (traj.iterates[3] - traj.iterates[0]).abs());
}
