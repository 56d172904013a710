//! Evaluates both sides of every link of the convergence inequality chain
//! along a moving-terminal trajectory on `x^2`.
//!
//! Run with `cargo run --example audit_chain`.

use fracgrad::audit::{audit_trajectory, AuditConfig};
use fracgrad::io::audit_csv;
use fracgrad::optimize::{run, Algorithm, FractionalConfig, StopRule};
use fracgrad::DifferentiableFunction;

fn main() -> fracgrad::Result<()> {
    let f = DifferentiableFunction::polynomial(vec![0.0, 0.0, 1.0]);
    let cfg = FractionalConfig {
        alpha: 0.5,
        mu: 0.1,
        lag: 1,
        x0: 2.0,
        stop: StopRule {
            step_tol: 1e-12,
            max_iters: 200,
        },
        ..Default::default()
    };
    let traj = run(&f, &cfg, Algorithm::Algo1)?;

    // Treat the last iterate as the claimed limit X and 0 as the true minimiser.
    let report = audit_trajectory(&traj, &f, &cfg, &AuditConfig::new(0.0))?;
    let r = &report.resolved;
    println!(
        "X = {:e}, x* = {}, epsilon = {:e}, N = {}",
        r.claimed_limit, r.x_star, r.epsilon, r.tail_start
    );
    println!(
        "sigma (signed sup) = {:e}, sigma (abs sup) = {:e}",
        report.sigma.sigma_paper, report.sigma.sigma_abs
    );
    let s = &report.summary;
    println!(
        "{} steps audited: lower bound fails on {}, triangle bound fails on {}, |delta| >= 1 on {}, |delta| >= epsilon on {}",
        s.audited_steps, s.paper_direction_failures, s.corrected_direction_failures, s.geometric_failures, s.epsilon_failures
    );
    if let Some(w) = report.paper_direction_witnesses().first() {
        println!(
            "first failing step k = {}: mu|D| = {:e} < claimed lower bound {:e}",
            w.k, w.lhs_12a, w.bound_12d_paper
        );
    }

    println!("\nfirst rows of the per-step table:");
    for line in audit_csv(&report).lines().take(4) {
        println!("{line}");
    }
    Ok(())
}
