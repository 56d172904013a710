//! The three counterexamples: σ sign for `-1/(1-x)`, a lag gap of at least
//! one, and the Gamma domain of the variable-order coefficients.
//!
//! Run with `cargo run --example counterexamples`.

use fracgrad::audit::{
    counterexample_gamma_domain, counterexample_geometric, counterexample_sigma_sign, GeometricGrid,
};
use fracgrad::optimize::FractionalConfig;
use fracgrad::DifferentiableFunction;

fn main() -> fracgrad::Result<()> {
    let sigma = counterexample_sigma_sign(0.5, (0.1, 0.9), 17, 12)?;
    println!("f(x) = -1/(1-x), alpha = 0.5, x in [0.1, 0.9]");
    println!(
        "  signed sup = {:e}, abs sup = {:e}",
        sigma.sigma_paper, sigma.sigma_abs
    );
    for p in &sigma.per_index {
        println!(
            "  i = {:>2}  sign {:+}  max |a_i| = {:.3e}",
            p.i,
            p.uniform_sign(),
            p.max_abs
        );
    }
    println!(
        "  alternating: {}, magnitude grows: {}",
        sigma.alternating, sigma.magnitude_grows
    );

    let square = DifferentiableFunction::polynomial(vec![0.0, 0.0, 1.0]);
    let w = counterexample_geometric(&square, &FractionalConfig::default(), &GeometricGrid::default())?;
    println!("\nx^2 with mu = {}, x0 = {}, K = {}:", w.mu, w.x0, w.lag);
    for g in &w.offending {
        println!("  step {}: |x_k - x_(k-K)| = {}", g.k, g.delta);
    }

    let table = counterexample_gamma_domain(0.5)?;
    println!("\n(alpha - 1 choose i - 1) for alpha = 0.5:");
    for row in &table.rows {
        println!(
            "  i = {}  Γ argument {:>4}  extended {:>9}  strict: {}",
            row.i,
            row.gamma_argument,
            row.extended_coefficient,
            row.strict_error.as_deref().unwrap_or("ok")
        );
    }
    Ok(())
}
