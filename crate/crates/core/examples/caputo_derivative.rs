//! Caputo derivative by truncated series, checked against direct quadrature.
//!
//! Run with `cargo run --example caputo_derivative`.

use fracgrad::caputo::caputo_series_logged;
use fracgrad::{caputo_quadrature, caputo_series, DifferentiableFunction, GammaMode, TruncationPolicy};

fn main() -> fracgrad::Result<()> {
    let policy = TruncationPolicy::default();
    let cases = [
        ("x^2", DifferentiableFunction::polynomial(vec![0.0, 0.0, 1.0])),
        ("x^3 - x", DifferentiableFunction::polynomial(vec![0.0, -1.0, 0.0, 1.0])),
        ("exp(1.5 x)", DifferentiableFunction::exponential(1.0, 1.5)),
        ("2 (x - 3)^2", DifferentiableFunction::shifted_quadratic(3.0, 2.0)),
    ];
    println!(
        "{:<12} {:>5} {:>22} {:>22} {:>6} {:>16}",
        "f", "alpha", "series", "quadrature", "terms", "status"
    );
    for (name, f) in &cases {
        for alpha in [0.25, 0.5, 0.9] {
            let s = caputo_series(f, alpha, 0.0, 0.8, &policy, GammaMode::Extended)?;
            let q = caputo_quadrature(f, alpha, 0.0, 0.8, 400)?;
            println!(
                "{name:<12} {alpha:>5} {:>22.15e} {q:>22.15e} {:>6} {:>16}",
                s.value,
                s.terms_used,
                s.status.as_str()
            );
        }
    }

    // Individual terms of a non-terminating series.
    let f = DifferentiableFunction::exponential(1.0, 1.5);
    let logged = caputo_series_logged(&f, 0.5, 0.0, 0.8, &policy, GammaMode::Extended)?;
    println!("\nterms of D^0.5 exp(1.5 x) at x = 0.8:");
    for (i, term) in logged.term_log.unwrap_or_default() {
        println!("  i = {i:>2}  {term:+.6e}");
    }

    // Strict mode refuses the second term.
    let square = &cases[0].1;
    if let Err(e) = caputo_series(square, 0.5, 0.0, 1.0, &policy, GammaMode::Strict) {
        println!("\nstrict mode on x^2: {e}");
    }
    Ok(())
}
