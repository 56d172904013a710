//! Gamma and generalized binomial coefficients in both domain modes.
//!
//! Run with `cargo run --example gamma_binomial`.

use fracgrad::{gamma, gen_binomial, GammaMode};

fn main() {
    println!("{:>6} {:>24} {:>24}", "x", "strict", "extended");
    for x in [2.5, 1.0, 0.5, -0.5, -1.5, -2.0] {
        let show = |mode| match gamma(x, mode) {
            Ok(v) => format!("{v:.17e}"),
            Err(e) => e.to_string(),
        };
        println!(
            "{x:>6} {:>24} {:>24}",
            show(GammaMode::Strict),
            show(GammaMode::Extended)
        );
    }

    // (α-1 choose q) for α = 0.5: every q >= 1 needs Γ at a non-positive argument.
    println!();
    for q in 0..6 {
        let strict = gen_binomial(-0.5, q, GammaMode::Strict);
        let extended = gen_binomial(-0.5, q, GammaMode::Extended).unwrap();
        match strict {
            Ok(v) => println!("q = {q}: {v} in both modes"),
            Err(e) => println!("q = {q}: extended {extended}, strict fails: {e}"),
        }
    }
}
