#![allow(dead_code)]

use fracgrad::special_fn::{gamma, GammaMode};

pub fn ref_gamma(x: f64) -> f64 {
    gamma(x, GammaMode::Strict).unwrap()
}

/// Closed-form Caputo derivative of a polynomial: re-expand around the
/// terminal, then D^α (t-c)^m = Γ(m+1)/Γ(m+1-α) (x-c)^(m-α) for m >= 1.
pub fn polynomial_oracle(coeffs: &[f64], alpha: f64, c: f64, x: f64) -> f64 {
    let n = coeffs.len();
    let binom = |j: usize, m: usize| (0..m).fold(1.0, |acc, t| acc * (j - t) as f64 / (t + 1) as f64);
    (1..n)
        .map(|m| {
            let shifted: f64 = (m..n).map(|j| coeffs[j] * binom(j, m) * c.powi((j - m) as i32)).sum();
            shifted * ref_gamma(m as f64 + 1.0) / ref_gamma(m as f64 + 1.0 - alpha) * (x - c).powf(m as f64 - alpha)
        })
        .sum()
}
