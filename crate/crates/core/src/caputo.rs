//! Caputo fractional derivative of order `0 < α <= 1` with lower terminal `c`.
//!
//! [`caputo_series`] sums the Taylor-type expansion
//!
//! ```text
//! D^α f(x) = Σ_{i>=1} (α-1 choose i-1) f^(i)(x) / Γ(i+1-α) · (x-c)^(i-α)
//! ```
//!
//! and [`caputo_quadrature`] evaluates the defining integral
//! `1/Γ(1-α) ∫_c^x f'(t) (x-t)^(-α) dt` directly. The two share no code
//! beyond the derivative oracle and serve as cross-checks of each other.

use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functions::DifferentiableFunction;
use crate::special_fn::{gamma, gen_binomial, GammaMode};

pub const DEFAULT_QUADRATURE_NODES: usize = 400;

/// When to stop summing the series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationPolicy {
    /// Stop once two consecutive terms are smaller than this in magnitude.
    pub abs_tol: f64,
    pub max_terms: usize,
    /// Number of consecutive growing terms that flags a divergent series.
    pub divergence_window: usize,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self {
            abs_tol: 1e-14,
            max_terms: 64,
            divergence_window: 8,
        }
    }
}

impl TruncationPolicy {
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) || self.max_terms == 0 || self.divergence_window == 0 {
            return Err(Error::InvalidParameter(format!("truncation policy {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesStatus {
    ConvergedByTolerance,
    /// Polynomial input: every non-zero term was summed.
    ExactFinite,
    TruncatedAtMax,
    DivergenceSuspected,
}

impl SeriesStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SeriesStatus::ConvergedByTolerance => "converged_by_tolerance",
            SeriesStatus::ExactFinite => "exact_finite",
            SeriesStatus::TruncatedAtMax => "truncated_at_max",
            SeriesStatus::DivergenceSuspected => "divergence_suspected",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesResult {
    pub value: f64,
    pub terms_used: usize,
    pub status: SeriesStatus,
    /// `(i, term_i)` for every summed index, when requested.
    pub term_log: Option<Vec<(usize, f64)>>,
}

fn check_order(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "fractional order {alpha} outside (0, 1]"
        )))
    }
}

/// Series form of the Caputo derivative at `x` with lower terminal `c <= x`.
pub fn caputo_series(
    f: &DifferentiableFunction,
    alpha: f64,
    c: f64,
    x: f64,
    policy: &TruncationPolicy,
    mode: GammaMode,
) -> Result<SeriesResult> {
    checked_series(f, alpha, c, x, policy, mode, false)
}

/// Same as [`caputo_series`], keeping every summed term in `term_log`.
pub fn caputo_series_logged(
    f: &DifferentiableFunction,
    alpha: f64,
    c: f64,
    x: f64,
    policy: &TruncationPolicy,
    mode: GammaMode,
) -> Result<SeriesResult> {
    checked_series(f, alpha, c, x, policy, mode, true)
}

fn checked_series(
    f: &DifferentiableFunction,
    alpha: f64,
    c: f64,
    x: f64,
    policy: &TruncationPolicy,
    mode: GammaMode,
    log: bool,
) -> Result<SeriesResult> {
    f.check_domain(c)?;
    if x < c {
        return Err(Error::UpperBelowTerminal { upper: x, lower: c });
    }
    series_at_gap(f, alpha, x, x - c, policy, mode, log)
}

/// Sums the series at `x` with `gap` standing in for `x - c`. Callers that
/// mirror a terminal lying above `x` pass `|x - c|` here.
pub(crate) fn series_at_gap(
    f: &DifferentiableFunction,
    alpha: f64,
    x: f64,
    gap: f64,
    policy: &TruncationPolicy,
    mode: GammaMode,
    log: bool,
) -> Result<SeriesResult> {
    check_order(alpha)?;
    policy.validate()?;
    f.check_domain(x)?;
    debug_assert!(gap >= 0.0);
    let degree = f.polynomial_degree();
    let mut term_log = log.then(Vec::new);

    if gap == 0.0 && alpha < 1.0 {
        let status = match degree {
            Some(_) => SeriesStatus::ExactFinite,
            None => SeriesStatus::ConvergedByTolerance,
        };
        return Ok(SeriesResult {
            value: 0.0,
            terms_used: 0,
            status,
            term_log,
        });
    }

    let mut sum = 0.0;
    let mut terms_used = 0;
    let mut small_run = 0;
    let mut growth_run = 0;
    let mut prev_abs = f64::NAN;
    let status = loop {
        let i = terms_used + 1;
        if degree.is_some_and(|d| i > d) {
            break SeriesStatus::ExactFinite;
        }
        if i > policy.max_terms {
            break SeriesStatus::TruncatedAtMax;
        }
        let coeff = gen_binomial(alpha - 1.0, (i - 1) as u32, mode)?;
        let deriv = f.derivative(i, x)?;
        let term = if coeff == 0.0 || deriv == 0.0 {
            0.0
        } else {
            let exponent = i as f64 - alpha;
            coeff * deriv * gap.powf(exponent) / gamma(exponent + 1.0, mode)?
        };
        if !term.is_finite() {
            break SeriesStatus::DivergenceSuspected;
        }
        sum += term;
        terms_used = i;
        if let Some(log) = term_log.as_mut() {
            log.push((i, term));
        }
        if degree.is_some() {
            continue;
        }

        let size = term.abs();
        small_run = if size < policy.abs_tol { small_run + 1 } else { 0 };
        if small_run >= 2 {
            break SeriesStatus::ConvergedByTolerance;
        }
        growth_run = if size > prev_abs { growth_run + 1 } else { 0 };
        if growth_run >= policy.divergence_window {
            break SeriesStatus::DivergenceSuspected;
        }
        prev_abs = size;
    };
    Ok(SeriesResult {
        value: sum,
        terms_used,
        status,
        term_log,
    })
}

/// Caputo derivative by direct quadrature of its integral definition.
///
/// The substitution `x - t = u^{1/(1-α)}` removes the `(x-t)^{-α}` kernel
/// singularity, leaving `1/Γ(2-α) ∫_0^{(x-c)^{1-α}} f'(x - u^{1/(1-α)}) du`,
/// which is integrated with an `n_nodes`-point Gauss–Legendre rule.
pub fn caputo_quadrature(f: &DifferentiableFunction, alpha: f64, c: f64, x: f64, n_nodes: usize) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "quadrature needs a fractional order in (0, 1), got {alpha}"
        )));
    }
    f.check_domain(c)?;
    f.check_domain(x)?;
    if x < c {
        return Err(Error::UpperBelowTerminal { upper: x, lower: c });
    }
    if x == c {
        return Ok(0.0);
    }
    let nodes = NonZeroUsize::new(n_nodes)
        .ok_or_else(|| Error::InvalidParameter("quadrature needs at least one node".into()))?;
    let rule = GaussLegendre::new(nodes);
    let power = 1.0 / (1.0 - alpha);
    let upper = (x - c).powf(1.0 - alpha);
    let mut failure = None;
    let integral = rule.integrate(0.0, upper, |u| {
        let t = (x - u.powf(power)).max(c);
        f.derivative(1, t).unwrap_or_else(|e| {
            failure.get_or_insert(e);
            f64::NAN
        })
    });
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(integral / gamma(2.0 - alpha, GammaMode::Extended)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ext(f: &DifferentiableFunction, alpha: f64, c: f64, x: f64) -> SeriesResult {
        caputo_series(f, alpha, c, x, &TruncationPolicy::default(), GammaMode::Extended).unwrap()
    }

    #[test]
    fn identity_half_order() {
        let r = ext(&DifferentiableFunction::polynomial(vec![0.0, 1.0]), 0.5, 0.0, 1.0);
        assert!((r.value - std::f64::consts::FRAC_2_SQRT_PI).abs() < 1e-15);
        assert_eq!(r.terms_used, 1);
        assert_eq!(r.status, SeriesStatus::ExactFinite);
    }

    #[test]
    fn square_half_order() {
        // 2/Γ(1.5) - 2·0.5/Γ(2.5)
        let r = ext(&DifferentiableFunction::polynomial(vec![0.0, 0.0, 1.0]), 0.5, 0.0, 1.0);
        assert!((r.value - 1.504_505_556_1).abs() < 1e-9, "{}", r.value);
        assert_eq!(r.terms_used, 2);
        assert_eq!(r.status, SeriesStatus::ExactFinite);
    }

    #[test]
    fn constant_vanishes() {
        for alpha in [0.1, 0.5, 0.9] {
            let r = ext(&DifferentiableFunction::constant(5.0), alpha, -1.0, 2.0);
            assert_eq!(r.value, 0.0);
            assert_eq!(r.terms_used, 0);
        }
        let r = ext(&DifferentiableFunction::exponential(3.0, 0.0), 0.4, 0.0, 2.0);
        assert_eq!(r.value, 0.0);
        assert_eq!(r.status, SeriesStatus::ConvergedByTolerance);
    }

    #[test]
    fn order_one_is_first_derivative() {
        let f = DifferentiableFunction::polynomial(vec![0.0, 0.0, 1.0]);
        assert_eq!(ext(&f, 1.0, 0.0, 1.0).value, 2.0);
        let g = DifferentiableFunction::exponential(1.5, 0.7);
        assert_eq!(ext(&g, 1.0, -0.3, 0.4).value, g.derivative(1, 0.4).unwrap());
    }

    #[test]
    fn zero_gap_is_zero_below_order_one() {
        let f = DifferentiableFunction::exponential(1.0, 1.0);
        let r = ext(&f, 0.3, 0.25, 0.25);
        assert_eq!(r.value, 0.0);
        assert_eq!(r.terms_used, 0);
        // Order one keeps the (x-c)^0 = 1 factor.
        assert_eq!(ext(&f, 1.0, 0.25, 0.25).value, f.derivative(1, 0.25).unwrap());
    }

    #[test]
    fn strict_mode_fails_on_second_term() {
        let f = DifferentiableFunction::polynomial(vec![0.0, 0.0, 1.0]);
        let err = caputo_series(&f, 0.5, 0.0, 1.0, &TruncationPolicy::default(), GammaMode::Strict).unwrap_err();
        assert_eq!(
            err.to_string(),
            "Γ(-0.5) is undefined in strict mode: argument is not positive"
        );
        let line = DifferentiableFunction::polynomial(vec![0.0, 1.0]);
        let ok = caputo_series(&line, 0.5, 0.0, 1.0, &TruncationPolicy::default(), GammaMode::Strict).unwrap();
        assert!((ok.value - std::f64::consts::FRAC_2_SQRT_PI).abs() < 1e-15);
    }

    #[test]
    fn terminal_above_upper_is_rejected() {
        let f = DifferentiableFunction::polynomial(vec![0.0, 1.0]);
        assert!(matches!(
            caputo_series(&f, 0.5, 1.0, 0.0, &TruncationPolicy::default(), GammaMode::Extended),
            Err(Error::UpperBelowTerminal { .. })
        ));
    }

    #[test]
    fn invalid_order_is_rejected() {
        let f = DifferentiableFunction::polynomial(vec![0.0, 1.0]);
        for alpha in [0.0, -0.5, 1.5, f64::NAN] {
            assert!(caputo_series(&f, alpha, 0.0, 1.0, &TruncationPolicy::default(), GammaMode::Extended).is_err());
        }
    }

    #[test]
    fn pole_far_from_terminal_flags_divergence() {
        // gap 0.8 against distance 0.1 to the pole: terms grow geometrically.
        let f = DifferentiableFunction::rational_pole(-1.0, 1.0);
        let r = ext(&f, 0.5, 0.1, 0.9);
        assert_eq!(r.status, SeriesStatus::DivergenceSuspected);
        // Well inside the radius of convergence.
        let r = ext(&f, 0.5, 0.0, 0.1);
        assert_eq!(r.status, SeriesStatus::ConvergedByTolerance);
    }

    #[test]
    fn max_terms_caps_the_sum() {
        let f = DifferentiableFunction::exponential(1.0, 1.0);
        let policy = TruncationPolicy {
            max_terms: 3,
            ..Default::default()
        };
        let r = caputo_series(&f, 0.5, 0.0, 0.5, &policy, GammaMode::Extended).unwrap();
        assert_eq!(r.status, SeriesStatus::TruncatedAtMax);
        assert_eq!(r.terms_used, 3);
    }

    #[test]
    fn term_log_matches_sum() {
        let f = DifferentiableFunction::exponential(1.0, -1.0);
        let policy = TruncationPolicy::default();
        let r = caputo_series_logged(&f, 0.3, 0.0, 0.7, &policy, GammaMode::Extended).unwrap();
        let log = r.term_log.unwrap();
        assert_eq!(log.len(), r.terms_used);
        assert_eq!(log.iter().map(|(_, t)| t).sum::<f64>(), r.value);
        assert!(log.iter().map(|(i, _)| *i).eq(1..=r.terms_used));
    }

    #[test]
    fn quadrature_closed_forms() {
        let line = DifferentiableFunction::polynomial(vec![0.0, 1.0]);
        let q = caputo_quadrature(&line, 0.5, 0.0, 1.0, 200).unwrap();
        assert!((q - std::f64::consts::FRAC_2_SQRT_PI).abs() < 1e-8);
        let square = DifferentiableFunction::polynomial(vec![0.0, 0.0, 1.0]);
        let q = caputo_quadrature(&square, 0.5, 0.0, 1.0, DEFAULT_QUADRATURE_NODES).unwrap();
        assert!((q - 1.504_505_556_1).abs() < 1e-8);
        let flat = DifferentiableFunction::constant(5.0);
        assert!(caputo_quadrature(&flat, 0.3, 0.0, 2.0, 400).unwrap().abs() < 1e-12);
    }

    #[test]
    fn quadrature_rejects_bad_input() {
        let f = DifferentiableFunction::rational_pole(-1.0, 1.0);
        assert!(caputo_quadrature(&f, 0.5, 0.0, 1.5, 100).is_err());
        assert!(caputo_quadrature(&f, 1.0, 0.0, 0.5, 100).is_err());
        assert!(caputo_quadrature(&f, 0.5, 0.0, 0.5, 0).is_err());
        assert!(caputo_quadrature(&f, 0.5, 0.5, 0.0, 10).is_err());
    }
}
