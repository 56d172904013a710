//! Fractional descent iterations.
//!
//! * [`Algorithm::Algo1`]: `x_{k+1} = x_k - μ D^α_{x_{k-K}} f(x_k)`, the lower
//!   terminal trailing the iterate by `K` steps.
//! * [`Algorithm::Algo3`]: fixed lower terminal `c` and a state-dependent
//!   order α(x), held constant across the series terms of one step.
//! * [`Algorithm::ClassicalGd`]: plain gradient descent baseline.
//!
//! Every step is recorded so that `x_{k+1} = x_k - μ D_k` holds bit-for-bit
//! for the stored `D_k`.

use serde::{Deserialize, Serialize};

use crate::caputo::{series_at_gap, SeriesResult, SeriesStatus, TruncationPolicy};
use crate::error::{Error, Result};
use crate::functions::{DifferentiableFunction, EvaluationPoint, OrderSchedule, OrderShape};
use crate::special_fn::GammaMode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Algo1,
    Algo3,
    ClassicalGd,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Algo1 => "algo1",
            Algorithm::Algo3 => "algo3",
            Algorithm::ClassicalGd => "classical_gd",
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "algo1" => Ok(Algorithm::Algo1),
            "algo3" => Ok(Algorithm::Algo3),
            "classical_gd" | "gd" => Ok(Algorithm::ClassicalGd),
            other => Err(Error::InvalidParameter(format!("unknown algorithm `{other}`"))),
        }
    }
}

/// How the lagged terminals `x_{k-K}` are supplied for the first `K` steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Warmup {
    /// `x_j = x0` for every `j < 0`. The first step then has a zero lag gap,
    /// so the fractional derivative vanishes and the iteration cannot leave
    /// `x0` unless `α = 1`.
    ReplicateX0,
    /// The first `K` steps are classical gradient steps.
    #[default]
    GdBootstrap,
}

/// What to do when the iterate sits below its lower terminal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TerminalOrdering {
    /// Evaluate the series with `|x - c|` as the power base. The leading
    /// term then carries the sign of `f'(x)`, so the step still descends.
    #[default]
    SignedSymmetric,
    HardError,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StopRule {
    pub step_tol: f64,
    pub max_iters: usize,
}

impl Default for StopRule {
    fn default() -> Self {
        Self {
            step_tol: 1e-12,
            max_iters: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FractionalConfig {
    /// Fixed order for [`Algorithm::Algo1`]. `1.0` reduces to gradient descent.
    pub alpha: f64,
    /// Variable order for [`Algorithm::Algo3`]; `None` means constant `alpha`.
    pub schedule: Option<OrderSchedule>,
    pub mu: f64,
    /// Terminal lag `K`.
    pub lag: usize,
    /// Fixed lower terminal `c` for [`Algorithm::Algo3`].
    pub lower_terminal: f64,
    pub x0: f64,
    pub warmup: Warmup,
    pub terminal_ordering: TerminalOrdering,
    pub truncation: TruncationPolicy,
    pub gamma_mode: GammaMode,
    pub stop: StopRule,
}

impl Default for FractionalConfig {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            schedule: None,
            mu: 0.1,
            lag: 1,
            lower_terminal: 0.0,
            x0: 1.0,
            warmup: Warmup::default(),
            terminal_ordering: TerminalOrdering::default(),
            truncation: TruncationPolicy::default(),
            gamma_mode: GammaMode::Extended,
            stop: StopRule::default(),
        }
    }
}

impl FractionalConfig {
    // Negated comparisons also reject NaN.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return bad(format!("alpha = {} outside (0, 1]", self.alpha));
        }
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return bad(format!("mu = {} must be positive", self.mu));
        }
        if self.lag == 0 {
            return bad("lag K must be at least 1".into());
        }
        if !self.x0.is_finite() || !self.lower_terminal.is_finite() {
            return bad("x0 and lower_terminal must be finite".into());
        }
        if !(self.stop.step_tol >= 0.0) || self.stop.max_iters == 0 {
            return bad(format!("stop rule {:?}", self.stop));
        }
        if let Some(s) = &self.schedule {
            OrderSchedule::new(s.shape, s.evaluate_at)?;
        }
        self.truncation.validate()
    }

    /// The order schedule used by [`Algorithm::Algo3`].
    pub fn order_schedule(&self) -> OrderSchedule {
        self.schedule.unwrap_or(OrderSchedule {
            shape: OrderShape::Constant { alpha: self.alpha },
            evaluate_at: EvaluationPoint::AtCurrentIterate,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepKind {
    Series(SeriesStatus),
    /// Gradient step taken to fill the terminal history.
    Warmup,
    /// Baseline gradient step.
    Gradient,
}

impl StepKind {
    pub fn as_str(self) -> &'static str {
        match self {
            StepKind::Series(s) => s.as_str(),
            StepKind::Warmup => "warmup_gradient",
            StepKind::Gradient => "gradient",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        use SeriesStatus::*;
        Some(match s {
            "warmup_gradient" => StepKind::Warmup,
            "gradient" => StepKind::Gradient,
            "converged_by_tolerance" => StepKind::Series(ConvergedByTolerance),
            "exact_finite" => StepKind::Series(ExactFinite),
            "truncated_at_max" => StepKind::Series(TruncatedAtMax),
            "divergence_suspected" => StepKind::Series(DivergenceSuspected),
            _ => return None,
        })
    }

    pub fn is_fractional(self) -> bool {
        matches!(self, StepKind::Series(_))
    }
}

/// One update `x_{k+1} = x_k - μ derivative`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub derivative: f64,
    pub terms_used: usize,
    pub kind: StepKind,
    /// `|x_k - terminal|`; zero for gradient steps.
    pub lag_gap: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminalStatus {
    StoppedByTolerance,
    MaxIters,
    /// A Gamma evaluation failed (strict-mode domain, pole or overflow).
    SeriesDomainError,
    SeriesDivergence,
    /// Iterate below its terminal under [`TerminalOrdering::HardError`].
    TerminalOrderError,
    /// An iterate left the function's domain.
    FunctionDomainError,
    /// The next iterate is not a finite number.
    Diverged,
}

impl TerminalStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            TerminalStatus::StoppedByTolerance => "stopped_by_tolerance",
            TerminalStatus::MaxIters => "max_iters",
            TerminalStatus::SeriesDomainError => "series_domain_error",
            TerminalStatus::SeriesDivergence => "series_divergence",
            TerminalStatus::TerminalOrderError => "terminal_order_error",
            TerminalStatus::FunctionDomainError => "function_domain_error",
            TerminalStatus::Diverged => "diverged",
        }
    }

    fn from_error(e: &Error) -> Self {
        match e {
            Error::Gamma(_) => TerminalStatus::SeriesDomainError,
            Error::UpperBelowTerminal { .. } => TerminalStatus::TerminalOrderError,
            _ => TerminalStatus::FunctionDomainError,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub algorithm: Algorithm,
    /// `x_0 ..= x_T`.
    pub iterates: Vec<f64>,
    /// One record per update; `steps.len() + 1 == iterates.len()`.
    pub steps: Vec<StepRecord>,
    pub terminal_status: TerminalStatus,
    /// Error message for runs ended by an error.
    pub terminal_detail: Option<String>,
}

impl Trajectory {
    pub fn last(&self) -> f64 {
        *self.iterates.last().expect("trajectory always holds x0")
    }

    pub fn len_steps(&self) -> usize {
        self.steps.len()
    }
}

fn series_step(
    f: &DifferentiableFunction,
    cfg: &FractionalConfig,
    alpha: f64,
    terminal: f64,
    x: f64,
) -> Result<(f64, StepRecord)> {
    f.check_domain(terminal)?;
    if x < terminal && cfg.terminal_ordering == TerminalOrdering::HardError {
        return Err(Error::UpperBelowTerminal {
            upper: x,
            lower: terminal,
        });
    }
    let gap = (x - terminal).abs();
    let SeriesResult {
        value,
        terms_used,
        status,
        ..
    } = series_at_gap(f, alpha, x, gap, &cfg.truncation, cfg.gamma_mode, false)?;
    let record = StepRecord {
        derivative: value,
        terms_used,
        kind: StepKind::Series(status),
        lag_gap: gap,
    };
    Ok((x - cfg.mu * value, record))
}

/// One fractional step with moving terminal. `history` holds
/// `x_{k-K}, ..., x_k` (length `K + 1`).
pub fn algo1_step(f: &DifferentiableFunction, cfg: &FractionalConfig, history: &[f64]) -> Result<(f64, StepRecord)> {
    let (&x, &terminal) = match (history.last(), history.first()) {
        (Some(x), Some(t)) if history.len() == cfg.lag + 1 => (x, t),
        _ => {
            return Err(Error::InvalidParameter(format!(
                "algo1 history must hold K + 1 = {} iterates, got {}",
                cfg.lag + 1,
                history.len()
            )))
        }
    };
    series_step(f, cfg, cfg.alpha, terminal, x)
}

/// One variable-order step with the fixed terminal `cfg.lower_terminal`.
pub fn algo3_step(f: &DifferentiableFunction, cfg: &FractionalConfig, x: f64) -> Result<(f64, StepRecord)> {
    let c = cfg.lower_terminal;
    let alpha = cfg.order_schedule().alpha(x, c);
    series_step(f, cfg, alpha, c, x)
}

/// One classical gradient step.
pub fn gd_step(f: &DifferentiableFunction, mu: f64, x: f64, kind: StepKind) -> Result<(f64, StepRecord)> {
    let d = f.derivative(1, x)?;
    Ok((
        x - mu * d,
        StepRecord {
            derivative: d,
            terms_used: 1,
            kind,
            lag_gap: 0.0,
        },
    ))
}

/// Iterates `algorithm` from `cfg.x0` until the stop rule fires or a step
/// fails. Invalid configurations are rejected up front; everything that goes
/// wrong during the run is reported through [`Trajectory::terminal_status`].
pub fn run(f: &DifferentiableFunction, cfg: &FractionalConfig, algorithm: Algorithm) -> Result<Trajectory> {
    cfg.validate()?;
    f.check_domain(cfg.x0)?;
    let mut iterates = vec![cfg.x0];
    let mut steps = Vec::new();
    let mut detail = None;
    let lag = cfg.lag;

    let status = loop {
        if steps.len() >= cfg.stop.max_iters {
            break TerminalStatus::MaxIters;
        }
        let k = iterates.len() - 1;
        let x = iterates[k];
        let outcome = match algorithm {
            Algorithm::ClassicalGd => gd_step(f, cfg.mu, x, StepKind::Gradient),
            Algorithm::Algo3 => algo3_step(f, cfg, x),
            Algorithm::Algo1 if k < lag && cfg.warmup == Warmup::GdBootstrap => gd_step(f, cfg.mu, x, StepKind::Warmup),
            Algorithm::Algo1 => {
                let history: Vec<f64> = (0..=lag)
                    .map(|j| (k + j).checked_sub(lag).map_or(cfg.x0, |idx| iterates[idx]))
                    .collect();
                algo1_step(f, cfg, &history)
            }
        };
        let (next, record) = match outcome {
            Ok(step) => step,
            Err(e) => {
                detail = Some(e.to_string());
                break TerminalStatus::from_error(&e);
            }
        };
        if record.kind == StepKind::Series(SeriesStatus::DivergenceSuspected) {
            detail = Some(format!("series diverging at x = {x:?}, gap = {:?}", record.lag_gap));
            break TerminalStatus::SeriesDivergence;
        }
        if !next.is_finite() {
            detail = Some(format!("iterate overflow after x = {x:?}"));
            break TerminalStatus::Diverged;
        }
        if let Err(e) = f.check_domain(next) {
            detail = Some(e.to_string());
            break TerminalStatus::FunctionDomainError;
        }
        iterates.push(next);
        steps.push(record);
        if (next - x).abs() < cfg.stop.step_tol {
            break TerminalStatus::StoppedByTolerance;
        }
    };
    Ok(Trajectory {
        algorithm,
        iterates,
        steps,
        terminal_status: status,
        terminal_detail: detail,
    })
}
