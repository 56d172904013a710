//! Numerical audit of the inequality chain used to argue that the moving
//! terminal iteration converges to the true extremum.
//!
//! Writing `Δ_k = |x_k - x_{k-K}|` and
//! `a_i(k) = (α-1 choose i) f^(i+1)(x_k) / Γ(i+2-α)`, the chain reads
//!
//! ```text
//! (a) |x_{k+1} - x_k| = μ |D^α f(x_k)|
//! (c)                 = μ |Σ_i a_i(k) Δ^(i+1-α)|
//! (d)                 ≥ μ σ Σ_i Δ^i Δ^(1-α)          σ = sup a_i(k)
//! (e)                 = μ σ Δ^(1-α) / (1 - Δ)
//! (f)                 ≥ d Δ^(1-α)                     d = μσ / (1-ε)
//! ```
//!
//! Every link is evaluated on each tail step of a recorded trajectory, with
//! the supremum taken over a finite index range. The triangle inequality gives
//! the opposite direction of (d) once σ is taken over absolute values; both
//! forms are reported side by side.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functions::DifferentiableFunction;
use crate::optimize::{run, Algorithm, FractionalConfig, Trajectory, Warmup};
use crate::special_fn::{gamma, gen_binomial, GammaMode};

pub const DEFAULT_INDEX_CAP: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuditConfig {
    /// Claimed limit `X`; defaults to the last iterate.
    pub claimed_limit: Option<f64>,
    /// True extremum `x*`.
    pub x_star: f64,
    /// Defaults to `|x* - X| / 2`.
    pub epsilon: Option<f64>,
    /// Tail start `N`; defaults to the smallest `N` with `|x_k - X| < ε` for all `k > N`.
    pub tail_start: Option<usize>,
    /// Largest series index `i` entering the suprema.
    pub index_cap: usize,
}

impl AuditConfig {
    pub fn new(x_star: f64) -> Self {
        Self {
            claimed_limit: None,
            x_star,
            epsilon: None,
            tail_start: None,
            index_cap: DEFAULT_INDEX_CAP,
        }
    }
}

/// The audit parameters after defaults have been filled in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResolvedAudit {
    pub claimed_limit: f64,
    pub x_star: f64,
    pub epsilon: f64,
    pub tail_start: usize,
    pub index_cap: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepFlags {
    /// `Δ < 1`, needed to sum the geometric series in (e).
    pub geometric_ok: bool,
    /// `Δ < ε`, needed for (f).
    pub epsilon_ok: bool,
    /// (c) ≥ (d) with the signed supremum.
    pub paper_direction_holds: bool,
    /// (c) ≤ (d) with the absolute supremum.
    pub corrected_direction_holds: bool,
    /// Every summed term past the index cap was below the truncation tolerance.
    pub tail_within_tol: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepAudit {
    pub k: usize,
    pub x_k: f64,
    pub delta: f64,
    /// μ |D_k| as recorded by the trajectory.
    pub lhs_12a: f64,
    /// μ |Σ a_i Δ^(i+1-α)| recomputed with the shifted index.
    pub series_12c: f64,
    /// μ Σ_{i<=cap} |a_i| Δ^(i+1-α), the first triangle-inequality bound.
    pub triangle_12d: f64,
    /// Σ_{i<=cap} Δ^i Δ^(1-α)
    pub power_sum_12d: f64,
    /// Σ_{i<=cap} Δ^(i+1-α); equal to `power_sum_12d` up to rounding.
    pub power_sum_12c: f64,
    pub bound_12d_paper: f64,
    pub bound_12d_corrected: f64,
    /// Δ^(1-α) / (1-Δ); `None` when the geometric series diverges.
    pub geom_sum_12e: Option<f64>,
    pub bound_12e_paper: Option<f64>,
    pub bound_12f: f64,
    pub flags: StepFlags,
}

/// Per-index summary of the σ coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndexProfile {
    pub i: usize,
    pub max_signed: f64,
    pub min_signed: f64,
    pub max_abs: f64,
    /// Running supremum over indices `<= i`.
    pub running_sigma_paper: f64,
    pub running_sigma_abs: f64,
}

impl IndexProfile {
    /// +1 or -1 when every sampled coefficient at this index has that sign, 0 otherwise.
    pub fn uniform_sign(&self) -> i8 {
        if self.min_signed > 0.0 {
            1
        } else if self.max_signed < 0.0 {
            -1
        } else {
            0
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigmaReport {
    pub sigma_paper: f64,
    pub sigma_abs: f64,
    /// The absolute supremum exceeds the signed one, so the signed σ misses
    /// dominating negative coefficients (or is itself non-positive).
    pub sign_discrepancy: bool,
    pub d_paper: f64,
    pub d_abs: f64,
    pub per_index: Vec<IndexProfile>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct AuditSummary {
    pub audited_steps: usize,
    pub paper_direction_failures: usize,
    pub corrected_direction_failures: usize,
    pub geometric_failures: usize,
    pub epsilon_failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub alpha: f64,
    pub mu: f64,
    pub lag: usize,
    pub resolved: ResolvedAudit,
    pub steps: Vec<StepAudit>,
    pub sigma: SigmaReport,
    pub summary: AuditSummary,
}

/// A step where the claimed direction of (d) is violated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectionWitness {
    pub k: usize,
    pub lhs_12a: f64,
    pub bound_12d_paper: f64,
}

impl AuditReport {
    pub fn paper_direction_witnesses(&self) -> Vec<DirectionWitness> {
        self.steps
            .iter()
            .filter(|s| !s.flags.paper_direction_holds)
            .map(|s| DirectionWitness {
                k: s.k,
                lhs_12a: s.lhs_12a,
                bound_12d_paper: s.bound_12d_paper,
            })
            .collect()
    }
}

/// `a_i = (α-1 choose i) f^(i+1)(x) / Γ(i+2-α)` for `i = 0..count`.
pub fn sigma_coefficients(
    f: &DifferentiableFunction,
    alpha: f64,
    x: f64,
    count: usize,
    mode: GammaMode,
) -> Result<Vec<f64>> {
    (0..count)
        .map(|i| {
            let binom = gen_binomial(alpha - 1.0, i as u32, mode)?;
            let deriv = f.derivative(i + 1, x)?;
            if binom == 0.0 || deriv == 0.0 {
                return Ok(0.0);
            }
            Ok(binom * deriv / gamma((i + 1) as f64 - alpha + 1.0, mode)?)
        })
        .collect()
}

/// `factor * sum`, treating a zero factor as annihilating an infinite sum.
fn scaled(factor: f64, sum: f64) -> f64 {
    if factor == 0.0 {
        0.0
    } else {
        factor * sum
    }
}

fn resolve(traj: &Trajectory, acfg: &AuditConfig) -> Result<ResolvedAudit> {
    let limit = acfg.claimed_limit.unwrap_or_else(|| traj.last());
    let separation = (acfg.x_star - limit).abs();
    let epsilon = acfg.epsilon.unwrap_or(separation / 2.0);
    if !(epsilon > 0.0 && epsilon < separation) {
        return Err(Error::InvalidParameter(format!(
            "need 0 < epsilon < |x* - X| = {separation:e}, got epsilon = {epsilon:e}"
        )));
    }
    if acfg.index_cap == 0 {
        return Err(Error::InvalidParameter("index cap must be positive".into()));
    }
    let tail_start = match acfg.tail_start {
        Some(n) => n,
        None => {
            let outside = traj.iterates.iter().rposition(|x| (x - limit).abs() >= epsilon);
            match outside {
                Some(n) if n + 1 == traj.iterates.len() => {
                    return Err(Error::InsufficientTail(format!(
                        "last iterate {:?} is not within {epsilon:e} of X = {limit:?}",
                        traj.last()
                    )))
                }
                Some(n) => n,
                None => 0,
            }
        }
    };
    Ok(ResolvedAudit {
        claimed_limit: limit,
        x_star: acfg.x_star,
        epsilon,
        tail_start,
        index_cap: acfg.index_cap,
    })
}

/// Evaluates every link of the chain on each fractional step `k > N` of an
/// [`Algorithm::Algo1`] trajectory.
pub fn audit_trajectory(
    traj: &Trajectory,
    f: &DifferentiableFunction,
    cfg: &FractionalConfig,
    acfg: &AuditConfig,
) -> Result<AuditReport> {
    if traj.algorithm != Algorithm::Algo1 {
        return Err(Error::InvalidParameter(format!(
            "the chain audit applies to algo1 trajectories, got {}",
            traj.algorithm.as_str()
        )));
    }
    cfg.validate()?;
    let lag = cfg.lag;
    if traj.iterates.len() < lag + 2 {
        return Err(Error::InsufficientTail(format!(
            "trajectory has {} iterates, need at least K + 2 = {}",
            traj.iterates.len(),
            lag + 2
        )));
    }
    let resolved = resolve(traj, acfg)?;
    let alpha = cfg.alpha;
    let mu = cfg.mu;
    let cap = resolved.index_cap;
    let mode = cfg.gamma_mode;

    // Pass 1: coefficients on every audited step.
    struct Raw {
        k: usize,
        x: f64,
        delta: f64,
        terms_used: usize,
        derivative: f64,
        coeffs: Vec<f64>,
    }
    let mut raw = Vec::new();
    for (k, step) in traj.steps.iter().enumerate().skip(resolved.tail_start + 1) {
        if !step.kind.is_fractional() {
            continue;
        }
        let x = traj.iterates[k];
        let terminal = match k.checked_sub(lag) {
            Some(j) => traj.iterates[j],
            None if cfg.warmup == Warmup::ReplicateX0 => traj.iterates[0],
            None => continue,
        };
        let delta = (x - terminal).abs();
        let count = (cap + 1).max(step.terms_used);
        let coeffs = sigma_coefficients(f, alpha, x, count, mode)?;
        raw.push(Raw {
            k,
            x,
            delta,
            terms_used: step.terms_used,
            derivative: step.derivative,
            coeffs,
        });
    }
    if raw.is_empty() {
        return Err(Error::InsufficientTail(format!(
            "no fractional step after N = {}",
            resolved.tail_start
        )));
    }

    // σ over k > N and i <= cap.
    let mut per_index = Vec::with_capacity(cap + 1);
    let (mut sigma_paper, mut sigma_abs) = (f64::NEG_INFINITY, 0.0f64);
    for i in 0..=cap {
        let column = raw.iter().map(|r| r.coeffs[i]);
        let max_signed = column.clone().fold(f64::NEG_INFINITY, f64::max);
        let min_signed = column.clone().fold(f64::INFINITY, f64::min);
        let max_abs = column.map(f64::abs).fold(0.0, f64::max);
        sigma_paper = sigma_paper.max(max_signed);
        sigma_abs = sigma_abs.max(max_abs);
        per_index.push(IndexProfile {
            i,
            max_signed,
            min_signed,
            max_abs,
            running_sigma_paper: sigma_paper,
            running_sigma_abs: sigma_abs,
        });
    }
    let eps = resolved.epsilon;
    let sigma = SigmaReport {
        sigma_paper,
        sigma_abs,
        sign_discrepancy: sigma_abs > sigma_paper,
        d_paper: mu * sigma_paper / (1.0 - eps),
        d_abs: mu * sigma_abs / (1.0 - eps),
        per_index,
    };

    // Pass 2: both sides of every link.
    let mut summary = AuditSummary::default();
    let steps: Vec<StepAudit> = raw
        .into_iter()
        .map(|r| {
            let delta = r.delta;
            let root = delta.powf(1.0 - alpha);
            let powers: Vec<f64> = (0..r.coeffs.len())
                .map(|i| delta.powf(i as f64 + 1.0 - alpha))
                .collect();
            let reindexed: f64 = r.coeffs[..r.terms_used]
                .iter()
                .zip(&powers)
                .map(|(a, p)| scaled(*a, *p))
                .sum();
            let triangle: f64 = r.coeffs[..=cap]
                .iter()
                .zip(&powers)
                .map(|(a, p)| scaled(a.abs(), *p))
                .sum();
            let power_sum_12d: f64 = (0..=cap).map(|i| delta.powi(i as i32) * root).sum();
            let power_sum_12c: f64 = powers[..=cap].iter().sum();
            let tail_within_tol = r.coeffs[..r.terms_used]
                .iter()
                .zip(&powers)
                .skip(cap + 1)
                .all(|(a, p)| scaled(*a, *p).abs() < cfg.truncation.abs_tol);

            let lhs = mu * r.derivative.abs();
            let bound_paper = scaled(mu * sigma.sigma_paper, power_sum_12d);
            let bound_corrected = scaled(mu * sigma.sigma_abs, power_sum_12d);
            let geometric_ok = delta < 1.0;
            let geom = geometric_ok.then(|| root / (1.0 - delta));
            let flags = StepFlags {
                geometric_ok,
                epsilon_ok: delta < eps,
                paper_direction_holds: lhs >= bound_paper,
                corrected_direction_holds: lhs <= bound_corrected,
                tail_within_tol,
            };
            summary.audited_steps += 1;
            summary.paper_direction_failures += usize::from(!flags.paper_direction_holds);
            summary.corrected_direction_failures += usize::from(!flags.corrected_direction_holds);
            summary.geometric_failures += usize::from(!flags.geometric_ok);
            summary.epsilon_failures += usize::from(!flags.epsilon_ok);
            StepAudit {
                k: r.k,
                x_k: r.x,
                delta,
                lhs_12a: lhs,
                series_12c: mu * reindexed.abs(),
                triangle_12d: mu * triangle,
                power_sum_12d,
                power_sum_12c,
                bound_12d_paper: bound_paper,
                bound_12d_corrected: bound_corrected,
                geom_sum_12e: geom,
                bound_12e_paper: geom.map(|g| scaled(mu * sigma.sigma_paper, g)),
                bound_12f: scaled(sigma.d_paper, root),
                flags,
            }
        })
        .collect();

    Ok(AuditReport {
        alpha,
        mu,
        lag,
        resolved,
        steps,
        sigma,
        summary,
    })
}

/// σ coefficients of `f(x) = -1/(1-x)` sampled on a sub-interval of (0, 1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigmaSignReport {
    pub alpha: f64,
    pub samples: Vec<f64>,
    pub index_cap: usize,
    pub sigma_paper: f64,
    pub sigma_abs: f64,
    pub sign_discrepancy: bool,
    pub per_index: Vec<IndexProfile>,
    /// Every index has a uniform sign and consecutive indices alternate.
    pub alternating: bool,
    /// At every sample, |a_i| is non-decreasing from some index on through the cap.
    pub magnitude_grows: bool,
    /// First index from which |a_i| is non-decreasing at every sample.
    pub growth_onset: Option<usize>,
}

impl SigmaSignReport {
    /// (-1)^(i+1): the sign the coefficients of this function must carry.
    pub fn expected_sign(i: usize) -> i8 {
        if i.is_multiple_of(2) {
            -1
        } else {
            1
        }
    }

    pub fn signs_match_expected(&self) -> bool {
        self.per_index
            .iter()
            .all(|p| p.uniform_sign() == Self::expected_sign(p.i))
    }
}

pub const DEFAULT_SIGMA_SAMPLES: usize = 17;

/// Evaluates the σ coefficients of `-1/(1-x)` for `i <= index_cap` at
/// `samples` evenly spaced points of `[lo, hi] ⊂ (0, 1)`.
pub fn counterexample_sigma_sign(
    alpha: f64,
    range: (f64, f64),
    samples: usize,
    index_cap: usize,
) -> Result<SigmaSignReport> {
    let (lo, hi) = range;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!("alpha = {alpha} outside (0, 1)")));
    }
    if !(0.0 < lo && lo <= hi && hi < 1.0) || samples == 0 {
        return Err(Error::InvalidParameter(format!(
            "sample range [{lo}, {hi}] with {samples} points must lie inside (0, 1)"
        )));
    }
    let f = DifferentiableFunction::rational_pole(-1.0, 1.0);
    let xs: Vec<f64> = if samples == 1 {
        vec![lo]
    } else {
        (0..samples)
            .map(|j| lo + (hi - lo) * j as f64 / (samples - 1) as f64)
            .collect()
    };
    let table = xs
        .iter()
        .map(|&x| sigma_coefficients(&f, alpha, x, index_cap + 1, GammaMode::Extended))
        .collect::<Result<Vec<_>>>()?;

    let mut per_index = Vec::with_capacity(index_cap + 1);
    let (mut sigma_paper, mut sigma_abs) = (f64::NEG_INFINITY, 0.0f64);
    for i in 0..=index_cap {
        let column = table.iter().map(|row| row[i]);
        let max_signed = column.clone().fold(f64::NEG_INFINITY, f64::max);
        let min_signed = column.clone().fold(f64::INFINITY, f64::min);
        let max_abs = column.map(f64::abs).fold(0.0, f64::max);
        sigma_paper = sigma_paper.max(max_signed);
        sigma_abs = sigma_abs.max(max_abs);
        per_index.push(IndexProfile {
            i,
            max_signed,
            min_signed,
            max_abs,
            running_sigma_paper: sigma_paper,
            running_sigma_abs: sigma_abs,
        });
    }
    let alternating = per_index.iter().all(|p| p.uniform_sign() != 0)
        && per_index
            .windows(2)
            .all(|w| w[0].uniform_sign() == -w[1].uniform_sign());
    let growth_onset = table
        .iter()
        .map(|row| {
            // first index from which |a_i| never decreases
            let mut onset = row.len() - 1;
            while onset > 0 && row[onset - 1].abs() <= row[onset].abs() {
                onset -= 1;
            }
            onset
        })
        .max()
        .filter(|&onset| onset < index_cap);

    Ok(SigmaSignReport {
        alpha,
        samples: xs,
        index_cap,
        sigma_paper,
        sigma_abs,
        sign_discrepancy: sigma_abs > sigma_paper,
        per_index,
        alternating,
        magnitude_grows: growth_onset.is_some(),
        growth_onset,
    })
}

/// Grid searched for a step with `|x_k - x_{k-K}| >= 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometricGrid {
    pub mus: Vec<f64>,
    pub x0s: Vec<f64>,
    pub lags: Vec<usize>,
}

impl Default for GeometricGrid {
    fn default() -> Self {
        Self {
            mus: vec![0.1, 0.5, 1.0, 1.5],
            x0s: vec![0.5, 1.0, 2.0, 3.0],
            lags: vec![1, 2, 3],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapWitness {
    pub k: usize,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometricWitness {
    pub mu: f64,
    pub x0: f64,
    pub lag: usize,
    pub trajectory: Trajectory,
    /// Fractional steps whose lag gap is at least one.
    pub offending: Vec<GapWitness>,
}

/// Runs [`Algorithm::Algo1`] over the grid (μ outermost, then x0, then K) and
/// returns the first trajectory containing a fractional step with `Δ >= 1`.
pub fn counterexample_geometric(
    f: &DifferentiableFunction,
    base: &FractionalConfig,
    grid: &GeometricGrid,
) -> Result<GeometricWitness> {
    for &mu in &grid.mus {
        for &x0 in &grid.x0s {
            if !f.domain.contains(x0) {
                continue;
            }
            for &lag in &grid.lags {
                let cfg = FractionalConfig {
                    mu,
                    x0,
                    lag,
                    ..base.clone()
                };
                let trajectory = run(f, &cfg, Algorithm::Algo1)?;
                let offending: Vec<GapWitness> = trajectory
                    .steps
                    .iter()
                    .enumerate()
                    .filter(|(_, s)| s.kind.is_fractional() && s.lag_gap >= 1.0)
                    .map(|(k, s)| GapWitness { k, delta: s.lag_gap })
                    .collect();
                if !offending.is_empty() {
                    return Ok(GeometricWitness {
                        mu,
                        x0,
                        lag,
                        trajectory,
                        offending,
                    });
                }
            }
        }
    }
    Err(Error::NotFound(format!(
        "no step with |x_k - x_(k-K)| >= 1 over {} grid points",
        grid.mus.len() * grid.x0s.len() * grid.lags.len()
    )))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaDomainRow {
    /// Series index `i` of the variable-order update.
    pub i: usize,
    /// α - i + 1, the denominator Gamma argument of (α-1 choose i-1).
    pub gamma_argument: f64,
    pub strict_error: Option<String>,
    pub extended_coefficient: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaDomainReport {
    pub alpha: f64,
    pub rows: Vec<GammaDomainRow>,
}

/// Evaluates `(α-1 choose i-1)` for `i = 2..=6` in both Gamma modes.
pub fn counterexample_gamma_domain(alpha: f64) -> Result<GammaDomainReport> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!("alpha = {alpha} outside (0, 1)")));
    }
    let rows = (2..=6)
        .map(|i| {
            let q = (i - 1) as u32;
            let strict_error = gen_binomial(alpha - 1.0, q, GammaMode::Strict)
                .err()
                .map(|e| e.to_string());
            Ok(GammaDomainRow {
                i,
                gamma_argument: alpha - i as f64 + 1.0,
                strict_error,
                extended_coefficient: gen_binomial(alpha - 1.0, q, GammaMode::Extended)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GammaDomainReport { alpha, rows })
}
