//! CSV and JSON files for trajectories and audit reports.
//!
//! Numbers in CSV are written with 17 significant digits (`{:.16e}`), which
//! round-trips every finite `f64` exactly. Lines end in `\n` and the decimal
//! separator is always `.`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::audit::AuditReport;
use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::optimize::{Algorithm, StepKind, StepRecord, TerminalStatus, Trajectory};

pub const TRAJECTORY_HEADER: &str = "k,x_k,D_k,terms_used,series_status,lag_gap";

pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut out = String::with_capacity(64 * traj.iterates.len());
    out.push_str(TRAJECTORY_HEADER);
    out.push('\n');
    for (k, x) in traj.iterates.iter().enumerate() {
        match traj.steps.get(k) {
            Some(s) => {
                let _ = writeln!(
                    out,
                    "{k},{},{},{},{},{}",
                    fmt_num(*x),
                    fmt_num(s.derivative),
                    s.terms_used,
                    s.kind.as_str(),
                    fmt_num(s.lag_gap)
                );
            }
            None => {
                let _ = writeln!(out, "{k},{},,,,", fmt_num(*x));
            }
        }
    }
    out
}

fn csv_err(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::InvalidParameter(format!("trajectory csv line {line}: {msg}"))
}

/// Reads iterates and step records back from [`trajectory_csv`] output.
pub fn parse_trajectory_csv(text: &str) -> Result<(Vec<f64>, Vec<StepRecord>)> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == TRAJECTORY_HEADER => {}
        _ => return Err(csv_err(1, format!("expected header `{TRAJECTORY_HEADER}`"))),
    }
    let mut iterates = Vec::new();
    let mut steps = Vec::new();
    let mut finished = false;
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        if finished {
            return Err(csv_err(line_no, "rows after the final iterate"));
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 6 {
            return Err(csv_err(line_no, format!("expected 6 columns, got {}", cols.len())));
        }
        let k: usize = cols[0].parse().map_err(|_| csv_err(line_no, "bad index"))?;
        if k != iterates.len() {
            return Err(csv_err(line_no, format!("expected k = {}, got {k}", iterates.len())));
        }
        let num = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| csv_err(line_no, format!("bad number `{s}`")))
        };
        iterates.push(num(cols[1])?);
        if cols[2].is_empty() {
            finished = true;
            continue;
        }
        steps.push(StepRecord {
            derivative: num(cols[2])?,
            terms_used: cols[3].parse().map_err(|_| csv_err(line_no, "bad terms_used"))?,
            kind: StepKind::parse(cols[4]).ok_or_else(|| csv_err(line_no, format!("bad status `{}`", cols[4])))?,
            lag_gap: num(cols[5])?,
        });
    }
    if iterates.is_empty() || !finished {
        return Err(csv_err(0, "missing final iterate row"));
    }
    Ok((iterates, steps))
}

/// JSON companion of a trajectory CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySidecar {
    pub config: ExperimentConfig,
    pub algorithm: Algorithm,
    pub terminal_status: TerminalStatus,
    pub terminal_detail: Option<String>,
    pub steps: usize,
    pub final_iterate: f64,
    /// Set when an order-one run is used as a gradient-descent baseline,
    /// outside the strictly fractional range 0 < α < 1.
    pub order_one_extension: bool,
}

impl TrajectorySidecar {
    pub fn new(config: &ExperimentConfig, traj: &Trajectory) -> Self {
        Self {
            config: config.clone(),
            algorithm: traj.algorithm,
            terminal_status: traj.terminal_status,
            terminal_detail: traj.terminal_detail.clone(),
            steps: traj.steps.len(),
            final_iterate: traj.last(),
            order_one_extension: traj.algorithm != Algorithm::ClassicalGd && config.fractional.alpha == 1.0,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("sidecar serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidParameter(format!("trajectory sidecar: {e}")))
    }

    /// Rebuilds the trajectory from this sidecar and its CSV.
    pub fn trajectory(&self, csv: &str) -> Result<Trajectory> {
        let (iterates, steps) = parse_trajectory_csv(csv)?;
        if steps.len() != self.steps {
            return Err(Error::InvalidParameter(format!(
                "sidecar lists {} steps, csv holds {}",
                self.steps,
                steps.len()
            )));
        }
        Ok(Trajectory {
            algorithm: self.algorithm,
            iterates,
            steps,
            terminal_status: self.terminal_status,
            terminal_detail: self.terminal_detail.clone(),
        })
    }
}

pub const AUDIT_HEADER: &str = "k,x_k,delta,lhs_12a,series_12c,triangle_12d,bound_12d_paper,bound_12d_corrected,\
geom_sum_12e,bound_12e_paper,bound_12f,geometric_ok,epsilon_ok,paper_direction_holds,\
corrected_direction_holds,tail_within_tol";

pub fn audit_csv(report: &AuditReport) -> String {
    let opt = |v: Option<f64>| v.map(fmt_num).unwrap_or_default();
    let mut out = String::new();
    out.push_str(AUDIT_HEADER);
    out.push('\n');
    for s in &report.steps {
        let f = &s.flags;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            s.k,
            fmt_num(s.x_k),
            fmt_num(s.delta),
            fmt_num(s.lhs_12a),
            fmt_num(s.series_12c),
            fmt_num(s.triangle_12d),
            fmt_num(s.bound_12d_paper),
            fmt_num(s.bound_12d_corrected),
            opt(s.geom_sum_12e),
            opt(s.bound_12e_paper),
            fmt_num(s.bound_12f),
            f.geometric_ok,
            f.epsilon_ok,
            f.paper_direction_holds,
            f.corrected_direction_holds,
            f.tail_within_tol
        );
    }
    out
}

pub fn audit_json(report: &AuditReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("audit report serializes");
    s.push('\n');
    s
}
