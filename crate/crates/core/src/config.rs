//! Experiment configuration in a flat `key = value` text format.
//!
//! ```text
//! # comments start with '#'
//! function = "sq:3.0,1.0"
//! algorithm = "algo1"
//! alpha = 0.5
//! formats = csv, json
//! ```
//!
//! Strings are double-quoted, numbers are bare, lists are comma-separated.
//! Unknown keys are rejected. [`ExperimentConfig::to_text`] writes every key
//! in a fixed order, and floats in shortest round-trip form, so that
//! parse → write → parse is lossless.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::audit::{AuditConfig, DEFAULT_INDEX_CAP};
use crate::caputo::TruncationPolicy;
use crate::error::{Error, Result};
use crate::functions::{DifferentiableFunction, EvaluationPoint, OrderSchedule, OrderShape};
use crate::optimize::{Algorithm, FractionalConfig, StopRule, TerminalOrdering, Warmup};
use crate::special_fn::GammaMode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(with = "descriptor")]
    pub function: DifferentiableFunction,
    pub algorithm: Algorithm,
    pub fractional: FractionalConfig,
    pub audit: Option<AuditConfig>,
    /// Output path prefix; files are `<output>.csv` and `<output>.json`.
    pub output: String,
    pub formats: Vec<OutputFormat>,
}

mod descriptor {
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::functions::DifferentiableFunction;

    pub fn serialize<S: Serializer>(f: &DifferentiableFunction, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(f)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DifferentiableFunction, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

fn parse_err(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::InvalidParameter(format!("config line {line}: {msg}"))
}

fn unquote(raw: &str) -> &str {
    raw.strip_prefix('"').and_then(|s| s.strip_suffix('"')).unwrap_or(raw)
}

fn number<T: FromStr>(line: usize, key: &str, raw: &str) -> Result<T> {
    raw.parse()
        .map_err(|_| parse_err(line, format!("`{key}` expects a number, got `{raw}`")))
}

fn parse_schedule(raw: &str) -> Result<OrderShape> {
    let (name, params) = raw.split_once(':').unwrap_or((raw, ""));
    let values: Vec<f64> = params
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::InvalidParameter(format!("bad schedule `{raw}`")))?;
    match (name, values.as_slice()) {
        ("constant", &[alpha]) => Ok(OrderShape::Constant { alpha }),
        ("sigmoid", &[alpha_min, alpha_max, center, slope]) => Ok(OrderShape::Sigmoidal {
            alpha_min,
            alpha_max,
            center,
            slope,
        }),
        _ => Err(Error::InvalidParameter(format!(
            "bad schedule `{raw}` (expected constant:a or sigmoid:min,max,center,slope)"
        ))),
    }
}

fn schedule_text(shape: &OrderShape) -> String {
    match shape {
        OrderShape::Constant { alpha } => format!("constant:{alpha:?}"),
        OrderShape::Sigmoidal {
            alpha_min,
            alpha_max,
            center,
            slope,
        } => {
            format!("sigmoid:{alpha_min:?},{alpha_max:?},{center:?},{slope:?}")
        }
    }
}

fn parse_evaluation_point(raw: &str) -> Result<EvaluationPoint> {
    match raw.split_once(':') {
        None if raw == "current" => Ok(EvaluationPoint::AtCurrentIterate),
        None if raw == "terminal" => Ok(EvaluationPoint::AtLowerTerminal),
        Some(("frozen", x)) => x
            .trim()
            .parse()
            .map(|x0| EvaluationPoint::Frozen { x0 })
            .map_err(|_| Error::InvalidParameter(format!("bad frozen point `{raw}`"))),
        _ => Err(Error::InvalidParameter(format!(
            "bad alpha_at `{raw}` (expected current, terminal or frozen:x)"
        ))),
    }
}

fn evaluation_point_text(at: &EvaluationPoint) -> String {
    match at {
        EvaluationPoint::AtCurrentIterate => "current".into(),
        EvaluationPoint::AtLowerTerminal => "terminal".into(),
        EvaluationPoint::Frozen { x0 } => format!("frozen:{x0:?}"),
    }
}

impl ExperimentConfig {
    /// Parses the flat text format. `default_mode` applies when the file has
    /// no `gamma_mode` key.
    pub fn parse(text: &str, default_mode: GammaMode) -> Result<Self> {
        let mut function = None;
        let mut algorithm = Algorithm::Algo1;
        let mut frac = FractionalConfig {
            gamma_mode: default_mode,
            ..FractionalConfig::default()
        };
        let mut shape = None;
        let mut alpha_at = EvaluationPoint::AtCurrentIterate;
        let mut audit_x_star = None;
        let mut audit = AuditConfig::new(f64::NAN);
        let mut audit_keys = false;
        let mut output = String::from("trajectory");
        let mut formats = vec![OutputFormat::Csv, OutputFormat::Json];

        for (idx, raw_line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw_line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, raw) = line
                .split_once('=')
                .ok_or_else(|| parse_err(line_no, format!("expected `key = value`, got `{line}`")))?;
            let key = key.trim();
            let value = unquote(raw.trim());
            let wrap = |e: Error| parse_err(line_no, e);
            match key {
                "function" => function = Some(value.parse::<DifferentiableFunction>().map_err(wrap)?),
                "algorithm" => algorithm = value.parse().map_err(wrap)?,
                "alpha" => frac.alpha = number(line_no, key, value)?,
                "schedule" => shape = Some(parse_schedule(value).map_err(wrap)?),
                "alpha_at" => alpha_at = parse_evaluation_point(value).map_err(wrap)?,
                "mu" => frac.mu = number(line_no, key, value)?,
                "lag" => frac.lag = number(line_no, key, value)?,
                "lower_terminal" => frac.lower_terminal = number(line_no, key, value)?,
                "x0" => frac.x0 = number(line_no, key, value)?,
                "warmup" => {
                    frac.warmup = match value {
                        "replicate_x0" => Warmup::ReplicateX0,
                        "gd_bootstrap" => Warmup::GdBootstrap,
                        other => return Err(parse_err(line_no, format!("unknown warmup `{other}`"))),
                    }
                }
                "terminal_ordering" => {
                    frac.terminal_ordering = match value {
                        "signed_symmetric" => TerminalOrdering::SignedSymmetric,
                        "hard_error" => TerminalOrdering::HardError,
                        other => return Err(parse_err(line_no, format!("unknown terminal_ordering `{other}`"))),
                    }
                }
                "abs_tol" => frac.truncation.abs_tol = number(line_no, key, value)?,
                "max_terms" => frac.truncation.max_terms = number(line_no, key, value)?,
                "divergence_window" => frac.truncation.divergence_window = number(line_no, key, value)?,
                "gamma_mode" => frac.gamma_mode = value.parse().map_err(|e: String| parse_err(line_no, e))?,
                "step_tol" => frac.stop.step_tol = number(line_no, key, value)?,
                "max_iters" => frac.stop.max_iters = number(line_no, key, value)?,
                "audit_x_star" => audit_x_star = Some(number(line_no, key, value)?),
                "audit_limit" => {
                    audit.claimed_limit = Some(number(line_no, key, value)?);
                    audit_keys = true;
                }
                "audit_epsilon" => {
                    audit.epsilon = Some(number(line_no, key, value)?);
                    audit_keys = true;
                }
                "audit_tail_start" => {
                    audit.tail_start = Some(number(line_no, key, value)?);
                    audit_keys = true;
                }
                "audit_index_cap" => {
                    audit.index_cap = number(line_no, key, value)?;
                    audit_keys = true;
                }
                "output" => output = value.to_string(),
                "formats" => {
                    formats = value
                        .split(',')
                        .map(|f| match unquote(f.trim()) {
                            "csv" => Ok(OutputFormat::Csv),
                            "json" => Ok(OutputFormat::Json),
                            other => Err(parse_err(line_no, format!("unknown format `{other}`"))),
                        })
                        .collect::<Result<_>>()?;
                }
                other => return Err(parse_err(line_no, format!("unknown key `{other}`"))),
            }
        }

        let function = function.ok_or_else(|| Error::InvalidParameter("config has no `function`".into()))?;
        frac.schedule = shape.map(|shape| OrderSchedule {
            shape,
            evaluate_at: alpha_at,
        });
        let audit = match audit_x_star {
            Some(x_star) => Some(AuditConfig { x_star, ..audit }),
            None if audit_keys => {
                return Err(Error::InvalidParameter(
                    "audit keys given without `audit_x_star`".into(),
                ))
            }
            None => None,
        };
        let cfg = ExperimentConfig {
            function,
            algorithm,
            fractional: frac,
            audit,
            output,
            formats,
        };
        cfg.fractional.validate()?;
        Ok(cfg)
    }

    /// Writes every key, in a fixed order.
    pub fn to_text(&self) -> String {
        let f = &self.fractional;
        let mut out = String::new();
        let mut put = |key: &str, value: String| {
            let _ = writeln!(out, "{key} = {value}");
        };
        put("function", format!("\"{}\"", self.function));
        put("algorithm", format!("\"{}\"", self.algorithm.as_str()));
        put("alpha", format!("{:?}", f.alpha));
        if let Some(s) = &f.schedule {
            put("schedule", format!("\"{}\"", schedule_text(&s.shape)));
            put("alpha_at", format!("\"{}\"", evaluation_point_text(&s.evaluate_at)));
        }
        put("mu", format!("{:?}", f.mu));
        put("lag", f.lag.to_string());
        put("lower_terminal", format!("{:?}", f.lower_terminal));
        put("x0", format!("{:?}", f.x0));
        let warmup = match f.warmup {
            Warmup::ReplicateX0 => "replicate_x0",
            Warmup::GdBootstrap => "gd_bootstrap",
        };
        put("warmup", format!("\"{warmup}\""));
        let ordering = match f.terminal_ordering {
            TerminalOrdering::SignedSymmetric => "signed_symmetric",
            TerminalOrdering::HardError => "hard_error",
        };
        put("terminal_ordering", format!("\"{ordering}\""));
        let TruncationPolicy {
            abs_tol,
            max_terms,
            divergence_window,
        } = f.truncation;
        put("abs_tol", format!("{abs_tol:?}"));
        put("max_terms", max_terms.to_string());
        put("divergence_window", divergence_window.to_string());
        put("gamma_mode", format!("\"{}\"", f.gamma_mode.as_str()));
        let StopRule { step_tol, max_iters } = f.stop;
        put("step_tol", format!("{step_tol:?}"));
        put("max_iters", max_iters.to_string());
        if let Some(a) = &self.audit {
            put("audit_x_star", format!("{:?}", a.x_star));
            if let Some(x) = a.claimed_limit {
                put("audit_limit", format!("{x:?}"));
            }
            if let Some(e) = a.epsilon {
                put("audit_epsilon", format!("{e:?}"));
            }
            if let Some(n) = a.tail_start {
                put("audit_tail_start", n.to_string());
            }
            if a.index_cap != DEFAULT_INDEX_CAP {
                put("audit_index_cap", a.index_cap.to_string());
            }
        }
        put("output", format!("\"{}\"", self.output));
        let formats: Vec<&str> = self
            .formats
            .iter()
            .map(|f| match f {
                OutputFormat::Csv => "csv",
                OutputFormat::Json => "json",
            })
            .collect();
        put("formats", formats.join(", "));
        out
    }

    pub fn writes(&self, format: OutputFormat) -> bool {
        self.formats.contains(&format)
    }
}
