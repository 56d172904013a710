//! Test functions with closed-form derivatives of every order, and the
//! variable-order schedules used by the fixed-terminal algorithm.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Open interval `(lo, hi)`; either end may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const REALS: Interval = Interval {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };

    pub fn contains(&self, x: f64) -> bool {
        x > self.lo && x < self.hi
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FunctionKind {
    /// Coefficients in ascending degree.
    Polynomial { coeffs: Vec<f64> },
    /// a e^{bx}
    Exponential { a: f64, b: f64 },
    /// s / (r - x)
    RationalPole { s: f64, r: f64 },
    /// scale (x - x_star)^2
    ShiftedQuadratic { x_star: f64, scale: f64 },
}

/// A real function of one variable with exact derivatives of all orders on
/// an open interval where it is analytic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DifferentiableFunction {
    pub kind: FunctionKind,
    pub domain: Interval,
}

impl DifferentiableFunction {
    pub fn polynomial(coeffs: impl Into<Vec<f64>>) -> Self {
        Self {
            kind: FunctionKind::Polynomial { coeffs: coeffs.into() },
            domain: Interval::REALS,
        }
    }

    pub fn constant(value: f64) -> Self {
        Self::polynomial(vec![value])
    }

    pub fn exponential(a: f64, b: f64) -> Self {
        Self {
            kind: FunctionKind::Exponential { a, b },
            domain: Interval::REALS,
        }
    }

    /// `s / (r - x)` on `(-inf, r)`.
    pub fn rational_pole(s: f64, r: f64) -> Self {
        Self {
            kind: FunctionKind::RationalPole { s, r },
            domain: Interval {
                lo: f64::NEG_INFINITY,
                hi: r,
            },
        }
    }

    pub fn shifted_quadratic(x_star: f64, scale: f64) -> Self {
        Self {
            kind: FunctionKind::ShiftedQuadratic { x_star, scale },
            domain: Interval::REALS,
        }
    }

    /// Restricts the domain. The new interval must lie inside the current one.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn with_domain(mut self, domain: Interval) -> Result<Self> {
        if !(domain.lo < domain.hi) || domain.lo < self.domain.lo || domain.hi > self.domain.hi {
            return Err(Error::InvalidParameter(format!(
                "domain ({}, {}) is not a sub-interval of ({}, {})",
                domain.lo, domain.hi, self.domain.lo, self.domain.hi
            )));
        }
        self.domain = domain;
        Ok(self)
    }

    pub fn check_domain(&self, x: f64) -> Result<()> {
        if self.domain.contains(x) {
            Ok(())
        } else {
            Err(Error::OutsideFunctionDomain {
                x,
                lo: self.domain.lo,
                hi: self.domain.hi,
            })
        }
    }

    /// Highest derivative order that can be non-zero, for polynomial kinds.
    /// `None` means infinitely many derivatives are non-zero.
    pub fn polynomial_degree(&self) -> Option<usize> {
        match &self.kind {
            FunctionKind::Polynomial { coeffs } => Some(coeffs.iter().rposition(|&c| c != 0.0).unwrap_or(0)),
            FunctionKind::ShiftedQuadratic { scale, .. } => Some(if *scale == 0.0 { 0 } else { 2 }),
            FunctionKind::Exponential { .. } | FunctionKind::RationalPole { .. } => None,
        }
    }

    /// Location of the minimiser/maximiser, when the kind has a unique one.
    pub fn known_extremum(&self) -> Option<f64> {
        match &self.kind {
            FunctionKind::ShiftedQuadratic { x_star, scale } if *scale != 0.0 => Some(*x_star),
            FunctionKind::Polynomial { .. } if self.polynomial_degree() == Some(2) => {
                let FunctionKind::Polynomial { coeffs } = &self.kind else {
                    unreachable!()
                };
                Some(-coeffs[1] / (2.0 * coeffs[2]))
            }
            _ => None,
        }
    }

    pub fn value(&self, x: f64) -> Result<f64> {
        self.derivative(0, x)
    }

    /// The exact `order`-th derivative at `x`; order 0 is the function value.
    pub fn derivative(&self, order: usize, x: f64) -> Result<f64> {
        self.check_domain(x)?;
        Ok(match &self.kind {
            FunctionKind::Polynomial { coeffs } => polynomial_derivative(coeffs, order, x),
            FunctionKind::Exponential { a, b } => a * b.powi(order as i32) * (b * x).exp(),
            FunctionKind::RationalPole { s, r } => {
                let gap = r - x;
                let mut value = s / gap;
                for k in 1..=order {
                    value *= k as f64 / gap;
                }
                value
            }
            FunctionKind::ShiftedQuadratic { x_star, scale } => match order {
                0 => scale * (x - x_star) * (x - x_star),
                1 => 2.0 * scale * (x - x_star),
                2 => 2.0 * scale,
                _ => 0.0,
            },
        })
    }
}

fn polynomial_derivative(coeffs: &[f64], order: usize, x: f64) -> f64 {
    if order >= coeffs.len() {
        return 0.0;
    }
    // Horner over c_j * j!/(j-order)! * x^(j-order).
    coeffs[order..].iter().enumerate().rev().fold(0.0, |acc, (m, &c)| {
        let j = m + order;
        let falling = ((j - order + 1)..=j).fold(1.0, |f, t| f * t as f64);
        acc * x + c * falling
    })
}

/// Compact descriptor syntax used on the command line and in config files:
/// `poly:c0,c1,...`, `const:v`, `exp:a,b`, `pole:s,r`, `sq:x_star,scale`.
impl FromStr for DifferentiableFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, params) = s.trim().split_once(':').unwrap_or((s.trim(), ""));
        let values = params
            .split(',')
            .filter(|p| !p.trim().is_empty())
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidParameter(format!("bad number `{p}` in function `{s}`")))
            })
            .collect::<Result<Vec<f64>>>()?;
        let arity = |n: usize| {
            if values.len() == n {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!(
                    "function `{name}` takes {n} parameters, got {}",
                    values.len()
                )))
            }
        };
        match name {
            "poly" if !values.is_empty() => Ok(Self::polynomial(values)),
            "poly" => Err(Error::InvalidParameter("poly needs at least one coefficient".into())),
            "const" => arity(1).map(|_| Self::constant(values[0])),
            "exp" => arity(2).map(|_| Self::exponential(values[0], values[1])),
            "pole" => arity(2).map(|_| Self::rational_pole(values[0], values[1])),
            "sq" => arity(2).map(|_| Self::shifted_quadratic(values[0], values[1])),
            other => Err(Error::InvalidParameter(format!("unknown function kind `{other}`"))),
        }
    }
}

impl fmt::Display for DifferentiableFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[f64]| v.iter().map(|c| format!("{c:?}")).collect::<Vec<_>>().join(",");
        match &self.kind {
            FunctionKind::Polynomial { coeffs } => write!(f, "poly:{}", join(coeffs)),
            FunctionKind::Exponential { a, b } => write!(f, "exp:{}", join(&[*a, *b])),
            FunctionKind::RationalPole { s, r } => write!(f, "pole:{}", join(&[*s, *r])),
            FunctionKind::ShiftedQuadratic { x_star, scale } => {
                write!(f, "sq:{}", join(&[*x_star, *scale]))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OrderShape {
    Constant {
        alpha: f64,
    },
    /// alpha_min + (alpha_max - alpha_min) / (1 + exp(-slope (x - center)))
    Sigmoidal {
        alpha_min: f64,
        alpha_max: f64,
        center: f64,
        slope: f64,
    },
}

/// Where a state-dependent order is evaluated during one step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "at", rename_all = "snake_case")]
pub enum EvaluationPoint {
    #[default]
    AtCurrentIterate,
    AtLowerTerminal,
    Frozen {
        x0: f64,
    },
}

/// A fractional order α(x) together with the point it is evaluated at.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderSchedule {
    pub shape: OrderShape,
    pub evaluate_at: EvaluationPoint,
}

impl OrderSchedule {
    pub fn constant(alpha: f64) -> Result<Self> {
        Self::new(OrderShape::Constant { alpha }, EvaluationPoint::AtCurrentIterate)
    }

    pub fn sigmoidal(alpha_min: f64, alpha_max: f64, center: f64, slope: f64) -> Result<Self> {
        Self::new(
            OrderShape::Sigmoidal {
                alpha_min,
                alpha_max,
                center,
                slope,
            },
            EvaluationPoint::AtCurrentIterate,
        )
    }

    pub fn new(shape: OrderShape, evaluate_at: EvaluationPoint) -> Result<Self> {
        let in_unit = |a: f64| a > 0.0 && a < 1.0;
        let ok = match shape {
            OrderShape::Constant { alpha } => in_unit(alpha),
            OrderShape::Sigmoidal {
                alpha_min,
                alpha_max,
                center,
                slope,
            } => in_unit(alpha_min) && in_unit(alpha_max) && center.is_finite() && slope.is_finite(),
        };
        if ok {
            Ok(Self { shape, evaluate_at })
        } else {
            Err(Error::InvalidParameter(format!(
                "order schedule {shape:?} leaves (0, 1)"
            )))
        }
    }

    pub fn evaluated_at(mut self, evaluate_at: EvaluationPoint) -> Self {
        self.evaluate_at = evaluate_at;
        self
    }

    fn shape_value(&self, x: f64) -> f64 {
        match self.shape {
            OrderShape::Constant { alpha } => alpha,
            OrderShape::Sigmoidal {
                alpha_min,
                alpha_max,
                center,
                slope,
            } => alpha_min + (alpha_max - alpha_min) / (1.0 + (-slope * (x - center)).exp()),
        }
    }

    /// α for a step taken at `x_current` with lower terminal `x_terminal`.
    pub fn alpha(&self, x_current: f64, x_terminal: f64) -> f64 {
        let at = match self.evaluate_at {
            EvaluationPoint::AtCurrentIterate => x_current,
            EvaluationPoint::AtLowerTerminal => x_terminal,
            EvaluationPoint::Frozen { x0 } => x0,
        };
        self.shape_value(at)
    }
}
