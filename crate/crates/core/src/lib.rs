//! Fractional-order gradient descent built on the Caputo series, with a
//! numerical auditor for the inequality chain used to argue its convergence.

pub mod audit;
pub mod caputo;
pub mod cli;
pub mod config;
pub mod error;
pub mod functions;
pub mod io;
pub mod optimize;
pub mod special_fn;

pub use caputo::{caputo_quadrature, caputo_series, SeriesResult, SeriesStatus, TruncationPolicy};
pub use error::{Error, Result};
pub use functions::{DifferentiableFunction, EvaluationPoint, Interval, OrderSchedule, OrderShape};
pub use optimize::{
    algo1_step, algo3_step, run, Algorithm, FractionalConfig, StepKind, StepRecord, StopRule, TerminalOrdering,
    TerminalStatus, Trajectory, Warmup,
};
pub use special_fn::{gamma, gen_binomial, GammaError, GammaMode};
