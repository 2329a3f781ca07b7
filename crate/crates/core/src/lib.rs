//! Regression with Padé (rational) approximants.
//!
//! Models are fitted by minimizing the linearized residual `P(x) - F·Q(x)`,
//! optionally with Tikhonov penalties on the coefficients, and judged by the
//! true residual of `P/Q`, a derivative-based oscillation measure and a pole
//! scan. A Weibull reliability toolkit and seeded data generators cover the
//! worked examples.
//!
//! ```
//! use padefit::{fit_linearized, Dataset, FitConfig};
//!
//! let data = Dataset::new(vec![(0.0, 1.0), (1.0, 0.5), (2.0, 1.0 / 3.0), (3.0, 0.25)]).unwrap();
//! let report = fit_linearized(&data, &FitConfig::new(0, 1)).unwrap();
//! assert!((report.model.beta()[0] - 1.0).abs() < 1e-12);
//! ```

pub mod cli;
pub mod datagen;
pub mod diagnostics;
mod error;
pub mod fitting;
pub mod io;
pub mod linsys;
pub mod rational;
pub mod selection;
pub mod weibull;

pub use diagnostics::{
    model_oscillation, oscillation_measure, rmse, DerivativeGrid, GridPlacement,
};
pub use error::{Error, Result};
pub use fitting::{
    build_reference_points, fit_linearized, fit_regularized, interpolate_reference, Dataset,
    FitConfig, FitReport,
};
pub use rational::{Coef, PoleReport, RationalModel, TailTerm};
pub use selection::{choose_lambda, grid_search, lambda_sweep, q_search, LambdaSweep, SearchSpace};
pub use weibull::{median_ranks, mle_fit, rational_mttf, transform_fit, RankConfig, WeibullParams};
