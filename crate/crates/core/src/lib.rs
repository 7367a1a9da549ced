//! Log-periodic power-law (LPPL) bubble detection.
//!
//! * [`model`]: the LPPL model, its feasibility rules and the `omega`/`lambda` identity.
//! * [`fit`]: profiled least-squares fits of one window from a grid of starts.
//! * [`scan`]: shrinking-window stability scans producing a critical time with a band.
//! * [`analytics`]: correlations, standardisation, baskets and price inversion.
//! * [`synth`]: seeded synthetic LPPL series and a brute-force SSR grid.
//! * [`io`] and [`report`]: CSV ingestion, JSON reports and plot data.

pub mod analytics;
pub mod error;
pub mod fit;
pub mod io;
pub mod model;
pub mod report;
pub mod scan;
pub mod series;
pub mod synth;

pub use error::{LpplError, Result};
pub use fit::{fit_window, minimize_window, solve_linear, FitConfig, FitResult, StartPoint};
pub use model::{
    check_constraints, evaluate_lppl, lambda_from_omega, omega_from_lambda, ConstraintSet,
    LpplParams, Violation,
};
pub use scan::{compare_windows, scan, ScanConfig, ScanResult};
pub use series::{trading_day_offset, PriceSeries, TradingCalendar};
