//! Single-window LPPL fitting.
//!
//! The linear amplitudes are profiled out with [`solve_linear`], leaving a three-parameter
//! objective `SSR(tc, m, omega)`. That objective is minimised by Nelder-Mead from every
//! start on a `(tc, m)` grid, with `omega` seeded at the preferred `2 pi / ln 2`.
//! Infeasible points evaluate to `+inf`.

mod linear;
mod simplex;

use std::cmp::Ordering;
use std::f64::consts::{LN_2, TAU};

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LpplError, Result};
use crate::model::{ConstraintSet, LpplParams};
use crate::series::PriceSeries;

pub use linear::{solve_linear, LinearSolution, CONDITION_LIMIT, N_LINEAR};
use simplex::SimplexOptions;

/// Shortest window the fitter accepts.
pub const MIN_WINDOW_LEN: usize = 30;

/// Absolute SSR floor for the stopping rule, as a fraction of the total sum of squares.
/// Lets noiseless fits terminate once the residual is at rounding level.
const SSR_FLOOR_FRACTION: f64 = 1e-18;

/// `2 pi / ln 2`, the log-frequency for a scaling factor of 2.
pub fn preferred_omega() -> f64 {
    TAU / LN_2
}

/// `0.10, 0.15, ..., 0.90`.
pub fn default_m_grid() -> Vec<f64> {
    (0..=16).map(|i| f64::from(10 + 5 * i) / 100.0).collect()
}

/// Evenly spaced grid `from, from + step, ...` up to and including `to`.
pub fn stepped_grid(from: f64, to: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !from.is_finite() || !to.is_finite() || to < from {
        return Err(LpplError::Config(format!(
            "invalid grid {from}:{to}:{step}"
        )));
    }
    let count = ((to - from) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| from + step * i as f64).collect())
}

/// Offsets past the last index at which `tc` starts are placed: `1, 1 + step, ...`
/// while not exceeding `span_fraction * n`.
pub fn tc_start_offsets(n: usize, step: f64, span_fraction: f64) -> Vec<f64> {
    let limit = span_fraction * n as f64 + 1e-9;
    let mut offsets = Vec::new();
    let mut offset = 1.0;
    while offset <= limit {
        offsets.push(offset);
        offset += step;
    }
    offsets
}

/// Settings for a single-window fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub m_grid: Vec<f64>,
    /// Spacing of `tc` starts, in trading days.
    pub tc_grid_step: f64,
    /// The last `tc` start lies at most `tc_grid_span_fraction * n` days past the window.
    pub tc_grid_span_fraction: f64,
    pub constraints: ConstraintSet,
    /// Relative SSR spread across the simplex at which a start is declared converged.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub omega_start: f64,
    /// Initial simplex edge lengths for `(tc, m, omega)`.
    pub simplex_step: [f64; 3],
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            m_grid: default_m_grid(),
            tc_grid_step: 5.0,
            tc_grid_span_fraction: 0.1,
            constraints: ConstraintSet::default(),
            tolerance: 1e-9,
            max_iterations: 500,
            omega_start: preferred_omega(),
            simplex_step: [2.0, 0.05, 0.5],
        }
    }
}

impl FitConfig {
    /// Restricts `omega` to `[8.5, 9.7]` (scaling factor close to 2).
    pub fn strict_lambda(mut self) -> Self {
        self.constraints = self.constraints.strict_lambda();
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.constraints.validate()?;
        if self.m_grid.is_empty() {
            return Err(LpplError::Config("m grid is empty".into()));
        }
        if !(self.tc_grid_step > 0.0) || !(self.tc_grid_span_fraction > 0.0) {
            return Err(LpplError::Config(
                "tc grid step and span must be positive".into(),
            ));
        }
        if !(self.tolerance > 0.0) {
            return Err(LpplError::Config("tolerance must be positive".into()));
        }
        if self.max_iterations == 0 {
            return Err(LpplError::Config("max iterations must be at least 1".into()));
        }
        if !(self.omega_start > 0.0) || self.simplex_step.iter().any(|s| !(*s > 0.0)) {
            return Err(LpplError::Config(
                "omega start and simplex steps must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Seed of a local minimisation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StartPoint {
    pub tc: f64,
    pub m: f64,
    pub omega: f64,
}

/// Outcome of one local minimisation on one window. `params.tc` is on the window's own
/// 0-based index axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub params: LpplParams,
    pub ssr: f64,
    pub mse: f64,
    pub n_obs: usize,
    pub window_start: NaiveDate,
    pub window_end: NaiveDate,
    pub converged: bool,
    pub start: StartPoint,
    pub start_index: usize,
    pub iterations: usize,
}

impl FitResult {
    /// Critical time measured in trading days past the last observation of the window.
    pub fn tc_offset(&self) -> f64 {
        self.params.tc - (self.n_obs - 1) as f64
    }
}

/// Every start of a grid fit, in start order, plus the selected winner.
#[derive(Debug, Clone)]
pub struct GridFit {
    pub best: FitResult,
    pub starts: Vec<FitResult>,
}

/// Profiled objective for a window.
pub(crate) struct Profile<'a> {
    values: &'a [f64],
    constraints: &'a ConstraintSet,
    window_end: f64,
}

impl<'a> Profile<'a> {
    pub(crate) fn new(values: &'a [f64], constraints: &'a ConstraintSet) -> Self {
        Self {
            values,
            constraints,
            window_end: (values.len() - 1) as f64,
        }
    }

    /// Feasible least-squares solution at `(tc, m, omega)`, if any.
    pub(crate) fn solve(&self, tc: f64, m: f64, omega: f64) -> Option<LinearSolution> {
        if !self.constraints.admits_nonlinear(tc, m, omega, self.window_end) {
            return None;
        }
        let sol = solve_linear(self.values, tc, m, omega).ok()?;
        self.constraints
            .admits_linear(sol.b, sol.amplitude())
            .then_some(sol)
    }

    pub(crate) fn ssr(&self, tc: f64, m: f64, omega: f64) -> f64 {
        self.solve(tc, m, omega).map_or(f64::INFINITY, |s| s.ssr)
    }
}

fn total_sum_of_squares(values: &[f64]) -> f64 {
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    values.iter().map(|v| (v - mean).powi(2)).sum()
}

fn check_window(series: &PriceSeries) -> Result<()> {
    if series.len() < MIN_WINDOW_LEN {
        return Err(LpplError::Config(format!(
            "window has {} observations, at least {MIN_WINDOW_LEN} required",
            series.len()
        )));
    }
    if series.values().iter().any(|v| !v.is_finite()) {
        return Err(LpplError::Degenerate("series contains non-finite values".into()));
    }
    Ok(())
}

fn minimize_from(
    series: &PriceSeries,
    start: StartPoint,
    start_index: usize,
    config: &FitConfig,
    ssr_floor: f64,
) -> FitResult {
    let values = series.values();
    let profile = Profile::new(values, &config.constraints);
    let outcome = simplex::minimize(
        |x| profile.ssr(x[0], x[1], x[2]),
        [start.tc, start.m, start.omega],
        config.simplex_step,
        SimplexOptions {
            rel_tol: config.tolerance,
            abs_tol: ssr_floor,
            max_iterations: config.max_iterations,
        },
    );
    let [tc, m, omega] = outcome.x;
    let solution = profile.solve(tc, m, omega);
    let n = values.len();
    let (params, ssr) = match solution {
        Some(s) => (
            LpplParams {
                a: s.a,
                b: s.b,
                c1: s.c1,
                c2: s.c2,
                m,
                omega,
                tc,
            },
            s.ssr,
        ),
        None => (
            LpplParams {
                a: f64::NAN,
                b: f64::NAN,
                c1: f64::NAN,
                c2: f64::NAN,
                m,
                omega,
                tc,
            },
            f64::INFINITY,
        ),
    };
    debug_assert!(outcome.fx == ssr || !outcome.fx.is_finite());
    FitResult {
        params,
        ssr,
        mse: ssr / n as f64,
        n_obs: n,
        window_start: series.dates()[0],
        window_end: series.dates()[n - 1],
        converged: outcome.converged && solution.is_some(),
        start,
        start_index,
        iterations: outcome.iterations,
    }
}

/// Local minimisation of the profiled SSR from `start`.
///
/// Never fails on numerical trouble: a start that cannot reach a feasible point comes back
/// with `converged == false` and infinite SSR.
pub fn minimize_window(
    series: &PriceSeries,
    start: StartPoint,
    config: &FitConfig,
) -> Result<FitResult> {
    check_window(series)?;
    config.validate()?;
    let floor = SSR_FLOOR_FRACTION * total_sum_of_squares(series.values());
    Ok(minimize_from(series, start, 0, config, floor))
}

/// Grid starts in evaluation order: `tc` offsets outermost, `m` innermost.
pub fn grid_starts(n: usize, config: &FitConfig) -> Vec<StartPoint> {
    let last = (n - 1) as f64;
    tc_start_offsets(n, config.tc_grid_step, config.tc_grid_span_fraction)
        .into_iter()
        .flat_map(|offset| {
            config.m_grid.iter().map(move |&m| StartPoint {
                tc: last + offset,
                m,
                omega: config.omega_start,
            })
        })
        .collect()
}

/// Winner ordering: lowest SSR, then lowest `tc`, then lowest `m`, then earliest start.
fn rank(a: &FitResult, b: &FitResult) -> Ordering {
    a.ssr
        .total_cmp(&b.ssr)
        .then(a.params.tc.total_cmp(&b.params.tc))
        .then(a.params.m.total_cmp(&b.params.m))
        .then(a.start_index.cmp(&b.start_index))
}

/// Runs [`minimize_window`] from every grid start and keeps every outcome.
///
/// Starts run in parallel; the winner does not depend on scheduling.
pub fn fit_window_detailed(series: &PriceSeries, config: &FitConfig) -> Result<GridFit> {
    check_window(series)?;
    config.validate()?;
    let floor = SSR_FLOOR_FRACTION * total_sum_of_squares(series.values());
    let starts = grid_starts(series.len(), config);
    let results: Vec<FitResult> = starts
        .par_iter()
        .enumerate()
        .map(|(i, &start)| minimize_from(series, start, i, config, floor))
        .collect();
    let best = results
        .iter()
        .filter(|r| r.converged && r.ssr.is_finite())
        .min_by(|a, b| rank(a, b))
        .cloned()
        .ok_or_else(|| {
            LpplError::NoFeasibleFit(format!(
                "none of {} starts converged to a feasible point on {} .. {}",
                results.len(),
                series.dates()[0],
                series.dates()[series.len() - 1]
            ))
        })?;
    Ok(GridFit {
        best,
        starts: results,
    })
}

/// Best feasible converged fit over the `(tc, m)` start grid.
pub fn fit_window(series: &PriceSeries, config: &FitConfig) -> Result<FitResult> {
    fit_window_detailed(series, config).map(|g| g.best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::evaluate_lppl;
    use crate::series::TradingCalendar;

    fn series_from(values: Vec<f64>) -> PriceSeries {
        let dates = TradingCalendar::weekends_only()
            .sequence(NaiveDate::from_ymd_opt(2014, 6, 12).unwrap(), values.len());
        PriceSeries::new("test", dates, values).unwrap()
    }

    fn truth() -> LpplParams {
        LpplParams::from_amplitude_phase(100.0, -1.0, 0.4, 1.0, 0.6, 8.5, 219.0)
    }

    fn synthetic(p: &LpplParams, n: usize) -> PriceSeries {
        series_from((0..n).map(|i| evaluate_lppl(p, i as f64).unwrap()).collect())
    }

    #[test]
    fn m_grid_has_seventeen_values() {
        let grid = default_m_grid();
        assert_eq!(grid.len(), 17);
        assert_eq!(grid[0], 0.1);
        assert_eq!(grid[1], 0.15);
        assert_eq!(grid[16], 0.9);
    }

    #[test]
    fn tc_offsets_for_five_hundred_points() {
        let offsets = tc_start_offsets(500, 5.0, 0.1);
        let expected: Vec<f64> = (0..10).map(|k| 1.0 + 5.0 * k as f64).collect();
        assert_eq!(offsets, expected);
        assert_eq!(grid_starts(500, &FitConfig::default()).len(), 170);
    }

    #[test]
    fn stepped_grid_includes_endpoint() {
        let g = stepped_grid(0.1, 0.9, 0.05).unwrap();
        assert_eq!(g.len(), 17);
        assert!((g[16] - 0.9).abs() < 1e-12);
        assert!(stepped_grid(1.0, 0.0, 0.1).is_err());
    }

    #[test]
    fn start_at_truth_stays_put() {
        let p = truth();
        let series = synthetic(&p, 200);
        let start = StartPoint {
            tc: p.tc,
            m: p.m,
            omega: p.omega,
        };
        let res = minimize_window(&series, start, &FitConfig::default()).unwrap();
        assert!(res.converged);
        assert!(res.ssr < 1e-12, "{}", res.ssr);
        assert!((res.params.tc - p.tc).abs() < 1e-3);
        assert_eq!(res.mse, res.ssr / 200.0);
    }

    #[test]
    fn perturbed_start_recovers_truth() {
        let p = truth();
        let series = synthetic(&p, 200);
        let start = StartPoint {
            tc: p.tc + 4.0,
            m: p.m + 0.1,
            omega: p.omega + 0.5,
        };
        let res = minimize_window(&series, start, &FitConfig::default()).unwrap();
        assert!(res.converged);
        assert!((res.params.tc - p.tc).abs() < 0.5, "{:?}", res.params);
        assert!((res.params.m - p.m).abs() < 0.01);
        assert!((res.params.omega - p.omega).abs() < 0.05);
    }

    #[test]
    fn short_window_is_rejected() {
        let series = synthetic(&truth(), 20);
        assert!(matches!(
            fit_window(&series, &FitConfig::default()),
            Err(LpplError::Config(_))
        ));
    }

    #[test]
    fn increasing_power_law_has_no_feasible_fit() {
        // B < 0 cannot describe a series that falls towards tc with no oscillation.
        let values: Vec<f64> = (0..60).map(|i| (70.0 - i as f64).powf(0.5)).collect();
        let cfg = FitConfig {
            m_grid: vec![0.5],
            ..FitConfig::default()
        };
        let err = fit_window(&series_from(values), &cfg);
        assert!(matches!(err, Err(LpplError::NoFeasibleFit(_))), "{err:?}");
    }
}
