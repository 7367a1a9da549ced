//! Shrinking-window stability scan.
//!
//! The window end `t2` is fixed while the start `t1` moves forward in steps of trading
//! days. Each window gets its own grid fit; the window with the lowest MSE is the headline
//! fit and the spread of `tc` across windows gives the uncertainty band. All critical
//! times are expressed as trading-day offsets past `t2`, which every window shares.

use std::cmp::Ordering;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{LpplError, Result};
use crate::fit::{fit_window, FitConfig, FitResult, MIN_WINDOW_LEN};
use crate::series::{PriceSeries, TradingCalendar};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    pub t1_first: NaiveDate,
    pub t1_last: NaiveDate,
    /// Trading days between successive window starts.
    pub t1_step: usize,
    pub t2: NaiveDate,
    pub fit: FitConfig,
    pub calendar: TradingCalendar,
}

impl ScanConfig {
    pub fn validate(&self) -> Result<()> {
        if self.t1_first > self.t1_last || self.t1_last >= self.t2 {
            return Err(LpplError::Config(format!(
                "need t1_first <= t1_last < t2, got {} / {} / {}",
                self.t1_first, self.t1_last, self.t2
            )));
        }
        if self.t1_step == 0 {
            return Err(LpplError::Config("t1 step must be at least 1".into()));
        }
        self.fit.validate()
    }

    /// Window starts from `t1_first` (rolled to a trading day) in steps of `t1_step`
    /// trading days, both endpoints included.
    pub fn window_starts(&self) -> Result<Vec<NaiveDate>> {
        self.validate()?;
        let mut starts = Vec::new();
        let mut t1 = self.calendar.roll_forward(self.t1_first);
        while t1 <= self.t1_last {
            starts.push(t1);
            t1 = self.calendar.offset(t1, self.t1_step as i64)?;
        }
        Ok(starts)
    }
}

/// Outcome for one window start.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowOutcome {
    pub t1: NaiveDate,
    pub start_index: usize,
    pub n_obs: usize,
    pub fit: Option<FitResult>,
    pub error: Option<String>,
}

/// Critical time in all three reported forms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TcEstimate {
    /// Trading days past `t2` (fractional).
    pub offset: f64,
    /// Index on the full series' axis.
    pub index: f64,
    pub date: NaiveDate,
    /// Standard deviation across windows in trading days; `None` for a single fit.
    pub std: Option<f64>,
    pub band_lower: NaiveDate,
    pub band_upper: NaiveDate,
}

/// `x` rounded to the nearest integer, halves upward.
pub fn round_half_up(x: f64) -> i64 {
    (x + 0.5).floor() as i64
}

impl TcEstimate {
    /// Maps a fractional offset past `t2` (and an optional spread) onto the calendar.
    pub fn new(
        calendar: &TradingCalendar,
        t2: NaiveDate,
        t2_index: usize,
        offset: f64,
        std: Option<f64>,
    ) -> Result<Self> {
        let spread = std.unwrap_or(0.0);
        Ok(Self {
            offset,
            index: t2_index as f64 + offset,
            date: calendar.offset(t2, round_half_up(offset))?,
            std,
            band_lower: calendar.offset(t2, round_half_up(offset - spread))?,
            band_upper: calendar.offset(t2, round_half_up(offset + spread))?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub t2: NaiveDate,
    pub t2_index: usize,
    pub windows: Vec<WindowOutcome>,
    /// Winners of the windows that produced a feasible fit, in window order.
    pub per_window: Vec<FitResult>,
    /// Lowest-MSE window winner.
    pub best: FitResult,
    /// Mean of the per-window `tc` offsets past `t2`.
    pub tc_mean: f64,
    /// Sample standard deviation (n - 1) of the per-window `tc` offsets; 0 for one window.
    pub tc_std: f64,
    /// Best fit's critical time with the `tc_std` band.
    pub tc: TcEstimate,
}

fn by_mse(a: &FitResult, b: &FitResult) -> Ordering {
    a.mse
        .total_cmp(&b.mse)
        .then(a.window_start.cmp(&b.window_start))
}

/// Window winners sorted by ascending MSE; equal MSE ranks the earlier window start first.
pub fn compare_windows(results: &[FitResult]) -> Result<Vec<FitResult>> {
    if results.is_empty() {
        return Err(LpplError::Config("no window results to compare".into()));
    }
    let mut ranked = results.to_vec();
    ranked.sort_by(by_mse);
    Ok(ranked)
}

/// Mean and sample standard deviation (0 for a single value).
pub(crate) fn mean_and_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Fits every window `[t1, t2]` and summarises the critical time across them.
///
/// A window with no feasible fit is recorded with its error and left out of the `tc`
/// statistics; the scan fails only when every window fails.
pub fn scan(series: &PriceSeries, config: &ScanConfig) -> Result<ScanResult> {
    let starts = config.window_starts()?;
    let t2_index = series.index_on_or_before(config.t2).ok_or_else(|| {
        LpplError::Config(format!("no observation on or before t2 = {}", config.t2))
    })?;
    let t2 = series.dates()[t2_index];

    let mut windows = Vec::with_capacity(starts.len());
    for &t1 in &starts {
        let start_index = series
            .index_on_or_after(t1)
            .filter(|&i| i <= t2_index)
            .ok_or_else(|| LpplError::Config(format!("no observations between {t1} and {t2}")))?;
        let n_obs = t2_index + 1 - start_index;
        if n_obs < MIN_WINDOW_LEN {
            return Err(LpplError::Config(format!(
                "window starting {t1} has {n_obs} observations, at least {MIN_WINDOW_LEN} required"
            )));
        }
        windows.push(WindowOutcome {
            t1,
            start_index,
            n_obs,
            fit: None,
            error: None,
        });
    }

    for w in &mut windows {
        let window = series.slice(w.start_index..t2_index + 1);
        match fit_window(&window, &config.fit) {
            Ok(fit) => w.fit = Some(fit),
            Err(LpplError::NoFeasibleFit(msg)) => {
                log::warn!("window starting {}: {msg}", w.t1);
                w.error = Some(msg);
            }
            Err(e) => return Err(e),
        }
    }

    let per_window: Vec<FitResult> = windows.iter().filter_map(|w| w.fit.clone()).collect();
    if per_window.is_empty() {
        return Err(LpplError::NoFeasibleFit(format!(
            "all {} windows ending {t2} failed",
            windows.len()
        )));
    }
    let best = per_window
        .iter()
        .min_by(|a, b| by_mse(a, b))
        .cloned()
        .expect("non-empty");
    let offsets: Vec<f64> = per_window.iter().map(FitResult::tc_offset).collect();
    let (tc_mean, tc_std) = mean_and_std(&offsets);
    let tc = TcEstimate::new(
        &config.calendar,
        t2,
        t2_index,
        best.tc_offset(),
        Some(tc_std),
    )?;

    Ok(ScanResult {
        t2,
        t2_index,
        windows,
        per_window,
        best,
        tc_mean,
        tc_std,
        tc,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fit::StartPoint;
    use crate::model::LpplParams;

    fn ymd(y: i32, m: u32, d: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, d).unwrap()
    }

    fn result(mse: f64, start: NaiveDate) -> FitResult {
        FitResult {
            params: LpplParams::from_amplitude_phase(0.0, -1.0, 0.1, 0.0, 0.5, 9.0, 110.0),
            ssr: mse * 100.0,
            mse,
            n_obs: 100,
            window_start: start,
            window_end: ymd(2016, 2, 12),
            converged: true,
            start: StartPoint {
                tc: 101.0,
                m: 0.5,
                omega: 9.0,
            },
            start_index: 0,
            iterations: 1,
        }
    }

    #[test]
    fn june_july_sweep_has_five_windows() {
        let cfg = ScanConfig {
            t1_first: ymd(2014, 6, 12),
            t1_last: ymd(2014, 7, 10),
            t1_step: 5,
            t2: ymd(2016, 2, 12),
            fit: FitConfig::default(),
            calendar: TradingCalendar::weekends_only(),
        };
        assert_eq!(
            cfg.window_starts().unwrap(),
            vec![
                ymd(2014, 6, 12),
                ymd(2014, 6, 19),
                ymd(2014, 6, 26),
                ymd(2014, 7, 3),
                ymd(2014, 7, 10)
            ]
        );
    }

    #[test]
    fn invalid_sweeps() {
        let mut cfg = ScanConfig {
            t1_first: ymd(2014, 7, 12),
            t1_last: ymd(2014, 7, 10),
            t1_step: 5,
            t2: ymd(2016, 2, 12),
            fit: FitConfig::default(),
            calendar: TradingCalendar::weekends_only(),
        };
        assert!(cfg.window_starts().is_err());
        cfg.t1_first = ymd(2014, 6, 12);
        cfg.t1_step = 0;
        assert!(cfg.window_starts().is_err());
    }

    #[test]
    fn compare_sorts_by_mse() {
        let d = ymd(2014, 6, 12);
        let ranked =
            compare_windows(&[result(0.2, d), result(0.1, d), result(0.3, d)]).unwrap();
        let mses: Vec<f64> = ranked.iter().map(|r| r.mse).collect();
        assert_eq!(mses, vec![0.1, 0.2, 0.3]);
    }

    #[test]
    fn compare_breaks_ties_by_earlier_start() {
        let ranked = compare_windows(&[
            result(0.1, ymd(2014, 6, 19)),
            result(0.1, ymd(2014, 6, 12)),
        ])
        .unwrap();
        assert_eq!(ranked[0].window_start, ymd(2014, 6, 12));
        let single = compare_windows(&[result(0.5, ymd(2014, 6, 12))]).unwrap();
        assert_eq!(single.len(), 1);
        assert!(compare_windows(&[]).is_err());
    }

    #[test]
    fn tc_estimate_rounds_half_up() {
        let cal = TradingCalendar::weekends_only();
        let t2 = ymd(2016, 2, 12); // Friday
        let est = TcEstimate::new(&cal, t2, 400, 2.5, Some(1.2)).unwrap();
        assert_eq!(est.date, ymd(2016, 2, 17));
        assert_eq!(est.band_lower, ymd(2016, 2, 15));
        assert_eq!(est.band_upper, ymd(2016, 2, 18));
        assert_eq!(est.index, 402.5);
        assert_eq!(round_half_up(-0.5), 0);
        assert_eq!(round_half_up(1.49), 1);
    }

    #[test]
    fn sample_std_uses_n_minus_one() {
        let (mean, std) = mean_and_std(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(mean, 2.5);
        assert!((std - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(mean_and_std(&[7.0]), (7.0, 0.0));
    }
}
