//! JSON reports and plot data.
//!
//! Every report carries `schema_version` and `command`; the JSON Schema for all of them
//! ships as `schema/report.schema.json` ([`REPORT_SCHEMA`]). Critical times always appear
//! as an offset in trading days, a calendar date and a band of dates.

use std::io::Write;

use chrono::NaiveDate;
use serde::Serialize;

use crate::analytics::CorrelationReport;
use crate::error::Result;
use crate::fit::{FitConfig, FitResult, StartPoint};
use crate::model::LpplParams;
use crate::scan::{ScanConfig, ScanResult, TcEstimate};
use crate::series::{PriceSeries, TradingCalendar};
use crate::synth::GroundTruth;

pub const SCHEMA_VERSION: &str = "lppl-report/1";

/// JSON Schema describing every report variant.
pub const REPORT_SCHEMA: &str = include_str!("../schema/report.schema.json");

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesSummary {
    pub label: String,
    pub first_date: Option<NaiveDate>,
    pub last_date: Option<NaiveDate>,
    pub n_obs: usize,
}

impl SeriesSummary {
    pub fn of(series: &PriceSeries) -> Self {
        Self {
            label: series.label().to_string(),
            first_date: series.first_date(),
            last_date: series.last_date(),
            n_obs: series.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InputSummary {
    pub path: String,
    #[serde(flatten)]
    pub series: SeriesSummary,
    /// Preprocessing applied before fitting, in order (`invert`, `standardize`).
    pub transforms: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParamsReport {
    pub a: f64,
    pub b: f64,
    pub c1: f64,
    pub c2: f64,
    pub m: f64,
    pub omega: f64,
    /// Critical time on the window's own 0-based index axis.
    pub tc: f64,
    pub amplitude: f64,
    pub phase: f64,
    pub lambda: f64,
}

impl From<&LpplParams> for ParamsReport {
    fn from(p: &LpplParams) -> Self {
        Self {
            a: p.a,
            b: p.b,
            c1: p.c1,
            c2: p.c2,
            m: p.m,
            omega: p.omega,
            tc: p.tc,
            amplitude: p.amplitude(),
            phase: p.phase(),
            lambda: p.lambda(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitSummary {
    pub window_start: NaiveDate,
    pub window_end: NaiveDate,
    pub n_obs: usize,
    pub params: ParamsReport,
    pub tc_offset: f64,
    pub ssr: f64,
    pub mse: f64,
    pub converged: bool,
    pub start: StartPoint,
    pub iterations: usize,
}

impl From<&FitResult> for FitSummary {
    fn from(r: &FitResult) -> Self {
        Self {
            window_start: r.window_start,
            window_end: r.window_end,
            n_obs: r.n_obs,
            params: ParamsReport::from(&r.params),
            tc_offset: r.tc_offset(),
            ssr: r.ssr,
            mse: r.mse,
            converged: r.converged,
            start: r.start,
            iterations: r.iterations,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitReport {
    pub schema_version: &'static str,
    pub command: &'static str,
    pub input: InputSummary,
    pub config: FitConfig,
    pub fit: FitSummary,
    pub tc: TcEstimate,
}

/// Report for a single-window fit. `end_index` is the index of the window's last
/// observation in the input series.
pub fn fit_report(
    input: InputSummary,
    config: &FitConfig,
    result: &FitResult,
    calendar: &TradingCalendar,
    end_index: usize,
) -> Result<FitReport> {
    let tc = TcEstimate::new(calendar, result.window_end, end_index, result.tc_offset(), None)?;
    Ok(FitReport {
        schema_version: SCHEMA_VERSION,
        command: "fit",
        input,
        config: config.clone(),
        fit: FitSummary::from(result),
        tc,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindowReport {
    pub t1: NaiveDate,
    pub n_obs: usize,
    pub status: &'static str,
    pub error: Option<String>,
    pub fit: Option<FitSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanSettings {
    pub t1_first: NaiveDate,
    pub t1_last: NaiveDate,
    pub t1_step: usize,
    pub t2: NaiveDate,
    pub holidays: Vec<NaiveDate>,
    pub fit: FitConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanReport {
    pub schema_version: &'static str,
    pub command: &'static str,
    pub input: InputSummary,
    pub config: ScanSettings,
    pub windows: Vec<WindowReport>,
    pub best: FitSummary,
    pub tc_mean: f64,
    pub tc_std: f64,
    pub tc: TcEstimate,
}

pub fn scan_report(input: InputSummary, config: &ScanConfig, result: &ScanResult) -> ScanReport {
    ScanReport {
        schema_version: SCHEMA_VERSION,
        command: "scan",
        input,
        config: ScanSettings {
            t1_first: config.t1_first,
            t1_last: config.t1_last,
            t1_step: config.t1_step,
            t2: config.t2,
            holidays: config.calendar.holidays().collect(),
            fit: config.fit.clone(),
        },
        windows: result
            .windows
            .iter()
            .map(|w| WindowReport {
                t1: w.t1,
                n_obs: w.n_obs,
                status: if w.fit.is_some() { "ok" } else { "failed" },
                error: w.error.clone(),
                fit: w.fit.as_ref().map(FitSummary::from),
            })
            .collect(),
        best: FitSummary::from(&result.best),
        tc_mean: result.tc_mean,
        tc_std: result.tc_std,
        tc: result.tc,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelateReport {
    pub schema_version: &'static str,
    pub command: &'static str,
    pub inputs: Vec<InputSummary>,
    pub correlations: CorrelationReport,
}

pub fn correlate_report(inputs: Vec<InputSummary>, correlations: CorrelationReport) -> CorrelateReport {
    CorrelateReport {
        schema_version: SCHEMA_VERSION,
        command: "correlate",
        inputs,
        correlations,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputSummary {
    pub path: String,
    #[serde(flatten)]
    pub series: SeriesSummary,
}

/// Report for `basket`, `invert` and `standardize`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransformReport {
    pub schema_version: &'static str,
    pub command: &'static str,
    pub inputs: Vec<InputSummary>,
    pub mode: Option<String>,
    pub output: OutputSummary,
}

pub fn transform_report(
    command: &'static str,
    inputs: Vec<InputSummary>,
    mode: Option<String>,
    output: OutputSummary,
) -> TransformReport {
    TransformReport {
        schema_version: SCHEMA_VERSION,
        command,
        inputs,
        mode,
        output,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SynthReport {
    pub schema_version: &'static str,
    pub command: &'static str,
    pub output: OutputSummary,
    pub truth_path: String,
    pub truth: GroundTruth,
}

pub fn synth_report(output: OutputSummary, truth_path: String, truth: GroundTruth) -> SynthReport {
    SynthReport {
        schema_version: SCHEMA_VERSION,
        command: "synth",
        output,
        truth_path,
        truth,
    }
}

/// One row of plot data.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotRow {
    pub date: NaiveDate,
    /// Index on the window axis; rows past the window continue the count.
    pub index: usize,
    pub observed: Option<f64>,
    pub fitted: Option<f64>,
    pub tc_marker: bool,
    pub in_band: bool,
}

/// Observed and fitted values over the window, extended with future trading days up to
/// the later of the critical date and the band's upper edge.
pub fn plot_rows(
    window: &PriceSeries,
    params: &LpplParams,
    tc: &TcEstimate,
    calendar: &TradingCalendar,
) -> Result<Vec<PlotRow>> {
    let flags = |date: NaiveDate| (date == tc.date, tc.band_lower <= date && date <= tc.band_upper);
    let fitted = |i: usize| params.evaluate(i as f64).ok();
    let mut rows: Vec<PlotRow> = window
        .dates()
        .iter()
        .zip(window.values())
        .enumerate()
        .map(|(i, (&date, &v))| {
            let (tc_marker, in_band) = flags(date);
            PlotRow {
                date,
                index: i,
                observed: Some(v),
                fitted: fitted(i),
                tc_marker,
                in_band,
            }
        })
        .collect();
    let Some(last) = window.last_date() else {
        return Ok(rows);
    };
    let horizon = tc.date.max(tc.band_upper);
    let mut date = last;
    let mut index = window.len() - 1;
    while date < horizon {
        date = calendar.offset(date, 1)?;
        index += 1;
        let (tc_marker, in_band) = flags(date);
        rows.push(PlotRow {
            date,
            index,
            observed: None,
            fitted: fitted(index),
            tc_marker,
            in_band,
        });
    }
    Ok(rows)
}

pub fn write_plot_csv<W: Write>(rows: &[PlotRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["date", "index", "observed", "fitted", "tc_marker", "in_band"])?;
    let opt = |v: Option<f64>| v.map_or_else(String::new, |x| x.to_string());
    for r in rows {
        w.write_record([
            r.date.to_string(),
            r.index.to_string(),
            opt(r.observed),
            opt(r.fitted),
            u8::from(r.tc_marker).to_string(),
            u8::from(r.in_band).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plot_rows_extend_to_band() {
        let cal = TradingCalendar::weekends_only();
        let start = NaiveDate::from_ymd_opt(2016, 2, 1).unwrap();
        let window = PriceSeries::new("x", cal.sequence(start, 10), vec![1.0; 10]).unwrap();
        let params = LpplParams::from_amplitude_phase(1.0, -0.1, 0.01, 0.0, 0.5, 9.0, 12.4);
        let t2 = window.last_date().unwrap();
        let tc = TcEstimate::new(&cal, t2, 9, 3.4, Some(1.0)).unwrap();
        let rows = plot_rows(&window, &params, &tc, &cal).unwrap();
        // tc rounds to 3 days past t2, band to [2, 4].
        assert_eq!(rows.len(), 14);
        assert_eq!(rows.iter().filter(|r| r.tc_marker).count(), 1);
        assert!(rows[12].tc_marker);
        assert_eq!(rows.iter().filter(|r| r.in_band).count(), 3);
        assert!(rows[10].observed.is_none() && rows[10].fitted.is_some());
        assert!(rows[13].fitted.is_none()); // index 13 lies past tc = 12.4
        let mut buf = Vec::new();
        write_plot_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("date,index,observed,fitted,tc_marker,in_band\n"));
        assert_eq!(text.lines().count(), 15);
    }
}
