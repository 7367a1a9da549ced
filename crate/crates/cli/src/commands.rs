use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use lppl_core::analytics::{self, BasketMode, ReturnKind};
use lppl_core::io::{self as lio, Column, ColumnSpec};
use lppl_core::report::{self, InputSummary, OutputSummary, SeriesSummary};
use lppl_core::synth::{self, SynthSpec};
use lppl_core::{
    fit_window, scan, ConstraintSet, FitConfig, LpplError, LpplParams, PriceSeries, Result,
    ScanConfig, TradingCalendar,
};
use serde::Serialize;

use crate::args::{
    BasketCmd, BasketModeArg, ConstraintPreset, CorrelateCmd, FitArgs, FitCmd, InputArgs,
    OmegaMode, ReturnsArg, ScanCmd, SynthCmd, TransformCmd,
};

fn path_string(path: &Path) -> String {
    path.display().to_string()
}

fn label_of(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "value".to_string())
}

fn load(path: &Path, columns: &ColumnSpec) -> Result<PriceSeries> {
    lio::load_csv(path, columns)
}

fn summary(path: &Path, series: &PriceSeries, transforms: Vec<String>) -> InputSummary {
    InputSummary {
        path: path_string(path),
        series: SeriesSummary::of(series),
        transforms,
    }
}

/// Loads, restricts and preprocesses the fit input.
fn prepare(args: &InputArgs) -> Result<(PriceSeries, InputSummary)> {
    let columns = ColumnSpec {
        date: Column::parse(&args.date_col),
        value: Column::parse(&args.value_col),
    };
    let mut series = load(&args.input, &columns)?.between(args.from, args.to);
    let mut transforms = Vec::new();
    if args.invert {
        series = analytics::invert_price(&series)?;
        transforms.push("invert".to_string());
    }
    if args.standardize {
        series = analytics::standardize(&series)?;
        transforms.push("standardize".to_string());
    }
    let input = summary(&args.input, &series, transforms);
    Ok((series, input))
}

fn parse_m_grid(text: &str) -> Result<Vec<f64>> {
    let bad = || LpplError::Config(format!("invalid m grid {text:?}"));
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        [from, to, step] => {
            let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
            lppl_core::fit::stepped_grid(num(from)?, num(to)?, num(step)?)
        }
        [list] => list
            .split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|_| bad()))
            .collect(),
        _ => Err(bad()),
    }
}

fn fit_config(args: &FitArgs, standardized: bool) -> Result<FitConfig> {
    let constraints = match args.constraints {
        ConstraintPreset::Standard => ConstraintSet::default(),
        ConstraintPreset::Raw => ConstraintSet::raw_prices(),
        ConstraintPreset::Auto if standardized => ConstraintSet::default(),
        ConstraintPreset::Auto => ConstraintSet::raw_prices(),
    };
    let mut config = FitConfig {
        m_grid: parse_m_grid(&args.m_grid)?,
        tc_grid_step: args.tc_step,
        tc_grid_span_fraction: args.tc_span,
        constraints,
        tolerance: args.tolerance,
        max_iterations: args.max_iter,
        ..FitConfig::default()
    };
    if args.omega_mode == OmegaMode::Strict {
        config = config.strict_lambda();
    }
    if let Some(omega) = args.omega_start {
        config.omega_start = omega;
    }
    config.validate()?;
    Ok(config)
}

fn calendar(args: &FitArgs) -> Result<TradingCalendar> {
    match &args.holidays {
        Some(path) => lio::load_holidays(path),
        None => Ok(TradingCalendar::weekends_only()),
    }
}

/// Pretty JSON with a trailing newline, to a file or stdout.
fn emit<T: Serialize>(value: &T, path: Option<&PathBuf>) -> Result<()> {
    match path {
        Some(path) => lio::write_json(value, path),
        None => {
            let stdout = io::stdout();
            let mut out = stdout.lock();
            serde_json::to_writer_pretty(&mut out, value)?;
            writeln!(out)?;
            Ok(())
        }
    }
}

fn write_plot(
    path: &Path,
    window: &PriceSeries,
    params: &LpplParams,
    tc: &lppl_core::scan::TcEstimate,
    calendar: &TradingCalendar,
) -> Result<()> {
    let rows = report::plot_rows(window, params, tc, calendar)?;
    let mut out = BufWriter::new(File::create(path)?);
    report::write_plot_csv(&rows, &mut out)?;
    out.flush()?;
    Ok(())
}

pub fn fit(cmd: &FitCmd) -> Result<()> {
    let (series, input) = prepare(&cmd.input)?;
    let config = fit_config(&cmd.fit, cmd.input.standardize)?;
    let calendar = calendar(&cmd.fit)?;
    let result = fit_window(&series, &config)?;
    let end_index = series.len() - 1;
    let out = report::fit_report(input, &config, &result, &calendar, end_index)?;
    if let Some(path) = &cmd.fit.plot {
        write_plot(path, &series, &result.params, &out.tc, &calendar)?;
    }
    emit(&out, cmd.fit.report.as_ref())
}

pub fn scan_cmd(cmd: &ScanCmd) -> Result<()> {
    let (series, input) = prepare(&cmd.input)?;
    let config = ScanConfig {
        t1_first: cmd.t1_first,
        t1_last: cmd.t1_last,
        t1_step: cmd.t1_step,
        t2: cmd.t2,
        fit: fit_config(&cmd.fit, cmd.input.standardize)?,
        calendar: calendar(&cmd.fit)?,
    };
    let result = scan(&series, &config)?;
    if let Some(path) = &cmd.fit.plot {
        let best = result
            .windows
            .iter()
            .find(|w| w.fit.as_ref() == Some(&result.best))
            .expect("best fit comes from one of the windows");
        // Parameters live on the window's own axis, so plot that window.
        let window = series.slice(best.start_index..result.t2_index + 1);
        let tc = lppl_core::scan::TcEstimate {
            index: result.tc.offset + (window.len() - 1) as f64,
            ..result.tc
        };
        write_plot(path, &window, &result.best.params, &tc, &config.calendar)?;
    }
    let out = report::scan_report(input, &config, &result);
    emit(&out, cmd.fit.report.as_ref())
}

pub fn correlate(cmd: &CorrelateCmd) -> Result<()> {
    let columns = ColumnSpec::default();
    let reference = load(&cmd.reference, &columns)?.between(cmd.from, cmd.to);
    let mut inputs = vec![summary(&cmd.reference, &reference, Vec::new())];
    let mut others = Vec::with_capacity(cmd.inputs.len());
    for path in &cmd.inputs {
        let series = load(path, &columns)?.between(cmd.from, cmd.to);
        inputs.push(summary(path, &series, Vec::new()));
        others.push(series);
    }
    let kind = match cmd.returns {
        ReturnsArg::Diff => ReturnKind::Difference,
        ReturnsArg::Log => ReturnKind::Log,
    };
    let correlations = analytics::correlation_report(&reference, &others, kind)?;
    emit(&report::correlate_report(inputs, correlations), cmd.report.as_ref())
}

fn output_summary(path: &Path, series: &PriceSeries) -> OutputSummary {
    OutputSummary {
        path: path_string(path),
        series: SeriesSummary::of(series),
    }
}

pub fn basket(cmd: &BasketCmd) -> Result<()> {
    let columns = ColumnSpec::default();
    let mut inputs = Vec::with_capacity(cmd.inputs.len());
    let mut components = Vec::with_capacity(cmd.inputs.len());
    for path in &cmd.inputs {
        let mut series = load(path, &columns)?.between(cmd.from, cmd.to);
        let mut transforms = Vec::new();
        if cmd.invert {
            series = analytics::invert_price(&series)?;
            transforms.push("invert".to_string());
        }
        inputs.push(summary(path, &series, transforms));
        components.push(series);
    }
    let (mode, name) = match cmd.mode {
        BasketModeArg::Standardized => (BasketMode::Standardized, "standardized"),
        BasketModeArg::RawSum => (BasketMode::RawSum, "raw-sum"),
    };
    let basket = analytics::build_basket(&components, mode)?.with_label(label_of(&cmd.output));
    lio::write_csv(&basket, &cmd.output)?;
    let out = report::transform_report(
        "basket",
        inputs,
        Some(name.to_string()),
        output_summary(&cmd.output, &basket),
    );
    emit(&out, cmd.report.as_ref())
}

pub fn transform(
    command: &'static str,
    cmd: &TransformCmd,
    f: fn(&PriceSeries) -> Result<PriceSeries>,
) -> Result<()> {
    let series = load(&cmd.input, &ColumnSpec::default())?;
    let input = summary(&cmd.input, &series, Vec::new());
    let result = f(&series)?;
    lio::write_csv(&result, &cmd.output)?;
    let out = report::transform_report(command, vec![input], None, output_summary(&cmd.output, &result));
    emit(&out, cmd.report.as_ref())
}

/// Default critical time for `synth`: this many days past the last observation.
const DEFAULT_TC_LEAD: f64 = 20.0;

pub fn synth(cmd: &SynthCmd) -> Result<()> {
    let tc = cmd
        .tc
        .unwrap_or(cmd.n.saturating_sub(1) as f64 + DEFAULT_TC_LEAD);
    let spec = SynthSpec {
        params: LpplParams {
            a: cmd.a,
            b: cmd.b,
            c1: cmd.c1,
            c2: cmd.c2,
            m: cmd.m,
            omega: cmd.omega,
            tc,
        },
        n: cmd.n,
        noise_sigma: cmd.noise,
        seed: cmd.seed,
        start_date: cmd.start_date,
    };
    let generated = synth::generate(&spec)?;
    let series = generated.series.with_label(label_of(&cmd.output));
    lio::write_csv(&series, &cmd.output)?;
    lio::write_json(&generated.truth, &cmd.truth)?;
    let out = report::synth_report(
        output_summary(&cmd.output, &series),
        path_string(&cmd.truth),
        generated.truth,
    );
    emit(&out, cmd.report.as_ref())
}
