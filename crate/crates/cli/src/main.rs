mod args;
mod commands;
mod config;

use std::process::ExitCode;

use clap::Parser;
use lppl_core::LpplError;
use serde_json::json;

use args::{Cli, Command};

const EXIT_USAGE: u8 = 2;
const EXIT_DATA: u8 = 3;
const EXIT_NO_FIT: u8 = 4;

fn fail(kind: &str, message: &str, code: u8) -> ExitCode {
    let body = json!({ "error": { "kind": kind, "message": message, "exit_code": code } });
    eprintln!("{body}");
    ExitCode::from(code)
}

fn classify(err: &LpplError) -> (&'static str, u8) {
    match err {
        LpplError::Config(_) => ("config", EXIT_USAGE),
        LpplError::NoFeasibleFit(_) => ("no_feasible_fit", EXIT_NO_FIT),
        LpplError::Domain(_) => ("domain", EXIT_DATA),
        LpplError::RankDeficient(_) => ("rank_deficient", EXIT_DATA),
        LpplError::Degenerate(_) => ("degenerate", EXIT_DATA),
        LpplError::Parse { .. } => ("parse", EXIT_DATA),
        LpplError::DuplicateDate(_) => ("duplicate_date", EXIT_DATA),
        LpplError::NotTradingDay(_) => ("not_trading_day", EXIT_DATA),
        LpplError::GridTooLarge { .. } => ("grid_too_large", EXIT_DATA),
        LpplError::Io(_) => ("io", EXIT_DATA),
        LpplError::Csv(_) => ("csv", EXIT_DATA),
        LpplError::Json(_) => ("json", EXIT_DATA),
    }
}

fn run(cli: &Cli) -> lppl_core::Result<()> {
    match &cli.command {
        Command::Fit(cmd) => commands::fit(cmd),
        Command::Scan(cmd) => commands::scan_cmd(cmd),
        Command::Correlate(cmd) => commands::correlate(cmd),
        Command::Basket(cmd) => commands::basket(cmd),
        Command::Invert(cmd) => {
            commands::transform("invert", cmd, lppl_core::analytics::invert_price)
        }
        Command::Standardize(cmd) => {
            commands::transform("standardize", cmd, lppl_core::analytics::standardize)
        }
        Command::Synth(cmd) => commands::synth(cmd),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();

    let argv = match config::expand(std::env::args_os().collect()) {
        Ok(argv) => argv,
        Err(message) => return fail("config", &message, EXIT_USAGE),
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(err) if !err.use_stderr() => err.exit(),
        Err(err) => return fail("usage", err.to_string().trim_end(), EXIT_USAGE),
    };
    if let Some(threads) = cli.threads {
        if let Err(err) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            return fail("config", &err.to_string(), EXIT_USAGE);
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let (kind, code) = classify(&err);
            fail(kind, &err.to_string(), code)
        }
    }
}
