//! `--config` support: a TOML file whose keys are flag names.
//!
//! Top-level keys apply to every subcommand that accepts them; a `[scan]` (etc.) table
//! applies to that subcommand only. Values are spliced in right after the subcommand name,
//! so flags given on the command line take precedence.

use std::ffi::OsString;
use std::path::Path;

use clap::CommandFactory;

use crate::args::Cli;

fn config_path(args: &[OsString]) -> Option<OsString> {
    let mut iter = args.iter();
    while let Some(arg) = iter.next() {
        if arg == "--config" {
            return iter.next().cloned();
        }
        if let Some(rest) = arg.to_str().and_then(|s| s.strip_prefix("--config=")) {
            return Some(rest.into());
        }
    }
    None
}

fn scalar(value: &toml::Value) -> Result<String, String> {
    match value {
        toml::Value::String(s) => Ok(s.clone()),
        toml::Value::Integer(i) => Ok(i.to_string()),
        toml::Value::Float(f) => Ok(f.to_string()),
        toml::Value::Datetime(d) => Ok(d.to_string()),
        other => Err(format!("unsupported config value {other}")),
    }
}

fn push_flag(out: &mut Vec<OsString>, key: &str, value: &toml::Value) -> Result<(), String> {
    match value {
        toml::Value::Boolean(true) => out.push(format!("--{key}").into()),
        toml::Value::Boolean(false) => {}
        toml::Value::Array(items) => {
            for item in items {
                out.push(format!("--{key}").into());
                out.push(scalar(item)?.into());
            }
        }
        other => {
            out.push(format!("--{key}").into());
            out.push(scalar(other)?.into());
        }
    }
    Ok(())
}

/// Returns `args` with the config file's flags inserted after the subcommand.
pub fn expand(args: Vec<OsString>) -> Result<Vec<OsString>, String> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let path = Path::new(&path);
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    let table: toml::Table = text
        .parse()
        .map_err(|e| format!("invalid config {}: {e}", path.display()))?;

    let command = Cli::command();
    let names: Vec<String> = command
        .get_subcommands()
        .map(|c| c.get_name().to_string())
        .collect();
    let Some(position) = args
        .iter()
        .position(|a| a.to_str().is_some_and(|s| names.iter().any(|n| n == s)))
    else {
        return Ok(args);
    };
    let sub_name = args[position].to_string_lossy().into_owned();
    let sub = command
        .find_subcommand(&sub_name)
        .expect("subcommand listed above");
    let accepts = |key: &str| {
        sub.get_arguments()
            .any(|a| a.get_long() == Some(key) && key != "config")
    };

    let mut injected = Vec::new();
    for (key, value) in &table {
        if let toml::Value::Table(section) = value {
            if key == &sub_name {
                for (k, v) in section {
                    push_flag(&mut injected, k, v)?;
                }
            } else if !names.contains(key) {
                return Err(format!("unknown config section [{key}]"));
            }
        } else if accepts(key) {
            push_flag(&mut injected, key, value)?;
        }
    }

    let mut out = args[..=position].to_vec();
    out.extend(injected);
    out.extend_from_slice(&args[position + 1..]);
    Ok(out)
}
