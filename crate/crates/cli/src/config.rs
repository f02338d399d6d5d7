//! `key=value` config files, merged into the argument list before parsing.
//!
//! Keys are flag names without dashes (`n = 20`, `dicke_mid = true`). A key is ignored when the
//! same flag appears on the command line, so explicit flags always win. `true` turns a switch
//! on, `false` leaves it off; `#` starts a comment.

use std::ffi::OsString;
use std::path::Path;

use crate::CliError;

/// Global options that take a value; needed to find the subcommand position.
const VALUED_GLOBALS: [&str; 3] = ["--format", "--out", "--config"];

pub fn parse(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected key=value, got `{line}`", i + 1)))?;
        let key = key.trim().trim_start_matches('-').replace('_', "-");
        if key.is_empty() {
            return Err(CliError::Usage(format!("config line {}: empty key", i + 1)));
        }
        out.push((key, value.trim().to_string()));
    }
    Ok(out)
}

fn config_path(args: &[OsString]) -> Option<OsString> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().cloned();
        }
        if let Some(v) = s.strip_prefix("--config=") {
            return Some(v.into());
        }
    }
    None
}

fn subcommand_index(args: &[OsString]) -> Option<usize> {
    let mut i = 1;
    while i < args.len() {
        let s = args[i].to_string_lossy();
        if VALUED_GLOBALS.contains(&s.as_ref()) {
            i += 2;
        } else if s.starts_with('-') {
            i += 1;
        } else {
            return Some(i);
        }
    }
    None
}

fn present_flags(args: &[OsString]) -> Vec<String> {
    args.iter()
        .filter_map(|a| {
            let s = a.to_string_lossy();
            let name = s.strip_prefix("--")?;
            Some(name.split('=').next().unwrap_or(name).to_string())
        })
        .collect()
}

/// Reads the config file named by `--config`, if any, and splices its entries in right after
/// the subcommand.
pub fn merge(args: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(Path::new(&path))
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.to_string_lossy())))?;
    let entries = parse(&text)?;
    let present = present_flags(&args);
    let mut extra: Vec<OsString> = Vec::new();
    for (key, value) in entries {
        if present.contains(&key) || key == "config" {
            continue;
        }
        match value.to_ascii_lowercase().as_str() {
            "true" | "yes" | "on" => extra.push(format!("--{key}").into()),
            "false" | "no" | "off" => {}
            _ => {
                extra.push(format!("--{key}").into());
                extra.push(value.into());
            }
        }
    }
    let at = subcommand_index(&args).map(|i| i + 1).unwrap_or(args.len());
    let mut merged = args;
    merged.splice(at..at, extra);
    Ok(merged)
}
