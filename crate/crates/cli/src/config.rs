//! `key = value` configuration files whose keys mirror the long flags.
//!
//! Blank lines and lines starting with `#` are ignored. Values from the file
//! are appended to the command line only for flags the user did not pass,
//! so explicit flags always win.

use std::path::Path;

use crate::CliError;

pub fn parse(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::Usage(format!("config line {}: expected `key = value`", lineno + 1)));
        };
        let key = key.trim().trim_start_matches("--").replace('_', "-");
        let value = value.trim().trim_matches('"').to_string();
        if key.is_empty() || key == "config" {
            return Err(CliError::Usage(format!("config line {}: invalid key", lineno + 1)));
        }
        out.push((key, value));
    }
    Ok(out)
}

fn config_path(args: &[String]) -> Option<String> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some(p.to_string());
        }
    }
    None
}

fn has_flag(args: &[String], key: &str) -> bool {
    let flag = format!("--{key}");
    let prefix = format!("--{key}=");
    args.iter().any(|a| *a == flag || a.starts_with(&prefix))
}

/// Returns `args` extended with the settings of the `--config` file, if any.
pub fn merge_config_file(args: Vec<String>) -> Result<Vec<String>, CliError> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(Path::new(&path))
        .map_err(|e| CliError::Usage(format!("cannot read config file {path}: {e}")))?;
    let mut merged = args.clone();
    for (key, value) in parse(&text)? {
        if !has_flag(&args, &key) {
            merged.push(format!("--{key}"));
            merged.push(value);
        }
    }
    Ok(merged)
}
