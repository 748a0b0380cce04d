//! `--config FILE` support. Entries are spliced into the argument list right
//! after the subcommand, so anything on the real command line wins.
//!
//! Two layouts are accepted: flat `key = value` lines (`#` comments), and the
//! `config.json` echo written by every run (its `flags` object).

use std::ffi::OsString;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};

use crate::args::FlagMap;

const RHO_FLAGS: [&str; 4] = ["rho", "theta", "rho-power", "case-ii"];

pub fn parse(text: &str) -> Result<FlagMap> {
    if text.trim_start().starts_with('{') {
        let value: serde_json::Value =
            serde_json::from_str(text).context("config is not valid JSON")?;
        let flags = value.get("flags").unwrap_or(&value);
        let Some(obj) = flags.as_object() else {
            bail!("JSON config must be an object of flag values");
        };
        return obj
            .iter()
            .map(|(k, v)| {
                let s = match v {
                    serde_json::Value::String(s) => s.clone(),
                    other => other.to_string(),
                };
                Ok((k.clone(), s))
            })
            .collect();
    }
    let mut map = FlagMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            bail!("line {}: expected `key = value`", n + 1);
        };
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

fn config_path(args: &[OsString]) -> Option<OsString> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Some(p.into());
        }
    }
    None
}

fn has_flag(args: &[OsString], key: &str) -> bool {
    let long = format!("--{key}");
    args.iter().any(|a| {
        let s = a.to_string_lossy();
        s == long || s.starts_with(&format!("{long}="))
    })
}

/// Returns `args` with the config file entries inserted after the
/// subcommand.
pub fn expand(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let text = fs::read_to_string(Path::new(&path))
        .with_context(|| format!("reading config {}", Path::new(&path).display()))?;
    let map = parse(&text)?;
    // a rho-style flag on the command line replaces the file's choice
    let rho_on_cli = RHO_FLAGS.iter().any(|k| has_flag(&args, k));
    let mut injected = Vec::new();
    for (key, value) in &map {
        if key == "config" || (rho_on_cli && RHO_FLAGS.contains(&key.as_str())) {
            continue;
        }
        match value.as_str() {
            "true" => injected.push(format!("--{key}").into()),
            "false" => {}
            _ => injected.push(format!("--{key}={value}").into()),
        }
    }
    let at = args.len().min(2);
    let mut out = args[..at].to_vec();
    out.extend(injected);
    out.extend_from_slice(&args[at..]);
    Ok(out)
}
