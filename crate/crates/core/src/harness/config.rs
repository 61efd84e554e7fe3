//! Flat `key = value` experiment files.
//!
//! One key per line, `#` starts a comment, blank lines are ignored. Unknown
//! and repeated keys are errors. `problem` selects the defaults that the
//! remaining keys override.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use super::{ExperimentConfig, Loading, Mode, ProblemKind};
use crate::error::{Error, Result};

const KEYS: &[&str] = &[
    "problem",
    "load",
    "force",
    "delta",
    "scheme",
    "mode",
    "n",
    "n_list",
    "stabilize",
    "h_stab",
    "E",
    "nu",
    "bar_length",
    "bar_nodes",
    "area",
    "grid",
    "spacing",
    "origin",
    "rbf_alpha",
    "rbf_augmented",
    "sph_h_factor",
];

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut entries: BTreeMap<&str, (usize, &str)> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {line_no}: expected 'key = value'")))?;
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.contains(&key) {
            return Err(Error::Config(format!("line {line_no}: unknown key '{key}'")));
        }
        if let Some((first, _)) = entries.insert(key, (line_no, value)) {
            return Err(Error::Config(format!("line {line_no}: key '{key}' already set on line {first}")));
        }
    }

    let mut config = match entries.get("problem").map(|e| e.1) {
        None | Some("bar1d") => ExperimentConfig::bar_default(),
        Some("beam3d") => ExperimentConfig::beam_default(),
        Some(other) => return Err(Error::Config(format!("unknown problem '{other}'"))),
    };
    let get = |key: &str| entries.get(key).map(|&(line, v)| (line, v));

    if let Some((line, v)) = get("mode") {
        config.mode = at(line, v.parse::<Mode>())?;
        // Corrected runs default to plain Neumann rows.
        config.stabilize = config.mode == Mode::Legacy && config.problem == ProblemKind::Bar1d;
    }
    if let Some((line, v)) = get("scheme") {
        config.scheme = at(line, v.parse())?;
    }
    let force = get("force").map(|(l, v)| number::<f64>(l, "force", v)).transpose()?;
    let delta = get("delta").map(|(l, v)| number::<f64>(l, "delta", v)).transpose()?;
    let load = get("load").map(|(_, v)| v).unwrap_or(match config.loading {
        Loading::EndForce(_) => "end-force",
        Loading::PrescribedTip(_) => "prescribed-tip",
    });
    config.loading = match load {
        "end-force" => Loading::EndForce(force.unwrap_or(50.0)),
        "prescribed-tip" => Loading::PrescribedTip(delta.unwrap_or(match config.problem {
            ProblemKind::Bar1d => 0.02475,
            ProblemKind::Beam3d => 5.0,
        })),
        other => return Err(Error::Config(format!("unknown load '{other}'"))),
    };
    if let Some((l, v)) = get("n") {
        config.n = number(l, "n", v)?;
        config.n_list = vec![config.n];
    }
    if let Some((l, v)) = get("n_list") {
        config.n_list = list(l, "n_list", v)?;
    }
    if let Some((l, v)) = get("stabilize") {
        config.stabilize = switch(l, v)?;
    }
    if let Some((l, v)) = get("h_stab") {
        config.h_stab = Some(number(l, "h_stab", v)?);
    }
    if let Some((l, v)) = get("E") {
        config.e = number(l, "E", v)?;
    }
    if let Some((l, v)) = get("nu") {
        config.nu = number(l, "nu", v)?;
    }
    if let Some((l, v)) = get("bar_length") {
        config.bar_length = number(l, "bar_length", v)?;
    }
    if let Some((l, v)) = get("bar_nodes") {
        config.bar_nodes = number(l, "bar_nodes", v)?;
    }
    if let Some((l, v)) = get("area") {
        config.area = number(l, "area", v)?;
    }
    if let Some((l, v)) = get("grid") {
        let dims: Vec<usize> = v
            .split('x')
            .map(|s| number(l, "grid", s.trim()))
            .collect::<Result<_>>()?;
        config.grid = dims
            .try_into()
            .map_err(|_| Error::Config(format!("line {l}: grid must look like 5x5x100")))?;
    }
    if let Some((l, v)) = get("spacing") {
        config.spacing = number(l, "spacing", v)?;
    }
    if let Some((l, v)) = get("origin") {
        let o: Vec<f64> = list(l, "origin", v)?;
        config.origin = o
            .try_into()
            .map_err(|_| Error::Config(format!("line {l}: origin needs three coordinates")))?;
    }
    if let Some((l, v)) = get("rbf_alpha") {
        config.rbf_alpha = number(l, "rbf_alpha", v)?;
    }
    if let Some((l, v)) = get("rbf_augmented") {
        config.rbf_augmented = switch(l, v)?;
    }
    if let Some((l, v)) = get("sph_h_factor") {
        config.sph_h_factor = number(l, "sph_h_factor", v)?;
    }
    config.validate()?;
    Ok(config)
}

fn at<T>(line: usize, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::Config(format!("line {line}: {e}")))
}

fn number<T: FromStr>(line: usize, key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Config(format!("line {line}: cannot parse '{v}' for {key}")))
}

fn list<T: FromStr>(line: usize, key: &str, v: &str) -> Result<Vec<T>> {
    v.split(',').map(|s| number(line, key, s.trim())).collect()
}

fn switch(line: usize, v: &str) -> Result<bool> {
    match v {
        "on" | "true" => Ok(true),
        "off" | "false" => Ok(false),
        other => Err(Error::Config(format!("line {line}: expected on/off, got '{other}'"))),
    }
}
