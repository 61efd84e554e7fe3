//! CSV reports. Data rows hold no timing unless asked to, so repeated runs
//! of one config produce identical files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::RunRecord;
use crate::error::{Error, Result};

const HEADER: &str =
    "scheme,mode,n,problem,tip_mm,rel_l2,oscillation_count,min_moment_rcond,global_rcond,residual,wall_ms,status";

/// Where wall-clock times go.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TimingColumn {
    /// `wall_ms` left empty; use [`emit_timing`] for a sidecar file.
    #[default]
    Empty,
    Inline,
}

fn float(v: f64) -> String {
    format!("{v:e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(float).unwrap_or_default()
}

fn sorted(records: &[RunRecord]) -> Vec<&RunRecord> {
    let mut rows: Vec<&RunRecord> = records.iter().collect();
    rows.sort_by_key(|r| (r.config.scheme, r.config.n));
    rows
}

/// Header plus one row per record, ordered by `(scheme, n)`.
pub fn render_csv(records: &[RunRecord], timing: TimingColumn) -> String {
    let mut out = String::new();
    out.push_str(HEADER);
    out.push('\n');
    for r in sorted(records) {
        let status = match &r.failure {
            None => "ok".to_string(),
            Some(f) => format!("error:{}", f.stage.name()),
        };
        let wall = match timing {
            TimingColumn::Empty => String::new(),
            TimingColumn::Inline => format!("{:.3}", r.wall_ms),
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.config.scheme,
            r.config.mode.name(),
            r.config.n,
            r.config.problem.name(),
            opt(r.tip_mm),
            opt(r.error.as_ref().map(|e| e.rel_l2)),
            r.error.as_ref().map(|e| e.oscillation_count.to_string()).unwrap_or_default(),
            float(r.min_moment_rcond),
            float(r.global_rcond),
            float(r.residual),
            wall,
            status,
        );
    }
    out
}

pub fn emit_csv(records: &[RunRecord], path: &Path, timing: TimingColumn) -> Result<()> {
    if records.is_empty() {
        return Err(Error::Missing("no records to write".into()));
    }
    std::fs::write(path, render_csv(records, timing))?;
    Ok(())
}

/// `<path>.timing` with one `scheme,n,wall_ms` row per record.
pub fn emit_timing(records: &[RunRecord], path: &Path) -> Result<PathBuf> {
    let mut sidecar = path.as_os_str().to_owned();
    sidecar.push(".timing");
    let sidecar = PathBuf::from(sidecar);
    let mut out = String::from("scheme,n,wall_ms\n");
    for r in sorted(records) {
        let _ = writeln!(out, "{},{},{:.3}", r.config.scheme, r.config.n, r.wall_ms);
    }
    std::fs::write(&sidecar, out)?;
    Ok(sidecar)
}

/// Axis profile as `position_mm,displacement_mm,oracle_mm`.
pub fn emit_profile(record: &RunRecord, path: &Path) -> Result<()> {
    let (Some(profile), Some(report)) = (&record.profile, &record.error) else {
        return Err(Error::Missing("record has no displacement profile".into()));
    };
    let mut out = String::from("position_mm,displacement_mm,oracle_mm\n");
    for (&x, &(_, c, r)) in profile.positions.iter().zip(&report.profile) {
        let _ = writeln!(out, "{},{},{}", float(x), float(c), float(r));
    }
    std::fs::write(path, out)?;
    Ok(())
}
