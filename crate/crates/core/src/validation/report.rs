use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use serde::Serialize;

use super::{AlignedPair, ChannelMetrics, Diagnostic, Grade};
use crate::powerflow::StageComparison;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub case: String,
    pub event: String,
    pub tool_version: String,
    /// Every option and default used, printed for reruns.
    pub settings: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradedChannel {
    pub signal: String,
    pub channel: String,
    pub grade: Grade,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub provenance: Provenance,
    pub stages: Vec<StageComparison>,
    pub metrics: Vec<ChannelMetrics>,
    pub grades: Vec<GradedChannel>,
    pub diagnostics: Vec<Diagnostic>,
    /// Signals left out of the comparison.
    pub missing: Vec<String>,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn all_a(&self) -> bool {
        self.grades.iter().all(|g| g.grade == Grade::A)
    }

    pub fn worst_grade(&self) -> Option<Grade> {
        self.grades.iter().map(|g| g.grade).max()
    }
}

pub fn render_text(report: &ValidationReport) -> String {
    let mut s = String::new();
    let p = &report.provenance;
    let _ = writeln!(s, "VALIDATION REPORT");
    let _ = writeln!(s, "case: {}", p.case);
    let _ = writeln!(s, "event: {}", p.event);
    let _ = writeln!(s, "tool: gridseam {}", p.tool_version);
    let _ = writeln!(s, "settings:");
    for (k, v) in &p.settings {
        let _ = writeln!(s, "  {k} = {v}");
    }

    for st in &report.stages {
        let _ = writeln!(s, "\n[{}] window {} .. {} s", st.stage, st.window.0, st.window.1);
        if st.rows.is_empty() {
            let _ = writeln!(s, "  (no compared signals)");
        }
        for r in &st.rows {
            let _ = writeln!(
                s,
                "  {:<24} {:<28} meas {:>12.6} sim {:>12.6} err {:>10.6} ({:.2}%)",
                r.signal,
                r.channel,
                r.measured,
                r.simulated,
                r.abs_error,
                r.rel_error * 100.0
            );
        }
        if !st.unmapped.is_empty() {
            let _ = writeln!(s, "  unmapped: {}", st.unmapped.join(", "));
        }
        if !st.no_data.is_empty() {
            let _ = writeln!(s, "  no samples in window: {}", st.no_data.join(", "));
        }
    }

    let _ = writeln!(s, "\nCHANNELS");
    if report.metrics.is_empty() {
        let _ = writeln!(s, "  (none)");
    }
    for (m, g) in report.metrics.iter().zip(&report.grades) {
        let _ = writeln!(s, "  {} -> {}  grade {}", m.signal, m.channel, g.grade);
        let _ = writeln!(
            s,
            "    measured  max {:.6} @ {:.4} s  min {:.6} @ {:.4} s",
            m.measured_max, m.measured_max_t, m.measured_min, m.measured_min_t
        );
        let _ = writeln!(
            s,
            "    simulated max {:.6} @ {:.4} s  min {:.6} @ {:.4} s",
            m.simulated_max, m.simulated_max_t, m.simulated_min, m.simulated_min_t
        );
        let _ = writeln!(
            s,
            "    {:?} extremum error {:.6}  time error {:.4} s  steady-state offset {:.6}  rmse {:.6}",
            m.primary, m.extremum_error, m.extremum_time_error, m.steady_state_offset, m.rmse
        );
    }

    let _ = writeln!(s, "\nDIAGNOSTICS");
    if report.diagnostics.is_empty() {
        let _ = writeln!(s, "  none");
    }
    for d in &report.diagnostics {
        let _ = writeln!(s, "  ({}) {}", d.rule, d.hint);
    }
    if !report.missing.is_empty() {
        let _ = writeln!(s, "\nNOT COMPARED\n  {}", report.missing.join(", "));
    }
    if !report.warnings.is_empty() {
        let _ = writeln!(s, "\nWARNINGS");
        for w in &report.warnings {
            let _ = writeln!(s, "  {w}");
        }
    }
    s
}

/// File name of a channel's comparison CSV.
pub fn channel_file(signal: &str) -> String {
    let safe: String = signal
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '_' })
        .collect();
    format!("{safe}.csv")
}

/// Writes `report.txt`, `report.json` and `channels/<signal>.csv`.
pub fn emit_report(report: &ValidationReport, pairs: &[AlignedPair], dir: &Path) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("report.txt"), render_text(report))?;
    let json = serde_json::to_string_pretty(report).map_err(io::Error::other)?;
    fs::write(dir.join("report.json"), json + "\n")?;
    let ch = dir.join("channels");
    fs::create_dir_all(&ch)?;
    for p in pairs {
        let mut body = String::from("t_s,measured,simulated\n");
        for k in 0..p.t.len() {
            let _ = writeln!(body, "{},{},{}", p.t[k], p.measured[k], p.simulated[k]);
        }
        fs::write(ch.join(channel_file(&p.signal)), body)?;
    }
    Ok(())
}
