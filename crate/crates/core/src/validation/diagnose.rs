use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{ChannelClass, ChannelMetrics};
use crate::powerflow::{Stage, StageComparison};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiagnosisThresholds {
    /// Pre-event voltage error, pu.
    pub pre_voltage: f64,
    /// Pre-event flow error, relative and absolute (MW/MVAr).
    pub pre_flow_rel: f64,
    pub pre_flow_abs: f64,
    /// Post-event frequency offset, Hz.
    pub frequency_offset: f64,
    /// Nadir timing and depth tolerances, s and Hz.
    pub nadir_time: f64,
    pub nadir_depth: f64,
    /// Voltage extremum error at a boundary bus, pu.
    pub boundary_voltage: f64,
}

impl Default for DiagnosisThresholds {
    fn default() -> Self {
        Self {
            pre_voltage: 0.01,
            pre_flow_rel: 0.05,
            pre_flow_abs: 1.0,
            frequency_offset: 0.02,
            nadir_time: 1.0,
            nadir_depth: 0.05,
            boundary_voltage: 0.01,
        }
    }
}

pub struct DiagnosisInputs<'a> {
    pub stages: &'a [StageComparison],
    pub metrics: &'a [ChannelMetrics],
    /// RAS/relay ids seen operating in the measured event.
    pub measured_ras: &'a [String],
    /// RAS ids that acted in the simulation.
    pub simulated_ras: &'a [String],
    /// Display names of the equivalent's boundary buses.
    pub boundary_buses: &'a [String],
    pub thresholds: &'a DiagnosisThresholds,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    /// Rule letter, `a` to `e`.
    pub rule: char,
    pub hint: String,
}

fn names(list: &[&str]) -> String {
    list.join(", ")
}

/// Evaluates the rule table in fixed order.
pub fn diagnose(inputs: &DiagnosisInputs<'_>) -> Vec<Diagnostic> {
    let th = inputs.thresholds;
    let mut out = Vec::new();

    // (a) pre-event operating point
    let mut flagged: Vec<(&str, f64)> = Vec::new();
    for stage in inputs.stages.iter().filter(|s| s.stage == Stage::PreEvent) {
        for row in &stage.rows {
            let bad = match ChannelClass::of(&row.channel) {
                Some(ChannelClass::Voltage) => row.abs_error > th.pre_voltage,
                Some(ChannelClass::Power) => {
                    row.rel_error > th.pre_flow_rel && row.abs_error > th.pre_flow_abs
                }
                _ => false,
            };
            if bad {
                flagged.push((&row.signal, row.rel_error));
            }
        }
    }
    if !flagged.is_empty() {
        flagged.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(b.0)));
        let worst: Vec<String> = flagged
            .iter()
            .take(3)
            .map(|(s, r)| format!("{s} ({:.1}%)", r * 100.0))
            .collect();
        out.push(Diagnostic {
            rule: 'a',
            hint: format!(
                "pre-event dispatch/topology mismatch; worst signals: {}",
                worst.join(", ")
            ),
        });
    }

    let freq: Vec<&ChannelMetrics> = inputs
        .metrics
        .iter()
        .filter(|m| ChannelClass::of(&m.channel) == Some(ChannelClass::Frequency))
        .collect();

    // (b) settled frequency off while the nadir timing agrees
    let offset: Vec<&str> = freq
        .iter()
        .filter(|m| {
            m.steady_state_offset.abs() > th.frequency_offset
                && m.extremum_time_error.abs() <= th.nadir_time
        })
        .map(|m| m.signal.as_str())
        .collect();
    if !offset.is_empty() {
        out.push(Diagnostic {
            rule: 'b',
            hint: format!(
                "governor droop / spinning-reserve mismatch on {}; rerun after adjust_governors_for_reserve",
                names(&offset)
            ),
        });
    }

    // (c) nadir late or early with the right depth
    let timing: Vec<&str> = freq
        .iter()
        .filter(|m| {
            m.extremum_time_error.abs() > th.nadir_time && m.extremum_error.abs() <= th.nadir_depth
        })
        .map(|m| m.signal.as_str())
        .collect();
    if !timing.is_empty() {
        out.push(Diagnostic {
            rule: 'c',
            hint: format!("inertia (H) mismatch on {}", names(&timing)),
        });
    }

    // (d) voltage error concentrated at the boundary
    let worst_v = inputs
        .metrics
        .iter()
        .filter(|m| ChannelClass::of(&m.channel) == Some(ChannelClass::Voltage))
        .max_by(|a, b| {
            a.extremum_error
                .abs()
                .total_cmp(&b.extremum_error.abs())
                .then(b.channel.cmp(&a.channel))
        });
    if let Some(m) = worst_v {
        let bus = m.channel.split_once(':').map(|x| x.1).unwrap_or("");
        if m.extremum_error.abs() > th.boundary_voltage && inputs.boundary_buses.iter().any(|b| b == bus) {
            out.push(Diagnostic {
                rule: 'd',
                hint: format!(
                    "external equivalent strength mismatch (largest voltage error {:.4} pu at boundary bus {bus}); compare smtl vs detailed",
                    m.extremum_error
                ),
            });
        }
    }

    // (e) protection operations that only one side shows
    let measured: BTreeSet<&str> = inputs.measured_ras.iter().map(String::as_str).collect();
    let simulated: BTreeSet<&str> = inputs.simulated_ras.iter().map(String::as_str).collect();
    let only_meas: Vec<&str> = measured.difference(&simulated).copied().collect();
    let only_sim: Vec<&str> = simulated.difference(&measured).copied().collect();
    if !only_meas.is_empty() || !only_sim.is_empty() {
        let mut parts = Vec::new();
        if !only_meas.is_empty() {
            parts.push(format!("measured only: {}", names(&only_meas)));
        }
        if !only_sim.is_empty() {
            parts.push(format!("simulated only: {}", names(&only_sim)));
        }
        out.push(Diagnostic {
            rule: 'e',
            hint: format!("protection/RAS model mismatch ({})", parts.join("; ")),
        });
    }
    out
}
