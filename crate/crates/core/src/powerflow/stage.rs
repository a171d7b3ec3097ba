use std::cmp::Ordering;

use serde::Serialize;

use super::PowerFlowSolution;
use crate::dynamics::SimulationResult;
use crate::netmodel::NetworkCase;
use crate::validation::{time_average, MeasurementSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    PreEvent,
    DuringEvent,
    PostEvent,
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Stage::PreEvent => "pre-event",
            Stage::DuringEvent => "during-event",
            Stage::PostEvent => "post-event",
        })
    }
}

/// Source of model-side values addressed by channel name.
pub trait ModelQuantities {
    fn quantity(&self, channel: &str) -> Option<f64>;
}

/// Steady-state quantities of a solved case: `V:` (pu), `P:`/`Q:`
/// (from-end MW/MVAr) and `F:` (nominal frequency).
pub struct SolvedCase<'a> {
    pub case: &'a NetworkCase,
    pub solution: &'a PowerFlowSolution<f64>,
    pub f_nominal: f64,
}

impl<'a> SolvedCase<'a> {
    pub fn new(case: &'a NetworkCase, solution: &'a PowerFlowSolution<f64>) -> Self {
        Self {
            case,
            solution,
            f_nominal: 60.0,
        }
    }
}

impl ModelQuantities for SolvedCase<'_> {
    fn quantity(&self, channel: &str) -> Option<f64> {
        let (kind, key) = channel.split_once(':')?;
        match kind {
            "V" | "F" => {
                let bus = self.case.find_bus(key)?;
                let i = self.solution.position(&bus.id)?;
                Some(if kind == "V" {
                    self.solution.v[i]
                } else {
                    self.f_nominal
                })
            }
            "P" | "Q" => {
                let b = self
                    .case
                    .all_branches()
                    .find(|b| self.case.branch_label(b) == key)?;
                let f = self.solution.branches.iter().find(|f| f.id == b.id)?;
                Some(if kind == "P" { f.p_from } else { f.q_from })
            }
            _ => None,
        }
    }
}

/// Time average of simulated channels over a window.
pub struct SimulatedWindow<'a> {
    pub result: &'a SimulationResult,
    pub window: (f64, f64),
}

impl ModelQuantities for SimulatedWindow<'_> {
    fn quantity(&self, channel: &str) -> Option<f64> {
        let series = self.result.channels.get(channel)?;
        let t = self.result.times();
        time_average(&t, series, self.window)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageRow {
    pub signal: String,
    pub channel: String,
    pub measured: f64,
    pub simulated: f64,
    pub abs_error: f64,
    pub rel_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageComparison {
    pub stage: Stage,
    pub window: (f64, f64),
    /// Sorted by descending relative error.
    pub rows: Vec<StageRow>,
    /// Signals with no mapping, or mapped to a channel the model lacks.
    pub unmapped: Vec<String>,
    /// Mapped signals without samples inside the window.
    pub no_data: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StageError {
    #[error("{stage} window [{start}, {end}] s contains no measurement samples")]
    EmptyWindow { stage: Stage, start: f64, end: f64 },
}

pub fn compare_stage_with(
    model: &dyn ModelQuantities,
    measurements: &MeasurementSet,
    stage: Stage,
    window: (f64, f64),
) -> Result<StageComparison, StageError> {
    let empty = || StageError::EmptyWindow {
        stage,
        start: window.0,
        end: window.1,
    };
    if !(window.1 >= window.0) {
        return Err(empty());
    }
    let mut rows = Vec::new();
    let mut unmapped = Vec::new();
    let mut no_data = Vec::new();
    let mut any_sample = false;
    for (signal, series) in &measurements.signals {
        let measured = time_average(&series.t, &series.values, window);
        any_sample |= measured.is_some();
        let Some(channel) = measurements.mapping.get(signal) else {
            unmapped.push(signal.clone());
            continue;
        };
        let Some(simulated) = model.quantity(channel) else {
            unmapped.push(signal.clone());
            continue;
        };
        let Some(measured) = measured else {
            no_data.push(signal.clone());
            continue;
        };
        let abs_error = (simulated - measured).abs();
        let rel_error = if measured.abs() > 1e-12 {
            abs_error / measured.abs()
        } else {
            abs_error
        };
        rows.push(StageRow {
            signal: signal.clone(),
            channel: channel.clone(),
            measured,
            simulated,
            abs_error,
            rel_error,
        });
    }
    if !any_sample {
        return Err(empty());
    }
    rows.sort_by(|a, b| {
        b.rel_error
            .partial_cmp(&a.rel_error)
            .unwrap_or(Ordering::Equal)
            .then_with(|| a.signal.cmp(&b.signal))
    });
    Ok(StageComparison {
        stage,
        window,
        rows,
        unmapped,
        no_data,
    })
}

/// Compares a power flow solution against the measurement averages over
/// `window`.
pub fn compare_stage(
    case: &NetworkCase,
    solution: &PowerFlowSolution<f64>,
    measurements: &MeasurementSet,
    stage: Stage,
    window: (f64, f64),
) -> Result<StageComparison, StageError> {
    compare_stage_with(&SolvedCase::new(case, solution), measurements, stage, window)
}
