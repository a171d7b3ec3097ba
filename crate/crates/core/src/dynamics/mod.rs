//! Fixed-step transient simulation: classical machines behind transient
//! reactance, first-order governors, constant-impedance loads, timed
//! events and RAS evaluated every step.

mod export;
mod frequency;
mod network;
mod reserve;
mod sim;

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use export::{write_channels_csv, write_measurement_csv};
pub use frequency::{bus_frequency, FrequencyError, FrequencyFilter, WASHOUT_TIME_CONSTANT};
pub use reserve::{
    adjust_governors_for_reserve, ReserveAdjustment, ReserveError, UnitDispatch,
};
pub use sim::{init_dynamics, internal_emf, simulate, DynamicState, InitError, SimError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GovernorParams {
    /// Droop, pu frequency per pu power on machine base.
    pub r: f64,
    /// Time constant, s.
    pub t_g: f64,
    /// Mechanical limits, pu on machine base.
    pub p_max: f64,
    pub p_min: f64,
    #[serde(default = "yes")]
    pub enabled: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MachineDynamics {
    pub id: String,
    /// Inertia constant, s on machine base.
    pub h: f64,
    /// Damping, pu power per pu speed.
    #[serde(default)]
    pub d: f64,
    /// Transient reactance, pu on machine base.
    pub xdp: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub governor: Option<GovernorParams>,
}

impl MachineDynamics {
    pub fn check(&self) -> Result<(), String> {
        if !(self.h > 0.0) {
            return Err(format!("machine {}: h must be > 0", self.id));
        }
        if !(self.xdp > 0.0) {
            return Err(format!("machine {}: xdp must be > 0", self.id));
        }
        if !(self.d >= 0.0) {
            return Err(format!("machine {}: d must be >= 0", self.id));
        }
        if let Some(g) = &self.governor {
            if !(g.r > 0.0 && g.t_g > 0.0 && g.p_min <= g.p_max) {
                return Err(format!(
                    "machine {}: governor needs r > 0, t_g > 0, p_min <= p_max",
                    self.id
                ));
            }
        }
        Ok(())
    }
}

/// Dynamics data file: `{"machines": [...]}`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsData {
    pub machines: Vec<MachineDynamics>,
}

impl DynamicsData {
    pub fn from_json(doc: &str) -> Result<Self, String> {
        let d: DynamicsData = serde_json::from_str(doc).map_err(|e| e.to_string())?;
        for m in &d.machines {
            m.check()?;
        }
        Ok(d)
    }
}

fn default_fault() -> Complex64 {
    Complex64::new(0.0, -1.0e4)
}

/// Disturbance or corrective action. Element references are ids (buses
/// may also be given by name).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case", deny_unknown_fields)]
pub enum Action {
    ApplyFault {
        bus: String,
        /// Shunt admittance, pu, `[re, im]`.
        #[serde(default = "default_fault")]
        admittance: Complex64,
    },
    ClearFault {
        bus: String,
    },
    TripBranch {
        branch: String,
    },
    TripMachine {
        machine: String,
    },
    ShedLoad {
        load: String,
        mw: f64,
    },
}

impl std::fmt::Display for Action {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Action::ApplyFault { bus, .. } => write!(f, "apply_fault {bus}"),
            Action::ClearFault { bus } => write!(f, "clear_fault {bus}"),
            Action::TripBranch { branch } => write!(f, "trip_branch {branch}"),
            Action::TripMachine { machine } => write!(f, "trip_machine {machine}"),
            Action::ShedLoad { load, mw } => write!(f, "shed_load {load} {mw} MW"),
        }
    }
}

impl Action {
    /// Checks that the referenced element exists in `case`.
    pub fn resolve(&self, case: &crate::netmodel::NetworkCase) -> Result<(), String> {
        let ok = match self {
            Action::ApplyFault { bus, .. } | Action::ClearFault { bus } => case.find_bus(bus).is_some(),
            Action::TripBranch { branch } => case.find_branch(branch).is_some(),
            Action::TripMachine { machine } => case.machine(machine).is_some(),
            Action::ShedLoad { load, .. } => case.load(load).is_some(),
        };
        if ok {
            Ok(())
        } else {
            Err(format!("{self}: unknown element"))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    /// Seconds from simulation start.
    pub t: f64,
    #[serde(flatten)]
    pub action: Action,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EventError {
    #[error("event {index} at t={t} s precedes the previous event")]
    NotSorted { index: usize, t: f64 },
    #[error("event {index}: clear_fault at bus '{bus}' without a prior apply_fault")]
    UnmatchedClear { index: usize, bus: String },
    #[error("event {index}: time {t} is not finite and non-negative")]
    BadTime { index: usize, t: f64 },
}

/// Time-ordered disturbance list.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<Event>", into = "Vec<Event>")]
pub struct EventSequence(Vec<Event>);

impl EventSequence {
    pub fn new(events: Vec<Event>) -> Result<Self, EventError> {
        let mut last = f64::NEG_INFINITY;
        let mut faulted: Vec<&str> = Vec::new();
        for (index, e) in events.iter().enumerate() {
            if !(e.t.is_finite() && e.t >= 0.0) {
                return Err(EventError::BadTime { index, t: e.t });
            }
            if e.t < last {
                return Err(EventError::NotSorted { index, t: e.t });
            }
            last = e.t;
            match &e.action {
                Action::ApplyFault { bus, .. } => faulted.push(bus),
                Action::ClearFault { bus } => match faulted.iter().position(|b| b == bus) {
                    Some(p) => {
                        faulted.remove(p);
                    }
                    None => {
                        return Err(EventError::UnmatchedClear {
                            index,
                            bus: bus.clone(),
                        })
                    }
                },
                _ => {}
            }
        }
        Ok(Self(events))
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn events(&self) -> &[Event] {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    /// Time of the first event, if any.
    pub fn first_time(&self) -> Option<f64> {
        self.0.first().map(|e| e.t)
    }

    pub fn from_json(doc: &str) -> Result<Self, String> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Doc {
            List(EventSequence),
            Wrapped { events: EventSequence },
        }
        match serde_json::from_str::<Doc>(doc) {
            Ok(Doc::List(s)) | Ok(Doc::Wrapped { events: s }) => Ok(s),
            Err(_) => {
                // re-parse as a plain list to surface the real message
                serde_json::from_str::<EventSequence>(doc).map_err(|e| e.to_string())
            }
        }
    }
}

impl TryFrom<Vec<Event>> for EventSequence {
    type Error = EventError;

    fn try_from(v: Vec<Event>) -> Result<Self, Self::Error> {
        Self::new(v)
    }
}

impl From<EventSequence> for Vec<Event> {
    fn from(s: EventSequence) -> Self {
        s.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Integrator {
    #[default]
    Rk4,
    Trapezoidal,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimOptions {
    /// Step, s.
    pub dt: f64,
    /// Horizon, s.
    pub duration: f64,
    pub integrator: Integrator,
    pub f_nominal: f64,
    /// Record every n-th step.
    pub record_stride: usize,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            dt: 1.0 / 240.0,
            duration: 10.0,
            integrator: Integrator::Rk4,
            f_nominal: 60.0,
            record_stride: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RasLogEntry {
    /// Time the action took effect.
    pub t: f64,
    pub detected_at: f64,
    pub ras_id: String,
    pub action: Action,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AppliedEvent {
    pub t: f64,
    pub action: Action,
    /// `schedule` or the id of the RAS that issued it.
    pub source: String,
    /// Set when the action was skipped (element already out, no fault).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub skipped: Option<String>,
}

/// Multichannel fixed-step time series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationResult {
    pub dt: f64,
    pub duration: f64,
    /// Spacing of recorded samples, `dt * record_stride`.
    pub sample_interval: f64,
    pub t: Vec<f64>,
    pub channels: BTreeMap<String, Vec<f64>>,
    pub ras_log: Vec<RasLogEntry>,
    pub event_log: Vec<AppliedEvent>,
    pub warnings: Vec<String>,
    /// Machine ids grouped by electrical island at the final step.
    pub final_islands: Vec<Vec<String>>,
}

impl SimulationResult {
    pub fn times(&self) -> &[f64] {
        &self.t
    }

    pub fn channel(&self, name: &str) -> Option<&[f64]> {
        self.channels.get(name).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }
}

/// Naming helpers for result channels.
pub mod channel {
    pub fn voltage(bus_name: &str) -> String {
        format!("V:{bus_name}")
    }

    pub fn frequency(bus_name: &str) -> String {
        format!("F:{bus_name}")
    }

    pub fn active_power(label: &str) -> String {
        format!("P:{label}")
    }

    pub fn reactive_power(label: &str) -> String {
        format!("Q:{label}")
    }

    pub fn angle(machine: &str) -> String {
        format!("ANG:{machine}")
    }

    pub fn speed(machine: &str) -> String {
        format!("SPD:{machine}")
    }

    /// Mechanical power, MW.
    pub fn mechanical_power(machine: &str) -> String {
        format!("PM:{machine}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn event_json_shape() {
        let seq = EventSequence::from_json(
            r#"[{"t": 1.0, "action": "apply_fault", "bus": "B1"},
                {"t": 1.1, "action": "clear_fault", "bus": "B1"},
                {"t": 2.0, "action": "shed_load", "load": "L1", "mw": 25}]"#,
        )
        .unwrap();
        assert_eq!(seq.len(), 3);
        match &seq.events()[0].action {
            Action::ApplyFault { admittance, .. } => assert_eq!(*admittance, Complex64::new(0.0, -1e4)),
            a => panic!("{a:?}"),
        }
    }

    #[test]
    fn unmatched_clear_rejected() {
        let err = EventSequence::new(vec![Event {
            t: 0.5,
            action: Action::ClearFault { bus: "B1".into() },
        }])
        .unwrap_err();
        assert!(matches!(err, EventError::UnmatchedClear { .. }));
    }

    #[test]
    fn unsorted_rejected() {
        let trip = |t| Event {
            t,
            action: Action::TripBranch { branch: "L".into() },
        };
        assert!(EventSequence::new(vec![trip(2.0), trip(1.0)]).is_err());
        assert!(EventSequence::new(vec![trip(1.0), trip(1.0)]).is_ok());
    }
}
