//! Remedial action schemes and distance-relay evaluation.
//!
//! The state machines in [`logic`] only see numbers; [`RasInstance`] binds
//! one of them to grid elements and turns what fired into [`Action`]s.

mod impedance;
pub mod logic;

use std::collections::BTreeSet;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use impedance::{
    apparent_impedance, impedance_trajectory, mho_zone_check, replay_point, MhoZone, ReplayError,
    Unmeasurable, MIN_CURRENT,
};
pub use logic::{
    select_shed_units, DirectionalPowerRas, DirectionalSettings, Extremum, OscillationRas,
    OscillationSettings, OverloadAction, OverloadSettings, OverloadShedRas, PickupTimer,
    TransferTripRas, TransferTripSettings, TurningPoints,
};

use crate::dynamics::Action;
use crate::netmodel::NetworkCase;

/// Quantities a scheme may read at a simulation step.
pub trait Signals {
    /// From-end complex power of a branch, MW + jMVAr; zero when open.
    fn branch_power(&self, branch: &str) -> Complex64;
    /// Bus voltage phasor, pu.
    fn bus_voltage(&self, bus: &str) -> Complex64;
    /// In-service machines of an area with their electrical output, MW.
    fn area_generation(&self, area: &str) -> Vec<(String, f64)>;
}

fn yes() -> bool {
    true
}

/// One interface member; `sign` orients its from-end flow so that a
/// positive sum means flow in the monitored direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterfaceMember {
    pub branch: String,
    #[serde(default = "one")]
    pub sign: f64,
}

fn one() -> f64 {
    1.0
}

/// One configured scheme instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RasSpec {
    TransferTrip {
        id: String,
        #[serde(default = "yes")]
        armed: bool,
        /// Monitored corridor branch; from-end P is compared.
        branch: String,
        p_threshold: f64,
        voltage_bus: String,
        v_threshold: f64,
        pickup_time: f64,
        /// Branches to open; defaults to the monitored one.
        #[serde(default)]
        trip: Vec<String>,
    },
    Oscillation {
        id: String,
        #[serde(default = "yes")]
        armed: bool,
        branch: String,
        amplitude_threshold: f64,
        persist_time: f64,
        window: f64,
        #[serde(default = "ratio")]
        undamped_ratio: f64,
        #[serde(default)]
        trip: Vec<String>,
    },
    OverloadShed {
        id: String,
        #[serde(default = "yes")]
        armed: bool,
        /// Protected branch; its rating is the overload reference.
        branch: String,
        overload_factor: f64,
        stage1_delay: f64,
        shed_area: String,
        /// Generation to disconnect at stage 1, MW.
        shed_block: f64,
        stage2_delay: f64,
        /// Tie branch opened at stage 2.
        tie: String,
    },
    DirectionalPower {
        id: String,
        #[serde(default = "yes")]
        armed: bool,
        interface: Vec<InterfaceMember>,
        p_threshold: f64,
        pickup_time: f64,
        actions: Vec<Action>,
    },
    Distance {
        id: String,
        #[serde(default = "yes")]
        armed: bool,
        /// Relay sits at the from end of this branch and trips it.
        branch: String,
        reach: f64,
        angle: f64,
        #[serde(default)]
        timer: f64,
    },
}

fn ratio() -> f64 {
    0.98
}

impl RasSpec {
    pub fn id(&self) -> &str {
        match self {
            RasSpec::TransferTrip { id, .. }
            | RasSpec::Oscillation { id, .. }
            | RasSpec::OverloadShed { id, .. }
            | RasSpec::DirectionalPower { id, .. }
            | RasSpec::Distance { id, .. } => id,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            RasSpec::TransferTrip { .. } => "transfer_trip",
            RasSpec::Oscillation { .. } => "oscillation",
            RasSpec::OverloadShed { .. } => "overload_shed",
            RasSpec::DirectionalPower { .. } => "directional_power",
            RasSpec::Distance { .. } => "distance",
        }
    }

    fn armed_mut(&mut self) -> &mut bool {
        match self {
            RasSpec::TransferTrip { armed, .. }
            | RasSpec::Oscillation { armed, .. }
            | RasSpec::OverloadShed { armed, .. }
            | RasSpec::DirectionalPower { armed, .. }
            | RasSpec::Distance { armed, .. } => armed,
        }
    }
}

/// RAS configuration file: `{"schemes": [...], "notes": [...]}`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RasConfig {
    pub schemes: Vec<RasSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RasError {
    #[error("RAS config schema violation: {0}")]
    Schema(String),
    #[error("RAS '{id}': {message}")]
    Invalid { id: String, message: String },
    #[error("duplicate RAS id '{0}'")]
    DuplicateId(String),
    #[error("unknown RAS id '{0}'")]
    UnknownId(String),
}

impl RasConfig {
    pub fn from_json(doc: &str) -> Result<Self, RasError> {
        let cfg: RasConfig = serde_json::from_str(doc).map_err(|e| RasError::Schema(e.to_string()))?;
        let mut seen = BTreeSet::new();
        for s in &cfg.schemes {
            if !seen.insert(s.id()) {
                return Err(RasError::DuplicateId(s.id().to_string()));
            }
        }
        Ok(cfg)
    }

    pub fn ids(&self) -> Vec<&str> {
        self.schemes.iter().map(RasSpec::id).collect()
    }

    /// Arms or disarms the named scheme.
    pub fn set_armed(&mut self, id: &str, armed: bool) -> Result<(), RasError> {
        let s = self
            .schemes
            .iter_mut()
            .find(|s| s.id() == id)
            .ok_or_else(|| RasError::UnknownId(id.to_string()))?;
        *s.armed_mut() = armed;
        Ok(())
    }

    /// Binds every scheme to `case`, checking settings and references.
    pub fn instantiate(&self, case: &NetworkCase) -> Result<Vec<RasInstance>, RasError> {
        self.schemes.iter().map(|s| RasInstance::bind(s, case)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RasOutput {
    pub action: Action,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Bound {
    TransferTrip {
        ras: TransferTripRas,
        branch: String,
        bus: String,
        trip: Vec<String>,
    },
    Oscillation {
        ras: OscillationRas,
        branch: String,
        trip: Vec<String>,
    },
    OverloadShed {
        ras: OverloadShedRas,
        branch: String,
        area: String,
        block: f64,
        tie: String,
    },
    Directional {
        ras: DirectionalPowerRas,
        interface: Vec<(String, f64)>,
        actions: Vec<Action>,
    },
    Distance {
        timer: PickupTimer,
        armed: bool,
        zone: MhoZone<f64>,
        branch: String,
        bus: String,
        base_mva: f64,
    },
}

/// A scheme bound to grid elements, owned by one simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct RasInstance {
    pub id: String,
    pub kind: &'static str,
    bound: Bound,
}

impl RasInstance {
    pub fn bind(spec: &RasSpec, case: &NetworkCase) -> Result<Self, RasError> {
        let id = spec.id().to_string();
        let invalid = |message: String| RasError::Invalid {
            id: id.clone(),
            message,
        };
        let branch_exists = |b: &str| {
            case.find_branch(b)
                .map(|_| ())
                .ok_or_else(|| invalid(format!("unknown branch '{b}'")))
        };
        let bound = match spec {
            RasSpec::TransferTrip {
                armed,
                branch,
                p_threshold,
                voltage_bus,
                v_threshold,
                pickup_time,
                trip,
                ..
            } => {
                let settings = TransferTripSettings {
                    p_threshold: *p_threshold,
                    v_threshold: *v_threshold,
                    pickup_time: *pickup_time,
                };
                settings.check().map_err(&invalid)?;
                branch_exists(branch)?;
                let bus = case
                    .find_bus(voltage_bus)
                    .ok_or_else(|| invalid(format!("unknown bus '{voltage_bus}'")))?;
                let trip = if trip.is_empty() {
                    vec![branch.clone()]
                } else {
                    trip.clone()
                };
                for b in &trip {
                    branch_exists(b)?;
                }
                Bound::TransferTrip {
                    ras: TransferTripRas::new(settings, *armed),
                    branch: branch.clone(),
                    bus: bus.id.clone(),
                    trip,
                }
            }
            RasSpec::Oscillation {
                armed,
                branch,
                amplitude_threshold,
                persist_time,
                window,
                undamped_ratio,
                trip,
                ..
            } => {
                let settings = OscillationSettings {
                    amplitude_threshold: *amplitude_threshold,
                    persist_time: *persist_time,
                    window: *window,
                    undamped_ratio: *undamped_ratio,
                };
                settings.check().map_err(&invalid)?;
                branch_exists(branch)?;
                let trip = if trip.is_empty() {
                    vec![branch.clone()]
                } else {
                    trip.clone()
                };
                for b in &trip {
                    branch_exists(b)?;
                }
                Bound::Oscillation {
                    ras: OscillationRas::new(settings, *armed),
                    branch: branch.clone(),
                    trip,
                }
            }
            RasSpec::OverloadShed {
                armed,
                branch,
                overload_factor,
                stage1_delay,
                shed_area,
                shed_block,
                stage2_delay,
                tie,
                ..
            } => {
                let b = case
                    .find_branch(branch)
                    .ok_or_else(|| invalid(format!("unknown branch '{branch}'")))?;
                let settings = OverloadSettings {
                    rating: b.rating,
                    overload_factor: *overload_factor,
                    stage1_delay: *stage1_delay,
                    stage2_delay: *stage2_delay,
                };
                settings.check().map_err(&invalid)?;
                branch_exists(tie)?;
                if !case.areas.iter().any(|a| &a.id == shed_area) {
                    return Err(invalid(format!("unknown area '{shed_area}'")));
                }
                if !(*shed_block > 0.0) {
                    return Err(invalid("shed_block must be > 0".into()));
                }
                Bound::OverloadShed {
                    ras: OverloadShedRas::new(settings, *armed),
                    branch: branch.clone(),
                    area: shed_area.clone(),
                    block: *shed_block,
                    tie: tie.clone(),
                }
            }
            RasSpec::DirectionalPower {
                armed,
                interface,
                p_threshold,
                pickup_time,
                actions,
                ..
            } => {
                if interface.is_empty() {
                    return Err(invalid("interface must list at least one branch".into()));
                }
                if !(*pickup_time >= 0.0) {
                    return Err(invalid("pickup_time must be >= 0".into()));
                }
                for m in interface {
                    branch_exists(&m.branch)?;
                }
                for a in actions {
                    a.resolve(case).map_err(&invalid)?;
                }
                Bound::Directional {
                    ras: DirectionalPowerRas::new(
                        DirectionalSettings {
                            p_threshold: *p_threshold,
                            pickup_time: *pickup_time,
                        },
                        *armed,
                    ),
                    interface: interface.iter().map(|m| (m.branch.clone(), m.sign)).collect(),
                    actions: actions.clone(),
                }
            }
            RasSpec::Distance {
                armed,
                branch,
                reach,
                angle,
                timer,
                ..
            } => {
                let b = case
                    .find_branch(branch)
                    .ok_or_else(|| invalid(format!("unknown branch '{branch}'")))?;
                if !(*reach > 0.0) {
                    return Err(invalid("reach must be > 0".into()));
                }
                Bound::Distance {
                    timer: PickupTimer::new(*timer),
                    armed: *armed,
                    zone: MhoZone {
                        reach: *reach,
                        angle: *angle,
                        timer: *timer,
                    },
                    branch: branch.clone(),
                    bus: b.from_bus.to_string(),
                    base_mva: case.base_mva,
                }
            }
        };
        Ok(Self {
            id,
            kind: spec.kind(),
            bound,
        })
    }

    /// Advances the scheme one step and returns the actions it issues.
    pub fn evaluate(&mut self, t: f64, sig: &dyn Signals) -> Vec<RasOutput> {
        let trips = |ids: &[String], reason: String| {
            ids.iter()
                .map(|b| RasOutput {
                    action: Action::TripBranch { branch: b.clone() },
                    reason: reason.clone(),
                })
                .collect::<Vec<_>>()
        };
        match &mut self.bound {
            Bound::TransferTrip {
                ras,
                branch,
                bus,
                trip,
            } => {
                let p = sig.branch_power(branch).re;
                let v = sig.bus_voltage(bus).norm();
                if ras.step(t, p, v) {
                    let s = &ras.settings;
                    return trips(
                        trip,
                        format!(
                            "P({branch}) {p:.3} MW > {} MW and V({bus}) {v:.4} pu < {} pu for {} s",
                            s.p_threshold, s.v_threshold, s.pickup_time
                        ),
                    );
                }
                Vec::new()
            }
            Bound::Oscillation { ras, branch, trip } => {
                let p = sig.branch_power(branch).re;
                if ras.step(t, p) {
                    let s = &ras.settings;
                    return trips(
                        trip,
                        format!(
                            "undamped oscillation on {branch} (>= {} MW peak-to-peak) for {} s",
                            s.amplitude_threshold, s.persist_time
                        ),
                    );
                }
                Vec::new()
            }
            Bound::OverloadShed {
                ras,
                branch,
                area,
                block,
                tie,
            } => {
                let s = sig.branch_power(branch).norm();
                let limit = ras.settings.rating * ras.settings.overload_factor;
                match ras.step(t, s) {
                    Some(OverloadAction::ShedGeneration) => {
                        let units = sig.area_generation(area);
                        let (chosen, shortfall) = select_shed_units(&units, *block);
                        let mut reason =
                            format!("stage 1: |S({branch})| {s:.3} MVA > {limit} MVA; shed {block} MW in {area}");
                        if shortfall > 0.0 {
                            reason.push_str(&format!(" (shortfall {shortfall:.3} MW)"));
                        }
                        chosen
                            .into_iter()
                            .map(|m| RasOutput {
                                action: Action::TripMachine { machine: m },
                                reason: reason.clone(),
                            })
                            .collect()
                    }
                    Some(OverloadAction::TripTie) => trips(
                        std::slice::from_ref(tie),
                        format!("stage 2: |S({branch})| {s:.3} MVA still > {limit} MVA"),
                    ),
                    None => Vec::new(),
                }
            }
            Bound::Directional {
                ras,
                interface,
                actions,
            } => {
                let p: f64 = interface
                    .iter()
                    .map(|(b, sign)| sign * sig.branch_power(b).re)
                    .sum();
                if ras.step(t, p) {
                    let reason = format!(
                        "interface flow {p:.3} MW > {} MW for {} s",
                        ras.settings.p_threshold, ras.settings.pickup_time
                    );
                    return actions
                        .iter()
                        .map(|a| RasOutput {
                            action: a.clone(),
                            reason: reason.clone(),
                        })
                        .collect();
                }
                Vec::new()
            }
            Bound::Distance {
                timer,
                armed,
                zone,
                branch,
                bus,
                base_mva,
            } => {
                let v = sig.bus_voltage(bus);
                let s = sig.branch_power(branch) / *base_mva;
                let z = if v.norm() > 0.0 {
                    apparent_impedance(v, (s / v).conj()).ok()
                } else {
                    None
                };
                let inside = z.is_some_and(|z| mho_zone_check(z, zone));
                if *armed && timer.step(t, inside) {
                    let z = z.expect("inside implies measurable");
                    return trips(
                        std::slice::from_ref(branch),
                        format!(
                            "apparent impedance {:.4}{:+.4}j pu inside mho reach {} pu",
                            z.re, z.im, zone.reach
                        ),
                    );
                }
                Vec::new()
            }
        }
    }

    /// Current stage of an overload scheme.
    pub fn overload_stage(&self) -> Option<u8> {
        match &self.bound {
            Bound::OverloadShed { ras, .. } => Some(ras.stage()),
            _ => None,
        }
    }
}
