//! Integration of an external-area equivalent into a host case across a
//! boundary corridor.
//!
//! External elements are name-spaced by their area tag (`MEX:G1`); bus
//! display names only get the prefix when they collide with a host name.
//! The merged case records which areas are external and the corridor it
//! was joined through, so the equivalent can later be swapped wholesale.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::netmodel::{
    load_case, validate_case, Area, Branch, Bus, BusKind, CaseError, Load, Machine, NetworkCase,
    Status, Transformer, Violation,
};
use crate::powerflow::{solve_powerflow, PowerFlowOptions};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorridorBranch {
    pub id: String,
    #[serde(default = "default_line_circuit")]
    pub circuit_id: String,
    pub r: f64,
    pub x: f64,
    #[serde(default)]
    pub b_total: f64,
    #[serde(default)]
    pub rating: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorridorTransformer {
    pub id: String,
    pub circuit_id: String,
    pub r: f64,
    pub x: f64,
    #[serde(default)]
    pub b_total: f64,
    #[serde(default)]
    pub rating: f64,
    #[serde(default = "one")]
    pub tap_ratio: f64,
}

fn default_line_circuit() -> String {
    "L1".to_string()
}

fn one() -> f64 {
    1.0
}

/// Corridor joining an external area to the host. Every corridor element
/// runs from the external bus to the host bus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundarySpec {
    /// Host bus id or name.
    pub host_bus: String,
    /// External bus id or name, as written in the external case.
    pub external_bus: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interconnection_branch: Option<CorridorBranch>,
    #[serde(default)]
    pub transformers: Vec<CorridorTransformer>,
    /// MW, positive from the external area into the host.
    pub scheduled_interchange: f64,
}

impl BoundarySpec {
    pub fn from_json(doc: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(doc)
    }

    pub fn element_ids(&self) -> impl Iterator<Item = &str> {
        self.interconnection_branch
            .iter()
            .map(|b| b.id.as_str())
            .chain(self.transformers.iter().map(|t| t.id.as_str()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EquivalentKind {
    Smtl,
    Detailed,
}

impl EquivalentKind {
    pub fn name(self) -> &'static str {
        match self {
            EquivalentKind::Smtl => "smtl",
            EquivalentKind::Detailed => "detailed",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "smtl" => Some(Self::Smtl),
            "detailed" => Some(Self::Detailed),
            _ => None,
        }
    }
}

/// Bookkeeping stored on a merged case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquivalentTag {
    /// Library name of the equivalent currently merged in.
    pub kind: String,
    /// Area ids that belong to the external equivalent.
    pub areas: Vec<String>,
    pub boundary: BoundarySpec,
}

#[derive(Debug, thiserror::Error)]
pub enum MergeError {
    #[error("{which} case is invalid: {}", join(.violations))]
    InvalidInput {
        which: &'static str,
        violations: Vec<Violation>,
    },
    #[error("merged case is invalid: {}", join(.0))]
    InvalidResult(Vec<Violation>),
    #[error("boundary declares no connecting elements")]
    EmptyBoundary,
    #[error("boundary bus '{0}' not found")]
    MissingBoundaryBus(String),
    #[error("duplicate corridor circuit id '{0}'")]
    DuplicateCircuit(String),
    #[error("bus name '{0}' still collides after prefixing")]
    NameCollision(String),
    #[error("element id '{0}' collides with a host element")]
    IdCollision(String),
    #[error("external net export {net:.3} MW does not match scheduled interchange {scheduled:.3} MW")]
    InterchangeMismatch { net: f64, scheduled: f64 },
    #[error("external case did not solve standalone: {0}")]
    ExternalSolve(String),
    #[error("case is not a merged case")]
    NotMerged,
    #[error("host case already carries an equivalent ('{0}')")]
    AlreadyMerged(String),
    #[error("equivalent library has no entry '{0}'")]
    MissingLibraryEntry(String),
    #[error("reading equivalent library: {0}")]
    Library(String),
}

fn join(v: &[Violation]) -> String {
    v.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmtlMachine {
    pub p_mw: f64,
    #[serde(default)]
    pub q_mvar: f64,
    pub q_min: f64,
    pub q_max: f64,
    pub mbase: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmtlParams {
    pub bus_name: String,
    pub area_id: String,
    pub area_name: String,
    pub base_mva: f64,
    pub base_kv: f64,
    pub v_set: f64,
    pub machine: SmtlMachine,
    /// (MW, MVAr)
    pub load_a: (f64, f64),
    pub load_b: (f64, f64),
}

/// One bus, one machine, two loads, no internal branches.
pub fn build_smtl_equivalent(params: &SmtlParams) -> NetworkCase {
    let bus = params.bus_name.clone();
    let load = |id: &str, (p, q): (f64, f64)| Load {
        id: id.to_string(),
        bus: bus.clone(),
        p,
        q,
        status: Status::In,
        sheddable_block: None,
    };
    NetworkCase {
        name: "smtl".to_string(),
        base_mva: params.base_mva,
        buses: vec![Bus {
            id: bus.clone(),
            name: bus.clone(),
            area: params.area_id.clone(),
            base_kv: params.base_kv,
            kind: BusKind::Slack,
            v_set: Some(params.v_set),
            status: Status::In,
        }],
        branches: Vec::new(),
        transformers: Vec::new(),
        machines: vec![Machine {
            id: "G1".to_string(),
            bus: bus.clone(),
            p_dispatch: params.machine.p_mw,
            q_dispatch: params.machine.q_mvar,
            q_min: params.machine.q_min,
            q_max: params.machine.q_max,
            mbase: params.machine.mbase,
            status: Status::In,
        }],
        loads: vec![load("LA", params.load_a), load("LB", params.load_b)],
        areas: vec![Area {
            id: params.area_id.clone(),
            name: params.area_name.clone(),
        }],
        equivalent: None,
    }
}

/// Declared generation minus load, MW.
pub fn net_export(case: &NetworkCase) -> f64 {
    let gen: f64 = case
        .machines
        .iter()
        .filter(|m| m.status.is_in())
        .map(|m| m.p_dispatch)
        .sum();
    let load: f64 = case
        .loads
        .iter()
        .filter(|l| l.status.is_in())
        .map(|l| l.p)
        .sum();
    gen - load
}

/// Allowed gap between declared net export and schedule: covers internal
/// losses of a multi-bus equivalent.
fn interchange_tolerance(scheduled: f64) -> f64 {
    (0.05 * scheduled.abs()).max(1.0)
}

/// Merges `external` into `host` through `boundary`. Inputs are not
/// modified.
pub fn merge_cases(
    host: &NetworkCase,
    external: &NetworkCase,
    boundary: &BoundarySpec,
) -> Result<NetworkCase, MergeError> {
    let kind = if external.name.is_empty() {
        "external".to_string()
    } else {
        external.name.clone()
    };
    merge_as(host, external, boundary, kind)
}

fn merge_as(
    host: &NetworkCase,
    external: &NetworkCase,
    boundary: &BoundarySpec,
    kind: String,
) -> Result<NetworkCase, MergeError> {
    if let Some(tag) = &host.equivalent {
        return Err(MergeError::AlreadyMerged(tag.kind.clone()));
    }
    for (which, case) in [("host", host), ("external", external)] {
        let violations = validate_case(case);
        if !violations.is_empty() {
            return Err(MergeError::InvalidInput { which, violations });
        }
    }
    if boundary.interconnection_branch.is_none() && boundary.transformers.is_empty() {
        return Err(MergeError::EmptyBoundary);
    }
    let mut circuits = BTreeSet::new();
    for c in boundary
        .interconnection_branch
        .iter()
        .map(|b| &b.circuit_id)
        .chain(boundary.transformers.iter().map(|t| &t.circuit_id))
    {
        if !circuits.insert(c) {
            return Err(MergeError::DuplicateCircuit(c.clone()));
        }
    }
    let host_bus = host
        .find_bus(&boundary.host_bus)
        .ok_or_else(|| MergeError::MissingBoundaryBus(boundary.host_bus.clone()))?
        .id
        .clone();
    let ext_bus = external
        .find_bus(&boundary.external_bus)
        .ok_or_else(|| MergeError::MissingBoundaryBus(boundary.external_bus.clone()))?
        .id
        .clone();

    let net = net_export(external);
    if (net - boundary.scheduled_interchange).abs() > interchange_tolerance(boundary.scheduled_interchange) {
        return Err(MergeError::InterchangeMismatch {
            net,
            scheduled: boundary.scheduled_interchange,
        });
    }

    let external = redispatch_external(external, &ext_bus, boundary.scheduled_interchange)?;

    // name-spacing
    let area_of: BTreeMap<&str, &str> = external
        .buses
        .iter()
        .map(|b| (b.id.as_str(), b.area.as_str()))
        .collect();
    let ns = |bus: &str, id: &str| format!("{}:{}", area_of[bus], id);
    let host_names: BTreeSet<&str> = host.buses.iter().map(|b| b.name.as_str()).collect();

    let mut merged = host.clone();
    for a in &external.areas {
        if merged.areas.iter().any(|h| h.id == a.id) {
            return Err(MergeError::IdCollision(a.id.clone()));
        }
        merged.areas.push(a.clone());
    }
    for b in &external.buses {
        let mut bus = b.clone();
        bus.id = ns(&b.id, &b.id);
        if host_names.contains(b.name.as_str()) {
            bus.name = format!("{}:{}", b.area, b.name);
            if host_names.contains(bus.name.as_str()) {
                return Err(MergeError::NameCollision(bus.name));
            }
        }
        merged.buses.push(bus);
    }
    for br in &external.branches {
        let mut br = br.clone();
        br.id = ns(&br.from_bus, &br.id);
        br.from_bus = ns(&br.from_bus, &br.from_bus);
        br.to_bus = ns(&br.to_bus, &br.to_bus);
        merged.branches.push(br);
    }
    for t in &external.transformers {
        let mut t = t.clone();
        t.id = ns(&t.from_bus, &t.id);
        t.from_bus = ns(&t.from_bus, &t.from_bus);
        t.to_bus = ns(&t.to_bus, &t.to_bus);
        merged.transformers.push(t);
    }
    for m in &external.machines {
        let mut m = m.clone();
        m.id = ns(&m.bus, &m.id);
        m.bus = ns(&m.bus, &m.bus);
        merged.machines.push(m);
    }
    for l in &external.loads {
        let mut l = l.clone();
        l.id = ns(&l.bus, &l.id);
        l.bus = ns(&l.bus, &l.bus);
        merged.loads.push(l);
    }

    let ext_bus_ns = ns(&ext_bus, &ext_bus);
    if let Some(c) = &boundary.interconnection_branch {
        merged.branches.push(Branch {
            id: c.id.clone(),
            from_bus: ext_bus_ns.clone(),
            to_bus: host_bus.clone(),
            circuit_id: c.circuit_id.clone(),
            r: c.r,
            x: c.x,
            b_total: c.b_total,
            rating: c.rating,
            status: Status::In,
        });
    }
    for c in &boundary.transformers {
        merged.transformers.push(Transformer {
            id: c.id.clone(),
            from_bus: ext_bus_ns.clone(),
            to_bus: host_bus.clone(),
            circuit_id: c.circuit_id.clone(),
            r: c.r,
            x: c.x,
            b_total: c.b_total,
            rating: c.rating,
            tap_ratio: c.tap_ratio,
            status: Status::In,
        });
    }

    check_id_collisions(&merged)?;

    merged.equivalent = Some(EquivalentTag {
        kind,
        areas: external.areas.iter().map(|a| a.id.clone()).collect(),
        boundary: boundary.clone(),
    });
    let violations = validate_case(&merged);
    if !violations.is_empty() {
        return Err(MergeError::InvalidResult(violations));
    }
    Ok(merged)
}

fn check_id_collisions(case: &NetworkCase) -> Result<(), MergeError> {
    let mut seen = BTreeSet::new();
    let ids = case
        .buses
        .iter()
        .map(|b| ("bus", b.id.as_str()))
        .chain(case.all_branches().map(|b| ("branch", b.id)))
        .chain(case.machines.iter().map(|m| ("machine", m.id.as_str())))
        .chain(case.loads.iter().map(|l| ("load", l.id.as_str())));
    for key in ids {
        if !seen.insert(key) {
            return Err(MergeError::IdCollision(key.1.to_string()));
        }
    }
    Ok(())
}

/// Solves the external case alone with the scheduled export drawn at the
/// boundary bus, then demotes its slack to PV with the solved output as
/// dispatch.
fn redispatch_external(
    external: &NetworkCase,
    boundary_bus: &str,
    scheduled: f64,
) -> Result<NetworkCase, MergeError> {
    let mut probe = external.clone();
    probe.loads.push(Load {
        id: "__export__".to_string(),
        bus: boundary_bus.to_string(),
        p: scheduled,
        q: 0.0,
        status: Status::In,
        sheddable_block: None,
    });
    let sol = solve_powerflow::<f64>(&probe, &PowerFlowOptions::default())
        .map_err(|e| MergeError::ExternalSolve(e.to_string()))?;
    if !sol.converged {
        return Err(MergeError::ExternalSolve(format!(
            "no convergence after {} iterations",
            sol.iterations
        )));
    }
    let mut out = external.clone();
    let slack_buses: BTreeSet<String> = out
        .buses
        .iter()
        .filter(|b| b.kind == BusKind::Slack)
        .map(|b| b.id.clone())
        .collect();
    for m in out.machines.iter_mut() {
        if slack_buses.contains(&m.bus) && m.status.is_in() {
            if let Some(o) = sol.machines.iter().find(|o| o.id == m.id) {
                m.p_dispatch = o.p_mw;
            }
        }
    }
    for b in out.buses.iter_mut() {
        if b.kind == BusKind::Slack {
            b.kind = BusKind::Pv;
        }
    }
    Ok(out)
}

/// Removes the external area and corridor from a merged case, giving back
/// the host part.
pub fn strip_equivalent(merged: &NetworkCase) -> Result<NetworkCase, MergeError> {
    let tag = merged.equivalent.as_ref().ok_or(MergeError::NotMerged)?;
    let areas: BTreeSet<&str> = tag.areas.iter().map(String::as_str).collect();
    let ext_buses: BTreeSet<&str> = merged
        .buses
        .iter()
        .filter(|b| areas.contains(b.area.as_str()))
        .map(|b| b.id.as_str())
        .collect();
    let corridor: BTreeSet<&str> = tag.boundary.element_ids().collect();
    let keep_branch = |id: &str, f: &str, t: &str| {
        !corridor.contains(id) && !ext_buses.contains(f) && !ext_buses.contains(t)
    };
    Ok(NetworkCase {
        name: merged.name.clone(),
        base_mva: merged.base_mva,
        buses: merged
            .buses
            .iter()
            .filter(|b| !ext_buses.contains(b.id.as_str()))
            .cloned()
            .collect(),
        branches: merged
            .branches
            .iter()
            .filter(|b| keep_branch(&b.id, &b.from_bus, &b.to_bus))
            .cloned()
            .collect(),
        transformers: merged
            .transformers
            .iter()
            .filter(|t| keep_branch(&t.id, &t.from_bus, &t.to_bus))
            .cloned()
            .collect(),
        machines: merged
            .machines
            .iter()
            .filter(|m| !ext_buses.contains(m.bus.as_str()))
            .cloned()
            .collect(),
        loads: merged
            .loads
            .iter()
            .filter(|l| !ext_buses.contains(l.bus.as_str()))
            .cloned()
            .collect(),
        areas: merged
            .areas
            .iter()
            .filter(|a| !areas.contains(a.id.as_str()))
            .cloned()
            .collect(),
        equivalent: None,
    })
}

/// Named external equivalents, one case document per entry.
#[derive(Debug, Clone, Default)]
pub struct EquivalentLibrary {
    entries: BTreeMap<String, NetworkCase>,
}

impl EquivalentLibrary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: impl Into<String>, case: NetworkCase) {
        self.entries.insert(name.into(), case);
    }

    pub fn get(&self, name: &str) -> Option<&NetworkCase> {
        self.entries.get(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    /// Loads every `*.json` in `dir`, keyed by file stem.
    pub fn load_dir(dir: &Path) -> Result<Self, MergeError> {
        let mut lib = Self::new();
        let rd = fs::read_dir(dir)
            .map_err(|e| MergeError::Library(format!("{}: {e}", dir.display())))?;
        let mut paths: Vec<_> = rd.filter_map(|e| e.ok().map(|e| e.path())).collect();
        paths.sort();
        for p in paths {
            if p.extension().and_then(|e| e.to_str()) != Some("json") {
                continue;
            }
            let stem = p.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string();
            let text = fs::read_to_string(&p)
                .map_err(|e| MergeError::Library(format!("{}: {e}", p.display())))?;
            let case = load_case(&text).map_err(|e: CaseError| {
                MergeError::Library(format!("{}: {e}", p.display()))
            })?;
            lib.insert(stem, case);
        }
        Ok(lib)
    }
}

/// Replaces the external equivalent of a merged case by another library
/// entry; the corridor is kept as declared.
pub fn swap_equivalent(
    merged: &NetworkCase,
    kind: EquivalentKind,
    library: &EquivalentLibrary,
) -> Result<NetworkCase, MergeError> {
    swap_equivalent_named(merged, kind.name(), library)
}

pub fn swap_equivalent_named(
    merged: &NetworkCase,
    name: &str,
    library: &EquivalentLibrary,
) -> Result<NetworkCase, MergeError> {
    let tag = merged.equivalent.as_ref().ok_or(MergeError::NotMerged)?;
    if tag.kind == name {
        return Ok(merged.clone());
    }
    let external = library
        .get(name)
        .ok_or_else(|| MergeError::MissingLibraryEntry(name.to_string()))?;
    let host = strip_equivalent(merged)?;
    merge_as(&host, external, &tag.boundary, name.to_string())
}
