//! Grid data model, case loading and validation.
//!
//! Impedances are per unit on the system base, powers are MW/MVAr. The
//! conversion to per unit happens at the solver boundary via
//! [`NetworkCase::to_pu`].

mod ybus;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

pub use ybus::{build_ybus, branch_stamp, AdmittanceMatrix, BranchStamp};

use crate::merge::EquivalentTag;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    #[default]
    In,
    Out,
}

impl Status {
    pub fn is_in(self) -> bool {
        self == Status::In
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BusKind {
    Slack,
    Pv,
    Pq,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Area {
    pub id: String,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bus {
    pub id: String,
    pub name: String,
    pub area: String,
    pub base_kv: f64,
    pub kind: BusKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_set: Option<f64>,
    #[serde(default)]
    pub status: Status,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Branch {
    pub id: String,
    pub from_bus: String,
    pub to_bus: String,
    #[serde(default = "default_circuit")]
    pub circuit_id: String,
    pub r: f64,
    pub x: f64,
    #[serde(default)]
    pub b_total: f64,
    #[serde(default)]
    pub rating: f64,
    #[serde(default)]
    pub status: Status,
}

/// Two-winding transformer; the off-nominal tap sits on the from side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Transformer {
    pub id: String,
    pub from_bus: String,
    pub to_bus: String,
    #[serde(default = "default_circuit")]
    pub circuit_id: String,
    pub r: f64,
    pub x: f64,
    #[serde(default)]
    pub b_total: f64,
    #[serde(default)]
    pub rating: f64,
    #[serde(default = "default_tap")]
    pub tap_ratio: f64,
    #[serde(default)]
    pub status: Status,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Machine {
    pub id: String,
    pub bus: String,
    pub p_dispatch: f64,
    #[serde(default)]
    pub q_dispatch: f64,
    pub q_min: f64,
    pub q_max: f64,
    pub mbase: f64,
    #[serde(default)]
    pub status: Status,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Load {
    pub id: String,
    pub bus: String,
    pub p: f64,
    #[serde(default)]
    pub q: f64,
    #[serde(default)]
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sheddable_block: Option<f64>,
}

fn default_circuit() -> String {
    "1".to_string()
}

fn default_tap() -> f64 {
    1.0
}

/// Static grid description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkCase {
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub name: String,
    pub base_mva: f64,
    pub buses: Vec<Bus>,
    #[serde(default)]
    pub branches: Vec<Branch>,
    #[serde(default)]
    pub transformers: Vec<Transformer>,
    #[serde(default)]
    pub machines: Vec<Machine>,
    #[serde(default)]
    pub loads: Vec<Load>,
    #[serde(default)]
    pub areas: Vec<Area>,
    /// Present on cases produced by [`crate::merge::merge_cases`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub equivalent: Option<EquivalentTag>,
}

#[derive(Debug, thiserror::Error)]
pub enum CaseError {
    #[error("case schema violation: {0}")]
    Schema(#[from] serde_json::Error),
    #[error("{kind} '{element}' references unknown {target} '{reference}'")]
    DanglingReference {
        kind: &'static str,
        element: String,
        target: &'static str,
        reference: String,
    },
    #[error("duplicate {kind} id '{id}'")]
    DuplicateId { kind: &'static str, id: String },
}

/// Parses a case document and resolves every cross-reference.
pub fn load_case(source: &str) -> Result<NetworkCase, CaseError> {
    let case: NetworkCase = serde_json::from_str(source)?;
    case.check_references()?;
    Ok(case)
}

pub fn serialize_case(case: &NetworkCase) -> String {
    serde_json::to_string_pretty(case).expect("case serialization cannot fail")
}

/// Branch-like element view shared by lines and transformers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchKind {
    Line,
    Transformer,
}

#[derive(Debug, Clone, Copy)]
pub struct BranchRef<'a> {
    pub kind: BranchKind,
    pub id: &'a str,
    pub from_bus: &'a str,
    pub to_bus: &'a str,
    pub circuit_id: &'a str,
    pub r: f64,
    pub x: f64,
    pub b_total: f64,
    pub rating: f64,
    pub tap: f64,
    pub status: Status,
}

impl NetworkCase {
    pub fn bus(&self, id: &str) -> Option<&Bus> {
        self.buses.iter().find(|b| b.id == id)
    }

    /// Looks a bus up by id first, then by display name.
    pub fn find_bus(&self, key: &str) -> Option<&Bus> {
        self.bus(key)
            .or_else(|| self.buses.iter().find(|b| b.name == key))
    }

    pub fn bus_index(&self) -> BTreeMap<&str, usize> {
        self.buses
            .iter()
            .enumerate()
            .map(|(i, b)| (b.id.as_str(), i))
            .collect()
    }

    pub fn machine(&self, id: &str) -> Option<&Machine> {
        self.machines.iter().find(|m| m.id == id)
    }

    pub fn load(&self, id: &str) -> Option<&Load> {
        self.loads.iter().find(|l| l.id == id)
    }

    /// Lines followed by transformers, in declaration order.
    pub fn all_branches(&self) -> impl Iterator<Item = BranchRef<'_>> {
        let lines = self.branches.iter().map(|b| BranchRef {
            kind: BranchKind::Line,
            id: &b.id,
            from_bus: &b.from_bus,
            to_bus: &b.to_bus,
            circuit_id: &b.circuit_id,
            r: b.r,
            x: b.x,
            b_total: b.b_total,
            rating: b.rating,
            tap: 1.0,
            status: b.status,
        });
        let xfmrs = self.transformers.iter().map(|t| BranchRef {
            kind: BranchKind::Transformer,
            id: &t.id,
            from_bus: &t.from_bus,
            to_bus: &t.to_bus,
            circuit_id: &t.circuit_id,
            r: t.r,
            x: t.x,
            b_total: t.b_total,
            rating: t.rating,
            tap: t.tap_ratio,
            status: t.status,
        });
        lines.chain(xfmrs)
    }

    pub fn find_branch(&self, id: &str) -> Option<BranchRef<'_>> {
        self.all_branches().find(|b| b.id == id)
    }

    /// Sets the status of a line or transformer. Returns false if unknown.
    pub fn set_branch_status(&mut self, id: &str, status: Status) -> bool {
        if let Some(b) = self.branches.iter_mut().find(|b| b.id == id) {
            b.status = status;
            return true;
        }
        if let Some(t) = self.transformers.iter_mut().find(|t| t.id == id) {
            t.status = status;
            return true;
        }
        false
    }

    pub fn bus_name<'a>(&'a self, id: &'a str) -> &'a str {
        self.bus(id).map(|b| b.name.as_str()).unwrap_or(id)
    }

    /// Channel-style label `<from>-<to>:<ckt>` built from bus names.
    pub fn branch_label(&self, b: &BranchRef<'_>) -> String {
        format!(
            "{}-{}:{}",
            self.bus_name(b.from_bus),
            self.bus_name(b.to_bus),
            b.circuit_id
        )
    }

    /// Power in MW to per unit on the system base.
    #[inline]
    pub fn to_pu(&self, mw: f64) -> f64 {
        mw / self.base_mva
    }

    fn check_references(&self) -> Result<(), CaseError> {
        check_unique("bus", self.buses.iter().map(|b| b.id.as_str()))?;
        check_unique(
            "branch",
            self.branches
                .iter()
                .map(|b| b.id.as_str())
                .chain(self.transformers.iter().map(|t| t.id.as_str())),
        )?;
        check_unique("machine", self.machines.iter().map(|m| m.id.as_str()))?;
        check_unique("load", self.loads.iter().map(|l| l.id.as_str()))?;
        check_unique("area", self.areas.iter().map(|a| a.id.as_str()))?;

        let buses: BTreeSet<&str> = self.buses.iter().map(|b| b.id.as_str()).collect();
        let areas: BTreeSet<&str> = self.areas.iter().map(|a| a.id.as_str()).collect();
        let dangling = |kind, element: &str, target, reference: &str| CaseError::DanglingReference {
            kind,
            element: element.to_string(),
            target,
            reference: reference.to_string(),
        };
        for b in &self.buses {
            if !areas.contains(b.area.as_str()) {
                return Err(dangling("bus", &b.id, "area", &b.area));
            }
        }
        for b in self.all_branches() {
            let kind = match b.kind {
                BranchKind::Line => "branch",
                BranchKind::Transformer => "transformer",
            };
            for end in [b.from_bus, b.to_bus] {
                if !buses.contains(end) {
                    return Err(dangling(kind, b.id, "bus", end));
                }
            }
        }
        for m in &self.machines {
            if !buses.contains(m.bus.as_str()) {
                return Err(dangling("machine", &m.id, "bus", &m.bus));
            }
        }
        for l in &self.loads {
            if !buses.contains(l.bus.as_str()) {
                return Err(dangling("load", &l.id, "bus", &l.bus));
            }
        }
        Ok(())
    }

    /// Groups in-service buses into electrically connected islands
    /// (in-service lines and transformers only). Islands are ordered by
    /// their first bus in case order; each island lists bus positions.
    pub fn islands(&self) -> Vec<Vec<usize>> {
        let index = self.bus_index();
        let n = self.buses.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn root(parent: &mut [usize], mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        for b in self.all_branches() {
            if !b.status.is_in() {
                continue;
            }
            let (Some(&f), Some(&t)) = (index.get(b.from_bus), index.get(b.to_bus)) else {
                continue;
            };
            if !self.buses[f].status.is_in() || !self.buses[t].status.is_in() {
                continue;
            }
            let (rf, rt) = (root(&mut parent, f), root(&mut parent, t));
            if rf != rt {
                parent[rf.max(rt)] = rf.min(rt);
            }
        }
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for i in 0..n {
            if self.buses[i].status.is_in() {
                let r = root(&mut parent, i);
                groups.entry(r).or_default().push(i);
            }
        }
        groups.into_values().collect()
    }
}

fn check_unique<'a>(
    kind: &'static str,
    ids: impl Iterator<Item = &'a str>,
) -> Result<(), CaseError> {
    let mut seen = BTreeSet::new();
    for id in ids {
        if !seen.insert(id) {
            return Err(CaseError::DuplicateId {
                kind,
                id: id.to_string(),
            });
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    /// Element the violation is about, e.g. `branch L3` or `case`.
    pub element: String,
    pub message: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.element, self.message)
    }
}

/// Checks every case invariant; an empty list means the case is usable.
pub fn validate_case(case: &NetworkCase) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |element: String, message: String| out.push(Violation { element, message });

    if !(case.base_mva > 0.0) {
        push("case".into(), format!("base_mva must be > 0 (got {})", case.base_mva));
    }

    let mut seen = BTreeSet::new();
    for b in &case.buses {
        if !seen.insert(b.id.as_str()) {
            push(format!("bus {}", b.id), "duplicate id".into());
        }
    }
    for (kind, ids) in [
        (
            "branch",
            case.all_branches().map(|b| b.id.to_string()).collect::<Vec<_>>(),
        ),
        ("machine", case.machines.iter().map(|m| m.id.clone()).collect()),
        ("load", case.loads.iter().map(|l| l.id.clone()).collect()),
        ("area", case.areas.iter().map(|a| a.id.clone()).collect()),
    ] {
        let mut seen = BTreeSet::new();
        for id in ids {
            if !seen.insert(id.clone()) {
                push(format!("{kind} {id}"), "duplicate id".into());
            }
        }
    }

    let areas: BTreeSet<&str> = case.areas.iter().map(|a| a.id.as_str()).collect();
    for b in &case.buses {
        let el = format!("bus {}", b.id);
        if !(b.base_kv > 0.0) {
            push(el.clone(), format!("base_kv must be > 0 (got {})", b.base_kv));
        }
        if !areas.contains(b.area.as_str()) {
            push(el.clone(), format!("unknown area '{}'", b.area));
        }
        match (b.kind, b.v_set) {
            (BusKind::Slack | BusKind::Pv, None) => {
                push(el.clone(), "v_set required for slack/pv bus".into())
            }
            (_, Some(v)) if !(0.5..=1.5).contains(&v) => {
                push(el.clone(), format!("v_set {v} outside [0.5, 1.5]"))
            }
            _ => {}
        }
    }

    for b in case.all_branches() {
        let el = match b.kind {
            BranchKind::Line => format!("branch {}", b.id),
            BranchKind::Transformer => format!("transformer {}", b.id),
        };
        if b.x == 0.0 || !b.x.is_finite() {
            push(el.clone(), "series reactance x must be nonzero".into());
        }
        if !(b.rating >= 0.0) {
            push(el.clone(), format!("rating {} must be >= 0", b.rating));
        }
        if b.from_bus == b.to_bus {
            push(el.clone(), "from_bus equals to_bus".into());
        }
        for end in [b.from_bus, b.to_bus] {
            if case.bus(end).is_none() {
                push(el.clone(), format!("unknown bus '{end}'"));
            }
        }
        if b.kind == BranchKind::Transformer && !(0.8..=1.2).contains(&b.tap) {
            push(el.clone(), format!("tap_ratio {} outside [0.8, 1.2]", b.tap));
        }
    }

    for m in &case.machines {
        let el = format!("machine {}", m.id);
        if case.bus(&m.bus).is_none() {
            push(el.clone(), format!("unknown bus '{}'", m.bus));
        }
        if m.q_min > m.q_max {
            push(el.clone(), format!("q_min {} > q_max {}", m.q_min, m.q_max));
        }
        if !(m.mbase > 0.0) {
            push(el.clone(), format!("mbase must be > 0 (got {})", m.mbase));
        }
    }
    for l in &case.loads {
        if case.bus(&l.bus).is_none() {
            push(format!("load {}", l.id), format!("unknown bus '{}'", l.bus));
        }
    }

    for island in case.islands() {
        let slacks: Vec<&str> = island
            .iter()
            .filter(|&&i| case.buses[i].kind == BusKind::Slack)
            .map(|&i| case.buses[i].id.as_str())
            .collect();
        let first = &case.buses[island[0]].id;
        match slacks.len() {
            1 => {}
            0 => push(format!("island at bus {first}"), "no slack".into()),
            _ => push(
                format!("island at bus {first}"),
                format!("multiple slack: {}", slacks.join(", ")),
            ),
        }
    }
    out
}
