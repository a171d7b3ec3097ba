//! Contingency definitions and batch dynamic contingency analysis.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{
    init_dynamics, simulate, write_channels_csv, DynamicState, EventSequence, InitError,
    MachineDynamics, SimOptions, SimulationResult,
};
use crate::netmodel::NetworkCase;
use crate::powerflow::{solve_powerflow, PowerFlowOptions};
use crate::ras::RasConfig;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration: Option<f64>,
    /// RAS id → armed flag for this run.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub ras: BTreeMap<String, bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContingencyDef {
    pub id: String,
    /// Free text; the area tag groups definitions.
    pub label: String,
    pub events: EventSequence,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub overrides: Option<Overrides>,
}

#[derive(Debug, thiserror::Error)]
pub enum ContingencyError {
    #[error("contingency file schema violation: {0}")]
    Schema(#[from] serde_json::Error),
    #[error("contingency '{0}' has no events")]
    NoEvents(String),
    #[error("duplicate contingency id '{0}'")]
    DuplicateId(String),
}

/// Parses `{"contingencies": [...]}` (or a bare list) in file order.
pub fn parse_contingencies(doc: &str) -> Result<Vec<ContingencyDef>, ContingencyError> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Wrapped {
        contingencies: Vec<ContingencyDef>,
    }
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Doc {
        Wrapped(Wrapped),
        List(Vec<ContingencyDef>),
    }
    let defs = match serde_json::from_str::<Doc>(doc) {
        Ok(Doc::Wrapped(w)) => w.contingencies,
        Ok(Doc::List(l)) => l,
        // surface the precise message of the documented layout
        Err(_) => serde_json::from_str::<Wrapped>(doc)?.contingencies,
    };
    let mut seen = BTreeSet::new();
    for d in &defs {
        if d.events.is_empty() {
            return Err(ContingencyError::NoEvents(d.id.clone()));
        }
        if !seen.insert(d.id.as_str()) {
            return Err(ContingencyError::DuplicateId(d.id.clone()));
        }
    }
    Ok(defs)
}

/// Definition count per label.
pub fn group_by_label(defs: &[ContingencyDef]) -> BTreeMap<String, usize> {
    let mut out = BTreeMap::new();
    for d in defs {
        *out.entry(d.label.clone()).or_insert(0) += 1;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Stable,
    Unstable,
    Unresolved,
}

impl std::fmt::Display for RunStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RunStatus::Stable => "stable",
            RunStatus::Unstable => "unstable",
            RunStatus::Unresolved => "unresolved",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Extreme {
    pub value: f64,
    /// Bus display name (or branch id for loadings).
    pub at: String,
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BranchLoading {
    pub branch: String,
    /// Peak |S| over rating.
    pub peak: f64,
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub id: String,
    pub label: String,
    pub status: RunStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    pub f_min: Option<Extreme>,
    pub f_max: Option<Extreme>,
    pub v_min: Option<Extreme>,
    pub max_speed_deviation: f64,
    /// Largest final rotor angle spread inside one island, rad.
    pub max_angle_spread: f64,
    /// `t ras_id action` per RAS action.
    pub ras_actions: Vec<String>,
    pub loadings: Vec<BranchLoading>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityLimits {
    /// pu speed deviation.
    pub speed_deviation: f64,
    /// rad.
    pub angle_spread: f64,
}

impl Default for StabilityLimits {
    fn default() -> Self {
        Self {
            speed_deviation: 0.05,
            angle_spread: std::f64::consts::PI,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatchOptions {
    pub sim: SimOptions,
    pub jobs: usize,
    /// Branch ids whose peak loading is reported; empty means every rated
    /// branch.
    pub monitored: Vec<String>,
    pub limits: StabilityLimits,
}

impl Default for BatchOptions {
    fn default() -> Self {
        Self {
            sim: SimOptions {
                duration: 20.0,
                record_stride: 4,
                ..SimOptions::default()
            },
            jobs: 1,
            monitored: Vec::new(),
            limits: StabilityLimits::default(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum BatchError {
    #[error("pre-contingency power flow: {0}")]
    PowerFlow(String),
    #[error("dynamic initialization: {0}")]
    Init(#[from] InitError),
    #[error("RAS configuration: {0}")]
    Ras(#[from] crate::ras::RasError),
    #[error("thread pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub summary: RunSummary,
    pub result: Option<SimulationResult>,
}

#[derive(Debug, Clone)]
pub struct Batch {
    pub runs: Vec<RunOutcome>,
}

impl Batch {
    pub fn summaries(&self) -> Vec<&RunSummary> {
        self.runs.iter().map(|r| &r.summary).collect()
    }

    pub fn any_flagged(&self) -> bool {
        self.runs.iter().any(|r| r.summary.status != RunStatus::Stable)
    }
}

/// Solves the case, initializes the dynamics once and runs every
/// definition on `jobs` threads. Results come back in definition order.
pub fn run_batch(
    case: &NetworkCase,
    dynamics: &[MachineDynamics],
    defs: &[ContingencyDef],
    ras: &RasConfig,
    options: &BatchOptions,
) -> Result<Batch, BatchError> {
    let pf = solve_powerflow(case, &PowerFlowOptions::<f64>::default())
        .map_err(|e| BatchError::PowerFlow(e.to_string()))?;
    if !pf.converged {
        return Err(BatchError::PowerFlow(format!(
            "no convergence after {} iterations (mismatch {:e} pu)",
            pf.iterations, pf.max_mismatch
        )));
    }
    let state = init_dynamics(case, &pf, dynamics)?;
    // bind once to surface configuration errors before any run
    ras.instantiate(case)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.jobs.max(1))
        .build()
        .map_err(|e| BatchError::Pool(e.to_string()))?;
    let runs = pool.install(|| {
        defs.par_iter()
            .map(|d| run_one(case, &state, d, ras, options))
            .collect()
    });
    Ok(Batch { runs })
}

fn unresolved(def: &ContingencyDef, message: String) -> RunOutcome {
    RunOutcome {
        summary: RunSummary {
            id: def.id.clone(),
            label: def.label.clone(),
            status: RunStatus::Unresolved,
            message: Some(message),
            f_min: None,
            f_max: None,
            v_min: None,
            max_speed_deviation: 0.0,
            max_angle_spread: 0.0,
            ras_actions: Vec::new(),
            loadings: Vec::new(),
            warnings: Vec::new(),
        },
        result: None,
    }
}

fn run_one(
    case: &NetworkCase,
    state: &DynamicState,
    def: &ContingencyDef,
    ras: &RasConfig,
    options: &BatchOptions,
) -> RunOutcome {
    for e in def.events.events() {
        if let Err(m) = e.action.resolve(case) {
            return unresolved(def, format!("t={}: {m}", e.t));
        }
    }
    let mut ras = ras.clone();
    let mut sim = options.sim.clone();
    if let Some(o) = &def.overrides {
        if let Some(d) = o.duration {
            sim.duration = d;
        }
        for (id, armed) in &o.ras {
            if let Err(e) = ras.set_armed(id, *armed) {
                return unresolved(def, e.to_string());
            }
        }
    }
    let instances = match ras.instantiate(case) {
        Ok(i) => i,
        Err(e) => return unresolved(def, e.to_string()),
    };
    match simulate(state, &def.events, instances, &sim) {
        Ok(result) => {
            let summary = summarize(case, def, &result, options);
            RunOutcome {
                summary,
                result: Some(result),
            }
        }
        Err(e) => unresolved(def, e.to_string()),
    }
}

fn extreme(result: &SimulationResult, prefix: &str, min: bool) -> Option<Extreme> {
    let mut best: Option<Extreme> = None;
    for (name, values) in result.channels.range(prefix.to_string()..) {
        let Some(at) = name.strip_prefix(prefix) else {
            break;
        };
        for (k, &v) in values.iter().enumerate() {
            let better = match &best {
                None => true,
                Some(b) => {
                    if min {
                        v < b.value
                    } else {
                        v > b.value
                    }
                }
            };
            if better {
                best = Some(Extreme {
                    value: v,
                    at: at.to_string(),
                    t: result.t[k],
                });
            }
        }
    }
    best
}

/// Summary metrics recomputed from the stored channels only.
pub fn summarize(
    case: &NetworkCase,
    def: &ContingencyDef,
    result: &SimulationResult,
    options: &BatchOptions,
) -> RunSummary {
    let f_min = extreme(result, "F:", true);
    let f_max = extreme(result, "F:", false);
    let v_min = extreme(result, "V:", true);
    let max_speed_deviation = result
        .channels
        .range("SPD:".to_string()..)
        .take_while(|(n, _)| n.starts_with("SPD:"))
        .flat_map(|(_, v)| v.iter().map(|s| (s - 1.0).abs()))
        .fold(0.0, f64::max);
    let mut max_angle_spread: f64 = 0.0;
    for island in &result.final_islands {
        let finals: Vec<f64> = island
            .iter()
            .filter_map(|m| result.channel(&crate::dynamics::channel::angle(m)))
            .filter_map(|s| s.last().copied())
            .collect();
        if let (Some(lo), Some(hi)) = (
            finals.iter().copied().reduce(f64::min),
            finals.iter().copied().reduce(f64::max),
        ) {
            max_angle_spread = max_angle_spread.max(hi - lo);
        }
    }
    let mut loadings = Vec::new();
    for b in case.all_branches() {
        let wanted = if options.monitored.is_empty() {
            b.rating > 0.0
        } else {
            options.monitored.iter().any(|m| m == b.id)
        };
        if !wanted || !(b.rating > 0.0) {
            continue;
        }
        let label = case.branch_label(&b);
        let (Some(p), Some(q)) = (
            result.channel(&format!("P:{label}")),
            result.channel(&format!("Q:{label}")),
        ) else {
            continue;
        };
        let mut peak = 0.0;
        let mut at = 0.0;
        for k in 0..p.len() {
            let s = p[k].hypot(q[k]) / b.rating;
            if s > peak {
                peak = s;
                at = result.t[k];
            }
        }
        loadings.push(BranchLoading {
            branch: b.id.to_string(),
            peak,
            t: at,
        });
    }
    let unstable = max_speed_deviation > options.limits.speed_deviation
        || max_angle_spread > options.limits.angle_spread;
    RunSummary {
        id: def.id.clone(),
        label: def.label.clone(),
        status: if unstable {
            RunStatus::Unstable
        } else {
            RunStatus::Stable
        },
        message: None,
        f_min,
        f_max,
        v_min,
        max_speed_deviation,
        max_angle_spread,
        ras_actions: result
            .ras_log
            .iter()
            .map(|r| format!("{} {} {}", r.t, r.ras_id, r.action))
            .collect(),
        loadings,
        warnings: result.warnings.clone(),
    }
}

fn opt(e: &Option<Extreme>) -> (String, String, String) {
    match e {
        Some(e) => (e.value.to_string(), e.at.clone(), e.t.to_string()),
        None => (String::new(), String::new(), String::new()),
    }
}

/// Summary table, one row per run in definition order.
pub fn summary_table<'a>(summaries: impl IntoIterator<Item = &'a RunSummary>) -> String {
    let mut s = String::from(
        "id,label,status,f_min_hz,f_min_bus,f_min_t,f_max_hz,f_max_bus,f_max_t,v_min_pu,v_min_bus,v_min_t,max_speed_dev_pu,max_angle_spread_rad,ras_actions,peak_loading_branch,peak_loading\n",
    );
    for r in summaries {
        let (fmin, fminb, fmint) = opt(&r.f_min);
        let (fmax, fmaxb, fmaxt) = opt(&r.f_max);
        let (vmin, vminb, vmint) = opt(&r.v_min);
        let peak = r
            .loadings
            .iter()
            .fold(None::<&BranchLoading>, |best, l| match best {
                Some(b) if b.peak >= l.peak => Some(b),
                _ => Some(l),
            });
        let (pb, pv) = peak
            .map(|l| (l.branch.clone(), l.peak.to_string()))
            .unwrap_or_default();
        let _ = writeln!(
            s,
            "{},{},{},{fmin},{fminb},{fmint},{fmax},{fmaxb},{fmaxt},{vmin},{vminb},{vmint},{},{},{},{pb},{pv}",
            r.id,
            r.label,
            r.status,
            r.max_speed_deviation,
            r.max_angle_spread,
            r.ras_actions.join("; ")
        );
    }
    s
}

fn dir_name(id: &str) -> String {
    id.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '_' })
        .collect()
}

/// `<dir>/summary.csv` plus `<dir>/<id>/{summary.json, channels.csv}`.
pub fn write_batch(batch: &Batch, dir: &Path) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("summary.csv"), summary_table(batch.summaries()))?;
    for run in &batch.runs {
        let sub = dir.join(dir_name(&run.summary.id));
        fs::create_dir_all(&sub)?;
        let json = serde_json::to_string_pretty(&run.summary).map_err(io::Error::other)?;
        fs::write(sub.join("summary.json"), json + "\n")?;
        if let Some(r) = &run.result {
            let mut buf = Vec::new();
            write_channels_csv(r, &mut buf)?;
            fs::write(sub.join("channels.csv"), buf)?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChannelDelta {
    pub channel: String,
    pub max_abs_difference: f64,
    /// b − a of the maxima and minima, and of their times.
    pub max_difference: f64,
    pub min_difference: f64,
    pub max_time_difference: f64,
    pub min_time_difference: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunComparison {
    pub id_a: String,
    pub id_b: String,
    pub deltas: Vec<ChannelDelta>,
    /// Channels present in only one run.
    pub mismatched: Vec<String>,
    /// Set when the runs differ in length and only the common prefix was
    /// compared.
    pub truncated: bool,
}

fn argext(v: &[f64], t: &[f64], max: bool) -> (f64, f64) {
    let mut best = (v[0], t[0]);
    for k in 1..v.len() {
        if (max && v[k] > best.0) || (!max && v[k] < best.0) {
            best = (v[k], t[k]);
        }
    }
    best
}

/// Per-channel differences between two runs of the same contingency.
pub fn compare_runs(
    a: &RunSummary,
    b: &RunSummary,
    ra: &SimulationResult,
    rb: &SimulationResult,
) -> RunComparison {
    let n = ra.t.len().min(rb.t.len());
    let truncated = ra.t.len() != rb.t.len() || ra.sample_interval != rb.sample_interval;
    let names_a: BTreeSet<&String> = ra.channels.keys().collect();
    let names_b: BTreeSet<&String> = rb.channels.keys().collect();
    let mismatched = names_a
        .symmetric_difference(&names_b)
        .map(|s| s.to_string())
        .collect();
    let mut deltas = Vec::new();
    if n > 0 {
        for name in names_a.intersection(&names_b) {
            let (va, vb) = (&ra.channels[*name][..n], &rb.channels[*name][..n]);
            let t = &ra.t[..n];
            let max_abs_difference = va
                .iter()
                .zip(vb)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max);
            let (amax, amax_t) = argext(va, t, true);
            let (bmax, bmax_t) = argext(vb, &rb.t[..n], true);
            let (amin, amin_t) = argext(va, t, false);
            let (bmin, bmin_t) = argext(vb, &rb.t[..n], false);
            deltas.push(ChannelDelta {
                channel: name.to_string(),
                max_abs_difference,
                max_difference: bmax - amax,
                min_difference: bmin - amin,
                max_time_difference: bmax_t - amax_t,
                min_time_difference: bmin_t - amin_t,
            });
        }
    }
    RunComparison {
        id_a: a.id.clone(),
        id_b: b.id.clone(),
        deltas,
        mismatched,
        truncated,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_list_is_valid() {
        assert!(parse_contingencies(r#"{"contingencies": []}"#).unwrap().is_empty());
        assert!(parse_contingencies("[]").unwrap().is_empty());
    }

    #[test]
    fn no_events_rejected() {
        let err = parse_contingencies(r#"{"contingencies": [{"id": "C1", "label": "GUA", "events": []}]}"#)
            .unwrap_err();
        assert!(matches!(err, ContingencyError::NoEvents(ref id) if id == "C1"));
    }

    #[test]
    fn order_and_groups_kept() {
        let defs = parse_contingencies(
            r#"{"contingencies": [
                {"id": "B", "label": "GUA", "events": [{"t": 1, "action": "trip_branch", "branch": "L1"}]},
                {"id": "A", "label": "MEX", "events": [{"t": 1, "action": "trip_machine", "machine": "G1"}],
                 "overrides": {"duration": 5, "ras": {"TT": false}}}
            ]}"#,
        )
        .unwrap();
        assert_eq!(defs[0].id, "B");
        assert_eq!(defs[1].overrides.as_ref().unwrap().duration, Some(5.0));
        let g = group_by_label(&defs);
        assert_eq!(g["GUA"], 1);
        assert_eq!(g["MEX"], 1);
    }
}
