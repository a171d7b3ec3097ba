//! Loading helpers for the shipped fixtures.

#![allow(dead_code)]

use std::path::PathBuf;

use gridseam_core::dynamics::{
    init_dynamics, simulate, DynamicsData, EventSequence, MachineDynamics, SimOptions,
    SimulationResult,
};
use gridseam_core::netmodel::{load_case, NetworkCase};
use gridseam_core::powerflow::{solve_powerflow, PowerFlowOptions, PowerFlowSolution};
use gridseam_core::ras::RasConfig;

pub fn data(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(rel)
}

pub fn read(rel: &str) -> String {
    let p = data(rel);
    std::fs::read_to_string(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

pub fn case(rel: &str) -> NetworkCase {
    load_case(&read(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

pub fn machines(rel: &str) -> Vec<MachineDynamics> {
    DynamicsData::from_json(&read(rel))
        .unwrap_or_else(|e| panic!("{rel}: {e}"))
        .machines
}

pub fn events(rel: &str) -> EventSequence {
    EventSequence::from_json(&read(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

pub fn ras(rel: &str) -> RasConfig {
    RasConfig::from_json(&read(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

pub fn solve(case: &NetworkCase) -> PowerFlowSolution<f64> {
    let pf = solve_powerflow(case, &PowerFlowOptions::<f64>::default()).expect("power flow runs");
    assert!(pf.converged, "power flow did not converge");
    pf
}

/// Solve, initialize and simulate without RAS.
pub fn run(
    case: &NetworkCase,
    dynamics: &[MachineDynamics],
    events: &EventSequence,
    options: &SimOptions,
) -> SimulationResult {
    let pf = solve(case);
    let state = init_dynamics(case, &pf, dynamics).expect("dynamics initialize");
    simulate(&state, events, Vec::new(), options).expect("simulation runs")
}

pub fn channel<'a>(r: &'a SimulationResult, name: &str) -> &'a [f64] {
    r.channel(name)
        .unwrap_or_else(|| panic!("missing channel {name}"))
}

/// Mean of a channel over `[a, b]` seconds.
pub fn mean_over(r: &SimulationResult, name: &str, a: f64, b: f64) -> f64 {
    let v = channel(r, name);
    let picked: Vec<f64> = r
        .t
        .iter()
        .zip(v)
        .filter(|(t, _)| **t >= a - 1e-9 && **t <= b + 1e-9)
        .map(|(_, v)| *v)
        .collect();
    picked.iter().sum::<f64>() / picked.len() as f64
}

pub fn min_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::INFINITY, f64::min)
}

pub fn max_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}
