use std::collections::{BTreeMap, VecDeque};
use std::f64::consts::PI;

use num_complex::Complex64;

use super::frequency::FrequencyFilter;
use super::network::Grid;
use super::{
    channel, Action, AppliedEvent, EventSequence, GovernorParams, Integrator, MachineDynamics,
    RasLogEntry, SimOptions, SimulationResult,
};
use crate::netmodel::NetworkCase;
use crate::powerflow::PowerFlowSolution;
use crate::ras::{RasInstance, Signals};

const TRAPEZOID_TOL: f64 = 1e-12;
const TRAPEZOID_MAX_ITER: usize = 20;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum InitError {
    #[error("power flow solution did not converge")]
    NotConverged,
    #[error("machine '{0}' has no dynamics record")]
    MissingDynamics(String),
    #[error("{0}")]
    BadRecord(String),
    #[error("machine '{id}': initial mechanical power {p} pu outside governor limits [{p_min}, {p_max}]")]
    OutsideLimits {
        id: String,
        p: f64,
        p_min: f64,
        p_max: f64,
    },
    #[error("network matrix singular at initialization")]
    Singular,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("invalid simulation option: {0}")]
    BadOptions(String),
    #[error("event at t={t} s lies outside [0, {duration}] s")]
    EventOutsideHorizon { t: f64, duration: f64 },
    #[error("event at t={t} s: {message}")]
    Unresolved { t: f64, message: String },
    #[error("network matrix singular at t={t} s")]
    Singular { t: f64 },
}

#[derive(Debug, Clone)]
struct MachineState {
    id: String,
    bus: usize,
    area: String,
    mbase: f64,
    h: f64,
    d: f64,
    /// Norton admittance 1/(j·x'd) on the system base.
    y: Complex64,
    e_mag: f64,
    gov: Option<GovernorParams>,
    p_ref: f64,
    in_service: bool,
}

/// Initialized machine and network state, cloneable per run.
#[derive(Debug, Clone)]
pub struct DynamicState {
    grid: Grid,
    machines: Vec<MachineState>,
    /// Packed `[δ, Δω, P_m]` per machine.
    x: Vec<f64>,
    base_mva: f64,
    /// Machine ids of the case that were out of service at t=0.
    offline: Vec<String>,
}

/// `E' = V + j·x'd·I` with `I = conj(S/V)`; all per unit on one base.
pub fn internal_emf(v: Complex64, s: Complex64, xdp: f64) -> Complex64 {
    let i = (s / v).conj();
    v + Complex64::new(0.0, xdp) * i
}

pub fn init_dynamics(
    case: &NetworkCase,
    solution: &PowerFlowSolution<f64>,
    dynamics: &[MachineDynamics],
) -> Result<DynamicState, InitError> {
    if !solution.converged {
        return Err(InitError::NotConverged);
    }
    let v: Vec<f64> = solution.v.clone();
    let mut grid = Grid::new(case, &solution.bus_ids, &v);
    let base = case.base_mva;

    let mut machines = Vec::new();
    let mut x = Vec::new();
    let mut offline = Vec::new();
    for m in &case.machines {
        let pos = grid.position(&m.bus).filter(|_| m.status.is_in());
        let Some(bus) = pos else {
            offline.push(m.id.clone());
            continue;
        };
        let rec = dynamics
            .iter()
            .find(|d| d.id == m.id)
            .ok_or_else(|| InitError::MissingDynamics(m.id.clone()))?;
        rec.check().map_err(InitError::BadRecord)?;
        let (p, q) = solution
            .machines
            .iter()
            .find(|o| o.id == m.id)
            .map(|o| (o.p_mw, o.q_mvar))
            .unwrap_or((m.p_dispatch, m.q_dispatch));
        let vb = Complex64::from_polar(solution.v[bus], solution.theta[bus]);
        let xdp = rec.xdp * base / m.mbase;
        let e = internal_emf(vb, Complex64::new(p, q) / base, xdp);
        machines.push(MachineState {
            id: m.id.clone(),
            bus,
            area: case.bus(&m.bus).map(|b| b.area.clone()).unwrap_or_default(),
            mbase: m.mbase,
            h: rec.h,
            d: rec.d,
            y: Complex64::new(0.0, -1.0 / xdp),
            e_mag: e.norm(),
            gov: rec.governor.clone(),
            p_ref: 0.0,
            in_service: true,
        });
        x.extend([e.arg(), 0.0, 0.0]);
    }

    let mut state = DynamicState {
        grid: {
            let sources: Vec<(usize, Complex64)> = machines.iter().map(|m| (m.bus, m.y)).collect();
            grid.factor(&sources).map_err(|_| InitError::Singular)?;
            grid
        },
        machines,
        x,
        base_mva: base,
        offline,
    };
    // mechanical power from the network's own electrical output so t=0 is
    // an exact equilibrium
    let (_, pe) = state.network(&state.x);
    for (i, m) in state.machines.iter_mut().enumerate() {
        let pm = pe[i] * base / m.mbase;
        if let Some(g) = &m.gov {
            let tol = 1e-9;
            if pm < g.p_min - tol || pm > g.p_max + tol {
                return Err(InitError::OutsideLimits {
                    id: m.id.clone(),
                    p: pm,
                    p_min: g.p_min,
                    p_max: g.p_max,
                });
            }
        }
        state.x[3 * i + 2] = pm;
        m.p_ref = pm;
    }
    Ok(state)
}

impl DynamicState {
    pub fn machine_ids(&self) -> Vec<&str> {
        self.machines.iter().map(|m| m.id.as_str()).collect()
    }

    /// `(|E'|, δ)` of a machine at the current state.
    pub fn internal_emf(&self, id: &str) -> Option<(f64, f64)> {
        let i = self.machines.iter().position(|m| m.id == id)?;
        Some((self.machines[i].e_mag, self.x[3 * i]))
    }

    /// Initial mechanical power of a machine, pu on its base.
    pub fn mechanical_power(&self, id: &str) -> Option<f64> {
        let i = self.machines.iter().position(|m| m.id == id)?;
        Some(self.x[3 * i + 2])
    }

    pub fn base_mva(&self) -> f64 {
        self.base_mva
    }

    fn emf(&self, i: usize, x: &[f64]) -> Complex64 {
        Complex64::from_polar(self.machines[i].e_mag, x[3 * i])
    }

    /// Bus voltages and machine electrical powers (system pu) for state `x`.
    fn network(&self, x: &[f64]) -> (Vec<Complex64>, Vec<f64>) {
        let mut inj = vec![Complex64::new(0.0, 0.0); self.grid.n()];
        for (i, m) in self.machines.iter().enumerate() {
            if m.in_service {
                inj[m.bus] += self.emf(i, x) * m.y;
            }
        }
        let v = self.grid.solve(&inj);
        let pe = self
            .machines
            .iter()
            .enumerate()
            .map(|(i, m)| {
                if !m.in_service {
                    return 0.0;
                }
                let e = self.emf(i, x);
                let current = (e - v[m.bus]) * m.y;
                (e * current.conj()).re
            })
            .collect();
        (v, pe)
    }

    fn derivatives(&self, x: &[f64], omega_s: f64) -> Vec<f64> {
        let (_, pe) = self.network(x);
        let mut dx = vec![0.0; x.len()];
        for (i, m) in self.machines.iter().enumerate() {
            if !m.in_service {
                continue;
            }
            let dw = x[3 * i + 1];
            let pm = x[3 * i + 2];
            let pe_m = pe[i] * self.base_mva / m.mbase;
            dx[3 * i] = omega_s * dw;
            dx[3 * i + 1] = (pm - pe_m - m.d * dw) / (2.0 * m.h);
            if let Some(g) = m.gov.as_ref().filter(|g| g.enabled) {
                let mut dp = ((m.p_ref - dw / g.r) - pm) / g.t_g;
                if (pm >= g.p_max && dp > 0.0) || (pm <= g.p_min && dp < 0.0) {
                    dp = 0.0;
                }
                dx[3 * i + 2] = dp;
            }
        }
        dx
    }

    fn clamp_governors(&self, x: &mut [f64]) {
        for (i, m) in self.machines.iter().enumerate() {
            if let Some(g) = &m.gov {
                x[3 * i + 2] = x[3 * i + 2].clamp(g.p_min, g.p_max);
            }
        }
    }

    fn step(&mut self, dt: f64, integrator: Integrator, omega_s: f64) {
        let x = &self.x;
        let axpy = |a: f64, d: &[f64]| -> Vec<f64> { x.iter().zip(d).map(|(x, d)| x + a * d).collect() };
        let mut next = match integrator {
            Integrator::Rk4 => {
                let k1 = self.derivatives(x, omega_s);
                let k2 = self.derivatives(&axpy(dt / 2.0, &k1), omega_s);
                let k3 = self.derivatives(&axpy(dt / 2.0, &k2), omega_s);
                let k4 = self.derivatives(&axpy(dt, &k3), omega_s);
                x.iter()
                    .enumerate()
                    .map(|(j, x)| x + dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]))
                    .collect()
            }
            Integrator::Trapezoidal => {
                let f0 = self.derivatives(x, omega_s);
                let mut guess = axpy(dt, &f0);
                for _ in 0..TRAPEZOID_MAX_ITER {
                    let f1 = self.derivatives(&guess, omega_s);
                    let new: Vec<f64> = x
                        .iter()
                        .enumerate()
                        .map(|(j, x)| x + dt / 2.0 * (f0[j] + f1[j]))
                        .collect();
                    let change = new
                        .iter()
                        .zip(&guess)
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0, f64::max);
                    guess = new;
                    if change < TRAPEZOID_TOL {
                        break;
                    }
                }
                guess
            }
        };
        self.clamp_governors(&mut next);
        self.x = next;
    }

    fn sources(&self) -> Vec<(usize, Complex64)> {
        self.machines
            .iter()
            .filter(|m| m.in_service)
            .map(|m| (m.bus, m.y))
            .collect()
    }

    /// Applies one action; returns a skip reason when it had no effect.
    fn apply(&mut self, action: &Action) -> Result<Option<String>, String> {
        let grid = &mut self.grid;
        match action {
            Action::ApplyFault { bus, admittance } => {
                let b = grid.position(bus).ok_or_else(|| format!("unknown bus '{bus}'"))?;
                grid.faults.insert(b, *admittance);
            }
            Action::ClearFault { bus } => {
                let b = grid.position(bus).ok_or_else(|| format!("unknown bus '{bus}'"))?;
                if grid.faults.remove(&b).is_none() {
                    return Ok(Some(format!("no active fault at bus '{bus}'")));
                }
            }
            Action::TripBranch { branch } => {
                let k = grid
                    .branch_index(branch)
                    .ok_or_else(|| format!("unknown branch '{branch}'"))?;
                if !grid.branches[k].in_service {
                    return Ok(Some(format!("branch '{branch}' already out of service")));
                }
                grid.branches[k].in_service = false;
            }
            Action::TripMachine { machine } => {
                let Some(m) = self.machines.iter_mut().find(|m| &m.id == machine) else {
                    if self.offline.contains(machine) {
                        return Ok(Some(format!("machine '{machine}' already out of service")));
                    }
                    return Err(format!("unknown machine '{machine}'"));
                };
                if !m.in_service {
                    return Ok(Some(format!("machine '{machine}' already out of service")));
                }
                m.in_service = false;
            }
            Action::ShedLoad { load, mw } => {
                let k = grid
                    .load_index(load)
                    .ok_or_else(|| format!("unknown load '{load}'"))?;
                let l = &mut grid.loads[k];
                if !l.in_service || l.remaining <= 0.0 {
                    return Ok(Some(format!("load '{load}' already fully shed")));
                }
                l.remaining = (l.remaining - mw).max(0.0);
                if l.remaining <= 0.0 {
                    l.in_service = false;
                }
            }
        }
        self.grid.invalidate();
        Ok(None)
    }
}

struct StepView<'a> {
    state: &'a DynamicState,
    v: &'a [Complex64],
    pe: &'a [f64],
}

impl Signals for StepView<'_> {
    fn branch_power(&self, branch: &str) -> Complex64 {
        let g = &self.state.grid;
        g.branch_index(branch)
            .map(|k| g.branch_power(k, self.v) * self.state.base_mva)
            .unwrap_or_default()
    }

    fn bus_voltage(&self, bus: &str) -> Complex64 {
        self.state
            .grid
            .position(bus)
            .map(|b| self.v[b])
            .unwrap_or_default()
    }

    fn area_generation(&self, area: &str) -> Vec<(String, f64)> {
        self.state
            .machines
            .iter()
            .enumerate()
            .filter(|(_, m)| m.in_service && m.area == area)
            .map(|(i, m)| (m.id.clone(), self.pe[i] * self.state.base_mva))
            .collect()
    }
}

/// Fixed-step simulation of `events` with the given RAS instances.
pub fn simulate(
    initial: &DynamicState,
    events: &EventSequence,
    mut ras: Vec<RasInstance>,
    options: &SimOptions,
) -> Result<SimulationResult, SimError> {
    let dt = options.dt;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(SimError::BadOptions(format!("dt must be > 0 (got {dt})")));
    }
    if !(options.duration >= 0.0 && options.duration.is_finite()) {
        return Err(SimError::BadOptions(format!(
            "duration must be >= 0 (got {})",
            options.duration
        )));
    }
    if options.record_stride == 0 {
        return Err(SimError::BadOptions("record_stride must be >= 1".into()));
    }
    let n_steps = (options.duration / dt + 1e-9).floor() as usize;
    let horizon = n_steps as f64 * dt;
    let t_tol = dt * 1e-6;
    let mut state = initial.clone();
    let base_mva = state.base_mva;
    for e in events.events() {
        if e.t > options.duration + t_tol {
            return Err(SimError::EventOutsideHorizon {
                t: e.t,
                duration: options.duration,
            });
        }
        // validate references up front
        state
            .clone()
            .apply(&e.action)
            .map_err(|message| SimError::Unresolved { t: e.t, message })?;
    }

    let omega_s = 2.0 * PI * options.f_nominal;
    let nb = state.grid.n();
    let mut names: Vec<String> = Vec::new();
    for b in 0..nb {
        names.push(channel::voltage(&state.grid.bus_names[b]));
    }
    for b in 0..nb {
        names.push(channel::frequency(&state.grid.bus_names[b]));
    }
    for br in &state.grid.branches {
        names.push(channel::active_power(&br.label));
    }
    for br in &state.grid.branches {
        names.push(channel::reactive_power(&br.label));
    }
    for m in &state.machines {
        names.push(channel::angle(&m.id));
    }
    for m in &state.machines {
        names.push(channel::speed(&m.id));
    }
    for m in &state.machines {
        names.push(channel::mechanical_power(&m.id));
    }
    let n_rec = n_steps / options.record_stride + 1;
    let mut series: Vec<Vec<f64>> = names.iter().map(|_| Vec::with_capacity(n_rec)).collect();
    let mut times = Vec::with_capacity(n_rec);

    let mut filters: Vec<FrequencyFilter> = (0..nb)
        .map(|_| FrequencyFilter::new(dt, options.f_nominal))
        .collect();
    let mut pending: VecDeque<(Action, String)> = VecDeque::new();
    let mut next_event = 0;
    let all_events = events.events();
    let mut event_log = Vec::new();
    let mut ras_log = Vec::new();
    let mut warnings = Vec::new();
    let mut last_dead: Vec<Vec<usize>> = Vec::new();

    for k in 0..=n_steps {
        let t = k as f64 * dt;
        while next_event < all_events.len() && all_events[next_event].t <= t + t_tol {
            let e = &all_events[next_event];
            let skipped = state
                .apply(&e.action)
                .map_err(|message| SimError::Unresolved { t: e.t, message })?;
            if let Some(s) = &skipped {
                warnings.push(format!("t={t}: {}: {s}; skipped", e.action));
            }
            event_log.push(AppliedEvent {
                t,
                action: e.action.clone(),
                source: "schedule".into(),
                skipped,
            });
            next_event += 1;
        }
        while let Some((action, source)) = pending.pop_front() {
            let skipped = match state.apply(&action) {
                Ok(s) => s,
                Err(e) => Some(e),
            };
            if let Some(s) = &skipped {
                warnings.push(format!("t={t}: {action} from {source}: {s}; skipped"));
            }
            event_log.push(AppliedEvent {
                t,
                action,
                source,
                skipped,
            });
        }
        if !state.grid.is_factored() {
            let sources = state.sources();
            let dead = state
                .grid
                .factor(&sources)
                .map_err(|_| SimError::Singular { t })?;
            if dead != last_dead {
                for island in &dead {
                    if !last_dead.contains(island) {
                        let buses: Vec<&str> = island
                            .iter()
                            .map(|&b| state.grid.bus_names[b].as_str())
                            .collect();
                        warnings.push(format!(
                            "t={t}: island [{}] has no in-service machine; voltages recorded as 0",
                            buses.join(", ")
                        ));
                    }
                }
                last_dead = dead;
            }
        }

        let (v, pe) = state.network(&state.x);
        let freq: Vec<f64> = v
            .iter()
            .zip(filters.iter_mut())
            .map(|(v, f)| if v.norm() > 0.0 { f.push(v.arg()) } else { f.hold() })
            .collect();

        if k % options.record_stride == 0 {
            times.push(t);
            let mut col = 0;
            let mut put = |x: f64| {
                series[col].push(x);
                col += 1;
            };
            for vb in &v {
                put(vb.norm());
            }
            for f in &freq {
                put(*f);
            }
            let flows: Vec<Complex64> = (0..state.grid.branches.len())
                .map(|b| state.grid.branch_power(b, &v) * base_mva)
                .collect();
            for s in &flows {
                put(s.re);
            }
            for s in &flows {
                put(s.im);
            }
            for i in 0..state.machines.len() {
                put(state.x[3 * i]);
            }
            for i in 0..state.machines.len() {
                put(1.0 + state.x[3 * i + 1]);
            }
            for (i, m) in state.machines.iter().enumerate() {
                put(if m.in_service { state.x[3 * i + 2] * m.mbase } else { 0.0 });
            }
        }

        if !ras.is_empty() {
            let view = StepView {
                state: &state,
                v: &v,
                pe: &pe,
            };
            for r in ras.iter_mut() {
                for out in r.evaluate(t, &view) {
                    if k < n_steps {
                        ras_log.push(RasLogEntry {
                            t: (k + 1) as f64 * dt,
                            detected_at: t,
                            ras_id: r.id.clone(),
                            action: out.action.clone(),
                            reason: out.reason,
                        });
                        pending.push_back((out.action, r.id.clone()));
                    }
                }
            }
        }

        if k < n_steps {
            state.step(dt, options.integrator, omega_s);
        }
    }

    let mut groups: BTreeMap<usize, Vec<String>> = BTreeMap::new();
    let mut order: Vec<usize> = Vec::new();
    for m in state.machines.iter().filter(|m| m.in_service) {
        let island = state.grid.island_of(m.bus);
        if !groups.contains_key(&island) {
            order.push(island);
        }
        groups.entry(island).or_default().push(m.id.clone());
    }
    let final_islands = order
        .into_iter()
        .map(|i| groups.remove(&i).unwrap_or_default())
        .collect();

    Ok(SimulationResult {
        dt,
        duration: horizon,
        sample_interval: dt * options.record_stride as f64,
        t: times,
        channels: names.into_iter().zip(series).collect(),
        ras_log,
        event_log,
        warnings,
        final_islands,
    })
}
