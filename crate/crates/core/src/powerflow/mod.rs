//! Newton–Raphson AC power flow (polar form, analytic Jacobian) and
//! steady-state comparison against measurements.

mod export;
mod stage;

use num_complex::Complex;
use serde::Serialize;

pub use export::{write_branch_csv, write_bus_csv, write_solution};
pub use stage::{
    compare_stage, compare_stage_with, ModelQuantities, SimulatedWindow, SolvedCase, Stage,
    StageComparison, StageError, StageRow,
};

use crate::linalg::DenseMatrix;
use crate::netmodel::{branch_stamp, build_ybus, BranchKind, BusKind, NetworkCase};
use crate::num::{Pivot, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub struct PowerFlowOptions<T> {
    /// Convergence threshold on the largest mismatch, per unit.
    pub tolerance: T,
    pub max_iterations: usize,
    pub flat_start: bool,
    /// Starting point `(v, theta)` per in-service bus, used when
    /// `flat_start` is false.
    pub initial: Option<Vec<(T, T)>>,
    pub enforce_q_limits: bool,
}

impl<T: Scalar> Default for PowerFlowOptions<T> {
    fn default() -> Self {
        Self {
            tolerance: T::of(1e-8),
            max_iterations: 20,
            flat_start: true,
            initial: None,
            enforce_q_limits: true,
        }
    }
}

impl<T: Scalar> PowerFlowOptions<T> {
    /// Warm start from a previous solution of a case with the same buses.
    pub fn warm(from: &PowerFlowSolution<T>) -> Self {
        Self {
            flat_start: false,
            initial: Some(from.v.iter().copied().zip(from.theta.iter().copied()).collect()),
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BranchFlow<T> {
    pub id: String,
    pub is_transformer: bool,
    pub from_bus: String,
    pub to_bus: String,
    pub circuit_id: String,
    pub p_from: T,
    pub q_from: T,
    pub p_to: T,
    pub q_to: T,
    pub rating: f64,
    pub in_service: bool,
}

impl<T: Scalar> BranchFlow<T> {
    pub fn loss(&self) -> T {
        self.p_from + self.p_to
    }

    pub fn s_from(&self) -> T {
        self.p_from.hypot(self.q_from)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MachineOutput<T> {
    pub id: String,
    pub bus: String,
    pub p_mw: T,
    pub q_mvar: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlackInjection<T> {
    pub bus: String,
    pub p_mw: T,
    pub q_mvar: T,
}

/// Converged (or last-iterate) operating point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerFlowSolution<T> {
    /// In-service bus ids in admittance-matrix order.
    pub bus_ids: Vec<String>,
    pub v: Vec<T>,
    pub theta: Vec<T>,
    pub branches: Vec<BranchFlow<T>>,
    pub machines: Vec<MachineOutput<T>>,
    pub slack: Vec<SlackInjection<T>>,
    pub iterations: usize,
    pub max_mismatch: T,
    pub mismatch_history: Vec<T>,
    pub converged: bool,
    /// PV buses held at a reactive limit in the final iterate.
    pub q_limited: Vec<String>,
}

impl<T: Scalar> PowerFlowSolution<T> {
    pub fn position(&self, bus_id: &str) -> Option<usize> {
        self.bus_ids.iter().position(|b| b == bus_id)
    }

    pub fn voltage(&self, bus_id: &str) -> Option<Complex<T>> {
        self.position(bus_id)
            .map(|i| Complex::from_polar(self.v[i], self.theta[i]))
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PowerFlowError {
    #[error("singular Jacobian at iteration {iteration} (worst mismatch at bus '{worst_bus}')")]
    SingularJacobian { iteration: usize, worst_bus: String },
    #[error("case has no in-service buses")]
    Empty,
    #[error("initial point has {got} entries, expected {expected}")]
    BadInitial { got: usize, expected: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Role {
    Slack,
    Pv,
    Pq,
    /// PV bus pinned at a reactive limit.
    PqAtLimit { upper: bool },
}

/// Per-bus specification in per unit.
struct BusSpec<T> {
    role: Vec<Role>,
    p: Vec<T>,
    q: Vec<T>,
    p_load: Vec<T>,
    q_load: Vec<T>,
    q_min: Vec<T>,
    q_max: Vec<T>,
    v_set: Vec<T>,
    switched_back: Vec<bool>,
}

fn bus_spec<T: Scalar>(case: &NetworkCase, ids: &[String]) -> BusSpec<T> {
    let n = ids.len();
    let base = T::of(case.base_mva);
    let pos = |bus: &str| ids.iter().position(|b| b == bus);
    let mut s = BusSpec {
        role: vec![Role::Pq; n],
        p: vec![T::zero(); n],
        q: vec![T::zero(); n],
        p_load: vec![T::zero(); n],
        q_load: vec![T::zero(); n],
        q_min: vec![T::zero(); n],
        q_max: vec![T::zero(); n],
        v_set: vec![T::one(); n],
        switched_back: vec![false; n],
    };
    let mut has_machine = vec![false; n];
    for m in case.machines.iter().filter(|m| m.status.is_in()) {
        if let Some(i) = pos(&m.bus) {
            has_machine[i] = true;
            s.p[i] += T::of(m.p_dispatch) / base;
            s.q[i] += T::of(m.q_dispatch) / base;
            s.q_min[i] += T::of(m.q_min) / base;
            s.q_max[i] += T::of(m.q_max) / base;
        }
    }
    for l in case.loads.iter().filter(|l| l.status.is_in()) {
        if let Some(i) = pos(&l.bus) {
            let (p, q) = (T::of(l.p) / base, T::of(l.q) / base);
            s.p[i] -= p;
            s.q[i] -= q;
            s.p_load[i] += p;
            s.q_load[i] += q;
        }
    }
    for (i, id) in ids.iter().enumerate() {
        let bus = case.bus(id).expect("bus ids come from the case");
        if let Some(v) = bus.v_set {
            s.v_set[i] = T::of(v);
        }
        s.role[i] = match bus.kind {
            BusKind::Slack => Role::Slack,
            BusKind::Pv if has_machine[i] => Role::Pv,
            _ => Role::Pq,
        };
    }
    s
}

/// Complex power injections `S = V·conj(Y·V)`.
fn injections<T: Scalar>(
    y: &crate::netmodel::AdmittanceMatrix<T>,
    v: &[T],
    theta: &[T],
) -> Vec<Complex<T>> {
    let vc: Vec<Complex<T>> = v
        .iter()
        .zip(theta)
        .map(|(&m, &a)| Complex::from_polar(m, a))
        .collect();
    let i = y.mul_vec(&vc);
    vc.iter().zip(&i).map(|(v, i)| v * i.conj()).collect()
}

/// Solves the AC power flow. Non-convergence is reported through
/// `converged = false`, not as an error.
pub fn solve_powerflow<T>(
    case: &NetworkCase,
    options: &PowerFlowOptions<T>,
) -> Result<PowerFlowSolution<T>, PowerFlowError>
where
    T: Scalar + Pivot<Real = T>,
{
    let y = build_ybus::<T>(case);
    let n = y.dim();
    if n == 0 {
        return Err(PowerFlowError::Empty);
    }
    let ids = y.bus_ids().to_vec();
    let mut spec = bus_spec::<T>(case, &ids);

    let (mut v, mut theta): (Vec<T>, Vec<T>) = match (&options.initial, options.flat_start) {
        (Some(init), false) => {
            if init.len() != n {
                return Err(PowerFlowError::BadInitial {
                    got: init.len(),
                    expected: n,
                });
            }
            init.iter().copied().unzip()
        }
        _ => (
            (0..n)
                .map(|i| match spec.role[i] {
                    Role::Slack | Role::Pv => spec.v_set[i],
                    _ => T::one(),
                })
                .collect(),
            vec![T::zero(); n],
        ),
    };
    for i in 0..n {
        if matches!(spec.role[i], Role::Slack | Role::Pv) {
            v[i] = spec.v_set[i];
        }
    }

    let mut history = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    let mut max_mismatch;

    loop {
        let s = injections(&y, &v, &theta);

        if options.enforce_q_limits && iterations >= 2 {
            check_q_limits(&mut spec, &s, &mut v);
        }

        let (mis, worst) = mismatch(&spec, &s);
        max_mismatch = mis.iter().fold(T::zero(), |m, x| m.max(x.abs()));
        history.push(max_mismatch);

        if max_mismatch <= options.tolerance {
            // a final limit check may still move the operating point
            if options.enforce_q_limits && check_q_limits(&mut spec, &s, &mut v) {
                if iterations >= options.max_iterations {
                    break;
                }
            } else {
                converged = true;
                break;
            }
        }
        if iterations >= options.max_iterations {
            break;
        }
        iterations += 1;

        let jac = jacobian(&y, &spec, &v, &theta, &s);
        let lu = jac.factor().map_err(|_| PowerFlowError::SingularJacobian {
            iteration: iterations,
            worst_bus: ids[worst].clone(),
        })?;
        let dx = lu.solve(&mis);
        let mut k = 0;
        for i in 0..n {
            if spec.role[i] != Role::Slack {
                theta[i] += dx[k];
                k += 1;
            }
        }
        for i in 0..n {
            if is_pq(spec.role[i]) {
                v[i] += dx[k];
                k += 1;
            }
        }
    }

    let s = injections(&y, &v, &theta);
    let base = T::of(case.base_mva);

    let branches = branch_flows_at(case, &ids, &v, &theta);
    let machines = machine_outputs(case, &ids, &spec, &s, base);
    let slack = (0..n)
        .filter(|&i| spec.role[i] == Role::Slack)
        .map(|i| SlackInjection {
            bus: ids[i].clone(),
            p_mw: (s[i].re + spec.p_load[i]) * base,
            q_mvar: (s[i].im + spec.q_load[i]) * base,
        })
        .collect();
    let q_limited = (0..n)
        .filter(|&i| matches!(spec.role[i], Role::PqAtLimit { .. }))
        .map(|i| ids[i].clone())
        .collect();

    Ok(PowerFlowSolution {
        bus_ids: ids,
        v,
        theta,
        branches,
        machines,
        slack,
        iterations,
        max_mismatch,
        mismatch_history: history,
        converged,
        q_limited,
    })
}

fn is_pq(r: Role) -> bool {
    matches!(r, Role::Pq | Role::PqAtLimit { .. })
}

/// Mismatch vector (specified − calculated) ordered as [P non-slack; Q PQ],
/// and the bus with the largest absolute entry.
fn mismatch<T: Scalar>(spec: &BusSpec<T>, s: &[Complex<T>]) -> (Vec<T>, usize) {
    let n = s.len();
    let mut out = Vec::with_capacity(2 * n);
    let mut owners = Vec::with_capacity(2 * n);
    for i in 0..n {
        if spec.role[i] != Role::Slack {
            out.push(spec.p[i] - s[i].re);
            owners.push(i);
        }
    }
    for i in 0..n {
        if is_pq(spec.role[i]) {
            out.push(spec.q[i] - s[i].im);
            owners.push(i);
        }
    }
    let worst = out
        .iter()
        .enumerate()
        .fold((0, T::zero()), |(bi, bv), (k, x)| {
            if x.abs() > bv {
                (k, x.abs())
            } else {
                (bi, bv)
            }
        })
        .0;
    (out, owners.get(worst).copied().unwrap_or(0))
}

/// PV→PQ switching at reactive limits, with one switch-back per bus.
/// Returns whether any bus changed role.
fn check_q_limits<T: Scalar>(spec: &mut BusSpec<T>, s: &[Complex<T>], v: &mut [T]) -> bool {
    let tol = T::of(1e-9);
    let mut changed = false;
    for i in 0..s.len() {
        let q_gen = s[i].im + spec.q_load[i];
        match spec.role[i] {
            Role::Pv => {
                if q_gen > spec.q_max[i] + tol {
                    spec.role[i] = Role::PqAtLimit { upper: true };
                    spec.q[i] = spec.q_max[i] - spec.q_load[i];
                    changed = true;
                } else if q_gen < spec.q_min[i] - tol {
                    spec.role[i] = Role::PqAtLimit { upper: false };
                    spec.q[i] = spec.q_min[i] - spec.q_load[i];
                    changed = true;
                }
            }
            Role::PqAtLimit { upper } if !spec.switched_back[i] => {
                let back = if upper {
                    v[i] > spec.v_set[i] + tol
                } else {
                    v[i] < spec.v_set[i] - tol
                };
                if back {
                    spec.role[i] = Role::Pv;
                    spec.switched_back[i] = true;
                    v[i] = spec.v_set[i];
                    changed = true;
                }
            }
            _ => {}
        }
    }
    changed
}

fn jacobian<T>(
    y: &crate::netmodel::AdmittanceMatrix<T>,
    spec: &BusSpec<T>,
    v: &[T],
    theta: &[T],
    s: &[Complex<T>],
) -> DenseMatrix<T>
where
    T: Scalar + Pivot<Real = T>,
{
    let n = v.len();
    // column/row maps
    let mut ang = vec![None; n];
    let mut mag = vec![None; n];
    let mut k = 0;
    for i in 0..n {
        if spec.role[i] != Role::Slack {
            ang[i] = Some(k);
            k += 1;
        }
    }
    for i in 0..n {
        if is_pq(spec.role[i]) {
            mag[i] = Some(k);
            k += 1;
        }
    }
    let mut jac = DenseMatrix::zeros(k);
    for i in 0..n {
        let (pi, qi) = (s[i].re, s[i].im);
        for &(kk, yik) in y.row(i) {
            let (g, b) = (yik.re, yik.im);
            if kk == i {
                if let Some(r) = ang[i] {
                    jac.set(r, r, -qi - b * v[i] * v[i]);
                    if let Some(c) = mag[i] {
                        jac.set(r, c, pi / v[i] + g * v[i]);
                    }
                }
                if let Some(r) = mag[i] {
                    if let Some(c) = ang[i] {
                        jac.set(r, c, pi - g * v[i] * v[i]);
                    }
                    jac.set(r, r, qi / v[i] - b * v[i]);
                }
                continue;
            }
            let t = theta[i] - theta[kk];
            let (sin, cos) = t.sin_cos();
            if let Some(r) = ang[i] {
                if let Some(c) = ang[kk] {
                    jac.set(r, c, v[i] * v[kk] * (g * sin - b * cos));
                }
                if let Some(c) = mag[kk] {
                    jac.set(r, c, v[i] * (g * cos + b * sin));
                }
            }
            if let Some(r) = mag[i] {
                if let Some(c) = ang[kk] {
                    jac.set(r, c, -v[i] * v[kk] * (g * cos + b * sin));
                }
                if let Some(c) = mag[kk] {
                    jac.set(r, c, v[i] * (g * sin - b * cos));
                }
            }
        }
    }
    jac
}

fn branch_flows_at<T: Scalar>(
    case: &NetworkCase,
    ids: &[String],
    v: &[T],
    theta: &[T],
) -> Vec<BranchFlow<T>> {
    let base = T::of(case.base_mva);
    let pos = |bus: &str| ids.iter().position(|b| b == bus);
    case.all_branches()
        .map(|b| {
            let mut rec = BranchFlow {
                id: b.id.to_string(),
                is_transformer: b.kind == BranchKind::Transformer,
                from_bus: b.from_bus.to_string(),
                to_bus: b.to_bus.to_string(),
                circuit_id: b.circuit_id.to_string(),
                p_from: T::zero(),
                q_from: T::zero(),
                p_to: T::zero(),
                q_to: T::zero(),
                rating: b.rating,
                in_service: false,
            };
            if !b.status.is_in() {
                return rec;
            }
            let (Some(f), Some(t)) = (pos(b.from_bus), pos(b.to_bus)) else {
                return rec;
            };
            let st = branch_stamp::<T>(&b);
            let vf = Complex::from_polar(v[f], theta[f]);
            let vt = Complex::from_polar(v[t], theta[t]);
            let sf = vf * (st.yff * vf + st.yft * vt).conj() * base;
            let stt = vt * (st.ytf * vf + st.ytt * vt).conj() * base;
            rec.p_from = sf.re;
            rec.q_from = sf.im;
            rec.p_to = stt.re;
            rec.q_to = stt.im;
            rec.in_service = true;
            rec
        })
        .collect()
}

fn machine_outputs<T: Scalar>(
    case: &NetworkCase,
    ids: &[String],
    spec: &BusSpec<T>,
    s: &[Complex<T>],
    base: T,
) -> Vec<MachineOutput<T>> {
    let pos = |bus: &str| ids.iter().position(|b| b == bus);
    let n = ids.len();
    let mut mbase_sum = vec![T::zero(); n];
    for m in case.machines.iter().filter(|m| m.status.is_in()) {
        if let Some(i) = pos(&m.bus) {
            mbase_sum[i] += T::of(m.mbase);
        }
    }
    case.machines
        .iter()
        .filter(|m| m.status.is_in())
        .filter_map(|m| {
            let i = pos(&m.bus)?;
            let share = T::of(m.mbase) / mbase_sum[i];
            let p_gen = (s[i].re + spec.p_load[i]) * base;
            let q_gen = (s[i].im + spec.q_load[i]) * base;
            let (p, q) = match spec.role[i] {
                Role::Slack => (p_gen * share, q_gen * share),
                Role::Pv | Role::PqAtLimit { .. } => (T::of(m.p_dispatch), q_gen * share),
                Role::Pq => (T::of(m.p_dispatch), T::of(m.q_dispatch)),
            };
            Some(MachineOutput {
                id: m.id.clone(),
                bus: m.bus.clone(),
                p_mw: p,
                q_mvar: q,
            })
        })
        .collect()
}

/// Per-branch flows (MW/MVAr) of a solved case. Open branches give zero
/// records.
pub fn branch_flows<T: Scalar>(
    case: &NetworkCase,
    solution: &PowerFlowSolution<T>,
) -> Vec<BranchFlow<T>> {
    branch_flows_at(case, &solution.bus_ids, &solution.v, &solution.theta)
}

/// Largest absolute P/Q mismatch (pu) recomputed from a solution's voltages.
pub fn recompute_mismatch<T>(case: &NetworkCase, solution: &PowerFlowSolution<T>) -> T
where
    T: Scalar,
{
    let y = build_ybus::<T>(case);
    let mut spec = bus_spec::<T>(case, y.bus_ids());
    let s = injections(&y, &solution.v, &solution.theta);
    for id in &solution.q_limited {
        if let Some(i) = solution.position(id) {
            // pinned buses are specified at their limit
            let q_gen = s[i].im + spec.q_load[i];
            let upper = (q_gen - spec.q_max[i]).abs() < (q_gen - spec.q_min[i]).abs();
            spec.role[i] = Role::PqAtLimit { upper };
            spec.q[i] = if upper { spec.q_max[i] } else { spec.q_min[i] } - spec.q_load[i];
        }
    }
    let (mis, _) = mismatch(&spec, &s);
    mis.iter().fold(T::zero(), |m, x| m.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::load_case;

    fn two_bus() -> NetworkCase {
        load_case(crate::netmodel::tests::TWO_BUS).unwrap()
    }

    /// Closed-form lossless two-bus: V2·sinθ = P·x, V2 = cosθ when Q = 0,
    /// so sin 2θ = 2·P·x.
    fn two_bus_oracle(p: f64, x: f64) -> (f64, f64) {
        let theta = 0.5 * (2.0 * p * x).asin();
        (theta.cos(), -theta)
    }

    #[test]
    fn two_bus_matches_closed_form() {
        let sol = solve_powerflow::<f64>(&two_bus(), &PowerFlowOptions::default()).unwrap();
        let (v2, th2) = two_bus_oracle(1.0, 0.1);
        assert!(sol.converged);
        assert!((sol.v[1] - v2).abs() < 1e-9, "{} vs {v2}", sol.v[1]);
        assert!((sol.theta[1] - th2).abs() < 1e-9);
        assert!((v2 - 0.994936).abs() < 1e-6 && (th2 + 0.1007).abs() < 1e-4);
    }

    #[test]
    fn two_bus_flows() {
        let case = two_bus();
        let sol = solve_powerflow::<f64>(&case, &PowerFlowOptions::default()).unwrap();
        let f = &branch_flows(&case, &sol)[0];
        assert!((f.p_from - 100.0).abs() < 1e-6);
        assert!((f.p_to + 100.0).abs() < 1e-6);
        assert!(f.loss().abs() < 1e-6);
    }

    #[test]
    fn reversed_branch_negates_flows() {
        let mut case = two_bus();
        let sol = solve_powerflow::<f64>(&case, &PowerFlowOptions::default()).unwrap();
        let fwd = branch_flows(&case, &sol)[0].clone();
        let b = &mut case.branches[0];
        std::mem::swap(&mut b.from_bus, &mut b.to_bus);
        let rev = branch_flows(&case, &sol)[0].clone();
        assert!((fwd.p_from - rev.p_to).abs() < 1e-9);
        assert!((fwd.q_from - rev.q_to).abs() < 1e-9);
    }

    #[test]
    fn open_branch_zero_flow() {
        let mut case = two_bus();
        let sol = solve_powerflow::<f64>(&case, &PowerFlowOptions::default()).unwrap();
        case.branches[0].status = crate::netmodel::Status::Out;
        let f = &branch_flows(&case, &sol)[0];
        assert!(!f.in_service);
        assert_eq!((f.p_from, f.q_from, f.p_to, f.q_to), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn zero_load_is_flat() {
        let mut case = two_bus();
        case.loads.clear();
        let sol = solve_powerflow::<f64>(&case, &PowerFlowOptions::default()).unwrap();
        assert!(sol.converged);
        assert!(sol.iterations <= 1);
        assert!(sol.v.iter().all(|&v| (v - 1.0).abs() < 1e-12));
        assert!(sol.theta.iter().all(|&t| t.abs() < 1e-12));
    }

    #[test]
    fn single_precision_two_bus() {
        let opts = PowerFlowOptions::<f32> {
            tolerance: 1e-5,
            ..Default::default()
        };
        let sol = solve_powerflow::<f32>(&two_bus(), &opts).unwrap();
        assert!(sol.converged);
        assert!((sol.v[1] as f64 - 0.994936).abs() < 1e-4);
    }

    #[test]
    fn mismatch_certificate() {
        let case = two_bus();
        let sol = solve_powerflow::<f64>(&case, &PowerFlowOptions::default()).unwrap();
        assert!(recompute_mismatch(&case, &sol) <= 1e-8);
    }

    #[test]
    fn reactive_limit_switches_pv_to_pq() {
        // PV generator at bus 2 that would need lots of Q to hold 1.05 pu
        let mut case = two_bus();
        case.buses[1].kind = BusKind::Pv;
        case.buses[1].v_set = Some(1.05);
        case.machines.push(crate::netmodel::Machine {
            id: "G2".into(),
            bus: "2".into(),
            p_dispatch: 0.0,
            q_dispatch: 0.0,
            q_min: -10.0,
            q_max: 10.0,
            mbase: 100.0,
            status: crate::netmodel::Status::In,
        });
        let sol = solve_powerflow::<f64>(&case, &PowerFlowOptions::default()).unwrap();
        assert!(sol.converged);
        assert_eq!(sol.q_limited, vec!["2".to_string()]);
        let g2 = sol.machines.iter().find(|m| m.id == "G2").unwrap();
        assert!((g2.q_mvar - 10.0).abs() < 1e-6);
        assert!(sol.v[1] < 1.05);
        assert!(recompute_mismatch(&case, &sol) <= 1e-8);
    }

    #[test]
    fn warm_start_converges_immediately() {
        let case = two_bus();
        let sol = solve_powerflow::<f64>(&case, &PowerFlowOptions::default()).unwrap();
        let again = solve_powerflow::<f64>(&case, &PowerFlowOptions::warm(&sol)).unwrap();
        assert!(again.converged);
        assert_eq!(again.iterations, 0);
    }

    #[test]
    fn non_convergence_is_a_result_state() {
        let mut case = two_bus();
        case.loads[0].p = 2000.0;
        let sol = solve_powerflow::<f64>(&case, &PowerFlowOptions::default());
        match sol {
            Ok(s) => assert!(!s.converged),
            Err(PowerFlowError::SingularJacobian { .. }) => {}
            Err(e) => panic!("unexpected {e}"),
        }
    }
}
