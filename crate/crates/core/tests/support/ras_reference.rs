//! Brute-force reference automata for every RAS kind plus script
//! generators. Shared by the property tests and the acceptance harness.

#![allow(dead_code)]

use std::f64::consts::PI;

use gridseam_core::dynamics::Action;
use gridseam_core::netmodel::{load_case, NetworkCase};
use gridseam_core::ras::{InterfaceMember, RasConfig, RasSpec, Signals};
use gridseam_core::Complex64;
use proptest::prelude::*;

pub const KINDS: [&str; 5] = [
    "transfer_trip",
    "oscillation",
    "overload_shed",
    "directional_power",
    "distance",
];

const EPS: f64 = 1e-9;
const BASE_MVA: f64 = 100.0;
const RATING: f64 = 300.0;

pub const CASE: &str = r#"{
    "base_mva": 100.0,
    "areas": [{"id": "A", "name": "A"}, {"id": "B", "name": "B"}],
    "buses": [
        {"id": "1", "name": "ONE", "area": "A", "base_kv": 230.0, "kind": "slack", "v_set": 1.0},
        {"id": "2", "name": "TWO", "area": "B", "base_kv": 230.0, "kind": "pv", "v_set": 1.0}
    ],
    "branches": [
        {"id": "L1", "from_bus": "1", "to_bus": "2", "r": 0.0, "x": 0.1, "rating": 300.0},
        {"id": "L2", "from_bus": "1", "to_bus": "2", "circuit_id": "2", "r": 0.0, "x": 0.1, "rating": 300.0}
    ],
    "machines": [
        {"id": "G1", "bus": "1", "p_dispatch": 0.0, "q_min": -500.0, "q_max": 500.0, "mbase": 100.0},
        {"id": "G2", "bus": "2", "p_dispatch": 80.0, "q_min": -500.0, "q_max": 500.0, "mbase": 100.0}
    ],
    "loads": [{"id": "D2", "bus": "2", "p": 80.0}]
}"#;

pub fn case() -> NetworkCase {
    load_case(CASE).expect("reference case parses")
}

#[derive(Debug, Clone)]
pub struct Sample {
    /// From-end power of L1 and L2, MW + jMVAr.
    pub s1: Complex64,
    pub s2: Complex64,
    /// Voltage at bus 1, pu.
    pub v: Complex64,
}

#[derive(Debug, Clone)]
pub struct Script {
    pub spec: RasSpec,
    pub dt: f64,
    pub units: Vec<(String, f64)>,
    pub samples: Vec<Sample>,
}

impl Script {
    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }
}

/// (step index, action) pairs in emission order.
pub type Log = Vec<(usize, String)>;

struct Step<'a> {
    s: &'a Sample,
    units: &'a [(String, f64)],
}

impl Signals for Step<'_> {
    fn branch_power(&self, branch: &str) -> Complex64 {
        match branch {
            "L1" => self.s.s1,
            "L2" => self.s.s2,
            other => panic!("script has no branch {other}"),
        }
    }
    fn bus_voltage(&self, _: &str) -> Complex64 {
        self.s.v
    }
    fn area_generation(&self, _: &str) -> Vec<(String, f64)> {
        self.units.to_vec()
    }
}

/// Drives the production state machine through the script.
pub fn run_instance(script: &Script, case: &NetworkCase) -> Log {
    let cfg = RasConfig {
        schemes: vec![script.spec.clone()],
        notes: Vec::new(),
    };
    let mut inst = cfg.instantiate(case).expect("script spec binds").remove(0);
    let mut log = Log::new();
    for (k, s) in script.samples.iter().enumerate() {
        let sig = Step {
            s,
            units: &script.units,
        };
        for out in inst.evaluate(script.time(k), &sig) {
            log.push((k, out.action.to_string()));
        }
    }
    log
}

/// First step at which the condition has held without a break, counted
/// from the start of its current run, for at least `pickup` seconds.
fn first_pickup(cond: &[bool], times: &[f64], pickup: f64) -> Option<usize> {
    (0..cond.len()).find(|&k| {
        if !cond[k] {
            return false;
        }
        let mut j = k;
        while j > 0 && cond[j - 1] {
            j -= 1;
        }
        times[k] - times[j] >= pickup - EPS
    })
}

fn trip_log(k: usize, branches: &[String]) -> Log {
    branches
        .iter()
        .map(|b| (k, Action::TripBranch { branch: b.clone() }.to_string()))
        .collect()
}

struct Ext {
    t: f64,
    value: f64,
    confirmed: usize,
}

/// Zigzag extrema with hysteresis `h`, each tagged with the sample index
/// at which the reversal confirmed it.
fn zigzag(times: &[f64], x: &[f64], h: f64) -> Vec<Ext> {
    let n = x.len();
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    let (mut lo, mut hi) = (x[0], x[0]);
    let mut i = 1;
    let mut rising = None;
    while i < n {
        if x[i] >= lo + h && x[i] > lo {
            rising = Some(true);
            break;
        }
        if x[i] <= hi - h && x[i] < hi {
            rising = Some(false);
            break;
        }
        lo = lo.min(x[i]);
        hi = hi.max(x[i]);
        i += 1;
    }
    let Some(mut up) = rising else {
        return out;
    };
    let mut best = i;
    for j in i + 1..n {
        let further = if up { x[j] > x[best] } else { x[j] < x[best] };
        let reversed = if up {
            x[j] <= x[best] - h && x[j] < x[best]
        } else {
            x[j] >= x[best] + h && x[j] > x[best]
        };
        if further {
            best = j;
        } else if reversed {
            out.push(Ext {
                t: times[best],
                value: x[best],
                confirmed: j,
            });
            up = !up;
            best = j;
        }
    }
    out
}

fn shed_choice(units: &[(String, f64)], block: f64) -> Vec<String> {
    let mut pool: Vec<(String, f64)> = units.iter().filter(|u| u.1 > 0.0).cloned().collect();
    let mut covered = 0.0;
    let mut chosen = Vec::new();
    while covered < block && !pool.is_empty() {
        let mut pick = 0;
        for (i, u) in pool.iter().enumerate() {
            let p = &pool[pick];
            if u.1 > p.1 || (u.1 == p.1 && u.0 < p.0) {
                pick = i;
            }
        }
        let (id, p) = pool.remove(pick);
        covered += p;
        chosen.push(id);
    }
    chosen
}

/// The reference automaton: recomputes the action log from the whole
/// input series.
pub fn reference(script: &Script) -> Log {
    let n = script.samples.len();
    let times: Vec<f64> = (0..n).map(|k| script.time(k)).collect();
    let s = &script.samples;
    match &script.spec {
        RasSpec::TransferTrip {
            armed,
            p_threshold,
            v_threshold,
            pickup_time,
            trip,
            branch,
            ..
        } => {
            if !armed {
                return Log::new();
            }
            let cond: Vec<bool> = s
                .iter()
                .map(|x| x.s1.re > *p_threshold && x.v.norm() < *v_threshold)
                .collect();
            let trip = if trip.is_empty() {
                vec![branch.clone()]
            } else {
                trip.clone()
            };
            first_pickup(&cond, &times, *pickup_time)
                .map(|k| trip_log(k, &trip))
                .unwrap_or_default()
        }
        RasSpec::Oscillation {
            armed,
            amplitude_threshold,
            persist_time,
            window,
            undamped_ratio,
            trip,
            branch,
            ..
        } => {
            if !armed {
                return Log::new();
            }
            let x: Vec<f64> = s.iter().map(|x| x.s1.re).collect();
            let ext = zigzag(&times, &x, 0.1 * amplitude_threshold);
            let cond: Vec<bool> = (0..n)
                .map(|k| {
                    let known: Vec<&Ext> = ext.iter().filter(|e| e.confirmed <= k).collect();
                    let Some(newest) = known.last().map(|e| e.t) else {
                        return false;
                    };
                    if times[k] - newest > *window {
                        return false;
                    }
                    let live: Vec<f64> = known
                        .iter()
                        .filter(|e| e.t >= newest - window)
                        .map(|e| e.value)
                        .collect();
                    let m = live.len();
                    if m < 4 {
                        return false;
                    }
                    let last = (live[m - 1] - live[m - 2]).abs();
                    let earlier = (live[m - 3] - live[m - 4]).abs();
                    last >= *amplitude_threshold && earlier > 0.0 && last >= undamped_ratio * earlier
                })
                .collect();
            let trip = if trip.is_empty() {
                vec![branch.clone()]
            } else {
                trip.clone()
            };
            first_pickup(&cond, &times, *persist_time)
                .map(|k| trip_log(k, &trip))
                .unwrap_or_default()
        }
        RasSpec::OverloadShed {
            armed,
            overload_factor,
            stage1_delay,
            shed_block,
            stage2_delay,
            tie,
            ..
        } => {
            if !armed {
                return Log::new();
            }
            let over: Vec<bool> = s
                .iter()
                .map(|x| x.s1.norm() > RATING * overload_factor)
                .collect();
            let Some(k1) = first_pickup(&over, &times, *stage1_delay) else {
                return Log::new();
            };
            let mut log: Log = shed_choice(&script.units, *shed_block)
                .into_iter()
                .map(|m| (k1, Action::TripMachine { machine: m }.to_string()))
                .collect();
            for k in k1 + 1..n {
                if !over[k] {
                    break;
                }
                if times[k] - times[k1] >= stage2_delay - EPS {
                    log.extend(trip_log(k, std::slice::from_ref(tie)));
                    break;
                }
            }
            log
        }
        RasSpec::DirectionalPower {
            armed,
            interface,
            p_threshold,
            pickup_time,
            actions,
            ..
        } => {
            if !armed {
                return Log::new();
            }
            let cond: Vec<bool> = s
                .iter()
                .map(|x| {
                    let mut p = 0.0;
                    for m in interface {
                        let flow = if m.branch == "L1" { x.s1.re } else { x.s2.re };
                        p += m.sign * flow;
                    }
                    p > *p_threshold
                })
                .collect();
            first_pickup(&cond, &times, *pickup_time)
                .map(|k| actions.iter().map(|a| (k, a.to_string())).collect())
                .unwrap_or_default()
        }
        RasSpec::Distance {
            armed,
            branch,
            reach,
            angle,
            timer,
            ..
        } => {
            if !armed {
                return Log::new();
            }
            let cond: Vec<bool> = s
                .iter()
                .map(|x| {
                    let sp = x.s1 / BASE_MVA;
                    let vm = x.v.norm();
                    if vm == 0.0 || sp.norm() / vm <= 1e-6 {
                        return false;
                    }
                    // z = V / conj(S/V) = |V|^2 / conj(S)
                    let z = (vm * vm) / sp.conj();
                    z.norm_sqr() <= reach * (z.re * angle.cos() + z.im * angle.sin())
                })
                .collect();
            first_pickup(&cond, &times, *timer)
                .map(|k| trip_log(k, std::slice::from_ref(branch)))
                .unwrap_or_default()
        }
    }
}

/// Compares production and reference logs for one script.
pub fn check(script: &Script, case: &NetworkCase) -> Result<(), String> {
    let got = run_instance(script, case);
    let want = reference(script);
    if got == want {
        Ok(())
    } else {
        Err(format!(
            "{}: state machine {:?} vs reference {:?}",
            script.spec.kind(),
            got,
            want
        ))
    }
}

fn armed() -> impl Strategy<Value = bool> {
    prop::bool::weighted(0.9)
}

fn dt() -> impl Strategy<Value = f64> {
    prop_oneof![Just(1.0 / 240.0), Just(1.0 / 60.0), Just(0.01), Just(0.05)]
}

/// Either a whole number of steps or an arbitrary delay.
fn delay(dt: f64) -> impl Strategy<Value = f64> {
    prop_oneof![
        (0usize..40).prop_map(move |k| k as f64 * dt),
        0.0..0.6f64,
    ]
}

/// Grid values hit thresholds exactly; the continuous branch fills between.
fn level(grid: f64, lo: i32, hi: i32) -> impl Strategy<Value = f64> {
    prop_oneof![
        (lo..=hi).prop_map(move |k| k as f64 * grid),
        (lo as f64 * grid)..(hi as f64 * grid),
    ]
}

fn expand(segments: Vec<(Sample, usize)>) -> Vec<Sample> {
    segments
        .into_iter()
        .flat_map(|(s, len)| std::iter::repeat(s).take(len))
        .collect()
}

fn voltage() -> impl Strategy<Value = Complex64> {
    (level(0.05, 14, 22), -0.5..0.5f64).prop_map(|(m, a)| Complex64::from_polar(m, a))
}

fn branch_flow() -> impl Strategy<Value = Complex64> {
    (level(50.0, -4, 8), -80.0..80.0f64).prop_map(|(p, q)| Complex64::new(p, q))
}

fn segments(
    sample: impl Strategy<Value = Sample>,
) -> impl Strategy<Value = Vec<Sample>> {
    prop::collection::vec((sample, 1usize..30), 1..30).prop_map(expand)
}

fn transfer_trip() -> impl Strategy<Value = Script> {
    dt().prop_flat_map(|dt| {
        let spec = (
            armed(),
            (1i32..=6).prop_map(|k| 50.0 * k as f64),
            prop_oneof![Just(0.85), Just(0.9), 0.6..1.1f64],
            delay(dt),
            prop::bool::ANY,
        )
            .prop_map(|(armed, p, v, pickup, both)| RasSpec::TransferTrip {
                id: "TT".into(),
                armed,
                branch: "L1".into(),
                p_threshold: p,
                voltage_bus: "ONE".into(),
                v_threshold: v,
                pickup_time: pickup,
                trip: if both {
                    vec!["L1".into(), "L2".into()]
                } else {
                    Vec::new()
                },
            });
        let sample = (branch_flow(), branch_flow(), voltage())
            .prop_map(|(s1, s2, v)| Sample { s1, s2, v });
        (spec, segments(sample)).prop_map(move |(spec, samples)| Script {
            spec,
            dt,
            units: Vec::new(),
            samples,
        })
    })
}

fn oscillation() -> impl Strategy<Value = Script> {
    let settings = (
        armed(),
        0.5..3.0f64,
        20.0..200.0f64,
        0.2..5.0f64,
        2.0..4.0f64,
        prop_oneof![Just(0.98), 0.9..1.0f64],
    );
    let signal = (
        -200.0..200.0f64,
        0.0..300.0f64,
        0.85..1.05f64,
        0.0..(2.0 * PI),
        prop::collection::vec((0usize..900, -100.0..100.0f64), 0..4),
    );
    (
        prop_oneof![Just(1.0 / 60.0), Just(1.0 / 30.0), Just(0.05)],
        200usize..900,
        settings,
        signal,
    )
        .prop_map(
            |(dt, n, (armed, period, thr, persist, periods, ratio), (off, amp, decay, phi, jumps))| {
                let spec = RasSpec::Oscillation {
                    id: "OSC".into(),
                    armed,
                    branch: "L1".into(),
                    amplitude_threshold: thr,
                    persist_time: persist,
                    window: periods * period,
                    undamped_ratio: ratio,
                    trip: Vec::new(),
                };
                let samples = (0..n)
                    .map(|k| {
                        let t = k as f64 * dt;
                        let mut p = off
                            + amp * decay.powf(t / period) * (2.0 * PI * t / period + phi).sin();
                        for &(at, jump) in &jumps {
                            if k >= at {
                                p += jump;
                            }
                        }
                        Sample {
                            s1: Complex64::new(p, 0.0),
                            s2: Complex64::new(0.0, 0.0),
                            v: Complex64::new(1.0, 0.0),
                        }
                    })
                    .collect();
                Script {
                    spec,
                    dt,
                    units: Vec::new(),
                    samples,
                }
            },
        )
}

fn units() -> impl Strategy<Value = Vec<(String, f64)>> {
    prop::collection::vec(
        prop_oneof![Just(0.0), Just(25.0), Just(50.0), Just(80.0), Just(-10.0), 0.0..200.0f64],
        0..6,
    )
    .prop_map(|ps| {
        ps.into_iter()
            .enumerate()
            .map(|(i, p)| (format!("G{}", 6 - i), p))
            .collect()
    })
}

fn overload_shed() -> impl Strategy<Value = Script> {
    dt().prop_flat_map(|dt| {
        let spec = (
            armed(),
            prop_oneof![Just(1.0), Just(1.1), 1.0..1.3f64],
            delay(dt),
            10.0..300.0f64,
            delay(dt),
        )
            .prop_map(|(armed, factor, d1, block, d2)| RasSpec::OverloadShed {
                id: "OV".into(),
                armed,
                branch: "L1".into(),
                overload_factor: factor,
                stage1_delay: d1,
                shed_area: "B".into(),
                shed_block: block,
                stage2_delay: d2,
                tie: "L2".into(),
            });
        let sample = ((level(30.0, 5, 14), -PI..PI).prop_map(|(m, a)| Complex64::from_polar(m, a)))
            .prop_map(|s1| Sample {
                s1,
                s2: Complex64::new(0.0, 0.0),
                v: Complex64::new(1.0, 0.0),
            });
        (spec, units(), segments(sample)).prop_map(move |(spec, units, samples)| Script {
            spec,
            dt,
            units,
            samples,
        })
    })
}

fn directional_power() -> impl Strategy<Value = Script> {
    dt().prop_flat_map(|dt| {
        let sign = prop_oneof![Just(1.0), Just(-1.0)];
        let spec = (
            armed(),
            sign.clone(),
            sign,
            (-2i32..=8).prop_map(|k| 50.0 * k as f64),
            delay(dt),
        )
            .prop_map(|(armed, a, b, p, pickup)| RasSpec::DirectionalPower {
                id: "DIR".into(),
                armed,
                interface: vec![
                    InterfaceMember {
                        branch: "L1".into(),
                        sign: a,
                    },
                    InterfaceMember {
                        branch: "L2".into(),
                        sign: b,
                    },
                ],
                p_threshold: p,
                pickup_time: pickup,
                actions: vec![
                    Action::TripBranch {
                        branch: "L2".into(),
                    },
                    Action::ShedLoad {
                        load: "D2".into(),
                        mw: 10.0,
                    },
                ],
            });
        let sample = (branch_flow(), branch_flow()).prop_map(|(s1, s2)| Sample {
            s1,
            s2,
            v: Complex64::new(1.0, 0.0),
        });
        (spec, segments(sample)).prop_map(move |(spec, samples)| Script {
            spec,
            dt,
            units: Vec::new(),
            samples,
        })
    })
}

fn distance() -> impl Strategy<Value = Script> {
    (dt(), 0.02..0.5f64, 1.1..1.5f64).prop_flat_map(|(dt, reach, angle)| {
        let spec = (armed(), delay(dt)).prop_map(move |(armed, timer)| RasSpec::Distance {
            id: "Z".into(),
            armed,
            branch: "L1".into(),
            reach,
            angle,
            timer,
        });
        let apparent = (0.0..1.6f64, -PI..PI).prop_map(move |(m, a)| {
            Complex64::from_polar(m * reach, a)
        });
        let sample = (
            prop_oneof![
                8 => apparent.prop_map(Some),
                1 => Just(None),
            ],
            prop_oneof![8 => voltage(), 1 => Just(Complex64::new(0.0, 0.0))],
        )
            .prop_map(|(z, v)| {
                // S = |V|^2 / conj(z), on the system base
                let s1 = match z {
                    Some(z) if z.norm() > 0.0 && v.norm() > 0.0 => {
                        (v.norm_sqr() / z.conj()) * BASE_MVA
                    }
                    _ => Complex64::new(0.0, 0.0),
                };
                Sample {
                    s1,
                    s2: Complex64::new(0.0, 0.0),
                    v,
                }
            });
        (spec, segments(sample)).prop_map(move |(spec, samples)| Script {
            spec,
            dt,
            units: Vec::new(),
            samples,
        })
    })
}

pub fn scripts(kind: &str) -> BoxedStrategy<Script> {
    match kind {
        "transfer_trip" => transfer_trip().boxed(),
        "oscillation" => oscillation().boxed(),
        "overload_shed" => overload_shed().boxed(),
        "directional_power" => directional_power().boxed(),
        "distance" => distance().boxed(),
        other => panic!("unknown RAS kind {other}"),
    }
}

/// Runs `cases` random scripts of one kind; returns how many produced at
/// least one action, or the first mismatch.
pub fn equivalence(kind: &str, cases: u32) -> Result<u32, String> {
    use proptest::test_runner::{Config, TestCaseError, TestRng, TestRunner};
    use std::cell::Cell;
    let case = case();
    let fired = Cell::new(0u32);
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    let rng = TestRng::deterministic_rng(config.rng_algorithm);
    let mut runner = TestRunner::new_with_rng(config, rng);
    runner
        .run(&scripts(kind), |script| {
            if !reference(&script).is_empty() {
                fired.set(fired.get() + 1);
            }
            check(&script, &case).map_err(TestCaseError::fail)
        })
        .map_err(|e| e.to_string())?;
    Ok(fired.get())
}
