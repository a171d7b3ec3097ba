//! Event validation run end to end: solve, adjust reserve, simulate,
//! compare against measurements, grade and diagnose.

use std::collections::{BTreeMap, BTreeSet};

use crate::dynamics::{
    adjust_governors_for_reserve, init_dynamics, simulate, EventSequence, MachineDynamics,
    ReserveAdjustment, SimOptions, SimulationResult, UnitDispatch,
};
use crate::netmodel::NetworkCase;
use crate::powerflow::{
    compare_stage, compare_stage_with, solve_powerflow, PowerFlowOptions, SimulatedWindow, Stage,
    StageComparison,
};
use crate::ras::RasConfig;
use crate::validation::{
    align, compute_metrics, diagnose, grade, Alignment, DiagnosisInputs, DiagnosisThresholds,
    GradeThresholds, GradedChannel, MeasurementSet, Provenance, ValidationReport, Windows,
};


#[derive(Debug, Clone)]
pub struct EventValidation {
    pub sim: SimOptions,
    /// Measurement time minus simulation time, s.
    pub t0_offset: f64,
    /// Responsive reserve to impose before simulating, MW.
    pub reserve_target: Option<f64>,
    /// Simulation-time windows; defaults derive from the first event.
    pub pre_window: Option<(f64, f64)>,
    pub during_window: Option<(f64, f64)>,
    pub post_window: Option<(f64, f64)>,
    pub grades: GradeThresholds,
    pub diagnosis: DiagnosisThresholds,
    pub case_id: String,
    pub event_id: String,
}

impl Default for EventValidation {
    fn default() -> Self {
        Self {
            sim: SimOptions::default(),
            t0_offset: 0.0,
            reserve_target: None,
            pre_window: None,
            during_window: None,
            post_window: None,
            grades: GradeThresholds::default(),
            diagnosis: DiagnosisThresholds::default(),
            case_id: String::new(),
            event_id: String::new(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("power flow: {0}")]
    PowerFlow(String),
    #[error("reserve adjustment: {0}")]
    Reserve(#[from] crate::dynamics::ReserveError),
    #[error("dynamic initialization: {0}")]
    Init(#[from] crate::dynamics::InitError),
    #[error("RAS configuration: {0}")]
    Ras(#[from] crate::ras::RasError),
    #[error("simulation: {0}")]
    Sim(#[from] crate::dynamics::SimError),
    #[error("measurements: {0}")]
    Validation(#[from] crate::validation::ValidationError),
    #[error("stage comparison: {0}")]
    Stage(#[from] crate::powerflow::StageError),
}

#[derive(Debug, Clone)]
pub struct EventOutcome {
    pub report: ValidationReport,
    pub alignment: Alignment,
    pub result: SimulationResult,
    pub reserve: Option<ReserveAdjustment>,
}

/// Display names of the buses at either end of the corridor.
pub fn boundary_bus_names(case: &NetworkCase) -> Vec<String> {
    let Some(tag) = &case.equivalent else {
        return Vec::new();
    };
    let mut out = BTreeSet::new();
    for id in tag.boundary.element_ids() {
        if let Some(b) = case.find_branch(id) {
            out.insert(case.bus_name(b.from_bus).to_string());
            out.insert(case.bus_name(b.to_bus).to_string());
        }
    }
    out.into_iter().collect()
}

pub fn validate_event(
    case: &NetworkCase,
    dynamics: &[MachineDynamics],
    events: &EventSequence,
    ras: &RasConfig,
    measurements: &MeasurementSet,
    opts: &EventValidation,
) -> Result<EventOutcome, PipelineError> {
    let mut warnings = Vec::new();
    let pf = solve_powerflow(case, &PowerFlowOptions::<f64>::default())
        .map_err(|e| PipelineError::PowerFlow(e.to_string()))?;
    if !pf.converged {
        return Err(PipelineError::PowerFlow(format!(
            "no convergence after {} iterations",
            pf.iterations
        )));
    }
    let (dynamics, reserve) = match opts.reserve_target {
        Some(target) => {
            let adj = adjust_governors_for_reserve(
                dynamics,
                &UnitDispatch::from_solution(case, &pf),
                target,
            )?;
            if let Some(s) = adj.shortfall {
                warnings.push(format!(
                    "responsive headroom {:.3} MW is below the {target} MW target (shortfall {s:.3} MW); governors unchanged",
                    adj.headroom_before
                ));
            }
            (adj.machines.clone(), Some(adj))
        }
        None => (dynamics.to_vec(), None),
    };
    let state = init_dynamics(case, &pf, &dynamics)?;
    let result = simulate(&state, events, ras.instantiate(case)?, &opts.sim)?;

    let duration = result.duration;
    let t_event = events.first_time().unwrap_or(0.0).min(duration);
    let pre = opts
        .pre_window
        .unwrap_or((0.0, (t_event - opts.sim.dt).max(0.0)));
    let during = opts
        .during_window
        .unwrap_or((t_event, (t_event + 20.0).min(duration)));
    let post = opts
        .post_window
        .unwrap_or(((duration - 10.0).max(t_event), duration));

    let alignment = align(measurements, &result, opts.t0_offset)?;
    // keep defaulted windows inside each pair's span
    let clip = |w: (f64, f64), span: (f64, f64)| (w.0.max(span.0), w.1.min(span.1));
    let mut metrics = Vec::new();
    for p in &alignment.pairs {
        let span = p.span();
        let windows = Windows {
            during: if opts.during_window.is_some() { during } else { clip(during, span) },
            post: if opts.post_window.is_some() { post } else { clip(post, span) },
        };
        metrics.extend(compute_metrics(std::slice::from_ref(p), &windows)?);
    }

    let shift = |w: (f64, f64)| (w.0 + opts.t0_offset, w.1 + opts.t0_offset);
    let mut stages: Vec<StageComparison> = Vec::new();
    if measurements.signals.is_empty() {
        warnings.push("measurement set is empty; only the stage section is reported".into());
    } else {
        stages.push(compare_stage(case, &pf, measurements, Stage::PreEvent, shift(pre))?);
        for (stage, w) in [(Stage::DuringEvent, during), (Stage::PostEvent, post)] {
            let model = SimulatedWindow {
                result: &result,
                window: w,
            };
            stages.push(compare_stage_with(&model, measurements, stage, shift(w))?);
        }
    }

    let grades: Vec<GradedChannel> = metrics
        .iter()
        .map(|m| GradedChannel {
            signal: m.signal.clone(),
            channel: m.channel.clone(),
            grade: grade(m, &opts.grades),
        })
        .collect();
    let simulated_ras: Vec<String> = result
        .ras_log
        .iter()
        .map(|r| r.ras_id.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let boundary = boundary_bus_names(case);
    let diagnostics = diagnose(&DiagnosisInputs {
        stages: &stages,
        metrics: &metrics,
        measured_ras: &measurements.ras_operations,
        simulated_ras: &simulated_ras,
        boundary_buses: &boundary,
        thresholds: &opts.diagnosis,
    });
    if alignment.pairs.is_empty() {
        warnings.push("no channel could be compared".into());
    }
    warnings.extend(result.warnings.iter().cloned());

    let mut settings = BTreeMap::new();
    settings.insert("dt_s".into(), opts.sim.dt.to_string());
    settings.insert("duration_s".into(), opts.sim.duration.to_string());
    settings.insert("integrator".into(), format!("{:?}", opts.sim.integrator).to_lowercase());
    settings.insert("f_nominal_hz".into(), opts.sim.f_nominal.to_string());
    settings.insert("t0_offset_s".into(), opts.t0_offset.to_string());
    settings.insert(
        "reserve_target_mw".into(),
        opts.reserve_target.map(|r| r.to_string()).unwrap_or_else(|| "none".into()),
    );
    settings.insert("pre_window_s".into(), format!("{} .. {}", pre.0, pre.1));
    settings.insert("during_window_s".into(), format!("{} .. {}", during.0, during.1));
    settings.insert("post_window_s".into(), format!("{} .. {}", post.0, post.1));
    settings.insert(
        "grade_thresholds".into(),
        serde_json::to_string(&opts.grades).unwrap_or_default(),
    );
    settings.insert(
        "diagnosis_thresholds".into(),
        serde_json::to_string(&opts.diagnosis).unwrap_or_default(),
    );
    settings.insert(
        "equivalent".into(),
        case.equivalent
            .as_ref()
            .map(|t| t.kind.clone())
            .unwrap_or_else(|| "none".into()),
    );

    let report = ValidationReport {
        provenance: Provenance {
            case: opts.case_id.clone(),
            event: opts.event_id.clone(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            settings,
        },
        stages,
        metrics,
        grades,
        diagnostics,
        missing: alignment.missing.clone(),
        warnings,
    };
    Ok(EventOutcome {
        report,
        alignment,
        result,
        reserve,
    })
}
