//! `gridseam` command-line entry point.
//!
//! Exit status: 0 on success, 1 on data or usage errors, 2 when a run is
//! flagged unstable or unresolved.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use gridseam_core::contingency::{
    parse_contingencies, run_batch, summarize, summary_table, write_batch, BatchOptions,
    ContingencyDef, RunStatus,
};
use gridseam_core::dynamics::{
    init_dynamics, simulate, write_channels_csv, write_measurement_csv, DynamicsData,
    EventSequence, Integrator, MachineDynamics, SimOptions, SimulationResult,
};
use gridseam_core::merge::{
    merge_cases, swap_equivalent_named, BoundarySpec, EquivalentLibrary,
};
use gridseam_core::pipeline::{validate_event, EventValidation};
use gridseam_core::powerflow::{write_solution, PowerFlowOptions};
use gridseam_core::ras::RasConfig;
use gridseam_core::validation::{emit_report, import_measurements, MappingDoc, Source};
use gridseam_core::{load_case, serialize_case, solve_powerflow, validate_case, NetworkCase};

const EXIT_DATA: u8 = 1;
const EXIT_FLAGGED: u8 = 2;

#[derive(Parser, Debug)]
#[command(name = "gridseam", version, about = "Transient-stability and model-validation studies for interconnected grids")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Validate a case document and list every violation.
    Check {
        /// Case document (JSON).
        #[arg(long)]
        case: PathBuf,
    },
    /// Solve the AC power flow and write bus and branch CSVs.
    Powerflow {
        #[command(flatten)]
        case: CaseArgs,
        #[command(flatten)]
        pf: PfArgs,
        /// Output directory for buses.csv and branches.csv; summary only when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Merge an external equivalent into a host case, or swap the
    /// equivalent of an already merged case.
    Merge {
        /// Host case, or a merged case when only --equivalent is given.
        #[arg(long)]
        case: PathBuf,
        /// External case document to merge in.
        #[arg(long, conflicts_with = "equivalent")]
        external: Option<PathBuf>,
        /// Library entry (smtl, detailed, ...) or a path to a case document.
        #[arg(long)]
        equivalent: Option<String>,
        /// Equivalent library directory [default: <case dir>/equivalents].
        #[arg(long)]
        library: Option<PathBuf>,
        /// Corridor definition; required unless swapping.
        #[arg(long)]
        boundary: Option<PathBuf>,
        /// Merged case document to write.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one event sequence.
    Simulate {
        #[command(flatten)]
        case: CaseArgs,
        /// Machine dynamics document.
        #[arg(long = "dyn")]
        dyn_file: PathBuf,
        /// Event sequence document.
        #[arg(long)]
        events: PathBuf,
        /// RAS configuration document.
        #[arg(long)]
        ras: Option<PathBuf>,
        #[command(flatten)]
        sim: SimArgs,
        /// Also export channels as a measurement file plus identity mapping
        /// (`all` or a comma-separated channel list).
        #[arg(long)]
        measurement_channels: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a contingency suite.
    Batch {
        #[command(flatten)]
        case: CaseArgs,
        #[arg(long = "dyn")]
        dyn_file: PathBuf,
        #[arg(long)]
        contingencies: PathBuf,
        #[arg(long)]
        ras: Option<PathBuf>,
        #[command(flatten)]
        sim: SimArgs,
        /// Worker threads.
        #[arg(long, env = "GRIDSEAM_JOBS", default_value_t = 1)]
        jobs: usize,
        /// Branch ids whose peak loading is reported [default: every rated branch].
        #[arg(long, value_delimiter = ',')]
        monitor: Vec<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Replay a measured event: solve, adjust reserve, simulate, compare,
    /// grade, diagnose and report.
    ValidateEvent {
        #[command(flatten)]
        case: CaseArgs,
        #[arg(long = "dyn")]
        dyn_file: PathBuf,
        #[arg(long)]
        events: PathBuf,
        #[arg(long)]
        ras: Option<PathBuf>,
        /// Measurement CSV (`time_s,signal,value`).
        #[arg(long)]
        measurements: PathBuf,
        /// Signal-to-channel mapping document.
        #[arg(long)]
        mapping: PathBuf,
        #[command(flatten)]
        sim: SimArgs,
        /// Measurement time minus simulation time, s.
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        t0_offset: f64,
        /// Responsive reserve to impose on the governors, MW.
        #[arg(long)]
        reserve: Option<f64>,
        /// Pre-event window in simulation time, `start,end` s.
        #[arg(long, value_parser = parse_window)]
        pre_window: Option<(f64, f64)>,
        /// During-event window, `start,end` s [default: t_event .. t_event+20].
        #[arg(long, value_parser = parse_window)]
        during_window: Option<(f64, f64)>,
        /// Post-event window, `start,end` s [default: duration-10 .. duration].
        #[arg(long, value_parser = parse_window)]
        post_window: Option<(f64, f64)>,
        /// Case identifier for the report [default: case file stem].
        #[arg(long)]
        case_id: Option<String>,
        /// Event identifier for the report [default: events file stem].
        #[arg(long)]
        event_id: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args, Debug)]
struct CaseArgs {
    /// Case document (JSON).
    #[arg(long)]
    case: PathBuf,
    /// Swap the external equivalent of a merged case before running: a
    /// library entry name or a path to a case document.
    #[arg(long)]
    equivalent: Option<String>,
    /// Equivalent library directory [default: <case dir>/equivalents].
    #[arg(long)]
    library: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PfArgs {
    /// Mismatch tolerance, pu.
    #[arg(long, default_value_t = 1e-8)]
    tolerance: f64,
    #[arg(long, default_value_t = 20)]
    max_iterations: usize,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum IntegratorArg {
    Rk4,
    Trapezoidal,
}

#[derive(Args, Debug)]
struct SimArgs {
    /// Integration step, s [default: 1/240].
    #[arg(long)]
    dt: Option<f64>,
    /// Horizon, s [default: 10 for simulate and validate-event, 20 for batch].
    #[arg(long)]
    duration: Option<f64>,
    #[arg(long, value_enum, default_value_t = IntegratorArg::Rk4)]
    integrator: IntegratorArg,
    /// Record every n-th step [default: 1, batch 4].
    #[arg(long)]
    stride: Option<usize>,
    /// Nominal frequency, Hz.
    #[arg(long, default_value_t = 60.0)]
    f_nominal: f64,
}

impl SimArgs {
    fn options(&self, base: SimOptions) -> Result<SimOptions> {
        let o = SimOptions {
            dt: self.dt.unwrap_or(base.dt),
            duration: self.duration.unwrap_or(base.duration),
            integrator: match self.integrator {
                IntegratorArg::Rk4 => Integrator::Rk4,
                IntegratorArg::Trapezoidal => Integrator::Trapezoidal,
            },
            f_nominal: self.f_nominal,
            record_stride: self.stride.unwrap_or(base.record_stride),
        };
        if !(o.dt > 0.0) {
            bail!("option --dt must be positive (got {})", o.dt);
        }
        if !(o.duration > 0.0) {
            bail!("option --duration must be positive (got {})", o.duration);
        }
        if o.record_stride == 0 {
            bail!("option --stride must be at least 1");
        }
        Ok(o)
    }
}

fn parse_window(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("window '{s}' must be 'start,end'"))?;
    let a: f64 = a.trim().parse().map_err(|_| format!("bad window start '{a}'"))?;
    let b: f64 = b.trim().parse().map_err(|_| format!("bad window end '{b}'"))?;
    if b < a {
        return Err(format!("window '{s}' ends before it starts"));
    }
    Ok((a, b))
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn read_case(path: &Path) -> Result<NetworkCase> {
    load_case(&read(path)?).with_context(|| format!("loading case {}", path.display()))
}

fn library_dir(case: &Path, library: &Option<PathBuf>) -> PathBuf {
    library.clone().unwrap_or_else(|| {
        case.parent()
            .unwrap_or_else(|| Path::new("."))
            .join("equivalents")
    })
}

/// Resolves `--equivalent` to a (name, case) pair: an existing file path is
/// loaded directly, anything else is looked up in the library.
fn resolve_equivalent(
    spec: &str,
    case_path: &Path,
    library: &Option<PathBuf>,
) -> Result<(String, EquivalentLibrary)> {
    let as_path = Path::new(spec);
    if as_path.is_file() {
        let name = as_path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or(spec)
            .to_string();
        let mut lib = EquivalentLibrary::new();
        lib.insert(name.clone(), read_case(as_path)?);
        return Ok((name, lib));
    }
    let dir = library_dir(case_path, library);
    let lib = EquivalentLibrary::load_dir(&dir)
        .with_context(|| format!("option --equivalent {spec}: library {}", dir.display()))?;
    if lib.get(spec).is_none() {
        let names: Vec<&str> = lib.names().collect();
        bail!(
            "option --equivalent: no entry '{spec}' in {} (available: {})",
            dir.display(),
            names.join(", ")
        );
    }
    Ok((spec.to_string(), lib))
}

fn load_study_case(args: &CaseArgs) -> Result<NetworkCase> {
    let case = read_case(&args.case)?;
    let Some(spec) = &args.equivalent else {
        return Ok(case);
    };
    let (name, lib) = resolve_equivalent(spec, &args.case, &args.library)?;
    swap_equivalent_named(&case, &name, &lib).with_context(|| {
        format!(
            "swapping equivalent '{name}' into {}",
            args.case.display()
        )
    })
}

fn check_valid(case: &NetworkCase, path: &Path) -> Result<()> {
    let v = validate_case(case);
    if v.is_empty() {
        return Ok(());
    }
    let lines: Vec<String> = v.iter().map(|x| format!("  {x}")).collect();
    bail!("{} is invalid:\n{}", path.display(), lines.join("\n"))
}

fn read_dynamics(path: &Path) -> Result<Vec<MachineDynamics>> {
    DynamicsData::from_json(&read(path)?)
        .map(|d| d.machines)
        .map_err(|e| anyhow!("dynamics file {}: {e}", path.display()))
}

fn read_events(path: &Path) -> Result<EventSequence> {
    EventSequence::from_json(&read(path)?)
        .map_err(|e| anyhow!("event file {}: {e}", path.display()))
}

fn read_ras(path: &Option<PathBuf>) -> Result<RasConfig> {
    match path {
        None => Ok(RasConfig::default()),
        Some(p) => RasConfig::from_json(&read(p)?)
            .with_context(|| format!("RAS file {}", p.display())),
    }
}

fn canonical(p: &Path) -> Option<PathBuf> {
    fs::canonicalize(p).ok()
}

/// Rejects an output location that coincides with an input file or with
/// the directory holding one.
fn check_out(out: &Path, inputs: &[&Path]) -> Result<()> {
    let Some(o) = canonical(out) else {
        return Ok(());
    };
    for i in inputs {
        let Some(c) = canonical(i) else { continue };
        if c == o || c.parent() == Some(o.as_path()) {
            bail!(
                "option --out {} must be distinct from input {}",
                out.display(),
                i.display()
            );
        }
    }
    Ok(())
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn cmd_check(case: &Path) -> Result<u8> {
    let c = read_case(case)?;
    let v = validate_case(&c);
    if v.is_empty() {
        println!(
            "{}: ok ({} buses, {} branches, {} transformers, {} machines, {} loads, {} areas)",
            case.display(),
            c.buses.len(),
            c.branches.len(),
            c.transformers.len(),
            c.machines.len(),
            c.loads.len(),
            c.areas.len()
        );
        return Ok(0);
    }
    for x in &v {
        eprintln!("{}: {x}", case.display());
    }
    Ok(EXIT_DATA)
}

fn cmd_powerflow(args: &CaseArgs, pf: &PfArgs, out: &Option<PathBuf>) -> Result<u8> {
    let case = load_study_case(args)?;
    check_valid(&case, &args.case)?;
    if let Some(o) = out {
        check_out(o, &[&args.case])?;
    }
    let opts = PowerFlowOptions::<f64> {
        tolerance: pf.tolerance,
        max_iterations: pf.max_iterations,
        ..PowerFlowOptions::default()
    };
    let sol = solve_powerflow(&case, &opts)
        .with_context(|| format!("power flow on {}", args.case.display()))?;
    println!(
        "converged: {}  iterations: {}  max mismatch: {:e} pu",
        sol.converged, sol.iterations, sol.max_mismatch
    );
    for s in &sol.slack {
        println!("slack {}: {:.3} MW {:.3} MVAr", s.bus, s.p_mw, s.q_mvar);
    }
    if let Some(o) = out {
        write_solution(&case, &sol, o).with_context(|| format!("writing {}", o.display()))?;
    }
    Ok(if sol.converged { 0 } else { EXIT_FLAGGED })
}

fn cmd_merge(
    case: &Path,
    external: &Option<PathBuf>,
    equivalent: &Option<String>,
    library: &Option<PathBuf>,
    boundary: &Option<PathBuf>,
    out: &Path,
) -> Result<u8> {
    let mut inputs: Vec<&Path> = vec![case];
    inputs.extend(external.as_deref());
    inputs.extend(boundary.as_deref());
    check_out(out, &inputs)?;
    let host = read_case(case)?;
    let merged = match (external, boundary) {
        (Some(ext), Some(b)) => {
            let ext_case = read_case(ext)?;
            let spec = BoundarySpec::from_json(&read(b)?)
                .with_context(|| format!("boundary file {}", b.display()))?;
            merge_cases(&host, &ext_case, &spec).with_context(|| {
                format!("merging {} into {}", ext.display(), case.display())
            })?
        }
        (Some(_), None) => bail!("option --boundary is required with --external"),
        (None, b) => {
            let Some(spec) = equivalent else {
                bail!("give --external with --boundary, or --equivalent");
            };
            let (name, lib) = resolve_equivalent(spec, case, library)?;
            match b {
                Some(b) => {
                    let ext = lib.get(&name).cloned().unwrap_or_else(|| unreachable!());
                    let bspec = BoundarySpec::from_json(&read(b)?)
                        .with_context(|| format!("boundary file {}", b.display()))?;
                    let mut m = merge_cases(&host, &ext, &bspec).with_context(|| {
                        format!("merging '{name}' into {}", case.display())
                    })?;
                    if let Some(tag) = m.equivalent.as_mut() {
                        tag.kind = name.clone();
                    }
                    m
                }
                None => swap_equivalent_named(&host, &name, &lib).with_context(|| {
                    format!("swapping '{name}' into {}", case.display())
                })?,
            }
        }
    };
    write_text(out, &serialize_case(&merged))?;
    println!(
        "{}: {} buses, {} branches, {} transformers",
        out.display(),
        merged.buses.len(),
        merged.branches.len(),
        merged.transformers.len()
    );
    Ok(0)
}

fn parse_channel_list(spec: &str, result: &SimulationResult) -> Result<Option<Vec<String>>> {
    if spec == "all" {
        return Ok(None);
    }
    let list: Vec<String> = spec
        .split(',')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect();
    for c in &list {
        if result.channel(c).is_none() {
            bail!("option --measurement-channels: unknown channel '{c}'");
        }
    }
    Ok(Some(list))
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    args: &CaseArgs,
    dyn_file: &Path,
    events: &Path,
    ras: &Option<PathBuf>,
    sim: &SimArgs,
    measurement_channels: &Option<String>,
    out: &Path,
) -> Result<u8> {
    let mut inputs: Vec<&Path> = vec![&args.case, dyn_file, events];
    inputs.extend(ras.as_deref());
    check_out(out, &inputs)?;
    let case = load_study_case(args)?;
    check_valid(&case, &args.case)?;
    let dynamics = read_dynamics(dyn_file)?;
    let seq = read_events(events)?;
    let ras_cfg = read_ras(ras)?;
    let opts = sim.options(SimOptions::default())?;

    let pf = solve_powerflow(&case, &PowerFlowOptions::<f64>::default())
        .with_context(|| format!("power flow on {}", args.case.display()))?;
    if !pf.converged {
        bail!(
            "power flow on {} did not converge ({} iterations)",
            args.case.display(),
            pf.iterations
        );
    }
    let state = init_dynamics(&case, &pf, &dynamics)
        .with_context(|| format!("initializing from {}", dyn_file.display()))?;
    for e in seq.events() {
        e.action
            .resolve(&case)
            .map_err(|m| anyhow!("event file {}: t={}: {m}", events.display(), e.t))?;
    }
    let instances = ras_cfg
        .instantiate(&case)
        .with_context(|| format!("RAS file {}", ras.as_deref().unwrap_or(Path::new("-")).display()))?;
    let result = simulate(&state, &seq, instances, &opts)
        .with_context(|| format!("simulating {}", events.display()))?;

    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let mut buf = Vec::new();
    write_channels_csv(&result, &mut buf)?;
    fs::write(out.join("channels.csv"), buf)
        .with_context(|| format!("writing {}", out.join("channels.csv").display()))?;

    let def = ContingencyDef {
        id: events
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("run")
            .to_string(),
        label: String::new(),
        events: seq.clone(),
        overrides: None,
    };
    let batch_opts = BatchOptions {
        sim: opts.clone(),
        ..BatchOptions::default()
    };
    let summary = summarize(&case, &def, &result, &batch_opts);
    write_text(
        &out.join("summary.json"),
        &(serde_json::to_string_pretty(&summary)? + "\n"),
    )?;
    write_text(&out.join("ras_log.csv"), &ras_log_csv(&result))?;
    write_text(&out.join("events.csv"), &event_log_csv(&result))?;

    if let Some(spec) = measurement_channels {
        let only = parse_channel_list(spec, &result)?;
        let mut buf = Vec::new();
        write_measurement_csv(&result, only.as_deref(), &mut buf)?;
        fs::write(out.join("measurements.csv"), buf)?;
        let names: Vec<String> = match &only {
            Some(l) => l.clone(),
            None => result.channels.keys().cloned().collect(),
        };
        let mut ras_ops: Vec<String> = result.ras_log.iter().map(|r| r.ras_id.clone()).collect();
        ras_ops.sort();
        ras_ops.dedup();
        let mapping = MappingDoc {
            source: Source::Pmu,
            mapping: names.iter().map(|n| (n.clone(), n.clone())).collect(),
            units: Default::default(),
            ras_operations: ras_ops,
        };
        write_text(
            &out.join("mapping.json"),
            &(serde_json::to_string_pretty(&mapping)? + "\n"),
        )?;
    }
    for w in &result.warnings {
        eprintln!("warning: {w}");
    }
    println!(
        "{}: {} samples, {} channels, {} RAS actions, status {}",
        out.display(),
        result.len(),
        result.channels.len(),
        result.ras_log.len(),
        summary.status
    );
    Ok(if summary.status == RunStatus::Stable { 0 } else { EXIT_FLAGGED })
}

fn ras_log_csv(r: &SimulationResult) -> String {
    let mut s = String::from("t_s,detected_at_s,ras_id,action,reason\n");
    for e in &r.ras_log {
        s.push_str(&format!(
            "{},{},{},{},\"{}\"\n",
            e.t,
            e.detected_at,
            e.ras_id,
            e.action,
            e.reason.replace('"', "'")
        ));
    }
    s
}

fn event_log_csv(r: &SimulationResult) -> String {
    let mut s = String::from("t_s,source,action,skipped\n");
    for e in &r.event_log {
        s.push_str(&format!(
            "{},{},{},\"{}\"\n",
            e.t,
            e.source,
            e.action,
            e.skipped.as_deref().unwrap_or("").replace('"', "'")
        ));
    }
    s
}

#[allow(clippy::too_many_arguments)]
fn cmd_batch(
    args: &CaseArgs,
    dyn_file: &Path,
    contingencies: &Path,
    ras: &Option<PathBuf>,
    sim: &SimArgs,
    jobs: usize,
    monitor: &[String],
    out: &Path,
) -> Result<u8> {
    if jobs == 0 {
        bail!("option --jobs must be at least 1");
    }
    let mut inputs: Vec<&Path> = vec![&args.case, dyn_file, contingencies];
    inputs.extend(ras.as_deref());
    check_out(out, &inputs)?;
    let case = load_study_case(args)?;
    check_valid(&case, &args.case)?;
    let dynamics = read_dynamics(dyn_file)?;
    let defs = parse_contingencies(&read(contingencies)?)
        .with_context(|| format!("contingency file {}", contingencies.display()))?;
    let ras_cfg = read_ras(ras)?;
    for m in monitor {
        if case.find_branch(m).is_none() {
            bail!("option --monitor: unknown branch '{m}'");
        }
    }
    let base = BatchOptions::default();
    let opts = BatchOptions {
        sim: sim.options(base.sim.clone())?,
        jobs,
        monitored: monitor.to_vec(),
        ..base
    };
    let batch = run_batch(&case, &dynamics, &defs, &ras_cfg, &opts)
        .with_context(|| format!("batch over {}", contingencies.display()))?;
    write_batch(&batch, out).with_context(|| format!("writing {}", out.display()))?;
    print!("{}", summary_table(batch.summaries()));
    Ok(if batch.any_flagged() { EXIT_FLAGGED } else { 0 })
}

fn stem(p: &Path) -> String {
    p.file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or_default()
        .to_string()
}

fn run(cli: Cli) -> Result<u8> {
    match &cli.command {
        Command::Check { case } => cmd_check(case),
        Command::Powerflow { case, pf, out } => cmd_powerflow(case, pf, out),
        Command::Merge {
            case,
            external,
            equivalent,
            library,
            boundary,
            out,
        } => cmd_merge(case, external, equivalent, library, boundary, out),
        Command::Simulate {
            case,
            dyn_file,
            events,
            ras,
            sim,
            measurement_channels,
            out,
        } => cmd_simulate(case, dyn_file, events, ras, sim, measurement_channels, out),
        Command::Batch {
            case,
            dyn_file,
            contingencies,
            ras,
            sim,
            jobs,
            monitor,
            out,
        } => cmd_batch(case, dyn_file, contingencies, ras, sim, *jobs, monitor, out),
        Command::ValidateEvent {
            case,
            dyn_file,
            events,
            ras,
            measurements,
            mapping,
            sim,
            t0_offset,
            reserve,
            pre_window,
            during_window,
            post_window,
            case_id,
            event_id,
            out,
        } => {
            let mut inputs: Vec<&Path> = vec![&case.case, dyn_file, events, measurements, mapping];
            inputs.extend(ras.as_deref());
            check_out(out, &inputs)?;
            let study = load_study_case(case)?;
            check_valid(&study, &case.case)?;
            let dynamics = read_dynamics(dyn_file)?;
            let seq = read_events(events)?;
            let ras_cfg = read_ras(ras)?;
            let meas = import_measurements(&read(measurements)?, &read(mapping)?).with_context(
                || {
                    format!(
                        "measurements {} with mapping {}",
                        measurements.display(),
                        mapping.display()
                    )
                },
            )?;
            let opts = EventValidation {
                sim: sim.options(SimOptions::default())?,
                t0_offset: *t0_offset,
                reserve_target: *reserve,
                pre_window: *pre_window,
                during_window: *during_window,
                post_window: *post_window,
                case_id: case_id.clone().unwrap_or_else(|| stem(&case.case)),
                event_id: event_id.clone().unwrap_or_else(|| stem(events)),
                ..EventValidation::default()
            };
            let outcome = validate_event(&study, &dynamics, &seq, &ras_cfg, &meas, &opts)
                .with_context(|| format!("validating {}", events.display()))?;
            emit_report(&outcome.report, &outcome.alignment.pairs, out)
                .with_context(|| format!("writing report to {}", out.display()))?;
            let worst = outcome
                .report
                .worst_grade()
                .map(|g| g.to_string())
                .unwrap_or_else(|| "-".into());
            println!(
                "{}: {} channels graded, worst grade {worst}, {} diagnostics",
                out.display(),
                outcome.report.grades.len(),
                outcome.report.diagnostics.len()
            );
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_DATA } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_DATA)
        }
    }
}
