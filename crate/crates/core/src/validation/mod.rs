//! Measurement import, alignment against a simulation, comparison metrics,
//! grading, mismatch diagnosis and report output.

mod diagnose;
mod grade;
mod report;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use diagnose::{diagnose, Diagnostic, DiagnosisInputs, DiagnosisThresholds};
pub use grade::{grade, ChannelClass, Grade, GradeLimits, GradeThresholds};
pub use report::{channel_file, emit_report, render_text, GradedChannel, Provenance, ValidationReport};

use crate::dynamics::SimulationResult;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Series {
    pub t: Vec<f64>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Source {
    #[default]
    Pmu,
    Scada,
}

/// Mapping document: signal id → model channel, plus metadata.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MappingDoc {
    #[serde(default)]
    pub source: Source,
    pub mapping: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub units: BTreeMap<String, String>,
    /// Ids of RAS or relays observed operating in the measured event.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ras_operations: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct MeasurementSet {
    pub signals: BTreeMap<String, Series>,
    pub source: Source,
    pub units: BTreeMap<String, String>,
    pub mapping: BTreeMap<String, String>,
    /// Signals present in the data without a mapping entry.
    pub unmapped: Vec<String>,
    pub ras_operations: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ValidationError {
    #[error("measurement CSV header must be 'time_s,signal,value' (got '{0}')")]
    Header(String),
    #[error("measurement CSV line {line}: {message}")]
    Row { line: u64, message: String },
    #[error("measurement CSV line {line}: duplicate timestamp {t} for signal '{signal}'")]
    DuplicateTimestamp { line: u64, signal: String, t: f64 },
    #[error("mapping document: {0}")]
    Mapping(String),
    #[error("no overlap between measurements and simulation (offset {offset} s)")]
    EmptyOverlap { offset: f64 },
    #[error("overlap of {span} s is shorter than the required 1 s")]
    ShortOverlap { span: f64 },
    #[error("{which} window [{start}, {end}] s lies outside the aligned overlap [{lo}, {hi}] s for '{channel}'")]
    WindowOutsideOverlap {
        which: &'static str,
        start: f64,
        end: f64,
        lo: f64,
        hi: f64,
        channel: String,
    },
}

/// Reads `time_s,signal,value` rows and a mapping document.
pub fn import_measurements(csv_doc: &str, mapping_doc: &str) -> Result<MeasurementSet, ValidationError> {
    let mapping: MappingDoc =
        serde_json::from_str(mapping_doc).map_err(|e| ValidationError::Mapping(e.to_string()))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(csv_doc.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| ValidationError::Header(e.to_string()))?
        .clone();
    if header.iter().collect::<Vec<_>>() != ["time_s", "signal", "value"] {
        return Err(ValidationError::Header(header.iter().collect::<Vec<_>>().join(",")));
    }
    let mut rows: BTreeMap<String, Vec<(f64, f64, u64)>> = BTreeMap::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| ValidationError::Row {
            line: e.position().map(|p| p.line()).unwrap_or(0),
            message: e.to_string(),
        })?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let bad = |message: String| ValidationError::Row { line, message };
        if rec.len() != 3 {
            return Err(bad(format!("expected 3 fields, got {}", rec.len())));
        }
        let t: f64 = rec[0].parse().map_err(|_| bad(format!("bad time '{}'", &rec[0])))?;
        let v: f64 = rec[2].parse().map_err(|_| bad(format!("bad value '{}'", &rec[2])))?;
        if !t.is_finite() {
            return Err(bad(format!("time '{}' is not finite", &rec[0])));
        }
        if rec[1].is_empty() {
            return Err(bad("empty signal id".into()));
        }
        rows.entry(rec[1].to_string()).or_default().push((t, v, line));
    }
    let mut signals = BTreeMap::new();
    for (signal, mut pts) in rows {
        pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.2.cmp(&b.2)));
        for w in pts.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(ValidationError::DuplicateTimestamp {
                    line: w[1].2,
                    signal,
                    t: w[1].0,
                });
            }
        }
        signals.insert(
            signal,
            Series {
                t: pts.iter().map(|p| p.0).collect(),
                values: pts.iter().map(|p| p.1).collect(),
            },
        );
    }
    let unmapped = signals
        .keys()
        .filter(|s| !mapping.mapping.contains_key(*s))
        .cloned()
        .collect();
    Ok(MeasurementSet {
        signals,
        source: mapping.source,
        units: mapping.units,
        mapping: mapping.mapping,
        unmapped,
        ras_operations: mapping.ras_operations,
    })
}

/// Linear interpolation on a strictly increasing grid; `None` outside it.
/// Grid nodes return their stored value exactly.
pub fn interpolate(t: &[f64], v: &[f64], at: f64) -> Option<f64> {
    let n = t.len();
    if n == 0 || at < t[0] || at > t[n - 1] {
        return None;
    }
    match t.binary_search_by(|x| x.total_cmp(&at)) {
        Ok(i) => Some(v[i]),
        Err(i) => {
            let (t0, t1, v0, v1) = (t[i - 1], t[i], v[i - 1], v[i]);
            Some(v0 + (v1 - v0) * (at - t0) / (t1 - t0))
        }
    }
}

/// Mean of the samples with `t` inside `[start, end]`.
pub fn time_average(t: &[f64], v: &[f64], window: (f64, f64)) -> Option<f64> {
    let (sum, n) = t
        .iter()
        .zip(v)
        .filter(|(t, _)| **t >= window.0 && **t <= window.1)
        .fold((0.0, 0usize), |(s, n), (_, v)| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlignedPair {
    pub signal: String,
    pub channel: String,
    /// Simulation time grid inside the overlap.
    pub t: Vec<f64>,
    pub measured: Vec<f64>,
    pub simulated: Vec<f64>,
}

impl AlignedPair {
    pub fn span(&self) -> (f64, f64) {
        (self.t[0], self.t[self.t.len() - 1])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Alignment {
    pub offset: f64,
    pub pairs: Vec<AlignedPair>,
    /// Signals left out: unmapped, or mapped to a channel the run lacks.
    pub missing: Vec<String>,
}

/// Resamples each mapped measurement onto the simulation grid over the
/// common span. Measurement time `t` maps to simulation time `t - offset`.
pub fn align(
    measurements: &MeasurementSet,
    result: &SimulationResult,
    t0_offset: f64,
) -> Result<Alignment, ValidationError> {
    let mut pairs = Vec::new();
    let mut missing = Vec::new();
    let mut any_overlap = false;
    let mut longest: f64 = 0.0;
    for (signal, series) in &measurements.signals {
        let Some(channel) = measurements.mapping.get(signal) else {
            missing.push(signal.clone());
            continue;
        };
        let Some(sim) = result.channel(channel) else {
            missing.push(signal.clone());
            continue;
        };
        let mt: Vec<f64> = series.t.iter().map(|t| t - t0_offset).collect();
        let mut t = Vec::new();
        let mut measured = Vec::new();
        let mut simulated = Vec::new();
        for (k, &ts) in result.t.iter().enumerate() {
            if let Some(m) = interpolate(&mt, &series.values, ts) {
                t.push(ts);
                measured.push(m);
                simulated.push(sim[k]);
            }
        }
        if t.is_empty() {
            missing.push(signal.clone());
            continue;
        }
        any_overlap = true;
        longest = longest.max(t[t.len() - 1] - t[0]);
        pairs.push(AlignedPair {
            signal: signal.clone(),
            channel: channel.clone(),
            t,
            measured,
            simulated,
        });
    }
    if !any_overlap && !measurements.signals.is_empty() {
        return Err(ValidationError::EmptyOverlap { offset: t0_offset });
    }
    if any_overlap && longest < 1.0 - 1e-9 {
        return Err(ValidationError::ShortOverlap { span: longest });
    }
    Ok(Alignment {
        offset: t0_offset,
        pairs,
        missing,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Windows {
    pub during: (f64, f64),
    pub post: (f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtremumKind {
    Max,
    Min,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChannelMetrics {
    pub signal: String,
    pub channel: String,
    pub measured_max: f64,
    pub measured_max_t: f64,
    pub measured_min: f64,
    pub measured_min_t: f64,
    pub simulated_max: f64,
    pub simulated_max_t: f64,
    pub simulated_min: f64,
    pub simulated_min_t: f64,
    /// Which extremum dominates the excursion of both traces.
    pub primary: ExtremumKind,
    /// Signed simulated − measured value of the primary extremum.
    pub extremum_error: f64,
    /// Signed simulated − measured time of the primary extremum, s.
    pub extremum_time_error: f64,
    pub max_error: f64,
    pub min_error: f64,
    pub max_time_error: f64,
    pub min_time_error: f64,
    /// Mean simulated − measured over the post-event window.
    pub steady_state_offset: f64,
    /// Over the whole aligned overlap.
    pub rmse: f64,
}

fn extrema(t: &[f64], v: &[f64]) -> (f64, f64, f64, f64) {
    let (mut hi, mut hi_t, mut lo, mut lo_t) = (v[0], t[0], v[0], t[0]);
    for (&t, &v) in t.iter().zip(v) {
        if v > hi {
            hi = v;
            hi_t = t;
        }
        if v < lo {
            lo = v;
            lo_t = t;
        }
    }
    (hi, hi_t, lo, lo_t)
}

fn within(p: &AlignedPair, which: &'static str, w: (f64, f64)) -> Result<(usize, usize), ValidationError> {
    let (lo, hi) = p.span();
    let tol = 1e-9;
    if !(w.0 >= lo - tol && w.1 <= hi + tol && w.1 >= w.0) {
        return Err(ValidationError::WindowOutsideOverlap {
            which,
            start: w.0,
            end: w.1,
            lo,
            hi,
            channel: p.channel.clone(),
        });
    }
    let a = p.t.partition_point(|&t| t < w.0 - tol);
    let b = p.t.partition_point(|&t| t <= w.1 + tol);
    if a >= b {
        return Err(ValidationError::WindowOutsideOverlap {
            which,
            start: w.0,
            end: w.1,
            lo,
            hi,
            channel: p.channel.clone(),
        });
    }
    Ok((a, b))
}

pub fn channel_metrics(p: &AlignedPair, windows: &Windows) -> Result<ChannelMetrics, ValidationError> {
    let (a, b) = within(p, "during", windows.during)?;
    let (pa, pb) = within(p, "post", windows.post)?;
    let t = &p.t[a..b];
    let (m_hi, m_hi_t, m_lo, m_lo_t) = extrema(t, &p.measured[a..b]);
    let (s_hi, s_hi_t, s_lo, s_lo_t) = extrema(t, &p.simulated[a..b]);
    let (m0, s0) = (p.measured[a], p.simulated[a]);
    let up = (m_hi - m0) + (s_hi - s0);
    let down = (m0 - m_lo) + (s0 - s_lo);
    let primary = if up >= down {
        ExtremumKind::Max
    } else {
        ExtremumKind::Min
    };
    let (max_error, min_error) = (s_hi - m_hi, s_lo - m_lo);
    let (max_time_error, min_time_error) = (s_hi_t - m_hi_t, s_lo_t - m_lo_t);
    let (extremum_error, extremum_time_error) = match primary {
        ExtremumKind::Max => (max_error, max_time_error),
        ExtremumKind::Min => (min_error, min_time_error),
    };
    let post: Vec<f64> = (pa..pb).map(|k| p.simulated[k] - p.measured[k]).collect();
    let steady_state_offset = post.iter().sum::<f64>() / post.len() as f64;
    let sq: f64 = p
        .simulated
        .iter()
        .zip(&p.measured)
        .map(|(s, m)| (s - m) * (s - m))
        .sum();
    let rmse = (sq / p.t.len() as f64).sqrt();
    Ok(ChannelMetrics {
        signal: p.signal.clone(),
        channel: p.channel.clone(),
        measured_max: m_hi,
        measured_max_t: m_hi_t,
        measured_min: m_lo,
        measured_min_t: m_lo_t,
        simulated_max: s_hi,
        simulated_max_t: s_hi_t,
        simulated_min: s_lo,
        simulated_min_t: s_lo_t,
        primary,
        extremum_error,
        extremum_time_error,
        max_error,
        min_error,
        max_time_error,
        min_time_error,
        steady_state_offset,
        rmse,
    })
}

pub fn compute_metrics(pairs: &[AlignedPair], windows: &Windows) -> Result<Vec<ChannelMetrics>, ValidationError> {
    pairs.iter().map(|p| channel_metrics(p, windows)).collect()
}
