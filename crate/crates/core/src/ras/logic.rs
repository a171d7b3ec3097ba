//! Step-driven RAS state machines. Each `step` takes the step time and the
//! monitored quantities and reports what fired; binding those results to
//! grid actions lives in the parent module.

use serde::{Deserialize, Serialize};

/// Slack on time comparisons so timers fire on the intended grid step.
pub const TIME_EPS: f64 = 1e-9;

/// Condition timer: runs while the condition holds, resets when it drops,
/// fires once when the held time reaches `pickup`.
#[derive(Debug, Clone, PartialEq)]
pub struct PickupTimer {
    pub pickup: f64,
    start: Option<f64>,
    fired: bool,
}

impl PickupTimer {
    pub fn new(pickup: f64) -> Self {
        Self {
            pickup,
            start: None,
            fired: false,
        }
    }

    pub fn step(&mut self, t: f64, condition: bool) -> bool {
        if self.fired {
            return false;
        }
        if !condition {
            self.start = None;
            return false;
        }
        let start = *self.start.get_or_insert(t);
        if t - start >= self.pickup - TIME_EPS {
            self.fired = true;
            return true;
        }
        false
    }

    /// Time the current run of the condition began.
    pub fn running_since(&self) -> Option<f64> {
        self.start
    }

    pub fn fired(&self) -> bool {
        self.fired
    }
}

/// Corridor transfer trip: power above threshold while the monitored
/// voltage sits below its threshold, held for the pickup time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransferTripSettings {
    pub p_threshold: f64,
    pub v_threshold: f64,
    pub pickup_time: f64,
}

impl TransferTripSettings {
    pub fn check(&self) -> Result<(), String> {
        if !(self.p_threshold > 0.0) {
            return Err("p_threshold must be > 0".into());
        }
        if !(self.v_threshold > 0.0 && self.v_threshold < 1.2) {
            return Err("v_threshold must lie in (0, 1.2)".into());
        }
        if !(self.pickup_time >= 0.0) {
            return Err("pickup_time must be >= 0".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransferTripRas {
    pub settings: TransferTripSettings,
    pub armed: bool,
    timer: PickupTimer,
}

impl TransferTripRas {
    pub fn new(settings: TransferTripSettings, armed: bool) -> Self {
        let timer = PickupTimer::new(settings.pickup_time);
        Self {
            settings,
            armed,
            timer,
        }
    }

    /// Returns true on the step the trip is issued.
    pub fn step(&mut self, t: f64, p_corridor: f64, v_bus: f64) -> bool {
        let cond = p_corridor > self.settings.p_threshold && v_bus < self.settings.v_threshold;
        self.armed && self.timer.step(t, cond)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OscillationSettings {
    /// Peak-to-peak amplitude, MW.
    pub amplitude_threshold: f64,
    pub persist_time: f64,
    /// Sliding window length, s; at least two expected periods.
    pub window: f64,
    #[serde(default = "default_ratio")]
    pub undamped_ratio: f64,
}

fn default_ratio() -> f64 {
    0.98
}

impl OscillationSettings {
    pub fn check(&self) -> Result<(), String> {
        if !(self.amplitude_threshold > 0.0) {
            return Err("amplitude_threshold must be > 0".into());
        }
        if !(self.persist_time > 0.0) {
            return Err("persist_time must be > 0".into());
        }
        if !(self.window > 0.0) {
            return Err("window must be > 0".into());
        }
        Ok(())
    }

    /// Turning points must move this far back from a candidate extremum
    /// before it counts.
    pub fn hysteresis(&self) -> f64 {
        0.1 * self.amplitude_threshold
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extremum {
    pub t: f64,
    pub value: f64,
    pub is_max: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Trend {
    Unknown { lo: f64, hi: f64 },
    Rising,
    Falling,
}

/// Incremental turning-point extractor with hysteresis.
#[derive(Debug, Clone, PartialEq)]
pub struct TurningPoints {
    hysteresis: f64,
    trend: Option<Trend>,
    candidate: (f64, f64),
}

impl TurningPoints {
    pub fn new(hysteresis: f64) -> Self {
        Self {
            hysteresis,
            trend: None,
            candidate: (0.0, 0.0),
        }
    }

    /// Feeds one sample; returns an extremum when one is confirmed.
    pub fn push(&mut self, t: f64, p: f64) -> Option<Extremum> {
        let h = self.hysteresis;
        match self.trend {
            None => {
                self.trend = Some(Trend::Unknown { lo: p, hi: p });
                None
            }
            Some(Trend::Unknown { lo, hi }) => {
                if p >= lo + h && p > lo {
                    self.trend = Some(Trend::Rising);
                    self.candidate = (t, p);
                } else if p <= hi - h && p < hi {
                    self.trend = Some(Trend::Falling);
                    self.candidate = (t, p);
                } else {
                    self.trend = Some(Trend::Unknown {
                        lo: lo.min(p),
                        hi: hi.max(p),
                    });
                }
                None
            }
            Some(Trend::Rising) => {
                if p > self.candidate.1 {
                    self.candidate = (t, p);
                    None
                } else if p <= self.candidate.1 - h && p < self.candidate.1 {
                    let (te, pe) = self.candidate;
                    self.trend = Some(Trend::Falling);
                    self.candidate = (t, p);
                    Some(Extremum {
                        t: te,
                        value: pe,
                        is_max: true,
                    })
                } else {
                    None
                }
            }
            Some(Trend::Falling) => {
                if p < self.candidate.1 {
                    self.candidate = (t, p);
                    None
                } else if p >= self.candidate.1 + h && p > self.candidate.1 {
                    let (te, pe) = self.candidate;
                    self.trend = Some(Trend::Rising);
                    self.candidate = (t, p);
                    Some(Extremum {
                        t: te,
                        value: pe,
                        is_max: false,
                    })
                } else {
                    None
                }
            }
        }
    }
}

/// Undamped test over a list of consecutive extrema: the latest
/// peak-to-peak swing reaches the threshold and has not shrunk below
/// `ratio` of the swing one period earlier.
pub fn undamped(extrema: &[Extremum], threshold: f64, ratio: f64) -> bool {
    let n = extrema.len();
    if n < 4 {
        return false;
    }
    let pp = |k: usize| (extrema[k].value - extrema[k - 1].value).abs();
    let last = pp(n - 1);
    let earlier = pp(n - 3);
    last >= threshold && earlier > 0.0 && last / earlier >= ratio
}

#[derive(Debug, Clone, PartialEq)]
pub struct OscillationRas {
    pub settings: OscillationSettings,
    pub armed: bool,
    points: TurningPoints,
    extrema: Vec<Extremum>,
    timer: PickupTimer,
}

impl OscillationRas {
    pub fn new(settings: OscillationSettings, armed: bool) -> Self {
        Self {
            points: TurningPoints::new(settings.hysteresis()),
            timer: PickupTimer::new(settings.persist_time),
            extrema: Vec::new(),
            settings,
            armed,
        }
    }

    /// Whether the extrema currently inside the window look undamped.
    pub fn detected(&self) -> bool {
        undamped(
            &self.extrema,
            self.settings.amplitude_threshold,
            self.settings.undamped_ratio,
        )
    }

    pub fn step(&mut self, t: f64, p_corridor: f64) -> bool {
        let window = self.settings.window;
        if let Some(e) = self.points.push(t, p_corridor) {
            // the window trails the newest extremum, so a steady swing does
            // not lose its oldest point between confirmations
            let horizon = e.t - window;
            self.extrema.push(e);
            let stale = self.extrema.iter().take_while(|e| e.t < horizon).count();
            self.extrema.drain(..stale);
        }
        // nothing new for a whole window: the swing has died out
        if self.extrema.last().is_some_and(|e| t - e.t > window) {
            self.extrema.clear();
        }
        let detected = self.detected();
        self.armed && self.timer.step(t, detected)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OverloadSettings {
    /// Branch rating, MVA.
    pub rating: f64,
    pub overload_factor: f64,
    pub stage1_delay: f64,
    pub stage2_delay: f64,
}

impl OverloadSettings {
    pub fn check(&self) -> Result<(), String> {
        if !(self.rating > 0.0) {
            return Err("protected branch needs a rating > 0".into());
        }
        if !(self.overload_factor >= 1.0) {
            return Err("overload_factor must be >= 1".into());
        }
        if !(self.stage1_delay >= 0.0 && self.stage2_delay >= 0.0) {
            return Err("stage delays must be >= 0".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OverloadAction {
    /// Stage 1: shed the generation block.
    ShedGeneration,
    /// Stage 2: trip the tie.
    TripTie,
}

/// Two-stage overload scheme. An overload that clears in stage 0 restarts
/// the stage-1 timer; one that clears after stage 1 freezes the scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct OverloadShedRas {
    pub settings: OverloadSettings,
    pub armed: bool,
    stage: u8,
    frozen: bool,
    timer_start: Option<f64>,
}

impl OverloadShedRas {
    pub fn new(settings: OverloadSettings, armed: bool) -> Self {
        Self {
            settings,
            armed,
            stage: 0,
            frozen: false,
            timer_start: None,
        }
    }

    pub fn stage(&self) -> u8 {
        self.stage
    }

    pub fn frozen(&self) -> bool {
        self.frozen
    }

    pub fn step(&mut self, t: f64, s_branch: f64) -> Option<OverloadAction> {
        if !self.armed || self.frozen || self.stage == 2 {
            return None;
        }
        let over = s_branch.abs() > self.settings.rating * self.settings.overload_factor;
        match self.stage {
            0 => {
                if !over {
                    self.timer_start = None;
                    return None;
                }
                let start = *self.timer_start.get_or_insert(t);
                if t - start >= self.settings.stage1_delay - TIME_EPS {
                    self.stage = 1;
                    self.timer_start = Some(t);
                    return Some(OverloadAction::ShedGeneration);
                }
                None
            }
            _ => {
                let start = self.timer_start.expect("stage 1 timer set");
                if !over {
                    self.frozen = true;
                    return None;
                }
                if t - start >= self.settings.stage2_delay - TIME_EPS {
                    self.stage = 2;
                    return Some(OverloadAction::TripTie);
                }
                None
            }
        }
    }
}

/// Picks units largest first (ties by id) until `block` MW is covered.
/// Returns the chosen ids and the uncovered shortfall.
pub fn select_shed_units(units: &[(String, f64)], block: f64) -> (Vec<String>, f64) {
    let mut sorted: Vec<&(String, f64)> = units.iter().filter(|(_, p)| *p > 0.0).collect();
    sorted.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    let mut chosen = Vec::new();
    let mut covered = 0.0;
    for (id, p) in sorted {
        if covered >= block {
            break;
        }
        chosen.push(id.clone());
        covered += p;
    }
    (chosen, (block - covered).max(0.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DirectionalSettings {
    pub p_threshold: f64,
    pub pickup_time: f64,
}

/// Single-condition timer on signed interface power.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionalPowerRas {
    pub settings: DirectionalSettings,
    pub armed: bool,
    timer: PickupTimer,
}

impl DirectionalPowerRas {
    pub fn new(settings: DirectionalSettings, armed: bool) -> Self {
        let timer = PickupTimer::new(settings.pickup_time);
        Self {
            settings,
            armed,
            timer,
        }
    }

    pub fn step(&mut self, t: f64, p_interface: f64) -> bool {
        self.armed && self.timer.step(t, p_interface > self.settings.p_threshold)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DT: f64 = 1.0 / 240.0;

    fn tt() -> TransferTripRas {
        TransferTripRas::new(
            TransferTripSettings {
                p_threshold: 300.0,
                v_threshold: 0.90,
                pickup_time: 0.1,
            },
            true,
        )
    }

    #[test]
    fn transfer_trip_fires_after_pickup() {
        let mut r = tt();
        let fired: Vec<usize> = (0..100)
            .filter(|&k| r.step(k as f64 * DT, 320.0, 0.85))
            .collect();
        assert_eq!(fired, vec![24]);
    }

    #[test]
    fn transfer_trip_needs_both_conditions() {
        let mut r = tt();
        assert!((0..500).all(|k| !r.step(k as f64 * DT, 320.0, 0.95)));
    }

    #[test]
    fn transfer_trip_timer_resets() {
        let mut r = tt();
        let mut fired = false;
        for k in 0..200 {
            let t = k as f64 * 0.01;
            // 0.08 s on, one step off, repeat
            let on = k % 10 != 9;
            fired |= r.step(t, if on { 320.0 } else { 200.0 }, 0.85);
        }
        assert!(!fired);
    }

    #[test]
    fn zero_pickup_fires_immediately() {
        let mut t = PickupTimer::new(0.0);
        assert!(!t.step(0.0, false));
        assert!(t.step(0.1, true));
        assert!(!t.step(0.2, true));
    }

    fn osc(window: f64) -> OscillationRas {
        OscillationRas::new(
            OscillationSettings {
                amplitude_threshold: 40.0,
                persist_time: 5.0,
                window,
                undamped_ratio: 0.98,
            },
            true,
        )
    }

    #[test]
    fn undamped_sinusoid_trips() {
        let mut r = osc(5.0);
        let period = 2.0;
        let trip = (0..240 * 20)
            .map(|k| k as f64 * DT)
            .find(|&t| r.step(t, 200.0 + 30.0 * (2.0 * std::f64::consts::PI * t / period).sin()))
            .expect("trips");
        assert!(trip <= 5.0 + 2.0 * period, "{trip}");
        assert!(trip >= 5.0);
    }

    #[test]
    fn damped_sinusoid_never_trips() {
        let mut r = osc(5.0);
        let fired = (0..240 * 75).map(|k| k as f64 * DT).any(|t| {
            r.step(
                t,
                200.0 + 60.0 * (-0.2 * t).exp() * (std::f64::consts::PI * t).sin(),
            )
        });
        assert!(!fired);
    }

    #[test]
    fn constant_has_no_extrema() {
        let mut r = osc(5.0);
        assert!((0..2400).all(|k| !r.step(k as f64 * DT, 250.0)));
    }

    fn ovl() -> OverloadShedRas {
        OverloadShedRas::new(
            OverloadSettings {
                rating: 300.0,
                overload_factor: 1.0,
                stage1_delay: 1.0,
                stage2_delay: 2.0,
            },
            true,
        )
    }

    #[test]
    fn overload_sustained_reaches_stage_two() {
        let mut r = ovl();
        let log: Vec<(usize, OverloadAction)> = (0..240 * 5)
            .filter_map(|k| r.step(k as f64 * DT, 330.0).map(|a| (k, a)))
            .collect();
        assert_eq!(
            log,
            vec![(240, OverloadAction::ShedGeneration), (720, OverloadAction::TripTie)]
        );
    }

    #[test]
    fn overload_cleared_after_shed_freezes() {
        let mut r = ovl();
        let mut log = Vec::new();
        for k in 0..240 * 6 {
            let t = k as f64 * DT;
            let s = if t < 1.5 { 330.0 } else { 280.0 };
            if let Some(a) = r.step(t, s) {
                log.push(a);
            }
        }
        assert_eq!(log, vec![OverloadAction::ShedGeneration]);
        assert_eq!(r.stage(), 1);
        assert!(r.frozen());
        // even a fresh overload does not re-arm it
        assert_eq!(r.step(7.0, 400.0), None);
    }

    #[test]
    fn below_rating_never_acts() {
        let mut r = ovl();
        assert!((0..2400).all(|k| r.step(k as f64 * DT, 295.0).is_none()));
    }

    #[test]
    fn shed_selection_largest_first() {
        let units = vec![
            ("B".to_string(), 40.0),
            ("A".to_string(), 40.0),
            ("C".to_string(), 90.0),
            ("D".to_string(), 0.0),
        ];
        assert_eq!(select_shed_units(&units, 100.0), (vec!["C".into(), "A".into()], 0.0));
        let (ids, short) = select_shed_units(&units, 500.0);
        assert_eq!(ids.len(), 3);
        assert_eq!(short, 330.0);
    }

    #[test]
    fn directional_respects_sign() {
        let settings = DirectionalSettings {
            p_threshold: 150.0,
            pickup_time: 0.5,
        };
        let mut north = DirectionalPowerRas::new(settings.clone(), true);
        let fired: Vec<usize> = (0..480).filter(|&k| north.step(k as f64 * DT, 200.0)).collect();
        assert_eq!(fired, vec![120]);
        let mut south = DirectionalPowerRas::new(settings, true);
        assert!((0..480).all(|k| !south.step(k as f64 * DT, -200.0)));
    }

    #[test]
    fn disarmed_scheme_is_silent() {
        let mut r = tt();
        r.armed = false;
        assert!((0..100).all(|k| !r.step(k as f64 * DT, 400.0, 0.5)));
    }
}
