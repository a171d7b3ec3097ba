use serde::{Deserialize, Serialize};

use super::ChannelMetrics;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Grade {
    A,
    B,
    C,
    D,
}

impl std::fmt::Display for Grade {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Grade::A => "A",
            Grade::B => "B",
            Grade::C => "C",
            Grade::D => "D",
        })
    }
}

/// Channel family, from the channel name prefix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ChannelClass {
    Frequency,
    Voltage,
    Power,
    Angle,
    Speed,
}

impl ChannelClass {
    pub fn of(channel: &str) -> Option<Self> {
        let (prefix, _) = channel.split_once(':')?;
        Some(match prefix {
            "F" => ChannelClass::Frequency,
            "V" => ChannelClass::Voltage,
            "P" | "Q" | "PM" => ChannelClass::Power,
            "ANG" => ChannelClass::Angle,
            "SPD" => ChannelClass::Speed,
            _ => return None,
        })
    }
}

/// Value and time tolerances for grades A, B and C; anything worse is D.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GradeLimits {
    pub value: [f64; 3],
    pub time: [f64; 3],
}

impl GradeLimits {
    pub fn grade(&self, value_err: f64, time_err: f64) -> Grade {
        let (v, t) = (value_err.abs(), time_err.abs());
        for (i, g) in [Grade::A, Grade::B, Grade::C].into_iter().enumerate() {
            if v <= self.value[i] && t <= self.time[i] {
                return g;
            }
        }
        Grade::D
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GradeThresholds {
    /// Hz.
    pub frequency: GradeLimits,
    /// pu.
    pub voltage: GradeLimits,
    /// MW or MVAr.
    pub power: GradeLimits,
    /// rad.
    pub angle: GradeLimits,
    /// pu speed.
    pub speed: GradeLimits,
}

impl Default for GradeThresholds {
    fn default() -> Self {
        let times = [1.0, 2.0, 5.0];
        let limits = |value| GradeLimits { value, time: times };
        Self {
            frequency: limits([0.05, 0.1, 0.2]),
            voltage: limits([0.01, 0.03, 0.05]),
            power: limits([5.0, 10.0, 20.0]),
            angle: limits([0.05, 0.1, 0.2]),
            speed: limits([0.05 / 60.0, 0.1 / 60.0, 0.2 / 60.0]),
        }
    }
}

impl GradeThresholds {
    pub fn limits(&self, class: ChannelClass) -> &GradeLimits {
        match class {
            ChannelClass::Frequency => &self.frequency,
            ChannelClass::Voltage => &self.voltage,
            ChannelClass::Power => &self.power,
            ChannelClass::Angle => &self.angle,
            ChannelClass::Speed => &self.speed,
        }
    }
}

/// Both the primary extremum value error and its time error must be
/// within a grade's limits. Unknown channel families grade D.
pub fn grade(metrics: &ChannelMetrics, thresholds: &GradeThresholds) -> Grade {
    match ChannelClass::of(&metrics.channel) {
        Some(c) => thresholds
            .limits(c)
            .grade(metrics.extremum_error, metrics.extremum_time_error),
        None => Grade::D,
    }
}
