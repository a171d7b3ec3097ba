use std::f64::consts::PI;

/// Washout time constant of the bus frequency estimate, s.
pub const WASHOUT_TIME_CONSTANT: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FrequencyError {
    #[error("angle series needs at least 2 samples, got {0}")]
    TooShort(usize),
    #[error("sample interval must be > 0 (got {0})")]
    BadStep(f64),
}

/// Streaming washout-filtered angle derivative, discretised with backward
/// Euler: `y_k = (T·y_{k-1} + Δθ_k) / (T + dt)`.
#[derive(Debug, Clone)]
pub struct FrequencyFilter {
    dt: f64,
    tw: f64,
    f_nominal: f64,
    last: Option<f64>,
    y: f64,
}

impl FrequencyFilter {
    pub fn new(dt: f64, f_nominal: f64) -> Self {
        Self {
            dt,
            tw: WASHOUT_TIME_CONSTANT,
            f_nominal,
            last: None,
            y: 0.0,
        }
    }

    /// Feeds one angle sample (rad) and returns the frequency estimate, Hz.
    pub fn push(&mut self, theta: f64) -> f64 {
        if let Some(last) = self.last {
            let d = wrap(theta - last);
            self.y = (self.tw * self.y + d) / (self.tw + self.dt);
        }
        self.last = Some(theta);
        self.value()
    }

    /// Advances one step without a valid angle (dead bus): the angle is
    /// held, so the derivative decays.
    pub fn hold(&mut self) -> f64 {
        if self.last.is_some() {
            self.y = self.tw * self.y / (self.tw + self.dt);
        }
        self.value()
    }

    pub fn value(&self) -> f64 {
        self.f_nominal + self.y / (2.0 * PI)
    }
}

fn wrap(d: f64) -> f64 {
    if d > PI || d <= -PI {
        d - 2.0 * PI * ((d + PI) / (2.0 * PI)).floor()
    } else {
        d
    }
}

/// Frequency (Hz) from a uniformly sampled bus angle series (rad).
pub fn bus_frequency(angles: &[f64], dt: f64, f_nominal: f64) -> Result<Vec<f64>, FrequencyError> {
    if angles.len() < 2 {
        return Err(FrequencyError::TooShort(angles.len()));
    }
    if !(dt > 0.0) {
        return Err(FrequencyError::BadStep(dt));
    }
    let mut f = FrequencyFilter::new(dt, f_nominal);
    Ok(angles.iter().map(|&a| f.push(a)).collect())
}
