use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::dynamics::{channel, SimulationResult};
use crate::netmodel::NetworkCase;
use crate::num::Scalar;

/// Below this current magnitude (pu) the impedance is not measurable.
pub const MIN_CURRENT: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
#[error("current magnitude {0} pu too small: impedance unmeasurable")]
pub struct Unmeasurable(pub f64);

pub fn apparent_impedance<T: Scalar>(
    v: Complex<T>,
    i: Complex<T>,
) -> Result<Complex<T>, Unmeasurable> {
    let mag = i.norm();
    if !(mag > T::of(MIN_CURRENT)) {
        return Err(Unmeasurable(mag.to_f64_lossy()));
    }
    Ok(v / i)
}

/// Mho circle through the origin with diameter `reach` along `angle`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MhoZone<T> {
    /// pu on the system base.
    pub reach: T,
    /// Maximum-torque angle, rad.
    pub angle: T,
    /// Zone timer, s.
    #[serde(default)]
    pub timer: T,
}

impl<T: Scalar> MhoZone<T> {
    pub fn center(&self) -> Complex<T> {
        Complex::from_polar(self.reach / T::of(2.0), self.angle)
    }
}

/// Inside test `|z − c| ≤ |c|`; points on the circle count as inside.
pub fn mho_zone_check<T: Scalar>(z: Complex<T>, zone: &MhoZone<T>) -> bool {
    let c = zone.center();
    let r = c.norm();
    let slack = T::epsilon() * T::of(16.0) * (r + z.norm());
    (z - c).norm() <= r + slack
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ReplayError {
    #[error("unknown branch '{0}'")]
    UnknownBranch(String),
    #[error("result lacks channel '{0}'")]
    MissingChannel(String),
}

/// Apparent impedance seen at the from end of `branch`, rebuilt from the
/// recorded `V:`, `P:` and `Q:` channels. `None` where the current is too
/// small to measure.
pub fn impedance_trajectory(
    case: &NetworkCase,
    result: &SimulationResult,
    branch: &str,
) -> Result<Vec<Option<Complex<f64>>>, ReplayError> {
    let b = case
        .find_branch(branch)
        .ok_or_else(|| ReplayError::UnknownBranch(branch.to_string()))?;
    let label = case.branch_label(&b);
    let get = |name: String| {
        result
            .channel(&name)
            .ok_or(ReplayError::MissingChannel(name))
    };
    let v = get(channel::voltage(case.bus_name(b.from_bus)))?;
    let p = get(channel::active_power(&label))?;
    let q = get(channel::reactive_power(&label))?;
    Ok(v
        .iter()
        .zip(p.iter().zip(q))
        .map(|(&vm, (&p, &q))| replay_point(vm, Complex::new(p, q) / case.base_mva))
        .collect())
}

/// One replayed sample: `z = |V|² / conj(S)` with the voltage as angle
/// reference, i.e. `V/I` for `I = conj(S/V)`.
pub fn replay_point(v_mag: f64, s: Complex<f64>) -> Option<Complex<f64>> {
    let v = Complex::new(v_mag, 0.0);
    // S = 0 at zero voltage, so the current is unknown
    if v_mag <= 0.0 {
        return None;
    }
    let i = (s / v).conj();
    apparent_impedance(v, i).ok()
}
