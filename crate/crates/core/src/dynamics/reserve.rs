use serde::Serialize;

use super::MachineDynamics;
use crate::netmodel::NetworkCase;
use crate::powerflow::PowerFlowSolution;

/// Operating point of one unit: dispatch in pu of its own base.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnitDispatch {
    pub id: String,
    pub p: f64,
    pub mbase: f64,
}

impl UnitDispatch {
    /// Dispatch of every in-service machine from a solved case.
    pub fn from_solution(case: &NetworkCase, solution: &PowerFlowSolution<f64>) -> Vec<Self> {
        solution
            .machines
            .iter()
            .filter_map(|o| {
                let m = case.machine(&o.id)?;
                Some(UnitDispatch {
                    id: o.id.clone(),
                    p: o.p_mw / m.mbase,
                    mbase: m.mbase,
                })
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReserveAdjustment {
    pub machines: Vec<MachineDynamics>,
    /// Applied headroom scale `s`, 1 when nothing changed.
    pub scale: f64,
    /// Responsive headroom before and after, MW.
    pub headroom_before: f64,
    pub headroom_after: f64,
    /// Set when the available headroom is below the target, MW missing.
    pub shortfall: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ReserveError {
    #[error("target reserve must be >= 0 (got {0} MW)")]
    NegativeTarget(f64),
    #[error("no responsive headroom for a target of {0} MW")]
    NoHeadroom(f64),
}

fn headroom(m: &MachineDynamics, d: &UnitDispatch) -> Option<f64> {
    let g = m.governor.as_ref().filter(|g| g.enabled)?;
    Some(((g.p_max - d.p) * d.mbase).max(0.0))
}

fn responsive(machines: &[MachineDynamics], dispatch: &[UnitDispatch]) -> f64 {
    machines
        .iter()
        .filter_map(|m| {
            let d = dispatch.iter().find(|d| d.id == m.id)?;
            headroom(m, d)
        })
        .sum()
}

/// Rescales governor upper limits so the responsive headroom of the
/// dispatched units equals `target` MW. Limits are never raised.
pub fn adjust_governors_for_reserve(
    machines: &[MachineDynamics],
    dispatch: &[UnitDispatch],
    target: f64,
) -> Result<ReserveAdjustment, ReserveError> {
    if !(target >= 0.0) {
        return Err(ReserveError::NegativeTarget(target));
    }
    let total = responsive(machines, dispatch);
    if total == 0.0 && target > 0.0 {
        return Err(ReserveError::NoHeadroom(target));
    }
    if total <= target {
        let shortfall = target - total;
        return Ok(ReserveAdjustment {
            machines: machines.to_vec(),
            scale: 1.0,
            headroom_before: total,
            headroom_after: total,
            shortfall: (shortfall > 0.0).then_some(shortfall),
        });
    }
    let s = target / total;
    let adjusted: Vec<MachineDynamics> = machines
        .iter()
        .map(|m| {
            let mut m = m.clone();
            let d = dispatch.iter().find(|d| d.id == m.id);
            if let (Some(d), Some(g)) = (d, m.governor.as_mut().filter(|g| g.enabled)) {
                if g.p_max > d.p {
                    g.p_max = d.p + s * (g.p_max - d.p);
                }
            }
            m
        })
        .collect();
    let after = responsive(&adjusted, dispatch);
    Ok(ReserveAdjustment {
        machines: adjusted,
        scale: s,
        headroom_before: total,
        headroom_after: after,
        shortfall: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::GovernorParams;

    fn unit(id: &str, p_max: f64) -> (MachineDynamics, UnitDispatch) {
        (
            MachineDynamics {
                id: id.into(),
                h: 4.0,
                d: 0.0,
                xdp: 0.3,
                governor: Some(GovernorParams {
                    r: 0.05,
                    t_g: 0.5,
                    p_max,
                    p_min: 0.0,
                    enabled: true,
                }),
            },
            UnitDispatch {
                id: id.into(),
                p: 0.5,
                mbase: 200.0,
            },
        )
    }

    fn fleet(p_max: &[f64]) -> (Vec<MachineDynamics>, Vec<UnitDispatch>) {
        p_max
            .iter()
            .enumerate()
            .map(|(i, &p)| unit(&format!("G{i}"), p))
            .unzip()
    }

    fn headrooms(adj: &ReserveAdjustment, d: &[UnitDispatch]) -> Vec<f64> {
        adj.machines
            .iter()
            .zip(d)
            .map(|(m, d)| headroom(m, d).unwrap())
            .collect()
    }

    #[test]
    fn three_units_scaled() {
        // headrooms 100, 200, 100 MW on 200 MVA units at 0.5 pu
        let (m, d) = fleet(&[1.0, 1.5, 1.0]);
        let adj = adjust_governors_for_reserve(&m, &d, 100.0).unwrap();
        let h = headrooms(&adj, &d);
        for (got, want) in h.iter().zip([25.0, 50.0, 25.0]) {
            assert!((got - want).abs() < 1e-9, "{h:?}");
        }
        assert!((adj.headroom_after - 100.0).abs() < 1e-6);
    }

    #[test]
    fn full_target_unchanged() {
        let (m, d) = fleet(&[1.0, 1.5]);
        let adj = adjust_governors_for_reserve(&m, &d, 300.0).unwrap();
        assert_eq!(adj.machines, m);
        assert_eq!(adj.scale, 1.0);
        assert_eq!(adj.shortfall, None);
    }

    #[test]
    fn shortfall_reported() {
        let (m, d) = fleet(&[1.0]);
        let adj = adjust_governors_for_reserve(&m, &d, 150.0).unwrap();
        assert_eq!(adj.machines, m);
        assert_eq!(adj.shortfall, Some(50.0));
    }

    #[test]
    fn no_headroom_is_error() {
        let (m, d) = fleet(&[0.5]);
        assert_eq!(
            adjust_governors_for_reserve(&m, &d, 10.0),
            Err(ReserveError::NoHeadroom(10.0))
        );
        assert!(adjust_governors_for_reserve(&m, &d, 0.0).is_ok());
    }
}
