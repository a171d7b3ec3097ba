use std::fs;
use std::io::{self, Write};
use std::path::Path;

use super::PowerFlowSolution;
use crate::netmodel::NetworkCase;

/// `buses.csv`: one row per in-service bus.
pub fn write_bus_csv<W: Write>(
    case: &NetworkCase,
    sol: &PowerFlowSolution<f64>,
    mut w: W,
) -> io::Result<()> {
    writeln!(
        w,
        "id,name,area,kind,v_pu,theta_rad,v_kv,theta_deg,p_gen_mw,q_gen_mvar,p_load_mw,q_load_mvar"
    )?;
    for (i, id) in sol.bus_ids.iter().enumerate() {
        let bus = case.bus(id).expect("solution buses come from the case");
        let (pg, qg) = sol
            .machines
            .iter()
            .filter(|m| &m.bus == id)
            .fold((0.0, 0.0), |(p, q), m| (p + m.p_mw, q + m.q_mvar));
        let (pl, ql) = case
            .loads
            .iter()
            .filter(|l| &l.bus == id && l.status.is_in())
            .fold((0.0, 0.0), |(p, q), l| (p + l.p, q + l.q));
        let kind = match bus.kind {
            crate::netmodel::BusKind::Slack => "slack",
            crate::netmodel::BusKind::Pv => "pv",
            crate::netmodel::BusKind::Pq => "pq",
        };
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            id,
            bus.name,
            bus.area,
            kind,
            sol.v[i],
            sol.theta[i],
            sol.v[i] * bus.base_kv,
            sol.theta[i].to_degrees(),
            pg,
            qg,
            pl,
            ql
        )?;
    }
    Ok(())
}

/// `branches.csv`: one row per line and transformer, open ones included
/// with zero flows.
pub fn write_branch_csv<W: Write>(
    case: &NetworkCase,
    sol: &PowerFlowSolution<f64>,
    mut w: W,
) -> io::Result<()> {
    writeln!(
        w,
        "id,kind,from,to,circuit,in_service,p_from_mw,q_from_mvar,p_to_mw,q_to_mvar,loss_mw,rating_mva,loading"
    )?;
    for f in &sol.branches {
        let loading = if f.rating > 0.0 {
            f.s_from().max(f.p_to.hypot(f.q_to)) / f.rating
        } else {
            0.0
        };
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            f.id,
            if f.is_transformer { "transformer" } else { "line" },
            case.bus_name(&f.from_bus),
            case.bus_name(&f.to_bus),
            f.circuit_id,
            f.in_service,
            f.p_from,
            f.q_from,
            f.p_to,
            f.q_to,
            f.loss(),
            f.rating,
            loading
        )?;
    }
    Ok(())
}

/// Writes `buses.csv` and `branches.csv` into `dir`.
pub fn write_solution(
    case: &NetworkCase,
    sol: &PowerFlowSolution<f64>,
    dir: &Path,
) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    let mut buses = Vec::new();
    write_bus_csv(case, sol, &mut buses)?;
    fs::write(dir.join("buses.csv"), buses)?;
    let mut branches = Vec::new();
    write_branch_csv(case, sol, &mut branches)?;
    fs::write(dir.join("branches.csv"), branches)?;
    Ok(())
}
