//! Random connected cases for property tests.

#![allow(dead_code)]

use gridseam_core::netmodel::{
    Area, Branch, Bus, BusKind, Load, Machine, NetworkCase, Status, Transformer,
};
use proptest::prelude::*;

#[derive(Debug, Clone)]
struct Element {
    /// Parent bus for tree elements, any bus for extras.
    other: usize,
    r: f64,
    x: f64,
    b_total: f64,
    tap: f64,
    transformer: bool,
}

fn element(max_other: usize) -> impl Strategy<Value = Element> {
    (
        0..max_other,
        0.0..0.05f64,
        prop_oneof![0.01..0.3f64, -0.2..-0.01f64],
        0.0..0.3f64,
        0.9..1.1f64,
        prop::bool::weighted(0.3),
    )
        .prop_map(|(other, r, x, b_total, tap, transformer)| Element {
            other,
            r,
            x,
            b_total,
            tap,
            transformer,
        })
}

/// A case with `n` buses, a spanning tree plus extra (possibly parallel)
/// elements; bus 0 is the slack.
pub fn connected_case() -> impl Strategy<Value = NetworkCase> {
    (2usize..9).prop_flat_map(|n| {
        (
            prop::collection::vec(element(n), n - 1),
            prop::collection::vec((0..n, element(n)), 0..n),
            prop::collection::vec((0..n, -50.0..200.0f64, -30.0..60.0f64), 0..n),
        )
            .prop_map(move |(tree, extra, loads)| build(n, tree, extra, loads))
    })
}

fn build(
    n: usize,
    tree: Vec<Element>,
    extra: Vec<(usize, Element)>,
    loads: Vec<(usize, f64, f64)>,
) -> NetworkCase {
    let id = |i: usize| format!("B{i}");
    let buses = (0..n)
        .map(|i| Bus {
            id: id(i),
            name: format!("BUS-{i}"),
            area: if i % 2 == 0 { "A" } else { "B" }.into(),
            base_kv: 230.0,
            kind: if i == 0 { BusKind::Slack } else { BusKind::Pq },
            v_set: (i == 0).then_some(1.0),
            status: Status::In,
        })
        .collect();
    let mut pairs: Vec<(usize, usize, Element)> = tree
        .into_iter()
        .enumerate()
        .map(|(k, e)| {
            let child = k + 1;
            let parent = e.other % child;
            (parent, child, e)
        })
        .collect();
    for (a, e) in extra {
        if a != e.other {
            pairs.push((a, e.other, e));
        }
    }
    let mut branches = Vec::new();
    let mut transformers = Vec::new();
    for (k, (f, t, e)) in pairs.into_iter().enumerate() {
        if e.transformer {
            transformers.push(Transformer {
                id: format!("T{k}"),
                from_bus: id(f),
                to_bus: id(t),
                circuit_id: format!("{k}"),
                r: e.r,
                x: e.x,
                b_total: 0.0,
                rating: 100.0,
                tap_ratio: e.tap,
                status: Status::In,
            });
        } else {
            branches.push(Branch {
                id: format!("L{k}"),
                from_bus: id(f),
                to_bus: id(t),
                circuit_id: format!("{k}"),
                r: e.r,
                x: e.x,
                b_total: e.b_total,
                rating: 100.0,
                status: Status::In,
            });
        }
    }
    NetworkCase {
        name: String::new(),
        base_mva: 100.0,
        buses,
        branches,
        transformers,
        machines: vec![Machine {
            id: "G0".into(),
            bus: id(0),
            p_dispatch: 0.0,
            q_dispatch: 0.0,
            q_min: -999.0,
            q_max: 999.0,
            mbase: 500.0,
            status: Status::In,
        }],
        loads: loads
            .into_iter()
            .enumerate()
            .map(|(k, (b, p, q))| Load {
                id: format!("D{k}"),
                bus: id(b),
                p,
                q,
                status: Status::In,
                sheddable_block: None,
            })
            .collect(),
        areas: vec![
            Area {
                id: "A".into(),
                name: "Area A".into(),
            },
            Area {
                id: "B".into(),
                name: "Area B".into(),
            },
        ],
        equivalent: None,
    }
}
