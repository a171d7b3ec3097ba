use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::linalg::{DenseMatrix, Lu, Singular};
use crate::netmodel::{branch_stamp, BranchStamp, NetworkCase};

#[derive(Debug, Clone)]
pub(super) struct BranchElem {
    pub id: String,
    pub label: String,
    pub from: usize,
    pub to: usize,
    pub stamp: BranchStamp<f64>,
    pub in_service: bool,
}

#[derive(Debug, Clone)]
pub(super) struct LoadElem {
    pub id: String,
    pub bus: usize,
    /// Admittance at full initial power, system pu.
    pub y0: Complex64,
    pub p0: f64,
    pub remaining: f64,
    pub in_service: bool,
}

impl LoadElem {
    fn admittance(&self) -> Complex64 {
        if !self.in_service {
            return Complex64::new(0.0, 0.0);
        }
        if self.p0 > 0.0 {
            self.y0 * (self.remaining / self.p0)
        } else {
            self.y0
        }
    }
}

#[derive(Debug, Clone)]
struct Factored {
    /// Matrix row of each bus, `None` for buses in dead islands.
    row: Vec<Option<usize>>,
    lu: Lu<Complex64>,
    island: Vec<usize>,
}

/// Algebraic network of the transient simulation: branch stamps, constant
/// impedance loads, machine Norton admittances and fault shunts.
#[derive(Debug, Clone)]
pub(super) struct Grid {
    pub bus_ids: Vec<String>,
    pub bus_names: Vec<String>,
    pub branches: Vec<BranchElem>,
    pub loads: Vec<LoadElem>,
    pub faults: BTreeMap<usize, Complex64>,
    factored: Option<Factored>,
}

impl Grid {
    /// Builds the grid over `bus_ids` (in-service buses). Load admittances
    /// come from the pre-event voltage magnitudes `v`.
    pub fn new(case: &NetworkCase, bus_ids: &[String], v: &[f64]) -> Self {
        let pos: BTreeMap<&str, usize> = bus_ids
            .iter()
            .enumerate()
            .map(|(i, b)| (b.as_str(), i))
            .collect();
        let bus_names = bus_ids
            .iter()
            .map(|id| case.bus_name(id).to_string())
            .collect();
        let mut branches = Vec::new();
        for b in case.all_branches() {
            let (Some(&from), Some(&to)) = (pos.get(b.from_bus), pos.get(b.to_bus)) else {
                continue;
            };
            branches.push(BranchElem {
                id: b.id.to_string(),
                label: case.branch_label(&b),
                from,
                to,
                stamp: branch_stamp::<f64>(&b),
                in_service: b.status.is_in(),
            });
        }
        let mut loads = Vec::new();
        for l in &case.loads {
            let Some(&bus) = pos.get(l.bus.as_str()) else {
                continue;
            };
            let s = Complex64::new(case.to_pu(l.p), case.to_pu(l.q));
            let vm2 = v[bus] * v[bus];
            loads.push(LoadElem {
                id: l.id.clone(),
                bus,
                y0: s.conj() / vm2,
                p0: l.p,
                remaining: l.p,
                in_service: l.status.is_in(),
            });
        }
        Self {
            bus_ids: bus_ids.to_vec(),
            bus_names,
            branches,
            loads,
            faults: BTreeMap::new(),
            factored: None,
        }
    }

    pub fn n(&self) -> usize {
        self.bus_ids.len()
    }

    pub fn position(&self, key: &str) -> Option<usize> {
        self.bus_ids
            .iter()
            .position(|b| b == key)
            .or_else(|| self.bus_names.iter().position(|b| b == key))
    }

    pub fn invalidate(&mut self) {
        self.factored = None;
    }

    pub fn is_factored(&self) -> bool {
        self.factored.is_some()
    }

    /// Island index of every bus over in-service branches.
    fn islands(&self) -> Vec<usize> {
        let n = self.n();
        let mut parent: Vec<usize> = (0..n).collect();
        fn root(p: &mut [usize], mut i: usize) -> usize {
            while p[i] != i {
                p[i] = p[p[i]];
                i = p[i];
            }
            i
        }
        for b in self.branches.iter().filter(|b| b.in_service) {
            let (rf, rt) = (root(&mut parent, b.from), root(&mut parent, b.to));
            if rf != rt {
                parent[rf.max(rt)] = rf.min(rt);
            }
        }
        (0..n).map(|i| root(&mut parent, i)).collect()
    }

    /// Refactors the network. `sources` lists (bus, admittance) of every
    /// in-service machine. Returns the buses of islands without sources.
    pub fn factor(&mut self, sources: &[(usize, Complex64)]) -> Result<Vec<Vec<usize>>, Singular> {
        let n = self.n();
        let island = self.islands();
        let mut live = vec![false; n];
        for &(bus, _) in sources {
            live[island[bus]] = true;
        }
        let mut row = vec![None; n];
        let mut m = 0;
        for i in 0..n {
            if live[island[i]] {
                row[i] = Some(m);
                m += 1;
            }
        }
        let mut a = DenseMatrix::<Complex64>::zeros(m);
        let mut add = |i: usize, j: usize, y: Complex64| {
            if let (Some(r), Some(c)) = (row[i], row[j]) {
                a.add(r, c, y);
            }
        };
        for b in self.branches.iter().filter(|b| b.in_service) {
            add(b.from, b.from, b.stamp.yff);
            add(b.from, b.to, b.stamp.yft);
            add(b.to, b.from, b.stamp.ytf);
            add(b.to, b.to, b.stamp.ytt);
        }
        for l in &self.loads {
            add(l.bus, l.bus, l.admittance());
        }
        for &(bus, y) in sources {
            add(bus, bus, y);
        }
        for (&bus, &y) in &self.faults {
            add(bus, bus, y);
        }
        let lu = a.factor()?;
        let mut dead: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for i in 0..n {
            if row[i].is_none() {
                dead.entry(island[i]).or_default().push(i);
            }
        }
        let dead: Vec<Vec<usize>> = dead.into_values().collect();
        self.factored = Some(Factored {
            row,
            lu,
            island,
        });
        Ok(dead)
    }

    /// Island representative of each bus; requires a prior [`Grid::factor`].
    pub fn island_of(&self, bus: usize) -> usize {
        self.factored.as_ref().expect("grid factored").island[bus]
    }


    /// Bus voltages for per-bus Norton current injections; buses in dead
    /// islands get zero.
    pub fn solve(&self, injection: &[Complex64]) -> Vec<Complex64> {
        let f = self.factored.as_ref().expect("grid factored before solve");
        let m = f.lu.dim();
        let mut rhs = vec![Complex64::new(0.0, 0.0); m];
        for (i, r) in f.row.iter().enumerate() {
            if let Some(r) = r {
                rhs[*r] = injection[i];
            }
        }
        let x = f.lu.solve(&rhs);
        f.row
            .iter()
            .map(|r| r.map(|r| x[r]).unwrap_or_default())
            .collect()
    }

    /// From-end complex power of a branch, system pu; zero when open.
    pub fn branch_power(&self, k: usize, v: &[Complex64]) -> Complex64 {
        let b = &self.branches[k];
        if !b.in_service {
            return Complex64::new(0.0, 0.0);
        }
        let i = b.stamp.yff * v[b.from] + b.stamp.yft * v[b.to];
        v[b.from] * i.conj()
    }

    pub fn branch_index(&self, id: &str) -> Option<usize> {
        self.branches.iter().position(|b| b.id == id)
    }

    pub fn load_index(&self, id: &str) -> Option<usize> {
        self.loads.iter().position(|l| l.id == id)
    }
}
