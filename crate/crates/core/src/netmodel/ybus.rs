use std::collections::BTreeMap;

use num_complex::Complex;

use super::{BranchRef, NetworkCase};
use crate::linalg::DenseMatrix;
use crate::num::{Pivot, Scalar};

/// Pi-model stamp of one branch: `[I_f; I_t] = [[yff, yft]; [ytf, ytt]]·[V_f; V_t]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchStamp<T> {
    pub yff: Complex<T>,
    pub yft: Complex<T>,
    pub ytf: Complex<T>,
    pub ytt: Complex<T>,
}

pub fn branch_stamp<T: Scalar>(b: &BranchRef<'_>) -> BranchStamp<T> {
    let z = Complex::new(T::of(b.r), T::of(b.x));
    let y = Complex::new(T::one(), T::zero()) / z;
    let half_b = Complex::new(T::zero(), T::of(b.b_total / 2.0));
    let tap = T::of(b.tap);
    BranchStamp {
        yff: (y + half_b) / (tap * tap),
        yft: -y / tap,
        ytf: -y / tap,
        ytt: y + half_b,
    }
}

/// Sparse bus admittance matrix over in-service buses, rows kept sorted by
/// column.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmittanceMatrix<T> {
    bus_ids: Vec<String>,
    index: BTreeMap<String, usize>,
    rows: Vec<Vec<(usize, Complex<T>)>>,
}

impl<T: Scalar> AdmittanceMatrix<T> {
    pub fn empty(bus_ids: Vec<String>) -> Self {
        let index = bus_ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.clone(), i))
            .collect();
        let rows = vec![Vec::new(); bus_ids.len()];
        Self {
            bus_ids,
            index,
            rows,
        }
    }

    pub fn dim(&self) -> usize {
        self.bus_ids.len()
    }

    pub fn bus_ids(&self) -> &[String] {
        &self.bus_ids
    }

    pub fn position(&self, bus_id: &str) -> Option<usize> {
        self.index.get(bus_id).copied()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex<T> {
        match self.rows[i].binary_search_by_key(&j, |(c, _)| *c) {
            Ok(k) => self.rows[i][k].1,
            Err(_) => Complex::new(T::zero(), T::zero()),
        }
    }

    pub fn row(&self, i: usize) -> &[(usize, Complex<T>)] {
        &self.rows[i]
    }

    /// Number of stored entries.
    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn add(&mut self, i: usize, j: usize, v: Complex<T>) {
        let row = &mut self.rows[i];
        match row.binary_search_by_key(&j, |(c, _)| *c) {
            Ok(k) => row[k].1 += v,
            Err(k) => row.insert(k, (j, v)),
        }
    }

    pub fn stamp(&mut self, f: usize, t: usize, s: &BranchStamp<T>) {
        self.add(f, f, s.yff);
        self.add(f, t, s.yft);
        self.add(t, f, s.ytf);
        self.add(t, t, s.ytt);
    }

    pub fn mul_vec(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        self.rows
            .iter()
            .map(|row| {
                row.iter()
                    .fold(Complex::new(T::zero(), T::zero()), |acc, &(j, y)| {
                        acc + y * v[j]
                    })
            })
            .collect()
    }

    pub fn to_dense(&self) -> DenseMatrix<Complex<T>>
    where
        Complex<T>: Pivot,
    {
        let mut m = DenseMatrix::zeros(self.dim());
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, y) in row {
                m.set(i, j, y);
            }
        }
        m
    }
}

/// Assembles the admittance matrix from pi models of every in-service line
/// and transformer between in-service buses.
pub fn build_ybus<T: Scalar>(case: &NetworkCase) -> AdmittanceMatrix<T> {
    let ids = case
        .buses
        .iter()
        .filter(|b| b.status.is_in())
        .map(|b| b.id.clone())
        .collect();
    let mut y = AdmittanceMatrix::empty(ids);
    for b in case.all_branches() {
        if !b.status.is_in() {
            continue;
        }
        let (Some(f), Some(t)) = (y.position(b.from_bus), y.position(b.to_bus)) else {
            continue;
        };
        let s = branch_stamp::<T>(&b);
        y.stamp(f, t, &s);
    }
    y
}
