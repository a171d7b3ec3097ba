//! Transient-stability and model-validation harness for interconnected
//! grids: case model, AC power flow, external-equivalent merging, classical
//! transient simulation with RAS, batch contingency runs and
//! measurement-based validation.

pub mod contingency;
pub mod dynamics;
pub mod linalg;
pub mod merge;
pub mod netmodel;
pub mod num;
pub mod pipeline;
pub mod powerflow;
pub mod ras;
pub mod validation;

pub use num_complex::Complex;

pub use netmodel::{load_case, serialize_case, validate_case, NetworkCase, Violation};
pub use num::{Pivot, Scalar};
pub use powerflow::solve_powerflow;

pub type Complex64 = Complex<f64>;
pub type Complex32 = Complex<f32>;

pub type AdmittanceMatrix64 = netmodel::AdmittanceMatrix<f64>;
pub type AdmittanceMatrix32 = netmodel::AdmittanceMatrix<f32>;
pub type PowerFlowOptions64 = powerflow::PowerFlowOptions<f64>;
pub type PowerFlowOptions32 = powerflow::PowerFlowOptions<f32>;
pub type PowerFlowSolution64 = powerflow::PowerFlowSolution<f64>;
pub type PowerFlowSolution32 = powerflow::PowerFlowSolution<f32>;
pub type MhoZone64 = ras::MhoZone<f64>;
pub type MhoZone32 = ras::MhoZone<f32>;
