//! Pauli expectations and two-qubit correlation functions.

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::propagator::{kernel, propagate_matrix, SectorForceTable};
use crate::qubits::QubitState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn label(self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        }
    }

    /// Single-qubit Pauli matrix in the `σ_x` eigenbasis `{|+⟩, |−⟩}`.
    pub fn pauli(self) -> Matrix2<Complex64> {
        let c = |re, im| Complex64::new(re, im);
        match self {
            Axis::X => Matrix2::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)),
            Axis::Y => Matrix2::new(c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)),
            Axis::Z => Matrix2::new(c(0.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(0.0, 0.0)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationRequest {
    pub axis_a: Axis,
    pub axis_b: Axis,
    pub t: f64,
    pub tau: f64,
}

/// `⟨σ_x,y,z^a⟩` followed by `⟨σ_x,y,z^b⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PauliExpectations {
    pub a: [f64; 3],
    pub b: [f64; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoTimeCorrelation {
    /// `⟨σ_α^a(t) σ_β^b(t + τ)⟩`, complex in general.
    pub moment: Complex64,
    /// `moment − ⟨σ_α^a(t)⟩⟨σ_β^b(t + τ)⟩`.
    pub connected: Complex64,
}

fn kron(a: &Matrix2<Complex64>, b: &Matrix2<Complex64>) -> Matrix4<Complex64> {
    Matrix4::from_fn(|i, j| a[(i / 2, j / 2)] * b[(i % 2, j % 2)])
}

pub fn op_a(axis: Axis) -> Matrix4<Complex64> {
    kron(&axis.pauli(), &Matrix2::identity())
}

pub fn op_b(axis: Axis) -> Matrix4<Complex64> {
    kron(&Matrix2::identity(), &axis.pauli())
}

/// `tr(op · m)` for any 4×4 matrix.
fn trace_with(op: &Matrix4<Complex64>, m: &Matrix4<Complex64>) -> Complex64 {
    (op * m).trace()
}

fn evolved(rho0: &QubitState, table: &SectorForceTable, t: f64) -> Result<Matrix4<Complex64>> {
    rho0.validate()?;
    Ok(propagate_matrix(rho0.matrix(), &kernel(table, t)?))
}

/// Expectations of the six single-qubit Pauli operators of a state.
pub fn expectations_of(m: &Matrix4<Complex64>) -> PauliExpectations {
    PauliExpectations {
        a: Axis::ALL.map(|ax| trace_with(&op_a(ax), m).re),
        b: Axis::ALL.map(|ax| trace_with(&op_b(ax), m).re),
    }
}

pub fn pauli_expectations(
    rho0: &QubitState,
    table: &SectorForceTable,
    t: f64,
) -> Result<PauliExpectations> {
    Ok(expectations_of(&evolved(rho0, table, t)?))
}

/// Connected equal-time correlator of a state.
pub fn connected_of(m: &Matrix4<Complex64>, axes: (Axis, Axis)) -> f64 {
    let joint = trace_with(&(op_a(axes.0) * op_b(axes.1)), m).re;
    let ea = trace_with(&op_a(axes.0), m).re;
    let eb = trace_with(&op_b(axes.1), m).re;
    joint - ea * eb
}

/// Connected `⟨σ_α^a σ_β^b⟩ − ⟨σ_α^a⟩⟨σ_β^b⟩` at time `t`.
pub fn equal_time_correlations(
    rho0: &QubitState,
    table: &SectorForceTable,
    t: f64,
    axes: (Axis, Axis),
) -> Result<f64> {
    Ok(connected_of(&evolved(rho0, table, t)?, axes))
}

/// `⟨σ_α^a(t) σ_β^b(t + τ)⟩`: evolve to `t`, multiply by `σ_α^a` on the
/// right, propagate the resulting matrix by `τ` and trace with `σ_β^b`.
pub fn two_time_correlations(
    rho0: &QubitState,
    table: &SectorForceTable,
    t: f64,
    tau: f64,
    axes: (Axis, Axis),
) -> Result<TwoTimeCorrelation> {
    if !(tau >= 0.0) {
        return invalid(format!("lag must be non-negative, got {tau}"));
    }
    let rho_t = evolved(rho0, table, t)?;
    let modified = rho_t * op_a(axes.0);
    let k_tau = kernel(table, tau)?;
    let moment = trace_with(&op_b(axes.1), &propagate_matrix(&modified, &k_tau));
    let ea = trace_with(&op_a(axes.0), &rho_t).re;
    let eb = trace_with(&op_b(axes.1), &evolved(rho0, table, t + tau)?).re;
    Ok(TwoTimeCorrelation { moment, connected: moment - Complex64::new(ea * eb, 0.0) })
}
