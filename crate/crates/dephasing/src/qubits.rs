//! Two-qubit states in the `σ_x` product basis and Wootters concurrence.
//!
//! Basis ordering is `|++⟩, |+−⟩, |−+⟩, |−−⟩` (index `2·a + b`, with 0 for
//! `+`). Within one qubit the Pauli matrices read `X = diag(1, −1)`,
//! `Y = [[0, 1], [1, 0]]`, `Z = [[0, i], [−i, 0]]`, so `cos θ|+⟩ + sin θ|−⟩`
//! at `θ = π/4` is the `+1` eigenstate of `σ_y`.

use nalgebra::{Matrix4, SymmetricEigen, Vector4, SVD};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const HERMITICITY_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-12;
const POSITIVITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitState(Matrix4<Complex64>);

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BlochAngles {
    pub theta_a: f64,
    pub phi_a: f64,
    pub theta_b: f64,
    pub phi_b: f64,
}

impl BlochAngles {
    pub fn uniform(theta: f64, phi: f64) -> Self {
        BlochAngles { theta_a: theta, phi_a: phi, theta_b: theta, phi_b: phi }
    }
}

impl QubitState {
    pub fn new(m: Matrix4<Complex64>) -> Result<Self> {
        let s = QubitState(m);
        s.validate()?;
        Ok(s)
    }

    pub fn from_matrix_unchecked(m: Matrix4<Complex64>) -> Self {
        QubitState(m)
    }

    pub fn matrix(&self) -> &Matrix4<Complex64> {
        &self.0
    }

    pub fn validate(&self) -> Result<()> {
        let m = &self.0;
        let herm = (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if !(herm <= HERMITICITY_TOL) {
            return Err(Error::InvalidState(format!("not Hermitian (deviation {herm:.3e})")));
        }
        let tr = m.trace();
        if !((tr - Complex64::new(1.0, 0.0)).norm() <= TRACE_TOL) {
            return Err(Error::InvalidState(format!("trace is {tr}")));
        }
        let min = hermitian_eigen(m)?.0.min();
        if !(min >= -POSITIVITY_TOL) {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(())
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    pub fn purity(&self) -> f64 {
        (self.0 * self.0).trace().re
    }

    /// Reduced state of qubit a, as a 2×2 matrix in row-major order.
    pub fn reduced_a(&self) -> [[Complex64; 2]; 2] {
        let m = &self.0;
        let mut r = [[Complex64::new(0.0, 0.0); 2]; 2];
        for (a, row) in r.iter_mut().enumerate() {
            for (a2, v) in row.iter_mut().enumerate() {
                *v = m[(2 * a, 2 * a2)] + m[(2 * a + 1, 2 * a2 + 1)];
            }
        }
        r
    }
}

/// Pure product state `(cos θ_a|+⟩ + e^{iφ_a} sin θ_a|−⟩) ⊗ (…)_b`.
pub fn state_from_bloch(angles: &BlochAngles) -> QubitState {
    let single = |theta: f64, phi: f64| {
        [Complex64::new(theta.cos(), 0.0), Complex64::from_polar(theta.sin(), phi)]
    };
    let a = single(angles.theta_a, angles.phi_a);
    let b = single(angles.theta_b, angles.phi_b);
    let psi = Vector4::new(a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]);
    QubitState(psi * psi.adjoint())
}

fn hadamard2() -> Matrix4<Complex64> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let one = [[h, h], [h, -h]];
    Matrix4::from_fn(|i, j| Complex64::new(one[i / 2][j / 2] * one[i % 2][j % 2], 0.0))
}

/// Rotates a matrix from the `σ_x` product basis to the `σ_z` product basis.
/// The rotation is real and involutive, so the same call maps back.
pub fn to_z_basis(rho_x: &Matrix4<Complex64>) -> Matrix4<Complex64> {
    let h = hadamard2();
    h * rho_x * h
}

fn hermitian_eigen(m: &Matrix4<Complex64>) -> Result<(Vector4<f64>, Matrix4<Complex64>)> {
    let herm = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    match SymmetricEigen::try_new(herm, 1e-15, 10_000) {
        Some(e) => Ok((e.eigenvalues, e.eigenvectors)),
        None => Err(Error::Numeric {
            message: "Hermitian eigensolver did not converge".into(),
            matrix: Some(format!("{m:?}")),
        }),
    }
}

/// Wootters concurrence `max(0, λ₁ − λ₂ − λ₃ − λ₄)`.
///
/// With `ρ_z = W W†` and `W = V·√Λ`, the `λ_i` are the singular values of
/// `Wᵀ (σ_y⊗σ_y) W`, which equal the eigenvalues of `√(√ρ ρ̃ √ρ)`.
pub fn concurrence(rho: &QubitState) -> Result<f64> {
    let rz = to_z_basis(rho.matrix());
    let (vals, vecs) = hermitian_eigen(&rz)?;
    let w = Matrix4::from_fn(|i, j| vecs[(i, j)] * vals[j].max(0.0).sqrt());
    let tau = w.transpose() * sigma_yy() * w;
    let svd = SVD::try_new(tau, false, false, 1e-15, 10_000).ok_or_else(|| Error::Numeric {
        message: "SVD did not converge".into(),
        matrix: Some(format!("{:?}", rho.matrix())),
    })?;
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    let c = s[0] - s[1] - s[2] - s[3];
    Ok(if c < 0.0 { 0.0 } else { c.min(1.0) })
}

/// `σ_y ⊗ σ_y` in the `σ_z` product basis.
pub fn sigma_yy() -> Matrix4<Complex64> {
    let mut m = Matrix4::zeros();
    m[(0, 3)] = Complex64::new(-1.0, 0.0);
    m[(1, 2)] = Complex64::new(1.0, 0.0);
    m[(2, 1)] = Complex64::new(1.0, 0.0);
    m[(3, 0)] = Complex64::new(-1.0, 0.0);
    m
}

/// Weak-coupling closed form `|sin 2θ_a · sin 2θ_b · sin(Ω₀ t)|`.
pub fn concurrence_weak_analytic(theta_a: f64, theta_b: f64, omega0: f64, t: f64) -> f64 {
    ((2.0 * theta_a).sin() * (2.0 * theta_b).sin() * (omega0 * t).sin()).abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn uniform_superposition() {
        let s = state_from_bloch(&BlochAngles::uniform(FRAC_PI_4, 0.0));
        for z in s.matrix().iter() {
            assert!((z - Complex64::new(0.25, 0.0)).norm() < 1e-15);
        }
        assert!((s.purity() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn x_eigenstate_is_uniform_in_z_basis() {
        let s = state_from_bloch(&BlochAngles::default());
        assert_eq!(s.matrix()[(0, 0)], Complex64::new(1.0, 0.0));
        let z = to_z_basis(s.matrix());
        for v in z.iter() {
            assert!((v - Complex64::new(0.25, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn bell_and_product() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let psi = Vector4::new(h, 0.0, 0.0, h).map(|x| Complex64::new(x, 0.0));
        let bell = QubitState::new(psi * psi.adjoint()).unwrap();
        assert!((concurrence(&bell).unwrap() - 1.0).abs() < 1e-12);
        let prod = state_from_bloch(&BlochAngles { theta_a: 0.3, phi_a: 1.1, theta_b: 1.2, phi_b: -0.4 });
        assert!(concurrence(&prod).unwrap() < 1e-8);
    }

    #[test]
    fn weak_analytic_examples() {
        let t = std::f64::consts::FRAC_PI_2 / 0.01;
        assert!((concurrence_weak_analytic(FRAC_PI_4, FRAC_PI_4, 0.01, t) - 1.0).abs() < 1e-15);
        assert_eq!(concurrence_weak_analytic(0.0, FRAC_PI_4, 0.01, t), 0.0);
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut m = Matrix4::<Complex64>::identity() * Complex64::new(0.25, 0.0);
        m[(0, 1)] = Complex64::new(0.1, 0.0);
        assert!(QubitState::new(m).is_err());
    }
}
