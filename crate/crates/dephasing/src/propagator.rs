//! The exact dephasing propagator.
//!
//! In the `σ_x` sector `s = (s_a, s_b)` every chain mode feels the linear
//! force `g_n(s) = (c_a,n·s_a + c_b,n·s_b)/2`. The element `ρ_ij` then
//! evolves as `ρ_ij(0)·exp(−d_ij(t) + i·p_ij(t))` with
//!
//! ```text
//! d_ij = ½ Σ_n (g_n(i) − g_n(j))² (2n̄_n + 1)(1 − cos ω_n t)/ω_n³
//! p_ij = ½ Σ_n (g_n(i)² − g_n(j)²)(t/ω_n² − sin(ω_n t)/ω_n³)
//! ```
//!
//! One rule covers equal and unequal couplings.

use nalgebra::Matrix4;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::{Branch, ModeSet};
use crate::error::{invalid, Result};
use crate::numeric::{one_minus_cos, pairwise_reduce, periodic_mean, x_minus_sin};
use crate::qubits::QubitState;

/// `σ_x` eigenvalues of the basis states `|++⟩, |+−⟩, |−+⟩, |−−⟩`.
pub const SECTORS: [(f64, f64); 4] = [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)];

/// Number of samples between exact re-evaluations of the phasors.
pub const RESYNC_STEPS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchForces {
    pub branch: Branch,
    pub frequencies: Vec<f64>,
    pub occupations: Vec<f64>,
    /// `forces[s][n]` is the force on mode n in sector s.
    pub forces: [Vec<f64>; 4],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorForceTable {
    pub branches: [BranchForces; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSample {
    pub t: f64,
    pub d: [[f64; 4]; 4],
    pub p: [[f64; 4]; 4],
}

impl KernelSample {
    /// Element-wise factor `exp(−d_ij + i·p_ij)`.
    pub fn factor(&self, i: usize, j: usize) -> Complex64 {
        Complex64::from_polar((-self.d[i][j]).exp(), self.p[i][j])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambShift {
    pub omega0_s: f64,
    pub omega0_a: f64,
    pub omega0: f64,
}

pub fn sector_forces(modes: &[ModeSet; 2]) -> Result<SectorForceTable> {
    let build = |m: &ModeSet| -> Result<BranchForces> {
        let n = m.len();
        if m.frequencies.len() != n
            || m.coupling_a.len() != n
            || m.coupling_b.len() != n
            || m.occupations.len() != n
        {
            return invalid(format!("mode set for {:?} has mismatched lengths", m.branch));
        }
        let forces = SECTORS.map(|(sa, sb)| {
            (0..n).map(|i| 0.5 * (m.coupling_a[i] * sa + m.coupling_b[i] * sb)).collect()
        });
        Ok(BranchForces {
            branch: m.branch,
            frequencies: m.frequencies.clone(),
            occupations: m.occupations.clone(),
            forces,
        })
    };
    if modes[0].branch == modes[1].branch {
        return invalid("mode sets must cover both branches");
    }
    Ok(SectorForceTable { branches: [build(&modes[0])?, build(&modes[1])?] })
}

const PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// Decay and phase exponents at one time, evaluated term by term from the
/// general rule.
pub fn kernel(table: &SectorForceTable, t: f64) -> Result<KernelSample> {
    if !(t >= 0.0) {
        return invalid(format!("time must be non-negative, got {t}"));
    }
    let mut d = [[0.0; 4]; 4];
    let mut p = [[0.0; 4]; 4];
    for b in &table.branches {
        let f = &b.forces;
        let sums: [f64; 12] = pairwise_reduce(b.frequencies.len(), &mut |r| {
            let mut acc = [0.0; 12];
            for n in r {
                let w = b.frequencies[n];
                let w3 = w * w * w;
                let h1 = (2.0 * b.occupations[n] + 1.0) * one_minus_cos(w * t) / w3;
                let h2 = x_minus_sin(w * t) / w3;
                for (q, &(i, j)) in PAIRS.iter().enumerate() {
                    let (gi, gj) = (f[i][n], f[j][n]);
                    acc[q] += 0.5 * (gi - gj) * (gi - gj) * h1;
                    acc[6 + q] += 0.5 * (gi * gi - gj * gj) * h2;
                }
            }
            acc
        });
        for (q, &(i, j)) in PAIRS.iter().enumerate() {
            d[i][j] += sums[q];
            p[i][j] += sums[6 + q];
        }
    }
    for &(i, j) in &PAIRS {
        d[j][i] = d[i][j];
        p[j][i] = -p[i][j];
    }
    Ok(KernelSample { t, d, p })
}

/// `Ω₀^α = ±Σ_n c_a,n c_b,n / ω_n²` per branch, signed so both are
/// non-negative for the physical mode functions; `Ω₀ = Ω₀^S − Ω₀^A`.
///
/// For equal couplings this is `Σ γ̃_n²/ω_n²`. The phase between the two
/// `σ_x` blocks grows as `Ω₀·t/2`.
pub fn lamb_shift(table: &SectorForceTable) -> LambShift {
    let mut out = [0.0; 2];
    for (slot, b) in out.iter_mut().zip(&table.branches) {
        // c_a c_b = g(++)² − g(+−)²
        let terms: Vec<f64> = (0..b.frequencies.len())
            .map(|n| {
                let w = b.frequencies[n];
                (b.forces[0][n].powi(2) - b.forces[1][n].powi(2)) / (w * w)
            })
            .collect();
        let s = crate::numeric::pairwise_sum(&terms);
        *slot = match b.branch {
            Branch::Symmetric => s,
            Branch::Antisymmetric => -s,
        };
    }
    let (omega0_s, omega0_a) = match table.branches[0].branch {
        Branch::Symmetric => (out[0], out[1]),
        Branch::Antisymmetric => (out[1], out[0]),
    };
    LambShift { omega0_s, omega0_a, omega0: omega0_s - omega0_a }
}

/// Continuum limit `(4γ²/2π)∫₀^{2π} cos(kD)/ω(k)² dk`.
pub fn lamb_shift_continuum(gamma: f64, j0: f64, distance: usize) -> Result<f64> {
    crate::chain::dispersion(j0, 0.0)?;
    let points = 4096 + 4 * distance;
    let d = distance as f64;
    let mean = periodic_mean(points, |k| (k * d).cos() / (1.0 - j0 * k.cos()));
    Ok(4.0 * gamma * gamma * mean)
}

/// Multiplies every element of `m` by its propagator factor. Works for any
/// 4×4 matrix, Hermitian or not.
pub fn propagate_matrix(m: &Matrix4<Complex64>, k: &KernelSample) -> Matrix4<Complex64> {
    Matrix4::from_fn(|i, j| if i == j { m[(i, j)] } else { m[(i, j)] * k.factor(i, j) })
}

pub fn apply_propagator(rho0: &QubitState, table: &SectorForceTable, t: f64) -> Result<QubitState> {
    rho0.validate()?;
    let k = kernel(table, t)?;
    Ok(QubitState::from_matrix_unchecked(propagate_matrix(rho0.matrix(), &k)))
}

/// Precomputed per-mode coefficients for fast repeated kernel evaluation.
///
/// Uses `g(−s) = −g(s)`: every decay exponent is a combination of three
/// mode sums and every phase is `±` one mode sum.
#[derive(Debug, Clone)]
pub struct KernelPlan {
    omega: Vec<f64>,
    u0: Vec<f64>,
    u1: Vec<f64>,
    u01: Vec<f64>,
    v: Vec<f64>,
}

impl KernelPlan {
    pub fn new(table: &SectorForceTable) -> Self {
        let mut plan =
            KernelPlan { omega: vec![], u0: vec![], u1: vec![], u01: vec![], v: vec![] };
        for b in &table.branches {
            for n in 0..b.frequencies.len() {
                let (g0, g1) = (b.forces[0][n], b.forces[1][n]);
                if g0 == 0.0 && g1 == 0.0 {
                    continue;
                }
                let w = b.frequencies[n];
                let w3 = w * w * w;
                let h = 0.5 * (2.0 * b.occupations[n] + 1.0) / w3;
                plan.omega.push(w);
                plan.u0.push(h * g0 * g0);
                plan.u1.push(h * g1 * g1);
                plan.u01.push(h * g0 * g1);
                plan.v.push(0.5 * (g0 * g0 - g1 * g1) / w3);
            }
        }
        plan
    }

    pub fn n_modes(&self) -> usize {
        self.omega.len()
    }

    /// Kernel at one time with exact trigonometry.
    pub fn at(&self, t: f64) -> KernelSample {
        let sums = pairwise_reduce(self.omega.len(), &mut |r| {
            let mut acc = [0.0; 4];
            for n in r {
                let x = self.omega[n] * t;
                let h1 = one_minus_cos(x);
                acc[0] += self.u0[n] * h1;
                acc[1] += self.u1[n] * h1;
                acc[2] += self.u01[n] * h1;
                acc[3] += self.v[n] * x_minus_sin(x);
            }
            acc
        });
        expand(t, sums)
    }

    /// Evaluates the kernel on `t_k = t0 + k·dt`, `k < n`, and maps each
    /// sample through `f`.
    ///
    /// Phasors advance by a fixed rotation per step and are recomputed
    /// exactly every [`RESYNC_STEPS`] samples. Chunks are aligned to those
    /// resync points, so the result does not depend on the thread count.
    pub fn map_uniform<T, F>(&self, t0: f64, dt: f64, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(&KernelSample) -> T + Sync,
    {
        let rot: Vec<(f64, f64)> = self.omega.iter().map(|w| ((w * dt).cos(), (w * dt).sin())).collect();
        let chunks: Vec<usize> = (0..n.div_ceil(RESYNC_STEPS)).collect();
        let parts: Vec<Vec<T>> = chunks
            .par_iter()
            .map(|&c| {
                let start = c * RESYNC_STEPS;
                let end = (start + RESYNC_STEPS).min(n);
                let mut out = Vec::with_capacity(end - start);
                let t_start = t0 + start as f64 * dt;
                let mut cs: Vec<f64> = self.omega.iter().map(|w| (w * t_start).cos()).collect();
                let mut sn: Vec<f64> = self.omega.iter().map(|w| (w * t_start).sin()).collect();
                for k in start..end {
                    let t = t0 + k as f64 * dt;
                    let sums = pairwise_reduce(self.omega.len(), &mut |r| {
                        let mut acc = [0.0; 4];
                        for m in r {
                            let (c, s) = (cs[m], sn[m]);
                            let h1 = 1.0 - c;
                            acc[0] += self.u0[m] * h1;
                            acc[1] += self.u1[m] * h1;
                            acc[2] += self.u01[m] * h1;
                            acc[3] += self.v[m] * (self.omega[m] * t - s);
                            let (rc, rs) = rot[m];
                            cs[m] = c * rc - s * rs;
                            sn[m] = s * rc + c * rs;
                        }
                        acc
                    });
                    out.push(f(&expand(t, sums)));
                }
                out
            })
            .collect();
        parts.into_iter().flatten().collect()
    }
}

fn expand(t: f64, [d0, d1, x, ph]: [f64; 4]) -> KernelSample {
    let mut d = [[0.0; 4]; 4];
    let mut p = [[0.0; 4]; 4];
    d[0][3] = 4.0 * d0;
    d[1][2] = 4.0 * d1;
    let minus = (d0 + d1 - 2.0 * x).max(0.0);
    let plus = (d0 + d1 + 2.0 * x).max(0.0);
    d[0][1] = minus;
    d[2][3] = minus;
    d[0][2] = plus;
    d[1][3] = plus;
    p[0][1] = ph;
    p[0][2] = ph;
    p[1][3] = -ph;
    p[2][3] = -ph;
    for &(i, j) in &PAIRS {
        d[j][i] = d[i][j];
        p[j][i] = -p[i][j];
    }
    KernelSample { t, d, p }
}
