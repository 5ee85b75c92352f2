//! Spectral data of the periodic harmonic chain.
//!
//! Units: frequencies in units of the bare oscillator frequency, so the
//! dispersion is `ω(k) = √(1 − j0·cos k)` and the spectrum is gapped for
//! `j0 < 1`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::numeric::golden_max;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainParams {
    pub n_sites: usize,
    pub j0: f64,
    /// Inverse temperature; `f64::INFINITY` is the ground state.
    pub beta: f64,
}

impl ChainParams {
    pub fn new(n_sites: usize, j0: f64, beta: f64) -> Result<Self> {
        let p = ChainParams { n_sites, j0, beta };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sites < 2 {
            return invalid(format!("n_sites must be >= 2, got {}", self.n_sites));
        }
        check_j0(self.j0)?;
        if !(self.beta > 0.0) {
            return invalid(format!("beta must be positive, got {}", self.beta));
        }
        Ok(())
    }

    pub fn omega0(&self) -> f64 {
        (1.0 - self.j0).sqrt()
    }

    pub fn omega_max(&self) -> f64 {
        (1.0 + self.j0).sqrt()
    }
}

fn check_j0(j0: f64) -> Result<()> {
    if !(0.0..1.0).contains(&j0) {
        return invalid(format!("j0 must lie in [0, 1), got {j0}"));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingConfig {
    pub gamma_a: f64,
    pub gamma_b: f64,
    /// Number of sites between the two qubits along the shorter arc.
    pub distance: usize,
}

impl CouplingConfig {
    pub fn symmetric(gamma: f64, distance: usize) -> Self {
        CouplingConfig { gamma_a: gamma, gamma_b: gamma, distance }
    }

    pub fn validate(&self, n_sites: usize) -> Result<()> {
        if !(self.gamma_a >= 0.0 && self.gamma_b >= 0.0) {
            return invalid(format!(
                "couplings must be non-negative, got {} and {}",
                self.gamma_a, self.gamma_b
            ));
        }
        if 2 * self.distance > n_sites {
            return invalid(format!(
                "distance {} exceeds n_sites/2 for n_sites = {n_sites}",
                self.distance
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    /// Modes even under reflection about the midpoint of the two qubits.
    Symmetric,
    /// Modes odd under that reflection.
    Antisymmetric,
}

/// How the modes at the Brillouin-zone edges (k = 0 and, for even N, k = π)
/// couple to the qubits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeConvention {
    /// Apply `2√2γ/√N · cos(kD/2)` and `… sin(kD/2)` to every mode.
    Uniform,
    /// Edge modes are real standing waves of amplitude `2γ/√N`. The k = π
    /// mode alternates in sign along the chain and joins the branch that
    /// matches its parity under the qubit reflection.
    #[default]
    Halved,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSet {
    pub branch: Branch,
    pub wavenumbers: Vec<f64>,
    pub frequencies: Vec<f64>,
    /// Coupling of each mode to qubit a.
    pub coupling_a: Vec<f64>,
    /// Coupling of each mode to qubit b, including the sign of the mode
    /// function at site b (negative for the antisymmetric branch).
    pub coupling_b: Vec<f64>,
    pub occupations: Vec<f64>,
}

impl ModeSet {
    pub fn len(&self) -> usize {
        self.wavenumbers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.wavenumbers.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Timescales {
    pub omega0: f64,
    pub omega_max: f64,
    pub bandwidth: f64,
    pub t_max: f64,
    pub t_chain: f64,
    pub v_lr: f64,
    pub t_poincare: f64,
}

pub fn dispersion(j0: f64, k: f64) -> Result<f64> {
    check_j0(j0)?;
    Ok((1.0 - j0 * k.cos()).sqrt())
}

/// Non-negative wavenumbers of one branch over the index
/// ranges: `k^S = 2nπ/N`, `k^A = k^S + 2π/N`.
pub fn brillouin_wavenumbers(n_sites: usize, branch: Branch) -> Vec<f64> {
    let n = n_sites as f64;
    let count = match branch {
        Branch::Symmetric => n_sites.div_ceil(2),
        Branch::Antisymmetric => n_sites / 2,
    };
    let shift = match branch {
        Branch::Symmetric => 0.0,
        Branch::Antisymmetric => 1.0,
    };
    (0..count).map(|i| 2.0 * PI * (i as f64 + shift) / n).collect()
}

/// Per-qubit couplings of every mode in `branch`, paired with the
/// wavenumbers they belong to.
///
/// Under [`EdgeConvention::Halved`] with even N the k = π mode is moved to
/// the branch matching `(−1)^D`, so the returned wavenumbers may differ from
/// [`brillouin_wavenumbers`] by that one entry.
pub fn mode_couplings(
    config: &CouplingConfig,
    n_sites: usize,
    branch: Branch,
    convention: EdgeConvention,
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let n = n_sites as f64;
    let bulk = 2.0 * (2.0 / n).sqrt();
    let edge = 2.0 / n.sqrt();
    let d = config.distance as f64;
    let even_n = n_sites.is_multiple_of(2);
    let pi_parity_symmetric = config.distance.is_multiple_of(2);

    let mut ks = Vec::new();
    let mut ca = Vec::new();
    let mut cb = Vec::new();
    for k in brillouin_wavenumbers(n_sites, branch) {
        let is_pi = even_n && branch == Branch::Antisymmetric && ks_is_pi(k, n_sites);
        if convention == EdgeConvention::Halved && is_pi {
            continue;
        }
        let (a, b) = match branch {
            Branch::Symmetric => {
                let mut amp = bulk * (0.5 * k * d).cos();
                if convention == EdgeConvention::Halved && k == 0.0 {
                    amp = edge;
                }
                (config.gamma_a * amp, config.gamma_b * amp)
            }
            Branch::Antisymmetric => {
                let amp = bulk * (0.5 * k * d).sin();
                (config.gamma_a * amp, -config.gamma_b * amp)
            }
        };
        ks.push(k);
        ca.push(a);
        cb.push(b);
    }

    if convention == EdgeConvention::Halved && even_n {
        let wanted = if pi_parity_symmetric { Branch::Symmetric } else { Branch::Antisymmetric };
        if branch == wanted {
            let sign = if pi_parity_symmetric { 1.0 } else { -1.0 };
            ks.push(PI);
            ca.push(config.gamma_a * edge);
            cb.push(sign * config.gamma_b * edge);
        }
    }
    (ks, ca, cb)
}

fn ks_is_pi(k: f64, n_sites: usize) -> bool {
    // the last antisymmetric index of an even chain is exactly N/2 · 2π/N
    (k - PI).abs() < PI / (4.0 * n_sites as f64)
}

pub fn thermal_occupation(omega: f64, beta: f64) -> Result<f64> {
    if !(omega > 0.0) {
        return invalid(format!("frequency must be positive, got {omega}"));
    }
    if !(beta > 0.0) {
        return invalid(format!("beta must be positive, got {beta}"));
    }
    if beta.is_infinite() {
        return Ok(0.0);
    }
    Ok(1.0 / (beta * omega).exp_m1())
}

/// `2·max_k |dω/dk|`.
pub fn lieb_robinson_velocity(j0: f64) -> Result<f64> {
    check_j0(j0)?;
    if j0 == 0.0 {
        return Ok(0.0);
    }
    let group = |k: f64| j0 * k.sin() / (2.0 * (1.0 - j0 * k.cos()).sqrt());
    let grid = 4096;
    let h = PI / grid as f64;
    let best = (0..=grid)
        .map(|i| i as f64 * h)
        .max_by(|a, b| group(*a).total_cmp(&group(*b)))
        .unwrap_or(0.0);
    let lo = (best - h).max(0.0);
    let hi = (best + h).min(PI);
    let (_, vmax) = golden_max(lo, hi, 1e-10, group);
    Ok(2.0 * vmax)
}

pub fn timescales(params: &ChainParams) -> Result<Timescales> {
    params.validate()?;
    let omega0 = params.omega0();
    let omega_max = params.omega_max();
    let bandwidth = omega_max - omega0;
    let v_lr = lieb_robinson_velocity(params.j0)?;
    Ok(Timescales {
        omega0,
        omega_max,
        bandwidth,
        t_max: 1.0 / omega_max,
        t_chain: PI / bandwidth,
        v_lr,
        t_poincare: params.n_sites as f64 / (2.0 * v_lr),
    })
}

/// Both branches of the chain's normal modes for one coupling setup.
pub fn build_modes(
    params: &ChainParams,
    config: &CouplingConfig,
    convention: EdgeConvention,
) -> Result<[ModeSet; 2]> {
    params.validate()?;
    config.validate(params.n_sites)?;
    let build = |branch| -> Result<ModeSet> {
        let (wavenumbers, coupling_a, coupling_b) =
            mode_couplings(config, params.n_sites, branch, convention);
        let frequencies: Vec<f64> =
            wavenumbers.iter().map(|&k| (1.0 - params.j0 * k.cos()).sqrt()).collect();
        let occupations = frequencies
            .iter()
            .map(|&w| thermal_occupation(w, params.beta))
            .collect::<Result<Vec<_>>>()?;
        Ok(ModeSet { branch, wavenumbers, frequencies, coupling_a, coupling_b, occupations })
    };
    Ok([build(Branch::Symmetric)?, build(Branch::Antisymmetric)?])
}
