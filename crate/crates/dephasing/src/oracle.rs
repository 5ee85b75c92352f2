//! Brute-force check: the full qubit–chain evolution in a truncated Fock
//! space.
//!
//! `σ_x` is conserved, so the joint unitary splits into one chain
//! Hamiltonian per sector,
//! `H_s = H_c − (γ_a s_a x_{ℓa} + γ_b s_b x_{ℓb})`, with
//! `H_c = Σ_ℓ (n_ℓ + ½) − (j0/2) Σ_ℓ x_ℓ x_{ℓ+1}` (periodic) and
//! `x = (a + a†)/√2`. The reduced element `(i, j)` is
//! `ρ_ij(0)·tr[e^{−iH_i t} R e^{iH_j t}]` with `R` the thermal state of
//! `H_c`. Nothing here uses the normal-mode formulas.

use std::collections::HashMap;

use faer::{Mat, Side};
use nalgebra::Matrix4;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::propagator::SECTORS;
use crate::qubits::QubitState;

pub const MAX_DIMENSION: usize = 100_000;

/// Thermal weights below this fraction of the ground-state weight are dropped.
const THERMAL_CUTOFF: f64 = 1e-13;
/// Eigenstates whose squared overlap with the thermal state is below this
/// are dropped from the time evolution.
const OVERLAP_CUTOFF: f64 = 1e-22;
/// Total weight of time-evolution terms that may be dropped per element.
const DISCARD_BUDGET: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "cutoff")]
pub enum Truncation {
    /// All occupation tuples with `Σ n_ℓ ≤ cutoff`.
    TotalQuanta(usize),
    /// All tuples with `n_ℓ ≤ cutoff` on every site.
    PerSite(usize),
}

impl Truncation {
    pub fn cutoff(self) -> usize {
        match self {
            Truncation::TotalQuanta(n) | Truncation::PerSite(n) => n,
        }
    }

    pub fn with_cutoff(self, n: usize) -> Self {
        match self {
            Truncation::TotalQuanta(_) => Truncation::TotalQuanta(n),
            Truncation::PerSite(_) => Truncation::PerSite(n),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FockConfig {
    pub n_sites: usize,
    pub truncation: Truncation,
    pub beta: f64,
    pub j0: f64,
    pub gamma_a: f64,
    pub gamma_b: f64,
    pub distance: usize,
}

impl FockConfig {
    pub fn validate(&self) -> Result<()> {
        if !(2..=6).contains(&self.n_sites) {
            return invalid(format!("oracle supports 2..=6 sites, got {}", self.n_sites));
        }
        if !(0.0..1.0).contains(&self.j0) {
            return invalid(format!("j0 must lie in [0, 1), got {}", self.j0));
        }
        if !(self.beta > 0.0) {
            return invalid(format!("beta must be positive, got {}", self.beta));
        }
        if 2 * self.distance > self.n_sites {
            return invalid(format!("distance {} too large for {} sites", self.distance, self.n_sites));
        }
        let dim = basis_dimension(self.n_sites, self.truncation);
        if dim > MAX_DIMENSION {
            return invalid(format!("Fock dimension {dim} exceeds {MAX_DIMENSION}"));
        }
        Ok(())
    }
}

pub fn basis_dimension(n_sites: usize, truncation: Truncation) -> usize {
    match truncation {
        Truncation::PerSite(m) => (m + 1).saturating_pow(n_sites as u32),
        Truncation::TotalQuanta(m) => {
            // C(m + N, N)
            let mut c: usize = 1;
            for i in 1..=n_sites {
                c = c * (m + i) / i;
            }
            c
        }
    }
}

struct FockBasis {
    states: Vec<Vec<u16>>,
    index: HashMap<Vec<u16>, usize>,
}

impl FockBasis {
    fn new(n_sites: usize, truncation: Truncation) -> Self {
        let mut states = Vec::new();
        let mut cur = vec![0u16; n_sites];
        fn rec(site: usize, budget: usize, tr: Truncation, cur: &mut Vec<u16>, out: &mut Vec<Vec<u16>>) {
            if site == cur.len() {
                out.push(cur.clone());
                return;
            }
            let top = match tr {
                Truncation::TotalQuanta(_) => budget,
                Truncation::PerSite(m) => m,
            };
            for n in 0..=top {
                cur[site] = n as u16;
                let left = match tr {
                    Truncation::TotalQuanta(_) => budget - n,
                    Truncation::PerSite(_) => budget,
                };
                rec(site + 1, left, tr, cur, out);
            }
        }
        rec(0, truncation.cutoff(), truncation, &mut cur, &mut states);
        let index = states.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        FockBasis { states, index }
    }

    fn dim(&self) -> usize {
        self.states.len()
    }

    fn parity(&self, i: usize) -> f64 {
        let q: u32 = self.states[i].iter().map(|&n| n as u32).sum();
        if q.is_multiple_of(2) { 1.0 } else { -1.0 }
    }

    /// `x_site |state⟩` as (target, amplitude) pairs inside the basis.
    fn x_on(&self, i: usize, site: usize) -> Vec<(usize, f64)> {
        let mut out = Vec::with_capacity(2);
        let s = &self.states[i];
        let n = s[site] as f64;
        let mut t = s.clone();
        t[site] += 1;
        if let Some(&j) = self.index.get(&t) {
            out.push((j, ((n + 1.0) / 2.0).sqrt()));
        }
        if s[site] > 0 {
            let mut t = s.clone();
            t[site] -= 1;
            if let Some(&j) = self.index.get(&t) {
                out.push((j, (n / 2.0).sqrt()));
            }
        }
        out
    }
}

fn chain_hamiltonian(basis: &FockBasis, n_sites: usize, j0: f64) -> Mat<f64> {
    let dim = basis.dim();
    let mut h = Mat::<f64>::zeros(dim, dim);
    for i in 0..dim {
        let q: f64 = basis.states[i].iter().map(|&n| n as f64 + 0.5).sum();
        h[(i, i)] += q;
        for l in 0..n_sites {
            let r = (l + 1) % n_sites;
            // x_l x_r |i⟩, truncated products included only when both steps stay in the basis
            for (k, a1) in basis.x_on(i, r) {
                for (j, a2) in basis.x_on(k, l) {
                    h[(j, i)] -= 0.5 * j0 * a1 * a2;
                }
            }
        }
    }
    h
}

/// The four sector Hamiltonians in the truncated product Fock basis.
pub fn build_sector_hamiltonians(config: &FockConfig) -> Result<[Mat<f64>; 4]> {
    config.validate()?;
    let basis = FockBasis::new(config.n_sites, config.truncation);
    let hc = chain_hamiltonian(&basis, config.n_sites, config.j0);
    Ok(SECTORS.map(|s| sector_hamiltonian(&basis, &hc, config, s)))
}

fn sector_hamiltonian(basis: &FockBasis, hc: &Mat<f64>, config: &FockConfig, s: (f64, f64)) -> Mat<f64> {
    let mut h = hc.clone();
    let sites = [(0, config.gamma_a * s.0), (config.distance % config.n_sites, config.gamma_b * s.1)];
    for i in 0..basis.dim() {
        for &(site, f) in &sites {
            for (j, a) in basis.x_on(i, site) {
                h[(j, i)] -= f * a;
            }
        }
    }
    h
}

fn eigen(h: &Mat<f64>) -> Result<(Vec<f64>, Mat<f64>)> {
    let e = h.self_adjoint_eigen(Side::Lower).map_err(|e| Error::Numeric {
        message: format!("Fock-space eigensolver failed: {e:?}"),
        matrix: None,
    })?;
    let vals: Vec<f64> = (0..h.nrows()).map(|i| e.S().column_vector()[i]).collect();
    Ok((vals, e.U().to_owned()))
}

/// Eigendecompositions for one chain and coupling setup at one cutoff.
pub struct FockSystem {
    pub config: FockConfig,
    basis: FockBasis,
    chain_energies: Vec<f64>,
    chain_vectors: Mat<f64>,
    chain_parity: Vec<f64>,
    /// Eigenpairs of `H_{++}` and `H_{+−}`; the other two sectors follow by
    /// the parity map `x → −x`.
    sectors: [(Vec<f64>, Mat<f64>); 2],
}

impl FockSystem {
    pub fn new(config: &FockConfig) -> Result<Self> {
        config.validate()?;
        let basis = FockBasis::new(config.n_sites, config.truncation);
        let hc = chain_hamiltonian(&basis, config.n_sites, config.j0);

        // H_c commutes with parity: diagonalize each parity block so every
        // eigenvector has a definite parity
        let dim = basis.dim();
        let mut chain: Vec<(f64, f64, Vec<f64>)> = Vec::with_capacity(dim);
        for par in [1.0, -1.0] {
            let idx: Vec<usize> = (0..dim).filter(|&i| basis.parity(i) == par).collect();
            if idx.is_empty() {
                continue;
            }
            let block = Mat::<f64>::from_fn(idx.len(), idx.len(), |r, c| hc[(idx[r], idx[c])]);
            let (vals, vecs) = eigen(&block)?;
            for (k, &v) in vals.iter().enumerate() {
                let mut full = vec![0.0; dim];
                for (r, &i) in idx.iter().enumerate() {
                    full[i] = vecs[(r, k)];
                }
                chain.push((v, par, full));
            }
        }
        chain.sort_by(|a, b| a.0.total_cmp(&b.0));
        let chain_energies: Vec<f64> = chain.iter().map(|c| c.0).collect();
        let chain_parity: Vec<f64> = chain.iter().map(|c| c.1).collect();
        let chain_vectors = Mat::<f64>::from_fn(dim, dim, |r, c| chain[c].2[r]);

        let s0 = eigen(&sector_hamiltonian(&basis, &hc, config, SECTORS[0]))?;
        let s1 = eigen(&sector_hamiltonian(&basis, &hc, config, SECTORS[1]))?;
        Ok(FockSystem {
            config: *config,
            basis,
            chain_energies,
            chain_vectors,
            chain_parity,
            sectors: [s0, s1],
        })
    }

    pub fn dimension(&self) -> usize {
        self.basis.dim()
    }

    /// `‖U U† − 1‖_max` for the sector `s` evolution at time `t`.
    pub fn unitarity_defect(&self, s: usize, t: f64) -> f64 {
        let (vals, vecs) = &self.sectors[s % 2];
        let dim = self.dimension();
        let re = Mat::<f64>::from_fn(dim, dim, |r, c| vecs[(r, c)] * (vals[c] * t).cos());
        let im = Mat::<f64>::from_fn(dim, dim, |r, c| -vecs[(r, c)] * (vals[c] * t).sin());
        // U U† = (A + iB)(Aᵀ − iBᵀ) = AAᵀ + BBᵀ + i(BAᵀ − ABᵀ)
        let real = &re * re.transpose() + &im * im.transpose();
        let imag = &im * re.transpose() - &re * im.transpose();
        let mut worst = 0.0f64;
        for r in 0..dim {
            for c in 0..dim {
                let target = if r == c { 1.0 } else { 0.0 };
                worst = worst.max((real[(r, c)] - target).abs()).max(imag[(r, c)].abs());
            }
        }
        worst
    }

    /// `tr[e^{−iH_i t} R e^{iH_j t}]` for all 16 sector pairs at each time.
    pub fn influence(&self, beta: f64, times: &[f64]) -> Result<Vec<Matrix4<Complex64>>> {
        if !(beta > 0.0) {
            return invalid(format!("beta must be positive, got {beta}"));
        }
        let dim = self.dimension();
        let e0 = self.chain_energies[0];
        let weights: Vec<f64> = self
            .chain_energies
            .iter()
            .map(|&e| if beta.is_infinite() { if e == e0 { 1.0 } else { 0.0 } } else { (-beta * (e - e0)).exp() })
            .collect();
        let kept: Vec<usize> = (0..dim).filter(|&k| weights[k] > THERMAL_CUTOFF).collect();
        let z: f64 = kept.iter().map(|&k| weights[k]).sum();
        let rank = kept.len();
        // √R factor in the Fock basis
        let root = Mat::<f64>::from_fn(dim, rank, |r, c| {
            self.chain_vectors[(r, kept[c])] * (weights[kept[c]] / z).sqrt()
        });
        let root_parity: Vec<f64> = kept.iter().map(|&k| self.chain_parity[k]).collect();

        // B_s = V_sᵀ √R for the two computed sectors; flipped sectors pick up
        // the parity of each thermal eigenvector
        let b_base: [Mat<f64>; 2] = [0, 1].map(|s| self.sectors[s].1.transpose() * &root);
        let sector_of = |s: usize| -> (usize, bool) {
            match s {
                0 => (0, false),
                1 => (1, false),
                2 => (1, true),
                _ => (0, true),
            }
        };
        let parity_of_basis: Vec<f64> = (0..dim).map(|i| self.basis.parity(i)).collect();

        struct Reduced {
            base: usize,
            flip: bool,
            rows: Vec<usize>,
            energies: Vec<f64>,
            b: Mat<f64>,
        }
        let reduced: Vec<Reduced> = (0..4)
            .map(|s| {
                let (base, flip) = sector_of(s);
                let vals = &self.sectors[base].0;
                let b = &b_base[base];
                let rows: Vec<usize> = (0..dim)
                    .filter(|&m| (0..rank).map(|k| b[(m, k)].powi(2)).sum::<f64>() > OVERLAP_CUTOFF)
                    .collect();
                let sign = |k: usize| if flip { root_parity[k] } else { 1.0 };
                Reduced {
                    base,
                    flip,
                    energies: rows.iter().map(|&m| vals[m]).collect(),
                    b: Mat::from_fn(rows.len(), rank, |r, k| b[(rows[r], k)] * sign(k)),
                    rows,
                }
            })
            .collect();
        let columns = |r: &Reduced, flip: bool| {
            let vecs = &self.sectors[r.base].1;
            Mat::<f64>::from_fn(dim, r.rows.len(), |q, c| {
                vecs[(q, r.rows[c])] * if flip { parity_of_basis[q] } else { 1.0 }
            })
        };

        let mut out = vec![Matrix4::<Complex64>::zeros(); times.len()];
        for i in 0..4 {
            for j in i..4 {
                let (ri, rj) = (&reduced[i], &reduced[j]);
                let (ni, nj) = (ri.energies.len(), rj.energies.len());
                // W_{mm'} = (B_i B_jᵀ)_{mm'} · (V_iᵀ V_j)_{mm'}
                let a = &ri.b * rj.b.transpose();
                let relative = ri.flip != rj.flip;
                let mut entries: Vec<(u32, u32, f64)> = Vec::new();
                if ri.base == rj.base && !relative {
                    for (m, &x) in ri.rows.iter().enumerate() {
                        if let Ok(m2) = rj.rows.binary_search(&x) {
                            entries.push((m as u32, m2 as u32, a[(m, m2)]));
                        }
                    }
                } else {
                    let o = columns(ri, false).transpose() * columns(rj, relative);
                    entries.reserve(ni * nj);
                    for m in 0..ni {
                        for m2 in 0..nj {
                            entries.push((m as u32, m2 as u32, a[(m, m2)] * o[(m, m2)]));
                        }
                    }
                }
                let entries = drop_smallest(entries, DISCARD_BUDGET);
                for (ti, &t) in times.iter().enumerate() {
                    let ei: Vec<Complex64> = ri.energies.iter().map(|&e| Complex64::from_polar(1.0, -e * t)).collect();
                    let ej: Vec<Complex64> = rj.energies.iter().map(|&e| Complex64::from_polar(1.0, e * t)).collect();
                    let total: Complex64 =
                        entries.iter().map(|&(m, m2, w)| ei[m as usize] * ej[m2 as usize] * w).sum();
                    out[ti][(i, j)] = total;
                    out[ti][(j, i)] = total.conj();
                }
            }
        }
        Ok(out)
    }

    pub fn reduced_density(&self, rho0: &QubitState, times: &[f64]) -> Result<Vec<QubitState>> {
        rho0.validate()?;
        let infl = self.influence(self.config.beta, times)?;
        Ok(infl
            .into_iter()
            .map(|f| QubitState::from_matrix_unchecked(rho0.matrix().component_mul(&f)))
            .collect())
    }
}

/// Drops the smallest-magnitude terms while their summed magnitude stays
/// within `budget`, which bounds the error at every time.
fn drop_smallest(mut entries: Vec<(u32, u32, f64)>, budget: f64) -> Vec<(u32, u32, f64)> {
    entries.sort_unstable_by(|x, y| y.2.abs().total_cmp(&x.2.abs()));
    let mut dropped = 0.0;
    while let Some(last) = entries.last() {
        if dropped + last.2.abs() > budget {
            break;
        }
        dropped += last.2.abs();
        entries.pop();
    }
    entries
}

/// Reduced density matrices from the truncated Fock simulation at one cutoff.
pub fn oracle_reduced_density(rho0: &QubitState, config: &FockConfig, times: &[f64]) -> Result<Vec<QubitState>> {
    FockSystem::new(config)?.reduced_density(rho0, times)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergencePolicy {
    /// Cutoff increment between successive runs.
    pub step: usize,
    /// Largest cutoff tried before giving up.
    pub max_cutoff: usize,
    /// Largest allowed element difference between successive cutoffs.
    pub tolerance: f64,
}

impl Default for ConvergencePolicy {
    fn default() -> Self {
        ConvergencePolicy { step: 4, max_cutoff: 28, tolerance: 1e-5 }
    }
}

#[derive(Debug, Clone)]
pub struct OracleRun {
    /// States at the larger of the two agreeing cutoffs.
    pub states: Vec<QubitState>,
    pub cutoff: usize,
    pub reference_cutoff: usize,
    /// Largest element difference between the two cutoffs.
    pub cutoff_difference: f64,
}

/// Raises the cutoff from `config`'s value in `policy.step` increments
/// until two successive runs agree within `policy.tolerance`.
pub fn oracle_converged(
    rho0: &QubitState,
    config: &FockConfig,
    policy: &ConvergencePolicy,
    times: &[f64],
) -> Result<OracleRun> {
    if policy.step == 0 || !(policy.tolerance > 0.0) {
        return invalid("convergence step and tolerance must be positive");
    }
    let mut cutoff = config.truncation.cutoff();
    let mut previous = oracle_reduced_density(rho0, config, times)?;
    loop {
        let next_cutoff = cutoff + policy.step;
        let mut next = *config;
        next.truncation = config.truncation.with_cutoff(next_cutoff);
        if next_cutoff > policy.max_cutoff || basis_dimension(next.n_sites, next.truncation) > MAX_DIMENSION {
            return Err(Error::NotConverged {
                cutoff,
                reference: next_cutoff,
                difference: f64::NAN,
                tolerance: policy.tolerance,
            });
        }
        let states = oracle_reduced_density(rho0, &next, times)?;
        let difference = max_element_difference(&previous, &states);
        log::debug!("oracle cutoff {cutoff} vs {next_cutoff}: {difference:.3e}");
        if difference <= policy.tolerance {
            return Ok(OracleRun { states, cutoff, reference_cutoff: next_cutoff, cutoff_difference: difference });
        }
        if next_cutoff + policy.step > policy.max_cutoff {
            return Err(Error::NotConverged {
                cutoff,
                reference: next_cutoff,
                difference,
                tolerance: policy.tolerance,
            });
        }
        cutoff = next_cutoff;
        previous = states;
    }
}

pub fn max_element_difference(a: &[QubitState], b: &[QubitState]) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(x, y)| (x.matrix() - y.matrix()).iter().map(|z| z.norm()).collect::<Vec<_>>())
        .fold(0.0, f64::max)
}
