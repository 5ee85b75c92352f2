#![allow(dead_code)]

use nalgebra::{DMatrix, Matrix4, SymmetricEigen, Vector4};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dephasing::chain::{Branch, ModeSet};
use dephasing::qubits::QubitState;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn max_diff(a: &Matrix4<Complex64>, b: &Matrix4<Complex64>) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random mixed state `G G† / tr(G G†)` with Gaussian-like entries.
pub fn random_state(rng: &mut impl Rng, rank: usize) -> QubitState {
    let mut m = Matrix4::<Complex64>::zeros();
    for _ in 0..rank {
        let v = Vector4::from_fn(|_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        m += v * v.adjoint();
    }
    let tr = m.trace();
    QubitState::new(m / tr).unwrap()
}

/// Potential matrix of the periodic chain, `V = ½ xᵀ K x`.
pub fn lattice_k(n: usize, j0: f64) -> DMatrix<f64> {
    let mut k = DMatrix::<f64>::identity(n, n);
    for l in 0..n {
        let r = (l + 1) % n;
        k[(l, r)] -= 0.5 * j0;
        k[(r, l)] -= 0.5 * j0;
    }
    k
}

/// Normal-mode frequencies from diagonalizing the lattice directly.
pub fn lattice_frequencies(n: usize, j0: f64) -> Vec<f64> {
    let e = SymmetricEigen::new(lattice_k(n, j0));
    let mut w: Vec<f64> = e.eigenvalues.iter().map(|x| x.sqrt()).collect();
    w.sort_by(|a, b| a.total_cmp(b));
    w
}

/// Per-branch sums used by the block-structure formulas.
#[derive(Debug, Clone, Copy, Default)]
pub struct BranchSums {
    pub f_plus: f64,
    pub f_minus: f64,
    pub big_f: f64,
    pub phi_plus: f64,
    pub phi_minus: f64,
}

/// `f_±`, `F`, `φ_±` for one branch, with `γ_± = (γ̃_a ± γ̃_b)/2` and the
/// mode amplitudes `γ̃` taken as magnitudes per branch.
pub fn branch_sums(m: &ModeSet, t: f64) -> BranchSums {
    let mut s = BranchSums::default();
    for n in 0..m.len() {
        let w = m.frequencies[n];
        let ga = m.coupling_a[n];
        let gb = match m.branch {
            Branch::Symmetric => m.coupling_b[n],
            Branch::Antisymmetric => -m.coupling_b[n],
        };
        let (gp, gm) = ((ga + gb) / 2.0, (ga - gb) / 2.0);
        let h = (2.0 * m.occupations[n] + 1.0) * (1.0 - (w * t).cos()) / w.powi(3);
        let ph = t / (w * w) - (w * t).sin() / w.powi(3);
        s.f_plus += 0.5 * gp * gp * h;
        s.f_minus += 0.5 * gm * gm * h;
        s.big_f += 0.5 * gp * gm * h;
        s.phi_plus += 0.5 * gp * gp * ph;
        s.phi_minus += 0.5 * gm * gm * ph;
    }
    s
}

/// Concurrence from the eigenvalues of `R = √ρ ρ̃ √ρ`, `ρ̃ = Y ρ* Y` in the
/// computational basis: `C = max(0, √r₁ − √r₂ − √r₃ − √r₄)`.
pub fn concurrence_eigen_oracle(rho_z: &Matrix4<Complex64>) -> f64 {
    let herm_sqrt = |m: &Matrix4<Complex64>| {
        let e = SymmetricEigen::new(*m);
        let d = Matrix4::from_diagonal(&e.eigenvalues.map(|x| c(x.max(0.0).sqrt(), 0.0)));
        e.eigenvectors * d * e.eigenvectors.adjoint()
    };
    let mut yy = Matrix4::<Complex64>::zeros();
    yy[(0, 3)] = c(-1.0, 0.0);
    yy[(3, 0)] = c(-1.0, 0.0);
    yy[(1, 2)] = c(1.0, 0.0);
    yy[(2, 1)] = c(1.0, 0.0);
    let tilde = yy * rho_z.map(|z| z.conj()) * yy;
    let s = herm_sqrt(rho_z);
    let r = s * tilde * s;
    let r = (r + r.adjoint()) * c(0.5, 0.0);
    let mut ev: Vec<f64> = SymmetricEigen::new(r).eigenvalues.iter().map(|x| x.max(0.0).sqrt()).collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    (ev[0] - ev[1] - ev[2] - ev[3]).max(0.0)
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}
