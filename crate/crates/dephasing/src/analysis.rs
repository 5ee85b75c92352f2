//! Time series, averages, entanglement generation times and parameter
//! sweeps.

use std::collections::HashMap;
use std::fs::OpenOptions;
use std::io::{BufRead, BufReader, Write};
use std::path::PathBuf;
use std::sync::Mutex;

use nalgebra::Matrix4;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::{build_modes, ChainParams, CouplingConfig, EdgeConvention};
use crate::error::{invalid, Error, Result};
use crate::numeric::{pairwise_sum, periodic_mean};
use crate::propagator::{propagate_matrix, sector_forces, KernelPlan, SectorForceTable};
use crate::qubits::{concurrence, state_from_bloch, BlochAngles, QubitState};

pub const DEFAULT_THRESHOLD: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t_start: f64,
    pub t_end: f64,
    pub n_samples: usize,
}

impl TimeGrid {
    pub fn new(t_start: f64, t_end: f64, n_samples: usize) -> Result<Self> {
        if !(t_start >= 0.0 && t_end > t_start) {
            return invalid(format!("time grid needs 0 <= t_start < t_end, got [{t_start}, {t_end}]"));
        }
        if n_samples < 2 {
            return invalid(format!("time grid needs at least 2 samples, got {n_samples}"));
        }
        Ok(TimeGrid { t_start, t_end, n_samples })
    }

    /// Grid on `[0, t_end]` whose spacing does not exceed `max_step`.
    pub fn with_max_step(t_end: f64, max_step: f64) -> Result<Self> {
        if !(max_step > 0.0) {
            return invalid(format!("step must be positive, got {max_step}"));
        }
        let intervals = (t_end / max_step).ceil().max(1.0) as usize;
        TimeGrid::new(0.0, t_end, intervals + 1)
    }

    /// Default grid for a chain: step `min(t_max, π/(10·ω_max))`.
    pub fn default_for(params: &ChainParams, t_end: f64) -> Result<Self> {
        TimeGrid::with_max_step(t_end, default_step(params))
    }

    pub fn step(&self) -> f64 {
        (self.t_end - self.t_start) / (self.n_samples - 1) as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t_start + k as f64 * self.step()
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.n_samples).map(|k| self.time(k)).collect()
    }
}

pub fn default_step(params: &ChainParams) -> f64 {
    let w = params.omega_max();
    (1.0 / w).min(std::f64::consts::PI / (10.0 * w))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcurrenceSeries {
    pub grid: TimeGrid,
    pub values: Vec<f64>,
}

impl ConcurrenceSeries {
    pub fn new(grid: TimeGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_samples {
            return invalid(format!(
                "series has {} values for {} grid points",
                values.len(),
                grid.n_samples
            ));
        }
        Ok(ConcurrenceSeries { grid, values })
    }
}

/// A chain–qubit setup ready for repeated evaluation.
#[derive(Debug, Clone)]
pub struct Propagation {
    pub params: ChainParams,
    pub config: CouplingConfig,
    pub table: SectorForceTable,
    plan: KernelPlan,
}

impl Propagation {
    pub fn new(params: &ChainParams, config: &CouplingConfig, convention: EdgeConvention) -> Result<Self> {
        let table = sector_forces(&build_modes(params, config, convention)?)?;
        let plan = KernelPlan::new(&table);
        Ok(Propagation { params: *params, config: *config, table, plan })
    }

    pub fn plan(&self) -> &KernelPlan {
        &self.plan
    }

    /// Evolves `rho0` over the grid and maps each `(t, ρ(t))` through `f`.
    pub fn map_states<T, F>(&self, rho0: &QubitState, grid: &TimeGrid, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(f64, &Matrix4<Complex64>) -> T + Sync,
    {
        rho0.validate()?;
        let m0 = *rho0.matrix();
        Ok(self.plan.map_uniform(grid.t_start, grid.step(), grid.n_samples, |k| {
            f(k.t, &propagate_matrix(&m0, k))
        }))
    }

    pub fn concurrence_series(&self, rho0: &QubitState, grid: &TimeGrid) -> Result<ConcurrenceSeries> {
        let values = self.map_states(rho0, grid, |_, m| {
            concurrence(&QubitState::from_matrix_unchecked(*m))
        })?;
        ConcurrenceSeries::new(*grid, values.into_iter().collect::<Result<Vec<_>>>()?)
    }
}

pub fn concurrence_series(
    params: &ChainParams,
    config: &CouplingConfig,
    angles: &BlochAngles,
    grid: &TimeGrid,
    convention: EdgeConvention,
) -> Result<ConcurrenceSeries> {
    Propagation::new(params, config, convention)?.concurrence_series(&state_from_bloch(angles), grid)
}

/// `(1/(t_end − t_start))·∫ C dt` by the trapezoidal rule.
pub fn average_concurrence(series: &ConcurrenceSeries) -> f64 {
    let v = &series.values;
    let n = v.len();
    if n < 2 {
        return v.first().copied().unwrap_or(0.0);
    }
    let interior = pairwise_sum(&v[1..n - 1]);
    let sum = interior + 0.5 * (v[0] + v[n - 1]);
    sum / (n - 1) as f64
}

/// Earliest grid time at which `C ≥ threshold` and stays so for `dwell`.
///
/// The dwell window has to fit inside the series.
pub fn extract_t_gen(series: &ConcurrenceSeries, threshold: f64, dwell: f64) -> Option<f64> {
    let v = &series.values;
    let n = v.len();
    let dt = series.grid.step();
    let span = (dwell / dt - 1e-9).ceil().max(0.0) as usize;
    // run[k]: number of consecutive samples from k on that are above threshold
    let mut run = vec![0usize; n + 1];
    for k in (0..n).rev() {
        run[k] = if v[k] >= threshold { run[k + 1] + 1 } else { 0 };
    }
    (0..n).find(|&k| k + span < n && run[k] > span).map(|k| series.grid.time(k))
}

/// Default dwell window `5/ω₀`.
pub fn default_dwell(omega0: f64) -> f64 {
    5.0 / omega0
}

/// `t_est = (2π/ω₀³) / ∫₀^{2π} cos(kD)/ω(k)² dk`.
pub fn t_gen_estimate(j0: f64, distance: usize) -> Result<f64> {
    if !(j0 > 0.0 && j0 < 1.0) {
        return invalid(format!("j0 must lie in (0, 1), got {j0}"));
    }
    let omega0 = (1.0 - j0).sqrt();
    let d = distance as f64;
    let mean = periodic_mean(4096 + 4 * distance, |k| (k * d).cos() / (1.0 - j0 * k.cos()));
    // below this the quadrature cannot resolve the sign
    let floor = 1e-13 / (1.0 - j0);
    if !(mean > floor) {
        return Err(Error::Undefined(format!(
            "Lamb-shift integral is {mean:.3e} at j0 = {j0}, D = {distance}"
        )));
    }
    Ok(1.0 / (omega0.powi(3) * mean))
}

pub fn beta_from_occupation(n0: f64, omega0: f64) -> Result<f64> {
    if !(n0 > 0.0) {
        return invalid(format!("occupation must be positive, got {n0}"));
    }
    if !(omega0 > 0.0) {
        return invalid(format!("gap must be positive, got {omega0}"));
    }
    Ok((1.0 / n0).ln_1p() / omega0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Weak,
    Strong,
    ThermalDamping,
    Crossover,
}

/// Weak: `γ < ω₀^{3/2}/10`. Strong: `γ > 10·ω₀^{3/2}`. Thermal damping:
/// weak and `γ√n₀ ≥ ω₀^{3/2}`.
pub fn classify_regime(gamma: f64, omega0: f64, n0: f64) -> Regime {
    let scale = omega0.powf(1.5);
    if gamma < scale / 10.0 {
        if gamma * n0.max(0.0).sqrt() >= scale {
            Regime::ThermalDamping
        } else {
            Regime::Weak
        }
    } else if gamma > 10.0 * scale {
        Regime::Strong
    } else {
        Regime::Crossover
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepParameter {
    /// Symmetric coupling γ (sets both qubits).
    Gamma,
    /// Gap `ω₀ = √(1 − j0)`.
    Omega0,
    /// Thermal occupation of the gap mode.
    N0,
    /// Qubit distance.
    Distance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepAxis {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    /// Row axis.
    pub axis1: SweepAxis,
    /// Column axis.
    pub axis2: SweepAxis,
    pub params: ChainParams,
    pub config: CouplingConfig,
    pub angles: BlochAngles,
    pub convention: EdgeConvention,
    pub t_end: f64,
    /// Sampling step; the chain default when absent.
    pub step: Option<f64>,
    /// Append-only completion journal for resuming.
    pub journal: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellFailure {
    pub row: usize,
    pub col: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<f64>,
    pub cols: Vec<f64>,
    /// Row-major average concurrence; NaN where the cell failed.
    pub values: Vec<f64>,
    pub failures: Vec<CellFailure>,
}

impl SweepResult {
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.cols.len() + col]
    }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.axis1.values.is_empty() || self.axis2.values.is_empty() {
            return invalid("sweep axes must not be empty");
        }
        if self.axis1.parameter == self.axis2.parameter {
            return invalid("sweep axes must name distinct parameters");
        }
        if !(self.t_end > 0.0) {
            return invalid(format!("t_end must be positive, got {}", self.t_end));
        }
        Ok(())
    }

    /// Chain and coupling for one cell.
    pub fn cell(&self, row: usize, col: usize) -> Result<(ChainParams, CouplingConfig)> {
        let mut params = self.params;
        let mut config = self.config;
        let mut n0 = None;
        let set = [(self.axis1.parameter, self.axis1.values[row]), (self.axis2.parameter, self.axis2.values[col])];
        for &(p, v) in &set {
            match p {
                SweepParameter::Gamma => {
                    config.gamma_a = v;
                    config.gamma_b = v;
                }
                SweepParameter::Omega0 => params.j0 = 1.0 - v * v,
                SweepParameter::N0 => n0 = Some(v),
                SweepParameter::Distance => {
                    if v < 0.0 || v.fract() != 0.0 {
                        return invalid(format!("distance must be a non-negative integer, got {v}"));
                    }
                    config.distance = v as usize;
                }
            }
        }
        if let Some(n0) = n0 {
            params.beta = beta_from_occupation(n0, params.omega0())?;
        }
        params.validate()?;
        config.validate(params.n_sites)?;
        Ok((params, config))
    }

    fn run_cell(&self, row: usize, col: usize) -> Result<f64> {
        let (params, config) = self.cell(row, col)?;
        let step = self.step.unwrap_or_else(|| default_step(&params));
        let grid = TimeGrid::with_max_step(self.t_end, step)?;
        let series = concurrence_series(&params, &config, &self.angles, &grid, self.convention)?;
        Ok(average_concurrence(&series))
    }
}

fn read_journal(path: &PathBuf) -> Result<HashMap<(usize, usize), f64>> {
    let mut done = HashMap::new();
    let Ok(file) = std::fs::File::open(path) else {
        return Ok(done);
    };
    for line in BufReader::new(file).lines() {
        let line = line?;
        let mut it = line.split_whitespace();
        let (Some(r), Some(c), Some(bits)) = (it.next(), it.next(), it.next()) else {
            continue;
        };
        // a torn last line from an interrupted run is simply redone
        if bits.len() != 16 || it.next().is_some() {
            continue;
        }
        if let (Ok(r), Ok(c), Ok(bits)) = (r.parse(), c.parse(), u64::from_str_radix(bits, 16)) {
            done.insert((r, c), f64::from_bits(bits));
        }
    }
    Ok(done)
}

/// Average concurrence on every cell of a 2-D grid.
pub fn sweep_phase_diagram(spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    let (nr, nc) = (spec.axis1.values.len(), spec.axis2.values.len());
    let done = match &spec.journal {
        Some(p) => read_journal(p)?,
        None => HashMap::new(),
    };
    let journal = match &spec.journal {
        Some(p) => Some(Mutex::new(OpenOptions::new().create(true).append(true).open(p)?)),
        None => None,
    };
    let cells: Vec<(usize, usize)> = (0..nr).flat_map(|r| (0..nc).map(move |c| (r, c))).collect();
    let outcomes: Vec<Result<f64>> = cells
        .par_iter()
        .map(|&(r, c)| {
            if let Some(&v) = done.get(&(r, c)) {
                return Ok(v);
            }
            let v = spec.run_cell(r, c)?;
            if let Some(j) = &journal {
                let mut f = j.lock().unwrap_or_else(|e| e.into_inner());
                writeln!(f, "{r} {c} {:016x}", v.to_bits())?;
                f.flush()?;
            }
            Ok(v)
        })
        .collect();
    let mut values = Vec::with_capacity(cells.len());
    let mut failures = Vec::new();
    for (&(row, col), out) in cells.iter().zip(outcomes) {
        match out {
            Ok(v) => values.push(v),
            Err(e) => {
                log::warn!("sweep cell ({row}, {col}) failed: {e}");
                values.push(f64::NAN);
                failures.push(CellFailure { row, col, message: e.to_string() });
            }
        }
    }
    Ok(SweepResult {
        rows: spec.axis1.values.clone(),
        cols: spec.axis2.values.clone(),
        values,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(values: Vec<f64>, dt: f64) -> ConcurrenceSeries {
        let n = values.len();
        ConcurrenceSeries::new(TimeGrid::new(0.0, dt * (n - 1) as f64, n).unwrap(), values).unwrap()
    }

    #[test]
    fn average_examples() {
        assert!((average_concurrence(&series(vec![0.3; 11], 0.5)) - 0.3).abs() < 1e-15);
        assert_eq!(average_concurrence(&series(vec![0.0; 11], 0.5)), 0.0);
    }

    #[test]
    fn t_gen_on_ramp() {
        let v: Vec<f64> = (0..200).map(|k| if k < 42 { 5e-4 } else { 1e-3 + (k - 42) as f64 * 1e-4 }).collect();
        assert_eq!(extract_t_gen(&series(v, 0.1), 1e-3, 2.0), Some(4.2));
        assert_eq!(extract_t_gen(&series(vec![0.0; 50], 0.1), 1e-3, 0.0), None);
    }

    #[test]
    fn t_gen_skips_short_blips() {
        let mut v = vec![0.0; 100];
        v[10] = 0.01;
        for x in v.iter_mut().skip(50) {
            *x = 0.01;
        }
        assert_eq!(extract_t_gen(&series(v, 1.0), 1e-3, 3.0), Some(50.0));
    }

    #[test]
    fn estimate_at_zero_distance() {
        let t = t_gen_estimate(0.8, 0).unwrap();
        assert!((t - 0.6 / 0.2f64.powf(1.5)).abs() < 1e-10);
    }

    #[test]
    fn beta_examples() {
        assert!((beta_from_occupation(1.0, 0.45).unwrap() - 2f64.ln() / 0.45).abs() < 1e-15);
        assert!(beta_from_occupation(0.0, 0.45).is_err());
    }

    #[test]
    fn regime_examples() {
        assert_eq!(classify_regime(0.005, 0.45, 0.0), Regime::Weak);
        assert_eq!(classify_regime(0.01, 0.45, 1e3), Regime::ThermalDamping);
        assert_eq!(classify_regime(3.1, 0.45, 0.0), Regime::Strong);
        // 10·0.45^{3/2} = 3.019, so 3.0 is not yet a full decade above
        assert_eq!(classify_regime(3.0, 0.45, 0.0), Regime::Crossover);
    }
}
