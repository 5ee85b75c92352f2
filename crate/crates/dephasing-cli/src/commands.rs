use anyhow::Result;
use dephasing::analysis::*;
use dephasing::chain::{lieb_robinson_velocity, thermal_occupation, timescales, ChainParams, CouplingConfig};
use dephasing::observables::{connected_of, expectations_of, op_a, op_b, Axis};
use dephasing::oracle::{basis_dimension, oracle_converged, FockConfig};
use dephasing::propagator::{apply_propagator, lamb_shift, propagate_matrix};
use dephasing::qubits::{concurrence, state_from_bloch, QubitState};
use dephasing::Complex64;

use crate::config::{parameter_name, ConfigError, OracleSection, Resolved};
use crate::output::Table;

const PAIRS: [(Axis, Axis); 9] = [
    (Axis::X, Axis::X),
    (Axis::X, Axis::Y),
    (Axis::X, Axis::Z),
    (Axis::Y, Axis::X),
    (Axis::Y, Axis::Y),
    (Axis::Y, Axis::Z),
    (Axis::Z, Axis::X),
    (Axis::Z, Axis::Y),
    (Axis::Z, Axis::Z),
];

fn pair_label(p: (Axis, Axis)) -> String {
    format!("{}{}", p.0.label(), p.1.label())
}

fn header(table: &mut Table, command: &str, cfg: &Resolved) -> Result<()> {
    table.meta("tool", "dephasing");
    table.meta("version", env!("CARGO_PKG_VERSION"));
    table.meta("command", command);
    table.meta("config", serde_json::to_string(&cfg.echo)?);
    Ok(())
}

fn chain_meta(table: &mut Table, params: &ChainParams) -> Result<()> {
    let ts = timescales(params)?;
    table.num("omega0", ts.omega0);
    table.num("omega_max", ts.omega_max);
    table.num("v_lr", ts.v_lr);
    table.num("t_poincare", ts.t_poincare);
    Ok(())
}

fn grid(cfg: &Resolved) -> Result<TimeGrid> {
    Ok(TimeGrid::with_max_step(cfg.t_end, cfg.step)?)
}

const EVOLVE_COLUMNS: [&str; 18] = [
    "t", "concurrence", "rho_00", "rho_11", "rho_22", "rho_33", "rho_01_re", "rho_01_im", "rho_02_re",
    "rho_02_im", "rho_03_re", "rho_03_im", "rho_12_re", "rho_12_im", "rho_13_re", "rho_13_im",
    "rho_23_re", "rho_23_im",
];

pub fn evolve(cfg: &Resolved) -> Result<Vec<Table>> {
    let prop = Propagation::new(&cfg.params, &cfg.coupling, cfg.convention)?;
    let rho0 = state_from_bloch(&cfg.angles);
    let rows = prop.map_states(&rho0, &grid(cfg)?, |t, m| -> dephasing::Result<Vec<f64>> {
        let c = concurrence(&QubitState::from_matrix_unchecked(*m))?;
        let mut row = vec![t, c];
        row.extend((0..4).map(|i| m[(i, i)].re));
        for i in 0..4 {
            for j in i + 1..4 {
                row.push(m[(i, j)].re);
                row.push(m[(i, j)].im);
            }
        }
        Ok(row)
    })?;
    let mut table = Table::new("evolve", &EVOLVE_COLUMNS);
    header(&mut table, "evolve", cfg)?;
    chain_meta(&mut table, &cfg.params)?;
    let ls = lamb_shift(&prop.table);
    table.num("lamb_shift", ls.omega0);
    let n0 = thermal_occupation(cfg.params.omega0(), cfg.params.beta)?;
    let regime = classify_regime(0.5 * (cfg.coupling.gamma_a + cfg.coupling.gamma_b), cfg.params.omega0(), n0);
    table.meta("regime", serde_json::to_value(regime)?.as_str().unwrap_or_default());
    table.meta("basis", "sigma_x product basis |++>, |+->, |-+>, |-->");
    for r in rows {
        table.push(r?);
    }
    Ok(vec![table])
}

pub fn correlations(cfg: &Resolved) -> Result<Vec<Table>> {
    let prop = Propagation::new(&cfg.params, &cfg.coupling, cfg.convention)?;
    let rho0 = state_from_bloch(&cfg.angles);
    let g = grid(cfg)?;
    let mut columns: Vec<String> =
        ["t", "x_a", "y_a", "z_a", "x_b", "y_b", "z_b"].iter().map(|s| s.to_string()).collect();
    columns.extend(PAIRS.iter().map(|&p| format!("g_{}", pair_label(p))));
    let col_refs: Vec<&str> = columns.iter().map(String::as_str).collect();
    let mut table = Table::new("correlations", &col_refs);
    header(&mut table, "correlations", cfg)?;
    chain_meta(&mut table, &cfg.params)?;
    let rows = prop.map_states(&rho0, &g, |t, m| {
        let e = expectations_of(m);
        let mut row = vec![t];
        row.extend(e.a);
        row.extend(e.b);
        row.extend(PAIRS.iter().map(|&p| connected_of(m, p)));
        row
    })?;
    for r in rows {
        table.push(r);
    }
    let mut tables = vec![table];

    if let Some(origin) = cfg.echo.correlations.as_ref().and_then(|c| c.origin) {
        if !(origin >= 0.0 && origin.is_finite()) {
            return Err(ConfigError(format!("correlations.origin must be non-negative, got {origin}")).into());
        }
        tables.push(two_time(cfg, &prop, &rho0, origin, &g)?);
    }
    Ok(tables)
}

/// `⟨σ_α^a(t₀) σ_β^b(t₀ + τ)⟩` and its connected part over the lag grid.
fn two_time(cfg: &Resolved, prop: &Propagation, rho0: &QubitState, origin: f64, g: &TimeGrid) -> Result<Table> {
    let rho_t = *apply_propagator(rho0, &prop.table, origin)?.matrix();
    let ea = expectations_of(&rho_t).a;
    let modified = Axis::ALL.map(|a| rho_t * op_a(a));
    let ops_b = Axis::ALL.map(op_b);
    let moments = prop.plan().map_uniform(0.0, g.step(), g.n_samples, |k| {
        let mut out = [Complex64::new(0.0, 0.0); 9];
        for (i, m) in modified.iter().enumerate() {
            let p = propagate_matrix(m, k);
            for (j, ob) in ops_b.iter().enumerate() {
                out[3 * i + j] = (ob * p).trace();
            }
        }
        out
    });
    let later = prop.plan().map_uniform(origin, g.step(), g.n_samples, |k| {
        expectations_of(&propagate_matrix(rho0.matrix(), k)).b
    });

    let mut columns = vec!["tau".to_string()];
    for p in PAIRS {
        let l = pair_label(p);
        columns.extend([format!("m_{l}_re"), format!("m_{l}_im"), format!("c_{l}_re"), format!("c_{l}_im")]);
    }
    let col_refs: Vec<&str> = columns.iter().map(String::as_str).collect();
    let mut table = Table::new("correlations_two_time", &col_refs);
    header(&mut table, "correlations", cfg)?;
    table.num("origin", origin);
    for (k, (m, eb)) in moments.iter().zip(&later).enumerate() {
        let mut row = vec![g.time(k)];
        for (idx, &(a, b)) in PAIRS.iter().enumerate() {
            let moment = m[idx];
            let connected = moment - Complex64::new(ea[a as usize] * eb[b as usize], 0.0);
            row.extend([moment.re, moment.im, connected.re, connected.im]);
        }
        table.push(row);
    }
    Ok(table)
}

pub fn sweep(cfg: &Resolved) -> Result<Vec<Table>> {
    let (axis1, axis2, journal) = cfg.sweep_axes()?;
    let spec = SweepSpec {
        axis1,
        axis2,
        params: cfg.params,
        config: cfg.coupling,
        angles: cfg.angles,
        convention: cfg.convention,
        t_end: cfg.t_end,
        step: cfg.echo.time.as_ref().and_then(|t| t.step),
        journal,
    };
    let res = sweep_phase_diagram(&spec)?;
    let (p1, p2) = (parameter_name(spec.axis1.parameter), parameter_name(spec.axis2.parameter));
    let mut table = Table::new("sweep", &["row", "col", p1, p2, "mean_concurrence"]);
    header(&mut table, "sweep", cfg)?;
    table.meta("shape", format!("{}x{}", res.rows.len(), res.cols.len()));
    table.meta("failed_cells", res.failures.len());
    for f in &res.failures {
        table.meta(&format!("failure_{}_{}", f.row, f.col), f.message.replace('\n', " "));
    }
    for (r, &rv) in res.rows.iter().enumerate() {
        for (c, &cv) in res.cols.iter().enumerate() {
            table.push(vec![r as f64, c as f64, rv, cv, res.get(r, c)]);
        }
    }
    Ok(vec![table])
}

fn tgen_section(cfg: &Resolved) -> Result<&crate::config::TgenSection> {
    cfg.echo
        .tgen
        .as_ref()
        .ok_or_else(|| ConfigError("this command needs a [tgen] section with `distances`".into()).into())
}

fn estimate_or_nan(j0: f64, d: usize) -> Result<f64> {
    match t_gen_estimate(j0, d) {
        Ok(v) => Ok(v),
        Err(dephasing::Error::Undefined(msg)) => {
            log::warn!("no estimate at D = {d}: {msg}");
            Ok(f64::NAN)
        }
        Err(e) => Err(e.into()),
    }
}

pub fn tgen(cfg: &Resolved) -> Result<Vec<Table>> {
    let tg = tgen_section(cfg)?;
    let j0 = cfg.params.j0;
    let v_lr = lieb_robinson_velocity(j0)?;
    let threshold = tg.threshold.unwrap_or(DEFAULT_THRESHOLD);
    let dwell = tg.dwell.unwrap_or_else(|| default_dwell(cfg.params.omega0()));
    let couplings: Vec<(f64, f64)> = match &tg.gammas {
        Some(gs) => gs.iter().map(|&g| (g, g)).collect(),
        None => vec![(cfg.coupling.gamma_a, cfg.coupling.gamma_b)],
    };
    let mut table = Table::new("tgen", &["distance", "gamma_a", "gamma_b", "t_gen", "t_gen_estimate", "t_lr"]);
    header(&mut table, "tgen", cfg)?;
    chain_meta(&mut table, &cfg.params)?;
    table.num("threshold", threshold);
    table.num("dwell", dwell);
    let rho0 = state_from_bloch(&cfg.angles);
    let g = grid(cfg)?;
    for &(ga, gb) in &couplings {
        for &d in &tg.distances {
            let coupling = CouplingConfig { gamma_a: ga, gamma_b: gb, distance: d };
            let series = Propagation::new(&cfg.params, &coupling, cfg.convention)?.concurrence_series(&rho0, &g)?;
            let t_gen = extract_t_gen(&series, threshold, dwell).unwrap_or(f64::NAN);
            log::info!("D = {d}, γ = ({ga}, {gb}): t_gen = {t_gen}");
            table.push(vec![d as f64, ga, gb, t_gen, estimate_or_nan(j0, d)?, d as f64 / v_lr]);
        }
    }
    Ok(vec![table])
}

pub fn estimate(cfg: &Resolved) -> Result<Vec<Table>> {
    let tg = tgen_section(cfg)?;
    let j0 = cfg.params.j0;
    let v_lr = lieb_robinson_velocity(j0)?;
    let mut table = Table::new("estimate", &["distance", "t_gen_estimate", "t_lr"]);
    header(&mut table, "estimate", cfg)?;
    for &d in &tg.distances {
        table.push(vec![d as f64, estimate_or_nan(j0, d)?, d as f64 / v_lr]);
    }
    Ok(vec![table])
}

pub fn oracle_check(cfg: &Resolved) -> Result<Vec<Table>> {
    let sec = cfg.echo.oracle.clone().unwrap_or_default();
    let fock = FockConfig {
        n_sites: sec.n_sites,
        truncation: sec.truncation(),
        beta: cfg.params.beta,
        j0: cfg.params.j0,
        gamma_a: cfg.coupling.gamma_a,
        gamma_b: cfg.coupling.gamma_b,
        distance: cfg.coupling.distance,
    };
    fock.validate()?;
    if sec.max_cutoff < sec.cutoff + sec.cutoff_step {
        return Err(ConfigError("oracle.max_cutoff must allow at least one comparison (cutoff + cutoff_step)".into()).into());
    }
    if !(sec.time_step > 0.0 && sec.t_end > 0.0) {
        return Err(ConfigError("oracle.t_end and oracle.time_step must be positive".into()).into());
    }
    let times = OracleSection::times(&sec);
    let rho0 = state_from_bloch(&cfg.angles);
    let run = oracle_converged(&rho0, &fock, &sec.policy(), &times)?;
    let params = ChainParams::new(sec.n_sites, cfg.params.j0, cfg.params.beta)?;
    let prop = Propagation::new(&params, &cfg.coupling, cfg.convention)?;

    let mut table = Table::new("oracle_check", &["t", "max_abs_diff", "concurrence_analytic", "concurrence_oracle"]);
    header(&mut table, "oracle-check", cfg)?;
    let mut worst = 0.0f64;
    let mut rows = Vec::with_capacity(times.len());
    for (&t, s) in times.iter().zip(&run.states) {
        let a = apply_propagator(&rho0, &prop.table, t)?;
        let diff = (a.matrix() - s.matrix()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        worst = worst.max(diff);
        rows.push(vec![t, diff, concurrence(&a)?, concurrence(s)?]);
    }
    table.meta("cutoff", run.cutoff);
    table.meta("reference_cutoff", run.reference_cutoff);
    table.num("cutoff_difference", run.cutoff_difference);
    table.meta("dimension", basis_dimension(sec.n_sites, sec.truncation().with_cutoff(run.cutoff)));
    table.num("max_abs_diff", worst);
    for r in rows {
        table.push(r);
    }
    log::info!("oracle agrees with the analytic propagator to {worst:.3e} at cutoff {}", run.cutoff);
    Ok(vec![table])
}
