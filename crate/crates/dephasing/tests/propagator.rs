mod common;

use dephasing::chain::*;
use dephasing::oracle::{oracle_reduced_density, FockConfig, Truncation};
use dephasing::propagator::*;
use dephasing::qubits::{state_from_bloch, BlochAngles};
use proptest::prelude::*;

use common::*;

fn table(n: usize, j0: f64, ga: f64, gb: f64, d: usize, beta: f64) -> SectorForceTable {
    let p = ChainParams::new(n, j0, beta).unwrap();
    let cfg = CouplingConfig { gamma_a: ga, gamma_b: gb, distance: d };
    sector_forces(&build_modes(&p, &cfg, EdgeConvention::Halved).unwrap()).unwrap()
}

fn modes(n: usize, j0: f64, ga: f64, gb: f64, d: usize, beta: f64) -> [ModeSet; 2] {
    let p = ChainParams::new(n, j0, beta).unwrap();
    build_modes(&p, &CouplingConfig { gamma_a: ga, gamma_b: gb, distance: d }, EdgeConvention::Halved).unwrap()
}

#[test]
fn lamb_shift_matches_inverse_potential_matrix() {
    for (n, j0, d) in [(9, 0.5, 0), (9, 0.5, 3), (16, 0.8, 5), (40, 0.95, 7)] {
        let ls = lamb_shift(&table(n, j0, 0.07, 0.04, d, f64::INFINITY));
        let kinv = lattice_k(n, j0).try_inverse().unwrap();
        let expected = 4.0 * 0.07 * 0.04 * kinv[(0, d)];
        assert!((ls.omega0 - expected).abs() < 1e-14, "n={n} d={d}: {} vs {expected}", ls.omega0);
        assert!((ls.omega0 - (ls.omega0_s - ls.omega0_a)).abs() < 1e-16);
    }
    let flat = lamb_shift(&table(64, 0.0, 0.1, 0.1, 0, f64::INFINITY));
    assert!((flat.omega0 - 0.04).abs() < 1e-15);
}

#[test]
fn continuum_lamb_shift_closed_form() {
    for j0 in [0.3, 0.8, 0.99] {
        let root = (1.0f64 - j0 * j0).sqrt();
        let r = (1.0 - root) / j0;
        for d in [0usize, 1, 4, 10] {
            let exact = 4.0 * 0.05f64.powi(2) * r.powi(d as i32) / root;
            let got = lamb_shift_continuum(0.05, j0, d).unwrap();
            assert!((got - exact).abs() < 1e-12 * exact + 1e-17, "j0={j0} d={d}: {got} vs {exact}");
        }
    }
    // a long finite chain approaches the continuum value
    let finite = lamb_shift(&table(4000, 0.8, 0.05, 0.05, 3, f64::INFINITY)).omega0;
    let cont = lamb_shift_continuum(0.05, 0.8, 3).unwrap();
    assert!((finite - cont).abs() < 1e-10);
}

#[test]
fn single_branch_closed_form() {
    // symmetric coupling: blocks decay with f^S, f^A and rotate with φ^S − φ^A
    let m = modes(50, 0.6, 0.12, 0.12, 4, 3.0);
    let tb = sector_forces(&m).unwrap();
    for t in [0.3, 2.0, 17.5, 120.0] {
        let k = kernel(&tb, t).unwrap();
        let s = branch_sums(&m[0], t);
        let a = branch_sums(&m[1], t);
        assert!((k.d[0][3] - 4.0 * s.f_plus).abs() < 1e-13);
        assert!((k.d[1][2] - 4.0 * a.f_plus).abs() < 1e-13);
        assert!((k.d[0][2] - (s.f_plus + a.f_plus)).abs() < 1e-13);
        assert!((k.p[0][2] - (s.phi_plus - a.phi_plus)).abs() < 1e-12);
        assert!((k.p[1][3] + (s.phi_plus - a.phi_plus)).abs() < 1e-12);
        assert_eq!(k.p[0][3], 0.0);
    }
}

#[test]
fn asymmetric_block_structure() {
    let m = modes(60, 0.7, 0.2, 0.1, 3, 4.0);
    let tb = sector_forces(&m).unwrap();
    for t in [0.5, 3.0, 40.0] {
        let k = kernel(&tb, t).unwrap();
        let s = branch_sums(&m[0], t);
        let a = branch_sums(&m[1], t);
        let tol = 1e-13;
        assert!((k.d[0][3] - 4.0 * (s.f_plus + a.f_minus)).abs() < tol);
        assert!((k.d[1][2] - 4.0 * (a.f_plus + s.f_minus)).abs() < tol);
        let sum = s.f_plus + s.f_minus + a.f_plus + a.f_minus;
        let cross = 2.0 * (s.big_f + a.big_f);
        assert!((k.d[0][1] - (sum - cross)).abs() < tol);
        assert!((k.d[2][3] - (sum - cross)).abs() < tol);
        assert!((k.d[0][2] - (sum + cross)).abs() < tol);
        assert!((k.d[1][3] - (sum + cross)).abs() < tol);
        let phase = s.phi_plus - s.phi_minus - a.phi_plus + a.phi_minus;
        assert!((k.p[0][1] - phase).abs() < 1e-12);
        assert!((k.p[0][2] - phase).abs() < 1e-12);
        assert!((k.p[1][3] + phase).abs() < 1e-12);
        assert!((k.p[2][3] + phase).abs() < 1e-12);
        assert_eq!(k.p[0][3], 0.0);
        assert_eq!(k.p[1][2], 0.0);
    }
}

#[test]
fn equal_couplings_match_symmetric_constructor() {
    let p = ChainParams::new(101, 0.8, 7.0).unwrap();
    let a = sector_forces(&build_modes(&p, &CouplingConfig::symmetric(0.3, 2), EdgeConvention::Halved).unwrap());
    let b = sector_forces(
        &build_modes(&p, &CouplingConfig { gamma_a: 0.3, gamma_b: 0.3, distance: 2 }, EdgeConvention::Halved)
            .unwrap(),
    );
    assert_eq!(a.unwrap(), b.unwrap());
}

#[test]
fn decoherence_free_subspace_is_exact() {
    let tb = table(500, 0.8, 0.7, 0.7, 0, 0.5);
    for t in [0.0, 1.0, 33.3, 1000.0] {
        let k = kernel(&tb, t).unwrap();
        assert_eq!(k.d[1][2], 0.0);
        assert_eq!(k.p[1][2], 0.0);
    }
}

#[test]
fn plan_agrees_with_general_rule() {
    let tb = table(301, 0.9, 0.3, 0.17, 5, 2.0);
    let plan = KernelPlan::new(&tb);
    for t in [0.0, 0.01, 1.7, 250.0, 9999.0] {
        let a = kernel(&tb, t).unwrap();
        let b = plan.at(t);
        for i in 0..4 {
            for j in 0..4 {
                let scale = a.d[i][j].abs().max(1e-3);
                assert!((a.d[i][j] - b.d[i][j]).abs() < 1e-12 * scale.max(1.0), "d[{i}][{j}] at {t}");
                assert!((a.p[i][j] - b.p[i][j]).abs() < 1e-12 * a.p[i][j].abs().max(1.0), "p[{i}][{j}] at {t}");
            }
        }
    }
}

#[test]
fn uniform_sampling_is_thread_count_independent() {
    let tb = table(400, 0.8, 0.2, 0.2, 2, f64::INFINITY);
    let plan = KernelPlan::new(&tb);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| plan.map_uniform(0.0, 0.05, 2 * RESYNC_STEPS + 17, |k| k.d[0][1].to_bits()))
    };
    assert_eq!(run(1), run(3));
}

#[test]
fn recurrence_tracks_exact_kernel() {
    let tb = table(200, 0.8, 0.25, 0.25, 1, 1.0);
    let plan = KernelPlan::new(&tb);
    let dt = 0.23;
    let samples = plan.map_uniform(0.0, dt, RESYNC_STEPS + 500, |k| *k);
    for idx in [1, 777, RESYNC_STEPS - 1, RESYNC_STEPS, RESYNC_STEPS + 499] {
        let exact = plan.at(idx as f64 * dt);
        let got = &samples[idx];
        for i in 0..4 {
            for j in 0..4 {
                assert!((exact.d[i][j] - got.d[i][j]).abs() < 1e-10);
                assert!((exact.p[i][j] - got.p[i][j]).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn rejects_negative_time_and_bad_tables() {
    let tb = table(10, 0.5, 0.1, 0.1, 1, 1.0);
    assert!(kernel(&tb, -1.0).is_err());
    assert!(kernel(&tb, f64::NAN).is_err());
    let mut m = modes(10, 0.5, 0.1, 0.1, 1, 1.0);
    m[0].frequencies.pop();
    assert!(sector_forces(&m).is_err());
}

/// At N = 4 the halved edge convention reproduces the truncated Fock
/// evolution, the uniform one does not.
#[test]
fn edge_convention_against_fock_oracle() {
    let rho0 = state_from_bloch(&BlochAngles { theta_a: 0.6, phi_a: 0.2, theta_b: 0.9, phi_b: -0.7 });
    let times: Vec<f64> = (0..=40).map(|k| 0.5 * k as f64).collect();
    let fc = FockConfig {
        n_sites: 4,
        truncation: Truncation::TotalQuanta(10),
        beta: f64::INFINITY,
        j0: 0.5,
        gamma_a: 0.2,
        gamma_b: 0.2,
        distance: 0,
    };
    let oracle = oracle_reduced_density(&rho0, &fc, &times).unwrap();
    let p = ChainParams::new(4, 0.5, f64::INFINITY).unwrap();
    let worst = |conv| {
        let tb = sector_forces(&build_modes(&p, &CouplingConfig::symmetric(0.2, 0), conv).unwrap()).unwrap();
        times
            .iter()
            .zip(&oracle)
            .map(|(&t, o)| max_diff(apply_propagator(&rho0, &tb, t).unwrap().matrix(), o.matrix()))
            .fold(0.0, f64::max)
    };
    assert!(worst(EdgeConvention::Halved) < 1e-5);
    assert!(worst(EdgeConvention::Uniform) > 1e-3);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn propagated_states_stay_physical(
        seed in any::<u64>(),
        n in 2usize..120,
        j0 in 0.0f64..0.98,
        ga in 0.0f64..1.5,
        gb in 0.0f64..1.5,
        d_frac in 0.0f64..=1.0,
        beta in 0.05f64..100.0,
        t in 0.0f64..500.0,
    ) {
        let d = ((n / 2) as f64 * d_frac) as usize;
        let tb = table(n, j0, ga, gb, d, beta);
        let rho0 = random_state(&mut rng(seed), 1 + (seed % 4) as usize);
        let rho = apply_propagator(&rho0, &tb, t).unwrap();
        prop_assert!(rho.validate().is_ok());
        let k = kernel(&tb, t).unwrap();
        for i in 0..4 {
            prop_assert_eq!(rho.matrix()[(i, i)], rho0.matrix()[(i, i)]);
            for j in 0..4 {
                prop_assert!(k.d[i][j] >= 0.0);
                prop_assert_eq!(k.d[i][j], k.d[j][i]);
                prop_assert_eq!(k.p[i][j], -k.p[j][i]);
                prop_assert!(rho.matrix()[(i, j)].norm() <= rho0.matrix()[(i, j)].norm() * (1.0 + 1e-15));
            }
        }
    }

    #[test]
    fn sector_reflection_symmetry(n in 2usize..80, j0 in 0.0f64..0.98, ga in 0.0f64..1.0, gb in 0.0f64..1.0, t in 0.0f64..100.0) {
        let tb = table(n, j0, ga, gb, n / 3, 1.0);
        let k = kernel(&tb, t).unwrap();
        let tol = 1e-12 * (1.0 + k.d[0][1].abs() + k.d[0][2].abs());
        prop_assert!((k.d[0][1] - k.d[2][3]).abs() < tol);
        prop_assert!((k.d[0][2] - k.d[1][3]).abs() < tol);
        prop_assert!((k.p[0][1] - k.p[0][2]).abs() < 1e-12 * (1.0 + k.p[0][1].abs()));
    }
}
