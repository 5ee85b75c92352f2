mod common;

use dephasing::chain::*;
use dephasing::observables::*;
use dephasing::propagator::{apply_propagator, kernel, propagate_matrix, sector_forces, SectorForceTable};
use num_complex::Complex64;
use proptest::prelude::*;

use common::*;

fn setup(d: usize, beta: f64) -> ([ModeSet; 2], SectorForceTable) {
    let p = ChainParams::new(80, 0.7, beta).unwrap();
    let m = build_modes(&p, &CouplingConfig::symmetric(0.25, d), EdgeConvention::Halved).unwrap();
    let t = sector_forces(&m).unwrap();
    (m, t)
}

/// Equal-time expectations and moments written out element by element in
/// the `|++⟩, |+−⟩, |−+⟩, |−−⟩` basis (1-based in the comments).
struct ClosedForm {
    fs: f64,
    fa: f64,
    phase: Complex64,
}

impl ClosedForm {
    fn new(m: &[ModeSet; 2], t: f64) -> Self {
        let s = branch_sums(&m[0], t);
        let a = branch_sums(&m[1], t);
        ClosedForm { fs: s.f_plus, fa: a.f_plus, phase: Complex64::from_polar(1.0, s.phi_plus - a.phi_plus) }
    }

    fn cross(&self) -> f64 {
        (-self.fs - self.fa).exp()
    }
}

#[test]
fn single_qubit_expectations() {
    let (m, tb) = setup(3, 2.0);
    let rho0 = random_state(&mut rng(11), 2);
    let r = rho0.matrix();
    for t in [0.0, 0.7, 5.0, 60.0] {
        let a = ClosedForm::new(&m, t);
        let e = pauli_expectations(&rho0, &tb, t).unwrap();
        let sx = (r[(0, 0)] + r[(1, 1)] - r[(2, 2)] - r[(3, 3)]).re;
        // ρ13, ρ24
        let y = 2.0 * (r[(0, 2)] * a.phase).re * a.cross() + 2.0 * (r[(1, 3)] * a.phase.conj()).re * a.cross();
        let z = 2.0 * (r[(0, 2)] * a.phase).im * a.cross() + 2.0 * (r[(1, 3)] * a.phase.conj()).im * a.cross();
        assert!((e.a[0] - sx).abs() < 1e-13);
        assert!((e.a[1] - y).abs() < 1e-12, "t={t}");
        assert!((e.a[2] - z).abs() < 1e-12, "t={t}");
    }
}

#[test]
fn equal_time_moments() {
    let (m, tb) = setup(2, 5.0);
    let rho0 = random_state(&mut rng(12), 3);
    let r = rho0.matrix();
    for t in [0.3, 4.0, 25.0] {
        let a = ClosedForm::new(&m, t);
        let rho = apply_propagator(&rho0, &tb, t).unwrap();
        let e = expectations_of(rho.matrix());
        let moment = |x: Axis, y: Axis| {
            equal_time_correlations(&rho0, &tb, t, (x, y)).unwrap() + e.a[x as usize] * e.b[y as usize]
        };
        let (ds, da) = ((-4.0 * a.fs).exp(), (-4.0 * a.fa).exp());
        let xx = (r[(0, 0)] - r[(1, 1)] - r[(2, 2)] + r[(3, 3)]).re;
        let yy = 2.0 * r[(0, 3)].re * ds + 2.0 * r[(1, 2)].re * da;
        let zz = -2.0 * r[(0, 3)].re * ds + 2.0 * r[(1, 2)].re * da;
        let yz = 2.0 * r[(0, 3)].im * ds - 2.0 * r[(1, 2)].im * da;
        // ρ12, ρ34
        let xy = 2.0 * (r[(0, 1)] * a.phase).re * a.cross() - 2.0 * (r[(2, 3)] * a.phase.conj()).re * a.cross();
        let xz = 2.0 * (r[(0, 1)] * a.phase).im * a.cross() - 2.0 * (r[(2, 3)] * a.phase.conj()).im * a.cross();
        for (got, want) in [
            (moment(Axis::X, Axis::X), xx),
            (moment(Axis::Y, Axis::Y), yy),
            (moment(Axis::Z, Axis::Z), zz),
            (moment(Axis::Y, Axis::Z), yz),
            (moment(Axis::X, Axis::Y), xy),
            (moment(Axis::X, Axis::Z), xz),
        ] {
            assert!((got - want).abs() < 1e-12, "t={t}: {got} vs {want}");
        }
    }
}

#[test]
fn two_time_x_readout_matches_closed_form() {
    let (m, tb) = setup(1, 3.0);
    let rho0 = random_state(&mut rng(13), 4);
    let (t, tau) = (2.5, 1.75);
    let rho_t = apply_propagator(&rho0, &tb, t).unwrap();
    let tilde = rho_t.matrix() * op_a(Axis::X);
    let a = ClosedForm::new(&m, tau);
    let xx = (tilde[(0, 0)] - tilde[(1, 1)] + tilde[(2, 2)] - tilde[(3, 3)]).re;
    let xy = 2.0 * (tilde[(0, 1)] * a.phase).re * a.cross() + 2.0 * (tilde[(2, 3)] * a.phase.conj()).re * a.cross();
    let xz = 2.0 * (tilde[(0, 1)] * a.phase).im * a.cross() + 2.0 * (tilde[(2, 3)] * a.phase.conj()).im * a.cross();
    for (axis, want) in [(Axis::X, xx), (Axis::Y, xy), (Axis::Z, xz)] {
        let got = two_time_correlations(&rho0, &tb, t, tau, (Axis::X, axis)).unwrap();
        assert!((got.moment.re - want).abs() < 1e-12, "{axis:?}");
        assert!(got.moment.im.abs() < 1e-12);
    }
}

#[test]
fn two_time_propagates_modified_state_elementwise() {
    let (m, tb) = setup(2, 1.0);
    let rho0 = random_state(&mut rng(14), 2);
    let (t, tau) = (1.0, 3.0);
    let a = ClosedForm::new(&m, tau);
    let rho_t = apply_propagator(&rho0, &tb, t).unwrap();
    for axis in [Axis::Y, Axis::Z] {
        let tilde = rho_t.matrix() * op_a(axis);
        let prop = propagate_matrix(&tilde, &kernel(&tb, tau).unwrap());
        assert!((prop[(0, 1)] - tilde[(0, 1)] * a.phase * a.cross()).norm() < 1e-13);
        assert!((prop[(2, 3)] - tilde[(2, 3)] * a.phase.conj() * a.cross()).norm() < 1e-13);
        assert!((prop[(1, 0)] - tilde[(1, 0)] * a.phase.conj() * a.cross()).norm() < 1e-13);
        let got = two_time_correlations(&rho0, &tb, t, tau, (axis, Axis::Y)).unwrap();
        let want = (op_b(Axis::Y) * prop).trace();
        assert!((got.moment - want).norm() < 1e-13);
    }
}

#[test]
fn zero_lag_reduces_to_equal_time() {
    let (_, tb) = setup(0, 2.0);
    let rho0 = random_state(&mut rng(15), 3);
    for x in Axis::ALL {
        for y in Axis::ALL {
            let two = two_time_correlations(&rho0, &tb, 4.0, 0.0, (x, y)).unwrap();
            let eq = equal_time_correlations(&rho0, &tb, 4.0, (x, y)).unwrap();
            assert!((two.connected.re - eq).abs() < 1e-13);
            assert!(two.connected.im.abs() < 1e-13);
        }
    }
    assert!(two_time_correlations(&rho0, &tb, 1.0, -0.1, (Axis::X, Axis::X)).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn expectations_are_bounded(seed in any::<u64>(), t in 0.0f64..200.0, d in 0usize..10) {
        let (_, tb) = setup(d, 1.5);
        let rho0 = random_state(&mut rng(seed), 1 + (seed % 4) as usize);
        let e = pauli_expectations(&rho0, &tb, t).unwrap();
        let len_a: f64 = e.a.iter().map(|x| x * x).sum();
        let len_b: f64 = e.b.iter().map(|x| x * x).sum();
        prop_assert!(len_a <= 1.0 + 1e-12 && len_b <= 1.0 + 1e-12);
        // σ_x is conserved
        let e0 = expectations_of(rho0.matrix());
        prop_assert!((e.a[0] - e0.a[0]).abs() < 1e-14 && (e.b[0] - e0.b[0]).abs() < 1e-14);
    }
}
