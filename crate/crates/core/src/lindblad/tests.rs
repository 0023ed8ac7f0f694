use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::fock::{
    annihilation_matrix, coherent_state, creation_matrix, number_operator, random_state, thermal_state,
};
use crate::linalg::{self, CMatrix};

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn fock(d: usize) -> HilbertSpace {
    HilbertSpace::fock(d).unwrap()
}

fn qubit_sigma_x() -> Operator {
    let s = HilbertSpace::levels(2).unwrap();
    Operator::new(s, CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)])).unwrap()
}

/// Random state on the lowest `k` levels mixed with a little of a cold thermal
/// state, so it is full rank but keeps the top level essentially empty.
fn low_random_state(space: HilbertSpace, k: usize, rng: &mut ChaCha8Rng) -> DensityMatrix {
    let small = random_state(fock(k), rng);
    let mut m = thermal_state(2.0, space).unwrap().matrix().scale(1e-3);
    m.view_mut((0, 0), (k, k)).zip_apply(small.matrix(), |a, b| *a += b * 0.999);
    DensityMatrix::new(Operator::new(space, m).unwrap()).unwrap()
}

fn ohmic(w: f64) -> f64 {
    0.3 * w
}

#[test]
fn dissipator_examples() {
    let space = fock(4);
    let a = annihilation_matrix(space);
    let vac = DensityMatrix::fock_state(space, 0).unwrap();
    assert_eq!(dissipator_apply(&a, vac.operator()).unwrap().norm(), 0.0);

    let one = DensityMatrix::fock_state(space, 1).unwrap();
    let out = dissipator_apply(&a, one.operator()).unwrap();
    let mut expected = CMatrix::zeros(4, 4);
    expected[(0, 0)] = c(1.0);
    expected[(1, 1)] = c(-1.0);
    assert!(linalg::max_abs(&(out.matrix() - expected)) < 1e-15);
}

#[test]
fn banded_generator_matches_dissipator_sum() {
    let space = fock(9);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let rho = random_state(space, &mut rng);
    let (om, gu, gd, dl) = (0.7, 0.4, 1.1, 0.05);
    let gen = GeneratorSpec::loaded_laser(om, gu, gd, dl).unwrap();
    let fast = generator_apply(&gen, &rho).unwrap();

    let a = annihilation_matrix(space);
    let ad = creation_matrix(space);
    let n = number_operator(space);
    let sqrt_n = crate::fock::function_of_number(space, |k| (k as f64).sqrt());
    let h = n.scaled(c(om));
    let comm = h.product(rho.operator()).unwrap().minus(&rho.operator().product(&h).unwrap()).unwrap();
    let mut slow = comm.scaled(Complex64::new(0.0, -1.0));
    slow = slow.plus(&dissipator_apply(&a.scaled(c(gd.sqrt())), rho.operator()).unwrap()).unwrap();
    slow = slow.plus(&dissipator_apply(&ad.scaled(c(gu.sqrt())), rho.operator()).unwrap()).unwrap();
    let load = a.product(&sqrt_n).unwrap().scaled(c(dl.sqrt()));
    slow = slow.plus(&dissipator_apply(&load, rho.operator()).unwrap()).unwrap();
    assert!(linalg::max_abs(&(fast.matrix() - slow.matrix())) < 1e-13);

    let general = GeneratorSpec::general(
        h,
        vec![a.scaled(c(gd.sqrt())), ad.scaled(c(gu.sqrt())), load],
    )
    .unwrap();
    let dense = generator_apply(&general, &rho).unwrap();
    assert!(linalg::max_abs(&(fast.matrix() - dense.matrix())) < 1e-13);
}

#[test]
fn thermal_state_is_stationary_below_threshold() {
    let space = fock(40);
    let x = 0.9;
    let gen = GeneratorSpec::linear_laser(1.0, (-x as f64).exp(), 1.0).unwrap();
    let rho = thermal_state(x, space).unwrap();
    // the truncated chain reflects at the top, so the truncated geometric
    // distribution is an exact fixed point
    assert!(generator_apply(&gen, &rho).unwrap().norm() < 1e-10);
}

#[test]
fn linear_equals_nonlinear_with_constant_coupling() {
    let space = fock(12);
    let (gu, gd) = (0.3f64, 0.8f64);
    let lin = GeneratorSpec::linear_laser(1.3, gu, gd).unwrap();
    let non = GeneratorSpec::nonlinear_laser(1.3, move |_| gu.sqrt(), move |_| gd.sqrt());
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let rho = random_state(space, &mut rng);
    let a = generator_apply(&lin, &rho).unwrap();
    let b = generator_apply(&non, &rho).unwrap();
    assert!(linalg::max_abs(&(a.matrix() - b.matrix())) < 1e-15);
}

#[test]
fn laser_on_level_space_rejected() {
    let gen = GeneratorSpec::linear_laser(1.0, 0.1, 1.0).unwrap();
    let rho = DensityMatrix::maximally_mixed(HilbertSpace::levels(3).unwrap());
    assert!(matches!(generator_apply(&gen, &rho), Err(Error::VariantMismatch(_))));
    assert!(GeneratorSpec::linear_laser(1.0, -0.1, 1.0).is_err());
}

#[test]
fn heisenberg_number_operator() {
    let space = fock(20);
    let (gu, gd) = (0.6, 1.4);
    let gen = GeneratorSpec::linear_laser(2.0, gu, gd).unwrap();
    let out = adjoint_apply(&gen, &number_operator(space)).unwrap();
    for n in 0..19 {
        let expected = (gu - gd) * n as f64 + gu;
        assert!((out.matrix()[(n, n)].re - expected).abs() < 1e-12, "n = {n}");
    }
    let off = out.matrix() - CMatrix::from_diagonal(&out.matrix().diagonal());
    assert!(linalg::max_abs(&off) < 1e-15);
}

#[test]
fn superoperator_matches_apply() {
    let space = fock(5);
    let gen = GeneratorSpec::loaded_laser(1.0, 0.4, 0.9, 0.1).unwrap();
    let l = gen.compile(space).unwrap();
    let sup = l.superoperator();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let rho = random_state(space, &mut rng);
    let v = CMatrix::from_iterator(25, 1, rho.matrix().iter().cloned());
    let lv = &sup * v;
    let direct = l.apply(rho.matrix());
    for j in 0..5 {
        for i in 0..5 {
            assert!((lv[(i + j * 5, 0)] - direct[(i, j)]).norm() < 1e-14);
        }
    }
}

#[test]
fn ladder_rates_read_from_jumps() {
    let space = fock(10);
    let gen = GeneratorSpec::loaded_laser(1.0, 0.5, 0.25, 0.125).unwrap();
    let l = gen.compile(space).unwrap();
    for n in 0..9 {
        let (up, down) = l.ladder_rates(n);
        let x = n as f64;
        assert!((up - 0.5 * (x + 1.0)).abs() < 1e-14);
        assert!((down - (0.25 * x + 0.125 * x * x)).abs() < 1e-13);
    }
}

#[test]
fn evolve_decay_of_single_photon() {
    let space = fock(6);
    let gd = 0.7;
    let gen = GeneratorSpec::linear_laser(1.0, 0.0, gd).unwrap();
    let rho0 = DensityMatrix::fock_state(space, 1).unwrap();
    let traj = evolve(&gen, &rho0, 2.0, 1e-3, 50).unwrap();
    for (t, rho) in traj.times.iter().zip(&traj.states) {
        let p1 = rho.matrix()[(1, 1)].re;
        assert!((p1 - (-gd * t).exp()).abs() < 1e-6);
    }
    assert_eq!(*traj.times.last().unwrap(), 2.0);
}

#[test]
fn evolve_edge_cases() {
    let space = fock(6);
    let gen = GeneratorSpec::linear_laser(1.0, 0.1, 1.0).unwrap();
    let rho0 = DensityMatrix::fock_state(space, 0).unwrap();
    let t0 = evolve(&gen, &rho0, 0.0, 0.1, 1).unwrap();
    assert_eq!(t0.len(), 1);
    assert!(evolve(&gen, &rho0, 1.0, 0.0, 1).is_err());
    assert!(evolve(&gen, &rho0, -1.0, 0.1, 1).is_err());
    assert!(evolve(&gen, &rho0, 1.0, 0.1, 0).is_err());
    // 0.25 / 0.1 rounds up to three shortened steps
    let t = evolve(&gen, &rho0, 0.25, 0.1, 1).unwrap();
    assert_eq!(t.len(), 4);
    assert!((t.times[1] - 0.25 / 3.0).abs() < 1e-15);
}

#[test]
fn evolve_step_halving_converges_at_fourth_order() {
    let space = fock(16);
    let gen = GeneratorSpec::linear_laser(1.0, 0.3, 1.0).unwrap();
    let rho0 = coherent_state(c(0.8), space).unwrap();
    let fin = |dt: f64| evolve(&gen, &rho0, 1.0, dt, 1_000_000).unwrap().final_state().matrix().clone();
    let reference = fin(1e-4);
    let e1 = linalg::max_abs(&(fin(0.1) - &reference));
    let e2 = linalg::max_abs(&(fin(0.05) - &reference));
    let ratio = e1 / e2;
    assert!(ratio > 12.0 && ratio < 20.0, "error ratio {ratio}");
}

#[test]
fn truncation_detected() {
    let space = fock(12);
    let gen = GeneratorSpec::linear_laser(1.0, 2.0, 1.0).unwrap();
    let rho0 = DensityMatrix::fock_state(space, 2).unwrap();
    assert!(matches!(evolve(&gen, &rho0, 10.0, 1e-3, 100), Err(Error::Truncation(_))));
}

#[test]
fn stationary_thermal_below_threshold() {
    let space = fock(30);
    let x = 2f64.ln();
    let gen = GeneratorSpec::linear_laser(1.0, (-x).exp(), 1.0).unwrap();
    let st = stationary_state(&gen, space).unwrap();
    let th = thermal_state(x, space).unwrap();
    assert!(linalg::max_abs(&(st.matrix() - th.matrix())) < 1e-8);
}

#[test]
fn stationary_absent_above_threshold() {
    let gen = GeneratorSpec::linear_laser(1.0, 1.5, 1.0).unwrap();
    assert!(matches!(stationary_state(&gen, fock(20)), Err(Error::NoStationaryState(_))));
    let gen = GeneratorSpec::linear_laser(1.0, 1.0, 1.0).unwrap();
    assert!(matches!(stationary_state(&gen, fock(20)), Err(Error::NoStationaryState(_))));
}

#[test]
fn stationary_degenerate_kernel() {
    // no dissipation: every diagonal state is stationary
    let space = HilbertSpace::levels(3).unwrap();
    let h = Operator::diagonal(space, &[0.0, 1.0, 2.5]).unwrap();
    let gen = GeneratorSpec::general(h, vec![]).unwrap();
    assert!(matches!(stationary_state(&gen, space), Err(Error::DegenerateKernel(_))));
}

#[test]
fn davies_single_bath_qubit_thermalizes() {
    let space = HilbertSpace::levels(2).unwrap();
    let h = Operator::diagonal(space, &[0.0, 1.0]).unwrap();
    let gen = davies_generator(&h, &[DaviesCoupling::new(0, qubit_sigma_x(), ohmic)], &[0.7]).unwrap();
    let GeneratorSpec::Davies(dav) = &gen else { unreachable!() };
    let gibbs = dav.gibbs_state(0.7).unwrap();
    assert!(generator_apply(&gen, &gibbs).unwrap().norm() < 1e-12);
    let st = stationary_state(&gen, space).unwrap();
    assert!(linalg::max_abs(&(st.matrix() - gibbs.matrix())) < 1e-10);
}

#[test]
fn davies_three_level_thermalizes() {
    let space = HilbertSpace::levels(3).unwrap();
    let h = Operator::diagonal(space, &[0.0, 1.0, 2.7]).unwrap();
    let mut s = CMatrix::zeros(3, 3);
    for (i, j) in [(0, 1), (1, 2), (0, 2)] {
        s[(i, j)] = c(1.0);
        s[(j, i)] = c(1.0);
    }
    let coupling = DaviesCoupling::new(0, Operator::new(space, s).unwrap(), |w| 0.2 + w);
    let gen = davies_generator(&h, &[coupling], &[1.3]).unwrap();
    let GeneratorSpec::Davies(dav) = &gen else { unreachable!() };
    assert!(generator_apply(&gen, &dav.gibbs_state(1.3).unwrap()).unwrap().norm() < 1e-12);
}

#[test]
fn davies_rejects_degenerate_spectra() {
    let space = HilbertSpace::levels(3).unwrap();
    let x = Operator::identity(space);
    let degenerate = Operator::diagonal(space, &[0.0, 1.0, 1.0]).unwrap();
    let equal_gaps = Operator::diagonal(space, &[0.0, 1.0, 2.0]).unwrap();
    for h in [degenerate, equal_gaps] {
        let r = davies_generator(&h, &[DaviesCoupling::new(0, x.clone(), ohmic)], &[1.0]);
        assert!(matches!(r, Err(Error::DegenerateSpectrum(_))));
    }
}

#[test]
fn davies_zero_rates_leave_pure_commutator() {
    let space = HilbertSpace::levels(2).unwrap();
    let h = Operator::diagonal(space, &[0.0, 1.0]).unwrap();
    let gen = davies_generator(&h, &[DaviesCoupling::new(0, qubit_sigma_x(), |_| 0.0)], &[1.0]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let rho = random_state(space, &mut rng);
    let out = generator_apply(&gen, &rho).unwrap();
    let comm = h.matrix() * rho.matrix() - rho.matrix() * h.matrix();
    let expected = comm * Complex64::new(0.0, -1.0);
    assert!(linalg::max_abs(&(out.matrix() - expected)) < 1e-15);
}

#[test]
fn davies_two_bath_currents() {
    let space = HilbertSpace::levels(2).unwrap();
    let h = Operator::diagonal(space, &[0.0, 1.0]).unwrap();
    let couplings = [
        DaviesCoupling::new(0, qubit_sigma_x(), ohmic),
        DaviesCoupling::new(1, qubit_sigma_x(), |w| 0.5 * w),
    ];
    // bath 0 hot, bath 1 cold
    let betas = [0.5, 2.0];
    let gen = davies_generator(&h, &couplings, &betas).unwrap();
    let GeneratorSpec::Davies(dav) = &gen else { unreachable!() };
    let st = stationary_state(&gen, space).unwrap();
    let j: Vec<f64> = (0..2)
        .map(|k| {
            let lk = dav.bath_generator(k).unwrap().compile(space).unwrap();
            linalg::trace_product(st.matrix(), &lk.adjoint(h.matrix())).re
        })
        .collect();
    assert!((j[0] + j[1]).abs() < 1e-10);
    assert!(j[0] > 0.0);

    // two-level rate-equation oracle for the excited population
    let (g1, g2) = (ohmic(1.0), 0.5);
    let up = g1 * (-betas[0]).exp() + g2 * (-betas[1]).exp();
    let p1 = up / (up + g1 + g2);
    assert!((st.matrix()[(1, 1)].re - p1).abs() < 1e-10);
    let j_hot = g1 * ((-betas[0]).exp() * (1.0 - p1) - p1);
    assert!((j[0] - j_hot).abs() < 1e-10);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn trace_and_hermiticity_preserved(seed in any::<u64>(), gu in 0.0f64..2.0, gd in 0.0f64..2.0, dl in 0.0f64..0.5) {
        let space = fock(7);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = random_state(space, &mut rng);
        let gen = GeneratorSpec::loaded_laser(1.0, gu, gd, dl).unwrap();
        let out = generator_apply(&gen, &rho).unwrap();
        prop_assert!(out.trace().norm() < 1e-12);
        prop_assert!(out.is_hermitian(1e-12));
    }

    #[test]
    fn adjoint_duality(seed in any::<u64>(), gu in 0.0f64..2.0, gd in 0.0f64..2.0, dl in 0.0f64..0.5) {
        let space = fock(6);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = random_state(space, &mut rng);
        let x = random_state(space, &mut rng);
        let a = Operator::new(space, x.matrix() * Complex64::new(0.3, 1.0)).unwrap();
        let gen = GeneratorSpec::loaded_laser(0.8, gu, gd, dl).unwrap();
        let lhs = linalg::trace_product(generator_apply(&gen, &rho).unwrap().matrix(), a.matrix());
        let rhs = linalg::trace_product(rho.matrix(), adjoint_apply(&gen, &a).unwrap().matrix());
        prop_assert!((lhs - rhs).norm() < 1e-12);
        let unit = adjoint_apply(&gen, &Operator::identity(space)).unwrap();
        prop_assert!(unit.norm() < 1e-13);
    }

    #[test]
    fn davies_duality_and_unitality(seed in any::<u64>(), beta in 0.1f64..3.0) {
        let space = HilbertSpace::levels(3).unwrap();
        let h = Operator::diagonal(space, &[0.0, 0.9, 2.3]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_state(space, &mut rng).into_operator();
        let gen = davies_generator(&h, &[DaviesCoupling::new(0, s, |w| 0.1 + w)], &[beta]).unwrap();
        let rho = random_state(space, &mut rng);
        let a = random_state(space, &mut rng).into_operator();
        let lhs = linalg::trace_product(generator_apply(&gen, &rho).unwrap().matrix(), a.matrix());
        let rhs = linalg::trace_product(rho.matrix(), adjoint_apply(&gen, &a).unwrap().matrix());
        prop_assert!((lhs - rhs).norm() < 1e-12);
        prop_assert!(adjoint_apply(&gen, &Operator::identity(space)).unwrap().norm() < 1e-13);
        let GeneratorSpec::Davies(dav) = &gen else { unreachable!() };
        prop_assert!(generator_apply(&gen, &dav.gibbs_state(beta).unwrap()).unwrap().norm() < 1e-12);
    }

    #[test]
    fn evolution_keeps_states_positive(seed in any::<u64>()) {
        let space = fock(24);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = low_random_state(space, 4, &mut rng);
        let gen = GeneratorSpec::loaded_laser(1.0, 0.3, 1.0, 0.05).unwrap();
        let traj = evolve(&gen, &rho, 1.0, 1e-2, 10).unwrap();
        for s in &traj.states {
            prop_assert!(s.eigenvalues().unwrap()[0] > -1e-12);
            prop_assert!((s.operator().trace().re - 1.0).abs() < 1e-14);
        }
    }
}
