use proptest::prelude::*;
use qdho_core::classical::{classical_propagator, evolve_classical_analytic, ClassicalParams, PhasePoint};
use qdho_core::fock::{build_operators, validate_density, DensityMatrix};
use qdho_core::observables::{expect_n, hermitian_eigenvalues};
use qdho_core::propagator::{check_truncation, evolve_analytic, evolve_lindblad_only, evolve_nu_zero};
use qdho_core::su11::{efg, exp_ta};
use qdho_core::superop::{evolve_numeric_expm, sandwich_check};
use qdho_core::{ComplexMatrix, ModelParams, TruncationConfig, C64};

fn complex_matrix(d: usize) -> impl Strategy<Value = ComplexMatrix> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), d * d).prop_map(move |v| {
        let entries = v.into_iter().map(|(re, im)| C64::new(re, im)).collect();
        ComplexMatrix::from_row_major(d, d, entries).unwrap()
    })
}

/// `(XX† + εI)/tr(…)` for `X` supported on levels `0..=support`, embedded in `D`.
fn density(d: usize, support: usize) -> impl Strategy<Value = DensityMatrix> {
    complex_matrix(support + 1).prop_map(move |x| {
        let mut g = x.matmul(&x.adjoint());
        g.add_scaled(C64::new(1e-3, 0.0), &ComplexMatrix::identity(support + 1));
        let rho = g.scale_real(1.0 / g.trace().re).embed(d);
        DensityMatrix::new(rho, TruncationConfig::from_dim(d).unwrap(), 1e-10).unwrap()
    })
}

fn rates() -> impl Strategy<Value = (f64, f64, f64)> {
    (0.0f64..3.0, 0.0f64..1.5, 0.0f64..2.0)
}

fn dist(a: &DensityMatrix, b: &DensityMatrix) -> f64 {
    (a.mat() - b.mat()).frobenius_norm()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sandwich_identity(d in prop::sample::select(vec![2usize, 3, 5, 8]), seed in any::<u64>()) {
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
        let m = |rng: &mut rand_chacha::ChaCha8Rng| qdho_core::identities::random_matrix(d, rng);
        let (a, x, b) = (m(&mut rng), m(&mut rng), m(&mut rng));
        prop_assert!(sandwich_check(&a, &x, &b).unwrap() <= 1e-12);
    }

    #[test]
    fn nu_zero_matches_general_solution(
        rho in density(12, 8),
        mu in 0.0f64..3.0,
        omega in 0.0f64..5.0,
        t in 0.0f64..4.0,
    ) {
        let params = ModelParams::new(omega, mu, 0.0).unwrap();
        let general = evolve_analytic(&rho, &params, t).unwrap();
        let direct = evolve_nu_zero(&rho, mu, omega, t).unwrap();
        prop_assert!(general.mat().max_abs_diff(direct.mat()) <= 1e-12);
    }

    #[test]
    fn populations_ignore_omega(rho in density(10, 5), (mu, nu, t) in rates()) {
        let diag = |omega: f64| {
            let p = ModelParams::new(omega, mu, nu).unwrap();
            evolve_analytic(&rho, &p, t).unwrap().mat().diagonal()
        };
        let base = diag(0.0);
        for omega in [1.0, 10.0] {
            for (x, y) in base.iter().zip(diag(omega)) {
                prop_assert!((x - y).norm() <= 1e-12);
            }
        }
    }

    #[test]
    fn zero_omega_is_lindblad_only(rho in density(10, 5), (mu, nu, t) in rates()) {
        let p = ModelParams::new(0.0, mu, nu).unwrap();
        let a = evolve_analytic(&rho, &p, t).unwrap();
        let b = evolve_lindblad_only(&rho, mu, nu, t).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn theta_is_invisible(rho in density(10, 5), (mu, nu, t) in rates(), omega in 0.0f64..5.0) {
        let base = ModelParams::new(omega, mu, nu).unwrap();
        let reference = evolve_analytic(&rho, &base, t).unwrap();
        for theta in [std::f64::consts::FRAC_PI_3, std::f64::consts::PI] {
            let out = evolve_analytic(&rho, &base.with_theta(theta), t).unwrap();
            prop_assert!(out.mat().max_abs_diff(reference.mat()) <= 1e-12);
        }
    }

    #[test]
    fn semigroup(rho in density(24, 4), mu in 0.5f64..2.0, nu in 0.0f64..0.3, omega in 0.0f64..4.0, s in 0.0f64..1.0, t in 0.0f64..1.0) {
        let p = ModelParams::new(omega, mu, nu).unwrap();
        let two_step = evolve_analytic(&evolve_analytic(&rho, &p, s).unwrap(), &p, t).unwrap();
        let direct = evolve_analytic(&rho, &p, s + t).unwrap();
        prop_assert!(dist(&two_step, &direct) <= 1e-8);
    }

    #[test]
    fn evolved_states_stay_physical(rho in density(16, 5), mu in 0.2f64..3.0, nu in 0.0f64..0.2, omega in 0.0f64..5.0, t in 0.0f64..3.0) {
        let p = ModelParams::new(omega, mu, nu).unwrap();
        let out = evolve_analytic(&rho, &p, t).unwrap();
        prop_assert!(out.mat().hermiticity_deviation() <= 1e-12);
        let spec = hermitian_eigenvalues(out.mat(), 1e-10).unwrap();
        prop_assert!(spec.eigenvalues[0] >= -1e-9);
        let check = check_truncation(&rho, |r| evolve_analytic(r, &p, t)).unwrap();
        if check.converged {
            prop_assert!((out.mat().trace().re - 1.0).abs() <= 1e-8);
            prop_assert!(validate_density(out.mat(), 1e-8).unwrap().passed());
        }
    }

    #[test]
    fn photon_number_decays_exponentially_without_pumping(rho in density(12, 6), mu in 0.0f64..3.0, t in 0.0f64..3.0) {
        let trunc = TruncationConfig::from_dim(12).unwrap();
        let ops = build_operators(&trunc, 0.0);
        let n0 = expect_n(&rho, &ops).unwrap();
        let out = evolve_nu_zero(&rho, mu, 1.0, t).unwrap();
        prop_assert!((expect_n(&out, &ops).unwrap() - n0 * (-mu * t).exp()).abs() <= 1e-10);
    }

    #[test]
    fn f_is_positive_and_product_has_unit_determinant(mu in 0.0f64..5.0, nu in 0.0f64..5.0, t in 0.0f64..5.0) {
        let c = efg(mu, nu, t).unwrap();
        prop_assert!(c.f_coef > 0.0);
        let m = exp_ta(mu, nu, t);
        let scale = m.a().norm() * m.d().norm() + m.b().norm() * m.c().norm();
        prop_assert!((m.det() - C64::new(1.0, 0.0)).norm() <= 1e-12 * scale.max(1.0));
    }

    #[test]
    fn classical_determinant(omega in 0.5f64..5.0, frac in 0.0f64..0.99, t in 0.0f64..10.0) {
        let params = ClassicalParams::new(omega, frac * omega).unwrap();
        let m = classical_propagator(&params, t).unwrap();
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        prop_assert!((det - (-2.0 * params.gamma * t).exp()).abs() <= 1e-12);
    }

    #[test]
    fn classical_semigroup(omega in 0.5f64..5.0, frac in 0.0f64..0.99, s in 0.0f64..5.0, t in 0.0f64..5.0, x in -1.0f64..1.0, y in -1.0f64..1.0) {
        let params = ClassicalParams::new(omega, frac * omega).unwrap();
        let p0 = PhasePoint::new(x, y);
        let mid = evolve_classical_analytic(&p0, &params, s).unwrap();
        let a = evolve_classical_analytic(&mid, &params, t).unwrap();
        let b = evolve_classical_analytic(&p0, &params, s + t).unwrap();
        prop_assert!(a.distance(&b) <= 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn analytic_matches_superoperator_exponential(rho in density(16, 3), mu in 0.5f64..2.0, nu in 0.0f64..0.2, omega in 0.0f64..6.0, t in 0.0f64..1.5) {
        let p = ModelParams::new(omega, mu, nu).unwrap();
        let a = evolve_analytic(&rho, &p, t).unwrap();
        let e = evolve_numeric_expm(&rho, &p, t).unwrap();
        prop_assert!(dist(&a, &e) <= 1e-8, "distance {}", dist(&a, &e));
    }
}
