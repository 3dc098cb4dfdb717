//! Randomized invariants of the kernel, the means, the divergence and the
//! structural operations. Inputs are drawn from seeded generators so every
//! counterexample proptest reports is reproducible from its seed.

use pdmeans::divergences::{bures_wasserstein_distance, phi_alpha_z, q_alpha_z, AlphaZ};
use pdmeans::linalg::{
    congruence, eigh, gram_power, loewner_leq, relative_frobenius_error, relative_max_error,
    CMatrix, Hermitian, PdMatrix, PdRng,
};
use pdmeans::means::{
    arithmetic_mean, cartan_mean, geometric_mean_two, harmonic_mean, power_mean, thompson_distance,
    PdTuple, WeightVector,
};
use pdmeans::rightmean::{commuting_right_mean, residual, residual_geomform, right_mean};
use pdmeans::structure::{
    hadamard_product, psi_extract, tensor_product, weak_log_majorizes, weak_majorizes,
};
use pdmeans::wasserstein::{wasserstein_iterate, wasserstein_mean};
use pdmeans::SolverConfig;
use proptest::prelude::*;

const SLACK: f64 = 1e-8;

fn solver() -> SolverConfig {
    SolverConfig::new(1e-11, 2000, 1.0).unwrap()
}

fn tuple(rng: &mut PdRng, n: usize, dim: usize, cond: f64) -> PdTuple {
    PdTuple::new((0..n).map(|_| rng.pd(dim, cond).unwrap()).collect()).unwrap()
}

fn weights(rng: &mut PdRng, n: usize) -> WeightVector {
    WeightVector::new(rng.probability(n)).unwrap()
}

fn conjugate(u: &CMatrix, a: &PdMatrix) -> PdMatrix {
    PdMatrix::new(Hermitian::symmetrized(u * a.matrix() * u.adjoint())).unwrap()
}

/// `(α, z)` anywhere in the divergence domain `0 < α ≤ z < 1`, kept away
/// from the edges where the right mean's equation degenerates.
fn params() -> impl Strategy<Value = AlphaZ> {
    (0.25f64..0.95, 0.05f64..1.0)
        .prop_map(|(z, frac)| AlphaZ::new((frac * z).max(0.02), z).unwrap())
}

fn cond() -> impl Strategy<Value = f64> {
    prop_oneof![Just(10.0), Just(1e3)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn powers_compose_additively(seed: u64, dim in 2usize..6, s in -2.0f64..2.0, t in -2.0f64..2.0) {
        let a = PdRng::new(seed).pd(dim, 1e3).unwrap();
        let product = a.pow_matrix(s) * a.pow_matrix(t);
        prop_assert!(relative_frobenius_error(&product, &a.pow_matrix(s + t)) < 1e-9);
    }

    #[test]
    fn eigh_reconstructs_ill_conditioned_inputs(seed: u64, dim in 2usize..=16, log_cond in 0.0f64..8.0) {
        let a = PdRng::new(seed).pd(dim, 10f64.powf(log_cond)).unwrap();
        let eig = eigh(a.hermitian()).unwrap();
        prop_assert!(relative_frobenius_error(&eig.reconstruct(), a.matrix()) < 1e-10);
        prop_assert!(eig.values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn congruence_by_invertible_factor_stays_positive(seed: u64, dim in 2usize..5) {
        let mut rng = PdRng::new(seed);
        let a = rng.pd(dim, 1e3).unwrap();
        // An invertible factor: a positive definite matrix times a unitary.
        let m = rng.pd(dim, 1e2).unwrap().matrix() * rng.unitary(dim);
        let c = congruence(&m, a.hermitian()).unwrap();
        prop_assert!(PdMatrix::new(c).is_ok());
    }

    #[test]
    fn loewner_order_is_reflexive_and_antisymmetric(seed: u64, dim in 2usize..5) {
        let mut rng = PdRng::new(seed);
        let a = rng.pd(dim, 1e3).unwrap();
        let b = rng.pd(dim, 1e3).unwrap();
        prop_assert!(loewner_leq(a.hermitian(), a.hermitian(), 0.0).unwrap());
        let both = loewner_leq(a.hermitian(), b.hermitian(), SLACK).unwrap()
            && loewner_leq(b.hermitian(), a.hermitian(), SLACK).unwrap();
        prop_assert!(!both || relative_max_error(a.matrix(), b.matrix()) < 1e-6);
    }

    #[test]
    fn gram_power_agrees_with_eigendecomposition(seed: u64, dim in 2usize..6, t in 0.1f64..2.0) {
        let mut rng = PdRng::new(seed);
        let f = rng.pd(dim, 1e2).unwrap().matrix() * rng.unitary(dim);
        let gram = PdMatrix::new(Hermitian::symmetrized(&f * f.adjoint())).unwrap();
        let direct = gram_power(&f, t).unwrap();
        prop_assert!(relative_frobenius_error(direct.matrix(), &gram.pow_matrix(t)) < 1e-11);
    }

    #[test]
    fn power_means_interpolate_between_harmonic_and_arithmetic(
        seed: u64, dim in 2usize..5, n in 2usize..5, cond in cond(), s in 0.05f64..1.0, frac in 0.0f64..1.0,
    ) {
        let t = s + frac * (1.0 - s);
        let mut rng = PdRng::new(seed);
        let tuple = tuple(&mut rng, n, dim, cond);
        let w = weights(&mut rng, n);
        let cfg = solver();
        let chain = [
            harmonic_mean(&w, &tuple).unwrap(),
            power_mean(-t, &w, &tuple, &cfg).unwrap().0,
            power_mean(-s, &w, &tuple, &cfg).unwrap().0,
            cartan_mean(&w, &tuple, &cfg).unwrap().0,
            power_mean(s, &w, &tuple, &cfg).unwrap().0,
            power_mean(t, &w, &tuple, &cfg).unwrap().0,
            arithmetic_mean(&w, &tuple).unwrap(),
        ];
        for pair in chain.windows(2) {
            prop_assert!(loewner_leq(pair[0].hermitian(), pair[1].hermitian(), SLACK).unwrap());
        }
    }

    #[test]
    fn means_are_unitarily_equivariant_and_homogeneous(
        seed: u64, dim in 2usize..5, n in 2usize..5, t in 0.1f64..1.0, c in 0.1f64..10.0,
    ) {
        let mut rng = PdRng::new(seed);
        let tuple = tuple(&mut rng, n, dim, 1e2);
        let w = weights(&mut rng, n);
        let u = rng.unitary(dim);
        let rotated = tuple.map(|a| Ok(conjugate(&u, a))).unwrap();
        let scaled = tuple.scale(c).unwrap();
        let cfg = solver();
        type Mean = Box<dyn Fn(&PdTuple) -> PdMatrix>;
        let (w1, w2, w3, w4) = (w.clone(), w.clone(), w.clone(), w.clone());
        let means: Vec<(&str, Mean)> = vec![
            ("power", Box::new(move |x| power_mean(t, &w1, x, &cfg).unwrap().0)),
            ("cartan", Box::new(move |x| cartan_mean(&w2, x, &cfg).unwrap().0)),
            ("wasserstein", Box::new(move |x| wasserstein_mean(&w3, x, &cfg).unwrap().0)),
            ("arithmetic", Box::new(move |x| arithmetic_mean(&w4, x).unwrap())),
        ];
        for (name, mean) in &means {
            let base = mean(&tuple);
            let equivariant = conjugate(&u, &base);
            prop_assert!(relative_frobenius_error(mean(&rotated).matrix(), equivariant.matrix()) < 1e-9, "{}", name);
            let homogeneous = base.scale(c).unwrap();
            prop_assert!(relative_frobenius_error(mean(&scaled).matrix(), homogeneous.matrix()) < 1e-9, "{}", name);
        }
    }

    #[test]
    fn divergence_is_nonnegative_and_unitarily_invariant(seed: u64, dim in 2usize..5, p in params(), cond in cond()) {
        let mut rng = PdRng::new(seed);
        let a = rng.pd(dim, cond).unwrap();
        let b = rng.pd(dim, cond).unwrap();
        let phi = phi_alpha_z(&p, &a, &b).unwrap();
        prop_assert!(phi >= -1e-10 * (1.0 + a.trace() + b.trace()));
        let u = rng.unitary(dim);
        let rotated = phi_alpha_z(&p, &conjugate(&u, &a), &conjugate(&u, &b)).unwrap();
        prop_assert!((rotated - phi).abs() <= 1e-9 * phi.abs().max(1e-3 * (a.trace() + b.trace())));
        prop_assert!(phi_alpha_z(&p, &a, &a).unwrap().abs() < 1e-12 * (1.0 + a.trace()));
    }

    #[test]
    fn divergence_at_one_half_is_squared_bures_distance(seed: u64, dim in 2usize..5, cond in cond()) {
        let mut rng = PdRng::new(seed);
        let a = rng.pd(dim, cond).unwrap();
        let b = rng.pd(dim, cond).unwrap();
        let phi = phi_alpha_z(&AlphaZ::new(0.5, 0.5).unwrap(), &a, &b).unwrap();
        let d = bures_wasserstein_distance(&a, &b).unwrap();
        prop_assert!((phi - d * d).abs() <= 1e-10 * phi.max(1e-2));
    }

    #[test]
    fn q_of_a_matrix_with_itself_is_the_matrix(seed: u64, dim in 2usize..5, p in params()) {
        let a = PdRng::new(seed).pd(dim, 1e3).unwrap();
        let q = q_alpha_z(&p, &a, &a).unwrap();
        prop_assert!(relative_max_error(q.matrix(), a.matrix()) < 1e-10);
    }

    #[test]
    fn right_mean_matches_commuting_closed_form(
        seed: u64, dim in 2usize..7, n in 2usize..6, p in params(), log_cond in 0.0f64..3.0,
    ) {
        let mut rng = PdRng::new(seed);
        let u = rng.unitary(dim);
        let tuple = PdTuple::new(
            (0..n).map(|_| PdMatrix::from_spectrum(u.clone(), &rng.spectrum(dim, 10f64.powf(log_cond))).unwrap()).collect(),
        ).unwrap();
        let w = weights(&mut rng, n);
        let (x, _) = right_mean(&p, &w, &tuple, &solver()).unwrap();
        // The closed form evaluated eigenvalue by eigenvalue in the shared basis.
        let spectrum: Vec<f64> = (0..dim)
            .map(|i| {
                let diag = |a: &PdMatrix| (u.adjoint() * a.matrix() * &u)[(i, i)].re;
                let s = 1.0 - p.alpha();
                w.iter().zip(tuple.iter()).map(|(wj, a)| wj * diag(a).powf(s)).sum::<f64>().powf(1.0 / s)
            })
            .collect();
        let oracle = PdMatrix::from_spectrum(u, &spectrum).unwrap();
        prop_assert!(relative_max_error(x.matrix(), oracle.matrix()) < 1e-9);
        let library = commuting_right_mean(p.alpha(), &w, &tuple).unwrap();
        prop_assert!(relative_max_error(library.matrix(), oracle.matrix()) < 1e-9);
    }

    #[test]
    fn right_mean_certificate_and_bounds(seed: u64, dim in 2usize..5, n in 2usize..5, p in params(), cond in cond()) {
        let mut rng = PdRng::new(seed);
        let tuple = tuple(&mut rng, n, dim, cond);
        let w = weights(&mut rng, n);
        let (x, report) = right_mean(&p, &w, &tuple, &solver()).unwrap();
        prop_assert!(report.converged());
        prop_assert!(residual(&p, &w, &tuple, &x).unwrap() < 1e-9);
        prop_assert!(residual_geomform(&p, &w, &tuple, &x).unwrap() < 1e-9);
        let lo = Hermitian::identity(dim).scale(tuple.lower_bound());
        let hi = Hermitian::identity(dim).scale(tuple.upper_bound());
        prop_assert!(loewner_leq(&lo, x.hermitian(), SLACK).unwrap());
        prop_assert!(loewner_leq(x.hermitian(), &hi, SLACK).unwrap());
    }

    #[test]
    fn right_mean_symmetries(seed: u64, dim in 2usize..5, n in 2usize..5, p in params(), c in 0.1f64..3.0) {
        let mut rng = PdRng::new(seed);
        let tuple = tuple(&mut rng, n, dim, 1e2);
        let w = weights(&mut rng, n);
        let cfg = solver();
        let (x, _) = right_mean(&p, &w, &tuple, &cfg).unwrap();

        let (scaled, _) = right_mean(&p, &w, &tuple.scale(c).unwrap(), &cfg).unwrap();
        prop_assert!(relative_frobenius_error(scaled.matrix(), x.scale(c).unwrap().matrix()) < SLACK);

        let sigma = rng.permutation(n);
        let pw = WeightVector::new(sigma.iter().map(|&i| w.as_slice()[i]).collect()).unwrap();
        let pt = PdTuple::new(sigma.iter().map(|&i| tuple.items()[i].clone()).collect()).unwrap();
        let (permuted, _) = right_mean(&p, &pw, &pt, &cfg).unwrap();
        prop_assert!(relative_frobenius_error(permuted.matrix(), x.matrix()) < SLACK);

        let u = rng.unitary(dim);
        let (rotated, _) = right_mean(&p, &w, &tuple.map(|a| Ok(conjugate(&u, a))).unwrap(), &cfg).unwrap();
        prop_assert!(relative_frobenius_error(rotated.matrix(), conjugate(&u, &x).matrix()) < SLACK);

        let log_det_bound: f64 = w.iter().zip(tuple.iter()).map(|(wj, a)| wj * a.log_det()).sum();
        prop_assert!(x.log_det() >= log_det_bound - SLACK);
    }

    #[test]
    fn right_mean_at_one_half_is_the_wasserstein_mean(seed: u64, dim in 2usize..5, n in 2usize..5, cond in cond()) {
        let mut rng = PdRng::new(seed);
        let tuple = tuple(&mut rng, n, dim, cond);
        let w = weights(&mut rng, n);
        let cfg = solver();
        let (r, _) = right_mean(&AlphaZ::new(0.5, 0.5).unwrap(), &w, &tuple, &cfg).unwrap();
        let (omega, _) = wasserstein_mean(&w, &tuple, &cfg).unwrap();
        prop_assert!(relative_frobenius_error(r.matrix(), omega.matrix()) < 1e-7);
    }

    #[test]
    fn k_map_traces_never_decrease(seed: u64, dim in 2usize..5, n in 2usize..5, cond in cond()) {
        let mut rng = PdRng::new(seed);
        let tuple = tuple(&mut rng, n, dim, cond);
        let w = weights(&mut rng, n);
        let random_start = rng.pd(dim, cond).unwrap();
        let cfg = solver();
        let (omega, _) = wasserstein_mean(&w, &tuple, &cfg).unwrap();
        for start in [None, Some(PdMatrix::identity(dim)), Some(random_start)] {
            let run = wasserstein_iterate(&w, &tuple, start, &cfg).unwrap();
            prop_assert!(run.traces_nondecreasing());
            let last = run.traces.last().copied().unwrap_or(f64::NEG_INFINITY);
            prop_assert!(last <= omega.trace() + 1e-8);
        }
    }

    #[test]
    fn thompson_distance_to_cartan_shrinks_with_the_parameter(seed: u64, dim in 2usize..4, n in 2usize..4) {
        let mut rng = PdRng::new(seed);
        let tuple = tuple(&mut rng, n, dim, 10.0);
        let w = weights(&mut rng, n);
        let cfg = solver();
        let (lambda, _) = cartan_mean(&w, &tuple, &cfg).unwrap();
        // Far from the limit (t ≥ 1/4) the decrease holds with a wide margin.
        let d: Vec<f64> = [1.0, 0.5, 0.25]
            .iter()
            .map(|&t| thompson_distance(&power_mean(t, &w, &tuple, &cfg).unwrap().0, &lambda).unwrap())
            .collect();
        prop_assert!(d.windows(2).all(|p| p[1] <= p[0] + SLACK));
    }

    #[test]
    fn weak_log_majorization_implies_weak_majorization(
        x in prop::collection::vec(0.01f64..100.0, 1..6), factors in prop::collection::vec(1.0f64..3.0, 6),
    ) {
        // y ≥ x entrywise after sorting is sufficient for weak log-majorization.
        let mut y: Vec<f64> = x.clone();
        y.sort_by(|a, b| b.total_cmp(a));
        let mut xs = x.clone();
        xs.sort_by(|a, b| b.total_cmp(a));
        let y: Vec<f64> = y.iter().zip(&factors).map(|(v, f)| v * f).collect();
        let log = weak_log_majorizes(&y, &xs, 1e-10).unwrap();
        prop_assert!(log.holds);
        prop_assert!(weak_majorizes(&y, &xs, 1e-10).unwrap().holds);
    }

    #[test]
    fn weak_log_majorization_verdicts_are_consistent(
        x in prop::collection::vec(0.01f64..100.0, 3), y in prop::collection::vec(0.01f64..100.0, 3),
    ) {
        if weak_log_majorizes(&y, &x, 0.0).unwrap().holds {
            prop_assert!(weak_majorizes(&y, &x, 1e-10).unwrap().holds);
        }
    }

    #[test]
    fn hadamard_product_is_a_principal_block_of_the_tensor_product(seed: u64, dim in 1usize..4) {
        let mut rng = PdRng::new(seed);
        let a = rng.pd(dim, 1e2).unwrap();
        let b = rng.pd(dim, 1e2).unwrap();
        let extracted = psi_extract(&tensor_product(a.matrix(), b.matrix())).unwrap();
        let direct = hadamard_product(a.matrix(), b.matrix()).unwrap();
        prop_assert!((extracted - direct).norm() == 0.0);
    }

    #[test]
    fn tensor_product_multiplies_spectra(seed: u64, m in 1usize..4, k in 1usize..4) {
        let mut rng = PdRng::new(seed);
        let a = rng.pd(m, 1e2).unwrap();
        let b = rng.pd(k, 1e2).unwrap();
        let t = PdMatrix::new(Hermitian::symmetrized(tensor_product(a.matrix(), b.matrix()))).unwrap();
        let mut products: Vec<f64> =
            a.eigenvalues().iter().flat_map(|x| b.eigenvalues().iter().map(move |y| x * y)).collect();
        products.sort_by(|p, q| q.total_cmp(p));
        for (got, want) in t.eigenvalues().iter().zip(&products) {
            prop_assert!((got - want).abs() <= 1e-12 * want.max(1.0));
        }
    }

    #[test]
    fn two_point_geometric_mean_is_symmetric(seed: u64, dim in 2usize..5, t in 0.0f64..1.0) {
        let mut rng = PdRng::new(seed);
        let a = rng.pd(dim, 1e3).unwrap();
        let b = rng.pd(dim, 1e3).unwrap();
        let ab = geometric_mean_two(&a, &b, t).unwrap();
        let ba = geometric_mean_two(&b, &a, 1.0 - t).unwrap();
        prop_assert!(relative_frobenius_error(ab.matrix(), ba.matrix()) < 1e-9);
    }
}
