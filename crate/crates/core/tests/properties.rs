use nalgebra::{Complex, DMatrix};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use spa_core::channels::{
    apply_channel, spa_transpose_channel, spa_transpose_choi, spa_transpose_map,
};
use spa_core::metrics::{negativity, overlap_fidelity, uhlmann_fidelity};
use spa_core::optics::Polarization;
use spa_core::optics::{jones_matrix, WaveplateKind, WaveplateSetting};
use spa_core::qmath::{
    eigenvalues, haar_random_ket, hermitian_eigensystem, matrix_sqrt_psd, partial_trace_first,
    partial_trace_second, random_density_matrix, tensor_product, ComplexMatrix, DensityMatrix,
};
use spa_core::shots::TomographyKind;
use spa_core::shots::{generate_tomography_dataset, DatasetRequest, SourceModel, SpaScheme};
use spa_core::tomography::{qst_mle, Observation, TomographyProblem};

fn matrix_from(dim: usize, raw: &[f64]) -> ComplexMatrix {
    let entries = raw.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect();
    ComplexMatrix::new(dim, entries).unwrap()
}

fn hermitian(dim: usize) -> impl Strategy<Value = ComplexMatrix> {
    prop::collection::vec(-1.0f64..1.0, 2 * dim * dim)
        .prop_map(move |raw| matrix_from(dim, &raw).hermitian_part())
}

fn psd(dim: usize) -> impl Strategy<Value = ComplexMatrix> {
    prop::collection::vec(-1.0f64..1.0, 2 * dim * dim).prop_map(move |raw| {
        let g = matrix_from(dim, &raw);
        &g * &g.adjoint()
    })
}

fn to_nalgebra(m: &ComplexMatrix) -> DMatrix<Complex<f64>> {
    DMatrix::from_fn(m.dim(), m.dim(), |r, c| m[(r, c)])
}

fn state(seed: u64) -> DensityMatrix {
    random_density_matrix(2, &mut ChaCha8Rng::seed_from_u64(seed))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn eigenvalues_match_nalgebra(m in (2usize..=5).prop_flat_map(hermitian)) {
        let ours = eigenvalues(&m).unwrap();
        let mut theirs: Vec<f64> = to_nalgebra(&m).symmetric_eigenvalues().iter().copied().collect();
        theirs.sort_by(f64::total_cmp);
        for (a, b) in ours.iter().zip(&theirs) {
            prop_assert!((a - b).abs() < 1e-10, "{ours:?} vs {theirs:?}");
        }
    }

    #[test]
    fn eigenvectors_reconstruct(m in (2usize..=4).prop_flat_map(hermitian)) {
        let eig = hermitian_eigensystem(&m).unwrap();
        prop_assert!(eig.reconstruct().max_abs_diff(&m) < 1e-12);
    }

    #[test]
    fn square_root_squares_back(m in (2usize..=4).prop_flat_map(psd)) {
        let r = matrix_sqrt_psd(&m).unwrap();
        prop_assert!((&r * &r).max_abs_diff(&m) < 1e-10);
        prop_assert!(r.is_hermitian(1e-12));
    }

    #[test]
    fn partial_traces_of_products(a in psd(2), b in psd(2)) {
        let prod = tensor_product(&a, &b).unwrap();
        let first = partial_trace_second(&prod, 2).unwrap();
        let second = partial_trace_first(&prod, 2).unwrap();
        prop_assert!(first.max_abs_diff(&a.scale(b.trace().re)) < 1e-12);
        prop_assert!(second.max_abs_diff(&b.scale(a.trace().re)) < 1e-12);
    }

    #[test]
    fn uhlmann_bounds_and_symmetry(s1 in any::<u64>(), s2 in any::<u64>()) {
        let (a, b) = (state(s1), state(s2));
        let ab = uhlmann_fidelity(&a, &b).unwrap();
        let ba = uhlmann_fidelity(&b, &a).unwrap();
        prop_assert!((-1e-12..=1.0 + 1e-10).contains(&ab));
        prop_assert!((ab - ba).abs() < 1e-10);
    }

    #[test]
    fn transpose_overlap_is_two_thirds(seed in any::<u64>()) {
        let psi = DensityMatrix::pure(&haar_random_ket(2, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap());
        let out = apply_channel(&spa_transpose_channel(), &psi).unwrap();
        let f = overlap_fidelity(&psi.transpose(), &out).unwrap();
        prop_assert!((f - 2.0 / 3.0).abs() < 1e-11);
    }

    #[test]
    fn spa_map_is_positive_and_unital(m in psd(2), p in 0.0f64..=1.0) {
        let out = spa_transpose_map(&m, p);
        prop_assert!((out.trace() - m.trace()).norm() < 1e-12);
        prop_assert!(eigenvalues(&out).unwrap()[0] > -1e-12);
    }

    #[test]
    fn spa_choi_positivity_threshold(p in 0.0f64..=1.0) {
        let ok = eigenvalues(&spa_transpose_choi(2, p).unwrap()).unwrap()[0] >= -1e-12;
        if p > 2.0 / 3.0 + 1e-9 {
            prop_assert!(ok);
        } else if p < 2.0 / 3.0 - 1e-9 {
            prop_assert!(!ok);
        }
    }

    #[test]
    fn waveplates_are_unitary(angle in -10.0f64..10.0, half in any::<bool>()) {
        let kind = if half { WaveplateKind::Half } else { WaveplateKind::Quarter };
        let u = jones_matrix(&WaveplateSetting::new(kind, angle));
        prop_assert!((&u.adjoint() * &u).max_abs_diff(&ComplexMatrix::identity(2)) < 1e-12);
        let det = u[(0, 0)] * u[(1, 1)] - u[(0, 1)] * u[(1, 0)];
        prop_assert!((det.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn negativity_of_separable_mixtures(s1 in any::<u64>(), s2 in any::<u64>(), w in 0.0f64..=1.0) {
        let a = tensor_product(state(s1).matrix(), state(s2).matrix()).unwrap();
        let b = tensor_product(state(s2).matrix(), state(s1).matrix()).unwrap();
        let mix = &a.scale(w) + &b.scale(1.0 - w);
        prop_assert!(negativity(&DensityMatrix::new(mix).unwrap()).unwrap() < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(30))]

    #[test]
    fn mle_estimates_are_physical(counts in prop::collection::vec(0u32..5000, 6)) {
        prop_assume!(counts.iter().any(|&c| c > 0));
        let obs = Polarization::ALL
            .iter()
            .zip(&counts)
            .map(|(p, &n)| Observation { operator: p.ket().projector(), counts: n as f64, exposure: 3.0 })
            .collect();
        let problem = TomographyProblem::new(TomographyKind::Qst, obs).unwrap();
        let r = qst_mle(&problem).unwrap();
        let m = r.estimate.matrix();
        prop_assert!(eigenvalues(m).unwrap()[0] >= -1e-10);
        prop_assert!((m.trace().re - 1.0).abs() < 1e-10);
        let trace = r.log_likelihood_trace.unwrap();
        prop_assert!(trace.windows(2).all(|w| w[1] >= w[0]));
    }
}

#[test]
fn datasets_do_not_depend_on_thread_count() {
    let source = SourceModel::default();
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| {
                generate_tomography_dataset(
                    &DatasetRequest::Qpt,
                    Some(SpaScheme::MeasurePrepare),
                    &source,
                    42,
                )
                .unwrap()
            })
    };
    let one = serde_json::to_string(&run(1)).unwrap();
    let four = serde_json::to_string(&run(4)).unwrap();
    assert_eq!(one, four);
}
