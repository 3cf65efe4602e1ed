//! Shared fixtures for the benchmarks.

use spa_core::channels::spa_transpose_channel;
use spa_core::qmath::{random_density_matrix, DensityMatrix};
use spa_core::shots::{
    generate_tomography_dataset, DatasetRequest, SourceModel, SpaScheme, TomographyKind,
};
use spa_core::tomography::{Design, TomographyProblem};

pub const SEED: u64 = 11;

pub fn random_state(dim: usize, seed: u64) -> DensityMatrix {
    use rand::SeedableRng;
    random_density_matrix(dim, &mut rand_chacha::ChaCha8Rng::seed_from_u64(seed))
}

pub fn qst_request() -> DatasetRequest {
    DatasetRequest::Qst {
        input: random_state(2, SEED),
        input_label: "bench".into(),
    }
}

/// Shot-noise state-tomography problem at the default source settings.
pub fn qst_problem() -> TomographyProblem {
    let data = generate_tomography_dataset(
        &qst_request(),
        Some(SpaScheme::MeasurePrepare),
        &SourceModel::default(),
        SEED,
    )
    .expect("valid request");
    TomographyProblem::from_records(TomographyKind::Qst, &data.records, &Design::standard())
        .expect("complete design")
}

/// Shot-noise process-tomography problem for the measure-prepare scheme.
pub fn qpt_problem() -> TomographyProblem {
    let data = generate_tomography_dataset(
        &DatasetRequest::Qpt,
        Some(SpaScheme::MeasurePrepare),
        &SourceModel::default(),
        SEED,
    )
    .expect("valid request");
    TomographyProblem::from_records(TomographyKind::Qpt, &data.records, &Design::standard())
        .expect("complete design")
}

/// Noise-free process-tomography problem for the ideal SPA transpose.
pub fn noiseless_qpt_problem() -> TomographyProblem {
    TomographyProblem::noiseless(
        &DatasetRequest::Qpt,
        Some(&spa_transpose_channel()),
        &SourceModel::default(),
    )
    .expect("complete design")
}
