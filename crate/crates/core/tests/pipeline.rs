use spa_core::shots::{
    generate_tomography_dataset, read_csv, write_csv, DatasetRequest, SourceModel, SpaScheme,
    TomographyKind,
};
use spa_core::tomography::{qpt_mle, Design, TomographyProblem};

fn chi_entries(scheme: SpaScheme, seed: u64) -> Vec<f64> {
    let data = generate_tomography_dataset(
        &DatasetRequest::Qpt,
        Some(scheme),
        &SourceModel::default(),
        seed,
    )
    .unwrap();
    let problem =
        TomographyProblem::from_records(TomographyKind::Qpt, &data.records, &Design::standard())
            .unwrap();
    let chi = qpt_mle(&problem).unwrap().chi.unwrap();
    let m = chi.matrix();
    (0..4)
        .flat_map(|r| (0..4).flat_map(move |c| [m[(r, c)].re, m[(r, c)].im]))
        .collect()
}

fn mean_and_se(samples: &[Vec<f64>]) -> Vec<(f64, f64)> {
    let n = samples.len() as f64;
    (0..samples[0].len())
        .map(|k| {
            let mean = samples.iter().map(|s| s[k]).sum::<f64>() / n;
            let var = samples.iter().map(|s| (s[k] - mean).powi(2)).sum::<f64>() / (n - 1.0);
            (mean, (var / n).sqrt())
        })
        .collect()
}

#[test]
fn both_schemes_give_the_same_process_estimate() {
    let runs = 12;
    let mp: Vec<_> = (0..runs)
        .map(|s| chi_entries(SpaScheme::MeasurePrepare, 100 + s))
        .collect();
    let unitary: Vec<_> = (0..runs)
        .map(|s| chi_entries(SpaScheme::Unitary, 500 + s))
        .collect();
    for ((ma, sa), (mb, sb)) in mean_and_se(&mp).into_iter().zip(mean_and_se(&unitary)) {
        let se = (sa * sa + sb * sb).sqrt().max(1e-4);
        assert!((ma - mb).abs() < 5.0 * se, "{ma} vs {mb} (se {se})");
    }
}

#[test]
fn csv_round_trip_feeds_tomography() {
    let data = generate_tomography_dataset(
        &DatasetRequest::Qpt,
        Some(SpaScheme::MeasurePrepare),
        &SourceModel::default(),
        3,
    )
    .unwrap();
    let mut buf = Vec::new();
    write_csv(&data.records, &mut buf).unwrap();
    let back = read_csv(buf.as_slice()).unwrap();
    assert_eq!(back.len(), data.records.len());
    for (a, b) in back.iter().zip(&data.records) {
        assert_eq!(
            (&a.setting_label, &a.input_label, &a.counts, a.duration),
            (&b.setting_label, &b.input_label, &b.counts, b.duration)
        );
    }
    let problem =
        TomographyProblem::from_records(TomographyKind::Qpt, &back, &Design::standard()).unwrap();
    let chi = qpt_mle(&problem).unwrap().chi.unwrap();
    assert!((chi.matrix()[(0, 0)].re - 1.0 / 3.0).abs() < 0.05);
}
