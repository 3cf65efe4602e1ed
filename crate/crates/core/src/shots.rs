//! Photon-counting simulation of the heralded single-photon experiment.
//!
//! Coincidence counts are Poissonian. When an SPA scheme is in the beam,
//! every heralded photon independently picks a branch, so the counts arise
//! from per-photon Bernoulli thinning of a Poissonian herald stream.
//!
//! The source rate is the coincidence rate reaching the analysis stage. The
//! measure-and-prepare scheme discards exactly half of all photons at its
//! measurement polarizer, whatever the input state, so its herald rate is
//! twice the nominal rate.

use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::{
    apply_channel, canonical_spa_vectors, spa_measure_prepare_ensemble, unitary_scheme_kraus,
    ChannelRep, KrausSet,
};
use crate::error::{Error, Result};
use crate::optics::Polarization;
use crate::qmath::{DensityMatrix, Ket, Pauli};

/// Heralded coincidence source: rate (counts/s), integration time per
/// setting (s) and number of repetitions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SourceRecord", into = "SourceRecord")]
pub struct SourceModel {
    coincidence_rate: f64,
    duration: f64,
    repetitions: u32,
}

#[derive(Serialize, Deserialize)]
struct SourceRecord {
    coincidence_rate: f64,
    duration: f64,
    repetitions: u32,
}

impl SourceModel {
    pub fn new(coincidence_rate: f64, duration: f64, repetitions: u32) -> Result<Self> {
        if !(coincidence_rate.is_finite() && coincidence_rate > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "coincidence rate must be positive, got {coincidence_rate}"
            )));
        }
        if !(duration.is_finite() && duration > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "duration must be positive, got {duration}"
            )));
        }
        if repetitions == 0 {
            return Err(Error::InvalidParameter("at least one repetition".into()));
        }
        Ok(Self {
            coincidence_rate,
            duration,
            repetitions,
        })
    }

    pub fn coincidence_rate(&self) -> f64 {
        self.coincidence_rate
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn repetitions(&self) -> u32 {
        self.repetitions
    }

    /// Expected counts per repetition at unit detection probability.
    pub fn mean_counts(&self) -> f64 {
        self.coincidence_rate * self.duration
    }
}

impl Default for SourceModel {
    /// 4 kHz, 1 s per setting, three repetitions.
    fn default() -> Self {
        Self {
            coincidence_rate: 4000.0,
            duration: 1.0,
            repetitions: 3,
        }
    }
}

impl TryFrom<SourceRecord> for SourceModel {
    type Error = Error;

    fn try_from(r: SourceRecord) -> Result<Self> {
        SourceModel::new(r.coincidence_rate, r.duration, r.repetitions)
    }
}

impl From<SourceModel> for SourceRecord {
    fn from(s: SourceModel) -> Self {
        SourceRecord {
            coincidence_rate: s.coincidence_rate,
            duration: s.duration,
            repetitions: s.repetitions,
        }
    }
}

/// Which physical realization of the SPA transpose sits in the beam.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SpaScheme {
    /// Four measure-and-prepare branches chosen uniformly.
    #[serde(rename = "spa-mp")]
    MeasurePrepare,
    /// Random application of 𝟙, σx, σz.
    #[serde(rename = "spa-u")]
    Unitary,
}

impl SpaScheme {
    pub fn channel(self) -> ChannelRep {
        match self {
            SpaScheme::MeasurePrepare => spa_measure_prepare_ensemble().into(),
            SpaScheme::Unitary => unitary_scheme_kraus().into(),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            SpaScheme::MeasurePrepare => "spa-mp",
            SpaScheme::Unitary => "spa-u",
        }
    }

    /// Fraction of heralded photons surviving the scheme, independent of the
    /// input state.
    pub fn transmission(self) -> f64 {
        match self {
            SpaScheme::MeasurePrepare => 0.5,
            SpaScheme::Unitary => 1.0,
        }
    }
}

/// Uniform branch index in `1..=4`.
pub fn sample_branch<R: Rng + ?Sized>(rng: &mut R) -> usize {
    rng.random_range(1..=4)
}

/// Fate of a single heralded photon.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhotonFate {
    /// Blocked inside the scheme (measurement polarizer).
    Lost,
    /// Left the scheme but failed the analysis projection.
    Transmitted,
    /// Left the scheme and passed the analysis projection.
    Detected,
}

/// Per-photon simulator for one (input, analysis, scheme) configuration.
#[derive(Debug, Clone)]
pub struct PhotonSimulator {
    scheme: Option<SpaScheme>,
    /// Probability of surviving the scheme, per branch.
    pass: Vec<f64>,
    /// Probability of passing the analysis projector, per branch.
    detect: Vec<f64>,
}

impl PhotonSimulator {
    pub fn new(input: &DensityMatrix, analysis: &Ket, scheme: Option<SpaScheme>) -> Result<Self> {
        if input.dim() != 2 || analysis.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: input.dim().max(analysis.dim()),
            });
        }
        let rho = input.matrix();
        let (pass, detect) = match scheme {
            None => (vec![1.0], vec![analysis.expectation(rho).re]),
            Some(SpaScheme::MeasurePrepare) => canonical_spa_vectors()
                .iter()
                .map(|v| {
                    let measured = v.conj().expectation(rho).re;
                    (measured, analysis.overlap(v))
                })
                .unzip(),
            Some(SpaScheme::Unitary) => (
                vec![1.0; 3],
                [Pauli::I, Pauli::X, Pauli::Z]
                    .iter()
                    .map(|p| analysis.expectation(&rho.conjugate_by(&p.matrix())).re)
                    .collect(),
            ),
        };
        Ok(Self {
            scheme,
            pass: pass.into_iter().map(|p: f64| p.clamp(0.0, 1.0)).collect(),
            detect: detect.into_iter().map(|p: f64| p.clamp(0.0, 1.0)).collect(),
        })
    }

    pub fn fire<R: Rng + ?Sized>(&self, rng: &mut R) -> PhotonFate {
        let branch = match self.scheme {
            None => 0,
            Some(SpaScheme::MeasurePrepare) => sample_branch(rng) - 1,
            Some(SpaScheme::Unitary) => rng.random_range(0..3),
        };
        if !rng.random_bool(self.pass[branch]) {
            return PhotonFate::Lost;
        }
        if rng.random_bool(self.detect[branch]) {
            PhotonFate::Detected
        } else {
            PhotonFate::Transmitted
        }
    }

    /// Coincidence counts for one integration window.
    pub fn count<R: Rng + ?Sized>(&self, source: &SourceModel, rng: &mut R) -> u64 {
        match self.scheme {
            None => poisson(source.mean_counts() * self.detect[0], rng),
            Some(scheme) => {
                let heralds = poisson(source.mean_counts() / scheme.transmission(), rng);
                (0..heralds)
                    .filter(|_| self.fire(rng) == PhotonFate::Detected)
                    .count() as u64
            }
        }
    }
}

fn poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean)
        .expect("positive finite mean")
        .sample(rng) as u64
}

/// One measurement configuration: a state entering the channel and the
/// analysis projector applied to its output.
#[derive(Debug, Clone, PartialEq)]
pub struct Setting {
    pub label: String,
    pub input_label: String,
    pub input: DensityMatrix,
    pub analysis: Ket,
}

/// Counts for one setting, one entry per repetition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountRecord {
    pub setting_label: String,
    pub input_label: String,
    pub counts: Vec<u64>,
    pub duration: f64,
    /// Master seed followed by the setting index.
    pub seed_path: Vec<u64>,
}

impl CountRecord {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Simulate every repetition of one setting from a single generator.
pub fn simulate_counts<R: Rng + ?Sized>(
    setting: &Setting,
    channel: Option<SpaScheme>,
    source: &SourceModel,
    rng: &mut R,
) -> Result<CountRecord> {
    let sim = PhotonSimulator::new(&setting.input, &setting.analysis, channel)?;
    let counts = (0..source.repetitions())
        .map(|_| sim.count(source, rng))
        .collect();
    Ok(CountRecord {
        setting_label: setting.label.clone(),
        input_label: setting.input_label.clone(),
        counts,
        duration: source.duration(),
        seed_path: Vec::new(),
    })
}

/// Expected (noise-free) counts per repetition for an arbitrary channel.
pub fn expected_count(
    setting: &Setting,
    channel: Option<&ChannelRep>,
    source: &SourceModel,
) -> Result<f64> {
    let out = match channel {
        Some(rep) => apply_channel(rep, &setting.input)?,
        None => setting.input.clone(),
    };
    Ok(source.mean_counts() * setting.analysis.expectation(out.matrix()).re.max(0.0))
}

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a child seed from a master seed and a path of counters.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter().fold(mix(master), |acc, &c| mix(acc ^ mix(c)))
}

pub fn seeded_rng(master: u64, path: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, path))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TomographyKind {
    Qst,
    Qpt,
}

/// Analysis projectors for six-state tomography.
pub const ANALYSIS_SET: [Polarization; 6] = Polarization::ALL;
/// Process-tomography input states.
pub const PROCESS_INPUTS: [Polarization; 4] = [
    Polarization::H,
    Polarization::V,
    Polarization::D,
    Polarization::R,
];

/// Six analysis settings on a fixed input.
pub fn qst_settings(input: &DensityMatrix, input_label: &str) -> Vec<Setting> {
    ANALYSIS_SET
        .iter()
        .map(|a| Setting {
            label: a.label().to_string(),
            input_label: input_label.to_string(),
            input: input.clone(),
            analysis: a.ket(),
        })
        .collect()
}

/// Four inputs × six analysis settings.
pub fn qpt_settings() -> Vec<Setting> {
    PROCESS_INPUTS
        .iter()
        .flat_map(|inp| {
            ANALYSIS_SET.iter().map(move |a| Setting {
                label: a.label().to_string(),
                input_label: inp.label().to_string(),
                input: DensityMatrix::pure(&inp.ket()),
                analysis: a.ket(),
            })
        })
        .collect()
}

/// What to measure.
#[derive(Debug, Clone, PartialEq)]
pub enum DatasetRequest {
    Qst {
        input: DensityMatrix,
        input_label: String,
    },
    Qpt,
}

impl DatasetRequest {
    pub fn kind(&self) -> TomographyKind {
        match self {
            DatasetRequest::Qst { .. } => TomographyKind::Qst,
            DatasetRequest::Qpt => TomographyKind::Qpt,
        }
    }

    pub fn settings(&self) -> Vec<Setting> {
        match self {
            DatasetRequest::Qst { input, input_label } => qst_settings(input, input_label),
            DatasetRequest::Qpt => qpt_settings(),
        }
    }
}

/// Simulated counts plus the metadata needed to reproduce them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub kind: TomographyKind,
    pub source: SourceModel,
    pub channel: Option<SpaScheme>,
    pub master_seed: u64,
    pub records: Vec<CountRecord>,
}

/// Simulate a full tomography dataset.
///
/// Each (setting, repetition) pair draws from its own generator seeded by
/// counter, so the result does not depend on how records are scheduled.
pub fn generate_tomography_dataset(
    request: &DatasetRequest,
    channel: Option<SpaScheme>,
    source: &SourceModel,
    master_seed: u64,
) -> Result<Dataset> {
    let settings = request.settings();
    let records = settings
        .par_iter()
        .enumerate()
        .map(|(i, setting)| {
            let sim = PhotonSimulator::new(&setting.input, &setting.analysis, channel)?;
            let counts = (0..source.repetitions())
                .map(|rep| {
                    sim.count(
                        source,
                        &mut seeded_rng(master_seed, &[i as u64, rep as u64]),
                    )
                })
                .collect();
            Ok(CountRecord {
                setting_label: setting.label.clone(),
                input_label: setting.input_label.clone(),
                counts,
                duration: source.duration(),
                seed_path: vec![master_seed, i as u64],
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Dataset {
        kind: request.kind(),
        source: *source,
        channel,
        master_seed,
        records,
    })
}

#[derive(Debug, Serialize, Deserialize)]
struct CsvRow {
    setting_label: String,
    input_label: String,
    repetition: u32,
    duration_s: f64,
    counts: u64,
    seed: u64,
}

/// Write records as CSV, one row per repetition.
pub fn write_csv<W: Write>(records: &[CountRecord], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in records {
        let master = r.seed_path.first().copied().unwrap_or(0);
        for (rep, &counts) in r.counts.iter().enumerate() {
            let mut path = r.seed_path.get(1..).unwrap_or(&[]).to_vec();
            path.push(rep as u64);
            w.serialize(CsvRow {
                setting_label: r.setting_label.clone(),
                input_label: r.input_label.clone(),
                repetition: rep as u32,
                duration_s: r.duration,
                counts,
                seed: derive_seed(master, &path),
            })?;
        }
    }
    w.flush().map_err(|e| Error::Serialization(e.to_string()))?;
    Ok(())
}

/// Read CSV rows back into records, grouping consecutive rows by setting.
pub fn read_csv<R: Read>(reader: R) -> Result<Vec<CountRecord>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let mut records: Vec<CountRecord> = Vec::new();
    for row in rdr.deserialize() {
        let row: CsvRow = row?;
        match records.last_mut() {
            Some(last)
                if last.setting_label == row.setting_label
                    && last.input_label == row.input_label
                    && row.repetition as usize == last.counts.len() =>
            {
                last.counts.push(row.counts);
            }
            _ => records.push(CountRecord {
                setting_label: row.setting_label,
                input_label: row.input_label,
                counts: vec![row.counts],
                duration: row.duration_s,
                seed_path: Vec::new(),
            }),
        }
    }
    Ok(records)
}

/// Kraus set of a named channel used in simulations and examples.
pub fn named_channel(name: &str) -> Option<ChannelRep> {
    Some(match name {
        "identity" => KrausSet::identity(2).into(),
        "sigma-x" => KrausSet::unitary(Pauli::X.matrix()).ok()?.into(),
        "spa-mp" => SpaScheme::MeasurePrepare.channel(),
        "spa-u" => SpaScheme::Unitary.channel(),
        _ => return None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmath::random_density_matrix;

    #[test]
    fn source_validation() {
        assert!(SourceModel::new(4000.0, 0.0, 3).is_err());
        assert!(SourceModel::new(-1.0, 1.0, 3).is_err());
        assert!(SourceModel::new(4000.0, 1.0, 0).is_err());
        assert_eq!(
            SourceModel::default(),
            SourceModel::new(4000.0, 1.0, 3).unwrap()
        );
    }

    #[test]
    fn branch_sampling_is_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 100_000;
        let mut hist = [0usize; 4];
        for _ in 0..n {
            hist[sample_branch(&mut rng) - 1] += 1;
        }
        for h in hist {
            assert!((h as f64 / n as f64 - 0.25).abs() < 0.01);
        }
    }

    #[test]
    fn branch_sampling_reproducible() {
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..100)
                .map(|_| sample_branch(&mut rng))
                .collect::<Vec<_>>()
        };
        assert_eq!(draw(5), draw(5));
        assert_ne!(draw(5), draw(6));
    }

    fn setting(input: DensityMatrix, analysis: Polarization) -> Setting {
        Setting {
            label: analysis.label().into(),
            input_label: "test".into(),
            input,
            analysis: analysis.ket(),
        }
    }

    #[test]
    fn expected_counts_examples() {
        let src = SourceModel::new(4000.0, 1.0, 1).unwrap();
        let h = DensityMatrix::pure(&Polarization::H.ket());
        assert_eq!(
            expected_count(&setting(h.clone(), Polarization::H), None, &src).unwrap(),
            4000.0
        );
        assert_eq!(
            expected_count(&setting(h, Polarization::V), None, &src).unwrap(),
            0.0
        );
        let mixed = DensityMatrix::maximally_mixed(2);
        let spa = SpaScheme::MeasurePrepare.channel();
        let e = expected_count(&setting(mixed, Polarization::H), Some(&spa), &src).unwrap();
        assert!((e - 2000.0).abs() < 1e-9);
    }

    #[test]
    fn simulated_means() {
        let src = SourceModel::new(4000.0, 1.0, 200).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let h = DensityMatrix::pure(&Polarization::H.ket());
        let rec =
            simulate_counts(&setting(h.clone(), Polarization::H), None, &src, &mut rng).unwrap();
        let mean = rec.total() as f64 / 200.0;
        assert!((mean - 4000.0).abs() < 3.0 * (4000.0_f64 / 200.0).sqrt());
        let rec = simulate_counts(&setting(h, Polarization::V), None, &src, &mut rng).unwrap();
        assert_eq!(rec.total(), 0);

        let mixed = DensityMatrix::maximally_mixed(2);
        for scheme in [SpaScheme::MeasurePrepare, SpaScheme::Unitary] {
            let rec = simulate_counts(
                &setting(mixed.clone(), Polarization::H),
                Some(scheme),
                &src,
                &mut rng,
            )
            .unwrap();
            let mean = rec.total() as f64 / 200.0;
            // per-photon thinning of a doubled herald stream is still Poissonian
            assert!(
                (mean - 2000.0).abs() < 4.0 * (2000.0_f64 / 200.0).sqrt(),
                "{scheme:?} {mean}"
            );
        }
    }

    #[test]
    fn photon_frequencies_match_channel() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let spa = SpaScheme::MeasurePrepare.channel();
        for _ in 0..2 {
            let rho = random_density_matrix(2, &mut rng);
            let a = crate::qmath::haar_random_ket(2, &mut rng).unwrap();
            let sim = PhotonSimulator::new(&rho, &a, Some(SpaScheme::MeasurePrepare)).unwrap();
            let (mut passed, mut detected) = (0u64, 0u64);
            for _ in 0..200_000 {
                match sim.fire(&mut rng) {
                    PhotonFate::Lost => {}
                    PhotonFate::Transmitted => passed += 1,
                    PhotonFate::Detected => {
                        passed += 1;
                        detected += 1
                    }
                }
            }
            let p = a
                .expectation(apply_channel(&spa, &rho).unwrap().matrix())
                .re;
            let freq = detected as f64 / passed as f64;
            let se = (p * (1.0 - p) / passed as f64).sqrt();
            assert!((freq - p).abs() < 4.0 * se);
        }
    }

    #[test]
    fn dataset_sizes() {
        let src = SourceModel::default();
        let qst = generate_tomography_dataset(
            &DatasetRequest::Qst {
                input: DensityMatrix::maximally_mixed(2),
                input_label: "mixed".into(),
            },
            Some(SpaScheme::MeasurePrepare),
            &src,
            9,
        )
        .unwrap();
        assert_eq!(qst.records.len(), 6);
        assert!(qst.records.iter().all(|r| r.counts.len() == 3));
        let qpt = generate_tomography_dataset(&DatasetRequest::Qpt, None, &src, 9).unwrap();
        assert_eq!(qpt.records.len(), 24);
        assert_eq!(
            qpt.records.iter().map(|r| r.counts.len()).sum::<usize>(),
            72
        );
    }

    #[test]
    fn csv_round_trip() {
        let ds =
            generate_tomography_dataset(&DatasetRequest::Qpt, None, &SourceModel::default(), 4)
                .unwrap();
        let mut buf = Vec::new();
        write_csv(&ds.records, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("setting_label,input_label,repetition,duration_s,counts,seed\n"));
        assert_eq!(text.lines().count(), 1 + 72);
        let back = read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.len(), 24);
        for (a, b) in back.iter().zip(&ds.records) {
            assert_eq!(a.counts, b.counts);
            assert_eq!(a.setting_label, b.setting_label);
            assert_eq!(a.input_label, b.input_label);
        }
    }

    #[test]
    fn seeds_differ_by_counter() {
        assert_ne!(derive_seed(1, &[0, 0]), derive_seed(1, &[0, 1]));
        assert_ne!(derive_seed(1, &[0, 1]), derive_seed(1, &[1, 0]));
        assert_eq!(derive_seed(7, &[3, 2]), derive_seed(7, &[3, 2]));
    }
}
