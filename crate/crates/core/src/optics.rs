//! Jones calculus for the polarization-optics arms: waveplates, polarizers,
//! and angle solvers for state preparation and projective measurement.
//!
//! Conventions: basis order (|H⟩, |V⟩); angles are fast-axis angles from
//! horizontal, radians in memory and degrees in files.
//!
//! - `HWP(θ) = [[cos2θ, sin2θ], [sin2θ, −cos2θ]]`
//! - `QWP(θ) = R(θ) · diag(1, i) · R(−θ)`
//! - a polarizer at angle θ projects onto `R(θ)|H⟩`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channels::canonical_spa_vectors;
use crate::error::{Error, Result};
use crate::qmath::{ComplexMatrix, DensityMatrix, Ket, I, ONE, ZERO};

/// Solver acceptance threshold on round-trip infidelity.
pub const SOLVER_INFIDELITY_TOL: f64 = 1e-10;
/// Transmission at or below which a train is considered fully blocking.
pub const BLOCKED_PROBABILITY: f64 = 1e-15;

const GRID_STEPS: usize = 180;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WaveplateKind {
    Half,
    Quarter,
}

/// A waveplate with its fast-axis angle canonicalized to `[0, π)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveplateSetting {
    kind: WaveplateKind,
    angle: f64,
}

fn canonical_angle(angle: f64) -> f64 {
    let a = angle.rem_euclid(PI);
    // rem_euclid can round up to exactly π
    if a >= PI {
        0.0
    } else {
        a
    }
}

impl WaveplateSetting {
    pub fn new(kind: WaveplateKind, angle: f64) -> Self {
        Self {
            kind,
            angle: canonical_angle(angle),
        }
    }

    pub fn half(angle: f64) -> Self {
        Self::new(WaveplateKind::Half, angle)
    }

    pub fn quarter(angle: f64) -> Self {
        Self::new(WaveplateKind::Quarter, angle)
    }

    pub fn kind(&self) -> WaveplateKind {
        self.kind
    }

    pub fn angle(&self) -> f64 {
        self.angle
    }
}

fn rotation(theta: f64) -> ComplexMatrix {
    let (s, c) = theta.sin_cos();
    ComplexMatrix::from_rows(&[
        [Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
        [Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
    ])
    .expect("2x2")
}

/// Jones matrix of a waveplate.
pub fn jones_matrix(w: &WaveplateSetting) -> ComplexMatrix {
    match w.kind {
        WaveplateKind::Half => {
            let (s, c) = (2.0 * w.angle).sin_cos();
            ComplexMatrix::from_rows(&[
                [Complex64::new(c, 0.0), Complex64::new(s, 0.0)],
                [Complex64::new(s, 0.0), Complex64::new(-c, 0.0)],
            ])
            .expect("2x2")
        }
        WaveplateKind::Quarter => {
            let retarder = ComplexMatrix::from_rows(&[[ONE, ZERO], [ZERO, I]]).expect("2x2");
            &(&rotation(w.angle) * &retarder) * &rotation(-w.angle)
        }
    }
}

/// Projector of a linear polarizer transmitting along `angle`.
pub fn polarizer_matrix(angle: f64) -> ComplexMatrix {
    let (s, c) = angle.sin_cos();
    let axis =
        Ket::normalize(vec![Complex64::new(c, 0.0), Complex64::new(s, 0.0)]).expect("unit vector");
    axis.projector()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OpticalElement {
    Waveplate(WaveplateSetting),
    Polarizer { angle: f64 },
}

impl OpticalElement {
    pub fn polarizer(angle: f64) -> Self {
        OpticalElement::Polarizer {
            angle: canonical_angle(angle),
        }
    }

    pub fn matrix(&self) -> ComplexMatrix {
        match self {
            OpticalElement::Waveplate(w) => jones_matrix(w),
            OpticalElement::Polarizer { angle } => polarizer_matrix(*angle),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum ElementRecord {
    Hwp { angle_deg: f64 },
    Qwp { angle_deg: f64 },
    Polarizer { angle_deg: f64 },
}

impl From<&OpticalElement> for ElementRecord {
    fn from(e: &OpticalElement) -> Self {
        match e {
            OpticalElement::Waveplate(w) => match w.kind {
                WaveplateKind::Half => ElementRecord::Hwp {
                    angle_deg: w.angle.to_degrees(),
                },
                WaveplateKind::Quarter => ElementRecord::Qwp {
                    angle_deg: w.angle.to_degrees(),
                },
            },
            OpticalElement::Polarizer { angle } => ElementRecord::Polarizer {
                angle_deg: angle.to_degrees(),
            },
        }
    }
}

impl From<ElementRecord> for OpticalElement {
    fn from(r: ElementRecord) -> Self {
        match r {
            ElementRecord::Hwp { angle_deg } => {
                OpticalElement::Waveplate(WaveplateSetting::half(angle_deg.to_radians()))
            }
            ElementRecord::Qwp { angle_deg } => {
                OpticalElement::Waveplate(WaveplateSetting::quarter(angle_deg.to_radians()))
            }
            ElementRecord::Polarizer { angle_deg } => {
                OpticalElement::polarizer(angle_deg.to_radians())
            }
        }
    }
}

/// Elements in the order light traverses them.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "Vec<ElementRecord>", into = "Vec<ElementRecord>")]
pub struct OpticalTrain {
    elements: Vec<OpticalElement>,
}

impl From<Vec<ElementRecord>> for OpticalTrain {
    fn from(v: Vec<ElementRecord>) -> Self {
        Self {
            elements: v.into_iter().map(OpticalElement::from).collect(),
        }
    }
}

impl From<OpticalTrain> for Vec<ElementRecord> {
    fn from(t: OpticalTrain) -> Self {
        t.elements.iter().map(ElementRecord::from).collect()
    }
}

impl OpticalTrain {
    pub fn new(elements: Vec<OpticalElement>) -> Self {
        Self { elements }
    }

    pub fn elements(&self) -> &[OpticalElement] {
        &self.elements
    }

    /// Append another train after this one.
    pub fn then(mut self, other: &OpticalTrain) -> Self {
        self.elements.extend_from_slice(&other.elements);
        self
    }

    /// Product of element matrices, last element leftmost.
    pub fn operator(&self) -> ComplexMatrix {
        self.elements
            .iter()
            .fold(ComplexMatrix::identity(2), |acc, e| &e.matrix() * &acc)
    }
}

/// Result of propagating a state through a train.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutput {
    pub probability: f64,
    /// `None` when the train blocks the input entirely.
    pub output: Option<DensityMatrix>,
}

/// Propagate a polarization state through a train of elements.
pub fn simulate_train(train: &OpticalTrain, input: &DensityMatrix) -> Result<TrainOutput> {
    if input.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: input.dim(),
        });
    }
    let mut rho = input.matrix().clone();
    for e in &train.elements {
        rho = rho.conjugate_by(&e.matrix());
    }
    let probability = rho.trace().re.max(0.0);
    if probability <= BLOCKED_PROBABILITY {
        return Ok(TrainOutput {
            probability: 0.0,
            output: None,
        });
    }
    let output = DensityMatrix::with_tolerance(rho.scale(1.0 / probability), 1e-9)?;
    Ok(TrainOutput {
        probability,
        output: Some(output),
    })
}

/// HWP then QWP, acting on |H⟩.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PreparationAngles {
    pub hwp: WaveplateSetting,
    pub qwp: WaveplateSetting,
}

impl PreparationAngles {
    pub fn train(&self) -> OpticalTrain {
        OpticalTrain::new(vec![
            OpticalElement::Waveplate(self.hwp),
            OpticalElement::Waveplate(self.qwp),
        ])
    }
}

/// QWP then HWP, followed by a horizontal polarizer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementAngles {
    pub qwp: WaveplateSetting,
    pub hwp: WaveplateSetting,
}

impl MeasurementAngles {
    pub fn train(&self) -> OpticalTrain {
        OpticalTrain::new(vec![
            OpticalElement::Waveplate(self.qwp),
            OpticalElement::Waveplate(self.hwp),
            OpticalElement::polarizer(0.0),
        ])
    }
}

/// Minimize `leakage(a, b)` over `[0, π)²`: 1° grid, then compass search.
///
/// `leakage` is the squared amplitude left in the orthogonal complement of
/// the target, i.e. the infidelity computed without cancellation.
fn solve_two_plates(leakage: impl Fn(f64, f64) -> f64) -> Result<(f64, f64)> {
    let step = PI / GRID_STEPS as f64;
    let mut best = (0.0, 0.0);
    let mut best_l = f64::INFINITY;
    for i in 0..GRID_STEPS {
        for j in 0..GRID_STEPS {
            let (a, b) = (i as f64 * step, j as f64 * step);
            let l = leakage(a, b);
            if l < best_l {
                best_l = l;
                best = (a, b);
            }
        }
    }

    let mut h = step / 2.0;
    while h > 1e-16 && best_l > 1e-32 {
        let mut improved = false;
        for (da, db) in [(h, 0.0), (-h, 0.0), (0.0, h), (0.0, -h)] {
            let cand = (best.0 + da, best.1 + db);
            let l = leakage(cand.0, cand.1);
            if l < best_l {
                best_l = l;
                best = cand;
                improved = true;
            }
        }
        if !improved {
            h /= 2.0;
        }
    }
    if best_l > SOLVER_INFIDELITY_TOL {
        return Err(Error::SolverFailed { infidelity: best_l });
    }
    Ok(best)
}

/// Orthogonal complement of a qubit ket.
fn orthogonal(k: &Ket) -> [Complex64; 2] {
    let a = k.amplitudes();
    [-a[1].conj(), a[0].conj()]
}

fn horizontal() -> Ket {
    Ket::basis(2, 0)
}

fn check_qubit(k: &Ket) -> Result<()> {
    if k.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: k.dim(),
        });
    }
    Ok(())
}

/// Waveplate angles with `QWP(q)·HWP(h)|H⟩ ∝ target`.
pub fn solve_preparation_angles(target: &Ket) -> Result<PreparationAngles> {
    check_qubit(target)?;
    let h_in = horizontal();
    let perp = orthogonal(target);
    let (h, q) = solve_two_plates(|h, q| {
        let u = &jones_matrix(&WaveplateSetting::quarter(q))
            * &jones_matrix(&WaveplateSetting::half(h));
        let out = u.apply(h_in.amplitudes());
        (perp[0].conj() * out[0] + perp[1].conj() * out[1]).norm_sqr()
    })?;
    Ok(PreparationAngles {
        hwp: WaveplateSetting::half(h),
        qwp: WaveplateSetting::quarter(q),
    })
}

/// Waveplate angles such that QWP(q) → HWP(h) → horizontal polarizer
/// transmits with probability `⟨a|ρ|a⟩`, `a = projector_ket`.
pub fn solve_measurement_angles(projector_ket: &Ket) -> Result<MeasurementAngles> {
    check_qubit(projector_ket)?;
    let (q, h) = solve_two_plates(|q, h| {
        let u = &jones_matrix(&WaveplateSetting::half(h))
            * &jones_matrix(&WaveplateSetting::quarter(q));
        // U|a⟩ must be ∝ |H⟩, so the |V⟩ amplitude is the leakage.
        let out = u.apply(projector_ket.amplitudes());
        out[1].norm_sqr()
    })?;
    Ok(MeasurementAngles {
        qwp: WaveplateSetting::quarter(q),
        hwp: WaveplateSetting::half(h),
    })
}

/// Full optical branch `k ∈ 1..=4`: project onto `|v_k*⟩`, re-prepare `|v_k⟩`.
pub fn spa_branch_train(k: usize) -> Result<OpticalTrain> {
    if !(1..=4).contains(&k) {
        return Err(Error::InvalidParameter(format!("branch {k} outside 1..=4")));
    }
    let v = &canonical_spa_vectors()[k - 1];
    let measure = solve_measurement_angles(&v.conj())?;
    let prepare = solve_preparation_angles(v)?;
    Ok(measure.train().then(&prepare.train()))
}

/// Named polarization states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Polarization {
    H,
    V,
    D,
    A,
    R,
    L,
}

impl Polarization {
    pub const ALL: [Polarization; 6] = [
        Polarization::H,
        Polarization::V,
        Polarization::D,
        Polarization::A,
        Polarization::R,
        Polarization::L,
    ];

    pub fn ket(self) -> Ket {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let (a, b) = match self {
            Polarization::H => (ONE, ZERO),
            Polarization::V => (ZERO, ONE),
            Polarization::D => (ONE * s, ONE * s),
            Polarization::A => (ONE * s, -ONE * s),
            Polarization::R => (ONE * s, I * s),
            Polarization::L => (ONE * s, -I * s),
        };
        Ket::normalize(vec![a, b]).expect("unit vector")
    }

    pub fn label(self) -> &'static str {
        match self {
            Polarization::H => "H",
            Polarization::V => "V",
            Polarization::D => "D",
            Polarization::A => "A",
            Polarization::R => "R",
            Polarization::L => "L",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.label() == s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{apply_channel, spa_measure_prepare_ensemble};
    use crate::qmath::{haar_random_ket, random_density_matrix};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn out_ket(u: &ComplexMatrix, k: &Ket) -> Ket {
        k.evolve(u).unwrap()
    }

    #[test]
    fn hwp_examples() {
        let h = Polarization::H.ket();
        let out = out_ket(&jones_matrix(&WaveplateSetting::half(0.0)), &h);
        assert!(out.overlap(&h) > 1.0 - 1e-15);
        let out = out_ket(&jones_matrix(&WaveplateSetting::half(PI / 8.0)), &h);
        assert!(out.overlap(&Polarization::D.ket()) > 1.0 - 1e-15);
    }

    #[test]
    fn qwp_makes_circular() {
        let out = out_ket(
            &jones_matrix(&WaveplateSetting::quarter(PI / 4.0)),
            &Polarization::H.ket(),
        );
        assert!((out.amplitudes()[0].norm_sqr() - 0.5).abs() < 1e-15);
        let circ = out
            .overlap(&Polarization::R.ket())
            .max(out.overlap(&Polarization::L.ket()));
        assert!(circ > 1.0 - 1e-14);
    }

    #[test]
    fn waveplates_are_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        use rand::Rng;
        for _ in 0..100 {
            let theta: f64 = rng.random_range(-10.0..10.0);
            for w in [
                WaveplateSetting::half(theta),
                WaveplateSetting::quarter(theta),
            ] {
                let j = jones_matrix(&w);
                assert!((&j.adjoint() * &j).max_abs_diff(&ComplexMatrix::identity(2)) < 1e-12);
                let det = j[(0, 0)] * j[(1, 1)] - j[(0, 1)] * j[(1, 0)];
                assert!((det.norm() - 1.0).abs() < 1e-12);
                assert!((0.0..PI).contains(&w.angle()));
            }
        }
        for _ in 0..50 {
            let j = jones_matrix(&WaveplateSetting::half(rng.random_range(0.0..PI)));
            assert!((&j * &j).max_abs_diff(&ComplexMatrix::identity(2)) < 1e-12);
        }
    }

    #[test]
    fn preparation_reaches_targets() {
        let mut targets = vec![Polarization::H.ket(), Polarization::V.ket()];
        targets.extend(canonical_spa_vectors());
        for t in targets {
            let angles = solve_preparation_angles(&t).unwrap();
            let out = out_ket(&angles.train().operator(), &Polarization::H.ket());
            assert!(1.0 - out.overlap(&t) < 1e-9);
        }
    }

    #[test]
    fn solver_is_deterministic() {
        let v = &canonical_spa_vectors()[2];
        assert_eq!(
            solve_preparation_angles(v).unwrap(),
            solve_preparation_angles(v).unwrap()
        );
    }

    #[test]
    fn measurement_transmission() {
        let h = solve_measurement_angles(&Polarization::H.ket())
            .unwrap()
            .train();
        let p_h = simulate_train(&h, &DensityMatrix::pure(&Polarization::H.ket())).unwrap();
        let p_v = simulate_train(&h, &DensityMatrix::pure(&Polarization::V.ket())).unwrap();
        assert!((p_h.probability - 1.0).abs() < 1e-9);
        assert!(p_v.probability < 1e-9);

        let d = solve_measurement_angles(&Polarization::D.ket())
            .unwrap()
            .train();
        let out = simulate_train(&d, &DensityMatrix::maximally_mixed(2)).unwrap();
        assert!((out.probability - 0.5).abs() < 1e-9);
        let post = out.output.unwrap();
        assert!(
            post.matrix()
                .max_abs_diff(&Polarization::H.ket().projector())
                < 1e-12
        );
    }

    #[test]
    fn measurement_matches_projector_on_random_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = haar_random_ket(2, &mut rng).unwrap();
        let train = solve_measurement_angles(&a).unwrap().train();
        for _ in 0..20 {
            let rho = random_density_matrix(2, &mut rng);
            let out = simulate_train(&train, &rho).unwrap();
            assert!((out.probability - a.expectation(rho.matrix()).re).abs() < 1e-9);
        }
    }

    #[test]
    fn empty_and_blocking_trains() {
        let rho = DensityMatrix::pure(&Polarization::D.ket());
        let out = simulate_train(&OpticalTrain::default(), &rho).unwrap();
        assert!((out.probability - 1.0).abs() < 1e-15);
        assert!(out.output.unwrap().matrix().max_abs_diff(rho.matrix()) < 1e-15);

        let pol = OpticalTrain::new(vec![OpticalElement::polarizer(0.0)]);
        let blocked = simulate_train(&pol, &DensityMatrix::pure(&Polarization::V.ket())).unwrap();
        assert_eq!(blocked.probability, 0.0);
        assert!(blocked.output.is_none());
    }

    #[test]
    fn branch_trains_reproduce_channel() {
        // Uniform branch choice (1/4) times transmission ⟨v_k*|ρ|v_k*⟩ sums to
        // half of the channel output: the measurement stage passes exactly
        // half of all photons on average.
        let trains: Vec<_> = (1..=4).map(|k| spa_branch_train(k).unwrap()).collect();
        let ensemble = spa_measure_prepare_ensemble();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let rho = random_density_matrix(2, &mut rng);
            let mut sum = ComplexMatrix::zeros(2);
            for (k, train) in trains.iter().enumerate() {
                let out = simulate_train(train, &rho).unwrap();
                let branch = &ensemble.branches()[k];
                let expected = branch
                    .prepared
                    .matrix()
                    .scale(2.0 * branch.effect.trace_product(rho.matrix()).re);
                let got = out.output.unwrap().into_matrix().scale(out.probability);
                assert!(got.max_abs_diff(&expected) < 1e-9);
                sum = &sum + &got.scale(0.25);
            }
            let channel = apply_channel(&ensemble.clone().into(), &rho).unwrap();
            assert!(sum.scale(2.0).max_abs_diff(channel.matrix()) < 1e-9);
        }
    }

    #[test]
    fn train_json_uses_degrees() {
        let train = OpticalTrain::new(vec![
            OpticalElement::Waveplate(WaveplateSetting::half(PI / 8.0)),
            OpticalElement::Waveplate(WaveplateSetting::quarter(PI / 4.0)),
            OpticalElement::polarizer(0.0),
        ]);
        let s = serde_json::to_string(&train).unwrap();
        assert_eq!(
            s,
            r#"[{"kind":"hwp","angle_deg":22.5},{"kind":"qwp","angle_deg":45.0},{"kind":"polarizer","angle_deg":0.0}]"#
        );
        let back: OpticalTrain = serde_json::from_str(&s).unwrap();
        assert!(back.operator().max_abs_diff(&train.operator()) < 1e-15);
    }

    #[test]
    fn polarization_labels() {
        for p in Polarization::ALL {
            assert_eq!(Polarization::from_label(p.label()), Some(p));
        }
        assert_eq!(Polarization::from_label("X"), None);
    }
}
