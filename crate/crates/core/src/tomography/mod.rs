//! Maximum-likelihood state and process tomography from coincidence counts.
//!
//! Every setting contributes a Poisson term `n log μ − μ` with
//! `μ = exposure · tr[O X]`, where `X` is the unnormalized state (QST) or
//! Choi matrix (QPT) and `O` the corresponding measurement operator. The
//! overall count scale is carried by `tr X` and fitted with everything else.
//!
//! `X` is parametrized as `L L†` with `L` lower triangular, so every iterate
//! is positive. For QPT the factor is additionally pushed through the
//! congruence `S ↦ (Y⊗𝟙) S (Y⊗𝟙)`, `Y = (d·tr₂S / trS)^{-1/2}`, which makes
//! every iterate exactly trace preserving.

mod optimize;

use std::collections::HashMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use optimize::{maximize, numeric_gradient, AscentOptions, AscentResult};

use crate::channels::{chi_of, ChannelRep, ChiMatrix, ChoiMatrix};
use crate::error::{Error, Result};
use crate::optics::Polarization;
use crate::qmath::{
    hermitian_eigensystem, partial_trace_second, pauli_basis, tensor_product, ComplexMatrix,
    DensityMatrix, Ket,
};
use crate::shots::{
    expected_count, CountRecord, DatasetRequest, SourceModel, TomographyKind, PROCESS_INPUTS,
};

/// Relative Gram-spectrum threshold for informational completeness.
const COMPLETENESS_TOL: f64 = 1e-10;
/// Weight of 𝟙/D mixed into the linear-inversion starting point.
const INITIAL_MIXING: f64 = 0.01;

/// One aggregated setting: measurement operator, total counts, total
/// exposure time.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub operator: ComplexMatrix,
    pub counts: f64,
    pub exposure: f64,
}

/// Label → projector / input-state lookup.
#[derive(Debug, Clone, Default)]
pub struct Design {
    analysis: HashMap<String, Ket>,
    inputs: HashMap<String, DensityMatrix>,
}

impl Design {
    /// Six polarization projectors and the {H, V, D, R} process inputs.
    pub fn standard() -> Self {
        let analysis = Polarization::ALL
            .iter()
            .map(|p| (p.label().to_string(), p.ket()))
            .collect();
        let inputs = PROCESS_INPUTS
            .iter()
            .map(|p| (p.label().to_string(), DensityMatrix::pure(&p.ket())))
            .collect();
        Self { analysis, inputs }
    }

    pub fn with_analysis(mut self, label: &str, ket: Ket) -> Self {
        self.analysis.insert(label.to_string(), ket);
        self
    }

    pub fn with_input(mut self, label: &str, state: DensityMatrix) -> Self {
        self.inputs.insert(label.to_string(), state);
        self
    }
}

/// Measurement operator of a process-tomography setting:
/// `tr[Π E(ρ)] = tr[(d ρᵀ ⊗ Π) C]`.
fn process_operator(input: &DensityMatrix, projector: &ComplexMatrix) -> Result<ComplexMatrix> {
    let d = input.dim() as f64;
    tensor_product(&input.matrix().transpose().scale(d), projector)
}

#[derive(Debug, Clone)]
pub struct TomographyProblem {
    kind: TomographyKind,
    observations: Vec<Observation>,
}

impl TomographyProblem {
    pub fn new(kind: TomographyKind, observations: Vec<Observation>) -> Result<Self> {
        let dim = match kind {
            TomographyKind::Qst => 2,
            TomographyKind::Qpt => 4,
        };
        if let Some(bad) = observations.iter().find(|o| o.operator.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: bad.operator.dim(),
            });
        }
        if let Some(bad) = observations
            .iter()
            .find(|o| !(o.exposure > 0.0) || !(o.counts >= 0.0))
        {
            return Err(Error::InvalidParameter(format!(
                "observation with counts {} and exposure {}",
                bad.counts, bad.exposure
            )));
        }
        if observations.iter().map(|o| o.counts).sum::<f64>() <= 0.0 {
            return Err(Error::ZeroCounts);
        }
        let problem = Self { kind, observations };
        if !problem.is_informationally_complete()? {
            return Err(Error::NotInformationallyComplete);
        }
        Ok(problem)
    }

    /// Aggregate count records; repetitions of a setting are summed, which
    /// leaves the Poisson likelihood unchanged up to a constant.
    pub fn from_records(
        kind: TomographyKind,
        records: &[CountRecord],
        design: &Design,
    ) -> Result<Self> {
        let observations = records
            .iter()
            .map(|r| {
                let analysis = design
                    .analysis
                    .get(&r.setting_label)
                    .ok_or_else(|| Error::UnknownSetting(r.setting_label.clone()))?;
                let projector = analysis.projector();
                let operator = match kind {
                    TomographyKind::Qst => projector,
                    TomographyKind::Qpt => {
                        let input = design
                            .inputs
                            .get(&r.input_label)
                            .ok_or_else(|| Error::UnknownSetting(r.input_label.clone()))?;
                        process_operator(input, &projector)?
                    }
                };
                Ok(Observation {
                    operator,
                    counts: r.total() as f64,
                    exposure: r.duration * r.counts.len() as f64,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(kind, observations)
    }

    /// Noise-free problem whose counts equal their expected values.
    pub fn noiseless(
        request: &DatasetRequest,
        channel: Option<&ChannelRep>,
        source: &SourceModel,
    ) -> Result<Self> {
        let reps = source.repetitions() as f64;
        let observations = request
            .settings()
            .iter()
            .map(|s| {
                let projector = s.analysis.projector();
                let operator = match request.kind() {
                    TomographyKind::Qst => projector,
                    TomographyKind::Qpt => process_operator(&s.input, &projector)?,
                };
                Ok(Observation {
                    operator,
                    counts: expected_count(s, channel, source)? * reps,
                    exposure: source.duration() * reps,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(request.kind(), observations)
    }

    pub fn kind(&self) -> TomographyKind {
        self.kind
    }

    pub fn observations(&self) -> &[Observation] {
        &self.observations
    }

    fn dim(&self) -> usize {
        self.observations[0].operator.dim()
    }

    /// Poisson log-likelihood of an unnormalized estimate, shifted by the
    /// data-only constant `Σ (n log n − n)` so a perfect fit scores zero.
    pub fn log_likelihood(&self, x: &ComplexMatrix) -> f64 {
        self.observations
            .iter()
            .map(|o| {
                let mu = o.exposure * o.operator.trace_product(x).re;
                if o.counts > 0.0 {
                    if mu <= 0.0 {
                        return f64::NEG_INFINITY;
                    }
                    o.counts * (mu / o.counts).ln() - mu + o.counts
                } else {
                    -mu
                }
            })
            .sum()
    }

    /// Real design matrix in the (scaled) Pauli-product basis.
    fn design_matrix(&self) -> (Vec<ComplexMatrix>, Vec<Vec<f64>>) {
        let basis = operator_basis(self.dim());
        let d = self.dim() as f64;
        let rows = self
            .observations
            .iter()
            .map(|o| {
                basis
                    .iter()
                    .map(|b| o.exposure * o.operator.trace_product(b).re / d)
                    .collect()
            })
            .collect();
        (basis, rows)
    }

    fn normal_matrix(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let n = rows[0].len();
        let mut ata = vec![vec![0.0; n]; n];
        for r in rows {
            for i in 0..n {
                for j in 0..n {
                    ata[i][j] += r[i] * r[j];
                }
            }
        }
        ata
    }

    /// Whether the measurement operators span the Hermitian operator space.
    pub fn is_informationally_complete(&self) -> Result<bool> {
        let (_, rows) = self.design_matrix();
        let ata = Self::normal_matrix(&rows);
        let n = ata.len();
        let entries = ata
            .iter()
            .flatten()
            .map(|&v| Complex64::new(v, 0.0))
            .collect();
        let vals = hermitian_eigensystem(&ComplexMatrix::new(n, entries)?)?.values;
        let max = vals.last().copied().unwrap_or(0.0);
        Ok(max > 0.0 && vals[0] > COMPLETENESS_TOL * max)
    }

    /// Unconstrained least-squares estimate of the unnormalized state.
    pub fn linear_inversion(&self) -> Result<ComplexMatrix> {
        let (basis, rows) = self.design_matrix();
        let n = basis.len();
        let ata = Self::normal_matrix(&rows);
        let mut atb = vec![0.0; n];
        for (r, o) in rows.iter().zip(&self.observations) {
            for i in 0..n {
                atb[i] += r[i] * o.counts;
            }
        }
        let coeffs = solve_linear(ata, atb).ok_or(Error::NotInformationallyComplete)?;
        let d = self.dim() as f64;
        let mut x = ComplexMatrix::zeros(self.dim());
        for (c, b) in coeffs.iter().zip(&basis) {
            x = &x + &b.scale(c / d);
        }
        Ok(x.hermitian_part())
    }
}

/// `{σ_a}` for qubits, `{σ_a ⊗ σ_b}` for two qubits.
fn operator_basis(dim: usize) -> Vec<ComplexMatrix> {
    let paulis = pauli_basis();
    match dim {
        2 => paulis.to_vec(),
        4 => paulis
            .iter()
            .flat_map(|a| {
                paulis
                    .iter()
                    .map(move |b| tensor_product(a, b).expect("4x4"))
            })
            .collect(),
        _ => unreachable!("tomography dimensions are 2 and 4"),
    }
}

/// Gaussian elimination with partial pivoting.
fn solve_linear(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in (col + 1)..n {
            let factor = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = ((row + 1)..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

/// Lower Cholesky factor of a Hermitian positive definite matrix.
fn cholesky(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let d = m.dim();
    let mut l = ComplexMatrix::zeros(d);
    for j in 0..d {
        let mut diag = m[(j, j)].re;
        for k in 0..j {
            diag -= l[(j, k)].norm_sqr();
        }
        if !(diag > 0.0) {
            return Err(Error::NotPositive {
                min_eigenvalue: diag,
            });
        }
        let ljj = diag.sqrt();
        l[(j, j)] = Complex64::new(ljj, 0.0);
        for i in (j + 1)..d {
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / ljj;
        }
    }
    Ok(l)
}

/// Real parameter count of a `d×d` lower-triangular factor.
fn param_len(d: usize) -> usize {
    d * d
}

fn pack(l: &ComplexMatrix) -> Vec<f64> {
    let d = l.dim();
    let mut x = Vec::with_capacity(param_len(d));
    for r in 0..d {
        for c in 0..=r {
            x.push(l[(r, c)].re);
            if r != c {
                x.push(l[(r, c)].im);
            }
        }
    }
    x
}

fn unpack(x: &[f64], d: usize) -> ComplexMatrix {
    let mut l = ComplexMatrix::zeros(d);
    let mut it = x.iter();
    for r in 0..d {
        for c in 0..=r {
            let re = *it.next().expect("parameter length");
            let im = if r != c {
                *it.next().expect("parameter length")
            } else {
                0.0
            };
            l[(r, c)] = Complex64::new(re, im);
        }
    }
    l
}

fn gram(l: &ComplexMatrix) -> ComplexMatrix {
    l * &l.adjoint()
}

/// `(Y⊗𝟙) S (Y⊗𝟙)` with `Y = (d·tr₂S / trS)^{-1/2}`; keeps `tr S`, makes
/// `tr₂` proportional to the identity.
fn trace_preserving_congruence(s: &ComplexMatrix) -> Option<ComplexMatrix> {
    let d = 2;
    let t = s.trace().re;
    let reduced = partial_trace_second(s, d).ok()?.scale(d as f64 / t);
    let eig = hermitian_eigensystem(&reduced).ok()?;
    if !(eig.min() > 0.0) {
        return None;
    }
    let y = eig.map_spectrum(|v| 1.0 / v.sqrt());
    let y_full = tensor_product(&y, &ComplexMatrix::identity(d)).ok()?;
    Some(&(&y_full * s) * &y_full)
}

/// Outcome of a maximum-likelihood fit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MleResult {
    /// Reconstructed state (QST) or normalized Choi matrix (QPT).
    pub estimate: DensityMatrix,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chi: Option<ChiMatrix>,
    /// Poisson log-likelihood relative to a perfect fit (≤ 0).
    pub log_likelihood: f64,
    pub iterations: usize,
    pub converged: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub log_likelihood_trace: Option<Vec<f64>>,
}

impl MleResult {
    /// The reconstructed process as a Choi matrix (QPT only).
    pub fn choi(&self) -> Option<Result<ChoiMatrix>> {
        self.chi
            .as_ref()
            .map(|_| ChoiMatrix::new(self.estimate.matrix().clone()))
    }

    pub fn without_trace(mut self) -> Self {
        self.log_likelihood_trace = None;
        self
    }
}

/// Positive full-rank starting factor from the linear-inversion estimate.
fn initial_factor(problem: &TomographyProblem) -> Result<ComplexMatrix> {
    let lin = problem.linear_inversion()?;
    let d = lin.dim();
    let eig = hermitian_eigensystem(&lin)?;
    let clipped = eig.map_spectrum(|v| v.max(0.0));
    let mut tr = clipped.trace().re;
    let base = if tr > 0.0 {
        clipped.scale(1.0 / tr)
    } else {
        tr = 1.0;
        ComplexMatrix::identity(d).scale(1.0 / d as f64)
    };
    let mixed = &base.scale(1.0 - INITIAL_MIXING)
        + &ComplexMatrix::identity(d).scale(INITIAL_MIXING / d as f64);
    let mut start = match problem.kind {
        TomographyKind::Qst => mixed,
        TomographyKind::Qpt => trace_preserving_congruence(&mixed).ok_or(Error::NotPositive {
            min_eigenvalue: 0.0,
        })?,
    };
    // Rescale so the predicted and observed totals agree.
    let predicted: f64 = problem
        .observations
        .iter()
        .map(|o| o.exposure * o.operator.trace_product(&start).re)
        .sum();
    let observed: f64 = problem.observations.iter().map(|o| o.counts).sum();
    if predicted > 0.0 {
        start = start.scale(observed / predicted);
    } else {
        start = start.scale(tr);
    }
    cholesky(&start)
}

/// Maximum-likelihood qubit state.
pub fn qst_mle(problem: &TomographyProblem) -> Result<MleResult> {
    qst_mle_with(problem, AscentOptions::default())
}

pub fn qst_mle_with(problem: &TomographyProblem, opts: AscentOptions) -> Result<MleResult> {
    if problem.kind != TomographyKind::Qst {
        return Err(Error::InvalidParameter(
            "expected a state-tomography problem".into(),
        ));
    }
    let d = problem.dim();
    let f = |x: &[f64]| problem.log_likelihood(&gram(&unpack(x, d)));
    // df = 2 Re tr(L† G dL) with G = Σ (n/μ − 1) e Π
    let grad = |x: &[f64]| {
        let l = unpack(x, d);
        let sigma = gram(&l);
        let mut g = ComplexMatrix::zeros(d);
        for o in &problem.observations {
            let mu = o.exposure * o.operator.trace_product(&sigma).re;
            let w = if mu > 0.0 { o.counts / mu - 1.0 } else { -1.0 };
            g = &g + &o.operator.scale(w * o.exposure);
        }
        let lg = &l.adjoint() * &g;
        let mut out = Vec::with_capacity(param_len(d));
        for r in 0..d {
            for c in 0..=r {
                let z = lg[(c, r)];
                out.push(2.0 * z.re);
                if r != c {
                    out.push(-2.0 * z.im);
                }
            }
        }
        out
    };
    let start = pack(&initial_factor(problem)?);
    let res = maximize(f, grad, start, opts);
    let sigma = gram(&unpack(&res.x, d));
    let estimate = DensityMatrix::from_unnormalized(sigma)?;
    Ok(MleResult {
        estimate,
        chi: None,
        log_likelihood: res.value,
        iterations: res.iterations,
        converged: res.converged,
        log_likelihood_trace: Some(res.trace),
    })
}

/// Maximum-likelihood qubit process; returns the Choi state and χ-matrix.
pub fn qpt_mle(problem: &TomographyProblem) -> Result<MleResult> {
    qpt_mle_with(problem, AscentOptions::default())
}

pub fn qpt_mle_with(problem: &TomographyProblem, opts: AscentOptions) -> Result<MleResult> {
    if problem.kind != TomographyKind::Qpt {
        return Err(Error::InvalidParameter(
            "expected a process-tomography problem".into(),
        ));
    }
    let d = problem.dim();
    let physical = |x: &[f64]| trace_preserving_congruence(&gram(&unpack(x, d)));
    let f = |x: &[f64]| match physical(x) {
        Some(c) => problem.log_likelihood(&c),
        None => f64::NEG_INFINITY,
    };
    let start = pack(&initial_factor(problem)?);
    let res = maximize(f, |x| numeric_gradient(&f, x), start, opts);
    let choi_unnormalized = physical(&res.x).ok_or(Error::NotPositive {
        min_eigenvalue: 0.0,
    })?;
    let estimate = DensityMatrix::from_unnormalized(choi_unnormalized)?;
    let choi = ChoiMatrix::new(estimate.matrix().clone())?;
    let chi = chi_of(&choi.into())?;
    Ok(MleResult {
        estimate,
        chi: Some(chi),
        log_likelihood: res.value,
        iterations: res.iterations,
        converged: res.converged,
        log_likelihood_trace: Some(res.trace),
    })
}

/// `(𝟙 + xσx + yσy + zσz)/2`, projected onto the Bloch sphere when the
/// vector is longer than one.
pub fn linear_inversion_qst(expectations: [f64; 3]) -> DensityMatrix {
    let norm = expectations.iter().map(|v| v * v).sum::<f64>().sqrt();
    let scale = if norm > 1.0 { 1.0 / norm } else { 1.0 };
    let [x, y, z] = expectations.map(|v| v * scale);
    let p = pauli_basis();
    let m = &(&(&p[0] + &p[1].scale(x)) + &p[2].scale(y)) + &p[3].scale(z);
    DensityMatrix::with_tolerance(m.scale(0.5), 1e-9).expect("Bloch ball state")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmath::Ket;

    #[test]
    fn linear_inversion_examples() {
        let up = linear_inversion_qst([0.0, 0.0, 1.0]);
        assert!(up.matrix().max_abs_diff(&Ket::basis(2, 0).projector()) < 1e-15);
        let mixed = linear_inversion_qst([0.0, 0.0, 0.0]);
        assert!(
            mixed
                .matrix()
                .max_abs_diff(DensityMatrix::maximally_mixed(2).matrix())
                < 1e-15
        );
        let long = linear_inversion_qst([0.0, 2.0, 0.0]);
        assert!((long.purity() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cholesky_reconstructs() {
        let m = ComplexMatrix::from_rows(&[
            [Complex64::new(2.0, 0.0), Complex64::new(0.5, -0.5)],
            [Complex64::new(0.5, 0.5), Complex64::new(1.0, 0.0)],
        ])
        .unwrap();
        let l = cholesky(&m).unwrap();
        assert!(gram(&l).max_abs_diff(&m) < 1e-14);
        assert_eq!(unpack(&pack(&l), 2), l);
    }

    #[test]
    fn solves_small_system() {
        let x = solve_linear(vec![vec![0.0, 2.0], vec![3.0, 1.0]], vec![4.0, 5.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 2.0).abs() < 1e-15);
        assert!(solve_linear(vec![vec![1.0, 1.0], vec![1.0, 1.0]], vec![1.0, 2.0]).is_none());
    }

    fn obs(k: &Ket, counts: f64) -> Observation {
        Observation {
            operator: k.projector(),
            counts,
            exposure: 1.0,
        }
    }

    #[test]
    fn incomplete_design_rejected() {
        let h = Polarization::H.ket();
        let v = Polarization::V.ket();
        let err = TomographyProblem::new(TomographyKind::Qst, vec![obs(&h, 10.0), obs(&v, 5.0)])
            .unwrap_err();
        assert_eq!(err, Error::NotInformationallyComplete);
    }

    #[test]
    fn zero_counts_rejected() {
        let all: Vec<_> = Polarization::ALL
            .iter()
            .map(|p| obs(&p.ket(), 0.0))
            .collect();
        assert_eq!(
            TomographyProblem::new(TomographyKind::Qst, all).unwrap_err(),
            Error::ZeroCounts
        );
    }

    #[test]
    fn unknown_label_rejected() {
        let rec = CountRecord {
            setting_label: "Q".into(),
            input_label: "x".into(),
            counts: vec![1],
            duration: 1.0,
            seed_path: vec![],
        };
        assert_eq!(
            TomographyProblem::from_records(TomographyKind::Qst, &[rec], &Design::standard())
                .unwrap_err(),
            Error::UnknownSetting("Q".into())
        );
    }

    #[test]
    fn kind_mismatch_rejected() {
        let all: Vec<_> = Polarization::ALL
            .iter()
            .map(|p| obs(&p.ket(), 1.0))
            .collect();
        let p = TomographyProblem::new(TomographyKind::Qst, all).unwrap();
        assert!(qpt_mle(&p).is_err());
    }

    #[test]
    fn noiseless_basis_state() {
        let zero = DensityMatrix::pure(&Ket::basis(2, 0));
        let req = DatasetRequest::Qst {
            input: zero.clone(),
            input_label: "0".into(),
        };
        let p = TomographyProblem::noiseless(&req, None, &SourceModel::default()).unwrap();
        let r = qst_mle(&p).unwrap();
        assert!(r.estimate.trace_distance(&zero).unwrap() < 1e-6);
        let trace = r.log_likelihood_trace.unwrap();
        assert!(trace.windows(2).all(|w| w[1] >= w[0]));
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn noiseless_near_pure_state() {
        let target = DensityMatrix::new(
            ComplexMatrix::from_rows(&[
                [c(0.322, 0.0), c(0.352, -0.307)],
                [c(0.352, 0.307), c(0.678, 0.0)],
            ])
            .unwrap(),
        )
        .unwrap();
        let req = DatasetRequest::Qst {
            input: target.clone(),
            input_label: "t".into(),
        };
        let p = TomographyProblem::noiseless(&req, None, &SourceModel::default()).unwrap();
        let r = qst_mle(&p).unwrap();
        assert!(r.converged);
        assert!(r.estimate.matrix().max_abs_diff(target.matrix()) < 1e-6);
    }

    fn recovered_chi(channel: &ChannelRep) -> ComplexMatrix {
        let p = TomographyProblem::noiseless(
            &DatasetRequest::Qpt,
            Some(channel),
            &SourceModel::default(),
        )
        .unwrap();
        let r = qpt_mle(&p).unwrap();
        let trace = r.log_likelihood_trace.as_ref().unwrap();
        assert!(trace.windows(2).all(|w| w[1] >= w[0]));
        r.chi.unwrap().matrix().clone()
    }

    fn diag(v: [f64; 4]) -> ComplexMatrix {
        ComplexMatrix::from_diagonal(&v).unwrap()
    }

    #[test]
    fn process_identity_and_flip() {
        let id = ChannelRep::from(crate::channels::KrausSet::identity(2));
        assert!(recovered_chi(&id).max_abs_diff(&diag([1.0, 0.0, 0.0, 0.0])) < 1e-5);
        let x = crate::qmath::Pauli::X.matrix();
        let flip = ChannelRep::from(crate::channels::KrausSet::unitary(x).unwrap());
        assert!(recovered_chi(&flip).max_abs_diff(&diag([0.0, 1.0, 0.0, 0.0])) < 1e-5);
    }

    #[test]
    fn process_spa_transpose() {
        let chi = recovered_chi(&crate::channels::spa_transpose_channel());
        let third = 1.0 / 3.0;
        assert!(
            chi.max_abs_diff(&diag([third, third, 0.0, third])) < 1e-5,
            "{chi:?}"
        );
    }
}
