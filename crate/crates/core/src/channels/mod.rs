//! Qubit channel representations and conversions between them.
//!
//! Choi matrices use the channel-on-second-subsystem convention,
//! `C = [𝟙 ⊗ E](|φ+⟩⟨φ+|)` with `|φ+⟩ = Σ|ii⟩/√d`.

mod spa;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmath::{
    hermitian_eigensystem, partial_trace_second, pauli_basis, phi_plus, square_root_dim,
    tensor_product, ComplexMatrix, DensityMatrix, Ket, PHYSICAL_TOL,
};

pub use spa::{
    canonical_spa_vectors, minimal_spa_admixture, spa_measure_prepare_ensemble,
    spa_transpose_channel, spa_transpose_choi, spa_transpose_map, unitary_scheme_kraus,
    SpaParameters,
};

/// Trace-preservation tolerance on the reduced Choi state.
pub const TRACE_PRESERVING_TOL: f64 = 1e-9;
/// Choi eigenvalues at or below this are dropped when extracting Kraus operators.
pub const KRAUS_CUTOFF: f64 = 1e-12;

fn dim_mismatch(expected: usize, found: usize) -> Error {
    Error::DimensionMismatch { expected, found }
}

/// Kraus operators `{K_i}` with `Σ K_i† K_i = 𝟙`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "KrausRecord", into = "KrausRecord")]
pub struct KrausSet {
    dim: usize,
    operators: Vec<ComplexMatrix>,
}

#[derive(Serialize, Deserialize)]
struct KrausRecord {
    dim: usize,
    operators: Vec<ComplexMatrix>,
}

impl KrausSet {
    pub fn new(operators: Vec<ComplexMatrix>) -> Result<Self> {
        let first = operators
            .first()
            .ok_or_else(|| Error::InvalidParameter("empty Kraus set".into()))?;
        let dim = first.dim();
        if let Some(bad) = operators.iter().find(|k| k.dim() != dim) {
            return Err(dim_mismatch(dim, bad.dim()));
        }
        let mut sum = ComplexMatrix::zeros(dim);
        for k in &operators {
            sum = &sum + &(&k.adjoint() * k);
        }
        let deviation = sum.max_abs_diff(&ComplexMatrix::identity(dim));
        if deviation > PHYSICAL_TOL {
            return Err(Error::NotComplete { deviation });
        }
        Ok(Self { dim, operators })
    }

    /// Single-element set `{U}`.
    pub fn unitary(u: ComplexMatrix) -> Result<Self> {
        Self::new(vec![u])
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            operators: vec![ComplexMatrix::identity(dim)],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn operators(&self) -> &[ComplexMatrix] {
        &self.operators
    }
}

impl TryFrom<KrausRecord> for KrausSet {
    type Error = Error;

    fn try_from(r: KrausRecord) -> Result<Self> {
        let set = KrausSet::new(r.operators)?;
        if set.dim != r.dim {
            return Err(dim_mismatch(r.dim, set.dim));
        }
        Ok(set)
    }
}

impl From<KrausSet> for KrausRecord {
    fn from(k: KrausSet) -> Self {
        KrausRecord {
            dim: k.dim,
            operators: k.operators,
        }
    }
}

/// Choi (Jamiolkowski) state of a completely positive, trace-preserving map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixPayload", into = "MatrixPayload")]
pub struct ChoiMatrix {
    input_dim: usize,
    state: DensityMatrix,
}

#[derive(Serialize, Deserialize)]
struct MatrixPayload {
    matrix: ComplexMatrix,
}

impl ChoiMatrix {
    /// Validate positivity, unit trace and `tr₂ C = 𝟙/d`.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let input_dim =
            square_root_dim(matrix.dim()).ok_or(Error::InvalidDimension(matrix.dim()))?;
        let state = DensityMatrix::new(matrix)?;
        let reduced = partial_trace_second(state.matrix(), input_dim)?;
        let target = ComplexMatrix::identity(input_dim).scale(1.0 / input_dim as f64);
        let deviation = reduced.max_abs_diff(&target);
        if deviation > TRACE_PRESERVING_TOL {
            return Err(Error::NotComplete { deviation });
        }
        Ok(Self { input_dim, state })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn state(&self) -> &DensityMatrix {
        &self.state
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        self.state.matrix()
    }
}

impl TryFrom<MatrixPayload> for ChoiMatrix {
    type Error = Error;

    fn try_from(p: MatrixPayload) -> Result<Self> {
        ChoiMatrix::new(p.matrix)
    }
}

impl From<ChoiMatrix> for MatrixPayload {
    fn from(c: ChoiMatrix) -> Self {
        MatrixPayload {
            matrix: c.state.into_matrix(),
        }
    }
}

/// Process matrix in the Pauli basis (σ0, σx, σy, σz):
/// `E(ρ) = Σ χ_mn σ_m ρ σ_n†`, normalized to unit trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixPayload", into = "MatrixPayload")]
pub struct ChiMatrix {
    matrix: ComplexMatrix,
}

impl ChiMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if matrix.dim() != 4 {
            return Err(dim_mismatch(4, matrix.dim()));
        }
        // Hermitian, PSD, unit trace.
        let matrix = DensityMatrix::new(matrix)?.into_matrix();
        let paulis = pauli_basis();
        let mut sum = ComplexMatrix::zeros(2);
        for m in 0..4 {
            for n in 0..4 {
                let term = &paulis[n].adjoint() * &paulis[m];
                sum = &sum + &term.scale_complex(matrix[(m, n)]);
            }
        }
        let deviation = sum.max_abs_diff(&ComplexMatrix::identity(2));
        if deviation > TRACE_PRESERVING_TOL {
            return Err(Error::NotComplete { deviation });
        }
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }
}

impl TryFrom<MatrixPayload> for ChiMatrix {
    type Error = Error;

    fn try_from(p: MatrixPayload) -> Result<Self> {
        ChiMatrix::new(p.matrix)
    }
}

impl From<ChiMatrix> for MatrixPayload {
    fn from(c: ChiMatrix) -> Self {
        MatrixPayload { matrix: c.matrix }
    }
}

/// One measure-and-prepare outcome: POVM effect, re-prepared state, label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub effect: ComplexMatrix,
    pub prepared: DensityMatrix,
    pub label: u32,
}

/// Entanglement-breaking channel `ρ ↦ Σ_k tr[E_k ρ] σ_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "EnsembleRecord", into = "EnsembleRecord")]
pub struct MeasurePrepareEnsemble {
    branches: Vec<Branch>,
}

#[derive(Serialize, Deserialize)]
struct EnsembleRecord {
    branches: Vec<Branch>,
}

impl MeasurePrepareEnsemble {
    pub fn new(branches: Vec<Branch>) -> Result<Self> {
        let first = branches
            .first()
            .ok_or_else(|| Error::InvalidParameter("empty ensemble".into()))?;
        let dim = first.effect.dim();
        let mut sum = ComplexMatrix::zeros(dim);
        for b in &branches {
            if b.effect.dim() != dim {
                return Err(dim_mismatch(dim, b.effect.dim()));
            }
            if b.prepared.dim() != first.prepared.dim() {
                return Err(dim_mismatch(first.prepared.dim(), b.prepared.dim()));
            }
            let eig = hermitian_eigensystem(&b.effect)?;
            if eig.min() < -PHYSICAL_TOL {
                return Err(Error::NotPositive {
                    min_eigenvalue: eig.min(),
                });
            }
            sum = &sum + &b.effect;
        }
        let deviation = sum.max_abs_diff(&ComplexMatrix::identity(dim));
        if deviation > PHYSICAL_TOL {
            return Err(Error::NotComplete { deviation });
        }
        Ok(Self { branches })
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn dim(&self) -> usize {
        self.branches[0].effect.dim()
    }

    /// Outcome probabilities `tr[E_k ρ]`.
    pub fn branch_probabilities(&self, rho: &DensityMatrix) -> Vec<f64> {
        self.branches
            .iter()
            .map(|b| b.effect.trace_product(rho.matrix()).re)
            .collect()
    }
}

impl TryFrom<EnsembleRecord> for MeasurePrepareEnsemble {
    type Error = Error;

    fn try_from(r: EnsembleRecord) -> Result<Self> {
        MeasurePrepareEnsemble::new(r.branches)
    }
}

impl From<MeasurePrepareEnsemble> for EnsembleRecord {
    fn from(e: MeasurePrepareEnsemble) -> Self {
        EnsembleRecord {
            branches: e.branches,
        }
    }
}

/// Representation discriminator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RepKind {
    Kraus,
    Choi,
    Chi,
    MeasurePrepare,
}

/// A channel in any of the four supported representations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChannelRep {
    Kraus(KrausSet),
    Choi(ChoiMatrix),
    Chi(ChiMatrix),
    MeasurePrepare(MeasurePrepareEnsemble),
}

impl ChannelRep {
    pub fn kind(&self) -> RepKind {
        match self {
            ChannelRep::Kraus(_) => RepKind::Kraus,
            ChannelRep::Choi(_) => RepKind::Choi,
            ChannelRep::Chi(_) => RepKind::Chi,
            ChannelRep::MeasurePrepare(_) => RepKind::MeasurePrepare,
        }
    }

    pub fn input_dim(&self) -> usize {
        match self {
            ChannelRep::Kraus(k) => k.dim(),
            ChannelRep::Choi(c) => c.input_dim(),
            ChannelRep::Chi(_) => 2,
            ChannelRep::MeasurePrepare(e) => e.dim(),
        }
    }

    /// Linear action on an arbitrary (not necessarily Hermitian) operator.
    pub fn act(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        let d = self.input_dim();
        if x.dim() != d {
            return Err(dim_mismatch(d, x.dim()));
        }
        Ok(match self {
            ChannelRep::Kraus(k) => k
                .operators()
                .iter()
                .fold(ComplexMatrix::zeros(d), |acc, op| {
                    &acc + &x.conjugate_by(op)
                }),
            ChannelRep::Choi(c) => {
                // E(X) = d · tr₁[(Xᵀ ⊗ 𝟙) C]
                let m = c.matrix();
                let mut out = ComplexMatrix::zeros(d);
                for k in 0..d {
                    for l in 0..d {
                        let mut acc = Complex64::new(0.0, 0.0);
                        for i in 0..d {
                            for j in 0..d {
                                acc += x[(i, j)] * m[(i * d + k, j * d + l)];
                            }
                        }
                        out[(k, l)] = acc * d as f64;
                    }
                }
                out
            }
            ChannelRep::Chi(chi) => {
                let paulis = pauli_basis();
                let mut out = ComplexMatrix::zeros(2);
                for m in 0..4 {
                    let left = &paulis[m] * x;
                    for n in 0..4 {
                        let w = chi.matrix()[(m, n)];
                        if w.norm() == 0.0 {
                            continue;
                        }
                        let term = &left * &paulis[n].adjoint();
                        out = &out + &term.scale_complex(w);
                    }
                }
                out
            }
            ChannelRep::MeasurePrepare(e) => {
                let dout = e.branches[0].prepared.dim();
                e.branches
                    .iter()
                    .fold(ComplexMatrix::zeros(dout), |acc, b| {
                        &acc + &b.prepared.matrix().scale_complex(b.effect.trace_product(x))
                    })
            }
        })
    }
}

impl From<KrausSet> for ChannelRep {
    fn from(k: KrausSet) -> Self {
        ChannelRep::Kraus(k)
    }
}

impl From<ChoiMatrix> for ChannelRep {
    fn from(c: ChoiMatrix) -> Self {
        ChannelRep::Choi(c)
    }
}

impl From<ChiMatrix> for ChannelRep {
    fn from(c: ChiMatrix) -> Self {
        ChannelRep::Chi(c)
    }
}

impl From<MeasurePrepareEnsemble> for ChannelRep {
    fn from(e: MeasurePrepareEnsemble) -> Self {
        ChannelRep::MeasurePrepare(e)
    }
}

/// Output tolerance: inputs are validated at 1e-10, so accumulated error stays
/// well below this; the result is renormalized to unit trace.
const OUTPUT_TOL: f64 = 1e-9;

/// Apply a channel to a state.
pub fn apply_channel(rep: &ChannelRep, rho: &DensityMatrix) -> Result<DensityMatrix> {
    let out = rep.act(rho.matrix())?;
    let state = DensityMatrix::with_tolerance(out, OUTPUT_TOL)?;
    let tr = state.matrix().trace().re;
    DensityMatrix::with_tolerance(state.into_matrix().scale(1.0 / tr), OUTPUT_TOL)
}

/// Choi matrix `(1/d) Σ_ij |i⟩⟨j| ⊗ E(|i⟩⟨j|)` of an arbitrary linear map
/// given by its action on matrix units.
pub(crate) fn choi_from_action(
    dim: usize,
    action: impl Fn(&ComplexMatrix) -> Result<ComplexMatrix>,
) -> Result<ComplexMatrix> {
    let mut c = ComplexMatrix::zeros(dim * dim);
    for i in 0..dim {
        for j in 0..dim {
            let image = action(&ComplexMatrix::unit(dim, i, j))?;
            if image.dim() != dim {
                return Err(dim_mismatch(dim, image.dim()));
            }
            for k in 0..dim {
                for l in 0..dim {
                    c[(i * dim + k, j * dim + l)] = image[(k, l)] / dim as f64;
                }
            }
        }
    }
    Ok(c)
}

/// Choi matrix of any representation.
pub fn choi_of(rep: &ChannelRep) -> Result<ChoiMatrix> {
    match rep {
        ChannelRep::Choi(c) => Ok(c.clone()),
        ChannelRep::Chi(chi) => {
            let s = bell_pauli_basis();
            let mut c = ComplexMatrix::zeros(4);
            for m in 0..4 {
                for n in 0..4 {
                    let w = chi.matrix()[(m, n)];
                    let a = s[m].amplitudes();
                    let b = s[n].amplitudes();
                    for r in 0..4 {
                        for col in 0..4 {
                            c[(r, col)] += w * a[r] * b[col].conj();
                        }
                    }
                }
            }
            ChoiMatrix::new(c)
        }
        _ => ChoiMatrix::new(choi_from_action(rep.input_dim(), |x| rep.act(x))?),
    }
}

/// `(𝟙 ⊗ σ_m)|φ+⟩` for the Pauli basis; orthonormal.
fn bell_pauli_basis() -> [Ket; 4] {
    let phi = phi_plus(2);
    pauli_basis().map(|p| {
        let op = tensor_product(&ComplexMatrix::identity(2), &p).expect("4x4");
        Ket::normalize(op.apply(phi.amplitudes())).expect("unitary image")
    })
}

/// χ-matrix of a qubit channel: `χ_mn = ⟨s_m| C |s_n⟩` with `|s_m⟩ = (𝟙⊗σ_m)|φ+⟩`.
pub fn chi_of(rep: &ChannelRep) -> Result<ChiMatrix> {
    if let ChannelRep::Chi(chi) = rep {
        return Ok(chi.clone());
    }
    if rep.input_dim() != 2 {
        return Err(Error::Unsupported(
            "chi matrices are defined for qubit channels only".into(),
        ));
    }
    let choi = choi_of(rep)?;
    let s = bell_pauli_basis();
    let mut chi = ComplexMatrix::zeros(4);
    for m in 0..4 {
        for n in 0..4 {
            let cs = choi.matrix().apply(s[n].amplitudes());
            chi[(m, n)] = s[m]
                .amplitudes()
                .iter()
                .zip(&cs)
                .map(|(a, b)| a.conj() * b)
                .sum();
        }
    }
    ChiMatrix::new(chi)
}

/// Kraus operators from the Choi eigendecomposition.
pub fn kraus_of(rep: &ChannelRep) -> Result<KrausSet> {
    if let ChannelRep::Kraus(k) = rep {
        return Ok(k.clone());
    }
    let choi = choi_of(rep)?;
    let d = choi.input_dim();
    let eig = hermitian_eigensystem(choi.matrix())?;
    let mut ops = Vec::new();
    for (&lam, v) in eig.values.iter().zip(&eig.vectors) {
        if lam <= KRAUS_CUTOFF {
            continue;
        }
        let w = (d as f64 * lam).sqrt();
        let a = v.amplitudes();
        let mut k = ComplexMatrix::zeros(d);
        for i in 0..d {
            for out in 0..d {
                k[(out, i)] = a[i * d + out] * w;
            }
        }
        ops.push(k);
    }
    KrausSet::new(ops)
}

/// Convert to another representation.
///
/// Conversion to measure-and-prepare form is supported only for the
/// canonical SPA-transpose channel; a general separable decomposition is not
/// attempted.
pub fn convert(rep: &ChannelRep, target: RepKind) -> Result<ChannelRep> {
    if rep.kind() == target {
        return Ok(rep.clone());
    }
    Ok(match target {
        RepKind::Choi => choi_of(rep)?.into(),
        RepKind::Chi => chi_of(rep)?.into(),
        RepKind::Kraus => kraus_of(rep)?.into(),
        RepKind::MeasurePrepare => {
            let choi = choi_of(rep)?;
            let p = spa::MINIMAL_QUBIT_ADMIXTURE;
            let canonical = spa_transpose_choi(2, p)?;
            if choi.input_dim() == 2
                && choi.matrix().max_abs_diff(&canonical) <= TRACE_PRESERVING_TOL
            {
                spa_measure_prepare_ensemble().into()
            } else {
                return Err(Error::Unsupported(
                    "measure-and-prepare decomposition is only available for the SPA transpose"
                        .into(),
                ));
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmath::{Pauli, ONE};

    #[test]
    fn identity_choi_is_bell_projector() {
        let c = choi_of(&KrausSet::identity(2).into()).unwrap();
        assert!(c.matrix().max_abs_diff(&phi_plus(2).projector()) < 1e-15);
    }

    #[test]
    fn identity_kraus_acts_trivially() {
        let rep: ChannelRep = KrausSet::identity(2).into();
        let rho =
            DensityMatrix::pure(&Ket::normalize(vec![ONE, Complex64::new(0.3, 0.4)]).unwrap());
        let out = apply_channel(&rep, &rho).unwrap();
        assert!(out.matrix().max_abs_diff(rho.matrix()) < 1e-15);
    }

    #[test]
    fn incomplete_kraus_rejected() {
        let half = ComplexMatrix::identity(2).scale(0.5);
        assert!(matches!(
            KrausSet::new(vec![half]),
            Err(Error::NotComplete { .. })
        ));
    }

    #[test]
    fn sigma_x_chi() {
        let rep: ChannelRep = KrausSet::unitary(Pauli::X.matrix()).unwrap().into();
        let chi = chi_of(&rep).unwrap();
        let expected = ComplexMatrix::from_diagonal(&[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(chi.matrix().max_abs_diff(&expected) < 1e-14);
    }

    #[test]
    fn dimension_mismatch_on_apply() {
        let rep: ChannelRep = KrausSet::identity(2).into();
        let rho = DensityMatrix::maximally_mixed(4);
        assert!(matches!(
            apply_channel(&rep, &rho),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn non_tp_choi_rejected() {
        // |00⟩⟨00| has unit trace but tr₂ = |0⟩⟨0| ≠ 𝟙/2.
        let m = ComplexMatrix::unit(4, 0, 0);
        assert!(matches!(ChoiMatrix::new(m), Err(Error::NotComplete { .. })));
    }

    #[test]
    fn measure_prepare_unsupported_for_identity() {
        let rep: ChannelRep = KrausSet::identity(2).into();
        assert!(matches!(
            convert(&rep, RepKind::MeasurePrepare),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn json_kind_tags() {
        let rep: ChannelRep = KrausSet::identity(2).into();
        let s = serde_json::to_string(&rep).unwrap();
        assert!(s.starts_with(r#"{"kind":"kraus""#), "{s}");
        let back: ChannelRep = serde_json::from_str(&s).unwrap();
        assert_eq!(back, rep);

        let mp: ChannelRep = spa_measure_prepare_ensemble().into();
        let s = serde_json::to_string(&mp).unwrap();
        assert!(s.starts_with(r#"{"kind":"measure_prepare""#));
        assert_eq!(serde_json::from_str::<ChannelRep>(&s).unwrap(), mp);
    }
}
