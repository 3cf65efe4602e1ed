//! Structural physical approximation of the transpose map.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::{choi_from_action, Branch, ChannelRep, ChoiMatrix, KrausSet, MeasurePrepareEnsemble};
use crate::error::{Error, Result};
use crate::qmath::{min_eigenvalue, ComplexMatrix, DensityMatrix, Ket, Pauli, ONE};

pub(crate) const MINIMAL_QUBIT_ADMIXTURE: f64 = 2.0 / 3.0;

const BISECTION_TOL: f64 = 1e-10;

/// Mixing weight `p` of the complete contraction in `(1−p)T + pD`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpaParameters {
    dim: usize,
    admixture: f64,
}

impl SpaParameters {
    pub fn new(dim: usize, admixture: f64) -> Result<Self> {
        check_spa_dim(dim)?;
        if !(0.0..=1.0).contains(&admixture) {
            return Err(Error::InvalidParameter(format!(
                "admixture {admixture} outside [0, 1]"
            )));
        }
        Ok(Self { dim, admixture })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn admixture(&self) -> f64 {
        self.admixture
    }
}

fn check_spa_dim(dim: usize) -> Result<()> {
    if (2..=4).contains(&dim) {
        Ok(())
    } else {
        Err(Error::InvalidDimension(dim))
    }
}

/// `X ↦ (1−p) Xᵀ + p tr[X] 𝟙/d`
pub fn spa_transpose_map(x: &ComplexMatrix, p: f64) -> ComplexMatrix {
    let d = x.dim();
    let contraction = ComplexMatrix::identity(d).scale_complex(x.trace() / d as f64);
    &x.transpose().scale(1.0 - p) + &contraction.scale(p)
}

/// `[𝟙 ⊗ ((1−p)T + pD)](|φ+⟩⟨φ+|)`; Hermitian with unit trace, positive
/// only once `p ≥ d/(d+1)`.
pub fn spa_transpose_choi(dim: usize, p: f64) -> Result<ComplexMatrix> {
    let params = SpaParameters::new(dim, p)?;
    choi_from_action(params.dim, |x| Ok(spa_transpose_map(x, params.admixture)))
}

/// Smallest admixture making the SPA-transpose Choi matrix positive, found by
/// bisection on its minimum eigenvalue.
pub fn minimal_spa_admixture(dim: usize) -> Result<f64> {
    check_spa_dim(dim)?;
    let min_eig = |p: f64| -> Result<f64> { min_eigenvalue(&spa_transpose_choi(dim, p)?) };
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    debug_assert!(min_eig(lo)? < 0.0 && min_eig(hi)? > 0.0);
    while hi - lo > BISECTION_TOL {
        let mid = 0.5 * (lo + hi);
        if min_eig(mid)? >= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// The four qubit vectors `|v_k⟩` of the separable decomposition of the
/// SPA-transpose Choi state, evaluated from their unnormalized closed forms.
pub fn canonical_spa_vectors() -> [Ket; 4] {
    let i = Complex64::new(0.0, 1.0);
    let omega = Complex64::from_polar(1.0, 2.0 * PI / 3.0);
    let numerator = i * omega;
    let a = numerator / (i + omega.conj());
    let b = numerator / (i - omega.conj());
    [a, -b, b, -a].map(|c| Ket::normalize(vec![ONE, c]).expect("nonzero"))
}

/// Measure `{|v_k*⟩⟨v_k*|/2}`, then prepare `|v_k⟩`.
pub fn spa_measure_prepare_ensemble() -> MeasurePrepareEnsemble {
    let branches = canonical_spa_vectors()
        .iter()
        .zip(1..)
        .map(|(v, label)| Branch {
            effect: v.conj().projector().scale(0.5),
            prepared: DensityMatrix::pure(v),
            label,
        })
        .collect();
    MeasurePrepareEnsemble::new(branches).expect("canonical POVM is complete")
}

/// `{σ0, σx, σz}/√3`
pub fn unitary_scheme_kraus() -> KrausSet {
    let w = 1.0 / 3.0_f64.sqrt();
    KrausSet::new(
        [Pauli::I, Pauli::X, Pauli::Z]
            .iter()
            .map(|p| p.matrix().scale(w))
            .collect(),
    )
    .expect("complete")
}

/// The qubit SPA transpose at the minimal admixture, as a Choi matrix.
pub fn spa_transpose_channel() -> ChannelRep {
    let m = spa_transpose_choi(2, MINIMAL_QUBIT_ADMIXTURE).expect("valid parameters");
    ChoiMatrix::new(m)
        .expect("positive at minimal admixture")
        .into()
}
