use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::matrix::{check_dim, ComplexMatrix, ONE, ZERO};
use crate::error::{Error, Result};

/// Normalized state vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<[f64; 2]>", into = "Vec<[f64; 2]>")]
pub struct Ket {
    amplitudes: Vec<Complex64>,
}

impl Ket {
    /// Normalize the given amplitudes.
    pub fn normalize(amplitudes: Vec<Complex64>) -> Result<Self> {
        check_dim(amplitudes.len())?;
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "cannot normalize vector of norm {norm}"
            )));
        }
        Ok(Self {
            amplitudes: amplitudes.into_iter().map(|z| z / norm).collect(),
        })
    }

    /// Computational basis vector |index⟩.
    pub fn basis(dim: usize, index: usize) -> Self {
        check_dim(dim).expect("ket dimension out of range");
        assert!(index < dim);
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[index] = ONE;
        Self { amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// ⟨self|other⟩
    pub fn inner(&self, other: &Ket) -> Complex64 {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// |⟨self|other⟩|², the pure-state fidelity.
    pub fn overlap(&self, other: &Ket) -> f64 {
        self.inner(other).norm_sqr()
    }

    /// Entrywise complex conjugate.
    pub fn conj(&self) -> Self {
        Self {
            amplitudes: self.amplitudes.iter().map(|z| z.conj()).collect(),
        }
    }

    /// |self⟩⟨self|
    pub fn projector(&self) -> ComplexMatrix {
        let d = self.dim();
        let mut m = ComplexMatrix::zeros(d);
        for r in 0..d {
            for c in 0..d {
                m[(r, c)] = self.amplitudes[r] * self.amplitudes[c].conj();
            }
        }
        m
    }

    /// ⟨self|m|self⟩
    pub fn expectation(&self, m: &ComplexMatrix) -> Complex64 {
        let mv = m.apply(&self.amplitudes);
        self.amplitudes
            .iter()
            .zip(&mv)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Apply an operator and renormalize.
    pub fn evolve(&self, m: &ComplexMatrix) -> Result<Self> {
        Self::normalize(m.apply(&self.amplitudes))
    }
}

impl TryFrom<Vec<[f64; 2]>> for Ket {
    type Error = Error;

    fn try_from(v: Vec<[f64; 2]>) -> Result<Self> {
        Ket::normalize(
            v.into_iter()
                .map(|[re, im]| Complex64::new(re, im))
                .collect(),
        )
    }
}

impl From<Ket> for Vec<[f64; 2]> {
    fn from(k: Ket) -> Self {
        k.amplitudes.iter().map(|z| [z.re, z.im]).collect()
    }
}
