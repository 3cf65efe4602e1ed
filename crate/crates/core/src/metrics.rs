//! Fidelities between states and channels, and partial-transpose diagnostics.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::channels::{apply_channel, choi_of, ChannelRep};
use crate::error::{Error, Result};
use crate::qmath::{
    eigenvalues, haar_random_ket, hermitian_eigensystem, ComplexMatrix, DensityMatrix, Eigensystem,
    Ket,
};
use crate::shots::seeded_rng;

fn same_dim(a: &DensityMatrix, b: &DensityMatrix) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok(())
}

/// Eigenvalues below this fraction of the largest count as zero when
/// locating the support of a state.
const SUPPORT_TOL: f64 = 1e-14;

fn rank(eig: &Eigensystem) -> usize {
    let cut = SUPPORT_TOL * eig.max().max(0.0);
    eig.values.iter().filter(|&&v| v > cut).count()
}

/// `(tr √(√ρ σ √ρ))²`.
///
/// Evaluated on the support of the lower-rank argument, where
/// `√ρ σ √ρ` has no spurious near-zero eigenvalues whose square roots
/// would dominate the rounding error.
pub fn uhlmann_fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    same_dim(rho, sigma)?;
    let (er, es) = (
        hermitian_eigensystem(rho.matrix())?,
        hermitian_eigensystem(sigma.matrix())?,
    );
    let (eig, other) = if rank(&er) <= rank(&es) {
        (er, sigma)
    } else {
        (es, rho)
    };
    let cut = SUPPORT_TOL * eig.max().max(0.0);
    let support: Vec<(f64, &Ket)> = eig
        .values
        .iter()
        .zip(&eig.vectors)
        .filter(|(v, _)| **v > cut)
        .map(|(v, k)| (v.sqrt(), k))
        .collect();
    let r = support.len();
    if r == 0 {
        return Ok(0.0);
    }
    let mut entries = Vec::with_capacity(r * r);
    for (si, vi) in &support {
        let row = vi.amplitudes().to_vec();
        for (sj, vj) in &support {
            let sv = other.matrix().apply(vj.amplitudes());
            let inner: Complex64 = row.iter().zip(&sv).map(|(a, b)| a.conj() * b).sum();
            entries.push(inner * (si * sj));
        }
    }
    let s: f64 = if r == 1 {
        entries[0].re.max(0.0).sqrt()
    } else {
        let m = ComplexMatrix::new(r, entries)?.hermitian_part();
        eigenvalues(&m)?.iter().map(|v| v.max(0.0).sqrt()).sum()
    };
    Ok(s * s)
}

/// `tr[ρσ]`.
pub fn overlap_fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    same_dim(rho, sigma)?;
    Ok(rho.matrix().trace_product(sigma.matrix()).re)
}

fn check_channel_dims(a: &ChannelRep, b: &ChannelRep) -> Result<()> {
    if a.input_dim() != b.input_dim() {
        return Err(Error::DimensionMismatch {
            expected: a.input_dim(),
            found: b.input_dim(),
        });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelFidelity {
    pub process: f64,
    pub average: f64,
}

/// Process fidelity (Uhlmann fidelity of the Choi states) and the average
/// fidelity `(d·F_pro + 1)/(d + 1)`.
///
/// The average-fidelity formula is exact when at least one channel is
/// unitary; otherwise use [`average_fidelity_monte_carlo`].
pub fn process_and_average_fidelity(a: &ChannelRep, b: &ChannelRep) -> Result<ChannelFidelity> {
    check_channel_dims(a, b)?;
    let process = uhlmann_fidelity(choi_of(a)?.state(), choi_of(b)?.state())?;
    let d = a.input_dim() as f64;
    Ok(ChannelFidelity {
        process,
        average: (d * process + 1.0) / (d + 1.0),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
}

/// Haar average of `F(a[ψ], b[ψ])` with Uhlmann fidelity. Sample `i` uses
/// its own generator seeded from `(seed, i)`, so the result does not depend
/// on the thread count.
pub fn average_fidelity_monte_carlo(
    a: &ChannelRep,
    b: &ChannelRep,
    samples: usize,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    check_channel_dims(a, b)?;
    if samples < 2 {
        return Err(Error::InvalidParameter(format!(
            "{samples} Monte Carlo samples"
        )));
    }
    let d = a.input_dim();
    let values = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = seeded_rng(seed, &[i as u64]);
            let psi = DensityMatrix::pure(&haar_random_ket(d, &mut rng)?);
            uhlmann_fidelity(&apply_channel(a, &psi)?, &apply_channel(b, &psi)?)
        })
        .collect::<Result<Vec<_>>>()?;
    let n = samples as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(MonteCarloEstimate {
        mean,
        std_error: (var / n).sqrt(),
        samples,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Subsystem {
    First,
    Second,
}

/// Partial transpose of a two-qubit operator.
pub fn partial_transpose(rho: &ComplexMatrix, subsystem: Subsystem) -> Result<ComplexMatrix> {
    if rho.dim() != 4 {
        return Err(Error::InvalidDimension(rho.dim()));
    }
    let mut out = ComplexMatrix::zeros(4);
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    let (r, c) = match subsystem {
                        Subsystem::First => (2 * k + j, 2 * i + l),
                        Subsystem::Second => (2 * i + l, 2 * k + j),
                    };
                    out[(r, c)] = rho[(2 * i + j, 2 * k + l)];
                }
            }
        }
    }
    Ok(out)
}

/// Sum of the magnitudes of the negative partial-transpose eigenvalues.
pub fn negativity(rho: &DensityMatrix) -> Result<f64> {
    let pt = partial_transpose(rho.matrix(), Subsystem::Second)?;
    Ok(eigenvalues(&pt)?
        .iter()
        .filter(|&&v| v < 0.0)
        .fold(0.0, |acc, v| acc - v))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FidelityKind {
    Uhlmann,
    Overlap,
    Process,
    Average,
}

/// A fidelity value with its operands identified by the SHA-256 of their
/// JSON serialization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityReport {
    pub value: f64,
    pub kind: FidelityKind,
    pub operands: Vec<String>,
}

impl FidelityReport {
    pub fn new<T: Serialize>(kind: FidelityKind, value: f64, operands: &[&T]) -> Result<Self> {
        if !(0.0..=1.0 + 1e-10).contains(&value) {
            return Err(Error::InvalidParameter(format!("fidelity {value}")));
        }
        let operands = operands
            .iter()
            .map(content_hash)
            .collect::<Result<_>>()?;
        Ok(Self {
            value,
            kind,
            operands,
        })
    }

    pub fn states(kind: FidelityKind, a: &DensityMatrix, b: &DensityMatrix) -> Result<Self> {
        let value = match kind {
            FidelityKind::Uhlmann => uhlmann_fidelity(a, b)?,
            FidelityKind::Overlap => overlap_fidelity(a, b)?,
            _ => {
                return Err(Error::InvalidParameter(
                    "process and average fidelities take channels".into(),
                ))
            }
        };
        Self::new(kind, value, &[a, b])
    }

    pub fn channels(kind: FidelityKind, a: &ChannelRep, b: &ChannelRep) -> Result<Self> {
        let f = process_and_average_fidelity(a, b)?;
        let value = match kind {
            FidelityKind::Process => f.process,
            FidelityKind::Average => f.average,
            _ => {
                return Err(Error::InvalidParameter(
                    "uhlmann and overlap fidelities take states".into(),
                ))
            }
        };
        Self::new(kind, value, &[a, b])
    }
}

/// Lowercase hex SHA-256 of the compact JSON form.
pub fn content_hash<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let bytes = serde_json::to_vec(value)?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}
