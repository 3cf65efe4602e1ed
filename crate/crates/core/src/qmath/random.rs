use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::ket::Ket;
use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};

/// Haar-random pure state: independent standard complex Gaussians, normalized.
pub fn haar_random_ket<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<Ket> {
    if dim != 2 && dim != 4 {
        return Err(Error::InvalidDimension(dim));
    }
    loop {
        let amps: Vec<Complex64> = (0..dim)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        if let Ok(k) = Ket::normalize(amps) {
            return Ok(k);
        }
    }
}

/// Matrix of independent standard complex Gaussian entries.
pub fn ginibre<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let entries = (0..dim * dim)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    ComplexMatrix::new(dim, entries).expect("valid dimension")
}

/// Haar-random unitary via Gram-Schmidt on a Ginibre matrix.
pub fn haar_random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let g = ginibre(dim, rng);
    let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(dim);
    for c in 0..dim {
        let mut v: Vec<Complex64> = (0..dim).map(|r| g[(r, c)]).collect();
        for u in &cols {
            let proj: Complex64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (vi, ui) in v.iter_mut().zip(u) {
                *vi -= proj * ui;
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        cols.push(v.into_iter().map(|z| z / norm).collect());
    }
    let mut u = ComplexMatrix::zeros(dim);
    for (c, col) in cols.iter().enumerate() {
        for (r, z) in col.iter().enumerate() {
            u[(r, c)] = *z;
        }
    }
    u
}

/// Random full-rank mixed state from the Hilbert-Schmidt ensemble.
pub fn random_density_matrix<R: Rng + ?Sized>(
    dim: usize,
    rng: &mut R,
) -> super::density::DensityMatrix {
    let g = ginibre(dim, rng);
    super::density::DensityMatrix::from_unnormalized(&g * &g.adjoint())
        .expect("Ginibre product is positive")
}
