//! Small dense complex linear algebra: matrices up to 16×16, kets, density
//! matrices, a Jacobi Hermitian eigensolver and random-state sampling.

mod density;
mod eigen;
mod ket;
mod matrix;
mod random;

pub use density::{DensityMatrix, PHYSICAL_TOL};
pub use eigen::{
    eigenvalues, hermitian_eigensystem, matrix_sqrt_psd, min_eigenvalue, Eigensystem,
    HERMITIAN_INPUT_TOL, PSD_CLAMP_TOL,
};
pub use ket::Ket;
pub use matrix::{
    pauli_basis, tensor_product, ComplexMatrix, Pauli, I, MAX_DIM, MIN_DIM, ONE, ZERO,
};
pub use random::{ginibre, haar_random_ket, haar_random_unitary, random_density_matrix};

/// |φ+⟩ = Σ_i |ii⟩ / √d
pub fn phi_plus(dim: usize) -> Ket {
    let d2 = dim * dim;
    let mut amps = vec![ZERO; d2];
    for i in 0..dim {
        amps[i * dim + i] = ONE;
    }
    Ket::normalize(amps).expect("nonzero")
}

/// Trace out the second factor of a `(da·db)`-dimensional operator.
pub fn partial_trace_second(m: &ComplexMatrix, da: usize) -> crate::Result<ComplexMatrix> {
    let d = m.dim();
    if da == 0 || !d.is_multiple_of(da) {
        return Err(crate::Error::DimensionMismatch {
            expected: da,
            found: d,
        });
    }
    if da < MIN_DIM {
        return Err(crate::Error::InvalidDimension(da));
    }
    let db = d / da;
    let mut out = ComplexMatrix::zeros(da);
    for i in 0..da {
        for j in 0..da {
            out[(i, j)] = (0..db).map(|k| m[(i * db + k, j * db + k)]).sum();
        }
    }
    Ok(out)
}

/// Trace out the first factor of a `(da·db)`-dimensional operator.
pub fn partial_trace_first(m: &ComplexMatrix, da: usize) -> crate::Result<ComplexMatrix> {
    let d = m.dim();
    if da == 0 || !d.is_multiple_of(da) {
        return Err(crate::Error::DimensionMismatch {
            expected: da,
            found: d,
        });
    }
    let db = d / da;
    if db < MIN_DIM {
        return Err(crate::Error::InvalidDimension(db));
    }
    let mut out = ComplexMatrix::zeros(db);
    for k in 0..db {
        for l in 0..db {
            out[(k, l)] = (0..da).map(|i| m[(i * db + k, i * db + l)]).sum();
        }
    }
    Ok(out)
}

/// Integer square root for dimensions of bipartite operators.
pub(crate) fn square_root_dim(d2: usize) -> Option<usize> {
    (1..=MAX_DIM).find(|d| d * d == d2)
}
