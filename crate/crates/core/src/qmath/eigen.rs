use num_complex::Complex64;

use super::ket::Ket;
use super::matrix::{check_dim, ComplexMatrix, ZERO};
use crate::error::{Error, Result};

/// Hermiticity required of eigensolver input.
pub const HERMITIAN_INPUT_TOL: f64 = 1e-8;
/// Eigenvalues above this (negated) bound are treated as zero by PSD routines.
pub const PSD_CLAMP_TOL: f64 = 1e-10;

const MAX_SWEEPS: usize = 100;

/// Spectral decomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct Eigensystem {
    pub values: Vec<f64>,
    pub vectors: Vec<Ket>,
}

impl Eigensystem {
    /// Σ f(λ_i) |v_i⟩⟨v_i|
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let d = self.values.len();
        let mut out = ComplexMatrix::zeros(d);
        for (&lam, v) in self.values.iter().zip(&self.vectors) {
            let w = f(lam);
            if w == 0.0 {
                continue;
            }
            let a = v.amplitudes();
            for r in 0..d {
                for c in 0..d {
                    out[(r, c)] += a[r] * a[c].conj() * w;
                }
            }
        }
        out
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map_spectrum(|x| x)
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        *self.values.last().expect("non-empty spectrum")
    }
}

/// Eigenvalues (ascending) and orthonormal eigenvectors of a Hermitian matrix.
///
/// Cyclic complex Jacobi: each rotation first removes the phase of the pivot
/// element, then applies a real Givens rotation.
pub fn hermitian_eigensystem(m: &ComplexMatrix) -> Result<Eigensystem> {
    let n = m.dim();
    check_dim(n)?;
    let deviation = m.hermitian_deviation();
    if deviation > HERMITIAN_INPUT_TOL {
        return Err(Error::NotHermitian { deviation });
    }

    let a_mat = m.hermitian_part();
    let mut a: Vec<Complex64> = a_mat.entries().to_vec();
    let mut v: Vec<Complex64> = ComplexMatrix::identity(n).entries().to_vec();
    let scale = a_mat.frobenius_norm().max(f64::MIN_POSITIVE);
    let idx = |r: usize, c: usize| r * n + c;

    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|p| ((p + 1)..n).map(move |q| (p, q)))
            .map(|(p, q)| a[idx(p, q)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let b = a[idx(p, q)];
                let b_abs = b.norm();
                if b_abs <= 1e-300 {
                    continue;
                }
                let phase = b / b_abs; // e^{iφ}
                let app = a[idx(p, p)].re;
                let aqq = a[idx(q, q)].re;
                let tau = (aqq - app) / (2.0 * b_abs);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // G = diag(1, e^{-iφ}) · [[c, s], [-s, c]] on the (p, q) plane.
                let g_pp = Complex64::new(c, 0.0);
                let g_pq = Complex64::new(s, 0.0);
                let g_qp = -phase.conj() * s;
                let g_qq = phase.conj() * c;

                // A <- A G, V <- V G
                for k in 0..n {
                    let akp = a[idx(k, p)];
                    let akq = a[idx(k, q)];
                    a[idx(k, p)] = akp * g_pp + akq * g_qp;
                    a[idx(k, q)] = akp * g_pq + akq * g_qq;
                    let vkp = v[idx(k, p)];
                    let vkq = v[idx(k, q)];
                    v[idx(k, p)] = vkp * g_pp + vkq * g_qp;
                    v[idx(k, q)] = vkp * g_pq + vkq * g_qq;
                }
                // A <- G† A
                for k in 0..n {
                    let apk = a[idx(p, k)];
                    let aqk = a[idx(q, k)];
                    a[idx(p, k)] = g_pp.conj() * apk + g_qp.conj() * aqk;
                    a[idx(q, k)] = g_pq.conj() * apk + g_qq.conj() * aqk;
                }
                a[idx(p, q)] = ZERO;
                a[idx(q, p)] = ZERO;
                a[idx(p, p)] = Complex64::new(a[idx(p, p)].re, 0.0);
                a[idx(q, q)] = Complex64::new(a[idx(q, q)].re, 0.0);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[idx(i, i)].re.total_cmp(&a[idx(j, j)].re));
    let values = order.iter().map(|&i| a[idx(i, i)].re).collect();
    let vectors = order
        .iter()
        .map(|&col| {
            let amps: Vec<Complex64> = (0..n).map(|r| v[idx(r, col)]).collect();
            Ket::normalize(amps).expect("unitary column")
        })
        .collect();
    Ok(Eigensystem { values, vectors })
}

/// Ascending eigenvalues of a Hermitian matrix.
pub fn eigenvalues(m: &ComplexMatrix) -> Result<Vec<f64>> {
    Ok(hermitian_eigensystem(m)?.values)
}

pub fn min_eigenvalue(m: &ComplexMatrix) -> Result<f64> {
    Ok(hermitian_eigensystem(m)?.min())
}

/// Principal square root of a positive semidefinite matrix.
///
/// Eigenvalues in `[-1e-10, 0)` are clamped to zero; anything more negative
/// is rejected.
pub fn matrix_sqrt_psd(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = hermitian_eigensystem(m)?;
    if eig.min() < -PSD_CLAMP_TOL {
        return Err(Error::NotPositive {
            min_eigenvalue: eig.min(),
        });
    }
    Ok(eig.map_spectrum(|x| x.max(0.0).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmath::matrix::{Pauli, ONE};

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < tol)
    }

    #[test]
    fn sigma_z_spectrum() {
        let eig = hermitian_eigensystem(&Pauli::Z.matrix()).unwrap();
        assert!(close(&eig.values, &[-1.0, 1.0], 1e-14));
        assert!(eig.vectors[0].overlap(&Ket::basis(2, 1)) > 1.0 - 1e-14);
        assert!(eig.vectors[1].overlap(&Ket::basis(2, 0)) > 1.0 - 1e-14);
    }

    #[test]
    fn sigma_x_and_y_spectra() {
        for p in [Pauli::X, Pauli::Y] {
            let vals = eigenvalues(&p.matrix()).unwrap();
            assert!(close(&vals, &[-1.0, 1.0], 1e-14), "{p:?}");
        }
    }

    #[test]
    fn partial_transpose_of_bell_state() {
        // Partial transpose of |φ+⟩⟨φ+| is SWAP/2.
        let mut swap_half = ComplexMatrix::zeros(4);
        for (r, c) in [(0, 0), (1, 2), (2, 1), (3, 3)] {
            swap_half[(r, c)] = ONE * 0.5;
        }
        let vals = eigenvalues(&swap_half).unwrap();
        assert!(close(&vals, &[-0.5, 0.5, 0.5, 0.5], 1e-13));
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut m = ComplexMatrix::identity(2);
        m[(0, 1)] = ONE;
        assert!(matches!(
            hermitian_eigensystem(&m),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn sqrt_examples() {
        let id = ComplexMatrix::identity(3);
        assert!(matrix_sqrt_psd(&id).unwrap().max_abs_diff(&id) < 1e-14);
        let d = ComplexMatrix::from_diagonal(&[4.0, 9.0]).unwrap();
        let r = matrix_sqrt_psd(&d).unwrap();
        assert!(r.max_abs_diff(&ComplexMatrix::from_diagonal(&[2.0, 3.0]).unwrap()) < 1e-14);
        // I/2 + σx/4
        let m = &ComplexMatrix::identity(2).scale(0.5) + &Pauli::X.matrix().scale(0.25);
        let r = matrix_sqrt_psd(&m).unwrap();
        assert!((&r * &r).max_abs_diff(&m) < 1e-14);
        assert!(r.is_hermitian(1e-15));
    }

    #[test]
    fn sqrt_clamps_tiny_negative() {
        let m = ComplexMatrix::from_diagonal(&[1.0, -5e-11]).unwrap();
        let r = matrix_sqrt_psd(&m).unwrap();
        assert_eq!(r[(1, 1)].re, 0.0);
        let bad = ComplexMatrix::from_diagonal(&[1.0, -1e-6]).unwrap();
        assert!(matches!(
            matrix_sqrt_psd(&bad),
            Err(Error::NotPositive { .. })
        ));
    }

    #[test]
    fn degenerate_spectrum_has_orthonormal_vectors() {
        let m = ComplexMatrix::identity(4);
        let eig = hermitian_eigensystem(&m).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((eig.vectors[i].inner(&eig.vectors[j]).norm() - expected).abs() < 1e-12);
            }
        }
    }
}
