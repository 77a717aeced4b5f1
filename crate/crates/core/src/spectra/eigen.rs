//! Cyclic Jacobi eigensolver for small Hermitian matrices.

use num_complex::Complex64;

use super::matrix::{ComplexMatrix, HermitianOperator};
use super::SpectraError;

/// Off-diagonal Frobenius norm (relative to the full norm) at which a sweep stops.
pub const JACOBI_TOL: f64 = 1e-14;
pub const JACOBI_MAX_SWEEPS: usize = 100;

/// Eigenvalues in ascending order with matching orthonormal eigenvector columns.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    eigenvectors: ComplexMatrix,
}

impl SpectralDecomposition {
    /// Assembles a decomposition from parts. Column `k` of `eigenvectors`
    /// belongs to `eigenvalues[k]`; no ordering is imposed.
    pub fn from_parts(
        eigenvalues: Vec<f64>,
        eigenvectors: ComplexMatrix,
    ) -> Result<Self, SpectraError> {
        if !eigenvectors.is_square() || eigenvectors.cols() != eigenvalues.len() {
            return Err(SpectraError::DimensionMismatch {
                expected: eigenvalues.len(),
                found: eigenvectors.cols(),
            });
        }
        Ok(Self {
            eigenvalues,
            eigenvectors,
        })
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &ComplexMatrix {
        &self.eigenvectors
    }

    pub fn eigenvector(&self, k: usize) -> Vec<Complex64> {
        self.eigenvectors.column(k)
    }

    /// Reorders branches so that new branch `k` is old branch `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let n = self.dim();
        assert_eq!(perm.len(), n, "permutation length");
        let mut vecs = ComplexMatrix::zeros(n, n);
        for (new, &old) in perm.iter().enumerate() {
            for i in 0..n {
                vecs[(i, new)] = self.eigenvectors[(i, old)];
            }
        }
        Self {
            eigenvalues: perm.iter().map(|&k| self.eigenvalues[k]).collect(),
            eigenvectors: vecs,
        }
    }

    /// `V diag(lambda) V^dagger`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.dim();
        let mut out = ComplexMatrix::zeros(n, n);
        for (k, &lam) in self.eigenvalues.iter().enumerate() {
            for i in 0..n {
                let vik = self.eigenvectors[(i, k)] * lam;
                for j in 0..n {
                    out[(i, j)] += vik * self.eigenvectors[(j, k)].conj();
                }
            }
        }
        out
    }

    /// `max |V^dagger V - I|`.
    pub fn orthonormality_defect(&self) -> f64 {
        let gram = &self.eigenvectors.adjoint() * &self.eigenvectors;
        gram.max_abs_diff(&ComplexMatrix::identity(self.dim()))
    }
}

fn off_diagonal_norm(a: &ComplexMatrix) -> f64 {
    let n = a.rows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += a[(i, j)].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

/// Diagonalizes a Hermitian operator with cyclic Jacobi rotations.
///
/// Eigenvalues come back ascending; equal eigenvalues keep the order in which
/// the rotations left them. Each eigenvector is phased so that its first
/// non-negligible component is real and positive, which makes the output a
/// deterministic function of the input.
pub fn eig_hermitian(op: &HermitianOperator) -> Result<SpectralDecomposition, SpectraError> {
    let mut a = op.matrix().clone();
    let n = a.rows();
    let mut v = ComplexMatrix::identity(n);
    let scale = a.frobenius_norm().max(f64::MIN_POSITIVE);

    let mut sweeps = 0;
    loop {
        let off = off_diagonal_norm(&a);
        if off <= JACOBI_TOL * scale {
            break;
        }
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(SpectraError::NoConvergence {
                sweeps,
                off_diagonal: off,
            });
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
        sweeps += 1;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));

    let mut vecs = ComplexMatrix::zeros(n, n);
    for (new, &old) in order.iter().enumerate() {
        let col = v.column(old);
        let pivot = col
            .iter()
            .find(|z| z.norm() > 1e-8)
            .copied()
            .unwrap_or(Complex64::new(1.0, 0.0));
        let phase = pivot.conj() / pivot.norm();
        for (i, z) in col.iter().enumerate() {
            vecs[(i, new)] = z * phase;
        }
    }
    SpectralDecomposition::from_parts(order.iter().map(|&k| a[(k, k)].re).collect(), vecs)
}

/// One complex Jacobi rotation zeroing `a[p][q]`: `a <- J^dagger a J`, `v <- v J`.
fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let mag = apq.norm();
    if mag == 0.0 {
        return;
    }
    // phase e^{-i phi} makes the (p, q) entry real, then a real rotation
    let phase = apq.conj() / mag;
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let tau = (aqq - app) / (2.0 * mag);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    // J restricted to (p, q): [[c, s], [-s e^{-i phi}, c e^{-i phi}]]
    let j_pp = Complex64::new(c, 0.0);
    let j_pq = Complex64::new(s, 0.0);
    let j_qp = phase * (-s);
    let j_qq = phase * c;

    let n = a.rows();
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * j_pp + akq * j_qp;
        a[(k, q)] = akp * j_pq + akq * j_qq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = j_pp.conj() * apk + j_qp.conj() * aqk;
        a[(q, k)] = j_pq.conj() * apk + j_qq.conj() * aqk;
    }
    a[(p, q)] = Complex64::new(0.0, 0.0);
    a[(q, p)] = Complex64::new(0.0, 0.0);
    a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * j_pp + vkq * j_qp;
        v[(k, q)] = vkp * j_pq + vkq * j_qq;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn herm(rows: &[&[f64]]) -> HermitianOperator {
        HermitianOperator::new(ComplexMatrix::from_real_rows(rows).unwrap()).unwrap()
    }

    #[test]
    fn diagonal_input_sorted_with_standard_basis() {
        let dec = eig_hermitian(&herm(&[&[0.73, 0.0], &[0.0, 0.27]])).unwrap();
        assert_eq!(dec.eigenvalues(), &[0.27, 0.73]);
        assert_eq!(
            dec.eigenvector(0),
            vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]
        );
        assert_eq!(
            dec.eigenvector(1),
            vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]
        );
    }

    #[test]
    fn plus_projector_has_spectrum_zero_one() {
        let dec = eig_hermitian(&herm(&[&[0.5, 0.5], &[0.5, 0.5]])).unwrap();
        assert!(dec.eigenvalues()[0].abs() < 1e-15);
        assert!((dec.eigenvalues()[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn complex_entries() {
        // [[2, i], [-i, 2]] has eigenvalues 1 and 3
        let mut m = ComplexMatrix::identity(2).scale(2.0);
        m[(0, 1)] = Complex64::new(0.0, 1.0);
        m[(1, 0)] = Complex64::new(0.0, -1.0);
        let h = HermitianOperator::new(m.clone()).unwrap();
        let dec = eig_hermitian(&h).unwrap();
        assert!((dec.eigenvalues()[0] - 1.0).abs() < 1e-14);
        assert!((dec.eigenvalues()[1] - 3.0).abs() < 1e-14);
        assert!(dec.reconstruct().max_abs_diff(&m) < 1e-14);
    }

    #[test]
    fn repeated_eigenvalues_keep_solver_order() {
        let dec = eig_hermitian(&HermitianOperator::from_real_diagonal(&[0.5, 0.5, 0.1])).unwrap();
        assert_eq!(dec.eigenvalues(), &[0.1, 0.5, 0.5]);
        assert_eq!(dec.eigenvector(1)[0], Complex64::new(1.0, 0.0));
        assert_eq!(dec.eigenvector(2)[1], Complex64::new(1.0, 0.0));
    }

    #[test]
    fn deterministic() {
        let h = herm(&[&[0.3, 0.1, 0.2], &[0.1, 0.5, -0.4], &[0.2, -0.4, 0.2]]);
        assert_eq!(eig_hermitian(&h).unwrap(), eig_hermitian(&h).unwrap());
    }

    fn random_hermitian(dim: usize, entries: &[(f64, f64)]) -> HermitianOperator {
        let mut m = ComplexMatrix::zeros(dim, dim);
        let mut it = entries.iter();
        for i in 0..dim {
            let &(d, _) = it.next().unwrap();
            m[(i, i)] = Complex64::new(d, 0.0);
            for j in (i + 1)..dim {
                let &(re, im) = it.next().unwrap();
                m[(i, j)] = Complex64::new(re, im);
                m[(j, i)] = Complex64::new(re, -im);
            }
        }
        HermitianOperator::new(m).unwrap()
    }

    proptest! {
        #[test]
        fn reconstruction_and_orthonormality(
            dim in 1usize..=8,
            entries in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 36),
        ) {
            let h = random_hermitian(dim, &entries);
            let dec = eig_hermitian(&h).unwrap();
            prop_assert!(dec.reconstruct().max_abs_diff(h.matrix()) <= 1e-10);
            prop_assert!(dec.orthonormality_defect() <= 1e-10);
            prop_assert!(dec.eigenvalues().windows(2).all(|w| w[0] <= w[1]));
            let sum: f64 = dec.eigenvalues().iter().sum();
            prop_assert!((sum - h.trace()).abs() <= 1e-10);
        }
    }
}
