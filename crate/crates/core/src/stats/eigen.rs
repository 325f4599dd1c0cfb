//! Symmetric eigendecomposition by cyclic Jacobi rotations.
//!
//! Robust and simple for the small matrices this crate works with
//! (covariances of a handful of memory features). Eigenvalues come back
//! sorted descending with orthonormal eigenvectors as matrix columns.

use crate::error::{Error, Result};
use crate::stats::matrix::Matrix;

const SYMMETRY_TOL: f64 = 1e-9;
const OFF_DIAG_TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 100;

/// Decomposes a symmetric matrix into `(eigenvalues, eigenvectors)`.
///
/// Eigenvalues are sorted descending; eigenvector `j` is column `j` of the
/// returned matrix. Each column is sign-normalized so its largest-magnitude
/// entry is positive, which keeps repeated runs byte-reproducible.
#[allow(clippy::needless_range_loop)]
pub fn eigendecompose_symmetric(m: &Matrix) -> Result<(Vec<f64>, Matrix)> {
    let n = m.rows();
    if n != m.cols() {
        return Err(Error::InvalidParameter(format!(
            "eigendecomposition requires a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let scale = m.max_abs().max(1.0);
    for i in 0..n {
        for j in (i + 1)..n {
            let delta = (m.get(i, j) - m.get(j, i)).abs();
            if delta > SYMMETRY_TOL * scale {
                return Err(Error::NotSymmetric {
                    row: i,
                    col: j,
                    delta,
                });
            }
        }
    }
    if n == 0 {
        return Ok((Vec::new(), Matrix::zeros(0, 0)));
    }

    let mut a = m.clone();
    // Work on the symmetrized copy so tiny asymmetries within tolerance
    // cannot bias the rotations.
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (a.get(i, j) + a.get(j, i));
            a.set(i, j, avg);
            a.set(j, i, avg);
        }
    }
    let mut v = Matrix::identity(n);

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0_f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a.get(p, q).abs();
            }
        }
        if off <= OFF_DIAG_TOL * scale {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a.get(p, q);
                if apq == 0.0 {
                    continue;
                }
                let app = a.get(p, p);
                let aqq = a.get(q, q);
                let theta = 0.5 * (aqq - app) / apq;
                // smaller-magnitude root of t² + 2tθ − 1 = 0 for stability
                let t = if theta.abs() > 1e12 {
                    0.5 / theta
                } else {
                    let sign = if theta >= 0.0 { 1.0 } else { -1.0 };
                    sign / (theta.abs() + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                for k in 0..n {
                    let akp = a.get(k, p);
                    let akq = a.get(k, q);
                    a.set(k, p, c * akp - s * akq);
                    a.set(k, q, s * akp + c * akq);
                }
                for k in 0..n {
                    let apk = a.get(p, k);
                    let aqk = a.get(q, k);
                    a.set(p, k, c * apk - s * aqk);
                    a.set(q, k, s * apk + c * aqk);
                }
                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
    }
    if !converged {
        return Err(Error::NoConvergence {
            what: "jacobi eigendecomposition",
            iterations: MAX_SWEEPS,
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a.get(i, i)).collect();
    order.sort_by(|&i, &j| diag[j].partial_cmp(&diag[i]).unwrap());

    let mut latents = Vec::with_capacity(n);
    let mut vectors = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        latents.push(diag[src]);
        // sign convention: largest-|entry| of the column made positive
        let mut pivot = 0;
        let mut best = 0.0_f64;
        for k in 0..n {
            let mag = v.get(k, src).abs();
            if mag > best {
                best = mag;
                pivot = k;
            }
        }
        let flip = if v.get(pivot, src) < 0.0 { -1.0 } else { 1.0 };
        for k in 0..n {
            vectors.set(k, dst, flip * v.get(k, src));
        }
    }
    Ok((latents, vectors))
}

#[cfg(test)]
#[allow(clippy::needless_range_loop)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn eigen_residual(m: &Matrix, latents: &[f64], vectors: &Matrix) -> f64 {
        let n = m.rows();
        let mut worst = 0.0_f64;
        for j in 0..n {
            for i in 0..n {
                let mut mv = 0.0;
                for k in 0..n {
                    mv += m.get(i, k) * vectors.get(k, j);
                }
                worst = worst.max((mv - latents[j] * vectors.get(i, j)).abs());
            }
        }
        worst
    }

    fn orthonormality_defect(vectors: &Matrix) -> f64 {
        let n = vectors.rows();
        let mut worst = 0.0_f64;
        for a in 0..n {
            for b in 0..n {
                let dot: f64 = (0..n).map(|k| vectors.get(k, a) * vectors.get(k, b)).sum();
                let expect = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((dot - expect).abs());
            }
        }
        worst
    }

    #[test]
    fn identity_has_unit_eigenvalues() {
        let (latents, vectors) = eigendecompose_symmetric(&Matrix::identity(3)).unwrap();
        assert_eq!(latents, vec![1.0, 1.0, 1.0]);
        assert!(orthonormality_defect(&vectors) < 1e-12);
    }

    #[test]
    fn diagonal_matrix_sorts_descending() {
        let m = Matrix::from_rows(&[
            vec![5.0, 0.0, 0.0],
            vec![0.0, 2.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ])
        .unwrap();
        let (latents, vectors) = eigendecompose_symmetric(&m).unwrap();
        assert_eq!(latents, vec![5.0, 2.0, 1.0]);
        // permuted identity columns, sign-normalized positive
        for j in 0..3 {
            let col = vectors.column(j);
            let ones: Vec<usize> = col
                .iter()
                .enumerate()
                .filter(|(_, &v)| (v - 1.0).abs() < 1e-12)
                .map(|(i, _)| i)
                .collect();
            assert_eq!(ones.len(), 1);
            assert_eq!(ones[0], j);
        }
    }

    #[test]
    fn known_2x2_eigenvalues() {
        // [[2,1],[1,2]] has eigenvalues 3 and 1
        let m = Matrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let (latents, vectors) = eigendecompose_symmetric(&m).unwrap();
        assert!((latents[0] - 3.0).abs() < 1e-12);
        assert!((latents[1] - 1.0).abs() < 1e-12);
        assert!(eigen_residual(&m, &latents, &vectors) < 1e-12);
    }

    #[test]
    fn random_symmetric_satisfies_eigen_equation() {
        let mut rng = ChaCha8Rng::seed_from_u64(72_026);
        for _ in 0..20 {
            let n = 5;
            let mut m = Matrix::zeros(n, n);
            for i in 0..n {
                for j in i..n {
                    let v: f64 = rng.random_range(-10.0..10.0);
                    m.set(i, j, v);
                    m.set(j, i, v);
                }
            }
            let (latents, vectors) = eigendecompose_symmetric(&m).unwrap();
            assert!(eigen_residual(&m, &latents, &vectors) < 1e-8);
            assert!(orthonormality_defect(&vectors) < 1e-9);
            for w in latents.windows(2) {
                assert!(w[0] >= w[1]);
            }
        }
    }

    #[test]
    fn asymmetric_input_is_rejected() {
        let m = Matrix::from_rows(&[vec![1.0, 2.0], vec![0.5, 1.0]]).unwrap();
        let err = eigendecompose_symmetric(&m).unwrap_err();
        assert!(matches!(err, Error::NotSymmetric { .. }));
    }

    #[test]
    fn one_by_one_matrix() {
        let m = Matrix::from_rows(&[vec![4.2]]).unwrap();
        let (latents, vectors) = eigendecompose_symmetric(&m).unwrap();
        assert_eq!(latents, vec![4.2]);
        assert_eq!(vectors.get(0, 0), 1.0);
    }
}
