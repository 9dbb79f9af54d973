//! Cyclic Jacobi eigensolver for small dense symmetric matrices.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::{Error, Result};

const MAX_SWEEPS: usize = 100;

/// Eigen-decomposition `A = V diag(w) Vᵀ`, eigenvalues ascending, eigenvectors
/// as columns of `V` in matching order.
#[derive(Clone, Debug)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

fn off_diagonal_norm(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)] * a[(i, j)];
            }
        }
    }
    s.sqrt()
}

pub fn jacobi_eigen(input: &DMatrix<f64>) -> Result<SymmetricEigen> {
    let n = input.nrows();
    if n != input.ncols() {
        return Err(Error::Eigen(format!("matrix is {}x{}, not square", n, input.ncols())));
    }
    let scale = input.norm();
    for i in 0..n {
        for j in 0..i {
            if (input[(i, j)] - input[(j, i)]).abs() > 1e-12 * scale.max(f64::MIN_POSITIVE) {
                return Err(Error::Eigen(format!("matrix is not symmetric at ({i}, {j})")));
            }
        }
    }
    if input.iter().any(|x| !x.is_finite()) {
        return Err(Error::Eigen("matrix has non-finite entries".into()));
    }

    let mut a = input.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    let threshold = 1e-14 * scale;
    let mut converged = off_diagonal_norm(&a) <= threshold;
    let mut sweep = 0;
    while !converged && sweep < MAX_SWEEPS {
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
        sweep += 1;
        converged = off_diagonal_norm(&a) <= threshold;
    }
    if !converged {
        return Err(Error::Eigen(format!("Jacobi did not converge in {MAX_SWEEPS} sweeps")));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(SymmetricEigen { values, vectors })
}

/// Flips each column so its first entry above `tol` in magnitude is positive.
pub fn fix_column_signs(v: &mut DMatrix<f64>, tol: f64) {
    for c in 0..v.ncols() {
        let lead = v.column(c).iter().copied().find(|x| x.abs() > tol);
        if matches!(lead, Some(x) if x < 0.0) {
            v.column_mut(c).neg_mut();
        }
    }
}

/// Eigenvalues of a Hermitian matrix, ascending, via the real symmetric
/// embedding `[[Re, −Im], [Im, Re]]` whose spectrum is each eigenvalue twice.
pub fn hermitian_eigenvalues(m: &[Vec<Complex64>]) -> Result<Vec<f64>> {
    let n = m.len();
    let big = DMatrix::from_fn(2 * n, 2 * n, |r, c| {
        let z = m[r % n][c % n];
        match (r < n, c < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    });
    let eig = jacobi_eigen(&big)?;
    Ok(eig.values.chunks(2).map(|p| 0.5 * (p[0] + p[1])).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_symmetric(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
        let m = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        (&m + m.transpose()) * 0.5
    }

    #[test]
    fn two_by_two() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let e = jacobi_eigen(&a).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-15);
        assert!((e.values[1] - 3.0).abs() < 1e-15);
    }

    #[test]
    fn diagonal_input_untouched() {
        let a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![3.0, -1.0, 2.0]));
        let e = jacobi_eigen(&a).unwrap();
        assert_eq!(e.values, vec![-1.0, 2.0, 3.0]);
    }

    #[test]
    fn rejects_non_symmetric() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        assert!(matches!(jacobi_eigen(&a), Err(Error::Eigen(_))));
    }

    #[test]
    fn agrees_with_nalgebra_on_random_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [1, 3, 8, 33, 64] {
            let a = random_symmetric(n, &mut rng);
            let e = jacobi_eigen(&a).unwrap();
            let mut reference: Vec<f64> = a.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
            reference.sort_by(f64::total_cmp);
            for (x, y) in e.values.iter().zip(&reference) {
                assert!((x - y).abs() < 1e-12, "n={n}");
            }
            let vt_v = e.vectors.transpose() * &e.vectors;
            assert!((vt_v - DMatrix::identity(n, n)).norm() < 1e-12);
            let recon = &e.vectors * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(e.values.clone())) * e.vectors.transpose();
            assert!((recon - a).norm() < 1e-12);
        }
    }

    #[test]
    fn sign_fixing() {
        let mut v = DMatrix::from_row_slice(2, 2, &[0.0, -0.6, -1.0, 0.8]);
        fix_column_signs(&mut v, 1e-12);
        assert_eq!(v[(1, 0)], 1.0);
        assert_eq!(v[(0, 1)], 0.6);
    }

    #[test]
    fn hermitian_embedding() {
        // σ_y has eigenvalues ±1
        let i = Complex64::i();
        let z = Complex64::new(0.0, 0.0);
        let m = vec![vec![z, -i], vec![i, z]];
        let w = hermitian_eigenvalues(&m).unwrap();
        assert!((w[0] + 1.0).abs() < 1e-14 && (w[1] - 1.0).abs() < 1e-14);
    }
}
