//! Dense complex linear algebra used by the precoder designs and rate formulas.
//!
//! Decompositions are delegated to `nalgebra`; this module pins down the
//! conventions the simulator relies on: descending singular values, a
//! deterministic column phase, SVD-based null spaces with a relative rank
//! threshold, and Hermitian inverse square roots / log-determinants.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;

/// Singular value decomposition `A = U diag(s) V*` with `s` descending.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: ComplexMatrix,
    pub singular_values: Vec<f64>,
    pub v: ComplexMatrix,
}

pub fn ensure_finite(a: &ComplexMatrix) -> Result<()> {
    if a.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

/// Builds a real diagonal matrix as a complex one.
pub fn diag(values: &[f64]) -> ComplexMatrix {
    ComplexMatrix::from_diagonal(&DVector::from_iterator(
        values.len(),
        values.iter().map(|&x| Complex64::new(x, 0.0)),
    ))
}

/// Largest absolute entry.
pub fn max_abs(a: &ComplexMatrix) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Rotates every column so its first non-negligible entry is real and
/// nonnegative; the same phase is applied to the paired column of `partner`.
fn normalize_column_phases(v: &mut ComplexMatrix, mut partner: Option<&mut ComplexMatrix>) {
    for j in 0..v.ncols() {
        let col_max = (0..v.nrows()).map(|i| v[(i, j)].norm()).fold(0.0, f64::max);
        if col_max == 0.0 {
            continue;
        }
        let Some(pivot) = (0..v.nrows()).find(|&i| v[(i, j)].norm() > 1e-12 * col_max) else {
            continue;
        };
        let entry = v[(pivot, j)];
        let phase = entry / entry.norm();
        let rot = phase.conj();
        v.column_mut(j).iter_mut().for_each(|z| *z *= rot);
        if let Some(p) = partner.as_deref_mut() {
            if j < p.ncols() {
                p.column_mut(j).iter_mut().for_each(|z| *z *= rot);
            }
        }
    }
}

/// Thin SVD with singular values sorted descending. `U` is `rows x r`, `V` is
/// `cols x r` with `r = min(rows, cols)`.
pub fn svd_ordered(a: &ComplexMatrix) -> Result<Svd> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Err(Error::EmptyMatrix);
    }
    ensure_finite(a)?;
    let svd = a
        .clone()
        .try_svd(true, true, f64::EPSILON, 0)
        .ok_or(Error::DecompositionFailed)?;
    let (u, v_t) = match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => return Err(Error::DecompositionFailed),
    };
    let s = svd.singular_values;

    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&i, &j| s[j].total_cmp(&s[i]));

    let r = order.len();
    let mut u_sorted = ComplexMatrix::zeros(a.nrows(), r);
    let mut v_sorted = ComplexMatrix::zeros(a.ncols(), r);
    let mut singular_values = Vec::with_capacity(r);
    for (dst, &src) in order.iter().enumerate() {
        u_sorted.set_column(dst, &u.column(src));
        v_sorted.set_column(dst, &v_t.row(src).adjoint());
        singular_values.push(s[src]);
    }
    normalize_column_phases(&mut v_sorted, Some(&mut u_sorted));
    if !singular_values.iter().all(|x| x.is_finite()) {
        return Err(Error::DecompositionFailed);
    }
    Ok(Svd {
        u: u_sorted,
        singular_values,
        v: v_sorted,
    })
}

/// Numerical rank threshold `max(rows, cols) * eps * s_max`.
pub fn rank_tolerance(rows: usize, cols: usize, s_max: f64) -> f64 {
    rows.max(cols) as f64 * f64::EPSILON * s_max
}

/// Orthonormal basis of `dim` directions in the null space of `a`, taken as
/// the right singular vectors of the `dim` smallest singular values.
pub fn null_space_basis(a: &ComplexMatrix, dim: usize) -> Result<ComplexMatrix> {
    let (rows, cols) = a.shape();
    if rows == 0 || cols == 0 {
        return Err(Error::EmptyMatrix);
    }
    // Zero-padding a wide matrix to square makes the thin SVD return a full V.
    let padded = if rows < cols {
        let mut p = ComplexMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (rows, cols)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = svd_ordered(&padded)?;
    let s_max = svd.singular_values.first().copied().unwrap_or(0.0);
    let tol = rank_tolerance(rows, cols, s_max);
    let rank = svd.singular_values.iter().filter(|&&s| s > tol).count();
    let nullity = cols - rank;
    if dim == 0 || dim > nullity {
        return Err(Error::NullSpaceEmpty {
            requested: dim,
            nullity,
        });
    }
    let mut q = svd.v.columns(cols - dim, dim).into_owned();
    normalize_column_phases(&mut q, None);
    Ok(q)
}

fn hermitian_part(w: &ComplexMatrix) -> ComplexMatrix {
    (w + w.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Inverse square root `W^{-1/2}` of a Hermitian positive definite matrix.
pub fn inv_sqrt_hpd(w: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !w.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "expected a square matrix, got {}x{}",
            w.nrows(),
            w.ncols()
        )));
    }
    if w.is_empty() {
        return Err(Error::EmptyMatrix);
    }
    ensure_finite(w)?;
    let eig = hermitian_part(w).symmetric_eigen();
    let min_eigenvalue = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if min_eigenvalue.is_nan() || min_eigenvalue <= 0.0 {
        return Err(Error::NotPositiveDefinite { min_eigenvalue });
    }
    let scale = eig.eigenvalues.map(|l| Complex64::new(l.sqrt().recip(), 0.0));
    let v = &eig.eigenvectors;
    Ok(v * ComplexMatrix::from_diagonal(&scale) * v.adjoint())
}

/// `log2 det(A)` of a Hermitian positive definite matrix via Cholesky.
pub fn logdet_hpd(a: &ComplexMatrix) -> Result<f64> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "expected a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    ensure_finite(a)?;
    let h = hermitian_part(a);
    match cholesky_diagonal(&h) {
        Some(d) => Ok(2.0 * d.iter().map(|x| x.log2()).sum::<f64>()),
        None => {
            let min_eigenvalue = h
                .symmetric_eigenvalues()
                .iter()
                .copied()
                .fold(f64::INFINITY, f64::min);
            Err(Error::NotPositiveDefinite { min_eigenvalue })
        }
    }
}

/// Diagonal of the Cholesky factor of a Hermitian matrix, or `None` when a
/// pivot is not strictly positive.
fn cholesky_diagonal(h: &ComplexMatrix) -> Option<Vec<f64>> {
    let n = h.nrows();
    let mut l = ComplexMatrix::zeros(n, n);
    let mut diag = Vec::with_capacity(n);
    for j in 0..n {
        let pivot = h[(j, j)].re - (0..j).map(|k| l[(j, k)].norm_sqr()).sum::<f64>();
        if pivot.is_nan() || pivot <= 0.0 {
            return None;
        }
        let d = pivot.sqrt();
        l[(j, j)] = Complex64::new(d, 0.0);
        diag.push(d);
        for i in j + 1..n {
            let dot: Complex64 = (0..j).map(|k| l[(i, k)] * l[(j, k)].conj()).sum();
            l[(i, j)] = (h[(i, j)] - dot) / d;
        }
    }
    Some(diag)
}


#[cfg(test)]
mod tests {
    use super::test_util::*;
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn reconstruct(svd: &Svd) -> ComplexMatrix {
        &svd.u * diag(&svd.singular_values) * svd.v.adjoint()
    }

    #[test]
    fn svd_of_identity() {
        let svd = svd_ordered(&identity(2)).unwrap();
        assert!((svd.singular_values[0] - 1.0).abs() < 1e-14);
        assert!((svd.singular_values[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn svd_of_diagonal_is_sorted() {
        let a = diag(&[1.0, 3.0]);
        let svd = svd_ordered(&a).unwrap();
        assert!((svd.singular_values[0] - 3.0).abs() < 1e-14);
        assert!((svd.singular_values[1] - 1.0).abs() < 1e-14);
        // columns are unit-phase permutations of the identity
        assert!((svd.v[(1, 0)] - c(1.0)).norm() < 1e-14);
        assert!((svd.u[(1, 0)] - c(1.0)).norm() < 1e-14);
        assert!(max_abs(&(reconstruct(&svd) - a)) < 1e-14);
    }

    #[test]
    fn svd_reconstructs_all_used_shapes() {
        let mut rng = rng(7);
        let shapes = [(3, 4), (3, 3), (2, 3), (3, 2), (4, 4), (3, 6), (2, 2), (1, 4)];
        for _ in 0..1000 / shapes.len() + 1 {
            for &(r, cols) in &shapes {
                let a = random_matrix(&mut rng, r, cols);
                let svd = svd_ordered(&a).unwrap();
                let err = max_abs(&(reconstruct(&svd) - &a));
                assert!(err < 1e-10 * max_abs(&a).max(1.0), "{r}x{cols}: {err}");
                assert!(svd.singular_values.windows(2).all(|w| w[0] >= w[1]));
                let k = svd.singular_values.len();
                assert!(max_abs(&(svd.u.adjoint() * &svd.u - identity(k))) < 1e-12);
                assert!(max_abs(&(svd.v.adjoint() * &svd.v - identity(k))) < 1e-12);
            }
        }
    }

    #[test]
    fn svd_rejects_non_finite() {
        let mut a = identity(2);
        a[(0, 1)] = Complex64::new(f64::NAN, 0.0);
        assert_eq!(svd_ordered(&a).unwrap_err(), Error::NonFinite);
        assert_eq!(
            svd_ordered(&ComplexMatrix::zeros(0, 3)).unwrap_err(),
            Error::EmptyMatrix
        );
    }

    #[test]
    fn null_space_of_row_vector() {
        let a = ComplexMatrix::from_row_slice(1, 2, &[c(1.0), c(0.0)]);
        let q = null_space_basis(&a, 1).unwrap();
        assert_eq!(q.shape(), (2, 1));
        assert!(q[(0, 0)].norm() < 1e-14);
        assert!((q[(1, 0)] - c(1.0)).norm() < 1e-14);
    }

    #[test]
    fn null_space_residual_and_orthonormality() {
        let mut rng = rng(11);
        for _ in 0..1000 {
            let a = random_matrix(&mut rng, 3, 4);
            let q = null_space_basis(&a, 1).unwrap();
            assert!(max_abs(&(&a * &q)) < 1e-10 * max_abs(&a));
            assert!(max_abs(&(q.adjoint() * &q - identity(1))) < 1e-10);
        }
        for _ in 0..200 {
            let a = random_matrix(&mut rng, 2, 5);
            let q = null_space_basis(&a, 3).unwrap();
            assert!(max_abs(&(&a * &q)) < 1e-10 * max_abs(&a));
            assert!(max_abs(&(q.adjoint() * &q - identity(3))) < 1e-10);
        }
    }

    #[test]
    fn null_space_empty_for_square_full_rank() {
        let a = random_matrix(&mut rng(3), 3, 3);
        assert_eq!(
            null_space_basis(&a, 1).unwrap_err(),
            Error::NullSpaceEmpty {
                requested: 1,
                nullity: 0
            }
        );
    }

    #[test]
    fn null_space_of_rank_deficient_matrix() {
        let mut rng = rng(5);
        let mut a = random_matrix(&mut rng, 3, 4);
        a.row_mut(2).fill(c(0.0));
        let q = null_space_basis(&a, 2).unwrap();
        assert!(max_abs(&(&a * &q)) < 1e-10 * max_abs(&a));
        assert!(matches!(
            null_space_basis(&a, 3),
            Err(Error::NullSpaceEmpty { nullity: 2, .. })
        ));
    }

    #[test]
    fn inv_sqrt_of_scaled_identity_and_diagonal() {
        let s = inv_sqrt_hpd(&(identity(2) * c(4.0))).unwrap();
        assert!(max_abs(&(s - identity(2) * c(0.5))) < 1e-14);
        let s = inv_sqrt_hpd(&diag(&[1.0, 9.0])).unwrap();
        assert!(max_abs(&(s - diag(&[1.0, 1.0 / 3.0]))) < 1e-14);
    }

    #[test]
    fn inv_sqrt_whitens_random_hpd() {
        let mut rng = rng(13);
        for _ in 0..1000 {
            let w = random_hpd(&mut rng, 3);
            let s = inv_sqrt_hpd(&w).unwrap();
            assert!(max_abs(&(&s * &w * s.adjoint() - identity(3))) < 1e-9);
        }
    }

    #[test]
    fn inv_sqrt_rejects_indefinite() {
        let err = inv_sqrt_hpd(&diag(&[1.0, -2.0])).unwrap_err();
        assert!(matches!(err, Error::NotPositiveDefinite { min_eigenvalue } if min_eigenvalue < 0.0));
        assert!(inv_sqrt_hpd(&diag(&[1.0, 0.0])).is_err());
    }

    #[test]
    fn logdet_small_cases() {
        assert!(logdet_hpd(&identity(3)).unwrap().abs() < 1e-15);
        assert!((logdet_hpd(&diag(&[2.0, 2.0])).unwrap() - 2.0).abs() < 1e-14);
        assert!(logdet_hpd(&diag(&[1.0, -1.0])).is_err());
    }

    #[test]
    fn logdet_matches_eigenvalue_oracle() {
        let mut rng = rng(17);
        for _ in 0..500 {
            let a = random_hpd(&mut rng, 3);
            let oracle: f64 = a.symmetric_eigenvalues().iter().map(|l| l.log2()).sum();
            assert!((logdet_hpd(&a).unwrap() - oracle).abs() < 1e-9);
        }
    }

    #[test]
    fn logdet_is_additive_for_commuting_pairs() {
        let mut rng = rng(19);
        use rand::Rng;
        for _ in 0..200 {
            let x: Vec<f64> = (0..4).map(|_| rng.random_range(0.1..10.0)).collect();
            let y: Vec<f64> = (0..4).map(|_| rng.random_range(0.1..10.0)).collect();
            let (a, b) = (diag(&x), diag(&y));
            let lhs = logdet_hpd(&(&a * &b)).unwrap();
            let rhs = logdet_hpd(&a).unwrap() + logdet_hpd(&b).unwrap();
            assert!((lhs - rhs).abs() < 1e-9);
        }
    }
}
