//! Small dense complex linear algebra on top of `nalgebra`.

use nalgebra::DMatrix;

use crate::{Error, Result, C64};

pub type CMatrix = DMatrix<C64>;

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let sym = hermitian_part(m);
    let mut ev: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// `(M + M*) / 2`.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

/// Ratio of extreme eigenvalues of a Hermitian PSD matrix; infinite when the
/// smallest one is not positive.
pub fn hermitian_condition(m: &CMatrix) -> f64 {
    let ev = hermitian_eigenvalues(m);
    match (ev.first(), ev.last()) {
        (Some(&lo), Some(&hi)) if lo > 0.0 => hi / lo,
        _ => f64::INFINITY,
    }
}

/// Result of a diagonally pivoted Cholesky factorization `P G Pᵀ ≈ L L*`
/// restricted to the retained pivots.
#[derive(Debug, Clone)]
pub struct PivotedCholesky {
    /// Retained original indices, in pivot order.
    pub order: Vec<usize>,
    /// Lower-triangular factor on the retained indices.
    pub factor: CMatrix,
    /// Schur-complement diagonal at the time each retained index was pivoted.
    pub pivots: Vec<f64>,
    /// Original indices whose pivot fell below the threshold.
    pub dropped: Vec<usize>,
}

/// Pivoted Cholesky of a Hermitian PSD matrix. Elimination stops once the
/// largest remaining pivot falls below `rel_tol` times the largest diagonal
/// entry; the remaining indices are reported as dropped.
pub fn pivoted_cholesky(g: &CMatrix, rel_tol: f64) -> Result<PivotedCholesky> {
    let n = g.nrows();
    if n != g.ncols() {
        return Err(Error::InvalidInput("Gram matrix must be square".into()));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    let mut diag: Vec<f64> = (0..n).map(|i| g[(i, i)].re).collect();
    let largest = diag.iter().copied().fold(0.0f64, f64::max);
    let threshold = rel_tol * largest;
    // columns of L stored against original row indices
    let mut cols: Vec<Vec<C64>> = Vec::new();
    let mut pivots = Vec::new();

    let mut k = 0;
    while k < n {
        let (best, &dmax) = perm[k..]
            .iter()
            .map(|&i| &diag[i])
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("non-empty");
        if !(dmax > threshold) || dmax <= 0.0 {
            break;
        }
        perm.swap(k, k + best);
        let p = perm[k];
        let lkk = dmax.sqrt();
        let mut col = vec![C64::new(0.0, 0.0); n];
        col[p] = C64::new(lkk, 0.0);
        for &i in &perm[k + 1..] {
            let mut s = g[(i, p)];
            for c in &cols {
                s -= c[i] * c[p].conj();
            }
            let v = s / lkk;
            col[i] = v;
            diag[i] -= v.norm_sqr();
        }
        cols.push(col);
        pivots.push(dmax);
        k += 1;
    }

    if k == 0 {
        return Err(Error::EmptySpace { largest_pivot: largest });
    }
    let order: Vec<usize> = perm[..k].to_vec();
    let factor = CMatrix::from_fn(k, k, |r, c| if c <= r { cols[c][order[r]] } else { C64::new(0.0, 0.0) });
    Ok(PivotedCholesky {
        order,
        factor,
        pivots,
        dropped: perm[k..].to_vec(),
    })
}

/// Inverse of a nonsingular lower-triangular matrix by forward substitution.
pub fn lower_triangular_inverse(l: &CMatrix) -> CMatrix {
    let n = l.nrows();
    let mut inv = CMatrix::zeros(n, n);
    for j in 0..n {
        inv[(j, j)] = C64::new(1.0, 0.0) / l[(j, j)];
        for i in j + 1..n {
            let mut s = C64::new(0.0, 0.0);
            for m in j..i {
                s += l[(i, m)] * inv[(m, j)];
            }
            inv[(i, j)] = -s / l[(i, i)];
        }
    }
    inv
}

/// Solves `A x = b` for Hermitian positive definite `A` via Cholesky.
pub fn hpd_solve(a: &CMatrix, b: &[C64]) -> Option<Vec<C64>> {
    let chol = nalgebra::Cholesky::new(hermitian_part(a))?;
    let rhs = nalgebra::DVector::from_column_slice(b);
    Some(chol.solve(&rhs).iter().copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn real(n: usize, vals: &[f64]) -> CMatrix {
        CMatrix::from_row_slice(n, n, &vals.iter().map(|&v| C64::new(v, 0.0)).collect::<Vec<_>>())
    }

    #[test]
    fn diagonal_gram_gives_inverse_square_roots() {
        let g = real(2, &[PI, 0.0, 0.0, PI / 2.0]);
        let f = pivoted_cholesky(&g, 1e-12).unwrap();
        let c = lower_triangular_inverse(&f.factor);
        assert_eq!(f.order, vec![0, 1]);
        assert!((c[(0, 0)].re - PI.powf(-0.5)).abs() < 1e-15);
        assert!((c[(1, 1)].re - (PI / 2.0).powf(-0.5)).abs() < 1e-15);
        assert!(f.dropped.is_empty());
    }

    #[test]
    fn identity_is_untouched() {
        let g = CMatrix::identity(4, 4);
        let f = pivoted_cholesky(&g, 1e-12).unwrap();
        let c = lower_triangular_inverse(&f.factor);
        assert!((c - CMatrix::identity(4, 4)).norm() < 1e-15);
        assert!(f.dropped.is_empty());
    }

    #[test]
    fn rank_deficient_gram_drops_one() {
        let g = real(2, &[1.0, 1.0, 1.0, 1.0]);
        let f = pivoted_cholesky(&g, 1e-8).unwrap();
        assert_eq!(f.order.len(), 1);
        assert_eq!(f.dropped.len(), 1);
    }

    #[test]
    fn all_below_threshold_is_an_error() {
        let g = CMatrix::zeros(3, 3);
        assert!(matches!(pivoted_cholesky(&g, 1e-12), Err(Error::EmptySpace { .. })));
    }

    #[test]
    fn hermitian_eigenvalues_of_complex_matrix() {
        // [[2, i], [-i, 2]] has eigenvalues 1 and 3
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[C64::new(2.0, 0.0), C64::new(0.0, 1.0), C64::new(0.0, -1.0), C64::new(2.0, 0.0)],
        );
        let ev = hermitian_eigenvalues(&m);
        assert!((ev[0] - 1.0).abs() < 1e-14 && (ev[1] - 3.0).abs() < 1e-14);
    }
}
