//! Small dense helpers on top of nalgebra's SVD.

use nalgebra::{DMatrix, DVector};

/// Singular values in descending order and a full square `V` (columns are
/// right singular vectors).
pub(crate) struct FullSvd {
    pub s: Vec<f64>,
    pub v: DMatrix<f64>,
}

pub(crate) fn full_svd(a: &DMatrix<f64>) -> FullSvd {
    let (m, n) = a.shape();
    // pad wide matrices with zero rows so V comes out square
    let padded = if m < n {
        let mut p = DMatrix::<f64>::zeros(n, n);
        p.rows_mut(0, m).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("v_t requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let s = order.iter().map(|&i| svd.singular_values[i]).collect();
    let mut v = DMatrix::<f64>::zeros(n, order.len());
    for (c, &i) in order.iter().enumerate() {
        v.set_column(c, &vt.row(i).transpose());
    }
    FullSvd { s, v }
}

pub(crate) fn singular_values(a: &DMatrix<f64>) -> Vec<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return vec![];
    }
    let mut s: Vec<f64> = a.clone().singular_values().iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Count of singular values above `rel_tol · σ_max`.
pub(crate) fn rank_of(s: &[f64], rel_tol: f64) -> usize {
    let smax = s.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return 0;
    }
    s.iter().filter(|&&x| x > rel_tol * smax).count()
}

/// Orthonormal basis (columns) of the null space of `a`. Singular values
/// up to `tol · max(σ_max, 1)` count as zero, so a numerically vanishing
/// matrix has a full null space.
pub(crate) fn nullspace(a: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let n = a.ncols();
    if a.nrows() == 0 {
        return DMatrix::identity(n, n);
    }
    let svd = full_svd(a);
    let smax = svd.s.first().copied().unwrap_or(0.0);
    let cut = tol * smax.max(1.0);
    let r = svd.s.iter().filter(|&&x| x > cut).count();
    svd.v.columns(r, n - r).into_owned()
}

/// Orthonormal basis of the column span of `a`.
pub(crate) fn orth(a: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    if a.ncols() == 0 {
        return DMatrix::zeros(a.nrows(), 0);
    }
    let svd = a.clone().svd(true, false);
    let u = svd.u.expect("u requested");
    let smax = svd.singular_values.max();
    let cols: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| smax > 0.0 && svd.singular_values[i] > rel_tol * smax)
        .collect();
    let mut out = DMatrix::zeros(a.nrows(), cols.len());
    for (c, &i) in cols.iter().enumerate() {
        out.set_column(c, &u.column(i));
    }
    out
}

/// Minimum-norm least-squares solution with singular values below
/// `1e-12 · σ_max` discarded.
pub(crate) fn lstsq(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    pinv_solve(a, b, 1e-12)
}

pub(crate) fn pinv_solve(a: &DMatrix<f64>, b: &DVector<f64>, rel_cut: f64) -> DVector<f64> {
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let eps = rel_cut * smax;
    svd.solve(b, eps.max(f64::MIN_POSITIVE))
        .expect("u and v_t computed")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nullspace_of_wide_matrix() {
        let a = DMatrix::from_row_slice(1, 3, &[1.0, 1.0, 0.0]);
        let ns = nullspace(&a, 1e-12);
        assert_eq!(ns.ncols(), 2);
        assert!((&a * &ns).norm() < 1e-14);
        assert!((ns.transpose() * &ns - DMatrix::identity(2, 2)).norm() < 1e-14);
    }

    #[test]
    fn rank_and_orth() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 2.0, 4.0, 0.0, 0.0]);
        assert_eq!(rank_of(&singular_values(&a), 1e-12), 1);
        assert_eq!(orth(&a, 1e-12).ncols(), 1);
        assert_eq!(nullspace(&a, 1e-12).ncols(), 1);
    }

    #[test]
    fn lstsq_minimum_norm() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let x = lstsq(&a, &DVector::from_vec(vec![2.0, 2.0]));
        assert!((x[0] - 1.0).abs() < 1e-14 && (x[1] - 1.0).abs() < 1e-14);
    }
}
