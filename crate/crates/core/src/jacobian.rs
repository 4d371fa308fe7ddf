//! Real Jacobian of the balance map, numerical rank and nondegeneracy.
//!
//! Coordinates are ordered `(Re p₁, Im p₁, Re p₂, …)` and residual rows
//! `(Re F₁, Im F₁, …)`. For `δF = A·δp + B·δp̄` the real block is
//! `[[Re(A+B), −Im(A−B)], [Im(A+B), Re(A−B)]]`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Serialize, Serializer};

use crate::balance::{self, ClassKind, CrystalClass};
use crate::config::{Motion, VortexConfig};
use crate::error::{Error, Result};
use crate::linalg;
use crate::symmetry::{self, SymmetryGroup, SYMMETRY_TOL};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Residual sup-norm accepted by the rank reports.
pub const RANK_BALANCE_TOL: f64 = 1e-9;

/// Per-unknown factor of the relative singular-value threshold.
pub const RANK_TOL_PER_DOF: f64 = 1e-11;

fn serialize_matrix<S: Serializer>(m: &DMatrix<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    let rows: Vec<Vec<f64>> = m.row_iter().map(|r| r.iter().copied().collect()).collect();
    rows.serialize(s)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankReport {
    /// Full Jacobian, or its restriction to the symmetric subspace.
    #[serde(serialize_with = "serialize_matrix")]
    pub jacobian: DMatrix<f64>,
    pub singular_values: Vec<f64>,
    pub rank: usize,
    pub null_dim: usize,
    /// Dimension of the perturbation space the rank is measured on.
    pub dimension: usize,
    pub max_possible_rank: usize,
    pub nondegenerate: bool,
    pub rel_tol: f64,
    pub restricted: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct RankOptions {
    /// Relative singular-value threshold; `None` means `2n · 1e-11`.
    pub rel_tol: Option<f64>,
    pub balance_tol: f64,
}

impl Default for RankOptions {
    fn default() -> Self {
        RankOptions {
            rel_tol: None,
            balance_tol: RANK_BALANCE_TOL,
        }
    }
}

impl RankOptions {
    fn threshold(&self, n: usize) -> f64 {
        self.rel_tol.unwrap_or(2.0 * n as f64 * RANK_TOL_PER_DOF)
    }
}

fn put_block(j: &mut DMatrix<f64>, row: usize, col: usize, a: Complex64, b: Complex64) {
    let s = a + b;
    let d = a - b;
    j[(2 * row, 2 * col)] += s.re;
    j[(2 * row, 2 * col + 1)] += -d.im;
    j[(2 * row + 1, 2 * col)] += s.im;
    j[(2 * row + 1, 2 * col + 1)] += d.re;
}

/// Analytic `2n × 2n` real Jacobian of the residual at fixed motion.
pub fn analytic_jacobian(c: &VortexConfig, m: &Motion) -> Result<DMatrix<f64>> {
    analytic_jacobian_at(c, &c.positions(), m)
}

pub(crate) fn analytic_jacobian_at(
    c: &VortexConfig,
    positions: &[Complex64],
    m: &Motion,
) -> Result<DMatrix<f64>> {
    let n = positions.len();
    let kernel = c.kernel();
    let sig = c.sigmas();
    let scale = 1.0 / (2.0 * PI * I);
    let mut jac = DMatrix::<f64>::zeros(2 * n, 2 * n);
    let omega = if c.geometry().is_periodic() { 0.0 } else { m.omega };
    for j in 0..n {
        let mut a_diag = Complex64::new(0.0, 0.0);
        let mut b_diag = I * omega;
        for k in 0..n {
            if k == j {
                continue;
            }
            let w = kernel
                .wirtinger(positions[j] - positions[k])
                .map_err(|_| Error::CoincidentVortices { i: j.min(k), j: j.max(k) })?;
            let sk = scale * sig[k] as f64;
            a_diag += sk * w.d_z;
            b_diag += sk * w.d_zbar;
            put_block(&mut jac, j, k, -sk * w.d_z, -sk * w.d_zbar);
        }
        put_block(&mut jac, j, j, a_diag, b_diag);
    }
    Ok(jac)
}

fn stack(f: &[Complex64]) -> Vec<f64> {
    f.iter().flat_map(|z| [z.re, z.im]).collect()
}

/// Central-difference Jacobian with step `h` (intended range `[1e-8, 1e-4]`).
pub fn numeric_jacobian(c: &VortexConfig, m: &Motion, h: f64) -> Result<DMatrix<f64>> {
    let p0 = c.positions();
    let n = p0.len();
    let mut jac = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for k in 0..n {
        for (part, dir) in [Complex64::new(h, 0.0), Complex64::new(0.0, h)].into_iter().enumerate() {
            let mut plus = p0.clone();
            let mut minus = p0.clone();
            plus[k] += dir;
            minus[k] -= dir;
            let fp = stack(&balance::residual_at(c, &plus, m)?);
            let fm = stack(&balance::residual_at(c, &minus, m)?);
            for r in 0..2 * n {
                jac[(r, 2 * k + part)] = (fp[r] - fm[r]) / (2.0 * h);
            }
        }
    }
    Ok(jac)
}

fn column(n: usize, f: impl Fn(usize) -> Complex64) -> Vec<f64> {
    (0..n).flat_map(|k| {
        let z = f(k);
        [z.re, z.im]
    })
    .collect()
}

/// Columns spanning the perturbations forced into the kernel by the
/// invariances of the class: translations, the rotation about the center
/// of a rotating crystal, and for finite stationary crystals also the
/// rotation and scaling about the origin.
pub fn trivial_generators(c: &VortexConfig, m: &Motion, class: &CrystalClass) -> DMatrix<f64> {
    let n = c.len();
    let ps = c.positions();
    let one = Complex64::new(1.0, 0.0);
    let mut cols: Vec<Vec<f64>> = Vec::new();
    let periodic = c.geometry().is_periodic();
    match class.kind {
        ClassKind::Rotating if !periodic => {
            let center = I * m.v / m.omega;
            cols.push(column(n, |k| I * (ps[k] - center)));
        }
        ClassKind::Stationary if !periodic => {
            cols.push(column(n, |_| one));
            cols.push(column(n, |_| I));
            cols.push(column(n, |k| I * ps[k]));
            cols.push(column(n, |k| ps[k]));
        }
        _ => {
            cols.push(column(n, |_| one));
            cols.push(column(n, |_| I));
        }
    }
    let mut t = DMatrix::<f64>::zeros(2 * n, cols.len());
    for (j, col) in cols.iter().enumerate() {
        for (r, x) in col.iter().enumerate() {
            t[(r, j)] = *x;
        }
    }
    t
}

const SUBSPACE_TOL: f64 = 1e-10;

fn dim(a: &DMatrix<f64>) -> usize {
    linalg::rank_of(&linalg::singular_values(a), SUBSPACE_TOL)
}

/// Full-Jacobian rank report. `class` decides the forced kernel.
pub fn rank_report(c: &VortexConfig, m: &Motion, class: &CrystalClass) -> Result<RankReport> {
    rank_report_with(c, m, class, &RankOptions::default())
}

pub fn rank_report_with(
    c: &VortexConfig,
    m: &Motion,
    class: &CrystalClass,
    opts: &RankOptions,
) -> Result<RankReport> {
    balance::require_balanced(c, m, opts.balance_tol)?;
    let jac = analytic_jacobian(c, m)?;
    let n2 = 2 * c.len();
    let rel_tol = opts.threshold(c.len());
    let s = linalg::singular_values(&jac);
    let rank = linalg::rank_of(&s, rel_tol);
    let max_possible_rank = n2 - dim(&trivial_generators(c, m, class));
    Ok(RankReport {
        jacobian: jac,
        singular_values: s,
        rank,
        null_dim: n2 - rank,
        dimension: n2,
        max_possible_rank,
        nondegenerate: rank == max_possible_rank,
        rel_tol,
        restricted: false,
    })
}

/// Orthonormal basis of perturbations `δp` with `δp_{π(k)} = L·δp_k` for
/// every element of `g` (linear part `L`, vortex permutation `π`).
pub fn invariant_basis(c: &VortexConfig, g: &SymmetryGroup) -> Result<DMatrix<f64>> {
    let perms = symmetry::verify(c, g, SYMMETRY_TOL)?;
    let n = c.len();
    let mut rows = DMatrix::<f64>::zeros(2 * n * g.elements.len(), 2 * n);
    for (e, (iso, perm)) in g.elements.iter().zip(&perms).enumerate() {
        let l = iso.linear_matrix();
        for (k, &pk) in perm.iter().enumerate() {
            for a in 0..2 {
                let r = 2 * n * e + 2 * k + a;
                rows[(r, 2 * pk + a)] += 1.0;
                rows[(r, 2 * k)] -= l[a][0];
                rows[(r, 2 * k + 1)] -= l[a][1];
            }
        }
    }
    Ok(linalg::nullspace(&rows, SUBSPACE_TOL))
}

/// Rank of the Jacobian restricted to the `G`-invariant perturbations,
/// compared with the dimension of that subspace minus the trivial motions
/// it contains.
pub fn restricted_rank_report(
    c: &VortexConfig,
    m: &Motion,
    class: &CrystalClass,
    g: &SymmetryGroup,
) -> Result<RankReport> {
    restricted_rank_report_with(c, m, class, g, &RankOptions::default())
}

pub fn restricted_rank_report_with(
    c: &VortexConfig,
    m: &Motion,
    class: &CrystalClass,
    g: &SymmetryGroup,
    opts: &RankOptions,
) -> Result<RankReport> {
    let basis = invariant_basis(c, g)?;
    balance::require_balanced(c, m, opts.balance_tol)?;
    let d = basis.ncols();
    let full = analytic_jacobian(c, m)?;
    let jv = &full * &basis;
    let rel_tol = opts.threshold(c.len());
    let s = linalg::singular_values(&jv);
    let rank = linalg::rank_of(&s, rel_tol);
    let t = trivial_generators(c, m, class);
    let mut joint = DMatrix::<f64>::zeros(t.nrows(), t.ncols() + d);
    joint.columns_mut(0, t.ncols()).copy_from(&t);
    joint.columns_mut(t.ncols(), d).copy_from(&basis);
    let overlap = dim(&t) + d - dim(&joint);
    let max_possible_rank = d - overlap;
    Ok(RankReport {
        jacobian: jv,
        singular_values: s,
        rank,
        null_dim: d - rank,
        dimension: d,
        max_possible_rank,
        nondegenerate: rank == max_possible_rank,
        rel_tol,
        restricted: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::GeometryKind;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn polygon(n: usize) -> VortexConfig {
        let ps: Vec<_> = (0..n)
            .map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64))
            .collect();
        VortexConfig::from_parts(GeometryKind::Finite, &ps, &vec![1; n]).unwrap()
    }

    fn rel_err(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
        (a - b).amax() / a.amax().max(1e-300)
    }

    #[test]
    fn single_rotating_vortex() {
        let cfg = VortexConfig::from_parts(GeometryKind::Finite, &[c(0.0, 0.0)], &[1]).unwrap();
        let m = Motion::rotating(1.0);
        let j = analytic_jacobian(&cfg, &m).unwrap();
        let s = linalg::singular_values(&j);
        assert!((s[0] - 1.0).abs() < 1e-15 && (s[1] - 1.0).abs() < 1e-15);
        let class = balance::classify(&cfg, &m, 1e-12).unwrap();
        let r = rank_report(&cfg, &m, &class).unwrap();
        assert_eq!((r.rank, r.max_possible_rank), (2, 2));
    }

    #[test]
    fn analytic_matches_numeric() {
        let m4 = Motion::rotating(3.0 / (4.0 * PI));
        let a = analytic_jacobian(&polygon(4), &m4).unwrap();
        let n = numeric_jacobian(&polygon(4), &m4, 1e-6).unwrap();
        assert!(rel_err(&a, &n) < 1e-6);
        let tau = c(0.0, 1.0);
        let dip = VortexConfig::from_parts(
            GeometryKind::doubly(tau).unwrap(),
            &[c(0.0, 0.0), (1.0 + tau) / 2.0],
            &[1, -1],
        )
        .unwrap();
        let a = analytic_jacobian(&dip, &Motion::at_rest()).unwrap();
        let n = numeric_jacobian(&dip, &Motion::at_rest(), 1e-5).unwrap();
        assert!(rel_err(&a, &n) < 1e-6);
    }

    #[test]
    fn numeric_jacobian_is_second_order() {
        let cfg = VortexConfig::from_parts(
            GeometryKind::SinglyPeriodic,
            &[c(0.1, 0.2), c(0.6, -0.1), c(0.35, 0.4)],
            &[1, -1, 1],
        )
        .unwrap();
        let m = Motion::translating(c(0.2, 0.1));
        let a = analytic_jacobian(&cfg, &m).unwrap();
        let e1 = (numeric_jacobian(&cfg, &m, 1e-3).unwrap() - &a).amax();
        let e2 = (numeric_jacobian(&cfg, &m, 5e-4).unwrap() - &a).amax();
        let ratio = e1 / e2;
        assert!(ratio > 3.5 && ratio < 4.5, "ratio {ratio}");
    }

    #[test]
    fn single_translating_vortex_has_zero_jacobian() {
        let cfg = VortexConfig::from_parts(GeometryKind::Finite, &[c(0.4, 0.0)], &[1]).unwrap();
        let j = numeric_jacobian(&cfg, &Motion::translating(c(1.0, 0.0)), 1e-6).unwrap();
        assert_eq!(j.amax(), 0.0);
    }

    #[test]
    fn pair_antisymmetric_perturbation() {
        let a = 1.0 / (4.0 * PI);
        let cfg = VortexConfig::from_parts(GeometryKind::Finite, &[c(0.0, a), c(0.0, -a)], &[1, -1])
            .unwrap();
        let m = Motion::translating(c(1.0, 0.0));
        let j = analytic_jacobian(&cfg, &m).unwrap();
        // pulling the vortices apart slows the pair: δp = (+iδ, −iδ)
        let d = 1e-7;
        let dp = nalgebra::DVector::from_vec(vec![0.0, d, 0.0, -d]);
        let df = &j * &dp;
        let exact = balance::residual_at(&cfg, &[c(0.0, a + d), c(0.0, -a - d)], &m).unwrap();
        for k in 0..2 {
            assert!((df[2 * k] - exact[k].re).abs() < 1e-11);
            assert!((df[2 * k + 1] - exact[k].im).abs() < 1e-11);
        }
        let class = balance::classify(&cfg, &m, 1e-12).unwrap();
        let r = rank_report(&cfg, &m, &class).unwrap();
        assert_eq!((r.rank, r.max_possible_rank), (2, 2));
        assert!(r.nondegenerate);
    }

    #[test]
    fn thomson_ranks() {
        for n in [5usize, 7] {
            let m = Motion::rotating((n as f64 - 1.0) / (4.0 * PI));
            let cfg = polygon(n);
            let class = balance::classify(&cfg, &m, 1e-12).unwrap();
            let r = rank_report(&cfg, &m, &class).unwrap();
            assert_eq!(r.max_possible_rank, 2 * n - 1);
            assert_eq!(r.rank + r.null_dim, 2 * n);
            assert_eq!(r.nondegenerate, n != 7, "n = {n}: {:?}", r.singular_values);
        }
    }

    #[test]
    fn heptagon_nondegenerate_with_d7() {
        let cfg = polygon(7);
        let m = Motion::rotating(6.0 / (4.0 * PI));
        let class = balance::classify(&cfg, &m, 1e-12).unwrap();
        let g = symmetry::detect_symmetries(&cfg, SYMMETRY_TOL);
        let r = restricted_rank_report(&cfg, &m, &class, &g).unwrap();
        assert!(r.nondegenerate && r.restricted);
        assert_eq!(r.dimension, 1);
    }

    #[test]
    fn trivial_group_matches_full_report() {
        let cfg = polygon(5);
        let m = Motion::rotating(1.0 / PI);
        let class = balance::classify(&cfg, &m, 1e-12).unwrap();
        let full = rank_report(&cfg, &m, &class).unwrap();
        let r = restricted_rank_report(&cfg, &m, &class, &SymmetryGroup::trivial()).unwrap();
        assert_eq!((r.rank, r.max_possible_rank, r.null_dim), (full.rank, full.max_possible_rank, full.null_dim));
    }

    #[test]
    fn rotation_is_a_null_vector() {
        let cfg = polygon(6);
        let m = Motion::rotating(5.0 / (4.0 * PI));
        let j = analytic_jacobian(&cfg, &m).unwrap();
        let class = balance::classify(&cfg, &m, 1e-12).unwrap();
        let t = trivial_generators(&cfg, &m, &class);
        assert!((&j * &t).amax() < 1e-12);
    }

    #[test]
    fn unbalanced_input_rejected() {
        let cfg = polygon(5);
        let m = Motion::rotating(0.2);
        let class = CrystalClass {
            kind: ClassKind::Rotating,
            n: 5,
            n_plus: 5,
            n_minus: 0,
            m: 5,
        };
        assert!(matches!(rank_report(&cfg, &m, &class), Err(Error::NotBalanced { .. })));
    }
}
