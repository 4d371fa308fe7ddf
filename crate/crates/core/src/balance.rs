//! Balance residuals, rigid-motion fitting, moment identities and the
//! rotating / translating / stationary classification.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::config::{Motion, VortexConfig};
use crate::error::{Error, Result};
use crate::kernels::GeometryKind;

/// Default sup-norm tolerance for deciding that a configuration is a crystal.
pub const DEFAULT_TOL: f64 = 1e-12;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassKind {
    Rotating,
    Translating,
    Stationary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CrystalClass {
    pub kind: ClassKind,
    pub n: usize,
    pub n_plus: usize,
    pub n_minus: usize,
    pub m: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BalanceReport {
    pub residuals: Vec<Complex64>,
    pub sup_norm: f64,
    pub tol: f64,
    pub balanced: bool,
    /// Finite geometry only.
    pub moment1_residual: Option<Complex64>,
    pub moment2_residual: Option<Complex64>,
    /// Present when the configuration is balanced within `tol`.
    pub class: Option<CrystalClass>,
}

pub fn sup_norm(f: &[Complex64]) -> f64 {
    f.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// `S_j = (1/2πi) Σ_{k≠j} σₖ Υ(p_j − pₖ)`, the conjugate of the velocity
/// induced at vortex `j` by all the others.
pub fn interaction(c: &VortexConfig) -> Result<Vec<Complex64>> {
    interaction_at(c, &c.positions())
}

/// [`interaction`] for arbitrary positions sharing the circulations and
/// geometry of `c`. Positions need not be reduced.
pub fn interaction_at(c: &VortexConfig, positions: &[Complex64]) -> Result<Vec<Complex64>> {
    let kernel = c.kernel();
    let vs = c.vortices();
    let n = positions.len();
    let scale = 1.0 / (2.0 * PI * I);
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for j in 0..n {
        for k in j + 1..n {
            let u = kernel
                .upsilon(positions[j] - positions[k])
                .map_err(|_| Error::CoincidentVortices { i: j, j: k })?;
            // Υ is odd
            out[j] += u * vs[k].sigma as f64;
            out[k] -= u * vs[j].sigma as f64;
        }
    }
    for s in &mut out {
        *s *= scale;
    }
    Ok(out)
}

/// Velocities `dp_j/dt` of the free dynamics.
pub fn velocities(c: &VortexConfig) -> Result<Vec<Complex64>> {
    Ok(interaction(c)?.into_iter().map(|s| s.conj()).collect())
}

/// `F_j = −v̄ + iω p̄_j + S_j`. The rotation term is dropped in periodic
/// geometries.
pub fn residual(c: &VortexConfig, m: &Motion) -> Result<Vec<Complex64>> {
    residual_at(c, &c.positions(), m)
}

pub fn residual_at(c: &VortexConfig, positions: &[Complex64], m: &Motion) -> Result<Vec<Complex64>> {
    let s = interaction_at(c, positions)?;
    let omega = if c.geometry().is_periodic() { 0.0 } else { m.omega };
    Ok(s
        .into_iter()
        .zip(positions)
        .map(|(s, p)| -m.v.conj() + I * omega * p.conj() + s)
        .collect())
}

/// Least-squares `(v, ω)` minimizing `Σ|F_j|²`. `ω = 0` in periodic
/// geometries. Rank-deficient fits (for example `n = 1`) return the
/// minimum-norm solution.
pub fn infer_motion(c: &VortexConfig) -> Result<Motion> {
    let s = interaction(c)?;
    let n = c.len();
    if c.geometry().is_periodic() {
        let mean = s.iter().sum::<Complex64>() / n as f64;
        return Ok(Motion::translating(mean.conj()));
    }
    // F_j = (−a + ωy_j + Re S_j) + i(b + ωx_j + Im S_j) with v = a + ib
    let mut a = DMatrix::<f64>::zeros(2 * n, 3);
    let mut rhs = DVector::<f64>::zeros(2 * n);
    for (j, p) in c.positions().iter().enumerate() {
        a[(2 * j, 0)] = -1.0;
        a[(2 * j, 2)] = p.im;
        a[(2 * j + 1, 1)] = 1.0;
        a[(2 * j + 1, 2)] = p.re;
        rhs[2 * j] = -s[j].re;
        rhs[2 * j + 1] = -s[j].im;
    }
    let x = crate::linalg::lstsq(&a, &rhs);
    Ok(Motion::new(Complex64::new(x[0], x[1]), x[2]))
}

/// Residuals of the two moment identities
/// `vΣσ + iωΣσp = 0` and `v̄Σσp − iωΣσ|p|² = (m² − n)/(4πi)`.
pub fn moment_check(c: &VortexConfig, m: &Motion) -> Result<(Complex64, Complex64)> {
    if c.geometry() != GeometryKind::Finite {
        return Err(Error::UnsupportedGeometry(
            "moment identities hold for finite configurations only".into(),
        ));
    }
    let total = c.total_circulation() as f64;
    let n = c.len() as f64;
    let wsum = c.weighted_sum();
    let wsq: f64 = c
        .vortices()
        .iter()
        .map(|v| v.sigma as f64 * v.p.norm_sqr())
        .sum();
    let r1 = m.v * total + I * m.omega * wsum;
    let r2 = m.v.conj() * wsum - I * m.omega * wsq - (total * total - n) / (4.0 * PI * I);
    Ok((r1, r2))
}

/// Class suggested by the motion alone, without the counting checks.
pub fn motion_kind(c: &VortexConfig, m: &Motion, tol: f64) -> ClassKind {
    if c.geometry() == GeometryKind::Finite && m.omega.abs() > tol {
        ClassKind::Rotating
    } else if m.v.norm() > tol {
        ClassKind::Translating
    } else {
        ClassKind::Stationary
    }
}

/// Classify a balanced `(c, m)` and verify the counting constraint of its
/// class.
pub fn classify(c: &VortexConfig, m: &Motion, tol: f64) -> Result<CrystalClass> {
    let total = c.total_circulation();
    let n = c.len();
    let finite = c.geometry() == GeometryKind::Finite;
    let kind = motion_kind(c, m, tol);
    match kind {
        ClassKind::Translating if total != 0 => {
            return Err(Error::InconsistentClass(format!(
                "translating crystal needs zero total circulation, got m = {total}"
            )));
        }
        ClassKind::Stationary if finite && total * total != n as i64 => {
            return Err(Error::InconsistentClass(format!(
                "finite stationary crystal needs m² = n, got m = {total}, n = {n}"
            )));
        }
        _ => {}
    }
    Ok(CrystalClass {
        kind,
        n,
        n_plus: c.n_plus(),
        n_minus: c.n_minus(),
        m: total,
    })
}

pub fn report(c: &VortexConfig, m: &Motion, tol: f64) -> Result<BalanceReport> {
    let residuals = residual(c, m)?;
    let sup = sup_norm(&residuals);
    let balanced = sup <= tol;
    let (m1, m2) = match moment_check(c, m) {
        Ok((a, b)) => (Some(a), Some(b)),
        Err(_) => (None, None),
    };
    let class = if balanced { Some(classify(c, m, tol)?) } else { None };
    Ok(BalanceReport {
        residuals,
        sup_norm: sup,
        tol,
        balanced,
        moment1_residual: m1,
        moment2_residual: m2,
        class,
    })
}

/// Fail with `NotBalanced` unless the sup-norm is within `tol`.
pub fn require_balanced(c: &VortexConfig, m: &Motion, tol: f64) -> Result<f64> {
    let sup = sup_norm(&residual(c, m)?);
    if sup <= tol {
        Ok(sup)
    } else {
        Err(Error::NotBalanced { sup_norm: sup, tol })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn cfg(g: GeometryKind, ps: &[Complex64], s: &[i8]) -> VortexConfig {
        VortexConfig::from_parts(g, ps, s).unwrap()
    }

    fn pair() -> VortexConfig {
        let a = 1.0 / (4.0 * PI);
        cfg(GeometryKind::Finite, &[c(0.0, a), c(0.0, -a)], &[1, -1])
    }

    fn polygon(n: usize) -> VortexConfig {
        let ps: Vec<_> = (0..n)
            .map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64))
            .collect();
        cfg(GeometryKind::Finite, &ps, &vec![1; n])
    }

    #[test]
    fn pair_is_balanced() {
        let f = residual(&pair(), &Motion::translating(c(1.0, 0.0))).unwrap();
        assert!(sup_norm(&f) < 1e-15);
    }

    #[test]
    fn thomson_polygons_are_balanced() {
        for n in 2..10 {
            let w = (n as f64 - 1.0) / (4.0 * PI);
            let f = residual(&polygon(n), &Motion::rotating(w)).unwrap();
            assert!(sup_norm(&f) < 1e-14, "n = {n}");
            // direct summation oracle for Σ_{k≠j} 1/(p_j − p_k) = (n−1)/(2p_j)
            let ps = polygon(n).positions();
            let direct: Complex64 = (1..n).map(|k| 1.0 / (ps[0] - ps[k])).sum();
            assert!((direct - (n as f64 - 1.0) / (2.0 * ps[0])).norm() < 1e-13);
        }
    }

    #[test]
    fn single_vortex_any_geometry() {
        for g in [
            GeometryKind::Finite,
            GeometryKind::SinglyPeriodic,
            GeometryKind::doubly(c(0.0, 1.0)).unwrap(),
        ] {
            let f = residual(&cfg(g, &[c(0.3, 0.1)], &[1]), &Motion::at_rest()).unwrap();
            assert_eq!(f, vec![c(0.0, 0.0)]);
        }
    }

    #[test]
    fn karman_street_balanced() {
        let b = 0.3;
        let street = cfg(GeometryKind::SinglyPeriodic, &[c(0.0, 0.0), c(0.5, b)], &[1, -1]);
        let m = Motion::translating(c(-(PI * b).tanh() / 2.0, 0.0));
        assert!(sup_norm(&residual(&street, &m).unwrap()) < 1e-15);
        let fit = infer_motion(&street).unwrap();
        assert!((fit.v - m.v).norm() < 1e-15);
    }

    #[test]
    fn doubly_dipole_is_stationary() {
        let tau = c(0.0, 1.0);
        let d = cfg(
            GeometryKind::doubly(tau).unwrap(),
            &[c(0.0, 0.0), (1.0 + tau) / 2.0],
            &[1, -1],
        );
        assert!(sup_norm(&residual(&d, &Motion::at_rest()).unwrap()) < 1e-13);
        assert!(infer_motion(&d).unwrap().v.norm() < 1e-13);
    }

    #[test]
    fn infer_thomson_and_hermite() {
        let m = infer_motion(&polygon(5)).unwrap();
        assert!(m.v.norm() < 1e-14);
        assert!((m.omega - 1.0 / PI).abs() < 1e-14);
        let r = (1.5f64).sqrt();
        let h = cfg(GeometryKind::Finite, &[c(-r, 0.0), c(0.0, 0.0), c(r, 0.0)], &[-1, -1, -1]);
        let m = infer_motion(&h).unwrap();
        assert!(m.v.norm() < 1e-14);
        assert!((m.omega + 1.0 / (2.0 * PI)).abs() < 1e-14);
        assert!(sup_norm(&residual(&h, &m).unwrap()) < 1e-14);
    }

    #[test]
    fn infer_single_vortex_is_minimum_norm() {
        let m = infer_motion(&cfg(GeometryKind::Finite, &[c(0.0, 0.0)], &[1])).unwrap();
        assert_eq!(m, Motion::at_rest());
    }

    #[test]
    fn moments() {
        let (r1, r2) = moment_check(&pair(), &Motion::translating(c(1.0, 0.0))).unwrap();
        assert!(r1.norm() < 1e-15 && r2.norm() < 1e-15);
        // Σσp = i/(2π) and the right side (0 − 2)/(4πi) agree
        let rhs = -2.0 / (4.0 * PI * I);
        assert!((pair().weighted_sum() - rhs).norm() < 1e-16);
        let single = cfg(GeometryKind::Finite, &[c(0.0, 0.0)], &[1]);
        let (a, b) = moment_check(&single, &Motion::at_rest()).unwrap();
        assert_eq!((a, b), (c(0.0, 0.0), c(0.0, 0.0)));
        let street = cfg(GeometryKind::SinglyPeriodic, &[c(0.0, 0.0)], &[1]);
        assert!(matches!(
            moment_check(&street, &Motion::at_rest()),
            Err(Error::UnsupportedGeometry(_))
        ));
    }

    #[test]
    fn classification() {
        let k = classify(&polygon(5), &Motion::rotating(1.0 / PI), 1e-12).unwrap();
        assert_eq!(k.kind, ClassKind::Rotating);
        let k = classify(&pair(), &Motion::translating(c(1.0, 0.0)), 1e-12).unwrap();
        assert_eq!((k.kind, k.m), (ClassKind::Translating, 0));
        let three = polygon(3);
        assert!(matches!(
            classify(&three, &Motion::at_rest(), 1e-12),
            Err(Error::InconsistentClass(_))
        ));
    }

    #[test]
    fn coincident_positions_reported() {
        let p = pair();
        let ps = vec![c(0.0, 0.0), c(0.0, 0.0)];
        assert!(matches!(
            residual_at(&p, &ps, &Motion::at_rest()),
            Err(Error::CoincidentVortices { i: 0, j: 1 })
        ));
    }

    #[test]
    fn report_fields() {
        let r = report(&pair(), &Motion::translating(c(1.0, 0.0)), 1e-12).unwrap();
        assert!(r.balanced);
        assert_eq!(r.sup_norm, sup_norm(&r.residuals));
        assert_eq!(r.class.unwrap().kind, ClassKind::Translating);
        let r = report(&pair(), &Motion::at_rest(), 1e-12).unwrap();
        assert!(!r.balanced && r.class.is_none());
    }
}
