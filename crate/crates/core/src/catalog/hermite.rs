//! Hermite and interlaced Hermite lines.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use super::finish;
use crate::balance;
use crate::config::{Motion, VortexConfig};
use crate::error::{Error, Result};
use crate::kernels::GeometryKind;
use crate::solver::MotionMode;

/// `(H_n(x), H_{n−1}(x))` by the three-term recurrence.
fn hermite_pair(n: usize, x: f64) -> (f64, f64) {
    let (mut prev, mut cur) = (0.0, 1.0);
    for k in 0..n {
        let next = 2.0 * x * cur - 2.0 * k as f64 * prev;
        prev = cur;
        cur = next;
    }
    (cur, prev)
}

/// Roots of the physicists' Hermite polynomial `H_n`, ascending.
pub fn hermite_roots(n: usize) -> Result<Vec<f64>> {
    if !(1..=50).contains(&n) {
        return Err(Error::OutOfRange(format!("Hermite degree must be in 1..=50, got {n}")));
    }
    let jacobi = DMatrix::<f64>::from_fn(n, n, |i, j| {
        if i.abs_diff(j) == 1 {
            (i.max(j) as f64 / 2.0).sqrt()
        } else {
            0.0
        }
    });
    let mut roots: Vec<f64> = SymmetricEigen::new(jacobi).eigenvalues.iter().copied().collect();
    for x in &mut roots {
        let (h, h1) = hermite_pair(n, *x);
        let dh = 2.0 * n as f64 * h1;
        if dh != 0.0 {
            *x -= h / dh;
        }
    }
    roots.sort_by(f64::total_cmp);
    Ok(roots)
}

fn line(xs: &[f64]) -> Vec<Complex64> {
    xs.iter().map(|&x| Complex64::new(x, 0.0)).collect()
}

/// Negative vortices at the roots of `H_n`, rotating with `ω = −1/(2π)`.
pub fn hermite_config(n: usize) -> Result<(VortexConfig, Motion)> {
    let xs = hermite_roots(n)?;
    let cfg = VortexConfig::from_parts(GeometryKind::Finite, &line(&xs), &vec![-1; n])?;
    finish(cfg, Motion::rotating(-1.0 / (2.0 * PI)), MotionMode::Fixed)
}

/// Positive vortices at the roots of `H_{m+1}`, negative ones at the roots
/// of `H_m`.
pub fn interlaced_hermite(m: usize) -> Result<(VortexConfig, Motion)> {
    if m > 49 {
        return Err(Error::OutOfRange(format!("interlaced Hermite index must be ≤ 49, got {m}")));
    }
    let plus = hermite_roots(m + 1)?;
    let minus = if m == 0 { vec![] } else { hermite_roots(m)? };
    let mut ps = line(&plus);
    ps.extend(line(&minus));
    let mut sig = vec![1i8; plus.len()];
    sig.extend(vec![-1i8; minus.len()]);
    let cfg = VortexConfig::from_parts(GeometryKind::Finite, &ps, &sig)?;
    let motion = balance::infer_motion(&cfg)?;
    finish(cfg, motion, MotionMode::Fitted)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_degrees() {
        assert_eq!(hermite_roots(1).unwrap(), vec![0.0]);
        let r = hermite_roots(3).unwrap();
        let s = 1.5f64.sqrt();
        assert!((r[0] + s).abs() < 1e-15 && r[1].abs() < 1e-15 && (r[2] - s).abs() < 1e-15);
        assert!(hermite_roots(0).is_err() && hermite_roots(51).is_err());
    }

    #[test]
    fn stieltjes_identity() {
        for n in [20, 50] {
            let r = hermite_roots(n).unwrap();
            for (j, &x) in r.iter().enumerate() {
                let s: f64 = r.iter().enumerate().filter(|&(k, _)| k != j).map(|(_, &y)| 1.0 / (x - y)).sum();
                assert!((s - x).abs() < 1e-10, "n = {n}, j = {j}");
            }
        }
    }

    #[test]
    fn configs() {
        let (c, m) = hermite_config(3).unwrap();
        assert_eq!(m.omega, -1.0 / (2.0 * PI));
        assert!(balance::require_balanced(&c, &m, 1e-13).is_ok());
        let (c, m) = interlaced_hermite(1).unwrap();
        assert_eq!(c.len(), 3);
        assert!((m.omega + 1.0 / (2.0 * PI)).abs() < 1e-14);
        let (c, _) = interlaced_hermite(0).unwrap();
        assert_eq!((c.len(), c.sigmas()[0]), (1, 1));
    }
}
