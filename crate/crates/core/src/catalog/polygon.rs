//! Thomson polygons, centered polygons and nested polygon pairs.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::finish;
use crate::balance;
use crate::config::{Motion, VortexConfig};
use crate::error::{Error, Result};
use crate::kernels::GeometryKind;
use crate::solver::MotionMode;

fn vertices(n: usize, radius: f64, phase: f64) -> Vec<Complex64> {
    (0..n)
        .map(|k| Complex64::from_polar(radius, 2.0 * PI * k as f64 / n as f64 + phase))
        .collect()
}

fn check_sigma(sigma: i8) -> Result<()> {
    if sigma == 1 || sigma == -1 {
        Ok(())
    } else {
        Err(Error::invalid("sigma", format!("circulation must be +1 or -1, got {sigma}")))
    }
}

/// `n` identical vortices on the unit circle, `ω = σ(n − 1)/(4π)`.
pub fn thomson(n: usize, sigma: i8) -> Result<(VortexConfig, Motion)> {
    check_sigma(sigma)?;
    if n == 0 {
        return Err(Error::OutOfRange("polygon needs at least one vertex".into()));
    }
    let cfg = VortexConfig::from_parts(GeometryKind::Finite, &vertices(n, 1.0, 0.0), &vec![sigma; n])?;
    let omega = sigma as f64 * (n as f64 - 1.0) / (4.0 * PI);
    finish(cfg, Motion::rotating(omega), MotionMode::Fixed)
}

/// Negative unit `n`-gon plus a central vortex of circulation `sigma_c`.
/// A one-gon degenerates to its center and is rejected as coincident.
pub fn polygon_with_center(n: usize, sigma_c: i8) -> Result<(VortexConfig, Motion)> {
    check_sigma(sigma_c)?;
    if n == 0 {
        return Err(Error::OutOfRange("polygon needs at least one vertex".into()));
    }
    if n == 1 {
        return Err(Error::CoincidentVortices { i: 0, j: 1 });
    }
    let mut ps = vertices(n, 1.0, 0.0);
    ps.push(Complex64::new(0.0, 0.0));
    let mut sig = vec![-1i8; n];
    sig.push(sigma_c);
    let cfg = VortexConfig::from_parts(GeometryKind::Finite, &ps, &sig)?;
    let motion = balance::infer_motion(&cfg)?;
    finish(cfg, motion, MotionMode::Fitted)
}

/// Which solution of the ratio equation to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RatioRoot {
    Inner,
    Outer,
}

/// `N(1 − r^N)(1 − r²) − (1 + r²)(1 + r^N)`, whose zeros are the radius
/// ratios of nested `N`-gons.
fn ratio_equation(n: usize, r: f64) -> f64 {
    let rn = r.powi(n as i32);
    n as f64 * (1.0 - rn) * (1.0 - r * r) - (1.0 + r * r) * (1.0 + rn)
}

fn bisect(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> Result<f64> {
    let (mut a, mut b) = (lo, hi);
    let (mut fa, fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::NoRealRoot { lo, hi });
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return Ok(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// Both radius ratios for nested `(k+1)`-gons: one in `(0, 1)` and its
/// inverse in `(1, 20)`.
pub fn nested_ratio_roots(k: usize) -> Result<(f64, f64)> {
    if k == 0 {
        return Err(Error::OutOfRange("nested polygons need k ≥ 1".into()));
    }
    let n = k + 1;
    let f = |r: f64| ratio_equation(n, r);
    let inner = bisect(f, 1e-9, 1.0 - 1e-9)?;
    let outer = bisect(f, 1.0 + 1e-9, 20.0)?;
    Ok((inner, outer))
}

/// Positive unit `(k+1)`-gon and a negative `(k+1)`-gon of radius `r`,
/// rotated by half the vertex angle, refined to a rotating crystal.
pub fn nested_polygons(k: usize) -> Result<(VortexConfig, Motion)> {
    nested_polygons_root(k, RatioRoot::Inner)
}

pub fn nested_polygons_root(k: usize, which: RatioRoot) -> Result<(VortexConfig, Motion)> {
    let (inner, outer) = nested_ratio_roots(k)?;
    let r = match which {
        RatioRoot::Inner => inner,
        RatioRoot::Outer => outer,
    };
    let n = k + 1;
    let mut ps = vertices(n, 1.0, 0.0);
    ps.extend(vertices(n, r, PI / n as f64));
    let mut sig = vec![1i8; n];
    sig.extend(vec![-1i8; n]);
    let cfg = VortexConfig::from_parts(GeometryKind::Finite, &ps, &sig)?;
    let motion = balance::infer_motion(&cfg)?;
    finish(cfg, motion, MotionMode::Fitted)
}
