//! Generators for the known crystal families. Every generator checks its
//! output against the balance equations before returning it.

mod adler_moser;
mod hermite;
mod periodic;
mod polygon;
mod poly;

use std::f64::consts::PI;

use num_complex::Complex64;

pub use adler_moser::{adler_moser_config, adler_moser_poly, two_axis_group, AdlerMoserPoly, MAX_CONFIG_INDEX, ROOT_SEPARATION};
pub use hermite::{hermite_config, hermite_roots, interlaced_hermite};
pub use periodic::{doubly_dipole, karman_street, DipoleFamily, KarmanFamily};
pub use polygon::{nested_polygons, nested_polygons_root, nested_ratio_roots, polygon_with_center, thomson, RatioRoot};

use crate::balance;
use crate::config::{Motion, VortexConfig};
use crate::error::{Error, Result};
use crate::kernels::GeometryKind;
use crate::solver::{refine, MotionMode, SolveSettings};

/// Residual bound on a generator's raw construction.
pub const SEED_TOL: f64 = 1e-10;
/// Residual targeted by the refinement of generator output.
pub const FINAL_TOL: f64 = 1e-13;

/// Check the raw construction, then polish it if needed. A failed polish
/// keeps the raw construction, which already passed `SEED_TOL`.
fn finish(cfg: VortexConfig, motion: Motion, mode: MotionMode) -> Result<(VortexConfig, Motion)> {
    let f = balance::sup_norm(&balance::residual(&cfg, &motion)?);
    if !(f <= SEED_TOL) {
        return Err(Error::NotBalanced {
            sup_norm: f,
            tol: SEED_TOL,
        });
    }
    if f <= FINAL_TOL {
        return Ok((cfg, motion));
    }
    let settings = SolveSettings {
        motion: mode,
        ..SolveSettings::default()
    }
    .with_tol(FINAL_TOL);
    match refine(&cfg, &motion, &settings) {
        Ok(sol) => Ok((sol.config, sol.motion)),
        Err(_) => Ok((cfg, motion)),
    }
}

/// Opposite vortices at `±i/(4π)`, translating with `v = 1`.
pub fn vortex_pair() -> (VortexConfig, Motion) {
    let a = Complex64::new(0.0, 1.0 / (4.0 * PI));
    let cfg = VortexConfig::from_parts(GeometryKind::Finite, &[a, -a], &[1, -1])
        .expect("pair is a valid configuration");
    (cfg, Motion::translating(Complex64::new(1.0, 0.0)))
}
