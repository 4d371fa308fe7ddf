//! Kármán streets and doubly periodic dipoles, with their one-parameter
//! families.

use num_complex::Complex64;

use super::finish;
use crate::balance;
use crate::config::{Motion, VortexConfig};
use crate::error::{Error, Result};
use crate::kernels::GeometryKind;
use crate::solver::{Family, MotionMode, SolveSettings, SweepPoint};

/// `p₁ = 0` (positive) and `p₂ = ib`, shifted by half a period when
/// `staggered` (negative).
pub fn karman_street(b: f64, staggered: bool) -> Result<(VortexConfig, Motion)> {
    if !(b > 0.0) || !b.is_finite() {
        return Err(Error::OutOfRange(format!("street half-width b must be positive, got {b}")));
    }
    let shift = if staggered { 0.5 } else { 0.0 };
    let ps = [Complex64::new(0.0, 0.0), Complex64::new(shift, b)];
    let cfg = VortexConfig::from_parts(GeometryKind::SinglyPeriodic, &ps, &[1, -1])?;
    let motion = balance::infer_motion(&cfg)?;
    finish(cfg, motion, MotionMode::Fitted)
}

/// A positive vortex at 0 and a negative one at `offset` on the torus
/// `ℂ/⟨1, τ⟩`.
pub fn doubly_dipole(tau: Complex64, offset: Complex64) -> Result<(VortexConfig, Motion)> {
    let geometry = GeometryKind::doubly(tau)?;
    let ps = [Complex64::new(0.0, 0.0), offset];
    let cfg = VortexConfig::from_parts(geometry, &ps, &[1, -1])?;
    let motion = balance::infer_motion(&cfg)?;
    finish(cfg, motion, MotionMode::Fitted)
}

/// Streets parametrized by `b`; positions are pinned and only the velocity
/// is fitted.
#[derive(Debug, Clone, Copy)]
pub struct KarmanFamily {
    pub staggered: bool,
}

impl Family for KarmanFamily {
    fn seed(&self, b: f64, _previous: Option<&SweepPoint>) -> Result<(VortexConfig, Motion)> {
        karman_street(b, self.staggered)
    }

    fn settings(&self, _b: f64) -> SolveSettings {
        SolveSettings {
            motion: MotionMode::Fitted,
            pins: (0..4).collect(),
            ..SolveSettings::default()
        }
    }
}

/// Dipoles on rectangular tori `τ = is` with the negative vortex at the
/// cell center.
#[derive(Debug, Clone, Copy)]
pub struct DipoleFamily;

impl Family for DipoleFamily {
    fn seed(&self, s: f64, _previous: Option<&SweepPoint>) -> Result<(VortexConfig, Motion)> {
        let tau = Complex64::new(0.0, s);
        doubly_dipole(tau, (1.0 + tau) / 2.0)
    }

    fn settings(&self, _s: f64) -> SolveSettings {
        SolveSettings::default().fitted()
    }
}
