//! Helicoid-limit data: the multigraph of `f(z) = Σ σᵢ arg(z − pᵢ)`, the
//! induced flow, and the period vectors of the limiting surfaces.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::balance::{self, ClassKind};
use crate::config::{Motion, VortexConfig};
use crate::error::{Error, Result};
use crate::kernels::GeometryKind;

/// Paths closer than this to a vortex are rejected.
pub const PATH_CLEARANCE: f64 = 1e-9;
/// Balance required before period data is reported.
pub const LIMIT_BALANCE_TOL: f64 = 1e-9;

pub(crate) fn require_finite(c: &VortexConfig) -> Result<()> {
    if c.geometry() != GeometryKind::Finite {
        return Err(Error::UnsupportedGeometry(format!(
            "the multigraph is defined for finite configurations, not {}",
            c.geometry().name()
        )));
    }
    Ok(())
}

fn segment_distance(a: Complex64, b: Complex64, p: Complex64) -> f64 {
    let d = b - a;
    let len2 = d.norm_sqr();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = (((p - a) * d.conj()).re / len2).clamp(0.0, 1.0);
    (a + d * t - p).norm()
}

/// `Σ σᵢ arg(z − pᵢ)` with principal branches.
pub fn principal_height(c: &VortexConfig, z: Complex64) -> f64 {
    c.vortices().iter().map(|v| v.sigma as f64 * (z - v.p).arg()).sum()
}

/// Change of `f` along the straight segment `a → b`. Fails if the segment
/// passes within `clearance` of a vortex.
pub(crate) fn segment_increment(c: &VortexConfig, a: Complex64, b: Complex64, clearance: f64) -> Result<f64> {
    let mut dh = 0.0;
    for (index, v) in c.vortices().iter().enumerate() {
        if segment_distance(a, b, v.p) < clearance {
            return Err(Error::PathThroughVortex { index });
        }
        // a segment missing p subtends less than π, so the principal arg is exact
        dh += v.sigma as f64 * ((b - v.p) / (a - v.p)).arg();
    }
    Ok(dh)
}

/// Continue `f` along the polyline `path` from `path[0]`, where it takes its
/// principal value, to the last point.
pub fn multigraph_height(path: &[Complex64], c: &VortexConfig) -> Result<f64> {
    require_finite(c)?;
    let Some(&start) = path.first() else {
        return Err(Error::invalid("path", "path must contain a basepoint"));
    };
    for (index, v) in c.vortices().iter().enumerate() {
        if (start - v.p).norm() < PATH_CLEARANCE {
            return Err(Error::PathThroughVortex { index });
        }
    }
    let mut h = principal_height(c, start);
    for w in path.windows(2) {
        h += segment_increment(c, w[0], w[1], PATH_CLEARANCE)?;
    }
    Ok(h)
}

/// Flow velocity `u` at `z`, from `ū = (1/2πi) Σ σₖ Υ(z − pₖ)`.
pub fn flow_field(z: Complex64, c: &VortexConfig) -> Result<Complex64> {
    let kernel = c.kernel();
    let mut s = Complex64::new(0.0, 0.0);
    for v in c.vortices() {
        s += v.sigma as f64 * kernel.upsilon(z - v.p)?;
    }
    Ok((s / Complex64::new(0.0, 2.0 * PI)).conj())
}

/// Flow at vortex `j` induced by all the others.
pub fn flow_at_vortex(j: usize, c: &VortexConfig) -> Result<Complex64> {
    let vs = c.vortices();
    if j >= vs.len() {
        return Err(Error::OutOfRange(format!("vortex index {j} out of range")));
    }
    let kernel = c.kernel();
    let mut s = Complex64::new(0.0, 0.0);
    for (k, v) in vs.iter().enumerate() {
        if k != j {
            s += v.sigma as f64 * kernel.upsilon(vs[j].p - v.p)?;
        }
    }
    Ok((s / Complex64::new(0.0, 2.0 * PI)).conj())
}

/// One sheet of the limit multigraph, sampled at a set of points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultigraphSheet {
    /// 0 for `f`, 1 for `f + π`.
    pub branch: u8,
    pub turns: usize,
    pub samples: Vec<(Complex64, f64)>,
    /// Positions of the vertical lines.
    pub markers: Vec<Complex64>,
}

/// Period data of the minimal surfaces in the limit `ε → 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitPeriods {
    pub nu: Complex64,
    pub t0: [f64; 3],
    pub t1: Option<[f64; 3]>,
    pub t2: Option<[f64; 3]>,
    /// Rotation angle of the screw symmetry, rotating crystals only.
    pub screw_angle: Option<f64>,
    pub psi1_limit: Option<f64>,
    pub psi2_limit: Option<f64>,
    pub quotient_genus: i64,
    pub end_description: String,
}

/// `(x, y)` with `Σ σₖ pₖ = x + yτ`.
pub fn lattice_coordinates(c: &VortexConfig, tau: Complex64) -> (f64, f64) {
    let s = c.weighted_sum();
    let y = s.im / tau.im;
    (s.re - y * tau.re, y)
}

pub fn limit_periods(c: &VortexConfig, m: &Motion, eps: f64) -> Result<LimitPeriods> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::OutOfRange(format!("ε must be positive, got {eps}")));
    }
    balance::require_balanced(c, m, LIMIT_BALANCE_TOL)?;
    let n = c.len() as i64;
    let total = c.total_circulation();
    let kind = balance::motion_kind(c, m, LIMIT_BALANCE_TOL);
    let nu = -2.0 * PI * m.v;
    let t0 = [2.0 * PI * eps * nu.re, 2.0 * PI * eps * nu.im, 2.0 * PI];
    let base = LimitPeriods {
        nu,
        t0,
        t1: None,
        t2: None,
        screw_angle: None,
        psi1_limit: None,
        psi2_limit: None,
        quotient_genus: n - 1,
        end_description: String::new(),
    };
    match c.geometry() {
        GeometryKind::Finite => match kind {
            ClassKind::Rotating => Ok(LimitPeriods {
                nu: Complex64::new(0.0, 0.0),
                t0: [0.0, 0.0, 2.0 * PI],
                screw_angle: Some(2.0 * PI * eps * eps),
                end_description: if total != 0 {
                    "two helicoidal ends".into()
                } else {
                    "two planar ends".into()
                },
                ..base
            }),
            ClassKind::Translating => Ok(LimitPeriods {
                end_description: "two helicoidal ends".into(),
                ..base
            }),
            ClassKind::Stationary => Err(Error::InconsistentClass(
                "no limit surface is attached to a finite stationary crystal".into(),
            )),
        },
        GeometryKind::SinglyPeriodic => Ok(LimitPeriods {
            t1: Some([1.0 / eps, 0.0, total as f64 * PI]),
            end_description: "four Scherk ends".into(),
            ..base
        }),
        GeometryKind::DoublyPeriodic { tau } => {
            if total != 0 {
                return Err(Error::InconsistentClass(format!(
                    "doubly periodic limits need zero total circulation, got {total}"
                )));
            }
            let (x, y) = lattice_coordinates(c, tau);
            let (psi1, psi2) = (-2.0 * PI * y, 2.0 * PI * x);
            Ok(LimitPeriods {
                t1: Some([1.0 / eps, 0.0, psi1]),
                t2: Some([tau.re / eps, tau.im / eps, psi2]),
                psi1_limit: Some(psi1),
                psi2_limit: Some(psi2),
                quotient_genus: n + 1,
                end_description: "no ends".into(),
                ..base
            })
        }
    }
}
