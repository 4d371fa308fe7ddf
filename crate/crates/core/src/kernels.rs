//! Interaction kernels for the three geometries.
//!
//! A vortex at the origin induces the conjugate velocity `(1/2πi) σ Υ(z)`,
//! where `Υ` is `1/z` in the plane, `π cot(πz)` on the annulus `ℂ/⟨1⟩` and
//! `ζ(z;τ) − ξ(z;τ)` on the torus `ℂ/⟨1,τ⟩`. The Weierstrass functions are
//! evaluated by reducing to the centered fundamental parallelogram and summing
//! the `q`-expansion with `q = exp(iπτ)`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Points closer than this to a lattice point are treated as singular.
pub const SINGULAR_RADIUS: f64 = 1e-13;

const SERIES_TOL: f64 = 1e-16;
const SERIES_MAX_TERMS: usize = 200_000;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GeometryKind {
    Finite,
    /// Period fixed to 1.
    SinglyPeriodic,
    /// Periods 1 and `tau`, `Im tau > 0`.
    DoublyPeriodic { tau: Complex64 },
}

impl GeometryKind {
    pub fn doubly(tau: Complex64) -> Result<Self> {
        check_modulus(tau)?;
        Ok(GeometryKind::DoublyPeriodic { tau })
    }

    pub fn is_periodic(&self) -> bool {
        !matches!(self, GeometryKind::Finite)
    }

    pub fn validate(&self) -> Result<()> {
        if let GeometryKind::DoublyPeriodic { tau } = self {
            check_modulus(*tau)?;
        }
        Ok(())
    }

    pub fn name(&self) -> &'static str {
        match self {
            GeometryKind::Finite => "finite",
            GeometryKind::SinglyPeriodic => "singly",
            GeometryKind::DoublyPeriodic { .. } => "doubly",
        }
    }
}

/// Wirtinger derivatives `∂/∂z` and `∂/∂z̄` of a kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WirtingerPair {
    pub d_z: Complex64,
    pub d_zbar: Complex64,
}

fn check_modulus(tau: Complex64) -> Result<()> {
    if !(tau.im > 0.0) || !tau.re.is_finite() || !tau.im.is_finite() {
        return Err(Error::InvalidModulus { im: tau.im });
    }
    Ok(())
}

/// `cot(w)` without overflow for large `|Im w|`.
pub(crate) fn cot(w: Complex64) -> Complex64 {
    if w.im >= 0.0 {
        let e = (2.0 * I * w).exp();
        I * (e + 1.0) / (e - 1.0)
    } else {
        let e = (-2.0 * I * w).exp();
        I * (1.0 + e) / (1.0 - e)
    }
}

/// The lattice `⟨1, τ⟩` with its quasi-period constants.
#[derive(Debug, Clone, Copy)]
pub struct Lattice {
    tau: Complex64,
    /// `ζ(1/2)`
    eta1: Complex64,
    /// `ζ(τ/2)`
    eta2: Complex64,
    /// `ξ(z) = c1·z + c2·z̄`
    c1: Complex64,
    c2: Complex64,
}

impl Lattice {
    pub fn new(tau: Complex64) -> Result<Self> {
        check_modulus(tau)?;
        let eta1 = eta1_series(tau);
        let mut lattice = Lattice {
            tau,
            eta1,
            eta2: Complex64::new(0.0, 0.0),
            c1: Complex64::new(0.0, 0.0),
            c2: Complex64::new(0.0, 0.0),
        };
        // τ/2 sits on the edge of the centered parallelogram, where the
        // series still converges like exp(-πn Im τ).
        lattice.eta2 = lattice.zeta_series(tau / 2.0);
        let denom = tau - tau.conj();
        lattice.c1 = (2.0 * lattice.eta2 - 2.0 * lattice.eta1 * tau.conj()) / denom;
        lattice.c2 = (2.0 * lattice.eta1 * tau - 2.0 * lattice.eta2) / denom;
        Ok(lattice)
    }

    pub fn tau(&self) -> Complex64 {
        self.tau
    }

    /// Half-period values `(ζ(1/2), ζ(τ/2))`.
    pub fn half_period_zetas(&self) -> (Complex64, Complex64) {
        (self.eta1, self.eta2)
    }

    /// Wirtinger coefficients `(c1, c2)` of `ξ(z) = c1 z + c2 z̄`.
    pub fn xi_coefficients(&self) -> (Complex64, Complex64) {
        (self.c1, self.c2)
    }

    /// Real lattice coordinates `(x, y)` with `z = x + yτ`.
    pub fn coords(&self, z: Complex64) -> (f64, f64) {
        let y = z.im / self.tau.im;
        (z.re - y * self.tau.re, y)
    }

    /// Representative of `z` in the centered parallelogram, plus the lattice
    /// shift `(m, n)` with `z = z_r + m + nτ`.
    pub fn reduce_centered(&self, z: Complex64) -> (Complex64, f64, f64) {
        let (x, y) = self.coords(z);
        let (m, n) = (x.round(), y.round());
        (z - m - n * self.tau, m, n)
    }

    /// Representative with lattice coordinates in `[0, 1)²`.
    pub fn reduce_fundamental(&self, z: Complex64) -> Complex64 {
        let (x, y) = self.coords(z);
        if (0.0..1.0).contains(&x) && (0.0..1.0).contains(&y) {
            return z;
        }
        let (m, n) = (x - wrap_unit(x), y - wrap_unit(y));
        let shifted = z - m - n * self.tau;
        // rounding can push a coordinate just outside [0, 1)
        let (xs, ys) = self.coords(shifted);
        if (0.0..1.0).contains(&xs) && (0.0..1.0).contains(&ys) {
            shifted
        } else {
            wrap_unit(xs) + wrap_unit(ys) * self.tau
        }
    }

    fn zeta_series(&self, z: Complex64) -> Complex64 {
        let mut acc = 2.0 * self.eta1 * z + PI * cot(PI * z);
        let mut tail = Complex64::new(0.0, 0.0);
        for n in 1..=SERIES_MAX_TERMS {
            let nf = n as f64;
            let plus = (2.0 * PI * I * nf * (self.tau + z)).exp();
            let minus = (2.0 * PI * I * nf * (self.tau - z)).exp();
            let q2n = (2.0 * PI * I * nf * self.tau).exp();
            let term = (plus - minus) / (2.0 * I * (1.0 - q2n));
            tail += term;
            if plus.norm().max(minus.norm()) < SERIES_TOL * tail.norm().max(1.0) {
                break;
            }
        }
        acc += 4.0 * PI * tail;
        acc
    }

    fn wp_series(&self, z: Complex64) -> Complex64 {
        let ct = cot(PI * z);
        let mut acc = -2.0 * self.eta1 + PI * PI * (1.0 + ct * ct);
        let mut tail = Complex64::new(0.0, 0.0);
        for n in 1..=SERIES_MAX_TERMS {
            let nf = n as f64;
            let plus = (2.0 * PI * I * nf * (self.tau + z)).exp();
            let minus = (2.0 * PI * I * nf * (self.tau - z)).exp();
            let q2n = (2.0 * PI * I * nf * self.tau).exp();
            let term = nf * (plus + minus) / (2.0 * (1.0 - q2n));
            tail += term;
            if nf * plus.norm().max(minus.norm()) < SERIES_TOL * tail.norm().max(1.0) {
                break;
            }
        }
        acc -= 8.0 * PI * PI * tail;
        acc
    }

    fn guard(&self, z: Complex64) -> Result<(Complex64, f64, f64)> {
        let (zr, m, n) = self.reduce_centered(z);
        if zr.norm() < SINGULAR_RADIUS {
            return Err(Error::SingularInput { z });
        }
        Ok((zr, m, n))
    }

    pub fn zeta(&self, z: Complex64) -> Result<Complex64> {
        let (zr, m, n) = self.guard(z)?;
        Ok(self.zeta_series(zr) + 2.0 * m * self.eta1 + 2.0 * n * self.eta2)
    }

    pub fn wp(&self, z: Complex64) -> Result<Complex64> {
        let (zr, _, _) = self.guard(z)?;
        Ok(self.wp_series(zr))
    }

    pub fn xi(&self, z: Complex64) -> Complex64 {
        let (x, y) = self.coords(z);
        2.0 * x * self.eta1 + 2.0 * y * self.eta2
    }

    /// `ζ(z) − ξ(z)`, doubly periodic.
    pub fn upsilon(&self, z: Complex64) -> Result<Complex64> {
        let (zr, _, _) = self.guard(z)?;
        Ok(self.zeta_series(zr) - self.xi(zr))
    }

    pub fn upsilon_wirtinger(&self, z: Complex64) -> Result<WirtingerPair> {
        let (zr, _, _) = self.guard(z)?;
        Ok(WirtingerPair {
            d_z: -self.wp_series(zr) - self.c1,
            d_zbar: -self.c2,
        })
    }
}

fn wrap_unit(x: f64) -> f64 {
    let r = x - x.floor();
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// `η1 = (π²/6)(1 − 24 Σ n q²ⁿ/(1 − q²ⁿ))`.
fn eta1_series(tau: Complex64) -> Complex64 {
    let mut sum = Complex64::new(0.0, 0.0);
    for n in 1..=SERIES_MAX_TERMS {
        let nf = n as f64;
        let q2n = (2.0 * PI * I * nf * tau).exp();
        let term = nf * q2n / (1.0 - q2n);
        sum += term;
        if term.norm() < SERIES_TOL * sum.norm().max(1.0) {
            break;
        }
    }
    PI * PI / 6.0 * (1.0 - 24.0 * sum)
}

/// Geometry-bound kernel evaluator. Construct once per configuration so the
/// lattice constants are computed a single time.
#[derive(Debug, Clone, Copy)]
pub struct Kernel {
    geometry: GeometryKind,
    lattice: Option<Lattice>,
}

impl Kernel {
    pub fn new(geometry: GeometryKind) -> Result<Self> {
        let lattice = match geometry {
            GeometryKind::DoublyPeriodic { tau } => Some(Lattice::new(tau)?),
            _ => None,
        };
        Ok(Kernel { geometry, lattice })
    }

    pub fn geometry(&self) -> GeometryKind {
        self.geometry
    }

    pub fn lattice(&self) -> Option<&Lattice> {
        self.lattice.as_ref()
    }

    /// Nearest representative of `z` modulo the period lattice.
    pub fn reduce(&self, z: Complex64) -> Complex64 {
        match (&self.geometry, &self.lattice) {
            (GeometryKind::Finite, _) => z,
            (GeometryKind::SinglyPeriodic, _) => Complex64::new(z.re - z.re.round(), z.im),
            (_, Some(l)) => l.reduce_centered(z).0,
            _ => unreachable!("doubly periodic kernel without lattice"),
        }
    }

    /// Representative in the stored fundamental domain.
    pub fn reduce_fundamental(&self, z: Complex64) -> Complex64 {
        match (&self.geometry, &self.lattice) {
            (GeometryKind::Finite, _) => z,
            (GeometryKind::SinglyPeriodic, _) => Complex64::new(wrap_unit(z.re), z.im),
            (_, Some(l)) => l.reduce_fundamental(z),
            _ => unreachable!("doubly periodic kernel without lattice"),
        }
    }

    /// Distance from `z` to the nearest lattice point.
    pub fn lattice_distance(&self, z: Complex64) -> f64 {
        self.reduce(z).norm()
    }

    pub fn upsilon(&self, z: Complex64) -> Result<Complex64> {
        match &self.lattice {
            Some(l) => l.upsilon(z),
            None => {
                let zr = self.reduce(z);
                if zr.norm() < SINGULAR_RADIUS {
                    return Err(Error::SingularInput { z });
                }
                Ok(match self.geometry {
                    GeometryKind::Finite => 1.0 / zr,
                    _ => PI * cot(PI * zr),
                })
            }
        }
    }

    pub fn wirtinger(&self, z: Complex64) -> Result<WirtingerPair> {
        let zero = Complex64::new(0.0, 0.0);
        match &self.lattice {
            Some(l) => l.upsilon_wirtinger(z),
            None => {
                let zr = self.reduce(z);
                if zr.norm() < SINGULAR_RADIUS {
                    return Err(Error::SingularInput { z });
                }
                let d_z = match self.geometry {
                    GeometryKind::Finite => -1.0 / (zr * zr),
                    _ => {
                        let ct = cot(PI * zr);
                        -PI * PI * (1.0 + ct * ct)
                    }
                };
                Ok(WirtingerPair { d_z, d_zbar: zero })
            }
        }
    }
}

pub fn upsilon(z: Complex64, g: GeometryKind) -> Result<Complex64> {
    Kernel::new(g)?.upsilon(z)
}

pub fn upsilon_wirtinger(z: Complex64, g: GeometryKind) -> Result<WirtingerPair> {
    Kernel::new(g)?.wirtinger(z)
}

pub fn weierstrass_zeta(z: Complex64, tau: Complex64) -> Result<Complex64> {
    Lattice::new(tau)?.zeta(z)
}

pub fn weierstrass_p(z: Complex64, tau: Complex64) -> Result<Complex64> {
    Lattice::new(tau)?.wp(z)
}

pub fn xi(z: Complex64, tau: Complex64) -> Result<Complex64> {
    Ok(Lattice::new(tau)?.xi(z))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Weierstrass sum over |m|,|n| ≤ n_max, lattice points paired with their
    /// negatives. Independent of the q-series path.
    fn lattice_sum_zeta(z: Complex64, tau: Complex64, n_max: i64) -> Complex64 {
        let mut acc = 1.0 / z;
        for m in 0..=n_max {
            for n in -n_max..=n_max {
                if m == 0 && n <= 0 {
                    continue;
                }
                let w = m as f64 + n as f64 * tau;
                // w and -w together
                acc += 1.0 / (z - w) + 1.0 / (z + w) + 2.0 * z / (w * w);
            }
        }
        acc
    }

    /// Lattice sum extrapolated over N = 100, 200, 400. The square-truncation
    /// tail behaves like c2/N² + c3/N³.
    fn zeta_oracle(z: Complex64, tau: Complex64) -> Complex64 {
        let a = lattice_sum_zeta(z, tau, 100);
        let b = lattice_sum_zeta(z, tau, 200);
        let c = lattice_sum_zeta(z, tau, 400);
        let r1 = (4.0 * b - a) / 3.0;
        let r2 = (4.0 * c - b) / 3.0;
        (8.0 * r2 - r1) / 7.0
    }

    #[test]
    fn finite_kernel_values() {
        assert_abs_diff_eq!(upsilon(c(2.0, 0.0), GeometryKind::Finite).unwrap().re, 0.5);
        let w = upsilon_wirtinger(c(1.0, 0.0), GeometryKind::Finite).unwrap();
        assert_eq!(w.d_z, c(-1.0, 0.0));
        assert_eq!(w.d_zbar, c(0.0, 0.0));
    }

    #[test]
    fn singly_kernel_values() {
        let g = GeometryKind::SinglyPeriodic;
        assert!(upsilon(c(0.5, 0.0), g).unwrap().norm() < 1e-15);
        let got = upsilon(c(0.5, 0.3), g).unwrap();
        let want = -I * PI * (0.3 * PI).tanh();
        assert!((got - want).norm() < 1e-14);
        // series oracle: π cot πz = 1/z + Σ_{k≥1} 2z/(z² − k²)
        let z = c(0.5, 0.3);
        let mut series = 1.0 / z;
        for k in 1..200_000 {
            let kf = k as f64;
            series += 2.0 * z / (z * z - kf * kf);
        }
        assert!((got - series).norm() < 1e-5);
    }

    #[test]
    fn singular_inputs_rejected() {
        assert!(matches!(
            upsilon(c(0.0, 0.0), GeometryKind::Finite),
            Err(Error::SingularInput { .. })
        ));
        assert!(matches!(
            upsilon(c(3.0, 0.0), GeometryKind::SinglyPeriodic),
            Err(Error::SingularInput { .. })
        ));
        let g = GeometryKind::doubly(c(0.2, 1.1)).unwrap();
        assert!(matches!(
            upsilon(c(1.2, 1.1), g),
            Err(Error::SingularInput { .. })
        ));
        assert!(matches!(
            weierstrass_zeta(c(0.3, 0.0), c(1.0, 0.0)),
            Err(Error::InvalidModulus { .. })
        ));
        assert!(matches!(
            xi(c(0.3, 0.0), c(1.0, -1.0)),
            Err(Error::InvalidModulus { .. })
        ));
    }

    #[test]
    fn zeta_matches_lattice_sum() {
        for tau in [c(0.0, 1.0), c(0.5, 1.0), c(-0.3, 0.7)] {
            for z in [c(0.2, 0.1), c(0.5, 0.0), tau / 2.0, c(-0.31, 0.27)] {
                let got = weierstrass_zeta(z, tau).unwrap();
                let want = zeta_oracle(z, tau);
                assert!(
                    (got - want).norm() < 1e-9,
                    "tau={tau} z={z} got={got} want={want}"
                );
            }
        }
    }

    #[test]
    fn legendre_relation() {
        for tau in [c(0.0, 1.0), c(0.5, 1.0)] {
            let l = Lattice::new(tau).unwrap();
            let (e1, e2) = l.half_period_zetas();
            assert!((e1 * tau - e2 - PI * I).norm() < 1e-13);
            // the same relation through the independent lattice sum
            let o1 = zeta_oracle(c(0.5, 0.0), tau);
            let o2 = zeta_oracle(tau / 2.0, tau);
            assert!((o1 * tau - o2 - PI * I).norm() < 1e-9);
        }
    }

    #[test]
    fn zeta_quasi_periodicity_and_oddness() {
        let tau = c(0.5, 1.0);
        let l = Lattice::new(tau).unwrap();
        let (e1, e2) = l.half_period_zetas();
        for z in [c(0.13, 0.21), c(-0.4, 0.33), c(0.9, -0.7)] {
            let a = l.zeta(z).unwrap();
            assert!((l.zeta(z + 1.0).unwrap() - a - 2.0 * e1).norm() < 1e-12);
            assert!((l.zeta(z + tau).unwrap() - a - 2.0 * e2).norm() < 1e-12);
            assert!((l.zeta(-z).unwrap() + a).norm() < 1e-12);
            let oracle_shift = zeta_oracle(z + 1.0, tau) - zeta_oracle(z, tau);
            assert!((oracle_shift - 2.0 * e1).norm() < 1e-9);
        }
    }

    #[test]
    fn wp_properties() {
        let tau = c(0.2, 0.9);
        let l = Lattice::new(tau).unwrap();
        for z in [c(0.13, 0.21), c(-0.4, 0.33)] {
            let p = l.wp(z).unwrap();
            assert!((l.wp(-z).unwrap() - p).norm() < 1e-11 * p.norm().max(1.0));
            assert!((l.wp(z + 1.0).unwrap() - p).norm() < 1e-11 * p.norm().max(1.0));
            let h = 1e-5;
            let fd = (l.zeta(z + h).unwrap() - l.zeta(z - h).unwrap()) / (2.0 * h);
            assert!((-fd - p).norm() < 1e-8 * p.norm().max(1.0));
        }
    }

    #[test]
    fn xi_values() {
        let tau = c(0.3, 1.2);
        let l = Lattice::new(tau).unwrap();
        let (e1, e2) = l.half_period_zetas();
        assert_eq!(l.xi(c(0.0, 0.0)), c(0.0, 0.0));
        assert!((l.xi(c(1.0, 0.0)) - 2.0 * e1).norm() < 1e-15);
        assert!((l.xi((1.0 + tau) / 2.0) - (e1 + e2)).norm() < 1e-14);
        // Wirtinger decomposition reproduces ξ
        let (c1, c2) = l.xi_coefficients();
        let z = c(0.37, -0.81);
        assert!((c1 * z + c2 * z.conj() - l.xi(z)).norm() < 1e-13);
    }

    #[test]
    fn doubly_upsilon_vanishes_at_half_periods() {
        let tau = c(0.0, 1.0);
        let g = GeometryKind::doubly(tau).unwrap();
        for z in [(1.0 + tau) / 2.0, c(0.5, 0.0), tau / 2.0] {
            assert!(upsilon(z, g).unwrap().norm() < 1e-13);
        }
        // and through the lattice-sum oracle
        let z = (1.0 + tau) / 2.0;
        let l = Lattice::new(tau).unwrap();
        let o = zeta_oracle(z, tau) - l.xi(z);
        assert!(o.norm() < 1e-9);
    }

    fn wirtinger_fd(k: &Kernel, z: Complex64, h: f64) -> WirtingerPair {
        let dx = (k.upsilon(z + h).unwrap() - k.upsilon(z - h).unwrap()) / (2.0 * h);
        let dy = (k.upsilon(z + I * h).unwrap() - k.upsilon(z - I * h).unwrap()) / (2.0 * h);
        WirtingerPair {
            d_z: (dx - I * dy) / 2.0,
            d_zbar: (dx + I * dy) / 2.0,
        }
    }

    #[test]
    fn wirtinger_matches_finite_differences() {
        let cases = [
            (GeometryKind::Finite, c(0.3, -0.2)),
            (GeometryKind::SinglyPeriodic, c(0.3, 0.0)),
            (GeometryKind::SinglyPeriodic, c(0.1, 0.4)),
            (GeometryKind::doubly(c(0.0, 1.0)).unwrap(), c(0.2, 0.1)),
            (GeometryKind::doubly(c(0.4, 0.8)).unwrap(), c(-0.3, 0.35)),
        ];
        for (g, z) in cases {
            let k = Kernel::new(g).unwrap();
            let a = k.wirtinger(z).unwrap();
            let f = wirtinger_fd(&k, z, 1e-5);
            assert!((a.d_z - f.d_z).norm() < 1e-7, "{g:?} {z}");
            assert!((a.d_zbar - f.d_zbar).norm() < 1e-7, "{g:?} {z}");
        }
    }

    #[test]
    fn laurent_compatibility() {
        let singly = Kernel::new(GeometryKind::SinglyPeriodic).unwrap();
        let doubly = Kernel::new(GeometryKind::doubly(c(0.1, 1.3)).unwrap()).unwrap();
        let mut prev = f64::INFINITY;
        for r in [1e-1, 1e-2, 1e-3, 1e-4] {
            let z = c(r, 0.5 * r);
            let ds = (singly.upsilon(z).unwrap() - 1.0 / z).norm();
            assert!(ds < prev);
            prev = ds;
            let dd = (doubly.upsilon(z).unwrap() - 1.0 / z).norm();
            assert!(dd < 10.0);
        }
        assert!(prev < 1e-3);
    }

    #[test]
    fn reduction_to_fundamental_domain() {
        let l = Lattice::new(c(0.3, 1.0)).unwrap();
        let z = c(2.7, -3.4);
        let r = l.reduce_fundamental(z);
        let (x, y) = l.coords(r);
        assert!((0.0..1.0).contains(&x) && (0.0..1.0).contains(&y));
        let (dx, dy) = l.coords(z - r);
        assert!((dx - dx.round()).abs() < 1e-12 && (dy - dy.round()).abs() < 1e-12);
    }
}
