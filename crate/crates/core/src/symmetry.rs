//! Planar isometries acting on configurations, and detection of the
//! dihedral / half-lattice symmetries of a configuration.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::config::VortexConfig;
use crate::error::{Error, Result};
use crate::kernels::GeometryKind;

/// Default matching tolerance for symmetry checks.
pub const SYMMETRY_TOL: f64 = 1e-9;

/// `z ↦ linear·z + offset`, or `z ↦ linear·z̄ + offset` when `conjugate`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Isometry {
    pub linear: Complex64,
    pub conjugate: bool,
    pub offset: Complex64,
    pub circulation_preserving: bool,
}

impl Isometry {
    pub fn rotation(center: Complex64, angle: f64, circulation_preserving: bool) -> Self {
        let a = Complex64::from_polar(1.0, angle);
        Isometry {
            linear: a,
            conjugate: false,
            offset: center - a * center,
            circulation_preserving,
        }
    }

    /// Reflection across the line through `point` at angle `angle` to the
    /// real axis.
    pub fn reflection(point: Complex64, angle: f64, circulation_preserving: bool) -> Self {
        let a = Complex64::from_polar(1.0, 2.0 * angle);
        Isometry {
            linear: a,
            conjugate: true,
            offset: point - a * point.conj(),
            circulation_preserving,
        }
    }

    pub fn translation(offset: Complex64, circulation_preserving: bool) -> Self {
        Isometry {
            linear: Complex64::new(1.0, 0.0),
            conjugate: false,
            offset,
            circulation_preserving,
        }
    }

    pub fn apply(&self, z: Complex64) -> Complex64 {
        self.apply_linear(z) + self.offset
    }

    /// Action on displacements.
    pub fn apply_linear(&self, w: Complex64) -> Complex64 {
        if self.conjugate {
            self.linear * w.conj()
        } else {
            self.linear * w
        }
    }

    /// Real 2×2 matrix of the linear part, row-major.
    pub fn linear_matrix(&self) -> [[f64; 2]; 2] {
        let (ar, ai) = (self.linear.re, self.linear.im);
        if self.conjugate {
            [[ar, ai], [ai, -ar]]
        } else {
            [[ar, -ai], [ai, ar]]
        }
    }
}

/// A finite symmetry group, stored as its non-identity elements.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct SymmetryGroup {
    pub elements: Vec<Isometry>,
}

impl SymmetryGroup {
    pub fn trivial() -> Self {
        SymmetryGroup::default()
    }

    /// Group order, counting the identity.
    pub fn order(&self) -> usize {
        self.elements.len() + 1
    }

    pub fn is_trivial(&self) -> bool {
        self.elements.is_empty()
    }
}

/// Permutation `π` with `g(p_k) ≡ p_{π(k)}` and matching circulation action,
/// or `None` if `g` is not a symmetry within `tol`.
pub fn match_permutation(c: &VortexConfig, g: &Isometry, tol: f64) -> Option<Vec<usize>> {
    let vs = c.vortices();
    let kernel = c.kernel();
    let mut perm = Vec::with_capacity(vs.len());
    let mut used = vec![false; vs.len()];
    for v in vs {
        let q = g.apply(v.p);
        let want = if g.circulation_preserving { v.sigma } else { -v.sigma };
        let hit = vs
            .iter()
            .enumerate()
            .filter(|(j, w)| !used[*j] && w.sigma == want)
            .map(|(j, w)| (j, kernel.lattice_distance(q - w.p)))
            .filter(|(_, d)| *d < tol)
            .min_by(|a, b| a.1.total_cmp(&b.1))?;
        used[hit.0] = true;
        perm.push(hit.0);
    }
    Some(perm)
}

/// Permutations for every element of `g`; fails with `NotASymmetry`
/// naming the first offending element.
pub fn verify(c: &VortexConfig, g: &SymmetryGroup, tol: f64) -> Result<Vec<Vec<usize>>> {
    g.elements
        .iter()
        .enumerate()
        .map(|(index, e)| match_permutation(c, e, tol).ok_or(Error::NotASymmetry { index }))
        .collect()
}

fn same_map(a: &Isometry, b: &Isometry, c: &VortexConfig) -> bool {
    a.conjugate == b.conjugate
        && (a.linear - b.linear).norm() < 1e-12
        && c.kernel().lattice_distance(a.offset - b.offset) < 1e-12
}

fn candidates(c: &VortexConfig) -> Vec<Isometry> {
    let mut out: Vec<Isometry> = Vec::new();
    let push = |iso: Isometry, out: &mut Vec<Isometry>| {
        if !out.iter().any(|o| same_map(o, &iso, c)) {
            out.push(iso);
        }
    };
    match c.geometry() {
        GeometryKind::Finite => {
            let center = c.centroid();
            let n = c.len().max(1);
            for big_n in 1..=n {
                for j in 1..big_n {
                    let iso = Isometry::rotation(center, 2.0 * PI * j as f64 / big_n as f64, true);
                    push(iso, &mut out);
                }
                for j in 0..big_n {
                    let iso = Isometry::reflection(center, PI * j as f64 / big_n as f64, true);
                    push(iso, &mut out);
                }
            }
        }
        GeometryKind::SinglyPeriodic => {
            push(Isometry::translation(Complex64::new(0.5, 0.0), true), &mut out);
        }
        GeometryKind::DoublyPeriodic { tau } => {
            for off in [Complex64::new(0.5, 0.0), tau / 2.0, (1.0 + tau) / 2.0] {
                push(Isometry::translation(off, true), &mut out);
            }
        }
    }
    out
}

/// All candidate isometries (centroid-centered dihedral elements, or
/// half-lattice translations) that map `c` to itself within `tol`, each
/// tagged with its circulation action.
pub fn detect_symmetries(c: &VortexConfig, tol: f64) -> SymmetryGroup {
    let mut elements = Vec::new();
    for cand in candidates(c) {
        for preserving in [true, false] {
            let iso = Isometry {
                circulation_preserving: preserving,
                ..cand
            };
            if match_permutation(c, &iso, tol).is_some() {
                elements.push(iso);
                break;
            }
        }
    }
    SymmetryGroup { elements }
}

/// Project positions onto the fixed set of `g` by averaging each vortex over
/// its orbit. Vortices are matched with the loose tolerance `match_tol`, so
/// slightly perturbed configurations can be re-symmetrized.
pub fn symmetrize(c: &VortexConfig, g: &SymmetryGroup, match_tol: f64) -> Result<VortexConfig> {
    let perms = verify(c, g, match_tol)?;
    let ps = c.positions();
    let kernel = c.kernel();
    let order = g.order() as f64;
    let out: Vec<Complex64> = (0..ps.len())
        .map(|k| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (iso, perm) in g.elements.iter().zip(&perms) {
                // iso⁻¹ applied to the partner of k
                let w = (ps[perm[k]] - iso.offset) / iso.linear;
                let back = if iso.conjugate { w.conj() } else { w };
                acc += kernel.reduce(back - ps[k]);
            }
            ps[k] + acc / order
        })
        .collect();
    c.with_positions(&out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetrize_restores_heptagon() {
        let cfg = polygon(7);
        let g = detect_symmetries(&cfg, SYMMETRY_TOL);
        let noisy: Vec<_> = cfg
            .positions()
            .iter()
            .enumerate()
            .map(|(k, p)| p + c(1e-3 * (k as f64).sin(), 1e-3 * (k as f64 * 1.7).cos()))
            .collect();
        let noisy = cfg.with_positions(&noisy).unwrap();
        assert!(verify(&noisy, &g, SYMMETRY_TOL).is_err());
        let sym = symmetrize(&noisy, &g, 0.1).unwrap();
        assert!(verify(&sym, &g, 1e-13).is_ok());
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn polygon(n: usize) -> VortexConfig {
        let ps: Vec<_> = (0..n)
            .map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64))
            .collect();
        VortexConfig::from_parts(GeometryKind::Finite, &ps, &vec![1; n]).unwrap()
    }

    #[test]
    fn heptagon_has_d7() {
        let cfg = polygon(7);
        let g = detect_symmetries(&cfg, SYMMETRY_TOL);
        assert_eq!(g.order(), 14);
        assert!(g.elements.iter().all(|e| e.circulation_preserving));
        assert_eq!(verify(&cfg, &g, SYMMETRY_TOL).unwrap().len(), 13);
    }

    #[test]
    fn pair_reflections() {
        let a = 1.0 / (4.0 * PI);
        let cfg = VortexConfig::from_parts(GeometryKind::Finite, &[c(0.0, a), c(0.0, -a)], &[1, -1])
            .unwrap();
        let g = detect_symmetries(&cfg, SYMMETRY_TOL);
        let real_axis = g.elements.iter().find(|e| e.conjugate && (e.linear - 1.0).norm() < 1e-12);
        let imag_axis = g.elements.iter().find(|e| e.conjugate && (e.linear + 1.0).norm() < 1e-12);
        assert!(!real_axis.unwrap().circulation_preserving);
        assert!(imag_axis.unwrap().circulation_preserving);
    }

    #[test]
    fn generic_config_has_no_symmetry() {
        let cfg = VortexConfig::from_parts(
            GeometryKind::Finite,
            &[c(0.0, 0.0), c(1.0, 0.1), c(0.3, 0.9), c(-0.7, 0.4)],
            &[1, 1, -1, 1],
        )
        .unwrap();
        assert!(detect_symmetries(&cfg, SYMMETRY_TOL).is_trivial());
    }

    #[test]
    fn dipole_half_lattice_translation() {
        let tau = c(0.0, 1.0);
        let cfg = VortexConfig::from_parts(
            GeometryKind::doubly(tau).unwrap(),
            &[c(0.0, 0.0), (1.0 + tau) / 2.0],
            &[1, -1],
        )
        .unwrap();
        let g = detect_symmetries(&cfg, SYMMETRY_TOL);
        assert_eq!(g.elements.len(), 1);
        assert!(!g.elements[0].circulation_preserving);
    }

    #[test]
    fn verify_rejects_non_symmetry() {
        let cfg = polygon(5);
        let g = SymmetryGroup {
            elements: vec![Isometry::rotation(c(0.0, 0.0), 0.1, true)],
        };
        assert_eq!(verify(&cfg, &g, SYMMETRY_TOL), Err(Error::NotASymmetry { index: 0 }));
    }

    #[test]
    fn linear_matrix_matches_action() {
        let g = Isometry::reflection(c(0.2, 0.1), 0.7, true);
        let m = g.linear_matrix();
        let w = c(0.3, -1.1);
        let img = g.apply_linear(w);
        assert!((m[0][0] * w.re + m[0][1] * w.im - img.re).abs() < 1e-15);
        assert!((m[1][0] * w.re + m[1][1] * w.im - img.im).abs() < 1e-15);
        assert!((g.apply(g.apply(w)) - w).norm() < 1e-15);
    }
}
