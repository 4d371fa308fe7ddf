//! Adler–Moser polynomials and the translating crystals built from their
//! roots.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use super::poly::{self, Poly};
use crate::balance;
use crate::config::{Motion, VortexConfig};
use crate::error::{Error, Result};
use crate::kernels::GeometryKind;
use crate::solver::{refine_symmetric, SolveSettings};
use crate::symmetry::{symmetrize, Isometry, SymmetryGroup};

const I: Complex64 = Complex64::new(0.0, 1.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Largest index supported by [`adler_moser_config`].
pub const MAX_CONFIG_INDEX: usize = 8;
/// Roots closer than this are reported as a multiple root.
pub const ROOT_SEPARATION: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdlerMoserPoly {
    pub j: usize,
    /// Ascending coefficients, degree `j(j+1)/2`, monic.
    pub coefficients: Vec<Complex64>,
    /// `κ₂, …, κ_j`.
    pub kappa: Vec<Complex64>,
}

impl AdlerMoserPoly {
    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        poly::eval(&self.coefficients, z)
    }
}

fn triangular(j: usize) -> usize {
    j * (j + 1) / 2
}

/// `θ_{k+1}` from `θ′_{k+1}θ_{k−1} − θ_{k+1}θ′_{k−1} = (2k+1)θ_k²`, monic,
/// with the free coefficient at `z^{deg θ_{k−1}}` set to `kappa`.
fn ladder_step(prev: &[Complex64], cur: &[Complex64], k: usize, kappa: Complex64) -> Poly {
    let rhs = poly::scale(&poly::mul(cur, cur), ((2 * k + 1) as f64).into());
    let deg = triangular(k + 1);
    let dprev = poly::deriv(prev);
    let op = |t: &[Complex64]| {
        let a = poly::mul(&poly::deriv(t), prev);
        let b = poly::mul(t, &dprev);
        poly::add(&a, &poly::scale(&b, -ONE))
    };
    poly::solve_linear(deg, op, &rhs, &[(deg, ONE), (prev.len() - 1, kappa)])
}

fn theta(j: usize, kappa: &[Complex64]) -> Poly {
    let mut prev: Poly = vec![ONE];
    let mut cur: Poly = vec![Complex64::new(0.0, 0.0), ONE];
    if j == 0 {
        return prev;
    }
    for k in 1..j {
        let next = ladder_step(&prev, &cur, k, kappa[k - 1]);
        prev = std::mem::replace(&mut cur, next);
    }
    cur
}

/// The Adler–Moser polynomial `Θ_j` with parameters `κ₂, …, κ_j`.
pub fn adler_moser_poly(j: usize, kappa: &[Complex64]) -> Result<AdlerMoserPoly> {
    let expected = j.saturating_sub(1);
    if kappa.len() != expected {
        return Err(Error::ParameterCount {
            expected,
            got: kappa.len(),
        });
    }
    Ok(AdlerMoserPoly {
        j,
        coefficients: theta(j, kappa),
        kappa: kappa.to_vec(),
    })
}

/// Monic `Q` of the same degree as `p` with
/// `pQ″ + (2cp − 2p′)Q′ + (p″ − 2cp′)Q = 0`.
fn partner(p: &[Complex64], c: Complex64) -> Poly {
    let n = p.len() - 1;
    let dp = poly::deriv(p);
    let ddp = poly::deriv(&dp);
    let a1 = poly::add(&poly::scale(p, 2.0 * c), &poly::scale(&dp, (-2.0).into()));
    let a0 = poly::add(&ddp, &poly::scale(&dp, -2.0 * c));
    let op = |q: &[Complex64]| {
        let dq = poly::deriv(q);
        let t = poly::add(&poly::mul(p, &poly::deriv(&dq)), &poly::mul(&a1, &dq));
        poly::add(&t, &poly::mul(&a0, q))
    };
    poly::solve_linear(n, op, &[], &[(n, ONE)])
}

/// `θ_j(z − it)` with `κ_k = i^{2k−1} r_k`; `x = (t, r₂, …, r_j)`.
fn symmetric_poly(j: usize, x: &[f64]) -> Poly {
    let kappa: Vec<Complex64> = (2..=j)
        .map(|k| I.powu(2 * k as u32 - 1) * x[k - 1])
        .collect();
    poly::shift(&theta(j, &kappa), I * x[0])
}

/// Coefficients of `Q − P̄`, the `z^k` entry divided by `√N^{N−k}`.
fn defect(j: usize, x: &[f64]) -> DVector<f64> {
    let p = symmetric_poly(j, x);
    let q = partner(&p, I);
    let n = p.len() - 1;
    let l = (n as f64).sqrt();
    let mut out = DVector::zeros(2 * (n + 1));
    for k in 0..=n {
        let d = (q[k] - p[k].conj()) / l.powi((n - k) as i32);
        out[2 * k] = d.re;
        out[2 * k + 1] = d.im;
    }
    out
}

fn solve_parameters(j: usize, seed: &[f64]) -> Result<Vec<f64>> {
    let mut x = DVector::from_column_slice(seed);
    let mut f = defect(j, x.as_slice());
    for it in 0..100 {
        let norm = f.norm();
        if norm < 1e-13 {
            return Ok(x.as_slice().to_vec());
        }
        let mut jac = DMatrix::zeros(f.len(), x.len());
        for i in 0..x.len() {
            let h = 1e-7 * x[i].abs().max(1.0);
            let mut xp = x.clone();
            xp[i] += h;
            let mut xm = x.clone();
            xm[i] -= h;
            let col = (defect(j, xp.as_slice()) - defect(j, xm.as_slice())) / (2.0 * h);
            jac.set_column(i, &col);
        }
        let step = -crate::linalg::lstsq(&jac, &f);
        let mut alpha = 1.0;
        loop {
            let trial = &x + alpha * &step;
            let ft = defect(j, trial.as_slice());
            if ft.norm() < norm {
                x = trial;
                f = ft;
                break;
            }
            alpha *= 0.5;
            if alpha < 1e-10 {
                // stagnated at the floor of the defect evaluation
                if norm < 1e-9 {
                    return Ok(x.as_slice().to_vec());
                }
                return Err(Error::NoConvergence {
                    iterations: it,
                    sup_norm: norm,
                });
            }
        }
    }
    Err(Error::NoConvergence {
        iterations: 100,
        sup_norm: f.norm(),
    })
}

/// Positive vortices at the roots of `p`, negative ones at their
/// conjugates, in the frame where each point feels `Σ σ/(a − b) = i`.
fn points(p: &[Complex64]) -> (Vec<Complex64>, Vec<i8>) {
    let r = poly::roots(p);
    let n = r.len();
    let mut ps = r.clone();
    ps.extend(r.iter().map(|z| z.conj()));
    let mut sig = vec![1i8; n];
    sig.extend(vec![-1i8; n]);
    (ps, sig)
}

fn frame_merit(ps: &[Complex64], sig: &[i8]) -> f64 {
    let mut worst: f64 = 0.0;
    for (a, &pa) in ps.iter().enumerate() {
        let mut s = -I;
        for (b, &pb) in ps.iter().enumerate() {
            if a != b {
                s += sig[b] as f64 / (pa - pb);
            }
        }
        worst = worst.max(s.norm());
    }
    if worst.is_finite() {
        worst
    } else {
        f64::INFINITY
    }
}

/// Fix the last parameter by minimizing the point-space merit over its
/// magnitude, keeping the earlier ones.
fn scan_last(j: usize, prev: &[f64]) -> Vec<f64> {
    let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
    let merit = |log_mag: f64| {
        let mut x = prev.to_vec();
        x.push(sign * log_mag.exp());
        let (ps, sig) = points(&symmetric_poly(j, &x));
        frame_merit(&ps, &sig)
    };
    let (lo, hi, count) = (1e2f64.ln(), 1e13f64.ln(), 221);
    let grid: Vec<f64> = (0..count)
        .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
        .collect();
    let vals: Vec<f64> = grid.iter().map(|&g| merit(g)).collect();
    let best = (0..count).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap_or(0);
    let (mut a, mut b) = (grid[best.saturating_sub(1)], grid[(best + 1).min(count - 1)]);
    // golden section
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (merit(c), merit(d));
    while b - a > 1e-12 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = merit(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = merit(d);
        }
    }
    let mut x = prev.to_vec();
    x.push(sign * (0.5 * (a + b)).exp());
    x
}

/// Symmetric parameters `(t, r₂, …, r_j)`; each index is seeded from the
/// previous one.
fn symmetric_parameters(j: usize) -> Result<Vec<f64>> {
    let mut x = solve_parameters(1, &[0.0])?;
    for k in 2..=j {
        x = if k <= 5 {
            let mut seed = x.clone();
            seed.push(0.0);
            solve_parameters(k, &seed)?
        } else {
            scan_last(k, &x)
        };
    }
    Ok(x)
}

/// Reflections across both axes: the real axis exchanges the two signs, the
/// imaginary axis keeps them.
pub fn two_axis_group() -> SymmetryGroup {
    let zero = Complex64::new(0.0, 0.0);
    SymmetryGroup {
        elements: vec![
            Isometry::reflection(zero, 0.0, false),
            Isometry::reflection(zero, PI / 2.0, true),
            Isometry::rotation(zero, PI, false),
        ],
    }
}

/// Positive vortices at the roots of the symmetric `Θ_j`, negative ones at
/// the roots of its partner, translating with `v = 1`.
pub fn adler_moser_config(j: usize) -> Result<(VortexConfig, Motion)> {
    if !(1..=MAX_CONFIG_INDEX).contains(&j) {
        return Err(Error::OutOfRange(format!(
            "Adler–Moser index must be in 1..={MAX_CONFIG_INDEX}, got {j}"
        )));
    }
    let x = symmetric_parameters(j)?;
    let (ps, sig) = points(&symmetric_poly(j, &x));
    let mut separation = f64::INFINITY;
    for a in 0..ps.len() {
        for b in a + 1..ps.len() {
            separation = separation.min((ps[a] - ps[b]).norm());
        }
    }
    if separation < ROOT_SEPARATION {
        return Err(Error::MultipleRoot { separation });
    }
    let scaled: Vec<Complex64> = ps.iter().map(|p| p / (2.0 * PI)).collect();
    let cfg = VortexConfig::from_parts(GeometryKind::Finite, &scaled, &sig)?;
    let motion = Motion::translating(ONE);
    let group = two_axis_group();
    let cfg = symmetrize(&cfg, &group, 1e-6)?;
    if balance::sup_norm(&balance::residual(&cfg, &motion)?) <= super::FINAL_TOL {
        return Ok((cfg, motion));
    }
    let settings = SolveSettings::default().with_tol(super::FINAL_TOL);
    let sol = refine_symmetric(&cfg, &motion, &group, &settings)?;
    Ok((sol.config, sol.motion))
}
