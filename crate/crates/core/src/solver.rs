//! Gauge-fixed Gauss–Newton refinement, RK4 integration of the free
//! dynamics, rigidity checks and continuation sweeps.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::balance::{self, BalanceReport, ClassKind};
use crate::config::{Motion, VortexConfig};
use crate::error::{Error, Result};
use crate::jacobian::{self, RankReport};
use crate::kernels::GeometryKind;
use crate::linalg;
use crate::symmetry::SymmetryGroup;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Pairwise distance below which integration aborts.
pub const COLLISION_DISTANCE: f64 = 1e-6;

const ARMIJO_C: f64 = 1e-4;
const MIN_STEP: f64 = 1e-10;
const PINV_CUT: f64 = 1e-10;

/// Whether the rigid motion is held fixed or solved for alongside the
/// positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MotionMode {
    Fixed,
    /// Finite: `v` and `ω`. Periodic: `v`.
    Fitted,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Gauge {
    /// No displacement along the trivial motions of the seed's class.
    Class,
    /// No gauge rows; only the explicit pins apply.
    Free,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveSettings {
    pub tol: f64,
    pub max_iter: usize,
    /// Initial Gauss–Newton step length, in `(0, 1]`.
    pub damping: f64,
    pub gauge: Gauge,
    pub motion: MotionMode,
    /// Real coordinates held fixed, indexed `2k` (Re pₖ) and `2k+1` (Im pₖ).
    pub pins: Vec<usize>,
}

impl Default for SolveSettings {
    fn default() -> Self {
        SolveSettings {
            tol: balance::DEFAULT_TOL,
            max_iter: 50,
            damping: 1.0,
            gauge: Gauge::Class,
            motion: MotionMode::Fixed,
            pins: Vec::new(),
        }
    }
}

impl SolveSettings {
    pub fn fitted(self) -> Self {
        SolveSettings {
            motion: MotionMode::Fitted,
            ..self
        }
    }

    pub fn with_tol(self, tol: f64) -> Self {
        SolveSettings { tol, ..self }
    }

    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidSettings(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_iter < 1 {
            return Err(Error::InvalidSettings("max_iter must be at least 1".into()));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::InvalidSettings(format!(
                "damping must lie in (0, 1], got {}",
                self.damping
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub config: VortexConfig,
    pub motion: Motion,
    pub report: BalanceReport,
    pub iterations: usize,
}

/// Unknowns `x = (Re p₁, Im p₁, …, [Re v, Im v, [ω]])`.
struct Problem<'a> {
    seed: &'a VortexConfig,
    motion: Motion,
    mode: MotionMode,
    fit_omega: bool,
}

impl Problem<'_> {
    fn n(&self) -> usize {
        self.seed.len()
    }

    fn n_motion(&self) -> usize {
        match (self.mode, self.fit_omega) {
            (MotionMode::Fixed, _) => 0,
            (MotionMode::Fitted, true) => 3,
            (MotionMode::Fitted, false) => 2,
        }
    }

    fn dim(&self) -> usize {
        2 * self.n() + self.n_motion()
    }

    fn pack(&self, ps: &[Complex64], m: &Motion) -> DVector<f64> {
        let mut x = DVector::zeros(self.dim());
        for (k, p) in ps.iter().enumerate() {
            x[2 * k] = p.re;
            x[2 * k + 1] = p.im;
        }
        let b = 2 * self.n();
        if self.n_motion() >= 2 {
            x[b] = m.v.re;
            x[b + 1] = m.v.im;
        }
        if self.n_motion() == 3 {
            x[b + 2] = m.omega;
        }
        x
    }

    fn unpack(&self, x: &DVector<f64>) -> (Vec<Complex64>, Motion) {
        let ps = (0..self.n())
            .map(|k| Complex64::new(x[2 * k], x[2 * k + 1]))
            .collect();
        let b = 2 * self.n();
        let mut m = self.motion;
        if self.n_motion() >= 2 {
            m.v = Complex64::new(x[b], x[b + 1]);
        }
        if self.n_motion() == 3 {
            m.omega = x[b + 2];
        }
        (ps, m)
    }

    fn residual(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        let (ps, m) = self.unpack(x);
        let f = balance::residual_at(self.seed, &ps, &m)?;
        Ok(DVector::from_iterator(
            2 * f.len(),
            f.iter().flat_map(|z| [z.re, z.im]),
        ))
    }

    fn jacobian(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        let (ps, m) = self.unpack(x);
        let jp = jacobian::analytic_jacobian_at(self.seed, &ps, &m)?;
        let n2 = 2 * self.n();
        let mut j = DMatrix::zeros(n2, self.dim());
        j.columns_mut(0, n2).copy_from(&jp);
        if self.n_motion() >= 2 {
            // F = −v̄ + …: ∂/∂Re v = −1, ∂/∂Im v = +i
            for k in 0..self.n() {
                j[(2 * k, n2)] = -1.0;
                j[(2 * k + 1, n2 + 1)] = 1.0;
            }
        }
        if self.n_motion() == 3 {
            // ∂/∂ω of iω p̄ is i p̄ = y + ix
            for (k, p) in ps.iter().enumerate() {
                j[(2 * k, n2 + 2)] = p.im;
                j[(2 * k + 1, n2 + 2)] = p.re;
            }
        }
        Ok(j)
    }

    /// Infinitesimal generators of the invariances of the residual at the
    /// seed.
    fn gauge_directions(&self, kind: ClassKind) -> DMatrix<f64> {
        let ps = self.seed.positions();
        let m = self.motion;
        let n = self.n();
        if self.mode == MotionMode::Fixed {
            let class = balance::CrystalClass {
                kind,
                n,
                n_plus: self.seed.n_plus(),
                n_minus: self.seed.n_minus(),
                m: self.seed.total_circulation(),
            };
            return jacobian::trivial_generators(self.seed, &m, &class);
        }
        let one = Complex64::new(1.0, 0.0);
        // (δp per vortex, δv, δω)
        let mut gens: Vec<(Vec<Complex64>, Complex64, f64)> = vec![
            (vec![one; n], -I * m.omega, 0.0),
            (vec![I; n], m.omega.into(), 0.0),
        ];
        if self.seed.geometry() == GeometryKind::Finite {
            gens.push((ps.iter().map(|p| I * p).collect(), I * m.v, 0.0));
            gens.push((ps.clone(), -m.v, -2.0 * m.omega));
        }
        let mut t = DMatrix::zeros(self.dim(), gens.len());
        let b = 2 * n;
        for (c, (dp, dv, dw)) in gens.iter().enumerate() {
            for (k, z) in dp.iter().enumerate() {
                t[(2 * k, c)] = z.re;
                t[(2 * k + 1, c)] = z.im;
            }
            t[(b, c)] = dv.re;
            t[(b + 1, c)] = dv.im;
            if self.n_motion() == 3 {
                t[(b + 2, c)] = *dw;
            }
        }
        t
    }
}

fn sup(r: &DVector<f64>) -> f64 {
    let mut s: f64 = 0.0;
    for k in 0..r.len() / 2 {
        s = s.max(r[2 * k].hypot(r[2 * k + 1]));
    }
    s
}

/// Gauss–Newton refinement of a near-crystal.
pub fn refine(c: &VortexConfig, m: &Motion, s: &SolveSettings) -> Result<Solution> {
    refine_in(c, m, s, None)
}

/// [`refine`] restricted to perturbations that commute with `g`. The seed
/// must already be `g`-symmetric (see [`crate::symmetry::symmetrize`]).
pub fn refine_symmetric(
    c: &VortexConfig,
    m: &Motion,
    g: &SymmetryGroup,
    s: &SolveSettings,
) -> Result<Solution> {
    let basis = jacobian::invariant_basis(c, g)?;
    refine_in(c, m, s, Some(basis))
}

fn refine_in(
    c: &VortexConfig,
    m: &Motion,
    s: &SolveSettings,
    subspace: Option<DMatrix<f64>>,
) -> Result<Solution> {
    s.validate()?;
    let motion0 = if c.geometry().is_periodic() {
        Motion::translating(m.v)
    } else {
        *m
    };
    let kind = balance::motion_kind(c, &motion0, s.tol);
    let problem = Problem {
        seed: c,
        motion: motion0,
        mode: s.motion,
        fit_omega: c.geometry() == GeometryKind::Finite,
    };
    let n2 = 2 * c.len();
    let dim = problem.dim();
    let x0 = problem.pack(&c.positions(), &motion0);
    let mut r = problem.residual(&x0)?;
    let mut f = sup(&r);
    if !f.is_finite() {
        return Err(Error::InvalidSettings("initial residual is not finite".into()));
    }
    let finish = |x: &DVector<f64>, iterations: usize| -> Result<Solution> {
        let (ps, mo) = problem.unpack(x);
        let config = if iterations == 0 { c.clone() } else { c.with_positions(&ps)? };
        let report = balance::report(&config, &mo, s.tol)?;
        Ok(Solution {
            config,
            motion: mo,
            report,
            iterations,
        })
    };
    if f <= s.tol {
        return finish(&x0, 0);
    }

    // feasible directions: symmetric subspace (motion coordinates free),
    // orthogonal to the gauge generators and the pins
    let ext = match &subspace {
        Some(v) => {
            let mut e = DMatrix::zeros(dim, v.ncols() + dim - n2);
            e.view_mut((0, 0), (n2, v.ncols())).copy_from(v);
            for k in 0..dim - n2 {
                e[(n2 + k, v.ncols() + k)] = 1.0;
            }
            e
        }
        None => DMatrix::identity(dim, dim),
    };
    let mut rows: Vec<DVector<f64>> = Vec::new();
    if s.gauge == Gauge::Class {
        let t = linalg::orth(&problem.gauge_directions(kind), 1e-12);
        for col in t.column_iter() {
            rows.push(col.into_owned());
        }
    }
    for &p in &s.pins {
        if p >= n2 {
            return Err(Error::InvalidSettings(format!("pin index {p} out of range")));
        }
        let mut e = DVector::zeros(dim);
        e[p] = 1.0;
        rows.push(e);
    }
    let basis = if rows.is_empty() {
        ext
    } else {
        let mut cm = DMatrix::zeros(rows.len(), dim);
        for (i, row) in rows.iter().enumerate() {
            cm.set_row(i, &row.transpose());
        }
        let restricted = &cm * &ext;
        &ext * linalg::nullspace(&restricted, 1e-12)
    };

    let mut x = x0.clone();
    for it in 0..s.max_iter {
        let j = problem.jacobian(&x)? * &basis;
        let sv = linalg::singular_values(&j);
        let smax = sv.first().copied().unwrap_or(0.0);
        if !(smax > 0.0) || !smax.is_finite() {
            return Err(Error::SingularSystem { singular_values: sv });
        }
        let dy = -linalg::pinv_solve(&j, &r, PINV_CUT);
        let dx = &basis * dy;
        let mut alpha = s.damping;
        let mut accepted = None;
        while alpha >= MIN_STEP {
            let trial = &x + alpha * &dx;
            if let Ok(rt) = problem.residual(&trial) {
                let ft = sup(&rt);
                if ft.is_finite() && ft <= (1.0 - ARMIJO_C * alpha) * f {
                    accepted = Some((trial, rt, ft));
                    break;
                }
            }
            alpha *= 0.5;
        }
        match accepted {
            Some((xt, rt, ft)) => {
                x = xt;
                r = rt;
                f = ft;
            }
            None => {
                return Err(Error::NoConvergence {
                    iterations: it,
                    sup_norm: f,
                })
            }
        }
        if f <= s.tol {
            return finish(&x, it + 1);
        }
    }
    Err(Error::NoConvergence {
        iterations: s.max_iter,
        sup_norm: f,
    })
}

/// Sampled trajectory of the free dynamics.
#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// Positions per sample, not reduced modulo the lattice.
    pub states: Vec<Vec<Complex64>>,
    #[serde(skip)]
    pub motion_fit: Vec<Motion>,
}

fn closest_pair(c: &VortexConfig, ps: &[Complex64]) -> Option<(usize, usize, f64)> {
    let mut best: Option<(usize, usize, f64)> = None;
    for i in 0..ps.len() {
        for j in i + 1..ps.len() {
            let d = c.kernel().lattice_distance(ps[i] - ps[j]);
            if best.map_or(true, |b| d < b.2) {
                best = Some((i, j, d));
            }
        }
    }
    best
}

fn fit_at(c: &VortexConfig, ps: &[Complex64]) -> Result<Motion> {
    balance::infer_motion(&c.with_positions(ps)?)
}

fn velocity_at(c: &VortexConfig, ps: &[Complex64]) -> Result<Vec<Complex64>> {
    Ok(balance::interaction_at(c, ps)?
        .into_iter()
        .map(|s| s.conj())
        .collect())
}

/// Classical RK4 with fixed step `dt`; the final step is shortened to land on
/// `t_end`. Aborts with `Collision` when two vortices come within
/// [`COLLISION_DISTANCE`].
pub fn integrate(c: &VortexConfig, t_end: f64, dt: f64) -> Result<Trajectory> {
    if !(dt > 0.0) || !(t_end >= 0.0) || !dt.is_finite() || !t_end.is_finite() {
        return Err(Error::InvalidSettings(format!(
            "need dt > 0 and t_end ≥ 0, got dt = {dt}, t_end = {t_end}"
        )));
    }
    let check = |ps: &[Complex64], t: f64| -> Result<()> {
        match closest_pair(c, ps) {
            Some((i, j, d)) if d < COLLISION_DISTANCE => Err(Error::Collision { time: t, i, j }),
            _ => Ok(()),
        }
    };
    let mut ps = c.positions();
    check(&ps, 0.0)?;
    let mut traj = Trajectory {
        times: vec![0.0],
        states: vec![ps.clone()],
        motion_fit: vec![fit_at(c, &ps)?],
    };
    let steps = (t_end / dt).ceil() as usize;
    let axpy = |a: &[Complex64], h: f64, k: &[Complex64]| -> Vec<Complex64> {
        a.iter().zip(k).map(|(x, y)| x + y * h).collect()
    };
    for step in 0..steps {
        let t = step as f64 * dt;
        let h = (t_end - t).min(dt);
        if h <= 0.0 {
            break;
        }
        let k1 = velocity_at(c, &ps)?;
        let k2 = velocity_at(c, &axpy(&ps, h / 2.0, &k1))?;
        let k3 = velocity_at(c, &axpy(&ps, h / 2.0, &k2))?;
        let k4 = velocity_at(c, &axpy(&ps, h, &k3))?;
        for i in 0..ps.len() {
            ps[i] += (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) * (h / 6.0);
        }
        let t_new = if step + 1 == steps { t_end } else { t + h };
        check(&ps, t_new)?;
        traj.times.push(t_new);
        traj.motion_fit.push(fit_at(c, &ps)?);
        traj.states.push(ps.clone());
    }
    Ok(traj)
}

/// Largest change of any pairwise distance along the trajectory.
pub fn rigidity_drift(traj: &Trajectory) -> f64 {
    let Some(first) = traj.states.first() else {
        return 0.0;
    };
    let n = first.len();
    let mut drift: f64 = 0.0;
    for state in &traj.states[1..] {
        for i in 0..n {
            for j in i + 1..n {
                let d0 = (first[i] - first[j]).norm();
                let d = (state[i] - state[j]).norm();
                drift = drift.max((d - d0).abs());
            }
        }
    }
    drift
}

/// A one-parameter family of crystals for continuation.
pub trait Family {
    /// Seed at `param`, optionally built from the previous refined point.
    fn seed(&self, param: f64, previous: Option<&SweepPoint>) -> Result<(VortexConfig, Motion)>;

    fn settings(&self, _param: f64) -> SolveSettings {
        SolveSettings::default()
    }
}

#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub parameter: f64,
    pub config: VortexConfig,
    pub motion: Motion,
    pub rank: RankReport,
}

/// Refine `steps` evenly spaced members of `family` over `[from, to]`, each
/// seeded from its predecessor.
pub fn sweep(family: &dyn Family, from: f64, to: f64, steps: usize) -> Result<Vec<SweepPoint>> {
    let mut out: Vec<SweepPoint> = Vec::with_capacity(steps);
    for i in 0..steps {
        let t = if steps == 1 {
            from
        } else {
            from + (to - from) * i as f64 / (steps - 1) as f64
        };
        let wrap = |e: Error| Error::Sweep {
            parameter: t,
            source: Box::new(e),
        };
        let (seed, m) = family.seed(t, out.last()).map_err(wrap)?;
        let settings = family.settings(t);
        let sol = refine(&seed, &m, &settings).map_err(wrap)?;
        let class = balance::classify(&sol.config, &sol.motion, settings.tol).map_err(wrap)?;
        let rank = jacobian::rank_report(&sol.config, &sol.motion, &class).map_err(wrap)?;
        out.push(SweepPoint {
            parameter: t,
            config: sol.config,
            motion: sol.motion,
            rank,
        });
    }
    Ok(out)
}

/// Parameters where the rank changes between consecutive sweep points, with
/// the ranks before and after.
pub fn rank_transitions(points: &[SweepPoint]) -> Vec<(f64, usize, usize)> {
    points
        .windows(2)
        .filter(|w| w[0].rank.rank != w[1].rank.rank)
        .map(|w| (w[1].parameter, w[0].rank.rank, w[1].rank.rank))
        .collect()
}
