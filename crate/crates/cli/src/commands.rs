//! Subcommand handlers. Each returns the `outputs` part of the run report.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use vcl_core::balance::{self, ClassKind};
use vcl_core::catalog::{self, DipoleFamily, KarmanFamily, RatioRoot};
use vcl_core::config::{parse_config, serialize_document, ConfigDocument};
use vcl_core::jacobian::{self, RankOptions, RANK_BALANCE_TOL};
use vcl_core::mesh::{self, MeshSettings};
use vcl_core::solver::{self, Gauge, MotionMode, SolveSettings};
use vcl_core::surface;
use vcl_core::symmetry::{self, SymmetryGroup, SYMMETRY_TOL};
use vcl_core::{Motion, VortexConfig};

use crate::args::*;

pub enum Failure {
    Usage(String),
    Io { path: PathBuf, message: String },
    Domain(vcl_core::Error),
}

impl From<vcl_core::Error> for Failure {
    fn from(e: vcl_core::Error) -> Self {
        Failure::Domain(e)
    }
}

/// Report contents plus an optional domain failure to signal after printing.
pub struct Outcome {
    pub input_digest: String,
    pub outputs: Value,
    pub failure: Option<vcl_core::Error>,
    /// Printed verbatim instead of a run report.
    pub raw: Option<String>,
}

impl Outcome {
    fn ok(input_digest: String, outputs: Value) -> Self {
        Outcome { input_digest, outputs, failure: None, raw: None }
    }
}

type Res<T> = Result<T, Failure>;

pub fn digest(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

fn read(path: &Path) -> Res<(String, String)> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let d = digest(text.as_bytes());
    Ok((text, d))
}

fn write(path: &Path, text: &str) -> Res<()> {
    fs::write(path, text).map_err(|e| Failure::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

fn load(path: &Path) -> Res<(ConfigDocument, String)> {
    let (text, d) = read(path)?;
    Ok((parse_config(&text)?, d))
}

/// The document's motion, or the least-squares fit when it has none.
fn motion_of(doc: &ConfigDocument) -> Res<Motion> {
    Ok(match doc.motion {
        Some(m) => m,
        None => balance::infer_motion(&doc.config)?,
    })
}

fn group_of(doc: &ConfigDocument) -> SymmetryGroup {
    doc.symmetry
        .clone()
        .unwrap_or_else(|| symmetry::detect_symmetries(&doc.config, SYMMETRY_TOL))
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report types serialize")
}

fn document(config: &VortexConfig, motion: &Motion, sym: Option<SymmetryGroup>) -> String {
    serialize_document(&ConfigDocument {
        config: config.clone(),
        motion: Some(*motion),
        symmetry: sym,
    })
}

pub fn generate(a: &GenerateArgs, argv_digest: String) -> Res<Outcome> {
    let mut sym = None;
    let (cfg, m) = match &a.family {
        Family::Pair => catalog::vortex_pair(),
        Family::Thomson { n, sigma } => catalog::thomson(*n, *sigma)?,
        Family::Centered { n, center_sigma } => catalog::polygon_with_center(*n, *center_sigma)?,
        Family::Hermite { n } => catalog::hermite_config(*n)?,
        Family::Interlaced { m } => catalog::interlaced_hermite(*m)?,
        Family::Nested { k, root } => {
            let r = match root {
                Root::Inner => RatioRoot::Inner,
                Root::Outer => RatioRoot::Outer,
            };
            catalog::nested_polygons_root(*k, r)?
        }
        Family::AdlerMoser { j } => {
            sym = Some(catalog::two_axis_group());
            catalog::adler_moser_config(*j)?
        }
        Family::Karman { b, aligned } => catalog::karman_street(*b, !aligned)?,
        Family::Dipole { tau_re, tau_im, offset_re, offset_im } => {
            let tau = Complex64::new(*tau_re, *tau_im);
            let center = (1.0 + tau) / 2.0;
            let offset = Complex64::new(offset_re.unwrap_or(center.re), offset_im.unwrap_or(center.im));
            catalog::doubly_dipole(tau, offset)?
        }
    };
    let text = document(&cfg, &m, sym);
    match &a.output {
        Some(path) => {
            write(path, &text)?;
            let class = balance::classify(&cfg, &m, 1e-10)?;
            Ok(Outcome::ok(
                argv_digest,
                json!({ "file": path, "class": to_value(&class), "motion": to_value(&m) }),
            ))
        }
        None => Ok(Outcome { raw: Some(text), ..Outcome::ok(argv_digest, Value::Null) }),
    }
}

pub fn check(a: &CheckArgs) -> Res<Outcome> {
    let (doc, d) = load(&a.config)?;
    let m = motion_of(&doc)?;
    let report = balance::report(&doc.config, &m, a.tol.tol)?;
    let failure = (!report.balanced).then(|| vcl_core::Error::NotBalanced {
        sup_norm: report.sup_norm,
        tol: a.tol.tol,
    });
    Ok(Outcome {
        failure,
        ..Outcome::ok(d, json!({ "motion": to_value(&m), "balance": to_value(&report) }))
    })
}

pub fn solve(a: &SolveArgs) -> Res<Outcome> {
    let (doc, d) = load(&a.config)?;
    let m = motion_of(&doc)?;
    let settings = SolveSettings {
        tol: a.tol.tol,
        max_iter: a.max_iter,
        damping: a.damping,
        gauge: if a.free_gauge { Gauge::Free } else { Gauge::Class },
        motion: if a.fit_motion { MotionMode::Fitted } else { MotionMode::Fixed },
        pins: a.pin.clone(),
    };
    let (sol, sym) = if a.symmetric {
        let g = group_of(&doc);
        let seed = symmetry::symmetrize(&doc.config, &g, 1e-3)?;
        (solver::refine_symmetric(&seed, &m, &g, &settings)?, Some(g))
    } else {
        (solver::refine(&doc.config, &m, &settings)?, doc.symmetry.clone())
    };
    let mut outputs = json!({
        "iterations": sol.iterations,
        "motion": to_value(&sol.motion),
        "balance": to_value(&sol.report),
    });
    if let Some(path) = &a.output {
        write(path, &document(&sol.config, &sol.motion, sym))?;
        outputs["file"] = json!(path);
    }
    Ok(Outcome::ok(d, outputs))
}

pub fn rank(a: &RankArgs) -> Res<Outcome> {
    let (doc, d) = load(&a.config)?;
    let m = motion_of(&doc)?;
    let class = balance::classify(&doc.config, &m, a.tol.tol.max(RANK_BALANCE_TOL))?;
    let opts = RankOptions {
        rel_tol: a.rel_tol,
        balance_tol: RANK_BALANCE_TOL,
    };
    let report = if a.symmetry {
        let g = group_of(&doc);
        jacobian::restricted_rank_report_with(&doc.config, &m, &class, &g, &opts)?
    } else {
        jacobian::rank_report_with(&doc.config, &m, &class, &opts)?
    };
    let failure = (a.require_nondegenerate && !report.nondegenerate)
        .then(|| vcl_core::Error::InconsistentClass(format!(
            "crystal is degenerate: rank {} of {}",
            report.rank, report.max_possible_rank
        )));
    Ok(Outcome {
        failure,
        ..Outcome::ok(
            d,
            json!({
                "class": to_value(&class),
                "degenerate": !report.nondegenerate,
                "rank": to_value(&report),
            }),
        )
    })
}

pub fn integrate(a: &IntegrateArgs) -> Res<Outcome> {
    if a.every == 0 {
        return Err(Failure::Usage("--every must be at least 1".into()));
    }
    let (doc, d) = load(&a.config)?;
    let traj = solver::integrate(&doc.config, a.t_end, a.dt)?;
    let drift = solver::rigidity_drift(&traj);
    let last = traj.motion_fit.last().copied().unwrap_or_default();
    let mut outputs = json!({
        "steps": traj.times.len() - 1,
        "rigidity_drift": drift,
        "final_motion_fit": to_value(&last),
    });
    if let Some(path) = &a.output {
        let keep: Vec<usize> = (0..traj.times.len())
            .filter(|&i| i % a.every == 0 || i + 1 == traj.times.len())
            .collect();
        let samples: Vec<Value> = keep
            .iter()
            .map(|&i| json!({ "t": traj.times[i], "positions": to_value(&traj.states[i]) }))
            .collect();
        let text = serde_json::to_string_pretty(&json!({ "samples": samples })).expect("json");
        write(path, &text)?;
        outputs["file"] = json!(path);
    }
    Ok(Outcome::ok(d, outputs))
}

pub fn sweep(a: &SweepArgs, argv_digest: String) -> Res<Outcome> {
    let expected = match a.family {
        SweepFamily::Karman | SweepFamily::KarmanAligned => "b",
        SweepFamily::Dipole => "s",
    };
    if a.param != expected {
        let family = clap::ValueEnum::to_possible_value(&a.family).expect("no skipped variants");
        return Err(Failure::Usage(format!(
            "family {} is swept in `{expected}`, not `{}`",
            family.get_name(),
            a.param
        )));
    }
    if a.steps == 0 {
        return Err(Failure::Usage("--steps must be at least 1".into()));
    }
    let points = match a.family {
        SweepFamily::Karman => solver::sweep(&KarmanFamily { staggered: true }, a.from, a.to, a.steps)?,
        SweepFamily::KarmanAligned => solver::sweep(&KarmanFamily { staggered: false }, a.from, a.to, a.steps)?,
        SweepFamily::Dipole => solver::sweep(&DipoleFamily, a.from, a.to, a.steps)?,
    };
    let rows: Vec<Value> = points
        .iter()
        .map(|p| {
            json!({
                "parameter": p.parameter,
                "motion": to_value(&p.motion),
                "rank": p.rank.rank,
                "max_possible_rank": p.rank.max_possible_rank,
                "nondegenerate": p.rank.nondegenerate,
            })
        })
        .collect();
    let transitions: Vec<Value> = solver::rank_transitions(&points)
        .iter()
        .map(|(t, from, to)| json!({ "parameter": t, "from": from, "to": to }))
        .collect();
    Ok(Outcome::ok(argv_digest, json!({ "points": rows, "transitions": transitions })))
}

pub fn field(a: &FieldArgs) -> Res<Outcome> {
    if a.grid < 2 {
        return Err(Failure::Usage("--grid must be at least 2".into()));
    }
    let (doc, d) = load(&a.config)?;
    let c = &doc.config;
    let hw = a.half_width.unwrap_or_else(|| MeshSettings::covering(c).half_width);
    let o = c.centroid();
    let csv = mesh::field_csv(c, (o.re - hw, o.re + hw), (o.im - hw, o.im + hw), a.grid, a.grid)?;
    write(&a.output, &csv)?;
    Ok(Outcome::ok(d, json!({ "file": a.output, "rows": csv.lines().count() - 1 })))
}

/// `out.obj` → `out.lines.obj`.
pub fn lines_path(p: &Path) -> PathBuf {
    let stem = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    p.with_file_name(format!("{stem}.lines.obj"))
}

pub fn mesh(a: &MeshArgs) -> Res<Outcome> {
    let (doc, d) = load(&a.config)?;
    let c = &doc.config;
    let base = MeshSettings::covering(c);
    let settings = MeshSettings {
        half_width: a.half_width.unwrap_or(base.half_width),
        cells: a.cells,
        turns: a.turns,
        exclusion: a.exclusion,
    };
    let m = mesh::build_mesh(c, &settings)?;
    write(&a.output, &m.to_obj())?;
    let lines = lines_path(&a.output);
    write(&lines, &m.segments_obj())?;
    let mut outputs = json!({
        "files": [a.output, lines],
        "vertices_per_sheet": m.vertices.len(),
        "faces_per_sheet": m.faces.len(),
        "dropped_faces": m.dropped,
        "settings": to_value(&settings),
    });
    // period data only makes sense for a crystal
    if let Ok(motion) = motion_of(&doc) {
        if let Ok(lp) = surface::limit_periods(c, &motion, a.eps) {
            outputs["limits"] = to_value(&lp);
        }
    }
    Ok(Outcome::ok(d, outputs))
}

pub fn limits(a: &LimitsArgs) -> Res<Outcome> {
    let (doc, d) = load(&a.config)?;
    let m = motion_of(&doc)?;
    let lp = surface::limit_periods(&doc.config, &m, a.eps)?;
    let kind = balance::motion_kind(&doc.config, &m, RANK_BALANCE_TOL);
    let kind = match kind {
        ClassKind::Rotating => "rotating",
        ClassKind::Translating => "translating",
        ClassKind::Stationary => "stationary",
    };
    Ok(Outcome::ok(d, json!({ "kind": kind, "limits": to_value(&lp) })))
}
