//! Vortex configurations, rigid motions, the JSON document format and the
//! per-class normalizations.

use num_complex::Complex64;
use serde::Serialize;
use serde_json::value::RawValue;
use serde_json::{Map, Value};

use crate::balance::{self, ClassKind};
use crate::error::{Error, Result};
use crate::kernels::{GeometryKind, Kernel};
use crate::symmetry::{Isometry, SymmetryGroup};

/// Minimum admissible distance between two vortices (modulo the lattice).
pub const MIN_SEPARATION: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vortex {
    pub p: Complex64,
    pub sigma: i8,
}

impl Vortex {
    pub fn new(p: Complex64, sigma: i8) -> Self {
        Vortex { p, sigma }
    }
}

/// Rigid motion `dp/dt = v + iωp`. `omega` is zero in periodic geometries.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Motion {
    pub v: Complex64,
    pub omega: f64,
}

impl Motion {
    pub fn new(v: Complex64, omega: f64) -> Self {
        Motion { v, omega }
    }

    pub fn translating(v: Complex64) -> Self {
        Motion { v, omega: 0.0 }
    }

    pub fn rotating(omega: f64) -> Self {
        Motion {
            v: Complex64::new(0.0, 0.0),
            omega,
        }
    }

    pub fn at_rest() -> Self {
        Motion::default()
    }

    /// Velocity of the rigid motion at `p`.
    pub fn velocity_at(&self, p: Complex64) -> Complex64 {
        self.v + Complex64::new(0.0, self.omega) * p
    }
}

/// A validated configuration. Periodic positions are stored reduced to the
/// fundamental domain (lattice coordinates in `[0, 1)`).
#[derive(Debug, Clone)]
pub struct VortexConfig {
    kernel: Kernel,
    vortices: Vec<Vortex>,
}

impl PartialEq for VortexConfig {
    fn eq(&self, other: &Self) -> bool {
        self.kernel.geometry() == other.kernel.geometry() && self.vortices == other.vortices
    }
}

impl VortexConfig {
    pub fn new(geometry: GeometryKind, vortices: Vec<Vortex>) -> Result<Self> {
        let kernel = Kernel::new(geometry)?;
        if vortices.is_empty() {
            return Err(Error::invalid("vortices", "at least one vortex is required"));
        }
        let mut vortices = vortices;
        for (k, v) in vortices.iter_mut().enumerate() {
            if v.sigma != 1 && v.sigma != -1 {
                return Err(Error::invalid(
                    format!("vortices[{k}].sigma"),
                    format!("circulation must be +1 or -1, got {}", v.sigma),
                ));
            }
            if !(v.p.re.is_finite() && v.p.im.is_finite()) {
                return Err(Error::invalid(format!("vortices[{k}].p"), "non-finite position"));
            }
            v.p = kernel.reduce_fundamental(v.p);
        }
        for i in 0..vortices.len() {
            for j in i + 1..vortices.len() {
                if kernel.lattice_distance(vortices[i].p - vortices[j].p) <= MIN_SEPARATION {
                    return Err(Error::CoincidentVortices { i, j });
                }
            }
        }
        Ok(VortexConfig { kernel, vortices })
    }

    pub fn from_parts(geometry: GeometryKind, positions: &[Complex64], sigmas: &[i8]) -> Result<Self> {
        assert_eq!(positions.len(), sigmas.len(), "positions and circulations differ in length");
        let vortices = positions
            .iter()
            .zip(sigmas)
            .map(|(&p, &s)| Vortex::new(p, s))
            .collect();
        VortexConfig::new(geometry, vortices)
    }

    /// Same circulations and geometry, new positions.
    pub fn with_positions(&self, positions: &[Complex64]) -> Result<Self> {
        assert_eq!(positions.len(), self.len(), "position count mismatch");
        VortexConfig::from_parts(self.geometry(), positions, &self.sigmas())
    }

    pub fn geometry(&self) -> GeometryKind {
        self.kernel.geometry()
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn vortices(&self) -> &[Vortex] {
        &self.vortices
    }

    pub fn len(&self) -> usize {
        self.vortices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vortices.is_empty()
    }

    pub fn positions(&self) -> Vec<Complex64> {
        self.vortices.iter().map(|v| v.p).collect()
    }

    pub fn sigmas(&self) -> Vec<i8> {
        self.vortices.iter().map(|v| v.sigma).collect()
    }

    pub fn n_plus(&self) -> usize {
        self.vortices.iter().filter(|v| v.sigma > 0).count()
    }

    pub fn n_minus(&self) -> usize {
        self.len() - self.n_plus()
    }

    /// Total circulation `m = n₊ − n₋`.
    pub fn total_circulation(&self) -> i64 {
        self.n_plus() as i64 - self.n_minus() as i64
    }

    /// `Σ σₖ pₖ`
    pub fn weighted_sum(&self) -> Complex64 {
        self.vortices.iter().map(|v| v.p * v.sigma as f64).sum()
    }

    pub fn centroid(&self) -> Complex64 {
        self.vortices.iter().map(|v| v.p).sum::<Complex64>() / self.len() as f64
    }

    /// Smallest pairwise distance, measured modulo the lattice.
    pub fn min_separation(&self) -> f64 {
        let mut best = f64::INFINITY;
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                best = best.min(self.kernel.lattice_distance(self.vortices[i].p - self.vortices[j].p));
            }
        }
        best
    }
}

/// A parsed configuration document.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigDocument {
    pub config: VortexConfig,
    pub motion: Option<Motion>,
    pub symmetry: Option<SymmetryGroup>,
}

fn get<'a>(obj: &'a Map<String, Value>, key: &str, path: &str) -> Result<&'a Value> {
    obj.get(key)
        .ok_or_else(|| Error::schema(join(path, key), "missing field"))
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

fn as_object<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>> {
    v.as_object()
        .ok_or_else(|| Error::schema(path, "expected an object"))
}

fn as_f64(v: &Value, path: &str) -> Result<f64> {
    v.as_f64().ok_or_else(|| Error::schema(path, "expected a number"))
}

fn as_complex(v: &Value, path: &str) -> Result<Complex64> {
    match v.as_array() {
        Some(a) if a.len() == 2 => Ok(Complex64::new(
            as_f64(&a[0], &format!("{path}[0]"))?,
            as_f64(&a[1], &format!("{path}[1]"))?,
        )),
        _ => Err(Error::schema(path, "expected [re, im]")),
    }
}

fn as_bool(v: &Value, path: &str) -> Result<bool> {
    v.as_bool().ok_or_else(|| Error::schema(path, "expected a boolean"))
}

fn parse_geometry(v: &Value) -> Result<GeometryKind> {
    let obj = as_object(v, "geometry")?;
    let kind = get(obj, "kind", "geometry")?
        .as_str()
        .ok_or_else(|| Error::schema("geometry.kind", "expected a string"))?;
    match kind {
        "finite" => Ok(GeometryKind::Finite),
        "singly" => Ok(GeometryKind::SinglyPeriodic),
        "doubly" => {
            let tau = as_complex(get(obj, "tau", "geometry")?, "geometry.tau")?;
            GeometryKind::doubly(tau)
        }
        other => Err(Error::schema(
            "geometry.kind",
            format!("unknown geometry `{other}` (expected finite, singly or doubly)"),
        )),
    }
}

fn parse_isometry(v: &Value, path: &str) -> Result<Isometry> {
    let obj = as_object(v, path)?;
    Ok(Isometry {
        linear: as_complex(get(obj, "linear", path)?, &join(path, "linear"))?,
        conjugate: as_bool(get(obj, "conjugate", path)?, &join(path, "conjugate"))?,
        offset: as_complex(get(obj, "offset", path)?, &join(path, "offset"))?,
        circulation_preserving: as_bool(
            get(obj, "circulation_preserving", path)?,
            &join(path, "circulation_preserving"),
        )?,
    })
}

/// Parse and validate a configuration document.
pub fn parse_config(text: &str) -> Result<ConfigDocument> {
    let root: Value =
        serde_json::from_str(text).map_err(|e| Error::schema("", format!("malformed document: {e}")))?;
    let obj = as_object(&root, "")?;
    let geometry = parse_geometry(get(obj, "geometry", "")?)?;
    let list = get(obj, "vortices", "")?
        .as_array()
        .ok_or_else(|| Error::schema("vortices", "expected a list"))?;
    if list.is_empty() {
        return Err(Error::schema("vortices", "list must not be empty"));
    }
    let mut vortices = Vec::with_capacity(list.len());
    for (k, item) in list.iter().enumerate() {
        let path = format!("vortices[{k}]");
        let o = as_object(item, &path)?;
        let p = as_complex(get(o, "p", &path)?, &join(&path, "p"))?;
        let sigma_path = join(&path, "sigma");
        let sigma = get(o, "sigma", &path)?;
        let sigma = sigma
            .as_i64()
            .or_else(|| sigma.as_f64().filter(|x| x.fract() == 0.0).map(|x| x as i64))
            .ok_or_else(|| Error::schema(&sigma_path, "expected an integer"))?;
        if sigma != 1 && sigma != -1 {
            return Err(Error::invalid(
                sigma_path,
                format!("circulation must be +1 or -1, got {sigma}"),
            ));
        }
        vortices.push(Vortex::new(p, sigma as i8));
    }
    let config = VortexConfig::new(geometry, vortices)?;
    let motion = match obj.get("motion") {
        None | Some(Value::Null) => None,
        Some(m) => {
            let mo = as_object(m, "motion")?;
            let v = match mo.get("v") {
                Some(v) => as_complex(v, "motion.v")?,
                None => Complex64::new(0.0, 0.0),
            };
            let omega = match mo.get("omega") {
                Some(w) => as_f64(w, "motion.omega")?,
                None => 0.0,
            };
            if geometry.is_periodic() && omega != 0.0 {
                return Err(Error::invalid(
                    "motion.omega",
                    "angular velocity must be zero in periodic geometries",
                ));
            }
            Some(Motion { v, omega })
        }
    };
    let symmetry = match obj.get("symmetry") {
        None | Some(Value::Null) => None,
        Some(s) => {
            let so = as_object(s, "symmetry")?;
            let elems = get(so, "elements", "symmetry")?
                .as_array()
                .ok_or_else(|| Error::schema("symmetry.elements", "expected a list"))?;
            let elements = elems
                .iter()
                .enumerate()
                .map(|(k, e)| parse_isometry(e, &format!("symmetry.elements[{k}]")))
                .collect::<Result<Vec<_>>>()?;
            Some(SymmetryGroup { elements })
        }
    };
    Ok(ConfigDocument {
        config,
        motion,
        symmetry,
    })
}

type Num = Box<RawValue>;

fn num(x: f64) -> Num {
    // 17 significant digits round-trip every finite double
    RawValue::from_string(format!("{x:.16e}")).expect("formatted float is valid JSON")
}

fn cnum(z: Complex64) -> [Num; 2] {
    [num(z.re), num(z.im)]
}

#[derive(Serialize)]
struct GeometryDoc {
    kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    tau: Option<[Num; 2]>,
}

#[derive(Serialize)]
struct VortexDoc {
    p: [Num; 2],
    sigma: i8,
}

#[derive(Serialize)]
struct MotionDoc {
    v: [Num; 2],
    omega: Num,
}

#[derive(Serialize)]
struct IsometryDoc {
    linear: [Num; 2],
    conjugate: bool,
    offset: [Num; 2],
    circulation_preserving: bool,
}

#[derive(Serialize)]
struct SymmetryDoc {
    elements: Vec<IsometryDoc>,
}

#[derive(Serialize)]
struct Document {
    geometry: GeometryDoc,
    vortices: Vec<VortexDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    motion: Option<MotionDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    symmetry: Option<SymmetryDoc>,
}

/// Encode a full document. Numbers carry 17 significant digits.
pub fn serialize_document(doc: &ConfigDocument) -> String {
    let g = doc.config.geometry();
    let d = Document {
        geometry: GeometryDoc {
            kind: g.name(),
            tau: match g {
                GeometryKind::DoublyPeriodic { tau } => Some(cnum(tau)),
                _ => None,
            },
        },
        vortices: doc
            .config
            .vortices()
            .iter()
            .map(|v| VortexDoc {
                p: cnum(v.p),
                sigma: v.sigma,
            })
            .collect(),
        motion: doc.motion.map(|m| MotionDoc {
            v: cnum(m.v),
            omega: num(m.omega),
        }),
        symmetry: doc.symmetry.as_ref().map(|s| SymmetryDoc {
            elements: s
                .elements
                .iter()
                .map(|e| IsometryDoc {
                    linear: cnum(e.linear),
                    conjugate: e.conjugate,
                    offset: cnum(e.offset),
                    circulation_preserving: e.circulation_preserving,
                })
                .collect(),
        }),
    };
    let mut s = serde_json::to_string_pretty(&d).expect("document serializes");
    s.push('\n');
    s
}

pub fn serialize_config(c: &VortexConfig, m: &Motion) -> String {
    serialize_document(&ConfigDocument {
        config: c.clone(),
        motion: Some(*m),
        symmetry: None,
    })
}

fn lex(a: &Complex64, b: &Complex64) -> std::cmp::Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

fn sorted(mut vs: Vec<Vortex>) -> Vec<Vortex> {
    vs.sort_by(|a, b| lex(&a.p, &b.p));
    vs
}

/// Bring a balanced crystal into its canonical frame.
///
/// * rotating: center of rotation at the origin, `v = 0`, `ω = ±1`
/// * translating (finite): centroid at the origin, `v = 1`
/// * stationary (finite): `p₁ = 0`, `p₂ = 1`
/// * periodic: `p₁` at the origin, positions reduced
///
/// Vortices are sorted lexicographically by `(Re p, Im p)`, except that the
/// anchor vortices of the stationary and periodic gauges stay in front.
pub fn normalize(c: &VortexConfig, m: &Motion, tol: f64) -> Result<(VortexConfig, Motion)> {
    let res = balance::residual(c, m)?;
    let sup = balance::sup_norm(&res);
    if !(sup <= tol) {
        return Err(Error::NotBalanced { sup_norm: sup, tol });
    }
    let class = balance::classify(c, m, tol)?;
    let g = c.geometry();
    let vs = c.vortices();
    if g.is_periodic() {
        let anchor = vs[0].p;
        let mut out = vec![Vortex::new(Complex64::new(0.0, 0.0), vs[0].sigma)];
        let rest: Vec<Vortex> = vs[1..]
            .iter()
            .map(|v| Vortex::new(c.kernel().reduce_fundamental(v.p - anchor), v.sigma))
            .collect();
        out.extend(sorted(rest));
        return Ok((VortexConfig::new(g, out)?, Motion::translating(m.v)));
    }
    match class.kind {
        ClassKind::Rotating => {
            if m.omega == 0.0 {
                return Err(Error::ZeroMotion("rotating normalization needs ω ≠ 0".into()));
            }
            let center = Complex64::new(0.0, 1.0) * m.v / m.omega;
            let s = m.omega.abs().sqrt();
            let out = vs
                .iter()
                .map(|v| Vortex::new((v.p - center) * s, v.sigma))
                .collect();
            Ok((
                VortexConfig::new(g, sorted(out))?,
                Motion::rotating(m.omega.signum()),
            ))
        }
        ClassKind::Translating => {
            if m.v.norm() == 0.0 {
                return Err(Error::ZeroMotion("translating normalization needs v ≠ 0".into()));
            }
            let centroid = c.centroid();
            let a = m.v.conj();
            let out = vs
                .iter()
                .map(|v| Vortex::new((v.p - centroid) * a, v.sigma))
                .collect();
            Ok((
                VortexConfig::new(g, sorted(out))?,
                Motion::translating(Complex64::new(1.0, 0.0)),
            ))
        }
        ClassKind::Stationary => {
            if vs.len() == 1 {
                let out = vec![Vortex::new(Complex64::new(0.0, 0.0), vs[0].sigma)];
                return Ok((VortexConfig::new(g, out)?, Motion::at_rest()));
            }
            let p1 = vs[0].p;
            let a = 1.0 / (vs[1].p - p1);
            let mut out = vec![
                Vortex::new(Complex64::new(0.0, 0.0), vs[0].sigma),
                Vortex::new(Complex64::new(1.0, 0.0), vs[1].sigma),
            ];
            let rest = vs[2..]
                .iter()
                .map(|v| Vortex::new((v.p - p1) * a, v.sigma))
                .collect();
            out.extend(sorted(rest));
            Ok((VortexConfig::new(g, out)?, Motion::at_rest()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn pair() -> VortexConfig {
        VortexConfig::from_parts(
            GeometryKind::Finite,
            &[c(0.0, 1.0 / (4.0 * PI)), c(0.0, -1.0 / (4.0 * PI))],
            &[1, -1],
        )
        .unwrap()
    }

    fn thomson(n: usize, r: f64) -> VortexConfig {
        let ps: Vec<_> = (0..n)
            .map(|k| Complex64::from_polar(r, 2.0 * PI * k as f64 / n as f64))
            .collect();
        VortexConfig::from_parts(GeometryKind::Finite, &ps, &vec![1; n]).unwrap()
    }

    const PAIR_DOC: &str = r#"{
        "geometry": {"kind": "finite"},
        "vortices": [
            {"p": [0.0, 0.07957747154594767], "sigma": 1},
            {"p": [0.0, -0.07957747154594767], "sigma": -1}
        ],
        "motion": {"v": [1.0, 0.0], "omega": 0.0}
    }"#;

    #[test]
    fn parse_pair_document() {
        let doc = parse_config(PAIR_DOC).unwrap();
        assert_eq!(doc.config.len(), 2);
        assert_eq!(doc.motion.unwrap().v, c(1.0, 0.0));
        assert!(doc.symmetry.is_none());
    }

    #[test]
    fn bad_sigma_is_invariant_violation() {
        let text = PAIR_DOC.replace("\"sigma\": -1", "\"sigma\": 2");
        let err = parse_config(&text).unwrap_err();
        assert_eq!(err.kind(), "invariant-violation");
        assert!(matches!(err, Error::InvalidConfig { ref path, .. } if path == "vortices[1].sigma"));
    }

    #[test]
    fn real_modulus_rejected() {
        let text = r#"{"geometry":{"kind":"doubly","tau":[1.0,0.0]},
                       "vortices":[{"p":[0,0],"sigma":1}]}"#;
        assert!(matches!(parse_config(text), Err(Error::InvalidModulus { .. })));
    }

    #[test]
    fn schema_errors_carry_paths() {
        let missing = r#"{"geometry":{"kind":"finite"},"vortices":[{"sigma":1}]}"#;
        assert!(matches!(parse_config(missing),
            Err(Error::Schema { ref path, .. }) if path == "vortices[0].p"));
        let kind = r#"{"geometry":{"kind":"sphere"},"vortices":[]}"#;
        assert!(matches!(parse_config(kind),
            Err(Error::Schema { ref path, .. }) if path == "geometry.kind"));
        assert!(matches!(parse_config("not json"), Err(Error::Schema { .. })));
    }

    #[test]
    fn duplicate_positions_rejected() {
        let text = r#"{"geometry":{"kind":"singly"},
            "vortices":[{"p":[0.25,0],"sigma":1},{"p":[1.25,0],"sigma":-1}]}"#;
        assert!(matches!(
            parse_config(text),
            Err(Error::CoincidentVortices { i: 0, j: 1 })
        ));
    }

    #[test]
    fn periodic_omega_rejected() {
        let text = r#"{"geometry":{"kind":"singly"},
            "vortices":[{"p":[0.25,0],"sigma":1}],"motion":{"v":[0,0],"omega":1}}"#;
        assert!(matches!(parse_config(text), Err(Error::InvalidConfig { .. })));
    }

    #[test]
    fn round_trip_thomson_is_bit_identical() {
        let cfg = thomson(5, 1.0);
        let m = Motion::rotating(1.0 / PI);
        let text = serialize_config(&cfg, &m);
        let doc = parse_config(&text).unwrap();
        assert_eq!(doc.config, cfg);
        assert_eq!(doc.motion, Some(m));
        for (a, b) in doc.config.positions().iter().zip(cfg.positions()) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
    }

    #[test]
    fn doubly_round_trip_keeps_tau() {
        let tau = c(0.1 + 1e-17, 1.0 / 3.0);
        let cfg = VortexConfig::from_parts(
            GeometryKind::doubly(tau).unwrap(),
            &[c(0.0, 0.0), c(0.3, 0.2)],
            &[1, -1],
        )
        .unwrap();
        let doc = parse_config(&serialize_config(&cfg, &Motion::at_rest())).unwrap();
        assert_eq!(doc.config.geometry(), GeometryKind::DoublyPeriodic { tau });
    }

    #[test]
    fn empty_vortex_list_fails_on_reparse() {
        let text = serialize_config(&pair(), &Motion::translating(c(1.0, 0.0)));
        let mut v: Value = serde_json::from_str(&text).unwrap();
        v["vortices"] = Value::Array(vec![]);
        let err = parse_config(&v.to_string()).unwrap_err();
        assert!(matches!(err, Error::Schema { ref path, .. } if path == "vortices"));
    }

    #[test]
    fn symmetry_block_round_trip() {
        let g = SymmetryGroup {
            elements: vec![Isometry {
                linear: c(-1.0, 0.0),
                conjugate: true,
                offset: c(0.0, 0.0),
                circulation_preserving: true,
            }],
        };
        let doc = ConfigDocument {
            config: pair(),
            motion: None,
            symmetry: Some(g.clone()),
        };
        let back = parse_config(&serialize_document(&doc)).unwrap();
        assert_eq!(back.symmetry, Some(g));
    }

    #[test]
    fn periodic_positions_are_reduced() {
        let cfg = VortexConfig::from_parts(
            GeometryKind::SinglyPeriodic,
            &[c(-0.25, 0.0), c(3.5, 1.0)],
            &[1, -1],
        )
        .unwrap();
        assert_eq!(cfg.positions(), vec![c(0.75, 0.0), c(0.5, 1.0)]);
    }

    #[test]
    fn normalize_pair_moment() {
        let (cfg, m) = normalize(&pair(), &Motion::translating(c(1.0, 0.0)), 1e-12).unwrap();
        assert_eq!(m.v, c(1.0, 0.0));
        let want = -2.0 / (4.0 * PI * Complex64::i());
        assert!((cfg.weighted_sum() - want).norm() < 1e-15);
        assert!((want - c(0.0, 1.0 / (2.0 * PI))).norm() < 1e-16);
    }

    #[test]
    fn normalize_thomson_square_scales_to_unit_omega() {
        let omega = 3.0 / (4.0 * PI);
        let (cfg, m) = normalize(&thomson(4, 1.0), &Motion::rotating(omega), 1e-12).unwrap();
        assert_eq!(m.omega, 1.0);
        for p in cfg.positions() {
            assert!((p.norm() - omega.sqrt()).abs() < 1e-15);
        }
        let res = balance::residual(&cfg, &m).unwrap();
        assert!(balance::sup_norm(&res) < 1e-13);
        // normalized moment identities
        let n = 4.0;
        assert!(cfg.weighted_sum().norm() < 1e-15);
        let s2: f64 = cfg.positions().iter().map(|p| p.norm_sqr()).sum();
        assert!((s2 - (n * n - n) / (4.0 * PI)).abs() < 1e-14);
    }

    #[test]
    fn normalize_is_idempotent_and_fixes_normalized_input() {
        let (a, ma) = normalize(&thomson(5, 1.0), &Motion::rotating(1.0 / PI), 1e-12).unwrap();
        let (b, mb) = normalize(&a, &ma, 1e-12).unwrap();
        assert_eq!(ma, mb);
        for (x, y) in a.positions().iter().zip(b.positions()) {
            assert!((x - y).norm() < 1e-13);
        }
    }

    #[test]
    fn normalize_rejects_unbalanced() {
        let err = normalize(&thomson(5, 1.0), &Motion::rotating(0.3), 1e-12).unwrap_err();
        assert_eq!(err.kind(), "not-balanced");
    }

    #[test]
    fn normalize_periodic_anchor() {
        let b = 0.3;
        let cfg = VortexConfig::from_parts(
            GeometryKind::SinglyPeriodic,
            &[c(0.2, 0.1), c(0.7, 0.1 + b)],
            &[1, -1],
        )
        .unwrap();
        let m = Motion::translating(c(-(PI * b).tanh() / 2.0, 0.0));
        let (n1, m1) = normalize(&cfg, &m, 1e-12).unwrap();
        assert_eq!(n1.positions()[0], c(0.0, 0.0));
        assert!((n1.positions()[1] - c(0.5, b)).norm() < 1e-15);
        let (n2, _) = normalize(&n1, &m1, 1e-12).unwrap();
        assert_eq!(n1, n2);
    }
}
