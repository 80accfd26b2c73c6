//! Versioned JSON experiment configuration. Effective settings are the
//! per-kind defaults, overlaid by the config file, overlaid by flags.

use std::f64::consts::PI;
use std::path::PathBuf;

use serde::{Deserialize, Deserializer, Serialize};
use sha2::{Digest, Sha256};

use crate::bounds::LogBase;
use crate::geometry::{Domain, DomainSpec};
use crate::operator::Resolution;
use crate::{Error, Result};

pub const CONFIG_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Kind {
    #[serde(rename = "spectrum")]
    Spectrum,
    #[serde(rename = "cover")]
    Cover,
    #[serde(rename = "scan_dilation")]
    ScanDilation,
    #[serde(rename = "verify_1d")]
    Verify1d,
    #[serde(rename = "verify_cover")]
    VerifyCover,
    #[serde(rename = "verify_bounds")]
    VerifyBounds,
    #[serde(rename = "synthesis")]
    Synthesis,
}

impl Kind {
    pub const ALL: [Kind; 7] = [
        Kind::Spectrum,
        Kind::Cover,
        Kind::ScanDilation,
        Kind::Verify1d,
        Kind::VerifyCover,
        Kind::VerifyBounds,
        Kind::Synthesis,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Spectrum => "spectrum",
            Kind::Cover => "cover",
            Kind::ScanDilation => "scan_dilation",
            Kind::Verify1d => "verify_1d",
            Kind::VerifyCover => "verify_cover",
            Kind::VerifyBounds => "verify_bounds",
            Kind::Synthesis => "synthesis",
        }
    }

    fn needs_s(self) -> bool {
        matches!(self, Kind::Spectrum | Kind::ScanDilation | Kind::VerifyBounds | Kind::Synthesis)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format '{other}' (expected csv or json)")),
        }
    }
}

fn one_or_many<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<DomainSpec>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        Many(Vec<serde_json::Value>),
        One(serde_json::Value),
    }
    let values = match OneOrMany::deserialize(d)? {
        OneOrMany::Many(v) => v,
        OneOrMany::One(v) => vec![v],
    };
    values.into_iter().map(|v| serde_json::from_value(v).map_err(serde::de::Error::custom)).collect()
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Domains {
    /// Spatial domains; a single descriptor or a list.
    #[serde(deserialize_with = "one_or_many")]
    pub f: Vec<DomainSpec>,
    /// Frequency domain (dilated by each `r` in dilation scans).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<DomainSpec>,
    /// Decomposition of the first `f` for the synthesis check; empty means
    /// halving a box along every axis.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub components: Vec<DomainSpec>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Grids {
    pub eps: Vec<f64>,
    /// Half-bandwidths `W` of `S = [−W, W]`.
    pub w: Vec<f64>,
    /// Dilation factors of `S`.
    pub r: Vec<f64>,
    /// Cover scales.
    pub eta: Vec<f64>,
    /// Chebyshev exponents.
    pub p: Vec<f64>,
    pub alpha: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Output {
    pub dir: PathBuf,
    pub format: Format,
    /// Also write each operator matrix as a flat binary.
    pub dump_matrices: bool,
}

impl Default for Output {
    fn default() -> Self {
        Self { dir: PathBuf::from("out"), format: Format::Csv, dump_matrices: false }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    pub kind: Kind,
    #[serde(default)]
    pub domains: Domains,
    #[serde(default)]
    pub grids: Grids,
    #[serde(default)]
    pub resolution: Resolution,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub log_base: LogBase,
    #[serde(default)]
    pub output: Output,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
}

/// Command-line overrides; `None` leaves the config value.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub threads: Option<usize>,
    pub seed: Option<u64>,
    pub log_base: Option<LogBase>,
}

fn interval(a: f64, b: f64) -> DomainSpec {
    DomainSpec::Interval { a, b }
}

fn cube(center: Vec<f64>, side: f64) -> DomainSpec {
    DomainSpec::AxisCube { dim: Some(center.len()), center, side }
}

fn ball(center: Vec<f64>, radius: f64) -> DomainSpec {
    DomainSpec::Ball { dim: Some(center.len()), center, radius }
}

impl ExperimentConfig {
    /// Defaults for a kind: a small, meaningful desk-scale study.
    pub fn defaults(kind: Kind) -> Self {
        let eps = vec![0.1, 0.01, 0.001];
        let p = vec![0.25, 0.5, 1.0];
        let (domains, grids) = match kind {
            Kind::Spectrum => (
                Domains { f: vec![interval(0.0, 1.0)], s: Some(interval(-4.0 * PI, 4.0 * PI)), ..Default::default() },
                Grids { eps, p, ..Default::default() },
            ),
            Kind::Cover => (
                Domains { f: vec![ball(vec![0.0, 0.0], 200.0)], ..Default::default() },
                Grids { eta: vec![16.0], ..Default::default() },
            ),
            Kind::VerifyCover => (
                Domains { f: vec![ball(vec![0.0, 0.0], 200.0), cube(vec![0.0, 0.0], 300.0)], ..Default::default() },
                Grids { eta: vec![16.0, 32.0], ..Default::default() },
            ),
            Kind::ScanDilation => (
                Domains {
                    f: vec![cube(vec![0.5, 0.5], 1.0)],
                    s: Some(ball(vec![0.0, 0.0], 1.0)),
                    ..Default::default()
                },
                Grids { eps: vec![0.1], r: vec![8.0, 12.0, 16.0, 24.0, 32.0], p, ..Default::default() },
            ),
            Kind::Verify1d => (
                Domains { f: vec![interval(0.0, 1.0)], ..Default::default() },
                Grids { eps, w: (1..=9).map(|j| 2f64.powi(j) * PI).collect(), p, ..Default::default() },
            ),
            Kind::VerifyBounds => (
                Domains {
                    f: vec![cube(vec![0.5, 0.5], 1.0)],
                    s: Some(ball(vec![0.0, 0.0], 1.0)),
                    ..Default::default()
                },
                Grids {
                    eps: vec![0.1, 0.01],
                    r: vec![8.0, 12.0, 16.0, 24.0, 32.0],
                    p,
                    alpha: vec![0.5],
                    ..Default::default()
                },
            ),
            Kind::Synthesis => (
                Domains { f: vec![interval(0.0, 2.0)], s: Some(interval(-16.0, 16.0)), ..Default::default() },
                Grids { eps, ..Default::default() },
            ),
        };
        Self {
            version: CONFIG_VERSION,
            kind,
            domains,
            grids,
            resolution: Resolution::default(),
            seed: 0,
            log_base: LogBase::Natural,
            output: Output::default(),
            threads: None,
        }
    }

    /// Defaults for `kind` overlaid by a parsed config document: top-level
    /// keys replace defaults, and inside `domains`, `grids`, `resolution` and
    /// `output` each given key replaces the default for that key.
    pub fn from_json(kind: Kind, doc: &serde_json::Value) -> Result<Self> {
        let obj = doc.as_object().ok_or_else(|| Error::Config(vec!["config must be a JSON object".into()]))?;
        if let Some(k) = obj.get("kind") {
            let given: Kind =
                serde_json::from_value(k.clone()).map_err(|e| Error::Config(vec![format!("kind: {e}")]))?;
            if given != kind {
                return Err(Error::Config(vec![format!(
                    "config kind '{}' does not match the requested '{}'",
                    given.as_str(),
                    kind.as_str()
                )]));
            }
        }
        let mut merged = serde_json::to_value(Self::defaults(kind))?;
        let target = merged.as_object_mut().expect("config serializes to an object");
        for (key, value) in obj {
            match (target.get_mut(key), value) {
                (Some(serde_json::Value::Object(dst)), serde_json::Value::Object(src))
                    if matches!(key.as_str(), "domains" | "grids" | "resolution" | "output") =>
                {
                    for (k, v) in src {
                        dst.insert(k.clone(), v.clone());
                    }
                }
                _ => {
                    target.insert(key.clone(), value.clone());
                }
            }
        }
        serde_json::from_value(merged).map_err(|e| Error::Config(vec![e.to_string()]))
    }

    pub fn load(kind: Kind, path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let doc: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| Error::Config(vec![format!("{}: {e}", path.display())]))?;
        Self::from_json(kind, &doc)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(d) = &o.out {
            self.output.dir = d.clone();
        }
        if let Some(f) = o.format {
            self.output.format = f;
        }
        if let Some(t) = o.threads {
            self.threads = Some(t);
        }
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(b) = o.log_base {
            self.log_base = b;
        }
    }

    pub fn f_domains(&self) -> Result<Vec<Domain>> {
        self.domains.f.iter().map(Domain::try_from).collect()
    }

    pub fn s_domain(&self) -> Result<Domain> {
        match &self.domains.s {
            Some(s) => Domain::try_from(s),
            None => Err(Error::Config(vec!["domains.s is required".into()])),
        }
    }

    /// Every problem with the configuration, or `Ok` when there are none.
    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        if self.version != CONFIG_VERSION {
            errs.push(format!("version {} is not supported (expected {CONFIG_VERSION})", self.version));
        }
        let kind = self.kind;
        let mut f_dims = Vec::new();
        if self.domains.f.is_empty() {
            errs.push("domains.f must list at least one domain".into());
        }
        for (i, spec) in self.domains.f.iter().enumerate() {
            match Domain::try_from(spec) {
                Ok(d) => f_dims.push(d.dim()),
                Err(e) => errs.push(format!("domains.f[{i}]: {e}")),
            }
        }
        let s_dim = match (&self.domains.s, kind.needs_s()) {
            (None, true) => {
                errs.push(format!("domains.s is required for {}", kind.as_str()));
                None
            }
            (Some(spec), true) => match Domain::try_from(spec) {
                Ok(d) => Some(d.dim()),
                Err(e) => {
                    errs.push(format!("domains.s: {e}"));
                    None
                }
            },
            _ => None,
        };
        if let Some(sd) = s_dim {
            for (i, fd) in f_dims.iter().enumerate() {
                if *fd != sd {
                    errs.push(format!("domains.f[{i}] has dimension {fd} but domains.s has dimension {sd}"));
                }
            }
        }
        if matches!(kind, Kind::Cover | Kind::VerifyCover) {
            for (i, fd) in f_dims.iter().enumerate() {
                if *fd < 2 {
                    errs.push(format!("domains.f[{i}]: covers need dimension >= 2"));
                }
            }
        }
        for (i, spec) in self.domains.components.iter().enumerate() {
            if let Err(e) = Domain::try_from(spec) {
                errs.push(format!("domains.components[{i}]: {e}"));
            }
        }
        let g = &self.grids;
        let mut grid = |name: &str, values: &[f64], required: bool, ok: &dyn Fn(f64) -> bool, rule: &str| {
            if required && values.is_empty() {
                errs.push(format!("grids.{name} must not be empty for {}", kind.as_str()));
            }
            for v in values {
                if !ok(*v) {
                    errs.push(format!("grids.{name}: {v} {rule}"));
                }
            }
        };
        let eps_needed = !matches!(kind, Kind::Cover | Kind::VerifyCover);
        grid("eps", &g.eps, eps_needed, &|e| e > 0.0 && e < 0.5, "must lie in (0, 1/2)");
        grid("w", &g.w, kind == Kind::Verify1d, &|w| w >= 2.0 * PI && w.is_finite(), "must be at least 2π");
        grid("r", &g.r, kind == Kind::ScanDilation, &|r| r > 0.0 && r.is_finite(), "must be positive");
        grid(
            "eta",
            &g.eta,
            matches!(kind, Kind::Cover | Kind::VerifyCover),
            &|e| e > 0.0 && e.is_finite() && 2f64.powi(e.log2().round() as i32) == e,
            "must be a power of two",
        );
        grid("p", &g.p, false, &|p| p > 0.0 && p.is_finite(), "must be positive");
        grid("alpha", &g.alpha, false, &|a| a > 0.0 && a <= 0.5, "must lie in (0, 1/2]");
        if self.threads == Some(0) {
            errs.push("threads must be at least 1".into());
        }
        if self.resolution.max_nodes < crate::operator::MIN_NODES {
            errs.push(format!("resolution.max_nodes must be at least {}", crate::operator::MIN_NODES));
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(errs))
        }
    }

    /// SHA-256 of the canonical (sorted-key) JSON of every setting that can
    /// affect results; the worker count is excluded.
    pub fn hash(&self) -> String {
        canonical_hash(&self.reproducible_json())
    }

    /// The config without the worker count, which never affects results.
    pub fn reproducible_json(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("config serializes");
        if let Some(o) = v.as_object_mut() {
            o.remove("threads");
        }
        v
    }
}

/// Hex SHA-256 of a JSON value's compact text; `serde_json` maps keep keys
/// sorted, so the text does not depend on input key order.
pub fn canonical_hash(v: &serde_json::Value) -> String {
    let text = serde_json::to_string(v).expect("json value serializes");
    Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}
