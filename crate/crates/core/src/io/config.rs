//! Run configuration in flat TOML sections.
//!
//! ```toml
//! [grid]
//! n = 32
//! box_length = 6.283185307179586
//!
//! [model]
//! nu = 1.0
//! alpha = 3.0
//!
//! [integrator]
//! stepping = "fixed"
//! dt = 0.001
//! horizon = 2.0
//! ```
//!
//! Every key is optional and falls back to the documented default; unknown
//! sections and keys are rejected. [`RunConfig::to_toml`] writes every key in
//! a fixed order, so loading its output gives back the same configuration.

use std::fmt;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use toml::{Table, Value};

use crate::diagnostics::{BmoMode, DiagnosticsConfig, SmallnessConstants};
use crate::error::{Error, Result};
use crate::experiments::{DataKind, InitialDataSpec, Protocol};
use crate::model::{ModelParams, RunOptions, Stepping, Terms};

/// One problem found while loading a configuration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigIssue {
    /// `section.key`, or the section name alone.
    pub key: String,
    pub message: String,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.key, self.message)
    }
}

/// Where a run writes its results.
#[derive(Clone, Debug, PartialEq)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// Diagnostics series, relative to `dir`.
    pub series: String,
    /// Final-state checkpoint, relative to `dir`.
    pub checkpoint: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: PathBuf::from("out"),
            series: "series.csv".into(),
            checkpoint: "final.tcms".into(),
        }
    }
}

impl OutputConfig {
    pub fn series_path(&self) -> PathBuf {
        self.dir.join(&self.series)
    }

    pub fn checkpoint_path(&self) -> PathBuf {
        self.dir.join(&self.checkpoint)
    }
}

/// Everything a command needs to set up a run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub n: usize,
    pub box_length: f64,
    pub params: ModelParams,
    pub run: RunOptions,
    pub data: InitialDataSpec,
    pub growth_factor: f64,
    pub output: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        let p = Protocol::default();
        RunConfig {
            n: p.n,
            box_length: p.box_length,
            params: p.params,
            run: p.run,
            data: p.data,
            growth_factor: p.growth_factor,
            output: OutputConfig::default(),
        }
    }
}

const SECTIONS: [(&str, &[&str]); 7] = [
    ("grid", &["n", "box_length"]),
    (
        "model",
        &[
            "nu",
            "eta",
            "mu",
            "sigma1",
            "sigma2",
            "alpha",
            "beta",
            "advection",
            "coupling",
        ],
    ),
    (
        "integrator",
        &[
            "stepping",
            "dt",
            "safety",
            "dt_max",
            "horizon",
            "sample_every",
            "track_energy",
        ],
    ),
    (
        "initial",
        &[
            "kind",
            "c0",
            "normalize",
            "amplitude",
            "seed",
            "band",
            "slope",
        ],
    ),
    ("diagnostics", &["bmo_mode", "c_pi", "c1", "c2", "epsilon"]),
    ("sweep", &["growth_factor"]),
    ("output", &["dir", "series", "checkpoint"]),
];

/// Typed reads from one section, collecting issues instead of stopping.
struct Reader<'a> {
    section: &'static str,
    table: Option<&'a Table>,
    issues: &'a mut Vec<ConfigIssue>,
}

impl Reader<'_> {
    fn issue(&mut self, key: &str, message: impl Into<String>) {
        self.issues.push(ConfigIssue {
            key: format!("{}.{key}", self.section),
            message: message.into(),
        });
    }

    fn get(&self, key: &str) -> Option<&Value> {
        self.table.and_then(|t| t.get(key))
    }

    fn float(&mut self, key: &str, default: f64) -> f64 {
        match self.get(key) {
            None => default,
            Some(Value::Float(x)) => *x,
            Some(Value::Integer(i)) => *i as f64,
            Some(v) => {
                let msg = format!("expected a number, got {}", v.type_str());
                self.issue(key, msg);
                default
            }
        }
    }

    fn uint(&mut self, key: &str, default: u64) -> u64 {
        match self.get(key) {
            None => default,
            Some(Value::Integer(i)) if *i >= 0 => *i as u64,
            Some(v) => {
                let msg = format!("expected a non-negative integer, got {v}");
                self.issue(key, msg);
                default
            }
        }
    }

    fn boolean(&mut self, key: &str, default: bool) -> bool {
        match self.get(key) {
            None => default,
            Some(Value::Boolean(b)) => *b,
            Some(v) => {
                let msg = format!("expected true or false, got {v}");
                self.issue(key, msg);
                default
            }
        }
    }

    fn string(&mut self, key: &str, default: &str) -> String {
        match self.get(key) {
            None => default.to_string(),
            Some(Value::String(s)) => s.clone(),
            Some(v) => {
                let msg = format!("expected a string, got {}", v.type_str());
                self.issue(key, msg);
                default.to_string()
            }
        }
    }

    fn parsed<T: std::str::FromStr<Err = String>>(&mut self, key: &str, default: T) -> T {
        match self.get(key) {
            None => default,
            Some(Value::String(s)) => match s.parse() {
                Ok(x) => x,
                Err(e) => {
                    self.issue(key, e);
                    default
                }
            },
            Some(v) => {
                let msg = format!("expected a string, got {}", v.type_str());
                self.issue(key, msg);
                default
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum SteppingKind {
    Fixed,
    Adaptive,
}

impl std::str::FromStr for SteppingKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "fixed" => Ok(SteppingKind::Fixed),
            "adaptive" => Ok(SteppingKind::Adaptive),
            _ => Err(format!("expected \"fixed\" or \"adaptive\", got {s:?}")),
        }
    }
}

impl RunConfig {
    /// Parses configuration text. All problems are reported together.
    pub fn from_toml(text: &str) -> Result<Self> {
        let table: Table = text.parse().map_err(|e: toml::de::Error| {
            Error::Config(vec![ConfigIssue {
                key: "<syntax>".into(),
                message: e.to_string().trim_end().to_string(),
            }])
        })?;
        let mut issues = Vec::new();
        for (name, value) in &table {
            match SECTIONS.iter().find(|(s, _)| s == name) {
                None => issues.push(ConfigIssue {
                    key: name.clone(),
                    message: "unknown section or top-level key".into(),
                }),
                Some((_, keys)) => match value {
                    Value::Table(t) => {
                        for k in t.keys() {
                            if !keys.contains(&k.as_str()) {
                                issues.push(ConfigIssue {
                                    key: format!("{name}.{k}"),
                                    message: "unknown key".into(),
                                });
                            }
                        }
                    }
                    _ => issues.push(ConfigIssue {
                        key: name.clone(),
                        message: "expected a section".into(),
                    }),
                },
            }
        }

        let d = RunConfig::default();
        let section = |name: &str| table.get(name).and_then(Value::as_table);
        macro_rules! reader {
            ($name:literal) => {
                Reader {
                    section: $name,
                    table: section($name),
                    issues: &mut issues,
                }
            };
        }

        let mut r = reader!("grid");
        let n = r.uint("n", d.n as u64) as usize;
        let box_length = r.float("box_length", d.box_length);

        let mut r = reader!("model");
        let dp = d.params;
        let params = ModelParams {
            nu: r.float("nu", dp.nu),
            eta: r.float("eta", dp.eta),
            mu: r.float("mu", dp.mu),
            sigma1: r.float("sigma1", dp.sigma1),
            sigma2: r.float("sigma2", dp.sigma2),
            alpha: r.float("alpha", dp.alpha),
            beta: r.float("beta", dp.beta),
            terms: Terms {
                advection: r.boolean("advection", dp.terms.advection),
                coupling: r.boolean("coupling", dp.terms.coupling),
            },
        };

        let mut r = reader!("integrator");
        let kind = r.parsed("stepping", SteppingKind::Fixed);
        let dt = r.float("dt", 1e-3);
        let safety = r.float("safety", 0.5);
        let dt_max = r.float("dt_max", 1e-2);
        let horizon = r.float("horizon", d.run.horizon);
        let sample_every = r.float("sample_every", d.run.sample_every);
        let track_energy = r.boolean("track_energy", d.run.track_energy);

        let mut r = reader!("initial");
        let dd = &d.data;
        let kind_data = r.parsed("kind", dd.kind);
        let c0 = r.float("c0", dd.target_h_half.unwrap_or(1e-2));
        let normalize = r.boolean("normalize", true);
        let amplitude = r.float("amplitude", dd.amplitude);
        let seed = r.uint("seed", dd.seed);
        let band = r.uint("band", dd.band as u64) as usize;
        let slope = r.float("slope", dd.slope);

        let mut r = reader!("diagnostics");
        let dg = d.run.diagnostics;
        let bmo_mode: BmoMode = r.parsed("bmo_mode", dg.bmo_mode);
        let c_pi = r.float("c_pi", dg.c_pi);
        let c1 = r.float("c1", dg.smallness.c1);
        let c2 = r.float("c2", dg.smallness.c2);
        let epsilon = r.float("epsilon", dg.smallness.epsilon);

        let mut r = reader!("sweep");
        let growth_factor = r.float("growth_factor", d.growth_factor);

        let mut r = reader!("output");
        let dir = r.string("dir", &d.output.dir.to_string_lossy());
        let series = r.string("series", &d.output.series);
        let checkpoint = r.string("checkpoint", &d.output.checkpoint);

        let cfg = RunConfig {
            n,
            box_length,
            params,
            run: RunOptions {
                horizon,
                sample_every,
                stepping: match kind {
                    SteppingKind::Fixed => Stepping::Fixed { dt },
                    SteppingKind::Adaptive => Stepping::Adaptive { safety, dt_max },
                },
                track_energy,
                diagnostics: DiagnosticsConfig {
                    bmo_mode,
                    c_pi,
                    smallness: SmallnessConstants { c1, c2, epsilon },
                },
            },
            data: InitialDataSpec {
                kind: kind_data,
                amplitude,
                target_h_half: normalize.then_some(c0),
                seed,
                band,
                slope,
            },
            growth_factor,
            output: OutputConfig {
                dir: PathBuf::from(dir),
                series,
                checkpoint,
            },
        };
        issues.extend(cfg.issues());
        if issues.is_empty() {
            Ok(cfg)
        } else {
            Err(Error::Config(issues))
        }
    }

    /// Every range violation.
    pub fn issues(&self) -> Vec<ConfigIssue> {
        let mut out = Vec::new();
        let mut push = |key: &str, message: String| {
            out.push(ConfigIssue {
                key: key.into(),
                message,
            })
        };
        if !(self.n >= 8 && self.n.is_power_of_two()) {
            push(
                "grid.n",
                format!("must be a power of two >= 8, got {}", self.n),
            );
        }
        if !(self.box_length.is_finite() && self.box_length > 0.0) {
            push(
                "grid.box_length",
                format!("must be finite and > 0, got {}", self.box_length),
            );
        }
        for e in self.params.violations() {
            if let Error::InvalidParameter { name, reason } = e {
                push(&format!("model.{name}"), reason);
            }
        }
        let positive = |x: f64| x.is_finite() && x > 0.0;
        let nonneg = |x: f64| x.is_finite() && x >= 0.0;
        if !nonneg(self.run.horizon) {
            push(
                "integrator.horizon",
                format!("must be finite and >= 0, got {}", self.run.horizon),
            );
        }
        if !positive(self.run.sample_every) {
            push(
                "integrator.sample_every",
                format!("must be finite and > 0, got {}", self.run.sample_every),
            );
        }
        match self.run.stepping {
            Stepping::Fixed { dt } => {
                if !positive(dt) {
                    push("integrator.dt", format!("must be finite and > 0, got {dt}"));
                }
            }
            Stepping::Adaptive { safety, dt_max } => {
                if !(safety > 0.0 && safety <= 1.0) {
                    push(
                        "integrator.safety",
                        format!("must lie in (0, 1], got {safety}"),
                    );
                }
                if !positive(dt_max) {
                    push(
                        "integrator.dt_max",
                        format!("must be finite and > 0, got {dt_max}"),
                    );
                }
            }
        }
        if let Some(c0) = self.data.target_h_half {
            if !nonneg(c0) {
                push("initial.c0", format!("must be finite and >= 0, got {c0}"));
            }
        }
        if !self.data.amplitude.is_finite() {
            push(
                "initial.amplitude",
                format!("must be finite, got {}", self.data.amplitude),
            );
        }
        if self.data.seed > i64::MAX as u64 {
            push("initial.seed", format!("must be at most {}", i64::MAX));
        }
        if self.data.kind == DataKind::RandomBand && 3 * self.data.band > self.n {
            push(
                "initial.band",
                format!(
                    "must be at most n/3 = {}, got {}",
                    self.n / 3,
                    self.data.band
                ),
            );
        }
        if !self.data.slope.is_finite() {
            push("initial.slope", "must be finite".into());
        }
        let dg = &self.run.diagnostics;
        if !positive(dg.c_pi) {
            push(
                "diagnostics.c_pi",
                format!("must be finite and > 0, got {}", dg.c_pi),
            );
        }
        for (key, x) in [
            ("diagnostics.c1", dg.smallness.c1),
            ("diagnostics.c2", dg.smallness.c2),
            ("diagnostics.epsilon", dg.smallness.epsilon),
        ] {
            if !nonneg(x) {
                push(key, format!("must be finite and >= 0, got {x}"));
            }
        }
        if !(self.growth_factor.is_finite() && self.growth_factor > 1.0) {
            push(
                "sweep.growth_factor",
                format!("must be finite and > 1, got {}", self.growth_factor),
            );
        }
        if self.output.series.is_empty() {
            push("output.series", "must not be empty".into());
        }
        if self.output.checkpoint.is_empty() {
            push("output.checkpoint", "must not be empty".into());
        }
        out
    }

    /// `Ok` iff [`RunConfig::issues`] is empty.
    pub fn validate(&self) -> Result<()> {
        let issues = self.issues();
        if issues.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(issues))
        }
    }

    /// Whether `5/2 <= alpha, beta < 4`.
    pub fn theory_regime(&self) -> bool {
        self.params.theory_regime()
    }

    /// Valid but noteworthy settings.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !self.theory_regime() {
            out.push(format!(
                "alpha = {}, beta = {}: outside 5/2 <= alpha, beta < 4, the range of the \
                 small-data theory; smallness functionals are not evaluated",
                self.params.alpha, self.params.beta
            ));
        }
        out
    }

    pub fn protocol(&self) -> Protocol {
        Protocol {
            n: self.n,
            box_length: self.box_length,
            params: self.params,
            run: self.run.clone(),
            data: self.data.clone(),
            growth_factor: self.growth_factor,
        }
    }

    /// Canonical text form listing every key.
    pub fn to_toml(&self) -> String {
        let f = |x: f64| format!("{x:?}");
        let s = |x: &str| Value::String(x.to_string()).to_string();
        let p = &self.params;
        let (kind, dt, safety, dt_max) = match self.run.stepping {
            Stepping::Fixed { dt } => ("fixed", dt, 0.5, 1e-2),
            Stepping::Adaptive { safety, dt_max } => ("adaptive", 1e-3, safety, dt_max),
        };
        let dg = &self.run.diagnostics;
        let mut o = String::new();
        let _ = writeln!(
            o,
            "[grid]\nn = {}\nbox_length = {}\n",
            self.n,
            f(self.box_length)
        );
        let _ = writeln!(
            o,
            "[model]\nnu = {}\neta = {}\nmu = {}\nsigma1 = {}\nsigma2 = {}\nalpha = {}\nbeta = {}\n\
             advection = {}\ncoupling = {}\n",
            f(p.nu),
            f(p.eta),
            f(p.mu),
            f(p.sigma1),
            f(p.sigma2),
            f(p.alpha),
            f(p.beta),
            p.terms.advection,
            p.terms.coupling
        );
        let _ = writeln!(
            o,
            "[integrator]\nstepping = {}\ndt = {}\nsafety = {}\ndt_max = {}\nhorizon = {}\n\
             sample_every = {}\ntrack_energy = {}\n",
            s(kind),
            f(dt),
            f(safety),
            f(dt_max),
            f(self.run.horizon),
            f(self.run.sample_every),
            self.run.track_energy
        );
        let _ = writeln!(
            o,
            "[initial]\nkind = {}\nc0 = {}\nnormalize = {}\namplitude = {}\nseed = {}\n\
             band = {}\nslope = {}\n",
            s(self.data.kind.as_str()),
            f(self.data.target_h_half.unwrap_or(1e-2)),
            self.data.target_h_half.is_some(),
            f(self.data.amplitude),
            self.data.seed,
            self.data.band,
            f(self.data.slope)
        );
        let _ = writeln!(
            o,
            "[diagnostics]\nbmo_mode = {}\nc_pi = {}\nc1 = {}\nc2 = {}\nepsilon = {}\n",
            s(dg.bmo_mode.as_str()),
            f(dg.c_pi),
            f(dg.smallness.c1),
            f(dg.smallness.c2),
            f(dg.smallness.epsilon)
        );
        let _ = writeln!(o, "[sweep]\ngrowth_factor = {}\n", f(self.growth_factor));
        let _ = writeln!(
            o,
            "[output]\ndir = {}\nseries = {}\ncheckpoint = {}",
            s(&self.output.dir.to_string_lossy()),
            s(&self.output.series),
            s(&self.output.checkpoint)
        );
        o
    }
}

/// Reads and validates a configuration file; warnings are logged.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)?;
    let cfg = RunConfig::from_toml(&text)?;
    for w in cfg.warnings() {
        log::warn!("{}: {w}", path.display());
    }
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn issues(text: &str) -> Vec<ConfigIssue> {
        match RunConfig::from_toml(text) {
            Err(Error::Config(v)) => v,
            other => panic!("expected config issues, got {other:?}"),
        }
    }

    #[test]
    fn empty_text_gives_defaults() {
        let c = RunConfig::from_toml("").unwrap();
        assert_eq!(c, RunConfig::default());
        assert!(c.theory_regime());
        assert!(c.warnings().is_empty());
    }

    #[test]
    fn canonical_form_is_a_fixed_point() {
        let c = RunConfig::from_toml(
            "[grid]\nn = 16\n[model]\nalpha = 3.3\nsigma2 = 0\n\
             [integrator]\nstepping = \"adaptive\"\nsafety = 0.3\n\
             [initial]\nkind = \"random_band\"\nnormalize = false\namplitude = 0.25\n",
        )
        .unwrap();
        let text = c.to_toml();
        let d = RunConfig::from_toml(&text).unwrap();
        assert_eq!(c, d);
        assert_eq!(text, d.to_toml());
        assert_eq!(d.data.target_h_half, None);
        assert_eq!(
            d.run.stepping,
            Stepping::Adaptive {
                safety: 0.3,
                dt_max: 1e-2
            }
        );
    }

    #[test]
    fn small_alpha_names_field_and_bound() {
        let v = issues("[model]\nalpha = 0.5\n");
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].key, "model.alpha");
        assert!(v[0].message.contains(">= 1"));
    }

    #[test]
    fn large_alpha_loads_with_warning() {
        let c = RunConfig::from_toml("[model]\nalpha = 4.2\n").unwrap();
        assert!(!c.theory_regime());
        assert_eq!(c.warnings().len(), 1);
    }

    #[test]
    fn every_problem_is_reported() {
        let v = issues(
            "[grid]\nn = 12\nfoo = 1\n[model]\nnu = -1\neta = \"x\"\n\
             [extra]\na = 1\n[integrator]\nstepping = \"rk\"\n",
        );
        let keys: Vec<&str> = v.iter().map(|i| i.key.as_str()).collect();
        for k in [
            "grid.foo",
            "extra",
            "model.eta",
            "integrator.stepping",
            "grid.n",
            "model.nu",
        ] {
            assert!(keys.contains(&k), "{k} missing from {keys:?}");
        }
    }

    #[test]
    fn syntax_errors_are_config_errors() {
        assert!(matches!(
            RunConfig::from_toml("[grid\nn = "),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn zero_horizon_is_allowed() {
        let c = RunConfig::from_toml("[integrator]\nhorizon = 0\n").unwrap();
        assert_eq!(c.run.horizon, 0.0);
        assert!(!issues("[integrator]\nhorizon = -1\n").is_empty());
    }
}
