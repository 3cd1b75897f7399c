//! Flat `key = value` experiment configs.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use bv_sharp_core::geometry::BoundaryCurve;
use bv_sharp_core::surfaces::SurfaceModel;
use bv_sharp_core::tv_solver::SolverConfig;
use bv_sharp_core::DomainSpec;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    Constants,
    DomainCertificate,
    DomainSweep,
    Solve,
    SurfaceClassify,
    SphereCertificate,
    ExpansionAudit,
}

impl Task {
    pub const ALL: [Task; 7] = [
        Task::Constants,
        Task::DomainCertificate,
        Task::DomainSweep,
        Task::Solve,
        Task::SurfaceClassify,
        Task::SphereCertificate,
        Task::ExpansionAudit,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Task::Constants => "constants",
            Task::DomainCertificate => "domain-certificate",
            Task::DomainSweep => "domain-sweep",
            Task::Solve => "solve",
            Task::SurfaceClassify => "surface-classify",
            Task::SphereCertificate => "sphere-certificate",
            Task::ExpansionAudit => "expansion-audit",
        }
    }

    /// Keys this task reads besides `task` and `out`.
    fn keys(self) -> &'static [&'static str] {
        match self {
            Task::Constants => &["n_min", "n_max"],
            Task::SphereCertificate => &["q"],
            Task::DomainCertificate => &[
                "shape", "radius", "a", "b", "mean_radius", "cos", "sin", "h", "q", "with_solver", "iterations", "initial_step", "decay", "restarts", "seed", "smoothing", "tolerance",
            ],
            Task::DomainSweep => &[
                "shape", "radius", "a", "b", "mean_radius", "cos", "sin", "h", "q", "eps_min", "eps_max", "eps_count",
            ],
            Task::Solve => &[
                "shape", "radius", "a", "b", "mean_radius", "cos", "sin", "h", "q", "iterations", "initial_step",
                "decay", "restarts", "seed", "smoothing", "tolerance",
            ],
            Task::SurfaceClassify => &["surface", "radius", "a", "c", "l1", "l2", "q", "n"],
            Task::ExpansionAudit => &[
                "shape", "surface", "radius", "a", "b", "c", "l1", "l2", "mean_radius", "cos", "sin", "h", "q", "eps",
            ],
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Task {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        Task::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| CliError::UnknownTask(s.to_string()))
    }
}

const KNOWN_KEYS: &[&str] = &[
    "task", "out", "n_min", "n_max", "n", "q", "shape", "surface", "radius", "a", "b", "c", "l1", "l2", "mean_radius",
    "cos", "sin", "h", "eps_min", "eps_max", "eps_count", "eps", "with_solver", "iterations", "initial_step", "decay",
    "restarts", "seed", "smoothing", "tolerance",
];

#[derive(Debug, Clone, PartialEq)]
pub enum Target {
    Domain(DomainSpec),
    Surface(SurfaceModel),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub task: Task,
    pub target: Option<Target>,
    /// Dimension range for `constants`.
    pub dims: (u32, u32),
    /// Dimension for surface verdicts.
    pub n: u32,
    pub q: Vec<f64>,
    pub h: f64,
    /// Radius range for sweeps and certificates; `None` uses the default range.
    pub eps_range: Option<(f64, f64)>,
    pub eps_count: usize,
    /// Radii for expansion audits; empty uses the default grid.
    pub eps: Vec<f64>,
    pub solver: SolverConfig,
    pub with_solver: bool,
    pub out: PathBuf,
}

/// Where a value came from, for error messages.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    Line(usize),
    Flag,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Line(l) => write!(f, "line {l}"),
            Origin::Flag => f.write_str("command line"),
        }
    }
}

/// Raw entries in the order they take effect.
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    entries: BTreeMap<String, (String, Origin)>,
}

impl RawConfig {
    /// Reads `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut raw = RawConfig::default();
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let body = line.split('#').next().unwrap().trim();
            if body.is_empty() {
                continue;
            }
            let (key, value) = body.split_once('=').ok_or_else(|| CliError::Parse {
                line: line_no,
                message: format!("expected `key = value`, got `{body}`"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() || value.is_empty() {
                return Err(CliError::Parse { line: line_no, message: "empty key or value".into() });
            }
            if raw.entries.contains_key(key) {
                return Err(CliError::Parse { line: line_no, message: format!("duplicate key `{key}`") });
            }
            raw.insert(key, value, Origin::Line(line_no))?;
        }
        Ok(raw)
    }

    fn insert(&mut self, key: &str, value: &str, origin: Origin) -> Result<()> {
        if !KNOWN_KEYS.contains(&key) {
            return Err(CliError::UnknownKey { key: key.to_string(), origin });
        }
        self.entries.insert(key.to_string(), (value.to_string(), origin));
        Ok(())
    }

    /// Applies a command-line override; flags win over file values.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        self.insert(key, value, Origin::Flag)
    }

    fn get(&self, key: &str) -> Option<&(String, Origin)> {
        self.entries.get(key)
    }

    /// Checks every key against the task and builds the validated config.
    pub fn resolve(&self) -> Result<ExperimentConfig> {
        let (task, _) = self.get("task").ok_or_else(|| CliError::field("task", "missing"))?;
        let task: Task = task.parse()?;
        for (key, (_, origin)) in &self.entries {
            if key != "task" && key != "out" && !task.keys().contains(&key.as_str()) {
                return Err(CliError::UnusedKey { key: key.clone(), task: task.name(), origin: *origin });
            }
        }
        let r = Reader { raw: self };
        let defaults = SolverConfig::default();
        let solver = SolverConfig {
            iterations: r.number("iterations")?.unwrap_or(defaults.iterations),
            initial_step: r.number("initial_step")?.unwrap_or(defaults.initial_step),
            decay: r.number("decay")?.unwrap_or(defaults.decay),
            restarts: r.number("restarts")?.unwrap_or(defaults.restarts),
            seed: r.number("seed")?.unwrap_or(defaults.seed),
            smoothing: r.number("smoothing")?.unwrap_or(defaults.smoothing),
            tolerance: r.number("tolerance")?.unwrap_or(defaults.tolerance),
        };
        solver.validate().map_err(|e| CliError::field("solver", e.to_string()))?;

        let n = r.number("n")?.unwrap_or(2u32);
        if n < 2 {
            return Err(CliError::field("n", format!("dimension must be at least 2, got {n}")));
        }
        let q = r.list("q")?.unwrap_or_else(|| vec![1.0]);
        let q_dim = if task == Task::SurfaceClassify { n } else { 2 };
        let q_top = q_dim as f64 / (q_dim as f64 - 1.0);
        if q.is_empty() {
            return Err(CliError::field("q", "empty list"));
        }
        for &v in &q {
            if !(v > 0.0 && v < q_top) {
                return Err(CliError::field("q", format!("{v} outside (0, {q_top}) for n = {q_dim}")));
            }
        }

        let target = match task {
            Task::Constants | Task::SphereCertificate => None,
            Task::DomainCertificate | Task::DomainSweep | Task::Solve => Some(Target::Domain(r.domain()?)),
            Task::SurfaceClassify => Some(Target::Surface(r.surface()?)),
            Task::ExpansionAudit => match (self.get("shape"), self.get("surface")) {
                (Some(_), None) => Some(Target::Domain(r.domain()?)),
                (None, Some(_)) => Some(Target::Surface(r.surface()?)),
                _ => return Err(CliError::field("shape", "expansion-audit needs exactly one of `shape` or `surface`")),
            },
        };

        let n_min = r.number("n_min")?.unwrap_or(2u32);
        let n_max = r.number("n_max")?.unwrap_or(5u32);
        if !(1 <= n_min && n_min <= n_max && n_max <= 64) {
            return Err(CliError::field("n_max", format!("need 1 ≤ n_min ≤ n_max ≤ 64, got {n_min}..{n_max}")));
        }

        let h: f64 = r.number("h")?.unwrap_or(1.0 / 128.0);
        if !(h > 0.0 && h.is_finite()) {
            return Err(CliError::field("h", format!("must be positive, got {h}")));
        }
        if let Some(Target::Domain(spec)) = &target {
            let curve = BoundaryCurve::from_spec(spec).map_err(|e| CliError::field("shape", e.to_string()))?;
            let limit = 1.0 / (8.0 * curve.max_abs_curvature());
            if h >= limit {
                return Err(CliError::field("h", format!("{h} must be below {limit:.6} (an eighth of the smallest curvature radius)")));
            }
        }

        let eps_range = match (r.number::<f64>("eps_min")?, r.number::<f64>("eps_max")?) {
            (None, None) => None,
            (Some(lo), Some(hi)) if lo > 0.0 && lo <= hi && hi.is_finite() => Some((lo, hi)),
            (Some(lo), Some(hi)) => {
                return Err(CliError::field("eps_max", format!("need 0 < eps_min ≤ eps_max, got {lo}, {hi}")))
            }
            _ => return Err(CliError::field("eps_min", "eps_min and eps_max go together")),
        };
        let eps_count = r.number("eps_count")?.unwrap_or(16usize);
        if eps_count < 2 {
            return Err(CliError::field("eps_count", format!("need at least 2 radii, got {eps_count}")));
        }
        let eps = r.list("eps")?.unwrap_or_default();
        if let Some(bad) = eps.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
            return Err(CliError::field("eps", format!("radii must be positive, got {bad}")));
        }
        if eps.len() == 1 {
            return Err(CliError::field("eps", "an audit needs at least two radii"));
        }

        Ok(ExperimentConfig {
            task,
            target,
            dims: (n_min, n_max),
            n,
            q,
            h,
            eps_range,
            eps_count,
            eps,
            solver,
            with_solver: r.boolean("with_solver")?.unwrap_or(false),
            out: self.get("out").map_or_else(|| PathBuf::from("out"), |(v, _)| PathBuf::from(v)),
        })
    }
}

struct Reader<'a> {
    raw: &'a RawConfig,
}

impl Reader<'_> {
    fn number<T: FromStr>(&self, key: &'static str) -> Result<Option<T>> {
        self.raw
            .get(key)
            .map(|(v, origin)| {
                v.parse::<T>().map_err(|_| CliError::Value { key, value: v.clone(), origin: *origin })
            })
            .transpose()
    }

    fn required(&self, key: &'static str, what: &str) -> Result<f64> {
        self.number(key)?.ok_or_else(|| CliError::field(key, format!("required for {what}")))
    }

    fn list(&self, key: &'static str) -> Result<Option<Vec<f64>>> {
        self.raw
            .get(key)
            .map(|(v, origin)| {
                v.split(',')
                    .map(|x| x.trim().parse::<f64>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|_| CliError::Value { key, value: v.clone(), origin: *origin })
            })
            .transpose()
    }

    fn boolean(&self, key: &'static str) -> Result<Option<bool>> {
        self.raw
            .get(key)
            .map(|(v, origin)| match v.as_str() {
                "true" | "yes" | "1" => Ok(true),
                "false" | "no" | "0" => Ok(false),
                _ => Err(CliError::Value { key, value: v.clone(), origin: *origin }),
            })
            .transpose()
    }

    fn domain(&self) -> Result<DomainSpec> {
        let (shape, _) = self.raw.get("shape").ok_or_else(|| CliError::field("shape", "missing"))?;
        let spec = match shape.as_str() {
            "disk" => DomainSpec::Disk { radius: self.number("radius")?.unwrap_or(1.0) },
            "ellipse" => DomainSpec::Ellipse { semi_x: self.required("a", "an ellipse")?, semi_y: self.required("b", "an ellipse")? },
            "fourier" => DomainSpec::Fourier {
                mean_radius: self.required("mean_radius", "a Fourier domain")?,
                cos: self.list("cos")?.unwrap_or_default(),
                sin: self.list("sin")?.unwrap_or_default(),
            },
            other => return Err(CliError::field("shape", format!("unknown shape `{other}` (disk, ellipse, fourier)"))),
        };
        BoundaryCurve::from_spec(&spec).map_err(|e| CliError::field("shape", e.to_string()))?;
        Ok(spec)
    }

    fn surface(&self) -> Result<SurfaceModel> {
        let (kind, _) = self.raw.get("surface").ok_or_else(|| CliError::field("surface", "missing"))?;
        let model = match kind.as_str() {
            "sphere" => SurfaceModel::RoundSphere { radius: self.number("radius")?.unwrap_or(1.0) },
            "spheroid" => SurfaceModel::Spheroid { a: self.required("a", "a spheroid")?, c: self.required("c", "a spheroid")? },
            "flat-torus" => SurfaceModel::FlatTorus { l1: self.required("l1", "a flat torus")?, l2: self.required("l2", "a flat torus")? },
            other => return Err(CliError::field("surface", format!("unknown surface `{other}` (sphere, spheroid, flat-torus)"))),
        };
        model.validate().map_err(|e| CliError::field("surface", e.to_string()))?;
        Ok(model)
    }
}

/// Parses and validates a config file body.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    RawConfig::parse(text)?.resolve()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_constants() {
        let c = parse_config("task = constants\nn_max = 5").unwrap();
        assert_eq!(c.task, Task::Constants);
        assert_eq!(c.dims, (2, 5));
    }

    #[test]
    fn q_outside_range_is_rejected() {
        let err = parse_config("task = solve\nshape = disk\nq = 2.5").unwrap_err();
        assert!(matches!(err, CliError::Field { field: "q", .. }), "{err}");
    }

    #[test]
    fn ellipse_sweep() {
        let c = parse_config("task = domain-sweep\nshape = ellipse\na = 2\nb = 1\nq = 1\neps_min = 0.02\neps_max = 0.4").unwrap();
        assert_eq!(c.target, Some(Target::Domain(DomainSpec::Ellipse { semi_x: 2.0, semi_y: 1.0 })));
        assert_eq!(c.eps_range, Some((0.02, 0.4)));
    }

    #[test]
    fn comments_and_line_numbers() {
        let c = parse_config("# header\ntask = constants # inline\n\nn_min = 3\n").unwrap();
        assert_eq!(c.dims, (3, 5));
        match parse_config("task = constants\n\nbogus = 1").unwrap_err() {
            CliError::UnknownKey { key, origin } => {
                assert_eq!(key, "bogus");
                assert_eq!(origin, Origin::Line(3));
            }
            e => panic!("{e}"),
        }
        match parse_config("task = constants\nno equals sign").unwrap_err() {
            CliError::Parse { line, .. } => assert_eq!(line, 2),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn keys_must_belong_to_the_task() {
        assert!(matches!(
            parse_config("task = constants\nh = 0.01").unwrap_err(),
            CliError::UnusedKey { .. }
        ));
    }

    #[test]
    fn flags_win() {
        let mut raw = RawConfig::parse("task = solve\nshape = disk\nq = 1\nseed = 3").unwrap();
        raw.set("seed", "9").unwrap();
        raw.set("q", "0.5, 1.5").unwrap();
        let c = raw.resolve().unwrap();
        assert_eq!(c.solver.seed, 9);
        assert_eq!(c.q, vec![0.5, 1.5]);
        assert!(raw.set("nope", "1").is_err());
    }

    #[test]
    fn range_violations_name_the_field() {
        let cases = [
            ("task = solve\nshape = disk\nh = 0.5", "h"),
            ("task = solve\nshape = disk\niterations = 0", "solver"),
            ("task = domain-sweep\nshape = disk\neps_min = 0.3\neps_max = 0.1", "eps_max"),
            ("task = surface-classify\nsurface = spheroid\na = 1", "c"),
            ("task = domain-certificate\nshape = rectangle", "shape"),
            ("task = expansion-audit\nshape = disk\nsurface = sphere", "shape"),
        ];
        for (text, field) in cases {
            match parse_config(text) {
                Err(CliError::Field { field: f, .. }) => assert_eq!(f, field, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
        assert!(matches!(parse_config("task = nope").unwrap_err(), CliError::UnknownTask(_)));
        assert!(matches!(parse_config("task = solve\nshape = disk\nseed = x").unwrap_err(), CliError::Value { key: "seed", .. }));
    }

    #[test]
    fn surface_dimension_sets_the_exponent_range() {
        assert!(parse_config("task = surface-classify\nsurface = sphere\nn = 3\nq = 1.4").is_ok());
        assert!(parse_config("task = surface-classify\nsurface = sphere\nn = 3\nq = 1.6").is_err());
    }
}
