//! TOML experiment configuration. See `docs/config.md` for the schema.

use std::fmt;
use std::ops::Range;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use dvec_core::agent::{default_beta, default_gamma, MeasurementModel, ScheduleError, ScheduleParams};
use dvec_core::comm::{AcceptDirection, AcceptRule, InvalidBoundPolicy};
use dvec_core::geometry::{ConvexDomain, Point2};
use dvec_core::gp::SearchConfig;
use dvec_core::sim::{DensitySpec, GaussianBump, OracleConfig, RunMode, ScenarioConfig};
use serde::Deserialize;
use toml::Spanned;

/// A configuration problem, anchored to a line of the source file when possible.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigError {
    pub path: PathBuf,
    /// 1-based line and column.
    pub location: Option<(usize, usize)>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.location {
            Some((line, col)) => write!(f, "{}:{}:{}: {}", self.path.display(), line, col, self.message),
            None => write!(f, "{}: {}", self.path.display(), self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

/// Which runs get their final fields exported.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldExport {
    None,
    /// Only runs with the first configured seed.
    FirstSeed,
    All,
}

#[derive(Clone, Debug)]
pub struct Scenario {
    pub id: String,
    pub config: ScenarioConfig<f64>,
}

/// A validated experiment: every scenario runs under every mode and seed.
#[derive(Clone, Debug)]
pub struct ExperimentSpec {
    pub scenarios: Vec<Scenario>,
    pub modes: Vec<RunMode>,
    pub seeds: Vec<u64>,
    /// Root of the seed hierarchy.
    pub experiment_seed: u64,
    pub output_dir: PathBuf,
    pub parallelism: usize,
    pub export_fields: FieldExport,
}

impl ExperimentSpec {
    pub fn run_count(&self) -> usize {
        self.scenarios.len() * self.modes.len() * self.seeds.len()
    }

    pub fn iterations(&self) -> usize {
        self.scenarios.first().map(|s| s.config.iterations()).unwrap_or(0)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Raw {
    #[serde(default)]
    domain: RawDomain,
    density: Spanned<Vec<Spanned<RawDensity>>>,
    #[serde(default)]
    robots: RawRobots,
    #[serde(default)]
    schedules: RawSchedules,
    #[serde(default)]
    gp: RawGp,
    #[serde(default)]
    comm: RawComm,
    #[serde(default)]
    oracle: RawOracle,
    #[serde(default)]
    experiment: RawExperiment,
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDomain {
    vertices: Option<Spanned<Vec<[f64; 2]>>>,
    grid_resolution: Option<Spanned<usize>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDensity {
    id: Spanned<String>,
    preset: Option<Spanned<String>>,
    components: Option<Vec<Spanned<RawBump>>>,
    offset: Option<Spanned<f64>>,
    count: Option<Spanned<usize>>,
    std: Option<Spanned<f64>>,
    seed: Option<u64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBump {
    weight: f64,
    mean: [f64; 2],
    std: f64,
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRobots {
    count: Option<Spanned<usize>>,
    noise_std: Option<Spanned<f64>>,
    known_density: Option<bool>,
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSchedules {
    iterations: Option<Spanned<usize>>,
    beta: Option<Spanned<Vec<f64>>>,
    gamma: Option<Spanned<Vec<f64>>>,
    kappa: Option<Spanned<f64>>,
    dt: Option<Spanned<f64>>,
    eps_conv: Option<Spanned<f64>>,
    max_steps: Option<Spanned<usize>>,
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGp {
    tau_min: Option<Spanned<f64>>,
    tau_max: Option<Spanned<f64>>,
    tau_grid_points: Option<Spanned<usize>>,
    tau_default: Option<Spanned<f64>>,
    log_tolerance: Option<Spanned<f64>>,
    density_floor: Option<Spanned<f64>>,
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawComm {
    threshold: Option<Spanned<f64>>,
    direction: Option<Spanned<String>>,
    invalid_bound: Option<Spanned<String>>,
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOracle {
    restarts: Option<Spanned<usize>>,
    tolerance: Option<Spanned<f64>>,
    max_sweeps: Option<Spanned<usize>>,
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExperiment {
    seed: Option<u64>,
    seeds: Option<Spanned<Vec<u64>>>,
    modes: Option<Spanned<Vec<Spanned<String>>>>,
    output_dir: Option<String>,
    parallelism: Option<Spanned<usize>>,
    export_fields: Option<Spanned<String>>,
}

/// Reads and validates a configuration file.
pub fn load_config(path: &Path) -> Result<ExperimentSpec, ConfigError> {
    let src = std::fs::read_to_string(path).map_err(|e| ConfigError {
        path: path.to_path_buf(),
        location: None,
        message: format!("cannot read file: {e}"),
    })?;
    parse_config(&src, path)
}

/// Parses configuration text; `path` is only used in error messages.
pub fn parse_config(src: &str, path: &Path) -> Result<ExperimentSpec, ConfigError> {
    let ctx = Ctx { src, path };
    let raw: Raw = toml::from_str(src).map_err(|e| ctx.err(e.span(), e.message().to_string()))?;
    ctx.build(raw)
}

struct Ctx<'a> {
    src: &'a str,
    path: &'a Path,
}

impl Ctx<'_> {
    fn err(&self, span: Option<Range<usize>>, message: impl Into<String>) -> ConfigError {
        ConfigError { path: self.path.to_path_buf(), location: span.map(|s| line_col(self.src, s.start)), message: message.into() }
    }

    fn at<T>(&self, v: &Spanned<T>, message: impl Into<String>) -> ConfigError {
        self.err(Some(v.span()), message)
    }

    fn build(&self, raw: Raw) -> Result<ExperimentSpec, ConfigError> {
        let domain = Arc::new(self.domain(&raw.domain)?);
        let diam = domain.diameter();

        let robots = match &raw.robots.count {
            Some(c) if *c.get_ref() == 0 => return Err(self.at(c, "robots.count must be at least 1")),
            Some(c) => *c.get_ref(),
            None => 7,
        };
        let noise_std = opt(&raw.robots.noise_std, 0.1);
        let known_density = raw.robots.known_density.unwrap_or(false);
        if let Some(s) = &raw.robots.noise_std {
            if !(*s.get_ref() >= 0.0) || !s.get_ref().is_finite() {
                return Err(self.at(s, "robots.noise_std must be finite and nonnegative"));
            }
            if !known_density && *s.get_ref() == 0.0 {
                return Err(self.at(s, "robots.noise_std must be positive unless robots.known_density = true"));
            }
        }

        let schedule = self.schedule(&raw.schedules, diam)?;
        let search = self.search(&raw.gp, diam)?;
        let density_floor = opt(&raw.gp.density_floor, 1e-6);
        if let Some(f) = &raw.gp.density_floor {
            if !(*f.get_ref() > 0.0) {
                return Err(self.at(f, "gp.density_floor must be positive"));
            }
        }
        let accept = self.accept(&raw.comm)?;
        let oracle = self.oracle(&raw.oracle)?;

        if raw.density.get_ref().is_empty() {
            return Err(self.at(&raw.density, "at least one [[density]] table is required"));
        }
        let mut scenarios: Vec<Scenario> = Vec::new();
        for d in raw.density.get_ref() {
            let id = d.get_ref().id.get_ref().clone();
            if id.is_empty() || id.contains(|c: char| c == ',' || c == '/' || c.is_whitespace()) {
                return Err(self.at(&d.get_ref().id, "density id must be non-empty without commas, slashes or whitespace"));
            }
            if scenarios.iter().any(|s| s.id == id) {
                return Err(self.at(&d.get_ref().id, format!("duplicate density id `{id}`")));
            }
            let spec = self.density(d)?;
            let config = ScenarioConfig {
                domain: domain.clone(),
                density: spec,
                robots,
                schedule: schedule.clone(),
                measurement: MeasurementModel::new(noise_std),
                search,
                accept,
                oracle,
                known_density,
                density_floor,
            };
            if let Err(e) = config.validate() {
                return Err(self.at(d, format!("density `{id}`: {e}")));
            }
            scenarios.push(Scenario { id, config });
        }

        let ex = &raw.experiment;
        let modes = match &ex.modes {
            None => RunMode::ALL.to_vec(),
            Some(list) => {
                if list.get_ref().is_empty() {
                    return Err(self.at(list, "experiment.modes must not be empty"));
                }
                let mut modes = Vec::new();
                for m in list.get_ref() {
                    let mode: RunMode = m.get_ref().parse().map_err(|e: String| self.at(m, e))?;
                    if modes.contains(&mode) {
                        return Err(self.at(m, format!("mode {mode} listed twice")));
                    }
                    modes.push(mode);
                }
                modes.sort();
                modes
            }
        };
        let seeds = match &ex.seeds {
            None => (0..5).collect(),
            Some(s) => {
                if s.get_ref().is_empty() {
                    return Err(self.at(s, "experiment.seeds must not be empty"));
                }
                let mut seen = s.get_ref().clone();
                seen.sort_unstable();
                if seen.windows(2).any(|w| w[0] == w[1]) {
                    return Err(self.at(s, "experiment.seeds contains duplicates"));
                }
                s.get_ref().clone()
            }
        };
        let parallelism = match &ex.parallelism {
            Some(p) if *p.get_ref() == 0 => return Err(self.at(p, "experiment.parallelism must be at least 1")),
            Some(p) => *p.get_ref(),
            None => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
        };
        let export_fields = match &ex.export_fields {
            None => FieldExport::FirstSeed,
            Some(s) => match s.get_ref().as_str() {
                "none" => FieldExport::None,
                "first-seed" => FieldExport::FirstSeed,
                "all" => FieldExport::All,
                other => return Err(self.at(s, format!("unknown export_fields `{other}` (expected none, first-seed or all)"))),
            },
        };
        Ok(ExperimentSpec {
            scenarios,
            modes,
            seeds,
            experiment_seed: ex.seed.unwrap_or(0),
            output_dir: PathBuf::from(ex.output_dir.clone().unwrap_or_else(|| "output".into())),
            parallelism,
            export_fields,
        })
    }

    fn domain(&self, raw: &RawDomain) -> Result<ConvexDomain<f64>, ConfigError> {
        let res = match &raw.grid_resolution {
            Some(r) if *r.get_ref() == 0 => return Err(self.at(r, "domain.grid_resolution must be at least 1")),
            Some(r) => *r.get_ref(),
            None => 100,
        };
        match &raw.vertices {
            None => Ok(ConvexDomain::unit_square(res)),
            Some(v) => {
                let pts = v.get_ref().iter().map(|&[x, y]| Point2::new(x, y)).collect();
                ConvexDomain::new(pts, res).map_err(|e| self.at(v, e.to_string()))
            }
        }
    }

    fn density(&self, d: &Spanned<RawDensity>) -> Result<DensitySpec<f64>, ConfigError> {
        let r = d.get_ref();
        let offset = opt(&r.offset, 0.0);
        if let Some(o) = &r.offset {
            if !o.get_ref().is_finite() {
                return Err(self.at(o, "offset must be finite"));
            }
        }
        let random_only = |name: &str| format!("`{name}` only applies to preset = \"random-bumps\"");
        let preset = r.preset.as_ref().map(|p| p.get_ref().as_str());
        if preset != Some("random-bumps") {
            if let Some(c) = &r.count {
                return Err(self.at(c, random_only("count")));
            }
            if let Some(s) = &r.std {
                return Err(self.at(s, random_only("std")));
            }
        }
        let mut spec = match (&r.preset, &r.components) {
            (Some(p), Some(_)) => return Err(self.at(p, "give either `preset` or `components`, not both")),
            (None, None) => return Err(self.at(d, "density needs `preset` or `components`")),
            (None, Some(comps)) => {
                let mut out = Vec::new();
                for c in comps {
                    let b = c.get_ref();
                    if !(b.std > 0.0) || !b.std.is_finite() {
                        return Err(self.at(c, "component std must be positive"));
                    }
                    if !b.weight.is_finite() || !b.mean.iter().all(|v| v.is_finite()) {
                        return Err(self.at(c, "component weight and mean must be finite"));
                    }
                    out.push(GaussianBump::new(b.weight, Point2::new(b.mean[0], b.mean[1]), b.std));
                }
                DensitySpec::new(out, 0.0)
            }
            (Some(p), None) => match p.get_ref().as_str() {
                "bimodal" => DensitySpec::bimodal(),
                "three-bumps" => DensitySpec::three_bumps(),
                "random-bumps" => {
                    let count = opt(&r.count, 9);
                    let std = opt(&r.std, 0.12);
                    if let Some(c) = r.count.as_ref().filter(|c| *c.get_ref() == 0) {
                        return Err(self.at(c, "count must be at least 1"));
                    }
                    if let Some(s) = r.std.as_ref().filter(|s| !(*s.get_ref() > 0.0)) {
                        return Err(self.at(s, "std must be positive"));
                    }
                    DensitySpec::random_bumps(count, std, r.seed.unwrap_or(0))
                }
                other => return Err(self.at(p, format!("unknown preset `{other}` (expected bimodal, three-bumps or random-bumps)"))),
            },
        };
        if r.seed.is_some() && preset != Some("random-bumps") {
            return Err(self.at(d, random_only("seed")));
        }
        spec.offset = offset;
        Ok(spec)
    }

    fn schedule(&self, raw: &RawSchedules, diam: f64) -> Result<ScheduleParams<f64>, ConfigError> {
        let lens = [raw.beta.as_ref().map(|b| b.get_ref().len()), raw.gamma.as_ref().map(|g| g.get_ref().len())];
        let iterations = match &raw.iterations {
            Some(n) if *n.get_ref() == 0 => return Err(self.at(n, "schedules.iterations must be at least 1")),
            Some(n) => *n.get_ref(),
            None => lens.iter().flatten().copied().next().unwrap_or(15),
        };
        let beta = raw.beta.as_ref().map(|b| b.get_ref().clone()).unwrap_or_else(|| default_beta(iterations));
        let gamma = raw.gamma.as_ref().map(|g| g.get_ref().clone()).unwrap_or_else(|| default_gamma(iterations));
        for (name, list) in [("beta", &raw.beta), ("gamma", &raw.gamma)] {
            if let Some(l) = list {
                if l.get_ref().len() != iterations {
                    return Err(self.at(l, format!("schedules.{name} has {} entries, expected {iterations}", l.get_ref().len())));
                }
            }
        }
        let kappa = opt(&raw.kappa, 1.0);
        let dt = opt(&raw.dt, 0.05);
        let eps = opt(&raw.eps_conv, 1e-3 * diam);
        let max_steps = opt(&raw.max_steps, 500);
        ScheduleParams::new(beta, gamma, kappa, dt, eps, max_steps).map_err(|e| {
            let span = match e {
                ScheduleError::Empty | ScheduleError::LengthMismatch { .. } => raw.iterations.as_ref().map(|s| s.span()),
                ScheduleError::Beta { .. } => raw.beta.as_ref().map(|s| s.span()),
                ScheduleError::Gamma { .. } => raw.gamma.as_ref().map(|s| s.span()),
                ScheduleError::Kappa => raw.kappa.as_ref().map(|s| s.span()),
                ScheduleError::Step => raw.dt.as_ref().or(raw.kappa.as_ref()).map(|s| s.span()),
                ScheduleError::Tolerance => raw.eps_conv.as_ref().map(|s| s.span()),
                ScheduleError::MaxSteps => raw.max_steps.as_ref().map(|s| s.span()),
            };
            self.err(span, format!("schedules: {e}"))
        })
    }

    fn search(&self, raw: &RawGp, diam: f64) -> Result<SearchConfig<f64>, ConfigError> {
        let mut s = SearchConfig::for_diameter(diam);
        s.tau_min = opt(&raw.tau_min, s.tau_min);
        s.tau_max = opt(&raw.tau_max, s.tau_max);
        s.grid_points = opt(&raw.tau_grid_points, s.grid_points);
        s.tau_default = opt(&raw.tau_default, s.tau_default);
        s.log_tol = opt(&raw.log_tolerance, s.log_tol);
        let first = |fields: &[Option<Range<usize>>]| fields.iter().flatten().next().cloned();
        let spans = [raw.tau_min.as_ref().map(|v| v.span()), raw.tau_max.as_ref().map(|v| v.span())];
        if !(s.tau_min > 0.0 && s.tau_max >= s.tau_min && s.tau_max.is_finite()) {
            return Err(self.err(first(&spans), "gp: need 0 < tau_min <= tau_max"));
        }
        if let Some(g) = raw.tau_grid_points.as_ref().filter(|g| *g.get_ref() == 0) {
            return Err(self.at(g, "gp.tau_grid_points must be at least 1"));
        }
        if let Some(t) = raw.tau_default.as_ref().filter(|t| !(*t.get_ref() > 0.0)) {
            return Err(self.at(t, "gp.tau_default must be positive"));
        }
        if let Some(t) = raw.log_tolerance.as_ref().filter(|t| !(*t.get_ref() > 0.0)) {
            return Err(self.at(t, "gp.log_tolerance must be positive"));
        }
        Ok(s)
    }

    fn accept(&self, raw: &RawComm) -> Result<AcceptRule<f64>, ConfigError> {
        let threshold = opt(&raw.threshold, 0.0);
        if let Some(t) = raw.threshold.as_ref().filter(|t| !(*t.get_ref() >= 0.0)) {
            return Err(self.at(t, "comm.threshold must be nonnegative"));
        }
        let direction = match &raw.direction {
            None => AcceptDirection::AtLeast,
            Some(d) => match d.get_ref().as_str() {
                "at-least" => AcceptDirection::AtLeast,
                "at-most" => AcceptDirection::AtMost,
                other => return Err(self.at(d, format!("unknown direction `{other}` (expected at-least or at-most)"))),
            },
        };
        let invalid = match &raw.invalid_bound {
            None => InvalidBoundPolicy::Accept,
            Some(d) => match d.get_ref().as_str() {
                "accept" => InvalidBoundPolicy::Accept,
                "infinite" => InvalidBoundPolicy::Infinite,
                other => return Err(self.at(d, format!("unknown invalid_bound `{other}` (expected accept or infinite)"))),
            },
        };
        Ok(AcceptRule::new(threshold, direction).with_invalid(invalid))
    }

    fn oracle(&self, raw: &RawOracle) -> Result<OracleConfig<f64>, ConfigError> {
        let d = OracleConfig::<f64>::default();
        if let Some(r) = raw.restarts.as_ref().filter(|r| *r.get_ref() == 0) {
            return Err(self.at(r, "oracle.restarts must be at least 1"));
        }
        if let Some(r) = raw.max_sweeps.as_ref().filter(|r| *r.get_ref() == 0) {
            return Err(self.at(r, "oracle.max_sweeps must be at least 1"));
        }
        if let Some(t) = raw.tolerance.as_ref().filter(|t| !(*t.get_ref() > 0.0)) {
            return Err(self.at(t, "oracle.tolerance must be positive"));
        }
        Ok(OracleConfig {
            restarts: opt(&raw.restarts, d.restarts),
            tolerance: opt(&raw.tolerance, d.tolerance),
            max_sweeps: opt(&raw.max_sweeps, d.max_sweeps),
        })
    }
}

fn opt<T: Copy>(v: &Option<Spanned<T>>, default: T) -> T {
    v.as_ref().map(|s| *s.get_ref()).unwrap_or(default)
}

/// 1-based line and column of a byte offset.
fn line_col(src: &str, offset: usize) -> (usize, usize) {
    let offset = offset.min(src.len());
    let before = &src[..offset];
    let line = before.matches('\n').count() + 1;
    let col = before.rfind('\n').map(|i| offset - i).unwrap_or(offset + 1);
    (line, col)
}
