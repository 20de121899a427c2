//! Flat `key = value` experiment configuration.
//!
//! One key per line, `#` starts a comment, blank lines are ignored. Keys
//! are validated against a typed schema and every error names the
//! offending key. [`ExperimentConfig::render`] writes the canonical form,
//! which parses back to an equal config.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::problems::Link;
use crate::solvers::{ArmijoParams, StepRule};

/// Environment variable that replaces the seed list, e.g. `QZO_SEEDS=1,2`.
pub const SEEDS_ENV: &str = "QZO_SEEDS";

/// Environment variable that overrides the wdbc path of SVM configs.
pub const WDBC_ENV: &str = "QZO_WDBC";

pub(crate) fn config_error(path: &str, message: impl Into<String>) -> Error {
    Error::Config {
        path: path.to_string(),
        message: message.into(),
    }
}

/// Shortest round-tripping rendering, switching to exponent form for very
/// small or large magnitudes.
pub(crate) fn fmt_real(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-4..1e6).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SvmData {
    Wdbc { path: String },
    Synthetic(SyntheticSvm),
    /// The wdbc file when it exists, the synthetic set otherwise.
    Auto { path: String, fallback: SyntheticSvm },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticSvm {
    pub samples: usize,
    pub dim: usize,
    pub scale: f64,
    pub shift: f64,
    pub flip: f64,
    pub data_seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProblemSpec {
    Quadratic { dim: usize, beta: f64, center: f64 },
    Hard { t: usize, sigma: f64 },
    DoubleWell,
    Bilinear,
    ProductSquare,
    Glm { link: Link, samples: usize, dim: usize, data_seed: u64 },
    /// `standardize` z-scores every feature before building the loss.
    Svm { alpha: f64, data: SvmData, standardize: bool },
    Radial { dim: usize, data_seed: u64 },
    Bandit { arms: usize, tau: f64, data_seed: u64 },
    MassSpring {
        sequences: usize,
        horizon: usize,
        warmup: usize,
        noise: f64,
        perturbation: f64,
        data_seed: u64,
    },
}

impl ProblemSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Quadratic { .. } => "quadratic",
            Self::Hard { .. } => "hard",
            Self::DoubleWell => "double_well",
            Self::Bilinear => "bilinear",
            Self::ProductSquare => "product_square",
            Self::Glm { .. } => "glm",
            Self::Svm { .. } => "svm",
            Self::Radial { .. } => "radial",
            Self::Bandit { .. } => "bandit",
            Self::MassSpring { .. } => "mass_spring",
        }
    }
}

/// Feasible set; balls are centred at the origin and box bounds apply to
/// every coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SetSpec {
    Whole,
    Box { lower: f64, upper: f64 },
    L2 { radius: f64 },
    L1 { radius: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Rm,
    Gd,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Rm => "rm",
            Self::Gd => "gd",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitSpec {
    /// `scale * N(0, I)`.
    Gaussian { scale: f64 },
    Constant { value: f64 },
    ProblemDefault,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub name: String,
    pub problem: ProblemSpec,
    pub set: SetSpec,
    pub method: Method,
    pub iterations: usize,
    pub step: StepRule,
    pub mu: f64,
    pub batch: usize,
    pub seeds: Vec<u64>,
    pub init: InitSpec,
    /// When positive, seed `i` starts from the initial point of seed
    /// `i % init_points`, so several repeats share a start.
    pub init_points: usize,
    pub record_time: bool,
    pub output: String,
}

/// Key-value pairs still waiting to be consumed by the schema.
struct Fields {
    map: BTreeMap<String, String>,
}

impl Fields {
    fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                config_error(&format!("line {}", i + 1), format!("expected `key = value`, got `{line}`"))
            })?;
            let key = key.trim().to_string();
            if key.is_empty() {
                return Err(config_error(&format!("line {}", i + 1), "empty key"));
            }
            if map.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(config_error(&key, "duplicate key"));
            }
        }
        Ok(Self { map })
    }

    fn take_str(&mut self, key: &str) -> Option<String> {
        self.map.remove(key)
    }

    fn require_str(&mut self, key: &str) -> Result<String> {
        self.take_str(key).ok_or_else(|| config_error(key, "missing required key"))
    }

    fn take<T: FromStr>(&mut self, key: &str) -> Result<Option<T>>
    where
        T::Err: fmt::Display,
    {
        self.take_str(key)
            .map(|v| v.parse::<T>().map_err(|e| config_error(key, format!("cannot parse `{v}`: {e}"))))
            .transpose()
    }

    fn get<T: FromStr>(&mut self, key: &str, default: T) -> Result<T>
    where
        T::Err: fmt::Display,
    {
        Ok(self.take(key)?.unwrap_or(default))
    }

    fn require<T: FromStr>(&mut self, key: &str) -> Result<T>
    where
        T::Err: fmt::Display,
    {
        self.take(key)?.ok_or_else(|| config_error(key, "missing required key"))
    }

    fn positive(&mut self, key: &str, default: Option<f64>) -> Result<f64> {
        let v = match default {
            Some(d) => self.get(key, d)?,
            None => self.require(key)?,
        };
        if !(v > 0.0 && v.is_finite()) {
            return Err(config_error(key, format!("must be positive, got {v}")));
        }
        Ok(v)
    }

    fn count(&mut self, key: &str, default: Option<usize>) -> Result<usize> {
        let v = match default {
            Some(d) => self.get(key, d)?,
            None => self.require(key)?,
        };
        if v == 0 {
            return Err(config_error(key, "must be at least 1"));
        }
        Ok(v)
    }

    fn finish(self) -> Result<()> {
        match self.map.into_keys().next() {
            Some(k) => Err(config_error(&k, "unknown key")),
            None => Ok(()),
        }
    }
}

fn parse_problem(f: &mut Fields) -> Result<ProblemSpec> {
    let kind = f.require_str("problem")?;
    let seed = |f: &mut Fields| f.get("problem.data_seed", 0u64);
    Ok(match kind.as_str() {
        "quadratic" => ProblemSpec::Quadratic {
            dim: f.count("problem.dim", None)?,
            beta: f.positive("problem.beta", Some(1.0))?,
            center: f.get("problem.center", 0.0)?,
        },
        "hard" => {
            let sigma = f.positive("problem.sigma", Some(1e-6))?;
            if sigma > 1.0 {
                return Err(config_error("problem.sigma", "must lie in (0, 1]"));
            }
            ProblemSpec::Hard {
                t: f.count("problem.t", None)?,
                sigma,
            }
        }
        "double_well" => ProblemSpec::DoubleWell,
        "bilinear" => ProblemSpec::Bilinear,
        "product_square" => ProblemSpec::ProductSquare,
        "glm" => ProblemSpec::Glm {
            link: f.require("problem.link")?,
            samples: f.count("problem.samples", None)?,
            dim: f.count("problem.dim", None)?,
            data_seed: seed(f)?,
        },
        "svm" => {
            let alpha = f.positive("problem.alpha", None)?;
            if alpha > 1.0 {
                return Err(config_error("problem.alpha", "must lie in (0, 1]"));
            }
            let source = f.require_str("problem.data")?;
            let synthetic = |f: &mut Fields| -> Result<SyntheticSvm> {
                let flip = f.get("problem.flip", 0.0)?;
                if !(0.0..=1.0).contains(&flip) {
                    return Err(config_error("problem.flip", "must lie in [0, 1]"));
                }
                Ok(SyntheticSvm {
                    samples: f.count("problem.samples", None)?,
                    dim: f.count("problem.dim", None)?,
                    scale: f.positive("problem.scale", Some(1.0))?,
                    shift: f.get("problem.shift", 1.0)?,
                    flip,
                    data_seed: seed(f)?,
                })
            };
            let data = match source.as_str() {
                "wdbc" => SvmData::Wdbc {
                    path: f.require_str("problem.path")?,
                },
                "synthetic" => SvmData::Synthetic(synthetic(f)?),
                "auto" => SvmData::Auto {
                    path: f.require_str("problem.path")?,
                    fallback: synthetic(f)?,
                },
                other => {
                    return Err(config_error(
                        "problem.data",
                        format!("expected wdbc, synthetic or auto, got `{other}`"),
                    ))
                }
            };
            let standardize = f.get("problem.standardize", false)?;
            ProblemSpec::Svm { alpha, data, standardize }
        }
        "radial" => ProblemSpec::Radial {
            dim: f.count("problem.dim", None)?,
            data_seed: seed(f)?,
        },
        "bandit" => ProblemSpec::Bandit {
            arms: f.count("problem.arms", None)?,
            tau: f.positive("problem.tau", None)?,
            data_seed: seed(f)?,
        },
        "mass_spring" => {
            let spec = ProblemSpec::MassSpring {
                sequences: f.count("problem.sequences", None)?,
                horizon: f.count("problem.horizon", None)?,
                warmup: f.require("problem.warmup")?,
                noise: f.get("problem.noise", 1e-2)?,
                perturbation: f.positive("problem.perturbation", None)?,
                data_seed: seed(f)?,
            };
            if let ProblemSpec::MassSpring { horizon, warmup, noise, .. } = spec {
                if warmup > horizon {
                    return Err(config_error("problem.warmup", "must not exceed problem.horizon"));
                }
                if !(noise >= 0.0 && noise.is_finite()) {
                    return Err(config_error("problem.noise", "must be non-negative"));
                }
            }
            spec
        }
        other => return Err(config_error("problem", format!("unknown problem `{other}`"))),
    })
}

fn parse_set(f: &mut Fields) -> Result<SetSpec> {
    let kind = f.get("set", "whole".to_string())?;
    Ok(match kind.as_str() {
        "whole" => SetSpec::Whole,
        "box" => {
            let lower: f64 = f.get("set.lower", f64::NEG_INFINITY)?;
            let upper: f64 = f.get("set.upper", f64::INFINITY)?;
            if lower.is_nan() || upper.is_nan() || lower > upper {
                return Err(config_error("set.upper", "box needs set.lower <= set.upper"));
            }
            SetSpec::Box { lower, upper }
        }
        "l2" => SetSpec::L2 {
            radius: f.positive("set.radius", None)?,
        },
        "l1" => SetSpec::L1 {
            radius: f.positive("set.radius", None)?,
        },
        other => return Err(config_error("set", format!("expected whole, box, l2 or l1, got `{other}`"))),
    })
}

fn parse_step(f: &mut Fields) -> Result<StepRule> {
    let kind = f.require_str("step")?;
    let rule = match kind.as_str() {
        "fixed" => StepRule::Fixed(f.positive("step.h", None)?),
        "armijo" => {
            let d = ArmijoParams::default();
            StepRule::Armijo(ArmijoParams {
                h0: f.get("step.h0", d.h0)?,
                shrink: f.get("step.shrink", d.shrink)?,
                slope: f.get("step.slope", d.slope)?,
                max_backtracks: f.get("step.max_backtracks", d.max_backtracks)?,
            })
        }
        other => return Err(config_error("step", format!("expected fixed or armijo, got `{other}`"))),
    };
    rule.validate().map_err(|e| match e {
        Error::InvalidParameter { name, reason } => config_error(name, reason),
        e => e,
    })?;
    Ok(rule)
}

pub fn parse_seeds(text: &str, path: &str) -> Result<Vec<u64>> {
    let seeds = text
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<u64>()
                .map_err(|e| config_error(path, format!("bad seed `{}`: {e}", s.trim())))
        })
        .collect::<Result<Vec<_>>>()?;
    if seeds.is_empty() {
        return Err(config_error(path, "need at least one seed"));
    }
    let mut sorted = seeds.clone();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(config_error(path, "seeds must be distinct"));
    }
    Ok(seeds)
}

fn parse_init(f: &mut Fields) -> Result<InitSpec> {
    let kind = f.get("init", "gaussian".to_string())?;
    Ok(match kind.as_str() {
        "gaussian" => InitSpec::Gaussian {
            scale: f.positive("init.scale", Some(1.0))?,
        },
        "constant" => {
            let value: f64 = f.require("init.value")?;
            if !value.is_finite() {
                return Err(config_error("init.value", "must be finite"));
            }
            InitSpec::Constant { value }
        }
        "problem_default" => InitSpec::ProblemDefault,
        other => {
            return Err(config_error(
                "init",
                format!("expected gaussian, constant or problem_default, got `{other}`"),
            ))
        }
    })
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut f = Fields::parse(text)?;
        let name = f.require_str("name")?;
        if name.is_empty() || name.contains(char::is_whitespace) {
            return Err(config_error("name", "must be a non-empty word"));
        }
        let problem = parse_problem(&mut f)?;
        let set = parse_set(&mut f)?;
        let method = match f.require_str("method")?.as_str() {
            "rm" => Method::Rm,
            "gd" => Method::Gd,
            other => return Err(config_error("method", format!("expected rm or gd, got `{other}`"))),
        };
        let iterations = f.require("iterations")?;
        let step = parse_step(&mut f)?;
        let mu = f.positive("mu", Some(1e-6))?;
        let batch = f.count("batch", Some(1))?;
        let seeds = parse_seeds(&f.require_str("seeds")?, "seeds")?;
        let init = parse_init(&mut f)?;
        let init_points = f.get("init.points", 0)?;
        let record_time = f.get("record_time", false)?;
        let output = f.get("output", format!("out/{name}"))?;
        f.finish()?;
        Ok(Self {
            name,
            problem,
            set,
            method,
            iterations,
            step,
            mu,
            batch,
            seeds,
            init,
            init_points,
            record_time,
            output,
        })
    }

    /// Canonical text form; every key is written explicitly.
    pub fn render(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("name", self.name.clone());
        kv("problem", self.problem.kind().into());
        let synthetic = |kv: &mut dyn FnMut(&str, String), d: &SyntheticSvm| {
            kv("problem.samples", d.samples.to_string());
            kv("problem.dim", d.dim.to_string());
            kv("problem.scale", fmt_real(d.scale));
            kv("problem.shift", fmt_real(d.shift));
            kv("problem.flip", fmt_real(d.flip));
            kv("problem.data_seed", d.data_seed.to_string());
        };
        match &self.problem {
            ProblemSpec::Quadratic { dim, beta, center } => {
                kv("problem.dim", dim.to_string());
                kv("problem.beta", fmt_real(*beta));
                kv("problem.center", fmt_real(*center));
            }
            ProblemSpec::Hard { t, sigma } => {
                kv("problem.t", t.to_string());
                kv("problem.sigma", fmt_real(*sigma));
            }
            ProblemSpec::DoubleWell | ProblemSpec::Bilinear | ProblemSpec::ProductSquare => {}
            ProblemSpec::Glm { link, samples, dim, data_seed } => {
                kv("problem.link", link.to_string());
                kv("problem.samples", samples.to_string());
                kv("problem.dim", dim.to_string());
                kv("problem.data_seed", data_seed.to_string());
            }
            ProblemSpec::Svm { alpha, data, standardize } => {
                kv("problem.alpha", fmt_real(*alpha));
                kv("problem.standardize", standardize.to_string());
                match data {
                    SvmData::Wdbc { path } => {
                        kv("problem.data", "wdbc".into());
                        kv("problem.path", path.clone());
                    }
                    SvmData::Synthetic(d) => {
                        kv("problem.data", "synthetic".into());
                        synthetic(&mut kv, d);
                    }
                    SvmData::Auto { path, fallback } => {
                        kv("problem.data", "auto".into());
                        kv("problem.path", path.clone());
                        synthetic(&mut kv, fallback);
                    }
                }
            }
            ProblemSpec::Radial { dim, data_seed } => {
                kv("problem.dim", dim.to_string());
                kv("problem.data_seed", data_seed.to_string());
            }
            ProblemSpec::Bandit { arms, tau, data_seed } => {
                kv("problem.arms", arms.to_string());
                kv("problem.tau", fmt_real(*tau));
                kv("problem.data_seed", data_seed.to_string());
            }
            ProblemSpec::MassSpring {
                sequences,
                horizon,
                warmup,
                noise,
                perturbation,
                data_seed,
            } => {
                kv("problem.sequences", sequences.to_string());
                kv("problem.horizon", horizon.to_string());
                kv("problem.warmup", warmup.to_string());
                kv("problem.noise", fmt_real(*noise));
                kv("problem.perturbation", fmt_real(*perturbation));
                kv("problem.data_seed", data_seed.to_string());
            }
        }
        match self.set {
            SetSpec::Whole => kv("set", "whole".into()),
            SetSpec::Box { lower, upper } => {
                kv("set", "box".into());
                kv("set.lower", fmt_real(lower));
                kv("set.upper", fmt_real(upper));
            }
            SetSpec::L2 { radius } => {
                kv("set", "l2".into());
                kv("set.radius", fmt_real(radius));
            }
            SetSpec::L1 { radius } => {
                kv("set", "l1".into());
                kv("set.radius", fmt_real(radius));
            }
        }
        kv("method", self.method.to_string());
        kv("iterations", self.iterations.to_string());
        match self.step {
            StepRule::Fixed(h) => {
                kv("step", "fixed".into());
                kv("step.h", fmt_real(h));
            }
            StepRule::Armijo(p) => {
                kv("step", "armijo".into());
                kv("step.h0", fmt_real(p.h0));
                kv("step.shrink", fmt_real(p.shrink));
                kv("step.slope", fmt_real(p.slope));
                kv("step.max_backtracks", p.max_backtracks.to_string());
            }
        }
        kv("mu", fmt_real(self.mu));
        kv("batch", self.batch.to_string());
        kv(
            "seeds",
            self.seeds.iter().map(u64::to_string).collect::<Vec<_>>().join(","),
        );
        match self.init {
            InitSpec::Gaussian { scale } => {
                kv("init", "gaussian".into());
                kv("init.scale", fmt_real(scale));
            }
            InitSpec::Constant { value } => {
                kv("init", "constant".into());
                kv("init.value", fmt_real(value));
            }
            InitSpec::ProblemDefault => kv("init", "problem_default".into()),
        }
        kv("init.points", self.init_points.to_string());
        kv("record_time", self.record_time.to_string());
        kv("output", self.output.clone());
        s
    }

    /// Applies `QZO_SEEDS` and `QZO_WDBC` when they are set.
    pub fn with_env_overrides(mut self) -> Result<Self> {
        if let Ok(v) = std::env::var(SEEDS_ENV) {
            self.seeds = parse_seeds(&v, SEEDS_ENV)?;
        }
        if let Ok(p) = std::env::var(WDBC_ENV) {
            if let ProblemSpec::Svm { data, .. } = &mut self.problem {
                match data {
                    SvmData::Wdbc { path } | SvmData::Auto { path, .. } => *path = p,
                    SvmData::Synthetic(_) => {}
                }
            }
        }
        Ok(self)
    }
}

impl FromStr for ExperimentConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const MINIMAL: &str = "
        # comment line
        name = demo
        problem = quadratic
        problem.dim = 3
        method = rm
        iterations = 10
        step = fixed
        step.h = 0.1   # trailing comment
        seeds = 1,2
    ";

    fn path_of(e: Error) -> String {
        match e {
            Error::Config { path, .. } => path,
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn defaults_fill_in() {
        let c = ExperimentConfig::parse(MINIMAL).unwrap();
        assert_eq!(c.set, SetSpec::Whole);
        assert_eq!(c.mu, 1e-6);
        assert_eq!(c.batch, 1);
        assert_eq!(c.init, InitSpec::Gaussian { scale: 1.0 });
        assert_eq!(c.output, "out/demo");
        assert_eq!(c.seeds, vec![1, 2]);
        assert_eq!(ExperimentConfig::parse(&c.render()).unwrap(), c);
    }

    #[test]
    fn errors_name_the_field() {
        let cases = [
            (MINIMAL.replace("step.h = 0.1", "step.h = -1"), "step.h"),
            (MINIMAL.replace("problem.dim = 3", ""), "problem.dim"),
            (format!("{MINIMAL}\nbogus = 1"), "bogus"),
            (format!("{MINIMAL}\nproblem.dim = 4"), "problem.dim"),
            (MINIMAL.replace("seeds = 1,2", "seeds = 1,x"), "seeds"),
            (MINIMAL.replace("seeds = 1,2", "seeds = 3,3"), "seeds"),
            (MINIMAL.replace("method = rm", "method = sgd"), "method"),
            (format!("{MINIMAL}\nset = l1"), "set.radius"),
            (MINIMAL.replace("step = fixed", "step = armijo\nstep.shrink = 2"), "step.shrink"),
            (MINIMAL.replace("problem = quadratic", "problem = nope"), "problem"),
            (format!("{MINIMAL}\njust words"), "line 12"),
        ];
        for (text, path) in cases {
            assert_eq!(path_of(ExperimentConfig::parse(&text).unwrap_err()), path, "{text}");
        }
    }

    #[test]
    fn warmup_is_required_for_mass_spring() {
        let text = "name = m\nproblem = mass_spring\nproblem.sequences = 2\nproblem.horizon = 10\n\
                    problem.perturbation = 0.1\nmethod = gd\niterations = 1\nstep = fixed\nstep.h = 1\nseeds = 0";
        assert_eq!(path_of(ExperimentConfig::parse(text).unwrap_err()), "problem.warmup");
    }

    fn real() -> impl Strategy<Value = f64> {
        prop_oneof![1e-12..1e-4f64, 1e-4..1e3f64, 1e6..1e9f64]
    }

    fn problem() -> impl Strategy<Value = ProblemSpec> {
        let synth = || (1..500usize, 1..50usize, real(), -3.0..3.0f64, 0.0..1.0f64, any::<u64>()).prop_map(
            |(samples, dim, scale, shift, flip, data_seed)| SyntheticSvm {
                samples,
                dim,
                scale,
                shift,
                flip,
                data_seed,
            },
        );
        prop_oneof![
            (1..100usize, real(), -5.0..5.0f64).prop_map(|(dim, beta, center)| ProblemSpec::Quadratic { dim, beta, center }),
            (1..50usize, 1e-9..1.0f64).prop_map(|(t, sigma)| ProblemSpec::Hard { t, sigma }),
            Just(ProblemSpec::Bilinear),
            (prop_oneof![Just(Link::Sigmoid), Just(Link::Relu), (0.01..1.0f64).prop_map(Link::LeakyRelu)], 1..100usize, 1..20usize, any::<u64>())
                .prop_map(|(link, samples, dim, data_seed)| ProblemSpec::Glm { link, samples, dim, data_seed }),
            (0.01..1.0f64, synth(), any::<bool>()).prop_map(|(alpha, d, standardize)| ProblemSpec::Svm {
                alpha,
                data: SvmData::Synthetic(d),
                standardize,
            }),
            (0.01..1.0f64, synth()).prop_map(|(alpha, d)| ProblemSpec::Svm {
                alpha,
                standardize: true,
                data: SvmData::Auto { path: "data/wdbc.data".into(), fallback: d }
            }),
            (1..200usize, real(), any::<u64>()).prop_map(|(arms, tau, data_seed)| ProblemSpec::Bandit { arms, tau, data_seed }),
            (1..10usize, 10..400usize, real(), real(), any::<u64>()).prop_map(|(sequences, horizon, noise, perturbation, data_seed)| {
                ProblemSpec::MassSpring { sequences, horizon, warmup: horizon / 4, noise, perturbation, data_seed }
            }),
        ]
    }

    fn config() -> impl Strategy<Value = ExperimentConfig> {
        let set = prop_oneof![
            Just(SetSpec::Whole),
            (-10.0..0.0f64, 0.0..10.0f64).prop_map(|(lower, upper)| SetSpec::Box { lower, upper }),
            Just(SetSpec::Box { lower: 0.0, upper: f64::INFINITY }),
            real().prop_map(|radius| SetSpec::L1 { radius }),
            real().prop_map(|radius| SetSpec::L2 { radius }),
        ];
        let step = prop_oneof![
            real().prop_map(StepRule::Fixed),
            (real(), 0.01..0.99f64, 1e-6..0.5f64, 0..50usize).prop_map(|(h0, shrink, slope, max_backtracks)| {
                StepRule::Armijo(ArmijoParams { h0, shrink, slope, max_backtracks })
            }),
        ];
        let init = prop_oneof![
            real().prop_map(|scale| InitSpec::Gaussian { scale }),
            (-1e3..1e3f64).prop_map(|value| InitSpec::Constant { value }),
            Just(InitSpec::ProblemDefault),
        ];
        (
            problem(),
            set,
            any::<bool>(),
            0..100_000usize,
            step,
            (real(), 1..64usize),
            proptest::collection::btree_set(any::<u64>(), 1..8),
            init,
            (0..6usize, any::<bool>()),
        )
            .prop_map(|(problem, set, rm, iterations, step, (mu, batch), seeds, init, (init_points, record_time))| {
                ExperimentConfig {
                    name: "prop".into(),
                    problem,
                    set,
                    method: if rm { Method::Rm } else { Method::Gd },
                    iterations,
                    step,
                    mu,
                    batch,
                    seeds: seeds.into_iter().rev().collect(),
                    init,
                    init_points,
                    record_time,
                    output: "out/prop dir".into(),
                }
            })
    }

    proptest! {
        #[test]
        fn render_parse_round_trip(c in config()) {
            let text = c.render();
            let back = ExperimentConfig::parse(&text).unwrap();
            prop_assert_eq!(&back, &c);
            prop_assert_eq!(back.render(), text);
        }
    }
}
