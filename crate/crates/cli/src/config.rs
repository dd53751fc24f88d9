//! Flat `key = value` configuration files with `[section]` headers.
//!
//! Example:
//!
//! ```text
//! [problem]
//! domain = 0 1 0 1
//! bc = neumann
//! potential = quartic
//!
//! [mesh]
//! h = 0.015
//! sigma = 18
//!
//! [time]
//! t0 = 0
//! t_end = 1
//! dt = 0.01
//!
//! [parameter]
//! kind = inverse_diffusivity
//! train = 10 24.78 67.32
//! test = 200
//!
//! [initial]
//! kind = tanh_circle
//! center = 0.5 0.5
//! radius = 0.25
//!
//! [rom]
//! n_max = 20
//! tol_greedy = 1e-3
//! m_deim = 50
//!
//! [output]
//! dir = out
//! ```
//!
//! `#` starts a comment. Keys are unique per section.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use acmor::assembly::FomOperators;
use acmor::avf::TimeGrid;
use acmor::error::Error;
use acmor::greedy::{GreedyConfig, IndicatorNonlinearity, IndicatorNorm};
use acmor::mesh::{build_mesh, BoundaryKind, Rect};
use acmor::potential::Potential;
use acmor::problem::{InitialCondition, ParameterKind, ProblemSetup};
use acmor::space::{DgSpace, DEFAULT_SIGMA};
use acmor::Result;

/// Parsed experiment configuration.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub domain: Rect,
    pub bc: BoundaryKind,
    pub potential: Potential,
    /// Fixed diffusivity for temperature-parametrized runs.
    pub epsilon: f64,
    pub h: f64,
    pub sigma: f64,
    pub t0: f64,
    pub t_end: f64,
    pub dt: f64,
    pub parameter_kind: ParameterKind,
    pub train_set: Vec<f64>,
    pub test_mu: f64,
    pub initial: InitialCondition,
    pub n_max: usize,
    pub tol_greedy: f64,
    pub m_deim: usize,
    pub indicator_norm: IndicatorNorm,
    pub indicator_nonlinearity: IndicatorNonlinearity,
    pub output_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let sections = parse_sections(text)?;
        let get = |section: &str, key: &str| -> Result<&str> {
            sections
                .get(section)
                .and_then(|s| s.get(key))
                .map(|s| s.as_str())
                .ok_or_else(|| Error::Config(format!("missing [{section}] {key}")))
        };
        let opt = |section: &str, key: &str| -> Option<&str> {
            sections.get(section).and_then(|s| s.get(key)).map(|s| s.as_str())
        };

        let domain = {
            let vals = parse_floats(get("problem", "domain")?)?;
            if vals.len() != 4 {
                return Err(Error::Config("domain needs four numbers: x0 x1 y0 y1".into()));
            }
            Rect::new(vals[0], vals[1], vals[2], vals[3])
        };
        let bc = match get("problem", "bc")? {
            "neumann" => BoundaryKind::Neumann,
            "periodic" => BoundaryKind::Periodic,
            other => return Err(Error::Config(format!("unknown bc '{other}'"))),
        };
        let parameter_kind = match get("parameter", "kind")? {
            "inverse_diffusivity" => ParameterKind::InverseDiffusivity,
            "temperature" => ParameterKind::Temperature,
            other => return Err(Error::Config(format!("unknown parameter kind '{other}'"))),
        };
        let potential = match get("problem", "potential")? {
            "quartic" => Potential::Quartic,
            "logarithmic" => {
                let theta_c = parse_float(get("problem", "theta_c")?)?;
                // theta comes from the parameter for temperature runs; a
                // fixed run needs it spelled out.
                let theta = match parameter_kind {
                    ParameterKind::Temperature => parse_float(get("parameter", "test")?)?,
                    ParameterKind::InverseDiffusivity => {
                        parse_float(get("problem", "theta").map_err(|_| {
                            Error::Config(
                                "logarithmic potential with a diffusivity parameter needs \
                                 [problem] theta"
                                    .into(),
                            )
                        })?)?
                    }
                };
                Potential::logarithmic(theta, theta_c)?
            }
            other => return Err(Error::Config(format!("unknown potential '{other}'"))),
        };
        let epsilon = match parameter_kind {
            ParameterKind::Temperature => parse_float(get("problem", "epsilon")?)?,
            ParameterKind::InverseDiffusivity => {
                opt("problem", "epsilon").map(parse_float).transpose()?.unwrap_or(1.0)
            }
        };

        let initial = match get("initial", "kind")? {
            "tanh_circle" => {
                let c = parse_floats(get("initial", "center")?)?;
                if c.len() != 2 {
                    return Err(Error::Config("center needs two numbers".into()));
                }
                InitialCondition::TanhCircle {
                    center: (c[0], c[1]),
                    radius: parse_float(get("initial", "radius")?)?,
                }
            }
            "random" => {
                let amplitude = parse_float(get("initial", "amplitude")?)?;
                let seed = get("initial", "seed").map_err(|_| {
                    Error::Config("random initial conditions need [initial] seed".into())
                })?;
                let seed = seed
                    .parse::<u64>()
                    .map_err(|e| Error::Config(format!("bad seed '{seed}': {e}")))?;
                if amplitude <= 0.0 {
                    return Err(Error::Config("amplitude must be positive".into()));
                }
                InitialCondition::Random { amplitude, seed }
            }
            "constant" => InitialCondition::Constant(parse_float(get("initial", "value")?)?),
            other => return Err(Error::Config(format!("unknown initial kind '{other}'"))),
        };

        let indicator_norm = match opt("rom", "indicator_norm").unwrap_or("dual_h1") {
            "dual_h1" => IndicatorNorm::DualH1,
            "l2_surrogate" => IndicatorNorm::L2Surrogate,
            other => return Err(Error::Config(format!("unknown indicator norm '{other}'"))),
        };
        let indicator_nonlinearity =
            match opt("rom", "indicator_nonlinearity").unwrap_or("deim") {
                "deim" => IndicatorNonlinearity::Deim,
                "exact" => IndicatorNonlinearity::Exact,
                other => {
                    return Err(Error::Config(format!(
                        "unknown indicator nonlinearity '{other}'"
                    )))
                }
            };

        let config = Self {
            domain,
            bc,
            potential,
            epsilon,
            h: parse_float(get("mesh", "h")?)?,
            sigma: opt("mesh", "sigma").map(parse_float).transpose()?.unwrap_or(DEFAULT_SIGMA),
            t0: opt("time", "t0").map(parse_float).transpose()?.unwrap_or(0.0),
            t_end: parse_float(get("time", "t_end")?)?,
            dt: parse_float(get("time", "dt")?)?,
            parameter_kind,
            train_set: parse_floats(get("parameter", "train")?)?,
            test_mu: parse_float(get("parameter", "test")?)?,
            initial,
            n_max: parse_usize(get("rom", "n_max")?)?,
            tol_greedy: parse_float(get("rom", "tol_greedy")?)?,
            m_deim: parse_usize(get("rom", "m_deim")?)?,
            indicator_norm,
            indicator_nonlinearity,
            output_dir: PathBuf::from(opt("output", "dir").unwrap_or("out")),
        };
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("h", self.h),
            ("sigma", self.sigma),
            ("dt", self.dt),
            ("tol_greedy", self.tol_greedy),
        ] {
            if v <= 0.0 {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.train_set.is_empty() {
            return Err(Error::Config("training set is empty".into()));
        }
        if self.train_set.iter().chain([&self.test_mu]).any(|&m| m <= 0.0) {
            return Err(Error::Config("parameter values must be positive".into()));
        }
        if self.n_max == 0 || self.m_deim == 0 {
            return Err(Error::Config("n_max and m_deim must be at least 1".into()));
        }
        Ok(())
    }

    /// Assemble the discretization and operators for this configuration.
    pub fn build_setup(&self) -> Result<ProblemSetup> {
        let mesh = build_mesh(self.domain, self.h, self.bc)?;
        let space = DgSpace::new(&mesh, self.sigma);
        let ops = FomOperators::new(&mesh, &space)?;
        let grid = TimeGrid::new(self.t0, self.t_end, self.dt)?;
        ProblemSetup::new(
            mesh,
            space,
            ops,
            grid,
            self.parameter_kind,
            self.potential,
            self.epsilon,
            self.initial,
        )
    }

    pub fn greedy_config(&self) -> Result<GreedyConfig> {
        let mut cfg =
            GreedyConfig::new(self.train_set.clone(), self.tol_greedy, self.n_max, self.m_deim)?;
        cfg.indicator_norm = self.indicator_norm;
        cfg.indicator_nonlinearity = self.indicator_nonlinearity;
        Ok(cfg)
    }

    /// Replace the seed of a random initial condition (CLI override).
    pub fn override_seed(&mut self, seed: u64) -> Result<()> {
        match &mut self.initial {
            InitialCondition::Random { seed: s, .. } => {
                *s = seed;
                Ok(())
            }
            _ => Err(Error::Config(
                "--seed only applies to configurations with random initial conditions".into(),
            )),
        }
    }
}

fn parse_sections(text: &str) -> Result<HashMap<String, HashMap<String, String>>> {
    let mut sections: HashMap<String, HashMap<String, String>> = HashMap::new();
    let mut current = String::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('[') && line.ends_with(']') {
            current = line[1..line.len() - 1].trim().to_string();
            sections.entry(current.clone()).or_default();
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Config(format!("line {}: expected key = value", lineno + 1)));
        };
        if current.is_empty() {
            return Err(Error::Config(format!(
                "line {}: key outside any [section]",
                lineno + 1
            )));
        }
        let prev = sections
            .get_mut(&current)
            .unwrap()
            .insert(key.trim().to_string(), value.trim().to_string());
        if prev.is_some() {
            return Err(Error::Config(format!(
                "line {}: duplicate key '{}' in [{}]",
                lineno + 1,
                key.trim(),
                current
            )));
        }
    }
    Ok(sections)
}

fn parse_float(s: &str) -> Result<f64> {
    s.parse::<f64>().map_err(|e| Error::Config(format!("bad number '{s}': {e}")))
}

fn parse_floats(s: &str) -> Result<Vec<f64>> {
    s.split_whitespace().map(parse_float).collect()
}

fn parse_usize(s: &str) -> Result<usize> {
    s.parse::<usize>().map_err(|e| Error::Config(format!("bad integer '{s}': {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = r#"
[problem]
domain = 0 1 0 1
bc = neumann
potential = quartic

[mesh]
h = 0.25
sigma = 18

[time]
t0 = 0
t_end = 0.1
dt = 0.05

[parameter]
kind = inverse_diffusivity
train = 10 50
test = 30

[initial]
kind = tanh_circle
center = 0.5 0.5
radius = 0.25

[rom]
n_max = 4
tol_greedy = 1e-3
m_deim = 10

[output]
dir = scratch
"#;

    #[test]
    fn parses_a_complete_file() {
        let cfg = ExperimentConfig::parse(GOOD).unwrap();
        assert_eq!(cfg.train_set, vec![10.0, 50.0]);
        assert_eq!(cfg.test_mu, 30.0);
        assert_eq!(cfg.sigma, 18.0);
        assert_eq!(cfg.output_dir, PathBuf::from("scratch"));
        let setup = cfg.build_setup().unwrap();
        assert_eq!(setup.grid.steps, 2);
    }

    #[test]
    fn missing_keys_and_bad_values_are_config_errors() {
        assert!(matches!(
            ExperimentConfig::parse("[problem]\nbc = neumann\n"),
            Err(Error::Config(_))
        ));
        let bad = GOOD.replace("dt = 0.05", "dt = -1");
        assert!(matches!(ExperimentConfig::parse(&bad), Err(Error::Config(_))));
        let dup = format!("{GOOD}\n[mesh]\nh = 0.3\n");
        assert!(matches!(ExperimentConfig::parse(&dup), Err(Error::Config(_))));
    }

    #[test]
    fn random_initial_requires_seed() {
        let no_seed = GOOD
            .replace("kind = tanh_circle", "kind = random")
            .replace("center = 0.5 0.5", "amplitude = 0.05")
            .replace("radius = 0.25", "");
        assert!(matches!(ExperimentConfig::parse(&no_seed), Err(Error::Config(_))));
        let with_seed = no_seed.replace("amplitude = 0.05", "amplitude = 0.05\nseed = 7");
        let cfg = ExperimentConfig::parse(&with_seed).unwrap();
        match cfg.initial {
            InitialCondition::Random { amplitude, seed } => {
                assert_eq!((amplitude, seed), (0.05, 7));
            }
            _ => panic!("expected a random initial condition"),
        }
    }

    #[test]
    fn seed_override_only_for_random() {
        let mut cfg = ExperimentConfig::parse(GOOD).unwrap();
        assert!(cfg.override_seed(3).is_err());
        let random = GOOD
            .replace("kind = tanh_circle", "kind = random")
            .replace("center = 0.5 0.5", "amplitude = 0.05")
            .replace("radius = 0.25", "seed = 1");
        let mut cfg = ExperimentConfig::parse(&random).unwrap();
        cfg.override_seed(3).unwrap();
        match cfg.initial {
            InitialCondition::Random { seed, .. } => assert_eq!(seed, 3),
            _ => panic!(),
        }
    }
}
