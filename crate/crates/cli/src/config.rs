use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use pwtest::instances::InstanceKind;
use pwtest::testers::params::{ActiveConstants, LearnValidateConstants};
use pwtest::{Class, ClassKind, QueryCounting, Tolerance};

/// Environment variable that overrides the configured output directory.
pub const OUTPUT_DIR_ENV: &str = "PWTEST_OUTPUT_DIR";

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("reading {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("parsing {path}: {source}")]
    Parse { path: PathBuf, source: toml::de::Error },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum TesterKind {
    ActiveGeneral,
    ConstantActive,
    ConstantPassive,
    LearnValidate,
    PolyExact,
}

/// Overrides for the unspecified numerical constants. Unset values are 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Constants {
    pub c: f64,
    pub c_prime: f64,
    pub c_double_prime: f64,
    pub c1: f64,
    pub c2: f64,
}

impl Default for Constants {
    fn default() -> Self {
        Self { c: 1.0, c_prime: 1.0, c_double_prime: 1.0, c1: 1.0, c2: 1.0 }
    }
}

impl Constants {
    pub fn active(&self) -> ActiveConstants {
        ActiveConstants { c: self.c, c_prime: self.c_prime, c_double_prime: self.c_double_prime }
    }

    pub fn learn_validate(&self) -> LearnValidateConstants {
        LearnValidateConstants { c1: self.c1, c2: self.c2 }
    }
}

/// Which targets the trials run against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InstanceConfig {
    pub kind: InstanceKind,
    /// Random-partition instances use `cells_per_piece * k` cells.
    pub cells_per_piece: usize,
    /// Sine probes are `x -> sin(frequency x)`.
    pub frequency: f64,
    /// Grid used to certify sine probes.
    pub grid_size: usize,
}

impl Default for InstanceConfig {
    fn default() -> Self {
        Self { kind: InstanceKind::InClass, cells_per_piece: 128, frequency: 10.0, grid_size: 512 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Stem of the output files.
    pub name: String,
    pub tester: TesterKind,
    pub class: ClassKind,
    pub tolerance: Tolerance,
    pub k: usize,
    pub eps: f64,
    pub constants: Constants,
    pub trials: usize,
    pub seed: u64,
    /// Worker threads; 0 lets the pool decide.
    pub workers: usize,
    pub counting: QueryCounting,
    pub instance: InstanceConfig,
    pub output: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            name: "run".into(),
            tester: TesterKind::ActiveGeneral,
            class: ClassKind::Constants,
            tolerance: Tolerance::default(),
            k: 200,
            eps: 0.4,
            constants: Constants::default(),
            trials: 100,
            seed: DEFAULT_SEED,
            workers: 0,
            counting: QueryCounting::default(),
            instance: InstanceConfig::default(),
            output: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Read { path: path.into(), source })?;
        toml::from_str(&text).map_err(|source| ConfigError::Parse { path: path.into(), source })
    }

    pub fn class(&self) -> Class {
        Class { kind: self.class, tolerance: self.tolerance }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |msg: String| Err(ConfigError::Invalid(msg));
        if self.trials == 0 {
            return bad("trials must be positive".into());
        }
        if self.k == 0 {
            return bad("k must be positive".into());
        }
        if !(self.eps > 0.0 && self.eps < 0.5) {
            return bad(format!("eps = {} outside (0, 1/2)", self.eps));
        }
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return bad(format!("name {:?} is not a plain file stem", self.name));
        }
        let c = &self.constants;
        if [c.c, c.c_prime, c.c_double_prime, c.c1, c.c2].iter().any(|v| !(*v > 0.0)) {
            return bad("constants must be positive".into());
        }
        match (self.tester, self.class) {
            (TesterKind::ConstantActive | TesterKind::ConstantPassive, kind)
                if kind != ClassKind::Constants =>
            {
                return bad("the birthday-pairing tester needs class = constants".into());
            }
            (TesterKind::PolyExact, ClassKind::Polynomials { .. }) => {}
            (TesterKind::PolyExact, _) => {
                return bad("poly-exact needs a polynomial class".into());
            }
            _ => {}
        }
        match self.instance.kind {
            InstanceKind::RandomPartitionFar if self.instance.cells_per_piece < 8 => {
                bad("cells_per_piece must be at least 8".into())
            }
            InstanceKind::RandomPartitionFar | InstanceKind::AlternatingFar
                if self.class == ClassKind::ShiftedSine =>
            {
                bad("far step instances are certified for constants and polynomials only".into())
            }
            InstanceKind::SineProbe if self.instance.grid_size < 4 * self.k => {
                bad(format!("grid_size must be at least 4k = {}", 4 * self.k))
            }
            _ => Ok(()),
        }
    }

    /// Output directory: explicit override, then the environment, then the
    /// config file, then `pwtest-out`.
    pub fn output_dir(&self, flag: Option<&Path>) -> PathBuf {
        if let Some(dir) = flag {
            return dir.into();
        }
        if let Some(dir) = std::env::var_os(OUTPUT_DIR_ENV).filter(|v| !v.is_empty()) {
            return dir.into();
        }
        self.output.clone().unwrap_or_else(|| "pwtest-out".into())
    }
}

/// Parses `constants`, `polynomials:<p>` (or `poly:<p>`) and `shifted-sine`.
pub fn parse_class(text: &str) -> Result<ClassKind, String> {
    match text {
        "constants" => Ok(ClassKind::Constants),
        "shifted-sine" | "sine" => Ok(ClassKind::ShiftedSine),
        _ => {
            let degree = text
                .strip_prefix("polynomials:")
                .or_else(|| text.strip_prefix("poly:"))
                .ok_or_else(|| format!("unknown class {text:?}"))?;
            degree
                .parse()
                .map(|degree| ClassKind::Polynomials { degree })
                .map_err(|_| format!("bad degree in {text:?}"))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_round_trip() {
        let text = r#"
            name = "far"
            tester = "constant-passive"
            class = { kind = "constants" }
            k = 200
            eps = 0.4
            trials = 10
            [constants]
            c = 2.0
            [instance]
            kind = "random-partition-far"
        "#;
        let config: RunConfig = toml::from_str(text).unwrap();
        assert_eq!(config.tester, TesterKind::ConstantPassive);
        assert_eq!(config.constants.c, 2.0);
        assert_eq!(config.constants.c1, 1.0);
        assert_eq!(config.instance.cells_per_piece, 128);
        assert_eq!(config.seed, 42);
        config.validate().unwrap();
        let back: RunConfig = toml::from_str(&toml::to_string(&config).unwrap()).unwrap();
        assert_eq!(back, config);
    }

    #[test]
    fn rejects_unknown_fields_and_bad_values() {
        assert!(toml::from_str::<RunConfig>("kk = 3").is_err());
        let config = RunConfig { eps: 0.7, ..Default::default() };
        assert!(config.validate().is_err());
        let config = RunConfig { tester: TesterKind::PolyExact, ..Default::default() };
        assert!(config.validate().is_err());
    }

    #[test]
    fn class_names() {
        assert_eq!(parse_class("poly:2"), Ok(ClassKind::Polynomials { degree: 2 }));
        assert_eq!(parse_class("constants"), Ok(ClassKind::Constants));
        assert!(parse_class("cubic").is_err());
    }
}
