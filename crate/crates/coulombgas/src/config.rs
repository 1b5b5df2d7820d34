//! Experiment configuration: TOML files, command-line overrides, validation
//! and the canonical hash stamped on every artifact.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Parser, ValueEnum};
use coulombgas_core::coulomb::SolverOptions;
use coulombgas_core::ensembles::{Beta, EnsembleKind, EnsembleSpec, Potential};
use coulombgas_core::hciz::PairConvention;
use coulombgas_core::denoise::HciBackend;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("{path}: {msg}")]
    File { path: String, msg: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Equilibrium,
    DenoiseSolve,
    Hciz,
    Mi,
    Mmse,
    Expand,
    Density,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Equilibrium => "equilibrium",
            CommandKind::DenoiseSolve => "denoise-solve",
            CommandKind::Hciz => "hciz",
            CommandKind::Mi => "mi",
            CommandKind::Mmse => "mmse",
            CommandKind::Expand => "expand",
            CommandKind::Density => "density",
        }
    }

    fn needs_lambda(self) -> bool {
        !matches!(self, CommandKind::Equilibrium | CommandKind::Expand)
    }

    fn needs_n(self) -> bool {
        !matches!(self, CommandKind::Expand | CommandKind::Density)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// `wigner | wishart:<alpha> | uniform | custom:<file>`.
#[derive(Debug, Clone, PartialEq)]
pub enum EnsembleArg {
    Wigner,
    Wishart(f64),
    Uniform,
    Custom(PathBuf),
}

impl FromStr for EnsembleArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.split_once(':') {
            None if s == "wigner" => Ok(EnsembleArg::Wigner),
            None if s == "uniform" => Ok(EnsembleArg::Uniform),
            Some(("wishart", a)) => {
                let alpha: f64 = a.parse().map_err(|_| format!("bad Wishart ratio '{a}'"))?;
                if !(alpha > 0.0) || !alpha.is_finite() {
                    return Err(format!("Wishart ratio must be positive, got {a}"));
                }
                Ok(EnsembleArg::Wishart(alpha))
            }
            Some(("custom", f)) if !f.is_empty() => Ok(EnsembleArg::Custom(PathBuf::from(f))),
            _ => Err(format!("unknown ensemble '{s}' (expected wigner, wishart:<alpha>, uniform or custom:<file>)")),
        }
    }
}

impl fmt::Display for EnsembleArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EnsembleArg::Wigner => write!(f, "wigner"),
            EnsembleArg::Wishart(a) => write!(f, "wishart:{a}"),
            EnsembleArg::Uniform => write!(f, "uniform"),
            EnsembleArg::Custom(p) => write!(f, "custom:{}", p.display()),
        }
    }
}

/// `exact | bh[:half|:upper|:all] | mc:<K> | closed`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BackendArg {
    Exact,
    Bh(PairConvention),
    Mc(usize),
    Closed,
}

impl FromStr for BackendArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "exact" => Ok(BackendArg::Exact),
            "closed" => Ok(BackendArg::Closed),
            "bh" | "bh:half" => Ok(BackendArg::Bh(PairConvention::HalfUpper)),
            "bh:upper" => Ok(BackendArg::Bh(PairConvention::Upper)),
            "bh:all" => Ok(BackendArg::Bh(PairConvention::All)),
            _ => match s.strip_prefix("mc:") {
                Some(k) => {
                    let k: usize = k.parse().map_err(|_| format!("bad sample count in '{s}'"))?;
                    if k < 2 {
                        return Err("mc needs at least 2 samples".into());
                    }
                    Ok(BackendArg::Mc(k))
                }
                None => Err(format!("unknown backend '{s}' (expected exact, bh, bh:upper, bh:all, mc:<K> or closed)")),
            },
        }
    }
}

impl fmt::Display for BackendArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BackendArg::Exact => write!(f, "exact"),
            BackendArg::Closed => write!(f, "closed"),
            BackendArg::Bh(PairConvention::HalfUpper) => write!(f, "bh"),
            BackendArg::Bh(PairConvention::Upper) => write!(f, "bh:upper"),
            BackendArg::Bh(PairConvention::All) => write!(f, "bh:all"),
            BackendArg::Mc(k) => write!(f, "mc:{k}"),
        }
    }
}

impl BackendArg {
    /// Core backend; Monte-Carlo streams are keyed by the task seed.
    pub fn to_core(self, seed: u64) -> HciBackend {
        match self {
            BackendArg::Exact => HciBackend::ExactDet,
            BackendArg::Bh(c) => HciBackend::Bh(c),
            BackendArg::Mc(k) => HciBackend::MonteCarlo { k, seed },
            BackendArg::Closed => HciBackend::SemicircleClosed,
        }
    }
}

macro_rules! string_serde {
    ($t:ty) => {
        impl Serialize for $t {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.collect_str(self)
            }
        }
        impl<'de> Deserialize<'de> for $t {
            fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                let s = String::deserialize(d)?;
                s.parse().map_err(serde::de::Error::custom)
            }
        }
    };
}
string_serde!(EnsembleArg);
string_serde!(BackendArg);

/// Comma-separated numbers: `0.5,1,2`.
pub fn parse_lambda_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|t| t.trim())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|_| format!("bad lambda value '{t}'")))
        .collect()
}

/// Seeds as a list and/or inclusive ranges: `1..10`, `3,5,9`, `1..3,7`.
pub fn parse_seed_list(s: &str) -> Result<Vec<u64>, String> {
    let mut out = Vec::new();
    for t in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        match t.split_once("..") {
            Some((a, b)) => {
                let a: u64 = a.trim().parse().map_err(|_| format!("bad seed range '{t}'"))?;
                let b: u64 = b.trim().parse().map_err(|_| format!("bad seed range '{t}'"))?;
                if b < a {
                    return Err(format!("empty seed range '{t}'"));
                }
                out.extend(a..=b);
            }
            None => out.push(t.parse().map_err(|_| format!("bad seed '{t}'"))?),
        }
    }
    Ok(out)
}

fn seeds_de<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<u64>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Seeds {
        List(Vec<u64>),
        Text(String),
    }
    match Seeds::deserialize(d)? {
        Seeds::List(v) => Ok(v),
        Seeds::Text(s) => parse_seed_list(&s).map_err(serde::de::Error::custom),
    }
}

fn default_beta() -> u32 {
    2
}
fn default_seeds() -> Vec<u64> {
    vec![0]
}
fn default_grid_step() -> f64 {
    1e-3
}
fn default_eps() -> f64 {
    1e-4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct ExperimentConfig {
    pub command: CommandKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ensemble: Option<EnsembleArg>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default = "default_beta")]
    pub beta: u32,
    /// The λ grid.
    #[serde(default)]
    pub lambda: Vec<f64>,
    #[serde(default = "default_seeds", deserialize_with = "seeds_de")]
    pub seeds: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub backend: Option<BackendArg>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
    #[serde(default = "default_grid_step")]
    pub grid_step: f64,
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default)]
    pub solver: SolverOptions,
}

impl ExperimentConfig {
    pub fn new(command: CommandKind) -> Self {
        ExperimentConfig {
            command,
            ensemble: None,
            n: None,
            beta: default_beta(),
            lambda: Vec::new(),
            seeds: default_seeds(),
            backend: None,
            out: None,
            format: Format::Csv,
            grid_step: default_grid_step(),
            eps: default_eps(),
            solver: SolverOptions::default(),
        }
    }

    pub fn from_toml(text: &str, origin: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::File { path: origin.to_string(), msg: e.to_string().trim_end().to_string() })
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::File { path: path.display().to_string(), msg: e.to_string() })?;
        Self::from_toml(&text, &path.display().to_string())
    }

    /// Canonical TOML form.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration is always representable as TOML")
    }

    /// First 16 hex digits of SHA-256 over the canonical form, output path
    /// excluded.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.out = None;
        let digest = Sha256::digest(c.to_toml().as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    pub fn beta(&self) -> Beta {
        if self.beta == 1 { Beta::Real } else { Beta::Complex }
    }

    pub fn n(&self) -> usize {
        self.n.unwrap_or(0)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let inv = |m: String| Err(ConfigError::Invalid(m));
        if self.beta != 1 && self.beta != 2 {
            return inv(format!("beta must be 1 or 2, got {}", self.beta));
        }
        if self.seeds.is_empty() {
            return inv("seeds must be non-empty".into());
        }
        if self.command.needs_n() {
            match self.n {
                None => return Err(ConfigError::Usage(format!("missing required --n for '{}'", self.command.name()))),
                Some(0) => return inv("--n must be >= 1".into()),
                _ => {}
            }
        }
        if self.command.needs_lambda() && self.lambda.is_empty() {
            return Err(ConfigError::Usage(format!("missing required --lambda for '{}'", self.command.name())));
        }
        if let Some(l) = self.lambda.iter().find(|l| !(**l >= 0.0) || !l.is_finite()) {
            return inv(format!("lambda values must be finite and >= 0, got {l}"));
        }
        match (&self.ensemble, self.command) {
            (None, CommandKind::Density) => {}
            (Some(EnsembleArg::Uniform), CommandKind::Density) => {}
            (Some(e), CommandKind::Density) => return inv(format!("density is implemented for the uniform prior only, got {e}")),
            (None, c) => return Err(ConfigError::Usage(format!("missing required --ensemble for '{}'", c.name()))),
            (Some(EnsembleArg::Uniform), CommandKind::Equilibrium) => {
                return inv("the uniform prior has no confining potential to equilibrate".into())
            }
            (Some(EnsembleArg::Uniform), CommandKind::DenoiseSolve) => {
                return inv("denoise-solve needs a prior with a confining potential".into())
            }
            (Some(EnsembleArg::Custom(_)), CommandKind::Expand) => {
                return inv("expand needs wigner, wishart:<alpha> or uniform".into())
            }
            (Some(EnsembleArg::Wishart(a)), CommandKind::Expand) if *a > 1.0 => {
                return inv("expand needs a Wishart ratio in (0, 1]".into())
            }
            _ => {}
        }
        match (self.backend, self.beta) {
            (Some(BackendArg::Exact), 1) => return inv("the exact backend needs --beta 2".into()),
            (Some(BackendArg::Bh(_)), 2) => return inv("the bh backend needs --beta 1".into()),
            _ => {}
        }
        if !(self.grid_step > 0.0) || !(self.eps > 0.0) {
            return inv("--grid-step and --eps must be positive".into());
        }
        if !(self.solver.eta > 0.0) || !(0.0..1.0).contains(&self.solver.momentum) || !(self.solver.tol > 0.0) {
            return inv("solver needs eta > 0, momentum in [0, 1) and tol > 0".into());
        }
        Ok(())
    }

    /// Ensemble for sampling the signal.
    pub fn ensemble_spec(&self) -> Result<EnsembleSpec, ConfigError> {
        let kind = match self.ensemble.as_ref() {
            Some(EnsembleArg::Wigner) => EnsembleKind::Wigner,
            Some(EnsembleArg::Wishart(a)) => EnsembleKind::Wishart { alpha: *a },
            Some(EnsembleArg::Uniform) => EnsembleKind::UniformSpectrum,
            Some(EnsembleArg::Custom(p)) => EnsembleKind::CustomPotential(read_potential(p)?),
            None => return Err(ConfigError::Usage("missing --ensemble".into())),
        };
        Ok(EnsembleSpec::new(kind, self.n(), self.beta()))
    }
}

/// Custom potential file: TOML with `log_coeff` and `poly_coeffs`, where
/// `poly_coeffs[k]` multiplies `x^(k+1)`.
pub fn read_potential(path: &Path) -> Result<Potential, ConfigError> {
    let err = |msg: String| ConfigError::File { path: path.display().to_string(), msg };
    let text = std::fs::read_to_string(path).map_err(|e| err(e.to_string()))?;
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Raw {
        #[serde(default)]
        log_coeff: f64,
        poly_coeffs: Vec<f64>,
    }
    let raw: Raw = toml::from_str(&text).map_err(|e| err(e.to_string()))?;
    Potential::new(raw.log_coeff, raw.poly_coeffs).map_err(|e| err(e.to_string()))
}

// Aliases keep clap from treating a list flag as a repeated one.
type LambdaList = Vec<f64>;
type SeedList = Vec<u64>;

/// Command-line interface.
#[derive(Debug, Parser)]
#[command(name = "coulombgas", version, about = "Coulomb-gas and spherical-integral experiments for matrix denoising")]
pub struct Cli {
    /// Command to run; may instead come from the config file.
    #[arg(value_enum)]
    pub command: Option<CommandKind>,
    /// TOML configuration file; flags override its keys.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// wigner | wishart:<alpha> | uniform | custom:<file>
    #[arg(long)]
    pub ensemble: Option<EnsembleArg>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Dyson index, 1 or 2.
    #[arg(long)]
    pub beta: Option<u32>,
    /// Comma-separated SNR grid, e.g. 0.5,1,2.
    #[arg(long, value_parser = parse_lambda_list)]
    pub lambda: Option<LambdaList>,
    /// Seed list and/or inclusive ranges, e.g. 1..10 or 3,5,9.
    #[arg(long, value_parser = parse_seed_list)]
    pub seeds: Option<SeedList>,
    /// Single seed; conflicts with --seeds.
    #[arg(long, conflicts_with = "seeds")]
    pub seed: Option<u64>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub momentum: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// exact | bh[:upper|:all] | mc:<K> | closed
    #[arg(long)]
    pub backend: Option<BackendArg>,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub grid_step: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    /// Print the resolved configuration as TOML and exit.
    #[arg(long)]
    pub print_config: bool,
}

/// Merge the config file (if any) with flag overrides and validate.
pub fn parse_config(cli: &Cli) -> Result<ExperimentConfig, ConfigError> {
    let mut cfg = match &cli.config {
        Some(p) => {
            let c = ExperimentConfig::from_file(p)?;
            if let Some(cmd) = cli.command {
                if cmd != c.command {
                    return Err(ConfigError::Usage(format!(
                        "command '{}' conflicts with '{}' in {}",
                        cmd.name(),
                        c.command.name(),
                        p.display()
                    )));
                }
            }
            c
        }
        None => match cli.command {
            Some(cmd) => ExperimentConfig::new(cmd),
            None => return Err(ConfigError::Usage("a command or --config is required".into())),
        },
    };
    if let Some(e) = &cli.ensemble {
        cfg.ensemble = Some(e.clone());
    }
    if let Some(n) = cli.n {
        cfg.n = Some(n);
    }
    if let Some(b) = cli.beta {
        cfg.beta = b;
    }
    if let Some(l) = &cli.lambda {
        cfg.lambda = l.clone();
    }
    if let Some(s) = &cli.seeds {
        cfg.seeds = s.clone();
    }
    if let Some(s) = cli.seed {
        cfg.seeds = vec![s];
    }
    if let Some(v) = cli.eta {
        cfg.solver.eta = v;
    }
    if let Some(v) = cli.momentum {
        cfg.solver.momentum = v;
    }
    if let Some(v) = cli.tol {
        cfg.solver.tol = v;
    }
    if let Some(v) = cli.max_iter {
        cfg.solver.max_iter = v;
    }
    if let Some(b) = cli.backend {
        cfg.backend = Some(b);
    }
    if let Some(o) = &cli.out {
        cfg.out = Some(o.clone());
    }
    if let Some(f) = cli.format {
        cfg.format = f;
    }
    if let Some(g) = cli.grid_step {
        cfg.grid_step = g;
    }
    if let Some(e) = cli.eps {
        cfg.eps = e;
    }
    cfg.validate()?;
    Ok(cfg)
}
