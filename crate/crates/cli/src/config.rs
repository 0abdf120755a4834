use std::path::Path;

use fermigauss::sdp::SolverOptions;
use fermigauss::Tolerances;
use serde::Deserialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Table,
}

/// Settings shared by every subcommand.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub eps_psd: f64,
    pub eps_feas: f64,
    pub max_iters: usize,
    pub seed: u64,
    pub output_format: OutputFormat,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            eps_psd: 1e-9,
            eps_feas: 1e-7,
            max_iters: 20_000,
            seed: 0,
            output_format: OutputFormat::Json,
        }
    }
}

/// Config-file shape; every key is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    eps_psd: Option<f64>,
    eps_feas: Option<f64>,
    max_iters: Option<usize>,
    seed: Option<u64>,
    output_format: Option<OutputFormat>,
}

/// Values given on the command line, which take precedence over the file.
#[derive(Debug, Default)]
pub struct Overrides {
    pub eps_psd: Option<f64>,
    pub eps_feas: Option<f64>,
    pub max_iters: Option<usize>,
    pub seed: Option<u64>,
    pub output_format: Option<OutputFormat>,
}

impl RunConfig {
    pub fn load(path: Option<&Path>, cli: Overrides) -> Result<Self, String> {
        let file = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| format!("cannot read config {}: {e}", p.display()))?;
                toml::from_str::<FileConfig>(&text).map_err(|e| format!("bad config {}: {e}", p.display()))?
            }
            None => FileConfig::default(),
        };
        let d = RunConfig::default();
        let cfg = RunConfig {
            eps_psd: cli.eps_psd.or(file.eps_psd).unwrap_or(d.eps_psd),
            eps_feas: cli.eps_feas.or(file.eps_feas).unwrap_or(d.eps_feas),
            max_iters: cli.max_iters.or(file.max_iters).unwrap_or(d.max_iters),
            seed: cli.seed.or(file.seed).unwrap_or(d.seed),
            output_format: cli.output_format.or(file.output_format).unwrap_or(d.output_format),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), String> {
        for (name, v) in [("eps_psd", self.eps_psd), ("eps_feas", self.eps_feas)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(format!("{name} must be positive, got {v}"));
            }
        }
        if self.max_iters == 0 {
            return Err("max_iters must be at least 1".into());
        }
        Ok(())
    }

    pub fn tolerances(&self) -> Tolerances {
        Tolerances {
            eps_psd: self.eps_psd,
            eps_feas: self.eps_feas,
            ..Tolerances::default()
        }
    }

    pub fn solver(&self) -> SolverOptions {
        SolverOptions {
            max_iters: self.max_iters,
            seed: self.seed,
            ..SolverOptions::default()
        }
    }
}
