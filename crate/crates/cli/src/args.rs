use std::path::PathBuf;

use binmed::model::{MediatorBlocks, ModelSpec, OutcomeBlocks};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::data::Bindings;
use crate::error::{CliError, CliResult};

/// Exact natural direct and indirect effects on the odds-ratio scale for a
/// binary outcome with a binary mediator.
#[derive(Debug, Parser)]
#[command(name = "binmed", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit both regressions to a data file and report the effects.
    Fit(FitArgs),
    /// Effects from a coefficient file, with inference when it carries
    /// covariance blocks.
    Effects(EffectsArgs),
    /// Draw a synthetic data set from a coefficient file's parameters and
    /// marginals.
    Simulate(SimulateArgs),
    /// Exact against rare-outcome approximate effects over a grid of
    /// outcome intercepts.
    Compare(CompareArgs),
    /// Run the seeded self-checks of the effect formulas.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Interaction {
    Xw,
    Xz,
    Wz,
    Xwz,
    Xv,
    None,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct ColumnArgs {
    /// Binary outcome column.
    #[arg(long, default_value = "y")]
    pub outcome: String,
    /// Binary mediator column.
    #[arg(long, default_value = "w")]
    pub mediator: String,
    /// Exposure column.
    #[arg(long, default_value = "x")]
    pub exposure: String,
}

impl ColumnArgs {
    pub fn bindings(&self) -> Bindings {
        Bindings { outcome: self.outcome.clone(), mediator: self.mediator.clone(), exposure: self.exposure.clone() }
    }
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct ModelArgs {
    /// Confounders of the outcome model, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub z: Vec<String>,
    /// Confounders of the mediator model, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub v: Vec<String>,
    /// Interaction blocks to include.
    #[arg(long, value_delimiter = ',', default_value = "xw")]
    pub interactions: Vec<Interaction>,
}

impl ModelArgs {
    pub fn spec(&self) -> CliResult<ModelSpec> {
        let has = |i| self.interactions.contains(&i);
        if has(Interaction::None) && self.interactions.len() > 1 {
            return Err(CliError::Usage("--interactions none cannot be combined with other blocks".into()));
        }
        let outcome = OutcomeBlocks {
            w: true,
            xw: has(Interaction::Xw),
            z: true,
            xz: has(Interaction::Xz),
            wz: has(Interaction::Wz),
            xwz: has(Interaction::Xwz),
        };
        let mediator = MediatorBlocks { v: true, xv: has(Interaction::Xv) };
        Ok(ModelSpec::new(self.z.clone(), self.v.clone(), outcome, mediator)?)
    }
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct ContrastArgs {
    /// Active exposure level.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub x: f64,
    /// Reference exposure level.
    #[arg(long = "x-star", default_value_t = 0.0, allow_negative_numbers = true)]
    pub x_star: f64,
    /// Covariate profile: `name=value,...`, `mean` or `typical`. Repeatable.
    #[arg(long = "profile")]
    pub profiles: Vec<String>,
    /// Confidence level of the intervals.
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
}

impl ContrastArgs {
    pub fn check(&self) -> CliResult<()> {
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(CliError::Usage(format!("--level {} is not in (0, 1)", self.level)));
        }
        if !self.x.is_finite() || !self.x_star.is_finite() {
            return Err(CliError::Usage("exposure levels must be finite".into()));
        }
        if self.x == self.x_star {
            return Err(CliError::Degenerate(format!(
                "degenerate contrast: x = x* = {}, every effect is identically 1",
                self.x
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct FitArgs {
    /// Comma-delimited data file with a header row.
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub columns: ColumnArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub contrast: ContrastArgs,
    /// Where to write the JSON report.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct EffectsArgs {
    /// Coefficient file, report written by `fit`, or bundled fixture name.
    #[arg(long = "coef-file")]
    pub coef_file: String,
    #[command(flatten)]
    pub contrast: ContrastArgs,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct SimulateArgs {
    /// Coefficient file with exposure and covariate marginals.
    #[arg(long = "coef-file")]
    pub coef_file: String,
    /// Number of rows.
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[command(flatten)]
    pub columns: ColumnArgs,
    /// Where to write the data; standard output when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct CompareArgs {
    #[arg(long = "coef-file")]
    pub coef_file: String,
    /// Outcome intercepts to evaluate, comma separated; the file's own
    /// intercept when absent.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub grid: Vec<f64>,
    #[command(flatten)]
    pub contrast: ContrastArgs,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = binmed::verify::VerifyOptions::default().seed)]
    pub seed: u64,
    /// Random draws per suite.
    #[arg(long, default_value_t = 1000)]
    pub count: usize,
    /// Shift applied to the exact results before comparison; a nonzero
    /// value is a negative control.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub perturb: f64,
    #[arg(long)]
    pub output: Option<PathBuf>,
}
