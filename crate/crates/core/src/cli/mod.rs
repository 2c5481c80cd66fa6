// Copyright 2026 The cfpe Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! `cfpe` command-line experiment runner.
//!
//! ```text
//! cfpe [--config FILE] [--seed N] [--out DIR] [--format csv|json] [--preset NAME]
//!      <weakvals|pointer|zeno|cavity|sweep> [command flags]
//! ```
//!
//! Exit codes: 0 success, 1 other failure, 2 configuration error, 3
//! orthogonal ensemble, 4 numeric-quality failure, 5 I/O error. A sweep
//! exits with the code of its first failed row.

pub mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::protocol::PostSelectionConvention;
use crate::weakvalues::WeakValueOrdering;
use crate::zeno::ZenoModel;
use config::{CommandName, ExperimentConfig, ObservableName, Preset};
use output::{Format, ResultRecord};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_ORTHOGONAL: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;
pub const EXIT_IO: i32 = 5;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("I/O error: {0}")]
    Io(String),
    #[error(transparent)]
    Sim(#[from] crate::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use crate::Error as E;
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Io(_) => EXIT_IO,
            CliError::Sim(E::OrthogonalEnsemble { .. }) => EXIT_ORTHOGONAL,
            CliError::Sim(E::NumericQuality(_)) => EXIT_NUMERIC,
            CliError::Sim(E::Parameter(_) | E::Structural(_)) => EXIT_CONFIG,
            CliError::Sim(E::Degenerate(_) | E::Precondition(_)) => EXIT_FAILURE,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "cfpe", version, about = "Counterfactual photoelectric-effect protocol simulator")]
pub struct Cli {
    /// TOML or JSON config file (a previous result record is accepted too).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed for Monte Carlo commands.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Directory for output files; stdout when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "json")]
    pub format: Format,
    /// Starting configuration applied before the config file.
    #[arg(long, global = true, value_enum)]
    pub preset: Option<Preset>,
    /// Experiment id used for file names (defaults to preset or command name).
    #[arg(long, global = true)]
    pub id: Option<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Arm projector and energy weak values plus the self-canceling pair.
    Weakvals(WeakvalsArgs),
    /// Post-selected pointer mean and variance against coupling g.
    Pointer(PointerArgs),
    /// Photon recycling Monte Carlo.
    Zeno(ZenoArgs),
    /// Cavity photon regeneration and emission probability against dt.
    Cavity(CavityArgs),
    /// Cartesian parameter sweep declared in the config file.
    Sweep,
}

#[derive(Debug, Args)]
pub struct WeakvalsArgs {
    #[arg(long)]
    pub convention: Option<PostSelectionConvention>,
    #[arg(long)]
    pub ordering: Option<WeakValueOrdering>,
    #[arg(long)]
    pub fock_dim: Option<usize>,
    /// Extra observable to report; repeatable.
    #[arg(long = "operator")]
    pub operators: Vec<ObservableName>,
}

#[derive(Debug, Args)]
pub struct PointerArgs {
    #[arg(long)]
    pub convention: Option<PostSelectionConvention>,
    #[arg(long)]
    pub operator: Option<ObservableName>,
    /// Comma-separated coupling strengths.
    #[arg(long = "g", value_delimiter = ',')]
    pub g_values: Vec<f64>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Symmetric grid half-width.
    #[arg(long)]
    pub half_width: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ZenoArgs {
    #[arg(long)]
    pub model: Option<ZenoModel>,
    #[arg(long)]
    pub cycles: Option<usize>,
    #[arg(long)]
    pub runs: Option<usize>,
    #[arg(long)]
    pub convention: Option<PostSelectionConvention>,
    #[arg(long)]
    pub dt: Option<f64>,
    /// Comma-separated N values for the survival curve.
    #[arg(long, value_delimiter = ',')]
    pub n_values: Vec<usize>,
}

#[derive(Debug, Args)]
pub struct CavityArgs {
    /// Comma-separated interaction times.
    #[arg(long = "dt", value_delimiter = ',')]
    pub dt_values: Vec<f64>,
    #[arg(long)]
    pub length: Option<f64>,
    #[arg(long)]
    pub omega: Option<f64>,
    #[arg(long)]
    pub fock_dim: Option<usize>,
}

impl Command {
    pub fn name(&self) -> CommandName {
        match self {
            Command::Weakvals(_) => CommandName::Weakvals,
            Command::Pointer(_) => CommandName::Pointer,
            Command::Zeno(_) => CommandName::Zeno,
            Command::Cavity(_) => CommandName::Cavity,
            Command::Sweep => CommandName::Sweep,
        }
    }

    /// Flag overrides as a JSON layer.
    fn overrides(&self) -> Value {
        let mut v = json!({});
        let mut put = |path: &str, val: Value| {
            config::set_path(&mut v, path, val).expect("static path");
        };
        match self {
            Command::Weakvals(a) => {
                if let Some(c) = a.convention {
                    put("weakvals.convention", json!(c));
                }
                if let Some(o) = a.ordering {
                    put("weakvals.ordering", json!(o));
                }
                if let Some(d) = a.fock_dim {
                    put("weakvals.fock_dim", json!(d));
                }
                if !a.operators.is_empty() {
                    put("weakvals.operators", json!(a.operators));
                }
            }
            Command::Pointer(a) => {
                if let Some(c) = a.convention {
                    put("pointer.convention", json!(c));
                }
                if let Some(o) = a.operator {
                    put("pointer.operator", json!(o));
                }
                if !a.g_values.is_empty() {
                    put("pointer.g_values", json!(a.g_values));
                }
                if let Some(s) = a.samples {
                    put("pointer.samples", json!(s));
                }
                if let Some(s) = a.sigma {
                    put("pointer.sigma", json!(s));
                }
                if let Some(h) = a.half_width {
                    put("pointer.grid_min", json!(-h));
                    put("pointer.grid_max", json!(h));
                }
            }
            Command::Zeno(a) => {
                if let Some(m) = a.model {
                    put("zeno.model", json!(m));
                }
                if let Some(n) = a.cycles {
                    put("zeno.cycles", json!(n));
                }
                if let Some(r) = a.runs {
                    put("zeno.runs", json!(r));
                }
                if let Some(c) = a.convention {
                    put("zeno.convention", json!(c));
                }
                if let Some(dt) = a.dt {
                    put("zeno.interaction_dt", json!(dt));
                }
                if !a.n_values.is_empty() {
                    put("zeno.n_values", json!(a.n_values));
                }
            }
            Command::Cavity(a) => {
                if !a.dt_values.is_empty() {
                    put("cavity.dt_values", json!(a.dt_values));
                }
                if let Some(l) = a.length {
                    put("cavity.length", json!(l));
                }
                if let Some(w) = a.omega {
                    put("cavity.omega", json!(w));
                }
                if let Some(d) = a.fock_dim {
                    put("cavity.fock_dim", json!(d));
                }
            }
            Command::Sweep => {}
        }
        v
    }
}

/// Layers defaults, preset, config file and flags into one configuration.
pub fn resolve_config(cli: &Cli) -> Result<ExperimentConfig, CliError> {
    let base = cli.preset.map(Preset::config).unwrap_or_default();
    let mut v = config::to_value(&base);
    if let Some(path) = &cli.config {
        config::merge(&mut v, config::load_layer(path)?);
    }
    config::merge(&mut v, cli.command.overrides());
    if let Some(seed) = cli.seed {
        config::merge(&mut v, json!({ "seed": seed }));
    }
    let cfg = config::from_value(v)?;
    let needs_seed = match cli.command.name() {
        CommandName::Sweep => cfg.sweep.as_ref().is_some_and(|s| s.command.uses_randomness()),
        c => c.uses_randomness(),
    };
    if needs_seed && cfg.seed.is_none() {
        return Err(CliError::Config("this command is Monte Carlo: pass --seed or set `seed` in the config".into()));
    }
    Ok(cfg)
}

/// Resolves, runs and packages one experiment. Returns the record and, for
/// sweeps, the exit code of the first failed row.
pub fn execute(cli: &Cli) -> Result<(ResultRecord, Option<i32>), CliError> {
    let cfg = resolve_config(cli)?;
    let cmd = cli.command.name();
    let out = commands::run_command(cmd, &cfg)?;
    let failure = if cmd == CommandName::Sweep { commands::sweep_failure(&out) } else { None };
    let experiment = cli
        .id
        .clone()
        .or_else(|| cli.preset.map(|p| p.as_str().to_string()))
        .unwrap_or_else(|| cmd.as_str().to_string());
    if experiment.is_empty() || experiment.contains(['/', '\\']) {
        return Err(CliError::Config(format!("invalid experiment id '{experiment}'")));
    }
    let record = ResultRecord {
        experiment,
        command: cmd.as_str().to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: cfg,
        scalars: out.scalars,
        series: out.series,
        series_files: Vec::new(),
        notes: out.notes,
    };
    Ok((record, failure))
}

/// Full CLI entry point; returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(stderr, "{e}");
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let result = execute(&cli).and_then(|(record, failure)| {
        match &cli.out {
            Some(dir) => {
                for path in output::write_record(&record, dir, cli.format)? {
                    let _ = writeln!(stderr, "wrote {}", path.display());
                }
            }
            None => {
                let text = output::render(&record, cli.format)?;
                stdout.write_all(text.as_bytes()).map_err(|e| CliError::Io(e.to_string()))?;
            }
        }
        for note in &record.notes {
            let _ = writeln!(stderr, "note: {note}");
        }
        Ok(failure)
    });
    match result {
        Ok(None) => EXIT_OK,
        Ok(Some(code)) => {
            let _ = writeln!(stderr, "error: sweep finished with failed rows");
            code
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
