use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cplab::cli::{self, CliError, Command, Preset, RunOptions, StateSource, EXIT_ERROR};
use cplab::config::{parse_matrix, ConfigError};

#[derive(Parser)]
#[command(name = "cplab", version, about = "Complete-positivity analysis of GKS/Lindblad generators")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Decide complete positivity; emit a witness when it fails.
    CheckCp(Common),
    /// Construct a witness and scan the overlap for negativity.
    Witness {
        #[command(flatten)]
        common: Common,
        /// Also evaluate a user-supplied W (JSON matrix) as a fixture.
        #[arg(long, value_name = "JSON")]
        explicit_w: Option<String>,
    },
    /// Convert between GKS and Lindblad form.
    Convert(Common),
    /// Evolve a state under exp(tL), or (L⊗I + I⊗L) for a bipartite state.
    Evolve {
        #[command(flatten)]
        common: Common,
        /// JSON file holding a density matrix, or `witness`.
        #[arg(long, value_name = "PATH|witness")]
        state: Option<String>,
        #[arg(long)]
        time: Option<f64>,
    },
    /// Scan λ_min and ⟨φ|ρ(t)|φ⟩ over a time grid.
    Scan(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Relative tolerance (overrides config and CPLAB_TOL).
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// start:stop:points[:log|lin]
    #[arg(long)]
    grid: Option<String>,
    /// Write the report here instead of stdout.
    #[arg(long, value_name = "PATH")]
    output: Option<PathBuf>,
    #[arg(long)]
    preset: Option<Preset>,
}

fn read(path: &PathBuf) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

fn parse_json_matrix(text: &str, what: &str) -> Result<cplab::linalg::ComplexMatrix, CliError> {
    let v: serde_json::Value = serde_json::from_str(text).map_err(|e| ConfigError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    Ok(parse_matrix(&v, what, None)?)
}

fn execute(cli: Cli) -> Result<i32, CliError> {
    let (command, common, explicit_w, state, time) = match cli.command {
        Sub::CheckCp(c) => (Command::CheckCp, c, None, None, None),
        Sub::Witness { common, explicit_w } => (Command::Witness, common, explicit_w, None, None),
        Sub::Convert(c) => (Command::Convert, c, None, None, None),
        Sub::Evolve { common, state, time } => (Command::Evolve, common, None, state, time),
        Sub::Scan(c) => (Command::Scan, c, None, None, None),
    };
    if let Some(t) = common.tol {
        if !(t > 0.0 && t.is_finite()) {
            return Err(CliError::Usage("--tol must be a positive number".into()));
        }
    }
    let cfg = cli::load_config(&read(&common.config)?, common.preset)?;
    let state = match state.as_deref() {
        None => None,
        Some("witness") => Some(StateSource::Witness),
        Some(path) => Some(StateSource::Matrix(parse_json_matrix(&read(&path.into())?, "state")?)),
    };
    let opts = RunOptions {
        tol: common.tol,
        env_tol: cli::env_tolerance()?,
        seed: common.seed,
        grid: common.grid.as_deref().map(cli::parse_grid).transpose()?,
        preset: common.preset,
        explicit_w: explicit_w.as_deref().map(|s| parse_json_matrix(s, "explicit_w")).transpose()?,
        state,
        time,
    };
    let out = cli::run(command, &cfg, &opts)?;
    let text = out.render();
    match &common.output {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))?,
        None => print!("{text}"),
    }
    Ok(out.exit_code)
}

fn main() -> ExitCode {
    // clap's own usage code is 2, which is reserved for certified non-positivity
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR as u8 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR as u8)
        }
    }
}
