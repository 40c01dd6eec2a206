//! Command-line front end for `annulus-core`: configuration, command dispatch,
//! reproduction of the worked examples, and JSON/CSV output.

pub mod commands;
pub mod config;
pub mod report;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use commands::{exit, CliError, CommandOutput, KernelMode, Which};
use config::{ProblemConfig, DEFAULT_CONFIG};

#[derive(Debug, Parser)]
#[command(name = "annulus-radial", version, about = "Radial solutions of iterative elliptic systems on an annulus")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Problem configuration (TOML); the built-in synthetic problem when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Use a built-in worked example configuration instead of --config.
    #[arg(long, conflicts_with = "config")]
    pub example: Option<u32>,
    /// Directory receiving report.json and any CSV/trace files.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate the Green's kernel or check its bounds.
    Kernel {
        #[arg(value_enum, default_value = "check")]
        mode: KernelMode,
        #[arg(long)]
        grid: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Compute every constant with its convergence status.
    Constants {
        #[command(flatten)]
        common: Common,
    },
    /// Check hypothesis windows or the uniqueness condition.
    Check {
        #[arg(long, value_enum)]
        which: Option<Which>,
        #[command(flatten)]
        common: Common,
    },
    /// Solve the system by Picard iteration.
    Solve {
        /// Constant initial level.
        #[arg(long)]
        init: Option<f64>,
        /// Also run from constant levels spanning the configured windows.
        #[arg(long)]
        multistart: bool,
        #[arg(long)]
        grid: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Printed versus computed values for a built-in example.
    Reproduce {
        #[arg(long)]
        example: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load(common: &Common) -> Result<ProblemConfig, CliError> {
    Ok(match (&common.config, common.example) {
        (Some(path), _) => ProblemConfig::load(path)?,
        (None, Some(id)) => ProblemConfig::example(id)?,
        (None, None) => ProblemConfig::from_toml(DEFAULT_CONFIG)?,
    })
}

fn write_files(dir: &Path, files: &[(String, String)]) -> Result<(), CliError> {
    let io = |path: &Path, source| CliError::Io {
        path: path.display().to_string(),
        source,
    };
    std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    for (name, text) in files {
        let path = dir.join(name);
        std::fs::write(&path, text).map_err(|e| io(&path, e))?;
    }
    Ok(())
}

pub fn execute(cli: &Cli) -> Result<(CommandOutput, Option<PathBuf>), CliError> {
    Ok(match &cli.command {
        Command::Kernel { mode, grid, common } => {
            (commands::cmd_kernel(&load(common)?, *mode, *grid)?, common.out.clone())
        }
        Command::Constants { common } => (commands::cmd_constants(&load(common)?)?, common.out.clone()),
        Command::Check { which, common } => {
            (commands::cmd_check(&load(common)?, *which)?, common.out.clone())
        }
        Command::Solve {
            init,
            multistart,
            grid,
            common,
        } => (
            commands::cmd_solve(&load(common)?, *init, *multistart, *grid)?,
            common.out.clone(),
        ),
        Command::Reproduce { example, out } => (commands::cmd_reproduce(*example)?, out.clone()),
    })
}

/// Runs the CLI on `args` and returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut impl std::io::Write, stderr: &mut impl std::io::Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return if e.use_stderr() { exit::CONFIG } else { exit::OK };
        }
    };
    let result = execute(&cli).and_then(|(out, dir)| {
        if let Some(dir) = dir {
            write_files(&dir, &out.files)?;
        }
        Ok(out)
    });
    match result {
        Ok(out) => {
            let _ = stdout.write_all(out.stdout.as_bytes());
            out.code
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
