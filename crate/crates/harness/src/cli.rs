use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use mces_core::diagnostics;
use mces_core::models::LgcpParams;
use mces_core::Trace;

use crate::config::ExperimentSpec;
use crate::data;
use crate::error::{HarnessError, Result};
use crate::experiments::run_experiment;
use crate::output::write_result;
use crate::theorem;

#[derive(Debug, Parser)]
#[command(name = "mces", version, about = "Maximum conditional entropy HMC: experiments and diagnostics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one experiment: gauss1d, rosenbrock, eight_schools, german_credit, lgcp or robustness.
    Run {
        experiment: String,
        /// `key = value` file layered over the experiment defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        replicates: Option<usize>,
        #[arg(long, default_value = "results")]
        out: PathBuf,
        /// Full-size settings (slow).
        #[arg(long)]
        paper_scale: bool,
    },
    /// Check that M = Sigma⁻¹, T = pi/2 maximizes the conditional entropy on random instances.
    VerifyTheorem {
        /// Dimension of every instance; by default cycles through 1..=5.
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long, default_value_t = 2000)]
        grid: usize,
        #[arg(long, default_value_t = 20)]
        pairs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Generate a synthetic LGCP data set (counts, latent field, intensity).
    GenLgcp {
        #[arg(long, default_value_t = 16)]
        d: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Output directory; defaults to `lgcp_d<d>_seed<seed>`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Effective sample size of every coordinate of a trace file.
    Ess {
        trace: PathBuf,
        #[arg(long, default_value_t = 0)]
        discard: usize,
    },
}

/// Resolves the spec for `run`: defaults, then `--paper-scale`, then the config file, then flags.
pub fn resolve_spec(
    experiment: &str,
    config: Option<&Path>,
    seed: Option<u64>,
    replicates: Option<usize>,
    paper_scale: bool,
) -> Result<ExperimentSpec> {
    let mut spec = ExperimentSpec::new(experiment.parse()?);
    if paper_scale {
        spec = spec.paper_scale();
    }
    if let Some(path) = config {
        spec.apply(&data::read_text(path)?)?;
    }
    if let Some(seed) = seed {
        spec.mces.seed = seed;
    }
    if let Some(k) = replicates {
        if k == 0 {
            return Err(HarnessError::Usage("--replicates must be at least 1".into()));
        }
        spec.replicates = k;
    }
    Ok(spec)
}

/// Executes a parsed command, writing reports to `out` and notes to `err`.
pub fn execute(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let io = |e: std::io::Error| HarnessError::io("<stdout>", e);
    match command {
        Command::Run {
            experiment,
            config,
            seed,
            replicates,
            out: dir,
            paper_scale,
        } => {
            let spec = resolve_spec(&experiment, config.as_deref(), seed, replicates, paper_scale)?;
            if paper_scale {
                writeln!(err, "warning: paper-scale settings can take hours").map_err(io)?;
            }
            let result = run_experiment(&spec)?;
            let written = write_result(&result, &dir)?;
            for (k, v) in &result.metrics {
                writeln!(out, "{k} = {v:.16e}").map_err(io)?;
            }
            writeln!(out, "wrote {}", written.display()).map_err(io)?;
        }
        Command::VerifyTheorem { dim, grid, pairs, seed } => {
            if grid == 0 || pairs == 0 || dim == Some(0) {
                return Err(HarnessError::Usage("--grid, --pairs and --dim must be positive".into()));
            }
            let cases = theorem::verify(dim, grid, pairs, seed)?;
            out.write_all(theorem::cases_to_csv(&cases).as_bytes()).map_err(io)?;
            let failed = cases.iter().filter(|c| !c.passes()).count();
            if failed > 0 {
                return Err(HarnessError::Numerical(format!("{failed} of {pairs} instances missed the optimum")));
            }
        }
        Command::GenLgcp { d, seed, out: dir } => {
            if d < 2 {
                return Err(HarnessError::Usage("--d must be at least 2".into()));
            }
            let field = data::generate_lgcp_data(&LgcpParams::reference(d), seed)?;
            let dir = dir.unwrap_or_else(|| PathBuf::from(format!("lgcp_d{d}_seed{seed}")));
            std::fs::create_dir_all(&dir).map_err(|e| HarnessError::io(&dir, e))?;
            for (name, text) in [
                ("counts.csv", data::counts_to_csv(&field.counts, d)),
                ("latent.csv", data::grid_to_csv(&field.latent, d)),
                ("intensity.csv", data::grid_to_csv(&field.intensity, d)),
            ] {
                let path = dir.join(name);
                std::fs::write(&path, text).map_err(|e| HarnessError::io(&path, e))?;
            }
            writeln!(out, "total_count = {}", field.counts.sum()).map_err(io)?;
            writeln!(out, "wrote {}", dir.display()).map_err(io)?;
        }
        Command::Ess { trace, discard } => {
            let trace = Trace::from_csv(&data::read_text(&trace)?)
                .map_err(|e| HarnessError::Data(format!("{}: {e}", trace.display())))?;
            let report = diagnostics::ess_per_l(&trace, discard)?;
            out.write_all(report.to_csv().as_bytes()).map_err(io)?;
        }
    }
    Ok(())
}

/// Parses `args` and runs; returns the process exit status.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli.command, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
