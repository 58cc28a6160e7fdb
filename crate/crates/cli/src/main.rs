use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, ValueEnum};

use pnse_ldg::errors::{write_csv, write_json};
use pnse_ldg::experiment::{run_series, RunConfig};
use pnse_ldg::manufactured::{CaseId, ExponentBase, Mode};
use pnse_ldg::solver::NewtonConfig;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    NavierStokes,
    Stokes,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BaseArg {
    Alpha,
    Beta,
}

/// Convergence study for the LDG discretization of steady p-Navier-Stokes
/// (or p-Stokes) flow with a manufactured singular solution.
#[derive(Debug, Parser)]
#[command(name = "pnse-ldg", version)]
struct Args {
    /// Power-law exponents, each > 2 (comma separated or repeated).
    #[arg(long = "p", value_delimiter = ',', required = true)]
    p: Vec<f64>,

    /// Pressure regularity case: 1 or 2.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
    case: u8,

    #[arg(long, value_enum, default_value = "navier-stokes")]
    mode: ModeArg,

    /// Refinement levels as `a..b` (inclusive) or a comma list.
    #[arg(long, default_value = "1..5")]
    levels: String,

    /// Stabilization parameter.
    #[arg(long, default_value_t = 2.5)]
    alpha: f64,

    /// Shift of the power law.
    #[arg(long, default_value_t = 1e-4)]
    delta: f64,

    /// Polynomial degree.
    #[arg(long, default_value_t = 1)]
    degree: usize,

    /// Output file; stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,

    #[arg(long, value_enum, default_value = "csv")]
    format: Format,

    /// Factor in the case 2 pressure exponent `factor * (p - 2) / 2 + 1e-4`.
    #[arg(long, value_enum, default_value = "beta")]
    case2_exponent_base: BaseArg,

    /// Start each level from the prolongated solution of the previous one.
    #[arg(long)]
    warm_start: bool,

    /// Newton iteration cap per level.
    #[arg(long, default_value_t = 50)]
    max_iterations: usize,

    /// Plain Newton without backtracking.
    #[arg(long)]
    no_damping: bool,

    /// Record wall time per level in the output.
    #[arg(long)]
    timing: bool,
}

fn parse_levels(s: &str) -> anyhow::Result<Vec<usize>> {
    if let Some((a, b)) = s.split_once("..") {
        let a: usize = a.trim().parse().context("level range start")?;
        let b: usize = b.trim().parse().context("level range end")?;
        if a > b {
            bail!("empty level range {s}");
        }
        return Ok((a..=b).collect());
    }
    s.split(',')
        .map(|t| t.trim().parse::<usize>().with_context(|| format!("bad level {t:?}")))
        .collect()
}

impl Args {
    fn run_config(&self) -> anyhow::Result<RunConfig> {
        Ok(RunConfig {
            p: self.p.clone(),
            case: if self.case == 1 { CaseId::One } else { CaseId::Two },
            mode: match self.mode {
                ModeArg::NavierStokes => Mode::NavierStokes,
                ModeArg::Stokes => Mode::Stokes,
            },
            levels: parse_levels(&self.levels)?,
            alpha: self.alpha,
            delta: self.delta,
            degree: self.degree,
            case2_exponent_base: match self.case2_exponent_base {
                BaseArg::Alpha => ExponentBase::Alpha,
                BaseArg::Beta => ExponentBase::Beta,
            },
            warm_start: self.warm_start,
            timing: self.timing,
            newton: NewtonConfig {
                damping: !self.no_damping,
                max_iterations: self.max_iterations,
                ..NewtonConfig::default()
            },
        })
    }
}

fn run(args: &Args) -> anyhow::Result<bool> {
    let config = args.run_config()?;
    config.validate()?;
    let reports = run_series(&config)?;
    let mut sink: Box<dyn Write> = match &args.out {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).with_context(|| format!("creating {}", path.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    match args.format {
        Format::Csv => write_csv(&reports, &mut sink)?,
        Format::Json => {
            write_json(&reports, &mut sink)?;
            writeln!(sink)?;
        }
    }
    sink.flush()?;
    let mut ok = true;
    for r in &reports {
        if let Some(msg) = &r.failure {
            eprintln!("p = {}: {msg}", r.p);
            ok = false;
        }
    }
    Ok(ok)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    match run(&args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
