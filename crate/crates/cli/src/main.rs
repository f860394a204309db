use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use iga_sipg::assembly::assemble_system;
use iga_sipg::harness::verify::{run_criterion, NUM_CRITERIA};
use iga_sipg::harness::{run_study, CaseOptions, ManufacturedSolution, StudyConfig};
use iga_sipg::space::DgSpace;

#[derive(Parser)]
#[command(name = "iga-sipg", version, about = "Multipatch isogeometric SIPG solver for diffusion problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a convergence study and print the CSV table.
    Study {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the numerical acceptance checks.
    Verify {
        /// Criterion numbers to run; all when omitted.
        #[arg(long = "only", value_delimiter = ',')]
        only: Vec<usize>,
    },
    /// Write the system matrix of one study cell in triplet format.
    ExportMatrix {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Refinement level; defaults to the config's min_level.
        #[arg(long)]
        level: Option<usize>,
        /// Spline degree; defaults to the first configured degree.
        #[arg(long)]
        degree: Option<usize>,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Study { config } => study(config),
        Command::Verify { only } => verify(only),
        Command::ExportMatrix { config, out, level, degree } => export_matrix(config, out, level, degree),
    }
}

fn study(config: PathBuf) -> Result<ExitCode> {
    let cfg = StudyConfig::from_file(&config).with_context(|| format!("loading {}", config.display()))?;
    let table = run_study(&cfg)?;
    for w in &table.warnings {
        eprintln!("warning: {w}");
    }
    for f in &table.failures {
        eprintln!("failed: {f}");
    }
    print!("{}", table.to_csv());
    if let Some(path) = cfg.output_path() {
        eprintln!("wrote {}", path.display());
    }
    Ok(if table.failures.is_empty() { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn verify(only: Vec<usize>) -> Result<ExitCode> {
    let list: Vec<usize> = if only.is_empty() { (1..=NUM_CRITERIA).collect() } else { only };
    if let Some(n) = list.iter().find(|n| !(1..=NUM_CRITERIA).contains(*n)) {
        bail!("criterion {n} does not exist (1..={NUM_CRITERIA})");
    }
    let mut failed = 0;
    for n in list {
        let outcome = run_criterion(n);
        println!("{outcome}");
        failed += usize::from(!outcome.passed);
    }
    Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn export_matrix(config: PathBuf, out: PathBuf, level: Option<usize>, degree: Option<usize>) -> Result<ExitCode> {
    let cfg = StudyConfig::from_file(&config).with_context(|| format!("loading {}", config.display()))?;
    let level = level.unwrap_or(cfg.study.min_level);
    let degree = degree.unwrap_or(cfg.study.degrees[0]);
    let domain = cfg.template()?.discretize(level, degree)?;
    let opts = CaseOptions::from_config(&cfg)?;
    let alpha: Vec<f64> = domain.patches.iter().map(|p| p.alpha).collect();
    let solution = ManufacturedSolution::new(cfg.solution_id()?, alpha)?;
    let space = DgSpace::build(&domain, opts.mode)?;
    let params = opts.parameters(&domain)?;
    let system = assemble_system(&domain, &space, &params, &opts.quadrature, &|k, x| solution.source(k, x), &|k, x| {
        solution.boundary(k, x)
    })?;
    let file = File::create(&out).with_context(|| format!("creating {}", out.display()))?;
    let mut w = BufWriter::new(file);
    system.matrix.write_triplets(&mut w)?;
    w.flush()?;
    eprintln!("wrote {} ({} unknowns, {} stored entries)", out.display(), system.matrix.dim(), system.matrix.nnz());
    Ok(ExitCode::SUCCESS)
}
