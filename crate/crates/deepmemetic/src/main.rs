use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use deepmemetic::analyze::analyze;
use deepmemetic::config::{emax_for, ExperimentConfig};
use deepmemetic::experiment::{read_records, run_experiment};
use deepmemetic::io::{load_instance, load_macros, save_instance};
use deepmemetic::solver::cooperation::{print_architecture, run, Macros};
use deepmemetic::solver::instance::generate_dataset;
use deepmemetic::solver::{ArchitectureSpec, InstanceFamily};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "deepmemetic", version, about = "Nested cooperative metaheuristics for the tool switching problem")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ArchArgs {
    /// Architecture expression, e.g. `5Br(Hu,MAHC,CEM)`
    #[arg(long)]
    arch: String,
    /// File of extra `NAME = EXPR` macro bindings
    #[arg(long)]
    macros: Option<PathBuf>,
}

impl ArchArgs {
    fn spec(&self) -> Result<ArchitectureSpec> {
        let macros = match &self.macros {
            Some(p) => load_macros(p)?,
            None => Macros::presets(),
        };
        macros.parse(&self.arch).with_context(|| format!("parsing `{}`", self.arch))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance and print the best sequence as JSON
    Solve {
        #[command(flatten)]
        arch: ArchArgs,
        #[arg(long)]
        instance: PathBuf,
        /// Evaluation budget
        #[arg(long, conflicts_with = "phi")]
        budget: Option<u64>,
        /// Budget as phi * n * (m - C); default 100
        #[arg(long)]
        phi: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Generate a random instance
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        cap: usize,
        #[arg(long)]
        min: usize,
        #[arg(long)]
        max: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run an experiment sweep (resumes an existing output directory)
    Bench {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Rank statistics, Quade and Holm tests over a records file
    Analyze {
        #[arg(long)]
        records: PathBuf,
        /// Control architecture, or `best` for the best mean rank
        #[arg(long, default_value = "best")]
        control: String,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the meta-cooperation depth of an architecture
    Depth {
        #[command(flatten)]
        arch: ArchArgs,
    },
}

#[derive(Serialize)]
struct Solution {
    architecture: String,
    instance: String,
    budget: u64,
    seed: u64,
    best_fitness: u32,
    evaluations: u64,
    /// 0-based job indices in processing order
    sequence: Vec<usize>,
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Solve {
            arch,
            instance,
            budget,
            phi,
            seed,
        } => {
            let spec = arch.spec()?;
            let inst = load_instance(&instance)?;
            let budget = match budget {
                Some(b) => b,
                None => emax_for(
                    &InstanceFamily::new(inst.capacity(), inst.jobs(), inst.tools(), 1, 1),
                    phi.unwrap_or(100),
                )?,
            };
            let out = run(&spec, &inst, budget, seed)?;
            let solution = Solution {
                architecture: print_architecture(&spec),
                instance: inst.label().to_string(),
                budget,
                seed,
                best_fitness: out.best.fitness,
                evaluations: out.evaluations,
                sequence: out.best.seq.into_vec(),
            };
            let mut stdout = std::io::stdout().lock();
            match writeln!(stdout, "{}", serde_json::to_string_pretty(&solution)?) {
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => {}
                other => other?,
            }
        }
        Command::Gen {
            n,
            m,
            cap,
            min,
            max,
            seed,
            out,
        } => {
            let family = InstanceFamily::new(cap, n, m, min, max);
            family.validate()?;
            let inst = generate_dataset(&family, seed)?;
            save_instance(&inst, &out)?;
            eprintln!("wrote {} to {}", inst.label(), out.display());
        }
        Command::Bench { config, out } => {
            let cfg = match config {
                Some(p) => ExperimentConfig::load(p)?,
                None => ExperimentConfig::default(),
            };
            let summary = run_experiment(&cfg, &out)?;
            let failed = summary.records.iter().filter(|r| !r.is_ok()).count();
            eprintln!(
                "{} new runs, {} records total, {} failed; results in {}",
                summary.new_runs,
                summary.records.len(),
                failed,
                out.display()
            );
        }
        Command::Analyze {
            records,
            control,
            alpha,
            out,
        } => {
            if !(alpha > 0.0 && alpha < 1.0) {
                bail!("alpha must lie in (0, 1)");
            }
            let recs = read_records(&records)?;
            let report = analyze(&recs, &control, alpha)?;
            report.write(&out)?;
            match &report.quade {
                Ok(q) => println!("quade F = {:.4}, p = {:.4e}", q.statistic, q.p_value),
                Err(e) => println!("quade: {e}"),
            }
            println!("control: {}", report.algorithms[report.control]);
            print!("{}", report.holm_csv());
        }
        Command::Depth { arch } => {
            let spec = arch.spec()?;
            println!("{}", spec.depth()?);
        }
    }
    Ok(())
}
