//! Benchmark sweeps: dataset generation, cooperative runs and result files.
//!
//! Output directory layout:
//!
//! - `instances/{label}_d{k}.tosp`: the generated datasets
//! - `records.csv`: one row per (architecture, instance, dataset, run)
//! - `summary.csv`: mean and standard deviation of the best fitness per
//!   instance (rows) and architecture (columns)

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Instant;

use deepmemetic_core::cooperation::run;
use deepmemetic_core::instance::generate_dataset;
use deepmemetic_core::rng::seed_from_parts;
use deepmemetic_core::{ArchitectureSpec, Instance, InstanceFamily};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{emax_for, ExperimentConfig};
use crate::io::{self, FileError};

pub const RECORDS_FILE: &str = "records.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const THREADS_ENV: &str = "DEEPMEMETIC_THREADS";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub architecture: String,
    pub instance: String,
    pub dataset: usize,
    pub run: usize,
    pub seed: u64,
    /// Empty when the run failed.
    pub best_fitness: Option<u32>,
    pub evaluations: u64,
    pub wall_time_s: f64,
    /// `ok`, or the error message of a failed run.
    pub status: String,
}

impl RunRecord {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }

    fn key(&self) -> (String, String, usize, usize) {
        (self.architecture.clone(), self.instance.clone(), self.dataset, self.run)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error(transparent)]
    File(#[from] FileError),
    #[error("{}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("family {label}: {message}")]
    Family { label: String, message: String },
    #[error("thread pool: {0}")]
    Threads(String),
}

fn csv_error(path: &Path) -> impl FnOnce(csv::Error) -> ExperimentError + '_ {
    move |source| ExperimentError::Csv {
        path: path.to_path_buf(),
        source,
    }
}

/// Seed of one dataset; depends only on the master seed, the family label
/// and the dataset index.
pub fn dataset_seed(master: u64, label: &str, dataset: usize) -> u64 {
    seed_from_parts(master, &[b"dataset", label.as_bytes(), &(dataset as u64).to_le_bytes()])
}

/// Seed of one run; independent of sweep order.
pub fn run_seed(master: u64, architecture: &str, label: &str, dataset: usize, run: usize) -> u64 {
    seed_from_parts(
        master,
        &[
            architecture.as_bytes(),
            label.as_bytes(),
            &(dataset as u64).to_le_bytes(),
            &(run as u64).to_le_bytes(),
        ],
    )
}

pub fn dataset_file_name(label: &str, dataset: usize) -> String {
    format!("{label}_d{dataset}.tosp")
}

/// Loads the dataset from `dir` if present, otherwise generates and saves it.
pub fn prepare_dataset(
    dir: &Path,
    family: &InstanceFamily,
    master: u64,
    dataset: usize,
) -> Result<Instance, ExperimentError> {
    let label = family.label();
    let path = dir.join(dataset_file_name(&label, dataset));
    if path.exists() {
        return Ok(io::load_instance(&path)?);
    }
    let inst = generate_dataset(family, dataset_seed(master, &label, dataset)).map_err(|e| ExperimentError::Family {
        label: label.clone(),
        message: e.to_string(),
    })?;
    io::save_instance(&inst, &path)?;
    Ok(inst)
}

/// Runs one architecture once; failures become records with an error status.
pub fn run_once(
    name: &str,
    spec: &ArchitectureSpec,
    inst: &Instance,
    dataset: usize,
    run_index: usize,
    budget: u64,
    master: u64,
) -> RunRecord {
    let seed = run_seed(master, name, inst.label(), dataset, run_index);
    let start = Instant::now();
    let outcome = run(spec, inst, budget, seed);
    let wall_time_s = start.elapsed().as_secs_f64();
    let (best_fitness, evaluations, status) = match outcome {
        Ok(o) => (Some(o.best.fitness), o.evaluations, "ok".to_string()),
        Err(e) => (None, 0, e.to_string()),
    };
    RunRecord {
        architecture: name.to_string(),
        instance: inst.label().to_string(),
        dataset,
        run: run_index,
        seed,
        best_fitness,
        evaluations,
        wall_time_s,
        status,
    }
}

pub fn read_records(path: impl AsRef<Path>) -> Result<Vec<RunRecord>, ExperimentError> {
    let path = path.as_ref();
    let mut reader = csv::Reader::from_path(path).map_err(csv_error(path))?;
    reader
        .deserialize()
        .collect::<Result<Vec<RunRecord>, _>>()
        .map_err(csv_error(path))
}

pub fn write_records(path: impl AsRef<Path>, records: &[RunRecord]) -> Result<(), ExperimentError> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(csv_error(path))?;
    for r in records {
        w.serialize(r).map_err(csv_error(path))?;
    }
    w.flush().map_err(|e| csv_error(path)(e.into()))
}

/// Worker threads from `DEEPMEMETIC_THREADS`; 0 or unset means sequential.
pub fn threads_from_env() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSummary {
    /// All records of the sweep in canonical order.
    pub records: Vec<RunRecord>,
    pub new_runs: usize,
}

struct Task<'a> {
    name: &'a str,
    spec: &'a ArchitectureSpec,
    inst: &'a Instance,
    dataset: usize,
    run: usize,
    budget: u64,
}

/// Runs the full sweep into `out_dir`, skipping records already present in
/// its `records.csv`. Uses `threads` workers (0 = sequential).
pub fn run_experiment_with_threads(
    cfg: &ExperimentConfig,
    out_dir: impl AsRef<Path>,
    threads: usize,
) -> Result<ExperimentSummary, ExperimentError> {
    let out = out_dir.as_ref();
    let inst_dir = out.join("instances");
    fs::create_dir_all(&inst_dir).map_err(|source| FileError::Io {
        path: inst_dir.clone(),
        source,
    })?;
    let records_path = out.join(RECORDS_FILE);

    let mut datasets = Vec::new();
    for family in &cfg.families {
        let budget = emax_for(family, cfg.phi).map_err(|e| ExperimentError::Family {
            label: family.label(),
            message: e.to_string(),
        })?;
        for d in 0..cfg.datasets_per_family {
            datasets.push((prepare_dataset(&inst_dir, family, cfg.master_seed, d)?, d, budget));
        }
    }

    let existing = if records_path.exists() {
        read_records(&records_path)?
    } else {
        Vec::new()
    };
    let done: HashSet<_> = existing.iter().map(RunRecord::key).collect();

    let mut tasks = Vec::new();
    for (name, spec) in &cfg.architectures {
        for (inst, d, budget) in &datasets {
            for r in 0..cfg.runs_per_dataset {
                if !done.contains(&(name.clone(), inst.label().to_string(), *d, r)) {
                    tasks.push(Task {
                        name,
                        spec,
                        inst,
                        dataset: *d,
                        run: r,
                        budget: *budget,
                    });
                }
            }
        }
    }

    // append as runs finish so an interrupted sweep can resume
    let append = records_path.metadata().is_ok_and(|m| m.len() > 0);
    let file = fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(&records_path)
        .map_err(|source| FileError::Io {
            path: records_path.clone(),
            source,
        })?;
    let writer = Mutex::new(csv::WriterBuilder::new().has_headers(!append).from_writer(file));
    let execute = |t: &Task<'_>| -> Result<RunRecord, ExperimentError> {
        let rec = run_once(t.name, t.spec, t.inst, t.dataset, t.run, t.budget, cfg.master_seed);
        let mut w = writer.lock().expect("record writer");
        w.serialize(&rec).map_err(csv_error(&records_path))?;
        w.flush().map_err(|e| csv_error(&records_path)(e.into()))?;
        Ok(rec)
    };
    let fresh: Vec<RunRecord> = if threads == 0 {
        tasks.iter().map(execute).collect::<Result<_, _>>()?
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| ExperimentError::Threads(e.to_string()))?
            .install(|| tasks.par_iter().map(execute).collect::<Result<_, _>>())?
    };
    drop(writer);

    let new_runs = fresh.len();
    let mut records = existing;
    records.extend(fresh);
    sort_records(cfg, &mut records);
    write_records(&records_path, &records)?;
    io::write(&out.join(SUMMARY_FILE), &summary_table(&records))?;
    Ok(ExperimentSummary { records, new_runs })
}

/// [`run_experiment_with_threads`] with the thread count from the
/// environment.
pub fn run_experiment(cfg: &ExperimentConfig, out_dir: impl AsRef<Path>) -> Result<ExperimentSummary, ExperimentError> {
    run_experiment_with_threads(cfg, out_dir, threads_from_env())
}

/// Configuration order of architectures and families, then dataset and run.
fn sort_records(cfg: &ExperimentConfig, records: &mut [RunRecord]) {
    let arch_pos = |a: &str| cfg.architectures.iter().position(|(n, _)| n == a).unwrap_or(usize::MAX);
    let fam_pos = |l: &str| cfg.families.iter().position(|f| f.label() == l).unwrap_or(usize::MAX);
    records.sort_by(|a, b| {
        (arch_pos(&a.architecture), &a.architecture, fam_pos(&a.instance), &a.instance, a.dataset, a.run).cmp(&(
            arch_pos(&b.architecture),
            &b.architecture,
            fam_pos(&b.instance),
            &b.instance,
            b.dataset,
            b.run,
        ))
    });
}

/// Sample mean and standard deviation (`n - 1` denominator; 0 for one value).
pub fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Two lines per instance, `mean` then `sd`, one column per architecture.
/// Cells without successful runs are left empty.
pub fn summary_table(records: &[RunRecord]) -> String {
    let mut archs: Vec<&str> = Vec::new();
    let mut insts: Vec<&str> = Vec::new();
    let mut cells: BTreeMap<(&str, &str), Vec<f64>> = BTreeMap::new();
    for r in records {
        if !archs.contains(&r.architecture.as_str()) {
            archs.push(&r.architecture);
        }
        if !insts.contains(&r.instance.as_str()) {
            insts.push(&r.instance);
        }
        if let (true, Some(f)) = (r.is_ok(), r.best_fitness) {
            cells.entry((&r.instance, &r.architecture)).or_default().push(f64::from(f));
        }
    }
    let mut out = String::from("instance,stat");
    for a in &archs {
        out.push(',');
        out.push_str(a);
    }
    out.push('\n');
    for inst in &insts {
        for (stat, pick) in [("mean", 0usize), ("sd", 1)] {
            out += &format!("{inst},{stat}");
            for a in &archs {
                out.push(',');
                if let Some(v) = cells.get(&(*inst, *a)) {
                    let (m, s) = mean_sd(v);
                    out += &format!("{:.2}", if pick == 0 { m } else { s });
                }
            }
            out.push('\n');
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_depend_on_every_part() {
        let base = run_seed(1, "Hu", "4z10x9", 0, 0);
        assert_eq!(base, run_seed(1, "Hu", "4z10x9", 0, 0));
        assert_ne!(base, run_seed(2, "Hu", "4z10x9", 0, 0));
        assert_ne!(base, run_seed(1, "Ca", "4z10x9", 0, 0));
        assert_ne!(base, run_seed(1, "Hu", "4z10x8", 0, 0));
        assert_ne!(base, run_seed(1, "Hu", "4z10x9", 1, 0));
        assert_ne!(base, run_seed(1, "Hu", "4z10x9", 0, 1));
    }

    #[test]
    fn mean_and_sd() {
        assert_eq!(mean_sd(&[2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0]).0, 5.0);
        assert!((mean_sd(&[1.0, 2.0, 3.0]).1 - 1.0).abs() < 1e-12);
        assert_eq!(mean_sd(&[3.0]), (3.0, 0.0));
    }
}
