//! Statistical report over a records file.
//!
//! Results are averaged per (instance, architecture) cell, ranked per
//! instance, and compared with the Quade test and Holm's procedure against
//! a control architecture.

use std::fmt::Write as _;
use std::path::Path;

use deepmemetic_core::stats::{
    box_summary, holm_posthoc, quade_test, rank_rows, BoxSummary, HolmRow, QuadeResult, RankTable, ResultMatrix,
    StatsError,
};

use crate::experiment::RunRecord;
use crate::io::{self, FileError};

pub const HOLM_FILE: &str = "holm.csv";
pub const RANKS_FILE: &str = "ranks.csv";
pub const QUADE_FILE: &str = "quade.csv";
pub const MEANS_FILE: &str = "means.csv";

/// Picks the architecture with the best mean rank as control.
pub const AUTO_CONTROL: &str = "best";

#[derive(Debug, thiserror::Error)]
pub enum AnalyzeError {
    #[error("incomplete grid, no successful runs for: {}", format_missing(.0))]
    IncompleteGrid(Vec<(String, String)>),
    #[error("unknown control architecture `{0}`")]
    UnknownControl(String),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    File(#[from] FileError),
}

fn format_missing(cells: &[(String, String)]) -> String {
    cells
        .iter()
        .map(|(a, i)| format!("{a} on {i}"))
        .collect::<Vec<_>>()
        .join(", ")
}

#[derive(Debug, Clone)]
pub struct Analysis {
    pub algorithms: Vec<String>,
    pub instances: Vec<String>,
    pub means: ResultMatrix,
    pub ranks: RankTable,
    /// `Err(Degenerate)` when every instance has zero range.
    pub quade: Result<QuadeResult, StatsError>,
    pub control: usize,
    pub alpha: f64,
    pub holm: Vec<HolmRow>,
    pub rank_summary: Vec<BoxSummary>,
}

fn first_seen<'a>(items: impl Iterator<Item = &'a str>) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for s in items {
        if !out.iter().any(|o| o == s) {
            out.push(s.to_string());
        }
    }
    out
}

/// Architectures, instances and the instance-by-architecture mean matrix.
pub type MeanGrid = (Vec<String>, Vec<String>, Vec<Vec<f64>>);

/// Per-instance mean best fitness of every architecture, in order of first
/// appearance. Failed runs are ignored.
pub fn mean_grid(records: &[RunRecord]) -> Result<MeanGrid, AnalyzeError> {
    let algorithms = first_seen(records.iter().map(|r| r.architecture.as_str()));
    let instances = first_seen(records.iter().map(|r| r.instance.as_str()));
    let mut sums = vec![vec![(0.0, 0usize); algorithms.len()]; instances.len()];
    for r in records.iter().filter(|r| r.is_ok()) {
        let Some(f) = r.best_fitness else { continue };
        let i = instances.iter().position(|x| *x == r.instance).expect("seen");
        let j = algorithms.iter().position(|x| *x == r.architecture).expect("seen");
        sums[i][j].0 += f64::from(f);
        sums[i][j].1 += 1;
    }
    let mut missing = Vec::new();
    for (i, row) in sums.iter().enumerate() {
        for (j, &(_, n)) in row.iter().enumerate() {
            if n == 0 {
                missing.push((algorithms[j].clone(), instances[i].clone()));
            }
        }
    }
    if !missing.is_empty() {
        return Err(AnalyzeError::IncompleteGrid(missing));
    }
    let grid = sums
        .into_iter()
        .map(|row| row.into_iter().map(|(s, n)| s / n as f64).collect())
        .collect();
    Ok((algorithms, instances, grid))
}

pub fn analyze(records: &[RunRecord], control: &str, alpha: f64) -> Result<Analysis, AnalyzeError> {
    let (algorithms, instances, grid) = mean_grid(records)?;
    let means = ResultMatrix::new(&grid)?;
    let ranks = rank_rows(&means);
    let control = if control == AUTO_CONTROL {
        let mr = ranks.mean_ranks();
        (0..mr.len()).fold(0, |best, j| if mr[j] < mr[best] { j } else { best })
    } else {
        algorithms
            .iter()
            .position(|a| a == control)
            .ok_or_else(|| AnalyzeError::UnknownControl(control.to_string()))?
    };
    let holm = holm_posthoc(&ranks, control, alpha)?;
    let rank_summary = (0..algorithms.len())
        .map(|j| box_summary(&ranks.column(j)).expect("at least two instances"))
        .collect();
    Ok(Analysis {
        quade: quade_test(&means),
        algorithms,
        instances,
        means,
        ranks,
        control,
        alpha,
        holm,
        rank_summary,
    })
}

impl Analysis {
    pub fn holm_csv(&self) -> String {
        let mut out = String::from("i,strategy,z,p,alpha_over_i,rejected\n");
        for r in &self.holm {
            let _ = writeln!(
                out,
                "{},{},{:.6},{:.6e},{:.6},{}",
                r.i,
                self.algorithms[r.algorithm],
                r.z,
                r.p,
                r.threshold,
                if r.rejected { "rejected" } else { "fail" }
            );
        }
        out
    }

    pub fn ranks_csv(&self) -> String {
        let mut out = String::from("strategy,mean_rank,min,q1,median,mean,q3,max,outliers\n");
        for (j, b) in self.rank_summary.iter().enumerate() {
            let outliers: Vec<String> = b.outliers.iter().map(|v| format!("{v}")).collect();
            let _ = writeln!(
                out,
                "{},{:.4},{},{},{},{:.4},{},{},{}",
                self.algorithms[j],
                self.ranks.mean_ranks()[j],
                b.min,
                b.q1,
                b.median,
                b.mean,
                b.q3,
                b.max,
                outliers.join(";")
            );
        }
        out
    }

    pub fn quade_csv(&self) -> String {
        match &self.quade {
            Ok(q) => format!(
                "statistic,p_value,df1,df2\n{},{:e},{},{}\n",
                q.statistic, q.p_value, q.df1, q.df2
            ),
            Err(e) => format!("statistic,p_value,df1,df2\n,,,\n# {e}\n"),
        }
    }

    pub fn means_csv(&self) -> String {
        let mut out = String::from("instance");
        for a in &self.algorithms {
            out.push(',');
            out.push_str(a);
        }
        out.push('\n');
        for (i, inst) in self.instances.iter().enumerate() {
            out.push_str(inst);
            for v in self.means.row(i) {
                let _ = write!(out, ",{v:.4}");
            }
            out.push('\n');
        }
        out
    }

    /// Writes the four CSV files into `dir`.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<(), FileError> {
        let dir = dir.as_ref();
        io::write(&dir.join(HOLM_FILE), &self.holm_csv())?;
        io::write(&dir.join(RANKS_FILE), &self.ranks_csv())?;
        io::write(&dir.join(QUADE_FILE), &self.quade_csv())?;
        io::write(&dir.join(MEANS_FILE), &self.means_csv())
    }
}
