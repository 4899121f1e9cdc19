//! ToSP instances, benchmark families and the plain-text instance format.
//!
//! An instance is a magazine capacity `C` plus an `m x n` binary matrix
//! whose entry `(tool, job)` is set when `job` needs `tool`. The text format
//! is:
//!
//! ```text
//! # optional comments, anywhere after a '#'
//! n m C
//! <m lines of n space-separated 0/1 digits>
//! ```
//!
//! A `# name: <label>` comment carries the instance label; without it the
//! label defaults to the `CzNxM` convention (e.g. `4z10x9`).

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write as _;

use rand::seq::index;
use rand::Rng;

use crate::rng::rng_from_seed;

/// Resampling rounds before a family is declared infeasible.
pub const MAX_RESAMPLE_ROUNDS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum InstanceError {
    #[error("instance needs at least one job and one tool")]
    Empty,
    #[error("capacity {capacity} must be below the number of tools {tools}")]
    CapacityNotBelowTools { capacity: usize, tools: usize },
    #[error("job {job} needs {needed} tools, magazine holds {capacity}")]
    JobOverCapacity {
        job: usize,
        needed: usize,
        capacity: usize,
    },
    #[error("job {job} requires no tool")]
    JobWithoutTools { job: usize },
    #[error("tool index {tool} out of range for {tools} tools")]
    ToolOutOfRange { tool: usize, tools: usize },
    #[error("requirement matrix row {row} has {found} entries, expected {expected}")]
    RaggedMatrix {
        row: usize,
        found: usize,
        expected: usize,
    },
    #[error("invalid family: {0}")]
    InvalidFamily(&'static str),
    #[error("family {label} infeasible: constraints unmet after {rounds} resampling rounds")]
    InfeasibleFamily { label: String, rounds: usize },
}

/// A uniform ToSP instance `<C, A>`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    n: usize,
    m: usize,
    capacity: usize,
    /// Row-major `m x n`: `requirements[tool * n + job]`.
    requirements: Vec<bool>,
    /// Sorted tool indices per job, derived from `requirements`.
    job_tools: Vec<Vec<usize>>,
    label: String,
}

impl Instance {
    /// Builds an instance from matrix rows (one row per tool).
    pub fn from_rows(
        capacity: usize,
        rows: &[Vec<bool>],
        label: Option<String>,
    ) -> Result<Self, InstanceError> {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        if m == 0 || n == 0 {
            return Err(InstanceError::Empty);
        }
        let mut requirements = Vec::with_capacity(m * n);
        for (row, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(InstanceError::RaggedMatrix {
                    row,
                    found: r.len(),
                    expected: n,
                });
            }
            requirements.extend_from_slice(r);
        }
        Self::build(n, m, capacity, requirements, label)
    }

    /// Builds an instance from per-job tool lists over `m` tools.
    pub fn from_job_tools(
        m: usize,
        capacity: usize,
        jobs: &[Vec<usize>],
        label: Option<String>,
    ) -> Result<Self, InstanceError> {
        let n = jobs.len();
        if m == 0 || n == 0 {
            return Err(InstanceError::Empty);
        }
        let mut requirements = vec![false; m * n];
        for (job, tools) in jobs.iter().enumerate() {
            for &tool in tools {
                if tool >= m {
                    return Err(InstanceError::ToolOutOfRange { tool, tools: m });
                }
                requirements[tool * n + job] = true;
            }
        }
        Self::build(n, m, capacity, requirements, label)
    }

    fn build(
        n: usize,
        m: usize,
        capacity: usize,
        requirements: Vec<bool>,
        label: Option<String>,
    ) -> Result<Self, InstanceError> {
        if capacity >= m {
            return Err(InstanceError::CapacityNotBelowTools { capacity, tools: m });
        }
        let job_tools: Vec<Vec<usize>> = (0..n)
            .map(|j| (0..m).filter(|&t| requirements[t * n + j]).collect())
            .collect();
        for (job, tools) in job_tools.iter().enumerate() {
            if tools.is_empty() {
                return Err(InstanceError::JobWithoutTools { job });
            }
            if tools.len() > capacity {
                return Err(InstanceError::JobOverCapacity {
                    job,
                    needed: tools.len(),
                    capacity,
                });
            }
        }
        let label = label.unwrap_or_else(|| canonical_label(capacity, n, m));
        Ok(Self {
            n,
            m,
            capacity,
            requirements,
            job_tools,
            label,
        })
    }

    pub fn jobs(&self) -> usize {
        self.n
    }

    pub fn tools(&self) -> usize {
        self.m
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    #[inline]
    pub fn requires(&self, tool: usize, job: usize) -> bool {
        self.requirements[tool * self.n + job]
    }

    /// Sorted tools needed by `job`.
    #[inline]
    pub fn job_tools(&self, job: usize) -> &[usize] {
        &self.job_tools[job]
    }

    pub fn row(&self, tool: usize) -> &[bool] {
        &self.requirements[tool * self.n..(tool + 1) * self.n]
    }

    /// Renders the instance in the text format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# name: {}", self.label);
        let _ = writeln!(out, "{} {} {}", self.n, self.m, self.capacity);
        for tool in 0..self.m {
            let mut first = true;
            for &bit in self.row(tool) {
                if !first {
                    out.push(' ');
                }
                out.push(if bit { '1' } else { '0' });
                first = false;
            }
            out.push('\n');
        }
        out
    }

    /// Parses the text format.
    pub fn from_text(text: &str) -> Result<Self, ParseError> {
        parse_text(text)
    }
}

/// `CzNxM`, e.g. `4z10x9` for capacity 4, 10 jobs, 9 tools.
pub fn canonical_label(capacity: usize, n: usize, m: usize) -> String {
    format!("{capacity}z{n}x{m}")
}

/// A benchmark family: dimensions plus per-job tool-count bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct InstanceFamily {
    pub n: usize,
    pub m: usize,
    pub capacity: usize,
    pub min_tools: usize,
    pub max_tools: usize,
}

impl InstanceFamily {
    pub const fn new(capacity: usize, n: usize, m: usize, min_tools: usize, max_tools: usize) -> Self {
        Self {
            n,
            m,
            capacity,
            min_tools,
            max_tools,
        }
    }

    pub fn label(&self) -> String {
        canonical_label(self.capacity, self.n, self.m)
    }

    pub fn validate(&self) -> Result<(), InstanceError> {
        if self.n == 0 || self.m == 0 || self.capacity == 0 {
            return Err(InstanceError::InvalidFamily("n, m and capacity must be positive"));
        }
        if self.capacity >= self.m {
            return Err(InstanceError::CapacityNotBelowTools {
                capacity: self.capacity,
                tools: self.m,
            });
        }
        if self.min_tools == 0 {
            return Err(InstanceError::InvalidFamily("every job needs at least one tool"));
        }
        if self.min_tools > self.max_tools || self.max_tools > self.capacity {
            return Err(InstanceError::InvalidFamily(
                "tool bounds must satisfy min <= max <= capacity",
            ));
        }
        Ok(())
    }

    /// Looks up one of the sixteen benchmark families by label.
    pub fn benchmark(label: &str) -> Option<Self> {
        BENCHMARK_FAMILIES.iter().copied().find(|f| f.label() == label)
    }
}

/// The sixteen benchmark families: `(C, n, m, min, max)`.
pub const BENCHMARK_FAMILIES: [InstanceFamily; 16] = [
    InstanceFamily::new(4, 10, 9, 2, 4),
    InstanceFamily::new(4, 10, 10, 2, 4),
    InstanceFamily::new(6, 10, 15, 3, 6),
    InstanceFamily::new(6, 15, 12, 3, 6),
    InstanceFamily::new(6, 15, 20, 3, 6),
    InstanceFamily::new(8, 20, 15, 3, 8),
    InstanceFamily::new(8, 20, 16, 3, 8),
    InstanceFamily::new(10, 20, 20, 4, 10),
    InstanceFamily::new(10, 30, 25, 4, 10),
    InstanceFamily::new(15, 30, 40, 6, 15),
    InstanceFamily::new(15, 40, 30, 6, 15),
    InstanceFamily::new(20, 40, 60, 7, 20),
    InstanceFamily::new(24, 20, 30, 9, 24),
    InstanceFamily::new(24, 20, 36, 9, 24),
    InstanceFamily::new(25, 50, 40, 9, 20),
    InstanceFamily::new(30, 20, 40, 11, 30),
];

/// Tool set of one job as a bitmask over `m` tools.
#[derive(Clone, PartialEq, Eq)]
struct ToolMask(Vec<u64>);

impl ToolMask {
    fn new(m: usize, tools: &[usize]) -> Self {
        let mut words = vec![0u64; m.div_ceil(64)];
        for &t in tools {
            words[t / 64] |= 1 << (t % 64);
        }
        Self(words)
    }

    fn is_subset_of(&self, other: &Self) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a & !b == 0)
    }
}

fn sample_job<R: Rng + ?Sized>(family: &InstanceFamily, rng: &mut R) -> Vec<usize> {
    let count = rng.gen_range(family.min_tools..=family.max_tools);
    let mut tools = index::sample(rng, family.m, count).into_vec();
    tools.sort_unstable();
    tools
}

/// Jobs whose tool set is covered by another job's. For identical sets only
/// the later job is reported, so one resample can break the tie.
fn covered_jobs(masks: &[ToolMask]) -> Vec<usize> {
    let mut out = Vec::new();
    'job: for (a, ma) in masks.iter().enumerate() {
        for (b, mb) in masks.iter().enumerate() {
            if a == b || !ma.is_subset_of(mb) {
                continue;
            }
            if ma == mb && a < b {
                continue;
            }
            out.push(a);
            continue 'job;
        }
    }
    out
}

/// Random dataset for `family`: per-job tool counts uniform on
/// `[min_tools, max_tools]`, tools drawn without replacement, no job covered
/// by another, every tool used. Offending jobs are resampled in place.
pub fn generate_dataset(family: &InstanceFamily, seed: u64) -> Result<Instance, InstanceError> {
    family.validate()?;
    let mut rng = rng_from_seed(seed);
    let mut jobs: Vec<Vec<usize>> = (0..family.n).map(|_| sample_job(family, &mut rng)).collect();
    let mut masks: Vec<ToolMask> = jobs.iter().map(|t| ToolMask::new(family.m, t)).collect();

    for _ in 0..MAX_RESAMPLE_ROUNDS {
        let covered = covered_jobs(&masks);
        let redo: Vec<usize> = if !covered.is_empty() {
            covered
        } else {
            let mut used = vec![false; family.m];
            for t in jobs.iter().flatten() {
                used[*t] = true;
            }
            if used.iter().all(|&u| u) {
                return Instance::from_job_tools(family.m, family.capacity, &jobs, Some(family.label()));
            }
            vec![rng.gen_range(0..family.n)]
        };
        for j in redo {
            jobs[j] = sample_job(family, &mut rng);
            masks[j] = ToolMask::new(family.m, &jobs[j]);
        }
    }
    Err(InstanceError::InfeasibleFamily {
        label: family.label(),
        rounds: MAX_RESAMPLE_ROUNDS,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("header declares {expected} tool rows, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("line {line}: row has {found} entries, header declares {expected} jobs")]
    RowLength {
        line: usize,
        found: usize,
        expected: usize,
    },
    #[error(transparent)]
    Invalid(#[from] InstanceError),
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        line,
        column,
        message: message.into(),
    }
}

fn parse_text(text: &str) -> Result<Instance, ParseError> {
    let mut label = None;
    let mut header: Option<(usize, usize, usize)> = None;
    let mut rows: Vec<Vec<bool>> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let (content, comment) = match raw.find('#') {
            Some(pos) => (&raw[..pos], Some(&raw[pos + 1..])),
            None => (raw, None),
        };
        if let Some(name) = comment.and_then(|c| c.trim().strip_prefix("name:")) {
            label = Some(String::from(name.trim()));
        }
        let mut tokens = Vec::new();
        let mut rest = content;
        let mut offset = 0;
        while let Some(start) = rest.find(|c: char| !c.is_whitespace()) {
            let tail = &rest[start..];
            let len = tail.find(char::is_whitespace).unwrap_or(tail.len());
            tokens.push((offset + start + 1, &tail[..len]));
            offset += start + len;
            rest = &tail[len..];
        }
        if tokens.is_empty() {
            continue;
        }
        match header {
            None => {
                if tokens.len() != 3 {
                    return Err(syntax(line_no, tokens[0].0, "header must be `n m C`"));
                }
                let mut dims = [0usize; 3];
                for (slot, (col, tok)) in dims.iter_mut().zip(&tokens) {
                    *slot = tok
                        .parse()
                        .map_err(|_| syntax(line_no, *col, format!("expected a positive integer, found `{tok}`")))?;
                }
                header = Some((dims[0], dims[1], dims[2]));
            }
            Some((n, m, _)) => {
                if rows.len() == m {
                    return Err(ParseError::DimensionMismatch {
                        expected: m,
                        found: m + 1,
                    });
                }
                if tokens.len() != n {
                    return Err(ParseError::RowLength {
                        line: line_no,
                        found: tokens.len(),
                        expected: n,
                    });
                }
                let mut row = Vec::with_capacity(n);
                for (col, tok) in tokens {
                    row.push(match tok {
                        "0" => false,
                        "1" => true,
                        _ => return Err(syntax(line_no, col, format!("expected 0 or 1, found `{tok}`"))),
                    });
                }
                rows.push(row);
            }
        }
    }

    let (n, m, capacity) = header.ok_or_else(|| syntax(1, 1, "missing `n m C` header"))?;
    if rows.len() != m {
        return Err(ParseError::DimensionMismatch {
            expected: m,
            found: rows.len(),
        });
    }
    if n == 0 {
        return Err(InstanceError::Empty.into());
    }
    Ok(Instance::from_rows(capacity, &rows, label)?)
}
