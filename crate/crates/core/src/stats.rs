//! Rank-based comparison of several algorithms over several instances:
//! per-instance ranking, the Quade omnibus test and the Holm step-down
//! procedure against a control algorithm.

use alloc::vec;
use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StatsError {
    #[error("need at least 2 instances and 2 algorithms, got {instances}x{algorithms}")]
    TooSmall { instances: usize, algorithms: usize },
    #[error("row {row} has {found} values, expected {expected}")]
    Ragged { row: usize, found: usize, expected: usize },
    #[error("value at row {row}, column {column} is not finite")]
    NonFinite { row: usize, column: usize },
    #[error("every instance has zero range; the Quade statistic is undefined")]
    Degenerate,
    #[error("control index {control} out of range for {algorithms} algorithms")]
    Control { control: usize, algorithms: usize },
    #[error("alpha must lie in (0, 1), got {0}")]
    Alpha(f64),
}

/// `values[i][j]`: result of algorithm `j` on instance `i` (lower is better).
#[derive(Debug, Clone, PartialEq)]
pub struct ResultMatrix {
    instances: usize,
    algorithms: usize,
    values: Vec<f64>,
}

impl ResultMatrix {
    pub fn new(rows: &[Vec<f64>]) -> Result<Self, StatsError> {
        let algorithms = rows.first().map_or(0, Vec::len);
        if rows.len() < 2 || algorithms < 2 {
            return Err(StatsError::TooSmall {
                instances: rows.len(),
                algorithms,
            });
        }
        let mut values = Vec::with_capacity(rows.len() * algorithms);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != algorithms {
                return Err(StatsError::Ragged {
                    row: i,
                    found: row.len(),
                    expected: algorithms,
                });
            }
            if let Some(j) = row.iter().position(|v| !v.is_finite()) {
                return Err(StatsError::NonFinite { row: i, column: j });
            }
            values.extend_from_slice(row);
        }
        Ok(Self {
            instances: rows.len(),
            algorithms,
            values,
        })
    }

    pub fn instances(&self) -> usize {
        self.instances
    }

    pub fn algorithms(&self) -> usize {
        self.algorithms
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.algorithms..(i + 1) * self.algorithms]
    }
}

/// Ranks 1..=n in ascending order of value; ties share the average rank.
pub fn rank_values(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // positions start+1 ..= end share their mean
        let rank = (start + 1 + end) as f64 / 2.0;
        for &idx in &order[start..end] {
            ranks[idx] = rank;
        }
        start = end;
    }
    ranks
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankTable {
    instances: usize,
    algorithms: usize,
    ranks: Vec<f64>,
    mean: Vec<f64>,
}

impl RankTable {
    pub fn instances(&self) -> usize {
        self.instances
    }

    pub fn algorithms(&self) -> usize {
        self.algorithms
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.ranks[i * self.algorithms..(i + 1) * self.algorithms]
    }

    /// Ranks of algorithm `j` across all instances.
    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.instances).map(|i| self.row(i)[j]).collect()
    }

    pub fn mean_ranks(&self) -> &[f64] {
        &self.mean
    }
}

pub fn rank_rows(m: &ResultMatrix) -> RankTable {
    let (n, k) = (m.instances, m.algorithms);
    let mut ranks = Vec::with_capacity(n * k);
    for i in 0..n {
        ranks.extend(rank_values(m.row(i)));
    }
    let mean = (0..k)
        .map(|j| (0..n).map(|i| ranks[i * k + j]).sum::<f64>() / n as f64)
        .collect();
    RankTable {
        instances: n,
        algorithms: k,
        ranks,
        mean,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadeResult {
    pub statistic: f64,
    pub p_value: f64,
    pub df1: f64,
    pub df2: f64,
}

/// Quade test. Instances are weighted by the rank of their sample range and
/// the statistic is compared with F(k-1, (N-1)(k-1)).
pub fn quade_test(m: &ResultMatrix) -> Result<QuadeResult, StatsError> {
    let (n, k) = (m.instances, m.algorithms);
    let ranges: Vec<f64> = (0..n)
        .map(|i| {
            let row = m.row(i);
            let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let min = row.iter().copied().fold(f64::INFINITY, f64::min);
            max - min
        })
        .collect();
    if ranges.iter().all(|&r| r == 0.0) {
        return Err(StatsError::Degenerate);
    }
    let q = rank_values(&ranges);
    let center = (k as f64 + 1.0) / 2.0;
    let mut a = 0.0;
    let mut col = vec![0.0; k];
    for (i, &qi) in q.iter().enumerate() {
        for (j, r) in rank_values(m.row(i)).into_iter().enumerate() {
            let s = qi * (r - center);
            a += s * s;
            col[j] += s;
        }
    }
    let b = col.iter().map(|s| s * s).sum::<f64>() / n as f64;
    let df1 = (k - 1) as f64;
    let df2 = ((n - 1) * (k - 1)) as f64;
    let (statistic, p_value) = if a - b <= 0.0 {
        (f64::INFINITY, 0.0)
    } else {
        let f = (n as f64 - 1.0) * b / (a - b);
        (f, f_sf(f, df1, df2))
    };
    Ok(QuadeResult {
        statistic,
        p_value,
        df1,
        df2,
    })
}

/// One comparison against the control, in Holm order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolmRow {
    /// Step index: the first (smallest p) row has `i = K`, the last `i = 1`.
    pub i: usize,
    pub algorithm: usize,
    pub z: f64,
    pub p: f64,
    pub threshold: f64,
    pub rejected: bool,
}

/// Standardized mean-rank difference of `j` against `control`.
pub fn rank_z(rt: &RankTable, j: usize, control: usize) -> f64 {
    let k = rt.algorithms as f64;
    let se = libm::sqrt(k * (k + 1.0) / (6.0 * rt.instances as f64));
    (rt.mean[j] - rt.mean[control]) / se
}

/// Holm step-down thresholds over raw p-values. Returns, for each input in
/// ascending-p order, `(index, alpha / i, rejected)`; rejection stops at the
/// first failure.
pub fn holm_steps(p_values: &[f64], alpha: f64) -> Vec<(usize, f64, bool)> {
    let mut order: Vec<usize> = (0..p_values.len()).collect();
    order.sort_by(|&a, &b| p_values[a].total_cmp(&p_values[b]).then(a.cmp(&b)));
    let total = order.len();
    let mut still = true;
    order
        .into_iter()
        .enumerate()
        .map(|(r, idx)| {
            let threshold = alpha / (total - r) as f64;
            still = still && p_values[idx] < threshold;
            (idx, threshold, still)
        })
        .collect()
}

/// Holm post-hoc comparison of every algorithm against `control`, with
/// one-sided p-values (control hypothesized better).
pub fn holm_posthoc(rt: &RankTable, control: usize, alpha: f64) -> Result<Vec<HolmRow>, StatsError> {
    if control >= rt.algorithms {
        return Err(StatsError::Control {
            control,
            algorithms: rt.algorithms,
        });
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(StatsError::Alpha(alpha));
    }
    let others: Vec<usize> = (0..rt.algorithms).filter(|&j| j != control).collect();
    let z: Vec<f64> = others.iter().map(|&j| rank_z(rt, j, control)).collect();
    let p: Vec<f64> = z.iter().map(|&z| normal_sf(z)).collect();
    let total = others.len();
    Ok(holm_steps(&p, alpha)
        .into_iter()
        .enumerate()
        .map(|(r, (idx, threshold, rejected))| HolmRow {
            i: total - r,
            algorithm: others[idx],
            z: z[idx],
            p: p[idx],
            threshold,
            rejected,
        })
        .collect())
}

/// Upper tail of the standard normal distribution.
pub fn normal_sf(z: f64) -> f64 {
    0.5 * libm::erfc(z / core::f64::consts::SQRT_2)
}

/// Upper tail of the F distribution with `d1`, `d2` degrees of freedom.
pub fn f_sf(x: f64, d1: f64, d2: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x.is_infinite() {
        return 0.0;
    }
    incomplete_beta(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * x))
}

/// Regularized incomplete beta function `I_x(a, b)`.
pub fn incomplete_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = libm::lgamma(a + b) - libm::lgamma(a) - libm::lgamma(b) + a * libm::log(x) + b * libm::log1p(-x);
    let front = libm::exp(ln_front);
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_fraction(a, b, x) / a
    } else {
        1.0 - front * beta_fraction(b, a, 1.0 - x) / b
    }
}

/// Continued fraction for the incomplete beta, modified Lentz method.
fn beta_fraction(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-16;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..10_000 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let step = d * c;
        h *= step;
        if (step - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Box-plot statistics with whiskers at 1.5 times the inter-quartile range.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxSummary {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub mean: f64,
    pub q3: f64,
    pub max: f64,
    pub outliers: Vec<f64>,
}

/// Quantile with linear interpolation between order statistics
/// (`h = (n - 1) p`). `sorted` must be ascending and non-empty.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = libm::floor(h) as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// `None` for an empty sample.
pub fn box_summary(values: &[f64]) -> Option<BoxSummary> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let q1 = quantile(&sorted, 0.25);
    let q3 = quantile(&sorted, 0.75);
    let iqr = q3 - q1;
    let (lo, hi) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
    Some(BoxSummary {
        min: sorted[0],
        q1,
        median: quantile(&sorted, 0.5),
        mean: sorted.iter().sum::<f64>() / sorted.len() as f64,
        q3,
        max: sorted[sorted.len() - 1],
        outliers: sorted.iter().copied().filter(|&v| v < lo || v > hi).collect(),
    })
}
