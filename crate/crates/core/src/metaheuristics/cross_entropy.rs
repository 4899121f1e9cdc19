use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use super::{Ctx, Params, Scored};
use crate::evaluator::JobSequence;
use crate::rng::{rng_from_seed, SearchRng};

/// Position-by-job probability matrix; row `k` is the distribution of the
/// job placed at position `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct PmfMatrix {
    n: usize,
    probs: Vec<f64>,
}

impl PmfMatrix {
    pub fn uniform(n: usize) -> Self {
        Self {
            n,
            probs: vec![1.0 / n as f64; n * n],
        }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn row(&self, position: usize) -> &[f64] {
        &self.probs[position * self.n..(position + 1) * self.n]
    }

    /// Fills positions left to right; each job is drawn from its row
    /// restricted to unused jobs and renormalized.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, scratch: &mut Vec<usize>) -> JobSequence {
        let n = self.n;
        scratch.clear();
        scratch.extend(0..n);
        let mut order = Vec::with_capacity(n);
        for k in 0..n {
            let row = self.row(k);
            let total: f64 = scratch.iter().map(|&j| row[j]).sum();
            let mut u = rng.gen::<f64>() * total;
            let mut pick = scratch.len() - 1;
            for (idx, &j) in scratch.iter().enumerate() {
                u -= row[j];
                if u < 0.0 {
                    pick = idx;
                    break;
                }
            }
            order.push(scratch.swap_remove(pick));
        }
        JobSequence::from_vec_unchecked(order)
    }

    /// Smoothed update towards the elite position frequencies, floored and
    /// renormalized per row.
    pub fn update(&mut self, elites: &[&JobSequence], alpha: f64, floor: f64) {
        if elites.is_empty() {
            return;
        }
        let n = self.n;
        let weight = alpha / elites.len() as f64;
        for p in &mut self.probs {
            *p *= 1.0 - alpha;
        }
        for e in elites {
            for (k, &job) in e.as_slice().iter().enumerate() {
                self.probs[k * n + job] += weight;
            }
        }
        for row in self.probs.chunks_mut(n) {
            for p in row.iter_mut() {
                *p = p.max(floor);
            }
            let sum: f64 = row.iter().sum();
            for p in row.iter_mut() {
                *p /= sum;
            }
        }
    }
}

#[derive(Debug, Clone)]
struct Generator {
    pmf: PmfMatrix,
    rng: SearchRng,
    samples: Vec<Scored>,
    per_iteration: usize,
    elites: usize,
}

/// Cross-entropy search with one or more independent probability matrices.
///
/// Each matrix draws its share of the `n^2` samples per iteration, keeps the
/// best `ceil(rho * share)` as elites and updates itself from them only.
/// Matrices take turns; an unfinished batch resumes on the next call.
#[derive(Debug, Clone)]
pub struct CrossEntropy {
    generators: Vec<Generator>,
    active: usize,
    alpha: f64,
    floor: f64,
    placeholder: JobSequence,
    iterations: u64,
    scratch: Vec<usize>,
}

fn elite_count(rho: f64, samples: usize) -> usize {
    // tolerance keeps e.g. 0.01 * 900 from rounding up to 10
    (libm::ceil(rho * samples as f64 - 1e-9) as usize).clamp(1, samples)
}

impl CrossEntropy {
    pub(crate) fn new(n: usize, params: &Params, seeds: &[u64], placeholder: JobSequence) -> Self {
        let per_iteration = ((n * n) / seeds.len()).max(1);
        let elites = elite_count(params.ce_rho, per_iteration);
        let generators = seeds
            .iter()
            .map(|&s| Generator {
                pmf: PmfMatrix::uniform(n),
                rng: rng_from_seed(s),
                samples: Vec::with_capacity(per_iteration),
                per_iteration,
                elites,
            })
            .collect();
        Self {
            generators,
            active: 0,
            alpha: params.ce_alpha,
            floor: params.ce_floor,
            placeholder,
            iterations: 0,
            scratch: Vec::new(),
        }
    }

    pub(crate) fn placeholder(&self) -> &JobSequence {
        &self.placeholder
    }

    pub fn matrices(&self) -> impl Iterator<Item = &PmfMatrix> {
        self.generators.iter().map(|g| &g.pmf)
    }

    pub fn samples_per_iteration(&self) -> usize {
        self.generators[0].per_iteration
    }

    pub fn elites_per_iteration(&self) -> usize {
        self.generators[0].elites
    }

    /// Completed matrix updates.
    pub fn iterations(&self) -> u64 {
        self.iterations
    }

    pub(crate) fn run(&mut self, ctx: &mut Ctx<'_>) {
        while !ctx.exhausted() {
            let g = &mut self.generators[self.active];
            let seq = g.pmf.sample(&mut g.rng, &mut self.scratch);
            let Some(fitness) = ctx.eval(&seq) else { return };
            g.samples.push(Scored { seq, fitness });
            if g.samples.len() < g.per_iteration {
                continue;
            }
            g.samples.sort_by_key(|s| s.fitness);
            let elites: Vec<&JobSequence> = g.samples[..g.elites].iter().map(|s| &s.seq).collect();
            g.pmf.update(&elites, self.alpha, self.floor);
            g.samples.clear();
            self.iterations += 1;
            self.active = (self.active + 1) % self.generators.len();
        }
    }
}
