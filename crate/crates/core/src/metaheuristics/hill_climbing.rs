use rand::Rng;

use super::{Ctx, Params, Scored};
use crate::evaluator::JobSequence;
use crate::operators::random_pair;

/// Outcome of a step in which no sampled neighbor improved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Stagnation {
    pub current: u32,
    pub best_neighbor: u32,
}

/// Sampled-neighborhood hill climber over swap moves.
///
/// Each step samples `factor * n` random swap neighbors of the current
/// solution and moves to the best one if it strictly improves. Otherwise the
/// search has stagnated: it restarts from a fresh random permutation, or
/// stops when used as a bounded local search.
#[derive(Debug, Clone)]
pub struct HillClimber {
    n: usize,
    round_size: usize,
    start: JobSequence,
    current: Option<Scored>,
    sampled: usize,
    round_best: Option<(usize, usize, u32)>,
    restart: bool,
    stopped: bool,
    stagnations: u64,
    last_stagnation: Option<Stagnation>,
}

impl HillClimber {
    pub(crate) fn new(n: usize, params: &Params, start: JobSequence, restart: bool) -> Self {
        Self {
            n,
            round_size: (params.neighborhood_factor * n).max(1),
            start,
            current: None,
            sampled: 0,
            round_best: None,
            restart,
            stopped: false,
            stagnations: 0,
            last_stagnation: None,
        }
    }

    /// Bounded local search from an evaluated solution; stops at stagnation.
    pub(crate) fn local_search(n: usize, params: &Params, from: Scored) -> Self {
        let mut hc = Self::new(n, params, from.seq.clone(), false);
        hc.current = Some(from);
        hc
    }

    pub(crate) fn start_point(&self) -> &JobSequence {
        &self.start
    }

    pub(crate) fn restart_from(&mut self, from: Scored) {
        self.start = from.seq.clone();
        self.current = Some(from);
        self.sampled = 0;
        self.round_best = None;
        self.stopped = false;
    }

    pub fn current(&self) -> Option<&Scored> {
        self.current.as_ref()
    }

    pub fn stagnations(&self) -> u64 {
        self.stagnations
    }

    pub fn last_stagnation(&self) -> Option<Stagnation> {
        self.last_stagnation
    }

    pub fn is_stopped(&self) -> bool {
        self.stopped
    }

    pub(crate) fn run<R: Rng + ?Sized>(&mut self, ctx: &mut Ctx<'_>, rng: &mut R) {
        while !self.stopped && !ctx.exhausted() {
            let Some(cur) = self.current.as_mut() else {
                let Some(f) = ctx.eval(&self.start) else { return };
                self.current = Some(Scored {
                    seq: self.start.clone(),
                    fitness: f,
                });
                continue;
            };
            if self.n < 2 {
                self.stopped = true;
                return;
            }
            let (i, j) = random_pair(self.n, rng);
            cur.seq.swap(i, j);
            let f = ctx.eval(&cur.seq);
            cur.seq.swap(i, j);
            let Some(f) = f else { return };
            if self.round_best.is_none_or(|(_, _, b)| f < b) {
                self.round_best = Some((i, j, f));
            }
            self.sampled += 1;
            if self.sampled < self.round_size {
                continue;
            }
            let (bi, bj, bf) = self.round_best.take().expect("round sampled");
            self.sampled = 0;
            if bf < cur.fitness {
                cur.seq.swap(bi, bj);
                cur.fitness = bf;
            } else {
                self.stagnations += 1;
                self.last_stagnation = Some(Stagnation {
                    current: cur.fitness,
                    best_neighbor: bf,
                });
                if self.restart {
                    self.start = JobSequence::random(self.n, rng);
                    self.current = None;
                } else {
                    self.stopped = true;
                }
            }
        }
    }

    /// Best solution of a local-search run (the current point never worsens).
    pub(crate) fn result(&self) -> Option<&Scored> {
        self.current.as_ref()
    }
}
