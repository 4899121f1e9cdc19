use alloc::collections::VecDeque;

use rand::Rng;

use super::{Ctx, Params, Scored};
use crate::evaluator::JobSequence;
use crate::operators::random_pair;

/// Tabu search over sampled swap moves.
///
/// Tenure is `ceil(n/2)` position pairs kept in FIFO order. A tabu move is
/// admissible only when it beats the best solution this search has seen.
#[derive(Debug, Clone)]
pub struct TabuSearch {
    n: usize,
    round_size: usize,
    tenure: usize,
    start: JobSequence,
    current: Option<Scored>,
    best: Option<Scored>,
    tabu: VecDeque<(usize, usize)>,
    sampled: usize,
    round_best: Option<(usize, usize, u32)>,
}

impl TabuSearch {
    pub(crate) fn new(n: usize, params: &Params, start: JobSequence) -> Self {
        Self {
            n,
            round_size: (params.neighborhood_factor * n).max(1),
            tenure: n.div_ceil(2),
            start,
            current: None,
            best: None,
            tabu: VecDeque::new(),
            sampled: 0,
            round_best: None,
        }
    }

    pub(crate) fn local_search(n: usize, params: &Params, from: Scored) -> Self {
        let mut ts = Self::new(n, params, from.seq.clone());
        ts.best = Some(from.clone());
        ts.current = Some(from);
        ts
    }

    pub(crate) fn start_point(&self) -> &JobSequence {
        &self.start
    }

    pub(crate) fn restart_from(&mut self, from: Scored) {
        self.start = from.seq.clone();
        if self.best.as_ref().is_none_or(|b| from.fitness < b.fitness) {
            self.best = Some(from.clone());
        }
        self.current = Some(from);
        self.sampled = 0;
        self.round_best = None;
    }

    pub fn tenure(&self) -> usize {
        self.tenure
    }

    pub fn tabu_list(&self) -> impl Iterator<Item = &(usize, usize)> {
        self.tabu.iter()
    }

    pub(crate) fn result(&self) -> Option<&Scored> {
        self.best.as_ref()
    }

    pub(crate) fn run<R: Rng + ?Sized>(&mut self, ctx: &mut Ctx<'_>, rng: &mut R) {
        while !ctx.exhausted() {
            let Some(cur) = self.current.as_mut() else {
                let Some(f) = ctx.eval(&self.start) else { return };
                let s = Scored {
                    seq: self.start.clone(),
                    fitness: f,
                };
                self.best = Some(s.clone());
                self.current = Some(s);
                continue;
            };
            if self.n < 2 {
                return;
            }
            let (i, j) = random_pair(self.n, rng);
            cur.seq.swap(i, j);
            let f = ctx.eval(&cur.seq);
            cur.seq.swap(i, j);
            let Some(f) = f else { return };
            let best = self.best.as_ref().map_or(u32::MAX, |b| b.fitness);
            let admissible = f < best || !self.tabu.contains(&(i, j));
            if admissible && self.round_best.is_none_or(|(_, _, b)| f < b) {
                self.round_best = Some((i, j, f));
            }
            self.sampled += 1;
            if self.sampled < self.round_size {
                continue;
            }
            self.sampled = 0;
            if let Some((bi, bj, bf)) = self.round_best.take() {
                cur.seq.swap(bi, bj);
                cur.fitness = bf;
                self.tabu.push_back((bi, bj));
                while self.tabu.len() > self.tenure {
                    self.tabu.pop_front();
                }
                if bf < best {
                    self.best = Some(cur.clone());
                }
            }
        }
    }
}
