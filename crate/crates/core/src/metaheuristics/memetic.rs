use alloc::vec::Vec;

use rand::Rng;

use super::{fitness_key, Ctx, HillClimber, Member, Params, Scored, TabuSearch};
use crate::evaluator::{EvalBudget, JobSequence};
use crate::operators::{apx_crossover, binary_tournament_index, default_mutation_rate, mutate_in_place};

#[derive(Debug, Clone)]
enum LocalSearch {
    Hc(HillClimber),
    Ts(TabuSearch),
}

#[derive(Debug, Clone)]
struct PendingSearch {
    search: LocalSearch,
    used: u64,
}

/// Elitist generational memetic algorithm.
///
/// Parents come from binary tournaments, children from APX crossover and a
/// block-swap mutation. With probability `ls_probability` a child is refined
/// by HC (until stagnation) or TS, for at most `ls_evals` evaluations, and
/// the refined genotype replaces it. A generation is `population - 1`
/// children plus the best parent.
#[derive(Debug, Clone)]
pub struct Memetic {
    n: usize,
    population: Vec<Member>,
    offspring: Vec<Scored>,
    pending: Option<PendingSearch>,
    tabu: bool,
    params: Params,
    mutation_rate: f64,
    generations: u64,
    local_searches: u64,
}

impl Memetic {
    pub(crate) fn new<R: Rng + ?Sized>(n: usize, params: &Params, tabu: bool, rng: &mut R) -> Self {
        let size = params.population.max(2);
        let population = (0..size)
            .map(|_| Member {
                seq: JobSequence::random(n, rng),
                fitness: None,
            })
            .collect();
        Self {
            n,
            population,
            offspring: Vec::with_capacity(size),
            pending: None,
            tabu,
            params: params.clone(),
            mutation_rate: params.mutation_rate.unwrap_or_else(|| default_mutation_rate(n)),
            generations: 0,
            local_searches: 0,
        }
    }

    pub fn population(&self) -> &[Member] {
        &self.population
    }

    pub fn generations(&self) -> u64 {
        self.generations
    }

    pub fn local_searches(&self) -> u64 {
        self.local_searches
    }

    fn worst_index(&self) -> usize {
        let mut worst = 0;
        for (i, m) in self.population.iter().enumerate() {
            if fitness_key(m.fitness) > fitness_key(self.population[worst].fitness) {
                worst = i;
            }
        }
        worst
    }

    pub(crate) fn worst(&self) -> &Member {
        &self.population[self.worst_index()]
    }

    pub(crate) fn replace_worst(&mut self, migrant: Scored) {
        let w = self.worst_index();
        self.population[w] = Member {
            seq: migrant.seq,
            fitness: Some(migrant.fitness),
        };
    }

    fn push_offspring(&mut self, child: Scored) {
        self.offspring.push(child);
        if self.offspring.len() + 1 < self.population.len() {
            return;
        }
        let mut elite = 0;
        for (i, m) in self.population.iter().enumerate() {
            if fitness_key(m.fitness) < fitness_key(self.population[elite].fitness) {
                elite = i;
            }
        }
        let elite = self.population.swap_remove(elite);
        self.population.clear();
        self.population.push(elite);
        self.population.extend(self.offspring.drain(..).map(|s| Member {
            seq: s.seq,
            fitness: Some(s.fitness),
        }));
        self.generations += 1;
    }

    pub(crate) fn run<R: Rng + ?Sized>(&mut self, ctx: &mut Ctx<'_>, rng: &mut R) {
        while !ctx.exhausted() {
            if let Some(m) = self.population.iter_mut().find(|m| m.fitness.is_none()) {
                m.fitness = ctx.eval(&m.seq);
                continue;
            }

            if let Some(pending) = self.pending.as_mut() {
                let cap_left = self.params.ls_evals - pending.used;
                let finished = match &pending.search {
                    LocalSearch::Hc(hc) => hc.is_stopped(),
                    LocalSearch::Ts(_) => false,
                };
                if cap_left > 0 && !finished {
                    let mut sub = EvalBudget::new(cap_left.min(ctx.budget.remaining()));
                    {
                        let mut inner = ctx.with_budget(&mut sub);
                        match &mut pending.search {
                            LocalSearch::Hc(hc) => hc.run(&mut inner, rng),
                            LocalSearch::Ts(ts) => ts.run(&mut inner, rng),
                        }
                    }
                    ctx.budget.charge(sub.used());
                    pending.used += sub.used();
                    let stopped = matches!(&pending.search, LocalSearch::Hc(hc) if hc.is_stopped());
                    if pending.used < self.params.ls_evals && !stopped {
                        // outer budget ran out mid-search
                        return;
                    }
                }
                let pending = self.pending.take().expect("pending search");
                let refined = match &pending.search {
                    LocalSearch::Hc(hc) => hc.result(),
                    LocalSearch::Ts(ts) => ts.result(),
                }
                .expect("search started from an evaluated child")
                .clone();
                self.push_offspring(refined);
                continue;
            }

            let fitness: Vec<u32> = self
                .population
                .iter()
                .map(|m| m.fitness.expect("population evaluated"))
                .collect();
            let a = binary_tournament_index(&fitness, rng).expect("non-empty population");
            let b = binary_tournament_index(&fitness, rng).expect("non-empty population");
            let mut child = if rng.gen_bool(self.params.crossover_rate) {
                apx_crossover(&self.population[a].seq, &self.population[b].seq, rng)
            } else {
                self.population[a].seq.clone()
            };
            mutate_in_place(&mut child, self.mutation_rate, rng);
            let Some(f) = ctx.eval(&child) else { return };
            let child = Scored { seq: child, fitness: f };
            if rng.gen_bool(self.params.ls_probability) {
                self.local_searches += 1;
                let search = if self.tabu {
                    LocalSearch::Ts(TabuSearch::local_search(self.n, &self.params, child))
                } else {
                    LocalSearch::Hc(HillClimber::local_search(self.n, &self.params, child))
                };
                self.pending = Some(PendingSearch { search, used: 0 });
                continue;
            }
            self.push_offspring(child);
        }
    }
}
