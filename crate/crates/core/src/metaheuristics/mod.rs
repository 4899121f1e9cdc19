//! Basic search agents: hill climbing (HC), tabu search (TS), cross-entropy
//! with one (CE) or four (CEM) probability matrices, and memetic algorithms
//! with HC or TS local search (MAHC, MATS).
//!
//! Every agent is a resumable state machine. [`SearchAgent::run_for`] spends
//! at most the given number of evaluations and leaves the agent exactly
//! where it stopped, so `run_for(a)` followed by `run_for(b)` behaves like a
//! single `run_for(a + b)`.

mod cross_entropy;
mod hill_climbing;
mod memetic;
mod tabu;

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::evaluator::{EvalBudget, JobSequence, Ktns};
use crate::instance::Instance;
use crate::rng::{child_seed, rng_from_seed, SearchRng};

pub use cross_entropy::CrossEntropy;
pub use hill_climbing::{HillClimber, Stagnation};
pub use memetic::Memetic;
pub use tabu::TabuSearch;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AgentKind {
    Hc,
    Ts,
    Ce,
    Cem,
    Mahc,
    Mats,
}

impl AgentKind {
    pub const ALL: [AgentKind; 6] = [Self::Hc, Self::Ts, Self::Ce, Self::Cem, Self::Mahc, Self::Mats];

    pub fn name(self) -> &'static str {
        match self {
            Self::Hc => "HC",
            Self::Ts => "TS",
            Self::Ce => "CE",
            Self::Cem => "CEM",
            Self::Mahc => "MAHC",
            Self::Mats => "MATS",
        }
    }
}

impl fmt::Display for AgentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown metaheuristic `{0}`")]
pub struct UnknownKind(pub alloc::string::String);

impl FromStr for AgentKind {
    type Err = UnknownKind;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| UnknownKind(s.into()))
    }
}

/// An evaluated solution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scored {
    pub seq: JobSequence,
    pub fitness: u32,
}

/// A pool slot; `fitness` is `None` until the solution has been evaluated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Member {
    pub seq: JobSequence,
    pub fitness: Option<u32>,
}

/// Orders optional fitness values with "not yet evaluated" as worst.
#[inline]
pub fn fitness_key(f: Option<u32>) -> u64 {
    f.map_or(u64::MAX, u64::from)
}

/// Tunable parameters. Defaults are the benchmark settings.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    /// Swap neighbors sampled per HC/TS step, as a multiple of `n`.
    pub neighborhood_factor: usize,
    /// Elite fraction of the cross-entropy samples.
    pub ce_rho: f64,
    /// Smoothing weight of the new elite frequencies.
    pub ce_alpha: f64,
    /// Lower bound on any probability before renormalizing.
    pub ce_floor: f64,
    /// Number of probability matrices for CEM.
    pub cem_matrices: usize,
    pub population: usize,
    pub crossover_rate: f64,
    /// `None` means `1/n`.
    pub mutation_rate: Option<f64>,
    pub ls_probability: f64,
    pub ls_evals: u64,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            neighborhood_factor: 4,
            ce_rho: 0.01,
            ce_alpha: 0.7,
            ce_floor: 1e-6,
            cem_matrices: 4,
            population: 30,
            crossover_rate: 1.0,
            mutation_rate: None,
            ls_probability: 0.01,
            ls_evals: 200,
        }
    }
}

/// Evaluation context handed to the engines for one `run_for` call.
pub(crate) struct Ctx<'a> {
    pub inst: &'a Instance,
    pub ktns: &'a mut Ktns,
    pub budget: &'a mut EvalBudget,
    pub best: &'a mut Option<Scored>,
}

impl Ctx<'_> {
    #[inline]
    pub fn exhausted(&self) -> bool {
        self.budget.is_exhausted()
    }

    /// Scores `seq`, charging one evaluation; `None` once the budget is spent.
    pub fn eval(&mut self, seq: &JobSequence) -> Option<u32> {
        self.budget.try_consume().ok()?;
        let f = self.ktns.switches(self.inst, seq);
        if self.best.as_ref().is_none_or(|b| f < b.fitness) {
            *self.best = Some(Scored {
                seq: seq.clone(),
                fitness: f,
            });
        }
        Some(f)
    }

    pub fn with_budget<'b>(&'b mut self, budget: &'b mut EvalBudget) -> Ctx<'b> {
        Ctx {
            inst: self.inst,
            ktns: self.ktns,
            budget,
            best: self.best,
        }
    }
}

#[derive(Debug, Clone)]
enum Engine {
    Hc(HillClimber),
    Ts(TabuSearch),
    Ce(CrossEntropy),
    Ma(Memetic),
}

/// One basic metaheuristic with its solution pool and random stream.
#[derive(Debug, Clone)]
pub struct SearchAgent {
    kind: AgentKind,
    engine: Engine,
    rng: SearchRng,
    best: Option<Scored>,
    evaluations: u64,
}

impl SearchAgent {
    pub fn new(kind: AgentKind, inst: &Instance, seed: u64) -> Self {
        Self::with_params(kind, inst, seed, &Params::default())
    }

    pub fn with_params(kind: AgentKind, inst: &Instance, seed: u64, params: &Params) -> Self {
        let n = inst.jobs();
        let mut rng = rng_from_seed(seed);
        let engine = match kind {
            AgentKind::Hc => Engine::Hc(HillClimber::new(n, params, JobSequence::random(n, &mut rng), true)),
            AgentKind::Ts => Engine::Ts(TabuSearch::new(n, params, JobSequence::random(n, &mut rng))),
            AgentKind::Ce | AgentKind::Cem => {
                let matrices = if kind == AgentKind::Ce { 1 } else { params.cem_matrices.max(1) };
                let placeholder = JobSequence::random(n, &mut rng);
                let seeds: Vec<u64> = (0..matrices).map(|k| child_seed(seed, k as u64)).collect();
                Engine::Ce(CrossEntropy::new(n, params, &seeds, placeholder))
            }
            AgentKind::Mahc | AgentKind::Mats => {
                Engine::Ma(Memetic::new(n, params, kind == AgentKind::Mats, &mut rng))
            }
        };
        Self {
            kind,
            engine,
            rng,
            best: None,
            evaluations: 0,
        }
    }

    pub fn kind(&self) -> AgentKind {
        self.kind
    }

    pub fn evaluations(&self) -> u64 {
        self.evaluations
    }

    /// Runs until `budget` is exhausted (or the agent cannot progress).
    pub fn run(&mut self, inst: &Instance, ktns: &mut Ktns, budget: &mut EvalBudget) {
        let before = budget.used();
        let mut ctx = Ctx {
            inst,
            ktns,
            budget,
            best: &mut self.best,
        };
        match &mut self.engine {
            Engine::Hc(e) => e.run(&mut ctx, &mut self.rng),
            Engine::Ts(e) => e.run(&mut ctx, &mut self.rng),
            Engine::Ce(e) => e.run(&mut ctx),
            Engine::Ma(e) => e.run(&mut ctx, &mut self.rng),
        }
        self.evaluations += budget.used() - before;
    }

    /// Spends at most `slice` evaluations, drawn from `global`.
    pub fn run_for(&mut self, inst: &Instance, ktns: &mut Ktns, slice: u64, global: &mut EvalBudget) {
        let mut sub = EvalBudget::new(slice.min(global.remaining()));
        self.run(inst, ktns, &mut sub);
        global.charge(sub.used());
    }

    /// Best solution seen so far (`None` before the first evaluation).
    pub fn best_of(&self) -> Option<&Scored> {
        self.best.as_ref()
    }

    /// Worst pool member; unevaluated members count as worst.
    pub fn worst_of(&self) -> Member {
        match &self.engine {
            Engine::Ma(e) => e.worst().clone(),
            _ => self.sole_member(),
        }
    }

    fn sole_member(&self) -> Member {
        match &self.best {
            Some(b) => Member {
                seq: b.seq.clone(),
                fitness: Some(b.fitness),
            },
            None => Member {
                seq: match &self.engine {
                    Engine::Hc(e) => e.start_point().clone(),
                    Engine::Ts(e) => e.start_point().clone(),
                    Engine::Ce(e) => e.placeholder().clone(),
                    Engine::Ma(_) => unreachable!(),
                },
                fitness: None,
            },
        }
    }

    pub fn worst_key(&self) -> u64 {
        match &self.engine {
            Engine::Ma(e) => fitness_key(e.worst().fitness),
            _ => fitness_key(self.best.as_ref().map(|b| b.fitness)),
        }
    }

    /// Pool contents: the population for memetic agents, the single
    /// incumbent otherwise.
    pub fn pool(&self) -> Vec<Member> {
        match &self.engine {
            Engine::Ma(e) => e.population().to_vec(),
            _ => alloc::vec![self.sole_member()],
        }
    }

    /// Replaces the worst pool member with an already evaluated migrant.
    /// Local searchers continue from the migrant; cross-entropy agents only
    /// adopt it as incumbent when it is better.
    pub fn inject(&mut self, migrant: Scored) {
        let improves = self.best.as_ref().is_none_or(|b| migrant.fitness < b.fitness);
        match &mut self.engine {
            Engine::Hc(e) => {
                e.restart_from(migrant.clone());
                self.best = Some(migrant);
            }
            Engine::Ts(e) => {
                e.restart_from(migrant.clone());
                self.best = Some(migrant);
            }
            Engine::Ce(_) => {
                if improves {
                    self.best = Some(migrant);
                }
            }
            Engine::Ma(e) => {
                e.replace_worst(migrant.clone());
                if improves {
                    self.best = Some(migrant);
                }
            }
        }
    }

    pub fn hill_climber(&self) -> Option<&HillClimber> {
        match &self.engine {
            Engine::Hc(e) => Some(e),
            _ => None,
        }
    }

    pub fn cross_entropy(&self) -> Option<&CrossEntropy> {
        match &self.engine {
            Engine::Ce(e) => Some(e),
            _ => None,
        }
    }

    pub fn memetic(&self) -> Option<&Memetic> {
        match &self.engine {
            Engine::Ma(e) => Some(e),
            _ => None,
        }
    }
}
