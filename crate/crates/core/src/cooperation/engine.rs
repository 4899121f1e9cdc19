use alloc::vec::Vec;

use super::{ArchitectureSpec, SpecError, Topology};
use crate::evaluator::{EvalBudget, Ktns};
use crate::instance::Instance;
use crate::metaheuristics::{fitness_key, Params, Scored, SearchAgent};
use crate::rng::{child_seed, path_seed, rng_from_seed, SearchRng};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CoopError {
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error("budget {budget} too small for this architecture: some agent slice would be 0 (needs at least {required})")]
    BudgetTooSmall { budget: u64, required: u64 },
}

/// Result of a cooperative run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOutcome {
    pub best: Scored,
    pub evaluations: u64,
}

/// Snapshot of one synchronization, reported to observers.
#[derive(Debug)]
pub struct SyncEvent<'a> {
    /// Child indices from the root to the synchronizing node.
    pub path: &'a [usize],
    pub topology: Topology,
    pub cycle: u32,
    /// Best fitness of every child before and after migration.
    pub before: &'a [Option<u32>],
    pub after: &'a [Option<u32>],
}

/// Seed of the basic agent at `path` (child indices from the root).
pub fn leaf_seed(seed: u64, path: &[usize]) -> u64 {
    path_seed(seed, path)
}

fn topology_seed(seed: u64, path: &[usize]) -> u64 {
    child_seed(path_seed(seed, path), 0x746f_706f)
}

#[derive(Debug, Clone)]
#[allow(clippy::large_enum_variant)]
enum Unit {
    Leaf(SearchAgent),
    Node(Node),
}

#[derive(Debug, Clone)]
struct Node {
    cycles: u32,
    topology: Topology,
    children: Vec<Unit>,
    rng: SearchRng,
    path: Vec<usize>,
}

struct RunCtx<'a, 'o> {
    inst: &'a Instance,
    ktns: &'a mut Ktns,
    global: &'a mut EvalBudget,
    migration: bool,
    observer: Option<&'a mut (dyn FnMut(&SyncEvent<'_>) + 'o)>,
}

impl Unit {
    fn build(spec: &ArchitectureSpec, inst: &Instance, seed: u64, params: &Params, path: &mut Vec<usize>) -> Self {
        match spec {
            ArchitectureSpec::Leaf(kind) => {
                Unit::Leaf(SearchAgent::with_params(*kind, inst, leaf_seed(seed, path), params))
            }
            ArchitectureSpec::Node {
                cycles,
                topology,
                children,
            } => {
                let built = children
                    .iter()
                    .enumerate()
                    .map(|(i, c)| {
                        path.push(i);
                        let u = Unit::build(c, inst, seed, params, path);
                        path.pop();
                        u
                    })
                    .collect();
                Unit::Node(Node {
                    cycles: *cycles,
                    topology: *topology,
                    children: built,
                    rng: rng_from_seed(topology_seed(seed, path)),
                    path: path.clone(),
                })
            }
        }
    }

    fn best(&self) -> Option<&Scored> {
        match self {
            Unit::Leaf(a) => a.best_of(),
            Unit::Node(n) => n.best(),
        }
    }

    fn worst_key(&self) -> u64 {
        match self {
            Unit::Leaf(a) => a.worst_key(),
            Unit::Node(n) => n.children.iter().map(Unit::worst_key).max().unwrap_or(u64::MAX),
        }
    }

    /// A node forwards the migrant to the child holding the worst solution
    /// of its combined pool.
    fn inject(&mut self, migrant: Scored) {
        match self {
            Unit::Leaf(a) => a.inject(migrant),
            Unit::Node(n) => {
                let mut target = 0;
                let mut worst = 0;
                for (i, c) in n.children.iter().enumerate() {
                    let k = c.worst_key();
                    if i == 0 || k > worst {
                        target = i;
                        worst = k;
                    }
                }
                n.children[target].inject(migrant);
            }
        }
    }

    fn run(&mut self, budget: u64, rc: &mut RunCtx<'_, '_>) {
        match self {
            Unit::Leaf(a) => a.run_for(rc.inst, rc.ktns, budget, rc.global),
            Unit::Node(n) => n.run(budget, rc),
        }
    }

    fn collect_leaves<'s>(&'s self, path: &mut Vec<usize>, out: &mut Vec<(Vec<usize>, &'s SearchAgent)>) {
        match self {
            Unit::Leaf(a) => out.push((path.clone(), a)),
            Unit::Node(n) => {
                for (i, c) in n.children.iter().enumerate() {
                    path.push(i);
                    c.collect_leaves(path, out);
                    path.pop();
                }
            }
        }
    }
}

impl Node {
    fn best(&self) -> Option<&Scored> {
        let mut best: Option<&Scored> = None;
        for c in &self.children {
            if let Some(b) = c.best() {
                if best.is_none_or(|cur| b.fitness < cur.fitness) {
                    best = Some(b);
                }
            }
        }
        best
    }

    fn run(&mut self, budget: u64, rc: &mut RunCtx<'_, '_>) {
        let per_child = budget / u64::from(self.cycles) / self.children.len() as u64;
        for cycle in 0..self.cycles {
            for child in &mut self.children {
                child.run(per_child, rc);
            }
            if rc.migration {
                self.synchronize(cycle, rc);
            }
        }
    }

    fn synchronize(&mut self, cycle: u32, rc: &mut RunCtx<'_, '_>) {
        let before: Vec<Option<u32>> = self.children.iter().map(|c| c.best().map(|b| b.fitness)).collect();
        for (i, j) in self.topology.edges(self.children.len(), &mut self.rng) {
            if i == j {
                continue;
            }
            let Some(migrant) = self.children[i].best() else { continue };
            if u64::from(migrant.fitness) < fitness_key(self.children[j].best().map(|b| b.fitness)) {
                let migrant = migrant.clone();
                self.children[j].inject(migrant);
            }
        }
        if let Some(observer) = rc.observer.as_mut() {
            let after: Vec<Option<u32>> = self.children.iter().map(|c| c.best().map(|b| b.fitness)).collect();
            observer(&SyncEvent {
                path: &self.path,
                topology: self.topology,
                cycle,
                before: &before,
                after: &after,
            });
        }
    }
}

/// A cooperative architecture instantiated on one instance.
///
/// Every call to [`Cooperation::run`] executes the root's full cycle
/// schedule with the given budget, resuming all agents where they stopped.
#[derive(Debug, Clone)]
pub struct Cooperation {
    spec: ArchitectureSpec,
    root: Unit,
    ktns: Ktns,
    migration: bool,
}

impl Cooperation {
    pub fn new(spec: &ArchitectureSpec, inst: &Instance, seed: u64) -> Result<Self, CoopError> {
        Self::with_params(spec, inst, seed, &Params::default())
    }

    pub fn with_params(spec: &ArchitectureSpec, inst: &Instance, seed: u64, params: &Params) -> Result<Self, CoopError> {
        spec.validate()?;
        Ok(Self {
            spec: spec.clone(),
            root: Unit::build(spec, inst, seed, params, &mut Vec::new()),
            ktns: Ktns::new(),
            migration: true,
        })
    }

    /// Disables or re-enables migration; without it the children search
    /// independently.
    pub fn set_migration(&mut self, enabled: bool) {
        self.migration = enabled;
    }

    pub fn spec(&self) -> &ArchitectureSpec {
        &self.spec
    }

    pub fn best(&self) -> Option<&Scored> {
        self.root.best()
    }

    /// Basic agents with their paths, depth first.
    pub fn leaves(&self) -> Vec<(Vec<usize>, &SearchAgent)> {
        let mut out = Vec::new();
        self.root.collect_leaves(&mut Vec::new(), &mut out);
        out
    }

    pub fn run(&mut self, inst: &Instance, total_budget: u64) -> Result<RunOutcome, CoopError> {
        self.execute(inst, total_budget, None)
    }

    /// Like [`Cooperation::run`], reporting every synchronization.
    pub fn run_observed(
        &mut self,
        inst: &Instance,
        total_budget: u64,
        observer: &mut dyn FnMut(&SyncEvent<'_>),
    ) -> Result<RunOutcome, CoopError> {
        self.execute(inst, total_budget, Some(observer))
    }

    fn execute(
        &mut self,
        inst: &Instance,
        total_budget: u64,
        observer: Option<&mut dyn FnMut(&SyncEvent<'_>)>,
    ) -> Result<RunOutcome, CoopError> {
        let required = self.spec.min_budget();
        if total_budget < required {
            return Err(CoopError::BudgetTooSmall {
                budget: total_budget,
                required,
            });
        }
        let mut global = EvalBudget::new(total_budget);
        let mut rc = RunCtx {
            inst,
            ktns: &mut self.ktns,
            global: &mut global,
            migration: self.migration,
            observer,
        };
        self.root.run(total_budget, &mut rc);
        let best = self.root.best().expect("every agent evaluated at least once").clone();
        Ok(RunOutcome {
            best,
            evaluations: global.used(),
        })
    }
}

/// Builds `spec` on `inst` and runs it once with `total_budget` evaluations.
pub fn run(spec: &ArchitectureSpec, inst: &Instance, total_budget: u64, seed: u64) -> Result<RunOutcome, CoopError> {
    Cooperation::new(spec, inst, seed)?.run(inst, total_budget)
}
