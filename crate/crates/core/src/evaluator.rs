//! Fitness of a job sequence: the minimum number of tool switches for a
//! fixed order, computed with Keep Tool Needed Soonest (KTNS).
//!
//! The initial magazine load is free. At each later step the tools of the
//! current job are inserted; when the magazine overflows, the loaded tools
//! whose next use lies furthest ahead are removed (never-used-again tools
//! first, lowest index on ties).

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::instance::Instance;

/// A permutation of job indices `0..n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct JobSequence(Vec<usize>);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SequenceError {
    #[error("job {0} out of range")]
    OutOfRange(usize),
    #[error("job {0} appears more than once")]
    Duplicate(usize),
    #[error("sequence has {found} jobs, instance has {expected}")]
    Length { found: usize, expected: usize },
}

impl JobSequence {
    pub fn new(order: Vec<usize>) -> Result<Self, SequenceError> {
        let mut seen = vec![false; order.len()];
        for &j in &order {
            match seen.get_mut(j) {
                None => return Err(SequenceError::OutOfRange(j)),
                Some(true) => return Err(SequenceError::Duplicate(j)),
                Some(s) => *s = true,
            }
        }
        Ok(Self(order))
    }

    pub(crate) fn from_vec_unchecked(order: Vec<usize>) -> Self {
        debug_assert!(Self::new(order.clone()).is_ok());
        Self(order)
    }

    pub fn identity(n: usize) -> Self {
        Self((0..n).collect())
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        Self(order)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }

    pub fn swap(&mut self, a: usize, b: usize) {
        self.0.swap(a, b);
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [usize] {
        &mut self.0
    }

    /// Number of positions where `self` and `other` differ.
    pub fn hamming(&self, other: &Self) -> usize {
        self.0.iter().zip(&other.0).filter(|(a, b)| a != b).count()
    }

    pub fn check_against(&self, inst: &Instance) -> Result<(), SequenceError> {
        if self.len() != inst.jobs() {
            return Err(SequenceError::Length {
                found: self.len(),
                expected: inst.jobs(),
            });
        }
        Ok(())
    }
}

/// Tool configurations `T_1..T_n` and the resulting switch count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoadingPlan {
    /// Sorted tool indices in the magazine while each step runs.
    pub configs: Vec<Vec<usize>>,
    pub switches: u32,
}

impl LoadingPlan {
    /// Insertions after the first step, recounted from the configurations.
    pub fn recount(&self) -> u32 {
        self.configs
            .windows(2)
            .map(|w| w[1].iter().filter(|t| w[0].binary_search(t).is_err()).count() as u32)
            .sum()
    }

    /// Checks capacity and requirement coverage for every step.
    pub fn is_feasible(&self, inst: &Instance, seq: &JobSequence) -> bool {
        self.configs.len() == seq.len()
            && self.configs.iter().zip(seq.as_slice()).all(|(cfg, &job)| {
                cfg.len() <= inst.capacity()
                    && inst.job_tools(job).iter().all(|t| cfg.binary_search(t).is_ok())
            })
    }
}

/// Evaluation counter. One KTNS application is one evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvalBudget {
    used: u64,
    limit: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("evaluation budget exhausted")]
pub struct BudgetExhausted;

impl EvalBudget {
    pub fn new(limit: u64) -> Self {
        Self { used: 0, limit }
    }

    pub fn with_used(used: u64, limit: u64) -> Self {
        assert!(used <= limit, "used {used} exceeds limit {limit}");
        Self { used, limit }
    }

    pub fn used(&self) -> u64 {
        self.used
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn remaining(&self) -> u64 {
        self.limit - self.used
    }

    pub fn is_exhausted(&self) -> bool {
        self.used >= self.limit
    }

    pub fn try_consume(&mut self) -> Result<(), BudgetExhausted> {
        if self.is_exhausted() {
            return Err(BudgetExhausted);
        }
        self.used += 1;
        Ok(())
    }

    /// Records `used` evaluations spent from a sub-budget carved out of this one.
    pub fn charge(&mut self, used: u64) {
        assert!(used <= self.remaining(), "sub-budget overspent");
        self.used += used;
    }
}

/// Reusable KTNS scratch space. Cheap to create; reuse it in hot loops.
#[derive(Debug, Default, Clone)]
pub struct Ktns {
    /// Positions (ascending) at which each tool is needed.
    uses: Vec<Vec<u32>>,
    cursor: Vec<usize>,
    loaded: Vec<usize>,
    in_magazine: Vec<bool>,
    stamp: Vec<u32>,
    missing: Vec<usize>,
}

const NEVER: u32 = u32::MAX;

impl Ktns {
    pub fn new() -> Self {
        Self::default()
    }

    fn reset(&mut self, inst: &Instance, seq: &[usize]) {
        let m = inst.tools();
        if self.uses.len() != m {
            self.uses = vec![Vec::new(); m];
        }
        for u in &mut self.uses {
            u.clear();
        }
        for (pos, &job) in seq.iter().enumerate() {
            for &t in inst.job_tools(job) {
                self.uses[t].push(pos as u32);
            }
        }
        self.cursor.clear();
        self.cursor.resize(m, 0);
        self.in_magazine.clear();
        self.in_magazine.resize(m, false);
        self.stamp.clear();
        self.stamp.resize(m, 0);
        self.loaded.clear();
    }

    fn next_use(&mut self, tool: usize, after: u32) -> u32 {
        let uses = &self.uses[tool];
        let c = &mut self.cursor[tool];
        while *c < uses.len() && uses[*c] <= after {
            *c += 1;
        }
        uses.get(*c).copied().unwrap_or(NEVER)
    }

    /// The initial load is free, so spare slots after the first job take the
    /// tools needed soonest (lowest index on ties). Tools never needed are
    /// left out.
    fn prefill(&mut self, capacity: usize) {
        let spare = capacity - self.loaded.len();
        if spare == 0 {
            return;
        }
        let mut upcoming: Vec<(u32, usize)> = (0..self.uses.len())
            .filter(|&t| !self.in_magazine[t])
            .filter_map(|t| self.uses[t].first().map(|&p| (p, t)))
            .collect();
        upcoming.sort_unstable();
        for &(_, t) in upcoming.iter().take(spare) {
            self.in_magazine[t] = true;
            self.loaded.push(t);
        }
    }

    fn simulate(&mut self, inst: &Instance, seq: &[usize], mut plan: Option<&mut Vec<Vec<usize>>>) -> u32 {
        self.reset(inst, seq);
        let capacity = inst.capacity();
        let mut switches = 0u32;
        for (pos, &job) in seq.iter().enumerate() {
            let step = pos as u32 + 1;
            self.missing.clear();
            for &t in inst.job_tools(job) {
                self.stamp[t] = step;
                if !self.in_magazine[t] {
                    self.missing.push(t);
                }
            }
            let overflow = (self.loaded.len() + self.missing.len()).saturating_sub(capacity);
            for _ in 0..overflow {
                // furthest next use, lowest index on ties
                let mut victim: Option<(usize, u32, usize)> = None;
                for slot in 0..self.loaded.len() {
                    let t = self.loaded[slot];
                    if self.stamp[t] == step {
                        continue;
                    }
                    let next = self.next_use(t, pos as u32);
                    let better = match victim {
                        None => true,
                        Some((_, vn, vt)) => next > vn || (next == vn && t < vt),
                    };
                    if better {
                        victim = Some((slot, next, t));
                    }
                }
                let (slot, _, t) = victim.expect("job fits the magazine");
                self.loaded.swap_remove(slot);
                self.in_magazine[t] = false;
            }
            for i in 0..self.missing.len() {
                let t = self.missing[i];
                self.in_magazine[t] = true;
                self.loaded.push(t);
            }
            if pos > 0 {
                switches += self.missing.len() as u32;
            } else {
                self.prefill(capacity);
            }
            if let Some(plan) = plan.as_deref_mut() {
                let mut cfg = self.loaded.clone();
                cfg.sort_unstable();
                plan.push(cfg);
            }
        }
        switches
    }

    /// Minimum switch count for `seq` (no budget accounting).
    pub fn switches(&mut self, inst: &Instance, seq: &JobSequence) -> u32 {
        debug_assert_eq!(seq.len(), inst.jobs());
        self.simulate(inst, seq.as_slice(), None)
    }

    /// Full loading plan for `seq`.
    pub fn plan(&mut self, inst: &Instance, seq: &JobSequence) -> LoadingPlan {
        let mut configs = Vec::with_capacity(seq.len());
        let switches = self.simulate(inst, seq.as_slice(), Some(&mut configs));
        let plan = LoadingPlan { configs, switches };
        debug_assert!(plan.is_feasible(inst, seq));
        debug_assert_eq!(plan.recount(), plan.switches);
        plan
    }

    /// One budgeted evaluation.
    pub fn evaluate(
        &mut self,
        inst: &Instance,
        seq: &JobSequence,
        budget: &mut EvalBudget,
    ) -> Result<u32, BudgetExhausted> {
        budget.try_consume()?;
        Ok(self.switches(inst, seq))
    }
}

/// Optimal loading plan for a fixed sequence.
pub fn ktns(inst: &Instance, seq: &JobSequence) -> LoadingPlan {
    Ktns::new().plan(inst, seq)
}

/// Switch count of `seq`, charged as one evaluation against `budget`.
pub fn fitness(inst: &Instance, seq: &JobSequence, budget: &mut EvalBudget) -> Result<u32, BudgetExhausted> {
    Ktns::new().evaluate(inst, seq, budget)
}

/// Largest tool count accepted by [`exact_min_switches`].
pub const EXACT_MAX_TOOLS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("exact oracle limited to {EXACT_MAX_TOOLS} tools, instance has {tools}")]
pub struct TooLarge {
    pub tools: usize,
}

/// Exact minimum over all feasible trajectories, by dynamic programming on
/// full magazine states (`C`-subsets of tools). Independent of the KTNS
/// eviction rule; used as a test oracle.
pub fn exact_min_switches(inst: &Instance, seq: &JobSequence) -> Result<u32, TooLarge> {
    let m = inst.tools();
    if m > EXACT_MAX_TOOLS {
        return Err(TooLarge { tools: m });
    }
    let c = inst.capacity();
    let mut states = Vec::new();
    // Gosper's hack over c-bit masks of width m
    let mut s: u32 = (1u32 << c) - 1;
    while s < (1u32 << m) {
        states.push(s);
        let low = s & s.wrapping_neg();
        let ripple = s + low;
        s = (((ripple ^ s) >> 2) / low) | ripple;
    }
    let need = |job: usize| inst.job_tools(job).iter().fold(0u32, |acc, &t| acc | (1 << t));

    let mut layer: Vec<(u32, u32)> = Vec::new();
    let first = need(seq.as_slice()[0]);
    layer.extend(states.iter().filter(|&&s| s & first == first).map(|&s| (s, 0)));
    for &job in &seq.as_slice()[1..] {
        let req = need(job);
        let next: Vec<(u32, u32)> = states
            .iter()
            .filter(|&&s| s & req == req)
            .map(|&to| {
                let cost = layer
                    .iter()
                    .map(|&(from, acc)| acc + (to & !from).count_ones())
                    .min()
                    .expect("non-empty layer");
                (to, cost)
            })
            .collect();
        layer = next;
    }
    Ok(layer.iter().map(|&(_, c)| c).min().expect("non-empty layer"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use proptest::prelude::*;
    use rand::Rng;

    fn chain() -> Instance {
        // tools 1..4 -> 0..3; J1={1,2}, J2={2,3}, J3={3,4}
        Instance::from_job_tools(4, 2, &[vec![0, 1], vec![1, 2], vec![2, 3]], None).unwrap()
    }

    fn sooner() -> Instance {
        // J1={1,2}, J2={3}, J3={1}
        Instance::from_job_tools(3, 2, &[vec![0, 1], vec![2], vec![0]], None).unwrap()
    }

    #[test]
    fn chain_needs_two_switches() {
        let plan = ktns(&chain(), &JobSequence::identity(3));
        assert_eq!(plan.switches, 2);
        assert_eq!(plan.configs[0], vec![0, 1]);
    }

    #[test]
    fn evicts_tool_needed_later() {
        let plan = ktns(&sooner(), &JobSequence::identity(3));
        assert_eq!(plan.switches, 1);
        // tool 2 (index 1) leaves at step 2, tool 1 stays
        assert_eq!(plan.configs[1], vec![0, 2]);
    }

    #[test]
    fn oracle_agrees_on_worked_examples() {
        assert_eq!(exact_min_switches(&chain(), &JobSequence::identity(3)), Ok(2));
        assert_eq!(exact_min_switches(&sooner(), &JobSequence::identity(3)), Ok(1));
    }

    #[test]
    fn identical_jobs_never_switch() {
        let inst = Instance::from_job_tools(5, 3, &vec![vec![1, 3, 4]; 6], None).unwrap();
        let mut rng = rng_from_seed(3);
        let mut budget = EvalBudget::new(100);
        for _ in 0..10 {
            let seq = JobSequence::random(6, &mut rng);
            assert_eq!(fitness(&inst, &seq, &mut budget), Ok(0));
        }
    }

    #[test]
    fn single_job_is_free() {
        let inst = Instance::from_job_tools(3, 2, &[vec![0, 2]], None).unwrap();
        assert_eq!(exact_min_switches(&inst, &JobSequence::identity(1)), Ok(0));
        assert_eq!(ktns(&inst, &JobSequence::identity(1)).switches, 0);
    }

    #[test]
    fn oracle_size_guard() {
        let jobs: Vec<Vec<usize>> = (0..20).map(|t| vec![t]).collect();
        let inst = Instance::from_job_tools(20, 3, &jobs, None).unwrap();
        assert_eq!(
            exact_min_switches(&inst, &JobSequence::identity(20)),
            Err(TooLarge { tools: 20 })
        );
    }

    #[test]
    fn fitness_counts_one_evaluation() {
        let mut budget = EvalBudget::new(10);
        assert_eq!(fitness(&chain(), &JobSequence::identity(3), &mut budget), Ok(2));
        assert_eq!(budget, EvalBudget::with_used(1, 10));
    }

    #[test]
    fn exhausted_budget_signals() {
        let mut budget = EvalBudget::with_used(5, 5);
        assert_eq!(fitness(&chain(), &JobSequence::identity(3), &mut budget), Err(BudgetExhausted));
        assert_eq!(budget.used(), 5);
    }

    #[test]
    fn sequence_validation() {
        assert!(JobSequence::new(vec![2, 0, 1]).is_ok());
        assert_eq!(JobSequence::new(vec![0, 0, 1]), Err(SequenceError::Duplicate(0)));
        assert_eq!(JobSequence::new(vec![0, 3, 1]), Err(SequenceError::OutOfRange(3)));
    }

    fn small_instance() -> impl Strategy<Value = (Instance, u64)> {
        (3usize..=6, 5usize..=10, 2usize..=4, any::<u64>()).prop_map(|(n, m, c, seed)| {
            let mut rng = rng_from_seed(seed);
            let jobs: Vec<Vec<usize>> = (0..n)
                .map(|_| {
                    let k = rng.gen_range(1..=c);
                    let mut t = rand::seq::index::sample(&mut rng, m, k).into_vec();
                    t.sort_unstable();
                    t
                })
                .collect();
            (Instance::from_job_tools(m, c, &jobs, None).unwrap(), seed)
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn ktns_is_optimal_and_feasible((inst, seed) in small_instance()) {
            let mut rng = rng_from_seed(seed ^ 1);
            let mut k = Ktns::new();
            for _ in 0..8 {
                let seq = JobSequence::random(inst.jobs(), &mut rng);
                let plan = k.plan(&inst, &seq);
                prop_assert!(plan.is_feasible(&inst, &seq));
                prop_assert_eq!(plan.recount(), plan.switches);
                prop_assert_eq!(Ok(plan.switches), exact_min_switches(&inst, &seq));
                prop_assert_eq!(k.switches(&inst, &seq), plan.switches);
            }
        }
    }
}
