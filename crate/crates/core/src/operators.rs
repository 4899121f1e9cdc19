//! Permutation operators shared by the search agents.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::evaluator::JobSequence;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum OperatorError {
    #[error("no block move exists for {0} jobs")]
    Degenerate(usize),
    #[error("block move {0:?} invalid for {1} jobs")]
    InvalidMove(BlockMove, usize),
    #[error("tournament pool is empty")]
    EmptyPool,
}

/// All sequences one position swap away, in lexicographic pair order.
pub fn swap_neighbors(seq: &JobSequence) -> SwapNeighbors<'_> {
    SwapNeighbors { seq, i: 0, j: 1 }
}

#[derive(Debug, Clone)]
pub struct SwapNeighbors<'a> {
    seq: &'a JobSequence,
    i: usize,
    j: usize,
}

impl Iterator for SwapNeighbors<'_> {
    type Item = JobSequence;

    fn next(&mut self) -> Option<JobSequence> {
        let n = self.seq.len();
        if self.j >= n {
            return None;
        }
        let mut out = self.seq.clone();
        out.swap(self.i, self.j);
        self.j += 1;
        if self.j == n {
            self.i += 1;
            self.j = self.i + 1;
        }
        Some(out)
    }
}

/// Uniform random position pair `(i, j)` with `i < j`.
pub fn random_pair<R: Rng + ?Sized>(n: usize, rng: &mut R) -> (usize, usize) {
    debug_assert!(n >= 2);
    let a = rng.gen_range(0..n);
    let mut b = rng.gen_range(0..n - 1);
    if b >= a {
        b += 1;
    }
    (a.min(b), a.max(b))
}

/// Block swap in 1-based coordinates: segments `[start, start+len-1]` and
/// `[insert, insert+len-1]` are exchanged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BlockMove {
    pub len: usize,
    pub start: usize,
    pub insert: usize,
}

impl BlockMove {
    pub fn is_valid_for(&self, n: usize) -> bool {
        self.len >= 1
            && 2 * self.len < n
            && self.start >= 1
            && self.start <= n - 2 * self.len
            && self.insert >= self.start + self.len
            && self.insert <= n - self.len
    }
}

/// Largest block length whose start range `1..=n-2*len` is non-empty.
fn max_block_len(n: usize) -> usize {
    n.saturating_sub(1) / 2
}

/// Samples length, then start, then insertion point, each uniformly on the
/// range left by the previous choices.
pub fn sample_block_move<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<BlockMove, OperatorError> {
    let max_len = max_block_len(n);
    if max_len == 0 {
        return Err(OperatorError::Degenerate(n));
    }
    let len = rng.gen_range(1..=max_len);
    let start = rng.gen_range(1..=n - 2 * len);
    let insert = rng.gen_range(start + len..=n - len);
    Ok(BlockMove { len, start, insert })
}

pub fn apply_block_move(seq: &JobSequence, mv: BlockMove) -> Result<JobSequence, OperatorError> {
    let mut out = seq.clone();
    apply_block_move_in_place(&mut out, mv)?;
    Ok(out)
}

pub(crate) fn apply_block_move_in_place(seq: &mut JobSequence, mv: BlockMove) -> Result<(), OperatorError> {
    let n = seq.len();
    if !mv.is_valid_for(n) {
        return Err(OperatorError::InvalidMove(mv, n));
    }
    let s = mv.start - 1;
    let i = mv.insert - 1;
    let slice = seq.as_mut_slice();
    let (head, tail) = slice.split_at_mut(i);
    head[s..s + mv.len].swap_with_slice(&mut tail[..mv.len]);
    Ok(())
}

/// Alternating position crossover with a fixed leading parent.
pub fn apx_with_leader(lead: &JobSequence, other: &JobSequence) -> JobSequence {
    let n = lead.len();
    debug_assert_eq!(n, other.len());
    let mut taken = vec![false; n];
    let mut child = Vec::with_capacity(n);
    for (&a, &b) in lead.as_slice().iter().zip(other.as_slice()) {
        for job in [a, b] {
            if !taken[job] {
                taken[job] = true;
                child.push(job);
            }
        }
        if child.len() == n {
            break;
        }
    }
    JobSequence::from_vec_unchecked(child)
}

/// Alternating position crossover (APX); the leading parent is a coin flip.
pub fn apx_crossover<R: Rng + ?Sized>(p1: &JobSequence, p2: &JobSequence, rng: &mut R) -> JobSequence {
    if rng.gen_bool(0.5) {
        apx_with_leader(p1, p2)
    } else {
        apx_with_leader(p2, p1)
    }
}

/// With probability `p_mut`, one random block swap. Sequences too short
/// for a block move are returned unchanged.
pub fn mutate<R: Rng + ?Sized>(seq: &JobSequence, p_mut: f64, rng: &mut R) -> JobSequence {
    let mut out = seq.clone();
    mutate_in_place(&mut out, p_mut, rng);
    out
}

pub(crate) fn mutate_in_place<R: Rng + ?Sized>(seq: &mut JobSequence, p_mut: f64, rng: &mut R) -> bool {
    if !rng.gen_bool(p_mut.clamp(0.0, 1.0)) {
        return false;
    }
    match sample_block_move(seq.len(), rng) {
        Ok(mv) => apply_block_move_in_place(seq, mv).is_ok(),
        Err(_) => false,
    }
}

/// Default mutation rate `1/len`.
pub fn default_mutation_rate(len: usize) -> f64 {
    1.0 / len.max(1) as f64
}

/// Two uniform draws with replacement; the lower fitness wins, the first
/// draw on ties. Returns the winning index.
pub fn binary_tournament_index<R: Rng + ?Sized>(fitness: &[u32], rng: &mut R) -> Result<usize, OperatorError> {
    if fitness.is_empty() {
        return Err(OperatorError::EmptyPool);
    }
    let a = rng.gen_range(0..fitness.len());
    let b = rng.gen_range(0..fitness.len());
    Ok(if fitness[b] < fitness[a] { b } else { a })
}

pub fn binary_tournament<'a, R: Rng + ?Sized>(
    pool: &'a [(JobSequence, u32)],
    rng: &mut R,
) -> Result<&'a JobSequence, OperatorError> {
    if pool.is_empty() {
        return Err(OperatorError::EmptyPool);
    }
    let a = rng.gen_range(0..pool.len());
    let b = rng.gen_range(0..pool.len());
    Ok(if pool[b].1 < pool[a].1 { &pool[b].0 } else { &pool[a].0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use proptest::prelude::*;
    use rand::Rng;

    fn seq(v: &[usize]) -> JobSequence {
        JobSequence::new(v.to_vec()).unwrap()
    }

    fn is_perm(s: &JobSequence, n: usize) -> bool {
        JobSequence::new(s.as_slice().to_vec()).is_ok() && s.len() == n
    }

    #[test]
    fn swap_neighbors_of_three() {
        let got: Vec<_> = swap_neighbors(&seq(&[0, 1, 2])).collect();
        assert_eq!(got, vec![seq(&[1, 0, 2]), seq(&[2, 1, 0]), seq(&[0, 2, 1])]);
    }

    #[test]
    fn swap_neighbors_of_two() {
        assert_eq!(swap_neighbors(&seq(&[1, 0])).count(), 1);
    }

    #[test]
    fn swap_neighbors_count_and_distance() {
        let base = JobSequence::identity(7);
        let all: Vec<_> = swap_neighbors(&base).collect();
        assert_eq!(all.len(), 21);
        assert!(all.iter().all(|s| s.hamming(&base) == 2));
        let mut dedup = all.clone();
        dedup.sort();
        dedup.dedup();
        assert_eq!(dedup.len(), 21);
    }

    #[test]
    fn block_ranges_for_six() {
        let mut rng = rng_from_seed(11);
        for _ in 0..2000 {
            let mv = sample_block_move(6, &mut rng).unwrap();
            assert!((1..=3).contains(&mv.len));
            if mv.len == 2 {
                assert!((1..=2).contains(&mv.start));
                assert!((mv.start + 2..=4).contains(&mv.insert));
            }
            assert!(mv.is_valid_for(6));
        }
    }

    #[test]
    fn block_move_for_three_is_forced() {
        let mut rng = rng_from_seed(2);
        for _ in 0..50 {
            assert_eq!(
                sample_block_move(3, &mut rng).unwrap(),
                BlockMove { len: 1, start: 1, insert: 2 }
            );
        }
    }

    #[test]
    fn block_move_for_two_is_degenerate() {
        let mut rng = rng_from_seed(2);
        assert_eq!(sample_block_move(2, &mut rng), Err(OperatorError::Degenerate(2)));
    }

    #[test]
    fn block_move_example() {
        let s = seq(&[0, 1, 2, 3, 4, 5]);
        let mv = BlockMove { len: 2, start: 1, insert: 4 };
        // <1,2,3,4,5,6> -> <4,5,3,1,2,6> in 1-based job labels
        assert_eq!(apply_block_move(&s, mv).unwrap(), seq(&[3, 4, 2, 0, 1, 5]));
    }

    #[test]
    fn adjacent_blocks_exchange() {
        let s = seq(&[0, 1, 2, 3, 4, 5, 6]);
        let mv = BlockMove { len: 3, start: 1, insert: 4 };
        assert_eq!(apply_block_move(&s, mv).unwrap(), seq(&[3, 4, 5, 0, 1, 2, 6]));
    }

    #[test]
    fn invalid_block_move_rejected() {
        let s = JobSequence::identity(6);
        let mv = BlockMove { len: 2, start: 2, insert: 3 };
        assert!(matches!(apply_block_move(&s, mv), Err(OperatorError::InvalidMove(..))));
    }

    #[test]
    fn apx_trace() {
        assert_eq!(apx_with_leader(&seq(&[0, 1, 2]), &seq(&[2, 1, 0])), seq(&[0, 2, 1]));
    }

    #[test]
    fn apx_of_identical_parents() {
        let mut rng = rng_from_seed(5);
        let p = JobSequence::random(12, &mut rng);
        assert_eq!(apx_crossover(&p, &p, &mut rng), p);
    }

    #[test]
    fn mutation_rate_extremes() {
        let mut rng = rng_from_seed(9);
        let p = JobSequence::identity(10);
        for _ in 0..100 {
            assert_eq!(mutate(&p, 0.0, &mut rng), p);
            assert_ne!(mutate(&p, 1.0, &mut rng), p);
        }
        assert_eq!(default_mutation_rate(20), 1.0 / 20.0);
    }

    #[test]
    fn tournament_cases() {
        let mut rng = rng_from_seed(1);
        let a = seq(&[0, 1]);
        let b = seq(&[1, 0]);
        assert_eq!(binary_tournament(&[(a.clone(), 3)], &mut rng).unwrap(), &a);
        assert_eq!(binary_tournament(&[], &mut rng), Err(OperatorError::EmptyPool));

        let pool = [(a.clone(), 5), (b.clone(), 9)];
        let trials = 40_000;
        let bs = (0..trials)
            .filter(|_| binary_tournament(&pool, &mut rng).unwrap() == &b)
            .count();
        let freq = bs as f64 / trials as f64;
        assert!((freq - 0.25).abs() < 0.01, "P(b) = {freq}");
    }

    #[test]
    fn tournament_tie_takes_first_draw() {
        // replay the draws to learn which index came first
        let fitness = [4, 4, 4];
        for seed in 0..50 {
            let mut rng = rng_from_seed(seed);
            let mut replay = rng.clone();
            let first = replay.gen_range(0..3);
            assert_eq!(binary_tournament_index(&fitness, &mut rng).unwrap(), first);
        }
    }

    proptest! {
        #[test]
        fn operators_keep_permutations(n in 3usize..50, seed in any::<u64>()) {
            let mut rng = rng_from_seed(seed);
            let p1 = JobSequence::random(n, &mut rng);
            let p2 = JobSequence::random(n, &mut rng);
            let mv = sample_block_move(n, &mut rng).unwrap();
            prop_assert!(mv.is_valid_for(n));
            let moved = apply_block_move(&p1, mv).unwrap();
            prop_assert!(is_perm(&moved, n));
            prop_assert_eq!(apply_block_move(&moved, mv).unwrap(), p1.clone());
            prop_assert!(is_perm(&apx_crossover(&p1, &p2, &mut rng), n));
            prop_assert!(is_perm(&mutate(&p1, 0.5, &mut rng), n));
        }
    }
}
