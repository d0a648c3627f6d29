//! S-random bit interleaver.
//!
//! The spread property: any two positions at distance at most `S` in the
//! interleaved stream read from original positions at distance at least
//! `S`. Generated by the classic rejection construction — scan a
//! shuffled pool and place the first candidate compatible with the last
//! `S` placements; restart on dead ends, and lower `S` by one once the
//! retry budget for a level is spent (the achieved spread is recorded).

use rand::seq::SliceRandom;
use rand::Rng;

/// Restarts attempted per spread value before lowering it.
// Greedy construction succeeds rarely per trial near the feasibility
// bound (~1% at n = 1036, s = 16), so the budget is sized to make the
// spread fallback a practical impossibility there.
const RETRY_BUDGET: usize = 2000;

/// A fixed bit permutation with its achieved spread.
#[derive(Debug, Clone)]
pub struct Interleaver {
    /// `interleaved[i] = input[perm[i]]`.
    perm: Vec<usize>,
    /// Inverse permutation: `deinterleaved[perm[i]] = input[i]`.
    inv: Vec<usize>,
    /// Spread the permutation actually satisfies.
    s: usize,
}

impl Interleaver {
    /// Stream length.
    pub fn len(&self) -> usize {
        self.perm.len()
    }

    /// True only for the degenerate zero-length interleaver.
    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    /// Achieved spread parameter.
    pub fn spread(&self) -> usize {
        self.s
    }

    /// Permutation table (`interleaved[i] = input[perm[i]]`).
    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    /// Reorders a slice into interleaved order.
    pub fn interleave<T: Copy>(&self, input: &[T]) -> Vec<T> {
        assert_eq!(input.len(), self.perm.len());
        self.perm.iter().map(|&p| input[p]).collect()
    }

    /// Undoes [`Interleaver::interleave`].
    pub fn deinterleave<T: Copy>(&self, input: &[T]) -> Vec<T> {
        assert_eq!(input.len(), self.inv.len());
        self.inv.iter().map(|&p| input[p]).collect()
    }
}

/// Exhaustive pair scan of the spread property.
pub fn verify_spread(perm: &[usize], s: usize) -> bool {
    for i in 0..perm.len() {
        for j in i.saturating_sub(s)..i {
            if perm[i].abs_diff(perm[j]) < s {
                return false;
            }
        }
    }
    true
}

fn try_build(n: usize, s: usize, rng: &mut impl Rng) -> Option<Vec<usize>> {
    let mut pool: Vec<usize> = (0..n).collect();
    pool.shuffle(rng);
    let mut placed: Vec<usize> = Vec::with_capacity(n);
    for i in 0..n {
        let window = &placed[i.saturating_sub(s)..];
        let pick = pool
            .iter()
            .position(|&cand| window.iter().all(|&prev| cand.abs_diff(prev) >= s))?;
        placed.push(pool.remove(pick));
    }
    Some(placed)
}

/// Builds an S-random interleaver of length `n`, deterministic in the
/// RNG state. `s` must satisfy the feasibility heuristic `2·s² ≤ n`;
/// if construction keeps failing the spread is lowered one step at a
/// time (`s = 0` always succeeds), and the achieved value is reported
/// by [`Interleaver::spread`].
pub fn make_s_random(n: usize, s: usize, rng: &mut impl Rng) -> Interleaver {
    assert!(n > 0);
    assert!(2 * s * s <= n, "spread {s} infeasible for length {n}");
    let mut s_eff = s;
    let perm = loop {
        if let Some(perm) = (0..RETRY_BUDGET).find_map(|_| try_build(n, s_eff, rng)) {
            break perm;
        }
        s_eff -= 1;
    };
    debug_assert!(verify_spread(&perm, s_eff));
    let mut inv = vec![0usize; n];
    for (i, &p) in perm.iter().enumerate() {
        inv[p] = i;
    }
    Interleaver { perm, inv, s: s_eff }
}
