//! Seeded random subsets of the candidate grid.
//!
//! The generator is ChaCha8 (`rand_chacha`) seeded with
//! `ChaCha8Rng::seed_from_u64(seed)`; a subset is drawn with
//! `rand::seq::index::sample` and returned sorted. ChaCha8 and its seeding
//! are specified independently of platform and word size.

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// `budget` distinct grid indices, sorted ascending.
pub fn random_subset(grid_len: usize, budget: usize, seed: u64) -> Vec<usize> {
    assert!(budget <= grid_len, "budget {budget} exceeds grid size {grid_len}");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = index::sample(&mut rng, grid_len, budget).into_vec();
    v.sort_unstable();
    v
}

/// `|initial| + ⌈selected / 2⌉`, capped at the grid size.
pub fn default_random_budget(initial: usize, selected: usize, grid_len: usize) -> usize {
    (initial + selected.div_ceil(2)).min(grid_len)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subsets_are_sorted_distinct_and_reproducible() {
        let a = random_subset(100, 30, 10);
        assert_eq!(a.len(), 30);
        assert!(a.windows(2).all(|w| w[0] < w[1]));
        assert!(a.iter().all(|&i| i < 100));
        assert_eq!(a, random_subset(100, 30, 10));
        assert_ne!(a, random_subset(100, 30, 20));
        assert_eq!(random_subset(7, 7, 3), (0..7).collect::<Vec<_>>());
    }

    #[test]
    fn budget_rule() {
        assert_eq!(default_random_budget(21, 33, 100), 38);
        assert_eq!(default_random_budget(11, 0, 50), 11);
        assert_eq!(default_random_budget(11, 9, 50), 16);
        assert_eq!(default_random_budget(60, 80, 100), 100);
    }
}
