//! Deterministic parallel reduction.
//!
//! Work is cut into leaves whose boundaries depend only on the problem size.
//! Leaves are combined along a fixed binary tree (split at the midpoint of
//! the leaf range), so the floating-point result is bit-identical for any
//! number of worker threads. `rayon::join` only decides which thread runs a
//! subtree, never the order of the combination.

/// Types that can be combined pairwise. `merge` must be associative up to
/// rounding; the tree fixes the rounding.
pub trait Merge: Clone + Send + Sync {
    fn merge(&mut self, other: &Self);
}

impl Merge for f64 {
    fn merge(&mut self, other: &Self) {
        *self += *other;
    }
}

impl<const N: usize> Merge for [f64; N] {
    fn merge(&mut self, other: &Self) {
        for (a, b) in self.iter_mut().zip(other) {
            *a += *b;
        }
    }
}

impl<A: Merge, B: Merge> Merge for (A, B) {
    fn merge(&mut self, other: &Self) {
        self.0.merge(&other.0);
        self.1.merge(&other.1);
    }
}

/// Reduces leaves `0..n_leaves` along the fixed midpoint tree.
///
/// Panics if `n_leaves == 0`.
pub fn tree_reduce<A, L>(n_leaves: usize, leaf: &L) -> A
where
    A: Merge,
    L: Fn(usize) -> A + Sync,
{
    assert!(n_leaves > 0, "tree_reduce needs at least one leaf");
    reduce_range(0, n_leaves, leaf)
}

fn reduce_range<A, L>(lo: usize, hi: usize, leaf: &L) -> A
where
    A: Merge,
    L: Fn(usize) -> A + Sync,
{
    if hi - lo == 1 {
        return leaf(lo);
    }
    let mid = lo + (hi - lo) / 2;
    let (mut left, right) = rayon::join(|| reduce_range(lo, mid, leaf), || reduce_range(mid, hi, leaf));
    left.merge(&right);
    left
}

/// Fallible variant of [`tree_reduce`]; the first error in tree order wins.
pub fn try_tree_reduce<A, E, L>(n_leaves: usize, leaf: &L) -> Result<A, E>
where
    A: Merge,
    E: Send,
    L: Fn(usize) -> Result<A, E> + Sync,
{
    assert!(n_leaves > 0, "tree_reduce needs at least one leaf");
    try_reduce_range(0, n_leaves, leaf)
}

fn try_reduce_range<A, E, L>(lo: usize, hi: usize, leaf: &L) -> Result<A, E>
where
    A: Merge,
    E: Send,
    L: Fn(usize) -> Result<A, E> + Sync,
{
    if hi - lo == 1 {
        return leaf(lo);
    }
    let mid = lo + (hi - lo) / 2;
    let (left, right) = rayon::join(|| try_reduce_range(lo, mid, leaf), || try_reduce_range(mid, hi, leaf));
    let mut left = left?;
    left.merge(&right?);
    Ok(left)
}

/// Pairwise (cascade) sum with the same fixed tree, sequential.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const BASE: usize = 8;
    if values.len() <= BASE {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pool(n: usize) -> rayon::ThreadPool {
        rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap()
    }

    #[test]
    fn thread_count_does_not_change_bits() {
        let leaf = |i: usize| -> f64 {
            let x = (i as f64 * 0.618_033_988_7).fract();
            (1.0 + 1e6 * x).ln() * 1e-3 + 1e10 * (i % 3) as f64
        };
        let one = pool(1).install(|| tree_reduce(10_007, &leaf));
        for n in [2, 3, 8] {
            let many = pool(n).install(|| tree_reduce(10_007, &leaf));
            assert_eq!(one.to_bits(), many.to_bits());
        }
    }

    #[test]
    fn pairwise_matches_exact_small_integers() {
        let v: Vec<f64> = (1..=1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&v), 500_500.0);
        assert_eq!(tree_reduce(1000, &|i| (i + 1) as f64), 500_500.0);
    }

    #[test]
    fn errors_propagate() {
        let r: Result<f64, String> =
            try_tree_reduce(16, &|i| if i == 5 { Err(format!("leaf {i}")) } else { Ok(1.0) });
        assert_eq!(r, Err("leaf 5".into()));
    }
}
