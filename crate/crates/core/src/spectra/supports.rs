//! Lexicographic enumeration of k-subsets of `0..n`.

use crate::error::{Error, Result};

/// `C(n, k)`, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // exact: acc * (n - i) is divisible by (i + 1)
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

pub fn check_cap(n: usize, k: usize, cap: u128) -> Result<u128> {
    let count = binomial(n, k);
    if count > cap {
        return Err(Error::TooManySupports { count, cap });
    }
    Ok(count)
}

/// The `rank`-th k-subset of `0..n` in lexicographic order.
pub fn unrank(n: usize, k: usize, mut rank: u128) -> Vec<usize> {
    let mut out = Vec::with_capacity(k);
    let mut next = 0;
    for slot in 0..k {
        let remaining = k - slot - 1;
        loop {
            let block = binomial(n - next - 1, remaining);
            if rank < block {
                break;
            }
            rank -= block;
            next += 1;
        }
        out.push(next);
        next += 1;
    }
    out
}

/// Advances to the lexicographic successor; false when `s` was the last subset.
pub fn next_subset(s: &mut [usize], n: usize) -> bool {
    let k = s.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if s[i] < n - k + i {
            s[i] += 1;
            for j in (i + 1)..k {
                s[j] = s[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

const CHUNK: u128 = 2048;

/// Folds `f` over every k-subset in parallel chunks and combines the
/// per-chunk results in rank order, so the output is schedule independent.
pub fn fold_subsets<T, F, R>(n: usize, k: usize, identity: T, f: F, reduce: R) -> T
where
    T: Clone + Send + Sync,
    F: Fn(u128, &[usize]) -> T + Sync + Send,
    R: Fn(T, T) -> T + Sync + Send,
{
    let total = binomial(n, k);
    if total == 0 {
        return identity;
    }
    let chunks = total.div_ceil(CHUNK) as usize;
    let partials = crate::par::map_indices(chunks, |c| {
        let start = c as u128 * CHUNK;
        let end = (start + CHUNK).min(total);
        let mut s = unrank(n, k, start);
        let mut acc = identity.clone();
        let mut rank = start;
        loop {
            acc = reduce(acc, f(rank, &s));
            rank += 1;
            if rank == end || !next_subset(&mut s, n) {
                break;
            }
        }
        acc
    });
    partials.into_iter().fold(identity, reduce)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials() {
        assert_eq!(binomial(8, 2), 28);
        assert_eq!(binomial(32, 8), 10_518_300);
        assert_eq!(binomial(3, 5), 0);
        assert_eq!(binomial(5, 0), 1);
    }

    #[test]
    fn unrank_matches_successor_walk() {
        let (n, k) = (7, 3);
        let mut s: Vec<usize> = (0..k).collect();
        let mut rank = 0u128;
        loop {
            assert_eq!(unrank(n, k, rank), s);
            rank += 1;
            if !next_subset(&mut s, n) {
                break;
            }
        }
        assert_eq!(rank, binomial(n, k));
    }

    #[test]
    fn fold_counts_everything() {
        let count = fold_subsets(20, 3, 0u64, |_, _| 1, |a, b| a + b);
        assert_eq!(count as u128, binomial(20, 3));
        let sum_ranks = fold_subsets(9, 2, 0u128, |r, _| r, |a, b| a + b);
        assert_eq!(sum_ranks, (0..36u128).sum());
    }
}
