use std::fmt;

use serde::{Deserialize, Serialize};

/// Exponent vector `α = (α₁, …, α_n)` of a monomial `z^α`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(entries: Vec<u32>) -> Self {
        MultiIndex(entries)
    }

    pub fn zero(n: usize) -> Self {
        MultiIndex(vec![0; n])
    }

    /// The unit index `e_j`.
    pub fn unit(n: usize, j: usize) -> Self {
        let mut e = vec![0; n];
        e[j] = 1;
        MultiIndex(e)
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Total degree `|α|`.
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn plus(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `α!` as a float.
    pub fn factorial(&self) -> f64 {
        self.0.iter().map(|&a| factorial(a)).product()
    }

    /// All indices of dimension `n` with `|α| ≤ max_degree`, in graded
    /// order: by total degree, then lexicographically with larger leading
    /// exponents first.
    pub fn graded(n: usize, max_degree: u32) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        for d in 0..=max_degree {
            let mut cur = vec![0u32; n];
            fill_degree(n, 0, d, &mut cur, &mut out);
        }
        out
    }

    /// All indices with `|α| = degree` exactly, in the same order.
    pub fn of_degree(n: usize, degree: u32) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        let mut cur = vec![0u32; n];
        fill_degree(n, 0, degree, &mut cur, &mut out);
        out
    }
}

fn fill_degree(n: usize, pos: usize, remaining: u32, cur: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
    if n == 0 {
        if remaining == 0 {
            out.push(MultiIndex(Vec::new()));
        }
        return;
    }
    if pos == n - 1 {
        cur[pos] = remaining;
        out.push(MultiIndex(cur.clone()));
        return;
    }
    for a in (0..=remaining).rev() {
        cur[pos] = a;
        fill_degree(n, pos + 1, remaining - a, cur, out);
    }
    cur[pos] = 0;
}

pub(crate) fn factorial(k: u32) -> f64 {
    (1..=k).map(f64::from).product()
}

/// `k (k-1) ⋯ (k-m+1)`, zero when `m > k`.
pub(crate) fn falling(k: u32, m: u32) -> f64 {
    if m > k {
        return 0.0;
    }
    ((k - m + 1)..=k).map(f64::from).product()
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn graded_counts_match_binomials() {
        // C(n + d, n) indices of degree ≤ d
        assert_eq!(MultiIndex::graded(1, 5).len(), 6);
        assert_eq!(MultiIndex::graded(2, 12).len(), 91);
        assert_eq!(MultiIndex::graded(3, 4).len(), 35);
    }

    #[test]
    fn graded_order_is_degree_major_without_duplicates() {
        let idx = MultiIndex::graded(3, 5);
        let set: HashSet<_> = idx.iter().cloned().collect();
        assert_eq!(set.len(), idx.len());
        for w in idx.windows(2) {
            assert!(w[0].degree() <= w[1].degree());
            if w[0].degree() == w[1].degree() {
                assert!(w[0] > w[1]);
            }
        }
        assert_eq!(idx[0], MultiIndex::zero(3));
        assert_eq!(idx[1], MultiIndex::new(vec![1, 0, 0]));
    }

    #[test]
    fn falling_factorials() {
        assert_eq!(falling(5, 2), 20.0);
        assert_eq!(falling(1, 2), 0.0);
        assert_eq!(falling(3, 0), 1.0);
        assert_eq!(factorial(4), 24.0);
    }
}
