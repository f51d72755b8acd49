//! Set partitions and the multivariate chain rule built on them.

use crate::C64;

/// All set partitions of `{0, …, m-1}`. Each block lists its elements in
/// increasing order.
pub fn set_partitions(m: usize) -> Vec<Vec<Vec<usize>>> {
    let mut out = Vec::new();
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    extend(0, m, &mut blocks, &mut out);
    out
}

fn extend(next: usize, m: usize, blocks: &mut Vec<Vec<usize>>, out: &mut Vec<Vec<Vec<usize>>>) {
    if next == m {
        out.push(blocks.clone());
        return;
    }
    for b in 0..blocks.len() {
        blocks[b].push(next);
        extend(next + 1, m, blocks, out);
        blocks[b].pop();
    }
    blocks.push(vec![next]);
    extend(next + 1, m, blocks, out);
    blocks.pop();
}

/// Mixed partial derivative of `F(s(x))` with respect to `m` labelled
/// derivative operators, by Faà di Bruno over set partitions:
///
/// ```text
/// ∂_S F(s) = Σ_π F^(|π|)(s) ∏_{B ∈ π} ∂_B s
/// ```
///
/// `outer[k]` holds `F^(k)(s)` for `k = 0..=m`; `inner(block)` returns the
/// derivative of `s` with respect to the operators in `block`.
pub fn chain_rule(m: usize, outer: &[C64], mut inner: impl FnMut(&[usize]) -> C64) -> C64 {
    if m == 0 {
        return outer[0];
    }
    let mut total = C64::new(0.0, 0.0);
    for partition in set_partitions(m) {
        let mut term = outer[partition.len()];
        for block in &partition {
            if term == C64::new(0.0, 0.0) {
                break;
            }
            term *= inner(block);
        }
        total += term;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bell_numbers() {
        let bell = [1, 1, 2, 5, 15, 52];
        for (m, &b) in bell.iter().enumerate() {
            assert_eq!(set_partitions(m).len(), b, "m = {m}");
        }
    }

    #[test]
    fn chain_rule_matches_exp_of_square() {
        // F = exp, s(x) = x²; d⁴/dx⁴ exp(x²) = (16x⁴ + 48x² + 12) exp(x²)
        let x = 0.7f64;
        let e = (x * x).exp();
        let outer = vec![C64::new(e, 0.0); 5];
        let got = chain_rule(4, &outer, |block| match block.len() {
            1 => C64::new(2.0 * x, 0.0),
            2 => C64::new(2.0, 0.0),
            _ => C64::new(0.0, 0.0),
        });
        let want = (16.0 * x.powi(4) + 48.0 * x * x + 12.0) * e;
        assert!((got.re - want).abs() < 1e-12 * want);
    }
}
