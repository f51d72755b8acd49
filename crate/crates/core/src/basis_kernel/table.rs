use std::collections::HashMap;

use serde::Serialize;

use super::KernelModel;
use crate::domains::DomainSpec;
use crate::{Error, MultiIndex, Result, C64};

/// Anything that can produce kernel derivative tables at interior points:
/// truncated models and closed-form kernels.
pub trait KernelSource: Sync {
    fn dim(&self) -> usize;
    fn domain(&self) -> &DomainSpec;
    fn derivs(&self, p: &[C64]) -> Result<KernelDerivTable>;
    /// `None` for exact (closed-form) kernels.
    fn truncation_degree(&self) -> Option<u32>;
    fn cond_estimate(&self) -> Option<f64>;
    fn describe(&self) -> String;
}

/// `D^{(a,b)} K(p, p̄)` for all `|a|, |b| ≤ 2`: holomorphic derivatives
/// `∂^a` in the first slot, anti-holomorphic `∂̄^b` in the second.
#[derive(Debug, Clone, Serialize)]
pub struct KernelDerivTable {
    pub point: Vec<C64>,
    indices: Vec<MultiIndex>,
    #[serde(skip)]
    lookup: HashMap<MultiIndex, usize>,
    /// Row-major, rows indexed by `a`, columns by `b`.
    values: Vec<C64>,
}

impl KernelDerivTable {
    /// Builds the table from a function computing `D^{(a,b)}K` for `a`
    /// at or before `b` in graded order; the rest is filled by Hermitian
    /// symmetry so that `T(b, a) = conj(T(a, b))` holds exactly.
    pub fn from_upper(point: Vec<C64>, mut f: impl FnMut(&MultiIndex, &MultiIndex) -> C64) -> Self {
        let n = point.len();
        let indices = MultiIndex::graded(n, 2);
        let m = indices.len();
        let mut values = vec![C64::new(0.0, 0.0); m * m];
        for i in 0..m {
            for j in i..m {
                let mut v = f(&indices[i], &indices[j]);
                if i == j {
                    v.im = 0.0;
                }
                values[i * m + j] = v;
                values[j * m + i] = v.conj();
            }
        }
        let lookup = indices.iter().cloned().enumerate().map(|(i, a)| (a, i)).collect();
        KernelDerivTable {
            point,
            indices,
            lookup,
            values,
        }
    }

    pub fn dim(&self) -> usize {
        self.point.len()
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    /// `D^{(a,b)}K(p, p̄)`.
    pub fn get(&self, a: &MultiIndex, b: &MultiIndex) -> C64 {
        let m = self.indices.len();
        self.values[self.lookup[a] * m + self.lookup[b]]
    }

    /// Derivative with respect to the listed holomorphic and anti-holomorphic
    /// coordinate indices (at most two of each).
    pub fn get_ops(&self, hol: &[usize], anti: &[usize]) -> C64 {
        self.get(&ops_index(self.dim(), hol), &ops_index(self.dim(), anti))
    }

    /// `K(p, p̄)`.
    pub fn k(&self) -> f64 {
        let z = MultiIndex::zero(self.dim());
        self.get(&z, &z).re
    }
}

pub(crate) fn ops_index(n: usize, ops: &[usize]) -> MultiIndex {
    let mut e = vec![0u32; n];
    for &j in ops {
        e[j] += 1;
    }
    MultiIndex::new(e)
}

/// Kernel derivative table of a truncated model, by termwise analytic
/// differentiation: `D^{(a,b)}K = Σ_j D^a φ_j(p) conj(D^b φ_j(p))`.
pub fn kernel_derivs(model: &KernelModel, p: &[C64]) -> Result<KernelDerivTable> {
    model.basis().check_point(p)?;
    if !model.domain().contains(p) {
        return Err(Error::InvalidInput("kernel derivatives need an interior point".into()));
    }
    let n = p.len();
    let cache: HashMap<MultiIndex, Vec<C64>> = MultiIndex::graded(n, 2)
        .into_iter()
        .map(|a| {
            let d = model.basis_derivatives(p, &a);
            (a, d)
        })
        .collect();
    Ok(KernelDerivTable::from_upper(p.to_vec(), |a, b| {
        cache[a].iter().zip(&cache[b]).map(|(x, y)| x * y.conj()).sum()
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis_kernel::build_model;
    use crate::c64;
    use std::f64::consts::PI;

    #[test]
    fn disc_degree_zero_at_origin() {
        let m = build_model(&DomainSpec::unit_ball(1), 0, None).unwrap();
        let t = kernel_derivs(&m, &[c64(0.0, 0.0)]).unwrap();
        assert!((t.k() - 1.0 / PI).abs() < 1e-15);
        assert_eq!(t.get_ops(&[0], &[]), c64(0.0, 0.0));
        assert_eq!(t.get_ops(&[], &[0]), c64(0.0, 0.0));
    }

    #[test]
    fn polydisc_center_kernel_is_exact() {
        let m = build_model(&DomainSpec::unit_polydisc(2), 16, None).unwrap();
        let t = kernel_derivs(&m, &[c64(0.0, 0.0), c64(0.0, 0.0)]).unwrap();
        assert!((t.k() - PI.powi(-2)).abs() < 1e-12 * PI.powi(-2));
    }

    #[test]
    fn hermitian_symmetry_is_exact() {
        let m = build_model(&DomainSpec::ellipsoid(vec![1, 2]), 8, None).unwrap();
        let t = kernel_derivs(&m, &[c64(0.3, -0.2), c64(0.1, 0.4)]).unwrap();
        for a in t.indices() {
            for b in t.indices() {
                assert_eq!(t.get(a, b), t.get(b, a).conj());
            }
        }
        assert!(t.k() > 0.0);
    }

    #[test]
    fn exterior_point_is_rejected() {
        let m = build_model(&DomainSpec::unit_ball(1), 2, None).unwrap();
        assert!(kernel_derivs(&m, &[c64(1.5, 0.0)]).is_err());
    }
}
