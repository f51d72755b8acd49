use serde::{Deserialize, Serialize};

use crate::multi_index::falling;
use crate::{Error, MultiIndex, Result, C64};

/// Graded monomial basis `((z − c)/s)^α`, `|α| ≤ degree`.
///
/// The center and scale do not change the spanned polynomial space, only
/// the conditioning of its Gram matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Basis {
    pub indices: Vec<MultiIndex>,
    pub center: Vec<C64>,
    pub scale: f64,
    pub degree: u32,
}

impl Basis {
    pub fn graded(n: usize, degree: u32) -> Self {
        Basis::graded_at(vec![C64::new(0.0, 0.0); n], 1.0, degree)
    }

    pub fn graded_at(center: Vec<C64>, scale: f64, degree: u32) -> Self {
        Basis {
            indices: MultiIndex::graded(center.len(), degree),
            center,
            scale,
            degree,
        }
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Sub-basis with the given positions, in the given order.
    pub fn select(&self, positions: &[usize]) -> Basis {
        Basis {
            indices: positions.iter().map(|&i| self.indices[i].clone()).collect(),
            center: self.center.clone(),
            scale: self.scale,
            degree: self.degree,
        }
    }

    pub fn check_point(&self, z: &[C64]) -> Result<()> {
        if z.len() != self.dim() {
            return Err(Error::InvalidInput(format!(
                "point has dimension {}, basis has {}",
                z.len(),
                self.dim()
            )));
        }
        Ok(())
    }

    fn powers(&self, z: &[C64], max_pow: u32) -> Vec<Vec<C64>> {
        z.iter()
            .zip(&self.center)
            .map(|(z, c)| {
                let w = (z - c) / self.scale;
                let mut p = Vec::with_capacity(max_pow as usize + 1);
                let mut acc = C64::new(1.0, 0.0);
                for _ in 0..=max_pow {
                    p.push(acc);
                    acc *= w;
                }
                p
            })
            .collect()
    }

    /// Values of all monomials at `z`.
    pub fn values(&self, z: &[C64]) -> Vec<C64> {
        let pw = self.powers(z, self.degree);
        self.indices
            .iter()
            .map(|a| a.entries().iter().enumerate().map(|(j, &e)| pw[j][e as usize]).product())
            .collect()
    }

    /// Holomorphic derivative `∂^d` of every monomial at `z`.
    pub fn derivatives(&self, z: &[C64], d: &MultiIndex) -> Vec<C64> {
        let pw = self.powers(z, self.degree);
        let inv_scale = self.scale.powi(-(d.degree() as i32));
        self.indices
            .iter()
            .map(|a| {
                let mut v = C64::new(inv_scale, 0.0);
                for (j, (&e, &k)) in a.entries().iter().zip(d.entries()).enumerate() {
                    if k > e {
                        return C64::new(0.0, 0.0);
                    }
                    v *= pw[j][(e - k) as usize] * falling(e, k);
                }
                v
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;

    #[test]
    fn derivatives_match_finite_differences() {
        let b = Basis::graded_at(vec![c64(0.3, -0.1), c64(0.0, 0.2)], 0.7, 4);
        let z = [c64(0.2, 0.1), c64(-0.3, 0.4)];
        let h = 1e-6;
        for j in 0..2 {
            let d = MultiIndex::unit(2, j);
            let an = b.derivatives(&z, &d);
            let mut zp = z;
            zp[j] += h;
            let mut zm = z;
            zm[j] -= h;
            let (vp, vm) = (b.values(&zp), b.values(&zm));
            for k in 0..b.len() {
                let fd = (vp[k] - vm[k]) / (2.0 * h);
                assert!((fd - an[k]).norm() < 1e-7 * (1.0 + an[k].norm()));
            }
        }
    }

    #[test]
    fn zeroth_derivative_is_value() {
        let b = Basis::graded(3, 3);
        let z = [c64(0.1, 0.2), c64(0.3, 0.0), c64(-0.2, 0.5)];
        assert_eq!(b.values(&z), b.derivatives(&z, &MultiIndex::zero(3)));
    }
}
