//! Exact Bergman kernels of balls and polydiscs, used as oracles and as the
//! "closed-form path" for invariance checks.

use std::f64::consts::PI;

use super::{KernelDerivTable, KernelSource};
use crate::domains::DomainSpec;
use crate::multi_index::factorial;
use crate::partitions::chain_rule;
use crate::{Error, MultiIndex, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Op {
    Hol(usize),
    Anti(usize),
}

fn ops_of(a: &MultiIndex, b: &MultiIndex) -> Vec<Op> {
    let mut ops = Vec::new();
    for (j, &e) in a.entries().iter().enumerate() {
        ops.extend(std::iter::repeat_n(Op::Hol(j), e as usize));
    }
    for (j, &e) in b.entries().iter().enumerate() {
        ops.extend(std::iter::repeat_n(Op::Anti(j), e as usize));
    }
    ops
}

/// Derivatives of `coef · s^{-q}` where `s(z, w̄) = s₀ − Σ_j κ_j (z_j − c_j)(w̄_j − c̄_j)`,
/// evaluated on the diagonal `w = z = p`.
fn bilinear_power(coef: f64, q: f64, s0: f64, kappa: &[f64], offset: &[C64], ops: &[Op]) -> C64 {
    let s: f64 = s0 - offset.iter().zip(kappa).map(|(d, k)| k * d.norm_sqr()).sum::<f64>();
    let m = ops.len();
    let mut outer = Vec::with_capacity(m + 1);
    let mut falling = 1.0;
    for k in 0..=m {
        outer.push(C64::new(coef * falling * s.powf(-q - k as f64), 0.0));
        falling *= -q - k as f64;
    }
    chain_rule(m, &outer, |block| match block {
        [i] => match ops[*i] {
            Op::Hol(j) => -offset[j].conj() * kappa[j],
            Op::Anti(j) => -offset[j] * kappa[j],
        },
        [i, k] => match (ops[*i], ops[*k]) {
            (Op::Hol(j), Op::Anti(l)) | (Op::Anti(l), Op::Hol(j)) if j == l => C64::new(-kappa[j], 0.0),
            _ => C64::new(0.0, 0.0),
        },
        _ => C64::new(0.0, 0.0),
    })
}

/// Exact kernel of a ball or polydisc:
///
/// ```text
/// K_B(z, w̄) = n!/πⁿ · r² (r² − ⟨z − c, w − c⟩)^{-(n+1)}
/// K_P(z, w̄) = ∏_j (πβ_j²)⁻¹ (1 − (z_j − c_j)(w̄_j − c̄_j)/β_j²)^{-2}
/// ```
#[derive(Debug, Clone)]
pub struct ClosedFormKernel {
    domain: DomainSpec,
}

impl ClosedFormKernel {
    pub fn new(domain: DomainSpec) -> Result<Self> {
        domain.validate()?;
        match domain {
            DomainSpec::Ball { .. } | DomainSpec::Polydisc { .. } => Ok(ClosedFormKernel { domain }),
            other => Err(Error::UnsupportedVariant {
                op: "closed-form kernel",
                variant: other.variant_name().into(),
            }),
        }
    }

    pub fn kernel(&self, p: &[C64]) -> f64 {
        let n = p.len();
        self.entry(p, &MultiIndex::zero(n), &MultiIndex::zero(n)).re
    }

    fn entry(&self, p: &[C64], a: &MultiIndex, b: &MultiIndex) -> C64 {
        match &self.domain {
            DomainSpec::Ball { center, radius } => {
                let n = center.len();
                let off: Vec<C64> = p.iter().zip(center).map(|(p, c)| p - c).collect();
                let coef = factorial(n as u32) / PI.powi(n as i32) * radius * radius;
                bilinear_power(coef, n as f64 + 1.0, radius * radius, &vec![1.0; n], &off, &ops_of(a, b))
            }
            DomainSpec::Polydisc { center, radii } => {
                let mut out = C64::new(1.0, 0.0);
                for j in 0..p.len() {
                    let aj = MultiIndex::new(vec![a.entries()[j]]);
                    let bj = MultiIndex::new(vec![b.entries()[j]]);
                    let beta2 = radii[j] * radii[j];
                    out *= bilinear_power(
                        1.0 / (PI * beta2),
                        2.0,
                        1.0,
                        &[1.0 / beta2],
                        &[p[j] - center[j]],
                        &ops_of(&aj, &bj),
                    );
                }
                out
            }
            _ => unreachable!("checked in constructor"),
        }
    }
}

impl KernelSource for ClosedFormKernel {
    fn dim(&self) -> usize {
        self.domain.dim()
    }

    fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    fn derivs(&self, p: &[C64]) -> Result<KernelDerivTable> {
        if p.len() != self.dim() || !self.domain.contains(p) {
            return Err(Error::InvalidInput("kernel derivatives need an interior point".into()));
        }
        Ok(KernelDerivTable::from_upper(p.to_vec(), |a, b| self.entry(p, a, b)))
    }

    fn truncation_degree(&self) -> Option<u32> {
        None
    }

    fn cond_estimate(&self) -> Option<f64> {
        None
    }

    fn describe(&self) -> String {
        format!("closed-form {}", self.domain.variant_name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis_kernel::{build_model, kernel_derivs};
    use crate::c64;

    #[test]
    fn ball_kernel_value() {
        let k = ClosedFormKernel::new(DomainSpec::unit_ball(2)).unwrap();
        let p = [c64(0.5, 0.0), c64(0.0, 0.0)];
        let want = 2.0 / (PI * PI) * (1.0f64 - 0.25).powi(-3);
        assert!((k.kernel(&p) - want).abs() < 1e-14 * want);
    }

    #[test]
    fn truncated_ball_series_converges_to_closed_form() {
        // the monomial series Σ |z^α|²/‖z^α‖² sums to the closed form
        let exact = ClosedFormKernel::new(DomainSpec::unit_ball(2)).unwrap();
        let model = build_model(&DomainSpec::unit_ball(2), 30, None).unwrap();
        let p = [c64(0.5, 0.0), c64(0.0, 0.0)];
        let (a, b) = (exact.kernel(&p), model.kernel(&p));
        assert!((a - b).abs() < 1e-6 * a, "{a} vs {b}");
    }

    #[test]
    fn closed_form_derivatives_match_truncated_tables() {
        for (domain, deg) in [
            (DomainSpec::unit_ball(2), 60),
            (DomainSpec::polydisc(vec![0.8, 1.3]), 60),
            (DomainSpec::ball(vec![c64(0.1, -0.2), c64(0.0, 0.3)], 1.2), 60),
        ] {
            let exact = ClosedFormKernel::new(domain.clone()).unwrap();
            let model = build_model(&domain, deg, None).unwrap();
            let p = [c64(0.15, 0.1), c64(-0.05, 0.2)];
            let (te, tm) = (exact.derivs(&p).unwrap(), kernel_derivs(&model, &p).unwrap());
            for a in te.indices() {
                for b in te.indices() {
                    let (x, y) = (te.get(a, b), tm.get(a, b));
                    assert!((x - y).norm() < 1e-9 * (1.0 + x.norm()), "{a} {b}: {x} vs {y}");
                }
            }
        }
    }

    #[test]
    fn unsupported_variant() {
        assert!(ClosedFormKernel::new(DomainSpec::ellipsoid(vec![1, 2])).is_err());
    }
}
