//! Monomial norms and Gram matrices.

use std::f64::consts::PI;

use rayon::prelude::*;

use super::Basis;
use crate::domains::{DomainSpec, QuadratureRule};
use crate::integrate::integrate;
use crate::linalg::CMatrix;
use crate::multi_index::factorial;
use crate::{Error, MultiIndex, Result, C64};

const GRAM_CHUNK: usize = 2048;

/// `‖(z − c)^α‖²_{L²(Ω)}` for Reinhardt domains about their center `c`.
///
/// Polydisc and ball use the product and `α!`-factorial formulas. The
/// ellipsoid `Σ|z_j|^{2m_j} < 1` reduces, with `u_j = |z_j|^{2m_j}`, to
/// `∏(π/m_j)` times a Dirichlet integral over the simplex, which is evaluated
/// as a product of one-dimensional integrals by adaptive Gauss–Kronrod.
pub fn monomial_norm_closed(domain: &DomainSpec, alpha: &MultiIndex) -> Result<f64> {
    if alpha.dim() != domain.dim() {
        return Err(Error::InvalidInput("multi-index dimension does not match domain".into()));
    }
    match domain {
        DomainSpec::Polydisc { radii, .. } => Ok(alpha
            .entries()
            .iter()
            .zip(radii)
            .map(|(&a, &b)| PI * b.powi(2 * a as i32 + 2) / (a as f64 + 1.0))
            .product()),
        DomainSpec::Ball { radius, .. } => {
            let n = domain.dim() as u32;
            let d = alpha.degree();
            Ok(PI.powi(n as i32) * alpha.factorial() * radius.powi(2 * (d + n) as i32) / factorial(n + d))
        }
        DomainSpec::Ellipsoid { exponents } => {
            let a: Vec<f64> = alpha
                .entries()
                .iter()
                .zip(exponents)
                .map(|(&al, &m)| (al as f64 + 1.0) / m as f64)
                .collect();
            let prefactor: f64 = exponents.iter().map(|&m| PI / m as f64).product();
            Ok(prefactor * dirichlet_integral(&a))
        }
        DomainSpec::General { .. } => Err(Error::UnsupportedVariant {
            op: "monomial_norm_closed",
            variant: "general".into(),
        }),
    }
}

/// `∫_{Σu<1, u≥0} ∏ u_j^{a_j − 1} du = ∏_j B(a_j, 1 + Σ_{k>j} a_k)`.
fn dirichlet_integral(a: &[f64]) -> f64 {
    let mut tail = 0.0;
    let mut out = 1.0;
    for &aj in a.iter().rev() {
        out *= beta_numeric(aj, 1.0 + tail);
        tail += aj;
    }
    out
}

/// `B(a, b) = ∫₀¹ u^{a−1}(1−u)^{b−1} du` with `b ≥ 1`, after the substitution
/// `u = v^{1/a}` which removes the endpoint singularity at zero.
fn beta_numeric(a: f64, b: f64) -> f64 {
    let inv = 1.0 / a;
    let (v, _) = integrate(|v: f64| (1.0 - v.powf(inv)).max(0.0).powf(b - 1.0), 0.0, 1.0, 1e-13);
    v / a
}

/// `G_{jk} = Σ_nodes w · m_j(z) · conj(m_k(z))`, assembled over fixed node
/// chunks in parallel and summed in chunk order.
pub fn gram_general(basis: &Basis, quad: &QuadratureRule) -> CMatrix {
    let n = basis.len();
    let partials: Vec<Vec<C64>> = quad
        .nodes
        .par_chunks(GRAM_CHUNK)
        .zip(quad.weights.par_chunks(GRAM_CHUNK))
        .map(|(nodes, weights)| {
            let mut acc = vec![C64::new(0.0, 0.0); n * n];
            for (z, &w) in nodes.iter().zip(weights) {
                let v = basis.values(z);
                for j in 0..n {
                    let vj = v[j] * w;
                    let row = &mut acc[j * n..];
                    for k in j..n {
                        row[k] += vj * v[k].conj();
                    }
                }
            }
            acc
        })
        .collect();
    let mut g = CMatrix::zeros(n, n);
    for part in &partials {
        for j in 0..n {
            for k in j..n {
                g[(j, k)] += part[j * n + k];
            }
        }
    }
    for j in 0..n {
        g[(j, j)].im = 0.0;
        for k in j + 1..n {
            g[(k, j)] = g[(j, k)].conj();
        }
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::{build_quadrature, Scheme};
    use statrs::function::gamma::gamma;

    /// Dirichlet/Beta–Gamma closed form, independent of the numerical path.
    fn ellipsoid_oracle(m: &[u32], alpha: &[u32]) -> f64 {
        let a: Vec<f64> = alpha.iter().zip(m).map(|(&al, &m)| (al as f64 + 1.0) / m as f64).collect();
        let num: f64 = a.iter().map(|&x| gamma(x)).product();
        let pre: f64 = m.iter().map(|&m| PI / m as f64).product();
        pre * num / gamma(1.0 + a.iter().sum::<f64>())
    }

    #[test]
    fn unit_disc_norms() {
        let d = DomainSpec::unit_ball(1);
        assert!((monomial_norm_closed(&d, &MultiIndex::new(vec![0])).unwrap() - PI).abs() < 1e-15);
        for k in 1..10u32 {
            // ∫₀¹ r^{2k} 2πr dr
            let want = 2.0 * PI / (2.0 * k as f64 + 2.0);
            let got = monomial_norm_closed(&d, &MultiIndex::new(vec![k])).unwrap();
            assert!((got - want).abs() < 1e-14 * want);
        }
    }

    #[test]
    fn polydisc_product_norm() {
        let d = DomainSpec::unit_polydisc(2);
        let got = monomial_norm_closed(&d, &MultiIndex::new(vec![1, 0])).unwrap();
        assert!((got - PI * PI / 2.0).abs() < 1e-14);
    }

    #[test]
    fn ellipsoid_matches_gamma_oracle() {
        for m in [[1u32, 1], [1, 2], [2, 3], [4, 1]] {
            let d = DomainSpec::ellipsoid(m.to_vec());
            for alpha in MultiIndex::graded(2, 6) {
                let got = monomial_norm_closed(&d, &alpha).unwrap();
                let want = ellipsoid_oracle(&m, alpha.entries());
                assert!((got - want).abs() < 1e-12 * want, "m={m:?} α={alpha}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn ellipsoid_11_equals_ball() {
        let e = DomainSpec::ellipsoid(vec![1, 1]);
        let b = DomainSpec::unit_ball(2);
        for alpha in MultiIndex::graded(2, 8) {
            let x = monomial_norm_closed(&e, &alpha).unwrap();
            let y = monomial_norm_closed(&b, &alpha).unwrap();
            assert!((x - y).abs() < 1e-13 * y);
        }
    }

    #[test]
    fn general_is_unsupported() {
        let d = DomainSpec::half_ball(1, 1.0);
        assert!(matches!(
            monomial_norm_closed(&d, &MultiIndex::zero(1)),
            Err(Error::UnsupportedVariant { .. })
        ));
    }

    #[test]
    fn disc_gram_on_fine_grid() {
        let d = DomainSpec::unit_ball(1);
        let q = build_quadrature(&d, Scheme::TensorGrid, 400, 0).unwrap();
        let g = gram_general(&Basis::graded(1, 1), &q);
        assert!((g[(0, 0)].re - PI).abs() < 0.01 * PI);
        assert!((g[(1, 1)].re - PI / 2.0).abs() < 0.01 * PI / 2.0);
        assert!(g[(0, 1)].norm() < 0.01);
        assert!((g[(0, 0)].re - q.total_mass()).abs() < 1e-11);
    }

    #[test]
    fn reinhardt_off_diagonals_shrink_with_resolution() {
        let d = DomainSpec::ellipsoid(vec![1, 2]);
        let basis = Basis::graded(2, 2);
        let off = |res: usize| {
            let g = gram_general(&basis, &build_quadrature(&d, Scheme::TensorGrid, res, 0).unwrap());
            let mut worst = 0.0f64;
            for j in 0..g.nrows() {
                for k in 0..j {
                    worst = worst.max(g[(j, k)].norm());
                }
            }
            worst
        };
        let (coarse, fine) = (off(8), off(24));
        assert!(fine <= coarse, "{coarse} -> {fine}");
        assert!(fine < 5e-3);
    }
}
