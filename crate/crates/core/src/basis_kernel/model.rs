use serde::{Deserialize, Serialize};

use super::{gram_general, monomial_norm_closed, Basis, KernelDerivTable, KernelSource};
use crate::domains::{DomainSpec, QuadratureRule};
use crate::linalg::{lower_triangular_inverse, pivoted_cholesky, CMatrix};
use crate::{Error, MultiIndex, Result, C64};

/// Default drop tolerance for pivoted Cholesky, relative to the largest pivot.
pub const DEFAULT_DROP_TOL: f64 = 1e-12;

/// Default truncation degree.
pub const DEFAULT_DEGREE: u32 = 12;

/// Output of [`orthonormalize`].
#[derive(Debug, Clone)]
pub struct Orthonormalization {
    /// Lower-triangular `C` with `φ_j = Σ_{k ≤ j} C_{jk} m_{order[k]}`.
    pub coeff: CMatrix,
    /// Retained basis positions in pivot order.
    pub order: Vec<usize>,
    /// Largest over smallest retained pivot.
    pub cond_estimate: f64,
    pub dropped: Vec<usize>,
}

/// Orthonormalizes a monomial basis with Gram matrix `gram` by pivoted
/// Cholesky; pivots below `drop_tol` times the largest diagonal entry are
/// dropped and reported.
pub fn orthonormalize(gram: &CMatrix, drop_tol: f64) -> Result<Orthonormalization> {
    let f = pivoted_cholesky(gram, drop_tol)?;
    let coeff = lower_triangular_inverse(&f.factor);
    let hi = f.pivots.iter().copied().fold(f64::MIN, f64::max);
    let lo = f.pivots.iter().copied().fold(f64::MAX, f64::min);
    Ok(Orthonormalization {
        coeff,
        order: f.order,
        cond_estimate: hi / lo,
        dropped: f.dropped,
    })
}

fn orthonormalize_diagonal(gram: &CMatrix, drop_tol: f64) -> Result<Orthonormalization> {
    let n = gram.nrows();
    let diag: Vec<f64> = (0..n).map(|i| gram[(i, i)].re).collect();
    let largest = diag.iter().copied().fold(0.0f64, f64::max);
    let mut order: Vec<usize> = (0..n).filter(|&i| diag[i] > drop_tol * largest && diag[i] > 0.0).collect();
    order.sort_by(|&a, &b| diag[b].total_cmp(&diag[a]));
    if order.is_empty() {
        return Err(Error::EmptySpace { largest_pivot: largest });
    }
    let dropped = (0..n).filter(|i| !order.contains(i)).collect();
    let coeff = CMatrix::from_fn(order.len(), order.len(), |j, k| {
        if j == k {
            C64::new(diag[order[j]].sqrt().recip(), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let pivots: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
    Ok(Orthonormalization {
        coeff,
        cond_estimate: pivots[0] / pivots[pivots.len() - 1],
        order,
        dropped,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NormSource {
    ClosedForm,
    Quadrature { rule: String },
}

/// A truncated Bergman space: orthonormal polynomials `φ_j` on a domain.
/// Immutable once built.
#[derive(Debug, Clone)]
pub struct KernelModel {
    domain: DomainSpec,
    basis: Basis,
    order: Vec<usize>,
    coeff: CMatrix,
    cond_estimate: f64,
    dropped: Vec<usize>,
    norm_source: NormSource,
    diagonal: bool,
}

impl KernelModel {
    /// Model from an explicit Gram matrix of `basis` on `domain`. The Gram
    /// matrix is scaled to unit diagonal before pivoting, so `drop_tol` and
    /// `cond_estimate` refer to the equilibrated matrix.
    pub fn from_gram(
        domain: DomainSpec,
        basis: Basis,
        gram: &CMatrix,
        drop_tol: f64,
        norm_source: NormSource,
    ) -> Result<Self> {
        if gram.nrows() != basis.len() {
            return Err(Error::InvalidInput("Gram matrix size does not match basis".into()));
        }
        // equilibrate so that the drop threshold sees linear dependence
        // rather than the spread of monomial norms
        let d: Vec<f64> = (0..gram.nrows())
            .map(|i| if gram[(i, i)].re > 0.0 { gram[(i, i)].re.sqrt() } else { 1.0 })
            .collect();
        let scaled = CMatrix::from_fn(gram.nrows(), gram.ncols(), |i, j| gram[(i, j)] / (d[i] * d[j]));
        let mut o = if is_diagonal(&scaled) {
            orthonormalize_diagonal(&scaled, drop_tol)?
        } else {
            orthonormalize(&scaled, drop_tol)?
        };
        for k in 0..o.order.len() {
            let dk = d[o.order[k]];
            for j in 0..o.order.len() {
                o.coeff[(j, k)] /= dk;
            }
        }
        let diagonal = is_diagonal(&o.coeff);
        Ok(KernelModel {
            domain,
            basis,
            order: o.order,
            coeff: o.coeff,
            cond_estimate: o.cond_estimate,
            dropped: o.dropped,
            norm_source,
            diagonal,
        })
    }

    pub fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn degree(&self) -> u32 {
        self.basis.degree
    }

    /// Number of orthonormal functions retained.
    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn coeff(&self) -> &CMatrix {
        &self.coeff
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn cond_estimate(&self) -> f64 {
        self.cond_estimate
    }

    pub fn dropped(&self) -> &[usize] {
        &self.dropped
    }

    pub fn norm_source(&self) -> &NormSource {
        &self.norm_source
    }

    /// `D^a φ_j(p)` for every retained `j`.
    pub fn basis_derivatives(&self, p: &[C64], a: &MultiIndex) -> Vec<C64> {
        let mono = self.basis.derivatives(p, a);
        let r = self.order.len();
        if self.diagonal {
            return (0..r).map(|j| self.coeff[(j, j)] * mono[self.order[j]]).collect();
        }
        (0..r)
            .map(|j| (0..=j).map(|k| self.coeff[(j, k)] * mono[self.order[k]]).sum())
            .collect()
    }

    /// `φ_j(p)` for every retained `j`.
    pub fn basis_values(&self, p: &[C64]) -> Vec<C64> {
        self.basis_derivatives(p, &MultiIndex::zero(self.basis.dim()))
    }

    /// `K(p, p̄) = Σ |φ_j(p)|²`.
    pub fn kernel(&self, p: &[C64]) -> f64 {
        self.basis_values(p).iter().map(|v| v.norm_sqr()).sum()
    }

    /// Gram matrix of the retained monomials (in pivot order) under the
    /// model's inner product, reconstructed from `C`: `G' = C⁻¹ C⁻*`.
    pub fn retained_gram(&self) -> CMatrix {
        let l = lower_triangular_inverse(&self.coeff);
        &l * l.adjoint()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&ModelFile::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: ModelFile = serde_json::from_str(text)?;
        f.try_into()
    }
}

fn is_diagonal(m: &CMatrix) -> bool {
    (0..m.nrows()).all(|j| (0..j).all(|k| m[(j, k)] == C64::new(0.0, 0.0)))
}

/// Builds a truncated Bergman space of total degree `degree`.
///
/// Reinhardt domains use closed-form monomial norms (diagonal Gram, monomials
/// about the domain center); general domains need a quadrature rule.
pub fn build_model(domain: &DomainSpec, degree: u32, quad: Option<&QuadratureRule>) -> Result<KernelModel> {
    build_model_with(domain, Basis::graded_at(domain.center(), 1.0, degree), quad, DEFAULT_DROP_TOL)
}

/// [`build_model`] with an explicit basis and drop tolerance. Closed-form
/// norms are used only when the domain is Reinhardt, no quadrature is given
/// and the basis is centered at the domain center.
pub fn build_model_with(domain: &DomainSpec, basis: Basis, quad: Option<&QuadratureRule>, drop_tol: f64) -> Result<KernelModel> {
    domain.validate()?;
    if basis.dim() != domain.dim() {
        return Err(Error::InvalidInput("basis dimension does not match domain".into()));
    }
    match quad {
        None if domain.is_reinhardt() => {
            if basis.center != domain.center() {
                return Err(Error::InvalidInput(
                    "closed-form norms need a basis centered at the domain center".into(),
                ));
            }
            let n = basis.len();
            let mut gram = CMatrix::zeros(n, n);
            for (j, a) in basis.indices.iter().enumerate() {
                let norm = monomial_norm_closed(domain, a)? * basis.scale.powi(-2 * a.degree() as i32);
                gram[(j, j)] = C64::new(norm, 0.0);
            }
            KernelModel::from_gram(domain.clone(), basis, &gram, drop_tol, NormSource::ClosedForm)
        }
        None => Err(Error::UnsupportedVariant {
            op: "build_model without quadrature",
            variant: domain.variant_name().into(),
        }),
        Some(q) => {
            if q.is_empty() {
                return Err(Error::EmptyQuadrature);
            }
            let gram = gram_general(&basis, q);
            KernelModel::from_gram(domain.clone(), basis, &gram, drop_tol, NormSource::Quadrature { rule: q.id() })
        }
    }
}

impl KernelSource for KernelModel {
    fn dim(&self) -> usize {
        self.basis.dim()
    }

    fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    fn derivs(&self, p: &[C64]) -> Result<KernelDerivTable> {
        super::kernel_derivs(self, p)
    }

    fn truncation_degree(&self) -> Option<u32> {
        Some(self.basis.degree)
    }

    fn cond_estimate(&self) -> Option<f64> {
        Some(self.cond_estimate)
    }

    fn describe(&self) -> String {
        format!(
            "truncated {} degree {} ({} functions, {} dropped)",
            self.domain.variant_name(),
            self.basis.degree,
            self.order.len(),
            self.dropped.len()
        )
    }
}

/// Serialized form of a [`KernelModel`].
#[derive(Serialize, Deserialize)]
struct ModelFile {
    domain: DomainSpec,
    degree: u32,
    basis: Basis,
    order: Vec<usize>,
    /// Row-major lower-triangular coefficients.
    coeff: Vec<C64>,
    cond_estimate: f64,
    dropped: Vec<usize>,
    norm_source: NormSource,
}

impl From<&KernelModel> for ModelFile {
    fn from(m: &KernelModel) -> Self {
        let r = m.order.len();
        let mut coeff = Vec::with_capacity(r * (r + 1) / 2);
        for j in 0..r {
            for k in 0..=j {
                coeff.push(m.coeff[(j, k)]);
            }
        }
        ModelFile {
            domain: m.domain.clone(),
            degree: m.basis.degree,
            basis: m.basis.clone(),
            order: m.order.clone(),
            coeff,
            cond_estimate: m.cond_estimate,
            dropped: m.dropped.clone(),
            norm_source: m.norm_source.clone(),
        }
    }
}

impl TryFrom<ModelFile> for KernelModel {
    type Error = Error;

    fn try_from(f: ModelFile) -> Result<Self> {
        let r = f.order.len();
        if f.coeff.len() != r * (r + 1) / 2 || f.order.iter().any(|&i| i >= f.basis.len()) || f.degree != f.basis.degree {
            return Err(Error::InvalidInput("inconsistent model file".into()));
        }
        let mut coeff = CMatrix::zeros(r, r);
        let mut it = f.coeff.into_iter();
        for j in 0..r {
            for k in 0..=j {
                coeff[(j, k)] = it.next().expect("length checked");
            }
        }
        let diagonal = is_diagonal(&coeff);
        Ok(KernelModel {
            domain: f.domain,
            basis: f.basis,
            order: f.order,
            coeff,
            cond_estimate: f.cond_estimate,
            dropped: f.dropped,
            norm_source: f.norm_source,
            diagonal,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;
    use crate::domains::{build_quadrature, Scheme};
    use std::f64::consts::PI;

    #[test]
    fn unit_disc_orthonormal_basis() {
        let m = build_model(&DomainSpec::unit_ball(1), 3, None).unwrap();
        assert_eq!(m.len(), 4);
        for k in 0..4 {
            let want = ((m.order()[k] as f64 + 1.0) / PI).sqrt();
            assert!((m.coeff()[(k, k)].re - want).abs() < 1e-14);
        }
    }

    #[test]
    fn ball_degree_zero() {
        let m = build_model(&DomainSpec::unit_ball(2), 0, None).unwrap();
        assert!((m.coeff()[(0, 0)].re - (2.0 / (PI * PI)).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn half_disc_quadrature_model_is_orthonormal() {
        let d = DomainSpec::half_ball(1, 1.0);
        let q = build_quadrature(&d, Scheme::TensorGrid, 200, 0).unwrap();
        let m = build_model_with(&d, Basis::graded(1, 5), Some(&q), DEFAULT_DROP_TOL).unwrap();
        let g = gram_general(m.basis(), &q);
        let ord = m.order();
        let gp = CMatrix::from_fn(ord.len(), ord.len(), |i, j| g[(ord[i], ord[j])]);
        let id = m.coeff() * gp * m.coeff().adjoint();
        let err = (id - CMatrix::identity(ord.len(), ord.len())).camax();
        assert!(err < 1e-8, "{err}");
        assert!(m.cond_estimate() > 1.0);
        assert!(m.dropped().is_empty());
    }

    #[test]
    fn general_domain_requires_quadrature() {
        let d = DomainSpec::half_ball(1, 1.0);
        assert!(build_model(&d, 2, None).is_err());
    }

    #[test]
    fn serialization_reproduces_kernel_bit_for_bit() {
        let d = DomainSpec::half_ball(2, 1.0);
        let q = build_quadrature(&d, Scheme::MonteCarlo, 20_000, 11).unwrap();
        let m = build_model_with(&d, Basis::graded(2, 3), Some(&q), DEFAULT_DROP_TOL).unwrap();
        let back = KernelModel::from_json(&m.to_json().unwrap()).unwrap();
        for p in [[c64(-0.3, 0.1), c64(0.2, 0.0)], [c64(-0.1, -0.2), c64(-0.3, 0.4)]] {
            assert_eq!(m.kernel(&p).to_bits(), back.kernel(&p).to_bits());
        }
        let e = build_model(&DomainSpec::ellipsoid(vec![1, 2]), 6, None).unwrap();
        let back = KernelModel::from_json(&e.to_json().unwrap()).unwrap();
        let p = [c64(0.3, 0.2), c64(0.1, -0.4)];
        assert_eq!(e.kernel(&p).to_bits(), back.kernel(&p).to_bits());
    }
}
