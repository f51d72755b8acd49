//! Bergman's minimum integrals `I⁰`, `I¹`, `I²` as equality-constrained
//! least-norm problems, and the identities and transformation laws they
//! satisfy.
//!
//! Two routes compute the same numbers. The row route applies each side
//! condition to the orthonormal basis of a [`KernelModel`] and solves the
//! least-norm problem for the coefficient vector. The kernel route only needs
//! the Gram matrix `A A*` of the side conditions, whose entries are
//! derivatives of `K(z, w̄)` and so come from any [`KernelSource`],
//! closed-form kernels included.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::basis_kernel::{KernelDerivTable, KernelModel, KernelSource};
use crate::geometry::{bisectional, curvature_tensor, holo_sectional, metric};
use crate::linalg::{hermitian_condition, hpd_solve, CMatrix};
use crate::{cdot, cnorm, Error, MultiIndex, Result, C64};

/// Largest admissible condition number of the equilibrated `A A*`.
pub const MAX_CONSTRAINT_COND: f64 = 1e12;

/// A linear side condition on `f` at the point.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ConstraintKind {
    /// `f(p)`.
    Eval,
    /// `Σ X_i ∂f/∂z_i(p)`.
    FirstDeriv { x: Vec<C64> },
    /// `∂f/∂z_j(p)`.
    AllFirstDerivs { j: usize },
    /// `Σ_{j,k} X_j Y_k ∂²f/∂z_j∂z_k(p)`.
    SecondDeriv { x: Vec<C64>, y: Vec<C64> },
}

impl ConstraintKind {
    /// The functional as a combination `Σ c_a ∂^a` of holomorphic
    /// derivatives.
    pub fn functional(&self, n: usize) -> Vec<(MultiIndex, C64)> {
        let unit = |j: usize| MultiIndex::unit(n, j);
        match self {
            ConstraintKind::Eval => vec![(MultiIndex::zero(n), C64::new(1.0, 0.0))],
            ConstraintKind::FirstDeriv { x } => (0..n).map(|i| (unit(i), x[i])).collect(),
            ConstraintKind::AllFirstDerivs { j } => vec![(unit(*j), C64::new(1.0, 0.0))],
            ConstraintKind::SecondDeriv { x, y } => {
                let mut terms: Vec<(MultiIndex, C64)> = Vec::new();
                for j in 0..n {
                    for k in 0..n {
                        let a = unit(j).plus(&unit(k));
                        let c = x[j] * y[k];
                        match terms.iter_mut().find(|(b, _)| *b == a) {
                            Some(t) => t.1 += c,
                            None => terms.push((a, c)),
                        }
                    }
                }
                terms
            }
        }
    }

    fn check(&self, n: usize) -> Result<()> {
        let bad = match self {
            ConstraintKind::Eval => false,
            ConstraintKind::FirstDeriv { x } => x.len() != n,
            ConstraintKind::AllFirstDerivs { j } => *j >= n,
            ConstraintKind::SecondDeriv { x, y } => x.len() != n || y.len() != n,
        };
        if bad {
            return Err(Error::InvalidInput(format!("constraint {self:?} does not fit dimension {n}")));
        }
        Ok(())
    }
}

/// One side condition applied to each orthonormal basis element.
#[derive(Debug, Clone, Serialize)]
pub struct ConstraintRow {
    pub kind: ConstraintKind,
    pub point: Vec<C64>,
    pub coefficients: Vec<C64>,
}

impl ConstraintRow {
    /// Row of `kind` at `p` for the orthonormal basis of `model`.
    pub fn new(model: &KernelModel, kind: ConstraintKind, p: &[C64]) -> Result<Self> {
        let n = model.basis().dim();
        kind.check(n)?;
        let mut coefficients = vec![C64::new(0.0, 0.0); model.len()];
        for (a, c) in kind.functional(n) {
            if c == C64::new(0.0, 0.0) {
                continue;
            }
            for (acc, d) in coefficients.iter_mut().zip(model.basis_derivatives(p, &a)) {
                *acc += c * d;
            }
        }
        Ok(ConstraintRow {
            kind,
            point: p.to_vec(),
            coefficients,
        })
    }

    /// Row with explicitly given coefficients.
    pub fn from_coefficients(kind: ConstraintKind, point: Vec<C64>, coefficients: Vec<C64>) -> Self {
        ConstraintRow {
            kind,
            point,
            coefficients,
        }
    }
}

/// Minimizer of `‖c‖²` subject to `A c = b`.
#[derive(Debug, Clone, Serialize)]
pub struct MinIntResult {
    pub value: f64,
    /// Minimizer in the orthonormal basis.
    pub coeffs: Vec<C64>,
    /// `max_r |(A c − b)_r|`.
    pub residual: f64,
    /// Condition number of the equilibrated `A A*`.
    pub condition: f64,
}

/// Solves `(A A*) y = b` after checking conditioning; returns `y` and the
/// condition number of the unit-diagonal scaling of `A A*`.
fn solve_gram(gram: &CMatrix, rhs: &[C64], context: &str) -> Result<(Vec<C64>, f64)> {
    let m = gram.nrows();
    let diag: Vec<f64> = (0..m).map(|i| gram[(i, i)].re).collect();
    let dmax = diag.iter().copied().fold(0.0f64, f64::max);
    if !diag.iter().all(|d| d.is_finite() && *d > 1e-300 && *d > 1e-24 * dmax) {
        return Err(Error::DegenerateConstraints {
            context: context.into(),
            condition: f64::INFINITY,
        });
    }
    let s: Vec<f64> = diag.iter().map(|d| d.sqrt()).collect();
    let scaled = CMatrix::from_fn(m, m, |i, j| gram[(i, j)] / (s[i] * s[j]));
    let condition = hermitian_condition(&scaled);
    if !(condition <= MAX_CONSTRAINT_COND) {
        return Err(Error::DegenerateConstraints {
            context: context.into(),
            condition,
        });
    }
    let scaled_rhs: Vec<C64> = rhs.iter().zip(&s).map(|(b, s)| b / s).collect();
    let y = hpd_solve(&scaled, &scaled_rhs).ok_or_else(|| Error::DegenerateConstraints {
        context: context.into(),
        condition,
    })?;
    Ok((y.iter().zip(&s).map(|(y, s)| y / s).collect(), condition))
}

/// Least-norm solution `c = A*(A A*)⁻¹ b`, value `b*(A A*)⁻¹ b`.
pub fn solve_min_norm(rows: &[ConstraintRow], rhs: &[C64]) -> Result<MinIntResult> {
    if rows.is_empty() || rows.len() != rhs.len() {
        return Err(Error::InvalidInput("need one right-hand side per constraint row".into()));
    }
    let n = rows[0].coefficients.len();
    if rows.iter().any(|r| r.coefficients.len() != n) {
        return Err(Error::InvalidInput("constraint rows have different lengths".into()));
    }
    if n < rows.len() {
        return Err(Error::TooFewBasisElements {
            basis: n,
            constraints: rows.len(),
        });
    }
    let m = rows.len();
    let gram = CMatrix::from_fn(m, m, |r, s| cdot(&rows[r].coefficients, &rows[s].coefficients));
    let (y, condition) = solve_gram(&gram, rhs, "minimum-norm constraints")?;
    let mut coeffs = vec![C64::new(0.0, 0.0); n];
    for (row, yr) in rows.iter().zip(&y) {
        for (c, a) in coeffs.iter_mut().zip(&row.coefficients) {
            *c += a.conj() * yr;
        }
    }
    let residual = rows
        .iter()
        .zip(rhs)
        .map(|(row, b)| (row.coefficients.iter().zip(&coeffs).map(|(a, c)| a * c).sum::<C64>() - b).norm())
        .fold(0.0, f64::max);
    let value = rhs.iter().zip(&y).map(|(b, y)| b.conj() * y).sum::<C64>().re;
    Ok(MinIntResult {
        value,
        coeffs,
        residual,
        condition,
    })
}

fn interior(domain: &crate::domains::DomainSpec, p: &[C64]) -> Result<()> {
    if p.len() != domain.dim() {
        return Err(Error::InvalidInput(format!("point has dimension {}, expected {}", p.len(), domain.dim())));
    }
    if !domain.contains(p) {
        return Err(Error::InvalidInput("minimum integrals need an interior point".into()));
    }
    Ok(())
}

fn i1_kinds(x: &[C64]) -> (Vec<ConstraintKind>, Vec<C64>) {
    (
        vec![ConstraintKind::Eval, ConstraintKind::FirstDeriv { x: x.to_vec() }],
        vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
    )
}

fn i2_kinds(x: &[C64], y: &[C64]) -> (Vec<ConstraintKind>, Vec<C64>) {
    let n = x.len();
    let mut kinds = vec![ConstraintKind::Eval];
    kinds.extend((0..n).map(|j| ConstraintKind::AllFirstDerivs { j }));
    kinds.push(ConstraintKind::SecondDeriv {
        x: x.to_vec(),
        y: y.to_vec(),
    });
    let mut rhs = vec![C64::new(0.0, 0.0); n + 2];
    rhs[n + 1] = C64::new(1.0, 0.0);
    (kinds, rhs)
}

fn solve_model(model: &KernelModel, p: &[C64], kinds: Vec<ConstraintKind>, rhs: &[C64]) -> Result<MinIntResult> {
    interior(model.domain(), p)?;
    let rows = kinds
        .into_iter()
        .map(|k| ConstraintRow::new(model, k, p))
        .collect::<Result<Vec<_>>>()?;
    solve_min_norm(&rows, rhs)
}

/// `I⁰(p) = min{‖f‖² : f(p) = 1}`.
pub fn i0(model: &KernelModel, p: &[C64]) -> Result<MinIntResult> {
    solve_model(model, p, vec![ConstraintKind::Eval], &[C64::new(1.0, 0.0)])
}

/// `I¹(p; X) = min{‖f‖² : f(p) = 0, Σ X_i ∂_i f(p) = 1}`.
pub fn i1(model: &KernelModel, p: &[C64], x: &[C64]) -> Result<MinIntResult> {
    let (kinds, rhs) = i1_kinds(x);
    solve_model(model, p, kinds, &rhs)
}

/// `I²(p; X, Y) = min{‖f‖² : f(p) = 0, df(p) = 0, Σ X_j Y_k ∂_j∂_k f(p) = 1}`.
pub fn i2(model: &KernelModel, p: &[C64], x: &[C64], y: &[C64]) -> Result<MinIntResult> {
    let (kinds, rhs) = i2_kinds(x, y);
    solve_model(model, p, kinds, &rhs)
}

/// `b*(A A*)⁻¹ b` with `(A A*)_{rs} = L_r L̄_s K(p, p̄)` read off the
/// kernel derivative table.
pub fn min_int_from_table(table: &KernelDerivTable, kinds: &[ConstraintKind], rhs: &[C64]) -> Result<f64> {
    let n = table.dim();
    if kinds.is_empty() || kinds.len() != rhs.len() {
        return Err(Error::InvalidInput("need one right-hand side per constraint".into()));
    }
    for k in kinds {
        k.check(n)?;
    }
    let funcs: Vec<Vec<(MultiIndex, C64)>> = kinds.iter().map(|k| k.functional(n)).collect();
    let m = kinds.len();
    let gram = CMatrix::from_fn(m, m, |r, s| {
        let mut v = C64::new(0.0, 0.0);
        for (a, ca) in &funcs[r] {
            for (b, cb) in &funcs[s] {
                v += ca * cb.conj() * table.get(a, b);
            }
        }
        v
    });
    let (y, _) = solve_gram(&gram, rhs, "minimum-norm constraints")?;
    Ok(rhs.iter().zip(&y).map(|(b, y)| b.conj() * y).sum::<C64>().re)
}

/// `I⁰` through the kernel route.
pub fn i0_kernel(source: &dyn KernelSource, p: &[C64]) -> Result<f64> {
    interior(source.domain(), p)?;
    min_int_from_table(&source.derivs(p)?, &[ConstraintKind::Eval], &[C64::new(1.0, 0.0)])
}

/// `I¹` through the kernel route.
pub fn i1_kernel(source: &dyn KernelSource, p: &[C64], x: &[C64]) -> Result<f64> {
    interior(source.domain(), p)?;
    let (kinds, rhs) = i1_kinds(x);
    min_int_from_table(&source.derivs(p)?, &kinds, &rhs)
}

/// `I²` through the kernel route.
pub fn i2_kernel(source: &dyn KernelSource, p: &[C64], x: &[C64], y: &[C64]) -> Result<f64> {
    interior(source.domain(), p)?;
    let (kinds, rhs) = i2_kinds(x, y);
    min_int_from_table(&source.derivs(p)?, &kinds, &rhs)
}

/// Minimum integrals entering the Bergman–Fuchs identities at one point.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MinIntValues {
    pub i0: f64,
    pub i1_x: f64,
    pub i1_y: f64,
    pub i2_xx: f64,
    pub i2_xy: f64,
}

/// Residuals of the Bergman–Fuchs identities and of the polarized identity
/// for `B`.
#[derive(Debug, Clone, Serialize)]
pub struct BergmanFuchsReport {
    pub values: MinIntValues,
    pub k: f64,
    pub g_x: f64,
    pub h_x: f64,
    pub b_xy: f64,
    /// `|K − 1/I⁰| / K`.
    pub kernel_residual: f64,
    /// `|g(X) − I⁰/I¹(X)| / g(X)`.
    pub metric_residual: f64,
    /// `|H(X) − (2 − I¹(X)²/(I⁰ I²(X,X)))|`.
    pub holomorphic_residual: f64,
    /// `|B(X,Y) − (2 − I¹(X)I¹(Y)/(I⁰ I²(X,Y)))|`, the polarized identity in
    /// its displayed form; exact only for parallel `X`, `Y`.
    pub polarized_residual: f64,
    /// `|B(X,Y) − (1 + |g(X,Ȳ)|²/(g(X)g(Y)) − I¹(X)I¹(Y)/(I⁰ I²(X,Y)))|`.
    pub polarized_general_residual: f64,
}

impl BergmanFuchsReport {
    /// Largest of the kernel, metric, holomorphic and general polarized
    /// residuals.
    pub fn max_residual(&self) -> f64 {
        self.kernel_residual
            .max(self.metric_residual)
            .max(self.holomorphic_residual)
            .max(self.polarized_general_residual)
    }
}

fn bf_report(table: &KernelDerivTable, v: MinIntValues, x: &[C64], y: &[C64]) -> Result<BergmanFuchsReport> {
    let g = metric(table)?;
    let t = curvature_tensor(table, &g)?;
    let k = table.k();
    let g_x = g.norm_sqr(x);
    let g_y = g.norm_sqr(y);
    let h_x = holo_sectional(&t, &g, x)?;
    let b_xy = bisectional(&t, &g, x, y)?;
    let ratio = v.i1_x * v.i1_y / (v.i0 * v.i2_xy);
    let overlap = g.pair(x, y).norm_sqr() / (g_x * g_y);
    Ok(BergmanFuchsReport {
        values: v,
        k,
        g_x,
        h_x,
        b_xy,
        kernel_residual: (k - 1.0 / v.i0).abs() / k,
        metric_residual: (g_x - v.i0 / v.i1_x).abs() / g_x,
        holomorphic_residual: (h_x - (2.0 - v.i1_x * v.i1_x / (v.i0 * v.i2_xx))).abs(),
        polarized_residual: (b_xy - (2.0 - ratio)).abs(),
        polarized_general_residual: (b_xy - (1.0 + overlap - ratio)).abs(),
    })
}

/// Bergman–Fuchs check with minimum integrals from the row route and
/// curvature from the model's derivative table.
pub fn bergman_fuchs_check(model: &KernelModel, p: &[C64], x: &[C64], y: &[C64]) -> Result<BergmanFuchsReport> {
    let values = MinIntValues {
        i0: i0(model, p)?.value,
        i1_x: i1(model, p, x)?.value,
        i1_y: i1(model, p, y)?.value,
        i2_xx: i2(model, p, x, x)?.value,
        i2_xy: i2(model, p, x, y)?.value,
    };
    bf_report(&model.derivs(p)?, values, x, y)
}

/// Bergman–Fuchs check with minimum integrals from the kernel route.
pub fn bergman_fuchs_check_kernel(source: &dyn KernelSource, p: &[C64], x: &[C64], y: &[C64]) -> Result<BergmanFuchsReport> {
    let values = MinIntValues {
        i0: i0_kernel(source, p)?,
        i1_x: i1_kernel(source, p, x)?,
        i1_y: i1_kernel(source, p, y)?,
        i2_xx: i2_kernel(source, p, x, x)?,
        i2_xy: i2_kernel(source, p, x, y)?,
    };
    bf_report(&source.derivs(p)?, values, x, y)
}

/// Outcome of comparing minimum integrals on nested domains.
#[derive(Debug, Clone, Serialize)]
pub struct MonotonicityReport {
    pub sub: [f64; 3],
    pub sup: [f64; 3],
    /// `I^k_{sub} ≤ I^k_{sup}` within slack, for `k = 0, 1, 2`.
    pub holds: [bool; 3],
}

/// Checks `I^k_{Ω'}(p) ≤ I^k_Ω(p)` for `Ω' ⊂ Ω` with relative slack 1e-12.
pub fn monotonicity_check(
    sub: &KernelModel,
    sup: &KernelModel,
    p: &[C64],
    x: &[C64],
    y: &[C64],
) -> Result<MonotonicityReport> {
    if sub.degree() != sup.degree() {
        return Err(Error::InvalidInput(format!(
            "monotonicity needs equal truncation degrees, got {} and {}",
            sub.degree(),
            sup.degree()
        )));
    }
    if !crate::domains::contained_in(sub.domain(), sup.domain(), 20_000, 0x5eed) {
        return Err(Error::Containment(format!(
            "{} domain is not contained in {} domain",
            sub.domain().variant_name(),
            sup.domain().variant_name()
        )));
    }
    let vals = |m: &KernelModel| -> Result<[f64; 3]> { Ok([i0(m, p)?.value, i1(m, p, x)?.value, i2(m, p, x, y)?.value]) };
    let (a, b) = (vals(sub)?, vals(sup)?);
    let holds = [0, 1, 2].map(|k| a[k] <= b[k] * (1.0 + 1e-12));
    Ok(MonotonicityReport { sub: a, sup: b, holds })
}

/// Biholomorphisms with an explicit complex Jacobian.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MapKind {
    /// `z ↦ A z + b`, `A` given row-major.
    Affine { matrix: Vec<Vec<C64>>, shift: Vec<C64> },
    /// The involutive automorphism of the unit ball exchanging `a` and `0`,
    /// `φ_a(z) = (a − P_a z − s_a Q_a z) / (1 − ⟨z, a⟩)`.
    BallAutomorphism { a: Vec<C64> },
}

impl MapKind {
    pub fn identity(n: usize) -> Self {
        MapKind::Affine {
            matrix: (0..n)
                .map(|i| (0..n).map(|j| C64::new(if i == j { 1.0 } else { 0.0 }, 0.0)).collect())
                .collect(),
            shift: vec![C64::new(0.0, 0.0); n],
        }
    }

    pub fn dilation(n: usize, factor: f64) -> Self {
        MapKind::Affine {
            matrix: (0..n)
                .map(|i| (0..n).map(|j| C64::new(if i == j { factor } else { 0.0 }, 0.0)).collect())
                .collect(),
            shift: vec![C64::new(0.0, 0.0); n],
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            MapKind::Affine { shift, .. } => shift.len(),
            MapKind::BallAutomorphism { a } => a.len(),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            MapKind::Affine { matrix, shift } => {
                let n = shift.len();
                if matrix.len() != n || matrix.iter().any(|r| r.len() != n) {
                    return Err(Error::UnsupportedMap("affine matrix must be square and match the shift".into()));
                }
                if self.jacobian(shift).determinant().norm() == 0.0 {
                    return Err(Error::UnsupportedMap("affine map is singular".into()));
                }
            }
            MapKind::BallAutomorphism { a } => {
                if !(cnorm(a) < 1.0) {
                    return Err(Error::UnsupportedMap("ball automorphism needs |a| < 1".into()));
                }
            }
        }
        Ok(())
    }

    /// `T = P_a + s_a Q_a`, so that `φ_a(z) = (a − T z)/(1 − ⟨z, a⟩)`.
    fn ball_linear_part(a: &[C64]) -> CMatrix {
        let n = a.len();
        let r2: f64 = a.iter().map(|v| v.norm_sqr()).sum();
        let s = (1.0 - r2).sqrt();
        CMatrix::from_fn(n, n, |i, k| {
            let proj = if r2 > 0.0 { a[i] * a[k].conj() / r2 } else { C64::new(0.0, 0.0) };
            let id = if i == k { 1.0 } else { 0.0 };
            proj * (1.0 - s) + C64::new(s * id, 0.0)
        })
    }

    pub fn apply(&self, z: &[C64]) -> Vec<C64> {
        match self {
            MapKind::Affine { matrix, shift } => matrix
                .iter()
                .zip(shift)
                .map(|(row, b)| row.iter().zip(z).map(|(m, z)| m * z).sum::<C64>() + b)
                .collect(),
            MapKind::BallAutomorphism { a } => {
                let t = Self::ball_linear_part(a);
                let d = C64::new(1.0, 0.0) - cdot(z, a);
                (0..a.len())
                    .map(|i| (a[i] - (0..a.len()).map(|k| t[(i, k)] * z[k]).sum::<C64>()) / d)
                    .collect()
            }
        }
    }

    /// Complex Jacobian `∂f_i/∂z_k`.
    pub fn jacobian(&self, z: &[C64]) -> CMatrix {
        match self {
            MapKind::Affine { matrix, .. } => {
                let n = matrix.len();
                CMatrix::from_fn(n, n, |i, k| matrix[i][k])
            }
            MapKind::BallAutomorphism { a } => {
                let n = a.len();
                let t = Self::ball_linear_part(a);
                let d = C64::new(1.0, 0.0) - cdot(z, a);
                let num: Vec<C64> = (0..n)
                    .map(|i| a[i] - (0..n).map(|k| t[(i, k)] * z[k]).sum::<C64>())
                    .collect();
                CMatrix::from_fn(n, n, |i, k| (-t[(i, k)] * d + num[i] * a[k].conj()) / (d * d))
            }
        }
    }
}

/// Relative residuals of the three transformation laws
/// `I^k_{Ω₁}(p; X, Y) |det J f(p)|² = I^k_{Ω₂}(f(p); df X, df Y)`.
#[derive(Debug, Clone, Serialize)]
pub struct TransformationReport {
    pub image: Vec<C64>,
    pub jacobian_det_sqr: f64,
    pub source: [f64; 3],
    pub target: [f64; 3],
    pub residuals: [f64; 3],
}

/// Checks the transformation laws with minimum integrals from the kernel
/// route on both sides.
pub fn transformation_check(
    map: &MapKind,
    source: &dyn KernelSource,
    target: &dyn KernelSource,
    p: &[C64],
    x: &[C64],
    y: &[C64],
) -> Result<TransformationReport> {
    map.validate()?;
    if map.dim() != source.dim() || map.dim() != target.dim() {
        return Err(Error::InvalidInput("map dimension does not match the domains".into()));
    }
    let q = map.apply(p);
    if !target.domain().contains(&q) {
        return Err(Error::UnsupportedMap("the map does not send p into the target domain".into()));
    }
    let j = map.jacobian(p);
    let det2 = j.determinant().norm_sqr();
    let push = |v: &[C64]| -> Vec<C64> { (0..v.len()).map(|i| (0..v.len()).map(|k| j[(i, k)] * v[k]).sum()).collect() };
    let (fx, fy) = (push(x), push(y));
    let src = [
        i0_kernel(source, p)?,
        i1_kernel(source, p, x)?,
        i2_kernel(source, p, x, y)?,
    ];
    let tgt = [
        i0_kernel(target, &q)?,
        i1_kernel(target, &q, &fx)?,
        i2_kernel(target, &q, &fx, &fy)?,
    ];
    let residuals = [0, 1, 2].map(|k| (src[k] * det2 - tgt[k]).abs() / tgt[k].abs());
    Ok(TransformationReport {
        image: q,
        jacobian_det_sqr: det2,
        source: src,
        target: tgt,
        residuals,
    })
}

/// A random instance `(A, b)` of the least-norm problem with `N ≤ max_n`
/// basis elements, for oracle comparisons.
pub fn random_instance(rng: &mut ChaCha8Rng, max_n: usize) -> (Vec<ConstraintRow>, Vec<C64>) {
    let n = rng.gen_range(1..=max_n);
    let m = rng.gen_range(1..=n);
    let mut c = || C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    let rows = (0..m)
        .map(|_| ConstraintRow::from_coefficients(ConstraintKind::Eval, vec![], (0..n).map(|_| c()).collect()))
        .collect();
    let rhs = (0..m).map(|_| c()).collect();
    (rows, rhs)
}

/// Value of the least-norm problem from the full KKT system
/// `[[I, A*], [A, 0]] [c; μ] = [0; b]`, solved by dense LU.
pub fn kkt_value(rows: &[ConstraintRow], rhs: &[C64]) -> Option<f64> {
    let m = rows.len();
    let n = rows.first()?.coefficients.len();
    let size = n + m;
    let mut k = DMatrix::<C64>::zeros(size, size);
    for i in 0..n {
        k[(i, i)] = C64::new(1.0, 0.0);
    }
    for (r, row) in rows.iter().enumerate() {
        for (j, a) in row.coefficients.iter().enumerate() {
            k[(n + r, j)] = *a;
            k[(j, n + r)] = a.conj();
        }
    }
    let mut b = nalgebra::DVector::<C64>::zeros(size);
    for r in 0..m {
        b[n + r] = rhs[r];
    }
    let sol = k.lu().solve(&b)?;
    Some((0..n).map(|i| sol[i].norm_sqr()).sum())
}

/// Seeded generator used by [`random_instance`] callers.
pub fn instance_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
