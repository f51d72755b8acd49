//! Bergman metric and curvature from a kernel derivative table.
//!
//! Conventions: `g_{jk̄} = ∂_j ∂̄_k log K`,
//! `R_{h̄jkl̄} = −∂_k ∂̄_l g_{jh̄} + g^{νμ̄} ∂_k g_{jμ̄} ∂̄_l g_{νh̄}`, and
//!
//! ```text
//! B(X, Y) = R_{h̄jkl̄} X̄_h X_j Y_k Ȳ_l / (g(X, X̄) g(Y, Ȳ))
//! ```
//!
//! so that the unit disc has `B = −1` and the ball in `Cⁿ` has
//! `H ≡ −2/(n+1)`.

use nalgebra::Cholesky;
use serde::Serialize;

use crate::basis_kernel::{KernelDerivTable, KernelSource};
use crate::linalg::{hermitian_eigenvalues, lower_triangular_inverse, CMatrix};
use crate::partitions::chain_rule;
use crate::{cnorm, Error, Result, C64};

#[derive(Debug, Clone, Copy)]
enum Op {
    Hol(usize),
    Anti(usize),
}

/// Mixed derivative of `log K` at the table point.
fn log_deriv(table: &KernelDerivTable, ops: &[Op]) -> C64 {
    let k = table.k();
    let m = ops.len();
    // (log)^{(j)}(K) = (−1)^{j−1} (j−1)! / K^j
    let mut outer = vec![C64::new(k.ln(), 0.0)];
    let mut fact = 1.0;
    for j in 1..=m {
        let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
        outer.push(C64::new(sign * fact / k.powi(j as i32), 0.0));
        fact *= j as f64;
    }
    chain_rule(m, &outer, |block| {
        let mut hol = Vec::new();
        let mut anti = Vec::new();
        for &i in block {
            match ops[i] {
                Op::Hol(j) => hol.push(j),
                Op::Anti(j) => anti.push(j),
            }
        }
        if hol.len() > 2 || anti.len() > 2 {
            return C64::new(0.0, 0.0);
        }
        table.get_ops(&hol, &anti)
    })
}

/// The metric matrix `g_{jk̄}` with its inverse and spectrum.
#[derive(Debug, Clone, Serialize)]
pub struct MetricMatrix {
    #[serde(serialize_with = "ser_matrix")]
    pub g: CMatrix,
    #[serde(serialize_with = "ser_matrix")]
    pub inverse: CMatrix,
    pub eigenvalues: Vec<f64>,
}

fn ser_matrix<S: serde::Serializer>(m: &CMatrix, s: S) -> std::result::Result<S::Ok, S::Error> {
    let rows: Vec<Vec<[f64; 2]>> = (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect();
    rows.serialize(s)
}

impl MetricMatrix {
    pub fn dim(&self) -> usize {
        self.g.nrows()
    }

    /// `g(X, X̄) = Σ g_{jk̄} X_j X̄_k`.
    pub fn norm_sqr(&self, x: &[C64]) -> f64 {
        self.pair(x, x).re
    }

    /// `Σ g_{jk̄} X_j Ȳ_k`.
    pub fn pair(&self, x: &[C64], y: &[C64]) -> C64 {
        let n = self.dim();
        let mut s = C64::new(0.0, 0.0);
        for j in 0..n {
            for k in 0..n {
                s += self.g[(j, k)] * x[j] * y[k].conj();
            }
        }
        s
    }

    /// A `g`-orthonormal frame `{E^j}` from the Cholesky factor `G = L L*`:
    /// `E^a_j = (L⁻¹)_{aj}`.
    pub fn orthonormal_frame(&self) -> Result<Vec<Vec<C64>>> {
        let chol = Cholesky::new(self.g.clone()).ok_or_else(|| Error::DegenerateMetric {
            eigenvalues: self.eigenvalues.clone(),
        })?;
        let linv = lower_triangular_inverse(&chol.l());
        let n = self.dim();
        Ok((0..n).map(|a| (0..n).map(|j| linv[(a, j)]).collect()).collect())
    }

    pub fn log_det(&self) -> f64 {
        self.eigenvalues.iter().map(|v| v.ln()).sum()
    }
}

/// `g_{jk̄} = (K K_{jk̄} − K_j K_{k̄}) / K²`, required positive definite.
pub fn metric(table: &KernelDerivTable) -> Result<MetricMatrix> {
    if !(table.k() > 0.0) {
        return Err(Error::DegenerateMetric { eigenvalues: vec![] });
    }
    let n = table.dim();
    let mut g = CMatrix::from_fn(n, n, |j, k| log_deriv(table, &[Op::Hol(j), Op::Anti(k)]));
    for j in 0..n {
        g[(j, j)].im = 0.0;
        for k in 0..j {
            g[(j, k)] = g[(k, j)].conj();
        }
    }
    let eigenvalues = hermitian_eigenvalues(&g);
    let max = eigenvalues.last().copied().unwrap_or(0.0);
    if !(eigenvalues[0] > 1e-13 * max) || !eigenvalues.iter().all(|v| v.is_finite()) {
        return Err(Error::DegenerateMetric { eigenvalues });
    }
    let inverse = g.clone().try_inverse().ok_or_else(|| Error::DegenerateMetric {
        eigenvalues: eigenvalues.clone(),
    })?;
    Ok(MetricMatrix { g, inverse, eigenvalues })
}

/// Components `R_{h̄jkl̄}`, stored with index order `(h, j, k, l)`.
#[derive(Debug, Clone)]
pub struct CurvatureTensor {
    n: usize,
    data: Vec<C64>,
}

impl CurvatureTensor {
    pub fn dim(&self) -> usize {
        self.n
    }

    /// `R_{h̄jkl̄}`.
    pub fn get(&self, h: usize, j: usize, k: usize, l: usize) -> C64 {
        let n = self.n;
        self.data[((h * n + j) * n + k) * n + l]
    }

    /// `R_{h̄jkl̄} X̄_h X_j Y_k Ȳ_l`.
    pub fn contract(&self, x: &[C64], y: &[C64]) -> C64 {
        let n = self.n;
        let mut s = C64::new(0.0, 0.0);
        for h in 0..n {
            for j in 0..n {
                let xx = x[h].conj() * x[j];
                for k in 0..n {
                    for l in 0..n {
                        s += self.get(h, j, k, l) * xx * y[k] * y[l].conj();
                    }
                }
            }
        }
        s
    }
}

/// The curvature tensor from analytic derivatives of `log K` up to order
/// `(2, 2)`.
pub fn curvature_tensor(table: &KernelDerivTable, g: &MetricMatrix) -> Result<CurvatureTensor> {
    let n = table.dim();
    if g.dim() != n {
        return Err(Error::InvalidInput("metric dimension does not match table".into()));
    }
    // dg[k][j][m] = ∂_k g_{jm̄}
    let mut dg = vec![C64::new(0.0, 0.0); n * n * n];
    for k in 0..n {
        for j in 0..n {
            for m in 0..n {
                dg[(k * n + j) * n + m] = log_deriv(table, &[Op::Hol(k), Op::Hol(j), Op::Anti(m)]);
            }
        }
    }
    // ∂̄_l g_{νh̄} = conj(∂_l g_{hν̄})
    let dgbar = |l: usize, nu: usize, h: usize| dg[(l * n + h) * n + nu].conj();
    // g^{νμ̄} = (G⁻¹)_{μν}
    let ginv = |nu: usize, mu: usize| g.inverse[(mu, nu)];

    let mut data = vec![C64::new(0.0, 0.0); n * n * n * n];
    for h in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let mut r = -log_deriv(table, &[Op::Hol(k), Op::Hol(j), Op::Anti(h), Op::Anti(l)]);
                    for nu in 0..n {
                        for mu in 0..n {
                            r += ginv(nu, mu) * dg[(k * n + j) * n + mu] * dgbar(l, nu, h);
                        }
                    }
                    data[((h * n + j) * n + k) * n + l] = r;
                }
            }
        }
    }
    Ok(CurvatureTensor { n, data })
}

fn check_direction(x: &[C64], n: usize) -> Result<()> {
    if x.len() != n {
        return Err(Error::InvalidInput(format!("direction has length {}, expected {n}", x.len())));
    }
    if !(cnorm(x) > 0.0) {
        return Err(Error::ZeroDirection);
    }
    Ok(())
}

/// `B(X, Y)` as a complex number; the imaginary part is round-off.
pub fn bisectional_complex(t: &CurvatureTensor, g: &MetricMatrix, x: &[C64], y: &[C64]) -> Result<C64> {
    check_direction(x, t.n)?;
    check_direction(y, t.n)?;
    Ok(t.contract(x, y) / (g.norm_sqr(x) * g.norm_sqr(y)))
}

/// Bisectional curvature `B(X, Y)`.
pub fn bisectional(t: &CurvatureTensor, g: &MetricMatrix, x: &[C64], y: &[C64]) -> Result<f64> {
    Ok(bisectional_complex(t, g, x, y)?.re)
}

/// Holomorphic sectional curvature `H(X) = B(X, X)`.
pub fn holo_sectional(t: &CurvatureTensor, g: &MetricMatrix, x: &[C64]) -> Result<f64> {
    bisectional(t, g, x, x)
}

/// `Σ_j B(E^j, X)` over the given frame.
pub fn ricci_in_frame(t: &CurvatureTensor, g: &MetricMatrix, frame: &[Vec<C64>], x: &[C64]) -> Result<f64> {
    frame.iter().map(|e| bisectional(t, g, e, x)).sum()
}

/// Ricci curvature `Σ_j B(E^j, X)` over a `g`-orthonormal frame.
pub fn ricci(t: &CurvatureTensor, g: &MetricMatrix, x: &[C64]) -> Result<f64> {
    ricci_in_frame(t, g, &g.orthonormal_frame()?, x)
}

/// Independent Ricci value `−∂∂̄ log det g (X, X̄) / g(X, X̄)`, with the
/// complex Hessian taken by fourth-order finite differences of `log det g`
/// along the complex line `p + wX`.
pub fn ricci_logdet(source: &dyn KernelSource, p: &[C64], x: &[C64], step: f64) -> Result<f64> {
    check_direction(x, source.dim())?;
    let norm = cnorm(x);
    let u: Vec<C64> = x.iter().map(|v| v / norm).collect();
    let log_det_at = |w: C64| -> Result<f64> {
        let z: Vec<C64> = p.iter().zip(&u).map(|(p, u)| p + u * w).collect();
        Ok(metric(&source.derivs(&z)?)?.log_det())
    };
    let f0 = log_det_at(C64::new(0.0, 0.0))?;
    let mut lap = 0.0;
    for dir in [C64::new(step, 0.0), C64::new(0.0, step)] {
        let (f1, fm1) = (log_det_at(dir)?, log_det_at(-dir)?);
        let (f2, fm2) = (log_det_at(dir * 2.0)?, log_det_at(-dir * 2.0)?);
        lap += (-f2 + 16.0 * f1 - 30.0 * f0 + 16.0 * fm1 - fm2) / (12.0 * step * step);
    }
    let g = metric(&source.derivs(p)?)?;
    Ok(-0.25 * lap / g.norm_sqr(&u))
}

/// Curvature summary at a point.
#[derive(Debug, Clone, Serialize)]
pub struct CurvatureReport {
    pub point: Vec<C64>,
    pub t: Option<f64>,
    pub metric: MetricMatrix,
    pub x: Vec<C64>,
    pub y: Vec<C64>,
    /// `B(X, Y)` for the requested pair.
    pub b: f64,
    /// `H(X)`.
    pub h: f64,
    /// `Ric(X)` over the `g`-orthonormal frame.
    pub ric: f64,
    /// Frame used for `ric`, one vector per row.
    pub frame: Vec<Vec<C64>>,
    /// Extremes of `B` over the requested pair and any sampled pairs.
    pub b_min: f64,
    pub b_max: f64,
    /// Largest `|Im B|` seen (round-off diagnostic).
    pub imag_residue: f64,
    pub degree: Option<u32>,
    pub cond: Option<f64>,
}

/// Computes `B(X, Y)`, `H(X)`, `Ric(X)` at `p` and the extremes of `B` over
/// `samples` (which may be empty).
pub fn curvature_report(
    source: &dyn KernelSource,
    p: &[C64],
    x: &[C64],
    y: &[C64],
    samples: &[(Vec<C64>, Vec<C64>)],
) -> Result<CurvatureReport> {
    let table = source.derivs(p)?;
    let g = metric(&table)?;
    let t = curvature_tensor(&table, &g)?;
    let mut residue = 0.0f64;
    let mut eval = |a: &[C64], b: &[C64]| -> Result<f64> {
        let v = bisectional_complex(&t, &g, a, b)?;
        residue = residue.max(v.im.abs());
        Ok(v.re)
    };
    let b = eval(x, y)?;
    let h = eval(x, x)?;
    let (mut b_min, mut b_max) = (b.min(h), b.max(h));
    for (sx, sy) in samples {
        let v = eval(sx, sy)?;
        b_min = b_min.min(v);
        b_max = b_max.max(v);
    }
    let frame = g.orthonormal_frame()?;
    let ric = ricci_in_frame(&t, &g, &frame, x)?;
    Ok(CurvatureReport {
        point: p.to_vec(),
        t: None,
        metric: g,
        x: x.to_vec(),
        y: y.to_vec(),
        b,
        h,
        ric,
        frame,
        b_min,
        b_max,
        imag_residue: residue,
        degree: source.truncation_degree(),
        cond: source.cond_estimate(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis_kernel::{build_model, kernel_derivs, ClosedFormKernel};
    use crate::c64;
    use crate::domains::DomainSpec;

    fn e(n: usize, j: usize) -> Vec<C64> {
        let mut v = vec![c64(0.0, 0.0); n];
        v[j] = c64(1.0, 0.0);
        v
    }

    #[test]
    fn polydisc_center_metric_and_curvature() {
        let m = build_model(&DomainSpec::unit_polydisc(2), 6, None).unwrap();
        let table = kernel_derivs(&m, &[c64(0.0, 0.0); 2]).unwrap();
        let g = metric(&table).unwrap();
        assert!((g.g.clone() - CMatrix::identity(2, 2) * c64(2.0, 0.0)).camax() < 1e-12);
        let t = curvature_tensor(&table, &g).unwrap();
        assert!((bisectional(&t, &g, &e(2, 0), &e(2, 0)).unwrap() + 1.0).abs() < 1e-9);
        assert!(bisectional(&t, &g, &e(2, 0), &e(2, 1)).unwrap().abs() < 1e-9);
    }

    #[test]
    fn unit_disc_center() {
        let m = build_model(&DomainSpec::unit_ball(1), 4, None).unwrap();
        let table = kernel_derivs(&m, &[c64(0.0, 0.0)]).unwrap();
        let g = metric(&table).unwrap();
        assert!((g.g[(0, 0)].re - 2.0).abs() < 1e-12);
        let t = curvature_tensor(&table, &g).unwrap();
        // single component R = −4, B = R / g² = −1
        assert!((t.get(0, 0, 0, 0).re + 4.0).abs() < 1e-12);
        assert!((holo_sectional(&t, &g, &[c64(1.0, 0.0)]).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn ball_metric_matches_hessian_of_log_potential() {
        // ∂∂̄(−3 log(1 − |z|²)) = 3 (δ_jk/(1−|z|²) + z̄_j z_k/(1−|z|²)²)
        let k = ClosedFormKernel::new(DomainSpec::unit_ball(2)).unwrap();
        let p = [c64(0.5, 0.0), c64(0.0, 0.0)];
        let g = metric(&k.derivs(&p).unwrap()).unwrap();
        let s = 1.0 - 0.25;
        for j in 0..2 {
            for kk in 0..2 {
                let d = if j == kk { 1.0 } else { 0.0 };
                let want = 3.0 * (d / s + (p[j].conj() * p[kk]).re / (s * s));
                assert!((g.g[(j, kk)].re - want).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn ball_has_constant_holomorphic_sectional_curvature() {
        let k = ClosedFormKernel::new(DomainSpec::unit_ball(2)).unwrap();
        let p = [c64(0.3, 0.0), c64(0.2, 0.0)];
        let table = k.derivs(&p).unwrap();
        let g = metric(&table).unwrap();
        let t = curvature_tensor(&table, &g).unwrap();
        for x in [e(2, 0), e(2, 1), vec![c64(0.3, -0.2), c64(1.1, 0.4)]] {
            assert!((holo_sectional(&t, &g, &x).unwrap() + 2.0 / 3.0).abs() < 1e-12);
            // Kähler–Einstein: Ric = −g, so Ric(X) = −1
            assert!((ricci(&t, &g, &x).unwrap() + 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn kahler_symmetries() {
        let m = build_model(&DomainSpec::ellipsoid(vec![1, 2]), 10, None).unwrap();
        let table = kernel_derivs(&m, &[c64(0.3, 0.1), c64(-0.2, 0.4)]).unwrap();
        let g = metric(&table).unwrap();
        let t = curvature_tensor(&table, &g).unwrap();
        let scale = (0..2)
            .flat_map(|a| (0..2).map(move |b| (a, b)))
            .map(|(a, b)| t.get(a, a, b, b).norm())
            .fold(0.0, f64::max);
        for h in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        assert!((t.get(h, j, k, l) - t.get(h, k, j, l)).norm() < 1e-9 * scale);
                        assert!((t.get(h, j, k, l) - t.get(j, h, l, k).conj()).norm() < 1e-9 * scale);
                    }
                }
            }
        }
    }

    #[test]
    fn direction_scaling_invariance() {
        let m = build_model(&DomainSpec::ellipsoid(vec![2, 1]), 8, None).unwrap();
        let table = kernel_derivs(&m, &[c64(0.2, 0.1), c64(0.3, -0.3)]).unwrap();
        let g = metric(&table).unwrap();
        let t = curvature_tensor(&table, &g).unwrap();
        let x = vec![c64(0.4, 0.1), c64(-0.2, 0.7)];
        let y = vec![c64(1.0, -0.3), c64(0.5, 0.5)];
        let x3: Vec<C64> = x.iter().map(|v| v * 3.0).collect();
        let y5: Vec<C64> = y.iter().map(|v| v * c64(0.0, 5.0)).collect();
        let (a, b) = (bisectional(&t, &g, &x, &y).unwrap(), bisectional(&t, &g, &x3, &y5).unwrap());
        assert!((a - b).abs() < 1e-12 * (1.0 + a.abs()));
    }

    #[test]
    fn zero_direction_is_an_error() {
        let m = build_model(&DomainSpec::unit_polydisc(2), 3, None).unwrap();
        let table = kernel_derivs(&m, &[c64(0.0, 0.0); 2]).unwrap();
        let g = metric(&table).unwrap();
        let t = curvature_tensor(&table, &g).unwrap();
        let z = vec![c64(0.0, 0.0); 2];
        assert!(matches!(bisectional(&t, &g, &z, &e(2, 0)), Err(Error::ZeroDirection)));
    }

    #[test]
    fn degree_zero_metric_is_degenerate() {
        let m = build_model(&DomainSpec::unit_ball(2), 0, None).unwrap();
        let table = kernel_derivs(&m, &[c64(0.1, 0.0), c64(0.0, 0.0)]).unwrap();
        assert!(matches!(metric(&table), Err(Error::DegenerateMetric { .. })));
    }

    #[test]
    fn ricci_frame_sum_matches_log_det_hessian() {
        let m = build_model(&DomainSpec::ellipsoid(vec![1, 2]), 10, None).unwrap();
        let p = [c64(0.2, 0.1), c64(0.3, 0.2)];
        let table = kernel_derivs(&m, &p).unwrap();
        let g = metric(&table).unwrap();
        let t = curvature_tensor(&table, &g).unwrap();
        let x = vec![c64(0.6, 0.2), c64(-0.3, 0.5)];
        let a = ricci(&t, &g, &x).unwrap();
        let b = ricci_logdet(&m, &p, &x, 1e-3).unwrap();
        assert!((a - b).abs() < 1e-4 * a.abs(), "{a} vs {b}");
    }
}
