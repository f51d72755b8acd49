use std::fmt;
use std::sync::Arc;

use nalgebra::Cholesky;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::random_unit_vector;
use crate::domains::{sample_polydisc, AnisoBox, DomainSpec};
use crate::linalg::{hermitian_eigenvalues, lower_triangular_inverse, CMatrix};
use crate::C64;

type ValueFn = Arc<dyn Fn(&[C64]) -> f64 + Send + Sync>;
type HessianFn = Arc<dyn Fn(&[C64]) -> CMatrix + Send + Sync>;

/// A real weight `w` with the constants it is claimed to satisfy.
#[derive(Clone)]
pub struct WeightFunction {
    pub name: String,
    value: ValueFn,
    hessian: Option<HessianFn>,
    /// `M` in `|w| ≤ M`.
    pub bound: f64,
    /// `C` in `i∂∂̄w(ξ) ≥ C⁻¹·profile(ξ)`.
    pub c: f64,
    /// `C_α` for real derivatives of order 1, 2, 3.
    pub c_alpha: [f64; 3],
}

impl fmt::Debug for WeightFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WeightFunction")
            .field("name", &self.name)
            .field("analytic_hessian", &self.hessian.is_some())
            .field("bound", &self.bound)
            .field("c", &self.c)
            .field("c_alpha", &self.c_alpha)
            .finish()
    }
}

impl WeightFunction {
    pub fn new(name: &str, value: impl Fn(&[C64]) -> f64 + Send + Sync + 'static, bound: f64) -> Self {
        WeightFunction {
            name: name.into(),
            value: Arc::new(value),
            hessian: None,
            bound,
            c: 1.0,
            c_alpha: [1.0; 3],
        }
    }

    /// Supplies the complex Hessian `∂²w/∂z_j∂z̄_k` instead of finite differences.
    pub fn with_hessian(mut self, h: impl Fn(&[C64]) -> CMatrix + Send + Sync + 'static) -> Self {
        self.hessian = Some(Arc::new(h));
        self
    }

    pub fn with_constants(mut self, c: f64, c_alpha: [f64; 3]) -> Self {
        self.c = c;
        self.c_alpha = c_alpha;
        self
    }

    pub fn eval(&self, z: &[C64]) -> f64 {
        (self.value)(z)
    }

    /// `Σ|ζ_j|²/β_j²`.
    pub fn diagonal_quadratic(radii: Vec<f64>) -> Self {
        let n = radii.len();
        let r2 = radii.clone();
        WeightFunction::new(
            "diagonal-quadratic",
            move |z| z.iter().zip(&r2).map(|(z, b)| z.norm_sqr() / (b * b)).sum(),
            n as f64,
        )
        .with_hessian(move |_| CMatrix::from_fn(n, n, |j, k| C64::new(if j == k { 1.0 / (radii[j] * radii[j]) } else { 0.0 }, 0.0)))
        .with_constants(1.0, [2.0, 2.0, 2.0])
    }

    /// `−|ζ|²`.
    pub fn negative_norm(n: usize) -> Self {
        WeightFunction::new("negative-norm", |z| -z.iter().map(|v| v.norm_sqr()).sum::<f64>(), n as f64)
            .with_hessian(move |_| -CMatrix::identity(n, n))
    }

    /// `|ζ₁|²/δ² + Σ_{j≤n−ℓ}|ζ_j|²/δ + Σ_{k>n−ℓ}|ζ_k|²`, with the constants
    /// it satisfies on `P_{δ,a}` for `a ≤ 1`.
    pub fn anisotropic_quadratic(n: usize, delta: f64, ell: usize) -> Self {
        let diag: Vec<f64> = (0..n)
            .map(|j| {
                let mut c = if j < n - ell { 1.0 / delta } else { 1.0 };
                if j == 0 {
                    c += 1.0 / (delta * delta);
                }
                c
            })
            .collect();
        let d2 = diag.clone();
        WeightFunction::new(
            "anisotropic-quadratic",
            move |z| z.iter().zip(&d2).map(|(z, c)| c * z.norm_sqr()).sum(),
            (n + 1) as f64,
        )
        .with_hessian(move |_| CMatrix::from_fn(n, n, |j, k| C64::new(if j == k { diag[j] } else { 0.0 }, 0.0)))
        .with_constants(2.0, [3.0, 3.0, 3.0])
    }
}

/// Right-hand side of the Hessian lower bound.
#[derive(Debug, Clone, Serialize)]
pub enum HessianProfile {
    /// `Σ|ξ_j|²/β_j²`.
    Polydisc { radii: Vec<f64> },
    /// `|⟨∂ρ(ζ), ξ⟩|²/δ² + Σ_{2≤j≤n−ℓ}|ξ_j|²/δ + Σ_{k>n−ℓ}|ξ_k|²`.
    Anisotropic { rho: DomainSpec, delta: f64, ell: usize },
}

impl HessianProfile {
    /// Hermitian matrix `P` with `profile(ξ) = Σ P_{jk} ξ_j ξ̄_k`.
    fn matrix(&self, z: &[C64]) -> CMatrix {
        let n = z.len();
        match self {
            HessianProfile::Polydisc { radii } => {
                CMatrix::from_fn(n, n, |j, k| C64::new(if j == k { 1.0 / (radii[j] * radii[j]) } else { 0.0 }, 0.0))
            }
            HessianProfile::Anisotropic { rho, delta, ell } => {
                // ∂ρ/∂ζ_j = conj(G_j)/2 for the packed real gradient G
                let v: Vec<C64> = rho.gradient(z).iter().map(|g| g.conj() * 0.5).collect();
                CMatrix::from_fn(n, n, |j, k| {
                    let mut p = v[j] * v[k].conj() / (delta * delta);
                    if j == k {
                        p += if j == 0 {
                            0.0
                        } else if j < n - ell {
                            1.0 / delta
                        } else {
                            1.0
                        };
                    }
                    p
                })
            }
        }
    }
}

/// Polydisc `P(center, radii)` on which a weight is checked.
#[derive(Debug, Clone, Serialize)]
pub struct BoxRegion {
    pub center: Vec<C64>,
    pub radii: Vec<f64>,
}

impl From<&AnisoBox> for BoxRegion {
    fn from(b: &AnisoBox) -> Self {
        BoxRegion {
            center: b.polydisc_center(),
            radii: b.radii(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct HypothesisResult {
    pub name: String,
    pub passed: bool,
    /// Smallest normalized margin seen; negative means violated.
    pub worst_margin: f64,
    pub witness: Option<Vec<C64>>,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct WeightCheckReport {
    pub weight: String,
    pub samples: usize,
    pub c: f64,
    pub hypotheses: Vec<HypothesisResult>,
    /// Exact infimum over `ξ` of `i∂∂̄w(ξ)/profile(ξ)` at the sampled points
    /// (generalized eigenvalue), for comparison with the sampled minimum.
    pub exact_profile_ratio: Option<f64>,
}

impl WeightCheckReport {
    pub fn passed(&self) -> bool {
        self.hypotheses.iter().all(|h| h.passed)
    }

    pub fn hypothesis(&self, name: &str) -> Option<&HypothesisResult> {
        self.hypotheses.iter().find(|h| h.name == name)
    }
}

const XI_PER_SAMPLE: usize = 4;
/// Relative slack on derivative bounds for finite-difference error.
const DERIV_SLACK: f64 = 1e-6;

fn to_real(z: &[C64]) -> Vec<f64> {
    z.iter().flat_map(|c| [c.re, c.im]).collect()
}

fn to_complex(x: &[f64]) -> Vec<C64> {
    x.chunks(2).map(|c| C64::new(c[0], c[1])).collect()
}

/// Mixed real partial `∂^{k_1}⋯∂^{k_m} w` by nested central differences.
fn real_partial(w: &WeightFunction, x: &[f64], ks: &[usize], h: &[f64]) -> f64 {
    let m = ks.len();
    let mut acc = 0.0;
    for signs in 0..(1usize << m) {
        let mut y = x.to_vec();
        let mut sign = 1.0;
        for (i, &k) in ks.iter().enumerate() {
            if signs >> i & 1 == 1 {
                y[k] -= h[k];
                sign = -sign;
            } else {
                y[k] += h[k];
            }
        }
        acc += sign * w.eval(&to_complex(&y));
    }
    acc / ks.iter().map(|&k| 2.0 * h[k]).product::<f64>()
}

fn complex_hessian(w: &WeightFunction, z: &[C64], h: &[f64]) -> CMatrix {
    if let Some(f) = &w.hessian {
        return f(z);
    }
    let n = z.len();
    let x = to_real(z);
    let d = |a: usize, b: usize| real_partial(w, &x, &[a, b], h);
    let m = CMatrix::from_fn(n, n, |j, k| {
        let (xj, yj, xk, yk) = (2 * j, 2 * j + 1, 2 * k, 2 * k + 1);
        C64::new(d(xj, xk) + d(yj, yk), d(xj, yk) - d(yj, xk)) * 0.25
    });
    crate::linalg::hermitian_part(&m)
}

fn quad_form(m: &CMatrix, xi: &[C64]) -> f64 {
    let n = xi.len();
    let mut s = C64::new(0.0, 0.0);
    for j in 0..n {
        for k in 0..n {
            s += m[(j, k)] * xi[j] * xi[k].conj();
        }
    }
    s.re
}

/// Smallest eigenvalue of `P^{-1/2} H P^{-1/2}`, if `P` is positive definite.
fn generalized_min(h: &CMatrix, p: &CMatrix) -> Option<f64> {
    let l = Cholesky::new(p.clone())?.l();
    let li = lower_triangular_inverse(&l);
    let m = &li * h * li.adjoint();
    Some(hermitian_eigenvalues(&m)[0])
}

/// All real multi-indices of order `1..=3` over `dims` coordinates, as
/// sorted coordinate lists.
fn derivative_orders(dims: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for a in 0..dims {
        out.push(vec![a]);
        for b in a..dims {
            out.push(vec![a, b]);
            for c in b..dims {
                out.push(vec![a, b, c]);
            }
        }
    }
    out
}

struct SampleOutcome {
    point: Vec<C64>,
    bound_margin: f64,
    psd_margin: f64,
    min_eig: f64,
    profile_ratio: f64,
    profile_xi: Vec<C64>,
    exact_ratio: Option<f64>,
    deriv_margin: f64,
    deriv_index: Vec<usize>,
}

/// Samples `region ∩ domain` and checks the four weight hypotheses:
/// boundedness, plurisubharmonicity, the Hessian lower bound against
/// `profile` over random unit `ξ`, and derivative bounds
/// `|D^α w| ≤ C_α ∏β^{−α}` for real derivatives of order 1 to 3 (finite
/// differences with step `radius·1e-3` per coordinate).
pub fn check_weight(
    w: &WeightFunction,
    region: &BoxRegion,
    domain: &DomainSpec,
    profile: &HessianProfile,
    samples: usize,
    seed: u64,
) -> WeightCheckReport {
    let n = region.center.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(samples);
    let mut attempts = 0usize;
    while points.len() < samples && attempts < samples.saturating_mul(200).max(1000) {
        attempts += 1;
        let z = sample_polydisc(&region.center, &region.radii, &mut rng);
        if domain.contains(&z) {
            points.push(z);
        }
    }
    if points.is_empty() {
        let fail = |name: &str| HypothesisResult {
            name: name.into(),
            passed: false,
            worst_margin: f64::NEG_INFINITY,
            witness: None,
            detail: "region ∩ domain produced no samples".into(),
        };
        return WeightCheckReport {
            weight: w.name.clone(),
            samples: 0,
            c: w.c,
            hypotheses: ["bounded", "plurisubharmonic", "hessian-lower-bound", "derivative-bounds"]
                .iter()
                .map(|n| fail(n))
                .collect(),
            exact_profile_ratio: None,
        };
    }

    let steps: Vec<f64> = region.radii.iter().flat_map(|r| [r * 1e-3, r * 1e-3]).collect();
    let beta_real: Vec<f64> = region.radii.iter().flat_map(|r| [*r, *r]).collect();
    let orders = derivative_orders(2 * n);

    let outcomes: Vec<SampleOutcome> = points
        .par_iter()
        .enumerate()
        .map(|(i, z)| {
            let mut xi_rng = ChaCha8Rng::seed_from_u64(seed);
            xi_rng.set_stream(i as u64 + 1);
            let value = w.eval(z);
            let hess = complex_hessian(w, z, &steps);
            let eig = hermitian_eigenvalues(&hess);
            let scale = eig.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let min_eig = eig[0];
            let psd_margin = min_eig + 1e-10 + 1e-7 * scale;

            let pm = profile.matrix(z);
            let mut dirs: Vec<Vec<C64>> = (0..n)
                .map(|j| {
                    let mut e = vec![C64::new(0.0, 0.0); n];
                    e[j] = C64::new(1.0, 0.0);
                    e
                })
                .collect();
            dirs.extend((0..XI_PER_SAMPLE).map(|_| random_unit_vector(n, &mut xi_rng)));
            let (mut profile_ratio, mut profile_xi) = (f64::INFINITY, dirs[0].clone());
            for xi in dirs {
                let q = quad_form(&pm, &xi);
                if q > 0.0 {
                    let r = quad_form(&hess, &xi) / q;
                    if r < profile_ratio {
                        profile_ratio = r;
                        profile_xi = xi;
                    }
                }
            }

            let x = to_real(z);
            let (mut deriv_margin, mut deriv_index) = (f64::INFINITY, Vec::new());
            for ks in &orders {
                let d = real_partial(w, &x, ks, &steps);
                let allowed = w.c_alpha[ks.len() - 1] / ks.iter().map(|&k| beta_real[k]).product::<f64>();
                let margin = 1.0 - d.abs() / allowed;
                if margin < deriv_margin {
                    deriv_margin = margin;
                    deriv_index = ks.clone();
                }
            }

            SampleOutcome {
                point: z.clone(),
                bound_margin: (w.bound - value.abs()) / w.bound.abs().max(f64::MIN_POSITIVE),
                psd_margin,
                min_eig,
                profile_ratio,
                profile_xi,
                exact_ratio: generalized_min(&hess, &pm),
                deriv_margin,
                deriv_index,
            }
        })
        .collect();

    let worst = |key: fn(&SampleOutcome) -> f64| {
        outcomes
            .iter()
            .min_by(|a, b| key(a).total_cmp(&key(b)))
            .expect("nonempty")
    };

    let b = worst(|o| o.bound_margin);
    let bounded = HypothesisResult {
        name: "bounded".into(),
        passed: b.bound_margin >= 0.0,
        worst_margin: b.bound_margin,
        witness: Some(b.point.clone()),
        detail: format!("|w| = {:.6e}, M = {}", w.eval(&b.point).abs(), w.bound),
    };

    let p = worst(|o| o.psd_margin);
    let psh = HypothesisResult {
        name: "plurisubharmonic".into(),
        passed: p.psd_margin >= 0.0,
        worst_margin: p.min_eig,
        witness: Some(p.point.clone()),
        detail: format!("smallest Hessian eigenvalue {:.6e}", p.min_eig),
    };

    let h = worst(|o| o.profile_ratio);
    let target = 1.0 / w.c;
    let lower = HypothesisResult {
        name: "hessian-lower-bound".into(),
        passed: h.profile_ratio >= target * (1.0 - 1e-7),
        worst_margin: h.profile_ratio / target - 1.0,
        witness: Some(h.point.clone()),
        detail: format!(
            "min sampled Hessian/profile ratio {:.6} (need ≥ 1/C = {:.6}) at ξ = {:?}",
            h.profile_ratio, target, h.profile_xi
        ),
    };

    let d = worst(|o| o.deriv_margin);
    let derivs = HypothesisResult {
        name: "derivative-bounds".into(),
        passed: d.deriv_margin >= -DERIV_SLACK,
        worst_margin: d.deriv_margin,
        witness: Some(d.point.clone()),
        detail: format!("tightest real derivative over coordinates {:?}", d.deriv_index),
    };

    let exact = outcomes
        .iter()
        .filter_map(|o| o.exact_ratio)
        .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.min(v))));

    WeightCheckReport {
        weight: w.name.clone(),
        samples: outcomes.len(),
        c: w.c,
        hypotheses: vec![bounded, psh, lower, derivs],
        exact_profile_ratio: exact,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;
    use crate::domains::BoxKind;

    fn polydisc_region(radii: &[f64]) -> BoxRegion {
        BoxRegion {
            center: vec![c64(0.0, 0.0); radii.len()],
            radii: radii.to_vec(),
        }
    }

    #[test]
    fn diagonal_quadratic_passes_on_polydisc() {
        let radii = vec![0.5, 1.5];
        let d = DomainSpec::polydisc(radii.clone());
        let w = WeightFunction::diagonal_quadratic(radii.clone());
        let r = check_weight(&w, &polydisc_region(&radii), &d, &HessianProfile::Polydisc { radii }, 2000, 1);
        assert!(r.passed(), "{r:#?}");
        assert!((r.exact_profile_ratio.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn finite_difference_hessian_matches_analytic() {
        let radii = vec![0.5, 1.5];
        let analytic = WeightFunction::diagonal_quadratic(radii.clone());
        let r2 = radii.clone();
        let fd = WeightFunction::new("fd", move |z| z.iter().zip(&r2).map(|(z, b)| z.norm_sqr() / (b * b)).sum(), 2.0);
        let z = [c64(0.1, 0.2), c64(-0.3, 0.4)];
        let h: Vec<f64> = radii.iter().flat_map(|r| [r * 1e-3, r * 1e-3]).collect();
        let a = complex_hessian(&analytic, &z, &h);
        let b = complex_hessian(&fd, &z, &h);
        assert!((a - b).iter().all(|v| v.norm() < 1e-6));
    }

    #[test]
    fn negative_norm_is_not_plurisubharmonic() {
        let d = DomainSpec::unit_polydisc(2);
        let w = WeightFunction::negative_norm(2);
        let r = check_weight(&w, &polydisc_region(&[1.0, 1.0]), &d, &HessianProfile::Polydisc { radii: vec![1.0, 1.0] }, 200, 2);
        let psh = r.hypothesis("plurisubharmonic").unwrap();
        assert!(!psh.passed);
        assert!((psh.worst_margin + 1.0).abs() < 1e-12);
        assert!(d.contains(psh.witness.as_ref().unwrap()));
    }

    #[test]
    fn anisotropic_profile_example() {
        let delta = 0.01;
        let rho = DomainSpec::General {
            rho: crate::domains::RhoExpr::LeviModel { levi: vec![1.0] },
            bbox: vec![[-1.0, 1.0]; 4],
        };
        let region = BoxRegion::from(&AnisoBox::new(BoxKind::PDeltaA, vec![c64(0.0, 0.0); 2], delta, 1.0, 0).unwrap());
        let w = WeightFunction::anisotropic_quadratic(2, delta, 0);
        let profile = HessianProfile::Anisotropic { rho: rho.clone(), delta, ell: 0 };
        let r = check_weight(&w, &region, &rho, &profile, 2000, 3);
        assert!(r.passed(), "{r:#?}");
        // the exact infimum over ξ sits just below 1/2
        let exact = r.exact_profile_ratio.unwrap();
        assert!(exact > 0.45 && exact < 0.5, "{exact}");
    }

    #[test]
    fn monotone_in_c() {
        let delta = 0.01;
        let rho = DomainSpec::General {
            rho: crate::domains::RhoExpr::LeviModel { levi: vec![1.0] },
            bbox: vec![[-1.0, 1.0]; 4],
        };
        let region = BoxRegion::from(&AnisoBox::new(BoxKind::PDeltaA, vec![c64(0.0, 0.0); 2], delta, 1.0, 0).unwrap());
        let profile = HessianProfile::Anisotropic { rho: rho.clone(), delta, ell: 0 };
        let mut passed_before = false;
        for c in [1.0, 1.5, 1.8, 1.9, 2.0, 2.5, 4.0] {
            let w = WeightFunction::anisotropic_quadratic(2, delta, 0).with_constants(c, [3.0; 3]);
            let ok = check_weight(&w, &region, &rho, &profile, 500, 4).hypothesis("hessian-lower-bound").unwrap().passed;
            assert!(ok || !passed_before, "failed at C = {c} after passing at a smaller C");
            passed_before |= ok;
        }
        assert!(passed_before);
    }

    #[test]
    fn derivative_bounds_detect_violation() {
        let radii = vec![0.5, 1.5];
        let d = DomainSpec::polydisc(radii.clone());
        let w = WeightFunction::diagonal_quadratic(radii.clone()).with_constants(1.0, [0.5, 2.0, 2.0]);
        let r = check_weight(&w, &polydisc_region(&radii), &d, &HessianProfile::Polydisc { radii }, 500, 5);
        assert!(!r.hypothesis("derivative-bounds").unwrap().passed);
        assert!(r.hypothesis("plurisubharmonic").unwrap().passed);
    }

    #[test]
    fn derivative_order_count() {
        // C(4,1) + C(5,2) + C(6,3)
        assert_eq!(derivative_orders(4).len(), 4 + 10 + 20);
    }
}
