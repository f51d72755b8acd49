use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::random_unit_vector;
use crate::basis_kernel::KernelSource;
use crate::domains::polydisc_contained_in;
use crate::geometry::metric;
use crate::linalg::{hermitian_eigenvalues, CMatrix};
use crate::minint::{i0_kernel, i1_kernel, i2_kernel};
use crate::{Error, Result, C64};

/// `I¹(p;X) I¹(p;Y) / (I⁰(p) I²(p;X,Y))`.
pub fn curvature_ratio(source: &dyn KernelSource, p: &[C64], x: &[C64], y: &[C64]) -> Result<f64> {
    let a = i0_kernel(source, p)?;
    let bx = i1_kernel(source, p, x)?;
    let by = i1_kernel(source, p, y)?;
    let c = i2_kernel(source, p, x, y)?;
    Ok(bx * by / (a * c))
}

/// Bisectional curvature of the polydisc `P(c, β)` at its center:
/// `B = −Σ|X_j|²|Y_j|²/β_j⁴ / ((Σ|X_j|²/β_j²)(Σ|Y_k|²/β_k²))`.
pub fn polydisc_bisectional_closed_form(radii: &[f64], x: &[C64], y: &[C64]) -> f64 {
    let num: f64 = radii
        .iter()
        .zip(x.iter().zip(y))
        .map(|(b, (x, y))| x.norm_sqr() * y.norm_sqr() / b.powi(4))
        .sum();
    let qx: f64 = radii.iter().zip(x).map(|(b, x)| x.norm_sqr() / (b * b)).sum();
    let qy: f64 = radii.iter().zip(y).map(|(b, y)| y.norm_sqr() / (b * b)).sum();
    -num / (qx * qy)
}

/// Comparison of `K` and `g` at `p` with those of a polydisc `P(p, β)`
/// contained in the domain.
#[derive(Debug, Clone, Serialize)]
pub struct SqueezeReport {
    pub point: Vec<C64>,
    pub radii: Vec<f64>,
    pub c: f64,
    /// `K(p, p̄) ∏β_j² πⁿ`; equals 1 when the domain is the polydisc.
    pub kernel_scaled: f64,
    /// `g(p; X) / Σ|X_j|²/β_j²` over the sampled directions.
    pub metric_min_sampled: f64,
    pub metric_max_sampled: f64,
    /// Exact extremes of the same ratio over all directions.
    pub metric_min: f64,
    pub metric_max: f64,
    pub kernel_within: bool,
    pub metric_within: bool,
}

impl SqueezeReport {
    pub fn passed(&self) -> bool {
        self.kernel_within && self.metric_within
    }
}

/// Checks `C⁻¹ π⁻ⁿ ≤ K ∏β² ≤ C π⁻ⁿ` and `C⁻¹ ≤ g(X)/Σ|X_j|²/β_j² ≤ C`.
/// The metric flag uses the exact extremes (generalized eigenvalues), which
/// bound every sampled ratio. Both comparisons allow relative slack 1e-12.
pub fn polydisc_squeeze_check(
    source: &dyn KernelSource,
    p: &[C64],
    radii: &[f64],
    c: f64,
    samples: usize,
    seed: u64,
) -> Result<SqueezeReport> {
    let n = source.dim();
    if p.len() != n || radii.len() != n {
        return Err(Error::InvalidInput("point and radii must match the dimension".into()));
    }
    if !(c >= 1.0) || radii.iter().any(|r| !(*r > 0.0)) {
        return Err(Error::InvalidInput("need C ≥ 1 and positive radii".into()));
    }
    if !polydisc_contained_in(p, radii, source.domain(), 10_000, seed) {
        return Err(Error::Containment(format!("polydisc P(p, {radii:?}) is not contained in the domain")));
    }
    let table = source.derivs(p)?;
    let g = metric(&table)?;
    let prod: f64 = radii.iter().map(|b| b * b).product();
    let kernel_scaled = table.k() * prod * std::f64::consts::PI.powi(n as i32);

    let scaled = CMatrix::from_fn(n, n, |j, k| g.g[(j, k)] * (radii[j] * radii[k]));
    let eig = hermitian_eigenvalues(&scaled);
    let ratio = |x: &[C64]| {
        let q: f64 = x.iter().zip(radii).map(|(x, b)| x.norm_sqr() / (b * b)).sum();
        g.norm_sqr(x) / q
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for j in 0..n {
        let mut e = vec![C64::new(0.0, 0.0); n];
        e[j] = C64::new(1.0, 0.0);
        let r = ratio(&e);
        lo = lo.min(r);
        hi = hi.max(r);
    }
    for _ in 0..samples {
        let r = ratio(&random_unit_vector(n, &mut rng));
        lo = lo.min(r);
        hi = hi.max(r);
    }
    let within = |v: f64| v >= (1.0 / c) * (1.0 - 1e-12) && v <= c * (1.0 + 1e-12);
    Ok(SqueezeReport {
        point: p.to_vec(),
        radii: radii.to_vec(),
        c,
        kernel_scaled,
        metric_min_sampled: lo,
        metric_max_sampled: hi,
        metric_min: eig[0],
        metric_max: eig[n - 1],
        kernel_within: within(kernel_scaled),
        metric_within: within(eig[0]) && within(eig[n - 1]),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis_kernel::{build_model, ClosedFormKernel};
    use crate::c64;
    use crate::domains::DomainSpec;
    use crate::geometry::{bisectional, curvature_tensor};
    use proptest::prelude::*;

    fn e(n: usize, j: usize) -> Vec<C64> {
        let mut v = vec![c64(0.0, 0.0); n];
        v[j] = c64(1.0, 0.0);
        v
    }

    #[test]
    fn polydisc_center_ratios() {
        let m = build_model(&DomainSpec::unit_polydisc(2), 6, None).unwrap();
        let p = [c64(0.0, 0.0); 2];
        assert!((curvature_ratio(&m, &p, &e(2, 0), &e(2, 0)).unwrap() - 3.0).abs() < 1e-12);
        // 1 + |g(X,Ȳ)|²/(g(X)g(Y)) − B with orthogonal axes and B = 0
        assert!((curvature_ratio(&m, &p, &e(2, 0), &e(2, 1)).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ball_ratio_for_parallel_directions() {
        let k = ClosedFormKernel::new(DomainSpec::unit_ball(2)).unwrap();
        for p in [[c64(0.0, 0.0), c64(0.0, 0.0)], [c64(0.3, -0.2), c64(0.1, 0.4)]] {
            let x = [c64(0.6, 0.1), c64(-0.2, 0.5)];
            assert!((curvature_ratio(&k, &p, &x, &x).unwrap() - 8.0 / 3.0).abs() < 1e-9);
        }
    }

    #[test]
    fn ratio_plus_curvature_matches_overlap() {
        let k = ClosedFormKernel::new(DomainSpec::unit_ball(2)).unwrap();
        let p = [c64(0.2, 0.1), c64(-0.3, 0.2)];
        let x = [c64(0.6, 0.1), c64(-0.2, 0.5)];
        let y = [c64(0.1, 0.9), c64(0.4, -0.3)];
        let t = k.derivs(&p).unwrap();
        let g = metric(&t).unwrap();
        let r = curvature_tensor(&t, &g).unwrap();
        let b = bisectional(&r, &g, &x, &y).unwrap();
        let overlap = g.pair(&x, &y).norm_sqr() / (g.norm_sqr(&x) * g.norm_sqr(&y));
        let ratio = curvature_ratio(&k, &p, &x, &y).unwrap();
        assert!((ratio + b - 1.0 - overlap).abs() < 1e-8);
    }

    #[test]
    fn squeeze_on_polydisc_itself() {
        let d = DomainSpec::polydisc(vec![0.7, 1.2]);
        let m = build_model(&d, 4, None).unwrap();
        let r = polydisc_squeeze_check(&m, &[c64(0.0, 0.0); 2], &[0.7, 1.2], 2.0, 50, 3).unwrap();
        assert!((r.kernel_scaled - 1.0).abs() < 1e-12);
        assert!((r.metric_min - 2.0).abs() < 1e-12 && (r.metric_max - 2.0).abs() < 1e-12);
        assert!((r.metric_min_sampled - 2.0).abs() < 1e-12);
        assert!(r.passed());
        let strict = polydisc_squeeze_check(&m, &[c64(0.0, 0.0); 2], &[0.7, 1.2], 1.5, 50, 3).unwrap();
        assert!(strict.kernel_within && !strict.metric_within);
    }

    #[test]
    fn squeeze_on_ball_with_inscribed_polydisc() {
        let k = ClosedFormKernel::new(DomainSpec::unit_ball(2)).unwrap();
        let b = 0.5f64.sqrt();
        let r = polydisc_squeeze_check(&k, &[c64(0.0, 0.0); 2], &[b, b], 2.0, 50, 3).unwrap();
        assert!((r.kernel_scaled - 0.5).abs() < 1e-12);
        assert!(r.kernel_within);
        assert!(!polydisc_squeeze_check(&k, &[c64(0.0, 0.0); 2], &[b, b], 1.9, 50, 3).unwrap().kernel_within);
    }

    #[test]
    fn squeeze_rejects_large_polydisc() {
        let k = ClosedFormKernel::new(DomainSpec::unit_ball(2)).unwrap();
        assert!(matches!(
            polydisc_squeeze_check(&k, &[c64(0.0, 0.0); 2], &[0.9, 0.9], 2.0, 10, 3),
            Err(Error::Containment(_))
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn polydisc_center_bisectional_matches_closed_form(
            b1 in 0.3f64..2.0, b2 in 0.3f64..2.0,
            x in proptest::collection::vec(-1.0f64..1.0, 4),
            y in proptest::collection::vec(-1.0f64..1.0, 4),
        ) {
            let xs = [c64(x[0], x[1]), c64(x[2], x[3])];
            let ys = [c64(y[0], y[1]), c64(y[2], y[3])];
            prop_assume!(crate::cnorm(&xs) > 0.05 && crate::cnorm(&ys) > 0.05);
            let radii = [b1, b2];
            let closed = polydisc_bisectional_closed_form(&radii, &xs, &ys);
            prop_assert!((-1.0..=0.0).contains(&closed));
            let k = ClosedFormKernel::new(DomainSpec::polydisc(radii.to_vec())).unwrap();
            let t = k.derivs(&[c64(0.0, 0.0); 2]).unwrap();
            let g = metric(&t).unwrap();
            let r = curvature_tensor(&t, &g).unwrap();
            let b = bisectional(&r, &g, &xs, &ys).unwrap();
            prop_assert!((b - closed).abs() < 1e-9);
        }
    }
}
