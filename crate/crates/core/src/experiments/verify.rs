//! The invariant suite run by `verify`: one named check per property, each
//! with the value it observed and the tolerance it was held to.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{
    boundary_sweep, check_weight, curvature_ratio, localization_ratio, polydisc_bisectional_closed_form, random_unit_vector,
    BoxRegion, HessianProfile, LocalizationConfig, SweepConfig, WeightFunction,
};
use crate::basis_kernel::{build_model, kernel_derivs, ClosedFormKernel, KernelModel, KernelSource};
use crate::domains::{boundary_project, build_quadrature, inward_point, AnisoBox, BoxKind, DomainSpec, RhoExpr, Scheme};
use crate::geometry::{bisectional, curvature_tensor, holo_sectional, metric, ricci, ricci_in_frame, ricci_logdet};
use crate::linalg::CMatrix;
use crate::minint::{
    bergman_fuchs_check_kernel, i0, instance_rng, kkt_value, monotonicity_check, random_instance, solve_min_norm,
    transformation_check, MapKind,
};
use crate::{c64, cnorm, MultiIndex, Result, C64};

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub module: &'static str,
    pub name: String,
    pub passed: bool,
    /// Worst observed value of the checked quantity.
    pub value: f64,
    pub tolerance: f64,
    pub detail: String,
}

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Random instances per property.
    pub samples: usize,
    /// Truncation degree of the series models.
    pub degree: u32,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { seed: 7, samples: 20, degree: 12 }
    }
}

fn check(module: &'static str, name: &str, value: f64, tolerance: f64, ok: bool, detail: String) -> Check {
    Check {
        module,
        name: name.into(),
        passed: ok && value.is_finite(),
        value,
        tolerance,
        detail,
    }
}

/// Check whose body failed with an error.
fn errored(module: &'static str, name: &str, e: crate::Error) -> Check {
    Check {
        module,
        name: name.into(),
        passed: false,
        value: f64::NAN,
        tolerance: f64::NAN,
        detail: format!("error: {e}"),
    }
}

fn run(module: &'static str, name: &str, f: impl FnOnce() -> Result<Check>) -> Check {
    f().unwrap_or_else(|e| errored(module, name, e))
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Random point of `domain` with every coordinate of modulus at most `r`.
pub fn random_interior(domain: &DomainSpec, r: f64, rng: &mut ChaCha8Rng) -> Vec<C64> {
    let n = domain.dim();
    loop {
        let u = random_unit_vector(n, rng);
        let s = r * rng.gen::<f64>();
        let p: Vec<C64> = u.iter().map(|v| v * s).collect();
        if domain.rho(&p) < -1e-3 {
            return p;
        }
    }
}

fn series_models(degree: u32) -> Result<Vec<KernelModel>> {
    [
        DomainSpec::unit_polydisc(2),
        DomainSpec::unit_ball(2),
        DomainSpec::ellipsoid(vec![1, 2]),
        DomainSpec::polydisc(vec![0.7, 1.3]),
    ]
    .iter()
    .map(|d| build_model(d, degree, None))
    .collect()
}

fn closed_forms() -> Result<Vec<ClosedFormKernel>> {
    Ok(vec![
        ClosedFormKernel::new(DomainSpec::unit_ball(2))?,
        ClosedFormKernel::new(DomainSpec::unit_ball(3))?,
        ClosedFormKernel::new(DomainSpec::unit_polydisc(2))?,
        ClosedFormKernel::new(DomainSpec::polydisc(vec![0.7, 1.3]))?,
    ])
}

fn domains_checks(opts: &VerifyOptions) -> Vec<Check> {
    let mut out = Vec::new();
    out.push(run("domains", "reinhardt-phase-invariance", || {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let mut mismatches = 0usize;
        let mut total = 0usize;
        for d in [DomainSpec::unit_ball(2), DomainSpec::polydisc(vec![0.7, 1.3]), DomainSpec::ellipsoid(vec![1, 2])] {
            for _ in 0..200 {
                let p: Vec<C64> = (0..2).map(|_| c64(rng.gen_range(-1.4..1.4), rng.gen_range(-1.4..1.4))).collect();
                let q: Vec<C64> = p.iter().map(|z| z * C64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU))).collect();
                if d.contains(&p) != d.contains(&q) && d.rho(&p).abs() > 1e-12 {
                    mismatches += 1;
                }
                total += 1;
            }
        }
        Ok(check("domains", "reinhardt-phase-invariance", mismatches as f64, 0.0, mismatches == 0, format!("{total} rotated points")))
    }));
    out.push(run("domains", "projection-roundtrip", || {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed + 1);
        let mut worst = 0.0f64;
        for d in [DomainSpec::unit_ball(2), DomainSpec::ellipsoid(vec![1, 2])] {
            for _ in 0..opts.samples {
                let u = random_unit_vector(2, &mut rng);
                let mut p: Vec<C64> = u.clone();
                while !d.contains(&p) {
                    p.iter_mut().for_each(|v| *v *= 0.99);
                }
                let r = 0.9 + 0.09 * rng.gen::<f64>();
                p.iter_mut().for_each(|v| *v *= r);
                let proj = boundary_project(&d, &p)?;
                let back = inward_point(&d, &proj.point, proj.dist)?;
                let err: Vec<C64> = back.iter().zip(&p).map(|(a, b)| a - b).collect();
                worst = worst.max(cnorm(&err));
            }
        }
        Ok(check("domains", "projection-roundtrip", worst, 1e-9, worst <= 1e-9, "|inward_point(π(p), dist) − p|".into()))
    }));
    out.push(run("domains", "quadrature-refinement", || {
        let d = DomainSpec::unit_polydisc(1);
        let exact = std::f64::consts::PI;
        let errs: Vec<f64> = [50, 100, 200, 400]
            .iter()
            .map(|&r| build_quadrature(&d, Scheme::TensorGrid, r, 0).map(|q| (q.weights.iter().sum::<f64>() - exact).abs()))
            .collect::<Result<_>>()?;
        let ok = errs.windows(2).all(|w| w[1] < w[0]);
        Ok(check("domains", "quadrature-refinement", errs[3], errs[0], ok, format!("disc volume errors {errs:?}")))
    }));
    out
}

fn kernel_checks(opts: &VerifyOptions, models: &[KernelModel]) -> Vec<Check> {
    let mut out = Vec::new();
    out.push(run("basis_kernel", "diagonal-positivity-and-hermitian", || {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed + 2);
        let (mut min_k, mut asym) = (f64::INFINITY, 0.0f64);
        for m in models {
            for _ in 0..opts.samples {
                let p = random_interior(m.domain(), 0.9, &mut rng);
                let t = kernel_derivs(m, &p)?;
                min_k = min_k.min(t.k());
                for a in t.indices() {
                    for b in t.indices() {
                        asym = asym.max((t.get(a, b) - t.get(b, a).conj()).norm());
                    }
                }
            }
        }
        Ok(check(
            "basis_kernel",
            "diagonal-positivity-and-hermitian",
            asym,
            0.0,
            min_k > 0.0 && asym == 0.0,
            format!("min K = {min_k:.3e}"),
        ))
    }));
    out.push(run("basis_kernel", "degree-monotonicity", || {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed + 3);
        let d = DomainSpec::ellipsoid(vec![1, 2]);
        let ms: Vec<KernelModel> = (0..=opts.degree).step_by(2).map(|k| build_model(&d, k, None)).collect::<Result<_>>()?;
        let mut worst = f64::INFINITY;
        for _ in 0..opts.samples {
            let p = random_interior(&d, 0.9, &mut rng);
            for w in ms.windows(2) {
                worst = worst.min((w[1].kernel(&p) - w[0].kernel(&p)) / w[1].kernel(&p));
            }
        }
        Ok(check("basis_kernel", "degree-monotonicity", worst, -1e-14, worst >= -1e-14, "min relative increment".into()))
    }));
    out.push(run("basis_kernel", "quadrature-vs-closed-form", || {
        let d = DomainSpec::unit_polydisc(1);
        let q = build_quadrature(&d, Scheme::TensorGrid, 400, 0)?;
        let a = build_model(&d, 8, None)?;
        let b = build_model(&d, 8, Some(&q))?;
        let mut worst = 0.0f64;
        for r in [0.0, 0.2, 0.35, 0.5] {
            let p = [c64(r * 0.6, r * 0.8)];
            worst = worst.max(rel(b.kernel(&p), a.kernel(&p)));
        }
        Ok(check("basis_kernel", "quadrature-vs-closed-form", worst, 0.01, worst <= 0.01, "unit disc, degree 8, grid 400".into()))
    }));
    out.push(run("basis_kernel", "finite-difference-table", || {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed + 4);
        let mut worst = 0.0f64;
        for m in models {
            for _ in 0..4 {
                let p = random_interior(m.domain(), 0.6, &mut rng);
                let t = kernel_derivs(m, &p)?;
                let fd: Vec<Vec<C64>> = t.indices().iter().map(|a| fd_basis(m, &p, a, 1e-4)).collect();
                for (i, a) in t.indices().iter().enumerate() {
                    for (j, b) in t.indices().iter().enumerate() {
                        let approx: C64 = fd[i].iter().zip(&fd[j]).map(|(u, v)| u * v.conj()).sum();
                        let exact = t.get(a, b);
                        let scale = exact.norm().max((t.get(a, a).norm() * t.get(b, b).norm()).sqrt());
                        worst = worst.max((approx - exact).norm() / scale);
                    }
                }
            }
        }
        Ok(check("basis_kernel", "finite-difference-table", worst, 1e-5, worst <= 1e-5, "step 1e-4".into()))
    }));
    out
}

/// `∂^a φ(p)` by nested central differences along the real axes.
fn fd_basis(m: &KernelModel, p: &[C64], a: &MultiIndex, h: f64) -> Vec<C64> {
    let ks: Vec<usize> = a.entries().iter().enumerate().flat_map(|(j, &e)| std::iter::repeat_n(j, e as usize)).collect();
    let mut acc = vec![c64(0.0, 0.0); m.len()];
    for signs in 0..(1usize << ks.len()) {
        let mut q = p.to_vec();
        let mut s = 1.0;
        for (i, &k) in ks.iter().enumerate() {
            if signs >> i & 1 == 1 {
                q[k] -= h;
                s = -s;
            } else {
                q[k] += h;
            }
        }
        for (a, v) in acc.iter_mut().zip(m.basis_values(&q)) {
            *a += v * s;
        }
    }
    let denom = (2.0 * h).powi(ks.len() as i32);
    acc.into_iter().map(|v| v / denom).collect()
}

fn geometry_checks(opts: &VerifyOptions, sources: &[&dyn KernelSource]) -> Vec<Check> {
    let mut out = Vec::new();
    out.push(run("geometry", "universal-upper-bounds", || {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed + 5);
        let (mut b_gap, mut r_gap) = (f64::INFINITY, f64::INFINITY);
        for s in sources {
            let n = s.dim();
            for _ in 0..opts.samples {
                let p = random_interior(s.domain(), 0.9, &mut rng);
                let t = s.derivs(&p)?;
                let g = metric(&t)?;
                let r = curvature_tensor(&t, &g)?;
                for _ in 0..4 {
                    let (x, y) = (random_unit_vector(n, &mut rng), random_unit_vector(n, &mut rng));
                    b_gap = b_gap.min(2.0 - bisectional(&r, &g, &x, &y)?);
                    r_gap = r_gap.min((n + 1) as f64 - ricci(&r, &g, &x)?);
                }
            }
        }
        Ok(check(
            "geometry",
            "universal-upper-bounds",
            b_gap.min(r_gap),
            0.0,
            b_gap > 0.0 && r_gap > 0.0,
            format!("min 2 − B = {b_gap:.4}, min (n+1) − Ric = {r_gap:.4}"),
        ))
    }));
    out.push(run("geometry", "ricci-logdet", || {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed + 6);
        let mut worst = 0.0f64;
        for s in sources {
            for _ in 0..4 {
                let p = random_interior(s.domain(), 0.6, &mut rng);
                let x = random_unit_vector(s.dim(), &mut rng);
                let t = s.derivs(&p)?;
                let g = metric(&t)?;
                let a = ricci(&curvature_tensor(&t, &g)?, &g, &x)?;
                let b = ricci_logdet(*s, &p, &x, 1e-3)?;
                worst = worst.max((a - b).abs() / a.abs().max(1.0));
            }
        }
        Ok(check("geometry", "ricci-logdet", worst, 1e-4, worst <= 1e-4, "frame sum vs log det Laplacian".into()))
    }));
    out.push(run("geometry", "kahler-symmetries", || {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed + 7);
        let mut worst = 0.0f64;
        for s in sources {
            let n = s.dim();
            let p = random_interior(s.domain(), 0.6, &mut rng);
            let t = s.derivs(&p)?;
            let g = metric(&t)?;
            let r = curvature_tensor(&t, &g)?;
            let scale = (0..n).map(|i| r.get(i, i, i, i).norm()).fold(0.0, f64::max);
            for _ in 0..100 {
                let [h, j, k, l] = [0; 4].map(|_| rng.gen_range(0..n));
                worst = worst.max((r.get(h, j, k, l) - r.get(h, k, j, l)).norm() / scale);
                worst = worst.max((r.get(h, j, k, l) - r.get(j, h, l, k).conj()).norm() / scale);
            }
        }
        Ok(check("geometry", "kahler-symmetries", worst, 1e-9, worst <= 1e-9, "100 index tuples per source".into()))
    }));
    out.push(run("geometry", "ricci-frame-independence", || {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed + 8);
        let mut worst = 0.0f64;
        for s in sources {
            let n = s.dim();
            let p = random_interior(s.domain(), 0.6, &mut rng);
            let t = s.derivs(&p)?;
            let g = metric(&t)?;
            let r = curvature_tensor(&t, &g)?;
            let frame = g.orthonormal_frame()?;
            let x = random_unit_vector(n, &mut rng);
            let base = ricci_in_frame(&r, &g, &frame, &x)?;
            for _ in 0..4 {
                let u = random_unitary(n, &mut rng);
                let rotated: Vec<Vec<C64>> = (0..n)
                    .map(|a| (0..n).map(|j| (0..n).map(|b| u[(a, b)] * frame[b][j]).sum()).collect())
                    .collect();
                worst = worst.max((ricci_in_frame(&r, &g, &rotated, &x)? - base).abs());
            }
        }
        Ok(check("geometry", "ricci-frame-independence", worst, 1e-10, worst <= 1e-10, "random unitary rotations".into()))
    }));
    out.push(run("geometry", "ball-automorphism-invariance", || {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed + 9);
        let ball = ClosedFormKernel::new(DomainSpec::unit_ball(2))?;
        let mut worst = 0.0f64;
        for _ in 0..opts.samples {
            let a = random_interior(ball.domain(), 0.7, &mut rng);
            let p = random_interior(ball.domain(), 0.7, &mut rng);
            let (x, y) = (random_unit_vector(2, &mut rng), random_unit_vector(2, &mut rng));
            let f = MapKind::BallAutomorphism { a };
            let j = f.jacobian(&p);
            let push = |v: &[C64]| -> Vec<C64> { (0..2).map(|i| (0..2).map(|k| j[(i, k)] * v[k]).sum()).collect() };
            let b0 = bisectional_at(&ball, &p, &x, &y)?;
            let b1 = bisectional_at(&ball, &f.apply(&p), &push(&x), &push(&y))?;
            worst = worst.max((b0 - b1).abs());
        }
        Ok(check("geometry", "ball-automorphism-invariance", worst, 1e-8, worst <= 1e-8, "closed-form ball".into()))
    }));
    out
}

fn bisectional_at(s: &dyn KernelSource, p: &[C64], x: &[C64], y: &[C64]) -> Result<f64> {
    let t = s.derivs(p)?;
    let g = metric(&t)?;
    bisectional(&curvature_tensor(&t, &g)?, &g, x, y)
}

/// Haar-ish random unitary from the QR factorization of a Gaussian matrix.
fn random_unitary(n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let cols: Vec<Vec<C64>> = (0..n).map(|_| random_unit_vector(n, rng)).collect();
    let m = CMatrix::from_fn(n, n, |i, j| cols[j][i]);
    m.qr().q()
}

fn minint_checks(opts: &VerifyOptions, models: &[KernelModel], closed: &[ClosedFormKernel]) -> Vec<Check> {
    let mut out = Vec::new();
    out.push(run("minint", "rkhs-identity", || {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed + 10);
        let mut worst = 0.0f64;
        for m in models {
            for _ in 0..opts.samples {
                let p = random_interior(m.domain(), 0.9, &mut rng);
                worst = worst.max(rel(i0(m, &p)?.value, 1.0 / m.kernel(&p)));
            }
        }
        Ok(check("minint", "rkhs-identity", worst, 1e-10, worst <= 1e-10, "I⁰ vs 1/K".into()))
    }));
    out.push(run("minint", "bergman-fuchs-residuals", || {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed + 11);
        let mut worst = 0.0f64;
        let per = 50usize.div_ceil(closed.len());
        for s in closed {
            for _ in 0..per {
                let p = random_interior(s.domain(), 0.6, &mut rng);
                let (x, y) = (random_unit_vector(s.dim(), &mut rng), random_unit_vector(s.dim(), &mut rng));
                worst = worst.max(bergman_fuchs_check_kernel(s, &p, &x, &y)?.max_residual());
            }
        }
        Ok(check(
            "minint",
            "bergman-fuchs-residuals",
            worst,
            1e-8,
            worst <= 1e-8,
            "kernel, metric, holomorphic and general polarized identities".into(),
        ))
    }));
    out.push(run("minint", "monotonicity", || {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed + 12);
        let mut violations = 0usize;
        let mut worst = f64::NEG_INFINITY;
        for i in 0..20 {
            let r = 0.4 + 0.5 * rng.gen::<f64>();
            let (sub, sup) = if i % 2 == 0 {
                (DomainSpec::ball(vec![c64(0.0, 0.0); 2], r), DomainSpec::unit_ball(2))
            } else {
                (DomainSpec::polydisc(vec![r * 0.7, r]), DomainSpec::polydisc(vec![0.7, 1.0]))
            };
            let (a, b) = (build_model(&sub, 6, None)?, build_model(&sup, 6, None)?);
            let p = random_interior(&sub, 0.9 * r * 0.7, &mut rng);
            let (x, y) = (random_unit_vector(2, &mut rng), random_unit_vector(2, &mut rng));
            let rep = monotonicity_check(&a, &b, &p, &x, &y)?;
            violations += rep.holds.iter().filter(|h| !**h).count();
            for k in 0..3 {
                worst = worst.max(rep.sub[k] / rep.sup[k] - 1.0);
            }
        }
        Ok(check("minint", "monotonicity", worst, 1e-12, violations == 0, format!("{violations} violations over 20 nested pairs")))
    }));
    out.push(run("minint", "kkt-oracle", || {
        let mut rng = instance_rng(opts.seed + 13);
        let mut worst = 0.0f64;
        for _ in 0..50 {
            let (rows, rhs) = random_instance(&mut rng, 3);
            let a = solve_min_norm(&rows, &rhs)?.value;
            let b = kkt_value(&rows, &rhs).ok_or_else(|| crate::Error::DegenerateConstraints { context: "KKT oracle".into(), condition: f64::INFINITY })?;
            worst = worst.max(rel(a, b));
        }
        Ok(check("minint", "kkt-oracle", worst, 1e-10, worst <= 1e-10, "50 random instances".into()))
    }));
    out.push(run("minint", "automorphism-transformation-law", || {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed + 14);
        let ball = ClosedFormKernel::new(DomainSpec::unit_ball(2))?;
        let mut worst = 0.0f64;
        for _ in 0..opts.samples {
            let f = MapKind::BallAutomorphism { a: random_interior(ball.domain(), 0.6, &mut rng) };
            let p = random_interior(ball.domain(), 0.6, &mut rng);
            let (x, y) = (random_unit_vector(2, &mut rng), random_unit_vector(2, &mut rng));
            let rep = transformation_check(&f, &ball, &ball, &p, &x, &y)?;
            worst = worst.max(rep.residuals.iter().cloned().fold(0.0, f64::max));
        }
        Ok(check("minint", "automorphism-transformation-law", worst, 1e-8, worst <= 1e-8, "I⁰, I¹, I²".into()))
    }));
    out.push(run("minint", "homogeneity", || {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed + 15);
        let s = ClosedFormKernel::new(DomainSpec::unit_ball(2))?;
        let mut worst = 0.0f64;
        for _ in 0..opts.samples {
            let p = random_interior(s.domain(), 0.6, &mut rng);
            let (x, y) = (random_unit_vector(2, &mut rng), random_unit_vector(2, &mut rng));
            let (l, m) = (C64::from_polar(0.5 + rng.gen::<f64>(), rng.gen::<f64>() * 6.0), c64(1.7, -0.4));
            let lx: Vec<C64> = x.iter().map(|v| v * l).collect();
            let my: Vec<C64> = y.iter().map(|v| v * m).collect();
            let i1 = crate::minint::i1_kernel(&s, &p, &x)?;
            let i2 = crate::minint::i2_kernel(&s, &p, &x, &y)?;
            worst = worst.max(rel(crate::minint::i1_kernel(&s, &p, &lx)?, i1 / l.norm_sqr()));
            worst = worst.max(rel(crate::minint::i2_kernel(&s, &p, &lx, &my)?, i2 / (l.norm_sqr() * m.norm_sqr())));
            let b = bisectional_at(&s, &p, &x, &y)?;
            worst = worst.max((bisectional_at(&s, &p, &lx, &my)? - b).abs());
        }
        Ok(check("minint", "homogeneity", worst, 1e-10, worst <= 1e-10, "I¹, I² scaling and B scale invariance".into()))
    }));
    out
}

fn experiment_checks(opts: &VerifyOptions) -> Vec<Check> {
    let mut out = Vec::new();
    out.push(run("experiments", "curvature-ratio-identity", || {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed + 16);
        let mut worst = 0.0f64;
        let mut worst_parallel = 0.0f64;
        for s in closed_forms()? {
            for _ in 0..opts.samples {
                let p = random_interior(s.domain(), 0.6, &mut rng);
                let (x, y) = (random_unit_vector(s.dim(), &mut rng), random_unit_vector(s.dim(), &mut rng));
                let t = s.derivs(&p)?;
                let g = metric(&t)?;
                let b = bisectional(&curvature_tensor(&t, &g)?, &g, &x, &y)?;
                let overlap = g.pair(&x, &y).norm_sqr() / (g.norm_sqr(&x) * g.norm_sqr(&y));
                worst = worst.max((curvature_ratio(&s, &p, &x, &y)? + b - 1.0 - overlap).abs());
                let h = holo_sectional(&curvature_tensor(&t, &g)?, &g, &x)?;
                worst_parallel = worst_parallel.max((curvature_ratio(&s, &p, &x, &x)? + h - 2.0).abs());
            }
        }
        Ok(check(
            "experiments",
            "curvature-ratio-identity",
            worst.max(worst_parallel),
            1e-8,
            worst.max(worst_parallel) <= 1e-8,
            format!("ratio + B = 1 + |g(X,Ȳ)|²/(g(X)g(Y)) residual {worst:.2e}; X = Y case ratio + H = 2 residual {worst_parallel:.2e}"),
        ))
    }));
    out.push(run("experiments", "ball-sweep-constancy", || {
        let s = ClosedFormKernel::new(DomainSpec::unit_ball(2))?;
        let cfg = SweepConfig::new(vec![c64(1.0, 0.0), c64(0.0, 0.0)], vec![0.5, 0.3, 0.2, 0.1, 0.05, 0.02], 8, opts.seed);
        let table = boundary_sweep(&s, &cfg)?;
        let hs: Vec<f64> = table.ok_rows().map(|r| r.h).collect();
        let mean = hs.iter().sum::<f64>() / hs.len() as f64;
        let sd = (hs.iter().map(|h| (h - mean).powi(2)).sum::<f64>() / (hs.len() as f64 - 1.0)).sqrt();
        Ok(check("experiments", "ball-sweep-constancy", sd, 1e-10, sd <= 1e-10 && hs.len() == 6, format!("mean H = {mean:.12}")))
    }));
    out.push(run("experiments", "localization-lower-inequality", || {
        let cfg = LocalizationConfig::ball_example(&[0.4, 0.2, 0.1], 4, 20_000, opts.seed)?;
        let rep = localization_ratio(&cfg)?;
        Ok(check(
            "experiments",
            "localization-lower-inequality",
            rep.min_ratio,
            1.0 - 1e-9,
            rep.lower_holds(1e-9),
            format!("ratios in [{:.4}, {:.4?}]", rep.min_ratio, rep.max_ratio),
        ))
    }));
    out.push(run("experiments", "weight-monotone-in-c", || {
        let delta = 0.01;
        let rho = DomainSpec::General {
            rho: RhoExpr::LeviModel { levi: vec![1.0] },
            bbox: vec![[-1.0, 1.0]; 4],
        };
        let region = BoxRegion::from(&AnisoBox::new(BoxKind::PDeltaA, vec![c64(0.0, 0.0); 2], delta, 1.0, 0)?);
        let profile = HessianProfile::Anisotropic { rho: rho.clone(), delta, ell: 0 };
        let mut passed_before = false;
        let mut monotone = true;
        let mut first_pass = f64::NAN;
        for c in [1.0, 1.5, 1.8, 1.9, 2.0, 2.5, 4.0] {
            let w = WeightFunction::anisotropic_quadratic(2, delta, 0).with_constants(c, [3.0; 3]);
            let ok = check_weight(&w, &region, &rho, &profile, 500, opts.seed).passed();
            monotone &= ok || !passed_before;
            if ok && !passed_before {
                first_pass = c;
            }
            passed_before |= ok;
        }
        Ok(check("experiments", "weight-monotone-in-c", first_pass, 4.0, monotone && passed_before, "smallest passing C on the grid".into()))
    }));
    out.push(run("experiments", "polydisc-bisectional-closed-form", || {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed + 17);
        let (mut worst, mut out_of_range) = (0.0f64, 0usize);
        for _ in 0..100 {
            let radii = vec![0.3 + rng.gen::<f64>(), 0.3 + rng.gen::<f64>()];
            let s = ClosedFormKernel::new(DomainSpec::polydisc(radii.clone()))?;
            let (x, y) = (random_unit_vector(2, &mut rng), random_unit_vector(2, &mut rng));
            let cf = polydisc_bisectional_closed_form(&radii, &x, &y);
            if !(-1.0..=0.0).contains(&cf) {
                out_of_range += 1;
            }
            worst = worst.max((bisectional_at(&s, &[c64(0.0, 0.0); 2], &x, &y)? - cf).abs());
        }
        Ok(check(
            "experiments",
            "polydisc-bisectional-closed-form",
            worst,
            1e-9,
            worst <= 1e-9 && out_of_range == 0,
            format!("{out_of_range} closed-form values outside [-1, 0]"),
        ))
    }));
    out
}

/// Runs every module's invariant checks.
pub fn run_suite(opts: &VerifyOptions) -> Vec<Check> {
    let mut out = domains_checks(opts);
    match (series_models(opts.degree), closed_forms()) {
        (Ok(models), Ok(closed)) => {
            out.extend(kernel_checks(opts, &models));
            let mut sources: Vec<&dyn KernelSource> = models.iter().map(|m| m as &dyn KernelSource).collect();
            sources.extend(closed.iter().map(|c| c as &dyn KernelSource));
            out.extend(geometry_checks(opts, &sources));
            out.extend(minint_checks(opts, &models, &closed));
        }
        (Err(e), _) | (_, Err(e)) => out.push(errored("basis_kernel", "model-construction", e)),
    }
    out.extend(experiment_checks(opts));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_suite_passes() {
        let checks = run_suite(&VerifyOptions::default());
        let failed: Vec<_> = checks.iter().filter(|c| !c.passed).collect();
        assert!(failed.is_empty(), "{failed:#?}");
        assert!(checks.len() >= 20);
    }
}
