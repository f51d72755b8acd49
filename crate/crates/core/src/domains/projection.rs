//! Nearest-boundary-point projection and inward normals.

use nalgebra::{DMatrix, DVector};

use super::DomainSpec;
use crate::{c64, cnorm, Error, Result, C64};

const RHO_TOL: f64 = 1e-12;
const ALIGN_TOL: f64 = 1e-10;

/// Nearest boundary point `q = π(p)` and the distance `|p − q|`.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub point: Vec<C64>,
    pub dist: f64,
}

/// Unit inward normal `−∇ρ/|∇ρ|` at `q`.
pub fn inward_normal(domain: &DomainSpec, q: &[C64]) -> Result<Vec<C64>> {
    let g = domain.gradient(q);
    let norm = cnorm(&g);
    if !(norm > 0.0) {
        return Err(Error::InvalidInput("defining function has vanishing gradient at q".into()));
    }
    Ok(g.into_iter().map(|v| -v / norm).collect())
}

/// `q + t ν(q)`, required to be interior.
pub fn inward_point(domain: &DomainSpec, q: &[C64], t: f64) -> Result<Vec<C64>> {
    if !(t > 0.0) {
        return Err(Error::InvalidInput(format!("inward distance must be positive, got {t}")));
    }
    let rq = domain.rho(q);
    if rq.abs() > 1e-8 {
        return Err(Error::InvalidInput(format!("q is not a boundary point (rho = {rq:.3e})")));
    }
    let nu = inward_normal(domain, q)?;
    let p: Vec<C64> = q.iter().zip(&nu).map(|(q, v)| q + v * t).collect();
    if !domain.contains(&p) {
        return Err(Error::NotInterior { t, rho: domain.rho(&p) });
    }
    Ok(p)
}

/// Euclidean projection of an interior point onto `{ρ = 0}`.
///
/// Balls and polydiscs are handled in closed form. Other domains use damped
/// Newton on the Lagrange system `x − p + λ∇ρ(x) = 0, ρ(x) = 0`, falling
/// back to projected gradient descent; the result satisfies `|ρ(q)| ≤ 1e-12`
/// and a gradient-alignment residual `≤ 1e-10`.
pub fn boundary_project(domain: &DomainSpec, p: &[C64]) -> Result<Projection> {
    if p.len() != domain.dim() {
        return Err(Error::InvalidInput("point dimension does not match domain".into()));
    }
    if !domain.contains(p) {
        return Err(Error::InvalidInput("boundary projection needs an interior point".into()));
    }
    match domain {
        DomainSpec::Ball { center, radius } => {
            let d: Vec<C64> = p.iter().zip(center).map(|(p, c)| p - c).collect();
            let r = cnorm(&d);
            if r == 0.0 {
                return Err(Error::InvalidInput("projection of the ball center is not unique".into()));
            }
            let point = center.iter().zip(&d).map(|(c, d)| c + d * (radius / r)).collect();
            Ok(Projection { point, dist: radius - r })
        }
        DomainSpec::Polydisc { center, radii } => {
            let j = (0..p.len())
                .min_by(|&a, &b| {
                    let da = radii[a] - (p[a] - center[a]).norm();
                    let db = radii[b] - (p[b] - center[b]).norm();
                    da.total_cmp(&db)
                })
                .expect("nonempty");
            let d = p[j] - center[j];
            let dir = if d.norm() > 0.0 { d / d.norm() } else { c64(1.0, 0.0) };
            let mut point = p.to_vec();
            point[j] = center[j] + dir * radii[j];
            Ok(Projection {
                dist: radii[j] - d.norm(),
                point,
            })
        }
        _ => smooth_projection(domain, p),
    }
}

fn to_real(z: &[C64]) -> Vec<f64> {
    z.iter().flat_map(|w| [w.re, w.im]).collect()
}

fn to_complex(x: &[f64]) -> Vec<C64> {
    x.chunks(2).map(|c| c64(c[0], c[1])).collect()
}

struct Smooth<'a> {
    domain: &'a DomainSpec,
    p: Vec<f64>,
}

impl Smooth<'_> {
    fn rho(&self, x: &[f64]) -> f64 {
        self.domain.rho(&to_complex(x))
    }

    fn grad(&self, x: &[f64]) -> Vec<f64> {
        to_real(&self.domain.gradient(&to_complex(x)))
    }

    fn hessian(&self, x: &[f64]) -> DMatrix<f64> {
        let m = x.len();
        let h = 1e-6 * (1.0 + x.iter().map(|v| v.abs()).fold(0.0, f64::max));
        let mut out = DMatrix::zeros(m, m);
        let mut y = x.to_vec();
        for k in 0..m {
            y[k] = x[k] + h;
            let gp = self.grad(&y);
            y[k] = x[k] - h;
            let gm = self.grad(&y);
            y[k] = x[k];
            for i in 0..m {
                out[(i, k)] = (gp[i] - gm[i]) / (2.0 * h);
            }
        }
        (&out + out.transpose()) * 0.5
    }

    /// Component of `p − x` orthogonal to `∇ρ(x)`.
    fn alignment(&self, x: &[f64]) -> f64 {
        let g = self.grad(x);
        let gn = dot(&g, &g).sqrt();
        let d: Vec<f64> = self.p.iter().zip(x).map(|(p, x)| p - x).collect();
        let along = dot(&d, &g) / gn;
        d.iter()
            .zip(&g)
            .map(|(d, g)| (d - along * g / gn).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    fn converged(&self, x: &[f64]) -> bool {
        self.rho(x).abs() <= RHO_TOL && self.alignment(x) <= ALIGN_TOL
    }

    /// Newton steps along the gradient onto the zero set.
    fn onto_surface(&self, x: &mut [f64]) {
        for _ in 0..100 {
            let r = self.rho(x);
            if r.abs() <= 0.1 * RHO_TOL {
                break;
            }
            let g = self.grad(x);
            let gg = dot(&g, &g);
            if gg == 0.0 {
                break;
            }
            for (xi, gi) in x.iter_mut().zip(&g) {
                *xi -= r * gi / gg;
            }
        }
    }

    fn residual(&self, x: &[f64], lambda: f64) -> DVector<f64> {
        let m = x.len();
        let g = self.grad(x);
        DVector::from_fn(m + 1, |i, _| if i < m { x[i] - self.p[i] + lambda * g[i] } else { self.rho(x) })
    }

    fn newton(&self, x: &mut Vec<f64>, lambda: &mut f64, max_iter: usize) -> bool {
        let m = x.len();
        for _ in 0..max_iter {
            if self.converged(x) {
                return true;
            }
            let f = self.residual(x, *lambda);
            let g = self.grad(x);
            let h = self.hessian(x);
            let mut jac = DMatrix::zeros(m + 1, m + 1);
            for i in 0..m {
                for k in 0..m {
                    jac[(i, k)] = *lambda * h[(i, k)] + if i == k { 1.0 } else { 0.0 };
                }
                jac[(i, m)] = g[i];
                jac[(m, i)] = g[i];
            }
            let Some(step) = jac.lu().solve(&(-&f)) else {
                return false;
            };
            let f0 = f.norm();
            let mut s = 1.0;
            loop {
                let trial: Vec<f64> = x.iter().zip(step.iter()).map(|(x, d)| x + s * d).collect();
                let tl = *lambda + s * step[m];
                if self.residual(&trial, tl).norm() < (1.0 - 1e-4 * s) * f0 || s < 1e-8 {
                    *x = trial;
                    *lambda = tl;
                    break;
                }
                s *= 0.5;
            }
        }
        self.converged(x)
    }

    fn projected_gradient(&self, x: &mut Vec<f64>) {
        *x = self.p.clone();
        self.onto_surface(x);
        for _ in 0..5000 {
            let g = self.grad(x);
            let gn = dot(&g, &g).sqrt();
            let d: Vec<f64> = self.p.iter().zip(x.iter()).map(|(p, x)| p - x).collect();
            let along = dot(&d, &g) / gn;
            let tangent: Vec<f64> = d.iter().zip(&g).map(|(d, g)| d - along * g / gn).collect();
            let tn = dot(&tangent, &tangent).sqrt();
            if tn < 1e-13 {
                break;
            }
            for (xi, ti) in x.iter_mut().zip(&tangent) {
                *xi += 0.5 * ti;
            }
            self.onto_surface(x);
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn smooth_projection(domain: &DomainSpec, p: &[C64]) -> Result<Projection> {
    let solver = Smooth { domain, p: to_real(p) };
    let mut x = solver.p.clone();
    solver.onto_surface(&mut x);
    let lambda_of = |x: &[f64]| {
        let g = solver.grad(x);
        let d: Vec<f64> = solver.p.iter().zip(x).map(|(p, x)| p - x).collect();
        dot(&d, &g) / dot(&g, &g)
    };
    let mut lambda = lambda_of(&x);
    let mut ok = solver.newton(&mut x, &mut lambda, 60);
    if !ok {
        solver.projected_gradient(&mut x);
        lambda = lambda_of(&x);
        ok = solver.newton(&mut x, &mut lambda, 30);
    }
    let outward = dot(&solver.grad(&x), &solver.p.iter().zip(&x).map(|(p, x)| p - x).collect::<Vec<_>>());
    if !ok || !(outward < 0.0) {
        return Err(Error::ProjectionFailed {
            iterations: 90,
            rho: solver.rho(&x),
            alignment: solver.alignment(&x),
            last: x.chunks(2).map(|c| [c[0], c[1]]).collect(),
        });
    }
    let dist = solver.p.iter().zip(&x).map(|(p, x)| (p - x).powi(2)).sum::<f64>().sqrt();
    Ok(Projection {
        point: to_complex(&x),
        dist,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::RhoExpr;

    fn close(a: &[C64], b: &[C64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).norm() <= tol)
    }

    #[test]
    fn ball_projection() {
        let d = DomainSpec::unit_ball(2);
        let pr = boundary_project(&d, &[c64(0.9, 0.0), c64(0.0, 0.0)]).unwrap();
        assert!(close(&pr.point, &[c64(1.0, 0.0), c64(0.0, 0.0)], 1e-15));
        assert!((pr.dist - 0.1).abs() < 1e-15);
    }

    #[test]
    fn polydisc_projection() {
        let d = DomainSpec::unit_polydisc(2);
        let pr = boundary_project(&d, &[c64(0.95, 0.0), c64(0.0, 0.0)]).unwrap();
        assert!(close(&pr.point, &[c64(1.0, 0.0), c64(0.0, 0.0)], 1e-15));
        assert!((pr.dist - 0.05).abs() < 1e-15);
    }

    #[test]
    fn ellipsoid_projection_on_axis() {
        let d = DomainSpec::ellipsoid(vec![1, 2]);
        let pr = boundary_project(&d, &[c64(0.0, 0.0), c64(0.9, 0.0)]).unwrap();
        assert!(close(&pr.point, &[c64(0.0, 0.0), c64(1.0, 0.0)], 1e-12));
        assert!((pr.dist - 0.1).abs() < 1e-12);
    }

    #[test]
    fn inward_point_examples() {
        let b = DomainSpec::unit_ball(2);
        let p = inward_point(&b, &[c64(1.0, 0.0), c64(0.0, 0.0)], 0.1).unwrap();
        assert!(close(&p, &[c64(0.9, 0.0), c64(0.0, 0.0)], 1e-15));
        let p = inward_point(&b, &[c64(0.0, 0.0), c64(1.0, 0.0)], 0.5).unwrap();
        assert!(close(&p, &[c64(0.0, 0.0), c64(0.5, 0.0)], 1e-15));
        let e = DomainSpec::ellipsoid(vec![1, 2]);
        let p = inward_point(&e, &[c64(0.0, 0.0), c64(1.0, 0.0)], 0.05).unwrap();
        assert!(close(&p, &[c64(0.0, 0.0), c64(0.95, 0.0)], 1e-15));
    }

    #[test]
    fn inward_point_too_far_is_an_error() {
        let b = DomainSpec::unit_ball(2);
        let e = inward_point(&b, &[c64(1.0, 0.0), c64(0.0, 0.0)], 2.5).unwrap_err();
        assert!(matches!(e, Error::NotInterior { .. }));
    }

    #[test]
    fn projection_round_trip_on_general_domains() {
        let levi = DomainSpec::General {
            rho: RhoExpr::Intersection {
                parts: vec![
                    DomainSpec::General {
                        rho: RhoExpr::LeviModel { levi: vec![1.0] },
                        bbox: vec![[-1.0, 1.0]; 4],
                    },
                    DomainSpec::unit_ball(2),
                ],
            },
            bbox: vec![[-1.0, 1.0]; 4],
        };
        let domains = [DomainSpec::ellipsoid(vec![1, 2]), DomainSpec::ellipsoid(vec![2, 3]), levi];
        let points = [
            [c64(0.2, 0.1), c64(0.7, -0.3)],
            [c64(-0.5, 0.3), c64(0.1, 0.55)],
            [c64(-0.05, 0.02), c64(0.1, 0.05)],
        ];
        for d in &domains {
            for p in &points {
                if !d.contains(p) {
                    continue;
                }
                let pr = boundary_project(d, p).unwrap();
                assert!(d.rho(&pr.point).abs() <= 1e-12);
                let back = inward_point(d, &pr.point, pr.dist).unwrap();
                assert!(close(&back, p, 1e-9), "{:?} -> {:?}", p, back);
            }
        }
    }

    #[test]
    fn exterior_point_is_rejected() {
        let d = DomainSpec::ellipsoid(vec![1, 2]);
        assert!(boundary_project(&d, &[c64(2.0, 0.0), c64(0.0, 0.0)]).is_err());
    }
}
