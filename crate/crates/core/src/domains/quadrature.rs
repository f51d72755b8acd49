//! Quadrature rules over `{ρ < 0}`: cut-cell tensor grids and seeded Monte
//! Carlo rejection sampling from the bounding box.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::DomainSpec;
use crate::{c64, Error, Result, C64};

const MC_CHUNK: usize = 8192;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    TensorGrid,
    MonteCarlo,
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tensor-grid" | "grid" | "tensor" => Ok(Scheme::TensorGrid),
            "monte-carlo" | "mc" => Ok(Scheme::MonteCarlo),
            other => Err(Error::InvalidInput(format!("unknown quadrature scheme '{other}'"))),
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Scheme::TensorGrid => "tensor-grid",
            Scheme::MonteCarlo => "monte-carlo",
        })
    }
}

/// Nodes strictly inside the domain with positive weights.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuadratureRule {
    pub nodes: Vec<Vec<C64>>,
    pub weights: Vec<f64>,
    pub scheme: Scheme,
    pub resolution: usize,
    pub seed: Option<u64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Sum of weights, an estimate of the domain volume.
    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// The sub-rule of nodes lying in `domain`.
    pub fn restrict(&self, domain: &DomainSpec) -> QuadratureRule {
        let (nodes, weights) = self
            .nodes
            .iter()
            .zip(&self.weights)
            .filter(|(z, _)| domain.contains(z))
            .map(|(z, w)| (z.clone(), *w))
            .unzip();
        QuadratureRule {
            nodes,
            weights,
            scheme: self.scheme,
            resolution: self.resolution,
            seed: self.seed,
        }
    }

    /// Concatenation of two rules over disjoint regions.
    pub fn union(&self, other: &QuadratureRule) -> QuadratureRule {
        let mut out = self.clone();
        out.nodes.extend(other.nodes.iter().cloned());
        out.weights.extend(other.weights.iter().copied());
        out
    }

    /// Short identifier recorded in model diagnostics.
    pub fn id(&self) -> String {
        match self.seed {
            Some(s) => format!("{}:{}:seed{}:{}nodes", self.scheme, self.resolution, s, self.len()),
            None => format!("{}:{}:{}nodes", self.scheme, self.resolution, self.len()),
        }
    }
}

/// Builds a quadrature rule. For the tensor grid, `resolution` is the number
/// of cells per real axis of the bounding box; for Monte Carlo it is the
/// number of candidate points drawn from the box.
pub fn build_quadrature(domain: &DomainSpec, scheme: Scheme, resolution: usize, seed: u64) -> Result<QuadratureRule> {
    if resolution == 0 {
        return Err(Error::InvalidInput("quadrature resolution must be at least 1".into()));
    }
    let bbox = domain.bounding_box();
    let (nodes, weights) = match scheme {
        Scheme::TensorGrid => tensor_grid(domain, &bbox, resolution)?,
        Scheme::MonteCarlo => monte_carlo(domain, &bbox, resolution, seed),
    };
    if nodes.is_empty() {
        return Err(Error::EmptyQuadrature);
    }
    Ok(QuadratureRule {
        nodes,
        weights,
        scheme,
        resolution,
        seed: (scheme == Scheme::MonteCarlo).then_some(seed),
    })
}

fn point_from_real(x: &[f64]) -> Vec<C64> {
    x.chunks(2).map(|c| c64(c[0], c[1])).collect()
}

fn tensor_grid(domain: &DomainSpec, bbox: &[[f64; 2]], res: usize) -> Result<(Vec<Vec<C64>>, Vec<f64>)> {
    let dims = bbox.len();
    let total = (res as u128).checked_pow(dims as u32).filter(|&t| t <= 50_000_000);
    let Some(total) = total else {
        return Err(Error::InvalidInput(format!(
            "tensor grid with {res} cells per axis in {dims} real dimensions is too large"
        )));
    };
    let h: Vec<f64> = bbox.iter().map(|b| (b[1] - b[0]) / res as f64).collect();
    let cell_vol: f64 = h.iter().product();
    let sub: usize = match dims {
        0..=2 => 6,
        3..=4 => 3,
        _ => 2,
    };

    let cells: Vec<Option<(Vec<C64>, f64)>> = (0..total as usize)
        .into_par_iter()
        .map(|flat| {
            let mut idx = flat;
            let lo: Vec<f64> = (0..dims)
                .map(|k| {
                    let i = idx % res;
                    idx /= res;
                    bbox[k][0] + i as f64 * h[k]
                })
                .collect();
            let center: Vec<f64> = lo.iter().zip(&h).map(|(l, h)| l + 0.5 * h).collect();
            let center_in = domain.contains(&point_from_real(&center));
            let mut any_in = center_in;
            let mut all_in = center_in;
            let mut probes_in: Vec<Vec<f64>> = if center_in { vec![center.clone()] } else { Vec::new() };
            for corner in 0..(1usize << dims) {
                let x: Vec<f64> = (0..dims).map(|k| lo[k] + if corner >> k & 1 == 1 { h[k] } else { 0.0 }).collect();
                let inside = domain.contains(&point_from_real(&x));
                any_in |= inside;
                all_in &= inside;
                if inside {
                    probes_in.push(x);
                }
            }
            if all_in {
                return Some((point_from_real(&center), cell_vol));
            }
            if !any_in {
                return None;
            }
            // cut cell: each sub-cell contributes a fraction from the signed
            // distance to the linearised boundary
            let grad = domain.gradient(&point_from_real(&center));
            let gnorm = grad.iter().map(|g| g.norm_sqr()).sum::<f64>().sqrt();
            let normal: Vec<f64> = (0..dims)
                .map(|k| if k % 2 == 0 { grad[k / 2].re } else { grad[k / 2].im } / gnorm)
                .collect();
            let half_width: f64 = (0..dims).map(|k| 0.5 * normal[k].abs() * h[k] / sub as f64).sum();
            let count = sub.pow(dims as u32);
            let mut frac_sum = 0.0;
            let mut centroid = vec![0.0; dims];
            let mut inside_pts: Vec<Vec<f64>> = Vec::new();
            for s in 0..count {
                let mut r = s;
                let x: Vec<f64> = (0..dims)
                    .map(|k| {
                        let i = r % sub;
                        r /= sub;
                        lo[k] + (i as f64 + 0.5) / sub as f64 * h[k]
                    })
                    .collect();
                let z = point_from_real(&x);
                let inside = domain.contains(&z);
                let frac = if gnorm.is_finite() && gnorm > 0.0 && half_width > 0.0 {
                    (0.5 - domain.rho(&z) / gnorm / (2.0 * half_width)).clamp(0.0, 1.0)
                } else if inside {
                    1.0
                } else {
                    0.0
                };
                frac_sum += frac;
                for k in 0..dims {
                    centroid[k] += frac * x[k];
                }
                if inside {
                    inside_pts.push(x);
                }
            }
            if frac_sum == 0.0 {
                return None;
            }
            if inside_pts.is_empty() {
                inside_pts = probes_in;
            }
            centroid.iter_mut().for_each(|c| *c /= frac_sum);
            let node = inside_pts
                .iter()
                .min_by(|a, b| dist2(a, &centroid).total_cmp(&dist2(b, &centroid)))
                .expect("nonempty");
            Some((point_from_real(node), cell_vol * frac_sum / count as f64))
        })
        .collect();

    Ok(cells.into_iter().flatten().unzip())
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum()
}

fn monte_carlo(domain: &DomainSpec, bbox: &[[f64; 2]], draws: usize, seed: u64) -> (Vec<Vec<C64>>, Vec<f64>) {
    let vol: f64 = bbox.iter().map(|b| b[1] - b[0]).product();
    let weight = vol / draws as f64;
    let chunks = draws.div_ceil(MC_CHUNK);
    let parts: Vec<Vec<Vec<C64>>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let count = MC_CHUNK.min(draws - c * MC_CHUNK);
            let mut out = Vec::new();
            for _ in 0..count {
                let x: Vec<f64> = bbox.iter().map(|b| rng.gen_range(b[0]..b[1])).collect();
                let z = point_from_real(&x);
                if domain.contains(&z) {
                    out.push(z);
                }
            }
            out
        })
        .collect();
    let nodes: Vec<Vec<C64>> = parts.into_iter().flatten().collect();
    let weights = vec![weight; nodes.len()];
    (nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn unit_disc_grid_area() {
        let d = DomainSpec::unit_ball(1);
        let q = build_quadrature(&d, Scheme::TensorGrid, 200, 0).unwrap();
        assert!((q.total_mass() - PI).abs() < 0.01 * PI, "{}", q.total_mass());
        assert!(q.nodes.iter().all(|z| d.contains(z)));
    }

    #[test]
    fn grid_error_decreases_under_refinement() {
        let d = DomainSpec::unit_ball(1);
        let errs: Vec<f64> = [50, 100, 200, 400]
            .iter()
            .map(|&r| (build_quadrature(&d, Scheme::TensorGrid, r, 0).unwrap().total_mass() - PI).abs())
            .collect();
        for w in errs.windows(2) {
            assert!(w[1] < w[0], "{errs:?}");
        }
    }

    #[test]
    fn polydisc_monte_carlo_volume() {
        let d = DomainSpec::unit_polydisc(2);
        let q = build_quadrature(&d, Scheme::MonteCarlo, 100_000, 7).unwrap();
        assert!((q.total_mass() - PI * PI).abs() < 0.02 * PI * PI, "{}", q.total_mass());
        assert!(q.nodes.iter().all(|z| d.contains(z)));
    }

    #[test]
    fn monte_carlo_is_deterministic() {
        let d = DomainSpec::ellipsoid(vec![1, 2]);
        let a = build_quadrature(&d, Scheme::MonteCarlo, 20_000, 3).unwrap();
        let b = build_quadrature(&d, Scheme::MonteCarlo, 20_000, 3).unwrap();
        assert_eq!(a.nodes, b.nodes);
        let c = build_quadrature(&d, Scheme::MonteCarlo, 20_000, 4).unwrap();
        assert_ne!(a.nodes, c.nodes);
    }

    #[test]
    fn empty_intersection_is_an_error() {
        let ball = DomainSpec::ball(vec![c64(3.0, 0.0), c64(0.0, 0.0)], 1.0);
        let d = DomainSpec::General {
            rho: super::super::RhoExpr::Intersection { parts: vec![ball] },
            bbox: vec![[-1.0, 1.0]; 4],
        };
        for scheme in [Scheme::MonteCarlo, Scheme::TensorGrid] {
            assert!(matches!(build_quadrature(&d, scheme, 20, 1), Err(Error::EmptyQuadrature)));
        }
    }
}
