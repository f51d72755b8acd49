//! Model domains `Ω = {ρ < 0}` and their boundary geometry.

mod aniso;
mod file;
mod projection;
mod quadrature;

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub(crate) use aniso::sample_polydisc;
pub use aniso::{box_contained_in, contained_in, polydisc_contained_in, AnisoBox, BoxKind};
pub use file::DomainFile;
pub use projection::{boundary_project, inward_normal, inward_point, Projection};
pub use quadrature::{build_quadrature, QuadratureRule, Scheme};

use crate::{c64, Error, Result, C64};

/// A user-supplied defining function for [`RhoExpr::Custom`].
#[derive(Clone)]
pub struct CustomRho(pub Arc<dyn Fn(&[C64]) -> f64 + Send + Sync>);

impl fmt::Debug for CustomRho {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("CustomRho(..)")
    }
}

/// Named defining-function expressions for [`DomainSpec::General`].
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum RhoExpr {
    /// `max_i ρ_i`: the intersection of the listed domains.
    Intersection { parts: Vec<DomainSpec> },
    /// `max(ρ_keep, −ρ_remove)`: `keep` with the closure of `remove` cut out.
    Difference { keep: Box<DomainSpec>, remove: Box<DomainSpec> },
    /// `Re ⟨z, normal⟩ − offset`.
    HalfSpace { normal: Vec<C64>, offset: f64 },
    /// `Re z₁ + Σ_{j≥2} λ_j |z_j|²`, the quadratic model of a boundary with
    /// Levi eigenvalues `λ` (unbounded; always paired with a bounding box).
    LeviModel { levi: Vec<f64> },
    #[serde(skip)]
    Custom(CustomRho),
}

/// A bounded model domain given by a defining function.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "DomainFile", into = "DomainFile")]
pub enum DomainSpec {
    /// `{|z_j − c_j| < β_j}`.
    Polydisc { center: Vec<C64>, radii: Vec<f64> },
    /// `{|z − c| < r}`.
    Ball { center: Vec<C64>, radius: f64 },
    /// `{Σ |z_j|^{2 m_j} < 1}`.
    Ellipsoid { exponents: Vec<u32> },
    /// `{ρ < 0}` inside a bounding box given as `2n` real intervals ordered
    /// `Re z₁, Im z₁, Re z₂, …`.
    General { rho: RhoExpr, bbox: Vec<[f64; 2]> },
}

impl DomainSpec {
    pub fn unit_polydisc(n: usize) -> Self {
        DomainSpec::Polydisc {
            center: vec![C64::new(0.0, 0.0); n],
            radii: vec![1.0; n],
        }
    }

    pub fn polydisc(radii: Vec<f64>) -> Self {
        DomainSpec::Polydisc {
            center: vec![C64::new(0.0, 0.0); radii.len()],
            radii,
        }
    }

    pub fn unit_ball(n: usize) -> Self {
        DomainSpec::Ball {
            center: vec![C64::new(0.0, 0.0); n],
            radius: 1.0,
        }
    }

    pub fn ball(center: Vec<C64>, radius: f64) -> Self {
        DomainSpec::Ball { center, radius }
    }

    pub fn ellipsoid(exponents: Vec<u32>) -> Self {
        DomainSpec::Ellipsoid { exponents }
    }

    /// Intersection of domains, with bounding box the intersection of theirs.
    pub fn intersection(parts: Vec<DomainSpec>) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::InvalidInput("empty intersection".into()))?;
        let mut bbox = first.bounding_box();
        for p in &parts[1..] {
            if p.dim() != first.dim() {
                return Err(Error::InvalidInput("dimension mismatch in intersection".into()));
            }
            for (b, o) in bbox.iter_mut().zip(p.bounding_box()) {
                b[0] = b[0].max(o[0]);
                b[1] = b[1].min(o[1]);
            }
        }
        if bbox.iter().any(|b| b[0] >= b[1]) {
            return Err(Error::InvalidInput("bounding boxes do not overlap".into()));
        }
        Ok(DomainSpec::General {
            rho: RhoExpr::Intersection { parts },
            bbox,
        })
    }

    /// `keep` minus the closure of `remove`, boxed by `keep`.
    pub fn difference(keep: DomainSpec, remove: DomainSpec) -> Self {
        let bbox = keep.bounding_box();
        DomainSpec::General {
            rho: RhoExpr::Difference {
                keep: Box::new(keep),
                remove: Box::new(remove),
            },
            bbox,
        }
    }

    /// `{Re z₁ < 0} ∩ B(0, r)`.
    pub fn half_ball(n: usize, radius: f64) -> Self {
        let mut normal = vec![C64::new(0.0, 0.0); n];
        normal[0] = C64::new(1.0, 0.0);
        let mut bbox = vec![[-radius, radius]; 2 * n];
        bbox[0] = [-radius, 0.0];
        DomainSpec::General {
            rho: RhoExpr::Intersection {
                parts: vec![
                    DomainSpec::ball(vec![C64::new(0.0, 0.0); n], radius),
                    DomainSpec::General {
                        rho: RhoExpr::HalfSpace { normal, offset: 0.0 },
                        bbox: bbox.clone(),
                    },
                ],
            },
            bbox,
        }
    }

    pub fn custom(n: usize, rho: impl Fn(&[C64]) -> f64 + Send + Sync + 'static, bbox: Vec<[f64; 2]>) -> Self {
        assert_eq!(bbox.len(), 2 * n, "bounding box needs 2n intervals");
        DomainSpec::General {
            rho: RhoExpr::Custom(CustomRho(Arc::new(rho))),
            bbox,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            DomainSpec::Polydisc { radii, .. } => radii.len(),
            DomainSpec::Ball { center, .. } => center.len(),
            DomainSpec::Ellipsoid { exponents } => exponents.len(),
            DomainSpec::General { bbox, .. } => bbox.len() / 2,
        }
    }

    pub fn variant_name(&self) -> &'static str {
        match self {
            DomainSpec::Polydisc { .. } => "polydisc",
            DomainSpec::Ball { .. } => "ball",
            DomainSpec::Ellipsoid { .. } => "ellipsoid",
            DomainSpec::General { .. } => "general",
        }
    }

    /// Polydisc, ball and ellipsoid are invariant under `z_j ↦ e^{iθ_j} z_j`
    /// about their center.
    pub fn is_reinhardt(&self) -> bool {
        !matches!(self, DomainSpec::General { .. })
    }

    /// Center of rotational symmetry for Reinhardt variants, origin otherwise.
    pub fn center(&self) -> Vec<C64> {
        match self {
            DomainSpec::Polydisc { center, .. } | DomainSpec::Ball { center, .. } => center.clone(),
            _ => vec![C64::new(0.0, 0.0); self.dim()],
        }
    }

    /// Defining function value.
    pub fn rho(&self, z: &[C64]) -> f64 {
        match self {
            DomainSpec::Polydisc { center, radii } => {
                z.iter()
                    .zip(center)
                    .zip(radii)
                    .map(|((z, c), b)| (z - c).norm_sqr() / (b * b))
                    .fold(f64::NEG_INFINITY, f64::max)
                    - 1.0
            }
            DomainSpec::Ball { center, radius } => {
                z.iter().zip(center).map(|(z, c)| (z - c).norm_sqr()).sum::<f64>() / (radius * radius) - 1.0
            }
            DomainSpec::Ellipsoid { exponents } => {
                z.iter().zip(exponents).map(|(z, &m)| z.norm_sqr().powi(m as i32)).sum::<f64>() - 1.0
            }
            DomainSpec::General { rho, .. } => rho.eval(z),
        }
    }

    /// `true` iff `ρ(z) < 0` (and, for general domains, `z` is in the box).
    pub fn contains(&self, z: &[C64]) -> bool {
        if z.len() != self.dim() {
            return false;
        }
        if let DomainSpec::General { bbox, .. } = self {
            let inside = z
                .iter()
                .enumerate()
                .all(|(j, w)| in_interval(w.re, bbox[2 * j]) && in_interval(w.im, bbox[2 * j + 1]));
            if !inside {
                return false;
            }
        }
        self.rho(z) < 0.0
    }

    /// Real gradient of `ρ` packed as `G_j = ∂ρ/∂x_j + i ∂ρ/∂y_j` (that is,
    /// `2 ∂ρ/∂z̄_j`). For max-type defining functions this is the gradient of
    /// the active piece.
    pub fn gradient(&self, z: &[C64]) -> Vec<C64> {
        match self {
            DomainSpec::Polydisc { center, radii } => {
                let active = active_polydisc_coord(z, center, radii);
                let mut g = vec![C64::new(0.0, 0.0); z.len()];
                g[active] = (z[active] - center[active]) * (2.0 / (radii[active] * radii[active]));
                g
            }
            DomainSpec::Ball { center, radius } => z
                .iter()
                .zip(center)
                .map(|(z, c)| (z - c) * (2.0 / (radius * radius)))
                .collect(),
            DomainSpec::Ellipsoid { exponents } => z
                .iter()
                .zip(exponents)
                .map(|(z, &m)| z * (2.0 * m as f64 * z.norm_sqr().powi(m as i32 - 1)))
                .collect(),
            DomainSpec::General { rho, .. } => rho.gradient(z),
        }
    }

    /// Axis-aligned bounding box as `2n` real intervals.
    pub fn bounding_box(&self) -> Vec<[f64; 2]> {
        match self {
            DomainSpec::Polydisc { center, radii } => center
                .iter()
                .zip(radii)
                .flat_map(|(c, b)| [[c.re - b, c.re + b], [c.im - b, c.im + b]])
                .collect(),
            DomainSpec::Ball { center, radius } => center
                .iter()
                .flat_map(|c| [[c.re - radius, c.re + radius], [c.im - radius, c.im + radius]])
                .collect(),
            DomainSpec::Ellipsoid { exponents } => exponents.iter().flat_map(|_| [[-1.0, 1.0], [-1.0, 1.0]]).collect(),
            DomainSpec::General { bbox, .. } => bbox.clone(),
        }
    }

    /// Exact volume for Reinhardt variants.
    pub fn known_volume(&self) -> Option<f64> {
        match self {
            DomainSpec::Polydisc { radii, .. } => Some(radii.iter().map(|b| PI * b * b).product()),
            DomainSpec::Ball { radius, center } => {
                let n = center.len() as i32;
                Some(PI.powi(n) * radius.powi(2 * n) / crate::multi_index::factorial(n as u32))
            }
            DomainSpec::Ellipsoid { exponents } => {
                crate::basis_kernel::monomial_norm_closed(self, &crate::MultiIndex::zero(exponents.len())).ok()
            }
            DomainSpec::General { .. } => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidInput(m.to_string()));
        match self {
            DomainSpec::Polydisc { center, radii } => {
                if radii.is_empty() || center.len() != radii.len() {
                    return bad("polydisc center and radii must have the same positive length");
                }
                if radii.iter().any(|&b| !(b > 0.0) || !b.is_finite()) {
                    return bad("polydisc radii must be positive");
                }
            }
            DomainSpec::Ball { center, radius } => {
                if center.is_empty() || !(*radius > 0.0) || !radius.is_finite() {
                    return bad("ball needs a nonempty center and positive radius");
                }
            }
            DomainSpec::Ellipsoid { exponents } => {
                if exponents.is_empty() || exponents.contains(&0) {
                    return bad("ellipsoid exponents must be positive integers");
                }
            }
            DomainSpec::General { rho, bbox } => {
                if bbox.is_empty() || bbox.len() % 2 != 0 {
                    return bad("bounding box needs 2n intervals");
                }
                if bbox.iter().any(|b| !(b[0] < b[1])) {
                    return bad("bounding box intervals must be nondegenerate");
                }
                rho.validate(bbox.len() / 2)?;
            }
        }
        Ok(())
    }
}

impl RhoExpr {
    pub fn eval(&self, z: &[C64]) -> f64 {
        match self {
            RhoExpr::Intersection { parts } => parts.iter().map(|p| p.rho(z)).fold(f64::NEG_INFINITY, f64::max),
            RhoExpr::Difference { keep, remove } => keep.rho(z).max(-remove.rho(z)),
            RhoExpr::HalfSpace { normal, offset } => crate::cdot(z, normal).re - offset,
            RhoExpr::LeviModel { levi } => {
                z[0].re + z[1..].iter().zip(levi).map(|(w, l)| l * w.norm_sqr()).sum::<f64>()
            }
            RhoExpr::Custom(f) => (f.0)(z),
        }
    }

    pub fn gradient(&self, z: &[C64]) -> Vec<C64> {
        match self {
            RhoExpr::Intersection { parts } => {
                let active = parts
                    .iter()
                    .max_by(|a, b| a.rho(z).total_cmp(&b.rho(z)))
                    .expect("nonempty intersection");
                active.gradient(z)
            }
            RhoExpr::Difference { keep, remove } => {
                if keep.rho(z) >= -remove.rho(z) {
                    keep.gradient(z)
                } else {
                    remove.gradient(z).into_iter().map(|g| -g).collect()
                }
            }
            RhoExpr::HalfSpace { normal, .. } => normal.clone(),
            RhoExpr::LeviModel { levi } => {
                let mut g = vec![c64(1.0, 0.0)];
                g.extend(z[1..].iter().zip(levi).map(|(w, l)| w * (2.0 * l)));
                g
            }
            RhoExpr::Custom(_) => fd_gradient(|w| self.eval(w), z, 1e-6),
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        match self {
            RhoExpr::Intersection { parts } => {
                if parts.is_empty() {
                    return Err(Error::InvalidInput("intersection needs at least one part".into()));
                }
                for p in parts {
                    p.validate()?;
                    if p.dim() != n {
                        return Err(Error::InvalidInput("intersection part has wrong dimension".into()));
                    }
                }
            }
            RhoExpr::Difference { keep, remove } => {
                keep.validate()?;
                remove.validate()?;
                if keep.dim() != n || remove.dim() != n {
                    return Err(Error::InvalidInput("difference parts have wrong dimension".into()));
                }
            }
            RhoExpr::HalfSpace { normal, .. } => {
                if normal.len() != n || crate::cnorm(normal) == 0.0 {
                    return Err(Error::InvalidInput("half-space normal must be a nonzero n-vector".into()));
                }
            }
            RhoExpr::LeviModel { levi } => {
                if levi.len() + 1 != n {
                    return Err(Error::InvalidInput("levi model needs n-1 eigenvalues".into()));
                }
            }
            RhoExpr::Custom(_) => {}
        }
        Ok(())
    }
}

fn in_interval(x: f64, iv: [f64; 2]) -> bool {
    x >= iv[0] && x <= iv[1]
}

fn active_polydisc_coord(z: &[C64], center: &[C64], radii: &[f64]) -> usize {
    (0..z.len())
        .max_by(|&a, &b| {
            let ra = (z[a] - center[a]).norm_sqr() / (radii[a] * radii[a]);
            let rb = (z[b] - center[b]).norm_sqr() / (radii[b] * radii[b]);
            ra.total_cmp(&rb)
        })
        .unwrap_or(0)
}

/// Central-difference real gradient packed as `∂/∂x + i ∂/∂y`.
pub(crate) fn fd_gradient(f: impl Fn(&[C64]) -> f64, z: &[C64], h: f64) -> Vec<C64> {
    let mut w = z.to_vec();
    (0..z.len())
        .map(|j| {
            let mut part = [0.0; 2];
            for (k, dir) in [c64(h, 0.0), c64(0.0, h)].into_iter().enumerate() {
                w[j] = z[j] + dir;
                let fp = f(&w);
                w[j] = z[j] - dir;
                let fm = f(&w);
                w[j] = z[j];
                part[k] = (fp - fm) / (2.0 * h);
            }
            c64(part[0], part[1])
        })
        .collect()
}
