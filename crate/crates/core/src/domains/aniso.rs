//! Anisotropic polydiscs `P_{δ,a}` and `Q_{δ,c}` adapted to a boundary point.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::DomainSpec;
use crate::{Error, Result, C64};
#[cfg(test)]
use crate::c64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoxKind {
    /// `{|ζ₁| < aδ, |ζ_j| < aδ^{1/2}, |ζ_k| < a}` about the center.
    PDeltaA,
    /// `{|ζ₁ + δ| < cδ, |ζ_j| < cδ^{1/2}, |ζ_k| < c}` about the center.
    QDeltaC,
}

/// A polydisc whose radii scale like `δ`, `δ^{1/2}` and `1` along the
/// complex normal, the degenerate directions and the last `split`
/// (Levi-nondegenerate) directions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnisoBox {
    pub kind: BoxKind,
    pub center: Vec<C64>,
    pub delta: f64,
    pub scale: f64,
    pub split: usize,
}

impl AnisoBox {
    pub fn new(kind: BoxKind, center: Vec<C64>, delta: f64, scale: f64, split: usize) -> Result<Self> {
        let n = center.len();
        if n == 0 {
            return Err(Error::InvalidInput("box needs a nonempty center".into()));
        }
        if !(delta > 0.0) || !(scale > 0.0) {
            return Err(Error::InvalidInput("delta and scale must be positive".into()));
        }
        if split > n - 1 {
            return Err(Error::InvalidInput(format!("split must be at most n-1 = {}", n - 1)));
        }
        Ok(AnisoBox {
            kind,
            center,
            delta,
            scale,
            split,
        })
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn radii(&self) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|j| {
                if j == 0 {
                    self.scale * self.delta
                } else if j < n - self.split {
                    self.scale * self.delta.sqrt()
                } else {
                    self.scale
                }
            })
            .collect()
    }

    /// Center of the underlying polydisc; `Q_{δ,c}` sits at `center − δ e₁`.
    pub fn polydisc_center(&self) -> Vec<C64> {
        let mut c = self.center.clone();
        if self.kind == BoxKind::QDeltaC {
            c[0] -= self.delta;
        }
        c
    }

    pub fn as_polydisc(&self) -> DomainSpec {
        DomainSpec::Polydisc {
            center: self.polydisc_center(),
            radii: self.radii(),
        }
    }
}

/// Uniform sample from the polydisc `{|z_j − c_j| < r_j}`.
pub(crate) fn sample_polydisc(center: &[C64], radii: &[f64], rng: &mut impl Rng) -> Vec<C64> {
    center
        .iter()
        .zip(radii)
        .map(|(c, r)| {
            let rad = r * rng.gen::<f64>().sqrt();
            let th = rng.gen::<f64>() * std::f64::consts::TAU;
            c + C64::from_polar(rad, th)
        })
        .collect()
}

/// Extreme points of a polydisc: every combination of eight directions per
/// coordinate on the distinguished boundary, pulled in by a relative `1e-9`.
pub(crate) fn polydisc_extreme_points(center: &[C64], radii: &[f64]) -> Vec<Vec<C64>> {
    let n = center.len();
    let count = 8usize.pow(n as u32);
    (0..count)
        .map(|mut k| {
            (0..n)
                .map(|j| {
                    let dir = (k % 8) as f64 * std::f64::consts::FRAC_PI_4;
                    k /= 8;
                    center[j] + C64::from_polar(radii[j] * (1.0 - 1e-9), dir)
                })
                .collect()
        })
        .collect()
}

/// Sampled containment test of a polydisc in a domain: extreme points plus
/// `samples` uniform interior points (seeded).
pub fn polydisc_contained_in(center: &[C64], radii: &[f64], domain: &DomainSpec, samples: usize, seed: u64) -> bool {
    if center.len() != domain.dim() {
        return false;
    }
    if !domain.contains(center) {
        return false;
    }
    if center.len() <= 4 && !polydisc_extreme_points(center, radii).iter().all(|z| domain.contains(z)) {
        return false;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..samples).all(|_| domain.contains(&sample_polydisc(center, radii, &mut rng)))
}

/// Sampled containment `sub ⊂ sup`: `samples` uniform draws from the
/// bounding box of `sub`; every draw inside `sub` must lie in `sup`.
pub fn contained_in(sub: &DomainSpec, sup: &DomainSpec, samples: usize, seed: u64) -> bool {
    if sub.dim() != sup.dim() {
        return false;
    }
    let bbox = sub.bounding_box();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..samples).all(|_| {
        let z: Vec<C64> = bbox
            .chunks(2)
            .map(|c| C64::new(rng.gen_range(c[0][0]..c[0][1]), rng.gen_range(c[1][0]..c[1][1])))
            .collect();
        !sub.contains(&z) || sup.contains(&z)
    })
}

/// Sampled containment of an anisotropic box in a domain (10⁴ samples).
pub fn box_contained_in(b: &AnisoBox, domain: &DomainSpec) -> bool {
    polydisc_contained_in(&b.polydisc_center(), &b.radii(), domain, 10_000, 0x5eed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn origin(n: usize) -> Vec<C64> {
        vec![c64(0.0, 0.0); n]
    }

    #[test]
    fn q_box_radii() {
        let b = AnisoBox::new(BoxKind::QDeltaC, origin(2), 0.01, 0.5, 0).unwrap();
        let r = b.radii();
        assert!((r[0] - 0.005).abs() < 1e-15 && (r[1] - 0.05).abs() < 1e-15);
        assert_eq!(b.polydisc_center()[0], c64(-0.01, 0.0));
    }

    #[test]
    fn p_box_radii() {
        let b = AnisoBox::new(BoxKind::PDeltaA, origin(3), 0.04, 1.0, 1).unwrap();
        let r = b.radii();
        assert!((r[0] - 0.04).abs() < 1e-15 && (r[1] - 0.2).abs() < 1e-15 && r[2] == 1.0);
    }

    #[test]
    fn bad_parameters() {
        assert!(AnisoBox::new(BoxKind::PDeltaA, origin(2), 0.0, 1.0, 0).is_err());
        assert!(AnisoBox::new(BoxKind::PDeltaA, origin(2), 0.1, 1.0, 2).is_err());
    }

    #[test]
    fn q_box_inside_half_ball() {
        let half = DomainSpec::half_ball(2, 1.0);
        let b = AnisoBox::new(BoxKind::QDeltaC, origin(2), 0.1, 0.5, 0).unwrap();
        assert!(box_contained_in(&b, &half));
        // a = 2 makes the first radius exceed δ, crossing Re ζ₁ = 0
        let big = AnisoBox::new(BoxKind::QDeltaC, origin(2), 0.1, 2.0, 0).unwrap();
        assert!(!box_contained_in(&big, &half));
    }

    #[test]
    fn inscribed_polydisc_in_ball() {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let ball = DomainSpec::unit_ball(2);
        assert!(polydisc_contained_in(&origin(2), &[r, r], &ball, 10_000, 1));
        assert!(!polydisc_contained_in(&origin(2), &[0.8, 0.8], &ball, 10_000, 1));
    }
}
