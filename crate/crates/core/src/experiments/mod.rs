//! Boundary-asymptotics and hypothesis-verification experiments.

mod localize;
mod output;
mod ratio;
mod sweep;
pub mod verify;
mod weight;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::C64;

pub use localize::{localization_ratio, LocalizationConfig, LocalizationReport, LocalizationRow};
pub use output::{write_csv, write_metadata, Metadata, Verdict};
pub use ratio::{curvature_ratio, polydisc_bisectional_closed_form, polydisc_squeeze_check, SqueezeReport};
pub use sweep::{boundary_sweep, SweepConfig, SweepRow, SweepTable};
pub use weight::{check_weight, BoxRegion, HessianProfile, HypothesisResult, WeightCheckReport, WeightFunction};

/// Uniform random vector on the unit sphere of `Cⁿ`.
pub fn random_unit_vector(n: usize, rng: &mut ChaCha8Rng) -> Vec<C64> {
    loop {
        let v: Vec<C64> = (0..n)
            .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let norm = crate::cnorm(&v);
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// All coordinate-axis pairs `(e_i, e_j)` followed by `random` uniform
/// pairs on the unit sphere.
pub fn direction_pairs(n: usize, random: usize, rng: &mut ChaCha8Rng) -> Vec<(Vec<C64>, Vec<C64>)> {
    let e = |j: usize| {
        let mut v = vec![C64::new(0.0, 0.0); n];
        v[j] = C64::new(1.0, 0.0);
        v
    };
    let mut out: Vec<(Vec<C64>, Vec<C64>)> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| (e(i), e(j))).collect();
    for _ in 0..random {
        let x = random_unit_vector(n, rng);
        let y = random_unit_vector(n, rng);
        out.push((x, y));
    }
    out
}
