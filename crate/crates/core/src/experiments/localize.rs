use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis_kernel::{gram_general, Basis, KernelModel, NormSource, DEFAULT_DROP_TOL};
use crate::domains::{build_quadrature, DomainSpec, QuadratureRule, Scheme};
use crate::minint::{i0, i1, i2};
use crate::{cnorm, Error, Result, C64};

/// Minimum integrals on `Ω` versus `U ∩ Ω` along a sequence of points.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LocalizationConfig {
    pub omega: DomainSpec,
    pub neighborhood: DomainSpec,
    pub points: Vec<Vec<C64>>,
    pub x: Vec<C64>,
    pub y: Vec<C64>,
    pub degree: u32,
    /// Monte Carlo candidate draws for `U ∩ Ω`; `Ω \ U` is sampled at the
    /// same density.
    pub draws: usize,
    pub seed: u64,
    /// Monomials are taken in `(z − basis_center)/basis_scale`.
    pub basis_center: Vec<C64>,
    pub basis_scale: f64,
}

impl LocalizationConfig {
    /// Unit ball in `C²`, `U = B((1,0), 0.8)`, `p_t = (1 − t, 0)`.
    pub fn ball_example(t_grid: &[f64], degree: u32, draws: usize, seed: u64) -> Result<Self> {
        let z0 = vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
        Ok(LocalizationConfig {
            omega: DomainSpec::unit_ball(2),
            neighborhood: DomainSpec::ball(z0.clone(), 0.8),
            points: t_grid.iter().map(|t| vec![C64::new(1.0 - t, 0.0), C64::new(0.0, 0.0)]).collect(),
            x: vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
            y: vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
            degree,
            draws,
            seed,
            basis_center: z0,
            basis_scale: 0.8,
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LocalizationRow {
    pub step: usize,
    /// `|p − basis_center|`.
    pub distance: f64,
    pub i0_local: f64,
    pub i0_global: f64,
    pub i1_local: f64,
    pub i1_global: f64,
    pub i2_local: f64,
    pub i2_global: f64,
    pub ratio0: f64,
    pub ratio1: f64,
    pub ratio2: f64,
}

impl LocalizationRow {
    pub fn ratios(&self) -> [f64; 3] {
        [self.ratio0, self.ratio1, self.ratio2]
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LocalizationReport {
    pub rows: Vec<LocalizationRow>,
    /// Empirical `C_j = max_p I^j_Ω / I^j_{U∩Ω}`.
    pub max_ratio: [f64; 3],
    pub min_ratio: f64,
    pub nodes_local: usize,
    pub nodes_outer: usize,
    pub retained: usize,
    pub dropped: Vec<usize>,
    pub cond_local: f64,
    pub cond_global: f64,
}

impl LocalizationReport {
    /// Lower inequality `I^j_{U∩Ω} ≤ I^j_Ω` with relative slack.
    pub fn lower_holds(&self, slack: f64) -> bool {
        self.min_ratio >= 1.0 - slack
    }
}

fn bbox_volume(d: &DomainSpec) -> f64 {
    d.bounding_box().iter().map(|b| b[1] - b[0]).product()
}

/// Ratios `I^j_Ω(p) / I^j_{U∩Ω}(p)`, `j = 0, 1, 2`.
///
/// Both spaces use the same polynomials. The Gram matrix of `Ω` is the sum
/// of Monte Carlo Gram matrices over the disjoint pieces `U ∩ Ω` and `Ω \ U`,
/// so it dominates that of `U ∩ Ω` exactly and the lower inequality holds up
/// to rounding.
pub fn localization_ratio(cfg: &LocalizationConfig) -> Result<LocalizationReport> {
    let n = cfg.omega.dim();
    if cfg.neighborhood.dim() != n || cfg.basis_center.len() != n || cfg.x.len() != n || cfg.y.len() != n {
        return Err(Error::InvalidInput("dimension mismatch in localization config".into()));
    }
    if cfg.points.is_empty() {
        return Err(Error::InvalidInput("empty point sequence".into()));
    }
    let local = DomainSpec::intersection(vec![cfg.omega.clone(), cfg.neighborhood.clone()])
        .map_err(|_| Error::InvalidInput("U ∩ Ω is empty".into()))?;
    let outer = DomainSpec::difference(cfg.omega.clone(), cfg.neighborhood.clone());
    if let Some(p) = cfg.points.iter().find(|p| p.len() != n || !local.contains(p)) {
        return Err(Error::InvalidInput(format!("point {p:?} is not in U ∩ Ω")));
    }

    let q_local = build_quadrature(&local, Scheme::MonteCarlo, cfg.draws, cfg.seed)?;
    let outer_draws = ((cfg.draws as f64) * bbox_volume(&outer) / bbox_volume(&local)).round() as usize;
    let q_outer = match build_quadrature(&outer, Scheme::MonteCarlo, outer_draws.max(1), cfg.seed ^ 0x9e37_79b9_7f4a_7c15) {
        Ok(q) => Some(q),
        Err(Error::EmptyQuadrature) => None,
        Err(e) => return Err(e),
    };

    let full = Basis::graded_at(cfg.basis_center.clone(), cfg.basis_scale, cfg.degree);
    let g_local_full = gram_general(&full, &q_local);
    let probe = KernelModel::from_gram(
        local.clone(),
        full.clone(),
        &g_local_full,
        DEFAULT_DROP_TOL,
        NormSource::Quadrature { rule: q_local.id() },
    )?;
    let mut keep: Vec<usize> = probe.order().to_vec();
    keep.sort_unstable();
    let basis = full.select(&keep);
    let sub = |g: &crate::linalg::CMatrix| crate::linalg::CMatrix::from_fn(keep.len(), keep.len(), |i, j| g[(keep[i], keep[j])]);
    let g_local = sub(&g_local_full);
    let g_global = match &q_outer {
        Some(q) => &g_local + sub(&gram_general(&full, q)),
        None => g_local.clone(),
    };
    let rule_id = |q: &QuadratureRule| q.id();
    let m_local = KernelModel::from_gram(local, basis.clone(), &g_local, DEFAULT_DROP_TOL, NormSource::Quadrature { rule: rule_id(&q_local) })?;
    let m_global = KernelModel::from_gram(
        cfg.omega.clone(),
        basis,
        &g_global,
        DEFAULT_DROP_TOL,
        NormSource::Quadrature {
            rule: match &q_outer {
                Some(q) => format!("{}+{}", q_local.id(), q.id()),
                None => q_local.id(),
            },
        },
    )?;

    let rows = cfg
        .points
        .par_iter()
        .enumerate()
        .map(|(step, p)| -> Result<LocalizationRow> {
            let vals = |m: &KernelModel| -> Result<[f64; 3]> {
                Ok([i0(m, p)?.value, i1(m, p, &cfg.x)?.value, i2(m, p, &cfg.x, &cfg.y)?.value])
            };
            let (a, b) = (vals(&m_local)?, vals(&m_global)?);
            let d: Vec<C64> = p.iter().zip(&cfg.basis_center).map(|(p, c)| p - c).collect();
            Ok(LocalizationRow {
                step,
                distance: cnorm(&d),
                i0_local: a[0],
                i0_global: b[0],
                i1_local: a[1],
                i1_global: b[1],
                i2_local: a[2],
                i2_global: b[2],
                ratio0: b[0] / a[0],
                ratio1: b[1] / a[1],
                ratio2: b[2] / a[2],
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut max_ratio = [f64::NEG_INFINITY; 3];
    let mut min_ratio = f64::INFINITY;
    for r in &rows {
        for (m, v) in max_ratio.iter_mut().zip(r.ratios()) {
            *m = m.max(v);
            min_ratio = min_ratio.min(v);
        }
    }
    Ok(LocalizationReport {
        rows,
        max_ratio,
        min_ratio,
        nodes_local: q_local.len(),
        nodes_outer: q_outer.as_ref().map_or(0, |q| q.len()),
        retained: keep.len(),
        dropped: probe.dropped().to_vec(),
        cond_local: m_local.cond_estimate(),
        cond_global: m_global.cond_estimate(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;

    #[test]
    fn small_ball_example_satisfies_lower_inequality() {
        let cfg = LocalizationConfig::ball_example(&[0.2, 0.1, 0.05], 4, 20_000, 1).unwrap();
        let r = localization_ratio(&cfg).unwrap();
        assert!(r.lower_holds(1e-9), "{r:?}");
        assert!(r.nodes_local > 0 && r.nodes_outer > 0);
    }

    #[test]
    fn neighborhood_covering_domain_gives_unit_ratios() {
        let mut cfg = LocalizationConfig::ball_example(&[0.2, 0.1], 3, 20_000, 2).unwrap();
        cfg.neighborhood = DomainSpec::ball(vec![c64(0.0, 0.0); 2], 1.5);
        let r = localization_ratio(&cfg).unwrap();
        assert_eq!(r.nodes_outer, 0);
        for row in &r.rows {
            assert_eq!(row.ratios(), [1.0; 3]);
        }
    }

    #[test]
    fn point_outside_neighborhood_is_rejected() {
        let mut cfg = LocalizationConfig::ball_example(&[0.2], 3, 1000, 2).unwrap();
        cfg.points.push(vec![c64(-0.5, 0.0), c64(0.0, 0.0)]);
        assert!(matches!(localization_ratio(&cfg), Err(Error::InvalidInput(_))));
    }
}
