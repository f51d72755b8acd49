use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::direction_pairs;
use crate::basis_kernel::KernelSource;
use crate::domains::{boundary_project, inward_normal, inward_point};
use crate::geometry::{bisectional, curvature_tensor, metric, ricci_in_frame};
use crate::{Error, Result, C64};

/// Normal approach `p_t = q + t·n(q)` to a boundary point `q`.
#[derive(Debug, Clone, Serialize)]
pub struct SweepConfig {
    /// Boundary point, or any nearby point when `project_anchor` is set.
    pub anchor: Vec<C64>,
    pub project_anchor: bool,
    /// Strictly decreasing positive distances.
    pub t_grid: Vec<f64>,
    /// Random direction pairs per row, on top of all coordinate-axis pairs.
    pub pairs: usize,
    pub seed: u64,
}

impl SweepConfig {
    pub fn new(anchor: Vec<C64>, t_grid: Vec<f64>, pairs: usize, seed: u64) -> Self {
        SweepConfig {
            anchor,
            project_anchor: false,
            t_grid,
            pairs,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.t_grid.is_empty() {
            return Err(Error::InvalidInput("empty t-grid".into()));
        }
        if !self.t_grid.iter().all(|t| t.is_finite() && *t > 0.0) {
            return Err(Error::InvalidInput("t-grid values must be positive".into()));
        }
        if !self.t_grid.windows(2).all(|w| w[1] < w[0]) {
            return Err(Error::InvalidInput("t-grid must be strictly decreasing".into()));
        }
        Ok(())
    }
}

/// One sweep row: `H` along the inward normal, extremes of `B` over the
/// sampled pairs, and the largest `Ric` over the sampled directions.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub t: f64,
    #[serde(rename = "H")]
    pub h: f64,
    #[serde(rename = "B_min")]
    pub b_min: f64,
    #[serde(rename = "B_max")]
    pub b_max: f64,
    #[serde(rename = "Ric")]
    pub ric: f64,
    pub degree: Option<u32>,
    pub cond: Option<f64>,
    pub status: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepTable {
    pub boundary_point: Vec<C64>,
    pub normal: Vec<C64>,
    pub rows: Vec<SweepRow>,
    pub points: Vec<Option<Vec<C64>>>,
    /// Every sampled `B` per row (empty for failed rows).
    pub b_values: Vec<Vec<f64>>,
    /// Every sampled `Ric` per row (empty for failed rows).
    pub ric_values: Vec<Vec<f64>>,
}

impl SweepTable {
    pub fn ok_rows(&self) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(|r| r.status == "ok")
    }
}

struct RowData {
    point: Option<Vec<C64>>,
    h: f64,
    b: Vec<f64>,
    ric: Vec<f64>,
}

fn evaluate(source: &dyn KernelSource, q: &[C64], normal: &[C64], t: f64, pairs: &[(Vec<C64>, Vec<C64>)]) -> Result<RowData> {
    let p = inward_point(source.domain(), q, t)?;
    let table = source.derivs(&p)?;
    let g = metric(&table)?;
    let r = curvature_tensor(&table, &g)?;
    let h = bisectional(&r, &g, normal, normal)?;
    let mut b = Vec::with_capacity(pairs.len() + 1);
    b.push(h);
    for (x, y) in pairs {
        b.push(bisectional(&r, &g, x, y)?);
    }
    let frame = g.orthonormal_frame()?;
    let mut ric = vec![ricci_in_frame(&r, &g, &frame, normal)?];
    for (x, _) in pairs {
        ric.push(ricci_in_frame(&r, &g, &frame, x)?);
    }
    Ok(RowData { point: Some(p), h, b, ric })
}

/// Curvature along the inward normal approach to a boundary point.
/// Computational failures at individual `t` are recorded in the row status.
pub fn boundary_sweep(source: &dyn KernelSource, cfg: &SweepConfig) -> Result<SweepTable> {
    cfg.validate()?;
    let domain = source.domain();
    let q = if cfg.project_anchor {
        boundary_project(domain, &cfg.anchor)?.point
    } else {
        cfg.anchor.clone()
    };
    // fails early on a point that is not on the boundary
    let normal = inward_normal(domain, &q)?;
    inward_point(domain, &q, cfg.t_grid[cfg.t_grid.len() - 1])?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let pairs = direction_pairs(domain.dim(), cfg.pairs, &mut rng);

    let data: Vec<std::result::Result<RowData, String>> = cfg
        .t_grid
        .par_iter()
        .map(|&t| evaluate(source, &q, &normal, t, &pairs).map_err(|e| e.to_string()))
        .collect();

    let mut table = SweepTable {
        boundary_point: q,
        normal,
        rows: Vec::new(),
        points: Vec::new(),
        b_values: Vec::new(),
        ric_values: Vec::new(),
    };
    for (&t, d) in cfg.t_grid.iter().zip(data) {
        let (degree, cond) = (source.truncation_degree(), source.cond_estimate());
        match d {
            Ok(d) => {
                let fold = |v: &[f64], f: fn(f64, f64) -> f64, init: f64| v.iter().copied().fold(init, f);
                table.rows.push(SweepRow {
                    t,
                    h: d.h,
                    b_min: fold(&d.b, f64::min, f64::INFINITY),
                    b_max: fold(&d.b, f64::max, f64::NEG_INFINITY),
                    ric: fold(&d.ric, f64::max, f64::NEG_INFINITY),
                    degree,
                    cond,
                    status: "ok".into(),
                });
                table.points.push(d.point);
                table.b_values.push(d.b);
                table.ric_values.push(d.ric);
            }
            Err(msg) => {
                table.rows.push(SweepRow {
                    t,
                    h: f64::NAN,
                    b_min: f64::NAN,
                    b_max: f64::NAN,
                    ric: f64::NAN,
                    degree,
                    cond,
                    status: format!("error: {msg}"),
                });
                table.points.push(None);
                table.b_values.push(Vec::new());
                table.ric_values.push(Vec::new());
            }
        }
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis_kernel::{build_model, ClosedFormKernel};
    use crate::c64;
    use crate::domains::DomainSpec;

    #[test]
    fn closed_form_ball_is_constant_in_t() {
        let k = ClosedFormKernel::new(DomainSpec::unit_ball(2)).unwrap();
        let cfg = SweepConfig::new(vec![c64(1.0, 0.0), c64(0.0, 0.0)], vec![0.3, 0.2, 0.1, 0.05, 0.02, 0.01], 10, 1);
        let t = boundary_sweep(&k, &cfg).unwrap();
        for r in &t.rows {
            assert_eq!(r.status, "ok");
            assert!((r.h + 2.0 / 3.0).abs() < 1e-9, "{r:?}");
            assert!((r.ric + 1.0).abs() < 1e-9);
            // orthogonal pairs give −1/3, parallel −2/3
            assert!(r.b_min >= -2.0 / 3.0 - 1e-9 && r.b_max <= -1.0 / 3.0 + 1e-9);
        }
        let hs: Vec<f64> = t.rows.iter().map(|r| r.h).collect();
        let mean = hs.iter().sum::<f64>() / hs.len() as f64;
        let sd = (hs.iter().map(|h| (h - mean).powi(2)).sum::<f64>() / (hs.len() - 1) as f64).sqrt();
        assert!(sd < 1e-10);
    }

    #[test]
    fn projection_of_nearby_anchor() {
        let k = ClosedFormKernel::new(DomainSpec::unit_ball(2)).unwrap();
        let mut cfg = SweepConfig::new(vec![c64(0.9, 0.0), c64(0.0, 0.0)], vec![0.2, 0.1], 2, 1);
        cfg.project_anchor = true;
        let t = boundary_sweep(&k, &cfg).unwrap();
        assert!((t.boundary_point[0] - c64(1.0, 0.0)).norm() < 1e-12);
        assert!((t.normal[0] + c64(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn interior_anchor_is_rejected() {
        let k = ClosedFormKernel::new(DomainSpec::unit_ball(2)).unwrap();
        let cfg = SweepConfig::new(vec![c64(0.5, 0.0), c64(0.0, 0.0)], vec![0.2, 0.1], 2, 1);
        assert!(boundary_sweep(&k, &cfg).is_err());
    }

    #[test]
    fn t_grid_must_decrease() {
        let k = ClosedFormKernel::new(DomainSpec::unit_ball(2)).unwrap();
        let cfg = SweepConfig::new(vec![c64(1.0, 0.0), c64(0.0, 0.0)], vec![0.1, 0.2], 2, 1);
        assert!(matches!(boundary_sweep(&k, &cfg), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn degenerate_rows_are_recorded() {
        // degree 0: the metric vanishes identically
        let m = build_model(&DomainSpec::unit_ball(2), 0, None).unwrap();
        let cfg = SweepConfig::new(vec![c64(1.0, 0.0), c64(0.0, 0.0)], vec![0.3, 0.1], 2, 1);
        let t = boundary_sweep(&m, &cfg).unwrap();
        assert!(t.rows.iter().all(|r| r.status.starts_with("error")));
    }

    #[test]
    fn sweep_is_deterministic() {
        let m = build_model(&DomainSpec::ellipsoid(vec![1, 2]), 8, None).unwrap();
        let cfg = SweepConfig::new(vec![c64(0.0, 0.0), c64(1.0, 0.0)], vec![0.3, 0.2, 0.1], 5, 9);
        let a = boundary_sweep(&m, &cfg).unwrap();
        let b = boundary_sweep(&m, &cfg).unwrap();
        let (mut x, mut y) = (Vec::new(), Vec::new());
        super::super::write_csv(&a.rows, &mut x).unwrap();
        super::super::write_csv(&b.rows, &mut y).unwrap();
        assert_eq!(x, y);
        let head = String::from_utf8(x).unwrap();
        assert!(head.starts_with("t,H,B_min,B_max,Ric,degree,cond,status"));
    }
}
