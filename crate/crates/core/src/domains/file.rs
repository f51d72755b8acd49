use serde::{Deserialize, Serialize};

use super::{DomainSpec, RhoExpr};
use crate::{Error, C64};

/// On-disk (JSON) form of a [`DomainSpec`].
///
/// ```json
/// {"kind": "ellipsoid", "dimension": 2, "exponents": [1, 2]}
/// {"kind": "ball", "dimension": 2, "center": [[0.0, 0.0], [0.0, 0.0]], "radius": 1.0}
/// ```
///
/// Complex numbers are `[re, im]` pairs; `center` defaults to the origin.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainFile {
    pub kind: String,
    pub dimension: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<Vec<C64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radii: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exponents: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<RhoExpr>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bbox: Option<Vec<[f64; 2]>>,
}

impl TryFrom<DomainFile> for DomainSpec {
    type Error = Error;

    fn try_from(f: DomainFile) -> Result<Self, Error> {
        let n = f.dimension;
        let missing = |field: &str| Error::InvalidInput(format!("domain kind '{}' requires '{field}'", f.kind));
        let center = f.center.clone().unwrap_or_else(|| vec![C64::new(0.0, 0.0); n]);
        let spec = match f.kind.as_str() {
            "polydisc" => DomainSpec::Polydisc {
                center,
                radii: f.radii.clone().ok_or_else(|| missing("radii"))?,
            },
            "ball" => DomainSpec::Ball {
                center,
                radius: f.radius.ok_or_else(|| missing("radius"))?,
            },
            "ellipsoid" => DomainSpec::Ellipsoid {
                exponents: f.exponents.clone().ok_or_else(|| missing("exponents"))?,
            },
            "general" => DomainSpec::General {
                rho: f.rho.clone().ok_or_else(|| missing("rho"))?,
                bbox: f.bbox.clone().ok_or_else(|| missing("bbox"))?,
            },
            other => {
                return Err(Error::InvalidInput(format!(
                    "unknown domain kind '{other}' (expected polydisc, ball, ellipsoid or general)"
                )))
            }
        };
        spec.validate()?;
        if spec.dim() != n {
            return Err(Error::InvalidInput(format!(
                "declared dimension {n} does not match the domain data ({})",
                spec.dim()
            )));
        }
        Ok(spec)
    }
}

impl From<DomainSpec> for DomainFile {
    fn from(d: DomainSpec) -> Self {
        let mut f = DomainFile {
            kind: d.variant_name().to_string(),
            dimension: d.dim(),
            center: None,
            radii: None,
            radius: None,
            exponents: None,
            rho: None,
            bbox: None,
        };
        match d {
            DomainSpec::Polydisc { center, radii } => {
                f.center = Some(center);
                f.radii = Some(radii);
            }
            DomainSpec::Ball { center, radius } => {
                f.center = Some(center);
                f.radius = Some(radius);
            }
            DomainSpec::Ellipsoid { exponents } => f.exponents = Some(exponents),
            DomainSpec::General { rho, bbox } => {
                f.rho = Some(rho);
                f.bbox = Some(bbox);
            }
        }
        f
    }
}

impl DomainSpec {
    pub fn from_json(text: &str) -> crate::Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> crate::Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;

    #[test]
    fn parses_each_kind() {
        let e = DomainSpec::from_json(r#"{"kind":"ellipsoid","dimension":2,"exponents":[1,2]}"#).unwrap();
        assert!(matches!(e, DomainSpec::Ellipsoid { ref exponents } if exponents == &[1, 2]));
        let b = DomainSpec::from_json(r#"{"kind":"ball","dimension":2,"radius":0.9}"#).unwrap();
        assert!(b.contains(&[c64(0.8, 0.0), c64(0.0, 0.0)]));
        let p = DomainSpec::from_json(r#"{"kind":"polydisc","dimension":1,"center":[[0.5,0.0]],"radii":[0.25]}"#)
            .unwrap();
        assert!(p.contains(&[c64(0.6, 0.1)]));
        let g = DomainSpec::from_json(
            r#"{"kind":"general","dimension":1,
                "rho":{"name":"intersection","parts":[
                    {"kind":"ball","dimension":1,"radius":1.0},
                    {"kind":"general","dimension":1,"rho":{"name":"half_space","normal":[[1,0]],"offset":0},
                     "bbox":[[-1,1],[-1,1]]}]},
                "bbox":[[-1,0],[-1,1]]}"#,
        )
        .unwrap();
        assert!(g.contains(&[c64(-0.5, 0.0)]));
        assert!(!g.contains(&[c64(0.5, 0.0)]));
    }

    #[test]
    fn rejects_bad_files() {
        assert!(DomainSpec::from_json(r#"{"kind":"torus","dimension":2}"#).is_err());
        assert!(DomainSpec::from_json(r#"{"kind":"ball","dimension":2}"#).is_err());
        assert!(DomainSpec::from_json(r#"{"kind":"polydisc","dimension":3,"radii":[1,1]}"#).is_err());
        assert!(DomainSpec::from_json(r#"{"kind":"ellipsoid","dimension":2,"exponents":[0,1]}"#).is_err());
    }

    #[test]
    fn json_round_trip() {
        let d = DomainSpec::intersection(vec![
            DomainSpec::unit_ball(2),
            DomainSpec::ball(vec![c64(1.0, 0.0), c64(0.0, 0.0)], 0.8),
        ])
        .unwrap();
        let back = DomainSpec::from_json(&d.to_json().unwrap()).unwrap();
        let z = [c64(0.7, 0.1), c64(0.2, -0.1)];
        assert_eq!(d.rho(&z), back.rho(&z));
        assert_eq!(d.bounding_box(), back.bounding_box());
    }
}
