use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use bergman_lab::domains::Scheme;
use bergman_lab::C64;
use clap::Args;

/// Complex vector given as a flat list of `re,im` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct CList(pub Vec<C64>);

impl FromStr for CList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let reals = parse_reals(s)?;
        if reals.len() % 2 != 0 {
            return Err(format!("expected re,im pairs, got {} numbers", reals.len()));
        }
        Ok(CList(reals.chunks(2).map(|c| C64::new(c[0], c[1])).collect()))
    }
}

/// Plain list of reals, comma separated.
#[derive(Debug, Clone, PartialEq)]
pub struct RList(pub Vec<f64>);

impl FromStr for RList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        parse_reals(s).map(RList)
    }
}

fn parse_reals(s: &str) -> Result<Vec<f64>, String> {
    let v = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("'{}': {e}", t.trim())))
        .collect::<Result<Vec<f64>, String>>()?;
    if v.is_empty() || v.iter().any(|x| !x.is_finite()) {
        return Err("expected a nonempty list of finite numbers".into());
    }
    Ok(v)
}

/// `scheme:resolution`, e.g. `grid:200` or `mc:100000`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadSpec {
    pub scheme: Scheme,
    pub resolution: usize,
}

impl FromStr for QuadSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (scheme, res) = s.split_once(':').ok_or("expected scheme:resolution")?;
        Ok(QuadSpec {
            scheme: scheme.parse().map_err(|e: bergman_lab::Error| e.to_string())?,
            resolution: res.parse().map_err(|e| format!("resolution '{res}': {e}"))?,
        })
    }
}

pub const TOLERANCE_NAMES: [&str; 4] = ["drop", "c", "fd-step", "slack"];

/// `name=value` override.
#[derive(Debug, Clone, PartialEq)]
pub struct Tol {
    pub name: String,
    pub value: f64,
}

impl FromStr for Tol {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (name, value) = s.split_once('=').ok_or("expected name=value")?;
        if !TOLERANCE_NAMES.contains(&name) {
            return Err(format!("unknown tolerance '{name}' (known: {})", TOLERANCE_NAMES.join(", ")));
        }
        let value: f64 = value.parse().map_err(|e| format!("'{value}': {e}"))?;
        if !(value.is_finite() && value > 0.0) {
            return Err(format!("tolerance '{name}' must be positive"));
        }
        Ok(Tol { name: name.into(), value })
    }
}

#[derive(Debug, Clone, Default)]
pub struct Tolerances(BTreeMap<String, f64>);

impl Tolerances {
    pub fn new(list: &[Tol]) -> Self {
        Tolerances(list.iter().map(|t| (t.name.clone(), t.value)).collect())
    }

    pub fn get(&self, name: &str, default: f64) -> f64 {
        self.0.get(name).copied().unwrap_or(default)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(&self.0).unwrap_or_default()
    }
}

/// How to obtain the kernel of a domain.
#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// Domain description (JSON).
    #[arg(long)]
    pub domain: PathBuf,
    /// Truncation degree of the polynomial space.
    #[arg(long, default_value_t = 10)]
    pub degree: u32,
    /// Quadrature for the Gram matrix, `scheme:resolution`; required for
    /// non-Reinhardt domains.
    #[arg(long)]
    pub quad: Option<QuadSpec>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Use the exact kernel (balls and polydiscs only).
    #[arg(long)]
    pub closed_form: bool,
    /// Directory for cached models.
    #[arg(long)]
    pub cache: Option<PathBuf>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_lists() {
        assert_eq!("0.5,-1, 2,0".parse::<CList>().unwrap().0, vec![C64::new(0.5, -1.0), C64::new(2.0, 0.0)]);
        assert!("1,2,3".parse::<CList>().is_err());
        assert!("1,x".parse::<RList>().is_err());
        assert!("".parse::<RList>().is_err());
    }

    #[test]
    fn parses_quadrature_and_tolerances() {
        let q: QuadSpec = "mc:5000".parse().unwrap();
        assert_eq!((q.scheme, q.resolution), (Scheme::MonteCarlo, 5000));
        assert!("grid".parse::<QuadSpec>().is_err());
        assert!("simpson:4".parse::<QuadSpec>().is_err());
        assert_eq!("c=2.5".parse::<Tol>().unwrap().value, 2.5);
        assert!("bogus=1".parse::<Tol>().is_err());
        assert!("c=-1".parse::<Tol>().is_err());
    }
}
