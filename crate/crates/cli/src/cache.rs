use std::fs;
use std::path::{Path, PathBuf};

use bergman_lab::basis_kernel::KernelModel;
use sha2::{Digest, Sha256};

/// Cache key: hash of the domain, degree, quadrature, seed and drop tolerance.
pub fn model_key(domain_json: &str, degree: u32, quad: Option<(String, usize)>, seed: u64, drop: f64) -> String {
    let record = serde_json::json!({
        "domain": domain_json,
        "degree": degree,
        "quad": quad,
        "seed": seed,
        "drop": drop,
        "version": env!("CARGO_PKG_VERSION"),
    });
    hex::encode(Sha256::digest(record.to_string().as_bytes()))
}

fn entry(dir: &Path, key: &str) -> PathBuf {
    dir.join(format!("{key}.json"))
}

/// A cached model, if present and readable.
pub fn load(dir: &Path, key: &str) -> Option<KernelModel> {
    let text = fs::read_to_string(entry(dir, key)).ok()?;
    KernelModel::from_json(&text).ok()
}

pub fn store(dir: &Path, key: &str, model: &KernelModel) -> bergman_lab::Result<()> {
    fs::create_dir_all(dir)?;
    let tmp = dir.join(format!("{key}.tmp"));
    fs::write(&tmp, model.to_json()?)?;
    fs::rename(tmp, entry(dir, key))?;
    Ok(())
}
