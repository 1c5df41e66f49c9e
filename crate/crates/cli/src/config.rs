use anyhow::{bail, Context, Result};
use pprl_linkage::{validate_config, Disclosure, FieldWeights, LinkageConfig};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// On-disk configuration: field weights at scale 64, the threshold as a
/// plain fraction, the disclosure mode and the hex master seed all parties
/// derive their pairwise stream keys from.
#[derive(Debug, Serialize, Deserialize)]
pub struct ConfigFile {
    pub weights: WeightsEntry,
    pub tau: f64,
    pub disclosure: String,
    pub seed: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct WeightsEntry {
    pub combined_name: u64,
    pub city: u64,
    pub postcode: u64,
    pub birth_year: u64,
    pub birth_month: u64,
    pub birth_day: u64,
}

pub fn parse_disclosure(s: &str) -> Result<Disclosure> {
    match s.to_ascii_lowercase().as_str() {
        "bit" => Ok(Disclosure::Bit),
        "index" => Ok(Disclosure::Index),
        "full" => Ok(Disclosure::Full),
        other => bail!("unknown disclosure mode '{other}' (use bit, index or full)"),
    }
}

pub fn parse_seed(s: &str) -> Result<[u8; 16]> {
    let bytes = hex::decode(s).context("seed must be hex")?;
    if bytes.len() != 16 {
        bail!("seed must be 16 bytes (32 hex characters), got {}", bytes.len());
    }
    Ok(bytes.try_into().unwrap())
}

pub fn load_config(path: &Path) -> Result<(LinkageConfig, [u8; 16])> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let file: ConfigFile = serde_json::from_str(&text)
        .with_context(|| format!("parsing {}", path.display()))?;
    let config = LinkageConfig::new(
        FieldWeights {
            combined_name: file.weights.combined_name,
            city: file.weights.city,
            exact: [
                file.weights.postcode,
                file.weights.birth_year,
                file.weights.birth_month,
                file.weights.birth_day,
            ],
        },
        file.tau,
        parse_disclosure(&file.disclosure)?,
    );
    validate_config(&config)?;
    let seed = parse_seed(&file.seed)?;
    Ok((config, seed))
}

/// A ready-to-use configuration with weights computed from the synthesizer's
/// embedded value frequencies at a 1% error rate, `w = 64*log2((1-e)/f)`.
pub fn sample_config_json() -> String {
    serde_json::to_string_pretty(&ConfigFile {
        weights: WeightsEntry {
            combined_name: 1100,
            city: 290,
            postcode: 520,
            birth_year: 370,
            birth_month: 229,
            birth_day: 305,
        },
        tau: 0.78,
        disclosure: "full".into(),
        seed: "000102030405060708090a0b0c0d0e0f".into(),
    })
    .unwrap()
}
