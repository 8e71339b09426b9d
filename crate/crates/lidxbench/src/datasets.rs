//! Key-file ingestion, preprocessing, and synthetic generators.
//!
//! The on-disk format is the uint64 layout used by sorted-search benchmark
//! suites: an 8-byte little-endian count followed by that many 8-byte
//! little-endian keys.

use crate::error::{Error, Result};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DatasetSource {
    File { path: PathBuf },
    Lognormal { n: usize, mu: f64, sigma: f64, scale: f64 },
    Uniform { n: usize, lo: u64, hi: u64 },
}

/// A prepared dataset: sorted unique clean keys plus a disjoint holdout of
/// keys from the same source, reserved for real-key control streams.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub name: String,
    pub keys: Vec<u64>,
    pub holdout: Vec<u64>,
    pub source: DatasetSource,
}

/// Parse a count-prefixed little-endian u64 key file.
pub fn load_sosd(path: &Path) -> Result<Vec<u64>> {
    let bytes = fs::read(path)?;
    if bytes.len() < 8 {
        return Err(Error::MalformedFile(format!(
            "{}: file shorter than the 8-byte count header",
            path.display()
        )));
    }
    let n = u64::from_le_bytes(bytes[0..8].try_into().unwrap());
    let expected = 8u64
        .checked_mul(n + 1)
        .ok_or_else(|| Error::MalformedFile(format!("{}: count overflows", path.display())))?;
    if bytes.len() as u64 != expected {
        return Err(Error::MalformedFile(format!(
            "{}: {} bytes but count {} requires {}",
            path.display(),
            bytes.len(),
            n,
            expected
        )));
    }
    Ok(bytes[8..]
        .chunks_exact(8)
        .map(|c| u64::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

/// Inverse of `load_sosd`: byte-exact round trips.
pub fn write_keys(path: &Path, keys: &[u64]) -> Result<()> {
    let mut bytes = Vec::with_capacity(8 * (keys.len() + 1));
    bytes.extend_from_slice(&(keys.len() as u64).to_le_bytes());
    for &k in keys {
        bytes.extend_from_slice(&k.to_le_bytes());
    }
    fs::write(path, bytes)?;
    Ok(())
}

/// Deduplicate, uniformly subsample to `target_size * (1 + holdout_fraction)`
/// distinct keys, and split randomly into clean keys and holdout. The holdout
/// split happens after dedup so control keys are genuine unseen values.
pub fn prepare(
    name: &str,
    raw: &[u64],
    target_size: usize,
    holdout_fraction: f64,
    seed: u64,
    source: DatasetSource,
) -> Result<Dataset> {
    if target_size < 2 {
        return Err(Error::InvalidParam(format!(
            "target_size must be >= 2, got {target_size}"
        )));
    }
    if !(0.0..1.0).contains(&holdout_fraction) {
        return Err(Error::InvalidParam(format!(
            "holdout_fraction must be in [0, 1), got {holdout_fraction}"
        )));
    }
    let mut distinct = raw.to_vec();
    distinct.sort_unstable();
    distinct.dedup();

    let holdout_size = (target_size as f64 * holdout_fraction).round() as usize;
    let needed = target_size + holdout_size;
    if distinct.len() < needed {
        return Err(Error::InsufficientDistinctKeys {
            available: distinct.len(),
            needed,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chosen = sample(&mut rng, distinct.len(), needed);
    let mut selected: Vec<u64> = chosen.iter().map(|i| distinct[i]).collect();

    let mut holdout = Vec::with_capacity(holdout_size);
    if holdout_size > 0 {
        let mut holdout_picks: Vec<usize> = sample(&mut rng, needed, holdout_size).into_vec();
        holdout_picks.sort_unstable_by(|a, b| b.cmp(a));
        for i in holdout_picks {
            holdout.push(selected.swap_remove(i));
        }
    }
    selected.sort_unstable();
    holdout.sort_unstable();

    Ok(Dataset {
        name: name.to_string(),
        keys: selected,
        holdout,
        source,
    })
}

/// `round(scale * exp(X))` with `X ~ Normal(mu, sigma^2)`. Duplicates are
/// possible; `prepare` removes them.
pub fn synth_lognormal(n: usize, mu: f64, sigma: f64, scale: f64, seed: u64) -> Result<Vec<u64>> {
    if n < 1 {
        return Err(Error::InvalidParam("n must be >= 1".into()));
    }
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidParam(format!("sigma must be > 0, got {sigma}")));
    }
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::InvalidParam(format!("scale must be > 0, got {scale}")));
    }
    let normal = rand_distr::Normal::new(mu, sigma)
        .map_err(|e| Error::InvalidParam(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n)
        .map(|_| {
            let v = (scale * rng.sample::<f64, _>(normal).exp()).round();
            if v >= u64::MAX as f64 {
                u64::MAX
            } else if v <= 0.0 {
                0
            } else {
                v as u64
            }
        })
        .collect())
}

/// `n` keys uniform over the inclusive range `[lo, hi]`.
pub fn synth_uniform(n: usize, lo: u64, hi: u64, seed: u64) -> Result<Vec<u64>> {
    if n < 1 {
        return Err(Error::InvalidParam("n must be >= 1".into()));
    }
    if lo > hi {
        return Err(Error::InvalidParam(format!(
            "uniform range requires lo <= hi, got [{lo}, {hi}]"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n).map(|_| rng.gen_range(lo..=hi)).collect())
}
