//! Synthetic corpus generation.
//!
//! Each synthetic app is a row of independent Bernoulli draws: feature j of
//! a class-c row is 1 with probability `class_probs[c][j]`. The default
//! profile plants usage patterns observed in real corpora: the SMS
//! permission group is common in malware and rare in benign apps (every
//! planted SMS gap exceeds 0.5), INTERNET and ACCESS_NETWORK_STATE are
//! near-universal in both classes, and a long tail of rarely-used
//! permissions stays close to zero. Sixteen planted permissions carry
//! pooled variance comfortably above 0.10 while every other column stays
//! comfortably below, so a variance threshold of 0.10 recovers exactly the
//! planted sixteen on a corpus of a few hundred rows or more.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::catalog::PermissionCatalog;
use crate::error::{Error, Result};
use crate::util::fnv1a64;

use super::FeatureMatrix;

/// Parameters for [`generate_synthetic`].
#[derive(Debug, Clone)]
pub struct SynthConfig {
    /// Rows generated per class; the corpus has twice this many rows.
    pub n_per_class: usize,
    /// Per-feature Bernoulli probabilities, indexed `[class][feature]`
    /// (class 0 = benign, class 1 = malware).
    pub class_probs: [Vec<f64>; 2],
    pub seed: u64,
}

impl SynthConfig {
    /// Config using the default planted profile for `catalog`.
    pub fn with_default_profile(
        n_per_class: usize,
        seed: u64,
        catalog: &PermissionCatalog,
    ) -> SynthConfig {
        SynthConfig {
            n_per_class,
            class_probs: default_class_probs(catalog),
            seed,
        }
    }
}

/// (name, p_benign, p_malware) for the hand-planted permissions. The first
/// sixteen are the high-variance signal columns; INTERNET and
/// INSTALL_PACKAGES are planted *below* the variance threshold on purpose
/// (near-universal and near-absent usage respectively carry little
/// class-separating variance).
pub const PLANTED_PROFILE: [(&str, f64, f64); 18] = [
    ("READ_PHONE_STATE", 0.25, 0.95),
    ("WRITE_EXTERNAL_STORAGE", 0.42, 0.85),
    ("ACCESS_WIFI_STATE", 0.45, 0.84),
    ("RECEIVE_BOOT_COMPLETED", 0.20, 0.46),
    ("WAKE_LOCK", 0.24, 0.48),
    ("SEND_SMS", 0.05, 0.72),
    ("ACCESS_COARSE_LOCATION", 0.28, 0.50),
    ("ACCESS_NETWORK_STATE", 0.85, 0.75),
    ("ACCESS_FINE_LOCATION", 0.33, 0.45),
    ("VIBRATE", 0.30, 0.48),
    ("RECEIVE_SMS", 0.06, 0.66),
    ("READ_SMS", 0.05, 0.62),
    ("READ_CONTACTS", 0.22, 0.40),
    ("GET_ACCOUNTS", 0.25, 0.38),
    ("WRITE_SMS", 0.03, 0.56),
    ("CHANGE_WIFI_STATE", 0.10, 0.33),
    ("INTERNET", 0.96, 0.92),
    ("INSTALL_PACKAGES", 0.01, 0.12),
];

/// Default per-class probabilities for every catalog entry.
///
/// Planted names take their profile values. Every other permission gets a
/// low-usage tail derived from a hash of its name: roughly 30% are never
/// used at all, and the rest sit in [0.01, 0.055) with a small, possibly
/// negative class gap — enough texture to exercise reduction code without
/// adding signal.
pub fn default_class_probs(catalog: &PermissionCatalog) -> [Vec<f64>; 2] {
    let mut benign = Vec::with_capacity(catalog.len());
    let mut malware = Vec::with_capacity(catalog.len());
    for spec in catalog.iter() {
        let planted = PLANTED_PROFILE
            .iter()
            .find(|(name, _, _)| *name == spec.name);
        let (p_b, p_m) = match planted {
            Some(&(_, p_b, p_m)) => (p_b, p_m),
            None => tail_probs(&spec.name),
        };
        benign.push(p_b);
        malware.push(p_m);
    }
    [benign, malware]
}

/// Hash-derived tail probabilities for an unplanted permission.
fn tail_probs(name: &str) -> (f64, f64) {
    let h = fnv1a64(name.as_bytes());
    if h % 10 < 3 {
        return (0.0, 0.0);
    }
    let base = 0.01 + ((h / 10) % 1000) as f64 / 1000.0 * 0.045;
    let gap = (((h / 10_000) % 2001) as f64 - 1000.0) / 1000.0 * 0.015;
    (base, (base + gap).clamp(0.0, 1.0))
}

/// Default class probabilities with named overrides applied.
///
/// Each override names a catalog entry (bare, unprefixed) and replaces both
/// of its class probabilities; unknown names and out-of-range probabilities
/// are rejected.
pub fn class_probs_with_overrides(
    catalog: &PermissionCatalog,
    overrides: &[(String, f64, f64)],
) -> Result<[Vec<f64>; 2]> {
    let mut probs = default_class_probs(catalog);
    for (name, p_b, p_m) in overrides {
        let j = catalog
            .index_of(name)
            .ok_or_else(|| Error::Argument(format!("unknown catalog permission {name:?}")))?;
        for (class, &p) in [p_b, p_m].into_iter().enumerate() {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Argument(format!(
                    "probability {p} for {name:?} outside [0, 1]"
                )));
            }
            probs[class][j] = p;
        }
    }
    Ok(probs)
}

/// Generates a `2·n_per_class`-row binary matrix: the benign block first
/// (row ids `benign-0001`, ...), then the malware block. Cells are drawn
/// row-major from a single seeded stream, so output is a pure function of
/// the config and catalog.
pub fn generate_synthetic(cfg: &SynthConfig, catalog: &PermissionCatalog) -> Result<FeatureMatrix> {
    let d = catalog.len();
    if cfg.n_per_class == 0 {
        return Err(Error::Argument("n_per_class must be positive".into()));
    }
    for probs in &cfg.class_probs {
        if probs.len() != d {
            return Err(Error::Argument(format!(
                "class probability vector has length {}, catalog has {d}",
                probs.len()
            )));
        }
        if let Some(bad) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::Argument(format!(
                "class probability {bad} outside [0, 1]"
            )));
        }
    }

    let n = 2 * cfg.n_per_class;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut values = Vec::with_capacity(n * d);
    let mut labels = Vec::with_capacity(n);
    let mut row_ids = Vec::with_capacity(n);
    for (class, prefix) in [(0u8, "benign"), (1u8, "malware")] {
        let probs = &cfg.class_probs[class as usize];
        for i in 0..cfg.n_per_class {
            for &p in probs {
                values.push(f64::from(rng.random::<f64>() < p));
            }
            labels.push(class);
            row_ids.push(format!("{prefix}-{:04}", i + 1));
        }
    }
    FeatureMatrix::new(values, labels, catalog.feature_names(), row_ids)
}
