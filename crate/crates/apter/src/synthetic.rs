//! Synthetic right-censored benchmark data.
//!
//! Covariates are i.i.d. standard normal; the first `k` of the `d` features
//! are informative. The failure time of subject i is
//!
//! ```text
//! T_i = -ln(Z_i) / (10 · exp(Σ_{j=1}^k x_{i,j})),   Z_i ~ Uniform(0, 1),
//! ```
//!
//! i.e. exponential with rate 10·exp(Σⱼ x_{i,j}) given the covariates, and
//! the censoring time C_i is exponential with rate `censor_rate`. The
//! record carries Y = min(T, C) and δ = I(T ≤ C).
//!
//! Randomness comes from ChaCha8 (rand_chacha's `ChaCha8Rng`), one stream
//! per subject derived from `(seed, subject index)`, so a dataset
//! regenerates identically across platforms and any prefix of subjects is
//! stable when only `n` grows.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, StandardNormal};

use crate::error::{Error, Result};
use crate::survival::{SurvivalDataset, SurvivalRecord};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticConfig {
    pub n: usize,
    pub d: usize,
    /// Number of informative features, k ≤ d.
    pub k: usize,
    pub censor_rate: f64,
    pub seed: u64,
}

impl SyntheticConfig {
    pub fn new(n: usize, d: usize, k: usize, seed: u64) -> Self {
        Self {
            n,
            d,
            k,
            censor_rate: 0.1,
            seed,
        }
    }

    pub fn with_censor_rate(mut self, rate: f64) -> Self {
        self.censor_rate = rate;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(Error::InvalidConfig("n must be at least 1".into()));
        }
        if self.d < 1 {
            return Err(Error::InvalidConfig("d must be at least 1".into()));
        }
        if self.k > self.d {
            return Err(Error::InvalidConfig(format!(
                "k = {} exceeds d = {}",
                self.k, self.d
            )));
        }
        if !(self.censor_rate.is_finite() && self.censor_rate > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "censor_rate must be positive, got {}",
                self.censor_rate
            )));
        }
        Ok(())
    }
}

/// Latent failure and censoring times of one subject, kept for oracle tests
/// and the optional ground-truth CSV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundTruth {
    pub failure: f64,
    pub censoring: f64,
}

/// Generate a dataset plus its latent ground truth. Deterministic in the
/// config seed.
pub fn generate(config: &SyntheticConfig) -> Result<(SurvivalDataset, Vec<GroundTruth>)> {
    config.validate()?;
    let censoring = Exp::new(config.censor_rate)
        .map_err(|e| Error::InvalidConfig(format!("censoring distribution: {e}")))?;

    let mut records = Vec::with_capacity(config.n);
    let mut truth = Vec::with_capacity(config.n);
    for i in 0..config.n {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(i as u64 + 1);

        let covariates: Vec<f64> = (0..config.d)
            .map(|_| StandardNormal.sample(&mut rng))
            .collect();
        let z = loop {
            let u: f64 = rng.random();
            if u > 0.0 {
                break u;
            }
        };
        let informative_sum: f64 = covariates[..config.k].iter().sum();
        let failure = -z.ln() / (10.0 * informative_sum.exp());
        let censor_time = censoring.sample(&mut rng);

        let event = failure <= censor_time;
        let observed = failure.min(censor_time);
        records.push(SurvivalRecord::new(covariates, observed, event)?);
        truth.push(GroundTruth {
            failure,
            censoring: censor_time,
        });
    }
    Ok((SurvivalDataset::new(records)?, truth))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_is_identical_and_prefix_stable() {
        let cfg = SyntheticConfig::new(50, 8, 3, 42);
        let (a, ta) = generate(&cfg).unwrap();
        let (b, tb) = generate(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(ta, tb);

        // growing n keeps the existing subjects bit-identical
        let bigger = SyntheticConfig::new(80, 8, 3, 42);
        let (c, _) = generate(&bigger).unwrap();
        assert_eq!(&c.records()[..50], a.records());
    }

    #[test]
    fn observed_time_matches_ground_truth() {
        let cfg = SyntheticConfig::new(200, 4, 2, 7);
        let (ds, truth) = generate(&cfg).unwrap();
        for (r, t) in ds.records().iter().zip(&truth) {
            assert!(r.time() > 0.0);
            if r.event() {
                assert_eq!(r.time(), t.failure);
                assert!(t.failure <= t.censoring);
            } else {
                assert_eq!(r.time(), t.censoring);
                assert!(t.censoring < t.failure);
            }
        }
    }

    #[test]
    fn feature_marginals_are_standard_normal() {
        let cfg = SyntheticConfig::new(100_000, 3, 0, 123);
        let (ds, _) = generate(&cfg).unwrap();
        for j in 0..3 {
            let col = ds.feature_column(j);
            let n = col.len() as f64;
            let mean: f64 = col.iter().sum::<f64>() / n;
            let var: f64 = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
            assert!(mean.abs() < 0.02, "feature {j} mean {mean}");
            assert!((var - 1.0).abs() < 0.05, "feature {j} variance {var}");
        }
    }

    /// Larger covariate means larger rate means earlier failure, so the
    /// first informative feature is negatively concordant with time.
    /// Calibration over 50 seeds at n = 500: median 0.277, max 0.305.
    #[test]
    fn informative_feature_is_negatively_concordant() {
        let mut values: Vec<f64> = (0..50u64)
            .map(|s| {
                let (ds, _) = generate(&SyntheticConfig::new(500, 2, 1, 3_000 + s)).unwrap();
                let scores = ds.feature_column(0);
                crate::survival::c_index(&scores, &ds).unwrap().c_index
            })
            .collect();
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!(values[25] < 0.45, "median {}", values[25]);
    }

    #[test]
    fn config_validation() {
        assert!(generate(&SyntheticConfig::new(0, 3, 0, 1)).is_err());
        assert!(generate(&SyntheticConfig::new(5, 3, 4, 1)).is_err());
        assert!(generate(&SyntheticConfig::new(5, 3, 1, 1).with_censor_rate(0.0)).is_err());
    }
}
