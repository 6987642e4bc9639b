//! Univariate expert banks: each expert scores a subject by one signed,
//! standardized covariate.
//!
//! Two constructions are supported. The duplicated bank holds both the +1
//! and −1 version of every feature, so m = 2·|features|. The signed bank
//! keeps one expert per feature and fixes its sign from the concordance of
//! the raw feature column with the training outcomes (m = |features|).

use crate::error::{Error, Result};
use crate::survival::{c_index, SurvivalDataset};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BankMode {
    Duplicated,
    Signed,
}

/// One scoring rule: feature index plus sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Expert {
    pub feature: usize,
    /// +1 or −1.
    pub sign: i8,
}

/// z-score parameters fitted on training data. `sd` is always positive;
/// constant training columns get sd = 1 so they score as a constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Standardization {
    pub mean: f64,
    pub sd: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpertBank {
    experts: Vec<Expert>,
    /// Aligned with `experts`.
    standardization: Vec<Standardization>,
    mode: BankMode,
    dim: usize,
}

impl ExpertBank {
    /// Assemble a bank from explicit parts; mainly for deserialization.
    pub fn from_parts(
        experts: Vec<Expert>,
        standardization: Vec<Standardization>,
        mode: BankMode,
        dim: usize,
    ) -> Result<Self> {
        if experts.is_empty() {
            return Err(Error::EmptyFeatureSubset);
        }
        if experts.len() != standardization.len() {
            return Err(Error::InvalidConfig(format!(
                "{} experts but {} standardization entries",
                experts.len(),
                standardization.len()
            )));
        }
        for e in &experts {
            if e.feature >= dim {
                return Err(Error::FeatureOutOfRange {
                    index: e.feature,
                    dim,
                });
            }
            if e.sign != 1 && e.sign != -1 {
                return Err(Error::InvalidConfig(format!("sign must be ±1, got {}", e.sign)));
            }
        }
        if standardization.iter().any(|s| !(s.sd.is_finite() && s.sd > 0.0)) {
            return Err(Error::InvalidConfig("standardization sd must be positive".into()));
        }
        Ok(Self {
            experts,
            standardization,
            mode,
            dim,
        })
    }

    pub fn experts(&self) -> &[Expert] {
        &self.experts
    }

    pub fn standardization(&self) -> &[Standardization] {
        &self.standardization
    }

    pub fn mode(&self) -> BankMode {
        self.mode
    }

    /// Covariate dimension the bank was fitted on.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of experts m.
    pub fn len(&self) -> usize {
        self.experts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.experts.is_empty()
    }

    /// Score one subject with every expert: entry j is
    /// signⱼ · (x[featureⱼ] − meanⱼ) / sdⱼ.
    pub fn score(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.len(),
            });
        }
        Ok(self
            .experts
            .iter()
            .zip(&self.standardization)
            .map(|(e, s)| f64::from(e.sign) * (x[e.feature] - s.mean) / s.sd)
            .collect())
    }

    /// n×m row-major matrix of expert scores over a dataset.
    pub fn score_matrix(&self, dataset: &SurvivalDataset) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(dataset.n() * self.len());
        for r in dataset.records() {
            out.extend(self.score(r.covariates())?);
        }
        Ok(out)
    }
}

fn resolve_subset(dataset: &SurvivalDataset, subset: Option<&[usize]>) -> Result<Vec<usize>> {
    let features: Vec<usize> = match subset {
        Some(s) => s.to_vec(),
        None => (0..dataset.dim()).collect(),
    };
    if features.is_empty() {
        return Err(Error::EmptyFeatureSubset);
    }
    for &j in &features {
        if j >= dataset.dim() {
            return Err(Error::FeatureOutOfRange {
                index: j,
                dim: dataset.dim(),
            });
        }
    }
    Ok(features)
}

fn fit_standardization(dataset: &SurvivalDataset, feature: usize) -> Standardization {
    let n = dataset.n() as f64;
    let mut mean = 0.0;
    for r in dataset.records() {
        mean += r.covariates()[feature];
    }
    mean /= n;
    let mut var = 0.0;
    for r in dataset.records() {
        let d = r.covariates()[feature] - mean;
        var += d * d;
    }
    var /= n;
    let sd = var.sqrt();
    Standardization {
        mean,
        sd: if sd > 0.0 { sd } else { 1.0 },
    }
}

/// Build the duplicated bank: each feature appears with both signs, m = 2·|subset|.
/// `subset = None` uses all features. Standardization is fitted on `dataset`.
pub fn build_duplicated(dataset: &SurvivalDataset, subset: Option<&[usize]>) -> Result<ExpertBank> {
    let features = resolve_subset(dataset, subset)?;
    let mut experts = Vec::with_capacity(2 * features.len());
    let mut standardization = Vec::with_capacity(2 * features.len());
    for &j in &features {
        let s = fit_standardization(dataset, j);
        experts.push(Expert { feature: j, sign: 1 });
        standardization.push(s);
        experts.push(Expert {
            feature: j,
            sign: -1,
        });
        standardization.push(s);
    }
    Ok(ExpertBank {
        experts,
        standardization,
        mode: BankMode::Duplicated,
        dim: dataset.dim(),
    })
}

/// Build the sign-corrected bank: one expert per feature, sign +1 when the
/// concordance index of the raw feature column against the training
/// outcomes is ≥ 0.5, otherwise −1. `dataset` must be the training set.
pub fn build_signed(dataset: &SurvivalDataset, subset: Option<&[usize]>) -> Result<ExpertBank> {
    let features = resolve_subset(dataset, subset)?;
    let mut experts = Vec::with_capacity(features.len());
    let mut standardization = Vec::with_capacity(features.len());
    for &j in &features {
        let column = dataset.feature_column(j);
        let c = c_index(&column, dataset)?.c_index;
        experts.push(Expert {
            feature: j,
            sign: if c >= 0.5 { 1 } else { -1 },
        });
        standardization.push(fit_standardization(dataset, j));
    }
    Ok(ExpertBank {
        experts,
        standardization,
        mode: BankMode::Signed,
        dim: dataset.dim(),
    })
}
