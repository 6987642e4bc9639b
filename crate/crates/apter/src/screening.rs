//! Marginal feature screening and its iterated variant.
//!
//! The marginal statistic for feature j is m_j = Σᵢ responseᵢ·x_{i,j},
//! computed on raw (unstandardized) covariates; callers that want
//! scale-free rankings must standardize the dataset up front. The iterated
//! loop refreshes the response with the current model's prognostic scores
//! so that features with weak marginal but strong joint signal can still
//! surface.

use rayon::prelude::*;

use crate::aggregation::{self, NuPolicy};
use crate::error::{Error, Result};
use crate::experts::build_signed;
use crate::survival::SurvivalDataset;

/// Retained feature indices (distinct, in retention order) together with
/// their |m_j| scores and the number of screening iterations performed.
#[derive(Debug, Clone, PartialEq)]
pub struct ScreeningResult {
    pub retained: Vec<usize>,
    /// |m_j| for each retained feature, aligned with `retained`.
    pub scores: Vec<f64>,
    pub iterations: usize,
}

fn marginal_scores(dataset: &SurvivalDataset, response: &[f64]) -> Vec<f64> {
    let d = dataset.dim();
    (0..d)
        .into_par_iter()
        .map(|j| {
            dataset
                .records()
                .iter()
                .zip(response)
                .map(|(r, &y)| y * r.covariates()[j])
                .sum()
        })
        .collect()
}

/// Top `count` candidate features by |m_j|, ties broken by lower index.
fn top_by_magnitude(m: &[f64], candidates: &[usize], count: usize) -> Vec<(usize, f64)> {
    let mut ranked: Vec<(usize, f64)> = candidates.iter().map(|&j| (j, m[j].abs())).collect();
    ranked.sort_by(|a, b| b.1.partial_cmp(&a.1).expect("finite scores").then(a.0.cmp(&b.0)));
    ranked.truncate(count);
    ranked
}

/// Single-pass marginal screening: retain the `count` features with the
/// largest |Σᵢ responseᵢ·x_{i,j}|.
pub fn sis(dataset: &SurvivalDataset, response: &[f64], count: usize) -> Result<ScreeningResult> {
    if response.len() != dataset.n() {
        return Err(Error::ResponseLength {
            expected: dataset.n(),
            found: response.len(),
        });
    }
    if count < 1 || count > dataset.dim() {
        return Err(Error::InvalidScreenCount {
            count,
            max: dataset.dim(),
        });
    }
    let m = marginal_scores(dataset, response);
    let candidates: Vec<usize> = (0..dataset.dim()).collect();
    let ranked = top_by_magnitude(&m, &candidates, count);
    Ok(ScreeningResult {
        retained: ranked.iter().map(|&(j, _)| j).collect(),
        scores: ranked.iter().map(|&(_, s)| s).collect(),
        iterations: 1,
    })
}

/// Iterated screening. Step 1 screens against the observed times; each
/// further step fits a sign-corrected model on the retained features,
/// rescreens the remaining features against its prognostic scores, and
/// appends the newcomers. Stops when `target` features are retained, when a
/// step adds nothing, or after 20 iterations; the result is truncated to
/// `target`.
pub fn isis(
    dataset: &SurvivalDataset,
    per_step: usize,
    target: usize,
    nu_policy: NuPolicy,
) -> Result<ScreeningResult> {
    let d = dataset.dim();
    if per_step < 1 || per_step > target || target > d {
        return Err(Error::InvalidScreenSizes {
            per_step,
            target,
            dim: d,
        });
    }
    const MAX_ITERATIONS: usize = 20;

    let observed: Vec<f64> = dataset.records().iter().map(|r| r.time()).collect();
    let first = sis(dataset, &observed, per_step)?;
    let mut retained = first.retained;
    let mut scores = first.scores;
    let mut iterations = 1;

    while retained.len() < target && iterations < MAX_ITERATIONS {
        let bank = build_signed(dataset, Some(&retained))?;
        let nu = nu_policy.resolve(bank.len(), dataset.n())?;
        let model = aggregation::train(bank, dataset, nu)?;
        let semi_response = model.predict_dataset(dataset)?;

        let m = marginal_scores(dataset, &semi_response);
        let mut in_set = vec![false; d];
        for &j in &retained {
            in_set[j] = true;
        }
        let candidates: Vec<usize> = (0..d).filter(|&j| !in_set[j]).collect();
        if candidates.is_empty() {
            break;
        }
        let step = top_by_magnitude(&m, &candidates, per_step);
        if step.is_empty() {
            break;
        }
        for (j, s) in step {
            retained.push(j);
            scores.push(s);
        }
        iterations += 1;
    }

    retained.truncate(target);
    scores.truncate(target);
    Ok(ScreeningResult {
        retained,
        scores,
        iterations,
    })
}
