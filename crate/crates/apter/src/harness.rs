//! Experiment protocol: randomized train/test splits, cross-validated ν,
//! the regret sweep over (n, d) grids, and report summarization.
//!
//! Each replication draws a uniform random partition into ⌊2n/3⌋ training
//! and the remaining test subjects, fits the chosen method on training rows
//! only (signs, standardization, screening and ν all fitted there), and
//! evaluates the concordance of the trained predictor on the test rows.
//! Replication seeds derive from (master seed, replication index), so any
//! prefix of replications is stable and replications may run on parallel
//! workers without changing the report.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::aggregation::{
    self, aggregate_weights, round_losses, theoretical_nu, ApterModel, NuPolicy,
};
use crate::error::{Error, Result};
use crate::experts::{build_duplicated, build_signed, ExpertBank};
use crate::screening::isis;
use crate::survival::{
    c_index, comparable_pairs, sort_by_time, SurvivalDataset, SurvivalRecord,
};
use crate::synthetic::{generate, SyntheticConfig};

/// Factors applied to the theoretical ν to form the default CV grid.
pub const DEFAULT_GRID_FACTORS: [f64; 5] = [1e-2, 1e-1, 1.0, 1e1, 1e2];
pub const DEFAULT_FOLDS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Duplicated ± bank, m = 2d.
    Apter,
    /// Sign-corrected bank, m = d.
    ApterP,
    /// Iterated screening, then the sign-corrected bank on the survivors.
    IsisApterP,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Apter => "apter",
            Method::ApterP => "apter_p",
            Method::IsisApterP => "isis_apter_p",
        }
    }
}

/// How ν is chosen per replication.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NuTuning {
    Theoretical,
    /// k-fold cross-validation over the grid on the training split.
    CrossValidated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScreeningParams {
    pub per_step: usize,
    pub target: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub method: Method,
    pub replications: usize,
    pub nu_tuning: NuTuning,
    /// Multipliers of the theoretical ν forming the CV grid.
    pub grid_factors: Vec<f64>,
    pub folds: usize,
    pub seed: u64,
    pub screening: Option<ScreeningParams>,
}

impl ExperimentSpec {
    pub fn new(method: Method, replications: usize, seed: u64) -> Self {
        Self {
            method,
            replications,
            nu_tuning: NuTuning::Theoretical,
            grid_factors: DEFAULT_GRID_FACTORS.to_vec(),
            folds: DEFAULT_FOLDS,
            seed,
            screening: None,
        }
    }
}

/// One replication's outcome. `c_index` is `None` when the test split had
/// no comparable pairs; such replications are excluded from the summary but
/// counted in `Summary::undefined`.
#[derive(Debug, Clone, PartialEq)]
pub struct Replication {
    pub seed: u64,
    pub c_index: Option<f64>,
    pub nu: f64,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub median: Option<f64>,
    pub variance: Option<f64>,
    pub iqr: Option<f64>,
    pub defined: usize,
    pub undefined: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub per_replication: Vec<Replication>,
    pub summary: Summary,
}

/// Deterministic child seed from a master seed and a stream index.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(stream.wrapping_add(1));
    rng.next_u64()
}

pub fn median(sorted: &[f64]) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let n = sorted.len();
    Some(if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    })
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = q * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

fn summarize(values: &[f64], undefined: usize) -> Summary {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite c-index"));
    let median = median(&sorted);
    let variance = if sorted.len() >= 2 {
        let n = sorted.len() as f64;
        let mean = sorted.iter().sum::<f64>() / n;
        Some(sorted.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0))
    } else {
        None
    };
    let iqr = if sorted.is_empty() {
        None
    } else {
        Some(quantile(&sorted, 0.75) - quantile(&sorted, 0.25))
    };
    Summary {
        median,
        variance,
        iqr,
        defined: values.len(),
        undefined,
    }
}

/// Fit the configured method on a training split. Screening, signs,
/// standardization and ν all come from the training rows alone.
type BankBuilder<'a> = Box<dyn Fn(&SurvivalDataset) -> Result<ExpertBank> + Sync + 'a>;

pub fn fit_method(train: &SurvivalDataset, spec: &ExperimentSpec) -> Result<ApterModel> {
    let screened: Option<Vec<usize>> = match spec.method {
        Method::IsisApterP => {
            let params = spec.screening.ok_or_else(|| {
                Error::InvalidConfig("isis_apter_p requires screening parameters".into())
            })?;
            let result = isis(train, params.per_step, params.target, NuPolicy::Theoretical)?;
            Some(result.retained)
        }
        _ => None,
    };
    let subset = screened.as_deref();

    let build: BankBuilder<'_> = match spec.method {
        Method::Apter => Box::new(move |ds: &SurvivalDataset| build_duplicated(ds, subset)),
        Method::ApterP | Method::IsisApterP => {
            Box::new(move |ds: &SurvivalDataset| build_signed(ds, subset))
        }
    };

    let bank = build(train)?;
    let nu = match spec.nu_tuning {
        NuTuning::Theoretical => theoretical_nu(bank.len(), train.n())?,
        NuTuning::CrossValidated => {
            let base = theoretical_nu(bank.len(), train.n())?;
            let grid: Vec<f64> = spec.grid_factors.iter().map(|f| f * base).collect();
            tune_nu(train, &*build, &grid, spec.folds)?
        }
    };
    let model = aggregation::train(bank, train, nu)?;
    drop(build);
    Ok(match screened {
        Some(features) => model.with_screened_features(features),
        None => model,
    })
}

/// k-fold cross-validation of ν. Fold f's validation set is every subject
/// with index ≡ f (mod folds); the bank is refitted on each fold's training
/// rows by `bank_builder`. A fold whose validation or training rows have no
/// comparable pairs is skipped for all ν; the mean validation concordance
/// decides, ties going to the smaller ν.
pub fn tune_nu(
    train: &SurvivalDataset,
    bank_builder: &(dyn Fn(&SurvivalDataset) -> Result<ExpertBank> + Sync),
    grid: &[f64],
    folds: usize,
) -> Result<f64> {
    if folds < 2 {
        return Err(Error::InvalidConfig(format!(
            "cross-validation needs at least 2 folds, got {folds}"
        )));
    }
    if grid.is_empty() {
        return Err(Error::InvalidConfig("empty nu grid".into()));
    }
    let mut grid: Vec<f64> = grid.to_vec();
    grid.sort_by(|a, b| a.partial_cmp(b).expect("finite grid"));
    grid.dedup();

    let n = train.n();
    let mut fold_means: Vec<Vec<f64>> = Vec::new(); // per kept fold, per grid nu
    for f in 0..folds {
        let validation_idx: Vec<usize> = (0..n).filter(|i| i % folds == f).collect();
        let training_idx: Vec<usize> = (0..n).filter(|i| i % folds != f).collect();
        if validation_idx.is_empty() || training_idx.is_empty() {
            continue;
        }
        let validation = train.select(&validation_idx)?;
        let fold_train = train.select(&training_idx)?;
        if comparable_pairs(&validation) == 0 || comparable_pairs(&fold_train) == 0 {
            continue;
        }
        let bank = match bank_builder(&fold_train) {
            Ok(b) => b,
            Err(Error::NoComparablePairs) => continue,
            Err(e) => return Err(e),
        };
        let (sorted, _) = sort_by_time(&fold_train);
        let rounds = round_losses(&bank, &sorted)?;
        let mut per_nu = Vec::with_capacity(grid.len());
        for &nu in &grid {
            let weights = aggregate_weights(&rounds, nu)?;
            let model = ApterModel::assemble(bank.clone(), weights, nu)?;
            let scores = model.predict_dataset(&validation)?;
            per_nu.push(c_index(&scores, &validation)?.c_index);
        }
        fold_means.push(per_nu);
    }
    if fold_means.is_empty() {
        return Err(Error::AllFoldsSkipped);
    }

    let mut best = grid[0];
    let mut best_score = f64::NEG_INFINITY;
    for (g, &nu) in grid.iter().enumerate() {
        let mean: f64 =
            fold_means.iter().map(|per_nu| per_nu[g]).sum::<f64>() / fold_means.len() as f64;
        if mean > best_score {
            best_score = mean;
            best = nu;
        }
    }
    Ok(best)
}

/// Run the full randomized-split protocol.
pub fn run_experiment(dataset: &SurvivalDataset, spec: &ExperimentSpec) -> Result<ExperimentReport> {
    if spec.replications < 1 {
        return Err(Error::InvalidConfig("replications must be at least 1".into()));
    }
    let n = dataset.n();
    if n < 3 {
        return Err(Error::InvalidConfig(format!(
            "need at least 3 subjects for a split, got {n}"
        )));
    }
    let n_train = 2 * n / 3;

    let per_replication: Vec<Replication> = (0..spec.replications)
        .into_par_iter()
        .map(|rep| -> Result<Replication> {
            let start = Instant::now();
            let rep_seed = derive_seed(spec.seed, rep as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(rep_seed);
            let mut indices: Vec<usize> = (0..n).collect();
            indices.shuffle(&mut rng);
            let train_set = dataset.select(&indices[..n_train])?;
            let test_set = dataset.select(&indices[n_train..])?;

            let model = fit_method(&train_set, spec)?;
            let scores = model.predict_dataset(&test_set)?;
            let c = match c_index(&scores, &test_set) {
                Ok(r) => Some(r.c_index),
                Err(Error::NoComparablePairs) => None,
                Err(e) => return Err(e),
            };
            Ok(Replication {
                seed: rep_seed,
                c_index: c,
                nu: model.nu(),
                wall_ms: start.elapsed().as_secs_f64() * 1e3,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let defined: Vec<f64> = per_replication.iter().filter_map(|r| r.c_index).collect();
    let undefined = per_replication.len() - defined.len();
    Ok(ExperimentReport {
        summary: summarize(&defined, undefined),
        per_replication,
    })
}

/// One row of the regret sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretRow {
    pub n: usize,
    pub d: usize,
    pub m: usize,
    pub c_err_median: f64,
    pub c_err_mean: f64,
    /// √(2 ln m / n).
    pub bound: f64,
}

/// Concordance-gap study on synthetic data: for each (n, d) in the grid,
/// train the duplicated-bank aggregate with the theoretical ν on a fresh
/// training draw (k = 10 informative features, capped at d) and measure
/// max_j C_n(f_j) − C_n(f̂) on an equally sized fresh test draw, where the
/// comparators f_j are the raw single features. Averaged over
/// `replications` seeds per cell.
pub fn regret_study(
    n_list: &[usize],
    d_list: &[usize],
    replications: usize,
    seed: u64,
) -> Result<Vec<RegretRow>> {
    if n_list.is_empty() || d_list.is_empty() {
        return Err(Error::InvalidConfig("empty n or d list".into()));
    }
    if replications < 1 {
        return Err(Error::InvalidConfig("replications must be at least 1".into()));
    }
    let mut rows = Vec::new();
    let mut pair_idx = 0u64;
    for &n in n_list {
        for &d in d_list {
            let k = 10.min(d);
            let m = 2 * d;
            let bound = theoretical_nu(m, n)?;
            let c_errs: Vec<f64> = (0..replications)
                .into_par_iter()
                .map(|rep| -> Result<Option<f64>> {
                    let stream = pair_idx * (replications as u64) * 2 + rep as u64 * 2;
                    let train_cfg = SyntheticConfig::new(n, d, k, derive_seed(seed, stream));
                    let test_cfg = SyntheticConfig::new(n, d, k, derive_seed(seed, stream + 1));
                    let (train_set, _) = generate(&train_cfg)?;
                    let (test_set, _) = generate(&test_cfg)?;

                    let bank = build_duplicated(&train_set, None)?;
                    let nu = theoretical_nu(bank.len(), train_set.n())?;
                    let model = aggregation::train(bank, &train_set, nu)?;
                    let scores = model.predict_dataset(&test_set)?;
                    let aggregate_c = match c_index(&scores, &test_set) {
                        Ok(r) => r.c_index,
                        Err(Error::NoComparablePairs) => return Ok(None),
                        Err(e) => return Err(e),
                    };
                    let mut best_expert_c = f64::NEG_INFINITY;
                    for j in 0..d {
                        let column = test_set.feature_column(j);
                        let c = c_index(&column, &test_set)?.c_index;
                        if c > best_expert_c {
                            best_expert_c = c;
                        }
                    }
                    Ok(Some(best_expert_c - aggregate_c))
                })
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .flatten()
                .collect();
            if c_errs.is_empty() {
                return Err(Error::NoComparablePairs);
            }
            let mut sorted = c_errs.clone();
            sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite c_err"));
            rows.push(RegretRow {
                n,
                d,
                m,
                c_err_median: median(&sorted).expect("non-empty"),
                c_err_mean: c_errs.iter().sum::<f64>() / c_errs.len() as f64,
                bound,
            });
            pair_idx += 1;
        }
    }
    Ok(rows)
}

/// Null-experiment helper: permute the (Y, δ) outcome pairs across subjects
/// while leaving covariates in place, so any residual association between
/// covariates and outcomes is due to chance.
pub fn shuffle_outcomes(dataset: &SurvivalDataset, seed: u64) -> SurvivalDataset {
    let n = dataset.n();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    perm.shuffle(&mut rng);
    let records: Vec<SurvivalRecord> = (0..n)
        .map(|i| {
            SurvivalRecord::new(
                dataset.record(i).covariates().to_vec(),
                dataset.time(perm[i]),
                dataset.event(perm[i]),
            )
            .expect("valid source records")
        })
        .collect();
    SurvivalDataset::new(records).expect("non-empty input")
}
