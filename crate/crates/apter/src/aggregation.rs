//! Exponential reweighting of expert banks over right-censored rounds.
//!
//! Subjects are processed in ascending-time order. Each subject k generates
//! one round: every expert i is charged the fraction of past-event subjects
//! it scored at least as high as subject k,
//!
//! ```text
//! ℓ_k(fᵢ) = |P(Y_k)|⁻¹ · Σ_{l ∈ P(Y_k)} I(fᵢ(x_k) ≤ fᵢ(x_l)),
//! ```
//!
//! cumulative losses drive the exponential weights
//! pᵢ ∝ exp(−ν·L_k(fᵢ)), and the trained model carries the average
//! p̂ = (p⁰ + … + p^{n−1})/n of the weight trajectory, including the initial
//! uniform p⁰ and excluding the final pⁿ. Rounds with an empty past-event
//! set contribute zero loss to every expert but still count toward the
//! average.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experts::{BankMode, Expert, ExpertBank, Standardization};
use crate::survival::{past_event_set, sort_by_time, SurvivalDataset};

/// A point on the m-simplex: nonnegative entries summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    weights: Vec<f64>,
}

impl WeightVector {
    pub fn uniform(m: usize) -> Self {
        Self {
            weights: vec![1.0 / m as f64; m],
        }
    }

    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|&w| !(w.is_finite() && w >= 0.0)) {
            return Err(Error::InvalidConfig("weights must be finite and nonnegative".into()));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidConfig(format!(
                "weights must sum to 1, got {sum}"
            )));
        }
        Ok(Self { weights })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Cumulative per-expert losses L_k after `rounds_processed` rounds.
#[derive(Debug, Clone, PartialEq)]
pub struct LossLedger {
    cumulative: Vec<f64>,
    rounds_processed: usize,
}

impl LossLedger {
    pub fn new(m: usize) -> Self {
        Self {
            cumulative: vec![0.0; m],
            rounds_processed: 0,
        }
    }

    pub fn from_cumulative(cumulative: Vec<f64>, rounds_processed: usize) -> Self {
        Self {
            cumulative,
            rounds_processed,
        }
    }

    pub fn update(&mut self, round_losses: &[f64]) {
        debug_assert_eq!(round_losses.len(), self.cumulative.len());
        for (c, l) in self.cumulative.iter_mut().zip(round_losses) {
            *c += l;
        }
        self.rounds_processed += 1;
    }

    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    pub fn rounds_processed(&self) -> usize {
        self.rounds_processed
    }
}

/// How ν is chosen when a caller fits models internally.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NuPolicy {
    /// ν = √(2 ln m / n).
    Theoretical,
    Fixed(f64),
}

impl NuPolicy {
    pub fn resolve(&self, m: usize, n: usize) -> Result<f64> {
        match *self {
            NuPolicy::Theoretical => theoretical_nu(m, n),
            NuPolicy::Fixed(nu) => {
                if !(nu.is_finite() && nu > 0.0) {
                    return Err(Error::InvalidNu(nu));
                }
                Ok(nu)
            }
        }
    }
}

/// ν = √(2 ln m / n), the rate-optimal schedule.
pub fn theoretical_nu(m: usize, n: usize) -> Result<f64> {
    if m < 2 {
        return Err(Error::TooFewExperts(m));
    }
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    Ok((2.0 * (m as f64).ln() / n as f64).sqrt())
}

/// Per-round loss vector for subject `k` of a time-sorted dataset,
/// evaluated literally against the past-event set. Empty P(Y_k) flags the
/// round as omitted and yields the zero vector.
pub fn round_loss(bank: &ExpertBank, sorted: &SurvivalDataset, k: usize) -> Result<Vec<f64>> {
    let past = past_event_set(sorted, sorted.time(k));
    let m = bank.len();
    if past.is_empty() {
        return Ok(vec![0.0; m]);
    }
    let subject = bank.score(sorted.record(k).covariates())?;
    let mut losses = vec![0.0; m];
    for &l in &past {
        let other = bank.score(sorted.record(l).covariates())?;
        for i in 0..m {
            if subject[i] <= other[i] {
                losses[i] += 1.0;
            }
        }
    }
    let size = past.len() as f64;
    for v in &mut losses {
        *v /= size;
    }
    Ok(losses)
}

/// Binary indexed tree over score ranks; counts inserted past events.
struct Fenwick {
    tree: Vec<u32>,
}

impl Fenwick {
    fn new(size: usize) -> Self {
        Self {
            tree: vec![0; size + 1],
        }
    }

    fn add(&mut self, mut idx: usize) {
        idx += 1;
        while idx < self.tree.len() {
            self.tree[idx] += 1;
            idx += idx & idx.wrapping_neg();
        }
    }

    /// Count of inserted items with rank < idx.
    fn count_below(&self, idx: usize) -> u32 {
        let mut sum = 0;
        let mut i = idx; // prefix over ranks 0..idx-1, tree is 1-based
        while i > 0 {
            sum += self.tree[i];
            i -= i & i.wrapping_neg();
        }
        sum
    }
}

/// All per-round losses of a time-sorted dataset against a bank, plus the
/// omitted-round mask. Row-major: `losses[k*m + i]`.
pub struct RoundLosses {
    pub losses: Vec<f64>,
    pub n: usize,
    pub m: usize,
    /// True when P(Y_k) was empty and round k contributed nothing.
    pub omitted: Vec<bool>,
}

/// Compute every round's loss vector in O(m·n·log n) instead of the literal
/// O(m·n²): each expert keeps a rank-indexed count of past-event scores, so
/// the indicator sum Σ I(f(x_k) ≤ f(x_l)) is a prefix-count query. Experts
/// are processed on parallel workers; the output does not depend on the
/// worker count.
pub fn round_losses(bank: &ExpertBank, sorted: &SurvivalDataset) -> Result<RoundLosses> {
    let n = sorted.n();
    let m = bank.len();
    let scores = bank.score_matrix(sorted)?;

    // prefix[k] = #subjects with time strictly below Y_k; they precede k in
    // sorted order, and the events among them form P(Y_k).
    let times: Vec<f64> = (0..n).map(|i| sorted.time(i)).collect();
    let mut prefix = vec![0usize; n];
    {
        let mut p = 0usize;
        for k in 0..n {
            while times[p] < times[k] {
                p += 1;
            }
            debug_assert!(p <= k);
            prefix[k] = p;
        }
    }
    let events: Vec<bool> = (0..n).map(|i| sorted.event(i)).collect();
    let omitted: Vec<bool> = (0..n)
        .map(|k| !events[..prefix[k]].iter().any(|&e| e))
        .collect();

    let columns: Vec<Vec<f64>> = (0..m)
        .into_par_iter()
        .map(|i| {
            let col: Vec<f64> = (0..n).map(|k| scores[k * m + i]).collect();
            let mut sorted_vals = col.clone();
            sorted_vals.sort_by(|a, b| a.partial_cmp(b).expect("finite scores"));
            let rank: Vec<usize> = col
                .iter()
                .map(|&v| sorted_vals.partition_point(|&s| s < v))
                .collect();

            let mut fen = Fenwick::new(n);
            let mut inserted = 0u32;
            let mut ptr = 0usize;
            let mut out = vec![0.0; n];
            for k in 0..n {
                while ptr < prefix[k] {
                    if events[ptr] {
                        fen.add(rank[ptr]);
                        inserted += 1;
                    }
                    ptr += 1;
                }
                if inserted > 0 {
                    let below = fen.count_below(rank[k]);
                    out[k] = f64::from(inserted - below) / f64::from(inserted);
                }
            }
            out
        })
        .collect();

    let mut losses = vec![0.0; n * m];
    for (i, col) in columns.iter().enumerate() {
        for k in 0..n {
            losses[k * m + i] = col[k];
        }
    }
    Ok(RoundLosses {
        losses,
        n,
        m,
        omitted,
    })
}

/// Exponential weights for the current ledger: pᵢ ∝ exp(−ν·L_k(fᵢ)).
/// The minimum cumulative loss is subtracted before exponentiation; the
/// result is mathematically identical and cannot overflow.
pub fn reweight(ledger: &LossLedger, nu: f64) -> Result<WeightVector> {
    if !(nu.is_finite() && nu > 0.0) {
        return Err(Error::InvalidNu(nu));
    }
    let cumulative = ledger.cumulative();
    if cumulative.is_empty() {
        return Err(Error::EmptyFeatureSubset);
    }
    let min = cumulative.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut weights: Vec<f64> = cumulative.iter().map(|&l| (-nu * (l - min)).exp()).collect();
    let sum: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= sum;
    }
    Ok(WeightVector { weights })
}

/// Trained artifact: expert bank, aggregated weights p̂, ν and (optionally)
/// the screened feature indices the bank was restricted to.
#[derive(Debug, Clone, PartialEq)]
pub struct ApterModel {
    bank: ExpertBank,
    weights: WeightVector,
    nu: f64,
    screened_features: Option<Vec<usize>>,
}

impl ApterModel {
    /// Assemble a model from a bank and a weight vector on its simplex.
    pub fn assemble(bank: ExpertBank, weights: WeightVector, nu: f64) -> Result<Self> {
        if weights.len() != bank.len() {
            return Err(Error::DimensionMismatch {
                expected: bank.len(),
                found: weights.len(),
            });
        }
        if !(nu.is_finite() && nu > 0.0) {
            return Err(Error::InvalidNu(nu));
        }
        Ok(Self {
            bank,
            weights,
            nu,
            screened_features: None,
        })
    }

    pub fn bank(&self) -> &ExpertBank {
        &self.bank
    }

    pub fn weights(&self) -> &WeightVector {
        &self.weights
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn screened_features(&self) -> Option<&[usize]> {
        self.screened_features.as_deref()
    }

    pub fn with_screened_features(mut self, features: Vec<usize>) -> Self {
        self.screened_features = Some(features);
        self
    }

    /// Prognostic index of one subject: the p̂-weighted sum of standardized
    /// expert scores. Higher means a later predicted event.
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        let scores = self.bank.score(x)?;
        Ok(scores
            .iter()
            .zip(self.weights.as_slice())
            .map(|(s, w)| s * w)
            .sum())
    }

    pub fn predict_dataset(&self, dataset: &SurvivalDataset) -> Result<Vec<f64>> {
        dataset
            .records()
            .iter()
            .map(|r| self.predict(r.covariates()))
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        let file = ModelFile {
            schema: 1,
            nu: self.nu,
            mode: match self.bank.mode() {
                BankMode::Duplicated => "duplicated".into(),
                BankMode::Signed => "signed".into(),
            },
            dim: self.bank.dim(),
            experts: self
                .bank
                .experts()
                .iter()
                .zip(self.weights.as_slice())
                .map(|(e, &w)| ExpertEntry {
                    feature: e.feature,
                    sign: e.sign,
                    weight: w,
                })
                .collect(),
            standardization: self
                .bank
                .standardization()
                .iter()
                .map(|s| StandardizationEntry {
                    mean: s.mean,
                    sd: s.sd,
                })
                .collect(),
            screened_features: self.screened_features.clone(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(json)?;
        if file.schema != 1 {
            return Err(Error::UnsupportedSchema(file.schema));
        }
        let mode = match file.mode.as_str() {
            "duplicated" => BankMode::Duplicated,
            "signed" => BankMode::Signed,
            other => {
                return Err(Error::InvalidConfig(format!(
                    "unknown bank mode {other:?}"
                )))
            }
        };
        let experts: Vec<Expert> = file
            .experts
            .iter()
            .map(|e| Expert {
                feature: e.feature,
                sign: e.sign,
            })
            .collect();
        let standardization: Vec<Standardization> = file
            .standardization
            .iter()
            .map(|s| Standardization {
                mean: s.mean,
                sd: s.sd,
            })
            .collect();
        let bank = ExpertBank::from_parts(experts, standardization, mode, file.dim)?;
        let weights = WeightVector::new(file.experts.iter().map(|e| e.weight).collect())?;
        if !(file.nu.is_finite() && file.nu > 0.0) {
            return Err(Error::InvalidNu(file.nu));
        }
        Ok(Self {
            bank,
            weights,
            nu: file.nu,
            screened_features: file.screened_features,
        })
    }

    pub fn save<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let mut body = self.to_json()?;
        body.push('\n');
        std::fs::write(path, body)?;
        Ok(())
    }

    pub fn load<P: AsRef<Path>>(path: P) -> Result<Self> {
        let body = std::fs::read_to_string(path)?;
        Self::from_json(&body)
    }
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    schema: u64,
    nu: f64,
    mode: String,
    dim: usize,
    experts: Vec<ExpertEntry>,
    standardization: Vec<StandardizationEntry>,
    screened_features: Option<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct ExpertEntry {
    feature: usize,
    sign: i8,
    weight: f64,
}

#[derive(Serialize, Deserialize)]
struct StandardizationEntry {
    mean: f64,
    sd: f64,
}

/// Run the full reweighting pass over a dataset (sorted internally) and
/// return the trained model with p̂ = (p⁰ + … + p^{n−1})/n.
pub fn train(bank: ExpertBank, dataset: &SurvivalDataset, nu: f64) -> Result<ApterModel> {
    if !(nu.is_finite() && nu > 0.0) {
        return Err(Error::InvalidNu(nu));
    }
    let (sorted, _) = sort_by_time(dataset);
    let rounds = round_losses(&bank, &sorted)?;
    let weights = aggregate_weights(&rounds, nu)?;
    Ok(ApterModel {
        bank,
        weights,
        nu,
        screened_features: None,
    })
}

/// Aggregate a precomputed round-loss matrix into p̂. Split out from
/// [`train`] so cross-validation can sweep ν without recomputing losses.
pub fn aggregate_weights(rounds: &RoundLosses, nu: f64) -> Result<WeightVector> {
    if !(nu.is_finite() && nu > 0.0) {
        return Err(Error::InvalidNu(nu));
    }
    let (n, m) = (rounds.n, rounds.m);
    let mut ledger = LossLedger::new(m);
    let mut current = WeightVector::uniform(m);
    let mut sum = vec![0.0; m];
    for k in 0..n {
        for (acc, w) in sum.iter_mut().zip(current.as_slice()) {
            *acc += w;
        }
        ledger.update(&rounds.losses[k * m..(k + 1) * m]);
        current = reweight(&ledger, nu)?;
    }
    let inv = 1.0 / n as f64;
    for w in &mut sum {
        *w *= inv;
    }
    Ok(WeightVector { weights: sum })
}

/// Mean per-expert loss over an evaluation dataset: for each expert, the
/// average of its round losses over the rounds whose past-event set is
/// non-empty (omitted rounds are dropped from the mean, matching the
/// single-subject loss definition).
pub fn expert_mean_losses(bank: &ExpertBank, eval: &SurvivalDataset) -> Result<Vec<f64>> {
    let (sorted, _) = sort_by_time(eval);
    let rounds = round_losses(bank, &sorted)?;
    let kept: Vec<usize> = (0..rounds.n).filter(|&k| !rounds.omitted[k]).collect();
    if kept.is_empty() {
        return Err(Error::AllRoundsOmitted);
    }
    let m = rounds.m;
    let mut means = vec![0.0; m];
    for &k in &kept {
        for (mean, loss) in means.iter_mut().zip(&rounds.losses[k * m..(k + 1) * m]) {
            *mean += loss;
        }
    }
    let inv = 1.0 / kept.len() as f64;
    for v in &mut means {
        *v *= inv;
    }
    Ok(means)
}

/// Expected loss of a weight vector on an evaluation dataset. Linear in the
/// weights, so it reduces to a dot product with the per-expert means.
pub fn expected_loss(weights: &[f64], bank: &ExpertBank, eval: &SurvivalDataset) -> Result<f64> {
    if weights.len() != bank.len() {
        return Err(Error::DimensionMismatch {
            expected: bank.len(),
            found: weights.len(),
        });
    }
    let means = expert_mean_losses(bank, eval)?;
    Ok(weights.iter().zip(&means).map(|(w, l)| w * l).sum())
}

/// Debug rendering of a ledger, handy when tracing small instances.
pub fn format_ledger(ledger: &LossLedger) -> String {
    let mut s = String::new();
    let _ = write!(
        s,
        "rounds={} cumulative={:?}",
        ledger.rounds_processed, ledger.cumulative
    );
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experts::build_duplicated;
    use crate::survival::{SurvivalDataset, SurvivalRecord};

    fn dataset(times: &[f64], events: &[u8], features: &[Vec<f64>]) -> SurvivalDataset {
        let records = times
            .iter()
            .zip(events)
            .zip(features)
            .map(|((&t, &e), x)| SurvivalRecord::new(x.clone(), t, e == 1).unwrap())
            .collect();
        SurvivalDataset::new(records).unwrap()
    }

    #[test]
    fn theoretical_nu_values() {
        assert!((theoretical_nu(100, 50).unwrap() - 0.42919).abs() < 1e-4);
        assert!((theoretical_nu(2, 1).unwrap() - 1.17741).abs() < 1e-4);
        assert!((theoretical_nu(200, 100).unwrap() - 0.32552).abs() < 1e-4);
        assert!(matches!(theoretical_nu(1, 10), Err(Error::TooFewExperts(1))));
    }

    #[test]
    fn reweight_examples() {
        let uniform = reweight(&LossLedger::from_cumulative(vec![0.0, 0.0, 0.0], 0), 3.0).unwrap();
        for &w in uniform.as_slice() {
            assert!((w - 1.0 / 3.0).abs() < 1e-15);
        }

        let two = reweight(
            &LossLedger::from_cumulative(vec![0.0, 1.0], 1),
            2.0f64.ln(),
        )
        .unwrap();
        assert!((two.as_slice()[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((two.as_slice()[1] - 1.0 / 3.0).abs() < 1e-15);

        let huge = reweight(&LossLedger::from_cumulative(vec![5.0, 5.0 + 1e6], 1), 1.0).unwrap();
        assert!(huge.as_slice().iter().all(|w| w.is_finite()));
        assert!((huge.as_slice()[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reweight_is_shift_invariant() {
        let a = reweight(&LossLedger::from_cumulative(vec![0.3, 1.2, 0.9], 2), 0.7).unwrap();
        let b = reweight(
            &LossLedger::from_cumulative(vec![10.3, 11.2, 10.9], 2),
            0.7,
        )
        .unwrap();
        for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn round_loss_first_subject_is_omitted() {
        let ds = dataset(
            &[1.0, 2.0, 3.0],
            &[1, 1, 1],
            &[vec![0.0], vec![1.0], vec![2.0]],
        );
        let bank = build_duplicated(&ds, None).unwrap();
        let (sorted, _) = sort_by_time(&ds);
        assert_eq!(round_loss(&bank, &sorted, 0).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn concordant_expert_has_zero_loss_every_round() {
        // scores strictly increasing with time: the +1 expert never loses
        let ds = dataset(
            &[1.0, 2.0, 3.0],
            &[1, 1, 1],
            &[vec![0.0], vec![1.0], vec![2.0]],
        );
        let bank = build_duplicated(&ds, None).unwrap();
        let (sorted, _) = sort_by_time(&ds);
        for k in 0..3 {
            let l = round_loss(&bank, &sorted, k).unwrap();
            assert_eq!(l[0], 0.0);
        }
        // and the −1 expert pays full loss in every non-omitted round
        assert_eq!(round_loss(&bank, &sorted, 1).unwrap()[1], 1.0);
        assert_eq!(round_loss(&bank, &sorted, 2).unwrap()[1], 1.0);
    }

    #[test]
    fn fast_round_losses_match_literal_with_censoring_and_ties() {
        let ds = dataset(
            &[2.0, 1.0, 2.0, 4.0, 3.0, 3.0],
            &[1, 1, 0, 1, 0, 1],
            &[
                vec![0.3, -1.0],
                vec![1.5, 0.2],
                vec![0.3, 0.2],
                vec![-0.7, 2.0],
                vec![0.0, 0.0],
                vec![1.5, -0.5],
            ],
        );
        let bank = build_duplicated(&ds, None).unwrap();
        let (sorted, _) = sort_by_time(&ds);
        let fast = round_losses(&bank, &sorted).unwrap();
        for k in 0..sorted.n() {
            let literal = round_loss(&bank, &sorted, k).unwrap();
            for (i, want) in literal.iter().enumerate() {
                assert!(
                    (fast.losses[k * bank.len() + i] - want).abs() < 1e-12,
                    "round {k} expert {i}"
                );
            }
        }
    }

    #[test]
    fn train_single_subject_is_uniform() {
        let ds = dataset(&[1.0], &[1], &[vec![0.5, 2.0]]);
        let bank = build_duplicated(&ds, None).unwrap();
        let model = train(bank, &ds, 1.0).unwrap();
        for &w in model.weights().as_slice() {
            assert!((w - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn dominant_expert_takes_all_mass_in_the_limit() {
        // expert 0 (+1 on the sole feature) always wins with large nu and
        // enough rounds
        let n = 60;
        let times: Vec<f64> = (0..n).map(|i| i as f64 + 1.0).collect();
        let events = vec![1u8; n];
        let features: Vec<Vec<f64>> = (0..n).map(|i| vec![i as f64]).collect();
        let ds = dataset(&times, &events, &features);
        let bank = build_duplicated(&ds, None).unwrap();
        let model = train(bank, &ds, 50.0).unwrap();
        assert!(model.weights().as_slice()[0] > 0.95);
    }

    #[test]
    fn predict_examples() {
        let ds = dataset(
            &[1.0, 2.0, 3.0],
            &[1, 1, 1],
            &[vec![0.0], vec![1.0], vec![2.0]],
        );
        let bank = build_duplicated(&ds, None).unwrap();
        // symmetric ± experts with uniform weights cancel exactly
        let model = ApterModel {
            bank: bank.clone(),
            weights: WeightVector::uniform(2),
            nu: 1.0,
            screened_features: None,
        };
        assert_eq!(model.predict(&[7.0]).unwrap(), 0.0);

        // degenerate weights reproduce the chosen expert's score
        let model = ApterModel {
            bank,
            weights: WeightVector::new(vec![1.0, 0.0]).unwrap(),
            nu: 1.0,
            screened_features: None,
        };
        let expected = model.bank().score(&[2.0]).unwrap()[0];
        assert_eq!(model.predict(&[2.0]).unwrap(), expected);
    }

    #[test]
    fn expected_loss_extremes_and_linearity() {
        let ds = dataset(
            &[1.0, 2.0, 3.0, 4.0],
            &[1, 1, 1, 1],
            &[vec![0.0], vec![1.0], vec![2.0], vec![3.0]],
        );
        let bank = build_duplicated(&ds, None).unwrap();
        let means = expert_mean_losses(&bank, &ds).unwrap();
        assert_eq!(means[0], 0.0); // perfectly concordant
        assert_eq!(means[1], 1.0); // perfectly anti-concordant

        let p = [0.25, 0.75];
        let q = [0.5, 0.5];
        let alpha = 0.3;
        let mix: Vec<f64> = p
            .iter()
            .zip(&q)
            .map(|(a, b)| alpha * a + (1.0 - alpha) * b)
            .collect();
        let lp = expected_loss(&p, &bank, &ds).unwrap();
        let lq = expected_loss(&q, &bank, &ds).unwrap();
        let lmix = expected_loss(&mix, &bank, &ds).unwrap();
        assert!((lmix - (alpha * lp + (1.0 - alpha) * lq)).abs() < 1e-12);
    }

    #[test]
    fn expected_loss_all_rounds_omitted() {
        let ds = dataset(&[1.0, 2.0], &[0, 0], &[vec![0.0], vec![1.0]]);
        let bank = build_duplicated(&ds, None).unwrap();
        assert!(matches!(
            expert_mean_losses(&bank, &ds),
            Err(Error::AllRoundsOmitted)
        ));
    }

    #[test]
    fn model_json_round_trip_is_exact() {
        let ds = dataset(
            &[1.0, 2.0, 3.0, 4.0],
            &[1, 0, 1, 1],
            &[
                vec![0.1, -0.7],
                vec![1.3, 0.4],
                vec![2.9, -1.1],
                vec![0.6, 0.0],
            ],
        );
        let bank = build_duplicated(&ds, None).unwrap();
        let model = train(bank, &ds, 0.7312).unwrap().with_screened_features(vec![0, 1]);
        let json = model.to_json().unwrap();
        let back = ApterModel::from_json(&json).unwrap();
        assert_eq!(back, model);
        assert_eq!(back.to_json().unwrap(), json);
    }

    #[test]
    fn model_rejects_unknown_schema() {
        let ds = dataset(&[1.0, 2.0], &[1, 1], &[vec![0.0], vec![1.0]]);
        let bank = build_duplicated(&ds, None).unwrap();
        let model = train(bank, &ds, 1.0).unwrap();
        let json = model.to_json().unwrap().replace("\"schema\": 1", "\"schema\": 2");
        assert!(matches!(
            ApterModel::from_json(&json),
            Err(Error::UnsupportedSchema(2))
        ));
    }
}
