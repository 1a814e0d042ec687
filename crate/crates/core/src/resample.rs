//! Bootstrap approximations of the sampling distribution of posterior model
//! probabilities and log Bayes factors.
//!
//! Replicate `b` always draws its rows from the stream `(seed, b)`, and results
//! are gathered by replicate index, so output does not depend on the number of
//! threads.

use std::collections::HashMap;

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gprior::Response;
use crate::posterior::{self, EvidenceClass, KassRaftery, ModelSet};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Wrapped contiguous blocks of rows; preserves short-range dependence.
    CircularBlock,
    /// Rows drawn independently with replacement.
    Iid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResamplePlan {
    pub scheme: Scheme,
    /// Circular scheme only; `None` selects [`default_block_length`].
    pub block_length: Option<usize>,
    pub replicates: usize,
    pub seed: u64,
}

/// `ceil(n^(1/3))`.
pub fn default_block_length(n: usize) -> usize {
    let mut l = (n as f64).cbrt().round() as usize;
    while l * l * l < n {
        l += 1;
    }
    while l > 1 && (l - 1) * (l - 1) * (l - 1) >= n {
        l -= 1;
    }
    l.max(1)
}

impl ResamplePlan {
    pub fn circular(block_length: Option<usize>, replicates: usize, seed: u64) -> Self {
        Self {
            scheme: Scheme::CircularBlock,
            block_length,
            replicates,
            seed,
        }
    }

    pub fn iid(replicates: usize, seed: u64) -> Self {
        Self {
            scheme: Scheme::Iid,
            block_length: None,
            replicates,
            seed,
        }
    }

    /// Checks the plan against `n` rows and returns the effective block length (1 for iid).
    pub fn validate(&self, n: usize) -> Result<usize> {
        if n == 0 {
            return Err(Error::EmptyInput("dataset"));
        }
        if self.replicates == 0 {
            return Err(Error::InvalidPlan("at least one replicate is required".into()));
        }
        match self.scheme {
            Scheme::Iid => Ok(1),
            Scheme::CircularBlock => {
                let l = self.block_length.unwrap_or_else(|| default_block_length(n));
                if l == 0 || l > n {
                    return Err(Error::InvalidPlan(format!(
                        "block length {l} must lie between 1 and the number of rows {n}"
                    )));
                }
                Ok(l)
            }
        }
    }
}

/// Row indices of replicate `replicate`; deterministic in `(plan.seed, replicate)`.
pub fn resample_indices(n: usize, plan: &ResamplePlan, replicate: usize) -> Result<Vec<usize>> {
    let l = plan.validate(n)?;
    let mut r = rng::stream(plan.seed, rng::domain::RESAMPLE, replicate as u64);
    let mut out = Vec::with_capacity(n + l);
    match plan.scheme {
        Scheme::Iid => out.extend((0..n).map(|_| r.random_range(0..n))),
        Scheme::CircularBlock => {
            for _ in 0..n.div_ceil(l) {
                let start = r.random_range(0..n);
                out.extend((0..l).map(|j| (start + j) % n));
            }
            out.truncate(n);
        }
    }
    Ok(out)
}

/// Per-replicate log marginals of every model in a set.
#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapRun {
    pub labels: Vec<String>,
    pub priors: Vec<f64>,
    /// Indices of the successful replicates, ascending.
    pub replicate_ids: Vec<usize>,
    pub log_marginals: Vec<Vec<f64>>,
    /// Replicates dropped because a resampled design lost full column rank.
    pub failed: Vec<usize>,
    pub total: usize,
}

pub fn bootstrap_log_marginals(y: &Response, set: &ModelSet, plan: &ResamplePlan) -> Result<BootstrapRun> {
    let n = set.n();
    if y.nrows() != n {
        return Err(Error::dims("response rows", n, y.nrows()));
    }
    plan.validate(n)?;
    let results: Vec<Result<Option<Vec<f64>>>> = (0..plan.replicates)
        .into_par_iter()
        .map(|b| {
            let idx = resample_indices(n, plan, b)?;
            let resampled = match set.with_rows(&idx) {
                Ok(s) => s,
                Err(Error::RankDeficient { .. }) => return Ok(None),
                Err(e) => return Err(e),
            };
            resampled.log_marginals(&y.select_rows(&idx)).map(Some)
        })
        .collect();

    let mut run = BootstrapRun {
        labels: set.labels().to_vec(),
        priors: set.priors().to_vec(),
        replicate_ids: Vec::with_capacity(plan.replicates),
        log_marginals: Vec::with_capacity(plan.replicates),
        failed: Vec::new(),
        total: plan.replicates,
    };
    for (b, r) in results.into_iter().enumerate() {
        match r? {
            Some(lm) => {
                run.replicate_ids.push(b);
                run.log_marginals.push(lm);
            }
            None => run.failed.push(b),
        }
    }
    if run.failed.len() * 100 > run.total {
        return Err(Error::TooManyFailures {
            failed: run.failed.len(),
            total: run.total,
        });
    }
    Ok(run)
}

impl BootstrapRun {
    pub fn pmp_matrix(&self) -> Result<PmpMatrix> {
        let values = self
            .log_marginals
            .iter()
            .map(|lm| posterior::pmp(lm, &self.priors).map(|p| p.probs))
            .collect::<Result<Vec<_>>>()?;
        Ok(PmpMatrix {
            labels: self.labels.clone(),
            values,
            replicate_ids: self.replicate_ids.clone(),
            failed: self.failed.clone(),
        })
    }
}

/// `B x K` posterior model probabilities, one row per successful replicate.
#[derive(Debug, Clone, PartialEq)]
pub struct PmpMatrix {
    pub labels: Vec<String>,
    pub values: Vec<Vec<f64>>,
    pub replicate_ids: Vec<usize>,
    pub failed: Vec<usize>,
}

impl PmpMatrix {
    pub fn nrows(&self) -> usize {
        self.values.len()
    }

    pub fn ncols(&self) -> usize {
        self.labels.len()
    }

    pub fn column(&self, k: usize) -> Vec<f64> {
        self.values.iter().map(|row| row[k]).collect()
    }
}

pub fn bootstrap_pmp(y: &Response, set: &ModelSet, plan: &ResamplePlan) -> Result<PmpMatrix> {
    bootstrap_log_marginals(y, set, plan)?.pmp_matrix()
}

pub const DEFAULT_THRESHOLDS: [f64; 3] = [0.9, 0.95, 0.99];

/// Share of replicates in which each model's PMP exceeds a threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct ConclusivenessTable {
    pub labels: Vec<String>,
    pub thresholds: Vec<f64>,
    /// `fractions[t][k]` for threshold `t` and model `k`.
    pub fractions: Vec<Vec<f64>>,
    pub inconclusive: Vec<f64>,
    pub replicates: usize,
}

pub fn conclusiveness(p: &PmpMatrix, thresholds: &[f64]) -> Result<ConclusivenessTable> {
    if p.nrows() == 0 {
        return Err(Error::EmptyInput("posterior probability matrix"));
    }
    if thresholds.is_empty() {
        return Err(Error::EmptyInput("thresholds"));
    }
    if let Some(&t) = thresholds.iter().find(|t| !(**t > 0.5 && **t < 1.0)) {
        return Err(Error::InvalidThreshold(t));
    }
    let b = p.nrows();
    let mut fractions = Vec::with_capacity(thresholds.len());
    let mut inconclusive = Vec::with_capacity(thresholds.len());
    for &t in thresholds {
        let mut counts = vec![0usize; p.ncols()];
        for row in &p.values {
            for (k, v) in row.iter().enumerate() {
                if *v > t {
                    counts[k] += 1;
                }
            }
        }
        let conclusive: usize = counts.iter().sum();
        fractions.push(counts.iter().map(|c| *c as f64 / b as f64).collect());
        inconclusive.push((b - conclusive) as f64 / b as f64);
    }
    Ok(ConclusivenessTable {
        labels: p.labels.clone(),
        thresholds: thresholds.to_vec(),
        fractions,
        inconclusive,
        replicates: b,
    })
}

/// Rows reordered by descending PMP of `sort_by`; ties keep their order.
pub fn stripe_export(p: &PmpMatrix, sort_by: &str) -> Result<PmpMatrix> {
    let k = p
        .labels
        .iter()
        .position(|l| l == sort_by)
        .ok_or_else(|| Error::UnknownLabel(sort_by.to_string()))?;
    let mut order: Vec<usize> = (0..p.nrows()).collect();
    order.sort_by(|&a, &b| p.values[b][k].total_cmp(&p.values[a][k]));
    Ok(PmpMatrix {
        labels: p.labels.clone(),
        values: order.iter().map(|&i| p.values[i].clone()).collect(),
        replicate_ids: order.iter().map(|&i| p.replicate_ids[i]).collect(),
        failed: p.failed.clone(),
    })
}

/// Which log Bayes factor to histogram.
#[derive(Debug, Clone, PartialEq)]
pub enum Contrast {
    Models {
        first: String,
        second: String,
    },
    /// Family evidence is the prior-weighted average of member marginal likelihoods.
    Families {
        partition: HashMap<String, String>,
        first: String,
        second: String,
    },
}

/// Member indices with log weights for each side of a contrast.
type Side = Vec<(usize, f64)>;

impl Contrast {
    pub fn names(&self) -> (&str, &str) {
        match self {
            Contrast::Models { first, second } | Contrast::Families { first, second, .. } => (first, second),
        }
    }

    /// `log B` of the contrast given every model's log marginal likelihood.
    pub fn log_bf(&self, labels: &[String], priors: &[f64], log_marginals: &[f64]) -> Result<f64> {
        if labels.len() != log_marginals.len() || labels.len() != priors.len() {
            return Err(Error::dims("log marginals", labels.len(), log_marginals.len()));
        }
        let (a, b) = self.resolve(labels, priors)?;
        Ok(side_evidence(&a, log_marginals) - side_evidence(&b, log_marginals))
    }

    fn resolve(&self, labels: &[String], priors: &[f64]) -> Result<(Side, Side)> {
        let find = |name: &str| {
            labels
                .iter()
                .position(|l| l == name)
                .ok_or_else(|| Error::UnknownLabel(name.to_string()))
        };
        match self {
            Contrast::Models { first, second } => Ok((vec![(find(first)?, 0.0)], vec![(find(second)?, 0.0)])),
            Contrast::Families {
                partition,
                first,
                second,
            } => {
                let (families, members) = posterior::family_members(labels, partition)?;
                let side = |name: &str| -> Result<Side> {
                    let f = families
                        .iter()
                        .position(|f| f == name)
                        .ok_or_else(|| Error::UnknownLabel(name.to_string()))?;
                    let m = &members[f];
                    let mass: f64 = m.iter().map(|&k| priors[k]).sum();
                    Ok(m.iter()
                        .map(|&k| {
                            let w = if mass > 0.0 {
                                priors[k] / mass
                            } else {
                                1.0 / m.len() as f64
                            };
                            (k, w.ln())
                        })
                        .collect())
                };
                Ok((side(first)?, side(second)?))
            }
        }
    }
}

fn side_evidence(side: &Side, log_marginals: &[f64]) -> f64 {
    if let [(k, w)] = side.as_slice() {
        if *w == 0.0 {
            return log_marginals[*k];
        }
    }
    let terms: Vec<f64> = side.iter().map(|(k, w)| log_marginals[*k] + w).collect();
    posterior::log_sum_exp(&terms)
}

/// Bootstrap log Bayes factors with their Kass–Raftery classification.
#[derive(Debug, Clone, PartialEq)]
pub struct BfHistogram {
    pub first: String,
    pub second: String,
    pub replicate_ids: Vec<usize>,
    pub values: Vec<f64>,
    pub classes: Vec<EvidenceClass>,
    /// Counts per signed evidence bin, see [`posterior::EVIDENCE_BIN_NAMES`].
    pub counts: [usize; 7],
    pub observed: f64,
    pub observed_class: EvidenceClass,
    pub scale: KassRaftery,
    pub failed: Vec<usize>,
}

/// Builds the histogram from an existing run and the full-data log marginals.
pub fn histogram_from_run(
    run: &BootstrapRun,
    observed_log_marginals: &[f64],
    contrast: &Contrast,
    scale: &KassRaftery,
) -> Result<BfHistogram> {
    let (a, b) = contrast.resolve(&run.labels, &run.priors)?;
    let log_bf = |lm: &[f64]| side_evidence(&a, lm) - side_evidence(&b, lm);
    let values: Vec<f64> = run.log_marginals.iter().map(|lm| log_bf(lm)).collect();
    let classes = values.iter().map(|v| scale.classify(*v)).collect::<Result<Vec<_>>>()?;
    let mut counts = [0usize; 7];
    for c in &classes {
        counts[c.bin()] += 1;
    }
    let observed = log_bf(observed_log_marginals);
    let (first, second) = contrast.names();
    Ok(BfHistogram {
        first: first.to_string(),
        second: second.to_string(),
        replicate_ids: run.replicate_ids.clone(),
        values,
        classes,
        counts,
        observed,
        observed_class: scale.classify(observed)?,
        scale: *scale,
        failed: run.failed.clone(),
    })
}

pub fn bf_histogram(
    y: &Response,
    set: &ModelSet,
    contrast: &Contrast,
    plan: &ResamplePlan,
    scale: &KassRaftery,
) -> Result<BfHistogram> {
    let observed = set.log_marginals(y)?;
    let run = bootstrap_log_marginals(y, set, plan)?;
    histogram_from_run(&run, &observed, contrast, scale)
}
