//! Posterior model probabilities, family aggregation and the Kass–Raftery
//! evidence scale.

use std::collections::{HashMap, HashSet};

use crate::error::{Error, Result};
use crate::gprior::{self, RegressionModel, Response};

/// A labelled set of `K >= 2` competing models with prior probabilities.
#[derive(Debug, Clone)]
pub struct ModelSet {
    labels: Vec<String>,
    models: Vec<RegressionModel>,
    priors: Vec<f64>,
}

impl ModelSet {
    /// `priors` may be unnormalized; they are rescaled to sum to one. `None` gives a uniform prior.
    pub fn new(entries: Vec<(String, RegressionModel)>, priors: Option<Vec<f64>>) -> Result<Self> {
        let k = entries.len();
        if k < 2 {
            return Err(Error::TooFewModels(k));
        }
        let mut seen = HashSet::new();
        for (label, _) in &entries {
            if !seen.insert(label.as_str()) {
                return Err(Error::DuplicateLabel(label.clone()));
            }
        }
        let first = &entries[0].1;
        for (_, m) in &entries[1..] {
            if m.is_multivariate() != first.is_multivariate() {
                return Err(Error::ModelKind {
                    expected: first.kind(),
                    found: m.kind(),
                });
            }
            if m.n() != first.n() {
                return Err(Error::dims("model set rows", first.n(), m.n()));
            }
            if m.response_dim() != first.response_dim() {
                return Err(Error::dims(
                    "model set response dimension",
                    first.response_dim(),
                    m.response_dim(),
                ));
            }
        }
        let priors = normalize_priors(priors.as_deref().unwrap_or(&vec![1.0; k]), k)?;
        let (labels, models) = entries.into_iter().unzip();
        Ok(Self { labels, models, priors })
    }

    pub fn uniform(entries: Vec<(String, RegressionModel)>) -> Result<Self> {
        Self::new(entries, None)
    }

    pub fn len(&self) -> usize {
        self.models.len()
    }

    pub fn is_empty(&self) -> bool {
        self.models.is_empty()
    }

    pub fn n(&self) -> usize {
        self.models[0].n()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn models(&self) -> &[RegressionModel] {
        &self.models
    }

    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn model(&self, label: &str) -> Result<&RegressionModel> {
        Ok(&self.models[self.index_of(label)?])
    }

    pub fn log_marginals(&self, y: &Response) -> Result<Vec<f64>> {
        self.models
            .iter()
            .map(|m| gprior::log_marginal_response(m, y))
            .collect()
    }

    pub fn posterior(&self, y: &Response) -> Result<PmpVector> {
        pmp(&self.log_marginals(y)?, &self.priors)
    }

    /// The same models restricted to (resampled) rows.
    pub fn with_rows(&self, indices: &[usize]) -> Result<Self> {
        let models = self
            .models
            .iter()
            .map(|m| m.with_rows(indices))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            labels: self.labels.clone(),
            models,
            priors: self.priors.clone(),
        })
    }
}

fn normalize_priors(priors: &[f64], k: usize) -> Result<Vec<f64>> {
    if priors.len() != k {
        return Err(Error::InvalidPrior(format!(
            "expected {k} prior weights, got {}",
            priors.len()
        )));
    }
    if let Some(bad) = priors.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
        return Err(Error::InvalidPrior(format!(
            "weight {bad} is not a non-negative finite number"
        )));
    }
    let total: f64 = priors.iter().sum();
    if total.is_nan() || total <= 0.0 {
        return Err(Error::InvalidPrior("all prior weights are zero".into()));
    }
    Ok(priors.iter().map(|p| p / total).collect())
}

/// Posterior probabilities with the log marginals and normalized priors that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct PmpVector {
    pub probs: Vec<f64>,
    pub log_marginals: Vec<f64>,
    pub priors: Vec<f64>,
}

impl PmpVector {
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (k, p) in self.probs.iter().enumerate() {
            if *p > self.probs[best] {
                best = k;
            }
        }
        best
    }
}

pub fn log_sum_exp(values: &[f64]) -> f64 {
    let c = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if c == f64::NEG_INFINITY {
        return c;
    }
    c + values.iter().map(|v| (v - c).exp()).sum::<f64>().ln()
}

/// `p(M_k | y) ∝ p(y | M_k) p(M_k)`, normalized with max subtraction.
pub fn pmp(log_marginals: &[f64], priors: &[f64]) -> Result<PmpVector> {
    if log_marginals.is_empty() {
        return Err(Error::EmptyInput("log marginals"));
    }
    if log_marginals.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("log marginal"));
    }
    let priors = normalize_priors(priors, log_marginals.len())?;
    let scores: Vec<f64> = log_marginals.iter().zip(&priors).map(|(lm, p)| lm + p.ln()).collect();
    let c = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = scores.iter().map(|s| (s - c).exp()).collect();
    let total: f64 = weights.iter().sum();
    Ok(PmpVector {
        probs: weights.iter().map(|w| w / total).collect(),
        log_marginals: log_marginals.to_vec(),
        priors,
    })
}

/// Family-level probabilities, families ordered by first appearance in `labels`.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyPmp {
    pub families: Vec<String>,
    /// `log_marginals` holds each family's evidence: the log of the prior-weighted
    /// average of its members' marginal likelihoods.
    pub pmp: PmpVector,
}

/// Groups model indices into families; `partition` maps each model label to a family name.
pub fn family_members(
    labels: &[String],
    partition: &HashMap<String, String>,
) -> Result<(Vec<String>, Vec<Vec<usize>>)> {
    let known: HashSet<&str> = labels.iter().map(String::as_str).collect();
    let mut extras: Vec<&String> = partition.keys().filter(|k| !known.contains(k.as_str())).collect();
    extras.sort();
    if let Some(extra) = extras.first() {
        return Err(Error::UnknownLabel((*extra).clone()));
    }
    let mut families: Vec<String> = Vec::new();
    let mut members: Vec<Vec<usize>> = Vec::new();
    for (k, label) in labels.iter().enumerate() {
        let fam = partition
            .get(label)
            .ok_or_else(|| Error::IncompletePartition(label.clone()))?;
        match families.iter().position(|f| f == fam) {
            Some(i) => members[i].push(k),
            None => {
                families.push(fam.clone());
                members.push(vec![k]);
            }
        }
    }
    Ok((families, members))
}

/// Log evidence of a family: `log sum_k w_k p(y | M_k)` with `w` the members' priors
/// renormalized within the family (uniform if they are all zero).
pub(crate) fn family_log_evidence(members: &[usize], log_marginals: &[f64], priors: &[f64]) -> f64 {
    let mass: f64 = members.iter().map(|&k| priors[k]).sum();
    let terms: Vec<f64> = members
        .iter()
        .map(|&k| {
            let w = if mass > 0.0 {
                priors[k] / mass
            } else {
                1.0 / members.len() as f64
            };
            log_marginals[k] + w.ln()
        })
        .collect();
    log_sum_exp(&terms)
}

pub fn family_pmp(p: &PmpVector, labels: &[String], partition: &HashMap<String, String>) -> Result<FamilyPmp> {
    if labels.len() != p.probs.len() {
        return Err(Error::dims("model labels", p.probs.len(), labels.len()));
    }
    let (families, members) = family_members(labels, partition)?;
    let probs = members.iter().map(|m| m.iter().map(|&k| p.probs[k]).sum()).collect();
    let log_marginals = members
        .iter()
        .map(|m| family_log_evidence(m, &p.log_marginals, &p.priors))
        .collect();
    let priors = members.iter().map(|m| m.iter().map(|&k| p.priors[k]).sum()).collect();
    Ok(FamilyPmp {
        families,
        pmp: PmpVector {
            probs,
            log_marginals,
            priors,
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Strength {
    Negligible,
    Positive,
    Strong,
    VeryStrong,
}

impl Strength {
    pub fn name(self) -> &'static str {
        match self {
            Strength::Negligible => "negligible",
            Strength::Positive => "positive",
            Strength::Strong => "strong",
            Strength::VeryStrong => "very strong",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Favors {
    First,
    Second,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EvidenceClass {
    pub favors: Favors,
    pub strength: Strength,
}

impl EvidenceClass {
    /// Position on the signed scale, from very strong for the second model (0)
    /// through negligible (3) to very strong for the first (6).
    pub fn bin(self) -> usize {
        let s = self.strength as usize;
        match (self.strength, self.favors) {
            (Strength::Negligible, _) => 3,
            (_, Favors::First) => 3 + s,
            (_, Favors::Second) => 3 - s,
        }
    }
}

pub const EVIDENCE_BIN_NAMES: [&str; 7] = [
    "very strong (second)",
    "strong (second)",
    "positive (second)",
    "negligible",
    "positive (first)",
    "strong (first)",
    "very strong (first)",
];

/// Kass–Raftery scale on `2 ln B12`. The default cut points are 2, 6 and 10.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KassRaftery {
    thresholds: [f64; 3],
}

impl Default for KassRaftery {
    fn default() -> Self {
        Self {
            thresholds: [2.0, 6.0, 10.0],
        }
    }
}

impl KassRaftery {
    pub fn new(thresholds: [f64; 3]) -> Result<Self> {
        let ok = thresholds.iter().all(|t| t.is_finite())
            && thresholds[0] > 0.0
            && thresholds[0] < thresholds[1]
            && thresholds[1] < thresholds[2];
        if !ok {
            return Err(Error::InvalidPrior(format!(
                "evidence thresholds must be positive and increasing, got {thresholds:?}"
            )));
        }
        Ok(Self { thresholds })
    }

    /// Cut points on the `2 ln B12` scale.
    pub fn thresholds(&self) -> [f64; 3] {
        self.thresholds
    }

    /// Band edges on the `ln B12` scale, ascending and symmetric about 0.
    pub fn log_bf_edges(&self) -> [f64; 7] {
        let [a, b, c] = self.thresholds.map(|t| t / 2.0);
        [-c, -b, -a, 0.0, a, b, c]
    }

    pub fn classify(&self, log_bf: f64) -> Result<EvidenceClass> {
        if !log_bf.is_finite() {
            return Err(Error::NonFinite("log Bayes factor"));
        }
        let favors = if log_bf >= 0.0 { Favors::First } else { Favors::Second };
        let scaled = 2.0 * log_bf.abs();
        let [a, b, c] = self.thresholds;
        let strength = if scaled < a {
            Strength::Negligible
        } else if scaled < b {
            Strength::Positive
        } else if scaled < c {
            Strength::Strong
        } else {
            Strength::VeryStrong
        };
        Ok(EvidenceClass { favors, strength })
    }
}

pub fn kass_raftery_class(log_bf: f64) -> Result<EvidenceClass> {
    KassRaftery::default().classify(log_bf)
}
