//! Sentence probabilities: exact enumeration on tiny tori and Monte Carlo.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::samplers::{FieldModel, IsingDistribution, ReplicaSampler, SamplerOptions, MAX_EXACT_SITES};
use crate::scalar::Real;
use crate::sentence::Sentence;
use crate::torus::TorusGraph;

use super::satisfy::CompiledSentence;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    MonteCarlo,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Exact => "exact",
            Method::MonteCarlo => "monte_carlo",
        })
    }
}

/// `mu_n(A_n)`, exactly or as a binomial estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProbabilityEstimate<T> {
    pub point: T,
    /// Zero for exact values, `sqrt(p(1-p)/replicas)` otherwise.
    pub stderr: T,
    /// Zero for exact values.
    pub replicas: usize,
    pub method: Method,
}

impl<T: Real> ProbabilityEstimate<T> {
    pub fn exact(point: T) -> Self {
        ProbabilityEstimate {
            point,
            stderr: T::zero(),
            replicas: 0,
            method: Method::Exact,
        }
    }

    pub fn from_counts(hits: usize, replicas: usize) -> Self {
        let r = T::from_usize_lossy(replicas);
        let point = T::from_usize_lossy(hits) / r;
        ProbabilityEstimate {
            point,
            stderr: (point * (T::one() - point) / r).sqrt(),
            replicas,
            method: Method::MonteCarlo,
        }
    }
}

// Fixed chunking keeps floating-point sums identical from run to run.
const EXACT_CHUNK: u64 = 1 << 12;

/// Mass of every configuration mask under a model with closed-form weights.
enum MaskMass<T> {
    Product { plus: T, minus: T, sites: usize },
    Ising(IsingDistribution<T>),
}

impl<T: Real> MaskMass<T> {
    fn new(torus: &TorusGraph, model: &FieldModel<T>) -> Result<Self> {
        let sites = torus.sites();
        if sites > MAX_EXACT_SITES {
            return Err(Error::EnumerationBound {
                sites,
                max: MAX_EXACT_SITES,
            });
        }
        model.validate(torus)?;
        match model {
            FieldModel::Bernoulli { p } => Ok(MaskMass::Product {
                plus: *p,
                minus: T::one() - *p,
                sites,
            }),
            FieldModel::Ising(i) => Ok(MaskMass::Ising(IsingDistribution::new(torus, *i)?)),
            FieldModel::ShiftField(_) => Err(Error::IntractableModel(
                "thresholded moving-average fields have no closed-form configuration mass".into(),
            )),
        }
    }

    fn mass(&self, mask: u64) -> T {
        match self {
            MaskMass::Product { plus, minus, sites } => {
                let k = mask.count_ones() as i32;
                plus.powi(k) * minus.powi(*sites as i32 - k)
            }
            MaskMass::Ising(dist) => dist.probability_of_mask(mask),
        }
    }
}

/// Exact probabilities of several sentences, summing the mass of every
/// configuration of the torus (at most 24 sites).
pub fn exact_probabilities<T: Real>(
    torus: &TorusGraph,
    model: &FieldModel<T>,
    sentences: &[Sentence],
    cap: usize,
) -> Result<Vec<ProbabilityEstimate<T>>> {
    let mass = MaskMass::new(torus, model)?;
    let compiled = sentences
        .iter()
        .map(|s| CompiledSentence::new(torus, s, cap))
        .collect::<Result<Vec<_>>>()?;
    let params = torus.params();
    let total = 1u64 << torus.sites();
    let chunks: Vec<Vec<T>> = (0..total.div_ceil(EXACT_CHUNK))
        .into_par_iter()
        .map(|chunk| {
            let mut acc = vec![T::zero(); compiled.len()];
            let end = ((chunk + 1) * EXACT_CHUNK).min(total);
            for mask in chunk * EXACT_CHUNK..end {
                let config = crate::configuration::Configuration::from_mask(params, mask);
                let m = mass.mass(mask);
                for (a, s) in acc.iter_mut().zip(&compiled) {
                    if s.satisfies(&config) {
                        *a = *a + m;
                    }
                }
            }
            acc
        })
        .collect();
    let mut sums = vec![T::zero(); compiled.len()];
    for chunk in chunks {
        for (s, c) in sums.iter_mut().zip(chunk) {
            *s = *s + c;
        }
    }
    Ok(sums.into_iter().map(ProbabilityEstimate::exact).collect())
}

/// `mu_n(eta |= A)` by enumeration of all `2^{n^d}` configurations.
pub fn exact_probability<T: Real>(
    torus: &TorusGraph,
    model: &FieldModel<T>,
    sentence: &Sentence,
    cap: usize,
) -> Result<ProbabilityEstimate<T>> {
    Ok(exact_probabilities(torus, model, std::slice::from_ref(sentence), cap)?.remove(0))
}

/// Monte Carlo estimates of several sentences on shared samples.
///
/// Replica `i` is drawn from stream `i` of `seed`, so the result depends only
/// on `(seed, replicas)`.
pub fn estimate_probabilities<T: Real>(
    torus: &TorusGraph,
    model: &FieldModel<T>,
    sentences: &[Sentence],
    replicas: usize,
    seed: u64,
    options: SamplerOptions,
    cap: usize,
) -> Result<Vec<ProbabilityEstimate<T>>> {
    if replicas == 0 {
        return Err(Error::Config("replicas must be >= 1".into()));
    }
    let sampler = ReplicaSampler::new(torus, model, options)?;
    let compiled = sentences
        .iter()
        .map(|s| CompiledSentence::new(torus, s, cap))
        .collect::<Result<Vec<_>>>()?;
    let hits = (0..replicas as u64)
        .into_par_iter()
        .fold(
            || vec![0usize; compiled.len()],
            |mut acc, r| {
                let config = sampler.sample_replica(seed, r);
                for (a, s) in acc.iter_mut().zip(&compiled) {
                    *a += s.satisfies(&config) as usize;
                }
                acc
            },
        )
        .reduce(
            || vec![0usize; compiled.len()],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    Ok(hits
        .into_iter()
        .map(|h| ProbabilityEstimate::from_counts(h, replicas))
        .collect())
}

/// Fraction of sampled configurations satisfying `sentence`.
pub fn estimate_probability<T: Real>(
    torus: &TorusGraph,
    model: &FieldModel<T>,
    sentence: &Sentence,
    replicas: usize,
    seed: u64,
    options: SamplerOptions,
    cap: usize,
) -> Result<ProbabilityEstimate<T>> {
    Ok(estimate_probabilities(
        torus,
        model,
        std::slice::from_ref(sentence),
        replicas,
        seed,
        options,
        cap,
    )?
    .remove(0))
}
