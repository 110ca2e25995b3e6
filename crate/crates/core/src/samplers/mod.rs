//! Random fields on the torus: product Bernoulli, Ising (exact and heat
//! bath) and thresholded moving averages, all driven by seeded ChaCha8.

mod bernoulli;
mod gibbs;
mod ising;
mod schedule;
mod seeding;
mod shift;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use bernoulli::sample_bernoulli;
pub use gibbs::{ising_gibbs_chain, GibbsChain, GibbsStream, HeatBathTable, DEFAULT_BURN_IN};
pub use ising::{
    boundary, conditional_ball_probabilities, edge_list, ising_exact_distribution,
    ising_exact_sample, local_energy, IsingDistribution, IsingParams, MAX_EXACT_SITES,
};
pub use schedule::{schedule_eval, PairRule, PotentialRule, PotentialSchedule};
pub use seeding::{replica_rng, rng_from_seed, SimRng};
pub use shift::{sample_shift_field, Innovation, KernelTerm, ShiftFieldParams};

use crate::configuration::Configuration;
use crate::error::Result;
use crate::scalar::Real;
use crate::torus::TorusGraph;

/// Which law the configurations are drawn from.
#[derive(Clone, Debug, PartialEq)]
pub enum FieldModel<T> {
    Bernoulli { p: T },
    Ising(IsingParams<T>),
    ShiftField(ShiftFieldParams<T>),
}

impl<T: Real> FieldModel<T> {
    pub fn validate(&self, torus: &TorusGraph) -> Result<()> {
        match self {
            FieldModel::Bernoulli { p } => bernoulli::check_probability(p.to_f64_lossy()),
            FieldModel::Ising(i) => IsingParams::new(i.a, i.b).map(|_| ()),
            FieldModel::ShiftField(sf) => sf.validate(&torus.params()),
        }
    }

    /// All models here are invariant under torus translations.
    pub fn is_translation_invariant(&self) -> bool {
        true
    }
}

impl<T: Real> fmt::Display for FieldModel<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldModel::Bernoulli { p } => write!(f, "bernoulli(p={p})"),
            FieldModel::Ising(i) => write!(f, "ising(a={};b={})", i.a, i.b),
            FieldModel::ShiftField(sf) => write!(
                f,
                "shift(terms={};threshold={};innovation={:?})",
                sf.kernel.len(),
                sf.threshold,
                sf.innovation
            ),
        }
    }
}

/// How Ising configurations are produced for Monte Carlo estimates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IsingMethod {
    /// Independent heat-bath chains, one per replica.
    #[default]
    Gibbs,
    /// Inverse-CDF draws from the enumerated law (tiny tori only).
    Exact,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SamplerOptions {
    /// Heat-bath sweeps run before a replica's configuration is taken.
    pub burn_in: usize,
    pub ising: IsingMethod,
}

impl Default for SamplerOptions {
    fn default() -> Self {
        SamplerOptions {
            burn_in: DEFAULT_BURN_IN,
            ising: IsingMethod::Gibbs,
        }
    }
}

enum Prepared<T> {
    Bernoulli(f64),
    IsingExact(IsingDistribution<T>),
    Gibbs { table: HeatBathTable, burn_in: usize },
    Shift(ShiftFieldParams<T>),
}

/// Draws one independent configuration per replica from a prepared model.
///
/// An Ising model with `b = 0` is sampled as the product measure it is.
pub struct ReplicaSampler<'a, T> {
    torus: &'a TorusGraph,
    prepared: Prepared<T>,
}

impl<'a, T: Real> ReplicaSampler<'a, T> {
    pub fn new(torus: &'a TorusGraph, model: &FieldModel<T>, options: SamplerOptions) -> Result<Self> {
        model.validate(torus)?;
        let prepared = match model {
            FieldModel::Bernoulli { p } => Prepared::Bernoulli(p.to_f64_lossy()),
            FieldModel::Ising(i) if i.b == T::zero() => {
                Prepared::Bernoulli(i.product_plus_probability().to_f64_lossy())
            }
            FieldModel::Ising(i) => match options.ising {
                IsingMethod::Exact => Prepared::IsingExact(IsingDistribution::new(torus, *i)?),
                IsingMethod::Gibbs => Prepared::Gibbs {
                    table: HeatBathTable::new(torus, i),
                    burn_in: options.burn_in,
                },
            },
            FieldModel::ShiftField(sf) => Prepared::Shift(sf.clone()),
        };
        Ok(ReplicaSampler { torus, prepared })
    }

    pub fn torus(&self) -> &TorusGraph {
        self.torus
    }

    pub fn sample(&self, rng: &mut SimRng) -> Configuration {
        match &self.prepared {
            Prepared::Bernoulli(p) => bernoulli::bernoulli_with_rng(self.torus.params(), *p, rng),
            Prepared::IsingExact(dist) => dist.sample_with(rng),
            Prepared::Gibbs { table, burn_in } => {
                use rand::Rng;
                let state = Configuration::from_fn(self.torus.params(), |_| rng.random::<bool>());
                let mut chain = GibbsChain::from_state(self.torus, table.clone(), state, rng.clone());
                chain.run(*burn_in);
                chain.into_state()
            }
            Prepared::Shift(sf) => shift::shift_field_with_rng(self.torus, sf, rng),
        }
    }

    /// Configuration of replica `replica` under `seed`.
    pub fn sample_replica(&self, seed: u64, replica: u64) -> Configuration {
        self.sample(&mut replica_rng(seed, replica))
    }
}
