//! Systematic-scan heat-bath dynamics for the Ising measure.

use rand::Rng;

use crate::configuration::Configuration;
use crate::scalar::Real;
use crate::torus::TorusGraph;

use super::ising::IsingParams;
use super::seeding::{rng_from_seed, SimRng};

/// Sweeps discarded before the first snapshot unless configured otherwise.
pub const DEFAULT_BURN_IN: usize = 64;

/// Heat-bath update rule: probability of `+1` indexed by `(S + degree) / 2`
/// where `S` is the neighbor spin sum.
#[derive(Clone, Debug)]
pub struct HeatBathTable {
    degree: usize,
    plus: Vec<f64>,
}

impl HeatBathTable {
    pub fn new<T: Real>(torus: &TorusGraph, ising: &IsingParams<T>) -> Self {
        let degree = torus.degree();
        let plus = (0..=degree)
            .map(|k| {
                let s = 2 * k as i32 - degree as i32;
                ising.heat_bath_probability(s).to_f64_lossy()
            })
            .collect();
        HeatBathTable { degree, plus }
    }

    /// Probability of `+1` given `k` plus neighbors.
    #[inline]
    pub fn plus_given_plus_neighbors(&self, k: usize) -> f64 {
        self.plus[k]
    }

    pub fn degree(&self) -> usize {
        self.degree
    }
}

/// A single heat-bath chain with a private working configuration.
pub struct GibbsChain<'a> {
    torus: &'a TorusGraph,
    table: HeatBathTable,
    state: Configuration,
    rng: SimRng,
}

impl<'a> GibbsChain<'a> {
    /// Starts from i.i.d. fair spins drawn from `rng`.
    pub fn new<T: Real>(torus: &'a TorusGraph, ising: &IsingParams<T>, mut rng: SimRng) -> Self {
        let state = Configuration::from_fn(torus.params(), |_| rng.random::<bool>());
        Self::from_state(torus, HeatBathTable::new(torus, ising), state, rng)
    }

    pub fn from_state(
        torus: &'a TorusGraph,
        table: HeatBathTable,
        state: Configuration,
        rng: SimRng,
    ) -> Self {
        GibbsChain {
            torus,
            table,
            state,
            rng,
        }
    }

    /// Resamples site `x` from its conditional law given its neighbors.
    #[inline]
    pub fn update_site(&mut self, x: usize) {
        let plus_neighbors = self
            .torus
            .neighbor_slice(x)
            .iter()
            .filter(|&&y| self.state.is_plus(y as usize))
            .count();
        let p = self.table.plus_given_plus_neighbors(plus_neighbors);
        let plus = self.rng.random::<f64>() < p;
        self.state.set(x, plus);
    }

    /// One pass over all sites in index order.
    pub fn sweep(&mut self) {
        for x in 0..self.torus.sites() {
            self.update_site(x);
        }
    }

    pub fn run(&mut self, sweeps: usize) {
        for _ in 0..sweeps {
            self.sweep();
        }
    }

    pub fn state(&self) -> &Configuration {
        &self.state
    }

    pub fn into_state(self) -> Configuration {
        self.state
    }
}

/// Iterator over post-burn-in snapshots, one per sweep.
pub struct GibbsStream<'a> {
    chain: GibbsChain<'a>,
    remaining: usize,
}

impl GibbsStream<'_> {
    /// Advances one sweep without cloning the state.
    pub fn advance(&mut self) -> Option<&Configuration> {
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        self.chain.sweep();
        Some(self.chain.state())
    }
}

impl Iterator for GibbsStream<'_> {
    type Item = Configuration;

    fn next(&mut self) -> Option<Configuration> {
        self.advance().cloned()
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        (self.remaining, Some(self.remaining))
    }
}

/// Heat-bath chain emitting `sweeps` snapshots after `burn_in` sweeps.
pub fn ising_gibbs_chain<'a, T: Real>(
    torus: &'a TorusGraph,
    ising: &IsingParams<T>,
    sweeps: usize,
    burn_in: usize,
    seed: u64,
) -> GibbsStream<'a> {
    let mut chain = GibbsChain::new(torus, ising, rng_from_seed(seed));
    chain.run(burn_in);
    GibbsStream {
        chain,
        remaining: sweeps,
    }
}
