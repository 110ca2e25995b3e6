//! The Ising measure
//! `mu_{a,b}(eta) = Z^{-1} exp(a sum_x eta(x) + b sum_{xy} eta(x) eta(y))`
//! on a torus: exact enumeration on tiny tori and local energies of balls.

use std::sync::OnceLock;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::configuration::{BallIndex, Configuration};
use crate::error::{Error, Result};
use crate::scalar::{log_sum_exp, Real};
use crate::torus::{TorusGraph, TorusParams};

use super::seeding::{rng_from_seed, SimRng};

/// Largest torus (in sites) handled by exact enumeration.
pub const MAX_EXACT_SITES: usize = 24;

/// Surface potential `a` and pair potential `b`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsingParams<T> {
    pub a: T,
    pub b: T,
}

impl<T: Real> IsingParams<T> {
    pub fn new(a: T, b: T) -> Result<Self> {
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidModel(format!(
                "Ising potentials must be finite, got a={a}, b={b}"
            )));
        }
        Ok(IsingParams { a, b })
    }

    /// One-site probability of `+1` when `b = 0`: `e^a / (e^a + e^-a)`.
    pub fn product_plus_probability(&self) -> T {
        logistic(self.a + self.a)
    }

    /// Heat-bath probability of setting a site to `+1` given the sum `s`
    /// of its neighbors' spins.
    pub fn heat_bath_probability(&self, neighbor_sum: i32) -> T {
        let field = self.a + self.b * T::from_f64_lossy(neighbor_sum as f64);
        logistic(field + field)
    }

    /// The same measure with `+1` and `-1` swapped: `(a, b) -> (-a, b)`.
    pub fn spin_flipped(&self) -> Self {
        IsingParams {
            a: -self.a,
            b: self.b,
        }
    }
}

/// `1 / (1 + e^{-t})` without overflow.
pub(crate) fn logistic<T: Real>(t: T) -> T {
    if t >= T::zero() {
        T::one() / (T::one() + (-t).exp())
    } else {
        let e = t.exp();
        e / (T::one() + e)
    }
}

/// Undirected edges `{x, y}` with `x < y`, each listed once.
pub fn edge_list(torus: &TorusGraph) -> Vec<(u32, u32)> {
    let mut edges = Vec::new();
    for x in 0..torus.sites() {
        for &y in torus.neighbor_slice(x) {
            if (x as u32) < y {
                edges.push((x as u32, y));
            }
        }
    }
    edges
}

/// Full table of `mu_{a,b}` on a torus with at most [`MAX_EXACT_SITES`] sites.
///
/// Configurations are indexed by their bit mask (bit `x` set iff `eta(x) = +1`).
#[derive(Debug)]
pub struct IsingDistribution<T> {
    params: TorusParams,
    ising: IsingParams<T>,
    edges: Vec<(u32, u32)>,
    log_z: T,
    cdf: OnceLock<Vec<T>>,
}

impl<T: Real> IsingDistribution<T> {
    pub fn new(torus: &TorusGraph, ising: IsingParams<T>) -> Result<Self> {
        let params = torus.params();
        let sites = params.sites();
        if sites > MAX_EXACT_SITES {
            return Err(Error::EnumerationBound {
                sites,
                max: MAX_EXACT_SITES,
            });
        }
        let edges = edge_list(torus);
        // The energy depends on the mask only through (plus count, disagreeing edges).
        let width = edges.len() + 1;
        let mut histogram = vec![0u64; (sites + 1) * width];
        for mask in 0..1u64 << sites {
            let plus = mask.count_ones() as usize;
            let disagree = disagreements(&edges, mask);
            histogram[plus * width + disagree] += 1;
        }
        let log_terms: Vec<T> = histogram
            .iter()
            .enumerate()
            .filter(|(_, &count)| count > 0)
            .map(|(cell, &count)| {
                let (plus, disagree) = (cell / width, cell % width);
                T::from_f64_lossy((count as f64).ln())
                    + energy_from_counts(&ising, sites, edges.len(), plus, disagree)
            })
            .collect();
        let log_z = log_sum_exp(log_terms);
        Ok(IsingDistribution {
            params,
            ising,
            edges,
            log_z,
            cdf: OnceLock::new(),
        })
    }

    pub fn params(&self) -> TorusParams {
        self.params
    }

    pub fn ising(&self) -> IsingParams<T> {
        self.ising
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn log_partition(&self) -> T {
        self.log_z
    }

    /// Exponent `a sum eta + b sum_{edges} eta eta` of a configuration mask.
    pub fn energy_of_mask(&self, mask: u64) -> T {
        energy_from_counts(
            &self.ising,
            self.params.sites(),
            self.edges.len(),
            mask.count_ones() as usize,
            disagreements(&self.edges, mask),
        )
    }

    pub fn probability_of_mask(&self, mask: u64) -> T {
        (self.energy_of_mask(mask) - self.log_z).exp()
    }

    pub fn probability(&self, config: &Configuration) -> T {
        assert_eq!(config.params(), self.params, "configuration on another torus");
        self.probability_of_mask(config.to_mask().expect("small torus"))
    }

    pub fn masks(&self) -> std::ops::Range<u64> {
        0..1u64 << self.params.sites()
    }

    /// `(mask, probability)` for every configuration.
    pub fn iter(&self) -> impl Iterator<Item = (u64, T)> + '_ {
        self.masks().map(move |m| (m, self.probability_of_mask(m)))
    }

    fn cdf(&self) -> &[T] {
        self.cdf.get_or_init(|| {
            let mut acc = T::zero();
            self.masks()
                .map(|m| {
                    acc = acc + self.probability_of_mask(m);
                    acc
                })
                .collect()
        })
    }

    /// Inverse-CDF draw.
    pub fn sample_with(&self, rng: &mut SimRng) -> Configuration {
        let cdf = self.cdf();
        let total = *cdf.last().expect("nonempty table");
        let u = T::from_f64_lossy(rng.random::<f64>()) * total;
        let idx = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
        Configuration::from_mask(self.params, idx as u64)
    }
}

fn disagreements(edges: &[(u32, u32)], mask: u64) -> usize {
    edges
        .iter()
        .filter(|&&(x, y)| ((mask >> x) ^ (mask >> y)) & 1 == 1)
        .count()
}

fn energy_from_counts<T: Real>(
    ising: &IsingParams<T>,
    sites: usize,
    edges: usize,
    plus: usize,
    disagree: usize,
) -> T {
    let magnetization = 2 * plus as i64 - sites as i64;
    let pair_sum = edges as i64 - 2 * disagree as i64;
    ising.a * T::from_f64_lossy(magnetization as f64) + ising.b * T::from_f64_lossy(pair_sum as f64)
}

/// Exact Ising law on a torus of at most [`MAX_EXACT_SITES`] sites.
pub fn ising_exact_distribution<T: Real>(
    params: TorusParams,
    ising: IsingParams<T>,
) -> Result<IsingDistribution<T>> {
    if params.sites() > MAX_EXACT_SITES {
        return Err(Error::EnumerationBound {
            sites: params.sites(),
            max: MAX_EXACT_SITES,
        });
    }
    IsingDistribution::new(&TorusGraph::new(params), ising)
}

/// One configuration drawn exactly from `mu_{a,b}` by inverse CDF.
pub fn ising_exact_sample<T: Real>(
    params: TorusParams,
    ising: IsingParams<T>,
    seed: u64,
) -> Result<Configuration> {
    let dist = ising_exact_distribution(params, ising)?;
    Ok(dist.sample_with(&mut rng_from_seed(seed)))
}

/// The boundary `delta U`: vertices outside `ball` adjacent to some vertex of it.
pub fn boundary(torus: &TorusGraph, ball: &[u32]) -> Vec<usize> {
    let mut inside = vec![false; torus.sites()];
    for &v in ball {
        inside[v as usize] = true;
    }
    let mut out: Vec<usize> = ball
        .iter()
        .flat_map(|&v| torus.neighbor_slice(v as usize).iter().map(|&y| y as usize))
        .filter(|&y| !inside[y])
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Local energy of a ball:
/// `H^B = a sum_{y in B} eta(y) + b sum_{{y,z} edge, y or z in B} eta(y) eta(z)`.
///
/// Only the spins on `B` and its boundary matter.
pub fn local_energy<T: Real>(
    torus: &TorusGraph,
    ising: &IsingParams<T>,
    ball: &[u32],
    config: &Configuration,
) -> T {
    let mut inside = vec![false; torus.sites()];
    for &v in ball {
        inside[v as usize] = true;
    }
    let mut field = 0i64;
    let mut pairs = 0i64;
    for &y in ball {
        let y = y as usize;
        field += config.spin(y) as i64;
        for &z in torus.neighbor_slice(y) {
            let z = z as usize;
            // Edges inside B are seen from both ends; keep one.
            if inside[z] && z < y {
                continue;
            }
            pairs += (config.spin(y) * config.spin(z)) as i64;
        }
    }
    ising.a * T::from_f64_lossy(field as f64) + ising.b * T::from_f64_lossy(pairs as f64)
}

/// Conditional law of the colors of `B(x, r)` given everything outside it,
/// `mu(I_x^D = 1 | sigma) = e^{H(zeta_D sigma)} / sum_{zeta'} e^{H(zeta' sigma)}`.
///
/// Entry `k` is the probability of the coloring with key `k`. Spins of
/// `outside` that lie in the ball are ignored.
pub fn conditional_ball_probabilities<T: Real>(
    torus: &TorusGraph,
    ising: &IsingParams<T>,
    index: &BallIndex,
    x: usize,
    outside: &Configuration,
) -> Result<Vec<T>> {
    let beta = index.beta();
    if beta > 20 {
        return Err(Error::CapExceeded { bits: beta, cap: 20 });
    }
    let ball = index.ball(x);
    let mut work = outside.clone();
    let energies: Vec<T> = (0..1u64 << beta)
        .map(|key| {
            for (i, &v) in ball.iter().enumerate() {
                work.set(v as usize, (key >> i) & 1 == 1);
            }
            local_energy(torus, ising, ball, &work)
        })
        .collect();
    let log_norm = log_sum_exp(energies.iter().copied());
    Ok(energies.into_iter().map(|h| (h - log_norm).exp()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::Norm;

    fn cycle(n: usize) -> TorusParams {
        TorusParams::new(1, n, Norm::Finite(1), 1).unwrap()
    }

    #[test]
    fn uniform_when_potentials_vanish() {
        let dist = ising_exact_distribution(cycle(3), IsingParams::new(0.0, 0.0).unwrap()).unwrap();
        for (_, p) in dist.iter() {
            assert!((p - 0.125f64).abs() < 1e-15);
        }
    }

    #[test]
    fn three_cycle_all_plus() {
        // Hand enumeration of the 3-cycle: all equal spins give pair sum 3,
        // the six mixed configurations give -1.
        for b in [-0.7f64, 0.0, 0.3, 1.0] {
            let dist = ising_exact_distribution(cycle(3), IsingParams::new(0.0, b).unwrap()).unwrap();
            let expected = (3.0 * b).exp() / (2.0 * (3.0 * b).exp() + 6.0 * (-b).exp());
            assert!((dist.probability_of_mask(0b111) - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn total_mass_is_one() {
        let t = TorusGraph::new(TorusParams::new(2, 3, Norm::Infinity, 1).unwrap());
        let dist = IsingDistribution::new(&t, IsingParams::new(-0.4, 0.25).unwrap()).unwrap();
        let total: f64 = dist.iter().map(|(_, p)| p).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn each_edge_counted_once() {
        let t = TorusGraph::new(TorusParams::new(2, 4, Norm::Finite(1), 1).unwrap());
        assert_eq!(edge_list(&t).len(), 32);
        let t = TorusGraph::new(cycle(2));
        assert_eq!(edge_list(&t), vec![(0, 1)]);
    }

    #[test]
    fn too_many_sites() {
        let p = TorusParams::new(1, 25, Norm::Finite(1), 1).unwrap();
        assert!(matches!(
            ising_exact_distribution(p, IsingParams::new(0.0, 0.0).unwrap()),
            Err(Error::EnumerationBound { sites: 25, .. })
        ));
    }

    #[test]
    fn exact_sample_is_seeded() {
        let ising = IsingParams::new(-0.3, 0.5).unwrap();
        let a = ising_exact_sample(cycle(6), ising, 5).unwrap();
        assert_eq!(a, ising_exact_sample(cycle(6), ising, 5).unwrap());
    }

    #[test]
    fn strong_negative_field_gives_all_white() {
        let ising = IsingParams::new(-20.0, 0.0).unwrap();
        for seed in 0..20 {
            let c = ising_exact_sample(cycle(5), ising, seed).unwrap();
            assert_eq!(c.plus_count(), 0);
        }
    }

    #[test]
    fn single_site_conditional_is_heat_bath() {
        let t = TorusGraph::new(TorusParams::new(2, 5, Norm::Finite(1), 1).unwrap());
        let idx = BallIndex::for_radius(&t, 0).unwrap();
        let ising = IsingParams::new(-0.3f64, 0.7).unwrap();
        let config = Configuration::from_fn(t.params(), |x| x % 3 == 0);
        let x = 12;
        let s: i32 = t.neighbor_slice(x).iter().map(|&y| config.spin(y as usize)).sum();
        let cond = conditional_ball_probabilities(&t, &ising, &idx, x, &config).unwrap();
        assert!((cond[1] - ising.heat_bath_probability(s)).abs() < 1e-14);
    }

    #[test]
    fn generic_over_f32() {
        let dist = ising_exact_distribution(cycle(4), IsingParams::new(-0.5f32, 0.2).unwrap()).unwrap();
        let total: f32 = dist.iter().map(|(_, p)| p).sum();
        assert!((total - 1.0).abs() < 1e-5);
    }
}
