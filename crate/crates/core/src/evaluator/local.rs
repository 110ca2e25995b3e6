//! Empirical checks of the two hypotheses behind the zero-one law: every
//! local configuration keeps a probability bounded below, and covariances
//! of local events decay with distance.

use rayon::prelude::*;

use crate::configuration::{BallIndex, LocalConfiguration};
use crate::error::{Error, Result};
use crate::samplers::{FieldModel, ReplicaSampler, SamplerOptions};
use crate::scalar::Real;
use crate::torus::{BallTemplate, TorusGraph};

/// Largest ball whose description frequencies are tabulated.
pub const MAX_FREQUENCY_BITS: usize = 20;

/// Where ball colorings are read.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Site {
    /// Every vertex of every sample (translation-invariant models only).
    Pooled,
    /// One fixed center.
    At(usize),
}

#[derive(Clone, Debug)]
pub struct LocalFrequencies<T> {
    pub radius: usize,
    pub beta: usize,
    /// Frequency of each complete description, indexed by its key.
    pub frequencies: Vec<T>,
    /// Number of ball observations behind each frequency.
    pub observations: usize,
    pub pooled: bool,
}

impl<T: Real> LocalFrequencies<T> {
    pub fn description(&self, key: u64) -> LocalConfiguration {
        LocalConfiguration::from_key(self.radius, self.beta, key)
    }

    /// The empirical `p_D`: smallest description frequency and its key.
    pub fn min_frequency(&self) -> (u64, T) {
        self.frequencies
            .iter()
            .enumerate()
            .fold((0u64, T::infinity()), |best, (k, &f)| {
                if f < best.1 {
                    (k as u64, f)
                } else {
                    best
                }
            })
    }
}

fn add_counts(mut a: Vec<u64>, b: Vec<u64>) -> Vec<u64> {
    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
    a
}

/// Frequencies of every complete description of `template` under `model`.
pub fn check_bounded_local_probability<T: Real>(
    torus: &TorusGraph,
    model: &FieldModel<T>,
    template: &BallTemplate,
    replicas: usize,
    seed: u64,
    options: SamplerOptions,
    site: Site,
) -> Result<LocalFrequencies<T>> {
    let beta = template.beta();
    if beta > MAX_FREQUENCY_BITS {
        return Err(Error::CapExceeded {
            bits: beta,
            cap: MAX_FREQUENCY_BITS,
        });
    }
    if replicas == 0 {
        return Err(Error::Config("replicas must be >= 1".into()));
    }
    if site == Site::Pooled && !model.is_translation_invariant() {
        return Err(Error::InvalidModel(
            "pooling over sites requires a translation-invariant model".into(),
        ));
    }
    if let Site::At(x) = site {
        if x >= torus.sites() {
            return Err(Error::VertexOutOfRange {
                vertex: x,
                sites: torus.sites(),
            });
        }
    }
    let index = BallIndex::new(torus, template)?;
    let sampler = ReplicaSampler::new(torus, model, options)?;
    let cells = 1usize << beta;
    let counts = (0..replicas as u64)
        .into_par_iter()
        .fold(
            || vec![0u64; cells],
            |mut acc, r| {
                let config = sampler.sample_replica(seed, r);
                match site {
                    Site::Pooled => {
                        for x in 0..torus.sites() {
                            acc[index.key(&config, x) as usize] += 1;
                        }
                    }
                    Site::At(x) => acc[index.key(&config, x) as usize] += 1,
                }
                acc
            },
        )
        .reduce(|| vec![0u64; cells], add_counts);
    let observations = match site {
        Site::Pooled => replicas * torus.sites(),
        Site::At(_) => replicas,
    };
    let total = T::from_usize_lossy(observations);
    Ok(LocalFrequencies {
        radius: template.radius(),
        beta,
        frequencies: counts
            .into_iter()
            .map(|c| T::from_f64_lossy(c as f64) / total)
            .collect(),
        observations,
        pooled: site == Site::Pooled,
    })
}

/// Empirical covariances between the description events of two balls at one
/// separation.
#[derive(Clone, Debug)]
pub struct CovarianceTable<T> {
    pub distance: usize,
    /// Center of the second ball; the first is centered at vertex 0.
    pub center: usize,
    /// `cov[kb * 2^beta + kc]` for description keys `kb` on B and `kc` on C.
    pub cov: Vec<T>,
    /// Delta-method standard error of each entry.
    pub stderr: Vec<T>,
}

#[derive(Clone, Debug)]
pub struct MixingRow<T> {
    pub distance: usize,
    pub center: usize,
    pub max_abs_cov: T,
    pub stderr: T,
    /// Description keys `(on B, on C)` attaining the maximum.
    pub argmax: (u64, u64),
}

/// Max-|cov| of complete-description events per separation.
#[derive(Clone, Debug)]
pub struct MixingReport<T> {
    pub radius: usize,
    pub beta: usize,
    pub samples: usize,
    pub catalog: String,
    pub rows: Vec<MixingRow<T>>,
    pub tables: Vec<CovarianceTable<T>>,
}

impl<T: Real> MixingReport<T> {
    /// Whether max-|cov| never increases with distance.
    pub fn monotone_decay(&self) -> bool {
        self.rows
            .windows(2)
            .all(|w| w[1].max_abs_cov <= w[0].max_abs_cov)
    }
}

/// Graph distance between the vertex sets `a` and `b`.
pub fn set_distance(torus: &TorusGraph, a: &[u32], b: &[u32]) -> usize {
    a.iter()
        .flat_map(|&u| b.iter().map(move |&v| (u as usize, v as usize)))
        .map(|(u, v)| torus.distance_unchecked(u, v))
        .min()
        .unwrap_or(usize::MAX)
}

/// Center `t e_1` of the nearest ball along the first axis whose set distance
/// to `B(0, r)` is at least `distance`.
pub fn ball_pair_center(torus: &TorusGraph, index: &BallIndex, distance: usize) -> Result<usize> {
    let n = torus.params().n();
    if distance == 0 || 2 * distance > n {
        return Err(Error::Infeasible(format!(
            "separation {distance} impossible on a torus of side {n} (need 1 <= s <= n/2)"
        )));
    }
    let d = torus.params().d();
    let origin_ball = index.ball(0);
    for t in 1..n as i64 {
        let mut offset = vec![0i64; d];
        offset[0] = t;
        let c = torus.offset_vertex(0, &offset);
        if set_distance(torus, origin_ball, index.ball(c)) >= distance {
            return Ok(c);
        }
    }
    Err(Error::Infeasible(format!(
        "no ball of radius {} lies at distance >= {distance} from B(0,{}) on this torus",
        index.radius(),
        index.radius()
    )))
}

/// Covariance and delta-method standard error from joint and marginal frequencies.
pub fn covariance_with_stderr<T: Real>(p_bc: T, p_b: T, p_c: T, samples: usize) -> (T, T) {
    let one = T::one();
    let cov = p_bc - p_b * p_c;
    // Influence function f = 1_BC - p_C 1_B - p_B 1_C.
    let mean = p_bc - (p_b * p_c + p_b * p_c);
    let both = one - p_b - p_c;
    let second = p_bc * both * both + (p_b - p_bc) * p_c * p_c + (p_c - p_bc) * p_b * p_b;
    let var = (second - mean * mean).max(T::zero());
    (cov, (var / T::from_usize_lossy(samples)).sqrt())
}

/// Largest ball whose pair table `2^(2 beta)` is tabulated.
pub const MAX_MIXING_BITS: usize = 10;

/// For each separation, the largest |empirical covariance| between a complete
/// description of `B(0, r)` and one of a ball at that separation.
pub fn estimate_mixing<T: Real>(
    torus: &TorusGraph,
    model: &FieldModel<T>,
    radius: usize,
    distances: &[usize],
    replicas: usize,
    seed: u64,
    options: SamplerOptions,
) -> Result<MixingReport<T>> {
    if replicas == 0 {
        return Err(Error::Config("replicas must be >= 1".into()));
    }
    let index = BallIndex::for_radius(torus, radius)?;
    let beta = index.beta();
    if beta > MAX_MIXING_BITS {
        return Err(Error::CapExceeded {
            bits: beta,
            cap: MAX_MIXING_BITS,
        });
    }
    let centers = distances
        .iter()
        .map(|&s| ball_pair_center(torus, &index, s))
        .collect::<Result<Vec<_>>>()?;
    let sampler = ReplicaSampler::new(torus, model, options)?;
    let cells = 1usize << beta;
    let width = cells * cells;
    let joint = (0..replicas as u64)
        .into_par_iter()
        .fold(
            || vec![0u64; width * centers.len()],
            |mut acc, r| {
                let config = sampler.sample_replica(seed, r);
                let kb = index.key(&config, 0) as usize;
                for (j, &c) in centers.iter().enumerate() {
                    let kc = index.key(&config, c) as usize;
                    acc[j * width + kb * cells + kc] += 1;
                }
                acc
            },
        )
        .reduce(|| vec![0u64; width * centers.len()], add_counts);

    let total = T::from_usize_lossy(replicas);
    let mut rows = Vec::with_capacity(centers.len());
    let mut tables = Vec::with_capacity(centers.len());
    for (j, (&distance, &center)) in distances.iter().zip(&centers).enumerate() {
        let block = &joint[j * width..(j + 1) * width];
        let freq = |c: u64| T::from_f64_lossy(c as f64) / total;
        let p_b: Vec<T> = (0..cells)
            .map(|kb| freq(block[kb * cells..(kb + 1) * cells].iter().sum()))
            .collect();
        let p_c: Vec<T> = (0..cells)
            .map(|kc| freq((0..cells).map(|kb| block[kb * cells + kc]).sum()))
            .collect();
        let mut cov = Vec::with_capacity(width);
        let mut stderr = Vec::with_capacity(width);
        for kb in 0..cells {
            for kc in 0..cells {
                let (c, s) = covariance_with_stderr(freq(block[kb * cells + kc]), p_b[kb], p_c[kc], replicas);
                cov.push(c);
                stderr.push(s);
            }
        }
        let (arg, max_abs) = cov
            .iter()
            .enumerate()
            .fold((0usize, T::zero()), |best, (i, &c)| {
                if c.abs() > best.1 {
                    (i, c.abs())
                } else {
                    best
                }
            });
        rows.push(MixingRow {
            distance,
            center,
            max_abs_cov: max_abs,
            stderr: stderr[arg],
            argmax: ((arg / cells) as u64, (arg % cells) as u64),
        });
        tables.push(CovarianceTable {
            distance,
            center,
            cov,
            stderr,
        });
    }
    Ok(MixingReport {
        radius,
        beta,
        samples: replicas,
        catalog: format!(
            "all {cells} complete descriptions of B(0,{radius}) against all {cells} of B(c,{radius})"
        ),
        rows,
        tables,
    })
}
