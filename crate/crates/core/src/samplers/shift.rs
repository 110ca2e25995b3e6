//! Thresholded moving-average fields `eta(t) = sign(sum_s a_s xi_{t-s} - h)`.
//!
//! Innovations `xi` are i.i.d. and live on the torus itself, so the
//! convolution wraps around. This is a periodic stand-in for the field on
//! `Z^d`: the two agree in law whenever the kernel fits in the torus.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::configuration::Configuration;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::torus::{TorusGraph, TorusParams};

use super::seeding::{rng_from_seed, SimRng};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Innovation {
    /// Standard normal.
    Gaussian,
    /// Uniform on `{-1, +1}`.
    Rademacher,
    /// Uniform on `[-1, 1)`.
    Uniform,
}

impl Innovation {
    fn draw(self, rng: &mut SimRng) -> f64 {
        match self {
            Innovation::Gaussian => rng.sample(StandardNormal),
            Innovation::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            Innovation::Uniform => 2.0 * rng.random::<f64>() - 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelTerm<T> {
    pub offset: Vec<i64>,
    pub weight: T,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShiftFieldParams<T> {
    pub kernel: Vec<KernelTerm<T>>,
    pub threshold: T,
    pub innovation: Innovation,
}

impl<T: Real> ShiftFieldParams<T> {
    pub fn validate(&self, params: &TorusParams) -> Result<()> {
        if self.kernel.iter().all(|t| t.weight == T::zero()) {
            return Err(Error::InvalidModel("kernel needs a nonzero weight".into()));
        }
        if !self.threshold.is_finite() || self.kernel.iter().any(|t| !t.weight.is_finite()) {
            return Err(Error::InvalidModel("kernel weights and threshold must be finite".into()));
        }
        let d = params.d();
        if self.kernel.iter().any(|t| t.offset.len() != d) {
            return Err(Error::InvalidModel(format!("kernel offsets must have {d} coordinates")));
        }
        for axis in 0..d {
            let lo = self.kernel.iter().map(|t| t.offset[axis]).min().unwrap_or(0);
            let hi = self.kernel.iter().map(|t| t.offset[axis]).max().unwrap_or(0);
            if (hi - lo) as usize >= params.n() {
                return Err(Error::Infeasible(format!(
                    "kernel support spans {} cells along axis {axis}, torus side is {}",
                    hi - lo + 1,
                    params.n()
                )));
            }
        }
        Ok(())
    }
}

pub(crate) fn shift_field_with_rng<T: Real>(
    torus: &TorusGraph,
    sf: &ShiftFieldParams<T>,
    rng: &mut SimRng,
) -> Configuration {
    let innovations: Vec<f64> = (0..torus.sites()).map(|_| sf.innovation.draw(rng)).collect();
    let terms: Vec<(Vec<i64>, f64)> = sf
        .kernel
        .iter()
        .map(|t| (t.offset.iter().map(|c| -c).collect(), t.weight.to_f64_lossy()))
        .collect();
    let threshold = sf.threshold.to_f64_lossy();
    Configuration::from_fn(torus.params(), |x| {
        let y: f64 = terms
            .iter()
            .map(|(neg, w)| w * innovations[torus.offset_vertex(x, neg)])
            .sum();
        y > threshold
    })
}

/// Draws one thresholded moving-average configuration.
pub fn sample_shift_field<T: Real>(
    params: TorusParams,
    sf: &ShiftFieldParams<T>,
    seed: u64,
) -> Result<Configuration> {
    sf.validate(&params)?;
    let torus = TorusGraph::new(params);
    Ok(shift_field_with_rng(&torus, sf, &mut rng_from_seed(seed)))
}
