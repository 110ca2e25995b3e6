use rand::Rng;

use crate::configuration::Configuration;
use crate::error::{Error, Result};
use crate::torus::TorusParams;

use super::seeding::{rng_from_seed, SimRng};

// Below this density, gaps between black sites are drawn geometrically.
const SPARSE_BELOW: f64 = 0.25;

pub(crate) fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidProbability(p))
    }
}

/// Independent spins, `+1` with probability `p`.
pub fn sample_bernoulli(params: TorusParams, p: f64, seed: u64) -> Result<Configuration> {
    check_probability(p)?;
    Ok(bernoulli_with_rng(params, p, &mut rng_from_seed(seed)))
}

pub(crate) fn bernoulli_with_rng(params: TorusParams, p: f64, rng: &mut SimRng) -> Configuration {
    let sites = params.sites();
    if p <= 0.0 {
        return Configuration::all_minus(params);
    }
    if p >= 1.0 {
        return Configuration::all_plus(params);
    }
    let mut config = Configuration::all_minus(params);
    if p < SPARSE_BELOW {
        let log_q = (-p).ln_1p();
        let mut pos: usize = 0;
        loop {
            let u = 1.0 - rng.random::<f64>();
            let gap = (u.ln() / log_q).floor();
            if gap >= (sites - pos) as f64 {
                break;
            }
            pos += gap as usize;
            config.set(pos, true);
            pos += 1;
            if pos >= sites {
                break;
            }
        }
    } else {
        for x in 0..sites {
            if rng.random::<f64>() < p {
                config.set(x, true);
            }
        }
    }
    config
}
