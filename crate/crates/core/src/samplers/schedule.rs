//! Potentials `a(n)`, `b(n)` indexed by the torus side.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

use super::ising::IsingParams;

/// Rule for the surface potential.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialRule<T> {
    /// `a(n) = ln c - theta * d / (2k) * ln n`, so `e^{a(n)} = c n^{-theta d / (2k)}`.
    /// `theta < 1` sits above the threshold of index `k`, `theta > 1` below it.
    Parametric { c: T, k: u32, theta: T, d: usize },
    Table(Vec<(usize, T)>),
}

/// Rule for the pair potential.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairRule<T> {
    Constant(T),
    Table(Vec<(usize, T)>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialSchedule<T> {
    pub a: PotentialRule<T>,
    pub b: PairRule<T>,
    /// Optional bound with `|b(n)| < b0` enforced at every evaluation.
    pub b0: Option<T>,
}

fn lookup<T: Copy>(table: &[(usize, T)], n: usize, what: &str) -> Result<T> {
    table
        .iter()
        .find(|(m, _)| *m == n)
        .map(|(_, v)| *v)
        .ok_or_else(|| Error::Config(format!("{what} table has no entry for n = {n}")))
}

impl<T: Real> PotentialSchedule<T> {
    pub fn eval(&self, n: usize) -> Result<IsingParams<T>> {
        let a = match &self.a {
            PotentialRule::Parametric { c, k, theta, d } => {
                if *c <= T::zero() || *k == 0 {
                    return Err(Error::Config("schedule needs c > 0 and k >= 1".into()));
                }
                let exponent = *theta * T::from_usize_lossy(*d) / T::from_usize_lossy(2 * *k as usize);
                c.ln() - exponent * T::from_usize_lossy(n).ln()
            }
            PotentialRule::Table(t) => lookup(t, n, "a(n)")?,
        };
        let b = match &self.b {
            PairRule::Constant(b) => *b,
            PairRule::Table(t) => lookup(t, n, "b(n)")?,
        };
        if a >= T::zero() {
            return Err(Error::NonNegativePotential {
                n,
                a: a.to_f64_lossy(),
            });
        }
        if let Some(b0) = self.b0 {
            if b.abs() >= b0 {
                return Err(Error::InvalidModel(format!(
                    "|b(n)| = {} is not below b0 = {b0} at n = {n}",
                    b.abs()
                )));
            }
        }
        IsingParams::new(a, b)
    }
}

/// Evaluates `schedule` at side length `n`.
pub fn schedule_eval<T: Real>(schedule: &PotentialSchedule<T>, n: usize) -> Result<IsingParams<T>> {
    schedule.eval(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parametric(c: f64, k: u32, theta: f64, d: usize) -> PotentialSchedule<f64> {
        PotentialSchedule {
            a: PotentialRule::Parametric { c, k, theta, d },
            b: PairRule::Constant(0.0),
            b0: None,
        }
    }

    #[test]
    fn parametric_formula() {
        let p = schedule_eval(&parametric(1.0, 1, 1.0, 2), 100).unwrap();
        assert!((p.a - (-100f64.ln())).abs() < 1e-12);
        assert!((p.a + 4.6052).abs() < 1e-4);
    }

    #[test]
    fn zero_exponent_is_constant() {
        let s = parametric(0.5, 1, 0.0, 2);
        for n in [4, 40, 400] {
            assert!((s.eval(n).unwrap().a - 0.5f64.ln()).abs() < 1e-15);
        }
        assert!(matches!(
            parametric(1.0, 1, 0.0, 2).eval(10),
            Err(Error::NonNegativePotential { .. })
        ));
    }

    #[test]
    fn table_rule_echoes_entries() {
        let s = PotentialSchedule {
            a: PotentialRule::Table(vec![(8, -1.5), (16, -2.5)]),
            b: PairRule::Table(vec![(8, 0.1), (16, 0.2)]),
            b0: Some(1.0),
        };
        let p = s.eval(16).unwrap();
        assert_eq!((p.a, p.b), (-2.5, 0.2));
        assert!(s.eval(32).is_err());
    }

    #[test]
    fn pair_bound_enforced() {
        let s = PotentialSchedule {
            a: PotentialRule::Table(vec![(8, -1.0)]),
            b: PairRule::Constant(2.0),
            b0: Some(1.0),
        };
        assert!(s.eval(8).is_err());
    }
}
