//! Complete descriptions, the index `k(L)` and the pattern embedding.

use std::fmt;

use crate::configuration::LocalConfiguration;
use crate::error::{Error, Result};
use crate::torus::{BallTemplate, Lattice, TorusGraph};

use super::ast::{BasicLocalSentence, Formula, LocalFormula};

/// Largest ball (in cells) whose colorings `decompose` will enumerate.
pub const DEFAULT_ENUMERATION_CAP: usize = 25;

/// A formula compiled against a ball template: atoms become bit positions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CompiledFormula {
    Bit(u32),
    Not(Box<CompiledFormula>),
    And(Box<CompiledFormula>, Box<CompiledFormula>),
    Or(Box<CompiledFormula>, Box<CompiledFormula>),
}

impl CompiledFormula {
    pub fn compile(formula: &Formula, template: &BallTemplate) -> Result<Self> {
        Ok(match formula {
            Formula::Atom(o) => match template.position(o) {
                Some(i) => CompiledFormula::Bit(i as u32),
                None => {
                    return Err(Error::OffsetOutsideBall {
                        offset: o.clone(),
                        radius: template.radius(),
                    })
                }
            },
            Formula::Not(f) => CompiledFormula::Not(Box::new(Self::compile(f, template)?)),
            Formula::And(a, b) => CompiledFormula::And(
                Box::new(Self::compile(a, template)?),
                Box::new(Self::compile(b, template)?),
            ),
            Formula::Or(a, b) => CompiledFormula::Or(
                Box::new(Self::compile(a, template)?),
                Box::new(Self::compile(b, template)?),
            ),
        })
    }

    /// Truth value on a coloring given as bits (bit `i` = offset `i` black).
    #[inline]
    pub fn eval_key(&self, key: u64) -> bool {
        match self {
            CompiledFormula::Bit(i) => (key >> i) & 1 == 1,
            CompiledFormula::Not(f) => !f.eval_key(key),
            CompiledFormula::And(a, b) => a.eval_key(key) && b.eval_key(key),
            CompiledFormula::Or(a, b) => a.eval_key(key) || b.eval_key(key),
        }
    }

    /// Truth value on a coloring given by a per-position lookup.
    pub fn eval_by(&self, color: &impl Fn(usize) -> bool) -> bool {
        match self {
            CompiledFormula::Bit(i) => color(*i as usize),
            CompiledFormula::Not(f) => !f.eval_by(color),
            CompiledFormula::And(a, b) => a.eval_by(color) && b.eval_by(color),
            CompiledFormula::Or(a, b) => a.eval_by(color) || b.eval_by(color),
        }
    }
}

/// A complete description `D(0)`: one literal for every cell of `B(0, r)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CompleteDescription {
    local: LocalConfiguration,
}

impl CompleteDescription {
    pub fn new(local: LocalConfiguration) -> Self {
        CompleteDescription { local }
    }

    pub fn local(&self) -> &LocalConfiguration {
        &self.local
    }

    pub fn radius(&self) -> usize {
        self.local.radius()
    }

    /// Number of black cells `k`.
    pub fn plus_count(&self) -> usize {
        self.local.plus_count()
    }

    /// The description as a conjunction of literals over `template`'s offsets.
    pub fn to_formula(&self, template: &BallTemplate) -> Formula {
        let literals = template
            .offsets()
            .iter()
            .zip(self.local.colors())
            .map(|(o, &black)| {
                let atom = Formula::Atom(o.clone());
                if black {
                    atom
                } else {
                    atom.not()
                }
            });
        Formula::conjunction(literals).expect("balls are never empty")
    }
}

impl fmt::Display for CompleteDescription {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.local.fmt(f)
    }
}

fn check_cap(beta: usize, cap: usize) -> Result<()> {
    if beta > cap || beta >= 64 {
        Err(Error::CapExceeded { bits: beta, cap })
    } else {
        Ok(())
    }
}

/// Keys (bit-packed colorings) of every ball coloring satisfying `psi`, ascending.
pub fn satisfying_keys(psi: &LocalFormula, template: &BallTemplate, cap: usize) -> Result<Vec<u64>> {
    let beta = template.beta();
    check_cap(beta, cap)?;
    let compiled = CompiledFormula::compile(psi.formula(), template)?;
    Ok((0..1u64 << beta).filter(|&k| compiled.eval_key(k)).collect())
}

/// The complete descriptions `D` with `D -> psi`, found by evaluating `psi`
/// on all `2^beta(r)` colorings of the ball. Empty iff `psi` is unsatisfiable.
pub fn decompose(psi: &LocalFormula, lattice: &Lattice, cap: usize) -> Result<Vec<CompleteDescription>> {
    let template = lattice.ball(psi.radius());
    let beta = template.beta();
    Ok(satisfying_keys(psi, &template, cap)?
        .into_iter()
        .map(|k| CompleteDescription::new(LocalConfiguration::from_key(psi.radius(), beta, k)))
        .collect())
}

/// Index of a basic local sentence, `+inf` when unsatisfiable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Index {
    Finite(usize),
    Infinite,
}

impl Index {
    pub fn finite(self) -> Option<usize> {
        match self {
            Index::Finite(k) => Some(k),
            Index::Infinite => None,
        }
    }
}

impl fmt::Display for Index {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Index::Finite(k) => write!(f, "{k}"),
            Index::Infinite => f.write_str("INFINITY"),
        }
    }
}

/// `k(L)` together with the per-formula minimum plus counts it came from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexReport {
    pub index: Index,
    /// `min_j k_{i,j}` for each `psi_i`; `None` when `psi_i` is unsatisfiable.
    pub min_plus_counts: Vec<Option<usize>>,
    pub description_counts: Vec<usize>,
}

/// `k(L) = max_i min_j k_{i,j}` over the decompositions of each `psi_i`.
pub fn index_report(sentence: &BasicLocalSentence, lattice: &Lattice, cap: usize) -> Result<IndexReport> {
    let mut min_plus_counts = Vec::with_capacity(sentence.witnesses());
    let mut description_counts = Vec::with_capacity(sentence.witnesses());
    for psi in sentence.psis() {
        let descriptions = decompose(psi, lattice, cap)?;
        description_counts.push(descriptions.len());
        min_plus_counts.push(descriptions.iter().map(|d| d.plus_count()).min());
    }
    let index = if min_plus_counts.iter().any(Option::is_none) {
        Index::Infinite
    } else {
        Index::Finite(min_plus_counts.iter().flatten().copied().max().unwrap_or(0))
    };
    Ok(IndexReport {
        index,
        min_plus_counts,
        description_counts,
    })
}

pub fn index(sentence: &BasicLocalSentence, lattice: &Lattice, cap: usize) -> Result<Index> {
    index_report(sentence, lattice, cap).map(|r| r.index)
}

/// Radius `R = m(rho*r + 1)` of the ball that hosts `m` disjoint `r`-balls.
pub fn embedding_radius(m: usize, radius: usize, lattice: &Lattice) -> usize {
    m * (lattice.rho() * radius + 1)
}

/// Centers `c_i = (-R + rho*r + 1 + 2(i-1)(rho*r + 1)) e_1` of the embedded balls.
pub fn embedding_centers(m: usize, radius: usize, lattice: &Lattice) -> Vec<Vec<i64>> {
    let step = (lattice.rho() * radius + 1) as i64;
    let big = embedding_radius(m, radius, lattice) as i64;
    (0..m as i64)
        .map(|i| {
            let mut c = vec![0i64; lattice.d()];
            c[0] = -big + step + 2 * i * step;
            c
        })
        .collect()
}

/// Single description `D~(0)` of `B(0, R)` carrying `D_1..D_m` on disjoint
/// sub-balls along the first axis, with every other cell black.
///
/// Any configuration matching `D~` at `x` satisfies the pattern sentence
/// with witnesses `x + c_i`.
pub fn embed_pattern(
    descriptions: &[CompleteDescription],
    m: usize,
    torus: &TorusGraph,
) -> Result<CompleteDescription> {
    if m == 0 || descriptions.len() != m {
        return Err(Error::Infeasible(format!(
            "embedding needs exactly m = {m} descriptions, got {}",
            descriptions.len()
        )));
    }
    let radius = descriptions[0].radius();
    if descriptions.iter().any(|d| d.radius() != radius) {
        return Err(Error::MixedRadii);
    }
    let lattice = torus.params().lattice();
    let small = lattice.ball(radius);
    if descriptions.iter().any(|d| d.local().beta() != small.beta()) {
        return Err(Error::Infeasible(
            "description size does not match the ball template".into(),
        ));
    }
    let big_radius = embedding_radius(m, radius, &lattice);
    let big = torus.ball_template(big_radius)?;

    let mut colors = vec![true; big.beta()];
    let mut used = vec![false; big.beta()];
    for (center, desc) in embedding_centers(m, radius, &lattice).iter().zip(descriptions) {
        for (offset, &color) in small.offsets().iter().zip(desc.local().colors()) {
            let target: Vec<i64> = center.iter().zip(offset).map(|(a, b)| a + b).collect();
            let slot = big.position(&target).ok_or_else(|| {
                Error::Infeasible(format!("sub-ball cell {target:?} falls outside B(0,{big_radius})"))
            })?;
            if used[slot] {
                return Err(Error::Infeasible("embedded balls overlap".into()));
            }
            used[slot] = true;
            colors[slot] = color;
        }
    }
    Ok(CompleteDescription::new(LocalConfiguration::new(big_radius, colors)))
}

/// Whether all pairwise graph distances among `xs` exceed `2r`.
pub fn distance_constraint_holds(torus: &TorusGraph, xs: &[usize], radius: usize) -> Result<bool> {
    for (i, &x) in xs.iter().enumerate() {
        for &y in &xs[i + 1..] {
            if torus.distance(x, y)? <= 2 * radius {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
