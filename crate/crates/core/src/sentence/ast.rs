use std::fmt;

use crate::error::{Error, Result};
use crate::torus::{BallTemplate, Lattice};

/// Quantifier-free formula over ball offsets. `Atom(o)` asserts that the
/// vertex at offset `o` from the free variable is black.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    Atom(Vec<i64>),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn atom(offset: impl Into<Vec<i64>>) -> Self {
        Formula::Atom(offset.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Self {
        Formula::Not(Box::new(self))
    }

    pub fn and(self, other: Formula) -> Self {
        Formula::And(Box::new(self), Box::new(other))
    }

    pub fn or(self, other: Formula) -> Self {
        Formula::Or(Box::new(self), Box::new(other))
    }

    /// Left-nested conjunction; `None` for an empty iterator.
    pub fn conjunction(parts: impl IntoIterator<Item = Formula>) -> Option<Self> {
        parts.into_iter().reduce(Formula::and)
    }

    /// Evaluates the formula given the color of each offset.
    pub fn eval(&self, color: &impl Fn(&[i64]) -> bool) -> bool {
        match self {
            Formula::Atom(o) => color(o),
            Formula::Not(f) => !f.eval(color),
            Formula::And(a, b) => a.eval(color) && b.eval(color),
            Formula::Or(a, b) => a.eval(color) || b.eval(color),
        }
    }

    pub fn atoms(&self) -> Vec<&[i64]> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<&'a [i64]>) {
        match self {
            Formula::Atom(o) => out.push(o),
            Formula::Not(f) => f.collect_atoms(out),
            Formula::And(a, b) | Formula::Or(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Formula::Or(..) => 1,
            Formula::And(..) => 2,
            Formula::Not(_) | Formula::Atom(_) => 3,
        }
    }

    fn write_at(&self, f: &mut fmt::Formatter<'_>, min_prec: u8) -> fmt::Result {
        let parens = self.precedence() < min_prec;
        if parens {
            f.write_str("(")?;
        }
        match self {
            Formula::Atom(o) => {
                f.write_str("C(")?;
                for (i, c) in o.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{c}")?;
                }
                f.write_str(")")?;
            }
            Formula::Not(inner) => {
                f.write_str("!")?;
                inner.write_at(f, 3)?;
            }
            Formula::And(a, b) => {
                a.write_at(f, 2)?;
                f.write_str(" & ")?;
                b.write_at(f, 3)?;
            }
            Formula::Or(a, b) => {
                a.write_at(f, 1)?;
                f.write_str(" | ")?;
                b.write_at(f, 2)?;
            }
        }
        if parens {
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_at(f, 0)
    }
}

/// A formula `psi(x)` whose atoms all lie in `B(x, r)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LocalFormula {
    radius: usize,
    formula: Formula,
}

impl LocalFormula {
    /// Checks every atom against the ball template of `lattice`.
    pub fn new(radius: usize, formula: Formula, lattice: &Lattice) -> Result<Self> {
        let template = lattice.ball(radius);
        Self::with_template(formula, &template)
    }

    pub fn with_template(formula: Formula, template: &BallTemplate) -> Result<Self> {
        let d = template.lattice().d();
        for atom in formula.atoms() {
            if atom.len() != d {
                return Err(Error::OffsetArity {
                    offset: atom.to_vec(),
                    found: atom.len(),
                    expected: d,
                });
            }
            if !template.contains(atom) {
                return Err(Error::OffsetOutsideBall {
                    offset: atom.to_vec(),
                    radius: template.radius(),
                });
            }
        }
        Ok(LocalFormula {
            radius: template.radius(),
            formula,
        })
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn formula(&self) -> &Formula {
        &self.formula
    }
}

/// `exists x_1..x_m` pairwise farther than `2r` apart with `psi_i(x_i)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BasicLocalSentence {
    radius: usize,
    psis: Vec<LocalFormula>,
}

impl BasicLocalSentence {
    pub fn new(radius: usize, psis: Vec<LocalFormula>) -> Result<Self> {
        if psis.is_empty() {
            return Err(Error::BodyCount {
                declared: 0,
                found: 0,
            });
        }
        if psis.iter().any(|p| p.radius() != radius) {
            return Err(Error::MixedRadii);
        }
        Ok(BasicLocalSentence { radius, psis })
    }

    /// Number of witnesses `m`.
    pub fn witnesses(&self) -> usize {
        self.psis.len()
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn psis(&self) -> &[LocalFormula] {
        &self.psis
    }
}

impl fmt::Display for BasicLocalSentence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "EXIST {} BALL r={}", self.witnesses(), self.radius)?;
        for psi in &self.psis {
            write!(f, " {{ {} }}", psi.formula())?;
        }
        Ok(())
    }
}

/// Boolean combination of basic local sentences.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Sentence {
    Basic(BasicLocalSentence),
    Not(Box<Sentence>),
    And(Box<Sentence>, Box<Sentence>),
    Or(Box<Sentence>, Box<Sentence>),
}

impl Sentence {
    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Self {
        Sentence::Not(Box::new(self))
    }

    pub fn and(self, other: Sentence) -> Self {
        Sentence::And(Box::new(self), Box::new(other))
    }

    pub fn or(self, other: Sentence) -> Self {
        Sentence::Or(Box::new(self), Box::new(other))
    }

    /// Leaves in left-to-right order.
    pub fn leaves(&self) -> Vec<&BasicLocalSentence> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a BasicLocalSentence>) {
        match self {
            Sentence::Basic(b) => out.push(b),
            Sentence::Not(s) => s.collect_leaves(out),
            Sentence::And(a, b) | Sentence::Or(a, b) => {
                a.collect_leaves(out);
                b.collect_leaves(out);
            }
        }
    }

    pub fn max_radius(&self) -> usize {
        self.leaves().iter().map(|l| l.radius()).max().unwrap_or(0)
    }

    /// Evaluates the boolean structure given a truth value per leaf, in
    /// [`Sentence::leaves`] order.
    pub fn eval_with(&self, leaf: &mut impl FnMut(usize) -> bool) -> bool {
        let mut next = 0;
        self.eval_inner(leaf, &mut next)
    }

    fn eval_inner(&self, leaf: &mut impl FnMut(usize) -> bool, next: &mut usize) -> bool {
        match self {
            Sentence::Basic(_) => {
                let i = *next;
                *next += 1;
                leaf(i)
            }
            Sentence::Not(s) => !s.eval_inner(leaf, next),
            // Both sides are always visited so leaf numbering stays positional.
            Sentence::And(a, b) => {
                let x = a.eval_inner(leaf, next);
                let y = b.eval_inner(leaf, next);
                x && y
            }
            Sentence::Or(a, b) => {
                let x = a.eval_inner(leaf, next);
                let y = b.eval_inner(leaf, next);
                x || y
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Sentence::Or(..) => 1,
            Sentence::And(..) => 2,
            Sentence::Not(_) | Sentence::Basic(_) => 3,
        }
    }

    fn write_at(&self, f: &mut fmt::Formatter<'_>, min_prec: u8) -> fmt::Result {
        let parens = self.precedence() < min_prec;
        if parens {
            f.write_str("(")?;
        }
        match self {
            Sentence::Basic(b) => write!(f, "{b}")?,
            Sentence::Not(s) => {
                f.write_str("!")?;
                s.write_at(f, 3)?;
            }
            Sentence::And(a, b) => {
                a.write_at(f, 2)?;
                f.write_str(" && ")?;
                b.write_at(f, 3)?;
            }
            Sentence::Or(a, b) => {
                a.write_at(f, 1)?;
                f.write_str(" || ")?;
                b.write_at(f, 2)?;
            }
        }
        if parens {
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Sentence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_at(f, 0)
    }
}

impl From<BasicLocalSentence> for Sentence {
    fn from(b: BasicLocalSentence) -> Self {
        Sentence::Basic(b)
    }
}
