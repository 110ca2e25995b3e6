//! Slow, obviously-correct oracles shared by the integration tests.
#![allow(dead_code)]

use rand::Rng;
use zero_one::sentence::{BasicLocalSentence, Formula, Index};
use zero_one::{BallTemplate, Configuration, Lattice, Norm, Sentence, TorusGraph, TorusParams};

pub fn torus(d: usize, n: usize) -> TorusGraph {
    TorusGraph::new(TorusParams::new(d, n, Norm::Finite(1), 1).unwrap())
}

/// Formula value at `x`, reading colors through raw offsets.
pub fn holds_at(torus: &TorusGraph, config: &Configuration, formula: &Formula, x: usize) -> bool {
    formula.eval(&|offset: &[i64]| config.is_plus(torus.offset_vertex(x, offset)))
}

/// All ordered m-tuples of vertices.
pub fn naive_leaf(torus: &TorusGraph, config: &Configuration, leaf: &BasicLocalSentence) -> bool {
    let m = leaf.witnesses();
    let sites = torus.sites();
    let gap = 2 * leaf.radius();
    let mut tuple = vec![0usize; m];
    loop {
        let scattered = (0..m).all(|i| (0..i).all(|j| torus.distance(tuple[i], tuple[j]).unwrap() > gap));
        if scattered
            && leaf
                .psis()
                .iter()
                .zip(&tuple)
                .all(|(psi, &x)| holds_at(torus, config, psi.formula(), x))
        {
            return true;
        }
        let mut i = 0;
        loop {
            if i == m {
                return false;
            }
            tuple[i] += 1;
            if tuple[i] < sites {
                break;
            }
            tuple[i] = 0;
            i += 1;
        }
    }
}

pub fn naive_satisfies(torus: &TorusGraph, config: &Configuration, sentence: &Sentence) -> bool {
    let leaves = sentence.leaves();
    sentence.eval_with(&mut |i| naive_leaf(torus, config, leaves[i]))
}

/// `max_i min` plus count over every coloring of the ball satisfying `psi_i`.
pub fn brute_index(leaf: &BasicLocalSentence, lattice: &Lattice) -> Index {
    let template = lattice.ball(leaf.radius());
    let beta = template.beta();
    let mut worst = 0;
    for psi in leaf.psis() {
        let mut best: Option<usize> = None;
        for key in 0u64..(1 << beta) {
            let color = |offset: &[i64]| {
                let i = template.position(offset).unwrap();
                (key >> i) & 1 == 1
            };
            if psi.formula().eval(&color) {
                let k = key.count_ones() as usize;
                best = Some(best.map_or(k, |b| b.min(k)));
            }
        }
        match best {
            Some(k) => worst = worst.max(k),
            None => return Index::Infinite,
        }
    }
    Index::Finite(worst)
}

/// Random formula over the offsets of `template`.
pub fn random_formula(rng: &mut impl Rng, template: &BallTemplate, depth: usize) -> Formula {
    if depth == 0 || rng.random_bool(0.3) {
        let i = rng.random_range(0..template.beta());
        let atom = Formula::atom(template.offsets()[i].clone());
        return if rng.random_bool(0.4) { atom.not() } else { atom };
    }
    match rng.random_range(0..5) {
        0 => random_formula(rng, template, depth - 1).not(),
        1 | 2 => random_formula(rng, template, depth - 1).and(random_formula(rng, template, depth - 1)),
        _ => random_formula(rng, template, depth - 1).or(random_formula(rng, template, depth - 1)),
    }
}

/// The same sentence with every color flipped.
pub fn flip_colors(text: &str) -> String {
    text.replace("C(", "!C(")
}
