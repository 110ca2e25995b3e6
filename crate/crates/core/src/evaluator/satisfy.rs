//! Model checking of sentences on a single configuration.

use std::collections::HashMap;

use crate::configuration::{BallIndex, Configuration};
use crate::error::Result;
use crate::sentence::{satisfying_keys, CompiledFormula, Sentence};
use crate::torus::TorusGraph;

enum Matcher {
    /// Bitset over ball keys.
    Table(Vec<u64>),
    /// Direct evaluation, for balls too large to enumerate.
    Formula(CompiledFormula),
}

impl Matcher {
    #[inline]
    fn accepts_key(&self, key: u64) -> bool {
        match self {
            Matcher::Table(bits) => (bits[(key >> 6) as usize] >> (key & 63)) & 1 == 1,
            Matcher::Formula(f) => f.eval_key(key),
        }
    }
}

struct Leaf {
    radius: usize,
    index_slot: usize,
    /// One matcher slot per witness; equal slots mean identical formulas.
    matchers: Vec<usize>,
}

/// A sentence prepared for repeated evaluation on one torus.
///
/// Each formula is decomposed into its complete descriptions once, as a
/// lookup table over ball colorings; evaluating a leaf then marks the
/// vertices whose ball coloring is in the table and searches for a
/// scattered choice of witnesses.
pub struct CompiledSentence<'a> {
    torus: &'a TorusGraph,
    sentence: Sentence,
    indices: Vec<BallIndex>,
    matchers: Vec<(usize, Matcher)>,
    leaves: Vec<Leaf>,
}

impl<'a> CompiledSentence<'a> {
    pub fn new(torus: &'a TorusGraph, sentence: &Sentence, cap: usize) -> Result<Self> {
        let mut indices: Vec<BallIndex> = Vec::new();
        let mut slot_of_radius: HashMap<usize, usize> = HashMap::new();
        let mut matchers: Vec<(usize, Matcher)> = Vec::new();
        let mut seen: HashMap<(usize, String), usize> = HashMap::new();
        let mut leaves = Vec::new();
        for leaf in sentence.leaves() {
            let radius = leaf.radius();
            let index_slot = match slot_of_radius.get(&radius) {
                Some(&s) => s,
                None => {
                    indices.push(BallIndex::for_radius(torus, radius)?);
                    slot_of_radius.insert(radius, indices.len() - 1);
                    indices.len() - 1
                }
            };
            let template = indices[index_slot].template().clone();
            let mut slots = Vec::new();
            for psi in leaf.psis() {
                let key = (radius, psi.formula().to_string());
                let slot = match seen.get(&key) {
                    Some(&s) => s,
                    None => {
                        let matcher = if template.beta() <= cap && template.beta() < 64 {
                            let mut bits = vec![0u64; (1usize << template.beta()).div_ceil(64)];
                            for k in satisfying_keys(psi, &template, cap)? {
                                bits[(k >> 6) as usize] |= 1 << (k & 63);
                            }
                            Matcher::Table(bits)
                        } else {
                            Matcher::Formula(CompiledFormula::compile(psi.formula(), &template)?)
                        };
                        matchers.push((index_slot, matcher));
                        seen.insert(key, matchers.len() - 1);
                        matchers.len() - 1
                    }
                };
                slots.push(slot);
            }
            leaves.push(Leaf {
                radius,
                index_slot,
                matchers: slots,
            });
        }
        Ok(CompiledSentence {
            torus,
            sentence: sentence.clone(),
            indices,
            matchers,
            leaves,
        })
    }

    pub fn sentence(&self) -> &Sentence {
        &self.sentence
    }

    pub fn torus(&self) -> &TorusGraph {
        self.torus
    }

    fn accepts(&self, slot: usize, config: &Configuration, x: usize) -> bool {
        let (index_slot, matcher) = &self.matchers[slot];
        let index = &self.indices[*index_slot];
        match matcher {
            Matcher::Table(_) => matcher.accepts_key(index.key(config, x)),
            Matcher::Formula(f) => {
                let ball = index.ball(x);
                f.eval_by(&|i| config.is_plus(ball[i] as usize))
            }
        }
    }

    /// Vertices where witness formula `slot` holds.
    fn match_set(&self, slot: usize, config: &Configuration) -> Vec<usize> {
        (0..self.torus.sites())
            .filter(|&x| self.accepts(slot, config, x))
            .collect()
    }

    fn leaf_holds(&self, leaf: &Leaf, config: &Configuration) -> bool {
        debug_assert_eq!(self.indices[leaf.index_slot].radius(), leaf.radius);
        if leaf.matchers.len() == 1 {
            let slot = leaf.matchers[0];
            return (0..self.torus.sites()).any(|x| self.accepts(slot, config, x));
        }
        let mut sets: HashMap<usize, Vec<usize>> = HashMap::new();
        for &slot in &leaf.matchers {
            if let std::collections::hash_map::Entry::Vacant(e) = sets.entry(slot) {
                let set = self.match_set(slot, config);
                if set.is_empty() {
                    return false;
                }
                e.insert(set);
            }
        }
        let mut order: Vec<usize> = leaf.matchers.clone();
        order.sort_by_key(|s| (sets[s].len(), *s));
        let ordered: Vec<(usize, &[usize])> = order.iter().map(|s| (*s, sets[s].as_slice())).collect();
        let mut chosen = Vec::with_capacity(ordered.len());
        scattered(self.torus, &ordered, 2 * leaf.radius, &mut chosen)
    }

    /// Whether `config` satisfies the sentence.
    pub fn satisfies(&self, config: &Configuration) -> bool {
        debug_assert_eq!(config.params(), self.torus.params());
        self.sentence
            .eval_with(&mut |i| self.leaf_holds(&self.leaves[i], config))
    }
}

/// Backtracking search for one vertex per set, pairwise farther than `gap`.
///
/// Consecutive entries with the same slot hold the same set; their picks are
/// forced to increase so each unordered choice is explored once.
fn scattered(torus: &TorusGraph, sets: &[(usize, &[usize])], gap: usize, chosen: &mut Vec<usize>) -> bool {
    let level = chosen.len();
    if level == sets.len() {
        return true;
    }
    let (slot, candidates) = sets[level];
    let lower = match level.checked_sub(1) {
        Some(prev) if sets[prev].0 == slot => chosen[prev] + 1,
        _ => 0,
    };
    let start = candidates.partition_point(|&x| x < lower);
    for &x in &candidates[start..] {
        if chosen.iter().all(|&y| torus.distance_unchecked(x, y) > gap) {
            chosen.push(x);
            if scattered(torus, sets, gap, chosen) {
                return true;
            }
            chosen.pop();
        }
    }
    false
}

/// Whether `config` satisfies `sentence`. Compiles the sentence on every
/// call; use [`CompiledSentence`] in loops.
pub fn satisfies(
    torus: &TorusGraph,
    config: &Configuration,
    sentence: &Sentence,
    cap: usize,
) -> Result<bool> {
    Ok(CompiledSentence::new(torus, sentence, cap)?.satisfies(config))
}
