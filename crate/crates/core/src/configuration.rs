//! Spin configurations `eta: V_n -> {-1, +1}` and ball-local views of them.
//!
//! Bit 1 means spin `+1` (a black vertex), bit 0 means `-1` (white).

use std::fmt;

use crate::error::{Error, Result};
use crate::torus::{BallTemplate, Norm, SubLattice, TorusGraph, TorusParams};

/// A bit-packed spin assignment on every vertex of a torus.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Configuration {
    params: TorusParams,
    words: Vec<u64>,
}

impl Configuration {
    pub fn all_minus(params: TorusParams) -> Self {
        let words = vec![0u64; params.sites().div_ceil(64)];
        Configuration { params, words }
    }

    pub fn all_plus(params: TorusParams) -> Self {
        Self::from_fn(params, |_| true)
    }

    pub fn from_fn(params: TorusParams, mut plus: impl FnMut(usize) -> bool) -> Self {
        let mut c = Self::all_minus(params);
        for x in 0..params.sites() {
            if plus(x) {
                c.set(x, true);
            }
        }
        c
    }

    /// Configuration whose bit `x` is bit `x` of `mask` (tori with at most 64 sites).
    pub fn from_mask(params: TorusParams, mask: u64) -> Self {
        let sites = params.sites();
        assert!(sites <= 64, "mask encoding needs at most 64 sites");
        let used = if sites == 64 { u64::MAX } else { (1u64 << sites) - 1 };
        Configuration {
            params,
            words: vec![mask & used],
        }
    }

    /// Inverse of [`Configuration::from_mask`].
    pub fn to_mask(&self) -> Option<u64> {
        (self.params.sites() <= 64).then(|| self.words[0])
    }

    pub fn params(&self) -> TorusParams {
        self.params
    }

    pub fn sites(&self) -> usize {
        self.params.sites()
    }

    #[inline]
    pub fn is_plus(&self, x: usize) -> bool {
        (self.words[x >> 6] >> (x & 63)) & 1 == 1
    }

    /// `+1` or `-1`.
    #[inline]
    pub fn spin(&self, x: usize) -> i32 {
        if self.is_plus(x) {
            1
        } else {
            -1
        }
    }

    #[inline]
    pub fn set(&mut self, x: usize, plus: bool) {
        let bit = 1u64 << (x & 63);
        if plus {
            self.words[x >> 6] |= bit;
        } else {
            self.words[x >> 6] &= !bit;
        }
    }

    pub fn plus_count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Every spin negated.
    pub fn flipped(&self) -> Self {
        Self::from_fn(self.params, |x| !self.is_plus(x))
    }

    /// The configuration `eta'` with `eta'(x + t) = eta(x)`.
    pub fn shifted(&self, torus: &TorusGraph, t: usize) -> Self {
        let mut out = Self::all_minus(self.params);
        for x in 0..self.sites() {
            if self.is_plus(x) {
                out.set(torus.add(x, t), true);
            }
        }
        out
    }

    /// Textual dump: a header line `d n p rho`, then one row of `+`/`-` per
    /// line of `n` consecutive row-major sites.
    pub fn to_dump(&self) -> String {
        let n = self.params.n();
        let mut out = format!("{}\n", self.params);
        for row in 0..self.sites() / n {
            for x in row * n..(row + 1) * n {
                out.push(if self.is_plus(x) { '+' } else { '-' });
            }
            out.push('\n');
        }
        out
    }

    /// Parses [`Configuration::to_dump`] output. Lines starting with `#` and
    /// all whitespace in the body are ignored.
    pub fn from_dump(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines
            .next()
            .ok_or_else(|| Error::Dump("missing header line".into()))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(Error::Dump(format!(
                "header must be `d n p rho`, got {header:?}"
            )));
        }
        let int = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| Error::Dump(format!("bad integer {s:?} in header")))
        };
        let params = TorusParams::new(
            int(fields[0])?,
            int(fields[1])?,
            fields[2].parse::<Norm>()?,
            int(fields[3])?,
        )?;
        let mut config = Self::all_minus(params);
        let mut x = 0;
        for ch in lines.flat_map(str::chars).filter(|c| !c.is_whitespace()) {
            let plus = match ch {
                '+' => true,
                '-' => false,
                other => return Err(Error::Dump(format!("unexpected character {other:?}"))),
            };
            if x >= params.sites() {
                return Err(Error::Dump("more spins than sites".into()));
            }
            config.set(x, plus);
            x += 1;
        }
        if x != params.sites() {
            return Err(Error::Dump(format!(
                "expected {} spins, found {x}",
                params.sites()
            )));
        }
        Ok(config)
    }
}

/// The colors of one ball, in the template's canonical offset order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LocalConfiguration {
    radius: usize,
    colors: Vec<bool>,
}

impl LocalConfiguration {
    pub fn new(radius: usize, colors: Vec<bool>) -> Self {
        LocalConfiguration { radius, colors }
    }

    /// Colors from a key whose bit `i` is the color of offset `i`.
    pub fn from_key(radius: usize, beta: usize, key: u64) -> Self {
        let colors = (0..beta).map(|i| (key >> i) & 1 == 1).collect();
        LocalConfiguration { radius, colors }
    }

    /// Parses a string of `+`/`-` characters.
    pub fn from_signs(radius: usize, signs: &str) -> Result<Self> {
        let colors = signs
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| match c {
                '+' => Ok(true),
                '-' => Ok(false),
                other => Err(Error::Config(format!("bad color {other:?} in description"))),
            })
            .collect::<Result<_>>()?;
        Ok(LocalConfiguration { radius, colors })
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn beta(&self) -> usize {
        self.colors.len()
    }

    pub fn colors(&self) -> &[bool] {
        &self.colors
    }

    pub fn plus_count(&self) -> usize {
        self.colors.iter().filter(|&&c| c).count()
    }

    /// Bit-packed colors; `None` past 64 cells.
    pub fn key(&self) -> Option<u64> {
        (self.colors.len() <= 64).then(|| {
            self.colors
                .iter()
                .enumerate()
                .fold(0u64, |k, (i, &c)| k | ((c as u64) << i))
        })
    }
}

impl fmt::Display for LocalConfiguration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &c in &self.colors {
            f.write_str(if c { "+" } else { "-" })?;
        }
        Ok(())
    }
}

/// Precomputed vertex lists of every translated ball `B(x, r)`.
///
/// Built once per (template, torus); row `x` holds the vertices of
/// `B(x, r)` in canonical offset order.
#[derive(Clone, Debug)]
pub struct BallIndex {
    template: BallTemplate,
    table: Vec<u32>,
}

impl BallIndex {
    pub fn new(torus: &TorusGraph, template: &BallTemplate) -> Result<Self> {
        if template.lattice() != torus.params().lattice() {
            return Err(Error::InvalidParams(
                "ball template built for a different lattice".into(),
            ));
        }
        if !torus.params().ball_fits(template.radius()) {
            return Err(Error::SelfOverlappingBall {
                radius: template.radius(),
                n: torus.params().n(),
                rho: torus.params().rho(),
            });
        }
        let mut table = Vec::with_capacity(torus.sites() * template.beta());
        for x in 0..torus.sites() {
            table.extend(
                template
                    .offsets()
                    .iter()
                    .map(|o| torus.offset_vertex(x, o) as u32),
            );
        }
        Ok(BallIndex {
            template: template.clone(),
            table,
        })
    }

    /// Convenience constructor from a radius.
    pub fn for_radius(torus: &TorusGraph, radius: usize) -> Result<Self> {
        Self::new(torus, &torus.ball_template(radius)?)
    }

    pub fn template(&self) -> &BallTemplate {
        &self.template
    }

    pub fn radius(&self) -> usize {
        self.template.radius()
    }

    pub fn beta(&self) -> usize {
        self.template.beta()
    }

    /// Vertices of `B(x, r)`.
    #[inline]
    pub fn ball(&self, x: usize) -> &[u32] {
        let beta = self.beta();
        &self.table[x * beta..(x + 1) * beta]
    }

    /// Bit-packed colors of `B(x, r)`; requires `beta <= 64`.
    #[inline]
    pub fn key(&self, config: &Configuration, x: usize) -> u64 {
        self.ball(x)
            .iter()
            .enumerate()
            .fold(0u64, |k, (i, &v)| k | ((config.is_plus(v as usize) as u64) << i))
    }
}

/// The restriction `eta_{B(x,r)}`.
pub fn restrict(config: &Configuration, x: usize, index: &BallIndex) -> LocalConfiguration {
    let colors = index
        .ball(x)
        .iter()
        .map(|&v| config.is_plus(v as usize))
        .collect();
    LocalConfiguration::new(index.radius(), colors)
}

/// Indicator `I_x^D(eta)`: whether the ball around `x` carries `local`.
pub fn match_at(
    config: &Configuration,
    x: usize,
    index: &BallIndex,
    local: &LocalConfiguration,
) -> bool {
    local.beta() == index.beta()
        && index
            .ball(x)
            .iter()
            .zip(local.colors())
            .all(|(&v, &c)| config.is_plus(v as usize) == c)
}

/// `X_n^D`: number of vertices whose ball carries `local`.
pub fn count_matches(config: &Configuration, index: &BallIndex, local: &LocalConfiguration) -> usize {
    match local.key() {
        Some(key) if local.beta() == index.beta() => (0..config.sites())
            .filter(|&x| index.key(config, x) == key)
            .count(),
        _ => (0..config.sites())
            .filter(|&x| match_at(config, x, index, local))
            .count(),
    }
}

/// The sub-lattice count: matches restricted to the centers of `sub`.
pub fn count_matches_on(
    config: &Configuration,
    index: &BallIndex,
    local: &LocalConfiguration,
    sub: &SubLattice,
) -> usize {
    sub.centers
        .iter()
        .filter(|&&x| match_at(config, x, index, local))
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle(n: usize) -> TorusGraph {
        TorusGraph::new(TorusParams::new(1, n, Norm::Finite(1), 1).unwrap())
    }

    #[test]
    fn all_black_restriction() {
        let t = TorusGraph::new(TorusParams::new(2, 5, Norm::Finite(1), 1).unwrap());
        let idx = BallIndex::for_radius(&t, 1).unwrap();
        let c = Configuration::all_plus(t.params());
        let local = restrict(&c, 7, &idx);
        assert_eq!(local.plus_count(), idx.beta());
        assert_eq!(count_matches(&c, &idx, &local), 25);
    }

    #[test]
    fn restriction_on_cycle() {
        let t = cycle(5);
        let idx = BallIndex::for_radius(&t, 1).unwrap();
        let c = Configuration::from_fn(t.params(), |x| x == 0 || x == 2);
        let local = restrict(&c, 1, &idx);
        assert_eq!(local.colors(), &[true, false, true]);
        assert!(match_at(&c, 1, &idx, &local));
    }

    #[test]
    fn single_black_matches_once() {
        let t = cycle(5);
        let idx = BallIndex::for_radius(&t, 1).unwrap();
        let c = Configuration::from_fn(t.params(), |x| x == 0);
        let local = LocalConfiguration::new(1, vec![false, true, false]);
        let hits: Vec<usize> = (0..5).filter(|&x| match_at(&c, x, &idx, &local)).collect();
        assert_eq!(hits, vec![0]);
    }

    #[test]
    fn all_white_matches() {
        let t = cycle(6);
        let idx = BallIndex::for_radius(&t, 1).unwrap();
        let c = Configuration::all_minus(t.params());
        let white = LocalConfiguration::new(1, vec![false; 3]);
        let one = LocalConfiguration::new(1, vec![false, true, false]);
        assert_eq!(count_matches(&c, &idx, &white), 6);
        assert_eq!(count_matches(&c, &idx, &one), 0);
    }

    #[test]
    fn stripes_count() {
        let t = cycle(6);
        let idx = BallIndex::for_radius(&t, 0).unwrap();
        let c = Configuration::from_fn(t.params(), |x| x % 2 == 0);
        let black = LocalConfiguration::new(0, vec![true]);
        let white = LocalConfiguration::new(0, vec![false]);
        assert_eq!(count_matches(&c, &idx, &black), 3);
        assert_eq!(
            count_matches(&c, &idx, &black) + count_matches(&c, &idx, &white),
            6
        );
    }

    #[test]
    fn sub_lattice_count_bounded_by_full_count() {
        let t = cycle(9);
        let idx = BallIndex::for_radius(&t, 0).unwrap();
        let sub = t.sub_lattice(1).unwrap();
        let c = Configuration::all_plus(t.params());
        let black = LocalConfiguration::new(0, vec![true]);
        assert_eq!(count_matches_on(&c, &idx, &black, &sub), 3);
        assert_eq!(count_matches(&c, &idx, &black), 9);
    }

    #[test]
    fn dump_round_trip_and_errors() {
        let t = TorusGraph::new(TorusParams::new(2, 3, Norm::Infinity, 1).unwrap());
        let c = Configuration::from_fn(t.params(), |x| x % 4 == 1);
        let text = c.to_dump();
        assert_eq!(text, "2 3 inf 1\n-+-\n--+\n---\n");
        assert_eq!(Configuration::from_dump(&text).unwrap(), c);
        assert!(Configuration::from_dump("1 3 1 1\n++").is_err());
        assert!(Configuration::from_dump("1 3 1 1\n++x").is_err());
        assert!(Configuration::from_dump("").is_err());
    }

    #[test]
    fn mask_round_trip() {
        let p = TorusParams::new(1, 5, Norm::Finite(1), 1).unwrap();
        let c = Configuration::from_mask(p, 0b10110);
        assert_eq!(c.to_mask(), Some(0b10110));
        assert!(c.is_plus(1) && !c.is_plus(0));
        assert_eq!(c.flipped().to_mask(), Some(0b01001));
    }
}
