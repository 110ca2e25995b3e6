//! Geometry of the lattice torus `V_n = {0..n-1}^d`.
//!
//! Two vertices are adjacent when the componentwise difference, reduced
//! modulo `n` to its minimal representative, has `L_p` norm at most `rho`.
//! Vertices are stored as row-major indices; coordinates are a view.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// The `L_p` norm selecting the neighborhood shape.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Norm {
    Finite(u32),
    Infinity,
}

impl fmt::Display for Norm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Norm::Finite(p) => write!(f, "{p}"),
            Norm::Infinity => f.write_str("inf"),
        }
    }
}

impl FromStr for Norm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "inf" | "Inf" | "INF" | "infinity" | "∞" => Ok(Norm::Infinity),
            _ => match s.parse::<u32>() {
                Ok(p) if p >= 1 => Ok(Norm::Finite(p)),
                _ => Err(Error::InvalidParams(format!(
                    "norm must be a positive integer or \"inf\", got {s:?}"
                ))),
            },
        }
    }
}

impl Serialize for Norm {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Norm::Finite(p) => serializer.serialize_u32(*p),
            Norm::Infinity => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Norm {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Float(f64),
            Text(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Int(p) if p >= 1 && p <= u32::MAX as i64 => Ok(Norm::Finite(p as u32)),
            Raw::Float(x) if x.is_infinite() && x > 0.0 => Ok(Norm::Infinity),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
            _ => Err(serde::de::Error::custom(
                "norm must be a positive integer or \"inf\"",
            )),
        }
    }
}

/// Dimension, norm and radius: everything about the neighborhood that does
/// not depend on the side length.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Lattice {
    d: usize,
    norm: Norm,
    rho: usize,
}

impl Lattice {
    pub fn new(d: usize, norm: Norm, rho: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidParams("dimension d must be >= 1".into()));
        }
        if rho == 0 {
            return Err(Error::InvalidParams("radius rho must be >= 1".into()));
        }
        if let Norm::Finite(p) = norm {
            if p == 0 {
                return Err(Error::InvalidParams("norm p must be >= 1".into()));
            }
            // Norm tests are done exactly in u128; make sure they cannot overflow.
            let fits = (rho as u128)
                .checked_pow(p)
                .and_then(|v| v.checked_mul(d as u128));
            if fits.is_none() {
                return Err(Error::InvalidParams(format!(
                    "rho^p * d overflows exact arithmetic (rho={rho}, p={p}, d={d})"
                )));
            }
        }
        Ok(Lattice { d, norm, rho })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn norm(&self) -> Norm {
        self.norm
    }

    pub fn rho(&self) -> usize {
        self.rho
    }

    /// Whether `||offset||_p <= rho`, computed in exact integer arithmetic.
    pub fn within_step(&self, offset: &[i64]) -> bool {
        let rho = self.rho as u64;
        if offset.iter().any(|c| c.unsigned_abs() > rho) {
            return false;
        }
        match self.norm {
            Norm::Infinity => true,
            Norm::Finite(p) => {
                let bound = (rho as u128).pow(p);
                let mut sum = 0u128;
                for c in offset {
                    sum += (c.unsigned_abs() as u128).pow(p);
                    if sum > bound {
                        return false;
                    }
                }
                true
            }
        }
    }

    /// Nonzero offsets of one edge, in lexicographic order.
    pub fn step_offsets(&self) -> Vec<Vec<i64>> {
        let rho = self.rho as i64;
        box_offsets(self.d, rho)
            .filter(|o| o.iter().any(|&c| c != 0) && self.within_step(o))
            .collect()
    }

    /// The ball `B(0, r)` of `Z^d` under this neighborhood, grown breadth first.
    ///
    /// On a torus with `n > 2*rho*r` the torus ball is an isomorphic copy.
    pub fn ball(&self, radius: usize) -> BallTemplate {
        let steps = self.step_offsets();
        let origin = vec![0i64; self.d];
        let mut dist: HashMap<Vec<i64>, u32> = HashMap::new();
        dist.insert(origin.clone(), 0);
        let mut frontier = vec![origin];
        for level in 1..=radius {
            let mut next = Vec::new();
            for o in &frontier {
                for s in &steps {
                    let q: Vec<i64> = o.iter().zip(s).map(|(a, b)| a + b).collect();
                    if !dist.contains_key(&q) {
                        dist.insert(q.clone(), level as u32);
                        next.push(q);
                    }
                }
            }
            frontier = next;
        }
        let mut entries: Vec<(Vec<i64>, u32)> = dist.into_iter().collect();
        entries.sort();
        let (offsets, distances) = entries.into_iter().unzip();
        BallTemplate {
            lattice: *self,
            radius,
            offsets,
            distances,
        }
    }
}

fn box_offsets(d: usize, half_width: i64) -> impl Iterator<Item = Vec<i64>> {
    let width = (2 * half_width + 1) as usize;
    let total = width.pow(d as u32);
    (0..total).map(move |mut k| {
        let mut o = vec![0i64; d];
        for slot in o.iter_mut().rev() {
            *slot = (k % width) as i64 - half_width;
            k /= width;
        }
        o
    })
}

/// Dimension, side length, norm and neighborhood radius of a lattice torus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawTorusParams", into = "RawTorusParams")]
pub struct TorusParams {
    lattice: Lattice,
    n: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTorusParams {
    d: usize,
    n: usize,
    p: Norm,
    rho: usize,
}

impl TryFrom<RawTorusParams> for TorusParams {
    type Error = Error;

    fn try_from(raw: RawTorusParams) -> Result<Self> {
        TorusParams::new(raw.d, raw.n, raw.p, raw.rho)
    }
}

impl From<TorusParams> for RawTorusParams {
    fn from(p: TorusParams) -> Self {
        RawTorusParams {
            d: p.d(),
            n: p.n,
            p: p.norm(),
            rho: p.rho(),
        }
    }
}

impl TorusParams {
    pub fn new(d: usize, n: usize, norm: Norm, rho: usize) -> Result<Self> {
        let lattice = Lattice::new(d, norm, rho)?;
        Self::from_lattice(lattice, n)
    }

    pub fn from_lattice(lattice: Lattice, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParams("side length n must be >= 2".into()));
        }
        match n.checked_pow(lattice.d as u32) {
            Some(s) if s <= u32::MAX as usize => {}
            _ => {
                return Err(Error::InvalidParams(format!(
                    "torus with n={n}, d={} has too many sites",
                    lattice.d
                )))
            }
        }
        Ok(TorusParams { lattice, n })
    }

    pub fn lattice(&self) -> Lattice {
        self.lattice
    }

    pub fn d(&self) -> usize {
        self.lattice.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn norm(&self) -> Norm {
        self.lattice.norm
    }

    pub fn rho(&self) -> usize {
        self.lattice.rho
    }

    /// `n^d`.
    pub fn sites(&self) -> usize {
        self.n.pow(self.d() as u32)
    }

    /// Whether balls of radius `r` are isomorphic to their `Z^d` template.
    pub fn ball_fits(&self, radius: usize) -> bool {
        self.n > 2 * self.rho() * radius
    }

    /// Plain-text form with keys `d`, `n`, `p`, `rho`; `p = "inf"` for the sup norm.
    pub fn to_config_string(&self) -> String {
        toml::to_string(self).expect("torus params always serialize")
    }

    pub fn from_config_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }
}

impl fmt::Display for TorusParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} {}", self.d(), self.n, self.norm(), self.rho())
    }
}

/// The ball `B(0, r)` as a canonically ordered list of offsets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BallTemplate {
    lattice: Lattice,
    radius: usize,
    offsets: Vec<Vec<i64>>,
    distances: Vec<u32>,
}

impl BallTemplate {
    pub fn lattice(&self) -> Lattice {
        self.lattice
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    /// Lexicographically ordered offsets.
    pub fn offsets(&self) -> &[Vec<i64>] {
        &self.offsets
    }

    /// Graph distance from the origin of each offset.
    pub fn distances(&self) -> &[u32] {
        &self.distances
    }

    /// Cardinality `beta(r)`.
    pub fn beta(&self) -> usize {
        self.offsets.len()
    }

    /// Position of `offset` in canonical order, if it lies in the ball.
    pub fn position(&self, offset: &[i64]) -> Option<usize> {
        self.offsets
            .binary_search_by(|o| o.as_slice().cmp(offset))
            .ok()
    }

    pub fn contains(&self, offset: &[i64]) -> bool {
        self.position(offset).is_some()
    }
}

/// The regular sub-lattice of centers spaced `2R + 1` apart.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubLattice {
    pub spacing: usize,
    pub centers: Vec<usize>,
    pub tau: usize,
}

/// A lattice torus with precomputed adjacency and distance tables.
///
/// Immutable after construction apart from a lazily filled BFS table, so
/// it can be shared freely between worker threads.
#[derive(Debug)]
pub struct TorusGraph {
    params: TorusParams,
    sites: usize,
    strides: Vec<usize>,
    degree: usize,
    neighbors: Vec<u32>,
    cached_radius: usize,
    ball_dist: Vec<u32>,
    bfs_dist: OnceLock<Vec<u32>>,
}

impl TorusGraph {
    pub fn new(params: TorusParams) -> Self {
        let d = params.d();
        let n = params.n();
        let sites = params.sites();
        let mut strides = vec![1usize; d];
        for i in (0..d.saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * n;
        }
        let mut graph = TorusGraph {
            params,
            sites,
            strides,
            degree: 0,
            neighbors: Vec::new(),
            cached_radius: (n - 1) / (2 * params.rho()),
            ball_dist: vec![u32::MAX; sites],
            bfs_dist: OnceLock::new(),
        };

        let steps = params.lattice().step_offsets();
        let mut table = Vec::new();
        let mut degree = None;
        for x in 0..sites {
            let mut ys: Vec<u32> = steps
                .iter()
                .map(|s| graph.offset_vertex(x, s) as u32)
                .filter(|&y| y as usize != x)
                .collect();
            ys.sort_unstable();
            ys.dedup();
            debug_assert!(degree.is_none_or(|k| k == ys.len()));
            degree = Some(ys.len());
            table.extend_from_slice(&ys);
        }
        graph.degree = degree.unwrap_or(0);
        graph.neighbors = table;

        let template = params.lattice().ball(graph.cached_radius);
        for (o, &dist) in template.offsets().iter().zip(template.distances()) {
            let v = graph.offset_vertex(0, o);
            graph.ball_dist[v] = dist;
        }
        graph
    }

    pub fn params(&self) -> TorusParams {
        self.params
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    /// Common number of neighbors of every vertex.
    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Largest radius whose ball template is cached in the distance table.
    pub fn cached_radius(&self) -> usize {
        self.cached_radius
    }

    fn check(&self, x: usize) -> Result<()> {
        if x < self.sites {
            Ok(())
        } else {
            Err(Error::VertexOutOfRange {
                vertex: x,
                sites: self.sites,
            })
        }
    }

    /// Row-major index of a coordinate vector.
    pub fn vertex(&self, coords: &[usize]) -> Result<usize> {
        let n = self.params.n();
        if coords.len() != self.params.d() || coords.iter().any(|&c| c >= n) {
            return Err(Error::CoordinatesOutOfRange {
                coords: coords.to_vec(),
                n,
            });
        }
        Ok(coords.iter().zip(&self.strides).map(|(c, s)| c * s).sum())
    }

    pub fn coords(&self, x: usize) -> Vec<usize> {
        let n = self.params.n();
        self.strides.iter().map(|s| (x / s) % n).collect()
    }

    /// `x + offset` with componentwise wraparound.
    pub fn offset_vertex(&self, x: usize, offset: &[i64]) -> usize {
        let n = self.params.n() as i64;
        self.strides
            .iter()
            .zip(offset)
            .map(|(&s, &o)| {
                let c = ((x / s) as i64) % n;
                ((c + o).rem_euclid(n) as usize) * s
            })
            .sum()
    }

    /// `x + t` for two vertices (group operation of the torus).
    pub fn add(&self, x: usize, t: usize) -> usize {
        let n = self.params.n();
        self.strides
            .iter()
            .map(|&s| (((x / s) % n + (t / s) % n) % n) * s)
            .sum()
    }

    /// `y - x` modulo `n`, as a vertex.
    pub fn difference(&self, y: usize, x: usize) -> usize {
        let n = self.params.n();
        self.strides
            .iter()
            .map(|&s| (((y / s) % n + n - (x / s) % n) % n) * s)
            .sum()
    }

    /// Neighbors of `x` sorted by index.
    pub fn neighbors(&self, x: usize) -> Result<Vec<usize>> {
        self.check(x)?;
        Ok(self.neighbor_slice(x).iter().map(|&y| y as usize).collect())
    }

    /// Unchecked neighbor view for hot loops.
    #[inline]
    pub fn neighbor_slice(&self, x: usize) -> &[u32] {
        &self.neighbors[x * self.degree..(x + 1) * self.degree]
    }

    /// Ball template of radius `r`; fails when the ball would wrap onto itself.
    pub fn ball_template(&self, radius: usize) -> Result<BallTemplate> {
        if !self.params.ball_fits(radius) {
            return Err(Error::SelfOverlappingBall {
                radius,
                n: self.params.n(),
                rho: self.params.rho(),
            });
        }
        Ok(self.params.lattice().ball(radius))
    }

    /// The ball `B(x, r)` as vertices, in the template's canonical order.
    pub fn translate_ball(&self, template: &BallTemplate, x: usize) -> Result<Vec<usize>> {
        self.check(x)?;
        if template.lattice() != self.params.lattice() {
            return Err(Error::InvalidParams(
                "ball template built for a different lattice".into(),
            ));
        }
        if !self.params.ball_fits(template.radius()) {
            return Err(Error::SelfOverlappingBall {
                radius: template.radius(),
                n: self.params.n(),
                rho: self.params.rho(),
            });
        }
        Ok(template
            .offsets()
            .iter()
            .map(|o| self.offset_vertex(x, o))
            .collect())
    }

    /// Centers `{k(2R+1)}^d` of the sub-lattice used to build disjoint balls.
    pub fn sub_lattice(&self, big_radius: usize) -> Result<SubLattice> {
        if big_radius == 0 {
            return Err(Error::InvalidParams("sub-lattice radius must be >= 1".into()));
        }
        let spacing = 2 * big_radius + 1;
        let n = self.params.n();
        if spacing > n {
            return Err(Error::Infeasible(format!(
                "sub-lattice spacing {spacing} exceeds side length {n}"
            )));
        }
        let per_axis = n / spacing;
        let d = self.params.d();
        let tau = per_axis.pow(d as u32);
        let centers = (0..tau)
            .map(|mut k| {
                let mut coords = vec![0usize; d];
                for c in coords.iter_mut().rev() {
                    *c = (k % per_axis) * spacing;
                    k /= per_axis;
                }
                self.vertex(&coords).expect("sub-lattice center in range")
            })
            .collect();
        Ok(SubLattice {
            spacing,
            centers,
            tau,
        })
    }

    /// Graph distance between `x` and `y`.
    ///
    /// Looks the difference up in the largest cached ball; beyond it falls
    /// back to a breadth-first search from the origin.
    pub fn distance(&self, x: usize, y: usize) -> Result<usize> {
        self.check(x)?;
        self.check(y)?;
        Ok(self.distance_unchecked(x, y))
    }

    #[inline]
    pub fn distance_unchecked(&self, x: usize, y: usize) -> usize {
        let diff = self.difference(y, x);
        match self.ball_dist[diff] {
            u32::MAX => self.bfs_table()[diff] as usize,
            dist => dist as usize,
        }
    }

    fn bfs_table(&self) -> &[u32] {
        self.bfs_dist.get_or_init(|| self.bfs_from(0))
    }

    /// Breadth-first distances from `source` to every vertex.
    pub fn bfs_from(&self, source: usize) -> Vec<u32> {
        let mut dist = vec![u32::MAX; self.sites];
        dist[source] = 0;
        let mut queue = VecDeque::from([source]);
        while let Some(x) = queue.pop_front() {
            for &y in self.neighbor_slice(x) {
                let y = y as usize;
                if dist[y] == u32::MAX {
                    dist[y] = dist[x] + 1;
                    queue.push_back(y);
                }
            }
        }
        dist
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn torus(d: usize, n: usize, norm: Norm, rho: usize) -> TorusGraph {
        TorusGraph::new(TorusParams::new(d, n, norm, rho).unwrap())
    }

    fn set(vs: Vec<usize>) -> std::collections::BTreeSet<usize> {
        vs.into_iter().collect()
    }

    #[test]
    fn von_neumann_neighborhood() {
        let t = torus(2, 5, Norm::Finite(1), 1);
        let x = t.vertex(&[0, 0]).unwrap();
        let expected = [[1, 0], [4, 0], [0, 1], [0, 4]]
            .iter()
            .map(|c| t.vertex(c).unwrap())
            .collect();
        assert_eq!(set(t.neighbors(x).unwrap()), set(expected));
    }

    #[test]
    fn moore_neighborhood_matches_scan() {
        let t = torus(2, 5, Norm::Infinity, 1);
        let origin = t.vertex(&[0, 0]).unwrap();
        let scanned: Vec<usize> = (0..25)
            .filter(|&y| y != origin)
            .filter(|&y| {
                let c = t.coords(y);
                c.iter().all(|&ci| ci.min(5 - ci) <= 1)
            })
            .collect();
        assert_eq!(scanned.len(), 8);
        assert_eq!(t.neighbors(origin).unwrap(), scanned);
    }

    #[test]
    fn cycle_wraps_around() {
        let t = torus(1, 4, Norm::Finite(1), 1);
        assert_eq!(t.neighbors(3).unwrap(), vec![0, 2]);
    }

    #[test]
    fn out_of_range_vertex_rejected() {
        let t = torus(1, 4, Norm::Finite(1), 1);
        assert!(matches!(
            t.neighbors(4),
            Err(Error::VertexOutOfRange { .. })
        ));
        assert!(t.vertex(&[4]).is_err());
        assert!(t.vertex(&[1, 1]).is_err());
    }

    #[test]
    fn ball_cardinalities() {
        let von = Lattice::new(2, Norm::Finite(1), 1).unwrap();
        let moore = Lattice::new(2, Norm::Infinity, 1).unwrap();
        assert_eq!(von.ball(1).beta(), 5);
        assert_eq!(moore.ball(1).beta(), 9);
        assert_eq!(von.ball(0).offsets(), &[vec![0, 0]]);
        assert_eq!(von.ball(2).beta(), 13);
    }

    #[test]
    fn euclidean_norm_is_exact() {
        // (1,1) has squared length 2 > 1, (2,0) too long, (1,0) fine.
        let l = Lattice::new(2, Norm::Finite(2), 1).unwrap();
        assert_eq!(l.step_offsets().len(), 4);
        // rho = 2 picks up the diagonals (1,1) since 2 <= 4.
        let l2 = Lattice::new(2, Norm::Finite(2), 2).unwrap();
        assert_eq!(l2.step_offsets().len(), 12);
    }

    #[test]
    fn template_requires_room() {
        let t = torus(1, 4, Norm::Finite(1), 1);
        assert!(t.ball_template(1).is_ok());
        assert!(matches!(
            t.ball_template(2),
            Err(Error::SelfOverlappingBall { .. })
        ));
        assert_eq!(t.ball_template(0).unwrap().beta(), 1);
    }

    #[test]
    fn translate_ball_on_cycle() {
        let t = torus(1, 6, Norm::Finite(1), 1);
        let b = t.ball_template(1).unwrap();
        assert_eq!(t.translate_ball(&b, 5).unwrap(), vec![4, 5, 0]);
        assert_eq!(t.translate_ball(&b, 0).unwrap(), vec![5, 0, 1]);
    }

    #[test]
    fn sub_lattice_examples() {
        let t = torus(2, 20, Norm::Finite(1), 1);
        let s = t.sub_lattice(2).unwrap();
        assert_eq!((s.spacing, s.tau, s.centers.len()), (5, 16, 16));

        let t = torus(1, 7, Norm::Finite(1), 1);
        let s = t.sub_lattice(1).unwrap();
        assert_eq!((s.spacing, s.tau), (3, 2));
        assert_eq!(s.centers, vec![0, 3]);

        let t = torus(2, 5, Norm::Finite(1), 1);
        let s = t.sub_lattice(2).unwrap();
        assert_eq!((s.tau, s.centers.clone()), (1, vec![0]));
        assert!(t.sub_lattice(3).is_err());
    }

    #[test]
    fn distance_with_long_jumps() {
        let t = torus(1, 10, Norm::Finite(1), 2);
        assert_eq!(t.distance(0, 5).unwrap(), 3);
        assert_eq!(t.distance(4, 4).unwrap(), 0);
    }

    #[test]
    fn distance_falls_back_to_bfs_when_n_is_small() {
        // n = 4, rho = 2: cached radius is 0, every other query goes through BFS.
        let t = torus(1, 4, Norm::Finite(1), 2);
        assert_eq!(t.cached_radius(), 0);
        assert_eq!(t.distance(0, 2).unwrap(), 1);
        assert_eq!(t.distance(1, 3).unwrap(), 1);
    }

    #[test]
    fn params_text_round_trip() {
        let p = TorusParams::new(2, 8, Norm::Infinity, 1).unwrap();
        let text = p.to_config_string();
        assert!(text.contains("p = \"inf\""));
        assert_eq!(TorusParams::from_config_str(&text).unwrap(), p);
        let q = TorusParams::from_config_str("d = 1\nn = 7\np = 2\nrho = 3\n").unwrap();
        assert_eq!(q.norm(), Norm::Finite(2));
        assert!(TorusParams::from_config_str("d = 1\nn = 1\np = 2\nrho = 1\n").is_err());
        assert!(TorusParams::from_config_str("d = 0\nn = 5\np = 1\nrho = 1\n").is_err());
    }
}
