//! Block-structured random graph models and the deterministic-clusters model.
//!
//! All samplers walk candidate pairs in canonical order (`u < v`, row-major)
//! and take exactly one uniform draw per pair, including pairs whose
//! probability is 0 or 1. Two specs that differ only in some pair
//! probabilities are therefore coupled under a shared seed: raising a
//! probability can only add that edge.

use std::collections::BTreeSet;
use std::fmt;
use std::ops::Range;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::{Graph, Partition};
use crate::rng::{domain, unit_uniform, Seed};

/// Per-pair edge probabilities given by a block table, plus pairs forced to 1.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockProbabilitySpec {
    n: usize,
    block_sizes: Vec<usize>,
    block_of: Vec<u16>,
    sides: Vec<u8>,
    table: Vec<f64>,
    plants: BTreeSet<(u32, u32)>,
}

/// How [`BlockProbabilitySpec::with_plants`] treats the per-vertex budget.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlantBudget {
    Enforce,
    /// Skip the budget check and log a warning when it would have failed.
    Force,
}

impl BlockProbabilitySpec {
    /// Contiguous blocks of the given sizes, in order. `sides[i]` puts block `i`
    /// on side 0 or 1 of the planted bisection; `table` is the symmetric
    /// block-to-block probability matrix.
    pub fn new(block_sizes: Vec<usize>, sides: Vec<u8>, table: Vec<Vec<f64>>) -> Result<Self> {
        let b = block_sizes.len();
        if b == 0 || b > u16::MAX as usize {
            return Err(Error::InvalidSpec(format!("bad block count {b}")));
        }
        if sides.len() != b || table.len() != b || table.iter().any(|r| r.len() != b) {
            return Err(Error::InvalidSpec(
                "sides and probability table must match the block count".into(),
            ));
        }
        if block_sizes.contains(&0) {
            return Err(Error::InvalidSpec("empty block".into()));
        }
        if sides.iter().any(|&s| s > 1) {
            return Err(Error::InvalidSpec("sides must be 0 or 1".into()));
        }
        for i in 0..b {
            for j in 0..b {
                let pr = table[i][j];
                if !(0.0..=1.0).contains(&pr) {
                    return Err(Error::InvalidSpec(format!(
                        "probability {pr} for blocks ({i}, {j}) outside [0, 1]"
                    )));
                }
                if pr != table[j][i] {
                    return Err(Error::InvalidSpec(format!(
                        "probability table not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        let n: usize = block_sizes.iter().sum();
        if n < 2 {
            return Err(Error::TooFewVertices(n));
        }
        let block_of: Vec<u16> = block_sizes
            .iter()
            .enumerate()
            .flat_map(|(i, &s)| std::iter::repeat(i as u16).take(s))
            .collect();
        let spec = BlockProbabilitySpec {
            n,
            block_sizes,
            block_of,
            sides,
            table: table.into_iter().flatten().collect(),
            plants: BTreeSet::new(),
        };
        spec.planted().ensure_balanced().map_err(|e| {
            Error::InvalidSpec(format!("planted split must be balanced: {e}"))
        })?;
        Ok(spec)
    }

    /// Homogeneous two-block model.
    pub fn ssbm(n: usize, p: f64, q: f64) -> Result<Self> {
        if n % 2 != 0 {
            return Err(Error::InvalidSpec(format!("n = {n} must be even")));
        }
        Self::new(vec![n / 2, n / 2], vec![0, 1], vec![vec![p, q], vec![q, p]])
    }

    /// Benchmark NSSBM: `L1`, `L2` (the first half, split in two) at rate
    /// `pbar` internally and `p` between them, `R` at rate `p`, crossing at `q`.
    pub fn nssbm_benchmark(n: usize, p: f64, pbar: f64, q: f64) -> Result<Self> {
        if n % 4 != 0 || n == 0 {
            return Err(Error::InvalidSpec(format!("n = {n} must be divisible by 4")));
        }
        if !(q <= p && p <= pbar) {
            return Err(Error::InvalidSpec(format!(
                "need q <= p <= pbar, got q = {q}, p = {p}, pbar = {pbar}"
            )));
        }
        let k = n / 4;
        Self::new(
            vec![k, k, 2 * k],
            vec![0, 0, 1],
            vec![vec![pbar, p, q], vec![p, pbar, q], vec![q, q, p]],
        )
    }

    /// Nested-block instance on which normalized bisection splits `L1` from
    /// the rest: `L1`, `L2` at rate `K p` internally, `p` between them and
    /// inside `R`, `q` across.
    pub fn nested_block(n: usize, p: f64, q: f64, k: f64) -> Result<Self> {
        if !(q < p) {
            return Err(Error::InvalidSpec(format!("need q < p, got q = {q}, p = {p}")));
        }
        if k * p > 1.0 {
            return Err(Error::InvalidSpec(format!("K p = {} exceeds 1", k * p)));
        }
        if k < 1.0 {
            return Err(Error::InvalidSpec(format!("K = {k} must be at least 1")));
        }
        Self::nssbm_benchmark(n, p, k * p, q)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn block_count(&self) -> usize {
        self.block_sizes.len()
    }

    pub fn blocks(&self) -> Vec<Range<usize>> {
        let mut start = 0;
        self.block_sizes
            .iter()
            .map(|&s| {
                let r = start..start + s;
                start += s;
                r
            })
            .collect()
    }

    pub fn block_of(&self, v: usize) -> usize {
        self.block_of[v] as usize
    }

    pub fn block_size(&self, b: usize) -> usize {
        self.block_sizes[b]
    }

    pub fn block_side(&self, b: usize) -> u8 {
        self.sides[b]
    }

    /// Table probability between blocks, ignoring plants.
    pub fn block_prob(&self, bi: usize, bj: usize) -> f64 {
        self.table[bi * self.block_sizes.len() + bj]
    }

    pub fn planted(&self) -> Partition {
        Partition::new(self.block_of.iter().map(|&b| self.sides[b as usize]).collect())
            .expect("sides are 0 or 1")
    }

    /// Probability of the 0-based pair `(u, v)`, `u != v`.
    pub fn pair_probability(&self, u: usize, v: usize) -> f64 {
        let key = if u < v { (u as u32, v as u32) } else { (v as u32, u as u32) };
        if self.plants.contains(&key) {
            1.0
        } else {
            self.block_prob(self.block_of(u), self.block_of(v))
        }
    }

    /// Pairs forced to probability 1, 0-based, `u < v`.
    pub fn plants(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.plants.iter().map(|&(u, v)| (u as usize, v as usize))
    }

    /// Largest internal table probability.
    pub fn max_internal_prob(&self) -> f64 {
        self.internal_probs().fold(0.0, f64::max)
    }

    fn internal_probs(&self) -> impl Iterator<Item = f64> + '_ {
        let b = self.block_count();
        (0..b)
            .flat_map(move |i| (0..b).map(move |j| (i, j)))
            .filter(move |&(i, j)| self.sides[i] == self.sides[j] && self.has_pairs(i, j))
            .map(move |(i, j)| self.block_prob(i, j))
    }

    fn crossing_probs(&self) -> impl Iterator<Item = f64> + '_ {
        let b = self.block_count();
        (0..b)
            .flat_map(move |i| (0..b).map(move |j| (i, j)))
            .filter(move |&(i, j)| self.sides[i] != self.sides[j])
            .map(move |(i, j)| self.block_prob(i, j))
    }

    fn has_pairs(&self, i: usize, j: usize) -> bool {
        i != j || self.block_sizes[i] > 1
    }

    /// The single crossing probability, when all crossing blocks share one.
    pub fn uniform_crossing(&self) -> Option<f64> {
        let mut it = self.crossing_probs();
        let first = it.next()?;
        it.all(|x| x == first).then_some(first)
    }

    /// Whether the block table is a member of `NSSBM(n, p, pbar, q)`: every
    /// internal probability lies in `[p, pbar]` and every crossing probability
    /// equals `q`, with `q < p <= pbar`. Plants are not considered here.
    pub fn is_nssbm(&self, p: f64, pbar: f64, q: f64) -> bool {
        q < p
            && p <= pbar
            && self.internal_probs().all(|x| (p..=pbar).contains(&x))
            && self.crossing_probs().all(|x| x == q)
    }

    /// Per-vertex plant allowance `n * pbar / ln ln n`, with `pbar` the
    /// largest internal probability. Unbounded when `ln ln n <= 0`.
    pub fn plant_budget(&self) -> f64 {
        let lnln = (self.n as f64).ln().ln();
        if lnln <= 0.0 {
            f64::INFINITY
        } else {
            self.n as f64 * self.max_internal_prob() / lnln
        }
    }

    /// Returns the spec with the given 0-based internal pairs forced to probability 1.
    pub fn with_plants(&self, pairs: &[(usize, usize)], budget: PlantBudget) -> Result<Self> {
        let planted = self.planted();
        let mut plants = self.plants.clone();
        for &(a, b) in pairs {
            for x in [a, b] {
                if x >= self.n {
                    return Err(Error::VertexOutOfRange { vertex: x, n: self.n });
                }
            }
            if a == b {
                return Err(Error::SelfLoop(a));
            }
            if !planted.same_side(a, b) {
                return Err(Error::CrossingPair(a, b));
            }
            plants.insert(if a < b { (a as u32, b as u32) } else { (b as u32, a as u32) });
        }
        let mut count = vec![0usize; self.n];
        for &(u, v) in &plants {
            count[u as usize] += 1;
            count[v as usize] += 1;
        }
        let limit = self.plant_budget();
        if let Some((vertex, &c)) = count.iter().enumerate().find(|(_, &c)| c as f64 > limit) {
            match budget {
                PlantBudget::Enforce => {
                    return Err(Error::PlantBudgetExceeded {
                        vertex,
                        count: c,
                        budget: limit,
                    })
                }
                PlantBudget::Force => log::warn!(
                    "vertex {vertex} has {c} planted pairs, over the budget {limit:.3}; continuing"
                ),
            }
        }
        Ok(BlockProbabilitySpec {
            plants,
            ..self.clone()
        })
    }

    /// Dense matrix of pair probabilities, zero diagonal.
    pub fn dense_probabilities(&self, cap: usize) -> Result<DMatrix<f64>> {
        if self.n > cap {
            return Err(Error::DimensionOverCap { n: self.n, cap });
        }
        Ok(DMatrix::from_fn(self.n, self.n, |i, j| {
            if i == j {
                0.0
            } else {
                self.pair_probability(i, j)
            }
        }))
    }

    /// `Σ_w p_vw` over `w != v`.
    pub fn expected_degree(&self, v: usize) -> f64 {
        let bv = self.block_of(v);
        let mut d: f64 = (0..self.block_count())
            .map(|b| self.block_prob(bv, b) * self.block_sizes[b] as f64)
            .sum();
        d -= self.block_prob(bv, bv);
        for (a, b) in self.plants() {
            if a == v || b == v {
                d += 1.0 - self.block_prob(self.block_of(a), self.block_of(b));
            }
        }
        d
    }
}

/// Samples every pair independently with its specified probability.
pub fn sample_block_model(spec: &BlockProbabilitySpec, seed: Seed) -> Graph {
    let n = spec.n;
    let b = spec.block_count();
    let mut plant_rows: Vec<Vec<u32>> = vec![Vec::new(); n];
    for &(u, v) in &spec.plants {
        plant_rows[u as usize].push(v);
    }
    let mut rng = seed.rng(domain::EDGES);
    let mut edges = Vec::new();
    for u in 0..n {
        let row = &spec.table[spec.block_of[u] as usize * b..][..b];
        let mut forced = plant_rows[u].iter().peekable();
        for v in u + 1..n {
            let x = unit_uniform(&mut rng);
            let pr = if forced.peek() == Some(&&(v as u32)) {
                forced.next();
                1.0
            } else {
                row[spec.block_of[v] as usize]
            };
            if x < pr {
                edges.push((u as u32, v as u32));
            }
        }
    }
    Graph::from_sorted_unique(n, edges)
}

/// `G(half_n, p)` with a clique forced on vertices `0..clique_size`.
pub fn planted_clique_internal(half_n: usize, p: f64, clique_size: usize, seed: Seed) -> Result<Graph> {
    if clique_size > half_n {
        return Err(Error::InvalidArgument(format!(
            "clique size {clique_size} exceeds {half_n} vertices"
        )));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("p = {p} outside [0, 1]")));
    }
    if half_n < 2 {
        return Err(Error::TooFewVertices(half_n));
    }
    let mut rng = seed.rng(domain::INTERNAL);
    let mut edges = Vec::new();
    for u in 0..half_n {
        for v in u + 1..half_n {
            let x = unit_uniform(&mut rng);
            if v < clique_size || x < p {
                edges.push((u as u32, v as u32));
            }
        }
    }
    Ok(Graph::from_sorted_unique(half_n, edges))
}

/// Adversary of the deterministic-clusters model that adds internal edges
/// after seeing the sampled graph.
pub trait Adversary: Send + Sync {
    fn extra_internal_edges(&self, observed: &Graph) -> Vec<(usize, usize)>;
}

impl<F> Adversary for F
where
    F: Fn(&Graph) -> Vec<(usize, usize)> + Send + Sync,
{
    fn extra_internal_edges(&self, observed: &Graph) -> Vec<(usize, usize)> {
        self(observed)
    }
}

/// Deterministic-clusters model: fixed internal graphs on the two halves,
/// crossing edges sampled at rate `q`, then optional adversarial additions.
#[derive(Clone)]
pub struct DcmSpec {
    n: usize,
    internal: [Graph; 2],
    q: f64,
    d_in_declared: usize,
    adversary: Option<Arc<dyn Adversary>>,
}

impl fmt::Debug for DcmSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DcmSpec")
            .field("n", &self.n)
            .field("q", &self.q)
            .field("d_in_declared", &self.d_in_declared)
            .field("adversary", &self.adversary.is_some())
            .finish()
    }
}

impl DcmSpec {
    /// `first` lives on vertices `0..n/2`, `second` on `n/2..n`.
    pub fn new(first: Graph, second: Graph, q: f64, d_in_declared: usize) -> Result<Self> {
        if first.n() != second.n() {
            return Err(Error::InvalidSpec(format!(
                "internal graphs differ in size: {} vs {}",
                first.n(),
                second.n()
            )));
        }
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::InvalidSpec(format!("q = {q} outside [0, 1]")));
        }
        for (side, g) in [&first, &second].into_iter().enumerate() {
            if g.min_degree() < d_in_declared {
                return Err(Error::InvalidSpec(format!(
                    "internal graph {side} has minimum degree {} below the declared {d_in_declared}",
                    g.min_degree()
                )));
            }
        }
        Ok(DcmSpec {
            n: 2 * first.n(),
            internal: [first, second],
            q,
            d_in_declared,
            adversary: None,
        })
    }

    pub fn with_adversary(mut self, adversary: Arc<dyn Adversary>) -> Self {
        self.adversary = Some(adversary);
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn d_in_declared(&self) -> usize {
        self.d_in_declared
    }

    pub fn internal(&self) -> &[Graph; 2] {
        &self.internal
    }

    pub fn planted(&self) -> Partition {
        Partition::halves(self.n)
    }

    /// Disjoint union of the two internal graphs on `n` vertices.
    pub fn internal_union(&self) -> Graph {
        let h = self.n / 2;
        let edges = self.internal[0]
            .edges()
            .chain(self.internal[1].edges().map(|(u, v)| (u + h, v + h)))
            .map(|(u, v)| (u as u32, v as u32))
            .collect();
        Graph::from_sorted_unique(self.n, edges)
    }
}

/// A DCM draw and the number of edges the adversary added.
#[derive(Clone, Debug)]
pub struct DcmSample {
    pub graph: Graph,
    pub adversary_added: usize,
}

pub fn sample_dcm(spec: &DcmSpec, seed: Seed) -> Result<DcmSample> {
    let n = spec.n;
    let h = n / 2;
    let mut rng = seed.rng(domain::CROSSING);
    let mut edges: Vec<(u32, u32)> = spec.internal[0]
        .edges()
        .map(|(u, v)| (u as u32, v as u32))
        .collect();
    for u in 0..h {
        for v in h..n {
            if unit_uniform(&mut rng) < spec.q {
                edges.push((u as u32, v as u32));
            }
        }
    }
    edges.extend(
        spec.internal[1]
            .edges()
            .map(|(u, v)| ((u + h) as u32, (v + h) as u32)),
    );
    edges.sort_unstable();
    let observed = Graph::from_sorted_unique(n, edges);
    let Some(adversary) = &spec.adversary else {
        return Ok(DcmSample {
            graph: observed,
            adversary_added: 0,
        });
    };
    let extra = adversary.extra_internal_edges(&observed);
    for &(u, v) in &extra {
        if u >= n || v >= n {
            return Err(Error::VertexOutOfRange {
                vertex: u.max(v),
                n,
            });
        }
        if (u < h) != (v < h) {
            return Err(Error::CrossingPair(u, v));
        }
    }
    let before = observed.edge_count();
    let graph = observed.with_extra_edges(extra)?;
    let adversary_added = graph.edge_count() - before;
    Ok(DcmSample {
        graph,
        adversary_added,
    })
}

/// DCM whose first half is `G(n/2, p)` plus a clique on its first
/// `clique_size` vertices and whose second half is `G(n/2, p)`.
/// The internal graphs are drawn from child streams of `seed`.
pub fn clique_dcm_spec(n: usize, p: f64, q: f64, clique_size: usize, seed: Seed) -> Result<DcmSpec> {
    if n % 2 != 0 {
        return Err(Error::InvalidSpec(format!("n = {n} must be even")));
    }
    let h = n / 2;
    let first = planted_clique_internal(h, p, clique_size, seed.child(1))?;
    let second = planted_clique_internal(h, p, 0, seed.child(2))?;
    let d_in = first.min_degree().min(second.min_degree());
    DcmSpec::new(first, second, q, d_in)
}
