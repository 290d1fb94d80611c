//! Hard-instance generators (independent-set matrices, lottery-hardness
//! instances, planted cliques) and the exact small-graph oracles used to
//! check them.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::applications::lottery::LotteryInstance;
use crate::error::{Error, Result};
use crate::matrix::{BoundedMatrix, Domain};
use crate::rng::SeededRng;
use crate::simplex::SimplexVector;

/// Largest graph accepted by [`max_independent_set_bruteforce`].
pub const MAX_BRUTEFORCE_NODES: usize = 24;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GraphJson", into = "GraphJson")]
pub struct UndirectedGraph {
    n: usize,
    edges: BTreeSet<(usize, usize)>,
    self_loops: BTreeSet<usize>,
}

#[derive(Serialize, Deserialize)]
struct GraphJson {
    n: usize,
    edges: Vec<[usize; 2]>,
    #[serde(default)]
    self_loops: Vec<usize>,
}

impl TryFrom<GraphJson> for UndirectedGraph {
    type Error = Error;

    fn try_from(j: GraphJson) -> Result<Self> {
        let mut g = UndirectedGraph::empty(j.n);
        for [a, b] in j.edges {
            if !g.add_edge(a, b)? {
                return Err(Error::InvalidParam(format!("duplicate edge {{{a}, {b}}}")));
            }
        }
        for v in j.self_loops {
            g.add_self_loop(v)?;
        }
        Ok(g)
    }
}

impl From<UndirectedGraph> for GraphJson {
    fn from(g: UndirectedGraph) -> Self {
        GraphJson {
            n: g.n,
            edges: g.edges.iter().map(|&(a, b)| [a, b]).collect(),
            self_loops: g.self_loops.into_iter().collect(),
        }
    }
}

impl UndirectedGraph {
    pub fn empty(n: usize) -> Self {
        Self {
            n,
            edges: BTreeSet::new(),
            self_loops: BTreeSet::new(),
        }
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::empty(n);
        for &(a, b) in edges {
            if !g.add_edge(a, b)? {
                return Err(Error::InvalidParam(format!("duplicate edge {{{a}, {b}}}")));
            }
        }
        Ok(g)
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Self::empty(n);
        for a in 0..n {
            for b in a + 1..n {
                g.edges.insert((a, b));
            }
        }
        g
    }

    pub fn path(n: usize) -> Self {
        let mut g = Self::empty(n);
        for a in 1..n {
            g.edges.insert((a - 1, a));
        }
        g
    }

    pub fn cycle(n: usize) -> Self {
        let mut g = Self::path(n);
        if n >= 3 {
            g.edges.insert((0, n - 1));
        }
        g
    }

    /// Returns `false` when the edge was already present.
    pub fn add_edge(&mut self, a: usize, b: usize) -> Result<bool> {
        if a >= self.n || b >= self.n {
            return Err(Error::InvalidParam(format!(
                "edge {{{a}, {b}}} outside [0, {})",
                self.n
            )));
        }
        if a == b {
            return Err(Error::InvalidParam(format!(
                "self-loop {a} given as an edge"
            )));
        }
        Ok(self.edges.insert((a.min(b), a.max(b))))
    }

    pub fn add_self_loop(&mut self, v: usize) -> Result<()> {
        if v >= self.n {
            return Err(Error::InvalidParam(format!(
                "self-loop {v} outside [0, {})",
                self.n
            )));
        }
        self.self_loops.insert(v);
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn self_loops(&self) -> impl Iterator<Item = usize> + '_ {
        self.self_loops.iter().copied()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        a != b && self.edges.contains(&(a.min(b), a.max(b)))
    }

    pub fn has_self_loop(&self, v: usize) -> bool {
        self.self_loops.contains(&v)
    }

    pub fn is_independent(&self, set: &[usize]) -> bool {
        set.iter()
            .enumerate()
            .all(|(i, &a)| set[i + 1..].iter().all(|&b| !self.has_edge(a, b)))
    }

    pub fn is_clique(&self, set: &[usize]) -> bool {
        set.iter()
            .enumerate()
            .all(|(i, &a)| set[i + 1..].iter().all(|&b| self.has_edge(a, b)))
    }

    /// 0/1 adjacency matrix; the diagonal holds the self-loops.
    pub fn adjacency_matrix(&self) -> BoundedMatrix {
        let n = self.n;
        let mut data = vec![0.0; n * n];
        for &(a, b) in &self.edges {
            data[a * n + b] = 1.0;
            data[b * n + a] = 1.0;
        }
        for &v in &self.self_loops {
            data[v * n + v] = 1.0;
        }
        BoundedMatrix::new(n, n, Domain::Unsigned, data).expect("0/1 entries")
    }

    fn neighbor_masks(&self) -> Vec<u32> {
        let mut m = vec![0u32; self.n];
        for &(a, b) in &self.edges {
            m[a] |= 1 << b;
            m[b] |= 1 << a;
        }
        m
    }
}

/// Matrix entries as integer numerators over a shared denominator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactMatrix {
    pub rows: usize,
    pub cols: usize,
    pub numerators: Vec<i64>,
    pub denominator: i64,
}

impl ExactMatrix {
    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.numerators[i * self.cols + j]
    }

    pub fn to_matrix(&self, domain: Domain) -> Result<BoundedMatrix> {
        let d = self.denominator as f64;
        BoundedMatrix::new(
            self.rows,
            self.cols,
            domain,
            self.numerators.iter().map(|&v| v as f64 / d).collect(),
        )
    }
}

/// `4n · A(G)`: `2n` on the diagonal, `−4n` on edges, `−1` elsewhere.
pub fn is_matrix_exact(g: &UndirectedGraph) -> ExactMatrix {
    let n = g.n();
    let d = 4 * n as i64;
    let mut num = vec![0i64; n * n];
    for i in 0..n {
        for j in 0..n {
            num[i * n + j] = if i == j {
                d / 2
            } else if g.has_edge(i, j) {
                -d
            } else {
                -1
            };
        }
    }
    ExactMatrix {
        rows: n,
        cols: n,
        numerators: num,
        denominator: d,
    }
}

/// Signed matrix whose independent sets drive the vote-sum objective.
/// Self-loops are ignored.
pub fn gen_is_matrix(g: &UndirectedGraph) -> Result<BoundedMatrix> {
    if g.n() == 0 {
        return Err(Error::InvalidParam("graph has no nodes".into()));
    }
    is_matrix_exact(g).to_matrix(Domain::Signed)
}

/// `8n · A`: `8n²` constant dummy rows at `4n + 1` below `n` graph rows with
/// `6n` on the diagonal, `0` on edges and `4n − 1` elsewhere.
pub fn lottery_hard_exact(g: &UndirectedGraph) -> ExactMatrix {
    let n = g.n();
    let d = 8 * n as i64;
    let dummy = 8 * n * n;
    let rows = n + dummy;
    let mut num = vec![0i64; rows * n];
    for i in 0..n {
        for j in 0..n {
            num[i * n + j] = if i == j {
                6 * n as i64
            } else if g.has_edge(i, j) {
                0
            } else {
                4 * n as i64 - 1
            };
        }
    }
    for v in &mut num[n * n..] {
        *v = 4 * n as i64 + 1;
    }
    ExactMatrix {
        rows,
        cols: n,
        numerators: num,
        denominator: d,
    }
}

/// `p* = 1/2 + 1/(8n)`.
pub fn lottery_hard_price(n: usize) -> f64 {
    (4 * n + 1) as f64 / (8 * n) as f64
}

/// `r* = p* (8n² + OPT_IS) / (8n² + n)`.
pub fn lottery_hard_revenue(n: usize, opt_is: usize) -> f64 {
    let nn = 8 * n * n;
    lottery_hard_price(n) * (nn + opt_is) as f64 / (nn + n) as f64
}

/// Uniform-weight lottery instance; also returns `r*` when `opt_is` is given.
pub fn gen_lottery_hard(
    g: &UndirectedGraph,
    opt_is: Option<usize>,
) -> Result<(LotteryInstance, Option<f64>)> {
    let n = g.n();
    if n == 0 {
        return Err(Error::InvalidParam("graph has no nodes".into()));
    }
    let e = lottery_hard_exact(g);
    let inst = LotteryInstance::new(
        e.to_matrix(Domain::Unsigned)?,
        SimplexVector::uniform(e.rows),
    )?;
    Ok((inst, opt_is.map(|k| lottery_hard_revenue(n, k))))
}

/// Each pair present with probability 1/2, each self-loop with probability 1/2.
pub fn gen_gnp(n: usize, seed: u64) -> UndirectedGraph {
    gnp_with(n, &mut SeededRng::new(seed))
}

fn gnp_with(n: usize, rng: &mut SeededRng) -> UndirectedGraph {
    let mut g = UndirectedGraph::empty(n);
    for a in 0..n {
        for b in a + 1..n {
            if rng.bernoulli(0.5) {
                g.edges.insert((a, b));
            }
        }
    }
    for v in 0..n {
        if rng.bernoulli(0.5) {
            g.self_loops.insert(v);
        }
    }
    g
}

/// [`gen_gnp`] with a clique forced on `k` uniformly chosen nodes, returned sorted.
pub fn gen_planted(n: usize, k: usize, seed: u64) -> Result<(UndirectedGraph, Vec<usize>)> {
    if k > n {
        return Err(Error::InvalidParam(format!(
            "clique size {k} exceeds n = {n}"
        )));
    }
    let mut rng = SeededRng::new(seed);
    let mut g = gnp_with(n, &mut rng);
    let mut nodes: Vec<usize> = (0..n).collect();
    // Partial Fisher-Yates.
    for i in 0..k {
        let j = i + rng.below(n - i);
        nodes.swap(i, j);
    }
    let mut clique = nodes[..k].to_vec();
    clique.sort_unstable();
    for (i, &a) in clique.iter().enumerate() {
        for &b in &clique[i + 1..] {
            g.edges.insert((a, b));
        }
    }
    Ok((g, clique))
}

/// Maximum independent set by branch and bound; the witness is sorted.
pub fn max_independent_set_bruteforce(g: &UndirectedGraph) -> Result<(usize, Vec<usize>)> {
    let n = g.n();
    if n > MAX_BRUTEFORCE_NODES {
        return Err(Error::InvalidParam(format!(
            "brute force supports n <= {MAX_BRUTEFORCE_NODES}, got {n}"
        )));
    }
    let nb = g.neighbor_masks();
    let mut best = 0u32;
    fn go(cand: u32, cur: u32, nb: &[u32], best: &mut u32) {
        if cand == 0 {
            if cur.count_ones() > best.count_ones() {
                *best = cur;
            }
            return;
        }
        if cur.count_ones() + cand.count_ones() <= best.count_ones() {
            return;
        }
        let v = cand.trailing_zeros() as usize;
        let bit = 1u32 << v;
        go(cand & !bit & !nb[v], cur | bit, nb, best);
        go(cand & !bit, cur, nb, best);
    }
    let all = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    go(all, 0, &nb, &mut best);
    let set: Vec<usize> = (0..n).filter(|&i| best >> i & 1 == 1).collect();
    Ok((set.len(), set))
}
