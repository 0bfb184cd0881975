//! Bipartite agent/good graphs: maximum matching (Hopcroft-Karp), König
//! minimum vertex cover, and neighborhoods.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::model::MarketInstance;

/// Graph `H = (A, G, E)` with agents and goods indexed from zero.
/// Adjacency lists are kept sorted so every traversal is deterministic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BipartiteGraph {
    agent_adj: Vec<Vec<usize>>,
    good_adj: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Vertex {
    Agent(usize),
    Good(usize),
}

impl BipartiteGraph {
    pub fn new(n_agents: usize, n_goods: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut agent_adj = vec![Vec::new(); n_agents];
        let mut good_adj = vec![Vec::new(); n_goods];
        for &(a, g) in edges {
            if a >= n_agents || g >= n_goods {
                return Err(Error::InvalidGraph(format!("edge ({a}, {g}) out of range")));
            }
            agent_adj[a].push(g);
            good_adj[g].push(a);
        }
        for (a, adj) in agent_adj.iter_mut().enumerate() {
            adj.sort_unstable();
            if adj.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidGraph(format!("duplicate edge at agent {a}")));
            }
        }
        for adj in &mut good_adj {
            adj.sort_unstable();
        }
        Ok(Self {
            agent_adj,
            good_adj,
        })
    }

    pub fn n_agents(&self) -> usize {
        self.agent_adj.len()
    }

    pub fn n_goods(&self) -> usize {
        self.good_adj.len()
    }

    pub fn goods_of(&self, agent: usize) -> &[usize] {
        &self.agent_adj[agent]
    }

    pub fn agents_of(&self, good: usize) -> &[usize] {
        &self.good_adj[good]
    }

    pub fn has_edge(&self, agent: usize, good: usize) -> bool {
        self.agent_adj[agent].binary_search(&good).is_ok()
    }

    pub fn edge_count(&self) -> usize {
        self.agent_adj.iter().map(Vec::len).sum()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.agent_adj
            .iter()
            .enumerate()
            .flat_map(|(a, gs)| gs.iter().map(move |&g| (a, g)))
    }

    /// `H[A', G']`: same index space, only edges with both ends kept.
    pub fn restrict(&self, agents: &[usize], goods: &[usize]) -> BipartiteGraph {
        let keep_a = mask(self.n_agents(), agents);
        let keep_g = mask(self.n_goods(), goods);
        let edges: Vec<_> = self
            .edges()
            .filter(|&(a, g)| keep_a[a] && keep_g[g])
            .collect();
        BipartiteGraph::new(self.n_agents(), self.n_goods(), &edges)
            .expect("subgraph of a valid graph is valid")
    }
}

pub(crate) fn mask(n: usize, members: &[usize]) -> Vec<bool> {
    let mut m = vec![false; n];
    for &v in members {
        m[v] = true;
    }
    m
}

/// Edge set `{(i, j) : u_ij = 1}` of a 0/1 instance.
pub fn unit_graph(inst: &MarketInstance) -> Result<BipartiteGraph> {
    let n = inst.n();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let u = inst.utility(i, j);
            if *u == 1 {
                edges.push((i, j));
            } else if !u.is_zero() {
                return Err(Error::NotUnit(format!("u[{i}][{j}] = {u}")));
            }
        }
    }
    BipartiteGraph::new(n, n, &edges)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matching {
    pub agent_to_good: Vec<Option<usize>>,
    pub good_to_agent: Vec<Option<usize>>,
}

impl Matching {
    pub fn size(&self) -> usize {
        self.agent_to_good.iter().flatten().count()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.agent_to_good
            .iter()
            .enumerate()
            .filter_map(|(a, g)| g.map(|g| (a, g)))
    }

    pub fn is_perfect(&self) -> bool {
        self.agent_to_good.len() == self.good_to_agent.len()
            && self.agent_to_good.iter().all(Option::is_some)
    }
}

/// Hopcroft-Karp. Free agents are processed in increasing index and
/// adjacency lists are sorted, so the result is deterministic.
pub fn maximum_matching(g: &BipartiteGraph) -> Matching {
    const INF: usize = usize::MAX;
    let na = g.n_agents();
    let mut a2g: Vec<Option<usize>> = vec![None; na];
    let mut g2a: Vec<Option<usize>> = vec![None; g.n_goods()];
    let mut dist = vec![INF; na];

    loop {
        // layered BFS from all free agents
        let mut queue = VecDeque::new();
        for a in 0..na {
            if a2g[a].is_none() {
                dist[a] = 0;
                queue.push_back(a);
            } else {
                dist[a] = INF;
            }
        }
        let mut found = false;
        while let Some(a) = queue.pop_front() {
            for &good in g.goods_of(a) {
                match g2a[good] {
                    None => found = true,
                    Some(b) if dist[b] == INF => {
                        dist[b] = dist[a] + 1;
                        queue.push_back(b);
                    }
                    Some(_) => {}
                }
            }
        }
        if !found {
            break;
        }
        let mut next = vec![0usize; na];
        for a in 0..na {
            if a2g[a].is_none() {
                augment(g, a, &mut a2g, &mut g2a, &mut dist, &mut next);
            }
        }
    }
    Matching {
        agent_to_good: a2g,
        good_to_agent: g2a,
    }
}

/// Iterative DFS along the BFS layers; returns whether `root` got matched.
fn augment(
    g: &BipartiteGraph,
    root: usize,
    a2g: &mut [Option<usize>],
    g2a: &mut [Option<usize>],
    dist: &mut [usize],
    next: &mut [usize],
) -> bool {
    let mut stack = vec![root];
    while let Some(&a) = stack.last() {
        let adj = g.goods_of(a);
        if next[a] == adj.len() {
            dist[a] = usize::MAX;
            stack.pop();
            continue;
        }
        let good = adj[next[a]];
        next[a] += 1;
        match g2a[good] {
            None => {
                // flip the path: stack[k] takes the good stack[k+1] held
                let mut good = good;
                for &agent in stack.iter().rev() {
                    let prev = a2g[agent];
                    a2g[agent] = Some(good);
                    g2a[good] = Some(agent);
                    match prev {
                        Some(p) => good = p,
                        None => break,
                    }
                }
                return true;
            }
            Some(b) if dist[b] == dist[a] + 1 => stack.push(b),
            Some(_) => {}
        }
    }
    false
}

/// König split of `H`: `G1 ∪ A2` is a minimum vertex cover.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverDecomposition {
    /// Goods in the cover.
    pub g1: Vec<usize>,
    /// Goods outside the cover.
    pub g2: Vec<usize>,
    /// Agents outside the cover.
    pub a1: Vec<usize>,
    /// Agents in the cover.
    pub a2: Vec<usize>,
    /// Maximum matching of `H[A2, G2]`; matches every agent of `A2`.
    pub matching: Matching,
}

impl CoverDecomposition {
    pub fn cover_size(&self) -> usize {
        self.g1.len() + self.a2.len()
    }
}

/// Alternating reachability from unmatched agents: `G1` is the reachable
/// goods, `A2` the unreachable agents.
///
/// The two expansion properties the unit solver relies on are checked with
/// Hall-type matchings before returning: every agent of `A2` is matched into
/// `G2`, and every good of `G1` is matched into `A1`.
pub fn minimum_vertex_cover(g: &BipartiteGraph) -> Result<CoverDecomposition> {
    let m = maximum_matching(g);
    let mut agent_seen = vec![false; g.n_agents()];
    let mut good_seen = vec![false; g.n_goods()];
    let mut queue: VecDeque<usize> = (0..g.n_agents())
        .filter(|&a| m.agent_to_good[a].is_none())
        .collect();
    for &a in &queue {
        agent_seen[a] = true;
    }
    while let Some(a) = queue.pop_front() {
        for &good in g.goods_of(a) {
            if m.agent_to_good[a] == Some(good) || good_seen[good] {
                continue;
            }
            good_seen[good] = true;
            if let Some(b) = m.good_to_agent[good] {
                if !agent_seen[b] {
                    agent_seen[b] = true;
                    queue.push_back(b);
                }
            }
        }
    }
    let (g1, g2): (Vec<usize>, Vec<usize>) = (0..g.n_goods()).partition(|&j| good_seen[j]);
    let (a1, a2): (Vec<usize>, Vec<usize>) = (0..g.n_agents()).partition(|&i| agent_seen[i]);

    if g1.len() + a2.len() != m.size() {
        return Err(Error::Invariant(format!(
            "cover size {} differs from matching size {}",
            g1.len() + a2.len(),
            m.size()
        )));
    }
    let inner = maximum_matching(&g.restrict(&a2, &g2));
    if inner.size() != a2.len() {
        return Err(Error::Invariant(
            "maximum matching of H[A2, G2] leaves an agent of A2 unmatched".into(),
        ));
    }
    if maximum_matching(&g.restrict(&a1, &g1)).size() != g1.len() {
        return Err(Error::Invariant(
            "some set S of G1 has fewer than |S| neighbors in A1".into(),
        ));
    }
    Ok(CoverDecomposition {
        g1,
        g2,
        a1,
        a2,
        matching: inner,
    })
}

/// `N(S)`, sorted. All vertices of `S` must be on the same side.
pub fn neighborhood(g: &BipartiteGraph, set: &[Vertex]) -> Result<Vec<Vertex>> {
    let Some(first) = set.first() else {
        return Ok(Vec::new());
    };
    match first {
        Vertex::Agent(_) => {
            let mut seen = vec![false; g.n_goods()];
            for v in set {
                let Vertex::Agent(a) = *v else {
                    return Err(Error::InvalidArgument(
                        "vertex set mixes agents and goods".into(),
                    ));
                };
                for &j in g.goods_of(a) {
                    seen[j] = true;
                }
            }
            Ok((0..g.n_goods())
                .filter(|&j| seen[j])
                .map(Vertex::Good)
                .collect())
        }
        Vertex::Good(_) => {
            let mut seen = vec![false; g.n_agents()];
            for v in set {
                let Vertex::Good(j) = *v else {
                    return Err(Error::InvalidArgument(
                        "vertex set mixes agents and goods".into(),
                    ));
                };
                for &a in g.agents_of(j) {
                    seen[a] = true;
                }
            }
            Ok((0..g.n_agents())
                .filter(|&a| seen[a])
                .map(Vertex::Agent)
                .collect())
        }
    }
}

/// Agents adjacent to any of `goods`.
pub fn agent_neighbors(g: &BipartiteGraph, goods: &[usize]) -> Vec<usize> {
    let mut seen = vec![false; g.n_agents()];
    for &j in goods {
        for &a in g.agents_of(j) {
            seen[a] = true;
        }
    }
    (0..g.n_agents()).filter(|&a| seen[a]).collect()
}
