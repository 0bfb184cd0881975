//! Exact maximum flow / minimum cut.
//!
//! Capacities are any exact ordered additive type: [`Rat`] for the public
//! API, machine integers when a caller has already scaled to a common
//! denominator. Unbounded arcs are resolved at solve time to
//! `(sum of finite capacities) + 1`, which can never be cut by a minimum cut.

use std::collections::VecDeque;
use std::ops::{Add, Sub};

use crate::error::{Error, Result};
use crate::model::Rat;

pub trait Capacity: Clone + Ord + Add<Output = Self> + Sub<Output = Self> {
    fn zero() -> Self;
    fn one() -> Self;
}

impl Capacity for Rat {
    fn zero() -> Self {
        Rat::zero()
    }
    fn one() -> Self {
        Rat::one()
    }
}

impl Capacity for i64 {
    fn zero() -> Self {
        0
    }
    fn one() -> Self {
        1
    }
}

impl Capacity for i128 {
    fn zero() -> Self {
        0
    }
    fn one() -> Self {
        1
    }
}

pub type NodeId = usize;
pub type ArcId = usize;

#[derive(Debug, Clone)]
struct Arc<C> {
    from: NodeId,
    to: NodeId,
    /// `None` means unbounded.
    cap: Option<C>,
}

#[derive(Debug, Clone)]
pub struct FlowNetwork<C> {
    n_nodes: usize,
    source: NodeId,
    sink: NodeId,
    arcs: Vec<Arc<C>>,
}

impl<C: Capacity> FlowNetwork<C> {
    /// Nodes `0` and `1` are the source and the sink.
    pub fn new(n_nodes: usize) -> Self {
        assert!(n_nodes >= 2, "a flow network needs a source and a sink");
        Self {
            n_nodes,
            source: 0,
            sink: 1,
            arcs: Vec::new(),
        }
    }

    pub fn source(&self) -> NodeId {
        self.source
    }

    pub fn sink(&self) -> NodeId {
        self.sink
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn add_node(&mut self) -> NodeId {
        self.n_nodes += 1;
        self.n_nodes - 1
    }

    pub fn add_arc(&mut self, from: NodeId, to: NodeId, cap: C) -> Result<ArcId> {
        if cap < C::zero() {
            return Err(Error::InvalidArgument("negative capacity".into()));
        }
        self.push_arc(from, to, Some(cap))
    }

    pub fn add_unbounded_arc(&mut self, from: NodeId, to: NodeId) -> Result<ArcId> {
        self.push_arc(from, to, None)
    }

    fn push_arc(&mut self, from: NodeId, to: NodeId, cap: Option<C>) -> Result<ArcId> {
        if from >= self.n_nodes || to >= self.n_nodes {
            return Err(Error::InvalidArgument(format!(
                "arc ({from}, {to}) out of range"
            )));
        }
        if to == self.source || from == self.sink {
            return Err(Error::InvalidArgument(
                "arcs may not enter the source or leave the sink".into(),
            ));
        }
        if from == to {
            return Err(Error::InvalidArgument("self-loop".into()));
        }
        self.arcs.push(Arc { from, to, cap });
        Ok(self.arcs.len() - 1)
    }

    fn effective_infinity(&self) -> C {
        self.arcs
            .iter()
            .filter_map(|a| a.cap.clone())
            .fold(C::one(), |acc, c| acc + c)
    }

    /// Capacity of the cut leaving `source_side` (indexed by node).
    pub fn cut_capacity(&self, source_side: &[bool]) -> C {
        let inf = self.effective_infinity();
        self.arcs
            .iter()
            .filter(|a| source_side[a.from] && !source_side[a.to])
            .fold(C::zero(), |acc, a| {
                acc + a.cap.clone().unwrap_or_else(|| inf.clone())
            })
    }

    /// Dinic's algorithm: BFS level graph plus blocking flows found by an
    /// iterative DFS that scans arcs in insertion order.
    pub fn max_flow(&self) -> MaxFlow<C> {
        let inf = self.effective_infinity();
        let mut res = Residual::new(self.n_nodes);
        for a in &self.arcs {
            res.push(a.from, a.to, a.cap.clone().unwrap_or_else(|| inf.clone()));
        }
        let mut value = C::zero();
        let (s, t) = (self.source, self.sink);
        while let Some(level) = res.levels(s, t) {
            let mut next = vec![0usize; self.n_nodes];
            while let Some(pushed) = res.blocking_path(s, t, &level, &mut next) {
                value = value + pushed;
            }
        }
        MaxFlow {
            value,
            res,
            source: s,
            sink: t,
        }
    }
}

#[derive(Debug, Clone)]
struct Residual<C> {
    head: Vec<Vec<usize>>,
    to: Vec<NodeId>,
    cap: Vec<C>,
    /// Original capacity for forward edges, zero for reverse edges.
    orig: Vec<C>,
}

impl<C: Capacity> Residual<C> {
    fn new(n: usize) -> Self {
        Self {
            head: vec![Vec::new(); n],
            to: Vec::new(),
            cap: Vec::new(),
            orig: Vec::new(),
        }
    }

    // edge 2k is arc k, edge 2k+1 its reverse
    fn push(&mut self, from: NodeId, to: NodeId, cap: C) {
        self.head[from].push(self.to.len());
        self.to.push(to);
        self.cap.push(cap.clone());
        self.orig.push(cap);
        self.head[to].push(self.to.len());
        self.to.push(from);
        self.cap.push(C::zero());
        self.orig.push(C::zero());
    }

    fn levels(&self, s: NodeId, t: NodeId) -> Option<Vec<usize>> {
        let mut level = vec![usize::MAX; self.head.len()];
        level[s] = 0;
        let mut q = VecDeque::from([s]);
        while let Some(v) = q.pop_front() {
            for &e in &self.head[v] {
                let w = self.to[e];
                if level[w] == usize::MAX && self.cap[e] > C::zero() {
                    level[w] = level[v] + 1;
                    q.push_back(w);
                }
            }
        }
        (level[t] != usize::MAX).then_some(level)
    }

    fn blocking_path(
        &mut self,
        s: NodeId,
        t: NodeId,
        level: &[usize],
        next: &mut [usize],
    ) -> Option<C> {
        let mut path: Vec<usize> = Vec::new();
        let mut v = s;
        loop {
            if v == t {
                let bottleneck = path
                    .iter()
                    .map(|&e| self.cap[e].clone())
                    .min()
                    .expect("path to sink is nonempty");
                for &e in &path {
                    self.cap[e] = self.cap[e].clone() - bottleneck.clone();
                    self.cap[e ^ 1] = self.cap[e ^ 1].clone() + bottleneck.clone();
                }
                return Some(bottleneck);
            }
            let mut advanced = false;
            while next[v] < self.head[v].len() {
                let e = self.head[v][next[v]];
                let w = self.to[e];
                if self.cap[e] > C::zero() && level[w] == level[v] + 1 {
                    path.push(e);
                    v = w;
                    advanced = true;
                    break;
                }
                next[v] += 1;
            }
            if !advanced {
                // dead end: retreat and skip the edge that led here
                let e = path.pop()?;
                v = self.to[e ^ 1];
                next[v] += 1;
            }
        }
    }

    fn reach(&self, start: NodeId, forward: bool) -> Vec<bool> {
        let mut seen = vec![false; self.head.len()];
        seen[start] = true;
        let mut q = VecDeque::from([start]);
        while let Some(v) = q.pop_front() {
            for &e in &self.head[v] {
                // forward: residual arc v -> to[e]; backward: residual arc to[e] -> v
                let (w, c) = if forward {
                    (self.to[e], &self.cap[e])
                } else {
                    (self.to[e], &self.cap[e ^ 1])
                };
                if !seen[w] && *c > C::zero() {
                    seen[w] = true;
                    q.push_back(w);
                }
            }
        }
        seen
    }
}

/// Result of [`FlowNetwork::max_flow`], holding the final residual graph.
#[derive(Debug, Clone)]
pub struct MaxFlow<C> {
    value: C,
    res: Residual<C>,
    source: NodeId,
    sink: NodeId,
}

impl<C: Capacity> MaxFlow<C> {
    pub fn value(&self) -> &C {
        &self.value
    }

    pub fn arc_flow(&self, arc: ArcId) -> C {
        let e = 2 * arc;
        self.res.orig[e].clone() - self.res.cap[e].clone()
    }

    pub fn arc_flows(&self) -> Vec<C> {
        (0..self.res.to.len() / 2)
            .map(|a| self.arc_flow(a))
            .collect()
    }

    /// Nodes reachable from the source in the residual graph: the source
    /// side of the inclusion-wise minimal minimum cut.
    pub fn min_cut_source_side(&self) -> Vec<bool> {
        self.res.reach(self.source, true)
    }

    /// Complement of the nodes that can still reach the sink: the source side
    /// of the inclusion-wise maximal minimum cut.
    pub fn max_cut_source_side(&self) -> Vec<bool> {
        self.res
            .reach(self.sink, false)
            .into_iter()
            .map(|reaches_sink| !reaches_sink)
            .collect()
    }
}
