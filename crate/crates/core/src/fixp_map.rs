//! A continuous map on `D = [0, n]^n x (row-stochastic matrices)` whose fixed
//! points are exactly equilibria, and a damped iteration that searches for
//! them.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::model::{Allocation, EquilibriumPoint, MarketInstance, PriceVector, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub struct DomainPoint<S> {
    pub prices: Vec<S>,
    /// `allocation[i][j]`, agent by good.
    pub allocation: Vec<Vec<S>>,
}

impl<S: Scalar> DomainPoint<S> {
    /// Checks shape only; see [`DomainPoint::check_domain`].
    pub fn new(prices: Vec<S>, allocation: Vec<Vec<S>>) -> Result<Self> {
        let n = prices.len();
        if allocation.len() != n || allocation.iter().any(|r| r.len() != n) {
            return Err(Error::Dimension(format!(
                "{n} prices but allocation is not {n} x {n}"
            )));
        }
        Ok(DomainPoint { prices, allocation })
    }

    pub fn n(&self) -> usize {
        self.prices.len()
    }

    /// Prices in `[0, n]`, shares nonnegative, rows summing to 1, each up to
    /// `tol`.
    pub fn check_domain(&self, tol: &S) -> Result<()> {
        let n = self.n();
        let cap = S::from_usize(n);
        for (j, p) in self.prices.iter().enumerate() {
            if *p < -tol.clone() || p.clone() - cap.clone() > *tol {
                return Err(Error::Precondition(format!(
                    "price {j} = {p} outside [0, {n}]"
                )));
            }
        }
        for (i, row) in self.allocation.iter().enumerate() {
            if let Some(v) = row.iter().find(|v| **v < -tol.clone()) {
                return Err(Error::Precondition(format!(
                    "agent {i} has negative share {v}"
                )));
            }
            let s = S::sum(row);
            if (s.clone() - S::one()).abs() > *tol {
                return Err(Error::Precondition(format!("agent {i} has size {s}")));
            }
        }
        Ok(())
    }

    /// Infinity norm of `self - other`.
    pub fn distance(&self, other: &DomainPoint<S>) -> S {
        let prices = self.prices.iter().zip(&other.prices);
        let shares = self
            .allocation
            .iter()
            .flatten()
            .zip(other.allocation.iter().flatten());
        prices
            .chain(shares)
            .map(|(a, b)| (a.clone() - b.clone()).abs())
            .fold(S::zero(), S::max_of)
    }

    /// `(1 - gamma) self + gamma other`.
    pub fn blend(&self, other: &DomainPoint<S>, gamma: &S) -> DomainPoint<S> {
        let keep = S::one() - gamma.clone();
        let mix = |a: &S, b: &S| keep.clone() * a.clone() + gamma.clone() * b.clone();
        DomainPoint {
            prices: self
                .prices
                .iter()
                .zip(&other.prices)
                .map(|(a, b)| mix(a, b))
                .collect(),
            allocation: self
                .allocation
                .iter()
                .zip(&other.allocation)
                .map(|(ra, rb)| ra.iter().zip(rb).map(|(a, b)| mix(a, b)).collect())
                .collect(),
        }
    }

    pub fn to_equilibrium(&self) -> Result<EquilibriumPoint<S>> {
        let prices = self
            .prices
            .iter()
            .map(|p| S::max_of(p.clone(), S::zero()))
            .collect();
        EquilibriumPoint::new(
            PriceVector::new(prices)?,
            Allocation::new(self.allocation.clone())?,
        )
    }

    pub fn to_json(&self) -> Value {
        json!({
            "prices": self.prices.iter().map(Scalar::to_json).collect::<Vec<_>>(),
            "allocation": self
                .allocation
                .iter()
                .map(|r| r.iter().map(Scalar::to_json).collect::<Vec<_>>())
                .collect::<Vec<_>>(),
        })
    }
}

impl<S: Scalar> From<&EquilibriumPoint<S>> for DomainPoint<S> {
    fn from(p: &EquilibriumPoint<S>) -> Self {
        DomainPoint {
            prices: p.prices.as_slice().to_vec(),
            allocation: p.allocation.rows().to_vec(),
        }
    }
}

/// Uniform prices on `[0, n]` and rows drawn uniformly from the simplex.
pub fn random_domain_point<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DomainPoint<f64> {
    let prices = (0..n).map(|_| rng.gen::<f64>() * n as f64).collect();
    let allocation = (0..n)
        .map(|_| {
            let e: Vec<f64> = (0..n).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
            let total: f64 = e.iter().sum();
            e.into_iter().map(|v| v / total).collect()
        })
        .collect();
    DomainPoint { prices, allocation }
}

/// The map `F = (F_p, F_1, ..., F_n)` for one instance.
#[derive(Debug, Clone)]
pub struct BrouwerMap<S> {
    utilities: Vec<Vec<S>>,
    /// Lowest-index maximum-utility good per agent.
    top: Vec<usize>,
    /// Maximum-utility goods per agent.
    best: Vec<Vec<bool>>,
}

impl<S: Scalar> BrouwerMap<S> {
    pub fn new(inst: &MarketInstance) -> Self {
        let utilities = inst.utility_matrix::<S>();
        let mut top = Vec::with_capacity(utilities.len());
        let mut best = Vec::with_capacity(utilities.len());
        for row in &utilities {
            let mut t = 0;
            for (j, u) in row.iter().enumerate() {
                if *u > row[t] {
                    t = j;
                }
            }
            best.push(row.iter().map(|u| *u == row[t]).collect());
            top.push(t);
        }
        BrouwerMap {
            utilities,
            top,
            best,
        }
    }

    pub fn n(&self) -> usize {
        self.utilities.len()
    }

    pub fn top_good(&self, agent: usize) -> usize {
        self.top[agent]
    }

    fn check(&self, point: &DomainPoint<S>) -> Result<()> {
        if point.n() != self.n() {
            return Err(Error::Dimension(format!(
                "map has n = {}, point has n = {}",
                self.n(),
                point.n()
            )));
        }
        Ok(())
    }

    /// Raise over-demanded prices, lower under-demanded ones, clamp to
    /// `[0, n]`, then shift so the cheapest good is free.
    pub fn apply_f_p(&self, point: &DomainPoint<S>) -> Result<Vec<S>> {
        self.check(point)?;
        let n = self.n();
        let cap = S::from_usize(n);
        let mut p: Vec<S> = (0..n)
            .map(|j| {
                let demand = S::sum(point.allocation.iter().map(|row| &row[j]));
                let moved = point.prices[j].clone() + demand - S::one();
                S::min_of(cap.clone(), moved.pos())
            })
            .collect();
        let r = p.iter().cloned().reduce(S::min_of).expect("n >= 1");
        for pj in &mut p {
            *pj = pj.clone() - r.clone();
        }
        Ok(p)
    }

    /// One agent's row update. Steps run in order, each on the current row:
    /// rebalance toward cheap goods when overspending, drain non-top goods
    /// into the top good when underspending, shift mass from a dearer good
    /// to a weakly better cheaper one, then split or merge utility triples
    /// that sit off the price-utility line.
    pub fn apply_f_i(&self, point: &DomainPoint<S>, agent: usize) -> Result<Vec<S>> {
        self.check(point)?;
        let n = self.n();
        if agent >= n {
            return Err(Error::Dimension(format!(
                "agent {agent} out of range for n = {n}"
            )));
        }
        let u = &self.utilities[agent];
        let p = &point.prices;
        let mut x = point.allocation[agent].clone();
        let one = S::one();
        let nn = S::from_usize(n * n);
        let cost = |x: &[S]| {
            S::sum(
                p.iter()
                    .zip(x)
                    .map(|(a, b)| a.clone() * b.clone())
                    .collect::<Vec<_>>()
                    .iter(),
            )
        };

        // 1-2
        let r = (cost(&x) - one.clone()).pos();
        let room: Vec<S> = p
            .iter()
            .map(|pj| (one.clone() - pj.clone()).pos())
            .collect();
        let denom = one.clone() + r.clone() * S::sum(&room);
        for j in 0..n {
            x[j] = (x[j].clone() + r.clone() * room[j].clone()) / denom.clone();
        }

        // 3-4
        let t = (one.clone() - cost(&x)).pos();
        let step = t / nn.clone();
        let star = self.top[agent];
        for k in 0..n {
            if self.best[agent][k] {
                continue;
            }
            let d = S::min_of(x[k].clone(), step.clone());
            x[k] = x[k].clone() - d.clone();
            x[star] = x[star].clone() + d;
        }

        // 5
        for j in 0..n {
            for k in 0..n {
                if j == k || u[j] > u[k] {
                    continue;
                }
                let d = S::min_of(x[j].clone(), (p[j].clone() - p[k].clone()).pos()) / nn.clone();
                x[j] = x[j].clone() - d.clone();
                x[k] = x[k].clone() + d;
            }
        }

        // 6
        let triples = self.triples(agent);
        for &(j, k, l) in &triples {
            let (wj, wl) = weights(u, j, k, l);
            let excess = (u[l].clone() - u[k].clone()) * (p[k].clone() - p[j].clone())
                - (u[k].clone() - u[j].clone()) * (p[l].clone() - p[k].clone());
            let d = S::min_of(x[k].clone(), excess.pos());
            x[k] = x[k].clone() - d.clone();
            x[j] = x[j].clone() + wj * d.clone();
            x[l] = x[l].clone() + wl * d;
        }

        // 7
        for &(j, k, l) in &triples {
            let (wj, wl) = weights(u, j, k, l);
            let excess = (u[k].clone() - u[j].clone()) * (p[l].clone() - p[k].clone())
                - (u[l].clone() - u[k].clone()) * (p[k].clone() - p[j].clone());
            let d = S::min_of(S::min_of(x[j].clone(), x[l].clone()), excess.pos());
            x[k] = x[k].clone() + d.clone();
            x[j] = x[j].clone() - wj * d.clone();
            x[l] = x[l].clone() - wl * d;
        }
        Ok(x)
    }

    /// Index triples with `u_j < u_k < u_l`, in lexicographic order.
    fn triples(&self, agent: usize) -> Vec<(usize, usize, usize)> {
        let u = &self.utilities[agent];
        let n = self.n();
        let mut out = Vec::new();
        for j in 0..n {
            for k in 0..n {
                if u[j] >= u[k] {
                    continue;
                }
                for l in 0..n {
                    if u[k] < u[l] {
                        out.push((j, k, l));
                    }
                }
            }
        }
        out
    }

    pub fn apply_f(&self, point: &DomainPoint<S>) -> Result<DomainPoint<S>> {
        let prices = self.apply_f_p(point)?;
        let allocation = (0..self.n())
            .map(|i| self.apply_f_i(point, i))
            .collect::<Result<Vec<_>>>()?;
        Ok(DomainPoint { prices, allocation })
    }

    /// `|F(z) - z|_inf`.
    pub fn residual(&self, point: &DomainPoint<S>) -> Result<S> {
        Ok(self.apply_f(point)?.distance(point))
    }
}

/// Split weights of `k` between `j` and `l`.
fn weights<S: Scalar>(u: &[S], j: usize, k: usize, l: usize) -> (S, S) {
    let span = u[l].clone() - u[j].clone();
    (
        (u[l].clone() - u[k].clone()) / span.clone(),
        (u[k].clone() - u[j].clone()) / span,
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceStep {
    pub point: DomainPoint<f64>,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationTrace {
    pub seed: Option<u64>,
    pub gamma: f64,
    /// Every visited point with its residual, start first.
    pub steps: Vec<TraceStep>,
    pub converged: bool,
}

impl IterationTrace {
    pub fn best(&self) -> &TraceStep {
        self.steps
            .iter()
            .min_by(|a, b| a.residual.total_cmp(&b.residual))
            .expect("trace has at least the start point")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationConfig {
    pub gamma: f64,
    pub tol: f64,
    pub max_steps: usize,
}

impl Default for IterationConfig {
    fn default() -> Self {
        IterationConfig {
            gamma: 0.1,
            tol: 1e-10,
            max_steps: 2000,
        }
    }
}

impl IterationConfig {
    fn check(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "damping must lie in (0, 1], got {}",
                self.gamma
            )));
        }
        if self.tol.is_nan() || self.tol < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "bad tolerance {}",
                self.tol
            )));
        }
        Ok(())
    }
}

/// `z <- (1 - gamma) z + gamma F(z)` until the residual drops below `tol` or
/// `max_steps` updates have been made.
pub fn iterate(
    map: &BrouwerMap<f64>,
    start: DomainPoint<f64>,
    cfg: &IterationConfig,
) -> Result<IterationTrace> {
    cfg.check()?;
    let mut steps = Vec::new();
    let mut z = start;
    loop {
        let fz = map.apply_f(&z)?;
        let residual = fz.distance(&z);
        let done = residual < cfg.tol;
        let next = z.blend(&fz, &cfg.gamma);
        steps.push(TraceStep { point: z, residual });
        if done || steps.len() > cfg.max_steps {
            log::debug!(
                "iteration stopped after {} points, residual {residual}",
                steps.len()
            );
            return Ok(IterationTrace {
                seed: None,
                gamma: cfg.gamma,
                steps,
                converged: done,
            });
        }
        z = next;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig {
    pub iteration: IterationConfig,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            iteration: IterationConfig::default(),
            restarts: 32,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SearchOutcome {
    /// Given starts first, then random restarts in order.
    pub traces: Vec<IterationTrace>,
}

impl SearchOutcome {
    pub fn best(&self) -> &TraceStep {
        self.traces
            .iter()
            .map(IterationTrace::best)
            .min_by(|a, b| a.residual.total_cmp(&b.residual))
            .expect("at least one trace")
    }

    /// Every visited point with residual below `tol`.
    pub fn points_below(&self, tol: f64) -> impl Iterator<Item = &TraceStep> {
        self.traces
            .iter()
            .flat_map(|t| t.steps.iter())
            .filter(move |s| s.residual < tol)
    }
}

/// Runs [`iterate`] from each given start and from `restarts` random points
/// in parallel. Restart `r` draws its start from ChaCha stream `r` of
/// `seed`, so the outcome does not depend on scheduling.
pub fn search(
    map: &BrouwerMap<f64>,
    starts: Vec<DomainPoint<f64>>,
    cfg: &SearchConfig,
) -> Result<SearchOutcome> {
    cfg.iteration.check()?;
    if starts.is_empty() && cfg.restarts == 0 {
        return Err(Error::InvalidArgument("no starting points".into()));
    }
    let n = map.n();
    let seeded: Vec<(Option<u64>, DomainPoint<f64>)> = starts
        .into_iter()
        .map(|s| (None, s))
        .chain((0..cfg.restarts as u64).map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(r);
            (Some(r), random_domain_point(&mut rng, n))
        }))
        .collect();
    let traces = seeded
        .into_par_iter()
        .map(|(seed, start)| {
            let mut t = iterate(map, start, &cfg.iteration)?;
            t.seed = seed;
            Ok(t)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SearchOutcome { traces })
}
