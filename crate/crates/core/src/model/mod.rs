//! Domain types for one-sided matching markets: instances, prices,
//! allocations, and the elementary bundle arithmetic shared by every solver.

mod io;
mod rat;
mod scalar;

pub use io::{
    equilibrium_to_json, load_equilibrium, load_instance, load_prices, save_equilibrium,
    save_instance, EquilibriumFile,
};
pub use rat::Rat;
pub use scalar::Scalar;

use crate::error::{Error, Result};

/// An `n x n` market: `utilities[i][j]` is agent `i`'s utility for one
/// unit of good `j`. Utilities are exact rationals; negative values are
/// allowed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarketInstance {
    utilities: Vec<Vec<Rat>>,
    neg_infinity: Rat,
}

impl MarketInstance {
    /// Stand-in value for an "unacceptable" good when none is configured.
    pub const DEFAULT_NEG_INFINITY: i64 = -100;

    pub fn new(utilities: Vec<Vec<Rat>>) -> Result<Self> {
        Self::with_neg_infinity(utilities, Rat::from_int(Self::DEFAULT_NEG_INFINITY))
    }

    pub fn with_neg_infinity(utilities: Vec<Vec<Rat>>, neg_infinity: Rat) -> Result<Self> {
        let n = utilities.len();
        if n == 0 {
            return Err(Error::InvalidInstance("instance must have n >= 1".into()));
        }
        for (i, row) in utilities.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidInstance(format!(
                    "utility matrix is not square: row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
        }
        Ok(Self {
            utilities,
            neg_infinity,
        })
    }

    pub fn from_integers(rows: &[Vec<i64>]) -> Result<Self> {
        Self::new(
            rows.iter()
                .map(|r| r.iter().map(|&v| Rat::from_int(v)).collect())
                .collect(),
        )
    }

    pub fn n(&self) -> usize {
        self.utilities.len()
    }

    pub fn utility(&self, agent: usize, good: usize) -> &Rat {
        &self.utilities[agent][good]
    }

    pub fn row(&self, agent: usize) -> &[Rat] {
        &self.utilities[agent]
    }

    pub fn utilities(&self) -> &[Vec<Rat>] {
        &self.utilities
    }

    pub fn neg_infinity(&self) -> &Rat {
        &self.neg_infinity
    }

    pub fn utility_matrix<S: Scalar>(&self) -> Vec<Vec<S>> {
        self.utilities
            .iter()
            .map(|row| row.iter().map(S::from_rat).collect())
            .collect()
    }

    pub fn utility_row<S: Scalar>(&self, agent: usize) -> Vec<S> {
        self.utilities[agent].iter().map(S::from_rat).collect()
    }

    pub fn is_unit(&self) -> bool {
        self.utilities
            .iter()
            .flatten()
            .all(|u| u.is_zero() || *u == 1)
    }
}

/// Nonnegative per-good prices.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceVector<S>(Vec<S>);

impl<S: Scalar> PriceVector<S> {
    pub fn new(prices: Vec<S>) -> Result<Self> {
        if let Some((j, p)) = prices.iter().enumerate().find(|(_, p)| **p < S::zero()) {
            return Err(Error::InvalidArgument(format!(
                "negative price {p} for good {j}"
            )));
        }
        Ok(Self(prices))
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![S::zero(); n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[S] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<S> {
        self.0
    }

    pub fn min_price(&self) -> Option<S> {
        self.0.iter().cloned().reduce(S::min_of)
    }
}

impl PriceVector<Rat> {
    pub fn to_real(&self) -> PriceVector<f64> {
        PriceVector(self.0.iter().map(Rat::to_f64).collect())
    }
}

impl<S> std::ops::Index<usize> for PriceVector<S> {
    type Output = S;
    fn index(&self, j: usize) -> &S {
        &self.0[j]
    }
}

/// Matrix of probability shares `x[i][j]`.
///
/// Construction only checks the shape; whether the rows are stochastic is
/// a property the verifier reports on, so broken allocations can still be
/// represented and diagnosed.
#[derive(Debug, Clone, PartialEq)]
pub struct Allocation<S> {
    rows: Vec<Vec<S>>,
}

impl<S: Scalar> Allocation<S> {
    pub fn new(rows: Vec<Vec<S>>) -> Result<Self> {
        let n = rows.len();
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(Error::Dimension(format!(
                "allocation row {i} has {} entries, expected {n}",
                r.len()
            )));
        }
        Ok(Self { rows })
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            rows: vec![vec![S::zero(); n]; n],
        }
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn get(&self, agent: usize, good: usize) -> &S {
        &self.rows[agent][good]
    }

    pub fn set(&mut self, agent: usize, good: usize, v: S) {
        self.rows[agent][good] = v;
    }

    pub fn row(&self, agent: usize) -> &[S] {
        &self.rows[agent]
    }

    pub fn rows(&self) -> &[Vec<S>] {
        &self.rows
    }

    pub fn into_rows(self) -> Vec<Vec<S>> {
        self.rows
    }

    pub fn row_sum(&self, agent: usize) -> S {
        S::sum(&self.rows[agent])
    }

    pub fn column_sum(&self, good: usize) -> S {
        self.rows
            .iter()
            .fold(S::zero(), |acc, r| acc + r[good].clone())
    }

    /// Every row and every column sums to one (within `tol`) and no entry is
    /// negative.
    pub fn is_fractional_perfect_matching(&self, tol: &S) -> bool {
        let one = S::one();
        let n = self.n();
        self.rows.iter().flatten().all(|x| *x >= -tol.clone())
            && (0..n).all(|i| (self.row_sum(i) - one.clone()).abs() <= *tol)
            && (0..n).all(|j| (self.column_sum(j) - one.clone()).abs() <= *tol)
    }
}

impl Allocation<Rat> {
    pub fn to_real(&self) -> Allocation<f64> {
        Allocation {
            rows: self
                .rows
                .iter()
                .map(|r| r.iter().map(Rat::to_f64).collect())
                .collect(),
        }
    }
}

/// Candidate equilibrium `(x, p)`. Verification is a separate step.
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumPoint<S> {
    pub prices: PriceVector<S>,
    pub allocation: Allocation<S>,
}

impl<S: Scalar> EquilibriumPoint<S> {
    pub fn new(prices: PriceVector<S>, allocation: Allocation<S>) -> Result<Self> {
        if prices.len() != allocation.n() {
            return Err(Error::Dimension(format!(
                "{} prices for an allocation over {} goods",
                prices.len(),
                allocation.n()
            )));
        }
        Ok(Self { prices, allocation })
    }

    pub fn n(&self) -> usize {
        self.prices.len()
    }
}

impl EquilibriumPoint<Rat> {
    pub fn to_real(&self) -> EquilibriumPoint<f64> {
        EquilibriumPoint {
            prices: self.prices.to_real(),
            allocation: self.allocation.to_real(),
        }
    }
}

/// Size, cost and value of one agent's bundle.
#[derive(Debug, Clone, PartialEq)]
pub struct BundleMetrics<S> {
    pub size: S,
    pub cost: S,
    pub value: S,
}

pub fn bundle_metrics<S: Scalar>(utilities: &[S], prices: &[S], bundle: &[S]) -> BundleMetrics<S> {
    let mut m = BundleMetrics {
        size: S::zero(),
        cost: S::zero(),
        value: S::zero(),
    };
    for ((u, p), x) in utilities.iter().zip(prices).zip(bundle) {
        m.size = m.size + x.clone();
        m.cost = m.cost + p.clone() * x.clone();
        m.value = m.value + u.clone() * x.clone();
    }
    m
}

pub fn size_cost_value<S: Scalar>(
    inst: &MarketInstance,
    x: &Allocation<S>,
    p: &PriceVector<S>,
    agent: usize,
) -> Result<BundleMetrics<S>> {
    let n = inst.n();
    if x.n() != n || p.len() != n {
        return Err(Error::Dimension(format!(
            "instance has n = {n}, allocation {}, prices {}",
            x.n(),
            p.len()
        )));
    }
    if agent >= n {
        return Err(Error::Dimension(format!(
            "agent {agent} out of range for n = {n}"
        )));
    }
    Ok(bundle_metrics(
        &inst.utility_row::<S>(agent),
        p.as_slice(),
        x.row(agent),
    ))
}

/// Rescales price deviations from 1: `p'_j = r (p_j - 1) + 1`.
pub fn scale_prices<S: Scalar>(p: &PriceVector<S>, r: &S) -> Result<PriceVector<S>> {
    if *r <= S::zero() {
        return Err(Error::InvalidArgument(format!(
            "scale factor must be positive, got {r}"
        )));
    }
    let scaled = p
        .as_slice()
        .iter()
        .map(|pj| r.clone() * (pj.clone() - S::one()) + S::one())
        .collect();
    PriceVector::new(scaled)
}

/// Largest `r` for which [`scale_prices`] keeps every price nonnegative, or
/// `None` when every `r > 0` is admissible.
pub fn max_admissible_scale<S: Scalar>(p: &PriceVector<S>) -> Option<S> {
    let min = p.min_price()?;
    if min >= S::one() {
        None
    } else {
        Some(S::one() / (S::one() - min))
    }
}

/// `u'_j = s u_j + h` with `s > 0`, `h >= 0`.
pub fn equivalent_transform<S: Scalar>(row: &[S], s: &S, h: &S) -> Result<Vec<S>> {
    if *s <= S::zero() {
        return Err(Error::InvalidArgument(format!(
            "scaling factor must be positive, got {s}"
        )));
    }
    if *h < S::zero() {
        return Err(Error::InvalidArgument(format!(
            "shift must be nonnegative, got {h}"
        )));
    }
    Ok(row
        .iter()
        .map(|u| s.clone() * u.clone() + h.clone())
        .collect())
}
