//! Equilibrium verification.

use serde_json::{json, Value};

use crate::bundle::{best_response, optimality_gap_with_tol};
use crate::error::{Error, Result};
use crate::model::{bundle_metrics, scale_prices, EquilibriumPoint, MarketInstance, Rat, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumReport<S> {
    /// `|sum_i x_ij - 1|` per good.
    pub clearing_residuals: Vec<S>,
    /// `|sum_j x_ij - 1|` per agent.
    pub size_residuals: Vec<S>,
    /// Most negative share, or zero.
    pub min_share: S,
    pub min_price: S,
    /// `max_i (cost_i - 1)_+`.
    pub max_cost_overshoot: S,
    /// `None` when the agent's LP has no feasible bundle at these prices.
    pub optimality_gaps: Vec<Option<S>>,
    pub tolerance: S,
    pub verdict: bool,
}

impl<S: Scalar> EquilibriumReport<S> {
    /// Human-readable reasons the verdict is false.
    pub fn failures(&self) -> Vec<String> {
        let tol = &self.tolerance;
        let mut out = Vec::new();
        for (j, r) in self.clearing_residuals.iter().enumerate() {
            if r > tol {
                out.push(format!("good {j}: clearing residual {r}"));
            }
        }
        for (i, r) in self.size_residuals.iter().enumerate() {
            if r > tol {
                out.push(format!("agent {i}: size residual {r}"));
            }
        }
        if self.min_share < -tol.clone() {
            out.push(format!("negative share {}", self.min_share));
        }
        if self.min_price < -tol.clone() {
            out.push(format!("negative price {}", self.min_price));
        }
        if self.max_cost_overshoot > *tol {
            out.push(format!("budget exceeded by {}", self.max_cost_overshoot));
        }
        for (i, g) in self.optimality_gaps.iter().enumerate() {
            match g {
                None => out.push(format!("agent {i}: no affordable bundle")),
                Some(g) if g > tol => out.push(format!("agent {i}: optimality gap {g}")),
                _ => {}
            }
        }
        out
    }

    pub fn max_optimality_gap(&self) -> Option<S> {
        self.optimality_gaps
            .iter()
            .try_fold(S::zero(), |acc, g| g.clone().map(|g| S::max_of(acc, g)))
    }

    pub fn to_json(&self) -> Value {
        let list = |v: &[S]| Value::Array(v.iter().map(Scalar::to_json).collect());
        json!({
            "verdict": self.verdict,
            "tolerance": self.tolerance.to_json(),
            "clearing_residuals": list(&self.clearing_residuals),
            "size_residuals": list(&self.size_residuals),
            "min_share": self.min_share.to_json(),
            "min_price": self.min_price.to_json(),
            "max_cost_overshoot": self.max_cost_overshoot.to_json(),
            "optimality_gaps": self
                .optimality_gaps
                .iter()
                .map(|g| g.as_ref().map_or(Value::Null, Scalar::to_json))
                .collect::<Vec<_>>(),
            "failures": self.failures(),
        })
    }
}

/// Checks market clearing, unit sizes, nonnegativity, budgets and bundle
/// optimality. Failures are reported in the result; only a dimension
/// mismatch is an error. Use `tol = 0` with [`Rat`] for an exact check.
pub fn verify_equilibrium<S: Scalar>(
    inst: &MarketInstance,
    point: &EquilibriumPoint<S>,
    tol: &S,
) -> Result<EquilibriumReport<S>> {
    let n = inst.n();
    if point.n() != n {
        return Err(Error::Dimension(format!(
            "instance has n = {n}, point has n = {}",
            point.n()
        )));
    }
    if *tol < S::zero() {
        return Err(Error::InvalidArgument(format!("negative tolerance {tol}")));
    }
    let x = &point.allocation;
    let p = point.prices.as_slice();
    let one = S::one();
    let utilities = inst.utility_matrix::<S>();

    let clearing_residuals = (0..n)
        .map(|j| (x.column_sum(j) - one.clone()).abs())
        .collect();
    let size_residuals = (0..n).map(|i| (x.row_sum(i) - one.clone()).abs()).collect();
    let min_share = x
        .rows()
        .iter()
        .flatten()
        .cloned()
        .fold(S::zero(), S::min_of);
    let min_price = p.iter().cloned().fold(S::zero(), S::min_of);

    let mut max_cost_overshoot = S::zero();
    let mut optimality_gaps = Vec::with_capacity(n);
    for (i, u) in utilities.iter().enumerate() {
        let m = bundle_metrics(u, p, x.row(i));
        max_cost_overshoot = S::max_of(max_cost_overshoot, (m.cost - one.clone()).pos());
        optimality_gaps.push(optimality_gap_with_tol(u, p, x.row(i), tol).ok());
    }

    let mut report = EquilibriumReport {
        clearing_residuals,
        size_residuals,
        min_share,
        min_price,
        max_cost_overshoot,
        optimality_gaps,
        tolerance: tol.clone(),
        verdict: false,
    };
    report.verdict = report.failures().is_empty();
    Ok(report)
}

/// Verifies `point` with its prices rescaled by `r` around 1.
pub fn check_scale_invariance<S: Scalar>(
    inst: &MarketInstance,
    point: &EquilibriumPoint<S>,
    r: &S,
    tol: &S,
) -> Result<bool> {
    let prices = scale_prices(&point.prices, r)?;
    let scaled = EquilibriumPoint::new(prices, point.allocation.clone())?;
    Ok(verify_equilibrium(inst, &scaled, tol)?.verdict)
}

#[derive(Debug, Clone, PartialEq)]
pub struct WgsViolation {
    pub utilities: Vec<Rat>,
    pub prices_before: Vec<Rat>,
    pub prices_after: Vec<Rat>,
    pub demand_before: Vec<Rat>,
    pub demand_after: Vec<Rat>,
}

/// Raising the price of the cheap good lowers demand for the expensive one.
pub fn demonstrate_wgs_violation() -> Result<WgsViolation> {
    let utilities = vec![Rat::from_int(10), Rat::from_int(2)];
    let prices_before = vec![Rat::from_int(2), Rat::new(1, 10)];
    let prices_after = vec![Rat::from_int(2), Rat::new(1, 5)];
    let demand_before = best_response(&utilities, &prices_before)?.bundle;
    let demand_after = best_response(&utilities, &prices_after)?.bundle;
    if demand_after[0] >= demand_before[0] {
        return Err(Error::Invariant(format!(
            "demand for good 0 did not drop: {} -> {}",
            demand_before[0], demand_after[0]
        )));
    }
    Ok(WgsViolation {
        utilities,
        prices_before,
        prices_after,
        demand_before,
        demand_after,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Allocation, PriceVector};

    fn r(n: i64, d: i64) -> Rat {
        Rat::new(n, d)
    }

    fn point(p: Vec<Rat>, x: Vec<Vec<Rat>>) -> EquilibriumPoint<Rat> {
        EquilibriumPoint::new(PriceVector::new(p).unwrap(), Allocation::new(x).unwrap()).unwrap()
    }

    fn two_agent_unit() -> (MarketInstance, EquilibriumPoint<Rat>) {
        let inst = MarketInstance::from_integers(&[vec![1, 0], vec![1, 0]]).unwrap();
        let half = r(1, 2);
        let eq = point(
            vec![Rat::from_int(2), Rat::zero()],
            vec![vec![half.clone(), half.clone()], vec![half.clone(), half]],
        );
        (inst, eq)
    }

    #[test]
    fn identity_instance() {
        let inst = MarketInstance::from_integers(&[vec![1, 0], vec![0, 1]]).unwrap();
        let eq = point(
            vec![Rat::zero(), Rat::zero()],
            vec![vec![Rat::one(), Rat::zero()], vec![Rat::zero(), Rat::one()]],
        );
        let rep = verify_equilibrium(&inst, &eq, &Rat::zero()).unwrap();
        assert!(rep.verdict, "{:?}", rep.failures());
        assert_eq!(rep.max_optimality_gap(), Some(Rat::zero()));
    }

    #[test]
    fn unit_example_and_scaling() {
        let (inst, eq) = two_agent_unit();
        assert!(
            verify_equilibrium(&inst, &eq, &Rat::zero())
                .unwrap()
                .verdict
        );
        assert!(check_scale_invariance(&inst, &eq, &r(1, 2), &Rat::zero()).unwrap());
        assert!(check_scale_invariance(&inst, &eq, &Rat::one(), &Rat::zero()).unwrap());
        let scaled = scale_prices(&eq.prices, &r(1, 2)).unwrap();
        assert_eq!(scaled.as_slice(), &[r(3, 2), r(1, 2)]);
        // r = 2 drives the free good to -1
        assert!(check_scale_invariance(&inst, &eq, &Rat::from_int(2), &Rat::zero()).is_err());
    }

    #[test]
    fn failures_are_reported() {
        let (inst, eq) = two_agent_unit();
        // price too low: agents would buy only good 0, cost fine but gap > 0
        let cheap = point(
            vec![Rat::one(), Rat::zero()],
            eq.allocation.clone().into_rows(),
        );
        let rep = verify_equilibrium(&inst, &cheap, &Rat::zero()).unwrap();
        assert!(!rep.verdict);
        assert_eq!(rep.optimality_gaps[0], Some(r(1, 2)));

        // overspending agent
        let dear = point(
            vec![Rat::from_int(3), Rat::zero()],
            eq.allocation.clone().into_rows(),
        );
        let rep = verify_equilibrium(&inst, &dear, &Rat::zero()).unwrap();
        assert_eq!(rep.max_cost_overshoot, r(1, 2));
        assert!(!rep.verdict);

        // uncleared market
        let lopsided = point(
            vec![Rat::zero(), Rat::zero()],
            vec![vec![Rat::one(), Rat::zero()], vec![Rat::one(), Rat::zero()]],
        );
        let rep = verify_equilibrium(&inst, &lopsided, &Rat::zero()).unwrap();
        assert_eq!(rep.clearing_residuals, vec![Rat::one(), Rat::one()]);
        assert!(!rep.verdict);
        assert!(rep.failures().iter().any(|f| f.contains("clearing")));

        // every price above 1
        let broke = point(
            vec![Rat::from_int(2), Rat::from_int(2)],
            eq.allocation.into_rows(),
        );
        let rep = verify_equilibrium(&inst, &broke, &Rat::zero()).unwrap();
        assert_eq!(rep.optimality_gaps, vec![None, None]);
        assert_eq!(rep.max_optimality_gap(), None);
    }

    #[test]
    fn dimension_mismatch() {
        let (_, eq) = two_agent_unit();
        let inst = MarketInstance::from_integers(&[vec![1]]).unwrap();
        assert!(matches!(
            verify_equilibrium(&inst, &eq, &Rat::zero()),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn real_mode_tolerance() {
        let (inst, eq) = two_agent_unit();
        let mut real = eq.to_real();
        let rows: Vec<Vec<f64>> = real
            .allocation
            .rows()
            .iter()
            .map(|row| row.iter().map(|v| v + 1e-11).collect())
            .collect();
        real.allocation = Allocation::new(rows).unwrap();
        assert!(verify_equilibrium(&inst, &real, &1e-9).unwrap().verdict);
        assert!(!verify_equilibrium(&inst, &real, &1e-12).unwrap().verdict);
    }

    #[test]
    fn wgs_demo() {
        let demo = demonstrate_wgs_violation().unwrap();
        assert_eq!(demo.demand_before, vec![r(9, 19), r(10, 19)]);
        assert_eq!(demo.demand_after, vec![r(4, 9), r(5, 9)]);
        assert!(demo.demand_after[0] < demo.demand_before[0]);
        assert_eq!(demo.prices_before[0], demo.prices_after[0]);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        /// Direct check of the equilibrium conditions, with each agent's
        /// optimum found by enumerating every vertex of the bundle LP.
        fn brute_is_equilibrium(u: &[Vec<Rat>], p: &[Rat], x: &[Vec<Rat>]) -> bool {
            let n = u.len();
            let one = Rat::one();
            if p.iter().any(|v| v.is_negative()) || x.iter().flatten().any(|v| v.is_negative()) {
                return false;
            }
            for k in 0..n {
                let col: Rat = x.iter().map(|row| row[k].clone()).sum();
                let row: Rat = x[k].iter().cloned().sum();
                if col != one || row != one {
                    return false;
                }
            }
            for i in 0..n {
                let cost: Rat = (0..n).map(|j| &p[j] * &x[i][j]).sum();
                let value: Rat = (0..n).map(|j| &u[i][j] * &x[i][j]).sum();
                if cost > one {
                    return false;
                }
                let mut best: Option<Rat> = None;
                for j in 0..n {
                    if p[j] <= one {
                        best = Some(best.map_or(u[i][j].clone(), |b| {
                            if u[i][j] > b {
                                u[i][j].clone()
                            } else {
                                b
                            }
                        }));
                    }
                    for k in 0..n {
                        if p[j] < one && p[k] > one {
                            let xj = (&p[k] - &one) / (&p[k] - &p[j]);
                            let v = &xj * &u[i][j] + (&one - &xj) * &u[i][k];
                            best = Some(best.map_or(v.clone(), |b| if v > b { v } else { b }));
                        }
                    }
                }
                match best {
                    Some(b) if b == value => {}
                    _ => return false,
                }
            }
            true
        }

        /// Small instances with candidate points built from doubly
        /// stochastic mixtures of permutations and coarse prices, so that
        /// true equilibria show up with useful frequency.
        fn candidate() -> impl Strategy<Value = (Vec<Vec<Rat>>, Vec<Rat>, Vec<Vec<Rat>>)> {
            (1usize..=4).prop_flat_map(|n| {
                (
                    prop::collection::vec(prop::collection::vec(0i64..3, n), n),
                    prop::collection::vec(0i64..5, n),
                    prop::collection::vec(Just((0..n).collect::<Vec<_>>()).prop_shuffle(), 2),
                    0i64..=2,
                )
                    .prop_map(move |(u, p, perms, w)| {
                        let u: Vec<Vec<Rat>> = u
                            .into_iter()
                            .map(|row| row.into_iter().map(Rat::from_int).collect())
                            .collect();
                        let p: Vec<Rat> = p.into_iter().map(|v| Rat::new(v, 2)).collect();
                        let w = Rat::new(w, 2);
                        let mut x = vec![vec![Rat::zero(); n]; n];
                        for i in 0..n {
                            x[i][perms[0][i]] += w.clone();
                            x[i][perms[1][i]] += Rat::one() - w.clone();
                        }
                        (u, p, x)
                    })
            })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(500))]

            #[test]
            fn agrees_with_direct_check((u, p, x) in candidate()) {
                let inst = MarketInstance::new(u.clone()).unwrap();
                let pt = point(p.clone(), x.clone());
                let rep = verify_equilibrium(&inst, &pt, &Rat::zero()).unwrap();
                prop_assert_eq!(rep.verdict, brute_is_equilibrium(&u, &p, &x));
                // scale invariance for admissible r
                if rep.verdict {
                    prop_assert!(check_scale_invariance(&inst, &pt, &r(1, 2), &Rat::zero()).unwrap());
                    if let Some(cap) = crate::model::max_admissible_scale(&pt.prices) {
                        let r2 = if cap < Rat::from_int(2) { cap } else { Rat::from_int(2) };
                        prop_assert!(check_scale_invariance(&inst, &pt, &r2, &Rat::zero()).unwrap());
                    }
                }
            }
        }
    }
}
