//! An agent's optimal bundle at fixed prices.
//!
//! The bundle LP has one size constraint (`sum x_j = 1`) and one budget
//! constraint (`sum p_j x_j <= 1`), so some optimal vertex uses a single
//! affordable good or a pair `j, k` with `p_j < 1 < p_k` that spends exactly
//! one dollar. Both are enumerated directly, and the dual `(alpha, mu)` is
//! read off the chosen support.

use std::fmt;

use crate::error::{Error, Result};
use crate::model::{bundle_metrics, Scalar};

/// Optimal-bundle regimes, distinguished by the budget dual `alpha`, budget
/// slack, and whether the optimal goods share one utility value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BundleType {
    /// `alpha = 0`, cost < 1.
    A,
    /// `alpha = 0`, cost = 1.
    B,
    /// `alpha > 0`, all optimal goods have the same utility (and price 1).
    C,
    /// `alpha > 0`, optimal goods of different utilities, priced on both
    /// sides of 1.
    D,
    /// All utilities equal: every feasible bundle is optimal.
    Indifferent,
}

impl fmt::Display for BundleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            BundleType::A => "A",
            BundleType::B => "B",
            BundleType::C => "C",
            BundleType::D => "D",
            BundleType::Indifferent => "indifferent",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualCertificate<S> {
    pub alpha: S,
    /// Offset on the agent's utilities (dual of the size constraint).
    pub mu: S,
    pub optimal_value: S,
    pub bundle_type: BundleType,
}

impl<S: Scalar> DualCertificate<S> {
    /// `alpha p_j + mu - u_j`: zero on optimal goods, positive on suboptimal.
    pub fn reduced_cost(&self, utility: &S, price: &S) -> S {
        self.alpha.clone() * price.clone() + self.mu.clone() - utility.clone()
    }

    pub fn optimal_goods(&self, utilities: &[S], prices: &[S], tol: &S) -> Vec<usize> {
        (0..utilities.len())
            .filter(|&j| self.reduced_cost(&utilities[j], &prices[j]).abs() <= *tol)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BestResponse<S> {
    pub bundle: Vec<S>,
    pub support: Vec<usize>,
    pub certificate: DualCertificate<S>,
}

fn check_dims<S>(utilities: &[S], prices: &[S]) -> Result<()> {
    if utilities.len() != prices.len() || utilities.is_empty() {
        return Err(Error::Dimension(format!(
            "{} utilities, {} prices",
            utilities.len(),
            prices.len()
        )));
    }
    Ok(())
}

/// Goods not weakly dominated (higher-or-equal utility at lower-or-equal
/// price) by another good, from a candidate list.
fn frontier<S: Scalar>(mut goods: Vec<usize>, utilities: &[S], prices: &[S]) -> Vec<usize> {
    goods.sort_by(|&a, &b| {
        prices[a]
            .partial_cmp(&prices[b])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(
                utilities[b]
                    .partial_cmp(&utilities[a])
                    .unwrap_or(std::cmp::Ordering::Equal),
            )
            .then(a.cmp(&b))
    });
    let mut best: Option<S> = None;
    let mut kept: Vec<usize> = goods
        .into_iter()
        .filter(|&j| match &best {
            Some(b) if utilities[j] <= *b => false,
            _ => {
                best = Some(utilities[j].clone());
                true
            }
        })
        .collect();
    kept.sort_unstable();
    kept
}

/// Value of the budget-exhausting mix of a cheap good `j` and an expensive
/// good `k`, with the two shares.
fn pair_mix<S: Scalar>(uj: &S, pj: &S, uk: &S, pk: &S) -> (S, S, S) {
    let spread = pk.clone() - pj.clone();
    let xj = (pk.clone() - S::one()) / spread.clone();
    let xk = (S::one() - pj.clone()) / spread;
    let value = xj.clone() * uj.clone() + xk.clone() * uk.clone();
    (value, xj, xk)
}

pub fn best_response<S: Scalar>(utilities: &[S], prices: &[S]) -> Result<BestResponse<S>> {
    best_response_with_tol(utilities, prices, &S::default_tolerance())
}

/// Ties go to single goods before pairs, then to the lowest indices; pairs
/// are searched among undominated goods only.
pub fn best_response_with_tol<S: Scalar>(
    utilities: &[S],
    prices: &[S],
    tol: &S,
) -> Result<BestResponse<S>> {
    check_dims(utilities, prices)?;
    let n = utilities.len();
    let one = S::one();

    let mut single: Option<usize> = None;
    for j in 0..n {
        if prices[j] <= one && single.is_none_or(|s| utilities[j] > utilities[s]) {
            single = Some(j);
        }
    }
    let single = single.ok_or(Error::InfeasiblePrices)?;

    let cheap = frontier(
        (0..n).filter(|&j| prices[j] < one).collect(),
        utilities,
        prices,
    );
    let dear = frontier(
        (0..n).filter(|&j| prices[j] > one).collect(),
        utilities,
        prices,
    );
    let mut pair: Option<(usize, usize, S, S, S)> = None;
    let mut pairs: Vec<(usize, usize)> = cheap
        .iter()
        .flat_map(|&j| dear.iter().map(move |&k| (j, k)))
        .filter(|&(j, k)| utilities[k] > utilities[j])
        .collect();
    pairs.sort_unstable_by_key(|&(j, k)| (j.min(k), j.max(k)));
    for (j, k) in pairs {
        let (value, xj, xk) = pair_mix(&utilities[j], &prices[j], &utilities[k], &prices[k]);
        let best = pair.as_ref().map_or(&utilities[single], |p| &p.2);
        if value > *best {
            pair = Some((j, k, value, xj, xk));
        }
    }

    let mut bundle = vec![S::zero(); n];
    let (support, alpha, mu, value) = match pair {
        Some((j, k, value, xj, xk)) => {
            bundle[j] = xj;
            bundle[k] = xk;
            let alpha = (utilities[k].clone() - utilities[j].clone())
                / (prices[k].clone() - prices[j].clone());
            let mu = utilities[j].clone() - alpha.clone() * prices[j].clone();
            let mut support = vec![j, k];
            support.sort_unstable();
            (support, alpha, mu, value)
        }
        None => {
            let j = single;
            bundle[j] = one.clone();
            let uj = utilities[j].clone();
            let alpha = if prices[j] < one {
                S::zero()
            } else {
                // Dearer goods bound alpha from below, cheaper ones from
                // above. Strictly inside the interval only goods priced at 1
                // with utility u_j stay tight.
                let lo = (0..n)
                    .filter(|&l| prices[l] > one)
                    .map(|l| {
                        (utilities[l].clone() - uj.clone()) / (prices[l].clone() - one.clone())
                    })
                    .fold(S::zero(), S::max_of);
                let hi = (0..n)
                    .filter(|&l| prices[l] < one)
                    .map(|l| {
                        (uj.clone() - utilities[l].clone()) / (one.clone() - prices[l].clone())
                    })
                    .reduce(S::min_of);
                if lo == S::zero() {
                    lo
                } else {
                    match hi {
                        None => lo + S::one(),
                        Some(hi) if hi > lo => (lo + hi) / S::from_i64(2),
                        Some(_) => lo,
                    }
                }
            };
            let mu = uj.clone() - alpha.clone() * prices[j].clone();
            (vec![j], alpha, mu, uj)
        }
    };

    let mut certificate = DualCertificate {
        alpha,
        mu,
        optimal_value: value,
        bundle_type: BundleType::Indifferent,
    };
    check_certificate(utilities, prices, &certificate, tol)?;
    certificate.bundle_type = classify_bundle(utilities, prices, &bundle, &certificate, tol)?;
    Ok(BestResponse {
        bundle,
        support,
        certificate,
    })
}

/// Dual feasibility and strong duality.
fn check_certificate<S: Scalar>(
    utilities: &[S],
    prices: &[S],
    cert: &DualCertificate<S>,
    tol: &S,
) -> Result<()> {
    if cert.alpha < -tol.clone() {
        return Err(Error::Invariant(format!("negative alpha {}", cert.alpha)));
    }
    for (j, (u, p)) in utilities.iter().zip(prices).enumerate() {
        if cert.reduced_cost(u, p) < -tol.clone() {
            return Err(Error::Invariant(format!("dual infeasible at good {j}")));
        }
    }
    let gap = (cert.alpha.clone() + cert.mu.clone() - cert.optimal_value.clone()).abs();
    if gap > *tol {
        return Err(Error::Invariant(format!("duality gap {gap}")));
    }
    Ok(())
}

/// `best value - value(x)`, floored at zero.
pub fn optimality_gap<S: Scalar>(utilities: &[S], prices: &[S], bundle: &[S]) -> Result<S> {
    optimality_gap_with_tol(utilities, prices, bundle, &S::default_tolerance())
}

pub fn optimality_gap_with_tol<S: Scalar>(
    utilities: &[S],
    prices: &[S],
    bundle: &[S],
    tol: &S,
) -> Result<S> {
    check_dims(utilities, prices)?;
    let best = best_response_with_tol(utilities, prices, tol)?;
    let value = bundle_metrics(utilities, prices, bundle).value;
    Ok((best.certificate.optimal_value - value).pos())
}

/// Classifies an optimal bundle.
///
/// A bundle supported on maximum-utility goods is reported as A or B (the
/// `alpha = 0` certificate fits); otherwise `cert` decides between C and D.
/// An allocation that some other certificate would call C may therefore be
/// reported as B.
pub fn classify_bundle<S: Scalar>(
    utilities: &[S],
    prices: &[S],
    bundle: &[S],
    cert: &DualCertificate<S>,
    tol: &S,
) -> Result<BundleType> {
    check_dims(utilities, prices)?;
    let metrics = bundle_metrics(utilities, prices, bundle);
    let gap = (cert.optimal_value.clone() - metrics.value.clone()).abs();
    if gap > *tol || metrics.cost.clone() - S::one() > *tol {
        return Err(Error::NotOptimal {
            gap: gap.to_string(),
        });
    }
    check_certificate(utilities, prices, cert, tol)?;

    let max_u = utilities
        .iter()
        .cloned()
        .reduce(S::max_of)
        .expect("nonempty");
    if utilities
        .iter()
        .all(|u| (u.clone() - max_u.clone()).abs() <= *tol)
    {
        return Ok(BundleType::Indifferent);
    }
    let support: Vec<usize> = (0..bundle.len()).filter(|&j| bundle[j] > *tol).collect();
    if support
        .iter()
        .all(|&j| (utilities[j].clone() - max_u.clone()).abs() <= *tol)
    {
        return Ok(if metrics.cost < S::one() - tol.clone() {
            BundleType::A
        } else {
            BundleType::B
        });
    }

    if cert.alpha <= *tol {
        return Err(Error::Invariant(
            "bundle holds a non-maximal good but the certificate has alpha = 0".into(),
        ));
    }
    let optimal = cert.optimal_goods(utilities, prices, tol);
    let first = &utilities[optimal[0]];
    let one = S::one();
    if optimal
        .iter()
        .all(|&j| (utilities[j].clone() - first.clone()).abs() <= *tol)
    {
        if let Some(&j) = optimal
            .iter()
            .find(|&&j| (prices[j].clone() - one.clone()).abs() > *tol)
        {
            return Err(Error::Invariant(format!(
                "type C bundle with optimal good {j} not priced at 1"
            )));
        }
        Ok(BundleType::C)
    } else {
        let below = optimal
            .iter()
            .any(|&j| prices[j] < one.clone() - tol.clone());
        let above = optimal
            .iter()
            .any(|&j| prices[j] > one.clone() + tol.clone());
        if !(below && above) {
            return Err(Error::Invariant(
                "type D bundle without optimal goods on both sides of price 1".into(),
            ));
        }
        Ok(BundleType::D)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Rat;

    fn r(n: i64, d: i64) -> Rat {
        Rat::new(n, d)
    }

    fn ints(v: &[i64]) -> Vec<Rat> {
        v.iter().map(|&x| Rat::from_int(x)).collect()
    }

    #[test]
    fn example_one() {
        let u = ints(&[10, 2]);
        let p = vec![Rat::from_int(2), r(1, 10)];
        let br = best_response(&u, &p).unwrap();
        assert_eq!(br.bundle, vec![r(9, 19), r(10, 19)]);
        assert_eq!(br.support, vec![0, 1]);
        assert_eq!(br.certificate.optimal_value, r(110, 19));
        assert_eq!(br.certificate.alpha, r(80, 19));
        assert_eq!(br.certificate.mu, r(30, 19));
        assert_eq!(br.certificate.bundle_type, BundleType::D);
        // complementary slackness on the support, both goods optimal
        for &j in &br.support {
            assert!(br.certificate.reduced_cost(&u[j], &p[j]).is_zero());
        }
    }

    #[test]
    fn example_two() {
        let u = ints(&[10, 2]);
        let p = vec![Rat::from_int(2), r(1, 5)];
        let br = best_response(&u, &p).unwrap();
        assert_eq!(br.bundle, vec![r(4, 9), r(5, 9)]);
    }

    #[test]
    fn suboptimal_goods_are_strict() {
        let u = ints(&[10, 2, 1, 9]);
        let p = vec![Rat::from_int(2), r(1, 10), r(1, 20), Rat::from_int(3)];
        let br = best_response(&u, &p).unwrap();
        assert_eq!(br.support, vec![0, 1]);
        for j in [2, 3] {
            assert!(br.certificate.reduced_cost(&u[j], &p[j]).is_positive());
        }
    }

    #[test]
    fn slack_budget_takes_best_good() {
        let u = ints(&[3, 7, 5]);
        let p = vec![Rat::zero(), r(1, 2), Rat::one()];
        let br = best_response(&u, &p).unwrap();
        assert_eq!(br.bundle, ints(&[0, 1, 0]));
        assert_eq!(br.certificate.optimal_value, Rat::from_int(7));
        assert!(br.certificate.alpha.is_zero());
        assert_eq!(br.certificate.mu, Rat::from_int(7));
        assert_eq!(br.certificate.bundle_type, BundleType::A);
    }

    #[test]
    fn single_good_at_price_one() {
        // good 0 at price 1 beats mixing 1 and 2; alpha sits midway between
        // the bounds from good 2 (1/2) and good 1 (5)
        let u = ints(&[5, 0, 6]);
        let p = vec![Rat::one(), Rat::zero(), Rat::from_int(3)];
        let br = best_response(&u, &p).unwrap();
        assert_eq!(br.support, vec![0]);
        assert_eq!(br.certificate.alpha, r(11, 4));
        assert_eq!(br.certificate.mu, r(9, 4));
        assert_eq!(br.certificate.bundle_type, BundleType::C);
        assert_eq!(br.certificate.optimal_goods(&u, &p, &Rat::zero()), vec![0]);
    }

    #[test]
    fn mu_zero_with_free_worthless_good() {
        let u = ints(&[0, 1, 1]);
        let p = vec![Rat::zero(), Rat::from_int(2), Rat::from_int(3)];
        let br = best_response(&u, &p).unwrap();
        assert_eq!(br.support, vec![0, 1]);
        assert!(br.certificate.mu.is_zero());
        assert_eq!(br.certificate.alpha, r(1, 2));
        assert_eq!(br.certificate.bundle_type, BundleType::D);
    }

    #[test]
    fn infeasible_prices() {
        let u = ints(&[1, 2]);
        let p = vec![r(3, 2), Rat::from_int(2)];
        assert_eq!(best_response(&u, &p), Err(Error::InfeasiblePrices));
        assert!(matches!(
            best_response(&u, &p[..1]),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn gap_examples() {
        let u = ints(&[10, 2]);
        let p = vec![Rat::from_int(2), r(1, 10)];
        assert!(optimality_gap(&u, &p, &[r(9, 19), r(10, 19)])
            .unwrap()
            .is_zero());
        assert_eq!(optimality_gap(&u, &p, &ints(&[0, 1])).unwrap(), r(72, 19));
        let flat = ints(&[4, 4]);
        assert!(optimality_gap(&flat, &p, &[r(1, 3), r(2, 3)])
            .unwrap()
            .is_zero());
    }

    #[test]
    fn classify_examples() {
        let u = ints(&[10, 2]);
        let p = vec![Rat::from_int(2), r(1, 10)];
        let br = best_response(&u, &p).unwrap();
        let x = vec![r(9, 19), r(10, 19)];
        assert_eq!(
            classify_bundle(&u, &p, &x, &br.certificate, &Rat::zero()).unwrap(),
            BundleType::D
        );
        // suboptimal bundle is rejected
        assert!(matches!(
            classify_bundle(&u, &p, &ints(&[0, 1]), &br.certificate, &Rat::zero()),
            Err(Error::NotOptimal { .. })
        ));

        // unit-case agent: good at price 2 plus a free worthless good
        let u = ints(&[1, 0]);
        let p = vec![Rat::from_int(2), Rat::zero()];
        let br = best_response(&u, &p).unwrap();
        let x = vec![r(1, 2), r(1, 2)];
        assert_eq!(
            classify_bundle(&u, &p, &x, &br.certificate, &Rat::zero()).unwrap(),
            BundleType::D
        );

        // all mass on the max good, cost exactly 1
        let u = ints(&[3, 1]);
        let p = vec![Rat::one(), Rat::zero()];
        let br = best_response(&u, &p).unwrap();
        assert_eq!(br.certificate.bundle_type, BundleType::B);

        let flat = ints(&[2, 2]);
        let br = best_response(&flat, &p).unwrap();
        assert_eq!(br.certificate.bundle_type, BundleType::Indifferent);
    }

    #[test]
    fn real_mode_matches_exact() {
        let br = best_response(&[10.0, 2.0], &[2.0, 0.1]).unwrap();
        assert!((br.bundle[0] - 9.0 / 19.0).abs() < 1e-12);
        assert!((br.certificate.alpha - 80.0 / 19.0).abs() < 1e-12);
        assert!((br.certificate.mu - 30.0 / 19.0).abs() < 1e-12);
        assert_eq!(br.certificate.bundle_type, BundleType::D);
        assert!(br.certificate.reduced_cost(&2.0, &0.1).abs() < 1e-12);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        /// Vertex enumeration of the bundle LP: every single good with
        /// `p <= 1` and every two-good mix spending exactly one dollar.
        fn brute_value(u: &[Rat], p: &[Rat]) -> Option<Rat> {
            let one = Rat::one();
            let mut best: Option<Rat> = None;
            let mut consider = |v: Rat| {
                if best.as_ref().is_none_or(|b| v > *b) {
                    best = Some(v);
                }
            };
            for j in 0..u.len() {
                if p[j] <= one {
                    consider(u[j].clone());
                }
                for k in 0..u.len() {
                    if p[j] < one && p[k] > one {
                        let xj = (&p[k] - &one) / (&p[k] - &p[j]);
                        let xk = &one - &xj;
                        consider(&xj * &u[j] + &xk * &u[k]);
                    }
                }
            }
            best
        }

        fn instance() -> impl Strategy<Value = (Vec<Rat>, Vec<Rat>)> {
            (1usize..=5).prop_flat_map(|n| {
                (
                    prop::collection::vec(-10i64..10, n),
                    prop::collection::vec(0i64..12, n),
                )
                    .prop_map(|(u, p)| {
                        (
                            u.into_iter().map(Rat::from_int).collect(),
                            p.into_iter().map(|v| Rat::new(v, 4)).collect(),
                        )
                    })
            })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(400))]

            #[test]
            fn matches_vertex_enumeration((u, p) in instance()) {
                match (best_response(&u, &p), brute_value(&u, &p)) {
                    (Ok(br), Some(v)) => {
                        prop_assert_eq!(&br.certificate.optimal_value, &v);
                        let m = bundle_metrics(&u, &p, &br.bundle);
                        prop_assert_eq!(m.size, Rat::one());
                        prop_assert!(m.cost <= Rat::one());
                        prop_assert_eq!(&m.value, &v);
                        prop_assert!(br.support.len() <= 2);
                        for &j in &br.support {
                            prop_assert!(br.certificate.reduced_cost(&u[j], &p[j]).is_zero());
                        }
                    }
                    (Err(Error::InfeasiblePrices), None) => {}
                    (a, b) => prop_assert!(false, "mismatch: {:?} vs {:?}", a, b),
                }
            }

            #[test]
            fn argmax_invariant_under_equivalent_utilities(
                (u, p) in instance(), s in 1i64..6, h in 0i64..6,
            ) {
                let u2 = crate::model::equivalent_transform(&u, &Rat::from_int(s), &Rat::from_int(h)).unwrap();
                match (best_response(&u, &p), best_response(&u2, &p)) {
                    (Ok(a), Ok(b)) => prop_assert_eq!(a.bundle, b.bundle),
                    (Err(a), Err(b)) => prop_assert_eq!(a, b),
                    (a, b) => prop_assert!(false, "{:?} vs {:?}", a, b),
                }
            }
        }
    }
}
