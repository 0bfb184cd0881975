//! Exact equilibria for 0/1 utilities, and for two-valued utilities by
//! reduction.

use crate::bipartite::{
    mask, maximum_matching, minimum_vertex_cover, unit_graph, CoverDecomposition,
};
use crate::dpsv::{simplified_dpsv, DpsvOutcome};
use crate::error::{Error, Result};
use crate::model::{Allocation, EquilibriumPoint, MarketInstance, PriceVector, Rat};

#[derive(Debug, Clone)]
pub struct UnitSolution {
    pub point: EquilibriumPoint<Rat>,
    /// `None` when the graph has a perfect matching.
    pub cover: Option<CoverDecomposition>,
    pub dpsv: Option<DpsvOutcome>,
}

impl UnitSolution {
    pub fn freeze_count(&self) -> usize {
        self.dpsv.as_ref().map_or(0, |d| d.freezes.len())
    }
}

pub fn solve_unit(inst: &MarketInstance) -> Result<EquilibriumPoint<Rat>> {
    solve_unit_detailed(inst).map(|s| s.point)
}

pub fn solve_unit_detailed(inst: &MarketInstance) -> Result<UnitSolution> {
    let n = inst.n();
    let g = unit_graph(inst)?;
    let m = maximum_matching(&g);
    if m.is_perfect() {
        let mut x = Allocation::zeros(n);
        for (a, j) in m.pairs() {
            x.set(a, j, Rat::one());
        }
        return Ok(UnitSolution {
            point: EquilibriumPoint::new(PriceVector::zeros(n), x)?,
            cover: None,
            dpsv: None,
        });
    }

    let cover = minimum_vertex_cover(&g)?;
    let (a1, a2, g1, g2) = (&cover.a1, &cover.a2, &cover.g1, &cover.g2);
    if a1.len() + a2.len() != n || g1.len() + g2.len() != n {
        return Err(Error::Invariant("cover is not a partition".into()));
    }
    // |A1| - |G1| = |G2| - |A2|, and G2 is nonempty since the cover is
    // smaller than n
    if a1.len() < g1.len() || g2.is_empty() {
        return Err(Error::Invariant(format!(
            "unexpected cover sizes |A1| = {}, |G1| = {}, |G2| = {}",
            a1.len(),
            g1.len(),
            g2.len()
        )));
    }

    let mut prices = vec![Rat::zero(); n];
    let mut x = Allocation::zeros(n);
    let mut supply = vec![Rat::one(); n];
    for &a in a2 {
        let j = cover.matching.agent_to_good[a]
            .ok_or_else(|| Error::Invariant(format!("agent {a} of A2 is unmatched")))?;
        x.set(a, j, Rat::one());
        supply[j] = Rat::zero();
    }

    let outcome = simplified_dpsv(&g, a1, g1)?;
    if outcome.freezes.len() > n {
        return Err(Error::Invariant(format!(
            "{} freezes for n = {n}",
            outcome.freezes.len()
        )));
    }
    for rec in &outcome.freezes {
        for &j in &rec.goods {
            prices[j] = rec.price.clone();
        }
    }
    for (a, j, share) in outcome.shares() {
        let cur = x.get(a, j).clone();
        x.set(a, j, cur + &share);
        supply[j] -= share;
    }

    // top A1 agents up with the leftover zero-priced goods of G2
    let in_g2 = mask(n, g2);
    let mut agents = a1.iter().copied().peekable();
    for j in (0..n).filter(|&j| in_g2[j]) {
        while supply[j].is_positive() {
            let Some(&a) = agents.peek() else {
                return Err(Error::Invariant(format!(
                    "good {j} left over after filling"
                )));
            };
            let need = Rat::one() - x.row_sum(a);
            if !need.is_positive() {
                agents.next();
                continue;
            }
            let give = if need < supply[j] {
                need
            } else {
                supply[j].clone()
            };
            let cur = x.get(a, j).clone();
            x.set(a, j, cur + &give);
            supply[j] -= give;
        }
    }
    if !x.is_fractional_perfect_matching(&Rat::zero()) {
        return Err(Error::Invariant(
            "allocation is not doubly stochastic".into(),
        ));
    }

    log::debug!(
        "unit solve: |A1| = {}, |G1| = {}, {} freezes",
        a1.len(),
        g1.len(),
        outcome.freezes.len()
    );
    Ok(UnitSolution {
        point: EquilibriumPoint::new(PriceVector::new(prices)?, x)?,
        cover: Some(cover),
        dpsv: Some(outcome),
    })
}

/// Maps each row's two values `a < b` to 0 and 1; constant rows become 0.
pub fn normalize_bivalued(inst: &MarketInstance) -> Result<MarketInstance> {
    let rows = inst
        .utilities()
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut vals: Vec<&Rat> = row.iter().collect();
            vals.sort();
            vals.dedup();
            match vals.as_slice() {
                [_] => Ok(vec![Rat::zero(); row.len()]),
                [a, b] => {
                    let (a, span) = ((*a).clone(), *b - *a);
                    Ok(row.iter().map(|u| (u - &a) / &span).collect())
                }
                _ => Err(Error::NotBivalued {
                    agent: i,
                    distinct: vals.len(),
                }),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    MarketInstance::new(rows)
}

/// Equilibrium of a bivalued instance, computed on its 0/1 normalization.
pub fn solve_bivalued(inst: &MarketInstance) -> Result<EquilibriumPoint<Rat>> {
    solve_unit(&normalize_bivalued(inst)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dpsv::oracle::brute_min_ratio;
    use crate::verify::verify_equilibrium;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn r(n: i64, d: i64) -> Rat {
        Rat::new(n, d)
    }

    fn exact_ok(inst: &MarketInstance, pt: &EquilibriumPoint<Rat>) {
        let rep = verify_equilibrium(inst, pt, &Rat::zero()).unwrap();
        assert!(rep.verdict, "{:?}", rep.failures());
    }

    #[test]
    fn identity() {
        let inst = MarketInstance::from_integers(&[vec![1, 0], vec![0, 1]]).unwrap();
        let sol = solve_unit_detailed(&inst).unwrap();
        assert!(sol.cover.is_none());
        assert_eq!(sol.point.prices.as_slice(), &[Rat::zero(), Rat::zero()]);
        assert_eq!(sol.point.allocation.row(0), &[Rat::one(), Rat::zero()]);
        exact_ok(&inst, &sol.point);
    }

    #[test]
    fn two_agents_one_liked_good() {
        let inst = MarketInstance::from_integers(&[vec![1, 0], vec![1, 0]]).unwrap();
        let sol = solve_unit_detailed(&inst).unwrap();
        assert_eq!(
            sol.point.prices.as_slice(),
            &[Rat::from_int(2), Rat::zero()]
        );
        for i in 0..2 {
            assert_eq!(sol.point.allocation.row(i), &[r(1, 2), r(1, 2)]);
        }
        assert_eq!(sol.freeze_count(), 1);
        exact_ok(&inst, &sol.point);
    }

    #[test]
    fn all_zero_instance() {
        let inst = MarketInstance::from_integers(&vec![vec![0, 0, 0]; 3]).unwrap();
        let pt = solve_unit(&inst).unwrap();
        exact_ok(&inst, &pt);
        assert!(pt.prices.as_slice().iter().all(Rat::is_zero));
    }

    #[test]
    fn rejects_non_unit() {
        let inst = MarketInstance::from_integers(&[vec![2, 0], vec![0, 1]]).unwrap();
        assert!(matches!(solve_unit(&inst), Err(Error::NotUnit(_))));
    }

    fn random_unit(rng: &mut ChaCha8Rng, n: usize, density: f64) -> MarketInstance {
        let rows: Vec<Vec<i64>> = (0..n)
            .map(|_| (0..n).map(|_| i64::from(rng.gen_bool(density))).collect())
            .collect();
        MarketInstance::from_integers(&rows).unwrap()
    }

    #[test]
    fn random_unit_instances_verify_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let n = rng.gen_range(1..=6);
            let density = rng.gen_range(0.1..0.7);
            let inst = random_unit(&mut rng, n, density);
            let sol = solve_unit_detailed(&inst).unwrap();
            exact_ok(&inst, &sol.point);
            assert!(sol
                .point
                .allocation
                .is_fractional_perfect_matching(&Rat::zero()));
            assert!(sol.freeze_count() <= n);
            assert_eq!(sol.point.prices.min_price(), Some(Rat::zero()));
            if let (Some(cover), Some(dpsv)) = (&sol.cover, &sol.dpsv) {
                assert_eq!(
                    cover.a1.len() as i64 - cover.g1.len() as i64,
                    cover.g2.len() as i64 - cover.a2.len() as i64
                );
                let g = unit_graph(&inst).unwrap();
                for rec in &dpsv.freezes {
                    let (ratio, goods) =
                        brute_min_ratio(&g, &rec.active_before, &rec.remaining_before);
                    assert_eq!(rec.price, ratio);
                    assert_eq!(rec.goods, goods);
                }
            }
        }
    }

    #[test]
    fn bivalued_rows() {
        let inst =
            MarketInstance::from_integers(&[vec![2, 5, 2], vec![5, 2, 2], vec![7, 7, 7]]).unwrap();
        let norm = normalize_bivalued(&inst).unwrap();
        assert_eq!(norm.row(0), &[Rat::zero(), Rat::one(), Rat::zero()]);
        assert_eq!(norm.row(2), &[Rat::zero(), Rat::zero(), Rat::zero()]);
        let pt = solve_bivalued(&inst).unwrap();
        exact_ok(&inst, &pt);
        exact_ok(&norm, &pt);
    }

    #[test]
    fn bivalued_on_unit_is_identity() {
        let inst =
            MarketInstance::from_integers(&[vec![1, 1, 0], vec![1, 0, 0], vec![1, 0, 0]]).unwrap();
        assert_eq!(solve_bivalued(&inst).unwrap(), solve_unit(&inst).unwrap());
    }

    #[test]
    fn trivalued_rejected() {
        let inst =
            MarketInstance::from_integers(&[vec![0, 1, 2], vec![0, 0, 0], vec![1, 1, 1]]).unwrap();
        assert_eq!(
            solve_bivalued(&inst),
            Err(Error::NotBivalued {
                agent: 0,
                distinct: 3
            })
        );
    }

    #[test]
    fn random_bivalued_verify_against_original() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let n = rng.gen_range(1..=6);
            let rows: Vec<Vec<Rat>> = (0..n)
                .map(|_| {
                    let a = Rat::new(rng.gen_range(-5i64..5), rng.gen_range(1..4));
                    let b = &a + &Rat::new(rng.gen_range(1i64..6), rng.gen_range(1..4));
                    (0..n)
                        .map(|_| {
                            if rng.gen_bool(0.4) {
                                b.clone()
                            } else {
                                a.clone()
                            }
                        })
                        .collect()
                })
                .collect();
            let inst = MarketInstance::new(rows).unwrap();
            let pt = solve_bivalued(&inst).unwrap();
            exact_ok(&inst, &pt);
        }
    }
}
