//! Simplified DPSV price-raising on a 0/1 submarket.
//!
//! Prices of active goods start at 1 and rise uniformly. A set `S` of
//! active goods goes tight when its total price equals the number of
//! still-unserved agents interested in it; the maximal such set is frozen at
//! that price and its agents spend their whole dollar on it. Because the
//! utilities are 0/1, frozen sets never thaw, so there are at most
//! `|goods|` events.

use num_integer::Integer;

use crate::bipartite::{mask, BipartiteGraph};
use crate::error::{Error, Result};
use crate::flownet::FlowNetwork;
use crate::model::Rat;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TightSet {
    /// `min |N(S) ∩ remaining| / |S|` over nonempty `S ⊆ active`.
    pub ratio: Rat,
    /// Inclusion-wise maximal minimizer, sorted.
    pub goods: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MoneyFlow {
    pub agent: usize,
    pub good: usize,
    pub dollars: Rat,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FreezeRecord {
    pub goods: Vec<usize>,
    pub price: Rat,
    /// Agents served by this set: its neighbors that were still unserved.
    pub agents: Vec<usize>,
    pub flows: Vec<MoneyFlow>,
    /// Active goods and unserved agents just before this event.
    pub active_before: Vec<usize>,
    pub remaining_before: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DpsvOutcome {
    pub freezes: Vec<FreezeRecord>,
}

impl DpsvOutcome {
    pub fn price_of(&self, good: usize) -> Option<&Rat> {
        self.freezes
            .iter()
            .find(|f| f.goods.contains(&good))
            .map(|f| &f.price)
    }

    /// Probability shares `x_ia = f_ia / p_a`.
    pub fn shares(&self) -> impl Iterator<Item = (usize, usize, Rat)> + '_ {
        self.freezes.iter().flat_map(|f| {
            f.flows
                .iter()
                .map(move |m| (m.agent, m.good, &m.dollars / &f.price))
        })
    }
}

/// Builds `source -> good (a) -> agent (unbounded) -> sink (b)` and returns
/// the goods on the source side of the maximal minimum cut. That set is
/// nonempty iff some nonempty `S` has `b |N(S)| <= a |S|`, and at the
/// minimum ratio it is exactly the maximal minimizer.
fn probe(g: &BipartiteGraph, active: &[usize], remaining: &[usize], a: i64, b: i64) -> Vec<usize> {
    let mut agent_node = vec![usize::MAX; g.n_agents()];
    let mut net = FlowNetwork::<i64>::new(2 + active.len() + remaining.len());
    for (k, &ag) in remaining.iter().enumerate() {
        agent_node[ag] = 2 + active.len() + k;
        net.add_arc(agent_node[ag], 1, b).expect("valid arc");
    }
    for (k, &good) in active.iter().enumerate() {
        net.add_arc(0, 2 + k, a).expect("valid arc");
        for &ag in g.agents_of(good) {
            if agent_node[ag] != usize::MAX {
                net.add_unbounded_arc(2 + k, agent_node[ag])
                    .expect("valid arc");
            }
        }
    }
    let side = net.max_flow().max_cut_source_side();
    active
        .iter()
        .enumerate()
        .filter(|&(k, _)| side[2 + k])
        .map(|(_, &good)| good)
        .collect()
}

/// Candidate ratios `a/b`, reduced, deduplicated and sorted increasingly.
fn candidate_ratios(max_num: usize, max_den: usize) -> Vec<(i64, i64)> {
    let mut c: Vec<(i64, i64)> = (1..=max_num as i64)
        .flat_map(|a| (1..=max_den as i64).map(move |b| (a, b)))
        .filter(|&(a, b)| a.gcd(&b) == 1)
        .collect();
    c.sort_unstable_by(|x, y| (x.0 * y.1).cmp(&(y.0 * x.1)));
    c
}

/// Finds the first set to go tight as active prices rise together.
///
/// Binary search over the candidate ratios with one max-flow probe each.
pub fn min_ratio_tight_set(
    g: &BipartiteGraph,
    active: &[usize],
    remaining: &[usize],
) -> Result<TightSet> {
    if active.is_empty() {
        return Err(Error::InvalidArgument("empty active set".into()));
    }
    let rem = mask(g.n_agents(), remaining);
    if let Some(&good) = active
        .iter()
        .find(|&&j| !g.agents_of(j).iter().any(|&a| rem[a]))
    {
        return Err(Error::Precondition(format!(
            "active good {good} has no remaining interested agent"
        )));
    }
    let cands = candidate_ratios(remaining.len(), active.len());
    // smallest candidate whose probe finds a set
    let (mut lo, mut hi) = (0usize, cands.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        let (a, b) = cands[mid];
        if probe(g, active, remaining, a, b).is_empty() {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    let (a, b) = cands[lo];
    let goods = probe(g, active, remaining, a, b);
    if goods.is_empty() {
        return Err(Error::Invariant(
            "no tight set at the largest candidate ratio".into(),
        ));
    }
    let ratio = Rat::new(a, b);
    if ratio < 1 {
        return Err(Error::Precondition(format!(
            "tight-set ratio {ratio} < 1: some goods have fewer interested agents than goods"
        )));
    }
    Ok(TightSet { ratio, goods })
}

/// Splits each served agent's dollar over the frozen goods with one max
/// flow scaled by the price denominator: agents supply `den`, goods absorb
/// `num`.
fn allocate_money(
    g: &BipartiteGraph,
    goods: &[usize],
    agents: &[usize],
    price: &Rat,
) -> Result<Vec<MoneyFlow>> {
    let to_i64 = |v: &num_bigint::BigInt| {
        i64::try_from(v).map_err(|_| Error::Invariant("price does not fit in i64".into()))
    };
    let (num, den) = (to_i64(price.numer())?, to_i64(price.denom())?);
    let mut good_node = vec![usize::MAX; g.n_goods()];
    let mut net = FlowNetwork::<i64>::new(2 + goods.len() + agents.len());
    for (k, &j) in goods.iter().enumerate() {
        good_node[j] = 2 + agents.len() + k;
        net.add_arc(good_node[j], 1, num)?;
    }
    let mut arcs = Vec::new();
    for (k, &a) in agents.iter().enumerate() {
        net.add_arc(0, 2 + k, den)?;
        for &j in g.goods_of(a) {
            if good_node[j] != usize::MAX {
                arcs.push((a, j, net.add_unbounded_arc(2 + k, good_node[j])?));
            }
        }
    }
    let flow = net.max_flow();
    let expected = den * agents.len() as i64;
    if *flow.value() != expected || num * goods.len() as i64 != expected {
        return Err(Error::Invariant(format!(
            "tight set does not clear: flow {} vs budget {expected}",
            flow.value()
        )));
    }
    Ok(arcs
        .into_iter()
        .filter_map(|(agent, good, arc)| {
            let f = flow.arc_flow(arc);
            (f > 0).then(|| MoneyFlow {
                agent,
                good,
                dollars: Rat::new(f, den),
            })
        })
        .collect())
}

/// Runs the price-raising process on `agents × goods` of `g` until every
/// good is frozen.
pub fn simplified_dpsv(
    g: &BipartiteGraph,
    agents: &[usize],
    goods: &[usize],
) -> Result<DpsvOutcome> {
    let mut active: Vec<usize> = goods.to_vec();
    active.sort_unstable();
    let mut remaining: Vec<usize> = agents.to_vec();
    remaining.sort_unstable();
    let mut frozen = vec![false; g.n_goods()];
    let mut freezes: Vec<FreezeRecord> = Vec::new();

    while !active.is_empty() {
        let tight = min_ratio_tight_set(g, &active, &remaining)?;
        let in_set = mask(g.n_goods(), &tight.goods);
        let served: Vec<usize> = remaining
            .iter()
            .copied()
            .filter(|&a| g.goods_of(a).iter().any(|&j| in_set[j]))
            .collect();

        if let Some(prev) = freezes.last() {
            if tight.ratio <= prev.price {
                return Err(Error::Invariant(format!(
                    "freeze price {} does not exceed previous {}",
                    tight.ratio, prev.price
                )));
            }
        }
        if let Some(&a) = served
            .iter()
            .find(|&&a| g.goods_of(a).iter().any(|&j| frozen[j]))
        {
            return Err(Error::Invariant(format!(
                "agent {a} served at a later freeze likes an earlier frozen good"
            )));
        }
        if Rat::from(served.len()) != &tight.ratio * &Rat::from(tight.goods.len()) {
            return Err(Error::Invariant("frozen set is not tight".into()));
        }

        let flows = allocate_money(g, &tight.goods, &served, &tight.ratio)?;
        log::debug!(
            "freeze {} goods at price {} serving {} agents",
            tight.goods.len(),
            tight.ratio,
            served.len()
        );
        for &j in &tight.goods {
            frozen[j] = true;
        }
        let served_mask = mask(g.n_agents(), &served);
        let record = FreezeRecord {
            goods: tight.goods,
            price: tight.ratio,
            agents: served,
            flows,
            active_before: active.clone(),
            remaining_before: remaining.clone(),
        };
        active.retain(|&j| !in_set[j]);
        remaining.retain(|&a| !served_mask[a]);
        freezes.push(record);
    }
    Ok(DpsvOutcome { freezes })
}


#[cfg(test)]
mod tests {
    use super::oracle::brute_min_ratio;
    use super::*;

    fn graph(na: usize, ng: usize, edges: &[(usize, usize)]) -> BipartiteGraph {
        BipartiteGraph::new(na, ng, edges).unwrap()
    }

    #[test]
    fn tight_set_two_agents_one_good() {
        let g = graph(2, 1, &[(0, 0), (1, 0)]);
        let t = min_ratio_tight_set(&g, &[0], &[0, 1]).unwrap();
        assert_eq!(t.ratio, Rat::from_int(2));
        assert_eq!(t.goods, vec![0]);
        assert_eq!(brute_min_ratio(&g, &[0], &[0, 1]), (t.ratio, t.goods));
    }

    #[test]
    fn tight_set_picks_least_demanded_good() {
        // goods a = 0, b = 1; ratios {a}: 3, {b}: 1, {a, b}: 3/2
        let g = graph(3, 2, &[(0, 0), (1, 0), (2, 0), (2, 1)]);
        let t = min_ratio_tight_set(&g, &[0, 1], &[0, 1, 2]).unwrap();
        assert_eq!(t.ratio, Rat::one());
        assert_eq!(t.goods, vec![1]);
        assert_eq!(brute_min_ratio(&g, &[0, 1], &[0, 1, 2]), (t.ratio, t.goods));
    }

    #[test]
    fn tight_set_complete_graph() {
        let edges: Vec<_> = (0..3).flat_map(|a| (0..2).map(move |j| (a, j))).collect();
        let g = graph(3, 2, &edges);
        let t = min_ratio_tight_set(&g, &[0, 1], &[0, 1, 2]).unwrap();
        assert_eq!(t.ratio, Rat::new(3, 2));
        assert_eq!(t.goods, vec![0, 1]);
    }

    #[test]
    fn tight_set_errors() {
        let g = graph(2, 2, &[(0, 0), (1, 0)]);
        assert!(matches!(
            min_ratio_tight_set(&g, &[], &[0, 1]),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            min_ratio_tight_set(&g, &[0, 1], &[0, 1]),
            Err(Error::Precondition(_))
        ));
        // |N({0, 1})| = 1 < 2 goods
        let g = graph(1, 2, &[(0, 0), (0, 1)]);
        assert!(matches!(
            min_ratio_tight_set(&g, &[0, 1], &[0]),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn dpsv_two_agents_one_good() {
        let g = graph(2, 1, &[(0, 0), (1, 0)]);
        let out = simplified_dpsv(&g, &[0, 1], &[0]).unwrap();
        assert_eq!(out.price_of(0), Some(&Rat::from_int(2)));
        let shares: Vec<_> = out.shares().collect();
        assert_eq!(shares, vec![(0, 0, Rat::new(1, 2)), (1, 0, Rat::new(1, 2))]);
    }

    #[test]
    fn dpsv_two_freezes() {
        let g = graph(3, 2, &[(0, 0), (1, 0), (2, 0), (2, 1)]);
        let out = simplified_dpsv(&g, &[0, 1, 2], &[0, 1]).unwrap();
        assert_eq!(out.freezes.len(), 2);
        assert_eq!(out.freezes[0].goods, vec![1]);
        assert_eq!(out.freezes[0].price, Rat::one());
        assert_eq!(out.freezes[0].agents, vec![2]);
        assert_eq!(out.freezes[1].goods, vec![0]);
        assert_eq!(out.freezes[1].price, Rat::from_int(2));
        assert_eq!(out.freezes[1].agents, vec![0, 1]);
    }

    #[test]
    fn dpsv_single_pair() {
        let g = graph(1, 1, &[(0, 0)]);
        let out = simplified_dpsv(&g, &[0], &[0]).unwrap();
        assert_eq!(out.price_of(0), Some(&Rat::one()));
        assert_eq!(out.shares().collect::<Vec<_>>(), vec![(0, 0, Rat::one())]);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        /// Random submarkets satisfying the expansion precondition: every
        /// good set has at least as many interested agents.
        fn submarket() -> impl Strategy<Value = (BipartiteGraph, Vec<usize>, Vec<usize>)> {
            (1usize..=6, 1usize..=6)
                .prop_flat_map(|(na, ng)| {
                    prop::collection::vec(prop::bool::weighted(0.4), na * ng).prop_map(
                        move |bits| {
                            let edges: Vec<_> = (0..na)
                                .flat_map(|a| (0..ng).map(move |j| (a, j)))
                                .filter(|&(a, j)| bits[a * ng + j])
                                .collect();
                            (
                                BipartiteGraph::new(na, ng, &edges).unwrap(),
                                (0..na).collect::<Vec<_>>(),
                                (0..ng).collect::<Vec<_>>(),
                            )
                        },
                    )
                })
                .prop_filter("expansion", |(g, _, goods)| {
                    crate::bipartite::maximum_matching(g).size() == goods.len()
                })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(200))]

            #[test]
            fn dpsv_invariants((g, agents, goods) in submarket()) {
                let out = simplified_dpsv(&g, &agents, &goods).unwrap();
                prop_assert!(out.freezes.len() <= goods.len());
                let mut seen = vec![false; g.n_goods()];
                let mut spent = vec![Rat::zero(); g.n_agents()];
                let mut revenue = vec![Rat::zero(); g.n_goods()];
                let mut last = Rat::zero();
                for f in &out.freezes {
                    let (ratio, set) = brute_min_ratio(&g, &f.active_before, &f.remaining_before);
                    prop_assert_eq!(&ratio, &f.price);
                    prop_assert_eq!(&set, &f.goods);
                    prop_assert!(f.price >= 1);
                    prop_assert!(f.price > last);
                    last = f.price.clone();
                    for &j in &f.goods {
                        prop_assert!(!seen[j]);
                        seen[j] = true;
                    }
                    for m in &f.flows {
                        prop_assert!(g.has_edge(m.agent, m.good));
                        spent[m.agent] = &spent[m.agent] + &m.dollars;
                        revenue[m.good] = &revenue[m.good] + &m.dollars;
                    }
                    for &a in &f.agents {
                        prop_assert_eq!(&spent[a], &Rat::one());
                    }
                    for &j in &f.goods {
                        prop_assert_eq!(&revenue[j], &f.price);
                    }
                }
                prop_assert!(goods.iter().all(|&j| seen[j]));
            }
        }
    }
}
