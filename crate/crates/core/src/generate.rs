//! Seeded random instances for tests and benchmarks.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::model::{MarketInstance, Rat};

/// Each `u_ij` is 1 with probability `density`.
pub fn random_unit<R: Rng + ?Sized>(rng: &mut R, n: usize, density: f64) -> MarketInstance {
    let rows = (0..n)
        .map(|_| (0..n).map(|_| i64::from(rng.gen_bool(density))).collect())
        .collect::<Vec<Vec<i64>>>();
    MarketInstance::from_integers(&rows).expect("square and nonempty")
}

/// A unit instance without a perfect matching: `n - deficit` goods are
/// liked by nobody, so the solver always reaches the price-raising phase.
pub fn random_unit_deficient<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    density: f64,
    deficit: usize,
) -> MarketInstance {
    let deficit = deficit.clamp(1, n);
    let mut goods: Vec<usize> = (0..n).collect();
    goods.shuffle(rng);
    let liked = &goods[..n - deficit];
    let mut rows = vec![vec![0i64; n]; n];
    for row in &mut rows {
        for &j in liked {
            row[j] = i64::from(rng.gen_bool(density));
        }
    }
    MarketInstance::from_integers(&rows).expect("square and nonempty")
}

/// Each row takes a value `a_i` or `b_i > a_i`, both rational.
pub fn random_bivalued<R: Rng + ?Sized>(rng: &mut R, n: usize) -> MarketInstance {
    let rows = (0..n)
        .map(|_| {
            let a = Rat::new(rng.gen_range(-6..6), rng.gen_range(1..4));
            let b = &a + &Rat::new(rng.gen_range(1..8), rng.gen_range(1..4));
            (0..n)
                .map(|_| {
                    if rng.gen_bool(0.5) {
                        b.clone()
                    } else {
                        a.clone()
                    }
                })
                .collect()
        })
        .collect();
    MarketInstance::new(rows).expect("square and nonempty")
}

/// Integer utilities drawn uniformly from `lo..=hi`.
pub fn random_integer<R: Rng + ?Sized>(rng: &mut R, n: usize, lo: i64, hi: i64) -> MarketInstance {
    let rows = (0..n)
        .map(|_| (0..n).map(|_| rng.gen_range(lo..=hi)).collect())
        .collect::<Vec<Vec<i64>>>();
    MarketInstance::from_integers(&rows).expect("square and nonempty")
}
