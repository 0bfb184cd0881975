//! Shared input generators for the benchmark suite.

use hz_core::fixp_map::{random_domain_point, DomainPoint};
use hz_core::generate::{random_integer, random_unit_deficient};
use hz_core::MarketInstance;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Sparse unit instance of size `n` that reaches the price-raising phase.
pub fn unit_instance(n: usize, seed: u64) -> MarketInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let density = (4.0 / n as f64).min(0.5);
    random_unit_deficient(&mut rng, n, density, (n / 4).max(1))
}

/// Integer instance with a random domain point.
pub fn map_input(n: usize, seed: u64) -> (MarketInstance, DomainPoint<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inst = random_integer(&mut rng, n, -10, 10);
    let pt = random_domain_point(&mut rng, n);
    (inst, pt)
}
