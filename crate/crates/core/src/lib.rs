//! Solvers and verifiers for Hylland-Zeckhauser equilibria of one-sided
//! matching markets.

pub mod bipartite;
pub mod bundle;
pub mod dpsv;
pub mod error;
pub mod examples;
pub mod fixp_map;
pub mod flownet;
pub mod generate;
pub mod model;
pub mod unit_solver;
pub mod verify;

pub use bundle::{
    best_response, classify_bundle, optimality_gap, BestResponse, BundleType, DualCertificate,
};
pub use error::{Error, Result};
pub use fixp_map::{BrouwerMap, DomainPoint, IterationConfig, IterationTrace, SearchConfig};
pub use model::{
    Allocation, BundleMetrics, EquilibriumPoint, MarketInstance, PriceVector, Rat, Scalar,
};
pub use unit_solver::{solve_bivalued, solve_unit};
pub use verify::{verify_equilibrium, EquilibriumReport};
