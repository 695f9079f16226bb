//! Shared fixtures for the solver benchmarks.

use d2d_core::model::Counts;
use d2d_core::scenario_gen::{generate, GenConfig};
use d2d_core::Scenario;

/// A default-geometry instance with `n_d` D2D links, one cellular link per
/// direction and `m` channels per direction.
pub fn instance(n_d: usize, m: usize, seed: u64) -> Scenario {
    let cfg = GenConfig {
        counts: Counts { n_uc: 1, n_dc: 1, n_d, m_u: m, m_d: m },
        master_seed: seed,
        ..GenConfig::default()
    };
    generate(&cfg).expect("benchmark config is valid")
}
