//! Shared fixtures for the pipeline benchmarks.

use deltacom_core::synth::{generate, DecorationTaxonomy, SynthSpec, SynthOutput};

/// Planted partition with `communities` equal-size blocks.
pub fn uniform_benchmark(communities: u32, size: u32, seed: u64) -> SynthOutput {
    let p_in = (12.0 / f64::from(size - 1)).min(0.9);
    let p_out = 2.0 / f64::from(communities.saturating_sub(1).max(1) * size);
    generate(&SynthSpec::planted(
        vec![size; communities as usize],
        p_in,
        p_out,
        seed,
    ))
    .expect("benchmark fixture generates")
}

/// The heterogeneous-size benchmark used by the acceptance suite.
pub fn heterogeneous_benchmark(seed: u64) -> SynthOutput {
    let sizes: Vec<u32> = (0..8).map(|j| 10 * (1 << j)).collect();
    generate(&SynthSpec::planted(sizes, 0.5, 0.0008, seed)).expect("benchmark fixture generates")
}

/// A chain/tendril-decorated fixture for the preprocessing benchmarks.
pub fn decorated_benchmark(seed: u64) -> SynthOutput {
    let spec = SynthSpec {
        chains: 400,
        chain_len_min: 1,
        chain_len_max: 4,
        chain_taxonomy: DecorationTaxonomy::Mixed,
        tendrils: 300,
        tendril_len_min: 1,
        tendril_len_max: 6,
        ..SynthSpec::planted(vec![150; 12], 0.2, 0.002, seed)
    };
    generate(&spec).expect("benchmark fixture generates")
}
