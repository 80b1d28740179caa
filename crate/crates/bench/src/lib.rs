//! Shared fixtures for the criterion benches.

use satlab_core::cnf::{majority_assignment, support_init};
use satlab_core::embed::{planted_signal_trajectory, PlantedSignal};
use satlab_core::gen::{planted_3sat, random_3sat};
use satlab_core::{CnfFormula, EmbeddingTrajectory, SupportState};

/// Random 3-SAT at density `c`, with its majority-vote support state.
pub fn random_instance(n: usize, c: f64, seed: u64) -> (CnfFormula, SupportState) {
    let f = random_3sat(n, (c * n as f64).round() as usize, seed).expect("valid instance");
    let state = support_init(&f, &majority_assignment(&f)).expect("matching assignment");
    (f, state)
}

/// Planted-signal trajectories of `n` variables at density 4.
pub fn trajectories(count: usize, n: usize, cfg: &PlantedSignal) -> Vec<EmbeddingTrajectory> {
    (0..count as u64)
        .map(|seed| {
            let (f, phi) = planted_3sat(n, 4 * n, seed).expect("valid instance");
            planted_signal_trajectory(&phi, f.num_clauses(), cfg, seed)
                .expect("valid signal")
                .0
        })
        .collect()
}
