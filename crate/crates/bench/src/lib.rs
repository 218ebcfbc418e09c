//! Seeded workloads shared by the benchmarks, so every run measures the
//! same inputs.

use effectdual::duality::random_povm;
use effectdual::random::{self, seeded};
use effectdual::{ClassicalEffect, DensityMatrix, MeasurementModel, Povm};

/// A POVM together with matching random states and events.
pub struct DualityWorkload {
    pub povm: Povm,
    pub states: Vec<DensityMatrix>,
    pub events: Vec<ClassicalEffect>,
}

impl DualityWorkload {
    pub fn new(dim: usize, outcomes: usize, samples: usize, seed: u64) -> Self {
        let povm = random_povm(dim, outcomes, seed).expect("positive sizes");
        let mut rng = seeded(seed.wrapping_add(1));
        let states = (0..samples).map(|_| random::density_matrix(&mut rng, dim)).collect();
        let events = (0..samples)
            .map(|_| random::classical_effect(&mut rng, povm.space()))
            .collect();
        Self { povm, states, events }
    }
}

pub fn model_workload(system_dim: usize, probe_dim: usize, seed: u64) -> MeasurementModel {
    effectdual::fixtures::random_model(&mut seeded(seed), system_dim, probe_dim, 2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn workloads_are_reproducible() {
        let a = DualityWorkload::new(3, 4, 5, 9);
        let b = DualityWorkload::new(3, 4, 5, 9);
        assert_eq!(a.povm, b.povm);
        assert_eq!(a.states, b.states);
        assert_eq!(model_workload(2, 2, 1), model_workload(2, 2, 1));
    }
}
