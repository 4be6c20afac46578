//! Fixtures shared by the benchmarks.

use quartic_core::maps::{random_cptp, QuantumMap};
use quartic_core::random::random_density;
use quartic_core::states::{sample_extended_state, ExtendedState, TheoryOrder};
use quartic_core::supermaps::{random_bistochastic_supermap, SuperMap};
use quartic_core::HermitianOperator;

pub const SEED: u64 = 7;

pub fn order(n: usize) -> TheoryOrder {
    TheoryOrder::quartic(n).expect("positive dimension")
}

pub fn state(n: usize) -> ExtendedState {
    sample_extended_state(&order(n), SEED)
}

pub fn density(n: usize) -> HermitianOperator {
    random_density(n, SEED).expect("positive dimension")
}

pub fn channel(n: usize) -> QuantumMap {
    random_cptp(n, SEED)
}

pub fn supermap(n: usize) -> SuperMap {
    random_bistochastic_supermap(n, SEED)
}
