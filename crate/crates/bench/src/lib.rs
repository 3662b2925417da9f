//! Shared inputs for the criterion benchmarks.

use kex_core::color::{random_coloring, Coloring};
use kex_core::generate::{planted_instance, planted_shape};
use kex_core::Instance;

/// A planted yes-instance with `t` patients and `t` noise arcs.
pub fn planted(t: usize, seed: u64) -> Instance {
    let (chains, cycles) = planted_shape(t);
    planted_instance(t, &chains, &cycles, t, seed)
        .expect("planted shapes are always valid")
        .0
}

/// A seeded patient coloring with palette `t`, altruists uncolored.
pub fn single_coloring(inst: &Instance, t: usize, seed: u64) -> Coloring {
    let map = random_coloring(inst.patient_count(), t, seed).expect("palette fits");
    Coloring::new(inst, &map, None).expect("map matches the instance")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn planted_has_target_patients() {
        let inst = planted(6, 3);
        assert_eq!(inst.patient_count(), 6);
        assert_eq!(inst.target(), 6);
        let col = single_coloring(&inst, 6, 1);
        assert_eq!(col.patient_palette(), 6);
    }
}
