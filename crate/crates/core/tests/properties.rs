use std::collections::HashSet;

use kex_core::color::{deterministic_family, random_coloring, Color, ColorMap, Coloring};
use kex_core::detect::{
    colorful_chain_counted, colorful_cycle_counted, ChainRoots, ColorSet, ComponentTable,
};
use kex_core::generate::{planted_instance, random_instance};
use kex_core::io::{emit_instance, parse_instance};
use kex_core::oracle::{enumerate_chains, enumerate_cycles, oracle_max_coverage};
use kex_core::solver::{solve_colorful_paper, Solver, SolverConfig};
use kex_core::{Instance, Solution, Vertex};
use proptest::prelude::*;

fn instance(max_n: usize) -> impl Strategy<Value = Instance> {
    (
        3..=max_n,
        0..=3usize,
        0..=4usize,
        0..=4usize,
        1..=3u8,
        any::<u64>(),
    )
        .prop_map(|(n, b, l_p, l_c, p, seed)| {
            let prob = [0.0, 0.15, 0.3, 0.5][p as usize];
            random_instance(n, b.min(n), prob, l_p, l_c, seed).unwrap()
        })
}

fn colors_of(coloring: &Coloring, vs: &[Vertex]) -> Option<ColorSet> {
    let mut set = ColorSet::EMPTY;
    for &v in vs {
        let c = coloring.color(v);
        if set.contains(c) {
            return None;
        }
        set = set.with(c);
    }
    Some(set)
}

fn relabel(inst: &Instance, perm: &[Vertex]) -> Instance {
    Instance::new(
        inst.vertex_count(),
        inst.altruists().iter().map(|&a| perm[a]),
        inst.arcs().iter().map(|&(u, v)| (perm[u], perm[v])),
        inst.max_chain_len(),
        inst.max_cycle_len(),
        inst.target(),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn detection_matches_enumeration(inst in instance(9), k in 1..=4usize, seed in any::<u64>()) {
        let pmap = random_coloring(inst.patient_count(), k, seed).unwrap();
        let coloring = Coloring::new(&inst, &pmap, None).unwrap();
        let chain_sets: HashSet<ColorSet> = enumerate_chains(&inst).unwrap().iter()
            .filter_map(|c| colors_of(&coloring, &c.patients)).collect();
        let cycle_sets: HashSet<ColorSet> = enumerate_cycles(&inst).unwrap().iter()
            .filter_map(|c| colors_of(&coloring, &c.patients)).collect();
        let table = ComponentTable::build(&inst, &coloring, ChainRoots::AnyAltruist).unwrap();
        let n = inst.vertex_count();
        for bits in 1..(1u32 << k) {
            let set = ColorSet::from_bits(bits);
            if set.len() <= inst.max_chain_len() {
                let d = colorful_chain_counted(&inst, &coloring, set, None).unwrap();
                prop_assert!(d.states <= n << set.len());
                prop_assert_eq!(d.witness.is_some(), chain_sets.contains(&set));
                prop_assert_eq!(table.has_chain(0, set), chain_sets.contains(&set));
                if let Some(chain) = d.witness {
                    prop_assert_eq!(colors_of(&coloring, &chain.patients), Some(set));
                    let sol = Solution { chains: vec![chain], cycles: vec![] };
                    prop_assert_eq!(inst.verify(&sol), Ok(set.len()));
                }
            }
            if set.len() >= 2 && set.len() <= inst.max_cycle_len() {
                let d = colorful_cycle_counted(&inst, &coloring, set).unwrap();
                prop_assert!(d.states <= n << set.len());
                prop_assert_eq!(d.witness.is_some(), cycle_sets.contains(&set));
                prop_assert_eq!(table.has_cycle(set), cycle_sets.contains(&set));
                if let Some(cycle) = d.witness {
                    prop_assert_eq!(cycle.patients[0], *cycle.patients.iter().min().unwrap());
                    prop_assert_eq!(colors_of(&coloring, &cycle.patients), Some(set));
                    let sol = Solution { chains: vec![], cycles: vec![cycle] };
                    prop_assert_eq!(inst.verify(&sol), Ok(set.len()));
                }
            }
        }
    }

    #[test]
    fn oracle_ignores_labels(inst in instance(10), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut perm: Vec<Vertex> = (0..inst.vertex_count()).collect();
        perm.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let (a, sol) = oracle_max_coverage(&inst).unwrap();
        let (b, _) = oracle_max_coverage(&relabel(&inst, &perm)).unwrap();
        prop_assert_eq!(a, b);
        prop_assert_eq!(inst.verify(&sol), Ok(a));
    }

    #[test]
    fn removing_an_arc_never_helps(inst in instance(10), pick in any::<prop::sample::Index>()) {
        prop_assume!(!inst.arcs().is_empty());
        let drop = pick.index(inst.arcs().len());
        let fewer = Instance::new(
            inst.vertex_count(),
            inst.altruists().iter().copied(),
            inst.arcs().iter().enumerate().filter(|&(i, _)| i != drop).map(|(_, &a)| a),
            inst.max_chain_len(),
            inst.max_cycle_len(),
            inst.target(),
        );
        prop_assert!(oracle_max_coverage(&fewer).unwrap().0 <= oracle_max_coverage(&inst).unwrap().0);
    }

    #[test]
    fn coverage_ignores_component_order(inst in instance(10), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let (t, mut sol) = oracle_max_coverage(&inst).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        sol.chains.shuffle(&mut rng);
        sol.cycles.shuffle(&mut rng);
        prop_assert_eq!(inst.verify(&sol), Ok(t));
    }

    #[test]
    fn at_least_is_monotone(inst in instance(9)) {
        let mut solver = Solver::new(&inst, SolverConfig::deterministic());
        let answers: Vec<bool> = (0..=inst.patient_count())
            .map(|t| solver.decide_at_least(t).unwrap().is_some())
            .collect();
        for w in answers.windows(2) {
            prop_assert!(w[0] || !w[1]);
        }
    }

    #[test]
    fn paper_dp_is_complete(inst in instance(9)) {
        let (t, _) = oracle_max_coverage(&inst).unwrap();
        prop_assume!(t >= 1);
        let fam = deterministic_family(inst.patient_count(), t).unwrap();
        let hit = fam.colorings.iter().any(|pmap| {
            let coloring = Coloring::new(&inst, pmap, None).unwrap();
            solve_colorful_paper(&inst, &coloring).unwrap().solution.is_some()
        });
        prop_assert!(hit);
    }

    #[test]
    fn generators_validate(inst in instance(14)) {
        prop_assert_eq!(inst.validate(), Ok(()));
    }

    #[test]
    fn planted_verifies(
        chains in prop::collection::vec(1..=3usize, 0..3),
        cycles in prop::collection::vec(2..=4usize, 0..3),
        noise in 0..6usize,
        seed in any::<u64>(),
    ) {
        let k = chains.iter().sum::<usize>() + cycles.iter().sum::<usize>();
        prop_assume!(k >= 2);
        // Planted arcs use k of the k * (n - 1) admissible pairs.
        let n = chains.len() + k;
        prop_assume!(noise <= k * (n - 1) - k);
        let (inst, sol) = planted_instance(k, &chains, &cycles, noise, seed).unwrap();
        prop_assert_eq!(inst.validate(), Ok(()));
        prop_assert_eq!(inst.verify(&sol), Ok(k));
    }

    #[test]
    fn emit_is_canonical(inst in instance(10)) {
        let once = emit_instance(&inst);
        let twice = emit_instance(&parse_instance(once.as_bytes()).unwrap());
        prop_assert_eq!(once, twice);
    }
}

#[test]
fn colorful_fraction_of_a_planted_witness() {
    let k = 4;
    let (inst, sol) = planted_instance(k, &[1], &[3], 6, 2).unwrap();
    let witness: Vec<Vertex> = sol.chains[0]
        .patients
        .iter()
        .chain(&sol.cycles[0].patients)
        .copied()
        .collect();
    let runs = 10_000u64;
    let hits = (0..runs)
        .filter(|&seed| {
            let pmap = random_coloring(inst.patient_count(), k, seed).unwrap();
            let coloring = Coloring::new(&inst, &pmap, None).unwrap();
            let colors: HashSet<Color> = witness.iter().map(|&v| coloring.color(v)).collect();
            colors.len() == k
        })
        .count() as f64;
    let p = (1..=k).map(|i| i as f64 / k as f64).product::<f64>();
    let sigma = (p * (1.0 - p) / runs as f64).sqrt();
    assert!(
        hits / runs as f64 >= p - 3.0 * sigma,
        "rate {}",
        hits / runs as f64
    );
}

#[test]
fn random_coloring_frequencies() {
    let map: ColorMap = random_coloring(10_000, 4, 99).unwrap();
    for c in 0..4 {
        let count = map.as_slice().iter().filter(|&&x| x == c).count() as f64;
        assert!((count - 2500.0).abs() <= 4.0 * 100.0, "color {c}: {count}");
    }
}
