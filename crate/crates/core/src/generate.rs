//! Seeded random and planted instance generators.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::instance::{Chain, Cycle, Instance, Solution, Vertex};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenerateError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

fn invalid(msg: impl Into<String>) -> GenerateError {
    GenerateError::InvalidParameter(msg.into())
}

/// Ordered pairs `(u, v)` that may legally become arcs: no self-loop, no
/// altruistic head.
fn admissible_pairs(n: usize, is_altruist: impl Fn(Vertex) -> bool) -> Vec<(Vertex, Vertex)> {
    let mut pairs = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if u != v && !is_altruist(v) {
                pairs.push((u, v));
            }
        }
    }
    pairs
}

/// Erdős–Rényi style instance. Vertices `0..altruist_count` are altruists and
/// every admissible ordered pair becomes an arc independently with
/// probability `arc_prob`. The target is left at zero.
pub fn random_instance(
    n: usize,
    altruist_count: usize,
    arc_prob: f64,
    max_chain_len: usize,
    max_cycle_len: usize,
    seed: u64,
) -> Result<Instance, GenerateError> {
    if altruist_count > n {
        return Err(invalid(format!(
            "altruist_count {altruist_count} exceeds vertex count {n}"
        )));
    }
    if !(0.0..=1.0).contains(&arc_prob) {
        return Err(invalid(format!("arc probability {arc_prob} not in [0, 1]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let arcs: Vec<_> = admissible_pairs(n, |v| v < altruist_count)
        .into_iter()
        .filter(|_| rng.gen_bool(arc_prob))
        .collect();
    Ok(Instance::new(
        n,
        0..altruist_count,
        arcs,
        max_chain_len,
        max_cycle_len,
        0,
    ))
}

/// Chain and cycle lengths used for a planted benchmark instance with `t`
/// patients: one chain, the rest split into cycles of length 3 and 2.
pub fn planted_shape(t: usize) -> (Vec<usize>, Vec<usize>) {
    let chain = if t == 3 || t < 2 { t } else { 2 };
    let mut rest = t - chain;
    let mut cycles = Vec::new();
    while rest > 0 {
        let len = if rest == 2 || rest == 4 { 2 } else { 3 };
        cycles.push(len);
        rest -= len;
    }
    let chains = if chain > 0 { vec![chain] } else { vec![] };
    (chains, cycles)
}

/// Builds an instance that contains the requested disjoint chains and cycles,
/// then sprinkles `noise_arcs` extra admissible arcs on top.
///
/// Altruists get ids `0..chain_lens.len()`; patient ids are shuffled so the
/// planted structure does not line up with the id order. The returned
/// solution is the planted one and covers exactly `k_patients`.
pub fn planted_instance(
    k_patients: usize,
    chain_lens: &[usize],
    cycle_lens: &[usize],
    noise_arcs: usize,
    seed: u64,
) -> Result<(Instance, Solution), GenerateError> {
    let planted: usize = chain_lens.iter().sum::<usize>() + cycle_lens.iter().sum::<usize>();
    if planted != k_patients {
        return Err(invalid(format!(
            "chain and cycle lengths sum to {planted}, expected {k_patients}"
        )));
    }
    if chain_lens.contains(&0) {
        return Err(invalid("chain lengths must be positive"));
    }
    if cycle_lens.iter().any(|&l| l < 2) {
        return Err(invalid("cycle lengths must be at least 2"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let altruists = chain_lens.len();
    let n = altruists + k_patients;
    let mut patient_ids: Vec<Vertex> = (altruists..n).collect();
    patient_ids.shuffle(&mut rng);
    let mut next = patient_ids.into_iter();

    let mut arcs = Vec::new();
    let mut solution = Solution::empty();
    for (a, &len) in chain_lens.iter().enumerate() {
        let patients: Vec<Vertex> = next.by_ref().take(len).collect();
        let mut prev = a;
        for &v in &patients {
            arcs.push((prev, v));
            prev = v;
        }
        solution.chains.push(Chain::new(a, patients));
    }
    for &len in cycle_lens {
        let patients: Vec<Vertex> = next.by_ref().take(len).collect();
        for i in 0..len {
            arcs.push((patients[i], patients[(i + 1) % len]));
        }
        solution.cycles.push(Cycle::new(patients).canonical());
    }

    if noise_arcs > 0 {
        let existing: std::collections::HashSet<_> = arcs.iter().copied().collect();
        let candidates: Vec<_> = admissible_pairs(n, |v| v < altruists)
            .into_iter()
            .filter(|p| !existing.contains(p))
            .collect();
        if candidates.len() < noise_arcs {
            return Err(invalid(format!(
                "only {} admissible arcs remain for {noise_arcs} noise arcs",
                candidates.len()
            )));
        }
        arcs.extend(candidates.choose_multiple(&mut rng, noise_arcs).copied());
    }

    let inst = Instance::new(
        n,
        0..altruists,
        arcs,
        chain_lens.iter().copied().max().unwrap_or(0),
        cycle_lens.iter().copied().max().unwrap_or(0),
        k_patients,
    );
    Ok((inst, solution))
}
