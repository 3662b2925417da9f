//! Compatibility graph, trading chains/cycles and solution verification.
//!
//! Lengths are counted in edges: a chain rooted at an altruist that reaches
//! `p` patients has length `p`, a cycle through `c` patients has length `c`.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A vertex id. Ids are dense, `0..n`.
pub type Vertex = usize;

/// Violations reported by [`Instance::validate`].
#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
pub enum InstanceError {
    #[error("self-loop on vertex {0}")]
    SelfLoop(Vertex),
    #[error("arc ({0}, {1}) points into an altruistic vertex")]
    ArcIntoAltruist(Vertex, Vertex),
    #[error("vertex id {0} is out of range")]
    VertexOutOfRange(Vertex),
}

/// Violations reported by [`Instance::verify`].
#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
pub enum SolutionError {
    #[error("arc ({0}, {1}) is not in the compatibility graph")]
    MissingArc(Vertex, Vertex),
    #[error("chain {0} is longer than the chain bound")]
    ChainTooLong(usize),
    #[error("cycle {0} is longer than the cycle bound")]
    CycleTooLong(usize),
    #[error("cycle {0} has fewer than two patients")]
    CycleTooShort(usize),
    #[error("chain {0} does not start at an altruistic vertex")]
    ChainStartNotAltruist(usize),
    #[error("chain {0} covers no patient")]
    EmptyChain(usize),
    #[error("vertex {0} is used more than once")]
    VertexReused(Vertex),
}

/// A kidney exchange instance.
///
/// Arcs and altruists are kept sorted and deduplicated; the arc set is a
/// simple digraph. Construction never fails, [`Instance::validate`] reports
/// structural problems.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "InstanceRepr", into = "InstanceRepr")]
pub struct Instance {
    n: usize,
    altruists: Vec<Vertex>,
    arcs: Vec<(Vertex, Vertex)>,
    max_chain_len: usize,
    max_cycle_len: usize,
    target: usize,
    // adjacency, rebuilt on construction
    is_altruist: Vec<bool>,
    out_offsets: Vec<usize>,
    out_targets: Vec<Vertex>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceRepr {
    n: usize,
    altruists: Vec<Vertex>,
    arcs: Vec<(Vertex, Vertex)>,
    l_p: usize,
    l_c: usize,
    t: usize,
}

impl From<InstanceRepr> for Instance {
    fn from(r: InstanceRepr) -> Self {
        Instance::new(r.n, r.altruists, r.arcs, r.l_p, r.l_c, r.t)
    }
}

impl From<Instance> for InstanceRepr {
    fn from(inst: Instance) -> Self {
        InstanceRepr {
            n: inst.n,
            altruists: inst.altruists,
            arcs: inst.arcs,
            l_p: inst.max_chain_len,
            l_c: inst.max_cycle_len,
            t: inst.target,
        }
    }
}

impl Instance {
    pub fn new(
        n: usize,
        altruists: impl IntoIterator<Item = Vertex>,
        arcs: impl IntoIterator<Item = (Vertex, Vertex)>,
        max_chain_len: usize,
        max_cycle_len: usize,
        target: usize,
    ) -> Self {
        let altruists: Vec<Vertex> = altruists
            .into_iter()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let arcs: Vec<(Vertex, Vertex)> = arcs
            .into_iter()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();

        let mut is_altruist = vec![false; n];
        for &a in &altruists {
            if a < n {
                is_altruist[a] = true;
            }
        }
        // CSR adjacency over the in-range arcs; arcs are sorted by tail.
        let mut out_offsets = vec![0; n + 1];
        let mut out_targets = Vec::with_capacity(arcs.len());
        for &(u, v) in &arcs {
            if u < n && v < n {
                out_offsets[u + 1] += 1;
                out_targets.push(v);
            }
        }
        for i in 0..n {
            out_offsets[i + 1] += out_offsets[i];
        }

        Instance {
            n,
            altruists,
            arcs,
            max_chain_len,
            max_cycle_len,
            target,
            is_altruist,
            out_offsets,
            out_targets,
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn altruists(&self) -> &[Vertex] {
        &self.altruists
    }

    pub fn arcs(&self) -> &[(Vertex, Vertex)] {
        &self.arcs
    }

    pub fn max_chain_len(&self) -> usize {
        self.max_chain_len
    }

    pub fn max_cycle_len(&self) -> usize {
        self.max_cycle_len
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn with_target(mut self, target: usize) -> Self {
        self.target = target;
        self
    }

    pub fn with_bounds(mut self, max_chain_len: usize, max_cycle_len: usize) -> Self {
        self.max_chain_len = max_chain_len;
        self.max_cycle_len = max_cycle_len;
        self
    }

    pub fn is_altruist(&self, v: Vertex) -> bool {
        self.is_altruist.get(v).copied().unwrap_or(false)
    }

    /// Non-altruistic vertices in increasing id order.
    pub fn patients(&self) -> impl Iterator<Item = Vertex> + '_ {
        (0..self.n).filter(move |&v| !self.is_altruist[v])
    }

    pub fn patient_count(&self) -> usize {
        self.n - self.is_altruist.iter().filter(|&&a| a).count()
    }

    /// Out-neighbours of `v`, sorted.
    pub fn successors(&self, v: Vertex) -> &[Vertex] {
        if v >= self.n {
            return &[];
        }
        &self.out_targets[self.out_offsets[v]..self.out_offsets[v + 1]]
    }

    pub fn has_arc(&self, u: Vertex, v: Vertex) -> bool {
        self.successors(u).binary_search(&v).is_ok()
    }

    /// Checks every structural invariant and returns all violations.
    pub fn validate(&self) -> Result<(), Vec<InstanceError>> {
        let mut errors = Vec::new();
        for &a in &self.altruists {
            if a >= self.n {
                errors.push(InstanceError::VertexOutOfRange(a));
            }
        }
        for &(u, v) in &self.arcs {
            if u >= self.n {
                errors.push(InstanceError::VertexOutOfRange(u));
            }
            if v >= self.n {
                errors.push(InstanceError::VertexOutOfRange(v));
            }
            if u == v {
                errors.push(InstanceError::SelfLoop(u));
            } else if self.is_altruist(v) {
                errors.push(InstanceError::ArcIntoAltruist(u, v));
            }
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(errors)
        }
    }

    /// Returns `true` when the compatibility graph has no directed cycle.
    pub fn is_acyclic(&self) -> bool {
        let mut indegree = vec![0usize; self.n];
        for v in 0..self.n {
            for &w in self.successors(v) {
                indegree[w] += 1;
            }
        }
        let mut stack: Vec<Vertex> = (0..self.n).filter(|&v| indegree[v] == 0).collect();
        let mut seen = 0;
        while let Some(v) = stack.pop() {
            seen += 1;
            for &w in self.successors(v) {
                indegree[w] -= 1;
                if indegree[w] == 0 {
                    stack.push(w);
                }
            }
        }
        seen == self.n
    }

    /// Checks `sol` against this instance and returns the number of patients
    /// covered. Chain roots are not counted.
    pub fn verify(&self, sol: &Solution) -> Result<usize, Vec<SolutionError>> {
        let mut errors = Vec::new();
        let mut used = vec![false; self.n];
        let mut reused = BTreeSet::new();
        let mut mark = |v: Vertex, reused: &mut BTreeSet<Vertex>| {
            if v < used.len() {
                if used[v] {
                    reused.insert(v);
                }
                used[v] = true;
            }
        };

        for (idx, chain) in sol.chains.iter().enumerate() {
            if !self.is_altruist(chain.start) {
                errors.push(SolutionError::ChainStartNotAltruist(idx));
            }
            if chain.patients.is_empty() {
                errors.push(SolutionError::EmptyChain(idx));
            }
            if chain.patients.len() > self.max_chain_len {
                errors.push(SolutionError::ChainTooLong(idx));
            }
            mark(chain.start, &mut reused);
            let mut prev = chain.start;
            for &v in &chain.patients {
                if !self.has_arc(prev, v) {
                    errors.push(SolutionError::MissingArc(prev, v));
                }
                mark(v, &mut reused);
                prev = v;
            }
        }
        for (idx, cycle) in sol.cycles.iter().enumerate() {
            let len = cycle.patients.len();
            if len < 2 {
                errors.push(SolutionError::CycleTooShort(idx));
            }
            if len > self.max_cycle_len {
                errors.push(SolutionError::CycleTooLong(idx));
            }
            for (i, &v) in cycle.patients.iter().enumerate() {
                let next = cycle.patients[(i + 1) % len];
                if !self.has_arc(v, next) {
                    errors.push(SolutionError::MissingArc(v, next));
                }
                mark(v, &mut reused);
            }
        }
        errors.extend(reused.into_iter().map(SolutionError::VertexReused));

        if errors.is_empty() {
            Ok(sol.covered())
        } else {
            Err(errors)
        }
    }
}

/// An altruist-rooted trading chain.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Chain {
    pub start: Vertex,
    pub patients: Vec<Vertex>,
}

impl Chain {
    pub fn new(start: Vertex, patients: Vec<Vertex>) -> Self {
        Chain { start, patients }
    }

    /// Length in edges.
    pub fn len(&self) -> usize {
        self.patients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patients.is_empty()
    }

    pub fn vertices(&self) -> impl Iterator<Item = Vertex> + '_ {
        std::iter::once(self.start).chain(self.patients.iter().copied())
    }
}

/// A trading cycle through patients; the closing arc is implicit.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cycle {
    pub patients: Vec<Vertex>,
}

impl Cycle {
    pub fn new(patients: Vec<Vertex>) -> Self {
        Cycle { patients }
    }

    /// Rotates the cycle so that it starts at its smallest vertex.
    pub fn canonical(mut self) -> Self {
        if let Some(pos) = self
            .patients
            .iter()
            .enumerate()
            .min_by_key(|&(_, v)| v)
            .map(|(i, _)| i)
        {
            self.patients.rotate_left(pos);
        }
        self
    }

    pub fn len(&self) -> usize {
        self.patients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patients.is_empty()
    }
}

/// A collection of chains and cycles.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SolutionRepr", into = "SolutionRepr")]
pub struct Solution {
    pub chains: Vec<Chain>,
    pub cycles: Vec<Cycle>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SolutionRepr {
    chains: Vec<Vec<Vertex>>,
    cycles: Vec<Vec<Vertex>>,
}

impl TryFrom<SolutionRepr> for Solution {
    type Error = String;

    fn try_from(r: SolutionRepr) -> Result<Self, Self::Error> {
        let chains = r
            .chains
            .into_iter()
            .map(|c| match c.split_first() {
                Some((&start, rest)) => Ok(Chain::new(start, rest.to_vec())),
                None => Err("a chain must list its altruist first".to_string()),
            })
            .collect::<Result<_, _>>()?;
        let cycles = r.cycles.into_iter().map(Cycle::new).collect();
        Ok(Solution { chains, cycles })
    }
}

impl From<Solution> for SolutionRepr {
    fn from(s: Solution) -> Self {
        SolutionRepr {
            chains: s.chains.iter().map(|c| c.vertices().collect()).collect(),
            cycles: s.cycles.into_iter().map(|c| c.patients).collect(),
        }
    }
}

impl Solution {
    pub fn empty() -> Self {
        Solution::default()
    }

    /// Number of patient slots in the collection (chain roots excluded).
    /// Equals the number of distinct patients covered when the solution verifies.
    pub fn covered(&self) -> usize {
        self.chains.iter().map(Chain::len).sum::<usize>()
            + self.cycles.iter().map(Cycle::len).sum::<usize>()
    }

    pub fn is_empty(&self) -> bool {
        self.chains.is_empty() && self.cycles.is_empty()
    }
}
