//! Exhaustive reference solver for small instances.
//!
//! Every feasible cycle and chain is enumerated into a pool, then a memoized
//! search over the set of still-available vertices picks a best disjoint
//! sub-collection.

use std::collections::HashMap;

use thiserror::Error;

use crate::instance::{Chain, Cycle, Instance, Solution, Vertex};

/// Default vertex cap.
pub const DEFAULT_MAX_VERTICES: usize = 22;
/// The available-vertex set is a `u64`, so no cap may exceed this.
pub const HARD_MAX_VERTICES: usize = 64;
pub const DEFAULT_POOL_CAP: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleLimits {
    pub max_vertices: usize,
    pub pool_cap: usize,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits {
            max_vertices: DEFAULT_MAX_VERTICES,
            pool_cap: DEFAULT_POOL_CAP,
        }
    }
}

impl OracleLimits {
    /// Limits allowing up to `max_vertices` (clamped to the hard maximum).
    pub fn with_vertices(max_vertices: usize) -> Self {
        OracleLimits {
            max_vertices: max_vertices.min(HARD_MAX_VERTICES),
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("{what} is {value}, above the oracle cap of {cap}")]
    SizeCapExceeded {
        what: &'static str,
        value: usize,
        cap: usize,
    },
}

fn check_size(inst: &Instance, limits: &OracleLimits) -> Result<(), OracleError> {
    let cap = limits.max_vertices.min(HARD_MAX_VERTICES);
    if inst.vertex_count() > cap {
        return Err(OracleError::SizeCapExceeded {
            what: "vertex count",
            value: inst.vertex_count(),
            cap,
        });
    }
    Ok(())
}

fn pool_overflow(limits: &OracleLimits) -> OracleError {
    OracleError::SizeCapExceeded {
        what: "component pool",
        value: limits.pool_cap + 1,
        cap: limits.pool_cap,
    }
}

pub fn enumerate_cycles(inst: &Instance) -> Result<Vec<Cycle>, OracleError> {
    enumerate_cycles_with(inst, &OracleLimits::default())
}

/// All simple cycles with `2..=l_c` patients, each listed once starting at
/// its smallest vertex.
pub fn enumerate_cycles_with(
    inst: &Instance,
    limits: &OracleLimits,
) -> Result<Vec<Cycle>, OracleError> {
    check_size(inst, limits)?;
    let mut out = Vec::new();
    if inst.max_cycle_len() < 2 {
        return Ok(out);
    }
    let mut on_path = vec![false; inst.vertex_count()];
    for start in inst.patients() {
        let mut path = vec![start];
        on_path[start] = true;
        cycles_from(inst, start, &mut path, &mut on_path, &mut out, limits)?;
        on_path[start] = false;
    }
    Ok(out)
}

fn cycles_from(
    inst: &Instance,
    start: Vertex,
    path: &mut Vec<Vertex>,
    on_path: &mut [bool],
    out: &mut Vec<Cycle>,
    limits: &OracleLimits,
) -> Result<(), OracleError> {
    let last = *path.last().unwrap();
    for &w in inst.successors(last) {
        if w == start && path.len() >= 2 {
            if out.len() >= limits.pool_cap {
                return Err(pool_overflow(limits));
            }
            out.push(Cycle::new(path.clone()));
        } else if w > start
            && !on_path[w]
            && !inst.is_altruist(w)
            && path.len() < inst.max_cycle_len()
        {
            on_path[w] = true;
            path.push(w);
            cycles_from(inst, start, path, on_path, out, limits)?;
            path.pop();
            on_path[w] = false;
        }
    }
    Ok(())
}

pub fn enumerate_chains(inst: &Instance) -> Result<Vec<Chain>, OracleError> {
    enumerate_chains_with(inst, &OracleLimits::default())
}

/// All altruist-rooted simple paths reaching `1..=l_p` patients.
pub fn enumerate_chains_with(
    inst: &Instance,
    limits: &OracleLimits,
) -> Result<Vec<Chain>, OracleError> {
    check_size(inst, limits)?;
    let mut out = Vec::new();
    if inst.max_chain_len() == 0 {
        return Ok(out);
    }
    let mut on_path = vec![false; inst.vertex_count()];
    for &a in inst.altruists() {
        let mut path = Vec::new();
        chains_from(inst, a, &mut path, &mut on_path, &mut out, limits)?;
    }
    Ok(out)
}

fn chains_from(
    inst: &Instance,
    root: Vertex,
    path: &mut Vec<Vertex>,
    on_path: &mut [bool],
    out: &mut Vec<Chain>,
    limits: &OracleLimits,
) -> Result<(), OracleError> {
    let last = path.last().copied().unwrap_or(root);
    for &w in inst.successors(last) {
        if on_path[w] || inst.is_altruist(w) {
            continue;
        }
        if out.len() >= limits.pool_cap {
            return Err(pool_overflow(limits));
        }
        path.push(w);
        out.push(Chain::new(root, path.clone()));
        if path.len() < inst.max_chain_len() {
            on_path[w] = true;
            chains_from(inst, root, path, on_path, out, limits)?;
            on_path[w] = false;
        }
        path.pop();
    }
    Ok(())
}

enum Component {
    Cycle(Cycle),
    Chain(Chain),
}

struct Pooled {
    mask: u64,
    patients: usize,
    component: Component,
}

struct Search<'a> {
    pool: &'a [Pooled],
    memo: HashMap<u64, (usize, Option<usize>)>,
}

impl Search<'_> {
    /// Best coverage using only vertices of `avail` and components of `fits`
    /// (all of which lie inside `avail`).
    fn best(&mut self, avail: u64, fits: &[usize]) -> usize {
        // Vertices outside every fitting component can never be used.
        let avail = fits.iter().fold(0, |acc, &i| acc | self.pool[i].mask) & avail;
        if avail == 0 {
            return 0;
        }
        if let Some(&(v, _)) = self.memo.get(&avail) {
            return v;
        }
        let low = avail & avail.wrapping_neg();
        let rest: Vec<usize> = fits
            .iter()
            .copied()
            .filter(|&i| self.pool[i].mask & low == 0)
            .collect();
        let mut best = self.best(avail & !low, &rest);
        let mut choice = None;
        for &i in fits {
            let c = &self.pool[i];
            if c.mask & low == 0 {
                continue;
            }
            let left = avail & !c.mask;
            let sub: Vec<usize> = rest
                .iter()
                .copied()
                .filter(|&j| self.pool[j].mask & c.mask == 0)
                .collect();
            let value = c.patients + self.best(left, &sub);
            if value > best {
                best = value;
                choice = Some(i);
            }
        }
        self.memo.insert(avail, (best, choice));
        best
    }

    fn reconstruct(&self, pool_fits: &[usize], mut avail: u64) -> Solution {
        let mut sol = Solution::empty();
        let mut fits = pool_fits.to_vec();
        loop {
            avail &= fits.iter().fold(0, |acc, &i| acc | self.pool[i].mask);
            if avail == 0 {
                return sol;
            }
            let low = avail & avail.wrapping_neg();
            let (_, choice) = self.memo[&avail];
            match choice {
                None => avail &= !low,
                Some(i) => {
                    let c = &self.pool[i];
                    match &c.component {
                        Component::Cycle(cy) => sol.cycles.push(cy.clone()),
                        Component::Chain(ch) => sol.chains.push(ch.clone()),
                    }
                    avail &= !c.mask;
                }
            }
            fits.retain(|&j| self.pool[j].mask & !avail == 0);
        }
    }
}

pub fn oracle_max_coverage(inst: &Instance) -> Result<(usize, Solution), OracleError> {
    oracle_max_coverage_with(inst, &OracleLimits::default())
}

/// Exact maximum coverage with an optimal solution.
pub fn oracle_max_coverage_with(
    inst: &Instance,
    limits: &OracleLimits,
) -> Result<(usize, Solution), OracleError> {
    let cycles = enumerate_cycles_with(inst, limits)?;
    let chains = enumerate_chains_with(inst, limits)?;
    if cycles.len() + chains.len() > limits.pool_cap {
        return Err(pool_overflow(limits));
    }
    let mask_of = |vs: &mut dyn Iterator<Item = Vertex>| vs.fold(0u64, |m, v| m | 1 << v);
    let mut pool = Vec::with_capacity(cycles.len() + chains.len());
    for cy in cycles {
        pool.push(Pooled {
            mask: mask_of(&mut cy.patients.iter().copied()),
            patients: cy.len(),
            component: Component::Cycle(cy),
        });
    }
    for ch in chains {
        let mask = mask_of(&mut ch.vertices());
        pool.push(Pooled {
            mask,
            patients: ch.len(),
            component: Component::Chain(ch),
        });
    }
    let all: Vec<usize> = (0..pool.len()).collect();
    let full = mask_of(&mut (0..inst.vertex_count()));
    let mut search = Search {
        pool: &pool,
        memo: HashMap::new(),
    };
    let best = search.best(full, &all);
    let sol = search.reconstruct(&all, full);
    Ok((best, sol))
}

/// Whether some solution covers at least `t` patients.
pub fn oracle_decide(
    inst: &Instance,
    t: usize,
    limits: &OracleLimits,
) -> Result<bool, OracleError> {
    Ok(oracle_max_coverage_with(inst, limits)?.0 >= t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle(l_c: usize) -> Instance {
        Instance::new(3, [], [(0, 1), (1, 2), (2, 0)], 0, l_c, 0)
    }

    #[test]
    fn triangle_cycles() {
        assert_eq!(enumerate_cycles(&triangle(3)).unwrap().len(), 1);
        assert!(enumerate_cycles(&triangle(2)).unwrap().is_empty());
    }

    #[test]
    fn complete_digraph_cycles() {
        let arcs = (0..4).flat_map(|u| (0..4).filter(move |&v| v != u).map(move |v| (u, v)));
        let inst = Instance::new(4, [], arcs, 0, 3, 0);
        let cycles = enumerate_cycles(&inst).unwrap();
        assert_eq!(cycles.iter().filter(|c| c.len() == 2).count(), 6);
        assert_eq!(cycles.iter().filter(|c| c.len() == 3).count(), 8);
        for c in &cycles {
            assert_eq!(c.patients[0], *c.patients.iter().min().unwrap());
        }
    }

    #[test]
    fn chains_of_a_path() {
        let inst = Instance::new(3, [0], [(0, 1), (1, 2)], 2, 0, 0);
        let chains = enumerate_chains(&inst).unwrap();
        assert_eq!(
            chains,
            vec![Chain::new(0, vec![1]), Chain::new(0, vec![1, 2])]
        );
        assert!(enumerate_chains(&inst.with_bounds(0, 0))
            .unwrap()
            .is_empty());
    }

    #[test]
    fn two_roots_one_patient() {
        let inst = Instance::new(3, [0, 1], [(0, 2), (1, 2)], 1, 0, 0);
        assert_eq!(enumerate_chains(&inst).unwrap().len(), 2);
    }

    #[test]
    fn contention_coverage() {
        let inst = Instance::new(3, [0], [(0, 1), (0, 2)], 1, 0, 2);
        let (t, sol) = oracle_max_coverage(&inst).unwrap();
        assert_eq!(t, 1);
        assert_eq!(inst.verify(&sol), Ok(1));
    }

    #[test]
    fn seven_cycle_coverage() {
        let inst = Instance::new(7, [], (0..7).map(|i| (i, (i + 1) % 7)), 0, 7, 0);
        let (t, sol) = oracle_max_coverage(&inst).unwrap();
        assert_eq!(t, 7);
        assert_eq!(sol.cycles.len(), 1);
    }

    #[test]
    fn triangle_plus_chain() {
        let inst = Instance::new(6, [3], [(0, 1), (1, 2), (2, 0), (3, 4), (4, 5)], 2, 3, 0);
        let (t, sol) = oracle_max_coverage(&inst).unwrap();
        assert_eq!(t, 5);
        assert_eq!(inst.verify(&sol), Ok(5));
    }

    #[test]
    fn size_caps() {
        let inst = Instance::new(23, [], [], 0, 0, 0);
        assert!(matches!(
            oracle_max_coverage(&inst),
            Err(OracleError::SizeCapExceeded { .. })
        ));
        assert!(oracle_max_coverage_with(&inst, &OracleLimits::with_vertices(30)).is_ok());
        let arcs = (0..8).flat_map(|u| (0..8).filter(move |&v| v != u).map(move |v| (u, v)));
        let dense = Instance::new(8, [], arcs, 0, 8, 0);
        let tight = OracleLimits {
            pool_cap: 10,
            ..OracleLimits::default()
        };
        assert!(enumerate_cycles_with(&dense, &tight).is_err());
    }
}
