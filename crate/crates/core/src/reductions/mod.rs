//! Instance generators built from hardness reductions.
//!
//! Each generator compiles a source problem (directed k-path, bin packing,
//! 3-partition) into a clearing instance and records where every source
//! object ended up, so a source witness can be mapped to a solution.
//! Lengths follow the edge convention of [`Instance`]; the vertex-count
//! values of the original constructions are kept in [`PaperParams`].

pub mod source;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::{Chain, Cycle, Instance, Solution, Vertex};

/// Sources larger than this are not brute-forced for the expected answer.
pub const EXPECTED_LIMIT: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReductionError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("witness does not fit the gadget: {0}")]
    WitnessMismatch(String),
}

fn invalid(msg: impl Into<String>) -> ReductionError {
    ReductionError::InvalidParameter(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Expected {
    Yes,
    No,
}

impl From<bool> for Expected {
    fn from(yes: bool) -> Self {
        if yes {
            Expected::Yes
        } else {
            Expected::No
        }
    }
}

/// Weight multiplier for bin packing, or shift constant for 3-partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scaling {
    /// `3 k^2 n^2` for bin packing, `10 B` for 3-partition.
    #[default]
    Paper,
    /// A smaller constant so that outputs stay small enough for the oracle.
    Custom(u64),
}

/// Raw parameter values of the original construction, which count chain
/// and cycle lengths in vertices. `None` marks a value left arbitrary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PaperParams {
    pub l_p: Option<usize>,
    pub l_c: Option<usize>,
    pub t: usize,
}

/// Where the source objects live inside the generated instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "gadget", rename_all = "snake_case")]
pub enum Gadget {
    /// Source vertices keep their ids; `altruist` points at all of them.
    KPath { altruist: Vertex, k: usize },
    /// `spine[j][i]` is the spine vertex of bin `j` at item `i`; item `i`
    /// is the path `items[i][0] ..= items[i][1]` over consecutive ids.
    BinPacking {
        cycles: bool,
        scale: u64,
        capacity: u64,
        spine: Vec<Vec<Vertex>>,
        items: Vec<[Vertex; 2]>,
        /// A path decomposition of the generated graph.
        bags: Vec<Vec<Vertex>>,
    },
    /// Altruist `altruists[r]` roots group `r`; element `i` is the path
    /// `elements[i][0] ..= elements[i][1]`.
    FixedThreePartition {
        altruists: Vec<Vertex>,
        elements: Vec<[Vertex; 2]>,
        target: u64,
    },
}

/// A source solution to push through [`ReductionOutput::map_witness`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SourceWitness {
    /// Vertices of a simple path in visiting order.
    Path(Vec<Vertex>),
    /// Bin or group index of every item.
    Assignment(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionOutput {
    pub instance: Instance,
    pub expected: Option<Expected>,
    pub paper_params: PaperParams,
    pub gadget: Gadget,
}

impl ReductionOutput {
    pub fn certificate_map(&self) -> serde_json::Value {
        serde_json::to_value(&self.gadget).expect("gadgets serialize")
    }

    /// `{"expected", "paper_params", "certificate_map"}`.
    pub fn sidecar(&self) -> serde_json::Value {
        serde_json::json!({
            "expected": self.expected,
            "paper_params": self.paper_params,
            "certificate_map": self.certificate_map(),
        })
    }

    /// Translates a source witness into a solution of the generated instance.
    pub fn map_witness(&self, witness: &SourceWitness) -> Result<Solution, ReductionError> {
        let mismatch = |m: &str| ReductionError::WitnessMismatch(m.to_string());
        match (&self.gadget, witness) {
            (Gadget::KPath { altruist, k }, SourceWitness::Path(path)) => {
                if path.len() != *k {
                    return Err(mismatch("path does not have k vertices"));
                }
                let mut sol = Solution::empty();
                if *k > 0 {
                    sol.chains.push(Chain::new(*altruist, path.clone()));
                }
                Ok(sol)
            }
            (
                Gadget::BinPacking {
                    cycles,
                    spine,
                    items,
                    ..
                },
                SourceWitness::Assignment(bins),
            ) => {
                if bins.len() != items.len() || bins.iter().any(|&b| b >= spine.len()) {
                    return Err(mismatch("assignment does not match items and bins"));
                }
                let mut sol = Solution::empty();
                for (j, row) in spine.iter().enumerate() {
                    let mut seq = Vec::new();
                    for (i, &[first, last]) in items.iter().enumerate() {
                        seq.push(row[i]);
                        if bins[i] == j {
                            seq.extend(first..=last);
                        }
                    }
                    if *cycles {
                        sol.cycles.push(Cycle::new(seq));
                    } else {
                        let root = seq.remove(0);
                        if !seq.is_empty() {
                            sol.chains.push(Chain::new(root, seq));
                        }
                    }
                }
                Ok(sol)
            }
            (
                Gadget::FixedThreePartition {
                    altruists,
                    elements,
                    ..
                },
                SourceWitness::Assignment(groups),
            ) => {
                if groups.len() != elements.len() || groups.iter().any(|&g| g >= altruists.len()) {
                    return Err(mismatch("assignment does not match elements and groups"));
                }
                let mut sol = Solution::empty();
                for (g, &root) in altruists.iter().enumerate() {
                    let patients: Vec<Vertex> = elements
                        .iter()
                        .zip(groups)
                        .filter(|(_, &h)| h == g)
                        .flat_map(|(&[first, last], _)| first..=last)
                        .collect();
                    if !patients.is_empty() {
                        sol.chains.push(Chain::new(root, patients));
                    }
                }
                Ok(sol)
            }
            _ => Err(mismatch("witness kind does not fit this gadget")),
        }
    }
}

/// Directed k-path: one new altruist `n` with an arc to every source vertex.
pub fn from_directed_kpath(
    n: usize,
    arcs: &[(Vertex, Vertex)],
    k: usize,
) -> Result<ReductionOutput, ReductionError> {
    if k > n {
        return Err(invalid(format!("k = {k} exceeds the {n} source vertices")));
    }
    if let Some(&(u, v)) = arcs.iter().find(|&&(u, v)| u == v || u >= n || v >= n) {
        return Err(invalid(format!(
            "source arc ({u}, {v}) is a self-loop or out of range"
        )));
    }
    let a = n;
    let all_arcs = arcs.iter().copied().chain((0..n).map(|v| (a, v)));
    let instance = Instance::new(n + 1, [a], all_arcs, k, 0, k);
    let expected = (n <= EXPECTED_LIMIT).then(|| source::k_path(n, arcs, k).is_some().into());
    Ok(ReductionOutput {
        instance,
        expected,
        paper_params: PaperParams {
            l_p: Some(k + 1),
            l_c: Some(0),
            t: k + 1,
        },
        gadget: Gadget::KPath { altruist: a, k },
    })
}

fn check_bin_source(weights: &[u64], k: usize) -> Result<u64, ReductionError> {
    if k == 0 {
        return Err(invalid("at least one bin is required"));
    }
    if weights.is_empty() || weights.contains(&0) {
        return Err(invalid(
            "weights must be a nonempty list of positive integers",
        ));
    }
    let total: u64 = weights.iter().sum();
    if !total.is_multiple_of(k as u64) {
        return Err(invalid(format!(
            "total weight {total} is not divisible by {k} bins"
        )));
    }
    Ok(total)
}

fn bin_scale(weights: &[u64], k: usize, scaling: Scaling) -> Result<u64, ReductionError> {
    match scaling {
        Scaling::Paper => {
            let n = weights.len() as u64;
            let floor = 3 * (k as u64).pow(2) * n * n;
            Ok(if weights.iter().any(|&w| w < floor) {
                floor
            } else {
                1
            })
        }
        Scaling::Custom(0) => Err(invalid("scale must be positive")),
        Scaling::Custom(s) => Ok(s),
    }
}

fn bin_gadget(
    weights: &[u64],
    k: usize,
    scaling: Scaling,
    cycles: bool,
) -> Result<ReductionOutput, ReductionError> {
    let total = check_bin_source(weights, k)?;
    let scale = bin_scale(weights, k, scaling)?;
    let n = weights.len();
    let scaled: Vec<usize> = weights.iter().map(|&w| (w * scale) as usize).collect();
    let w_total: usize = scaled.iter().sum();
    let capacity = w_total / k;

    let spine: Vec<Vec<Vertex>> = (0..k).map(|j| (j * n..(j + 1) * n).collect()).collect();
    let mut items = Vec::with_capacity(n);
    let mut next = k * n;
    for &w in &scaled {
        items.push([next, next + w - 1]);
        next += w;
    }
    let vertex_count = next;

    let mut arcs = Vec::new();
    for &[first, last] in &items {
        arcs.extend((first..last).map(|u| (u, u + 1)));
    }
    for row in &spine {
        for i in 0..n {
            arcs.push((row[i], items[i][0]));
            if i + 1 < n {
                arcs.push((row[i], row[i + 1]));
                arcs.push((items[i][1], row[i + 1]));
            }
        }
        if cycles {
            arcs.push((items[n - 1][1], row[0]));
            // Without this arc a bin that misses the last item could not
            // close its cycle.
            if n > 1 {
                arcs.push((row[n - 1], row[0]));
            }
        }
    }

    let bags = path_decomposition(&spine, &items, cycles);
    let expected = (n <= EXPECTED_LIMIT).then(|| source::bin_packing(weights, k).is_some().into());
    let (instance, paper_params) = if cycles {
        (
            Instance::new(vertex_count, [], arcs, 0, capacity + n, w_total + k * n),
            PaperParams {
                l_p: None,
                l_c: Some(capacity + n),
                t: vertex_count,
            },
        )
    } else {
        let altruists: Vec<Vertex> = spine.iter().map(|row| row[0]).collect();
        (
            Instance::new(
                vertex_count,
                altruists,
                arcs,
                capacity + n - 1,
                0,
                w_total + k * (n - 1),
            ),
            PaperParams {
                l_p: Some(capacity + n),
                l_c: None,
                t: w_total + k * (n - 1),
            },
        )
    };
    Ok(ReductionOutput {
        instance,
        expected,
        paper_params,
        gadget: Gadget::BinPacking {
            cycles,
            scale,
            capacity: total * scale / k as u64,
            spine,
            items,
            bags,
        },
    })
}

/// One bag per arc of every item path: the spine columns around the item,
/// both ends of the item and the current arc (plus the first spine column
/// when cycles close back to it).
fn path_decomposition(
    spine: &[Vec<Vertex>],
    items: &[[Vertex; 2]],
    cycles: bool,
) -> Vec<Vec<Vertex>> {
    let mut bags = Vec::new();
    for (i, &[first, last]) in items.iter().enumerate() {
        let mut base: Vec<Vertex> = spine.iter().map(|row| row[i]).collect();
        if i + 1 < items.len() {
            base.extend(spine.iter().map(|row| row[i + 1]));
        }
        if cycles {
            base.extend(spine.iter().map(|row| row[0]));
        }
        base.extend([first, last]);
        let steps: Vec<[Vertex; 2]> = if first == last {
            vec![[first, first]]
        } else {
            (first..last).map(|u| [u, u + 1]).collect()
        };
        for step in steps {
            let mut bag = base.clone();
            bag.extend(step);
            bag.sort_unstable();
            bag.dedup();
            bags.push(bag);
        }
    }
    bags
}

/// Bin packing into disjoint chains: bin `j` becomes the chain rooted at its
/// first spine vertex.
pub fn binpacking_to_paths(
    weights: &[u64],
    k: usize,
    scaling: Scaling,
) -> Result<ReductionOutput, ReductionError> {
    bin_gadget(weights, k, scaling, false)
}

/// Bin packing into disjoint cycles through the spine columns.
pub fn binpacking_to_cycles(
    weights: &[u64],
    k: usize,
    scaling: Scaling,
) -> Result<ReductionOutput, ReductionError> {
    bin_gadget(weights, k, scaling, true)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShiftOutput {
    pub a: Vec<u64>,
    pub b: u64,
    /// The shift applied, absent when the input was returned unchanged.
    pub shift: Option<u64>,
    pub expected: Option<Expected>,
}

/// Adds a constant `C > 2B` to every element so that any subset summing to
/// the new target has exactly three elements.
pub fn three_partition_shift(
    a: &[u64],
    b: u64,
    scaling: Scaling,
) -> Result<ShiftOutput, ReductionError> {
    if !a.len().is_multiple_of(3) {
        return Err(invalid(format!(
            "{} elements is not a multiple of three",
            a.len()
        )));
    }
    if a.iter().any(|&x| x > b) {
        return Ok(ShiftOutput {
            a: a.to_vec(),
            b,
            shift: None,
            expected: Some(Expected::No),
        });
    }
    let c = match scaling {
        Scaling::Paper => 10 * b,
        Scaling::Custom(c) if c > 2 * b => c,
        Scaling::Custom(c) => {
            return Err(invalid(format!(
                "shift {c} must exceed twice the target {b}"
            )))
        }
    };
    Ok(ShiftOutput {
        a: a.iter().map(|&x| x + c).collect(),
        b: 3 * c + b,
        shift: Some(c),
        expected: None,
    })
}

/// Elements become vertex paths, `m` altruists can enter any path, and a
/// path may be followed by any later path. A chain then covers exactly a
/// group of elements.
pub fn fixed3_to_dag(a: &[u64], b: u64) -> Result<ReductionOutput, ReductionError> {
    if !a.len().is_multiple_of(3) {
        return Err(invalid(format!(
            "{} elements is not a multiple of three",
            a.len()
        )));
    }
    if a.contains(&0) {
        return Err(invalid("elements must be positive"));
    }
    let m = a.len() / 3;
    let altruists: Vec<Vertex> = (0..m).collect();
    let mut elements = Vec::with_capacity(a.len());
    let mut next = m;
    for &x in a {
        elements.push([next, next + x as usize - 1]);
        next += x as usize;
    }
    let mut arcs = Vec::new();
    for (i, &[first, last]) in elements.iter().enumerate() {
        arcs.extend((first..last).map(|u| (u, u + 1)));
        arcs.extend(altruists.iter().map(|&s| (s, first)));
        arcs.extend(elements[i + 1..].iter().map(|&[f, _]| (last, f)));
    }
    let sum: u64 = a.iter().sum();
    // Asking for max(sum, m b) keeps the answer "no" whenever the elements
    // cannot fill all m groups exactly.
    let t = sum.max(m as u64 * b) as usize;
    let expected =
        (a.len() <= EXPECTED_LIMIT + 3).then(|| source::exact_packing(a, m, b).is_some().into());
    Ok(ReductionOutput {
        instance: Instance::new(next, altruists.iter().copied(), arcs, b as usize, 0, t),
        expected,
        paper_params: PaperParams {
            l_p: Some(b as usize + 1),
            l_c: Some(0),
            t: sum as usize + m,
        },
        gadget: Gadget::FixedThreePartition {
            altruists,
            elements,
            target: b,
        },
    })
}
