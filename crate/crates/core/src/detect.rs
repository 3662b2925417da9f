//! Detection of colorful chains and cycles.
//!
//! A path whose patients carry pairwise distinct colors is automatically
//! simple, so the dynamic program only tracks `(end vertex, used colors)`
//! and never keeps a visited set. States are grown one patient at a time;
//! within a layer they are expanded in `(vertex, color set)` order so every
//! returned witness is deterministic.

use std::collections::{HashMap, HashSet};
use std::fmt;

use thiserror::Error;

use crate::color::{Color, Coloring};
use crate::instance::{Chain, Cycle, Instance, Vertex};

/// Largest palette a [`ColorSet`] can address.
pub const MAX_PALETTE: usize = 32;

/// A subset of a palette, one bit per color.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ColorSet(u32);

impl ColorSet {
    pub const EMPTY: ColorSet = ColorSet(0);

    pub fn from_bits(bits: u32) -> Self {
        ColorSet(bits)
    }

    /// `{0, .., k-1}`.
    pub fn full(k: usize) -> Self {
        assert!(k <= MAX_PALETTE, "palette {k} too large for a color set");
        if k == MAX_PALETTE {
            ColorSet(u32::MAX)
        } else {
            ColorSet((1u32 << k) - 1)
        }
    }

    pub fn single(c: Color) -> Self {
        ColorSet(1 << c)
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, c: Color) -> bool {
        (c as usize) < MAX_PALETTE && self.0 & (1 << c) != 0
    }

    pub fn with(self, c: Color) -> Self {
        ColorSet(self.0 | 1 << c)
    }

    pub fn is_subset(self, other: ColorSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn difference(self, other: ColorSet) -> Self {
        ColorSet(self.0 & !other.0)
    }

    pub fn iter(self) -> impl Iterator<Item = Color> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let c = bits.trailing_zeros() as Color;
                bits &= bits - 1;
                Some(c)
            }
        })
    }
}

impl FromIterator<Color> for ColorSet {
    fn from_iter<I: IntoIterator<Item = Color>>(iter: I) -> Self {
        iter.into_iter().fold(ColorSet::EMPTY, ColorSet::with)
    }
}

impl fmt::Debug for ColorSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DetectError {
    #[error("color set of size {size} exceeds the length bound {bound}")]
    ColorSetTooLarge { size: usize, bound: usize },
    #[error("color set of size {size} is below the minimum {min}")]
    ColorSetTooSmall { size: usize, min: usize },
    #[error("an altruist color was requested but the coloring has no altruist palette")]
    NoAltruistPalette,
    #[error("palette of size {0} exceeds {MAX_PALETTE}")]
    PaletteTooLarge(usize),
}

/// A detection result together with the number of distinct
/// `(end vertex, color set)` states the search touched.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Detection<T> {
    pub witness: Option<T>,
    pub states: usize,
}

type State = (Vertex, u32);

/// One layer of the path DP: all states whose path has the same number of
/// patients, with the predecessor vertex of each state.
#[derive(Default)]
struct Layer {
    order: Vec<State>,
    parent: HashMap<State, Vertex>,
}

impl Layer {
    fn insert(&mut self, s: State, parent: Vertex) {
        if let std::collections::hash_map::Entry::Vacant(e) = self.parent.entry(s) {
            e.insert(parent);
            self.order.push(s);
        }
    }

    fn sort(&mut self) {
        self.order.sort_unstable();
    }
}

/// Grows colorful paths from `seeds` for up to `max_len` patients. Only
/// vertices accepted by `allowed` and colors inside `palette` are used.
fn grow(
    inst: &Instance,
    coloring: &Coloring,
    seeds: Layer,
    max_len: usize,
    palette: u32,
    allowed: impl Fn(Vertex) -> bool,
) -> Vec<Layer> {
    let mut layers = vec![seeds];
    layers[0].sort();
    while layers.len() < max_len {
        let mut next = Layer::default();
        let last = layers.last().unwrap();
        for &(v, mask) in &last.order {
            for &w in inst.successors(v) {
                if !allowed(w) || inst.is_altruist(w) {
                    continue;
                }
                let bit = 1u32 << coloring.color(w);
                if palette & bit == 0 || mask & bit != 0 {
                    continue;
                }
                next.insert((w, mask | bit), v);
            }
        }
        if next.order.is_empty() {
            break;
        }
        next.sort();
        layers.push(next);
    }
    layers
}

/// Walks parent links back from `state` in layer `depth`; returns the root
/// (parent of the first patient) and the patient sequence.
fn trace(
    layers: &[Layer],
    coloring: &Coloring,
    depth: usize,
    state: State,
) -> (Vertex, Vec<Vertex>) {
    let mut path = Vec::with_capacity(depth + 1);
    let (mut v, mut mask) = state;
    let mut d = depth;
    loop {
        path.push(v);
        let parent = layers[d].parent[&(v, mask)];
        if d == 0 {
            path.reverse();
            return (parent, path);
        }
        mask &= !(1u32 << coloring.color(v));
        v = parent;
        d -= 1;
    }
}

fn check_palette(coloring: &Coloring) -> Result<(), DetectError> {
    let k = coloring.patient_palette();
    if k > MAX_PALETTE {
        return Err(DetectError::PaletteTooLarge(k));
    }
    Ok(())
}

/// Finds an altruist-rooted chain whose patients use each color of `set`
/// exactly once. With `start_color`, only altruists of that altruist color
/// may root the chain.
pub fn colorful_chain(
    inst: &Instance,
    coloring: &Coloring,
    set: ColorSet,
    start_color: Option<Color>,
) -> Result<Option<Chain>, DetectError> {
    colorful_chain_counted(inst, coloring, set, start_color).map(|d| d.witness)
}

pub fn colorful_chain_counted(
    inst: &Instance,
    coloring: &Coloring,
    set: ColorSet,
    start_color: Option<Color>,
) -> Result<Detection<Chain>, DetectError> {
    check_palette(coloring)?;
    if set.is_empty() {
        return Err(DetectError::ColorSetTooSmall { size: 0, min: 1 });
    }
    if set.len() > inst.max_chain_len() {
        return Err(DetectError::ColorSetTooLarge {
            size: set.len(),
            bound: inst.max_chain_len(),
        });
    }
    if start_color.is_some() && coloring.altruist_palette().is_none() {
        return Err(DetectError::NoAltruistPalette);
    }

    let mut seeds = Layer::default();
    for &a in inst.altruists() {
        if start_color.is_some_and(|b| coloring.color(a) != b) {
            continue;
        }
        for &v in inst.successors(a) {
            let c = coloring.color(v);
            if !inst.is_altruist(v) && set.contains(c) {
                seeds.insert((v, 1 << c), a);
            }
        }
    }
    let layers = grow(inst, coloring, seeds, set.len(), set.bits(), |_| true);
    let states = layers.iter().map(|l| l.order.len()).sum();
    let depth = set.len() - 1;
    let witness = layers.get(depth).and_then(|layer| {
        layer
            .order
            .iter()
            .find(|&&(_, mask)| mask == set.bits())
            .map(|&s| {
                let (root, patients) = trace(&layers, coloring, depth, s);
                Chain::new(root, patients)
            })
    });
    Ok(Detection { witness, states })
}

/// Finds a cycle whose patients use each color of `set` exactly once. The
/// returned cycle starts at its smallest vertex.
pub fn colorful_cycle(
    inst: &Instance,
    coloring: &Coloring,
    set: ColorSet,
) -> Result<Option<Cycle>, DetectError> {
    colorful_cycle_counted(inst, coloring, set).map(|d| d.witness)
}

pub fn colorful_cycle_counted(
    inst: &Instance,
    coloring: &Coloring,
    set: ColorSet,
) -> Result<Detection<Cycle>, DetectError> {
    check_palette(coloring)?;
    if set.len() < 2 {
        return Err(DetectError::ColorSetTooSmall {
            size: set.len(),
            min: 2,
        });
    }
    if set.len() > inst.max_cycle_len() {
        return Err(DetectError::ColorSetTooLarge {
            size: set.len(),
            bound: inst.max_cycle_len(),
        });
    }

    // Guessing the closing arc (u, w) with w the smallest vertex of the
    // cycle: grow paths from w through larger ids and close when u -> w.
    let mut touched: HashSet<State> = HashSet::new();
    let depth = set.len() - 1;
    for w in inst.patients() {
        let cw = coloring.color(w);
        if !set.contains(cw) {
            continue;
        }
        let mut seeds = Layer::default();
        seeds.insert((w, 1 << cw), w);
        let layers = grow(inst, coloring, seeds, set.len(), set.bits(), |v| v > w);
        touched.extend(layers.iter().flat_map(|l| l.order.iter().copied()));
        let Some(layer) = layers.get(depth) else {
            continue;
        };
        let closing = layer
            .order
            .iter()
            .find(|&&(u, mask)| mask == set.bits() && inst.has_arc(u, w));
        if let Some(&s) = closing {
            let (_, patients) = trace(&layers, coloring, depth, s);
            return Ok(Detection {
                witness: Some(Cycle::new(patients)),
                states: touched.len(),
            });
        }
    }
    Ok(Detection {
        witness: None,
        states: touched.len(),
    })
}

/// How chain roots are grouped in a [`ComponentTable`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainRoots {
    /// Any altruist may root any chain.
    AnyAltruist,
    /// Chains are tabulated separately per altruist color.
    ByAltruistColor,
}

const NONE: u32 = u32::MAX;

/// Colorful witnesses for every color set at once, for one coloring.
///
/// `cycle(s)` holds a cycle using exactly the colors of `s`; `chain(g, s)`
/// holds a chain whose root belongs to group `g` (group 0 for
/// [`ChainRoots::AnyAltruist`], the altruist color otherwise).
#[derive(Debug, Clone)]
pub struct ComponentTable {
    palette: usize,
    cycle_at: Vec<u32>,
    cycles: Vec<Cycle>,
    chain_at: Vec<Vec<u32>>,
    chains: Vec<Chain>,
}

impl ComponentTable {
    pub fn build(
        inst: &Instance,
        coloring: &Coloring,
        roots: ChainRoots,
    ) -> Result<Self, DetectError> {
        check_palette(coloring)?;
        let k = coloring.patient_palette();
        let size = 1usize << k;
        let all = ColorSet::full(k).bits();
        let groups = match roots {
            ChainRoots::AnyAltruist => 1,
            ChainRoots::ByAltruistColor => coloring
                .altruist_palette()
                .ok_or(DetectError::NoAltruistPalette)?,
        };
        let mut table = ComponentTable {
            palette: k,
            cycle_at: vec![NONE; size],
            cycles: Vec::new(),
            chain_at: vec![vec![NONE; size]; groups],
            chains: Vec::new(),
        };

        let cycle_len = inst.max_cycle_len().min(k);
        if cycle_len >= 2 {
            for w in inst.patients() {
                let mut seeds = Layer::default();
                seeds.insert((w, 1 << coloring.color(w)), w);
                let layers = grow(inst, coloring, seeds, cycle_len, all, |v| v > w);
                for (depth, layer) in layers.iter().enumerate().skip(1) {
                    for &(u, mask) in &layer.order {
                        if table.cycle_at[mask as usize] == NONE && inst.has_arc(u, w) {
                            let (_, patients) = trace(&layers, coloring, depth, (u, mask));
                            table.cycle_at[mask as usize] = table.cycles.len() as u32;
                            table.cycles.push(Cycle::new(patients));
                        }
                    }
                }
            }
        }

        let chain_len = inst.max_chain_len().min(k);
        if chain_len >= 1 {
            for g in 0..groups {
                let mut seeds = Layer::default();
                for &a in inst.altruists() {
                    if roots == ChainRoots::ByAltruistColor && coloring.color(a) as usize != g {
                        continue;
                    }
                    for &v in inst.successors(a) {
                        if !inst.is_altruist(v) {
                            seeds.insert((v, 1 << coloring.color(v)), a);
                        }
                    }
                }
                let layers = grow(inst, coloring, seeds, chain_len, all, |_| true);
                for (depth, layer) in layers.iter().enumerate() {
                    for &(v, mask) in &layer.order {
                        if table.chain_at[g][mask as usize] == NONE {
                            let (root, patients) = trace(&layers, coloring, depth, (v, mask));
                            table.chain_at[g][mask as usize] = table.chains.len() as u32;
                            table.chains.push(Chain::new(root, patients));
                        }
                    }
                }
            }
        }
        Ok(table)
    }

    pub fn palette(&self) -> usize {
        self.palette
    }

    pub fn chain_groups(&self) -> usize {
        self.chain_at.len()
    }

    pub fn cycle(&self, set: ColorSet) -> Option<&Cycle> {
        match self.cycle_at[set.bits() as usize] {
            NONE => None,
            i => Some(&self.cycles[i as usize]),
        }
    }

    pub fn has_cycle(&self, set: ColorSet) -> bool {
        self.cycle_at[set.bits() as usize] != NONE
    }

    pub fn chain(&self, group: usize, set: ColorSet) -> Option<&Chain> {
        match self.chain_at[group][set.bits() as usize] {
            NONE => None,
            i => Some(&self.chains[i as usize]),
        }
    }

    pub fn has_chain(&self, group: usize, set: ColorSet) -> bool {
        self.chain_at[group][set.bits() as usize] != NONE
    }

    /// Color sets that admit a cycle, in increasing bit order.
    pub fn cycle_sets(&self) -> impl Iterator<Item = ColorSet> + '_ {
        self.cycle_at
            .iter()
            .enumerate()
            .filter(|(_, &i)| i != NONE)
            .map(|(s, _)| ColorSet(s as u32))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn colors(inst: &Instance, k: usize, c: &[Color]) -> Coloring {
        Coloring::from_vertex_colors(inst, k, None, c.to_vec()).unwrap()
    }

    fn set(cs: &[Color]) -> ColorSet {
        cs.iter().copied().collect()
    }

    #[test]
    fn color_set_ops() {
        let s = set(&[0, 3]);
        assert_eq!(s.len(), 2);
        assert!(s.contains(3) && !s.contains(1));
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![0, 3]);
        assert!(set(&[3]).is_subset(s));
        assert_eq!(s.difference(set(&[0])), set(&[3]));
        assert_eq!(ColorSet::full(3).bits(), 0b111);
        assert_eq!(ColorSet::full(32).len(), 32);
    }

    #[test]
    fn chain_along_unique_path() {
        let inst = Instance::new(3, [0], [(0, 1), (1, 2)], 2, 0, 0);
        let col = colors(&inst, 2, &[0, 0, 1]);
        let chain = colorful_chain(&inst, &col, set(&[0, 1]), None).unwrap();
        assert_eq!(chain, Some(Chain::new(0, vec![1, 2])));
        assert_eq!(colorful_chain(&inst, &col, set(&[1]), None).unwrap(), None);
    }

    #[test]
    fn chain_size_bound() {
        let inst = Instance::new(3, [0], [(0, 1), (1, 2)], 1, 0, 0);
        let col = colors(&inst, 2, &[0, 0, 1]);
        assert!(matches!(
            colorful_chain(&inst, &col, set(&[0, 1]), None),
            Err(DetectError::ColorSetTooLarge { size: 2, bound: 1 })
        ));
    }

    #[test]
    fn chain_start_color_filter() {
        let inst = Instance::new(4, [0, 1], [(0, 2), (1, 3)], 1, 0, 0);
        let col = Coloring::from_vertex_colors(&inst, 2, Some(2), vec![0, 1, 0, 1]).unwrap();
        assert_eq!(
            colorful_chain(&inst, &col, set(&[0]), Some(0)).unwrap(),
            Some(Chain::new(0, vec![2]))
        );
        assert_eq!(
            colorful_chain(&inst, &col, set(&[0]), Some(1)).unwrap(),
            None
        );
        let plain = colors(&inst, 2, &[0, 0, 0, 1]);
        assert_eq!(
            colorful_chain(&inst, &plain, set(&[0]), Some(0)),
            Err(DetectError::NoAltruistPalette)
        );
    }

    #[test]
    fn triangle_cycle() {
        let inst = Instance::new(3, [], [(1, 2), (2, 0), (0, 1)], 0, 3, 0);
        let col = colors(&inst, 3, &[0, 1, 2]);
        let cyc = colorful_cycle(&inst, &col, ColorSet::full(3)).unwrap();
        assert_eq!(cyc, Some(Cycle::new(vec![0, 1, 2])));
        assert_eq!(colorful_cycle(&inst, &col, set(&[0, 1])).unwrap(), None);
        assert!(matches!(
            colorful_cycle(&inst, &col, set(&[0])),
            Err(DetectError::ColorSetTooSmall { .. })
        ));
    }

    #[test]
    fn four_cycle_with_two_colors() {
        let inst = Instance::new(4, [], [(0, 1), (1, 2), (2, 3), (3, 0)], 0, 4, 0);
        let col = colors(&inst, 2, &[0, 1, 0, 1]);
        assert_eq!(colorful_cycle(&inst, &col, set(&[0, 1])).unwrap(), None);
    }

    #[test]
    fn state_bound() {
        let inst = Instance::new(
            5,
            [0],
            [
                (0, 1),
                (0, 2),
                (1, 2),
                (2, 3),
                (3, 4),
                (4, 1),
                (2, 1),
                (3, 1),
            ],
            4,
            4,
            0,
        );
        let col = colors(&inst, 4, &[0, 0, 1, 2, 3]);
        for bits in 1u32..16 {
            let s = ColorSet::from_bits(bits);
            let d = colorful_chain_counted(&inst, &col, s, None).unwrap();
            assert!(d.states <= 5 << s.len());
            if s.len() >= 2 {
                let d = colorful_cycle_counted(&inst, &col, s).unwrap();
                assert!(d.states <= 5 << s.len());
            }
        }
    }

    #[test]
    fn table_matches_single_queries() {
        let inst = Instance::new(
            6,
            [0],
            [
                (0, 1),
                (0, 2),
                (1, 2),
                (2, 3),
                (3, 1),
                (3, 4),
                (4, 5),
                (5, 3),
                (2, 5),
            ],
            3,
            3,
            0,
        );
        let col = colors(&inst, 4, &[0, 0, 1, 2, 3, 1]);
        let table = ComponentTable::build(&inst, &col, ChainRoots::AnyAltruist).unwrap();
        for bits in 1u32..16 {
            let s = ColorSet::from_bits(bits);
            if s.len() <= 3 {
                let single = colorful_chain(&inst, &col, s, None).unwrap();
                assert_eq!(single.is_some(), table.has_chain(0, s), "chain {s:?}");
            }
            if (2..=3).contains(&s.len()) {
                let single = colorful_cycle(&inst, &col, s).unwrap();
                assert_eq!(single.is_some(), table.has_cycle(s), "cycle {s:?}");
            }
        }
    }
}
