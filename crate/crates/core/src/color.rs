//! Random colorings and deterministic perfect hash families.
//!
//! Colors are 0-based: a palette of size `k` is `{0, .., k-1}`.
//!
//! [`deterministic_family`] builds an `(n, k)`-perfect hash family, i.e. a
//! list of maps `[n] -> [k]` such that every `k`-subset of `[n]` is mapped
//! injectively by at least one member. Small universes (`n <= k^2`) get a
//! greedy cover computed directly over their `k`-subsets. Larger universes
//! are first hashed into `[k^2]` by the maps `x -> ((a*x + b) mod p) mod k^2`
//! (one of which is injective on any fixed `k`-subset) and then composed with
//! the greedy family of `[k^2]`.

use std::collections::{HashMap, HashSet};
use std::sync::{Arc, Mutex, OnceLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::instance::{Instance, Vertex};

pub type Color = u8;

/// Default cap on the palette handled by the two-stage construction.
pub const DEFAULT_K_MAX: usize = 6;

/// Default number of subsets [`verify_family`] is willing to enumerate.
pub const DEFAULT_VERIFY_BUDGET: u64 = 50_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ColorError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("palette of size {k} exceeds the deterministic limit k_max = {k_max}")]
    PaletteTooLarge { k: usize, k_max: usize },
    #[error("{subsets} subsets exceed the enumeration budget of {budget}")]
    BudgetExceeded { subsets: u64, budget: u64 },
    #[error("no member of the family is injective on {0:?}")]
    Uncovered(Vec<usize>),
}

fn invalid(msg: impl Into<String>) -> ColorError {
    ColorError::InvalidParameter(msg.into())
}

/// A map from a universe `0..len` into a palette `0..palette`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ColorMap {
    palette: usize,
    colors: Vec<Color>,
}

impl ColorMap {
    pub fn new(palette: usize, colors: Vec<Color>) -> Result<Self, ColorError> {
        if palette > Color::MAX as usize + 1 {
            return Err(invalid(format!(
                "palette {palette} does not fit in a color byte"
            )));
        }
        if let Some(&c) = colors.iter().find(|&&c| c as usize >= palette) {
            return Err(invalid(format!(
                "color {c} outside palette of size {palette}"
            )));
        }
        Ok(ColorMap { palette, colors })
    }

    /// The constant map onto color 0.
    pub fn constant(universe: usize) -> Self {
        ColorMap {
            palette: 1,
            colors: vec![0; universe],
        }
    }

    pub fn palette(&self) -> usize {
        self.palette
    }

    pub fn len(&self) -> usize {
        self.colors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.colors.is_empty()
    }

    pub fn color(&self, x: usize) -> Color {
        self.colors[x]
    }

    pub fn as_slice(&self) -> &[Color] {
        &self.colors
    }

    pub fn is_injective_on(&self, subset: &[usize]) -> bool {
        injective(&self.colors, subset)
    }
}

fn injective(colors: &[Color], subset: &[usize]) -> bool {
    let mut seen = [0u64; 4];
    for &x in subset {
        let c = colors[x] as usize;
        let (word, bit) = (c / 64, 1u64 << (c % 64));
        if seen[word] & bit != 0 {
            return false;
        }
        seen[word] |= bit;
    }
    true
}

/// Each universe element gets an independent uniform color from `0..k`.
pub fn random_coloring(universe: usize, k: usize, seed: u64) -> Result<ColorMap, ColorError> {
    if k == 0 && universe > 0 {
        return Err(invalid("a nonempty universe needs at least one color"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_coloring_from(&mut rng, universe, k)
}

pub(crate) fn random_coloring_from<R: Rng>(
    rng: &mut R,
    universe: usize,
    k: usize,
) -> Result<ColorMap, ColorError> {
    let colors = (0..universe)
        .map(|_| rng.gen_range(0..k) as Color)
        .collect();
    ColorMap::new(k.max(1), colors)
}

/// Number of independent random colorings after which a fixed `k`-element
/// witness has stayed non-colorful with probability at most `delta`:
/// `ceil(e^k * ln(1/delta))`.
pub fn trial_count(k: usize, delta: f64) -> Result<u64, ColorError> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(invalid(format!(
            "failure probability {delta} not in (0, 1)"
        )));
    }
    let trials = ((k as f64).exp() * (1.0 / delta).ln()).ceil();
    Ok(if trials >= u64::MAX as f64 {
        u64::MAX
    } else {
        (trials as u64).max(1)
    })
}

/// A patient (and optionally altruist) coloring of one instance.
///
/// Patients draw from `0..patient_palette`, altruists from
/// `0..altruist_palette` when that palette is present.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coloring {
    patient_palette: usize,
    altruist_palette: Option<usize>,
    colors: Vec<Color>,
}

impl Coloring {
    /// Combines maps over the patient and altruist universes. Both maps are
    /// indexed by rank: the `i`-th smallest patient id gets `patients.color(i)`.
    pub fn new(
        inst: &Instance,
        patients: &ColorMap,
        altruists: Option<&ColorMap>,
    ) -> Result<Self, ColorError> {
        if patients.len() != inst.patient_count() {
            return Err(invalid(format!(
                "patient map covers {} elements, instance has {} patients",
                patients.len(),
                inst.patient_count()
            )));
        }
        if let Some(a) = altruists {
            if a.len() != inst.altruists().len() {
                return Err(invalid(format!(
                    "altruist map covers {} elements, instance has {} altruists",
                    a.len(),
                    inst.altruists().len()
                )));
            }
        }
        let mut colors = vec![0; inst.vertex_count()];
        for (rank, v) in inst.patients().enumerate() {
            colors[v] = patients.color(rank);
        }
        if let Some(a) = altruists {
            for (rank, &v) in inst.altruists().iter().enumerate() {
                colors[v] = a.color(rank);
            }
        }
        Ok(Coloring {
            patient_palette: patients.palette(),
            altruist_palette: altruists.map(ColorMap::palette),
            colors,
        })
    }

    /// Colors given directly per vertex id. Altruist entries are ignored
    /// when there is no altruist palette.
    pub fn from_vertex_colors(
        inst: &Instance,
        patient_palette: usize,
        altruist_palette: Option<usize>,
        mut colors: Vec<Color>,
    ) -> Result<Self, ColorError> {
        if colors.len() != inst.vertex_count() {
            return Err(invalid(format!(
                "{} colors given for {} vertices",
                colors.len(),
                inst.vertex_count()
            )));
        }
        for (v, c) in colors.iter_mut().enumerate() {
            let palette = if inst.is_altruist(v) {
                match altruist_palette {
                    Some(p) => p,
                    None => {
                        *c = 0;
                        continue;
                    }
                }
            } else {
                patient_palette
            };
            if *c as usize >= palette {
                return Err(invalid(format!(
                    "vertex {v} has color {c} outside palette {palette}"
                )));
            }
        }
        Ok(Coloring {
            patient_palette,
            altruist_palette,
            colors,
        })
    }

    pub fn color(&self, v: Vertex) -> Color {
        self.colors[v]
    }

    pub fn patient_palette(&self) -> usize {
        self.patient_palette
    }

    pub fn altruist_palette(&self) -> Option<usize> {
        self.altruist_palette
    }

    pub fn vertex_colors(&self) -> &[Color] {
        &self.colors
    }
}

/// How a [`HashFamily`] was produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Construction {
    /// `k >= n` or `k == 1`: a single map suffices.
    Trivial,
    /// Greedy cover over the `k`-subsets of the universe itself.
    Direct { members: usize },
    /// Modular hashing into `[k^2]` composed with the greedy family of `[k^2]`.
    TwoStage {
        prime: usize,
        stage1: usize,
        stage2: usize,
    },
    /// Read back from a cache file.
    Loaded,
}

/// A finite family of maps from `0..universe` into `0..palette`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HashFamily {
    pub universe: usize,
    pub palette: usize,
    pub colorings: Vec<ColorMap>,
    pub construction: Construction,
}

impl HashFamily {
    pub fn len(&self) -> usize {
        self.colorings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.colorings.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FamilyOptions {
    pub k_max: usize,
    /// Use the prime-hashing stage even when the universe is small enough
    /// for a direct cover.
    pub force_two_stage: bool,
}

impl Default for FamilyOptions {
    fn default() -> Self {
        FamilyOptions {
            k_max: DEFAULT_K_MAX,
            force_two_stage: false,
        }
    }
}

pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

/// [`deterministic_family_with`] under default options.
pub fn deterministic_family(n: usize, k: usize) -> Result<HashFamily, ColorError> {
    deterministic_family_with(n, k, FamilyOptions::default())
}

/// Builds an `(n, k)`-perfect hash family.
///
/// The greedy stage enumerates `C(m, k)` subsets of an `m`-element universe;
/// it is allowed when `k <= k_max` or when `C(m, k)` stays within
/// `C(k_max^2, k_max)`.
pub fn deterministic_family_with(
    n: usize,
    k: usize,
    opts: FamilyOptions,
) -> Result<HashFamily, ColorError> {
    if k == 0 {
        return Err(invalid("palette must have at least one color"));
    }
    if k > Color::MAX as usize {
        return Err(ColorError::PaletteTooLarge {
            k,
            k_max: opts.k_max,
        });
    }
    let trivial = |colors: Vec<Color>| HashFamily {
        universe: n,
        palette: k,
        colorings: vec![ColorMap { palette: k, colors }],
        construction: Construction::Trivial,
    };
    if k == 1 {
        return Ok(trivial(vec![0; n]));
    }
    if k >= n {
        return Ok(trivial((0..n).map(|x| x as Color).collect()));
    }

    let k_sq = k * k;
    let budget = binomial((opts.k_max * opts.k_max) as u64, opts.k_max as u64);
    let direct = n <= k_sq && !opts.force_two_stage;
    let greedy_universe = if direct { n } else { k_sq };
    if k > opts.k_max && binomial(greedy_universe as u64, k as u64) > budget {
        return Err(ColorError::PaletteTooLarge {
            k,
            k_max: opts.k_max,
        });
    }

    let cover = greedy_cover(greedy_universe, k);
    if direct {
        let colorings: Vec<ColorMap> = cover
            .iter()
            .map(|c| ColorMap {
                palette: k,
                colors: c.clone(),
            })
            .collect();
        return Ok(HashFamily {
            universe: n,
            palette: k,
            construction: Construction::Direct {
                members: colorings.len(),
            },
            colorings,
        });
    }

    let p = smallest_prime_above(n.max(k_sq));
    let mut seen = HashSet::new();
    let mut colorings = Vec::new();
    let mut hashed = vec![0usize; n];
    for a in 1..p {
        for b in 0..p {
            for (x, h) in hashed.iter_mut().enumerate() {
                *h = ((a * x + b) % p) % k_sq;
            }
            for g in cover.iter() {
                let colors: Vec<Color> = hashed.iter().map(|&h| g[h]).collect();
                if seen.insert(colors.clone()) {
                    colorings.push(ColorMap { palette: k, colors });
                }
            }
        }
    }
    Ok(HashFamily {
        universe: n,
        palette: k,
        colorings,
        construction: Construction::TwoStage {
            prime: p,
            stage1: p * (p - 1),
            stage2: cover.len(),
        },
    })
}

pub(crate) fn smallest_prime_above(m: usize) -> usize {
    let is_prime = |q: usize| {
        q >= 2
            && (2..)
                .take_while(|d| d * d <= q)
                .all(|d| !q.is_multiple_of(d))
    };
    (m + 1..)
        .find(|&q| is_prime(q))
        .expect("primes are unbounded")
}

type Cover = Arc<Vec<Vec<Color>>>;

fn cover_cache() -> &'static Mutex<HashMap<(usize, usize), Cover>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Cover>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Greedy `(m, k)`-perfect family, memoized per process.
fn greedy_cover(m: usize, k: usize) -> Cover {
    if let Some(c) = cover_cache().lock().unwrap().get(&(m, k)) {
        return c.clone();
    }
    let cover = Arc::new(build_greedy_cover(m, k));
    cover_cache().lock().unwrap().insert((m, k), cover.clone());
    cover
}

/// Lexicographic `k`-subsets of `0..m`, flattened.
fn all_subsets(m: usize, k: usize) -> Vec<u8> {
    let mut out = Vec::with_capacity(binomial(m as u64, k as u64) as usize * k);
    let mut combo: Vec<usize> = (0..k).collect();
    loop {
        out.extend(combo.iter().map(|&x| x as u8));
        // advance to the next combination
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if combo[i] < m - k + i {
                break;
            }
        }
        combo[i] += 1;
        for j in i + 1..k {
            combo[j] = combo[j - 1] + 1;
        }
    }
}

/// Greedy set cover of the `k`-subsets of `[m]` by maps `[m] -> [k]`.
///
/// Each new map is built one element at a time by the method of conditional
/// expectations: element `x` takes the color that maximizes the expected
/// number of still-uncovered subsets that end up injective if the remaining
/// elements were colored uniformly at random. Ties go to the lowest color.
/// Every map therefore covers at least a `k!/k^k` fraction of what is left.
fn build_greedy_cover(m: usize, k: usize) -> Vec<Vec<Color>> {
    debug_assert!(k >= 2 && k < m && m <= u8::MAX as usize + 1 && k <= 32);
    let subsets = all_subsets(m, k);
    let count = subsets.len() / k;

    // weight[pos] = P(injective | first pos+1 elements distinct) = r!/k^r, r = k-1-pos
    let weight: Vec<f64> = (0..k)
        .map(|pos| {
            let r = k - 1 - pos;
            (1..=r).map(|i| i as f64 / k as f64).product()
        })
        .collect();

    const DEAD: u32 = 1 << 31;
    let mut uncovered: Vec<u32> = (0..count as u32).collect();
    let mut used = vec![0u32; count];
    let mut family = Vec::new();

    let build_index = |uncovered: &[u32]| {
        let mut index: Vec<Vec<u32>> = vec![Vec::new(); m];
        for &s in uncovered {
            for &x in &subsets[s as usize * k..(s as usize + 1) * k] {
                index[x as usize].push(s);
            }
        }
        index
    };
    let mut index = build_index(&uncovered);
    let mut indexed = uncovered.len();

    while !uncovered.is_empty() {
        if uncovered.len() * 2 < indexed {
            index = build_index(&uncovered);
            indexed = uncovered.len();
        }
        for &s in &uncovered {
            used[s as usize] = 0;
        }
        let mut colors = vec![0 as Color; m];
        let mut score = vec![0f64; k];
        for x in 0..m {
            score.iter_mut().for_each(|s| *s = 0.0);
            let mut total = 0.0;
            for &s in &index[x] {
                let u = used[s as usize];
                if u & DEAD != 0 {
                    continue;
                }
                let w = weight[u.count_ones() as usize];
                total += w;
                let mut bits = u;
                while bits != 0 {
                    score[bits.trailing_zeros() as usize] -= w;
                    bits &= bits - 1;
                }
            }
            let mut best = 0;
            for c in 1..k {
                if score[c] > score[best] + 1e-12 * total.max(1.0) {
                    best = c;
                }
            }
            colors[x] = best as Color;
            let bit = 1u32 << best;
            for &s in &index[x] {
                let u = &mut used[s as usize];
                if *u & DEAD != 0 {
                    continue;
                }
                if *u & bit != 0 {
                    *u = DEAD;
                } else {
                    *u |= bit;
                }
            }
        }
        // Subsets still alive are injective under this map; they become
        // permanently dead (covered) and drop out of the open list.
        let before = uncovered.len();
        uncovered.retain(|&s| {
            let u = &mut used[s as usize];
            let open = *u & DEAD != 0;
            *u = DEAD;
            open
        });
        if uncovered.len() == before {
            // Rounding made no progress: color the first open subset injectively.
            let first = uncovered[0] as usize;
            for (c, &x) in subsets[first * k..(first + 1) * k].iter().enumerate() {
                colors[x as usize] = c as Color;
            }
            uncovered.retain(|&t| {
                let t = t as usize;
                !injective(&colors, &to_usize(&subsets[t * k..(t + 1) * k]))
            });
        }
        family.push(colors);
    }
    family
}

fn to_usize(xs: &[u8]) -> Vec<usize> {
    xs.iter().map(|&x| x as usize).collect()
}

/// Exhaustively checks the perfectness of `fam`: every `palette`-subset of
/// the universe must be mapped injectively by some member.
pub fn verify_family(fam: &HashFamily) -> Result<(), ColorError> {
    verify_family_within(fam, DEFAULT_VERIFY_BUDGET)
}

pub fn verify_family_within(fam: &HashFamily, budget: u64) -> Result<(), ColorError> {
    let (n, k) = (fam.universe, fam.palette);
    if k > n {
        return Ok(());
    }
    let subsets = binomial(n as u64, k as u64);
    if subsets > budget {
        return Err(ColorError::BudgetExceeded { subsets, budget });
    }
    let mut combo: Vec<usize> = (0..k).collect();
    loop {
        if !fam.colorings.iter().any(|c| c.is_injective_on(&combo)) {
            return Err(ColorError::Uncovered(combo));
        }
        let mut i = k;
        loop {
            if i == 0 {
                return Ok(());
            }
            i -= 1;
            if combo[i] < n - k + i {
                break;
            }
        }
        combo[i] += 1;
        for j in i + 1..k {
            combo[j] = combo[j - 1] + 1;
        }
    }
}
