//! Color-coding solver for the clearing problem.
//!
//! For one coloring, a subset DP over patient color sets decides whether the
//! whole palette can be split into color classes that each carry a colorful
//! cycle or chain. Two variants exist:
//!
//! * [`solve_colorful_paper`] splits off chains rooted at any altruist. Two
//!   chains may then share their altruist, so its output must be verified.
//! * [`solve_colorful_corrected`] also colors altruists and lets every chain
//!   consume the color of its root, which keeps roots distinct.
//!
//! [`Solver`] drives either variant over random colorings or a perfect hash
//! family and re-verifies every witness before reporting it.

use std::collections::HashMap;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::color::{
    deterministic_family_with, random_coloring_from, trial_count, ColorError, ColorMap, Coloring,
    FamilyOptions, HashFamily, DEFAULT_K_MAX,
};
use crate::detect::{ChainRoots, ColorSet, ComponentTable, DetectError};
use crate::instance::{Instance, Solution};

/// Largest patient palette (plus altruist palette) the dense DP tables accept.
pub const MAX_DP_PALETTE: usize = 26;

pub const DEFAULT_DELTA: f64 = 0.01;
pub const DEFAULT_B_MAX: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Randomized,
    Deterministic,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Randomized => "randomized",
            Mode::Deterministic => "deterministic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    Paper,
    Corrected,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Paper => "paper",
            Variant::Corrected => "corrected",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub mode: Mode,
    pub variant: Variant,
    /// Failure probability per decision in randomized mode.
    pub delta: f64,
    /// Palette limit for the deterministic families.
    pub k_max: usize,
    /// Largest altruist palette the corrected variant may use.
    pub b_max: usize,
    pub seed: u64,
    /// Checked between colorings.
    pub timeout: Option<Duration>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            mode: Mode::Deterministic,
            variant: Variant::Corrected,
            delta: DEFAULT_DELTA,
            k_max: DEFAULT_K_MAX,
            b_max: DEFAULT_B_MAX,
            seed: 0,
            timeout: None,
        }
    }
}

impl SolverConfig {
    pub fn deterministic() -> Self {
        Self::default()
    }

    pub fn randomized(seed: u64) -> Self {
        SolverConfig {
            mode: Mode::Randomized,
            seed,
            ..Self::default()
        }
    }

    pub fn with_variant(mut self, variant: Variant) -> Self {
        self.variant = variant;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error(transparent)]
    Color(#[from] ColorError),
    #[error(transparent)]
    Detect(#[from] DetectError),
    #[error("palette of {0} colors is too large for the subset tables")]
    DpPaletteTooLarge(usize),
    #[error("coloring palettes do not fit the corrected variant: {0}")]
    PaletteMismatch(String),
    #[error("altruist palette {c} exceeds b_max = {b_max}")]
    AltruistPaletteTooLarge { c: usize, b_max: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("timed out after {colorings} colorings")]
    Timeout { colorings: u64 },
}

/// Result of one per-coloring DP run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColorfulOutcome {
    pub solution: Option<Solution>,
    /// Recurrence evaluations, one per (state, split-off color set) pair.
    pub transitions: u64,
}

fn check_dp_palette(width: usize) -> Result<(), SolverError> {
    if width > MAX_DP_PALETTE {
        return Err(SolverError::DpPaletteTooLarge(width));
    }
    Ok(())
}

/// Ascending nonempty submasks of `set`.
fn submasks(set: u32) -> impl Iterator<Item = u32> {
    let mut sub = 0u32;
    let mut done = set == 0;
    std::iter::from_fn(move || {
        if done {
            return None;
        }
        sub = sub.wrapping_sub(set) & set;
        done = sub == set;
        Some(sub)
    })
}

/// Subset DP over patient colors only.
///
/// `DP(T')` holds when some proper `T'' ⊂ T'` holds and `T' \ T''` carries a
/// colorful cycle or a chain from any altruist. Every pair `(T', T'')` is
/// evaluated, so the transition count is exactly `3^k - 2^k`. The witness
/// is assembled without checking that chain roots are distinct.
pub fn solve_colorful_paper(
    inst: &Instance,
    coloring: &Coloring,
) -> Result<ColorfulOutcome, SolverError> {
    let k = coloring.patient_palette();
    check_dp_palette(k)?;
    let table = ComponentTable::build(inst, coloring, ChainRoots::AnyAltruist)?;
    let size = 1usize << k;
    let mut reach = vec![false; size];
    let mut split = vec![0u32; size];
    reach[0] = true;
    let mut transitions = 0u64;
    for t in 1..size as u32 {
        for s in submasks(t) {
            transitions += 1;
            if !reach[t as usize] && reach[(t ^ s) as usize] {
                let set = ColorSet::from_bits(s);
                if table.has_cycle(set) || table.has_chain(0, set) {
                    reach[t as usize] = true;
                    split[t as usize] = s;
                }
            }
        }
    }
    let full = size as u32 - 1;
    let solution = reach[full as usize].then(|| {
        let mut sol = Solution::empty();
        let mut t = full;
        while t != 0 {
            let set = ColorSet::from_bits(split[t as usize]);
            match table.cycle(set) {
                Some(c) => sol.cycles.push(c.clone()),
                None => sol.chains.push(table.chain(0, set).unwrap().clone()),
            }
            t ^= set.bits();
        }
        sol
    });
    Ok(ColorfulOutcome {
        solution,
        transitions,
    })
}

const UNKNOWN: u8 = 0;
const NO: u8 = 1;
const YES: u8 = 2;
const CYCLE: u8 = u8::MAX;

/// Top-down DP over `(T', A')`: patient colors still to cover and altruist
/// colors still available. The component holding the lowest color of `T'`
/// is split off first, so each decomposition is reached once.
struct CorrectedDp<'a> {
    table: &'a ComponentTable,
    c: usize,
    memo: Vec<u8>,
    choice: Vec<(u32, u8)>,
    transitions: u64,
}

impl CorrectedDp<'_> {
    fn index(&self, t: u32, a: u32) -> usize {
        (t as usize) << self.c | a as usize
    }

    fn solve(&mut self, t: u32, a: u32) -> bool {
        if t == 0 {
            return true;
        }
        let idx = self.index(t, a);
        match self.memo[idx] {
            NO => return false,
            YES => return true,
            _ => {}
        }
        let low = t & t.wrapping_neg();
        let mut found = None;
        'outer: for sub in std::iter::once(0).chain(submasks(t ^ low)) {
            let s = sub | low;
            let set = ColorSet::from_bits(s);
            self.transitions += 1;
            if self.table.has_cycle(set) && self.solve(t ^ s, a) {
                found = Some((s, CYCLE));
                break;
            }
            for b in ColorSet::from_bits(a).iter() {
                if self.table.has_chain(b as usize, set) && self.solve(t ^ s, a & !(1 << b)) {
                    found = Some((s, b));
                    break 'outer;
                }
            }
        }
        match found {
            Some(ch) => {
                self.memo[idx] = YES;
                self.choice[idx] = ch;
                true
            }
            None => {
                self.memo[idx] = NO;
                false
            }
        }
    }
}

/// Subset DP over patient and altruist colors.
///
/// Decides whether the patient palette `[k]` splits into colorful cycles and
/// chains whose roots carry pairwise distinct altruist colors from `[c]`.
/// Using fewer than `c` chains is allowed. Returned solutions always verify.
pub fn solve_colorful_corrected(
    inst: &Instance,
    coloring: &Coloring,
) -> Result<ColorfulOutcome, SolverError> {
    let k = coloring.patient_palette();
    let c = coloring
        .altruist_palette()
        .ok_or_else(|| SolverError::PaletteMismatch("no altruist palette".into()))?;
    if c > k {
        return Err(SolverError::PaletteMismatch(format!(
            "altruist palette {c} exceeds patient palette {k}"
        )));
    }
    check_dp_palette(k + c)?;
    let table = ComponentTable::build(inst, coloring, ChainRoots::ByAltruistColor)?;
    let states = 1usize << (k + c);
    let mut dp = CorrectedDp {
        table: &table,
        c,
        memo: vec![UNKNOWN; states],
        choice: vec![(0, 0); states],
        transitions: 0,
    };
    let full = ColorSet::full(k).bits();
    let all_roots = ColorSet::full(c).bits();
    let solution = dp.solve(full, all_roots).then(|| {
        let mut sol = Solution::empty();
        let (mut t, mut a) = (full, all_roots);
        while t != 0 {
            let (s, kind) = dp.choice[dp.index(t, a)];
            let set = ColorSet::from_bits(s);
            if kind == CYCLE {
                sol.cycles.push(table.cycle(set).unwrap().clone());
            } else {
                sol.chains
                    .push(table.chain(kind as usize, set).unwrap().clone());
                a &= !(1 << kind);
            }
            t ^= s;
        }
        sol
    });
    Ok(ColorfulOutcome {
        solution,
        transitions: dp.transitions,
    })
}

/// Counters accumulated over the lifetime of a [`Solver`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolverStats {
    pub colorings_tried: u64,
    pub dp_transitions: u64,
    /// DP witnesses that failed verification and were discarded.
    pub rejected_witnesses: u64,
}

/// Runs decisions over one instance, caching hash families between calls.
pub struct Solver<'a> {
    inst: &'a Instance,
    cfg: SolverConfig,
    stats: SolverStats,
    families: HashMap<(usize, usize), Arc<HashFamily>>,
    started: Instant,
}

impl<'a> Solver<'a> {
    pub fn new(inst: &'a Instance, cfg: SolverConfig) -> Self {
        Solver {
            inst,
            cfg,
            stats: SolverStats::default(),
            families: HashMap::new(),
            started: Instant::now(),
        }
    }

    pub fn stats(&self) -> SolverStats {
        self.stats
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    fn family(&mut self, n: usize, k: usize) -> Result<Arc<HashFamily>, SolverError> {
        if let Some(f) = self.families.get(&(n, k)) {
            return Ok(f.clone());
        }
        let opts = FamilyOptions {
            k_max: self.cfg.k_max,
            ..FamilyOptions::default()
        };
        let fam = Arc::new(deterministic_family_with(n, k, opts)?);
        self.families.insert((n, k), fam.clone());
        Ok(fam)
    }

    fn check_deadline(&self) -> Result<(), SolverError> {
        match self.cfg.timeout {
            Some(limit) if self.started.elapsed() >= limit => Err(SolverError::Timeout {
                colorings: self.stats.colorings_tried,
            }),
            _ => Ok(()),
        }
    }

    /// Number of altruist colors for a `k`-patient decision.
    fn altruist_palette(&self, k: usize) -> Result<usize, SolverError> {
        let c = self.inst.altruists().len().min(k);
        if c > self.cfg.b_max {
            return Err(SolverError::AltruistPaletteTooLarge {
                c,
                b_max: self.cfg.b_max,
            });
        }
        Ok(c)
    }

    /// Runs the configured DP on one coloring; returns a verified witness.
    fn attempt(&mut self, coloring: &Coloring, k: usize) -> Result<Option<Solution>, SolverError> {
        self.stats.colorings_tried += 1;
        let out = match self.cfg.variant {
            Variant::Paper => solve_colorful_paper(self.inst, coloring)?,
            Variant::Corrected => solve_colorful_corrected(self.inst, coloring)?,
        };
        self.stats.dp_transitions += out.transitions;
        Ok(out.solution.and_then(|sol| match self.inst.verify(&sol) {
            Ok(covered) if covered == k => Some(sol),
            _ => {
                self.stats.rejected_witnesses += 1;
                None
            }
        }))
    }

    /// Looks for a solution covering exactly `k` patients.
    pub fn decide_exact(&mut self, k: usize) -> Result<Option<Solution>, SolverError> {
        if k == 0 {
            return Ok(Some(Solution::empty()));
        }
        let patients = self.inst.patient_count();
        if k > patients {
            return Ok(None);
        }
        let c = match self.cfg.variant {
            Variant::Paper => None,
            Variant::Corrected => Some(self.altruist_palette(k)?),
        };
        check_dp_palette(k + c.unwrap_or(0))?;
        let b = self.inst.altruists().len();
        // With one color per altruist, distinct roots get distinct colors
        // for free; otherwise the altruist colors are drawn or hashed too.
        let identity = ColorMap::new(b, (0..b).map(|x| x as u8).collect())?;
        let altruists_fixed = c.is_none_or(|c| c == b);

        match self.cfg.mode {
            Mode::Randomized => {
                let trials = trial_count(
                    k + if altruists_fixed { 0 } else { c.unwrap() },
                    self.cfg.delta,
                )?;
                let mut rng = ChaCha8Rng::seed_from_u64(
                    self.cfg.seed ^ (k as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15),
                );
                for _ in 0..trials {
                    self.check_deadline()?;
                    let pmap = random_coloring_from(&mut rng, patients, k)?;
                    let amap = match c {
                        None => None,
                        Some(_) if altruists_fixed => Some(identity.clone()),
                        Some(c) => Some(random_coloring_from(&mut rng, b, c)?),
                    };
                    let coloring = Coloring::new(self.inst, &pmap, amap.as_ref())?;
                    if let Some(sol) = self.attempt(&coloring, k)? {
                        return Ok(Some(sol));
                    }
                }
                Ok(None)
            }
            Mode::Deterministic => {
                let pfam = self.family(patients, k)?;
                let afam: Vec<Option<ColorMap>> = match c {
                    None => vec![None],
                    Some(_) if altruists_fixed => vec![Some(identity)],
                    Some(c) => self
                        .family(b, c)?
                        .colorings
                        .iter()
                        .cloned()
                        .map(Some)
                        .collect(),
                };
                for pmap in &pfam.colorings {
                    for amap in &afam {
                        self.check_deadline()?;
                        let coloring = Coloring::new(self.inst, pmap, amap.as_ref())?;
                        if let Some(sol) = self.attempt(&coloring, k)? {
                            return Ok(Some(sol));
                        }
                    }
                }
                Ok(None)
            }
        }
    }

    /// Looks for a solution covering at least `t` patients.
    ///
    /// If one exists, shortening chains and dropping cycles yields one whose
    /// coverage lies in `t..t + max(l_c - 1, 0)`, so only those exact
    /// coverages are tried.
    pub fn decide_at_least(&mut self, t: usize) -> Result<Option<Solution>, SolverError> {
        if t == 0 {
            return Ok(Some(Solution::empty()));
        }
        let patients = self.inst.patient_count();
        let slack = if self.inst.max_cycle_len() >= 2 {
            self.inst.max_cycle_len() - 1
        } else {
            0
        };
        for exact in t..=(t + slack).min(patients) {
            if let Some(sol) = self.decide_exact(exact)? {
                return Ok(Some(sol));
            }
        }
        Ok(None)
    }

    /// Largest coverage with a witness, by binary search on the target.
    pub fn maximize(&mut self) -> Result<(usize, Solution), SolverError> {
        let (mut lo, mut hi) = (0, self.inst.patient_count());
        let mut best = Solution::empty();
        while lo < hi {
            let mid = lo + (hi - lo).div_ceil(2);
            match self.decide_at_least(mid)? {
                Some(sol) => {
                    lo = sol.covered().max(mid);
                    best = sol;
                }
                None => hi = mid - 1,
            }
        }
        Ok((lo, best))
    }
}

/// One-shot [`Solver::decide_exact`].
pub fn decide_exact(
    inst: &Instance,
    k: usize,
    cfg: &SolverConfig,
) -> Result<Option<Solution>, SolverError> {
    Solver::new(inst, cfg.clone()).decide_exact(k)
}

/// One-shot [`Solver::decide_at_least`].
pub fn decide_at_least(
    inst: &Instance,
    t: usize,
    cfg: &SolverConfig,
) -> Result<Option<Solution>, SolverError> {
    Solver::new(inst, cfg.clone()).decide_at_least(t)
}

/// One-shot [`Solver::maximize`].
pub fn maximize(inst: &Instance, cfg: &SolverConfig) -> Result<(usize, Solution), SolverError> {
    Solver::new(inst, cfg.clone()).maximize()
}
