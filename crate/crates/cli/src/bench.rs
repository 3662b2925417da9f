//! Benchmark table over a directory of instance files.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use kex_core::color::{random_coloring, Coloring};
use kex_core::generate::{planted_instance, planted_shape, GenerateError};
use kex_core::io::{emit_instance, parse_instance};
use kex_core::solver::{solve_colorful_paper, Mode, Solver, SolverConfig, Variant};
use kex_core::Instance;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum BenchMode {
    /// One seeded coloring with palette t, `paper` variant DP.
    Single,
    Randomized,
    Deterministic,
}

impl BenchMode {
    fn name(self) -> &'static str {
        match self {
            BenchMode::Single => "single",
            BenchMode::Randomized => "randomized",
            BenchMode::Deterministic => "deterministic",
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchOptions {
    pub modes: Vec<BenchMode>,
    pub seed: u64,
    pub delta: f64,
    pub k_max: usize,
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("cannot read suite directory: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot write table: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Generate(#[from] GenerateError),
}

/// Writes `per_t` planted instances for each target in `targets` into `dir`
/// as `t{t:02}_{i:02}.json`, each with `t` noise arcs.
pub fn write_planted_suite(
    dir: &Path,
    targets: &[usize],
    per_t: usize,
    seed: u64,
) -> Result<Vec<PathBuf>, BenchError> {
    let mut paths = Vec::new();
    for &t in targets {
        let (chains, cycles) = planted_shape(t);
        for i in 0..per_t {
            let s = seed.wrapping_add((t * 1000 + i) as u64);
            let (inst, _) = planted_instance(t, &chains, &cycles, t, s)?;
            let path = dir.join(format!("t{t:02}_{i:02}.json"));
            std::fs::write(&path, emit_instance(&inst) + "\n")?;
            paths.push(path);
        }
    }
    Ok(paths)
}

#[derive(Serialize, Default)]
struct Row {
    instance: String,
    n: Option<usize>,
    t: Option<usize>,
    mode: &'static str,
    colorings_tried: Option<u64>,
    dp_transitions: Option<u64>,
    wall_time_ms: Option<u64>,
    answer: Option<&'static str>,
    error: Option<String>,
}

struct Measured {
    colorings: u64,
    transitions: u64,
    yes: bool,
}

fn yes_no(yes: bool) -> &'static str {
    if yes {
        "yes"
    } else {
        "no"
    }
}

fn single_coloring(inst: &Instance, seed: u64) -> Result<Measured, String> {
    let t = inst.target();
    if t == 0 || t > inst.patient_count() {
        return Ok(Measured {
            colorings: 0,
            transitions: 0,
            yes: t == 0,
        });
    }
    let map = random_coloring(inst.patient_count(), t, seed).map_err(|e| e.to_string())?;
    let coloring = Coloring::new(inst, &map, None).map_err(|e| e.to_string())?;
    let out = solve_colorful_paper(inst, &coloring).map_err(|e| e.to_string())?;
    let yes = out.solution.is_some_and(|sol| inst.verify(&sol) == Ok(t));
    Ok(Measured {
        colorings: 1,
        transitions: out.transitions,
        yes,
    })
}

fn measure(inst: &Instance, mode: BenchMode, opts: &BenchOptions) -> Result<Measured, String> {
    let solver_mode = match mode {
        BenchMode::Single => return single_coloring(inst, opts.seed),
        BenchMode::Randomized => Mode::Randomized,
        BenchMode::Deterministic => Mode::Deterministic,
    };
    let cfg = SolverConfig {
        mode: solver_mode,
        variant: Variant::Corrected,
        delta: opts.delta,
        k_max: opts.k_max,
        seed: opts.seed,
        ..SolverConfig::default()
    };
    let mut solver = Solver::new(inst, cfg);
    let found = solver
        .decide_at_least(inst.target())
        .map_err(|e| e.to_string())?;
    let stats = solver.stats();
    Ok(Measured {
        colorings: stats.colorings_tried,
        transitions: stats.dp_transitions,
        yes: found.is_some(),
    })
}

/// Writes one CSV row per (instance, mode) for every `*.json` file in `dir`,
/// in file-name order. Failures land in the `error` column.
pub fn run_bench(dir: &Path, opts: &BenchOptions, out: impl Write) -> Result<(), BenchError> {
    let mut files: Vec<_> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();

    let mut wtr = csv::Writer::from_writer(out);
    if files.is_empty() {
        // serde only emits a header together with the first record
        wtr.write_record([
            "instance",
            "n",
            "t",
            "mode",
            "colorings_tried",
            "dp_transitions",
            "wall_time_ms",
            "answer",
            "error",
        ])?;
    }
    for path in files {
        let name = path
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let parsed = std::fs::read(&path)
            .map_err(|e| e.to_string())
            .and_then(|bytes| parse_instance(&bytes).map_err(|e| e.to_string()));
        for &mode in &opts.modes {
            let mut row = Row {
                instance: name.clone(),
                mode: mode.name(),
                ..Row::default()
            };
            match &parsed {
                Err(e) => row.error = Some(e.clone()),
                Ok(inst) => {
                    row.n = Some(inst.vertex_count());
                    row.t = Some(inst.target());
                    let start = Instant::now();
                    match measure(inst, mode, opts) {
                        Ok(m) => {
                            row.wall_time_ms = Some(start.elapsed().as_millis() as u64);
                            row.colorings_tried = Some(m.colorings);
                            row.dp_transitions = Some(m.transitions);
                            row.answer = Some(yes_no(m.yes));
                        }
                        Err(e) => row.error = Some(e),
                    }
                }
            }
            wtr.serialize(row)?;
        }
    }
    wtr.flush()?;
    Ok(())
}
