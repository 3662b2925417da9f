//! The `kex` command line.
//!
//! [`run`] takes the argument list and two writers, so the whole surface is
//! testable in-process. Exit codes: 0 yes/valid, 1 no/invalid, 2 usage or
//! parse error, 3 resource cap or timeout.

pub mod bench;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};
use kex_core::color::{
    deterministic_family_with, verify_family, Color, ColorError, Coloring, FamilyOptions,
    DEFAULT_K_MAX,
};
use kex_core::detect::{colorful_chain_counted, colorful_cycle_counted, ColorSet};
use kex_core::generate::{planted_instance, random_instance};
use kex_core::io::{
    emit_instance, emit_solution, parse_instance, parse_solution, write_family_cache, Answer,
    Decision, IoError, RunReport, RunStats,
};
use kex_core::oracle::{oracle_max_coverage_with, OracleLimits, DEFAULT_MAX_VERTICES};
use kex_core::reductions::{
    binpacking_to_cycles, binpacking_to_paths, fixed3_to_dag, from_directed_kpath,
    three_partition_shift, ReductionOutput, Scaling,
};
use kex_core::solver::{
    Mode, Solver, SolverConfig, SolverError, Variant, DEFAULT_B_MAX, DEFAULT_DELTA,
};
use kex_core::{Instance, Vertex};
use serde_json::json;
use thiserror::Error;

use crate::bench::{run_bench, write_planted_suite, BenchMode, BenchOptions};

pub const EXIT_YES: i32 = 0;
pub const EXIT_NO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CAP: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "kex",
    version,
    about = "Exact kidney exchange clearing by color coding"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decide or maximize patient coverage.
    Solve(SolveArgs),
    /// Check a solution file against an instance.
    Verify {
        instance: PathBuf,
        solution: PathBuf,
    },
    /// Exhaustive optimum for small instances.
    Oracle {
        instance: PathBuf,
        #[arg(long, default_value_t = DEFAULT_MAX_VERTICES)]
        max_vertices: usize,
    },
    /// Generate instances.
    #[command(subcommand)]
    Gen(GenCommand),
    /// Build instances from hard source problems.
    #[command(subcommand)]
    Reduce(ReduceCommand),
    /// Run one colorful detection (debugging aid).
    Detect(DetectArgs),
    /// CSV timings over a directory of instances.
    Bench(BenchArgs),
    /// Emit a perfect hash family in cache format.
    Family(FamilyArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Randomized,
    Deterministic,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum VariantArg {
    Paper,
    Corrected,
}

#[derive(Args, Debug)]
struct SolveArgs {
    instance: PathBuf,
    #[arg(long, value_enum, default_value = "deterministic")]
    mode: ModeArg,
    #[arg(long, value_enum, default_value = "corrected")]
    variant: VariantArg,
    #[arg(long, default_value_t = DEFAULT_DELTA)]
    delta: f64,
    #[arg(long, env = "KEX_SEED")]
    seed: Option<u64>,
    /// Report the maximum coverage instead of deciding the target.
    #[arg(long)]
    maximize: bool,
    /// Overrides the instance target.
    #[arg(long)]
    target: Option<usize>,
    #[arg(long)]
    timeout_ms: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_K_MAX)]
    k_max: usize,
    #[arg(long, default_value_t = DEFAULT_B_MAX)]
    b_max: usize,
}

#[derive(Subcommand, Debug)]
enum GenCommand {
    /// Independent arcs with a fixed probability.
    Random {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        altruists: usize,
        #[arg(long)]
        arc_prob: f64,
        #[arg(long, default_value_t = 0)]
        l_p: usize,
        #[arg(long, default_value_t = 0)]
        l_c: usize,
        #[arg(long, default_value_t = 0)]
        target: usize,
        #[arg(long, env = "KEX_SEED", default_value_t = 0)]
        seed: u64,
    },
    /// Planted disjoint chains and cycles plus noise arcs.
    Plant {
        /// Patients per planted chain, comma separated.
        #[arg(long, value_delimiter = ',')]
        chains: Vec<usize>,
        /// Patients per planted cycle, comma separated.
        #[arg(long, value_delimiter = ',')]
        cycles: Vec<usize>,
        #[arg(long, default_value_t = 0)]
        noise: usize,
        #[arg(long, env = "KEX_SEED", default_value_t = 0)]
        seed: u64,
        /// Also write the planted solution here.
        #[arg(long)]
        solution_out: Option<PathBuf>,
    },
    /// A directory of planted instances for `kex bench`.
    Suite {
        dir: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "4,6,8")]
        targets: Vec<usize>,
        #[arg(long, default_value_t = 5)]
        per_t: usize,
        #[arg(long, env = "KEX_SEED", default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args, Debug)]
struct SidecarArg {
    /// Write expected answer, raw parameters and gadget map here.
    #[arg(long)]
    sidecar: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum ReduceCommand {
    /// Directed k-path.
    Kpath {
        #[arg(long)]
        n: usize,
        /// Arcs as `u-v`, comma separated.
        #[arg(long, value_delimiter = ',')]
        arcs: Vec<String>,
        #[arg(long)]
        k: usize,
        #[command(flatten)]
        sidecar: SidecarArg,
    },
    /// Bin packing into chains.
    BinpackPaths(BinpackArgs),
    /// Bin packing into cycles.
    BinpackCycles(BinpackArgs),
    /// 3-partition through the shift and the DAG construction.
    #[command(name = "3part")]
    ThreePart {
        #[arg(long, value_delimiter = ',')]
        values: Vec<u64>,
        /// Target sum B of each triple.
        #[arg(long)]
        target: u64,
        /// Shift constant; must exceed 2B. Defaults to 10B.
        #[arg(long)]
        shift: Option<u64>,
        #[command(flatten)]
        sidecar: SidecarArg,
    },
}

#[derive(Args, Debug)]
struct BinpackArgs {
    #[arg(long, value_delimiter = ',')]
    weights: Vec<u64>,
    #[arg(long)]
    bins: usize,
    /// Weight multiplier. Defaults to the 3k^2n^2 rule.
    #[arg(long)]
    scale: Option<u64>,
    #[command(flatten)]
    sidecar: SidecarArg,
}

#[derive(Args, Debug)]
struct DetectArgs {
    instance: PathBuf,
    /// One color per vertex, comma separated.
    #[arg(long, value_delimiter = ',')]
    colors: Vec<Color>,
    /// Patient palette size; defaults to the largest patient color plus one.
    #[arg(long)]
    palette: Option<usize>,
    /// Altruist palette size; altruist entries of `--colors` are used only
    /// when this is given.
    #[arg(long)]
    altruist_palette: Option<usize>,
    /// The color set, comma separated.
    #[arg(long, value_delimiter = ',')]
    set: Vec<Color>,
    /// Look for a cycle instead of a chain.
    #[arg(long)]
    cycle: bool,
    #[arg(long)]
    start_color: Option<Color>,
}

#[derive(Args, Debug)]
struct BenchArgs {
    dir: PathBuf,
    #[arg(
        long,
        value_enum,
        value_delimiter = ',',
        default_value = "single,randomized,deterministic"
    )]
    modes: Vec<BenchMode>,
    #[arg(long, env = "KEX_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_DELTA)]
    delta: f64,
    #[arg(long, default_value_t = DEFAULT_K_MAX)]
    k_max: usize,
    /// Write the CSV here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct FamilyArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = DEFAULT_K_MAX)]
    k_max: usize,
    /// Always hash into k^2 first, even for small universes.
    #[arg(long)]
    two_stage: bool,
    /// Check perfectness exhaustively before writing.
    #[arg(long)]
    verify: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: IoError },
    #[error("{0}")]
    Cap(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Cap(_) => EXIT_CAP,
            _ => EXIT_USAGE,
        }
    }
}

impl From<SolverError> for CliError {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::Timeout { .. }
            | SolverError::DpPaletteTooLarge(_)
            | SolverError::AltruistPaletteTooLarge { .. }
            | SolverError::Color(ColorError::PaletteTooLarge { .. })
            | SolverError::Color(ColorError::BudgetExceeded { .. }) => CliError::Cap(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

fn usage(e: impl ToString) -> CliError {
    CliError::Usage(e.to_string())
}

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })
}

fn load_instance(path: &Path) -> Result<Instance, CliError> {
    parse_instance(&read(path)?).map_err(|source| CliError::Parse {
        path: path.to_path_buf(),
        source,
    })
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })
}

fn line(out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    writeln!(out, "{text}").map_err(usage)
}

/// Runs the command line on `args` (including the program name).
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_YES
                }
                _ => {
                    let _ = write!(err, "{e}");
                    EXIT_USAGE
                }
            };
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    match cmd {
        Command::Solve(args) => solve(args, out),
        Command::Verify { instance, solution } => verify(&instance, &solution, out, err),
        Command::Oracle {
            instance,
            max_vertices,
        } => {
            let inst = load_instance(&instance)?;
            let (t, sol) =
                oracle_max_coverage_with(&inst, &OracleLimits::with_vertices(max_vertices))
                    .map_err(|e| CliError::Cap(e.to_string()))?;
            line(out, &json!({ "t_star": t, "solution": sol }).to_string())?;
            Ok(EXIT_YES)
        }
        Command::Gen(g) => generate(g, out),
        Command::Reduce(r) => reduce(r, out),
        Command::Detect(args) => detect(args, out),
        Command::Bench(args) => {
            let opts = BenchOptions {
                modes: args.modes,
                seed: args.seed,
                delta: args.delta,
                k_max: args.k_max,
            };
            match &args.out {
                Some(path) => {
                    let file = std::fs::File::create(path).map_err(|source| CliError::Read {
                        path: path.clone(),
                        source,
                    })?;
                    run_bench(&args.dir, &opts, file).map_err(usage)?;
                }
                None => run_bench(&args.dir, &opts, &mut *out).map_err(usage)?,
            }
            Ok(EXIT_YES)
        }
        Command::Family(args) => family(args, out, err),
    }
}

fn solve(args: SolveArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let inst = load_instance(&args.instance)?;
    let mode = match args.mode {
        ModeArg::Randomized => Mode::Randomized,
        ModeArg::Deterministic => Mode::Deterministic,
    };
    let variant = match args.variant {
        VariantArg::Paper => Variant::Paper,
        VariantArg::Corrected => Variant::Corrected,
    };
    // Randomized runs always log the seed they used so they can be replayed.
    let seed = match (args.seed, mode) {
        (Some(s), _) => Some(s),
        (None, Mode::Randomized) => Some(rand::random()),
        (None, Mode::Deterministic) => None,
    };
    let cfg = SolverConfig {
        mode,
        variant,
        delta: args.delta,
        k_max: args.k_max,
        b_max: args.b_max,
        seed: seed.unwrap_or(0),
        timeout: args.timeout_ms.map(Duration::from_millis),
    };
    let start = Instant::now();
    let mut solver = Solver::new(&inst, cfg);
    let (answer, solution, t_star, code) = if args.maximize {
        let (t, sol) = solver.maximize()?;
        (Answer::TStar(t), Some(sol), Some(t), EXIT_YES)
    } else {
        let target = args.target.unwrap_or(inst.target());
        match solver.decide_at_least(target)? {
            Some(sol) => {
                let covered = sol.covered();
                (
                    Answer::Decision(Decision::Yes),
                    Some(sol),
                    Some(covered),
                    EXIT_YES,
                )
            }
            None => (Answer::Decision(Decision::No), None, None, EXIT_NO),
        }
    };
    let stats = solver.stats();
    let report = RunReport {
        answer,
        solution,
        stats: RunStats {
            colorings_tried: stats.colorings_tried,
            dp_transitions: stats.dp_transitions,
            mode: mode.name().to_string(),
            seed,
            t_star,
            variant: variant.name().to_string(),
            wall_time_ms: start.elapsed().as_millis() as u64,
        },
    };
    line(out, &report.to_json())?;
    Ok(code)
}

fn verify(
    instance: &Path,
    solution: &Path,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32, CliError> {
    let inst = load_instance(instance)?;
    let sol = parse_solution(&read(solution)?).map_err(|source| CliError::Parse {
        path: solution.to_path_buf(),
        source,
    })?;
    match inst.verify(&sol) {
        Ok(covered) => {
            line(
                out,
                &json!({ "valid": true, "covered": covered }).to_string(),
            )?;
            Ok(EXIT_YES)
        }
        Err(errors) => {
            for e in &errors {
                let _ = writeln!(err, "{e:?}: {e}");
            }
            let names: Vec<String> = errors.iter().map(|e| format!("{e:?}")).collect();
            line(out, &json!({ "valid": false, "errors": names }).to_string())?;
            Ok(EXIT_NO)
        }
    }
}

fn generate(cmd: GenCommand, out: &mut dyn Write) -> Result<i32, CliError> {
    let inst = match cmd {
        GenCommand::Random {
            n,
            altruists,
            arc_prob,
            l_p,
            l_c,
            target,
            seed,
        } => random_instance(n, altruists, arc_prob, l_p, l_c, seed)
            .map_err(usage)?
            .with_target(target),
        GenCommand::Plant {
            chains,
            cycles,
            noise,
            seed,
            solution_out,
        } => {
            let k = chains.iter().sum::<usize>() + cycles.iter().sum::<usize>();
            let (inst, sol) = planted_instance(k, &chains, &cycles, noise, seed).map_err(usage)?;
            if let Some(path) = solution_out {
                write_file(&path, &(emit_solution(&sol) + "\n"))?;
            }
            inst
        }
        GenCommand::Suite {
            dir,
            targets,
            per_t,
            seed,
        } => {
            std::fs::create_dir_all(&dir).map_err(|source| CliError::Read {
                path: dir.clone(),
                source,
            })?;
            let paths = write_planted_suite(&dir, &targets, per_t, seed).map_err(usage)?;
            for p in paths {
                line(out, &p.display().to_string())?;
            }
            return Ok(EXIT_YES);
        }
    };
    line(out, &emit_instance(&inst))?;
    Ok(EXIT_YES)
}

fn parse_arc(s: &str) -> Result<(Vertex, Vertex), CliError> {
    let (u, v) = s
        .split_once('-')
        .ok_or_else(|| usage(format!("arc {s:?} is not of the form u-v")))?;
    let num = |x: &str| {
        x.trim()
            .parse::<Vertex>()
            .map_err(|e| usage(format!("arc {s:?}: {e}")))
    };
    Ok((num(u)?, num(v)?))
}

fn scaling(value: Option<u64>) -> Scaling {
    value.map_or(Scaling::Paper, Scaling::Custom)
}

fn emit_reduction(
    out: &mut dyn Write,
    red: &ReductionOutput,
    sidecar: &SidecarArg,
    extra: Option<(&str, serde_json::Value)>,
) -> Result<i32, CliError> {
    if let Some(path) = &sidecar.sidecar {
        let mut side = red.sidecar();
        if let Some((key, value)) = extra {
            side["certificate_map"][key] = value;
        }
        write_file(path, &(side.to_string() + "\n"))?;
    }
    line(out, &emit_instance(&red.instance))?;
    Ok(EXIT_YES)
}

fn reduce(cmd: ReduceCommand, out: &mut dyn Write) -> Result<i32, CliError> {
    match cmd {
        ReduceCommand::Kpath {
            n,
            arcs,
            k,
            sidecar,
        } => {
            let arcs = arcs
                .iter()
                .filter(|s| !s.is_empty())
                .map(|s| parse_arc(s))
                .collect::<Result<Vec<_>, _>>()?;
            let red = from_directed_kpath(n, &arcs, k).map_err(usage)?;
            emit_reduction(out, &red, &sidecar, None)
        }
        ReduceCommand::BinpackPaths(a) => {
            let red = binpacking_to_paths(&a.weights, a.bins, scaling(a.scale)).map_err(usage)?;
            emit_reduction(out, &red, &a.sidecar, None)
        }
        ReduceCommand::BinpackCycles(a) => {
            let red = binpacking_to_cycles(&a.weights, a.bins, scaling(a.scale)).map_err(usage)?;
            emit_reduction(out, &red, &a.sidecar, None)
        }
        ReduceCommand::ThreePart {
            values,
            target,
            shift,
            sidecar,
        } => {
            let shifted = three_partition_shift(&values, target, scaling(shift)).map_err(usage)?;
            let red = fixed3_to_dag(&shifted.a, shifted.b).map_err(usage)?;
            let extra =
                json!({ "constant": shifted.shift, "values": shifted.a, "target": shifted.b });
            emit_reduction(out, &red, &sidecar, Some(("shift", extra)))
        }
    }
}

fn detect(args: DetectArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let inst = load_instance(&args.instance)?;
    let palette = args.palette.unwrap_or_else(|| {
        inst.patients()
            .filter_map(|v| args.colors.get(v))
            .map(|&c| c as usize + 1)
            .max()
            .unwrap_or(0)
    });
    let coloring = Coloring::from_vertex_colors(&inst, palette, args.altruist_palette, args.colors)
        .map_err(usage)?;
    let set: ColorSet = args.set.iter().copied().collect();
    let (found, witness, states) = if args.cycle {
        let d = colorful_cycle_counted(&inst, &coloring, set).map_err(usage)?;
        let w = d.witness.map(|c| json!(c.patients));
        (w.is_some(), w, d.states)
    } else {
        let d = colorful_chain_counted(&inst, &coloring, set, args.start_color).map_err(usage)?;
        let w = d.witness.map(|c| json!(c.vertices().collect::<Vec<_>>()));
        (w.is_some(), w, d.states)
    };
    line(
        out,
        &json!({ "found": found, "witness": witness, "states": states }).to_string(),
    )?;
    Ok(if found { EXIT_YES } else { EXIT_NO })
}

fn family(args: FamilyArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let opts = FamilyOptions {
        k_max: args.k_max,
        force_two_stage: args.two_stage,
    };
    let fam = deterministic_family_with(args.n, args.k, opts).map_err(|e| match e {
        ColorError::PaletteTooLarge { .. } => CliError::Cap(e.to_string()),
        other => usage(other),
    })?;
    if args.verify {
        match verify_family(&fam) {
            Ok(()) => {}
            Err(ColorError::Uncovered(w)) => {
                let _ = writeln!(err, "no member is injective on {w:?}");
                return Ok(EXIT_NO);
            }
            Err(e) => return Err(CliError::Cap(e.to_string())),
        }
    }
    let text = write_family_cache(&fam);
    match args.out {
        Some(path) => write_file(&path, &text)?,
        None => out.write_all(text.as_bytes()).map_err(usage)?,
    }
    Ok(EXIT_YES)
}
