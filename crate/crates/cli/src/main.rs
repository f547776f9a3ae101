//! `hopsweep` command line: solve Sudoku and MaxCut instances, profile spin
//! glasses, and run the exact small-instance oracles.

mod config;
mod instance;
mod output;
mod runner;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use hopsweep::drive::RunReport;
use hopsweep::ising::{characterize, to_ising, to_operator_terms};
use hopsweep::maxcut::{self, known_instance, Graph};
use hopsweep::mpo::{OperatorTerm, SpinOp};
use hopsweep::oracle::{brute_force_ground, dense_ground_energy, MAX_DENSE_SPINS};
use hopsweep::sudoku::{self, PenaltyOverlap};
use serde::Serialize;

use config::{RunConfig, SolveArgs};
use instance::Kind;

#[derive(Debug, Parser)]
#[command(name = "hopsweep", version, about = "Ground states of QUBO / Ising problems by driven DMRG")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve a Sudoku board (compact 81-character or comma-separated form).
    Sudoku(SudokuArgs),
    /// Solve a MaxCut instance in Biq Mac format.
    Maxcut(MaxcutArgs),
    /// Field statistics and coupling filling fractions of an instance.
    Analyze(AnalyzeArgs),
    /// Exact ground energy of a small instance.
    Oracle(OracleArgs),
}

#[derive(Debug, clap::Args)]
struct SudokuArgs {
    /// Board file; omit when using --generate.
    #[arg(required_unless_present = "generate", conflicts_with = "generate")]
    board: Option<PathBuf>,
    /// Generate a puzzle with this many clues from --seed instead.
    #[arg(long)]
    generate: Option<usize>,
    /// Block size of generated puzzles.
    #[arg(long, default_value_t = 3)]
    block: usize,
    /// How penalties of pairs sharing two constraints combine.
    #[arg(long, value_enum, default_value_t = Overlap::Union)]
    overlap: Overlap,
    #[command(flatten)]
    solve: SolveArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Overlap {
    Union,
    Sum,
}

impl From<Overlap> for PenaltyOverlap {
    fn from(o: Overlap) -> Self {
        match o {
            Overlap::Union => PenaltyOverlap::Union,
            Overlap::Sum => PenaltyOverlap::Sum,
        }
    }
}

#[derive(Debug, clap::Args)]
struct MaxcutArgs {
    graph: PathBuf,
    #[command(flatten)]
    solve: SolveArgs,
}

#[derive(Debug, clap::Args)]
struct AnalyzeArgs {
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = Kind::Auto)]
    kind: Kind,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
struct OracleArgs {
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = Kind::Auto)]
    kind: Kind,
    /// Diagonalize a·H_x + (1 − a)·H_z instead of enumerating configurations.
    #[arg(long)]
    a: Option<f64>,
    /// Transverse field used with --a.
    #[arg(long, default_value_t = 1.0)]
    hx: f64,
}

/// Exit status: reached or verified.
const REACHED: u8 = 0;
/// Completed without reaching the target.
const NOT_REACHED: u8 = 2;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Sudoku(a) => cmd_sudoku(a),
        Command::Maxcut(a) => cmd_maxcut(a),
        Command::Analyze(a) => cmd_analyze(a),
        Command::Oracle(a) => cmd_oracle(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "instance".into())
}

#[derive(Serialize)]
struct SudokuSummary<'a> {
    command: &'static str,
    instance: String,
    config: &'a RunConfig,
    overlap: PenaltyOverlap,
    clues: usize,
    free_variables: usize,
    clamp_residue: f64,
    ising_constant: f64,
    puzzle: String,
    grid: String,
    verified: bool,
    energy: f64,
    n_up: usize,
    empty_cells: Vec<(usize, usize)>,
    crowded_cells: Vec<((usize, usize), Vec<u16>)>,
    report: Option<&'a RunReport>,
}

fn sudoku_defaults() -> RunConfig {
    let mut c = RunConfig::default();
    c.drive.m_steps = 10;
    c.drive.hx = 0.7;
    c.drive.sweep.max_bond = 60;
    c.drive.sweep.nsweeps = 5;
    c.drive.target_energy = Some(0.0);
    c.drive.max_restarts = 5;
    c
}

fn cmd_sudoku(args: SudokuArgs) -> Result<u8> {
    let config = args.solve.resolve(sudoku_defaults())?;
    let (puzzle, name) = match (&args.board, args.generate) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            (sudoku::parse_board(&text)?, stem(path))
        }
        (None, Some(clues)) => {
            let (p, _) = sudoku::generate_puzzle(args.block, clues, config.drive.seed)?;
            (p, format!("generated-{clues}-{}", config.drive.seed))
        }
        (None, None) => bail!("a board file or --generate is required"),
    };
    let side = puzzle.side();
    let overlap = PenaltyOverlap::from(args.overlap);
    let full = sudoku::full_qubo_with(puzzle.block(), overlap)?;
    let (reduced, map) = sudoku::clamp(&puzzle, &full)?;
    let model = to_ising(&reduced);
    let dir = config.out_dir();

    let mut summary = SudokuSummary {
        command: "sudoku",
        instance: name,
        config: &config,
        overlap,
        clues: puzzle.clue_count(),
        free_variables: map.n_free(),
        clamp_residue: map.c2,
        ising_constant: model.constant,
        puzzle: puzzle.to_string(),
        grid: String::new(),
        verified: false,
        energy: 0.0,
        n_up: 0,
        empty_cells: Vec::new(),
        crowded_cells: Vec::new(),
        report: None,
    };

    if map.n_free() == 0 {
        let verdict = sudoku::verify(&puzzle)?;
        summary.verified = verdict.is_valid();
        summary.grid = puzzle.render_marked(&puzzle);
        std::fs::create_dir_all(&dir)?;
        output::write_json(&dir.join(output::REPORT), &summary)?;
        print!("{}", summary.grid);
        println!("board already complete; verified: {}", summary.verified);
        return Ok(if summary.verified { REACHED } else { NOT_REACHED });
    }

    let mut config = config.clone();
    config.drive.n_up_ground.get_or_insert(side * side - puzzle.clue_count());
    let report = runner::solve(&model, &config)?;
    let decoded = sudoku::decode(&report.final_configuration, &map, &puzzle)?;
    let violations = if decoded.is_well_formed() { sudoku::verify(&decoded.board)?.violations } else { Vec::new() };
    let verified = decoded.is_well_formed() && violations.is_empty();
    let grid = decoded.board.render_marked(&puzzle);

    let summary = SudokuSummary {
        config: &config,
        grid: grid.clone(),
        verified,
        energy: report.final_energy,
        n_up: report.final_configuration.n_up(),
        empty_cells: decoded.empty_cells.clone(),
        crowded_cells: decoded.multi_cells.clone(),
        report: Some(&report),
        ..summary
    };
    output::write_run(&dir, &summary, &report)?;
    std::fs::write(dir.join("solution.txt"), &grid)?;

    print!("{grid}");
    println!(
        "free variables {}  energy {}  restarts {}  verified {}  ({:.1}s)",
        map.n_free(),
        report.final_energy,
        report.restarts,
        verified,
        report.wall_seconds
    );
    for v in &violations {
        println!("  {v}");
    }
    if !decoded.is_well_formed() {
        println!("  {} empty and {} crowded cells", decoded.empty_cells.len(), decoded.multi_cells.len());
    }
    Ok(if verified && report.final_energy == 0.0 { REACHED } else { NOT_REACHED })
}

#[derive(Serialize)]
struct MaxcutSummary<'a> {
    command: &'static str,
    instance: String,
    config: &'a RunConfig,
    n_vertices: usize,
    n_edges: usize,
    cut: f64,
    energy: f64,
    reference: Option<f64>,
    matches_reference: Option<bool>,
    partition: Vec<u8>,
    report: &'a RunReport,
}

fn maxcut_defaults(name: &str) -> RunConfig {
    let mut c = RunConfig::default();
    c.drive.m_steps = 5;
    c.drive.sweep.max_bond = 30;
    c.drive.rescale = true;
    if let Some(k) = known_instance(name) {
        c.drive.m_steps = k.m_steps;
        c.drive.hx = k.hx;
        c.drive.eta = k.eta;
        c.drive.sweep.max_bond = k.bond_dim;
        c.drive.sweep.nsweeps = k.sweeps;
        c.drive.max_restarts = 10;
        c.reference = Some(k.ground_energy);
    }
    c
}

fn cmd_maxcut(args: MaxcutArgs) -> Result<u8> {
    let name = stem(&args.graph);
    let mut config = args.solve.resolve(maxcut_defaults(&name))?;
    if config.drive.target_energy.is_none() {
        config.drive.target_energy = config.reference;
    }
    let graph = Graph::load(&args.graph).with_context(|| format!("loading {}", args.graph.display()))?;
    let model = to_ising(&maxcut::to_qubo(&graph)?);
    let report = runner::solve(&model, &config)?;
    let partition = report.final_configuration.bits();
    let cut = maxcut::cut_value(&graph, &partition)?;
    let matches_reference = config.reference.map(|r| -cut <= r + 1e-9 * r.abs().max(1.0));
    let summary = MaxcutSummary {
        command: "maxcut",
        instance: name,
        config: &config,
        n_vertices: graph.n_vertices,
        n_edges: graph.n_edges(),
        cut,
        energy: report.final_energy,
        reference: config.reference,
        matches_reference,
        partition: partition.clone(),
        report: &report,
    };
    let dir = config.out_dir();
    output::write_run(&dir, &summary, &report)?;

    let reference = config.reference.map_or("none".to_string(), |r| r.to_string());
    println!(
        "cut {cut}  energy {}  reference {reference}  match {}  restarts {}  ({:.1}s)",
        report.final_energy,
        matches_reference.map_or("n/a".to_string(), |m| m.to_string()),
        report.restarts,
        report.wall_seconds
    );
    let reached = matches_reference.unwrap_or(true) && report.converged;
    Ok(if reached { REACHED } else { NOT_REACHED })
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<u8> {
    let loaded = instance::load(&args.input, args.kind)?;
    let profile = characterize(&loaded.model)?;
    let defaults = RunConfig { out: args.out, ..RunConfig::default() };
    let dir = defaults.out_dir();
    output::write_profile(&dir, &loaded.model.hz, &profile)?;
    println!(
        "{} spins  {} couplings  hz mean {:.4}  hz std {:.4}  rho(1) {:.4}",
        loaded.model.n(),
        loaded.model.n_couplings(),
        profile.hz_mean,
        profile.hz_std,
        profile.rho.first().copied().unwrap_or(0.0)
    );
    println!("wrote {}", dir.display());
    Ok(REACHED)
}

fn cmd_oracle(args: OracleArgs) -> Result<u8> {
    let loaded = instance::load(&args.input, args.kind)?;
    let model = &loaded.model;
    match args.a {
        Some(a) => {
            if !(0.0..=1.0).contains(&a) {
                bail!("--a must lie in [0, 1]");
            }
            let n = model.n();
            if n > MAX_DENSE_SPINS {
                bail!("{n} spins exceeds the dense cap of {MAX_DENSE_SPINS}");
            }
            let (f, c, k) = to_operator_terms(model);
            let hz: Vec<OperatorTerm> = f.into_iter().chain(c).collect();
            let hx: Vec<OperatorTerm> = (0..n).map(|m| OperatorTerm::single(args.hx, m, SpinOp::Sx)).collect();
            let e = dense_ground_energy(&hx, &hz, a, 1.0 - a, k, n)?;
            println!("ground energy {e}");
        }
        None => {
            let r = brute_force_ground(model)?;
            println!("ground energy {}", r.best_energy);
            println!("minimizers {}{}", r.best_configs.len(), if r.truncated { "+" } else { "" });
            if let Some(first) = r.best_configs.first() {
                let bits: String = first.bits().iter().map(|b| char::from(b'0' + b)).collect();
                println!("first minimizer {bits}");
                if let Some(g) = &loaded.graph {
                    println!("best cut {}", maxcut::cut_value(g, &first.bits())?);
                }
            }
        }
    }
    Ok(REACHED)
}

