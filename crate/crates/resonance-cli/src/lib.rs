//! Command implementations behind the `resonance` binary.
//!
//! Subcommands: `generate` (synthetic corpora), `analyze` (classify a
//! corpus to CSV), `bench` (sweep execution modes and emit per-particle
//! and aggregate timing CSVs), `hist` (bucket per-particle runtimes into
//! decades). Stdout carries progress only; all data goes to files.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use resonance::domain::{
    read_ephemeris, read_particles, write_ephemeris, write_labels_csv, write_particles,
    write_results_csv, AnalysisOutcome, ResonanceTuple, SearchConfig,
};
use resonance::executor::{run_corpus, ExecutionMode, RunRow};
use resonance::synth::{gen_corpus, CorpusSpec};

/// How a command finished, beyond plain success.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmdStatus {
    Clean,
    /// Some particles produced error rows; exit code 3.
    ParticleErrors(usize),
}

#[derive(Debug)]
pub enum CliError {
    /// Bad flag values; exit code 2.
    Usage(String),
    /// I/O or generation failure; exit code 1.
    Runtime(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "usage error: {msg}"),
            CliError::Runtime(msg) => write!(f, "{msg}"),
        }
    }
}

impl std::error::Error for CliError {}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn runtime(err: impl std::fmt::Display) -> CliError {
    CliError::Runtime(err.to_string())
}

#[derive(Parser, Debug)]
#[command(
    name = "resonance",
    about = "Classify orbital time series as resonant or non-resonant with a perturbing planet",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a labeled synthetic corpus (particles, ephemeris, labels).
    Generate(GenerateArgs),
    /// Classify a corpus and write a results CSV.
    Analyze(AnalyzeArgs),
    /// Sweep execution modes / workers / prefix depths and write bench CSVs.
    Bench(BenchArgs),
    /// Bucket per-particle runtimes from a results or bench CSV into decades.
    Hist(HistArgs),
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    /// Particles failing the semi-major-axis consistency gate.
    #[arg(long, default_value_t = 0)]
    pub rejectable: usize,
    /// Particles with a planted librating resonance angle.
    #[arg(long, default_value_t = 0)]
    pub resonant: usize,
    /// Particles that circulate everywhere (full-search cost).
    #[arg(long, default_value_t = 0)]
    pub nonresonant: usize,
    /// Time steps per particle.
    #[arg(long, default_value_t = 9629)]
    pub steps: usize,
    /// Search granularity the labels are certified against.
    #[arg(long, default_value_t = 30)]
    pub pmax: u32,
    /// Corpus seed; identical seeds reproduce the corpus byte for byte.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory (created if missing).
    #[arg(long)]
    pub out: PathBuf,
    /// Preset corpus shape: `small82` (82 x 9629) or `long100` (100 x 50000).
    /// Overrides the counts and steps.
    #[arg(long)]
    pub preset: Option<String>,
    /// Gaussian jitter applied to every generated angle sample, degrees.
    #[arg(long, default_value_t = 0.0)]
    pub noise_sigma_deg: f64,
    /// Planted tuples as `p:q:m:n:r:s`, comma separated; cycled over the
    /// resonant particles.
    #[arg(long)]
    pub planted: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct DetectorArgs {
    /// Search granularity: p runs over 1..=pmax.
    #[arg(long, default_value_t = 30)]
    pub pmax: u32,
    /// Minimum empty arc (degrees) for a window to count as confined.
    #[arg(long = "gap-deg", default_value_t = 30.0)]
    pub gap_deg: f64,
    /// Number of contiguous windows the libration test uses.
    #[arg(long, default_value_t = 4)]
    pub windows: usize,
    /// Fewer samples than this per window collapses to a single window.
    #[arg(long, default_value_t = 32)]
    pub min_window_samples: usize,
    /// Maximum relative semi-major-axis range the consistency gate allows.
    #[arg(long, default_value_t = 0.1)]
    pub consistency: f64,
}

impl DetectorArgs {
    fn to_config(&self, workers: usize, prefix_depth: usize) -> Result<SearchConfig, CliError> {
        let config = SearchConfig {
            pmax: self.pmax,
            prefix_depth,
            workers,
            gap_threshold_deg: self.gap_deg,
            window_count: self.windows,
            min_window_samples: self.min_window_samples,
            consistency_rel_range: self.consistency,
            seed: 0,
        };
        config.validate().map_err(|e| usage(e.to_string()))?;
        Ok(config)
    }
}

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    /// Particle JSONL file.
    #[arg(long)]
    pub particles: PathBuf,
    /// Ephemeris JSON file.
    #[arg(long)]
    pub ephemeris: PathBuf,
    /// Results CSV path.
    #[arg(long)]
    pub out: PathBuf,
    /// Execution mode: serial | particles_static | particles_dynamic | wavefront.
    #[arg(long, default_value = "serial")]
    pub mode: String,
    /// Worker threads (defaults to the machine's logical cores).
    #[arg(long)]
    pub workers: Option<usize>,
    /// Wavefront prefix depth (1..=5).
    #[arg(long, default_value_t = 2)]
    pub depth: usize,
    #[command(flatten)]
    pub detector: DetectorArgs,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// Particle JSONL file.
    #[arg(long)]
    pub particles: PathBuf,
    /// Ephemeris JSON file.
    #[arg(long)]
    pub ephemeris: PathBuf,
    /// Directory for bench.csv and speedup.csv (created if missing).
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Comma-separated modes to sweep. A serial baseline always runs.
    #[arg(long, default_value = "serial,wavefront")]
    pub modes: String,
    /// Comma-separated worker counts, e.g. `1,2,4,8`.
    #[arg(long = "workers-list", default_value = "1,2,4")]
    pub workers_list: String,
    /// Comma-separated wavefront prefix depths, e.g. `1,2,3,4`.
    #[arg(long = "depth-list", default_value = "1,2,3,4")]
    pub depth_list: String,
    #[command(flatten)]
    pub detector: DetectorArgs,
}

#[derive(Args, Debug)]
pub struct HistArgs {
    /// Results or bench CSV with an elapsed_ns column.
    #[arg(long)]
    pub input: PathBuf,
    /// Histogram CSV path.
    #[arg(long)]
    pub out: PathBuf,
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn parse_planted(text: &str) -> Result<Vec<ResonanceTuple>, CliError> {
    let mut out = Vec::new();
    for part in text.split(',').filter(|s| !s.trim().is_empty()) {
        let fields: Vec<i32> = part
            .trim()
            .split(':')
            .map(|f| f.trim().parse::<i32>())
            .collect::<Result<_, _>>()
            .map_err(|e| usage(format!("bad planted tuple '{part}': {e}")))?;
        if fields.len() != 6 {
            return Err(usage(format!(
                "planted tuple '{part}' must have six components p:q:m:n:r:s"
            )));
        }
        let tuple =
            ResonanceTuple::new(fields[0], fields[1], fields[2], fields[3], fields[4], fields[5])
                .map_err(|e| usage(e.to_string()))?;
        out.push(tuple);
    }
    if out.is_empty() {
        return Err(usage("--planted given but no tuples parsed"));
    }
    Ok(out)
}

pub fn cmd_generate(args: &GenerateArgs) -> Result<CmdStatus, CliError> {
    let mut spec = CorpusSpec {
        n_rejectable: args.rejectable,
        n_resonant: args.resonant,
        n_nonresonant: args.nonresonant,
        n_steps: args.steps,
        pmax: args.pmax,
        seed: args.seed,
        planted: None,
        noise_sigma_deg: args.noise_sigma_deg,
    };
    if let Some(preset) = &args.preset {
        spec = match preset.as_str() {
            "small82" => CorpusSpec {
                noise_sigma_deg: args.noise_sigma_deg,
                ..CorpusSpec::small82(args.seed)
            },
            "long100" => CorpusSpec {
                noise_sigma_deg: args.noise_sigma_deg,
                ..CorpusSpec::long100(args.seed)
            },
            other => return Err(usage(format!("unknown preset '{other}'"))),
        };
    }
    if let Some(text) = &args.planted {
        spec.planted = Some(parse_planted(text)?);
    }
    spec.validate().map_err(|e| usage(e.to_string()))?;

    println!(
        "generating {} particles ({} rejectable, {} resonant, {} non-resonant) x {} steps, pmax {}, seed {}",
        spec.total(),
        spec.n_rejectable,
        spec.n_resonant,
        spec.n_nonresonant,
        spec.n_steps,
        spec.pmax,
        spec.seed
    );
    let corpus = gen_corpus(&spec).map_err(runtime)?;

    std::fs::create_dir_all(&args.out).map_err(runtime)?;
    let particles_path = args.out.join("particles.jsonl");
    let ephemeris_path = args.out.join("ephemeris.json");
    let labels_path = args.out.join("labels.csv");
    write_particles(&particles_path, &corpus.particles).map_err(runtime)?;
    write_ephemeris(&ephemeris_path, &corpus.ephemeris).map_err(runtime)?;
    let labels: Vec<(String, &'static str)> = corpus
        .labels
        .iter()
        .map(|(id, cat)| (id.clone(), cat.label()))
        .collect();
    write_labels_csv(&labels_path, &labels).map_err(runtime)?;
    println!(
        "wrote {}, {}, {}",
        particles_path.display(),
        ephemeris_path.display(),
        labels_path.display()
    );
    Ok(CmdStatus::Clean)
}

fn build_mode(name: &str, workers: usize, depth: usize) -> Result<ExecutionMode, CliError> {
    let mode = ExecutionMode::from_str(name).map_err(usage)?;
    let mode = match mode {
        ExecutionMode::Serial => ExecutionMode::Serial,
        ExecutionMode::ParticlesStatic { .. } => ExecutionMode::ParticlesStatic { workers },
        ExecutionMode::ParticlesDynamic { .. } => ExecutionMode::ParticlesDynamic { workers },
        ExecutionMode::Wavefront { .. } => ExecutionMode::Wavefront {
            workers,
            prefix_depth: depth,
        },
    };
    mode.validate().map_err(|e| usage(e.to_string()))?;
    Ok(mode)
}

pub fn cmd_analyze(args: &AnalyzeArgs) -> Result<CmdStatus, CliError> {
    let workers = args.workers.unwrap_or_else(default_workers);
    let config = args.detector.to_config(workers, args.depth)?;
    let mode = build_mode(&args.mode, workers, args.depth)?;

    let particles = read_particles(&args.particles).map_err(runtime)?;
    let ephemeris = read_ephemeris(&args.ephemeris).map_err(runtime)?;
    println!(
        "analyzing {} particles, mode {}, workers {}, pmax {}",
        particles.len(),
        mode.label(),
        workers,
        config.pmax
    );

    let rows = run_corpus(&particles, &ephemeris, &config, mode).map_err(runtime)?;
    let result_rows: Vec<_> = rows.iter().map(RunRow::to_result_row).collect();
    write_results_csv(&args.out, &result_rows).map_err(runtime)?;

    let errors = rows
        .iter()
        .filter(|r| matches!(r.outcome, AnalysisOutcome::Failed(_)))
        .count();
    println!("wrote {} ({} rows, {} errors)", args.out.display(), rows.len(), errors);
    if errors > 0 {
        Ok(CmdStatus::ParticleErrors(errors))
    } else {
        Ok(CmdStatus::Clean)
    }
}

fn parse_list<T: FromStr>(text: &str, what: &str) -> Result<Vec<T>, CliError>
where
    T::Err: std::fmt::Display,
{
    let items: Result<Vec<T>, _> = text
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse::<T>())
        .collect();
    match items {
        Ok(v) if !v.is_empty() => Ok(v),
        Ok(_) => Err(usage(format!("empty {what} list"))),
        Err(e) => Err(usage(format!("bad {what} list '{text}': {e}"))),
    }
}

pub const BENCH_CSV_HEADER: &str =
    "particle_id,mode,workers,prefix_depth,classification,elapsed_ns,invocations";
pub const SPEEDUP_CSV_HEADER: &str = "mode,workers,depth,total_elapsed_ns,speedup_vs_serial";

fn bench_rows_csv(rows: &[RunRow], mode: ExecutionMode, out: &mut String) {
    for row in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            row.id,
            mode.label(),
            mode.workers(),
            mode.prefix_depth(),
            row.outcome.label(),
            row.elapsed_ns,
            row.invocations
        )
        .expect("write to String");
    }
}

pub fn cmd_bench(args: &BenchArgs) -> Result<CmdStatus, CliError> {
    let mode_names: Vec<String> = parse_list(&args.modes, "mode")?;
    let workers_list: Vec<usize> = parse_list(&args.workers_list, "workers")?;
    let depth_list: Vec<usize> = parse_list(&args.depth_list, "depth")?;
    for name in &mode_names {
        ExecutionMode::from_str(name).map_err(usage)?;
    }
    let config_probe = args.detector.to_config(1, *depth_list.first().unwrap())?;
    drop(config_probe);

    let particles = read_particles(&args.particles).map_err(runtime)?;
    let ephemeris = read_ephemeris(&args.ephemeris).map_err(runtime)?;

    let mut bench_csv = String::from(BENCH_CSV_HEADER);
    bench_csv.push('\n');
    let mut speedup_csv = String::from(SPEEDUP_CSV_HEADER);
    speedup_csv.push('\n');
    let mut had_errors = 0usize;

    // Serial baseline always runs; every sweep point is compared to it.
    let serial_config = args.detector.to_config(1, 2)?;
    println!("bench: serial baseline over {} particles", particles.len());
    let serial_rows =
        run_corpus(&particles, &ephemeris, &serial_config, ExecutionMode::Serial)
            .map_err(runtime)?;
    let serial_total: u64 = serial_rows.iter().map(|r| r.elapsed_ns).sum();
    had_errors += serial_rows
        .iter()
        .filter(|r| matches!(r.outcome, AnalysisOutcome::Failed(_)))
        .count();
    bench_rows_csv(&serial_rows, ExecutionMode::Serial, &mut bench_csv);
    writeln!(speedup_csv, "serial,1,0,{serial_total},1.000000").expect("write to String");

    for name in &mode_names {
        if name == "serial" {
            continue; // baseline already recorded
        }
        for &workers in &workers_list {
            let depths: &[usize] = if name == "wavefront" { &depth_list } else { &[2] };
            for &depth in depths {
                let mode = build_mode(name, workers, depth)?;
                let config = args.detector.to_config(workers, depth)?;
                println!(
                    "bench: mode {} workers {} depth {}",
                    mode.label(),
                    mode.workers(),
                    mode.prefix_depth()
                );
                let rows = run_corpus(&particles, &ephemeris, &config, mode).map_err(runtime)?;
                let total: u64 = rows.iter().map(|r| r.elapsed_ns).sum();
                had_errors += rows
                    .iter()
                    .filter(|r| matches!(r.outcome, AnalysisOutcome::Failed(_)))
                    .count();
                bench_rows_csv(&rows, mode, &mut bench_csv);
                let speedup = serial_total as f64 / total.max(1) as f64;
                writeln!(
                    speedup_csv,
                    "{},{},{},{},{:.6}",
                    mode.label(),
                    mode.workers(),
                    mode.prefix_depth(),
                    total,
                    speedup
                )
                .expect("write to String");
            }
        }
    }

    std::fs::create_dir_all(&args.out_dir).map_err(runtime)?;
    let bench_path = args.out_dir.join("bench.csv");
    let speedup_path = args.out_dir.join("speedup.csv");
    std::fs::write(&bench_path, bench_csv).map_err(runtime)?;
    std::fs::write(&speedup_path, speedup_csv).map_err(runtime)?;
    println!("wrote {} and {}", bench_path.display(), speedup_path.display());
    if had_errors > 0 {
        Ok(CmdStatus::ParticleErrors(had_errors))
    } else {
        Ok(CmdStatus::Clean)
    }
}

/// One decade bucket: [low, high) nanoseconds and how many particles fell in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecadeBucket {
    pub low_ns: u64,
    pub high_ns: u64,
    pub count: usize,
}

/// Buckets runtimes into powers of ten: [10^k, 10^(k+1)). Zero runtimes land
/// in the lowest bucket. Only non-empty buckets are returned, ascending.
pub fn decade_histogram(elapsed_ns: &[u64]) -> Vec<DecadeBucket> {
    use std::collections::BTreeMap;
    let mut counts: BTreeMap<u32, usize> = BTreeMap::new();
    for &ns in elapsed_ns {
        let decade = if ns == 0 { 0 } else { ns.ilog10() };
        *counts.entry(decade).or_insert(0) += 1;
    }
    counts
        .into_iter()
        .map(|(decade, count)| DecadeBucket {
            low_ns: 10u64.pow(decade),
            high_ns: 10u64.pow(decade + 1),
            count,
        })
        .collect()
}

/// Pulls the elapsed_ns column out of a results or bench CSV.
pub fn elapsed_from_csv(text: &str) -> Result<Vec<u64>, String> {
    let mut lines = text.lines();
    let header = lines.next().ok_or("empty file: no header")?;
    let column = header
        .split(',')
        .position(|h| h.trim() == "elapsed_ns")
        .ok_or("no elapsed_ns column in header")?;
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let field = line
            .split(',')
            .nth(column)
            .ok_or_else(|| format!("line {}: missing column {}", i + 2, column + 1))?;
        let value: u64 = field
            .trim()
            .parse()
            .map_err(|e| format!("line {}: bad elapsed_ns '{}': {}", i + 2, field, e))?;
        out.push(value);
    }
    Ok(out)
}

pub const HIST_CSV_HEADER: &str = "bucket_low_ns,bucket_high_ns,count";

pub fn cmd_hist(args: &HistArgs) -> Result<CmdStatus, CliError> {
    let text = std::fs::read_to_string(&args.input).map_err(runtime)?;
    let elapsed = elapsed_from_csv(&text).map_err(CliError::Runtime)?;
    let mut out = String::from(HIST_CSV_HEADER);
    out.push('\n');
    for bucket in decade_histogram(&elapsed) {
        writeln!(out, "{},{},{}", bucket.low_ns, bucket.high_ns, bucket.count)
            .expect("write to String");
    }
    std::fs::write(&args.out, out).map_err(runtime)?;
    println!("wrote {}", args.out.display());
    Ok(CmdStatus::Clean)
}

pub fn run(cli: &Cli) -> Result<CmdStatus, CliError> {
    match &cli.command {
        Command::Generate(args) => cmd_generate(args),
        Command::Analyze(args) => cmd_analyze(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Hist(args) => cmd_hist(args),
    }
}
