//! Execution strategies for the resonance search.
//!
//! Three strategies, one contract: for every particle they return exactly
//! the classification the serial nested loops produce, including which
//! tuple is reported when several librate.
//!
//! - Serial: iterate tuples in order, return at the first hit.
//! - Particle-level: farm whole particles out to threads, either as
//!   contiguous static blocks or from a shared dynamic queue.
//! - Wavefront: inside one particle, the inspector walks tuple prefixes in
//!   serial order; for each prefix it materializes the subset of
//!   completions, the executor evaluates every element in parallel into a
//!   pre-assigned result slot, and a serial scan of the slots finds the
//!   first hit. No wavefront is cancelled mid-flight, so worker count and
//!   scheduling cannot change the result.

use std::str::FromStr;
use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};
use std::sync::mpsc;
use std::time::Instant;

use thiserror::Error;

use crate::domain::{
    AnalysisOutcome, Classification, ParticleRecord, PlanetEphemeris, ResonanceTuple, ResultRow,
    SearchConfig, ValidationError,
};
use crate::libration::{evaluate_tuple, is_consistent, EvalScratch, LibrationError};
use crate::tuplespace::{prefixes, subset_for_prefix};

#[derive(Debug, Error)]
pub enum ExecError {
    #[error(transparent)]
    Config(#[from] ValidationError),
    #[error(transparent)]
    Libration(#[from] LibrationError),
    #[error("worker failed evaluating tuple {tuple}: {source}")]
    Worker {
        tuple: ResonanceTuple,
        source: LibrationError,
    },
    #[error("failed to build worker pool: {0}")]
    Pool(String),
}

/// How a corpus run schedules its work.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExecutionMode {
    Serial,
    /// One contiguous block of particles per worker, fixed up front. This
    /// reproduces the load-imbalance pathology when expensive particles
    /// cluster in one block.
    ParticlesStatic { workers: usize },
    /// Workers pull the next particle index from a shared queue.
    ParticlesDynamic { workers: usize },
    /// Particles run one at a time; the tuple space of each is searched in
    /// parallel wavefronts at the given prefix depth.
    Wavefront { workers: usize, prefix_depth: usize },
}

impl ExecutionMode {
    pub fn label(&self) -> &'static str {
        match self {
            ExecutionMode::Serial => "serial",
            ExecutionMode::ParticlesStatic { .. } => "particles_static",
            ExecutionMode::ParticlesDynamic { .. } => "particles_dynamic",
            ExecutionMode::Wavefront { .. } => "wavefront",
        }
    }

    pub fn workers(&self) -> usize {
        match *self {
            ExecutionMode::Serial => 1,
            ExecutionMode::ParticlesStatic { workers }
            | ExecutionMode::ParticlesDynamic { workers } => workers,
            ExecutionMode::Wavefront { workers, .. } => workers,
        }
    }

    /// Prefix depth for bench reporting; 0 when not applicable.
    pub fn prefix_depth(&self) -> usize {
        match *self {
            ExecutionMode::Wavefront { prefix_depth, .. } => prefix_depth,
            _ => 0,
        }
    }

    pub fn validate(&self) -> Result<(), ValidationError> {
        let bad = |msg: &str| ValidationError::BadConfig(msg.to_string());
        if self.workers() < 1 {
            return Err(bad("workers must be >= 1"));
        }
        if let ExecutionMode::Wavefront { prefix_depth, .. } = self {
            if !(1..=5).contains(prefix_depth) {
                return Err(bad("prefix_depth must be in 1..=5"));
            }
        }
        Ok(())
    }
}

impl FromStr for ExecutionMode {
    type Err = String;

    /// Parses a mode label; worker/depth fields start at their defaults.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "serial" => Ok(ExecutionMode::Serial),
            "particles_static" => Ok(ExecutionMode::ParticlesStatic { workers: 1 }),
            "particles_dynamic" => Ok(ExecutionMode::ParticlesDynamic { workers: 1 }),
            "wavefront" => Ok(ExecutionMode::Wavefront {
                workers: 1,
                prefix_depth: 2,
            }),
            other => Err(format!(
                "unknown mode '{other}' (expected serial, particles_static, particles_dynamic, or wavefront)"
            )),
        }
    }
}

/// One corpus-run record: the verdict plus per-particle cost counters.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRow {
    pub id: String,
    pub outcome: AnalysisOutcome,
    pub elapsed_ns: u64,
    /// Number of libration checks performed for this particle.
    pub invocations: u64,
}

impl RunRow {
    pub fn to_result_row(&self) -> ResultRow {
        ResultRow {
            id: self.id.clone(),
            outcome: self.outcome.clone(),
            elapsed_ns: self.elapsed_ns,
        }
    }
}

/// Serial reference: tuples in exact iteration order, returning at the
/// first librating one.
pub fn check_resonance_serial(
    particle: &ParticleRecord,
    eph: &PlanetEphemeris,
    config: &SearchConfig,
) -> Result<Classification, ExecError> {
    config.validate()?;
    let counter = AtomicU64::new(0);
    let mut scratch = EvalScratch::default();
    serial_counted(particle, eph, config, &counter, &mut scratch)
}

fn serial_counted(
    particle: &ParticleRecord,
    eph: &PlanetEphemeris,
    config: &SearchConfig,
    invocations: &AtomicU64,
    scratch: &mut EvalScratch,
) -> Result<Classification, ExecError> {
    eph.matches_epochs(particle)
        .map_err(LibrationError::EpochMismatch)?;
    if !is_consistent(particle, config.consistency_rel_range) {
        return Ok(Classification::RejectedInconsistent);
    }
    let pmax = config.pmax as i32;
    for p in 1..=pmax {
        for q in (1..=p).rev() {
            if !crate::tuplespace::is_unique_ratio(p, q).expect("range checked") {
                continue;
            }
            let d = p - q;
            for m in (0..=d).rev() {
                for n in (0..=(d - m)).rev() {
                    for r in (0..=(d - m - n)).rev() {
                        let tuple = ResonanceTuple {
                            p,
                            q,
                            m,
                            n,
                            r,
                            s: d - m - n - r,
                        };
                        invocations.fetch_add(1, Ordering::Relaxed);
                        if let Some(finding) =
                            evaluate_tuple(particle, eph, &tuple, config, scratch)
                                .map_err(|e| ExecError::Worker { tuple, source: e })?
                        {
                            return Ok(Classification::Resonant(finding));
                        }
                    }
                }
            }
        }
    }
    Ok(Classification::NonResonant)
}

/// Wavefront search with a freshly built worker pool.
pub fn check_resonance_wavefront(
    particle: &ParticleRecord,
    eph: &PlanetEphemeris,
    config: &SearchConfig,
    workers: usize,
    prefix_depth: usize,
) -> Result<Classification, ExecError> {
    config.validate()?;
    ExecutionMode::Wavefront {
        workers,
        prefix_depth,
    }
    .validate()?;
    let pool = build_pool(workers)?;
    let counter = AtomicU64::new(0);
    wavefront_counted(&pool, particle, eph, config, prefix_depth, &counter)
}

fn build_pool(workers: usize) -> Result<rayon::ThreadPool, ExecError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| ExecError::Pool(e.to_string()))
}

/// Inspector/executor wavefront search on an existing pool.
///
/// Concurrency contract: within one wavefront each worker writes only its
/// own pre-assigned slots; the scan starts only after the parallel region
/// joins; slots are scanned in subset order, so the first hit is the
/// serial-order first hit.
fn wavefront_counted(
    pool: &rayon::ThreadPool,
    particle: &ParticleRecord,
    eph: &PlanetEphemeris,
    config: &SearchConfig,
    prefix_depth: usize,
    invocations: &AtomicU64,
) -> Result<Classification, ExecError> {
    use rayon::prelude::*;

    eph.matches_epochs(particle)
        .map_err(LibrationError::EpochMismatch)?;
    if !is_consistent(particle, config.consistency_rel_range) {
        return Ok(Classification::RejectedInconsistent);
    }

    let workers = pool.current_num_threads().max(1);
    // The whole search runs inside one install so the pool stays hot across
    // wavefronts; each wavefront's parallel region joins before the scan.
    pool.install(|| {
        let mut results: Vec<Result<Option<crate::domain::ResonanceFinding>, LibrationError>> =
            Vec::new();
        for prefix in prefixes(config.pmax, prefix_depth) {
            // Inspect: materialize this wavefront's tuples.
            let subset = subset_for_prefix(&prefix).expect("prefix from generator is valid");
            if subset.is_empty() {
                continue;
            }
            // Execute: one contiguous chunk per worker, results into
            // pre-assigned slots.
            results.clear();
            results.resize(subset.len(), Ok(None));
            let chunk = subset.len().div_ceil(workers);
            results
                .par_chunks_mut(chunk)
                .zip(subset.par_chunks(chunk))
                .for_each(|(slots, tuples)| {
                    let mut scratch = EvalScratch::default();
                    for (slot, tuple) in slots.iter_mut().zip(tuples) {
                        invocations.fetch_add(1, Ordering::Relaxed);
                        *slot = evaluate_tuple(particle, eph, tuple, config, &mut scratch);
                    }
                });
            // Scan serially for the first occurrence.
            for (slot, tuple) in results.iter_mut().zip(&subset) {
                match std::mem::replace(slot, Ok(None)) {
                    Ok(Some(finding)) => return Ok(Classification::Resonant(finding)),
                    Ok(None) => {}
                    Err(e) => {
                        return Err(ExecError::Worker {
                            tuple: *tuple,
                            source: e,
                        })
                    }
                }
            }
        }
        Ok(Classification::NonResonant)
    })
}

fn outcome_of(result: Result<Classification, ExecError>) -> AnalysisOutcome {
    match result {
        Ok(c) => AnalysisOutcome::Classified(c),
        Err(e) => AnalysisOutcome::Failed(e.to_string()),
    }
}

/// Classifies every particle, timing each with a monotonic clock. Rows come
/// back in input order for every mode, and per-particle failures land in
/// their row instead of aborting the run.
pub fn run_corpus(
    particles: &[ParticleRecord],
    eph: &PlanetEphemeris,
    config: &SearchConfig,
    mode: ExecutionMode,
) -> Result<Vec<RunRow>, ExecError> {
    config.validate()?;
    mode.validate()?;

    let classify_serial_row = |p: &ParticleRecord| -> RunRow {
        let counter = AtomicU64::new(0);
        let mut scratch = EvalScratch::default();
        let start = Instant::now();
        let result = serial_counted(p, eph, config, &counter, &mut scratch);
        RunRow {
            id: p.id.clone(),
            outcome: outcome_of(result),
            elapsed_ns: start.elapsed().as_nanos() as u64,
            invocations: counter.load(Ordering::Relaxed),
        }
    };

    match mode {
        ExecutionMode::Serial => Ok(particles.iter().map(classify_serial_row).collect()),

        ExecutionMode::ParticlesStatic { workers } => {
            let block = particles.len().div_ceil(workers).max(1);
            let mut rows: Vec<Option<RunRow>> = vec![None; particles.len()];
            std::thread::scope(|scope| {
                for (slot_block, particle_block) in
                    rows.chunks_mut(block).zip(particles.chunks(block))
                {
                    scope.spawn(move || {
                        for (slot, particle) in slot_block.iter_mut().zip(particle_block) {
                            *slot = Some(classify_serial_row(particle));
                        }
                    });
                }
            });
            Ok(rows.into_iter().map(|r| r.expect("block covered")).collect())
        }

        ExecutionMode::ParticlesDynamic { workers } => {
            let next = AtomicUsize::new(0);
            let (tx, rx) = mpsc::channel::<(usize, RunRow)>();
            std::thread::scope(|scope| {
                for _ in 0..workers {
                    let tx = tx.clone();
                    let next = &next;
                    scope.spawn(move || loop {
                        let idx = next.fetch_add(1, Ordering::Relaxed);
                        if idx >= particles.len() {
                            break;
                        }
                        let row = classify_serial_row(&particles[idx]);
                        if tx.send((idx, row)).is_err() {
                            break;
                        }
                    });
                }
            });
            drop(tx);
            let mut rows: Vec<Option<RunRow>> = vec![None; particles.len()];
            for (idx, row) in rx {
                rows[idx] = Some(row);
            }
            Ok(rows.into_iter().map(|r| r.expect("queue drained")).collect())
        }

        ExecutionMode::Wavefront {
            workers,
            prefix_depth,
        } => {
            // One pool for the whole corpus run, reused across wavefronts.
            let pool = build_pool(workers)?;
            let mut rows = Vec::with_capacity(particles.len());
            for p in particles {
                let counter = AtomicU64::new(0);
                let start = Instant::now();
                let result = wavefront_counted(&pool, p, eph, config, prefix_depth, &counter);
                rows.push(RunRow {
                    id: p.id.clone(),
                    outcome: outcome_of(result),
                    elapsed_ns: start.elapsed().as_nanos() as u64,
                    invocations: counter.load(Ordering::Relaxed),
                });
            }
            Ok(rows)
        }
    }
}
