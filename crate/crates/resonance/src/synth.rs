//! Deterministic, seeded synthetic-particle generator.
//!
//! Produces labeled corpora in the three workload categories: particles the
//! consistency gate rejects instantly, particles with a planted librating
//! resonance angle, and particles that survive the gate but circulate
//! everywhere (and therefore cost a full search). Resonant and non-resonant
//! generators verify their own label against the serial-equivalent oracle
//! and regenerate with a fresh sub-seed when a construction accidentally
//! misbehaves, so ground-truth labels are unconditional.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::circular::ang_diff;
use crate::domain::{
    validate_particle, Classification, ParticleRecord, PlanetEphemeris, RawParticle,
    ResonanceTuple, SearchConfig, ValidationError,
};
use crate::executor::{check_resonance_wavefront, ExecError};

const GOLDEN: f64 = 1.618033988749895;
const SQRT2: f64 = std::f64::consts::SQRT_2;
const TAU: f64 = std::f64::consts::TAU;

/// Days between consecutive epochs.
pub const EPOCH_STEP_DAYS: f64 = 100.0;

/// Number of self-check attempts before a generator gives up.
const MAX_ATTEMPTS: u64 = 8;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid corpus spec: {0}")]
    BadSpec(String),
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error("oracle self-check failed while generating: {0}")]
    Oracle(#[from] ExecError),
    #[error(
        "planted tuple {target} was not the first hit after {attempts} attempts (last verdict: {last})"
    )]
    PlantRejected {
        target: ResonanceTuple,
        attempts: u64,
        last: String,
    },
    #[error("could not build a non-resonant particle in {attempts} attempts (last verdict: {last})")]
    CirculationRejected { attempts: u64, last: String },
}

/// splitmix64; used to derive independent sub-seeds.
fn mix_seed(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn epochs(n_steps: usize) -> Vec<f64> {
    (0..n_steps).map(|i| i as f64 * EPOCH_STEP_DAYS).collect()
}

/// Perturber mean motion in degrees per step, sized so that for the default
/// detector the low-order resonance angles of generated particles sweep a
/// full turn per window with margin.
fn lambda_n_rate(n_steps: usize) -> f64 {
    (5616.0 / n_steps as f64).min(150.0)
}

/// Effective detector window length for this series, mirroring the
/// detector's single-window fallback for short series.
fn effective_window_len(n_steps: usize, config: &SearchConfig) -> usize {
    if n_steps / config.window_count < config.min_window_samples {
        n_steps
    } else {
        n_steps / config.window_count
    }
}

/// Perturber history: mean longitude advancing at a fixed rate, perihelion
/// and node drifting slowly at pairwise-incommensurate rates below 1% of
/// the mean motion.
pub fn gen_ephemeris(n_steps: usize, seed: u64) -> PlanetEphemeris {
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, 1));
    let rate = lambda_n_rate(n_steps);
    let lambda0: f64 = rng.gen_range(0.0..360.0);
    let varpi0: f64 = rng.gen_range(0.0..360.0);
    let node0: f64 = rng.gen_range(0.0..360.0);
    let varpi_rate = rate * 0.004 * std::f64::consts::FRAC_1_SQRT_2;
    let node_rate = -rate * 0.0025 * 3f64.sqrt();

    let raw = crate::domain::RawEphemeris {
        epochs: epochs(n_steps),
        lambda: (0..n_steps).map(|i| lambda0 + i as f64 * rate).collect(),
        varpi: (0..n_steps)
            .map(|i| varpi0 + i as f64 * varpi_rate)
            .collect(),
        omega: (0..n_steps).map(|i| node0 + i as f64 * node_rate).collect(),
    };
    crate::domain::validate_ephemeris(raw).expect("generated ephemeris is valid")
}

/// Recovers the per-step mean-motion rate from two consecutive samples.
/// Generated rates stay far below the half-turn ambiguity.
fn rate_from(series: &[crate::circular::AngleDeg]) -> f64 {
    ang_diff(series[1], series[0])
}

/// Rebuilds a continuous (unwrapped) angle series from wrapped samples,
/// assuming consecutive steps move less than a half turn.
///
/// The resonant construction divides by p; feeding it wrapped values would
/// inject 360k/p jumps into every other tuple's angle, which can lock a
/// circulating angle onto a confined arc.
fn unwrap_series(series: &[crate::circular::AngleDeg]) -> Vec<f64> {
    let mut out = Vec::with_capacity(series.len());
    let mut current = series[0].deg();
    out.push(current);
    for w in series.windows(2) {
        current += ang_diff(w[1], w[0]);
        out.push(current);
    }
    out
}

fn gaussian(rng: &mut ChaCha8Rng, sigma: f64) -> f64 {
    // Box-Muller; one value per call is plenty here.
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    sigma * (-2.0 * u1.ln()).sqrt() * (TAU * u2).cos()
}

fn apply_noise(raw: &mut RawParticle, sigma: f64, rng: &mut ChaCha8Rng) {
    if sigma <= 0.0 {
        return;
    }
    for series in [&mut raw.lambda, &mut raw.varpi, &mut raw.omega] {
        for v in series.iter_mut() {
            *v += gaussian(rng, sigma);
        }
    }
}

/// A particle whose semi-major axis sweeps three times the default
/// consistency threshold; rejected before any tuple is evaluated.
pub fn gen_rejectable(id: &str, n_steps: usize, seed: u64) -> ParticleRecord {
    gen_rejectable_noisy(id, n_steps, seed, 0.0)
}

fn gen_rejectable_noisy(id: &str, n_steps: usize, seed: u64, noise: f64) -> ParticleRecord {
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, 2));
    let rate = lambda_n_rate(n_steps);
    let lambda0: f64 = rng.gen_range(0.0..360.0);
    let varpi0: f64 = rng.gen_range(0.0..360.0);
    let node0: f64 = rng.gen_range(0.0..360.0);
    let lam_rate = rate * rng.gen_range(1.2..1.4);
    let span = (n_steps - 1) as f64;
    let mut raw = RawParticle {
        id: id.into(),
        epochs: epochs(n_steps),
        // Relative range 0.4 around mean 40: three times the 0.1 default.
        a: (0..n_steps)
            .map(|i| 32.0 + 16.0 * i as f64 / span)
            .collect(),
        lambda: (0..n_steps)
            .map(|i| lambda0 + i as f64 * lam_rate)
            .collect(),
        varpi: (0..n_steps)
            .map(|i| varpi0 + i as f64 * rate * 0.002)
            .collect(),
        omega: (0..n_steps)
            .map(|i| node0 - i as f64 * rate * 0.0017)
            .collect(),
    };
    apply_noise(&mut raw, noise, &mut rng);
    validate_particle(raw).expect("generated particle is valid")
}

/// A particle constructed to librate at `target` by inverting the
/// resonance-angle definition: the planted angle follows
/// center + amplitude*sin(2*pi*t/period), and lambda is solved from it.
///
/// Self-checks that the oracle classification is Resonant at exactly the
/// planted tuple (the first hit in iteration order); regenerates with a
/// fresh sub-seed up to 8 times otherwise.
///
/// Targets should be block-first (m = p-q, n = r = s = 0): angles within
/// one (p,q) block differ only by slow secular terms, so a libration
/// planted at a later block member drags the earlier members along and the
/// earlier member becomes the first hit, failing the self-check.
#[allow(clippy::too_many_arguments)]
pub fn gen_resonant(
    id: &str,
    eph: &PlanetEphemeris,
    target: ResonanceTuple,
    center_deg: f64,
    amplitude_deg: f64,
    period_steps: f64,
    config: &SearchConfig,
    seed: u64,
) -> Result<ParticleRecord, SynthError> {
    gen_resonant_noisy(
        id,
        eph,
        target,
        center_deg,
        amplitude_deg,
        period_steps,
        config,
        seed,
        0.0,
    )
}

#[allow(clippy::too_many_arguments)]
fn gen_resonant_noisy(
    id: &str,
    eph: &PlanetEphemeris,
    target: ResonanceTuple,
    center_deg: f64,
    amplitude_deg: f64,
    period_steps: f64,
    config: &SearchConfig,
    seed: u64,
    noise: f64,
) -> Result<ParticleRecord, SynthError> {
    target.validate()?;
    if crate::tuplespace::is_unique_ratio(target.p, target.q) != Ok(true) {
        return Err(SynthError::BadSpec(format!(
            "planted tuple {target} must have coprime (p,q)"
        )));
    }
    if !(0.0..170.0).contains(&amplitude_deg) {
        return Err(SynthError::BadSpec(format!(
            "amplitude {amplitude_deg} out of range [0, 170)"
        )));
    }
    if !(period_steps > 0.0) {
        return Err(SynthError::BadSpec("period must be positive".into()));
    }

    let n = eph.len();
    let rate = rate_from(&eph.lambda);
    let lambda_n = unwrap_series(&eph.lambda);
    let varpi_n = unwrap_series(&eph.varpi);
    let node_n = unwrap_series(&eph.node);
    let mut last = String::from("never ran");
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, 3 + attempt * 1000));
        let varpi0: f64 = rng.gen_range(0.0..360.0);
        let node0: f64 = rng.gen_range(0.0..360.0);
        // Slow drifts, incommensurate with the ephemeris rates.
        let varpi_rate = rate * 0.0023 * (1.0 + 0.3 * rng.gen_range(0.0..1.0f64));
        let node_rate = -rate * 0.0017 * (1.0 + 0.3 * rng.gen_range(0.0..1.0f64));
        let a_const: f64 = rng.gen_range(36.0..44.0);

        let varpi: Vec<f64> = (0..n).map(|i| varpi0 + i as f64 * varpi_rate).collect();
        let node: Vec<f64> = (0..n).map(|i| node0 + i as f64 * node_rate).collect();
        let lambda: Vec<f64> = (0..n)
            .map(|i| {
                let phi = center_deg + amplitude_deg * (TAU * i as f64 / period_steps).sin();
                (target.q as f64 * lambda_n[i]
                    + target.m as f64 * varpi[i]
                    + target.n as f64 * node[i]
                    + target.r as f64 * varpi_n[i]
                    + target.s as f64 * node_n[i]
                    + phi)
                    / target.p as f64
            })
            .collect();

        let mut raw = RawParticle {
            id: id.into(),
            epochs: epochs(n),
            a: vec![a_const; n],
            lambda,
            varpi,
            omega: node,
        };
        apply_noise(&mut raw, noise, &mut rng);
        let particle = validate_particle(raw)?;

        match check_resonance_wavefront(&particle, eph, config, config.workers, 2)? {
            Classification::Resonant(f) if f.tuple == target => return Ok(particle),
            verdict => last = format!("{verdict:?}"),
        }
    }
    Err(SynthError::PlantRejected {
        target,
        attempts: MAX_ATTEMPTS,
        last,
    })
}

/// A particle that passes the consistency gate but circulates at every
/// tuple, so classification must search the entire space.
///
/// The mean motion is golden-ratio-scaled above the perturber's, which
/// keeps p*rate_particle - q*rate_perturber bounded away from zero for
/// every q <= p; a small smooth frequency dither on lambda breaks up the
/// clustered sampling patterns that a pure rotation can leave in short
/// windows. The oracle self-check guarantees the label; failed attempts
/// retry with a jittered rate.
pub fn gen_nonresonant(
    id: &str,
    eph: &PlanetEphemeris,
    config: &SearchConfig,
    seed: u64,
) -> Result<ParticleRecord, SynthError> {
    gen_nonresonant_noisy(id, eph, config, seed, 0.0)
}

fn gen_nonresonant_noisy(
    id: &str,
    eph: &PlanetEphemeris,
    config: &SearchConfig,
    seed: u64,
    noise: f64,
) -> Result<ParticleRecord, SynthError> {
    let n = eph.len();
    let rate = rate_from(&eph.lambda);
    let window = effective_window_len(n, config) as f64;
    let mut last = String::from("never ran");
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, 4 + attempt * 1000));
        let ratio = GOLDEN * 0.92 + attempt as f64 * 0.004 * SQRT2 + rng.gen_range(0.0..0.002f64);
        let lambda0: f64 = rng.gen_range(0.0..360.0);
        let varpi0: f64 = rng.gen_range(0.0..360.0);
        let node0: f64 = rng.gen_range(0.0..360.0);
        let varpi_rate = rate * 0.0021 * (1.0 + 0.4 * rng.gen_range(0.0..1.0f64));
        let node_rate = -rate * 0.0016 * (1.0 + 0.4 * rng.gen_range(0.0..1.0f64));
        let a_const: f64 = rng.gen_range(36.0..44.0);

        // Frequency dither: two slow sinusoids, periods incommensurate with
        // the window so consecutive windows sample different phases.
        let p1 = 1.877 * window * (1.0 + 0.05 * rng.gen_range(0.0..1.0f64));
        let p2 = 0.741 * window * (1.0 + 0.05 * rng.gen_range(0.0..1.0f64));
        let phase1: f64 = rng.gen_range(0.0..TAU);
        let phase2: f64 = rng.gen_range(0.0..TAU);

        let lam_rate = rate * ratio;
        let mut raw = RawParticle {
            id: id.into(),
            epochs: epochs(n),
            a: vec![a_const; n],
            lambda: (0..n)
                .map(|i| {
                    let t = i as f64;
                    lambda0
                        + t * lam_rate
                        + 19.0 * (TAU * t / p1 + phase1).sin()
                        + 7.0 * (TAU * t / p2 + phase2).sin()
                })
                .collect(),
            varpi: (0..n).map(|i| varpi0 + i as f64 * varpi_rate).collect(),
            omega: (0..n).map(|i| node0 + i as f64 * node_rate).collect(),
        };
        apply_noise(&mut raw, noise, &mut rng);
        let particle = validate_particle(raw)?;

        match check_resonance_wavefront(&particle, eph, config, config.workers, 2)? {
            Classification::NonResonant => return Ok(particle),
            verdict => last = format!("{verdict:?}"),
        }
    }
    Err(SynthError::CirculationRejected {
        attempts: MAX_ATTEMPTS,
        last,
    })
}

/// The hardest non-resonant case: a particle that starts out librating
/// near `ratio` and escapes before the end of the series.
///
/// Every window but the last follows the resonant construction, so the
/// near-resonance's whole neighborhood of ratio families stays confined
/// until the final window circulates everything. Classification still ends
/// NonResonant, but the confined families cost full multi-window
/// evaluations clustered in their (p,q) blocks, the worst load shape the
/// executors face. Self-checks the label like the other generators.
pub fn gen_escaping_resonant(
    id: &str,
    eph: &PlanetEphemeris,
    ratio: (i32, i32),
    amplitude_deg: f64,
    config: &SearchConfig,
    seed: u64,
) -> Result<ParticleRecord, SynthError> {
    let (p0, q0) = ratio;
    let anchor = ResonanceTuple {
        p: p0,
        q: q0,
        m: p0 - q0,
        n: 0,
        r: 0,
        s: 0,
    };
    anchor.validate()?;
    if crate::tuplespace::is_unique_ratio(p0, q0) != Ok(true) {
        return Err(SynthError::BadSpec(format!(
            "ratio ({p0},{q0}) must be coprime"
        )));
    }
    if !(0.0..170.0).contains(&amplitude_deg) {
        return Err(SynthError::BadSpec(format!(
            "amplitude {amplitude_deg} out of range [0, 170)"
        )));
    }
    let n = eph.len();
    let windows = if n / config.window_count < config.min_window_samples {
        1
    } else {
        config.window_count
    };
    if windows < 2 {
        return Err(SynthError::BadSpec(
            "escaping-resonant particles need at least two detector windows".into(),
        ));
    }
    // Librate through all but the last window, then break free.
    let t_break = (windows - 1) * n / windows;
    let period = (n as f64 / 8.0).max(4.0);

    let rate = rate_from(&eph.lambda);
    let lambda_n = unwrap_series(&eph.lambda);
    let mut last = String::from("never ran");
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, 6 + attempt * 1000));
        let center: f64 = rng.gen_range(0.0..360.0);
        let varpi0: f64 = rng.gen_range(0.0..360.0);
        let node0: f64 = rng.gen_range(0.0..360.0);
        let varpi_rate = rate * 0.0023 * (1.0 + 0.3 * rng.gen_range(0.0..1.0f64));
        let node_rate = -rate * 0.0017 * (1.0 + 0.3 * rng.gen_range(0.0..1.0f64));
        let a_const: f64 = rng.gen_range(36.0..44.0);
        let ratio_esc =
            GOLDEN * 0.92 + attempt as f64 * 0.004 * SQRT2 + rng.gen_range(0.0..0.002f64);
        let window = (n / windows) as f64;
        let p1 = 1.877 * window * (1.0 + 0.05 * rng.gen_range(0.0..1.0f64));
        let p2 = 0.741 * window * (1.0 + 0.05 * rng.gen_range(0.0..1.0f64));
        let phase1: f64 = rng.gen_range(0.0..TAU);
        let phase2: f64 = rng.gen_range(0.0..TAU);

        let varpi: Vec<f64> = (0..n).map(|i| varpi0 + i as f64 * varpi_rate).collect();
        let node: Vec<f64> = (0..n).map(|i| node0 + i as f64 * node_rate).collect();
        let librating = |t: usize| {
            let phi = center + amplitude_deg * (TAU * t as f64 / period).sin();
            (q0 as f64 * lambda_n[t] + (p0 - q0) as f64 * varpi[t] + phi) / p0 as f64
        };
        let dither = |t: f64| {
            19.0 * (TAU * t / p1 + phase1).sin() + 7.0 * (TAU * t / p2 + phase2).sin()
        };
        let escape_anchor = librating(t_break) - dither(t_break as f64);
        let lambda: Vec<f64> = (0..n)
            .map(|t| {
                if t < t_break {
                    librating(t)
                } else {
                    let dt = (t - t_break) as f64;
                    escape_anchor + dt * rate * ratio_esc + dither(t as f64)
                }
            })
            .collect();

        let particle = validate_particle(RawParticle {
            id: id.into(),
            epochs: epochs(n),
            a: vec![a_const; n],
            lambda,
            varpi,
            omega: node,
        })?;

        match check_resonance_wavefront(&particle, eph, config, config.workers, 2)? {
            Classification::NonResonant => return Ok(particle),
            verdict => last = format!("{verdict:?}"),
        }
    }
    Err(SynthError::CirculationRejected {
        attempts: MAX_ATTEMPTS,
        last,
    })
}

/// Expected classification of a generated particle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParticleCategory {
    Rejectable,
    Resonant,
    NonResonant,
}

impl ParticleCategory {
    /// The CSV spelling used in labels and results.
    pub fn label(&self) -> &'static str {
        match self {
            ParticleCategory::Rejectable => "rejected",
            ParticleCategory::Resonant => "resonant",
            ParticleCategory::NonResonant => "non_resonant",
        }
    }
}

/// What corpus to generate.
#[derive(Debug, Clone)]
pub struct CorpusSpec {
    pub n_rejectable: usize,
    pub n_resonant: usize,
    pub n_nonresonant: usize,
    pub n_steps: usize,
    pub pmax: u32,
    pub seed: u64,
    /// Tuples to plant, cycled over the resonant particles. Defaults to a
    /// low-rank pool whose labels the generators can certify quickly.
    pub planted: Option<Vec<ResonanceTuple>>,
    /// Gaussian jitter applied to every generated angle sample, degrees.
    pub noise_sigma_deg: f64,
}

impl CorpusSpec {
    pub fn new(n_rejectable: usize, n_resonant: usize, n_nonresonant: usize) -> Self {
        CorpusSpec {
            n_rejectable,
            n_resonant,
            n_nonresonant,
            n_steps: 9629,
            pmax: 30,
            seed: 0,
            planted: None,
            noise_sigma_deg: 0.0,
        }
    }

    /// 82 particles of 9629 steps.
    pub fn small82(seed: u64) -> Self {
        CorpusSpec {
            seed,
            ..CorpusSpec::new(57, 5, 20)
        }
    }

    /// 100 particles of 50,000 steps.
    pub fn long100(seed: u64) -> Self {
        CorpusSpec {
            n_steps: 50_000,
            seed,
            ..CorpusSpec::new(70, 10, 20)
        }
    }

    pub fn total(&self) -> usize {
        self.n_rejectable + self.n_resonant + self.n_nonresonant
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        if self.n_steps < 2 {
            return Err(SynthError::BadSpec("n_steps must be >= 2".into()));
        }
        if self.pmax < 1 || self.pmax > 200 {
            return Err(SynthError::BadSpec("pmax must be in 1..=200".into()));
        }
        if self.noise_sigma_deg < 0.0 {
            return Err(SynthError::BadSpec("noise sigma must be >= 0".into()));
        }
        if let Some(planted) = &self.planted {
            for t in planted {
                t.validate().map_err(SynthError::Validation)?;
                if crate::tuplespace::is_unique_ratio(t.p, t.q) != Ok(true) {
                    return Err(SynthError::BadSpec(format!(
                        "planted tuple {t} must have coprime (p,q)"
                    )));
                }
                if t.p > self.pmax as i32 {
                    return Err(SynthError::BadSpec(format!(
                        "planted tuple {t} has p beyond pmax {}",
                        self.pmax
                    )));
                }
            }
        }
        Ok(())
    }
}

/// A generated corpus with its ground truth.
#[derive(Debug, Clone)]
pub struct SynthCorpus {
    pub particles: Vec<ParticleRecord>,
    pub ephemeris: PlanetEphemeris,
    pub labels: Vec<(String, ParticleCategory)>,
}

fn default_planted_pool() -> Vec<(ResonanceTuple, f64, f64)> {
    // (tuple, center, amplitude): low-rank, and all block-first (m = p-q).
    // Within one (p,q) block the angles differ only by slow secular terms,
    // so when any member librates the earlier members of the block librate
    // too; only the block-first tuple can ever be the serial first hit.
    let t = |p, q, m, n, r, s| ResonanceTuple::new(p, q, m, n, r, s).expect("valid tuple");
    vec![
        (t(3, 2, 1, 0, 0, 0), 180.0, 60.0),
        (t(2, 1, 1, 0, 0, 0), 140.0, 35.0),
        (t(3, 1, 2, 0, 0, 0), 250.0, 90.0),
        (t(1, 1, 0, 0, 0, 0), 75.0, 25.0),
        (t(4, 3, 1, 0, 0, 0), 310.0, 50.0),
    ]
}

/// Generates the full corpus: categories interleaved by a seeded shuffle,
/// ids assigned in emission order, labels returned alongside.
pub fn gen_corpus(spec: &CorpusSpec) -> Result<SynthCorpus, SynthError> {
    spec.validate()?;
    let ephemeris = gen_ephemeris(spec.n_steps, spec.seed);
    let config = SearchConfig {
        pmax: spec.pmax,
        seed: spec.seed,
        ..SearchConfig::default()
    };

    let mut categories = Vec::with_capacity(spec.total());
    categories.extend(std::iter::repeat(ParticleCategory::Rejectable).take(spec.n_rejectable));
    categories.extend(std::iter::repeat(ParticleCategory::Resonant).take(spec.n_resonant));
    categories.extend(std::iter::repeat(ParticleCategory::NonResonant).take(spec.n_nonresonant));
    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(mix_seed(spec.seed, 5));
    // Fisher-Yates.
    for i in (1..categories.len()).rev() {
        let j = shuffle_rng.gen_range(0..=i);
        categories.swap(i, j);
    }

    let planted = spec.planted.as_ref().map(|tuples| {
        tuples
            .iter()
            .enumerate()
            .map(|(i, t)| (*t, 36.0 * (i as f64 + 1.0) % 360.0, 40.0 + 10.0 * (i % 9) as f64))
            .collect::<Vec<_>>()
    });
    let pool: Vec<_> = planted
        .unwrap_or_else(default_planted_pool)
        .into_iter()
        .filter(|(t, _, _)| t.p <= spec.pmax as i32)
        .collect();
    if spec.n_resonant > 0 && pool.is_empty() {
        return Err(SynthError::BadSpec(format!(
            "no plantable tuples with p <= pmax {}",
            spec.pmax
        )));
    }
    let period = (spec.n_steps as f64 / 8.0).max(4.0);

    let mut particles = Vec::with_capacity(spec.total());
    let mut labels = Vec::with_capacity(spec.total());
    let mut resonant_idx = 0usize;
    for (i, category) in categories.iter().enumerate() {
        let id = format!("synth-{:04}", i + 1);
        let sub = mix_seed(spec.seed, 100 + i as u64);
        let particle = match category {
            ParticleCategory::Rejectable => {
                gen_rejectable_noisy(&id, spec.n_steps, sub, spec.noise_sigma_deg)
            }
            ParticleCategory::Resonant => {
                let (tuple, center, amplitude) = pool[resonant_idx % pool.len()];
                resonant_idx += 1;
                gen_resonant_noisy(
                    &id,
                    &ephemeris,
                    tuple,
                    center,
                    amplitude,
                    period,
                    &config,
                    sub,
                    spec.noise_sigma_deg,
                )?
            }
            ParticleCategory::NonResonant => {
                gen_nonresonant_noisy(&id, &ephemeris, &config, sub, spec.noise_sigma_deg)?
            }
        };
        particles.push(particle);
        labels.push((id, *category));
    }

    Ok(SynthCorpus {
        particles,
        ephemeris,
        labels,
    })
}
