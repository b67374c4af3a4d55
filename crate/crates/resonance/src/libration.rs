//! The domain predicate stack: semi-major-axis consistency rejection,
//! resonance-angle construction, and the libration/circulation test.
//!
//! A resonance angle librates when it stays confined to an arc of the
//! circle instead of sweeping all of it. The detector splits the series
//! into contiguous windows and requires every window to leave a circular
//! gap of at least `gap_threshold_deg` empty; a circulating angle fills
//! the circle and fails the very first window it covers.

use thiserror::Error;

use crate::circular::{
    ang_diff_raw, circular_mean_raw, max_circular_gap_raw, AngleDeg, CircularError,
};
use crate::domain::{
    EpochMismatch, ParticleRecord, PlanetEphemeris, ResonanceFinding, ResonanceTuple, SearchConfig,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LibrationError {
    #[error("particle/ephemeris epoch mismatch: {0}")]
    EpochMismatch(#[from] EpochMismatch),
    #[error("series too short for libration check: {len} samples")]
    TooShort { len: usize },
    #[error("detector degenerate for tuple {tuple}: {source}")]
    DegenerateMean {
        tuple: ResonanceTuple,
        source: CircularError,
    },
}

/// The resonance angle evaluated on every epoch of a particle.
#[derive(Debug, Clone, PartialEq)]
pub struct ResonanceAngleSeries {
    pub tuple: ResonanceTuple,
    pub phi: Vec<AngleDeg>,
}

/// True iff the semi-major axis stays within the relative range a stable
/// resonance allows: (max - min) / mean <= consistency_rel_range.
pub fn is_consistent(particle: &ParticleRecord, consistency_rel_range: f64) -> bool {
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    let mut sum = 0.0;
    for &v in &particle.a {
        min = min.min(v);
        max = max.max(v);
        sum += v;
    }
    let mean = sum / particle.a.len() as f64;
    (max - min) / mean <= consistency_rel_range
}

/// Branch-free fold into [0, 360) for the angle kernel; stays within a few
/// ulp of the exact remainder, which the detector's thresholds dwarf.
#[inline]
fn wrap_fold(x: f64) -> f64 {
    let f = x * (1.0 / 360.0);
    let f = f - f.floor();
    let d = f * 360.0;
    if d >= 360.0 {
        0.0
    } else {
        d
    }
}

/// Computes phi_t for `range` and appends the wrapped values to `out`.
///
/// This is the one place the resonance-angle convention lives:
/// phi = p*lambda - q*lambda_N - m*varpi - n*Omega - r*varpi_N - s*Omega_N.
/// The tuple invariant s = p-q-m-n-r makes the coefficients sum to zero, so
/// phi is unchanged by a common rotation of all six input angles.
fn fill_phi(
    particle: &ParticleRecord,
    eph: &PlanetEphemeris,
    tuple: &ResonanceTuple,
    range: std::ops::Range<usize>,
    out: &mut Vec<f64>,
) {
    let pf = tuple.p as f64;
    let qf = tuple.q as f64;
    let mf = tuple.m as f64;
    let nf = tuple.n as f64;
    let rf = tuple.r as f64;
    let sf = tuple.s as f64;
    let len = range.end - range.start;
    let lam = &particle.lambda[range.clone()];
    let varpi = &particle.varpi[range.clone()];
    let node = &particle.node[range.clone()];
    let lam_n = &eph.lambda[range.clone()];
    let varpi_n = &eph.varpi[range.clone()];
    let node_n = &eph.node[range];
    out.reserve(len);
    for i in 0..len {
        let raw = pf * lam[i].deg()
            - qf * lam_n[i].deg()
            - mf * varpi[i].deg()
            - nf * node[i].deg()
            - rf * varpi_n[i].deg()
            - sf * node_n[i].deg();
        out.push(wrap_fold(raw));
    }
}

/// Like `fill_phi` for every `stride`-th epoch of `range`.
fn fill_phi_strided(
    particle: &ParticleRecord,
    eph: &PlanetEphemeris,
    tuple: &ResonanceTuple,
    range: std::ops::Range<usize>,
    stride: usize,
    out: &mut Vec<f64>,
) {
    let pf = tuple.p as f64;
    let qf = tuple.q as f64;
    let mf = tuple.m as f64;
    let nf = tuple.n as f64;
    let rf = tuple.r as f64;
    let sf = tuple.s as f64;
    for i in range.step_by(stride) {
        let raw = pf * particle.lambda[i].deg()
            - qf * eph.lambda[i].deg()
            - mf * particle.varpi[i].deg()
            - nf * particle.node[i].deg()
            - rf * eph.varpi[i].deg()
            - sf * eph.node[i].deg();
        out.push(wrap_fold(raw));
    }
}

/// Builds the full resonance-angle series for one tuple.
pub fn resonance_angle_series(
    particle: &ParticleRecord,
    eph: &PlanetEphemeris,
    tuple: &ResonanceTuple,
) -> Result<ResonanceAngleSeries, LibrationError> {
    eph.matches_epochs(particle)?;
    let mut phi = Vec::new();
    fill_phi(particle, eph, tuple, 0..particle.len(), &mut phi);
    Ok(ResonanceAngleSeries {
        tuple: *tuple,
        phi: phi
            .into_iter()
            .map(|v| AngleDeg::new(v).expect("wrapped"))
            .collect(),
    })
}

/// Number of windows the detector uses for a series of length `n`: the
/// configured count, unless that would leave a window short of
/// `min_window_samples`, in which case the whole series is one window.
fn effective_window_count(n: usize, config: &SearchConfig) -> usize {
    if n / config.window_count < config.min_window_samples {
        1
    } else {
        config.window_count
    }
}

#[inline]
fn window_range(n: usize, windows: usize, w: usize) -> std::ops::Range<usize> {
    (w * n / windows)..((w + 1) * n / windows)
}

const BIN_COUNT: usize = 256;
const BIN_WIDTH: f64 = 360.0 / BIN_COUNT as f64;

/// 256-bin occupancy test proving the largest empty arc is below
/// `threshold`. A true gap of g degrees leaves at least g/w - 2 whole bins
/// empty, so with one extra bin absorbing index rounding, a max empty run
/// of k bins bounds the gap by (k+3)*w from above. Returns false when
/// inconclusive.
fn bins_prove_gap_below(phi: &[f64], threshold: f64) -> bool {
    let mut occupied = [false; BIN_COUNT];
    for &x in phi {
        let idx = ((x * (BIN_COUNT as f64 / 360.0)) as usize).min(BIN_COUNT - 1);
        occupied[idx] = true;
    }
    let mut best_run = 0usize;
    let mut run = 0usize;
    for i in 0..(2 * BIN_COUNT) {
        if occupied[i % BIN_COUNT] {
            run = 0;
        } else {
            run += 1;
            if run > best_run {
                best_run = run;
            }
        }
    }
    let best_run = best_run.min(BIN_COUNT);
    (best_run + 3) as f64 * BIN_WIDTH < threshold
}

/// Whether the largest empty arc among `phi` is at least `threshold`.
/// The occupancy prefilter rejects the common circulating case; anything
/// inconclusive falls back to the exact sorted-gap computation.
fn window_gap_at_least(phi: &[f64], threshold: f64) -> bool {
    debug_assert!(!phi.is_empty());
    if phi.len() == 1 {
        return 360.0 >= threshold;
    }
    if bins_prove_gap_below(phi, threshold) {
        return false;
    }
    max_circular_gap_raw(phi).expect("non-empty") >= threshold
}

/// Computes the finding for a series already known to be confined in every
/// window: center is the circular mean of the whole series, amplitude the
/// maximum absolute deviation from it.
fn finding_from_phi(
    phi: &[f64],
    tuple: &ResonanceTuple,
) -> Result<ResonanceFinding, LibrationError> {
    let center = circular_mean_raw(phi).map_err(|e| LibrationError::DegenerateMean {
        tuple: *tuple,
        source: e,
    })?;
    let mut amplitude = 0.0f64;
    for &x in phi {
        let dev = ang_diff_raw(x, center).abs();
        if dev > amplitude {
            amplitude = dev;
        }
    }
    Ok(ResonanceFinding {
        tuple: *tuple,
        center: AngleDeg::new(center).expect("wrapped"),
        amplitude_deg: amplitude,
    })
}

/// The libration test on a prebuilt resonance-angle series.
///
/// Librating iff every window's max circular gap reaches the configured
/// threshold; the returned finding carries the libration center and
/// amplitude. A confined series whose circular mean is undefined surfaces
/// as an error rather than a verdict.
pub fn check_libration(
    series: &ResonanceAngleSeries,
    config: &SearchConfig,
) -> Result<Option<ResonanceFinding>, LibrationError> {
    let n = series.phi.len();
    if n < 2 {
        return Err(LibrationError::TooShort { len: n });
    }
    let phi: Vec<f64> = series.phi.iter().map(|a| a.deg()).collect();
    let windows = effective_window_count(n, config);
    for w in 0..windows {
        let range = window_range(n, windows, w);
        if !window_gap_at_least(&phi[range], config.gap_threshold_deg) {
            return Ok(None);
        }
    }
    finding_from_phi(&phi, &series.tuple).map(Some)
}

/// Target sample count for the strided first-pass window test.
const SUBSAMPLE_TARGET: usize = 256;

/// Reusable buffers for the fused evaluation path.
#[derive(Debug, Default)]
pub(crate) struct EvalScratch {
    full: Vec<f64>,
    strided: Vec<f64>,
}

/// Fused evaluation used by the executors: identical in verdict and finding
/// to `check_libration(resonance_angle_series(..))` but computes phi window
/// by window, so a circulating tuple stops at its first failing window.
///
/// Each window gets a two-stage test. Stage one evaluates a strided
/// subsample: a subset's largest empty arc can only overestimate the full
/// window's, so when the occupancy bins prove the subsample's gap is below
/// threshold the window has definitively failed. Anything inconclusive
/// falls through to the full window and the exact test.
///
/// Epoch compatibility is the caller's responsibility (checked once per
/// particle, not once per tuple).
pub(crate) fn evaluate_tuple(
    particle: &ParticleRecord,
    eph: &PlanetEphemeris,
    tuple: &ResonanceTuple,
    config: &SearchConfig,
    scratch: &mut EvalScratch,
) -> Result<Option<ResonanceFinding>, LibrationError> {
    let n = particle.len();
    if n < 2 {
        return Err(LibrationError::TooShort { len: n });
    }
    scratch.full.clear();
    let windows = effective_window_count(n, config);
    for w in 0..windows {
        let range = window_range(n, windows, w);
        let stride = range.len().div_ceil(SUBSAMPLE_TARGET);
        if stride > 1 {
            scratch.strided.clear();
            fill_phi_strided(particle, eph, tuple, range.clone(), stride, &mut scratch.strided);
            if bins_prove_gap_below(&scratch.strided, config.gap_threshold_deg) {
                return Ok(None);
            }
        }
        let start = scratch.full.len();
        fill_phi(particle, eph, tuple, range, &mut scratch.full);
        if !window_gap_at_least(&scratch.full[start..], config.gap_threshold_deg) {
            return Ok(None);
        }
    }
    finding_from_phi(&scratch.full, tuple).map(Some)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circular::wrap_raw;
    use crate::domain::{validate_ephemeris, validate_particle, RawEphemeris, RawParticle};
    use proptest::prelude::*;

    fn config() -> SearchConfig {
        SearchConfig {
            workers: 1,
            ..SearchConfig::default()
        }
    }

    fn flat_ephemeris(n: usize) -> PlanetEphemeris {
        validate_ephemeris(RawEphemeris {
            epochs: (0..n).map(|i| i as f64 * 100.0).collect(),
            lambda: (0..n).map(|i| i as f64 * 0.7).collect(),
            varpi: (0..n).map(|i| 10.0 + i as f64 * 0.002).collect(),
            omega: (0..n).map(|i| 250.0 - i as f64 * 0.003).collect(),
        })
        .unwrap()
    }

    fn particle_with_lambda(n: usize, lambda: impl Fn(usize) -> f64) -> ParticleRecord {
        validate_particle(RawParticle {
            id: "t".into(),
            epochs: (0..n).map(|i| i as f64 * 100.0).collect(),
            a: vec![39.4; n],
            lambda: (0..n).map(lambda).collect(),
            varpi: (0..n).map(|i| 5.0 + i as f64 * 0.001).collect(),
            omega: (0..n).map(|i| 100.0 + i as f64 * 0.0015).collect(),
        })
        .unwrap()
    }

    fn series_from(phi: Vec<f64>) -> ResonanceAngleSeries {
        ResonanceAngleSeries {
            tuple: ResonanceTuple::new(1, 1, 0, 0, 0, 0).unwrap(),
            phi: phi.into_iter().map(|x| AngleDeg::new(x).unwrap()).collect(),
        }
    }

    #[test]
    fn consistency_examples() {
        let n = 64;
        let constant = particle_with_lambda(n, |_| 0.0);
        assert!(is_consistent(&constant, 0.1));

        let mut wide = constant.clone();
        wide.a = (0..n)
            .map(|i| 30.0 + 20.0 * i as f64 / (n - 1) as f64)
            .collect();
        assert!(!is_consistent(&wide, 0.1));

        let mut narrow = constant.clone();
        narrow.a = (0..n)
            .map(|i| 39.0 + 0.5 * i as f64 / (n - 1) as f64)
            .collect();
        assert!(is_consistent(&narrow, 0.1));
    }

    #[test]
    fn identical_longitudes_zero_angle() {
        let n = 64;
        let eph = flat_ephemeris(n);
        let mut p = particle_with_lambda(n, |_| 0.0);
        p.lambda = eph.lambda.clone();
        let tuple = ResonanceTuple::new(1, 1, 0, 0, 0, 0).unwrap();
        let series = resonance_angle_series(&p, &eph, &tuple).unwrap();
        for phi in &series.phi {
            assert!(phi.deg() < 1e-9 || phi.deg() > 360.0 - 1e-9);
        }
    }

    #[test]
    fn constructed_three_two_angle_is_constant() {
        // lambda = (2*lambda_N + varpi + 180) / 3 forces phi = 180 for the
        // (3,2,1,0,0,0) tuple.
        let n = 256;
        let eph = flat_ephemeris(n);
        let varpi: Vec<f64> = (0..n).map(|i| 5.0 + i as f64 * 0.001).collect();
        let p = validate_particle(RawParticle {
            id: "constructed".into(),
            epochs: (0..n).map(|i| i as f64 * 100.0).collect(),
            a: vec![39.4; n],
            lambda: (0..n)
                .map(|i| (2.0 * (i as f64 * 0.7) + varpi[i] + 180.0) / 3.0)
                .collect(),
            varpi,
            omega: vec![100.0; n],
        })
        .unwrap();
        let tuple = ResonanceTuple::new(3, 2, 1, 0, 0, 0).unwrap();
        let series = resonance_angle_series(&p, &eph, &tuple).unwrap();
        for phi in &series.phi {
            assert!((phi.deg() - 180.0).abs() < 1e-9, "phi {}", phi.deg());
        }
    }

    #[test]
    fn common_rotation_leaves_angle_unchanged() {
        let n = 64;
        let eph = flat_ephemeris(n);
        let p = particle_with_lambda(n, |i| 33.0 + i as f64 * 1.3);
        let tuple = ResonanceTuple::new(3, 1, 1, 1, 0, 0).unwrap();
        let base = resonance_angle_series(&p, &eph, &tuple).unwrap();

        let rotate = |v: &[AngleDeg], c: f64| -> Vec<AngleDeg> {
            v.iter().map(|a| AngleDeg::new(a.deg() + c).unwrap()).collect()
        };
        let c = 50.0;
        let mut p2 = p.clone();
        p2.lambda = rotate(&p.lambda, c);
        p2.varpi = rotate(&p.varpi, c);
        p2.node = rotate(&p.node, c);
        let mut eph2 = eph.clone();
        eph2.lambda = rotate(&eph.lambda, c);
        eph2.varpi = rotate(&eph.varpi, c);
        eph2.node = rotate(&eph.node, c);

        let rotated = resonance_angle_series(&p2, &eph2, &tuple).unwrap();
        for (a, b) in base.phi.iter().zip(&rotated.phi) {
            assert!(ang_diff_raw(a.deg(), b.deg()).abs() < 1e-9);
        }
    }

    #[test]
    fn epoch_mismatch_is_an_error() {
        let eph = flat_ephemeris(64);
        let p = particle_with_lambda(32, |i| i as f64);
        let tuple = ResonanceTuple::new(1, 1, 0, 0, 0, 0).unwrap();
        assert!(matches!(
            resonance_angle_series(&p, &eph, &tuple),
            Err(LibrationError::EpochMismatch(_))
        ));
    }

    #[test]
    fn constant_angle_librates_with_zero_amplitude() {
        let series = series_from(vec![180.0; 4096]);
        let finding = check_libration(&series, &config()).unwrap().unwrap();
        assert_eq!(finding.center.deg(), 180.0);
        assert_eq!(finding.amplitude_deg, 0.0);
    }

    #[test]
    fn dense_circulation_is_rejected() {
        let phi: Vec<f64> = (0..9629).map(|t| (t % 360) as f64).collect();
        let series = series_from(phi);
        assert_eq!(check_libration(&series, &config()).unwrap(), None);
    }

    #[test]
    fn sinusoidal_libration_recovers_center_and_amplitude() {
        // 9629 samples at period 1000 span 9.629 cycles; the 0.629 partial
        // cycle biases the circular-mean center. Expected values below come
        // from an independent direct summation of the same construction.
        let phi: Vec<f64> = (0..9629)
            .map(|t| 180.0 + 60.0 * (2.0 * std::f64::consts::PI * t as f64 / 1000.0).sin())
            .collect();
        let series = series_from(phi);
        let finding = check_libration(&series, &config()).unwrap().unwrap();
        assert!(
            (finding.center.deg() - 181.9576467460265).abs() < 1e-6,
            "center {}",
            finding.center.deg()
        );
        assert!(
            (finding.amplitude_deg - 61.95764674602648).abs() < 1e-6,
            "amplitude {}",
            finding.amplitude_deg
        );

        // A whole number of cycles removes the bias: center and amplitude
        // land within a degree of the planted values.
        let phi: Vec<f64> = (0..9629)
            .map(|t| 180.0 + 60.0 * (2.0 * std::f64::consts::PI * t as f64 / 962.9).sin())
            .collect();
        let finding = check_libration(&series_from(phi), &config()).unwrap().unwrap();
        assert!((finding.center.deg() - 180.0).abs() < 1.0, "center {}", finding.center.deg());
        assert!(
            (59.0..=61.0).contains(&finding.amplitude_deg),
            "amplitude {}",
            finding.amplitude_deg
        );
    }

    #[test]
    fn escaping_resonance_is_rejected() {
        // Librates for the first half, circulates uniformly for the second:
        // the later windows fail the gap test.
        let n = 8192;
        let phi: Vec<f64> = (0..n)
            .map(|t| {
                if t < n / 2 {
                    180.0 + 40.0 * (t as f64 * 0.05).sin()
                } else {
                    wrap_raw(t as f64 * 17.77)
                }
            })
            .collect();
        let series = series_from(phi);
        assert_eq!(check_libration(&series, &config()).unwrap(), None);
    }

    #[test]
    fn short_series_collapse_to_one_window() {
        let cfg = config();
        // 64 samples across 4 windows would leave 16 < 32 per window.
        assert_eq!(effective_window_count(64, &cfg), 1);
        assert_eq!(effective_window_count(128, &cfg), 4);
        // Two-point series still classify (single window, low confidence).
        let series = series_from(vec![10.0, 20.0]);
        assert!(check_libration(&series, &cfg).unwrap().is_some());
    }

    #[test]
    fn degenerate_mean_surfaces_as_error() {
        // Two antipodal points confined per the gap test but with an
        // undefined mean direction.
        let series = series_from(vec![0.0, 180.0]);
        assert!(matches!(
            check_libration(&series, &config()),
            Err(LibrationError::DegenerateMean { .. })
        ));
    }

    #[test]
    fn fused_path_matches_composed_path() {
        let n = 512;
        let eph = flat_ephemeris(n);
        let cfg = config();
        let mut scratch = EvalScratch::default();
        // A spread of drift rates: confined, slow, fast, aliased.
        for (k, rate) in [(0usize, 0.0f64), (1, 0.11), (2, 0.9), (3, 17.3), (4, 119.9)] {
            let p = particle_with_lambda(n, |i| 40.0 + k as f64 + i as f64 * rate);
            for tuple in crate::tuplespace::subset_for_prefix(
                &crate::tuplespace::WavefrontPrefix::P { p: 3 },
            )
            .unwrap()
            {
                let composed =
                    check_libration(&resonance_angle_series(&p, &eph, &tuple).unwrap(), &cfg);
                let fused = evaluate_tuple(&p, &eph, &tuple, &cfg, &mut scratch);
                match (&composed, &fused) {
                    (Ok(a), Ok(b)) => assert_eq!(a, b, "tuple {tuple} rate {rate}"),
                    (Err(_), Err(_)) => {}
                    other => panic!("paths diverge for {tuple}: {other:?}"),
                }
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        // Windowed-gap verdicts are invariant under global rotation; the
        // center rotates along and the amplitude is unchanged.
        #[test]
        fn verdict_invariant_under_rotation(
            kind in 0usize..3,
            c in 0.0f64..360.0,
            seed in 0u64..500,
        ) {
            let n = 256;
            let phi: Vec<f64> = (0..n).map(|t| match kind {
                0 => 120.0 + 45.0 * ((t as f64 + seed as f64) * 0.21).sin(),
                1 => wrap_raw(t as f64 * (3.1 + seed as f64 * 0.01)),
                _ => wrap_raw(t as f64 * 0.071 * (1.0 + seed as f64 * 0.002)),
            }).collect();
            let cfg = config();
            let base = check_libration(&series_from(phi.clone()), &cfg);
            let rotated: Vec<f64> = phi.iter().map(|&x| wrap_raw(x + c)).collect();
            let rot = check_libration(&series_from(rotated), &cfg);
            match (base, rot) {
                (Ok(None), Ok(None)) => {}
                (Ok(Some(a)), Ok(Some(b))) => {
                    prop_assert!((a.amplitude_deg - b.amplitude_deg).abs() < 1e-9);
                    let delta = ang_diff_raw(b.center.deg(), wrap_raw(a.center.deg() + c)).abs();
                    prop_assert!(delta < 1e-9, "center delta {delta}");
                }
                // Rotation can move a borderline mean across the resultant
                // cutoff only for contrived inputs; none are generated here.
                other => prop_assert!(false, "verdict changed: {:?}", other),
            }
        }

        #[test]
        fn verdict_invariant_under_time_reversal(
            kind in 0usize..3,
            seed in 0u64..500,
        ) {
            let n = 256;
            let phi: Vec<f64> = (0..n).map(|t| match kind {
                0 => 200.0 + 30.0 * ((t as f64 + seed as f64) * 0.17).sin(),
                1 => wrap_raw(t as f64 * (2.9 + seed as f64 * 0.013)),
                _ => wrap_raw(seed as f64 + t as f64 * 0.09),
            }).collect();
            let cfg = config();
            let forward = check_libration(&series_from(phi.clone()), &cfg);
            let mut rev = phi;
            rev.reverse();
            let backward = check_libration(&series_from(rev), &cfg);
            match (forward, backward) {
                (Ok(a), Ok(b)) => prop_assert_eq!(a.is_some(), b.is_some()),
                (Err(_), Err(_)) => {}
                other => prop_assert!(false, "verdict changed: {:?}", other),
            }
        }

        #[test]
        fn amplitude_bounded_and_zero_only_for_constant(
            base in 0.0f64..360.0,
            amp in 0.01f64..170.0,
        ) {
            let n = 256;
            let phi: Vec<f64> = (0..n)
                .map(|t| wrap_raw(base + amp * ((t as f64) * 0.2).sin()))
                .collect();
            if let Ok(Some(f)) = check_libration(&series_from(phi), &config()) {
                prop_assert!(f.amplitude_deg <= 180.0);
                prop_assert!(f.amplitude_deg > 0.0);
            }
            let constant = vec![base; n];
            if let Ok(Some(f)) = check_libration(&series_from(constant), &config()) {
                // The circular mean of a constant series lands within
                // rounding of the constant, not bit-exactly on it.
                prop_assert!(f.amplitude_deg < 1e-9);
            }
        }

        // Raising the gap threshold can only flip librating -> circulating.
        #[test]
        fn threshold_monotonicity(
            kind in 0usize..3,
            seed in 0u64..500,
            low in 5.0f64..40.0,
            extra in 1.0f64..100.0,
        ) {
            let n = 256;
            let phi: Vec<f64> = (0..n).map(|t| match kind {
                0 => 90.0 + 55.0 * ((t as f64 + seed as f64) * 0.23).sin(),
                1 => wrap_raw(t as f64 * (1.7 + seed as f64 * 0.011)),
                _ => wrap_raw(seed as f64 * 0.7 + t as f64 * 1.31),
            }).collect();
            let mut lo_cfg = config();
            lo_cfg.gap_threshold_deg = low;
            let mut hi_cfg = config();
            hi_cfg.gap_threshold_deg = low + extra;
            let series = series_from(phi);
            let lo = check_libration(&series, &lo_cfg);
            let hi = check_libration(&series, &hi_cfg);
            if let (Ok(lo), Ok(hi)) = (lo, hi) {
                if hi.is_some() {
                    prop_assert!(lo.is_some(), "librating at high threshold but not low");
                }
            }
        }

        // The binned prefilter must agree exactly with the sorted gap test.
        #[test]
        fn gap_predicate_matches_exact_computation(
            xs in prop::collection::vec(0.0f64..360.0, 1..200),
            threshold in 0.5f64..359.5,
        ) {
            let fast = window_gap_at_least(&xs, threshold);
            let exact = max_circular_gap_raw(&xs).unwrap() >= threshold;
            prop_assert_eq!(fast, exact);
        }

        #[test]
        fn fused_equals_composed_on_random_drifts(
            rate in 0.0f64..80.0,
            wobble in 0.0f64..60.0,
            p_pick in 1i32..6,
            q_pick in 0u32..6,
        ) {
            let n = 256;
            let q = 1 + (q_pick as i32 % p_pick);
            if gcd_i32(p_pick, q) != 1 {
                return Ok(());
            }
            let d = p_pick - q;
            let tuple = ResonanceTuple::new(p_pick, q, d, 0, 0, 0).unwrap();
            let eph = flat_ephemeris(n);
            let part = particle_with_lambda(n, |i| {
                10.0 + i as f64 * rate + wobble * (i as f64 * 0.37).sin()
            });
            let cfg = config();
            let composed = check_libration(
                &resonance_angle_series(&part, &eph, &tuple).unwrap(),
                &cfg,
            );
            let mut scratch = EvalScratch::default();
            let fused = evaluate_tuple(&part, &eph, &tuple, &cfg, &mut scratch);
            match (composed, fused) {
                (Ok(a), Ok(b)) => prop_assert_eq!(a, b),
                (Err(_), Err(_)) => {}
                other => prop_assert!(false, "paths diverge: {:?}", other),
            }
        }
    }

    #[cfg(test)]
    fn gcd_i32(a: i32, b: i32) -> i32 {
        let (mut a, mut b) = (a, b);
        while b != 0 {
            let t = a % b;
            a = b;
            b = t;
        }
        a.abs()
    }
}
