//! Degree-based circular arithmetic and circular statistics.
//!
//! Everything downstream (resonance angles, the libration detector, the
//! synthetic generators) works in degrees on [0, 360); radians appear only
//! inside trig calls.

use thiserror::Error;

/// Mean resultant length at or below which the circular mean is undefined.
pub const MEAN_RESULTANT_CUTOFF: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CircularError {
    #[error("non-finite angle value {0}")]
    NonFinite(f64),
    #[error("empty angle list")]
    Empty,
    #[error("circular mean undefined: mean resultant length {0:e} at or below cutoff")]
    UndefinedMean(f64),
}

/// An angle in degrees, normalized to [0, 360) and guaranteed finite.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct AngleDeg(f64);

impl AngleDeg {
    /// Normalizes `deg` into [0, 360). Errors on non-finite input.
    pub fn new(deg: f64) -> Result<Self, CircularError> {
        wrap_deg(deg)
    }

    #[inline]
    pub fn deg(self) -> f64 {
        self.0
    }
}

/// Normalization core shared by every angle computation in the crate.
///
/// fmod is exact, so in-range results carry no rounding error; the final
/// guard keeps `r + 360.0` from rounding up to 360.0 for r just below zero.
#[inline]
pub(crate) fn wrap_raw(x: f64) -> f64 {
    if (0.0..360.0).contains(&x) {
        // `+ 0.0` canonicalizes -0.0 to +0.0.
        return x + 0.0;
    }
    let r = x % 360.0;
    let d = if r < 0.0 { r + 360.0 } else { r };
    if d >= 360.0 {
        0.0
    } else {
        d
    }
}

/// Wraps an arbitrary finite value into [0, 360).
pub fn wrap_deg(x: f64) -> Result<AngleDeg, CircularError> {
    if !x.is_finite() {
        return Err(CircularError::NonFinite(x));
    }
    Ok(AngleDeg(wrap_raw(x)))
}

/// Signed minimal difference a - b in (-180, 180]; ties at the half-turn
/// resolve to +180.
pub fn ang_diff(a: AngleDeg, b: AngleDeg) -> f64 {
    ang_diff_raw(a.0, b.0)
}

#[inline]
pub(crate) fn ang_diff_raw(a: f64, b: f64) -> f64 {
    let d = a - b;
    if d > 180.0 {
        d - 360.0
    } else if d <= -180.0 {
        d + 360.0
    } else {
        d
    }
}

/// Mean direction of the summed unit vectors.
pub fn circular_mean(angles: &[AngleDeg]) -> Result<AngleDeg, CircularError> {
    // AngleDeg is a plain f64 wrapper, so this copy is cheap relative to the
    // trig below; the raw routine is shared with the detector hot path.
    let raw: Vec<f64> = angles.iter().map(|a| a.0).collect();
    circular_mean_raw(&raw).map(AngleDeg)
}

pub(crate) fn circular_mean_raw(angles: &[f64]) -> Result<f64, CircularError> {
    if angles.is_empty() {
        return Err(CircularError::Empty);
    }
    let mut s = 0.0;
    let mut c = 0.0;
    for &x in angles {
        let r = x.to_radians();
        s += r.sin();
        c += r.cos();
    }
    let resultant = (s * s + c * c).sqrt() / angles.len() as f64;
    if resultant <= MEAN_RESULTANT_CUTOFF {
        return Err(CircularError::UndefinedMean(resultant));
    }
    Ok(wrap_raw(s.atan2(c).to_degrees()))
}

/// Largest arc of the circle containing none of the input angles.
/// A single element (or all-identical input) yields 360.
pub fn max_circular_gap(angles: &[AngleDeg]) -> Result<f64, CircularError> {
    let raw: Vec<f64> = angles.iter().map(|a| a.0).collect();
    max_circular_gap_raw(&raw)
}

pub(crate) fn max_circular_gap_raw(angles: &[f64]) -> Result<f64, CircularError> {
    if angles.is_empty() {
        return Err(CircularError::Empty);
    }
    if angles.len() == 1 {
        return Ok(360.0);
    }
    let mut sorted = angles.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let mut best = sorted[0] + 360.0 - sorted[sorted.len() - 1];
    for w in sorted.windows(2) {
        let gap = w[1] - w[0];
        if gap > best {
            best = gap;
        }
    }
    Ok(best)
}
