//! Enumeration of the sparse (p,q,m,n,r,s) search space.
//!
//! The serial iteration order is: p ascending 1..=pmax, q descending p..=1
//! with non-reduced ratios skipped, then m descending from p-q, n descending
//! from p-q-m, r descending from p-q-m-n, and s = p-q-m-n-r determined.
//! Wavefronts are the completions of a fixed prefix of that tuple, emitted
//! in the same order, so concatenating wavefronts reproduces the serial
//! sequence exactly.

use thiserror::Error;

use crate::domain::ResonanceTuple;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TupleSpaceError {
    #[error("ratio ({p},{q}) out of range: need p >= 1 and 1 <= q <= p")]
    RatioOutOfRange { p: i32, q: i32 },
    #[error("invalid wavefront prefix {0:?}")]
    BadPrefix(WavefrontPrefix),
    #[error("tuple {0} is outside the deduplicated space (gcd(p,q) > 1)")]
    NotReduced(ResonanceTuple),
    #[error("tuple {tuple} has p > pmax {pmax}")]
    BeyondPmax { tuple: ResonanceTuple, pmax: u32 },
    #[error("invalid tuple: {0}")]
    BadTuple(String),
}

fn gcd(mut a: i64, mut b: i64) -> i64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a.abs()
}

/// True iff the ratio p:q is in reduced form. Under the serial iteration
/// order this is equivalent to first-occurrence dedup of equal ratios,
/// since the reduced form of any ratio is visited at a smaller p.
pub fn is_unique_ratio(p: i32, q: i32) -> Result<bool, TupleSpaceError> {
    if p < 1 || q < 1 || q > p {
        return Err(TupleSpaceError::RatioOutOfRange { p, q });
    }
    Ok(gcd(p as i64, q as i64) == 1)
}

/// All surviving (p,q) pairs in serial order: p ascending, q descending.
pub fn enumerate_ratios(pmax: u32) -> Vec<(i32, i32)> {
    let pmax = pmax as i32;
    let mut out = Vec::new();
    for p in 1..=pmax {
        for q in (1..=p).rev() {
            if gcd(p as i64, q as i64) == 1 {
                out.push((p, q));
            }
        }
    }
    out
}

/// The first `depth` components of a tuple, held constant over a wavefront.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WavefrontPrefix {
    P { p: i32 },
    Pq { p: i32, q: i32 },
    Pqm { p: i32, q: i32, m: i32 },
    Pqmn { p: i32, q: i32, m: i32, n: i32 },
    Pqmnr { p: i32, q: i32, m: i32, n: i32, r: i32 },
}

impl WavefrontPrefix {
    pub fn depth(&self) -> usize {
        match self {
            WavefrontPrefix::P { .. } => 1,
            WavefrontPrefix::Pq { .. } => 2,
            WavefrontPrefix::Pqm { .. } => 3,
            WavefrontPrefix::Pqmn { .. } => 4,
            WavefrontPrefix::Pqmnr { .. } => 5,
        }
    }

    /// Component view as (p, q, m, n, r) with trailing components absent.
    fn parts(&self) -> (i32, Option<i32>, Option<i32>, Option<i32>, Option<i32>) {
        match *self {
            WavefrontPrefix::P { p } => (p, None, None, None, None),
            WavefrontPrefix::Pq { p, q } => (p, Some(q), None, None, None),
            WavefrontPrefix::Pqm { p, q, m } => (p, Some(q), Some(m), None, None),
            WavefrontPrefix::Pqmn { p, q, m, n } => (p, Some(q), Some(m), Some(n), None),
            WavefrontPrefix::Pqmnr { p, q, m, n, r } => (p, Some(q), Some(m), Some(n), Some(r)),
        }
    }

    pub fn validate(&self) -> Result<(), TupleSpaceError> {
        let (p, q, m, n, r) = self.parts();
        let bad = || TupleSpaceError::BadPrefix(*self);
        if p < 1 {
            return Err(bad());
        }
        let Some(q) = q else { return Ok(()) };
        if q < 1 || q > p {
            return Err(bad());
        }
        let d = p - q;
        let Some(m) = m else { return Ok(()) };
        if m < 0 || m > d {
            return Err(bad());
        }
        let Some(n) = n else { return Ok(()) };
        if n < 0 || n > d - m {
            return Err(bad());
        }
        let Some(r) = r else { return Ok(()) };
        if r < 0 || r > d - m - n {
            return Err(bad());
        }
        Ok(())
    }
}

/// Appends every (m,n,r,s) completion of (p,q) in serial order, with the
/// given components optionally pinned.
fn push_completions(
    out: &mut Vec<ResonanceTuple>,
    p: i32,
    q: i32,
    fixed_m: Option<i32>,
    fixed_n: Option<i32>,
    fixed_r: Option<i32>,
) {
    let d = p - q;
    let m_range = match fixed_m {
        Some(m) => m..=m,
        None => 0..=d,
    };
    for m in m_range.rev() {
        let n_range = match fixed_n {
            Some(n) => n..=n,
            None => 0..=(d - m),
        };
        for n in n_range.rev() {
            let r_range = match fixed_r {
                Some(r) => r..=r,
                None => 0..=(d - m - n),
            };
            for r in r_range.rev() {
                let s = d - m - n - r;
                out.push(ResonanceTuple { p, q, m, n, r, s });
            }
        }
    }
}

/// Materializes the wavefront for a prefix: all completions, in the exact
/// serial order. Depth-1 prefixes fold the unique-ratio filter over q;
/// deeper prefixes enumerate completions of whatever (p,q) they carry.
pub fn subset_for_prefix(prefix: &WavefrontPrefix) -> Result<Vec<ResonanceTuple>, TupleSpaceError> {
    prefix.validate()?;
    let (p, q, m, n, r) = prefix.parts();
    let mut out = Vec::new();
    match q {
        None => {
            for q in (1..=p).rev() {
                if gcd(p as i64, q as i64) == 1 {
                    push_completions(&mut out, p, q, None, None, None);
                }
            }
        }
        Some(q) => push_completions(&mut out, p, q, m, n, r),
    }
    Ok(out)
}

/// n choose k in u64 (exact for the ranges used here).
fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as u64
}

/// Number of non-negative integer solutions of x1+...+xk = d.
fn simplex_count(d: i32, k: u32) -> u64 {
    debug_assert!(d >= 0);
    binomial(d as u64 + k as u64 - 1, k as u64 - 1)
}

/// Closed-form size of `subset_for_prefix(prefix)`.
pub fn subset_size(prefix: &WavefrontPrefix) -> Result<u64, TupleSpaceError> {
    prefix.validate()?;
    let (p, q, m, n, r) = prefix.parts();
    Ok(match (q, m, n, r) {
        (None, ..) => {
            let mut total = 0;
            for q in 1..=p {
                if gcd(p as i64, q as i64) == 1 {
                    total += simplex_count(p - q, 4);
                }
            }
            total
        }
        (Some(q), None, ..) => simplex_count(p - q, 4),
        (Some(q), Some(m), None, ..) => simplex_count(p - q - m, 3),
        (Some(q), Some(m), Some(n), None) => simplex_count(p - q - m - n, 2),
        (Some(_), Some(_), Some(_), Some(_)) => 1,
    })
}

/// Size of the whole search space up to pmax, with or without the
/// unique-ratio dedup.
pub fn total_space_size(pmax: u32, deduped: bool) -> u64 {
    let pmax = pmax as i32;
    let mut total = 0;
    for p in 1..=pmax {
        for q in 1..=p {
            if !deduped || gcd(p as i64, q as i64) == 1 {
                total += simplex_count(p - q, 4);
            }
        }
    }
    total
}

/// Every prefix of the given depth, in serial order, ratio-filtered for
/// depth >= 2. Concatenating `subset_for_prefix` over this sequence yields
/// the deduplicated serial iteration sequence at any depth.
pub fn prefixes(pmax: u32, depth: usize) -> Vec<WavefrontPrefix> {
    assert!((1..=5).contains(&depth), "prefix depth must be in 1..=5");
    let pmax = pmax as i32;
    let mut out = Vec::new();
    for p in 1..=pmax {
        if depth == 1 {
            out.push(WavefrontPrefix::P { p });
            continue;
        }
        for q in (1..=p).rev() {
            if gcd(p as i64, q as i64) != 1 {
                continue;
            }
            if depth == 2 {
                out.push(WavefrontPrefix::Pq { p, q });
                continue;
            }
            let d = p - q;
            for m in (0..=d).rev() {
                if depth == 3 {
                    out.push(WavefrontPrefix::Pqm { p, q, m });
                    continue;
                }
                for n in (0..=(d - m)).rev() {
                    if depth == 4 {
                        out.push(WavefrontPrefix::Pqmn { p, q, m, n });
                        continue;
                    }
                    for r in (0..=(d - m - n)).rev() {
                        out.push(WavefrontPrefix::Pqmnr { p, q, m, n, r });
                    }
                }
            }
        }
    }
    out
}

/// Zero-based position of a tuple in the deduplicated serial iteration
/// order. Errors for tuples the dedup filter skips.
pub fn iteration_rank(tuple: &ResonanceTuple, pmax: u32) -> Result<u64, TupleSpaceError> {
    tuple
        .validate()
        .map_err(|e| TupleSpaceError::BadTuple(e.to_string()))?;
    if tuple.p > pmax as i32 {
        return Err(TupleSpaceError::BeyondPmax {
            tuple: *tuple,
            pmax,
        });
    }
    if gcd(tuple.p as i64, tuple.q as i64) != 1 {
        return Err(TupleSpaceError::NotReduced(*tuple));
    }

    let mut rank = 0u64;
    // Blocks of every earlier (p', q').
    for p in 1..tuple.p {
        for q in 1..=p {
            if gcd(p as i64, q as i64) == 1 {
                rank += simplex_count(p - q, 4);
            }
        }
    }
    for q in (tuple.q + 1)..=tuple.p {
        if gcd(tuple.p as i64, q as i64) == 1 {
            rank += simplex_count(tuple.p - q, 4);
        }
    }
    // Offset inside the (p,q) block: tuples with larger m come first, then
    // larger n, then larger r.
    let d = tuple.p - tuple.q;
    rank += simplex_count_prefix_sum(d - tuple.m, 3); // all m' > m
    rank += simplex_count_prefix_sum(d - tuple.m - tuple.n, 2); // all n' > n at this m
    rank += tuple.s as u64; // all r' > r at this (m, n)
    Ok(rank)
}

/// Sum of simplex_count(e, k) for e in 0..d, i.e. the tuples consumed by
/// the outer-loop values that precede the current one.
fn simplex_count_prefix_sum(d: i32, k: u32) -> u64 {
    // Hockey-stick identity: sum_{e=0}^{d-1} C(e+k-1, k-1) = C(d+k-1, k).
    if d <= 0 {
        return 0;
    }
    binomial((d + k as i32 - 1) as u64, k as u64)
}
