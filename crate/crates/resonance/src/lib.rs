//! Resonance classification of orbital time series.
//!
//! Given a particle's orbital-element history and the perturbing planet's
//! ephemeris on the same epochs, this crate searches the sparse
//! (p,q,m,n,r,s) resonance-angle space for a librating angle. The search
//! runs serially, particle-parallel, or as wavefronts of tuples sharing a
//! common prefix evaluated in parallel — all three contractually return the
//! result the serial nested loops would find first. A seeded synthetic
//! generator produces labeled corpora in the three workload categories
//! (instantly rejectable, resonant, and full-search non-resonant).

pub mod circular;
pub mod domain;
pub mod executor;
pub mod libration;
pub mod synth;
pub mod tuplespace;

pub use circular::{ang_diff, circular_mean, max_circular_gap, wrap_deg, AngleDeg};
pub use domain::{
    Classification, ParticleRecord, PlanetEphemeris, ResonanceFinding, ResonanceTuple,
    SearchConfig,
};
pub use executor::{run_corpus, ExecutionMode, RunRow};
pub use libration::{check_libration, is_consistent, resonance_angle_series};
pub use synth::{gen_corpus, CorpusSpec};
