//! Numerical toolkit for frequency-space decompositions on sampled grids:
//! certified coverings of frequency space, smooth partitions of unity,
//! FFT-multiplier decomposition norms, a brushlet frame with its
//! analysis/synthesis pair, and the scale-embedding experiment harness.

pub mod bapu;
pub mod brushlet;
pub mod covering;
pub mod error;
pub mod experiments;
pub mod indices;
pub mod signal;

pub use error::{Error, Result};

/// Cap the global thread pool (reads by the CLI from ALPHAMOD_THREADS).
/// Call before any parallel work; later calls are ignored.
pub fn configure_threads(n: usize) {
    if n > 0 {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}
