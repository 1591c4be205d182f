//! Inverse design of 1-bit reconfigurable coding metasurfaces.
//!
//! A reconfigurable meta-atom is split into a static, lossless pixel
//! structure and a two-state lumped switch. The static part is described by
//! its switch-port reflection `S22`, which is all that is needed to predict
//! both coding states. The crate is organised along that pipeline:
//!
//! - [`netcalc`]: two-port decoupling algebra and the ideal-coding target.
//! - [`pattern`]: 8×8 genomes mirrored into 16×16 pixel grids.
//! - [`oracle`]: deterministic lossless circuit model used as ground truth.
//! - [`dataset`]: seeded dataset generation and the binary record format.
//! - [`surrogate`]: MLP forward model trained with Adam on MAE.
//! - [`inverse`]: target construction, genetic search and design validation.
//! - [`arraysim`]: 1-bit reflectarray phase compensation and far-field patterns.
//! - [`cli`]: the `metacode` command-line front end.

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod arraysim;
pub mod cli;
pub mod config;
pub mod dataset;
mod error;
pub mod inverse;
pub mod manifest;
pub mod netcalc;
pub mod oracle;
pub mod pattern;
pub mod surrogate;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Runs `f` on a dedicated rayon pool with `jobs` workers, or on the global
/// pool when `jobs` is `None`. Every parallel reduction in the crate merges in
/// index order, so results do not depend on the worker count.
pub fn with_jobs<R: Send>(jobs: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R> {
    match jobs {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}
