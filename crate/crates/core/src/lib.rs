//! Topological obstructions for almost commuting matrices.
//!
//! The crate computes the Bott index and the Pfaffian-Bott index of nearly
//! commuting Hermitian or unitary tuples, builds structured canonical forms
//! and witnesses for the associated `K₂` classes, and measures Wannier
//! spreads of band-projected position matrices.
//!
//! ```
//! use bott_core::{invariants, models};
//!
//! let (a, b) = models::voiculescu(16);
//! let report = invariants::bott_index_unitaries(
//!     &a,
//!     &b,
//!     &invariants::CircleFunctions::default(),
//!     1e-6,
//! )
//! .unwrap();
//! assert_eq!(report.value, 1);
//! ```

pub mod canonical;
pub mod error;
pub mod invariants;
pub mod io;
pub mod matkernel;
pub mod models;
pub mod random;
pub mod relations;
pub mod symmetry;
pub mod wannier;

pub use error::{Error, Result};
pub use matkernel::{ComplexMatrix, C64};
pub use symmetry::SymmetryClass;

/// Wall-clock seconds since `start`; zero where no clock is available.
#[cfg(not(target_arch = "wasm32"))]
pub(crate) fn elapsed_since(start: Stopwatch) -> f64 {
    start.0.elapsed().as_secs_f64()
}

#[cfg(target_arch = "wasm32")]
pub(crate) fn elapsed_since(_start: Stopwatch) -> f64 {
    0.0
}

#[derive(Clone, Copy)]
pub(crate) struct Stopwatch(#[cfg(not(target_arch = "wasm32"))] std::time::Instant);

impl Stopwatch {
    #[cfg(not(target_arch = "wasm32"))]
    pub(crate) fn start() -> Self {
        Stopwatch(std::time::Instant::now())
    }

    #[cfg(target_arch = "wasm32")]
    pub(crate) fn start() -> Self {
        Stopwatch()
    }
}
