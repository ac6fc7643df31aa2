//! Information diagrams and parity-adapted cat states for collective
//! multilevel (quDit) systems.
//!
//! A density matrix on a d-dimensional space can be summarized by two
//! numbers: its normalized linear entropy `L` and its normalized von
//! Neumann entropy `S`. Plotting one against the other maps every state
//! into a lens-shaped region bounded by closed-form extremal spectra.
//! This crate computes those boundaries, places arbitrary spectra inside
//! the region, and applies the machinery to a concrete many-body problem:
//! symmetric N-particle quDit states, their one- and two-body reduced
//! density matrices, and the rank jumps those matrices display across the
//! quantum phase transitions of a three-level Lipkin-Meshkov-Glick model.
//!
//! # Modules
//!
//! | module | contents |
//! |---|---|
//! | [`linalg`] | Hermitian eigensolver wrapper, signed log-domain power ratios |
//! | [`spectra`] | density-matrix spectra, entropies, numerical rank, random sampling |
//! | [`infodiag`] | boundary families of the (L, S) region, asymptotics, rank certificates |
//! | [`fock`] | symmetric Fock basis, collective spin operators, coherent and cat states |
//! | [`rdm`] | one- and two-body reduced density matrices, closed-form cat spectra |
//! | [`lmg`] | three-level LMG Hamiltonian, variational surface, rank-jump scans |
//! | [`cli`] | subcommand front end emitting reproducible CSV files |
//!
//! # Examples directory
//!
//! Each major capability has a runnable example:
//!
//! ```text
//! examples/
//! ├── boundary_curves.rs    extremal families and asymptotics of the diagram
//! ├── random_diagram.rs     random spectra scattered inside the region
//! ├── coherent_cats.rs      coherent states, parity cats, exact zero structure
//! ├── cat_entanglement.rs   closed-form cat RDM spectra vs brute-force RDMs
//! ├── lmg_phases.rs         variational energy surface and phase diagram
//! └── lmg_qpt.rs            rank-jump detection of both phase transitions
//! ```
//!
//! Run one with `cargo run --release --example lmg_qpt`.
//!
//! # Command line
//!
//! The thin `catdiag` binary exposes the same machinery as subcommands
//! (`boundary`, `sample`, `cat-surface`, `lmg sweep|qpt|energy`,
//! `selfcheck`), each writing a CSV whose first line records the resolved
//! configuration so every file is reproducible from its own header.
//!
//! # Conventions
//!
//! * Spectra are stored in descending order; eigensolver output is ascending.
//! * Entropies are normalized to `[0, 1]`: linear entropy carries the factor
//!   `d/(d-1)`, von Neumann entropy uses base-`d` logarithms.
//! * Levels and parity indices are 1-based to match the physics convention;
//!   parity strings omit the first mode, which is the phase reference.
//! * All randomness flows through caller-supplied seeded generators.

#![forbid(unsafe_code)]

use thiserror::Error;

pub mod cli;
pub mod fock;
pub mod infodiag;
pub mod linalg;
pub mod lmg;
pub mod rdm;
pub mod spectra;

/// Complex double-precision scalar used throughout.
pub type C64 = num_complex::Complex64;

/// Crate-wide error type.
///
/// Variants carry enough context to diagnose a failure without a
/// backtrace: offending dimensions, indices, or values are embedded in
/// the message.
#[derive(Debug, Error)]
pub enum Error {
    /// A matrix that must be square is not.
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    /// A matrix failed the Hermitian symmetry check.
    #[error("matrix is not Hermitian: |A - A^dag| reaches {deviation:.3e} at ({row}, {col})")]
    NotHermitian {
        row: usize,
        col: usize,
        deviation: f64,
    },

    /// Two operands have incompatible dimensions.
    #[error("dimension mismatch: {left} vs {right} in {context}")]
    DimensionMismatch {
        left: usize,
        right: usize,
        context: &'static str,
    },

    /// The iterative eigensolver did not converge.
    #[error("eigensolver failed to converge for a {dim}x{dim} matrix")]
    EigenFailed { dim: usize },

    /// An argument fell outside its documented domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A would-be spectrum has negative entries, a bad sum, or is empty.
    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),

    /// A state vector is not normalized or is otherwise malformed.
    #[error("invalid state: {0}")]
    InvalidState(String),

    /// The requested basis would exceed the enumeration cap.
    #[error("basis too large: {size} states for D={d}, N={n} exceeds cap {cap}")]
    BasisTooLarge {
        d: usize,
        n: u32,
        size: u128,
        cap: usize,
    },

    /// A parity projection annihilated the state (norm numerically zero).
    #[error("parity projection annihilated the state: squared norm {norm_sq:.3e}")]
    ProjectionAnnihilated { norm_sq: f64 },

    /// An I/O failure while writing output.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Tolerance for Hermitian symmetry checks on constructed matrices.
pub(crate) const HERM_TOL: f64 = 1e-12;

/// Tolerance for eigen-residual validation `|Av - lambda v|`.
pub(crate) const RESIDUAL_TOL: f64 = 1e-9;
