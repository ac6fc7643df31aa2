//! Density-matrix spectra and their normalized entropies.
//!
//! A density matrix enters this crate only through its eigenvalue vector;
//! both entropies used in the information diagram depend on nothing else.
//! The two measures are normalized so that every spectrum of dimension `d`
//! lands in the unit square:
//!
//! * linear entropy `L = d/(d-1) * (1 - sum(lambda_i^2))`
//! * von Neumann entropy `S = -sum(lambda_i log_d lambda_i)`
//!
//! Random spectra for diagram sampling are drawn as normalized chi-square
//! variates from a caller-supplied seeded generator, so sampling is
//! reproducible and parallel callers can use independent streams.

use crate::{Error, Result};
use rand::Rng;
use rand_distr::{ChiSquared, Distribution};

/// Negative eigenvalues above this magnitude are rejected; smaller ones
/// are rounding debris from upstream diagonalization and clamp to zero.
const CLAMP_WINDOW: f64 = 1e-12;

/// Allowed deviation of the eigenvalue sum from unit trace.
const SUM_TOL: f64 = 1e-10;

/// Default threshold for [`numerical_rank`] on analytically constructed
/// spectra (relative to trace 1).
pub const DEFAULT_RANK_THRESHOLD: f64 = 1e-8;

/// Eigenvalue vector of a density matrix, stored sorted descending.
///
/// The descending order is canonical: entropy values do not depend on it,
/// but spectrum comparisons and CSV output do.
#[derive(Debug, Clone, PartialEq)]
pub struct DensitySpectrum {
    values: Vec<f64>,
}

impl DensitySpectrum {
    /// Validate eigenvalues (nonnegative after clamping, unit sum) and
    /// store them in descending order.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidSpectrum("no eigenvalues given".into()));
        }
        let mut clamped = values;
        for v in &mut clamped {
            if !v.is_finite() {
                return Err(Error::InvalidSpectrum(format!("non-finite eigenvalue {v}")));
            }
            if *v < 0.0 {
                if *v < -CLAMP_WINDOW {
                    return Err(Error::InvalidSpectrum(format!(
                        "negative eigenvalue {v} below the clamp window"
                    )));
                }
                *v = 0.0;
            }
        }
        let sum: f64 = clamped.iter().sum();
        if (sum - 1.0).abs() > SUM_TOL {
            return Err(Error::InvalidSpectrum(format!(
                "eigenvalues sum to {sum}, not 1"
            )));
        }
        clamped.sort_by(|a, b| b.total_cmp(a));
        Ok(Self { values: clamped })
    }

    /// Hilbert-space dimension `d` (the number of eigenvalues).
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Eigenvalues in descending order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

fn require_mixed_dim(s: &DensitySpectrum) -> Result<f64> {
    let d = s.dim();
    if d < 2 {
        return Err(Error::InvalidArgument(
            "entropies are normalized by d-1 and need dimension at least 2".into(),
        ));
    }
    Ok(d as f64)
}

/// Normalized linear entropy `d/(d-1) * (1 - sum(lambda^2))`.
///
/// Zero exactly for pure spectra, one for the maximally mixed spectrum.
pub fn linear_entropy(s: &DensitySpectrum) -> Result<f64> {
    let d = require_mixed_dim(s)?;
    let purity: f64 = s.values.iter().map(|v| v * v).sum();
    let l = d / (d - 1.0) * (1.0 - purity);
    // Pure spectra must yield +0.0, never the -0.0 a rounding-level
    // cancellation can leave behind.
    Ok(if l == 0.0 { 0.0 } else { l })
}

/// Normalized von Neumann entropy `-sum(lambda log_d lambda)`, with the
/// convention `0 log 0 = 0`.
pub fn von_neumann_entropy(s: &DensitySpectrum) -> Result<f64> {
    let d = require_mixed_dim(s)?;
    let nats: f64 = s
        .values
        .iter()
        .filter(|&&v| v > 0.0)
        .map(|&v| -v * v.ln())
        .sum();
    let s = nats / d.ln();
    // Pure spectra must yield +0.0: the lone `-1 * ln(1)` term is -0.0.
    Ok(if s == 0.0 { 0.0 } else { s })
}

/// Number of eigenvalues strictly greater than `threshold`.
///
/// A spectrum whose every eigenvalue falls at or below the threshold is
/// rejected: unit trace makes that incompatible with any sensible cutoff.
pub fn numerical_rank(s: &DensitySpectrum, threshold: f64) -> Result<usize> {
    if threshold.is_nan() || threshold < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "rank threshold must be nonnegative, got {threshold}"
        )));
    }
    let rank = s.values.iter().filter(|&&v| v > threshold).count();
    if rank == 0 {
        return Err(Error::InvalidArgument(format!(
            "threshold {threshold} swallows the whole unit-trace spectrum"
        )));
    }
    Ok(rank)
}

/// Draw a random spectrum: `d` independent chi-square(dof) variates
/// normalized to unit sum.
///
/// Deterministic for a fixed generator state. The probability-zero event
/// of an all-zero draw triggers a redraw.
pub fn sample_random_spectrum(d: usize, dof: u32, rng: &mut impl Rng) -> Result<DensitySpectrum> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!(
            "sampling needs dimension at least 2, got {d}"
        )));
    }
    if dof == 0 {
        return Err(Error::InvalidArgument(
            "chi-square degrees of freedom must be positive".into(),
        ));
    }
    let chi = ChiSquared::new(f64::from(dof))
        .map_err(|e| Error::InvalidArgument(format!("chi-square setup failed: {e}")))?;
    loop {
        let draws: Vec<f64> = (0..d).map(|_| chi.sample(rng)).collect();
        let total: f64 = draws.iter().sum();
        if total > 0.0 {
            return DensitySpectrum::new(draws.iter().map(|v| v / total).collect());
        }
    }
}

/// A point of the information diagram: both entropies of one spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InfoPoint {
    /// Normalized linear entropy, in `[0, 1]`.
    pub linear: f64,
    /// Normalized von Neumann entropy, in `[0, 1]`.
    pub von_neumann: f64,
}

impl InfoPoint {
    /// Validate both coordinates, clamping rounding spills within 1e-12
    /// of the unit interval back onto it.
    pub fn new(linear: f64, von_neumann: f64) -> Result<Self> {
        let clamp = |v: f64, name: &str| -> Result<f64> {
            if !v.is_finite() || !(-1e-12..=1.0 + 1e-12).contains(&v) {
                return Err(Error::InvalidArgument(format!(
                    "{name} entropy {v} outside [0, 1]"
                )));
            }
            Ok(v.clamp(0.0, 1.0))
        };
        Ok(Self {
            linear: clamp(linear, "linear")?,
            von_neumann: clamp(von_neumann, "von Neumann")?,
        })
    }
}

/// Both entropies of a spectrum as an [`InfoPoint`].
pub fn info_point(s: &DensitySpectrum) -> Result<InfoPoint> {
    InfoPoint::new(linear_entropy(s)?, von_neumann_entropy(s)?)
}
