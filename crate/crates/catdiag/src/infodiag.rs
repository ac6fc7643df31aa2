//! Geometry of the information diagram.
//!
//! For each dimension `d` the achievable (L, S) pairs fill a lens-shaped
//! region. Its boundary is traced by two one-parameter spectrum families:
//!
//! * upper boundary: a pure component mixed into the maximally mixed
//!   state, spectrum `((1+(d-1)e)/d, (1-e)/d, ..., (1-e)/d)` for
//!   `e in [0, 1)`;
//! * lower boundary: piecewise in `k`, spectrum `((1-e)/k x k, e, 0, ...)`
//!   for `e in (0, 1/(1+k)]`.
//!
//! Extending the lower-family parameter to `e in (1/(1+k), 1]` retraces
//! inner curves that partition the region into minimal-rank subregions:
//! the extended curve with parameter `k` is exactly the image of the
//! `(k+1)`-dimensional upper boundary, so every spectrum of rank `r`
//! lands on or below the inner curve of index `r - 1`.
//!
//! Near the pure corner and near the maximally mixed corner the boundary
//! admits simple asymptotic forms, exposed in [`asymptotic_s_of_l`].

use crate::spectra::{DensitySpectrum, InfoPoint};
use crate::{Error, Result};

/// Bisection tolerance in the family parameter `e` when inverting a
/// boundary curve for a given L.
const EPS_BISECTION_TOL: f64 = 1e-12;

/// Slack used for on-curve and containment decisions.
const REGION_TOL: f64 = 1e-9;

/// Which extremal family a curve point belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyKind {
    /// Upper boundary: pure component mixed into the maximally mixed state.
    MaxBoundary,
    /// Lower boundary branch `k`: `k` equal eigenvalues plus one odd one.
    MinBoundary,
    /// Lower-family spectra continued past the branch apex; these trace
    /// the rank-subregion separators inside the diagram.
    InnerRankCurve,
}

/// A validated (kind, d, k) triple with its parameter range.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExtremalFamily {
    kind: FamilyKind,
    d: usize,
    k: usize,
}

impl ExtremalFamily {
    /// Upper-boundary family for dimension `d`; parameter `e in [0, 1)`.
    pub fn max_boundary(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidArgument(format!(
                "diagram families need d >= 2, got {d}"
            )));
        }
        Ok(Self {
            kind: FamilyKind::MaxBoundary,
            d,
            k: 1,
        })
    }

    /// Lower-boundary branch `k in [1, d-1]`; parameter `e in (0, 1/(1+k)]`.
    pub fn min_boundary(d: usize, k: usize) -> Result<Self> {
        Self::lower(FamilyKind::MinBoundary, d, k)
    }

    /// Inner rank curve `k in [1, d-1]`; parameter `e in (1/(1+k), 1]`.
    pub fn inner_rank_curve(d: usize, k: usize) -> Result<Self> {
        Self::lower(FamilyKind::InnerRankCurve, d, k)
    }

    fn lower(kind: FamilyKind, d: usize, k: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidArgument(format!(
                "diagram families need d >= 2, got {d}"
            )));
        }
        if k < 1 || k > d - 1 {
            return Err(Error::InvalidArgument(format!(
                "branch index k={k} outside [1, {}]",
                d - 1
            )));
        }
        Ok(Self { kind, d, k })
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Branch index; meaningless for the MaxBoundary family.
    pub fn k(&self) -> usize {
        self.k
    }

    /// Parameter interval as (lo, hi, lo_closed, hi_closed).
    pub fn eps_range(&self) -> (f64, f64, bool, bool) {
        let kp1 = (self.k + 1) as f64;
        match self.kind {
            FamilyKind::MaxBoundary => (0.0, 1.0, true, false),
            FamilyKind::MinBoundary => (0.0, 1.0 / kp1, false, true),
            FamilyKind::InnerRankCurve => (1.0 / kp1, 1.0, false, true),
        }
    }

    fn validate_eps(&self, eps: f64) -> Result<()> {
        let (lo, hi, lo_closed, hi_closed) = self.eps_range();
        let lo_ok = if lo_closed { eps >= lo } else { eps > lo };
        let hi_ok = if hi_closed { eps <= hi } else { eps < hi };
        if !eps.is_finite() || !lo_ok || !hi_ok {
            return Err(Error::InvalidArgument(format!(
                "parameter {eps} outside {}{lo}, {hi}{} for {:?}",
                if lo_closed { '[' } else { '(' },
                if hi_closed { ']' } else { ')' },
                self.kind
            )));
        }
        Ok(())
    }

    /// `count` parameter values spread uniformly over the range, stepping
    /// half-open intervals so excluded endpoints are never emitted: an
    /// open low end starts one step in, an open high end stops one step
    /// short.
    pub fn eps_samples(&self, count: usize) -> Vec<f64> {
        let (lo, hi, lo_closed, hi_closed) = self.eps_range();
        let n = count.max(2) as f64;
        (0..count.max(2))
            .map(|i| {
                let t = match (lo_closed, hi_closed) {
                    (true, true) => i as f64 / (n - 1.0),
                    (true, false) => i as f64 / n,
                    (false, true) => (i as f64 + 1.0) / n,
                    (false, false) => (i as f64 + 0.5) / n,
                };
                lo + (hi - lo) * t
            })
            .collect()
    }
}

/// The spectrum of a family member at parameter `eps`.
pub fn extremal_spectrum(f: &ExtremalFamily, eps: f64) -> Result<DensitySpectrum> {
    f.validate_eps(eps)?;
    let d = f.d;
    let values = match f.kind {
        FamilyKind::MaxBoundary => {
            let df = d as f64;
            let mut v = vec![(1.0 - eps) / df; d];
            v[0] = (1.0 + (df - 1.0) * eps) / df;
            v
        }
        FamilyKind::MinBoundary | FamilyKind::InnerRankCurve => {
            let mut v = vec![0.0; d];
            for entry in v.iter_mut().take(f.k) {
                *entry = (1.0 - eps) / f.k as f64;
            }
            v[f.k] = eps;
            v
        }
    };
    DensitySpectrum::new(values)
}

/// Closed-form (L, S) of a family member at parameter `eps`.
///
/// Matches the entropies of [`extremal_spectrum`] within 1e-12; the two
/// routes are independent (closed form vs generic entropy evaluation).
pub fn boundary_entropies(f: &ExtremalFamily, eps: f64) -> Result<InfoPoint> {
    f.validate_eps(eps)?;
    let d = f.d as f64;
    let ln_d = d.ln();
    let (l, s) = match f.kind {
        FamilyKind::MaxBoundary => {
            let big = (1.0 + (d - 1.0) * eps) / d;
            let small = (1.0 - eps) / d;
            let l = 1.0 - eps * eps;
            let mut nats = -big * big.ln();
            if small > 0.0 {
                nats -= (d - 1.0) * small * small.ln();
            }
            (l, nats / ln_d)
        }
        FamilyKind::MinBoundary | FamilyKind::InnerRankCurve => {
            let k = f.k as f64;
            let l = d / (d - 1.0) * (1.0 - eps * eps - (1.0 - eps) * (1.0 - eps) / k);
            let mut nats = 0.0;
            if eps < 1.0 {
                nats -= (1.0 - eps) * ((1.0 - eps) / k).ln();
            }
            if eps > 0.0 {
                nats -= eps * eps.ln();
            }
            (l, nats / ln_d)
        }
    };
    InfoPoint::new(l, s)
}

/// Which corner of the diagram an asymptotic expansion targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AsymptoticRegime {
    /// Upper boundary near the pure corner (small L).
    PureMax,
    /// Lower boundary's first branch near the pure corner (small L).
    PureMin1,
    /// Upper boundary near the maximally mixed corner (L near 1).
    MixedCorner,
}

/// Asymptotic boundary entropy S as a function of L.
///
/// All interior logarithms are natural; the leading normalization carries
/// the `log d` that converts to base-`d` entropy. `MixedCorner` evaluates
/// to exactly 1 at `L = 1`.
pub fn asymptotic_s_of_l(d: usize, regime: AsymptoticRegime, l: f64) -> Result<f64> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!(
            "asymptotics need d >= 2, got {d}"
        )));
    }
    if !l.is_finite() || l <= 0.0 || l > 1.0 {
        return Err(Error::InvalidArgument(format!(
            "asymptotic curves are defined for L in (0, 1], got {l}"
        )));
    }
    let df = d as f64;
    let ln_d = df.ln();
    let value = match regime {
        AsymptoticRegime::PureMax => {
            (df - 1.0) / (2.0 * df * ln_d) * ((1.0 + (2.0 * df).ln()) * l - l * l.ln())
        }
        AsymptoticRegime::PureMin1 => {
            (df - 1.0) / (2.0 * df * ln_d)
                * ((1.0 + (2.0 * df).ln() - (df - 1.0).ln()) * l - l * l.ln())
        }
        AsymptoticRegime::MixedCorner => 1.0 - (df - 1.0) / (2.0 * ln_d) * (1.0 - l),
    };
    Ok(value)
}

/// Largest L reached by lower-family branch `k` (at its apex
/// `e = 1/(1+k)`); branches tile `[0, 1]` as `k` runs to `d-1`.
fn branch_peak_l(d: usize, k: usize) -> f64 {
    let df = d as f64;
    let kf = k as f64;
    df * kf / ((df - 1.0) * (kf + 1.0))
}

/// Invert a boundary family for the parameter giving linear entropy `l`.
///
/// `increasing` states whether L grows with the parameter on this branch.
fn invert_l(f: &ExtremalFamily, mut lo: f64, mut hi: f64, l: f64, increasing: bool) -> f64 {
    while hi - lo > EPS_BISECTION_TOL {
        let mid = 0.5 * (lo + hi);
        let lm = boundary_entropies(f, mid)
            .map(|p| p.linear)
            .unwrap_or(f64::NAN);
        let go_right = if increasing { lm < l } else { lm > l };
        if go_right {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Boundary S on inner curve `j` at linear entropy `l` (requires
/// `l <= branch_peak_l(d, j)`).
fn inner_curve_s(d: usize, j: usize, l: f64) -> Result<f64> {
    let f = ExtremalFamily::inner_rank_curve(d, j)?;
    let kp1 = (j + 1) as f64;
    // L decreases from the apex value to 0 as the parameter runs to 1.
    let eps = invert_l(&f, 1.0 / kp1, 1.0, l.clamp(0.0, branch_peak_l(d, j)), false);
    Ok(boundary_entropies(&f, eps.clamp(1.0 / kp1 + f64::EPSILON, 1.0))?.von_neumann)
}

/// Extreme von Neumann entropies compatible with linear entropy `l`.
///
/// `S_max` inverts the upper boundary; `S_min` inverts the lower-boundary
/// branch (or branches, near a junction) containing `l` and keeps the
/// smallest S. Endpoints are exact: `(0, 0)` at `l = 0`, `(1, 1)` at
/// `l = 1`.
pub fn von_neumann_bounds(d: usize, l: f64) -> Result<(f64, f64)> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!(
            "bounds need d >= 2, got {d}"
        )));
    }
    if !l.is_finite() || !(0.0..=1.0).contains(&l) {
        return Err(Error::InvalidArgument(format!(
            "bounds are defined for L in [0, 1], got {l}"
        )));
    }
    if l == 0.0 {
        return Ok((0.0, 0.0));
    }
    if l == 1.0 {
        return Ok((1.0, 1.0));
    }

    let max_family = ExtremalFamily::max_boundary(d)?;
    // L = 1 - e^2 decreases in e over [0, 1).
    let eps_max = invert_l(&max_family, 0.0, 1.0, l, false);
    let s_max = boundary_entropies(&max_family, eps_max.min(1.0 - f64::EPSILON))?.von_neumann;

    let mut s_min = f64::INFINITY;
    for k in 1..d {
        let lo_peak = if k == 1 { 0.0 } else { branch_peak_l(d, k - 1) };
        let hi_peak = branch_peak_l(d, k);
        if l < lo_peak - REGION_TOL || l > hi_peak + REGION_TOL {
            continue;
        }
        let f = ExtremalFamily::min_boundary(d, k)?;
        let kp1 = (k + 1) as f64;
        // L increases with the parameter up to the branch apex.
        let eps = invert_l(&f, 0.0, 1.0 / kp1, l.min(hi_peak), true);
        let s = boundary_entropies(&f, eps.clamp(f64::EPSILON, 1.0 / kp1))?.von_neumann;
        s_min = s_min.min(s);
    }
    debug_assert!(s_min.is_finite());
    Ok((s_min.min(s_max), s_max))
}

/// Smallest `k in [2, d]` whose rank subregion contains the point.
///
/// Geometric contract: `k` is minimal such that `p` lies at or below the
/// inner curve of index `k - 1` (within 1e-9) and within that curve's L
/// span. Spectra of rank `r` always map on or below curve `r - 1`, so
/// `numerical_rank >= k` holds for any spectrum mapping to `p`; the
/// converse is not asserted. Points on a separator take the lower index.
pub fn minimal_rank_region(d: usize, p: InfoPoint) -> Result<usize> {
    let (s_min, s_max) = von_neumann_bounds(d, p.linear)?;
    if p.von_neumann < s_min - REGION_TOL || p.von_neumann > s_max + REGION_TOL {
        return Err(Error::InvalidArgument(format!(
            "point ({}, {}) lies outside the diagram for d={d}",
            p.linear, p.von_neumann
        )));
    }
    for k in 2..d {
        let j = k - 1;
        if p.linear > branch_peak_l(d, j) + REGION_TOL {
            continue;
        }
        if p.von_neumann <= inner_curve_s(d, j, p.linear)? + REGION_TOL {
            return Ok(k);
        }
    }
    Ok(d)
}
