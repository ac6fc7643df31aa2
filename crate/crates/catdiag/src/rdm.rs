//! One- and two-particle reduced density matrices of symmetric states.
//!
//! The generic path assembles the marginals from expectation values of
//! the collective operators: with `Phi_ij = S_ij psi`,
//!
//! ```text
//! rho_1[i][j] = <S_ji> / N                       = dot(Phi_ij, psi) / N
//! rho_2[(ik)][(jl)] = (<S_ji S_lk> - delta_il <S_jk>) / (N (N-1))
//! ```
//!
//! both Hermitian and positive semidefinite by construction (they are
//! Gram-like forms), so validation failures indicate a broken state, not
//! a broken formula.
//!
//! Cat states additionally admit closed-form spectra at finite N and in
//! the N to infinity limit. The finite-N forms are ratios of sums of
//! `L_sigma^(N-m)` with `L_sigma = 1 + sigma_1 |alpha|^2 + sigma_2 |beta|^2`
//! over the parity sign patterns sigma; `L_sigma` can be negative, so the
//! powers are evaluated as signed ratios against the all-plus term to
//! avoid overflow and sign loss.

use crate::fock::SymmetricState;
use crate::linalg::{hermitian_eigensystem, signed_power_ratio, HermitianMatrix};
use crate::spectra::{info_point, DensitySpectrum, InfoPoint};
use crate::{Error, Result, C64};

/// Eigenvalues of a reduced matrix may undershoot zero by at most this.
const PSD_TOL: f64 = 1e-10;

/// Reduced-matrix trace must equal 1 within this.
const TRACE_TOL: f64 = 1e-10;

/// The all-plus power sum at or below this signals an annihilated cat.
const ANNIHILATION_TOL: f64 = 1e-14;

/// A reduced density matrix together with its spectrum.
#[derive(Debug, Clone)]
pub struct RdmResult {
    m: usize,
    matrix: HermitianMatrix,
    spectrum: DensitySpectrum,
}

impl RdmResult {
    /// Number of particles kept (1 or 2).
    pub fn particles_kept(&self) -> usize {
        self.m
    }

    /// The density matrix, of dimension `D^M`.
    pub fn matrix(&self) -> &HermitianMatrix {
        &self.matrix
    }

    /// Eigenvalues as a descending probability vector.
    pub fn spectrum(&self) -> &DensitySpectrum {
        &self.spectrum
    }
}

fn dot(x: &[C64], y: &[C64]) -> C64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

fn require_normalized(state: &SymmetricState) -> Result<()> {
    if !state.is_normalized() {
        return Err(Error::InvalidState(
            "reduced density matrices require a normalized state".into(),
        ));
    }
    Ok(())
}

/// All `S_ij psi` vectors, indexed `[i-1][j-1]`.
fn spin_images(state: &SymmetricState) -> Result<Vec<Vec<Vec<C64>>>> {
    let d = state.levels();
    let mut phi = Vec::with_capacity(d);
    for i in 1..=d {
        let mut row = Vec::with_capacity(d);
        for j in 1..=d {
            row.push(crate::fock::apply_spin_operator(
                state.basis(),
                i,
                j,
                state.amplitudes(),
            )?);
        }
        phi.push(row);
    }
    Ok(phi)
}

/// Hermitize, validate trace and positivity, and extract the spectrum.
fn finish(m: usize, dim: usize, raw: Vec<C64>) -> Result<RdmResult> {
    let sym: Vec<C64> = (0..dim * dim)
        .map(|idx| {
            let (r, c) = (idx / dim, idx % dim);
            0.5 * (raw[r * dim + c] + raw[c * dim + r].conj())
        })
        .collect();
    let matrix = HermitianMatrix::from_entries(dim, sym)?;
    let trace = matrix.trace();
    if (trace - 1.0).abs() > TRACE_TOL {
        return Err(Error::InvalidState(format!(
            "reduced matrix trace {trace} deviates from 1 beyond {TRACE_TOL}"
        )));
    }
    let eig = hermitian_eigensystem(&matrix)?;
    let mut values = eig.eigenvalues;
    if let Some(&lowest) = values.first() {
        if lowest < -PSD_TOL {
            return Err(Error::InvalidState(format!(
                "reduced matrix eigenvalue {lowest} below -{PSD_TOL}"
            )));
        }
    }
    // Water under -1e-10 was rejected above; the rest is rounding noise.
    for v in values.iter_mut() {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    let spectrum = DensitySpectrum::new(values)?;
    Ok(RdmResult {
        m,
        matrix,
        spectrum,
    })
}

/// One-particle reduced density matrix of a normalized symmetric state.
pub fn rdm1(state: &SymmetricState) -> Result<RdmResult> {
    require_normalized(state)?;
    let d = state.levels();
    let n = f64::from(state.particles());
    let phi = spin_images(state)?;
    let mut raw = vec![C64::new(0.0, 0.0); d * d];
    for i in 0..d {
        for j in 0..d {
            raw[i * d + j] = dot(&phi[i][j], state.amplitudes()) / n;
        }
    }
    finish(1, d, raw)
}

/// Two-particle reduced density matrix; requires more than two particles.
///
/// Pair `(i, k)` maps to row `(i-1) D + (k-1)`, and likewise for columns.
pub fn rdm2(state: &SymmetricState) -> Result<RdmResult> {
    require_normalized(state)?;
    if state.particles() <= 2 {
        return Err(Error::InvalidArgument(format!(
            "two-particle marginal needs N > 2, got {}",
            state.particles()
        )));
    }
    let d = state.levels();
    let n = f64::from(state.particles());
    let scale = 1.0 / (n * (n - 1.0));
    let phi = spin_images(state)?;
    let dim = d * d;
    let mut raw = vec![C64::new(0.0, 0.0); dim * dim];
    for i in 0..d {
        for k in 0..d {
            let row = i * d + k;
            for j in 0..d {
                for l in 0..d {
                    let col = j * d + l;
                    let mut val = dot(&phi[i][j], &phi[l][k]);
                    if i == l {
                        val -= dot(&phi[k][j], state.amplitudes());
                    }
                    raw[row * dim + col] = val * scale;
                }
            }
        }
    }
    finish(2, dim, raw)
}

/// Number of particles in a cat-spectrum request: finite or the limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CatN {
    Finite(u32),
    Infinite,
}

/// Validated request for a closed-form cat spectrum.
#[derive(Debug, Clone)]
pub struct CatSpectrumRequest {
    d: usize,
    m: usize,
    n: CatN,
    moduli: Vec<f64>,
}

impl CatSpectrumRequest {
    /// Validate a (D, M, N, moduli) combination.
    ///
    /// Closed forms exist for D in {2, 3} and M in {1, 2}; finite N must
    /// be at least 2 for M = 1 and at least 3 for M = 2. Moduli are the
    /// D-1 nonnegative magnitudes (|alpha|) or (|alpha|, |beta|);
    /// infinite moduli are rejected because the unconstrained limit is
    /// direction-dependent (see [`directional_limit_spectrum`]).
    pub fn new(d: usize, m: usize, n: CatN, moduli: &[f64]) -> Result<Self> {
        if d != 2 && d != 3 {
            return Err(Error::InvalidArgument(format!(
                "closed-form cat spectra cover D in {{2, 3}}, got {d}"
            )));
        }
        if m != 1 && m != 2 {
            return Err(Error::InvalidArgument(format!(
                "marginal size M must be 1 or 2, got {m}"
            )));
        }
        if moduli.len() != d - 1 {
            return Err(Error::InvalidArgument(format!(
                "expected {} moduli for D = {d}, got {}",
                d - 1,
                moduli.len()
            )));
        }
        if moduli.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::InvalidArgument(
                "moduli must be finite and nonnegative; directional limits \
                 handle the infinite-radius case"
                    .into(),
            ));
        }
        if let CatN::Finite(n) = n {
            let min = if m == 1 { 2 } else { 3 };
            if n < min {
                return Err(Error::InvalidArgument(format!(
                    "closed form for M = {m} needs N >= {min}, got {n}"
                )));
            }
        }
        Ok(Self {
            d,
            m,
            n,
            moduli: moduli.to_vec(),
        })
    }

    pub fn levels(&self) -> usize {
        self.d
    }

    pub fn particles_kept(&self) -> usize {
        self.m
    }

    pub fn particles(&self) -> CatN {
        self.n
    }

    pub fn moduli(&self) -> &[f64] {
        &self.moduli
    }
}

/// Sign patterns `sigma` over the parity branches, all-plus first, and
/// their `L_sigma = 1 + sum sigma_i moduli_i^2`.
fn branch_weights(moduli: &[f64]) -> Vec<(Vec<f64>, f64)> {
    let width = moduli.len();
    (0..1usize << width)
        .map(|mask| {
            let signs: Vec<f64> = (0..width)
                .map(|i| if mask >> i & 1 == 1 { -1.0 } else { 1.0 })
                .collect();
            let l = 1.0
                + moduli
                    .iter()
                    .zip(&signs)
                    .map(|(x, s)| s * x * x)
                    .sum::<f64>();
            (signs, l)
        })
        .collect()
}

/// Sums `sum_sigma w(sigma) (L_sigma / L_0)^(N-drop)` for the weights
/// 1, sigma_1, sigma_2 (when present), and sigma_1 sigma_2.
struct PowerSums {
    plain: f64,
    s1: f64,
    s2: f64,
    s12: f64,
}

fn power_sums(moduli: &[f64], n: u32, drop: u32) -> Result<PowerSums> {
    let branches = branch_weights(moduli);
    let l0 = branches[0].1;
    let mut sums = PowerSums {
        plain: 0.0,
        s1: 0.0,
        s2: 0.0,
        s12: 0.0,
    };
    for (signs, l) in &branches {
        let t = signed_power_ratio(*l, l0, u64::from(n - drop), u64::from(n))?.to_f64();
        sums.plain += t;
        sums.s1 += signs[0] * t;
        if signs.len() > 1 {
            sums.s2 += signs[1] * t;
            sums.s12 += signs[0] * signs[1] * t;
        }
    }
    Ok(sums)
}

fn normalized_spectrum(values: Vec<f64>) -> Result<DensitySpectrum> {
    let total: f64 = values.iter().sum();
    if total.is_nan() || total <= 0.0 {
        return Err(Error::InvalidSpectrum(format!(
            "closed-form spectrum sums to {total}"
        )));
    }
    DensitySpectrum::new(values.into_iter().map(|v| v / total).collect())
}

/// Closed-form one-particle spectrum of an even cat state.
pub fn cat_rdm1_spectrum(req: &CatSpectrumRequest) -> Result<DensitySpectrum> {
    if req.m != 1 {
        return Err(Error::InvalidArgument(
            "cat_rdm1_spectrum takes an M = 1 request".into(),
        ));
    }
    let a2 = req.moduli[0] * req.moduli[0];
    match req.n {
        CatN::Infinite => {
            let values = match req.d {
                2 => vec![1.0, a2],
                _ => {
                    let b2 = req.moduli[1] * req.moduli[1];
                    vec![1.0, a2, b2]
                }
            };
            normalized_spectrum(values)
        }
        CatN::Finite(n) => {
            let denom = power_sums(&req.moduli, n, 0)?.plain;
            if denom <= ANNIHILATION_TOL {
                return Err(Error::ProjectionAnnihilated {
                    norm_sq: denom * (2.0f64).powi(-(req.d as i32 - 1)),
                });
            }
            let s = power_sums(&req.moduli, n, 1)?;
            let values = match req.d {
                2 => vec![s.plain / denom, a2 * s.s1 / denom],
                _ => {
                    let b2 = req.moduli[1] * req.moduli[1];
                    vec![s.plain / denom, a2 * s.s1 / denom, b2 * s.s2 / denom]
                }
            };
            normalized_spectrum(values)
        }
    }
}

/// Closed-form two-particle spectrum of an even cat state.
///
/// The length is `D^2` with the structural zeros included: 2 zeros for
/// D = 2 and 5 for D = 3.
pub fn cat_rdm2_spectrum(req: &CatSpectrumRequest) -> Result<DensitySpectrum> {
    if req.m != 2 {
        return Err(Error::InvalidArgument(
            "cat_rdm2_spectrum takes an M = 2 request".into(),
        ));
    }
    let a2 = req.moduli[0] * req.moduli[0];
    match req.n {
        CatN::Infinite => {
            let values = match req.d {
                2 => {
                    let scale = (1.0 + a2) * (1.0 + a2);
                    vec![(1.0 + a2 * a2) / scale, 2.0 * a2 / scale, 0.0, 0.0]
                }
                _ => {
                    let b2 = req.moduli[1] * req.moduli[1];
                    let scale = (1.0 + a2 + b2) * (1.0 + a2 + b2);
                    let mut v = vec![
                        (1.0 + a2 * a2 + b2 * b2) / scale,
                        2.0 * a2 / scale,
                        2.0 * b2 / scale,
                        2.0 * a2 * b2 / scale,
                    ];
                    v.extend([0.0; 5]);
                    v
                }
            };
            DensitySpectrum::new(values)
        }
        CatN::Finite(n) => {
            let denom = power_sums(&req.moduli, n, 0)?.plain;
            if denom <= ANNIHILATION_TOL {
                return Err(Error::ProjectionAnnihilated {
                    norm_sq: denom * (2.0f64).powi(-(req.d as i32 - 1)),
                });
            }
            let s = power_sums(&req.moduli, n, 2)?;
            let values = match req.d {
                2 => vec![
                    (1.0 + a2 * a2) * s.plain / denom,
                    2.0 * a2 * s.s1 / denom,
                    0.0,
                    0.0,
                ],
                _ => {
                    let b2 = req.moduli[1] * req.moduli[1];
                    let mut v = vec![
                        (1.0 + a2 * a2 + b2 * b2) * s.plain / denom,
                        2.0 * a2 * s.s1 / denom,
                        2.0 * b2 * s.s2 / denom,
                        2.0 * a2 * b2 * s.s12 / denom,
                    ];
                    v.extend([0.0; 5]);
                    v
                }
            };
            normalized_spectrum(values)
        }
    }
}

/// Spectrum of the infinite-radius limit taken along the direction
/// `(|alpha|, |beta|) = r (cos theta, sin theta)` for three levels.
///
/// Finite-radius spectra converge to these at rate `O(1/r^2)`.
pub fn directional_limit_spectrum(m: usize, theta: f64) -> Result<DensitySpectrum> {
    if m != 1 && m != 2 {
        return Err(Error::InvalidArgument(format!(
            "marginal size M must be 1 or 2, got {m}"
        )));
    }
    if !theta.is_finite() || !(0.0..=std::f64::consts::FRAC_PI_2).contains(&theta) {
        return Err(Error::InvalidArgument(format!(
            "direction angle {theta} outside [0, pi/2]"
        )));
    }
    let (sin, cos) = theta.sin_cos();
    let values = if m == 1 {
        vec![0.0, sin * sin, cos * cos]
    } else {
        let mut v = vec![
            ((4.0 * theta).cos() + 3.0) / 4.0,
            0.0,
            0.0,
            2.0 * cos * cos * sin * sin,
        ];
        v.extend([0.0; 5]);
        v
    };
    DensitySpectrum::new(values)
}

/// Entanglement entropies of the requested cat marginal, normalized to
/// the marginal dimension `D^M` (unit interval in both coordinates).
pub fn cat_entanglement_entropies(req: &CatSpectrumRequest) -> Result<InfoPoint> {
    let spectrum = if req.m == 1 {
        cat_rdm1_spectrum(req)?
    } else {
        cat_rdm2_spectrum(req)?
    };
    info_point(&spectrum)
}
