//! Symmetric N-particle machinery for D-level systems: occupation basis,
//! collective spin operators, coherent states, parity operators, and
//! even-parity cat states.
//!
//! States of N indistinguishable D-level particles in the fully symmetric
//! representation are expanded over occupation vectors `(n_1, ..., n_D)`
//! with `sum n_i = N`. The collective operators `S_ij` move one quantum
//! from level j to level i; coherent states are multinomial amplitude
//! patterns labeled by a complex point `z = (z_2, ..., z_D)` with the
//! first component fixed to 1.
//!
//! # Exact parity cancellation
//!
//! Cat states are built as the literal superposition of the `2^(D-1)`
//! sign-flipped coherent states. Coherent amplitudes factor into a
//! magnitude (computed once in log space, identical across branches) and
//! a phase built by repeated multiplication of unit-modulus factors.
//! IEEE negation propagates exactly through that product, so branch
//! amplitudes are exact sign mirrors of each other, and summing them over
//! a binary-reduction tree cancels every odd-occupation amplitude to an
//! exact floating-point zero. The postcondition is asserted, not assumed.

use crate::linalg::{signed_power_ratio, ComplexMatrix};
use crate::{Error, Result, C64};
use std::collections::HashMap;
use std::io::Write;
use std::sync::Arc;

/// Refuse to enumerate bases beyond this many states.
pub const BASIS_CAP: usize = 1_000_000;

/// Norm tolerance for validated symmetric states.
const NORM_TOL: f64 = 1e-10;

/// A squared cat norm at or below this is treated as annihilation.
const ANNIHILATION_TOL: f64 = 1e-14;

/// Complete occupation-number basis for `N` particles in `D` levels.
///
/// States are ordered lexicographically descending, so `(N, 0, ..., 0)`
/// comes first and `(0, ..., 0, N)` last; the order is part of the public
/// contract (amplitude vectors and CSV dumps are portable across runs).
#[derive(Debug)]
pub struct OccupationBasis {
    d: usize,
    n: u32,
    states: Vec<Vec<u32>>,
    index: HashMap<Vec<u32>, usize>,
}

fn binomial(n: u64, k: u64) -> Option<u128> {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul(u128::from(n - i))?;
        acc /= u128::from(i + 1);
    }
    Some(acc)
}

/// Enumerate the symmetric basis for `D` levels and `N` particles.
///
/// The basis size is `binomial(N + D - 1, D - 1)`; requests beyond
/// [`BASIS_CAP`] states are rejected before any allocation.
pub fn enumerate_basis(d: usize, n: u32) -> Result<Arc<OccupationBasis>> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 levels, got {d}"
        )));
    }
    if n < 1 {
        return Err(Error::InvalidArgument("need at least 1 particle".into()));
    }
    let size = binomial(u64::from(n) + d as u64 - 1, d as u64 - 1).unwrap_or(u128::MAX);
    if size > BASIS_CAP as u128 {
        return Err(Error::BasisTooLarge {
            d,
            n,
            size,
            cap: BASIS_CAP,
        });
    }

    let mut states = Vec::with_capacity(size as usize);
    let mut prefix = Vec::with_capacity(d);
    fill_descending(&mut states, &mut prefix, n, d);
    debug_assert_eq!(states.len() as u128, size);

    let index = states
        .iter()
        .enumerate()
        .map(|(i, s)| (s.clone(), i))
        .collect();
    Ok(Arc::new(OccupationBasis {
        d,
        n,
        states,
        index,
    }))
}

fn fill_descending(
    states: &mut Vec<Vec<u32>>,
    prefix: &mut Vec<u32>,
    remaining: u32,
    slots: usize,
) {
    if slots == 1 {
        prefix.push(remaining);
        states.push(prefix.clone());
        prefix.pop();
        return;
    }
    for v in (0..=remaining).rev() {
        prefix.push(v);
        fill_descending(states, prefix, remaining - v, slots - 1);
        prefix.pop();
    }
}

impl OccupationBasis {
    /// Number of levels D.
    pub fn levels(&self) -> usize {
        self.d
    }

    /// Number of particles N.
    pub fn particles(&self) -> u32 {
        self.n
    }

    /// Number of basis states.
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Occupation vector at a basis index.
    pub fn state(&self, idx: usize) -> &[u32] {
        &self.states[idx]
    }

    /// All occupation vectors in basis order.
    pub fn states(&self) -> &[Vec<u32>] {
        &self.states
    }

    /// Basis index of an occupation vector, if it belongs to this basis.
    pub fn index_of(&self, occupation: &[u32]) -> Option<usize> {
        self.index.get(occupation).copied()
    }
}

/// Amplitude vector over an [`OccupationBasis`].
#[derive(Debug, Clone)]
pub struct SymmetricState {
    basis: Arc<OccupationBasis>,
    amplitudes: Vec<C64>,
    normalized: bool,
}

impl SymmetricState {
    /// Wrap amplitudes, validating unit norm within 1e-10.
    pub fn new(basis: Arc<OccupationBasis>, amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.len() != basis.len() {
            return Err(Error::DimensionMismatch {
                left: basis.len(),
                right: amplitudes.len(),
                context: "state amplitudes vs basis",
            });
        }
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!(
                "state norm {norm} deviates from 1 beyond {NORM_TOL}"
            )));
        }
        Ok(Self {
            basis,
            amplitudes,
            normalized: true,
        })
    }

    /// Wrap amplitudes without the norm check; the state carries an
    /// explicit unnormalized flag and is rejected by consumers that
    /// require unit norm.
    pub fn new_unnormalized(basis: Arc<OccupationBasis>, amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.len() != basis.len() {
            return Err(Error::DimensionMismatch {
                left: basis.len(),
                right: amplitudes.len(),
                context: "state amplitudes vs basis",
            });
        }
        Ok(Self {
            basis,
            amplitudes,
            normalized: false,
        })
    }

    pub fn basis(&self) -> &Arc<OccupationBasis> {
        &self.basis
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn levels(&self) -> usize {
        self.basis.levels()
    }

    pub fn particles(&self) -> u32 {
        self.basis.particles()
    }

    /// Euclidean norm of the amplitude vector.
    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|a| a.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Fock inner product `<self|other>`.
    pub fn inner_product(&self, other: &SymmetricState) -> Result<C64> {
        if self.basis.len() != other.basis.len()
            || self.levels() != other.levels()
            || self.particles() != other.particles()
        {
            return Err(Error::DimensionMismatch {
                left: self.basis.len(),
                right: other.basis.len(),
                context: "inner product bases",
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }
}

/// Coherent-state label `z = (z_2, ..., z_D)`; the first component is
/// fixed to 1 by convention.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePoint {
    z: Vec<C64>,
}

impl PhasePoint {
    /// Wrap the components `z_2..z_D`; all must be finite.
    pub fn new(z: Vec<C64>) -> Result<Self> {
        if z.is_empty() {
            return Err(Error::InvalidArgument(
                "phase point needs at least one component (D >= 2)".into(),
            ));
        }
        if z.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidArgument(
                "phase point components must be finite".into(),
            ));
        }
        Ok(Self { z })
    }

    /// Two-level point labeled by a single complex alpha.
    pub fn qubit(alpha: C64) -> Self {
        Self { z: vec![alpha] }
    }

    /// Three-level point labeled by (alpha, beta).
    pub fn qutrit(alpha: C64, beta: C64) -> Self {
        Self {
            z: vec![alpha, beta],
        }
    }

    /// Number of levels D (one more than the stored components).
    pub fn levels(&self) -> usize {
        self.z.len() + 1
    }

    /// Components `z_2..z_D`.
    pub fn components(&self) -> &[C64] {
        &self.z
    }

    /// `z_2`, conventionally called alpha.
    pub fn alpha(&self) -> C64 {
        self.z[0]
    }

    /// `z_3` (beta) when D >= 3.
    pub fn beta(&self) -> Option<C64> {
        self.z.get(1).copied()
    }

    /// The point with component `z_j` negated (levels are 1-based, so
    /// `j` runs over `2..=D`).
    pub fn flipped(&self, j: usize) -> Result<Self> {
        if j < 2 || j > self.levels() {
            return Err(Error::InvalidArgument(format!(
                "parity level {j} outside [2, {}]",
                self.levels()
            )));
        }
        let mut z = self.z.clone();
        z[j - 2] = -z[j - 2];
        Ok(Self { z })
    }

    /// The point with every component flagged in `bits` negated.
    pub fn flipped_set(&self, bits: &ParityString) -> Result<Self> {
        if bits.len() != self.z.len() {
            return Err(Error::DimensionMismatch {
                left: self.z.len(),
                right: bits.len(),
                context: "parity string vs phase point",
            });
        }
        let z = self
            .z
            .iter()
            .zip(bits.bits())
            .map(|(c, &b)| if b { -c } else { *c })
            .collect();
        Ok(Self { z })
    }

    /// `|z|^2 = 1 + sum |z_i|^2` (the leading 1 is the fixed `z_1`).
    pub fn norm_sq(&self) -> f64 {
        1.0 + self.z.iter().map(|c| c.norm_sqr()).sum::<f64>()
    }
}

/// Binary string `(b_2, ..., b_D)` selecting which parity operators act.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParityString {
    bits: Vec<bool>,
}

impl ParityString {
    pub fn new(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    /// All `2^(D-1)` strings for `D` levels, in binary counting order
    /// with `b_2` as the least significant bit.
    pub fn all(d: usize) -> Vec<Self> {
        let width = d - 1;
        (0..1usize << width)
            .map(|mask| Self {
                bits: (0..width).map(|i| mask >> i & 1 == 1).collect(),
            })
            .collect()
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }
}

fn check_level(basis: &OccupationBasis, level: usize) -> Result<()> {
    if level < 1 || level > basis.levels() {
        return Err(Error::InvalidArgument(format!(
            "level {level} outside [1, {}]",
            basis.levels()
        )));
    }
    Ok(())
}

/// Collective operator `S_ij` as a dense matrix over the basis.
///
/// `S_ii` is diagonal with entry `n_i`; for `i != j` the entry
/// `sqrt((n_i + 1) n_j)` connects an occupation vector to the one with a
/// quantum moved from level j to level i. `S_ij` is the conjugate
/// transpose of `S_ji`.
pub fn spin_operator(basis: &OccupationBasis, i: usize, j: usize) -> Result<ComplexMatrix> {
    check_level(basis, i)?;
    check_level(basis, j)?;
    let dim = basis.len();
    let mut m = ComplexMatrix::zeros(dim, dim);
    for (col, n) in basis.states().iter().enumerate() {
        if i == j {
            m.set(col, col, C64::new(f64::from(n[i - 1]), 0.0));
            continue;
        }
        if n[j - 1] == 0 {
            continue;
        }
        let mut target = n.clone();
        target[i - 1] += 1;
        target[j - 1] -= 1;
        let row = basis
            .index_of(&target)
            .expect("moved occupation stays in the basis");
        let weight = u64::from(n[i - 1] + 1) * u64::from(n[j - 1]);
        m.set(row, col, C64::new((weight as f64).sqrt(), 0.0));
    }
    Ok(m)
}

/// Matrix-free action of `S_ij` on an amplitude vector.
pub fn apply_spin_operator(
    basis: &OccupationBasis,
    i: usize,
    j: usize,
    amplitudes: &[C64],
) -> Result<Vec<C64>> {
    check_level(basis, i)?;
    check_level(basis, j)?;
    if amplitudes.len() != basis.len() {
        return Err(Error::DimensionMismatch {
            left: basis.len(),
            right: amplitudes.len(),
            context: "spin operator application",
        });
    }
    let mut out = vec![C64::new(0.0, 0.0); basis.len()];
    for (col, n) in basis.states().iter().enumerate() {
        if i == j {
            out[col] += f64::from(n[i - 1]) * amplitudes[col];
            continue;
        }
        if n[j - 1] == 0 {
            continue;
        }
        let mut target = n.clone();
        target[i - 1] += 1;
        target[j - 1] -= 1;
        let row = basis
            .index_of(&target)
            .expect("moved occupation stays in the basis");
        let weight = u64::from(n[i - 1] + 1) * u64::from(n[j - 1]);
        out[row] += (weight as f64).sqrt() * amplitudes[col];
    }
    Ok(out)
}

/// Log-factorial table `ln(0!), ..., ln(n!)`.
fn log_factorials(n: u32) -> Vec<f64> {
    let mut table = Vec::with_capacity(n as usize + 1);
    table.push(0.0);
    let mut acc = 0.0;
    for k in 1..=n {
        acc += f64::from(k).ln();
        table.push(acc);
    }
    table
}

/// Coherent state over the basis: multinomial amplitudes
/// `sqrt(N!/prod n_i!) * prod z_i^{n_i} / |z|^N` with `z_1 = 1`.
///
/// Magnitudes are computed in log space (large-N multinomials overflow
/// naive factorials); phases are products of unit-modulus factors so that
/// sign flips of `z` propagate exactly (see the module docs).
pub fn dscs(basis: &Arc<OccupationBasis>, z: &PhasePoint) -> Result<SymmetricState> {
    if z.levels() != basis.levels() {
        return Err(Error::DimensionMismatch {
            left: basis.levels(),
            right: z.levels(),
            context: "phase point vs basis levels",
        });
    }
    let n = basis.particles();
    let ln_fact = log_factorials(n);
    let moduli: Vec<f64> = z.components().iter().map(|c| c.norm()).collect();
    let units: Vec<C64> = z
        .components()
        .iter()
        .zip(&moduli)
        .map(|(c, &r)| if r > 0.0 { c / r } else { C64::new(1.0, 0.0) })
        .collect();
    let ln_scale = f64::from(n) * 0.5 * z.norm_sq().ln();

    let mut amplitudes = Vec::with_capacity(basis.len());
    for occ in basis.states() {
        // A zero component with nonzero occupation kills the amplitude.
        if occ[1..]
            .iter()
            .zip(&moduli)
            .any(|(&nk, &r)| nk > 0 && r == 0.0)
        {
            amplitudes.push(C64::new(0.0, 0.0));
            continue;
        }
        let mut log_mag = 0.5
            * (ln_fact[n as usize] - occ.iter().map(|&nk| ln_fact[nk as usize]).sum::<f64>())
            - ln_scale;
        let mut phase = C64::new(1.0, 0.0);
        for (k, &nk) in occ[1..].iter().enumerate() {
            if nk == 0 {
                continue;
            }
            log_mag += f64::from(nk) * moduli[k].ln();
            for _ in 0..nk {
                phase *= units[k];
            }
        }
        amplitudes.push(log_mag.exp() * phase);
    }
    SymmetricState::new(Arc::clone(basis), amplitudes)
}

/// Overlap `<z1|z2>` of two coherent states of `n` particles,
/// `((1 + sum conj(z1_i) z2_i) / (|z1| |z2|))^n`.
///
/// The base has modulus at most 1 (Cauchy-Schwarz), so the power neither
/// overflows nor loses the branch.
pub fn overlap(z1: &PhasePoint, z2: &PhasePoint, n: u32) -> Result<C64> {
    if z1.levels() != z2.levels() {
        return Err(Error::DimensionMismatch {
            left: z1.levels(),
            right: z2.levels(),
            context: "overlap phase points",
        });
    }
    let dot = C64::new(1.0, 0.0)
        + z1.components()
            .iter()
            .zip(z2.components())
            .map(|(a, b)| a.conj() * b)
            .sum::<C64>();
    let scale = (z1.norm_sq() * z2.norm_sq()).sqrt();
    Ok((dot / scale).powu(n))
}

/// Apply the parity operator of level `j >= 2`: each amplitude picks up
/// `(-1)^{n_j}`. Level 1 is the excluded reference (the product of all
/// parities is fixed to `(-1)^N`), so `j = 1` is rejected.
pub fn apply_parity(state: &SymmetricState, j: usize) -> Result<SymmetricState> {
    if j < 2 || j > state.levels() {
        return Err(Error::InvalidArgument(format!(
            "parity level {j} outside [2, {}]; level 1 is the reference",
            state.levels()
        )));
    }
    let amplitudes = state
        .basis
        .states()
        .iter()
        .zip(&state.amplitudes)
        .map(|(occ, amp)| if occ[j - 1] % 2 == 1 { -amp } else { *amp })
        .collect();
    Ok(SymmetricState {
        basis: Arc::clone(&state.basis),
        amplitudes,
        normalized: state.normalized,
    })
}

/// Apply `prod_j parity_j^{b_j}` for a parity string.
pub fn apply_parity_string(state: &SymmetricState, bits: &ParityString) -> Result<SymmetricState> {
    if bits.len() != state.levels() - 1 {
        return Err(Error::DimensionMismatch {
            left: state.levels() - 1,
            right: bits.len(),
            context: "parity string vs state levels",
        });
    }
    let mut out = state.clone();
    for (k, &b) in bits.bits().iter().enumerate() {
        if b {
            out = apply_parity(&out, k + 2)?;
        }
    }
    Ok(out)
}

/// Sum branch amplitude vectors pairwise over a binary tree.
///
/// Branches are indexed by the parity-string mask; each reduction level
/// pairs vectors differing in exactly one flip bit, whose entries are
/// exact sign mirrors, so odd-occupation amplitudes cancel to exact
/// zeros instead of rounding residue.
fn tree_sum(mut branches: Vec<Vec<C64>>) -> Vec<C64> {
    while branches.len() > 1 {
        let mut next = Vec::with_capacity(branches.len() / 2);
        let mut iter = branches.into_iter();
        while let (Some(a), Some(b)) = (iter.next(), iter.next()) {
            next.push(a.iter().zip(&b).map(|(x, y)| x + y).collect());
        }
        branches = next;
    }
    branches.pop().unwrap_or_default()
}

/// Even-parity cat state: the normalized sum of all sign-flipped images
/// of the coherent state at `z`.
///
/// The normalization uses the closed form
/// `norm^2 = 2^(1-D) * sum_b (L_b / L_0)^N` with
/// `L_b = 1 + sum (-1)^{b_i} |z_i|^2`, evaluated through stable power
/// ratios, and is cross-checked against the numerically accumulated norm
/// within 1e-10. Every amplitude on an occupation vector with any odd
/// `n_j` (j >= 2) is verified to be exactly zero.
pub fn dcat(basis: &Arc<OccupationBasis>, z: &PhasePoint) -> Result<SymmetricState> {
    if z.levels() != basis.levels() {
        return Err(Error::DimensionMismatch {
            left: basis.levels(),
            right: z.levels(),
            context: "phase point vs basis levels",
        });
    }
    let d = basis.levels();
    let n = basis.particles();
    let strings = ParityString::all(d);
    let branch_weight = (2.0f64).powi(-(d as i32 - 1));

    let mut branches = Vec::with_capacity(strings.len());
    for bits in &strings {
        branches.push(dscs(basis, &z.flipped_set(bits)?)?.amplitudes);
    }
    let summed = tree_sum(branches);

    let l0 = z.norm_sq();
    let mut norm_sq = 0.0;
    for bits in &strings {
        let lb = 1.0
            + z.components()
                .iter()
                .zip(bits.bits())
                .map(|(c, &b)| if b { -c.norm_sqr() } else { c.norm_sqr() })
                .sum::<f64>();
        norm_sq += signed_power_ratio(lb, l0, u64::from(n), u64::from(n))?.to_f64();
    }
    norm_sq *= branch_weight;
    if norm_sq <= ANNIHILATION_TOL {
        return Err(Error::ProjectionAnnihilated { norm_sq });
    }
    let norm = norm_sq.sqrt();

    let numeric_norm = branch_weight * summed.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    if (numeric_norm - norm).abs() > 1e-10 {
        return Err(Error::InvalidState(format!(
            "cat norm mismatch: closed form {norm}, numeric {numeric_norm}"
        )));
    }

    let scale = branch_weight / norm;
    let amplitudes: Vec<C64> = summed.into_iter().map(|a| a * scale).collect();

    for (occ, amp) in basis.states().iter().zip(&amplitudes) {
        if occ[1..].iter().any(|&nk| nk % 2 == 1) && (amp.re != 0.0 || amp.im != 0.0) {
            return Err(Error::InvalidState(format!(
                "odd-occupation amplitude {amp} survived the even projection at {occ:?}"
            )));
        }
    }

    SymmetricState::new(Arc::clone(basis), amplitudes)
}

/// Write a state as CSV rows `n_1,...,n_D,re_amplitude,im_amplitude` in
/// basis order, preceded by a header row.
pub fn write_state_csv(state: &SymmetricState, out: &mut impl Write) -> Result<()> {
    let d = state.levels();
    for k in 1..=d {
        write!(out, "n_{k},")?;
    }
    writeln!(out, "re_amplitude,im_amplitude")?;
    for (occ, amp) in state.basis.states().iter().zip(&state.amplitudes) {
        for nk in occ {
            write!(out, "{nk},")?;
        }
        writeln!(out, "{:.16e},{:.16e}", amp.re, amp.im)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng as _, SeedableRng as _};
    use rand_chacha::ChaCha8Rng;

    const TOL: f64 = 1e-12;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_point(d: usize, rng: &mut ChaCha8Rng) -> PhasePoint {
        PhasePoint::new(
            (0..d - 1)
                .map(|_| c(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn basis_enumeration_small_cases() {
        let b = enumerate_basis(2, 2).unwrap();
        assert_eq!(b.states(), &[vec![2, 0], vec![1, 1], vec![0, 2]]);

        let b = enumerate_basis(3, 1).unwrap();
        assert_eq!(b.len(), 3);

        let b = enumerate_basis(3, 50).unwrap();
        assert_eq!(b.len(), 1326);
        // Lexicographic descending, with a consistent index map.
        for w in b.states().windows(2) {
            assert!(w[0] > w[1]);
        }
        for (i, s) in b.states().iter().enumerate() {
            assert_eq!(b.index_of(s), Some(i));
        }
    }

    #[test]
    fn basis_cap_is_enforced() {
        let err = enumerate_basis(2, 2_000_000).unwrap_err();
        assert!(matches!(err, Error::BasisTooLarge { .. }));
        assert!(enumerate_basis(1, 5).is_err());
        assert!(enumerate_basis(3, 0).is_err());
    }

    #[test]
    fn spin_operator_reference_elements() {
        let b = enumerate_basis(2, 2).unwrap();
        let s12 = spin_operator(&b, 1, 2).unwrap();
        let from = b.index_of(&[1, 1]).unwrap();
        let to = b.index_of(&[2, 0]).unwrap();
        assert!((s12.get(to, from).re - 2f64.sqrt()).abs() < TOL);

        let s11 = spin_operator(&b, 1, 1).unwrap();
        for (idx, expect) in [(0, 2.0), (1, 1.0), (2, 0.0)] {
            assert_eq!(s11.get(idx, idx), c(expect, 0.0));
        }

        assert!(spin_operator(&b, 0, 1).is_err());
        assert!(spin_operator(&b, 1, 3).is_err());
    }

    #[test]
    fn number_operators_sum_to_particle_count() {
        let b = enumerate_basis(3, 4).unwrap();
        let mut total = ComplexMatrix::zeros(b.len(), b.len());
        for i in 1..=3 {
            total = total.add(&spin_operator(&b, i, i).unwrap()).unwrap();
        }
        for r in 0..b.len() {
            for col in 0..b.len() {
                let expect = if r == col { 4.0 } else { 0.0 };
                assert!((total.get(r, col) - c(expect, 0.0)).norm() < TOL);
            }
        }
    }

    #[test]
    fn spin_operators_are_mutually_adjoint() {
        let b = enumerate_basis(3, 3).unwrap();
        for i in 1..=3 {
            for j in 1..=3 {
                let a = spin_operator(&b, i, j).unwrap();
                let bt = spin_operator(&b, j, i).unwrap().conjugate_transpose();
                assert!(a.sub(&bt).unwrap().max_norm() == 0.0);
            }
        }
    }

    #[test]
    fn commutators_close_on_the_algebra() {
        // [S_ij, S_kl] = d_jk S_il - d_li S_kj; products of rounded square
        // roots keep this to about machine precision, not exactly.
        for (d, n) in [(2usize, 5u32), (3, 4), (3, 6)] {
            let b = enumerate_basis(d, n).unwrap();
            for i in 1..=d {
                for j in 1..=d {
                    for k in 1..=d {
                        for l in 1..=d {
                            let sij = spin_operator(&b, i, j).unwrap();
                            let skl = spin_operator(&b, k, l).unwrap();
                            let lhs = sij.mul(&skl).unwrap().sub(&skl.mul(&sij).unwrap()).unwrap();
                            let mut rhs = ComplexMatrix::zeros(b.len(), b.len());
                            if j == k {
                                rhs = rhs.add(&spin_operator(&b, i, l).unwrap()).unwrap();
                            }
                            if l == i {
                                let skj = spin_operator(&b, k, j).unwrap();
                                rhs = rhs.sub(&skj).unwrap();
                            }
                            assert!(
                                lhs.sub(&rhs).unwrap().max_norm() < TOL,
                                "commutator failed at D={d} N={n} ({i}{j},{k}{l})"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn applied_operator_matches_dense_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let b = enumerate_basis(3, 5).unwrap();
        let amps: Vec<C64> = (0..b.len())
            .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        for i in 1..=3 {
            for j in 1..=3 {
                let dense = spin_operator(&b, i, j).unwrap().apply(&amps).unwrap();
                let free = apply_spin_operator(&b, i, j, &amps).unwrap();
                for (a, f) in dense.iter().zip(&free) {
                    assert!((a - f).norm() < TOL);
                }
            }
        }
    }

    #[test]
    fn coherent_state_reference_amplitudes() {
        let b = enumerate_basis(3, 4).unwrap();
        let origin = dscs(&b, &PhasePoint::qutrit(c(0.0, 0.0), c(0.0, 0.0))).unwrap();
        for (occ, amp) in b.states().iter().zip(origin.amplitudes()) {
            let expect = if occ == &[4, 0, 0] { 1.0 } else { 0.0 };
            assert!((amp - c(expect, 0.0)).norm() < TOL);
        }

        let b2 = enumerate_basis(2, 1).unwrap();
        let s = dscs(&b2, &PhasePoint::qubit(c(1.0, 0.0))).unwrap();
        let inv_sqrt2 = 1.0 / 2f64.sqrt();
        assert!((s.amplitudes()[0] - c(inv_sqrt2, 0.0)).norm() < TOL);
        assert!((s.amplitudes()[1] - c(inv_sqrt2, 0.0)).norm() < TOL);
    }

    #[test]
    fn coherent_state_matches_hand_multinomial() {
        // D=3, N=2, z=(a, b): amplitudes sqrt(2!/(n1! n2! n3!)) a^n2 b^n3 / |z|^2.
        let a = c(0.4, -0.7);
        let bb = c(-0.2, 0.9);
        let b = enumerate_basis(3, 2).unwrap();
        let s = dscs(&b, &PhasePoint::qutrit(a, bb)).unwrap();
        let scale = 1.0 + a.norm_sqr() + bb.norm_sqr();
        for (occ, amp) in b.states().iter().zip(s.amplitudes()) {
            let (n1, n2, n3) = (occ[0], occ[1], occ[2]);
            let coeff = (fact(2) / (fact(n1) * fact(n2) * fact(n3))).sqrt();
            let expect = coeff * a.powu(n2) * bb.powu(n3) / scale;
            assert!((amp - expect).norm() < TOL, "occ {occ:?}");
        }

        fn fact(n: u32) -> f64 {
            (1..=n).map(f64::from).product::<f64>().max(1.0)
        }
    }

    #[test]
    fn coherent_states_are_normalized() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for d in [2usize, 3, 4] {
            let b = enumerate_basis(d, 20).unwrap();
            for _ in 0..5 {
                let s = dscs(&b, &random_point(d, &mut rng)).unwrap();
                assert!((s.norm() - 1.0).abs() < TOL);
            }
        }
    }

    #[test]
    fn overlap_reference_cases() {
        let z = PhasePoint::qutrit(c(0.3, 0.2), c(-0.5, 0.1));
        let one = overlap(&z, &z, 9).unwrap();
        assert!((one - c(1.0, 0.0)).norm() < 1e-13);

        let plus = PhasePoint::qubit(c(1.0, 0.0));
        let minus = PhasePoint::qubit(c(-1.0, 0.0));
        assert_eq!(overlap(&minus, &plus, 3).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn overlap_matches_amplitude_contraction() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let b = enumerate_basis(3, 7).unwrap();
        for _ in 0..10 {
            let z1 = random_point(3, &mut rng);
            let z2 = random_point(3, &mut rng);
            let closed = overlap(&z1, &z2, 7).unwrap();
            let brute = dscs(&b, &z1)
                .unwrap()
                .inner_product(&dscs(&b, &z2).unwrap())
                .unwrap();
            assert!((closed - brute).norm() < 1e-10);
        }
    }

    #[test]
    fn parity_is_involutive_and_covariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let b = enumerate_basis(3, 6).unwrap();
        let z = random_point(3, &mut rng);
        let s = dscs(&b, &z).unwrap();

        for j in [2usize, 3] {
            let twice = apply_parity(&apply_parity(&s, j).unwrap(), j).unwrap();
            for (a, t) in s.amplitudes().iter().zip(twice.amplitudes()) {
                assert_eq!(a, t);
            }
            let flipped = dscs(&b, &z.flipped(j).unwrap()).unwrap();
            let acted = apply_parity(&s, j).unwrap();
            for (a, f) in acted.amplitudes().iter().zip(flipped.amplitudes()) {
                assert!((a - f).norm() < TOL);
            }
        }

        assert!(apply_parity(&s, 1).is_err());
        assert!(apply_parity(&s, 4).is_err());

        // The all-level-1 basis state has n_j = 0 for every j >= 2.
        let origin = dscs(&b, &PhasePoint::qutrit(c(0.0, 0.0), c(0.0, 0.0))).unwrap();
        let acted = apply_parity(&origin, 2).unwrap();
        for (a, t) in origin.amplitudes().iter().zip(acted.amplitudes()) {
            assert_eq!(a, t);
        }
    }

    #[test]
    fn cat_at_origin_is_the_coherent_state() {
        let b = enumerate_basis(3, 5).unwrap();
        let z = PhasePoint::qutrit(c(0.0, 0.0), c(0.0, 0.0));
        let cat = dcat(&b, &z).unwrap();
        let coherent = dscs(&b, &z).unwrap();
        for (a, t) in cat.amplitudes().iter().zip(coherent.amplitudes()) {
            assert!((a - t).norm() < TOL);
        }
    }

    #[test]
    fn qubit_cat_reference_amplitudes() {
        // D=2, N=2, alpha=1: amplitudes (1/sqrt2, 0, 1/sqrt2), norm^2 = 1/2.
        let b = enumerate_basis(2, 2).unwrap();
        let cat = dcat(&b, &PhasePoint::qubit(c(1.0, 0.0))).unwrap();
        let inv_sqrt2 = 1.0 / 2f64.sqrt();
        assert!((cat.amplitudes()[0] - c(inv_sqrt2, 0.0)).norm() < TOL);
        assert_eq!(cat.amplitudes()[1], c(0.0, 0.0));
        assert!((cat.amplitudes()[2] - c(inv_sqrt2, 0.0)).norm() < TOL);
    }

    #[test]
    fn qutrit_cat_normalization_closed_form() {
        let b = enumerate_basis(3, 4).unwrap();
        let alpha = c(0.7, 0.0);
        let beta = c(0.0, 0.3);
        let z = PhasePoint::qutrit(alpha, beta);
        let cat = dcat(&b, &z).unwrap();
        assert!((cat.norm() - 1.0).abs() < 1e-10);

        // norm^2 = (L++^4 + L-+^4 + L+-^4 + L--^4) / (4 L++^4).
        let a2 = alpha.norm_sqr();
        let b2 = beta.norm_sqr();
        let lpp = 1.0 + a2 + b2;
        let lmp = 1.0 - a2 + b2;
        let lpm = 1.0 + a2 - b2;
        let lmm = 1.0 - a2 - b2;
        let expect = (lpp.powi(4) + lmp.powi(4) + lpm.powi(4) + lmm.powi(4)) / (4.0 * lpp.powi(4));

        // Rebuild the unnormalized projection to read off its norm.
        let mut raw = vec![C64::new(0.0, 0.0); b.len()];
        for bits in ParityString::all(3) {
            let branch = dscs(&b, &z.flipped_set(&bits).unwrap()).unwrap();
            for (r, a) in raw.iter_mut().zip(branch.amplitudes()) {
                *r += a;
            }
        }
        let raw_norm_sq: f64 = raw.iter().map(|a| a.norm_sqr() / 16.0).sum();
        assert!((raw_norm_sq - expect).abs() < 1e-12);
    }

    #[test]
    fn cat_odd_amplitudes_are_exact_zeros() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for (d, n) in [(2usize, 7u32), (3, 7), (3, 8), (4, 5)] {
            let b = enumerate_basis(d, n).unwrap();
            let z = random_point(d, &mut rng);
            let cat = dcat(&b, &z).unwrap();
            for (occ, amp) in b.states().iter().zip(cat.amplitudes()) {
                if occ[1..].iter().any(|&nk| nk % 2 == 1) {
                    assert_eq!(amp.re, 0.0, "occ {occ:?}");
                    assert_eq!(amp.im, 0.0, "occ {occ:?}");
                }
            }
            assert!((cat.norm() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn cat_is_fixed_by_the_even_projector() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let b = enumerate_basis(3, 6).unwrap();
        let cat = dcat(&b, &random_point(3, &mut rng)).unwrap();
        let mut projected = vec![C64::new(0.0, 0.0); b.len()];
        let strings = ParityString::all(3);
        for bits in &strings {
            let image = apply_parity_string(&cat, bits).unwrap();
            for (p, a) in projected.iter_mut().zip(image.amplitudes()) {
                *p += a / strings.len() as f64;
            }
        }
        for (p, a) in projected.iter().zip(cat.amplitudes()) {
            assert!((p - a).norm() < TOL);
        }
    }

    #[test]
    fn state_dump_has_documented_shape() {
        let b = enumerate_basis(2, 2).unwrap();
        let cat = dcat(&b, &PhasePoint::qubit(c(1.0, 0.0))).unwrap();
        let mut buf = Vec::new();
        write_state_csv(&cat, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], "n_1,n_2,re_amplitude,im_amplitude");
        assert!(lines[1].starts_with("2,0,"));
        assert!(lines[2].starts_with("1,1,0.0000000000000000e0,"));
    }

    #[test]
    fn unnormalized_states_carry_the_flag() {
        let b = enumerate_basis(2, 2).unwrap();
        let bad = vec![c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
        assert!(SymmetricState::new(Arc::clone(&b), bad.clone()).is_err());
        let flagged = SymmetricState::new_unnormalized(Arc::clone(&b), bad).unwrap();
        assert!(!flagged.is_normalized());
    }
}
