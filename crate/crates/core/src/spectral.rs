//! Spectral data of the ℓ-vertex path graph 𝒫.
//!
//! λ_j = 2cos(π(j+1)/(ℓ+1)), e_{j,k} = √(2/(ℓ+1))·sin(π(j+1)(k+1)/(ℓ+1))
//! and w_j = e_{j,0}·e_{j,ℓ−1}, so that (𝒫ᵐ)_{0,ℓ−1} = Σ_j w_j λ_jᵐ.
//! The corner entry is computed twice: exactly by integer dynamic
//! programming, and from the spectral sum in arbitrary precision. The
//! sum cancels down to 1 from terms as large as λ₀ᵐ, so floating point
//! at machine precision cannot reproduce it once m grows past a few
//! dozen.

use std::f64::consts::PI;

use astro_float::BigFloat;
use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hp;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectralError {
    #[error("path length must be at least 2, got {0}")]
    PathTooShort(usize),
    #[error("index {index} outside 0..{ell}")]
    IndexOutOfRange { index: usize, ell: usize },
    #[error("m = {m} has the parity of ℓ = {ell}; the corner entry vanishes")]
    Parity { ell: usize, m: usize },
    #[error("m = {m} is below ℓ − 1 = {}", .ell - 1)]
    TooShort { ell: usize, m: usize },
    #[error("ℓ̃ must be at least 4, got {0}")]
    ConvergenceDomain(usize),
}

fn check(ell: usize, idx: &[usize]) -> Result<(), SpectralError> {
    if ell < 2 {
        return Err(SpectralError::PathTooShort(ell));
    }
    for &index in idx {
        if index >= ell {
            return Err(SpectralError::IndexOutOfRange { index, ell });
        }
    }
    Ok(())
}

/// λ_j.
pub fn eigenvalue(ell: usize, j: usize) -> Result<f64, SpectralError> {
    check(ell, &[j])?;
    Ok(2.0 * (PI * (j + 1) as f64 / (ell + 1) as f64).cos())
}

/// e_{j,k}.
pub fn eigvec_entry(ell: usize, j: usize, k: usize) -> Result<f64, SpectralError> {
    check(ell, &[j, k])?;
    let n = (ell + 1) as f64;
    // Reduce the integer angle numerator modulo 2(ℓ+1) before scaling.
    let num = ((j + 1) * (k + 1)) % (2 * (ell + 1));
    Ok((2.0 / n).sqrt() * (PI * num as f64 / n).sin())
}

/// w_j = e_{j,0}·e_{j,ℓ−1}.
pub fn weight(ell: usize, j: usize) -> Result<f64, SpectralError> {
    Ok(eigvec_entry(ell, j, 0)? * eigvec_entry(ell, j, ell - 1)?)
}

/// Eigenvalues and weights of one path, with λ₀ and λ₁ cached.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSpectrum {
    pub ell: usize,
    pub eigenvalues: Vec<f64>,
    pub weights: Vec<f64>,
    pub lambda0: f64,
    pub lambda1: f64,
}

impl PathSpectrum {
    pub fn new(ell: usize) -> Result<Self, SpectralError> {
        check(ell, &[])?;
        let eigenvalues: Vec<f64> = (0..ell).map(|j| eigenvalue(ell, j)).collect::<Result<_, _>>()?;
        let weights: Vec<f64> = (0..ell).map(|j| weight(ell, j)).collect::<Result<_, _>>()?;
        Ok(Self {
            ell,
            lambda0: eigenvalues[0],
            lambda1: eigenvalues[1],
            eigenvalues,
            weights,
        })
    }

    pub fn w0(&self) -> f64 {
        self.weights[0]
    }
}

/// Exact (𝒫ᵐ)_{0,ℓ−1} by iterating v′_k = v_{k−1} + v_{k+1} from e₀.
pub fn corner_exact(ell: usize, m: usize) -> BigInt {
    let mut dp = PathWalk::new(ell);
    for _ in 0..m {
        dp.step();
    }
    dp.corner().clone()
}

/// Column 𝒫ᵐe₀ advanced one step at a time.
#[derive(Debug, Clone)]
struct PathWalk {
    v: Vec<BigInt>,
    scratch: Vec<BigInt>,
}

impl PathWalk {
    fn new(ell: usize) -> Self {
        let mut v = vec![BigInt::zero(); ell];
        v[0] = BigInt::from(1);
        Self {
            scratch: v.clone(),
            v,
        }
    }

    fn step(&mut self) {
        let l = self.v.len();
        for k in 0..l {
            let mut x = BigInt::zero();
            if k > 0 {
                x += &self.v[k - 1];
            }
            if k + 1 < l {
                x += &self.v[k + 1];
            }
            self.scratch[k] = x;
        }
        std::mem::swap(&mut self.v, &mut self.scratch);
    }

    fn corner(&self) -> &BigInt {
        &self.v[self.v.len() - 1]
    }
}

/// Both evaluations of one corner entry.
#[derive(Debug, Clone)]
pub struct CornerEntry {
    pub ell: usize,
    pub m: usize,
    pub exact: BigInt,
    /// Σ_j w_j λ_jᵐ.
    pub spectral: BigFloat,
    /// Σ_j |w_j λ_jᵐ|, the scale against which rounding is measured.
    pub scale: BigFloat,
}

impl CornerEntry {
    pub fn spectral_f64(&self) -> f64 {
        hp::to_f64(&self.spectral)
    }

    /// |spectral − exact|, relative to |exact| when it is nonzero and
    /// to the term scale otherwise.
    pub fn deviation(&self) -> f64 {
        let p = self.spectral.precision().unwrap_or(128).max(128);
        let exact = hp::from_bigint(&self.exact);
        let diff = hp::abs(&self.spectral.sub(&exact, p, hp::RM));
        if diff.is_zero() {
            return 0.0;
        }
        let reference = if self.exact.is_zero() {
            self.scale.clone()
        } else {
            hp::abs(&exact)
        };
        if reference.is_zero() {
            return f64::INFINITY;
        }
        (hp::log2_abs(&diff) - hp::log2_abs(&reference)).exp2()
    }

    pub fn agrees(&self, tolerance: f64) -> bool {
        self.deviation() <= tolerance
    }
}

/// High-precision eigenvalues and weights of one path.
struct HpSpectrum {
    lambdas: Vec<BigFloat>,
    weights: Vec<BigFloat>,
}

impl HpSpectrum {
    fn new(ell: usize, p: usize) -> Self {
        let mut cc = hp::consts();
        let pi = cc.pi(p, hp::RM);
        let n = BigFloat::from_word((ell + 1) as u64, p);
        let unit = pi.div(&n, p, hp::RM);
        let norm = BigFloat::from_word(2, p).div(&n, p, hp::RM);
        let two = BigFloat::from_word(2, p);
        let mut lambdas = Vec::with_capacity(ell);
        let mut weights = Vec::with_capacity(ell);
        for j in 0..ell {
            let angle = |k: usize| {
                let num = ((j + 1) * (k + 1)) % (2 * (ell + 1));
                unit.mul(&BigFloat::from_word(num as u64, p), p, hp::RM)
            };
            let first = angle(0);
            let lambda = two.mul(&first.cos(p, hp::RM, &mut cc), p, hp::RM);
            let s0 = first.sin(p, hp::RM, &mut cc);
            let s1 = angle(ell - 1).sin(p, hp::RM, &mut cc);
            let w = norm.mul(&s0, p, hp::RM).mul(&s1, p, hp::RM);
            lambdas.push(lambda);
            weights.push(w);
        }
        Self { lambdas, weights }
    }
}

/// Working precision for spectral sums with m ≤ `m_max` on the ℓ-path.
///
/// The sum is worst conditioned at the first nonzero entry, m = ℓ−1,
/// where it equals 1 while the terms reach λ₀^{ℓ−1} < 2^{ℓ−1}; from there
/// the ratio of term scale to value only shrinks. Rounding errors grow
/// linearly in the number of multiplications.
pub fn sweep_precision(ell: usize, m_max: usize) -> usize {
    let growth = usize::BITS - (m_max + ell + 1).leading_zeros();
    hp::precision(ell + 96 + growth as usize)
}

/// Iterates corner entries for m = 0, 1, 2, … with a shared integer DP
/// and incrementally updated spectral terms.
pub struct CornerSweep {
    ell: usize,
    m: usize,
    p: usize,
    dp: PathWalk,
    lambdas: Vec<BigFloat>,
    terms: Vec<BigFloat>,
    /// λ₀ᵐ.
    upper: BigFloat,
    w0: BigFloat,
    spectrum: PathSpectrum,
}

impl CornerSweep {
    pub fn new(ell: usize, m_max: usize) -> Result<Self, SpectralError> {
        check(ell, &[])?;
        let p = sweep_precision(ell, m_max);
        let hp_spectrum = HpSpectrum::new(ell, p);
        Ok(Self {
            ell,
            m: 0,
            p,
            dp: PathWalk::new(ell),
            upper: BigFloat::from_word(1, p),
            w0: hp_spectrum.weights[0].clone(),
            terms: hp_spectrum.weights,
            lambdas: hp_spectrum.lambdas,
            spectrum: PathSpectrum::new(ell)?,
        })
    }

    pub fn precision(&self) -> usize {
        self.p
    }

    /// Bounds for the entry the next call to `next` returns, when m has
    /// the parity opposite to ℓ and m ≥ ℓ − 1.
    pub fn bounds(&self) -> Option<Bounds> {
        if self.m % 2 == self.ell % 2 || self.m + 1 < self.ell {
            return None;
        }
        Some(Bounds {
            upper: self.upper.clone(),
            lower: self.upper.mul(&self.w0, self.p, hp::RM),
            lower_valid: lower_valid_for(&self.spectrum, self.m),
        })
    }

    fn entry(&self) -> CornerEntry {
        let p = self.p;
        let mut sum = BigFloat::from_word(0, p);
        let mut scale = BigFloat::from_word(0, p);
        for t in &self.terms {
            sum = sum.add(t, p, hp::RM);
            scale = scale.add(&hp::abs(t), p, hp::RM);
        }
        CornerEntry {
            ell: self.ell,
            m: self.m,
            exact: self.dp.corner().clone(),
            spectral: sum,
            scale,
        }
    }
}

impl Iterator for CornerSweep {
    type Item = CornerEntry;

    fn next(&mut self) -> Option<CornerEntry> {
        let out = self.entry();
        self.m += 1;
        self.dp.step();
        self.upper = self.upper.mul(&self.lambdas[0], self.p, hp::RM);
        for (t, l) in self.terms.iter_mut().zip(&self.lambdas) {
            *t = t.mul(l, self.p, hp::RM);
        }
        Some(out)
    }
}

/// (𝒫ᵐ)_{0,ℓ−1} exactly and as a spectral sum.
pub fn corner_entry(ell: usize, m: usize) -> Result<CornerEntry, SpectralError> {
    check(ell, &[])?;
    let p = sweep_precision(ell.max(m + 1), m);
    let spectrum = HpSpectrum::new(ell, p);
    let mut sum = BigFloat::from_word(0, p);
    let mut scale = BigFloat::from_word(0, p);
    for (l, w) in spectrum.lambdas.iter().zip(&spectrum.weights) {
        let t = w.mul(&l.powi(m, p, hp::RM), p, hp::RM);
        scale = scale.add(&hp::abs(&t), p, hp::RM);
        sum = sum.add(&t, p, hp::RM);
    }
    Ok(CornerEntry {
        ell,
        m,
        exact: corner_exact(ell, m),
        spectral: sum,
        scale,
    })
}

/// (𝒫ᵐ)_{0,ℓ−1}/λ₀ᵐ = Σ_j w_j (λ_j/λ₀)ᵐ, with an absolute error bound.
///
/// Meant for large m, where the exact entry has too many digits to
/// compute and only the two extreme eigenvalues ±λ₀ contribute
/// noticeably. Each term carries a relative rounding error of at most
/// (m + 8)·2^{−p}, and Σ|w_j| ≤ 1.
pub fn normalized_corner(ell: usize, m: usize) -> Result<(BigFloat, f64), SpectralError> {
    check(ell, &[])?;
    let p = 256;
    let spectrum = HpSpectrum::new(ell, p);
    let l0 = spectrum.lambdas[0].clone();
    let mut sum = BigFloat::from_word(0, p);
    for (l, w) in spectrum.lambdas.iter().zip(&spectrum.weights) {
        let ratio = l.div(&l0, p, hp::RM);
        sum = sum.add(&w.mul(&ratio.powi(m, p, hp::RM), p, hp::RM), p, hp::RM);
    }
    let err = (m as f64 + 8.0) * ell as f64 * 2f64.powi(-(p as i32));
    Ok((sum, err))
}

/// Bounds λ₀ᵐ·w₀ ≤ (𝒫ᵐ)_{0,ℓ−1} ≤ λ₀ᵐ. The lower bound is only claimed
/// when (λ₁/λ₀)ᵐ ≤ w₀.
#[derive(Debug, Clone)]
pub struct Bounds {
    pub upper: BigFloat,
    pub lower: BigFloat,
    pub lower_valid: bool,
}

/// Relative slack for comparing exact integers against bounds built
/// from rounded eigenvalues (λ₀ = 1 exactly when ℓ = 2).
const BOUND_SLACK_BITS: i32 = 100;

impl Bounds {
    fn slack(p: usize, positive: bool) -> BigFloat {
        let eps = BigFloat::from_f64(2f64.powi(-BOUND_SLACK_BITS), p);
        let one = BigFloat::from_word(1, p);
        if positive {
            one.add(&eps, p, hp::RM)
        } else {
            one.sub(&eps, p, hp::RM)
        }
    }

    pub fn upper_holds(&self, exact: &BigInt) -> bool {
        let p = 256;
        let limit = self.upper.mul(&Self::slack(p, true), p, hp::RM);
        hp::from_bigint(exact).cmp(&limit).is_some_and(|c| c <= 0)
    }

    pub fn lower_holds(&self, exact: &BigInt) -> bool {
        let p = 256;
        let limit = self.lower.mul(&Self::slack(p, false), p, hp::RM);
        hp::from_bigint(exact).cmp(&limit).is_some_and(|c| c >= 0)
    }
}

pub fn bounds(ell: usize, m: usize) -> Result<Bounds, SpectralError> {
    check(ell, &[])?;
    if m % 2 == ell % 2 {
        return Err(SpectralError::Parity { ell, m });
    }
    if m + 1 < ell {
        return Err(SpectralError::TooShort { ell, m });
    }
    let p = 256;
    let spectrum = HpSpectrum::new(ell, p);
    let upper = spectrum.lambdas[0].powi(m, p, hp::RM);
    let lower = upper.mul(&spectrum.weights[0], p, hp::RM);
    Ok(Bounds {
        upper,
        lower,
        lower_valid: lower_bound_valid(ell, m),
    })
}

/// (λ₁/λ₀)ᵐ ≤ w₀, with λ₁ the second largest eigenvalue (signed; for
/// ℓ = 2 there is no eigenvalue strictly between λ₀ and λ_{ℓ−1} and the
/// bound holds for every odd m).
pub fn lower_bound_valid(ell: usize, m: usize) -> bool {
    lower_valid_for(&PathSpectrum::new(ell).expect("ell ≥ 2"), m)
}

fn lower_valid_for(s: &PathSpectrum, m: usize) -> bool {
    let ratio = s.lambda1 / s.lambda0;
    let lhs = if ratio.abs() < 1e-12 {
        0.0
    } else {
        ratio.powi(m as i32)
    };
    lhs <= s.w0()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MMode {
    /// (ℓ+1)³.
    #[default]
    Paper,
    /// Smallest m ≥ ℓ−1 of the right parity with (λ₁/λ₀)ᵐ ≤ w₀.
    Minimal,
    /// Smallest m ≥ ℓ−1 of the right parity.
    SignOnly,
}

impl std::str::FromStr for MMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "paper" => Ok(MMode::Paper),
            "minimal" => Ok(MMode::Minimal),
            "sign_only" | "sign-only" => Ok(MMode::SignOnly),
            other => Err(format!(
                "unknown m mode {other:?}, expected paper, minimal or sign_only"
            )),
        }
    }
}

/// Exponent m for an orbit of length ℓ. Always m ≢ ℓ (mod 2).
pub fn choose_m(ell: usize, mode: MMode) -> Result<usize, SpectralError> {
    check(ell, &[])?;
    let first = if (ell - 1) % 2 != ell % 2 { ell - 1 } else { ell };
    Ok(match mode {
        MMode::Paper => (ell + 1).pow(3),
        MMode::SignOnly => first,
        MMode::Minimal => {
            let mut m = first;
            while !lower_bound_valid(ell, m) {
                m += 2;
            }
            m
        }
    })
}

/// ((1−(π/ℓ̃)²)/(1−½(π/ℓ̃)²))^{ℓ̃²}, which tends to e^{−π²/2}.
pub fn convergence_check(ell_tilde: usize) -> Result<f64, SpectralError> {
    if ell_tilde < 4 {
        return Err(SpectralError::ConvergenceDomain(ell_tilde));
    }
    let x = (PI / ell_tilde as f64).powi(2);
    let ratio = (1.0 - x) / (1.0 - 0.5 * x);
    Ok(((ell_tilde as f64).powi(2) * ratio.ln()).exp())
}

/// Exact nonnegativity check helper for tests: sign of the exact entry.
pub fn corner_sign(ell: usize, m: usize) -> i32 {
    let v = corner_exact(ell, m);
    if v.is_positive() {
        1
    } else if v.is_negative() {
        -1
    } else {
        0
    }
}
