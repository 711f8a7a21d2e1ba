//! Classical emulation of moment estimation by eigenvalue sampling.
//!
//! With φ = (|t⟩ − |t′⟩)/√2 and ψ± = (|s⟩ ± φ)/√2, polarization gives
//! ⟨ψ⁺|Aᵐ|ψ⁺⟩ − ⟨ψ⁻|Aᵐ|ψ⁻⟩ = 2⟨s|Aᵐ|φ⟩ = √2·Δ(m), so
//! Δ(m) = (⟨ψ⁺|Aᵐ|ψ⁺⟩ − ⟨ψ⁻|Aᵐ|ψ⁻⟩)/√2. Each term is the m-th moment of the
//! spectral measure of A in that state. Measuring A is replaced by an
//! exact eigendecomposition of the reachable component, and the
//! imperfection of phase estimation by an explicit noise model: with
//! probability 1 − θ the outcome is perturbed by at most η, otherwise it
//! is an arbitrary value in [−λ_max, λ_max].
//!
//! Moments are clipped to [−cᵐ, cᵐ] and reported in units of cᵐ, which
//! keeps values finite for the exponents of interest.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::distributions::{Distribution, Uniform, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::amplitude::ExactAmplitude;
use crate::compiler::CompiledInstance;
use crate::hp;
use crate::rewriting::{RewriteError, StringLabel, Symbol};
use crate::verifier::ReachableGraph;

/// Largest component handled by dense eigendecomposition.
pub const MAX_VERTICES: usize = 4000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EstimatorError {
    #[error("reachable set has at least {0} strings, above the limit of {MAX_VERTICES}")]
    TooLarge(usize),
    #[error("reachable set is not closed under rewriting")]
    Incomplete,
    #[error("state uses a string outside the reachable set")]
    OutsideGraph,
    #[error("{0}")]
    Range(String),
    #[error(transparent)]
    Rewrite(#[from] RewriteError),
}

/// A sparse real state with exact coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub terms: Vec<(StringLabel, ExactAmplitude)>,
}

impl StateVector {
    pub fn basis(s: &[Symbol]) -> Self {
        Self {
            terms: vec![(StringLabel::from(s), ExactAmplitude::one())],
        }
    }

    fn combine(a: &Self, b: &Self, sign: i64) -> Self {
        let mut terms = a.terms.clone();
        for (k, v) in &b.terms {
            let v = ExactAmplitude::from_int(sign) * v.clone();
            match terms.iter_mut().find(|(x, _)| x == k) {
                Some((_, w)) => *w += &v,
                None => terms.push((k.clone(), v)),
            }
        }
        let h = ExactAmplitude::inv_sqrt2();
        terms = terms
            .into_iter()
            .map(|(k, v)| (k, v * h.clone()))
            .filter(|(_, v)| !v.is_zero())
            .collect();
        terms.sort_by(|x, y| x.0.cmp(&y.0));
        Self { terms }
    }

    pub fn inner(&self, other: &Self) -> ExactAmplitude {
        let mut acc = ExactAmplitude::zero();
        for (k, a) in &self.terms {
            if let Some((_, b)) = other.terms.iter().find(|(x, _)| x == k) {
                acc += &(a * b);
            }
        }
        acc
    }

    /// Dense coordinates in the vertex order of a graph.
    pub fn dense(&self, graph: &ReachableGraph) -> Result<DVector<f64>, EstimatorError> {
        let mut v = DVector::zeros(graph.len());
        for (k, a) in &self.terms {
            let i = graph.id(k).ok_or(EstimatorError::OutsideGraph)?;
            v[i as usize] += a.to_f64();
        }
        Ok(v)
    }
}

/// φ, ψ⁺ and ψ⁻.
#[derive(Debug, Clone, PartialEq)]
pub struct States {
    pub s: StateVector,
    pub phi: StateVector,
    pub plus: StateVector,
    pub minus: StateVector,
}

pub fn build_states(s: &[Symbol], t: &[Symbol], t_prime: &[Symbol]) -> States {
    let s = StateVector::basis(s);
    let phi = StateVector::combine(&StateVector::basis(t), &StateVector::basis(t_prime), -1);
    let plus = StateVector::combine(&s, &phi, 1);
    let minus = StateVector::combine(&s, &phi, -1);
    States {
        s,
        phi,
        plus,
        minus,
    }
}

/// Error-free transformations for double-double arithmetic.
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

#[derive(Debug, Clone, Copy, Default)]
struct Dd(f64, f64);

impl Dd {
    fn add(self, (h, l): (f64, f64)) -> Self {
        let (s, e) = two_sum(self.0, h);
        let (s, e2) = two_sum(s, e + self.1 + l);
        Dd(s, e2)
    }

    fn div(self, d: Dd) -> Dd {
        let q = self.0 / d.0;
        let (p, pe) = two_prod(q, d.0);
        let r = ((self.0 - p) - pe + self.1 - q * d.1) / d.0;
        let (s, e) = two_sum(q, r);
        Dd(s, e)
    }
}

/// Eigendecomposition of the adjacency matrix of a closed component,
/// with eigenvalues refined to double-double by Rayleigh quotients.
#[derive(Debug, Clone)]
pub struct Decomposition {
    /// Leading part of each eigenvalue.
    pub eigenvalues: Vec<f64>,
    /// Trailing part: λ_j = eigenvalues[j] + corrections[j].
    pub corrections: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

impl Decomposition {
    pub fn new(graph: &ReachableGraph) -> Result<Self, EstimatorError> {
        let n = graph.len();
        if n > MAX_VERTICES {
            return Err(EstimatorError::TooLarge(n));
        }
        if !graph.complete {
            return Err(EstimatorError::Incomplete);
        }
        let mut a = DMatrix::<f64>::zeros(n, n);
        for (u, nb) in graph.adjacency.iter().enumerate() {
            for &v in nb {
                a[(u, v as usize)] = 1.0;
            }
        }
        let eig = SymmetricEigen::new(a);
        let mut eigenvalues = Vec::with_capacity(n);
        let mut corrections = Vec::with_capacity(n);
        for j in 0..n {
            let v = eig.eigenvectors.column(j);
            let mut num = Dd::default();
            let mut den = Dd::default();
            for (u, nb) in graph.adjacency.iter().enumerate() {
                den = den.add(two_prod(v[u], v[u]));
                for &w in nb {
                    num = num.add(two_prod(v[u], v[w as usize]));
                }
            }
            let rq = num.div(den);
            eigenvalues.push(rq.0);
            corrections.push(rq.1);
        }
        Ok(Self {
            eigenvalues,
            corrections,
            vectors: eig.eigenvectors,
        })
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Coefficients ⟨e_j|state⟩.
    fn project(&self, v: &DVector<f64>) -> DVector<f64> {
        self.vectors.tr_mul(v)
    }

    pub fn measure(&self, graph: &ReachableGraph, state: &StateVector) -> Result<SpectralMeasure, EstimatorError> {
        let c = self.project(&state.dense(graph)?);
        Ok(SpectralMeasure {
            eigenvalues: self.eigenvalues.clone(),
            corrections: self.corrections.clone(),
            probabilities: c.iter().map(|x| x * x).collect(),
        })
    }

    /// p⁺_j − p⁻_j = 2⟨s|e_j⟩⟨e_j|φ⟩, computed without forming either
    /// probability so that nothing cancels.
    pub fn difference(&self, graph: &ReachableGraph, states: &States) -> Result<Vec<f64>, EstimatorError> {
        let a = self.project(&states.s.dense(graph)?);
        let b = self.project(&states.phi.dense(graph)?);
        Ok(a.iter().zip(b.iter()).map(|(x, y)| 2.0 * x * y).collect())
    }
}

/// Eigenvalues with the probability of observing each.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralMeasure {
    pub eigenvalues: Vec<f64>,
    /// Trailing double-double parts of the eigenvalues (zero when
    /// unknown).
    pub corrections: Vec<f64>,
    pub probabilities: Vec<f64>,
}

impl SpectralMeasure {
    pub fn new(eigenvalues: Vec<f64>, probabilities: Vec<f64>) -> Self {
        Self {
            corrections: vec![0.0; eigenvalues.len()],
            eigenvalues,
            probabilities,
        }
    }

    pub fn total(&self) -> f64 {
        self.probabilities.iter().sum()
    }

    /// Σ p_j λ_jᵏ, unclipped.
    pub fn moment(&self, k: usize) -> f64 {
        self.eigenvalues
            .iter()
            .zip(&self.probabilities)
            .map(|(l, p)| p * l.powi(k as i32))
            .sum()
    }

    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

/// Spectral measure of the adjacency matrix of a closed component in
/// the given state.
pub fn spectral_measure(graph: &ReachableGraph, state: &StateVector) -> Result<SpectralMeasure, EstimatorError> {
    Decomposition::new(graph)?.measure(graph, state)
}

/// f(x)/cᵐ with f(x) = xᵐ on [−c, c] and (sign x)ᵐ·cᵐ outside, for x
/// given as an unevaluated sum `hi + lo`.
///
/// For odd m this is cᵐ above c and −cᵐ below −c.
pub fn clip_dd(hi: f64, lo: f64, m: usize, c: f64) -> f64 {
    let negative = hi < 0.0;
    let (ahi, alo) = if negative { (-hi, -lo) } else { (hi, lo) };
    let sign = if negative && m % 2 == 1 { -1.0 } else { 1.0 };
    // (|x| − c)/c, with the cancellation done before rounding.
    let r = ((ahi - c) + alo) / c;
    if r >= 0.0 {
        return sign;
    }
    if m == 0 {
        return 1.0;
    }
    sign * (m as f64 * r.ln_1p()).exp()
}

pub fn clip(x: f64, m: usize, c: f64) -> f64 {
    clip_dd(x, 0.0, m, c)
}

/// Σ_j p_j f(λ_j)/cᵐ.
pub fn clipped_moment(measure: &SpectralMeasure, m: usize, c: f64) -> f64 {
    let terms: Vec<f64> = measure
        .eigenvalues
        .iter()
        .zip(&measure.corrections)
        .zip(&measure.probabilities)
        .map(|((&l, &e), &p)| p * clip_dd(l, e, m, c))
        .collect();
    pairwise_sum(&terms)
}

/// Σ_j (p⁺_j − p⁻_j) f(λ_j)/(√2·cᵐ), which equals Δ(m)/cᵐ when clipping
/// is inert.
pub fn clipped_difference(decomposition: &Decomposition, difference: &[f64], m: usize, c: f64) -> f64 {
    let terms: Vec<f64> = difference
        .iter()
        .enumerate()
        .map(|(j, d)| d * clip_dd(decomposition.eigenvalues[j], decomposition.corrections[j], m, c))
        .collect();
    std::f64::consts::FRAC_1_SQRT_2 * pairwise_sum(&terms)
}

pub fn pairwise_sum(x: &[f64]) -> f64 {
    match x.len() {
        0 => 0.0,
        1 => x[0],
        n if n <= 16 => x.iter().sum(),
        n => pairwise_sum(&x[..n / 2]) + pairwise_sum(&x[n / 2..]),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoiseModel {
    pub eta: f64,
    pub theta: f64,
}

impl NoiseModel {
    pub fn new(eta: f64, theta: f64) -> Result<Self, EstimatorError> {
        if !(eta >= 0.0 && eta.is_finite()) {
            return Err(EstimatorError::Range(format!("η must be finite and nonnegative, got {eta}")));
        }
        if !(0.0..1.0).contains(&theta) {
            return Err(EstimatorError::Range(format!("θ must lie in [0, 1), got {theta}")));
        }
        Ok(Self { eta, theta })
    }

    /// Bound on |E f(noisy λ) − Σ p_j f(λ_j)| in units of cᵐ:
    /// η·m·c^{m−1} + 2cᵐθ divided by cᵐ.
    pub fn bias_bound(&self, m: usize, c: f64) -> f64 {
        self.eta * m as f64 / c + 2.0 * self.theta
    }
}

/// Noise parameters whose bias bound is ε/2 in units of cᵐ.
pub fn choose_noise(epsilon: f64, m: usize, c: f64) -> Result<NoiseModel, EstimatorError> {
    if !(epsilon > 0.0 && epsilon <= 1.0 && c > 0.0) || m == 0 {
        return Err(EstimatorError::Range(format!(
            "need ε ∈ (0, 1], m ≥ 1 and c > 0, got ε = {epsilon}, m = {m}, c = {c}"
        )));
    }
    NoiseModel::new(epsilon * c / (4.0 * m as f64), epsilon / 8.0)
}

/// Samples needed for a half-width of ε/2 at confidence 1 − δ on a mean
/// of values in [−1, 1].
///
/// Hoeffding's inequality for N independent values in an interval of
/// width 2 gives P(|mean − E| ≥ u) ≤ 2·exp(−N u²/2). Setting u = ε/2 and
/// the right side to δ yields N = 8·ln(2/δ)/ε².
pub fn hoeffding_samples(epsilon: f64, delta: f64) -> Result<u64, EstimatorError> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(EstimatorError::Range(format!("ε must lie in (0, 1], got {epsilon}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(EstimatorError::Range(format!("δ must lie in (0, 1), got {delta}")));
    }
    Ok((8.0 * (2.0 / delta).ln() / (epsilon * epsilon)).ceil() as u64)
}

/// Hoeffding half-width for N values in [−1, 1] at confidence 1 − δ.
pub fn hoeffding_half_width(samples: u64, delta: f64) -> f64 {
    (2.0 * (2.0 / delta).ln() / samples as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoisyEstimate {
    /// (mean⁺ − mean⁻)/√2, an estimate of Δ(m)/cᵐ.
    pub estimate: f64,
    pub mean_plus: f64,
    pub mean_minus: f64,
    /// Bias bound of the combined estimate.
    pub bias_bound: f64,
    /// Statistical half-width of the combined estimate.
    pub half_width: f64,
    /// Confidence of the half-width.
    pub confidence: f64,
    pub samples: u64,
}

impl NoisyEstimate {
    pub fn error_bound(&self) -> f64 {
        self.bias_bound + self.half_width
    }
}

/// Number of independent random streams; fixed so results do not depend
/// on the number of worker threads.
const STREAMS: u64 = 64;
const BLOCK: usize = 4096;

/// Sample count used when none is given and the Hoeffding count is
/// larger.
pub const DEFAULT_SAMPLE_CAP: u64 = 1_000_000;

fn sample_mean(
    measure: &SpectralMeasure,
    m: usize,
    c: f64,
    noise: NoiseModel,
    samples: u64,
    seed: u64,
    salt: u64,
) -> f64 {
    if samples == 0 {
        return 0.0;
    }
    let weights = WeightedIndex::new(measure.probabilities.iter().map(|p| p.max(0.0)))
        .expect("measure has positive mass");
    let radius = measure.spectral_radius();
    let (up, down) = (clip(radius, m, c), clip(-radius, m, c));
    let sums: Vec<f64> = (0..STREAMS)
        .into_par_iter()
        .map(|stream| {
            let count = samples / STREAMS + u64::from(stream < samples % STREAMS);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(salt * STREAMS + stream);
            let jitter = Uniform::new_inclusive(-noise.eta, noise.eta);
            // Blocked pairwise summation with bounded memory.
            let mut blocks = Vec::new();
            let mut block = Vec::with_capacity(BLOCK);
            for _ in 0..count {
                let j = weights.sample(&mut rng);
                let (l, e) = (measure.eigenvalues[j], measure.corrections[j]);
                let value = if rng.gen::<f64>() < noise.theta {
                    // Adversarial failure: the end of the spectrum farthest
                    // from the correct value.
                    let exact = clip_dd(l, e, m, c);
                    if (up - exact).abs() >= (down - exact).abs() {
                        up
                    } else {
                        down
                    }
                } else {
                    clip_dd(l + jitter.sample(&mut rng), e, m, c)
                };
                block.push(value);
                if block.len() == BLOCK {
                    blocks.push(pairwise_sum(&block));
                    block.clear();
                }
            }
            blocks.push(pairwise_sum(&block));
            pairwise_sum(&blocks)
        })
        .collect();
    pairwise_sum(&sums) / samples as f64
}

/// Monte Carlo estimate of Δ(m)/cᵐ from the two measures.
///
/// The bias bound is the sum of the per-state bounds divided by √2, and
/// the half-width is the sum of the per-state Hoeffding half-widths at
/// confidence 1 − δ each, divided by √2, so that the combined statement
/// holds with probability at least 1 − 2δ.
#[allow(clippy::too_many_arguments)]
pub fn noisy_estimate(
    plus: &SpectralMeasure,
    minus: &SpectralMeasure,
    m: usize,
    c: f64,
    noise: NoiseModel,
    samples: u64,
    seed: u64,
    delta: f64,
) -> Result<NoisyEstimate, EstimatorError> {
    if samples == 0 {
        return Err(EstimatorError::Range("at least one sample is required".into()));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(EstimatorError::Range(format!("δ must lie in (0, 1), got {delta}")));
    }
    let mean_plus = sample_mean(plus, m, c, noise, samples, seed, 0);
    let mean_minus = sample_mean(minus, m, c, noise, samples, seed, 1);
    let r = std::f64::consts::FRAC_1_SQRT_2;
    Ok(NoisyEstimate {
        estimate: r * (mean_plus - mean_minus),
        mean_plus,
        mean_minus,
        bias_bound: r * 2.0 * noise.bias_bound(m, c),
        half_width: r * 2.0 * hoeffding_half_width(samples, delta),
        confidence: 1.0 - 2.0 * delta,
        samples,
    })
}

/// Δ/cᵐ for an exact integer Δ, rounded once.
pub fn scaled_exact(delta: &num_bigint::BigInt, m: usize, c: f64) -> f64 {
    let p = hp::precision(192);
    let base = astro_float::BigFloat::from_f64(c, p);
    let denom = base.powi(m, p, hp::RM);
    let q = hp::from_bigint(delta).div(&denom, p, hp::RM);
    hp::to_f64(&q)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateOptions {
    pub noise: Option<NoiseModel>,
    pub samples: Option<u64>,
    pub seed: u64,
    pub delta: f64,
    pub vertex_budget: usize,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        Self {
            noise: None,
            samples: None,
            seed: 0,
            delta: 0.05,
            vertex_budget: MAX_VERTICES,
        }
    }
}

/// Exact and sampled estimates of Δ(m)/cᵐ for a compiled instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InstanceEstimate {
    pub m: usize,
    pub c: f64,
    pub epsilon: f64,
    pub vertices: usize,
    pub spectral_radius: f64,
    /// Eigenvalues beyond c, where clipping acts.
    pub clipped_eigenvalues: usize,
    /// Σ(p⁺ − p⁻)f(λ)/(√2·cᵐ) from the exact measures.
    pub exact: f64,
    pub noise: NoiseModel,
    pub sampled: NoisyEstimate,
    /// Samples per state for a half-width of ε/2.
    pub required_samples: u64,
    /// Sign of the sampled estimate once it is separated from zero.
    pub decision: Option<bool>,
}

/// The closed component of an instance with its spectral data.
#[derive(Debug, Clone)]
pub struct PreparedInstance {
    pub graph: ReachableGraph,
    pub decomposition: Decomposition,
    pub states: States,
    pub plus: SpectralMeasure,
    pub minus: SpectralMeasure,
    /// p⁺_j − p⁻_j.
    pub difference: Vec<f64>,
}

impl PreparedInstance {
    /// Σ(p⁺ − p⁻)f(λ)/(√2·cᵐ).
    pub fn exact(&self, m: usize, c: f64) -> f64 {
        clipped_difference(&self.decomposition, &self.difference, m, c)
    }
}

/// Builds the component of s, t and t′ (at most `budget` strings, capped
/// at [`MAX_VERTICES`]) and decomposes it.
pub fn prepare(instance: &CompiledInstance, budget: usize) -> Result<PreparedInstance, EstimatorError> {
    let (s, t, tp) = instance.strings()?;
    let budget = budget.min(MAX_VERTICES);
    let graph = match ReachableGraph::build(&instance.system, &[&s, &t, &tp], None, budget) {
        Ok(g) => g,
        Err(RewriteError::VertexBudget(_)) => return Err(EstimatorError::TooLarge(budget + 1)),
        Err(e) => return Err(e.into()),
    };
    let decomposition = Decomposition::new(&graph)?;
    let states = build_states(&s, &t, &tp);
    let difference = decomposition.difference(&graph, &states)?;
    let plus = decomposition.measure(&graph, &states.plus)?;
    let minus = decomposition.measure(&graph, &states.minus)?;
    Ok(PreparedInstance {
        graph,
        decomposition,
        states,
        plus,
        minus,
        difference,
    })
}

pub fn estimate_instance(instance: &CompiledInstance, options: &EstimateOptions) -> Result<InstanceEstimate, EstimatorError> {
    let prepared = prepare(instance, options.vertex_budget)?;
    let (m, c, epsilon) = (instance.m, instance.c, instance.epsilon);
    let exact = prepared.exact(m, c);
    let noise = match options.noise {
        Some(n) => n,
        None => choose_noise(epsilon, m, c)?,
    };
    let required_samples = hoeffding_samples(epsilon, options.delta)?;
    let samples = options.samples.unwrap_or(required_samples.min(DEFAULT_SAMPLE_CAP));
    let sampled = noisy_estimate(
        &prepared.plus,
        &prepared.minus,
        m,
        c,
        noise,
        samples,
        options.seed,
        options.delta,
    )?;
    let decision = (sampled.estimate.abs() > sampled.error_bound()).then_some(sampled.estimate > 0.0);
    Ok(InstanceEstimate {
        m,
        c,
        epsilon,
        vertices: prepared.graph.len(),
        spectral_radius: prepared.decomposition.spectral_radius(),
        clipped_eigenvalues: prepared
            .decomposition
            .eigenvalues
            .iter()
            .filter(|l| l.abs() > c)
            .count(),
        exact,
        noise,
        sampled,
        required_samples,
        decision,
    })
}
