//! Cross-entropy benchmarking analytics.
//!
//! Bitstring sampling from a state, sampled and exact cross entropies, the
//! maximum-entropy tilt `p_V ∝ p_U^μ`, the `α` metrics and the likelihood
//! statistic `ψ`. All logarithms are natural.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{map_indexed, Exec};
use crate::io::fmt_e;
use crate::linalg::{ksum, KahanSum};
use crate::rng::SeedSpec;
use crate::special::{digamma, trigamma, EULER_GAMMA};
use crate::state::StateVector;

/// Floor applied to `log p` before accumulation.
pub const LOG_FLOOR: f64 = -745.0;

const BLOCK: usize = 1 << 16;

/// Where a bitstring sample came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SampleSource {
    SimulatedFromState,
    Uniform,
    ExternalFile,
}

/// `m` bitstrings on `L` qubits, stored as integers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BitstringSample {
    qubits: usize,
    samples: Vec<u64>,
    source: SampleSource,
}

impl BitstringSample {
    pub fn new(qubits: usize, samples: Vec<u64>, source: SampleSource) -> Result<Self> {
        if qubits == 0 || qubits > 63 {
            return Err(Error::Contract(format!("qubit count {qubits} outside 1..=63")));
        }
        if samples.is_empty() {
            return Err(Error::Contract("a sample needs at least one bitstring".into()));
        }
        if let Some(&bad) = samples.iter().find(|&&s| s >> qubits != 0) {
            return Err(Error::Contract(format!("bitstring {bad} does not fit in {qubits} qubits")));
        }
        Ok(BitstringSample { qubits, samples, source })
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.qubits
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[u64] {
        &self.samples
    }

    pub fn source(&self) -> SampleSource {
        self.source
    }

    /// `q_{L−1}⋯q_0` as text.
    pub fn format(&self, s: u64) -> String {
        format_bits(s, self.qubits)
    }

    /// Observation count of every bitstring that occurs.
    pub fn counts(&self) -> BTreeMap<u64, u64> {
        let mut c = BTreeMap::new();
        for &s in &self.samples {
            *c.entry(s).or_insert(0) += 1;
        }
        c
    }
}

pub(crate) fn format_bits(s: u64, qubits: usize) -> String {
    (0..qubits).rev().map(|b| if (s >> b) & 1 == 1 { '1' } else { '0' }).collect()
}

/// Read access to a probability distribution over `0..dim`.
pub trait Probabilities: Sync {
    fn dim(&self) -> usize;
    fn prob(&self, j: usize) -> f64;
}

impl Probabilities for [f64] {
    fn dim(&self) -> usize {
        self.len()
    }

    fn prob(&self, j: usize) -> f64 {
        self[j]
    }
}

impl Probabilities for Vec<f64> {
    fn dim(&self) -> usize {
        self.len()
    }

    fn prob(&self, j: usize) -> f64 {
        self[j]
    }
}

/// Probabilities computed on demand.
pub struct FnProbabilities<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(usize) -> f64 + Sync> FnProbabilities<F> {
    pub fn new(dim: usize, f: F) -> Self {
        FnProbabilities { dim, f }
    }
}

impl<F: Fn(usize) -> f64 + Sync> Probabilities for FnProbabilities<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn prob(&self, j: usize) -> f64 {
        (self.f)(j)
    }
}

fn qubits_of(dim: usize) -> Result<usize> {
    if dim < 2 || !dim.is_power_of_two() {
        return Err(Error::InvalidDimension { dim, reason: "bitstring sampling needs D = 2^L with L ≥ 1" });
    }
    Ok(dim.trailing_zeros() as usize)
}

/// Draws `m` bitstrings with the Born probabilities of `phi` by binary search
/// on the cumulative distribution.
pub fn sample_from_state(phi: &StateVector, m: usize, seed: SeedSpec, exec: Exec) -> Result<BitstringSample> {
    let qubits = qubits_of(phi.dim())?;
    let mut acc = KahanSum::new();
    let cumulative: Vec<f64> = phi
        .amps()
        .iter()
        .map(|c| {
            acc.add(c.norm_sqr());
            acc.value()
        })
        .collect();
    let total = acc.value();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::Contract(format!("state norm² is {total}, expected 1")));
    }
    let blocks = map_indexed(exec, m.div_ceil(BLOCK), |b| {
        let mut rng = seed.fork(b as u64).rng();
        let len = BLOCK.min(m - b * BLOCK);
        (0..len)
            .map(|_| {
                let u = rng.random::<f64>() * total;
                cumulative.partition_point(|&c| c <= u).min(cumulative.len() - 1) as u64
            })
            .collect::<Vec<u64>>()
    });
    BitstringSample::new(qubits, blocks.concat(), SampleSource::SimulatedFromState)
}

/// `m` bitstrings drawn uniformly from `0..2^L`.
pub fn uniform_sample(qubits: usize, m: usize, seed: SeedSpec, exec: Exec) -> Result<BitstringSample> {
    if qubits == 0 || qubits > 63 {
        return Err(Error::Contract(format!("qubit count {qubits} outside 1..=63")));
    }
    let dim = 1u64 << qubits;
    let blocks = map_indexed(exec, m.div_ceil(BLOCK), |b| {
        let mut rng = seed.fork(b as u64).rng();
        let len = BLOCK.min(m - b * BLOCK);
        (0..len).map(|_| rng.random_range(0..dim)).collect::<Vec<u64>>()
    });
    BitstringSample::new(qubits, blocks.concat(), SampleSource::Uniform)
}

/// Sampled cross entropy and the number of `log p` values clipped at
/// [`LOG_FLOOR`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossEntropy {
    pub value: f64,
    pub clipped: usize,
}

/// `c_U = −(1/m) Σ_j log p_U(j)` over the sampled bitstrings.
pub fn cross_entropy(probs: &dyn Probabilities, sample: &BitstringSample) -> Result<CrossEntropy> {
    if probs.dim() != sample.dim() {
        return Err(Error::DimensionMismatch { expected: sample.dim(), got: probs.dim() });
    }
    let mut sum = KahanSum::new();
    let mut clipped = 0;
    for &s in sample.samples() {
        let p = probs.prob(s as usize);
        if !(p > 0.0) {
            return Err(Error::Divergence { bitstring: sample.format(s) });
        }
        let lp = p.ln();
        if lp < LOG_FLOOR {
            clipped += 1;
            sum.add(LOG_FLOOR);
        } else {
            sum.add(lp);
        }
    }
    Ok(CrossEntropy { value: -sum.value() / sample.len() as f64, clipped })
}

/// `α = log D + γ − c_U` from a sample.
pub fn alpha_sampled(probs: &dyn Probabilities, sample: &BitstringSample) -> Result<f64> {
    let c = cross_entropy(probs, sample)?;
    Ok((probs.dim() as f64).ln() + EULER_GAMMA - c.value)
}

/// `α = log D + γ + Σ_j p(j) log p(j)` from the full distribution.
pub fn alpha_exact(probs: &dyn Probabilities) -> f64 {
    let d = probs.dim();
    let s = ksum((0..d).map(|j| {
        let p = probs.prob(j);
        if p > 0.0 {
            p * p.ln()
        } else {
            0.0
        }
    }));
    (d as f64).ln() + EULER_GAMMA + s
}

/// Large-`D` cross entropy `log D − ψ(μ+1)` of the tilted distribution.
pub fn maxent_cross_entropy(mu: f64, dim: usize) -> Result<f64> {
    Ok((dim as f64).ln() - digamma(mu + 1.0)?)
}

const MU_MIN: f64 = -1.0 + 1e-12;
const MU_MAX: f64 = 1e8;

/// The unique `μ > −1` with `log D − ψ(μ+1) = c_U`.
pub fn solve_mu(c_u: f64, dim: usize) -> Result<f64> {
    if dim < 2 {
        return Err(Error::InvalidDimension { dim, reason: "need at least two outcomes" });
    }
    let ln_d = (dim as f64).ln();
    let lo_c = (ln_d - digamma(MU_MAX + 1.0)?).max(0.0);
    let hi_c = ln_d - digamma(MU_MIN + 1.0)?;
    if !(c_u > lo_c && c_u < hi_c) {
        return Err(Error::NoSolution { target: c_u, lo: lo_c, hi: hi_c });
    }
    let target = ln_d - c_u;
    let f = |mu: f64| digamma(mu + 1.0).map(|v| v - target);
    let (mut a, mut b) = (MU_MIN, 1.0f64);
    while f(b)? < 0.0 {
        a = b;
        b = (2.0 * b).min(MU_MAX);
    }
    for _ in 0..200 {
        if b - a < 1e-6 * (1.0 + b.abs()) {
            break;
        }
        let mid = 0.5 * (a + b);
        if f(mid)? < 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    let mut mu = 0.5 * (a + b);
    for _ in 0..50 {
        let r = f(mu)?;
        if r.abs() < 1e-13 {
            break;
        }
        let next = mu - r / trigamma(mu + 1.0)?;
        mu = if next > a && next < b { next } else { 0.5 * (a + b) };
        if f(mu)? < 0.0 {
            a = mu;
        } else {
            b = mu;
        }
    }
    Ok(mu)
}

/// `p_V(j) = p_U(j)^μ / Σ_k p_U(k)^μ`, computed in the log domain.
pub fn maxent_distribution(probs: &dyn Probabilities, mu: f64) -> Result<Vec<f64>> {
    if !(mu > -1.0) || !mu.is_finite() {
        return Err(Error::Domain { function: "maxent_distribution", value: mu });
    }
    let d = probs.dim();
    if mu == 0.0 {
        return Ok(vec![1.0 / d as f64; d]);
    }
    let p: Vec<f64> = (0..d).map(|j| probs.prob(j)).collect();
    if let Some(j) = p.iter().position(|&v| !(v >= 0.0) || (v == 0.0 && mu < 0.0)) {
        return Err(Error::Divergence { bitstring: format!("{j}") });
    }
    if mu == 1.0 {
        return Ok(p);
    }
    let logs: Vec<f64> = p.iter().map(|&v| if v > 0.0 { mu * v.ln() } else { f64::NEG_INFINITY }).collect();
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = logs.iter().map(|&l| (l - top).exp()).collect();
    let z = ksum(w.iter().copied());
    Ok(w.into_iter().map(|v| v / z).collect())
}

/// `ψ_X = Σ_j n_j log(n_j/(m p_X(j)))` over observed bitstrings.
pub fn hypothesis_psi(counts: &BTreeMap<u64, u64>, probs: &dyn Probabilities, m: u64) -> Result<f64> {
    let total: u64 = counts.values().sum();
    if total != m {
        return Err(Error::Contract(format!("counts sum to {total}, expected {m}")));
    }
    let qubits = probs.dim().trailing_zeros() as usize;
    let mut s = KahanSum::new();
    for (&j, &n) in counts {
        if n == 0 {
            continue;
        }
        let p = probs.prob(j as usize);
        if !(p > 0.0) {
            return Err(Error::Divergence { bitstring: format_bits(j, qubits) });
        }
        let nf = n as f64;
        s.add(nf * (nf / (m as f64 * p)).ln());
    }
    Ok(s.value())
}

/// Closed-form entropy statistics of Haar-random states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HaarEntropyStats {
    pub dim: usize,
    pub mu: f64,
    /// `ψ(D+μ) − ψ(μ+1)`.
    pub cross_entropy: f64,
    /// `log D − ψ(μ+1)`.
    pub cross_entropy_limit: f64,
    /// `Var[Σ p log p]` for normalized states, `(π²−9)/(3D)`.
    pub entropy_variance: f64,
    /// `Var[Σ p log p]` for unnormalized Gaussian amplitudes.
    pub entropy_variance_unnormalized: f64,
}

impl HaarEntropyStats {
    /// Mean square error of the entropy estimated from `j` of the `D`
    /// outcomes chosen at random.
    pub fn subset_variance(&self, j: usize) -> f64 {
        subset_variance(self.dim, j)
    }
}

pub fn haar_entropy_stats(dim: usize, mu: f64) -> Result<HaarEntropyStats> {
    if dim < 2 {
        return Err(Error::InvalidDimension { dim, reason: "need at least two outcomes" });
    }
    let d = dim as f64;
    let l = d.ln() + EULER_GAMMA;
    Ok(HaarEntropyStats {
        dim,
        mu,
        cross_entropy: digamma(d + mu)? - digamma(mu + 1.0)?,
        cross_entropy_limit: d.ln() - digamma(mu + 1.0)?,
        entropy_variance: (PI * PI - 9.0) / (3.0 * d),
        entropy_variance_unnormalized: (PI * PI / 3.0 + l * l - 4.0 * l + 1.0) / d,
    })
}

/// `(1 − J/D)/J · [(π² − 9)/3 + (log D + γ − 2)²]`.
pub fn subset_variance(dim: usize, j: usize) -> f64 {
    let d = dim as f64;
    let jf = j as f64;
    let l = d.ln() + EULER_GAMMA - 2.0;
    (1.0 - jf / d) / jf * ((PI * PI - 9.0) / 3.0 + l * l)
}

/// Standard error of `α` from `m` samples: the subset variance in the
/// `m ≪ D` limit, without the finite-population factor.
pub fn alpha_stderr(dim: usize, m: usize) -> f64 {
    let l = (dim as f64).ln() + EULER_GAMMA - 2.0;
    (((PI * PI - 9.0) / 3.0 + l * l) / m as f64).sqrt()
}

/// Everything reported for one scored sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossEntropyReport {
    pub qubits: usize,
    pub dim: usize,
    pub m: usize,
    pub source: SampleSource,
    pub cross_entropy: f64,
    pub clipped: usize,
    pub alpha: f64,
    pub alpha_stderr: f64,
    /// `None` when `c_U` is outside the solvable range.
    pub mu: Option<f64>,
    /// `ψ` for the scored distribution.
    pub psi: f64,
    /// `ψ` for the uniform distribution.
    pub psi_uniform: f64,
}

impl CrossEntropyReport {
    pub fn to_key_values(&self) -> String {
        let mu = self.mu.map_or_else(|| "none".to_string(), fmt_e);
        let source = match self.source {
            SampleSource::SimulatedFromState => "simulated-from-state",
            SampleSource::Uniform => "uniform",
            SampleSource::ExternalFile => "external-file",
        };
        format!(
            "qubits={}\ndim={}\nm={}\nsource={source}\ncross_entropy={}\nclipped={}\nalpha={}\nalpha_stderr={}\nmu={mu}\npsi={}\npsi_uniform={}\n",
            self.qubits,
            self.dim,
            self.m,
            fmt_e(self.cross_entropy),
            self.clipped,
            fmt_e(self.alpha),
            fmt_e(self.alpha_stderr),
            fmt_e(self.psi),
            fmt_e(self.psi_uniform),
        )
    }
}

/// Scores `sample` against `probs`.
pub fn score(probs: &dyn Probabilities, sample: &BitstringSample) -> Result<CrossEntropyReport> {
    let d = probs.dim();
    let c = cross_entropy(probs, sample)?;
    let m = sample.len();
    let counts = sample.counts();
    let uniform = FnProbabilities::new(d, |_| 1.0 / d as f64);
    Ok(CrossEntropyReport {
        qubits: sample.qubits(),
        dim: d,
        m,
        source: sample.source(),
        cross_entropy: c.value,
        clipped: c.clipped,
        alpha: (d as f64).ln() + EULER_GAMMA - c.value,
        alpha_stderr: alpha_stderr(d, m),
        mu: solve_mu(c.value, d).ok(),
        psi: hypothesis_psi(&counts, probs, m as u64)?,
        psi_uniform: hypothesis_psi(&counts, &uniform, m as u64)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn anchor_points() {
        let d = 1 << 12;
        let ln_d = (d as f64).ln();
        for (alpha, mu) in [(0.0, 0.0), (1.0, 1.0), (1.5, 2.0)] {
            let got = solve_mu(ln_d + EULER_GAMMA - alpha, d).unwrap();
            assert!((got - mu).abs() < 1e-8, "{got} vs {mu}");
        }
    }

    #[test]
    fn alpha_stderr_at_twelve_qubits() {
        let s = alpha_stderr(1 << 12, 500_000);
        assert!((s - 9.78e-3).abs() < 1e-4, "{s}");
        let sub = subset_variance(1 << 12, 64);
        assert!(sub < alpha_stderr(1 << 12, 64).powi(2));
    }

    #[test]
    fn solve_mu_inverts_the_closed_form() {
        let d = 1 << 10;
        for k in 0..=109 {
            let mu = -0.9 + 0.1 * k as f64;
            let c = maxent_cross_entropy(mu, d).unwrap();
            assert!((solve_mu(c, d).unwrap() - mu).abs() < 1e-8);
        }
        assert!(matches!(solve_mu(-1.0, d), Err(Error::NoSolution { .. })));
    }

    #[test]
    fn tilted_toy_distribution() {
        let p = vec![0.5, 1.0 / 3.0, 1.0 / 6.0];
        let v = maxent_distribution(&p, 2.0).unwrap();
        for (a, b) in v.iter().zip([9.0 / 14.0, 4.0 / 14.0, 1.0 / 14.0]) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(maxent_distribution(&p, 1.0).unwrap(), p);
        assert_eq!(maxent_distribution(&p, 0.0).unwrap(), vec![1.0 / 3.0; 3]);
    }

    #[test]
    fn basis_state_always_samples_itself() {
        let phi = StateVector::basis(16, 5).unwrap();
        let s = sample_from_state(&phi, 1000, SeedSpec::new(1, 0), Exec::Sequential).unwrap();
        assert!(s.samples().iter().all(|&x| x == 5));
    }

    #[test]
    fn uniform_scores_log_d() {
        let d = 256;
        let p = vec![1.0 / d as f64; d];
        let s = uniform_sample(8, 1000, SeedSpec::new(2, 0), Exec::Sequential).unwrap();
        let c = cross_entropy(&p, &s).unwrap();
        assert!((c.value - (d as f64).ln()).abs() < 1e-12);
    }

    #[test]
    fn zero_probability_is_a_divergence() {
        let mut p = vec![0.25; 4];
        p[2] = 0.0;
        let s = BitstringSample::new(2, vec![0, 2], SampleSource::ExternalFile).unwrap();
        assert_eq!(cross_entropy(&p, &s), Err(Error::Divergence { bitstring: "10".into() }));
    }

    #[test]
    fn psi_vanishes_for_proportional_counts() {
        let p = vec![0.5, 0.25, 0.25, 0.0];
        let counts = BTreeMap::from([(0, 4), (1, 2), (2, 2)]);
        assert!(hypothesis_psi(&counts, &p, 8).unwrap().abs() < 1e-14);
    }

    #[test]
    fn sampling_is_thread_independent() {
        let phi = crate::state::gen_gaussian_muller(1 << 10, SeedSpec::new(4, 0), true).unwrap();
        let a = sample_from_state(&phi, 200_000, SeedSpec::new(9, 1), Exec::Sequential).unwrap();
        let b = sample_from_state(&phi, 200_000, SeedSpec::new(9, 1), Exec::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn finite_d_correction_is_small() {
        let s = haar_entropy_stats(1 << 10, 1.0).unwrap();
        let diff = s.cross_entropy - s.cross_entropy_limit;
        assert!(diff.abs() < 2.0 / 1024.0);
    }
}
