//! Average and entanglement fidelity of Kraus channels.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{map_indexed, Exec};
use crate::linalg::ksum;
use crate::rng::{normal_pair, SeedSpec};
use crate::state::gen_gaussian_muller;

/// Largest dimension accepted for dense channels.
pub const MAX_CHANNEL_DIM: usize = 64;

/// A completely positive map `ρ ↦ Σ_α E_α ρ E_α†`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    dim: usize,
    ops: Vec<DMatrix<Complex64>>,
}

impl KrausChannel {
    pub fn new(ops: Vec<DMatrix<Complex64>>) -> Result<Self> {
        let first = ops.first().ok_or_else(|| Error::Spec("a channel needs at least one operator".into()))?;
        let dim = first.nrows();
        if dim == 0 || dim > MAX_CHANNEL_DIM {
            return Err(Error::InvalidDimension { dim, reason: "channel dimension must be in 1..=64" });
        }
        if let Some(bad) = ops.iter().find(|e| e.nrows() != dim || e.ncols() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, got: bad.nrows().max(bad.ncols()) });
        }
        if ops.len() > dim * dim {
            return Err(Error::Spec(format!("{} operators exceed D² = {}", ops.len(), dim * dim)));
        }
        if ops.iter().any(|e| e.iter().any(|z| !z.re.is_finite() || !z.im.is_finite())) {
            return Err(Error::Spec("operator entries must be finite".into()));
        }
        Ok(KrausChannel { dim, ops })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        Self::new(vec![DMatrix::identity(dim, dim)])
    }

    /// `{√(1−p) I, √(p/3) σx, √(p/3) σy, √(p/3) σz}`.
    pub fn depolarizing_qubit(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Spec(format!("depolarizing probability {p} outside [0, 1]")));
        }
        let c = |re: f64, im: f64| Complex64::new(re, im);
        let a = (1.0 - p).sqrt();
        let b = (p / 3.0).sqrt();
        Self::new(vec![
            DMatrix::from_row_slice(2, 2, &[c(a, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(a, 0.0)]),
            DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(b, 0.0), c(b, 0.0), c(0.0, 0.0)]),
            DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -b), c(0.0, b), c(0.0, 0.0)]),
            DMatrix::from_row_slice(2, 2, &[c(b, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-b, 0.0)]),
        ])
    }

    /// `count` operators cut from the orthonormal columns of a Gaussian
    /// `(count·D) × D` matrix. Without `trace_preserving` each operator is
    /// additionally scaled by a factor drawn from `[0.5, 1)`.
    pub fn random(dim: usize, count: usize, trace_preserving: bool, seed: SeedSpec) -> Result<Self> {
        if count == 0 || count > dim * dim {
            return Err(Error::Spec(format!("operator count {count} outside 1..={}", dim * dim)));
        }
        let mut rng = seed.rng();
        let rows = count * dim;
        let g = DMatrix::from_fn(rows, dim, |_, _| {
            let (a, b) = normal_pair(&mut rng);
            Complex64::new(a, b)
        });
        let q = g.qr().q();
        let ops = (0..count)
            .map(|a| {
                let block = q.rows(a * dim, dim).into_owned();
                if trace_preserving {
                    block
                } else {
                    let s: f64 = 0.5 + 0.5 * rand::Rng::random::<f64>(&mut rng);
                    block * Complex64::new(s, 0.0)
                }
            })
            .collect();
        Self::new(ops)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn operators(&self) -> &[DMatrix<Complex64>] {
        &self.ops
    }

    /// Frobenius norm of `Σ E_α†E_α − I`.
    pub fn completeness_defect(&self) -> f64 {
        let mut s = DMatrix::<Complex64>::zeros(self.dim, self.dim);
        for e in &self.ops {
            s += e.adjoint() * e;
        }
        (s - DMatrix::identity(self.dim, self.dim)).norm()
    }

    pub fn is_trace_preserving(&self) -> bool {
        self.completeness_defect() < 1e-10
    }

    /// The channel with every operator replaced by `U E_α V`.
    pub fn conjugated(&self, u: &DMatrix<Complex64>, v: &DMatrix<Complex64>) -> Result<Self> {
        Self::new(self.ops.iter().map(|e| u * e * v).collect())
    }
}

/// `Σ_α |Tr E_α|²/D²`.
pub fn entanglement_fidelity(ch: &KrausChannel) -> f64 {
    let d = ch.dim as f64;
    ksum(ch.ops.iter().map(|e| e.trace().norm_sqr())) / (d * d)
}

/// `Σ_α (|Tr E_α|² + Tr E_α†E_α)/(D(D+1))`.
pub fn average_fidelity(ch: &KrausChannel) -> f64 {
    let d = ch.dim as f64;
    ksum(ch.ops.iter().map(|e| e.trace().norm_sqr() + e.norm_squared())) / (d * (d + 1.0))
}

/// `⟨ψ|ℰ(|ψ⟩⟨ψ|)|ψ⟩ = Σ_α |⟨ψ|E_α|ψ⟩|²`.
fn pure_state_fidelity(ch: &KrausChannel, psi: &[Complex64]) -> f64 {
    let d = ch.dim;
    ksum(ch.ops.iter().map(|e| {
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..d {
            let mut row = Complex64::new(0.0, 0.0);
            for j in 0..d {
                row += e[(i, j)] * psi[j];
            }
            acc += psi[i].conj() * row;
        }
        acc.norm_sqr()
    }))
}

/// Monte Carlo estimate of the average fidelity over Haar-random pure states.
/// Returns `(mean, stderr)`.
pub fn mc_average_fidelity(ch: &KrausChannel, trials: usize, seed: SeedSpec, exec: Exec) -> Result<(f64, f64)> {
    if trials < 100 {
        return Err(Error::Contract(format!("at least 100 trials are required, got {trials}")));
    }
    let vals = map_indexed(exec, trials, |k| -> Result<f64> {
        let psi = gen_gaussian_muller(ch.dim, seed.realization(k), true)?;
        Ok(pure_state_fidelity(ch, psi.amps()))
    })
    .into_iter()
    .collect::<Result<Vec<f64>>>()?;
    let n = trials as f64;
    let mean = ksum(vals.iter().copied()) / n;
    let var = ksum(vals.iter().map(|v| (v - mean) * (v - mean))) / (n - 1.0);
    Ok((mean, (var / n).sqrt()))
}

/// One checked entry `E[c_j* c_k c_l* c_m]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentEntry {
    pub index: [usize; 4],
    pub estimate: Complex64,
    pub expected: f64,
    pub stderr: f64,
}

impl MomentEntry {
    pub fn z_score(&self) -> f64 {
        let diff = (self.estimate - self.expected).norm();
        if self.stderr > 0.0 {
            diff / self.stderr
        } else if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourthMomentReport {
    pub dim: usize,
    pub trials: usize,
    pub entries: Vec<MomentEntry>,
}

impl FourthMomentReport {
    pub fn passes(&self, sigmas: f64) -> bool {
        self.entries.iter().all(|e| e.z_score() <= sigmas)
    }
}

fn moment_indices(dim: usize) -> Vec<[usize; 4]> {
    if dim <= 3 {
        let mut all = Vec::new();
        for j in 0..dim {
            for k in 0..dim {
                for l in 0..dim {
                    for m in 0..dim {
                        all.push([j, k, l, m]);
                    }
                }
            }
        }
        return all;
    }
    let last = dim - 1;
    vec![
        [0, 0, 0, 0],
        [last, last, last, last],
        [0, 0, 1, 1],
        [0, 1, 1, 0],
        [2, 2, last, last],
        [1, last, last, 1],
        [0, 1, 0, 1],
        [0, 0, 0, 1],
        [0, 1, 2, 3],
        [3, 2, 1, 0],
    ]
}

/// Empirical fourth moments of Case-A amplitudes against
/// `(δ_jk δ_lm + δ_jm δ_kl)/(D(D+1))`.
pub fn fourth_moment_check(dim: usize, trials: usize, seed: SeedSpec, exec: Exec) -> Result<FourthMomentReport> {
    if dim == 0 || dim > MAX_CHANNEL_DIM {
        return Err(Error::InvalidDimension { dim, reason: "moment checks are limited to D ≤ 64" });
    }
    if trials < 2 {
        return Err(Error::Contract("at least two trials are required".into()));
    }
    let idx = moment_indices(dim);
    let samples = map_indexed(exec, trials, |t| -> Result<Vec<Complex64>> {
        let psi = gen_gaussian_muller(dim, seed.realization(t), true)?;
        let c = psi.amps();
        Ok(idx.iter().map(|&[j, k, l, m]| c[j].conj() * c[k] * c[l].conj() * c[m]).collect())
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let d = dim as f64;
    let n = trials as f64;
    let entries = idx
        .iter()
        .enumerate()
        .map(|(e, &[j, k, l, m])| {
            let re: Vec<f64> = samples.iter().map(|s| s[e].re).collect();
            let im: Vec<f64> = samples.iter().map(|s| s[e].im).collect();
            let (mr, mi) = (ksum(re.iter().copied()) / n, ksum(im.iter().copied()) / n);
            let var = ksum(re.iter().map(|v| (v - mr) * (v - mr))) + ksum(im.iter().map(|v| (v - mi) * (v - mi)));
            let delta = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
            MomentEntry {
                index: [j, k, l, m],
                estimate: Complex64::new(mr, mi),
                expected: (delta(j, k) * delta(l, m) + delta(j, m) * delta(k, l)) / (d * (d + 1.0)),
                stderr: (var / (n - 1.0) / n).sqrt(),
            }
        })
        .collect();
    Ok(FourthMomentReport { dim, trials, entries })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_channel() {
        let ch = KrausChannel::identity(4).unwrap();
        assert_eq!(entanglement_fidelity(&ch), 1.0);
        assert!((average_fidelity(&ch) - 1.0).abs() < 1e-15);
        assert!(ch.is_trace_preserving());
        let (m, se) = mc_average_fidelity(&ch, 100, SeedSpec::new(1, 0), Exec::Sequential).unwrap();
        assert!((m - 1.0).abs() < 1e-12 && se < 1e-12);
    }

    #[test]
    fn depolarizing_closed_forms() {
        let ch = KrausChannel::depolarizing_qubit(0.3).unwrap();
        assert!((entanglement_fidelity(&ch) - 0.7).abs() < 1e-15);
        assert!((average_fidelity(&ch) - 0.8).abs() < 1e-15);
    }

    #[test]
    fn traceless_unitary_has_zero_entanglement_fidelity() {
        let c = |re: f64| Complex64::new(re, 0.0);
        let x = DMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]);
        assert_eq!(entanglement_fidelity(&KrausChannel::new(vec![x]).unwrap()), 0.0);
    }

    #[test]
    fn scaled_identity_is_not_trace_preserving() {
        let e = DMatrix::identity(3, 3) * Complex64::new(0.6, 0.0);
        let ch = KrausChannel::new(vec![e]).unwrap();
        assert!(!ch.is_trace_preserving());
        assert!((average_fidelity(&ch) - 0.36).abs() < 1e-15);
    }

    #[test]
    fn random_isometry_channels_are_complete() {
        let ch = KrausChannel::random(4, 3, true, SeedSpec::new(8, 0)).unwrap();
        assert!(ch.completeness_defect() < 1e-12);
        let lossy = KrausChannel::random(4, 3, false, SeedSpec::new(8, 0)).unwrap();
        assert!(!lossy.is_trace_preserving());
    }

    #[test]
    fn too_few_trials_rejected() {
        let ch = KrausChannel::identity(2).unwrap();
        assert!(mc_average_fidelity(&ch, 10, SeedSpec::new(0, 0), Exec::Sequential).is_err());
    }
}
