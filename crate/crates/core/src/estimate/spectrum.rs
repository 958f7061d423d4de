//! Densities of states from the Fourier transform of survival amplitudes.
//!
//! `f(t) = ⟨Φ|e^{−itH}|Φ⟩` is sampled at `t_j = jτ`, `j = 0..N`, extended to
//! negative times by `f(−t) = f(t)*`, multiplied by a Gaussian window and
//! transformed onto `ω_k = kπ/T`, `k = −N..N−1`, with `T = Nτ`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::{Propagation, Sampling};
use crate::error::{Error, Result};
use crate::exec::{map_indexed, Exec};
use crate::hamiltonian::{HamiltonianOperator, Operator};
use crate::linalg::{dot, ksum};
use crate::propagate::{suggested_tau, Stepper};
use crate::state::StateVector;

/// Sampling grid and window for a spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumParams {
    /// `N`: number of positive-time samples.
    pub samples: usize,
    /// Sampling step; `0.8π/‖H‖₁` when unset.
    pub tau: Option<f64>,
    /// Gaussian window width; `T/3` when unset, no window when infinite.
    pub sigma: Option<f64>,
    pub propagation: Propagation,
}

impl SpectrumParams {
    pub fn new(samples: usize) -> Self {
        SpectrumParams { samples, tau: None, sigma: None, propagation: Propagation::default() }
    }

    /// Resolves `τ` and `σ` against the operator bound, enforcing `τ < π/bound`.
    pub fn resolve(&self, bound: f64) -> Result<(f64, f64)> {
        if self.samples == 0 {
            return Err(Error::Contract("a spectrum needs at least one time sample".into()));
        }
        let tau = self.tau.unwrap_or_else(|| suggested_tau(bound));
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(Error::Contract(format!("time step must be positive, got {tau}")));
        }
        if tau * bound >= PI {
            return Err(Error::Nyquist { tau, bound, suggested: suggested_tau(bound) });
        }
        let t = tau * self.samples as f64;
        let sigma = self.sigma.unwrap_or(t / 3.0);
        if !(sigma > 0.0) {
            return Err(Error::Contract(format!("window width must be positive, got {sigma}")));
        }
        Ok((tau, sigma))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumMeta {
    pub samples: usize,
    /// Half-period `T = Nτ`.
    pub period: f64,
    pub tau: f64,
    pub sigma: f64,
    pub realizations: usize,
}

/// A real spectrum on `ω_k = kπ/T`, `k = −N..N−1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    pub omega: Vec<f64>,
    pub values: Vec<f64>,
    /// Per-bin standard error over realizations, when more than one was used.
    pub stderr: Option<Vec<f64>>,
    pub meta: SpectrumMeta,
}

impl SpectrumResult {
    /// Frequency spacing `π/T`.
    pub fn bin_width(&self) -> f64 {
        PI / self.meta.period
    }

    /// `Σ_k S(ω_k) π/T`.
    pub fn integral(&self) -> f64 {
        ksum(self.values.iter().copied()) * self.bin_width()
    }

    /// Index of the largest value.
    pub fn peak_index(&self) -> usize {
        self.values
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, &v)| if v > best.1 { (i, v) } else { best })
            .0
    }
}

pub(crate) fn frequency_grid(n: usize, period: f64) -> Vec<f64> {
    let n = n as i64;
    (-n..n).map(|k| k as f64 * PI / period).collect()
}

/// Windowed samples `h_j`, `j = 0..2N` in FFT order (negative `j` wrapped).
fn symmetrized(f: &[Complex64], tau: f64, sigma: f64) -> Vec<Complex64> {
    let n = f.len() - 1;
    let g = |j: usize| {
        let t = j as f64 * tau;
        (-0.5 * (t / sigma) * (t / sigma)).exp()
    };
    let mut h = vec![Complex64::new(0.0, 0.0); 2 * n];
    h[0] = f[0] * g(0);
    for j in 1..n {
        h[j] = f[j] * g(j);
        h[2 * n - j] = f[j].conj() * g(j);
    }
    h[n] = Complex64::new(f[n].re * g(n), 0.0);
    h
}

/// `prefactor · Re Σ_j h_j e^{iω_k t_j}` for every `k`, via FFT.
pub(crate) fn transform(f: &[Complex64], tau: f64, sigma: f64, prefactor: f64) -> Vec<f64> {
    let n = f.len() - 1;
    let mut h = symmetrized(f, tau, sigma);
    let mut planner = FftPlanner::<f64>::new();
    planner.plan_fft_inverse(2 * n).process(&mut h);
    (0..2 * n).map(|i| prefactor * h[(i + n) % (2 * n)].re).collect()
}

/// The same transform by direct summation, `O(N²)`.
pub fn direct_dft(f: &[Complex64], tau: f64, sigma: f64, prefactor: f64) -> Vec<f64> {
    let n = f.len() - 1;
    let h = symmetrized(f, tau, sigma);
    let ni = n as i64;
    (-ni..ni)
        .map(|k| {
            let mut re = Vec::with_capacity(2 * n);
            for j in -ni..ni {
                let hj = h[j.rem_euclid(2 * ni) as usize];
                let phase = PI * (k * j) as f64 / n as f64;
                re.push((hj * Complex64::from_polar(1.0, phase)).re);
            }
            prefactor * ksum(re)
        })
        .collect()
}

/// `⟨φ|e^{−ijτH}|φ⟩` for `j = 0..=n`.
pub(crate) fn survival_amplitude(
    h: &HamiltonianOperator,
    stepper: &Stepper,
    phi: &[Complex64],
    n: usize,
) -> Vec<Complex64> {
    let mut psi = phi.to_vec();
    let mut f = Vec::with_capacity(n + 1);
    for j in 0..=n {
        f.push(dot(phi, &psi));
        if j < n {
            stepper.step(h, &mut psi);
        }
    }
    f
}

fn spread(runs: &[Vec<f64>], mean: &[f64]) -> Vec<f64> {
    let r = runs.len() as f64;
    (0..mean.len())
        .map(|k| {
            let ss = ksum(runs.iter().map(|v| (v[k] - mean[k]) * (v[k] - mean[k])));
            (ss / (r - 1.0) / r).sqrt()
        })
        .collect()
}

/// Density of states averaged over `sampling.realizations` random states.
///
/// The amplitudes are averaged before the transform and normalized by
/// `D·E|c|² = 1`, so the spectrum integrates to the mean `⟨Φ|Φ⟩`.
pub fn dos(
    h: &HamiltonianOperator,
    params: &SpectrumParams,
    sampling: &Sampling,
    exec: Exec,
) -> Result<SpectrumResult> {
    sampling.check()?;
    let bound = h.norm_bound_1();
    let (tau, sigma) = params.resolve(bound)?;
    let stepper = params.propagation.stepper(h, tau, exec)?;
    let n = params.samples;
    let d = h.dim();
    let runs = map_indexed(exec, sampling.realizations, |k| -> Result<Vec<Complex64>> {
        let phi = sampling.kind.generate(d, sampling.seed.realization(k))?;
        Ok(survival_amplitude(h, &stepper, phi.amps(), n))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let norm = d as f64 * sampling.kind.m2(d);
    let r = runs.len();
    let avg: Vec<Complex64> = (0..=n)
        .map(|j| {
            let re = ksum(runs.iter().map(|f| f[j].re));
            let im = ksum(runs.iter().map(|f| f[j].im));
            Complex64::new(re, im) / (r as f64 * norm)
        })
        .collect();
    let period = tau * n as f64;
    let prefactor = tau / (2.0 * PI);
    let values = transform(&avg, tau, sigma, prefactor);
    let stderr = (r > 1).then(|| {
        let per: Vec<Vec<f64>> = runs
            .iter()
            .map(|f| {
                let scaled: Vec<Complex64> = f.iter().map(|v| v / norm).collect();
                transform(&scaled, tau, sigma, prefactor)
            })
            .collect();
        spread(&per, &values)
    });
    Ok(SpectrumResult {
        omega: frequency_grid(n, period),
        values,
        stderr,
        meta: SpectrumMeta { samples: n, period, tau, sigma, realizations: r },
    })
}

/// Local density of states of `psi`; integrates to `⟨ψ|ψ⟩`.
pub fn ldos(h: &HamiltonianOperator, psi: &StateVector, params: &SpectrumParams, exec: Exec) -> Result<SpectrumResult> {
    if psi.dim() != h.dim() {
        return Err(Error::DimensionMismatch { expected: h.dim(), got: psi.dim() });
    }
    let (tau, sigma) = params.resolve(h.norm_bound_1())?;
    let stepper = params.propagation.stepper(h, tau, exec)?;
    let n = params.samples;
    let f = survival_amplitude(h, &stepper, psi.amps(), n);
    let period = tau * n as f64;
    Ok(SpectrumResult {
        omega: frequency_grid(n, period),
        values: transform(&f, tau, sigma, tau / (2.0 * PI)),
        stderr: None,
        meta: SpectrumMeta { samples: n, period, tau, sigma, realizations: 1 },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{Boundary, Cluster, Geometry, LatticeSpec, Onsite, TightBinding};

    fn amplitude(levels: &[(f64, f64)], tau: f64, n: usize) -> Vec<Complex64> {
        (0..=n).map(|j| levels.iter().map(|&(w, e)| Complex64::from_polar(w, -e * j as f64 * tau)).sum()).collect()
    }

    #[test]
    fn fft_matches_direct_sum() {
        let f = amplitude(&[(0.3, 0.7), (0.7, -1.1)], 0.4, 37);
        let a = transform(&f, 0.4, 5.0, 0.1);
        let b = direct_dft(&f, 0.4, 5.0, 0.1);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn sum_rule_is_exact() {
        let (tau, n) = (0.3, 64);
        let f = amplitude(&[(0.25, 0.5), (0.75, 2.0)], tau, n);
        let v = transform(&f, tau, n as f64 * tau / 3.0, tau / (2.0 * PI));
        let total: f64 = v.iter().sum::<f64>() * PI / (n as f64 * tau);
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_level_peaks_at_its_energy() {
        let w0 = 1.3;
        let h = HamiltonianOperator::from(TightBinding::from_terms(1, vec![], Some(vec![w0]), None).unwrap());
        let params = SpectrumParams { tau: Some(0.5), ..SpectrumParams::new(200) };
        let s = ldos(&h, &StateVector::basis(1, 0).unwrap(), &params, Exec::Sequential).unwrap();
        let k = (w0 * s.meta.period / PI).round() as i64;
        assert_eq!(s.peak_index() as i64, k + 200);
        assert!((s.integral() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn nyquist_violation_is_reported() {
        let cluster = Cluster::new(Geometry::Chain, 8, 1, Boundary::Periodic).unwrap();
        let h = HamiltonianOperator::build_lattice(&LatticeSpec {
            cluster,
            v: 1.0,
            onsite: Onsite::Zero,
            disorder_seed: 0,
        })
        .unwrap();
        let params = SpectrumParams { tau: Some(2.0), ..SpectrumParams::new(10) };
        assert!(matches!(dos(&h, &params, &Sampling::default(), Exec::Sequential), Err(Error::Nyquist { .. })));
    }
}
