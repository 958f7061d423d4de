//! Time-dependent correlation functions from propagated random states.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::averaging::{combine_realizations, jackknife, AveragingMode, Record};
use super::spectrum::{frequency_grid, transform, SpectrumMeta, SpectrumParams, SpectrumResult};
use super::{zeros, Propagation, Sampling, TimeGrid};
use crate::error::{Error, Result};
use crate::exec::{map_indexed, Exec};
use crate::hamiltonian::{HamiltonianOperator, ObservableOperator, Operator};
use crate::linalg::{dot, ksum, norm_sqr};
use crate::propagate::{ChebyshevPropagator, DEFAULT_EPSILON};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CorrelationKind {
    Current,
    Density { site: usize },
    EsrAutocorrelation,
}

/// `C(t_j)` on a uniform grid with jackknife error bars.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationSeries {
    pub kind: CorrelationKind,
    pub t: Vec<f64>,
    pub values: Vec<Complex64>,
    pub stderr: Vec<f64>,
    pub realizations: usize,
}

/// `p_l(t_j)` for every site `l`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityProfile {
    pub source: usize,
    pub t: Vec<f64>,
    /// Indexed `[time][site]`.
    pub p: Vec<Vec<f64>>,
    pub stderr: Vec<Vec<f64>>,
    pub realizations: usize,
}

impl DensityProfile {
    pub fn sites(&self) -> usize {
        self.p.first().map_or(0, |row| row.len())
    }

    /// `Σ_l p_l(t_j)`.
    pub fn total(&self, j: usize) -> f64 {
        ksum(self.p[j].iter().copied())
    }
}

fn thermal_state(h: &HamiltonianOperator, phi: &[Complex64], beta: f64, exec: Exec) -> Result<Vec<Complex64>> {
    if beta == 0.0 {
        return Ok(phi.to_vec());
    }
    let prop = ChebyshevPropagator::with_bound(
        h.dim(),
        Complex64::new(-0.5 * beta, 0.0),
        h.norm_bound_1(),
        DEFAULT_EPSILON,
        exec,
    )?;
    Ok(prop.apply_vec(h, phi))
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(Error::Contract(format!("inverse temperature must be non-negative, got {beta}")));
    }
    Ok(())
}

/// `⟨φ(t)|A|ϕ(t)⟩` with `φ(0) = Φ_β` and `ϕ(0) = AΦ_β`, both evolved by
/// `e^{−iHt}`, together with `⟨Φ_β|Φ_β⟩`, for every realization.
fn autocorrelation_records(
    h: &HamiltonianOperator,
    a: &dyn Operator,
    beta: f64,
    grid: TimeGrid,
    sampling: &Sampling,
    propagation: &Propagation,
    exec: Exec,
) -> Result<Vec<Vec<Record>>> {
    check_beta(beta)?;
    sampling.check()?;
    let d = h.dim();
    if a.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, got: a.dim() });
    }
    let stepper = propagation.stepper(h, grid.tau, exec)?;
    map_indexed(exec, sampling.realizations, |k| -> Result<Vec<Record>> {
        let phi = sampling.kind.generate(d, sampling.seed.realization(k))?;
        let mut left = thermal_state(h, phi.amps(), beta, exec)?;
        let y = norm_sqr(&left);
        let mut right = zeros(d);
        a.apply_into(&left, &mut right, exec);
        let mut scratch = zeros(d);
        let mut out = Vec::with_capacity(grid.steps + 1);
        for j in 0..=grid.steps {
            a.apply_into(&right, &mut scratch, exec);
            out.push(Record::new(dot(&left, &scratch), y));
            if j < grid.steps {
                stepper.step(h, &mut left);
                stepper.step(h, &mut right);
            }
        }
        Ok(out)
    })
    .into_iter()
    .collect()
}

fn combine_series(per: &[Vec<Record>], steps: usize, mode: AveragingMode) -> Result<(Vec<Complex64>, Vec<f64>)> {
    let mut values = Vec::with_capacity(steps + 1);
    let mut stderr = Vec::with_capacity(steps + 1);
    for j in 0..=steps {
        let recs: Vec<Record> = per.iter().map(|r| r[j]).collect();
        let c = combine_realizations(&recs, mode)?;
        values.push(c.value);
        stderr.push(c.stderr);
    }
    Ok((values, stderr))
}

/// Current autocorrelation `C(t) = ⟨φ(t)|j|ϕ(t)⟩/⟨Φ|e^{−βH}|Φ⟩`.
pub fn current_correlation(
    h: &HamiltonianOperator,
    current: &dyn Operator,
    beta: f64,
    grid: TimeGrid,
    sampling: &Sampling,
    propagation: &Propagation,
    exec: Exec,
) -> Result<CorrelationSeries> {
    let per = autocorrelation_records(h, current, beta, grid, sampling, propagation, exec)?;
    let (values, stderr) = combine_series(&per, grid.steps, sampling.mode)?;
    Ok(CorrelationSeries { kind: CorrelationKind::Current, t: grid.times(), values, stderr, realizations: per.len() })
}

/// Spin density spreading from `source` at infinite temperature.
///
/// `ψ(0) = n_src Φ` is evolved and `p_l(t) = ⟨ψ(t)|n_l|ψ(t)⟩/⟨ψ|ψ⟩`, so that
/// `p_src(0) = 1` and every other site starts near 1/2.
pub fn density_profile(
    h: &HamiltonianOperator,
    source: usize,
    grid: TimeGrid,
    sampling: &Sampling,
    propagation: &Propagation,
    exec: Exec,
) -> Result<DensityProfile> {
    sampling.check()?;
    let model = h.as_spin().ok_or_else(|| Error::Unsupported("density profiles need a spin Hamiltonian".into()))?;
    let n = model.spins();
    if source >= n {
        return Err(Error::Contract(format!("site {source} out of range for {n} spins")));
    }
    let d = h.dim();
    let stepper = propagation.stepper(h, grid.tau, exec)?;
    let per = map_indexed(exec, sampling.realizations, |k| -> Result<Vec<Vec<f64>>> {
        let phi = sampling.kind.generate(d, sampling.seed.realization(k))?;
        let mut psi: Vec<Complex64> = phi
            .amps()
            .iter()
            .enumerate()
            .map(|(s, &c)| if (s >> source) & 1 == 1 { c } else { Complex64::new(0.0, 0.0) })
            .collect();
        let norm0 = norm_sqr(&psi);
        let mut rows = Vec::with_capacity(grid.steps + 1);
        for j in 0..=grid.steps {
            let mut row = site_occupations(&psi, n);
            row.push(norm0);
            rows.push(row);
            if j < grid.steps {
                stepper.step(h, &mut psi);
            }
        }
        Ok(rows)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let mut p = Vec::with_capacity(grid.steps + 1);
    let mut stderr = Vec::with_capacity(grid.steps + 1);
    for j in 0..=grid.steps {
        let rows: Vec<Vec<f64>> = match sampling.mode {
            AveragingMode::M2 => per.iter().map(|r| r[j].clone()).collect(),
            AveragingMode::M1 => per
                .iter()
                .map(|r| {
                    let row = &r[j];
                    let mut scaled: Vec<f64> = row[..n].iter().map(|v| v / row[n]).collect();
                    scaled.push(1.0);
                    scaled
                })
                .collect(),
        };
        let (vals, errs): (Vec<f64>, Vec<f64>) = (0..n).map(|l| jackknife(&rows, |m| m[l] / m[n])).unzip();
        p.push(vals);
        stderr.push(errs);
    }
    Ok(DensityProfile { source, t: grid.times(), p, stderr, realizations: per.len() })
}

/// `⟨ψ|n_l|ψ⟩` for every site.
fn site_occupations(psi: &[Complex64], n: usize) -> Vec<f64> {
    let mut acc = vec![crate::linalg::KahanSum::new(); n];
    for (s, c) in psi.iter().enumerate() {
        let w = c.norm_sqr();
        if w == 0.0 {
            continue;
        }
        for (l, a) in acc.iter_mut().enumerate() {
            if (s >> l) & 1 == 1 {
                a.add(w);
            }
        }
    }
    acc.iter().map(|a| a.value()).collect()
}

/// ESR line shape `C(ω) = (1/2T)∫_{−T}^{T} C(t) cos ωt dt` with the
/// symmetrized autocorrelation `C(t) = Re⟨M^x(t)M^x⟩_β`, sampled like a DOS.
///
/// `C(t)` oscillates at level differences, so `τ` is resolved against
/// `2‖H‖₁` rather than `‖H‖₁`.
pub fn esr_spectrum(
    h: &HamiltonianOperator,
    beta: f64,
    params: &SpectrumParams,
    sampling: &Sampling,
    exec: Exec,
) -> Result<SpectrumResult> {
    let model = h.as_spin().ok_or_else(|| Error::Unsupported("ESR spectra need a spin Hamiltonian".into()))?;
    if model.couplings().2 == 0.0 {
        return Err(Error::Contract("ESR spectra need a non-zero external field".into()));
    }
    let (tau, sigma) = params.resolve(2.0 * h.norm_bound_1())?;
    let n = params.samples;
    let mx = ObservableOperator::total_mx(model.spins());
    let grid = TimeGrid::new(tau, n)?;
    let per = autocorrelation_records(h, &mx, beta, grid, sampling, &params.propagation, exec)?;
    let (values, _) = combine_series(&per, n, sampling.mode)?;
    let c: Vec<Complex64> = values.iter().map(|v| Complex64::new(v.re, 0.0)).collect();
    let prefactor = 1.0 / (2.0 * n as f64);
    let spectrum = transform(&c, tau, sigma, prefactor);
    let r = per.len();
    let stderr = (r > 1).then(|| {
        let runs: Vec<Vec<f64>> = per
            .iter()
            .map(|recs| {
                let ci: Vec<Complex64> = recs.iter().map(|rec| Complex64::new(rec.x.re / rec.y, 0.0)).collect();
                transform(&ci, tau, sigma, prefactor)
            })
            .collect();
        (0..spectrum.len())
            .map(|k| {
                let mean = ksum(runs.iter().map(|v| v[k])) / r as f64;
                let ss = ksum(runs.iter().map(|v| (v[k] - mean) * (v[k] - mean)));
                (ss / ((r - 1) * r) as f64).sqrt()
            })
            .collect()
    });
    let period = tau * n as f64;
    Ok(SpectrumResult {
        omega: frequency_grid(n, period),
        values: spectrum,
        stderr,
        meta: SpectrumMeta { samples: n, period, tau, sigma, realizations: r },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{chain_spec, Boundary};
    use crate::rng::SeedSpec;
    use crate::state::RandomStateKind;

    fn xxz(n: usize, delta: f64, h: f64) -> HamiltonianOperator {
        HamiltonianOperator::build_spin_model(&chain_spec(n, Boundary::Periodic, -1.0, delta, h).unwrap()).unwrap()
    }

    fn sampling(r: usize) -> Sampling {
        Sampling::new(RandomStateKind::GaussianNormalized, r, AveragingMode::M2, SeedSpec::new(3, 0))
    }

    #[test]
    fn density_total_is_conserved() {
        let h = xxz(6, 1.5, 0.0);
        let grid = TimeGrid::new(0.2, 20).unwrap();
        let prof = density_profile(&h, 2, grid, &sampling(2), &Propagation::default(), Exec::Sequential).unwrap();
        assert!((prof.p[0][2] - 1.0).abs() < 1e-12);
        let t0 = prof.total(0);
        for j in 0..=20 {
            assert!((prof.total(j) - t0).abs() < 1e-10);
        }
    }

    #[test]
    fn current_correlation_is_real_at_time_zero() {
        let h = xxz(6, 1.5, 0.0);
        let j = ObservableOperator::spin_current(&chain_spec(6, Boundary::Periodic, -1.0, 1.5, 0.0).unwrap()).unwrap();
        let grid = TimeGrid::new(0.1, 3).unwrap();
        let c =
            current_correlation(&h, &j, 0.5, grid, &sampling(2), &Propagation::default(), Exec::Sequential).unwrap();
        assert!(c.values[0].im.abs() < 1e-10);
        assert!(c.values[0].re > 0.0);
    }

    #[test]
    fn isotropic_esr_line_sits_at_the_field() {
        for n in [1, 4] {
            let h = if n == 1 {
                HamiltonianOperator::build_spin_model(&chain_spec(1, Boundary::Open, -1.0, 1.0, 3.0).unwrap()).unwrap()
            } else {
                xxz(n, 1.0, 3.0)
            };
            let s = esr_spectrum(&h, 0.3, &SpectrumParams::new(256), &sampling(2), Exec::Sequential).unwrap();
            let k = (0..s.omega.len())
                .filter(|&k| s.omega[k] > 0.0)
                .max_by(|a, b| s.values[*a].total_cmp(&s.values[*b]))
                .unwrap();
            assert!((s.omega[k] - 3.0).abs() <= s.bin_width(), "N = {n}: peak at {}", s.omega[k]);
        }
    }

    #[test]
    fn esr_requires_a_field() {
        let h = xxz(4, 1.0, 0.0);
        assert!(esr_spectrum(&h, 0.0, &SpectrumParams::new(16), &sampling(1), Exec::Sequential).is_err());
    }
}
