//! Thermal averages from random thermal states `Φ_β = e^{−βH/2}Φ`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::averaging::{combine_realizations, jackknife, AveragingMode, Record};
use super::trace::TraceEstimate;
use super::{zeros, Sampling};
use crate::error::{Error, Result};
use crate::exec::{map_indexed, Exec};
use crate::hamiltonian::{HamiltonianOperator, Operator};
use crate::linalg::{dot, norm_sqr};
use crate::propagate::{ChebyshevPropagator, DEFAULT_EPSILON};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalParams {
    pub sampling: Sampling,
    /// Chebyshev accuracy of `e^{−βH/2}`.
    pub epsilon: f64,
    /// Reach each `β` from the previous grid point instead of from `Φ`.
    pub incremental: bool,
}

impl ThermalParams {
    pub fn new(sampling: Sampling) -> Self {
        ThermalParams { sampling, epsilon: DEFAULT_EPSILON, incremental: false }
    }
}

/// `Tr e^{−2βH}/(Tr e^{−βH})²`, estimated and clipped to `[1/D, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartitionRatio {
    pub beta: f64,
    pub raw: f64,
    pub clipped: f64,
    pub stderr: f64,
    pub lower: f64,
}

impl PartitionRatio {
    fn new(beta: f64, raw: f64, stderr: f64, dim: usize) -> Self {
        let lower = 1.0 / dim as f64;
        PartitionRatio { beta, raw, clipped: raw.clamp(lower, 1.0), stderr, lower }
    }

    /// True when the raw estimate lies inside the bounds up to `tol`.
    pub fn within_bounds(&self, tol: f64) -> bool {
        self.raw >= self.lower - tol && self.raw <= 1.0 + tol
    }
}

/// Estimates at one inverse temperature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalPoint {
    pub beta: f64,
    pub energy: f64,
    pub energy_stderr: f64,
    pub energy_sq: f64,
    pub energy_sq_stderr: f64,
    /// `β²(⟨H²⟩ − ⟨H⟩²)/N`.
    pub specific_heat: f64,
    pub specific_heat_stderr: f64,
    /// `⟨Y⟩` for the optional extra observable.
    pub observable: Option<(f64, f64)>,
    pub partition_ratio: PartitionRatio,
    /// `−log(Tr e^{−βH})/β`.
    pub free_energy: f64,
    /// The same proxy at `2β`.
    pub free_energy_2beta: f64,
}

impl ThermalPoint {
    pub fn temperature(&self) -> f64 {
        1.0 / self.beta
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThermalSeries {
    pub n_sites: usize,
    pub dim: usize,
    pub realizations: usize,
    pub mode: AveragingMode,
    pub points: Vec<ThermalPoint>,
}

// per-realization row layout
const Y0: usize = 0;
const Y: usize = 1;
const E: usize = 2;
const E2: usize = 3;
const OBS: usize = 4;
const Z2: usize = 5;

fn projector(h: &HamiltonianOperator, beta: f64, eps: f64, exec: Exec) -> Result<ChebyshevPropagator> {
    ChebyshevPropagator::with_bound(h.dim(), Complex64::new(-0.5 * beta, 0.0), h.norm_bound_1(), eps, exec)
}

/// Rows `[⟨Φ|Φ⟩, ‖Φ_β‖², ⟨H⟩_β y, ‖HΦ_β‖², ⟨Y⟩_β y, ‖Φ_{2β}‖²]` indexed by
/// `[β][realization]`.
fn thermal_rows(
    h: &HamiltonianOperator,
    betas: &[f64],
    observable: Option<&dyn Operator>,
    params: &ThermalParams,
    exec: Exec,
) -> Result<Vec<Vec<Vec<f64>>>> {
    let s = &params.sampling;
    s.check()?;
    let d = h.dim();
    if let Some(y) = observable {
        if y.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, got: y.dim() });
        }
    }
    let full = betas.iter().map(|&b| projector(h, b, params.epsilon, exec)).collect::<Result<Vec<_>>>()?;
    let steps = if params.incremental {
        let mut prev = 0.0;
        betas
            .iter()
            .map(|&b| {
                let p = projector(h, b - prev, params.epsilon, exec);
                prev = b;
                p
            })
            .collect::<Result<Vec<_>>>()?
    } else {
        Vec::new()
    };
    let per = map_indexed(exec, s.realizations, |k| -> Result<Vec<Vec<f64>>> {
        let phi = s.kind.generate(d, s.seed.realization(k))?;
        let y0 = phi.norm_sqr();
        let mut scratch = zeros(d);
        let mut cur = phi.amps().to_vec();
        let mut rows = Vec::with_capacity(betas.len());
        for (i, _) in betas.iter().enumerate() {
            let pb = if params.incremental { steps[i].apply_vec(h, &cur) } else { full[i].apply_vec(h, phi.amps()) };
            h.apply_into(&pb, &mut scratch, exec);
            let e = dot(&pb, &scratch).re;
            let e2 = norm_sqr(&scratch);
            let obs = match observable {
                Some(y) => {
                    y.apply_into(&pb, &mut scratch, exec);
                    dot(&pb, &scratch).re
                }
                None => 0.0,
            };
            let z2 = norm_sqr(&full[i].apply_vec(h, &pb));
            rows.push(vec![y0, norm_sqr(&pb), e, e2, obs, z2]);
            cur = pb;
        }
        Ok(rows)
    });
    let per = per.into_iter().collect::<Result<Vec<_>>>()?;
    Ok((0..betas.len()).map(|i| per.iter().map(|r| r[i].clone()).collect()).collect())
}

fn ratio_of(rows: &[Vec<f64>], num: usize, mode: AveragingMode) -> (f64, f64) {
    match mode {
        AveragingMode::M1 => {
            let r: Vec<Vec<f64>> = rows.iter().map(|row| vec![row[num] / row[Y]]).collect();
            jackknife(&r, |m| m[0])
        }
        AveragingMode::M2 => jackknife(rows, |m| m[num] / m[Y]),
    }
}

fn heat_of(rows: &[Vec<f64>], beta: f64, n_sites: f64, mode: AveragingMode) -> (f64, f64) {
    let c = |e: f64, e2: f64| beta * beta * (e2 - e * e) / n_sites;
    match mode {
        AveragingMode::M1 => {
            let r: Vec<Vec<f64>> = rows.iter().map(|row| vec![row[E] / row[Y], row[E2] / row[Y]]).collect();
            jackknife(&r, |m| c(m[0], m[1]))
        }
        AveragingMode::M2 => jackknife(rows, |m| c(m[E] / m[Y], m[E2] / m[Y])),
    }
}

fn point(
    rows: &[Vec<f64>],
    beta: f64,
    n_sites: usize,
    dim: usize,
    mode: AveragingMode,
    with_obs: bool,
) -> ThermalPoint {
    let d = dim as f64;
    let (energy, energy_stderr) = ratio_of(rows, E, mode);
    let (energy_sq, energy_sq_stderr) = ratio_of(rows, E2, mode);
    let (specific_heat, specific_heat_stderr) = heat_of(rows, beta, n_sites as f64, mode);
    let observable = with_obs.then(|| ratio_of(rows, OBS, mode));
    let (pr, pr_se) = jackknife(rows, |m| m[Z2] * m[Y0] / (d * m[Y] * m[Y]));
    let (f1, _) = jackknife(rows, |m| -(d * m[Y] / m[Y0]).ln() / beta);
    let (f2, _) = jackknife(rows, |m| -(d * m[Z2] / m[Y0]).ln() / (2.0 * beta));
    ThermalPoint {
        beta,
        energy,
        energy_stderr,
        energy_sq,
        energy_sq_stderr,
        specific_heat,
        specific_heat_stderr,
        observable,
        partition_ratio: PartitionRatio::new(beta, pr, pr_se, dim),
        free_energy: f1,
        free_energy_2beta: f2,
    }
}

/// `⟨Y⟩_β ≈ Σ⟨Φ_β|Y|Φ_β⟩ / Σ⟨Φ_β|Φ_β⟩` (or the mean of ratios under M1).
pub fn thermal_expectation(
    h: &HamiltonianOperator,
    y: &dyn Operator,
    beta: f64,
    params: &ThermalParams,
    exec: Exec,
) -> Result<TraceEstimate> {
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(Error::Contract(format!("inverse temperature must be non-negative, got {beta}")));
    }
    let s = &params.sampling;
    s.check()?;
    let d = h.dim();
    if y.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, got: y.dim() });
    }
    let prop = projector(h, beta, params.epsilon, exec)?;
    let records = map_indexed(exec, s.realizations, |k| -> Result<Record> {
        let phi = s.kind.generate(d, s.seed.realization(k))?;
        let pb = prop.apply_vec(h, phi.amps());
        let mut yp = zeros(d);
        y.apply_into(&pb, &mut yp, exec);
        Ok(Record::new(dot(&pb, &yp), norm_sqr(&pb)))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let c = combine_realizations(&records, s.mode)?;
    Ok(TraceEstimate {
        value: c.value,
        stderr: c.stderr,
        predicted_variance: None,
        realizations: records.len(),
        mode: s.mode,
        records,
    })
}

fn check_grid(betas: &[f64]) -> Result<()> {
    if betas.iter().any(|b| !(*b > 0.0) || !b.is_finite()) {
        return Err(Error::Contract("inverse temperatures must be positive".into()));
    }
    if betas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Contract("the inverse-temperature grid must be ascending".into()));
    }
    Ok(())
}

/// `⟨H⟩`, `⟨H²⟩`, specific heat, partition ratio and free-energy proxy on a
/// grid of inverse temperatures, all from the same thermal states.
pub fn specific_heat(
    h: &HamiltonianOperator,
    betas: &[f64],
    n_sites: usize,
    observable: Option<&dyn Operator>,
    params: &ThermalParams,
    exec: Exec,
) -> Result<ThermalSeries> {
    check_grid(betas)?;
    if n_sites == 0 {
        return Err(Error::Contract("site count must be positive".into()));
    }
    let rows = thermal_rows(h, betas, observable, params, exec)?;
    let mode = params.sampling.mode;
    let points =
        betas.iter().zip(&rows).map(|(&b, r)| point(r, b, n_sites, h.dim(), mode, observable.is_some())).collect();
    Ok(ThermalSeries { n_sites, dim: h.dim(), realizations: params.sampling.realizations, mode, points })
}

/// `Tr Z²/(Tr Z)²` with `Z = e^{−βH}`, from `⟨Φ|e^{−2βH}|Φ⟩` and
/// `⟨Φ|e^{−βH}|Φ⟩` combined as ratios of sums.
pub fn partition_ratio(
    h: &HamiltonianOperator,
    beta: f64,
    params: &ThermalParams,
    exec: Exec,
) -> Result<PartitionRatio> {
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(Error::Contract(format!("inverse temperature must be non-negative, got {beta}")));
    }
    let rows = thermal_rows(h, &[beta], None, params, exec)?;
    let d = h.dim() as f64;
    let (raw, se) = jackknife(&rows[0], |m| m[Z2] * m[Y0] / (d * m[Y] * m[Y]));
    Ok(PartitionRatio::new(beta, raw, se, h.dim()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{chain_spec, Boundary};
    use crate::rng::SeedSpec;
    use crate::state::RandomStateKind;

    fn free_spins(n: usize, omega: f64) -> HamiltonianOperator {
        HamiltonianOperator::build_spin_model(&chain_spec(n, Boundary::Open, 0.0, 0.0, 2.0 * omega).unwrap()).unwrap()
    }

    fn params(r: usize) -> ThermalParams {
        ThermalParams::new(Sampling::new(
            RandomStateKind::GaussianNormalized,
            r,
            AveragingMode::M2,
            SeedSpec::new(5, 0),
        ))
    }

    #[test]
    fn identity_expectation_is_one() {
        let h = free_spins(4, 1.0);
        let id = crate::estimate::FnOperator::new(16, |x: &[Complex64], y: &mut [Complex64]| y.copy_from_slice(x));
        let t = thermal_expectation(&h, &id, 1.3, &params(3), Exec::Sequential).unwrap();
        assert!((t.value.re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn incremental_grid_matches_fresh_projection() {
        let h = free_spins(5, 0.7);
        let betas = [0.3, 0.8, 1.5];
        let a = specific_heat(&h, &betas, 5, None, &params(4), Exec::Sequential).unwrap();
        let b = specific_heat(&h, &betas, 5, None, &ThermalParams { incremental: true, ..params(4) }, Exec::Sequential)
            .unwrap();
        for (p, q) in a.points.iter().zip(&b.points) {
            assert!((p.energy - q.energy).abs() < 1e-10);
            assert!((p.specific_heat - q.specific_heat).abs() < 1e-10);
        }
    }

    #[test]
    fn grid_must_be_positive_and_ascending() {
        let h = free_spins(3, 1.0);
        assert!(specific_heat(&h, &[0.5, 0.2], 3, None, &params(1), Exec::Sequential).is_err());
        assert!(specific_heat(&h, &[0.0], 3, None, &params(1), Exec::Sequential).is_err());
        assert!(specific_heat(&h, &[], 3, None, &params(1), Exec::Sequential).unwrap().points.is_empty());
    }

    #[test]
    fn infinite_temperature_ratio_is_inverse_dimension() {
        let h = free_spins(6, 1.0);
        let p = partition_ratio(&h, 0.0, &params(8), Exec::Sequential).unwrap();
        // Case A states have unit norm, so the estimate is exact
        assert!((p.raw - 1.0 / 64.0).abs() < 1e-12);
    }
}
