//! Stochastic trace estimation `Tr X ≈ D⟨Φ|X|Φ⟩/⟨Φ|Φ⟩`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::averaging::{combine_realizations, AveragingMode, Record};
use super::Sampling;
use crate::error::{Error, Result};
use crate::exec::{map_indexed, Exec};
use crate::hamiltonian::Operator;
use crate::linalg::{dot, ksum};
use crate::state::RandomStateKind;

/// `Tr X`, `Tr XX†` and `Σ|X_ii|²`, the inputs of the variance formula.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatorTraces {
    pub tr_x: Complex64,
    pub tr_xxd: f64,
    pub diag_sq: f64,
}

impl OperatorTraces {
    /// Traces of a real diagonal operator.
    pub fn of_diagonal(w: &[f64]) -> Self {
        let sq = ksum(w.iter().map(|v| v * v));
        OperatorTraces { tr_x: Complex64::new(ksum(w.iter().copied()), 0.0), tr_xxd: sq, diag_sq: sq }
    }

    /// Traces by applying `X` to every basis vector. Desk-scale only.
    pub fn by_columns(x: &dyn Operator) -> Self {
        let d = x.dim();
        let mut e = vec![Complex64::new(0.0, 0.0); d];
        let mut col = vec![Complex64::new(0.0, 0.0); d];
        let (mut tr, mut tr_im) = (Vec::with_capacity(d), Vec::with_capacity(d));
        let (mut fro, mut diag) = (Vec::with_capacity(d), Vec::with_capacity(d));
        for i in 0..d {
            e[i] = Complex64::new(1.0, 0.0);
            x.apply_into(&e, &mut col, Exec::Sequential);
            e[i] = Complex64::new(0.0, 0.0);
            tr.push(col[i].re);
            tr_im.push(col[i].im);
            diag.push(col[i].norm_sqr());
            fro.push(col.iter().map(|c| c.norm_sqr()).sum::<f64>());
        }
        OperatorTraces { tr_x: Complex64::new(ksum(tr), ksum(tr_im)), tr_xxd: ksum(fro), diag_sq: ksum(diag) }
    }

    /// Variance of a single-realization ratio for states of `kind`.
    pub fn ratio_variance(&self, kind: RandomStateKind, dim: usize) -> f64 {
        kind.ratio_variance(dim, self.tr_x, self.tr_xxd, self.diag_sq)
    }
}

/// Result of [`estimate_trace`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEstimate {
    pub value: Complex64,
    /// Jackknife error over realizations (NaN for `R = 1`).
    pub stderr: f64,
    /// Closed-form variance of `value`, when the traces are known.
    pub predicted_variance: Option<f64>,
    pub realizations: usize,
    pub mode: AveragingMode,
    pub records: Vec<Record>,
}

/// Wraps a closure as an [`Operator`].
pub struct FnOperator<F> {
    dim: usize,
    f: F,
}

impl<F> FnOperator<F>
where
    F: Fn(&[Complex64], &mut [Complex64]) + Send + Sync,
{
    pub fn new(dim: usize, f: F) -> Self {
        FnOperator { dim, f }
    }
}

impl<F> Operator for FnOperator<F>
where
    F: Fn(&[Complex64], &mut [Complex64]) + Send + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply_into(&self, x: &[Complex64], y: &mut [Complex64], _exec: Exec) {
        (self.f)(x, y)
    }
}

/// `x_i = D⟨Φ_i|X|Φ_i⟩` and `y_i = ⟨Φ_i|Φ_i⟩` for realizations `0..R`.
pub fn trace_records(x: &dyn Operator, sampling: &Sampling, exec: Exec) -> Result<Vec<Record>> {
    if sampling.realizations == 0 {
        return Err(Error::Contract("at least one realization is required".into()));
    }
    let d = x.dim();
    let outs = map_indexed(exec, sampling.realizations, |k| -> Result<Record> {
        let phi = sampling.kind.generate(d, sampling.seed.realization(k))?;
        let mut xp = vec![Complex64::new(0.0, 0.0); d];
        x.apply_into(phi.amps(), &mut xp, exec);
        Ok(Record::new(dot(phi.amps(), &xp) * d as f64, phi.norm_sqr()))
    });
    outs.into_iter().collect()
}

/// Estimates `Tr X` from `R` random states combined by `mode`.
pub fn estimate_trace(
    x: &dyn Operator,
    sampling: &Sampling,
    traces: Option<&OperatorTraces>,
    exec: Exec,
) -> Result<TraceEstimate> {
    let records = trace_records(x, sampling, exec)?;
    let c = combine_realizations(&records, sampling.mode)?;
    let r = records.len();
    Ok(TraceEstimate {
        value: c.value,
        stderr: c.stderr,
        predicted_variance: traces.map(|t| t.ratio_variance(sampling.kind, x.dim()) / r as f64),
        realizations: r,
        mode: sampling.mode,
        records,
    })
}

/// Sample variance of single-realization ratios against the closed form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceReport {
    pub trials: usize,
    pub sample_mean: Complex64,
    pub sample_variance: f64,
    pub predicted_variance: f64,
    /// Standard error of `sample_variance`.
    pub variance_stderr: f64,
    /// `(sample − predicted)/variance_stderr`; zero when both variances vanish.
    pub z_score: f64,
}

impl VarianceReport {
    pub fn passes(&self, sigmas: f64) -> bool {
        self.z_score.abs() <= sigmas
    }
}

/// Compares the scatter of `D⟨Φ|X|Φ⟩/⟨Φ|Φ⟩` over `trials` states with the
/// closed-form variance. `sampling.realizations` is the trial count.
pub fn empirical_variance_check(
    x: &dyn Operator,
    traces: &OperatorTraces,
    sampling: &Sampling,
    exec: Exec,
) -> Result<VarianceReport> {
    let records = trace_records(x, sampling, exec)?;
    let n = records.len();
    if n < 2 {
        return Err(Error::Contract("a variance check needs at least two trials".into()));
    }
    let ratios: Vec<Complex64> = records.iter().map(|r| r.x / r.y).collect();
    let mean = Complex64::new(ksum(ratios.iter().map(|z| z.re)), ksum(ratios.iter().map(|z| z.im))) / n as f64;
    let dev2: Vec<f64> = ratios.iter().map(|z| (z - mean).norm_sqr()).collect();
    let var = ksum(dev2.iter().copied()) / (n - 1) as f64;
    let m4 = ksum(dev2.iter().map(|v| v * v)) / n as f64;
    let var_se = ((m4 - var * var).max(0.0) / n as f64).sqrt();
    let predicted = traces.ratio_variance(sampling.kind, x.dim());
    let diff = var - predicted;
    let scale = 1e-12 * (1.0 + predicted.abs() + traces.tr_x.norm_sqr());
    let z_score = if diff.abs() <= scale {
        0.0
    } else if var_se > 0.0 {
        diff / var_se
    } else {
        f64::INFINITY
    };
    Ok(VarianceReport {
        trials: n,
        sample_mean: mean,
        sample_variance: var,
        predicted_variance: predicted,
        variance_stderr: var_se,
        z_score,
    })
}
