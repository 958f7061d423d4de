//! Combining per-realization records and predicting ratio statistics.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::ksum;
use crate::state::RandomStateKind;

/// How `R` realizations of `x/y` are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum AveragingMode {
    /// Mean of the per-realization ratios.
    M1,
    /// Ratio of the sums.
    #[default]
    M2,
}

impl AveragingMode {
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "M1" | "1" => Some(AveragingMode::M1),
            "M2" | "2" => Some(AveragingMode::M2),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            AveragingMode::M1 => "M1",
            AveragingMode::M2 => "M2",
        }
    }
}

/// One realization: numerator `x_i` and denominator `y_i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub x: Complex64,
    pub y: f64,
}

impl Record {
    pub fn new(x: Complex64, y: f64) -> Self {
        Record { x, y }
    }
}

/// A combined estimate with its jackknife standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Combined {
    pub value: Complex64,
    pub stderr: f64,
}

/// Jackknife estimate of `f(column means)` over the rows of `rows`.
///
/// Returns the full-sample value and the leave-one-out standard error.
/// With a single row the error is undefined and reported as NaN.
pub fn jackknife<F>(rows: &[Vec<f64>], f: F) -> (f64, f64)
where
    F: Fn(&[f64]) -> f64,
{
    let r = rows.len();
    if r == 0 {
        return (f64::NAN, f64::NAN);
    }
    let k = rows[0].len();
    let totals: Vec<f64> = (0..k).map(|c| ksum(rows.iter().map(|row| row[c]))).collect();
    let means: Vec<f64> = totals.iter().map(|t| t / r as f64).collect();
    let full = f(&means);
    if r == 1 {
        return (full, f64::NAN);
    }
    let scale = 1.0 / (r - 1) as f64;
    let mut loo = vec![0.0; k];
    let thetas: Vec<f64> = rows
        .iter()
        .map(|row| {
            for c in 0..k {
                loo[c] = (totals[c] - row[c]) * scale;
            }
            f(&loo)
        })
        .collect();
    let mean = ksum(thetas.iter().copied()) / r as f64;
    let ss = ksum(thetas.iter().map(|t| (t - mean) * (t - mean)));
    (full, ((r - 1) as f64 / r as f64 * ss).sqrt())
}

/// Combines records by `mode`; the error bar is a jackknife over realizations.
pub fn combine_realizations(records: &[Record], mode: AveragingMode) -> Result<Combined> {
    if records.is_empty() {
        return Err(Error::Contract("at least one realization is required".into()));
    }
    let (re, im) = match mode {
        AveragingMode::M1 => {
            let rows: Vec<Vec<f64>> = records.iter().map(|r| vec![r.x.re / r.y, r.x.im / r.y]).collect();
            (jackknife(&rows, |m| m[0]), jackknife(&rows, |m| m[1]))
        }
        AveragingMode::M2 => {
            let rows: Vec<Vec<f64>> = records.iter().map(|r| vec![r.x.re, r.x.im, r.y]).collect();
            (jackknife(&rows, |m| m[0] / m[2]), jackknife(&rows, |m| m[1] / m[2]))
        }
    };
    Ok(Combined { value: Complex64::new(re.0, im.0), stderr: re.1.hypot(im.1) })
}

/// First and second moments of a numerator `x` and a real denominator `y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioMoments {
    pub mean_x: Complex64,
    pub mean_y: f64,
    /// `E[x y]`.
    pub mean_xy: Complex64,
    /// `E|x|² − |E x|²`.
    pub var_x: f64,
    pub var_y: f64,
}

impl RatioMoments {
    /// Moments of `x = D⟨Φ|X|Φ⟩`, `y = ⟨Φ|Φ⟩` for a random state of `kind`,
    /// given `Tr X`, `Tr XX†` and `Σ|X_ii|²`.
    pub fn random_state(kind: RandomStateKind, dim: usize, tr_x: Complex64, tr_xxd: f64, diag_sq: f64) -> Self {
        let d = dim as f64;
        let (m22, m4) = (kind.m22(dim), kind.m4(dim));
        let t2 = tr_x.norm_sqr();
        RatioMoments {
            mean_x: tr_x,
            mean_y: 1.0,
            mean_xy: tr_x * (d * ((d - 1.0) * m22 + m4)),
            var_x: d * d * (m22 * (tr_xxd + t2) + (m4 - 2.0 * m22) * diag_sq) - t2,
            var_y: m22 * (d + d * d) + (m4 - 2.0 * m22) * d - 1.0,
        }
    }
}

/// Second-order Taylor predictions of `E[x/y]` and `Var[x/y]`.
pub fn predicted_ratio_stats(m: &RatioMoments) -> Result<(Complex64, f64)> {
    let ey = m.mean_y;
    if ey == 0.0 || !ey.is_finite() {
        return Err(Error::Domain { function: "predicted_ratio_stats", value: ey });
    }
    let cov = m.mean_xy - m.mean_x * ey;
    let mean = m.mean_x / ey - cov / (ey * ey) + m.mean_x * m.var_y / ey.powi(3);
    let var = m.var_x / (ey * ey) - 2.0 * (m.mean_x.conj() * cov).re / ey.powi(3)
        + m.mean_x.norm_sqr() * m.var_y / ey.powi(4);
    Ok((mean, var))
}

/// Traces entering the Case-B thermal bias and variance, with
/// `Z = e^{−βH}` and a Hermitian observable `Y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalTraces {
    pub tr_z: f64,
    pub tr_z2: f64,
    pub tr_zy: f64,
    pub tr_z2y: f64,
    /// `Tr (ZY)²`.
    pub tr_zyzy: f64,
}

/// Leading-order mean and variance of the thermal estimator for Case-B
/// states.
pub fn thermal_case_b_prediction(t: &ThermalTraces) -> Result<(f64, f64)> {
    if !(t.tr_z > 0.0) || !(t.tr_z2 > 0.0) {
        return Err(Error::Domain { function: "thermal_case_b_prediction", value: t.tr_z });
    }
    let ratio = t.tr_z2 / (t.tr_z * t.tr_z);
    let a = t.tr_zy / t.tr_z;
    let b = t.tr_z2y / t.tr_z2;
    let mean = a + ratio * (a - b);
    let var = ratio * (t.tr_zyzy / t.tr_z2 - 2.0 * a * b + a * a);
    Ok((mean, var))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_denominators_make_modes_agree() {
        let recs: Vec<Record> = (0..7).map(|i| Record::new(Complex64::new(i as f64, 1.0), 1.0)).collect();
        let a = combine_realizations(&recs, AveragingMode::M1).unwrap();
        let b = combine_realizations(&recs, AveragingMode::M2).unwrap();
        assert_eq!(a.value, b.value);
        assert!((a.stderr - b.stderr).abs() < 1e-12);
    }

    #[test]
    fn jackknife_of_mean_is_standard_error() {
        let xs = [1.0, 4.0, 2.0, 8.0, 5.0];
        let rows: Vec<Vec<f64>> = xs.iter().map(|&x| vec![x]).collect();
        let (m, se) = jackknife(&rows, |c| c[0]);
        let mean = xs.iter().sum::<f64>() / 5.0;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 4.0;
        assert!((m - mean).abs() < 1e-14);
        assert!((se - (var / 5.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn empty_and_single_inputs() {
        assert!(combine_realizations(&[], AveragingMode::M2).is_err());
        let c = combine_realizations(&[Record::new(Complex64::new(3.0, 0.0), 2.0)], AveragingMode::M2).unwrap();
        assert_eq!(c.value.re, 1.5);
        assert!(c.stderr.is_nan());
    }

    #[test]
    fn table_rows_from_moments() {
        let dim = 50;
        let d = dim as f64;
        let tr = Complex64::new(3.0, -1.0);
        let (t2, diag) = (40.0, 12.0);
        let (_, va) =
            predicted_ratio_stats(&RatioMoments::random_state(RandomStateKind::GaussianNormalized, dim, tr, t2, diag))
                .unwrap();
        assert!((va - (d * t2 - tr.norm_sqr()) / (d + 1.0)).abs() < 1e-12);
        let (mb, vb) =
            predicted_ratio_stats(&RatioMoments::random_state(RandomStateKind::GaussianRaw, dim, tr, t2, diag))
                .unwrap();
        assert!((mb - tr).norm() < 1e-12);
        assert!((vb - (d * t2 - tr.norm_sqr()) / d).abs() < 1e-12);
        let (mc, vc) =
            predicted_ratio_stats(&RatioMoments::random_state(RandomStateKind::RandomPhase, dim, tr, t2, diag))
                .unwrap();
        assert!((mc - tr).norm() < 1e-12);
        assert!((vc - (t2 - diag)).abs() < 1e-12);
    }

    #[test]
    fn identical_numerator_and_denominator() {
        let m = RatioMoments {
            mean_x: Complex64::new(2.0, 0.0),
            mean_y: 2.0,
            mean_xy: Complex64::new(4.5, 0.0),
            var_x: 0.5,
            var_y: 0.5,
        };
        let (mean, var) = predicted_ratio_stats(&m).unwrap();
        assert!((mean.re - 1.0).abs() < 1e-15);
        assert!(var.abs() < 1e-15);
        let zero = RatioMoments { mean_y: 0.0, ..m };
        assert!(predicted_ratio_stats(&zero).is_err());
    }
}
