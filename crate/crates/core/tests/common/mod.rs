//! Dense-matrix reference implementations for the integration tests.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rst_core::{Complex64, Exec, Operator};

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// The matrix of `op`, built column by column from basis vectors.
pub fn dense(op: &dyn Operator) -> DMatrix<Complex64> {
    let d = op.dim();
    let mut m = DMatrix::zeros(d, d);
    let mut e = vec![c(0.0); d];
    let mut col = vec![c(0.0); d];
    for j in 0..d {
        e[j] = c(1.0);
        op.apply_into(&e, &mut col, Exec::Sequential);
        for (i, v) in col.iter().enumerate() {
            m[(i, j)] = *v;
        }
        e[j] = c(0.0);
    }
    m
}

/// Real part of a matrix that must be real to 1e−12.
pub fn real_part(m: &DMatrix<Complex64>) -> DMatrix<f64> {
    assert!(m.iter().all(|z| z.im.abs() < 1e-12), "operator is not real");
    m.map(|z| z.re)
}

/// Eigendecomposition of a real symmetric operator.
pub struct Spectrum {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

impl Spectrum {
    pub fn of(op: &dyn Operator) -> Self {
        let eig = SymmetricEigen::new(real_part(&dense(op)));
        Spectrum { values: eig.eigenvalues.iter().copied().collect(), vectors: eig.eigenvectors }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `e^{zH} ψ`.
    pub fn exp_apply(&self, z: Complex64, psi: &[Complex64]) -> Vec<Complex64> {
        let v = self.vectors.map(c);
        let x = DVector::from_column_slice(psi);
        let mut coeff = v.adjoint() * x;
        for (k, a) in coeff.iter_mut().enumerate() {
            *a *= (z * self.values[k]).exp();
        }
        (v * coeff).iter().copied().collect()
    }

    /// `V† A V` for an operator `A`.
    pub fn in_eigenbasis(&self, a: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let v = self.vectors.map(c);
        v.adjoint() * a * v
    }

    /// `V† P V` for the diagonal projector onto the basis states selected by `keep`.
    pub fn projector_in_eigenbasis(&self, keep: impl Fn(usize) -> bool) -> DMatrix<f64> {
        let rows: Vec<usize> = (0..self.dim()).filter(|&s| keep(s)).collect();
        let sub = self.vectors.select_rows(rows.iter());
        sub.transpose() * sub
    }

    /// `Σ E^p e^{−βE} / Σ e^{−βE}` for p = 1, 2.
    pub fn thermal_moments(&self, beta: f64) -> (f64, f64) {
        let e0 = self.values.iter().copied().fold(f64::INFINITY, f64::min);
        let w: Vec<f64> = self.values.iter().map(|e| (-beta * (e - e0)).exp()).collect();
        let z: f64 = w.iter().sum();
        let h1 = self.values.iter().zip(&w).map(|(e, w)| e * w).sum::<f64>() / z;
        let h2 = self.values.iter().zip(&w).map(|(e, w)| e * e * w).sum::<f64>() / z;
        (h1, h2)
    }
}

pub fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn l2(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn l2_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

/// `|a − b| ≤ k·σ`, with an absolute floor for quantities known exactly.
pub fn within_sigmas(a: f64, b: f64, sigma: f64, k: f64) -> bool {
    (a - b).abs() <= k * sigma + 1e-10 * (1.0 + b.abs())
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}
