//! Chebyshev expansion of `e^{zH}`.
//!
//! With `Ĥ = H/b` and `w = z b`, `e^{zH} = I_0(w) + 2 Σ_{k≥1} I_k(w) T_k(Ĥ)`.
//! For `Re w < 0` the identity `I_k(w) = (−1)^k I_k(−w)` keeps the Bessel
//! recurrence on the right half-plane.

use num_complex::Complex64;

use super::{EvolutionPlan, DEFAULT_EPSILON};
use crate::error::{Error, Result};
use crate::exec::{fill_chunks, Exec};
use crate::hamiltonian::{HamiltonianOperator, Operator};
use crate::special::{scaled_bessel_i, MAX_ORDER};
use crate::state::StateVector;

/// Precomputed expansion of `e^{zH}` for a fixed `z`.
#[derive(Debug, Clone)]
pub struct ChebyshevPropagator {
    coeffs: Vec<Complex64>,
    bound: f64,
    dim: usize,
    exec: Exec,
}

impl ChebyshevPropagator {
    pub fn new(h: &HamiltonianOperator, z: Complex64, plan: &EvolutionPlan, exec: Exec) -> Result<Self> {
        Self::with_bound(h.dim(), z, plan.bound, plan.epsilon, exec)
    }

    pub fn with_bound(dim: usize, z: Complex64, bound: f64, epsilon: f64, exec: Exec) -> Result<Self> {
        if !(bound > 0.0) || !bound.is_finite() {
            return Err(Error::Contract(format!("spectral bound must be positive, got {bound}")));
        }
        if !z.re.is_finite() || !z.im.is_finite() {
            return Err(Error::Contract("exponent argument must be finite".into()));
        }
        Ok(ChebyshevPropagator { coeffs: coefficients(z * bound, epsilon)?, bound, dim, exec })
    }

    /// Number of retained Chebyshev terms.
    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    /// `e^{zH} x`.
    pub fn apply_vec(&self, h: &dyn Operator, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.dim, "state dimension does not match the propagator");
        let exec = self.exec;
        let inv_b = 1.0 / self.bound;
        let mut out: Vec<Complex64> = x.iter().map(|&v| v * self.coeffs[0]).collect();
        if self.coeffs.len() == 1 {
            return out;
        }
        let mut prev = x.to_vec();
        let mut cur = vec![Complex64::new(0.0, 0.0); x.len()];
        h.apply_into(x, &mut cur, exec);
        cur.iter_mut().for_each(|v| *v *= inv_b);
        axpy(exec, &mut out, self.coeffs[1], &cur);
        let mut next = vec![Complex64::new(0.0, 0.0); x.len()];
        for &c in &self.coeffs[2..] {
            h.apply_into(&cur, &mut next, exec);
            // next = 2Ĥ cur − prev, reusing prev's buffer
            let two_inv_b = 2.0 * inv_b;
            fill_chunks(exec, &mut prev, |off, chunk| {
                for (k, p) in chunk.iter_mut().enumerate() {
                    *p = next[off + k] * two_inv_b - *p;
                }
            });
            std::mem::swap(&mut prev, &mut cur);
            axpy(exec, &mut out, c, &cur);
        }
        out
    }
}

fn axpy(exec: Exec, y: &mut [Complex64], a: Complex64, x: &[Complex64]) {
    fill_chunks(exec, y, |off, chunk| {
        for (k, v) in chunk.iter_mut().enumerate() {
            *v += a * x[off + k];
        }
    });
}

/// Expansion coefficients `c_k` of `e^{w x}` on `[−1, 1]`, truncated once two
/// consecutive magnitudes drop below `ε` times the largest seen so far.
fn coefficients(w: Complex64, epsilon: f64) -> Result<Vec<Complex64>> {
    let flip = w.re < 0.0;
    let wp = if flip { -w } else { w };
    let g = scaled_bessel_i(wp)?;
    let pref = wp.exp();
    let mut out = Vec::new();
    let mut running = 0.0f64;
    let mut small = 0;
    for (k, gk) in g.iter().enumerate() {
        let sign = if flip && k % 2 == 1 { -1.0 } else { 1.0 };
        let weight = if k == 0 { 1.0 } else { 2.0 };
        let c = *gk * pref * (sign * weight);
        let mag = c.norm();
        running = running.max(mag);
        out.push(c);
        if k > 0 && mag < epsilon * running {
            small += 1;
            if small == 2 {
                out.truncate(k - 1);
                return Ok(out);
            }
        } else {
            small = 0;
        }
    }
    if wp.norm() < 1e-300 {
        return Ok(out);
    }
    Err(Error::Truncation { epsilon, order: g.len().min(MAX_ORDER) })
}

/// `e^{zH} ψ` to relative accuracy `plan.epsilon`.
pub fn chebyshev_apply(
    h: &HamiltonianOperator,
    psi: &StateVector,
    z: Complex64,
    plan: &EvolutionPlan,
) -> Result<StateVector> {
    if psi.dim() != h.dim() {
        return Err(Error::DimensionMismatch { expected: h.dim(), got: psi.dim() });
    }
    let prop = ChebyshevPropagator::new(h, z, plan, Exec::default())?;
    StateVector::from_amps(prop.apply_vec(h, psi.amps()))
}

/// `e^{−βH/2} Φ`, unnormalized.
pub fn thermal_project(h: &HamiltonianOperator, phi: &StateVector, beta: f64) -> Result<StateVector> {
    thermal_project_with(h, phi, beta, DEFAULT_EPSILON, Exec::default())
}

pub fn thermal_project_with(
    h: &HamiltonianOperator,
    phi: &StateVector,
    beta: f64,
    epsilon: f64,
    exec: Exec,
) -> Result<StateVector> {
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(Error::Contract(format!("inverse temperature must be non-negative, got {beta}")));
    }
    if phi.dim() != h.dim() {
        return Err(Error::DimensionMismatch { expected: h.dim(), got: phi.dim() });
    }
    if beta == 0.0 {
        return Ok(phi.clone());
    }
    let prop =
        ChebyshevPropagator::with_bound(h.dim(), Complex64::new(-0.5 * beta, 0.0), h.norm_bound_1(), epsilon, exec)?;
    StateVector::from_amps(prop.apply_vec(h, phi.amps()))
}
