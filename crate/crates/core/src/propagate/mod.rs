//! Real- and imaginary-time propagation of state vectors.

pub mod chebyshev;
pub mod trotter;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use chebyshev::{chebyshev_apply, thermal_project, ChebyshevPropagator};
pub use trotter::{trotter2_step, TrotterPropagator};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::hamiltonian::HamiltonianOperator;

/// Default relative accuracy of the Chebyshev expansion.
pub const DEFAULT_EPSILON: f64 = 1e-13;

/// Default number of Trotter substeps per time step.
pub const DEFAULT_SUBSTEPS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Trotter2,
    Chebyshev,
}

impl Scheme {
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "trotter2" | "trotter" => Some(Scheme::Trotter2),
            "chebyshev" | "cheb" => Some(Scheme::Chebyshev),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Trotter2 => "trotter2",
            Scheme::Chebyshev => "chebyshev",
        }
    }
}

/// How one time step `τ` is carried out.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolutionPlan {
    pub scheme: Scheme,
    pub tau: f64,
    pub substeps: usize,
    pub bound: f64,
    pub epsilon: f64,
}

impl EvolutionPlan {
    /// Validates `|τ/l|·bound < π`, `bound > 0` and `ε ∈ (0, 1e−6]`.
    pub fn new(scheme: Scheme, tau: f64, substeps: usize, bound: f64, epsilon: f64) -> Result<Self> {
        if !(bound > 0.0) || !bound.is_finite() {
            return Err(Error::Contract(format!("spectral bound must be positive, got {bound}")));
        }
        if substeps == 0 {
            return Err(Error::Contract("at least one substep is required".into()));
        }
        if !(epsilon > 0.0 && epsilon <= 1e-6) {
            return Err(Error::Contract(format!("accuracy {epsilon} outside (0, 1e-6]")));
        }
        if !tau.is_finite() {
            return Err(Error::Contract("time step must be finite".into()));
        }
        if tau.abs() / substeps as f64 * bound >= PI {
            return Err(Error::Nyquist { tau, bound, suggested: suggested_tau(bound) });
        }
        Ok(EvolutionPlan { scheme, tau, substeps, bound, epsilon })
    }

    pub fn trotter2(tau: f64, substeps: usize, bound: f64) -> Result<Self> {
        Self::new(Scheme::Trotter2, tau, substeps, bound, DEFAULT_EPSILON)
    }

    pub fn chebyshev(tau: f64, bound: f64, epsilon: f64) -> Result<Self> {
        Self::new(Scheme::Chebyshev, tau, 1, bound, epsilon)
    }

    /// A plan whose bound is the operator's 1-norm bound.
    pub fn for_hamiltonian(h: &HamiltonianOperator, scheme: Scheme, tau: f64, substeps: usize) -> Result<Self> {
        Self::new(scheme, tau, substeps, h.norm_bound_1(), DEFAULT_EPSILON)
    }

    pub fn sub_tau(&self) -> f64 {
        self.tau / self.substeps as f64
    }
}

/// `0.8π/bound`, the default sampling step.
pub fn suggested_tau(bound: f64) -> f64 {
    0.8 * PI / bound
}

/// Repeated application of `e^{−iτH}` with either scheme.
pub enum Stepper {
    Trotter(TrotterPropagator),
    Chebyshev(ChebyshevPropagator),
}

impl Stepper {
    pub fn new(h: &HamiltonianOperator, plan: &EvolutionPlan, exec: Exec) -> Result<Self> {
        match plan.scheme {
            Scheme::Trotter2 => TrotterPropagator::new(h, plan, exec).map(Stepper::Trotter),
            Scheme::Chebyshev => {
                ChebyshevPropagator::new(h, Complex64::new(0.0, -plan.tau), plan, exec).map(Stepper::Chebyshev)
            }
        }
    }

    /// Advances `psi` by one time step `τ` in place.
    pub fn step(&self, h: &HamiltonianOperator, psi: &mut Vec<Complex64>) {
        match self {
            Stepper::Trotter(t) => t.step(psi),
            Stepper::Chebyshev(c) => {
                let out = c.apply_vec(h, psi);
                *psi = out;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plan_validation() {
        assert!(EvolutionPlan::trotter2(0.1, 1, 2.0).is_ok());
        assert!(matches!(EvolutionPlan::trotter2(2.0, 1, 2.0), Err(Error::Nyquist { .. })));
        // substeps shrink the effective step
        assert!(EvolutionPlan::trotter2(2.0, 5, 2.0).is_ok());
        assert!(EvolutionPlan::chebyshev(0.1, 0.0, 1e-13).is_err());
        assert!(EvolutionPlan::chebyshev(0.1, 1.0, 1e-3).is_err());
    }
}
