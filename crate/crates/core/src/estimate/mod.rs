//! Random-state estimators: traces, spectra, thermal averages and
//! dynamical correlations.

pub mod averaging;
pub mod dynamics;
pub mod spectrum;
pub mod thermal;
pub mod trace;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use averaging::{
    combine_realizations, jackknife, predicted_ratio_stats, thermal_case_b_prediction, AveragingMode, Combined,
    RatioMoments, Record, ThermalTraces,
};
pub use dynamics::{
    current_correlation, density_profile, esr_spectrum, CorrelationKind, CorrelationSeries, DensityProfile,
};
pub use spectrum::{direct_dft, dos, ldos, SpectrumMeta, SpectrumParams, SpectrumResult};
pub use thermal::{
    partition_ratio, specific_heat, thermal_expectation, PartitionRatio, ThermalParams, ThermalPoint, ThermalSeries,
};
pub use trace::{empirical_variance_check, estimate_trace, FnOperator, OperatorTraces, TraceEstimate, VarianceReport};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::hamiltonian::HamiltonianOperator;
use crate::propagate::{EvolutionPlan, Scheme, Stepper, DEFAULT_EPSILON, DEFAULT_SUBSTEPS};
use crate::rng::SeedSpec;
use crate::state::RandomStateKind;

/// Which random states are drawn, how many, and how they are combined.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sampling {
    pub kind: RandomStateKind,
    pub realizations: usize,
    pub mode: AveragingMode,
    pub seed: SeedSpec,
}

impl Default for Sampling {
    fn default() -> Self {
        Sampling {
            kind: RandomStateKind::default(),
            realizations: 1,
            mode: AveragingMode::default(),
            seed: SeedSpec::new(0, 0),
        }
    }
}

impl Sampling {
    pub fn new(kind: RandomStateKind, realizations: usize, mode: AveragingMode, seed: SeedSpec) -> Self {
        Sampling { kind, realizations, mode, seed }
    }

    fn check(&self) -> Result<()> {
        if self.realizations == 0 {
            return Err(Error::Contract("at least one realization is required".into()));
        }
        Ok(())
    }
}

/// Real-time propagation settings shared by the dynamical estimators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Propagation {
    pub scheme: Scheme,
    pub substeps: usize,
    pub epsilon: f64,
}

impl Default for Propagation {
    fn default() -> Self {
        Propagation { scheme: Scheme::Trotter2, substeps: DEFAULT_SUBSTEPS, epsilon: DEFAULT_EPSILON }
    }
}

impl Propagation {
    pub fn chebyshev() -> Self {
        Propagation { scheme: Scheme::Chebyshev, substeps: 1, ..Propagation::default() }
    }

    pub fn plan(&self, h: &HamiltonianOperator, tau: f64) -> Result<EvolutionPlan> {
        EvolutionPlan::new(self.scheme, tau, self.substeps, h.norm_bound_1(), self.epsilon)
    }

    pub(crate) fn stepper(&self, h: &HamiltonianOperator, tau: f64, exec: Exec) -> Result<Stepper> {
        Stepper::new(h, &self.plan(h, tau)?, exec)
    }
}

/// Uniform grid `t_j = jτ`, `j = 0..=steps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub tau: f64,
    pub steps: usize,
}

impl TimeGrid {
    pub fn new(tau: f64, steps: usize) -> Result<Self> {
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(Error::Contract(format!("time step must be positive, got {tau}")));
        }
        Ok(TimeGrid { tau, steps })
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.steps).map(|j| j as f64 * self.tau).collect()
    }
}

pub(crate) fn zeros(n: usize) -> Vec<Complex64> {
    vec![Complex64::new(0.0, 0.0); n]
}
