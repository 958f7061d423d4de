//! Model and estimator settings resolved from a [`Config`].

use rst_core::estimate::{AveragingMode, Propagation, Sampling, SpectrumParams, ThermalParams, TimeGrid};
use rst_core::hamiltonian::{
    Boundary, Cluster, Geometry, LatticeSpec, ObservableOperator, Onsite, SpinModel, SpinModelSpec, DEFAULT_SPIN_CAP,
};
use rst_core::propagate::{EvolutionPlan, Scheme};
use rst_core::{HamiltonianOperator, RandomStateKind, SeedSpec};

use crate::config::Config;
use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Lattice,
    Spin,
}

pub struct Model {
    pub h: HamiltonianOperator,
    pub spin: Option<SpinModelSpec>,
    pub sites: usize,
}

fn cluster(cfg: &Config, default_sites: usize) -> Result<Cluster, CliError> {
    let geometry = cfg.choice("geometry", "chain", Geometry::parse)?;
    let boundary = cfg.choice("boundary", "periodic", Boundary::parse)?;
    let c = if cfg.contains("lx") {
        let lx = cfg.get("lx", 1usize)?;
        let ly = cfg.get("ly", if geometry == Geometry::Chain { 1 } else { lx })?;
        Cluster::new(geometry, lx, ly, boundary)?
    } else {
        Cluster::from_site_count(geometry, cfg.get("sites", default_sites)?, boundary)?
    };
    Ok(c)
}

pub fn build(cfg: &Config, default_kind: ModelKind) -> Result<Model, CliError> {
    let kind =
        cfg.choice("model", if default_kind == ModelKind::Lattice { "lattice" } else { "spin" }, |s| match s {
            "lattice" | "tight-binding" => Some(ModelKind::Lattice),
            "spin" | "xxz" => Some(ModelKind::Spin),
            _ => None,
        })?;
    match kind {
        ModelKind::Lattice => {
            let cluster = cluster(cfg, 1024)?;
            let onsite = match cfg.raw("onsite", "zero").as_str() {
                "zero" | "none" => Onsite::Zero,
                "anderson" => Onsite::Anderson { w: cfg.get("w", 1.0)? },
                "sinusoidal" => Onsite::SinusoidalBond { k: cfg.get("k", 1i64)? },
                other => return Err(CliError::Config(format!("onsite: unknown value {other:?}"))),
            };
            let spec =
                LatticeSpec { cluster, v: cfg.get("v", 1.0)?, onsite, disorder_seed: cfg.get("disorder_seed", 0u64)? };
            let h = HamiltonianOperator::build_lattice(&spec)?;
            Ok(Model { sites: cluster.sites(), h, spin: None })
        }
        ModelKind::Spin => {
            let cluster = cluster(cfg, 10)?;
            let spec =
                SpinModelSpec { cluster, j: cfg.get("j", -1.0)?, delta: cfg.get("delta", 1.0)?, h: cfg.get("h", 0.0)? };
            let cap = cfg.get("spin_cap", DEFAULT_SPIN_CAP)?;
            let h = HamiltonianOperator::Spin(SpinModel::build_with_cap(&spec, cap)?);
            Ok(Model { sites: spec.spins(), h, spin: Some(spec) })
        }
    }
}

impl Model {
    fn spin_spec(&self, what: &str) -> Result<&SpinModelSpec, CliError> {
        self.spin.as_ref().ok_or_else(|| CliError::Config(format!("{what} needs model = spin")))
    }

    /// `energy`, `mx`, `current` or `density` (at `site`).
    pub fn observable(&self, cfg: &Config, default: &str) -> Result<(String, Option<ObservableOperator>), CliError> {
        let name = cfg.raw("observable", default);
        let op = match name.as_str() {
            "energy" | "hamiltonian" => None,
            "mx" => Some(ObservableOperator::total_mx(self.spin_spec("mx")?.spins())),
            "current" => Some(ObservableOperator::spin_current(self.spin_spec("current")?)?),
            "density" => {
                Some(ObservableOperator::local_density(self.spin_spec("density")?.spins(), cfg.get("site", 0usize)?)?)
            }
            other => return Err(CliError::Config(format!("observable: unknown value {other:?}"))),
        };
        Ok((name, op))
    }
}

pub fn seed(cfg: &Config) -> Result<SeedSpec, CliError> {
    Ok(SeedSpec::new(cfg.get("seed", 1u64)?, cfg.get("stream", 0u64)?))
}

pub fn sampling(cfg: &Config, default_realizations: usize) -> Result<Sampling, CliError> {
    Ok(Sampling::new(
        cfg.choice("kind", "A", RandomStateKind::from_letter)?,
        cfg.get("realizations", default_realizations)?,
        cfg.choice("mode", "M2", AveragingMode::parse)?,
        seed(cfg)?,
    ))
}

pub fn propagation(cfg: &Config) -> Result<Propagation, CliError> {
    let scheme = cfg.choice("propagation", "trotter2", Scheme::parse)?;
    let d = if scheme == Scheme::Chebyshev { Propagation::chebyshev() } else { Propagation::default() };
    Ok(Propagation { scheme, substeps: cfg.get("substeps", d.substeps)?, epsilon: cfg.get("epsilon", d.epsilon)? })
}

/// Spectrum grid, with `τ` checked against `bound` before anything runs.
pub fn spectrum(cfg: &Config, bound: f64) -> Result<SpectrumParams, CliError> {
    let params = SpectrumParams {
        samples: cfg.get("samples", 1000usize)?,
        tau: cfg.get_auto("tau")?,
        sigma: cfg.get_auto("sigma")?,
        propagation: propagation(cfg)?,
    };
    params.resolve(bound)?;
    Ok(params)
}

pub fn thermal(cfg: &Config, default_realizations: usize) -> Result<ThermalParams, CliError> {
    let mut p = ThermalParams::new(sampling(cfg, default_realizations)?);
    p.epsilon = cfg.get("thermal_epsilon", p.epsilon)?;
    p.incremental = cfg.get("incremental", p.incremental)?;
    Ok(p)
}

/// Ascending inverse temperatures from `betas`, or from `temperatures` when given.
pub fn beta_grid(cfg: &Config) -> Result<Vec<f64>, CliError> {
    let mut betas = if cfg.contains("temperatures") {
        let ts = cfg.list("temperatures", "")?;
        if ts.iter().any(|t| !(*t > 0.0)) {
            return Err(CliError::Config("temperatures must be positive".into()));
        }
        ts.iter().map(|t| 1.0 / t).collect()
    } else {
        cfg.list("betas", "0.25,0.5,1,2,4")?
    };
    betas.sort_by(f64::total_cmp);
    betas.dedup();
    Ok(betas)
}

/// Time grid, with the step checked against the propagation scheme.
pub fn time_grid(cfg: &Config, h: &HamiltonianOperator, prop: &Propagation) -> Result<TimeGrid, CliError> {
    let grid = TimeGrid::new(cfg.get("dt", 0.1)?, cfg.get("steps", 100usize)?)?;
    EvolutionPlan::new(prop.scheme, grid.tau, prop.substeps, h.norm_bound_1(), prop.epsilon)?;
    Ok(grid)
}
