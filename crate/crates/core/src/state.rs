//! Random pure states and their exact moment contracts.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, KahanSum};
use crate::rng::{normal_pair, open_unit, SeedSpec};

/// Dense complex amplitude vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    amps: Vec<Complex64>,
}

impl StateVector {
    /// Wraps `amps`, rejecting empty or non-finite input.
    pub fn from_amps(amps: Vec<Complex64>) -> Result<Self> {
        if amps.is_empty() {
            return Err(Error::InvalidDimension { dim: 0, reason: "state dimension must be at least 1" });
        }
        if amps.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::Contract("state amplitudes must be finite".into()));
        }
        Ok(StateVector { amps })
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(StateVector { amps: vec![Complex64::new(0.0, 0.0); dim] })
    }

    /// The computational basis state `|index⟩`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        let mut s = Self::zeros(dim)?;
        if index >= dim {
            return Err(Error::Contract(format!("basis index {index} out of range for dimension {dim}")));
        }
        s.amps[index] = Complex64::new(1.0, 0.0);
        Ok(s)
    }

    /// Uniform superposition with all amplitudes `1/√D`.
    pub fn uniform(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        let a = Complex64::new(1.0 / (dim as f64).sqrt(), 0.0);
        Ok(StateVector { amps: vec![a; dim] })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    #[inline]
    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    #[inline]
    pub fn amps_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn into_amps(self) -> Vec<Complex64> {
        self.amps
    }

    /// `⟨Φ|Φ⟩`.
    pub fn norm_sqr(&self) -> f64 {
        linalg::norm_sqr(&self.amps)
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        linalg::dot(&self.amps, &other.amps)
    }

    /// Rescales to unit norm and returns the previous squared norm.
    pub fn normalize(&mut self) -> f64 {
        let n2 = self.norm_sqr();
        if n2 > 0.0 {
            linalg::scale(&mut self.amps, 1.0 / n2.sqrt());
        }
        n2
    }

    /// Born-rule probabilities `|c_j|²`.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|c| c.norm_sqr()).collect()
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 {
        Err(Error::InvalidDimension { dim, reason: "state dimension must be at least 1" })
    } else {
        Ok(())
    }
}

/// The three random-state families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum RandomStateKind {
    /// Case A: normalized complex Gaussian amplitudes, Haar-uniform on the sphere.
    #[default]
    GaussianNormalized,
    /// Case B: complex Gaussian amplitudes with `E|c|² = 1/D`, not normalized.
    GaussianRaw,
    /// Case C: `e^{ia}/√D` with uniform phases.
    RandomPhase,
}

impl RandomStateKind {
    pub const ALL: [RandomStateKind; 3] =
        [RandomStateKind::GaussianNormalized, RandomStateKind::GaussianRaw, RandomStateKind::RandomPhase];

    /// Single-letter tag used in configs and reports.
    pub fn letter(self) -> char {
        match self {
            RandomStateKind::GaussianNormalized => 'A',
            RandomStateKind::GaussianRaw => 'B',
            RandomStateKind::RandomPhase => 'C',
        }
    }

    pub fn from_letter(s: &str) -> Option<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "A" | "GAUSSIAN-NORMALIZED" | "HAAR" => Some(RandomStateKind::GaussianNormalized),
            "B" | "GAUSSIAN-RAW" | "GAUSSIAN" => Some(RandomStateKind::GaussianRaw),
            "C" | "RANDOM-PHASE" | "PHASE" => Some(RandomStateKind::RandomPhase),
            _ => None,
        }
    }

    /// `E[|c|²]`.
    pub fn m2(self, dim: usize) -> f64 {
        1.0 / dim as f64
    }

    /// `E[|c_i|²|c_j|²]` for `i ≠ j`.
    pub fn m22(self, dim: usize) -> f64 {
        let d = dim as f64;
        match self {
            RandomStateKind::GaussianNormalized => 1.0 / (d * (d + 1.0)),
            RandomStateKind::GaussianRaw | RandomStateKind::RandomPhase => 1.0 / (d * d),
        }
    }

    /// `E[|c|⁴]`.
    pub fn m4(self, dim: usize) -> f64 {
        let d = dim as f64;
        match self {
            RandomStateKind::GaussianNormalized => 2.0 / (d * (d + 1.0)),
            RandomStateKind::GaussianRaw => 2.0 / (d * d),
            RandomStateKind::RandomPhase => 1.0 / (d * d),
        }
    }

    /// Draws one state of this kind.
    pub fn generate(self, dim: usize, seed: SeedSpec) -> Result<StateVector> {
        match self {
            RandomStateKind::GaussianNormalized => gen_gaussian_muller(dim, seed, true),
            RandomStateKind::GaussianRaw => gen_gaussian_muller(dim, seed, false),
            RandomStateKind::RandomPhase => gen_random_phase(dim, seed),
        }
    }

    /// Variance of `D⟨Φ|X|Φ⟩/⟨Φ|Φ⟩` for one realization, from `Tr X`,
    /// `Tr XX†` and `Σ|X_ii|²`.
    pub fn ratio_variance(self, dim: usize, tr_x: Complex64, tr_xxd: f64, diag_sq: f64) -> f64 {
        let d = dim as f64;
        match self {
            RandomStateKind::GaussianNormalized | RandomStateKind::GaussianRaw => {
                (d * tr_xxd - tr_x.norm_sqr()) / (d + 1.0)
            }
            RandomStateKind::RandomPhase => tr_xxd - diag_sq,
        }
    }
}

impl std::fmt::Display for RandomStateKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// Gaussian amplitudes from polar Box-Muller pairs.
///
/// With `normalize` the vector is divided by its norm (Case A); otherwise
/// each complex amplitude has `E|c|² = 1/D` (Case B).
pub fn gen_gaussian_muller(dim: usize, seed: SeedSpec, normalize: bool) -> Result<StateVector> {
    check_dim(dim)?;
    let mut rng = seed.rng();
    let mut amps = Vec::with_capacity(dim);
    let mut norm = KahanSum::new();
    for _ in 0..dim {
        let (a, b) = normal_pair(&mut rng);
        norm.add(a * a + b * b);
        amps.push(Complex64::new(a, b));
    }
    let s = if normalize { 1.0 / norm.value().sqrt() } else { 1.0 / (2.0 * dim as f64).sqrt() };
    linalg::scale(&mut amps, s);
    Ok(StateVector { amps })
}

/// Haar-uniform state from octant coordinates.
///
/// The moduli are built by stick breaking: with `Y_k² = r_k^{1/k}` the
/// amplitude `k` takes a fraction `1 − Y_k²` of the remaining weight.
/// Phases are uniform.
pub fn gen_gaussian_octant(dim: usize, seed: SeedSpec) -> Result<StateVector> {
    check_dim(dim)?;
    let mut rng = seed.rng();
    let mut moduli = vec![0.0; dim];
    let mut rest = 1.0;
    for k in (1..dim).rev() {
        let t = open_unit(&mut rng).ln() / k as f64;
        let (y2, one_minus_y2) = if t.abs() < 1e-8 { (1.0 + t, -t) } else { (t.exp(), -t.exp_m1()) };
        moduli[k] = rest * one_minus_y2;
        rest *= y2;
    }
    moduli[0] = rest;
    let amps = moduli.into_iter().map(|w| Complex64::from_polar(w.sqrt(), 2.0 * PI * rng.random::<f64>())).collect();
    Ok(StateVector { amps })
}

/// Random-phase state `e^{ia_j}/√D` (Case C).
pub fn gen_random_phase(dim: usize, seed: SeedSpec) -> Result<StateVector> {
    check_dim(dim)?;
    let mut rng = seed.rng();
    let r = 1.0 / (dim as f64).sqrt();
    let amps = (0..dim).map(|_| Complex64::from_polar(r, 2.0 * PI * rng.random::<f64>())).collect();
    Ok(StateVector { amps })
}

/// Density `(D−1)(1−z)^{D−2}` of a single outcome probability of a Haar state.
pub fn porter_thomas_pdf(z: f64, dim: usize) -> Result<f64> {
    if dim < 2 {
        return Err(Error::InvalidDimension { dim, reason: "Porter-Thomas density needs D >= 2" });
    }
    if !(0.0..=1.0).contains(&z) {
        return Ok(0.0);
    }
    let d = dim as f64;
    Ok((d - 1.0) * (1.0 - z).powi(dim as i32 - 2))
}
