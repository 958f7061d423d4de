//! Special functions: digamma, trigamma, and modified Bessel coefficients.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Euler's constant γ.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

// Bernoulli-number coefficients B_{2k}/(2k) of the digamma asymptotic series.
const DIGAMMA_ASYMPTOTIC: [f64; 7] =
    [1.0 / 12.0, -1.0 / 120.0, 1.0 / 252.0, -1.0 / 240.0, 1.0 / 132.0, -691.0 / 32760.0, 1.0 / 12.0];

/// ψ(x) = Γ'(x)/Γ(x) for x > 0.
///
/// Shifts the argument up to x ≥ 8 with ψ(x) = ψ(x+1) − 1/x, then sums the
/// asymptotic series. Absolute accuracy is close to 1e−15 for moderate x.
pub fn digamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain { function: "digamma", value: x });
    }
    let mut x = x;
    let mut shift = 0.0;
    while x < 8.0 {
        shift -= 1.0 / x;
        x += 1.0;
    }
    let inv2 = 1.0 / (x * x);
    let mut series = 0.0;
    let mut pow = inv2;
    for c in DIGAMMA_ASYMPTOTIC {
        series += c * pow;
        pow *= inv2;
    }
    Ok(shift + x.ln() - 0.5 / x - series)
}

/// ψ'(x) for x > 0, same scheme as [`digamma`].
pub fn trigamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain { function: "trigamma", value: x });
    }
    let mut x = x;
    let mut shift = 0.0;
    while x < 8.0 {
        shift += 1.0 / (x * x);
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    // 1/x + 1/2x² + Σ B_{2k}/x^{2k+1}
    let b = [1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0, 5.0 / 66.0, -691.0 / 2730.0, 7.0 / 6.0];
    let mut series = 0.0;
    let mut pow = inv * inv2;
    for c in b {
        series += c * pow;
        pow *= inv2;
    }
    Ok(shift + inv + 0.5 * inv2 + series)
}

/// Hard cap on the length of any Bessel coefficient table.
pub const MAX_ORDER: usize = 100_000;

/// Scaled modified Bessel functions `g_k = e^{−w} I_k(w)` for `k = 0..=K`,
/// computed by Miller's downward recurrence
/// `I_{k−1} = I_{k+1} + (2k/w) I_k` normalised with `Σ_{k∈ℤ} I_k(w) = e^w`.
///
/// Requires `Re w ≥ 0` so the normalisation sum involves no cancellation.
/// Purely imaginary `w = i x` gives `g_k = e^{−ix} i^k J_k(x)`.
pub fn scaled_bessel_i(w: Complex64) -> Result<Vec<Complex64>> {
    if w.re < 0.0 || !w.re.is_finite() || !w.im.is_finite() {
        return Err(Error::Domain { function: "scaled_bessel_i", value: w.re });
    }
    let r = w.norm();
    if r < 1e-300 {
        return Ok(vec![Complex64::new(1.0, 0.0)]);
    }
    let start = (r + 16.0 * r.cbrt() + 40.0).ceil() as usize;
    if start > MAX_ORDER {
        return Err(Error::Truncation { epsilon: 0.0, order: MAX_ORDER });
    }
    let two_over_w = 2.0 / w;
    let mut f = vec![Complex64::new(0.0, 0.0); start + 2];
    f[start] = Complex64::new(1e-30, 0.0);
    for k in (1..=start).rev() {
        let next = f[k + 1] + two_over_w * (k as f64) * f[k];
        f[k - 1] = next;
        if next.norm() > 1e250 {
            for v in f[k - 1..].iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    f.truncate(start + 1);
    let mut norm = f[0];
    for v in &f[1..] {
        norm += 2.0 * v;
    }
    for v in f.iter_mut() {
        *v /= norm;
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digamma_rejects_nonpositive() {
        assert!(digamma(0.0).is_err());
        assert!(digamma(-1.5).is_err());
        assert!(trigamma(0.0).is_err());
    }

    #[test]
    fn digamma_small_integers() {
        assert!((digamma(1.0).unwrap() + EULER_GAMMA).abs() < 1e-14);
        assert!((digamma(2.0).unwrap() - (1.0 - EULER_GAMMA)).abs() < 1e-14);
        assert!((digamma(3.0).unwrap() - (1.5 - EULER_GAMMA)).abs() < 1e-14);
        // ψ(1/2) = −γ − 2 ln 2
        assert!((digamma(0.5).unwrap() + EULER_GAMMA + 2.0 * 2f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn trigamma_known_values() {
        let pi2_6 = std::f64::consts::PI.powi(2) / 6.0;
        assert!((trigamma(1.0).unwrap() - pi2_6).abs() < 1e-13);
        assert!((trigamma(2.0).unwrap() - (pi2_6 - 1.0)).abs() < 1e-13);
    }

    #[test]
    fn bessel_j_matches_series() {
        // J_k(x) by its power series, fine for small x.
        fn j_series(k: usize, x: f64) -> f64 {
            let mut term = (x / 2.0).powi(k as i32) / (1..=k).map(|i| i as f64).product::<f64>();
            let mut s = term;
            for m in 1..60 {
                term *= -(x * x / 4.0) / (m as f64 * (m + k) as f64);
                s += term;
            }
            s
        }
        let x = 3.7;
        let g = scaled_bessel_i(Complex64::new(0.0, x)).unwrap();
        let phase = Complex64::new(0.0, x).exp();
        for (k, gk) in g.iter().enumerate().take(12) {
            // I_k(ix) = i^k J_k(x)
            let ik = gk * phase;
            let expected = Complex64::new(0.0, 1.0).powu(k as u32) * j_series(k, x);
            assert!((ik - expected).norm() < 1e-13, "k={k}: {ik} vs {expected}");
        }
    }

    #[test]
    fn bessel_i_sums_to_exponential() {
        let g = scaled_bessel_i(Complex64::new(40.0, 0.0)).unwrap();
        let s: f64 = g[0].re + 2.0 * g[1..].iter().map(|c| c.re).sum::<f64>();
        assert!((s - 1.0).abs() < 1e-14);
        assert!(g.iter().all(|c| c.re >= 0.0));
    }
}
