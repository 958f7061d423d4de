//! Small vector kernels shared by the estimators.

use num_complex::Complex64;

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = KahanSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Compensated sum of a real sequence.
pub fn ksum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<KahanSum>().value()
}

/// `Σ |x_i|²` with compensated accumulation.
pub fn norm_sqr(x: &[Complex64]) -> f64 {
    ksum(x.iter().map(|c| c.norm_sqr()))
}

/// `⟨x|y⟩ = Σ conj(x_i) y_i`.
pub fn dot(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    debug_assert_eq!(x.len(), y.len());
    let mut re = KahanSum::new();
    let mut im = KahanSum::new();
    for (a, b) in x.iter().zip(y) {
        let p = a.conj() * b;
        re.add(p.re);
        im.add(p.im);
    }
    Complex64::new(re.value(), im.value())
}

/// `Σ w_i |x_i|²` for a real diagonal `w`.
pub fn diag_expectation(w: &[f64], x: &[Complex64]) -> f64 {
    ksum(w.iter().zip(x).map(|(a, c)| a * c.norm_sqr()))
}

pub fn scale(x: &mut [Complex64], s: f64) {
    x.iter_mut().for_each(|c| *c *= s);
}
