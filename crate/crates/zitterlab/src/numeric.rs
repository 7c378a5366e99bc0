//! Small numerical utilities shared across the crate: compensated summation
//! and five-point finite-difference derivatives.
//!
//! Long reductions over spatial grids (norm integrals, mean positions) add
//! millions of terms of mixed sign; plain `f64` accumulation loses digits we
//! later assert on. Kahan-Babuska compensated summation keeps the error at a
//! few ulps independent of the term count.

use num_complex::Complex64;

/// Kahan-Babuska compensated accumulator for `f64` sums.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    /// Creates an empty accumulator.
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds one term, tracking the rounding error of the addition.
    pub fn add(&mut self, term: f64) {
        let t = self.sum + term;
        if self.sum.abs() >= term.abs() {
            self.comp += (self.sum - t) + term;
        } else {
            self.comp += (term - t) + self.sum;
        }
        self.sum = t;
    }

    /// Current compensated value of the sum.
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Compensated accumulator for complex sums (independent real/imag parts).
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanComplexSum {
    re: KahanSum,
    im: KahanSum,
}

impl KahanComplexSum {
    /// Creates an empty accumulator.
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds one complex term.
    pub fn add(&mut self, term: Complex64) {
        self.re.add(term.re);
        self.im.add(term.im);
    }

    /// Current compensated value of the sum.
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

/// Five-point central estimate of df/dx at `x` with step `h` (error O(h^4)).
pub fn five_point_derivative<F>(f: F, x: f64, h: f64) -> Complex64
where
    F: Fn(f64) -> Complex64,
{
    (f(x - 2.0 * h) - f(x - h) * 8.0 + f(x + h) * 8.0 - f(x + 2.0 * h)) / (12.0 * h)
}

/// Component-wise five-point derivative for complex 4-vectors.
pub fn five_point_derivative_vec4<F>(f: F, x: f64, h: f64) -> nalgebra::Vector4<Complex64>
where
    F: Fn(f64) -> nalgebra::Vector4<Complex64>,
{
    let scale = Complex64::new(1.0 / (12.0 * h), 0.0);
    (f(x - 2.0 * h) - f(x - h) * Complex64::new(8.0, 0.0) + f(x + h) * Complex64::new(8.0, 0.0)
        - f(x + 2.0 * h))
        * scale
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn kahan_recovers_digits_lost_by_naive_summation() {
        // 1.0 followed by many tiny terms that individually vanish against it.
        let tiny = 1e-16;
        let n = 100_000;
        let mut kahan = KahanSum::new();
        kahan.add(1.0);
        for _ in 0..n {
            kahan.add(tiny);
        }
        let exact = 1.0 + tiny * n as f64;
        assert_relative_eq!(kahan.value(), exact, max_relative = 1e-15);
    }

    #[test]
    fn complex_accumulator_matches_componentwise_sums() {
        let mut acc = KahanComplexSum::new();
        let mut re = 0.0;
        let mut im = 0.0;
        for k in 0..1000 {
            let z = Complex64::new((k as f64).sin(), (k as f64).cos());
            acc.add(z);
            re += z.re;
            im += z.im;
        }
        assert_relative_eq!(acc.value().re, re, max_relative = 1e-12);
        assert_relative_eq!(acc.value().im, im, max_relative = 1e-12);
    }

    #[test]
    fn five_point_stencil_differentiates_oscillatory_exponential() {
        // d/dx exp(3ix) = 3i exp(3ix); the stencil is fourth order in h.
        let f = |x: f64| Complex64::new(0.0, 3.0 * x).exp();
        let x = 0.7;
        let d = five_point_derivative(f, x, 1e-3);
        let exact = Complex64::new(0.0, 3.0) * Complex64::new(0.0, 3.0 * x).exp();
        assert!((d - exact).norm() < 1e-10);
    }
}
