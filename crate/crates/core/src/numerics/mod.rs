//! Special functions, root finding, quadrature and series acceleration used
//! by the analytic formulas.

mod binomial;
mod gamma;
pub(crate) mod gamma_internal {
    pub(crate) use super::gamma::{ln_beta_pos, ln_gamma_pos};
}
mod harmonic;
pub mod quad;
mod roots;
pub mod series;

pub use binomial::{binom_cdf, binom_pmf, binom_sf, ln_binomial, reg_inc_beta};
pub use gamma::{beta, ln_beta, log_gamma};
pub use harmonic::{harmonic_h, harmonic_h_gauss, harmonic_h_ratio, harmonic_h_series};
pub use roots::{poly_eval, poly_roots, trinomial_coefficients, RootSet};

/// Compensated (Neumaier) running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl std::iter::FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = KahanSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kahan_recovers_small_terms() {
        let mut acc = KahanSum::new();
        acc.add(1.0);
        for _ in 0..10_000 {
            acc.add(1e-16);
        }
        assert!((acc.value() - (1.0 + 1e-12)).abs() < 1e-18);
    }
}
