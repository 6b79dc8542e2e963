use std::f64::consts::PI;

use crate::error::{domain, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// ln Γ(x) for x > 0.
///
/// Stirling's series above 10, Lanczos (g = 7) in [0.5, 10) and the
/// reflection formula below 0.5.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return domain(format!("log_gamma requires a finite x > 0, got {x}"));
    }
    Ok(ln_gamma_pos(x))
}

pub(crate) fn ln_gamma_pos(x: f64) -> f64 {
    if x >= 10.0 {
        stirling(x)
    } else if x < 0.5 {
        (PI / (PI * x).sin()).ln() - lanczos(1.0 - x)
    } else {
        lanczos(x)
    }
}

fn lanczos(x: f64) -> f64 {
    let x = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    HALF_LN_2PI + (x + 0.5) * t.ln() - t + acc.ln()
}

fn stirling(x: f64) -> f64 {
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    // Bernoulli-number corrections B_{2k} / (2k (2k-1) x^{2k-1}).
    let series = inv
        * (1.0 / 12.0
            + inv2
                * (-1.0 / 360.0
                    + inv2
                        * (1.0 / 1260.0
                            + inv2
                                * (-1.0 / 1680.0
                                    + inv2
                                        * (1.0 / 1188.0
                                            + inv2 * (-691.0 / 360_360.0 + inv2 / 156.0))))));
    (x - 0.5) * x.ln() - x + HALF_LN_2PI + series
}

/// ln B(a, b) for a, b > 0.
pub fn ln_beta(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) {
        return domain(format!("beta requires positive arguments, got ({a}, {b})"));
    }
    Ok(ln_beta_pos(a, b))
}

pub(crate) fn ln_beta_pos(a: f64, b: f64) -> f64 {
    ln_gamma_pos(a) + ln_gamma_pos(b) - ln_gamma_pos(a + b)
}

/// B(a, b) = Γ(a)Γ(b)/Γ(a+b), evaluated in log space.
pub fn beta(a: f64, b: f64) -> Result<f64> {
    ln_beta(a, b).map(f64::exp)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn log_gamma_reference_points() {
        assert!(log_gamma(1.0).unwrap().abs() < 1e-15);
        assert!(log_gamma(2.0).unwrap().abs() < 1e-15);
        assert!(rel(log_gamma(5.0).unwrap(), 24f64.ln()) < 1e-13);
        assert!(rel(log_gamma(0.5).unwrap(), PI.sqrt().ln()) < 1e-13);
        // ln(9!) straddles the Lanczos / Stirling switch.
        assert!(rel(log_gamma(10.0).unwrap(), 362_880f64.ln()) < 1e-13);
        assert!(rel(log_gamma(9.999_999).unwrap(), log_gamma(10.000_001).unwrap()) < 1e-5);
        // Γ(1/3) = 2.678938534707747633...
        assert!(rel(log_gamma(1.0 / 3.0).unwrap(), 2.678_938_534_707_747_6f64.ln()) < 1e-13);
    }

    #[test]
    fn log_gamma_matches_factorials() {
        let mut ln_fact = 0.0f64;
        for n in 1..170u32 {
            ln_fact += (n as f64).ln();
            if n == 1 {
                continue;
            }
            let v = log_gamma(n as f64 + 1.0).unwrap();
            assert!(rel(v, ln_fact) < 1e-13, "n = {n}: {v} vs {ln_fact}");
        }
    }

    #[test]
    fn log_gamma_rejects_nonpositive() {
        assert!(log_gamma(0.0).is_err());
        assert!(log_gamma(-1.5).is_err());
        assert!(log_gamma(f64::NAN).is_err());
    }

    #[test]
    fn beta_values() {
        assert!((beta(1.0, 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(rel(beta(2.0, 3.0).unwrap(), 1.0 / 12.0) < 1e-14);
        assert!(rel(beta(0.5, 0.5).unwrap(), PI) < 1e-13);
        assert!(beta(0.0, 1.0).is_err());
    }
}
