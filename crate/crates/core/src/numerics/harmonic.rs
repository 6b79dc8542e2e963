//! Generalized harmonic numbers H(x) = Σ_{n≥1} (1/n − 1/(n+x)) = ψ(x+1) + γ.

use std::f64::consts::PI;

use num_integer::Integer;

use super::KahanSum;
use crate::error::{domain, Error, Result};

fn is_negative_integer(x: f64) -> bool {
    x < 0.0 && x.fract() == 0.0
}

/// H(x) by the defining series, truncated at N and closed with an
/// Euler–Maclaurin tail through the B₆ term.
pub fn harmonic_h_series(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return domain(format!("H(x) needs a finite argument, got {x}"));
    }
    if is_negative_integer(x) {
        return Err(Error::Pole(x));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let n_max = 1000usize.max((20.0 * x.abs()).ceil() as usize);
    let mut acc = KahanSum::new();
    for n in 1..=n_max {
        let n = n as f64;
        acc.add(1.0 / n - 1.0 / (n + x));
    }
    // Σ_{n>N} f(n) = ∫_N^∞ f − f(N)/2 − Σ_k B_{2k}/(2k)! f^{(2k−1)}(N),
    // with f(n) = 1/n − 1/(n+x).
    let n = n_max as f64;
    let m = n + x;
    let f = 1.0 / n - 1.0 / m;
    let d1 = -1.0 / (n * n) + 1.0 / (m * m);
    let d3 = -6.0 / n.powi(4) + 6.0 / m.powi(4);
    let d5 = -120.0 / n.powi(6) + 120.0 / m.powi(6);
    let integral = (m / n).ln();
    let tail = integral - 0.5 * f - d1 / 12.0 + d3 / 720.0 - d5 / 30_240.0;
    acc.add(tail);
    Ok(acc.value())
}

/// Gauss's finite formula for H(p/q) with 0 < p < q.
pub fn harmonic_h_gauss(p: u64, q: u64) -> Result<f64> {
    if p == 0 || p >= q {
        return domain(format!("Gauss's formula needs 0 < p < q, got {p}/{q}"));
    }
    let (pf, qf) = (p as f64, q as f64);
    let mut acc = KahanSum::new();
    acc.add(qf / pf);
    acc.add(-0.5 * PI / (pf / qf * PI).tan());
    acc.add(-(2.0 * qf).ln());
    let mut n = 1u64;
    while 2 * n < q {
        let nf = n as f64;
        acc.add(2.0 * (2.0 * pf * nf / qf * PI).cos() * (nf / qf * PI).sin().ln());
        n += 1;
    }
    Ok(acc.value())
}

/// H(num/den) for any rational argument that is not a negative integer.
///
/// The fractional part goes through Gauss's formula, the integer part
/// through H(x+1) = H(x) + 1/(x+1).
pub fn harmonic_h_ratio(num: i64, den: u64) -> Result<f64> {
    if den == 0 {
        return domain("H(x) with zero denominator");
    }
    let g = (num.unsigned_abs()).gcd(&den).max(1);
    let num = num / g as i64;
    let den = den / g;
    let floor = Integer::div_floor(&num, &(den as i64));
    let frac_num = (num - floor * den as i64) as u64;
    if frac_num == 0 && floor < 0 {
        return Err(Error::Pole(floor as f64));
    }
    let base = if frac_num == 0 {
        0.0
    } else {
        harmonic_h_gauss(frac_num, den)?
    };
    let frac = frac_num as f64 / den as f64;
    let mut acc = KahanSum::new();
    acc.add(base);
    if floor > 0 {
        for j in 1..=floor {
            acc.add(1.0 / (frac + j as f64));
        }
    } else {
        // H(x) = H(x+1) − 1/(x+1), walking down from the fractional part.
        for j in 0..(-floor) {
            acc.add(-1.0 / (frac - j as f64));
        }
    }
    Ok(acc.value())
}

/// H(x) for real x; exact rationals should prefer [`harmonic_h_ratio`].
pub fn harmonic_h(x: f64) -> Result<f64> {
    if x.is_finite() && x >= 0.0 && x.fract() == 0.0 && x <= 1e6 {
        let n = x as u64;
        return Ok((1..=n).map(|k| 1.0 / k as f64).collect::<KahanSum>().value());
    }
    harmonic_h_series(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    #[test]
    fn integer_and_half() {
        assert_eq!(harmonic_h(1.0).unwrap(), 1.0);
        assert!((harmonic_h(3.0).unwrap() - 11.0 / 6.0).abs() < 1e-15);
        assert!((harmonic_h_gauss(1, 2).unwrap() - (2.0 - 2.0 * LN_2)).abs() < 1e-14);
        assert!((harmonic_h_series(0.5).unwrap() - (2.0 - 2.0 * LN_2)).abs() < 1e-12);
        assert!((harmonic_h_series(1.0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_thirds_routes_agree() {
        let g = harmonic_h_gauss(2, 3).unwrap();
        let s = harmonic_h_series(2.0 / 3.0).unwrap();
        assert!((g - s).abs() < 1e-10, "{g} vs {s}");
        // H(2/3) = 3/2 + π/(2√3) − (3/2) ln 3.
        let closed = 1.5 + PI / (2.0 * 3f64.sqrt()) - 1.5 * 3f64.ln();
        assert!((g - closed).abs() < 1e-14);
    }

    #[test]
    fn gauss_and_series_agree_for_small_denominators() {
        for q in 2..=12u64 {
            for p in 1..q {
                let g = harmonic_h_gauss(p, q).unwrap();
                let s = harmonic_h_series(p as f64 / q as f64).unwrap();
                assert!((g - s).abs() <= 1e-10, "{p}/{q}: {g} vs {s}");
            }
        }
    }

    #[test]
    fn ratio_shifts_match_series() {
        for &(n, d) in &[(7i64, 3u64), (-1, 2), (-7, 4), (5, 1), (0, 3), (10, 4)] {
            let r = harmonic_h_ratio(n, d).unwrap();
            let s = harmonic_h_series(n as f64 / d as f64).unwrap();
            assert!((r - s).abs() < 1e-10, "{n}/{d}: {r} vs {s}");
        }
    }

    #[test]
    fn poles() {
        assert!(matches!(harmonic_h(-1.0), Err(Error::Pole(_))));
        assert!(matches!(harmonic_h_ratio(-6, 3), Err(Error::Pole(_))));
        assert!(harmonic_h_gauss(3, 3).is_err());
    }
}
