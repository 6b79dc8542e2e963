//! Summation of slowly convergent positive series whose tail admits an
//! asymptotic expansion in integer powers of 1/N (terms ~ n^{-2} times a
//! power series in 1/n), by Richardson extrapolation of doubling partial sums.

use super::KahanSum;

#[derive(Debug, Clone, Copy)]
pub struct SeriesSum {
    pub value: f64,
    pub error: f64,
    /// Number of terms actually summed.
    pub terms: u64,
}

/// Σ_{n≥0} term(n), extrapolated from partial sums at N = block·2^k,
/// k = 0..=levels.
pub fn richardson_sum<F: FnMut(u64) -> f64>(mut term: F, block: u64, levels: usize) -> SeriesSum {
    assert!(block >= 1 && levels >= 1);
    let mut partials = Vec::with_capacity(levels + 1);
    let mut acc = KahanSum::new();
    let mut n = 0u64;
    for k in 0..=levels {
        let upto = block << k;
        while n < upto {
            acc.add(term(n));
            n += 1;
        }
        partials.push(acc.value());
    }

    let last = partials[levels];
    let increment = (last - partials[levels - 1]).abs();
    if increment <= 4.0 * f64::EPSILON * last.abs() {
        // Already converged; extrapolating a geometric tail would only add noise.
        return SeriesSum {
            value: last,
            error: increment + 4.0 * f64::EPSILON * last.abs(),
            terms: n,
        };
    }

    // table[k][j] removes the N^{-1}, …, N^{-j} tail terms.
    let mut table = vec![partials];
    for j in 1..=levels {
        let prev = &table[j - 1];
        let factor = (1u64 << j) as f64 - 1.0;
        let next: Vec<f64> = (1..prev.len())
            .map(|k| prev[k] + (prev[k] - prev[k - 1]) / factor)
            .collect();
        table.push(next);
    }
    let best = table[levels][0];
    let row_prev = table[levels - 1][1];
    let diag_prev = table[levels - 1][0];
    let error = (best - row_prev).abs().max((best - diag_prev).abs()) + 4.0 * f64::EPSILON * best.abs();
    SeriesSum {
        value: best,
        error,
        terms: n,
    }
}

/// Σ_{n<end} term(n) with compensated accumulation.
pub fn partial_sum<F: FnMut(u64) -> f64>(mut term: F, end: u64) -> f64 {
    (0..end).map(&mut term).collect::<KahanSum>().value()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{LN_2, PI};

    #[test]
    fn basel() {
        let s = richardson_sum(|n| 1.0 / ((n + 1) * (n + 1)) as f64, 32, 8);
        assert!((s.value - PI * PI / 6.0).abs() < 1e-12, "{s:?}");
        assert!(s.error < 1e-9);
    }

    #[test]
    fn alternating_pairs_give_ln2() {
        let s = richardson_sum(|n| 1.0 / ((2 * n + 1) * (2 * n + 2)) as f64, 32, 8);
        assert!((s.value - LN_2).abs() < 1e-12, "{s:?}");
    }

    #[test]
    fn geometric_series_unaffected() {
        let s = richardson_sum(|n| 0.5f64.powi(n as i32), 32, 4);
        assert!((s.value - 2.0).abs() < 1e-14);
    }
}
