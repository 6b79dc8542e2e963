//! Exact lattice-path counts and finite-horizon oracles.
//!
//! The counts use arbitrary-precision integers; the finite-horizon oracle
//! propagates the exact law of the walk's slack below a line and brackets
//! the infinite-horizon probability with a Lundberg-type martingale bound.

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{domain, Result};
use crate::walk_max::Threshold;

/// C(n, k) as an exact integer.
pub fn binomial_big(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut c = BigUint::one();
    for i in 0..k {
        c *= n - i;
        c /= i + 1;
    }
    c
}

/// Number of paths with steps (0,1), (1,0) from (0,0) to (n, n(t−1)+a)
/// on or below y = a + x(t−1):  (a+1)/(n(t−1)+a+1) · C(nt+a, n).
pub fn ballot_count(n: u64, t: u64, a: u64) -> BigUint {
    let total = binomial_big(n * t + a, n) * (a + 1);
    let denom = n * t.saturating_sub(1) + a + 1;
    debug_assert!((&total % denom).is_zero());
    total / denom
}

/// Exact table of constrained path counts: `rows[x][y]` counts paths from
/// the origin to (x, y) that stay on or below y = a + x(t−1).
#[derive(Debug, Clone)]
pub struct PathTable {
    pub n: u64,
    pub t: u64,
    pub a: u64,
    pub rows: Vec<Vec<BigUint>>,
}

impl PathTable {
    pub fn height_bound(&self, x: u64) -> u64 {
        self.a + x * (self.t - 1)
    }

    pub fn build(n: u64, t: u64, a: u64) -> Self {
        assert!(t >= 1, "slope t - 1 needs t >= 1");
        let bound = |x: u64| a + x * (t - 1);
        let mut rows: Vec<Vec<BigUint>> = Vec::with_capacity(n as usize + 1);
        for x in 0..=n {
            let top = bound(x) as usize;
            let mut row = vec![BigUint::zero(); top + 1];
            for y in 0..=top {
                let mut v = if x == 0 && y == 0 {
                    BigUint::one()
                } else {
                    BigUint::zero()
                };
                if y > 0 {
                    v += &row[y - 1];
                }
                if x > 0 {
                    if let Some(left) = rows[x as usize - 1].get(y) {
                        v += left;
                    }
                }
                row[y] = v;
            }
            rows.push(row);
        }
        Self { n, t, a, rows }
    }

    /// Count at the terminal corner (n, n(t−1)+a).
    pub fn count(&self) -> BigUint {
        let top = self.height_bound(self.n) as usize;
        self.rows[self.n as usize][top].clone()
    }
}

/// Dynamic-programming count of the paths counted by [`ballot_count`].
pub fn dp_paths_below(n: u64, t: u64, a: u64) -> BigUint {
    PathTable::build(n, t, a).count()
}

/// Barbier's count of paths (0,0) → (k, n), n > tk, that never touch
/// y = tx except at the origin: (n − tk) C(n+k, n) / (n+k).
pub fn barbier_count(k: u64, n: u64, t: u64) -> Result<BigUint> {
    if k == 0 || n <= t * k {
        return domain(format!("Barbier's count needs k >= 1 and n > t k, got k={k}, n={n}, t={t}"));
    }
    let total = binomial_big(n + k, n) * (n - t * k);
    Ok(total / (n + k))
}

/// DP count of paths (0,0) → (k, n) whose points after the origin lie
/// strictly above y = tx.
pub fn paths_strictly_above(k: u64, n: u64, t: u64) -> BigUint {
    let (k, n) = (k as usize, n as usize);
    let mut grid = vec![vec![BigUint::zero(); n + 1]; k + 1];
    grid[0][0] = BigUint::one();
    for x in 0..=k {
        for y in 0..=n {
            if x == 0 && y == 0 {
                continue;
            }
            if (y as u64) <= t * x as u64 {
                continue;
            }
            let mut v = BigUint::zero();
            if x > 0 {
                v += &grid[x - 1][y];
            }
            if y > 0 {
                v += &grid[x][y - 1];
            }
            grid[x][y] = v;
        }
    }
    grid[k][n].clone()
}

/// Bracket for an infinite-horizon probability from a finite-horizon DP.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HorizonBracket {
    pub lower: f64,
    pub upper: f64,
    pub horizon: u64,
    /// False when p ≥ x: no exponential tail bound exists and `lower` is the
    /// trivial 0.
    pub tail_bound_available: bool,
}

impl HorizonBracket {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, value: f64, slack: f64) -> bool {
        value >= self.lower - slack && value <= self.upper + slack
    }
}

/// Positive root θ of p e^{θ(t−s)} + q e^{−θs} = 1, which makes e^{−θ·slack}
/// a martingale for the slack walk; exists iff p < s/t.
pub fn lundberg_exponent(s: u64, t: u64, p: f64) -> Option<f64> {
    let (up, down) = ((t - s) as f64, s as f64);
    if !(p > 0.0) || p * t as f64 >= s as f64 {
        return None;
    }
    let q = 1.0 - p;
    let phi = |th: f64| p * (th * up).exp() + q * (-th * down).exp() - 1.0;
    let mut hi = 1.0;
    while phi(hi) <= 0.0 {
        hi *= 2.0;
    }
    // φ(0) = 0, φ'(0) < 0 and φ is convex, so φ < 0 exactly on (0, θ).
    let (mut a, mut b) = (0.0, hi);
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if phi(mid) > 0.0 {
            b = mid;
        } else {
            a = mid;
        }
        if b - a <= 1e-15 * b {
            break;
        }
    }
    // Any θ' ≤ θ keeps the bound valid; take the lower end.
    Some(a)
}

/// Probability that the slack walk (start `slack0`, steps −(t−s) w.p. p and
/// +s w.p. q) stays ≥ 0 at steps 1..=horizon, bracketed against staying
/// ≥ 0 forever.
pub fn stay_below_bracket(s: u64, t: u64, slack0: i64, p: f64, horizon: u64) -> Result<HorizonBracket> {
    if s == 0 || s >= t {
        return domain(format!("need 0 < s < t, got s={s}, t={t}"));
    }
    if !(p > 0.0 && p < 1.0) {
        return domain(format!("need 0 < p < 1, got {p}"));
    }
    if horizon == 0 {
        return domain("horizon must be >= 1");
    }
    let q = 1.0 - p;
    let down = (t - s) as usize;
    let up = s as usize;
    let theta = lundberg_exponent(s, t, p);

    // Slack above `cap` is lumped; e^{−θ cap} < 1e−22 bounds its later loss.
    let reach = slack0.max(0) as u64 + s * horizon;
    let cap = match theta {
        Some(th) => ((50.0 / th).ceil() as u64).min(reach),
        None => reach,
    } as usize;

    let mut alive = vec![0.0f64; cap + 1];
    let mut lumped = 0.0;
    let first_up = slack0 + s as i64;
    let first_down = slack0 - down as i64;
    for (slack, w) in [(first_up, q), (first_down, p)] {
        if slack >= 0 {
            if slack as usize > cap {
                lumped += w;
            } else {
                alive[slack as usize] += w;
            }
        }
    }
    let mut top = (first_up.max(0) as usize).min(cap);
    let mut next = vec![0.0f64; cap + 1];
    for _ in 1..horizon {
        let new_top = (top + up).min(cap);
        next[..=new_top].iter_mut().for_each(|v| *v = 0.0);
        for k in 0..=top {
            let v = alive[k];
            if v == 0.0 {
                continue;
            }
            let hi = k + up;
            if hi > cap {
                lumped += q * v;
            } else {
                next[hi] += q * v;
            }
            if k >= down {
                next[k - down] += p * v;
            }
        }
        top = new_top;
        std::mem::swap(&mut alive, &mut next);
    }

    let alive_total: f64 = alive[..=top].iter().sum();
    // Each step moves total mass at most a few ulps.
    let rounding = 4.0 * f64::EPSILON * (horizon as f64 + cap as f64);
    let upper = (alive_total + lumped + rounding).min(1.0);
    match theta {
        Some(th) => {
            let loss: f64 = alive[..=top]
                .iter()
                .enumerate()
                .map(|(k, v)| v * (-th * k as f64).exp())
                .sum::<f64>()
                + lumped * (-th * (cap + 1) as f64).exp();
            Ok(HorizonBracket {
                lower: (upper - loss - 2.0 * rounding).max(0.0),
                upper,
                horizon,
                tail_bound_available: true,
            })
        }
        None => Ok(HorizonBracket {
            lower: 0.0,
            upper,
            horizon,
            tail_bound_available: false,
        }),
    }
}

/// Bracket for P(M_{r,b}(p) ≤ x) from the exact law of the first N steps:
/// `upper` = P(max_{1≤n≤N} (r+S_n)/(r+b+n) ≤ x).
pub fn finite_horizon_sup_cdf(r: u64, b: u64, p: f64, x: Threshold, horizon: u64) -> Result<HorizonBracket> {
    let m = x.offset(r, b);
    stay_below_bracket(x.s(), x.t(), m, p, horizon)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(v: u64) -> BigUint {
        BigUint::from(v)
    }

    #[test]
    fn ballot_examples() {
        for t in 2..5 {
            for a in 0..4 {
                assert_eq!(ballot_count(0, t, a), big(1));
                assert_eq!(dp_paths_below(0, t, a), big(1));
            }
        }
        assert_eq!(ballot_count(3, 2, 0), big(5));
        assert_eq!(dp_paths_below(3, 2, 0), big(5));
        assert_eq!(ballot_count(2, 3, 1), big(7));
        assert_eq!(dp_paths_below(2, 3, 1), big(7));
        assert_eq!(ballot_count(4, 3, 0), big(55));
        assert_eq!(dp_paths_below(4, 3, 0), big(55));
    }

    #[test]
    fn catalan_numbers() {
        let catalan = [1u64, 1, 2, 5, 14, 42, 132, 429, 1430, 4862, 16796, 58786, 208012];
        for (n, &c) in catalan.iter().enumerate() {
            assert_eq!(ballot_count(n as u64, 2, 0), big(c));
        }
    }

    #[test]
    fn path_table_invariants() {
        let table = PathTable::build(6, 3, 2);
        for (x, row) in table.rows.iter().enumerate() {
            for (y, v) in row.iter().enumerate() {
                assert!(*v <= binomial_big((x + y) as u64, x as u64));
                if x > 0 && y > 0 {
                    let left = table.rows[x - 1].get(y).cloned().unwrap_or_default();
                    assert_eq!(*v, left + &row[y - 1]);
                }
            }
        }
    }

    #[test]
    fn barbier_examples() {
        assert_eq!(barbier_count(1, 3, 2).unwrap(), big(1));
        assert_eq!(barbier_count(1, 4, 2).unwrap(), big(2));
        assert_eq!(barbier_count(2, 7, 2).unwrap(), big(12));
        assert_eq!(paths_strictly_above(2, 7, 2), big(12));
        assert!(barbier_count(2, 4, 2).is_err());
    }

    #[test]
    fn lundberg_root() {
        // p=1/3, s/t=1/2: (1/3)e^θ + (2/3)e^{−θ} = 1 gives e^θ = 2.
        let th = lundberg_exponent(1, 2, 1.0 / 3.0).unwrap();
        assert!((th - std::f64::consts::LN_2).abs() < 1e-12);
        assert!(lundberg_exponent(1, 2, 0.5).is_none());
    }

    #[test]
    fn bracket_examples() {
        let half = Threshold::new(1, 2).unwrap();
        let br = finite_horizon_sup_cdf(0, 0, 1.0 / 3.0, half, 2000).unwrap();
        assert!(br.contains(0.5, 0.0) && br.width() < 1e-6, "{br:?}");
        let third = Threshold::new(1, 3).unwrap();
        let br = finite_horizon_sup_cdf(0, 0, 0.25, third, 4000).unwrap();
        assert!(br.contains(1.0 / 3.0, 0.0) && br.width() < 1e-6, "{br:?}");
        // Slack too large to be exhausted in N steps.
        let br = finite_horizon_sup_cdf(0, 50, 0.3, half, 10).unwrap();
        assert_eq!(br.upper, 1.0);
        let br = finite_horizon_sup_cdf(0, 0, 0.6, half, 100).unwrap();
        assert!(!br.tail_bound_available && br.lower == 0.0);
    }

    #[test]
    fn brackets_shrink_with_horizon() {
        let x = Threshold::new(2, 5).unwrap();
        let mut last = HorizonBracket {
            lower: 0.0,
            upper: 1.0,
            horizon: 0,
            tail_bound_available: true,
        };
        for n in [10u64, 40, 160, 640, 2560] {
            let br = finite_horizon_sup_cdf(1, 2, 0.3, x, n).unwrap();
            assert!(br.upper <= last.upper + 1e-15 && br.lower >= last.lower - 1e-15);
            last = br;
        }
        assert!(last.width() < 1e-8);
    }
}
