//! Law of the all-time maximal red fraction S_{r,b} = sup_{n≥0} Z_n in
//! Pólya's urn, obtained by mixing the walk results over Z ~ Beta(r/d, b/d).

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::numerics::gamma_internal::{ln_beta_pos, ln_gamma_pos};
use crate::numerics::quad::{integrate, integrate_beta_weighted, QuadResult};
use crate::numerics::series::richardson_sum;
use crate::numerics::{binom_cdf, binom_pmf, binom_sf, harmonic_h_ratio, ln_binomial};
use crate::tree_fn::r_t;
use crate::walk_max::{a_m, Method, ProbResult, Threshold};

const QUAD_TOL: f64 = 1e-12;
const SERIES_BLOCK: u64 = 256;
const SERIES_LEVELS: usize = 12;

/// Initial red and black counts and the number of balls added per draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct UrnParams {
    pub r: u64,
    pub b: u64,
    pub d: u64,
}

impl UrnParams {
    pub fn new(r: u64, b: u64, d: u64) -> Result<Self> {
        if r == 0 || b == 0 || d == 0 {
            return domain(format!("urn needs r, b, d >= 1, got r={r}, b={b}, d={d}"));
        }
        Ok(Self { r, b, d })
    }

    /// Shape parameters (r/d, b/d) of the limiting Beta law.
    pub fn beta_shape(&self) -> (f64, f64) {
        (self.r as f64 / self.d as f64, self.b as f64 / self.d as f64)
    }

    /// m = b(t−1) − r for the level (t−1)/t.
    pub fn level_offset(&self, t: u64) -> i64 {
        self.b as i64 * (t as i64 - 1) - self.r as i64
    }
}

fn check_level(u: &UrnParams, t: u64) -> Result<u64> {
    if t < 2 {
        return domain(format!("level (t-1)/t needs t >= 2, got {t}"));
    }
    let m = u.level_offset(t);
    if m < 0 {
        return domain(format!("needs m = b(t-1) - r >= 0, got m = {m}"));
    }
    Ok(m as u64 / u.d)
}

fn quad_result(q: QuadResult, extra: f64) -> Result<ProbResult> {
    if !q.converged {
        return Err(Error::Numerical {
            message: "quadrature did not converge".into(),
            residual: q.error,
        });
    }
    Ok(ProbResult::new(q.value, q.error + extra, Method::Quadrature))
}

// n-th term of the Beta-mixed series for P(S > (t−1)/t); the walk first
// exceeds level a after n failures and n(t−1)+a+1 successes.
fn tail_term(u: &UrnParams, t: u64, a: u64, n: u64) -> f64 {
    let (alpha, beta) = u.beta_shape();
    let (nf, tf, af) = (n as f64, t as f64, a as f64);
    let ups = nf * (tf - 1.0) + af + 1.0;
    ((af + 1.0).ln() - ups.ln() + ln_binomial(nf * tf + af, nf) + ln_beta_pos(ups + alpha, nf + beta)
        - ln_beta_pos(alpha, beta))
    .exp()
}

/// P(S_{r,b} > (t−1)/t) by the Beta-mixed first-passage series, with
/// Richardson extrapolation of the n^{−2} tail.
pub fn sup_tail_series(u: &UrnParams, t: u64) -> Result<ProbResult> {
    let a = check_level(u, t)?;
    let sum = richardson_sum(|n| tail_term(u, t, a, n), SERIES_BLOCK, SERIES_LEVELS);
    Ok(ProbResult::new(sum.value, sum.error, Method::Series))
}

/// P(S_{r,b} > (t−1)/t) = ∫ R_t(p)^{a+1} β_{r/d,b/d}(p) dp.
pub fn sup_tail_quadrature(u: &UrnParams, t: u64) -> Result<ProbResult> {
    let a = check_level(u, t)?;
    let (alpha, beta) = u.beta_shape();
    let kink = (t - 1) as f64 / t as f64;
    let q = integrate_beta_weighted(
        |p| r_t(t as u32, p).map(|r| r.powi(a as i32 + 1)).unwrap_or(f64::NAN),
        alpha,
        beta,
        0.0,
        1.0,
        &[kink],
        QUAD_TOL,
        QUAD_TOL,
    );
    quad_result(q, 1e-13)
}

/// P(max_{n≤N} Z_n ≤ (t−1)/t < S_{r,b}): the first passage happens after
/// draw N. Exact series tail, used as the horizon bias of simulations.
pub fn sup_tail_horizon_bias(u: &UrnParams, t: u64, horizon: u64) -> Result<ProbResult> {
    let a = check_level(u, t)?;
    // Passage index n completes at draw nt + a + 1.
    let first = if horizon < a + 1 { 0 } else { (horizon - a - 1) / t + 1 };
    let sum = richardson_sum(|k| tail_term(u, t, a, first + k), SERIES_BLOCK, SERIES_LEVELS);
    Ok(ProbResult::new(sum.value, sum.error, Method::Series))
}

/// P(S_{1,1} ≤ (t−1)/t) = (1 − 1/t) H(1 − 1/t).
pub fn s11_cdf(t: u64) -> Result<ProbResult> {
    if t < 2 {
        return domain(format!("t must be >= 2, got {t}"));
    }
    let x = (t - 1) as f64 / t as f64;
    let h = harmonic_h_ratio(t as i64 - 1, t)?;
    Ok(ProbResult::new(x * h, 1e-14, Method::ClosedForm))
}

/// P(S_{1,1} = (t−1)/t) = ((2t−3)/t) H(1−1/t) − ((t−2)/t) H(1−2/t) − (t−2)/(t−1).
pub fn s11_point_mass(t: u64) -> Result<ProbResult> {
    if t < 2 {
        return domain(format!("t must be >= 2, got {t}"));
    }
    let tf = t as f64;
    let h1 = harmonic_h_ratio(t as i64 - 1, t)?;
    let h2 = harmonic_h_ratio(t as i64 - 2, t)?;
    let value = (2.0 * tf - 3.0) / tf * h1 - (tf - 2.0) / tf * h2 - (tf - 2.0) / (tf - 1.0);
    Ok(ProbResult::new(value, 1e-13, Method::ClosedForm))
}

/// q_-(t) = P(S_{t−1,1} > (t−1)/t) = (t−1) Σ_n (nt)!/(nt−n+1)! · ((n+1)(t−1))!/((n+1)t)!.
pub fn q_minus(t: u64) -> Result<ProbResult> {
    if t < 2 {
        return domain(format!("t must be >= 2, got {t}"));
    }
    let tf = t as f64;
    let scale = (tf - 1.0).ln();
    let term = |n: u64| {
        let n = n as f64;
        (scale + ln_gamma_pos(n * tf + 1.0) - ln_gamma_pos(n * tf - n + 2.0)
            + ln_gamma_pos((n + 1.0) * (tf - 1.0) + 1.0)
            - ln_gamma_pos((n + 1.0) * tf + 1.0))
        .exp()
    };
    let sum = richardson_sum(term, SERIES_BLOCK, SERIES_LEVELS);
    Ok(ProbResult::new(sum.value, sum.error, Method::Series))
}

/// p_+(t) = P(S_{1,t−1} ≤ 1/t) = P(I_{t−1,1} ≥ (t−1)/t):
/// 1 − ln 2 for t = 2, ((t−1)(1−1/t)^{t−2} − 1)/(t−2) otherwise.
pub fn s_1_tm1_cdf(t: u64) -> Result<ProbResult> {
    if t < 2 {
        return domain(format!("t must be >= 2, got {t}"));
    }
    if t == 2 {
        return Ok(ProbResult::new(1.0 - std::f64::consts::LN_2, 1e-16, Method::ClosedForm));
    }
    let tf = t as f64;
    let value = ((tf - 1.0) * (1.0 - 1.0 / tf).powi(t as i32 - 2) - 1.0) / (tf - 2.0);
    Ok(ProbResult::new(value, 1e-14, Method::ClosedForm))
}

/// (t−1) ∫_0^{1/t} (1 − pt) q^{t−3} dp.
pub fn s_1_tm1_quadrature(t: u64) -> Result<ProbResult> {
    if t < 2 {
        return domain(format!("t must be >= 2, got {t}"));
    }
    let tf = t as f64;
    let q = integrate(
        |p| (tf - 1.0) * (1.0 - p * tf) * (1.0 - p).powi(t as i32 - 3),
        0.0,
        1.0 / tf,
        QUAD_TOL,
        QUAD_TOL,
    );
    quad_result(q, 0.0)
}

fn check_sa(a: u64, t: u64) -> Result<()> {
    if a < 2 || t < 2 {
        return domain(format!("need a >= 2 and t >= 2, got a={a}, t={t}"));
    }
    Ok(())
}

/// P(S_{a,a(t−1)} ≤ 1/t) = P(X = a) − P(X > a)/(a(t−1) − 1), X ~ Bin(at−1, 1/t).
pub fn s_a_cdf(a: u64, t: u64) -> Result<ProbResult> {
    check_sa(a, t)?;
    let n = a * t - 1;
    let p = 1.0 / t as f64;
    let value = binom_pmf(n, p, a) - binom_sf(n, p, a as i64) / (a * (t - 1) - 1) as f64;
    Ok(ProbResult::new(value, 1e-14, Method::ClosedForm))
}

/// t = 2 form: (1 + 1/(a−1)) C(2a−1, a) 2^{−(2a−1)} − 1/(2(a−1)).
pub fn s_a_cdf_t2(a: u64) -> Result<ProbResult> {
    check_sa(a, 2)?;
    let af = a as f64;
    let central = (ln_binomial(2.0 * af - 1.0, af) - (2.0 * af - 1.0) * std::f64::consts::LN_2).exp();
    let value = (1.0 + 1.0 / (af - 1.0)) * central - 1.0 / (2.0 * (af - 1.0));
    Ok(ProbResult::new(value, 1e-14, Method::ClosedForm))
}

/// ∫_0^{1/t} (1 − pt)/q · β_{a,a(t−1)}(p) dp.
pub fn s_a_quadrature(a: u64, t: u64) -> Result<ProbResult> {
    check_sa(a, t)?;
    let tf = t as f64;
    let q = integrate_beta_weighted(
        |p| (1.0 - p * tf) / (1.0 - p),
        a as f64,
        (a * (t - 1)) as f64,
        0.0,
        1.0 / tf,
        &[],
        QUAD_TOL,
        QUAD_TOL,
    );
    quad_result(q, 0.0)
}

/// P(S_{r,b} ≥ 1/2), by the binomial identity and by quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Equalization {
    /// 2 P(X_{b+r−1,1/2} ≤ r−1).
    pub value: ProbResult,
    /// ∫ min(1, p/q)^{b−r} β_{r,b}(p) dp.
    pub quadrature: ProbResult,
    /// r ≥ b: the urn starts at or above 1/2 and the probability is 1.
    pub degenerate: bool,
}

pub fn equalization(r: u64, b: u64) -> Result<Equalization> {
    if r == 0 || b == 0 {
        return domain(format!("need r, b >= 1, got r={r}, b={b}"));
    }
    if b <= r {
        let one = ProbResult::exact(1.0);
        return Ok(Equalization {
            value: one,
            quadrature: one,
            degenerate: true,
        });
    }
    let value = 2.0 * binom_cdf(b + r - 1, 0.5, r as i64 - 1);
    let gap = (b - r) as i32;
    let q = integrate_beta_weighted(
        |p| if p < 0.5 { (p / (1.0 - p)).powi(gap) } else { 1.0 },
        r as f64,
        b as f64,
        0.0,
        1.0,
        &[],
        QUAD_TOL,
        QUAD_TOL,
    );
    let quadrature = quad_result(q, 0.0)?;
    if (quadrature.value - value).abs() > 1e-9 {
        return Err(Error::RouteDisagreement {
            quantity: format!("P(S_{{{r},{b}}} >= 1/2)"),
            first: value,
            second: quadrature.value,
            lower: quadrature.value - quadrature.error_bound,
            upper: quadrature.value + quadrature.error_bound,
        });
    }
    Ok(Equalization {
        value: ProbResult::new(value, 1e-14, Method::ClosedForm),
        quadrature,
        degenerate: false,
    })
}

fn general_integral(u: &UrnParams, x: Threshold, shift: i64) -> Result<ProbResult> {
    if u.d != 1 {
        return domain("general thresholds are only available for d = 1");
    }
    let m = x.offset(u.r, u.b);
    let (s, t) = (x.s(), x.t());
    let top = s as f64 / t as f64;
    let mut failure = None;
    let integrand = |p: f64| {
        // Z_0 = r/(r+b) counts in S, so P(S < s/t) = 0 once m − 1 < 0.
        let lo = if shift == 0 || m < shift { Ok(0.0) } else { a_m(s, t, p, m - shift) };
        match (a_m(s, t, p, m), lo) {
            (Ok(hi), Ok(lo)) => hi - lo,
            (Err(e), _) | (_, Err(e)) => {
                failure.get_or_insert(e);
                0.0
            }
        }
    };
    let q = integrate_beta_weighted(integrand, u.r as f64, u.b as f64, 0.0, top, &[], 1e-11, 1e-11);
    if let Some(e) = failure {
        return Err(e);
    }
    // a_m is evaluated to ~1e−12 at each node.
    quad_result(q, 2e-12)
}

/// P(S_{r,b} ≤ s/t) = ∫_0^{s/t} a_m(p) β_{r,b}(p) dp with m = bs − r(t−s);
/// 0 when m < 0.
pub fn general_cdf(u: &UrnParams, x: Threshold) -> Result<ProbResult> {
    if x.offset(u.r, u.b) < 0 && u.d == 1 {
        return Ok(ProbResult::exact(0.0));
    }
    general_integral(u, x, 0)
}

/// P(S_{r,b} = s/t) = ∫ (a_m − a_{m−1}) β_{r,b} dp.
pub fn general_point_mass(u: &UrnParams, x: Threshold) -> Result<ProbResult> {
    if x.offset(u.r, u.b) < 0 && u.d == 1 {
        return Ok(ProbResult::exact(0.0));
    }
    general_integral(u, x, 1)
}

/// Values (r+id)/(r+b+nd), 0 ≤ i ≤ n ≤ N, that are ≥ r/(r+b), as reduced
/// fractions sorted by value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SupportSpec {
    pub horizon: u64,
    pub values: Vec<(u64, u64)>,
}

impl SupportSpec {
    pub fn contains(&self, num: u64, den: u64) -> bool {
        let g = num.gcd(&den).max(1);
        self.values.binary_search_by(|&(a, b)| cmp_frac(a, b, num / g, den / g)).is_ok()
    }

    pub fn as_f64(&self) -> Vec<f64> {
        self.values.iter().map(|&(a, b)| a as f64 / b as f64).collect()
    }
}

fn cmp_frac(a: u64, b: u64, c: u64, d: u64) -> std::cmp::Ordering {
    (a as u128 * d as u128).cmp(&(c as u128 * b as u128))
}

/// Support points of S_{r,b} reachable within the first N draws.
pub fn support_enum(u: &UrnParams, horizon: u64) -> Result<SupportSpec> {
    let pairs = (horizon as u128 + 1) * (horizon as u128 + 2) / 2;
    if pairs > 50_000_000 {
        return Err(Error::Oversize(format!("support enumeration up to N={horizon}")));
    }
    let (r, b, d) = (u.r, u.b, u.d);
    let mut values = Vec::new();
    for n in 0..=horizon {
        let den = r + b + n * d;
        for i in 0..=n {
            let num = r + i * d;
            if (num as u128) * ((r + b) as u128) < (r as u128) * (den as u128) {
                continue;
            }
            let g = num.gcd(&den);
            values.push((num / g, den / g));
        }
    }
    values.sort_by(|&(a, b), &(c, d)| cmp_frac(a, b, c, d));
    values.dedup();
    Ok(SupportSpec { horizon, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{LN_2, PI};

    fn urn(r: u64, b: u64, d: u64) -> UrnParams {
        UrnParams::new(r, b, d).unwrap()
    }

    #[test]
    fn tail_series_examples() {
        let v = sup_tail_series(&urn(1, 1, 1), 2).unwrap();
        assert!((v.value - LN_2).abs() < 1e-7, "{v:?}");
        assert!(v.error_bound < 1e-6);
        let v = sup_tail_series(&urn(1, 1, 1), 3).unwrap().value;
        let want = 1.0 - s11_cdf(3).unwrap().value;
        assert!((v - want).abs() < 1e-7);
        let series = sup_tail_series(&urn(2, 2, 2), 2).unwrap().value;
        let quad = sup_tail_quadrature(&urn(2, 2, 2), 2).unwrap().value;
        assert!((series - quad).abs() < 1e-5);
        assert!(sup_tail_series(&urn(3, 1, 1), 2).is_err());
    }

    #[test]
    fn s11_values() {
        assert!((s11_cdf(2).unwrap().value - (1.0 - LN_2)).abs() < 1e-14);
        let mut prev = 0.0;
        for t in 2..40 {
            let v = s11_cdf(t).unwrap().value;
            assert!(v > prev);
            prev = v;
            let pm = s11_point_mass(t).unwrap().value;
            assert!(pm >= 0.0 && pm <= v + 1e-15, "t={t}");
        }
        assert!((s11_point_mass(2).unwrap().value - (1.0 - LN_2)).abs() < 1e-14);
    }

    #[test]
    fn point_mass_matches_quadrature() {
        for t in 2..6 {
            let closed = s11_point_mass(t).unwrap().value;
            let quad = general_point_mass(&urn(1, 1, 1), Threshold::upper_level(t).unwrap()).unwrap();
            assert!((closed - quad.value).abs() < 1e-9, "t={t}: {closed} vs {quad:?}");
        }
    }

    #[test]
    fn q_minus_special_values() {
        let cases = [
            (2, LN_2),
            (3, 4.0 * PI * 3f64.sqrt() / 27.0),
            (4, 9.0 / 32.0 * LN_2 + 27.0 / 128.0 * PI),
        ];
        for (t, want) in cases {
            let v = q_minus(t).unwrap();
            assert!((v.value - want).abs() < 1e-8, "t={t}: {v:?}");
            assert!(v.error_bound < 1e-6);
        }
        for t in 2..12 {
            assert!(q_minus(t).unwrap().value >= 1.0 - 1.0 / t as f64);
        }
    }

    #[test]
    fn q_minus_is_the_urn_tail() {
        for t in 2..6 {
            let a = q_minus(t).unwrap().value;
            let b = sup_tail_quadrature(&urn(t - 1, 1, 1), t).unwrap().value;
            assert!((a - b).abs() < 1e-8, "t={t}");
        }
    }

    #[test]
    fn p_plus_values() {
        assert!((s_1_tm1_cdf(3).unwrap().value - 1.0 / 3.0).abs() < 1e-15);
        for t in 2..30 {
            let a = s_1_tm1_cdf(t).unwrap().value;
            let b = s_1_tm1_quadrature(t).unwrap().value;
            assert!((a - b).abs() < 1e-10, "t={t}");
        }
        assert!((s_1_tm1_cdf(1000).unwrap().value - (-1f64).exp()).abs() < 1e-3);
    }

    #[test]
    fn s_a_values() {
        assert!((s_a_cdf(2, 2).unwrap().value - 0.25).abs() < 1e-14);
        assert!((s_a_cdf(3, 2).unwrap().value - 7.0 / 32.0).abs() < 1e-14);
        for a in 2..=10 {
            let v = s_a_cdf(a, 2).unwrap().value;
            assert!((v - s_a_cdf_t2(a).unwrap().value).abs() < 1e-13);
            for t in 2..5 {
                let closed = s_a_cdf(a, t).unwrap().value;
                let quad = s_a_quadrature(a, t).unwrap().value;
                assert!((closed - quad).abs() < 1e-9, "a={a} t={t}");
            }
        }
        let ratio = s_a_cdf(40, 2).unwrap().value / s_a_cdf(10, 2).unwrap().value;
        assert!((ratio - 0.5).abs() < 0.1);
    }

    #[test]
    fn equalization_values() {
        assert!((equalization(1, 2).unwrap().value.value - 0.5).abs() < 1e-14);
        assert!((equalization(1, 3).unwrap().value.value - 0.25).abs() < 1e-14);
        assert!((equalization(2, 3).unwrap().value.value - 0.625).abs() < 1e-14);
        let deg = equalization(3, 3).unwrap();
        assert!(deg.degenerate && deg.value.value == 1.0);
    }

    #[test]
    fn general_cdf_routes() {
        let half = Threshold::new(1, 2).unwrap();
        let v = general_cdf(&urn(1, 1, 1), half).unwrap().value;
        assert!((v - (1.0 - LN_2)).abs() < 1e-10);
        let v = general_cdf(&urn(1, 2, 1), Threshold::new(1, 3).unwrap()).unwrap().value;
        assert!((v - 1.0 / 3.0).abs() < 1e-10);
        let v = general_cdf(&urn(1, 1, 1), Threshold::new(2, 3).unwrap()).unwrap().value;
        assert!((v - s11_cdf(3).unwrap().value).abs() < 1e-9);
        assert_eq!(general_cdf(&urn(2, 1, 1), half).unwrap().value, 0.0);
        assert!(general_cdf(&urn(1, 1, 2), half).is_err());
    }

    #[test]
    fn support_examples() {
        let s = support_enum(&urn(1, 1, 1), 1).unwrap();
        assert_eq!(s.values, vec![(1, 2), (2, 3)]);
        let s = support_enum(&urn(1, 1, 1), 2).unwrap();
        assert_eq!(s.values, vec![(1, 2), (2, 3), (3, 4)]);
        let s = support_enum(&urn(2, 1, 3), 2).unwrap();
        assert_eq!(s.values, vec![(2, 3), (5, 6), (8, 9)]);
        assert!(s.contains(10, 12));
        assert!(!s.contains(5, 9));
    }

    #[test]
    fn horizon_bias_shrinks() {
        let u = urn(1, 1, 1);
        let b1 = sup_tail_horizon_bias(&u, 2, 100).unwrap().value;
        let b2 = sup_tail_horizon_bias(&u, 2, 10_000).unwrap().value;
        assert!(b1 > b2 && b2 > 0.0 && b2 < 1e-2);
        let all = sup_tail_horizon_bias(&u, 2, 0).unwrap().value;
        assert!((all - LN_2).abs() < 1e-7);
    }
}
