//! Supremum M_{r,b}(p) = sup_{n≥1} (r+S_n)/(r+b+n) of the averaged binomial
//! walk, and the infimum by duality.
//!
//! Three analytic routes are provided: tree functions for thresholds
//! (t−1)/t, the generating-function recursion for a_m, and products over
//! the roots of p z^{2s} − z^{s+r} + q.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::ballot::finite_horizon_sup_cdf;
use crate::error::{domain, Error, Result};
use crate::numerics::{poly_roots, trinomial_coefficients, KahanSum};
use crate::tree_fn::{g_from_roots, r_t};

/// Parameters of the shifted walk: success probability and offsets r, b.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WalkParams {
    pub p: f64,
    pub r: u64,
    pub b: u64,
}

impl WalkParams {
    pub fn new(p: f64, r: u64, b: u64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return domain(format!("walk needs 0 < p < 1, got {p}"));
        }
        Ok(Self { p, r, b })
    }

    pub fn q(&self) -> f64 {
        1.0 - self.p
    }
}

/// A reduced fraction s/t in (0, 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Threshold {
    s: u64,
    t: u64,
}

impl Threshold {
    /// Reduces num/den; requires 0 < num < den.
    pub fn new(num: u64, den: u64) -> Result<Self> {
        if num == 0 || num >= den {
            return domain(format!("threshold must lie in (0, 1), got {num}/{den}"));
        }
        let g = num.gcd(&den);
        Ok(Self {
            s: num / g,
            t: den / g,
        })
    }

    /// (t−1)/t.
    pub fn upper_level(t: u64) -> Result<Self> {
        Self::new(t.saturating_sub(1), t)
    }

    pub fn s(&self) -> u64 {
        self.s
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn value(&self) -> f64 {
        self.s as f64 / self.t as f64
    }

    /// 1 − s/t.
    pub fn complement(&self) -> Self {
        Self {
            s: self.t - self.s,
            t: self.t,
        }
    }

    /// m = s b − (t−s) r, the only way (r, b) enter P(M_{r,b} ≤ s/t).
    pub fn offset(&self, r: u64, b: u64) -> i64 {
        self.s as i64 * b as i64 - (self.t - self.s) as i64 * r as i64
    }
}

impl fmt::Display for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.s, self.t)
    }
}

impl FromStr for Threshold {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let (a, b) = text
            .split_once('/')
            .ok_or_else(|| Error::Domain(format!("expected s/t, got {text:?}")))?;
        let parse = |v: &str| {
            v.trim()
                .parse::<u64>()
                .map_err(|e| Error::Domain(format!("bad integer {v:?} in {text:?}: {e}")))
        };
        Threshold::new(parse(a)?, parse(b)?)
    }
}

/// How a probability was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    Series,
    Quadrature,
    Roots,
    Oracle,
    MonteCarlo,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Method::ClosedForm => "closed_form",
            Method::Series => "series",
            Method::Quadrature => "quadrature",
            Method::Roots => "roots",
            Method::Oracle => "oracle",
            Method::MonteCarlo => "monte_carlo",
        };
        f.write_str(name)
    }
}

/// A probability with an error bound and the route that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbResult {
    pub value: f64,
    pub error_bound: f64,
    pub method: Method,
}

impl ProbResult {
    /// Clips the value into [0, 1]; the error bound is made nonnegative.
    pub fn new(value: f64, error_bound: f64, method: Method) -> Self {
        Self {
            value: value.clamp(0.0, 1.0),
            error_bound: error_bound.abs(),
            method,
        }
    }

    pub fn exact(value: f64) -> Self {
        Self::new(value, 0.0, Method::ClosedForm)
    }

    pub fn interval(&self) -> (f64, f64) {
        (
            (self.value - self.error_bound).max(0.0),
            (self.value + self.error_bound).min(1.0),
        )
    }
}

fn check_level(w: &WalkParams, t: u64) -> Result<i64> {
    if t < 2 {
        return domain(format!("level (t-1)/t needs t >= 2, got {t}"));
    }
    let m = (t - 1) as i64 * w.b as i64 - w.r as i64;
    if m < 0 {
        return domain(format!("needs m = b(t-1) - r >= 0, got m = {m}"));
    }
    Ok(m)
}

/// P(M_{r,b}(p) > (t−1)/t) = R_t(p)^{m+1}, m = b(t−1) − r; equals 1 once
/// p ≥ (t−1)/t.
pub fn sup_tail_high(w: &WalkParams, t: u64) -> Result<ProbResult> {
    let m = check_level(w, t)?;
    let r = r_t(t as u32, w.p)?;
    Ok(ProbResult::new(r.powi(m as i32 + 1), 1e-13, Method::ClosedForm))
}

/// P(M_{r,b}(p) ≤ (t−1)/t) = 1 − R_t(p)^{m+1}.
pub fn sup_cdf_tree(w: &WalkParams, t: u64) -> Result<ProbResult> {
    let tail = sup_tail_high(w, t)?;
    Ok(ProbResult::new(1.0 - tail.value, tail.error_bound, Method::ClosedForm))
}

/// P(M_{r,b}(p) = (t−1)/t): p − R + qR^{t−1} when m = 0, (1−R)R^m when m ≥ 1.
pub fn sup_point_mass_high(w: &WalkParams, t: u64) -> Result<ProbResult> {
    let m = check_level(w, t)?;
    let r = r_t(t as u32, w.p)?;
    let value = if m == 0 {
        w.p - r + w.q() * r.powi(t as i32 - 1)
    } else {
        (1.0 - r) * r.powi(m as i32)
    };
    Ok(ProbResult::new(value, 1e-13, Method::ClosedForm))
}

fn check_st(s: u64, t: u64) -> Result<()> {
    if s == 0 || s >= t || s.gcd(&t) != 1 {
        return domain(format!("need coprime 0 < s < t, got s={s}, t={t}"));
    }
    Ok(())
}

/// a_m = P(tS_n − ns ≤ m for all n ≥ 1) for m = 0..=m_max.
///
/// For s = 1: a_m = (1−tp) q^{−(m+1)} for m < t, then q a_k = a_{k−1} − p a_{k−t}.
/// For s > 1 the roots of p z^t − z^s + q give a₀ = Π(1 − y_i) and, after
/// the inside roots cancel against g(z), the generating function
/// a₀ / ((1−z) Π(1 − y_i z)), whose recurrence has no growing modes.
/// All a_m vanish when p ≥ s/t.
pub fn a_m_sequence(s: u64, t: u64, p: f64, m_max: usize) -> Result<Vec<f64>> {
    check_st(s, t)?;
    if !(p > 0.0 && p < 1.0) {
        return domain(format!("need 0 < p < 1, got {p}"));
    }
    if p * t as f64 >= s as f64 {
        return Ok(vec![0.0; m_max + 1]);
    }
    let q = 1.0 - p;
    if s == 1 {
        let t = t as usize;
        let mut a = Vec::with_capacity(m_max + 1);
        let a0 = (1.0 - t as f64 * p) / q;
        for m in 0..=m_max {
            let v = if m < t {
                a0 / q.powi(m as i32)
            } else {
                (a[m - 1] - p * a[m - t]) / q
            };
            a.push(v);
        }
        return Ok(a);
    }
    let (a0, _, denominator) = root_data(s, t, p)?;
    // h = coefficients of 1/Π(1 − y_i z); a_m = a₀ Σ_{k≤m} h_k.
    let mut h: Vec<f64> = Vec::with_capacity(m_max + 1);
    let mut acc = KahanSum::new();
    let mut a = Vec::with_capacity(m_max + 1);
    for k in 0..=m_max {
        let v = if k == 0 {
            1.0
        } else {
            -(1..denominator.len().min(k + 1))
                .map(|j| denominator[j] * h[k - j])
                .sum::<f64>()
        };
        h.push(v);
        acc.add(v);
        a.push((a0 * acc.value()).clamp(0.0, 1.0));
    }
    Ok(a)
}

/// (a₀, g coefficients, Π(1 − y_i z) coefficients) from the Aberth roots.
fn root_data(s: u64, t: u64, p: f64) -> Result<(f64, Vec<f64>, Vec<f64>)> {
    let set = poly_roots(&trinomial_coefficients(p, s as usize, t as usize))?;
    let inside = set.inside_roots();
    let ys: Vec<Complex64> = set.outside_roots().iter().map(|w| w.inv()).collect();
    let (a0, g) = g_from_roots(&inside, &ys)?;
    let mut poly = vec![Complex64::new(1.0, 0.0)];
    for y in &ys {
        let mut next = vec![Complex64::new(0.0, 0.0); poly.len() + 1];
        for (k, c) in poly.iter().enumerate() {
            next[k] += c;
            next[k + 1] -= c * y;
        }
        poly = next;
    }
    let imag = poly.iter().map(|c| c.im.abs()).fold(0.0, f64::max);
    if imag > 1e-10 {
        return Err(Error::Numerical {
            message: "reciprocal outside-root polynomial is not real".into(),
            residual: imag,
        });
    }
    Ok((a0, g, poly.iter().map(|c| c.re).collect()))
}

/// a_0..a_{m_max} by the full-denominator recurrence of q g(z)/(pz^t − z^s + q):
/// a_m = g_m for m < s and q a_m = a_{m−s} − p a_{m−t} afterwards.
///
/// The inside roots of the trinomial are growing modes of this recurrence,
/// so it is only reliable for moderate m.
pub fn a_m_full_recurrence(s: u64, t: u64, p: f64, m_max: usize) -> Result<Vec<f64>> {
    check_st(s, t)?;
    if !(p > 0.0) || p * t as f64 >= s as f64 {
        return a_m_sequence(s, t, p, m_max);
    }
    let q = 1.0 - p;
    let g = if s == 1 {
        vec![(1.0 - t as f64 * p) / q]
    } else {
        root_data(s, t, p)?.1
    };
    let (s, t) = (s as usize, t as usize);
    let mut a = Vec::with_capacity(m_max + 1);
    for m in 0..=m_max {
        let v = if m < s {
            g[m]
        } else {
            let back_t = if m >= t { a[m - t] } else { 0.0 };
            (a[m - s] - p * back_t) / q
        };
        a.push(v);
    }
    Ok(a)
}

/// a_m for any integer m; for −s ≤ m < 0 the first step must be a failure,
/// giving a_m = q a_{m+s}, and a_m = 0 below −s.
pub fn a_m(s: u64, t: u64, p: f64, m: i64) -> Result<f64> {
    if m < -(s as i64) {
        check_st(s, t)?;
        return Ok(0.0);
    }
    if m < 0 {
        let up = a_m_sequence(s, t, p, (m + s as i64) as usize)?;
        return Ok((1.0 - p) * up[(m + s as i64) as usize]);
    }
    Ok(*a_m_sequence(s, t, p, m as usize)?.last().expect("nonempty"))
}

/// P(M_{r,b}(p) ≤ s/t) = a_m with m = sb − (t−s)r.
pub fn sup_cdf(w: &WalkParams, x: Threshold) -> Result<ProbResult> {
    let (s, t) = (x.s(), x.t());
    if w.p * t as f64 >= s as f64 {
        return Ok(ProbResult::exact(0.0));
    }
    let m = x.offset(w.r, w.b);
    let value = a_m(s, t, w.p, m)?;
    let steps = m.unsigned_abs() as f64 + 1.0;
    Ok(if s == 1 {
        ProbResult::new(value, 8.0 * f64::EPSILON * steps, Method::ClosedForm)
    } else {
        ProbResult::new(value, 1e-12 * steps, Method::Roots)
    })
}

/// P(M_{r,b}(p) = s/t) = a_m − a_{m−1}.
pub fn sup_point_mass(w: &WalkParams, x: Threshold) -> Result<ProbResult> {
    let cdf = sup_cdf(w, x)?;
    if cdf.value == 0.0 {
        return Ok(ProbResult::exact(0.0));
    }
    let m = x.offset(w.r, w.b);
    let below = a_m(x.s(), x.t(), w.p, m - 1)?;
    Ok(ProbResult::new(cdf.value - below, 2.0 * cdf.error_bound, cdf.method))
}

/// The {0,1}-walk threshold (r+s)/(2s) addressed by the root polynomial
/// p z^{2s} − z^{s+r} + q (the ±1-walk level r/s).
pub fn roots_threshold(s_param: u64, r_param: i64) -> Result<Threshold> {
    check_roots_params(s_param, r_param)?;
    Threshold::new((s_param as i64 + r_param) as u64, 2 * s_param)
}

fn check_roots_params(s_param: u64, r_param: i64) -> Result<()> {
    if s_param == 0 || r_param == 0 || r_param.unsigned_abs() >= s_param {
        return domain(format!(
            "root route needs s > 0, r != 0, |r| < s; got s={s_param}, r={r_param}"
        ));
    }
    Ok(())
}

/// Root-product evaluation of the law of M(p) at (r+s)/(2s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RootRoute {
    pub threshold: Threshold,
    /// Π_{outside}(1 − 1/z_i).
    pub cdf: ProbResult,
    /// Π(1 − 1/z_i) + p Π(1 − z_i).
    pub point_mass: ProbResult,
}

/// Products over the s − r roots of p z^{2s} − z^{s+r} + q outside the unit
/// disk, cross-checked against [`sup_cdf`] on (r+s)/(2s). The parameters
/// need not be coprime.
pub fn sup_cdf_roots(p: f64, s_param: u64, r_param: i64) -> Result<RootRoute> {
    let threshold = roots_threshold(s_param, r_param)?;
    let lead = 2 * s_param as usize;
    let mid = (s_param as i64 + r_param) as usize;
    if !(p > 0.0) || p * lead as f64 >= mid as f64 {
        return domain(format!("root route needs 0 < p < (r+s)/(2s) = {mid}/{lead}, got {p}"));
    }
    let set = poly_roots(&trinomial_coefficients(p, mid, lead))?;
    let outside = set.outside_roots();
    if outside.len() != (s_param as i64 - r_param) as usize {
        return Err(Error::Numerical {
            message: format!("expected {} outside roots, found {}", s_param as i64 - r_param, outside.len()),
            residual: 0.0,
        });
    }
    let one = Complex64::new(1.0, 0.0);
    let cdf = outside.iter().fold(one, |acc, z| acc * (one - z.inv()));
    let tail = outside.iter().fold(one, |acc, z| acc * (one - z));
    let mass = cdf + p * tail;
    let imag = cdf.im.abs().max(mass.im.abs() / (1.0 + tail.norm()));
    if imag > 1e-10 {
        return Err(Error::Numerical {
            message: "root products are not real".into(),
            residual: imag,
        });
    }
    let walk = WalkParams::new(p, 0, 0)?;
    let recursion = sup_cdf(&walk, threshold)?;
    if (recursion.value - cdf.re).abs() > 1e-8 {
        let bracket = finite_horizon_sup_cdf(0, 0, p, threshold, 2000)?;
        return Err(Error::RouteDisagreement {
            quantity: format!("P(M({p}) <= {threshold})"),
            first: cdf.re,
            second: recursion.value,
            lower: bracket.lower,
            upper: bracket.upper,
        });
    }
    Ok(RootRoute {
        threshold,
        cdf: ProbResult::new(cdf.re, 1e-12, Method::Roots),
        point_mass: ProbResult::new(mass.re, 1e-12 * (1.0 + tail.norm()), Method::Roots),
    })
}

fn cdf_at_reciprocal(p: f64, k: u64) -> Result<f64> {
    if k == 1 {
        return Ok(1.0);
    }
    let w = WalkParams::new(p, 0, 0)?;
    Ok(sup_cdf(&w, Threshold::new(1, k)?)?.value)
}

/// P(M(p) ∈ (1/(k+1), 1/k]) for p ≤ 1/(k+1); equals p/(1−p).
pub fn equidist_interval(p: f64, k: u64) -> Result<ProbResult> {
    if k == 0 {
        return domain("interval index k must be >= 1");
    }
    if !(p > 0.0) || p * (k + 1) as f64 > 1.0 {
        return domain(format!("need 0 < p <= 1/(k+1) = 1/{}, got {p}", k + 1));
    }
    let hi = cdf_at_reciprocal(p, k)?;
    let lo = cdf_at_reciprocal(p, k + 1)?;
    Ok(ProbResult::new(hi - lo, 1e-15 * (k + 1) as f64, Method::ClosedForm))
}

/// P(M(p) ∈ (p, 1/t]) = (1 − tp)/(1 − p) for p ≤ 1/t.
pub fn equidist_residual(p: f64, t: u64) -> Result<ProbResult> {
    if t < 2 || !(p > 0.0) || p * t as f64 > 1.0 {
        return domain(format!("need t >= 2 and 0 < p <= 1/t, got t={t}, p={p}"));
    }
    Ok(ProbResult::new(cdf_at_reciprocal(p, t)?, 1e-15, Method::ClosedForm))
}

/// P(L_{r,b}(p) ≥ x) = P(M_{b,r}(1−p) ≤ 1 − x).
pub fn inf_cdf(w: &WalkParams, x: Threshold) -> Result<ProbResult> {
    let dual = WalkParams::new(w.q(), w.b, w.r)?;
    sup_cdf(&dual, x.complement())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn walk(p: f64, r: u64, b: u64) -> WalkParams {
        WalkParams::new(p, r, b).unwrap()
    }

    #[test]
    fn threshold_reduces_and_parses() {
        let x: Threshold = "4/6".parse().unwrap();
        assert_eq!((x.s(), x.t()), (2, 3));
        assert_eq!(x.to_string(), "2/3");
        assert!("3/3".parse::<Threshold>().is_err());
        assert!("0/3".parse::<Threshold>().is_err());
        assert!("a/3".parse::<Threshold>().is_err());
        assert_eq!(x.offset(1, 1), 1);
    }

    #[test]
    fn prob_result_clips() {
        let r = ProbResult::new(1.0 + 1e-17, -1e-3, Method::Series);
        assert_eq!(r.value, 1.0);
        assert_eq!(r.error_bound, 1e-3);
        assert_eq!(r.interval(), (0.999, 1.0));
    }

    #[test]
    fn tail_high_examples() {
        let v = sup_tail_high(&walk(0.5, 0, 0), 7).unwrap().value;
        assert!((v - 0.504_138).abs() < 5e-7);
        assert_eq!(sup_cdf_tree(&walk(0.9, 0, 0), 2).unwrap().value, 0.0);
        assert_eq!(sup_tail_high(&walk(0.9, 0, 0), 2).unwrap().value, 1.0);
        let phi = (5f64.sqrt() - 1.0) / 2.0;
        let v = sup_tail_high(&walk(0.5, 0, 1), 3).unwrap().value;
        assert!((v - phi.powi(3)).abs() < 1e-12);
        assert!(sup_tail_high(&walk(0.5, 3, 0), 3).is_err());
    }

    #[test]
    fn point_mass_examples() {
        for &p in &[0.1, 0.3, 0.45] {
            let q = 1.0 - p;
            let v = sup_point_mass_high(&walk(p, 0, 0), 2).unwrap().value;
            assert!((v - (q - p) * p / q).abs() < 1e-13);
        }
        let v = sup_point_mass_high(&walk(1.0 / 3.0, 0, 1), 2).unwrap().value;
        assert!((v - 0.25).abs() < 1e-13);
        assert_eq!(sup_point_mass_high(&walk(0.8, 0, 0), 3).unwrap().value, 0.0);
    }

    #[test]
    fn a_m_examples() {
        let a = a_m_sequence(1, 2, 1.0 / 3.0, 0).unwrap();
        assert!((a[0] - 0.5).abs() < 1e-15);
        let a = a_m_sequence(1, 3, 0.25, 2).unwrap();
        for (m, want) in [1.0 / 3.0, 4.0 / 9.0, 16.0 / 27.0].iter().enumerate() {
            assert!((a[m] - want).abs() < 1e-15);
        }
        assert_eq!(a_m_sequence(2, 3, 0.7, 3).unwrap(), vec![0.0; 4]);
    }

    #[test]
    fn stable_and_full_recurrences_agree() {
        for &(s, t, p) in &[(2u64, 3u64, 0.1), (2, 5, 0.3), (3, 7, 0.2), (4, 9, 0.4), (5, 8, 0.5)] {
            let a = a_m_sequence(s, t, p, 15).unwrap();
            let b = a_m_full_recurrence(s, t, p, 15).unwrap();
            for m in 0..=15 {
                assert!((a[m] - b[m]).abs() < 1e-9, "s={s} t={t} p={p} m={m}: {} vs {}", a[m], b[m]);
            }
            for w in a.windows(2) {
                assert!(w[1] >= w[0] - 1e-14);
            }
            let far = a_m_sequence(s, t, p, 400).unwrap();
            assert!((far[400] - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn negative_offsets() {
        // M_{1,0}(p) ≤ 1/2 needs a first failure, then the walk from (1,1).
        let p = 0.3;
        let v = sup_cdf(&walk(p, 1, 0), Threshold::new(1, 2).unwrap()).unwrap().value;
        let want = 1.0 - 2.0 * p;
        assert!((v - want).abs() < 1e-14);
        let br = finite_horizon_sup_cdf(1, 0, p, Threshold::new(1, 2).unwrap(), 3000).unwrap();
        assert!(br.contains(v, 1e-12));
        assert_eq!(a_m(1, 2, p, -2).unwrap(), 0.0);
    }

    #[test]
    fn sup_cdf_examples() {
        let half = Threshold::new(1, 2).unwrap();
        assert!((sup_cdf(&walk(1.0 / 3.0, 0, 0), half).unwrap().value - 0.5).abs() < 1e-15);
        let third = Threshold::new(1, 3).unwrap();
        assert!((sup_cdf(&walk(0.25, 0, 0), third).unwrap().value - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(sup_cdf(&walk(0.5, 0, 0), half).unwrap().value, 0.0);
    }

    #[test]
    fn root_route_small_case() {
        // s=2, r=−1: p z^4 − z + q at threshold 1/4.
        let p = 0.2;
        let route = sup_cdf_roots(p, 2, -1).unwrap();
        assert_eq!(route.threshold, Threshold::new(1, 4).unwrap());
        let q = 1.0 - p;
        assert!((route.cdf.value - (1.0 - 4.0 * p) / q).abs() < 1e-12);
        assert!((route.point_mass.value - p * (1.0 - 4.0 * p) / q).abs() < 1e-12);
        assert!(sup_cdf_roots(0.3, 2, -1).is_err());
        assert!(sup_cdf_roots(0.1, 2, 0).is_err());
    }

    #[test]
    fn equidistribution_examples() {
        for k in 1..=3 {
            let v = equidist_interval(0.25, k).unwrap().value;
            assert!((v - 1.0 / 3.0).abs() < 1e-12, "k={k}: {v}");
        }
        assert_eq!(equidist_residual(0.25, 4).unwrap().value, 0.0);
        assert!(equidist_interval(0.25, 4).is_err());
    }

    #[test]
    fn inf_duality_examples() {
        let v = inf_cdf(&walk(2.0 / 3.0, 0, 0), Threshold::new(1, 2).unwrap()).unwrap().value;
        assert!((v - 0.5).abs() < 1e-14);
        let v = inf_cdf(&walk(0.75, 0, 0), Threshold::new(2, 3).unwrap()).unwrap().value;
        assert!((v - 1.0 / 3.0).abs() < 1e-14);
    }
}
