//! Tree functions: the t-ary tree function T_t, the level-crossing atom
//! R_t(p) = p T_t(q p^{t−1}), and the generalized tree function T_{t/s}
//! whose values give the roots of p z^t − z^s + q inside and outside the
//! unit disk.

use std::f64::consts::TAU;

use num_complex::Complex64;
use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::numerics::gamma_internal::ln_gamma_pos;
use crate::numerics::{poly_roots, trinomial_coefficients};

/// Evaluation controls for the tree-function routines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeEvalPolicy {
    pub rel_tol: f64,
    pub max_terms: u64,
    pub newton_iters: u32,
}

impl Default for TreeEvalPolicy {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            max_terms: 1_000_000,
            newton_iters: 200,
        }
    }
}

impl TreeEvalPolicy {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || self.max_terms < 1 {
            return domain("TreeEvalPolicy needs rel_tol > 0 and max_terms >= 1");
        }
        Ok(())
    }
}

/// Radius of convergence (1/t)(1 − 1/t)^{t−1} of T_t.
pub fn tree_boundary(t: u32) -> f64 {
    let tf = t as f64;
    (1.0 / tf) * (1.0 - 1.0 / tf).powi(t as i32 - 1)
}

/// T_t(z) with the default policy.
pub fn tree_t(t: u32, z: f64) -> Result<f64> {
    tree_t_with(t, z, &TreeEvalPolicy::default())
}

/// T_t(z) = Σ C(nt, n) zⁿ / (n(t−1)+1) for 0 ≤ z ≤ (1/t)(1−1/t)^{t−1}.
///
/// A short partial sum gives a lower bound for the root of
/// F(T) = 1 + zT^t − T; Newton steps from there increase monotonically to
/// the series branch because F is convex and decreasing left of it.
pub fn tree_t_with(t: u32, z: f64, policy: &TreeEvalPolicy) -> Result<f64> {
    policy.validate()?;
    if t < 2 {
        return domain(format!("tree function needs t >= 2, got {t}"));
    }
    let boundary = tree_boundary(t);
    if !(z >= 0.0) || z > boundary * (1.0 + 1e-14) {
        return domain(format!("T_{t}(z) needs 0 <= z <= {boundary}, got {z}"));
    }
    if z == 0.0 {
        return Ok(1.0);
    }
    let tf = t as f64;
    let double_root = tf / (tf - 1.0);
    if (z - boundary).abs() <= 1e-15 * boundary {
        return Ok(double_root);
    }

    let mut value = 0.0;
    let ln_z = z.ln();
    for n in 0..16u32 {
        let nf = n as f64;
        let ln_c = ln_gamma_pos(nf * tf + 1.0)
            - ln_gamma_pos(nf + 1.0)
            - ln_gamma_pos(nf * (tf - 1.0) + 1.0)
            - (nf * (tf - 1.0) + 1.0).ln();
        value += (ln_c + nf * ln_z).exp();
    }
    let mut value = value.min(double_root);

    for _ in 0..policy.newton_iters {
        let pow = value.powi(t as i32 - 1);
        let f = 1.0 + z * pow * value - value;
        let df = tf * z * pow - 1.0;
        if df >= 0.0 {
            break;
        }
        let step = -f / df;
        let next = (value + step).min(double_root);
        if (next - value).abs() <= 1e-17 * value {
            value = next;
            break;
        }
        value = next;
    }
    let residual = (1.0 + z * value.powi(t as i32) - value).abs();
    if residual > policy.rel_tol * value {
        return Err(Error::Numerical {
            message: format!("T_{t}({z}) Newton refinement stalled"),
            residual,
        });
    }
    Ok(value)
}

/// R_t(p) = p T_t(q p^{t−1}) for p < (t−1)/t and 1 otherwise.
///
/// This is the smallest root in (0, 1] of R = p + q R^t.
pub fn r_t(t: u32, p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return domain(format!("R_t(p) needs 0 < p < 1, got {p}"));
    }
    if t < 2 {
        return domain(format!("R_t(p) needs t >= 2, got {t}"));
    }
    let tf = t as f64;
    if p * tf >= tf - 1.0 {
        return Ok(1.0);
    }
    let z = ((1.0 - p) * p.powi(t as i32 - 1)).min(tree_boundary(t));
    Ok((p * tree_t(t, z)?).min(1.0))
}

/// Convergence radius (s/t)(1 − s/t)^{t/s − 1} of T_{t/s}.
pub fn frac_tree_boundary(t: u32, s: u32) -> f64 {
    let x = s as f64 / t as f64;
    x * (1.0 - x).powf(t as f64 / s as f64 - 1.0)
}

fn check_frac_args(t: u32, s: u32, z: Complex64) -> Result<()> {
    if s == 0 || s >= t {
        return domain(format!("T_(t/s) needs 0 < s < t, got s={s}, t={t}"));
    }
    if s.gcd(&t) != 1 {
        return domain(format!("T_(t/s) needs gcd(s, t) = 1, got s={s}, t={t}"));
    }
    let boundary = frac_tree_boundary(t, s);
    if !z.is_finite() || z.norm() > boundary * (1.0 + 1e-12) {
        return domain(format!("|z| = {} exceeds the radius {boundary}", z.norm()));
    }
    Ok(())
}

/// Sums Σ_{n≥start} zⁿ C((nt + shift)/s, n) / (nt + shift) with complex z.
fn frac_series(
    t: u32,
    s: u32,
    shift: f64,
    start: u64,
    z: Complex64,
    policy: &TreeEvalPolicy,
) -> Result<Complex64> {
    let (tf, sf) = (t as f64, s as f64);
    if z.norm() == 0.0 {
        let first = if start == 0 { 1.0 } else { 0.0 };
        return Ok(Complex64::new(first, 0.0));
    }
    let ratio = z.norm() / frac_tree_boundary(t, s);
    let (ln_r, theta) = (z.norm().ln(), z.arg());
    let mut sum = Complex64::new(0.0, 0.0);
    let mut n = start;
    let mut tail = f64::INFINITY;
    while n < start + policy.max_terms {
        let nf = n as f64;
        let alpha = (nf * tf + shift) / sf;
        let ln_c = ln_gamma_pos(alpha + 1.0) - ln_gamma_pos(nf + 1.0) - ln_gamma_pos(alpha - nf + 1.0);
        let magnitude = (ln_c + nf * ln_r).exp() / (nf * tf + shift);
        sum += Complex64::from_polar(magnitude, nf * theta);
        // Terms behave like ratioⁿ n^{-3/2}.
        let geometric = if ratio < 1.0 { 1.0 / (1.0 - ratio) } else { f64::INFINITY };
        tail = magnitude * geometric.min(2.0 * (nf + 1.0));
        if n > start + 2 && tail <= 0.01 * policy.rel_tol * sum.norm().max(1e-300) {
            return Ok(sum);
        }
        n += 1;
    }
    Err(Error::Numerical {
        message: format!("generalized tree series T_({t}/{s}) truncated at {} terms", policy.max_terms),
        residual: tail,
    })
}

/// T_{t/s}(z) = Σ zⁿ C((nt+1)/s, n) / (nt+1), with T_{t/1} = T_t.
pub fn tree_t_frac(t: u32, s: u32, z: Complex64) -> Result<Complex64> {
    tree_t_frac_with(t, s, z, &TreeEvalPolicy::default())
}

pub fn tree_t_frac_with(t: u32, s: u32, z: Complex64, policy: &TreeEvalPolicy) -> Result<Complex64> {
    check_frac_args(t, s, z)?;
    frac_series(t, s, 1.0, 0, z, policy)
}

/// 1/T_{t/s}(z) by its own series 1 − Σ_{n≥1} zⁿ C((nt−1)/s, n)/(nt−1).
pub fn tree_t_frac_reciprocal(t: u32, s: u32, z: Complex64) -> Result<Complex64> {
    let policy = TreeEvalPolicy::default();
    check_frac_args(t, s, z)?;
    Ok(Complex64::new(1.0, 0.0) - frac_series(t, s, -1.0, 1, z, &policy)?)
}

/// Roots of p z^t − z^s + q from the generalized tree function.
#[derive(Debug, Clone, Serialize)]
pub struct TrinomialRoots {
    /// z_1, …, z_s in the closed unit disk; z_s = 1.
    pub inside: Vec<Complex64>,
    /// y_i = 1/w_i for the t − s roots w_i outside the unit disk.
    pub outside_reciprocals: Vec<Complex64>,
}

fn check_trinomial(s: u32, t: u32, p: f64) -> Result<()> {
    if s == 0 || s >= t || s.gcd(&t) != 1 {
        return domain(format!("need coprime 0 < s < t, got s={s}, t={t}"));
    }
    if !(p > 0.0) || p * t as f64 >= s as f64 {
        return domain(format!("need 0 < p < s/t = {s}/{t}, got {p}"));
    }
    Ok(())
}

/// z_i = ηⁱ q^{1/s} T_{t/s}(p q^{(t−s)/s} η^{it}) and
/// y_i = ωⁱ p^{1/(t−s)} T_{t/(t−s)}(q p^{s/(t−s)} ω^{it}), each checked
/// against the Aberth roots of the trinomial to 1e−8.
pub fn trinomial_roots(s: u32, t: u32, p: f64) -> Result<TrinomialRoots> {
    check_trinomial(s, t, p)?;
    let q = 1.0 - p;
    let (sf, tf) = (s as f64, t as f64);
    let k = t - s;
    let kf = k as f64;
    let policy = TreeEvalPolicy::default();

    let mut inside = Vec::with_capacity(s as usize);
    for i in 1..=s {
        let eta_i = Complex64::from_polar(1.0, TAU * i as f64 / sf);
        let eta_it = Complex64::from_polar(1.0, TAU * ((i as u64 * t as u64) % s as u64) as f64 / sf);
        let arg = eta_it * (p * q.powf((tf - sf) / sf));
        let w = tree_t_frac_with(t, s, arg, &policy)?;
        inside.push(eta_i * q.powf(1.0 / sf) * w);
    }
    let mut outside_reciprocals = Vec::with_capacity(k as usize);
    for i in 1..=k {
        let om_i = Complex64::from_polar(1.0, TAU * i as f64 / kf);
        let om_it = Complex64::from_polar(1.0, TAU * ((i as u64 * t as u64) % k as u64) as f64 / kf);
        let arg = om_it * (q * p.powf(sf / kf));
        let v = tree_t_frac_with(t, k, arg, &policy)?;
        outside_reciprocals.push(om_i * p.powf(1.0 / kf) * v);
    }

    let reference = poly_roots(&trinomial_coefficients(p, s as usize, t as usize))?;
    let mut worst = 0.0f64;
    let closed: Vec<Complex64> = reference
        .inside_roots()
        .into_iter()
        .chain(reference.on_circle_roots())
        .collect();
    for z in &inside {
        let d = closed.iter().map(|r| (r - z).norm()).fold(f64::INFINITY, f64::min);
        worst = worst.max(d);
    }
    let recips: Vec<Complex64> = reference.outside_roots().iter().map(|w| w.inv()).collect();
    for y in &outside_reciprocals {
        let d = recips.iter().map(|r| (r - y).norm()).fold(f64::INFINITY, f64::min);
        worst = worst.max(d);
    }
    if worst > 1e-8 {
        return Err(Error::Numerical {
            message: format!("tree-function roots of p z^{t} − z^{s} + q disagree with Aberth roots"),
            residual: worst,
        });
    }
    Ok(TrinomialRoots {
        inside,
        outside_reciprocals,
    })
}

/// a₀ = Π(1 − y_i) and the coefficients of g(z) = a₀ Π_{i<s}(1 − z/z_i),
/// where `inside` are the roots strictly inside the unit disk (z_s = 1
/// excluded) and `outside_reciprocals` the y_i.
pub fn g_from_roots(inside: &[Complex64], outside_reciprocals: &[Complex64]) -> Result<(f64, Vec<f64>)> {
    let one = Complex64::new(1.0, 0.0);
    let a0 = outside_reciprocals.iter().fold(one, |acc, y| acc * (one - y));
    let mut poly = vec![one];
    for z in inside {
        let mut next = vec![Complex64::new(0.0, 0.0); poly.len() + 1];
        for (k, c) in poly.iter().enumerate() {
            next[k] += c;
            next[k + 1] -= c / z;
        }
        poly = next;
    }
    let imag = poly
        .iter()
        .map(|c| (c * a0).im.abs())
        .fold(a0.im.abs(), f64::max);
    if imag > 1e-10 {
        return Err(Error::Numerical {
            message: "g(z) coefficients are not real".into(),
            residual: imag,
        });
    }
    Ok((a0.re, poly.iter().map(|c| (c * a0).re).collect()))
}

/// (a₀, [a₀, …, a_{s−1}]) from the tree-function root formulas.
pub fn a0_and_g(s: u32, t: u32, p: f64) -> Result<(f64, Vec<f64>)> {
    let roots = trinomial_roots(s, t, p)?;
    let inner = &roots.inside[..roots.inside.len() - 1];
    g_from_roots(inner, &roots.outside_reciprocals)
}
