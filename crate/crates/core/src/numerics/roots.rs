//! Simultaneous (Aberth–Ehrlich) polynomial root finding with Newton polish.

use num_complex::Complex64;
use num_integer::Integer;
use serde::Serialize;

use crate::error::{domain, Error, Result};

const MAX_ITERATIONS: usize = 1_000;
const CLASSIFY_MARGIN: f64 = 1e-9;
const RESIDUAL_TOL: f64 = 1e-10;

/// Complex roots partitioned by modulus relative to the unit circle.
#[derive(Debug, Clone, Serialize)]
pub struct RootSet {
    pub roots: Vec<Complex64>,
    pub inside: Vec<usize>,
    pub on_circle: Vec<usize>,
    pub outside: Vec<usize>,
}

impl RootSet {
    pub fn inside_roots(&self) -> Vec<Complex64> {
        self.inside.iter().map(|&i| self.roots[i]).collect()
    }

    pub fn on_circle_roots(&self) -> Vec<Complex64> {
        self.on_circle.iter().map(|&i| self.roots[i]).collect()
    }

    pub fn outside_roots(&self) -> Vec<Complex64> {
        self.outside.iter().map(|&i| self.roots[i]).collect()
    }

    /// (inside, on circle, outside) counts.
    pub fn counts(&self) -> (usize, usize, usize) {
        (self.inside.len(), self.on_circle.len(), self.outside.len())
    }
}

/// Coefficients (ascending powers) of p z^t − z^s + q.
pub fn trinomial_coefficients(p: f64, s: usize, t: usize) -> Vec<f64> {
    let mut c = vec![0.0; t + 1];
    c[0] = 1.0 - p;
    c[s] -= 1.0;
    c[t] += p;
    c
}

/// Horner evaluation of the polynomial and its derivative.
fn eval_with_derivative(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut value = Complex64::new(0.0, 0.0);
    let mut deriv = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        deriv = deriv * z + value;
        value = value * z + c;
    }
    (value, deriv)
}

/// Evaluates a real polynomial (ascending coefficients) at a complex point.
pub fn poly_eval(coeffs: &[f64], z: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

/// All complex roots of Σ c_k z^k (coefficients in ascending order).
///
/// Roots come from Aberth–Ehrlich iteration polished by Newton steps and are
/// classified against the unit circle with a 1e−9 margin. Trinomials of the
/// form p z^t − z^s + q with p < s/t get the known split instead: s − g
/// inside, g on the circle (the g-th roots of unity, g = gcd(s, t)) and
/// t − s outside.
pub fn poly_roots(coefficients: &[f64]) -> Result<RootSet> {
    let degree = coefficients.len().saturating_sub(1);
    if degree == 0 {
        return domain("poly_roots needs degree >= 1");
    }
    if coefficients[degree] == 0.0 {
        return domain("leading coefficient must be nonzero");
    }
    if coefficients.iter().any(|c| !c.is_finite()) {
        return domain("coefficients must be finite");
    }
    let zeros = coefficients.iter().take_while(|&&c| c == 0.0).count();
    let reduced: Vec<Complex64> = coefficients[zeros..]
        .iter()
        .map(|&c| Complex64::new(c, 0.0))
        .collect();

    let mut roots = vec![Complex64::new(0.0, 0.0); zeros];
    if reduced.len() > 1 {
        roots.extend(aberth(&reduced)?);
    }

    let scale = coefficients.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let mut worst = 0.0f64;
    for &z in &roots {
        let r = poly_eval(coefficients, z).norm() / (scale * (1.0 + z.norm().powi(degree as i32)));
        worst = worst.max(r);
    }
    if worst > RESIDUAL_TOL {
        return Err(Error::Numerical {
            message: format!("root residual above tolerance for degree {degree}"),
            residual: worst,
        });
    }

    match trinomial_shape(coefficients) {
        Some((s, t)) => classify_trinomial(roots, s, t),
        None => Ok(classify_by_margin(roots)),
    }
}

fn aberth(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = coeffs.len() - 1;
    let lead = coeffs[n].norm();
    let radius = (coeffs[0].norm() / lead).powf(1.0 / n as f64).max(1e-3);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| {
            let angle = std::f64::consts::TAU * k as f64 / n as f64 + 0.4;
            Complex64::from_polar(radius, angle)
        })
        .collect();

    let mut converged = false;
    for _ in 0..MAX_ITERATIONS {
        let mut max_step = 0.0f64;
        for i in 0..n {
            let (value, deriv) = eval_with_derivative(coeffs, z[i]);
            if value.norm() == 0.0 {
                continue;
            }
            let ratio = value / deriv;
            let repulsion: Complex64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| (z[i] - z[j]).inv())
                .sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            if step.is_finite() {
                z[i] -= step;
                max_step = max_step.max(step.norm() / z[i].norm().max(1.0));
            }
        }
        if max_step < 1e-15 {
            converged = true;
            break;
        }
    }

    // Newton polish, keeping a step only when it reduces the residual.
    for root in z.iter_mut() {
        for _ in 0..4 {
            let (value, deriv) = eval_with_derivative(coeffs, *root);
            if deriv.norm() == 0.0 {
                break;
            }
            let candidate = *root - value / deriv;
            if eval_with_derivative(coeffs, candidate).0.norm() < value.norm() {
                *root = candidate;
            } else {
                break;
            }
        }
    }

    if !converged {
        let worst = z
            .iter()
            .map(|&r| eval_with_derivative(coeffs, r).0.norm())
            .fold(0.0, f64::max);
        if worst > RESIDUAL_TOL {
            return Err(Error::Numerical {
                message: format!("Aberth iteration did not converge in {MAX_ITERATIONS} sweeps"),
                residual: worst,
            });
        }
    }
    Ok(z)
}

/// Recognizes p z^t − z^s + q with p, q > 0, p + q = 1 (up to scaling) and
/// p < s/t, returning (s, t).
fn trinomial_shape(c: &[f64]) -> Option<(usize, usize)> {
    let nonzero: Vec<usize> = (0..c.len()).filter(|&i| c[i] != 0.0).collect();
    if nonzero.len() != 3 || nonzero[0] != 0 {
        return None;
    }
    let (s, t) = (nonzero[1], nonzero[2]);
    let (q, mid, p) = (c[0], c[s], c[t]);
    if !(q > 0.0 && p > 0.0 && mid < 0.0) {
        return None;
    }
    if ((q + p + mid) / mid).abs() > 1e-14 {
        return None;
    }
    let p_norm = p / (p + q);
    (p_norm * (t as f64) < s as f64).then_some((s, t))
}

fn classify_trinomial(mut roots: Vec<Complex64>, s: usize, t: usize) -> Result<RootSet> {
    let g = s.gcd(&t);
    let mut order: Vec<usize> = (0..roots.len()).collect();
    order.sort_by(|&a, &b| roots[a].norm().total_cmp(&roots[b].norm()));
    let inside: Vec<usize> = order[..s - g].to_vec();
    let on_circle: Vec<usize> = order[s - g..s].to_vec();
    let outside: Vec<usize> = order[s..].to_vec();
    for &i in &on_circle {
        // Snap to the nearest g-th root of unity.
        let k = (roots[i].arg() / std::f64::consts::TAU * g as f64).round();
        let unit = Complex64::from_polar(1.0, std::f64::consts::TAU * k / g as f64);
        if (roots[i] - unit).norm() > 1e-6 {
            return Err(Error::Numerical {
                message: format!("expected a root of unity of order {g}, found {}", roots[i]),
                residual: (roots[i] - unit).norm(),
            });
        }
        roots[i] = if g == 1 {
            Complex64::new(1.0, 0.0)
        } else {
            unit
        };
    }
    Ok(RootSet {
        roots,
        inside,
        on_circle,
        outside,
    })
}

fn classify_by_margin(roots: Vec<Complex64>) -> RootSet {
    let mut set = RootSet {
        roots,
        inside: Vec::new(),
        on_circle: Vec::new(),
        outside: Vec::new(),
    };
    for (i, z) in set.roots.iter().enumerate() {
        let m = z.norm();
        if m < 1.0 - CLASSIFY_MARGIN {
            set.inside.push(i);
        } else if m > 1.0 + CLASSIFY_MARGIN {
            set.outside.push(i);
        } else {
            set.on_circle.push(i);
        }
    }
    set
}
