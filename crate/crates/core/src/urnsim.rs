//! Monte Carlo for S_{r,b}: direct urn dynamics and the Beta-Bernoulli
//! mixture representation, plus an exact check that both assign the same
//! probability to every finite draw sequence.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::numerics::gamma_internal::ln_beta_pos;
use crate::polya::{sup_tail_horizon_bias, UrnParams};
use crate::walk_max::{Method, ProbResult, Threshold};

/// Replications per RNG stream.
const BLOCK: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimConfig {
    pub horizon: u64,
    pub replications: u64,
    pub seed: u64,
    /// Worker offset; must fit in 32 bits.
    pub stream_id: u64,
}

impl SimConfig {
    pub fn new(horizon: u64, replications: u64, seed: u64, stream_id: u64) -> Result<Self> {
        if horizon == 0 || replications == 0 {
            return domain("horizon and replications must be >= 1");
        }
        if stream_id > u32::MAX as u64 {
            return domain(format!("stream_id {stream_id} exceeds 32 bits"));
        }
        Ok(Self {
            horizon,
            replications,
            seed,
            stream_id,
        })
    }

    fn rng(&self, block: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream((self.stream_id << 32) | block);
        rng
    }

    fn blocks(&self) -> impl IndexedParallelIterator<Item = (u64, u64)> + '_ {
        let n = self.replications.div_ceil(BLOCK) as usize;
        (0..n).into_par_iter().map(move |k| {
            let k = k as u64;
            let start = k * BLOCK;
            (k, (self.replications - start).min(BLOCK))
        })
    }
}

/// A level num/den > 0; unlike [`Threshold`] it may be ≥ 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Level {
    pub num: u64,
    pub den: u64,
}

impl Level {
    pub fn new(num: u64, den: u64) -> Result<Self> {
        if den == 0 {
            return domain("level denominator must be positive");
        }
        Ok(Self { num, den })
    }

    // (r + d i)/(r + b + d n) > num/den
    fn exceeded(&self, u: &UrnParams, i: u64, n: u64) -> bool {
        let lhs = (u.r + u.d * i) as u128 * self.den as u128;
        let rhs = self.num as u128 * (u.r + u.b + u.d * n) as u128;
        lhs > rhs
    }

    fn as_threshold(&self) -> Option<Threshold> {
        Threshold::new(self.num, self.den).ok()
    }
}

impl From<Threshold> for Level {
    fn from(x: Threshold) -> Self {
        Self {
            num: x.s(),
            den: x.t(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimSummary {
    /// Fraction of replications with max_{n≤N} Z_n > x (for attainment runs,
    /// the fraction whose maximum last improved in the final 10% of draws).
    pub estimate: f64,
    pub std_error: f64,
    pub replications: u64,
    pub horizon: u64,
    pub seed: u64,
    pub stream_id: u64,
    /// Fraction whose running maximum last improved before N/2.
    pub attained_fraction: Option<f64>,
    /// Largest last-improvement time observed.
    pub max_attain_time: Option<u64>,
}

fn summarize(c: &SimConfig, hits: u64) -> SimSummary {
    let n = c.replications as f64;
    let est = hits as f64 / n;
    SimSummary {
        estimate: est,
        std_error: (est * (1.0 - est) / n).sqrt(),
        replications: c.replications,
        horizon: c.horizon,
        seed: c.seed,
        stream_id: c.stream_id,
        attained_fraction: None,
        max_attain_time: None,
    }
}

/// Number of draws before Z_n first exceeds x, with red probability drawn
/// by `red`; None if it stays ≤ x through the horizon.
fn first_exceed<F: FnMut(u64) -> bool>(u: &UrnParams, horizon: u64, x: &Level, mut red: F) -> Option<u64> {
    if x.exceeded(u, 0, 0) {
        return Some(0);
    }
    let mut i = 0;
    for n in 1..=horizon {
        if red(i) {
            i += 1;
            if x.exceeded(u, i, n) {
                return Some(n);
            }
        }
    }
    None
}

fn urn_draw<R: Rng>(u: UrnParams, rng: &mut R) -> impl FnMut(u64) -> bool + '_ {
    let mut n = 0u64;
    move |i| {
        let total = u.r + u.b + u.d * n;
        n += 1;
        rng.random_range(0..total) < u.r + u.d * i
    }
}

// Bernoulli(z) by comparing 64 random bits against z·2^64.
fn bernoulli_cut(z: f64) -> u64 {
    if z >= 1.0 {
        u64::MAX
    } else {
        (z * 18_446_744_073_709_551_616.0) as u64
    }
}

fn limit_law(u: &UrnParams) -> Result<Beta<f64>> {
    let (a, b) = u.beta_shape();
    Beta::new(a, b).map_err(|e| Error::Domain(format!("Beta({a}, {b}): {e}")))
}

/// Estimate of P(max_{0≤n≤N} Z_n > x) by running the urn.
pub fn simulate_urn(u: &UrnParams, c: &SimConfig, x: Level) -> SimSummary {
    let hits: u64 = c
        .blocks()
        .map(|(k, reps)| {
            let mut rng = c.rng(k);
            (0..reps)
                .filter(|_| first_exceed(u, c.horizon, &x, urn_draw(*u, &mut rng)).is_some())
                .count() as u64
        })
        .collect::<Vec<_>>()
        .into_iter()
        .sum();
    summarize(c, hits)
}

/// Same estimand with Z ~ Beta(r/d, b/d) and i.i.d. Bernoulli(Z) draws.
pub fn simulate_beta_bernoulli(u: &UrnParams, c: &SimConfig, x: Level) -> Result<SimSummary> {
    let law = limit_law(u)?;
    let hits: u64 = c
        .blocks()
        .map(|(k, reps)| {
            let mut rng = c.rng(k);
            let mut hits = 0;
            for _ in 0..reps {
                let cut = bernoulli_cut(law.sample(&mut rng));
                if first_exceed(u, c.horizon, &x, |_| rng.next_u64() < cut).is_some() {
                    hits += 1;
                }
            }
            hits
        })
        .collect::<Vec<_>>()
        .into_iter()
        .sum();
    Ok(summarize(c, hits))
}

/// Per replication, the sampled limit Z and the ratio Z_N after N
/// Bernoulli(Z) draws.
pub fn beta_bernoulli_endpoints(u: &UrnParams, c: &SimConfig) -> Result<Vec<(f64, f64)>> {
    let law = limit_law(u)?;
    let blocks: Vec<Vec<(f64, f64)>> = c
        .blocks()
        .map(|(k, reps)| {
            let mut rng = c.rng(k);
            (0..reps)
                .map(|_| {
                    let z = law.sample(&mut rng);
                    let cut = bernoulli_cut(z);
                    let reds = (0..c.horizon).filter(|_| rng.next_u64() < cut).count() as u64;
                    let zn = (u.r + u.d * reds) as f64 / (u.r + u.b + u.d * c.horizon) as f64;
                    (z, zn)
                })
                .collect()
        })
        .collect();
    Ok(blocks.into_iter().flatten().collect())
}

/// Maximum over all 2^n words of |urn path probability − Beta ratio
/// B(r/d + s_n, n + b/d − s_n)/B(r/d, b/d)|.
pub fn exact_fdd_check(u: &UrnParams, n: u32) -> Result<f64> {
    if n > 8 {
        return Err(Error::Oversize(format!("exact_fdd_check enumerates 2^n words; n={n} > 8")));
    }
    let (alpha, beta) = u.beta_shape();
    let base = ln_beta_pos(alpha, beta);
    let mut worst: f64 = 0.0;
    for word in 0u32..(1 << n) {
        let mut prob = 1.0;
        let mut reds = 0u64;
        for j in 0..n as u64 {
            let red = u.r + reds * u.d;
            let total = u.r + u.b + j * u.d;
            if word >> j & 1 == 1 {
                prob *= red as f64 / total as f64;
                reds += 1;
            } else {
                prob *= (total - red) as f64 / total as f64;
            }
        }
        let sn = reds as f64;
        let mixture = (ln_beta_pos(alpha + sn, n as f64 + beta - sn) - base).exp();
        worst = worst.max((prob - mixture).abs());
    }
    Ok(worst)
}

/// Where and when each replication's running maximum was last improved.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttainmentReport {
    pub summary: SimSummary,
    /// (i, n) per replication: the maximum is (r + d i)/(r + b + d n).
    pub maxima: Vec<(u64, u64)>,
}

/// Runs the urn for the whole horizon and records the last strict
/// improvement of max_{k≤n} Z_k. The summary estimate is the fraction of
/// replications improving in the final 10% of the horizon.
pub fn estimate_attainment(u: &UrnParams, c: &SimConfig) -> AttainmentReport {
    let blocks: Vec<Vec<(u64, u64)>> = c
        .blocks()
        .map(|(k, reps)| {
            let mut rng = c.rng(k);
            (0..reps)
                .map(|_| {
                    let (mut i, mut best) = (0u64, (0u64, 0u64));
                    let mut draw = urn_draw(*u, &mut rng);
                    for n in 1..=c.horizon {
                        if draw(i) {
                            i += 1;
                            // (r+di)/(r+b+dn) > (r+d bi)/(r+b+d bn)
                            let lhs = (u.r + u.d * i) as u128 * (u.r + u.b + u.d * best.1) as u128;
                            let rhs = (u.r + u.d * best.0) as u128 * (u.r + u.b + u.d * n) as u128;
                            if lhs > rhs {
                                best = (i, n);
                            }
                        }
                    }
                    best
                })
                .collect()
        })
        .collect();
    let maxima: Vec<(u64, u64)> = blocks.into_iter().flatten().collect();
    let late = maxima.iter().filter(|m| 10 * m.1 > 9 * c.horizon).count() as u64;
    let early = maxima.iter().filter(|m| 2 * m.1 < c.horizon).count() as f64;
    let mut summary = summarize(c, late);
    summary.attained_fraction = Some(early / c.replications as f64);
    summary.max_attain_time = maxima.iter().map(|m| m.1).max();
    AttainmentReport { summary, maxima }
}

/// P(S_{r,b} > x) − P(max_{n≤N} Z_n > x), available exactly for levels
/// (t−1)/t and for levels below the start (bias 0).
pub fn horizon_bias_bound(u: &UrnParams, x: Level, horizon: u64) -> Option<ProbResult> {
    if x.exceeded(u, 0, 0) || x.num >= x.den {
        return Some(ProbResult::new(0.0, 0.0, Method::ClosedForm));
    }
    let th = x.as_threshold()?;
    if th.s() + 1 != th.t() {
        return None;
    }
    sup_tail_horizon_bias(u, th.t(), horizon).ok()
}
