//! Exact and limiting moments of the block count `K_n`.
//!
//! With `U_{j+1} = K_{j+1} - K_j` the new-block indicator at step `j + 1`,
//! `K_{n+1} - 1 = sum_{j=1..n} U_{j+1}` and, given the weights, the `U`s are
//! independent Bernoulli(`r_j`). Every factorial moment therefore reduces to
//!
//! ```text
//! phi(n, m) = sum_{1 <= l_1 < ... < l_m <= n} E[r_{l_1} ... r_{l_m}]
//! ```
//!
//! and with independent weights `E[r_{l_1} ... r_{l_m}]` is a product of
//! Beta power moments, `W_i` carrying exponent `m + 1 - j` on
//! `(l_{j-1}, l_j]`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::schedule::BetaSchedule;

/// Largest `k` for which Stirling numbers of the second kind are tabulated.
pub const STIRLING_MAX: usize = 30;

/// Largest `n` accepted by [`exact_block_count_distribution`].
pub const EXACT_DISTRIBUTION_MAX_N: usize = 16;

/// `E[r_n] = prod_{j=1..n} E[W_j]`, accumulated in log space.
pub fn expected_new_weight(schedule: &BetaSchedule, n: usize) -> Result<f64> {
    let mut log = 0.0;
    for j in 1..=n {
        log += schedule.weight_moment(j, 1)?.ln();
    }
    Ok(log.exp())
}

/// `E[p_{n,k}] = (1 - E[W_k]) prod_{j=k+1..n} E[W_j]` for `1 <= k <= n`.
pub fn expected_pair_weight(schedule: &BetaSchedule, n: usize, k: usize) -> Result<f64> {
    if k == 0 || k > n {
        return domain(format!("pair index k = {k} must lie in 1..={n}"));
    }
    let mut log = (-schedule.weight_moment(k, 1)?).ln_1p();
    for j in k + 1..=n {
        log += schedule.weight_moment(j, 1)?.ln();
    }
    Ok(log.exp())
}

/// `E[K_n] = 1 + sum_{j=1..n-1} E[r_j]`.
pub fn expected_block_count(schedule: &BetaSchedule, n: usize) -> Result<f64> {
    if n == 0 {
        return domain("E[K_n] needs n >= 1");
    }
    let mut total = 1.0;
    let mut log_r = 0.0;
    for j in 1..n {
        log_r += schedule.weight_moment(j, 1)?.ln();
        total += log_r.exp();
    }
    Ok(total)
}

/// Beta power moments `E[W_i^k]` for `i = 1..=n`, `k = 0..=max_k`;
/// `table[i - 1][k]`.
fn power_moments(schedule: &BetaSchedule, n: usize, max_k: usize) -> Result<Vec<Vec<f64>>> {
    (1..=n)
        .map(|i| {
            let mut row = Vec::with_capacity(max_k + 1);
            row.push(1.0);
            if let BetaSchedule::DpDeterministic { .. } = schedule {
                let w = schedule.weight_moment(i, 1)?;
                for k in 1..=max_k {
                    row.push(row[k - 1] * w);
                }
            } else {
                let (a, b) = schedule.params(i)?;
                for k in 1..=max_k {
                    let t = (k - 1) as f64;
                    row.push(row[k - 1] * (a + t) / (a + b + t));
                }
            }
            Ok(row)
        })
        .collect()
}

/// One `phi(n, m)` from precomputed power moments, by dynamic programming
/// over (index, level): `f_j(i)` sums every placement of `l_1 < ... < l_j = i`,
/// and `f_j(i) = E[W_i^{m+1-j}] (f_{j-1}(i-1) + f_j(i-1))`.
fn phi_from_moments(moments: &[Vec<f64>], m: usize) -> f64 {
    let n = moments.len();
    if m == 0 {
        return 1.0;
    }
    if m > n {
        return 0.0;
    }
    // prev[i] = f_{j-1}(i) for i = 0..=n
    let mut prev = vec![0.0; n + 1];
    prev[0] = 1.0;
    let mut cur = vec![0.0; n + 1];
    for level in 1..=m {
        let exponent = m + 1 - level;
        cur[0] = 0.0;
        for i in 1..=n {
            cur[i] = moments[i - 1][exponent] * (prev[i - 1] + cur[i - 1]);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[1..].iter().sum()
}

/// `phi(n, m)`; zero when `m > n`, one when `m = 0`.
pub fn phi(schedule: &BetaSchedule, n: usize, m: usize) -> Result<f64> {
    if m > n {
        return Ok(0.0);
    }
    let moments = power_moments(schedule, n, m)?;
    Ok(phi_from_moments(&moments, m))
}

/// `phi(n, m)` for `m = 0..=max_m` at a fixed `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentTable {
    pub n: usize,
    pub phi: Vec<f64>,
}

impl MomentTable {
    pub fn new(schedule: &BetaSchedule, n: usize, max_m: usize) -> Result<Self> {
        let top = max_m.min(n);
        let moments = power_moments(schedule, n, top)?;
        let mut phi: Vec<f64> = (0..=top).map(|m| phi_from_moments(&moments, m)).collect();
        phi.resize(max_m + 1, 0.0);
        Ok(Self { n, phi })
    }

    pub fn max_m(&self) -> usize {
        self.phi.len() - 1
    }

    /// `E[(K_{n+1} - 1)_(m)] = m! phi(n, m)`.
    pub fn falling_moment(&self, m: usize) -> Result<f64> {
        let p = self.get(m)?;
        Ok(factorial(m) * p)
    }

    /// `E[(K_{n+1} - 1)^k] = sum_m m! S(k, m) phi(n, m)`.
    pub fn raw_moment(&self, k: usize) -> Result<f64> {
        if k == 0 {
            return Ok(1.0);
        }
        if k > STIRLING_MAX {
            return domain(format!("raw moments tabulated up to k = {STIRLING_MAX}"));
        }
        let s = stirling2_table(k);
        (1..=k.min(self.n))
            .map(|m| Ok(factorial(m) * s[k][m] as f64 * self.get(m)?))
            .sum()
    }

    /// `E[exp(-t K_{n+1})] = e^{-t} sum_{m=0..n} (e^{-t} - 1)^m phi(n, m)`,
    /// summed over the tabulated range.
    pub fn mgf(&self, t: f64) -> f64 {
        let x = (-t).exp_m1();
        let mut pow = 1.0;
        let mut total = 0.0;
        for p in &self.phi {
            total += pow * p;
            pow *= x;
        }
        (-t).exp() * total
    }

    fn get(&self, m: usize) -> Result<f64> {
        if m > self.n {
            return Ok(0.0);
        }
        self.phi
            .get(m)
            .copied()
            .ok_or(Error::OutOfRange { index: m, len: self.phi.len() })
    }
}

/// `E[(K_{n+1} - 1)_(m)] = m! phi(n, m)`.
pub fn falling_moment(schedule: &BetaSchedule, n: usize, m: usize) -> Result<f64> {
    Ok(factorial(m) * phi(schedule, n, m)?)
}

/// Moment generating function `M_{n+1}(t) = E[exp(-t K_{n+1})]`.
///
/// The series is summed exactly for `n <= 64`. Beyond that, terms are added
/// until `m` passes `E[K_{n+1}]` and three consecutive terms fall below
/// `1e-17` of the running sum; `phi(n, m)` behaves like
/// `E[binom(K_{n+1} - 1, m)]` and vanishes quickly past the bulk of `K`.
pub fn block_count_mgf(schedule: &BetaSchedule, n: usize, t: f64) -> Result<f64> {
    if !t.is_finite() {
        return domain("t must be finite");
    }
    let x = (-t).exp_m1();
    let full = n <= 64;
    let mean_k = expected_block_count(schedule, n + 1)?;
    let mut moments = power_moments(schedule, n, 0)?;
    let mut total = 1.0;
    let mut pow = 1.0;
    let mut small_run = 0;
    for m in 1..=n {
        extend_moments(schedule, &mut moments, m)?;
        pow *= x;
        let term = pow * phi_from_moments(&moments, m);
        total += term;
        if !full && m as f64 > mean_k {
            if term.abs() <= 1e-17 * total.abs() {
                small_run += 1;
                if small_run >= 3 {
                    break;
                }
            } else {
                small_run = 0;
            }
        }
    }
    Ok((-t).exp() * total)
}

fn extend_moments(schedule: &BetaSchedule, moments: &mut [Vec<f64>], k: usize) -> Result<()> {
    for (idx, row) in moments.iter_mut().enumerate() {
        while row.len() <= k {
            let next = match schedule {
                BetaSchedule::DpDeterministic { .. } => {
                    row[row.len() - 1] * schedule.weight_moment(idx + 1, 1)?
                }
                _ => {
                    let (a, b) = schedule.params(idx + 1)?;
                    let t = (row.len() - 1) as f64;
                    row[row.len() - 1] * (a + t) / (a + b + t)
                }
            };
            row.push(next);
        }
    }
    Ok(())
}

/// Exact law of `K_{n+1}`: entry `k` is `P(K_{n+1} = k + 1)`, `k = 0..=n`.
///
/// Enumerates all `2^n` new-block patterns: `E[prod_{i in S} r_i]` for every
/// index set `S`, then a Moebius inversion over supersets turns those into
/// pattern probabilities. Exponential in `n`; intended as a reference for
/// small `n`.
pub fn exact_block_count_distribution(schedule: &BetaSchedule, n: usize) -> Result<Vec<f64>> {
    if n > EXACT_DISTRIBUTION_MAX_N {
        return domain(format!("exact distribution limited to n <= {EXACT_DISTRIBUTION_MAX_N}"));
    }
    let moments = power_moments(schedule, n, n)?;
    let size = 1usize << n;
    // f[mask] = E[prod_{i in mask} r_{i+1}]; r_{i+1} contains W_1..W_{i+1}.
    let mut f: Vec<f64> = (0..size)
        .map(|mask: usize| {
            let mut count = 0usize;
            let mut prod = 1.0;
            for t in (0..n).rev() {
                if mask >> t & 1 == 1 {
                    count += 1;
                }
                prod *= moments[t][count];
            }
            prod
        })
        .collect();
    for bit in 0..n {
        for mask in 0..size {
            if mask >> bit & 1 == 0 {
                f[mask] -= f[mask | 1 << bit];
            }
        }
    }
    let mut dist = vec![0.0; n + 1];
    for (mask, p) in f.iter().enumerate() {
        dist[mask.count_ones() as usize] += p;
    }
    Ok(dist)
}

pub fn factorial(m: usize) -> f64 {
    (1..=m).map(|x| x as f64).product()
}

/// Stirling numbers of the second kind `S(k, m)` for `k, m <= max_k`,
/// from `S(k, m) = m S(k-1, m) + S(k-1, m-1)`. Exact up to
/// [`STIRLING_MAX`] (the largest entry, near `1e23`, fits a `u128`).
pub fn stirling2_table(max_k: usize) -> Vec<Vec<u128>> {
    let mut s = vec![vec![0u128; max_k + 1]; max_k + 1];
    s[0][0] = 1;
    for k in 1..=max_k {
        for m in 1..=k {
            s[k][m] = m as u128 * s[k - 1][m] + s[k - 1][m - 1];
        }
    }
    s
}

fn check_ab(a: f64, b: f64) -> Result<()> {
    if a.is_finite() && b.is_finite() && a > 0.0 && b > 0.0 {
        Ok(())
    } else {
        domain(format!("a and b must be positive, got a = {a}, b = {b}"))
    }
}

/// `g_j / (1 - g_j)` with `g_j = E[W^j] = (a)^(j) / (a + b)^(j)`, for `j = 1..=m`.
fn limit_ratios(a: f64, b: f64, m: usize) -> Vec<f64> {
    let mut g = 1.0;
    (1..=m)
        .map(|j| {
            let t = (j - 1) as f64;
            g *= (a + t) / (a + b + t);
            g / (1.0 - g)
        })
        .collect()
}

/// `E[(K_inf - 1)_(m)] = m! prod_{j=1..m} (a)^(j) / ((a + b)^(j) - (a)^(j))`
/// for the constant `Beta(a, b)` schedule, the `n -> inf` limit of
/// `m! phi(n, m)`.
///
/// The closed form is stated for the falling factorial of `K_inf - 1`; it is
/// the one consistent with `E[K_inf] = 2` at `a = b = 1`.
pub fn limit_falling_moment(a: f64, b: f64, m: usize) -> Result<f64> {
    check_ab(a, b)?;
    if m == 0 {
        return domain("m must be >= 1");
    }
    Ok(factorial(m) * limit_ratios(a, b, m).iter().product::<f64>())
}

/// Partial sum of the limiting Laplace transform `E[exp(-t K_inf)]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitMgf {
    pub value: f64,
    /// Highest series index included.
    pub terms: usize,
    /// Magnitude of the first omitted term.
    pub truncation_bound: f64,
}

/// `e^{-t} sum_{m >= 0} (e^{-t} - 1)^m prod_{j <= m} g_j / (1 - g_j)`, stopping
/// when a term drops below `1e-14` or after `max_terms`.
pub fn limit_mgf(a: f64, b: f64, t: f64, max_terms: usize) -> Result<LimitMgf> {
    check_ab(a, b)?;
    if !(t > 0.0 && t.is_finite()) {
        return domain(format!("series needs t > 0, got {t}"));
    }
    if max_terms == 0 {
        return domain("max_terms must be >= 1");
    }
    let x = (-t).exp_m1();
    let ratios = limit_ratios(a, b, max_terms + 1);
    let mut term = 1.0;
    let mut total = 1.0;
    let mut terms = 0;
    for &ratio in &ratios[..max_terms] {
        term *= x * ratio;
        total += term;
        terms += 1;
        if term.abs() < 1e-14 {
            break;
        }
    }
    let next = term * x * ratios[terms];
    Ok(LimitMgf { value: (-t).exp() * total, terms, truncation_bound: ((-t).exp() * next).abs() })
}

/// `Gamma(theta + k) / Gamma(theta)`, the `k`-th moment of the Gamma(theta, 1)
/// limit of `K_n / ln n` under `ThetaLinear(theta, 1)`.
pub fn gamma_limit_moment(theta: f64, k: usize) -> Result<f64> {
    if !(theta > 0.0 && theta.is_finite()) {
        return domain("theta must be positive");
    }
    if k == 0 {
        return domain("k must be >= 1");
    }
    Ok((0..k).map(|i| theta + i as f64).product())
}

/// Limiting behaviour of `K_n` for the two schedule families with a limit law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum LimitSummary {
    /// `K_n -> K_inf` almost surely.
    Constant {
        a: f64,
        b: f64,
        /// `E[(K_inf - 1)_(m)]` for `m = 1..`.
        falling_moments: Vec<f64>,
        /// `(t, E[exp(-t K_inf)])` pairs.
        mgf: Vec<(f64, LimitMgf)>,
    },
    /// `K_n / ln n -> Gamma(theta, 1)` in distribution.
    GammaScaled { theta: f64, moments: Vec<f64> },
}

pub fn limit_summary(schedule: &BetaSchedule, max_m: usize, t_grid: &[f64]) -> Result<LimitSummary> {
    match schedule {
        BetaSchedule::Constant { a, b } => Ok(LimitSummary::Constant {
            a: *a,
            b: *b,
            falling_moments: (1..=max_m).map(|m| limit_falling_moment(*a, *b, m)).collect::<Result<_>>()?,
            mgf: t_grid
                .iter()
                .map(|&t| Ok((t, limit_mgf(*a, *b, t, 200)?)))
                .collect::<Result<_>>()?,
        }),
        BetaSchedule::ThetaLinear { theta, beta } if *beta == 1.0 => Ok(LimitSummary::GammaScaled {
            theta: *theta,
            moments: (1..=max_m).map(|k| gamma_limit_moment(*theta, k)).collect::<Result<_>>()?,
        }),
        other => domain(format!("no limit law implemented for schedule {other}")),
    }
}

/// Smallest window `J` with `sum_{j=0..J} E[p_{n, n-j}] >= gamma`: with
/// probability at least `gamma` the next observation copies one of the last
/// `J + 1` observations.
pub fn recent_window(schedule: &BetaSchedule, n: usize, gamma: f64) -> Result<usize> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return domain("gamma must lie in (0, 1)");
    }
    if n == 0 {
        return domain("n must be >= 1");
    }
    let mut acc = 0.0;
    let mut log_tail = 0.0; // sum of ln E[W_t] for t > k
    for j in 0..n {
        let k = n - j;
        let ew = schedule.weight_moment(k, 1)?;
        acc += ((-ew).ln_1p() + log_tail).exp();
        if acc >= gamma {
            return Ok(j);
        }
        log_tail += ew.ln();
    }
    domain(format!("no window reaches {gamma}: total copy probability is {acc}"))
}
