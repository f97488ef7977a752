use serde::{Deserialize, Serialize};

use super::ModelConfig;
use crate::error::{domain, Result};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Sufficient statistics of one block of observations.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct BlockStats {
    pub count: usize,
    pub sum: f64,
    pub sum_sq: f64,
}

impl BlockStats {
    pub fn from_slice(y: &[f64]) -> Self {
        let mut s = Self::default();
        y.iter().for_each(|&v| s.push(v));
        s
    }

    #[inline]
    pub fn push(&mut self, y: f64) {
        self.count += 1;
        self.sum += y;
        self.sum_sq += y * y;
    }

    #[inline]
    pub fn merged(&self, other: &Self) -> Self {
        Self {
            count: self.count + other.count,
            sum: self.sum + other.sum,
            sum_sq: self.sum_sq + other.sum_sq,
        }
    }

    pub fn mean(&self) -> f64 {
        self.sum / self.count as f64
    }

    /// `log int prod_l N(y_l | mu, tau2) N(mu | mu0, sigma0^2) d mu`, with all
    /// normalising constants kept so blocks of different sizes compare.
    ///
    /// Written as the density of `y ~ N(mu0 1, tau2 I + sigma0^2 11')`:
    /// `-n/2 ln 2pi - (n-1)/2 ln tau2 - 1/2 ln(tau2 + n sigma0^2)
    ///  - SS / (2 tau2) - n (ybar - mu0)^2 / (2 (tau2 + n sigma0^2))`.
    #[inline]
    pub fn log_marginal(&self, mu0: f64, sigma0_sq: f64, tau2: f64) -> f64 {
        let n = self.count as f64;
        let mean = self.sum / n;
        let ss = (self.sum_sq - self.sum * mean).max(0.0);
        let spread = tau2 + n * sigma0_sq;
        let dev = mean - mu0;
        -0.5 * n * LN_2PI - 0.5 * (n - 1.0) * tau2.ln() - 0.5 * spread.ln()
            - ss / (2.0 * tau2)
            - n * dev * dev / (2.0 * spread)
    }
}

/// Log marginal likelihood of one block under the Normal-Normal model.
pub fn log_marginal_block(y: &[f64], cfg: &ModelConfig, tau2: f64) -> Result<f64> {
    if y.is_empty() {
        return domain("block must be non-empty");
    }
    if !(tau2 > 0.0 && tau2.is_finite()) {
        return domain(format!("tau2 must be positive, got {tau2}"));
    }
    Ok(BlockStats::from_slice(y).log_marginal(cfg.mu0, cfg.sigma0 * cfg.sigma0, tau2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schedule::BetaSchedule;

    fn cfg(mu0: f64, sigma0: f64) -> ModelConfig {
        ModelConfig::new(mu0, sigma0, 2.0, 1.0, BetaSchedule::theta_linear(1.0, 1.0).unwrap()).unwrap()
    }

    /// log-sum of N(y|mu,tau2) N(mu|mu0,s0^2) over a fine grid in mu.
    fn quadrature(y: &[f64], mu0: f64, s0: f64, tau2: f64) -> f64 {
        let points = 100_000;
        let lo = mu0 - 12.0 * s0;
        let h = 24.0 * s0 / points as f64;
        let norm = |x: f64, m: f64, v: f64| (-(x - m) * (x - m) / (2.0 * v)).exp() / (2.0 * std::f64::consts::PI * v).sqrt();
        let total: f64 = (0..=points)
            .map(|k| {
                let mu = lo + k as f64 * h;
                let w = if k == 0 || k == points { 0.5 } else { 1.0 };
                w * norm(mu, mu0, s0 * s0) * y.iter().map(|&v| norm(v, mu, tau2)).product::<f64>()
            })
            .sum();
        (total * h).ln()
    }

    #[test]
    fn convolution_of_standard_normals() {
        let v = log_marginal_block(&[0.0], &cfg(0.0, 1.0), 1.0).unwrap();
        assert!((v + 0.5 * (4.0 * std::f64::consts::PI).ln()).abs() < 1e-14);
    }

    #[test]
    fn degenerate_base_measure() {
        let c = cfg(0.3, 1e-9);
        let y = 1.1;
        let tau2: f64 = 0.49;
        let want = -0.5 * (2.0 * std::f64::consts::PI * tau2).ln() - (y - 0.3) * (y - 0.3) / (2.0 * tau2);
        assert!((log_marginal_block(&[y], &c, tau2).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn matches_quadrature() {
        let blocks: [&[f64]; 4] = [&[0.4], &[1.0, 1.3], &[-0.2, 0.1, 0.5], &[2.0, 2.2, 1.7, 2.5]];
        for (y, (mu0, s0, tau2)) in blocks.iter().zip([(0.0, 1.0, 0.5), (0.5, 2.0, 0.3), (-1.0, 1.5, 0.8), (1.0, 1.0, 0.2)]) {
            let got = log_marginal_block(y, &cfg(mu0, s0), tau2).unwrap();
            let want = quadrature(y, mu0, s0, tau2);
            assert!((got - want).abs() < 1e-6, "{y:?}: {got} vs {want}");
        }
    }

    #[test]
    fn rejects_empty_block_and_bad_variance() {
        assert!(log_marginal_block(&[], &cfg(0.0, 1.0), 1.0).is_err());
        assert!(log_marginal_block(&[1.0], &cfg(0.0, 1.0), 0.0).is_err());
    }
}
