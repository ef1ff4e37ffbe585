//! Mean and standard-error accumulators with an associative merge.
//!
//! Ensembles are reduced in trajectory-index order, so the floating-point
//! result does not depend on how the work was scheduled.

use serde::{Deserialize, Serialize};

/// Running first four central moments (Pébay's update formulas).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Moments {
    pub n: u64,
    mean: f64,
    m2: f64,
    m3: f64,
    m4: f64,
}

impl Moments {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_slice(xs: &[f64]) -> Self {
        let mut m = Self::new();
        xs.iter().for_each(|&x| m.push(x));
        m
    }

    pub fn push(&mut self, x: f64) {
        self.merge(&Moments {
            n: 1,
            mean: x,
            m2: 0.0,
            m3: 0.0,
            m4: 0.0,
        });
    }

    pub fn merge(&mut self, o: &Moments) {
        if o.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *o;
            return;
        }
        let (na, nb) = (self.n as f64, o.n as f64);
        let n = na + nb;
        let d = o.mean - self.mean;
        let d2 = d * d;
        let mean = self.mean + d * nb / n;
        let m2 = self.m2 + o.m2 + d2 * na * nb / n;
        let m3 = self.m3
            + o.m3
            + d * d2 * na * nb * (na - nb) / (n * n)
            + 3.0 * d * (na * o.m2 - nb * self.m2) / n;
        let m4 = self.m4
            + o.m4
            + d2 * d2 * na * nb * (na * na - na * nb + nb * nb) / (n * n * n)
            + 6.0 * d2 * (na * na * o.m2 + nb * nb * self.m2) / (n * n)
            + 4.0 * d * (na * o.m3 - nb * self.m3) / n;
        *self = Moments {
            n: self.n + o.n,
            mean,
            m2,
            m3,
            m4,
        };
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    /// Standard error of the mean.
    pub fn stderr(&self) -> f64 {
        if self.n < 2 {
            f64::INFINITY
        } else {
            (self.variance() / self.n as f64).sqrt()
        }
    }

    /// Sample skewness `g1 = m3 / m2^(3/2)` with population moments.
    pub fn skewness(&self) -> f64 {
        if self.m2 == 0.0 {
            return 0.0;
        }
        let n = self.n as f64;
        (self.m3 / n) / (self.m2 / n).powf(1.5)
    }

    /// Standard error of the skewness of a normal sample of this size.
    pub fn skewness_stderr(&self) -> f64 {
        let n = self.n as f64;
        (6.0 * n * (n - 1.0) / ((n - 2.0) * (n + 1.0) * (n + 3.0))).sqrt()
    }

    /// Standard error of the sample variance, `sqrt((m4 - σ⁴(n-3)/(n-1)) / n)`.
    pub fn variance_stderr(&self) -> f64 {
        let n = self.n as f64;
        let s2 = self.variance();
        let mu4 = self.m4 / n;
        ((mu4 - s2 * s2 * (n - 3.0) / (n - 1.0)) / n)
            .max(0.0)
            .sqrt()
    }
}

/// A mean with its standard error and sample size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub estimate: f64,
    pub stderr: f64,
    pub n: u64,
}

impl Estimate {
    pub fn from_moments(m: &Moments) -> Self {
        Estimate {
            estimate: m.mean(),
            stderr: m.stderr(),
            n: m.n,
        }
    }

    pub fn from_samples(xs: &[f64]) -> Self {
        Self::from_moments(&Moments::from_slice(xs))
    }

    /// `|estimate - target| ≤ k · stderr`.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.estimate - target).abs() <= k * self.stderr
    }

    /// Number of standard errors between the estimate and `target`.
    pub fn z_score(&self, target: f64) -> f64 {
        (self.estimate - target) / self.stderr
    }
}

/// Ordinary least-squares slope and intercept of `y` on `x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}
