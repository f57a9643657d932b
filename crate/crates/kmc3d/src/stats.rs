//! Estimators and histogram machinery for capture-time data: logarithmic
//! histograms, bootstrap errors, binomial coefficients of variation,
//! empirical CDFs and the KS statistic used by the propagator marginal
//! checks.

use crate::error::{Error, Result};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Histogram with bins equally spaced in log10(t). Counts are kept per
/// target label; escapes never enter (they appear only in summary
/// fractions). Partial histograms merge associatively for parallel
/// reduction.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LogHistogram {
    /// Bin edges, strictly increasing, length bins + 1.
    pub edges: Vec<f64>,
    /// Counts per label: label -> per-bin counts.
    pub counts: BTreeMap<String, Vec<u64>>,
    /// Times below edges[0] / at or above edges[last], per label.
    pub underflow: BTreeMap<String, u64>,
    pub overflow: BTreeMap<String, u64>,
    /// Total particle count the histogram refers to.
    pub total_particles: u64,
}

impl LogHistogram {
    pub fn new(t_min: f64, t_max: f64, n_bins: usize, total_particles: u64) -> Result<Self> {
        if !(t_min > 0.0 && t_max > t_min) {
            return Err(Error::domain(format!(
                "log histogram: need 0 < t_min < t_max (got {t_min}, {t_max})"
            )));
        }
        if n_bins == 0 {
            return Err(Error::domain("log histogram: need at least one bin".to_string()));
        }
        let l0 = t_min.log10();
        let l1 = t_max.log10();
        let edges = (0..=n_bins)
            .map(|i| 10f64.powf(l0 + (l1 - l0) * i as f64 / n_bins as f64))
            .collect();
        Ok(LogHistogram {
            edges,
            counts: BTreeMap::new(),
            underflow: BTreeMap::new(),
            overflow: BTreeMap::new(),
            total_particles,
        })
    }

    pub fn n_bins(&self) -> usize {
        self.edges.len() - 1
    }

    /// Record one capture time under `label`. Bins are half-open
    /// [e_i, e_{i+1}): a time on an edge lands in the right bin.
    pub fn record(&mut self, label: &str, t: f64) {
        let n = self.n_bins();
        if t < self.edges[0] {
            *self.underflow.entry(label.to_string()).or_insert(0) += 1;
            return;
        }
        if t >= self.edges[n] {
            *self.overflow.entry(label.to_string()).or_insert(0) += 1;
            return;
        }
        let l0 = self.edges[0].log10();
        let l1 = self.edges[n].log10();
        let mut i = ((t.log10() - l0) / (l1 - l0) * n as f64) as usize;
        i = i.min(n - 1);
        // Guard the float binning against edge rounding.
        if t < self.edges[i] {
            i -= 1;
        } else if t >= self.edges[i + 1] {
            i += 1;
        }
        let counts = self
            .counts
            .entry(label.to_string())
            .or_insert_with(|| vec![0; n]);
        counts[i] += 1;
    }

    /// Merge a partial histogram with identical edges (associative and
    /// commutative, for parallel reduction).
    pub fn merge(&mut self, other: &LogHistogram) -> Result<()> {
        if self.edges != other.edges {
            return Err(Error::domain("histogram merge: edges differ".to_string()));
        }
        for (label, counts) in &other.counts {
            let mine = self
                .counts
                .entry(label.clone())
                .or_insert_with(|| vec![0; counts.len()]);
            for (a, b) in mine.iter_mut().zip(counts) {
                *a += b;
            }
        }
        for (label, c) in &other.underflow {
            *self.underflow.entry(label.clone()).or_insert(0) += c;
        }
        for (label, c) in &other.overflow {
            *self.overflow.entry(label.clone()).or_insert(0) += c;
        }
        self.total_particles += other.total_particles;
        Ok(())
    }

    /// Combined per-bin counts over all labels.
    pub fn combined(&self) -> Vec<u64> {
        let mut out = vec![0u64; self.n_bins()];
        for counts in self.counts.values() {
            for (a, b) in out.iter_mut().zip(counts) {
                *a += b;
            }
        }
        out
    }
}

/// Build a histogram of `times` under a single label.
pub fn log_histogram(
    times: &[f64],
    t_min: f64,
    t_max: f64,
    n_bins: usize,
) -> Result<LogHistogram> {
    let mut h = LogHistogram::new(t_min, t_max, n_bins, times.len() as u64)?;
    for &t in times {
        h.record("all", t);
    }
    Ok(h)
}

/// Bootstrap mean and standard error of a binary capture indicator sample.
///
/// Resampling n Bernoulli values with replacement is distributed exactly as
/// Binomial(n, k/n)/n, so the resamples are drawn that way rather than by
/// materializing index draws.
pub fn bootstrap(successes: u64, n: u64, replications: usize, seed: u64) -> (f64, f64) {
    assert!(n > 0 && replications > 1);
    let p_hat = successes as f64 / n as f64;
    if successes == 0 || successes == n {
        return (p_hat, 0.0);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dist = rand_distr::Binomial::new(n, p_hat).expect("valid binomial");
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for i in 0..replications {
        let value = rng.sample(dist) as f64 / n as f64;
        let delta = value - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (value - mean);
    }
    let stderr = (m2 / (replications - 1) as f64).sqrt();
    (p_hat, stderr)
}

/// Bootstrap over a slice of indicators.
pub fn bootstrap_indicators(values: &[bool], replications: usize, seed: u64) -> (f64, f64) {
    let successes = values.iter().filter(|&&v| v).count() as u64;
    bootstrap(successes, values.len() as u64, replications, seed)
}

/// Coefficient of variation of a binomial capture-probability estimate:
/// sqrt((1 - p) / (p M)).
pub fn coefficient_of_variation(p: f64, m: u64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(format!("cv: p = {p} outside (0,1)")));
    }
    if m == 0 {
        return Err(Error::domain("cv: M must be positive".to_string()));
    }
    Ok(((1.0 - p) / (p * m as f64)).sqrt())
}

/// Per-target cumulative fractions m_k(t)/M on a time grid. `times` need
/// not be sorted (they are copied and sorted internally).
pub fn empirical_cdf(times: &[f64], grid: &[f64], total: u64) -> Vec<f64> {
    let mut sorted = times.to_vec();
    sorted.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    grid.iter()
        .map(|&t| {
            let k = sorted.partition_point(|&x| x <= t);
            k as f64 / total as f64
        })
        .collect()
}

/// Two-sided Kolmogorov-Smirnov statistic of a sample against a reference
/// CDF. Sorts a copy of the sample.
pub fn ks_statistic<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> f64 {
    let mut sorted = sample.to_vec();
    sorted.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len() as f64;
    let mut d = 0.0_f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        let hi = (i + 1) as f64 / n - f;
        let lo = f - i as f64 / n;
        d = d.max(hi).max(lo);
    }
    d
}
