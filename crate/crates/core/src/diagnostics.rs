//! Chain diagnostics: autocorrelation, effective sample size (ESS), ESS per leapfrog step,
//! posterior summaries and a one-sample Kolmogorov–Smirnov test.

use std::fmt::Write as _;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::parallel::{self, Execution};
use crate::sampler::Trace;

fn mean(series: &[f64]) -> f64 {
    series.iter().sum::<f64>() / series.len() as f64
}

fn is_constant(series: &[f64]) -> bool {
    series.windows(2).all(|w| w[0] == w[1])
}

/// Sample autocorrelation at lag `k`, normalized by `n` (biased estimator).
///
/// A constant series has no defined autocorrelation; it reports 1 at lag 0 and 0 elsewhere.
pub fn autocorrelation(series: &[f64], k: usize) -> Result<f64> {
    let n = series.len();
    if k >= n {
        return Err(Error::InvalidArgument(format!("lag {k} out of range for length {n}")));
    }
    if k == 0 {
        return Ok(1.0);
    }
    if is_constant(series) {
        return Ok(0.0);
    }
    let m = mean(series);
    let c0: f64 = series.iter().map(|v| (v - m).powi(2)).sum();
    let ck: f64 = series
        .iter()
        .zip(&series[k..])
        .map(|(a, b)| (a - m) * (b - m))
        .sum();
    Ok(ck / c0)
}

/// All autocorrelations `rho(0..n)` through a zero-padded FFT.
fn autocorrelations(series: &[f64]) -> Vec<f64> {
    let n = series.len();
    let m = mean(series);
    let size = (2 * n).next_power_of_two();
    let mut buf: Vec<Complex<f64>> = series
        .iter()
        .map(|v| Complex::new(v - m, 0.0))
        .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
        .take(size)
        .collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(size).process(&mut buf);
    for c in buf.iter_mut() {
        *c = Complex::new(c.norm_sqr(), 0.0);
    }
    planner.plan_fft_inverse(size).process(&mut buf);
    let c0 = buf[0].re;
    buf[..n].iter().map(|c| c.re / c0).collect()
}

/// `n / (1 + 2 sum_k rho(k))`, truncating the sum with Geyer's initial positive sequence:
/// pair sums `rho(2j) + rho(2j+1)` are accumulated while positive. Clamped to `(0, n]`.
pub fn ess(series: &[f64]) -> Result<f64> {
    let n = series.len();
    if n < 10 {
        return Err(Error::InvalidArgument(format!("ESS needs at least 10 samples, got {n}")));
    }
    if series.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("series has non-finite values".into()));
    }
    if is_constant(series) {
        return Err(Error::DegenerateSeries("constant series has no effective sample size".into()));
    }
    let rho = autocorrelations(series);
    let mut pair_sum = 0.0;
    let mut j = 0;
    while 2 * j + 1 < n {
        let gamma = rho[2 * j] + rho[2 * j + 1];
        if !(gamma > 0.0) {
            break;
        }
        pair_sum += gamma;
        j += 1;
    }
    let tau = 2.0 * pair_sum - 1.0;
    let n = n as f64;
    Ok(if tau > 0.0 { (n / tau).min(n) } else { n })
}

/// Per-dimension ESS and ESS per leapfrog step of one chain.
#[derive(Debug, Clone, PartialEq)]
pub struct ESSReport {
    pub ess: Vec<f64>,
    pub ess_per_l: Vec<f64>,
    /// Mean number of leapfrog steps per iteration over the same window.
    pub mean_steps: f64,
    pub n_samples: usize,
}

impl ESSReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("dim,ess,ess_per_l\n");
        for (j, (e, el)) in self.ess.iter().zip(&self.ess_per_l).enumerate() {
            let _ = writeln!(out, "{j},{e:.16e},{el:.16e}");
        }
        out
    }
}

/// ESS of every coordinate after dropping the first `discard` samples, divided by the mean
/// `L` of the retained window.
pub fn ess_per_l(trace: &Trace, discard: usize) -> Result<ESSReport> {
    ess_per_l_with(trace, discard, Execution::Sequential)
}

pub fn ess_per_l_with(trace: &Trace, discard: usize, exec: Execution) -> Result<ESSReport> {
    if discard >= trace.len() {
        return Err(Error::InvalidArgument(format!(
            "discard {discard} leaves nothing of a {}-sample trace",
            trace.len()
        )));
    }
    let window = &trace.steps()[discard..];
    let mean_steps = window.iter().sum::<usize>() as f64 / window.len() as f64;
    let ess = parallel::map_indices(exec, trace.dim(), |j| ess(&trace.column(j, discard)))
        .into_iter()
        .collect::<Result<Vec<f64>>>()?;
    let ess_per_l = ess.iter().map(|e| e / mean_steps).collect();
    Ok(ESSReport {
        ess,
        ess_per_l,
        mean_steps,
        n_samples: window.len(),
    })
}

/// Mean over coordinates of `E_i / E'_i`.
pub fn performance_ratio(e: &[f64], e_prime: &[f64]) -> Result<f64> {
    if e.len() != e_prime.len() || e.is_empty() {
        return Err(Error::DimensionMismatch {
            expected: e.len(),
            got: e_prime.len(),
        });
    }
    if e_prime.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::InvalidArgument("reference efficiencies must be positive".into()));
    }
    Ok(e.iter().zip(e_prime).map(|(a, b)| a / b).sum::<f64>() / e.len() as f64)
}

/// Posterior mean and standard deviation (divisor `n − 1`) per coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub mean: Vec<f64>,
    pub sd: Vec<f64>,
}

impl Summary {
    /// Summarizes rows of equal length.
    pub fn from_rows<'a, I>(rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a [f64]>,
    {
        let mut iter = rows.into_iter().peekable();
        let dim = iter
            .peek()
            .map(|r| r.len())
            .ok_or_else(|| Error::InvalidArgument("nothing to summarize".into()))?;
        let mut count = 0usize;
        let mut mean = vec![0.0; dim];
        let mut m2 = vec![0.0; dim];
        for row in iter {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: row.len(),
                });
            }
            count += 1;
            for j in 0..dim {
                let delta = row[j] - mean[j];
                mean[j] += delta / count as f64;
                m2[j] += delta * (row[j] - mean[j]);
            }
        }
        let sd = m2
            .iter()
            .map(|v| if count > 1 { (v / (count as f64 - 1.0)).sqrt() } else { 0.0 })
            .collect();
        Ok(Self { mean, sd })
    }
}

/// Summary of the samples retained after dropping the first `discard`.
pub fn summarize(trace: &Trace, discard: usize) -> Result<Summary> {
    if discard >= trace.len() {
        return Err(Error::InvalidArgument(format!(
            "discard {discard} leaves nothing of a {}-sample trace",
            trace.len()
        )));
    }
    Summary::from_rows(trace.rows().skip(discard))
}

pub fn standard_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// `sup_x |F_n(x) − F(x)|` for the empirical distribution of `samples`.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic p-value of the one-sample KS statistic `d` with Stephens' small-sample
/// correction.
pub fn ks_p_value(d: f64, n: usize) -> f64 {
    let sqrt_n = (n as f64).sqrt();
    let lambda = (sqrt_n + 0.12 + 0.11 / sqrt_n) * d;
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let term = (-2.0 * (k * k) as f64 * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}
