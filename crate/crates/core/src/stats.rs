//! Goodness-of-fit tests and sample summaries.
//!
//! All p-values are asymptotic. Each test returns a [`TestOutcome`]
//! (statistic, p-value, sample size); [`TestOutcome::judge`] turns it into
//! a named [`TestResult`] with a pass/fail verdict.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::analytic::{normal_cdf, IntegralTestFunction};
use crate::error::{Error, Result};
use crate::localtime::OccupationVector;

/// Smallest sample accepted by the KS tests.
pub const KS_MIN_SAMPLES: usize = 10;
/// Smallest total count accepted by the chi-square test.
pub const CHI_SQUARE_MIN_TOTAL: u64 = 1000;
/// Smallest expected count per chi-square bin after pooling.
pub const CHI_SQUARE_MIN_EXPECTED: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub statistic: f64,
    pub p_value: f64,
    pub n_samples: usize,
}

/// What a test has to satisfy to pass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "bound", rename_all = "snake_case")]
pub enum Criterion {
    /// `p_value > bound`
    PValueAbove(f64),
    /// `p_value < bound`, for checks that the test must reject.
    PValueBelow(f64),
    /// `statistic <= bound`
    StatisticAtMost(f64),
    /// `statistic >= bound`
    StatisticAtLeast(f64),
}

impl Criterion {
    pub fn holds(&self, outcome: &TestOutcome) -> bool {
        match *self {
            Criterion::PValueAbove(b) => outcome.p_value > b,
            Criterion::PValueBelow(b) => outcome.p_value < b,
            Criterion::StatisticAtMost(b) => outcome.statistic <= b,
            Criterion::StatisticAtLeast(b) => outcome.statistic >= b,
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Criterion::PValueAbove(b) => write!(f, "p > {b}"),
            Criterion::PValueBelow(b) => write!(f, "p < {b}"),
            Criterion::StatisticAtMost(b) => write!(f, "stat <= {b}"),
            Criterion::StatisticAtLeast(b) => write!(f, "stat >= {b}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub name: String,
    pub statistic: f64,
    pub p_value: f64,
    pub n_samples: usize,
    pub criterion: Criterion,
    pub passed: bool,
}

impl TestOutcome {
    pub fn judge(self, name: impl Into<String>, criterion: Criterion) -> TestResult {
        TestResult {
            name: name.into(),
            statistic: self.statistic,
            p_value: self.p_value,
            n_samples: self.n_samples,
            criterion,
            passed: criterion.holds(&self),
        }
    }
}

impl TestResult {
    /// A check with no sampling distribution: statistic 0 or 1, p-value 1 or 0.
    pub fn exact(name: impl Into<String>, holds: bool, n_samples: usize) -> Self {
        let outcome = TestOutcome {
            statistic: if holds { 0.0 } else { 1.0 },
            p_value: if holds { 1.0 } else { 0.0 },
            n_samples,
        };
        outcome.judge(name, Criterion::StatisticAtMost(0.0))
    }
}

impl fmt::Display for TestResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<40} stat={:.6} p={:.3e} n={} [{}]",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.statistic,
            self.p_value,
            self.n_samples,
            self.criterion
        )
    }
}

/// Survival function `P(K > lambda)` of the Kolmogorov distribution.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        // P(K <= l) = sqrt(2π)/l Σ exp(-(2k-1)^2 π^2 / (8 l^2))
        let w = -std::f64::consts::PI.powi(2) / (8.0 * lambda * lambda);
        let s: f64 = (1..=8)
            .map(|k| {
                let m = (2 * k - 1) as f64;
                (w * m * m).exp()
            })
            .sum();
        (1.0 - (2.0 * std::f64::consts::PI).sqrt() / lambda * s).clamp(0.0, 1.0)
    } else {
        let s: f64 = (1..=100)
            .map(|k| {
                let kf = k as f64;
                let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                sign * (-2.0 * kf * kf * lambda * lambda).exp()
            })
            .sum();
        (2.0 * s).clamp(0.0, 1.0)
    }
}

fn ks_p_value(d: f64, effective_n: f64) -> f64 {
    let sn = effective_n.sqrt();
    kolmogorov_sf((sn + 0.12 + 0.11 / sn) * d)
}

fn sorted(samples: &[f64]) -> Result<Vec<f64>> {
    if samples.iter().any(|x| x.is_nan()) {
        return Err(Error::invalid("NaN in sample"));
    }
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// `sup_x |ECDF(x) - cdf(x)|`, evaluated on both sides of every jump. No
/// minimum sample size; the sample must not contain NaN.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let v = sorted(samples).expect("sample without NaN");
    let n = v.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < v.len() {
        // ties form one jump
        let mut j = i;
        while j + 1 < v.len() && v[j + 1] == v[i] {
            j += 1;
        }
        let f = cdf(v[i]);
        d = d.max((f - i as f64 / n).abs()).max(((j + 1) as f64 / n - f).abs());
        i = j + 1;
    }
    d
}

/// One-sample Kolmogorov–Smirnov test against a continuous CDF.
pub fn ks_one_sample(samples: &[f64], cdf: impl Fn(f64) -> f64) -> Result<TestOutcome> {
    if samples.len() < KS_MIN_SAMPLES {
        return Err(Error::invalid(format!(
            "KS test needs at least {KS_MIN_SAMPLES} samples, got {}",
            samples.len()
        )));
    }
    sorted(samples)?;
    let d = ks_statistic(samples, cdf);
    Ok(TestOutcome {
        statistic: d,
        p_value: ks_p_value(d, samples.len() as f64),
        n_samples: samples.len(),
    })
}

/// Two-sample Kolmogorov–Smirnov test.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<TestOutcome> {
    if a.len() < KS_MIN_SAMPLES || b.len() < KS_MIN_SAMPLES {
        return Err(Error::invalid(format!(
            "KS test needs at least {KS_MIN_SAMPLES} samples per side, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    let (a, b) = (sorted(a)?, sorted(b)?);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] == x {
            i += 1;
        }
        while j < b.len() && b[j] == x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(TestOutcome {
        statistic: d,
        p_value: ks_p_value(d, na * nb / (na + nb)),
        n_samples: a.len() + b.len(),
    })
}

/// Pearson chi-square test of integer counts against a pmf on `0, 1, 2, ...`.
/// Values `0..=tail_cut` get their own bins and everything above goes in a
/// tail bin; bins with expected count below 5 are then pooled with their
/// neighbours.
pub fn chi_square_pmf(counts: &BTreeMap<u64, u64>, pmf: impl Fn(u64) -> f64, tail_cut: u64) -> Result<TestOutcome> {
    let total: u64 = counts.values().sum();
    if total < CHI_SQUARE_MIN_TOTAL {
        return Err(Error::invalid(format!(
            "chi-square needs a total count of at least {CHI_SQUARE_MIN_TOTAL}, got {total}"
        )));
    }
    let t = total as f64;
    // (observed, expected)
    let mut bins: Vec<(f64, f64)> = Vec::with_capacity(tail_cut as usize + 2);
    let mut head_mass = 0.0;
    for m in 0..=tail_cut {
        let p = pmf(m);
        if !(p >= 0.0) {
            return Err(Error::invalid(format!("pmf({m}) = {p} is not a probability")));
        }
        head_mass += p;
        bins.push((counts.get(&m).copied().unwrap_or(0) as f64, t * p));
    }
    let tail_obs: u64 = counts.range(tail_cut + 1..).map(|(_, c)| c).sum();
    bins.push((tail_obs as f64, t * (1.0 - head_mass).max(0.0)));

    let mut pooled: Vec<(f64, f64)> = Vec::new();
    let mut acc = (0.0, 0.0);
    for (o, e) in bins {
        acc = (acc.0 + o, acc.1 + e);
        if acc.1 >= CHI_SQUARE_MIN_EXPECTED {
            pooled.push(acc);
            acc = (0.0, 0.0);
        }
    }
    if acc.0 > 0.0 || acc.1 > 0.0 {
        match pooled.last_mut() {
            Some(last) => {
                last.0 += acc.0;
                last.1 += acc.1;
            }
            None => pooled.push(acc),
        }
    }
    if pooled.len() < 2 || pooled.iter().any(|b| b.1 < CHI_SQUARE_MIN_EXPECTED) {
        return Err(Error::invalid("pooling cannot give two bins with expected count >= 5"));
    }
    let statistic: f64 = pooled.iter().map(|(o, e)| (o - e).powi(2) / e).sum();
    let dist = ChiSquared::new((pooled.len() - 1) as f64).map_err(|e| Error::invalid(e.to_string()))?;
    Ok(TestOutcome {
        statistic,
        p_value: dist.sf(statistic).clamp(0.0, 1.0),
        n_samples: total as usize,
    })
}

/// Sample mean and variance with their standard errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentSummary {
    pub n: usize,
    pub mean: f64,
    pub variance: f64,
    pub se_mean: f64,
    /// `sqrt((m4 - s^4) / n)`, from the sample fourth central moment.
    pub se_variance: f64,
}

impl MomentSummary {
    pub fn from_samples(samples: &[f64]) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::invalid("moments need at least two samples"));
        }
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let (mut m2, mut m4) = (0.0, 0.0);
        for &x in samples {
            let d2 = (x - mean).powi(2);
            m2 += d2;
            m4 += d2 * d2;
        }
        let variance = m2 / (n - 1.0);
        let m4 = m4 / n;
        let pop_var = m2 / n;
        Ok(MomentSummary {
            n: samples.len(),
            mean,
            variance,
            se_mean: (variance / n).sqrt(),
            se_variance: ((m4 - pop_var * pop_var).max(0.0) / n).sqrt(),
        })
    }

    /// z-test of the mean; the statistic is `|mean - target| / se`.
    pub fn mean_test(&self, target: f64) -> TestOutcome {
        z_outcome((self.mean - target) / self.se_mean, self.n)
    }

    pub fn variance_test(&self, target: f64) -> TestOutcome {
        z_outcome((self.variance - target) / self.se_variance, self.n)
    }
}

fn z_outcome(z: f64, n: usize) -> TestOutcome {
    // kept finite so that reports serialize
    let z = if z.is_nan() { f64::MAX } else { z.abs().min(f64::MAX) };
    TestOutcome {
        statistic: z,
        p_value: (2.0 * (1.0 - normal_cdf(z))).clamp(0.0, 1.0),
        n_samples: n,
    }
}

/// Empirical CDF of a sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Ecdf {
    sorted: Vec<f64>,
}

impl Ecdf {
    pub fn new(samples: &[f64]) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::invalid("empty sample"));
        }
        Ok(Ecdf { sorted: sorted(samples)? })
    }

    /// Fraction of the sample `<= x`.
    pub fn eval(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&s| s <= x) as f64 / self.sorted.len() as f64
    }

    /// Smallest sample value with ECDF `>= q`.
    pub fn quantile(&self, q: f64) -> f64 {
        let n = self.sorted.len();
        let k = ((q * n as f64).ceil() as usize).clamp(1, n);
        self.sorted[k - 1]
    }

    /// Quantiles at `0.01, 0.02, ..., 0.99`.
    pub fn percentiles(&self) -> Vec<f64> {
        (1..=99).map(|i| self.quantile(i as f64 / 100.0)).collect()
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }
}

/// Spearman rank correlation, average ranks for ties.
pub fn spearman_rho(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() || a.len() < 3 {
        return Err(Error::invalid("rank correlation needs two samples of equal length >= 3"));
    }
    let (ra, rb) = (ranks(a)?, ranks(b)?);
    let n = a.len() as f64;
    let mean = (n + 1.0) / 2.0;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in ra.iter().zip(&rb) {
        sab += (x - mean) * (y - mean);
        saa += (x - mean).powi(2);
        sbb += (y - mean).powi(2);
    }
    Ok(sab / (saa * sbb).sqrt())
}

fn ranks(v: &[f64]) -> Result<Vec<f64>> {
    if v.iter().any(|x| x.is_nan()) {
        return Err(Error::invalid("NaN in sample"));
    }
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&i, &j| v[i].total_cmp(&v[j]));
    let mut r = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    Ok(r)
}

/// Extreme leg occupations of one walk at one horizon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinMaxRecord {
    /// `T_M(n) / n`
    pub max_fraction: f64,
    /// `T_m(n) / n`
    pub min_fraction: f64,
    /// `T_m(n) <= (n - xi(0,n)) / N <= T_M(n)`, checked in integers.
    pub sandwich_holds: bool,
}

pub fn minmax_record(occ: &OccupationVector) -> Result<MinMaxRecord> {
    let n_legs = occ.per_leg.len() as u64;
    if n_legs < 2 {
        return Err(Error::invalid("min/max occupation needs at least two legs"));
    }
    let n = occ.horizon as u64;
    let on_legs = n - occ.origin_time;
    let (lo, hi) = (occ.min(), occ.max());
    Ok(MinMaxRecord {
        max_fraction: hi as f64 / n.max(1) as f64,
        min_fraction: lo as f64 / n.max(1) as f64,
        sandwich_holds: lo * n_legs <= on_legs && on_legs <= hi * n_legs,
    })
}

/// One record per replication.
pub fn minmax_occupation(occupations: &[OccupationVector]) -> Result<Vec<MinMaxRecord>> {
    occupations.iter().map(minmax_record).collect()
}

/// Number of dyadic checkpoints `2^k` (`checkpoints[k]`, `k >= 1`) with
/// `T_m(2^k) < 2^k / f(2^k)`. Checkpoints where `f` is not positive are
/// skipped.
pub fn dyadic_io_count(checkpoints: &[OccupationVector], f: &IntegralTestFunction) -> usize {
    checkpoints
        .iter()
        .skip(1)
        .filter(|occ| {
            let n = occ.horizon as f64;
            let fx = f.eval(n);
            fx > 0.0 && (occ.min() as f64) < n / fx
        })
        .count()
}
