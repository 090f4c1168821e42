//! Distributional self-checks of the samplers and closed forms.

use std::collections::BTreeMap;

use crate::analytic::{
    dobrushin_cdf, excursion_pmf, lamperti_cdf, normal_cdf, quadrature, sample_dobrushin, sample_ibm,
    sample_joint_occupation, lamperti_pdf, SkewParams,
};
use crate::randkit::{Categorical, SeedSpec};
use crate::spider::SpiderConfig;
use crate::stats::{chi_square_pmf, ks_one_sample, Criterion, MomentSummary, TestOutcome, TestResult};
use crate::error::Result;

/// Draws per sampler check.
pub const SELFTEST_DRAWS: usize = 1_000_000;
const SELFTEST_SEED: u64 = 0x5eed;
const P_MIN: f64 = 1e-3;

fn draws(stream: u64, mut f: impl FnMut(&mut crate::randkit::SimRng) -> f64) -> Vec<f64> {
    let mut rng = SeedSpec::new(SELFTEST_SEED).derive_stream(stream).rng();
    (0..SELFTEST_DRAWS).map(|_| f(&mut rng)).collect()
}

fn closeness(name: &str, got: f64, want: f64, tol: f64) -> TestResult {
    TestOutcome {
        statistic: (got - want).abs(),
        p_value: 1.0,
        n_samples: 1,
    }
    .judge(name, Criterion::StatisticAtMost(tol))
}

/// Runs every check; all must pass.
pub fn run_selftest() -> Result<Vec<TestResult>> {
    let mut out = Vec::new();
    let ks = |name: &str, v: &[f64], cdf: &dyn Fn(f64) -> f64| -> Result<TestResult> {
        Ok(ks_one_sample(v, cdf)?.judge(name, Criterion::PValueAbove(P_MIN)))
    };

    out.push(ks("uniform", &draws(0, |r| r.uniform()), &|x| x.clamp(0.0, 1.0))?);
    out.push(ks("standard_normal", &draws(1, |r| r.standard_normal()), &normal_cdf)?);
    out.push(ks("exponential_rate1", &draws(2, |r| r.exponential(1.0)), &|x| {
        if x <= 0.0 { 0.0 } else { -(-x).exp_m1() }
    })?);
    out.push(ks("exponential_rate2", &draws(3, |r| r.exponential(2.0)), &|x| {
        if x <= 0.0 { 0.0 } else { -(-2.0 * x).exp_m1() }
    })?);
    // 1/Z^2 has CDF 2(1 - Φ(1/sqrt(u)))
    out.push(ks("levy_stable_half", &draws(4, crate::randkit::sample_levy_stable_half), &|u| {
        if u <= 0.0 { 0.0 } else { 2.0 * (1.0 - normal_cdf(1.0 / u.sqrt())) }
    })?);
    let coins = draws(5, |r| r.bernoulli(0.3) as u8 as f64);
    out.push(
        MomentSummary::from_samples(&coins)?
            .mean_test(0.3)
            .judge("bernoulli_0.3_frequency", Criterion::StatisticAtMost(4.0)),
    );
    let cat = Categorical::new(&[0.2, 0.3, 0.5])?;
    let mut counts = BTreeMap::new();
    for v in draws(6, |r| cat.sample(r) as f64) {
        *counts.entry(v as u64 - 1).or_insert(0u64) += 1;
    }
    let probs = [0.2, 0.3, 0.5];
    out.push(
        chi_square_pmf(&counts, |k| probs.get(k as usize).copied().unwrap_or(0.0), 2)?
            .judge("categorical_frequencies", Criterion::PValueAbove(P_MIN)),
    );
    out.push(ks("u_sqrt_abs_v_sampler", &draws(7, sample_dobrushin), &dobrushin_cdf)?);
    out.push(ks("ibm_t1", &draws(8, |r| sample_ibm(1.0, r).unwrap()), &dobrushin_cdf)?);
    // two legs: p^2 U1 / (p^2 U1 + q^2 U2) follows the Lamperti law
    let skew = SpiderConfig::skew(0.3)?;
    let params = SkewParams::new(0.3)?;
    out.push(ks(
        "joint_occupation_two_legs_lamperti",
        &draws(9, |r| sample_joint_occupation(&skew, r).unwrap()[0]),
        &|u| lamperti_cdf(u, params),
    )?);

    // closed forms against independent evaluations
    let refs = [(0.5, 0.756_743_312_947_035), (1.0, 0.888_847_802_919_026_4), (2.0, 0.980_251_864_002_488_3)];
    for (z, want) in refs {
        out.push(closeness(&format!("dobrushin_cdf({z})"), dobrushin_cdf(z), want, 1e-10));
    }
    for p in [0.3, 0.5] {
        let params = SkewParams::new(p)?;
        let by_quadrature = quadrature::integrate(|u| lamperti_pdf(u, params).unwrap_or(0.0), 0.1, 0.6, 1e-12);
        let closed = lamperti_cdf(0.6, params) - lamperti_cdf(0.1, params);
        out.push(closeness(&format!("lamperti_cdf_vs_density_p{p}"), closed, by_quadrature, 1e-9));
        for x in [1i64, -2, 5] {
            let total: f64 = (0..20_000).map(|m| excursion_pmf(x, params, m).unwrap()).sum();
            out.push(closeness(&format!("excursion_pmf_mass_p{p}_x{x}"), total, 1.0, 1e-9));
        }
    }
    Ok(out)
}
