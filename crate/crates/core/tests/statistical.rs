//! Monte Carlo checks against independent oracles: closed forms, classical
//! limit laws, and calibration of the tests themselves.

use std::collections::BTreeMap;

use spiderwalk::analytic::{
    arcsine_cdf, dobrushin_cdf, excursion_pmf, normal_cdf, sample_ibm, sample_joint_occupation, SkewParams,
};
use spiderwalk::coupling::simulate_coupled_pair;
use spiderwalk::localtime::{
    brownian_local_time_estimate, contrast_scale, occupation_times, return_times, sample_excursion_visits,
    sample_occupation, sample_site_counts,
};
use spiderwalk::randkit::{sample_levy_stable_half, SimRng};
use spiderwalk::spider::{build_rws_from_ssrw, simulate_bms_lattice, simulate_rws_markov, simulate_ssrw};
use spiderwalk::stats::{chi_square_pmf, ks_one_sample, ks_two_sample, minmax_record, spearman_rho, Ecdf, MomentSummary};
use spiderwalk::{SeedSpec, SpiderConfig, SpiderPoint};

fn draws<T>(seed: u64, n: usize, mut f: impl FnMut(&mut SimRng) -> T) -> Vec<T> {
    (0..n as u64).map(|k| f(&mut SeedSpec::new(seed).derive_stream(k).rng())).collect()
}

fn share(v: &[bool]) -> f64 {
    v.iter().filter(|&&b| b).count() as f64 / v.len() as f64
}

fn half_normal_cdf(x: f64) -> f64 {
    if x <= 0.0 { 0.0 } else { 2.0 * normal_cdf(x) - 1.0 }
}

fn exp_cdf(rate: f64) -> impl Fn(f64) -> f64 {
    move |x| if x <= 0.0 { 0.0 } else { -(-rate * x).exp_m1() }
}

#[test]
fn levy_probability_and_median() {
    let mut rng = SeedSpec::new(40).rng();
    let u: Vec<f64> = (0..1_000_000).map(|_| sample_levy_stable_half(&mut rng)).collect();
    let below_one = u.iter().filter(|&&x| x <= 1.0).count() as f64 / u.len() as f64;
    assert!((below_one - 0.317_310_507_862_914_1).abs() < 0.002, "{below_one}");
    let median = Ecdf::new(&u).unwrap().quantile(0.5);
    assert!((median - 2.198_109_338_317_732_7).abs() < 0.03, "{median}");
}

#[test]
fn two_step_return_probability() {
    let config = SpiderConfig::new(&[0.2, 0.3, 0.5]).unwrap();
    let back = draws(41, 1_000_000, |r| simulate_rws_markov(&config, 2, r).points()[2].is_origin());
    assert!((share(&back) - 0.5).abs() < 0.0015);
    // first return at step 2: same event
    let first = draws(42, 1_000_000, |r| {
        let path = simulate_ssrw(2, r);
        return_times(&path).rho.first() == Some(&2)
    });
    assert!((share(&first) - 0.5).abs() < 0.0015);
}

#[test]
fn first_step_leg_frequencies() {
    let probs = [0.2, 0.3, 0.5];
    let config = SpiderConfig::new(&probs).unwrap();
    let mut counts = BTreeMap::new();
    for leg in draws(43, 100_000, |r| simulate_rws_markov(&config, 1, r).points()[1].leg().unwrap()) {
        *counts.entry(leg as u64 - 1).or_insert(0) += 1;
    }
    let out = chi_square_pmf(&counts, |k| probs.get(k as usize).copied().unwrap_or(0.0), 2).unwrap();
    assert!(out.p_value > 1e-3, "{out:?}");
}

#[test]
fn no_visit_probability_at_the_first_site() {
    let config = SpiderConfig::skew(0.5).unwrap();
    let none = draws(44, 1_000_000, |r| {
        sample_excursion_visits(&config, SpiderPoint::new(1, 1), r).unwrap() == 0
    });
    assert!((share(&none) - 0.5).abs() < 0.0015);
}

#[test]
fn relabeled_and_markov_walks_share_occupation_law() {
    let config = SpiderConfig::new(&[0.2, 0.3, 0.5]).unwrap();
    let n = 1000;
    let markov = draws(45, 20_000, |r| occupation_times(&simulate_rws_markov(&config, n, r)).fraction(1));
    let relabeled = draws(46, 20_000, |r| {
        let ssrw = simulate_ssrw(n, r);
        occupation_times(&build_rws_from_ssrw(&config, &ssrw, r).unwrap()).fraction(1)
    });
    let out = ks_two_sample(&markov, &relabeled).unwrap();
    assert!(out.p_value > 1e-3, "{out:?}");
}

#[test]
fn lattice_brownian_motion_endpoint_and_radius() {
    let config = SpiderConfig::skew(0.5).unwrap();
    let endpoint = |seed, dt: f64| {
        draws(seed, 10_000, |r| {
            let path = simulate_bms_lattice(&config, 1.0, dt, r).unwrap();
            path.signed_at(path.horizon()).unwrap()
        })
    };
    let fine = endpoint(47, 1e-4);
    assert!(ks_one_sample(&fine, normal_cdf).unwrap().statistic <= 0.02);
    let coarse = endpoint(48, 2e-4);
    assert!(ks_two_sample(&fine, &coarse).unwrap().p_value > 1e-3);
    // folding doubles the lattice atoms near 0, so the radius needs a finer grid
    let radius: Vec<f64> = endpoint(147, 1e-5).iter().map(|x| x.abs()).collect();
    assert!(ks_one_sample(&radius, half_normal_cdf).unwrap().statistic <= 0.02);
}

#[test]
fn lattice_radius_at_time_four_scales_by_two() {
    let config = SpiderConfig::uniform(3).unwrap();
    let r = draws(49, 10_000, |r| {
        let path = simulate_bms_lattice(&config, 4.0, 1e-3, r).unwrap();
        path.radius_at(path.horizon())
    });
    assert!(ks_one_sample(&r, |x| half_normal_cdf(x / 2.0)).unwrap().statistic <= 0.02);
}

#[test]
fn brownian_local_time_at_zero_is_half_normal() {
    let config = SpiderConfig::skew(0.5).unwrap();
    let eta = |seed, dt| {
        draws(seed, 10_000, |r| {
            let path = simulate_bms_lattice(&config, 1.0, dt, r).unwrap();
            brownian_local_time_estimate(&path, 0.0, 1).unwrap()
        })
    };
    // the estimate moves in steps of sqrt(dt), atoms of about 0.8 sqrt(dt)
    assert!(ks_one_sample(&eta(50, 1e-5), half_normal_cdf).unwrap().statistic <= 0.02);
    assert!(ks_two_sample(&eta(151, 1e-4), &eta(51, 4e-4)).unwrap().p_value > 1e-3);
}

#[test]
fn origin_local_time_normalization_does_not_depend_on_leg_count() {
    // the radius is reflected Brownian motion for any N, so counting origin
    // visits over all legs keeps eta(0,1) half-normal
    let config = SpiderConfig::new(&[0.2, 0.3, 0.5]).unwrap();
    let eta = draws(65, 10_000, |r| {
        let path = simulate_bms_lattice(&config, 1.0, 1e-5, r).unwrap();
        brownian_local_time_estimate(&path, 0.0, 2).unwrap()
    });
    assert!(ks_one_sample(&eta, half_normal_cdf).unwrap().statistic <= 0.02);
}

#[test]
fn symmetric_contrast_has_mean_zero() {
    let config = SpiderConfig::skew(0.5).unwrap();
    let n = 1_000_000;
    let site = SpiderPoint::new(1, 1);
    let scale = contrast_scale(0.5, 1, n);
    let z = draws(52, 10_000, |r| {
        let (origin, at) = sample_site_counts(&config, n, site, r);
        (at as f64 - origin as f64) / scale
    });
    let m = MomentSummary::from_samples(&z).unwrap();
    assert!(m.mean_test(0.0).statistic <= 3.0, "{m:?}");
    assert!(ks_one_sample(&z, dobrushin_cdf).unwrap().statistic <= 0.03);
}

#[test]
fn joint_occupation_marginal_is_arcsine_for_fair_skew() {
    let config = SpiderConfig::skew(0.5).unwrap();
    let mut rng = SeedSpec::new(53).rng();
    let u: Vec<f64> = (0..1_000_000).map(|_| sample_joint_occupation(&config, &mut rng).unwrap()[0]).collect();
    assert!(ks_one_sample(&u, arcsine_cdf).unwrap().statistic <= 0.002);
}

#[test]
fn ibm_second_moment() {
    let mut rng = SeedSpec::new(54).rng();
    let z2: Vec<f64> = (0..1_000_000).map(|_| sample_ibm(1.0, &mut rng).unwrap().powi(2)).collect();
    let m = MomentSummary::from_samples(&z2).unwrap();
    assert!(m.mean_test((2.0 / std::f64::consts::PI).sqrt()).statistic <= 3.0, "{m:?}");
}

#[test]
fn extreme_leg_medians_straddle_one_third() {
    let config = SpiderConfig::uniform(3).unwrap();
    let recs = draws(55, 400, |r| minmax_record(&sample_occupation(&config, 100_000, r)).unwrap());
    let max: Vec<f64> = recs.iter().map(|r| r.max_fraction).collect();
    let min: Vec<f64> = recs.iter().map(|r| r.min_fraction).collect();
    assert!(Ecdf::new(&max).unwrap().quantile(0.5) > 1.0 / 3.0);
    assert!(Ecdf::new(&min).unwrap().quantile(0.5) < 1.0 / 3.0);
}

#[test]
fn ks_one_sample_calibration_and_power() {
    let p: Vec<f64> = (0..100)
        .map(|k| {
            let mut rng = SeedSpec::new(56).derive_stream(k).rng();
            let v: Vec<f64> = (0..100_000).map(|_| rng.exponential(1.0)).collect();
            ks_one_sample(&v, exp_cdf(1.0)).unwrap().p_value
        })
        .collect();
    let rejected = p.iter().filter(|&&x| x < 0.05).count() as f64 / 100.0;
    assert!((0.01..=0.12).contains(&rejected), "{rejected}");

    let mut rng = SeedSpec::new(57).rng();
    let v: Vec<f64> = (0..10_000).map(|_| rng.exponential(1.0)).collect();
    assert!(ks_one_sample(&v, exp_cdf(2.0)).unwrap().p_value < 1e-6);
}

#[test]
fn ks_two_sample_calibration_and_power() {
    let p: Vec<f64> = (0..100)
        .map(|k| {
            let mut rng = SeedSpec::new(58).derive_stream(k).rng();
            let a: Vec<f64> = (0..10_000).map(|_| rng.standard_normal()).collect();
            let b: Vec<f64> = (0..10_000).map(|_| rng.standard_normal()).collect();
            ks_two_sample(&a, &b).unwrap().p_value
        })
        .collect();
    let rejected = p.iter().filter(|&&x| x < 0.05).count() as f64 / 100.0;
    assert!((0.01..=0.12).contains(&rejected), "{rejected}");

    let mut rng = SeedSpec::new(59).rng();
    // sin^2 of a uniform angle is arcsine distributed
    let arcsine: Vec<f64> = (0..10_000)
        .map(|_| (std::f64::consts::FRAC_PI_2 * rng.uniform()).sin().powi(2))
        .collect();
    let uniform: Vec<f64> = (0..10_000).map(|_| rng.uniform()).collect();
    assert!(ks_one_sample(&arcsine, arcsine_cdf).unwrap().p_value > 1e-3);
    assert!(ks_two_sample(&arcsine, &uniform).unwrap().p_value < 1e-6);
}

fn pmf_inverse_draws(x: i64, params: SkewParams, n: usize, seed: u64) -> BTreeMap<u64, u64> {
    let mut rng = SeedSpec::new(seed).rng();
    let mut counts = BTreeMap::new();
    for _ in 0..n {
        let u = rng.uniform();
        let (mut m, mut acc) = (0u64, 0.0);
        loop {
            acc += excursion_pmf(x, params, m).unwrap();
            if u < acc || m > 10_000 {
                break;
            }
            m += 1;
        }
        *counts.entry(m).or_insert(0) += 1;
    }
    counts
}

#[test]
fn chi_square_self_consistency_and_power() {
    let params = SkewParams::new(0.5).unwrap();
    let counts = pmf_inverse_draws(1, params, 1_000_000, 60);
    let same = chi_square_pmf(&counts, |m| excursion_pmf(1, params, m).unwrap(), 60).unwrap();
    assert!(same.p_value > 1e-3, "{same:?}");
    let other = chi_square_pmf(&counts, |m| excursion_pmf(2, params, m).unwrap(), 60).unwrap();
    assert!(other.p_value < 1e-6, "{other:?}");
}

#[test]
fn embedded_walk_matches_markov_walk() {
    let config = SpiderConfig::new(&[0.2, 0.3, 0.5]).unwrap();
    let n = 200;
    let embedded = draws(61, 10_000, |r| {
        let walk = simulate_coupled_pair(&config, 8, n, r).unwrap().embedded_walk();
        (occupation_times(&walk).fraction(3), walk.radius_at(n))
    });
    let markov = draws(62, 10_000, |r| {
        let walk = simulate_rws_markov(&config, n, r);
        (occupation_times(&walk).fraction(3), walk.radius_at(n))
    });
    let (ea, er): (Vec<f64>, Vec<f64>) = embedded.into_iter().unzip();
    let (ma, mr): (Vec<f64>, Vec<f64>) = markov.into_iter().unzip();
    assert!(ks_two_sample(&ea, &ma).unwrap().p_value > 1e-3);
    assert!(ks_two_sample(&er, &mr).unwrap().p_value > 1e-3);
}

#[test]
fn stopping_time_increments_have_mean_one_and_lattice_variance() {
    let config = SpiderConfig::new(&[0.2, 0.3, 0.5]).unwrap();
    let m = 16u32;
    let mut inc = Vec::new();
    let mut k = 0;
    while inc.len() < 100_000 {
        let mut rng = SeedSpec::new(63).derive_stream(k).rng();
        inc.extend(simulate_coupled_pair(&config, m, 1000, &mut rng).unwrap().tau_increments());
        k += 1;
    }
    let moments = MomentSummary::from_samples(&inc).unwrap();
    assert!(moments.mean_test(1.0).statistic <= 3.0, "{moments:?}");
    // exit time of a simple walk from (-m, m), in units of m^2 steps
    let var = 2.0 / 3.0 * (1.0 - 1.0 / (m * m) as f64);
    let sq: Vec<f64> = inc.iter().map(|t| (t - 1.0).powi(2)).collect();
    let sq_moments = MomentSummary::from_samples(&sq).unwrap();
    assert!(sq_moments.mean_test(var).statistic <= 3.0, "{sq_moments:?}");
    // consecutive increments are independent
    let rho = spearman_rho(&inc[..inc.len() - 1], &inc[1..]).unwrap();
    assert!(rho.abs() < 3.0 / (inc.len() as f64).sqrt(), "{rho}");
}

#[test]
fn local_time_increments_have_mean_one() {
    let config = SpiderConfig::skew(0.3).unwrap();
    let site = SpiderPoint::from_signed(-2);
    let mut a = Vec::new();
    let mut k = 0;
    while a.len() < 20_000 {
        let mut rng = SeedSpec::new(64).derive_stream(k).rng();
        a.extend(simulate_coupled_pair(&config, 16, 256, &mut rng).unwrap().a_increments(site).unwrap());
        k += 1;
    }
    let moments = MomentSummary::from_samples(&a).unwrap();
    assert!(moments.mean_test(1.0).statistic <= 3.0, "{moments:?}");
    assert!(a.iter().all(|&x| x > 0.0));
    // geometric in steps of 1/m with mean 1: variance 1 - 1/m
    assert!(MomentSummary::from_samples(&a.iter().map(|x| (x - 1.0).powi(2)).collect::<Vec<_>>())
        .unwrap()
        .mean_test(1.0 - 1.0 / 16.0)
        .statistic
        <= 3.0);
}
