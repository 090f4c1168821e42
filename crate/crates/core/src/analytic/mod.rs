//! Closed-form laws used as oracles for the simulations.
//!
//! Covers the origin-asymmetry factor `c(x)`, the law of visits to a site
//! during one excursion of the skew walk, the Laplace transform of skew
//! Brownian local time at inverse local time, the Lamperti occupation law,
//! the `U sqrt|V|` law, samplers for the stable-1/2 occupation vector and
//! for iterated Brownian motion, and the dyadic integral test.

pub mod quadrature;

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::randkit::{sample_levy_stable_half, SimRng};
use crate::spider::SpiderConfig;

pub use integral_test::{
    chung_erdos_test, log_power_dyadic_bounds, ChungErdosOutcome, DyadicBounds, IntegralTestFunction, Verdict,
};

/// Skew parameter: `p` is the probability of entering the positive side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SkewParams {
    p: f64,
}

impl SkewParams {
    pub fn new(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::invalid(format!("skew parameter {p} outside [0,1]")));
        }
        Ok(SkewParams { p })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        1.0 - self.p
    }
}

/// `2p` on the positive side, `2q` on the negative side.
pub fn c_of(x: f64, params: SkewParams) -> Result<f64> {
    if x == 0.0 || x.is_nan() {
        return Err(Error::invalid("c(x) is defined for x != 0"));
    }
    Ok(if x > 0.0 { 2.0 * params.p() } else { 2.0 * params.q() })
}

/// Probability that the skew walk visits `x` exactly `m` times before its
/// first return to 0.
pub fn excursion_pmf(x: i64, params: SkewParams, m: u64) -> Result<f64> {
    let c = c_of(x as f64, params)?;
    let a = x.unsigned_abs() as f64;
    Ok(if m == 0 {
        1.0 - c / (2.0 * a)
    } else {
        c / (4.0 * a * a) * ((2.0 * a - 1.0) / (2.0 * a)).powi((m - 1) as i32)
    })
}

/// Mean `c(x)` and variance `c(x)(4|x|-1) - c(x)^2` of the visit count.
pub fn excursion_moments(x: i64, params: SkewParams) -> Result<(f64, f64)> {
    let c = c_of(x as f64, params)?;
    let a = x.unsigned_abs() as f64;
    Ok((c, c * (4.0 * a - 1.0) - c * c))
}

/// `E exp(-beta eta*(x, tau))` where `tau` is the inverse local time at 0
/// at level 1: `exp(-c(x) beta / (1 + 2 beta |x|))`.
pub fn sbm_excursion_laplace(x: f64, beta: f64, params: SkewParams) -> Result<f64> {
    let c = c_of(x, params)?;
    if !(beta > 0.0) {
        return Err(Error::invalid(format!("Laplace argument must be positive, got {beta}")));
    }
    Ok((-c * beta / (1.0 + 2.0 * beta * x.abs())).exp())
}

/// Mean `c(x)` and variance `4 c(x) |x|` of `eta*(x, tau)`.
pub fn sbm_excursion_moments(x: f64, params: SkewParams) -> Result<(f64, f64)> {
    let c = c_of(x, params)?;
    Ok((c, 4.0 * c * x.abs()))
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x * FRAC_1_SQRT_2)
}

fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Density of the limiting fraction of time the skew walk spends on the
/// positive side.
pub fn lamperti_pdf(u: f64, params: SkewParams) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::invalid(format!("occupation fraction {u} outside (0,1)")));
    }
    let (p, q) = (params.p(), params.q());
    if p == 0.0 || q == 0.0 {
        return Err(Error::invalid("occupation law is degenerate for p in {0,1}"));
    }
    Ok(p * q / (PI * (u * (1.0 - u)).sqrt() * (p * p * (1.0 - u) + q * q * u)))
}

/// CDF of [`lamperti_pdf`]. With `u = sin^2 θ` the density integrates in
/// closed form to `(2/π) atan((q/p) sqrt(u/(1-u)))`; `p = 1/2` gives the
/// arcsine law.
pub fn lamperti_cdf(u: f64, params: SkewParams) -> f64 {
    let (p, q) = (params.p(), params.q());
    if u <= 0.0 {
        return 0.0;
    }
    if u >= 1.0 {
        return 1.0;
    }
    if p == 0.0 {
        return 1.0;
    }
    if q == 0.0 {
        return 0.0;
    }
    2.0 / PI * ((q / p) * (u / (1.0 - u)).sqrt()).atan()
}

/// Arcsine CDF `(2/π) arcsin(sqrt(u))` on [0, 1].
pub fn arcsine_cdf(u: f64) -> f64 {
    2.0 / PI * u.clamp(0.0, 1.0).sqrt().asin()
}

/// CDF of `U sqrt|V|` for independent standard normals `U`, `V`:
/// `F(z) = ∫_0^∞ Φ(z/√v) 2φ(v) dv`, by adaptive quadrature.
pub fn dobrushin_cdf(z: f64) -> f64 {
    if z.is_nan() {
        return f64::NAN;
    }
    if z == 0.0 {
        return 0.5;
    }
    let a = z.abs();
    // Φ(a/√v) - 1/2 for v > 0, weighted by the half-normal density of |V|.
    let integrand = |v: f64| {
        if v <= 0.0 {
            return 0.5 * 2.0 * normal_pdf(0.0);
        }
        (normal_cdf(a / v.sqrt()) - 0.5) * 2.0 * normal_pdf(v)
    };
    let mut breaks = vec![0.0, a * a / 16.0, a * a / 4.0, a * a, 4.0 * a * a, 0.25, 1.0, 2.0, 4.0, 9.0, 40.0];
    breaks.retain(|&b| b <= 40.0);
    breaks.sort_by(|x, y| x.partial_cmp(y).unwrap());
    breaks.dedup();
    let g = quadrature::integrate_pieces(integrand, &breaks, 1e-13);
    if z > 0.0 {
        0.5 + g
    } else {
        0.5 - g
    }
}

/// One draw of `U sqrt|V|`.
pub fn sample_dobrushin(rng: &mut SimRng) -> f64 {
    let u = rng.standard_normal();
    let v = rng.standard_normal();
    u * v.abs().sqrt()
}

/// Leg occupation fractions in law: `p_j^2 U_j / Σ_k p_k^2 U_k` with
/// independent stable-1/2 `U_j`.
pub fn sample_joint_occupation(config: &SpiderConfig, rng: &mut SimRng) -> Result<Vec<f64>> {
    if config.leg_probs().iter().any(|&p| p <= 0.0) {
        return Err(Error::invalid("joint occupation needs every leg probability positive"));
    }
    let weights: Vec<f64> = config
        .leg_probs()
        .iter()
        .map(|&p| p * p * sample_levy_stable_half(rng))
        .collect();
    let total: f64 = weights.iter().sum();
    Ok(weights.into_iter().map(|w| w / total).collect())
}

/// Iterated Brownian motion at time `t`: `W(L)` with `L = sqrt(t)|N_1|`
/// distributed as Brownian local time at zero, `W` an independent Brownian
/// motion.
pub fn sample_ibm(t: f64, rng: &mut SimRng) -> Result<f64> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::invalid(format!("IBM time must be positive, got {t}")));
    }
    let local_time = t.sqrt() * rng.standard_normal().abs();
    Ok(local_time.sqrt() * rng.standard_normal())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::randkit::SeedSpec;

    fn sp(p: f64) -> SkewParams {
        SkewParams::new(p).unwrap()
    }

    #[test]
    fn c_values() {
        assert!((c_of(5.0, sp(0.3)).unwrap() - 0.6).abs() < 1e-15);
        assert!((c_of(-1.0, sp(0.3)).unwrap() - 1.4).abs() < 1e-15);
        assert_eq!(c_of(-7.0, sp(0.5)).unwrap(), 1.0);
        assert!(c_of(0.0, sp(0.3)).is_err());
        assert!(SkewParams::new(1.1).is_err());
    }

    #[test]
    fn pmf_values() {
        assert_eq!(excursion_pmf(1, sp(0.5), 0).unwrap(), 0.5);
        for m in 1..10 {
            let want = 0.25 * 0.5f64.powi(m as i32 - 1);
            assert!((excursion_pmf(1, sp(0.5), m).unwrap() - want).abs() < 1e-16);
        }
        assert_eq!(excursion_pmf(2, sp(0.5), 0).unwrap(), 0.75);
        assert_eq!(excursion_pmf(2, sp(0.5), 1).unwrap(), 1.0 / 16.0);
        assert!(excursion_pmf(0, sp(0.5), 1).is_err());
    }

    #[test]
    fn pmf_normalization_and_moments_by_series() {
        for x in (-20i64..=20).filter(|&x| x != 0) {
            for p in (1..=9).map(|i| i as f64 / 10.0) {
                let params = sp(p);
                // Geometric tail summed in closed form beyond the cut.
                let p0 = excursion_pmf(x, params, 0).unwrap();
                let p1 = excursion_pmf(x, params, 1).unwrap();
                let r = (2.0 * x.unsigned_abs() as f64 - 1.0) / (2.0 * x.unsigned_abs() as f64);
                let total = p0 + p1 / (1.0 - r);
                assert!((total - 1.0).abs() < 1e-12, "x={x} p={p}");
                let (mut s1, mut s2) = (0.0, 0.0);
                let mut m = 1u64;
                loop {
                    let w = excursion_pmf(x, params, m).unwrap();
                    s1 += m as f64 * w;
                    s2 += (m * m) as f64 * w;
                    if w * ((m * m) as f64) < 1e-18 {
                        break;
                    }
                    m += 1;
                }
                let (mean, var) = excursion_moments(x, params).unwrap();
                assert!((s1 - mean).abs() < 1e-10, "x={x} p={p}");
                assert!((s2 - s1 * s1 - var).abs() < 1e-10, "x={x} p={p}");
            }
        }
        assert_eq!(excursion_moments(1, sp(0.5)).unwrap(), (1.0, 2.0));
        let (m, v) = excursion_moments(1, sp(0.3)).unwrap();
        assert!((m - 0.6).abs() < 1e-15 && (v - 1.44).abs() < 1e-12);
    }

    /// Value and derivative at 0 of the interpolating polynomial through
    /// `(h_i, v_i)`.
    fn extrapolate_to_zero(hs: &[f64], vs: &[f64]) -> (f64, f64) {
        let (mut value, mut slope) = (0.0, 0.0);
        for i in 0..hs.len() {
            let mut basis = 1.0;
            let mut log_deriv = 0.0;
            for j in 0..hs.len() {
                if i != j {
                    basis *= -hs[j] / (hs[i] - hs[j]);
                    log_deriv += -1.0 / hs[j];
                }
            }
            value += vs[i] * basis;
            slope += vs[i] * basis * log_deriv;
        }
        (value, slope)
    }

    #[test]
    fn laplace_transform_value_and_derivatives() {
        let params = sp(0.5);
        assert!((sbm_excursion_laplace(1.0, 1.0, params).unwrap() - 0.716_531_310_573_789_3).abs() < 1e-12);
        assert!(sbm_excursion_laplace(0.0, 1.0, params).is_err());
        assert!(sbm_excursion_laplace(1.0, 0.0, params).is_err());
        for (x, p) in [(1.0, 0.5), (-2.5, 0.3), (0.7, 0.8)] {
            let params = sp(p);
            // log L(h)/h = -k1 + (k2/2) h + O(h^2), with k1, k2 the mean and
            // variance; extrapolate from small positive h.
            let hs: Vec<f64> = (0..7).map(|i| 0.02 / 2f64.powi(i)).collect();
            let vs: Vec<f64> = hs
                .iter()
                .map(|&h| sbm_excursion_laplace(x, h, params).unwrap().ln() / h)
                .collect();
            let (q0, dq0) = extrapolate_to_zero(&hs, &vs);
            let (mean, var) = sbm_excursion_moments(x, params).unwrap();
            assert!((-q0 - mean).abs() < 1e-8, "{} vs {mean}", -q0);
            assert!((2.0 * dq0 - var).abs() < 1e-8, "{} vs {var}", 2.0 * dq0);
        }
    }

    #[test]
    fn lamperti_values_and_symmetry() {
        assert!((lamperti_pdf(0.5, sp(0.3)).unwrap() - 0.461_000_524_817_903_7).abs() < 1e-12);
        for u in [0.01f64, 0.2, 0.5, 0.77, 0.999] {
            let arcsine = 1.0 / (PI * (u * (1.0 - u)).sqrt());
            assert!((lamperti_pdf(u, sp(0.5)).unwrap() - arcsine).abs() < 1e-12);
            let a = lamperti_pdf(u, sp(0.3)).unwrap();
            let b = lamperti_pdf(1.0 - u, sp(0.7)).unwrap();
            assert!((a - b).abs() <= 1e-12 * a);
            assert!((lamperti_cdf(u, sp(0.5)) - arcsine_cdf(u)).abs() < 1e-14);
            assert!((lamperti_cdf(u, sp(0.3)) + lamperti_cdf(1.0 - u, sp(0.7)) - 1.0).abs() < 1e-12);
        }
        assert!(lamperti_pdf(0.0, sp(0.3)).is_err());
        assert!(lamperti_pdf(0.5, sp(0.0)).is_err());
        assert_eq!(lamperti_cdf(0.5, sp(0.5)), 0.5);
        assert_eq!(lamperti_cdf(1.0, sp(0.3)), 1.0);
    }

    #[test]
    fn lamperti_cdf_matches_quadrature_of_density() {
        // Independent route: integrate the density after u = sin^2 θ.
        for p in [0.1, 0.3, 0.5, 0.8] {
            let params = sp(p);
            let quad = |u: f64| {
                let theta_max = u.sqrt().asin();
                let (p, q) = (params.p(), params.q());
                quadrature::integrate(
                    |t: f64| 2.0 * p * q / (PI * (p * p * t.cos().powi(2) + q * q * t.sin().powi(2))),
                    0.0,
                    theta_max,
                    1e-12,
                )
            };
            assert!((quad(1.0) - 1.0).abs() < 1e-6);
            for u in [0.05, 0.3, 0.5, 0.9] {
                assert!((quad(u) - lamperti_cdf(u, params)).abs() < 1e-9, "p={p} u={u}");
            }
        }
    }

    #[test]
    fn dobrushin_reference_values() {
        // Reference values from an independent 30-digit quadrature.
        let refs = [
            (0.25, 0.648_317_473_690_962_9),
            (0.5, 0.756_743_312_947_035),
            (1.0, 0.888_847_802_919_026_4),
            (2.0, 0.980_251_864_002_488_3),
            (3.0, 0.997_080_641_586_932_1),
        ];
        for (z, want) in refs {
            assert!((dobrushin_cdf(z) - want).abs() < 1e-10, "z={z}");
        }
        assert_eq!(dobrushin_cdf(0.0), 0.5);
        for z in [0.5, 1.0, 2.0] {
            assert!((dobrushin_cdf(z) + dobrushin_cdf(-z) - 1.0).abs() < 1e-8);
        }
        let grid: Vec<f64> = (-600..=600).map(|i| i as f64 / 100.0).collect();
        for w in grid.windows(2) {
            assert!(dobrushin_cdf(w[1]) >= dobrushin_cdf(w[0]));
        }
    }

    #[test]
    fn joint_occupation_shape() {
        let mut rng = SeedSpec::new(4).rng();
        let one = SpiderConfig::new(&[1.0]).unwrap();
        assert_eq!(sample_joint_occupation(&one, &mut rng).unwrap(), vec![1.0]);
        let three = SpiderConfig::new(&[0.2, 0.3, 0.5]).unwrap();
        for _ in 0..10_000 {
            let f = sample_joint_occupation(&three, &mut rng).unwrap();
            assert!(f.iter().all(|&x| x > 0.0));
            assert!((f.iter().sum::<f64>() - 1.0).abs() <= 4.0 * f64::EPSILON);
        }
        let degenerate = SpiderConfig::new(&[0.0, 1.0]).unwrap();
        assert!(sample_joint_occupation(&degenerate, &mut rng).is_err());
    }

    #[test]
    fn ibm_rejects_bad_time() {
        let mut rng = SeedSpec::new(4).rng();
        assert!(sample_ibm(0.0, &mut rng).is_err());
        assert!(sample_ibm(-1.0, &mut rng).is_err());
    }
}
