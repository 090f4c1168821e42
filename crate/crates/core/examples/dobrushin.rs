//! The contrast xi(x, n) - c xi(0, n), scaled by n^{1/4}, against the law of
//! U sqrt|V| for independent standard normals U and V.
//!
//!     cargo run --release --example dobrushin

use spiderwalk::analytic::dobrushin_cdf;
use spiderwalk::localtime::{contrast_scale, sample_site_counts};
use spiderwalk::stats::ks_one_sample;
use spiderwalk::{SeedSpec, SpiderConfig, SpiderPoint};

fn main() -> spiderwalk::Result<()> {
    let config = SpiderConfig::new(&[0.2, 0.3, 0.5])?;
    let (leg, x) = (3, 1);
    let site = SpiderPoint::new(leg, x);
    let n = 100_000;
    let reps = 4_000;
    let p = config.leg_prob(leg);
    let scale = contrast_scale(p, x, n);
    let z: Vec<f64> = (0..reps)
        .map(|k| {
            let mut rng = SeedSpec::new(5).derive_stream(k).rng();
            let (origin, at_site) = sample_site_counts(&config, n, site, &mut rng);
            (at_site as f64 - 2.0 * p * origin as f64) / scale
        })
        .collect();
    let ks = ks_one_sample(&z, dobrushin_cdf)?;
    println!("leg {leg} radius {x}, n = {n}: D = {:.4}, p = {:.3}", ks.statistic, ks.p_value);
    for t in [0.5, 1.0, 2.0] {
        println!("P(U sqrt|V| <= {t}) = {:.6}", dobrushin_cdf(t));
    }
    Ok(())
}
