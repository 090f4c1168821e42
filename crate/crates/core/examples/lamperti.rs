//! Time a skew walk spends on the positive side, against the Lamperti law
//! (the arcsine law when p = 1/2).
//!
//!     cargo run --release --example lamperti

use spiderwalk::analytic::{arcsine_cdf, lamperti_cdf, SkewParams};
use spiderwalk::localtime::sample_occupation;
use spiderwalk::stats::{ks_one_sample, Ecdf};
use spiderwalk::{SeedSpec, SpiderConfig};

fn main() -> spiderwalk::Result<()> {
    let n = 10_000;
    let reps = 20_000;
    for p in [0.3, 0.5] {
        let config = SpiderConfig::skew(p)?;
        let params = SkewParams::new(p)?;
        let fractions: Vec<f64> = (0..reps)
            .map(|k| {
                let mut rng = SeedSpec::new(3).derive_stream(k).rng();
                sample_occupation(&config, n, &mut rng).fraction(1)
            })
            .collect();
        let ecdf = Ecdf::new(&fractions)?;
        for u in [0.1, 0.5, 0.9] {
            println!("p={p} F({u}) empirical {:.4} limit {:.4}", ecdf.eval(u), lamperti_cdf(u, params));
        }
        let ks = ks_one_sample(&fractions, |u| lamperti_cdf(u, params))?;
        println!("p={p} KS D = {:.4}", ks.statistic);
    }
    println!("arcsine F(0.25) = {:.6}", arcsine_cdf(0.25));
    Ok(())
}
