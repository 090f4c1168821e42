//! Iterated Brownian motion at a fixed time, scaled by t^{1/4}.
//!
//!     cargo run --release --example ibm

use spiderwalk::analytic::{dobrushin_cdf, sample_ibm};
use spiderwalk::stats::ks_one_sample;
use spiderwalk::SeedSpec;

fn main() -> spiderwalk::Result<()> {
    let mut rng = SeedSpec::new(31).rng();
    for t in [1.0f64, 100.0] {
        let z = (0..200_000)
            .map(|_| Ok(sample_ibm(t, &mut rng)? / t.powf(0.25)))
            .collect::<spiderwalk::Result<Vec<f64>>>()?;
        let ks = ks_one_sample(&z, dobrushin_cdf)?;
        println!("t={t}: D = {:.5}, p = {:.3}", ks.statistic, ks.p_value);
    }
    Ok(())
}
