//! Brownian local time gathered between successive embedding times while
//! the walk sits at a site is exponential with mean 1.
//!
//!     cargo run --release --example exp_increments

use spiderwalk::coupling::simulate_coupled_pair;
use spiderwalk::stats::{ks_one_sample, MomentSummary};
use spiderwalk::{SeedSpec, SpiderConfig, SpiderPoint};

fn main() -> spiderwalk::Result<()> {
    let config = SpiderConfig::skew(0.5)?;
    let site = SpiderPoint::from_signed(1);
    let mut a = Vec::new();
    let mut k = 0;
    while a.len() < 20_000 {
        let mut rng = SeedSpec::new(4).derive_stream(k).rng();
        a.extend(simulate_coupled_pair(&config, 32, 256, &mut rng)?.a_increments(site)?);
        k += 1;
    }
    let moments = MomentSummary::from_samples(&a)?;
    println!("{} increments from {k} pairs", a.len());
    println!("mean {:.4} (se {:.4})", moments.mean, moments.se_mean);
    // values sit on the lattice 1/m, 2/m, ... so D cannot go below about 1/m
    let ks = ks_one_sample(&a, |t| if t <= 0.0 { 0.0 } else { -(-t).exp_m1() })?;
    println!("KS vs Exp(1): D = {:.4}", ks.statistic);
    Ok(())
}
