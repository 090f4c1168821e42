//! Spider walks two ways: step by step from the transition rule, and by
//! relabeling the excursions of a simple walk with random legs.
//!
//!     cargo run --release --example spider_walk

use spiderwalk::spider::{
    build_rws_from_ssrw, decompose_excursions, distance, simulate_rws_markov, simulate_ssrw,
};
use spiderwalk::stats::ks_two_sample;
use spiderwalk::{SeedSpec, SpiderConfig, SpiderPoint};

fn main() -> spiderwalk::Result<()> {
    let config = SpiderConfig::new(&[0.2, 0.3, 0.5])?;
    let mut rng = SeedSpec::new(7).rng();

    let path = simulate_rws_markov(&config, 20, &mut rng);
    for (i, p) in path.points().iter().enumerate() {
        println!("{i:>3}  leg {}  radius {}", p.leg().unwrap_or(0), p.radius());
    }

    let a = SpiderPoint::new(1, 3);
    let b = SpiderPoint::new(2, 4);
    println!("d(v(3,1), v(4,2)) = {}", distance(a, b));
    println!("d(v(3,1), v(1,1)) = {}", distance(a, SpiderPoint::new(1, 1)));

    let ssrw = simulate_ssrw(40, &mut rng);
    let excursions = decompose_excursions(&ssrw);
    println!("{} excursions in a 40-step simple walk", excursions.len());

    // both constructions give the same law; compare the final radius
    let reps = 20_000;
    let n = 400;
    let markov: Vec<f64> = (0..reps)
        .map(|k| {
            let mut r = SeedSpec::new(1).derive_stream(k).rng();
            simulate_rws_markov(&config, n, &mut r).radius_at(n)
        })
        .collect();
    let relabeled = (0..reps)
        .map(|k| {
            let mut r = SeedSpec::new(2).derive_stream(k).rng();
            let ssrw = simulate_ssrw(n, &mut r);
            Ok(build_rws_from_ssrw(&config, &ssrw, &mut r)?.radius_at(n))
        })
        .collect::<spiderwalk::Result<Vec<f64>>>()?;
    let ks = ks_two_sample(&markov, &relabeled)?;
    println!("final radius, Markov vs relabeled: D = {:.4}, p = {:.3}", ks.statistic, ks.p_value);
    Ok(())
}
