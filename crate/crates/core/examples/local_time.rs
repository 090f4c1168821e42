//! Visit counts on a spider path, and the number of visits to a site during
//! one excursion against its geometric law.
//!
//!     cargo run --release --example local_time

use std::collections::BTreeMap;

use spiderwalk::analytic::{excursion_moments, excursion_pmf, SkewParams};
use spiderwalk::localtime::{local_time, occupation_times, return_times, sample_excursion_visits};
use spiderwalk::spider::simulate_rws_markov;
use spiderwalk::stats::chi_square_pmf;
use spiderwalk::{SeedSpec, SpiderConfig, SpiderPoint};

fn main() -> spiderwalk::Result<()> {
    let config = SpiderConfig::new(&[0.2, 0.3, 0.5])?;
    let mut rng = SeedSpec::new(11).rng();
    let path = simulate_rws_markov(&config, 10_000, &mut rng);

    let ledger = local_time(&path);
    let occ = occupation_times(&path);
    println!("xi(0, n) = {}", ledger.origin_count);
    for j in 1..=3 {
        println!(
            "leg {j}: T = {:>5}  xi((1,{j}), n) = {:>4}",
            occ.per_leg[j - 1],
            ledger.at(SpiderPoint::new(j, 1))
        );
    }
    println!("returns to the body: {}", return_times(&path).rho.len());

    // skew walk p = 0.3, site x = -2
    let skew = SpiderConfig::skew(0.3)?;
    let params = SkewParams::new(0.3)?;
    let x = -2i64;
    let mut counts = BTreeMap::new();
    let excursions = 200_000u64;
    for k in 0..excursions {
        let mut r = SeedSpec::new(12).derive_stream(k).rng();
        let v = sample_excursion_visits(&skew, SpiderPoint::from_signed(x), &mut r)?;
        *counts.entry(v).or_insert(0u64) += 1;
    }
    for m in 0..4 {
        let seen = counts.get(&m).copied().unwrap_or(0) as f64 / excursions as f64;
        println!("P(V = {m}): empirical {seen:.5}  exact {:.5}", excursion_pmf(x, params, m)?);
    }
    let (mean, var) = excursion_moments(x, params)?;
    println!("exact mean {mean:.4}, variance {var:.4}");
    let chi = chi_square_pmf(&counts, |m| excursion_pmf(x, params, m).unwrap_or(0.0), 60)?;
    println!("chi-square {:.2}, p = {:.3}", chi.statistic, chi.p_value);
    Ok(())
}
