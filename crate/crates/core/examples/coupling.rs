//! A fine-grid spider Brownian path with a spider walk embedded at the
//! times it first moves one unit away from its last lattice point, and the
//! distance between the two as the horizon grows.
//!
//!     cargo run --release --example coupling

use spiderwalk::coupling::{discrepancy_record, simulate_coupled_pair};
use spiderwalk::stats::MomentSummary;
use spiderwalk::{SeedSpec, SpiderConfig};

fn main() -> spiderwalk::Result<()> {
    let config = SpiderConfig::skew(0.3)?;
    let m = 32;
    let n = 1 << 12;
    let mut rng = SeedSpec::new(21).rng();
    let pair = simulate_coupled_pair(&config, m, n, &mut rng)?;
    println!("fine steps {}, walk steps {}", pair.fine_horizon(), pair.walk_steps());
    let inc = MomentSummary::from_samples(&pair.tau_increments())?;
    println!("tau increments: mean {:.4} (se {:.4}), variance {:.4}", inc.mean, inc.se_mean, inc.variance);
    for k in [256, 1024, 4096] {
        let d = discrepancy_record(&pair, k)?;
        println!(
            "n={k:>5}  walk {:>7.3}  local time {:>7.3}  occupation {:>8.3}",
            d.walk, d.localtime, d.occupation
        );
    }
    Ok(())
}
