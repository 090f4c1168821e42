//! Largest and smallest leg occupation of a symmetric spider at dyadic
//! times, and the sandwich min <= (n - xi(0,n))/N <= max.
//!
//!     cargo run --release --example minmax

use spiderwalk::localtime::sample_dyadic_occupation;
use spiderwalk::stats::minmax_record;
use spiderwalk::{SeedSpec, SpiderConfig};

fn main() -> spiderwalk::Result<()> {
    let config = SpiderConfig::uniform(3)?;
    let mut rng = SeedSpec::new(13).rng();
    let checkpoints = sample_dyadic_occupation(&config, 20, &mut rng);
    println!("{:>3} {:>10} {:>10} {:>10}", "k", "max/n", "mean/n", "min/n");
    for (k, occ) in checkpoints.iter().enumerate() {
        let rec = minmax_record(occ)?;
        assert!(rec.sandwich_holds);
        let mean = (occ.horizon as f64 - occ.origin_time as f64) / 3.0 / occ.horizon as f64;
        println!("{k:>3} {:>10.4} {mean:>10.4} {:>10.4}", rec.max_fraction, rec.min_fraction);
    }
    Ok(())
}
