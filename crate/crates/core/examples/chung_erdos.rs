//! The integral test for f(x) = (log x)^a through its dyadic sum, with the
//! bounds from the antiderivative, and how often a simulated walk has
//! min-leg occupation below n/f(n) at dyadic times.
//!
//!     cargo run --release --example chung_erdos

use spiderwalk::analytic::{chung_erdos_test, log_power_dyadic_bounds, IntegralTestFunction};
use spiderwalk::localtime::sample_dyadic_occupation;
use spiderwalk::stats::dyadic_io_count;
use spiderwalk::{SeedSpec, SpiderConfig};

fn main() -> spiderwalk::Result<()> {
    for a in [1.0, 1.5, 2.0, 3.0, 4.0] {
        let f = IntegralTestFunction::log_power(a);
        let out = chung_erdos_test(&f, 60)?;
        let b = log_power_dyadic_bounds(a, 60)?;
        println!(
            "a={a:<4} sum {:>10.4} in [{:.4}, {:.4}]  slope {:>6.3}  {}",
            out.dyadic_sum, b.lower, b.upper, out.tail_exponent, out.verdict
        );
    }
    let config = SpiderConfig::uniform(3)?;
    let f = IntegralTestFunction::log_power(3.0);
    let hits: Vec<usize> = (0..20)
        .map(|k| {
            let cps = sample_dyadic_occupation(&config, 16, &mut SeedSpec::new(17).derive_stream(k).rng());
            dyadic_io_count(&cps, &f)
        })
        .collect();
    println!("checkpoints with min < n/(log n)^3, per walk: {hits:?}");
    Ok(())
}
