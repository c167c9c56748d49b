//! G(p, X, Y) over a prime range and its rolling averages.

use murmur_core::empirical::{empirical_sweep, rolling_average, window_width, FamilyData};
use murmur_core::quadfield::DiscriminantWindow;

fn main() -> anyhow::Result<()> {
    let x = 1 << 13;
    let family = FamilyData::compute(DiscriminantWindow::new(x, x)?, None)?;
    println!("|family| = {}, G_denom = {}", family.records().len(), family.denom());
    let points = empirical_sweep(&family, 3, 9 * x / 4)?;
    for pt in points.iter().step_by(200) {
        println!("p = {:>6} ξ = {:.3} G = {:+.4}", pt.p, pt.xi, pt.g);
    }
    for xi in [0.5, 0.8, 1.2, 1.5, 1.8] {
        let p = (xi * x as f64).ceil() as u64;
        let avg = rolling_average(&points, p, window_width(p, 0.55))?;
        println!("Ξ = {:.3} over {:>3} primes: G_avg = {:+.4}", avg.xi, avg.primes_used, avg.g_avg);
    }
    Ok(())
}
