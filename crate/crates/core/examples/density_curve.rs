//! The averaged density M(Ξ) and the per-prime density on either side of it.

use murmur_core::density::{DensityContext, DensityParams};

fn main() -> anyhow::Result<()> {
    let ctx = DensityContext::new(DensityParams::new(10_000, 0.05)?)?;
    println!("A = {:.10}, c̄ = {:.10}", ctx.a, ctx.cbar);
    for xi in [0.1, 0.5, 0.75, 1.5, 2.0, 3.0] {
        let avg = ctx.density_averaged(xi)?;
        let p1 = ctx.density_per_prime(15013, 15013.0 / xi)?;
        let p3 = ctx.density_per_prime(15031, 15031.0 / xi)?;
        println!("Ξ = {xi:<5} M = {:+.5}  p≡1 (4): {:+.5}  p≡3 (4): {:+.5}", avg.total, p1.total, p3.total);
    }
    if let Err(e) = ctx.density_averaged(1.0) {
        println!("Ξ = 1: {e}");
    }
    Ok(())
}
