//! The J₀ double series against the direct averaged density.

use murmur_core::analytic::{density_bessel, BesselSeriesParams};
use murmur_core::density::{DensityContext, DensityParams};

fn main() -> anyhow::Result<()> {
    let ctx = DensityContext::new(DensityParams::default())?;
    let params = BesselSeriesParams::default();
    for xi in [0.15, 0.5, 1.6, 3.0, 5.3, 8.0] {
        let direct = ctx.density_averaged(xi)?.total;
        let b = density_bessel(xi, &params, &ctx)?;
        println!("Ξ = {xi:<4} direct {direct:+.7} Bessel {:+.7} diff {:.2e} (estimate {:.1e})", b.value, (b.value - direct).abs(), b.trunc_estimate);
    }
    Ok(())
}
