//! M_Φ(Ξ) for the indicator and bump weights, and its drift toward −1/2.

use murmur_core::analytic::{asymptote_report, log_grid, MurmurationEvaluator, WeightFunction};
use murmur_core::density::{linear_grid, DensityContext, DensityParams};

fn main() -> anyhow::Result<()> {
    let ctx = DensityContext::new(DensityParams::default())?;
    let eval = MurmurationEvaluator::new(&ctx);
    let ind = WeightFunction::indicator(1.0, 2.0)?;
    let bump = WeightFunction::smooth_bump(1.0, 2.0)?;
    for xi in linear_grid(0.2, 3.0, 15) {
        println!("Ξ = {xi:.2} indicator {:+.5} bump {:+.5}", eval.evaluate(xi, &ind)?.value, eval.evaluate(xi, &bump)?.value);
    }
    for (name, w) in [("indicator", &ind), ("bump", &bump)] {
        let r = asymptote_report(&eval, w, &log_grid(100.0, 10_000.0, 25))?;
        println!("{name}: slope of log|M_Φ + 1/2| on [1e2, 1e4] = {:.3}", r.slope);
    }
    Ok(())
}
