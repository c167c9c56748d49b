//! Local character sums against their products, and c(p) for small primes.

use murmur_core::arith_core::rational_to_f64;
use murmur_core::localfactors::{
    c_8n_p_bruteforce, c_8n_p_product, c_p_exact, c_y_bruteforce, c_y_identity_check, c_y_product,
    CpEvaluator, LocalSumSpec, DEFAULT_LOOP_BUDGET,
};

fn main() -> anyhow::Result<()> {
    for (n, p) in [(9, 5), (12, 7), (45, 11)] {
        println!("C_8n,p n={n:>2} p={p:>2}: brute {:>4} product {:>4}", c_8n_p_bruteforce(n, p), c_8n_p_product(n, p));
    }
    let spec = LocalSumSpec::new(2, 3, 1, 7)?;
    println!("C^(y) y=2 n=3 a=1 p=7: brute {} product {}", c_y_bruteforce(&spec, DEFAULT_LOOP_BUDGET)?, c_y_product(&spec));
    let report = c_y_identity_check(6, 13)?;
    println!("c_y identity y=6 p=13 holds at all {} places: {}", report.places.len(), report.all_equal());
    let eval = CpEvaluator::new(100_000);
    for p in [3u64, 5, 7, 11, 13, 1009] {
        println!("c({p:>4}) = {:.10}  (exact at M=50: {:.10})", eval.c_p(p), rational_to_f64(&c_p_exact(p, 50)));
    }
    Ok(())
}
