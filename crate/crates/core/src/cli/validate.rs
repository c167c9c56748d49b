//! Invariant suites run by `murmur validate`.

use crate::analytic::{
    bessel_j0, bessel_j0_quadrature, density_bessel, euler_identities, q_d, BesselSeriesParams,
};
use crate::arith_core::{legendre_residue_sum, primes_in_range, Factorization, ExactRational};
use crate::density::{eta_y, kappa, vartheta, DensityContext};
use crate::empirical::{empirical_sweep, FamilyData};
use crate::localfactors::{
    c_8n_p_bruteforce, c_8n_p_product, c_y_bruteforce, c_y_identity_check, c_y_product, LocalSumSpec,
    DEFAULT_LOOP_BUDGET,
};
use crate::quadfield::{class_number_dirichlet, class_number_forms, enumerate_family, DiscriminantWindow};

pub const SUITES: &[&str] = &["arith", "localfactors", "quadfield", "density", "analytic", "empirical"];

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub suite: &'static str,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(suite: &'static str, name: &'static str, failures: Vec<String>, total: usize) -> Check {
    let detail = match failures.first() {
        None => format!("{total} cases"),
        Some(f) => format!("{} of {total} failed; first: {f}", failures.len()),
    };
    Check { suite, name, passed: failures.is_empty(), detail }
}

fn odd_primes(hi: u64) -> Vec<u64> {
    primes_in_range(3, hi).unwrap_or_default()
}

fn arith() -> Vec<Check> {
    let mut fails = Vec::new();
    let mut total = 0;
    for p in odd_primes(199) {
        for a in 1..p as i64 {
            total += 1;
            match legendre_residue_sum(p, a) {
                Ok(-1) => {}
                other => fails.push(format!("p={p} a={a}: {other:?}")),
            }
        }
    }
    vec![check("arith", "residue_sum_lemma", fails, total)]
}

fn localfactors() -> Vec<Check> {
    let mut out = Vec::new();
    let (mut fails, mut total) = (Vec::new(), 0);
    for p in odd_primes(97) {
        for n in 1..=50 {
            total += 1;
            let (b, q) = (c_8n_p_bruteforce(n, p), c_8n_p_product(n, p));
            if b != q {
                fails.push(format!("n={n} p={p}: {b} vs {q}"));
            }
        }
    }
    out.push(check("localfactors", "c8n_product_oracle", fails, total));
    let (mut fails, mut total) = (Vec::new(), 0);
    for p in [3u64, 5, 7, 11, 13] {
        for y in (1..=12).filter(|y| y % p != 0) {
            for n in 1..=8 {
                for a in 1..=6 {
                    let spec = match LocalSumSpec::new(y, n, a, p) {
                        Ok(s) => s,
                        Err(_) => continue,
                    };
                    total += 1;
                    match c_y_bruteforce(&spec, DEFAULT_LOOP_BUDGET) {
                        Ok(b) if b == c_y_product(&spec) => {}
                        other => fails.push(format!("y={y} n={n} a={a} p={p}: {other:?}")),
                    }
                }
            }
        }
    }
    out.push(check("localfactors", "cy_product_oracle", fails, total));
    let (mut fails, mut total) = (Vec::new(), 0);
    for p in odd_primes(17) {
        for y in (1..=100).filter(|y| y % p != 0) {
            total += 1;
            match c_y_identity_check(y, p) {
                Ok(r) if r.all_equal() => {}
                other => fails.push(format!("y={y} p={p}: {other:?}")),
            }
        }
    }
    out.push(check("localfactors", "cy_identity", fails, total));
    out
}

fn quadfield() -> Vec<Check> {
    let window = DiscriminantWindow::new(4, 20_000).expect("fixed window");
    let ds = enumerate_family(&window).unwrap_or_default();
    let fails: Vec<String> = ds
        .iter()
        .filter_map(|&d| match (class_number_forms(d), class_number_dirichlet(d)) {
            (Ok(a), Ok((b, _))) if a == b => None,
            (a, b) => Some(format!("D={d}: {a:?} vs {b:?}")),
        })
        .collect();
    vec![check("quadfield", "class_number_methods", fails, ds.len())]
}

fn density() -> Vec<Check> {
    let mut fails = Vec::new();
    for y in 1..=1000u64 {
        let k = kappa(y);
        if vartheta(y) * eta_y(y) != k {
            fails.push(format!("ϑη ≠ κ at y={y}"));
        }
        let sum = Factorization::of(y).divisors().into_iter().fold(ExactRational::from_integer(0.into()), |acc, d| acc + q_d(d));
        if sum != k {
            fails.push(format!("κ ≠ ΣQ(d) at y={y}"));
        }
    }
    vec![check("density", "kappa_identities", fails, 1000)]
}

fn analytic() -> Vec<Check> {
    let mut out = Vec::new();
    let fails = match euler_identities(10_000) {
        Ok(r) if r.residual_8_11 <= 1e-4 && r.residual_2_3 <= 1e-4 => Vec::new(),
        other => vec![format!("{other:?}")],
    };
    out.push(check("analytic", "euler_identities", fails, 2));
    let mut fails = Vec::new();
    for i in 0..40 {
        let x = 0.5 * i as f64;
        match bessel_j0(x) {
            Ok(v) if (v - bessel_j0_quadrature(x)).abs() <= 1e-10 => {}
            other => fails.push(format!("x={x}: {other:?}")),
        }
    }
    out.push(check("analytic", "j0_oracle", fails, 40));
    let mut fails = Vec::new();
    match DensityContext::new(Default::default()) {
        Ok(ctx) => {
            let params = BesselSeriesParams::default();
            for xi in [0.5, 1.6, 3.0, 5.3] {
                let direct = ctx.density_averaged(xi).map(|v| v.total);
                let bessel = density_bessel(xi, &params, &ctx).map(|v| v.value);
                match (direct, bessel) {
                    (Ok(a), Ok(b)) if (a - b).abs() <= 1e-3 => {}
                    (a, b) => fails.push(format!("Ξ={xi}: {a:?} vs {b:?}")),
                }
            }
        }
        Err(e) => fails.push(e.to_string()),
    }
    out.push(check("analytic", "bessel_vs_direct", fails, 4));
    out
}

fn empirical() -> Vec<Check> {
    let mut fails = Vec::new();
    let window = DiscriminantWindow::new(4096, 4096).expect("fixed window");
    let total = match FamilyData::compute(window, None).and_then(|f| empirical_sweep(&f, 3, 9216)) {
        Ok(points) => {
            for pt in &points {
                let num = pt.numerator();
                if (pt.g * pt.g_denom - num).abs() > 1e-9 * num.abs().max(1.0) {
                    fails.push(format!("p={}: G·G_denom = {} vs {num}", pt.p, pt.g * pt.g_denom));
                }
            }
            points.len()
        }
        Err(e) => {
            fails.push(e.to_string());
            0
        }
    };
    vec![check("empirical", "decomposition", fails, total)]
}

/// Runs one suite by name, or all of them.
pub fn run(suite: Option<&str>) -> Result<Vec<Check>, String> {
    let names: Vec<&str> = match suite {
        None | Some("all") => SUITES.to_vec(),
        Some(s) if SUITES.contains(&s) => vec![s],
        Some(s) => return Err(format!("unknown suite {s:?}; expected one of {}", SUITES.join(", "))),
    };
    Ok(names
        .into_iter()
        .flat_map(|s| match s {
            "arith" => arith(),
            "localfactors" => localfactors(),
            "quadfield" => quadfield(),
            "density" => density(),
            "analytic" => analytic(),
            _ => empirical(),
        })
        .collect())
}
