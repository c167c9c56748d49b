//! Acceptance report: one PASS/FAIL line per criterion.
//!
//! Failing criteria are reported, not hidden. The process exits non-zero on
//! failure only when MURMUR_ACCEPTANCE_STRICT is set, so the report can run
//! inside `cargo test` while a known-unattainable criterion stays visible.

use std::f64::consts::PI;
use std::sync::OnceLock;
use std::time::Instant;

use murmur_core::analytic::{
    asymptote_report, density_bessel, euler_identities, log_grid, q_d, BesselSeriesParams,
    MurmurationEvaluator, WeightFunction,
};
use murmur_core::arith_core::{
    eta_partial_sum, jacobi, legendre_residue_sum, pairwise_mean, pairwise_sum, primes_in_range, ExactRational,
    Factorization,
};
use murmur_core::density::{
    cbar_window_average, constant_a, eta_y, kappa, linear_grid, vartheta, DensityContext, DensityParams,
};
use murmur_core::empirical::{empirical_point, empirical_sweep, rolling_average, window_width, FamilyData};
use murmur_core::localfactors::{
    c_8n_p_bruteforce, c_8n_p_product, c_p_sign_check, c_y_bruteforce, c_y_identity_check, c_y_product,
    LocalSumSpec, DEFAULT_LOOP_BUDGET,
};
use murmur_core::quadfield::{
    class_number_forms, compute_family, enumerate_family, ClassNumberEngine, DiscriminantWindow,
};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn zeta2() -> f64 {
    PI * PI / 6.0
}

fn ctx() -> &'static DensityContext {
    static CTX: OnceLock<DensityContext> = OnceLock::new();
    CTX.get_or_init(|| DensityContext::new(DensityParams::default()).expect("default density context"))
}

/// The X = Y = 2¹⁶ family shared by the reproduction criteria.
fn desk_family() -> &'static FamilyData {
    static FAM: OnceLock<FamilyData> = OnceLock::new();
    FAM.get_or_init(|| {
        let n = 1 << 16;
        FamilyData::compute(DiscriminantWindow::new(n, n).unwrap(), None).expect("desk-scale family")
    })
}

fn odd_primes(hi: u64) -> Vec<u64> {
    primes_in_range(3, hi).unwrap()
}

fn c1() -> Outcome {
    let mut cases = 0;
    for p in odd_primes(199) {
        for a in 1..p as i64 {
            cases += 1;
            if legendre_residue_sum(p, a) != Ok(-1) {
                return outcome(false, format!("sum ≠ −1 at p={p}, a={a}"));
            }
        }
    }
    outcome(true, format!("{cases} (p, a) pairs, all exactly −1"))
}

fn c2() -> Outcome {
    for p in odd_primes(97) {
        for n in 1..=50 {
            let (b, q) = (c_8n_p_bruteforce(n, p), c_8n_p_product(n, p));
            if b != q {
                return outcome(false, format!("n={n} p={p}: brute {b} vs product {q}"));
            }
        }
    }
    outcome(true, "n ≤ 50, p ≤ 97 exact")
}

fn c3() -> Outcome {
    let mut cases = 0;
    for p in [3u64, 5, 7, 11, 13] {
        for y in (1..=12).filter(|y| y % p != 0) {
            for n in 1..=8 {
                for a in 1..=6 {
                    let Ok(spec) = LocalSumSpec::new(y, n, a, p) else { continue };
                    cases += 1;
                    match c_y_bruteforce(&spec, DEFAULT_LOOP_BUDGET) {
                        Ok(b) if b == c_y_product(&spec) => {}
                        other => return outcome(false, format!("y={y} n={n} a={a} p={p}: {other:?}")),
                    }
                }
            }
        }
    }
    outcome(true, format!("{cases} grid points exact"))
}

fn c4() -> Outcome {
    let mut places = 0;
    for p in odd_primes(17) {
        for y in (1..=100).filter(|y| y % p != 0) {
            match c_y_identity_check(y, p) {
                Ok(r) if r.all_equal() => places += r.places.len(),
                other => return outcome(false, format!("y={y} p={p}: {other:?}")),
            }
        }
        for l in odd_primes(60).into_iter().filter(|&l| l != p && jacobi(p, l) == 1) {
            if c_p_sign_check(p, l) != (true, false) {
                return outcome(false, format!("sign check at p={p}, ℓ={l} does not single out the minus form"));
            }
        }
    }
    outcome(true, format!("{places} place comparisons exact; minus-sign c(p) certified"))
}

fn c5() -> Outcome {
    for y in 1..=1000u64 {
        let k = kappa(y);
        if vartheta(y) * eta_y(y) != k {
            return outcome(false, format!("ϑη ≠ κ at y={y}"));
        }
        let sum = Factorization::of(y)
            .divisors()
            .into_iter()
            .fold(ExactRational::from_integer(0.into()), |acc, d| acc + q_d(d));
        if sum != k {
            return outcome(false, format!("κ ≠ ΣQ(d) at y={y}"));
        }
    }
    outcome(true, "y ≤ 1000 exact")
}

fn c6() -> Outcome {
    let r = euler_identities(10_000).unwrap();
    outcome(
        r.residual_8_11 <= 1e-4 && r.residual_2_3 <= 1e-4,
        format!("|·−8/11| = {:.3e}, |·−2/3| = {:.3e} (tol 1e-4)", r.residual_8_11, r.residual_2_3),
    )
}

fn c7() -> Outcome {
    let a = constant_a(10_000_000).unwrap();
    let target = 8.0 * a / 11.0;
    let cs: Vec<f64> = [1_000u64, 10_000, 100_000]
        .iter()
        .map(|&t| t as f64 * (eta_partial_sum(t) - target).abs())
        .collect();
    let (lo, hi) = cs.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &c| (l.min(c), h.max(c)));
    outcome(hi <= 2.0 * lo, format!("T·|S_T − 8A/11| = {:.4}, {:.4}, {:.4} (spread {:.3}, tol ×2)", cs[0], cs[1], cs[2], hi / lo))
}

fn c8() -> Outcome {
    let window = DiscriminantWindow::new(4, 100_000 - 4).unwrap();
    let ds = enumerate_family(&window).unwrap();
    let engine = ClassNumberEngine::new(window.hi()).unwrap();
    for &d in &ds {
        let (f, e) = (class_number_forms(d).unwrap(), engine.class_number(d).unwrap());
        if f != e {
            return outcome(false, format!("D={d}: forms {f} vs Dirichlet {e}"));
        }
    }
    outcome(true, format!("{} discriminants D ≤ 1e5 agree", ds.len()))
}

fn window_9_10() -> FamilyData {
    FamilyData::compute(DiscriminantWindow::new(1 << 16, 1 << 13).unwrap(), None).unwrap()
}

fn c9() -> Outcome {
    let (x, y) = ((1u64 << 16) as f64, (1u64 << 13) as f64);
    let fam = window_9_10();
    let k = 4.0 * constant_a(1_000_000).unwrap() / (11.0 * PI * zeta2());
    let pred = k * y * x.sqrt();
    let rel = fam.denom() as f64 / pred - 1.0;
    let integrated = k * 2.0 / 3.0 * ((x + y).powf(1.5) - x.powf(1.5));
    outcome(
        rel.abs() <= 0.02,
        format!(
            "G_denom = {}, leading order {pred:.1}, rel dev {:+.3}% (tol 2%); with ∫√D over the window {:+.3}%",
            fam.denom(),
            100.0 * rel,
            100.0 * (fam.denom() as f64 / integrated - 1.0)
        ),
    )
}

fn c10() -> Outcome {
    let fam = window_9_10();
    let x = 1u64 << 16;
    let p = primes_in_range(3 * x / 2, 3 * x / 2 + 1000).unwrap()[0];
    let pt = empirical_point(&fam, p).unwrap();
    let pred = -((1u64 << 13) as f64) * (p as f64).sqrt() / (3.0 * zeta2());
    let rel = pt.g_num_minus / pred - 1.0;
    outcome(rel.abs() <= 0.03, format!("p = {p}: G_num⁻ = {:.1}, predicted {pred:.1}, rel dev {:+.3}% (tol 3%)", pt.g_num_minus, 100.0 * rel))
}

fn c11() -> Outcome {
    let ctx = ctx();
    let candidates: Vec<f64> = linear_grid(0.3, 8.0, 40).into_iter().filter(|&x| !ctx.params.is_excluded(x)).collect();
    let grid: Vec<f64> = (0..20).map(|i| candidates[i * (candidates.len() - 1) / 19]).collect();
    let params = BesselSeriesParams::default();
    let mut worst = (0.0f64, 0.0);
    for &xi in &grid {
        let direct = ctx.density_averaged(xi).unwrap().total;
        let bessel = density_bessel(xi, &params, ctx).unwrap().value;
        let d = (direct - bessel).abs();
        if d > worst.0 {
            worst = (d, xi);
        }
    }
    outcome(worst.0 <= 1e-3, format!("max |direct − Bessel| = {:.3e} at Ξ = {:.3} over 20 points (tol 1e-3)", worst.0, worst.1))
}

fn c12() -> Outcome {
    let avg = cbar_window_average(10_000_000, 1_000_000, 100_000).unwrap();
    let rel = avg / ctx().cbar - 1.0;
    outcome(rel.abs() <= 0.01, format!("mean c(p) = {avg:.10}, c̄ = {:.10}, rel dev {:+.4}% (tol 1%)", ctx().cbar, 100.0 * rel))
}

fn c13() -> Outcome {
    let eval = MurmurationEvaluator::new(ctx());
    let grid = log_grid(100.0, 10_000.0, 25);
    let mut slopes = Vec::new();
    for w in [WeightFunction::indicator(1.0, 2.0).unwrap(), WeightFunction::smooth_bump(1.0, 2.0).unwrap()] {
        match asymptote_report(&eval, &w, &grid) {
            Ok(r) => slopes.push(r.slope),
            Err(e) => return outcome(false, e.to_string()),
        }
    }
    let ok = slopes.iter().all(|s| (-0.6..=-0.4).contains(s));
    outcome(ok, format!("slope of log|M_Φ + 1/2|: indicator {:.3}, bump {:.3} (tol [−0.6, −0.4])", slopes[0], slopes[1]))
}

fn c14() -> Outcome {
    let n = 1u64 << 16;
    let fam = desk_family();
    let ctx = ctx();
    let anchors: Vec<(u64, u64)> = linear_grid(0.3, 2.2, 96)
        .into_iter()
        .filter(|&xi| !ctx.params.is_excluded(xi))
        .map(|xi| {
            let p = (xi * n as f64).ceil() as u64;
            (p, window_width(p, 0.55))
        })
        .collect();
    let hi = anchors.iter().map(|a| a.0 + a.1).max().unwrap();
    let points = empirical_sweep(fam, anchors[0].0, hi).unwrap();
    let avgs: Vec<_> = anchors.iter().map(|&(p, h)| rolling_average(&points, p, h).unwrap()).collect();
    let xis: Vec<f64> = avgs.iter().map(|a| a.xi).collect();
    let m = MurmurationEvaluator::new(ctx).evaluate_grid(&xis, &WeightFunction::indicator(1.0, 2.0).unwrap()).unwrap();
    let sq: Vec<f64> = avgs.iter().zip(&m).map(|(a, v)| (a.g_avg - v.value).powi(2)).collect();
    let rms = (pairwise_sum(&sq) / sq.len() as f64).sqrt();
    outcome(rms <= 0.15, format!("RMS(G_avg − M_Φ) = {rms:.4} over {} Ξ points (tol 0.15)", sq.len()))
}

fn c15() -> Outcome {
    let n = 1u64 << 16;
    let fam = desk_family();
    let ctx = ctx();
    let lo = (1.1 * n as f64).floor() as u64 + 1;
    let hi = (2.1 * n as f64).ceil() as u64 - 1;
    let points = empirical_sweep(fam, lo, hi).unwrap();
    let mean_g = |r: u64| pairwise_mean(&points.iter().filter(|p| p.p % 4 == r).map(|p| p.g).collect::<Vec<_>>()).unwrap();
    let observed = mean_g(3) - mean_g(1);
    let threes: Vec<u64> = points.iter().filter(|p| p.p % 4 == 3).map(|p| p.p).collect();
    let cs = ctx.cp().c_p_many(&threes);
    let terms: Vec<f64> = threes.iter().zip(&cs).map(|(&p, &c)| c * ctx.m_y(p as f64 / n as f64, 2)).collect();
    let predicted = pairwise_mean(&terms).unwrap();
    let rel = observed / predicted - 1.0;
    outcome(
        rel.abs() <= 0.25,
        format!("mean G (3 mod 4) − mean G (1 mod 4) = {observed:.4}, predicted {predicted:.4}, rel dev {:+.2}% (tol 25%)", 100.0 * rel),
    )
}

fn c16() -> Outcome {
    let window = DiscriminantWindow::new(10_000, 10_000).unwrap();
    let recs = compute_family(&window, None).unwrap();
    let t = 100;
    let err = |t: u64| {
        let e: Vec<f64> = recs.iter().map(|r| (r.l1 - murmur_core::quadfield::l1_partial_sum(r.d, t)).abs()).collect();
        pairwise_mean(&e).unwrap()
    };
    let (e1, e4) = (err(t), err(4 * t));
    let ratio = e4 / e1;
    outcome(
        (0.35..=0.70).contains(&ratio),
        format!("mean error {e1:.4e} at T = {t}, {e4:.4e} at 4T, ratio {ratio:.3} (tol [0.35, 0.70])"),
    )
}

type Criterion = (&'static str, f64, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 16] = [
        ("Legendre residue-sum lemma", 1.0, c1),
        ("local-product oracle C_8n,p", 10.0, c2),
        ("general local oracle C_y", 120.0, c3),
        ("c_y identity and c(p) sign", 5.0, c4),
        ("ϑη = κ and κ = ΣQ(d)", 5.0, c5),
        ("Euler identities 8/11 and 2/3", 30.0, c6),
        ("η(2m) lemma rate", 30.0, c7),
        ("class numbers: forms vs Dirichlet", 120.0, c8),
        ("G_denom leading order", 60.0, c9),
        ("G_num⁻ leading order", 60.0, c10),
        ("Poisson/Bessel cross-check", 120.0, c11),
        ("c(p) window average", 60.0, c12),
        ("M_Φ → −1/2 asymptote", 300.0, c13),
        ("desk-scale murmuration reproduction", 600.0, c14),
        ("almost-periodic mod-4 split", 300.0, c15),
        ("truncated-L error scaling", 60.0, c16),
    ];
    let mut failed = Vec::new();
    for (i, (title, budget, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        let secs = start.elapsed().as_secs_f64();
        let verdict = if o.passed { "PASS" } else { "FAIL" };
        let over = if secs > *budget { " OVER BUDGET" } else { "" };
        println!("criterion {:>2} {verdict} {title}: {} [{secs:.1}s, budget {budget}s{over}]", i + 1, o.detail);
        if !o.passed {
            failed.push(i + 1);
        }
    }
    println!("{} of 16 criteria pass; failing: {:?}", 16 - failed.len(), failed);
    if !failed.is_empty() && std::env::var_os("MURMUR_ACCEPTANCE_STRICT").is_some() {
        std::process::exit(1);
    }
}
