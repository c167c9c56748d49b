//! Exact empirical trace averages G(p, X, Y) over the family, via the
//! character-orthogonality reduction: G is a ratio of integer class-number
//! sums, split by the y of the principal norm solution x² + Dy² = 4p.
//!
//! All sums over the family are integer sums, so results do not depend on
//! thread count or scheduling.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::arith_core::{chi_minus_d, pairwise_mean, primes_in_range, ArithError, Factorization};
use crate::quadfield::{
    compute_family, norm_solutions, ClassNumberCache, DiscriminantRecord, DiscriminantWindow,
    QuadError,
};

#[derive(Debug, thiserror::Error)]
pub enum EmpiricalError {
    #[error("p = {0} is not an odd prime")]
    NotOddPrime(u64),
    #[error("G_denom = 0 for the window [{x}, {x}+{y}]")]
    EmptyFamily { x: u64, y: u64 },
    #[error("no primes in [{lo}, {hi}]")]
    EmptyWindow { lo: u64, hi: u64 },
    #[error("family records do not match the window: {0}")]
    Records(String),
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error(transparent)]
    Arith(#[from] ArithError),
}

/// The family of a window with its class numbers.
#[derive(Debug, Clone)]
pub struct FamilyData {
    window: DiscriminantWindow,
    records: Vec<DiscriminantRecord>,
    denom: u64,
}

impl FamilyData {
    /// Checks that `records` are exactly the family members of the window, ascending.
    pub fn new(window: DiscriminantWindow, records: Vec<DiscriminantRecord>) -> Result<Self, EmpiricalError> {
        let expected = crate::quadfield::enumerate_family(&window)?;
        if expected.len() != records.len() || expected.iter().zip(&records).any(|(&d, r)| d != r.d) {
            return Err(EmpiricalError::Records(format!(
                "expected {} discriminants, got {}",
                expected.len(),
                records.len()
            )));
        }
        let denom = records.iter().map(|r| r.h - 1).sum();
        Ok(FamilyData { window, records, denom })
    }

    /// Enumerates the family and its class numbers, using and filling `cache`.
    pub fn compute(window: DiscriminantWindow, cache: Option<&mut ClassNumberCache>) -> Result<Self, EmpiricalError> {
        let records = compute_family(&window, cache)?;
        Self::new(window, records)
    }

    pub fn window(&self) -> DiscriminantWindow {
        self.window
    }

    pub fn records(&self) -> &[DiscriminantRecord] {
        &self.records
    }

    /// Σ_{D ∈ 𝒟} (h(−D) − 1).
    pub fn denom(&self) -> u64 {
        self.denom
    }

    pub fn class_number(&self, d: u64) -> Option<u64> {
        self.records.binary_search_by_key(&d, |r| r.d).ok().map(|i| self.records[i].h)
    }
}

/// G(p, X, Y) with its decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalPoint {
    pub p: u64,
    pub x: u64,
    pub xi: f64,
    pub g: f64,
    /// 2√p · Σ h(−D) over D ∈ 𝒟_p whose norm solution has this y.
    pub g_num_plus_by_y: BTreeMap<u64, f64>,
    pub g_num_minus: f64,
    pub g_denom: f64,
    pub ramified_term: f64,
    /// |𝒟|.
    pub family_size: usize,
    /// |𝒟_p|.
    pub split_count: usize,
}

impl EmpiricalPoint {
    pub fn numerator(&self) -> f64 {
        self.g_num_plus_by_y.values().sum::<f64>() + self.g_num_minus + self.ramified_term
    }
}

fn is_odd_prime(p: u64) -> bool {
    p > 2 && Factorization::of(p).factors() == [(p, 1)]
}

/// One empirical point. The ramified discriminant D = p, when present,
/// contributes √p·(h(−p) − 1) exactly.
pub fn empirical_point(family: &FamilyData, p: u64) -> Result<EmpiricalPoint, EmpiricalError> {
    if !is_odd_prime(p) {
        return Err(EmpiricalError::NotOddPrime(p));
    }
    let w = family.window;
    if family.denom == 0 {
        return Err(EmpiricalError::EmptyFamily { x: w.x, y: w.y });
    }
    let mut split = 0usize;
    let mut h_by_y: BTreeMap<u64, u64> = BTreeMap::new();
    for r in &family.records {
        if r.d % p == 0 || chi_minus_d(r.d, p) != 1 {
            continue;
        }
        split += 1;
        let sols = norm_solutions(r.d, p);
        if sols.len() > 1 {
            return Err(QuadError::InvariantViolation { d: r.d, p, count: sols.len() }.into());
        }
        if let Some(s) = sols.first() {
            *h_by_y.entry(s.y).or_insert(0) += r.h;
        }
    }
    let root = (p as f64).sqrt();
    let ramified_term = match family.class_number(p) {
        Some(h) if p % 4 == 3 => root * (h as f64 - 1.0),
        _ => 0.0,
    };
    let g_num_plus_by_y: BTreeMap<u64, f64> =
        h_by_y.into_iter().map(|(y, h)| (y, 2.0 * root * h as f64)).collect();
    let g_num_minus = -2.0 * root * split as f64;
    let g_denom = family.denom as f64;
    let mut point = EmpiricalPoint {
        p,
        x: w.x,
        xi: p as f64 / w.x as f64,
        g: 0.0,
        g_num_plus_by_y,
        g_num_minus,
        g_denom,
        ramified_term,
        family_size: family.records.len(),
        split_count: split,
    };
    point.g = point.numerator() / g_denom;
    Ok(point)
}

/// One point per odd prime in [p_lo, p_hi], ascending.
pub fn empirical_sweep(family: &FamilyData, p_lo: u64, p_hi: u64) -> Result<Vec<EmpiricalPoint>, EmpiricalError> {
    if p_hi < p_lo.max(3) {
        return Ok(Vec::new());
    }
    let primes = primes_in_range(p_lo.max(3), p_hi)?;
    primes.par_iter().map(|&p| empirical_point(family, p)).collect()
}

/// Mean of G over primes in [P, P+H].
#[derive(Debug, Clone, PartialEq)]
pub struct PrimeWindowAverage {
    pub anchor: u64,
    pub h: u64,
    pub xi: f64,
    pub primes_used: usize,
    pub g_avg: f64,
}

/// Average of the points with p ∈ [P, P+H]; `points` must be sorted by p.
pub fn rolling_average(points: &[EmpiricalPoint], anchor: u64, h: u64) -> Result<PrimeWindowAverage, EmpiricalError> {
    let hi = anchor.saturating_add(h);
    let start = points.partition_point(|pt| pt.p < anchor);
    let end = points.partition_point(|pt| pt.p <= hi);
    let gs: Vec<f64> = points[start..end.max(start)].iter().map(|pt| pt.g).collect();
    let g_avg = pairwise_mean(&gs).ok_or(EmpiricalError::EmptyWindow { lo: anchor, hi })?;
    let x = points[start].x;
    Ok(PrimeWindowAverage { anchor, h, xi: anchor as f64 / x as f64, primes_used: gs.len(), g_avg })
}

/// Window width H = ⌊P^γ⌋.
pub fn window_width(anchor: u64, exponent: f64) -> u64 {
    (anchor as f64).powf(exponent).floor() as u64
}

/// Prime counts per residue class against the logarithmic-integral expectation.
#[derive(Debug, Clone, PartialEq)]
pub struct EquidistributionReport {
    pub lo: u64,
    pub hi: u64,
    pub modulus: u64,
    pub counts: BTreeMap<u64, u64>,
    pub expected: f64,
    pub max_rel_deviation: f64,
}

/// li(x) = ∫₀^x dt/ln t by Ramanujan's series, for x > 1.
pub fn li(x: f64) -> f64 {
    const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
    let l = x.ln();
    let mut sum = 0.0;
    let mut term = 1.0;
    let mut inner = 0.0;
    for n in 1..400 {
        term *= l / n as f64;
        if (n - 1) % 2 == 0 {
            inner += 1.0 / (n as f64);
        }
        let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
        let t = sign * term / 2f64.powi(n - 1) * inner;
        sum += t;
        if t.abs() < 1e-17 * sum.abs() && n > 2 * l as i32 {
            break;
        }
    }
    EULER_GAMMA + l.ln() + x.sqrt() * sum
}

fn euler_phi(q: u64) -> u64 {
    Factorization::of(q).factors().iter().fold(q, |acc, &(p, _)| acc / p * (p - 1))
}

/// Primes in [X, X+H] per class a mod q with gcd(a, q) = 1.
pub fn equidistribution_check(x: u64, h: u64, q: u64) -> Result<EquidistributionReport, EmpiricalError> {
    if q < 2 || h < 10 * q {
        return Err(EmpiricalError::Invalid(format!("need q ≥ 2 and H ≥ 10q, got q = {q}, H = {h}")));
    }
    let lo = x.max(2);
    let hi = x + h;
    let mut counts: BTreeMap<u64, u64> =
        (0..q).filter(|&a| num_integer::gcd(a, q) == 1).map(|a| (a, 0)).collect();
    for p in primes_in_range(lo, hi)? {
        if let Some(c) = counts.get_mut(&(p % q)) {
            *c += 1;
        }
    }
    let expected = (li(hi as f64) - li(lo as f64)) / euler_phi(q) as f64;
    let max_rel_deviation = counts
        .values()
        .map(|&c| (c as f64 - expected).abs() / expected)
        .fold(0.0, f64::max);
    Ok(EquidistributionReport { lo, hi, modulus: q, counts, expected, max_rel_deviation })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn family(x: u64, y: u64) -> FamilyData {
        FamilyData::compute(DiscriminantWindow::new(x, y).unwrap(), None).unwrap()
    }

    /// Reference G with no shared machinery: trial-division family test,
    /// class numbers by counting reduced forms, Euler's criterion, and a
    /// double loop over (x, y).
    fn naive_g(x: u64, y: u64, p: u64) -> Option<(f64, u64, BTreeMap<u64, u64>, u64)> {
        let squarefree = |d: u64| (2..).take_while(|q| q * q <= d).all(|q| d % (q * q) != 0);
        let h = |d: u64| {
            let mut count = 0u64;
            let mut a = 1;
            while 3 * a * a <= d {
                for b in -(a as i64)..=(a as i64) {
                    let num = b * b + d as i64;
                    if num % (4 * a as i64) != 0 {
                        continue;
                    }
                    let c = num / (4 * a as i64);
                    if c < a as i64 || ((b.unsigned_abs() == a || c == a as i64) && b < 0) {
                        continue;
                    }
                    count += 1;
                }
                a += 1;
            }
            count
        };
        let pow_mod = |mut b: u64, mut e: u64, m: u64| {
            let mut r = 1u64;
            b %= m;
            while e > 0 {
                if e & 1 == 1 {
                    r = r * b % m;
                }
                b = b * b % m;
                e >>= 1;
            }
            r
        };
        let mut denom = 0u64;
        let mut split = 0u64;
        let mut by_y: BTreeMap<u64, u64> = BTreeMap::new();
        let mut ramified = 0.0;
        for d in x..=x + y {
            if d <= 3 || d % 4 != 3 || !squarefree(d) {
                continue;
            }
            let hd = h(d);
            denom += hd - 1;
            if d == p {
                ramified = (p as f64).sqrt() * (hd as f64 - 1.0);
                continue;
            }
            let neg = (p - d % p) % p;
            if neg == 0 || pow_mod(neg, (p - 1) / 2, p) != 1 {
                continue;
            }
            split += 1;
            for yy in 1..=2 * p {
                for xx in 1..=2 * p {
                    if xx * xx + d * yy * yy == 4 * p {
                        *by_y.entry(yy).or_insert(0) += hd;
                    }
                }
            }
        }
        if denom == 0 {
            return None;
        }
        let root = (p as f64).sqrt();
        let num = by_y.values().map(|&s| 2.0 * root * s as f64).sum::<f64>() - 2.0 * root * split as f64 + ramified;
        Some((num / denom as f64, split, by_y, denom))
    }

    #[test]
    fn spec_examples() {
        let f = FamilyData::compute(DiscriminantWindow::new(4, 10).unwrap(), None).unwrap();
        assert!(matches!(empirical_point(&f, 23), Err(EmpiricalError::EmptyFamily { .. })));
        let f = family(20, 10);
        let pt = empirical_point(&f, 3).unwrap();
        assert!((pt.g + 3f64.sqrt()).abs() < 1e-15);
        assert_eq!((pt.family_size, pt.split_count), (1, 1));
        assert!(matches!(empirical_point(&f, 2), Err(EmpiricalError::NotOddPrime(2))));
        assert!(matches!(empirical_point(&f, 9), Err(EmpiricalError::NotOddPrime(9))));
        // (−23/5) = (2/5) = −1: 5 is inert in the only field.
        assert_eq!(empirical_point(&f, 5).unwrap().g, 0.0);
    }

    #[test]
    fn matches_naive_reference() {
        for (x, y) in [(20u64, 10u64), (100, 100), (250, 250), (400, 100), (500, 37)] {
            let f = family(x, y);
            for p in primes_in_range(3, 200).unwrap() {
                let got = empirical_point(&f, p);
                match naive_g(x, y, p) {
                    None => assert!(got.is_err()),
                    Some((g, split, by_y, denom)) => {
                        let pt = got.unwrap();
                        assert_eq!(pt.g, g, "X={x} Y={y} p={p}");
                        assert_eq!(pt.split_count as u64, split);
                        assert_eq!(pt.g_denom, denom as f64);
                        let root = (p as f64).sqrt();
                        let want: BTreeMap<u64, f64> = by_y.iter().map(|(&k, &s)| (k, 2.0 * root * s as f64)).collect();
                        assert_eq!(pt.g_num_plus_by_y, want);
                    }
                }
            }
        }
    }

    #[test]
    fn decomposition_and_support() {
        let f = family(4096, 4096);
        let pts = empirical_sweep(&f, 3, 12_000).unwrap();
        assert!(pts.windows(2).all(|w| w[0].p < w[1].p));
        for pt in &pts {
            let lhs = pt.g * pt.g_denom;
            assert!((lhs - pt.numerator()).abs() <= 1e-9 * pt.numerator().abs().max(1.0));
            for (&y, &v) in &pt.g_num_plus_by_y {
                assert!(v != 0.0 && (y as f64) < 2.0 * (pt.p as f64 / f.window().x as f64).sqrt() + 1e-12);
            }
            assert!(pt.split_count <= pt.family_size);
        }
        assert!(empirical_sweep(&f, 24, 28).unwrap().is_empty());
    }

    #[test]
    fn residue_split_in_middle_range() {
        let x = 1 << 13;
        let f = family(x, x);
        let pts = empirical_sweep(&f, x + x / 10, 2 * x - x / 10).unwrap();
        let mean = |r: u64| {
            let gs: Vec<f64> = pts.iter().filter(|pt| pt.p % 4 == r).map(|pt| pt.g).collect();
            pairwise_mean(&gs).unwrap()
        };
        assert!(mean(1) < mean(3));
    }

    #[test]
    fn rolling_average_examples() {
        let f = family(2048, 2048);
        let pts = empirical_sweep(&f, 3000, 3100).unwrap();
        let single = rolling_average(&pts, pts[0].p, 0).unwrap();
        assert_eq!((single.g_avg, single.primes_used), (pts[0].g, 1));
        let two = rolling_average(&pts, pts[0].p, pts[1].p - pts[0].p).unwrap();
        assert_eq!(two.g_avg, (pts[0].g + pts[1].g) / 2.0);
        assert!(rolling_average(&pts, 3090, 2).is_err());
        assert_eq!(window_width(10_000, 0.5), 100);
    }

    #[test]
    fn li_values() {
        assert!((li(2.0) - 1.045_163_780_117_493).abs() < 1e-12);
        assert!((li(1e6) - 78_627.549_159_462_18).abs() < 1e-7);
    }

    #[test]
    fn equidistribution_examples() {
        let r4 = equidistribution_check(1_000_000, 100_000, 4).unwrap();
        assert_eq!(r4.counts.len(), 2);
        assert!(r4.max_rel_deviation < 0.05, "{r4:?}");
        let total: u64 = r4.counts.values().sum();
        assert_eq!(total as usize, primes_in_range(1_000_000, 1_100_000).unwrap().len());
        let r2 = equidistribution_check(1_000_000, 100_000, 2).unwrap();
        assert_eq!(r2.counts.len(), 1);
        let r8 = equidistribution_check(1_000_000, 100_000, 8).unwrap();
        assert_eq!(r8.counts.len(), 4);
        assert!(r8.max_rel_deviation < 0.05, "{r8:?}");
        assert!(equidistribution_check(10, 5, 4).is_err());
    }
}
