//! Local character sums behind the y-terms of the numerator: C_{8n,p},
//! R_{a,p}, the general sums C^{(y)}, the σ local-factor tables, c(p), and
//! the per-place identity c_y(p) = ϑ(y)/y² · δ_y(p) · c(p).
//!
//! Every closed form here has a brute-force counterpart. Closed forms are
//! evaluated in exact rational arithmetic; floating point only enters when
//! the infinite product for c(p) is truncated.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::arith_core::{
    jacobi, kronecker, ratio, sieve_primes, ExactRational, Factorization, PrimeTable,
};
use crate::density::{delta_y, vartheta};

/// Loop budget for brute-force sums.
pub const DEFAULT_LOOP_BUDGET: u64 = 100_000_000;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum LocalError {
    #[error("invalid local sum spec: {0}")]
    Spec(String),
    #[error("brute-force modulus {modulus} exceeds the loop budget {budget}")]
    Budget { modulus: u64, budget: u64 },
    #[error("σ kind {kind:?} at place {place} cannot take valuations {valuations:?}")]
    Valuations { kind: SigmaKind, place: u64, valuations: Valuations },
}

fn is_odd_prime(p: u64) -> bool {
    p > 2 && Factorization::of(p).factors() == [(p, 1)]
}

/// Σ_{0 ≤ x < 8n, x odd} ((x² − 4p)/n).
pub fn c_8n_p_bruteforce(n: u64, p: u64) -> i64 {
    let (n, four_p) = (n as i64, 4 * p as i64);
    (0..8 * n)
        .filter(|x| x & 1 == 1)
        .map(|x| i64::from(kronecker(x * x - four_p, n)))
        .sum()
}

/// C_{8n,p} from its local product.
pub fn c_8n_p_product(n: u64, p: u64) -> i64 {
    let f = Factorization::of(n);
    let mut c: i64 = 1;
    for &(q, e) in f.factors() {
        let (qi, e) = (q as i64, e);
        c *= if q == 2 {
            4 * (-2i64).pow(e)
        } else if q == p {
            (qi - 1) * qi.pow(e - 1)
        } else if e % 2 == 0 {
            qi.pow(e - 1) * (qi - 1 - i64::from(kronecker(p as i64, qi)))
        } else {
            -qi.pow(e - 1)
        };
    }
    if f.valuation(2) == 0 {
        c *= 4;
    }
    c
}

/// R_{a,p}: 2^k if every prime of a is a quadratic residue class for p
/// (and none equals p), else 0.
pub fn r_a_p(a: u64, p: u64) -> Result<u64, LocalError> {
    if a % 2 == 0 {
        return Err(LocalError::Spec(format!("R_(a,p) needs odd a, got {a}")));
    }
    let f = Factorization::of(a);
    let mut r = 1;
    for &(q, _) in f.factors() {
        if q == p || kronecker(p as i64, q as i64) != 1 {
            return Ok(0);
        }
        r *= 2;
    }
    Ok(r)
}

/// #{x mod a² : x² ≡ 4p (mod a²)}.
pub fn r_a_p_count(a: u64, p: u64) -> u64 {
    let m = a * a;
    let target = (4 * p) % m;
    (0..m).filter(|&x| x * x % m == target).count() as u64
}

/// Parameters (y, n, a, p) of a general local sum; p ∤ y is required.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LocalSumSpec {
    pub y: u64,
    pub n: u64,
    pub a: u64,
    pub p: u64,
}

impl LocalSumSpec {
    pub fn new(y: u64, n: u64, a: u64, p: u64) -> Result<Self, LocalError> {
        if y == 0 || n == 0 || a == 0 {
            return Err(LocalError::Spec("y, n, a must be positive".into()));
        }
        if !is_odd_prime(p) {
            return Err(LocalError::Spec(format!("{p} is not an odd prime")));
        }
        if y % p == 0 {
            return Err(LocalError::Spec(format!("p = {p} divides y = {y}")));
        }
        Ok(LocalSumSpec { y, n, a, p })
    }

    /// a_y = gcd(y^∞, a).
    pub fn a_y(&self) -> u64 {
        let fy = Factorization::of(self.y);
        fy.factors()
            .iter()
            .map(|&(q, _)| q.pow(Factorization::of(self.a).valuation(q)))
            .product()
    }
}

/// Direct evaluation of C^{(y)}_{8y²na²,p,a}.
pub fn c_y_bruteforce(spec: &LocalSumSpec, budget: u64) -> Result<i64, LocalError> {
    let LocalSumSpec { y, n, a, p } = *spec;
    let modulus = 8 * y * y * n * a * a;
    if modulus > budget {
        return Err(LocalError::Budget { modulus, budget });
    }
    let (y2, a2, n) = ((y * y) as i64, (a * a) as i64, n as i64);
    let four_p = 4 * p as i64;
    let mut total = 0i64;
    for x in 0..modulus as i64 {
        let v = four_p - x * x;
        if v.rem_euclid(y2) != 0 {
            continue;
        }
        let w = v / y2;
        if w.rem_euclid(4) != 3 || w.rem_euclid(a2) != 0 {
            continue;
        }
        total += i64::from(kronecker(-w, n));
    }
    Ok(total)
}

/// Which local factor a σ-value belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SigmaKind {
    /// The place 2.
    Sigma2,
    /// The place p itself (ν = μ = 0).
    SigmaP,
    /// Odd places dividing y.
    SigmaI,
    /// Odd places not dividing y (ν = μ = 0).
    SigmaII,
}

/// Valuations of y, a_y and n at the place.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Valuations {
    pub nu: u32,
    pub mu: u32,
    pub e: u32,
}

/// One entry of the σ tables.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalFactorTable {
    pub place: u64,
    pub valuations: Valuations,
    pub value: ExactRational,
    pub kind: SigmaKind,
}

/// The table value σ_kind(place, ν, μ, e) for the prime p.
pub fn sigma_local(
    kind: SigmaKind,
    place: u64,
    v: Valuations,
    p: u64,
) -> Result<LocalFactorTable, LocalError> {
    let bad = || LocalError::Valuations { kind, place, valuations: v };
    let value: i64 = match kind {
        SigmaKind::Sigma2 => {
            if place != 2 {
                return Err(bad());
            }
            sigma2(v, p)
        }
        SigmaKind::SigmaP => {
            if place != p || v.nu != 0 || v.mu != 0 {
                return Err(bad());
            }
            if v.e == 0 {
                1
            } else {
                (p as i64 - 1) * (p as i64).pow(v.e - 1)
            }
        }
        SigmaKind::SigmaI => {
            if place == 2 || place == p || v.nu == 0 {
                return Err(bad());
            }
            let q = place as i64;
            if kronecker(p as i64, q) != 1 {
                0
            } else if v.e == 0 {
                2
            } else if v.e % 2 == 0 && v.mu == 0 {
                2 * (q - 1) * q.pow(v.e - 1)
            } else {
                0
            }
        }
        SigmaKind::SigmaII => {
            if place == 2 || place == p || v.nu != 0 || v.mu != 0 {
                return Err(bad());
            }
            let q = place as i64;
            if v.e == 0 {
                1
            } else if v.e % 2 == 0 {
                q.pow(v.e - 1) * (q - 1 - i64::from(kronecker(p as i64, q)))
            } else {
                -q.pow(v.e - 1)
            }
        }
    };
    Ok(LocalFactorTable { place, valuations: v, value: ratio(value, 1), kind })
}

/// σ(2, ν, μ, e). For μ > 0 the quotient (4p − x²)/y² is even, so the
/// condition ≡ 3 (mod 4) fails and the factor vanishes.
fn sigma2(v: Valuations, p: u64) -> i64 {
    let Valuations { nu, mu, e } = v;
    if mu > 0 {
        return 0;
    }
    let even = e % 2 == 0;
    match nu {
        0 if e == 0 => 4,
        0 => 4 * (-2i64).pow(e),
        1 if even && p % 4 == 3 => 1 << (e + 3),
        2 if even && p % 8 == 5 => 1 << (e + 4),
        n if n >= 3 && even && p % 8 == 1 => 1 << (e + 4),
        _ => 0,
    }
}

fn sigma_value(kind: SigmaKind, place: u64, v: Valuations, p: u64) -> i64 {
    let t = sigma_local(kind, place, v, p).expect("valuations consistent by construction");
    i64::try_from(t.value.to_integer()).expect("σ values fit in i64")
}

/// C^{(y)}_{8y²na²,p,a} from the local product and R_{a',p}.
pub fn c_y_product(spec: &LocalSumSpec) -> i64 {
    let LocalSumSpec { y, n, a, p } = *spec;
    if n.gcd(&a) > 1 {
        return 0;
    }
    let a_y = spec.a_y();
    let a_rest = a / a_y;
    if a_rest % 2 == 0 {
        return 0;
    }
    let r = r_a_p(a_rest, p).expect("odd a'") as i64;
    if r == 0 {
        return 0;
    }
    let (fy, fa, fn_) = (Factorization::of(y), Factorization::of(a_y), Factorization::of(n));
    let mut c = sigma_value(
        SigmaKind::Sigma2,
        2,
        Valuations { nu: fy.valuation(2), mu: fa.valuation(2), e: fn_.valuation(2) },
        p,
    );
    c *= sigma_value(SigmaKind::SigmaP, p, Valuations { nu: 0, mu: 0, e: fn_.valuation(p) }, p);
    for q in fy.odd_primes() {
        let v = Valuations { nu: fy.valuation(q), mu: fa.valuation(q), e: fn_.valuation(q) };
        c *= sigma_value(SigmaKind::SigmaI, q, v, p);
    }
    for &(q, e) in fn_.factors() {
        if q != 2 && q != p && y % q != 0 {
            c *= sigma_value(SigmaKind::SigmaII, q, Valuations { nu: 0, mu: 0, e }, p);
        }
    }
    c * r
}

/// Local factor 1 − 2ℓ⁻² − 2ℓ⁻³/(1 − ℓ⁻²) of c(p) at an odd prime ℓ with (p/ℓ) = 1.
pub fn c_factor(l: u64) -> ExactRational {
    let l = l as i64;
    ratio(1, 1) - ratio(2, l * l) - ratio(2, l * l * l) / (ratio(1, 1) - ratio(1, l * l))
}

fn c_factor_f64(l: u64) -> f64 {
    let x = 1.0 / l as f64;
    1.0 - 2.0 * x * x - 2.0 * x * x * x / (1.0 - x * x)
}

/// c(p) truncated to odd ℓ ≤ M, exactly.
pub fn c_p_exact(p: u64, m: u64) -> ExactRational {
    let table = sieve_primes(m.max(2)).expect("sieve within budget");
    let mut c = ratio(p as i64 + 1, 3 * p as i64);
    for &l in &table.primes()[1..] {
        if kronecker(p as i64, l as i64) == 1 {
            c *= c_factor(l);
        }
    }
    c
}

/// c(p) = (p+1)/(3p) · Π_{2<ℓ≤M, (p/ℓ)=1} (1 − 2ℓ⁻² − 2ℓ⁻³/(1 − ℓ⁻²)).
/// Relative truncation error is at most Σ_{ℓ>M} 2ℓ⁻² ≤ 2/M.
pub fn c_p(p: u64, m: u64) -> f64 {
    CpEvaluator::new(m).c_p(p)
}

/// Reusable c(p) evaluator holding the primes up to the cutoff and the
/// logarithms of their local factors.
#[derive(Debug, Clone)]
pub struct CpEvaluator {
    cutoff: u64,
    primes: Vec<u64>,
    log_factors: Vec<f64>,
}

impl CpEvaluator {
    pub fn new(cutoff: u64) -> Self {
        let table = sieve_primes(cutoff.max(2)).expect("sieve within budget");
        let primes: Vec<u64> = table.primes().iter().copied().filter(|&l| l > 2).collect();
        let log_factors = primes.iter().map(|&l| c_factor_f64(l).ln()).collect();
        CpEvaluator { cutoff, primes, log_factors }
    }

    pub fn cutoff(&self) -> u64 {
        self.cutoff
    }

    /// log c(p) − log((p+1)/(3p)), accumulated in ascending ℓ.
    fn log_product(&self, p: u64) -> f64 {
        let mut acc = 0.0;
        for (&l, &lf) in self.primes.iter().zip(&self.log_factors) {
            if jacobi(p % l, l) == 1 {
                acc += lf;
            }
        }
        acc
    }

    /// The Euler product part of c(p), which depends only on p modulo Π_{2<ℓ≤M} ℓ.
    pub fn euler_part(&self, p: u64) -> f64 {
        self.log_product(p).exp()
    }

    pub fn c_p(&self, p: u64) -> f64 {
        (p as f64 + 1.0) / (3.0 * p as f64) * self.euler_part(p)
    }

    /// c(p) for many odd primes at once. Loops over ℓ outermost with a
    /// residue table per ℓ; each accumulator still adds its factors in
    /// ascending ℓ, so every value equals [`CpEvaluator::c_p`] bit for bit.
    pub fn c_p_many(&self, ps: &[u64]) -> Vec<f64> {
        use rayon::prelude::*;
        let mut acc = vec![0.0f64; ps.len()];
        let mut squares = Vec::new();
        for (&l, &lf) in self.primes.iter().zip(&self.log_factors) {
            squares.clear();
            squares.resize(l as usize, false);
            let mut sq = 0u64;
            for x in 1..=(l / 2) {
                sq = (sq + 2 * x - 1) % l;
                squares[sq as usize] = true;
            }
            let table = &squares;
            acc.par_chunks_mut(4096).zip(ps.par_chunks(4096)).for_each(|(a, p)| {
                for (ai, &pi) in a.iter_mut().zip(p) {
                    if table[(pi % l) as usize] {
                        *ai += lf;
                    }
                }
            });
        }
        ps.iter()
            .zip(acc)
            .map(|(&p, a)| (p as f64 + 1.0) / (3.0 * p as f64) * a.exp())
            .collect()
    }
}

/// Σ_{n ≤ N₀} Σ_{a ≤ A₀} μ(a)/(8n²a²) · C_{8na²,p,a}.
pub fn c_p_double_sum(p: u64, n0: u64, a0: u64) -> f64 {
    let table: PrimeTable = sieve_primes(n0.max(a0).max(2)).expect("sieve within budget");
    let mobius = |a: u64| if a == 1 { 1 } else { table.factorize(a).mobius() };
    let r: Vec<(u64, f64)> = (1..=a0)
        .filter(|&a| a % 2 == 1 && mobius(a) != 0)
        .filter_map(|a| {
            let ra = r_a_p(a, p).expect("odd a");
            (ra != 0).then(|| (a, f64::from(mobius(a)) * ra as f64 / (a * a) as f64))
        })
        .collect();
    let mut terms = Vec::new();
    for n in 1..=n0 {
        let c = c_8n_p_product(n, p);
        if c == 0 {
            continue;
        }
        let inner: f64 = r.iter().filter(|(a, _)| n.gcd(a) == 1).map(|(_, w)| w).sum();
        terms.push(c as f64 / (8.0 * (n * n) as f64) * inner);
    }
    crate::arith_core::pairwise_sum(&terms)
}

/// Σ_{f ≥ 0} σ(f)·q^{−2f} in closed form, given that σ(f)·q^{−f} depends only
/// on the parity of f for f ≥ 1 (checked on f ≤ 8).
fn local_series(q: u64, sigma: impl Fn(u32) -> i64) -> Option<ExactRational> {
    let qi = q as i64;
    let scaled = |f: u32| ratio(sigma(f), qi.pow(f));
    let (odd, even) = (scaled(1), scaled(2));
    for f in 3..=8 {
        if scaled(f) != if f % 2 == 1 { odd.clone() } else { even.clone() } {
            return None;
        }
    }
    let denom = qi * qi - 1;
    Some(ratio(sigma(0), 1) + odd * ratio(qi, denom) + even * ratio(1, denom))
}

/// Factor at the place q of the double sum defining c_y(p), built from the σ
/// tables: the n-series plus the term with q ∥ a when q is odd.
pub fn local_factor_from_sigma(q: u64, nu: u32, p: u64) -> Option<ExactRational> {
    let qi = q as i64;
    if q == 2 {
        let s = local_series(2, |e| sigma2(Valuations { nu, mu: 0, e }, p))?;
        return Some(s * ratio(1, 8 * 4i64.pow(nu)));
    }
    if q == p {
        let s = local_series(q, |e| sigma_value(SigmaKind::SigmaP, q, Valuations { nu: 0, mu: 0, e }, p))?;
        // R_{p^e,p} = 0, so no a-term.
        return Some(s);
    }
    let (series, a_term) = if nu == 0 {
        let s = local_series(q, |e| sigma_value(SigmaKind::SigmaII, q, Valuations { nu: 0, mu: 0, e }, p))?;
        (s, r_a_p(q, p).expect("odd q") as i64)
    } else {
        let s = local_series(q, |e| sigma_value(SigmaKind::SigmaI, q, Valuations { nu, mu: 0, e }, p))?;
        (s, sigma_value(SigmaKind::SigmaI, q, Valuations { nu, mu: 1, e: 0 }, p))
    };
    Some((series - ratio(a_term, qi * qi)) * ratio(1, qi.pow(2 * nu)))
}

/// One place of the c_y(p) identity.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaceComparison {
    pub place: u64,
    pub nu: u32,
    /// c_y/c_1 local ratio computed from the σ tables.
    pub from_sigma: ExactRational,
    /// The same ratio from the closed forms 2(q³+q²−1)/(q²(q+1)) over
    /// (q⁴−3q²−2q+2)/(q²(q²−1)) at odd q, and 1/3 or 1/(3·2^{2ν−3}) over 1/3 at 2.
    pub closed_form: ExactRational,
    /// ϑ(q^ν)/q^{2ν} · δ_{q^ν}(p).
    pub vartheta_side: ExactRational,
    pub equal: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CyIdentityReport {
    pub y: u64,
    pub p: u64,
    pub places: Vec<PlaceComparison>,
}

impl CyIdentityReport {
    pub fn all_equal(&self) -> bool {
        self.places.iter().all(|c| c.equal)
    }
}

fn closed_form_ratio(q: u64, nu: u32, p: u64) -> ExactRational {
    let qi = q as i64;
    if q == 2 {
        let at_y = match nu {
            0 | 1 => ratio(1, 3),
            _ => ratio(1, 3 * 2i64.pow(2 * nu - 3)),
        };
        let delta = i64::from(delta_y(1 << nu, p).expect("p odd"));
        return at_y * ratio(3, 1) * ratio(delta, 1);
    }
    if kronecker(p as i64, qi) != 1 {
        return ExactRational::zero();
    }
    let num = ratio(2 * (qi.pow(3) + qi * qi - 1), qi * qi * (qi + 1)) * ratio(1, qi.pow(2 * nu));
    let den = ratio(qi.pow(4) - 3 * qi * qi - 2 * qi + 2, qi * qi * (qi * qi - 1));
    num / den
}

/// Per-place comparison of c_y(p)/c(p) against ϑ(y)/y² · δ_y(p).
pub fn c_y_identity_check(y: u64, p: u64) -> Result<CyIdentityReport, LocalError> {
    LocalSumSpec::new(y, 1, 1, p)?;
    let fy = Factorization::of(y);
    let mut places = Vec::new();
    for &(q, nu) in fy.factors() {
        let one = local_factor_from_sigma(q, 0, p);
        let at_y = local_factor_from_sigma(q, nu, p);
        let from_sigma = match (one, at_y) {
            (Some(o), Some(v)) if !o.is_zero() => v / o,
            _ => {
                return Err(LocalError::Spec(format!(
                    "σ series at {q} (ν = {nu}) is not of geometric shape"
                )))
            }
        };
        let qn = q.pow(nu);
        let delta = i64::from(delta_y(qn, p).expect("p ∤ y"));
        let vartheta_side = vartheta(qn) * ratio(delta, 1) / ExactRational::from(BigInt::from(qn * qn));
        let closed_form = closed_form_ratio(q, nu, p);
        let equal = from_sigma == vartheta_side && closed_form == vartheta_side;
        places.push(PlaceComparison { place: q, nu, from_sigma, closed_form, vartheta_side, equal });
    }
    Ok(CyIdentityReport { y, p, places })
}

/// Check of the c(p) local factor at an odd ℓ ≠ p with (p/ℓ) = 1: the
/// σ-table factor against 1 − 2ℓ⁻² ∓ 2ℓ⁻³/(1 − ℓ⁻²). Returns (minus matches,
/// plus matches).
pub fn c_p_sign_check(p: u64, l: u64) -> (bool, bool) {
    let from_sigma = local_factor_from_sigma(l, 0, p).expect("geometric σ series");
    let li = l as i64;
    let base = ratio(1, 1) - ratio(2, li * li);
    let tail = ratio(2, li.pow(3)) / (ratio(1, 1) - ratio(1, li * li));
    (from_sigma == base.clone() - tail.clone(), from_sigma == base + tail)
}

/// The full c(p) prefactor (p+1)/(3p) from the σ tables at 2 and at p.
pub fn c_p_prefactor_from_sigma(p: u64) -> ExactRational {
    let two = local_factor_from_sigma(2, 0, p).expect("geometric σ series");
    let at_p = local_factor_from_sigma(p, 0, p).expect("geometric σ series");
    two * at_p
}

/// Whether ExactRational r equals one.
pub fn is_one(r: &ExactRational) -> bool {
    r.is_one()
}

#[cfg(test)]
mod tests {
    use super::*;

    const PS: [u64; 5] = [3, 5, 7, 11, 13];

    #[test]
    fn c8n_examples() {
        assert_eq!(c_8n_p_bruteforce(1, 5), 4);
        assert_eq!(c_8n_p_bruteforce(3, 7), -4);
        assert_eq!(c_8n_p_bruteforce(2, 5), -8);
        assert_eq!(c_8n_p_product(3, 7), -4);
        assert_eq!(c_8n_p_product(9, 7), 12);
        assert_eq!(c_8n_p_bruteforce(9, 7), 12);
        for p in [3u64, 5, 7, 11] {
            assert_eq!(c_8n_p_product(p, p), 4 * (p as i64 - 1));
        }
    }

    #[test]
    fn c8n_product_matches_bruteforce() {
        let table = sieve_primes(97).unwrap();
        for &p in &table.primes()[1..] {
            for n in 1..=50 {
                assert_eq!(c_8n_p_bruteforce(n, p), c_8n_p_product(n, p), "n={n} p={p}");
            }
        }
    }

    #[test]
    fn r_examples_and_count() {
        assert_eq!(r_a_p(1, 7).unwrap(), 1);
        assert_eq!(r_a_p(3, 7).unwrap(), 2);
        assert_eq!(r_a_p(7, 7).unwrap(), 0);
        assert!(r_a_p(2, 7).is_err());
        let table = sieve_primes(97).unwrap();
        for &p in &table.primes()[1..] {
            for a in (1..=99).step_by(2) {
                assert_eq!(r_a_p(a, p).unwrap(), r_a_p_count(a, p), "a={a} p={p}");
            }
        }
    }

    #[test]
    fn cy_examples() {
        let s = |y, n, a, p| LocalSumSpec::new(y, n, a, p).unwrap();
        assert_eq!(c_y_bruteforce(&s(1, 3, 1, 7), DEFAULT_LOOP_BUDGET).unwrap(), -4);
        assert_ne!(c_y_bruteforce(&s(2, 1, 1, 7), DEFAULT_LOOP_BUDGET).unwrap(), 0);
        assert_eq!(c_y_bruteforce(&s(2, 1, 1, 5), DEFAULT_LOOP_BUDGET).unwrap(), 0);
        assert!(matches!(
            c_y_bruteforce(&s(12, 8, 6, 13), 1000),
            Err(LocalError::Budget { .. })
        ));
        assert!(LocalSumSpec::new(7, 1, 1, 7).is_err());
        assert_eq!(c_y_product(&s(1, 3, 3, 7)), 0);
    }

    #[test]
    fn cy_product_matches_bruteforce_on_grid() {
        for p in PS {
            for y in (1..=12).filter(|y| y % p != 0) {
                for n in 1..=8 {
                    for a in 1..=6 {
                        let spec = LocalSumSpec::new(y, n, a, p).unwrap();
                        let brute = c_y_bruteforce(&spec, DEFAULT_LOOP_BUDGET).unwrap();
                        assert_eq!(c_y_product(&spec), brute, "{spec:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn y_one_reduces_to_c8n_times_r() {
        for p in PS {
            for n in 1..=20 {
                for a in (1..=9).step_by(2) {
                    let spec = LocalSumSpec::new(1, n, a, p).unwrap();
                    let want = if n.gcd(&a) == 1 { c_8n_p_product(n, p) * r_a_p(a, p).unwrap() as i64 } else { 0 };
                    assert_eq!(c_y_product(&spec), want);
                }
            }
        }
    }

    #[test]
    fn sigma_examples() {
        let v = |nu, mu, e| Valuations { nu, mu, e };
        let val = |k, pl, vv, p| sigma_local(k, pl, vv, p).unwrap().value;
        assert_eq!(val(SigmaKind::Sigma2, 2, v(0, 0, 0), 7), ratio(4, 1));
        assert_eq!(val(SigmaKind::SigmaI, 3, v(1, 0, 0), 7), ratio(2, 1));
        assert_eq!(val(SigmaKind::Sigma2, 2, v(1, 0, 1), 7), ratio(0, 1));
        assert!(sigma_local(SigmaKind::SigmaP, 7, v(1, 0, 0), 7).is_err());
        assert!(sigma_local(SigmaKind::SigmaII, 3, v(1, 0, 0), 7).is_err());
        assert!(sigma_local(SigmaKind::Sigma2, 3, v(0, 0, 0), 7).is_err());
    }

    #[test]
    fn c_p_examples() {
        assert_eq!(c_p_exact(3, 3), ratio(4, 9));
        let want = ratio(8, 21) * (ratio(1, 1) - ratio(2, 9) - ratio(1, 12));
        assert_eq!(c_p_exact(7, 3), want);
        assert!((c_p(7, 3) - 8.0 / 21.0 * (1.0 - 2.0 / 9.0 - 1.0 / 12.0)).abs() < 1e-15);
        for p in [3u64, 5, 7, 101, 1009, 10007] {
            let c = c_p(p, 100_000);
            assert!(c > 0.0 && c < 4.0 / 9.0 + 1e-15);
        }
    }

    #[test]
    fn batched_c_p_is_bitwise_identical() {
        let ev = CpEvaluator::new(5000);
        let ps: Vec<u64> = crate::arith_core::primes_in_range(3, 20_000).unwrap();
        let many = ev.c_p_many(&ps);
        for (&p, v) in ps.iter().zip(&many) {
            assert_eq!(ev.c_p(p).to_bits(), v.to_bits(), "p={p}");
        }
    }

    #[test]
    fn c_p_float_matches_exact() {
        for p in [5u64, 7, 13, 101] {
            let ex = crate::arith_core::rational_to_f64(&c_p_exact(p, 200));
            assert!((c_p(p, 200) - ex).abs() < 1e-14);
        }
    }

    #[test]
    fn c_p_bound_on_grid() {
        for p in PS {
            for n in 1..=40u64 {
                for a in (1..=15u64).step_by(2) {
                    let spec = LocalSumSpec::new(1, n, a, p).unwrap();
                    let c = c_y_product(&spec).abs() as f64;
                    let f = Factorization::of(n);
                    // The implied constant depends on p through the p-part when v_p(n) is odd.
                    let p_part = if f.squarefree_part() % p == 0 { (p - 1) as f64 } else { 1.0 };
                    let bound = 16.0 * p_part * n as f64 * Factorization::of(a).divisor_count() as f64
                        / f.squarefree_part() as f64;
                    assert!(c <= bound, "{spec:?}");
                }
            }
        }
    }

    #[test]
    fn double_sum_approaches_c_p() {
        // The n-tail from square n is of size ~ N₀^{-1/2}; the gap must shrink
        // accordingly and stay inside that envelope.
        for p in [3u64, 7, 13] {
            let target = c_p(p, 100_000);
            let gaps: Vec<f64> = [100u64, 400, 1600]
                .iter()
                .map(|&n0| (c_p_double_sum(p, n0, n0) - target).abs())
                .collect();
            for (gap, n0) in gaps.iter().zip([100.0f64, 400.0, 1600.0]) {
                assert!(*gap <= 1.0 / n0.sqrt(), "p={p} gaps={gaps:?}");
            }
            assert!(gaps[2] < gaps[0], "p={p} gaps={gaps:?}");
        }
    }

    #[test]
    fn cy_identity_and_sign() {
        for p in [3u64, 5, 7, 11, 13, 17] {
            for y in (1..=100).filter(|y| y % p != 0) {
                let rep = c_y_identity_check(y, p).unwrap();
                assert!(rep.all_equal(), "{rep:?}");
            }
            assert_eq!(c_p_prefactor_from_sigma(p), ratio(p as i64 + 1, 3 * p as i64));
            for l in [3u64, 5, 7, 11, 13, 17, 19, 23].into_iter().filter(|&l| l != p) {
                if kronecker(p as i64, l as i64) == 1 {
                    assert_eq!(c_p_sign_check(p, l), (true, false));
                } else {
                    assert!(is_one(&local_factor_from_sigma(l, 0, p).unwrap()));
                }
            }
        }
    }
}
