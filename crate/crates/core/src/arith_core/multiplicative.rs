use num_bigint::BigInt;
use num_traits::{One, ToPrimitive};

use super::factor::Factorization;
use super::kronecker::kronecker;
use super::sieve::{sieve_mobius, sieve_primes};
use super::sum::pairwise_sum;
use super::{ArithError, ExactRational};

/// The rational n/d.
pub fn ratio(n: i64, d: i64) -> ExactRational {
    ExactRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rational_to_f64(r: &ExactRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Σ_{x mod p} ((x² − a)/p), computed directly.
pub fn legendre_residue_sum(p: u64, a: i64) -> Result<i64, ArithError> {
    if p <= 2 || !Factorization::of(p).factors().eq(&[(p, 1)]) {
        return Err(ArithError::Domain(format!("{p} is not an odd prime")));
    }
    let pi = p as i64;
    if a.rem_euclid(pi) == 0 {
        return Err(ArithError::Domain(format!("{p} divides {a}")));
    }
    Ok((0..pi).map(|x| i64::from(kronecker(x * x - a, pi))).sum())
}

/// η(m) = Π_{p | m} p/(p+1).
pub fn eta(m: u64) -> ExactRational {
    assert!(m >= 1);
    Factorization::of(m)
        .factors()
        .iter()
        .fold(ExactRational::one(), |acc, &(p, _)| acc * ratio(p as i64, p as i64 + 1))
}

/// Σ_{m ≤ T} η(2m)/m² in double precision.
pub fn eta_partial_sum(t: u64) -> f64 {
    assert!(t >= 1);
    let table = sieve_primes(t.max(2)).expect("sieve within budget");
    let terms: Vec<f64> = (1..=t)
        .map(|m| {
            let mut e = 2.0 / 3.0;
            if m > 1 {
                for &(p, _) in table.factorize(m).factors() {
                    if p != 2 {
                        e *= p as f64 / (p as f64 + 1.0);
                    }
                }
            }
            e / (m as f64 * m as f64)
        })
        .collect();
    pairwise_sum(&terms)
}

/// Σ_{n ≤ N} μ²(n)χ(n) for a character given by its values on residues mod m.
pub fn squarefree_char_sum(n_max: u64, table: &[i8]) -> Result<i64, ArithError> {
    let m = table.len() as u64;
    if m == 0 {
        return Err(ArithError::Domain("empty character table".into()));
    }
    validate_character(table)?;
    if n_max == 0 {
        return Ok(0);
    }
    let mob = sieve_mobius(1, n_max)?;
    Ok(mob
        .values()
        .iter()
        .enumerate()
        .filter(|(_, &mu)| mu != 0)
        .map(|(i, _)| i64::from(table[((i as u64 + 1) % m) as usize]))
        .sum())
}

fn validate_character(table: &[i8]) -> Result<(), ArithError> {
    let m = table.len() as u64;
    let at = |a: u64| table[(a % m) as usize];
    if table.iter().any(|&v| !(-1..=1).contains(&v)) {
        return Err(ArithError::InconsistentCharacter("values outside {-1, 0, 1}".into()));
    }
    if at(1) != 1 {
        return Err(ArithError::InconsistentCharacter("χ(1) ≠ 1".into()));
    }
    let bound = m.min(48);
    for a in 1..bound {
        for b in 1..bound {
            if at(a * b) != at(a) * at(b) {
                return Err(ArithError::InconsistentCharacter(format!(
                    "χ({a}·{b}) ≠ χ({a})χ({b}) mod {m}"
                )));
            }
        }
    }
    Ok(())
}
