use rayon::prelude::*;

use super::factor::Factorization;
use super::{isqrt, ArithError};

/// Largest sieve limit accepted before reporting a resource failure
/// (the smallest-prime-factor array costs four bytes per entry).
pub const MAX_SIEVE_LIMIT: u64 = 400_000_000;

const SEGMENT: u64 = 1 << 16;

/// Primes up to `limit` with a smallest-prime-factor table.
#[derive(Debug, Clone)]
pub struct PrimeTable {
    limit: u64,
    primes: Vec<u64>,
    spf: Vec<u32>,
}

impl PrimeTable {
    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    /// Smallest prime factor of `n` for 2 ≤ n ≤ limit.
    pub fn smallest_prime_factor(&self, n: u64) -> u64 {
        assert!(n >= 2 && n <= self.limit, "{n} outside table range");
        u64::from(self.spf[n as usize])
    }

    pub fn is_prime(&self, n: u64) -> bool {
        n >= 2 && n <= self.limit && u64::from(self.spf[n as usize]) == n
    }

    /// Primes p ≤ bound, a prefix of the table.
    pub fn primes_up_to(&self, bound: u64) -> &[u64] {
        let k = self.primes.partition_point(|&p| p <= bound);
        &self.primes[..k]
    }

    /// Factorization by repeated smallest-prime-factor lookup; falls back to
    /// trial division beyond the table.
    pub fn factorize(&self, n: u64) -> Factorization {
        assert!(n >= 1);
        if n > self.limit {
            return Factorization::of(n);
        }
        let mut factors: Vec<(u64, u32)> = Vec::new();
        let mut m = n;
        while m > 1 {
            let p = u64::from(self.spf[m as usize]);
            let mut e = 0;
            while m % p == 0 {
                m /= p;
                e += 1;
            }
            factors.push((p, e));
        }
        Factorization::from_parts(n, factors)
    }
}

/// Linear sieve producing primes and smallest prime factors up to `limit`.
pub fn sieve_primes(limit: u64) -> Result<PrimeTable, ArithError> {
    if limit < 2 {
        return Err(ArithError::Domain(format!("sieve limit {limit} < 2")));
    }
    if limit > MAX_SIEVE_LIMIT {
        return Err(ArithError::ResourceLimit { requested: limit, budget: MAX_SIEVE_LIMIT });
    }
    let len = limit as usize + 1;
    let mut spf = vec![0u32; len];
    let mut primes: Vec<u64> = Vec::new();
    for i in 2..len {
        if spf[i] == 0 {
            spf[i] = i as u32;
            primes.push(i as u64);
        }
        let si = spf[i];
        for &p in &primes {
            let m = i as u64 * p;
            if p > u64::from(si) || m > limit {
                break;
            }
            spf[m as usize] = p as u32;
        }
    }
    Ok(PrimeTable { limit, primes, spf })
}

/// Primes in [lo, hi] by a segmented sieve over base primes ≤ √hi.
pub fn primes_in_range(lo: u64, hi: u64) -> Result<Vec<u64>, ArithError> {
    if hi < 2 || lo > hi {
        return Ok(Vec::new());
    }
    let lo = lo.max(2);
    let base = sieve_primes(isqrt(hi).max(2))?;
    let starts: Vec<u64> = (0..)
        .map(|k| lo + k * SEGMENT)
        .take_while(|&s| s <= hi)
        .collect();
    let chunks: Vec<Vec<u64>> = starts
        .par_iter()
        .map(|&s| {
            let e = (s + SEGMENT - 1).min(hi);
            let mut composite = vec![false; (e - s + 1) as usize];
            for &p in base.primes() {
                if p * p > e {
                    break;
                }
                let first = (p * p).max(s.div_ceil(p) * p);
                let mut m = first;
                while m <= e {
                    composite[(m - s) as usize] = true;
                    m += p;
                }
            }
            composite
                .iter()
                .enumerate()
                .filter(|(_, &c)| !c)
                .map(|(i, _)| s + i as u64)
                .collect()
        })
        .collect();
    Ok(chunks.into_iter().flatten().collect())
}

/// Möbius values and squarefree flags over [lo, hi].
#[derive(Debug, Clone)]
pub struct MobiusTable {
    lo: u64,
    hi: u64,
    mu: Vec<i8>,
}

impl MobiusTable {
    pub fn range(&self) -> (u64, u64) {
        (self.lo, self.hi)
    }

    pub fn mu(&self, n: u64) -> i8 {
        assert!(n >= self.lo && n <= self.hi, "{n} outside [{}, {}]", self.lo, self.hi);
        self.mu[(n - self.lo) as usize]
    }

    pub fn is_squarefree(&self, n: u64) -> bool {
        self.mu(n) != 0
    }

    pub fn values(&self) -> &[i8] {
        &self.mu
    }

    /// Number of squarefree integers in the range.
    pub fn squarefree_count(&self) -> u64 {
        self.mu.iter().filter(|&&m| m != 0).count() as u64
    }
}

/// Segmented Möbius sieve over [lo, hi]; segments are independent and built
/// concurrently, so memory beyond the output is O(√hi + segment).
pub fn sieve_mobius(lo: u64, hi: u64) -> Result<MobiusTable, ArithError> {
    if lo == 0 || lo > hi {
        return Err(ArithError::Domain(format!("invalid Möbius range [{lo}, {hi}]")));
    }
    if hi - lo > MAX_SIEVE_LIMIT {
        return Err(ArithError::ResourceLimit { requested: hi - lo, budget: MAX_SIEVE_LIMIT });
    }
    let base = sieve_primes(isqrt(hi).max(2))?;
    let starts: Vec<u64> = (0..)
        .map(|k| lo + k * SEGMENT)
        .take_while(|&s| s <= hi)
        .collect();
    let segments: Vec<Vec<i8>> = starts
        .par_iter()
        .map(|&s| mobius_segment(s, (s + SEGMENT - 1).min(hi), base.primes()))
        .collect();
    Ok(MobiusTable { lo, hi, mu: segments.concat() })
}

fn mobius_segment(s: u64, e: u64, base: &[u64]) -> Vec<i8> {
    let len = (e - s + 1) as usize;
    let mut mu = vec![1i8; len];
    let mut rem: Vec<u64> = (s..=e).collect();
    for &p in base {
        if p * p > e {
            break;
        }
        let mut m = s.div_ceil(p) * p;
        while m <= e {
            let i = (m - s) as usize;
            mu[i] = -mu[i];
            rem[i] /= p;
            m += p;
        }
        let q = p * p;
        let mut m = s.div_ceil(q) * q;
        while m <= e {
            mu[(m - s) as usize] = 0;
            m += q;
        }
    }
    for i in 0..len {
        if mu[i] != 0 && rem[i] > 1 {
            mu[i] = -mu[i];
        }
    }
    mu
}
