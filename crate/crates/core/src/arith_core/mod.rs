//! Integer and character primitives shared by every other module: sieves,
//! the Kronecker symbol, factorizations, multiplicative helpers, exact
//! rationals, ζ on the reals and reproducible floating-point sums.
//!
//! All tables are immutable after construction and can be shared freely
//! across worker threads.

mod factor;
mod kronecker;
mod multiplicative;
mod sieve;
mod sum;
mod zeta;

pub use factor::Factorization;
pub use kronecker::{chi_minus_d, jacobi, kronecker};
pub use multiplicative::{
    eta, eta_partial_sum, legendre_residue_sum, ratio, rational_to_f64, squarefree_char_sum,
};
pub use sieve::{primes_in_range, sieve_mobius, sieve_primes, MobiusTable, PrimeTable, MAX_SIEVE_LIMIT};
pub use sum::{pairwise_mean, pairwise_sum};
pub use zeta::zeta_real;

/// Exact rational with arbitrary-precision numerator and positive denominator,
/// always in lowest terms.
pub type ExactRational = num_rational::BigRational;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum ArithError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("request of {requested} entries exceeds the sieve budget of {budget}")]
    ResourceLimit { requested: u64, budget: u64 },
    #[error("inconsistent character table: {0}")]
    InconsistentCharacter(String),
}

/// ⌊√n⌋ in exact integer arithmetic.
pub fn isqrt(n: u64) -> u64 {
    if n < 2 {
        return n;
    }
    let mut x = (n as f64).sqrt() as u64;
    while x.checked_mul(x).is_none_or(|sq| sq > n) {
        x -= 1;
    }
    while (x + 1).checked_mul(x + 1).is_some_and(|sq| sq <= n) {
        x += 1;
    }
    x
}

/// `Some(r)` when n = r².
pub fn exact_sqrt(n: u64) -> Option<u64> {
    let r = isqrt(n);
    (r * r == n).then_some(r)
}
