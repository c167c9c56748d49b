use super::sum::pairwise_sum;
use super::ArithError;

const BASE_TERMS: u64 = 10_000;
/// B₂, B₄, B₆, B₈.
const BERNOULLI: [f64; 4] = [1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0];

/// ζ(s) for real s > 1 by Euler–Maclaurin: N = 10⁴ base terms and four
/// Bernoulli corrections. The next omitted term is below 10⁻³⁰ for s > 1.
pub fn zeta_real(s: f64) -> Result<f64, ArithError> {
    if !(s > 1.0) || !s.is_finite() {
        return Err(ArithError::Domain(format!("zeta_real needs s > 1, got {s}")));
    }
    let n = BASE_TERMS as f64;
    let mut terms: Vec<f64> = (1..BASE_TERMS).rev().map(|k| (k as f64).powf(-s)).collect();
    terms.push(n.powf(1.0 - s) / (s - 1.0));
    terms.push(0.5 * n.powf(-s));
    // Σ B_{2k}/(2k)! · s(s+1)…(s+2k−2) · N^{−s−2k+1}
    let mut rising = s;
    let mut fact = 2.0;
    for (k, b) in BERNOULLI.iter().enumerate() {
        let j = 2 * k as i32 + 2;
        terms.push(b / fact * rising * n.powf(-s - f64::from(j) + 1.0));
        rising *= (s + f64::from(j) - 1.0) * (s + f64::from(j));
        fact *= f64::from(j + 1) * f64::from(j + 2);
    }
    Ok(pairwise_sum(&terms))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn closed_forms() {
        assert!((zeta_real(2.0).unwrap() - PI * PI / 6.0).abs() < 1e-12);
        assert!((zeta_real(4.0).unwrap() - PI.powi(4) / 90.0).abs() < 1e-12);
        assert!((zeta_real(6.0).unwrap() - PI.powi(6) / 945.0).abs() < 1e-12);
    }

    #[test]
    fn direct_sum_with_tail_bound() {
        // Σ_{n ≤ N} n^{−2.5} plus the integral tail bracket [∫_{N+1}^∞, ∫_N^∞].
        let s = 2.5;
        let big_n = 200_000u64;
        let terms: Vec<f64> = (1..=big_n).rev().map(|k| (k as f64).powf(-s)).collect();
        let head = pairwise_sum(&terms);
        let lo = head + ((big_n + 1) as f64).powf(1.0 - s) / (s - 1.0);
        let hi = head + (big_n as f64).powf(1.0 - s) / (s - 1.0);
        let z = zeta_real(s).unwrap();
        assert!(z > lo - 1e-13 && z < hi + 1e-13);
    }

    #[test]
    fn rejects_non_convergent() {
        assert!(zeta_real(1.0).is_err());
        assert!(zeta_real(0.5).is_err());
        assert!(zeta_real(f64::NAN).is_err());
    }
}
