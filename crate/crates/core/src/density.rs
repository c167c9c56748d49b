//! Closed-form murmuration density: the arithmetic weights δ_y(p), ϑ(y),
//! κ(y), η(y), the constants A and c̄, the per-prime density
//! c(p)·Σ δ_y(p)M_y(ξ) + M_−(ξ) and its prime average c̄·Σ M̄_y(Ξ) + M_−(Ξ).
//!
//! The weights are exact rationals. Densities are f64 and are assembled in
//! ascending y, so results do not depend on evaluation order.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rayon::prelude::*;

use crate::arith_core::{
    kronecker, pairwise_mean, primes_in_range, ratio, rational_to_f64, sieve_primes, zeta_real,
    ArithError, ExactRational, Factorization,
};
use crate::localfactors::{c_factor, CpEvaluator};

pub const DEFAULT_EULER_CUTOFF: u64 = 100_000;
pub const DEFAULT_EXCLUSION: f64 = 0.05;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum DensityError {
    #[error("ξ = {xi} lies within {radius} of the singular point y²/4 = {singular} (y = {y})")]
    Exclusion { xi: f64, y: u64, singular: f64, radius: f64 },
    #[error("invalid density parameters: {0}")]
    Params(String),
    #[error("p = {p} divides y = {y}")]
    Divides { p: u64, y: u64 },
    #[error("empty prime window [{lo}, {hi}]")]
    EmptyWindow { lo: u64, hi: u64 },
    #[error(transparent)]
    Arith(#[from] ArithError),
}

/// δ_y(p): product over the prime-power parts of y of the residue conditions
/// (q/p-part: (p/q) = 1; 2: p ≡ 3 mod 4; 4: p ≡ 5 mod 8; 2^ν, ν ≥ 3: p ≡ 1 mod 8).
pub fn delta_y(y: u64, p: u64) -> Result<u8, DensityError> {
    if y == 0 || p % 2 == 0 {
        return Err(DensityError::Params(format!("delta_y needs y ≥ 1 and odd p, got ({y}, {p})")));
    }
    if y % p == 0 {
        return Err(DensityError::Divides { p, y });
    }
    let f = Factorization::of(y);
    let ok = f.factors().iter().all(|&(q, nu)| match (q, nu) {
        (2, 1) => p % 4 == 3,
        (2, 2) => p % 8 == 5,
        (2, _) => p % 8 == 1,
        (q, _) => kronecker(p as i64, q as i64) == 1,
    });
    Ok(u8::from(ok))
}

/// ϑ(y) = 2^{ω(y)+min(v₂(y),2)} Π_{q | y odd} (1 + (2q²+q−1)/(q⁴−3q²−2q+2)).
pub fn vartheta(y: u64) -> ExactRational {
    assert!(y >= 1, "vartheta needs y ≥ 1");
    let f = Factorization::of(y);
    let exp = f.omega() + f.valuation(2).min(2);
    let mut v = ratio(1i64 << exp, 1);
    for q in f.odd_primes() {
        let q = q as i64;
        v *= ratio(1, 1) + ratio(2 * q * q + q - 1, q.pow(4) - 3 * q * q - 2 * q + 2);
    }
    v
}

/// κ(y) = 2^{𝟙{2 | y}} Π_{q | y odd} (1 + q²/(q⁴−2q²−q+1)).
pub fn kappa(y: u64) -> ExactRational {
    assert!(y >= 1, "kappa needs y ≥ 1");
    let f = Factorization::of(y);
    let mut k = ratio(if y % 2 == 0 { 2 } else { 1 }, 1);
    for q in f.odd_primes() {
        let q = q as i64;
        k *= ratio(1, 1) + ratio(q * q, q.pow(4) - 2 * q * q - q + 1);
    }
    k
}

/// η(y) = 2^{−ω(y)+⋆} Π_{q | y odd} (1−2q⁻²−2q⁻³/(1−q⁻²)) / (1−q⁻²−q⁻³/(1−q⁻²)),
/// with ⋆ = −1 when 4 | y and 0 otherwise.
pub fn eta_y(y: u64) -> ExactRational {
    assert!(y >= 1, "eta_y needs y ≥ 1");
    let f = Factorization::of(y);
    let star = u32::from(y % 4 == 0);
    let mut e = ratio(1, 1i64 << (f.omega() + star));
    for q in f.odd_primes() {
        e *= c_factor(q) / cbar_factor(q);
    }
    e
}

/// Local factor 1 − ℓ⁻² − ℓ⁻³/(1 − ℓ⁻²) of c̄.
fn cbar_factor(l: u64) -> ExactRational {
    let l = l as i64;
    ratio(1, 1) - ratio(1, l * l) - ratio(1, l * l * l) / (ratio(1, 1) - ratio(1, l * l))
}

fn check_cutoff(m: u64) -> Result<(), DensityError> {
    if m < 2 {
        return Err(DensityError::Params(format!("Euler cutoff must be ≥ 2, got {m}")));
    }
    Ok(())
}

/// A = Π_{p ≤ M} (1 + p/((p+1)²(p−1))); the log-tail is at most 2/M.
pub fn constant_a(m: u64) -> Result<f64, DensityError> {
    check_cutoff(m)?;
    let table = sieve_primes(m)?;
    let logs: Vec<f64> = table
        .primes()
        .iter()
        .map(|&p| {
            let p = p as f64;
            (p / ((p + 1.0) * (p + 1.0) * (p - 1.0))).ln_1p()
        })
        .collect();
    Ok(crate::arith_core::pairwise_sum(&logs).exp())
}

/// c̄ = (1/3) Π_{2 < ℓ ≤ M} (1 − ℓ⁻² − ℓ⁻³/(1 − ℓ⁻²)); the log-tail is at most 2/M.
pub fn constant_cbar(m: u64) -> Result<f64, DensityError> {
    check_cutoff(m)?;
    let table = sieve_primes(m)?;
    let logs: Vec<f64> = table.primes()[1..]
        .iter()
        .map(|&l| {
            let x = 1.0 / l as f64;
            (-x * x - x * x * x / (1.0 - x * x)).ln_1p()
        })
        .collect();
    Ok(crate::arith_core::pairwise_sum(&logs).exp() / 3.0)
}

/// A truncated at M in exact arithmetic.
pub fn constant_a_exact(m: u64) -> Result<ExactRational, DensityError> {
    check_cutoff(m)?;
    let table = sieve_primes(m)?;
    Ok(table.primes().iter().fold(ratio(1, 1), |acc, &p| {
        let p = p as i64;
        acc * (ratio(1, 1) + ratio(p, (p + 1) * (p + 1) * (p - 1)))
    }))
}

/// c̄ truncated at M in exact arithmetic.
pub fn constant_cbar_exact(m: u64) -> Result<ExactRational, DensityError> {
    check_cutoff(m)?;
    let table = sieve_primes(m)?;
    Ok(table.primes()[1..].iter().fold(ratio(1, 3), |acc, &l| acc * cbar_factor(l)))
}

/// Truncation and exclusion settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityParams {
    pub euler_cutoff: u64,
    pub exclusion: f64,
}

impl Default for DensityParams {
    fn default() -> Self {
        DensityParams { euler_cutoff: DEFAULT_EULER_CUTOFF, exclusion: DEFAULT_EXCLUSION }
    }
}

impl DensityParams {
    pub fn new(euler_cutoff: u64, exclusion: f64) -> Result<Self, DensityError> {
        if euler_cutoff < 100 {
            return Err(DensityError::Params(format!("Euler cutoff must be ≥ 100, got {euler_cutoff}")));
        }
        if !(exclusion > 0.0 && exclusion.is_finite()) {
            return Err(DensityError::Params(format!("exclusion radius must be positive, got {exclusion}")));
        }
        Ok(DensityParams { euler_cutoff, exclusion })
    }

    /// Error if ξ is within the exclusion radius of some y²/4, y ≥ 1.
    pub fn check_xi(&self, xi: f64) -> Result<(), DensityError> {
        if !(xi >= 0.0 && xi.is_finite()) {
            return Err(DensityError::Params(format!("ξ must be a finite non-negative number, got {xi}")));
        }
        let y = (2.0 * xi.sqrt()).round().max(1.0) as u64;
        for y in [y.saturating_sub(1).max(1), y, y + 1] {
            let singular = (y * y) as f64 / 4.0;
            if (xi - singular).abs() < self.exclusion {
                return Err(DensityError::Exclusion { xi, y, singular, radius: self.exclusion });
            }
        }
        Ok(())
    }

    pub fn is_excluded(&self, xi: f64) -> bool {
        self.check_xi(xi).is_err()
    }
}

/// Which density a value came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DensityForm {
    PerPrime(u64),
    Averaged,
}

/// M(Ξ) with its per-y terms and the M_− term.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityValue {
    pub xi: f64,
    pub total: f64,
    /// Weighted terms for every 1 ≤ y < 2√Ξ; zero where δ_y(p) = 0.
    pub per_y: BTreeMap<u64, f64>,
    pub minus_term: f64,
    pub form: DensityForm,
}

/// Largest y with y < 2√ξ.
pub fn y_max(xi: f64) -> u64 {
    let bound = 2.0 * xi.sqrt();
    let mut y = bound.floor() as u64;
    while y > 0 && (y as f64) >= bound {
        y -= 1;
    }
    y
}

/// Constants shared by all density evaluations at one Euler cutoff.
#[derive(Debug, Clone)]
pub struct DensityContext {
    pub params: DensityParams,
    pub a: f64,
    pub cbar: f64,
    pub zeta2: f64,
    cp: CpEvaluator,
}

impl DensityContext {
    pub fn new(params: DensityParams) -> Result<Self, DensityError> {
        let m = params.euler_cutoff;
        Ok(DensityContext {
            params,
            a: constant_a(m)?,
            cbar: constant_cbar(m)?,
            zeta2: zeta_real(2.0)?,
            cp: CpEvaluator::new(m),
        })
    }

    pub fn cp(&self) -> &CpEvaluator {
        &self.cp
    }

    /// √(ξ/(4ξ − y²)) · 11ζ(2)/(4A), the shape shared by M_y and M̄_y.
    fn shape(&self, xi: f64, y: u64) -> f64 {
        11.0 * self.zeta2 / (4.0 * self.a) * (xi / (4.0 * xi - (y * y) as f64)).sqrt()
    }

    /// M_y(ξ) = (11ζ(2)/4A)·√(ξ/(4ξ−y²))·ϑ(y).
    pub fn m_y(&self, xi: f64, y: u64) -> f64 {
        self.shape(xi, y) * rational_to_f64(&vartheta(y))
    }

    /// M̄_y(Ξ) = (11ζ(2)/4A)·√(Ξ/(4Ξ−y²))·κ(y).
    pub fn m_bar_y(&self, xi: f64, y: u64) -> f64 {
        self.shape(xi, y) * rational_to_f64(&kappa(y))
    }

    /// M_−(ξ) = −(11π/12A)·√ξ.
    pub fn m_minus(&self, xi: f64) -> f64 {
        -11.0 * PI / (12.0 * self.a) * xi.sqrt()
    }

    fn assemble(&self, xi: f64, per_y: BTreeMap<u64, f64>, form: DensityForm) -> DensityValue {
        let minus_term = self.m_minus(xi);
        let total = per_y.values().sum::<f64>() + minus_term;
        DensityValue { xi, total, per_y, minus_term, form }
    }

    /// c(p)·Σ_{y<2√ξ} δ_y(p)M_y(ξ) + M_−(ξ) at ξ = p/X.
    pub fn density_per_prime(&self, p: u64, x: f64) -> Result<DensityValue, DensityError> {
        let xi = p as f64 / x;
        self.params.check_xi(xi)?;
        let c = self.cp.c_p(p);
        self.per_prime_at(p, xi, c)
    }

    fn per_prime_at(&self, p: u64, xi: f64, c: f64) -> Result<DensityValue, DensityError> {
        let mut per_y = BTreeMap::new();
        for y in 1..=y_max(xi) {
            let d = if y % p == 0 { 0 } else { delta_y(y, p)? };
            let term = if d == 1 { c * self.m_y(xi, y) } else { 0.0 };
            per_y.insert(y, term);
        }
        Ok(self.assemble(xi, per_y, DensityForm::PerPrime(p)))
    }

    /// c̄·Σ_{y<2√Ξ} M̄_y(Ξ) + M_−(Ξ).
    pub fn density_averaged(&self, xi: f64) -> Result<DensityValue, DensityError> {
        self.params.check_xi(xi)?;
        let per_y = (1..=y_max(xi)).map(|y| (y, self.cbar * self.m_bar_y(xi, y))).collect();
        Ok(self.assemble(xi, per_y, DensityForm::Averaged))
    }

    /// Mean over primes p ∈ [lo, hi] of the per-prime density at fixed Ξ
    /// (taking X = p/Ξ for each p).
    pub fn density_window_average(&self, xi: f64, lo: u64, hi: u64) -> Result<f64, DensityError> {
        Ok(self.density_window_averages(&[xi], lo, hi)?[0])
    }

    /// [`DensityContext::density_window_average`] for several Ξ, sharing the c(p) values.
    pub fn density_window_averages(&self, xis: &[f64], lo: u64, hi: u64) -> Result<Vec<f64>, DensityError> {
        for &xi in xis {
            self.params.check_xi(xi)?;
        }
        let primes: Vec<u64> = primes_in_range(lo.max(3), hi)?;
        if primes.is_empty() {
            return Err(DensityError::EmptyWindow { lo, hi });
        }
        let cs = self.cp.c_p_many(&primes);
        xis.iter()
            .map(|&xi| {
                let vals: Vec<f64> = primes
                    .iter()
                    .zip(&cs)
                    .map(|(&p, &c)| self.per_prime_at(p, xi, c).map(|v| v.total))
                    .collect::<Result<_, _>>()?;
                Ok(pairwise_mean(&vals).expect("non-empty window"))
            })
            .collect()
    }

    /// Evaluate the averaged density on a grid, skipping excluded points.
    pub fn averaged_grid(&self, grid: &[f64]) -> Vec<DensityValue> {
        grid.par_iter().filter_map(|&xi| self.density_averaged(xi).ok()).collect()
    }
}

/// Mean of c(p) over primes p ∈ [X, X+H], truncated at M.
pub fn cbar_window_average(x: u64, h: u64, m: u64) -> Result<f64, DensityError> {
    cp_window_average(x, h, &CpEvaluator::new(m), |_| true)
}

/// Mean of c(p)·δ_y(p) over primes p ∈ [X, X+H] not dividing y.
pub fn cdelta_window_average(x: u64, h: u64, m: u64, y: u64) -> Result<f64, DensityError> {
    let ev = CpEvaluator::new(m);
    let lo = x.max(3);
    let primes: Vec<u64> = primes_in_range(lo, x + h)?.into_iter().filter(|p| y % p != 0).collect();
    let cs = ev.c_p_many(&primes);
    let vals: Vec<f64> = primes
        .iter()
        .zip(cs)
        .map(|(&p, c)| Ok(f64::from(delta_y(y, p)?) * c))
        .collect::<Result<_, DensityError>>()?;
    pairwise_mean(&vals).ok_or(DensityError::EmptyWindow { lo, hi: x + h })
}

fn cp_window_average(
    x: u64,
    h: u64,
    ev: &CpEvaluator,
    keep: impl Fn(u64) -> bool + Sync,
) -> Result<f64, DensityError> {
    let lo = x.max(3);
    let primes: Vec<u64> = primes_in_range(lo, x + h)?.into_iter().filter(|&p| keep(p)).collect();
    let vals = ev.c_p_many(&primes);
    pairwise_mean(&vals).ok_or(DensityError::EmptyWindow { lo, hi: x + h })
}

/// Evenly spaced grid lo..=hi with n points.
pub fn linear_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}
