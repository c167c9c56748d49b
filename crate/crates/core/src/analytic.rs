//! Analytic side of the density: the Poisson/Bessel form of M(Ξ), the
//! Euler-product identities behind it, the weighted murmuration function
//! M_Φ(Ξ) and its large-Ξ asymptote.
//!
//! The Bessel form is a validation surface. The finite sum in
//! [`crate::density`] is the reference.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::arith_core::{
    pairwise_sum, ratio, sieve_primes, zeta_real, ArithError, ExactRational, Factorization,
};
use crate::density::{kappa, DensityContext, DensityError};

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum AnalyticError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("quadrature did not converge on [{lo}, {hi}]")]
    Quadrature { lo: f64, hi: f64 },
    #[error(transparent)]
    Density(#[from] DensityError),
    #[error(transparent)]
    Arith(#[from] ArithError),
}

/// Q(d) = μ²(d) Π_{q | d odd} q²/(q⁴ − 2q² − q + 1).
pub fn q_d(d: u64) -> ExactRational {
    assert!(d >= 1, "Q(d) needs d ≥ 1");
    let f = Factorization::of(d);
    if !f.is_squarefree() {
        return ratio(0, 1);
    }
    f.odd_primes().fold(ratio(1, 1), |acc, q| {
        let q = q as i64;
        acc * ratio(q * q, q.pow(4) - 2 * q * q - q + 1)
    })
}

fn q_prime(p: u64) -> f64 {
    if p == 2 {
        return 1.0;
    }
    let p = p as f64;
    p * p / (p.powi(4) - 2.0 * p * p - p + 1.0)
}

/// Q(d) as f64 for 0 ≤ d ≤ n (index 0 unused).
pub fn q_table(n: u64) -> Result<Vec<f64>, AnalyticError> {
    let table = sieve_primes(n.max(2))?;
    let mut q = vec![0.0; n as usize + 1];
    if n >= 1 {
        q[1] = 1.0;
    }
    for d in 2..=n {
        let p = table.smallest_prime_factor(d);
        let r = d / p;
        if r % p != 0 {
            q[d as usize] = q[r as usize] * q_prime(p);
        }
    }
    Ok(q)
}

/// Gauss–Legendre nodes and weights on [−1, 1].
#[derive(Debug, Clone)]
pub struct GaussRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussRule {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for i in 0..n {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let k = k as f64;
                    let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                if n == 1 {
                    p0 = 1.0;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            nodes.push(x);
            weights.push(2.0 / ((1.0 - x * x) * dp * dp));
        }
        GaussRule { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: &F, a: f64, b: f64) -> f64 {
        let (mid, half) = ((a + b) / 2.0, (b - a) / 2.0);
        let s: f64 = self.nodes.iter().zip(&self.weights).map(|(x, w)| w * f(mid + half * x)).sum();
        s * half
    }

    fn integrate_complex<F: Fn(f64) -> Complex64>(&self, f: &F, a: f64, b: f64) -> Complex64 {
        let (mid, half) = ((a + b) / 2.0, (b - a) / 2.0);
        let s: Complex64 =
            self.nodes.iter().zip(&self.weights).map(|(x, w)| f(mid + half * x) * *w).sum();
        s * half
    }
}

/// Adaptive bisection comparing an n-point and a 2n-point rule.
/// Returns (value, error estimate) or the interval that failed.
pub fn adaptive_integrate<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    tol: f64,
    rules: (&GaussRule, &GaussRule),
    depth: u32,
) -> Result<(f64, f64), (f64, f64)> {
    let coarse = rules.0.integrate(f, a, b);
    let fine = rules.1.integrate(f, a, b);
    let err = (fine - coarse).abs();
    if err <= tol || (b - a) <= 1e-15 * a.abs().max(1.0) {
        return Ok((fine, err));
    }
    if depth == 0 {
        return Err((a, b));
    }
    let m = (a + b) / 2.0;
    let (l, el) = adaptive_integrate(f, a, m, tol / 2.0, rules, depth - 1)?;
    let (r, er) = adaptive_integrate(f, m, b, tol / 2.0, rules, depth - 1)?;
    Ok((l + r, el + er))
}

const J0_SERIES_LIMIT: f64 = 12.0;

/// Hankel coefficients a_k(0) = (−1)^k Π_{j≤k} (2j−1)² / (k! 8^k).
fn hankel_coefficients(n: usize) -> Vec<f64> {
    let mut a = vec![1.0];
    for k in 1..n {
        let j = (2 * k - 1) as f64;
        a.push(a[k - 1] * (-(j * j)) / (8.0 * k as f64));
    }
    a
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

/// Double-double product.
fn dd_mul(x: (f64, f64), y: (f64, f64)) -> (f64, f64) {
    let p = x.0 * y.0;
    let e = x.0.mul_add(y.0, -p) + (x.0 * y.1 + x.1 * y.0);
    quick_two_sum(p, e)
}

/// Double-double divided by an f64.
fn dd_div(x: (f64, f64), d: f64) -> (f64, f64) {
    let q1 = x.0 / d;
    let p = q1 * d;
    let r = ((x.0 - p) - q1.mul_add(d, -p)) + x.1;
    quick_two_sum(q1, r / d)
}

fn dd_add(x: (f64, f64), y: (f64, f64)) -> (f64, f64) {
    let (s, e) = two_sum(x.0, y.0);
    quick_two_sum(s, e + x.1 + y.1)
}

const FRAC_PI_4_LO: f64 = 3.061_616_997_868_383e-17;

fn j0_unchecked(x: f64) -> f64 {
    if x <= J0_SERIES_LIMIT {
        // Summed in double-double so the result is smooth to the last bit,
        // which the finite-difference ODE check relies on.
        let xx = x * x;
        let q = (-xx / 4.0, -x.mul_add(x, -xx) / 4.0);
        let (mut term, mut sum) = ((1.0, 0.0), (1.0, 0.0));
        for k in 1..200 {
            term = dd_div(dd_mul(term, q), (k * k) as f64);
            sum = dd_add(sum, term);
            if term.0.abs() < 1e-34 * sum.0.abs().max(1e-300) + 1e-300 {
                break;
            }
        }
        return sum.0 + sum.1;
    }
    let (hi, lo) = two_sum(x, -PI / 4.0);
    let lo = lo - FRAC_PI_4_LO;
    let (s0, c0) = hi.sin_cos();
    let (s, c) = (s0 + c0 * lo, c0 - s0 * lo);
    let phase = [c, -s, -c, s];
    let mut sum = 0.0;
    let mut prev = f64::INFINITY;
    let mut a = 1.0f64;
    let mut xk = 1.0f64;
    for k in 0..60usize {
        if k > 0 {
            let j = (2 * k - 1) as f64;
            a *= -(j * j) / (8.0 * k as f64);
            xk *= x;
        }
        let t = a / xk;
        if t.abs() > prev {
            break;
        }
        sum += t * phase[k % 4];
        prev = t.abs();
        if prev < 1e-17 {
            break;
        }
    }
    (2.0 / (PI * x)).sqrt() * sum
}

/// J₀(x) for x ≥ 0: power series up to 12, Hankel asymptotics beyond.
pub fn bessel_j0(x: f64) -> Result<f64, AnalyticError> {
    if !(x >= 0.0 && x.is_finite()) {
        return Err(AnalyticError::Domain(format!("J0 needs finite x ≥ 0, got {x}")));
    }
    Ok(j0_unchecked(x))
}

/// (1/π)∫₀^π cos(x sin θ) dθ by composite Gauss–Legendre.
pub fn bessel_j0_quadrature(x: f64) -> f64 {
    let rule = GaussRule::new(32);
    let panels = (x.abs() / 2.0).ceil().max(4.0) as usize;
    let h = PI / panels as f64;
    let f = |t: f64| (x * t.sin()).cos();
    let parts: Vec<f64> =
        (0..panels).map(|i| rule.integrate(&f, i as f64 * h, (i + 1) as f64 * h)).collect();
    pairwise_sum(&parts) / PI
}

fn gamma_half_integer(k: usize) -> f64 {
    (0..k).fold(PI.sqrt(), |g, j| g * (j as f64 + 0.5))
}

/// Σ_{m ≥ n} e^{iθm} m^{−s} for 0 < |θ mod 2π|, via
/// (1/Γ(s))∫₀^∞ t^{s−1} z^n e^{−nt}/(1 − z e^{−t}) dt with t = τ².
/// Only half-integer s = k + 1/2 is supported.
pub fn lerch_tail(theta: f64, k: usize, n: u64) -> Complex64 {
    let reduced = theta - 2.0 * PI * (theta / (2.0 * PI)).round();
    let nf = n as f64;
    let zn = Complex64::from_polar(1.0, (theta * nf) % (2.0 * PI));
    let sin_t = reduced.sin();
    let half_sin2 = 2.0 * (reduced / 2.0).sin().powi(2);
    let integrand = |tau: f64| {
        let t = tau * tau;
        let e = (-t).exp();
        let denom = Complex64::new(-(-t).exp_m1() + e * half_sin2, -e * sin_t);
        let num = 2.0 * tau.powi(2 * k as i32) * (-nf * t).exp();
        zn * num / denom
    };
    let rule = GaussRule::new(24);
    let end = 60.0 / nf;
    let mut h = (reduced.abs().min(1.0 / nf)) / 16.0;
    let mut bounds = vec![0.0];
    while h < end {
        bounds.push(h);
        h *= 2.0;
    }
    bounds.push(end);
    let total: Complex64 = bounds
        .windows(2)
        .map(|w| rule.integrate_complex(&integrand, w[0].sqrt(), w[1].sqrt()))
        .sum();
    total / gamma_half_integer(k)
}

/// How the conditionally convergent m-series is summed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Acceleration {
    /// Raw partial sum up to m_max.
    None,
    /// (C,1) mean of the partial sums up to m_max.
    Cesaro,
    /// Partial sum plus the tail of the J₀ Hankel expansion summed exactly.
    TailIntegral,
}

impl std::str::FromStr for Acceleration {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(Acceleration::None),
            "cesaro" => Ok(Acceleration::Cesaro),
            "tail_integral" | "tail-integral" => Ok(Acceleration::TailIntegral),
            _ => Err(format!("unknown acceleration {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BesselSeriesParams {
    pub d_max: u64,
    pub m_max: u64,
    pub acceleration: Acceleration,
}

impl Default for BesselSeriesParams {
    fn default() -> Self {
        BesselSeriesParams { d_max: 1000, m_max: 1000, acceleration: Acceleration::TailIntegral }
    }
}

impl BesselSeriesParams {
    pub fn new(d_max: u64, m_max: u64, acceleration: Acceleration) -> Result<Self, AnalyticError> {
        if d_max < 10 || m_max < 10 {
            return Err(AnalyticError::Domain(format!(
                "d_max and m_max must be ≥ 10, got {d_max}, {m_max}"
            )));
        }
        Ok(BesselSeriesParams { d_max, m_max, acceleration })
    }
}

/// A truncated series value with its declared truncation-error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselValue {
    pub value: f64,
    pub trunc_estimate: f64,
}

const HANKEL_TERMS: usize = 5;

/// Σ_{m ≥ 1} J₀(cm) with the given acceleration.
pub fn bessel_m_sum(c: f64, m_max: u64, acceleration: Acceleration) -> BesselValue {
    let terms: Vec<f64> = (1..=m_max).map(|m| j0_unchecked(c * m as f64)).collect();
    let reduced = (c - 2.0 * PI * (c / (2.0 * PI)).round()).abs();
    let gap = 2.0 * (reduced / 2.0).sin();
    let amp = (2.0 / (PI * c * m_max as f64)).sqrt();
    match acceleration {
        Acceleration::None => {
            BesselValue { value: pairwise_sum(&terms), trunc_estimate: amp / gap }
        }
        Acceleration::Cesaro => {
            let n = m_max as f64;
            let weighted: Vec<f64> =
                terms.iter().enumerate().map(|(i, t)| t * (1.0 - i as f64 / n)).collect();
            BesselValue { value: pairwise_sum(&weighted), trunc_estimate: amp / (n * gap * gap) }
        }
        Acceleration::TailIntegral => {
            let a = hankel_coefficients(HANKEL_TERMS + 1);
            let rot = [
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 1.0),
                Complex64::new(-1.0, 0.0),
                Complex64::new(0.0, -1.0),
            ];
            let phase = Complex64::from_polar(1.0, -PI / 4.0);
            let tail: f64 = (0..HANKEL_TERMS)
                .map(|k| {
                    let l = lerch_tail(c, k, m_max + 1);
                    a[k] * c.powf(-(k as f64) - 0.5) * (phase * rot[k % 4] * l).re
                })
                .sum::<f64>()
                * (2.0 / PI).sqrt();
            let kk = HANKEL_TERMS as f64;
            let remainder = (2.0 / PI).sqrt() * a[HANKEL_TERMS].abs() * c.powf(-kk - 0.5)
                * (m_max as f64).powf(0.5 - kk)
                / (kk - 0.5);
            BesselValue { value: pairwise_sum(&terms) + tail, trunc_estimate: remainder }
        }
    }
}

/// Prefactor 11πζ(2)c̄/(4A) of the Bessel form.
pub fn bessel_prefactor(ctx: &DensityContext) -> f64 {
    11.0 * PI * ctx.zeta2 * ctx.cbar / (4.0 * ctx.a)
}

/// Σ_{p ≤ M} products Π(1 + Q(p)) and Π(1 + Q(p)/p).
fn q_products(m: u64) -> Result<(f64, f64), AnalyticError> {
    let table = sieve_primes(m.max(2))?;
    let (mut s0, mut s1) = (Vec::new(), Vec::new());
    for &p in table.primes() {
        let q = q_prime(p);
        s0.push(q.ln_1p());
        s1.push((q / p as f64).ln_1p());
    }
    Ok((pairwise_sum(&s0).exp(), pairwise_sum(&s1).exp()))
}

/// M(Ξ) = (11πζ(2)c̄/4A)·√Ξ·Σ_d Q(d)/d Σ_m J₀(4πm√Ξ/d) − 1/2.
pub fn density_bessel(
    xi: f64,
    params: &BesselSeriesParams,
    ctx: &DensityContext,
) -> Result<BesselValue, AnalyticError> {
    if xi <= 0.0 {
        return Err(AnalyticError::Domain(format!("density_bessel needs Ξ > 0, got {xi}")));
    }
    ctx.params.check_xi(xi)?;
    let q = q_table(params.d_max)?;
    let root = xi.sqrt();
    let parts: Vec<(f64, f64)> = (1..=params.d_max)
        .into_par_iter()
        .filter(|&d| q[d as usize] != 0.0)
        .map(|d| {
            let w = q[d as usize] / d as f64;
            let s = bessel_m_sum(4.0 * PI * root / d as f64, params.m_max, params.acceleration);
            (w * s.value, w * s.trunc_estimate)
        })
        .collect();
    let k = bessel_prefactor(ctx);
    let sum = pairwise_sum(&parts.iter().map(|p| p.0).collect::<Vec<_>>());
    let est: f64 = parts.iter().map(|p| p.1).sum();
    let (full0, full1) = q_products(ctx.params.euler_cutoff)?;
    let head0 = pairwise_sum(&q[1..]);
    let head1: f64 = pairwise_sum(&q.iter().enumerate().skip(1).map(|(d, v)| v / d as f64).collect::<Vec<_>>());
    let d_tail = k / (4.0 * PI) * (full0 - head0).abs() + k * root / 2.0 * (full1 - head1).abs();
    Ok(BesselValue { value: k * root * sum - 0.5, trunc_estimate: k * root * est + d_tail })
}

/// Residuals of ζ(2)c̄/A·ΣQ(d) = 8/11 and ζ(2)c̄·ΣQ(d)/d = 2/3.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerIdentityReport {
    pub cutoff: u64,
    pub value_8_11: f64,
    pub value_2_3: f64,
    pub residual_8_11: f64,
    pub residual_2_3: f64,
}

/// Both identities with ζ(2), c̄, A as Euler products over p ≤ M and the
/// Q-sums over d ≤ M.
pub fn euler_identities(m: u64) -> Result<EulerIdentityReport, AnalyticError> {
    if m < 1000 {
        return Err(AnalyticError::Domain(format!("cutoff must be ≥ 1000, got {m}")));
    }
    let table = sieve_primes(m)?;
    let zeta2 = pairwise_sum(&table.primes().iter().map(|&p| -(-(p as f64).powi(-2)).ln_1p()).collect::<Vec<_>>()).exp();
    let a = crate::density::constant_a(m)?;
    let cbar = crate::density::constant_cbar(m)?;
    let q = q_table(m)?;
    let s0 = pairwise_sum(&q[1..]);
    let s1 = pairwise_sum(&q.iter().enumerate().skip(1).map(|(d, v)| v / d as f64).collect::<Vec<_>>());
    let value_8_11 = zeta2 * cbar / a * s0;
    let value_2_3 = zeta2 * cbar * s1;
    Ok(EulerIdentityReport {
        cutoff: m,
        value_8_11,
        value_2_3,
        residual_8_11: (value_8_11 - 8.0 / 11.0).abs(),
        residual_2_3: (value_2_3 - 2.0 / 3.0).abs(),
    })
}

/// ζ(s+2)/ζ(2s+4) · (1+2^{−s})/(1+t·2^{−s}) · Π_{2<p≤M}(1 + (2p²+p−1)/((p⁴−2p²−p+1)(p^{s+2}+1))).
/// The local factor at 2 is reproduced by t = 1/4.
pub fn l_closed_form(s: f64, m: u64, two_coefficient: f64) -> Result<f64, AnalyticError> {
    let table = sieve_primes(m.max(2))?;
    let logs: Vec<f64> = table.primes()[1..]
        .iter()
        .map(|&p| {
            let p = p as f64;
            ((2.0 * p * p + p - 1.0) / ((p.powi(4) - 2.0 * p * p - p + 1.0) * (p.powf(s + 2.0) + 1.0))).ln_1p()
        })
        .collect();
    let two = (1.0 + 2f64.powf(-s)) / (1.0 + two_coefficient * 2f64.powf(-s));
    Ok(zeta_real(s + 2.0)? / zeta_real(2.0 * s + 4.0)? * two * pairwise_sum(&logs).exp())
}

/// Σ_{d ≤ M} Q(d) d^{−s}.
pub fn l_direct(s: f64, m: u64) -> Result<f64, AnalyticError> {
    let q = q_table(m)?;
    Ok(pairwise_sum(&q.iter().enumerate().skip(1).map(|(d, v)| v * (d as f64).powf(-s)).collect::<Vec<_>>()))
}

/// |Σ_{d≤M} Q(d)d^{−s} − closed form| for s > 1/2.
pub fn l_series_check(s: f64, m: u64) -> Result<f64, AnalyticError> {
    if !(s > 0.5) {
        return Err(AnalyticError::Domain(format!("L-series check needs s > 1/2, got {s}")));
    }
    Ok((l_direct(s, m)? - l_closed_form(s, m, 0.25)?).abs())
}

/// Shape of the weight Φ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightKind {
    /// χ_[a,b].
    Indicator { a: f64, b: f64 },
    /// exp(−1/(1−t²)) with t the affine image of [a, b] onto [−1, 1].
    SmoothBump { a: f64, b: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadratureRule {
    GaussLegendre,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightFunction {
    pub kind: WeightKind,
    /// Base node count; the error estimate compares against twice as many.
    pub nodes: usize,
    pub rule: QuadratureRule,
}

impl WeightFunction {
    fn checked(kind: WeightKind) -> Result<Self, AnalyticError> {
        let (a, b) = match kind {
            WeightKind::Indicator { a, b } | WeightKind::SmoothBump { a, b } => (a, b),
        };
        if !(a > 0.0 && b > a && b.is_finite()) {
            return Err(AnalyticError::Domain(format!("weight support must satisfy 0 < a < b, got [{a}, {b}]")));
        }
        Ok(WeightFunction { kind, nodes: 16, rule: QuadratureRule::GaussLegendre })
    }

    pub fn indicator(a: f64, b: f64) -> Result<Self, AnalyticError> {
        Self::checked(WeightKind::Indicator { a, b })
    }

    pub fn smooth_bump(a: f64, b: f64) -> Result<Self, AnalyticError> {
        Self::checked(WeightKind::SmoothBump { a, b })
    }

    pub fn with_nodes(mut self, nodes: usize) -> Self {
        self.nodes = nodes.max(2);
        self
    }

    pub fn support(&self) -> (f64, f64) {
        match self.kind {
            WeightKind::Indicator { a, b } | WeightKind::SmoothBump { a, b } => (a, b),
        }
    }

    pub fn eval(&self, u: f64) -> f64 {
        let (a, b) = self.support();
        if u <= a || u >= b {
            return if matches!(self.kind, WeightKind::Indicator { .. }) && (u == a || u == b) { 1.0 } else { 0.0 };
        }
        match self.kind {
            WeightKind::Indicator { .. } => 1.0,
            WeightKind::SmoothBump { .. } => {
                let t = (2.0 * u - a - b) / (b - a);
                (-1.0 / (1.0 - t * t)).exp()
            }
        }
    }
}

/// M_Φ(Ξ) with its quadrature error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MurmurationValue {
    pub xi: f64,
    pub value: f64,
    pub quad_error: f64,
}

const ABS_TOL: f64 = 1e-9;
const MAX_DEPTH: u32 = 40;

/// Computes M_Φ(Ξ) = ∫M(Ξ/u)Φ(u)u^{1/2}du / ∫Φ(u)u^{1/2}du.
pub struct MurmurationEvaluator<'a> {
    ctx: &'a DensityContext,
}

impl<'a> MurmurationEvaluator<'a> {
    pub fn new(ctx: &'a DensityContext) -> Self {
        MurmurationEvaluator { ctx }
    }

    fn normalizer(&self, w: &WeightFunction, rules: (&GaussRule, &GaussRule)) -> Result<(f64, f64), AnalyticError> {
        let (a, b) = w.support();
        match w.kind {
            WeightKind::Indicator { .. } => Ok((2.0 / 3.0 * (b.powf(1.5) - a.powf(1.5)), 0.0)),
            WeightKind::SmoothBump { .. } => {
                let f = |u: f64| w.eval(u) * u.sqrt();
                adaptive_integrate(&f, a, b, ABS_TOL, rules, MAX_DEPTH)
                    .map_err(|(lo, hi)| AnalyticError::Quadrature { lo, hi })
            }
        }
    }

    pub fn evaluate(&self, xi: f64, w: &WeightFunction) -> Result<MurmurationValue, AnalyticError> {
        if !(xi >= 0.0 && xi.is_finite()) {
            return Err(AnalyticError::Domain(format!("Ξ must be finite and ≥ 0, got {xi}")));
        }
        if xi == 0.0 {
            return Ok(MurmurationValue { xi, value: 0.0, quad_error: 0.0 });
        }
        let lo_rule = GaussRule::new(w.nodes);
        let hi_rule = GaussRule::new(2 * w.nodes);
        let rules = (&lo_rule, &hi_rule);
        let (den, den_err) = self.normalizer(w, rules)?;
        let (a, b) = w.support();
        let shape = self.ctx.cbar * 11.0 * self.ctx.zeta2 / (4.0 * self.ctx.a);
        let y_top = (2.0 * (xi / a).sqrt()).floor() as u64 + 1;
        // (y, s_y, weight) with s_y = 4Ξ/y², the u beyond which term y vanishes.
        let terms: Vec<(f64, f64, f64)> = (1..=y_top)
            .map(|y| {
                let k = crate::arith_core::rational_to_f64(&kappa(y));
                (y as f64, 4.0 * xi / (y * y) as f64, shape * k * xi.sqrt())
            })
            .filter(|t| t.1 > a)
            .collect();
        let mut bounds = vec![a];
        bounds.extend(terms.iter().map(|t| t.1).filter(|&s| s < b));
        bounds.push(b);
        bounds.sort_by(f64::total_cmp);
        bounds.dedup();
        let minus = -11.0 * PI / (12.0 * self.ctx.a);
        let mut parts = Vec::with_capacity(bounds.len());
        let mut err = 0.0;
        for win in bounds.windows(2) {
            let (l, r) = (win[0], win[1]);
            let active: Vec<(f64, f64, f64)> = terms.iter().filter(|t| t.1 >= r).copied().collect();
            let g = |tau: f64| {
                let u = r - tau * tau;
                let mut m = minus * (xi / u).sqrt();
                for &(y, s, wt) in &active {
                    m += wt / (y * ((s - r) + tau * tau).sqrt());
                }
                2.0 * tau * m * w.eval(u) * u.sqrt()
            };
            let tol = (ABS_TOL * den * (r - l) / (b - a)).max(1e-15);
            let (v, e) = adaptive_integrate(&g, 0.0, (r - l).sqrt(), tol, rules, MAX_DEPTH)
                .map_err(|(t0, t1)| AnalyticError::Quadrature { lo: r - t1 * t1, hi: r - t0 * t0 })?;
            parts.push(v);
            err += e;
        }
        let num = pairwise_sum(&parts);
        let value = num / den;
        Ok(MurmurationValue { xi, value, quad_error: (err + value.abs() * den_err) / den })
    }

    /// Evaluate on a grid; output order follows the grid.
    pub fn evaluate_grid(&self, grid: &[f64], w: &WeightFunction) -> Result<Vec<MurmurationValue>, AnalyticError> {
        grid.par_iter().map(|&xi| self.evaluate(xi, w)).collect()
    }
}

/// Least-squares fit of log|M_Φ + 1/2| against log Ξ.
#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoteReport {
    pub slope: f64,
    pub intercept: f64,
    pub used: Vec<(f64, f64)>,
    pub dropped: Vec<f64>,
}

/// Fit from precomputed values; points with |M + 1/2| < 10·error are dropped.
pub fn asymptote_from_values(values: &[MurmurationValue]) -> Result<AsymptoteReport, AnalyticError> {
    let mut used = Vec::new();
    let mut dropped = Vec::new();
    for v in values {
        let dev = (v.value + 0.5).abs();
        if dev < 10.0 * v.quad_error || dev == 0.0 {
            dropped.push(v.xi);
        } else {
            used.push((v.xi, dev));
        }
    }
    if used.len() < 2 {
        return Err(AnalyticError::Domain(format!(
            "only {} usable points after dropping {} near-zero deviations",
            used.len(),
            dropped.len()
        )));
    }
    let n = used.len() as f64;
    let xs: Vec<f64> = used.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = used.iter().map(|p| p.1.ln()).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    Ok(AsymptoteReport { slope, intercept: my - slope * mx, used, dropped })
}

/// Slope of log|M_Φ(Ξ) + 1/2| over a grid spanning at least two decades above 10².
pub fn asymptote_report(
    eval: &MurmurationEvaluator<'_>,
    w: &WeightFunction,
    grid: &[f64],
) -> Result<AsymptoteReport, AnalyticError> {
    let (lo, hi) = grid.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &x| (l.min(x), h.max(x)));
    if grid.len() < 2 || lo < 100.0 || hi / lo < 100.0 - 1e-9 {
        return Err(AnalyticError::Domain("asymptote grid must lie in [10², ∞) and span two decades".into()));
    }
    asymptote_from_values(&eval.evaluate_grid(grid, w)?)
}

/// n log-spaced points from lo to hi.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![lo];
    }
    let (l, h) = (lo.ln(), hi.ln());
    (0..n).map(|i| (l + (h - l) * i as f64 / (n - 1) as f64).exp()).collect()
}
