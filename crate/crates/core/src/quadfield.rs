//! The discriminant family: squarefree D ≡ 3 (mod 4), D > 3, in a window
//! [X, X+Y]; class numbers h(−D) by reduced forms and by the finite
//! Dirichlet character sum; and the norm equation x² + Dy² = 4p.
//!
//! Class numbers may be persisted in a [`ClassNumberCache`]. The cache file is
//! plain text:
//!
//! ```text
//! # murmur class-number cache
//! # version=1 methods=dirichlet,forms entries=<N> sha256=<hex digest of the body>
//! D,h,method
//! 7,1,dirichlet
//! ...
//! ```
//!
//! The digest covers every line after the header comments, so truncation or
//! edits are reported as corruption instead of silently producing wrong
//! class numbers.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::arith_core::{
    chi_minus_d, exact_sqrt, isqrt, kronecker, pairwise_sum, sieve_mobius, sieve_primes,
    ArithError, Factorization, PrimeTable,
};

pub const CACHE_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum QuadError {
    #[error("invalid window: {0}")]
    Window(String),
    #[error("{0} is not a family discriminant (need D squarefree, D ≡ 3 mod 4, D > 3)")]
    NotInFamily(u64),
    #[error("ν({d}, {p}) = {count} > 1 contradicts the uniqueness of principal norm solutions")]
    InvariantViolation { d: u64, p: u64, count: usize },
    #[error("class-number cache corrupt: {0}")]
    CacheCorrupt(String),
    #[error("cache i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Arith(#[from] ArithError),
}

/// The window [X, X+Y].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DiscriminantWindow {
    pub x: u64,
    pub y: u64,
}

impl DiscriminantWindow {
    /// Y is not required to be small against X: Y = X realizes the weight χ_[1,2].
    pub fn new(x: u64, y: u64) -> Result<Self, QuadError> {
        if x == 0 || y == 0 {
            return Err(QuadError::Window(format!("X = {x}, Y = {y} must be positive")));
        }
        if x + y > crate::arith_core::MAX_SIEVE_LIMIT {
            return Err(QuadError::Arith(ArithError::ResourceLimit {
                requested: x + y,
                budget: crate::arith_core::MAX_SIEVE_LIMIT,
            }));
        }
        Ok(DiscriminantWindow { x, y })
    }

    pub fn hi(&self) -> u64 {
        self.x + self.y
    }

    pub fn contains(&self, d: u64) -> bool {
        d >= self.x && d <= self.hi()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ClassNumberMethod {
    Forms,
    Dirichlet,
}

impl fmt::Display for ClassNumberMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClassNumberMethod::Forms => "forms",
            ClassNumberMethod::Dirichlet => "dirichlet",
        })
    }
}

impl std::str::FromStr for ClassNumberMethod {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "forms" => Ok(ClassNumberMethod::Forms),
            "dirichlet" => Ok(ClassNumberMethod::Dirichlet),
            other => Err(format!("unknown class-number method {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscriminantRecord {
    pub d: u64,
    pub h: u64,
    /// L(1, χ_{−D}) = πh/√D.
    pub l1: f64,
    pub method: ClassNumberMethod,
}

impl DiscriminantRecord {
    pub fn new(d: u64, h: u64, method: ClassNumberMethod) -> Self {
        DiscriminantRecord { d, h, l1: PI * h as f64 / (d as f64).sqrt(), method }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NormSolution {
    pub d: u64,
    pub p: u64,
    pub x: u64,
    pub y: u64,
}

pub fn is_family_member(d: u64) -> bool {
    d > 3 && d % 4 == 3 && Factorization::of(d).is_squarefree()
}

fn check_member(d: u64) -> Result<(), QuadError> {
    if is_family_member(d) {
        Ok(())
    } else {
        Err(QuadError::NotInFamily(d))
    }
}

/// Squarefree D ≡ 3 (mod 4) in the window, ascending, D = 3 excluded.
pub fn enumerate_family(window: &DiscriminantWindow) -> Result<Vec<u64>, QuadError> {
    let mob = sieve_mobius(window.x, window.hi())?;
    Ok((window.x..=window.hi())
        .filter(|&d| d > 3 && d % 4 == 3 && mob.is_squarefree(d))
        .collect())
}

/// h(−D) as the number of reduced forms (a, b, c) with b² − 4ac = −D.
pub fn class_number_forms(d: u64) -> Result<u64, QuadError> {
    check_member(d)?;
    let mut h = 0;
    // b ≡ D (mod 2) and |b| ≤ a ≤ c force b² ≤ D/3.
    let mut b = 1;
    while 3 * b * b <= d {
        let n = (b * b + d) / 4;
        for a in b.max(1)..=isqrt(n) {
            if n % a == 0 {
                let c = n / a;
                h += if a == b || a == c { 1 } else { 2 };
            }
        }
        b += 2;
    }
    Ok(h)
}

/// h(−D) = (2 − χ(2))⁻¹ Σ_{0<a<D/2} χ_{−D}(a), together with L(1, χ_{−D}).
pub fn class_number_dirichlet(d: u64) -> Result<(u64, f64), QuadError> {
    check_member(d)?;
    let s: i64 = (1..=d / 2).map(|a| i64::from(kronecker(-(d as i64), a as i64))).sum();
    let h = dirichlet_finish(d, s);
    Ok((h, PI * h as f64 / (d as f64).sqrt()))
}

fn dirichlet_finish(d: u64, s: i64) -> u64 {
    let chi2 = if d % 8 == 7 { 1 } else { -1 };
    let denom = 2 - chi2;
    assert!(s > 0 && s % denom == 0, "character sum {s} for D = {d} not a positive multiple of {denom}");
    (s / denom) as u64
}

/// Batch Dirichlet class numbers: χ_{−D} is evaluated at primes only and
/// extended multiplicatively through a shared smallest-prime-factor table.
pub struct ClassNumberEngine {
    table: PrimeTable,
}

impl ClassNumberEngine {
    pub fn new(max_d: u64) -> Result<Self, QuadError> {
        Ok(ClassNumberEngine { table: sieve_primes((max_d / 2).max(2))? })
    }

    pub fn class_number(&self, d: u64) -> Result<u64, QuadError> {
        check_member(d)?;
        let half = (d / 2) as usize;
        if half as u64 > self.table.limit() {
            return class_number_dirichlet(d).map(|(h, _)| h);
        }
        let mut chi = vec![0i8; half + 1];
        let mut s: i64 = 0;
        for a in 1..=half {
            let v = if a == 1 {
                1
            } else {
                let p = self.table.smallest_prime_factor(a as u64) as usize;
                if p == a {
                    if p == 2 {
                        if d % 8 == 7 { 1 } else { -1 }
                    } else {
                        chi_minus_d(d, p as u64) as i8
                    }
                } else {
                    chi[p] * chi[a / p]
                }
            };
            chi[a] = v;
            s += i64::from(v);
        }
        Ok(dirichlet_finish(d, s))
    }

    pub fn record(&self, d: u64) -> Result<DiscriminantRecord, QuadError> {
        Ok(DiscriminantRecord::new(d, self.class_number(d)?, ClassNumberMethod::Dirichlet))
    }
}

/// Records for every family member of the window, in ascending D. Cached
/// entries are reused and newly computed ones are added to the cache.
pub fn compute_family(
    window: &DiscriminantWindow,
    cache: Option<&mut ClassNumberCache>,
) -> Result<Vec<DiscriminantRecord>, QuadError> {
    let ds = enumerate_family(window)?;
    let cached: Vec<Option<DiscriminantRecord>> = ds
        .iter()
        .map(|&d| cache.as_ref().and_then(|c| c.get(d)))
        .collect();
    let missing = cached.iter().filter(|c| c.is_none()).count();
    let engine = if missing > 0 { Some(ClassNumberEngine::new(window.hi())?) } else { None };
    let records: Vec<DiscriminantRecord> = ds
        .par_iter()
        .zip(cached.into_par_iter())
        .map(|(&d, hit)| match hit {
            Some(r) => Ok(r),
            None => engine.as_ref().expect("engine built when entries are missing").record(d),
        })
        .collect::<Result<_, _>>()?;
    if let Some(c) = cache {
        for r in &records {
            c.insert(r.d, r.h, r.method);
        }
    }
    Ok(records)
}

/// Σ_{n ≤ T} χ_{−D}(n)/n in pairwise order.
pub fn l1_partial_sum(d: u64, t: u64) -> f64 {
    let terms: Vec<f64> = (1..=t)
        .map(|n| f64::from(kronecker(-(d as i64), n as i64)) / n as f64)
        .collect();
    pairwise_sum(&terms)
}

/// All x, y > 0 with x² + Dy² = 4p.
pub fn norm_solutions(d: u64, p: u64) -> Vec<NormSolution> {
    let four_p = 4 * p;
    let mut out = Vec::new();
    let mut y = 1;
    while d * y * y < four_p {
        if let Some(x) = exact_sqrt(four_p - d * y * y) {
            out.push(NormSolution { d, p, x, y });
        }
        y += 1;
    }
    out
}

/// ν(D, p); more than one solution is reported as an invariant violation.
pub fn nu(d: u64, p: u64) -> Result<u8, QuadError> {
    match norm_solutions(d, p).len() {
        n @ 0..=1 => Ok(n as u8),
        count => Err(QuadError::InvariantViolation { d, p, count }),
    }
}

/// On-disk class numbers keyed by D.
#[derive(Debug, Clone, Default)]
pub struct ClassNumberCache {
    entries: BTreeMap<u64, (u64, ClassNumberMethod)>,
}

impl ClassNumberCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, d: u64) -> Option<DiscriminantRecord> {
        self.entries.get(&d).map(|&(h, m)| DiscriminantRecord::new(d, h, m))
    }

    pub fn insert(&mut self, d: u64, h: u64, method: ClassNumberMethod) {
        self.entries.insert(d, (h, method));
    }

    /// Loads a cache file; a missing file yields an empty cache.
    pub fn load(path: &Path) -> Result<Self, QuadError> {
        if !path.exists() {
            return Ok(Self::new());
        }
        let text = fs::read_to_string(path)?;
        let mut lines = text.lines();
        let corrupt = |m: &str| QuadError::CacheCorrupt(format!("{}: {m}", path.display()));
        if lines.next() != Some("# murmur class-number cache") {
            return Err(corrupt("missing banner"));
        }
        let meta = lines.next().ok_or_else(|| corrupt("missing metadata"))?;
        let fields: BTreeMap<&str, &str> = meta
            .trim_start_matches('#')
            .split_whitespace()
            .filter_map(|kv| kv.split_once('='))
            .collect();
        if fields.get("version") != Some(&CACHE_VERSION.to_string().as_str()) {
            return Err(corrupt("unsupported version"));
        }
        let body: Vec<&str> = lines.collect();
        let digest = body_digest(&body);
        if fields.get("sha256") != Some(&digest.as_str()) {
            return Err(corrupt("checksum mismatch"));
        }
        let joined = body.join("\n");
        let mut reader = csv::ReaderBuilder::new().from_reader(joined.as_bytes());
        let mut cache = Self::new();
        for row in reader.records() {
            let row = row.map_err(|e| corrupt(&e.to_string()))?;
            let parse = |i: usize| row.get(i).ok_or_else(|| corrupt("short row"));
            let d: u64 = parse(0)?.parse().map_err(|_| corrupt("bad D"))?;
            let h: u64 = parse(1)?.parse().map_err(|_| corrupt("bad h"))?;
            let m: ClassNumberMethod = parse(2)?.parse().map_err(|e: String| corrupt(&e))?;
            if !is_family_member(d) || h == 0 {
                return Err(corrupt(&format!("invalid record D = {d}, h = {h}")));
            }
            cache.insert(d, h, m);
        }
        let expected: usize = fields
            .get("entries")
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| corrupt("missing entry count"))?;
        if expected != cache.len() {
            return Err(corrupt("entry count mismatch"));
        }
        Ok(cache)
    }

    /// Writes the cache through a temporary file and an atomic rename.
    pub fn save(&self, path: &Path) -> Result<(), QuadError> {
        let mut body = vec!["D,h,method".to_string()];
        body.extend(self.entries.iter().map(|(d, (h, m))| format!("{d},{h},{m}")));
        let refs: Vec<&str> = body.iter().map(String::as_str).collect();
        let tmp = path.with_extension("tmp");
        {
            let mut f = fs::File::create(&tmp)?;
            writeln!(f, "# murmur class-number cache")?;
            writeln!(
                f,
                "# version={CACHE_VERSION} methods=dirichlet,forms entries={} sha256={}",
                self.entries.len(),
                body_digest(&refs)
            )?;
            for line in &body {
                writeln!(f, "{line}")?;
            }
        }
        fs::rename(&tmp, path)?;
        Ok(())
    }
}

fn body_digest(lines: &[&str]) -> String {
    let mut h = Sha256::new();
    for l in lines {
        h.update(l.as_bytes());
        h.update(b"\n");
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Counts forms by scanning all (a, b) pairs with |b| ≤ a; independent of
    /// the divisor loop used in `class_number_forms`.
    fn naive_forms(d: i64) -> u64 {
        let mut h = 0;
        for a in 1..=d {
            if 3 * a * a > d {
                break;
            }
            for b in -a..=a {
                let num = b * b + d;
                if num % (4 * a) != 0 {
                    continue;
                }
                let c = num / (4 * a);
                if c < a || ((b.abs() == a || a == c) && b < 0) {
                    continue;
                }
                h += 1;
            }
        }
        h
    }

    #[test]
    fn family_examples() {
        let w = |x, y| DiscriminantWindow::new(x, y).unwrap();
        assert_eq!(enumerate_family(&w(4, 10)).unwrap(), vec![7, 11]);
        assert_eq!(enumerate_family(&w(15, 10)).unwrap(), vec![15, 19, 23]);
        assert!(enumerate_family(&w(48, 1)).unwrap().is_empty());
        assert_eq!(enumerate_family(&w(2, 2)).unwrap(), Vec::<u64>::new());
        assert!(DiscriminantWindow::new(0, 11).is_err());
    }

    #[test]
    fn class_number_examples() {
        assert_eq!(class_number_forms(7).unwrap(), 1);
        assert_eq!(class_number_forms(23).unwrap(), 3);
        assert_eq!(class_number_forms(47).unwrap(), 5);
        assert_eq!(class_number_dirichlet(7).unwrap().0, 1);
        assert_eq!(class_number_dirichlet(23).unwrap().0, 3);
        assert_eq!(class_number_dirichlet(163).unwrap().0, 1);
        assert!(class_number_forms(3).is_err());
        assert!(class_number_forms(27).is_err());
        assert!(class_number_dirichlet(9).is_err());
    }

    #[test]
    fn methods_agree_with_naive_count() {
        let engine = ClassNumberEngine::new(5000).unwrap();
        for d in (7..5000).filter(|&d| is_family_member(d)) {
            let h = naive_forms(d as i64);
            assert_eq!(class_number_forms(d).unwrap(), h, "D={d}");
            assert_eq!(class_number_dirichlet(d).unwrap().0, h, "D={d}");
            assert_eq!(engine.class_number(d).unwrap(), h, "D={d}");
            assert!(h as f64 <= (d as f64).sqrt() * ((d as f64).ln() + 2.0));
        }
    }

    #[test]
    fn class_number_formula_consistency() {
        for d in [7u64, 23, 163, 1019, 9999] {
            if let Ok((h, l1)) = class_number_dirichlet(d) {
                assert!((h as f64 - (d as f64).sqrt() / PI * l1).abs() < 0.5);
            }
        }
    }

    #[test]
    fn partial_sums() {
        assert_eq!(l1_partial_sum(7, 1), 1.0);
        assert_eq!(l1_partial_sum(7, 2), 1.5);
        for d in (7..1000u64).filter(|&d| is_family_member(d)).step_by(7) {
            let (h, _) = class_number_dirichlet(d).unwrap();
            let l1 = PI * h as f64 / (d as f64).sqrt();
            let t = (100.0 * (d as f64).sqrt()) as u64;
            assert!((l1 - l1_partial_sum(d, t)).abs() < 0.05, "D={d}");
        }
    }

    #[test]
    fn norm_equation_examples() {
        assert_eq!(norm_solutions(19, 7), vec![NormSolution { d: 19, p: 7, x: 3, y: 1 }]);
        assert_eq!(norm_solutions(7, 11), vec![NormSolution { d: 7, p: 11, x: 4, y: 2 }]);
        assert_eq!(nu(19, 7).unwrap(), 1);
        assert_eq!(nu(15, 17).unwrap(), 0);
        assert_eq!(nu(7, 11).unwrap(), 1);
        // (−7/5) = −1: 5 is inert in Q(√−7)
        assert!(norm_solutions(7, 5).is_empty());
    }

    #[test]
    fn at_most_one_norm_solution() {
        let table = sieve_primes(1000).unwrap();
        for d in (7..=10_000u64).filter(|&d| is_family_member(d)) {
            for &p in &table.primes()[1..] {
                if kronecker(-(d as i64), p as i64) == 1 {
                    assert!(nu(d, p).is_ok(), "D={d} p={p}");
                }
            }
        }
    }

    #[test]
    fn cache_round_trip_and_corruption() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("h.cache");
        let w = DiscriminantWindow::new(1000, 500).unwrap();
        let mut cache = ClassNumberCache::load(&path).unwrap();
        let first = compute_family(&w, Some(&mut cache)).unwrap();
        cache.save(&path).unwrap();
        let mut again = ClassNumberCache::load(&path).unwrap();
        assert_eq!(again.len(), first.len());
        assert_eq!(compute_family(&w, Some(&mut again)).unwrap(), first);

        let text = fs::read_to_string(&path).unwrap();
        fs::write(&path, text.replacen("1003,", "1003,9", 1)).unwrap();
        assert!(matches!(ClassNumberCache::load(&path), Err(QuadError::CacheCorrupt(_))));
        fs::write(&path, "garbage").unwrap();
        assert!(matches!(ClassNumberCache::load(&path), Err(QuadError::CacheCorrupt(_))));
    }

    proptest! {
        #[test]
        fn norm_solutions_satisfy_equation(d in 4u64..5000, p_idx in 1usize..150) {
            let table = sieve_primes(1000).unwrap();
            let p = table.primes()[p_idx];
            for s in norm_solutions(d, p) {
                prop_assert_eq!(s.x * s.x + d * s.y * s.y, 4 * p);
                prop_assert!(s.x > 0 && s.y > 0);
            }
        }

        #[test]
        fn family_members_have_valid_shape(x in 4u64..100_000, y in 1u64..2000) {
            let w = DiscriminantWindow::new(x, y).unwrap();
            let fam = enumerate_family(&w).unwrap();
            prop_assert!(fam.windows(2).all(|p| p[0] < p[1]));
            for d in fam {
                prop_assert!(is_family_member(d) && w.contains(d));
            }
        }
    }
}
