/// Prime factorization n = Π pᵢ^eᵢ with increasing primes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    n: u64,
    factors: Vec<(u64, u32)>,
}

impl Factorization {
    /// Trial division; adequate for the sizes used outside sieved ranges.
    pub fn of(n: u64) -> Self {
        assert!(n >= 1, "factorization of 0");
        let mut factors = Vec::new();
        let mut m = n;
        let mut push = |p: u64, m: &mut u64| {
            let mut e = 0;
            while *m % p == 0 {
                *m /= p;
                e += 1;
            }
            if e > 0 {
                factors.push((p, e));
            }
        };
        push(2, &mut m);
        let mut d = 3;
        while d * d <= m {
            push(d, &mut m);
            d += 2;
        }
        if m > 1 {
            factors.push((m, 1));
        }
        Factorization { n, factors }
    }

    pub(crate) fn from_parts(n: u64, factors: Vec<(u64, u32)>) -> Self {
        Factorization { n, factors }
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }

    /// Number of distinct prime divisors ω(n).
    pub fn omega(&self) -> u32 {
        self.factors.len() as u32
    }

    /// Exponent of `p` in n.
    pub fn valuation(&self, p: u64) -> u32 {
        self.factors.iter().find(|&&(q, _)| q == p).map_or(0, |&(_, e)| e)
    }

    pub fn rad(&self) -> u64 {
        self.factors.iter().map(|&(p, _)| p).product()
    }

    /// Squarefree part k(n): product of primes with odd exponent.
    pub fn squarefree_part(&self) -> u64 {
        self.factors.iter().filter(|&&(_, e)| e % 2 == 1).map(|&(p, _)| p).product()
    }

    pub fn is_squarefree(&self) -> bool {
        self.factors.iter().all(|&(_, e)| e == 1)
    }

    pub fn mobius(&self) -> i8 {
        if !self.is_squarefree() {
            0
        } else if self.factors.len() % 2 == 0 {
            1
        } else {
            -1
        }
    }

    /// Number of divisors d(n).
    pub fn divisor_count(&self) -> u64 {
        self.factors.iter().map(|&(_, e)| u64::from(e) + 1).product()
    }

    /// All divisors in increasing order.
    pub fn divisors(&self) -> Vec<u64> {
        let mut ds = vec![1u64];
        for &(p, e) in &self.factors {
            let cur = ds.clone();
            let mut pk = 1;
            for _ in 0..e {
                pk *= p;
                ds.extend(cur.iter().map(|d| d * pk));
            }
        }
        ds.sort_unstable();
        ds
    }

    /// The odd primes dividing n.
    pub fn odd_primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.factors.iter().map(|&(p, _)| p).filter(|&p| p != 2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn products_round_trip() {
        for n in 1..3000u64 {
            let f = Factorization::of(n);
            let back: u64 = f.factors().iter().map(|&(p, e)| p.pow(e)).product();
            assert_eq!(back, n);
            assert!(f.factors().windows(2).all(|w| w[0].0 < w[1].0));
        }
    }

    #[test]
    fn derived_quantities() {
        let f = Factorization::of(360);
        assert_eq!(f.omega(), 3);
        assert_eq!(f.valuation(2), 3);
        assert_eq!(f.rad(), 30);
        assert_eq!(f.squarefree_part(), 10);
        assert_eq!(f.divisor_count(), 24);
        assert_eq!(f.divisors().len(), 24);
        assert_eq!(Factorization::of(1).divisors(), vec![1]);
        assert_eq!(Factorization::of(30).mobius(), -1);
    }
}
