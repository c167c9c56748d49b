/// (−1)^((a²−1)/8) indexed by a mod 8.
const TAB2: [i32; 8] = [0, 1, 0, -1, 0, -1, 0, 1];

/// Kronecker symbol (a/n) for arbitrary integers, binary algorithm.
///
/// Conventions: (a/0) = 1 if |a| = 1 else 0, (a/−1) = sign(a) (with (0/−1) = 1),
/// (a/2) = 0 for even a and (−1)^((a²−1)/8) for odd a.
pub fn kronecker(a: i64, n: i64) -> i32 {
    if n == 0 {
        return i32::from(a == 1 || a == -1);
    }
    if a & 1 == 0 && n & 1 == 0 {
        return 0;
    }
    let mut a = i128::from(a);
    let mut b = i128::from(n);
    let v = b.trailing_zeros();
    b >>= v;
    let mut k = if v & 1 == 0 { 1 } else { TAB2[(a & 7) as usize] };
    if b < 0 {
        b = -b;
        if a < 0 {
            k = -k;
        }
    }
    loop {
        if a == 0 {
            return if b > 1 { 0 } else { k };
        }
        let v = a.trailing_zeros();
        a >>= v;
        if v & 1 == 1 {
            k *= TAB2[(b & 7) as usize];
        }
        if a & b & 2 != 0 {
            k = -k;
        }
        let r = a.abs();
        a = b % r;
        b = r;
    }
}

/// Jacobi symbol (a/n) for odd n > 0 on unsigned operands; the hot-loop variant.
#[inline]
pub fn jacobi(mut a: u64, mut n: u64) -> i32 {
    debug_assert!(n & 1 == 1);
    a %= n;
    let mut k = 1;
    while a != 0 {
        let v = a.trailing_zeros();
        a >>= v;
        if v & 1 == 1 && (n & 7 == 3 || n & 7 == 5) {
            k = -k;
        }
        if a & n & 2 != 0 {
            k = -k;
        }
        let r = a;
        a = n % r;
        n = r;
    }
    if n == 1 {
        k
    } else {
        0
    }
}

/// χ_{−D}(p) = (−D/p) for an odd prime p, via the Jacobi routine.
#[inline]
pub fn chi_minus_d(d: u64, p: u64) -> i32 {
    let r = d % p;
    jacobi(if r == 0 { 0 } else { p - r }, p)
}
