//! Small-integer number theory helpers.

use alloc::vec::Vec;

pub fn gcd(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.unsigned_abs(), b.unsigned_abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a as i128
}

pub fn gcd_u64(a: u64, b: u64) -> u64 {
    gcd(a as i128, b as i128) as u64
}

pub fn lcm_u64(a: u64, b: u64) -> u64 {
    if a == 0 || b == 0 {
        return 0;
    }
    a / gcd_u64(a, b) * b
}

pub fn modp(a: i128, m: u64) -> u64 {
    a.rem_euclid(m as i128) as u64
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn mod_inv(a: i128, m: u64) -> Option<u64> {
    if m == 1 {
        return Some(0);
    }
    let (mut r0, mut r1) = (m as i128, a.rem_euclid(m as i128));
    let (mut s0, mut s1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    if r0 != 1 {
        return None;
    }
    Some(s0.rem_euclid(m as i128) as u64)
}

/// Prime factorization by trial division, as (prime, exponent) pairs in increasing order.
pub fn factor(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p.saturating_mul(p) <= n {
        if n.is_multiple_of(p) {
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Returns (p, k) when `n = p^k` with k ≥ 1.
pub fn prime_power(n: u64) -> Option<(u64, u32)> {
    let f = factor(n);
    if f.len() == 1 {
        Some(f[0])
    } else {
        None
    }
}

pub fn binom2(n: i128) -> i128 {
    n * (n - 1) / 2
}

/// Legendre symbol (a/p) for an odd prime p.
pub fn legendre(a: i128, p: u64) -> i8 {
    let a = modp(a, p);
    if a == 0 {
        return 0;
    }
    let mut base = a as u128;
    let mut e = (p - 1) / 2;
    let m = p as u128;
    let mut acc = 1u128;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % m;
        }
        base = base * base % m;
        e >>= 1;
    }
    if acc == 1 {
        1
    } else {
        -1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factor_small() {
        assert_eq!(factor(360), alloc::vec![(2, 3), (3, 2), (5, 1)]);
        assert_eq!(factor(1), alloc::vec![]);
        assert_eq!(prime_power(32), Some((2, 5)));
        assert_eq!(prime_power(12), None);
    }

    #[test]
    fn inverses_and_symbols() {
        assert_eq!(mod_inv(3, 8), Some(3));
        assert_eq!(mod_inv(2, 8), None);
        assert_eq!(legendre(2, 7), 1);
        assert_eq!(legendre(3, 7), -1);
    }
}
