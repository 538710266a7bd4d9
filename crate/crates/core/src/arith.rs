//! Number theory on machine integers: modular arithmetic, Legendre and
//! Jacobi symbols, primality, factorization, squarefree kernels and square
//! roots modulo prime powers.

use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ArithError {
    #[error("valuation of zero is undefined")]
    ZeroInput,
    #[error("{0} is not an odd prime")]
    NotOddPrime(u128),
    #[error("integer overflow")]
    Overflow,
}

/// Largest `e` with `q^e | n`.
pub fn valuation(n: i128, q: u128) -> Result<u32, ArithError> {
    if n == 0 {
        return Err(ArithError::ZeroInput);
    }
    let mut m = n.unsigned_abs();
    let mut e = 0;
    while m.is_multiple_of(q) {
        m /= q;
        e += 1;
    }
    Ok(e)
}

/// Splits `n = q^e * u` with `q ∤ u`.
pub fn split_valuation(n: i128, q: u128) -> Result<(u32, i128), ArithError> {
    let e = valuation(n, q)?;
    let mut u = n;
    for _ in 0..e {
        u /= q as i128;
    }
    Ok((e, u))
}

pub fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

pub fn checked_pow(q: u128, e: u32) -> Option<u128> {
    let mut acc: u128 = 1;
    for _ in 0..e {
        acc = acc.checked_mul(q)?;
    }
    Some(acc)
}

fn add_mod(a: u128, b: u128, m: u128) -> u128 {
    if a >= m - b {
        a - (m - b)
    } else {
        a + b
    }
}

/// `a * b mod m` without overflow for any `m < 2^128`.
pub fn mul_mod(a: u128, b: u128, m: u128) -> u128 {
    let (a, b) = (a % m, b % m);
    if m <= u64::MAX as u128 {
        return a * b % m;
    }
    let (mut acc, mut base, mut e) = (0u128, a, b);
    while e > 0 {
        if e & 1 == 1 {
            acc = add_mod(acc, base, m);
        }
        base = add_mod(base, base, m);
        e >>= 1;
    }
    acc
}

pub fn pow_mod(base: u128, mut e: u128, m: u128) -> u128 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u128;
    let mut b = base % m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    acc
}

/// Reduces a signed integer into `[0, m)`.
pub fn reduce(a: i128, m: u128) -> u128 {
    if m <= i128::MAX as u128 {
        a.rem_euclid(m as i128) as u128
    } else if a >= 0 {
        a as u128 % m
    } else {
        let r = a.unsigned_abs() % m;
        if r == 0 {
            0
        } else {
            m - r
        }
    }
}

/// Inverse of `a` modulo `m`, if `gcd(a, m) = 1`.
pub fn mod_inverse(a: i128, m: u128) -> Option<u128> {
    if m == 1 {
        return Some(0);
    }
    let (mut old_r, mut r) = (reduce(a, m), m);
    // Track Bezout coefficients modulo m to stay within u128.
    let (mut old_s, mut s) = (1u128, 0u128);
    while r != 0 {
        let quot = old_r / r;
        let next_r = old_r - quot * r;
        old_r = r;
        r = next_r;
        let qs = mul_mod(quot % m, s, m);
        let next_s = (old_s + m - qs) % m;
        old_s = s;
        s = next_s;
    }
    (old_r == 1).then_some(old_s)
}

/// Jacobi symbol `(a / n)` for odd `n > 0`.
pub fn jacobi(a: i128, n: u128) -> i8 {
    assert!(n % 2 == 1, "Jacobi symbol needs an odd modulus");
    let mut a = reduce(a, n);
    let mut n = n;
    let mut t = 1i8;
    while a != 0 {
        while a.is_multiple_of(2) {
            a /= 2;
            let r = n % 8;
            if r == 3 || r == 5 {
                t = -t;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            t = -t;
        }
        a %= n;
    }
    if n == 1 {
        t
    } else {
        0
    }
}

/// Legendre symbol `(a / p)` for an odd prime `p`.
pub fn legendre(a: i128, p: u128) -> i8 {
    jacobi(a, p)
}

const SMALL_PRIMES: [u128; 25] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97,
];

/// Miller–Rabin with the first 13 prime bases, which is deterministic for
/// `n < 3.3 * 10^24`; beyond that it is a strong probable-prime test.
pub fn is_prime(n: u128) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &SMALL_PRIMES {
        if n == p {
            return true;
        }
        if n.is_multiple_of(p) {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'bases: for &a in &SMALL_PRIMES[..13] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

pub fn is_odd_prime(n: u128) -> bool {
    n != 2 && is_prime(n)
}

fn pollard_brent(n: u128) -> u128 {
    if n.is_multiple_of(2) {
        return 2;
    }
    for c in 1u128.. {
        let f = |x: u128| add_mod(mul_mod(x, x, n), c, n);
        let (mut x, mut y, mut g) = (2u128, 2u128, 1u128);
        let mut q = 1u128;
        let mut ys = 2u128;
        let mut r = 1u64;
        let m = 128u64;
        while g == 1 {
            x = y;
            for _ in 0..r {
                y = f(y);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                for _ in 0..m.min(r - k) {
                    y = f(y);
                    q = mul_mod(q, x.abs_diff(y), n);
                }
                g = gcd(q, n);
                k += m;
            }
            r *= 2;
        }
        if g == n {
            loop {
                ys = f(ys);
                g = gcd(x.abs_diff(ys), n);
                if g > 1 {
                    break;
                }
            }
        }
        if g != n {
            return g;
        }
    }
    unreachable!()
}

/// Prime factorization as `(prime, exponent)` pairs in increasing order.
pub fn factorize(mut n: u128) -> Vec<(u128, u32)> {
    let mut out: Vec<(u128, u32)> = Vec::new();
    if n <= 1 {
        return out;
    }
    let push = |p: u128, out: &mut Vec<(u128, u32)>| match out.iter_mut().find(|(q, _)| *q == p) {
        Some(entry) => entry.1 += 1,
        None => out.push((p, 1)),
    };
    let mut p = 2u128;
    while p < 1 << 12 && p * p <= n {
        while n.is_multiple_of(p) {
            n /= p;
            push(p, &mut out);
        }
        p += if p == 2 { 1 } else { 2 };
    }
    let mut stack = vec![n];
    while let Some(m) = stack.pop() {
        if m == 1 {
            continue;
        }
        if is_prime(m) {
            push(m, &mut out);
            continue;
        }
        let f = pollard_brent(m);
        stack.push(f);
        stack.push(m / f);
    }
    out.sort_unstable();
    out
}

/// Product of the primes dividing `d` to an odd power.
pub fn squarefree_kernel(d: u128) -> u128 {
    factorize(d)
        .into_iter()
        .filter(|&(_, e)| e % 2 == 1)
        .map(|(p, _)| p)
        .product()
}

/// Squarefree kernel with the prime `p` removed.
pub fn squarefree_kernel_without(d: u128, p: u128) -> u128 {
    let r = squarefree_kernel(d);
    if r.is_multiple_of(p) {
        r / p
    } else {
        r
    }
}

/// Floor of the square root.
pub fn isqrt(n: u128) -> u128 {
    if n < 2 {
        return n;
    }
    let mut x = (n as f64).sqrt() as u128;
    while x.checked_mul(x).is_none_or(|sq| sq > n) {
        x -= 1;
    }
    while (x + 1).checked_mul(x + 1).is_some_and(|sq| sq <= n) {
        x += 1;
    }
    x
}

pub fn least_nonresidue(q: u128) -> u128 {
    (2..q).find(|&a| legendre(a as i128, q) == -1).expect("odd primes have nonresidues")
}

/// Tonelli–Shanks square root of `a` modulo an odd prime `p`.
pub fn sqrt_mod_prime(a: i128, p: u128) -> Option<u128> {
    let a = reduce(a, p);
    if a == 0 {
        return Some(0);
    }
    if legendre(a as i128, p) != 1 {
        return None;
    }
    if p % 4 == 3 {
        return Some(pow_mod(a, (p + 1) / 4, p));
    }
    let mut q = p - 1;
    let mut s = 0u32;
    while q.is_multiple_of(2) {
        q /= 2;
        s += 1;
    }
    let z = least_nonresidue(p);
    let mut m = s;
    let mut c = pow_mod(z, q, p);
    let mut t = pow_mod(a, q, p);
    let mut r = pow_mod(a, q.div_ceil(2), p);
    while t != 1 {
        let mut i = 0;
        let mut t2 = t;
        while t2 != 1 {
            t2 = mul_mod(t2, t2, p);
            i += 1;
        }
        let b = pow_mod(c, 1u128 << (m - i - 1), p);
        m = i;
        c = mul_mod(b, b, p);
        t = mul_mod(t, c, p);
        r = mul_mod(r, b, p);
    }
    Some(r)
}

/// Square root of a unit `a` modulo `p^k`, lifted by Hensel's lemma, chosen
/// in `[1, p^k / 2]`.
pub fn sqrt_mod_prime_power(a: i128, p: u128, k: u32) -> Option<u128> {
    if !is_odd_prime(p) || reduce(a, p) == 0 {
        return None;
    }
    let mut r = sqrt_mod_prime(a, p)?;
    let mut modulus = p;
    for _ in 1..k {
        modulus = modulus.checked_mul(p)?;
        let a_m = reduce(a, modulus);
        // r <- r - (r^2 - a) / (2r)
        let f = (mul_mod(r, r, modulus) + modulus - a_m) % modulus;
        let inv = mod_inverse((2 * r) as i128, modulus)?;
        r = (r + modulus - mul_mod(f, inv, modulus)) % modulus;
    }
    debug_assert_eq!(mul_mod(r, r, modulus), reduce(a, modulus));
    Some(r.min(modulus - r))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn valuations() {
        assert_eq!(valuation(4802, 7), Ok(4));
        assert_eq!(valuation(1, 13), Ok(0));
        assert_eq!(valuation(50, 5), Ok(2));
        assert_eq!(valuation(0, 5), Err(ArithError::ZeroInput));
        assert_eq!(split_valuation(-50, 5), Ok((2, -2)));
    }

    #[test]
    fn legendre_small() {
        assert_eq!(legendre(1, 7), 1);
        assert_eq!(legendre(3, 7), -1);
        assert_eq!(legendre(2, 7), 1);
        assert_eq!(legendre(14, 7), 0);
        assert_eq!(legendre(-7, 23), 1);
        assert_eq!(legendre(-7, 3), -1);
    }

    #[test]
    fn legendre_matches_euler_criterion() {
        for p in [3u128, 5, 7, 11, 13, 101, 113] {
            for a in -50i128..50 {
                let e = pow_mod(reduce(a, p), (p - 1) / 2, p);
                let expected = match e {
                    0 => 0,
                    1 => 1,
                    _ => -1,
                };
                assert_eq!(legendre(a, p), expected, "a={a} p={p}");
            }
        }
    }

    #[test]
    fn primality_and_factorization() {
        let primes: Vec<u128> = (0..200).filter(|&n| is_prime(n)).collect();
        assert_eq!(primes.len(), 46);
        assert!(is_prime(1_000_000_007));
        assert!(!is_prime(3_215_031_751)); // strong pseudoprime to bases 2,3,5,7
        assert_eq!(factorize(4802), vec![(2, 1), (7, 4)]);
        assert_eq!(factorize(1), vec![]);
        let big = 1_000_000_007u128 * 998_244_353 * 49;
        assert_eq!(factorize(big), vec![(7, 2), (998_244_353, 1), (1_000_000_007, 1)]);
    }

    #[test]
    fn kernels() {
        let d = 2 * 7u128.pow(5) * 121;
        assert_eq!(squarefree_kernel(d), 14);
        assert_eq!(squarefree_kernel_without(d, 7), 2);
        assert_eq!(squarefree_kernel(1), 1);
        assert_eq!(squarefree_kernel_without(1, 7), 1);
        let d = 2 * 25 * 7u128.pow(5) * 113;
        assert_eq!(d, 2450 * 791 * 49);
        assert_eq!(squarefree_kernel(d), 2 * 7 * 113);
        assert_eq!(squarefree_kernel_without(d, 7), 226);
    }

    #[test]
    fn modular_helpers() {
        assert_eq!(mod_inverse(226, 7), Some(4));
        assert_eq!(mod_inverse(6, 9), None);
        assert_eq!(mod_inverse(-3, 7), Some(2));
        let m = (1u128 << 100) + 277;
        assert_eq!(mul_mod(m - 1, m - 1, m), 1);
        assert_eq!(isqrt(99), 9);
        assert_eq!(isqrt(100), 10);
        assert_eq!(isqrt(u128::MAX), u64::MAX as u128);
    }

    #[test]
    fn square_roots() {
        for p in [3u128, 5, 7, 13, 17, 41, 113, 257] {
            for a in 1..p {
                match sqrt_mod_prime(a as i128, p) {
                    Some(r) => assert_eq!(r * r % p, a),
                    None => assert_eq!(legendre(a as i128, p), -1),
                }
            }
        }
        assert_eq!(sqrt_mod_prime_power(200, 7, 1), Some(2));
        for k in 1..6 {
            let m = 7u128.pow(k);
            let r = sqrt_mod_prime_power(2, 7, k).unwrap();
            assert_eq!(r * r % m, 2);
            assert!(r <= m / 2);
        }
        assert_eq!(sqrt_mod_prime_power(3, 7, 3), None);
    }
}
