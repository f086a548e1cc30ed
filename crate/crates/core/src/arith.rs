//! Word-sized modular arithmetic shared by the ring, counting and survey code.

/// `x * y mod m` without overflow for any `m < 2^64`.
#[inline]
pub fn mul_mod(x: u64, y: u64, m: u64) -> u64 {
    ((x as u128 * y as u128) % m as u128) as u64
}

#[inline]
pub fn add_mod(x: u64, y: u64, m: u64) -> u64 {
    let s = x as u128 + y as u128;
    if s >= m as u128 {
        (s - m as u128) as u64
    } else {
        s as u64
    }
}

#[inline]
pub fn sub_mod(x: u64, y: u64, m: u64) -> u64 {
    if x >= y {
        x - y
    } else {
        m - (y - x)
    }
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Reduces a signed integer into `[0, m)`.
#[inline]
pub fn reduce_i64(v: i64, m: u64) -> u64 {
    v.rem_euclid(m as i64) as u64
}

#[inline]
pub fn reduce_i128(v: i128, m: u64) -> u64 {
    v.rem_euclid(m as i128) as u64
}

/// Inverse of `x` modulo `m`, if `gcd(x, m) = 1`.
pub fn inv_mod(x: u64, m: u64) -> Option<u64> {
    let (mut r0, mut r1) = (m as i128, (x % m) as i128);
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

pub fn is_prime(n: u64) -> bool {
    primal::is_prime(n)
}

/// All primes `<= limit`, ascending.
pub fn primes_up_to(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    primal::Primes::all()
        .take_while(|&p| p as u64 <= limit)
        .map(|p| p as u64)
        .collect()
}

/// Legendre symbol `(v | p)` for an odd prime `p`.
pub fn legendre(v: u64, p: u64) -> i8 {
    let v = v % p;
    if v == 0 {
        return 0;
    }
    if pow_mod(v, (p - 1) / 2, p) == 1 {
        1
    } else {
        -1
    }
}

/// Multiplicative order of `a` modulo the prime `p`, or `None` if `p | a`.
pub fn multiplicative_order(a: i64, p: u64) -> Option<u64> {
    let a = reduce_i64(a, p);
    if a == 0 {
        return None;
    }
    let mut order = p - 1;
    for (q, _) in factorize(p - 1) {
        while order.is_multiple_of(q) && pow_mod(a, order / q, p) == 1 {
            order /= q;
        }
    }
    Some(order)
}

/// Trial-division factorisation, ascending primes with multiplicity.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut q = 2u64;
    while q * q <= n {
        if n.is_multiple_of(q) {
            let mut e = 0;
            while n.is_multiple_of(q) {
                n /= q;
                e += 1;
            }
            out.push((q, e));
        }
        q += if q == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Integer square root (floor).
pub fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r.checked_mul(r).is_none_or(|s| s > n) {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).is_some_and(|s| s <= n) {
        r += 1;
    }
    r
}

/// A deterministic 64-bit seed from a tuple of words (splitmix64 chaining).
pub fn seed_from(words: &[u64]) -> u64 {
    let mut h = 0x9e37_79b9_7f4a_7c15u64;
    for &w in words {
        h ^= w;
        h = h.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = h;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        h = z ^ (z >> 31);
    }
    h
}
