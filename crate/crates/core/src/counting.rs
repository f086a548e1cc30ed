//! Traces of Frobenius, point counts over extensions, and points of order `p`.

use std::collections::HashMap;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{isqrt, mul_mod, pow_mod, reduce_i64, seed_from};
use crate::curves::{CurveError, CurvePoint, FieldCurve, FieldPoint, ShortCurve};
use crate::rings::{FiniteField, Ring};

/// Primes up to this bound use the character sum; larger ones use BSGS.
pub const DEFAULT_BSGS_THRESHOLD: u64 = 100_000;

/// Smallest prime for which BSGS order finding is attempted.
pub const BSGS_MIN_PRIME: u64 = 229;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CountingError {
    #[error("curve is singular")]
    SingularCurve,
    #[error("group order is not determined by the sampled points")]
    AmbiguousOrder,
    #[error("curve has no point of order p over this field")]
    NoPTorsion,
    #[error("no point of order p found after {0} samples")]
    SampleExhausted(u64),
    #[error("operation requires the prime field")]
    NotPrimeField,
    #[error(transparent)]
    Curve(#[from] CurveError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TraceMethod {
    CharSum,
    Bsgs,
    Enumeration,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceData {
    pub p: u64,
    pub ap: i64,
    pub method: TraceMethod,
}

/// Quadratic character table of `F_p`.
#[derive(Debug, Clone)]
pub struct SquareTable {
    p: u64,
    chi: Vec<i8>,
}

impl SquareTable {
    pub fn new(p: u64) -> Self {
        let mut chi = vec![-1i8; p as usize];
        chi[0] = 0;
        for x in 1..=(p - 1) / 2 {
            chi[(x * x % p) as usize] = 1;
        }
        SquareTable { p, chi }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    #[inline]
    pub fn chi(&self, v: u64) -> i8 {
        self.chi[v as usize]
    }
}

/// `4a^3 + 27b^2 != 0 mod p`.
pub fn is_nonsingular(a: u64, b: u64, p: u64) -> bool {
    let a3 = mul_mod(mul_mod(a, a, p), a, p);
    !(mul_mod(4, a3, p) + mul_mod(27, mul_mod(b, b, p), p)).is_multiple_of(p)
}

/// `a_p = -sum_x chi(x^3 + a x + b)` with `a, b` in `[0, p)`.
///
/// The cubic is stepped by finite differences, so the loop body is three
/// modular additions and one table lookup.
pub fn ap_charsum_with(a: u64, b: u64, table: &SquareTable) -> Result<i64, CountingError> {
    let p = table.p;
    if !is_nonsingular(a, b, p) {
        return Err(CountingError::SingularCurve);
    }
    let wrap = |v: u64| if v >= p { v - p } else { v };
    // f(0) = b, f(1) - f(0) = 1 + a, second difference 6x + 6, third 6.
    let mut f = b;
    let mut d1 = wrap(1 % p + a);
    let mut d2 = 6 % p;
    let six = 6 % p;
    let mut sum = 0i64;
    for _ in 0..p {
        sum += table.chi(f) as i64;
        f = wrap(f + d1);
        d1 = wrap(d1 + d2);
        d2 = wrap(d2 + six);
    }
    Ok(-sum)
}

pub fn ap_charsum(a: u64, b: u64, p: u64) -> Result<TraceData, CountingError> {
    let ap = ap_charsum_with(a % p, b % p, &SquareTable::new(p))?;
    Ok(TraceData {
        p,
        ap,
        method: TraceMethod::CharSum,
    })
}

fn prime_field_coeffs(c: &FieldCurve) -> Result<(u64, u64), CountingError> {
    match (
        c.a().as_prime_field(),
        c.b().as_prime_field(),
        c.ring().degree(),
    ) {
        (Some(a), Some(b), 1) => Ok((a, b)),
        _ => Err(CountingError::NotPrimeField),
    }
}

/// `a_p` of a curve over `F_p` by character sum.
pub fn curve_ap_charsum(c: &FieldCurve) -> Result<TraceData, CountingError> {
    let (a, b) = prime_field_coeffs(c)?;
    ap_charsum(a, b, c.ring().p())
}

/// `q + 1 - #E(F_q)` by full enumeration.
pub fn trace_by_enumeration(c: &FieldCurve) -> Result<BigInt, CountingError> {
    let n = c.enumerate_points()?.len();
    Ok(BigInt::from(c.ring().order().clone()) + 1 - n)
}

/// A random affine point, or `None` when the sampled `x` gives a non-square.
fn sample_point<R: Rng>(c: &FieldCurve, rng: &mut R) -> Option<FieldPoint> {
    let f = c.ring();
    let x = f.random_element(rng);
    let y = f.sqrt(&c.rhs(&x))?;
    let y = if rng.gen::<bool>() { f.neg(&y) } else { y };
    Some(CurvePoint::Affine(x, y))
}

/// All `m` in `[lo, hi]` with `[m]P = O`, by baby-step giant-step.
fn annihilators_in_interval(c: &FieldCurve, pt: &FieldPoint, lo: u64, hi: u64) -> Vec<u64> {
    let width = hi - lo + 1;
    let s = isqrt(width) + 1;
    let mut baby: HashMap<FieldPoint, u64> = HashMap::with_capacity(s as usize);
    let mut acc = CurvePoint::Infinity;
    for j in 0..s {
        if j > 0 && acc.is_infinity() {
            // ord(P) = j is small: the answers are its multiples.
            let start = lo.div_ceil(j) * j;
            return (start..=hi).step_by(j as usize).collect();
        }
        baby.insert(acc, j);
        acc = c.add(&acc, pt).expect("complete");
    }
    let step = c.mul(s, pt);
    let mut giant = c.mul(lo, pt);
    let mut out = Vec::new();
    let mut base = lo;
    while base <= hi {
        if let Some(&j) = baby.get(&c.neg(&giant)) {
            if base + j <= hi {
                out.push(base + j);
            }
        }
        giant = c.add(&giant, &step).expect("complete");
        base += s;
    }
    out
}

/// `a_p` by baby-step giant-step on the curve and its quadratic twist.
pub fn ap_bsgs(a: u64, b: u64, p: u64) -> Result<TraceData, CountingError> {
    if p < BSGS_MIN_PRIME {
        return ap_charsum(a, b, p);
    }
    let (a, b) = (a % p, b % p);
    if !is_nonsingular(a, b, p) {
        return Err(CountingError::SingularCurve);
    }
    let f = FiniteField::prime(p).map_err(CurveError::from)?;
    let curve = ShortCurve::from_ints(f.clone(), a as i64, b as i64)?;
    // Twist by a non-residue g: (a g^2, b g^3).
    let g = (2..p)
        .find(|&g| pow_mod(g, (p - 1) / 2, p) == p - 1)
        .unwrap();
    let tw_a = mul_mod(a, mul_mod(g, g, p), p);
    let tw_b = mul_mod(b, pow_mod(g, 3, p), p);
    let twist = ShortCurve::from_ints(f, tw_a as i64, tw_b as i64)?;

    let bound = 2 * isqrt(p) + 2;
    let lo = p + 1 - bound;
    let hi = p + 1 + bound;
    let mut candidates: Vec<u64> = (lo..=hi).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed_from(&[p, a, b, 0xb595]));
    for _ in 0..40 {
        for (on_twist, c) in [(false, &curve), (true, &twist)] {
            let Some(pt) = sample_point(c, &mut rng) else {
                continue;
            };
            // #E' = 2p + 2 - #E, and the twist interval mirrors the original.
            let hits = annihilators_in_interval(c, &pt, lo, hi);
            candidates.retain(|&n| {
                let m = if on_twist { 2 * p + 2 - n } else { n };
                hits.binary_search(&m).is_ok()
            });
            if candidates.len() == 1 {
                let ap = p as i64 + 1 - candidates[0] as i64;
                return Ok(TraceData {
                    p,
                    ap,
                    method: TraceMethod::Bsgs,
                });
            }
            if candidates.is_empty() {
                return Err(CountingError::AmbiguousOrder);
            }
        }
    }
    Err(CountingError::AmbiguousOrder)
}

/// Dispatches between the character sum and BSGS.
pub fn trace_of_frobenius(
    a: u64,
    b: u64,
    p: u64,
    bsgs_threshold: u64,
) -> Result<TraceData, CountingError> {
    if p > bsgs_threshold {
        match ap_bsgs(a, b, p) {
            Err(CountingError::AmbiguousOrder) => ap_charsum(a, b, p),
            other => other,
        }
    } else {
        ap_charsum(a, b, p)
    }
}

/// `t_d = alpha^d + beta^d` from `t_0 = 2`, `t_1 = a_p`, `t_m = a_p t_{m-1} - p t_{m-2}`.
pub fn trace_power(ap: i64, p: u64, d: u32) -> BigInt {
    let (ap, p) = (BigInt::from(ap), BigInt::from(p));
    let mut prev = BigInt::from(2);
    if d == 0 {
        return prev;
    }
    let mut cur = ap.clone();
    for _ in 1..d {
        let next = &ap * &cur - &p * &prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `#E(F_{p^d}) = p^d + 1 - t_d`.
pub fn point_count_over_ext(ap: i64, p: u64, d: u32) -> BigUint {
    let n: BigInt = BigInt::from(p).pow(d) + 1 - trace_power(ap, p, d);
    n.to_biguint()
        .expect("Hasse bound keeps the count positive")
}

/// `E(F_{p^d})` has a point of order `p` iff `a_p^d = 1 mod p`.
pub fn has_p_torsion_over_ext(ap: i64, p: u64, d: u32) -> bool {
    let r = reduce_i64(ap, p);
    r != 0 && pow_mod(r, d as u64, p) == 1
}

/// Multiplicative order of `a_p` mod `p`, `None` when `p | a_p`.
pub fn ap_order(ap: i64, p: u64) -> Option<u64> {
    crate::arith::multiplicative_order(ap, p)
}

/// A point of exact order `p` on `c` over `F_{p^d}`, where `a_p` is the trace of
/// the underlying curve over `F_p`. Sampling is seeded from the curve.
pub fn find_point_of_order_p(c: &FieldCurve, ap: i64) -> Result<FieldPoint, CountingError> {
    find_point_of_order_p_seeded(c, ap, 0)
}

/// As [`find_point_of_order_p`], with an extra seed word to vary the choice.
pub fn find_point_of_order_p_seeded(
    c: &FieldCurve,
    ap: i64,
    salt: u64,
) -> Result<FieldPoint, CountingError> {
    let f = c.ring();
    let (p, d) = (f.p(), f.degree() as u32);
    if !has_p_torsion_over_ext(ap, p, d) {
        return Err(CountingError::NoPTorsion);
    }
    let n = point_count_over_ext(ap, p, d);
    let pb = BigUint::from(p);
    let mut cofactor = n;
    while cofactor.is_multiple_of(&pb) {
        cofactor /= &pb;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed_from(&[
        p,
        d as u64,
        f.index_of(&c.a()),
        f.index_of(&c.b()),
        salt,
    ]));
    let limit = 64 * p;
    for _ in 0..limit {
        let Some(r) = sample_point(c, &mut rng) else {
            continue;
        };
        let mut s = c.mul_big(&cofactor, &r);
        if s.is_infinity() {
            continue;
        }
        loop {
            let t = c.mul(p, &s);
            if t.is_infinity() {
                return Ok(s);
            }
            s = t;
        }
    }
    Err(CountingError::SampleExhausted(limit))
}

/// `|a_p| <= floor(2 sqrt p)`.
pub fn within_hasse(ap: i64, p: u64) -> bool {
    let bound = isqrt(4 * p) as i64;
    ap.abs() <= bound
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(p: u64) -> FiniteField {
        FiniteField::prime(p).unwrap()
    }

    #[test]
    fn charsum_examples() {
        assert_eq!(ap_charsum(1, 1, 5).unwrap().ap, -3);
        assert_eq!(ap_charsum(3, 2, 5).unwrap().ap, 1);
        assert_eq!(ap_charsum(0, 2, 5).unwrap().ap, 0);
        assert_eq!(ap_charsum(0, 0, 5), Err(CountingError::SingularCurve));
    }

    #[test]
    fn charsum_matches_enumeration_exhaustive() {
        for p in crate::arith::primes_up_to(31)
            .into_iter()
            .filter(|&p| p >= 3)
        {
            let field = f(p);
            let table = SquareTable::new(p);
            for a in 0..p {
                for b in 0..p {
                    let Ok(c) = ShortCurve::from_ints(field.clone(), a as i64, b as i64) else {
                        assert!(!is_nonsingular(a, b, p));
                        continue;
                    };
                    let ap = ap_charsum_with(a, b, &table).unwrap();
                    assert_eq!(BigInt::from(ap), trace_by_enumeration(&c).unwrap());
                    assert!(within_hasse(ap, p));
                }
            }
        }
    }

    #[test]
    fn bsgs_below_threshold_delegates() {
        let t = ap_bsgs(3, 2, 5).unwrap();
        assert_eq!(t.method, TraceMethod::CharSum);
        assert_eq!(t.ap, 1);
    }

    #[test]
    fn bsgs_matches_charsum() {
        for (a, b, p) in [
            (3u64, 2u64, 1009u64),
            (1, 1, 10007),
            (0, 7, 233),
            (5, 0, 239),
            (2, 3, 100003),
        ] {
            let fast = ap_bsgs(a, b, p).unwrap();
            assert_eq!(fast.method, TraceMethod::Bsgs);
            assert_eq!(
                fast.ap,
                ap_charsum(a, b, p).unwrap().ap,
                "({a},{b}) mod {p}"
            );
        }
    }

    #[test]
    fn bsgs_sweep_small_primes() {
        for p in [229u64, 233, 241, 257] {
            for a in 0..6 {
                for b in 0..6 {
                    if !is_nonsingular(a, b, p) {
                        continue;
                    }
                    let slow = ap_charsum(a, b, p).unwrap().ap;
                    match ap_bsgs(a, b, p) {
                        Ok(t) => assert_eq!(t.ap, slow),
                        Err(e) => assert_eq!(e, CountingError::AmbiguousOrder),
                    }
                }
            }
        }
    }

    #[test]
    fn trace_power_examples() {
        assert_eq!(trace_power(-3, 5, 1), BigInt::from(-3));
        assert_eq!(trace_power(-3, 5, 2), BigInt::from(-1));
        assert_eq!(point_count_over_ext(-3, 5, 2), BigUint::from(27u32));
        assert_eq!(trace_power(-3, 5, 4), BigInt::from(-49));
        assert_eq!(point_count_over_ext(-3, 5, 4), BigUint::from(675u32));
        let f25 = FiniteField::with_degree(5, 2).unwrap();
        let c = ShortCurve::from_ints(f25, 1, 1).unwrap();
        assert_eq!(c.enumerate_points().unwrap().len(), 27);
    }

    #[test]
    fn torsion_screen_examples() {
        for d in 1..6 {
            assert!(!has_p_torsion_over_ext(0, 5, d));
            assert!(has_p_torsion_over_ext(1, 5, d));
        }
        assert!(!has_p_torsion_over_ext(-3, 5, 1));
        assert!(!has_p_torsion_over_ext(-3, 5, 2));
        assert!(!has_p_torsion_over_ext(-3, 5, 3));
        assert!(has_p_torsion_over_ext(-3, 5, 4));
        assert_eq!(ap_order(-3, 5), Some(4));
    }

    #[test]
    fn point_of_order_p_examples() {
        let c = ShortCurve::from_ints(f(5), 3, 2).unwrap();
        let q = find_point_of_order_p(&c, 1).unwrap();
        assert!(!q.is_infinity());
        assert!(c.contains(&q));
        assert!(c.mul(5, &q).is_infinity());
        let c = ShortCurve::from_ints(f(5), 1, 1).unwrap();
        assert_eq!(
            find_point_of_order_p(&c, -3),
            Err(CountingError::NoPTorsion)
        );
        let c = ShortCurve::from_ints(f(5), 0, 2).unwrap();
        assert_eq!(find_point_of_order_p(&c, 0), Err(CountingError::NoPTorsion));
    }

    #[test]
    fn point_of_order_p_over_extensions() {
        for (p, d) in [(5u64, 4usize), (7, 2), (7, 3), (11, 2), (13, 2)] {
            let field = FiniteField::with_degree(p, d).unwrap();
            let table = SquareTable::new(p);
            let mut found = 0;
            for a in 1..p {
                for b in 1..4 {
                    let Ok(ap) = ap_charsum_with(a, b, &table) else {
                        continue;
                    };
                    if !has_p_torsion_over_ext(ap, p, d as u32) {
                        continue;
                    }
                    let c = ShortCurve::from_ints(field.clone(), a as i64, b as i64).unwrap();
                    let q = find_point_of_order_p(&c, ap).unwrap();
                    assert!(!q.is_infinity() && c.contains(&q));
                    assert!(c.mul(p, &q).is_infinity());
                    found += 1;
                }
            }
            assert!(found > 0, "p={p} d={d}");
        }
    }
}
