//! `Q_p`-rational `p`-torsion from division-polynomial roots lifted `p`-adically.
//!
//! Only integral `x`-coordinates are searched. For odd `p` a torsion point
//! with non-integral `x` lies in the formal group, which has no torsion over
//! `Z_p` when `p >= 3`. For `p = 2` the 2-torsion `x`-coordinates are the
//! roots of `4x^3 + b2 x^2 + 2 b4 x + b6`; substituting `x = X/4` gives the
//! monic `X^3 + b2 X^2 + 8 b4 X + 16 b6`, whose `Q_2`-roots are integral, and
//! the point is checked on the model scaled by `u = 2`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curves::GeneralCurve;

/// Primes handled by [`small_prime_local_torsion`].
pub const SUPPORTED_PRIMES: [u64; 4] = [2, 3, 5, 7];

pub const DEFAULT_START_PRECISION: u32 = 8;
pub const MAX_PRECISION: u32 = 40;

/// Recursion nodes allowed in root isolation before giving up.
const ISOLATION_NODE_CAP: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PadicError {
    #[error("prime {0} is not supported by the division-polynomial detector")]
    UnsupportedPrime(u64),
}

/// Integer polynomial, lowest coefficient first.
pub type IntPoly = Vec<BigInt>;

/// A residue `r mod p^k`; `valuation_floor` is always 0 (only integral roots are sought).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PadicApproximation {
    pub p: u64,
    pub precision: u32,
    pub residue: BigInt,
    pub valuation_floor: i32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TorsionVerdict {
    Yes,
    No,
    Inconclusive,
}

/// A point `(x, y) mod p^k` on the model scaled by `u` (`u = 2` for `p = 2`,
/// otherwise 1) satisfying the curve equation and the division polynomial mod `p^k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PadicWitness {
    pub p: u64,
    pub precision: u32,
    pub scale: u32,
    pub x: BigInt,
    pub y: BigInt,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PadicOutcome {
    pub verdict: TorsionVerdict,
    pub precision: u32,
    pub witness: Option<PadicWitness>,
}

fn trim(mut f: IntPoly) -> IntPoly {
    while f.last().is_some_and(Zero::is_zero) {
        f.pop();
    }
    f
}

fn poly_add(f: &[BigInt], g: &[BigInt]) -> IntPoly {
    let n = f.len().max(g.len());
    let zero = BigInt::zero();
    trim(
        (0..n)
            .map(|i| f.get(i).unwrap_or(&zero) + g.get(i).unwrap_or(&zero))
            .collect(),
    )
}

fn poly_neg(f: &[BigInt]) -> IntPoly {
    f.iter().map(|c| -c).collect()
}

fn poly_sub(f: &[BigInt], g: &[BigInt]) -> IntPoly {
    poly_add(f, &poly_neg(g))
}

fn poly_mul(f: &[BigInt], g: &[BigInt]) -> IntPoly {
    if f.is_empty() || g.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigInt::zero(); f.len() + g.len() - 1];
    for (i, a) in f.iter().enumerate() {
        if a.is_zero() {
            continue;
        }
        for (j, b) in g.iter().enumerate() {
            out[i + j] += a * b;
        }
    }
    trim(out)
}

fn poly_pow(f: &[BigInt], e: u32) -> IntPoly {
    (0..e).fold(vec![BigInt::one()], |acc, _| poly_mul(&acc, f))
}

pub fn derivative(f: &[BigInt]) -> IntPoly {
    trim(
        f.iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c * BigInt::from(i))
            .collect(),
    )
}

pub fn eval(f: &[BigInt], x: &BigInt) -> BigInt {
    f.iter().rev().fold(BigInt::zero(), |acc, c| acc * x + c)
}

fn eval_mod(f: &[BigInt], x: &BigInt, m: &BigInt) -> BigInt {
    f.iter()
        .rev()
        .fold(BigInt::zero(), |acc, c| (acc * x + c).mod_floor(m))
}

fn ints(cs: &[BigInt]) -> IntPoly {
    trim(cs.to_vec())
}

/// `p`-adic valuation; `None` for zero.
pub fn valuation(v: &BigInt, p: u64) -> Option<u32> {
    if v.is_zero() {
        return None;
    }
    let p = BigInt::from(p);
    let mut v = v.abs();
    let mut e = 0;
    while v.is_multiple_of(&p) {
        v /= &p;
        e += 1;
    }
    Some(e)
}

/// `F = 4x^3 + b2 x^2 + 2 b4 x + b6`, the discriminant of the `y`-quadratic.
pub fn two_torsion_poly(g: &GeneralCurve) -> IntPoly {
    ints(&[g.b6(), 2 * g.b4(), g.b2(), BigInt::from(4)])
}

/// `f_0 .. f_n`, where `f_k = psi_k` for odd `k` and `psi_k / psi_2` for even `k`.
pub fn division_polynomials(g: &GeneralCurve, n: usize) -> Vec<IntPoly> {
    let (b2, b4, b6, b8) = (g.b2(), g.b4(), g.b6(), g.b8());
    let big = BigInt::from;
    let f_sq = {
        let f = two_torsion_poly(g);
        poly_mul(&f, &f)
    };
    let mut fs: Vec<IntPoly> = vec![
        Vec::new(),
        vec![big(1)],
        vec![big(1)],
        ints(&[b8.clone(), 3 * &b6, 3 * &b4, b2.clone(), big(3)]),
        ints(&[
            &b4 * &b8 - &b6 * &b6,
            &b2 * &b8 - &b4 * &b6,
            10 * &b8,
            10 * &b6,
            5 * &b4,
            b2.clone(),
            big(2),
        ]),
    ];
    for k in 5..=n {
        let m = k / 2;
        let next = if k % 2 == 1 {
            let t1 = poly_mul(&fs[m + 2], &poly_pow(&fs[m], 3));
            let t2 = poly_mul(&fs[m - 1], &poly_pow(&fs[m + 1], 3));
            if m % 2 == 0 {
                poly_sub(&poly_mul(&f_sq, &t1), &t2)
            } else {
                poly_sub(&t1, &poly_mul(&f_sq, &t2))
            }
        } else {
            let t1 = poly_mul(&fs[m + 2], &poly_pow(&fs[m - 1], 2));
            let t2 = poly_mul(&fs[m - 2], &poly_pow(&fs[m + 1], 2));
            poly_mul(&fs[m], &poly_sub(&t1, &t2))
        };
        fs.push(next);
    }
    fs.truncate(n + 1);
    fs
}

/// The polynomial whose integral roots are the `x`-coordinates of `p`-torsion.
///
/// For `p = 2` this is `4x^3 + b2 x^2 + 2 b4 x + b6`; for odd `p` it is `psi_p`.
pub fn division_polynomial(g: &GeneralCurve, p: u64) -> Result<IntPoly, PadicError> {
    match p {
        2 => Ok(two_torsion_poly(g)),
        3 | 5 | 7 => Ok(division_polynomials(g, p as usize).pop().unwrap()),
        _ => Err(PadicError::UnsupportedPrime(p)),
    }
}

fn roots_capped(f: &[BigInt], p: u64, k: u32, cap: usize) -> Option<Vec<BigInt>> {
    let pb = BigInt::from(p);
    let fprime = derivative(f);
    let mut level: Vec<BigInt> = (0..p)
        .map(BigInt::from)
        .filter(|c| eval_mod(f, c, &pb).is_zero())
        .collect();
    let mut modulus = pb.clone();
    for _ in 1..k {
        let next_mod = &modulus * &pb;
        let mut next = Vec::new();
        for r in &level {
            // f(r + m t) = f(r) + m t f'(r) mod p m, since m^2 is divisible by p m.
            let v0 = (eval_mod(f, r, &next_mod) / &modulus).to_u64().unwrap();
            let d0 = eval_mod(&fprime, r, &pb).to_u64().unwrap();
            if d0 != 0 {
                let t = crate::arith::mul_mod(p - v0 % p, crate::arith::inv_mod(d0, p).unwrap(), p);
                next.push(r + &modulus * t);
            } else if v0 == 0 {
                next.extend((0..p).map(|t| r + &modulus * t));
            }
            if next.len() > cap {
                return None;
            }
        }
        level = next;
        modulus = next_mod;
        if level.is_empty() {
            break;
        }
    }
    level.sort();
    Some(level)
}

/// All residues `r mod p^k` with `f(r) = 0 mod p^k`, ascending, by digit-by-digit
/// lifting from the roots mod `p`.
pub fn padic_roots(f: &[BigInt], p: u64, k: u32) -> Vec<PadicApproximation> {
    roots_capped(f, p, k, usize::MAX)
        .unwrap_or_default()
        .into_iter()
        .map(|residue| PadicApproximation {
            p,
            precision: k,
            residue,
            valuation_floor: 0,
        })
        .collect()
}

/// Square root of a unit `u` modulo `p^n` for odd `p`, if one exists.
fn unit_sqrt_mod(u: &BigInt, p: u64, n: u32) -> Option<BigInt> {
    let pb = BigInt::from(p);
    let u0 = u.mod_floor(&pb).to_u64().unwrap();
    let f = crate::rings::FiniteField::prime(p).ok()?;
    use crate::rings::Ring;
    let s0 = f.sqrt(&f.from_int(u0 as i64))?.coeff(0);
    let m = pb.pow(n);
    // Newton: s <- s - (s^2 - u) / (2s), doubling precision each step.
    let mut s = BigInt::from(s0);
    let mut prec = 1;
    while prec < n {
        prec = (2 * prec).min(n);
        let mp = pb.pow(prec);
        let two_s = Integer::mod_floor(&(&s * BigInt::from(2)), &mp);
        let inv = mod_inverse(&two_s, &mp)?;
        s = (&s - (&s * &s - u) * inv).mod_floor(&mp);
    }
    Some(s.mod_floor(&m))
}

fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = a.extended_gcd(m);
    if e.gcd.is_one() {
        Some(e.x.mod_floor(m))
    } else {
        None
    }
}

/// `g(a + p x)` with integer coefficients.
fn shift_scale(g: &[BigInt], a: u64, p: u64) -> IntPoly {
    let a = BigInt::from(a);
    let mut c = g.to_vec();
    // Taylor shift by repeated synthetic division.
    let n = c.len();
    for i in 0..n {
        for j in (i..n - 1).rev() {
            let t = &c[j + 1] * &a;
            c[j] += t;
        }
    }
    let pb = BigInt::from(p);
    let mut scale = BigInt::one();
    for coeff in c.iter_mut() {
        *coeff *= &scale;
        scale *= &pb;
    }
    c
}

/// Newton iteration from the simple root `a` of `g mod p` to precision `p^k`.
fn newton_lift(g: &[BigInt], a: u64, p: u64, k: u32) -> BigInt {
    let gprime = derivative(g);
    let pb = BigInt::from(p);
    let mut y = BigInt::from(a);
    let mut prec = 1;
    while prec < k {
        prec = (2 * prec).min(k);
        let m = pb.pow(prec);
        let inv = mod_inverse(&eval_mod(&gprime, &y, &m), &m).expect("simple root");
        y = (&y - eval_mod(g, &y, &m) * inv).mod_floor(&m);
    }
    y
}

/// Every root of the squarefree `f` in `Z_p`, each reduced mod `p^k`.
///
/// Repeated roots of `f mod p` are resolved by recursing on `f(a + p x)` with
/// its content removed; simple roots are Newton-lifted. `None` if the
/// recursion exceeds its budget.
fn isolate_roots(f: &[BigInt], p: u64, k: u32) -> Option<Vec<BigInt>> {
    let pb = BigInt::from(p);
    let modulus = pb.pow(k);
    let mut out = Vec::new();
    let mut stack = vec![(trim(f.to_vec()), BigInt::zero(), 0u32)];
    let mut nodes = 0;
    while let Some((g, prefix, depth)) = stack.pop() {
        nodes += 1;
        if nodes > ISOLATION_NODE_CAP || depth > 64 * k.max(8) {
            return None;
        }
        let content_val = g.iter().filter_map(|c| valuation(c, p)).min()?;
        let g: IntPoly = g.iter().map(|c| c / pb.pow(content_val)).collect();
        let gprime = derivative(&g);
        let step = pb.pow(depth);
        for a in 0..p {
            let ab = BigInt::from(a);
            if !eval_mod(&g, &ab, &pb).is_zero() {
                continue;
            }
            let next_prefix = &prefix + &step * a;
            if !eval_mod(&gprime, &ab, &pb).is_zero() {
                let y = newton_lift(&g, a, p, k);
                out.push((&prefix + &step * y).mod_floor(&modulus));
            } else {
                stack.push((trim(shift_scale(&g, a, p)), next_prefix, depth + 1));
            }
        }
    }
    out.sort();
    Some(out)
}

/// Square class of `F(x)` for `x` correct mod `p^k`; `None` if `p^k` is too coarse.
fn square_class(disc: &[BigInt], x: &BigInt, p: u64, k: u32) -> Option<bool> {
    let modulus = BigInt::from(p).pow(k);
    let dv = eval_mod(disc, x, &modulus);
    let e = valuation(&dv, p).filter(|&e| e < k)?;
    if e % 2 == 1 {
        return Some(false);
    }
    let unit = &dv / BigInt::from(p).pow(e);
    if p == 2 {
        // Units are squares in Z_2 iff they are 1 mod 8; needs 3 digits.
        (k - e >= 3).then(|| unit.mod_floor(&BigInt::from(8)).is_one())
    } else {
        let u = unit.mod_floor(&BigInt::from(p)).to_u64().unwrap();
        Some(crate::arith::legendre(u, p) == 1)
    }
}

/// Verdict at a fixed precision `k`.
pub fn local_torsion_at_precision(
    g: &GeneralCurve,
    p: u64,
    k: u32,
) -> Result<PadicOutcome, PadicError> {
    if !SUPPORTED_PRIMES.contains(&p) {
        return Err(PadicError::UnsupportedPrime(p));
    }
    let inconclusive = PadicOutcome {
        verdict: TorsionVerdict::Inconclusive,
        precision: k,
        witness: None,
    };
    if p == 2 {
        // Monic G(X) = X^3 + b2 X^2 + 8 b4 X + 16 b6; any Z_2-root is a 2-torsion point.
        let big_g = ints(&[16 * g.b6(), 8 * g.b4(), g.b2(), BigInt::one()]);
        let Some(roots) = isolate_roots(&big_g, 2, k) else {
            return Ok(inconclusive);
        };
        let modulus = BigInt::from(2).pow(k);
        return Ok(match roots.first() {
            Some(r) => {
                let y = Integer::mod_floor(&(-(&g.a1 * r) - &g.a3 * BigInt::from(4)), &modulus);
                let witness = PadicWitness {
                    p,
                    precision: k,
                    scale: 2,
                    x: r.clone(),
                    y,
                };
                PadicOutcome {
                    verdict: TorsionVerdict::Yes,
                    precision: k,
                    witness: Some(witness),
                }
            }
            None => PadicOutcome {
                verdict: TorsionVerdict::No,
                precision: k,
                witness: None,
            },
        });
    }
    let f = division_polynomial(g, p)?;
    let disc = two_torsion_poly(g);
    let Some(roots) = isolate_roots(&f, p, k) else {
        return Ok(inconclusive);
    };
    let mut undecided = false;
    for x in &roots {
        match square_class(&disc, x, p, k) {
            Some(true) => {
                let witness = odd_witness(g, p, k, x, &disc);
                return Ok(PadicOutcome {
                    verdict: TorsionVerdict::Yes,
                    precision: k,
                    witness,
                });
            }
            Some(false) => {}
            None => undecided = true,
        }
    }
    Ok(if undecided {
        inconclusive
    } else {
        PadicOutcome {
            verdict: TorsionVerdict::No,
            precision: k,
            witness: None,
        }
    })
}

/// `y = (s - a1 x - a3) / 2` with `s^2 = F(x) mod p^k`.
fn odd_witness(
    g: &GeneralCurve,
    p: u64,
    k: u32,
    x: &BigInt,
    disc: &[BigInt],
) -> Option<PadicWitness> {
    let pb = BigInt::from(p);
    let modulus = pb.pow(k);
    let dv = eval(disc, x);
    let e = valuation(&dv, p)?;
    if e >= k {
        return None;
    }
    let unit = &dv / pb.pow(e);
    let t = unit_sqrt_mod(&unit, p, k - e)?;
    let s = pb.pow(e / 2) * t;
    let inv2 = mod_inverse(&BigInt::from(2), &modulus)?;
    let y = ((s - &g.a1 * x - &g.a3) * inv2).mod_floor(&modulus);
    Some(PadicWitness {
        p,
        precision: k,
        scale: 1,
        x: x.mod_floor(&modulus),
        y,
    })
}

/// Direct substitution: the witness satisfies the `u`-scaled curve equation and
/// the torsion polynomial modulo `p^k`.
pub fn verify_witness(g: &GeneralCurve, w: &PadicWitness) -> bool {
    let modulus = BigInt::from(w.p).pow(w.precision);
    let u = BigInt::from(w.scale);
    let (x, y) = (&w.x, &w.y);
    let lhs = y * y + &g.a1 * &u * x * y + &g.a3 * u.pow(3) * y;
    let rhs = x.pow(3) + &g.a2 * u.pow(2) * x * x + &g.a4 * u.pow(4) * x + &g.a6 * u.pow(6);
    if !(lhs - rhs).mod_floor(&modulus).is_zero() {
        return false;
    }
    let torsion = if w.p == 2 {
        ints(&[16 * g.b6(), 8 * g.b4(), g.b2(), BigInt::one()])
    } else {
        match division_polynomial(g, w.p) {
            Ok(f) => f,
            Err(_) => return false,
        }
    };
    eval_mod(&torsion, x, &modulus).is_zero()
}

/// Verdict with precision doubling from `k_start` up to [`MAX_PRECISION`].
pub fn small_prime_local_torsion(
    g: &GeneralCurve,
    p: u64,
    k_start: u32,
) -> Result<PadicOutcome, PadicError> {
    let mut k = k_start.max(2);
    loop {
        let out = local_torsion_at_precision(g, p, k)?;
        if out.verdict != TorsionVerdict::Inconclusive || k >= MAX_PRECISION {
            return Ok(out);
        }
        k = (2 * k).min(MAX_PRECISION);
    }
}
