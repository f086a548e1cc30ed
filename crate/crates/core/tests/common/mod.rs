//! Independent brute-force oracles over `Z/p^2`, written against plain `u64`
//! arithmetic rather than the library's ring types.

#![allow(dead_code)]

use std::collections::HashMap;

pub fn mulm(x: u64, y: u64, m: u64) -> u64 {
    ((x as u128 * y as u128) % m as u128) as u64
}

pub fn rhs(x: u64, a: u64, b: u64, m: u64) -> u64 {
    (mulm(mulm(x, x, m), x, m) + mulm(a, x, m) + b) % m
}

/// Brute-force `#E(F_p)` including infinity.
pub fn count_fp(a: u64, b: u64, p: u64) -> u64 {
    let mut squares = vec![0u64; p as usize];
    for y in 0..p {
        squares[mulm(y, y, p) as usize] += 1;
    }
    1 + (0..p)
        .map(|x| squares[rhs(x, a, b, p) as usize])
        .sum::<u64>()
}

pub fn nonsingular(a: u64, b: u64, p: u64) -> bool {
    !(4 * mulm(mulm(a, a, p), a, p) + 27 * mulm(b, b, p)).is_multiple_of(p)
}

/// Affine points of `y^2 = x^3 + A x + B` over `Z/m`.
pub fn affine_points(a: u64, b: u64, m: u64) -> Vec<(u64, u64)> {
    let mut roots: HashMap<u64, Vec<u64>> = HashMap::new();
    for y in 0..m {
        roots.entry(mulm(y, y, m)).or_default().push(y);
    }
    let mut out = Vec::new();
    for x in 0..m {
        if let Some(ys) = roots.get(&rhs(x, a, b, m)) {
            out.extend(ys.iter().map(|&y| (x, y)));
        }
    }
    out
}

/// Projective solutions `(X : 1 : Z)` of `Y^2 Z = X^3 + A X Z^2 + B Z^3` over
/// `Z/p^2` with `Z` a non-unit; these are exactly the points reducing to infinity.
pub fn kernel_points(a: u64, b: u64, p: u64) -> Vec<(u64, u64)> {
    let m = p * p;
    let mut out = Vec::new();
    for x in 0..m {
        for z in (0..m).step_by(p as usize) {
            let x3 = mulm(mulm(x, x, m), x, m);
            let axz2 = mulm(mulm(a, x, m), mulm(z, z, m), m);
            let bz3 = mulm(b, mulm(mulm(z, z, m), z, m), m);
            if (x3 + axz2 + bz3) % m == z {
                out.push((x, z));
            }
        }
    }
    out
}

/// Values of the division polynomials at `x` with the `2y` factor removed from
/// the even ones, so the recursion needs no division.
pub fn division_values(x: u64, a: u64, b: u64, n: usize, m: u64) -> Vec<u64> {
    let r = rhs(x, a, b, m);
    let r16 = mulm(16, mulm(r, r, m), m);
    let sub = |u: u64, v: u64| (u + m - v) % m;
    let x2 = mulm(x, x, m);
    let x3 = mulm(x2, x, m);
    let x4 = mulm(x2, x2, m);
    let a2 = mulm(a, a, m);
    let mut f = vec![0u64; n.max(5) + 1];
    f[1] = 1;
    f[2] = 1 % m;
    // 3x^4 + 6Ax^2 + 12Bx - A^2
    f[3] = sub(
        (3 * x4 + mulm(6 * a % m, x2, m) + mulm(12 * b % m, x, m)) % m,
        a2,
    );
    // 2(x^6 + 5Ax^4 + 20Bx^3 - 5A^2x^2 - 4ABx - 8B^2 - A^3)
    let pos = (mulm(x3, x3, m) + mulm(5 * a % m, x4, m) + mulm(20 * b % m, x3, m)) % m;
    let neg = (mulm(5 * a2 % m, x2, m)
        + mulm(mulm(4 * a % m, b, m), x, m)
        + mulm(8 * b % m, b, m)
        + mulm(a2, a, m))
        % m;
    f[4] = mulm(2, sub(pos, neg), m);
    let cube = |v: u64| mulm(mulm(v, v, m), v, m);
    let sq = |v: u64| mulm(v, v, m);
    for k in 5..=n {
        let mm = k / 2;
        f[k] = if k % 2 == 1 {
            let (s, t) = (
                mulm(f[mm + 2], cube(f[mm]), m),
                mulm(f[mm - 1], cube(f[mm + 1]), m),
            );
            if mm % 2 == 0 {
                sub(mulm(r16, s, m), t)
            } else {
                sub(s, mulm(r16, t, m))
            }
        } else {
            let inner = sub(
                mulm(f[mm + 2], sq(f[mm - 1]), m),
                mulm(f[mm - 2], sq(f[mm + 1]), m),
            );
            mulm(f[mm], inner, m)
        };
    }
    f.truncate(n + 1);
    f
}

/// `#E(Z/p^2)[p]` for odd `p >= 5`: the whole kernel of reduction plus the
/// affine points with `psi_p(P) = 0` in `Z/p^2`.
pub fn p_torsion_z_p2(a: u64, b: u64, p: u64) -> u64 {
    let m = p * p;
    let kernel = kernel_points(a, b, p).len() as u64;
    let affine = affine_points(a, b, m)
        .into_iter()
        .filter(|&(x, _)| division_values(x, a, b, p as usize, m)[p as usize] == 0)
        .count() as u64;
    kernel + affine
}

/// `j = 6912 a^3 / (4 a^3 + 27 b^2)` over `Z/m`, `m = p^2`.
pub fn j_invariant(a: u64, b: u64, p: u64) -> u64 {
    let m = p * p;
    let a3 = mulm(mulm(a, a, m), a, m);
    let den = (4 * a3 + 27 * mulm(b, b, m)) % m;
    let inv = (1..m)
        .find(|&v| mulm(v, den, m) == 1)
        .expect("unit discriminant");
    mulm(mulm(6912 % m, a3, m), inv, m)
}

/// `a^e mod p` for possibly negative `a`.
pub fn pow_signed(a: i64, e: u32, p: u64) -> u64 {
    let base = a.rem_euclid(p as i64) as u64;
    (0..e).fold(1 % p, |acc, _| mulm(acc, base, p))
}

use local_torsion::curves::{CurvePoint, FieldCurve, FieldPoint};
use local_torsion::rings::{FiniteField, Ring};

/// `y^2 = x^3 + a x + b` with `a, b in F_p`, viewed over `F_{p^d}`.
pub fn curve_over_ext(a: u64, b: u64, p: u64, d: usize) -> Option<FieldCurve> {
    let field = FiniteField::with_degree(p, d).ok()?;
    FieldCurve::from_ints(field, a as i64, b as i64).ok()
}

/// Whether some point of `E(F_{p^d})` has exact order `p`, by enumeration.
pub fn ext_has_point_of_order_p(c: &FieldCurve) -> bool {
    let p = c.ring().p();
    c.enumerate_points()
        .unwrap()
        .iter()
        .any(|pt| !pt.is_infinity() && c.mul(p, pt).is_infinity())
}

/// A uniformly random affine point, by rejection on `x`.
pub fn random_point<R: rand::Rng>(c: &FieldCurve, rng: &mut R) -> FieldPoint {
    let f = c.ring();
    loop {
        let x = f.random_element(rng);
        if let Some(y) = f.sqrt(&c.rhs(&x)) {
            let y = if rng.gen_bool(0.5) { f.neg(&y) } else { y };
            return CurvePoint::Affine(x, y);
        }
    }
}
