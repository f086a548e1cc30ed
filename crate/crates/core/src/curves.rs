//! Weierstrass models and the chord-tangent group law over `F_{p^d}` and `GR(p^2, d)`.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use crate::rings::{FieldElement, FiniteField, GaloisRing, GaloisRingElement, Ring, RingError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CurveError {
    #[error("curve is singular (discriminant is not a unit)")]
    SingularCurve,
    #[error("chord or tangent denominator is not a unit")]
    NonUnitDenominator,
    #[error("ladder produced a non-unit denominator; caller precondition violated")]
    LadderInvariantViolated,
    #[error("point is not on the curve")]
    NotOnCurve,
    #[error("field of order {0} is too large to enumerate")]
    TooLarge(String),
    #[error("bad reduction at {0}")]
    BadReduction(u64),
    #[error("prime {0} is below 5")]
    SmallPrime(u64),
    #[error("discriminant is zero")]
    ZeroDiscriminant,
    #[error(transparent)]
    Ring(#[from] RingError),
}

/// Largest field order [`ShortCurve::enumerate_points`] accepts.
pub const ENUMERATION_LIMIT: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CurvePoint<E> {
    Infinity,
    Affine(E, E),
}

impl<E: Copy> CurvePoint<E> {
    pub fn is_infinity(&self) -> bool {
        matches!(self, CurvePoint::Infinity)
    }

    pub fn x(&self) -> Option<E> {
        match self {
            CurvePoint::Infinity => None,
            CurvePoint::Affine(x, _) => Some(*x),
        }
    }

    pub fn y(&self) -> Option<E> {
        match self {
            CurvePoint::Infinity => None,
            CurvePoint::Affine(_, y) => Some(*y),
        }
    }
}

/// `y^2 = x^3 + a x + b` over a ring with `p > 3`.
#[derive(Clone)]
pub struct ShortCurve<R: Ring> {
    ring: R,
    a: R::Elem,
    b: R::Elem,
}

impl<R: Ring> fmt::Debug for ShortCurve<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "ShortCurve(a={:?}, b={:?} over {:?})",
            self.a, self.b, self.ring
        )
    }
}

pub type FieldCurve = ShortCurve<FiniteField>;
pub type LiftedCurve = ShortCurve<GaloisRing>;
pub type FieldPoint = CurvePoint<FieldElement>;
pub type LiftedPoint = CurvePoint<GaloisRingElement>;

impl<R: Ring> ShortCurve<R> {
    pub fn new(ring: R, a: R::Elem, b: R::Elem) -> Result<Self, CurveError> {
        let curve = ShortCurve { ring, a, b };
        if !curve.ring.is_unit(&curve.disc_core()) {
            return Err(CurveError::SingularCurve);
        }
        Ok(curve)
    }

    /// Curve with integer coefficients reduced into the ring.
    pub fn from_ints(ring: R, a: i64, b: i64) -> Result<Self, CurveError> {
        let (ea, eb) = (ring.from_int(a), ring.from_int(b));
        Self::new(ring, ea, eb)
    }

    pub fn ring(&self) -> &R {
        &self.ring
    }

    pub fn a(&self) -> R::Elem {
        self.a
    }

    pub fn b(&self) -> R::Elem {
        self.b
    }

    /// `4a^3 + 27b^2`; the discriminant is `-16` times this.
    pub fn disc_core(&self) -> R::Elem {
        let r = &self.ring;
        let a3 = r.mul(&r.square(&self.a), &self.a);
        r.add(
            &r.mul(&r.from_int(4), &a3),
            &r.mul(&r.from_int(27), &r.square(&self.b)),
        )
    }

    pub fn discriminant(&self) -> R::Elem {
        self.ring.mul(&self.ring.from_int(-16), &self.disc_core())
    }

    /// `6912 a^3 / (4a^3 + 27b^2)`.
    pub fn j_invariant(&self) -> Result<R::Elem, CurveError> {
        let r = &self.ring;
        let a3 = r.mul(&r.square(&self.a), &self.a);
        let inv = r
            .inv(&self.disc_core())
            .map_err(|_| CurveError::SingularCurve)?;
        Ok(r.mul(&r.mul(&r.from_int(6912), &a3), &inv))
    }

    /// `x^3 + a x + b`.
    pub fn rhs(&self, x: &R::Elem) -> R::Elem {
        let r = &self.ring;
        let x2a = r.add(&r.square(x), &self.a);
        r.add(&r.mul(&x2a, x), &self.b)
    }

    pub fn contains(&self, pt: &CurvePoint<R::Elem>) -> bool {
        match pt {
            CurvePoint::Infinity => true,
            CurvePoint::Affine(x, y) => self.ring.square(y) == self.rhs(x),
        }
    }

    pub fn point(&self, x: R::Elem, y: R::Elem) -> Result<CurvePoint<R::Elem>, CurveError> {
        let pt = CurvePoint::Affine(x, y);
        if self.contains(&pt) {
            Ok(pt)
        } else {
            Err(CurveError::NotOnCurve)
        }
    }

    pub fn neg(&self, pt: &CurvePoint<R::Elem>) -> CurvePoint<R::Elem> {
        match pt {
            CurvePoint::Infinity => CurvePoint::Infinity,
            CurvePoint::Affine(x, y) => CurvePoint::Affine(*x, self.ring.neg(y)),
        }
    }

    /// Chord-tangent addition.
    ///
    /// Over a field this is the complete law. Over `GR(p^2, d)` the affine
    /// formulas are used only when the denominator is a unit; otherwise the
    /// sum lies near the kernel of reduction and `NonUnitDenominator` is returned.
    pub fn add(
        &self,
        p1: &CurvePoint<R::Elem>,
        p2: &CurvePoint<R::Elem>,
    ) -> Result<CurvePoint<R::Elem>, CurveError> {
        let r = &self.ring;
        let (x1, y1, x2, y2) = match (p1, p2) {
            (CurvePoint::Infinity, _) => return Ok(*p2),
            (_, CurvePoint::Infinity) => return Ok(*p1),
            (CurvePoint::Affine(x1, y1), CurvePoint::Affine(x2, y2)) => (x1, y1, x2, y2),
        };
        let lambda = if x1 == x2 {
            if r.add(y1, y2) == r.zero() {
                return Ok(CurvePoint::Infinity);
            }
            if y1 != y2 {
                return Err(CurveError::NonUnitDenominator);
            }
            let den = r.add(y1, y1);
            if !r.is_unit(&den) {
                return Err(CurveError::NonUnitDenominator);
            }
            let num = r.add(&r.mul(&r.from_int(3), &r.square(x1)), &self.a);
            r.mul(&num, &r.inv(&den)?)
        } else {
            let den = r.sub(x2, x1);
            if !r.is_unit(&den) {
                return Err(CurveError::NonUnitDenominator);
            }
            r.mul(&r.sub(y2, y1), &r.inv(&den)?)
        };
        let x3 = r.sub(&r.sub(&r.square(&lambda), x1), x2);
        let y3 = r.sub(&r.mul(&lambda, &r.sub(x1, &x3)), y1);
        Ok(CurvePoint::Affine(x3, y3))
    }

    pub fn double(&self, pt: &CurvePoint<R::Elem>) -> Result<CurvePoint<R::Elem>, CurveError> {
        self.add(pt, pt)
    }

    /// `[n]P` by left-to-right double-and-add.
    ///
    /// Used as the lift-test ladder with `1 <= n <= p - 1` and `P` reducing to a
    /// point of exact odd order `p`: every prefix multiple then reduces to a
    /// nonzero point that is not 2-torsion, so every denominator is a unit.
    pub fn scalar_mul_unit(
        &self,
        n: u64,
        pt: &CurvePoint<R::Elem>,
    ) -> Result<CurvePoint<R::Elem>, CurveError> {
        self.ladder(n, pt).map_err(|e| match e {
            CurveError::NonUnitDenominator => CurveError::LadderInvariantViolated,
            other => other,
        })
    }

    fn ladder(&self, n: u64, pt: &CurvePoint<R::Elem>) -> Result<CurvePoint<R::Elem>, CurveError> {
        if n == 0 {
            return Ok(CurvePoint::Infinity);
        }
        let mut acc = *pt;
        for i in (0..63 - n.leading_zeros()).rev() {
            acc = self.double(&acc)?;
            if (n >> i) & 1 == 1 {
                acc = self.add(&acc, pt)?;
            }
        }
        Ok(acc)
    }
}

impl ShortCurve<FiniteField> {
    /// `[n]P` over a field; the group law is complete so this cannot fail.
    pub fn mul(&self, n: u64, pt: &FieldPoint) -> FieldPoint {
        self.ladder(n, pt).expect("field group law is complete")
    }

    pub fn mul_big(&self, n: &BigUint, pt: &FieldPoint) -> FieldPoint {
        let mut acc = CurvePoint::Infinity;
        for i in (0..n.bits()).rev() {
            acc = self.add(&acc, &acc).expect("complete");
            if n.bit(i) {
                acc = self.add(&acc, pt).expect("complete");
            }
        }
        acc
    }

    /// All points, Infinity first, then affine points in `(x, y)` index order.
    pub fn enumerate_points(&self) -> Result<Vec<FieldPoint>, CurveError> {
        let f = &self.ring;
        let q = match f.order_u64() {
            Some(q) if q <= ENUMERATION_LIMIT => q,
            _ => return Err(CurveError::TooLarge(f.order().to_string())),
        };
        let mut roots: Vec<Vec<FieldElement>> = vec![Vec::new(); q as usize];
        for y in f.elements() {
            roots[f.index_of(&f.square(&y)) as usize].push(y);
        }
        let mut out = vec![CurvePoint::Infinity];
        for x in f.elements() {
            for y in &roots[f.index_of(&self.rhs(&x)) as usize] {
                out.push(CurvePoint::Affine(x, *y));
            }
        }
        Ok(out)
    }

    /// Order of a point by repeated addition. Test oracle; `O(order)`.
    pub fn brute_order(&self, pt: &FieldPoint) -> u64 {
        let mut acc = *pt;
        let mut n = 1;
        while !acc.is_infinity() {
            acc = self.add(&acc, pt).expect("complete");
            n += 1;
        }
        n
    }

    /// The coefficient-wise lift of this curve to `GR(p^2, d)` (digits in `[0, p)`).
    pub fn lift(&self, ring: &GaloisRing) -> Result<LiftedCurve, CurveError> {
        ShortCurve::new(ring.clone(), ring.lift(&self.a), ring.lift(&self.b))
    }
}

impl ShortCurve<GaloisRing> {
    pub fn reduce(&self) -> Result<FieldCurve, CurveError> {
        let f = self.ring.residue_field().clone();
        ShortCurve::new(f, self.ring.reduce(&self.a), self.ring.reduce(&self.b))
    }

    pub fn reduce_point(&self, pt: &LiftedPoint) -> FieldPoint {
        match pt {
            CurvePoint::Infinity => CurvePoint::Infinity,
            CurvePoint::Affine(x, y) => {
                CurvePoint::Affine(self.ring.reduce(x), self.ring.reduce(y))
            }
        }
    }

    /// Lifts an affine point with `2y` a unit: `x` becomes `lift(x0) + p*offset`
    /// and `y` is the Hensel root of `Y^2 = x^3 + A x + B` above `y0`.
    pub fn lift_point(
        &self,
        pt: &FieldPoint,
        offset: &FieldElement,
    ) -> Result<LiftedPoint, CurveError> {
        let (x0, y0) = match pt {
            CurvePoint::Infinity => return Ok(CurvePoint::Infinity),
            CurvePoint::Affine(x, y) => (x, y),
        };
        let r = &self.ring;
        let x = r.add(&r.lift(x0), &r.p_times(offset));
        let poly = [r.neg(&self.rhs(&x)), r.zero(), r.one()];
        let y = r.hensel_lift_root(&poly, y0)?;
        Ok(CurvePoint::Affine(x, y))
    }
}

/// An integral general Weierstrass model
/// `y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneralCurve {
    pub label: Option<String>,
    pub a1: BigInt,
    pub a2: BigInt,
    pub a3: BigInt,
    pub a4: BigInt,
    pub a6: BigInt,
}

impl GeneralCurve {
    pub fn new(coeffs: [BigInt; 5], label: Option<String>) -> Result<Self, CurveError> {
        let [a1, a2, a3, a4, a6] = coeffs;
        let g = GeneralCurve {
            label,
            a1,
            a2,
            a3,
            a4,
            a6,
        };
        if g.discriminant().is_zero() {
            return Err(CurveError::ZeroDiscriminant);
        }
        Ok(g)
    }

    pub fn from_ints(coeffs: [i64; 5], label: Option<&str>) -> Result<Self, CurveError> {
        Self::new(coeffs.map(BigInt::from), label.map(str::to_string))
    }

    /// `y^2 = x^3 + a x + b`.
    pub fn short(a: BigInt, b: BigInt) -> Result<Self, CurveError> {
        Self::new([BigInt::zero(), BigInt::zero(), BigInt::zero(), a, b], None)
    }

    pub fn label_or_model(&self) -> String {
        match &self.label {
            Some(l) => l.clone(),
            None => format!(
                "[{},{},{},{},{}]",
                self.a1, self.a2, self.a3, self.a4, self.a6
            ),
        }
    }

    pub fn coeffs(&self) -> [&BigInt; 5] {
        [&self.a1, &self.a2, &self.a3, &self.a4, &self.a6]
    }

    pub fn b2(&self) -> BigInt {
        &self.a1 * &self.a1 + 4 * &self.a2
    }

    pub fn b4(&self) -> BigInt {
        2 * &self.a4 + &self.a1 * &self.a3
    }

    pub fn b6(&self) -> BigInt {
        &self.a3 * &self.a3 + 4 * &self.a6
    }

    pub fn b8(&self) -> BigInt {
        let (a1, a2, a3, a4, a6) = (&self.a1, &self.a2, &self.a3, &self.a4, &self.a6);
        a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
    }

    pub fn c4(&self) -> BigInt {
        let b2 = self.b2();
        &b2 * &b2 - 24 * self.b4()
    }

    pub fn c6(&self) -> BigInt {
        let (b2, b4, b6) = (self.b2(), self.b4(), self.b6());
        -(&b2 * &b2 * &b2) + 36 * &b2 * &b4 - 216 * b6
    }

    pub fn discriminant(&self) -> BigInt {
        let (b2, b4, b6, b8) = (self.b2(), self.b4(), self.b6(), self.b8());
        -(&b2 * &b2 * &b8) - 8 * &b4 * &b4 * &b4 - 27 * &b6 * &b6 + 9 * &b2 * &b4 * &b6
    }

    pub fn has_good_reduction(&self, p: u64) -> bool {
        !self.discriminant().is_multiple_of(&BigInt::from(p))
    }

    /// Number of points mod `p` (including infinity) by direct solution count. `O(p^2)`.
    pub fn brute_point_count(&self, p: u64) -> u64 {
        let m = |v: &BigInt| v.mod_floor(&BigInt::from(p)).to_u64().unwrap();
        let [a1, a2, a3, a4, a6] = self.coeffs().map(m);
        let mut count = 1;
        for x in 0..p {
            for y in 0..p {
                let lhs = (y * y + a1 * x % p * y + a3 * y) % p;
                let rhs = (x * x % p * x + a2 * x % p * x + a4 * x + a6) % p;
                if lhs == rhs {
                    count += 1;
                }
            }
        }
        count
    }
}

/// The short model `y^2 = x^3 - 27 c4 x - 54 c6` over `Z/p^2`, isomorphic to `g` for `p >= 5`.
pub fn short_from_general(g: &GeneralCurve, p: u64) -> Result<LiftedCurve, CurveError> {
    if p < 5 {
        return Err(CurveError::SmallPrime(p));
    }
    if !g.has_good_reduction(p) {
        return Err(CurveError::BadReduction(p));
    }
    let ring = GaloisRing::with_degree(p, 1)?;
    let (a, b) = short_coefficients_mod(g, p * p);
    ShortCurve::new(ring.clone(), ring.from_residue(a), ring.from_residue(b))
}

/// `(-27 c4, -54 c6)` reduced into `[0, m)`.
pub fn short_coefficients_mod(g: &GeneralCurve, m: u64) -> (u64, u64) {
    let m = BigInt::from(m);
    let a = (BigInt::from(-27) * g.c4()).mod_floor(&m);
    let b = (BigInt::from(-54) * g.c6()).mod_floor(&m);
    (a.to_u64().unwrap(), b.to_u64().unwrap())
}
