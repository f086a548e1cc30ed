//! Exact arithmetic in `F_p`, `F_{p^d}`, `Z/p^2` and the Galois ring `GR(p^2, d)`.
//!
//! `GR(p^2, d) = (Z/p^2)[t]/(f)` where `f` is the coefficient-wise lift of a
//! monic irreducible polynomial of degree `d` over `F_p`. For length-two Witt
//! vectors over an unramified base this ring is isomorphic to `W_2(F_{p^d})`,
//! so no Witt-vector addition or multiplication polynomials are needed.
//!
//! Elements are plain coefficient arrays; they do not carry their ring. All
//! arithmetic goes through a [`FiniteField`] or [`GaloisRing`] handle, which
//! validates foreign coefficient data at the construction boundary.

use std::fmt;
use std::hash::Hash;
use std::sync::Arc;

use num_bigint::BigUint;
use thiserror::Error;

use crate::arith::{add_mod, inv_mod, is_prime, mul_mod, sub_mod};

/// Largest supported extension degree.
pub const MAX_DEGREE: usize = 6;

type Coeffs = [u64; MAX_DEGREE];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RingError {
    #[error("{0} is not prime")]
    CompositeModulus(u64),
    #[error("characteristic {0} is unsupported (need an odd prime below 2^32)")]
    InvalidCharacteristic(u64),
    #[error("extension degree {0} is outside 1..={MAX_DEGREE}")]
    DegreeOutOfRange(usize),
    #[error("element does not belong to this ring context")]
    ContextMismatch,
    #[error("element is not a unit")]
    NonUnit,
    #[error("root is not simple: derivative vanishes mod p")]
    SingularRoot,
    #[error("value is not a root mod p")]
    NotARoot,
}

/// A prime `p`, a degree `d`, and the monic modulus defining both
/// `F_{p^d}` and `GR(p^2, d)`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RingContext {
    p: u64,
    d: usize,
    /// Low coefficients `c_0 .. c_{d-1}` of the monic modulus, in `[0, p)`.
    modulus: Coeffs,
}

impl fmt::Debug for RingContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RingContext(p={}, d={}, t^{}", self.p, self.d, self.d)?;
        for i in (0..self.d).rev() {
            if self.modulus[i] != 0 {
                write!(f, " + {}*t^{}", self.modulus[i], i)?;
            }
        }
        write!(f, ")")
    }
}

impl RingContext {
    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn degree(&self) -> usize {
        self.d
    }

    pub fn p_squared(&self) -> u64 {
        self.p * self.p
    }

    /// Low coefficients `c_0 .. c_{d-1}` of the monic modulus.
    pub fn modulus(&self) -> &[u64] {
        &self.modulus[..self.d]
    }
}

/// Deterministically selects the modulus for `F_{p^d}` / `GR(p^2, d)`.
///
/// Monic degree-`d` polynomials are scanned in ascending lexicographic order
/// of `(c_0, ..., c_{d-1})` and the first irreducible one is returned. For
/// `d = 1` the modulus is `t`, so the rings are `F_p` and `Z/p^2`.
pub fn find_modulus(p: u64, d: usize) -> Result<RingContext, RingError> {
    if p == 2 || p >= 1 << 32 {
        return Err(RingError::InvalidCharacteristic(p));
    }
    if !is_prime(p) {
        return Err(RingError::CompositeModulus(p));
    }
    if d == 0 || d > MAX_DEGREE {
        return Err(RingError::DegreeOutOfRange(d));
    }
    let mut modulus = [0u64; MAX_DEGREE];
    if d == 1 {
        return Ok(RingContext { p, d, modulus });
    }
    // c_0 = 0 always has the root 0, so start the scan at c_0 = 1.
    modulus[0] = 1;
    loop {
        if is_irreducible(&modulus[..d], p) {
            return Ok(RingContext { p, d, modulus });
        }
        // Lexicographic increment with c_{d-1} varying fastest.
        let mut i = d - 1;
        loop {
            modulus[i] += 1;
            if modulus[i] < p {
                break;
            }
            modulus[i] = 0;
            // The scan always terminates: irreducibles of every degree exist.
            i -= 1;
        }
    }
}

/// Irreducibility of the monic polynomial `t^d + sum c_i t^i` over `F_p`.
///
/// For `d <= 3` irreducibility is equivalent to having no root in `F_p`,
/// tested as `gcd(t^p - t, f) = 1`; higher degrees use Rabin's test.
fn is_irreducible(low: &[u64], p: u64) -> bool {
    let d = low.len();
    let mut f: Vec<u64> = low.to_vec();
    f.push(1);
    let frob = |g: &[u64]| fp_poly::pow_mod(g, p, &f, p);
    let t = vec![0, 1];
    if d <= 3 {
        let tp = frob(&t);
        let diff = fp_poly::sub(&tp, &t, p);
        return fp_poly::degree(&fp_poly::gcd(&f, &diff, p)) == Some(0);
    }
    // Rabin: f | t^{p^d} - t, and gcd(t^{p^{d/q}} - t, f) = 1 for primes q | d.
    let mut powers = vec![t.clone()];
    for _ in 0..d {
        let next = frob(powers.last().unwrap());
        powers.push(next);
    }
    if !fp_poly::sub(&powers[d], &t, p).is_empty() {
        return false;
    }
    for (q, _) in crate::arith::factorize(d as u64) {
        let k = d / q as usize;
        let diff = fp_poly::sub(&powers[k], &t, p);
        if fp_poly::degree(&fp_poly::gcd(&f, &diff, p)) != Some(0) {
            return false;
        }
    }
    true
}

/// Dense polynomials over `F_p`, lowest coefficient first, no trailing zeros.
mod fp_poly {
    use crate::arith::{inv_mod, mul_mod, sub_mod};

    pub fn trim(mut v: Vec<u64>) -> Vec<u64> {
        while v.last() == Some(&0) {
            v.pop();
        }
        v
    }

    pub fn degree(v: &[u64]) -> Option<usize> {
        if v.is_empty() {
            None
        } else {
            Some(v.len() - 1)
        }
    }

    pub fn sub(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        let n = a.len().max(b.len());
        let out = (0..n)
            .map(|i| {
                let x = a.get(i).copied().unwrap_or(0);
                let y = b.get(i).copied().unwrap_or(0);
                sub_mod(x, y, p)
            })
            .collect();
        trim(out)
    }

    pub fn mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![0u64; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                out[i + j] = (out[i + j] + mul_mod(x, y, p)) % p;
            }
        }
        trim(out)
    }

    /// `(quotient, remainder)` of `a / b`, `b` nonzero.
    pub fn divrem(a: &[u64], b: &[u64], p: u64) -> (Vec<u64>, Vec<u64>) {
        let mut r = trim(a.to_vec());
        let db = b.len() - 1;
        let lead_inv = inv_mod(b[db], p).expect("nonzero leading coefficient");
        if r.len() < b.len() {
            return (Vec::new(), r);
        }
        let mut q = vec![0u64; r.len() - db];
        while r.len() >= b.len() {
            let shift = r.len() - b.len();
            let c = mul_mod(*r.last().unwrap(), lead_inv, p);
            q[shift] = c;
            for (j, &bj) in b.iter().enumerate() {
                r[shift + j] = sub_mod(r[shift + j], mul_mod(c, bj, p), p);
            }
            r = trim(r);
        }
        (trim(q), r)
    }

    pub fn gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        let (mut x, mut y) = (trim(a.to_vec()), trim(b.to_vec()));
        while !y.is_empty() {
            let (_, r) = divrem(&x, &y, p);
            x = y;
            y = r;
        }
        x
    }

    pub fn pow_mod(base: &[u64], mut exp: u64, m: &[u64], p: u64) -> Vec<u64> {
        let mut acc = vec![1u64];
        let mut b = divrem(base, m, p).1;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = divrem(&mul(&acc, &b, p), m, p).1;
            }
            b = divrem(&mul(&b, &b, p), m, p).1;
            exp >>= 1;
        }
        acc
    }

    /// Inverse of `a` modulo `m` by the extended Euclidean algorithm.
    pub fn inv_mod_poly(a: &[u64], m: &[u64], p: u64) -> Option<Vec<u64>> {
        let (mut r0, mut r1) = (trim(m.to_vec()), divrem(a, m, p).1);
        let (mut s0, mut s1): (Vec<u64>, Vec<u64>) = (Vec::new(), vec![1]);
        while !r1.is_empty() {
            let (q, r) = divrem(&r0, &r1, p);
            let s = sub(&s0, &mul(&q, &s1, p), p);
            r0 = r1;
            r1 = r;
            s0 = s1;
            s1 = s;
        }
        if r0.len() != 1 {
            return None;
        }
        let c = inv_mod(r0[0], p)?;
        Some(s0.iter().map(|&x| mul_mod(x, c, p)).collect())
    }
}

/// Common interface of the coefficient rings curves are defined over.
pub trait Ring: Clone + Send + Sync + fmt::Debug {
    type Elem: Copy + Eq + Ord + Hash + fmt::Debug + Send + Sync;

    fn context(&self) -> &RingContext;
    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    #[allow(clippy::wrong_self_convention)]
    fn from_int(&self, v: i64) -> Self::Elem;
    fn add(&self, x: &Self::Elem, y: &Self::Elem) -> Self::Elem;
    fn sub(&self, x: &Self::Elem, y: &Self::Elem) -> Self::Elem;
    fn neg(&self, x: &Self::Elem) -> Self::Elem;
    fn mul(&self, x: &Self::Elem, y: &Self::Elem) -> Self::Elem;
    fn is_unit(&self, x: &Self::Elem) -> bool;
    fn inv(&self, x: &Self::Elem) -> Result<Self::Elem, RingError>;

    fn is_zero(&self, x: &Self::Elem) -> bool {
        *x == self.zero()
    }

    fn square(&self, x: &Self::Elem) -> Self::Elem {
        self.mul(x, x)
    }

    fn pow(&self, x: &Self::Elem, mut e: u64) -> Self::Elem {
        let mut acc = self.one();
        let mut b = *x;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &b);
            }
            b = self.mul(&b, &b);
            e >>= 1;
        }
        acc
    }
}

fn coeff_add(x: &Coeffs, y: &Coeffs, d: usize, q: u64) -> Coeffs {
    let mut out = [0u64; MAX_DEGREE];
    for i in 0..d {
        out[i] = add_mod(x[i], y[i], q);
    }
    out
}

fn coeff_sub(x: &Coeffs, y: &Coeffs, d: usize, q: u64) -> Coeffs {
    let mut out = [0u64; MAX_DEGREE];
    for i in 0..d {
        out[i] = sub_mod(x[i], y[i], q);
    }
    out
}

fn coeff_neg(x: &Coeffs, d: usize, q: u64) -> Coeffs {
    let mut out = [0u64; MAX_DEGREE];
    for i in 0..d {
        out[i] = if x[i] == 0 { 0 } else { q - x[i] };
    }
    out
}

/// Product in `(Z/q)[t]/(modulus)`; the modulus is monic so reduction is exact.
fn coeff_mul(x: &Coeffs, y: &Coeffs, ctx: &RingContext, q: u64) -> Coeffs {
    let d = ctx.d;
    if d == 1 {
        let mut out = [0u64; MAX_DEGREE];
        out[0] = mul_mod(x[0], y[0], q);
        return out;
    }
    let mut wide = [0u128; 2 * MAX_DEGREE - 1];
    for i in 0..d {
        if x[i] == 0 {
            continue;
        }
        for j in 0..d {
            wide[i + j] = (wide[i + j] + x[i] as u128 * y[j] as u128) % q as u128;
        }
    }
    for k in (d..2 * d - 1).rev() {
        let c = wide[k];
        if c == 0 {
            continue;
        }
        wide[k] = 0;
        // t^k = t^{k-d} * t^d = -t^{k-d} * sum m_i t^i
        for i in 0..d {
            let sub = (c * ctx.modulus[i] as u128) % q as u128;
            let slot = &mut wide[k - d + i];
            *slot = (*slot + q as u128 - sub) % q as u128;
        }
    }
    let mut out = [0u64; MAX_DEGREE];
    for i in 0..d {
        out[i] = wide[i] as u64;
    }
    out
}

fn validate(coeffs: &[u64], d: usize, q: u64) -> Result<Coeffs, RingError> {
    if coeffs.len() != d || coeffs.iter().any(|&c| c >= q) {
        return Err(RingError::ContextMismatch);
    }
    let mut out = [0u64; MAX_DEGREE];
    out[..d].copy_from_slice(coeffs);
    Ok(out)
}

/// An element of `F_{p^d}`: `d` coefficients in `[0, p)` over the basis `1, t, ..., t^{d-1}`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct FieldElement(Coeffs);

/// An element of `GR(p^2, d)`: `d` coefficients in `[0, p^2)`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct GaloisRingElement(Coeffs);

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F{:?}", trimmed(&self.0))
    }
}

impl fmt::Debug for GaloisRingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GR{:?}", trimmed(&self.0))
    }
}

fn trimmed(c: &Coeffs) -> &[u64] {
    let n = c.iter().rposition(|&x| x != 0).map_or(1, |i| i + 1);
    &c[..n]
}

impl FieldElement {
    /// Coefficient `i` (zero beyond the degree).
    pub fn coeff(&self, i: usize) -> u64 {
        self.0[i]
    }

    pub fn coeffs(&self) -> &[u64; MAX_DEGREE] {
        &self.0
    }

    /// The value as an integer in `[0, p)` when the element lies in the prime field.
    pub fn as_prime_field(&self) -> Option<u64> {
        if self.0[1..].iter().all(|&c| c == 0) {
            Some(self.0[0])
        } else {
            None
        }
    }
}

impl GaloisRingElement {
    pub fn coeff(&self, i: usize) -> u64 {
        self.0[i]
    }

    pub fn coeffs(&self) -> &[u64; MAX_DEGREE] {
        &self.0
    }
}

struct FieldInner {
    ctx: RingContext,
    order: BigUint,
    /// `q - 1 = 2^two_adicity * odd_part`.
    two_adicity: u32,
    odd_part: BigUint,
    nonresidue: FieldElement,
}

/// The finite field `F_{p^d}`.
#[derive(Clone)]
pub struct FiniteField {
    inner: Arc<FieldInner>,
}

impl fmt::Debug for FiniteField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FiniteField({:?})", self.inner.ctx)
    }
}

impl FiniteField {
    pub fn new(ctx: RingContext) -> Self {
        let order = BigUint::from(ctx.p).pow(ctx.d as u32);
        let q_minus_1 = &order - 1u32;
        let two_adicity = q_minus_1.trailing_zeros().unwrap_or(0) as u32;
        let odd_part = &q_minus_1 >> two_adicity;
        let mut field = FiniteField {
            inner: Arc::new(FieldInner {
                ctx,
                order,
                two_adicity,
                odd_part,
                nonresidue: FieldElement::default(),
            }),
        };
        // First non-square in enumeration order; half of all units qualify.
        let half = (&field.inner.order - 1u32) >> 1;
        let minus_one = field.neg(&field.one());
        let nonresidue = (1u64..)
            .map(|i| field.element_from_index(i))
            .find(|z| field.pow_big(z, &half) == minus_one)
            .expect("odd-order field has non-squares");
        Arc::get_mut(&mut field.inner).unwrap().nonresidue = nonresidue;
        field
    }

    /// `F_p` with the trivial modulus.
    pub fn prime(p: u64) -> Result<Self, RingError> {
        Ok(Self::new(find_modulus(p, 1)?))
    }

    pub fn with_degree(p: u64, d: usize) -> Result<Self, RingError> {
        Ok(Self::new(find_modulus(p, d)?))
    }

    pub fn p(&self) -> u64 {
        self.inner.ctx.p
    }

    pub fn degree(&self) -> usize {
        self.inner.ctx.d
    }

    /// `q = p^d`.
    pub fn order(&self) -> &BigUint {
        &self.inner.order
    }

    /// `q` as a machine word when it fits.
    pub fn order_u64(&self) -> Option<u64> {
        u64::try_from(&self.inner.order).ok()
    }

    pub fn element(&self, coeffs: &[u64]) -> Result<FieldElement, RingError> {
        validate(coeffs, self.degree(), self.p()).map(FieldElement)
    }

    /// The element whose base-`p` digits (lowest first) are the coefficients of `index`.
    pub fn element_from_index(&self, mut index: u64) -> FieldElement {
        let mut c = [0u64; MAX_DEGREE];
        for slot in c.iter_mut().take(self.degree()) {
            *slot = index % self.p();
            index /= self.p();
        }
        FieldElement(c)
    }

    /// Inverse of [`FiniteField::element_from_index`].
    pub fn index_of(&self, x: &FieldElement) -> u64 {
        x.0[..self.degree()]
            .iter()
            .rev()
            .fold(0, |acc, &c| acc * self.p() + c)
    }

    /// All `q` elements in index order. Intended for small fields only.
    pub fn elements(&self) -> impl Iterator<Item = FieldElement> + '_ {
        let q = self.order_u64().expect("field too large to enumerate");
        (0..q).map(move |i| self.element_from_index(i))
    }

    pub fn random_element<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> FieldElement {
        let mut c = [0u64; MAX_DEGREE];
        for slot in c.iter_mut().take(self.degree()) {
            *slot = rng.gen_range(0..self.p());
        }
        FieldElement(c)
    }

    pub fn pow_big(&self, x: &FieldElement, e: &BigUint) -> FieldElement {
        let mut acc = self.one();
        for i in (0..e.bits()).rev() {
            acc = self.mul(&acc, &acc);
            if e.bit(i) {
                acc = self.mul(&acc, x);
            }
        }
        acc
    }

    /// `x -> x^p`.
    pub fn frobenius(&self, x: &FieldElement) -> FieldElement {
        self.pow(x, self.p())
    }

    pub fn is_square(&self, x: &FieldElement) -> bool {
        if self.is_zero(x) {
            return true;
        }
        let half = (self.order() - 1u32) >> 1;
        self.pow_big(x, &half) == self.one()
    }

    /// Square root with the lexicographically smaller coefficient vector of `{y, -y}`.
    pub fn sqrt(&self, x: &FieldElement) -> Option<FieldElement> {
        if self.is_zero(x) {
            return Some(*x);
        }
        if !self.is_square(x) {
            return None;
        }
        // Tonelli-Shanks over F_q.
        let inner = &self.inner;
        let mut m = inner.two_adicity;
        let mut c = self.pow_big(&inner.nonresidue, &inner.odd_part);
        let mut t = self.pow_big(x, &inner.odd_part);
        let mut r = self.pow_big(x, &((&inner.odd_part + 1u32) >> 1));
        let one = self.one();
        while t != one {
            let mut i = 0;
            let mut t2 = t;
            while t2 != one {
                t2 = self.square(&t2);
                i += 1;
            }
            let mut b = c;
            for _ in 0..(m - i - 1) {
                b = self.square(&b);
            }
            m = i;
            c = self.square(&b);
            t = self.mul(&t, &c);
            r = self.mul(&r, &b);
        }
        let neg = self.neg(&r);
        Some(r.min(neg))
    }
}

impl Ring for FiniteField {
    type Elem = FieldElement;

    fn context(&self) -> &RingContext {
        &self.inner.ctx
    }

    fn zero(&self) -> FieldElement {
        FieldElement::default()
    }

    fn one(&self) -> FieldElement {
        let mut c = [0u64; MAX_DEGREE];
        c[0] = 1;
        FieldElement(c)
    }

    fn from_int(&self, v: i64) -> FieldElement {
        let mut c = [0u64; MAX_DEGREE];
        c[0] = crate::arith::reduce_i64(v, self.p());
        FieldElement(c)
    }

    fn add(&self, x: &FieldElement, y: &FieldElement) -> FieldElement {
        FieldElement(coeff_add(&x.0, &y.0, self.degree(), self.p()))
    }

    fn sub(&self, x: &FieldElement, y: &FieldElement) -> FieldElement {
        FieldElement(coeff_sub(&x.0, &y.0, self.degree(), self.p()))
    }

    fn neg(&self, x: &FieldElement) -> FieldElement {
        FieldElement(coeff_neg(&x.0, self.degree(), self.p()))
    }

    fn mul(&self, x: &FieldElement, y: &FieldElement) -> FieldElement {
        FieldElement(coeff_mul(&x.0, &y.0, &self.inner.ctx, self.p()))
    }

    fn is_unit(&self, x: &FieldElement) -> bool {
        !self.is_zero(x)
    }

    fn inv(&self, x: &FieldElement) -> Result<FieldElement, RingError> {
        let p = self.p();
        let d = self.degree();
        if d == 1 {
            let v = inv_mod(x.0[0], p).ok_or(RingError::NonUnit)?;
            return Ok(self.from_int(v as i64));
        }
        let a = fp_poly::trim(x.0[..d].to_vec());
        if a.is_empty() {
            return Err(RingError::NonUnit);
        }
        let mut m = self.inner.ctx.modulus[..d].to_vec();
        m.push(1);
        let inv = fp_poly::inv_mod_poly(&a, &m, p).ok_or(RingError::NonUnit)?;
        let mut c = [0u64; MAX_DEGREE];
        c[..inv.len()].copy_from_slice(&inv);
        Ok(FieldElement(c))
    }
}

/// The Galois ring `GR(p^2, d) ≅ W_2(F_{p^d})`.
#[derive(Clone)]
pub struct GaloisRing {
    ctx: Arc<RingContext>,
    field: FiniteField,
}

impl fmt::Debug for GaloisRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GaloisRing({:?})", self.ctx)
    }
}

impl GaloisRing {
    pub fn new(ctx: RingContext) -> Self {
        let field = FiniteField::new(ctx.clone());
        GaloisRing {
            ctx: Arc::new(ctx),
            field,
        }
    }

    pub fn with_degree(p: u64, d: usize) -> Result<Self, RingError> {
        Ok(Self::new(find_modulus(p, d)?))
    }

    /// The residue field `F_{p^d}` sharing this ring's modulus.
    pub fn residue_field(&self) -> &FiniteField {
        &self.field
    }

    pub fn p(&self) -> u64 {
        self.ctx.p
    }

    pub fn degree(&self) -> usize {
        self.ctx.d
    }

    fn q(&self) -> u64 {
        self.ctx.p * self.ctx.p
    }

    pub fn element(&self, coeffs: &[u64]) -> Result<GaloisRingElement, RingError> {
        validate(coeffs, self.degree(), self.q()).map(GaloisRingElement)
    }

    /// Reduction `GR(p^2, d) -> F_{p^d}`.
    pub fn reduce(&self, x: &GaloisRingElement) -> FieldElement {
        FieldElement(x.0.map(|v| v % self.p()))
    }

    /// Coefficient-wise lift `F_{p^d} -> GR(p^2, d)` (digits in `[0, p)`).
    pub fn lift(&self, x: &FieldElement) -> GaloisRingElement {
        GaloisRingElement(x.0)
    }

    /// The kernel element `p * lift(z)`.
    pub fn p_times(&self, z: &FieldElement) -> GaloisRingElement {
        GaloisRingElement(z.0.map(|v| v * self.p()))
    }

    /// Residue of an integer in `Z/p^2`, viewed as a constant.
    pub fn from_residue(&self, v: u64) -> GaloisRingElement {
        let mut c = [0u64; MAX_DEGREE];
        c[0] = v % self.q();
        GaloisRingElement(c)
    }

    pub fn random_element<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> GaloisRingElement {
        let mut c = [0u64; MAX_DEGREE];
        for slot in c.iter_mut().take(self.degree()) {
            *slot = rng.gen_range(0..self.q());
        }
        GaloisRingElement(c)
    }

    /// Evaluates `sum f_i X^i` at `x` by Horner's rule.
    pub fn eval_poly(&self, f: &[GaloisRingElement], x: &GaloisRingElement) -> GaloisRingElement {
        f.iter()
            .rev()
            .fold(self.zero(), |acc, c| self.add(&self.mul(&acc, x), c))
    }

    /// The unique root of `f` over `GR(p^2, d)` reducing to the simple root `r` of `f mod p`.
    ///
    /// One Newton step from the coefficient-wise lift of `r` suffices because
    /// the ring has nilpotency index two.
    pub fn hensel_lift_root(
        &self,
        f: &[GaloisRingElement],
        r: &FieldElement,
    ) -> Result<GaloisRingElement, RingError> {
        let field = &self.field;
        let reduced: Vec<FieldElement> = f.iter().map(|c| self.reduce(c)).collect();
        let value = reduced
            .iter()
            .rev()
            .fold(field.zero(), |acc, c| field.add(&field.mul(&acc, r), c));
        if !field.is_zero(&value) {
            return Err(RingError::NotARoot);
        }
        let derivative: Vec<GaloisRingElement> = f
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| self.mul(&self.from_int(i as i64), c))
            .collect();
        let r0 = self.lift(r);
        let fprime = self.eval_poly(&derivative, &r0);
        if !self.is_unit(&fprime) {
            return Err(RingError::SingularRoot);
        }
        let step = self.mul(&self.eval_poly(f, &r0), &self.inv(&fprime)?);
        Ok(self.sub(&r0, &step))
    }
}

impl Ring for GaloisRing {
    type Elem = GaloisRingElement;

    fn context(&self) -> &RingContext {
        &self.ctx
    }

    fn zero(&self) -> GaloisRingElement {
        GaloisRingElement::default()
    }

    fn one(&self) -> GaloisRingElement {
        self.from_residue(1)
    }

    fn from_int(&self, v: i64) -> GaloisRingElement {
        self.from_residue(crate::arith::reduce_i64(v, self.q()))
    }

    fn add(&self, x: &GaloisRingElement, y: &GaloisRingElement) -> GaloisRingElement {
        GaloisRingElement(coeff_add(&x.0, &y.0, self.degree(), self.q()))
    }

    fn sub(&self, x: &GaloisRingElement, y: &GaloisRingElement) -> GaloisRingElement {
        GaloisRingElement(coeff_sub(&x.0, &y.0, self.degree(), self.q()))
    }

    fn neg(&self, x: &GaloisRingElement) -> GaloisRingElement {
        GaloisRingElement(coeff_neg(&x.0, self.degree(), self.q()))
    }

    fn mul(&self, x: &GaloisRingElement, y: &GaloisRingElement) -> GaloisRingElement {
        GaloisRingElement(coeff_mul(&x.0, &y.0, &self.ctx, self.q()))
    }

    fn is_unit(&self, x: &GaloisRingElement) -> bool {
        !self.field.is_zero(&self.reduce(x))
    }

    fn inv(&self, x: &GaloisRingElement) -> Result<GaloisRingElement, RingError> {
        let y0 = self.lift(&self.field.inv(&self.reduce(x))?);
        // Newton: y = y0 (2 - x y0).
        let two = self.from_int(2);
        let corr = self.sub(&two, &self.mul(x, &y0));
        Ok(self.mul(&y0, &corr))
    }
}
