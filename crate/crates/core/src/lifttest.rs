//! Detecting the extra `p`-rank of `E(W_2)` and counting pairs that have it.
//!
//! For an ordinary curve over `Z/p^2` whose reduction has a point `Q` of order
//! `p` over `F_{p^e}`, the `p`-rank of `E(GR(p^2, e))` is `e + 1` exactly when
//! some (equivalently every) lift `Q'` of `Q` is killed by `p`. The test asks
//! whether `[p-1]Q' = -Q'` so that every group operation has a unit denominator.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{reduce_i64, seed_from};
use crate::classnum::hurwitz;
use crate::counting::{
    ap_charsum_with, find_point_of_order_p_seeded, has_p_torsion_over_ext, CountingError,
    SquareTable,
};
use crate::curves::{CurveError, CurvePoint, FieldCurve, FieldPoint, LiftedCurve, ShortCurve};
use crate::rings::{FiniteField, GaloisRing, Ring, RingError, MAX_DEGREE};

/// Largest `p` accepted by [`nu_brute`] unless a larger budget is passed.
pub const DEFAULT_NU_BUDGET: u64 = 13;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LiftError {
    #[error("prime {0} is below 5")]
    SmallPrime(u64),
    #[error("curve is singular mod p")]
    SingularCurve,
    #[error("precondition violated: {0}")]
    PreconditionViolated(PreconditionReason),
    #[error("p = {p} exceeds the enumeration budget {budget}")]
    BudgetExceeded { p: u64, budget: u64 },
    #[error("r = {r} is outside 0 < |r| < 2 sqrt(p)")]
    TraceOutOfRange { r: i64 },
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Counting(#[from] CountingError),
    #[error(transparent)]
    Ring(#[from] RingError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PreconditionReason {
    Supersingular,
    NoPTorsion,
    ExceptionalJ,
}

impl std::fmt::Display for PreconditionReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PreconditionReason::Supersingular => "supersingular",
            PreconditionReason::NoPTorsion => "no p-torsion",
            PreconditionReason::ExceptionalJ => "exceptional j",
        })
    }
}

/// Counts of pairs `(A, B)` in `(Z/p^2)^2` with `p`-rank `d + 1` over `W_2`.
///
/// The split is by the reduction: `a = 0` (so `j = 0`) goes to `nu_0`,
/// `b = 0` (`j = 1728`) to `nu_1728`, everything else to `nu_prime`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NuRecord {
    pub p: u64,
    pub d: u32,
    pub nu: u64,
    pub nu_prime: u64,
    pub nu_0: u64,
    pub nu_1728: u64,
    pub pairs_examined: u64,
}

/// Data to replay a positive verdict: the curve over `Z/p^2`, the degree of
/// the extension, and the lifted point `Q'` (coefficients over `GR(p^2, e)`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LiftWitness {
    pub p: u64,
    pub degree: u32,
    pub ap: i64,
    pub a: u64,
    pub b: u64,
    pub qx: Vec<u64>,
    pub qy: Vec<u64>,
}

/// The reduction data shared by all `p^2` lifts of one `(a, b)` over `F_p`.
#[derive(Debug, Clone)]
pub struct Residue {
    pub a: u64,
    pub b: u64,
    pub ap: i64,
    /// A point of order `p` over `F_{p^e}`, present when the screen passes.
    pub point: Option<FieldPoint>,
}

/// Runs the lift test over `GR(p^2, e)` for a fixed `p` and `e`.
#[derive(Debug, Clone)]
pub struct LiftTester {
    p: u64,
    degree: u32,
    ring: GaloisRing,
    table: SquareTable,
}

impl LiftTester {
    pub fn new(p: u64, degree: u32) -> Result<Self, LiftError> {
        if p < 5 {
            return Err(LiftError::SmallPrime(p));
        }
        let ring = GaloisRing::with_degree(p, degree as usize)?;
        Ok(LiftTester {
            p,
            degree,
            ring,
            table: SquareTable::new(p),
        })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn ring(&self) -> &GaloisRing {
        &self.ring
    }

    pub fn field(&self) -> &FiniteField {
        self.ring.residue_field()
    }

    fn field_curve(&self, a: u64, b: u64) -> Result<FieldCurve, LiftError> {
        ShortCurve::from_ints(self.field().clone(), a as i64, b as i64)
            .map_err(|_| LiftError::SingularCurve)
    }

    /// Screens `(a, b)` over `F_p` and, if it passes, picks a point of order `p`.
    pub fn residue(&self, a: u64, b: u64, salt: u64) -> Result<Residue, LiftError> {
        let (a, b) = (a % self.p, b % self.p);
        let ap = ap_charsum_with(a, b, &self.table).map_err(|_| LiftError::SingularCurve)?;
        let point = if has_p_torsion_over_ext(ap, self.p, self.degree) {
            let curve = self.field_curve(a, b)?;
            Some(find_point_of_order_p_seeded(&curve, ap, salt)?)
        } else {
            None
        };
        Ok(Residue { a, b, ap, point })
    }

    fn lifted_curve(&self, big_a: u64, big_b: u64) -> Result<LiftedCurve, LiftError> {
        let r = &self.ring;
        ShortCurve::new(r.clone(), r.from_residue(big_a), r.from_residue(big_b))
            .map_err(|_| LiftError::SingularCurve)
    }

    /// The verdict for the lift `(A, B)` of `residue`, with the kernel offset of
    /// the lifted `x`-coordinate drawn from `salt` (zero when `salt = 0`).
    pub fn test_lift(
        &self,
        residue: &Residue,
        big_a: u64,
        big_b: u64,
        salt: u64,
    ) -> Result<Option<LiftWitness>, LiftError> {
        let Some(q) = residue.point else {
            return Ok(None);
        };
        let curve = self.lifted_curve(big_a, big_b)?;
        let field = self.field();
        let offset = if salt == 0 {
            field.zero()
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(seed_from(&[self.p, big_a, big_b, salt]));
            field.random_element(&mut rng)
        };
        let lifted = curve.lift_point(&q, &offset)?;
        let r = curve.scalar_mul_unit(self.p - 1, &lifted)?;
        if r != curve.neg(&lifted) {
            return Ok(None);
        }
        let (CurvePoint::Affine(x, y), d) = (lifted, self.degree as usize) else {
            unreachable!("lift of an affine point is affine")
        };
        Ok(Some(LiftWitness {
            p: self.p,
            degree: self.degree,
            ap: residue.ap,
            a: big_a,
            b: big_b,
            qx: x.coeffs()[..d].to_vec(),
            qy: y.coeffs()[..d].to_vec(),
        }))
    }

    /// The canonical-lift test for `(A, B)` with `A, B` read mod `p^2`.
    pub fn test(&self, big_a: u64, big_b: u64) -> Result<bool, LiftError> {
        self.test_with_seed(big_a, big_b, 0)
    }

    /// As [`LiftTester::test`], with `seed` varying both `Q` and its lift.
    pub fn test_with_seed(&self, big_a: u64, big_b: u64, seed: u64) -> Result<bool, LiftError> {
        Ok(self.witness(big_a, big_b, seed)?.is_some())
    }

    pub fn witness(
        &self,
        big_a: u64,
        big_b: u64,
        seed: u64,
    ) -> Result<Option<LiftWitness>, LiftError> {
        let p2 = self.p * self.p;
        let (big_a, big_b) = (big_a % p2, big_b % p2);
        let residue = self.residue(big_a, big_b, seed)?;
        self.test_lift(&residue, big_a, big_b, seed)
    }

    /// All lifts of `(a, b)` (residues mod `p`) passing the test, in `(A, B)` order.
    pub fn passing_lifts(&self, residue: &Residue) -> Result<Vec<(u64, u64)>, LiftError> {
        let p = self.p;
        let results: Result<Vec<Option<(u64, u64)>>, LiftError> = (0..p * p)
            .into_par_iter()
            .map(|k| {
                let (big_a, big_b) = (residue.a + p * (k / p), residue.b + p * (k % p));
                Ok(self
                    .test_lift(residue, big_a, big_b, 0)?
                    .map(|_| (big_a, big_b)))
            })
            .collect();
        Ok(results?.into_iter().flatten().collect())
    }
}

/// Re-checks a witness from scratch: `Q'` is on the curve, its reduction has
/// order exactly `p`, and `[p-1]Q' = -Q'` holds exactly.
pub fn replay_witness(w: &LiftWitness) -> Result<bool, LiftError> {
    let ring = GaloisRing::with_degree(w.p, w.degree as usize)?;
    let curve = ShortCurve::new(ring.clone(), ring.from_residue(w.a), ring.from_residue(w.b))
        .map_err(|_| LiftError::SingularCurve)?;
    let pt = curve.point(ring.element(&w.qx)?, ring.element(&w.qy)?)?;
    let base = curve.reduce()?;
    let q0 = curve.reduce_point(&pt);
    if q0.is_infinity() || !base.mul(w.p, &q0).is_infinity() {
        return Ok(false);
    }
    Ok(curve.scalar_mul_unit(w.p - 1, &pt)? == curve.neg(&pt))
}

/// True iff `E_{A,B}` over `Z/p^2` has `p`-rank `d + 1` over `GR(p^2, d)`.
pub fn canonical_lift_test(big_a: u64, big_b: u64, p: u64, d: u32) -> Result<bool, LiftError> {
    LiftTester::new(p, d)?.test(big_a, big_b)
}

/// `d + 1` when the lift test passes, `d` otherwise.
pub fn local_p_rank(big_a: u64, big_b: u64, p: u64, d: u32) -> Result<u32, LiftError> {
    Ok(d + canonical_lift_test(big_a, big_b, p, d)? as u32)
}

/// The lifts `(A, B)` in `(Z/p^2)^2` of `(a, b)` whose `p`-rank over `GR(p^2, d)` is `d + 1`.
pub fn lifts_with_rank(a: u64, b: u64, p: u64, d: u32) -> Result<Vec<(u64, u64)>, LiftError> {
    let tester = LiftTester::new(p, d)?;
    let (a, b) = (a % p, b % p);
    let residue = tester.residue(a, b, 0)?;
    if reduce_i64(residue.ap, p) == 0 {
        return Err(LiftError::PreconditionViolated(
            PreconditionReason::Supersingular,
        ));
    }
    if residue.point.is_none() {
        return Err(LiftError::PreconditionViolated(
            PreconditionReason::NoPTorsion,
        ));
    }
    if a == 0 || b == 0 {
        return Err(LiftError::PreconditionViolated(
            PreconditionReason::ExceptionalJ,
        ));
    }
    tester.passing_lifts(&residue)
}

/// Exhaustive `nu_d(p)` over all `p^4` pairs.
pub fn nu_brute(p: u64, d: u32, budget: u64) -> Result<NuRecord, LiftError> {
    if p > budget {
        return Err(LiftError::BudgetExceeded { p, budget });
    }
    let tester = LiftTester::new(p, d)?;
    let per_residue: Result<Vec<(u64, u64, u64)>, LiftError> = (0..p * p)
        .into_par_iter()
        .map(|k| {
            let (a, b) = (k / p, k % p);
            let residue = match tester.residue(a, b, 0) {
                Ok(r) => r,
                Err(LiftError::SingularCurve) => return Ok((0, 0, 0)),
                Err(e) => return Err(e),
            };
            let n = tester.passing_lifts(&residue)?.len() as u64;
            Ok(match (a, b) {
                (0, _) => (0, n, 0),
                (_, 0) => (0, 0, n),
                _ => (n, 0, 0),
            })
        })
        .collect();
    let (mut nu_prime, mut nu_0, mut nu_1728) = (0, 0, 0);
    for (x, y, z) in per_residue? {
        nu_prime += x;
        nu_0 += y;
        nu_1728 += z;
    }
    Ok(NuRecord {
        p,
        d,
        nu: nu_prime + nu_0 + nu_1728,
        nu_prime,
        nu_0,
        nu_1728,
        pairs_examined: p.pow(4),
    })
}

/// Exhaustive pair counts with `a_p = r` against the Hurwitz class number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeuringCheck {
    pub p: u64,
    pub r: i64,
    /// `#{(a, b) in F_p^x * F_p^x : a_p = r}`.
    pub count: u64,
    /// `#{(a, b) in F_p^2 nonsingular : a_p = r}`.
    pub count_all_pairs: u64,
    /// `6 H(4p - r^2)`.
    pub six_h: u64,
}

impl DeuringCheck {
    /// `6 (p - 1) H(4p - r^2)`.
    pub fn expected_six(&self) -> u64 {
        (self.p - 1) * self.six_h
    }

    /// `count == (p - 1) H(4p - r^2)`.
    pub fn units_match(&self) -> bool {
        6 * self.count == self.expected_six()
    }

    /// `count_all_pairs == (p - 1)/2 * H(4p - r^2)`.
    pub fn all_pairs_match_half(&self) -> bool {
        12 * self.count_all_pairs == self.expected_six()
    }
}

/// Counts pairs with `a_p = r` for every `r` at once.
fn trace_histogram(p: u64) -> (Vec<(i64, u64, u64)>, SquareTable) {
    let table = SquareTable::new(p);
    let mut hist: std::collections::BTreeMap<i64, (u64, u64)> = Default::default();
    for a in 0..p {
        for b in 0..p {
            if let Ok(ap) = ap_charsum_with(a, b, &table) {
                let e = hist.entry(ap).or_default();
                e.1 += 1;
                if a != 0 && b != 0 {
                    e.0 += 1;
                }
            }
        }
    }
    (
        hist.into_iter().map(|(r, (u, all))| (r, u, all)).collect(),
        table,
    )
}

pub fn verify_deuring(p: u64, r: i64) -> Result<DeuringCheck, LiftError> {
    if p < 5 {
        return Err(LiftError::SmallPrime(p));
    }
    if r == 0 || r * r >= 4 * p as i64 {
        return Err(LiftError::TraceOutOfRange { r });
    }
    let (hist, _) = trace_histogram(p);
    let (count, count_all_pairs) = hist
        .iter()
        .find(|(t, _, _)| *t == r)
        .map_or((0, 0), |&(_, u, all)| (u, all));
    Ok(DeuringCheck {
        p,
        r,
        count,
        count_all_pairs,
        six_h: hurwitz(4 * p - (r * r) as u64).six_times_h,
    })
}

/// [`verify_deuring`] for every admissible `r`, ascending.
pub fn verify_deuring_all(p: u64) -> Result<Vec<DeuringCheck>, LiftError> {
    if p < 5 {
        return Err(LiftError::SmallPrime(p));
    }
    let (hist, _) = trace_histogram(p);
    let bound = crate::arith::isqrt(4 * p - 1) as i64;
    Ok((-bound..=bound)
        .filter(|&r| r != 0)
        .map(|r| {
            let (count, count_all_pairs) = hist
                .iter()
                .find(|(t, _, _)| *t == r)
                .map_or((0, 0), |&(_, u, all)| (u, all));
            DeuringCheck {
                p,
                r,
                count,
                count_all_pairs,
                six_h: hurwitz(4 * p - (r * r) as u64).six_times_h,
            }
        })
        .collect())
}

/// The pairs over `F_p^x * F_p^x` with `a_p = r`.
pub fn pairs_with_trace(p: u64, r: i64) -> Vec<(u64, u64)> {
    let table = SquareTable::new(p);
    let mut out = Vec::new();
    for a in 1..p {
        for b in 1..p {
            if ap_charsum_with(a, b, &table) == Ok(r) {
                out.push((a, b));
            }
        }
    }
    out
}

/// Coefficient vector length guard for witnesses built outside this module.
pub fn witness_fits(w: &LiftWitness) -> bool {
    (1..=MAX_DEGREE).contains(&(w.degree as usize))
        && w.qx.len() == w.degree as usize
        && w.qy.len() == w.degree as usize
}
