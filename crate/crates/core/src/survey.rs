//! Curve-level and family-level statistics of local torsion primes.

use std::collections::{BTreeMap, HashSet};
use std::io;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Ratio};
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{is_prime, multiplicative_order, primes_up_to, reduce_i64, seed_from};
use crate::counting::{trace_of_frobenius, CountingError, SquareTable, DEFAULT_BSGS_THRESHOLD};
use crate::curves::{short_coefficients_mod, CurveError, GeneralCurve};
use crate::lifttest::{
    lifts_with_rank, nu_brute, replay_witness, LiftError, LiftTester, LiftWitness, NuRecord,
};
use crate::padic::{
    small_prime_local_torsion, verify_witness, PadicError, PadicWitness, TorsionVerdict,
    DEFAULT_START_PRECISION, SUPPORTED_PRIMES,
};

/// Hard cap on the extension degree.
pub const MAX_SURVEY_DEGREE: u32 = 6;

/// Largest `4AB` swept exhaustively without sampling.
pub const DEFAULT_SWEEP_BUDGET: u64 = 100_000;

/// Most primes [`construct_curve`] accepts.
pub const MAX_CONSTRUCT_PRIMES: usize = 8;

/// The bundled curve models, `label,a1,a2,a3,a4,a6`.
pub const DEFAULT_CURVES_CSV: &str = include_str!("../data/curves.csv");

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SurveyError {
    #[error("{what} of {requested} exceeds budget {budget}")]
    BudgetExceeded {
        what: &'static str,
        requested: u64,
        budget: u64,
    },
    #[error("the family contains no nonsingular curve")]
    EmptyFamily,
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("prime {0} is below 5")]
    PrimeTooSmall(u64),
    #[error("prime {0} is listed twice")]
    DuplicatePrime(u64),
    #[error("{0} primes given, at most {MAX_CONSTRUCT_PRIMES} allowed")]
    TooManyPrimes(usize),
    #[error("no curve over F_{0} with exactly {0} points")]
    NoTargetCurve(u64),
    #[error("degree {0} is outside 1..={MAX_SURVEY_DEGREE}")]
    DegreeOutOfRange(u32),
    #[error("x_max = {0} is below the minimum {1}")]
    XmaxTooSmall(u64, u64),
    #[error("verdicts at p = {0} disagree across degrees")]
    DegreeInconsistency(u64),
    #[error("curve {0} not found")]
    UnknownCurve(String),
    #[error("curve file: {0}")]
    CurveFile(String),
    #[error(transparent)]
    Lift(#[from] LiftError),
    #[error(transparent)]
    Padic(#[from] PadicError),
    #[error(transparent)]
    Counting(#[from] CountingError),
    #[error(transparent)]
    Curve(#[from] CurveError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "lift-test")]
    LiftTest,
    #[serde(rename = "division-poly")]
    DivisionPoly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum UndeterminedReason {
    #[serde(rename = "bad-reduction-d≥2")]
    BadReductionHighDegree,
    #[serde(rename = "p≤d-ramified")]
    Ramified,
    #[serde(rename = "inconclusive-precision")]
    InconclusivePrecision,
    /// `p` in {2, 3} with `d >= 2` and no `Q_p`-point found.
    #[serde(rename = "small-prime-d≥2")]
    SmallPrimeHighDegree,
    /// Bad reduction at a prime outside the division-polynomial range.
    #[serde(rename = "bad-reduction-unsupported-prime")]
    BadReductionUnsupportedPrime,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoundPrime {
    pub p: u64,
    pub method: Method,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct UndeterminedPrime {
    pub p: u64,
    pub reason: UndeterminedReason,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Witness {
    Lift(LiftWitness),
    Padic(PadicWitness),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalTorsionReport {
    pub curve: String,
    pub xmax: u64,
    pub d: u32,
    pub found: Vec<FoundPrime>,
    pub undetermined: Vec<UndeterminedPrime>,
    /// One witness per found prime, in the same order.
    #[serde(skip)]
    pub witnesses: Vec<Witness>,
}

impl LocalTorsionReport {
    pub fn found_primes(&self) -> Vec<u64> {
        self.found.iter().map(|f| f.p).collect()
    }

    pub fn undetermined_primes(&self) -> Vec<u64> {
        self.undetermined.iter().map(|u| u.p).collect()
    }

    pub fn pi(&self) -> u64 {
        self.found.len() as u64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SurveyOptions {
    /// Run the lift test at every multiple of `ord_p(a_p)` up to `d` and
    /// require identical verdicts.
    pub all_degrees: bool,
    pub bsgs_threshold: u64,
    pub start_precision: u32,
}

impl Default for SurveyOptions {
    fn default() -> Self {
        SurveyOptions {
            all_degrees: false,
            bsgs_threshold: DEFAULT_BSGS_THRESHOLD,
            start_precision: DEFAULT_START_PRECISION,
        }
    }
}

enum PrimeOutcome {
    Found(FoundPrime, Witness),
    Undetermined(UndeterminedPrime),
    Absent,
}

/// Trace and screen data of a good prime `p >= 5`.
struct GoodPrime {
    big_a: u64,
    big_b: u64,
    ap: i64,
}

fn good_prime_data(
    g: &GeneralCurve,
    p: u64,
    options: &SurveyOptions,
) -> Result<GoodPrime, SurveyError> {
    let (big_a, big_b) = short_coefficients_mod(g, p * p);
    let ap = trace_of_frobenius(big_a % p, big_b % p, p, options.bsgs_threshold)?.ap;
    Ok(GoodPrime { big_a, big_b, ap })
}

fn lift_verdict(gp: &GoodPrime, p: u64, e: u32) -> Result<Option<LiftWitness>, SurveyError> {
    Ok(LiftTester::new(p, e)?.witness(gp.big_a, gp.big_b, 0)?)
}

fn classify_prime(
    g: &GeneralCurve,
    p: u64,
    d: u32,
    options: &SurveyOptions,
) -> Result<PrimeOutcome, SurveyError> {
    let good = g.has_good_reduction(p);
    let undetermined = |reason| Ok(PrimeOutcome::Undetermined(UndeterminedPrime { p, reason }));
    if p >= 5 && good {
        let gp = good_prime_data(g, p, options)?;
        if let Some(e) = multiplicative_order(gp.ap, p).filter(|&e| e <= d as u64) {
            let e = e as u32;
            let verdict = lift_verdict(&gp, p, e)?;
            if options.all_degrees {
                for e2 in (2 * e..=d).step_by(e as usize) {
                    if lift_verdict(&gp, p, e2)?.is_some() != verdict.is_some() {
                        return Err(SurveyError::DegreeInconsistency(p));
                    }
                }
            }
            if let Some(w) = verdict {
                let found = FoundPrime {
                    p,
                    method: Method::LiftTest,
                };
                return Ok(PrimeOutcome::Found(found, Witness::Lift(w)));
            }
        }
        if p <= d as u64 {
            return undetermined(UndeterminedReason::Ramified);
        }
        return Ok(PrimeOutcome::Absent);
    }
    if !SUPPORTED_PRIMES.contains(&p) {
        return undetermined(if d == 1 {
            UndeterminedReason::BadReductionUnsupportedPrime
        } else {
            UndeterminedReason::BadReductionHighDegree
        });
    }
    let out = small_prime_local_torsion(g, p, options.start_precision)?;
    match out.verdict {
        TorsionVerdict::Yes => {
            let found = FoundPrime {
                p,
                method: Method::DivisionPoly,
            };
            let w = out.witness.expect("positive verdicts carry a witness");
            Ok(PrimeOutcome::Found(found, Witness::Padic(w)))
        }
        TorsionVerdict::Inconclusive => undetermined(UndeterminedReason::InconclusivePrecision),
        TorsionVerdict::No if d == 1 => Ok(PrimeOutcome::Absent),
        // Only Q_p itself was examined; larger fields remain open.
        TorsionVerdict::No if !good => undetermined(UndeterminedReason::BadReductionHighDegree),
        TorsionVerdict::No if p <= d as u64 => undetermined(UndeterminedReason::Ramified),
        TorsionVerdict::No => undetermined(UndeterminedReason::SmallPrimeHighDegree),
    }
}

/// The primes `p <= x_max` at which `g` has a point of order `p` over an
/// extension of `Q_p` of degree at most `d`, with undecided primes listed apart.
pub fn local_torsion_primes(
    g: &GeneralCurve,
    x_max: u64,
    d: u32,
    options: &SurveyOptions,
) -> Result<LocalTorsionReport, SurveyError> {
    if d == 0 || d > MAX_SURVEY_DEGREE {
        return Err(SurveyError::DegreeOutOfRange(d));
    }
    if x_max < 2 {
        return Err(SurveyError::XmaxTooSmall(x_max, 2));
    }
    let outcomes: Result<Vec<PrimeOutcome>, SurveyError> = primes_up_to(x_max)
        .into_par_iter()
        .map(|p| classify_prime(g, p, d, options))
        .collect();
    let mut report = LocalTorsionReport {
        curve: g.label_or_model(),
        xmax: x_max,
        d,
        found: Vec::new(),
        undetermined: Vec::new(),
        witnesses: Vec::new(),
    };
    for outcome in outcomes? {
        match outcome {
            PrimeOutcome::Found(f, w) => {
                report.found.push(f);
                report.witnesses.push(w);
            }
            PrimeOutcome::Undetermined(u) => report.undetermined.push(u),
            PrimeOutcome::Absent => {}
        }
    }
    Ok(report)
}

/// Re-derives every positive verdict from its witness.
pub fn replay_report(g: &GeneralCurve, report: &LocalTorsionReport) -> Result<bool, SurveyError> {
    for (f, w) in report.found.iter().zip(&report.witnesses) {
        let ok = match w {
            Witness::Lift(lw) => {
                let (a, b) = short_coefficients_mod(g, f.p * f.p);
                lw.p == f.p
                    && (lw.a, lw.b) == (a, b)
                    && crate::counting::has_p_torsion_over_ext(lw.ap, f.p, lw.degree)
                    && replay_witness(lw)?
            }
            Witness::Padic(pw) => pw.p == f.p && verify_witness(g, pw),
        };
        if !ok {
            return Ok(false);
        }
    }
    Ok(report.found.len() == report.witnesses.len())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PiCf {
    pub count: u64,
    pub primes: Vec<u64>,
}

/// Good primes `7 <= p <= x_max` with `a_p = +-1` and a positive lift test at
/// degree `ord_p(a_p)`.
pub fn pi_cf(g: &GeneralCurve, x_max: u64, options: &SurveyOptions) -> Result<PiCf, SurveyError> {
    if x_max < 7 {
        return Err(SurveyError::XmaxTooSmall(x_max, 7));
    }
    let hits: Result<Vec<Option<u64>>, SurveyError> = primes_up_to(x_max)
        .into_par_iter()
        .filter(|&p| p >= 7 && g.has_good_reduction(p))
        .map(|p| {
            let gp = good_prime_data(g, p, options)?;
            let e = match gp.ap {
                1 => 1,
                -1 => 2,
                _ => return Ok(None),
            };
            Ok(lift_verdict(&gp, p, e)?.map(|_| p))
        })
        .collect();
    let primes: Vec<u64> = hits?.into_iter().flatten().collect();
    Ok(PiCf {
        count: primes.len() as u64,
        primes,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sampling {
    All,
    Random(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepRow {
    pub a: i64,
    pub b: i64,
    pub pi: u64,
    pub undetermined: u64,
    pub found: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepReport {
    #[serde(rename = "A")]
    pub a_bound: u64,
    #[serde(rename = "B")]
    pub b_bound: u64,
    pub xmax: u64,
    pub d: u32,
    pub curve_count: u64,
    pub singular_count: u64,
    pub histogram: BTreeMap<u64, u64>,
    #[serde(with = "ratio_string")]
    pub average: Ratio<u64>,
    #[serde(skip)]
    pub rows: Vec<SweepRow>,
}

mod ratio_string {
    use num_rational::Ratio;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Ratio<u64>, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&r.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Ratio<u64>, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

fn short_curve(a: i64, b: i64) -> Option<GeneralCurve> {
    GeneralCurve::short(BigInt::from(a), BigInt::from(b)).ok()
}

/// `pi_E^d(x)` over `y^2 = x^3 + a x + b`, `|a| <= A`, `|b| <= B`.
pub fn sweep(
    a_bound: u64,
    b_bound: u64,
    x_max: u64,
    d: u32,
    sampling: Sampling,
    budget: u64,
    options: &SurveyOptions,
) -> Result<SweepReport, SurveyError> {
    let (ab, bb) = (a_bound as i64, b_bound as i64);
    let all_pairs = || (-ab..=ab).flat_map(move |a| (-bb..=bb).map(move |b| (a, b)));
    let singular_count = all_pairs()
        .filter(|&(a, b)| short_curve(a, b).is_none())
        .count() as u64;
    let mut pairs: Vec<(i64, i64)> = match sampling {
        Sampling::All => {
            let size = 4 * a_bound * b_bound;
            if size > budget {
                return Err(SurveyError::BudgetExceeded {
                    what: "4AB",
                    requested: size,
                    budget,
                });
            }
            all_pairs()
                .filter(|&(a, b)| short_curve(a, b).is_some())
                .collect()
        }
        Sampling::Random(n) => {
            let total = (2 * ab + 1) * (2 * bb + 1) - singular_count as i64;
            let n = n.min(total.max(0) as usize);
            let mut rng = ChaCha8Rng::seed_from_u64(seed_from(&[
                a_bound, b_bound, x_max, d as u64, n as u64,
            ]));
            let mut chosen = HashSet::new();
            while chosen.len() < n {
                let pair = (rng.gen_range(-ab..=ab), rng.gen_range(-bb..=bb));
                if short_curve(pair.0, pair.1).is_some() {
                    chosen.insert(pair);
                }
            }
            chosen.into_iter().collect()
        }
    };
    if pairs.is_empty() {
        return Err(SurveyError::EmptyFamily);
    }
    pairs.sort_by_key(|&(a, b)| (a.abs(), a, b.abs(), b));
    let rows: Result<Vec<SweepRow>, SurveyError> = pairs
        .par_iter()
        .map(|&(a, b)| {
            let g = short_curve(a, b).expect("filtered");
            let r = local_torsion_primes(&g, x_max, d, options)?;
            Ok(SweepRow {
                a,
                b,
                pi: r.pi(),
                undetermined: r.undetermined.len() as u64,
                found: r.found_primes(),
            })
        })
        .collect();
    let rows = rows?;
    let mut histogram = BTreeMap::new();
    let mut total = 0;
    for row in &rows {
        *histogram.entry(row.pi).or_insert(0) += 1;
        total += row.pi;
    }
    Ok(SweepReport {
        a_bound,
        b_bound,
        xmax: x_max,
        d,
        curve_count: rows.len() as u64,
        singular_count,
        histogram,
        average: Ratio::new(total, rows.len() as u64),
        rows,
    })
}

/// Writes `a,b,pi` rows.
pub fn write_sweep_csv<W: io::Write>(report: &SweepReport, out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["a", "b", "pi"])?;
    for row in &report.rows {
        w.write_record([row.a.to_string(), row.b.to_string(), row.pi.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// `sum_{p <= x} 1 / (4 p^{3/2})` with Neumaier compensation.
pub fn heuristic_sum(x_max: u64) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for p in primes_up_to(x_max) {
        let term = 1.0 / (4.0 * (p as f64).powf(1.5));
        let t = sum + term;
        if sum.abs() >= term.abs() {
            comp += (sum - t) + term;
        } else {
            comp += (term - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstructedPrime {
    pub p: u64,
    /// The curve over `F_p` with exactly `p` points.
    pub a: u64,
    pub b: u64,
    /// The chosen lift over `Z/p^2`.
    pub lift_a: u64,
    pub lift_b: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Construction {
    #[serde(rename = "A", with = "bigint_string")]
    pub a: BigInt,
    #[serde(rename = "B", with = "bigint_string")]
    pub b: BigInt,
    #[serde(with = "bigint_string")]
    pub modulus: BigInt,
    pub components: Vec<ConstructedPrime>,
}

mod bigint_string {
    use num_bigint::BigInt;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// `(A, B)` in `Z` such that every `p` in `primes` is a local torsion prime of
/// `y^2 = x^3 + A x + B`.
///
/// For each `p`, the first `(a, b)` over `F_p` (both nonzero) with `a_p = 1`
/// is taken, then its first lift passing the lift test; the lifts are glued by
/// the Chinese remainder theorem modulo the product of the `p^2`.
pub fn construct_curve(primes: &[u64]) -> Result<Construction, SurveyError> {
    if primes.len() > MAX_CONSTRUCT_PRIMES {
        return Err(SurveyError::TooManyPrimes(primes.len()));
    }
    let mut seen = HashSet::new();
    for &p in primes {
        if !is_prime(p) {
            return Err(SurveyError::NotPrime(p));
        }
        if p < 5 {
            return Err(SurveyError::PrimeTooSmall(p));
        }
        if !seen.insert(p) {
            return Err(SurveyError::DuplicatePrime(p));
        }
    }
    let mut components = Vec::new();
    for &p in primes {
        let table = SquareTable::new(p);
        let (a, b) = (1..p)
            .flat_map(|a| (1..p).map(move |b| (a, b)))
            .find(|&(a, b)| crate::counting::ap_charsum_with(a, b, &table) == Ok(1))
            .ok_or(SurveyError::NoTargetCurve(p))?;
        let (lift_a, lift_b) = *lifts_with_rank(a, b, p, 1)?
            .first()
            .ok_or(SurveyError::NoTargetCurve(p))?;
        components.push(ConstructedPrime {
            p,
            a,
            b,
            lift_a,
            lift_b,
        });
    }
    let mut modulus = BigInt::from(1);
    let (mut big_a, mut big_b) = (BigInt::zero(), BigInt::zero());
    for c in &components {
        let m = BigInt::from(c.p * c.p);
        big_a = crt(&big_a, &modulus, &BigInt::from(c.lift_a), &m);
        big_b = crt(&big_b, &modulus, &BigInt::from(c.lift_b), &m);
        modulus *= m;
    }
    // Keep the global model nonsingular; shifting B by the modulus preserves every residue.
    while GeneralCurve::short(big_a.clone(), big_b.clone()).is_err() {
        big_b += &modulus;
    }
    Ok(Construction {
        a: big_a,
        b: big_b,
        modulus,
        components,
    })
}

/// The residue mod `m1 m2` congruent to `r1 mod m1` and `r2 mod m2` (coprime moduli).
fn crt(r1: &BigInt, m1: &BigInt, r2: &BigInt, m2: &BigInt) -> BigInt {
    let e = m1.extended_gcd(m2);
    debug_assert!(e.gcd == BigInt::from(1));
    let m = m1 * m2;
    // r1 + m1 * ((r2 - r1) * m1^{-1} mod m2)
    let t = ((r2 - r1) * e.x).mod_floor(m2);
    (r1 + m1 * t).mod_floor(&m)
}

/// The characters on `(Z/15)^x` as printed: values at `n = 1, 2, 4, 7, 8, 11, 13, 14`.
pub struct CharacterTable15;

impl CharacterTable15 {
    pub const N: [u64; 8] = [1, 2, 4, 7, 8, 11, 13, 14];
    pub const CHI1: [u64; 8] = [1, 13, 4, 13, 7, 1, 7, 4];
    pub const CHI2: [u64; 8] = [1, 14, 1, 4, 14, 11, 4, 11];

    fn index(n: u64) -> Option<usize> {
        Self::N.iter().position(|&m| m == n % 15)
    }

    pub fn chi1(n: u64) -> Option<u64> {
        Self::index(n).map(|i| Self::CHI1[i])
    }

    pub fn chi2(n: u64) -> Option<u64> {
        Self::index(n).map(|i| Self::CHI2[i])
    }
}

/// Allowed residues of `a_p mod 15` for the curve `y^2 + xy + y = x^3 - x - 2`.
pub const ALLOWED_AP_MOD_15: [u64; 6] = [0, 2, 5, 6, 11, 12];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiftyA1Row {
    pub p: u64,
    pub ap: i64,
    pub chi_sum_mod_15: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiftyA1Report {
    pub xmax: u64,
    pub primes_checked: u64,
    /// Primes where `a_p != chi1(p) + chi2(p) mod 15`.
    pub character_violations: Vec<u64>,
    /// Primes where `a_p mod 15` lies outside the allowed residues.
    pub residue_violations: Vec<u64>,
    /// Primes where `a_p = +-1 mod 15`.
    pub plus_minus_one: Vec<u64>,
    #[serde(skip)]
    pub rows: Vec<FiftyA1Row>,
}

pub fn fifty_a1() -> GeneralCurve {
    GeneralCurve::from_ints([1, 0, 1, -1, -2], Some("50A1")).expect("nonsingular")
}

/// Checks the mod-15 congruence for every good `7 <= p <= x_max`.
pub fn verify_50a1(x_max: u64) -> Result<FiftyA1Report, SurveyError> {
    if x_max < 7 {
        return Err(SurveyError::XmaxTooSmall(x_max, 7));
    }
    let g = fifty_a1();
    let options = SurveyOptions::default();
    let rows: Result<Vec<FiftyA1Row>, SurveyError> = primes_up_to(x_max)
        .into_par_iter()
        .filter(|&p| p >= 7 && g.has_good_reduction(p))
        .map(|p| {
            let ap = good_prime_data(&g, p, &options)?.ap;
            let chi = CharacterTable15::chi1(p).unwrap() + CharacterTable15::chi2(p).unwrap();
            Ok(FiftyA1Row {
                p,
                ap,
                chi_sum_mod_15: chi % 15,
            })
        })
        .collect();
    let rows = rows?;
    let mut report = FiftyA1Report {
        xmax: x_max,
        primes_checked: rows.len() as u64,
        character_violations: Vec::new(),
        residue_violations: Vec::new(),
        plus_minus_one: Vec::new(),
        rows: Vec::new(),
    };
    for row in &rows {
        let r = reduce_i64(row.ap, 15);
        if r != row.chi_sum_mod_15 {
            report.character_violations.push(row.p);
        }
        if !ALLOWED_AP_MOD_15.contains(&r) {
            report.residue_violations.push(row.p);
        }
        if r == 1 || r == 14 {
            report.plus_minus_one.push(row.p);
        }
    }
    report.rows = rows;
    Ok(report)
}

/// Good odd primes `p <= x_max` where `a_p` is odd although `g` has a rational
/// 2-torsion point (which forces `2 | #E(F_p)`).
pub fn two_torsion_parity_violations(
    g: &GeneralCurve,
    x_max: u64,
) -> Result<Vec<u64>, SurveyError> {
    let options = SurveyOptions::default();
    let bad: Result<Vec<Option<u64>>, SurveyError> = primes_up_to(x_max)
        .into_par_iter()
        .filter(|&p| p >= 5 && g.has_good_reduction(p))
        .map(|p| {
            let ap = good_prime_data(g, p, &options)?.ap;
            Ok((ap % 2 != 0).then_some(p))
        })
        .collect();
    Ok(bad?.into_iter().flatten().collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NuSums {
    pub records: Vec<NuRecord>,
    pub sum_nu: u64,
    #[serde(with = "big_ratio_string")]
    pub sum_over_p2: BigRational,
    #[serde(with = "big_ratio_string")]
    pub sum_over_p4: BigRational,
}

mod big_ratio_string {
    use num_rational::BigRational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&r.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// Exact `(sum nu, sum nu/p^2, sum nu/p^4)` over primes `5 <= p <= p_max`.
pub fn empirical_nu_sums(p_max: u64, d: u32, budget: u64) -> Result<NuSums, SurveyError> {
    let mut out = NuSums {
        records: Vec::new(),
        sum_nu: 0,
        sum_over_p2: BigRational::zero(),
        sum_over_p4: BigRational::zero(),
    };
    for p in primes_up_to(p_max).into_iter().filter(|&p| p >= 5) {
        let rec = nu_brute(p, d, budget)?;
        out.sum_nu += rec.nu;
        let nu = BigInt::from(rec.nu);
        out.sum_over_p2 += BigRational::new(nu.clone(), BigInt::from(p * p));
        out.sum_over_p4 += BigRational::new(nu, BigInt::from(p).pow(4));
        out.records.push(rec);
    }
    Ok(out)
}

#[derive(Debug, Deserialize)]
struct CurveRow {
    label: String,
    a1: String,
    a2: String,
    a3: String,
    a4: String,
    a6: String,
}

/// Parses `label,a1,a2,a3,a4,a6` rows.
pub fn load_curves<R: io::Read>(input: R) -> Result<Vec<GeneralCurve>, SurveyError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut out = Vec::new();
    for row in reader.deserialize::<CurveRow>() {
        let row = row.map_err(|e| SurveyError::CurveFile(e.to_string()))?;
        let parse = |s: &str| {
            s.parse::<BigInt>()
                .map_err(|e| SurveyError::CurveFile(format!("{}: {s:?}: {e}", row.label)))
        };
        let coeffs = [
            parse(&row.a1)?,
            parse(&row.a2)?,
            parse(&row.a3)?,
            parse(&row.a4)?,
            parse(&row.a6)?,
        ];
        out.push(GeneralCurve::new(coeffs, Some(row.label.clone()))?);
    }
    Ok(out)
}

/// The bundled model with the given label (case-insensitive).
pub fn find_curve(curves: &[GeneralCurve], label: &str) -> Result<GeneralCurve, SurveyError> {
    curves
        .iter()
        .find(|g| {
            g.label
                .as_deref()
                .is_some_and(|l| l.eq_ignore_ascii_case(label))
        })
        .cloned()
        .ok_or_else(|| SurveyError::UnknownCurve(label.to_string()))
}

pub fn bundled_curve(label: &str) -> Result<GeneralCurve, SurveyError> {
    find_curve(&load_curves(DEFAULT_CURVES_CSV.as_bytes())?, label)
}

/// Average as a float, for display.
pub fn ratio_to_f64(r: &Ratio<u64>) -> f64 {
    r.numer().to_f64().unwrap_or(f64::NAN) / r.denom().to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heuristic_examples() {
        assert_eq!(heuristic_sum(1), 0.0);
        assert!((heuristic_sum(2) - 1.0 / (4.0 * 2f64.powf(1.5))).abs() < 1e-15);
        assert!((heuristic_sum(2) - 0.08839).abs() < 1e-5);
        assert!(heuristic_sum(10_000) < heuristic_sum(1_000_000));
        assert!(heuristic_sum(1_000_000) < 0.26);
    }

    #[test]
    fn character_table_values() {
        assert_eq!(CharacterTable15::chi1(7), Some(13));
        assert_eq!(CharacterTable15::chi2(7), Some(4));
        assert_eq!(CharacterTable15::chi1(11), Some(1));
        assert_eq!(CharacterTable15::chi2(11), Some(11));
        assert_eq!(CharacterTable15::chi1(5), None);
        // chi1(n) + chi2(n) mod 15 covers exactly the allowed residues.
        let mut sums: Vec<u64> = (0..8)
            .map(|i| (CharacterTable15::CHI1[i] + CharacterTable15::CHI2[i]) % 15)
            .collect();
        sums.sort();
        sums.dedup();
        assert_eq!(sums, ALLOWED_AP_MOD_15.to_vec());
    }

    #[test]
    fn fifty_a1_small() {
        let r = verify_50a1(100).unwrap();
        let a7 = r.rows.iter().find(|row| row.p == 7).unwrap();
        assert_eq!(a7.ap, 2);
        assert_eq!(a7.chi_sum_mod_15, 2);
        let a11 = r.rows.iter().find(|row| row.p == 11).unwrap();
        assert_eq!(reduce_i64(a11.ap, 15), 12);
        assert!(r.character_violations.is_empty());
        assert!(r.rows.iter().all(|row| row.p != 5));
        assert_eq!(verify_50a1(5), Err(SurveyError::XmaxTooSmall(5, 7)));
    }

    #[test]
    fn sweep_rejects_empty_and_oversized() {
        let o = SurveyOptions::default();
        assert_eq!(
            sweep(0, 0, 10, 1, Sampling::All, DEFAULT_SWEEP_BUDGET, &o),
            Err(SurveyError::EmptyFamily)
        );
        assert!(matches!(
            sweep(200, 200, 10, 1, Sampling::All, DEFAULT_SWEEP_BUDGET, &o),
            Err(SurveyError::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn sweep_bookkeeping() {
        let o = SurveyOptions::default();
        let r = sweep(3, 2, 30, 1, Sampling::All, DEFAULT_SWEEP_BUDGET, &o).unwrap();
        assert_eq!(r.histogram.values().sum::<u64>(), r.curve_count);
        assert_eq!(r.curve_count + r.singular_count, 7 * 5);
        let singular: Vec<(i64, i64)> = (-3..=3)
            .flat_map(|a| (-2..=2).map(move |b| (a, b)))
            .filter(|&(a, b)| 4 * a * a * a + 27 * b * b == 0)
            .collect();
        assert_eq!(r.singular_count, singular.len() as u64);
        let total: u64 = r.rows.iter().map(|row| row.pi).sum();
        assert_eq!(r.average, Ratio::new(total, r.curve_count));
        let mut csv = Vec::new();
        write_sweep_csv(&r, &mut csv).unwrap();
        assert!(String::from_utf8(csv).unwrap().starts_with("a,b,pi\n0,-1,"));
    }

    #[test]
    fn construct_argument_checks() {
        assert_eq!(construct_curve(&[4]), Err(SurveyError::NotPrime(4)));
        assert_eq!(construct_curve(&[3]), Err(SurveyError::PrimeTooSmall(3)));
        assert_eq!(
            construct_curve(&[5, 5]),
            Err(SurveyError::DuplicatePrime(5))
        );
        assert_eq!(
            construct_curve(&[5, 7, 11, 13, 17, 19, 23, 29, 31]),
            Err(SurveyError::TooManyPrimes(9))
        );
    }

    #[test]
    fn construct_five() {
        let c = construct_curve(&[5]).unwrap();
        assert_eq!((c.components[0].a, c.components[0].b), (3, 2));
        let g = GeneralCurve::short(c.a.clone(), c.b.clone()).unwrap();
        let r = local_torsion_primes(&g, 10, 1, &SurveyOptions::default()).unwrap();
        assert!(r.found_primes().contains(&5));
    }

    #[test]
    fn crt_combines() {
        let r = crt(
            &BigInt::from(3),
            &BigInt::from(25),
            &BigInt::from(5),
            &BigInt::from(49),
        );
        assert_eq!(&r % 25, BigInt::from(3));
        assert_eq!(&r % 49, BigInt::from(5));
    }

    #[test]
    fn bundled_curves_load() {
        let curves = load_curves(DEFAULT_CURVES_CSV.as_bytes()).unwrap();
        assert_eq!(curves.len(), 4);
        let g = bundled_curve("50a1").unwrap();
        assert_eq!(g, fifty_a1());
        assert!(matches!(
            bundled_curve("11A1"),
            Err(SurveyError::UnknownCurve(_))
        ));
        let bad = "label,a1,a2,a3,a4,a6\nX,1,2,3,4,notanumber\n";
        assert!(matches!(
            load_curves(bad.as_bytes()),
            Err(SurveyError::CurveFile(_))
        ));
    }

    #[test]
    fn degree_and_xmax_guards() {
        let g = fifty_a1();
        let o = SurveyOptions::default();
        assert_eq!(
            local_torsion_primes(&g, 10, 0, &o),
            Err(SurveyError::DegreeOutOfRange(0))
        );
        assert_eq!(
            local_torsion_primes(&g, 10, 7, &o),
            Err(SurveyError::DegreeOutOfRange(7))
        );
        assert_eq!(
            local_torsion_primes(&g, 1, 1, &o),
            Err(SurveyError::XmaxTooSmall(1, 2))
        );
    }
}
