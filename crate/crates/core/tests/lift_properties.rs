mod common;

use std::collections::{BTreeMap, BTreeSet};

use common::*;
use proptest::prelude::*;

use local_torsion::counting::{ap_charsum, has_p_torsion_over_ext};
use local_torsion::lifttest::{
    canonical_lift_test, lifts_with_rank, nu_brute, LiftTester, DEFAULT_NU_BUDGET,
};

fn qualifying(a: u64, b: u64, p: u64, d: u32) -> Option<i64> {
    if !nonsingular(a, b, p) {
        return None;
    }
    let ap = ap_charsum(a, b, p).unwrap().ap;
    has_p_torsion_over_ext(ap, p, d).then_some(ap)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn verdict_is_independent_of_point_and_lift(
        p in prop::sample::select(vec![5u64, 7, 11, 13]),
        d in 1u32..=2,
        a in 1u64..13,
        b in 1u64..13,
        k in 0u64..169,
        pick_passing in any::<bool>(),
    ) {
        let (a, b) = (a % p, b % p);
        // Fall back to the first qualifying residue at or after (a, b).
        let Some((a, b)) = (0..p * p)
            .map(|i| ((a + i / p) % p, (b + i % p) % p))
            .find(|&(x, y)| qualifying(x, y, p, d).is_some())
        else {
            return Ok(());
        };
        let (big_a, big_b) = if pick_passing {
            let lifts = LiftTester::new(p, d).unwrap();
            let residue = lifts.residue(a, b, 0).unwrap();
            let passing = lifts.passing_lifts(&residue).unwrap();
            passing[(k as usize) % passing.len()]
        } else {
            (a + p * ((k / p) % p), b + p * (k % p))
        };
        let tester = LiftTester::new(p, d).unwrap();
        let base = tester.test(big_a, big_b).unwrap();
        prop_assert!(base || !pick_passing);
        for seed in 1..=5u64 {
            prop_assert_eq!(tester.test_with_seed(big_a, big_b, seed * 0x9e37 + k).unwrap(), base);
        }
    }
}

#[test]
fn divisibility_monotonicity() {
    for p in [5u64, 7] {
        for big_a in (0..p * p).step_by(3) {
            for big_b in (0..p * p).step_by(2) {
                if !nonsingular(big_a % p, big_b % p, p) {
                    continue;
                }
                for e in 1..=2u32 {
                    if !canonical_lift_test(big_a, big_b, p, e).unwrap() {
                        continue;
                    }
                    for e2 in (2 * e..=4).step_by(e as usize) {
                        assert!(
                            canonical_lift_test(big_a, big_b, p, e2).unwrap(),
                            "p={p} ({big_a},{big_b}) {e}|{e2}"
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn passing_lifts_form_one_j_fiber() {
    for (p, d) in [(5u64, 1u32), (7, 1), (7, 2), (11, 1)] {
        for a in 1..p {
            for b in 1..p {
                if qualifying(a, b, p, d).is_none() {
                    continue;
                }
                let passing: BTreeSet<(u64, u64)> =
                    lifts_with_rank(a, b, p, d).unwrap().into_iter().collect();
                let mut fibers: BTreeMap<u64, Vec<(u64, u64)>> = BTreeMap::new();
                for k in 0..p * p {
                    let lift = (a + p * (k / p), b + p * (k % p));
                    fibers
                        .entry(j_invariant(lift.0, lift.1, p))
                        .or_default()
                        .push(lift);
                }
                let passing_fibers: Vec<&Vec<(u64, u64)>> = fibers
                    .values()
                    .filter(|f| f.iter().any(|l| passing.contains(l)))
                    .collect();
                assert_eq!(passing_fibers.len(), 1, "p={p} d={d} ({a},{b})");
                let fiber: BTreeSet<(u64, u64)> = passing_fibers[0].iter().copied().collect();
                assert_eq!(fiber, passing);
                assert_eq!(passing.len() as u64, p);
            }
        }
    }
}

#[test]
fn exceptional_j_passing_lifts_are_the_exact_j_lifts() {
    for p in [5u64, 7, 19, 37] {
        for d in 1..=2u32 {
            let residues = (1..p).map(|b| (0, b)).chain((1..p).map(|a| (a, 0)));
            for (a, b) in residues {
                if qualifying(a, b, p, d).is_none() {
                    continue;
                }
                let tester = LiftTester::new(p, d).unwrap();
                let residue = tester.residue(a, b, 0).unwrap();
                let passing: BTreeSet<(u64, u64)> = tester
                    .passing_lifts(&residue)
                    .unwrap()
                    .into_iter()
                    .collect();
                let exact: BTreeSet<(u64, u64)> = (0..p)
                    .map(|t| {
                        if a == 0 {
                            (0, b + p * t)
                        } else {
                            (a + p * t, 0)
                        }
                    })
                    .collect();
                assert_eq!(passing, exact, "p={p} d={d} ({a},{b})");
            }
        }
    }
}

#[test]
fn nu_grows_along_divisibility() {
    let one = nu_brute(5, 1, DEFAULT_NU_BUDGET).unwrap();
    let two = nu_brute(5, 2, DEFAULT_NU_BUDGET).unwrap();
    assert!(one.nu <= two.nu);
    assert_eq!(one.nu, one.nu_prime + one.nu_0 + one.nu_1728);
    assert_eq!(two.nu, two.nu_prime + two.nu_0 + two.nu_1728);
    // Each qualifying residue contributes exactly p lifts.
    assert_eq!(one.nu % 5, 0);
    assert_eq!(two.nu % 5, 0);
}

#[test]
fn lift_test_matches_z_p2_enumeration_at_5() {
    let p = 5;
    for big_a in 0..p * p {
        for big_b in 0..p * p {
            if qualifying(big_a % p, big_b % p, p, 1).is_none() {
                continue;
            }
            let full_rank = p_torsion_z_p2(big_a, big_b, p) == p * p;
            assert_eq!(
                canonical_lift_test(big_a, big_b, p, 1).unwrap(),
                full_rank,
                "({big_a},{big_b})"
            );
        }
    }
}
