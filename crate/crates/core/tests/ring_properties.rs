use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use local_torsion::rings::{FiniteField, GaloisRing, Ring};

const RINGS: [(u64, usize); 12] = [
    (3, 1),
    (3, 2),
    (3, 4),
    (5, 1),
    (5, 2),
    (5, 3),
    (7, 2),
    (7, 4),
    (11, 1),
    (11, 3),
    (13, 2),
    (13, 4),
];

fn check_axioms<R: Ring>(r: &R, x: R::Elem, y: R::Elem, z: R::Elem) {
    assert_eq!(r.mul(&r.mul(&x, &y), &z), r.mul(&x, &r.mul(&y, &z)));
    assert_eq!(r.add(&r.add(&x, &y), &z), r.add(&x, &r.add(&y, &z)));
    assert_eq!(r.mul(&x, &y), r.mul(&y, &x));
    assert_eq!(r.add(&x, &y), r.add(&y, &x));
    assert_eq!(
        r.mul(&x, &r.add(&y, &z)),
        r.add(&r.mul(&x, &y), &r.mul(&x, &z))
    );
    assert_eq!(r.add(&x, &r.neg(&x)), r.zero());
    assert_eq!(r.sub(&x, &y), r.add(&x, &r.neg(&y)));
    assert_eq!(r.mul(&x, &r.one()), x);
    if r.is_unit(&x) {
        assert_eq!(r.mul(&x, &r.inv(&x).unwrap()), r.one());
    } else {
        assert!(r.inv(&x).is_err());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn galois_ring_axioms(idx in 0..RINGS.len(), seed in any::<u64>()) {
        let (p, d) = RINGS[idx];
        let r = GaloisRing::with_degree(p, d).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (x, y, z) = (r.random_element(&mut rng), r.random_element(&mut rng), r.random_element(&mut rng));
        check_axioms(&r, x, y, z);
    }

    #[test]
    fn field_axioms(idx in 0..RINGS.len(), seed in any::<u64>()) {
        let (p, d) = RINGS[idx];
        let f = FiniteField::with_degree(p, d).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (x, y, z) = (f.random_element(&mut rng), f.random_element(&mut rng), f.random_element(&mut rng));
        check_axioms(&f, x, y, z);
        prop_assert_eq!(f.is_unit(&x), x != f.zero());
    }

    #[test]
    fn reduction_is_a_ring_map(idx in 0..RINGS.len(), seed in any::<u64>()) {
        let (p, d) = RINGS[idx];
        let r = GaloisRing::with_degree(p, d).unwrap();
        let f = r.residue_field();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (x, y) = (r.random_element(&mut rng), r.random_element(&mut rng));
        prop_assert_eq!(r.reduce(&r.mul(&x, &y)), f.mul(&r.reduce(&x), &r.reduce(&y)));
        prop_assert_eq!(r.reduce(&r.add(&x, &y)), f.add(&r.reduce(&x), &r.reduce(&y)));
        let u = f.random_element(&mut rng);
        prop_assert_eq!(r.reduce(&r.lift(&u)), u);
        prop_assert_eq!(r.is_unit(&x), f.is_unit(&r.reduce(&x)));
    }

    #[test]
    fn kernel_of_reduction_is_p_times_field(idx in 0..RINGS.len(), seed in any::<u64>()) {
        let (p, d) = RINGS[idx];
        let r = GaloisRing::with_degree(p, d).unwrap();
        let f = r.residue_field();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let z = f.random_element(&mut rng);
        let k = r.p_times(&z);
        prop_assert_eq!(r.reduce(&k), f.zero());
        prop_assert_eq!(r.square(&k), r.zero());
        prop_assert_eq!(r.mul(&r.from_int(p as i64), &k), r.zero());
        // Every element reducing to zero has this form.
        let x = r.random_element(&mut rng);
        let w = r.sub(&x, &r.lift(&r.reduce(&x)));
        prop_assert_eq!(r.reduce(&w), f.zero());
        let digits: Vec<u64> = w.coeffs()[..d].iter().map(|c| c / p).collect();
        prop_assert_eq!(r.p_times(&f.element(&digits).unwrap()), w);
    }
}

#[test]
fn frobenius_iterated_d_times_is_identity() {
    for p in [3u64, 5, 7, 11, 13] {
        for d in 1..=4 {
            let f = FiniteField::with_degree(p, d).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(p * 10 + d as u64);
            for _ in 0..50 {
                let x = f.random_element(&mut rng);
                let y = (0..d).fold(x, |y, _| f.frobenius(&y));
                assert_eq!(y, x, "p={p} d={d}");
                assert_eq!(f.pow(&x, p.pow(d as u32)), x);
            }
        }
    }
}

#[test]
fn unit_count_in_small_galois_rings() {
    for (p, d) in [(3u64, 2usize), (5, 1), (5, 2)] {
        let r = GaloisRing::with_degree(p, d).unwrap();
        let q2 = (p * p).pow(d as u32);
        let units = (0..q2)
            .filter(|&i| {
                let mut c = vec![0u64; d];
                let mut v = i;
                for slot in c.iter_mut() {
                    *slot = v % (p * p);
                    v /= p * p;
                }
                r.is_unit(&r.element(&c).unwrap())
            })
            .count() as u64;
        let q = p.pow(d as u32);
        assert_eq!(units, q * (q - 1));
    }
}
