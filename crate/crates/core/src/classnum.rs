//! Hurwitz class numbers from weighted reduced binary quadratic forms.
//!
//! Indexing is by the positive integer `N`, the negative of the discriminant:
//! `hurwitz(N)` counts forms `A x^2 + B xy + C y^2` with `B^2 - 4AC = -N`.
//! All values are carried as the integer `6 H(N)`.

use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default largest `N` accepted by [`class_number_table`].
pub const DEFAULT_TABLE_BUDGET: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClassNumberError {
    #[error("table up to {requested} exceeds budget {budget}")]
    BudgetExceeded { requested: u64, budget: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct HurwitzValue {
    pub six_times_h: u64,
}

impl HurwitzValue {
    pub fn as_ratio(&self) -> Ratio<u64> {
        Ratio::new(self.six_times_h, 6)
    }
}

/// Weight of the reduced form `(a, b, c)` in units of 1/6.
#[inline]
fn weight6(a: u64, b: i64, c: u64) -> u64 {
    if b == 0 && a == c {
        3
    } else if b == a as i64 && a == c {
        2
    } else {
        6
    }
}

/// `6 H(N)` by enumerating reduced forms of discriminant `-N`.
pub fn hurwitz(n: u64) -> HurwitzValue {
    if n == 0 || n % 4 == 1 || n % 4 == 2 {
        return HurwitzValue::default();
    }
    let mut total = 0;
    // |B| <= A <= C gives 3 B^2 <= 3 A^2 <= N.
    let mut b = n % 2;
    while 3 * b * b <= n {
        let ac = (b * b + n) / 4;
        let mut a = b.max(1);
        while a * a <= ac {
            if ac.is_multiple_of(a) {
                let c = ac / a;
                total += weight6(a, b as i64, c);
                // (A, -B, C) is a distinct reduced form unless B = 0, B = A or A = C.
                if b > 0 && b < a && a < c {
                    total += 6;
                }
            }
            a += 1;
        }
        b += 2;
    }
    HurwitzValue { six_times_h: total }
}

/// `6 H(N)` for every `N <= n_max`, in one pass over `(A, B, C)`.
///
/// Entry `N` of the returned vector is `hurwitz(N).six_times_h`.
pub fn class_number_table(n_max: u64, budget: u64) -> Result<Vec<u64>, ClassNumberError> {
    if n_max > budget {
        return Err(ClassNumberError::BudgetExceeded {
            requested: n_max,
            budget,
        });
    }
    let len = n_max as usize + 1;
    let max_a = (1..)
        .take_while(|a: &u64| 3 * a * a <= n_max)
        .last()
        .unwrap_or(0);
    // Shard by A; each shard fills its own table and shards are summed.
    let table = (1..=max_a)
        .into_par_iter()
        .fold(
            || vec![0u64; len],
            |mut table, a| {
                for b in -(a as i64) + 1..=a as i64 {
                    let b2 = (b * b) as u64;
                    let mut c = a;
                    loop {
                        let n = 4 * a * c - b2;
                        if n > n_max {
                            break;
                        }
                        if !(b < 0 && a == c) {
                            table[n as usize] += weight6(a, b, c);
                        }
                        c += 1;
                    }
                }
                table
            },
        )
        .reduce(
            || vec![0u64; len],
            |mut x, y| {
                for (u, v) in x.iter_mut().zip(y) {
                    *u += v;
                }
                x
            },
        );
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Sum of divisors and sum of min(d, n/d).
    fn sigma_and_lambda(n: u64) -> (i64, i64) {
        let (mut s, mut l) = (0i64, 0i64);
        for d in 1..=n {
            if n.is_multiple_of(d) {
                s += d as i64;
                l += d.min(n / d) as i64;
            }
        }
        (s, l)
    }

    #[test]
    fn small_values() {
        assert_eq!(hurwitz(3).six_times_h, 2);
        assert_eq!(hurwitz(4).six_times_h, 3);
        assert_eq!(hurwitz(19).six_times_h, 6);
        assert_eq!(hurwitz(27).six_times_h, 8);
        assert_eq!(hurwitz(12).six_times_h, 8);
        assert_eq!(hurwitz(23).six_times_h, 18);
        assert_eq!(hurwitz(5).six_times_h, 0);
        assert_eq!(hurwitz(6).six_times_h, 0);
        assert_eq!(hurwitz(19).as_ratio(), Ratio::new(1, 1));
    }

    #[test]
    fn table_examples() {
        let t4 = class_number_table(4, DEFAULT_TABLE_BUDGET).unwrap();
        assert_eq!(t4[3], hurwitz(3).six_times_h);
        let t20 = class_number_table(20, DEFAULT_TABLE_BUDGET).unwrap();
        assert_eq!(t20[19], 6);
        assert_eq!(t20[5], 0);
        assert_eq!(
            class_number_table(100, 50),
            Err(ClassNumberError::BudgetExceeded {
                requested: 100,
                budget: 50
            })
        );
    }

    #[test]
    fn table_matches_direct_enumeration() {
        let t = class_number_table(3000, DEFAULT_TABLE_BUDGET).unwrap();
        for (n, &v) in t.iter().enumerate().skip(1) {
            assert_eq!(v, hurwitz(n as u64).six_times_h, "N={n}");
        }
    }

    #[test]
    fn kronecker_hurwitz_relation() {
        // sum_t H(4n - t^2) = 2 sigma(n) - lambda(n), with H(0) = -1/12.
        let t = class_number_table(4 * 400, DEFAULT_TABLE_BUDGET).unwrap();
        for n in 1..=400u64 {
            let mut twelve_sum: i64 = 0;
            let mut s = 0i64;
            while s * s <= 4 * n as i64 {
                let v = 4 * n as i64 - s * s;
                let h6 = if v == 0 { -1 } else { 2 * t[v as usize] as i64 };
                // Each t != 0 appears twice (t and -t); work in units of 1/12.
                twelve_sum += if s == 0 { h6 } else { 2 * h6 };
                s += 1;
            }
            let (sigma, lambda) = sigma_and_lambda(n);
            assert_eq!(twelve_sum, 12 * (2 * sigma - lambda), "n={n}");
        }
    }
}
