//! Binomials, lexicographic t-subsets and the per-message occurrence counter
//! that assigns fresh symbol positions to each subset sum.

use itertools::Itertools;
use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use super::SchemeError;

/// Exact binomial coefficient; zero when `k > n`.
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

pub(crate) fn binomial_usize(n: usize, k: usize) -> Result<usize, SchemeError> {
    binomial(n as u64, k as u64)
        .to_usize()
        .ok_or(SchemeError::TooLarge(format!("C({n},{k})")))
}

pub(crate) fn check_t(t: usize, deg: usize) -> Result<(), SchemeError> {
    if t == 0 || t > deg {
        return Err(SchemeError::TOutOfRange { t, deg });
    }
    Ok(())
}

/// All `t`-subsets of `index_set` in lexicographic order with respect to the
/// given element order.
pub fn lex_subsets(index_set: &[usize], t: usize) -> Result<Vec<Vec<usize>>, SchemeError> {
    check_t(t, index_set.len())?;
    Ok(index_set.iter().copied().combinations(t).collect())
}

/// Number of subsets among the first `p` (1-based) that contain `element`.
pub fn gamma(subsets: &[Vec<usize>], element: usize, p: usize) -> Result<usize, SchemeError> {
    match subsets.get(p.wrapping_sub(1)) {
        Some(s) if s.contains(&element) => {}
        _ => return Err(SchemeError::ElementAbsent { element, position: p }),
    }
    Ok(subsets[..p].iter().filter(|s| s.contains(&element)).count())
}

/// `table[p][x]` is the counter value of `subsets[p][x]` at subset `p`, computed
/// in one pass.
pub(crate) fn gamma_table(subsets: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut seen = std::collections::HashMap::new();
    subsets
        .iter()
        .map(|s| {
            s.iter()
                .map(|&l| {
                    let c = seen.entry(l).or_insert(0usize);
                    *c += 1;
                    *c
                })
                .collect()
        })
        .collect()
}

/// Symbols per message for the t-sum construction.
pub fn subpacketization(deg_i: usize, deg_j: usize, t_i: usize, t_j: usize) -> Result<usize, SchemeError> {
    check_t(t_i, deg_i)?;
    check_t(t_j, deg_j)?;
    Ok(binomial_usize(deg_i - 1, t_i - 1)? + binomial_usize(deg_j - 1, t_j - 1)?)
}

/// Total symbols downloaded per retrieval by the t-sum construction, counted
/// as sums at both endpoints plus one interference singleton per
/// (subset, undesired member) pair over subsets holding the desired message.
pub fn et_download_cost(deg_i: usize, deg_j: usize, t_i: usize, t_j: usize) -> Result<usize, SchemeError> {
    check_t(t_i, deg_i)?;
    check_t(t_j, deg_j)?;
    let side = |d: usize, t: usize| -> Result<usize, SchemeError> {
        let sums = binomial_usize(d, t)?;
        let interference = if t >= 2 {
            (d - 1) * binomial_usize(d - 2, t - 2)?
        } else {
            0
        };
        Ok(sums + interference)
    };
    Ok(side(deg_i, t_i)? + side(deg_j, t_j)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use num_bigint::BigInt;

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), BigUint::from(10u32));
        assert_eq!(binomial(0, 0), BigUint::one());
        assert_eq!(binomial(3, 4), BigUint::zero());
        // Pascal's rule as an independent check
        for n in 1..40u64 {
            for k in 1..n {
                assert_eq!(binomial(n, k), binomial(n - 1, k - 1) + binomial(n - 1, k));
            }
        }
    }

    #[test]
    fn subpacketization_examples() {
        assert_eq!(subpacketization(2, 2, 2, 2).unwrap(), 2);
        assert_eq!(subpacketization(3, 3, 2, 2).unwrap(), 4);
        for d in 1..10 {
            assert_eq!(subpacketization(1, d, 1, 1).unwrap(), 2);
        }
        assert_eq!(
            subpacketization(2, 2, 3, 1),
            Err(SchemeError::TOutOfRange { t: 3, deg: 2 })
        );
        assert!(subpacketization(2, 2, 0, 1).is_err());
    }

    #[test]
    fn lex_subset_examples() {
        assert_eq!(
            lex_subsets(&[1, 2, 3], 2).unwrap(),
            vec![vec![1, 2], vec![1, 3], vec![2, 3]]
        );
        assert_eq!(lex_subsets(&[1, 4], 2).unwrap(), vec![vec![1, 4]]);
        assert_eq!(
            lex_subsets(&[1, 4, 5], 1).unwrap(),
            vec![vec![1], vec![4], vec![5]]
        );
        assert!(lex_subsets(&[1, 2], 3).is_err());
    }

    #[test]
    fn gamma_examples() {
        let s = lex_subsets(&[1, 2, 3], 2).unwrap();
        assert_eq!(gamma(&s, 1, 2).unwrap(), 2);
        assert_eq!(gamma(&s, 1, 1).unwrap(), 1);
        assert_eq!(gamma(&s, 3, 3).unwrap(), 2);
        assert_eq!(
            gamma(&s, 3, 1),
            Err(SchemeError::ElementAbsent { element: 3, position: 1 })
        );
        assert!(gamma(&s, 1, 0).is_err());
        assert!(gamma(&s, 1, 4).is_err());
    }

    #[test]
    fn gamma_table_agrees_with_gamma_and_range() {
        for d in 1..8usize {
            let set: Vec<usize> = (1..=d).map(|x| x * 3).collect();
            for t in 1..=d {
                let subs = lex_subsets(&set, t).unwrap();
                let table = gamma_table(&subs);
                let cap = binomial_usize(d - 1, t - 1).unwrap();
                for (p, s) in subs.iter().enumerate() {
                    for (x, &l) in s.iter().enumerate() {
                        assert_eq!(table[p][x], gamma(&subs, l, p + 1).unwrap());
                        assert!((1..=cap).contains(&table[p][x]));
                    }
                }
            }
        }
    }

    #[test]
    fn download_cost_examples() {
        assert_eq!(et_download_cost(2, 2, 2, 2).unwrap(), 4);
        assert_eq!(et_download_cost(3, 3, 2, 2).unwrap(), 10);
        for d in 1..12 {
            assert_eq!(et_download_cost(d, d, 1, 1).unwrap(), 2 * d);
        }
    }

    #[test]
    fn download_cost_matches_rational_closed_form() {
        let closed = |d: usize, t: usize| {
            let c = BigRational::from_integer(BigInt::from(binomial(d as u64 - 1, t as u64 - 1)));
            let term = BigRational::new(BigInt::from(d), BigInt::from(t))
                + BigRational::from_integer(BigInt::from(t as i64 - 1));
            c * term
        };
        for di in 1..9 {
            for dj in 1..9 {
                for ti in 1..=di {
                    for tj in 1..=dj {
                        let got = et_download_cost(di, dj, ti, tj).unwrap();
                        let want = closed(di, ti) + closed(dj, tj);
                        assert_eq!(BigRational::from_integer(BigInt::from(got)), want);
                    }
                }
            }
        }
    }
}
