use latlab::hecke::{
    enumerate_neighbors, hecke_count, is_prime, neighbor_matrices, next_prime_above, operator_norm_bound,
    verify_composition, HeckeType,
};
use latlab::lattice::{make_point, standard_lattice};
use latlab::{Mat, ZMat};
use std::collections::BTreeMap;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use proptest::prelude::*;

fn pw(p: u64, e: u32) -> BigInt {
    num_traits::pow(BigInt::from(p), e as usize)
}

/// `|Aut(⊕ ℤ/p^{eᵢ})|` for `e` sorted ascending, all positive.
fn aut_order(p: u64, e: &[u32]) -> BigInt {
    let r = e.len();
    let mut total = BigInt::one();
    for k in 0..r {
        let d = (0..r).filter(|&l| e[l] == e[k]).max().unwrap() + 1;
        let c = (0..r).filter(|&l| e[l] == e[k]).min().unwrap() + 1;
        total *= pw(p, d as u32) - pw(p, k as u32);
        total *= num_traits::pow(pw(p, e[k]), r - d);
        total *= num_traits::pow(pw(p, e[k] - 1), r - c + 1);
    }
    total
}

/// Surjections `ℤⁿ → G` divided by `|Aut G|`.
fn subgroup_count_oracle(p: u64, n: usize, exps: &[u32]) -> BigInt {
    let mut e: Vec<u32> = exps.iter().copied().filter(|&x| x > 0).collect();
    e.sort_unstable();
    let r = e.len();
    let order: BigInt = e.iter().map(|&x| pw(p, x)).product();
    let mut sur = num_traits::pow(order, n);
    for i in 0..r {
        sur *= pw(p, n as u32) - pw(p, i as u32);
    }
    sur /= pw(p, (r * n) as u32);
    let aut = aut_order(p, &e);
    assert!((&sur % &aut) == BigInt::from(0));
    sur / aut
}

#[test]
fn automorphism_orders_of_small_groups() {
    assert_eq!(aut_order(2, &[1, 1]), BigInt::from(6));
    assert_eq!(aut_order(3, &[2]), BigInt::from(6));
    assert_eq!(aut_order(2, &[1, 2]), BigInt::from(8));
    assert_eq!(aut_order(2, &[1, 1, 1]), BigInt::from(168));
}

#[test]
fn elementary_counts() {
    for p in [2u64, 3, 5, 7] {
        for n in 2..=4usize {
            let t = HeckeType::elementary(p, n).unwrap();
            let expected = (p.pow(n as u32) - 1) / (p - 1);
            assert_eq!(hecke_count(&t), u128::from(expected), "p={p} n={n}");
        }
    }
}

fn type_strategy() -> impl Strategy<Value = (u64, Vec<u32>)> {
    (prop::sample::select(vec![2u64, 3, 5, 7]), 2usize..=4).prop_flat_map(|(p, n)| {
        proptest::collection::vec(0u32..=3, n).prop_map(move |mut e| {
            e.sort_unstable();
            (p, e)
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn counts_match_surjection_oracle((p, exps) in type_strategy()) {
        let t = HeckeType::new(p, exps.clone()).unwrap();
        let oracle = subgroup_count_oracle(p, exps.len(), &exps);
        prop_assert_eq!(BigInt::from(hecke_count(&t)), oracle);
    }

    #[test]
    fn next_prime_is_prime_and_above(x in 1.0f64..1e6) {
        let p = next_prime_above(x);
        prop_assert!(is_prime(p) && (p as f64) > x);
        prop_assert!(((x.floor() as u64 + 1)..p).all(|m| !is_prime(m)));
    }
}

#[test]
fn enumerated_matrices_are_distinct_and_of_the_right_type() {
    for (p, exps) in [(2u64, vec![0, 1, 2]), (3, vec![0, 0, 2]), (2, vec![1, 1, 2]), (5, vec![0, 1])] {
        let t = HeckeType::new(p, exps).unwrap();
        let hs = neighbor_matrices(&t, 1 << 20).unwrap();
        assert_eq!(hs.len() as u128, hecke_count(&t));
        let mut canon: Vec<_> = hs.iter().map(|h| h.column_hnf().unwrap()).collect();
        canon.sort();
        canon.dedup();
        assert_eq!(canon.len(), hs.len());
        for h in hs.iter() {
            assert_eq!(HeckeType::of_matrix(p, h).as_ref(), Some(&t));
        }
    }
}

#[test]
fn brute_force_planar_sublattices_by_type() {
    // columns (a, 0), (b, d) with 0 ≤ b < a list every sublattice of ℤ² once
    for p in [2u64, 3, 5] {
        for s in 1..=3u32 {
            let mut by_type: BTreeMap<Vec<u32>, u128> = BTreeMap::new();
            for e in 0..=s {
                let (a, d) = (p.pow(e) as i64, p.pow(s - e) as i64);
                for b in 0..a {
                    let h = ZMat::from_rows(&[vec![a, b], vec![0, d]]);
                    *by_type.entry(HeckeType::of_matrix(p, &h).unwrap().exps().to_vec()).or_default() += 1;
                }
            }
            for (exps, count) in by_type {
                assert_eq!(hecke_count(&HeckeType::new(p, exps.clone()).unwrap()), count, "p={p} {exps:?}");
            }
        }
    }
}

#[test]
fn neighbors_are_unimodular_with_uniform_weight() {
    let x = make_point(&Mat::from_rows(&[vec![1.0, 0.2, 0.0], vec![0.0, 1.0, 0.4], vec![0.3, 0.0, 1.0]])).unwrap();
    let t = HeckeType::new(3, vec![0, 1, 1]).unwrap();
    let nb = enumerate_neighbors(&x, &t).unwrap();
    assert_eq!(nb.len() as u128, hecke_count(&t));
    assert_eq!(nb.weight() * BigRational::from_integer(BigInt::from(nb.len())), BigRational::one());
    for y in nb.points() {
        assert!(y.unimodularity_defect() < 1e-10);
    }
    let z = standard_lattice::<f64>(2);
    let nz = enumerate_neighbors(&z, &HeckeType::elementary(5, 2).unwrap()).unwrap();
    assert_eq!(nz.len(), 6);
}

#[test]
fn operator_norm_closed_form() {
    for p in [2u64, 3, 5, 11] {
        let t = HeckeType::new(p, vec![0, 1]).unwrap();
        let pf = p as f64;
        assert!((operator_norm_bound(&t) - 2.0 * pf.sqrt() / (pf + 1.0)).abs() < 1e-12);
        let scalar = HeckeType::new(p, vec![1, 1]).unwrap();
        assert_eq!(operator_norm_bound(&scalar), 1.0);
    }
    let a = operator_norm_bound(&HeckeType::new(5, vec![0, 1, 1, 1]).unwrap());
    let b = operator_norm_bound(&HeckeType::new(5, vec![0, 0, 1, 1]).unwrap());
    assert!(b < a && a < 1.0);
}

#[test]
fn composition_coefficients_hold() {
    for (n, p, k, l) in [(2, 2, 1, 1), (2, 3, 1, 1), (2, 2, 1, 2), (3, 2, 1, 1), (2, 2, 2, 2)] {
        let r = verify_composition(n, p, k, l).unwrap();
        assert!(r.matches, "{n} {p} {k} {l}: {:?}", r.terms);
        assert!(r.commutes);
        assert_eq!(r.frequency_sum, "1");
        let total: f64 = r.terms.iter().map(|t| t.expected_value).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert_eq!(r.pairs.to_u64().unwrap() as u128, r.pairs);
    }
}

#[test]
fn composition_rejects_bad_input() {
    assert!(verify_composition(1, 2, 1, 1).is_err());
    assert!(verify_composition(2, 2, 2, 1).is_err());
    assert!(verify_composition(2, 2, 0, 1).is_err());
}
