use latlab::exact::integer_rank;
use latlab::lattice::{
    apply_diagonal, apply_matrix, count_points_in_ball, lattice_distance, lll_reduce, make_point, standard_lattice,
    successive_minima, sup_norm, ual_factorize,
};
use latlab::{DiagonalVector, Lattice, Lattice32, Mat};
use proptest::prelude::*;

/// All coefficient vectors in `[−k, k]ⁿ` with their images, sorted by sup norm.
fn brute_vectors(b: &Mat<f64>, k: i64) -> Vec<(f64, Vec<i64>)> {
    let n = b.nrows();
    let width = (2 * k + 1) as usize;
    let mut out = Vec::new();
    for idx in 0..width.pow(n as u32) {
        let mut rest = idx;
        let c: Vec<i64> = (0..n)
            .map(|_| {
                let v = (rest % width) as i64 - k;
                rest /= width;
                v
            })
            .collect();
        if c.iter().all(|&x| x == 0) {
            continue;
        }
        let v = b.mul_vec(&c.iter().map(|&x| x as f64).collect::<Vec<_>>());
        out.push((sup_norm(&v), c));
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

fn brute_minima(b: &Mat<f64>, k: i64) -> Vec<f64> {
    let mut chosen: Vec<Vec<i64>> = Vec::new();
    let mut minima = Vec::new();
    for (norm, c) in brute_vectors(b, k) {
        let mut trial = chosen.clone();
        trial.push(c);
        if integer_rank(&trial) == trial.len() {
            chosen = trial;
            minima.push(norm);
            if minima.len() == b.nrows() {
                break;
            }
        }
    }
    minima
}

fn coefficient_bound(b: &Mat<f64>) -> Option<i64> {
    let r = (0..b.ncols()).map(|j| sup_norm(&b.column(j))).fold(0.0, f64::max);
    let k = (b.inverse()?.op_norm_inf() * r).ceil() as i64;
    (k <= 10).then_some(k)
}

fn basis_strategy(n: usize) -> impl Strategy<Value = Mat<f64>> {
    proptest::collection::vec(-2.0f64..2.0, n * n).prop_map(move |v| Mat::from_fn(n, n, |i, j| v[i * n + j]))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn minima_match_brute_force(b in prop_oneof![basis_strategy(2), basis_strategy(3)]) {
        prop_assume!(b.det().abs() > 0.3);
        let x = make_point(&b).unwrap();
        let k = coefficient_bound(x.basis());
        prop_assume!(k.is_some());
        let oracle = brute_minima(x.basis(), k.unwrap());
        let got = successive_minima(&x, x.dim()).unwrap();
        for (a, o) in got.iter().zip(&oracle) {
            prop_assert!((a - o).abs() < 1e-9, "{got:?} vs {oracle:?}");
        }
    }

    #[test]
    fn minkowski_second_theorem(b in prop_oneof![basis_strategy(2), basis_strategy(3), basis_strategy(4)]) {
        prop_assume!(b.det().abs() > 0.1);
        let x = make_point(&b).unwrap();
        let m = successive_minima(&x, x.dim()).unwrap();
        prop_assert!(m.windows(2).all(|w| w[0] <= w[1] + 1e-12));
        prop_assert!(m.iter().product::<f64>() <= 1.0 + 1e-9);
        prop_assert!(m[0] <= 1.0 + 1e-12);
    }

    #[test]
    fn counts_match_brute_force(b in basis_strategy(2), r in 0.2f64..1.6) {
        prop_assume!(b.det().abs() > 0.3);
        let x = make_point(&b).unwrap();
        let k = (x.basis().inverse().unwrap().op_norm_inf() * r).ceil() as i64;
        prop_assume!(k <= 30);
        let oracle = brute_vectors(x.basis(), k).iter().filter(|(s, _)| *s <= r).count() as u64;
        let got = count_points_in_ball(&x, r).unwrap();
        // sup norms within rounding of r may go either way
        let near = brute_vectors(x.basis(), k).iter().filter(|(s, _)| (*s - r).abs() < 1e-9).count() as u64;
        prop_assert!(got.abs_diff(oracle) <= near, "{got} vs {oracle}");
    }

    #[test]
    fn lll_transform_is_unimodular(b in basis_strategy(3)) {
        prop_assume!(b.det().abs() > 0.05);
        let (red, u) = lll_reduce(&b);
        prop_assert_eq!(u.det().magnitude().clone(), 1u32.into());
        let recon = &b * &u.to_real::<f64>();
        prop_assert!(recon.sub(&red).max_abs() < 1e-9);
    }

    #[test]
    fn distance_is_symmetric_and_monotone(s in 0.0f64..0.05, t in 0.0f64..0.05) {
        let z = standard_lattice::<f64>(2);
        let x = make_point(&Mat::from_rows(&[vec![1.0, 0.3], vec![0.1, 1.2]])).unwrap();
        let near = apply_diagonal(&DiagonalVector::new(vec![s.min(t), -s.min(t)]).unwrap(), &x);
        let far = apply_diagonal(&DiagonalVector::new(vec![s.max(t), -s.max(t)]).unwrap(), &x);
        let (d1, _) = lattice_distance(&x, &near, 1);
        let (d2, _) = lattice_distance(&x, &far, 1);
        prop_assert!(d1 <= d2 + 1e-12);
        let (a, _) = lattice_distance(&x, &z, 1);
        let (b, _) = lattice_distance(&z, &x, 1);
        prop_assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn ual_reconstructs(g in basis_strategy(3)) {
        match ual_factorize(&g) {
            Ok((u, a, l)) => {
                prop_assert!((&(&u * &a) * &l).sub(&g).max_abs() < 1e-8);
                for i in 0..3 {
                    prop_assert_eq!(u[(i, i)], 1.0);
                    prop_assert_eq!(l[(i, i)], 1.0);
                    for j in 0..i {
                        prop_assert_eq!(u[(i, j)], 0.0);
                        prop_assert_eq!(l[(j, i)], 0.0);
                        prop_assert_eq!(a[(i, j)], 0.0);
                    }
                }
            }
            Err(latlab::Error::SingularMinor { .. }) => {}
            Err(e) => prop_assert!(false, "{e}"),
        }
    }
}

#[test]
fn lambda1_of_diagonal_translates_of_the_standard_lattice() {
    let z = standard_lattice::<f64>(3);
    let steps = [-3.0, -1.5, 0.0, 1.0, 2.5];
    for &a in &steps {
        for &b in &steps {
            let v = DiagonalVector::project(vec![a, b, 0.0]);
            let l = successive_minima(&apply_diagonal(&v, &z), 1).unwrap()[0];
            assert!((l - v.min_coordinate().exp()).abs() < 1e-12 * l.max(1.0), "{v:?}");
        }
    }
}

#[test]
fn distance_to_a_moved_copy() {
    let x = make_point(&Mat::from_rows(&[vec![1.0, 0.3], vec![0.1, 1.2]])).unwrap();
    let u = Mat::from_rows(&[vec![1.0, 0.02], vec![0.0, 1.0]]);
    let (d, cert): (f64, bool) = lattice_distance(&x, &apply_matrix(&u, &x), 1);
    assert!((d - 0.02).abs() < 1e-9 && cert);
}

#[test]
fn single_precision_agrees() {
    let b = Mat::from_rows(&[vec![1.0, 0.4, 0.0], vec![0.3, 1.1, 0.2], vec![0.0, 0.5, 0.9]]);
    let x: Lattice = make_point(&b).unwrap();
    let y: Lattice32 = x.map_scalar();
    let m64 = successive_minima(&x, 3).unwrap();
    let m32 = successive_minima(&y, 3).unwrap();
    for (a, b) in m64.iter().zip(&m32) {
        assert!((a - f64::from(*b)).abs() < 1e-5);
    }
}

#[test]
fn json_roundtrip_preserves_the_point() {
    let x = make_point(&Mat::from_rows(&[vec![1.0, 0.3], vec![0.1, 1.2]])).unwrap();
    let y = x.sublattice(&latlab::ZMat::from_rows(&[vec![1, 2], vec![0, 5]]), &latlab::Scale::prime_power(5, 1, 2)).unwrap();
    let text = serde_json::to_string(&y.to_json()).unwrap();
    let back = Lattice::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
    assert!(back.basis().sub(y.basis()).max_abs() < 1e-12);
    assert!(y.unimodularity_defect() < 1e-12);
}
