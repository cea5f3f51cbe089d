use num_bigint::BigInt;
use proptest::prelude::*;
use qfol_core::intlinalg::{hnf, rank_rational, snf, solve_diophantine, DiophantineSolution, ZMatrix};
use qfol_core::oracle::{verify_matrix_identity, MatrixClaim};

fn zmatrix(max: usize, bound: i64) -> impl Strategy<Value = ZMatrix> {
    (1..=max, 1..=max).prop_flat_map(move |(r, c)| {
        prop::collection::vec(prop::collection::vec(-bound..=bound, c), r).prop_map(move |rows| {
            ZMatrix::from_rows(rows.into_iter().map(|r| r.into_iter().map(BigInt::from).collect()).collect(), c)
        })
    })
}

fn apply(a: &ZMatrix, x: &[i64]) -> Vec<BigInt> {
    (0..a.rows())
        .map(|i| (0..a.cols()).fold(BigInt::from(0), |acc, j| acc + a.get(i, j) * x[j]))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn hnf_reconstructs(a in zmatrix(4, 9)) {
        let h = hnf(&a);
        let claim = MatrixClaim::Hnf { a: &a, result: &h };
        prop_assert!(verify_matrix_identity(&claim));
        // the basis has rank-many rows
        prop_assert_eq!(h.basis().len(), rank_rational(&a.to_rational()));
    }

    #[test]
    fn snf_reconstructs(a in zmatrix(4, 9)) {
        let s = snf(&a);
        let claim = MatrixClaim::Snf { a: &a, result: &s };
        prop_assert!(verify_matrix_identity(&claim));
    }

    // solvability agrees with exhaustive search over a box that contains a
    // solution whenever the right-hand side was built from one
    #[test]
    fn diophantine_matches_brute_force(a in zmatrix(3, 4), x in prop::collection::vec(-3i64..=3, 3), perturb in 0i64..3) {
        let x = &x[..a.cols()];
        let mut b = apply(&a, x);
        b[0] += perturb;
        let sol = solve_diophantine(&a, &b);
        let claim = MatrixClaim::Solve { a: &a, b: &b, solution: &sol };
        prop_assert!(verify_matrix_identity(&claim));
        if perturb == 0 {
            prop_assert!(sol.is_solvable());
        }
        if let DiophantineSolution::Solvable { particular, kernel_basis } = &sol {
            let p: Vec<i64> = particular.iter().map(|v| i64::try_from(v).unwrap()).collect();
            prop_assert_eq!(apply(&a, &p), b.clone());
            for k in kernel_basis {
                let k: Vec<i64> = k.iter().map(|v| i64::try_from(v).unwrap()).collect();
                prop_assert!(apply(&a, &k).iter().all(|v| *v == BigInt::from(0)));
            }
        } else {
            let n = a.cols();
            let range = -6i64..=6;
            let mut found = false;
            let mut idx = vec![-6i64; n];
            'outer: loop {
                if apply(&a, &idx) == b {
                    found = true;
                    break;
                }
                for v in idx.iter_mut() {
                    if *v < *range.end() {
                        *v += 1;
                        continue 'outer;
                    }
                    *v = *range.start();
                }
                break;
            }
            prop_assert!(!found);
        }
    }
}
