//! Exact oracle validation: pairing combinatorics, the Wg * G = I inverse
//! contract, closed-form moment values, and the Monte Carlo bridge.

use num::{BigInt, BigRational, One, Zero};
use permlab::sampling::Seed;
use permlab::weingarten::{
    enumerate_pairings, gram_matrix, haar_moment, loop_count, moment_order, monte_carlo_moment,
    weingarten_matrix, MomentSpec, PairPartition,
};

fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

#[test]
fn pairing_counts_are_double_factorials() {
    assert_eq!(enumerate_pairings(2).unwrap().len(), 1);
    assert_eq!(enumerate_pairings(4).unwrap().len(), 3);
    assert_eq!(enumerate_pairings(6).unwrap().len(), 15);
    assert_eq!(enumerate_pairings(8).unwrap().len(), 105);
    assert!(enumerate_pairings(3).is_err());
    assert!(enumerate_pairings(10).is_err());
}

#[test]
fn loop_count_hand_traces() {
    let m = PairPartition::new(vec![(0, 1), (2, 3)]).unwrap();
    // Same matching: every pair is a closed 2-cycle.
    assert_eq!(loop_count(&m, &m).unwrap(), 2);
    // Crossing matching merges everything into one component.
    let nn = PairPartition::new(vec![(0, 2), (1, 3)]).unwrap();
    assert_eq!(loop_count(&m, &nn).unwrap(), 1);
    let nn2 = PairPartition::new(vec![(0, 3), (1, 2)]).unwrap();
    assert_eq!(loop_count(&m, &nn2).unwrap(), 1);
}

#[test]
fn gram_matrix_r2_structure() {
    // G = n^2 on the diagonal, n off-diagonal, for the 3 matchings of 4.
    let g = gram_matrix(2, 7).unwrap();
    for i in 0..3 {
        for j in 0..3 {
            let expected = if i == j { 49 } else { 7 };
            assert_eq!(g[i][j], BigInt::from(expected), "({i},{j})");
        }
    }
}

#[test]
fn weingarten_inverts_gram_exactly() {
    // The collapsed coset-type solve must reproduce the exact full inverse.
    for r in 1..=4usize {
        for &n in &[8usize, 9, 25] {
            let g = gram_matrix(r, n).unwrap();
            let wg = weingarten_matrix(r, n).unwrap();
            let k = g.len();
            for i in 0..k {
                for j in 0..k {
                    let mut acc = BigRational::zero();
                    for t in 0..k {
                        acc += &wg[i][t] * BigRational::from(g[t][j].clone());
                    }
                    let expected = if i == j {
                        BigRational::one()
                    } else {
                        BigRational::zero()
                    };
                    assert_eq!(acc, expected, "r={r} n={n} entry ({i},{j})");
                }
            }
        }
    }
}

#[test]
fn closed_form_moments_at_several_n() {
    for &n in &[8i64, 10, 25] {
        let nu = n as usize;
        // E[M11^2] = 1/n.
        let spec = MomentSpec::new(vec![1, 1], vec![1, 1]).unwrap();
        assert_eq!(haar_moment(&spec, nu).unwrap(), rational(1, n));
        // E[M11^4] = 3/(n(n+2)).
        let spec = MomentSpec::new(vec![1; 4], vec![1; 4]).unwrap();
        assert_eq!(haar_moment(&spec, nu).unwrap(), rational(3, n * (n + 2)));
        // E[M11^2 M12^2] = 1/(n(n+2)).
        let spec = MomentSpec::new(vec![1; 4], vec![1, 1, 2, 2]).unwrap();
        assert_eq!(haar_moment(&spec, nu).unwrap(), rational(1, n * (n + 2)));
        // E[M11^2 M22^2] = (n+1)/((n-1)n(n+2)).
        let spec = MomentSpec::new(vec![1, 1, 2, 2], vec![1, 1, 2, 2]).unwrap();
        assert_eq!(
            haar_moment(&spec, nu).unwrap(),
            rational(n + 1, (n - 1) * n * (n + 2))
        );
        // E[M11 M22 M12 M21] = -1/((n-1)n(n+2)).
        let spec = MomentSpec::new(vec![1, 2, 1, 2], vec![1, 2, 2, 1]).unwrap();
        assert_eq!(
            haar_moment(&spec, nu).unwrap(),
            rational(-1, (n - 1) * n * (n + 2))
        );
    }
}

#[test]
fn row_sum_of_squares_is_one() {
    // sum_j E[M_{1j}^2] = 1 exactly: orthonormal rows.
    let n = 9i64;
    let same = haar_moment(&MomentSpec::new(vec![1, 1], vec![1, 1]).unwrap(), n as usize).unwrap();
    // All n column choices give the same value by invariance.
    let total = same * BigRational::from(BigInt::from(n));
    assert_eq!(total, BigRational::one());
}

#[test]
fn fourth_moment_row_identity() {
    // sum over j,l of E[M_{1j}^2 M_{1l}^2] = E[(sum_j M_{1j}^2)^2] = 1.
    let n = 11i64;
    let nu = n as usize;
    let quartic = haar_moment(&MomentSpec::new(vec![1; 4], vec![1; 4]).unwrap(), nu).unwrap();
    let mixed = haar_moment(&MomentSpec::new(vec![1; 4], vec![1, 1, 2, 2]).unwrap(), nu).unwrap();
    let total = quartic * BigRational::from(BigInt::from(n))
        + mixed * BigRational::from(BigInt::from(n * (n - 1)));
    assert_eq!(total, BigRational::one());
}

#[test]
fn odd_multiplicity_vanishes() {
    let spec = MomentSpec::new(vec![1, 1, 1, 2], vec![1, 1, 2, 2]).unwrap();
    assert_eq!(haar_moment(&spec, 10).unwrap(), BigRational::zero());
    assert_eq!(moment_order(&spec).unwrap(), None);
    // Odd column multiplicity too.
    let spec = MomentSpec::new(vec![1, 1, 2, 2], vec![1, 2, 2, 2]).unwrap();
    assert_eq!(haar_moment(&spec, 10).unwrap(), BigRational::zero());
}

#[test]
fn moment_depends_only_on_label_pattern() {
    // Relabeling rows/columns must not change the exact value.
    let base = MomentSpec::new(vec![1, 1, 2, 2], vec![1, 2, 1, 2]).unwrap();
    let relabeled = MomentSpec::new(vec![7, 7, 3, 3], vec![9, 4, 9, 4]).unwrap();
    for &n in &[8usize, 13] {
        assert_eq!(
            haar_moment(&base, n).unwrap(),
            haar_moment(&relabeled, n).unwrap()
        );
    }
}

#[test]
fn moment_invariant_under_entry_reordering() {
    // The product is commutative: permuting the (row, col) pairs jointly
    // leaves the moment unchanged.
    let a = MomentSpec::new(vec![1, 2, 1, 2], vec![1, 2, 2, 1]).unwrap();
    let b = MomentSpec::new(vec![2, 1, 2, 1], vec![1, 2, 2, 1]).unwrap();
    let c = MomentSpec::new(vec![1, 1, 2, 2], vec![2, 1, 1, 2]).unwrap();
    let n = 12;
    let va = haar_moment(&a, n).unwrap();
    assert_eq!(va, haar_moment(&b, n).unwrap());
    assert_eq!(va, haar_moment(&c, n).unwrap());
}

#[test]
fn rejects_below_invertibility_regime() {
    let spec = MomentSpec::new(vec![1; 8], vec![1; 8]).unwrap();
    assert!(haar_moment(&spec, 7).is_err());
    assert!(haar_moment(&spec, 8).is_ok());
}

#[test]
fn order_matches_exact_scaling() {
    // E[M11^2] = Theta(1/n), E[M11^4] = Theta(1/n^2).
    let second = MomentSpec::new(vec![1, 1], vec![1, 1]).unwrap();
    assert_eq!(moment_order(&second).unwrap(), Some(-1));
    let fourth = MomentSpec::new(vec![1; 4], vec![1; 4]).unwrap();
    assert_eq!(moment_order(&fourth).unwrap(), Some(-2));
    let cross = MomentSpec::new(vec![1, 2, 1, 2], vec![1, 2, 2, 1]).unwrap();
    assert_eq!(moment_order(&cross).unwrap(), Some(-3));
}

#[test]
fn monte_carlo_agrees_with_oracle() {
    use permlab::weingarten::rational_to_f64;
    // 0-based actual indices for the sampler; the labels double as indices.
    let spec = MomentSpec::new(vec![0, 0, 1, 1], vec![0, 0, 1, 1]).unwrap();
    let n = 12;
    let exact = rational_to_f64(&haar_moment(&spec, n).unwrap());
    let (mean, se) = monte_carlo_moment(&spec, n, 20_000, Seed(2024)).unwrap();
    assert!(
        (mean - exact).abs() <= 4.0 * se,
        "mean {mean}, exact {exact}, se {se}"
    );
}
