//! Identities of the `f_k` family at random indices beyond the exhaustive acceptance ranges.

use mub_core::fib::{fib_coeff, fib_pair_at, fib_poly};
use mub_core::Poly2;
use proptest::prelude::*;

fn f(k: i64) -> Poly2 {
    fib_poly(k)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn coefficient_formula(k in 0u64..600) {
        let p = f(k as i64);
        for i in 0..=k {
            prop_assert_eq!(p.coeff(i as usize), fib_coeff(k, i), "x^{} in f_{}", i, k);
        }
    }

    #[test]
    fn block_determinant(k in 0i64..300, l in 0i64..300) {
        let lhs = f(k).poly_mul(&f(l - 1)).poly_add(&f(l).poly_mul(&f(k - 1)));
        prop_assert_eq!(lhs, f((k - l).abs() - 1));
    }

    #[test]
    fn generalized_recursion(k in 0i64..300, l in 0i64..300) {
        let rhs = f(k).poly_mul(&f(l)).poly_add(&f(k - 1).poly_mul(&f(l - 1)));
        prop_assert_eq!(f(k + l), rhs);
    }

    #[test]
    fn divisibility(kp in 1i64..40, mult in 1i64..12) {
        prop_assert!(f(kp - 1).divides(&f(kp * mult - 1)).unwrap());
    }

    #[test]
    fn odd_index_is_square_times_x(k in 0i64..400) {
        prop_assert_eq!(f(2 * k + 1), f(k).square().shl(1));
    }

    #[test]
    fn even_index_is_polynomial_in_x_squared(k in 0i64..400) {
        let even = f(2 * k);
        prop_assert!(even.exponents().all(|e| e % 2 == 0));
        prop_assert!(even.sqrt().is_some());
        // f_{2k} = g_k(x²) with g_k(x) coefficients C(k+i, k-i) mod 2.
        let mut gk = Poly2::zero();
        for i in 0..=k as u64 {
            gk.set_coeff(i as usize, fib_coeff(2 * k as u64, 2 * i));
        }
        prop_assert_eq!(gk.substitute_square(), even);
    }

    #[test]
    fn doubling_matches_reduction(k in 0u64..2000, bits in 2u64..(1 << 16)) {
        let mu = Poly2::from_u64(bits);
        let pair = fib_pair_at(k, &mu).unwrap();
        prop_assert_eq!(pair.hi, f(k as i64).poly_mod(&mu).unwrap());
        prop_assert_eq!(pair.lo, f(k as i64 - 1).poly_mod(&mu).unwrap());
    }
}

#[test]
fn power_of_two_indices() {
    for m in 1..=12u32 {
        let n = (1usize << m) - 1;
        assert_eq!(f(n as i64), Poly2::monomial(n));
        let expected = Poly2::from_exponents(&(1..=m).map(|j| (1 << m) - (1 << j)).collect::<Vec<_>>());
        assert_eq!(f(n as i64 - 1), expected, "m = {m}");
    }
}
