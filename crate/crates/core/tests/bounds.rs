use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use pfaffnet_core::bounds::{
    betti_bound, bracket_count, gv_bound, rankdrop_bound, rankdrop_constants, s_count, witt_count, zero_bound,
    BracketMode,
};
use pfaffnet_core::chain::compute_format;
use proptest::prelude::*;

fn one() -> BigRational {
    BigRational::one()
}

/// Product of `e` copies of `b` by repeated multiplication.
fn naive_pow(b: u64, e: u64) -> BigUint {
    let mut acc = BigUint::one();
    for _ in 0..e {
        acc *= BigUint::from(b);
    }
    acc
}

fn naive_zero(r: u64, l: u64) -> BigUint {
    naive_pow(2, r * (r + 1) / 2) * naive_pow(1 + l, r + 1)
}

fn naive_gv(d: u64, s: u64, r: u64, alpha: u64, beta: u64) -> BigUint {
    let tri = if r == 0 { 0 } else { r * (r - 1) / 2 };
    naive_pow(2, tri) * naive_pow(s, d) * naive_pow(d * beta + d.min(r) * alpha, d + r)
}

fn ceil_times(n: BigUint, c: &BigRational) -> BigUint {
    let v = BigRational::from_integer(n.into()) * c;
    v.ceil().to_integer().to_biguint().unwrap()
}

#[test]
fn headline_examples() {
    assert_eq!(zero_bound(2, 1, &one()).unwrap().value, BigUint::from(64u32));
    assert_eq!(zero_bound(0, 1, &one()).unwrap().value, BigUint::from(2u32));
    assert_eq!(betti_bound(1, 2, 1, &one()).unwrap().value, BigUint::from(128u32));
    assert_eq!(betti_bound(1, 0, 1, &one()).unwrap().value, BigUint::one());
    assert_eq!(
        betti_bound(2, 9, 2, &one()).unwrap().value,
        naive_pow(2, 36) * naive_pow(12, 11)
    );
    assert_eq!(gv_bound(1, 1, 2, 3, 1, &one()).unwrap().value, BigUint::from(128u32));
    assert_eq!(
        gv_bound(2, 9, 2, 3, 1, &one()).unwrap().value,
        BigUint::from(663_552u32)
    );
    assert_eq!(gv_bound(1, 1, 1, 1, 1, &one()).unwrap().value, BigUint::from(4u32));
    let big = zero_bound(30, 3, &one()).unwrap();
    let expect = 465.0 * 2f64.log10() + 31.0 * 4f64.log10();
    assert!((big.log10 - expect).abs() < 1e-9);
}

#[test]
fn bracket_counts() {
    assert_eq!(bracket_count(2, 2, BracketMode::Hall), BigUint::from(3u32));
    assert_eq!(bracket_count(2, 3, BracketMode::Hall), BigUint::from(5u32));
    assert_eq!(bracket_count(2, 2, BracketMode::AllTrees), BigUint::from(6u32));
    assert_eq!(witt_count(1, 2), BigUint::zero());
    for m in 1..=4u64 {
        for k in 1..=6u64 {
            assert!(bracket_count(m, k, BracketMode::Hall) <= bracket_count(m, k, BracketMode::AllTrees));
        }
    }
    assert_eq!(s_count(3, 1, &BigUint::from(3u32)), BigUint::from(9u32));
    assert_eq!(s_count(2, 2, &BigUint::from(5u32)), BigUint::zero());
    assert_eq!(s_count(4, 0, &BigUint::from(2u32)), BigUint::from(8u32));
}

#[test]
fn zero_bound_matches_the_gv_specialization() {
    for r in 0..40u64 {
        for l in 1..6u64 {
            let lhs = naive_pow(2, if r == 0 { 0 } else { r * (r - 1) / 2 }) * naive_pow(2 + 2 * l, 1 + r);
            let rhs = naive_pow(2, r * (r + 1) / 2) * BigUint::from(2u32) * naive_pow(1 + l, 1 + r);
            assert_eq!(lhs, rhs);
            assert_eq!(BigUint::from(2u32) * zero_bound(r, l, &one()).unwrap().value, lhs);
        }
    }
}

#[test]
fn rankdrop_recomputation() {
    let b = rankdrop_bound(2, 2, 2, 1, &[1], 0, &one(), BracketMode::Hall).unwrap();
    // Chain of one network: R = 2, α = 3; four networks share one chain.
    let single = compute_format(2, &[1], 0).unwrap();
    let r_k = 4 * single.chain_len as u64;
    let alpha = single.alpha as u64;
    let entry_beta = 1 + alpha;
    let minor_beta = 2 * entry_beta;
    let s = 3; // C(2,2)·C(3,2)
    assert_eq!(b.value, naive_gv(2, s, r_k, alpha, minor_beta));
    let consts = rankdrop_constants(2, 2, 2, 1, &[1], 0, BracketMode::Hall).unwrap();
    assert_eq!(consts.minor_format.chain_len as u64, r_k);
    assert_eq!(consts.minor_format.beta as u64, minor_beta);
    assert!(b.inputs_string().contains("implementation-derived"));

    // k = 1, ρ = 0: 1×1 minors of raw component values, β = 1.
    let k1 = rankdrop_bound(2, 2, 1, 0, &[1], 0, &one(), BracketMode::Hall).unwrap();
    assert_eq!(k1.value, naive_gv(2, 2 * 2, r_k, alpha, 1));

    for mode in [BracketMode::Hall, BracketMode::AllTrees] {
        let mut prev = BigUint::zero();
        for k in 1..=4 {
            let v = rankdrop_bound(2, 2, k, 1, &[2], 0, &one(), mode).unwrap().value;
            assert!(v >= prev);
            prev = v;
        }
    }
}

#[test]
fn rational_constants_round_up() {
    let c = BigRational::new(3.into(), 2.into());
    let b = zero_bound(1, 1, &c).unwrap();
    assert_eq!(b.value, BigUint::from(12u32));
    let c = BigRational::new(1.into(), 3.into());
    assert_eq!(zero_bound(2, 1, &c).unwrap().value, BigUint::from(22u32));
    assert!(zero_bound(2, 1, &BigRational::zero()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn gv_specializes_to_betti(d in 1u64..8, r in 0u64..60, l in 1u64..8) {
        let gv = gv_bound(d, 1, r, 1 + 2 * l, 1, &one()).unwrap();
        let betti = betti_bound(d, r, l, &one()).unwrap();
        prop_assert_eq!(gv.value, betti.value);
    }

    #[test]
    fn closed_forms_agree_with_naive_products(
        d in 1u64..6, s in 1u64..50, r in 0u64..40, alpha in 1u64..9, beta in 0u64..9, l in 1u64..6,
        num in 1u32..50, den in 1u32..50,
    ) {
        let c = BigRational::new(num.into(), den.into());
        let z = zero_bound(r, l, &c).unwrap();
        prop_assert_eq!(&z.value, &ceil_times(naive_zero(r, l), &c));
        let g = gv_bound(d, s, r, alpha, beta, &c).unwrap();
        prop_assert_eq!(&g.value, &ceil_times(naive_gv(d, s, r, alpha, beta), &c));
        if let Some(v) = g.value.to_f64().filter(|v| v.is_finite() && *v > 0.0) {
            prop_assert!((g.log10 - v.log10()).abs() < 1e-9);
        }
        prop_assert!(g.value >= BigUint::one() || beta == 0);
    }
}
