use hardy_core::families::{
    bliss_weights, constant_weights, geometric_weights, BlissFamily, ConstantFamily, GeometricFamily,
};
use hardy_core::intervals::{converge_in_n, extend_zero, restrict, Quantity, VFill};
use hardy_core::operators::compute_b;
use hardy_core::oracle::{maximize_quotient, OracleConfig};
use hardy_core::refine::{delta_upper, lower_trace, KGrid};
use hardy_core::sampling::{random_instance, random_positive};
use hardy_core::{validate_exponents, TruncationPolicy};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn geometric_converges_in_n() {
    let e = validate_exponents(2.0, 2.0).unwrap();
    let f = GeometricFamily::new(0.5, 1.0).unwrap();
    let fam = geometric_weights(&f, 1).unwrap();
    let policy = TruncationPolicy::default();
    let b = converge_in_n(&fam, &e, Quantity::B, &policy).unwrap();
    let d = converge_in_n(&fam, &e, Quantity::Delta1, &policy).unwrap();
    assert!(b.converged && d.converged);
    assert!((b.value - 2.0).abs() < 1e-8);
    assert!((d.value - f.closed_forms().a).abs() < 1e-6);
}

#[test]
fn bliss_b_increases_to_one() {
    let e = validate_exponents(2.0, 4.0).unwrap();
    let fam = bliss_weights(&BlissFamily::new(&e, 1.0, 1e4).unwrap(), 1).unwrap();
    let policy = TruncationPolicy::doubling(64, 1 << 16, 1e-8);
    let out = converge_in_n(&fam, &e, Quantity::B, &policy).unwrap();
    for w in out.trace.windows(2) {
        assert!(w[1].1 >= w[0].1);
    }
    assert!(out.value <= 1.0 && out.value > 0.999);
}

#[test]
fn oracle_values_rise_with_truncation() {
    let e = validate_exponents(2.0, 2.0).unwrap();
    let fam = geometric_weights(&GeometricFamily::new(0.6, 1.0).unwrap(), 1).unwrap();
    let policy = TruncationPolicy::doubling(8, 128, 1e-6);
    let out = converge_in_n(&fam, &e, Quantity::Oracle, &policy).unwrap();
    for w in out.trace.windows(2) {
        assert!(w[1].1 >= w[0].1 - 1e-9);
    }
}

#[test]
fn non_summable_family_fails_to_converge() {
    let e = validate_exponents(1.5, 2.5).unwrap();
    let fam = constant_weights(&ConstantFamily { u: 1.0, v: 1.0 }, 1).unwrap();
    let out = converge_in_n(&fam, &e, Quantity::B, &TruncationPolicy::doubling(16, 4096, 1e-8)).unwrap();
    assert!(!out.converged);
    assert_eq!(out.trace.last().unwrap().0, 4096);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn restriction_never_raises_any_bound(seed in any::<u64>(), cut in 1usize..10) {
        let inst = random_instance(&mut ChaCha8Rng::seed_from_u64(seed), 10, 1.1, 5.0);
        let (spec, e) = (&inst.spec, &inst.e);
        let n = cut.min(spec.len());
        let small = restrict(spec, n).unwrap();
        let cfg = OracleConfig::default();
        prop_assert!(compute_b(&small, e).value <= compute_b(spec, e).value);
        let a_small = maximize_quotient(&small, e, &cfg).unwrap().a_est;
        let a = maximize_quotient(spec, e, &cfg).unwrap().a_est;
        prop_assert!(a_small <= a + 1e-9);
    }

    #[test]
    fn zero_extension_changes_nothing(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_instance(&mut rng, 10, 1.1, 5.0);
        let (spec, e) = (&inst.spec, &inst.e);
        let extra = rng.gen_range(1..8);
        let fill = if rng.gen() { VFill::default() } else { VFill::Sequence(random_positive(&mut rng, extra, 2.0)) };
        let ext = extend_zero(spec, spec.len() + extra, &fill).unwrap();
        let cfg = OracleConfig::default();
        prop_assert!((compute_b(spec, e).value - compute_b(&ext, e).value).abs() <= 1e-12);
        let a = maximize_quotient(spec, e, &cfg).unwrap().a_est;
        let a_ext = maximize_quotient(&ext, e, &cfg).unwrap().a_est;
        prop_assert!((a - a_ext).abs() <= 1e-8);
        // The refined bounds still bracket the unchanged constant.
        let up = delta_upper(&ext, e, 5, 0.0).unwrap().values();
        prop_assert!(a <= up.last().unwrap() * (1.0 + 1e-9));
        let lo = lower_trace(&ext, e, 2, &KGrid::All, false).unwrap();
        for l in lo {
            prop_assert!(l.best() <= a * (1.0 + 1e-9));
        }
    }

    #[test]
    fn restrict_then_extend_roundtrips_b(seed in any::<u64>()) {
        let inst = random_instance(&mut ChaCha8Rng::seed_from_u64(seed), 10, 1.1, 5.0);
        let (spec, e) = (&inst.spec, &inst.e);
        let back = restrict(&extend_zero(spec, spec.len() + 3, &VFill::default()).unwrap(), spec.len()).unwrap();
        prop_assert_eq!(back.u(), spec.u());
        prop_assert_eq!(back.v(), spec.v());
        prop_assert_eq!(compute_b(&back, e).value, compute_b(spec, e).value);
    }
}
