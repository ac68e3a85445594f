//! Randomized invariants. Each case draws a seed and builds its matrices from
//! a seeded generator so failures shrink to a reproducible seed.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qmoney::certificates::certify;
use qmoney::channels::{success_probability, ChoiOperator, KrausSet};
use qmoney::linalg::{c64, kron, max_abs, partial_trace, FactoredDims};
use qmoney::random::{random_hermitian, random_kraus, random_matrix, random_state};
use qmoney::schemes::{fourier_ticket_scheme, Ensemble};
use qmoney::sdp::{solve, CloningSdp};
use qmoney::HermitianOperator;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random PSD objective on `out ⊗ in`.
fn random_problem(out: usize, inp: usize, seed: u64) -> CloningSdp {
    let mut r = rng(seed);
    let g = random_matrix(out * inp, out * inp, &mut r);
    let q = HermitianOperator::from_hermitian_part(&(&g * g.adjoint()));
    CloningSdp::new(q, FactoredDims::new(vec![out, inp]).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn kron_is_bilinear_and_associative(seed: u64, a in 1usize..4, b in 1usize..4, c in 1usize..4, s in -3.0f64..3.0) {
        let mut r = rng(seed);
        let x = random_matrix(a, a, &mut r);
        let x2 = random_matrix(a, a, &mut r);
        let y = random_matrix(b, b, &mut r);
        let z = random_matrix(c, c, &mut r);
        let k = c64(s, 0.0);
        let lhs = kron(&(&x * k + &x2), &y);
        let rhs = kron(&x, &y) * k + kron(&x2, &y);
        prop_assert!(max_abs(&(lhs - rhs)) <= 1e-12);
        let left = kron(&kron(&x, &y), &z);
        let right = kron(&x, &kron(&y, &z));
        prop_assert!(max_abs(&(left - right)) <= 1e-12);
    }

    #[test]
    fn partial_trace_preserves_trace(seed: u64, a in 1usize..4, b in 1usize..4, c in 1usize..3, keep in 0usize..3) {
        let h = random_hermitian(a * b * c, &mut rng(seed));
        let dims = FactoredDims::new(vec![a, b, c]).unwrap();
        let reduced = partial_trace(&h, &dims, &[keep]).unwrap();
        prop_assert!((reduced.trace() - h.trace()).abs() <= 1e-10);
    }

    #[test]
    fn random_channels_are_cptp(seed: u64, din in 1usize..4, dout in 1usize..4, count in 1usize..4) {
        prop_assume!(dout * count >= din);
        let k = KrausSet::new(random_kraus(din, dout, count, &mut rng(seed))).unwrap();
        let j = ChoiOperator::from_kraus(&k).unwrap();
        prop_assert!(j.tp_residual() <= 1e-10);
        prop_assert!(j.cp_residual().unwrap() >= -1e-10);
    }

    #[test]
    fn non_trace_preserving_kraus_is_rejected(seed: u64, d in 2usize..4, s in 1.01f64..2.0) {
        let ops: Vec<_> = random_kraus(d, d, 2, &mut rng(seed)).into_iter().map(|a| a * c64(s, 0.0)).collect();
        prop_assert!(KrausSet::new(ops).is_err());
    }

    #[test]
    fn choi_quadratic_form_matches_channel_output(seed: u64, din in 1usize..4, dout in 1usize..4) {
        let mut r = rng(seed);
        let k = KrausSet::new(random_kraus(din, dout, din.max(2), &mut r)).unwrap();
        let j = ChoiOperator::from_kraus(&k).unwrap();
        let psi = random_state(din, &mut r);
        let phi = random_state(dout, &mut r);
        let direct = j.apply(&HermitianOperator::projector(&psi)).unwrap().expectation(&phi);
        prop_assert!((direct - j.quadratic_form(&phi, &psi).unwrap()).abs() <= 1e-10);
    }

    #[test]
    fn success_probability_is_affine_in_weights(seed: u64, lambda in 0.0f64..1.0) {
        let mut r = rng(seed);
        let k = KrausSet::new(random_kraus(2, 4, 2, &mut r)).unwrap();
        let j = ChoiOperator::from_kraus(&k).unwrap();
        let a = random_state(2, &mut r);
        let b = random_state(2, &mut r);
        let pa = success_probability(&j, &Ensemble::uniform(vec![a.clone()]).unwrap()).unwrap();
        let pb = success_probability(&j, &Ensemble::uniform(vec![b.clone()]).unwrap()).unwrap();
        let mixed = Ensemble::new(vec![(lambda, a), (1.0 - lambda, b)]).unwrap();
        let pm = success_probability(&j, &mixed).unwrap();
        prop_assert!((pm - (lambda * pa + (1.0 - lambda) * pb)).abs() <= 1e-10);
    }

    #[test]
    fn honest_holders_always_pass(d in 2usize..7) {
        let scheme = fourier_ticket_scheme(d).unwrap();
        prop_assert!((scheme.honest_acceptance() - 1.0).abs() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn weak_duality_holds_on_every_iterate(seed: u64, out in 1usize..4, inp in 1usize..4) {
        let s = solve(&random_problem(out, inp, seed), 1e-8).unwrap();
        for h in &s.history {
            prop_assert!(h.dual_value - h.primal_value >= -1e-8 * (1.0 + h.dual_value.abs()));
        }
        prop_assert!(s.gap <= 1e-6 * (1.0 + s.dual_value.abs()));
    }

    #[test]
    fn value_scales_with_objective(seed: u64, c in 0.1f64..10.0) {
        let p = random_problem(2, 2, seed);
        let base = solve(&p, 1e-9).unwrap().primal_value;
        let scaled = solve(&p.scaled(c).unwrap(), 1e-9).unwrap().primal_value;
        prop_assert!((scaled - c * base).abs() <= 1e-6 * (1.0 + c * base));
    }

    #[test]
    fn certification_is_monotone_in_tolerance(seed: u64, lo in 1e-12f64..1e-8, factor in 1.0f64..1e4) {
        let p = random_problem(2, 2, seed);
        let s = solve(&p, 1e-8).unwrap();
        let tight = certify(&s.primal_x, &s.dual_y, &p, lo).unwrap();
        let loose = certify(&s.primal_x, &s.dual_y, &p, lo * factor).unwrap();
        prop_assert!(!tight.certified || loose.certified);
    }
}
