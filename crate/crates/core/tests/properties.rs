use proptest::prelude::*;

use sclab_core::codes::{basis_union_code, certify, random_unit_code, welch_pair_floor, Code, CodeKind};
use sclab_core::kernels::{offdiag_stats, DenseMatrix, TilePlan};
use sclab_core::readouts::{crosstalk, delta_floor_check, empirical_delta, rescale_to_unit_diagonal, Readout};
use sclab_core::rng::{derive_seed, rng_from_seed};
use sclab_core::sparse::{
    certificate_from_coherence, encode, threshold_decode, NoiseSpec, SparseState, THRESHOLD_LEVEL,
};

/// Naive `max_{i≠j}|⟨a_i, a_j⟩|` and `Σ_{i≠j}⟨a_i, a_j⟩²` over columns.
fn naive_gram(m: &DenseMatrix) -> (f64, f64) {
    let (d, f) = (m.rows(), m.cols());
    let (mut max, mut sum) = (0.0f64, 0.0);
    for i in 0..f {
        for j in 0..f {
            if i != j {
                let g: f64 = (0..d).map(|k| m.get(k, i) * m.get(k, j)).sum();
                max = max.max(g.abs());
                sum += g * g;
            }
        }
    }
    (max, sum)
}

fn gaussian_readout(f: usize, d: usize, seed: u64) -> DenseMatrix {
    let mut rng = rng_from_seed(seed);
    DenseMatrix::from_fn(f, d, |_, _| sclab_core::rng::standard_normal(&mut rng))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn random_columns_are_unit_norm(d in 1usize..24, f in 1usize..60, seed in any::<u64>()) {
        let code = random_unit_code(d, f, seed).unwrap();
        for j in 0..f {
            let n: f64 = code.column(j).iter().map(|v| v * v).sum::<f64>().sqrt();
            prop_assert!((n - 1.0).abs() <= 1e-10);
        }
    }

    #[test]
    fn coherence_respects_welch(d in 2usize..16, extra in 1usize..40, seed in any::<u64>()) {
        let f = d + extra;
        let code = random_unit_code(d, f, seed).unwrap();
        let cert = certify(&code, &TilePlan::default()).unwrap();
        prop_assert!(cert.coherence >= welch_pair_floor(d, f) - 1e-9);
    }

    #[test]
    fn tiling_does_not_change_statistics(d in 1usize..12, f in 2usize..70, tile in 1usize..80, seed in any::<u64>()) {
        let code = random_unit_code(d, f, seed).unwrap();
        let a = offdiag_stats(code.columns(), &TilePlan::new(tile, false).unwrap()).unwrap();
        let (max, sum) = naive_gram(code.columns());
        prop_assert!((a.max_abs_offdiag - max).abs() <= 1e-12);
        prop_assert!((a.sum_sq_offdiag - sum).abs() <= 1e-10 * sum.max(1.0));
    }

    #[test]
    fn sum_floor_holds_for_arbitrary_rescaled_readouts(d in 2usize..10, extra in 1usize..30, seed in any::<u64>()) {
        let f = d + extra;
        let code = random_unit_code(d, f, seed).unwrap();
        let raw = Readout::external(gaussian_readout(f, d, seed ^ 1), &code).unwrap();
        let Ok(unit) = rescale_to_unit_diagonal(&raw, &code, 1e-8) else {
            return Ok(());
        };
        let r = crosstalk(&unit, &code, &TilePlan::default()).unwrap();
        prop_assert!(r.sum_floor_holds(), "slack {}", r.slack_sum);
        prop_assert!(r.max_floor_holds());
        let delta = empirical_delta(&unit, &code, &TilePlan::default()).unwrap();
        if delta < 0.5 {
            prop_assert!(delta_floor_check(delta, d, f).unwrap().consistent);
        }
    }

    #[test]
    fn basis_unions_meet_the_sum_floor(d in 1usize..12, k in 1usize..5, seed in any::<u64>()) {
        let code = basis_union_code(d, k, seed).unwrap();
        let cert = certify(&code, &TilePlan::default()).unwrap();
        let f = (k * d) as f64;
        let floor = f * (f - d as f64) / d as f64;
        prop_assert!(cert.is_tight_frame);
        prop_assert!((cert.sum_sq_offdiag - floor).abs() <= 1e-6 * floor.max(1.0));
    }

    #[test]
    fn certified_decoding_is_exact(c in 0.01f64..0.24, f in 2usize..24, seed in any::<u64>()) {
        // Gram (1−c)I + cJ: every pair has inner product exactly c.
        let gram = DenseMatrix::from_fn(f, f, |i, j| if i == j { 1.0 } else { c });
        let l = sclab_core::kernels::cholesky(&gram).unwrap();
        let code = Code::normalized(l.transpose(), CodeKind::External).unwrap();
        let mu = certify(&code, &TilePlan::default()).unwrap().coherence;
        let s_max = ((0.5 / mu).ceil() as usize).saturating_sub(1).clamp(1, f);
        let mut rng = rng_from_seed(seed);
        let s = rand::Rng::random_range(&mut rng, 1..=s_max);
        let slack = 0.5 - s as f64 * mu;
        prop_assume!(slack > 1e-9);
        let nu = slack * rand::Rng::random_range(&mut rng, 0.0..0.999);
        let cert = certificate_from_coherence(mu, s, nu).unwrap();
        prop_assert!(cert.satisfied);
        let state = SparseState::random_fixed(f, s, &mut rng).unwrap();
        let enc = encode(&code, &state, NoiseSpec::ScoreBounded(nu), derive_seed(seed, &[1])).unwrap();
        let dec = threshold_decode(&code, &enc, THRESHOLD_LEVEL, Some(&state)).unwrap();
        prop_assert_eq!(dec.exact, Some(true));
        prop_assert!(dec.margin >= cert.tau - 1e-12);
    }

    #[test]
    fn seeds_reproduce(d in 1usize..10, f in 1usize..20, seed in any::<u64>()) {
        prop_assert_eq!(random_unit_code(d, f, seed).unwrap(), random_unit_code(d, f, seed).unwrap());
        prop_assert_eq!(basis_union_code(d, 2, seed).unwrap(), basis_union_code(d, 2, seed).unwrap());
    }
}
