//! Worked examples for the public operations.

use sclab_core::codes::{
    basis_union_code, certify, random_unit_code, tight_frame_code, welch_pair_floor, Code, TightFrameOptions,
};
use sclab_core::experiments::{run, ExperimentConfig, ExperimentKind, FeatureRule};
use sclab_core::kernels::{frame_operator, DenseMatrix, TilePlan};
use sclab_core::readouts::{crosstalk, delta_floor_check, Readout};
use sclab_core::scales::{crossover_widths, g_of_alpha, hierarchy_report, interpolation_f, ScaleParams};
use sclab_core::sparse::{energy_closed_form, energy_floor_bound, NoiseSpec};
use sclab_core::Error;

fn plan() -> TilePlan {
    TilePlan::default()
}

#[test]
fn one_dimensional_codes_are_signs() {
    let code = random_unit_code(1, 3, 99).unwrap();
    for j in 0..3 {
        assert_eq!(code.column(j)[0].abs(), 1.0);
    }
}

#[test]
fn large_random_code_has_nontrivial_coherence() {
    let code = random_unit_code(64, 4096, 7).unwrap();
    let mu = certify(&code, &plan()).unwrap().coherence;
    assert!(mu > 0.0 && mu < 1.0);
}

#[test]
fn basis_union_examples() {
    let one = certify(&basis_union_code(4, 1, 3).unwrap(), &plan()).unwrap();
    assert!(one.coherence < 1e-12);
    let two = certify(&basis_union_code(4, 2, 3).unwrap(), &plan()).unwrap();
    assert!((two.sum_sq_offdiag - 8.0).abs() < 1e-9);
    assert!((two.welch_pair_floor - (4.0f64 / 28.0).sqrt()).abs() < 1e-12);
    assert!(two.frame_bound_gap < 1e-9);
    let s = frame_operator(basis_union_code(2, 2, 5).unwrap().columns());
    assert!(s.max_abs_diff(&DenseMatrix::identity(2).scaled(2.0)) < 1e-12);
}

#[test]
fn tight_frame_examples() {
    let opts = TightFrameOptions::default();
    let c36 = certify(&tight_frame_code(3, 6, 1, opts).unwrap(), &plan()).unwrap();
    assert!((c36.sum_sq_offdiag - 6.0).abs() < 1e-8);
    let mb = certify(&tight_frame_code(2, 3, 1, opts).unwrap(), &plan()).unwrap();
    assert!((mb.coherence - 0.5).abs() < 1e-6);
    let sq = certify(&tight_frame_code(4, 4, 1, opts).unwrap(), &plan()).unwrap();
    assert!(sq.coherence < 1e-9 && sq.frame_bound_gap < 1e-9);
    let starved = TightFrameOptions { tol: 1e-300, max_iters: 2 };
    assert!(matches!(tight_frame_code(3, 7, 1, starved), Err(Error::NoConvergence { .. })));
}

#[test]
fn identity_certificate() {
    let c = certify(&Code::identity(5).unwrap(), &plan()).unwrap();
    assert_eq!((c.coherence, c.welch_pair_floor), (0.0, 0.0));
}

#[test]
fn random_code_above_pair_floor() {
    let c = certify(&random_unit_code(16, 256, 2).unwrap(), &plan()).unwrap();
    assert!(c.coherence >= welch_pair_floor(16, 256));
}

#[test]
fn crosstalk_of_tight_frame_is_on_the_floor() {
    let code = tight_frame_code(4, 8, 0, TightFrameOptions::default()).unwrap();
    let r = crosstalk(&Readout::transpose(&code), &code, &plan()).unwrap();
    assert!(r.slack_sum.abs() < 1e-8);
    assert!((r.mean_sq_offdiag - r.sum_sq_offdiag / 56.0).abs() < 1e-12);
}

#[test]
fn impossibility_examples() {
    let c = delta_floor_check(0.3, 4, 8).unwrap();
    assert!(c.consistent);
    assert!(matches!(delta_floor_check(0.6, 4, 8), Err(Error::OutOfRegime { .. })));
    assert!(matches!(delta_floor_check(-0.1, 4, 8), Err(Error::Domain { .. })));
}

#[test]
fn energy_examples() {
    assert!((energy_floor_bound(16, 256, 4.0) - 0.1171875).abs() < 1e-15);
    let code = random_unit_code(8, 16, 1).unwrap();
    let e = energy_closed_form(&Readout::transpose(&code), &code, 0.0, &plan()).unwrap();
    assert_eq!(e, 0.0);
}

#[test]
fn scale_examples() {
    assert!((g_of_alpha(0.99).unwrap() - 21.7).abs() < 0.1);
    assert!((crossover_widths(0.992).unwrap().d_cross_h - 670.0).abs() < 1.0);
    assert!((interpolation_f(100.0, 1.0, 0.5, 1.0, 1.0).unwrap() - 10_000.0).abs() < 1e-9);
    let r = hierarchy_report(ScaleParams::new(1152.0, 0.99)).unwrap();
    assert!((r.f_h_template.value / 39_100.0 - 1.0).abs() < 0.01);
    assert!((r.f_as_upper.value / 188_200.0 - 1.0).abs() < 0.01);
}

#[test]
fn experiments_are_reproducible() {
    let mut c = ExperimentConfig::new(ExperimentKind::RecoveryPhase);
    c.grid.d = vec![12];
    c.grid.features = vec![FeatureRule::Multiple(3)];
    c.grid.s = vec![1, 2];
    c.grid.noise = vec![NoiseSpec::None, NoiseSpec::GaussianAmbient(0.05)];
    c.trials = 30;
    c.seed = 5;
    assert_eq!(run(&c).unwrap(), run(&c).unwrap());
    let mut other = c.clone();
    other.seed = 6;
    assert_ne!(run(&c).unwrap(), run(&other).unwrap());
}

#[test]
fn interference_variance_matches_m_over_d() {
    let mut c = ExperimentConfig::new(ExperimentKind::InterferenceTail);
    c.grid.d = vec![64];
    c.grid.s = vec![8];
    c.trials = 10_000;
    let r = run(&c).unwrap();
    let v = r.find("variance").next().unwrap();
    assert!(v.bound.as_ref().unwrap().satisfied, "variance {}", v.value);
    assert_eq!(r.violations().count(), 0);
}

#[test]
fn trials_must_be_positive() {
    let mut c = ExperimentConfig::new(ExperimentKind::EnergyFloor);
    c.trials = 0;
    assert_eq!(run(&c).unwrap_err().to_string(), "invalid config field `trials`: trials must be ≥ 1");
}
