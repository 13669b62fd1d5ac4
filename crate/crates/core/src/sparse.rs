//! Sparse Boolean states, their superposed encodings, the threshold decoder
//! and the coherence-based recovery certificate.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::seq::index;
use rand::Rng;

use crate::codes::{Code, CodeCertificate};
use crate::error::{Error, Result};
use crate::kernels::{self, TilePlan};
use crate::readouts::Readout;
use crate::rng::{rng_from_seed, standard_normal};
use crate::stats::{CompensatedSum, Summary};

/// Decision level of the threshold decoder.
pub const THRESHOLD_LEVEL: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum SparsityModel {
    /// Support of exactly `s` indices.
    FixedSupport(usize),
    /// Independent Bernoulli coordinates with mean `s/F`.
    BernoulliExpected(f64),
}

/// Boolean vector `b ∈ {0,1}^F` stored as its strictly increasing support.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseState {
    features: usize,
    support: Vec<usize>,
    model: SparsityModel,
}

impl SparseState {
    pub fn new(features: usize, support: Vec<usize>, model: SparsityModel) -> Result<SparseState> {
        if support.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::contract("SparseState::new", "support must be strictly increasing"));
        }
        if support.last().is_some_and(|&i| i >= features) {
            return Err(Error::contract("SparseState::new", "support index out of range"));
        }
        if let SparsityModel::FixedSupport(s) = model {
            if s != support.len() {
                return Err(Error::contract("SparseState::new", "FixedSupport size differs from |S|"));
            }
        }
        Ok(SparseState {
            features,
            support,
            model,
        })
    }

    /// Fixed-support state from an index list in any order.
    pub fn from_indices(features: usize, mut indices: Vec<usize>) -> Result<SparseState> {
        indices.sort_unstable();
        let s = indices.len();
        SparseState::new(features, indices, SparsityModel::FixedSupport(s))
    }

    pub fn empty(features: usize) -> SparseState {
        SparseState {
            features,
            support: Vec::new(),
            model: SparsityModel::FixedSupport(0),
        }
    }

    /// Uniformly random support of exactly `s` indices.
    pub fn random_fixed<R: Rng + ?Sized>(features: usize, s: usize, rng: &mut R) -> Result<SparseState> {
        if s > features {
            return Err(Error::contract("SparseState::random_fixed", "s exceeds F"));
        }
        let mut support = index::sample(rng, features, s).into_vec();
        support.sort_unstable();
        Ok(SparseState {
            features,
            support,
            model: SparsityModel::FixedSupport(s),
        })
    }

    /// Independent `Bernoulli(s/F)` coordinates.
    pub fn random_bernoulli<R: Rng + ?Sized>(features: usize, s: f64, rng: &mut R) -> Result<SparseState> {
        if features == 0 || !(0.0..=features as f64).contains(&s) {
            return Err(Error::Domain {
                param: "s",
                value: s,
                expected: "0 <= s <= F",
            });
        }
        let p = s / features as f64;
        let support = (0..features).filter(|_| rng.random::<f64>() < p).collect();
        Ok(SparseState {
            features,
            support,
            model: SparsityModel::BernoulliExpected(s),
        })
    }

    pub fn features(&self) -> usize {
        self.features
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    /// Realized `|S|`.
    pub fn weight(&self) -> usize {
        self.support.len()
    }

    pub fn model(&self) -> SparsityModel {
        self.model
    }

    pub fn to_bools(&self) -> Vec<bool> {
        let mut out = vec![false; self.features];
        self.support.iter().for_each(|&i| out[i] = true);
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseSpec {
    None,
    /// `η ~ N(0, σ²I_d)` added in the ambient space.
    GaussianAmbient(f64),
    /// i.i.d. `uniform[−ν, ν]` added to every score.
    ScoreBounded(f64),
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            NoiseSpec::GaussianAmbient(v) | NoiseSpec::ScoreBounded(v) if !(v >= 0.0 && v.is_finite()) => {
                Err(Error::Domain {
                    param: "noise",
                    value: v,
                    expected: "finite and >= 0",
                })
            }
            _ => Ok(()),
        }
    }

    /// Score-noise bound known a priori (`ν`), zero for ambient noise.
    pub fn score_bound(&self) -> f64 {
        match *self {
            NoiseSpec::ScoreBounded(nu) => nu,
            _ => 0.0,
        }
    }
}

/// `none`, `gaussian:<sigma>` or `score:<nu>`.
#[cfg(feature = "serde")]
impl serde::Serialize for NoiseSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> core::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[cfg(feature = "serde")]
impl<'de> serde::Deserialize<'de> for NoiseSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> core::result::Result<Self, D::Error> {
        let text = <alloc::borrow::Cow<'de, str>>::deserialize(d)?;
        text.parse()
            .map_err(|e: Error| serde::de::Error::custom(alloc::string::ToString::to_string(&e)))
    }
}

impl fmt::Display for NoiseSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NoiseSpec::None => f.write_str("none"),
            NoiseSpec::GaussianAmbient(s) => write!(f, "gaussian:{s}"),
            NoiseSpec::ScoreBounded(n) => write!(f, "score:{n}"),
        }
    }
}

impl core::str::FromStr for NoiseSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<NoiseSpec> {
        let bad = || Error::config("noise", alloc::format!("cannot parse `{s}`"));
        let spec = match s.trim() {
            "none" | "0" => NoiseSpec::None,
            t => {
                let (kind, value) = t.split_once(':').ok_or_else(bad)?;
                let v: f64 = value.trim().parse().map_err(|_| bad())?;
                match kind.trim() {
                    "gaussian" => NoiseSpec::GaussianAmbient(v),
                    "score" => NoiseSpec::ScoreBounded(v),
                    _ => return Err(bad()),
                }
            }
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// `x = Φb + η` plus any score perturbation scheduled for the decoder.
#[derive(Debug, Clone, PartialEq)]
pub struct Encoding {
    pub x: Vec<f64>,
    pub ambient_noise: Option<Vec<f64>>,
    pub score_noise: Option<Vec<f64>>,
}

pub fn encode(code: &Code, state: &SparseState, noise: NoiseSpec, seed: u64) -> Result<Encoding> {
    if state.features != code.features() {
        return Err(Error::DimensionMismatch {
            op: "encode",
            expected: (code.dim(), code.features()),
            found: (code.dim(), state.features),
        });
    }
    noise.validate()?;
    let mut x = code.superpose(&state.support);
    let mut rng = rng_from_seed(seed);
    let (ambient_noise, score_noise) = match noise {
        NoiseSpec::None => (None, None),
        NoiseSpec::GaussianAmbient(sigma) => {
            let eta: Vec<f64> = (0..code.dim()).map(|_| sigma * standard_normal(&mut rng)).collect();
            x.iter_mut().zip(&eta).for_each(|(xi, e)| *xi += e);
            (Some(eta), None)
        }
        NoiseSpec::ScoreBounded(nu) => {
            let pert = (0..code.features())
                .map(|_| if nu > 0.0 { rng.random_range(-nu..=nu) } else { 0.0 })
                .collect();
            (None, Some(pert))
        }
    };
    Ok(Encoding {
        x,
        ambient_noise,
        score_noise,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeResult {
    pub decoded: Vec<bool>,
    pub scores: Vec<f64>,
    /// `min_i |z_i − level|`
    pub margin: f64,
    /// Equality with the ground truth, when one was supplied.
    pub exact: Option<bool>,
    /// Realized score noise `‖Φᵀη‖_∞` (or the largest injected perturbation).
    pub score_noise_observed: f64,
}

/// Thresholds the scores `z = Φᵀx (+ score noise)` at `level`; ties decode
/// as active.
pub fn threshold_decode(
    code: &Code,
    encoding: &Encoding,
    level: f64,
    truth: Option<&SparseState>,
) -> Result<DecodeResult> {
    if encoding.x.len() != code.dim() {
        return Err(Error::DimensionMismatch {
            op: "threshold_decode",
            expected: (code.dim(), 1),
            found: (encoding.x.len(), 1),
        });
    }
    let mut scores = code.scores(&encoding.x);
    let mut observed = 0.0f64;
    if let Some(eta) = &encoding.ambient_noise {
        observed = code.scores(eta).iter().fold(0.0f64, |m, v| m.max(v.abs()));
    }
    if let Some(pert) = &encoding.score_noise {
        if pert.len() != scores.len() {
            return Err(Error::contract("threshold_decode", "score noise length differs from F"));
        }
        for (z, p) in scores.iter_mut().zip(pert) {
            *z += p;
            observed = observed.max(p.abs());
        }
    }
    let decoded: Vec<bool> = scores.iter().map(|&z| z >= level).collect();
    let margin = scores.iter().fold(f64::INFINITY, |m, z| m.min((z - level).abs()));
    let exact = match truth {
        Some(t) => {
            if t.features != code.features() {
                return Err(Error::contract("threshold_decode", "ground truth has wrong F"));
            }
            Some(decoded == t.to_bools())
        }
        None => None,
    };
    Ok(DecodeResult {
        decoded,
        scores,
        margin,
        exact,
        score_noise_observed: observed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RecoveryCertificate {
    /// `sμ + ν < 1/2`
    pub satisfied: bool,
    /// `1/2 − (sμ + ν)`
    pub tau: f64,
}

pub fn certificate_from_coherence(coherence: f64, s: usize, nu: f64) -> Result<RecoveryCertificate> {
    if !(nu >= 0.0) {
        return Err(Error::Domain {
            param: "nu",
            value: nu,
            expected: "nu >= 0",
        });
    }
    let load = s as f64 * coherence + nu;
    Ok(RecoveryCertificate {
        satisfied: load < THRESHOLD_LEVEL,
        tau: THRESHOLD_LEVEL - load,
    })
}

/// Deterministic guarantee: when satisfied, [`threshold_decode`] at level 1/2
/// is exact for every `s`-sparse state with score noise at most `nu`.
pub fn recovery_certificate(cert: &CodeCertificate, s: usize, nu: f64) -> Result<RecoveryCertificate> {
    certificate_from_coherence(cert.coherence, s, nu)
}

/// Largest `s` certified at score noise `nu` (0 when even `s = 1` fails).
pub fn max_certified_sparsity(coherence: f64, nu: f64) -> usize {
    if coherence <= 0.0 {
        return usize::MAX;
    }
    let mut s = libm::floor((THRESHOLD_LEVEL - nu) / coherence).max(0.0) as usize;
    while s > 0 && !(s as f64 * coherence + nu < THRESHOLD_LEVEL) {
        s -= 1;
    }
    s
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearEnergy {
    /// Batch mean of `‖Ab‖²/F`.
    pub mean: f64,
    pub stderr: f64,
    /// `‖Ab‖²/F` per state.
    pub values: Vec<f64>,
}

/// `‖(GΨ)b − b‖²/F` for each state, computed as `G(Ψb) − b` in `O(dF)`.
pub fn linear_energy(readout: &Readout, code: &Code, states: &[SparseState]) -> Result<LinearEnergy> {
    if !readout.is_unit_diagonal() {
        return Err(Error::contract("linear_energy", "readout must be unit-diagonal"));
    }
    let f = code.features();
    if readout.matrix().rows() != f || readout.matrix().cols() != code.dim() {
        return Err(Error::DimensionMismatch {
            op: "linear_energy",
            expected: (f, code.dim()),
            found: (readout.matrix().rows(), readout.matrix().cols()),
        });
    }
    let mut values = Vec::with_capacity(states.len());
    for state in states {
        if state.features != f {
            return Err(Error::contract("linear_energy", "state has wrong F"));
        }
        values.push(state_energy(readout, code, state) / f as f64);
    }
    let summary = Summary::of(&values);
    Ok(LinearEnergy {
        mean: summary.mean,
        stderr: summary.stderr,
        values,
    })
}

fn state_energy(readout: &Readout, code: &Code, state: &SparseState) -> f64 {
    if state.support.is_empty() {
        return 0.0;
    }
    let y = code.superpose(&state.support);
    let mut out = readout.apply(&y);
    state.support.iter().for_each(|&i| out[i] -= 1.0);
    out.iter().map(|v| v * v).collect::<CompensatedSum>().value()
}

/// Exact `E_b‖Ab‖²` for i.i.d. `Bernoulli(p)` coordinates:
/// `p(1−p)‖A‖_F² + p²‖A·1‖²` with `A = GΨ − I`.
pub fn energy_closed_form(readout: &Readout, code: &Code, p: f64, plan: &TilePlan) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain {
            param: "p",
            value: p,
            expected: "[0, 1]",
        });
    }
    let f = code.features();
    let frob = if f >= 2 {
        let stats = kernels::product_stats(readout.matrix(), code.columns(), plan)?;
        let diag: f64 = readout.diagonal(code).iter().map(|m| (m - 1.0) * (m - 1.0)).sum();
        stats.sum_sq_offdiag + diag
    } else {
        let m = readout.diagonal(code)[0] - 1.0;
        m * m
    };
    let all = code.superpose(&(0..f).collect::<Vec<_>>());
    let a1: f64 = readout
        .apply(&all)
        .iter()
        .map(|v| (v - 1.0) * (v - 1.0))
        .collect::<CompensatedSum>()
        .value();
    Ok(p * (1.0 - p) * frob + p * p * a1)
}

/// `s(F−d)/(2dF)`, the per-feature floor at `p = s/F` (valid for `s ≤ F/2`).
pub fn energy_floor_bound(d: usize, f: usize, s: f64) -> f64 {
    let (dd, ff) = (d as f64, f as f64);
    (s * (ff - dd) / (2.0 * dd * ff)).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::{random_unit_code, CodeKind};
    use crate::kernels::DenseMatrix;
    use alloc::vec;

    #[test]
    fn empty_support_encodes_to_zero() {
        let code = random_unit_code(5, 9, 1).unwrap();
        let enc = encode(&code, &SparseState::empty(9), NoiseSpec::None, 0).unwrap();
        assert!(enc.x.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn singleton_encodes_to_column() {
        let code = random_unit_code(5, 9, 1).unwrap();
        let st = SparseState::from_indices(9, vec![4]).unwrap();
        let enc = encode(&code, &st, NoiseSpec::None, 0).unwrap();
        assert_eq!(enc.x, code.column(4));
    }

    #[test]
    fn gaussian_noise_reproducible_and_chi_scaled() {
        let (d, sigma) = (16usize, 0.1);
        let code = random_unit_code(d, 40, 2).unwrap();
        let st = SparseState::from_indices(40, vec![3, 17]).unwrap();
        let clean = code.superpose(st.support());
        let a = encode(&code, &st, NoiseSpec::GaussianAmbient(sigma), 9).unwrap();
        assert_eq!(a, encode(&code, &st, NoiseSpec::GaussianAmbient(sigma), 9).unwrap());
        // E‖η‖ = σ·√2·Γ((d+1)/2)/Γ(d/2)
        let chi_mean = sigma * 2f64.sqrt() * (libm::lgamma((d as f64 + 1.0) / 2.0) - libm::lgamma(d as f64 / 2.0)).exp();
        let norms: Vec<f64> = (0..1000)
            .map(|k| {
                let e = encode(&code, &st, NoiseSpec::GaussianAmbient(sigma), k).unwrap();
                e.x.iter().zip(&clean).map(|(x, c)| (x - c).powi(2)).sum::<f64>().sqrt()
            })
            .collect();
        let s = Summary::of(&norms);
        assert!((s.mean - chi_mean).abs() < 4.0 * s.stderr, "{} vs {}", s.mean, chi_mean);
        assert!((chi_mean - sigma * (d as f64).sqrt()).abs() < 0.02);
    }

    #[test]
    fn orthonormal_decode_has_half_margin() {
        let code = Code::identity(5).unwrap();
        let st = SparseState::from_indices(5, vec![1, 3]).unwrap();
        let enc = encode(&code, &st, NoiseSpec::None, 0).unwrap();
        let res = threshold_decode(&code, &enc, THRESHOLD_LEVEL, Some(&st)).unwrap();
        assert_eq!(res.exact, Some(true));
        assert_eq!(res.margin, 0.5);
        assert_eq!(res.decoded, vec![false, true, false, true, false]);
    }

    #[test]
    fn certificate_guarantees_all_three_sparse_states() {
        // columns with pairwise inner products exactly 0.1: Gram = 0.9 I + 0.1 J
        let f = 8;
        let gram = DenseMatrix::from_fn(f, f, |i, j| if i == j { 1.0 } else { 0.1 });
        let l = kernels::cholesky(&gram).unwrap();
        let code = Code::normalized(l.transpose(), CodeKind::External).unwrap();
        let cert = crate::codes::certify(&code, &TilePlan::default()).unwrap();
        assert!((cert.coherence - 0.1).abs() < 1e-12);
        let rc = recovery_certificate(&cert, 3, 0.1).unwrap();
        assert!(rc.satisfied);
        assert!((rc.tau - 0.1).abs() < 1e-12);
        for a in 0..f {
            for b in a + 1..f {
                for c in b + 1..f {
                    let st = SparseState::from_indices(f, vec![a, b, c]).unwrap();
                    for seed in 0..4 {
                        let enc = encode(&code, &st, NoiseSpec::ScoreBounded(0.1), seed).unwrap();
                        let r = threshold_decode(&code, &enc, THRESHOLD_LEVEL, Some(&st)).unwrap();
                        assert_eq!(r.exact, Some(true));
                        assert!(r.margin >= rc.tau - 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn duplicate_columns_break_recovery() {
        let m = DenseMatrix::new(2, 3, vec![1.0, 1.0, 0.0, 0.0, 0.0, 1.0]).unwrap();
        let code = Code::from_columns(m, CodeKind::External).unwrap();
        let st = SparseState::from_indices(3, vec![0]).unwrap();
        let enc = encode(&code, &st, NoiseSpec::None, 0).unwrap();
        let r = threshold_decode(&code, &enc, THRESHOLD_LEVEL, Some(&st)).unwrap();
        assert_eq!(r.decoded, vec![true, true, false]);
        assert_eq!(r.exact, Some(false));
    }

    #[test]
    fn certificate_arithmetic() {
        let c = certificate_from_coherence(0.0, 17, 0.0).unwrap();
        assert!(c.satisfied && c.tau == 0.5);
        let c = certificate_from_coherence(0.1, 5, 0.0).unwrap();
        assert!(!c.satisfied);
        assert!(c.tau.abs() < 1e-15);
        assert!(certificate_from_coherence(0.1, 1, -0.1).is_err());
        assert_eq!(max_certified_sparsity(0.1, 0.0), 4);
        assert_eq!(max_certified_sparsity(0.7, 0.0), 0);
        assert_eq!(max_certified_sparsity(0.12, 0.1), 3);
    }

    #[test]
    fn ties_decode_active() {
        let code = Code::identity(2).unwrap();
        let enc = Encoding {
            x: vec![0.5, 0.25],
            ambient_noise: None,
            score_noise: None,
        };
        let r = threshold_decode(&code, &enc, THRESHOLD_LEVEL, None).unwrap();
        assert_eq!(r.decoded, vec![true, false]);
        assert_eq!(r.margin, 0.0);
    }

    #[test]
    fn empty_state_has_no_energy() {
        let code = random_unit_code(3, 7, 1).unwrap();
        let e = linear_energy(&Readout::transpose(&code), &code, &[SparseState::empty(7)]).unwrap();
        assert_eq!(e.mean, 0.0);
    }

    #[test]
    fn state_validation() {
        assert!(SparseState::new(5, vec![1, 1], SparsityModel::FixedSupport(2)).is_err());
        assert!(SparseState::new(5, vec![5], SparsityModel::FixedSupport(1)).is_err());
        assert!(SparseState::new(5, vec![1], SparsityModel::FixedSupport(2)).is_err());
        let mut rng = rng_from_seed(1);
        let st = SparseState::random_fixed(10, 4, &mut rng).unwrap();
        assert_eq!(st.weight(), 4);
        assert!(SparseState::random_fixed(3, 4, &mut rng).is_err());
    }

    #[test]
    fn noise_spec_round_trip() {
        for n in [NoiseSpec::None, NoiseSpec::GaussianAmbient(0.05), NoiseSpec::ScoreBounded(0.125)] {
            let s = alloc::format!("{n}");
            assert_eq!(s.parse::<NoiseSpec>().unwrap(), n);
        }
        assert!("score:-1".parse::<NoiseSpec>().is_err());
        assert!("laplace:1".parse::<NoiseSpec>().is_err());
    }
}
