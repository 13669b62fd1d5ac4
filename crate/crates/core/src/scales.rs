//! Closed-form capacity reference scales. Every `log` is the natural
//! logarithm; unnamed universal constants default to 1 and stay explicit.

use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Standing of a reported scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "SCREAMING-KEBAB-CASE"))]
pub enum Provenance {
    /// Follows from published results taken as given.
    ProvedImported,
    /// Proved by direct argument in this framework.
    ProvedHere,
    /// Holds only under the nonlinear γ-reset hypothesis.
    Conditional,
    /// A reference scale, not a capacity claim.
    ReferenceOnly,
}

impl Provenance {
    pub fn label(self) -> &'static str {
        match self {
            Provenance::ProvedImported => "PROVED-IMPORTED",
            Provenance::ProvedHere => "PROVED-HERE",
            Provenance::Conditional => "CONDITIONAL",
            Provenance::ReferenceOnly => "REFERENCE-ONLY",
        }
    }
}

/// `g(α) = 1/((1−α)·ln(1/(1−α)))`, the compressed-sensing storage factor.
pub fn g_of_alpha(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain {
            param: "alpha",
            value: alpha,
            expected: "(0, 1)",
        });
    }
    let rest = 1.0 - alpha;
    Ok(1.0 / (rest * libm::log(1.0 / rest)))
}

/// `(C₂/C₁)²·d^{3/2}·s^{−5/2}`.
pub fn template_compatibility_f(d: f64, s: f64, c1: f64, c2: f64) -> Result<f64> {
    if !(d >= 1.0) || !(s >= 1.0) {
        return Err(Error::Domain {
            param: "d, s",
            value: d.min(s),
            expected: "d >= 1 and s >= 1",
        });
    }
    if !(c1 > 0.0 && c2 > 0.0) {
        return Err(Error::Domain {
            param: "C1, C2",
            value: c1.min(c2),
            expected: "> 0",
        });
    }
    let ratio = c2 / c1;
    Ok(ratio * ratio * libm::pow(d, 1.5) * libm::pow(s, -2.5))
}

/// `(n²/ln²n, n²/ln n)` with unit constants. The log-factor gap between the
/// sides is unresolved; both are reported.
pub fn as_bracket(n: f64) -> Result<(f64, f64)> {
    if !(n >= 3.0) || !n.is_finite() {
        return Err(Error::Domain {
            param: "n",
            value: n,
            expected: "n >= 3",
        });
    }
    let l = libm::log(n);
    Ok((n * n / (l * l), n * n / l))
}

/// `d / ln²d`.
fn as_lower_ratio(d: f64) -> f64 {
    let l = libm::log(d);
    d / (l * l)
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Crossovers {
    /// `g(α)²`
    pub d_cross_h: f64,
    /// Largest `d ∈ [3, 10¹²]` with `d/ln²d = g(α)`.
    pub d_cross_as: f64,
    /// `d_cross_as/ln²(d_cross_as) − g(α)`
    pub as_residual: f64,
}

pub fn crossover_widths(alpha: f64) -> Result<Crossovers> {
    let g = g_of_alpha(alpha)?;
    // d/ln²d decreases on [3, e²] and increases after, so the largest root
    // lies on the increasing branch.
    let (mut lo, mut hi) = (core::f64::consts::E * core::f64::consts::E, 1e12);
    if as_lower_ratio(hi) < g || as_lower_ratio(lo) > g {
        return Err(Error::Domain {
            param: "alpha",
            value: alpha,
            expected: "g(alpha) reachable by d/ln^2 d on [3, 1e12]",
        });
    }
    while (hi - lo) > 1e-9 * lo {
        let mid = 0.5 * (lo + hi);
        if as_lower_ratio(mid) < g {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let d_as = 0.5 * (lo + hi);
    Ok(Crossovers {
        d_cross_h: g * g,
        d_cross_as: d_as,
        as_residual: as_lower_ratio(d_as) - g,
    })
}

/// `c_γ·K_γ²·d^{3/2+γ}/s^{1/2}`, meaningful only under the γ-reset
/// hypothesis.
pub fn interpolation_f(d: f64, s: f64, gamma: f64, k_gamma: f64, c_gamma: f64) -> Result<f64> {
    if !(0.0..=0.5).contains(&gamma) {
        return Err(Error::Domain {
            param: "gamma",
            value: gamma,
            expected: "[0, 1/2]",
        });
    }
    for (param, v) in [("d", d), ("s", s), ("K_gamma", k_gamma), ("c_gamma", c_gamma)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::Domain {
                param,
                value: v,
                expected: "> 0",
            });
        }
    }
    Ok(c_gamma * k_gamma * k_gamma * libm::pow(d, 1.5 + gamma) / libm::sqrt(s))
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScaleParams {
    pub d: f64,
    pub alpha: f64,
    pub s: f64,
    pub gamma: f64,
    pub eps: f64,
    pub c1: f64,
    pub c2: f64,
    pub k_gamma: f64,
    pub c_gamma: f64,
}

impl ScaleParams {
    pub fn new(d: f64, alpha: f64) -> Self {
        ScaleParams {
            d,
            alpha,
            s: 1.0,
            gamma: 0.0,
            eps: 0.1,
            c1: 1.0,
            c2: 1.0,
            k_gamma: 1.0,
            c_gamma: 1.0,
        }
    }
}

/// One scale with its standing.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Tagged {
    pub value: f64,
    pub provenance: Provenance,
}

const fn tagged(value: f64, provenance: Provenance) -> Tagged {
    Tagged { value, provenance }
}

/// An adjacent pair of the reference ordering that is not yet separated at
/// the report's `d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct UnseparatedPair {
    pub smaller: &'static str,
    pub larger: &'static str,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ScaleReport {
    pub params: ScaleParams,
    pub g_alpha: Tagged,
    /// `d·g(α)`
    pub f_cs: Tagged,
    /// `(C₂/C₁)²·d^{3/2}·s^{−5/2}`
    pub f_h_template: Tagged,
    pub f_as_lower: Tagged,
    pub f_as_upper: Tagged,
    /// `d·ε²`; `N_JL = exp(Θ(dε²))` is never formed.
    pub n_jl_exponent: Tagged,
    pub d_cross_h: Tagged,
    pub d_cross_as: Tagged,
    pub d_cross_as_residual: f64,
    pub f_interp: Tagged,
    pub ordering_holds: bool,
    pub unseparated: Vec<UnseparatedPair>,
    pub notes: Vec<&'static str>,
}

pub const NOTE_AS_GAP: &str =
    "AS bracket: the single log-factor gap between lower and upper sides is open; both sides are shown";
pub const NOTE_INTERP: &str =
    "F_interp is CONDITIONAL on the nonlinear gamma-reset hypothesis and is not a capacity bound";
pub const NOTE_LOG: &str = "log denotes the natural logarithm throughout";

/// Assembles every reference scale at `(d, α, s, γ, ε)` and checks the
/// ordering `F_CS < F_H < L_AS ≤ U_AS < N_JL` at this finite `d`.
pub fn hierarchy_report(params: ScaleParams) -> Result<ScaleReport> {
    let d = params.d;
    if !(d >= 3.0) || !d.is_finite() {
        return Err(Error::Domain {
            param: "d",
            value: d,
            expected: "d >= 3",
        });
    }
    if !(params.eps > 0.0) {
        return Err(Error::Domain {
            param: "eps",
            value: params.eps,
            expected: "> 0",
        });
    }
    let g = g_of_alpha(params.alpha)?;
    let f_cs = d * g;
    let f_h = template_compatibility_f(d, params.s, params.c1, params.c2)?;
    let (lower, upper) = as_bracket(d)?;
    let jl = d * params.eps * params.eps;
    let cross = crossover_widths(params.alpha)?;
    let f_interp = interpolation_f(d, params.s, params.gamma, params.k_gamma, params.c_gamma)?;

    let mut unseparated = Vec::new();
    let mut check = |ok: bool, smaller, larger| {
        if !ok {
            unseparated.push(UnseparatedPair { smaller, larger });
        }
    };
    check(f_cs < f_h, "F_CS", "F_H");
    check(f_h < lower, "F_H", "L_AS");
    check(lower <= upper, "L_AS", "U_AS");
    check(libm::log(upper) < jl, "U_AS", "N_JL");

    Ok(ScaleReport {
        params,
        g_alpha: tagged(g, Provenance::ReferenceOnly),
        f_cs: tagged(f_cs, Provenance::ReferenceOnly),
        f_h_template: tagged(f_h, Provenance::ProvedHere),
        f_as_lower: tagged(lower, Provenance::ProvedImported),
        f_as_upper: tagged(upper, Provenance::ProvedImported),
        n_jl_exponent: tagged(jl, Provenance::ReferenceOnly),
        d_cross_h: tagged(cross.d_cross_h, Provenance::ProvedHere),
        d_cross_as: tagged(cross.d_cross_as, Provenance::ReferenceOnly),
        d_cross_as_residual: cross.as_residual,
        f_interp: tagged(f_interp, Provenance::Conditional),
        ordering_holds: unseparated.is_empty(),
        unseparated,
        notes: alloc::vec![NOTE_LOG, NOTE_AS_GAP, NOTE_INTERP],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g_matches_reported_numerics() {
        assert!((g_of_alpha(0.99).unwrap() - 21.7).abs() < 0.05);
        assert!((g_of_alpha(0.992).unwrap() - 25.9).abs() < 0.05);
        let e = core::f64::consts::E;
        assert!((g_of_alpha(1.0 - 1.0 / e).unwrap() - e).abs() < 1e-12);
    }

    #[test]
    fn g_domain() {
        for a in [0.0, 1.0, -0.5, 1.5, f64::NAN] {
            assert!(matches!(g_of_alpha(a), Err(Error::Domain { .. })));
        }
    }

    #[test]
    fn template_scale_arithmetic() {
        assert!((template_compatibility_f(100.0, 1.0, 1.0, 1.0).unwrap() - 1000.0).abs() < 1e-9);
        let base = template_compatibility_f(50.0, 1.0, 1.0, 1.0).unwrap();
        let s4 = template_compatibility_f(50.0, 4.0, 1.0, 1.0).unwrap();
        assert!((base / s4 - 32.0).abs() < 1e-12);
        let doubled = template_compatibility_f(100.0, 1.0, 1.0, 1.0).unwrap();
        assert!((doubled / base - 2f64.powf(1.5)).abs() < 1e-12);
        let consts = template_compatibility_f(100.0, 1.0, 2.0, 6.0).unwrap();
        assert!((consts - 9000.0).abs() < 1e-9);
    }

    #[test]
    fn as_bracket_values() {
        let e2 = core::f64::consts::E.powi(2);
        let (lo, hi) = as_bracket(e2).unwrap();
        let e4 = core::f64::consts::E.powi(4);
        assert!((lo - e4 / 4.0).abs() < 1e-9 && (hi - e4 / 2.0).abs() < 1e-9);
        for n in [3.0, 10.0, 1e3, 1e9] {
            let (lo, hi) = as_bracket(n).unwrap();
            assert!(lo < hi);
        }
        let (_, upper) = as_bracket(2304.0).unwrap();
        assert!((upper / 686_000.0 - 1.0).abs() < 0.01);
        assert!(as_bracket(2.9).is_err());
    }

    #[test]
    fn crossovers_match_reported_values() {
        let c = crossover_widths(0.99).unwrap();
        assert!((c.d_cross_h - 472.0).abs() < 1.0);
        assert_eq!(c.d_cross_h, g_of_alpha(0.99).unwrap().powi(2));
        let c2 = crossover_widths(0.992).unwrap();
        assert!((c2.d_cross_h - 670.0).abs() < 1.0);
        for alpha in [0.5, 0.9, 0.99, 0.999999] {
            let c = crossover_widths(alpha).unwrap();
            let g = g_of_alpha(alpha).unwrap();
            assert!(c.as_residual.abs() <= 1e-6 * g, "alpha {alpha}");
            assert!(c.d_cross_as >= 3.0);
        }
    }

    #[test]
    fn interpolation_endpoints() {
        for d in [10.0, 100.0, 1152.0] {
            let v = interpolation_f(d, 1.0, 0.0, 1.0, 1.0).unwrap();
            let t = template_compatibility_f(d, 1.0, 1.0, 1.0).unwrap();
            assert!((v / t - 1.0).abs() < 1e-14);
            assert!((interpolation_f(d, 1.0, 0.5, 1.0, 1.0).unwrap() - d * d).abs() < 1e-9 * d * d);
        }
        let row = interpolation_f(1152.0, 1.0, 0.0, 1.0, 1.0).unwrap();
        assert!((row / 39_100.0 - 1.0).abs() < 0.001);
        assert!(interpolation_f(10.0, 1.0, 0.6, 1.0, 1.0).is_err());
        assert!(interpolation_f(10.0, 1.0, -0.1, 1.0, 1.0).is_err());
    }

    #[test]
    fn hierarchy_at_2048_separates_cs_from_template() {
        let r = hierarchy_report(ScaleParams::new(2048.0, 0.99)).unwrap();
        assert!((r.f_cs.value - 44_400.0).abs() < 100.0);
        assert!((r.f_h_template.value - 92_682.0).abs() < 1.0);
        assert!(!r.unseparated.iter().any(|p| p.smaller == "F_CS"));
        assert_eq!(r.f_interp.provenance, Provenance::Conditional);
    }

    #[test]
    fn hierarchy_below_crossover_is_flagged() {
        let r = hierarchy_report(ScaleParams::new(100.0, 0.99)).unwrap();
        assert!(r.f_cs.value > r.f_h_template.value);
        assert!(!r.ordering_holds);
        assert!(r.unseparated.contains(&UnseparatedPair {
            smaller: "F_CS",
            larger: "F_H"
        }));
        assert!(r.d_cross_h.value > 100.0);
    }

    #[test]
    fn jl_is_reported_as_exponent() {
        let mut p = ScaleParams::new(1e6, 0.9);
        p.eps = 0.5;
        let r = hierarchy_report(p).unwrap();
        assert_eq!(r.n_jl_exponent.value, 250_000.0);
        assert!(r.n_jl_exponent.value.is_finite());
    }
}
