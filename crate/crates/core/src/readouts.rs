//! Linear readouts `G` (`F × d`), unit-diagonal rescaling and the rank–trace
//! cross-talk floors.

use crate::codes::{welch_pair_floor, Code};
use crate::error::{Error, Result};
use crate::kernels::{self, dot, DenseMatrix, TilePlan};
use alloc::vec::Vec;

/// Default lower bound on `|(GΨ)_ii|` accepted by
/// [`rescale_to_unit_diagonal`].
pub const DEFAULT_EPS_DIAG: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum ReadoutKind {
    Transpose,
    LeastSquares,
    External,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Readout {
    matrix: DenseMatrix,
    kind: ReadoutKind,
    unit_diagonal: bool,
}

impl Readout {
    /// `G = Φᵀ`. Unit-diagonal because code columns are unit norm.
    pub fn transpose(code: &Code) -> Readout {
        Readout {
            matrix: code.columns().transpose(),
            kind: ReadoutKind::Transpose,
            unit_diagonal: true,
        }
    }

    /// Minimum-norm readout `Ψᵀ(ΨΨᵀ)⁻¹`, not yet rescaled.
    pub fn least_squares(code: &Code) -> Result<Readout> {
        Ok(Readout {
            matrix: kernels::least_squares_rows(code.columns())?,
            kind: ReadoutKind::LeastSquares,
            unit_diagonal: false,
        })
    }

    /// Arbitrary `F × d` readout for `code`.
    pub fn external(matrix: DenseMatrix, code: &Code) -> Result<Readout> {
        if matrix.rows() != code.features() || matrix.cols() != code.dim() {
            return Err(Error::DimensionMismatch {
                op: "Readout::external",
                expected: (code.features(), code.dim()),
                found: (matrix.rows(), matrix.cols()),
            });
        }
        Ok(Readout {
            matrix,
            kind: ReadoutKind::External,
            unit_diagonal: false,
        })
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }

    pub fn kind(&self) -> ReadoutKind {
        self.kind
    }

    pub fn is_unit_diagonal(&self) -> bool {
        self.unit_diagonal
    }

    /// `(GΨ)_ii` for every feature, `O(F·d)`.
    pub fn diagonal(&self, code: &Code) -> Vec<f64> {
        (0..code.features())
            .map(|i| dot(self.matrix.row(i), &code.column(i)))
            .collect()
    }

    /// `G·y` for an ambient vector `y`.
    pub fn apply(&self, y: &[f64]) -> Vec<f64> {
        self.matrix.mul_vec(y)
    }

    fn check_pair(&self, code: &Code, op: &'static str) -> Result<()> {
        if self.matrix.rows() != code.features() || self.matrix.cols() != code.dim() {
            return Err(Error::DimensionMismatch {
                op,
                expected: (code.features(), code.dim()),
                found: (self.matrix.rows(), self.matrix.cols()),
            });
        }
        Ok(())
    }
}

/// `D·G` with `D = diag(1/(GΨ)_ii)`, so every `(DGΨ)_ii = 1`.
pub fn rescale_to_unit_diagonal(readout: &Readout, code: &Code, eps_diag: f64) -> Result<Readout> {
    readout.check_pair(code, "rescale_to_unit_diagonal")?;
    let diag = readout.diagonal(code);
    if let Some((index, &value)) = diag
        .iter()
        .enumerate()
        .find(|(_, v)| !(v.abs() >= eps_diag))
    {
        return Err(Error::DegenerateDiagonal {
            index,
            value,
            threshold: eps_diag,
        });
    }
    let d = code.dim();
    let scaled: Vec<f64> = readout
        .matrix
        .as_slice()
        .iter()
        .enumerate()
        .map(|(k, v)| v / diag[k / d])
        .collect();
    Ok(Readout {
        matrix: DenseMatrix::new(readout.matrix.rows(), d, scaled)?,
        kind: readout.kind,
        unit_diagonal: true,
    })
}

/// Cross-talk of a unit-diagonal readout against its code together with the
/// three rank–trace floors.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CrosstalkReport {
    pub d: usize,
    pub features: usize,
    pub sum_sq_offdiag: f64,
    pub mean_sq_offdiag: f64,
    pub max_abs_offdiag: f64,
    /// `F(F−d)/d`, clamped at 0 for `F ≤ d`
    pub floor_sum: f64,
    /// `(F−d)/(d(F−1))`, clamped at 0 for `F ≤ d`
    pub floor_mean: f64,
    pub floor_max: f64,
    pub slack_sum: f64,
}

impl CrosstalkReport {
    /// Sum floor with the additive `1e-6·F` accumulation allowance.
    pub fn sum_floor_holds(&self) -> bool {
        self.sum_sq_offdiag >= self.floor_sum - 1e-6 * self.features as f64
    }

    pub fn max_floor_holds(&self) -> bool {
        self.max_abs_offdiag >= self.floor_max - 1e-9
    }
}

/// `F(F−d)/d`, clamped at zero.
pub fn welch_sum_floor(d: usize, f: usize) -> f64 {
    let (dd, ff) = (d as f64, f as f64);
    (ff * (ff - dd) / dd).max(0.0)
}

pub fn crosstalk(readout: &Readout, code: &Code, plan: &TilePlan) -> Result<CrosstalkReport> {
    readout.check_pair(code, "crosstalk")?;
    if !readout.unit_diagonal {
        return Err(Error::contract("crosstalk", "readout must be unit-diagonal"));
    }
    let (d, f) = (code.dim(), code.features());
    if f < 2 {
        return Err(Error::contract("crosstalk", "need F >= 2"));
    }
    let stats = if readout.kind == ReadoutKind::Transpose {
        kernels::offdiag_stats(code.columns(), plan)?
    } else {
        kernels::product_stats(&readout.matrix, code.columns(), plan)?
    };
    let floor_sum = welch_sum_floor(d, f);
    let floor_max = welch_pair_floor(d, f);
    Ok(CrosstalkReport {
        d,
        features: f,
        sum_sq_offdiag: stats.sum_sq_offdiag,
        mean_sq_offdiag: stats.sum_sq_offdiag / (f as f64 * (f as f64 - 1.0)),
        max_abs_offdiag: stats.max_abs_offdiag,
        floor_sum,
        floor_mean: floor_max * floor_max,
        floor_max,
        slack_sum: stats.sum_sq_offdiag - floor_sum,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DeltaFloorCheck {
    /// `δ/(1−δ)`
    pub lhs: f64,
    /// `√((F−d)/(d(F−1)))`
    pub rhs: f64,
    pub consistent: bool,
}

/// Whether a uniform singleton readout error `δ` is compatible with the
/// pairwise floor at `(d, F)`.
pub fn delta_floor_check(delta: f64, d: usize, f: usize) -> Result<DeltaFloorCheck> {
    if !(delta >= 0.0) {
        return Err(Error::Domain {
            param: "delta",
            value: delta,
            expected: "delta >= 0",
        });
    }
    if delta >= 0.5 {
        return Err(Error::OutOfRegime {
            param: "delta",
            value: delta,
            expected: "delta < 1/2",
        });
    }
    if f <= d || d == 0 {
        return Err(Error::contract("delta_floor_check", "need F > d >= 1"));
    }
    let lhs = delta / (1.0 - delta);
    let rhs = welch_pair_floor(d, f);
    Ok(DeltaFloorCheck {
        lhs,
        rhs,
        consistent: lhs >= rhs - 1e-12,
    })
}

/// `max_i ‖Gφ_i − e_i‖_∞`, the worst singleton readout error.
pub fn empirical_delta(readout: &Readout, code: &Code, plan: &TilePlan) -> Result<f64> {
    readout.check_pair(code, "empirical_delta")?;
    if code.features() < 2 {
        let diag = readout.diagonal(code);
        return Ok(diag.iter().fold(0.0f64, |m, v| m.max((v - 1.0).abs())));
    }
    let stats = kernels::product_stats(&readout.matrix, code.columns(), plan)?;
    Ok(stats.max_abs_offdiag.max(stats.max_diag_deviation))
}
