//! Feature dictionaries (codes) and their geometric certificates.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::kernels::{self, DenseMatrix, TilePlan};
use crate::rng::{fill_unit_vector, rng_from_seed, standard_normal};

/// Tolerance on `|‖φ_j‖₂ − 1|` accepted for a code column.
pub const UNIT_NORM_TOL: f64 = 1e-10;

/// Frame-bound gap below which a code is reported as a tight frame.
pub const TIGHT_FRAME_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum CodeKind {
    RandomUnit,
    TightFrame,
    BasisUnion,
    Identity,
    External,
}

/// A `d × F` dictionary with unit-norm columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Code {
    columns: DenseMatrix,
    kind: CodeKind,
}

impl Code {
    /// Wraps `columns`, rejecting any column whose norm is off by more than
    /// [`UNIT_NORM_TOL`].
    pub fn from_columns(columns: DenseMatrix, kind: CodeKind) -> Result<Code> {
        if columns.rows() == 0 || columns.cols() == 0 {
            return Err(Error::contract("Code::from_columns", "d and F must be >= 1"));
        }
        for (j, norm) in column_norms(&columns).into_iter().enumerate() {
            if (norm - 1.0).abs() > UNIT_NORM_TOL {
                return Err(Error::NotUnitNorm { column: j, norm });
            }
        }
        Ok(Code { columns, kind })
    }

    /// Divides every column by its norm. Zero columns are rejected.
    pub fn normalized(mut columns: DenseMatrix, kind: CodeKind) -> Result<Code> {
        normalize_columns(&mut columns)?;
        Code::from_columns(columns, kind)
    }

    pub fn identity(d: usize) -> Result<Code> {
        Code::from_columns(DenseMatrix::identity(d), CodeKind::Identity)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.columns.rows()
    }

    #[inline]
    pub fn features(&self) -> usize {
        self.columns.cols()
    }

    pub fn columns(&self) -> &DenseMatrix {
        &self.columns
    }

    pub fn kind(&self) -> CodeKind {
        self.kind
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.columns.column(j)
    }

    /// Scores `Φᵀx`.
    pub fn scores(&self, x: &[f64]) -> Vec<f64> {
        let f = self.features();
        let mut z = vec![0.0; f];
        for (k, &xk) in x.iter().enumerate().take(self.dim()) {
            if xk == 0.0 {
                continue;
            }
            for (zi, &p) in z.iter_mut().zip(self.columns.row(k)) {
                *zi += xk * p;
            }
        }
        z
    }

    /// `Φ·1_S`, the superposition of the listed columns.
    pub fn superpose(&self, support: &[usize]) -> Vec<f64> {
        (0..self.dim())
            .map(|k| {
                let row = self.columns.row(k);
                support.iter().map(|&j| row[j]).sum()
            })
            .collect()
    }

    /// `Φ·w` for a dense weight vector of length `F`.
    pub fn apply(&self, weights: &[f64]) -> Vec<f64> {
        self.columns.mul_vec(weights)
    }
}

fn column_norms(m: &DenseMatrix) -> Vec<f64> {
    let mut sq = vec![0.0; m.cols()];
    for r in 0..m.rows() {
        for (s, v) in sq.iter_mut().zip(m.row(r)) {
            *s += v * v;
        }
    }
    sq.into_iter().map(libm::sqrt).collect()
}

fn normalize_columns(m: &mut DenseMatrix) -> Result<()> {
    let norms = column_norms(m);
    if let Some(j) = norms.iter().position(|&n| n == 0.0) {
        return Err(Error::NotUnitNorm { column: j, norm: 0.0 });
    }
    let cols = m.cols();
    for (k, v) in m.data_mut().iter_mut().enumerate() {
        *v /= norms[k % cols];
    }
    Ok(())
}

fn check_dims(op: &'static str, d: usize, f: usize) -> Result<()> {
    if d == 0 || f == 0 {
        return Err(Error::contract(op, "d and F must be >= 1"));
    }
    Ok(())
}

/// `F` independent uniform directions on the sphere `S^{d−1}`, drawn column
/// by column from `seed`.
pub fn random_unit_code(d: usize, f: usize, seed: u64) -> Result<Code> {
    check_dims("random_unit_code", d, f)?;
    let mut rng = rng_from_seed(seed);
    let mut data = vec![0.0; d * f];
    let mut col = vec![0.0; d];
    for j in 0..f {
        fill_unit_vector(&mut rng, &mut col);
        for (k, &v) in col.iter().enumerate() {
            data[k * f + j] = v;
        }
    }
    Code::from_columns(DenseMatrix::new(d, f, data)?, CodeKind::RandomUnit)
}

/// Orthonormalizes the columns of a square matrix (modified Gram–Schmidt,
/// two passes). Returns `None` on rank deficiency.
fn orthonormal_columns(a: &mut [f64], d: usize) -> Option<()> {
    for j in 0..d {
        for _pass in 0..2 {
            for i in 0..j {
                let proj: f64 = (0..d).map(|k| a[k * d + i] * a[k * d + j]).sum();
                for k in 0..d {
                    a[k * d + j] -= proj * a[k * d + i];
                }
            }
        }
        let norm = libm::sqrt((0..d).map(|k| a[k * d + j] * a[k * d + j]).sum::<f64>());
        if norm < 1e-8 {
            return None;
        }
        for k in 0..d {
            a[k * d + j] /= norm;
        }
    }
    Some(())
}

/// Union of `k` random orthonormal bases of `R^d`; a tight frame with
/// `ΦΦᵀ = k·I` and `F = k·d`.
pub fn basis_union_code(d: usize, k: usize, seed: u64) -> Result<Code> {
    check_dims("basis_union_code", d, k)?;
    let f = d * k;
    let mut rng = rng_from_seed(seed);
    let mut data = vec![0.0; d * f];
    let mut block = vec![0.0; d * d];
    for b in 0..k {
        loop {
            block.iter_mut().for_each(|v| *v = standard_normal(&mut rng));
            if orthonormal_columns(&mut block, d).is_some() {
                break;
            }
        }
        for r in 0..d {
            for c in 0..d {
                data[r * f + b * d + c] = block[r * d + c];
            }
        }
    }
    Code::from_columns(DenseMatrix::new(d, f, data)?, CodeKind::BasisUnion)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TightFrameOptions {
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for TightFrameOptions {
    fn default() -> Self {
        TightFrameOptions {
            tol: 1e-10,
            max_iters: 10_000,
        }
    }
}

/// `max_k |λ_k − 1|` over the eigenvalues of a symmetric matrix.
fn identity_gap(values: &[f64]) -> f64 {
    values.iter().fold(0.0f64, |g, &l| g.max((l - 1.0).abs()))
}

/// Spectral deviation of `(d/F)ΦΦᵀ` from the identity.
pub fn frame_bound_gap(code: &Code) -> Result<f64> {
    let scale = code.dim() as f64 / code.features() as f64;
    let (values, _) = kernels::symmetric_eigen(&kernels::frame_operator(code.columns()).scaled(scale))?;
    Ok(identity_gap(&values))
}

/// Unit-norm tight frame by alternating projection between the tight frames
/// with frame operator `(F/d)·I` and the unit-norm column set, starting from a
/// random code.
pub fn tight_frame_code(d: usize, f: usize, seed: u64, opts: TightFrameOptions) -> Result<Code> {
    check_dims("tight_frame_code", d, f)?;
    if f < d {
        return Err(Error::contract("tight_frame_code", "need F >= d"));
    }
    let ratio = f as f64 / d as f64;
    let mut frame = random_unit_code(d, f, seed)?.columns;
    let mut gap = f64::INFINITY;
    for _ in 0..=opts.max_iters {
        let op = kernels::frame_operator(&frame);
        let (values, vectors) = kernels::symmetric_eigen(&op)?;
        gap = identity_gap(&values.iter().map(|l| l / ratio).collect::<Vec<_>>());
        if gap <= opts.tol {
            return Code::from_columns(frame, CodeKind::TightFrame);
        }
        if values.iter().any(|&l| l <= 0.0) {
            return Err(Error::contract("tight_frame_code", "iterate lost full rank"));
        }
        // nearest tight frame: sqrt(F/d)·(ΦΦᵀ)^{-1/2}·Φ
        let inv_sqrt = DenseMatrix::from_fn(d, d, |i, j| {
            (0..d)
                .map(|k| vectors.get(i, k) * vectors.get(j, k) / libm::sqrt(values[k]))
                .sum::<f64>()
                * libm::sqrt(ratio)
        });
        frame = inv_sqrt.matmul(&frame)?;
        normalize_columns(&mut frame)?;
    }
    Err(Error::NoConvergence {
        iterations: opts.max_iters,
        gap,
    })
}

/// Geometric summary of a code.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CodeCertificate {
    pub d: usize,
    pub features: usize,
    /// `μ = max_{i≠j} |⟨φ_i, φ_j⟩|`
    pub coherence: f64,
    pub sum_sq_offdiag: f64,
    /// `√((F−d)/(d(F−1)))` for `F > d`, else 0
    pub welch_pair_floor: f64,
    pub is_tight_frame: bool,
    pub frame_bound_gap: f64,
}

/// Pairwise Welch floor `√((F−d)/(d(F−1)))`, zero when `F ≤ d`.
pub fn welch_pair_floor(d: usize, f: usize) -> f64 {
    if f <= d {
        return 0.0;
    }
    let (d, f) = (d as f64, f as f64);
    libm::sqrt((f - d) / (d * (f - 1.0)))
}

pub fn certify(code: &Code, plan: &TilePlan) -> Result<CodeCertificate> {
    let (coherence, sum_sq_offdiag) = if code.features() >= 2 {
        let s = kernels::offdiag_stats(code.columns(), plan)?;
        (s.max_abs_offdiag, s.sum_sq_offdiag)
    } else {
        (0.0, 0.0)
    };
    let gap = frame_bound_gap(code)?;
    Ok(CodeCertificate {
        d: code.dim(),
        features: code.features(),
        coherence,
        sum_sq_offdiag,
        welch_pair_floor: welch_pair_floor(code.dim(), code.features()),
        is_tight_frame: gap <= TIGHT_FRAME_TOL,
        frame_bound_gap: gap,
    })
}
