//! Blocked dense primitives.
//!
//! Products `M = L·R` with `F × F` shape are streamed in square tiles of
//! `tile_cols` columns so that the full matrix is never stored. Each row tile
//! reduces to a partial `(max, compensated sum)`; partials are combined in
//! ascending tile order, so results do not depend on whether tiles ran in
//! parallel.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use crate::error::{Error, Result};
use crate::stats::CompensatedSum;

/// Row-major dense matrix of finite `f64` entries.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::contract(
                "DenseMatrix::new",
                alloc::format!("{} entries for a {rows}x{cols} matrix", data.len()),
            ));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                op: "DenseMatrix::new",
            });
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    /// Builds a matrix from column-major entries.
    pub fn from_column_major(rows: usize, cols: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::contract(
                "DenseMatrix::from_column_major",
                alloc::format!("{} entries for a {rows}x{cols} matrix", entries.len()),
            ));
        }
        Self::new(rows, cols, (0..rows * cols).map(|k| entries[(k % cols) * rows + k / cols]).collect())
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        DenseMatrix { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    /// Entries in column-major order.
    pub fn to_column_major(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.data.len());
        for c in 0..self.cols {
            out.extend((0..self.rows).map(|r| self.get(r, c)));
        }
        out
    }

    pub fn transpose(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.cols, self.rows, |r, c| self.get(c, r))
    }

    pub(crate) fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn scaled(&self, factor: f64) -> DenseMatrix {
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * factor).collect(),
        }
    }

    /// Full product `self · other`.
    pub fn matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        gemm_tile(self, other, 0..self.rows, 0..other.cols)
    }

    /// `self · v` for a vector `v` of length `cols`.
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.cols);
        (0..self.rows).map(|r| dot(self.row(r), v)).collect()
    }

    pub fn max_abs_diff(&self, other: &DenseMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0f64, |m, (a, b)| m.max(libm::fabs(a - b)))
    }
}

/// Tiling parameters for streamed products.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TilePlan {
    pub tile_cols: usize,
    pub parallel_tiles: bool,
}

impl Default for TilePlan {
    fn default() -> Self {
        TilePlan {
            tile_cols: 256,
            parallel_tiles: false,
        }
    }
}

impl TilePlan {
    pub fn new(tile_cols: usize, parallel_tiles: bool) -> Result<Self> {
        if tile_cols == 0 {
            return Err(Error::contract("TilePlan::new", "tile_cols must be >= 1"));
        }
        Ok(TilePlan {
            tile_cols,
            parallel_tiles,
        })
    }

    /// Tile width actually used for `n` columns (clamped to `1..=n`).
    pub fn effective_tile(&self, n: usize) -> usize {
        self.tile_cols.clamp(1, n.max(1))
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [0.0f64; 4];
    let chunks = n / 4;
    for i in 0..chunks {
        let k = 4 * i;
        acc[0] += a[k] * b[k];
        acc[1] += a[k + 1] * b[k + 1];
        acc[2] += a[k + 2] * b[k + 2];
        acc[3] += a[k + 3] * b[k + 3];
    }
    let mut tail = 0.0;
    for k in 4 * chunks..n {
        tail += a[k] * b[k];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Strided read-only view, used to express transposes without copying.
#[derive(Clone, Copy)]
struct View<'a> {
    data: &'a [f64],
    offset: usize,
    rows: usize,
    cols: usize,
    rs: usize,
    cs: usize,
}

impl<'a> View<'a> {
    fn of(m: &'a DenseMatrix) -> Self {
        View {
            data: &m.data,
            offset: 0,
            rows: m.rows,
            cols: m.cols,
            rs: m.cols,
            cs: 1,
        }
    }

    fn transposed(m: &'a DenseMatrix) -> Self {
        View {
            data: &m.data,
            offset: 0,
            rows: m.cols,
            cols: m.rows,
            rs: 1,
            cs: m.cols,
        }
    }

    fn block(&self, rows: Range<usize>, cols: Range<usize>) -> Self {
        debug_assert!(rows.end <= self.rows && cols.end <= self.cols);
        View {
            data: self.data,
            offset: self.offset + rows.start * self.rs + cols.start * self.cs,
            rows: rows.end - rows.start,
            cols: cols.end - cols.start,
            rs: self.rs,
            cs: self.cs,
        }
    }

    fn in_bounds(&self) -> bool {
        if self.rows == 0 || self.cols == 0 {
            return true;
        }
        self.offset + (self.rows - 1) * self.rs + (self.cols - 1) * self.cs < self.data.len()
    }
}

/// `out = a · b` for views, `out` row-major `a.rows × b.cols`.
fn gemm_into(a: View<'_>, b: View<'_>, out: &mut [f64]) {
    assert_eq!(a.cols, b.rows);
    assert!(a.in_bounds() && b.in_bounds());
    let (m, k, n) = (a.rows, a.cols, b.cols);
    assert!(out.len() >= m * n);
    if m == 0 || n == 0 {
        return;
    }
    if k == 0 {
        out[..m * n].iter_mut().for_each(|v| *v = 0.0);
        return;
    }
    // SAFETY: both views were bounds-checked above, `out` holds at least
    // m·n entries written with row stride n, and beta = 0 so `out` is never
    // read before being written.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.data.as_ptr().add(a.offset),
            a.rs as isize,
            a.cs as isize,
            b.data.as_ptr().add(b.offset),
            b.rs as isize,
            b.cs as isize,
            0.0,
            out.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}

/// Exact sub-block `(a·b)[rows, cols]`.
pub fn gemm_tile(
    a: &DenseMatrix,
    b: &DenseMatrix,
    rows: Range<usize>,
    cols: Range<usize>,
) -> Result<DenseMatrix> {
    if a.cols != b.rows {
        return Err(Error::DimensionMismatch {
            op: "gemm_tile",
            expected: (a.rows, a.cols),
            found: (b.rows, b.cols),
        });
    }
    if rows.start > rows.end || rows.end > a.rows || cols.start > cols.end || cols.end > b.cols {
        return Err(Error::contract(
            "gemm_tile",
            alloc::format!(
                "ranges {rows:?} x {cols:?} exceed product shape {}x{}",
                a.rows, b.cols
            ),
        ));
    }
    let (m, n) = (rows.end - rows.start, cols.end - cols.start);
    let mut out = vec![0.0; m * n];
    gemm_into(
        View::of(a).block(rows, 0..a.cols),
        View::of(b).block(0..b.rows, cols),
        &mut out,
    );
    DenseMatrix::new(m, n, out)
}

/// Statistics of a streamed square product `M`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OffdiagStats {
    /// `max_{i≠j} |M_ij|`
    pub max_abs_offdiag: f64,
    /// `Σ_{i≠j} M_ij²`
    pub sum_sq_offdiag: f64,
    /// `max_i |M_ii − 1|`
    pub max_diag_deviation: f64,
}

#[derive(Clone, Copy, Default)]
struct Partial {
    max_off: f64,
    max_diag_dev: f64,
    sum: CompensatedSum,
}

impl Partial {
    fn merge(&mut self, other: &Partial) {
        self.max_off = self.max_off.max(other.max_off);
        self.max_diag_dev = self.max_diag_dev.max(other.max_diag_dev);
        self.sum.merge(&other.sum);
    }
}

/// Reduces one row tile of `left · right`. With `symmetric`, only tiles on or
/// above the diagonal are formed and strictly-upper tiles count twice.
fn row_tile_partial(
    left: View<'_>,
    right: View<'_>,
    rows: Range<usize>,
    tile: usize,
    symmetric: bool,
) -> Partial {
    let n = right.cols;
    let mut partial = Partial::default();
    let mut scratch = vec![0.0; (rows.end - rows.start) * tile];
    let start = if symmetric { rows.start } else { 0 };
    let mut j0 = start;
    while j0 < n {
        let j1 = (j0 + tile).min(n);
        let width = j1 - j0;
        let block = &mut scratch[..(rows.end - rows.start) * width];
        gemm_into(
            left.block(rows.clone(), 0..left.cols),
            right.block(0..right.rows, j0..j1),
            block,
        );
        let weight = if symmetric && j0 != rows.start { 2.0 } else { 1.0 };
        for (r, row) in block.chunks_exact(width).enumerate() {
            let gi = rows.start + r;
            for (c, &v) in row.iter().enumerate() {
                let gj = j0 + c;
                if gi == gj {
                    partial.max_diag_dev = partial.max_diag_dev.max(libm::fabs(v - 1.0));
                } else {
                    partial.max_off = partial.max_off.max(libm::fabs(v));
                    partial.sum.add(weight * v * v);
                }
            }
        }
        j0 = j1;
    }
    partial
}

fn stream_square_product(
    left: View<'_>,
    right: View<'_>,
    plan: &TilePlan,
    symmetric: bool,
) -> OffdiagStats {
    let n = left.rows;
    let tile = plan.effective_tile(n);
    let tiles: Vec<Range<usize>> = (0..n)
        .step_by(tile)
        .map(|i0| i0..(i0 + tile).min(n))
        .collect();

    let partials: Vec<Partial> = map_tiles(&tiles, plan.parallel_tiles, |rows| {
        row_tile_partial(left, right, rows.clone(), tile, symmetric)
    });

    let mut total = Partial::default();
    for p in &partials {
        total.merge(p);
    }
    OffdiagStats {
        max_abs_offdiag: total.max_off,
        sum_sq_offdiag: total.sum.value(),
        max_diag_deviation: total.max_diag_dev,
    }
}

#[cfg(feature = "parallel")]
fn map_tiles<T: Send>(
    tiles: &[Range<usize>],
    parallel: bool,
    f: impl Fn(&Range<usize>) -> T + Sync + Send,
) -> Vec<T> {
    use rayon::prelude::*;
    if parallel {
        tiles.par_iter().map(f).collect()
    } else {
        tiles.iter().map(f).collect()
    }
}

#[cfg(not(feature = "parallel"))]
fn map_tiles<T>(tiles: &[Range<usize>], _parallel: bool, f: impl Fn(&Range<usize>) -> T) -> Vec<T> {
    tiles.iter().map(f).collect()
}

/// Off-diagonal statistics of the Gram matrix `XᵀX` of the columns of `x`
/// (`d × F`), streamed in column tiles.
pub fn offdiag_stats(x: &DenseMatrix, plan: &TilePlan) -> Result<OffdiagStats> {
    if x.cols < 2 {
        return Err(Error::contract("offdiag_stats", "need at least two columns"));
    }
    Ok(stream_square_product(View::transposed(x), View::of(x), plan, true))
}

/// Statistics of `M = left · right` where `left` is `F × d` and `right` is
/// `d × F`.
pub fn product_stats(left: &DenseMatrix, right: &DenseMatrix, plan: &TilePlan) -> Result<OffdiagStats> {
    if left.cols != right.rows || left.rows != right.cols {
        return Err(Error::DimensionMismatch {
            op: "product_stats",
            expected: (right.cols, right.rows),
            found: (left.rows, left.cols),
        });
    }
    if left.rows < 2 {
        return Err(Error::contract("product_stats", "need F >= 2"));
    }
    Ok(stream_square_product(View::of(left), View::of(right), plan, false))
}

/// `X·Xᵀ` for `X` of shape `d × F` (the frame operator of the columns).
pub fn frame_operator(x: &DenseMatrix) -> DenseMatrix {
    let d = x.rows;
    let mut out = vec![0.0; d * d];
    gemm_into(View::of(x), View::transposed(x), &mut out);
    // symmetrize exactly
    for i in 0..d {
        for j in 0..i {
            let v = 0.5 * (out[i * d + j] + out[j * d + i]);
            out[i * d + j] = v;
            out[j * d + i] = v;
        }
    }
    DenseMatrix {
        rows: d,
        cols: d,
        data: out,
    }
}

/// Cholesky factor `L` (lower, row-major) of a symmetric positive definite
/// matrix. Fails when the smallest pivot is below `1e-12 ×` the largest.
pub fn cholesky(a: &DenseMatrix) -> Result<DenseMatrix> {
    let n = a.rows;
    if a.cols != n {
        return Err(Error::DimensionMismatch {
            op: "cholesky",
            expected: (n, n),
            found: (a.rows, a.cols),
        });
    }
    let mut l = DenseMatrix::zeros(n, n);
    let mut smallest = f64::INFINITY;
    let mut largest = 0.0f64;
    for j in 0..n {
        let mut pivot = a.get(j, j);
        for k in 0..j {
            pivot -= l.get(j, k) * l.get(j, k);
        }
        smallest = smallest.min(pivot);
        largest = largest.max(pivot);
        if pivot <= 0.0 {
            return Err(Error::Singular { smallest, largest });
        }
        let ljj = libm::sqrt(pivot);
        l.data[j * n + j] = ljj;
        for i in j + 1..n {
            let mut v = a.get(i, j);
            for k in 0..j {
                v -= l.get(i, k) * l.get(j, k);
            }
            l.data[i * n + j] = v / ljj;
        }
    }
    if n > 0 && smallest < 1e-12 * largest {
        return Err(Error::Singular { smallest, largest });
    }
    Ok(l)
}

/// Inverse of a symmetric positive definite matrix via its Cholesky factor.
pub fn spd_inverse(a: &DenseMatrix) -> Result<DenseMatrix> {
    let n = a.rows;
    let l = cholesky(a)?;
    let mut inv = DenseMatrix::zeros(n, n);
    let mut col = vec![0.0; n];
    for e in 0..n {
        // forward: L y = e
        for i in 0..n {
            let mut v = if i == e { 1.0 } else { 0.0 };
            for k in 0..i {
                v -= l.get(i, k) * col[k];
            }
            col[i] = v / l.get(i, i);
        }
        // backward: Lᵀ x = y
        for i in (0..n).rev() {
            let mut v = col[i];
            for k in i + 1..n {
                v -= l.get(k, i) * col[k];
            }
            col[i] = v / l.get(i, i);
        }
        for i in 0..n {
            inv.data[i * n + e] = col[i];
        }
    }
    Ok(inv)
}

/// Minimum-norm readout `G = Ψᵀ(ΨΨᵀ)⁻¹` (`F × d`), so that `GΨ` is the
/// orthogonal projection onto the row space of `Ψ`.
pub fn least_squares_rows(psi: &DenseMatrix) -> Result<DenseMatrix> {
    let inv = spd_inverse(&frame_operator(psi))?;
    let mut g = vec![0.0; psi.cols * psi.rows];
    gemm_into(View::transposed(psi), View::of(&inv), &mut g);
    DenseMatrix::new(psi.cols, psi.rows, g)
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Returns eigenvalues (unsorted) and the orthogonal matrix whose columns are
/// the matching eigenvectors.
pub fn symmetric_eigen(a: &DenseMatrix) -> Result<(Vec<f64>, DenseMatrix)> {
    let n = a.rows;
    if a.cols != n {
        return Err(Error::DimensionMismatch {
            op: "symmetric_eigen",
            expected: (n, n),
            found: (a.rows, a.cols),
        });
    }
    let mut m = a.data.clone();
    let mut v = DenseMatrix::identity(n).data;
    let scale = m.iter().fold(0.0f64, |s, x| s.max(libm::fabs(*x))).max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                off += m[i * n + j] * m[i * n + j];
            }
        }
        if libm::sqrt(off) <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if libm::fabs(apq) <= 1e-300 {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = libm::copysign(1.0, theta) / (libm::fabs(theta) + libm::sqrt(theta * theta + 1.0));
                let c = 1.0 / libm::sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k * n + p];
                    let mkq = m[k * n + q];
                    m[k * n + p] = c * mkp - s * mkq;
                    m[k * n + q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p * n + k];
                    let mqk = m[q * n + k];
                    m[p * n + k] = c * mpk - s * mqk;
                    m[q * n + k] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let values: Vec<f64> = (0..n).map(|i| m[i * n + i]).collect();
    if values.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite {
            op: "symmetric_eigen",
        });
    }
    Ok((values, DenseMatrix { rows: n, cols: n, data: v }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{rng_from_seed, standard_normal};

    fn random_matrix(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
        let mut rng = rng_from_seed(seed);
        DenseMatrix::from_fn(rows, cols, |_, _| standard_normal(&mut rng))
    }

    fn naive_product(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
        DenseMatrix::from_fn(a.rows(), b.cols(), |i, j| {
            (0..a.cols()).map(|k| a.get(i, k) * b.get(k, j)).sum()
        })
    }

    #[test]
    fn gemm_identity() {
        let i3 = DenseMatrix::identity(3);
        assert_eq!(gemm_tile(&i3, &i3, 0..3, 0..3).unwrap(), i3);
    }

    #[test]
    fn gemm_two_by_two() {
        let a = DenseMatrix::new(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let b = DenseMatrix::new(2, 2, vec![5.0, 6.0, 7.0, 8.0]).unwrap();
        let c = gemm_tile(&a, &b, 0..2, 0..2).unwrap();
        assert_eq!(c.as_slice(), &[19.0, 22.0, 43.0, 50.0]);
    }

    #[test]
    fn gemm_tiles_match_untiled_product() {
        let a = random_matrix(8, 8, 1);
        let b = random_matrix(8, 8, 2);
        let full = naive_product(&a, &b);
        for (r, c) in [(0..8, 0..8), (2..5, 1..7), (7..8, 0..1), (3..3, 0..8)] {
            let tile = gemm_tile(&a, &b, r.clone(), c.clone()).unwrap();
            for (ti, i) in r.clone().enumerate() {
                for (tj, j) in c.clone().enumerate() {
                    assert!((tile.get(ti, tj) - full.get(i, j)).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn gemm_rejects_mismatch() {
        let a = DenseMatrix::zeros(2, 3);
        let b = DenseMatrix::zeros(2, 3);
        assert!(matches!(
            gemm_tile(&a, &b, 0..2, 0..3),
            Err(Error::DimensionMismatch { .. })
        ));
        let b = DenseMatrix::zeros(3, 3);
        assert!(gemm_tile(&a, &b, 0..3, 0..3).is_err());
    }

    #[test]
    fn non_finite_entries_rejected() {
        assert!(DenseMatrix::new(1, 2, vec![1.0, f64::NAN]).is_err());
        assert!(DenseMatrix::new(1, 2, vec![1.0]).is_err());
    }

    #[test]
    fn offdiag_orthonormal_is_zero() {
        let s = offdiag_stats(&DenseMatrix::identity(6), &TilePlan::default()).unwrap();
        assert_eq!(s.max_abs_offdiag, 0.0);
        assert_eq!(s.sum_sq_offdiag, 0.0);
        assert_eq!(s.max_diag_deviation, 0.0);
    }

    #[test]
    fn offdiag_identity_union_hadamard() {
        let h = [
            [1.0, 1.0, 1.0, 1.0],
            [1.0, -1.0, 1.0, -1.0],
            [1.0, 1.0, -1.0, -1.0],
            [1.0, -1.0, -1.0, 1.0],
        ];
        let x = DenseMatrix::from_fn(4, 8, |r, c| {
            if c < 4 {
                if r == c { 1.0 } else { 0.0 }
            } else {
                0.5 * h[r][c - 4]
            }
        });
        let s = offdiag_stats(&x, &TilePlan::new(3, false).unwrap()).unwrap();
        assert!((s.max_abs_offdiag - 0.5).abs() < 1e-15);
        // 2·16 cross pairs of magnitude 1/2, tight frame total F(F−d)/d = 8
        assert!((s.sum_sq_offdiag - 8.0).abs() < 1e-12);
    }

    #[test]
    fn offdiag_matches_explicit_gram() {
        let x = random_matrix(8, 32, 11);
        let gram = naive_product(&x.transpose(), &x);
        let mut max = 0.0f64;
        let mut sum = 0.0;
        for i in 0..32 {
            for j in 0..32 {
                if i != j {
                    max = max.max(gram.get(i, j).abs());
                    sum += gram.get(i, j).powi(2);
                }
            }
        }
        for tile in [1, 5, 7, 32, 256] {
            let s = offdiag_stats(&x, &TilePlan::new(tile, false).unwrap()).unwrap();
            assert!((s.max_abs_offdiag - max).abs() < 1e-12, "tile {tile}");
            assert!((s.sum_sq_offdiag - sum).abs() < 1e-12 * sum.max(1.0), "tile {tile}");
        }
    }

    #[test]
    fn offdiag_needs_two_columns() {
        assert!(offdiag_stats(&DenseMatrix::identity(1), &TilePlan::default()).is_err());
    }

    #[test]
    fn product_stats_matches_explicit_product() {
        let g = random_matrix(20, 5, 4);
        let psi = random_matrix(5, 20, 5);
        let m = naive_product(&g, &psi);
        let s = product_stats(&g, &psi, &TilePlan::new(6, false).unwrap()).unwrap();
        let mut max = 0.0f64;
        let mut dev = 0.0f64;
        let mut sum = 0.0;
        for i in 0..20 {
            for j in 0..20 {
                if i == j {
                    dev = dev.max((m.get(i, i) - 1.0).abs());
                } else {
                    max = max.max(m.get(i, j).abs());
                    sum += m.get(i, j).powi(2);
                }
            }
        }
        assert!((s.max_abs_offdiag - max).abs() < 1e-12);
        assert!((s.max_diag_deviation - dev).abs() < 1e-12);
        assert!((s.sum_sq_offdiag - sum).abs() < 1e-12 * sum);
    }

    #[test]
    fn least_squares_of_identity() {
        let g = least_squares_rows(&DenseMatrix::identity(4)).unwrap();
        assert!(g.max_abs_diff(&DenseMatrix::identity(4)) < 1e-15);
    }

    #[test]
    fn least_squares_of_scaled_tight_frame() {
        // two stacked identities: ΨΨᵀ = 2I, so G = Ψᵀ/2
        let psi = DenseMatrix::from_fn(3, 6, |r, c| if c % 3 == r { 1.0 } else { 0.0 });
        let g = least_squares_rows(&psi).unwrap();
        assert!(g.max_abs_diff(&psi.transpose().scaled(0.5)) < 1e-15);
    }

    #[test]
    fn least_squares_projection_property() {
        let psi = random_matrix(3, 7, 9);
        let g = least_squares_rows(&psi).unwrap();
        let back = naive_product(&naive_product(&psi, &g), &psi);
        assert!(back.max_abs_diff(&psi) < 1e-10);
    }

    #[test]
    fn least_squares_detects_singular_frame() {
        let psi = DenseMatrix::from_fn(2, 4, |r, _| if r == 0 { 1.0 } else { 0.0 });
        assert!(matches!(least_squares_rows(&psi), Err(Error::Singular { .. })));
        let psi = DenseMatrix::from_fn(2, 4, |r, c| if r == 0 { 1.0 } else { 1e-9 * c as f64 });
        assert!(matches!(least_squares_rows(&psi), Err(Error::Singular { .. })));
    }

    #[test]
    fn jacobi_reconstructs_matrix() {
        let x = random_matrix(5, 9, 21);
        let s = frame_operator(&x);
        let (vals, vecs) = symmetric_eigen(&s).unwrap();
        let rebuilt = DenseMatrix::from_fn(5, 5, |i, j| {
            (0..5).map(|k| vecs.get(i, k) * vals[k] * vecs.get(j, k)).sum()
        });
        assert!(rebuilt.max_abs_diff(&s) < 1e-11);
    }
}
