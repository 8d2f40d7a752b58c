//! Dense symmetric-matrix kernel.
//!
//! Everything here is generic over [`Scalar`] so the same code runs in `f32`
//! and `f64`. The analysis layers default to `f64`; `f32` is only useful with
//! correspondingly loose tolerances.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};
use thiserror::Error;

/// Real scalar used by all floating-point computations: `f32` or `f64`.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + NumAssign + Sum + Debug + Display + Send + Sync + 'static
{
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Converts an `f64` literal into `T`.
#[inline]
pub fn lit<T: Scalar>(x: f64) -> T {
    T::from_f64(x).expect("literal representable in scalar type")
}

#[inline]
pub fn from_usize<T: Scalar>(x: usize) -> T {
    T::from_usize(x).expect("integer representable in scalar type")
}

/// Default absolute tolerance for clustering and comparisons.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Largest dimension accepted by the explicit (dense) code paths unless overridden.
pub const DEFAULT_MAX_DENSE: usize = 5000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericsError {
    #[error("matrix is not square: {rows} rows, row {row} has {len} entries")]
    NotSquare { rows: usize, row: usize, len: usize },
    #[error("non-finite entry at ({0}, {1})")]
    NonFinite(usize, usize),
    #[error(
        "tolerance ambiguity: values {upper} and {lower} are neither within tol nor separated by more than 2*tol (tol = {tol})"
    )]
    ToleranceAmbiguity { upper: f64, lower: f64, tol: f64 },
    #[error("Jacobi iteration did not converge after {0} sweeps")]
    NoConvergence(usize),
    #[error("matrix is singular (pivot {pivot} at column {col})")]
    Singular { col: usize, pivot: f64 },
    #[error("dimension {n} exceeds the dense limit {limit}")]
    TooLarge { n: usize, limit: usize },
}

pub fn ensure_dense(n: usize, limit: usize) -> Result<(), NumericsError> {
    if n > limit {
        Err(NumericsError::TooLarge { n, limit })
    } else {
        Ok(())
    }
}

/// Dense symmetric matrix, stored in full row-major form.
///
/// Both triangles are kept and are always bitwise equal.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Scalar> SymMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![T::zero(); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = T::one();
        }
        m
    }

    /// The all-ones matrix `J`.
    pub fn ones(n: usize) -> Self {
        Self { n, data: vec![T::one(); n * n] }
    }

    /// Builds a matrix by evaluating `f(i, j)` on the upper triangle (`i <= j`)
    /// and mirroring.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Result<Self, NumericsError> {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                if !v.is_finite() {
                    return Err(NumericsError::NonFinite(i, j));
                }
                m.data[i * n + j] = v;
                m.data[j * n + i] = v;
            }
        }
        Ok(m)
    }

    /// Builds a matrix from rows, replacing each off-diagonal pair by its mean.
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self, NumericsError> {
        let n = rows.len();
        for (r, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(NumericsError::NotSquare { rows: n, row: r, len: row.len() });
            }
        }
        let half = lit::<T>(0.5);
        Self::from_fn(n, |i, j| if i == j { rows[i][i] } else { (rows[i][j] + rows[j][i]) * half })
    }

    /// Wraps a buffer that is already symmetric. Used for results whose
    /// symmetry is guaranteed by construction.
    fn from_raw(n: usize, data: Vec<T>) -> Self {
        debug_assert_eq!(data.len(), n * n);
        Self { n, data }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    /// Sets entry `(i, j)` and its mirror.
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = v;
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self::from_raw(self.n, self.data.iter().map(|&x| f(x)).collect())
    }

    pub fn scale(&self, s: T) -> Self {
        self.map(|x| x * s)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(T, T) -> T) -> Self {
        assert_eq!(self.n, other.n, "dimension mismatch");
        Self::from_raw(self.n, self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a - b)
    }

    /// `self + s * other`
    pub fn add_scaled(&self, s: T, other: &Self) -> Self {
        self.zip_with(other, |a, b| a + s * b)
    }

    /// `self + s * I`
    pub fn shift_diagonal(&self, s: T) -> Self {
        let mut m = self.clone();
        for i in 0..self.n {
            m.data[i * self.n + i] += s;
        }
        m
    }

    /// Entrywise product.
    pub fn hadamard(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a * b)
    }

    /// Matrix product of two commuting symmetric matrices (for example two
    /// elements of one Bose–Mesner algebra, or two polynomials in the same
    /// matrix). The product is symmetrized; use [`SymMatrix::commutator_norm`]
    /// when commutation is not known in advance.
    pub fn matmul(&self, other: &Self) -> Self {
        let n = self.n;
        assert_eq!(n, other.n, "dimension mismatch");
        let mut out = vec![T::zero(); n * n];
        for i in 0..n {
            let row_out = &mut out[i * n..(i + 1) * n];
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == T::zero() {
                    continue;
                }
                let row_b = &other.data[k * n..(k + 1) * n];
                for (o, &b) in row_out.iter_mut().zip(row_b) {
                    *o += a * b;
                }
            }
        }
        let half = lit::<T>(0.5);
        for i in 0..n {
            for j in (i + 1)..n {
                let v = (out[i * n + j] + out[j * n + i]) * half;
                out[i * n + j] = v;
                out[j * n + i] = v;
            }
        }
        Self::from_raw(n, out)
    }

    /// Max-abs entry of `AB - BA`.
    pub fn commutator_norm(&self, other: &Self) -> T {
        let n = self.n;
        let mut worst = T::zero();
        for i in 0..n {
            for j in 0..n {
                let mut ab = T::zero();
                let mut ba = T::zero();
                for k in 0..n {
                    ab += self.get(i, k) * other.get(k, j);
                    ba += other.get(i, k) * self.get(k, j);
                }
                worst = worst.max((ab - ba).abs());
            }
        }
        worst
    }

    pub fn trace(&self) -> T {
        (0..self.n).map(|i| self.data[i * self.n + i]).sum()
    }

    /// Frobenius inner product `Σ a_xy b_xy` (equals `tr(AB)` for symmetric matrices).
    pub fn frobenius_inner(&self, other: &Self) -> T {
        self.data.iter().zip(&other.data).map(|(&a, &b)| a * b).sum()
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.data.iter().zip(&other.data).fold(T::zero(), |m, (&a, &b)| m.max((a - b).abs()))
    }

    /// Eigenvalues in decreasing order.
    pub fn eigenvalues(&self) -> Result<Vec<T>, NumericsError> {
        let (mut vals, _) = jacobi(self, false)?;
        vals.sort_by(|a, b| b.partial_cmp(a).expect("finite eigenvalues"));
        Ok(vals)
    }

    /// Eigenvalues in decreasing order with matching unit eigenvectors.
    pub fn eigen(&self) -> Result<(Vec<T>, Vec<Vec<T>>), NumericsError> {
        let n = self.n;
        let (vals, vecs) = jacobi(self, true)?;
        let vecs = vecs.expect("requested eigenvectors");
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| vals[b].partial_cmp(&vals[a]).expect("finite eigenvalues"));
        let values = order.iter().map(|&k| vals[k]).collect();
        let vectors = order.iter().map(|&k| (0..n).map(|r| vecs[r * n + k]).collect()).collect();
        Ok((values, vectors))
    }
}

/// Cyclic Jacobi rotations on a working copy. Returns unsorted eigenvalues and,
/// optionally, the row-major matrix whose columns are the eigenvectors.
fn jacobi<T: Scalar>(m: &SymMatrix<T>, want_vectors: bool) -> Result<(Vec<T>, Option<Vec<T>>), NumericsError> {
    const MAX_SWEEPS: usize = 100;
    let n = m.n;
    let mut a = m.data.clone();
    let mut v = want_vectors.then(|| SymMatrix::<T>::identity(n).data);
    let rel = lit::<T>(1e-12).max(T::epsilon() * lit(16.0));

    for _ in 0..MAX_SWEEPS {
        let mut off = T::zero();
        let mut diag = T::zero();
        for i in 0..n {
            diag += a[i * n + i] * a[i * n + i];
            for j in (i + 1)..n {
                off += a[i * n + j] * a[i * n + j];
            }
        }
        let off = (off + off).sqrt();
        let diag = diag.sqrt();
        if off == T::zero() || off < rel * diag || off < T::min_positive_value() {
            let vals = (0..n).map(|i| a[i * n + i]).collect();
            return Ok((vals, v));
        }

        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == T::zero() {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (apq + apq);
                let t = if theta.abs() > lit(1e150) {
                    T::one() / (theta + theta)
                } else {
                    let t = T::one() / (theta.abs() + (theta * theta + T::one()).sqrt());
                    if theta < T::zero() {
                        -t
                    } else {
                        t
                    }
                };
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;

                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    let nkp = c * akp - s * akq;
                    let nkq = s * akp + c * akq;
                    a[k * n + p] = nkp;
                    a[p * n + k] = nkp;
                    a[k * n + q] = nkq;
                    a[q * n + k] = nkq;
                }
                a[p * n + p] = app - t * apq;
                a[q * n + q] = aqq + t * apq;
                a[p * n + q] = T::zero();
                a[q * n + p] = T::zero();

                if let Some(v) = v.as_mut() {
                    for k in 0..n {
                        let vkp = v[k * n + p];
                        let vkq = v[k * n + q];
                        v[k * n + p] = c * vkp - s * vkq;
                        v[k * n + q] = s * vkp + c * vkq;
                    }
                }
            }
        }
    }
    Err(NumericsError::NoConvergence(MAX_SWEEPS))
}

/// Distinct values (clustered) in strictly decreasing order with multiplicities.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenClusters<T> {
    pub values: Vec<T>,
    pub multiplicities: Vec<usize>,
    pub tolerance: T,
}

impl<T: Scalar> EigenClusters<T> {
    /// Number of distinct values.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn total(&self) -> usize {
        self.multiplicities.iter().sum()
    }

    /// Index of the cluster whose representative is within `tol` of `x`.
    pub fn find(&self, x: T, tol: T) -> Option<usize> {
        self.values.iter().position(|&v| (v - x).abs() <= tol)
    }
}

/// Rounds `x` to the nearest integer when it is within `tol` of it.
pub fn snap<T: Scalar>(x: T, tol: T) -> T {
    let r = x.round();
    if (x - r).abs() <= tol {
        r
    } else {
        x
    }
}

/// Groups real values into clusters of spread at most `tol` separated by gaps
/// larger than `2 * tol`. Representatives are member means, snapped to an
/// integer when within `tol` of one.
pub fn cluster_values<T: Scalar>(values: &[T], tol: T) -> Result<EigenClusters<T>, NumericsError> {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).expect("finite values"));

    let mut reps = Vec::new();
    let mut mults = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let first = sorted[i];
        let mut sum = first;
        let mut j = i + 1;
        while j < sorted.len() {
            let gap = sorted[j - 1] - sorted[j];
            if gap > tol + tol {
                break;
            }
            if gap > tol || first - sorted[j] > tol {
                return Err(NumericsError::ToleranceAmbiguity {
                    upper: sorted[j - 1].to_f64().unwrap_or(f64::NAN),
                    lower: sorted[j].to_f64().unwrap_or(f64::NAN),
                    tol: tol.to_f64().unwrap_or(f64::NAN),
                });
            }
            sum += sorted[j];
            j += 1;
        }
        let count = j - i;
        reps.push(snap(sum / from_usize(count), tol));
        mults.push(count);
        i = j;
    }
    Ok(EigenClusters { values: reps, multiplicities: mults, tolerance: tol })
}

/// Distinct eigenvalues of `m` with multiplicities.
pub fn eigen_clusters<T: Scalar>(m: &SymMatrix<T>, tol: T) -> Result<EigenClusters<T>, NumericsError> {
    cluster_values(&m.eigenvalues()?, tol)
}

/// Number of eigenvalues with absolute value above `tol`.
pub fn rank_tol<T: Scalar>(m: &SymMatrix<T>, tol: T) -> Result<usize, NumericsError> {
    Ok(m.eigenvalues()?.into_iter().filter(|x| x.abs() > tol).count())
}

/// Entrywise `t`-th power; `t = 0` gives the all-ones matrix.
pub fn hadamard_power<T: Scalar>(m: &SymMatrix<T>, t: u32) -> SymMatrix<T> {
    m.map(|x| x.powi(t as i32))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PolyMode {
    /// Powers under the matrix product, `M^0 = I`.
    Ordinary,
    /// Powers under the entrywise product, `M^{∘0} = J`.
    Hadamard,
}

/// Evaluates `Σ coeffs[t] · M^t` (Horner's scheme) in the given mode.
/// Coefficients are in increasing degree order.
pub fn eval_matrix_poly<T: Scalar>(coeffs: &[T], m: &SymMatrix<T>, mode: PolyMode) -> SymMatrix<T> {
    assert!(!coeffs.is_empty(), "polynomial needs at least one coefficient");
    let n = m.n();
    let unit = match mode {
        PolyMode::Ordinary => SymMatrix::identity(n),
        PolyMode::Hadamard => SymMatrix::ones(n),
    };
    let lead = *coeffs.last().expect("nonempty");
    let mut acc = unit.scale(lead);
    for &c in coeffs.iter().rev().skip(1) {
        acc = match mode {
            PolyMode::Ordinary => acc.matmul(m),
            PolyMode::Hadamard => acc.hadamard(m),
        };
        acc = acc.add_scaled(c, &unit);
    }
    acc
}

/// Coefficients (increasing degree) of `scale · Π (x - r)`.
pub fn poly_from_roots<T: Scalar>(roots: &[T], scale: T) -> Vec<T> {
    let mut coeffs = vec![scale];
    for &r in roots {
        let mut next = vec![T::zero(); coeffs.len() + 1];
        for (k, &c) in coeffs.iter().enumerate() {
            next[k + 1] += c;
            next[k] -= r * c;
        }
        coeffs = next;
    }
    coeffs
}

/// Small dense square matrix (not necessarily symmetric), row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct SquareMatrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Scalar> SquareMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![T::zero(); n * n] }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> Vec<Vec<T>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn matmul(&self, other: &Self) -> Self {
        let n = self.n;
        Self::from_fn(n, |i, j| (0..n).map(|k| self.get(i, k) * other.get(k, j)).sum())
    }

    pub fn scale(&self, s: T) -> Self {
        Self { n: self.n, data: self.data.iter().map(|&x| x * s).collect() }
    }

    /// Reorders rows and columns: entry `(a, b)` of the result is
    /// `self[rows[a]][cols[b]]`.
    pub fn permuted(&self, rows: &[usize], cols: &[usize]) -> Self {
        Self::from_fn(self.n, |a, b| self.get(rows[a], cols[b]))
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.data.iter().zip(&other.data).fold(T::zero(), |m, (&a, &b)| m.max((a - b).abs()))
    }

    /// Gauss–Jordan inverse with partial pivoting.
    pub fn inverse(&self) -> Result<Self, NumericsError> {
        let n = self.n;
        let mut a = self.clone();
        let mut inv = Self::from_fn(n, |i, j| if i == j { T::one() } else { T::zero() });
        let scale = self.data.iter().fold(T::zero(), |m, &x| m.max(x.abs())).max(T::one());
        for col in 0..n {
            let pivot_row = (col..n)
                .max_by(|&x, &y| a.get(x, col).abs().partial_cmp(&a.get(y, col).abs()).expect("finite"))
                .expect("nonempty range");
            let pivot = a.get(pivot_row, col);
            if pivot.abs() <= T::epsilon() * scale * from_usize(n) {
                return Err(NumericsError::Singular { col, pivot: pivot.to_f64().unwrap_or(0.0) });
            }
            if pivot_row != col {
                for j in 0..n {
                    a.data.swap(col * n + j, pivot_row * n + j);
                    inv.data.swap(col * n + j, pivot_row * n + j);
                }
            }
            let p = a.get(col, col);
            for j in 0..n {
                a.data[col * n + j] /= p;
                inv.data[col * n + j] /= p;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a.get(r, col);
                if f == T::zero() {
                    continue;
                }
                for j in 0..n {
                    let av = a.get(col, j);
                    let iv = inv.get(col, j);
                    a.data[r * n + j] -= f * av;
                    inv.data[r * n + j] -= f * iv;
                }
            }
        }
        Ok(inv)
    }
}
