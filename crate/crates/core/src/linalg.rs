//! Dense row-major matrices, the spectral norm, and the cached x-update solve.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{check_finite, check_len, Error, Result};
use crate::rng::SplitMix64;

const POWER_ITER_RTOL: f64 = 1e-10;
const POWER_ITER_MAX: usize = 10_000;

/// Row-major dense matrix of `f64`. All entries are finite.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        let expected = rows
            .checked_mul(cols)
            .ok_or_else(|| Error::InvalidInput(alloc::format!("matrix shape {rows}x{cols} overflows")))?;
        check_len("matrix data", expected, data.len())?;
        check_finite("matrix data", &data)?;
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    /// Builds a matrix from nested rows; every row must have the same length.
    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            check_len("matrix row", cols, row.len())?;
            data.extend_from_slice(row);
        }
        Self::new(rows.len(), cols, data)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self::new(rows, cols, data)
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
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|v| v * c).collect() }
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.get(i, j);
            }
        }
        out
    }

    /// `A x`.
    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len("A x operand", self.cols, x.len())?;
        Ok(self.mul_vec_unchecked(x))
    }

    pub(crate) fn mul_vec_unchecked(&self, x: &[f64]) -> Vec<f64> {
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// `Aᵀ y`.
    pub fn tr_mul_vec(&self, y: &[f64]) -> Result<Vec<f64>> {
        check_len("Aᵀ y operand", self.rows, y.len())?;
        Ok(self.tr_mul_vec_unchecked(y))
    }

    pub(crate) fn tr_mul_vec_unchecked(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for (i, &yi) in y.iter().enumerate() {
            if yi != 0.0 {
                axpy(yi, self.row(i), &mut out);
            }
        }
        out
    }

    /// `A Aᵀ` (rows × rows).
    pub fn gram_rows(&self) -> Self {
        let m = self.rows;
        let mut g = Self::zeros(m, m);
        for i in 0..m {
            for j in 0..=i {
                let v = dot(self.row(i), self.row(j));
                g.data[i * m + j] = v;
                g.data[j * m + i] = v;
            }
        }
        g
    }

    /// `Aᵀ A` (cols × cols).
    pub fn gram_cols(&self) -> Self {
        self.transpose().gram_rows()
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm2(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

/// `‖a − b‖₂`.
#[inline]
pub fn dist2(a: &[f64], b: &[f64]) -> f64 {
    libm::sqrt(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum())
}

/// `y += alpha x`.
#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| f64::max(m, v.abs()))
}

/// Largest squared singular value `σ_max(A)²`.
///
/// Power iteration on whichever of `AᵀA`, `AAᵀ` is smaller. Two deterministic
/// starts are used, the all-ones vector and a fixed pseudo-random one, and the
/// larger Rayleigh quotient wins; a single all-ones start misses the top
/// eigenvalue whenever its eigenvector is orthogonal to `1`.
pub fn spectral_norm_sq(a: &DenseMatrix) -> Result<f64> {
    check_finite("matrix data", &a.data)?;
    if a.rows == 0 || a.cols == 0 {
        return Err(Error::InvalidInput("spectral norm of an empty matrix".into()));
    }
    let gram = if a.rows <= a.cols { a.gram_rows() } else { a.gram_cols() };
    let n = gram.rows;
    let ones = vec![1.0; n];
    let mut rng = SplitMix64::new(0x5EED_0F5E_C712_A1B3);
    let scrambled: Vec<f64> = (0..n).map(|_| rng.next_f64() - 0.5).collect();
    Ok(f64::max(power_iteration(&gram, ones), power_iteration(&gram, scrambled)))
}

fn power_iteration(g: &DenseMatrix, mut v: Vec<f64>) -> f64 {
    let nv = norm2(&v);
    if nv == 0.0 {
        return 0.0;
    }
    v.iter_mut().for_each(|x| *x /= nv);
    let mut rq_prev = f64::NAN;
    let mut rq = 0.0;
    for _ in 0..POWER_ITER_MAX {
        let gv = g.mul_vec_unchecked(&v);
        rq = dot(&v, &gv);
        let ngv = norm2(&gv);
        if ngv == 0.0 {
            return 0.0;
        }
        for (vi, gi) in v.iter_mut().zip(&gv) {
            *vi = gi / ngv;
        }
        if (rq - rq_prev).abs() <= POWER_ITER_RTOL * rq.abs() {
            break;
        }
        rq_prev = rq;
    }
    // Rayleigh quotient of the final (most converged) vector.
    let gv = g.mul_vec_unchecked(&v);
    f64::max(rq, dot(&v, &gv))
}

/// Lower-triangular Cholesky factor `L` with `K = L Lᵀ`, row-major.
#[derive(Debug, Clone)]
pub struct Cholesky {
    n: usize,
    l: Vec<f64>,
}

impl Cholesky {
    /// Factors a symmetric positive-definite matrix. `rho` is only carried
    /// into the error for diagnostics.
    pub fn factor(k: &DenseMatrix, rho: f64) -> Result<Self> {
        let n = k.rows;
        check_len("square matrix", n, k.cols)?;
        let mut l = vec![0.0; n * n];
        for j in 0..n {
            let mut d = k.get(j, j);
            for p in 0..j {
                d -= l[j * n + p] * l[j * n + p];
            }
            if !(d > 0.0) || !d.is_finite() {
                let diag: Vec<f64> = (0..n).map(|i| k.get(i, i)).collect();
                let hi = diag.iter().cloned().fold(f64::MIN, f64::max);
                let lo = diag.iter().cloned().fold(f64::MAX, f64::min);
                return Err(Error::Factorization { rho, pivot_index: j, pivot: d, diagonal_ratio: hi / lo });
            }
            let djj = libm::sqrt(d);
            l[j * n + j] = djj;
            for i in j + 1..n {
                let mut s = k.get(i, j);
                for p in 0..j {
                    s -= l[i * n + p] * l[j * n + p];
                }
                l[i * n + j] = s / djj;
            }
        }
        Ok(Self { n, l })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solves `K x = rhs` in place.
    pub fn solve_in_place(&self, x: &mut [f64]) {
        let n = self.n;
        for i in 0..n {
            let mut s = x[i];
            for p in 0..i {
                s -= self.l[i * n + p] * x[p];
            }
            x[i] = s / self.l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for p in i + 1..n {
                s -= self.l[p * n + i] * x[p];
            }
            x[i] = s / self.l[i * n + i];
        }
    }
}

#[derive(Debug, Clone)]
enum Factored {
    /// Factor of `ρI + 2AAᵀ` (M × M), applied through the Woodbury identity.
    Woodbury(Cholesky),
    /// Factor of `2AᵀA + ρI` (N × N) when `N ≤ M`.
    Direct(Cholesky),
}

/// Everything the ADMM x-update needs that does not change between
/// iterations: `A`, `ρ`, a factorization and `2Aᵀb`.
///
/// The cache borrows `A`, so `A` cannot change while the cache is alive; a new
/// `ρ` means a new cache.
#[derive(Debug, Clone)]
pub struct XUpdateCache<'a> {
    a: &'a DenseMatrix,
    rho: f64,
    factored: Factored,
    two_at_b: Vec<f64>,
}

impl<'a> XUpdateCache<'a> {
    pub fn build(a: &'a DenseMatrix, b: &[f64], rho: f64) -> Result<Self> {
        if !(rho > 0.0) || !rho.is_finite() {
            return Err(Error::InvalidParameter { name: "rho", value: rho, reason: "must be positive and finite" });
        }
        check_len("observation b", a.rows, b.len())?;
        check_finite("observation b", b)?;
        let factored = if a.rows < a.cols {
            let mut k = a.gram_rows().scaled(2.0);
            for i in 0..a.rows {
                k.data[i * a.rows + i] += rho;
            }
            Factored::Woodbury(Cholesky::factor(&k, rho)?)
        } else {
            let mut k = a.gram_cols().scaled(2.0);
            for i in 0..a.cols {
                k.data[i * a.cols + i] += rho;
            }
            Factored::Direct(Cholesky::factor(&k, rho)?)
        };
        let mut two_at_b = a.tr_mul_vec_unchecked(b);
        two_at_b.iter_mut().for_each(|v| *v *= 2.0);
        Ok(Self { a, rho, factored, two_at_b })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn matrix(&self) -> &'a DenseMatrix {
        self.a
    }

    pub fn two_at_b(&self) -> &[f64] {
        &self.two_at_b
    }

    pub fn uses_woodbury(&self) -> bool {
        matches!(self.factored, Factored::Woodbury(_))
    }

    /// The right-hand side `2Aᵀb + ρu − w` of the x-update.
    pub fn rhs(&self, u: &[f64], w: &[f64]) -> Result<Vec<f64>> {
        check_len("u", self.a.cols, u.len())?;
        check_len("w", self.a.cols, w.len())?;
        Ok(self.rhs_unchecked(u, w))
    }

    fn rhs_unchecked(&self, u: &[f64], w: &[f64]) -> Vec<f64> {
        self.two_at_b.iter().zip(u).zip(w).map(|((t, ui), wi)| t + self.rho * ui - wi).collect()
    }

    /// `(2AᵀA + ρI) x`, evaluated with two matrix-vector products.
    pub fn apply_system(&self, x: &[f64]) -> Result<Vec<f64>> {
        let ax = self.a.mul_vec(x)?;
        let mut out = self.a.tr_mul_vec_unchecked(&ax);
        for (o, xi) in out.iter_mut().zip(x) {
            *o = 2.0 * *o + self.rho * xi;
        }
        Ok(out)
    }

    /// The explicit N × N system matrix `2AᵀA + ρI`. Diagnostics only.
    pub fn system_matrix(&self) -> DenseMatrix {
        let n = self.a.cols;
        let mut k = self.a.gram_cols().scaled(2.0);
        for i in 0..n {
            k.data[i * n + i] += self.rho;
        }
        k
    }

    /// `x = (2AᵀA + ρI)⁻¹ (2Aᵀb + ρu − w)`.
    pub fn solve_x_update(&self, u: &[f64], w: &[f64]) -> Result<Vec<f64>> {
        let rhs = self.rhs(u, w)?;
        Ok(self.solve_rhs(rhs))
    }

    /// Solves `(2AᵀA + ρI) x = rhs`, consuming `rhs`.
    pub fn solve_rhs(&self, mut rhs: Vec<f64>) -> Vec<f64> {
        match &self.factored {
            Factored::Direct(chol) => {
                chol.solve_in_place(&mut rhs);
                rhs
            }
            Factored::Woodbury(chol) => {
                // (ρI + 2AᵀA)⁻¹ = (1/ρ) [I − 2Aᵀ (ρI + 2AAᵀ)⁻¹ A]
                let mut t = self.a.mul_vec_unchecked(&rhs);
                chol.solve_in_place(&mut t);
                let correction = self.a.tr_mul_vec_unchecked(&t);
                let inv_rho = 1.0 / self.rho;
                for (r, c) in rhs.iter_mut().zip(&correction) {
                    *r = (*r - 2.0 * c) * inv_rho;
                }
                rhs
            }
        }
    }
}
