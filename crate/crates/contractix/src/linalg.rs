//! Dense linear algebra sized for this crate's problems.
//!
//! Everything here is written for matrices of dimension ≤ a few hundred:
//! row-major storage, direct O(n³) algorithms, no blocking. The crate needs
//! specific numerical guarantees (refined solve residuals, deterministic
//! eigenvalue routines usable as oracles against each other), which is why
//! the routines are local rather than pulled from a general-purpose library:
//! several tests deliberately confront two independent routes to the same
//! quantity, and those routes must not secretly share code.

use crate::error::{Error, Result};
use num_complex::Complex64;
use rand::Rng;

// ---------------------------------------------------------------------------
// Vector helpers (plain slices; a "vector" is any &[f64] with finite entries)
// ---------------------------------------------------------------------------

/// Inner product. Panics on length mismatch (programmer error; public entry
/// points validate dimensions before reaching here).
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "dot: length mismatch");
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Euclidean norm.
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Euclidean distance ‖a − b‖.
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "dist: length mismatch");
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// `a + s·b`, allocated.
pub fn axpy(a: &[f64], s: f64, b: &[f64]) -> Vec<f64> {
    assert_eq!(a.len(), b.len(), "axpy: length mismatch");
    a.iter().zip(b).map(|(x, y)| x + s * y).collect()
}

/// True iff every entry is finite.
pub fn all_finite(a: &[f64]) -> bool {
    a.iter().all(|x| x.is_finite())
}

// ---------------------------------------------------------------------------
// Dense matrix
// ---------------------------------------------------------------------------

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    /// All-zero matrix.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Identity of size `n`.
    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Build from explicit rows. Panics on ragged input.
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut m = Matrix::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "from_rows: ragged row {i}");
            m.data[i * c..(i + 1) * c].copy_from_slice(row);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Row `i` as a slice.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Matrix–vector product.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "matvec: dimension mismatch");
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// Matrix–matrix product.
    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matmul: dimension mismatch");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    /// Entrywise `self − other`.
    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a -= b;
        }
        out
    }

    /// Entrywise scaling.
    pub fn scaled(&self, s: f64) -> Matrix {
        let mut out = self.clone();
        for a in &mut out.data {
            *a *= s;
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// True iff `self[(i,j)] == self[(j,i)]` bitwise for all i, j.
    pub fn is_symmetric_exact(&self) -> bool {
        if self.rows != self.cols {
            return false;
        }
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                if self[(i, j)].to_bits() != self[(j, i)].to_bits() {
                    return false;
                }
            }
        }
        true
    }

    /// Spectral norm (largest singular value). Dimensions here are small, so
    /// this diagonalizes AᵀA with the Jacobi routine — deterministic, with
    /// no iteration-count failure mode. 1×1 and 2×2 use closed forms.
    pub fn spectral_norm(&self) -> f64 {
        if self.rows == 1 && self.cols == 1 {
            return self[(0, 0)].abs();
        }
        if self.rows == 2 && self.cols == 2 {
            return spectral_norm_2x2([
                [self[(0, 0)], self[(0, 1)]],
                [self[(1, 0)], self[(1, 1)]],
            ]);
        }
        // Factor out the magnitude first: entries of AᵀA underflow for
        // matrices far below 1e-154 (powers of contractions get there).
        let top = self.max_abs();
        if top == 0.0 {
            return 0.0;
        }
        let gram_scaled = {
            let s = self.scaled(1.0 / top);
            s.transpose().matmul(&s)
        };
        let sym = SymmetricMatrix::symmetrized(&gram_scaled);
        let eigs = jacobi_eigenvalues(&sym);
        top * eigs.last().copied().unwrap_or(0.0).max(0.0).sqrt()
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Closed-form spectral norm of a 2×2 matrix:
/// ‖A‖² = (f + √(f² − 4·det²))/2 with f the squared Frobenius norm.
pub fn spectral_norm_2x2(m: [[f64; 2]; 2]) -> f64 {
    // Normalize by the largest entry before squaring: the formula runs
    // through fourth powers, which underflow for entries below ~1e-77
    // (matrix powers of contractions reach that fast).
    let top = m
        .iter()
        .flatten()
        .map(|v| v.abs())
        .fold(0.0_f64, f64::max);
    if top == 0.0 {
        return 0.0;
    }
    let s = [
        [m[0][0] / top, m[0][1] / top],
        [m[1][0] / top, m[1][1] / top],
    ];
    let f = s[0][0] * s[0][0] + s[0][1] * s[0][1] + s[1][0] * s[1][0] + s[1][1] * s[1][1];
    let det = s[0][0] * s[1][1] - s[0][1] * s[1][0];
    let disc = (f * f - 4.0 * det * det).max(0.0);
    top * (0.5 * (f + disc.sqrt())).sqrt()
}

// ---------------------------------------------------------------------------
// Symmetric matrix
// ---------------------------------------------------------------------------

/// Square matrix whose (i,j) and (j,i) entries are bitwise identical.
///
/// The wrapper guarantees the invariant at construction: either the input is
/// already exactly symmetric ([`SymmetricMatrix::from_matrix`]) or it is
/// symmetrized by averaging ([`SymmetricMatrix::symmetrized`], exact because
/// f64 addition commutes). Dereferences to [`Matrix`] for read access.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricMatrix(Matrix);

impl SymmetricMatrix {
    /// Wrap a matrix that is already exactly symmetric.
    pub fn from_matrix(m: Matrix) -> Result<Self> {
        if m.rows() != m.cols() {
            return Err(Error::DimensionMismatch {
                expected: m.rows(),
                got: m.cols(),
            });
        }
        if !m.is_symmetric_exact() {
            return Err(Error::invalid(
                "matrix",
                "not exactly symmetric; use SymmetricMatrix::symmetrized to average",
            ));
        }
        Ok(SymmetricMatrix(m))
    }

    /// Exact symmetrization (A + Aᵀ)/2 of a square matrix.
    pub fn symmetrized(m: &Matrix) -> Self {
        assert_eq!(m.rows(), m.cols(), "symmetrized: matrix must be square");
        let n = m.rows();
        let mut out = Matrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = 0.5 * (m[(i, j)] + m[(j, i)]);
                out[(i, j)] = v;
                out[(j, i)] = v;
            }
        }
        SymmetricMatrix(out)
    }

    pub fn identity(n: usize) -> Self {
        SymmetricMatrix(Matrix::identity(n))
    }

    pub fn zeros(n: usize) -> Self {
        SymmetricMatrix(Matrix::zeros(n, n))
    }

    /// Diagonal matrix from the given entries.
    pub fn from_diagonal(d: &[f64]) -> Self {
        let mut m = Matrix::zeros(d.len(), d.len());
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] = v;
        }
        SymmetricMatrix(m)
    }

    pub fn n(&self) -> usize {
        self.0.rows()
    }

    /// Set entries (i,j) and (j,i) to the same value.
    pub fn set_sym(&mut self, i: usize, j: usize, v: f64) {
        self.0[(i, j)] = v;
        self.0[(j, i)] = v;
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }
}

impl std::ops::Deref for SymmetricMatrix {
    type Target = Matrix;
    fn deref(&self) -> &Matrix {
        &self.0
    }
}

// ---------------------------------------------------------------------------
// Cholesky factorization with one refinement pass
// ---------------------------------------------------------------------------

/// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
pub struct Cholesky {
    l: Matrix,
}

/// Factor a symmetric positive definite matrix. A non-positive pivot smaller
/// than `n · eps · max|A|` relative scale signals numerical singularity.
pub fn cholesky(a: &SymmetricMatrix) -> Result<Cholesky> {
    let n = a.n();
    let floor = (n as f64) * f64::EPSILON * a.max_abs();
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if d <= floor {
            return Err(Error::Singular {
                detail: format!("pivot {d:e} at column {j} (positivity floor {floor:e})"),
            });
        }
        let dj = d.sqrt();
        l[(j, j)] = dj;
        for i in (j + 1)..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / dj;
        }
    }
    Ok(Cholesky { l })
}

impl Cholesky {
    /// Solve A x = b using the stored factor (forward + back substitution).
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.l.rows();
        assert_eq!(b.len(), n, "cholesky solve: dimension mismatch");
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut s = b[i];
            for k in 0..i {
                s -= self.l[(i, k)] * y[k];
            }
            y[i] = s / self.l[(i, i)];
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in (i + 1)..n {
                s -= self.l[(k, i)] * x[k];
            }
            x[i] = s / self.l[(i, i)];
        }
        x
    }
}

/// Solve A x = b for symmetric positive definite A, with one pass of
/// iterative refinement to push the residual toward `eps·‖b‖` scale.
pub fn solve_spd(a: &SymmetricMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let chol = cholesky(a)?;
    let mut x = chol.solve(b);
    let r: Vec<f64> = b
        .iter()
        .zip(a.matvec(&x))
        .map(|(bi, axi)| bi - axi)
        .collect();
    let dx = chol.solve(&r);
    for (xi, di) in x.iter_mut().zip(&dx) {
        *xi += di;
    }
    Ok(x)
}

// ---------------------------------------------------------------------------
// Jacobi eigenvalues (symmetric, values only)
// ---------------------------------------------------------------------------

/// Eigenvalues of a symmetric matrix by the cyclic Jacobi method, sorted
/// ascending. Deterministic; converges quadratically once off-diagonal mass
/// is small. Sized for n ≤ a few hundred.
pub fn jacobi_eigenvalues(a: &SymmetricMatrix) -> Vec<f64> {
    let n = a.n();
    if n == 1 {
        return vec![a[(0, 0)]];
    }
    let mut w = a.matrix().clone();
    let scale = w.frobenius_norm();
    if scale == 0.0 {
        return vec![0.0; n];
    }
    let tol = 1e-15 * scale;
    for _sweep in 0..60 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += 2.0 * w[(p, q)] * w[(p, q)];
            }
        }
        if off.sqrt() <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = w[(p, q)];
                if apq.abs() <= tol / (n as f64) {
                    continue;
                }
                let theta = (w[(q, q)] - w[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let wkp = w[(k, p)];
                    let wkq = w[(k, q)];
                    w[(k, p)] = c * wkp - s * wkq;
                    w[(k, q)] = s * wkp + c * wkq;
                }
                for k in 0..n {
                    let wpk = w[(p, k)];
                    let wqk = w[(q, k)];
                    w[(p, k)] = c * wpk - s * wqk;
                    w[(q, k)] = s * wpk + c * wqk;
                }
            }
        }
    }
    let mut eigs: Vec<f64> = (0..n).map(|i| w[(i, i)]).collect();
    eigs.sort_by(|x, y| x.partial_cmp(y).expect("non-finite eigenvalue"));
    eigs
}

// ---------------------------------------------------------------------------
// Random sampling and orthonormalization
// ---------------------------------------------------------------------------

/// Standard normal samples via Box–Muller (keeps the dependency surface at
/// plain `rand`).
pub fn gaussian_vec<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let u1: f64 = 1.0 - rng.gen::<f64>(); // (0, 1]
        let u2: f64 = rng.gen();
        let r = (-2.0 * u1.ln()).sqrt();
        out.push(r * (2.0 * std::f64::consts::PI * u2).cos());
        if out.len() < n {
            out.push(r * (2.0 * std::f64::consts::PI * u2).sin());
        }
    }
    out
}

/// Uniformly random direction on the unit sphere.
pub fn random_unit_vector<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    loop {
        let v = gaussian_vec(rng, n);
        let nv = norm(&v);
        if nv > 1e-6 {
            return v.iter().map(|x| x / nv).collect();
        }
    }
}

/// Random orthogonal matrix: modified Gram–Schmidt applied to the columns of
/// a Gaussian matrix.
pub fn random_orthogonal<R: Rng>(rng: &mut R, n: usize) -> Matrix {
    loop {
        let g = gaussian_vec(rng, n * n);
        let mut cols: Vec<Vec<f64>> = (0..n).map(|j| g[j * n..(j + 1) * n].to_vec()).collect();
        let mut ok = true;
        for j in 0..n {
            for k in 0..j {
                let proj = dot(&cols[j], &cols[k]);
                for i in 0..n {
                    cols[j][i] -= proj * cols[k][i];
                }
            }
            let nj = norm(&cols[j]);
            if nj < 1e-8 {
                ok = false;
                break;
            }
            for x in &mut cols[j] {
                *x /= nj;
            }
        }
        if ok {
            let mut m = Matrix::zeros(n, n);
            for (j, col) in cols.iter().enumerate() {
                for i in 0..n {
                    m[(i, j)] = col[i];
                }
            }
            return m;
        }
    }
}

/// Incrementally orthonormalized basis for span-membership checks.
///
/// Vectors are admitted through two Gram–Schmidt passes (re-orthogonalization
/// controls the error of projecting against a nearly dependent history);
/// vectors already in the span to working precision are silently skipped.
pub struct GrowingBasis {
    dim: usize,
    cols: Vec<Vec<f64>>,
}

impl GrowingBasis {
    pub fn new(dim: usize) -> Self {
        GrowingBasis {
            dim,
            cols: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.cols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cols.is_empty()
    }

    fn project_out(&self, v: &[f64]) -> Vec<f64> {
        let mut w = v.to_vec();
        for q in &self.cols {
            let c = dot(&w, q);
            for i in 0..self.dim {
                w[i] -= c * q[i];
            }
        }
        w
    }

    /// Add a vector's new direction (if any) to the basis.
    pub fn push(&mut self, v: &[f64]) {
        assert_eq!(v.len(), self.dim, "basis push: dimension mismatch");
        if self.cols.len() == self.dim {
            return; // span is already all of R^dim
        }
        let w = self.project_out(&self.project_out(v));
        let nw = norm(&w);
        if nw > 1e-13 * (1.0 + norm(v)) {
            self.cols.push(w.iter().map(|x| x / nw).collect());
        }
    }

    /// Norm of the component of `x` orthogonal to the current span.
    pub fn residual(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.dim, "basis residual: dimension mismatch");
        norm(&self.project_out(&self.project_out(x)))
    }
}

// ---------------------------------------------------------------------------
// Discrete Fourier transform (direct O(n²); n stays at desk scale)
// ---------------------------------------------------------------------------

fn roots_of_unity(n: usize, sign: f64) -> Vec<Complex64> {
    (0..n)
        .map(|t| {
            let angle = sign * 2.0 * std::f64::consts::PI * (t as f64) / (n as f64);
            Complex64::new(angle.cos(), angle.sin())
        })
        .collect()
}

/// Forward transform: X_l = Σ_i x_i · exp(−j2π·i·l/n).
///
/// The phase index i·l is reduced mod n in integer arithmetic, so no
/// large-angle trigonometric error accumulates.
pub fn dft(x: &[f64]) -> Vec<Complex64> {
    let n = x.len();
    let w = roots_of_unity(n, -1.0);
    (0..n)
        .map(|l| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (i, &xi) in x.iter().enumerate() {
                acc += xi * w[(i * l) % n];
            }
            acc
        })
        .collect()
}

/// Inverse transform: x_i = (1/n) Σ_l X_l · exp(+j2π·i·l/n).
pub fn idft(xf: &[Complex64]) -> Vec<Complex64> {
    let n = xf.len();
    let w = roots_of_unity(n, 1.0);
    (0..n)
        .map(|i| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (l, &xl) in xf.iter().enumerate() {
                acc += xl * w[(i * l) % n];
            }
            acc / (n as f64)
        })
        .collect()
}
