//! Objectives drawn from the class of L-strongly-convex, U-smooth functions:
//! twice-differentiable f: Rⁿ → R whose Hessian spectrum is pinned to
//! [L, U] with 0 < L ≤ U.
//!
//! The workhorse is the explicit quadratic
//!
//! ```text
//! f(x) = ½ xᵀQx + qᵀx + c,      L ≤ λ(Q) ≤ U,
//! ```
//!
//! which is closed under every construction in this crate: ridge regression
//! reduces to one exactly, and a general smooth objective is approximated by
//! its second-order Taylor model at a point. Gradients are analytic
//! (`∇f(x) = Qx + q`); minimizers come from a dense SPD solve and are
//! residual-checked so downstream error measurements never trust an
//! unverified oracle.

use crate::error::{Error, Result};
use crate::linalg::{self, dot, norm, Matrix, SymmetricMatrix};
use crate::tol;
use std::fmt;
use std::fs;
use std::path::Path;

/// Strong-convexity / smoothness pair (L, U) with 0 < L ≤ U.
///
/// The condition number κ = U/L drives every rate in this crate.
///
/// # Example
/// ```
/// use contractix::objective::SmoothnessBounds;
/// let b = SmoothnessBounds::new(1.0, 4.0).unwrap();
/// assert_eq!(b.kappa(), 4.0);
/// ```
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SmoothnessBounds {
    l: f64,
    u: f64,
}

impl SmoothnessBounds {
    pub fn new(l: f64, u: f64) -> Result<Self> {
        if !(l.is_finite() && u.is_finite()) {
            return Err(Error::NonFinite {
                context: "smoothness bounds",
            });
        }
        if l <= 0.0 {
            return Err(Error::invalid("L", format!("must be > 0, got {l}")));
        }
        if u < l {
            return Err(Error::invalid("U", format!("must be ≥ L = {l}, got {u}")));
        }
        Ok(SmoothnessBounds { l, u })
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    pub fn u(&self) -> f64 {
        self.u
    }

    pub fn kappa(&self) -> f64 {
        self.u / self.l
    }
}

impl fmt::Display for SmoothnessBounds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "L = {}, U = {}, kappa = {}", self.l, self.u, self.kappa())
    }
}

/// Explicit quadratic `½ xᵀQx + qᵀx + c` with declared spectrum bounds.
///
/// # Example
/// ```
/// use contractix::linalg::SymmetricMatrix;
/// use contractix::objective::{QuadraticObjective, SmoothnessBounds};
/// let q = QuadraticObjective::new(
///     SymmetricMatrix::from_diagonal(&[2.0]),
///     vec![-2.0],
///     0.0,
///     SmoothnessBounds::new(2.0, 2.0).unwrap(),
/// )
/// .unwrap();
/// assert_eq!(q.eval(&[1.0]).unwrap(), -1.0);
/// assert_eq!(q.minimizer().unwrap(), vec![1.0]);
/// ```
#[derive(Clone, Debug)]
pub struct QuadraticObjective {
    quad: SymmetricMatrix,
    lin: Vec<f64>,
    constant: f64,
    bounds: SmoothnessBounds,
}

impl QuadraticObjective {
    pub fn new(
        quad: SymmetricMatrix,
        lin: Vec<f64>,
        constant: f64,
        bounds: SmoothnessBounds,
    ) -> Result<Self> {
        if quad.n() != lin.len() {
            return Err(Error::DimensionMismatch {
                expected: quad.n(),
                got: lin.len(),
            });
        }
        if quad.n() == 0 {
            return Err(Error::invalid("Q", "dimension must be ≥ 1"));
        }
        if !linalg::all_finite(&lin) || !constant.is_finite() || !quad.max_abs().is_finite() {
            return Err(Error::NonFinite {
                context: "quadratic coefficients",
            });
        }
        Ok(QuadraticObjective {
            quad,
            lin,
            constant,
            bounds,
        })
    }

    pub fn n(&self) -> usize {
        self.lin.len()
    }

    pub fn quad(&self) -> &SymmetricMatrix {
        &self.quad
    }

    pub fn lin(&self) -> &[f64] {
        &self.lin
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn bounds(&self) -> SmoothnessBounds {
        self.bounds
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                got: x.len(),
            });
        }
        if !linalg::all_finite(x) {
            return Err(Error::NonFinite {
                context: "objective input",
            });
        }
        Ok(())
    }

    /// `½ xᵀQx + qᵀx + c`, composed exactly in that order.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        self.check_input(x)?;
        let qx = self.quad.matvec(x);
        Ok(0.5 * dot(x, &qx) + dot(&self.lin, x) + self.constant)
    }

    /// `Qx + q`; zero exactly at the minimizer up to solve residual.
    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        let mut g = self.quad.matvec(x);
        for (gi, qi) in g.iter_mut().zip(&self.lin) {
            *gi += qi;
        }
        Ok(g)
    }

    /// Solves `Q x = −q` by Cholesky with one refinement pass, then verifies
    /// the gradient residual before handing the point back.
    pub fn minimizer(&self) -> Result<Vec<f64>> {
        let rhs: Vec<f64> = self.lin.iter().map(|v| -v).collect();
        let x0 = linalg::solve_spd(&self.quad, &rhs)?;
        let g = self.gradient(&x0)?;
        let tol = tol::SOLVE * (1.0 + norm(&self.lin));
        let res = norm(&g);
        if res > tol {
            return Err(Error::Inconsistent {
                detail: format!("minimizer residual {res:e} exceeds {tol:e}"),
            });
        }
        Ok(x0)
    }

    /// Eigenvalues of Q, ascending. Dense; intended for diagnostics and the
    /// containment checks, not inner loops.
    pub fn spectrum(&self) -> Vec<f64> {
        linalg::jacobi_eigenvalues(&self.quad)
    }
}

/// Differentiable objective with caller-declared spectrum bounds. The
/// bounds are trusted inputs — nothing estimates them from samples.
pub trait SmoothObjective {
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> Result<f64>;
    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>>;
    /// Hessian at `x` when the objective can produce one.
    fn hessian_at(&self, x: &[f64]) -> Option<SymmetricMatrix>;
    fn bounds(&self) -> SmoothnessBounds;
}

impl SmoothObjective for QuadraticObjective {
    fn dim(&self) -> usize {
        self.n()
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        self.eval(x)
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        QuadraticObjective::gradient(self, x)
    }

    fn hessian_at(&self, _x: &[f64]) -> Option<SymmetricMatrix> {
        Some(self.quad.clone())
    }

    fn bounds(&self) -> SmoothnessBounds {
        self.bounds
    }
}

/// Objective defined by user-supplied closures; the escape hatch for
/// non-quadratic experiments.
///
/// # Example
/// ```
/// use contractix::linalg::SymmetricMatrix;
/// use contractix::objective::{FnObjective, SmoothnessBounds, SmoothObjective};
/// // f(x) = x⁴/12 + x²/2 near the origin
/// let f = FnObjective::new(
///     1,
///     |x| x[0].powi(4) / 12.0 + x[0] * x[0] / 2.0,
///     |x| vec![x[0].powi(3) / 3.0 + x[0]],
///     SmoothnessBounds::new(1.0, 5.0).unwrap(),
/// )
/// .with_hessian(|x| SymmetricMatrix::from_diagonal(&[x[0] * x[0] + 1.0]));
/// assert_eq!(f.value(&[0.0]).unwrap(), 0.0);
/// ```
pub struct FnObjective {
    dim: usize,
    value_fn: Box<dyn Fn(&[f64]) -> f64 + Send + Sync>,
    gradient_fn: Box<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>,
    hessian_fn: Option<Box<dyn Fn(&[f64]) -> SymmetricMatrix + Send + Sync>>,
    bounds: SmoothnessBounds,
}

impl FnObjective {
    pub fn new(
        dim: usize,
        value_fn: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        gradient_fn: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
        bounds: SmoothnessBounds,
    ) -> Self {
        FnObjective {
            dim,
            value_fn: Box::new(value_fn),
            gradient_fn: Box::new(gradient_fn),
            hessian_fn: None,
            bounds,
        }
    }

    pub fn with_hessian(
        mut self,
        hessian_fn: impl Fn(&[f64]) -> SymmetricMatrix + Send + Sync + 'static,
    ) -> Self {
        self.hessian_fn = Some(Box::new(hessian_fn));
        self
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        if !linalg::all_finite(x) {
            return Err(Error::NonFinite {
                context: "objective input",
            });
        }
        Ok(())
    }
}

impl SmoothObjective for FnObjective {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        self.check_input(x)?;
        let v = (self.value_fn)(x);
        if !v.is_finite() {
            return Err(Error::NonFinite {
                context: "objective value",
            });
        }
        Ok(v)
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        let g = (self.gradient_fn)(x);
        if g.len() != self.dim || !linalg::all_finite(&g) {
            return Err(Error::NonFinite {
                context: "objective gradient",
            });
        }
        Ok(g)
    }

    fn hessian_at(&self, x: &[f64]) -> Option<SymmetricMatrix> {
        self.hessian_fn.as_ref().map(|h| h(x))
    }

    fn bounds(&self) -> SmoothnessBounds {
        self.bounds
    }
}

/// Ridge-regression training problem: N feature vectors d⁽ⁱ⁾ ∈ Rⁿ with
/// labels y⁽ⁱ⁾ and an ℓ₂ penalty weight λ > 0. The empirical loss is
///
/// ```text
/// loss(x) = (1/N) Σᵢ (y⁽ⁱ⁾ − xᵀd⁽ⁱ⁾)² + λ‖x‖².
/// ```
#[derive(Clone, Debug)]
pub struct RidgeRegressionProblem {
    features: Vec<Vec<f64>>,
    labels: Vec<f64>,
    lambda: f64,
}

impl RidgeRegressionProblem {
    pub fn new(features: Vec<Vec<f64>>, labels: Vec<f64>, lambda: f64) -> Result<Self> {
        if features.is_empty() {
            return Err(Error::invalid("features", "need at least one sample"));
        }
        if features.len() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: features.len(),
                got: labels.len(),
            });
        }
        let n = features[0].len();
        if n == 0 {
            return Err(Error::invalid("features", "feature dimension must be ≥ 1"));
        }
        for (i, d) in features.iter().enumerate() {
            if d.len() != n {
                return Err(Error::invalid(
                    "features",
                    format!("sample {i} has {} entries, expected {n}", d.len()),
                ));
            }
            if !linalg::all_finite(d) {
                return Err(Error::NonFinite { context: "feature vector" });
            }
        }
        if !linalg::all_finite(&labels) {
            return Err(Error::NonFinite { context: "labels" });
        }
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::invalid("lambda", format!("must be > 0, got {lambda}")));
        }
        Ok(RidgeRegressionProblem {
            features,
            labels,
            lambda,
        })
    }

    /// Loads a dataset with a strict header `f1,...,fn,label` and one sample
    /// per row. Every parse failure names the offending line.
    pub fn from_csv(path: &Path, lambda: f64) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| Error::Parse {
            path: path.display().to_string(),
            line: 1,
            detail: "empty file; expected header f1,...,fn,label".into(),
        })?;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        if cols.len() < 2 || cols[cols.len() - 1] != "label" {
            return Err(Error::Parse {
                path: path.display().to_string(),
                line: 1,
                detail: format!("expected header f1,...,fn,label, got `{header}`"),
            });
        }
        let n = cols.len() - 1;
        for (i, col) in cols[..n].iter().enumerate() {
            let expected = format!("f{}", i + 1);
            if *col != expected {
                return Err(Error::Parse {
                    path: path.display().to_string(),
                    line: 1,
                    detail: format!("column {} is `{col}`, expected `{expected}`", i + 1),
                });
            }
        }
        let mut features = Vec::new();
        let mut labels = Vec::new();
        for (idx, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != n + 1 {
                return Err(Error::Parse {
                    path: path.display().to_string(),
                    line: idx + 1,
                    detail: format!("expected {} fields, got {}", n + 1, fields.len()),
                });
            }
            let mut row = Vec::with_capacity(n);
            for f in &fields {
                let v: f64 = f.parse().map_err(|_| Error::Parse {
                    path: path.display().to_string(),
                    line: idx + 1,
                    detail: format!("`{f}` is not a decimal number"),
                })?;
                row.push(v);
            }
            let label = row.pop().expect("row has n+1 entries");
            features.push(row);
            labels.push(label);
        }
        RidgeRegressionProblem::new(features, labels, lambda)
    }

    pub fn n_features(&self) -> usize {
        self.features[0].len()
    }

    pub fn n_samples(&self) -> usize {
        self.features.len()
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Direct evaluation of the empirical loss, no quadratic detour.
    pub fn loss(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.n_features() {
            return Err(Error::DimensionMismatch {
                expected: self.n_features(),
                got: x.len(),
            });
        }
        let n_inv = 1.0 / self.n_samples() as f64;
        let mut acc = 0.0;
        for (d, y) in self.features.iter().zip(&self.labels) {
            let r = y - dot(x, d);
            acc += r * r;
        }
        Ok(n_inv * acc + self.lambda * dot(x, x))
    }

    /// Reduces the problem to an explicit quadratic with
    ///
    /// ```text
    /// Q = λI + (1/N) Σ d⁽ⁱ⁾d⁽ⁱ⁾ᵀ,   q = −(1/N) Σ y⁽ⁱ⁾d⁽ⁱ⁾,   c = (1/2N) Σ (y⁽ⁱ⁾)²,
    /// ```
    ///
    /// so that `2 · eval(x) == loss(x)` identically — the quadratic carries
    /// half the loss, which leaves minimizer, condition number, and step
    /// sizes untouched while keeping Q equal to the regularized second-moment
    /// matrix. Bounds are tight: L = λ and U = λ_max(Q), computed by a dense
    /// eigensolve of the Gram term.
    pub fn to_quadratic(&self) -> Result<QuadraticObjective> {
        let n = self.n_features();
        let n_inv = 1.0 / self.n_samples() as f64;
        let mut gram = SymmetricMatrix::zeros(n);
        for d in &self.features {
            for i in 0..n {
                for j in i..n {
                    let v = gram[(i, j)] + n_inv * d[i] * d[j];
                    gram.set_sym(i, j, v);
                }
            }
        }
        let gram_top = linalg::jacobi_eigenvalues(&gram)
            .last()
            .copied()
            .expect("n ≥ 1")
            .max(0.0);
        let bounds = SmoothnessBounds::new(self.lambda, self.lambda + gram_top)?;
        let mut quad = gram;
        for i in 0..n {
            let v = quad[(i, i)] + self.lambda;
            quad.set_sym(i, i, v);
        }
        let mut lin = vec![0.0; n];
        for (d, y) in self.features.iter().zip(&self.labels) {
            for (li, di) in lin.iter_mut().zip(d) {
                *li -= n_inv * y * di;
            }
        }
        let constant = 0.5 * n_inv * self.labels.iter().map(|y| y * y).sum::<f64>();
        QuadraticObjective::new(quad, lin, constant, bounds)
    }
}

/// Second-order Taylor model of `f` at `x0`: the quadratic with
/// `Q = ∇²f(x0)` whose value and gradient match `f` exactly at `x0`.
pub fn local_quadratic_model(
    f: &dyn SmoothObjective,
    x0: &[f64],
) -> Result<QuadraticObjective> {
    if x0.len() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            got: x0.len(),
        });
    }
    let quad = f.hessian_at(x0).ok_or_else(|| Error::Unsupported {
        detail: "objective does not expose a Hessian; a Taylor model needs one".into(),
    })?;
    if quad.n() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            got: quad.n(),
        });
    }
    let g = f.gradient(x0)?;
    let qx0 = quad.matvec(x0);
    let lin: Vec<f64> = g.iter().zip(&qx0).map(|(gi, hi)| gi - hi).collect();
    let constant = f.value(x0)? + 0.5 * dot(x0, &qx0) - dot(x0, &g);
    QuadraticObjective::new(quad, lin, constant, f.bounds())
}

/// Worst-case gap between `f` and its Taylor model at `x0`, evaluated at
/// `x`: returns `U · ‖x − x0‖²` using the declared smoothness constant.
pub fn model_error_bound(f: &dyn SmoothObjective, x0: &[f64], x: &[f64]) -> Result<f64> {
    if x0.len() != f.dim() || x.len() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            got: if x0.len() != f.dim() { x0.len() } else { x.len() },
        });
    }
    let d = linalg::dist(x, x0);
    Ok(f.bounds().u() * d * d)
}
