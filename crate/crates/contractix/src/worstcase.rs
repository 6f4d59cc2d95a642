//! The hard instance: a circulant quadratic any first-order method needs
//! Ω(√κ·log(1/ε)) iterations to crack.
//!
//! Construction: take the second-difference circulant Q̃ with first row
//! (2, −1, 0, …, 0, −1), set
//!
//! ```text
//! P = (L/4)(κ−1)·Q̃ + L·I,        q̃ = (L(κ−1)/4)·e₀,
//! ```
//!
//! and minimize ½xᵀPx + q̃ᵀx from x^(0) = 0. Because P couples only
//! neighboring coordinates (cyclically) and q̃ touches one, any method whose
//! iterates stay in the span of past gradients can light up at most one new
//! coordinate per side per step — so after k steps a wide middle band of
//! coordinates is still exactly zero while the true minimizer's entries
//! decay like ((√κ−1)/(√κ+1))^l. The norm of the still-zero band is a floor
//! under the error of *every* conforming method.
//!
//! Everything here is checked two ways: eigenvalues by DFT against the
//! cosine closed form and against dense eigensolves, the minimizer by
//! spectral solve against dense Cholesky, and the finite-size gap δ(n)
//! between minimizer entries and their n→∞ limits is measured in
//! double-double precision — at n = 512 the gap sits near 1e−44, far below
//! anything f64 can see.

use crate::dd::{cos_sin_table_cached, pairwise_sum, Dd};
use crate::error::{Error, Result};
use crate::fixedpoint::IterationTrace;
use crate::linalg::{self, norm, GrowingBasis, Matrix, SymmetricMatrix};
use crate::objective::{QuadraticObjective, SmoothnessBounds, SmoothObjective};
use crate::tol;
use std::fmt::Write as _;
use std::path::Path;

/// Circulant matrix stored as its first row; row i is the row cyclically
/// shifted right by i, i.e. `C[i][j] = first_row[(j − i) mod n]`.
#[derive(Clone, Debug)]
pub struct CirculantMatrix {
    first_row: Vec<f64>,
}

impl CirculantMatrix {
    pub fn new(first_row: Vec<f64>) -> Result<Self> {
        if first_row.is_empty() {
            return Err(Error::invalid("first_row", "need n ≥ 1"));
        }
        if !linalg::all_finite(&first_row) {
            return Err(Error::NonFinite {
                context: "circulant first row",
            });
        }
        Ok(CirculantMatrix { first_row })
    }

    pub fn n(&self) -> usize {
        self.first_row.len()
    }

    pub fn first_row(&self) -> &[f64] {
        &self.first_row
    }

    /// Dense form, for cross-checks against the spectral routines.
    pub fn materialize(&self) -> Matrix {
        let n = self.n();
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = self.first_row[(j + n - i) % n];
            }
        }
        m
    }
}

/// Eigenvalues by DFT of the first row, in mode order l = 0..n.
///
/// Only real spectra are returned: if any mode keeps an imaginary part
/// above 1e−10·‖first_row‖ (the first row was not symmetric enough), the
/// whole computation is refused rather than silently projected.
pub fn circulant_eigenvalues(c: &CirculantMatrix) -> Result<Vec<f64>> {
    let modes = linalg::dft(c.first_row());
    let scale = norm(c.first_row());
    let mut out = Vec::with_capacity(modes.len());
    for (l, m) in modes.iter().enumerate() {
        if m.im.abs() > 1e-10 * scale {
            return Err(Error::Inconsistent {
                detail: format!(
                    "mode {l} has imaginary part {:e}; spectrum is not real",
                    m.im
                ),
            });
        }
        out.push(m.re);
    }
    Ok(out)
}

/// Solves `C x = b` spectrally: forward DFT, per-mode division, inverse
/// DFT. Refuses when any mode's magnitude falls below 1e−12 of the largest
/// (the system is numerically singular).
pub fn circulant_solve(c: &CirculantMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = c.n();
    if b.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: b.len(),
        });
    }
    // Multiplication by this circulant acts on mode l through the
    // conjugate of the first row's DFT (the row index enters with the
    // opposite sign to the usual transform convention).
    let mu: Vec<_> = linalg::dft(c.first_row())
        .into_iter()
        .map(|m| m.conj())
        .collect();
    let top = mu.iter().map(|m| m.norm()).fold(0.0, f64::max);
    if let Some((l, m)) = mu
        .iter()
        .enumerate()
        .find(|(_, m)| m.norm() < tol::SINGULARITY_REL * top)
    {
        return Err(Error::Singular {
            detail: format!("mode {l} eigenvalue {:e} is numerically zero", m.norm()),
        });
    }
    let bf = linalg::dft(b);
    let xf: Vec<_> = bf.iter().zip(&mu).map(|(bi, mi)| bi / mi).collect();
    let x = linalg::idft(&xf);
    let imag = x.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
    let scale = norm(b).max(1.0);
    if imag > 1e-10 * scale {
        return Err(Error::Inconsistent {
            detail: format!("solution has imaginary residue {imag:e}"),
        });
    }
    Ok(x.into_iter().map(|v| v.re).collect())
}

/// Eigenvalue of the hard instance's P at mode l (0-based):
/// `(L/2)(κ−1)(1 − cos(2πl/n)) + L`.
pub fn eigenvalue_closed_form(n: usize, l: usize, lbound: f64, kappa: f64) -> f64 {
    let angle = 2.0 * std::f64::consts::PI * l as f64 / n as f64;
    0.5 * lbound * (kappa - 1.0) * (1.0 - angle.cos()) + lbound
}

/// n→∞ limit of the minimizer's entry at 0-based index k:
/// `−((κ−1)/(4√κ))·((√κ−1)/(√κ+1))^k`.
///
/// # Example
/// ```
/// use contractix::worstcase::minimizer_entry_closed_form;
/// assert!((minimizer_entry_closed_form(4.0, 1) - (-0.125)).abs() < 1e-15);
/// ```
pub fn minimizer_entry_closed_form(kappa: f64, k: usize) -> f64 {
    let sk = kappa.sqrt();
    let c = (kappa - 1.0) / (4.0 * sk);
    let z = (sk - 1.0) / (sk + 1.0);
    -c * z.powi(k as i32)
}

/// The hard instance, fully assembled: circulant P, one-hot q̃, a dense
/// objective view, the spectrally computed minimizer, and the measured
/// finite-size gap δ(n) at entry 1.
#[derive(Clone, Debug)]
pub struct WorstCaseInstance {
    pub n: usize,
    pub bounds: SmoothnessBounds,
    pub p: CirculantMatrix,
    pub q_tilde: Vec<f64>,
    pub objective: QuadraticObjective,
    pub x0: Vec<f64>,
    pub delta_n: f64,
}

/// Builds the instance for dimension n ≥ 3 (the wrap-around first row
/// (2, −1, 0, …, 0, −1) needs three slots), κ > 1, L > 0.
///
/// # Example
/// ```
/// use contractix::worstcase::build_worst_case;
/// let inst = build_worst_case(4, 1.0, 5.0).unwrap();
/// assert_eq!(inst.p.first_row(), &[3.0, -1.0, 0.0, -1.0]);
/// ```
pub fn build_worst_case(n: usize, l: f64, kappa: f64) -> Result<WorstCaseInstance> {
    if n < 3 {
        return Err(Error::invalid("n", format!("need n ≥ 3, got {n}")));
    }
    if !(l.is_finite() && l > 0.0) {
        return Err(Error::invalid("L", format!("must be > 0, got {l}")));
    }
    if !(kappa.is_finite() && kappa > 1.0) {
        return Err(Error::invalid("kappa", format!("must be > 1, got {kappa}")));
    }
    let base = 0.25 * l * (kappa - 1.0);
    let mut first_row = vec![0.0; n];
    first_row[0] = 2.0 * base + l;
    first_row[1] = -base;
    first_row[n - 1] = -base;
    let p = CirculantMatrix::new(first_row)?;
    let mut q_tilde = vec![0.0; n];
    q_tilde[0] = base;
    let bounds = SmoothnessBounds::new(l, l * kappa)?;
    let quad = SymmetricMatrix::from_matrix(p.materialize())?;
    let objective = QuadraticObjective::new(quad, q_tilde.clone(), 0.0, bounds)?;
    let neg_q: Vec<f64> = q_tilde.iter().map(|v| -v).collect();
    let x0 = circulant_solve(&p, &neg_q)?;
    let norm_cap = 0.25 * (kappa - 1.0) + 1e-9;
    let x0_norm = norm(&x0);
    if x0_norm > norm_cap {
        return Err(Error::Inconsistent {
            detail: format!("‖x0‖ = {x0_norm} exceeds (κ−1)/4 = {norm_cap}"),
        });
    }
    let delta_n = delta_for(n, kappa, 1)?;
    Ok(WorstCaseInstance {
        n,
        bounds,
        p,
        q_tilde,
        objective,
        x0,
        delta_n,
    })
}

/// δ(n, k) = (spectral minimizer entry k) − (its n→∞ closed form), both
/// evaluated in double-double arithmetic. L cancels from the ratio, so the
/// gap depends only on (n, κ, k).
fn delta_for(n: usize, kappa: f64, k: usize) -> Result<f64> {
    if k == 0 || k >= n {
        return Err(Error::invalid(
            "k",
            format!("entry index must satisfy 1 ≤ k < n = {n}, got {k}"),
        ));
    }
    let table = cos_sin_table_cached(n);
    let kap = Dd::from_f64(kappa);
    let one = Dd::ONE;
    let half_gap = (kap - one) / Dd::from_f64(2.0);
    let q_hat = (kap - one) / Dd::from_f64(4.0);
    // Entry k of −P⁻¹q̃ via the inverse transform: all modes carry the same
    // q̃ weight, so the sum is q̂/n · Σ_l cos(2πkl/n)/λ̂_l with λ̂ = λ/L.
    let terms: Vec<Dd> = (0..n)
        .map(|l| {
            let lam = one + half_gap * (one - table[l].0);
            table[(k * l) % n].0 / lam
        })
        .collect();
    let spectral = -(q_hat * pairwise_sum(&terms)) / Dd::from_usize(n);
    let sk = kap.sqrt();
    let c = (kap - one) / (Dd::from_f64(4.0) * sk);
    let z = (sk - one) / (sk + one);
    let closed = -(c * z.powi(k));
    Ok((spectral - closed).to_f64())
}

/// Measured finite-size gap of the instance's minimizer at 0-based entry
/// index k (1 ≤ k < n). |δ| shrinks as n grows; at desk sizes it is already
/// far below f64 resolution, which is why this goes through [`crate::dd`].
pub fn delta_n_estimate(instance: &WorstCaseInstance, k: usize) -> Result<f64> {
    delta_for(instance.n, instance.bounds.kappa(), k)
}

/// Error floor no gradient-span method can beat from x^(0) = 0:
/// `initial_error·((1−1/√κ)/(1+√κ))·((√κ−1)/(√κ+1))^k − delta_abs`, clipped
/// at zero since an error norm cannot be negative.
pub fn fom_lower_bound(k: usize, kappa: f64, initial_error: f64, delta_abs: f64) -> f64 {
    let sk = kappa.sqrt();
    let z = (sk - 1.0) / (sk + 1.0);
    let value = initial_error * ((1.0 - 1.0 / sk) / (1.0 + sk)) * z.powi(k as i32) - delta_abs;
    value.max(0.0)
}

/// Checks the structural signature of a conforming run started at zero: at
/// step k every coordinate in the still-unreached middle band
/// {k, …, n−k} must vanish (|entry| ≤ 1e−12; for honest runs they are
/// bitwise 0.0). Returns false for traces that violate it — e.g. anything
/// started away from the origin.
pub fn verify_zero_tail(trace: &IterationTrace, instance: &WorstCaseInstance) -> bool {
    let n = instance.n;
    for (k, x) in trace.iterates.iter().enumerate() {
        if x.len() != n {
            return false;
        }
        if 2 * k > n {
            break;
        }
        let hi = (n - k).min(n - 1);
        for l in k..=hi {
            if x[l].abs() > tol::EXACT {
                return false;
            }
        }
    }
    true
}

/// Per-iterate projection residuals onto the running gradient span.
#[derive(Clone, Debug)]
pub struct SpanCertificate {
    /// ‖x^(k) − proj(x^(k))‖ onto span{x^(0), ∇f(x^(0)), …, ∇f(x^(k−1))}.
    pub residuals: Vec<f64>,
    /// Acceptance threshold 1e−8·(1+‖x^(k)‖) per iterate.
    pub thresholds: Vec<f64>,
}

impl SpanCertificate {
    pub fn all_pass(&self) -> bool {
        self.residuals
            .iter()
            .zip(&self.thresholds)
            .all(|(r, t)| r <= t)
    }

    /// Index of the first failing iterate, if any.
    pub fn first_failure(&self) -> Option<usize> {
        self.residuals
            .iter()
            .zip(&self.thresholds)
            .position(|(r, t)| r > t)
    }
}

/// Certifies that every iterate of the trace lies in the span of the start
/// point and the gradients seen so far — the defining property of a
/// first-order method. The span basis is orthonormalized incrementally, so
/// residuals stay meaningful even though raw gradient histories are
/// ill-conditioned.
pub fn verify_span_membership(
    f: &dyn SmoothObjective,
    trace: &IterationTrace,
) -> Result<SpanCertificate> {
    let mut basis = GrowingBasis::new(f.dim());
    let mut residuals = Vec::with_capacity(trace.len());
    let mut thresholds = Vec::with_capacity(trace.len());
    for (k, x) in trace.iterates.iter().enumerate() {
        if k == 0 {
            basis.push(x);
            residuals.push(0.0);
        } else {
            residuals.push(basis.residual(x));
        }
        thresholds.push(tol::SPAN_RESIDUAL * (1.0 + norm(x)));
        basis.push(&f.gradient(x)?);
    }
    Ok(SpanCertificate {
        residuals,
        thresholds,
    })
}

impl WorstCaseInstance {
    /// Writes the instance as CSV: one row per coordinate with the first
    /// row of P, q̃, the minimizer, and the mode-l eigenvalue.
    pub fn export_csv(&self, path: &Path) -> Result<()> {
        let eigs = circulant_eigenvalues(&self.p)?;
        let mut out = String::from("index,p_first_row,q_tilde,x0,eigenvalue\n");
        for i in 0..self.n {
            writeln!(
                out,
                "{i},{},{},{},{}",
                self.p.first_row()[i],
                self.q_tilde[i],
                self.x0[i],
                eigs[i]
            )
            .expect("string writes cannot fail");
        }
        std::fs::write(path, out).map_err(|e| Error::io(path.display().to_string(), e))
    }
}
