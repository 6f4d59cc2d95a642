//! Spectral machinery behind the Heavy-Ball guarantees, packaged as
//! independently checkable pieces:
//!
//! * 2×2 companion blocks `[[a, b], [1, 0]]` and their stable eigenvalue /
//!   spectral-radius formulas — the Heavy-Ball iteration matrix is
//!   orthogonally similar to a stack of these, one per eigenvalue of Q.
//! * A closed-form 2×2 Schur factorization whose powered triangular factor
//!   gives `M^k` along with an explicit envelope on the off-diagonal
//!   coupling term: `|d_k| ≤ k(|a|+|b|+1)ρ(M)^{k−1}`.
//! * The norm of the full 2n×2n Heavy-Ball iteration matrix power computed
//!   two independent ways — dense brute force and per-block maximum — which
//!   must agree; their agreement is the observational proof of the block
//!   decomposition.
//! * Fourier-side identities: the k-th cosine coefficient of the resolvent
//!   kernel `1/(2(1−cos 2πθ) + 4/(κ−1))` in closed form with a
//!   double-double trapezoid oracle, and the geometric-series coefficient
//!   integral it reduces to.
//!
//! Complex arithmetic stays inside this module; every public return is a
//! real magnitude, norm, or coefficient.

use crate::dd::{cos_sin_table_cached, pairwise_sum, Dd};
use crate::error::{Error, Result};
use crate::fixedpoint::HeavyBallParams;
use crate::linalg::{self, Matrix, SymmetricMatrix};
use crate::tol;
use num_complex::Complex64;

/// Companion matrix `M = [[a, b], [1, 0]]`, the shape every Heavy-Ball
/// eigen-block takes.
#[derive(Clone, Copy, Debug)]
pub struct CompanionBlock2x2 {
    pub a: f64,
    pub b: f64,
}

impl CompanionBlock2x2 {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) {
            return Err(Error::NonFinite {
                context: "companion block entries",
            });
        }
        Ok(CompanionBlock2x2 { a, b })
    }

    pub fn to_array(self) -> [[f64; 2]; 2] {
        [[self.a, self.b], [1.0, 0.0]]
    }

    /// Roots of λ² − aλ − b, larger modulus first. The smaller real root
    /// comes from the product identity λ₁λ₂ = −b rather than the
    /// subtractive branch of the quadratic formula, and a rounding band
    /// around a vanishing discriminant is resolved as the repeated root —
    /// a naive `√D` there would surrender half the significant digits.
    pub fn eigenvalues(self) -> (Complex64, Complex64) {
        let d = self.a * self.a + 4.0 * self.b;
        let band = 8.0 * f64::EPSILON * (self.a * self.a + 4.0 * self.b.abs());
        if d < -band {
            let im = 0.5 * (-d).sqrt();
            (
                Complex64::new(0.5 * self.a, im),
                Complex64::new(0.5 * self.a, -im),
            )
        } else if d <= band {
            let half = Complex64::new(0.5 * self.a, 0.0);
            (half, half)
        } else {
            let root = d.sqrt();
            let big = if self.a >= 0.0 {
                0.5 * (self.a + root)
            } else {
                0.5 * (self.a - root)
            };
            let small = if big != 0.0 { -self.b / big } else { 0.0 };
            (Complex64::new(big, 0.0), Complex64::new(small, 0.0))
        }
    }

    /// Spectral radius with a rounding-aware split on the discriminant:
    /// a band of width ~8·eps around zero is treated as the repeated root,
    /// so radii stay accurate where the two real roots are about to merge
    /// into a complex pair (exactly what happens at the ends of [L, U]).
    pub fn spectral_radius(self) -> f64 {
        let d = self.a * self.a + 4.0 * self.b;
        let band = 8.0 * f64::EPSILON * (self.a * self.a + 4.0 * self.b.abs());
        if d < -band {
            (-self.b).sqrt()
        } else if d <= band {
            0.5 * self.a.abs()
        } else {
            0.5 * (self.a.abs() + d.sqrt())
        }
    }

    /// `M^k` by repeated multiplication — the oracle the Schur route is
    /// checked against.
    pub fn power_direct(self, k: usize) -> [[f64; 2]; 2] {
        let m = self.to_array();
        let mut acc = [[1.0, 0.0], [0.0, 1.0]];
        for _ in 0..k {
            acc = mul2(acc, m);
        }
        acc
    }
}

fn mul2(x: [[f64; 2]; 2], y: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    [
        [
            x[0][0] * y[0][0] + x[0][1] * y[1][0],
            x[0][0] * y[0][1] + x[0][1] * y[1][1],
        ],
        [
            x[1][0] * y[0][0] + x[1][1] * y[1][0],
            x[1][0] * y[0][1] + x[1][1] * y[1][1],
        ],
    ]
}

/// Heavy-Ball eigen-block at curvature λ: `a = 1 + β̃ − α̃λ`, `b = −β̃`.
#[derive(Clone, Copy, Debug)]
pub struct HbBlock {
    lambda: f64,
    block: CompanionBlock2x2,
    beta_tilde: f64,
}

impl HbBlock {
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn block(&self) -> CompanionBlock2x2 {
        self.block
    }

    /// √β̃ — the radius every block shares while λ stays inside the
    /// interval the parameters were tuned for.
    pub fn target_radius(&self) -> f64 {
        self.beta_tilde.sqrt()
    }

    /// Whether λ sits in the tuned interval, detected spectrally: inside
    /// it the block's roots are a conjugate pair, i.e. |a| ≤ 2√β̃. Outside,
    /// the radius guarantee is off and callers should treat the computed
    /// radius as merely descriptive.
    pub fn in_tuned_range(&self) -> bool {
        self.block.a.abs() <= 2.0 * self.beta_tilde.sqrt() * (1.0 + 1e-12) + 1e-15
    }
}

/// Builds the 2×2 block governing one eigen-direction of the Heavy-Ball
/// iteration.
///
/// # Example
/// ```
/// use contractix::analysis::block_for_eigenvalue;
/// use contractix::fixedpoint::HeavyBallParams;
/// use contractix::objective::SmoothnessBounds;
/// let p = HeavyBallParams::for_bounds(SmoothnessBounds::new(1.0, 4.0).unwrap());
/// let blk = block_for_eigenvalue(1.0, &p);
/// assert!((blk.block().a - 2.0 / 3.0).abs() < 1e-15);
/// assert!((blk.block().b + 1.0 / 9.0).abs() < 1e-15);
/// ```
pub fn block_for_eigenvalue(lambda_i: f64, p: &HeavyBallParams) -> HbBlock {
    let a = 1.0 + p.beta_tilde() - p.alpha_tilde() * lambda_i;
    HbBlock {
        lambda: lambda_i,
        block: CompanionBlock2x2 { a, b: -p.beta_tilde() },
        beta_tilde: p.beta_tilde(),
    }
}

/// Spectral radius of a Heavy-Ball block. For λ inside the tuned interval
/// this is √β̃ to ~1e−10 regardless of where λ falls — step and momentum
/// are chosen precisely so every eigen-direction contracts at the same
/// rate. Outside the interval the returned radius is still correct but no
/// longer pinned; check [`HbBlock::in_tuned_range`].
pub fn spectral_radius_block(blk: &HbBlock) -> f64 {
    blk.block.spectral_radius()
}

/// Largest deviation of a block radius from √β̃ over an even sweep of
/// curvatures across [L, U].
pub fn radius_deviation_sweep(
    bounds: crate::objective::SmoothnessBounds,
    points: usize,
) -> Result<f64> {
    if points < 2 {
        return Err(Error::invalid("points", "sweep needs at least 2 points"));
    }
    let p = HeavyBallParams::for_bounds(bounds);
    let target = p.momentum_rate();
    let (l, u) = (bounds.l(), bounds.u());
    let mut worst = 0.0_f64;
    for i in 0..points {
        let lam = l + (u - l) * i as f64 / (points - 1) as f64;
        let dev = (spectral_radius_block(&block_for_eigenvalue(lam, &p)) - target).abs();
        worst = worst.max(dev);
    }
    Ok(worst)
}

/// k-th power of a companion block in Schur form: `M = U T Uᴴ` with
/// `T = [[λ₁, t], [0, λ₂]]`, so `M^k = U [[λ₁^k, d_k], [0, λ₂^k]] Uᴴ` and
/// the only quantity that needs care is the coupling term
/// `d_k = t·Σ_{j<k} λ₁^j λ₂^{k−1−j}`.
#[derive(Clone, Debug)]
pub struct SchurPower2x2 {
    lambda1: Complex64,
    lambda2: Complex64,
    d: Complex64,
    k: usize,
    basis: [[Complex64; 2]; 2],
}

impl SchurPower2x2 {
    pub fn lambda1(&self) -> Complex64 {
        self.lambda1
    }

    pub fn lambda2(&self) -> Complex64 {
        self.lambda2
    }

    /// Off-diagonal of the powered triangular factor.
    pub fn d(&self) -> Complex64 {
        self.d
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// `M^k` reassembled from the factorization. The result of powering a
    /// real matrix is real; residual imaginary parts are rounding noise
    /// and are checked against the factor scale before being dropped.
    pub fn reconstruct(&self) -> Result<[[f64; 2]; 2]> {
        let t = [
            [self.lambda1.powu(self.k as u32), self.d],
            [Complex64::new(0.0, 0.0), self.lambda2.powu(self.k as u32)],
        ];
        let u = self.basis;
        let uh = [[u[0][0].conj(), u[1][0].conj()], [u[0][1].conj(), u[1][1].conj()]];
        let m = cmul2(cmul2(u, t), uh);
        let scale = m
            .iter()
            .flatten()
            .map(|z| z.norm())
            .fold(1.0_f64, f64::max);
        let imag = m
            .iter()
            .flatten()
            .map(|z| z.im.abs())
            .fold(0.0_f64, f64::max);
        if imag > 1e-10 * scale {
            return Err(Error::Inconsistent {
                detail: format!("power of a real block has imaginary residue {imag:e}"),
            });
        }
        Ok([[m[0][0].re, m[0][1].re], [m[1][0].re, m[1][1].re]])
    }

    /// Spectral norm of `M^k`, straight from the triangular factor (the
    /// unitary basis drops out of the norm).
    pub fn norm(&self) -> f64 {
        let t = [
            [self.lambda1.powu(self.k as u32), self.d],
            [Complex64::new(0.0, 0.0), self.lambda2.powu(self.k as u32)],
        ];
        spectral_norm_c2(t)
    }
}

fn cmul2(x: [[Complex64; 2]; 2], y: [[Complex64; 2]; 2]) -> [[Complex64; 2]; 2] {
    [
        [
            x[0][0] * y[0][0] + x[0][1] * y[1][0],
            x[0][0] * y[0][1] + x[0][1] * y[1][1],
        ],
        [
            x[1][0] * y[0][0] + x[1][1] * y[1][0],
            x[1][0] * y[0][1] + x[1][1] * y[1][1],
        ],
    ]
}

fn spectral_norm_c2(m: [[Complex64; 2]; 2]) -> f64 {
    // Largest eigenvalue of the 2×2 Hermitian Gram matrix MᴴM, with the
    // magnitude factored out first — the Gram entries are squares and the
    // eigenvalue formula squares them again, which underflows for factors
    // below ~1e-77.
    let top = m
        .iter()
        .flatten()
        .map(|z| z.norm())
        .fold(0.0_f64, f64::max);
    if top == 0.0 {
        return 0.0;
    }
    let s: Vec<Complex64> = m.iter().flatten().map(|z| z / top).collect();
    let g11 = s[0].norm_sqr() + s[2].norm_sqr();
    let g22 = s[1].norm_sqr() + s[3].norm_sqr();
    let g12 = s[0].conj() * s[1] + s[2].conj() * s[3];
    let mid = 0.5 * (g11 + g22);
    let disc = (0.25 * (g11 - g22) * (g11 - g22) + g12.norm_sqr()).max(0.0);
    top * (mid + disc.sqrt()).max(0.0).sqrt()
}

/// Schur-factorizes a companion block and powers the triangular factor.
///
/// The factorization is closed-form: one eigenvector from the quadratic
/// formula, its unit complement as the second basis column. Reconstruction
/// agrees with direct repeated multiplication to 1e−10·‖M‖^k, and the
/// coupling term obeys `|d_k| ≤ k(|a|+|b|+1)ρ(M)^{k−1}`.
pub fn power_decomposition_2x2(m: &CompanionBlock2x2, k: usize) -> Result<SchurPower2x2> {
    if k == 0 {
        return Err(Error::invalid("k", "power must be ≥ 1"));
    }
    let (l1, l2) = m.eigenvalues();
    let vnorm = (l1.norm_sqr() + 1.0).sqrt();
    let v = [l1 / vnorm, Complex64::new(1.0 / vnorm, 0.0)];
    let w = [-v[1].conj(), v[0].conj()];
    let ma = [
        [Complex64::new(m.a, 0.0), Complex64::new(m.b, 0.0)],
        [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
    ];
    let mw = [
        ma[0][0] * w[0] + ma[0][1] * w[1],
        ma[1][0] * w[0] + ma[1][1] * w[1],
    ];
    let t12 = v[0].conj() * mw[0] + v[1].conj() * mw[1];
    // d_k = t·Σ_{j=0}^{k−1} λ₁^j λ₂^{k−1−j}, accumulated with running
    // powers so no subtractive λ₁−λ₂ denominator ever appears.
    let mut powers1 = vec![Complex64::new(1.0, 0.0); k];
    for j in 1..k {
        powers1[j] = powers1[j - 1] * l1;
    }
    let mut sum = Complex64::new(0.0, 0.0);
    let mut p2 = Complex64::new(1.0, 0.0);
    for j in (0..k).rev() {
        sum += powers1[j] * p2;
        p2 *= l2;
    }
    Ok(SchurPower2x2 {
        lambda1: l1,
        lambda2: l2,
        d: t12 * sum,
        k,
        basis: [[v[0], w[0]], [v[1], w[1]]],
    })
}

/// Both routes to ‖R^k‖ for the Heavy-Ball iteration matrix
/// `R = [[(1+β̃)I − α̃Q, −β̃I], [I, 0]]`: a dense 2n×2n power and the
/// maximum over per-eigenvalue 2×2 block powers.
#[derive(Clone, Copy, Debug)]
pub struct PowerNormRoutes {
    pub block_route: f64,
    pub dense_route: f64,
}

impl PowerNormRoutes {
    pub fn relative_gap(&self) -> f64 {
        let denom = self.block_route.max(self.dense_route);
        if denom == 0.0 {
            0.0
        } else {
            (self.block_route - self.dense_route).abs() / denom
        }
    }
}

/// Computes ‖R^k‖ by both routes without adjudicating between them; the
/// verification report prints each side.
pub fn hb_matrix_power_norm_routes(
    q: &SymmetricMatrix,
    p: &HeavyBallParams,
    k: usize,
) -> Result<PowerNormRoutes> {
    let n = q.n();
    if n > 64 {
        return Err(Error::invalid(
            "Q",
            format!("dense route is capped at n ≤ 64, got {n}"),
        ));
    }
    if k == 0 {
        return Err(Error::invalid("k", "power must be ≥ 1"));
    }
    let eigs = linalg::jacobi_eigenvalues(q);
    let scale = eigs.iter().fold(1.0_f64, |m, e| m.max(e.abs()));
    if eigs.iter().any(|&e| e < -1e-9 * scale) {
        return Err(Error::invalid("Q", "matrix must be positive semidefinite"));
    }

    let mut block_route = 0.0_f64;
    for &lam in &eigs {
        let blk = block_for_eigenvalue(lam, p);
        let norm = power_decomposition_2x2(&blk.block(), k)?.norm();
        block_route = block_route.max(norm);
    }

    let mut r = Matrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            r[(i, j)] = -p.alpha_tilde() * q[(i, j)];
        }
        r[(i, i)] += 1.0 + p.beta_tilde();
        r[(i, n + i)] = -p.beta_tilde();
        r[(n + i, i)] = 1.0;
    }
    let mut acc = Matrix::identity(2 * n);
    for _ in 0..k {
        acc = acc.matmul(&r);
    }
    let dense_route = acc.spectral_norm();

    Ok(PowerNormRoutes {
        block_route,
        dense_route,
    })
}

/// ‖R^k‖ for the Heavy-Ball iteration matrix over quadratic curvature Q,
/// cross-validated: the dense and per-block routes must agree to 1e−8
/// relative, otherwise the mismatch is surfaced as an error rather than
/// either value being trusted.
pub fn hb_matrix_power_norm(q: &SymmetricMatrix, p: &HeavyBallParams, k: usize) -> Result<f64> {
    let routes = hb_matrix_power_norm_routes(q, p, k)?;
    if routes.relative_gap() > tol::ROUTE_REL {
        return Err(Error::Inconsistent {
            detail: format!(
                "power-norm routes disagree: per-block {:e} vs dense {:e} (rel {:e})",
                routes.block_route,
                routes.dense_route,
                routes.relative_gap()
            ),
        });
    }
    Ok(routes.block_route)
}

/// Envelope on per-block power norms:
/// `((√κ−1)/(√κ+1))^k · (1 + k·c̃·(√κ+1)/(√κ−1))` with `c̃ = 2 + 2β̃ + α̃`.
/// Dominates ‖(B^(i))^k‖ for every curvature in the tuned interval.
///
/// # Example
/// ```
/// use contractix::analysis::block_power_norm_bound;
/// use contractix::fixedpoint::HeavyBallParams;
/// use contractix::objective::SmoothnessBounds;
/// let p = HeavyBallParams::for_bounds(SmoothnessBounds::new(1.0, 4.0).unwrap());
/// let b = block_power_norm_bound(4.0, 1, &p).unwrap();
/// assert!((b - 3.0).abs() < 1e-14);
/// ```
pub fn block_power_norm_bound(kappa: f64, k: usize, p: &HeavyBallParams) -> Result<f64> {
    if !(kappa.is_finite() && kappa > 1.0) {
        return Err(Error::Unsupported {
            detail: format!("envelope needs κ > 1, got {kappa}"),
        });
    }
    if k == 0 {
        return Err(Error::invalid("k", "power must be ≥ 1"));
    }
    let sk = kappa.sqrt();
    let z2 = (sk - 1.0) / (sk + 1.0);
    let c_tilde = 2.0 + 2.0 * p.beta_tilde() + p.alpha_tilde();
    Ok(z2.powi(k as i32) * (1.0 + k as f64 * c_tilde * (sk + 1.0) / (sk - 1.0)))
}

/// k-th Fourier coefficient of the resolvent kernel
/// `θ ↦ 1/(2(1−cos 2πθ) + 4/(κ−1))` in closed form:
/// `((κ−1)/(4√κ)) · ((√κ−1)/(√κ+1))^k`.
///
/// The prefactor is `1/(z₁−z₂)` for `z₁ = (√κ+1)/(√κ−1)`, `z₂ = 1/z₁` —
/// the two roots the kernel's generating function splits over.
///
/// # Example
/// ```
/// use contractix::analysis::integral_identity;
/// assert!((integral_identity(4.0, 1).unwrap() - 0.125).abs() < 1e-15);
/// ```
pub fn integral_identity(kappa: f64, k: usize) -> Result<f64> {
    if !(kappa.is_finite() && kappa > 1.0) {
        return Err(Error::Unsupported {
            detail: format!("coefficient identity needs κ > 1, got {kappa}"),
        });
    }
    if k == 0 {
        return Err(Error::invalid("k", "coefficient index must be ≥ 1"));
    }
    let sk = kappa.sqrt();
    let z2 = (sk - 1.0) / (sk + 1.0);
    Ok((kappa - 1.0) / (4.0 * sk) * z2.powi(k as i32))
}

/// Trapezoid evaluation of the same coefficient on 2^log2_nodes uniform
/// nodes over [0, 1), run in double-double arithmetic.
///
/// For a smooth periodic integrand the trapezoid rule converges
/// geometrically, so discretization error is negligible long before 2¹⁴
/// nodes; what actually limits accuracy is summation rounding on a sum
/// whose terms cancel almost perfectly (the coefficient can sit 20+ orders
/// below the individual terms at mild κ). Hence the extended precision and
/// the pairwise accumulation.
pub fn integral_identity_quadrature(kappa: f64, k: usize, log2_nodes: u32) -> Result<f64> {
    if !(kappa.is_finite() && kappa > 1.0) {
        return Err(Error::Unsupported {
            detail: format!("quadrature needs κ > 1, got {kappa}"),
        });
    }
    if k == 0 {
        return Err(Error::invalid("k", "coefficient index must be ≥ 1"));
    }
    if !(4..=20).contains(&log2_nodes) {
        return Err(Error::invalid(
            "log2_nodes",
            format!("node exponent must be in 4..=20, got {log2_nodes}"),
        ));
    }
    let n = 1usize << log2_nodes;
    let table = cos_sin_table_cached(n);
    let kap = Dd::from_f64(kappa);
    let two = Dd::from_f64(2.0);
    let shift = Dd::from_f64(4.0) / (kap - Dd::ONE);
    let terms: Vec<Dd> = (0..n)
        .map(|i| {
            let denom = two * (Dd::ONE - table[i].0) + shift;
            table[(k * i) % n].0 / denom
        })
        .collect();
    Ok((pairwise_sum(&terms) / Dd::from_usize(n)).to_f64())
}

/// Coefficient-picking integral of the geometric kernel:
/// `∫₀¹ e^{j2πkθ}/(e^{j2πθ} − α) dθ` equals `α^{k−1}` for |α| < 1 and 0
/// for |α| > 1 (the kernel's series has no positive-frequency component
/// there). On the unit circle the integrand is singular and the value is
/// refused.
///
/// # Example
/// ```
/// use contractix::analysis::geometric_fourier_identities;
/// assert_eq!(geometric_fourier_identities(0.5, 1).unwrap(), 1.0);
/// assert_eq!(geometric_fourier_identities(3.0, 2).unwrap(), 0.0);
/// ```
pub fn geometric_fourier_identities(alpha: f64, k: usize) -> Result<f64> {
    if !alpha.is_finite() {
        return Err(Error::NonFinite { context: "alpha" });
    }
    if k == 0 {
        return Err(Error::invalid("k", "frequency index must be ≥ 1"));
    }
    if alpha.abs() == 1.0 {
        return Err(Error::Unsupported {
            detail: "kernel is singular for |alpha| = 1".into(),
        });
    }
    if alpha.abs() < 1.0 {
        Ok(alpha.powi(k as i32 - 1))
    } else {
        Ok(0.0)
    }
}

/// f64 trapezoid oracle for [`geometric_fourier_identities`] — the values
/// there are O(1) or exactly zero, so double precision suffices.
pub fn geometric_fourier_quadrature(alpha: f64, k: usize, nodes: usize) -> Result<f64> {
    if !alpha.is_finite() {
        return Err(Error::NonFinite { context: "alpha" });
    }
    if k == 0 {
        return Err(Error::invalid("k", "frequency index must be ≥ 1"));
    }
    if alpha.abs() == 1.0 {
        return Err(Error::Unsupported {
            detail: "kernel is singular for |alpha| = 1".into(),
        });
    }
    if nodes < 16 {
        return Err(Error::invalid("nodes", "need at least 16 nodes"));
    }
    let mut sum = Complex64::new(0.0, 0.0);
    for i in 0..nodes {
        let theta = 2.0 * std::f64::consts::PI * i as f64 / nodes as f64;
        let phase = Complex64::new(0.0, theta);
        let numer = (phase * k as f64).exp();
        let denom = phase.exp() - alpha;
        sum += numer / denom;
    }
    Ok((sum / nodes as f64).re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::SmoothnessBounds;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params(l: f64, u: f64) -> HeavyBallParams {
        HeavyBallParams::for_bounds(SmoothnessBounds::new(l, u).unwrap())
    }

    fn norm2(m: [[f64; 2]; 2]) -> f64 {
        linalg::spectral_norm_2x2(m)
    }

    #[test]
    fn block_construction_hand_values() {
        let p = params(1.0, 4.0);
        let lo = block_for_eigenvalue(1.0, &p);
        assert!((lo.block().a - 2.0 / 3.0).abs() <= 1e-15);
        assert!((lo.block().b + 1.0 / 9.0).abs() <= 1e-15);
        let (e1, _) = lo.block().eigenvalues();
        assert!((e1.norm() - 1.0 / 3.0).abs() <= 1e-12);

        let hi = block_for_eigenvalue(4.0, &p);
        assert!((hi.block().a + 2.0 / 3.0).abs() <= 1e-15);
        let (e1, e2) = hi.block().eigenvalues();
        assert!((e1.norm() - 1.0 / 3.0).abs() <= 1e-12);
        assert!((e2.norm() - 1.0 / 3.0).abs() <= 1e-12);

        // Single-curvature tuning collapses the block to nilpotent.
        let gd = block_for_eigenvalue(2.0, &params(2.0, 2.0));
        assert!(spectral_radius_block(&gd) <= 1e-12);
    }

    #[test]
    fn radius_is_flat_across_the_tuned_interval() {
        for kappa in [2.0, 4.0, 100.0] {
            let dev = radius_deviation_sweep(SmoothnessBounds::new(1.0, kappa).unwrap(), 100)
                .unwrap();
            assert!(dev <= 1e-10, "κ={kappa}: deviation {dev:e}");
        }
        let p = params(1.0, 100.0);
        for lam in [1.0, 17.3, 50.0, 99.99, 100.0] {
            let r = spectral_radius_block(&block_for_eigenvalue(lam, &p));
            assert!((r - 9.0 / 11.0).abs() <= 1e-10, "λ={lam}: {r}");
        }
        for lam in [1.0, 2.5, 4.0] {
            let r = spectral_radius_block(&block_for_eigenvalue(lam, &params(1.0, 4.0)));
            assert!((r - 1.0 / 3.0).abs() <= 1e-10);
        }
    }

    #[test]
    fn curvature_outside_the_interval_is_flagged() {
        let p = params(1.0, 4.0);
        let inside = block_for_eigenvalue(2.0, &p);
        assert!(inside.in_tuned_range());
        let outside = block_for_eigenvalue(6.0, &p);
        assert!(!outside.in_tuned_range());
        assert!(spectral_radius_block(&outside) > outside.target_radius());
    }

    #[test]
    fn radius_matches_eigenvalue_moduli_everywhere() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..500 {
            let m = CompanionBlock2x2 {
                a: rng.gen_range(-3.0..3.0),
                b: rng.gen_range(-3.0..3.0),
            };
            let (e1, e2) = m.eigenvalues();
            let want = e1.norm().max(e2.norm());
            assert!((m.spectral_radius() - want).abs() <= 1e-12 * (1.0 + want));
        }
    }

    #[test]
    fn idempotent_block_power_stabilizes() {
        let m = CompanionBlock2x2::new(1.0, 0.0).unwrap();
        let (e1, e2) = m.eigenvalues();
        assert!((e1.re - 1.0).abs() <= 1e-15 && e1.im == 0.0);
        assert!(e2.norm() <= 1e-15);
        for k in 1..12 {
            let sp = power_decomposition_2x2(&m, k).unwrap();
            let got = sp.reconstruct().unwrap();
            for (row_got, row_want) in got.iter().zip(m.to_array()) {
                for (g, w) in row_got.iter().zip(row_want) {
                    assert!((g - w).abs() <= 1e-12);
                }
            }
            assert!(sp.d().norm() <= k as f64 * 2.0 + 1e-10);
        }
    }

    #[test]
    fn rotation_block_has_unit_radius_and_period_four() {
        let m = CompanionBlock2x2::new(0.0, -1.0).unwrap();
        assert!((m.spectral_radius() - 1.0).abs() <= 1e-15);
        let got = power_decomposition_2x2(&m, 4).unwrap().reconstruct().unwrap();
        let eye = [[1.0, 0.0], [0.0, 1.0]];
        for (row_got, row_want) in got.iter().zip(eye) {
            for (g, w) in row_got.iter().zip(row_want) {
                assert!((g - w).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn schur_power_matches_direct_multiplication() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for trial in 0..1000 {
            let m = CompanionBlock2x2 {
                a: rng.gen_range(-2.0..2.0),
                b: rng.gen_range(-2.0..2.0),
            };
            let k = rng.gen_range(1..=30);
            let sp = power_decomposition_2x2(&m, k).unwrap();
            let rho = m.spectral_radius();
            assert!(sp.lambda1().norm() <= rho + 1e-12);
            assert!(sp.lambda2().norm() <= rho + 1e-12);
            let bound = k as f64 * (m.a.abs() + m.b.abs() + 1.0) * rho.powi(k as i32 - 1);
            assert!(
                sp.d().norm() <= bound + 1e-10,
                "trial {trial}: |d|={:e} bound={bound:e}",
                sp.d().norm()
            );
            let got = sp.reconstruct().unwrap();
            let want = m.power_direct(k);
            let scale = norm2(m.to_array()).powi(k as i32);
            for i in 0..2 {
                for j in 0..2 {
                    assert!(
                        (got[i][j] - want[i][j]).abs() <= 1e-10 * scale,
                        "trial {trial} ({},{}) gap {:e} scale {scale:e}",
                        i,
                        j,
                        (got[i][j] - want[i][j]).abs()
                    );
                }
            }
        }
    }

    #[test]
    fn power_needs_positive_exponent() {
        let m = CompanionBlock2x2::new(0.5, 0.1).unwrap();
        assert!(power_decomposition_2x2(&m, 0).is_err());
    }

    #[test]
    fn dual_routes_agree_on_single_curvature() {
        let q = SymmetricMatrix::from_diagonal(&[3.0, 3.0]);
        let p = params(3.0, 3.0);
        let routes = hb_matrix_power_norm_routes(&q, &p, 1).unwrap();
        assert!(routes.relative_gap() <= 1e-12);
        assert!((hb_matrix_power_norm(&q, &p, 1).unwrap() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn dual_routes_agree_and_respect_the_envelope() {
        let q = SymmetricMatrix::from_diagonal(&[1.0, 4.0]);
        let p = params(1.0, 4.0);
        for k in [1, 5, 20] {
            let routes = hb_matrix_power_norm_routes(&q, &p, k).unwrap();
            assert!(routes.relative_gap() <= 1e-8, "k={k}: {routes:?}");
            let norm = hb_matrix_power_norm(&q, &p, k).unwrap();
            let bound = block_power_norm_bound(4.0, k, &p).unwrap();
            assert!(norm <= bound * (1.0 + 1e-12), "k={k}: {norm} vs {bound}");
        }
    }

    #[test]
    fn dual_routes_agree_on_dense_spectra() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let v = linalg::random_orthogonal(&mut rng, 6);
        let mut d = Matrix::zeros(6, 6);
        let lambdas = [1.0, 1.7, 3.1, 5.5, 8.2, 10.0];
        for (i, lam) in lambdas.iter().enumerate() {
            d[(i, i)] = *lam;
        }
        let q = SymmetricMatrix::symmetrized(&v.transpose().matmul(&d).matmul(&v));
        let p = params(1.0, 10.0);
        for k in [1, 7, 50] {
            let routes = hb_matrix_power_norm_routes(&q, &p, k).unwrap();
            assert!(routes.relative_gap() <= 1e-8, "k={k}: {routes:?}");
        }
    }

    #[test]
    fn power_norm_vanishes_for_large_k() {
        let q = SymmetricMatrix::from_diagonal(&[1.0, 4.0]);
        let p = params(1.0, 4.0);
        let norm = hb_matrix_power_norm(&q, &p, 200).unwrap();
        assert!(norm < 1e-50, "‖R^200‖ = {norm:e}");
    }

    #[test]
    fn power_norm_rejects_bad_inputs() {
        let p = params(1.0, 4.0);
        let neg = SymmetricMatrix::from_diagonal(&[-1.0, 2.0]);
        assert!(hb_matrix_power_norm(&neg, &p, 3).is_err());
        let q = SymmetricMatrix::from_diagonal(&[1.0, 2.0]);
        assert!(hb_matrix_power_norm(&q, &p, 0).is_err());
        let big = SymmetricMatrix::identity(65);
        assert!(hb_matrix_power_norm(&big, &p, 1).is_err());
    }

    #[test]
    fn envelope_hand_value_and_rate() {
        let p = params(1.0, 4.0);
        assert!((block_power_norm_bound(4.0, 1, &p).unwrap() - 3.0).abs() <= 1e-14);
        assert!(block_power_norm_bound(1.0, 1, &p).is_err());
        assert!(block_power_norm_bound(4.0, 0, &p).is_err());

        let p100 = params(1.0, 100.0);
        let c_tilde = 2.0 + 2.0 * p100.beta_tilde() + p100.alpha_tilde();
        let rat = 11.0 / 9.0;
        for k in 1..=12 {
            let b = block_power_norm_bound(100.0, k, &p100).unwrap();
            let geometric = b / (1.0 + k as f64 * c_tilde * rat);
            let want = (9.0_f64 / 11.0).powi(k as i32);
            assert!((geometric - want).abs() <= 1e-12 * want);
        }
    }

    #[test]
    fn envelope_dominates_measured_block_norms() {
        for kappa in [2.0, 4.0, 100.0] {
            let p = params(1.0, kappa);
            for i in 0..9 {
                let lam = 1.0 + (kappa - 1.0) * i as f64 / 8.0;
                let blk = block_for_eigenvalue(lam, &p).block();
                for k in [1usize, 3, 10, 30, 50] {
                    let measured = norm2(blk.power_direct(k));
                    let bound = block_power_norm_bound(kappa, k, &p).unwrap();
                    assert!(
                        measured <= bound * (1.0 + 1e-12),
                        "κ={kappa} λ={lam} k={k}: {measured:e} vs {bound:e}"
                    );
                }
            }
        }
    }

    #[test]
    fn per_block_coupling_envelope_at_moderate_power() {
        let p = params(1.0, 4.0);
        let k = 10;
        for i in 0..25 {
            let lam = 1.0 + 3.0 * i as f64 / 24.0;
            let blk = block_for_eigenvalue(lam, &p).block();
            let measured = norm2(blk.power_direct(k));
            let envelope = (1.0 + k as f64 * (blk.a.abs() + blk.b.abs() + 1.0) * 3.0)
                * (1.0_f64 / 3.0).powi(k as i32);
            assert!(measured <= envelope * (1.0 + 1e-12));
        }
    }

    #[test]
    fn coefficient_identity_hand_values() {
        assert!((integral_identity(4.0, 1).unwrap() - 0.125).abs() <= 1e-15);
        let want = 99.0 / 40.0 * (9.0_f64 / 11.0).powi(2);
        assert!((integral_identity(100.0, 2).unwrap() - want).abs() <= 1e-14);
        assert!(integral_identity(1.0, 1).is_err());
        assert!(integral_identity(0.5, 1).is_err());
        assert!(integral_identity(4.0, 0).is_err());
        for k in 1..20 {
            let ratio = integral_identity(4.0, k + 1).unwrap() / integral_identity(4.0, k).unwrap();
            assert!((ratio - 1.0 / 3.0).abs() <= 1e-13);
        }
    }

    #[test]
    fn root_pair_constants_are_reciprocal() {
        for kappa in [1.1f64, 2.0, 4.0, 100.0, 1e4] {
            let sk = kappa.sqrt();
            let z1 = (sk + 1.0) / (sk - 1.0);
            let z2 = (sk - 1.0) / (sk + 1.0);
            assert!((z1 * z2 - 1.0).abs() <= 1e-13);
            assert!(((z1 - z2) * (kappa - 1.0) / (4.0 * sk) - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn closed_form_matches_minimizer_entries_across_modules() {
        for kappa in [1.5, 4.0, 100.0, 1e4] {
            for k in 1..=8 {
                let lhs = crate::worstcase::minimizer_entry_closed_form(kappa, k);
                let rhs = -integral_identity(kappa, k).unwrap();
                assert!(
                    (lhs - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()),
                    "κ={kappa} k={k}"
                );
            }
        }
    }

    #[test]
    fn quadrature_confirms_the_closed_form() {
        for kappa in [1.1, 100.0] {
            for k in [1, 7, 12] {
                let closed = integral_identity(kappa, k).unwrap();
                let quad = integral_identity_quadrature(kappa, k, 12).unwrap();
                let rel = (quad - closed).abs() / closed.abs();
                assert!(rel <= 1e-8, "κ={kappa} k={k}: rel {rel:e}");
            }
        }
        let spot = integral_identity_quadrature(4.0, 1, 14).unwrap();
        assert!((spot - 0.125).abs() <= 1e-10);
        assert!(integral_identity_quadrature(4.0, 1, 3).is_err());
        assert!(integral_identity_quadrature(4.0, 1, 21).is_err());
    }

    #[test]
    fn geometric_identities_and_quadrature_oracle() {
        assert_eq!(geometric_fourier_identities(0.0, 3).unwrap(), 0.0);
        assert_eq!(geometric_fourier_identities(0.5, 1).unwrap(), 1.0);
        assert_eq!(geometric_fourier_identities(3.0, 2).unwrap(), 0.0);
        assert!(geometric_fourier_identities(1.0, 1).is_err());
        assert!(geometric_fourier_identities(-1.0, 2).is_err());
        assert!(geometric_fourier_identities(0.5, 0).is_err());

        for alpha in [-0.9, -0.3, 0.0, 0.5, 0.9, 1.5, 3.0] {
            for k in [1, 2, 5] {
                let closed = geometric_fourier_identities(alpha, k).unwrap();
                let quad = geometric_fourier_quadrature(alpha, k, 4096).unwrap();
                assert!(
                    (quad - closed).abs() <= 1e-8 * (1.0 + closed.abs()),
                    "α={alpha} k={k}: {quad} vs {closed}"
                );
            }
        }
    }
}

