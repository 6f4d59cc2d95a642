//! Gradient methods as fixed-point iterations of contractive operators.
//!
//! The step operator `T_α : x ↦ x − α∇f(x)` has the minimizer as its unique
//! fixed point, and on the class F_{L,U} it contracts distances by
//!
//! ```text
//! q(α) = max{|1 − Uα|, |1 − Lα|},
//! ```
//!
//! minimized at α* = 2/(L+U) where q* = (κ−1)/(κ+1). Running the iteration
//! is therefore a contraction-mapping argument made executable: per-step
//! error shrinks geometrically, and the driver records the whole trajectory
//! so the rate curves can be checked pointwise, not just asymptotically.
//!
//! Heavy-Ball momentum lifts the same idea to the stacked space R^{2n} with
//! step and momentum weights α̃ = 4/(√U+√L)², β̃ = ((√U−√L)/(√U+√L))²,
//! trading the factor (κ−1)/(κ+1) for (√κ−1)/(√κ+1) at the cost of a
//! non-normal operator — hence the k·rateᵏ envelope instead of a pure
//! geometric one.

use crate::error::{Error, Result};
use crate::linalg::{all_finite, axpy, dist, norm};
use crate::objective::{SmoothnessBounds, SmoothObjective};
use crate::tol;

/// The step map `x ↦ x − α∇f(x)`. Any nonzero α is admitted — divergent
/// operators are legal objects of study here; only the iteration driver
/// cares whether q(α) < 1.
#[derive(Clone, Copy, Debug)]
pub struct GradientStepOperator {
    alpha: f64,
}

impl GradientStepOperator {
    pub fn new(alpha: f64) -> Result<Self> {
        if !alpha.is_finite() {
            return Err(Error::NonFinite { context: "step size" });
        }
        if alpha == 0.0 {
            return Err(Error::invalid("alpha", "step size must be nonzero"));
        }
        Ok(GradientStepOperator { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// One application: `x − α∇f(x)`. Points with zero gradient map to
    /// themselves.
    pub fn apply(&self, f: &dyn SmoothObjective, x: &[f64]) -> Result<Vec<f64>> {
        let g = f.gradient(x)?;
        Ok(axpy(x, -self.alpha, &g))
    }
}

/// Contraction factor `q(α) = max{|1−Uα|, |1−Lα|}` of the step map on
/// F_{L,U}.
///
/// # Example
/// ```
/// use contractix::fixedpoint::contraction_factor;
/// use contractix::objective::SmoothnessBounds;
/// let b = SmoothnessBounds::new(1.0, 100.0).unwrap();
/// assert_eq!(contraction_factor(2.0 / 101.0, b), 99.0 / 101.0);
/// ```
pub fn contraction_factor(alpha: f64, bounds: SmoothnessBounds) -> f64 {
    let a = (1.0 - bounds.u() * alpha).abs();
    let b = (1.0 - bounds.l() * alpha).abs();
    a.max(b)
}

/// The minimizing step size and its contraction factor:
/// `α* = 2/(L+U)`, `q* = (κ−1)/(κ+1)`.
///
/// # Example
/// ```
/// use contractix::fixedpoint::optimal_step;
/// use contractix::objective::SmoothnessBounds;
/// let (alpha, q) = optimal_step(SmoothnessBounds::new(2.0, 8.0).unwrap());
/// assert_eq!(alpha, 0.2);
/// assert_eq!(q, 0.6);
/// ```
pub fn optimal_step(bounds: SmoothnessBounds) -> (f64, f64) {
    let alpha = 2.0 / (bounds.l() + bounds.u());
    let q = (bounds.kappa() - 1.0) / (bounds.kappa() + 1.0);
    (alpha, q)
}

/// Geometric error envelope of gradient descent at the optimal step:
/// `((κ−1)/(κ+1))^k · initial_error`.
pub fn gd_upper_bound(k: usize, kappa: f64, initial_error: f64) -> f64 {
    let r = (kappa - 1.0) / (kappa + 1.0);
    r.powi(k as i32) * initial_error
}

/// Heavy-Ball step and momentum weights tuned to (L, U).
///
/// # Example
/// ```
/// use contractix::fixedpoint::HeavyBallParams;
/// use contractix::objective::SmoothnessBounds;
/// let p = HeavyBallParams::for_bounds(SmoothnessBounds::new(1.0, 4.0).unwrap());
/// assert!((p.alpha_tilde() - 4.0 / 9.0).abs() < 1e-15);
/// assert!((p.beta_tilde() - 1.0 / 9.0).abs() < 1e-15);
/// ```
#[derive(Clone, Copy, Debug)]
pub struct HeavyBallParams {
    alpha_tilde: f64,
    beta_tilde: f64,
}

impl HeavyBallParams {
    pub fn for_bounds(bounds: SmoothnessBounds) -> Self {
        let su = bounds.u().sqrt();
        let sl = bounds.l().sqrt();
        let denom = (su + sl) * (su + sl);
        HeavyBallParams {
            alpha_tilde: 4.0 / denom,
            beta_tilde: (su - sl) * (su - sl) / denom,
        }
    }

    pub fn alpha_tilde(&self) -> f64 {
        self.alpha_tilde
    }

    pub fn beta_tilde(&self) -> f64 {
        self.beta_tilde
    }

    /// √β̃, the per-step decay rate of the momentum iteration; equals
    /// (√κ−1)/(√κ+1) for the tuned parameters.
    pub fn momentum_rate(&self) -> f64 {
        self.beta_tilde.sqrt()
    }
}

/// Point in the doubled space R^{2n}, written (u, v) for (current,
/// previous).
#[derive(Clone, Debug, PartialEq)]
pub struct StackedState {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl StackedState {
    pub fn new(u: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if u.len() != v.len() {
            return Err(Error::DimensionMismatch {
                expected: u.len(),
                got: v.len(),
            });
        }
        Ok(StackedState { u, v })
    }
}

/// Gradient descent viewed in R^{2n}: `(u, v) ↦ (u − α∇f(u), u)`. The
/// second slot simply remembers the previous point, which is what momentum
/// needs.
pub fn apply_stacked(
    f: &dyn SmoothObjective,
    alpha: f64,
    s: &StackedState,
) -> Result<StackedState> {
    let g = f.gradient(&s.u)?;
    Ok(StackedState {
        u: axpy(&s.u, -alpha, &g),
        v: s.u.clone(),
    })
}

/// Heavy-Ball operator on the doubled space:
/// `(u, v) ↦ (u − α̃∇f(u) + β̃(u − v), u)`. Shares its fixed points with the
/// plain step map.
pub fn apply_hb_operator(
    f: &dyn SmoothObjective,
    p: &HeavyBallParams,
    s: &StackedState,
) -> Result<StackedState> {
    let g = f.gradient(&s.u)?;
    let u_next = hb_step(&s.u, &s.v, &g, p);
    Ok(StackedState {
        u: u_next,
        v: s.u.clone(),
    })
}

/// Shared step kernel so the R^n driver and the stacked operator are the
/// same floating-point expression, not merely the same formula.
fn hb_step(x: &[f64], x_prev: &[f64], g: &[f64], p: &HeavyBallParams) -> Vec<f64> {
    x.iter()
        .zip(x_prev)
        .zip(g)
        .map(|((&xi, &vi), &gi)| xi - p.alpha_tilde * gi + p.beta_tilde * (xi - vi))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MethodKind {
    Gd,
    Hb,
    Stacked,
    Custom,
}

/// Step parameters recorded alongside a trace.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StepMeta {
    Gd { alpha: f64 },
    Hb { alpha: f64, beta: f64 },
}

/// How a run ended. Divergence is an outcome, not an input error: runs with
/// q(α) ≥ 1 are legal and produce a partial trace plus this flag.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunStatus {
    /// Gradient tolerance met at iterate `at_iter`.
    Converged { at_iter: usize },
    /// Budget exhausted before the tolerance was met.
    BudgetExhausted,
    /// Iterate `at_iter` was non-finite or exceeded the norm guard; it is
    /// present in the trace when finite, omitted otherwise.
    Diverged { at_iter: usize },
}

/// Stopping rule for the iteration drivers: a step budget plus the
/// gradient-norm certificate.
#[derive(Clone, Copy, Debug)]
pub struct StopRule {
    pub max_iters: usize,
    pub grad_tol: f64,
}

impl StopRule {
    pub fn new(max_iters: usize, grad_tol: f64) -> Result<Self> {
        if max_iters == 0 {
            return Err(Error::invalid("max_iters", "budget must be ≥ 1"));
        }
        if !(grad_tol.is_finite() && grad_tol > 0.0) {
            return Err(Error::invalid(
                "grad_tol",
                format!("must be a positive real, got {grad_tol}"),
            ));
        }
        Ok(StopRule {
            max_iters,
            grad_tol,
        })
    }
}

/// Reference point that per-iterate errors are measured against.
#[derive(Clone, Copy, Debug)]
pub enum Reference<'a> {
    /// A verified minimizer; errors are exact distances to the optimum.
    Minimizer(&'a [f64]),
    /// Stand-in obtained from a long reference run; errors are approximate
    /// and flagged as such in the trace.
    Approximate(&'a [f64]),
}

impl Reference<'_> {
    fn point(&self) -> &[f64] {
        match self {
            Reference::Minimizer(p) | Reference::Approximate(p) => p,
        }
    }

    fn approximate(&self) -> bool {
        matches!(self, Reference::Approximate(_))
    }
}

/// Per-iterate distances ‖x^(k) − x0‖ with a flag telling whether x0 was a
/// verified minimizer or a long-run stand-in.
#[derive(Clone, Debug)]
pub struct ErrorSeries {
    pub values: Vec<f64>,
    pub approximate: bool,
}

/// Complete record of one iteration run: every iterate, its gradient norm,
/// optionally its distance to the reference point, and how the run ended.
#[derive(Clone, Debug)]
pub struct IterationTrace {
    pub method: MethodKind,
    pub step: StepMeta,
    pub iterates: Vec<Vec<f64>>,
    pub errors: Option<ErrorSeries>,
    pub grad_norms: Vec<f64>,
    pub status: RunStatus,
}

impl IterationTrace {
    /// Number of recorded iterates (steps taken + 1 for a full run).
    pub fn len(&self) -> usize {
        self.iterates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.iterates.is_empty()
    }

    pub fn final_iterate(&self) -> Option<&[f64]> {
        self.iterates.last().map(Vec::as_slice)
    }
}

enum NextIterate {
    Gd(GradientStepOperator),
    Hb {
        params: HeavyBallParams,
        prev: Vec<f64>,
    },
}

fn drive(
    f: &dyn SmoothObjective,
    mut stepper: NextIterate,
    x_init: &[f64],
    stop: &StopRule,
    reference: Option<Reference>,
    method: MethodKind,
    step_meta: StepMeta,
) -> Result<IterationTrace> {
    if x_init.len() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            got: x_init.len(),
        });
    }
    if !all_finite(x_init) {
        return Err(Error::NonFinite {
            context: "initial iterate",
        });
    }
    let mut iterates: Vec<Vec<f64>> = Vec::new();
    let mut errors = reference.map(|r| ErrorSeries {
        values: Vec::new(),
        approximate: r.approximate(),
    });
    let mut grad_norms: Vec<f64> = Vec::new();
    let mut x = x_init.to_vec();
    let status = loop {
        let k = iterates.len();
        if !all_finite(&x) {
            break RunStatus::Diverged { at_iter: k };
        }
        iterates.push(x.clone());
        if let (Some(series), Some(r)) = (errors.as_mut(), reference.as_ref()) {
            series.values.push(dist(&x, r.point()));
        }
        let g = f.gradient(&x)?;
        let gn = norm(&g);
        grad_norms.push(gn);
        if gn <= stop.grad_tol {
            break RunStatus::Converged { at_iter: k };
        }
        if norm(&x) > tol::DIVERGENCE_NORM {
            break RunStatus::Diverged { at_iter: k };
        }
        if k == stop.max_iters {
            break RunStatus::BudgetExhausted;
        }
        x = match &mut stepper {
            NextIterate::Gd(op) => axpy(&x, -op.alpha(), &g),
            NextIterate::Hb { params, prev } => {
                let next = hb_step(&x, prev, &g, params);
                *prev = std::mem::replace(&mut x, Vec::new());
                next
            }
        };
    };
    Ok(IterationTrace {
        method,
        step: step_meta,
        iterates,
        errors,
        grad_norms,
        status,
    })
}

/// Runs `x^(k+1) = x^(k) − α∇f(x^(k))` until the gradient certificate, the
/// budget, or the divergence guard fires. The trace always contains every
/// finite iterate produced, divergent runs included.
pub fn run_fixed_point(
    f: &dyn SmoothObjective,
    op: &GradientStepOperator,
    x_init: &[f64],
    stop: &StopRule,
    reference: Option<Reference>,
) -> Result<IterationTrace> {
    drive(
        f,
        NextIterate::Gd(*op),
        x_init,
        stop,
        reference,
        MethodKind::Gd,
        StepMeta::Gd { alpha: op.alpha() },
    )
}

/// Predecessor convention for the first Heavy-Ball step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum HbInit {
    /// x^(−1) = 0: the convention all rate statements here assume.
    #[default]
    ZeroPredecessor,
    /// x^(−1) = x^(0): common practice, kept behind an explicit flag for
    /// comparison runs.
    RepeatStart,
}

/// Runs `x^(k+1) = x^(k) − α̃∇f(x^(k)) + β̃(x^(k) − x^(k−1))`. Identical in
/// floating point to iterating [`apply_hb_operator`] on the stacked pair and
/// reading off the first component.
pub fn run_heavy_ball(
    f: &dyn SmoothObjective,
    params: &HeavyBallParams,
    x_init: &[f64],
    stop: &StopRule,
    init: HbInit,
    reference: Option<Reference>,
) -> Result<IterationTrace> {
    let prev = match init {
        HbInit::ZeroPredecessor => vec![0.0; x_init.len()],
        HbInit::RepeatStart => x_init.to_vec(),
    };
    drive(
        f,
        NextIterate::Hb {
            params: *params,
            prev,
        },
        x_init,
        stop,
        reference,
        MethodKind::Hb,
        StepMeta::Hb {
            alpha: params.alpha_tilde(),
            beta: params.beta_tilde(),
        },
    )
}

/// Heavy-Ball error envelope `C(κ)·k·((√κ−1)/(√κ+1))^k·(err0 + err−1)` with
/// `C(κ) = 4(2 + 2β̃ + α̃)(√κ+1)/(√κ−1)`.
///
/// Only defined for k ≥ 1 and κ > 1: the constant blows up as κ → 1, where
/// momentum degenerates to plain descent anyway.
pub fn hb_upper_bound(
    k: usize,
    bounds: SmoothnessBounds,
    err0: f64,
    err_minus1: f64,
) -> Result<f64> {
    if k == 0 {
        return Err(Error::invalid("k", "envelope starts at k = 1"));
    }
    if !(err0 >= 0.0 && err_minus1 >= 0.0) {
        return Err(Error::invalid("err", "initial errors must be ≥ 0"));
    }
    let kappa = bounds.kappa();
    if kappa <= 1.0 {
        return Err(Error::Unsupported {
            detail: "κ = 1: the momentum envelope constant is undefined".into(),
        });
    }
    let sk = kappa.sqrt();
    let p = HeavyBallParams::for_bounds(bounds);
    let c = 4.0 * (2.0 + 2.0 * p.beta_tilde() + p.alpha_tilde()) * (sk + 1.0) / (sk - 1.0);
    let z = (sk - 1.0) / (sk + 1.0);
    Ok(c * k as f64 * z.powi(k as i32) * (err0 + err_minus1))
}

/// Optimality certificate ‖∇f(x)‖ — by the fixed-point identity this equals
/// ‖x − T_α x‖/|α| for every α, so a single gradient norm certifies
/// stationarity for the whole operator family.
pub fn fixed_point_residual(f: &dyn SmoothObjective, x: &[f64]) -> Result<f64> {
    Ok(norm(&f.gradient(x)?))
}

/// The three theoretical rate curves sampled at k = 0..=k_max, built by
/// running products so consecutive entries are exact ratios of each other —
/// the property the exported CSV is tested against.
#[derive(Clone, Debug)]
pub struct RateBounds {
    pub kappa: f64,
    /// Geometric descent envelope; index k.
    pub gd_upper: Vec<f64>,
    /// Momentum envelope; `None` at k = 0 and everywhere when κ = 1.
    pub hb_upper: Vec<Option<f64>>,
    /// Constructive floor no first-order method can beat; index k.
    pub fom_lower: Vec<f64>,
    pub gd_init: f64,
    /// Combined err0 + err−1 scalar feeding the momentum envelope.
    pub hb_init_sum: f64,
    pub lower_init: f64,
}

impl RateBounds {
    pub fn curves(
        kappa: f64,
        k_max: usize,
        gd_init: f64,
        hb_init_sum: f64,
        lower_init: f64,
    ) -> Result<Self> {
        if !(kappa.is_finite() && kappa >= 1.0) {
            return Err(Error::invalid("kappa", format!("must be ≥ 1, got {kappa}")));
        }
        for (name, v) in [
            ("gd_init", gd_init),
            ("hb_init_sum", hb_init_sum),
            ("lower_init", lower_init),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(name, format!("must be ≥ 0, got {v}")));
            }
        }
        let r = (kappa - 1.0) / (kappa + 1.0);
        let sk = kappa.sqrt();
        let z = (sk - 1.0) / (sk + 1.0);
        let lower_scale = lower_init * (1.0 - 1.0 / sk) / (1.0 + sk);
        let hb_scale = if kappa > 1.0 {
            let b = SmoothnessBounds::new(1.0, kappa)?;
            let p = HeavyBallParams::for_bounds(b);
            Some(
                4.0 * (2.0 + 2.0 * p.beta_tilde() + p.alpha_tilde()) * (sk + 1.0) / (sk - 1.0)
                    * hb_init_sum,
            )
        } else {
            None
        };

        let mut gd_upper = Vec::with_capacity(k_max + 1);
        let mut hb_upper = Vec::with_capacity(k_max + 1);
        let mut fom_lower = Vec::with_capacity(k_max + 1);
        let mut gd = gd_init;
        let mut zpow = 1.0;
        for k in 0..=k_max {
            gd_upper.push(gd);
            fom_lower.push(lower_scale * zpow);
            hb_upper.push(match (k, hb_scale) {
                (0, _) | (_, None) => None,
                (_, Some(c)) => Some(c * k as f64 * zpow),
            });
            gd *= r;
            zpow *= z;
        }
        Ok(RateBounds {
            kappa,
            gd_upper,
            hb_upper,
            fom_lower,
            gd_init,
            hb_init_sum,
            lower_init,
        })
    }

    pub fn len(&self) -> usize {
        self.gd_upper.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gd_upper.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{Matrix, SymmetricMatrix};
    use crate::objective::QuadraticObjective;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn diag_quadratic(eigs: &[f64], lin: Vec<f64>) -> QuadraticObjective {
        let l = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
        let u = eigs.iter().cloned().fold(0.0, f64::max);
        QuadraticObjective::new(
            SymmetricMatrix::from_diagonal(eigs),
            lin,
            0.0,
            SmoothnessBounds::new(l, u).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn step_map_hand_arithmetic() {
        // ∇f = 0 → fixed point
        let f = diag_quadratic(&[2.0], vec![-2.0]);
        let op = GradientStepOperator::new(0.3).unwrap();
        assert_eq!(op.apply(&f, &[1.0]).unwrap(), vec![1.0]);
        // f = ½x², α = 1: one exact step
        let g = diag_quadratic(&[1.0], vec![0.0]);
        let op = GradientStepOperator::new(1.0).unwrap();
        assert_eq!(op.apply(&g, &[5.0]).unwrap(), vec![0.0]);
        // f = x², α = 1/U
        let h = diag_quadratic(&[2.0], vec![0.0]);
        let op = GradientStepOperator::new(0.5).unwrap();
        assert_eq!(op.apply(&h, &[1.0]).unwrap(), vec![0.0]);
        assert!(GradientStepOperator::new(0.0).is_err());
    }

    #[test]
    fn contraction_factor_hand_values() {
        let unit = SmoothnessBounds::new(1.0, 1.0).unwrap();
        assert_eq!(contraction_factor(1.0, unit), 0.0);
        let wide = SmoothnessBounds::new(1.0, 100.0).unwrap();
        assert_eq!(contraction_factor(2.0 / 101.0, wide), 99.0 / 101.0);
        let two = SmoothnessBounds::new(1.0, 2.0).unwrap();
        assert_eq!(contraction_factor(1.0, two), 1.0);
    }

    #[test]
    fn optimal_step_hand_values() {
        assert_eq!(optimal_step(SmoothnessBounds::new(1.0, 1.0).unwrap()), (1.0, 0.0));
        let (a, q) = optimal_step(SmoothnessBounds::new(1.0, 100.0).unwrap());
        assert_eq!(a, 2.0 / 101.0);
        assert_eq!(q, 99.0 / 101.0);
        assert_eq!(optimal_step(SmoothnessBounds::new(2.0, 8.0).unwrap()), (0.2, 0.6));
    }

    #[test]
    fn optimal_step_minimizes_the_factor() {
        let bounds = SmoothnessBounds::new(1.0, 7.0).unwrap();
        let (a_star, q_star) = optimal_step(bounds);
        assert!((q_star - contraction_factor(a_star, bounds)).abs() <= 1e-14);
        for i in 0..200 {
            let alpha = -0.1 + 0.002 * i as f64;
            assert!(contraction_factor(alpha, bounds) >= q_star - 1e-14);
        }
    }

    #[test]
    fn contraction_inequality_on_sampled_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..5 {
            let n = rng.gen_range(1..=6);
            let eigs: Vec<f64> = (0..n).map(|_| rng.gen_range(1.0..5.0)).collect();
            let v = crate::linalg::random_orthogonal(&mut rng, n);
            let mut m = Matrix::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    let mut acc = 0.0;
                    for (l, e) in eigs.iter().enumerate() {
                        acc += v[(l, i)] * e * v[(l, j)];
                    }
                    m[(i, j)] = acc;
                }
            }
            let f = QuadraticObjective::new(
                SymmetricMatrix::symmetrized(&m),
                vec![0.0; n],
                0.0,
                SmoothnessBounds::new(1.0, 5.0).unwrap(),
            )
            .unwrap();
            let bounds = f.bounds();
            let (a_star, _) = optimal_step(bounds);
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
            for i in 0..20 {
                let alpha = if i == 0 { a_star } else { rng.gen_range(-0.5..1.5) };
                if alpha == 0.0 {
                    continue;
                }
                let op = GradientStepOperator::new(alpha).unwrap();
                let tx = op.apply(&f, &x).unwrap();
                let ty = op.apply(&f, &y).unwrap();
                let lhs = dist(&tx, &ty);
                let rhs = contraction_factor(alpha, bounds) * dist(&x, &y) + 1e-12;
                assert!(lhs <= rhs, "α={alpha}: {lhs} > {rhs}");
            }
        }
    }

    #[test]
    fn perfectly_conditioned_converges_in_one_step() {
        let f = diag_quadratic(&[3.0, 3.0], vec![-3.0, 0.0]);
        let (a_star, _) = optimal_step(f.bounds());
        let op = GradientStepOperator::new(a_star).unwrap();
        let stop = StopRule::new(50, 1e-9).unwrap();
        let x0 = f.minimizer().unwrap();
        let trace =
            run_fixed_point(&f, &op, &[5.0, -2.0], &stop, Some(Reference::Minimizer(&x0)))
                .unwrap();
        assert_eq!(trace.status, RunStatus::Converged { at_iter: 1 });
        assert!(trace.errors.as_ref().unwrap().values[1] <= 1e-12);
    }

    #[test]
    fn gd_trace_respects_geometric_envelope() {
        let f = diag_quadratic(&[1.0, 100.0], vec![0.0, 0.0]);
        let (a_star, q_star) = optimal_step(f.bounds());
        let op = GradientStepOperator::new(a_star).unwrap();
        let stop = StopRule::new(500, 1e-14).unwrap();
        let x0 = vec![0.0, 0.0];
        let trace = run_fixed_point(
            &f,
            &op,
            &[1.0, 1.0],
            &stop,
            Some(Reference::Minimizer(&x0)),
        )
        .unwrap();
        assert_eq!(trace.status, RunStatus::BudgetExhausted);
        assert_eq!(trace.len(), 501);
        let errs = &trace.errors.as_ref().unwrap().values;
        let mut envelope = errs[0];
        for (k, err) in errs.iter().enumerate() {
            assert!(
                *err <= envelope * (1.0 + 1e-10),
                "k={k}: {err} > {envelope}"
            );
            envelope *= q_star;
        }
    }

    #[test]
    fn oversized_step_diverges_with_partial_trace() {
        let f = diag_quadratic(&[1.0, 100.0], vec![0.0, 0.0]);
        let op = GradientStepOperator::new(2.0).unwrap();
        let stop = StopRule::new(500, 1e-12).unwrap();
        let x0 = vec![0.0, 0.0];
        let trace = run_fixed_point(
            &f,
            &op,
            &[1.0, 1.0],
            &stop,
            Some(Reference::Minimizer(&x0)),
        )
        .unwrap();
        assert!(matches!(trace.status, RunStatus::Diverged { .. }));
        assert!(trace.len() < 20, "should blow past the guard quickly");
        let errs = &trace.errors.as_ref().unwrap().values;
        assert!(errs.iter().any(|e| *e > 1e6));
    }

    #[test]
    fn distinct_starts_converge_to_the_same_point() {
        let f = diag_quadratic(&[1.0, 2.0, 4.0], vec![0.5, -1.0, 2.0]);
        let (a_star, _) = optimal_step(f.bounds());
        let op = GradientStepOperator::new(a_star).unwrap();
        let stop = StopRule::new(400, 1e-10).unwrap();
        let t1 = run_fixed_point(&f, &op, &[5.0, 5.0, 5.0], &stop, None).unwrap();
        let t2 = run_fixed_point(&f, &op, &[-3.0, 7.0, 0.1], &stop, None).unwrap();
        assert!(matches!(t1.status, RunStatus::Converged { .. }));
        assert!(matches!(t2.status, RunStatus::Converged { .. }));
        let gap = dist(t1.final_iterate().unwrap(), t2.final_iterate().unwrap());
        assert!(gap <= 2.0 * stop.grad_tol / f.bounds().l());
    }

    #[test]
    fn hb_params_hand_values() {
        let unit = HeavyBallParams::for_bounds(SmoothnessBounds::new(1.0, 1.0).unwrap());
        assert_eq!(unit.alpha_tilde(), 1.0);
        assert_eq!(unit.beta_tilde(), 0.0);
        let p = HeavyBallParams::for_bounds(SmoothnessBounds::new(1.0, 4.0).unwrap());
        assert!((p.alpha_tilde() - 4.0 / 9.0).abs() <= 1e-15);
        assert!((p.beta_tilde() - 1.0 / 9.0).abs() <= 1e-15);
        let wide = HeavyBallParams::for_bounds(SmoothnessBounds::new(1.0, 100.0).unwrap());
        assert!((wide.momentum_rate() - 9.0 / 11.0).abs() <= 1e-15);
    }

    #[test]
    fn momentum_rate_identity_across_conditionings() {
        for kappa in [1.5, 4.0, 100.0, 1e4] {
            let b = SmoothnessBounds::new(1.0, kappa).unwrap();
            let p = HeavyBallParams::for_bounds(b);
            let sk = kappa.sqrt();
            let expected = (sk - 1.0) / (sk + 1.0);
            let rel = (p.momentum_rate() - expected).abs() / expected.max(1e-300);
            assert!(rel <= 1e-12, "κ={kappa}: rel {rel:e}");
            let gd_rate = (kappa - 1.0) / (kappa + 1.0);
            assert!(p.momentum_rate() < gd_rate, "κ={kappa}: not accelerated");
        }
    }

    #[test]
    fn stacked_pair_reproduces_gd_history() {
        let f = diag_quadratic(&[1.0, 3.0], vec![1.0, -2.0]);
        let (a_star, _) = optimal_step(f.bounds());
        let op = GradientStepOperator::new(a_star).unwrap();
        let stop = StopRule::new(10, 1e-16).unwrap();
        let trace = run_fixed_point(&f, &op, &[2.0, -1.0], &stop, None).unwrap();

        let mut s = StackedState::new(vec![2.0, -1.0], vec![99.0, 99.0]).unwrap();
        let first = apply_stacked(&f, a_star, &s).unwrap();
        assert_eq!(first.u, op.apply(&f, &s.u).unwrap());
        for k in 1..trace.len() {
            s = apply_stacked(&f, a_star, &s).unwrap();
            for i in 0..2 {
                assert!((s.u[i] - trace.iterates[k][i]).abs() <= 1e-14);
                assert!((s.v[i] - trace.iterates[k - 1][i]).abs() <= 1e-14);
            }
        }
    }

    #[test]
    fn hb_operator_preserves_fixed_point_and_degenerates() {
        let f = diag_quadratic(&[1.0, 4.0], vec![-1.0, -4.0]);
        let x0 = f.minimizer().unwrap();
        let p = HeavyBallParams::for_bounds(f.bounds());
        let s = StackedState::new(x0.clone(), x0.clone()).unwrap();
        let next = apply_hb_operator(&f, &p, &s).unwrap();
        assert!(dist(&next.u, &x0) <= 1e-12);
        assert!(dist(&next.v, &x0) <= 1e-12);

        // β̃ = 0 collapses onto the plain stacked map.
        let flat = diag_quadratic(&[2.0, 2.0], vec![0.3, 0.3]);
        let p0 = HeavyBallParams::for_bounds(flat.bounds());
        assert_eq!(p0.beta_tilde(), 0.0);
        let s = StackedState::new(vec![1.0, -1.0], vec![0.5, 0.5]).unwrap();
        let a = apply_hb_operator(&flat, &p0, &s).unwrap();
        let b = apply_stacked(&flat, p0.alpha_tilde(), &s).unwrap();
        assert_eq!(a, b);

        // One momentum application, by hand: u − α̃Qu with u = v.
        let two = diag_quadratic(&[1.0, 4.0], vec![0.0, 0.0]);
        let p2 = HeavyBallParams::for_bounds(two.bounds());
        let s = StackedState::new(vec![1.0, 1.0], vec![1.0, 1.0]).unwrap();
        let out = apply_hb_operator(&two, &p2, &s).unwrap();
        assert!((out.u[0] - (1.0 - p2.alpha_tilde())).abs() <= 1e-15);
        assert!((out.u[1] - (1.0 - 4.0 * p2.alpha_tilde())).abs() <= 1e-15);
    }

    #[test]
    fn hb_run_matches_stacked_operator_bitwise() {
        let f = diag_quadratic(&[1.0, 9.0], vec![0.7, -0.2]);
        let p = HeavyBallParams::for_bounds(f.bounds());
        let stop = StopRule::new(40, 1e-16).unwrap();
        let start = [1.5, -0.5];
        let trace = run_heavy_ball(&f, &p, &start, &stop, HbInit::ZeroPredecessor, None).unwrap();
        let mut s = StackedState::new(start.to_vec(), vec![0.0, 0.0]).unwrap();
        for k in 1..trace.len() {
            s = apply_hb_operator(&f, &p, &s).unwrap();
            assert_eq!(s.u, trace.iterates[k], "iterate {k}");
        }
    }

    #[test]
    fn hb_converges_in_one_step_when_perfectly_conditioned() {
        let f = diag_quadratic(&[2.0, 2.0], vec![-2.0, -4.0]);
        let p = HeavyBallParams::for_bounds(f.bounds());
        let stop = StopRule::new(50, 1e-9).unwrap();
        // Zero predecessor: momentum term β̃(x − 0) vanishes since β̃ = 0.
        let trace =
            run_heavy_ball(&f, &p, &[4.0, 4.0], &stop, HbInit::ZeroPredecessor, None).unwrap();
        assert_eq!(trace.status, RunStatus::Converged { at_iter: 1 });
    }

    #[test]
    fn hb_trace_respects_momentum_envelope_and_wins_the_race() {
        let f = diag_quadratic(&[1.0, 25.0], vec![0.0, 0.0]);
        let x0 = vec![0.0, 0.0];
        let bounds = f.bounds();
        let p = HeavyBallParams::for_bounds(bounds);
        let stop = StopRule::new(300, 1e-16).unwrap();
        let hb = run_heavy_ball(
            &f,
            &p,
            &[1.0, 1.0],
            &stop,
            HbInit::ZeroPredecessor,
            Some(Reference::Minimizer(&x0)),
        )
        .unwrap();
        let errs = &hb.errors.as_ref().unwrap().values;
        // x^(−1) = 0 is the minimizer here, so err−1 = 0.
        for (k, err) in errs.iter().enumerate().skip(1) {
            let bound = hb_upper_bound(k, bounds, errs[0], 0.0).unwrap();
            assert!(*err <= bound, "k={k}: {err} > {bound}");
        }

        let (a_star, _) = optimal_step(bounds);
        let op = GradientStepOperator::new(a_star).unwrap();
        let gd = run_fixed_point(
            &f,
            &op,
            &[1.0, 1.0],
            &stop,
            Some(Reference::Minimizer(&x0)),
        )
        .unwrap();
        let gd_errs = &gd.errors.as_ref().unwrap().values;
        let target = 1e-6;
        let first_below = |e: &[f64]| e.iter().position(|v| *v <= target);
        let hb_hit = first_below(errs).expect("momentum run reaches 1e-6");
        let gd_hit = first_below(gd_errs).unwrap_or(usize::MAX);
        assert!(hb_hit < gd_hit, "momentum {hb_hit} vs descent {gd_hit}");
    }

    #[test]
    fn hb_envelope_edge_cases() {
        let b = SmoothnessBounds::new(1.0, 4.0).unwrap();
        // C(4) = 4·(2 + 2/9 + 4/9)·3 = 32
        let v = hb_upper_bound(1, b, 1.0, 0.0).unwrap();
        let z = 1.0 / 3.0;
        assert!((v - 32.0 * z).abs() <= 1e-12);
        assert!(hb_upper_bound(0, b, 1.0, 0.0).is_err());
        let unit = SmoothnessBounds::new(2.0, 2.0).unwrap();
        assert!(matches!(
            hb_upper_bound(3, unit, 1.0, 1.0),
            Err(Error::Unsupported { .. })
        ));
        // k·z^k decays monotonically past its single interior maximum.
        let vals: Vec<f64> = (1..200)
            .map(|k| hb_upper_bound(k, b, 1.0, 1.0).unwrap())
            .collect();
        let peak = vals
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        for w in vals[peak..].windows(2) {
            assert!(w[1] <= w[0]);
        }
    }

    #[test]
    fn residual_is_gradient_norm_and_alpha_invariant() {
        let f = diag_quadratic(&[2.0], vec![-2.0]);
        let x0 = f.minimizer().unwrap();
        let lin_norm = norm(f.lin());
        assert!(fixed_point_residual(&f, &x0).unwrap() <= 1e-10 * (1.0 + lin_norm));

        let g = diag_quadratic(&[1.0], vec![0.0]);
        assert_eq!(fixed_point_residual(&g, &[3.0]).unwrap(), 3.0);

        let x = [3.0];
        let base = fixed_point_residual(&g, &x).unwrap();
        for alpha in [0.1, 1.0, 7.0] {
            let op = GradientStepOperator::new(alpha).unwrap();
            let tx = op.apply(&g, &x).unwrap();
            let via_operator = dist(&x, &tx) / alpha.abs();
            assert!((via_operator - base).abs() <= 1e-12 * base.max(1.0));
        }
    }

    #[test]
    fn rate_curves_have_exact_consecutive_ratios() {
        let rb = RateBounds::curves(100.0, 60, 1.0, 1.0, 1.0).unwrap();
        let r = 99.0 / 101.0;
        let z = 9.0 / 11.0;
        for k in 0..59 {
            let gd_ratio = rb.gd_upper[k + 1] / rb.gd_upper[k];
            assert!((gd_ratio - r).abs() <= 1e-15, "k={k}");
            let lo_ratio = rb.fom_lower[k + 1] / rb.fom_lower[k];
            assert!((lo_ratio - z).abs() <= 1e-15, "k={k}");
            assert!(rb.gd_upper[k + 1] < rb.gd_upper[k], "strict decrease");
        }
        assert!(rb.hb_upper[0].is_none());
        for k in 1..59 {
            let detrended = rb.hb_upper[k + 1].unwrap() / rb.hb_upper[k].unwrap() * k as f64
                / (k + 1) as f64;
            assert!((detrended - z).abs() <= 1e-14, "k={k}");
        }
    }

    #[test]
    fn rate_curves_degenerate_cleanly_at_kappa_one() {
        let rb = RateBounds::curves(1.0, 10, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(rb.gd_upper[0], 1.0);
        assert!(rb.gd_upper[1..].iter().all(|v| *v == 0.0));
        assert!(rb.hb_upper.iter().all(Option::is_none));
        assert!(rb.fom_lower.iter().all(|v| *v == 0.0));
        assert!(RateBounds::curves(0.5, 10, 1.0, 1.0, 1.0).is_err());
    }
}
