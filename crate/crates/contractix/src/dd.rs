//! Double-double arithmetic: unevaluated sums of two f64s giving ~31
//! significant decimal digits.
//!
//! Two verification oracles in this crate compare quantities whose true
//! values sit many orders of magnitude below what a plain f64 accumulation
//! can resolve (a periodic-trapezoid quadrature against a closed form, and
//! the finite-size gap of the hard-instance minimizer entries). This module
//! provides exactly the operations those oracles need — field arithmetic,
//! square root, a table of cos/sin at the n-th roots of unity, and pairwise
//! summation — and nothing more.
//!
//! Error model: `two_sum` and `two_prod` (via `f64::mul_add`) are exact;
//! each arithmetic operation below is accurate to a few units in the last
//! place of the 106-bit significand (~1e-32 relative).

use std::collections::HashMap;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

/// Double-double number: value = hi + lo with |lo| ≤ ulp(hi)/2.
///
/// Ordering derives field-by-field, which is the value ordering because the
/// representation is kept normalized.
#[derive(Clone, Copy, Debug, Default, PartialEq, PartialOrd)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

/// Exact sum: returns (s, e) with s = fl(a+b) and a+b = s+e exactly.
#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

/// Exact sum assuming |a| ≥ |b|.
#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let e = b - (s - a);
    (s, e)
}

/// Exact product: returns (p, e) with a·b = p+e exactly (uses fused
/// multiply-add, which is exactly rounded).
#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let e = a.mul_add(b, -p);
    (p, e)
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };
    /// π to double-double precision.
    pub const PI: Dd = Dd {
        hi: std::f64::consts::PI,
        lo: 1.2246467991473532e-16,
    };
    /// 2π to double-double precision.
    pub const TWO_PI: Dd = Dd {
        hi: 6.283185307179586,
        lo: 2.4492935982947064e-16,
    };

    #[inline]
    pub fn from_f64(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    /// Exact for n ≤ 2⁵³ (all integer magnitudes used in this crate).
    #[inline]
    pub fn from_usize(n: usize) -> Dd {
        Dd::from_f64(n as f64)
    }

    #[inline]
    fn renorm(hi: f64, lo: f64) -> Dd {
        let (h, l) = quick_two_sum(hi, lo);
        Dd { hi: h, lo: l }
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi
    }

    pub fn abs(self) -> Dd {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            -self
        } else {
            self
        }
    }

    /// Newton-corrected square root: full double-double accuracy from the
    /// f64 seed in a single step.
    pub fn sqrt(self) -> Dd {
        assert!(self.hi >= 0.0, "dd sqrt of negative value {:?}", self);
        if self.hi == 0.0 {
            return Dd::ZERO;
        }
        let s = Dd::from_f64(self.hi.sqrt());
        let e = (self - s * s) / (Dd::from_f64(2.0) * s);
        s + e
    }

    /// Integer power by repeated multiplication.
    pub fn powi(self, k: usize) -> Dd {
        let mut acc = Dd::ONE;
        for _ in 0..k {
            acc = acc * self;
        }
        acc
    }
}

impl Add for Dd {
    type Output = Dd;
    #[inline]
    fn add(self, rhs: Dd) -> Dd {
        let (s1, s2) = two_sum(self.hi, rhs.hi);
        let (t1, t2) = two_sum(self.lo, rhs.lo);
        let (s1, s2) = quick_two_sum(s1, s2 + t1);
        Dd::renorm(s1, s2 + t2)
    }
}

impl Sub for Dd {
    type Output = Dd;
    #[inline]
    fn sub(self, rhs: Dd) -> Dd {
        self + (-rhs)
    }
}

impl Neg for Dd {
    type Output = Dd;
    #[inline]
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Mul for Dd {
    type Output = Dd;
    #[inline]
    fn mul(self, rhs: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, rhs.hi);
        let e = e + (self.hi * rhs.lo + self.lo * rhs.hi);
        Dd::renorm(p, e)
    }
}

impl Div for Dd {
    type Output = Dd;
    #[inline]
    fn div(self, rhs: Dd) -> Dd {
        let q1 = self.hi / rhs.hi;
        let r = self - rhs * Dd::from_f64(q1);
        let q2 = r.hi / rhs.hi;
        let r = r - rhs * Dd::from_f64(q2);
        let q3 = r.hi / rhs.hi;
        let (s, e) = quick_two_sum(q1, q2);
        Dd::renorm(s, e + q3)
    }
}

/// cos(x) for |x| ≤ π/2 by Taylor series carried to ~1e-40.
fn cos_taylor(x: Dd) -> Dd {
    let x2 = x * x;
    let mut term = Dd::ONE;
    let mut sum = Dd::ONE;
    let mut m = 1usize;
    loop {
        term = -(term * x2) / Dd::from_usize((2 * m - 1) * (2 * m));
        sum = sum + term;
        if term.hi.abs() < 1e-40 || m > 60 {
            return sum;
        }
        m += 1;
    }
}

/// sin(x) for |x| ≤ π/2 by Taylor series carried to ~1e-40.
fn sin_taylor(x: Dd) -> Dd {
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    let mut m = 1usize;
    loop {
        term = -(term * x2) / Dd::from_usize((2 * m) * (2 * m + 1));
        sum = sum + term;
        if term.hi.abs() < 1e-40 || m > 60 {
            return sum;
        }
        m += 1;
    }
}

/// (cos(2πj/n), sin(2πj/n)) for j = 0..n, each entry computed independently
/// by quadrant reduction of the exact fraction j/n plus a Taylor evaluation
/// at an angle ≤ π/2 — no recurrence, so no error accumulation across the
/// table.
pub fn cos_sin_table(n: usize) -> Vec<(Dd, Dd)> {
    assert!(n >= 1, "table size must be positive");
    let n_dd = Dd::from_usize(n);
    (0..n)
        .map(|j| {
            let frac = Dd::from_usize(j) / n_dd;
            let (base, cs, ss) = if frac.hi <= 0.25 {
                (frac, 1.0, 1.0)
            } else if frac.hi <= 0.5 {
                (Dd::from_f64(0.5) - frac, -1.0, 1.0)
            } else if frac.hi <= 0.75 {
                (frac - Dd::from_f64(0.5), -1.0, -1.0)
            } else {
                (Dd::ONE - frac, 1.0, -1.0)
            };
            let angle = Dd::TWO_PI * base;
            let c = cos_taylor(angle);
            let s = sin_taylor(angle);
            (
                Dd::from_f64(cs) * c,
                Dd::from_f64(ss) * s,
            )
        })
        .collect()
}

/// Shared cache of trig tables; quadrature sweeps reuse the same n many
/// times and the per-entry construction is the expensive part.
pub fn cos_sin_table_cached(n: usize) -> Arc<Vec<(Dd, Dd)>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Vec<(Dd, Dd)>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().expect("trig table cache poisoned");
    map.entry(n).or_insert_with(|| Arc::new(cos_sin_table(n))).clone()
}

/// Pairwise (cascade) summation: rounding error grows with log₂(len) rather
/// than len, which keeps 2¹⁶-node quadrature sums near the double-double
/// noise floor.
pub fn pairwise_sum(xs: &[Dd]) -> Dd {
    match xs.len() {
        0 => Dd::ZERO,
        1 => xs[0],
        len if len <= 8 => {
            let mut acc = xs[0];
            for x in &xs[1..] {
                acc = acc + *x;
            }
            acc
        }
        len => {
            let mid = len / 2;
            pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dd_abs_f64(x: Dd) -> f64 {
        x.abs().hi
    }

    #[test]
    fn third_times_three_is_one() {
        let third = Dd::ONE / Dd::from_f64(3.0);
        let err = dd_abs_f64(third * Dd::from_f64(3.0) - Dd::ONE);
        assert!(err <= 1e-31, "error {err:e}");
    }

    #[test]
    fn sqrt_squares_back() {
        for v in [2.0, 3.0, 100.0, 0.1, 12345.6789] {
            let x = Dd::from_f64(v);
            let err = dd_abs_f64(x.sqrt() * x.sqrt() - x);
            assert!(err <= 1e-30 * v, "sqrt({v}) error {err:e}");
        }
    }

    #[test]
    fn pi_constant_matches_taylor_quadrant() {
        // cos(π/3) = 1/2 exactly; go through the same path as the tables.
        let angle = Dd::PI / Dd::from_f64(3.0);
        let err = dd_abs_f64(cos_taylor(angle) - Dd::from_f64(0.5));
        assert!(err <= 1e-31, "cos(π/3) error {err:e}");
    }

    #[test]
    fn table_satisfies_pythagoras_and_exact_points() {
        for n in [8usize, 12, 100, 1024] {
            let t = cos_sin_table(n);
            assert_eq!(t[0].0, Dd::ONE);
            assert_eq!(t[0].1, Dd::ZERO);
            if n % 2 == 0 {
                // cos(π) lands on the mirror branch: exactly −1.
                assert_eq!(t[n / 2].0.hi, -1.0);
                assert!(dd_abs_f64(t[n / 2].1) <= 1e-32);
            }
            for (c, s) in t.iter().step_by(n / 8 + 1) {
                let err = dd_abs_f64(*c * *c + *s * *s - Dd::ONE);
                assert!(err <= 1e-30, "c²+s² error {err:e} at n={n}");
            }
        }
    }

    #[test]
    fn table_agrees_with_f64_trig() {
        let n = 1000;
        let t = cos_sin_table(n);
        for j in (0..n).step_by(37) {
            // The f64 reference angle 2πj/n carries ~(angle · eps) of error
            // before cos/sin even run, so the comparison is loose.
            let angle = 2.0 * std::f64::consts::PI * (j as f64) / (n as f64);
            assert!((t[j].0.hi - angle.cos()).abs() <= 1e-14);
            assert!((t[j].1.hi - angle.sin()).abs() <= 1e-14);
        }
    }

    #[test]
    fn pairwise_sum_beats_naive_error() {
        let xs = vec![Dd::from_f64(0.1); 100_000];
        let total = pairwise_sum(&xs);
        // The reference is 100000 · fl(0.1) computed in dd, not 1e4: the two
        // differ by the f64 representation offset of 0.1 scaled up (~6e-13).
        let expected = Dd::from_usize(100_000) * Dd::from_f64(0.1);
        let err = dd_abs_f64(total - expected);
        assert!(err <= 1e-26, "pairwise error {err:e}");
    }

    #[test]
    fn ordering_matches_values() {
        let a = Dd::ONE / Dd::from_f64(3.0);
        let b = Dd::from_f64(1.0 / 3.0); // f64 rounding only
        assert!(a != b);
        assert!((a - b).abs() < Dd::from_f64(1e-16));
        assert!(Dd::from_f64(-1.0) < Dd::ZERO);
    }
}
