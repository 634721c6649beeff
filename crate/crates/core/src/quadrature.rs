//! Global adaptive Simpson quadrature.
//!
//! The interval is split into a few initial panels; each panel carries a
//! Simpson estimate on the whole panel and on its two halves, and the
//! difference of the two gives the local error estimate. The panel with the
//! largest estimate is bisected until the summed estimate drops below
//! `relative_tolerance * |integral|`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const INITIAL_PANELS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    relative_tolerance: f64,
    max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            relative_tolerance: 1e-9,
            max_subdivisions: 1 << 14,
        }
    }
}

impl QuadratureSpec {
    pub fn new(relative_tolerance: f64, max_subdivisions: usize) -> Result<Self> {
        if !(relative_tolerance > 0.0 && relative_tolerance <= 1e-3) {
            return Err(Error::invalid(
                "quadrature.relative_tolerance",
                format!("must lie in (0, 1e-3] (got {relative_tolerance})"),
            ));
        }
        if max_subdivisions < 16 {
            return Err(Error::invalid(
                "quadrature.max_subdivisions",
                format!("must be >= 16 (got {max_subdivisions})"),
            ));
        }
        Ok(Self {
            relative_tolerance,
            max_subdivisions,
        })
    }

    pub fn relative_tolerance(&self) -> f64 {
        self.relative_tolerance
    }

    pub fn max_subdivisions(&self) -> usize {
        self.max_subdivisions
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    /// Sum of the local `|S_halves - S_whole| / 15` estimates.
    pub error_estimate: f64,
    pub subdivisions: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    // f at a, a+h/4, a+h/2, a+3h/4, b
    f: [f64; 5],
    value: f64,
    error: f64,
}

impl Panel {
    fn new(a: f64, b: f64, f: [f64; 5]) -> Self {
        let h = b - a;
        let whole = h / 6.0 * (f[0] + 4.0 * f[2] + f[4]);
        let halves = h / 12.0 * (f[0] + 4.0 * f[1] + 2.0 * f[2] + 4.0 * f[3] + f[4]);
        let diff = halves - whole;
        Self {
            a,
            b,
            f,
            value: halves + diff / 15.0,
            error: diff.abs() / 15.0,
        }
    }

    fn split<F: Fn(f64) -> f64>(&self, integrand: &F) -> (Panel, Panel) {
        let m = 0.5 * (self.a + self.b);
        let q = 0.25 * (self.b - self.a);
        let left_mid = integrand(self.a + 0.5 * q);
        let right_mid = integrand(m + 0.5 * q);
        let left = Panel::new(
            self.a,
            m,
            [self.f[0], left_mid, self.f[1], integrand(self.a + 1.5 * q), self.f[2]],
        );
        let right = Panel::new(
            m,
            self.b,
            [self.f[2], right_mid, self.f[3], integrand(m + 1.5 * q), self.f[4]],
        );
        (left, right)
    }
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Integrates `f` over `[a, b]`.
///
/// Returns [`Error::Quadrature`] with the last error estimate when the
/// subdivision budget runs out before the tolerance is met.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<Integral> {
    if a == b {
        return Ok(Integral {
            value: 0.0,
            error_estimate: 0.0,
            subdivisions: 0,
        });
    }
    let width = (b - a) / INITIAL_PANELS as f64;
    let mut heap = BinaryHeap::with_capacity(2 * INITIAL_PANELS);
    let mut left_value = f(a);
    for i in 0..INITIAL_PANELS {
        let pa = a + width * i as f64;
        let pb = if i + 1 == INITIAL_PANELS {
            b
        } else {
            a + width * (i + 1) as f64
        };
        let h = pb - pa;
        let right_value = f(pb);
        let samples = [
            left_value,
            f(pa + 0.25 * h),
            f(pa + 0.5 * h),
            f(pa + 0.75 * h),
            right_value,
        ];
        heap.push(Panel::new(pa, pb, samples));
        left_value = right_value;
    }

    let (mut value, mut error) = totals(&heap);
    loop {
        if error <= spec.relative_tolerance * value.abs() {
            // running sums drift; confirm against a fresh summation
            (value, error) = totals(&heap);
            if error <= spec.relative_tolerance * value.abs() {
                return Ok(Integral {
                    value,
                    error_estimate: error,
                    subdivisions: heap.len(),
                });
            }
        }
        if !value.is_finite() || !error.is_finite() || heap.len() >= spec.max_subdivisions {
            let (_, error) = totals(&heap);
            return Err(Error::Quadrature {
                estimate: error,
                subdivisions: heap.len(),
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let (l, r) = worst.split(&f);
        value += l.value + r.value - worst.value;
        error += l.error + r.error - worst.error;
        heap.push(l);
        heap.push(r);
    }
}

fn totals(heap: &BinaryHeap<Panel>) -> (f64, f64) {
    let mut value = 0.0;
    let mut error = 0.0;
    for p in heap.iter() {
        value += p.value;
        error += p.error;
    }
    (value, error)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_up_to_cubic_is_exact() {
        let spec = QuadratureSpec::default();
        let r = integrate(|x| 3.0 * x * x * x - x + 2.0, -1.0, 2.0, &spec).unwrap();
        // 3/4 (16 - 1) - (4 - 1)/2 + 6
        assert!((r.value - 15.75).abs() < 1e-13);
    }

    #[test]
    fn gaussian_bump_near_endpoint() {
        let spec = QuadratureSpec::default();
        // int_0^50 exp(-c (2500 - r^2)) 2 c r dr = 1 - exp(-2500 c)
        let c = std::f64::consts::PI * 1e-2;
        let r = integrate(|x| (-c * (2500.0 - x * x)).exp() * 2.0 * c * x, 0.0, 50.0, &spec).unwrap();
        let exact = 1.0 - (-2500.0 * c).exp();
        assert!((r.value - exact).abs() <= 1e-9 * exact, "{} vs {exact}", r.value);
        assert!((r.value - exact).abs() <= r.error_estimate.max(1e-15));
    }

    #[test]
    fn zero_integrand_converges_immediately() {
        let r = integrate(|_| 0.0, 0.0, 10.0, &QuadratureSpec::default()).unwrap();
        assert_eq!(r.value, 0.0);
        assert_eq!(r.error_estimate, 0.0);
    }

    #[test]
    fn budget_exhaustion_reports_estimate() {
        let spec = QuadratureSpec::new(1e-12, 16).unwrap();
        let err = integrate(|x: f64| x.sqrt().sin() / (x + 1e-3), 0.0, 100.0, &spec).unwrap_err();
        match err {
            Error::Quadrature { estimate, subdivisions } => {
                assert!(estimate > 0.0);
                assert!(subdivisions >= 16);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn spec_bounds() {
        assert!(QuadratureSpec::new(0.0, 100).is_err());
        assert!(QuadratureSpec::new(1e-2, 100).is_err());
        assert!(QuadratureSpec::new(1e-6, 8).is_err());
        assert!(QuadratureSpec::new(1e-3, 16).is_ok());
    }
}
