//! Quadrature primitives and small special-function helpers: iteratively
//! refined trapezoid rules, moments of complex Gaussians, and half-integer
//! gamma values.
//!
//! The trapezoid rule is used throughout the crate so that every integral
//! shares the same error model; refinement doubles the panel count until two
//! successive estimates agree and then applies one Richardson step.

use num_complex::Complex64 as C64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Hard cap on panel doublings inside the refining integrators.
const MAX_DOUBLINGS: usize = 22;

/// Compensated accumulator: plain sequential sums of a million panels
/// carry enough rounding to stall a 1e-12 convergence bar, so the
/// refiners sum with Kahan compensation.
struct Kahan {
    sum: f64,
    carry: f64,
}

impl Kahan {
    fn new() -> Self {
        Kahan {
            sum: 0.0,
            carry: 0.0,
        }
    }

    fn add(&mut self, term: f64) {
        let y = term - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }
}

struct KahanComplex {
    re: Kahan,
    im: Kahan,
}

impl KahanComplex {
    fn new() -> Self {
        KahanComplex {
            re: Kahan::new(),
            im: Kahan::new(),
        }
    }

    fn add(&mut self, term: C64) {
        self.re.add(term.re);
        self.im.add(term.im);
    }

    fn value(&self) -> C64 {
        C64::new(self.re.sum, self.im.sum)
    }
}

/// Composite trapezoid sum over uniformly spaced real samples.
pub fn trapezoid(samples: &[f64], dx: f64) -> f64 {
    if samples.len() < 2 {
        return 0.0;
    }
    let interior: f64 = samples[1..samples.len() - 1].iter().sum();
    dx * (interior + 0.5 * (samples[0] + samples[samples.len() - 1]))
}

/// Composite trapezoid sum over uniformly spaced complex samples.
pub fn trapezoid_complex(samples: &[C64], dx: f64) -> C64 {
    if samples.len() < 2 {
        return C64::new(0.0, 0.0);
    }
    let mut interior = C64::new(0.0, 0.0);
    for s in &samples[1..samples.len() - 1] {
        interior += s;
    }
    (interior + 0.5 * (samples[0] + samples[samples.len() - 1])) * dx
}

/// Trapezoid sum over samples on an arbitrary ascending grid.
pub fn trapezoid_nonuniform(xs: &[f64], fs: &[f64]) -> f64 {
    assert_eq!(xs.len(), fs.len());
    let mut acc = 0.0;
    for i in 1..xs.len() {
        acc += 0.5 * (xs[i] - xs[i - 1]) * (fs[i] + fs[i - 1]);
    }
    acc
}

/// Refining trapezoid rule for a real integrand.
///
/// Panels double until two successive estimates agree to the mixed tolerance;
/// the returned value carries one Richardson extrapolation step.
pub fn refine_trapezoid<F>(
    mut f: F,
    a: f64,
    b: f64,
    n0: usize,
    tol_abs: f64,
    tol_rel: f64,
) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    if !(b > a) || !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "integration bounds must be finite with a < b, got [{a}, {b}]"
        )));
    }
    let mut n = n0.max(8).next_power_of_two();
    let mut h = (b - a) / n as f64;
    let mut t = {
        let mut s = Kahan::new();
        s.add(0.5 * (f(a) + f(b)));
        for i in 1..n {
            s.add(f(a + i as f64 * h));
        }
        s.sum * h
    };
    for _ in 0..MAX_DOUBLINGS {
        let mut mids = Kahan::new();
        for i in 0..n {
            mids.add(f(a + (i as f64 + 0.5) * h));
        }
        let t2 = 0.5 * t + 0.5 * h * mids.sum;
        n *= 2;
        h *= 0.5;
        if (t2 - t).abs() <= tol_abs + tol_rel * t2.abs() {
            return Ok(t2 + (t2 - t) / 3.0);
        }
        t = t2;
    }
    Err(Error::NumericalFailure(format!(
        "trapezoid refinement did not settle on [{a}, {b}]"
    )))
}

/// Refining trapezoid rule for a complex integrand.
pub fn refine_trapezoid_complex<F>(
    mut f: F,
    a: f64,
    b: f64,
    n0: usize,
    tol_abs: f64,
    tol_rel: f64,
) -> Result<C64>
where
    F: FnMut(f64) -> C64,
{
    if !(b > a) || !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "integration bounds must be finite with a < b, got [{a}, {b}]"
        )));
    }
    let mut n = n0.max(8).next_power_of_two();
    let mut h = (b - a) / n as f64;
    let mut t = {
        let mut s = KahanComplex::new();
        s.add(0.5 * (f(a) + f(b)));
        for i in 1..n {
            s.add(f(a + i as f64 * h));
        }
        s.value() * h
    };
    for _ in 0..MAX_DOUBLINGS {
        let mut mids = KahanComplex::new();
        for i in 0..n {
            mids.add(f(a + (i as f64 + 0.5) * h));
        }
        let t2 = 0.5 * t + 0.5 * h * mids.value();
        n *= 2;
        h *= 0.5;
        if (t2 - t).norm() <= tol_abs + tol_rel * t2.norm() {
            return Ok(t2 + (t2 - t) / 3.0);
        }
        t = t2;
    }
    Err(Error::NumericalFailure(format!(
        "trapezoid refinement did not settle on [{a}, {b}]"
    )))
}

/// Moments of a complex Gaussian, split so callers can fold the exponent.
///
/// With Re(alpha) > 0,
///   integral k^m exp(-alpha k^2 + beta k) dk = exp(beta^2 / (4 alpha)) * s
/// and this returns `(s, beta^2 / (4 alpha))`.  Keeping the exponent apart
/// lets callers combine it with other exponents before exponentiating.
pub fn gaussian_moment_parts(m: usize, alpha: C64, beta: C64) -> (C64, C64) {
    debug_assert!(alpha.re > 0.0, "gaussian moment requires Re(alpha) > 0");
    let mu = beta / (2.0 * alpha);
    // even central moments by recurrence: M_0 = sqrt(pi/alpha),
    // M_{j+2} = M_j (j + 1) / (2 alpha)
    let mut mj = (C64::new(PI, 0.0) / alpha).sqrt();
    let mut sum = C64::new(0.0, 0.0);
    let mut j = 0usize;
    loop {
        sum += binomial(m, j) * mu.powu((m - j) as u32) * mj;
        if j + 2 > m {
            break;
        }
        mj = mj * ((j + 1) as f64) / (2.0 * alpha);
        j += 2;
    }
    (sum, beta * beta / (4.0 * alpha))
}

/// Gamma(m + 1/2) for non-negative integer m.
pub fn gamma_half_integer(m: usize) -> f64 {
    let mut g = PI.sqrt();
    for i in 0..m {
        g *= i as f64 + 0.5;
    }
    g
}

/// Binomial coefficient as f64, exact for the small arguments used here.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - k + 1 + i) as f64 / (i + 1) as f64;
    }
    acc
}

/// n! as f64.
pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}
