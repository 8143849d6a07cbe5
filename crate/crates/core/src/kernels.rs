//! Symmetric kernels `K(y) = (2−σ) ω(|y|) l(|y|)/|y|ⁿ` with `ω ∈ [λ, Λ]`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{self, Estimate, Tolerance, Toward};
use crate::regvar::{self, KernelProfile};

/// Surface measure `|∂B₁|` of the unit sphere in dimension 1 or 2.
pub fn sphere_area(dim: usize) -> f64 {
    match dim {
        1 => 2.0,
        2 => 2.0 * PI,
        _ => panic!("only dimensions 1 and 2 are supported"),
    }
}

/// Ellipticity class: dimension, profile and bounds `0 < λ ≤ Λ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelClass {
    pub dim: usize,
    pub profile: KernelProfile,
    pub lambda_lo: f64,
    pub lambda_hi: f64,
}

impl KernelClass {
    pub fn new(dim: usize, profile: KernelProfile, lambda_lo: f64, lambda_hi: f64) -> Result<Self> {
        if !(dim == 1 || dim == 2) {
            return Err(Error::InvalidParameter(format!("dimension must be 1 or 2, got {dim}")));
        }
        if !(lambda_lo > 0.0 && lambda_hi >= lambda_lo && lambda_hi.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "ellipticity bounds must satisfy 0 < λ ≤ Λ, got {lambda_lo}, {lambda_hi}"
            )));
        }
        Ok(Self { dim, profile, lambda_lo, lambda_hi })
    }

    pub fn sigma(&self) -> f64 {
        self.profile.sigma()
    }

    /// `(2−σ) l(s)/sⁿ`, the kernel with unit weight.
    pub fn base_density(&self, s: f64) -> f64 {
        (2.0 - self.sigma()) * self.profile.l(s) / s.powi(self.dim as i32)
    }
}

/// Radial weight `ω`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Weight {
    ConstLower,
    ConstUpper,
    /// `λ + (Λ−λ)(1 + cos(phase + n ln s))/2`.
    RadialBlend { phase: f64 },
}

/// A kernel of the class, optionally truncated to a ball.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub class: KernelClass,
    pub weight: Weight,
    pub truncation: Option<f64>,
}

impl KernelSpec {
    pub fn new(class: KernelClass, weight: Weight, truncation: Option<f64>) -> Result<Self> {
        if let Some(t) = truncation {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::InvalidParameter(format!("truncation radius must be positive, got {t}")));
            }
        }
        Ok(Self { class, weight, truncation })
    }

    /// `ω(s)` at radius `s > 0`.
    pub fn omega(&self, s: f64) -> f64 {
        let (lo, hi) = (self.class.lambda_lo, self.class.lambda_hi);
        match self.weight {
            Weight::ConstLower => lo,
            Weight::ConstUpper => hi,
            Weight::RadialBlend { phase } => {
                lo + (hi - lo) * 0.5 * (1.0 + (phase + self.class.dim as f64 * s.ln()).cos())
            }
        }
    }

    /// `ω(s)` times the truncation indicator.
    pub fn radial_factor(&self, s: f64) -> f64 {
        match self.truncation {
            Some(t) if s > t => 0.0,
            _ => self.omega(s),
        }
    }

    /// `∫_a^b s^p l(s) ω(s) ds` honoring the truncation.
    pub(crate) fn weighted_moment(&self, p: f64, a: f64, b: f64) -> Result<f64> {
        let b = match self.truncation {
            Some(t) => b.min(t),
            None => b,
        };
        if b <= a {
            return Ok(0.0);
        }
        let prof = &self.class.profile;
        match self.weight {
            Weight::ConstLower => Ok(self.class.lambda_lo * prof.moment(p, a, b)?),
            Weight::ConstUpper => Ok(self.class.lambda_hi * prof.moment(p, a, b)?),
            Weight::RadialBlend { .. } => {
                Ok(prof.moment_quadrature(p, a, b, |s| self.omega(s), self.class.lambda_hi)?.value)
            }
        }
    }
}

/// `K(y)`; zero outside the truncation radius.
pub fn eval_kernel(spec: &KernelSpec, y: &[f64]) -> Result<f64> {
    let s = norm(y);
    if s == 0.0 {
        return Err(Error::Domain { what: "kernel is singular at the origin", value: 0.0 });
    }
    Ok(spec.radial_factor(s) * spec.class.base_density(s))
}

pub(crate) fn norm(y: &[f64]) -> f64 {
    y.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// `∫ min(1, |y|²) K(y) dy`.
pub fn levy_integrability(spec: &KernelSpec, tol: f64) -> Result<f64> {
    let c = &spec.class;
    let pref = sphere_area(c.dim) * (2.0 - c.sigma());
    // Inner part ∫₀^1 s ω l ds and outer part ∫₁^∞ ω l/s ds.
    let inner = weighted_moment_tol(spec, 1.0, 0.0, 1.0, tol)?;
    let outer = weighted_moment_tol(spec, -1.0, 1.0, f64::INFINITY, tol)?;
    Ok(pref * (inner + outer))
}

fn weighted_moment_tol(spec: &KernelSpec, p: f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    let b = spec.truncation.map_or(b, |t| b.min(t));
    if b <= a {
        return Ok(0.0);
    }
    let prof = spec.class.profile;
    let f = |x: f64| ((p + 1.0) * x + prof.ln_l_at_log(x)).exp() * spec.omega(x.exp());
    let env = |x: f64| ((p + 1.0) * x + prof.ln_l_at_log(x)).exp() * spec.class.lambda_hi;
    let t = Tolerance::relative(tol);
    let mut total = 0.0;
    let (lo, hi) = if a == 0.0 {
        let start = b.ln().min(0.0);
        let opts = regvar::tail_options(p + 1.0 - prof.sigma(), t);
        total += quad::log_tail(f, env, start, Toward::MinusInfinity, opts)?.value;
        (start, b.ln())
    } else if b.is_infinite() {
        (a.ln(), a.ln().max(0.0))
    } else {
        (a.ln(), b.ln())
    };
    if hi > lo {
        total += quad::adaptive(f, &regvar::ring_points(lo, hi, &[0.0]), t, 20_000)?.value;
    }
    if b.is_infinite() {
        let opts = regvar::tail_options(prof.sigma() - p - 1.0, t);
        total += quad::log_tail(f, env, hi.max(lo), Toward::PlusInfinity, opts)?.value;
    }
    Ok(total)
}

/// `∫_{|y|>θ₀} |K(y) − K(y−h)|/|y| dy`, the empirical constant of the
/// translation condition for this `h`.
pub fn translation_condition(spec: &KernelSpec, theta0: f64, h: &[f64], tol: f64) -> Result<f64> {
    let dim = spec.class.dim;
    if h.len() != dim {
        return Err(Error::InvalidParameter(format!("shift has dimension {}, expected {dim}", h.len())));
    }
    let hn = norm(h);
    if !(theta0 > 0.0) || hn >= 0.5 * theta0 {
        return Err(Error::Precondition(format!("need |h| < θ₀/2, got |h| = {hn}, θ₀ = {theta0}")));
    }
    if hn == 0.0 {
        return Ok(0.0);
    }
    let k = |y: &[f64]| -> f64 {
        let s = norm(y);
        spec.radial_factor(s) * spec.class.base_density(s)
    };
    let sigma = spec.class.sigma();
    let t = Tolerance { abs: 0.0, rel: tol };
    // In x = ln|y| the measure dy/|y| becomes e^{(n−1)x} dx dθ.
    let mut breaks = vec![0.0];
    if let Some(tr) = spec.truncation {
        for b in [tr - hn, tr, tr + hn] {
            if b > 0.0 {
                breaks.push(b.ln());
            }
        }
    }
    let x0 = theta0.ln();
    let x_far = breaks.iter().copied().fold(x0, f64::max) + std::f64::consts::LN_2;
    let est = match dim {
        1 => {
            let f = |x: f64| {
                let s = x.exp();
                (k(&[s]) - k(&[s - h[0]])).abs() + (k(&[-s]) - k(&[-s - h[0]])).abs()
            };
            integrate_outward(f, x0, x_far, &breaks, 2.0 + sigma, spec, hn, t)?
        }
        _ => {
            let m = 256;
            let f = |x: f64| {
                let s = x.exp();
                let mut acc = 0.0;
                for j in 0..m {
                    let th = 2.0 * PI * j as f64 / m as f64;
                    let y = [s * th.cos(), s * th.sin()];
                    acc += (k(&y) - k(&[y[0] - h[0], y[1] - h[1]])).abs();
                }
                acc * 2.0 * PI / m as f64 * s
            };
            integrate_outward(f, x0, x_far, &breaks, 2.0 + sigma, spec, hn, t)?
        }
    };
    Ok(est.value)
}

#[allow(clippy::too_many_arguments)]
fn integrate_outward<F: Fn(f64) -> f64>(
    f: F,
    x0: f64,
    x_far: f64,
    breaks: &[f64],
    decay: f64,
    spec: &KernelSpec,
    hn: f64,
    t: Tolerance,
) -> Result<Estimate> {
    let pts = regvar::ring_points(x0, x_far, breaks);
    let near = quad::adaptive(&f, &pts, t, 20_000)?;
    // Envelope of the difference for |y| ≥ 2|h|: mean value bound with the
    // kernel's decay, K(y−h) ≤ 2^{n+2} K(y) up to slowly varying factors.
    let c = spec.class;
    let env = |x: f64| {
        let s = x.exp();
        let kk = c.lambda_hi * c.base_density(0.5 * s);
        sphere_area(c.dim) * s.powi(c.dim as i32 - 1) * s * kk * 8.0 * hn / s
    };
    let opts = regvar::tail_options(decay - 0.5 * (2.0 - c.sigma()), t);
    let tail = quad::log_tail(&f, env, x_far, Toward::PlusInfinity, opts)?;
    Ok(Estimate { value: near.value + tail.value, error: near.error + tail.error })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regvar::SlowlyVarying;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn class(dim: usize, sigma: f64, lo: f64, hi: f64) -> KernelClass {
        KernelClass::new(dim, KernelProfile::new(sigma, SlowlyVarying::Constant).unwrap(), lo, hi).unwrap()
    }

    #[test]
    fn kernel_examples() {
        let k = KernelSpec::new(class(1, 1.0, 1.0, 1.0), Weight::ConstLower, None).unwrap();
        assert_relative_eq!(eval_kernel(&k, &[0.5]).unwrap(), 4.0, epsilon = 1e-14);
        assert_eq!(eval_kernel(&k, &[0.3]).unwrap(), eval_kernel(&k, &[-0.3]).unwrap());
        let t = KernelSpec { truncation: Some(1.0), ..k };
        assert_eq!(eval_kernel(&t, &[2.0]).unwrap(), 0.0);
        assert!(matches!(eval_kernel(&k, &[0.0]), Err(Error::Domain { .. })));
        assert!(KernelClass::new(1, k.class.profile, 0.0, 0.0).is_err());
    }

    #[test]
    fn levy_examples() {
        let k = KernelSpec::new(class(1, 1.0, 1.0, 1.0), Weight::ConstUpper, None).unwrap();
        assert_relative_eq!(levy_integrability(&k, 1e-10).unwrap(), 4.0, max_relative = 1e-9);
        let t = KernelSpec { truncation: Some(1.0), ..k };
        assert_relative_eq!(levy_integrability(&t, 1e-10).unwrap(), 2.0, max_relative = 1e-9);
    }

    #[test]
    fn levy_matches_closed_form_in_two_dimensions() {
        // 2π(2−σ)[1/(2−σ) + 1/σ] for λ = Λ = 1 and the constant family.
        for sigma in [0.5, 1.5, 1.99] {
            let k = KernelSpec::new(class(2, sigma, 1.0, 1.0), Weight::ConstLower, None).unwrap();
            let exact = 2.0 * PI * (2.0 - sigma) * (1.0 / (2.0 - sigma) + 1.0 / sigma);
            assert_relative_eq!(levy_integrability(&k, 1e-10).unwrap(), exact, max_relative = 1e-8);
        }
    }

    #[test]
    fn levy_is_finite_for_blended_weight_and_log_families() {
        let p = KernelProfile::new(1.9, SlowlyVarying::LogSqPow { beta: -1.0 }).unwrap();
        let c = KernelClass::new(1, p, 1.0, 3.0).unwrap();
        let k = KernelSpec::new(c, Weight::RadialBlend { phase: 0.4 }, None).unwrap();
        let v = levy_integrability(&k, 1e-9).unwrap();
        let lo = levy_integrability(&KernelSpec { weight: Weight::ConstLower, ..k }, 1e-9).unwrap();
        let hi = levy_integrability(&KernelSpec { weight: Weight::ConstUpper, ..k }, 1e-9).unwrap();
        assert!(v.is_finite() && lo < v && v < hi, "{lo} {v} {hi}");
    }

    #[test]
    fn translation_examples() {
        let k = KernelSpec::new(class(1, 1.0, 1.0, 1.0), Weight::ConstLower, None).unwrap();
        assert_eq!(translation_condition(&k, 1.0, &[0.0], 1e-8).unwrap(), 0.0);
        let v = translation_condition(&k, 1.0, &[0.1], 1e-8).unwrap();
        // K(y) = |y|^{-2}: partial fractions on both half-lines give
        // ln((1−h)/(1+h))/h² + (1/(1−h) + 1/(1+h))/h.
        let h: f64 = 0.1;
        let exact = ((1.0 - h) / (1.0 + h)).ln() / (h * h) + (1.0 / (1.0 - h) + 1.0 / (1.0 + h)) / h;
        assert_relative_eq!(v, exact, max_relative = 1e-7);
        assert!(matches!(translation_condition(&k, 1.0, &[1.0], 1e-8), Err(Error::Precondition(_))));
    }

    proptest! {
        #[test]
        fn kernel_respects_class_bounds(y in -5.0f64..5.0, phase in 0.0f64..6.0, sigma in 0.1f64..1.99) {
            prop_assume!(y.abs() > 1e-6);
            let c = class(1, sigma, 0.5, 2.0);
            let k = KernelSpec::new(c, Weight::RadialBlend { phase }, None).unwrap();
            let v = eval_kernel(&k, &[y]).unwrap();
            let base = c.base_density(y.abs());
            prop_assert!(v >= 0.5 * base * (1.0 - 1e-12) && v <= 2.0 * base * (1.0 + 1e-12));
            prop_assert_eq!(v, eval_kernel(&k, &[-y]).unwrap());
        }
    }
}
