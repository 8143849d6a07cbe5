//! Explicit barrier functions and numerical checks of their sub-solution
//! inequalities.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Analytic, FieldFunction};
use crate::kernels::{sphere_area, KernelClass};
use crate::ops::{Extremal, NodeSet, QuadratureConfig};

/// `φ(x) = min((κ₀R)^{−p}, |x|^{−p})`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerBarrier {
    pub radius: f64,
    pub kappa1: f64,
    pub kappa0: f64,
    pub p: u32,
}

impl PowerBarrier {
    /// Barrier with `κ₀ = ε₀κ₁`.
    pub fn new(radius: f64, kappa1: f64, eps0: f64, p: u32) -> Result<Self> {
        if !(radius > 0.0 && radius < 1.0 && kappa1 > 0.0 && kappa1 < 1.0) {
            return Err(Error::InvalidParameter(format!("need R, κ₁ in (0,1), got {radius}, {kappa1}")));
        }
        if !(eps0 > 0.0 && eps0 < 0.125) {
            return Err(Error::InvalidParameter(format!("need ε₀ in (0, 1/8), got {eps0}")));
        }
        if p == 0 {
            return Err(Error::InvalidParameter("exponent p must be positive".into()));
        }
        Ok(Self { radius, kappa1, kappa0: eps0 * kappa1, p })
    }

    /// `(κ₀R)^{−p}`.
    pub fn plateau(&self) -> f64 {
        (self.kappa0 * self.radius).powi(-(self.p as i32))
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if r <= self.kappa0 * self.radius {
            self.plateau()
        } else {
            r.powi(-(self.p as i32))
        }
    }

    pub fn field(&self, dim: usize) -> FieldFunction {
        FieldFunction::analytic(dim, Analytic::PowerBarrier { barrier: *self })
    }
}

/// `Φ = c₀·{−a|x|² + b on B_{κ₀R}; (κ₀R)^p(|x|^{−p} − R^{−p}) on B_R∖B_{κ₀R}; 0 outside}`
/// with `a = ½p(κ₀R)^{−2}`, `b = 1 − κ₀^p + ½p`, `c₀ = 2/(κ₀^p(δ₂^{−p} − 1))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompositeBarrier {
    pub radius: f64,
    pub kappa0: f64,
    pub p: u32,
    pub delta1: f64,
    pub delta2: f64,
}

impl CompositeBarrier {
    pub fn new(radius: f64, kappa0: f64, p: u32, delta1: f64, delta2: f64) -> Result<Self> {
        if !(0.0 < delta1 && delta1 < delta2 && delta2 < 1.0) {
            return Err(Error::InvalidParameter(format!("need 0 < δ₁ < δ₂ < 1, got {delta1}, {delta2}")));
        }
        if !(kappa0 > 0.0 && kappa0 < delta2 && radius > 0.0 && radius < 1.0 && p > 0) {
            return Err(Error::InvalidParameter(format!("need 0 < κ₀ < δ₂ and R in (0,1), got {kappa0}, {radius}")));
        }
        Ok(Self { radius, kappa0, p, delta1, delta2 })
    }

    pub fn a(&self) -> f64 {
        0.5 * self.p as f64 * (self.kappa0 * self.radius).powi(-2)
    }
    pub fn b(&self) -> f64 {
        1.0 - self.kappa0.powi(self.p as i32) + 0.5 * self.p as f64
    }
    pub fn c0(&self) -> f64 {
        2.0 / (self.kappa0.powi(self.p as i32) * (self.delta2.powi(-(self.p as i32)) - 1.0))
    }

    /// Value at the origin, the maximum.
    pub fn sup(&self) -> f64 {
        self.c0() * self.b()
    }

    /// Profile as a function of `r = |x|`.
    pub fn radial(&self, r: f64) -> f64 {
        let glue = self.kappa0 * self.radius;
        let p = self.p as i32;
        let v = if r <= glue {
            -self.a() * r * r + self.b()
        } else if r < self.radius {
            glue.powi(p) * (r.powi(-p) - self.radius.powi(-p))
        } else {
            0.0
        };
        self.c0() * v
    }

    /// `dΦ/dr`.
    pub fn radial_derivative(&self, r: f64) -> f64 {
        let glue = self.kappa0 * self.radius;
        let p = self.p as i32;
        let d = if r <= glue {
            -2.0 * self.a() * r
        } else if r < self.radius {
            -(p as f64) * glue.powi(p) * r.powi(-p - 1)
        } else {
            0.0
        };
        self.c0() * d
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.radial(x.iter().map(|v| v * v).sum::<f64>().sqrt())
    }

    pub fn field(&self, dim: usize) -> FieldFunction {
        FieldFunction::analytic(dim, Analytic::CompositeBarrier { barrier: *self })
    }
}

/// `min(1, |x|²/(4R²))`.
pub fn comparison_barrier(dim: usize, radius: f64) -> FieldFunction {
    FieldFunction::analytic(dim, Analytic::ComparisonBarrier { radius })
}

/// `∫_{∂B₁} y₁² dσ` and `|∂B₁|`.
fn sphere_moments(dim: usize) -> (f64, f64) {
    match dim {
        1 => (2.0, 2.0),
        _ => (PI, 2.0 * PI),
    }
}

/// Smallest integer `p > n` with `(p+2)(λ/2)∫_{∂B₁}y₁² − Λ|∂B₁| > 0`.
pub fn choose_p(dim: usize, lambda_lo: f64, lambda_hi: f64) -> Result<u32> {
    if !(dim == 1 || dim == 2) || !(lambda_lo > 0.0 && lambda_hi >= lambda_lo) {
        return Err(Error::InvalidParameter(format!("need n in {{1,2}} and 0 < λ ≤ Λ, got {dim}, {lambda_lo}, {lambda_hi}")));
    }
    let (s2, s0) = sphere_moments(dim);
    // (p+2) > 2Λ s0/(λ s2), strictly.
    let bound = 2.0 * lambda_hi * s0 / (lambda_lo * s2) - 2.0;
    let mut p = (bound.floor() as i64 + 1).max(dim as i64 + 1) as u32;
    while (p as f64 + 2.0) * 0.5 * lambda_lo * s2 - lambda_hi * s0 <= 0.0 {
        p += 1;
    }
    Ok(p)
}

/// `δ_R = (2−σ)λ ∫_{B_R} |y|²/(2R²) · l(|y|)/|y|ⁿ dy`.
pub fn comparison_delta_r(class: &KernelClass, radius: f64) -> Result<f64> {
    if !(radius > 0.0 && radius <= 1.0) {
        return Err(Error::Domain { what: "comparison radius must lie in (0,1]", value: radius });
    }
    let m = class.profile.moment(1.0, 0.0, radius)?;
    Ok((2.0 - class.sigma()) * class.lambda_lo * sphere_area(class.dim) * m / (2.0 * radius * radius))
}

/// Where the check points of [`verify_subsolution`] are placed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Region {
    /// `inner ≤ |x| < outer`.
    Annulus { inner: f64, outer: f64 },
    /// `|x| < radius`.
    Ball { radius: f64 },
}

/// Radii and angles of the verification grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CheckGrid {
    pub radii: usize,
    pub angles: usize,
}

impl Default for CheckGrid {
    fn default() -> Self {
        Self { radii: 64, angles: 64 }
    }
}

impl Region {
    /// Check points: `radii` radii, times `±` in 1-D or `angles` directions in 2-D.
    pub fn points(&self, dim: usize, grid: CheckGrid) -> Vec<Vec<f64>> {
        let (a, b) = match *self {
            Region::Annulus { inner, outer } => (inner, outer),
            Region::Ball { radius } => (0.0, radius),
        };
        let mut out = Vec::new();
        for i in 0..grid.radii {
            let r = a + (b - a) * i as f64 / grid.radii as f64;
            if dim == 1 {
                out.push(vec![r]);
                if r > 0.0 {
                    out.push(vec![-r]);
                }
            } else if r == 0.0 {
                out.push(vec![0.0, 0.0]);
            } else {
                for j in 0..grid.angles {
                    let t = 2.0 * PI * j as f64 / grid.angles as f64;
                    out.push(vec![r * t.cos(), r * t.sin()]);
                }
            }
        }
        out
    }
}

/// Minimum of `𝓜⁻` over the check points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsolutionReport {
    pub min_value: f64,
    pub witness: Vec<f64>,
    pub threshold: f64,
    pub passed: bool,
}

/// Evaluates `𝓜⁻barrier` at every check point and compares the minimum
/// with `threshold`.
pub fn verify_subsolution(
    barrier: &FieldFunction,
    region: Region,
    class: &KernelClass,
    q: &QuadratureConfig,
    grid: CheckGrid,
    threshold: f64,
) -> Result<SubsolutionReport> {
    let pts = region.points(class.dim, grid);
    let vals: Vec<Result<f64>> = pts
        .par_iter()
        .map(|x| NodeSet::build(&[barrier], x, &class.profile, q)?.extremal(barrier, class, Extremal::Minus, false))
        .collect();
    let mut min_value = f64::INFINITY;
    let mut witness = Vec::new();
    for (x, v) in pts.into_iter().zip(vals) {
        let v = v?;
        if v < min_value {
            min_value = v;
            witness = x;
        }
    }
    Ok(SubsolutionReport { min_value, witness, threshold, passed: min_value >= threshold })
}

/// Outcome of the `ε₀` search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Epsilon0 {
    pub eps0: f64,
    pub barrier: PowerBarrier,
    pub report: SubsolutionReport,
}

/// Halves `ε₀` from `1/16` until the power barrier is a sub-solution on the
/// annulus `B_R ∖ B_{κ₁R}` up to `−tol`.
pub fn find_epsilon0(
    radius: f64,
    kappa1: f64,
    class: &KernelClass,
    q: &QuadratureConfig,
    grid: CheckGrid,
    tol: f64,
) -> Result<Epsilon0> {
    let p = choose_p(class.dim, class.lambda_lo, class.lambda_hi)?;
    let region = Region::Annulus { inner: kappa1 * radius, outer: radius };
    let mut eps0 = 1.0 / 16.0;
    for _ in 0..30 {
        let barrier = PowerBarrier::new(radius, kappa1, eps0, p)?;
        let report = verify_subsolution(&barrier.field(class.dim), region, class, q, grid, -tol)?;
        if report.passed {
            return Ok(Epsilon0 { eps0, barrier, report });
        }
        eps0 *= 0.5;
    }
    Err(Error::NotFound("no ε₀ ≥ 2^{-34} makes the power barrier a sub-solution".into()))
}
