//! Functions on ℝⁿ (n = 1, 2) that operators act on: analytic rules,
//! grid samples on a ball with an analytic far field, linear combinations
//! and dilations.

use serde::{Deserialize, Serialize};

use crate::barriers::{CompositeBarrier, PowerBarrier};
use crate::error::{Error, Result};

/// One Gaussian bump `height·exp(−|x−center|²/width²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianBump {
    pub center: [f64; 2],
    pub height: f64,
    pub width: f64,
}

/// A sphere `|z − center| = radius` across which a field may lose smoothness.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kink {
    pub center: [f64; 2],
    pub radius: f64,
}

/// Closed-form functions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum Analytic {
    Constant { value: f64 },
    /// `slope·x + offset`.
    Linear { slope: [f64; 2], offset: f64 },
    /// `scale·|x|²`.
    Quadratic { scale: f64 },
    /// `max(0, 1 − |x|²)`.
    Bump,
    Gaussians { bumps: Vec<GaussianBump> },
    /// `|x|^exponent`.
    RadialPower { exponent: f64 },
    PowerBarrier { barrier: PowerBarrier },
    CompositeBarrier { barrier: CompositeBarrier },
    /// `min(1, |x|²/(4R²))`.
    ComparisonBarrier { radius: f64 },
}

fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

fn dist2(x: &[f64], c: &[f64; 2]) -> f64 {
    x.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// Radius beyond which `height·e^{−d²/w²}` stays below `1e−17·|height|`.
const GAUSS_CUTOFF: f64 = 6.3;

impl Analytic {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Self::Constant { value } => *value,
            Self::Linear { slope, offset } => offset + x.iter().zip(slope).map(|(a, b)| a * b).sum::<f64>(),
            Self::Quadratic { scale } => scale * norm2(x),
            Self::Bump => (1.0 - norm2(x)).max(0.0),
            Self::Gaussians { bumps } => bumps
                .iter()
                .map(|b| b.height * (-dist2(x, &b.center) / (b.width * b.width)).exp())
                .sum(),
            Self::RadialPower { exponent } => norm2(x).sqrt().powf(*exponent),
            Self::PowerBarrier { barrier } => barrier.eval(x),
            Self::CompositeBarrier { barrier } => barrier.eval(x),
            Self::ComparisonBarrier { radius } => (norm2(x) / (4.0 * radius * radius)).min(1.0),
        }
    }

    /// Limit value at infinity, `None` for unbounded rules.
    pub fn asymptote(&self) -> Option<f64> {
        match self {
            Self::Constant { value } => Some(*value),
            Self::Linear { slope, offset } => (slope.iter().all(|&s| s == 0.0)).then_some(*offset),
            Self::Quadratic { scale } => (*scale == 0.0).then_some(0.0),
            Self::RadialPower { exponent } => (*exponent == 0.0).then_some(1.0),
            Self::Bump | Self::Gaussians { .. } | Self::PowerBarrier { .. } | Self::CompositeBarrier { .. } => Some(0.0),
            Self::ComparisonBarrier { .. } => Some(1.0),
        }
    }

    /// Upper bound on `|u(z) − asymptote|` for `|z| ≥ rho`.
    pub fn deviation_beyond(&self, rho: f64) -> f64 {
        match self {
            Self::Constant { .. } => 0.0,
            Self::Linear { .. } | Self::Quadratic { .. } | Self::RadialPower { .. } => {
                if self.asymptote().is_some() {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            Self::Bump => {
                if rho >= 1.0 {
                    0.0
                } else {
                    1.0
                }
            }
            Self::Gaussians { bumps } => bumps
                .iter()
                .map(|b| {
                    let d = (rho - norm2(&b.center).sqrt()).max(0.0);
                    if d >= GAUSS_CUTOFF * b.width {
                        0.0
                    } else {
                        b.height.abs() * (-(d * d) / (b.width * b.width)).exp()
                    }
                })
                .sum(),
            Self::PowerBarrier { barrier } => barrier.plateau().min(rho.powi(-(barrier.p as i32))),
            Self::CompositeBarrier { barrier } => {
                if rho >= barrier.radius {
                    0.0
                } else {
                    barrier.sup()
                }
            }
            Self::ComparisonBarrier { radius } => {
                if rho >= 2.0 * radius {
                    0.0
                } else {
                    1.0
                }
            }
        }
    }

    pub fn kinks(&self) -> Vec<Kink> {
        let at = |radius: f64| Kink { center: [0.0; 2], radius };
        match self {
            Self::Bump => vec![at(1.0)],
            Self::RadialPower { .. } => vec![at(0.0)],
            Self::PowerBarrier { barrier } => vec![at(barrier.kappa0 * barrier.radius)],
            Self::CompositeBarrier { barrier } => vec![at(barrier.kappa0 * barrier.radius), at(barrier.radius)],
            Self::ComparisonBarrier { radius } => vec![at(2.0 * radius)],
            _ => Vec::new(),
        }
    }

    pub fn sup_norm(&self) -> Option<f64> {
        match self {
            Self::Constant { value } => Some(value.abs()),
            Self::Bump | Self::ComparisonBarrier { .. } => Some(1.0),
            Self::Gaussians { bumps } => Some(bumps.iter().map(|b| b.height.abs()).sum()),
            Self::PowerBarrier { barrier } => Some(barrier.plateau()),
            Self::CompositeBarrier { barrier } => Some(barrier.sup()),
            _ => self.asymptote().map(f64::abs),
        }
    }

    /// Global bound on `|D²u|`, when known.
    pub fn c11_hint(&self) -> Option<f64> {
        match self {
            Self::Constant { .. } | Self::Linear { .. } => Some(0.0),
            Self::Quadratic { scale } => Some(2.0 * scale.abs()),
            Self::Bump => Some(2.0),
            Self::Gaussians { bumps } => Some(bumps.iter().map(|b| 2.0 * b.height.abs() / (b.width * b.width)).sum()),
            Self::ComparisonBarrier { radius } => Some(0.5 / (radius * radius)),
            _ => None,
        }
    }
}

/// Uniform sample of `u` on the box around a ball, used inside the ball;
/// outside it the analytic far-field rule applies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridField {
    dim: usize,
    center: [f64; 2],
    radius: f64,
    spacing: f64,
    /// Nodes per axis.
    n: usize,
    values: Vec<f64>,
    far: Analytic,
    smoothness: Option<f64>,
}

impl GridField {
    /// Samples `f` at the nodes of the box `center + [−radius, radius]ⁿ`.
    /// `radius` must be an integer multiple of `spacing`.
    pub fn sample<F: Fn(&[f64]) -> f64>(
        dim: usize,
        center: [f64; 2],
        radius: f64,
        spacing: f64,
        far: Analytic,
        f: F,
    ) -> Result<Self> {
        let n = Self::nodes_per_axis(radius, spacing)?;
        let mut values = Vec::with_capacity(n.pow(dim as u32));
        let origin = |c: f64| c - radius;
        match dim {
            1 => {
                for i in 0..n {
                    values.push(f(&[origin(center[0]) + i as f64 * spacing]));
                }
            }
            2 => {
                for j in 0..n {
                    for i in 0..n {
                        values.push(f(&[origin(center[0]) + i as f64 * spacing, origin(center[1]) + j as f64 * spacing]));
                    }
                }
            }
            _ => return Err(Error::InvalidParameter(format!("dimension must be 1 or 2, got {dim}"))),
        }
        Self::from_values(dim, center, radius, spacing, values, far)
    }

    /// Wraps node values in row-major order (x fastest).
    pub fn from_values(
        dim: usize,
        center: [f64; 2],
        radius: f64,
        spacing: f64,
        values: Vec<f64>,
        far: Analytic,
    ) -> Result<Self> {
        let n = Self::nodes_per_axis(radius, spacing)?;
        if !(dim == 1 || dim == 2) {
            return Err(Error::InvalidParameter(format!("dimension must be 1 or 2, got {dim}")));
        }
        if values.len() != n.pow(dim as u32) {
            return Err(Error::InvalidParameter(format!(
                "expected {} grid values, got {}",
                n.pow(dim as u32),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("grid values must be finite".into()));
        }
        if far.asymptote().is_none() {
            return Err(Error::UnboundedField);
        }
        Ok(Self { dim, center, radius, spacing, n, values, far, smoothness: None })
    }

    fn nodes_per_axis(radius: f64, spacing: f64) -> Result<usize> {
        if !(spacing > 0.0 && radius > 0.0) {
            return Err(Error::InvalidParameter(format!("need positive radius and spacing, got {radius}, {spacing}")));
        }
        let cells = 2.0 * radius / spacing;
        if (cells - cells.round()).abs() > 1e-9 * cells.max(1.0) {
            return Err(Error::InvalidParameter(format!("spacing {spacing} does not divide diameter {}", 2.0 * radius)));
        }
        Ok(cells.round() as usize + 1)
    }

    /// Attaches a `C^{1,1}` modulus hint.
    pub fn with_smoothness(mut self, m: f64) -> Self {
        self.smoothness = Some(m);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn center(&self) -> [f64; 2] {
        self.center
    }
    pub fn radius(&self) -> f64 {
        self.radius
    }
    pub fn spacing(&self) -> f64 {
        self.spacing
    }
    pub fn nodes_per_axis_count(&self) -> usize {
        self.n
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn far_field(&self) -> &Analytic {
        &self.far
    }

    /// Coordinates of node `(i, j)` (ignore `j` in 1-D).
    pub fn node(&self, i: usize, j: usize) -> [f64; 2] {
        let o0 = self.center[0] - self.radius;
        let o1 = self.center[1] - self.radius;
        [o0 + i as f64 * self.spacing, o1 + j as f64 * self.spacing]
    }

    fn inside(&self, x: &[f64]) -> bool {
        dist2(x, &self.center) <= self.radius * self.radius * (1.0 + 1e-12)
    }

    fn locate(&self, x: f64, c: f64) -> (usize, f64) {
        let t = (x - (c - self.radius)) / self.spacing;
        let i = (t.floor().max(0.0) as usize).min(self.n - 2);
        (i, t - i as f64)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        if !self.inside(x) {
            return self.far.eval(x);
        }
        let (i, s) = self.locate(x[0], self.center[0]);
        match self.dim {
            1 => self.values[i] * (1.0 - s) + self.values[i + 1] * s,
            _ => {
                let (j, t) = self.locate(x[1], self.center[1]);
                let v = |a: usize, b: usize| self.values[b * self.n + a];
                (1.0 - t) * ((1.0 - s) * v(i, j) + s * v(i + 1, j)) + t * ((1.0 - s) * v(i, j + 1) + s * v(i + 1, j + 1))
            }
        }
    }

    fn sup_norm(&self) -> f64 {
        let inner = self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        inner.max(self.far.sup_norm().unwrap_or(f64::INFINITY).min(self.far_sup_outside()))
    }

    fn far_sup_outside(&self) -> f64 {
        let a = self.far.asymptote().unwrap_or(f64::INFINITY).abs();
        let c = norm2(&self.center).sqrt();
        a + self.far.deviation_beyond((self.radius - c).max(0.0))
    }
}

/// A function on ℝⁿ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "field", rename_all = "snake_case")]
pub enum FieldFunction {
    Analytic { dim: usize, rule: Analytic },
    Grid(GridField),
    /// `Σ cᵢ uᵢ`.
    Sum { dim: usize, terms: Vec<(f64, FieldFunction)> },
    /// `u(factor·x)`.
    Dilated { factor: f64, inner: Box<FieldFunction> },
}

impl FieldFunction {
    pub fn analytic(dim: usize, rule: Analytic) -> Self {
        Self::Analytic { dim, rule }
    }

    pub fn constant(dim: usize, value: f64) -> Self {
        Self::analytic(dim, Analytic::Constant { value })
    }

    /// `c·self`.
    pub fn scaled(&self, c: f64) -> Self {
        Self::Sum { dim: self.dim(), terms: vec![(c, self.clone())] }
    }

    /// `self + other`.
    pub fn plus(&self, other: &FieldFunction) -> Self {
        Self::Sum { dim: self.dim(), terms: vec![(1.0, self.clone()), (1.0, other.clone())] }
    }

    /// `x ↦ self(factor·x)`.
    pub fn dilated(&self, factor: f64) -> Self {
        Self::Dilated { factor, inner: Box::new(self.clone()) }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Analytic { dim, .. } | Self::Sum { dim, .. } => *dim,
            Self::Grid(g) => g.dim,
            Self::Dilated { inner, .. } => inner.dim(),
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Self::Analytic { rule, .. } => rule.eval(x),
            Self::Grid(g) => g.eval(x),
            Self::Sum { terms, .. } => terms.iter().map(|(c, f)| c * f.eval(x)).sum(),
            Self::Dilated { factor, inner } => {
                let mut z = [0.0; 2];
                for (zi, xi) in z.iter_mut().zip(x) {
                    *zi = factor * xi;
                }
                inner.eval(&z[..x.len()])
            }
        }
    }

    /// Limit at infinity; `None` when the field is unbounded.
    pub fn asymptote(&self) -> Option<f64> {
        match self {
            Self::Analytic { rule, .. } => rule.asymptote(),
            Self::Grid(g) => g.far.asymptote(),
            Self::Sum { terms, .. } => terms.iter().map(|(c, f)| f.asymptote().map(|a| c * a)).sum(),
            Self::Dilated { inner, .. } => inner.asymptote(),
        }
    }

    /// Bound on `|u(z) − asymptote|` over `|z| ≥ rho`.
    pub fn deviation_beyond(&self, rho: f64) -> f64 {
        match self {
            Self::Analytic { rule, .. } => rule.deviation_beyond(rho),
            Self::Grid(g) => {
                let c = norm2(&g.center).sqrt();
                if rho >= g.radius + c {
                    g.far.deviation_beyond(rho)
                } else {
                    let a = g.far.asymptote().unwrap_or(0.0);
                    let inner = g.values.iter().fold(0.0_f64, |m, v| m.max((v - a).abs()));
                    inner.max(g.far.deviation_beyond(rho))
                }
            }
            Self::Sum { terms, .. } => terms.iter().map(|(c, f)| c.abs() * f.deviation_beyond(rho)).sum(),
            Self::Dilated { factor, inner } => inner.deviation_beyond(factor.abs() * rho),
        }
    }

    /// `sup |u|`, `None` when unbounded.
    pub fn sup_norm(&self) -> Option<f64> {
        match self {
            Self::Analytic { rule, .. } => rule.sup_norm(),
            Self::Grid(g) => Some(g.sup_norm()),
            Self::Sum { terms, .. } => terms.iter().map(|(c, f)| f.sup_norm().map(|s| c.abs() * s)).sum(),
            Self::Dilated { inner, .. } => inner.sup_norm(),
        }
    }

    /// Spheres where the field may have kinks.
    pub fn kinks(&self) -> Vec<Kink> {
        match self {
            Self::Analytic { rule, .. } => rule.kinks(),
            Self::Grid(g) => {
                let mut k = g.far.kinks();
                k.push(Kink { center: g.center, radius: g.radius });
                k
            }
            Self::Sum { terms, .. } => terms.iter().flat_map(|(_, f)| f.kinks()).collect(),
            Self::Dilated { factor, inner } => inner
                .kinks()
                .into_iter()
                .map(|k| Kink {
                    center: [k.center[0] / factor, k.center[1] / factor],
                    radius: k.radius / factor.abs(),
                })
                .collect(),
        }
    }

    /// Smallest length scale on which the field is piecewise smooth
    /// (grid spacing), zero for purely analytic fields.
    pub fn resolution(&self) -> f64 {
        match self {
            Self::Analytic { .. } => 0.0,
            Self::Grid(g) => g.spacing,
            Self::Sum { terms, .. } => terms
                .iter()
                .map(|(_, f)| f.resolution())
                .filter(|&h| h > 0.0)
                .fold(0.0, |m: f64, h| if m == 0.0 { h } else { m.min(h) }),
            Self::Dilated { factor, inner } => inner.resolution() / factor.abs(),
        }
    }

    /// `C^{1,1}` modulus hint when available.
    pub fn c11_hint(&self) -> Option<f64> {
        match self {
            Self::Analytic { rule, .. } => rule.c11_hint(),
            Self::Grid(g) => g.smoothness,
            Self::Sum { terms, .. } => terms.iter().map(|(c, f)| f.c11_hint().map(|m| c.abs() * m)).sum(),
            Self::Dilated { factor, inner } => inner.c11_hint().map(|m| m * factor * factor),
        }
    }
}

/// `μ(u, x, y) = u(x+y) + u(x−y) − 2u(x)`.
pub fn second_difference(u: &FieldFunction, x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    let mut p = [0.0; 2];
    let mut m = [0.0; 2];
    for i in 0..n {
        p[i] = x[i] + y[i];
        m[i] = x[i] - y[i];
    }
    // Summing the symmetric pair first makes μ(y) = μ(−y) bit-exact.
    let (a, b) = (u.eval(&p[..n]), u.eval(&m[..n]));
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    (lo + hi) - 2.0 * u.eval(x)
}
