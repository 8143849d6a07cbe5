//! Linear, extremal and inf-sup operators evaluated by radial quadrature.
//!
//! For a point `x` a [`NodeSet`] splits `ℝⁿ` into three regions:
//!
//! * the inner ball `|y| < r_in`, where `μ(u,x,y) ≈ yᵀAy` and each direction
//!   `θ` contributes `θᵀAθ · ∫₀^{r_in} (2−σ) s ω(s) l(s) ds`; `θᵀAθ` is a
//!   Richardson-extrapolated second difference at steps `r_in` and `r_in/2`;
//! * annular panels `r_in ≤ |y| ≤ r_tail` in `x = ln|y|`, with 15 Kronrod nodes
//!   each, refined adaptively against `Σ|μ|` of the fields the set is built
//!   for and aligned with their kinks;
//! * the far region `|y| > r_tail`, where every field equals its asymptote
//!   `c` to tolerance, so `μ = 2c − 2u(x)` and the kernel mass is exact.
//!
//! All operators on the same node set see the same `μ` values, so algebraic
//! identities such as `𝓜⁺(−u) = −𝓜⁻u` hold to rounding.

use std::collections::BinaryHeap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{second_difference, FieldFunction};
use crate::kernels::{sphere_area, KernelClass, KernelSpec};
use crate::quad;
use crate::regvar::KernelProfile;

/// Quadrature parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureConfig {
    /// Inner radius in units of the grid spacing for grid fields.
    pub inner_split: f64,
    /// Inner radius for purely analytic fields.
    pub analytic_inner: f64,
    /// Radius ratio of the initial annular panels.
    pub ring_factor: f64,
    /// Panel budget.
    pub rings: usize,
    /// Directions on the half circle (n = 2).
    pub angular_order: usize,
    pub rel_tol: f64,
    /// Refine panels against the reference integrand.
    pub adaptive: bool,
    /// Split panels at the kinks reported by the fields.
    pub align_breakpoints: bool,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            inner_split: 4.0,
            analytic_inner: 1e-3,
            ring_factor: 2.0,
            rings: 20_000,
            angular_order: 48,
            rel_tol: 1e-10,
            adaptive: true,
            align_breakpoints: true,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.inner_split >= 2.0) {
            return Err(Error::InvalidParameter(format!("inner_split must be ≥ 2, got {}", self.inner_split)));
        }
        if !(self.rel_tol > 0.0) || !(self.ring_factor > 1.0) || !(self.analytic_inner > 0.0) {
            return Err(Error::InvalidParameter("rel_tol, analytic_inner must be positive and ring_factor > 1".into()));
        }
        if self.angular_order == 0 || self.rings == 0 {
            return Err(Error::InvalidParameter("angular_order and rings must be positive".into()));
        }
        Ok(())
    }
}

/// Sign selector for the extremal operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Extremal {
    Plus,
    Minus,
}

impl Extremal {
    /// `Λμ⁺ − λμ⁻` or `λμ⁺ − Λμ⁻`.
    #[inline]
    pub fn apply(self, lo: f64, hi: f64, mu: f64) -> f64 {
        let (p, m) = match self {
            Self::Plus => (hi, lo),
            Self::Minus => (lo, hi),
        };
        if mu >= 0.0 {
            p * mu
        } else {
            m * mu
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Node {
    y: [f64; 2],
    s: f64,
    /// Measure of the symmetric pair times `(2−σ) l(s)/sⁿ`.
    w: f64,
}

/// Second differences of one field sampled on a [`NodeSet`].
#[derive(Debug, Clone, PartialEq)]
pub struct SecondDifferences {
    /// `μ(u, x, y)` per node.
    pub ring: Vec<f64>,
    /// Extrapolated `θᵀD²u(x)θ` per direction.
    pub curvature: Vec<f64>,
    /// `2c − 2u(x)` beyond the tail radius.
    pub far: f64,
}

impl SecondDifferences {
    /// Samples of `k·u`.
    pub fn scaled(&self, k: f64) -> Self {
        Self {
            ring: self.ring.iter().map(|v| k * v).collect(),
            curvature: self.curvature.iter().map(|v| k * v).collect(),
            far: k * self.far,
        }
    }
}

/// Quadrature nodes at a point, shared by every operator evaluated on them.
#[derive(Debug, Clone)]
pub struct NodeSet {
    dim: usize,
    x: [f64; 2],
    profile: KernelProfile,
    r_in: f64,
    r_tail: f64,
    nodes: Vec<Node>,
    /// Unit directions on a half sphere with the weight of the pair `±θ`.
    directions: Vec<([f64; 2], f64)>,
    /// `(2−σ) ∫₀^{r_in} s l(s) ds`.
    inner_mass: f64,
    /// `|S^{n−1}| (2−σ) ∫_{r_tail}^∞ l(s)/s ds`.
    tail_mass: f64,
    /// Error estimate of the annular quadrature for the reference fields.
    pub error_estimate: f64,
    pub panels: usize,
}

/// Per-kernel data on a node set.
#[derive(Debug, Clone)]
pub struct KernelWeights {
    factors: Vec<f64>,
    inner_mass: f64,
    tail_mass: f64,
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, o: &Self) -> bool {
        self.error == o.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Panel {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&o.error)
    }
}

const WG7: [f64; 4] = [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

fn half_directions(dim: usize, m: usize) -> Vec<([f64; 2], f64)> {
    match dim {
        1 => vec![([1.0, 0.0], 2.0)],
        _ => (0..m)
            .map(|j| {
                let t = PI * (j as f64 + 0.5) / m as f64;
                ([t.cos(), t.sin()], 2.0 * PI / m as f64)
            })
            .collect(),
    }
}

impl NodeSet {
    /// Builds nodes at `x` resolving every field in `fields`.
    pub fn build(fields: &[&FieldFunction], x: &[f64], profile: &KernelProfile, q: &QuadratureConfig) -> Result<Self> {
        q.validate()?;
        let dim = x.len();
        if !(dim == 1 || dim == 2) {
            return Err(Error::InvalidParameter(format!("point dimension must be 1 or 2, got {dim}")));
        }
        if fields.is_empty() {
            return Err(Error::InvalidParameter("node set needs at least one field".into()));
        }
        let mut sup: f64 = 0.0;
        for f in fields {
            if f.dim() != dim {
                return Err(Error::InvalidParameter(format!("field dimension {} differs from point dimension {dim}", f.dim())));
            }
            sup = sup.max(f.sup_norm().ok_or(Error::UnboundedField)?);
            f.asymptote().ok_or(Error::UnboundedField)?;
        }
        let res = fields.iter().map(|f| f.resolution()).filter(|&h| h > 0.0).fold(f64::INFINITY, f64::min);
        let res = if res.is_finite() { res } else { 0.0 };
        let r_in = if res > 0.0 { q.inner_split * res } else { q.analytic_inner };
        let mut xx = [0.0; 2];
        xx[..dim].copy_from_slice(x);
        let xn = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let sigma = profile.sigma();
        let area = sphere_area(dim);

        let mut breaks = vec![1.0];
        if let Some(k) = profile.l0().kink() {
            breaks.push(k);
        }
        for f in fields {
            for k in f.kinks() {
                if dim == 1 {
                    for z in [k.center[0] - k.radius, k.center[0] + k.radius] {
                        breaks.push((z - x[0]).abs());
                    }
                } else {
                    let d = ((x[0] - k.center[0]).powi(2) + (x[1] - k.center[1]).powi(2)).sqrt();
                    breaks.push((k.radius - d).abs());
                    breaks.push(k.radius + d);
                }
            }
        }
        let tail_of = |r: f64| -> Result<f64> { Ok(area * (2.0 - sigma) * profile.moment(-1.0, r, f64::INFINITY)?) };
        let mut r_tail = breaks.iter().copied().fold(1.0_f64, f64::max).max(2.0 * xn).max(2.0 * r_in);
        let mut settled = false;
        for _ in 0..200 {
            let dev = fields.iter().map(|f| f.deviation_beyond(r_tail - xn)).fold(0.0, f64::max);
            if dev == 0.0 || 2.0 * dev * tail_of(r_tail)? <= 1e-2 * q.rel_tol * sup.max(f64::MIN_POSITIVE) {
                settled = true;
                break;
            }
            r_tail *= 2.0;
        }
        if !settled {
            return Err(Error::TailDivergence("fields do not settle to their asymptote".into()));
        }
        let (lo, hi) = (r_in.ln(), r_tail.ln());
        let mut cuts = vec![lo, hi];
        if q.align_breakpoints {
            cuts.extend(breaks.iter().filter(|&&b| b > r_in && b < r_tail).map(|b| b.ln()));
        } else {
            cuts.push(0.0_f64.max(lo).min(hi));
        }
        cuts.sort_by(f64::total_cmp);
        cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-13);
        let step = q.ring_factor.ln();
        let mut edges = vec![cuts[0]];
        for w in cuts.windows(2) {
            let m = ((w[1] - w[0]) / step - 1e-9).ceil().max(1.0) as usize;
            for j in 1..=m {
                edges.push(w[0] + (w[1] - w[0]) * j as f64 / m as f64);
            }
        }

        let directions = half_directions(dim, q.angular_order);
        // In x = ln s the measure sⁿ⁻¹ds cancels the 1/sⁿ of the kernel up to s.
        let radial = |xl: f64| -> f64 { (2.0 - sigma) * profile.ln_l_at_log(xl).exp() };
        let reference = |xl: f64| -> f64 {
            let s = xl.exp();
            let mut acc = 0.0;
            for (th, wd) in &directions {
                let y = [s * th[0], s * th[1]];
                for f in fields {
                    acc += wd * second_difference(f, x, &y[..dim]).abs();
                }
            }
            acc * radial(xl)
        };
        let eval_panel = |a: f64, b: f64| -> Panel {
            let nodes = quad::kronrod_nodes(a, b);
            let vals: Vec<f64> = nodes.iter().map(|&(t, _)| reference(t)).collect();
            let k: f64 = nodes.iter().zip(&vals).map(|((_, w), v)| w * v).sum();
            // Gauss points sit at odd Kronrod indices 1,3,... of the pairs
            // (2i, 2i+1) for i = 1, 3, 5 and the centre.
            let h = 0.5 * (b - a);
            let mut g = WG7[3] * vals[14];
            for (gi, i) in [1usize, 3, 5].iter().enumerate() {
                g += WG7[gi] * (vals[2 * i] + vals[2 * i + 1]);
            }
            g *= h;
            Panel { a, b, value: k, error: (k - g).abs() }
        };
        let mut heap: BinaryHeap<Panel> = edges.windows(2).map(|w| eval_panel(w[0], w[1])).collect();
        let min_width = |a: f64| -> f64 {
            let floor: f64 = if dim == 2 { 1e-3 } else { 1e-8 };
            if res > 0.0 {
                floor.max(0.25 * res / a.exp())
            } else {
                floor
            }
        };
        let mut frozen = Vec::new();
        if q.adaptive {
            loop {
                let total: f64 = heap.iter().chain(frozen.iter()).map(|p: &Panel| p.value).sum();
                let err: f64 = heap.iter().map(|p| p.error).sum();
                if err <= q.rel_tol * total || heap.is_empty() {
                    break;
                }
                if heap.len() + frozen.len() >= q.rings {
                    return Err(Error::QuadratureFailure { requested: q.rel_tol * total, achieved: err });
                }
                let p = heap.pop().expect("non-empty heap");
                if p.b - p.a <= min_width(p.a) {
                    frozen.push(p);
                    continue;
                }
                let m = 0.5 * (p.a + p.b);
                heap.push(eval_panel(p.a, m));
                heap.push(eval_panel(m, p.b));
            }
        }
        let mut panels: Vec<Panel> = heap.into_vec();
        panels.extend(frozen);
        panels.sort_by(|p, r| p.a.total_cmp(&r.a));
        let error_estimate = panels.iter().map(|p| p.error).sum();

        let mut nodes = Vec::with_capacity(panels.len() * 15 * directions.len());
        for p in &panels {
            for (t, wk) in quad::kronrod_nodes(p.a, p.b) {
                let s = t.exp();
                let wr = wk * radial(t);
                for (th, wd) in &directions {
                    nodes.push(Node { y: [s * th[0], s * th[1]], s, w: wr * wd });
                }
            }
        }
        let inner_mass = (2.0 - sigma) * profile.moment(1.0, 0.0, r_in)?;
        let tail_mass = tail_of(r_tail)?;
        Ok(Self {
            dim,
            x: xx,
            profile: *profile,
            r_in,
            r_tail,
            nodes,
            directions,
            inner_mass,
            tail_mass,
            error_estimate,
            panels: panels.len(),
        })
    }

    pub fn point(&self) -> &[f64] {
        &self.x[..self.dim]
    }
    pub fn inner_radius(&self) -> f64 {
        self.r_in
    }
    pub fn tail_radius(&self) -> f64 {
        self.r_tail
    }
    pub fn len(&self) -> usize {
        self.nodes.len()
    }
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// The node set with every `y` replaced by `−y`.
    pub fn reflected(&self) -> Self {
        let mut out = self.clone();
        for n in &mut out.nodes {
            n.y = [-n.y[0], -n.y[1]];
        }
        for d in &mut out.directions {
            d.0 = [-d.0[0], -d.0[1]];
        }
        out
    }

    fn check(&self, u: &FieldFunction) -> Result<f64> {
        if u.dim() != self.dim {
            return Err(Error::InvalidParameter("field and node set dimensions differ".into()));
        }
        u.asymptote().ok_or(Error::UnboundedField)
    }

    fn mus(&self, u: &FieldFunction) -> Vec<f64> {
        let x = self.point();
        self.nodes.iter().map(|n| second_difference(u, x, &n.y[..self.dim])).collect()
    }

    /// `θᵀD²u(x)θ` per direction from second differences at `r_in`, `r_in/2`.
    fn curvatures(&self, u: &FieldFunction) -> Vec<f64> {
        let x = self.point();
        let eta = self.r_in;
        self.directions
            .iter()
            .map(|(th, _)| {
                let big = second_difference(u, x, &[eta * th[0], eta * th[1]][..self.dim]) / (eta * eta);
                let h = 0.5 * eta;
                let small = second_difference(u, x, &[h * th[0], h * th[1]][..self.dim]) / (h * h);
                (4.0 * small - big) / 3.0
            })
            .collect()
    }

    /// Node factors and masses for a kernel.
    pub fn weights_for(&self, k: &KernelSpec) -> Result<KernelWeights> {
        if k.class.dim != self.dim || k.class.profile != self.profile {
            return Err(Error::InvalidParameter("kernel profile or dimension differs from the node set".into()));
        }
        let sigma = self.profile.sigma();
        let area = sphere_area(self.dim);
        Ok(KernelWeights {
            factors: self.nodes.iter().map(|n| k.radial_factor(n.s)).collect(),
            inner_mass: (2.0 - sigma) * k.weighted_moment(1.0, 0.0, self.r_in)?,
            tail_mass: area * (2.0 - sigma) * k.weighted_moment(-1.0, self.r_tail, f64::INFINITY)?,
        })
    }

    /// Second differences of `u` at the nodes, the inner curvatures and the
    /// far-field increment.
    pub fn sample(&self, u: &FieldFunction) -> Result<SecondDifferences> {
        let c = self.check(u)?;
        Ok(SecondDifferences {
            ring: self.mus(u),
            curvature: self.curvatures(u),
            far: 2.0 * c - 2.0 * u.eval(self.point()),
        })
    }

    fn check_len(&self, d: &SecondDifferences) -> Result<()> {
        if d.ring.len() != self.nodes.len() || d.curvature.len() != self.directions.len() {
            return Err(Error::InvalidParameter("samples were taken on a different node set".into()));
        }
        Ok(())
    }

    /// `𝓛u(x)` for a kernel whose weights were prepared on this set.
    pub fn linear(&self, u: &FieldFunction, kw: &KernelWeights) -> Result<f64> {
        self.linear_on(&self.sample(u)?, kw)
    }

    /// [`NodeSet::linear`] on precomputed samples.
    pub fn linear_on(&self, d: &SecondDifferences, kw: &KernelWeights) -> Result<f64> {
        self.check_len(d)?;
        let ring: f64 = self.nodes.iter().zip(&d.ring).zip(&kw.factors).map(|((n, m), f)| n.w * f * m).sum();
        let inner: f64 = d.curvature.iter().zip(&self.directions).map(|(q, (_, wd))| wd * q).sum::<f64>();
        Ok(ring + kw.inner_mass * inner + kw.tail_mass * d.far)
    }

    /// `𝓜±u(x)` for the class, optionally with kernels truncated to `B₁`.
    pub fn extremal(&self, u: &FieldFunction, class: &KernelClass, sign: Extremal, truncated: bool) -> Result<f64> {
        self.extremal_on(&self.sample(u)?, class, sign, truncated)
    }

    /// [`NodeSet::extremal`] on precomputed samples.
    pub fn extremal_on(&self, d: &SecondDifferences, class: &KernelClass, sign: Extremal, truncated: bool) -> Result<f64> {
        self.check_len(d)?;
        if class.profile != self.profile || class.dim != self.dim {
            return Err(Error::InvalidParameter("class profile or dimension differs from the node set".into()));
        }
        let (lo, hi) = (class.lambda_lo, class.lambda_hi);
        let mut ring = 0.0;
        for (n, m) in self.nodes.iter().zip(&d.ring) {
            if truncated && n.s > 1.0 {
                continue;
            }
            ring += n.w * sign.apply(lo, hi, *m);
        }
        let inner: f64 = d
            .curvature
            .iter()
            .zip(&self.directions)
            .map(|(q, (_, wd))| wd * sign.apply(lo, hi, *q))
            .sum();
        let far = if truncated { 0.0 } else { self.tail_mass * sign.apply(lo, hi, d.far) };
        Ok(ring + self.inner_mass * inner + far)
    }

    /// `inf_β sup_α 𝓛_{αβ}u(x)` with weights prepared per member.
    pub fn infsup(&self, u: &FieldFunction, weights: &[Vec<KernelWeights>]) -> Result<f64> {
        if weights.is_empty() || weights.iter().any(|w| w.is_empty()) {
            return Err(Error::EmptyFamily);
        }
        let mut best = f64::INFINITY;
        for row in weights {
            let mut sup = f64::NEG_INFINITY;
            for kw in row {
                sup = sup.max(self.linear(u, kw)?);
            }
            best = best.min(sup);
        }
        Ok(best)
    }

    /// Certified bound `M Λ |S| ∫_{B_{r_in}} |y|² (2−σ) l/|y|ⁿ` on the inner
    /// contribution, when the field reports a `C^{1,1}` modulus.
    pub fn inner_bound(&self, u: &FieldFunction, class: &KernelClass) -> Option<f64> {
        u.c11_hint().map(|m| m * class.lambda_hi * sphere_area(self.dim) * self.inner_mass)
    }
}

/// Kernels `K_{αβ}` indexed `[β][α]`, all in one class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorFamily {
    members: Vec<Vec<KernelSpec>>,
}

impl OperatorFamily {
    pub fn new(members: Vec<Vec<KernelSpec>>) -> Result<Self> {
        if members.is_empty() || members.iter().any(|r| r.is_empty()) {
            return Err(Error::EmptyFamily);
        }
        let c = members[0][0].class;
        for k in members.iter().flatten() {
            if k.class != c {
                return Err(Error::InvalidParameter("family members must share one class".into()));
            }
        }
        Ok(Self { members })
    }

    pub fn members(&self) -> &[Vec<KernelSpec>] {
        &self.members
    }

    pub fn class(&self) -> KernelClass {
        self.members[0][0].class
    }

    /// Weights of every member on a node set.
    pub fn weights_on(&self, nodes: &NodeSet) -> Result<Vec<Vec<KernelWeights>>> {
        self.members.iter().map(|row| row.iter().map(|k| nodes.weights_for(k)).collect()).collect()
    }
}

/// `𝓛u(x) = ∫ μ(u,x,y) K(y) dy`.
pub fn linear_apply(u: &FieldFunction, x: &[f64], k: &KernelSpec, q: &QuadratureConfig) -> Result<f64> {
    let nodes = NodeSet::build(&[u], x, &k.class.profile, q)?;
    nodes.linear(u, &nodes.weights_for(k)?)
}

/// `𝓜⁺u(x)`.
pub fn pucci_plus(u: &FieldFunction, x: &[f64], class: &KernelClass, q: &QuadratureConfig) -> Result<f64> {
    NodeSet::build(&[u], x, &class.profile, q)?.extremal(u, class, Extremal::Plus, false)
}

/// `𝓜⁻u(x)`.
pub fn pucci_minus(u: &FieldFunction, x: &[f64], class: &KernelClass, q: &QuadratureConfig) -> Result<f64> {
    NodeSet::build(&[u], x, &class.profile, q)?.extremal(u, class, Extremal::Minus, false)
}

/// `𝓘u(x) = inf_β sup_α 𝓛_{αβ}u(x)`.
pub fn infsup_apply(u: &FieldFunction, x: &[f64], fam: &OperatorFamily, q: &QuadratureConfig) -> Result<f64> {
    let nodes = NodeSet::build(&[u], x, &fam.class().profile, q)?;
    nodes.infsup(u, &fam.weights_on(&nodes)?)
}

/// Extremal operator over kernels truncated to the unit ball.
pub fn pucci_truncated(
    u: &FieldFunction,
    x: &[f64],
    class: &KernelClass,
    sign: Extremal,
    q: &QuadratureConfig,
) -> Result<f64> {
    NodeSet::build(&[u], x, &class.profile, q)?.extremal(u, class, sign, true)
}

/// `κ = (2−σ) Λ |S^{n−1}| ∫₁^∞ l(s)/s ds`, the mass removed by truncation.
pub fn truncation_tail_mass(class: &KernelClass) -> Result<f64> {
    Ok((2.0 - class.sigma()) * class.lambda_hi * sphere_area(class.dim) * class.profile.moment(-1.0, 1.0, f64::INFINITY)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Analytic, GaussianBump};
    use crate::kernels::Weight;
    use crate::regvar::SlowlyVarying;
    use approx::assert_relative_eq;

    fn class(dim: usize, sigma: f64, lo: f64, hi: f64) -> KernelClass {
        KernelClass::new(dim, KernelProfile::new(sigma, SlowlyVarying::Constant).unwrap(), lo, hi).unwrap()
    }

    fn bump(dim: usize) -> FieldFunction {
        FieldFunction::analytic(dim, Analytic::Bump)
    }

    #[test]
    fn constants_give_zero() {
        let c = class(1, 1.3, 0.5, 2.0);
        let u = FieldFunction::constant(1, 3.0);
        let q = QuadratureConfig::default();
        assert_eq!(pucci_plus(&u, &[0.2], &c, &q).unwrap(), 0.0);
        assert_eq!(pucci_minus(&u, &[0.2], &c, &q).unwrap(), 0.0);
        assert_eq!(pucci_truncated(&u, &[0.2], &c, Extremal::Plus, &q).unwrap(), 0.0);
        let k = KernelSpec::new(c, Weight::RadialBlend { phase: 1.0 }, None).unwrap();
        assert_eq!(linear_apply(&u, &[0.2], &k, &q).unwrap(), 0.0);
    }

    #[test]
    fn bump_at_origin() {
        let c = class(1, 1.0, 1.0, 1.0);
        let q = QuadratureConfig::default();
        let u = bump(1);
        assert_relative_eq!(pucci_plus(&u, &[0.0], &c, &q).unwrap(), -8.0, epsilon = 1e-8);
        assert_relative_eq!(pucci_minus(&u, &[0.0], &c, &q).unwrap(), -8.0, epsilon = 1e-8);
        assert_relative_eq!(pucci_truncated(&u, &[0.0], &c, Extremal::Plus, &q).unwrap(), -4.0, epsilon = 1e-8);
    }

    #[test]
    fn bump_at_origin_general_sigma() {
        // μ = −2y² on |y| ≤ 1 and −2 outside: 𝓜⁺ = −4λ[(2−σ)/(2−σ)·1 + (2−σ)/σ].
        for sigma in [0.3, 1.5, 1.99] {
            let c = class(1, sigma, 0.7, 1.3);
            let exact = -4.0 * 0.7 * (1.0 + (2.0 - sigma) / sigma);
            let v = pucci_plus(&bump(1), &[0.0], &c, &QuadratureConfig::default()).unwrap();
            assert_relative_eq!(v, exact, max_relative = 1e-8);
        }
    }

    #[test]
    fn unbounded_fields_are_rejected() {
        let c = class(1, 1.0, 1.0, 1.0);
        let u = FieldFunction::analytic(1, Analytic::Quadratic { scale: 1.0 });
        let k = KernelSpec::new(c, Weight::ConstLower, None).unwrap();
        assert!(matches!(linear_apply(&u, &[0.0], &k, &QuadratureConfig::default()), Err(Error::UnboundedField)));
    }

    #[test]
    fn reflection_leaves_linear_value_unchanged() {
        let c = class(2, 1.4, 1.0, 2.0);
        let u = FieldFunction::analytic(
            2,
            Analytic::Gaussians { bumps: vec![GaussianBump { center: [0.3, -0.1], height: 1.0, width: 0.5 }] },
        );
        let x = [0.1, 0.2];
        let nodes = NodeSet::build(&[&u], &x, &c.profile, &QuadratureConfig::default()).unwrap();
        let k = KernelSpec::new(c, Weight::RadialBlend { phase: 0.3 }, None).unwrap();
        let a = nodes.linear(&u, &nodes.weights_for(&k).unwrap()).unwrap();
        let r = nodes.reflected();
        let b = r.linear(&u, &r.weights_for(&k).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn two_dimensional_bump_matches_radial_oracle() {
        // At x = 0, μ = −2|y|² inside the unit disc and −2 outside:
        // 𝓜⁺ = −λ 2π (2−σ)[2∫₀¹ s^{1−σ} ds + 2∫₁^∞ s^{−1−σ} ds].
        let sigma = 1.2;
        let c = class(2, sigma, 1.0, 1.0);
        let exact = -2.0 * PI * (2.0 - sigma) * (2.0 / (2.0 - sigma) + 2.0 / sigma);
        let v = pucci_plus(&bump(2), &[0.0, 0.0], &c, &QuadratureConfig::default()).unwrap();
        assert_relative_eq!(v, exact, max_relative = 1e-6);
    }

    #[test]
    fn family_rejects_mixed_classes() {
        let a = KernelSpec::new(class(1, 1.0, 1.0, 2.0), Weight::ConstLower, None).unwrap();
        let b = KernelSpec::new(class(1, 1.5, 1.0, 2.0), Weight::ConstLower, None).unwrap();
        assert!(OperatorFamily::new(vec![vec![a, b]]).is_err());
        assert!(matches!(OperatorFamily::new(vec![]), Err(Error::EmptyFamily)));
    }
}
