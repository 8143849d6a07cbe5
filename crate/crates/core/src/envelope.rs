//! Concave envelopes of grid functions, contact sets, least-norm
//! supergradients and the ring measure check of the ABP estimate.
//!
//! In 1-D the envelope of `u⁺` on the grid is the upper hull of the points
//! `(xᵢ, u⁺ᵢ)` (monotone chain). In 2-D the envelope value at a node `p` is
//! the linear program `max Σλᵢvᵢ` over convex weights with barycenter `p`,
//! solved by a three-row simplex with Bland's rule.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::FieldFunction;
use crate::kernels::KernelClass;

/// Values on a uniform box grid, optionally restricted to a ball.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    pub dim: usize,
    /// Nodes per axis (`n[1] = 1` in 1-D).
    pub n: [usize; 2],
    pub origin: [f64; 2],
    pub spacing: f64,
    pub values: Vec<f64>,
    /// Nodes taking part in the envelope; all when `None`.
    pub active: Option<Vec<bool>>,
}

impl GridFunction {
    pub fn new(dim: usize, n: [usize; 2], origin: [f64; 2], spacing: f64, values: Vec<f64>) -> Result<Self> {
        let count = if dim == 1 { n[0] } else { n[0] * n[1] };
        if !(dim == 1 || dim == 2) || count == 0 || values.len() != count || !(spacing > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "grid of dimension {dim} with {n:?} nodes cannot hold {} values",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("grid values must be finite".into()));
        }
        let n = if dim == 1 { [n[0], 1] } else { n };
        Ok(Self { dim, n, origin, spacing, values, active: None })
    }

    /// Samples `u` on the box `center + [−half, half]ⁿ`.
    pub fn sample(u: &FieldFunction, center: [f64; 2], half: f64, spacing: f64) -> Result<Self> {
        let dim = u.dim();
        let m = (2.0 * half / spacing).round() as usize + 1;
        let origin = [center[0] - half, center[1] - half];
        let n = if dim == 1 { [m, 1] } else { [m, m] };
        let mut values = Vec::with_capacity(n[0] * n[1]);
        for j in 0..n[1] {
            for i in 0..n[0] {
                let p = [origin[0] + i as f64 * spacing, origin[1] + j as f64 * spacing];
                values.push(u.eval(&p[..dim]));
            }
        }
        Self::new(dim, n, origin, spacing, values)
    }

    /// Keeps only nodes with `|x − center| ≤ radius`.
    pub fn restrict_to_ball(mut self, center: [f64; 2], radius: f64) -> Self {
        let mask = (0..self.len())
            .map(|k| {
                let p = self.point(k);
                let d2: f64 = (0..self.dim).map(|i| (p[i] - center[i]).powi(2)).sum();
                d2 <= radius * radius * (1.0 + 1e-12)
            })
            .collect();
        self.active = Some(mask);
        self
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn point(&self, k: usize) -> [f64; 2] {
        let (i, j) = (k % self.n[0], k / self.n[0]);
        let y = if self.dim == 1 { 0.0 } else { self.origin[1] + j as f64 * self.spacing };
        [self.origin[0] + i as f64 * self.spacing, y]
    }

    pub fn is_active(&self, k: usize) -> bool {
        self.active.as_ref().is_none_or(|m| m[k])
    }

    /// The same grid with values `f(v)`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { values: self.values.iter().map(|&v| f(v)).collect(), ..self.clone() }
    }
}

/// Envelope, contact set and supergradients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeResult {
    /// `Γ` at every node (`NaN` at inactive nodes).
    pub gamma: Vec<f64>,
    /// Node indices where `u⁺ = Γ` within tolerance.
    pub contact_set: Vec<usize>,
    /// Least-norm supergradient per contact node, in contact-set order.
    pub supergradients: Vec<[f64; 2]>,
    pub eps_contact: f64,
}

impl EnvelopeResult {
    pub fn is_contact(&self, k: usize) -> bool {
        self.contact_set.binary_search(&k).is_ok()
    }

    pub fn supergradient(&self, k: usize) -> Option<[f64; 2]> {
        self.contact_set.binary_search(&k).ok().map(|i| self.supergradients[i])
    }
}

/// Least concave majorant of `u⁺` on the active nodes.
///
/// `eps_contact` defaults to `1e−9` times the oscillation of `u⁺`.
pub fn concave_envelope(u: &GridFunction, eps_contact: Option<f64>) -> EnvelopeResult {
    let plus: Vec<f64> = u.values.iter().map(|v| v.max(0.0)).collect();
    let idx: Vec<usize> = (0..u.len()).filter(|&k| u.is_active(k)).collect();
    let mut gamma = vec![f64::NAN; u.len()];
    if u.dim == 1 {
        hull_1d(u, &plus, &idx, &mut gamma);
    } else {
        let pts: Vec<[f64; 3]> = idx
            .iter()
            .map(|&k| {
                let p = u.point(k);
                [p[0] - u.origin[0], p[1] - u.origin[1], plus[k]]
            })
            .collect();
        for (a, &k) in idx.iter().enumerate() {
            gamma[k] = lp_envelope(&pts, a).max(plus[k]);
        }
    }
    let (lo, hi) = idx.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &k| (l.min(plus[k]), h.max(plus[k])));
    let osc = if idx.is_empty() { 0.0 } else { hi - lo };
    let eps = eps_contact.unwrap_or(1e-9 * osc.max(1e-300));
    let contact_set: Vec<usize> = idx.iter().copied().filter(|&k| (gamma[k] - plus[k]).abs() <= eps).collect();
    let supergradients = contact_set
        .iter()
        .map(|&k| least_norm_supergradient(u, &plus, &contact_set, &gamma, k))
        .collect();
    EnvelopeResult { gamma, contact_set, supergradients, eps_contact: eps }
}

fn hull_1d(u: &GridFunction, v: &[f64], idx: &[usize], gamma: &mut [f64]) {
    let x = |k: usize| u.point(k)[0];
    let mut hull: Vec<usize> = Vec::new();
    for &k in idx {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            // Drop b when it lies on or below the chord a–k.
            let cross = (x(b) - x(a)) * (v[k] - v[a]) - (v[b] - v[a]) * (x(k) - x(a));
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(k);
    }
    let mut seg = 0;
    for &k in idx {
        while seg + 1 < hull.len() && x(hull[seg + 1]) < x(k) {
            seg += 1;
        }
        if hull.len() == 1 || x(hull[seg]) == x(k) {
            gamma[k] = v[hull[seg]];
        } else {
            let (a, b) = (hull[seg], hull[seg + 1]);
            let t = (x(k) - x(a)) / (x(b) - x(a));
            gamma[k] = (v[a] + t * (v[b] - v[a])).max(v[k]);
        }
    }
}

/// `max Σλᵢvᵢ` subject to `Σλᵢ(xᵢ − p) = 0`, `Σλᵢ = 1`, `λ ≥ 0`, with `p`
/// the node `start`; the initial basis is `{art₁, art₂, λ_start}`.
fn lp_envelope(pts: &[[f64; 3]], start: usize) -> f64 {
    let n = pts.len();
    let p = pts[start];
    let cols = n + 2;
    // Tableau rows: two barycenter rows and the convexity row.
    let mut t = vec![vec![0.0; cols + 1]; 3];
    for (i, q) in pts.iter().enumerate() {
        t[0][i] = q[0] - p[0];
        t[1][i] = q[1] - p[1];
        t[2][i] = 1.0;
    }
    t[0][n] = 1.0;
    t[1][n + 1] = 1.0;
    t[2][cols] = 1.0;
    let mut basis = [n, n + 1, start];
    let scale = pts.iter().fold(1.0_f64, |m, q| m.max(q[0].abs()).max(q[1].abs()));
    let tol = 1e-11 * scale;
    let pivot = |t: &mut Vec<Vec<f64>>, r: usize, c: usize| {
        let d = t[r][c];
        for v in t[r].iter_mut() {
            *v /= d;
        }
        for rr in 0..3 {
            if rr != r {
                let f = t[rr][c];
                if f != 0.0 {
                    for cc in 0..=cols {
                        t[rr][cc] -= f * t[r][cc];
                    }
                }
            }
        }
    };
    // Row 2 is the unit column of `start` already; eliminate it elsewhere.
    for r in 0..2 {
        let f = t[r][start];
        if f != 0.0 {
            for cc in 0..=cols {
                t[r][cc] -= f * t[2][cc];
            }
        }
    }
    // Drive the (zero-level) artificials out where possible.
    for r in 0..2 {
        if let Some(c) = (0..n).filter(|&c| !basis.contains(&c)).max_by(|&a, &b| t[r][a].abs().total_cmp(&t[r][b].abs())) {
            if t[r][c].abs() > tol {
                pivot(&mut t, r, c);
                basis[r] = c;
            }
        }
    }
    let cost = |c: usize| if c < n { pts[c][2] } else { 0.0 };
    for _ in 0..10_000 {
        // Reduced cost of column c: cost_c − Σ_r cost_{B_r} t[r][c].
        let entering = (0..n).find(|&c| {
            !basis.contains(&c) && cost(c) - (0..3).map(|r| cost(basis[r]) * t[r][c]).sum::<f64>() > 1e-12 * (1.0 + cost(c).abs())
        });
        let Some(c) = entering else { break };
        let mut best: Option<(f64, usize)> = None;
        for r in 0..3 {
            if basis[r] >= n && t[r][c].abs() > tol {
                // Artificial rows carry zero and must stay zero.
                best = Some((0.0, r));
                break;
            }
            if t[r][c] > tol {
                let ratio = t[r][cols] / t[r][c];
                match best {
                    Some((b, br)) if ratio > b || (ratio == b && basis[r] > basis[br]) => {}
                    _ => best = Some((ratio, r)),
                }
            }
        }
        let Some((_, r)) = best else { break };
        pivot(&mut t, r, c);
        basis[r] = c;
    }
    (0..3).map(|r| cost(basis[r]) * t[r][cols]).sum()
}

fn least_norm_supergradient(u: &GridFunction, v: &[f64], contact: &[usize], gamma: &[f64], k: usize) -> [f64; 2] {
    let p = u.point(k);
    let g = gamma[k];
    if u.dim == 1 {
        // a(xᵢ − p) ≥ vᵢ − Γ(p) for every contact node i.
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        for &i in contact {
            let d = u.point(i)[0] - p[0];
            let c = v[i] - g;
            if d > 0.0 {
                lo = lo.max(c / d);
            } else if d < 0.0 {
                hi = hi.min(c / d);
            }
        }
        if lo > hi {
            let m = 0.5 * (lo + hi);
            return [m, 0.0];
        }
        return [0.0_f64.clamp(lo, hi), 0.0];
    }
    let extent = u.spacing * (u.n[0].max(u.n[1]) as f64);
    let vmax = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let big = 1e3 * (vmax + 1.0) / u.spacing.min(extent);
    let mut poly = vec![[-big, -big], [big, -big], [big, big], [-big, big]];
    for &i in contact {
        if i == k {
            continue;
        }
        let q = u.point(i);
        let d = [q[0] - p[0], q[1] - p[1]];
        let c = v[i] - g;
        poly = clip(&poly, d, c - 1e-12 * (1.0 + c.abs()));
        if poly.is_empty() {
            break;
        }
    }
    if poly.is_empty() {
        return [0.0, 0.0];
    }
    min_norm_in_polygon(&poly)
}

/// Keeps the part of a convex polygon with `a·d ≥ c`.
fn clip(poly: &[[f64; 2]], d: [f64; 2], c: f64) -> Vec<[f64; 2]> {
    let f = |a: &[f64; 2]| a[0] * d[0] + a[1] * d[1] - c;
    let mut out = Vec::with_capacity(poly.len() + 1);
    for i in 0..poly.len() {
        let (a, b) = (poly[i], poly[(i + 1) % poly.len()]);
        let (fa, fb) = (f(&a), f(&b));
        if fa >= 0.0 {
            out.push(a);
        }
        if (fa >= 0.0) != (fb >= 0.0) {
            let t = fa / (fa - fb);
            out.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
        }
    }
    out
}

fn min_norm_in_polygon(poly: &[[f64; 2]]) -> [f64; 2] {
    if poly.len() >= 3 {
        let inside = (0..poly.len()).all(|i| {
            let (a, b) = (poly[i], poly[(i + 1) % poly.len()]);
            // Counter-clockwise orientation: origin on the left of every edge.
            (b[0] - a[0]) * (-a[1]) - (b[1] - a[1]) * (-a[0]) >= 0.0
        });
        if inside {
            return [0.0, 0.0];
        }
    }
    let mut best = poly[0];
    let n2 = |a: [f64; 2]| a[0] * a[0] + a[1] * a[1];
    for i in 0..poly.len() {
        let (a, b) = (poly[i], poly[(i + 1) % poly.len()]);
        let e = [b[0] - a[0], b[1] - a[1]];
        let ee = n2(e);
        let t = if ee > 0.0 { (-(a[0] * e[0] + a[1] * e[1]) / ee).clamp(0.0, 1.0) } else { 0.0 };
        let q = [a[0] + t * e[0], a[1] + t * e[1]];
        if n2(q) < n2(best) {
            best = q;
        }
    }
    best
}

/// `r_k = ρ₀ 2^{−1/(2(2−σ)) − k} R` for `k = 0..=k_max`.
pub fn abp_ring_radii(radius: f64, rho0: f64, sigma: f64, k_max: usize) -> Result<Vec<f64>> {
    if !(radius > 0.0 && radius < 1.0 && rho0 > 0.0 && rho0 < 1.0 && sigma > 0.0 && sigma < 2.0) {
        return Err(Error::InvalidParameter(format!("need R, ρ₀ in (0,1) and σ in (0,2), got {radius}, {rho0}, {sigma}")));
    }
    let r0 = rho0 * (-1.0 / (2.0 * (2.0 - sigma)) * std::f64::consts::LN_2).exp() * radius;
    Ok((0..=k_max).map(|k| r0 * 0.5f64.powi(k as i32)).collect())
}

/// `sup_{σ∈(0,2)} (1 − 2^{−2(2−σ)})/(2−σ)`, attained as `σ → 2`.
pub const RING_SUP: f64 = 2.0 * std::f64::consts::LN_2;

/// `C̃ = c_n a₀ /(λρ₀⁴) · sup_σ (1 − 2^{−2(2−σ)})/(2−σ)` with `c_n = 1`.
pub fn ring_constant(a0: f64, lambda_lo: f64, rho0: f64) -> f64 {
    a0 / (lambda_lo * rho0.powi(4)) * RING_SUP
}

/// Outcome of [`abp_measure_check`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbpReport {
    /// First ring satisfying the bound with `c_n = 1`.
    pub k: Option<usize>,
    /// Drop-set fraction per ring (`None` for rings without grid nodes).
    pub fractions: Vec<Option<f64>>,
    /// Right-hand side with `c_n = 1`.
    pub bound: f64,
    /// Smallest `c_n` for which some ring satisfies the bound.
    pub required_cn: f64,
    pub gradient: [f64; 2],
}

/// Inputs of the ring measure check besides the grid data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbpParams {
    /// Radius `R` of the problem ball.
    pub radius: f64,
    pub rho0: f64,
    /// Potter constant `a₀`.
    pub a0: f64,
    /// Drop depth `M`.
    pub m: f64,
    pub k_max: usize,
}

/// Measures `|{y ∈ 𝓡_k(x) : u(y) < u(x) + (y−x)·∇Γ(x) − M r_k²}| / |𝓡_k(x)|`
/// on the grid and compares with `(C̃/(l(R)R²))·(f(x)/M)`.
pub fn abp_measure_check(
    u: &GridFunction,
    f_at_x: f64,
    class: &KernelClass,
    x: usize,
    envelope: &EnvelopeResult,
    params: &AbpParams,
) -> Result<AbpReport> {
    let grad = envelope.supergradient(x).ok_or(Error::NoContactPoint)?;
    if !(params.m > 0.0) {
        return Err(Error::InvalidParameter(format!("drop depth M must be positive, got {}", params.m)));
    }
    let radii = abp_ring_radii(params.radius, params.rho0, class.sigma(), params.k_max + 1)?;
    let c_tilde = ring_constant(params.a0, class.lambda_lo, params.rho0);
    let bound = c_tilde / (class.profile.l(params.radius) * params.radius.powi(2)) * (f_at_x / params.m);
    let px = u.point(x);
    let ux = u.values[x];
    let mut fractions = Vec::with_capacity(params.k_max + 1);
    for k in 0..=params.k_max {
        let (outer, inner) = (radii[k], radii[k + 1]);
        let (mut total, mut drop) = (0usize, 0usize);
        for j in 0..u.len() {
            let q = u.point(j);
            let d = [q[0] - px[0], q[1] - px[1]];
            let r = (d[0] * d[0] + d[1] * d[1]).sqrt();
            if r >= inner && r < outer {
                total += 1;
                let plane = ux + d[0] * grad[0] + d[1] * grad[1] - params.m * outer * outer;
                if u.values[j] < plane {
                    drop += 1;
                }
            }
        }
        fractions.push((total > 0).then(|| drop as f64 / total as f64));
    }
    let k = fractions.iter().position(|f| f.is_some_and(|f| f <= bound));
    let required_cn = fractions
        .iter()
        .flatten()
        .map(|&f| if f == 0.0 { 0.0 } else if bound > 0.0 { f / bound } else { f64::INFINITY })
        .fold(f64::INFINITY, f64::min);
    Ok(AbpReport { k, fractions, bound, required_cn, gradient: grad })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn grid1(values: Vec<f64>, h: f64, x0: f64) -> GridFunction {
        GridFunction::new(1, [values.len(), 1], [x0, 0.0], h, values).unwrap()
    }

    #[test]
    fn spike_gives_tent() {
        let mut v = vec![0.0; 7];
        v[3] = 1.0;
        let u = grid1(v, 1.0, -3.0);
        let e = concave_envelope(&u, None);
        for k in 0..7 {
            let x = u.point(k)[0];
            assert_relative_eq!(e.gamma[k], (1.0 - x.abs() / 3.0).max(0.0), epsilon = 1e-15);
        }
        assert_eq!(e.contact_set, vec![0, 3, 6]);
        // Ends touch trivially as hull vertices; the peak has zero supergradient.
        assert_eq!(e.supergradient(3), Some([0.0, 0.0]));
    }

    #[test]
    fn concave_data_is_its_own_envelope() {
        let v: Vec<f64> = (0..21).map(|i| 1.0 - (-1.0 + 0.1 * i as f64).powi(2)).collect();
        let u = grid1(v.clone(), 0.1, -1.0);
        let e = concave_envelope(&u, None);
        for (g, x) in e.gamma.iter().zip(&v) {
            assert_relative_eq!(*g, x.max(0.0), epsilon = 1e-14);
        }
        assert_eq!(e.contact_set.len(), 21);
    }

    #[test]
    fn two_dimensional_pyramid() {
        let n = 5;
        let mut v = vec![0.0; n * n];
        v[2 * n + 2] = 1.0;
        let u = GridFunction::new(2, [n, n], [-2.0, -2.0], 1.0, v).unwrap();
        let e = concave_envelope(&u, None);
        // Least concave majorant of a single spike on a square: the pyramid
        // over the square's corners through the peak.
        for k in 0..n * n {
            let p = u.point(k);
            let expected = 1.0 - p[0].abs().max(p[1].abs()) / 2.0;
            assert_relative_eq!(e.gamma[k], expected, epsilon = 1e-12);
        }
        assert!(e.is_contact(2 * n + 2));
    }

    #[test]
    fn ring_radii_example() {
        let r = abp_ring_radii(0.5, 1.0 / 32.0, 1.0, 3).unwrap();
        assert_relative_eq!(r[0], 2f64.powf(-6.5), max_relative = 1e-14);
        for w in r.windows(2) {
            assert_eq!(w[1] / w[0], 0.5);
        }
        let near_two = abp_ring_radii(0.5, 1.0 / 32.0, 1.999, 0).unwrap();
        assert!(near_two[0] < 1e-100);
    }

    #[test]
    fn ring_sup_is_the_limit() {
        let g = |t: f64| -(-2.0 * t * std::f64::consts::LN_2).exp_m1() / t;
        for t in [1.9, 1.0, 0.1, 1e-3] {
            assert!(g(t) < RING_SUP);
        }
        assert_relative_eq!(g(1e-9), RING_SUP, max_relative = 1e-8);
    }

    #[test]
    fn non_contact_point_is_rejected() {
        use crate::kernels::KernelClass;
        use crate::regvar::{KernelProfile, SlowlyVarying};
        let v = vec![0.0, 1.0, 0.0, 1.0, 0.0];
        let u = grid1(v, 0.25, -0.5);
        let e = concave_envelope(&u, None);
        assert!(!e.is_contact(2));
        let c = KernelClass::new(1, KernelProfile::new(1.0, SlowlyVarying::Constant).unwrap(), 1.0, 1.0).unwrap();
        let p = AbpParams { radius: 0.25, rho0: 0.03, a0: 1.0, m: 1.0, k_max: 4 };
        assert!(matches!(abp_measure_check(&u, 0.1, &c, 2, &e, &p), Err(Error::NoContactPoint)));
    }

    /// Minimum over lines through node pairs that majorize every node.
    fn brute_1d(u: &GridFunction) -> Vec<f64> {
        let v: Vec<f64> = u.values.iter().map(|x| x.max(0.0)).collect();
        let x: Vec<f64> = (0..u.len()).map(|k| u.point(k)[0]).collect();
        let mut out = vec![f64::INFINITY; u.len()];
        for i in 0..u.len() {
            for j in i + 1..u.len() {
                let a = (v[j] - v[i]) / (x[j] - x[i]);
                let line = |t: f64| v[i] + a * (t - x[i]);
                if (0..u.len()).all(|m| line(x[m]) >= v[m] - 1e-12) {
                    for m in 0..u.len() {
                        out[m] = out[m].min(line(x[m]));
                    }
                }
            }
        }
        out
    }

    /// Minimum over planes through non-collinear node triples that majorize
    /// every node.
    fn brute_2d(u: &GridFunction) -> Vec<f64> {
        let v: Vec<f64> = u.values.iter().map(|x| x.max(0.0)).collect();
        let p: Vec<[f64; 2]> = (0..u.len()).map(|k| u.point(k)).collect();
        let n = u.len();
        let mut out = vec![f64::INFINITY; n];
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    let (d1, d2) = ([p[j][0] - p[i][0], p[j][1] - p[i][1]], [p[k][0] - p[i][0], p[k][1] - p[i][1]]);
                    let det = d1[0] * d2[1] - d1[1] * d2[0];
                    if det.abs() < 1e-12 {
                        continue;
                    }
                    let (e1, e2) = (v[j] - v[i], v[k] - v[i]);
                    let a = [(e1 * d2[1] - e2 * d1[1]) / det, (d1[0] * e2 - d2[0] * e1) / det];
                    let plane = |q: [f64; 2]| v[i] + a[0] * (q[0] - p[i][0]) + a[1] * (q[1] - p[i][1]);
                    if (0..n).all(|m| plane(p[m]) >= v[m] - 1e-12) {
                        for m in 0..n {
                            out[m] = out[m].min(plane(p[m]));
                        }
                    }
                }
            }
        }
        out
    }

    fn check_supergradients(u: &GridFunction, e: &EnvelopeResult) {
        for (&k, g) in e.contact_set.iter().zip(&e.supergradients) {
            let p = u.point(k);
            for m in 0..u.len() {
                let q = u.point(m);
                let plane = e.gamma[k] + g[0] * (q[0] - p[0]) + g[1] * (q[1] - p[1]);
                assert!(plane >= u.values[m].max(0.0) - 1e-8, "supporting plane at {k} fails at {m}");
            }
        }
    }

    #[test]
    fn least_norm_supergradient_in_1d() {
        // Peak at the middle of a tent: superdifferential [−1, 1], least norm 0.
        // Increasing line: slope 1 inside; (−∞, 1] at the right end, least norm 0.
        let u = grid1(vec![0.0, 0.5, 1.0, 0.5, 0.0], 0.5, -1.0);
        let e = concave_envelope(&u, None);
        assert_eq!(e.supergradient(2), Some([0.0, 0.0]));
        let u = grid1(vec![0.0, 0.5, 1.0], 0.5, 0.0);
        let e = concave_envelope(&u, None);
        assert_eq!(e.supergradient(2), Some([0.0, 0.0]));
        assert_relative_eq!(e.supergradient(1).unwrap()[0], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn least_norm_supergradient_in_2d() {
        // Plane u = 1 + 0.3x − 0.2y on a 3×3 grid: the superdifferential at the
        // center is the single gradient.
        let v: Vec<f64> = (0..9)
            .map(|k| {
                let (x, y) = ((k % 3) as f64 - 1.0, (k / 3) as f64 - 1.0);
                1.0 + 0.3 * x - 0.2 * y
            })
            .collect();
        let u = GridFunction::new(2, [3, 3], [-1.0, -1.0], 1.0, v).unwrap();
        let e = concave_envelope(&u, None);
        let g = e.supergradient(4).unwrap();
        assert_relative_eq!(g[0], 0.3, epsilon = 1e-9);
        assert_relative_eq!(g[1], -0.2, epsilon = 1e-9);
    }

    #[test]
    fn ball_restriction_ignores_outside_nodes() {
        let mut v = vec![0.0; 9];
        v[0] = 10.0;
        let u = grid1(v, 0.25, -1.0).restrict_to_ball([0.0, 0.0], 0.5);
        let e = concave_envelope(&u, None);
        assert!(e.gamma[0].is_nan());
        assert!(e.gamma[2..7].iter().all(|&g| g == 0.0));
    }

    proptest::proptest! {
        #[test]
        fn envelope_matches_brute_force_1d(v in proptest::collection::vec(-1.0f64..1.0, 2..24)) {
            let u = grid1(v, 0.1, -0.3);
            let e = concave_envelope(&u, None);
            let b = brute_1d(&u);
            for k in 0..u.len() {
                proptest::prop_assert!((e.gamma[k] - b[k]).abs() <= 1e-12, "node {k}: {} vs {}", e.gamma[k], b[k]);
                proptest::prop_assert!(e.gamma[k] >= u.values[k].max(0.0));
            }
            for w in e.gamma.windows(3) {
                proptest::prop_assert!(w[0] + w[2] - 2.0 * w[1] <= 1e-12);
            }
            check_supergradients(&u, &e);
        }

        #[test]
        fn envelope_matches_brute_force_2d(v in proptest::collection::vec(-0.5f64..1.0, 16)) {
            let u = GridFunction::new(2, [4, 4], [-0.3, -0.3], 0.2, v).unwrap();
            let e = concave_envelope(&u, None);
            let b = brute_2d(&u);
            for k in 0..u.len() {
                proptest::prop_assert!((e.gamma[k] - b[k]).abs() <= 1e-9, "node {k}: {} vs {}", e.gamma[k], b[k]);
                proptest::prop_assert!(e.gamma[k] >= u.values[k].max(0.0) - 1e-12);
            }
            check_supergradients(&u, &e);
        }
    }
}
