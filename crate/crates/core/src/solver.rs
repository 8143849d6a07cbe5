//! Monotone collocation scheme for nonlocal Dirichlet problems on `B_{2R}`.
//!
//! Unknowns live on the lattice `hℤⁿ ∩ B_{2R}`. At each node the operator is
//! a sum over lattice offsets `±d` of `w(d)·μ(d)` plus a radial tail beyond
//! `|y| ≥ 4R`, where both `x ± y` lie outside the ball and only the exterior
//! data enter. In 1-D the cell `[jh, (j+1)h]` splits its kernel mass between
//! its end nodes so that the moments of `1` and `s²` are exact; in 2-D each
//! square cell carries its kernel mass, the tail starts at the edge of the
//! lattice square and the second-moment defect of the cells is moved to the
//! axis offsets. The inner cell is a Taylor term `∫K y² · D²u` with `D²u`
//! read off the axis offsets.
//!
//! Equations are solved by policy iteration (the frozen-coefficient linear
//! systems are M-matrices), falling back to the damped fixed point
//! `u ← u + τ(𝓞u − f)`.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Analytic, FieldFunction, GridField};
use crate::kernels::{sphere_area, KernelClass, KernelSpec};
use crate::ops::{Extremal, OperatorFamily};
use crate::quad::{gauss_legendre, kronrod_nodes};

/// Operator of a Dirichlet problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProblemOperator {
    PucciMinus,
    PucciPlus,
    Linear { kernel: KernelSpec },
    InfSup { family: OperatorFamily },
}

/// Iteration used by [`solve`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMethod {
    Policy,
    FixedPoint,
}

/// Discretization and iteration settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Radius of the Taylor inner region in cells; above 1 the second
    /// derivative is Richardson-extrapolated from offsets `h` and `2h`.
    pub inner_split: usize,
    /// Angles on the half circle for the 2-D tail.
    pub angular_order: usize,
    pub method: SolveMethod,
    /// Outer iterations of policy iteration for inf-sup problems.
    pub policy_cap: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { inner_split: 1, angular_order: 32, method: SolveMethod::Policy, policy_cap: 50 }
    }
}

/// `𝓞u = f` in `B_{2R}`, `u = g` outside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirichletProblem {
    pub operator: ProblemOperator,
    pub class: KernelClass,
    /// `R`; the domain is `B_{2R}`.
    pub radius: f64,
    /// Lattice spacing `h`, dividing `2R`.
    pub spacing: f64,
    pub rhs: FieldFunction,
    pub exterior: Analytic,
    #[serde(default)]
    pub config: SolverConfig,
}

/// Solution of [`solve`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    /// Grid values inside `B_{2R}`, exterior data outside.
    pub u: FieldFunction,
    /// `max |𝓞_h u − f|` over the unknowns.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone)]
enum Kind {
    Extremal(Extremal),
    /// Members indexed `[β][α]` into the weight tables.
    Family(Vec<Vec<usize>>),
}

/// Exterior contribution at one node beyond `|y| = 4R`.
#[derive(Debug, Clone)]
enum Tail {
    /// Pair values `G` sorted ascending with prefix sums of `W` and `W·G`;
    /// the tail is `Σ W·a(μ)·μ`, `μ = G − 2u(x)`.
    Sorted { g: Vec<f64>, w: Vec<f64>, wg: Vec<f64> },
    /// Per member `(Σ W·G, Σ W)`; the tail is `A − 2u(x)·B`.
    Linear(Vec<(f64, f64)>),
}

/// Assembled scheme: lattice weights, exterior data and tails.
#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    dim: usize,
    spacing: f64,
    /// Interior lattice radius `N = 2R/h`.
    n: i64,
    lo: f64,
    hi: f64,
    kind: Kind,
    /// Half-lattice offsets, one per pair `±d`.
    offsets: Vec<[i64; 2]>,
    /// Weights per offset, one table per kernel.
    tables: Vec<Vec<f64>>,
    nodes: Vec<[i64; 2]>,
    /// Unknown index on the box `[−N, N]ⁿ`.
    index: Vec<Option<u32>>,
    /// Exterior data on the box `[−3N, 3N]ⁿ`.
    known: Vec<f64>,
    tails: Vec<Tail>,
    /// Upper bound of the diagonal of `−𝓞` per node.
    mass: Vec<f64>,
    radius: f64,
    exterior: Analytic,
}

fn lattice_box(n: i64, dim: usize) -> usize {
    let side = (2 * n + 1) as usize;
    if dim == 1 {
        side
    } else {
        side * side
    }
}

fn box_index(c: [i64; 2], n: i64, dim: usize) -> Option<usize> {
    if c[0].abs() > n || c[1].abs() > n {
        return None;
    }
    let side = 2 * n + 1;
    let i = (c[0] + n) as usize;
    Some(if dim == 1 { i } else { i + ((c[1] + n) * side) as usize })
}

/// `∫_a^b s^p ω(s) l(s) ds` for one kernel of the scheme.
type Moment<'a> = Box<dyn Fn(f64, f64, f64) -> Result<f64> + Sync + 'a>;

impl DiscreteOperator {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Coordinates of unknown `k`.
    pub fn node(&self, k: usize) -> [f64; 2] {
        let c = self.nodes[k];
        [c[0] as f64 * self.spacing, c[1] as f64 * self.spacing]
    }

    /// Rejects negative off-center weights.
    fn check_monotone(&self) -> Result<()> {
        for t in &self.tables {
            for (o, &w) in t.iter().enumerate() {
                if w < 0.0 {
                    return Err(Error::NonMonotoneStencil { offset: o, weight: w });
                }
            }
        }
        Ok(())
    }

    /// Samples a field at the unknowns.
    pub fn sample(&self, u: &FieldFunction) -> Vec<f64> {
        (0..self.len()).map(|k| u.eval(&self.node(k)[..self.dim])).collect()
    }

    #[inline]
    fn value(&self, c: [i64; 2], u: &[f64]) -> f64 {
        if let Some(Some(k)) = box_index(c, self.n, self.dim).map(|b| self.index[b]) {
            return u[k as usize];
        }
        let b = box_index(c, 3 * self.n, self.dim).expect("offset beyond the exterior box");
        self.known[b]
    }

    fn mu(&self, k: usize, o: usize, u: &[f64]) -> f64 {
        let (c, d) = (self.nodes[k], self.offsets[o]);
        let p = self.value([c[0] + d[0], c[1] + d[1]], u);
        let m = self.value([c[0] - d[0], c[1] - d[1]], u);
        (p + m) - 2.0 * u[k]
    }

    fn member_value(&self, k: usize, m: usize, mus: &[f64], u: &[f64]) -> f64 {
        let lattice: f64 = self.tables[m].iter().zip(mus).map(|(w, mu)| w * mu).sum();
        match &self.tails[k] {
            Tail::Linear(v) => lattice + v[m].0 - 2.0 * u[k] * v[m].1,
            Tail::Sorted { .. } => unreachable!("linear member on an extremal tail"),
        }
    }

    fn extremal_tail(&self, k: usize, sign: Extremal, uk: f64) -> (f64, f64) {
        let Tail::Sorted { g, w, wg } = &self.tails[k] else { unreachable!("extremal tail expected") };
        let t = 2.0 * uk;
        let split = g.partition_point(|&v| v <= t);
        let (w_tot, wg_tot) = (w[w.len() - 1], wg[wg.len() - 1]);
        let (w_lo, wg_lo) = (w[split], wg[split]);
        let pos = (wg_tot - wg_lo) - t * (w_tot - w_lo);
        let neg = wg_lo - t * w_lo;
        let (a_pos, a_neg) = match sign {
            Extremal::Plus => (self.hi, self.lo),
            Extremal::Minus => (self.lo, self.hi),
        };
        // Value and derivative with respect to u(x).
        (a_pos * pos + a_neg * neg, -2.0 * (a_pos * (w_tot - w_lo) + a_neg * w_lo))
    }

    fn node_value(&self, k: usize, u: &[f64]) -> f64 {
        let mus: Vec<f64> = (0..self.offsets.len()).map(|o| self.mu(k, o, u)).collect();
        match &self.kind {
            Kind::Extremal(sign) => {
                let lattice: f64 = self.tables[0].iter().zip(&mus).map(|(w, &mu)| w * sign.apply(self.lo, self.hi, mu)).sum();
                lattice + self.extremal_tail(k, *sign, u[k]).0
            }
            Kind::Family(rows) => rows
                .iter()
                .map(|row| row.iter().map(|&m| self.member_value(k, m, &mus, u)).fold(f64::NEG_INFINITY, f64::max))
                .fold(f64::INFINITY, f64::min),
        }
    }

    /// `𝓞_h u` at every unknown.
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        (0..self.len()).into_par_iter().map(|k| self.node_value(k, u)).collect()
    }

    /// Row `k` of the operator with coefficients frozen at `u`:
    /// `𝓞_h v(x_k) = Σ_j a_j v_j + b` near `u`.
    fn linearize(&self, k: usize, u: &[f64]) -> (Vec<(usize, f64)>, f64) {
        let c = self.nodes[k];
        let mus: Vec<f64> = (0..self.offsets.len()).map(|o| self.mu(k, o, u)).collect();
        let (table, mut diag, mut b, coef): (usize, f64, f64, Box<dyn Fn(f64) -> f64>) = match &self.kind {
            Kind::Extremal(sign) => {
                let (v, dv) = self.extremal_tail(k, *sign, u[k]);
                let (lo, hi, s) = (self.lo, self.hi, *sign);
                // Tail is affine in u(x) between sign changes.
                (0, dv, v - dv * u[k], Box::new(move |mu: f64| s.apply(lo, hi, mu) / if mu == 0.0 { 1.0 } else { mu }))
            }
            Kind::Family(rows) => {
                let mut best = (f64::INFINITY, 0);
                for row in rows {
                    let mut top = (f64::NEG_INFINITY, 0);
                    for &m in row {
                        let v = self.member_value(k, m, &mus, u);
                        if v > top.0 {
                            top = (v, m);
                        }
                    }
                    if top.0 < best.0 {
                        best = top;
                    }
                }
                let Tail::Linear(v) = &self.tails[k] else { unreachable!() };
                let (a, bb) = v[best.1];
                (best.1, -2.0 * bb, a, Box::new(|_| 1.0))
            }
        };
        let mut row: Vec<(usize, f64)> = Vec::new();
        for (o, d) in self.offsets.iter().enumerate() {
            let w = self.tables[table][o];
            if w == 0.0 {
                continue;
            }
            let a = w * coef(mus[o]);
            diag -= 2.0 * a;
            for side in [1, -1] {
                let q = [c[0] + side * d[0], c[1] + side * d[1]];
                match box_index(q, self.n, self.dim).and_then(|bi| self.index[bi]) {
                    Some(j) => row.push((j as usize, a)),
                    None => b += a * self.value(q, u),
                }
            }
        }
        row.push((k, diag));
        (row, b)
    }

    /// Upper bound on the diagonal of `−𝓞_h` at unknown `k`.
    pub fn stencil_mass(&self, k: usize) -> f64 {
        self.mass[k]
    }

    /// Wraps unknown values into a field with the exterior data outside.
    pub fn to_field(&self, u: &[f64]) -> Result<FieldFunction> {
        let h = self.spacing;
        let grid = GridField::sample(self.dim, [0.0, 0.0], self.radius, h, self.exterior.clone(), |x| {
            let c = [(x[0] / h).round() as i64, if self.dim == 2 { (x[1] / h).round() as i64 } else { 0 }];
            match box_index(c, self.n, self.dim).and_then(|b| self.index[b]) {
                Some(k) => u[k as usize],
                None => self.exterior.eval(x),
            }
        })?;
        Ok(FieldFunction::Grid(grid))
    }
}

/// Builds the scheme of a problem.
pub fn assemble(problem: &DirichletProblem) -> Result<DiscreteOperator> {
    let class = &problem.class;
    let dim = class.dim;
    if !(dim == 1 || dim == 2) {
        return Err(Error::InvalidParameter(format!("solver supports n ≤ 2, got {dim}")));
    }
    if problem.rhs.dim() != dim {
        return Err(Error::InvalidParameter("right-hand side dimension does not match the class".into()));
    }
    let (r, h) = (problem.radius, problem.spacing);
    let cells = 2.0 * r / h;
    if !(r > 0.0 && h > 0.0) || (cells - cells.round()).abs() > 1e-9 * cells || cells.round() < 2.0 {
        return Err(Error::InvalidGrid(cells.round().max(0.0) as usize));
    }
    let c = problem.exterior.asymptote().ok_or(Error::UnboundedField)?;
    let n = cells.round() as i64;
    let cfg = problem.config;
    if cfg.inner_split == 0 || cfg.inner_split as i64 > n || (dim == 2 && cfg.angular_order < 4) {
        return Err(Error::InvalidParameter(format!("inner split {} is out of range", cfg.inner_split)));
    }
    let sigma = class.sigma();
    let profile = class.profile;

    // Kernels of the scheme: the unit-weight density for extremal problems,
    // each member otherwise.
    let (kind, specs): (Kind, Vec<Option<KernelSpec>>) = match &problem.operator {
        ProblemOperator::PucciMinus => (Kind::Extremal(Extremal::Minus), vec![None]),
        ProblemOperator::PucciPlus => (Kind::Extremal(Extremal::Plus), vec![None]),
        ProblemOperator::Linear { kernel } => {
            if kernel.class != *class {
                return Err(Error::InvalidParameter("kernel class differs from the problem class".into()));
            }
            (Kind::Family(vec![vec![0]]), vec![Some(*kernel)])
        }
        ProblemOperator::InfSup { family } => {
            if family.class() != *class {
                return Err(Error::InvalidParameter("family class differs from the problem class".into()));
            }
            let mut rows = Vec::new();
            let mut specs = Vec::new();
            for row in family.members() {
                rows.push(row.iter().map(|k| {
                    specs.push(Some(*k));
                    specs.len() - 1
                }).collect());
            }
            (Kind::Family(rows), specs)
        }
    };
    let omega = |spec: &Option<KernelSpec>, s: f64| spec.as_ref().map_or(1.0, |k| k.radial_factor(s));
    let moments: Vec<Moment> = specs
        .iter()
        .map(|spec| -> Moment {
            match spec {
                None => Box::new(move |p, a, b| profile.moment(p, a, b)),
                Some(k) => {
                    let k = *k;
                    Box::new(move |p, a, b| k.weighted_moment(p, a, b))
                }
            }
        })
        .collect();

    // Half-lattice offsets with |d|_∞ ≤ 2N; in 2-D the cells tile the
    // square of half-width (2N + ½)h.
    let reach = 2 * n;
    let mut offsets = Vec::new();
    if dim == 1 {
        offsets.extend((1..=reach).map(|j| [j, 0]));
    } else {
        for a in 0..=reach {
            for b in -reach..=reach {
                if a > 0 || b > 0 {
                    offsets.push([a, b]);
                }
            }
        }
    }
    let k_in = cfg.inner_split as i64;
    let two_minus = 2.0 - sigma;
    let tables: Vec<Vec<f64>> = specs
        .iter()
        .zip(&moments)
        .map(|(spec, moment)| {
            if dim == 1 {
                weights_1d(moment, two_minus, h, reach, k_in)
            } else {
                weights_2d(class, spec, &offsets, moment, two_minus, h, k_in, reach)
            }
        })
        .collect::<Result<_>>()?;

    // Unknowns and exterior data.
    let mut nodes = Vec::new();
    let mut index = vec![None; lattice_box(n, dim)];
    let range = |m: i64| -m..=m;
    let ys: Vec<i64> = if dim == 1 { vec![0] } else { range(n).collect() };
    for &j in &ys {
        for i in range(n) {
            if i * i + j * j < n * n {
                index[box_index([i, j], n, dim).unwrap()] = Some(nodes.len() as u32);
                nodes.push([i, j]);
            }
        }
    }
    let big = 3 * n;
    let mut known = vec![0.0; lattice_box(big, dim)];
    let ys: Vec<i64> = if dim == 1 { vec![0] } else { range(big).collect() };
    for &j in &ys {
        for i in range(big) {
            known[box_index([i, j], big, dim).unwrap()] = problem.exterior.eval(&[i as f64 * h, j as f64 * h][..dim]);
        }
    }

    // Radial tails beyond Y = 4R.
    let y_start = reach as f64 * h;
    let sup = problem.exterior.sup_norm().unwrap_or(c.abs());
    let mut rho = 2.0 * r;
    while problem.exterior.deviation_beyond(rho) > 1e-13 * (1.0 + sup) && rho < 1e8 {
        rho *= 2.0;
    }
    let extremal = matches!(kind, Kind::Extremal(_));
    let far_mass = |m: usize, s: f64| -> Result<f64> { Ok(sphere_area(dim) * two_minus * moments[m](-1.0, s, f64::INFINITY)?) };
    let kinks = problem.exterior.kinks();
    let l_kink = profile.l0().kink();
    // Directions on the half circle with their weights and the radius where
    // the tail starts: 4R in 1-D, the lattice square's edge in 2-D.
    let angular: Vec<([f64; 2], f64, f64)> = if dim == 1 {
        vec![([1.0, 0.0], 1.0, y_start)]
    } else {
        let edge = (reach as f64 + 0.5) * h;
        let per = cfg.angular_order.div_ceil(4);
        let (gx, gw) = gauss_legendre(per);
        let quarter = std::f64::consts::FRAC_PI_4;
        (0..4)
            .flat_map(|q| {
                gx.iter().zip(&gw).map(move |(t, w)| {
                    let th = quarter * (q as f64 + 0.5 * (t + 1.0));
                    let (c, s) = (th.cos(), th.sin());
                    ([c, s], 0.5 * quarter * w, edge / c.abs().max(s.abs()))
                })
            })
            .collect::<Vec<_>>()
    };
    let y_max = angular.iter().fold(0.0_f64, |m, a| m.max(a.2));
    let tails: Vec<Tail> = nodes
        .par_iter()
        .map(|&cn| -> Result<Tail> {
            let x = [cn[0] as f64 * h, cn[1] as f64 * h];
            let xn = (x[0] * x[0] + x[1] * x[1]).sqrt();
            let s_end = y_max.max(xn + rho);
            let mut entries: Vec<(f64, f64, f64)> = Vec::new();
            for &(dir, aw, start) in &angular {
                let mut brk = vec![start.ln(), s_end.ln(), 0.0];
                if let Some(kk) = l_kink {
                    brk.push(kk.ln());
                }
                if dim == 1 {
                    for kink in &kinks {
                        for p in [kink.center[0] - kink.radius, kink.center[0] + kink.radius] {
                            let s = (p - x[0]).abs();
                            if s > 0.0 {
                                brk.push(s.ln());
                            }
                        }
                    }
                }
                let (lo_t, hi_t) = (start.ln(), s_end.ln());
                brk.retain(|&t| t >= lo_t && t <= hi_t);
                brk.sort_by(f64::total_cmp);
                brk.dedup();
                for w in brk.windows(2) {
                    let pieces = ((w[1] - w[0]) / (0.5 * std::f64::consts::LN_2)).ceil().max(1.0) as usize;
                    for p in 0..pieces {
                        let a = w[0] + (w[1] - w[0]) * p as f64 / pieces as f64;
                        let b = w[0] + (w[1] - w[0]) * (p + 1) as f64 / pieces as f64;
                        for (t, wt) in kronrod_nodes(a, b) {
                            let s = t.exp();
                            let yp = [x[0] + s * dir[0], x[1] + s * dir[1]];
                            let ym = [x[0] - s * dir[0], x[1] - s * dir[1]];
                            let g = problem.exterior.eval(&yp[..dim]) + problem.exterior.eval(&ym[..dim]);
                            entries.push((s, 2.0 * two_minus * profile.l(s) * wt * aw, g));
                        }
                    }
                }
            }
            if extremal {
                let far = far_mass(0, s_end)?;
                entries.push((s_end, far, 2.0 * c));
                entries.sort_by(|a, b| a.2.total_cmp(&b.2));
                let mut g = Vec::with_capacity(entries.len());
                let (mut w, mut wg) = (vec![0.0], vec![0.0]);
                for &(_, we, ge) in &entries {
                    g.push(ge);
                    w.push(w[w.len() - 1] + we);
                    wg.push(wg[wg.len() - 1] + we * ge);
                }
                Ok(Tail::Sorted { g, w, wg })
            } else {
                let mut v = Vec::with_capacity(specs.len());
                for (m, spec) in specs.iter().enumerate() {
                    let far = far_mass(m, s_end)?;
                    let (mut a, mut b) = (far * 2.0 * c, far);
                    for &(s, we, ge) in &entries {
                        let om = omega(spec, s);
                        a += we * om * ge;
                        b += we * om;
                    }
                    v.push((a, b));
                }
                Ok(Tail::Linear(v))
            }
        })
        .collect::<Result<_>>()?;

    let coef = if extremal { class.lambda_hi } else { 1.0 };
    let lattice_mass = tables.iter().map(|t| t.iter().map(|w| w.max(0.0)).sum::<f64>()).fold(0.0, f64::max);
    let mass = tails
        .iter()
        .map(|t| {
            let tail = match t {
                Tail::Sorted { w, .. } => w[w.len() - 1],
                Tail::Linear(v) => v.iter().map(|p| p.1).fold(0.0, f64::max),
            };
            2.0 * coef * (lattice_mass + tail)
        })
        .collect();
    let op = DiscreteOperator {
        dim,
        spacing: h,
        n,
        lo: class.lambda_lo,
        hi: class.lambda_hi,
        kind,
        offsets,
        tables,
        nodes,
        index,
        known,
        tails,
        mass,
        radius: 2.0 * r,
        exterior: problem.exterior.clone(),
    };
    op.check_monotone()?;
    Ok(op)
}

/// Inner Taylor term: pair weights added to offsets `1` and `2` for the
/// second moment `m2` of the inner region.
fn inner_weights(m2: f64, h: f64, k_in: i64) -> (f64, f64) {
    if k_in == 1 {
        (m2 / (h * h), 0.0)
    } else {
        (4.0 * m2 / (3.0 * h * h), -m2 / (12.0 * h * h))
    }
}

fn weights_1d(moment: &Moment, two_minus: f64, h: f64, reach: i64, k_in: i64) -> Result<Vec<f64>> {
    let mut w = vec![0.0; reach as usize];
    // Both half-lines: ∫_{−r}^{r} K y² dy = 2(2−σ) ∫₀^r s l ω ds.
    let m2 = 2.0 * two_minus * moment(1.0, 0.0, k_in as f64 * h)?;
    let (w1, w2) = inner_weights(m2, h, k_in);
    w[0] += w1;
    if reach >= 2 {
        w[1] += w2;
    }
    for j in k_in..reach {
        let (a, b) = (j as f64 * h, (j + 1) as f64 * h);
        // Cell moments of the pair density 2k(s) = 2(2−σ) ω l / s.
        let m0 = 2.0 * two_minus * moment(-1.0, a, b)?;
        let m2 = 2.0 * two_minus * moment(1.0, a, b)?;
        let right = ((m2 - m0 * a * a) / (b * b - a * a)).clamp(0.0, m0);
        if j >= 1 {
            w[(j - 1) as usize] += m0 - right;
        }
        w[j as usize] += right;
    }
    Ok(w)
}

fn weights_2d(
    class: &KernelClass,
    spec: &Option<KernelSpec>,
    offsets: &[[i64; 2]],
    moment: &Moment,
    two_minus: f64,
    h: f64,
    k_in: i64,
    reach: i64,
) -> Result<Vec<f64>> {
    let density = |s: f64| spec.as_ref().map_or(1.0, |k| k.radial_factor(s)) * class.base_density(s);
    // ∫_{square} K y₁² over the square of half-width a = (k_in − ½)h, in
    // polar coordinates over one octant: ½·8∫₀^{π/4} (2−σ)∫₀^{a/cosθ} s ω l ds dθ.
    let square_moment = |a: f64| -> Result<f64> {
        let (gx, gw) = gauss_legendre(24);
        let quarter = std::f64::consts::FRAC_PI_4;
        let mut m2 = 0.0;
        for (t, wt) in gx.iter().zip(&gw) {
            let th = quarter * 0.5 * (t + 1.0);
            m2 += 0.5 * quarter * wt * two_minus * moment(1.0, 0.0, a / th.cos())?;
        }
        Ok(4.0 * m2)
    };
    let m2 = square_moment((k_in as f64 - 0.5) * h)?;
    let (w1, w2) = inner_weights(m2, h, k_in);
    let (g8, w8) = gauss_legendre(8);
    let (g4, w4) = gauss_legendre(4);
    let weights = offsets
        .iter()
        .map(|d| {
            let mut w = 0.0;
            if d[0].abs().max(d[1].abs()) >= k_in {
                let near = d[0].abs().max(d[1].abs()) <= 3;
                let (gx, gw) = if near { (&g8, &w8) } else { (&g4, &w4) };
                for (u, wu) in gx.iter().zip(gw.iter()) {
                    for (v, wv) in gx.iter().zip(gw.iter()) {
                        let y = [(d[0] as f64 + 0.5 * u) * h, (d[1] as f64 + 0.5 * v) * h];
                        let s = (y[0] * y[0] + y[1] * y[1]).sqrt();
                        w += 0.25 * h * h * wu * wv * density(s);
                    }
                }
                w *= 2.0;
            }
            match (d[0], d[1]) {
                (1, 0) | (0, 1) => w += w1,
                (2, 0) | (0, 2) => w += w2,
                _ => {}
            }
            w
        })
        .collect::<Vec<f64>>();
    // Second moment of the whole lattice square, exact minus discrete; the
    // difference goes to the axis offsets so quadratics are integrated exactly.
    let edge = (reach as f64 + 0.5) * h;
    let exact = square_moment(edge)?;
    let discrete: f64 = offsets.iter().zip(&weights).map(|(d, w)| w * (d[0] as f64 * h).powi(2)).sum();
    let mut weights = weights;
    for (o, d) in offsets.iter().enumerate() {
        if matches!((d[0], d[1]), (1, 0) | (0, 1)) {
            weights[o] += (exact - discrete) / (h * h);
        }
    }
    Ok(weights)
}

fn residual(op: &DiscreteOperator, u: &[f64], f: &[f64]) -> f64 {
    op.apply(u).iter().zip(f).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

/// Damped fixed point `u ← u + τ(𝓞_h u − f)` with `τ = 1/max stencil mass`.
/// Returns the residual after each sweep.
pub fn damped_iteration(op: &DiscreteOperator, u: &mut [f64], f: &[f64], tol: f64, max_iter: usize) -> Vec<f64> {
    let tau = 1.0 / op.mass.iter().fold(0.0_f64, |m, &v| m.max(v));
    let mut history = Vec::new();
    for _ in 0..max_iter {
        let v = op.apply(u);
        let r = v.iter().zip(f).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        history.push(r);
        if r <= tol {
            break;
        }
        for ((ui, vi), fi) in u.iter_mut().zip(&v).zip(f) {
            *ui += tau * (vi - fi);
        }
    }
    history
}

fn policy_step(op: &DiscreteOperator, u: &[f64], f: &[f64]) -> Option<Vec<f64>> {
    let m = op.len();
    let rows: Vec<(Vec<(usize, f64)>, f64)> = (0..m).into_par_iter().map(|k| op.linearize(k, u)).collect();
    let mut a = DMatrix::<f64>::zeros(m, m);
    let mut b = DVector::<f64>::zeros(m);
    for (k, (row, bk)) in rows.into_iter().enumerate() {
        for (j, v) in row {
            a[(k, j)] += v;
        }
        b[k] = f[k] - bk;
    }
    let x = a.lu().solve(&b)?;
    x.iter().all(|v| v.is_finite()).then(|| x.iter().copied().collect())
}

/// Solves the problem to residual `tol`.
pub fn solve(problem: &DirichletProblem, tol: f64, max_iter: usize) -> Result<SolveResult> {
    let op = assemble(problem)?;
    solve_assembled(&op, problem, tol, max_iter)
}

/// [`solve`] on a prebuilt scheme.
pub fn solve_assembled(op: &DiscreteOperator, problem: &DirichletProblem, tol: f64, max_iter: usize) -> Result<SolveResult> {
    let f = op.sample(&problem.rhs);
    let mut u: Vec<f64> = (0..op.len()).map(|k| problem.exterior.eval(&op.node(k)[..op.dim])).collect();
    let mut iterations = 0;
    let mut r = residual(op, &u, &f);
    if problem.config.method == SolveMethod::Policy {
        let cap = match problem.operator {
            ProblemOperator::InfSup { .. } => problem.config.policy_cap.min(max_iter),
            _ => max_iter,
        };
        while r > tol && iterations < cap {
            let Some(next) = policy_step(op, &u, &f) else { break };
            iterations += 1;
            let rn = residual(op, &next, &f);
            let stalled = next == u;
            u = next;
            r = rn;
            if stalled {
                break;
            }
        }
    }
    if r > tol && iterations < max_iter {
        let history = damped_iteration(op, &mut u, &f, tol, max_iter - iterations);
        iterations += history.len();
        r = residual(op, &u, &f);
    }
    let converged = r <= tol;
    if !converged {
        return Err(Error::NotConverged { iterations, residual: r });
    }
    Ok(SolveResult { u: op.to_field(&u)?, residual: r, iterations, converged })
}
