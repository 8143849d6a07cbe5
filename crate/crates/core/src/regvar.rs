//! Slowly and regularly varying functions.
//!
//! A [`SlowlyVarying`] family gives `l₀`, normalized so that `l₀(1) = 1`.
//! A [`KernelProfile`] combines it with an order `σ` into
//! `l(r) = r^{−σ} l₀(r)^{2−σ}` and the scale function
//! `L(r) = σ ∫_r^1 l(s)/s ds`. All evaluation happens in the log variable
//! `x = ln r` so that profiles with `σ` close to 2 do not underflow.

use std::f64::consts::{E, LN_2};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{self, Estimate, TailOptions, Tolerance, Toward};

/// Log of the radius `2e^{−e}` where `ln ln(2/r) = 1`.
const LOGLOG_EDGE: f64 = LN_2 - E;

/// Relative tolerance used by the radial integrals of this module.
pub const RADIAL_TOL: f64 = 1e-11;

/// Catalog of slowly varying functions `l₀`.
///
/// Raw forms (`t = ln(2/r)`): `t^β`, `(ln(2/r²))^β`, `(ln t)^β`,
/// `exp(t^β)` and `exp(t / ln t)`. The log families are extended by their
/// value at `r = 1` for `r ≥ 1`; the two iterated-log families are extended
/// by their value at `r = 2e^{−e}` for larger `r`, where `ln t = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum SlowlyVarying {
    Constant,
    LogPow { beta: f64 },
    LogSqPow { beta: f64 },
    LogLogPow { beta: f64 },
    ExpLogPow { beta: f64 },
    ExpLogOverLogLog,
}

impl SlowlyVarying {
    /// Checks the family parameters.
    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::LogPow { beta } | Self::LogSqPow { beta } | Self::LogLogPow { beta } if !beta.is_finite() => {
                Err(Error::InvalidParameter(format!("beta must be finite, got {beta}")))
            }
            Self::ExpLogPow { beta } if !(beta > 0.0 && beta < 1.0) => {
                Err(Error::InvalidParameter(format!("exp-log exponent must lie in (0,1), got {beta}")))
            }
            _ => Ok(()),
        }
    }

    /// Short label used in reports.
    pub fn label(&self) -> String {
        match *self {
            Self::Constant => "constant".into(),
            Self::LogPow { beta } => format!("log_pow({beta})"),
            Self::LogSqPow { beta } => format!("log_sq_pow({beta})"),
            Self::LogLogPow { beta } => format!("log_log_pow({beta})"),
            Self::ExpLogPow { beta } => format!("exp_log_pow({beta})"),
            Self::ExpLogOverLogLog => "exp_log_over_log_log".into(),
        }
    }

    /// The `β` parameter, zero for parameterless families.
    pub fn beta(&self) -> f64 {
        match *self {
            Self::LogPow { beta }
            | Self::LogSqPow { beta }
            | Self::LogLogPow { beta }
            | Self::ExpLogPow { beta } => beta,
            _ => 0.0,
        }
    }

    fn cutoff(&self) -> f64 {
        match self {
            Self::LogLogPow { .. } | Self::ExpLogOverLogLog => LOGLOG_EDGE,
            _ => 0.0,
        }
    }

    fn ln_raw(&self, x: f64) -> f64 {
        let t = LN_2 - x;
        match *self {
            Self::Constant => 0.0,
            Self::LogPow { beta } => beta * t.ln(),
            Self::LogSqPow { beta } => beta * (LN_2 - 2.0 * x).ln(),
            Self::LogLogPow { beta } => beta * t.ln().ln(),
            Self::ExpLogPow { beta } => t.powf(beta),
            Self::ExpLogOverLogLog => t / t.ln(),
        }
    }

    /// `ln l₀(e^x)`.
    pub fn ln_at_log(&self, x: f64) -> f64 {
        if matches!(self, Self::Constant) {
            return 0.0;
        }
        let c = self.cutoff();
        self.ln_raw(x.min(c)) - self.ln_raw(c)
    }

    /// Radii at which `l₀` switches to its constant extension.
    pub fn kink(&self) -> Option<f64> {
        match self {
            Self::Constant => None,
            _ => Some(self.cutoff().exp()),
        }
    }
}

/// `l₀(r)`; fails for `r ≤ 0` or non-finite `r`.
pub fn eval_l0(spec: &SlowlyVarying, r: f64) -> Result<f64> {
    check_radius(r)?;
    Ok(spec.ln_at_log(r.ln()).exp())
}

fn check_radius(r: f64) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain { what: "radius must be positive and finite", value: r })
    }
}

/// Order `σ` together with `l₀` and the sweep floor `σ₀ ≤ σ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelProfile {
    sigma: f64,
    l0: SlowlyVarying,
    sigma0: f64,
}

impl KernelProfile {
    /// Profile with floor `σ₀ = σ`.
    pub fn new(sigma: f64, l0: SlowlyVarying) -> Result<Self> {
        Self::with_floor(sigma, l0, sigma)
    }

    pub fn with_floor(sigma: f64, l0: SlowlyVarying, sigma0: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma < 2.0) {
            return Err(Error::InvalidProfile(format!("sigma must lie in (0,2), got {sigma}")));
        }
        if !(sigma0 > 0.0 && sigma0 < 2.0) {
            return Err(Error::InvalidProfile(format!("sigma0 must lie in (0,2), got {sigma0}")));
        }
        if sigma < sigma0 {
            return Err(Error::InvalidProfile(format!("sigma {sigma} is below the floor {sigma0}")));
        }
        l0.validate().map_err(|e| Error::InvalidProfile(e.to_string()))?;
        Ok(Self { sigma, l0, sigma0 })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn sigma0(&self) -> f64 {
        self.sigma0
    }

    pub fn l0(&self) -> SlowlyVarying {
        self.l0
    }

    /// `ln l(e^x)`.
    pub fn ln_l_at_log(&self, x: f64) -> f64 {
        -self.sigma * x + (2.0 - self.sigma) * self.l0.ln_at_log(x)
    }

    /// `l(r)`, infallible for `r > 0`.
    pub fn l(&self, r: f64) -> f64 {
        self.ln_l_at_log(r.ln()).exp()
    }

    /// `∫_a^b s^p l(s) ds` (closed form for the constant family).
    ///
    /// `a` may be `0` and `b` may be infinite when the integral converges.
    pub fn moment(&self, p: f64, a: f64, b: f64) -> Result<f64> {
        if matches!(self.l0, SlowlyVarying::Constant) {
            return power_integral(p - self.sigma, a, b);
        }
        Ok(self.moment_quadrature(p, a, b, |_| 1.0, 1.0)?.value)
    }

    /// `∫_a^b s^p l(s) w(s) ds` by quadrature, `0 ≤ w ≤ w_max`.
    pub fn moment_quadrature<W: Fn(f64) -> f64>(
        &self,
        p: f64,
        a: f64,
        b: f64,
        w: W,
        w_max: f64,
    ) -> Result<Estimate> {
        if !(a >= 0.0 && b >= a) || a.is_infinite() {
            return Err(Error::Domain { what: "moment bounds must satisfy 0 ≤ a ≤ b", value: a });
        }
        if a == b {
            return Ok(Estimate { value: 0.0, error: 0.0 });
        }
        let f = |x: f64| (((p + 1.0) * x + self.ln_l_at_log(x)).exp()) * w(x.exp());
        let env = |x: f64| ((p + 1.0) * x + self.ln_l_at_log(x)).exp() * w_max;
        let tol = Tolerance::relative(RADIAL_TOL);
        let mut breaks = vec![0.0];
        if let Some(k) = self.l0.kink() {
            breaks.push(k.ln());
        }
        let (lo, hi) = (a.ln(), b.ln());
        let mut total = Estimate { value: 0.0, error: 0.0 };
        let finite_lo = if a == 0.0 {
            let start = if b.is_infinite() { 0.0 } else { hi.min(0.0) };
            let decay = p + 1.0 - self.sigma;
            let t = quad::log_tail(f, env, start, Toward::MinusInfinity, tail_options(decay, tol))?;
            total.value += t.value;
            total.error += t.error;
            start
        } else {
            lo
        };
        let finite_hi = if b.is_infinite() { finite_lo.max(0.0) } else { hi };
        if finite_hi > finite_lo {
            let pts = ring_points(finite_lo, finite_hi, &breaks);
            let est = quad::adaptive(f, &pts, tol, 20_000)?;
            total.value += est.value;
            total.error += est.error;
        }
        if b.is_infinite() {
            let decay = self.sigma - p - 1.0;
            let t = quad::log_tail(f, env, finite_hi, Toward::PlusInfinity, tail_options(decay, tol))?;
            total.value += t.value;
            total.error += t.error;
        }
        Ok(total)
    }
}

/// Tail options sized for a decay rate; oscillatory weights need width ≤ 2.
pub(crate) fn tail_options(decay: f64, tol: Tolerance) -> TailOptions {
    let max_width = 2.0;
    let need = (45.0 / (decay.max(1e-6) * max_width)).ceil() as usize;
    TailOptions {
        decay,
        max_width,
        tol,
        max_panels: 200 + 2 * need,
    }
}

/// Breakpoints `lo = x_0 < … < x_m = hi` with spacing at most `ln 2`,
/// including every interior entry of `extra`.
pub(crate) fn ring_points(lo: f64, hi: f64, extra: &[f64]) -> Vec<f64> {
    let mut pts = vec![lo, hi];
    pts.extend(extra.iter().copied().filter(|&e| e > lo && e < hi));
    pts.sort_by(f64::total_cmp);
    let mut out = vec![pts[0]];
    for w in pts.windows(2) {
        let m = ((w[1] - w[0]) / LN_2).ceil().max(1.0) as usize;
        for j in 1..=m {
            out.push(w[0] + (w[1] - w[0]) * j as f64 / m as f64);
        }
    }
    out
}

/// `∫_a^b s^q ds` in closed form.
fn power_integral(q: f64, a: f64, b: f64) -> Result<f64> {
    let k = q + 1.0;
    if a == 0.0 && k <= 0.0 {
        return Err(Error::TailDivergence(format!("s^{q} is not integrable at 0")));
    }
    if b.is_infinite() && k >= 0.0 {
        return Err(Error::TailDivergence(format!("s^{q} is not integrable at infinity")));
    }
    if k == 0.0 {
        return Ok((b / a).ln());
    }
    let pa = if a == 0.0 { 0.0 } else { (k * a.ln()).exp() };
    let pb = if b.is_infinite() { 0.0 } else { (k * b.ln()).exp() };
    Ok((pb - pa) / k)
}

/// `l(r) = r^{−σ} l₀(r)^{2−σ}`.
pub fn eval_l(profile: &KernelProfile, r: f64) -> Result<f64> {
    check_radius(r)?;
    Ok(profile.l(r))
}

/// The scale function `L(r) = σ ∫_r^1 l(s)/s ds` for `r ∈ (0, 1]`.
pub fn eval_scale(profile: &KernelProfile, r: f64) -> Result<f64> {
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::Domain { what: "scale function needs r in (0,1]", value: r });
    }
    if matches!(profile.l0, SlowlyVarying::Constant) {
        return Ok((-profile.sigma * r.ln()).exp_m1());
    }
    Ok(profile.sigma * profile.moment(-1.0, r, 1.0)?)
}

/// `L(r)` by quadrature for every family, with its error estimate.
pub fn eval_scale_quadrature(profile: &KernelProfile, r: f64) -> Result<Estimate> {
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::Domain { what: "scale function needs r in (0,1]", value: r });
    }
    let e = profile.moment_quadrature(-1.0, r, 1.0, |_| 1.0, 1.0)?;
    Ok(Estimate { value: profile.sigma * e.value, error: profile.sigma * e.error })
}

/// Which side of `r = 1` a Potter estimate covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PotterDomain {
    /// `(0, 1]`
    UnitInterval,
    /// `[1, ∞)`
    AboveOne,
}

/// Log-spaced sampling plan for Potter scans.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotterGrid {
    pub points_per_decade: usize,
    pub decades: f64,
    /// Estimates with `a` above this cap are flagged invalid.
    pub cap: f64,
}

impl Default for PotterGrid {
    fn default() -> Self {
        Self { points_per_decade: 200, decades: 8.0, cap: 1e6 }
    }
}

impl PotterGrid {
    fn log_points(&self, domain: PotterDomain) -> Vec<f64> {
        let n = (self.points_per_decade as f64 * self.decades).round() as usize;
        let step = std::f64::consts::LN_10 / self.points_per_decade.max(1) as f64;
        let sign = match domain {
            PotterDomain::UnitInterval => -1.0,
            PotterDomain::AboveOne => 1.0,
        };
        (0..=n).map(|i| sign * step * i as f64).collect()
    }
}

/// Grid-certified Potter constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotterEstimate {
    pub a: f64,
    pub delta: f64,
    pub domain: PotterDomain,
    pub valid: bool,
}

/// Upper end (exclusive) of the admissible slack window.
pub fn potter_delta_limit(sigma: f64) -> f64 {
    0.5 * (2.0 - sigma).min(sigma)
}

/// Midpoint of the admissible slack window.
pub fn default_potter_delta(sigma: f64) -> f64 {
    0.5 * potter_delta_limit(sigma)
}

/// Smallest `a` with `l(s)/l(r) ≤ a·max((s/r)^{−σ+δ}, (s/r)^{−σ−δ})` over all
/// sampled pairs.
///
/// Dividing by the pure power leaves `(2−σ)(g(s)−g(r)) − δ|ln s − ln r|`
/// with `g = ln l₀`, whose maximum over ordered pairs is a running-minimum
/// scan.
pub fn potter_constants(
    profile: &KernelProfile,
    delta: f64,
    domain: PotterDomain,
    grid: &PotterGrid,
) -> Result<PotterEstimate> {
    let limit = potter_delta_limit(profile.sigma);
    if !(delta >= 0.0 && delta < limit) {
        return Err(Error::InvalidDelta { delta, limit });
    }
    let xs = grid.log_points(domain);
    if xs.len() < 2 || grid.points_per_decade == 0 {
        return Err(Error::InvalidGrid(xs.len().min(grid.points_per_decade)));
    }
    let mut xs = xs;
    xs.sort_by(f64::total_cmp);
    let g: Vec<f64> = xs.iter().map(|&x| (2.0 - profile.sigma) * profile.l0.ln_at_log(x)).collect();
    let mut best = 0.0_f64;
    // Pairs with s > r: (g_s − δx_s) − (g_r − δx_r).
    let mut run_min = f64::INFINITY;
    for (x, gi) in xs.iter().zip(&g) {
        run_min = run_min.min(gi - delta * x);
        best = best.max(gi - delta * x - run_min);
    }
    // Pairs with s < r: (g_s + δx_s) − (g_r + δx_r).
    let mut run_min = f64::INFINITY;
    for (x, gi) in xs.iter().zip(&g).rev() {
        run_min = run_min.min(gi + delta * x);
        best = best.max(gi + delta * x - run_min);
    }
    let a = best.exp();
    Ok(PotterEstimate { a, delta, domain, valid: a <= grid.cap })
}

/// `L(r)/l(r)` for `r ∈ (0, 1)`.
pub fn karamata_ratio(profile: &KernelProfile, r: f64) -> Result<f64> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::Domain { what: "Karamata ratio needs r in (0,1)", value: r });
    }
    Ok(eval_scale(profile, r)? / profile.l(r))
}

/// Points per decade and depth of the [`find_rho`] search grid.
pub const RHO_POINTS_PER_DECADE: usize = 64;
pub const RHO_DECADES: usize = 8;

/// Largest `ρ` such that `L(r)/l(r) ∈ [1/2, 2]` at every sampled `r < ρ`.
///
/// The grid runs from 1 down to `1e−8`. The crossing between the last
/// passing and the first failing grid point is bisected and the passing end
/// returned, so the answer never exceeds the true threshold by more than
/// the bisection width.
pub fn find_rho(profile: &KernelProfile) -> Result<f64> {
    let n = RHO_POINTS_PER_DECADE * RHO_DECADES;
    let step = std::f64::consts::LN_10 / RHO_POINTS_PER_DECADE as f64;
    let ok = |r: f64| -> Result<bool> {
        if r >= 1.0 {
            return Ok(false);
        }
        let q = karamata_ratio(profile, r)?;
        Ok((0.5..=2.0).contains(&q))
    };
    // Ascending r: r_i = 10^{−8} e^{i·step}.
    let xs: Vec<f64> = (0..=n).map(|i| -(RHO_DECADES as f64) * std::f64::consts::LN_10 + step * i as f64).collect();
    let mut first_fail = None;
    for (i, &x) in xs.iter().enumerate() {
        if !ok(x.exp())? {
            first_fail = Some(i);
            break;
        }
    }
    let i = first_fail.unwrap_or(n);
    if i == 0 {
        return Err(Error::NotFound("the Karamata ratio leaves [1/2, 2] at the smallest sampled radius".into()));
    }
    let (mut lo, mut hi) = (xs[i - 1], xs[i]);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if ok(mid.exp())? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo.exp())
}

/// `ρ₁ = (4a₀²a_∞ + 1)^{−2/σ₀}`, optionally capped by `min(ρ, 1/2)`.
pub fn compute_rho1(a0: f64, a_inf: f64, sigma0: f64, rho_cap: Option<f64>) -> Result<f64> {
    if !(a0 >= 1.0 && a_inf >= 1.0) {
        return Err(Error::InvalidParameter(format!("Potter constants must be ≥ 1, got {a0}, {a_inf}")));
    }
    if !(sigma0 > 0.0 && sigma0 <= 2.0) {
        return Err(Error::InvalidParameter(format!("sigma0 must lie in (0,2], got {sigma0}")));
    }
    let rho1 = (4.0 * a0 * a0 * a_inf + 1.0).powf(-2.0 / sigma0);
    Ok(match rho_cap {
        Some(rho) => rho1.min(rho.min(0.5)),
        None => rho1,
    })
}

/// One inequality `lhs ≤ rhs` checked numerically.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCheck {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    /// Relative quadrature error of the integral involved.
    pub rel_err: f64,
}

impl BoundCheck {
    pub fn slack(&self) -> f64 {
        self.rhs - self.lhs
    }

    pub fn holds(&self) -> bool {
        self.slack() >= 0.0
    }
}

fn rel(e: Estimate) -> f64 {
    if e.value == 0.0 {
        0.0
    } else {
        (e.error / e.value).abs()
    }
}

/// The kernel integral bounds at radius `r` for Potter constant `a0`:
/// two-sided `∫₀^r s l`, the fourth moment and the lower bound on `L`.
pub fn kernel_integral_bounds(profile: &KernelProfile, r: f64, a0: f64) -> Result<Vec<BoundCheck>> {
    check_radius(r)?;
    let s = profile.sigma;
    let lr = profile.l(r);
    let m1 = profile.moment_quadrature(1.0, 0.0, r, |_| 1.0, 1.0)?;
    let m3 = profile.moment_quadrature(3.0, 0.0, r, |_| 1.0, 1.0)?;
    let big_l = if r < 1.0 { eval_scale_quadrature(profile, r)? } else { Estimate { value: 0.0, error: 0.0 } };
    let scale = r * r * lr / (2.0 - s);
    Ok(vec![
        BoundCheck { name: "second_moment_lower", lhs: scale / (2.0 * a0), rhs: m1.value, rel_err: rel(m1) },
        BoundCheck { name: "second_moment_upper", lhs: m1.value, rhs: 2.0 * a0 * scale, rel_err: rel(m1) },
        BoundCheck { name: "fourth_moment", lhs: m3.value, rhs: a0 * r.powi(4) * lr, rel_err: rel(m3) },
        BoundCheck {
            name: "scale_lower",
            lhs: (r.powf(-s / 2.0) - 1.0) / (2.0 * a0 * a0),
            rhs: big_l.value,
            rel_err: rel(big_l),
        },
    ])
}

/// `σ ∫₁^∞ l(s)/s ds ≤ 2a_∞`.
pub fn tail_mass_bound(profile: &KernelProfile, a_inf: f64) -> Result<BoundCheck> {
    let t = profile.moment_quadrature(-1.0, 1.0, f64::INFINITY, |_| 1.0, 1.0)?;
    Ok(BoundCheck {
        name: "tail_mass",
        lhs: profile.sigma * t.value,
        rhs: 2.0 * a_inf,
        rel_err: rel(t),
    })
}
