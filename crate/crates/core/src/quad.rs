//! One-dimensional quadrature: Gauss–Legendre rules, an adaptive
//! Gauss–Kronrod integrator and semi-infinite integrals in the logarithmic
//! radial variable.
//!
//! Radial integrals `∫ g(s) ds/s` are computed as `∫ g(e^x) dx`. In that
//! variable regularly varying integrands decay exponentially, so panels of
//! geometrically growing width (factor-2 rings in `s`) equidistribute error.

use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Value and error estimate of a quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

/// Absolute and relative stopping tolerance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    pub fn relative(rel: f64) -> Self {
        Self { abs: 0.0, rel }
    }

    fn target(&self, value: f64) -> f64 {
        self.abs.max(self.rel * value.abs())
    }
}

/// The fifteen Kronrod nodes and weights mapped to `[a, b]`.
pub fn kronrod_nodes(a: f64, b: f64) -> [(f64, f64); 15] {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut out = [(0.0, 0.0); 15];
    for i in 0..7 {
        out[2 * i] = (c - h * XGK[i], h * WGK[i]);
        out[2 * i + 1] = (c + h * XGK[i], h * WGK[i]);
    }
    out[14] = (c, h * WGK[7]);
    out
}

/// Gauss–Kronrod 7/15 rule on `[a, b]`; the error is `|K15 − G7|`.
pub fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Estimate {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for i in 0..7 {
        let s = f(c - h * XGK[i]) + f(c + h * XGK[i]);
        k += WGK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    Estimate {
        value: k * h,
        error: ((k - g) * h).abs(),
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` (Newton on `P_n`).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 0 { 1.0 } else if n == 1 { z } else { p1 };
            dp = n as f64 * (z * p - p0) / (z * z - 1.0);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

struct Piece {
    a: f64,
    b: f64,
    est: Estimate,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.est.error == other.est.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.est.error.total_cmp(&other.est.error)
    }
}

/// Globally adaptive GK15 over `[points[0], points[last]]`, starting from the
/// panels delimited by `points` (used to align with known kinks).
pub fn adaptive<F: FnMut(f64) -> f64>(
    mut f: F,
    points: &[f64],
    tol: Tolerance,
    max_pieces: usize,
) -> Result<Estimate> {
    let mut heap = BinaryHeap::new();
    let (mut value, mut error) = (0.0, 0.0);
    for w in points.windows(2) {
        if w[1] == w[0] {
            continue;
        }
        let est = gk15(&mut f, w[0], w[1]);
        value += est.value;
        error += est.error;
        heap.push(Piece { a: w[0], b: w[1], est });
    }
    while error > tol.target(value) {
        if heap.len() >= max_pieces {
            return Err(Error::QuadratureFailure {
                requested: tol.target(value),
                achieved: error,
            });
        }
        let Some(p) = heap.pop() else { break };
        let mid = 0.5 * (p.a + p.b);
        if (p.b - p.a).abs() <= 1e-14 * (p.a.abs() + p.b.abs()).max(1e-300) {
            // Roundoff floor: keep the piece and stop refining it.
            heap.push(Piece {
                a: p.a,
                b: p.b,
                est: Estimate { value: p.est.value, error: 0.0 },
            });
            error -= p.est.error;
            continue;
        }
        let l = gk15(&mut f, p.a, mid);
        let r = gk15(&mut f, mid, p.b);
        value += l.value + r.value - p.est.value;
        error += l.error + r.error - p.est.error;
        heap.push(Piece { a: p.a, b: mid, est: l });
        heap.push(Piece { a: mid, b: p.b, est: r });
    }
    // Re-sum to shed accumulated cancellation in the running totals.
    let (value, error) = heap
        .iter()
        .fold((0.0, 0.0), |(v, e), p| (v + p.est.value, e + p.est.error));
    Ok(Estimate { value, error })
}

/// Direction of a semi-infinite integral in the log variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Toward {
    PlusInfinity,
    MinusInfinity,
}

/// Options for [`log_tail`].
#[derive(Debug, Clone, Copy)]
pub struct TailOptions {
    /// Guaranteed exponential decay rate of the integrand's envelope.
    pub decay: f64,
    /// Upper cap on the panel width (keeps oscillatory integrands resolved).
    pub max_width: f64,
    pub tol: Tolerance,
    pub max_panels: usize,
}

/// `∫_{x0}^{±∞} f(x) dx` for an integrand whose envelope `env ≥ |f|`
/// decays at least like `e^{-decay·|x|}` asymptotically.
///
/// Panels start at width `ln 2` and double up to `max_width`. After each
/// panel ending at `X` the remainder is bounded by `2·env(X)/decay`, valid
/// once the envelope decays at rate at least `decay/2`, which is checked
/// on the last half panel. Summation stops when that bound is below the
/// tolerance.
pub fn log_tail<F, E>(f: F, env: E, x0: f64, toward: Toward, opts: TailOptions) -> Result<Estimate>
where
    F: FnMut(f64) -> f64,
    E: Fn(f64) -> f64,
{
    let mut f = f;
    if !(opts.decay > 0.0) {
        return Err(Error::TailDivergence(format!(
            "decay rate {} is not positive",
            opts.decay
        )));
    }
    let sign = match toward {
        Toward::PlusInfinity => 1.0,
        Toward::MinusInfinity => -1.0,
    };
    let ln2 = std::f64::consts::LN_2;
    let mut width = ln2;
    let mut x = x0;
    let mut total = Estimate { value: 0.0, error: 0.0 };
    for _ in 0..opts.max_panels {
        let next = x + sign * width;
        let (a, b) = if sign > 0.0 { (x, next) } else { (next, x) };
        let piece_tol = Tolerance {
            abs: opts.tol.abs.max(opts.tol.rel * total.value.abs() * 1e-2),
            rel: opts.tol.rel * 1e-2,
        };
        let est = adaptive(&mut f, &[a, b], piece_tol, 400)?;
        total.value += est.value;
        total.error += est.error;
        let e_end = env(next);
        let e_mid = env(next - sign * 0.5 * width);
        let rate_ok = e_end == 0.0 || (e_mid > 0.0 && (e_mid / e_end).ln() >= 0.25 * opts.decay * width);
        let bound = 2.0 * e_end / opts.decay;
        if rate_ok && bound <= opts.tol.target(total.value) {
            total.error += bound;
            return Ok(total);
        }
        x = next;
        width = (2.0 * width).min(opts.max_width.max(ln2));
    }
    Err(Error::TailDivergence(format!(
        "remainder bound not below tolerance after {} panels",
        opts.max_panels
    )))
}
