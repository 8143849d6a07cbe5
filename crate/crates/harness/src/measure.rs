//! Oscillation decay, Hölder fits and Harnack quotients of sampled functions.

use nonlocal_core::field::FieldFunction;

/// `max − min` of `u` over `B_r`, sampled on `samples` points per radius
/// and direction plus the boundary sphere.
pub fn oscillation(u: &FieldFunction, r: f64, samples: usize) -> f64 {
    let m = samples as i64;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut visit = |x: &[f64]| {
        let v = u.eval(x);
        lo = lo.min(v);
        hi = hi.max(v);
    };
    if u.dim() == 1 {
        for k in -m..=m {
            visit(&[r * k as f64 / m as f64]);
        }
    } else {
        for i in -m..=m {
            for j in -m..=m {
                if i * i + j * j <= m * m {
                    visit(&[r * i as f64 / m as f64, r * j as f64 / m as f64]);
                }
            }
        }
        let k = 8 * samples;
        for a in 0..k {
            let t = std::f64::consts::TAU * a as f64 / k as f64;
            visit(&[r * t.cos(), r * t.sin()]);
        }
    }
    hi - lo
}

/// Outcome of a dyadic oscillation fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HolderFit {
    /// Every oscillation vanished.
    Flat,
    /// `osc(B_r) ≈ A r^α`; `constant` is `max_j osc_j (R/r_j)^α`.
    Power { alpha: f64, constant: f64 },
    /// Some but not all oscillations vanished.
    Degenerate,
}

/// Least-squares slope of `ln osc` against `ln r` over `B_{2^{−j}R}`,
/// `j = 0..=levels`.
pub fn holder_fit(u: &FieldFunction, radius: f64, levels: usize, samples: usize) -> HolderFit {
    let radii: Vec<f64> = (0..=levels).map(|j| radius * 0.5f64.powi(j as i32)).collect();
    let osc: Vec<f64> = radii.iter().map(|&r| oscillation(u, r, samples)).collect();
    let scale = radii.iter().map(|&r| u.eval(&vec![r; u.dim()][..]).abs()).fold(u.eval(&vec![0.0; u.dim()]).abs(), f64::max);
    let floor = 1e-14 * scale.max(f64::MIN_POSITIVE);
    if osc.iter().all(|&o| o <= floor) {
        return HolderFit::Flat;
    }
    if osc.iter().any(|&o| o <= floor) {
        return HolderFit::Degenerate;
    }
    let xs: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let ys: Vec<f64> = osc.iter().map(|o| o.ln()).collect();
    let alpha = slope(&xs, &ys);
    let constant = radii.iter().zip(&osc).map(|(r, o)| o * (radius / r).powf(alpha)).fold(0.0, f64::max);
    HolderFit::Power { alpha, constant }
}

/// Least-squares slope.
pub fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// The two normalizations of the Harnack quotient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quotients {
    pub sup_half: f64,
    pub center: f64,
    /// `sup_{B_{R/2}} u / (u(0) + C₀/L(ρ₀R))`.
    pub scaled: f64,
    /// `sup_{B_{R/2}} u / (u(0) + C₀)`.
    pub raw: f64,
}

/// Quotients from nodal values; `nodes` must contain the origin.
pub fn harnack_quotients(nodes: &[[f64; 2]], values: &[f64], radius: f64, c0: f64, scale: f64) -> Option<Quotients> {
    let center = nodes.iter().position(|x| x[0] == 0.0 && x[1] == 0.0).map(|k| values[k])?;
    let half = 0.5 * radius * (1.0 + 1e-12);
    let sup_half = nodes
        .iter()
        .zip(values)
        .filter(|(x, _)| (x[0] * x[0] + x[1] * x[1]).sqrt() <= half)
        .map(|(_, &v)| v)
        .fold(f64::NEG_INFINITY, f64::max);
    Some(Quotients { sup_half, center, scaled: sup_half / (center + c0 / scale), raw: sup_half / (center + c0) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nonlocal_core::field::Analytic;

    #[test]
    fn square_root_fits_one_half() {
        for dim in [1, 2] {
            let u = FieldFunction::analytic(dim, Analytic::RadialPower { exponent: 0.5 });
            match holder_fit(&u, 0.25, 4, 32) {
                HolderFit::Power { alpha, .. } => assert!((alpha - 0.5).abs() < 1e-12, "{alpha}"),
                other => panic!("{other:?}"),
            }
        }
    }

    #[test]
    fn constants_are_flat() {
        assert_eq!(holder_fit(&FieldFunction::constant(1, 3.0), 0.25, 4, 16), HolderFit::Flat);
    }

    #[test]
    fn linear_functions_fit_one() {
        let u = FieldFunction::analytic(1, Analytic::Linear { slope: [-2.0, 0.0], offset: 0.5 });
        match holder_fit(&u, 0.5, 3, 16) {
            HolderFit::Power { alpha, constant } => {
                assert!((alpha - 1.0).abs() < 1e-12);
                assert!((constant - 2.0).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn constant_solution_quotient() {
        // u ≡ 1 gives Q = 1/(1 + C₀/L).
        let nodes = [[-0.1, 0.0], [0.0, 0.0], [0.1, 0.0], [0.3, 0.0]];
        let q = harnack_quotients(&nodes, &[1.0; 4], 0.25, 2.0, 8.0).unwrap();
        assert_eq!(q.scaled, 0.8);
        assert_eq!(q.raw, 1.0 / 3.0);
    }
}
