//! Harnack-quotient and Hölder-exponent sweeps on solved Dirichlet problems.

use nonlocal_core::field::{Analytic, FieldFunction, GaussianBump};
use nonlocal_core::regvar::{compute_rho1, eval_scale, find_rho, KernelProfile, SlowlyVarying};
use nonlocal_core::solver::{assemble, solve_assembled, DirichletProblem, ProblemOperator};
use rand::Rng;

use crate::config::SweepConfig;
use crate::error::Result;
use crate::lemma::potter_pair;
use crate::measure::{harnack_quotients, holder_fit, HolderFit};
use crate::pool;
use crate::report::{Row, SummaryEntry, SweepReport, Value};

/// Seeded nonnegative exterior data: 1–3 Gaussian bumps with centers in
/// `[−5R, 5R]ⁿ`, widths in `[R/2, 2R]` and heights in `[0.2, 1]`.
///
/// The draws depend on `(seed, instance)` only and scale with `R`.
pub fn exterior_data(seed: u64, instance: usize, dim: usize, radius: f64) -> Analytic {
    let mut rng = pool::rng(seed, instance as u64);
    let count = rng.gen_range(1..=3);
    let bumps = (0..count)
        .map(|_| {
            let cx = rng.gen_range(-5.0..5.0);
            let cy = rng.gen_range(-5.0..5.0);
            GaussianBump {
                center: [radius * cx, if dim == 2 { radius * cy } else { 0.0 }],
                height: rng.gen_range(0.2..1.0),
                width: radius * rng.gen_range(0.5..2.0),
            }
        })
        .collect();
    Analytic::Gaussians { bumps }
}

/// `ρ₀ = min(ρ₁, ρ, 1/(32√n))`.
pub fn rho0(c: &SweepConfig, profile: &KernelProfile) -> Result<f64> {
    let (a0, a_inf) = potter_pair(c, profile)?;
    let rho = find_rho(profile)?;
    let rho1 = compute_rho1(a0.a, a_inf.a, c.sigma0(), Some(rho))?;
    Ok(rho1.min(rho).min(1.0 / (32.0 * (c.class.dim as f64).sqrt())))
}

/// A solved instance: nodal values and the full field.
#[derive(Debug, Clone)]
pub struct Solved {
    pub nodes: Vec<[f64; 2]>,
    pub values: Vec<f64>,
    pub field: FieldFunction,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    /// `sup |u|` over ℝⁿ.
    pub sup_norm: f64,
}

/// Solves `𝓜⁻u = rhs` in `B_{2R}` with exterior data `g`.
pub fn solve_instance(c: &SweepConfig, family: SlowlyVarying, sigma: f64, radius: f64, g: Analytic) -> Result<Solved> {
    let h = &c.harnack;
    let problem = DirichletProblem {
        operator: ProblemOperator::PucciMinus,
        class: c.kernel_class(family, sigma)?,
        radius,
        spacing: radius / h.cells as f64,
        rhs: FieldFunction::constant(c.class.dim, h.rhs),
        exterior: g.clone(),
        config: h.solver,
    };
    let op = assemble(&problem)?;
    let sol = solve_assembled(&op, &problem, h.solve_tol, h.max_iter)?;
    let values = op.sample(&sol.u);
    let nodes = (0..op.len()).map(|k| op.node(k)).collect();
    let inner = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let outer = FieldFunction::analytic(c.class.dim, g).sup_norm().unwrap_or(f64::INFINITY);
    Ok(Solved {
        nodes,
        values,
        field: sol.u,
        residual: sol.residual,
        iterations: sol.iterations,
        converged: sol.converged,
        sup_norm: inner.max(outer),
    })
}

/// One `(family, σ, R)` cell of a sweep.
#[derive(Debug, Clone, Copy)]
struct Cell {
    family: SlowlyVarying,
    sigma: f64,
    radius: f64,
}

fn cells(c: &SweepConfig) -> Vec<Cell> {
    let mut out = Vec::new();
    for &family in &c.profile.families {
        for &radius in &c.harnack.radii {
            for &sigma in &c.profile.sigmas {
                out.push(Cell { family, sigma, radius });
            }
        }
    }
    out
}

/// `ρ₀` and `L(ρ₀R)` per cell.
fn normalizers(c: &SweepConfig, cells: &[Cell]) -> Result<Vec<Option<(f64, f64)>>> {
    pool::map(c.jobs, cells, |cell| {
        let profile = c.profile(cell.family, cell.sigma).ok()?;
        let r0 = rho0(c, &profile).ok()?;
        Some((r0, eval_scale(&profile, r0 * cell.radius).ok()?))
    })
}

fn cell_row(exp: &str, cell: &Cell, q: &str) -> crate::report::RowBuilder {
    Row::start(exp, cell.sigma, cell.family.beta(), cell.radius, q)
}

/// Ratio rows against the smallest `σ` and the summary entry for one
/// `(family, R)` and quantity; `per_sigma` is ordered like the σ list.
/// Ungated quantities get ratio rows without a bound.
fn uniformity(
    exp: &str,
    quantity: &str,
    family: SlowlyVarying,
    radius: f64,
    per_sigma: &[(f64, f64)],
    factor: Option<f64>,
    rows: &mut Vec<Row>,
) -> Option<SummaryEntry> {
    let (s_min, base) = per_sigma.iter().copied().min_by(|a, b| a.0.total_cmp(&b.0))?;
    let (_, top) = per_sigma.iter().copied().max_by(|a, b| a.0.total_cmp(&b.0))?;
    let mut pass = base.is_finite() && base > 0.0;
    for &(s, v) in per_sigma {
        if s == s_min {
            continue;
        }
        let row = Row::start(exp, s, family.beta(), radius, &format!("{quantity}_ratio"));
        let row = match factor {
            Some(f) => row.at_most(v / base, f),
            None => row.measured(v / base),
        };
        pass &= row.pass;
        rows.push(row);
    }
    let max = per_sigma.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    Some(SummaryEntry {
        experiment: exp.into(),
        quantity: quantity.into(),
        radius,
        max_over_sigma: max,
        uniformity_ratio: top / base,
        pass: pass && max.is_finite(),
    })
}

/// Solves every `(cell, instance)` pair in parallel.
fn solve_all(c: &SweepConfig, cells: &[Cell]) -> Result<Vec<Result<Solved>>> {
    let jobs: Vec<(Cell, usize)> =
        cells.iter().flat_map(|&cell| (0..c.harnack.instances).map(move |i| (cell, i))).collect();
    pool::map(c.jobs, &jobs, |&(cell, i)| {
        let g = exterior_data(c.seed, i, c.class.dim, cell.radius);
        solve_instance(c, cell.family, cell.sigma, cell.radius, g)
    })
}

/// Harnack quotients `Q = sup_{B_{R/2}} u/(u(0) + C₀/L(ρ₀R))` and the raw
/// variant `sup_{B_{R/2}} u/(u(0) + C₀)` over seeded exterior data.
pub fn run_harnack_sweep(c: &SweepConfig) -> Result<SweepReport> {
    c.validate()?;
    let h = &c.harnack;
    let cells = cells(c);
    let norms = normalizers(c, &cells)?;
    let solved = solve_all(c, &cells)?;
    let probes = scale_probes(c, &cells)?;
    let mut report = SweepReport::default();
    let mut best: Vec<(f64, f64)> = Vec::with_capacity(cells.len());
    for (k, cell) in cells.iter().enumerate() {
        let exp = format!("harnack:{}", cell.family.label());
        let mut q_max = f64::NEG_INFINITY;
        let mut raw_max = f64::NEG_INFINITY;
        let Some((r0, scale)) = norms[k] else {
            report.rows.push(cell_row(&exp, cell, "rho0").failed());
            best.push((f64::NAN, f64::NAN));
            continue;
        };
        report.rows.push(cell_row(&exp, cell, "rho0").measured(r0));
        report.rows.push(cell_row(&exp, cell, "scale_at_rho0_R").measured(scale));
        for i in 0..h.instances {
            let tag = |q: &str| format!("{q}#{i}");
            match &solved[k * h.instances + i] {
                Ok(s) => {
                    report.rows.push(cell_row(&exp, cell, &tag("residual")).finish(
                        Value::Number(s.residual),
                        Some(h.solve_tol),
                        s.converged,
                    ));
                    match harnack_quotients(&s.nodes, &s.values, cell.radius, h.c0, scale) {
                        Some(q) => {
                            report.rows.push(cell_row(&exp, cell, &tag("sup_half_ball")).measured(q.sup_half));
                            report.rows.push(cell_row(&exp, cell, &tag("u0")).at_least(q.center, 0.0));
                            report.rows.push(cell_row(&exp, cell, &tag("Q")).measured(q.scaled));
                            report.rows.push(cell_row(&exp, cell, &tag("Q_raw")).measured(q.raw));
                            q_max = q_max.max(q.scaled);
                            raw_max = raw_max.max(q.raw);
                        }
                        None => report.rows.push(cell_row(&exp, cell, &tag("Q")).failed()),
                    }
                }
                Err(_) => report.rows.push(cell_row(&exp, cell, &tag("solve")).failed()),
            }
        }
        report.rows.push(cell_row(&exp, cell, "Q_max").measured(q_max));
        report.rows.push(cell_row(&exp, cell, "Q_raw_max").measured(raw_max));
        if let Some(p) = probes[k] {
            report.rows.push(cell_row(&exp, cell, "scale_probe#0").at_most(p, h.scale_tol));
        }
        best.push((q_max, raw_max));
    }
    summarize(c, &cells, &best, "harnack", [("Q", true), ("Q_raw", false)], &mut report);
    Ok(report)
}

fn summarize(c: &SweepConfig, cells: &[Cell], best: &[(f64, f64)], prefix: &str, names: [(&str, bool); 2], report: &mut SweepReport) {
    for &family in &c.profile.families {
        for &radius in &c.harnack.radii {
            let exp = format!("{prefix}:{}", family.label());
            let pick = |first: bool| -> Vec<(f64, f64)> {
                cells
                    .iter()
                    .zip(best)
                    .filter(|(cell, _)| cell.family == family && cell.radius == radius)
                    .map(|(cell, b)| (cell.sigma, if first { b.0 } else { b.1 }))
                    .collect()
            };
            for (first, (name, gated)) in [(true, names[0]), (false, names[1])] {
                let factor = gated.then_some(c.harnack.uniformity_factor);
                if let Some(e) = uniformity(&exp, name, family, radius, &pick(first), factor, &mut report.rows) {
                    report.summary.push(e);
                }
            }
        }
    }
}

/// Relative change of `sup_{B_{R/2}} u / u(0)` for instance 0 when `R` and
/// the data are dilated by `scale_probe`; Constant family only.
fn scale_probes(c: &SweepConfig, cells: &[Cell]) -> Result<Vec<Option<f64>>> {
    let Some(t) = c.harnack.scale_probe else {
        return Ok(vec![None; cells.len()]);
    };
    pool::map(c.jobs, cells, |cell| {
        if cell.family != SlowlyVarying::Constant {
            return None;
        }
        let quotient = |radius: f64| -> f64 {
            let g = exterior_data(c.seed, 0, c.class.dim, radius);
            match solve_instance(c, cell.family, cell.sigma, radius, g) {
                Ok(s) => harnack_quotients(&s.nodes, &s.values, radius, 0.0, 1.0).map_or(f64::NAN, |q| q.scaled),
                Err(_) => f64::NAN,
            }
        };
        let (a, b) = (quotient(cell.radius), quotient(t * cell.radius));
        Some(((a - b) / a).abs())
    })
}

/// Exponent and constant of the dyadic oscillation decay of each solved
/// instance, normalized by `‖u‖_∞ + C₀/L(ρ₀R)`.
pub fn run_holder_sweep(c: &SweepConfig) -> Result<SweepReport> {
    c.validate()?;
    let h = &c.harnack;
    let o = &c.holder;
    let cells = cells(c);
    let norms = normalizers(c, &cells)?;
    let solved = solve_all(c, &cells)?;
    let mut report = SweepReport::default();
    let mut best: Vec<(f64, f64)> = Vec::with_capacity(cells.len());
    // α per (cell, instance) for the stability rows.
    let mut alphas: Vec<Vec<Option<f64>>> = Vec::with_capacity(cells.len());
    for (k, cell) in cells.iter().enumerate() {
        let exp = format!("holder:{}", cell.family.label());
        let mut c_max = f64::NEG_INFINITY;
        let mut a_min = f64::INFINITY;
        let mut cell_alphas = Vec::with_capacity(h.instances);
        let scale = norms[k].map(|n| n.1);
        for i in 0..h.instances {
            let tag = |q: &str| format!("{q}#{i}");
            let (Ok(s), Some(scale)) = (&solved[k * h.instances + i], scale) else {
                report.rows.push(cell_row(&exp, cell, &tag("alpha")).failed());
                cell_alphas.push(None);
                continue;
            };
            let norm = s.sup_norm + h.c0 / scale;
            match holder_fit(&s.field, cell.radius, o.levels, o.samples) {
                HolderFit::Flat => {
                    report.rows.push(cell_row(&exp, cell, &tag("alpha")).finish(Value::Flat, None, s.converged));
                    report.rows.push(cell_row(&exp, cell, &tag("holder_constant")).measured(0.0));
                    cell_alphas.push(None);
                }
                HolderFit::Power { alpha, constant } => {
                    let row = cell_row(&exp, cell, &tag("alpha"));
                    report.rows.push(row.finish(Value::Number(alpha), Some(0.0), alpha > 0.0 && s.converged));
                    report.rows.push(cell_row(&exp, cell, &tag("holder_constant")).measured(constant / norm));
                    c_max = c_max.max(constant / norm);
                    a_min = a_min.min(alpha);
                    cell_alphas.push(Some(alpha));
                }
                HolderFit::Degenerate => {
                    report.rows.push(cell_row(&exp, cell, &tag("alpha")).failed());
                    cell_alphas.push(None);
                }
            }
        }
        if a_min.is_finite() {
            report.rows.push(cell_row(&exp, cell, "alpha_min").at_least(a_min, 0.0));
        }
        best.push((c_max.max(0.0), a_min));
        alphas.push(cell_alphas);
    }
    // Stability of α across σ, per (family, R, instance).
    for &family in &c.profile.families {
        for &radius in &h.radii {
            let exp = format!("holder:{}", family.label());
            let idx: Vec<usize> =
                (0..cells.len()).filter(|&k| cells[k].family == family && cells[k].radius == radius).collect();
            for i in 0..h.instances {
                let vals: Vec<f64> = idx.iter().filter_map(|&k| alphas[k][i]).collect();
                if vals.is_empty() {
                    continue;
                }
                let mean = vals.iter().sum::<f64>() / vals.len() as f64;
                let dev = vals.iter().map(|a| (a - mean).abs() / mean).fold(0.0, f64::max);
                let s0 = cells[idx[0]].sigma;
                let row = Row::start(&exp, s0, family.beta(), radius, &format!("alpha_stability#{i}"));
                report.rows.push(row.at_most(dev, o.stability));
            }
        }
    }
    summarize(c, &cells, &best, "holder", [("holder_constant", true), ("alpha_min", true)], &mut report);
    if o.self_test {
        let u = FieldFunction::analytic(c.class.dim, Analytic::RadialPower { exponent: 0.5 });
        let radius = h.radii[0];
        let row = Row::start("holder:self_test", 0.0, 0.0, radius, "alpha_sqrt");
        report.rows.push(match holder_fit(&u, radius, o.levels, o.samples) {
            HolderFit::Power { alpha, .. } => {
                row.finish(Value::Number(alpha), Some(0.5), (alpha - 0.5).abs() <= o.self_test_tol)
            }
            _ => row.failed(),
        });
    }
    Ok(report)
}
