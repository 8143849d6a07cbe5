//! Operator evaluation, barrier certification and single solves.

use std::path::Path;

use nonlocal_core::barriers::{choose_p, comparison_delta_r, find_epsilon0, verify_subsolution, CompositeBarrier, Region};
use nonlocal_core::field::FieldFunction;
use nonlocal_core::kernels::sphere_area;
use nonlocal_core::ops::{pucci_minus, pucci_plus};
use nonlocal_core::regvar::{eval_scale, SlowlyVarying};
use nonlocal_core::solver::{assemble, solve_assembled, DirichletProblem, SolveResult};

use crate::config::SweepConfig;
use crate::error::{HarnessError, Result};
use crate::pool;
use crate::report::{Row, SummaryEntry, SweepReport, Value};

fn jobs(c: &SweepConfig) -> Vec<(SlowlyVarying, f64)> {
    c.profile.families.iter().flat_map(|&f| c.profile.sigmas.iter().map(move |&s| (f, s))).collect()
}

fn point_label(x: &[f64]) -> String {
    x.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(";")
}

/// `𝓜±u` of the configured field at the configured points; a row fails if
/// either value is not finite or `𝓜⁻u > 𝓜⁺u`.
pub fn run_op_eval(c: &SweepConfig) -> Result<SweepReport> {
    c.validate()?;
    let dim = c.class.dim;
    let u = FieldFunction::analytic(dim, c.op_eval.field.clone());
    let per = pool::map(c.jobs, &jobs(c), |&(family, sigma)| {
        let exp = format!("op_eval:{}", family.label());
        let mut rows = Vec::new();
        let class = match c.kernel_class(family, sigma) {
            Ok(k) => k,
            Err(_) => return vec![Row::start(&exp, sigma, family.beta(), 0.0, "class").failed()],
        };
        for p in &c.op_eval.points {
            let x = &p[..dim];
            let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            let label = point_label(x);
            let row = |q: &str| Row::start(&exp, sigma, family.beta(), r, &format!("{q}@{label}"));
            match (pucci_plus(&u, x, &class, &c.quadrature), pucci_minus(&u, x, &class, &c.quadrature)) {
                (Ok(hi), Ok(lo)) => {
                    rows.push(row("pucci_plus").measured(hi));
                    rows.push(row("pucci_minus").measured(lo));
                    rows.push(row("pucci_gap").at_least(hi - lo, 0.0));
                }
                _ => rows.push(row("pucci").failed()),
            }
        }
        rows
    })?;
    Ok(SweepReport { rows: per.into_iter().flatten().collect(), summary: Vec::new() })
}

/// `(𝓜⁻Φ)⁻/L(δ₁R)` maximized over `B_{δ₁R}` for the composite barrier
/// built on `κ₀ = ε₀κ₁`.
fn psi_envelope(c: &SweepConfig, class: &nonlocal_core::kernels::KernelClass, kappa0: f64, p: u32) -> Option<f64> {
    let b = c.barrier;
    let phi = CompositeBarrier::new(b.radius, kappa0, p, b.delta1, b.delta2).ok()?;
    let region = Region::Ball { radius: b.delta1 * b.radius };
    let rep = verify_subsolution(&phi.field(class.dim), region, class, &c.quadrature, b.grid, f64::NEG_INFINITY).ok()?;
    let scale = eval_scale(&class.profile, b.delta1 * b.radius).ok()?;
    Some((-rep.min_value).max(0.0) / scale)
}

/// Power-barrier `ε₀` search, composite-barrier `ψ` envelope and `δ_R`;
/// for the Constant family `δ_R` is compared with `λ|S^{n−1}|R^{−σ}/2`.
pub fn run_barrier_verify(c: &SweepConfig) -> Result<SweepReport> {
    c.validate()?;
    let b = c.barrier;
    let per = pool::map(c.jobs, &jobs(c), |&(family, sigma)| {
        let exp = format!("barrier:{}", family.label());
        let row = |q: &str| Row::start(&exp, sigma, family.beta(), b.radius, q);
        let class = match c.kernel_class(family, sigma) {
            Ok(k) => k,
            Err(_) => return vec![row("class").failed()],
        };
        let mut rows = Vec::new();
        match choose_p(class.dim, class.lambda_lo, class.lambda_hi) {
            Ok(p) => rows.push(row("p").measured(p as f64)),
            Err(_) => rows.push(row("p").failed()),
        }
        match find_epsilon0(b.radius, b.kappa1, &class, &c.quadrature, b.grid, b.threshold) {
            Ok(e) => {
                rows.push(row("eps0").measured(e.eps0));
                rows.push(row("min_pucci_minus").at_least(e.report.min_value, -b.threshold));
                match psi_envelope(c, &class, e.eps0 * b.kappa1, e.barrier.p) {
                    Some(psi) => rows.push(row("psi_envelope").measured(psi)),
                    None => rows.push(row("psi_envelope").failed()),
                }
            }
            Err(_) => rows.push(row("eps0").failed()),
        }
        match comparison_delta_r(&class, b.radius) {
            Ok(d) if family == SlowlyVarying::Constant => {
                let exact = class.lambda_lo * sphere_area(class.dim) * b.radius.powf(-sigma) / 2.0;
                let pass = ((d - exact) / exact).abs() <= 1e-6;
                rows.push(row("delta_R").finish(Value::Number(d), Some(exact), pass));
            }
            Ok(d) => rows.push(row("delta_R").at_least(d, 0.0)),
            Err(_) => rows.push(row("delta_R").failed()),
        }
        rows
    })?;
    let rows: Vec<Row> = per.into_iter().flatten().collect();
    let summary = c
        .profile
        .families
        .iter()
        .map(|f| {
            let exp = format!("barrier:{}", f.label());
            let psi: Vec<(f64, f64)> = rows
                .iter()
                .filter(|r| r.experiment == exp && r.quantity == "psi_envelope")
                .map(|r| (r.sigma, r.value.number().unwrap_or(f64::NAN)))
                .collect();
            let max = psi.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
            let lo = psi.iter().copied().min_by(|a, b| a.0.total_cmp(&b.0)).map_or(f64::NAN, |p| p.1);
            let hi = psi.iter().copied().max_by(|a, b| a.0.total_cmp(&b.0)).map_or(f64::NAN, |p| p.1);
            SummaryEntry {
                experiment: exp,
                quantity: "psi_envelope".into(),
                radius: b.radius,
                max_over_sigma: max,
                uniformity_ratio: hi / lo,
                pass: max.is_finite(),
            }
        })
        .collect();
    Ok(SweepReport { rows, summary })
}

/// The Dirichlet problem of the `[solve]` section for the first family and order.
pub fn solve_problem(c: &SweepConfig) -> Result<DirichletProblem> {
    c.validate()?;
    let s = &c.solve;
    Ok(DirichletProblem {
        operator: s.operator.clone(),
        class: c.kernel_class(c.profile.families[0], c.profile.sigmas[0])?,
        radius: s.radius,
        spacing: s.spacing,
        rhs: FieldFunction::constant(c.class.dim, s.rhs),
        exterior: s.exterior.clone(),
        config: s.solver,
    })
}

/// Solves the `[solve]` problem; writes `x[,y],u` at the unknowns to
/// `solution` and returns the residual rows.
pub fn run_solve(c: &SweepConfig, solution: &Path) -> Result<(SweepReport, SolveResult)> {
    let problem = solve_problem(c)?;
    let op = assemble(&problem)?;
    let sol = solve_assembled(&op, &problem, c.solve.solve_tol, c.solve.max_iter)?;
    let values = op.sample(&sol.u);
    if let Some(dir) = solution.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let mut w = csv::Writer::from_path(solution)?;
    let dim = c.class.dim;
    w.write_record(if dim == 1 { &["x", "u"][..] } else { &["x", "y", "u"][..] })?;
    for (k, v) in values.iter().enumerate() {
        let x = op.node(k);
        let mut rec: Vec<String> = x[..dim].iter().map(|t| t.to_string()).collect();
        rec.push(v.to_string());
        w.write_record(&rec)?;
    }
    w.flush().map_err(HarnessError::Io)?;
    let family = c.profile.families[0];
    let sigma = c.profile.sigmas[0];
    let exp = format!("solve:{}", family.label());
    let row = |q: &str| Row::start(&exp, sigma, family.beta(), problem.radius, q);
    let rows = vec![
        row("residual").finish(Value::Number(sol.residual), Some(c.solve.solve_tol), sol.converged),
        row("iterations").measured(sol.iterations as f64),
        row("unknowns").measured(op.len() as f64),
    ];
    Ok((SweepReport { rows, summary: Vec::new() }, sol))
}
