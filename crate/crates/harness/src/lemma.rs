//! Kernel-integral, Potter and Karamata checks over the family × σ × r grid.

use nonlocal_core::regvar::{
    eval_l0, eval_scale, eval_scale_quadrature, find_rho, karamata_ratio, kernel_integral_bounds,
    potter_constants, potter_delta_limit, tail_mass_bound, KernelProfile, PotterDomain, PotterEstimate, PotterGrid,
    SlowlyVarying,
};

use crate::config::SweepConfig;
use crate::error::Result;
use crate::pool;
use crate::report::{Row, SweepReport, Value};

/// `r_points` log-spaced radii from `r_min` to 1.
pub fn radii(c: &SweepConfig) -> Vec<f64> {
    let n = c.lemma.r_points;
    let lm = c.lemma.r_min.ln();
    (0..n).map(|i| if i + 1 == n { 1.0 } else { (lm * (1.0 - i as f64 / (n - 1) as f64)).exp() }).collect()
}

/// Potter constants `(a₀, a_∞)` with slack `potter_fraction` of the window.
pub fn potter_pair(c: &SweepConfig, profile: &KernelProfile) -> Result<(PotterEstimate, PotterEstimate)> {
    let delta = c.lemma.potter_fraction * potter_delta_limit(profile.sigma());
    let grid = PotterGrid::default();
    Ok((
        potter_constants(profile, delta, PotterDomain::UnitInterval, &grid)?,
        potter_constants(profile, delta, PotterDomain::AboveOne, &grid)?,
    ))
}

fn jobs(c: &SweepConfig) -> Vec<(SlowlyVarying, f64)> {
    c.profile.families.iter().flat_map(|&f| c.profile.sigmas.iter().map(move |&s| (f, s))).collect()
}

struct Rows<'a> {
    experiment: &'a str,
    sigma: f64,
    beta: f64,
    out: Vec<Row>,
}

impl<'a> Rows<'a> {
    fn row(&self, r: f64, q: &str) -> crate::report::RowBuilder {
        Row::start(self.experiment, self.sigma, self.beta, r, q)
    }

    fn push(&mut self, row: Row) {
        self.out.push(row);
    }

    fn potter(&mut self, name: &str, e: Option<PotterEstimate>) {
        let row = match e {
            Some(p) => self.row(1.0, name).finish(Value::Number(p.a), Some(PotterGrid::default().cap), p.valid),
            None => self.row(1.0, name).failed(),
        };
        self.push(row);
    }
}

fn lemma_rows(c: &SweepConfig, family: SlowlyVarying, sigma: f64) -> Vec<Row> {
    let experiment = format!("lemma:{}", family.label());
    let mut rows = Rows { experiment: &experiment, sigma, beta: family.beta(), out: Vec::new() };
    let profile = match c.profile(family, sigma) {
        Ok(p) => p,
        Err(_) => {
            let r = rows.row(1.0, "profile").failed();
            rows.push(r);
            return rows.out;
        }
    };
    let tol = c.lemma.rel_err;
    let pair = potter_pair(c, &profile).ok();
    rows.potter("potter_a0", pair.map(|p| p.0));
    rows.potter("potter_a_inf", pair.map(|p| p.1));
    let a0 = pair.map_or(f64::NAN, |p| p.0.a);
    let a_inf = pair.map_or(f64::NAN, |p| p.1.a);

    let rs = radii(c);
    for &r in &rs {
        match kernel_integral_bounds(&profile, r, a0) {
            Ok(checks) => {
                for ch in checks {
                    let row = rows.row(r, ch.name).finish(
                        Value::Number(ch.lhs),
                        Some(ch.rhs),
                        ch.holds() && ch.rel_err <= tol && a0.is_finite(),
                    );
                    rows.push(row);
                    let row = rows.row(r, &format!("{}_rel_err", ch.name)).at_most(ch.rel_err, tol);
                    rows.push(row);
                }
            }
            Err(_) => {
                let row = rows.row(r, "kernel_bounds").failed();
                rows.push(row);
            }
        }
    }
    let row = match tail_mass_bound(&profile, a_inf) {
        Ok(ch) => rows.row(1.0, ch.name).finish(Value::Number(ch.lhs), Some(ch.rhs), ch.holds() && ch.rel_err <= tol),
        Err(_) => rows.row(1.0, "tail_mass").failed(),
    };
    rows.push(row);

    // L is non-increasing: the largest step up along increasing r.
    let scale: Result<Vec<f64>> = rs.iter().map(|&r| Ok(eval_scale(&profile, r)?)).collect();
    let row = match scale {
        Ok(v) => {
            let up = v.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
            rows.row(rs[0], "scale_monotone").at_most(up, 0.0)
        }
        Err(_) => rows.row(rs[0], "scale_monotone").failed(),
    };
    rows.push(row);

    match find_rho(&profile) {
        Ok(rho) => {
            let row = rows.row(rho, "rho").measured(rho);
            rows.push(row);
            for &r in rs.iter().filter(|&&r| r < rho) {
                let row = match karamata_ratio(&profile, r) {
                    Ok(q) => rows.row(r, "karamata_ratio").finish(Value::Number(q), Some(2.0), (0.5..=2.0).contains(&q)),
                    Err(_) => rows.row(r, "karamata_ratio").failed(),
                };
                rows.push(row);
            }
        }
        Err(_) => {
            let row = rows.row(1.0, "rho").failed();
            rows.push(row);
        }
    }
    let kr = c.lemma.karamata_r;
    let row = match karamata_ratio(&profile, kr) {
        Ok(q) => rows.row(kr, "karamata_deviation").measured((q - 1.0).abs()),
        Err(_) => rows.row(kr, "karamata_deviation").failed(),
    };
    rows.push(row);
    rows.out
}

/// Spread of `|L/l − 1|` at `karamata_r` across `σ ≥ karamata_sigma_min`, per family.
fn karamata_spread(c: &SweepConfig, rows: &[Row]) -> Vec<Row> {
    c.profile
        .families
        .iter()
        .map(|f| {
            let exp = format!("lemma:{}", f.label());
            let devs: Vec<f64> = rows
                .iter()
                .filter(|r| r.experiment == exp && r.quantity == "karamata_deviation")
                .filter(|r| r.sigma >= c.lemma.karamata_sigma_min)
                .filter_map(|r| r.value.number())
                .collect();
            let spread = devs.iter().copied().fold(f64::NEG_INFINITY, f64::max)
                - devs.iter().copied().fold(f64::INFINITY, f64::min);
            let row = Row::start(&exp, c.lemma.karamata_sigma_min, f.beta(), c.lemma.karamata_r, "karamata_spread");
            if devs.is_empty() {
                row.finish(Value::Number(0.0), Some(c.lemma.karamata_spread), true)
            } else {
                row.at_most(spread, c.lemma.karamata_spread)
            }
        })
        .collect()
}

/// Kernel-integral bounds, tail mass, Potter constants, monotonicity of `L`
/// and Karamata ratios for every family and order.
pub fn run_lemma_suite(c: &SweepConfig) -> Result<SweepReport> {
    c.validate()?;
    let per_job = pool::map(c.jobs, &jobs(c), |&(f, s)| lemma_rows(c, f, s))?;
    let mut rows: Vec<Row> = per_job.into_iter().flatten().collect();
    let spread = karamata_spread(c, &rows);
    rows.extend(spread);
    Ok(SweepReport { rows, summary: Vec::new() })
}

fn regvar_rows(c: &SweepConfig, family: SlowlyVarying, sigma: f64) -> Vec<Row> {
    let experiment = format!("regvar:{}", family.label());
    let mut rows = Rows { experiment: &experiment, sigma, beta: family.beta(), out: Vec::new() };
    let profile = match c.profile(family, sigma) {
        Ok(p) => p,
        Err(_) => {
            let r = rows.row(1.0, "profile").failed();
            rows.push(r);
            return rows.out;
        }
    };
    let row = match eval_l0(&family, 1.0) {
        Ok(v) => rows.row(1.0, "l0_at_one_error").at_most((v - 1.0).abs(), 0.0),
        Err(_) => rows.row(1.0, "l0_at_one_error").failed(),
    };
    rows.push(row);
    let row = match eval_scale(&profile, 1.0) {
        Ok(v) => rows.row(1.0, "scale_at_one").at_most(v.abs(), 0.0),
        Err(_) => rows.row(1.0, "scale_at_one").failed(),
    };
    rows.push(row);
    for &r in &radii(c) {
        let row = match (eval_scale(&profile, r), eval_scale_quadrature(&profile, r)) {
            (Ok(a), Ok(b)) => {
                let rel = if a == 0.0 { b.value.abs() } else { ((a - b.value) / a).abs() };
                rows.row(r, "scale_quadrature_rel_err").at_most(rel, 1e-8)
            }
            _ => rows.row(r, "scale_quadrature_rel_err").failed(),
        };
        rows.push(row);
    }
    let pair = potter_pair(c, &profile).ok();
    rows.potter("potter_a0", pair.map(|p| p.0));
    rows.potter("potter_a_inf", pair.map(|p| p.1));
    match find_rho(&profile) {
        Ok(rho) => {
            let row = rows.row(rho, "rho").measured(rho);
            rows.push(row);
            if let Some((a, b)) = pair {
                let row = match nonlocal_core::regvar::compute_rho1(a.a, b.a, c.sigma0(), Some(rho)) {
                    Ok(v) => rows.row(v, "rho1").measured(v),
                    Err(_) => rows.row(1.0, "rho1").failed(),
                };
                rows.push(row);
            }
        }
        Err(_) => {
            let row = rows.row(1.0, "rho").failed();
            rows.push(row);
        }
    }
    rows.out
}

/// Normalization, scale-function accuracy, Potter constants and `ρ`, `ρ₁`
/// for every family and order.
pub fn run_regvar_check(c: &SweepConfig) -> Result<SweepReport> {
    c.validate()?;
    let per_job = pool::map(c.jobs, &jobs(c), |&(f, s)| regvar_rows(c, f, s))?;
    Ok(SweepReport { rows: per_job.into_iter().flatten().collect(), summary: Vec::new() })
}
