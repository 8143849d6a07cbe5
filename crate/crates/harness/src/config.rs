//! Sweep configuration, read from TOML with one section per module.

use std::path::{Path, PathBuf};

use nonlocal_core::barriers::CheckGrid;
use nonlocal_core::field::{Analytic, GaussianBump};
use nonlocal_core::kernels::KernelClass;
use nonlocal_core::ops::QuadratureConfig;
use nonlocal_core::regvar::{KernelProfile, SlowlyVarying};
use nonlocal_core::solver::{ProblemOperator, SolverConfig};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

/// Kernel families and orders swept over.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProfileSection {
    pub families: Vec<SlowlyVarying>,
    pub sigmas: Vec<f64>,
    /// Floor `σ₀`; the smallest swept `σ` when absent.
    pub sigma0: Option<f64>,
}

impl Default for ProfileSection {
    fn default() -> Self {
        Self { families: vec![SlowlyVarying::Constant], sigmas: vec![0.5, 1.0, 1.5, 1.9, 1.99], sigma0: None }
    }
}

/// Dimension and ellipticity constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassSection {
    pub dim: usize,
    pub lambda_lo: f64,
    pub lambda_hi: f64,
}

impl Default for ClassSection {
    fn default() -> Self {
        Self { dim: 1, lambda_lo: 1.0, lambda_hi: 1.0 }
    }
}

/// Kernel-integral and Karamata checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LemmaSection {
    /// Log-spaced radii in `[r_min, 1]`.
    pub r_points: usize,
    pub r_min: f64,
    /// Largest accepted relative quadrature error.
    pub rel_err: f64,
    /// Potter slack as a fraction of the admissible window.
    pub potter_fraction: f64,
    /// Radius of the Karamata deviation comparison across `σ`.
    pub karamata_r: f64,
    /// Largest accepted spread of `|L/l − 1|` across `σ`.
    pub karamata_spread: f64,
    /// Smallest `σ` entering the spread.
    pub karamata_sigma_min: f64,
}

impl Default for LemmaSection {
    fn default() -> Self {
        Self { r_points: 40, r_min: 1e-6, rel_err: 1e-6, potter_fraction: 0.5, karamata_r: 1e-4, karamata_spread: 0.25, karamata_sigma_min: 1.0 }
    }
}

/// Power-barrier certification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BarrierSection {
    pub radius: f64,
    pub kappa1: f64,
    pub grid: CheckGrid,
    /// Accepted negative part of `𝓜⁻φ`.
    pub threshold: f64,
    /// Inner ball `B_{δ₁R}` of the composite-barrier check.
    pub delta1: f64,
    /// Radius ratio where the composite barrier reaches 2.
    pub delta2: f64,
}

impl Default for BarrierSection {
    fn default() -> Self {
        Self { radius: 0.4, kappa1: 0.1, grid: CheckGrid::default(), threshold: 1e-6, delta1: 0.03, delta2: 0.5 }
    }
}

/// Harnack-quotient sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HarnackSection {
    /// Ball radii `R`; the equation holds in `B_{2R}`.
    pub radii: Vec<f64>,
    /// Lattice cells per `R`.
    pub cells: usize,
    /// Seeded exterior data per `(σ, family, R)`.
    pub instances: usize,
    /// Right-hand-side bound `C₀` of the class hypotheses.
    pub c0: f64,
    /// Constant right-hand side of `𝓜⁻u = f`, in `[−C₀, 0]`.
    pub rhs: f64,
    /// Largest accepted ratio of a constant to its value at the smallest `σ`.
    pub uniformity_factor: f64,
    /// Dilation factor of the scale-covariance probe (Constant family only).
    pub scale_probe: Option<f64>,
    pub scale_tol: f64,
    pub solve_tol: f64,
    pub max_iter: usize,
    pub solver: SolverConfig,
}

impl Default for HarnackSection {
    fn default() -> Self {
        Self {
            radii: vec![0.25],
            cells: 32,
            instances: 4,
            c0: 1.0,
            rhs: 0.0,
            uniformity_factor: 2.5,
            scale_probe: Some(2.0),
            scale_tol: 1e-6,
            solve_tol: 1e-8,
            max_iter: 500,
            solver: SolverConfig::default(),
        }
    }
}

/// Oscillation-decay fits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HolderSection {
    /// Dyadic balls `B_{2^{−j}R}`, `j = 0..=levels`.
    pub levels: usize,
    /// Sample points per radius and direction.
    pub samples: usize,
    /// Accepted relative deviation of `α` from its mean over `σ`.
    pub stability: f64,
    /// Fit `|x|^{1/2}` as a measurement self-test.
    pub self_test: bool,
    pub self_test_tol: f64,
}

impl Default for HolderSection {
    fn default() -> Self {
        Self { levels: 4, samples: 64, stability: 0.5, self_test: true, self_test_tol: 0.02 }
    }
}

/// Point evaluations of the extremal operators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OpEvalSection {
    pub field: Analytic,
    pub points: Vec<[f64; 2]>,
}

impl Default for OpEvalSection {
    fn default() -> Self {
        Self { field: Analytic::Bump, points: vec![[0.0, 0.0], [0.3, 0.0], [0.6, 0.0]] }
    }
}

/// A single Dirichlet problem for the first family and order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveSection {
    pub operator: ProblemOperator,
    pub radius: f64,
    pub spacing: f64,
    pub rhs: f64,
    pub exterior: Analytic,
    pub solve_tol: f64,
    pub max_iter: usize,
    pub solver: SolverConfig,
}

impl Default for SolveSection {
    fn default() -> Self {
        Self {
            operator: ProblemOperator::PucciMinus,
            radius: 0.25,
            spacing: 1.0 / 64.0,
            rhs: 0.0,
            exterior: Analytic::Gaussians {
                bumps: vec![GaussianBump { center: [0.8, 0.0], height: 1.0, width: 0.3 }],
            },
            solve_tol: 1e-8,
            max_iter: 500,
            solver: SolverConfig::default(),
        }
    }
}

/// Full configuration of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub seed: u64,
    /// Worker threads; 0 uses every core.
    pub jobs: usize,
    pub output: PathBuf,
    pub profile: ProfileSection,
    pub class: ClassSection,
    pub quadrature: QuadratureConfig,
    pub lemma: LemmaSection,
    pub barrier: BarrierSection,
    pub harnack: HarnackSection,
    pub holder: HolderSection,
    pub op_eval: OpEvalSection,
    pub solve: SolveSection,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            jobs: 0,
            output: PathBuf::from("results.csv"),
            profile: ProfileSection::default(),
            class: ClassSection::default(),
            quadrature: QuadratureConfig::default(),
            lemma: LemmaSection::default(),
            barrier: BarrierSection::default(),
            harnack: HarnackSection::default(),
            holder: HolderSection::default(),
            op_eval: OpEvalSection::default(),
            solve: SolveSection::default(),
        }
    }
}

fn bad(msg: impl Into<String>) -> HarnessError {
    HarnessError::Config(msg.into())
}

impl SweepConfig {
    /// Parses and validates TOML text.
    pub fn from_toml(text: &str) -> Result<Self> {
        let c: Self = toml::from_str(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    /// The floor `σ₀`.
    pub fn sigma0(&self) -> f64 {
        self.profile.sigma0.unwrap_or_else(|| self.profile.sigmas.iter().copied().fold(f64::INFINITY, f64::min))
    }

    pub fn profile(&self, family: SlowlyVarying, sigma: f64) -> Result<KernelProfile> {
        Ok(KernelProfile::with_floor(sigma, family, self.sigma0())?)
    }

    pub fn kernel_class(&self, family: SlowlyVarying, sigma: f64) -> Result<KernelClass> {
        let c = self.class;
        Ok(KernelClass::new(c.dim, self.profile(family, sigma)?, c.lambda_lo, c.lambda_hi)?)
    }

    /// Checks list lengths, ranges and the order floor.
    pub fn validate(&self) -> Result<()> {
        let p = &self.profile;
        if p.families.is_empty() {
            return Err(bad("the family list is empty"));
        }
        if p.sigmas.is_empty() {
            return Err(bad("the sigma list is empty"));
        }
        for f in &p.families {
            f.validate()?;
        }
        let s0 = self.sigma0();
        if !(s0 > 0.0 && s0 < 2.0) {
            return Err(bad(format!("sigma0 must lie in (0,2), got {s0}")));
        }
        for &s in &p.sigmas {
            if !(s >= s0 && s < 2.0) {
                return Err(bad(format!("sigma {s} must lie in [sigma0, 2) = [{s0}, 2)")));
            }
        }
        let c = self.class;
        if !(c.dim == 1 || c.dim == 2) {
            return Err(bad(format!("dimension must be 1 or 2, got {}", c.dim)));
        }
        if !(c.lambda_lo > 0.0 && c.lambda_hi >= c.lambda_lo && c.lambda_hi.is_finite()) {
            return Err(bad(format!("need 0 < lambda_lo ≤ lambda_hi, got {} and {}", c.lambda_lo, c.lambda_hi)));
        }
        let l = &self.lemma;
        if l.r_points < 2 || !(l.r_min > 0.0 && l.r_min < 1.0) {
            return Err(bad("lemma radii need r_points ≥ 2 and r_min in (0,1)"));
        }
        if !(l.potter_fraction >= 0.0 && l.potter_fraction < 1.0) {
            return Err(bad("potter_fraction must lie in [0,1)"));
        }
        if !(l.karamata_r > 0.0 && l.karamata_r < 1.0) {
            return Err(bad("karamata_r must lie in (0,1)"));
        }
        let b = &self.barrier;
        if !(b.radius > 0.0 && b.radius <= 1.0 && b.kappa1 > 0.0 && b.kappa1 < 1.0) {
            return Err(bad("barrier needs radius in (0,1] and kappa1 in (0,1)"));
        }
        if !(b.delta1 > 0.0 && b.delta1 < b.delta2 && b.delta2 < 1.0 && b.radius < 1.0) {
            return Err(bad("barrier needs 0 < delta1 < delta2 < 1 and radius < 1"));
        }
        let h = &self.harnack;
        if h.radii.is_empty() {
            return Err(bad("the radius list is empty"));
        }
        if h.radii.iter().any(|&r| !(r > 0.0 && r <= 0.5)) {
            return Err(bad("Harnack radii must lie in (0, 1/2]"));
        }
        if h.cells < 2 || h.instances == 0 {
            return Err(bad("Harnack sweep needs cells ≥ 2 and at least one instance"));
        }
        if !(h.c0 >= 0.0 && h.rhs <= 0.0 && h.rhs >= -h.c0) {
            return Err(bad(format!("need C0 ≥ 0 and rhs in [-C0, 0], got {} and {}", h.c0, h.rhs)));
        }
        if !(h.uniformity_factor >= 1.0) {
            return Err(bad("uniformity_factor must be at least 1"));
        }
        if let Some(t) = h.scale_probe {
            if !(t > 0.0 && t * h.radii.iter().copied().fold(0.0, f64::max) <= 0.5) {
                return Err(bad("scale_probe must be positive and keep every radius in (0, 1/2]"));
            }
        }
        let o = &self.holder;
        if o.levels < 2 || o.samples < 2 {
            return Err(bad("Hölder fits need levels ≥ 2 and samples ≥ 2"));
        }
        if o.levels > 0 && (1usize << o.levels) > h.cells {
            return Err(bad("the smallest dyadic ball must contain at least one lattice cell"));
        }
        if self.op_eval.points.is_empty() {
            return Err(bad("op_eval needs at least one point"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid_and_round_trips() {
        let c = SweepConfig::default();
        c.validate().unwrap();
        assert_eq!(SweepConfig::from_toml(&c.to_toml()).unwrap(), c);
    }

    #[test]
    fn empty_sigma_list_is_rejected() {
        let err = SweepConfig::from_toml("[profile]\nsigmas = []\n").unwrap_err();
        assert!(matches!(err, HarnessError::Config(_)), "{err}");
    }

    #[test]
    fn sigma_below_floor_is_rejected() {
        let text = "[profile]\nsigmas = [0.5, 1.0]\nsigma0 = 0.8\n";
        assert!(matches!(SweepConfig::from_toml(text), Err(HarnessError::Config(_))));
    }

    #[test]
    fn families_parse_from_tags() {
        let text = r#"
            [profile]
            families = [{ family = "log_sq_pow", beta = 1.0 }, { family = "constant" }]
            sigmas = [1.0]
        "#;
        let c = SweepConfig::from_toml(text).unwrap();
        assert_eq!(c.profile.families[0], SlowlyVarying::LogSqPow { beta: 1.0 });
        assert_eq!(c.sigma0(), 1.0);
    }
}
