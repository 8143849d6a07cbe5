//! Discrete comparison and consistency of the Dirichlet solver.

use nonlocal_core::field::{Analytic, FieldFunction, GaussianBump};
use nonlocal_core::kernels::KernelClass;
use nonlocal_core::ops::{pucci_minus, QuadratureConfig};
use nonlocal_core::regvar::{KernelProfile, SlowlyVarying};
use nonlocal_core::solver::{assemble, solve, DirichletProblem, ProblemOperator, SolverConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn class(sigma: f64) -> KernelClass {
    KernelClass::new(1, KernelProfile::new(sigma, SlowlyVarying::Constant).unwrap(), 1.0, 2.0).unwrap()
}

fn bumps(rng: &mut ChaCha8Rng) -> Vec<GaussianBump> {
    (0..rng.gen_range(1..=3))
        .map(|_| GaussianBump {
            center: [rng.gen_range(-1.5..1.5), 0.0],
            height: rng.gen_range(0.1..1.0),
            width: rng.gen_range(0.1..0.5),
        })
        .collect()
}

#[test]
fn ordered_data_give_ordered_solutions() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..8 {
        let sigma = rng.gen_range(0.5..1.95);
        let b = bumps(&mut rng);
        let mut bigger = b.clone();
        bigger.push(GaussianBump { center: [rng.gen_range(-1.5..1.5), 0.0], height: 0.3, width: 0.2 });
        let f_lo = rng.gen_range(-2.0..0.0);
        let make = |g: Vec<GaussianBump>, f: f64| DirichletProblem {
            operator: ProblemOperator::PucciMinus,
            class: class(sigma),
            radius: 0.25,
            spacing: 1.0 / 32.0,
            rhs: FieldFunction::constant(1, f),
            exterior: Analytic::Gaussians { bumps: g },
            config: SolverConfig::default(),
        };
        // f₁ ≤ f₂ and g₁ ≥ g₂ ⇒ u₁ ≥ u₂.
        let p1 = make(bigger, f_lo);
        let p2 = make(b, f_lo + 1.0);
        let (s1, s2) = (solve(&p1, 1e-10, 200).unwrap(), solve(&p2, 1e-10, 200).unwrap());
        let op = assemble(&p1).unwrap();
        for (a, b) in op.sample(&s1.u).iter().zip(op.sample(&s2.u)) {
            assert!(*a >= b - 1e-10, "{a} < {b}");
        }
    }
}

#[test]
fn scheme_is_consistent_with_the_operator() {
    let g = Analytic::Gaussians { bumps: vec![GaussianBump { center: [0.1, 0.0], height: 1.0, width: 0.3 }] };
    let u = FieldFunction::analytic(1, g.clone());
    for sigma in [0.5, 1.0, 1.5, 1.9] {
        let exact = pucci_minus(&u, &[0.0], &class(sigma), &QuadratureConfig::default()).unwrap();
        let mut errors = Vec::new();
        for k in 3..7 {
            let p = DirichletProblem {
                operator: ProblemOperator::PucciMinus,
                class: class(sigma),
                radius: 0.25,
                spacing: 0.5 / f64::from(1u32 << k),
                rhs: FieldFunction::constant(1, 0.0),
                exterior: g.clone(),
                config: SolverConfig::default(),
            };
            let op = assemble(&p).unwrap();
            let v = op.apply(&op.sample(&u));
            let mid = (0..op.len()).find(|&i| op.node(i)[0] == 0.0).unwrap();
            errors.push((v[mid] - exact).abs());
        }
        let rate = (errors[0] / errors[errors.len() - 1]).log2() / (errors.len() - 1) as f64;
        assert!(rate >= 1.0, "σ = {sigma}: rate {rate}, errors {errors:?}");
    }
}
