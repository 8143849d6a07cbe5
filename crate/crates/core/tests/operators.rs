//! Algebraic and analytic properties of the nonlocal operators.

use nonlocal_core::field::{Analytic, FieldFunction, GaussianBump};
use nonlocal_core::kernels::{KernelClass, KernelSpec, Weight};
use nonlocal_core::ops::{
    pucci_minus, pucci_plus, pucci_truncated, truncation_tail_mass, Extremal, NodeSet, OperatorFamily,
    QuadratureConfig,
};
use nonlocal_core::regvar::{KernelProfile, SlowlyVarying};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn class(dim: usize, sigma: f64, l0: SlowlyVarying) -> KernelClass {
    KernelClass::new(dim, KernelProfile::new(sigma, l0).unwrap(), 1.0, 2.5).unwrap()
}

fn random_field(rng: &mut ChaCha8Rng, dim: usize) -> FieldFunction {
    let count = rng.gen_range(1..=3);
    let bumps = (0..count)
        .map(|_| GaussianBump {
            center: [rng.gen_range(-1.0..1.0), if dim == 2 { rng.gen_range(-1.0..1.0) } else { 0.0 }],
            height: rng.gen_range(-1.0..1.0),
            width: rng.gen_range(0.2..0.8),
        })
        .collect();
    FieldFunction::analytic(dim, Analytic::Gaussians { bumps })
        .plus(&FieldFunction::constant(dim, rng.gen_range(-0.5..0.5)))
}

fn point(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| rng.gen_range(-0.5..0.5)).collect()
}

#[test]
fn duality_and_homogeneity_on_shared_nodes() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let q = QuadratureConfig::default();
    for i in 0..24 {
        let dim = if i % 4 == 3 { 2 } else { 1 };
        let c = class(dim, [0.5, 1.0, 1.5, 1.9][i % 4], SlowlyVarying::Constant);
        let u = random_field(&mut rng, dim);
        let x = point(&mut rng, dim);
        let nodes = NodeSet::build(&[&u], &x, &c.profile, &q).unwrap();
        let d = nodes.sample(&u).unwrap();
        let plus = nodes.extremal_on(&d, &c, Extremal::Plus, false).unwrap();
        let minus = nodes.extremal_on(&d, &c, Extremal::Minus, false).unwrap();
        // Negation is exact in floating point, so the field itself can be used.
        let neg = nodes.extremal(&u.scaled(-1.0), &c, Extremal::Plus, false).unwrap();
        assert!((neg + minus).abs() <= 1e-12 * (1.0 + minus.abs()), "duality {neg} vs {minus}");
        let k = rng.gen_range(0.0..3.0);
        let scaled = nodes.extremal_on(&d.scaled(k), &c, Extremal::Plus, false).unwrap();
        assert!((scaled - k * plus).abs() <= 1e-12 * (1.0 + (k * plus).abs()), "homogeneity {scaled} vs {}", k * plus);
    }
}

#[test]
fn class_members_lie_between_extremals() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let q = QuadratureConfig::default();
    for i in 0..12 {
        let dim = 1 + i % 2;
        let c = class(dim, 0.4 + 0.13 * i as f64, SlowlyVarying::LogPow { beta: 1.0 });
        let u = random_field(&mut rng, dim);
        let x = point(&mut rng, dim);
        let nodes = NodeSet::build(&[&u], &x, &c.profile, &q).unwrap();
        let lo = nodes.extremal(&u, &c, Extremal::Minus, false).unwrap();
        let hi = nodes.extremal(&u, &c, Extremal::Plus, false).unwrap();
        for w in [Weight::ConstLower, Weight::ConstUpper, Weight::RadialBlend { phase: rng.gen_range(0.0..6.0) }] {
            let k = KernelSpec::new(c, w, None).unwrap();
            let v = nodes.linear(&u, &nodes.weights_for(&k).unwrap()).unwrap();
            let slack = 1e-12 * (1.0 + lo.abs() + hi.abs());
            assert!(lo <= v + slack && v <= hi + slack, "{lo} ≤ {v} ≤ {hi}");
        }
    }
}

#[test]
fn infsup_ellipticity_sandwich() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let q = QuadratureConfig::default();
    for i in 0..10 {
        let c = class(1, 0.7 + 0.12 * i as f64, SlowlyVarying::Constant);
        let k = |w| KernelSpec::new(c, w, None).unwrap();
        let fam = OperatorFamily::new(vec![
            vec![k(Weight::ConstLower), k(Weight::RadialBlend { phase: 1.0 })],
            vec![k(Weight::ConstUpper), k(Weight::RadialBlend { phase: 2.5 })],
        ])
        .unwrap();
        let (u, v) = (random_field(&mut rng, 1), random_field(&mut rng, 1));
        let uv = u.plus(&v);
        let x = point(&mut rng, 1);
        let nodes = NodeSet::build(&[&u, &v, &uv], &x, &c.profile, &q).unwrap();
        let w = fam.weights_on(&nodes).unwrap();
        let diff = nodes.infsup(&uv, &w).unwrap() - nodes.infsup(&u, &w).unwrap();
        let lo = nodes.extremal(&v, &c, Extremal::Minus, false).unwrap();
        let hi = nodes.extremal(&v, &c, Extremal::Plus, false).unwrap();
        let slack = 1e-10 * (1.0 + lo.abs() + hi.abs());
        assert!(lo - slack <= diff && diff <= hi + slack, "{lo} ≤ {diff} ≤ {hi}");
    }
}

#[test]
fn extremals_are_sub_and_superadditive() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let q = QuadratureConfig::default();
    for _ in 0..10 {
        let c = class(1, rng.gen_range(0.3..1.95), SlowlyVarying::LogSqPow { beta: -1.0 });
        let (u, v) = (random_field(&mut rng, 1), random_field(&mut rng, 1));
        let uv = u.plus(&v);
        let x = point(&mut rng, 1);
        let nodes = NodeSet::build(&[&u, &v, &uv], &x, &c.profile, &q).unwrap();
        let e = |f: &FieldFunction, s| nodes.extremal(f, &c, s, false).unwrap();
        let slack = 1e-10 * (1.0 + e(&u, Extremal::Plus).abs() + e(&v, Extremal::Plus).abs());
        assert!(e(&uv, Extremal::Plus) <= e(&u, Extremal::Plus) + e(&v, Extremal::Plus) + slack);
        assert!(e(&uv, Extremal::Minus) >= e(&u, Extremal::Minus) + e(&v, Extremal::Minus) - slack);
    }
}

#[test]
fn truncation_changes_extremals_by_at_most_four_kappa_sup() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let q = QuadratureConfig::default();
    for i in 0..10 {
        let c = class(1, [0.5, 1.0, 1.5, 1.9, 1.99][i % 5], SlowlyVarying::Constant);
        let u = random_field(&mut rng, 1);
        let x = point(&mut rng, 1);
        let kappa = truncation_tail_mass(&c).unwrap();
        let sup = u.sup_norm().unwrap();
        for (sign, full) in [
            (Extremal::Minus, pucci_minus(&u, &x, &c, &q).unwrap()),
            (Extremal::Plus, pucci_plus(&u, &x, &c, &q).unwrap()),
        ] {
            let t = pucci_truncated(&u, &x, &c, sign, &q).unwrap();
            assert!((t - full).abs() <= 4.0 * kappa * sup + 1e-8 * full.abs(), "{t} vs {full}");
        }
    }
}

#[test]
fn constant_family_scales_exactly() {
    // K(y) = (2−σ)|y|^{−n−σ}: 𝓜±[u(r·)](x) = r^σ 𝓜±u(rx).
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let q = QuadratureConfig::default();
    for i in 0..8 {
        let dim = 1 + i % 2;
        let sigma = rng.gen_range(0.3..1.95);
        let c = class(dim, sigma, SlowlyVarying::Constant);
        let u = random_field(&mut rng, dim);
        let r = rng.gen_range(0.3..3.0);
        let x = point(&mut rng, dim);
        let rx: Vec<f64> = x.iter().map(|v| r * v).collect();
        let lhs = pucci_plus(&u.dilated(r), &x, &c, &q).unwrap();
        let rhs = r.powf(sigma) * pucci_plus(&u, &rx, &c, &q).unwrap();
        assert!((lhs - rhs).abs() <= 1e-6 * (1.0 + rhs.abs()), "{lhs} vs {rhs}");
    }
}

#[test]
fn bump_closed_forms() {
    // σ = 1, K = 1/y²: 𝓜⁺(1−x²)⁺ at x equals −8 + 4x ln((1+x)/(1−x)).
    let c = KernelClass::new(1, KernelProfile::new(1.0, SlowlyVarying::Constant).unwrap(), 1.0, 1.0).unwrap();
    let u = FieldFunction::analytic(1, Analytic::Bump);
    let q = QuadratureConfig::default();
    for x in [0.0_f64, 0.3, 0.6] {
        let exact = -8.0 + 4.0 * x * ((1.0 + x) / (1.0 - x)).ln();
        let v = pucci_plus(&u, &[x], &c, &q).unwrap();
        assert!((v - exact).abs() < 1e-8, "{v} vs {exact}");
    }
}

#[test]
fn ring_refinement_converges_at_least_linearly() {
    let c = KernelClass::new(1, KernelProfile::new(1.0, SlowlyVarying::Constant).unwrap(), 1.0, 1.0).unwrap();
    let u = FieldFunction::analytic(1, Analytic::Bump);
    let x = 0.3_f64;
    let exact = -8.0 + 4.0 * x * ((1.0 + x) / (1.0 - x)).ln();
    let (mut lx, mut ly) = (Vec::new(), Vec::new());
    for k in 0..7 {
        let rf = 4f64.powf(0.5f64.powi(k));
        let q = QuadratureConfig { ring_factor: rf, adaptive: false, align_breakpoints: false, ..Default::default() };
        let err = (pucci_plus(&u, &[x], &c, &q).unwrap() - exact).abs();
        lx.push(rf.ln().ln());
        ly.push(err.ln());
    }
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let slope = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum::<f64>()
        / lx.iter().map(|a| (a - mx).powi(2)).sum::<f64>();
    assert!(slope >= 1.0, "fitted order {slope}");
}
