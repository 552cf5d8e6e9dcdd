use std::sync::Arc;

use proptest::prelude::*;
use statrs::function::gamma::gamma;

use super::*;
use crate::quad::integrate;

fn ctx(n: u32) -> GeometryContext {
    GeometryContext::new(n).unwrap()
}

fn exp_profile(n: u32) -> RadialProfile {
    let g = Arc::new(Grid::log_spaced(ctx(n), 1e-9, 45.0, 500).unwrap());
    RadialProfile::from_fn(g, DecayClass::ExponentialDecay { rate: 1.0 }, |s| (-s).exp()).unwrap()
}

fn bump(s: Jet) -> Jet {
    if s.v >= 2.0 {
        return Jet::constant(0.0);
    }
    let q = s * 0.5;
    (-1.0 / (1.0 - q * q)).exp() * std::f64::consts::E
}

fn bump_profile(n: u32, per_decade: usize) -> RadialProfile {
    let decades = 2.0f64.log10() + 6.0;
    let k = (decades * per_decade as f64) as usize;
    let g = Arc::new(Grid::log_spaced(ctx(n), 1e-6, 2.0, k).unwrap());
    RadialProfile::from_fn(g, DecayClass::CompactSupport, bump).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

#[test]
fn hermite_exact_on_quintics_in_log_s() {
    let g = Arc::new(Grid::log_spaced(ctx(4), 1e-2, 1e2, 9).unwrap());
    let f = |s: Jet| {
        let x = s.ln();
        x.powi(5) - 2.0 * x.powi(3) + x + 1.0
    };
    let p = RadialProfile::from_fn(g, DecayClass::CompactSupport, |s| f(s) - f(Jet::var(1e2)).v).unwrap();
    for &s in &[0.013, 0.4, 2.7, 55.0] {
        let a = p.sample(s).unwrap();
        let b = f(Jet::var(s));
        assert!((a.v - (b.v - f(Jet::var(1e2)).v)).abs() < 1e-9, "{s}");
        assert!(rel(a.d1, b.d1) < 1e-9);
        assert!(rel(a.d2, b.d2) < 1e-9);
    }
}

#[test]
fn constant_has_zero_laplacian() {
    let g = Arc::new(Grid::log_spaced(ctx(5), 1e-3, 10.0, 40).unwrap());
    let p = RadialProfile::from_fn(g, DecayClass::ExponentialDecay { rate: 1.0 }, |_| Jet::constant(3.0)).unwrap();
    assert_eq!(p.laplace_hyperbolic(0.5).unwrap(), 0.0);
    assert_eq!(p.laplace_euclidean(0.5).unwrap(), 0.0);
}

#[test]
fn hyperbolic_laplacian_matches_geodesic_differences() {
    let c = ctx(4);
    let p = exp_profile(4);
    let u = |rho: f64| (-(c.sigma_n() * c.phi(rho).unwrap())).exp();
    let rho = c.phi_inverse(1.0).unwrap();
    let h = 1e-4;
    let d1 = (u(rho + h) - u(rho - h)) / (2.0 * h);
    let d2 = (u(rho + h) - 2.0 * u(rho) + u(rho - h)) / (h * h);
    let oracle = -(d2 + 3.0 * rho.cosh() / rho.sinh() * d1);
    assert!(rel(p.laplace_hyperbolic(1.0).unwrap(), oracle) < 1e-5);
}

#[test]
fn euclidean_laplacian_of_bubble() {
    let c = ctx(5);
    let sig = c.sigma_n();
    let g = Arc::new(Grid::log_spaced(c, 1e-8, 1e8, 400).unwrap());
    let p = RadialProfile::from_fn(g, DecayClass::PolynomialDecay { rate: 0.2 }, |s| {
        (1.0 + (s / sig).powf(0.4)).powf(-0.5)
    })
    .unwrap();
    for &s in &[1e-3, 0.7, 5.0, 300.0] {
        let r: f64 = (s / sig).powf(0.2);
        let q = 1.0 + r * r;
        let up = -r * q.powf(-1.5);
        let upp = -q.powf(-1.5) + 3.0 * r * r * q.powf(-2.5);
        let oracle = -(upp + 4.0 / r * up);
        assert!(rel(p.laplace_euclidean(s).unwrap(), oracle) < 1e-6, "{s}");
    }
}

#[test]
fn euclidean_laplacian_by_radial_differences() {
    let c = ctx(4);
    let p = exp_profile(4);
    let u = |r: f64| (-c.sigma_n() * r.powi(4)).exp();
    let r = (1.0 / c.sigma_n()).powf(0.25);
    let h = 1e-4;
    let d1 = (u(r + h) - u(r - h)) / (2.0 * h);
    let d2 = (u(r + h) - 2.0 * u(r) + u(r - h)) / (h * h);
    assert!(rel(p.laplace_euclidean(1.0).unwrap(), -(d2 + 3.0 / r * d1)) < 1e-5);
}

#[test]
fn laplacians_agree_near_origin() {
    let p = exp_profile(5);
    let mut last = f64::INFINITY;
    for &s in &[1e-2, 1e-4, 1e-6] {
        let d = rel(p.laplace_hyperbolic(s).unwrap(), p.laplace_euclidean(s).unwrap());
        assert!(d < 5.0 * (s / p.ctx().sigma_n()).powf(0.4), "{s}: {d}");
        assert!(d < last);
        last = d;
    }
}

#[test]
fn zero_profile_functionals_vanish() {
    let g = Arc::new(Grid::log_spaced(ctx(5), 1e-3, 10.0, 20).unwrap());
    let z = RadialProfile::zero(g);
    assert_eq!(z.energy_hyp().unwrap().value, 0.0);
    assert_eq!(z.energy_euc().unwrap().value, 0.0);
    assert_eq!(z.lp_norm(2.0).unwrap().value, 0.0);
    assert_eq!(z.inner_product_laplace().unwrap().value, 0.0);
    assert_eq!(z.weighted_l2(0.8).unwrap().value, 0.0);
}

#[test]
fn exponential_norms() {
    let p = exp_profile(5);
    assert!(rel(p.lp_norm(2.0).unwrap().value, 0.5f64.sqrt()) < 1e-9);
    assert!(rel(p.lp_integral(1.0).unwrap().value, 1.0) < 1e-9);
    assert!(rel(p.lp_integral(4.0).unwrap().value, 0.25) < 1e-9);
    let sig = p.ctx().sigma_n();
    let a = 0.8;
    let oracle = sig.powf(a) * gamma(1.0 - a) * 2f64.powf(a - 1.0);
    assert!(rel(p.weighted_l2(a).unwrap().value, oracle) < 1e-6);
    assert!(rel(p.weighted_l2(0.0).unwrap().value, p.l2_squared().unwrap().value) < 1e-14);
}

#[test]
fn smoothed_plateau_norm() {
    // plateau of height 1 on [0, 2] with tanh edges; closed form of ∫ v^q only for q = 1
    let w = 0.05;
    let g = Arc::new(Grid::log_spaced(ctx(4), 1e-6, 4.0, 4000).unwrap());
    let p = RadialProfile::from_fn(g, DecayClass::CompactSupport, |s| {
        (1.0 - ((s - 2.0) / w).tanh()) * 0.5 - (1.0 - ((4.0 - 2.0) / w).tanh()) * 0.5
    })
    .unwrap();
    // ∫_0^4 (1 - tanh((s-2)/w))/2 ds = 2 + (w/2) ln(cosh(2/w)/cosh(2/w)) = 2
    let i = p.lp_integral(1.0).unwrap().value;
    assert!(rel(i, 2.0) < 1e-6, "{i}");
    for q in [2.0, 4.0] {
        assert!(rel(p.lp_norm(q).unwrap().value, 2f64.powf(1.0 / q)) < 1e-2);
    }
}

#[test]
fn inner_product_is_minus_dirichlet() {
    let p = exp_profile(5);
    let ip = p.inner_product_laplace().unwrap().value;
    let d = p.dirichlet_hyp().unwrap().value;
    assert!(rel(ip, -d) < 1e-5, "{ip} {d}");
    let b = bump_profile(5, 60);
    let ip = b.inner_product_laplace().unwrap().value;
    let l2 = b.l2_squared().unwrap().value;
    assert!(ip <= -4.0 * l2);
}

#[test]
fn euclidean_energy_matches_radial_quadrature() {
    let c = ctx(4);
    let p = exp_profile(4);
    let sig = c.sigma_n();
    let lap = |r: f64| {
        let e = (-sig * r.powi(4)).exp();
        let up = -4.0 * sig * r.powi(3) * e;
        let upp = (-12.0 * sig * r * r + 16.0 * sig * sig * r.powi(6)) * e;
        upp + 3.0 / r * up
    };
    let r = integrate(|r| lap(r).powi(2) * 4.0 * sig * r.powi(3), 0.0, 6.0, 1e-14, 1e-13);
    assert!(rel(p.energy_euc().unwrap().value, r.value) < 1e-6);
}

#[test]
fn volume_transform_is_an_isometry() {
    let c = ctx(5);
    let p = bump_profile(5, 80);
    for q in [1.0, 2.0, 4.0] {
        let oracle = integrate(
            |rho: f64| {
                let s = c.ball_volume(rho).unwrap();
                let v = if s >= 2.0 { 0.0 } else { bump(Jet::var(s)).v };
                v.abs().powf(q) * 5.0 * c.sigma_n() * rho.sinh().powi(4)
            },
            0.0,
            c.phi_inverse(2.0).unwrap(),
            1e-15,
            1e-13,
        );
        assert!(rel(p.lp_integral(q).unwrap().value, oracle.value) < 1e-6);
    }
}

#[test]
fn refinement_is_stable() {
    let a = bump_profile(6, 200);
    let b = bump_profile(6, 400);
    for (x, y) in [
        (a.energy_hyp(), b.energy_hyp()),
        (a.energy_euc(), b.energy_euc()),
        (a.inner_product_laplace(), b.inner_product_laplace()),
        (a.weighted_l2(4.0 / 6.0), b.weighted_l2(4.0 / 6.0)),
    ] {
        let (x, y) = (x.unwrap().value, y.unwrap().value);
        assert!(x > 0.0 || x < 0.0);
        assert!(rel(x, y) < 1e-6, "{x} {y}");
    }
}

#[test]
fn break_knots_carry_second_derivative_jumps() {
    // two quadratics in s joined continuously at s = 1
    let g = Arc::new(Grid::log_spaced_with_breaks(ctx(4), 1e-3, 4.0, 20.0, &[1.0]).unwrap());
    let p = RadialProfile::from_fn_sided(g, DecayClass::CompactSupport, |s, side| {
        let left = s.v < 1.0 || (s.v == 1.0 && side == Side::Left);
        if left {
            1.5 - s * s * 0.5
        } else {
            let d = 4.0 - s;
            d * d / 9.0
        }
    });
    let p = p.unwrap();
    // quadratics in s are not polynomial in ln s, so only interpolation accuracy applies
    assert!((p.sample(0.5).unwrap().d2 + 1.0).abs() < 1e-5);
    assert!((p.sample(2.0).unwrap().d2 - 2.0 / 9.0).abs() < 1e-5);
}

#[test]
fn error_cases() {
    let p = exp_profile(4);
    assert!(matches!(p.sample(100.0), Err(Error::Extrapolation { .. })));
    assert!(matches!(p.lp_norm(0.5), Err(Error::Domain(_))));
    let g = Arc::new(Grid::log_spaced(ctx(5), 1e-3, 10.0, 30).unwrap());
    let slow = RadialProfile::from_fn(g.clone(), DecayClass::PolynomialDecay { rate: 0.4 }, |s| {
        (1.0 + s).powf(-0.4)
    })
    .unwrap();
    assert!(matches!(slow.l2_squared(), Err(Error::Integrability(_))));
    assert!(slow.lp_integral(3.0).is_ok());
    assert!(matches!(slow.weighted_l2(1.2), Err(Error::Integrability(_))));
    let steps = RadialProfile::piecewise_constant(g.clone(), vec![1.0; 30]).unwrap();
    assert!(matches!(steps.energy_hyp(), Err(Error::NotSmooth(_))));
    assert!(rel(steps.l2_squared().unwrap().value, 10.0) < 1e-12);
    assert!(RadialProfile::from_parts(g.clone(), vec![1.0; 30], vec![0.0; 30], vec![0.0; 30], DecayClass::CompactSupport).is_err());
    assert!(RadialProfile::from_fn(g, DecayClass::ExponentialDecay { rate: -1.0 }, |s| s).is_err());
}

#[test]
fn json_round_trip() {
    let p = bump_profile(5, 20);
    let q = RadialProfile::from_json(&p.to_json()).unwrap();
    assert_eq!(p.values(), q.values());
    for s in [0.01, 0.3, 1.7] {
        assert!((p.sample(s).unwrap().d2 - q.sample(s).unwrap().d2).abs() < 1e-9);
    }
    // spline fallback when derivatives are omitted
    let mut doc = p.to_document();
    doc.d1 = None;
    doc.d2 = None;
    let r = RadialProfile::from_document(&doc).unwrap();
    assert!(rel(r.lp_integral(2.0).unwrap().value, p.lp_integral(2.0).unwrap().value) < 1e-4);
}

#[test]
fn talenti_reproduces_source() {
    let c = ctx(4);
    let w = 0.02;
    let src = SourceProfile::from_fn(c, move |s| 1.0 / (1.0 + ((s - 1.0) / w).exp()));
    let g = Arc::new(Grid::log_spaced(c, 1e-6, 4.0, 400).unwrap());
    let v = talenti_profile(&src, g).unwrap();
    for i in 1..=9 {
        let s = 0.1 * i as f64;
        assert!(rel(v.laplace_hyperbolic(s).unwrap(), src.f(s)) < 1e-4, "{s}");
    }
}

#[test]
fn talenti_of_exponential_is_positive_decreasing() {
    let c = ctx(5);
    let src = SourceProfile::from_fn(c, |s| (-s).exp());
    let g = Arc::new(Grid::log_spaced(c, 1e-6, 60.0, 300).unwrap());
    let v = talenti_profile(&src, g).unwrap();
    assert!(v.values().iter().all(|&x| x > 0.0));
    assert!(v.values().windows(2).all(|w| w[1] < w[0]));
    let zero = SourceProfile::from_fn(c, |_| 0.0);
    let g = Arc::new(Grid::log_spaced(c, 1e-6, 60.0, 50).unwrap());
    assert!(talenti_profile(&zero, g).unwrap().values().iter().all(|&x| x == 0.0));
}

#[test]
fn step_source_running_average() {
    let c = ctx(4);
    let src = SourceProfile::from_steps(c, vec![1.0, 3.0], vec![2.0, 1.0]).unwrap();
    assert_eq!(src.fbar(1.0).unwrap(), 2.0);
    assert_eq!(src.fbar(3.0).unwrap(), 4.0 / 3.0);
    assert_eq!(src.fbar(6.0).unwrap(), 4.0 / 6.0);
    assert_eq!(src.f_sided(1.0, Side::Left), 2.0);
    assert_eq!(src.f_sided(1.0, Side::Right), 1.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn scaling_is_quadratic(c in 0.1f64..10.0, n in 4u32..9) {
        let p = bump_profile(n, 20);
        let q = p.scaled(c);
        let (a, b) = (p.energy_hyp().unwrap().value, q.energy_hyp().unwrap().value);
        prop_assert!(rel(b, c * c * a) < 1e-12);
        let (a, b) = (p.weighted_l2(0.5).unwrap().value, q.weighted_l2(0.5).unwrap().value);
        prop_assert!(rel(b, c * c * a) < 1e-12);
    }

    #[test]
    fn running_integral_nondecreasing_for_nonnegative_steps(vals in prop::collection::vec(0.0f64..5.0, 1..12)) {
        let edges: Vec<f64> = (1..=vals.len()).map(|i| i as f64 * 0.7).collect();
        let src = SourceProfile::from_steps(ctx(5), edges, vals).unwrap();
        let mut last = 0.0;
        for i in 1..60 {
            let t = i as f64 * 0.2;
            let m = t * src.fbar(t).unwrap();
            prop_assert!(m >= last - 1e-12);
            last = m;
        }
    }
}
