//! Cross-module invariants exercised on realistic configurations: loop
//! closure of link products, cocycle composition, internal/external
//! coincidence, and the first-order gap between the two covariant momentum
//! forms.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use scalegauge_core::{
    canonical_momentum_apply, expectation_external, expectation_internal, expectation_unscaled,
    path_product, scale_factor, transfer_internal, Boundary, Lattice, LinkExponentField,
    MomentumForm, Observable, ThetaField, WavePacket,
};

fn random_theta(lattice: &Lattice, seed: u64, amp: f64) -> ThetaField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..lattice.site_count()).map(|_| rng.gen_range(-amp..amp)).collect();
    ThetaField::new(lattice.clone(), values).unwrap()
}

/// Random lattice walk of `steps` single-link moves starting at `start`.
fn random_walk(
    lattice: &Lattice,
    start: &[usize],
    steps: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<scalegauge_core::SiteId> {
    let mut path = vec![lattice.site(start).unwrap()];
    while path.len() <= steps {
        let here = path.last().unwrap();
        let axis = rng.gen_range(0..lattice.dims());
        let sign = if rng.gen_bool(0.5) { 1 } else { -1 };
        if let Some(next) = lattice.neighbor(here, axis, sign) {
            path.push(next);
        }
    }
    path
}

#[test]
fn gradient_link_products_close_around_loops() {
    let lattice = Lattice::new(vec![16, 16], 0.1, Boundary::Periodic).unwrap();
    let theta = random_theta(&lattice, 21, 0.4);
    let links = LinkExponentField::from_theta(&theta);
    assert!(links.is_gradient());
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for _ in 0..50 {
        let start: Vec<usize> = vec![rng.gen_range(0..16), rng.gen_range(0..16)];
        let mut path = random_walk(&lattice, &start, 40, &mut rng);
        // close the loop by retracing the walk
        let back: Vec<_> = path.iter().rev().skip(1).cloned().collect();
        path.extend(back);
        let product = path_product(&links, &path).unwrap();
        assert!((product - 1.0).abs() < 1e-10, "loop product {product} != 1");
    }
}

#[test]
fn path_product_is_path_independent_for_gradient_links() {
    let lattice = Lattice::new(vec![16, 16], 0.1, Boundary::Periodic).unwrap();
    let theta = random_theta(&lattice, 23, 0.4);
    let links = LinkExponentField::from_theta(&theta);
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    for _ in 0..50 {
        let start: Vec<usize> = vec![rng.gen_range(0..16), rng.gen_range(0..16)];
        let path = random_walk(&lattice, &start, 30, &mut rng);
        let y = path.first().unwrap();
        let x = path.last().unwrap();
        let along_path = path_product(&links, &path).unwrap();
        // the product from y to x accumulates theta(x) - theta(y) = r_{x,y}
        let direct = scale_factor(&theta, x, y).unwrap().value;
        let rel = (along_path - direct).abs() / direct.abs();
        assert!(rel < 1e-12, "path {along_path} vs direct {direct}");
    }
}

#[test]
fn curl_carrying_links_are_path_dependent() {
    // explicit link exponents with nonzero plaquette curl
    let lattice = Lattice::new(vec![8, 8], 1.0, Boundary::Periodic).unwrap();
    let n = lattice.site_count();
    let mut exponents = vec![0.0; n * 2];
    for i in 0..n {
        let site = lattice.site_at(i);
        // links along axis 0 depend on the transverse coordinate
        exponents[i * 2] = 0.1 * site.coords()[1] as f64;
    }
    let links = LinkExponentField::explicit(lattice.clone(), exponents).unwrap();
    assert!(!links.is_gradient());
    let a = lattice.site(&[0, 0]).unwrap();
    let b = lattice.site(&[1, 0]).unwrap();
    let c = lattice.site(&[1, 1]).unwrap();
    let d = lattice.site(&[0, 1]).unwrap();
    let loop_path = vec![a.clone(), b, c, d, a];
    let product = path_product(&links, &loop_path).unwrap();
    assert!((product - 1.0).abs() > 1e-3, "plaquette product {product} should not close");
}

#[test]
fn cocycle_composition_over_random_site_triples() {
    let lattice = Lattice::new(vec![12, 12, 4], 0.2, Boundary::Open).unwrap();
    let theta = random_theta(&lattice, 25, 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(26);
    let mut site = || {
        lattice
            .site(&[rng.gen_range(0..12), rng.gen_range(0..12), rng.gen_range(0..4)])
            .unwrap()
    };
    for _ in 0..50 {
        let y = site();
        let x = site();
        let z = site();
        let r_yx = scale_factor(&theta, &y, &x).unwrap().value;
        let r_xz = scale_factor(&theta, &x, &z).unwrap().value;
        let r_yz = scale_factor(&theta, &y, &z).unwrap().value;
        assert!((r_yx * r_xz - r_yz).abs() / r_yz.abs() < 1e-12);
        // inverse pair
        let r_zy = scale_factor(&theta, &z, &y).unwrap().value;
        assert!((r_yz * r_zy - 1.0).abs() < 1e-12);
    }
}

#[test]
fn internal_transfer_agrees_with_direct_over_many_targets() {
    let lattice = Lattice::new(vec![200], 0.1, Boundary::Periodic).unwrap();
    let theta = random_theta(&lattice, 27, 0.3);
    let psi = WavePacket::gaussian(lattice.clone(), &[10.0], 1.2).unwrap();
    let obs = Observable::position(&lattice);
    let x = lattice.site(&[0]).unwrap();
    let at_x = expectation_internal(&psi, &obs, &x, &theta).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(28);
    for _ in 0..20 {
        let z = lattice.site(&[rng.gen_range(0..200)]).unwrap();
        let moved = transfer_internal(&at_x, &z, &theta).unwrap();
        let direct = expectation_internal(&psi, &obs, &z, &theta).unwrap();
        let rel = (moved.value - direct.value).norm() / direct.value.norm();
        assert!(rel < 1e-12, "transfer mismatch {rel}");
    }
}

#[test]
fn three_expectation_modes_coincide_when_theta_constant() {
    let lattice = Lattice::new(vec![128], 0.1, Boundary::Periodic).unwrap();
    let flat = ThetaField::constant(lattice.clone(), -1.3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    let amps: Vec<Complex64> = (0..128)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let psi = WavePacket::normalized(lattice.clone(), amps).unwrap();
    let y = lattice.site(&[100]).unwrap();
    let x = lattice.site(&[17]).unwrap();
    for obs in [
        Observable::position(&lattice),
        Observable::momentum(&lattice, 1.0).unwrap(),
    ] {
        let unscaled = expectation_unscaled(&psi, &obs, &x).unwrap().value;
        let external = expectation_external(&psi, &obs, &y, &x, &flat).unwrap().value;
        let internal = expectation_internal(&psi, &obs, &x, &flat).unwrap().value;
        assert!((external - unscaled).norm() <= 1e-12);
        assert!((internal - unscaled).norm() <= 1e-12);
    }
}

#[test]
fn momentum_forms_differ_at_first_order_in_spacing() {
    // the gap between the exact-factor and expanded forms scales like the
    // spacing; quadratic convergence would make the ratio ~4 per halving
    let length = 25.6;
    let mut gaps = Vec::new();
    for &n in &[256usize, 512, 1024] {
        let h = length / n as f64;
        let lattice = Lattice::new(vec![n], h, Boundary::Periodic).unwrap();
        let values: Vec<f64> = (0..n)
            .map(|i| 0.25 * (4.0 * std::f64::consts::PI * i as f64 / n as f64).cos())
            .collect();
        let theta = ThetaField::new(lattice.clone(), values).unwrap();
        let psi = WavePacket::gaussian(lattice.clone(), &[12.8], 1.0).unwrap();
        let disc = canonical_momentum_apply(&psi, 0, &theta, 1.0, MomentumForm::Discrete).unwrap();
        let expa = canonical_momentum_apply(&psi, 0, &theta, 1.0, MomentumForm::Expanded).unwrap();
        let gap = disc
            .values
            .iter()
            .zip(&expa.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0f64, f64::max);
        gaps.push(gap);
    }
    for w in gaps.windows(2) {
        let ratio = w[0] / w[1];
        assert!((1.5..=2.5).contains(&ratio), "halving ratio {ratio}, gaps {gaps:?}");
    }
}
