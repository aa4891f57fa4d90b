use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use phase_ovm::fock::{momentum, momentum_ket, momentum_residual, parity, position, rotation};
use phase_ovm::quasiprob::{parity_s_weights, quasiprob_mass};
use phase_ovm::regions1d::{build_region_operator_1d, rotate_operator, shift_operator};
use phase_ovm::regions2d::region_ovm_oracle;
use phase_ovm::special::{laguerre, GaussLegendre};
use phase_ovm::{
    CharacteristicFunction1D, FockOperator, KrausMap, PhaseGrid, QuantumState, Region2D, RegionDescriptor, ShiftMode,
    WignerConvention,
};

fn cases(n: u32) -> ProptestConfig {
    ProptestConfig {
        cases: n,
        ..ProptestConfig::default()
    }
}

fn random_operator(dim: usize, seed: u64) -> FockOperator<f64> {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = nalgebra::DMatrix::from_fn(dim, dim, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    FockOperator::new(m).unwrap()
}

fn random_map(dim: usize, count: usize, seed: u64) -> KrausMap<f64> {
    let gens = (0..count).map(|k| random_operator(dim, seed * 31 + k as u64)).collect();
    KrausMap::new(gens, "random").unwrap()
}

fn max_diff(a: &FockOperator<f64>, b: &FockOperator<f64>) -> f64 {
    a.max_abs_diff_block(b, a.dim())
}

proptest! {
    #![proptest_config(cases(24))]

    #[test]
    fn map_is_linear(seed in 0u64..10_000, c in -2.0f64..2.0, d in -2.0f64..2.0) {
        let dim = 6;
        let map = random_map(dim, 3, seed);
        let x = random_operator(dim, seed + 1);
        let y = random_operator(dim, seed + 2);
        let (cc, dc) = (Complex64::new(c, 0.3), Complex64::new(d, -0.7));
        let lhs = map.apply(&(&x.scale(cc) + &y.scale(dc))).unwrap();
        let rhs = &map.apply(&x).unwrap().scale(cc) + &map.apply(&y).unwrap().scale(dc);
        prop_assert!(max_diff(&lhs, &rhs) <= 1e-12);
    }

    #[test]
    fn dual_satisfies_trace_duality(seed in 0u64..10_000) {
        let dim = 6;
        let map = random_map(dim, 2, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = QuantumState::<f64>::random_mixed(dim, dim, 2, &mut rng).unwrap().density();
        let x = random_operator(dim, seed + 7);
        let lhs = (rho.matrix() * map.apply(&x).unwrap().matrix()).trace();
        let rhs = (map.dual().apply(&rho).unwrap().matrix() * x.matrix()).trace();
        prop_assert!((lhs - rhs).norm() <= 1e-12 * lhs.norm().max(1.0));
    }

    #[test]
    fn dual_of_dual_is_the_map(seed in 0u64..10_000) {
        let map = random_map(5, 2, seed);
        let back = map.dual().dual();
        for (g, h) in map.generators().iter().zip(back.generators()) {
            prop_assert_eq!(g, h);
        }
    }

    #[test]
    fn symmetric_intervals_give_hermitian_parity_commuting_operators(a in 0.2f64..2.0) {
        let region = CharacteristicFunction1D::interval(-a, a).unwrap();
        let k = build_region_operator_1d::<f64>(&region, 32).unwrap();
        prop_assert!(k.is_hermitian(1e-10));
        prop_assert!(k.parity_commutator() <= 1e-10);
    }

    #[test]
    fn symmetric_fourier_regions_are_hermitian(a0 in 0.0f64..2.0, a1 in 0.0f64..1.0, a2 in 0.0f64..1.0) {
        let region = CharacteristicFunction1D::fourier(a0, vec![a1, a2], vec![0.0, 0.0], 4.0).unwrap();
        let k = build_region_operator_1d::<f64>(&region, 48).unwrap();
        prop_assert!(k.is_hermitian(1e-10));
    }

    #[test]
    fn rotation_preserves_spectrum(a in 0.3f64..1.5, theta in -3.2f64..3.2) {
        let region = CharacteristicFunction1D::interval(-a, a).unwrap();
        let k = build_region_operator_1d::<f64>(&region, 24).unwrap();
        let r = rotate_operator(&k, theta);
        let before = k.op.hermitian_eigenvalues();
        let after = r.op.hermitian_eigenvalues();
        let dev = before.iter().zip(&after).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        prop_assert!(dev <= 1e-10);
    }

    #[test]
    fn rotation_group_law(t1 in -3.0f64..3.0, t2 in -3.0f64..3.0) {
        let lhs = &rotation::<f64>(t1, 16) * &rotation::<f64>(t2, 16);
        prop_assert!(max_diff(&lhs, &rotation::<f64>(t1 + t2, 16)) <= 1e-13);
    }

    #[test]
    fn conjugate_shift_is_invertible(c in -1.0f64..1.0) {
        let region = CharacteristicFunction1D::interval(-1.0, 1.0).unwrap();
        let k = build_region_operator_1d::<f64>(&region, 24).unwrap();
        let back = shift_operator(&shift_operator(&k, c, ShiftMode::Conjugate), -c, ShiftMode::Conjugate);
        prop_assert!(max_diff(&back.op, &k.op) <= 1e-10);
    }

    #[test]
    fn descriptors_round_trip_through_json(lo in -3.0f64..0.0, width in 0.1f64..3.0, r in 0.1f64..2.0) {
        let regions = [
            RegionDescriptor::line(CharacteristicFunction1D::interval(lo, lo + width).unwrap()),
            RegionDescriptor::line(CharacteristicFunction1D::fourier(lo.abs(), vec![width], vec![0.0], r).unwrap()),
            RegionDescriptor::plane(Region2D::Disk { radius: r }),
            RegionDescriptor::plane(Region2D::Rectangle { q0: lo, q1: lo + width, p0: -r, p1: r }),
        ];
        for d in regions {
            prop_assert_eq!(RegionDescriptor::from_json(&d.to_json()).unwrap(), d);
        }
    }

    #[test]
    fn s_parity_weights_follow_the_ratio(s in -3.0f64..0.9) {
        let w = parity_s_weights(s, 12).unwrap();
        let ratio = -(1.0 + s) / (1.0 - s);
        prop_assert!((w[0] - 1.0 / (1.0 - s)).abs() <= 1e-14 * w[0].abs());
        for n in 1..w.len() {
            prop_assert!((w[n] - w[n - 1] * ratio).abs() <= 1e-13 * w[0].abs());
        }
    }

    #[test]
    fn laguerre_satisfies_its_ode(n in 0usize..30, x in 0.0f64..8.0) {
        // x L'' + (1 - x) L' + n L = 0, derivatives by central differences.
        let h = 1e-3;
        let l = |t: f64| laguerre::<f64>(n, t);
        let d1 = (l(x + h) - l(x - h)) / (2.0 * h);
        let d2 = (l(x + h) - 2.0 * l(x) + l(x - h)) / (h * h);
        let scale = l(x).abs().max(d1.abs()).max(1.0) * (n as f64 + 1.0);
        prop_assert!((x * d2 + (1.0 - x) * d1 + n as f64 * l(x)).abs() <= 1e-4 * scale * (1.0 + x));
    }

    #[test]
    fn gauss_legendre_integrates_exponentials(n in 12usize..40, a in -2.0f64..0.0, b in 0.1f64..2.0) {
        let gl = GaussLegendre::<f64>::new(n).unwrap();
        let got = gl.integrate(a, b, f64::exp);
        prop_assert!((got - (b.exp() - a.exp())).abs() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(cases(6))]

    #[test]
    fn oracle_is_additive_over_disjoint_indicators(seed in 0u64..1000) {
        use rand::Rng;
        let dim = 8;
        let grid = PhaseGrid::square(3.0, 32).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let labels: Vec<u8> = (0..grid.len()).map(|_| rng.random_range(0..3)).collect();
        let mask = |k: u8| Region2D::Indicator { grid, mask: labels.iter().map(|&l| l == k).collect() };
        let union = Region2D::Indicator { grid, mask: labels.iter().map(|&l| l != 2).collect() };
        let k0 = region_ovm_oracle::<f64>(&mask(0), dim, &grid).unwrap();
        let k1 = region_ovm_oracle::<f64>(&mask(1), dim, &grid).unwrap();
        let ku = region_ovm_oracle::<f64>(&union, dim, &grid).unwrap();
        prop_assert!(max_diff(&(&k0.op + &k1.op), &ku.op) <= 1e-12);

        let st = QuantumState::<f64>::coherent(Complex64::new(0.3, -0.2), dim).unwrap();
        let m = |r: &Region2D| quasiprob_mass(&st, r, &grid, -0.5, WignerConvention::Bare).unwrap();
        prop_assert!((m(&mask(0)) + m(&mask(1)) - m(&union)).abs() <= 1e-12);
    }
}

#[test]
fn parity_anticommutes_with_quadratures() {
    let dim = 20;
    let pi = parity::<f64>(dim);
    for x in [position::<f64>(dim), momentum::<f64>(dim)] {
        let conj = x.conjugate_by(&pi);
        assert_eq!(max_diff(&conj, &x.scale(Complex64::new(-1.0, 0.0))), 0.0);
    }
    assert_eq!(&pi * &pi, FockOperator::identity(dim));
}

#[test]
fn momentum_ket_residual_does_not_grow_with_dim() {
    // Central block; the last row carries an O(1) truncation residual at every dim.
    for p in [0.0, 0.5, 1.0, 2.0] {
        let mut prev = f64::INFINITY;
        for dim in [16, 32, 64, 128] {
            let v = momentum_ket::<f64>(p, dim);
            let r = momentum_residual(p, &v, dim / 2);
            assert!(r <= 1e-13 && r <= prev.max(1e-14), "p={p} dim={dim}: {r} after {prev}");
            prev = r;
        }
    }
}
