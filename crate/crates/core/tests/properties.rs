use diamond_entropy::c64;
use diamond_entropy::discretization::{build_grid, QuadratureRule};
use diamond_entropy::kernel::{kernel_massless_closed, kernel_massive_bessel, kernel_quadrature, QuadratureSpec};
use diamond_entropy::renyi::{eta, RenyiOrder};
use diamond_entropy::schatten::{random_complex, singular_values};
use diamond_entropy::symbols::{limit_symbol, regularized_symbol, rescaled_symbol, PhysicalParams};
use faer::Mat;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn order() -> impl Strategy<Value = f64> {
    prop_oneof![Just(1.0), 0.2f64..8.0]
}

proptest! {
    #[test]
    fn eta_nonnegative_and_symmetric(kappa in order(), t in 0.0f64..=1.0) {
        let o = RenyiOrder::new(kappa).unwrap();
        let (a, b) = (eta(o, t), eta(o, 1.0 - t));
        prop_assert!(a >= 0.0);
        prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0), "{a} vs {b}");
    }

    #[test]
    fn eta_peaks_at_half(kappa in order(), t in 0.0f64..=1.0) {
        let o = RenyiOrder::new(kappa).unwrap();
        prop_assert!(eta(o, 0.5) >= eta(o, t) - 1e-14);
    }

    #[test]
    fn eta_continuous_across_von_neumann(t in 0.001f64..0.999, sign in prop_oneof![Just(1.0), Just(-1.0)]) {
        let near = RenyiOrder::new(1.0 + sign * 1e-6).unwrap();
        prop_assert!((eta(near, t) - eta(RenyiOrder::von_neumann(), t)).abs() < 1e-4);
    }

    #[test]
    fn eta_decreasing_in_order(t in 0.001f64..0.999, k1 in 0.2f64..5.0, dk in 0.01f64..3.0) {
        let lo = eta(RenyiOrder::new(k1).unwrap(), t);
        let hi = eta(RenyiOrder::new(k1 + dk).unwrap(), t);
        prop_assert!(hi <= lo + 1e-12);
    }

    #[test]
    fn regularized_symbol_spectrum(k in -1e3f64..1e3, m in 0.0f64..10.0, eps in 1e-3f64..2.0) {
        let p = PhysicalParams::new(m, eps, 1.0).unwrap();
        let s = regularized_symbol(&p, k);
        prop_assert!(s.hermiticity_defect() < 1e-15);
        let [lo, hi] = s.eigenvalues();
        prop_assert!(lo >= -1e-15);
        prop_assert!(hi <= (-eps * m).exp() + 1e-15);
    }

    #[test]
    fn massless_symbol_is_diagonal(k in prop_oneof![-1e3f64..-1e-9, 1e-9f64..1e3], eps in 1e-3f64..2.0) {
        let p = PhysicalParams::new(0.0, eps, 1.0).unwrap();
        let s = regularized_symbol(&p, k).entries;
        let d = (-eps * k.abs()).exp();
        let (d11, d22) = if k > 0.0 { (d, 0.0) } else { (0.0, d) };
        prop_assert_eq!(s.get(0, 1), c64::new(0.0, 0.0));
        prop_assert_eq!(s.get(1, 0), c64::new(0.0, 0.0));
        prop_assert!((s.get(0, 0).re - d11).abs() < 1e-15 && (s.get(1, 1).re - d22).abs() < 1e-15);
    }

    #[test]
    fn massless_rescaling_hits_the_limit(alpha in 3.0f64..1e6, xi in prop_oneof![-50.0f64..-1e-6, 1e-6f64..50.0]) {
        let a = rescaled_symbol(alpha, 0.0, xi).unwrap().entries;
        prop_assert!((a - limit_symbol(xi).entries).max_abs() < 1e-15);
    }

    #[test]
    fn kernel_hermitian_pair(m in 0.0f64..5.0, eps in 0.01f64..1.0, u in 0.0f64..5.0) {
        let p = PhysicalParams::new(m, eps, 1.0).unwrap();
        let eval = |u: f64| if m == 0.0 { kernel_massless_closed(eps, u) } else { kernel_massive_bessel(&p, u) };
        let (plus, minus) = (eval(u).unwrap().matrix, eval(-u).unwrap().matrix);
        prop_assert!((plus - minus.adjoint()).max_abs() <= 1e-14 * plus.max_abs().max(1.0));
    }

    #[test]
    fn massless_kernel_scaling(eps in 0.01f64..1.0, u in -5.0f64..5.0, s in 0.1f64..10.0) {
        let a = kernel_massless_closed(eps, u).unwrap().matrix;
        let b = kernel_massless_closed(eps / s, u / s).unwrap().matrix.scale(1.0 / s);
        prop_assert!((a - b).max_abs() <= 1e-13 * a.max_abs());
    }

    #[test]
    fn grid_covers_interval(n in 2usize..300, lambda in 0.01f64..10.0, mid in any::<bool>()) {
        let rule = if mid { QuadratureRule::Midpoint } else { QuadratureRule::GaussLegendre };
        let g = build_grid(n, lambda, rule).unwrap();
        prop_assert_eq!(g.len(), n);
        prop_assert!(g.nodes.iter().all(|&x| x > 0.0 && x < lambda));
        prop_assert!(g.nodes.windows(2).all(|w| w[0] < w[1]));
        let total: f64 = g.weights.iter().sum();
        prop_assert!((total / lambda - 1.0).abs() < 1e-12);
        prop_assert!(g.is_mirror_symmetric());
    }

    #[test]
    fn singular_values_unitarily_invariant(seed in any::<u64>(), dim in 2usize..12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_complex(&mut rng, dim, dim);
        let u = random_complex(&mut rng, dim, dim).qr().compute_Q();
        let v = random_complex(&mut rng, dim, dim).qr().compute_Q();
        let b: Mat<c64> = &(&u * &a) * &v;
        let (sa, sb) = (singular_values(a.as_ref()).unwrap(), singular_values(b.as_ref()).unwrap());
        for (x, y) in sa.values.iter().zip(&sb.values) {
            prop_assert!((x - y).abs() < 1e-10 * sa.values[0].max(1.0));
        }
    }

    #[test]
    fn schatten_norm_monotone_in_p(seed in any::<u64>(), dim in 2usize..12, p1 in 0.1f64..4.0, dp in 0.01f64..4.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = singular_values(random_complex(&mut rng, dim, dim).as_ref()).unwrap();
        let (n1, n2, ninf) = (s.norm(p1), s.norm(p1 + dp), s.norm(f64::INFINITY));
        prop_assert!(n2 <= n1 + 1e-10 * n1);
        prop_assert!(ninf <= n2 + 1e-10 * n2);
    }

    #[test]
    fn individual_singular_value_bound(seed in any::<u64>(), dim in 2usize..12, p in prop_oneof![Just(0.5), Just(1.0), Just(2.0)]) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = singular_values(random_complex(&mut rng, dim, dim).as_ref()).unwrap();
        let norm = s.norm(p);
        for k in 1..=dim {
            prop_assert!(s.s(k) <= (k as f64).powf(-1.0 / p) * norm + 1e-10 * norm);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn quadrature_kernel_matches_fast_paths(m in prop_oneof![Just(0.0), 0.1f64..3.0], eps in 0.05f64..1.0, u in -3.0f64..3.0) {
        let p = PhysicalParams::new(m, eps, 1.0).unwrap();
        let spec = QuadratureSpec::for_params(&p, 1e-12).unwrap();
        let slow = kernel_quadrature(&p, u, &spec).unwrap().matrix;
        let fast = if m == 0.0 { kernel_massless_closed(eps, u) } else { kernel_massive_bessel(&p, u) }.unwrap().matrix;
        prop_assert!((slow - fast).max_abs() < 1e-9, "{:e}", (slow - fast).max_abs());
    }
}
