use std::sync::Arc;

use acgm_core::bench::image::{pgm_decode, pgm_encode};
use acgm_core::bench::*;
use acgm_core::operator::{Diagonal, Identity, LinearOperator};
use acgm_core::problem::CompositeProblem;
use acgm_core::vector;

fn adjoint_gap(op: &dyn LinearOperator, rng: &mut SplitMix64) -> f64 {
    let u = rng.gaussian_vec(op.input_dim());
    let w = rng.gaussian_vec(op.output_dim());
    let lhs = vector::dot(&op.apply(&u), &w);
    let rhs = vector::dot(&u, &op.adjoint(&w));
    (lhs - rhs).abs() / (vector::norm(&u) * vector::norm(&w))
}

#[test]
fn adjoints_are_consistent() {
    let mut rng = SplitMix64::new(1);
    let ops: Vec<Arc<dyn LinearOperator>> = vec![
        Arc::new(GaussianBlur::standard(16, 24).unwrap()),
        Arc::new(GaussianBlur::standard(5, 3).unwrap()),
        Arc::new(Haar2d::new(16, 24, 3).unwrap()),
        Arc::new(DiscreteGradient::new(7, 11).unwrap()),
    ];
    for (i, op) in ops.iter().enumerate() {
        for _ in 0..20 {
            assert!(adjoint_gap(op.as_ref(), &mut rng) <= 1e-10, "operator {i}");
        }
    }
    let deblur = deblurring_instance(16, 2, DEBLUR_LAMBDA).unwrap();
    let mut rng2 = SplitMix64::new(2);
    for _ in 0..20 {
        let x = rng2.gaussian_vec(256);
        let y = rng2.gaussian_vec(256);
        // ⟨∇f(x) − ∇f(0), y⟩ = 2⟨A*Ax, y⟩ is symmetric in x and y
        let g0 = deblur.problem.grad(&vec![0.0; 256]).unwrap();
        let gx = vector::sub(&deblur.problem.grad(&x).unwrap(), &g0);
        let gy = vector::sub(&deblur.problem.grad(&y).unwrap(), &g0);
        let (a, b) = (vector::dot(&gx, &y), vector::dot(&gy, &x));
        assert!((a - b).abs() <= 1e-10 * vector::norm(&x) * vector::norm(&y));
    }
}

#[test]
fn haar_is_orthonormal() {
    let h = Haar2d::new(32, 16, 3).unwrap();
    let mut rng = SplitMix64::new(5);
    for _ in 0..10 {
        let u = rng.gaussian_vec(512);
        let back = h.analysis(&h.synthesis(&u));
        assert!(vector::max_abs(&vector::sub(&back, &u)) <= 1e-12);
        assert!((vector::norm(&h.synthesis(&u)) - vector::norm(&u)).abs() <= 1e-12 * vector::norm(&u));
    }
    assert!(Haar2d::new(12, 16, 3).is_err());
}

#[test]
fn haar_of_a_constant_has_one_coefficient() {
    let h = Haar2d::new(8, 8, 3).unwrap();
    let c = h.analysis(&[0.75; 64]);
    assert!((c[0] - 8.0 * 0.75).abs() <= 1e-12);
    assert!(c[1..].iter().all(|v| v.abs() <= 1e-12));
}

#[test]
fn blur_preserves_constants_and_is_nonexpansive() {
    let b = GaussianBlur::standard(20, 13).unwrap();
    let out = b.apply(&[0.4; 260]);
    assert!(out.iter().all(|v| (v - 0.4).abs() <= 1e-14));
    let est = estimate_operator_norm_sq(&b, 1e-10, 5000, 9).unwrap();
    assert!(est.value <= 1.0 + 1e-6, "{}", est.value);
    assert!(GaussianBlur::new(8, 8, 4.0, 8).is_err());
    assert!(GaussianBlur::new(8, 8, 0.0, 9).is_err());
}

#[test]
fn gradient_of_a_constant_vanishes() {
    let d = DiscreteGradient::new(6, 9).unwrap();
    assert!(d.apply(&[2.5; 54]).iter().all(|v| *v == 0.0));
    let est = estimate_operator_norm_sq(&d, 1e-9, 3000, 1).unwrap();
    assert!(est.value <= 8.0 + 1e-6);
    let big = estimate_operator_norm_sq(&DiscreteGradient::new(64, 64).unwrap(), 1e-9, 2000, 1).unwrap();
    assert!(big.value <= 8.0 + 1e-6);
}

#[test]
fn power_iteration_examples() {
    let id = estimate_operator_norm_sq(&Identity(5), 1e-12, 100, 3).unwrap();
    assert!((id.value - 1.0).abs() <= 1e-12 && id.converged);
    let d = estimate_operator_norm_sq(&Diagonal::new(vec![1.0, 2.0, 3.0]), 1e-14, 1000, 3).unwrap();
    assert!((d.value - 9.0).abs() <= 1e-9, "{}", d.value);
    let capped = estimate_operator_norm_sq(&Diagonal::new(vec![1.0, 0.999, 0.998]), 1e-15, 2, 3).unwrap();
    assert!(!capped.converged);
    assert!(estimate_operator_norm_sq(&Identity(3), 0.0, 10, 1).is_err());
}

#[test]
fn pgm_examples() {
    let img = pgm_decode(b"P2\n# tiny\n2 2\n255\n0 255\n128 64\n").unwrap();
    assert_eq!((img.n1, img.n2), (2, 2));
    assert_eq!(img.pixels, vec![0.0, 1.0, 128.0 / 255.0, 64.0 / 255.0]);

    let wide = pgm_decode(&[b"P5 1 2 65535\n".as_slice(), &[0xFF, 0xFF, 0x80, 0x00]].concat()).unwrap();
    assert_eq!(wide.pixels, vec![1.0, 32768.0 / 65535.0]);

    assert!(pgm_decode(b"P5 2 2 255\n\x00\x01\x02").is_err());
    assert!(pgm_decode(b"P2 2 2 255\n1 2 3").is_err());
    assert!(pgm_decode(b"P6 1 1 255\n\x00\x00\x00").is_err());
    assert!(pgm_decode(b"P2 1 1 70000\n5").is_err());
}

#[test]
fn pgm_round_trip_within_quantization() {
    let img = synth_test_image(16, 24, 4).unwrap();
    let dir = std::env::temp_dir().join(format!("acgm-bench-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("img.pgm");
    pgm_write(&img, &path).unwrap();
    let back = pgm_read(&path).unwrap();
    std::fs::remove_dir_all(&dir).unwrap();
    assert_eq!((back.n1, back.n2), (16, 24));
    let err = vector::max_abs(&vector::sub(&back.pixels, &img.pixels));
    assert!(err <= 0.5 / 255.0 + 1e-15, "{err}");
    assert_eq!(pgm_decode(&pgm_encode(&back)).unwrap(), back);
}

#[test]
fn noise_statistics_and_determinism() {
    let flat = ImageGray::filled(1000, 1000, 0.0).unwrap();
    let noisy = add_gaussian_noise(&flat, 0.1, 77).unwrap();
    let n = noisy.len() as f64;
    let mean = noisy.pixels.iter().sum::<f64>() / n;
    let std = (noisy.pixels.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / n).sqrt();
    assert!((std - 0.1).abs() <= 0.001, "{std}");
    assert!(mean.abs() <= 0.001);
    assert_eq!(add_gaussian_noise(&flat, 0.1, 77).unwrap(), noisy);
    assert_ne!(add_gaussian_noise(&flat, 0.1, 78).unwrap(), noisy);
    assert_eq!(add_gaussian_noise(&noisy, 0.0, 1).unwrap(), noisy);
    assert!(add_gaussian_noise(&flat, -1.0, 1).is_err());
}

#[test]
fn synthetic_image_properties() {
    let a = synth_test_image(32, 40, 6).unwrap();
    assert_eq!(a, synth_test_image(32, 40, 6).unwrap());
    let (lo, hi) = a.pixels.iter().fold((f64::MAX, f64::MIN), |(l, h), &p| (l.min(p), h.max(p)));
    assert!(lo >= 0.0 && hi <= 1.0 && hi - lo >= 0.5);
}

#[test]
fn dual_field_feasibility() {
    let f = DualField::new(1, 2, vec![0.3, 0.4, 0.0, 0.1]).unwrap();
    assert!(f.is_feasible(0.25));
    assert!(!f.is_feasible(0.2));
}

// Central differences at step 1e-6·(1 + ‖x‖) along random unit directions.
fn check_gradient(p: &CompositeProblem, scale: f64, seed: u64) {
    let mut rng = SplitMix64::new(seed);
    let n = p.dim();
    for _ in 0..20 {
        let x: Vec<f64> = rng.gaussian_vec(n).iter().map(|v| scale * v).collect();
        let g = p.grad(&x).unwrap();
        let h = 1e-6 * (1.0 + vector::norm(&x));
        for _ in 0..10 {
            let mut d = rng.gaussian_vec(n);
            let nd = vector::norm(&d);
            d.iter_mut().for_each(|v| *v /= nd);
            let fd = (p.f(&vector::add_scaled(&x, h, &d)).unwrap() - p.f(&vector::add_scaled(&x, -h, &d)).unwrap())
                / (2.0 * h);
            let exact = vector::dot(&g, &d);
            let err = (fd - exact).abs() / exact.abs().max(vector::norm(&g)).max(1e-8);
            assert!(err <= 1e-5, "{err:e}");
        }
    }
}

#[test]
fn oracle_gradients_match_finite_differences() {
    check_gradient(&deblurring_instance(16, 3, DEBLUR_LAMBDA).unwrap().problem, 0.5, 1);
    check_gradient(&huber_rof_instance(16, 3).unwrap().problem, 0.2, 2);
    check_gradient(&lasso_synthetic(20, 30, 0.1, 3).unwrap().problem, 1.0, 3);
    check_gradient(&quadratic_l1_known(20, 3, 0.1, 4.0).unwrap().problem(true).unwrap(), 1.0, 4);
}

#[test]
fn zero_data_gives_zero_objective() {
    let zero = ImageGray::filled(16, 16, 0.0).unwrap();
    let d = build_deblurring_problem(&zero, DEBLUR_LAMBDA).unwrap();
    assert_eq!(d.problem.eval_objective(&[0.0; 256]).unwrap().to_f64(), 0.0);
    let h = build_huber_rof_dual_problem(&zero, HUBER_LAMBDA, HUBER_EPS).unwrap();
    assert_eq!(h.problem.eval_objective(&[0.0; 512]).unwrap().to_f64(), 0.0);
    assert!((h.problem.mu() - 0.01).abs() <= 1e-15);
    assert!(h.l_f() <= 8.0 + 1e-6);
}

#[test]
fn deblurring_lipschitz_constant_at_full_size() {
    let bp = deblurring_instance(256, 1, DEBLUR_LAMBDA).unwrap();
    assert!((bp.l_f() - 2.0).abs() <= 0.02, "{}", bp.l_f());
}
