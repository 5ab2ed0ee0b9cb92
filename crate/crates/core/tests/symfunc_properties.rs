use dsflow_core::symfunc::{
    b_nk, gamma_cone_test, identity_suite, maclaurin_gap, sigma, sigma_grad, sigma_minor,
    sym_derivatives,
};
use proptest::prelude::*;

/// `(lambda, k)` with `lambda` strictly inside `Gamma_k`, `n` in `3..=6`.
fn cone_sample() -> impl Strategy<Value = (Vec<f64>, usize)> {
    (3usize..=6)
        .prop_flat_map(|n| (prop::collection::vec(-0.6f64..2.0, n), 2..=n))
        .prop_filter("outside Gamma_k", |(l, k)| gamma_cone_test(l, *k, true))
}

/// As `cone_sample`, with `k < n`.
fn cone_sample_below_n() -> impl Strategy<Value = (Vec<f64>, usize)> {
    (3usize..=6)
        .prop_flat_map(|n| (prop::collection::vec(-0.6f64..2.0, n), 2..n))
        .prop_filter("outside Gamma_k", |(l, k)| gamma_cone_test(l, *k, true))
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

fn five_point(f: impl Fn(&[f64]) -> f64, x: &[f64], i: usize, step: f64) -> f64 {
    let at = |s: f64| {
        let mut p = x.to_vec();
        p[i] += s;
        f(&p)
    };
    (8.0 * (at(step) - at(-step)) - (at(2.0 * step) - at(-2.0 * step))) / (12.0 * step)
}

fn central_difference(f: impl Fn(&[f64]) -> f64, x: &[f64], i: usize, step: f64) -> f64 {
    let (mut p, mut m) = (x.to_vec(), x.to_vec());
    p[i] += step;
    m[i] -= step;
    (f(&p) - f(&m)) / (2.0 * step)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn expansion_along_any_entry((l, k, i) in (2usize..=7).prop_flat_map(|n| (prop::collection::vec(-3.0f64..3.0, n), 1..n, 0..n))) {
        let whole = sigma(&l, k).unwrap();
        let split = sigma_minor(&l, k, i).unwrap() + l[i] * sigma_minor(&l, k - 1, i).unwrap();
        let scale: f64 = l.iter().map(|x| x.abs()).fold(1.0, f64::max).powi(k as i32);
        prop_assert!((whole - split).abs() <= 1e-13 * scale);
    }

    #[test]
    fn minors_are_ordered_on_the_cone((l, k) in cone_sample()) {
        let mut sorted = l.clone();
        sorted.sort_by(|a, b| b.total_cmp(a));
        let minors: Vec<f64> = (0..sorted.len())
            .map(|i| sigma_minor(&sorted, k - 1, i).unwrap())
            .collect();
        prop_assert!(minors[0] > 0.0);
        for w in minors.windows(2) {
            prop_assert!(w[1] >= w[0] - 1e-12 * w[0].abs().max(1.0));
        }
    }

    #[test]
    fn concavity_inequalities((l, k) in cone_sample()) {
        let n = l.len();
        let d = sym_derivatives(&l, k).unwrap();
        let b = b_nk(n, k);
        let sum_f: f64 = d.power_grad.iter().sum();
        prop_assert!(sum_f >= b * (1.0 - 1e-12));
        let sum_f_k2: f64 = d.power_grad.iter().zip(&l).map(|(f, x)| f * x * x).sum();
        prop_assert!(sum_f_k2 >= d.power_value.powi(2) / b * (1.0 - 1e-12));
        // Euler relations for the homogeneous functions sigma_k and F
        let euler: f64 = d.grad.iter().zip(&l).map(|(g, x)| g * x).sum();
        prop_assert!(rel(euler, k as f64 * d.value) < 1e-12);
        let euler_f: f64 = d.power_grad.iter().zip(&l).map(|(g, x)| g * x).sum();
        prop_assert!(rel(euler_f, d.power_value) < 1e-12);
    }

    #[test]
    fn gradients_match_central_differences((l, k) in cone_sample()) {
        let d = sym_derivatives(&l, k).unwrap();
        // F is sharply curved near the cone boundary; shrink its step there
        let gmax = d.grad.iter().fold(0.0f64, |a, g| a.max(g.abs()));
        let f_step = 1e-3f64.min(1e-2 * d.value / gmax);
        for i in 0..l.len() {
            let fd = central_difference(|x| sigma(x, k).unwrap(), &l, i, 1e-5);
            prop_assert!(rel(fd, d.grad[i]) < 1e-6, "sigma grad {i}: {fd} vs {}", d.grad[i]);
            let fd_f = five_point(|x| sigma(x, k).unwrap().powf(1.0 / k as f64), &l, i, f_step);
            prop_assert!(rel(fd_f, d.power_grad[i]) < 1e-6, "F grad {i}: {fd_f} vs {}", d.power_grad[i]);
        }
        prop_assert_eq!(&sigma_grad(&l, k).unwrap(), &d.grad);
    }

    #[test]
    fn identities_hold((l, k) in cone_sample_below_n()) {
        let r = identity_suite(&l, k).unwrap();
        let scale: f64 = l.iter().map(|x| x.abs()).fold(1.0, f64::max).powi(k as i32 + 1);
        prop_assert!(r.max() <= 1e-12 * scale, "{r:?}");
    }

    #[test]
    fn maclaurin_chain((l, k) in cone_sample()) {
        for j in 1..k {
            prop_assert!(maclaurin_gap(&l, k, j).unwrap() <= 1e-12);
        }
        // sigma_1 / n >= F / b_{n,k}
        let n = l.len();
        let f = sigma(&l, k).unwrap().powf(1.0 / k as f64);
        prop_assert!(sigma(&l, 1).unwrap() / n as f64 >= f / b_nk(n, k) - 1e-12);
    }

    #[test]
    fn values_are_permutation_invariant(l in prop::collection::vec(-2.0f64..2.0, 2..=6), seed in 0u64..1000) {
        let mut p = l.clone();
        let len = p.len();
        p.rotate_left((seed as usize) % len);
        p.swap(0, len - 1);
        for k in 0..=len {
            prop_assert!(rel(sigma(&l, k).unwrap(), sigma(&p, k).unwrap()) < 1e-13);
        }
    }

    #[test]
    fn umbilic_points_are_in_every_cone(c in 0.01f64..5.0, n in 2usize..=8) {
        let l = vec![c; n];
        for k in 1..=n {
            prop_assert!(gamma_cone_test(&l, k, true));
            let d = sym_derivatives(&l, k).unwrap();
            prop_assert!(rel(d.power_grad.iter().sum::<f64>(), b_nk(n, k)) < 1e-12);
        }
        for j in 1..n {
            prop_assert!(maclaurin_gap(&l, n, j).unwrap().abs() < 1e-12 * c.max(1.0));
        }
    }
}
