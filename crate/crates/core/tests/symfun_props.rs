use laguerre_core::numeric::vandermonde;
use laguerre_core::symfun::{
    enumerate_partitions, hyp_matrix_series, hyp_matrix_series_two, schur, schur_bialternant, schur_jacobi_trudi, zonal, Partition,
    SeriesOptions,
};
use proptest::prelude::*;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn partition(max_len: usize, max_weight: u32) -> impl Strategy<Value = Partition> {
    (0..=max_weight).prop_flat_map(move |k| {
        let all = enumerate_partitions(k, max_len);
        (0..all.len()).prop_map(move |i| all[i].clone())
    })
}

fn distinct(x: &[f64]) -> bool {
    x.iter().enumerate().all(|(i, a)| x[i + 1..].iter().all(|b| (a - b).abs() > 0.05))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn schur_is_symmetric(tau in partition(4, 6), x in prop::collection::vec(0.1f64..2.0, 4), perm in Just((0..4).collect::<Vec<usize>>()).prop_shuffle()) {
        let y: Vec<f64> = perm.iter().map(|&i| x[i]).collect();
        let (a, b) = (schur(&tau, &x), schur(&tau, &y));
        prop_assert!(rel(a, b) < 1e-12, "{a} vs {b}");
    }

    #[test]
    fn schur_is_homogeneous(tau in partition(3, 6), x in prop::collection::vec(0.1f64..2.0, 3), c in 0.2f64..3.0) {
        let cx: Vec<f64> = x.iter().map(|v| c * v).collect();
        let expect = c.powi(tau.weight() as i32) * schur(&tau, &x);
        prop_assert!(rel(schur(&tau, &cx), expect) < 1e-12);
    }

    #[test]
    fn zonal_sums_to_trace_power(m in 1usize..=3, k in 0u32..=6, seed in prop::collection::vec(0.0f64..2.0, 3)) {
        let x = &seed[..m];
        let tr: f64 = x.iter().sum();
        let s: f64 = enumerate_partitions(k, m).iter().map(|t| zonal(t, x).unwrap()).sum();
        prop_assert!(rel(s, tr.powi(k as i32)) < 1e-10 || tr == 0.0);
    }

    #[test]
    fn bialternant_matches_jacobi_trudi(tau in partition(4, 6), x in prop::collection::vec(0.1f64..2.0, 4)) {
        prop_assume!(distinct(&x));
        let (a, b) = (schur_bialternant(&tau, &x), schur_jacobi_trudi(&tau, &x));
        prop_assert!(rel(a, b) < 1e-10, "{a} vs {b}");
    }

    #[test]
    fn two_argument_series_with_identity(b in prop::collection::vec(0.0f64..0.8, 2), a in 0.2f64..2.0, c in 1.5f64..4.0) {
        let opts = SeriesOptions { tol: 1e-15, max_weight: 80 };
        let one = hyp_matrix_series(&[a], &[c], &b, opts).unwrap().value;
        let two = hyp_matrix_series_two(&[a], &[c], &b, &[1.0, 1.0], opts).unwrap().value;
        prop_assert!(rel(two, one) < 1e-10);
    }
}

/// `det(e^{b_i c_j}) / (V(b) V(c)) = Σ_τ s_τ(b) s_τ(c) / Π_i (τ_i + m - i)!` for `m = 2`.
#[test]
fn hua_identity_with_exponential() {
    let fact = |n: u32| (1..=n).map(f64::from).product::<f64>();
    let cases: [([f64; 2], [f64; 2]); 3] = [([0.9, 0.3], [1.0, -0.4]), ([0.5, -0.7], [0.8, 0.6]), ([1.0, 0.2], [0.95, 0.1])];
    for (b, c) in cases {
        let det = (b[0] * c[0]).exp() * (b[1] * c[1]).exp() - (b[0] * c[1]).exp() * (b[1] * c[0]).exp();
        let lhs = det / (vandermonde(&b) * vandermonde(&c));
        let mut rhs = 0.0;
        for k in 0..=30 {
            for tau in enumerate_partitions(k, 2) {
                let coef = 1.0 / (fact(tau.part(0) + 1) * fact(tau.part(1)));
                rhs += coef * schur(&tau, &b) * schur(&tau, &c);
            }
        }
        assert!(rel(rhs, lhs) < 1e-8, "{rhs} vs {lhs}");
    }
}
