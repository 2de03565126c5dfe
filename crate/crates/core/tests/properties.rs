use gaussnet::linalg;
use gaussnet::metrics::spearman;
use gaussnet::width::{gmm_covering_fn, layer_covering_recursion};
use gaussnet::*;
use proptest::prelude::*;

fn sign_vec(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![Just(-1.0), Just(0.0), Just(1.0)], dim)
}

fn unit_cloud(dim: usize, count: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-1.0f64..1.0, dim), count).prop_filter_map("nonzero", |pts| {
        pts.into_iter().map(|p| linalg::normalized(&p)).collect::<Option<Vec<_>>>()
    })
}

proptest! {
    #[test]
    fn hamming_triangle_and_symmetry((u, v, w) in (1usize..=8).prop_flat_map(|d| (sign_vec(d), sign_vec(d), sign_vec(d)))) {
        let uv = hamming_variant(&u, &v).unwrap();
        prop_assert_eq!(uv, hamming_variant(&v, &u).unwrap());
        prop_assert_eq!(hamming_variant(&u, &u).unwrap(), 0.0);
        prop_assert!(uv <= hamming_variant(&u, &w).unwrap() + hamming_variant(&w, &v).unwrap() + 1e-12);
    }

    #[test]
    fn hamming_ignores_positive_scaling(
        (u, v, s) in (1usize..=16).prop_flat_map(|d| (
            prop::collection::vec(-5.0f64..5.0, d),
            prop::collection::vec(-5.0f64..5.0, d),
            prop::collection::vec(0.01f64..100.0, d),
        ))
    ) {
        let us: Vec<f64> = u.iter().zip(&s).map(|(a, b)| a * b).collect();
        prop_assert_eq!(hamming_variant(&u, &v).unwrap(), hamming_variant(&us, &v).unwrap());
    }

    #[test]
    fn relu_preserves_sign_pattern_distance(
        (u, v) in (1usize..=16).prop_flat_map(|d| (
            prop::collection::vec(prop_oneof![-5.0f64..-1e-3, 1e-3f64..5.0], d),
            prop::collection::vec(prop_oneof![-5.0f64..-1e-3, 1e-3f64..5.0], d),
        ))
    ) {
        let relu = ActivationSpec::relu();
        let fu: Vec<f64> = u.iter().map(|&x| relu.eval(x)).collect();
        let fv: Vec<f64> = v.iter().map(|&x| relu.eval(x)).collect();
        prop_assert_eq!(hamming_variant(&fu, &fv).unwrap(), hamming_variant(&u, &v).unwrap());
    }

    #[test]
    fn activations_are_contractive(
        a in -3.0f64..=0.0, b in 0.0f64..3.0, s in 0.01f64..=1.0, x in -10.0f64..10.0, y in -10.0f64..10.0,
    ) {
        for spec in [ActivationSpec::relu(), ActivationSpec::identity(), ActivationSpec::truncated(s, a, b).unwrap()] {
            prop_assert!((spec.eval(x) - spec.eval(y)).abs() <= (x - y).abs() + 1e-12);
            prop_assert_eq!(spec.eval(0.0), 0.0);
        }
    }

    #[test]
    fn covering_monotone_and_bounded(cloud in unit_cloud(4, 30), e1 in 0.05f64..2.5, e2 in 0.05f64..2.5) {
        let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
        let a = empirical_covering(&cloud, lo).unwrap().net_size;
        let b = empirical_covering(&cloud, hi).unwrap().net_size;
        prop_assert!(a <= cloud.len() && b <= cloud.len());
        // greedy nets are not monotone in general; the net at hi is at most the
        // packing number at hi, which is at most the net size at lo when hi >= 2*lo
        if hi >= 2.0 * lo {
            prop_assert!(b <= a);
        }
    }

    #[test]
    fn gmm_covering_monotone(l in 1usize..20, k in 1usize..10, e1 in 0.01f64..0.99, e2 in 0.01f64..0.99) {
        let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
        let f = |l, k, e| covering_number_gmm(l, k, e).unwrap().value;
        prop_assert!(f(l, k, lo) >= f(l, k, hi));
        prop_assert!(f(l + 1, k, lo) >= f(l, k, lo));
        prop_assert!(f(l, k + 1, lo) >= f(l, k, lo));
    }

    #[test]
    fn sudakov_monotone(w in 0.0f64..3.0, dw in 0.01f64..1.0, e in 0.2f64..2.0, de in 0.01f64..1.0) {
        let s = sudakov_net_size(w, e, 1.0).unwrap();
        prop_assert!(s >= 1.0);
        prop_assert!(sudakov_net_size(w + dw, e, 1.0).unwrap() > s);
        if w > 0.0 {
            prop_assert!(sudakov_net_size(w, e + de, 1.0).unwrap() < s);
        }
    }

    #[test]
    fn recursion_dominates_base(w in 0.0f64..10.0, m in 1usize..5000, eps in 0.01f64..2.0) {
        let base = gmm_covering_fn(3, 4);
        let grown = layer_covering_recursion(base.clone(), w, m).unwrap();
        prop_assert!(grown(eps) >= base(eps));
    }

    #[test]
    fn dudley_nonnegative(l in 1usize..5, k in 1usize..5, rmax in 0.1f64..3.0) {
        let d = dudley_bound(gmm_covering_fn(l, k), rmax, 1.0).unwrap();
        prop_assert!(d > 0.0);
    }

    #[test]
    fn distortion_is_permutation_invariant(cloud in unit_cloud(5, 12), seed in any::<u64>()) {
        let layer = make_layer(5, 32, ActivationSpec::relu(), seed).unwrap();
        let post = layer.apply_all(&cloud).unwrap();
        let a = distortion_report(&cloud, &post, PreMetric::Geodesic, PostMetric::HammingVariant).unwrap();
        let mut idx: Vec<usize> = (0..cloud.len()).collect();
        idx.reverse();
        idx.rotate_left((seed % 12) as usize);
        let pre2: Vec<_> = idx.iter().map(|&i| cloud[i].clone()).collect();
        let post2: Vec<_> = idx.iter().map(|&i| post[i].clone()).collect();
        let b = distortion_report(&pre2, &post2, PreMetric::Geodesic, PostMetric::HammingVariant).unwrap();
        prop_assert!((a.scale_constant - b.scale_constant).abs() < 1e-12);
        prop_assert!((a.max_residual - b.max_residual).abs() < 1e-12);
        prop_assert!((a.mean_residual - b.mean_residual).abs() < 1e-12);
        prop_assert!((a.spearman - b.spearman).abs() < 1e-9);
        prop_assert!(a.max_residual >= a.mean_residual && a.mean_residual >= 0.0);
        prop_assert!((-1.0..=1.0).contains(&a.spearman));
    }

    #[test]
    fn mean_width_monotone_under_inclusion(cloud in unit_cloud(6, 20), extra in unit_cloud(6, 5), seed in any::<u64>()) {
        let a = estimate_mean_width(&cloud, 50, seed).unwrap().value;
        let mut bigger = cloud.clone();
        bigger.extend(extra);
        let b = estimate_mean_width(&bigger, 50, seed).unwrap().value;
        prop_assert!(b >= a);
    }

    #[test]
    fn spearman_in_range(a in prop::collection::vec(-1.0f64..1.0, 3..30), seed in any::<u64>()) {
        let b: Vec<f64> = a.iter().enumerate().map(|(i, x)| x * ((seed >> (i % 60)) & 1) as f64).collect();
        let s = spearman(&a, &b);
        prop_assert!((-1.0..=1.0).contains(&s));
    }
}

#[test]
fn hamming_exhaustive_small_dimensions() {
    // every triple of sign patterns in dimensions 1..=3
    for d in 1..=3usize {
        let pats: Vec<Vec<f64>> = (0..3usize.pow(d as u32))
            .map(|mut c| {
                (0..d)
                    .map(|_| {
                        let v = [-1.0, 0.0, 1.0][c % 3];
                        c /= 3;
                        v
                    })
                    .collect()
            })
            .collect();
        for u in &pats {
            for v in &pats {
                for w in &pats {
                    let uv = hamming_variant(u, v).unwrap();
                    assert!(uv <= hamming_variant(u, w).unwrap() + hamming_variant(w, v).unwrap() + 1e-12);
                }
            }
        }
    }
}

#[test]
fn recover_linear_equivariant_under_relabeling() {
    let model = make_gmm_model(64, 3, 4, 21).unwrap();
    let perm = [2usize, 0, 3, 1];
    let permuted = ManifoldModel::from_bases(
        ModelKind::Gmm,
        perm.iter().map(|&j| model.bases()[j].clone()).collect(),
        0,
    )
    .unwrap();
    for s in 0..10u64 {
        let layer = make_layer(64, 256, ActivationSpec::relu(), s).unwrap();
        let x = sample_points(&model, 1, 40 + s).unwrap().into_points().remove(0);
        let q = layer.apply(&x).unwrap();
        let a = recover_linear(&layer, &q, &model).unwrap();
        let b = recover_linear(&layer, &q, &permuted).unwrap();
        assert_eq!(perm[b.component_index], a.component_index);
        assert!(linalg::distance(&a.estimate, &b.estimate) < 1e-12);
    }
}

#[test]
fn forward_stack_thread_independent() {
    let model = make_gmm_model(32, 3, 2, 1).unwrap();
    let cloud = sample_points(&model, 64, 2).unwrap();
    let layers: Vec<_> = (0..3)
        .map(|l| make_layer(if l == 0 { 32 } else { 48 }, 48, ActivationSpec::relu(), l))
        .collect::<Result<_>>()
        .unwrap();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| forward_stack(&layers, cloud.points(), true).unwrap())
    };
    assert_eq!(run(1), run(3));
}
