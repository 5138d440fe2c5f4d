//! Invariants checked on random models, points and configurations.

mod common;

use proptest::prelude::*;
use statfrob::frobenius::{self, DEFAULT_KAPPA};
use statfrob::geometry::{self, CurvatureOptions};
use statfrob::numdiff;
use statfrob::split_algebra::{self, SplitNumber};
use statfrob::webs::{self, CevianConfig, SimplexPoint};
use statfrob::{CanonicalPoint, ExponentialFamilyModel};

fn model_strategy() -> impl Strategy<Value = ExponentialFamilyModel> {
    (1usize..=3, 1usize..=3, 0u64..500)
        .prop_map(|(n, extra, seed)| ExponentialFamilyModel::random(n, n + extra, seed))
}

fn model_and_theta() -> impl Strategy<Value = (ExponentialFamilyModel, Vec<f64>)> {
    model_strategy().prop_flat_map(|m| {
        let n = m.n();
        (Just(m), prop::collection::vec(-1.5f64..1.5, n))
    })
}

fn interior_point(d: usize) -> impl Strategy<Value = SimplexPoint> {
    prop::collection::vec(0.05f64..1.0, d).prop_map(|w| SimplexPoint::from_weights(&w).unwrap())
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn probabilities_normalized((m, theta) in model_and_theta()) {
        let p = m.probabilities(&m.point(&theta).unwrap());
        prop_assert!((p.sum() - 1.0).abs() < 1e-12);
        prop_assert!(p.p.iter().all(|&x| x > 0.0));
    }

    #[test]
    fn means_are_gradient((m, theta) in model_and_theta()) {
        let pt = m.point(&theta).unwrap();
        let mu = m.mean_parameters(&pt, 1e-5).mu;
        let fd = numdiff::gradient(m.log_partition_fn(), &theta, 1e-5);
        prop_assert!(max_abs_diff(&mu, &fd) < 1e-6);
    }

    #[test]
    fn metric_is_hessian((m, theta) in model_and_theta()) {
        let g = geometry::fisher_metric(&m, &m.point(&theta).unwrap());
        let fd = numdiff::hessian(m.log_partition_fn(), &theta, 1e-4);
        for a in 0..m.n() {
            prop_assert!(max_abs_diff(&g.rows()[a], &fd[a]) < 1e-6);
        }
        prop_assert!(g.symmetry_defect() == 0.0);
    }

    #[test]
    fn cubic_is_third_derivative((m, theta) in model_and_theta()) {
        let c = geometry::amari_chentsov(&m, &m.point(&theta).unwrap()).0;
        let fd = numdiff::third_derivative(m.log_partition_fn(), &theta, 1e-3);
        let n = m.n();
        for i in 0..n {
            for j in 0..n {
                prop_assert!(max_abs_diff(&(0..n).map(|k| c.get(i, j, k)).collect::<Vec<_>>(), &fd[i][j]) < 1e-4);
            }
        }
        prop_assert!(c.symmetry_defect() < 1e-15);
    }

    /// `∂ₖ g_ij = Γ^{(α)}_{ki,j} + Γ^{(−α)}_{kj,i}`, with `∂g` by central differences.
    #[test]
    fn alpha_connections_are_dual((m, theta) in model_and_theta(), alpha in -2.0f64..2.0) {
        let pt = m.point(&theta).unwrap();
        let pos = geometry::alpha_christoffels(&m, &pt, alpha).unwrap().gamma_lower;
        let neg = geometry::alpha_christoffels(&m, &pt, -alpha).unwrap().gamma_lower;
        let h = 1e-5;
        let n = m.n();
        for k in 0..n {
            let mut up = theta.clone();
            let mut dn = theta.clone();
            up[k] += h;
            dn[k] -= h;
            let gp = geometry::fisher_metric(&m, &m.point(&up).unwrap()).g;
            let gm = geometry::fisher_metric(&m, &m.point(&dn).unwrap()).g;
            for i in 0..n {
                for j in 0..n {
                    let dg = (gp[(i, j)] - gm[(i, j)]) / (2.0 * h);
                    prop_assert!((dg - pos.get(k, i, j) - neg.get(k, j, i)).abs() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn metric_invariance_everywhere((m, theta) in model_and_theta(), seed in 0u64..100) {
        let pt = m.point(&theta).unwrap();
        prop_assert!(frobenius::metric_invariance_residual(&m, &pt, DEFAULT_KAPPA, 10, seed).unwrap() < frobenius::METRIC_INVARIANCE_TOL);
        prop_assert!(frobenius::pencil_match(&m, &pt, DEFAULT_KAPPA).unwrap() < frobenius::PENCIL_MATCH_TOL);
    }

    #[test]
    fn barycentric_identities(p in interior_point(4)) {
        let f = webs::barycentric_fields(&p).unwrap();
        prop_assert!(f.x_sum.iter().all(|v| v.abs() < 1e-13));
        for (k, q) in f.q.iter().enumerate() {
            prop_assert_eq!(q[k], 0.0);
            prop_assert!((q.iter().sum::<f64>() - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn ceva_concurrent(p in interior_point(3)) {
        let tri = webs::reference_simplex(2);
        let cfg = CevianConfig::concurrent(tri.clone(), &p).unwrap();
        prop_assert!(cfg.incidence_defect() < 1e-10);
        let prod = webs::ceva_product(&[tri[0].clone(), tri[1].clone(), tri[2].clone()], &cfg.triangle_feet().unwrap()).unwrap();
        prop_assert!((prod + 1.0).abs() < 1e-10, "{}", prod);
    }

    #[test]
    fn ceva_parallel(a in 0.1f64..2.0, b in 0.1f64..2.0, flip in any::<bool>()) {
        // Two entries of one sign, one of the other, summing to zero.
        let s = if flip { -1.0 } else { 1.0 };
        let delta = [s * a, s * b, -s * (a + b)];
        let tri = webs::reference_simplex(2);
        let cfg = CevianConfig::parallel(tri.clone(), &delta).unwrap();
        prop_assert!(cfg.incidence_defect() < 1e-10);
        let prod = webs::ceva_product(&[tri[0].clone(), tri[1].clone(), tri[2].clone()], &cfg.triangle_feet().unwrap()).unwrap();
        prop_assert!((prod + 1.0).abs() < 1e-10, "{}", prod);
    }

    #[test]
    fn generalized_ceva(p in interior_point(5)) {
        let s = webs::reference_simplex(4);
        let rep = webs::generalized_ceva_check(&s, &webs::edge_points_from_point(&s, &p).unwrap()).unwrap();
        prop_assert_eq!(rep.products.len(), 10);
        prop_assert!(rep.max_deviation < 1e-10);
    }

    #[test]
    fn sphere(p in interior_point(4)) {
        let e = webs::sphere_embedding(&p).unwrap();
        prop_assert!((e.norm - 4.0).abs() < 1e-13);
        prop_assert!(e.metric_residual < 1e-8);
    }

    #[test]
    fn sum_web_always_closes(a in 0.3f64..0.7, b in 0.3f64..0.7, eps in 0.001f64..0.2) {
        let web = webs::builtin_web("sum").unwrap();
        prop_assert!(webs::hexagon_closure(&web, (a, b), eps).unwrap().defect <= 1e-12);
    }

    #[test]
    fn product_web_always_closes(a in 0.9f64..1.1, b in 0.9f64..1.1, eps in 0.001f64..0.1) {
        let web = webs::builtin_web("product").unwrap();
        prop_assert!(webs::hexagon_closure(&web, (a, b), eps).unwrap().defect <= 1e-10);
    }

    #[test]
    fn split_algebra_laws(v in prop::collection::vec(-1000i32..1000, 6)) {
        // Integer components keep every product exact.
        let [a, b, c] = [0, 2, 4].map(|i| SplitNumber::new(v[i] as f64, v[i + 1] as f64));
        prop_assert_eq!(a * b, b * a);
        prop_assert_eq!((a * b) * c, a * (b * c));
        prop_assert_eq!(SplitNumber::unit() * a, a);
        prop_assert_eq!(a * (b + c), a * b + a * c);
    }

    #[test]
    fn lifts_satisfy_cauchy_riemann(x in -1.0f64..1.0, y in -1.0f64..1.0) {
        for name in ["exp", "identity"] {
            let f = split_algebra::builtin_map(name).unwrap();
            prop_assert!(split_algebra::cauchy_riemann_residual(&*f, (x, y), 1e-4) < 1e-8);
        }
        let sin = split_algebra::AlgebraFunction::lift("sin", f64::sin);
        prop_assert!(split_algebra::cauchy_riemann_residual(&sin.as_planar_map(), (x, y), 1e-4) < 1e-8);
    }

    #[test]
    fn split_defect_is_componentwise(eps in 0.005f64..0.05) {
        let f = split_algebra::builtin_polynomial("mixed").unwrap();
        let h = split_algebra::split_hexagon(&f, (1.0, 1.0), (1.25, 1.25), eps).unwrap();
        prop_assert!(h.defect <= h.plus.defect.max(h.minus.defect) + 1e-12);
    }
}

fn cubic_family(s: f64) -> webs::WebFunction {
    webs::PolynomialWeb {
        name: format!("x+y+{s}xy^2"),
        terms: vec![(1.0, 1, 0), (1.0, 0, 1), (s, 1, 2)],
        domain: webs::DomainBox::square(0.5, 2.0),
    }
    .into_web()
    .unwrap()
}

/// Closed-form web curvature of `x + y + s·x·y²` at `(1, 1)`.
fn cubic_family_curvature(s: f64) -> f64 {
    2.0 * s / ((1.0 + s) * (1.0 + 2.0 * s).powi(3))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn normalized_defect_orders_by_curvature(s1 in 0.05f64..1.5, s2 in 0.05f64..1.5) {
        let (k1, k2) = (cubic_family_curvature(s1), cubic_family_curvature(s2));
        prop_assume!((k1 - k2).abs() > 0.1 * k1.max(k2));
        let d = |s| webs::hexagon_closure(&cubic_family(s), (1.0, 1.0), 0.005).unwrap().normalized_defect;
        let (d1, d2) = (d(s1), d(s2));
        prop_assert!((d1 - k1).abs() < 0.05 * k1, "{d1} vs {k1}");
        prop_assert_eq!(d1 < d2, k1 < k2);
    }

    #[test]
    fn e_and_m_flat((m, theta) in model_and_theta()) {
        let pt = m.point(&theta).unwrap();
        let opts = CurvatureOptions::default();
        prop_assert_eq!(geometry::curvature_tensor(&m, &pt, 1.0, &opts).unwrap().max_abs, 0.0);
        let r = geometry::curvature_tensor(&m, &pt, -1.0, &opts).unwrap();
        prop_assert!(r.max_abs < 1e-6, "{}", r.max_abs);
    }

    #[test]
    fn pencil_symmetry((m, theta) in model_and_theta(), alpha in 0.1f64..2.0) {
        let pt = m.point(&theta).unwrap();
        let rep = geometry::pencil_symmetry_report(&m, &pt, alpha, &CurvatureOptions::default()).unwrap();
        prop_assert!(rep.max_abs_diff < 1e-6, "{}", rep.max_abs_diff);
    }
}

#[test]
fn flatness_on_fixtures() {
    for name in common::FIXTURES {
        let m = ExponentialFamilyModel::builtin(name).unwrap();
        for pt in m
            .sample_points(3, 7)
            .into_iter()
            .chain([CanonicalPoint::origin(m.n())])
        {
            let r =
                geometry::curvature_tensor(&m, &pt, -1.0, &CurvatureOptions::default()).unwrap();
            assert!(r.max_abs < 1e-6, "{name}: {}", r.max_abs);
        }
    }
}
