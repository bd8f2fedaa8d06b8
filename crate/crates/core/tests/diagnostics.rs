use std::f64::consts::PI;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use regge_core::curvature::{boundary_frame_angle, CurvatureOptions};
use regge_core::diagnostics::*;
use regge_core::fem::LagrangeSpace;
use regge_core::mesh::*;
use regge_core::metric::Combination;
use regge_core::regge::ReggeSpace;
use regge_core::tensor::*;

fn spd() -> impl Strategy<Value = SymMat2> {
    (0.05f64..5.0, 0.05f64..5.0, -0.95f64..0.95).prop_map(|(a, c, t)| SymMat2::new(a, t * (a * c).sqrt(), c))
}

fn bench_mesh(h: f64) -> Mesh {
    generate_perturbed_grid(Rect::square(0.25), h, 0.25, 1).unwrap()
}

fn scaled_cap(c: f64) -> FnMetric {
    FnMetric::new("scaled-cap", move |p| {
        let s = SphericalCap.sample(p)?;
        Ok(s.combine(c, &s, 0.0))
    })
}

proptest! {
    #[test]
    fn jh_maps_star_to_star(g in spd(), gh in spd(), a in -2.0f64..2.0, b in -2.0f64..2.0) {
        // ⋆_h (J α) = ⋆ α
        let j = jh_matrix(&g, &gh).unwrap();
        let ja = Covector([j[0][0] * a + j[0][1] * b, j[1][0] * a + j[1][1] * b]);
        let lhs = hodge_star_1(&gh, ja).unwrap();
        let rhs = hodge_star_1(&g, Covector([a, b])).unwrap();
        let scale = 1.0 + rhs.0[0].abs() + rhs.0[1].abs();
        prop_assert!((lhs.0[0] - rhs.0[0]).abs() < 1e-10 * scale);
        prop_assert!((lhs.0[1] - rhs.0[1]).abs() < 1e-10 * scale);
    }

    #[test]
    fn operator_norm_matches_brute_force(gh in spd(), m in proptest::array::uniform4(-2.0f64..2.0)) {
        let mat = [[m[0], m[1]], [m[2], m[3]]];
        let fast = covector_operator_norm(mat, &gh).unwrap();
        let inv = gh.inverse().unwrap();
        let mut best = 0.0f64;
        for k in 0..20_000 {
            let th = PI * k as f64 / 20_000.0;
            let a = [th.cos(), th.sin()];
            let ma = [mat[0][0] * a[0] + mat[0][1] * a[1], mat[1][0] * a[0] + mat[1][1] * a[1]];
            best = best.max((inv.quadratic(ma) / inv.quadratic(a)).sqrt());
        }
        prop_assert!(fast >= best * (1.0 - 1e-12));
        prop_assert!(fast <= best * (1.0 + 1e-6) + 1e-14);
    }
}

#[test]
fn jh_is_identity_for_equal_and_conformal_metrics() {
    let mesh = bench_mesh(0.125);
    let same = jh_report(&mesh, &SphericalCap, &SphericalCap, 2, 3).unwrap();
    assert!(same.sup_deviation <= 1e-12);
    for c in [0.5, 3.0] {
        let r = jh_report(&mesh, &SphericalCap, &scaled_cap(c), 2, 3).unwrap();
        assert!(r.sup_deviation <= 1e-12, "c={c}: {:e}", r.sup_deviation);
    }
}

#[test]
fn jh_adjointness_holds_on_the_benchmark() {
    let mesh = bench_mesh(0.125);
    let space = ReggeSpace::new(&mesh, 1).unwrap();
    let gh = space.interpolate_metric(&SphericalCap, 0).unwrap();
    let r = jh_report(&mesh, &SphericalCap, &gh, 4, 9).unwrap();
    assert!(r.adjointness_residual < 1e-13);
    assert!(r.sup_deviation > 0.0 && r.sup_deviation < 0.1);
}

#[test]
fn flat_uniform_grid_has_unit_shape_ratio() {
    for n in [2, 4, 8] {
        let h = 0.5 / n as f64;
        let mesh = generate_perturbed_grid(Rect::square(0.25), h, 0.0, 0).unwrap();
        let q = quality_report(&mesh, &FlatMetric, &FlatMetric).unwrap();
        for t in &q.triangles {
            assert!((t.h_t - h).abs() < 1e-14 && (t.rho_t - h).abs() < 1e-14);
            assert!((t.ratio - 1.0).abs() < 1e-12 && (t.kv_t - 1.0).abs() < 1e-12);
        }
        assert!((q.k_prime - 1.0).abs() < 1e-12);
        assert_eq!((q.c_g_gh, q.c_gh_g, q.metric_error), (1.0, 1.0, 0.0));
    }
}

#[test]
fn flat_ratios_are_scale_invariant() {
    // same perturbed pattern, chart scaled by ½
    let a = generate_perturbed_grid(Rect::square(0.25), 0.125, 0.3, 4).unwrap();
    let half: Vec<[f64; 2]> = a.vertices().iter().map(|p| [0.5 * p[0], 0.5 * p[1]]).collect();
    let b = build_topology(half, a.triangles().to_vec()).unwrap();
    let (qa, qb) = (
        quality_report(&a, &FlatMetric, &FlatMetric).unwrap(),
        quality_report(&b, &FlatMetric, &FlatMetric).unwrap(),
    );
    assert!((qa.k - qb.k).abs() < 1e-10);
    for p in 1..=3 {
        let (sa, sb) = (LagrangeSpace::new(&a, p).unwrap(), LagrangeSpace::new(&b, p).unwrap());
        let ta = trace_ratio_report(&sa, &FlatMetric, &qa).unwrap().max;
        let tb = trace_ratio_report(&sb, &FlatMetric, &qb).unwrap().max;
        assert!((ta - tb).abs() < 1e-10, "trace p={p}");
        let ia = inverse_ratio_report(&sa, &FlatMetric, &qa).unwrap().max;
        let ib = inverse_ratio_report(&sb, &FlatMetric, &qb).unwrap().max;
        assert!((ia - ib).abs() < 1e-10, "inverse p={p}");
    }
}

#[test]
fn cap_quality_improves_under_refinement() {
    let mut last = f64::INFINITY;
    let mut inverse = Vec::new();
    for h in [0.25, 0.125, 0.0625] {
        let mesh = bench_mesh(h);
        let space = ReggeSpace::new(&mesh, 1).unwrap();
        let gh = space.interpolate_metric(&SphericalCap, 0).unwrap();
        let q = quality_report(&mesh, &SphericalCap, &gh).unwrap();
        assert!(q.rho_bounded_by_h());
        assert!(q.metric_error < 1.0);
        assert!(q.c_g_gh >= 1.0 && q.c_gh_g >= 1.0);
        assert!(q.c_g_gh - 1.0 < last);
        last = q.c_g_gh - 1.0;
        let lag = LagrangeSpace::new(&mesh, 1).unwrap();
        inverse.push(inverse_ratio_report(&lag, &gh, &q).unwrap().max);
    }
    let spread = inverse.iter().cloned().fold(0.0, f64::max) / inverse.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(spread < 10.0, "{inverse:?}");
}

#[test]
fn bh_vanishes_on_constants_and_zero_variations() {
    let mesh = bench_mesh(0.125);
    let space = ReggeSpace::new(&mesh, 1).unwrap();
    let gh = space.interpolate_metric(&SphericalCap, 0).unwrap();
    let lag = LagrangeSpace::new(&mesh, 2).unwrap();
    let one = lag.interpolate(|_| 1.0);
    let sigma = Combination::difference(&gh, &SphericalCap);
    assert!(assemble_bh(&SphericalCap, &sigma, &one, 14, 10).unwrap().abs() < 1e-14);
    let zero = Combination::difference(&SphericalCap, &SphericalCap);
    let v = lag.interpolate(|p| p[0] * p[1] + p[1]);
    assert_eq!(assemble_bh(&SphericalCap, &zero, &v, 14, 10).unwrap(), 0.0);
}

#[test]
fn bh_is_linear_in_the_test_function() {
    let mesh = bench_mesh(0.125);
    let space = ReggeSpace::new(&mesh, 1).unwrap();
    let gh = space.interpolate_metric(&SphericalCap, 0).unwrap();
    let lag = LagrangeSpace::new(&mesh, 2).unwrap();
    let sigma = Combination::difference(&gh, &SphericalCap);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut rand_field = || lag.field((0..lag.ndof()).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
    let (a, b) = (rand_field(), rand_field());
    let sum = lag
        .field(a.coefficients().iter().zip(b.coefficients()).map(|(x, y)| 2.0 * x - y).collect())
        .unwrap();
    let bh = |v| assemble_bh(&SphericalCap, &sigma, v, 14, 10).unwrap();
    let (ba, bb, bs) = (bh(&a), bh(&b), bh(&sum));
    assert!((2.0 * ba - bb - bs).abs() < 1e-12 * (ba.abs() + bb.abs()));
}

#[test]
fn shape_derivative_residual_is_second_order() {
    let mesh = bench_mesh(0.25);
    let space = ReggeSpace::new(&mesh, 0).unwrap();
    let gh = space.interpolate_metric(&SphericalCap, 0).unwrap();
    let lag = LagrangeSpace::new(&mesh, 2).unwrap();
    let opts = CurvatureOptions::for_degrees(2, 0, 10);
    let fa = boundary_frame_angle(&mesh, &SphericalCap, opts.edge_points).unwrap();
    let v = lag.interpolate(|p| (3.0 * p[0]).sin() + p[1] * p[1]);
    let r1 = shape_derivative_check(&SphericalCap, &gh, &v, &fa, &opts, 0.5, 1e-1).unwrap();
    let r2 = shape_derivative_check(&SphericalCap, &gh, &v, &fa, &opts, 0.5, 1e-2).unwrap();
    assert!(r1.residual / r2.residual > 50.0, "{:e} → {:e}", r1.residual, r2.residual);
    assert!(r2.residual < 1e-4 * r2.bh.abs());
}
