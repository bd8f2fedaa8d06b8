use std::f64::consts::PI;

use proptest::prelude::*;

use regge_core::curvature::*;
use regge_core::fem::*;
use regge_core::mesh::*;
use regge_core::quadrature::LineRule;
use regge_core::regge::ReggeSpace;
use regge_core::tensor::*;
use regge_core::Error;

fn bench_mesh(h: f64, seed: u64) -> Mesh {
    generate_perturbed_grid(Rect::square(0.25), h, 0.25, seed).unwrap()
}

fn rhs(mesh: &Mesh, r: usize, opts: &CurvatureOptions) -> Vec<f64> {
    let space = LagrangeSpace::new(mesh, r.max(1)).unwrap();
    let gspace = ReggeSpace::new(mesh, r).unwrap();
    let gh = gspace.interpolate_metric(&SphericalCap, 0).unwrap();
    let fa = boundary_frame_angle(mesh, &SphericalCap, opts.edge_points).unwrap();
    rhs_functional(&space, &gh, &fa, opts).unwrap().total()
}

/// Angle of the chart direction `d` from `e₁`, measured in `g`.
fn tangent_angle(p: [f64; 2], d: [f64; 2]) -> f64 {
    let g = SphericalCap.sample(p).unwrap().g;
    let f = SphericalCap.frame(p).unwrap();
    g.bilinear(d, f.e2).atan2(g.bilinear(d, f.e1))
}

#[test]
fn geodesic_curvature_matches_frame_oracle() {
    // left-normal curvature of a curve: κ = dθ/ds − α(T), θ the angle from e₁
    let mesh = bench_mesh(0.125, 6);
    for t in [0, 7, 19, 30] {
        for i in 0..3 {
            let [a, b] = mesh.local_edge_vertices(t, i).map(|v| mesh.vertex(v));
            let d = [b[0] - a[0], b[1] - a[1]];
            for s in [0.2, 0.5, 0.9] {
                let at = |s: f64| [a[0] + s * d[0], a[1] + s * d[1]];
                let eps = 1e-5;
                let dtheta = (tangent_angle(at(s + eps), d) - tangent_angle(at(s - eps), d)) / (2.0 * eps);
                let g = SphericalCap.sample(at(s)).unwrap().g;
                let len = g.quadratic(d).sqrt();
                let alpha = SphericalCap::alpha(at(s)).apply(Vector(d)) / len;
                let oracle = dtheta / len - alpha;
                let k = geodesic_curvature(&mesh, &SphericalCap, t, i, s).unwrap();
                assert!((k - oracle).abs() < 1e-7, "t={t} i={i} s={s}: {k} vs {oracle}");
            }
        }
    }
}

#[test]
fn straight_lines_are_geodesic_in_a_constant_metric() {
    let mesh = bench_mesh(0.25, 1);
    let g = ConstantMetric(SymMat2::new(2.0, 0.3, 0.7));
    for t in 0..mesh.num_triangles() {
        for i in 0..3 {
            assert_eq!(geodesic_curvature(&mesh, &g, t, i, 0.4).unwrap(), 0.0);
        }
    }
}

#[test]
fn cap_rhs_is_compatible_for_all_orders() {
    for h in [0.25, 0.125, 0.0625] {
        for r in 0..=3 {
            let opts = CurvatureOptions::for_degrees(r.max(1), r, 0);
            let f = rhs(&bench_mesh(h, 1), r, &opts);
            let ratio = compatibility_ratio(&f);
            assert!(ratio < COMPATIBILITY_TOL, "h={h} r={r}: {ratio:e}");
        }
    }
}

#[test]
fn mis_signed_edge_jumps_break_compatibility() {
    let mesh = bench_mesh(0.125, 1);
    let mut opts = CurvatureOptions::for_degrees(1, 1, 0);
    opts.flip_edge_jumps = true;
    let f = rhs(&mesh, 1, &opts);
    assert!(compatibility_ratio(&f) > 1e-3);
    let space = LagrangeSpace::new(&mesh, 1).unwrap();
    let rule = regge_core::quadrature::TriangleRule::with_degree(8);
    let a = assemble_stiffness(&space, &SphericalCap, &rule).unwrap();
    let m = assemble_volume_functional(&space, &SphericalCap, &rule).unwrap();
    assert!(matches!(
        solve_constrained(&a, &m, &f, SolverKind::Direct),
        Err(Error::Compatibility { .. })
    ));
}

#[test]
fn flat_metric_with_constant_frame_gives_zero_functional() {
    let mesh = bench_mesh(0.0625, 2);
    for p in 1..=3 {
        let space = LagrangeSpace::new(&mesh, p).unwrap();
        let opts = CurvatureOptions::for_degrees(p, 0, 0);
        let fa = boundary_frame_angle(&mesh, &FlatMetric, opts.edge_points).unwrap();
        let f = rhs_functional(&space, &FlatMetric, &fa, &opts).unwrap().total();
        assert!(f.iter().all(|v| v.abs() < 1e-13), "p={p}");
    }
}

#[test]
fn total_curvature_is_the_cap_area() {
    // ∫∫ (1 − x² − y²)^{−1/2} over the square, by a tensor Gauss rule independent of the mesh
    let line = LineRule::gauss_legendre(40);
    let mut area = 0.0;
    for (u, wu) in line.iter() {
        for (v, wv) in line.iter() {
            let (x, y) = (0.5 * u - 0.25, 0.5 * v - 0.25);
            area += 0.25 * wu * wv / (1.0 - x * x - y * y).sqrt();
        }
    }
    let mesh = bench_mesh(0.125, 3);
    let space = LagrangeSpace::new(&mesh, 1).unwrap();
    let opts = CurvatureOptions::for_degrees(1, 2, 0);
    let exact: f64 = kda_dist(&space, &SphericalCap, &opts).unwrap().kda().iter().sum();
    assert!((exact - area).abs() < 1e-12, "{exact} vs {area}");
    // with g_h the total curvature error decays like h^{r+1}
    for r in 1..=3 {
        let err = |h: f64| {
            let mesh = bench_mesh(h, 3);
            let space = LagrangeSpace::new(&mesh, 1).unwrap();
            let gspace = ReggeSpace::new(&mesh, r).unwrap();
            let gh = gspace.interpolate_metric(&SphericalCap, 0).unwrap();
            let opts = CurvatureOptions::for_degrees(1, r, 0);
            let total: f64 = kda_dist(&space, &gh, &opts).unwrap().kda().iter().sum();
            (total - area).abs()
        };
        let (e1, e2) = (err(0.125), err(0.0625));
        assert!(e1 / e2 > 2f64.powf(r as f64 + 0.3), "r={r}: {e1:e} → {e2:e}");
    }
}

#[test]
fn frame_angle_turns_once_with_corner_jumps_only() {
    let mesh = bench_mesh(0.0625, 5);
    let fa = boundary_frame_angle(&mesh, &SphericalCap, 10).unwrap();
    assert!((fa.total_turning() - 2.0 * PI).abs() < 1e-10);
    for &(v, jump) in &fa.jumps {
        if mesh.is_corner(v) {
            assert!(jump > 1.0 && jump < 2.0, "corner {v}: {jump}");
        } else {
            assert!(jump.abs() < 1e-12, "vertex {v}: {jump}");
        }
    }
    // recorded derivatives agree with differences of the recorded angles
    for e in &fa.edges {
        for w in e.samples.windows(2) {
            let fd = (w[1].1 - w[0].1) / (w[1].0 - w[0].0);
            let mid = 0.5 * (w[0].2 + w[1].2);
            assert!((fd - mid).abs() < 1e-2 * (1.0 + mid.abs()));
        }
    }
}

#[test]
fn frame_without_derivatives_uses_differences() {
    let mesh = bench_mesh(0.125, 5);
    let plain = FnMetric::new("cap-no-jacobian", |p| SphericalCap.sample(p)).with_frame(|p| {
        SphericalCap.frame(p).map(|f| Frame { de1: None, de2: None, ..f })
    });
    let a = boundary_frame_angle(&mesh, &SphericalCap, 8).unwrap();
    let b = boundary_frame_angle(&mesh, &plain, 8).unwrap();
    for (x, y) in a.edges.iter().zip(&b.edges) {
        for (p, q) in x.samples.iter().zip(&y.samples) {
            assert!((p.2 - q.2).abs() < 1e-6);
        }
    }
}

#[test]
fn bad_frames_are_rejected() {
    let mesh = bench_mesh(0.25, 1);
    let no_frame = FnMetric::new("frameless", |p| SphericalCap.sample(p));
    assert!(matches!(boundary_frame_angle(&mesh, &no_frame, 8), Err(Error::Frame(_))));
    let skewed = FnMetric::new("skewed", |p| SphericalCap.sample(p)).with_frame(|_| Some(Frame::standard()));
    assert!(matches!(boundary_frame_angle(&mesh, &skewed, 8), Err(Error::Frame(_))));
}

#[test]
fn functional_is_invariant_under_relabelling() {
    let mesh = bench_mesh(0.125, 7);
    let opts = CurvatureOptions::for_degrees(1, 1, 0);
    let f = rhs(&mesh, 1, &opts);
    // reverse vertex numbering, rotate and flip each triangle's vertex list
    let n = mesh.num_vertices();
    let perm = |v: usize| n - 1 - v;
    let mut verts = vec![[0.0; 2]; n];
    for v in 0..n {
        verts[perm(v)] = mesh.vertex(v);
    }
    let tris: Vec<[usize; 3]> = mesh
        .triangles()
        .iter()
        .enumerate()
        .map(|(k, t)| if k % 2 == 0 { [perm(t[1]), perm(t[2]), perm(t[0])] } else { [perm(t[0]), perm(t[2]), perm(t[1])] })
        .rev()
        .collect();
    let other = build_topology(verts, tris).unwrap();
    let g = rhs(&other, 1, &opts);
    for v in 0..n {
        assert!((f[v] - g[perm(v)]).abs() < 1e-13, "vertex {v}: {} vs {}", f[v], g[perm(v)]);
    }
}

#[test]
fn functional_is_local() {
    let mesh = bench_mesh(0.125, 2);
    let space = LagrangeSpace::new(&mesh, 2).unwrap();
    let gspace = ReggeSpace::new(&mesh, 1).unwrap();
    let gh = gspace.interpolate_metric(&SphericalCap, 0).unwrap();
    let mut bumped = gspace.interpolate_metric(&SphericalCap, 0).unwrap();
    let t = 5;
    bumped.coefficients_mut(t).iter_mut().for_each(|c| *c *= 1.01);
    let opts = CurvatureOptions::for_degrees(2, 1, 0);
    let fa = boundary_frame_angle(&mesh, &SphericalCap, opts.edge_points).unwrap();
    let f0 = rhs_functional(&space, &gh, &fa, &opts).unwrap().total();
    let f1 = rhs_functional(&space, &bumped, &fa, &opts).unwrap().total();
    let own = space.local_dofs(t);
    for (d, (a, b)) in f0.iter().zip(&f1).enumerate() {
        if own.contains(&d) {
            continue;
        }
        assert_eq!(a, b, "dof {d} changed");
    }
    assert!(own.iter().any(|&d| f0[d] != f1[d]));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn compatibility_holds_on_random_meshes(seed in 0u64..100_000, perturb in 0.0f64..0.4, r in 0usize..4) {
        let mesh = generate_perturbed_grid(Rect::square(0.25), 0.125, perturb, seed).unwrap();
        let opts = CurvatureOptions::for_degrees(r.max(1), r, 0);
        let f = rhs(&mesh, r, &opts);
        prop_assert!(compatibility_ratio(&f) < COMPATIBILITY_TOL);
    }

    #[test]
    fn angles_sum_to_pi_in_constant_metrics(a in 0.2f64..4.0, c in 0.2f64..4.0, t in -0.9f64..0.9, seed in 0u64..1000) {
        let g = ConstantMetric(SymMat2::new(a, t * (a * c).sqrt(), c));
        let mesh = generate_perturbed_grid(Rect::square(0.25), 0.125, 0.3, seed).unwrap();
        for tri in 0..mesh.num_triangles() {
            let s: f64 = mesh.triangle(tri).iter().map(|&v| interior_angle(&mesh, &g, tri, v).unwrap()).sum();
            prop_assert!((s - PI).abs() < 1e-12);
        }
    }
}
