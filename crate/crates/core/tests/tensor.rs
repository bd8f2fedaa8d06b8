use nalgebra::{Matrix2, SymmetricEigen};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use regge_core::tensor::*;

fn spd() -> impl Strategy<Value = SymMat2> {
    (0.05f64..5.0, 0.05f64..5.0, -1.0f64..1.0).prop_map(|(a, c, t)| {
        // off-diagonal stays inside the SPD cone
        let b = t * (a * c).sqrt() * 0.95;
        SymMat2::new(a, b, c)
    })
}

fn mat(g: &SymMat2) -> Matrix2<f64> {
    Matrix2::new(g.xx, g.xy, g.xy, g.yy)
}

// λ_max of b^{-1/2} a b^{-1/2}
fn pencil_max(a: &SymMat2, b: &SymMat2) -> f64 {
    let e = SymmetricEigen::new(mat(b));
    let s = e.eigenvectors * Matrix2::from_diagonal(&e.eigenvalues.map(|l| 1.0 / l.sqrt())) * e.eigenvectors.transpose();
    let m = s * mat(a) * s;
    SymmetricEigen::new((m + m.transpose()) * 0.5).eigenvalues.max()
}

proptest! {
    #[test]
    fn covector_constant_equals_reversed_vector_constant(g1 in spd(), g2 in spd()) {
        let dual = quasi_iso_pointwise_dual(&g1, &g2).unwrap();
        let reversed = quasi_iso_pointwise(&g2, &g1).unwrap();
        prop_assert!((dual - reversed).abs() <= 1e-10 * reversed);
        let oracle = pencil_max(&g1, &g2).sqrt();
        let direct = quasi_iso_pointwise(&g1, &g2).unwrap();
        prop_assert!((direct - oracle).abs() <= 1e-10 * oracle);
    }

    #[test]
    fn hodge_star_squares_to_minus_one(g in spd(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let alpha = Covector([a, b]);
        let twice = hodge_star_1(&g, hodge_star_1(&g, alpha).unwrap()).unwrap();
        prop_assert!((twice.0[0] + a).abs() < 1e-12 * (1.0 + a.abs() + b.abs()));
        prop_assert!((twice.0[1] + b).abs() < 1e-12 * (1.0 + a.abs() + b.abs()));
    }

    #[test]
    fn hodge_star_is_conformally_invariant(g in spd(), c in 0.1f64..10.0, a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let s1 = hodge_star_1(&g, Covector([a, b])).unwrap();
        let s2 = hodge_star_1(&g.scale(c), Covector([a, b])).unwrap();
        prop_assert!((s1.0[0] - s2.0[0]).abs() < 1e-12 * (1.0 + s1.0[0].abs()));
        prop_assert!((s1.0[1] - s2.0[1]).abs() < 1e-12 * (1.0 + s1.0[1].abs()));
    }

    #[test]
    fn hodge_star_is_an_isometry(g in spd(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let alpha = Covector([a, b]);
        let n0 = conorm(&g, alpha).unwrap();
        let n1 = conorm(&g, hodge_star_1(&g, alpha).unwrap()).unwrap();
        prop_assert!((n0 - n1).abs() < 1e-12 * (1.0 + n0));
    }

    #[test]
    fn conorm_is_norm_of_sharp(g in spd(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let alpha = Covector([a, b]);
        let v = sharp(&g, alpha).unwrap();
        prop_assert!((conorm(&g, alpha).unwrap() - norm(&g, v)).abs() < 1e-12 * (1.0 + norm(&g, v)));
    }

    #[test]
    fn cap_christoffel_symbols_are_symmetric(x in -0.6f64..0.6, y in -0.6f64..0.6) {
        let c = christoffel(&SphericalCap.sample([x, y]).unwrap()).unwrap().0;
        for k in c {
            prop_assert!((k[0][1] - k[1][0]).abs() < 1e-14 * (1.0 + k[0][1].abs()));
        }
    }
}

#[test]
fn duality_identity_on_a_thousand_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut draw = || {
        let a: f64 = rng.gen_range(0.01..10.0);
        let c: f64 = rng.gen_range(0.01..10.0);
        let b = rng.gen_range(-0.99..0.99) * (a * c).sqrt();
        SymMat2::new(a, b, c)
    };
    for _ in 0..1000 {
        let (g1, g2) = (draw(), draw());
        let dual = quasi_iso_pointwise_dual(&g1, &g2).unwrap();
        let reversed = quasi_iso_pointwise(&g2, &g1).unwrap();
        assert!((dual - reversed).abs() <= 1e-10 * reversed, "{g1:?} {g2:?}");
    }
}

#[test]
fn flat_christoffel_symbols_vanish() {
    let c = christoffel(&FlatMetric.sample([0.3, -0.1]).unwrap()).unwrap();
    assert_eq!(c.max_abs(), 0.0);
    let k = gauss_curvature(&FlatMetric.sample([0.0, 0.0]).unwrap()).unwrap();
    assert_eq!(k, 0.0);
}

#[test]
fn cap_has_unit_curvature() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let p = [rng.gen_range(-0.25..0.25), rng.gen_range(-0.25..0.25)];
        let k = gauss_curvature(&SphericalCap.sample(p).unwrap()).unwrap();
        assert!((k - 1.0).abs() < 1e-9, "K = {k} at {p:?}");
    }
}

#[test]
fn cap_metric_derivatives_match_differences() {
    let p = [0.12, -0.07];
    let s = SphericalCap.sample(p).unwrap();
    let eps = 1e-6;
    for k in 0..2 {
        let mut a = p;
        let mut b = p;
        a[k] += eps;
        b[k] -= eps;
        let fd = SphericalCap.sample(a).unwrap().g.sub(&SphericalCap.sample(b).unwrap().g).scale(0.5 / eps);
        assert!(fd.sub(&s.dg[k]).max_abs() < 1e-8);
    }
}

#[test]
fn cap_frame_is_orthonormal_and_alpha_is_its_connection() {
    // α(X) = ⟨∇_X e₂, e₁⟩, checked with a difference quotient of e₂ and Γ
    let p = [0.1, 0.2];
    let s = SphericalCap.sample(p).unwrap();
    let f = SphericalCap.frame(p).unwrap();
    assert!(f.orthonormality_defect(&s.g) < 1e-14);
    let gam = christoffel(&s).unwrap();
    let alpha = SphericalCap::alpha(p);
    let eps = 1e-6;
    for k in 0..2 {
        let mut a = p;
        let mut b = p;
        a[k] += eps;
        b[k] -= eps;
        let (fa, fb) = (SphericalCap.frame(a).unwrap(), SphericalCap.frame(b).unwrap());
        let de2 = [(fa.e2[0] - fb.e2[0]) / (2.0 * eps), (fa.e2[1] - fb.e2[1]) / (2.0 * eps)];
        let mut dir = [0.0; 2];
        dir[k] = 1.0;
        let corr = gam.contract(dir, f.e2);
        let nabla = [de2[0] + corr[0], de2[1] + corr[1]];
        let val = s.g.bilinear(nabla, f.e1);
        assert!((val - alpha.0[k]).abs() < 1e-8, "component {k}: {val} vs {}", alpha.0[k]);
    }
}

#[test]
fn non_spd_input_is_rejected() {
    let bad = SymMat2::new(1.0, 2.0, 1.0);
    assert!(bad.inverse().is_ok());
    assert!(hodge_star_1(&bad, Covector([1.0, 0.0])).is_err());
    assert!(quasi_iso_pointwise(&bad, &SymMat2::IDENTITY).is_err());
    assert!(SphericalCap.sample([0.8, 0.8]).is_err());
}
