use super::oracle::{GeodesicStencil, Geometry, ORACLE_STEP};
use super::testfns::{random_chamber_points, OrbitPolynomial};
use super::*;
use crate::catalog::{build_space, CATALOG};
use crate::liealg::{matfun, C64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn alpha(space: &SymmetricSpace, r: &[f64]) -> f64 {
    space.roots()[0].eval(r)
}

/// Product of the nonzero eigenvalues of the pulled-back metric on the
/// angular directions at `h = a_element(r)`, computed from the tangent
/// images of an orthonormal basis of `k`.
fn pulled_back_angular_det(space: &SymmetricSpace, r: &[f64], dual: bool) -> f64 {
    let m = space.model();
    let h = space.a_element(r);
    let e_minus = matfun::expm(&(&h.matrix * C64::new(0.0, -1.0)));
    let e_plus = matfun::expm(&(&h.matrix * C64::new(0.0, 1.0)));
    let metric = -m.killing_gram().clone();
    let kd = m.k_dim();
    // orthonormal basis of k for -B
    let kk = metric.view((0, 0), (kd, kd)).into_owned();
    let chol = kk.cholesky().unwrap();
    let linv = chol.l().try_inverse().unwrap();
    let mut images = Vec::new();
    for j in 0..kd {
        let mut coeffs = nalgebra::DVector::<f64>::zeros(m.dim());
        for i in 0..kd {
            coeffs[i] = linv[(j, i)];
        }
        let x = m.real_element(coeffs.as_slice());
        let img: Vec<f64> = if dual {
            let moved = &e_minus * &x.matrix * &e_plus;
            let el = m.project(&moved).unwrap();
            el.p_coeffs().iter().map(|z| z.im).collect()
        } else {
            let br = m.bracket(&x, &h).unwrap();
            br.p_real()
        };
        images.push(nalgebra::DVector::from_vec(img));
    }
    let pd = m.p_dim();
    let pm = metric.view((kd, kd), (pd, pd)).into_owned();
    let gram = nalgebra::DMatrix::from_fn(kd, kd, |a, b| (images[a].transpose() * &pm * &images[b])[(0, 0)]);
    let eig = gram.symmetric_eigenvalues();
    let top = eig.max();
    eig.iter().filter(|&&v| v > 1e-9 * top).product()
}

#[test]
fn metric_determinant_examples() {
    let s2 = build_space("S2").unwrap();
    for r in [0.3, 1.1] {
        let a = alpha(&s2, &[r]);
        let flat = metric_determinant(&s2, &MetricProfile::Flat, &[r]).unwrap();
        assert!((flat - a * a).abs() < 1e-14);
        let hyp = metric_determinant(&s2, &MetricProfile::Hyperbolic, &[r]).unwrap();
        assert!((hyp - a.sinh().powi(2)).abs() < 1e-14);
    }
    let g2 = build_space("group:SU(2)").unwrap();
    let r = [0.8];
    let a = alpha(&g2, &r);
    let hyp = metric_determinant(&g2, &MetricProfile::Hyperbolic, &r).unwrap();
    assert!((hyp - a.sinh().powi(4)).abs() < 1e-13);
    assert!(matches!(
        metric_determinant(&s2, &MetricProfile::Flat, &[0.0]),
        Err(RadialError::ZeroDeterminant { .. })
    ));
}

#[test]
fn metric_determinant_matches_pullback() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for name in CATALOG {
        let s = build_space(name).unwrap();
        for r in random_chamber_points(&s, &mut rng, 3, 0.3, 1.2, 0.05) {
            for (profile, dual) in [(MetricProfile::Flat, false), (MetricProfile::Hyperbolic, true)] {
                let want = pulled_back_angular_det(&s, &r, dual);
                let got = metric_determinant(&s, &profile, &r).unwrap();
                assert!((got - want).abs() < 1e-10 * want.max(1.0), "{name} {dual}: {got} vs {want}");
            }
        }
    }
}

#[test]
fn root_normalization() {
    // Killing-orthonormal coordinates: alpha(A) = 1/sqrt(2) on S2, and the
    // A2 roots of SU(3)/SO(3) have length 1/sqrt(3)
    let s2 = build_space("S2").unwrap();
    assert!((s2.roots()[0].alpha[0] - 0.5f64.sqrt()).abs() < 1e-12);
    let a2 = build_space("SU(3)/SO(3)").unwrap();
    for root in a2.roots() {
        assert!((root.norm() - (1.0f64 / 3.0).sqrt()).abs() < 1e-12);
    }
}

#[test]
fn radial_hessian_examples() {
    let s2 = build_space("S2").unwrap();
    let q = Quadratic { rank: 1, scale: 1.0 };
    let r = [0.9];
    let a = alpha(&s2, &r);
    let flat = radial_hessian(&s2, &MetricProfile::Flat, &q, &r);
    assert!((flat.radial_block[(0, 0)] - 1.0).abs() < 1e-15);
    assert!((flat.angular_entries[0] - a * a).abs() < 1e-15);
    let hyp = radial_hessian(&s2, &MetricProfile::Hyperbolic, &q, &r);
    assert!((hyp.angular_entries[0] - a.sinh() * a.cosh() * a).abs() < 1e-14);
    let c = Quadratic { rank: 1, scale: 0.0 };
    let z = radial_hessian(&s2, &MetricProfile::Hyperbolic, &c, &r);
    assert!(z.determinant() == 0.0 && z.angular_entries[0] == 0.0);
}

#[test]
fn radial_hessian_matches_geodesic_oracle() {
    // angular entry / F = Riemannian Hessian on a unit angular vector
    let s2 = build_space("S2").unwrap();
    let q = Quadratic { rank: 1, scale: 1.0 };
    let r = [0.7];
    let st = GeodesicStencil::new(&s2, Geometry::Dual, &r, ORACLE_STEP);
    let h = st.hessian(&q);
    let rh = radial_hessian(&s2, &MetricProfile::Hyperbolic, &q, &r);
    let a = alpha(&s2, &r);
    let angular = rh.angular_entries[0] / a.sinh().powi(2);
    let eig = h.symmetric_eigenvalues();
    let mut got: Vec<f64> = eig.iter().copied().collect();
    got.sort_by(f64::total_cmp);
    let mut want = vec![1.0, angular];
    want.sort_by(f64::total_cmp);
    for (g, w) in got.iter().zip(&want) {
        assert!((g - w).abs() < 1e-7, "{got:?} vs {want:?}");
    }
}

#[test]
fn factor_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for name in CATALOG {
        let s = build_space(name).unwrap();
        for r in random_chamber_points(&s, &mut rng, 20, 0.0, 3.0, 0.0) {
            assert!((factor_f(&s, &MetricProfile::Flat, &r) - 1.0).abs() < 1e-12);
            assert!(factor_f(&s, &MetricProfile::Hyperbolic, &r) >= 1.0);
        }
        let zero = vec![0.0; s.rank()];
        assert_eq!(factor_f(&s, &MetricProfile::Hyperbolic, &zero), 1.0);
    }
    let s2 = build_space("S2").unwrap();
    let r = [1.3];
    let a = alpha(&s2, &r);
    assert!((factor_f(&s2, &MetricProfile::Hyperbolic, &r) - a / a.tanh()).abs() < 1e-14);
}

#[test]
fn euclidean_ma_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for name in CATALOG {
        let s = build_space(name).unwrap();
        let q = Quadratic { rank: s.rank(), scale: 1.0 };
        let c = Quadratic { rank: s.rank(), scale: 0.0 };
        for r in random_chamber_points(&s, &mut rng, 5, 0.1, 2.0, 0.01) {
            assert!((euclidean_ma_reduced(&s, &q, &r) - 1.0).abs() < 1e-13);
            assert_eq!(euclidean_ma_reduced(&s, &c, &r), 0.0);
        }
    }
    // S2, u = u(|r|): u'' u' / r
    let s2 = build_space("S2").unwrap();
    let u = ExprFunction::parse(&s2, "r2^2 + exp(r2)").unwrap();
    let r: f64 = 0.8;
    let up = 4.0 * r.powi(3) + 2.0 * r * (r * r).exp();
    let upp = 12.0 * r * r + (2.0 + 4.0 * r * r) * (r * r).exp();
    let got = euclidean_ma_reduced(&s2, &u, &[r]);
    assert!((got - upp * up / r).abs() < 1e-12 * got.abs());
    let flat = oracle::oracle_ma(&s2, &MetricProfile::Flat, &u, &[r]).unwrap();
    assert!((got - flat).abs() < 1e-6 * got.abs());
}

#[test]
fn symmetric_ma_examples() {
    let s2 = build_space("S2").unwrap();
    let u = ExprFunction::parse(&s2, "r2 + 0.3*r2^2").unwrap();
    let r = [0.9];
    let flat = symmetric_ma(&s2, &MetricProfile::Flat, &u, &r);
    assert_eq!(flat, euclidean_ma_reduced(&s2, &u, &r));
    let j = u.jet(&r);
    let a = alpha(&s2, &r);
    let want = j.h[0][0] * j.g[0] / r[0] * a / a.tanh();
    let got = symmetric_ma(&s2, &MetricProfile::Hyperbolic, &u, &r);
    assert!((got - want).abs() < 1e-13 * want);
    let det = radial_hessian(&s2, &MetricProfile::Hyperbolic, &u, &r).determinant()
        / metric_determinant(&s2, &MetricProfile::Hyperbolic, &r).unwrap();
    assert!((got - det).abs() < 1e-12 * got);
    let oracle = oracle::oracle_ma(&s2, &MetricProfile::Hyperbolic, &u, &r).unwrap();
    assert!((got - oracle).abs() < 1e-6 * (1.0 + oracle.abs()));
    // concave u: sign (-1)^{dim p}
    let s3 = build_space("S3").unwrap();
    let neg = Quadratic { rank: 1, scale: -1.0 };
    let v = symmetric_ma(&s3, &MetricProfile::Hyperbolic, &neg, &[0.5]);
    assert!(v < 0.0);
    let det = radial_hessian(&s3, &MetricProfile::Hyperbolic, &neg, &[0.5]).determinant();
    assert!(det < 0.0);
}

#[test]
fn convexity_examples() {
    let s2 = build_space("S2").unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let pts = random_chamber_points(&s2, &mut rng, 10, 0.1, 2.0, 0.0);
    let q = Quadratic { rank: 1, scale: 1.0 };
    let nq = Quadratic { rank: 1, scale: -1.0 };
    assert!(is_strictly_convex(&s2, &MetricProfile::Hyperbolic, &q, &pts).unwrap());
    assert!(!is_strictly_convex(&s2, &MetricProfile::Hyperbolic, &nq, &pts).unwrap());
    let quartic = ExprFunction::parse(&s2, "r2^2").unwrap();
    assert!(is_strictly_convex(&s2, &MetricProfile::Hyperbolic, &quartic, &pts).unwrap());
}

#[test]
fn ratio_to_flat_is_independent_of_u() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for name in ["S4", "SU(3)/SO(3)", "group:SU(3)"] {
        let s = build_space(name).unwrap();
        let r = random_chamber_points(&s, &mut rng, 1, 0.5, 1.0, 0.1).remove(0);
        let f = factor_f(&s, &MetricProfile::Hyperbolic, &r);
        for _ in 0..10 {
            let u = OrbitPolynomial::random(&s, &mut rng, 3.0);
            let ratio = symmetric_ma(&s, &MetricProfile::Hyperbolic, &u, &r)
                / euclidean_ma_reduced(&s, &u, &r);
            assert!((ratio - f).abs() < 1e-10 * f);
        }
    }
}

#[test]
fn wall_limit_is_continuous() {
    let s = build_space("SU(3)/SO(3)").unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let u = OrbitPolynomial::random(&s, &mut rng, 3.0);
    // point on the wall of the first simple root and a nearby interior point
    let simple = s.simple_roots()[0].alpha.clone();
    let along = [-simple[1], simple[0]];
    let n = (along[0] * along[0] + along[1] * along[1]).sqrt();
    let mut on = [along[0] / n * 0.7, along[1] / n * 0.7];
    if s.chamber().wall_margin(&on) < -1e-12 {
        on = [-on[0], -on[1]];
    }
    let near = [on[0] + 1e-5 * simple[0], on[1] + 1e-5 * simple[1]];
    let a = euclidean_ma_reduced(&s, &u, &on);
    let b = euclidean_ma_reduced(&s, &u, &near);
    assert!((a - b).abs() < 1e-6 * (1.0 + a.abs()), "{a} {b}");
}

#[test]
fn oracle_rejects_custom_profiles() {
    let s2 = build_space("S2").unwrap();
    let p = MetricProfile::custom("sin(z)^2", "2*sin(z)*cos(z)").unwrap();
    let q = Quadratic { rank: 1, scale: 1.0 };
    assert!(matches!(
        oracle::oracle_ma(&s2, &p, &q, &[0.5]),
        Err(RadialError::UnsupportedOracle)
    ));
}
