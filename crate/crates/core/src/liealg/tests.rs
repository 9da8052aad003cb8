use super::matfun::{self, CMat, C64};
use super::*;
use nalgebra::DVector;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn unit(n: usize, i: usize, j: usize, v: C64) -> CMat {
    let mut m = CMat::zeros(n, n);
    m[(i, j)] = v;
    m
}

/// su(2) with `k = so(2)` and `p` the imaginary symmetric traceless part.
fn su2() -> MatrixModel {
    let k = vec![unit(2, 0, 1, C64::new(1.0, 0.0)) - unit(2, 1, 0, C64::new(1.0, 0.0))];
    let p = vec![
        unit(2, 0, 1, C64::new(0.0, 1.0)) + unit(2, 1, 0, C64::new(0.0, 1.0)),
        unit(2, 0, 0, C64::new(0.0, 1.0)) - unit(2, 1, 1, C64::new(0.0, 1.0)),
    ];
    MatrixModel::new(2, k, p, Involution::InverseTranspose, 0..2).unwrap()
}

/// su(3) with `k = so(3)`.
fn su3() -> MatrixModel {
    let n = 3;
    let mut k = Vec::new();
    let mut p = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            k.push(unit(n, i, j, C64::new(1.0, 0.0)) - unit(n, j, i, C64::new(1.0, 0.0)));
            p.push(unit(n, i, j, C64::new(0.0, 1.0)) + unit(n, j, i, C64::new(0.0, 1.0)));
        }
    }
    for d in 0..n - 1 {
        p.push(unit(n, d, d, C64::new(0.0, 1.0)) - unit(n, d + 1, d + 1, C64::new(0.0, 1.0)));
    }
    MatrixModel::new(n, k, p, Involution::InverseTranspose, 0..n).unwrap()
}

fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[test]
fn exp_of_zero_is_identity() {
    let m = su2();
    let e = m.exp_matrix(&m.zero(), 1.0);
    assert!(max_abs(&(e.matrix - CMat::identity(2, 2))) == 0.0);
}

#[test]
fn exp_pauli_direction_at_pi_is_minus_identity() {
    // i*sigma_z has eigenvalues +-i, so exp(pi i sigma_z) = -I
    let h = unit(2, 0, 0, C64::new(0.0, 1.0)) - unit(2, 1, 1, C64::new(0.0, 1.0));
    let e = matfun::expm(&(&h * C64::new(std::f64::consts::PI, 0.0)));
    assert!(max_abs(&(e + CMat::identity(2, 2))) < 1e-14);
    // compare with the eigendecomposition oracle on a non-diagonal element
    let m = su2();
    let x = m.real_element(&[0.3, -0.7, 0.4]);
    let herm = &x.matrix * C64::new(0.0, -1.0);
    let (vals, vecs) = matfun::herm_eigen(&herm);
    let d = CMat::from_diagonal(&DVector::from_iterator(
        2,
        vals.iter().map(|v| C64::new(0.0, v * std::f64::consts::PI).exp()),
    ));
    let oracle = &vecs * d * vecs.adjoint();
    let e = m.exp_matrix(&x, std::f64::consts::PI);
    assert_eq!(e.tag, GroupTag::Compact);
    assert!(max_abs(&(e.matrix - oracle)) < 1e-13);
}

#[test]
fn exp_inverse() {
    let m = su3();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..10 {
        let x = m.random_real(&mut rng, 1.5);
        let a = m.exp_matrix(&x, 1.0);
        let b = m.exp_matrix(&x, -1.0);
        assert!(max_abs(&(a.matrix * b.matrix - CMat::identity(3, 3))) < 1e-12);
    }
}

#[test]
fn bracket_basics() {
    let m = su3();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let x = m.random_real(&mut rng, 1.0);
    assert!(m.bracket(&x, &x).unwrap().coeff_norm() < 1e-14);
    let k = m.random_k(&mut rng, 1.0);
    let p = m.random_p(&mut rng, 1.0);
    let kp = m.bracket(&k, &p).unwrap();
    assert!(kp.k_coeffs().iter().all(|z| z.norm() < 1e-14));
}

#[test]
fn bracket_rejects_out_of_span() {
    let m = su2();
    let bad = CMat::identity(2, 2);
    assert!(matches!(m.project(&bad), Err(LieError::NotInSpan { .. })));
}

#[test]
fn cartan_relations_on_full_basis() {
    for m in [su2(), su3()] {
        let n = m.dim();
        for i in 0..n {
            for j in 0..n {
                let mut ci = vec![0.0; n];
                ci[i] = 1.0;
                let mut cj = vec![0.0; n];
                cj[j] = 1.0;
                let br = m.bracket(&m.real_element(&ci), &m.real_element(&cj)).unwrap();
                let same = (i < m.k_dim()) == (j < m.k_dim());
                let leak = if same { br.p_coeffs() } else { br.k_coeffs() };
                assert!(leak.iter().all(|z| z.norm() < 1e-12), "({i},{j})");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn jacobi_and_antisymmetry(c in proptest::collection::vec(-2.0f64..2.0, 24)) {
        let m = su3();
        let x = m.real_element(&c[0..8]);
        let y = m.real_element(&c[8..16]);
        let z = m.real_element(&c[16..24]);
        let xy = m.bracket(&x, &y).unwrap();
        let yx = m.bracket(&y, &x).unwrap();
        prop_assert!(xy.add(&yx).coeff_norm() < 1e-12);
        let j = m.bracket(&x, &m.bracket(&y, &z).unwrap()).unwrap()
            .add(&m.bracket(&y, &m.bracket(&z, &x).unwrap()).unwrap())
            .add(&m.bracket(&z, &xy).unwrap());
        prop_assert!(j.coeff_norm() < 1e-12);
    }
}

#[test]
fn killing_form_matches_trace_formula_on_su2() {
    // full su(2) basis
    let s = |i, j, v| unit(2, i, j, v);
    let k = vec![
        s(0, 1, C64::new(1.0, 0.0)) - s(1, 0, C64::new(1.0, 0.0)),
    ];
    let p = vec![
        s(0, 1, C64::new(0.0, 1.0)) + s(1, 0, C64::new(0.0, 1.0)),
        s(0, 0, C64::new(0.0, 1.0)) - s(1, 1, C64::new(0.0, 1.0)),
    ];
    let m = MatrixModel::new(2, k, p, Involution::InverseTranspose, 0..2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let x = m.random_real(&mut rng, 1.0);
        let y = m.random_real(&mut rng, 1.0);
        let b = m.killing_form(&x, &y);
        let tr = (&x.matrix * &y.matrix).trace().re * 4.0;
        assert!((b - tr).abs() < 1e-12, "{b} vs {tr}");
    }
    assert_eq!(m.killing_form(&m.zero(), &m.random_real(&mut rng, 1.0)), 0.0);
}

#[test]
fn killing_positive_on_ip() {
    let m = su3();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..20 {
        let ip = m.random_p(&mut rng, 1.0).times_i();
        assert!(m.killing_form(&ip, &ip) > 0.0);
    }
}

fn conj_oracle(p: &AlgebraElement, u: &AlgebraElement) -> CMat {
    let e_minus = matfun::expm(&(&p.matrix * C64::new(0.0, -1.0)));
    let e_plus = matfun::expm(&(&p.matrix * C64::new(0.0, 1.0)));
    e_minus * &u.matrix * e_plus
}

fn random_pc(m: &MatrixModel, rng: &mut ChaCha8Rng) -> AlgebraElement {
    m.random_p(rng, 1.0).add(&m.random_p(rng, 1.0).times_i())
}

#[test]
fn ad_cosh_sinh_examples() {
    let m = su3();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let u = random_pc(&m, &mut rng);
    let split = m.ad_cosh_sinh(&m.zero(), &u).unwrap();
    assert!(split.cosh_part.sub(&u).coeff_norm() < 1e-14);
    assert!(split.sinh_part.coeff_norm() < 1e-14);

    for _ in 0..100 {
        let p = m.random_p(&mut rng, 0.8);
        let u = random_pc(&m, &mut rng);
        let split = m.ad_cosh_sinh(&p, &u).unwrap();
        let sum = split.cosh_part.add(&split.sinh_part);
        let oracle = conj_oracle(&p, &u);
        assert!(max_abs(&(sum.matrix - oracle)) < 1e-11);
        // cosh eigenvalues are >= 1, so the cosh part pairs nontrivially with u
        let real_u = m.random_p(&mut rng, 1.0);
        let sp = m.ad_cosh_sinh(&p, &real_u).unwrap();
        let b = -m.killing_form(&sp.cosh_part, &real_u);
        let bu = -m.killing_form(&real_u, &real_u);
        assert!(b >= bu * (1.0 - 1e-12));
    }
}

#[test]
fn ad_cosh_sinh_rejects_k_input() {
    let m = su3();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let p = m.random_p(&mut rng, 1.0);
    let k = m.random_k(&mut rng, 1.0);
    assert!(m.ad_cosh_sinh(&p, &k).is_err());
    assert!(m.ad_cosh_sinh(&k, &p).is_err());
}

#[test]
fn solve_cosh_ad_round_trip_and_dense_oracle() {
    let m = su2();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let c = m.random_k(&mut rng, 1.0);
    let q = m.solve_cosh_ad(&m.zero(), &c).unwrap();
    assert!(q.sub(&c).coeff_norm() < 1e-14);
    for _ in 0..20 {
        let p = m.random_p(&mut rng, 1.2);
        let c = m.random_k(&mut rng, 1.0).add(&m.random_k(&mut rng, 1.0).times_i());
        let q = m.solve_cosh_ad(&p, &c).unwrap();
        let back = m.cosh_ad(&p, &q).unwrap();
        assert!(back.sub(&c).coeff_norm() < 1e-11);
        // dense oracle: cosh(ad ip) = (Ad(e^{ip}) + Ad(e^{-ip}))/2 applied to basis
        let kd = m.k_dim();
        let mut dense = nalgebra::DMatrix::<C64>::zeros(kd, kd);
        for j in 0..kd {
            let mut e = vec![0.0; kd];
            e[j] = 1.0;
            let bj = m.k_element(&e);
            let a = conj_oracle(&p, &bj);
            let b = conj_oracle(&p.scale(C64::new(-1.0, 0.0)), &bj);
            let img = m.project(&((a + b) * C64::new(0.5, 0.0))).unwrap();
            for i in 0..kd {
                dense[(i, j)] = img.coeffs[i];
            }
        }
        let sol = dense.lu().solve(&c.k_coeffs()).unwrap();
        assert!((sol - q.k_coeffs()).norm() < 1e-11);
    }
}

#[test]
fn polar_examples() {
    let m = su3();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let g = m.exp_matrix(&m.random_real(&mut rng, 1.0), 1.0);
    let pd = m.polar_decompose(&g).unwrap();
    assert!(pd.y.coeff_norm() < 1e-10);
    assert!(max_abs(&(pd.g.matrix - g.matrix)) < 1e-10);

    let p = m.random_p(&mut rng, 0.7);
    let x = m.exp_matrix(&p.times_i(), 1.0);
    assert_eq!(x.tag, GroupTag::Dual);
    let pd = m.polar_decompose(&x).unwrap();
    assert!(max_abs(&(pd.g.matrix - CMat::identity(3, 3))) < 1e-10);
    assert!(pd.y.sub(&p).coeff_norm() < 1e-10);

    for _ in 0..20 {
        let a = m.random_real(&mut rng, 0.3);
        let b = m.random_real(&mut rng, 0.3);
        let x = m.exp_matrix(&a.add(&b.times_i()), 1.0);
        let pd = m.polar_decompose(&x).unwrap();
        assert!(pd.residual < 1e-10);
        let recon = &pd.g.matrix * matfun::expm(&(&pd.y.matrix * C64::new(0.0, 1.0)));
        assert!(max_abs(&(recon - &x.matrix)) < 1e-10);
        // re-decomposing g e^{iy} gives the same pair
        let again = m.polar_decompose(&GroupElement { matrix: &pd.g.matrix * matfun::expm(&(&pd.y.matrix * C64::new(0.0, 1.0))), tag: GroupTag::Complex }).unwrap();
        assert!(again.y.sub(&pd.y).coeff_norm() < 1e-10);
    }
}

#[test]
fn cartan_star_examples() {
    let m = su3();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let p = m.random_p(&mut rng, 0.9);
    let x = m.exp_matrix(&p.times_i(), 1.0);
    let cd = m.cartan_decompose_star(&x).unwrap();
    assert!(cd.z.sub(&p).coeff_norm() < 1e-10);
    assert!(max_abs(&(cd.k.matrix - CMat::identity(3, 3))) < 1e-10);

    let k = m.exp_matrix(&m.random_k(&mut rng, 1.0), 1.0);
    let x = GroupElement {
        matrix: &k.matrix * &x.matrix,
        tag: GroupTag::Dual,
    };
    let cd = m.cartan_decompose_star(&x).unwrap();
    assert!(cd.residual < 1e-10);
    assert!(cd.z.sub(&p).coeff_norm() < 1e-10);
    assert!(max_abs(&(cd.k.matrix - k.matrix)) < 1e-10);

    let not_dual = m.exp_matrix(&m.random_p(&mut rng, 1.0), 1.0);
    assert!(m.cartan_decompose_star(&not_dual).is_err());
}

#[test]
fn cartan_star_matches_hyperbolic_plane_closed_form() {
    // SU(1,1)-type picture for SL(2,R)/SO(2): x = k e^{iz}, the hyperbolic
    // distance of x.i from i equals 2|z| in units where the Killing norm of
    // the p-generator is normalized by tr(z^2)
    let m = su2();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..10 {
        let k = m.exp_matrix(&m.random_k(&mut rng, 1.0), 1.0);
        let p = m.random_p(&mut rng, 1.0);
        let g = &k.matrix * matfun::expm(&(&p.matrix * C64::new(0.0, 1.0)));
        // g is real in SL(2,R) since ip is real symmetric
        let gr = g.map(|z| z.re);
        assert!(g.iter().all(|z| z.im.abs() < 1e-12));
        // closed form: singular values of g are e^{+-s}, s = geodesic radius
        let sv = gr.singular_values();
        let s = sv.max().ln();
        let cd = m.cartan_decompose_star(&GroupElement { matrix: g, tag: GroupTag::Dual }).unwrap();
        let iz = &cd.z.matrix * C64::new(0.0, 1.0);
        let eig = matfun::herm_eigenvalues(&iz);
        let top = eig.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        assert!((top - s).abs() < 1e-11, "{top} vs {s}");
    }
}

#[test]
fn membership_residuals() {
    let m = su3();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let g = m.exp_matrix(&m.random_real(&mut rng, 1.0), 1.0);
    assert!(m.membership_residual(&g.matrix, GroupTag::Compact) < 1e-10);
    let d = m.exp_matrix(&m.random_k(&mut rng, 1.0).add(&m.random_p(&mut rng, 1.0).times_i()), 1.0);
    assert_eq!(d.tag, GroupTag::Dual);
    assert!(m.membership_residual(&d.matrix, GroupTag::Dual) < 1e-10);
    assert!(m.membership_residual(&d.matrix, GroupTag::Compact) > 1e-3);
}
