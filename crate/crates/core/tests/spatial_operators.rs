use approx::assert_relative_eq;
use fracwave::spatial_operators::*;
use proptest::prelude::*;
use std::f64::consts::PI;

fn dense(t: &fracwave::tridiag::Tridiag<f64>) -> nalgebra::DMatrix<f64> {
    let n = t.dim();
    let mut m = nalgebra::DMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = t.diag[i];
        if i + 1 < n {
            m[(i + 1, i)] = t.lower[i];
            m[(i, i + 1)] = t.upper[i];
        }
    }
    m
}

fn configs(g: &Grid1D) -> Vec<DampingConfig> {
    vec![
        DampingConfig::internal(g, Profile::Smooth { lo: 0.3, hi: 0.7, a0: 1.5, ramp: 0.1 }).unwrap(),
        DampingConfig::internal(g, Profile::Indicator { lo: 0.2, hi: 0.6, a0: 1.0 }).unwrap(),
        DampingConfig::kelvin_voigt(g, Profile::Smooth { lo: 0.3, hi: 0.7, a0: 2.0, ramp: 0.1 }).unwrap(),
        DampingConfig::pointwise(1.0 / 2f64.sqrt()).unwrap(),
        DampingConfig::pointwise(0.5).unwrap(),
        DampingConfig::pointwise(0.01).unwrap(),
    ]
}

#[test]
fn grid_rejects_small() {
    assert!(Grid1D::new(2).is_err());
    let g = Grid1D::new(9).unwrap();
    assert_relative_eq!(g.h() * 10.0, 1.0, max_relative = 1e-15);
}

#[test]
fn laplacian_spectrum_n3() {
    let g = Grid1D::new(3).unwrap();
    let l = dense(&laplacian_dirichlet(&g));
    assert_eq!(l, l.transpose());
    let mut ev: Vec<f64> = l.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    for (k, e) in ev.iter().enumerate() {
        let exact = 16.0 * 4.0 * ((k + 1) as f64 * PI / 8.0).sin().powi(2);
        assert_relative_eq!(*e, exact, max_relative = 1e-12);
    }
}

#[test]
fn smallest_eigenvalue_tends_to_pi_squared() {
    // Richardson extrapolation of the O(h^2) error over n = 50, 100, 200
    let lam = |n: usize| Grid1D::new(n).unwrap().eigenvalue(1);
    let h = |n: usize| 1.0 / (n as f64 + 1.0);
    let r1 = (lam(100) * h(50).powi(2) - lam(50) * h(100).powi(2)) / (h(50).powi(2) - h(100).powi(2));
    let r2 = (lam(200) * h(100).powi(2) - lam(100) * h(200).powi(2)) / (h(100).powi(2) - h(200).powi(2));
    assert!((r2 - PI * PI).abs() < (r1 - PI * PI).abs().max(1e-9));
    assert!((r2 - PI * PI).abs() < 1e-6);
}

#[test]
fn modes_orthonormal_and_eigen() {
    let g = Grid1D::new(20).unwrap();
    let l = laplacian_dirichlet(&g);
    for j in 1..=20 {
        let mj = continuum_modes(j, &g).unwrap();
        for k in 1..=20 {
            let mk = continuum_modes(k, &g).unwrap();
            let ip = g.inner(&mj, &mk);
            assert!((ip - if j == k { 1.0 } else { 0.0 }).abs() < 1e-13);
        }
        let mut out = vec![0.0; 20];
        l.mul_vec(&mj, &mut out);
        for i in 0..20 {
            assert!((out[i] - g.eigenvalue(j) * mj[i]).abs() < 1e-9 * g.eigenvalue(j));
        }
    }
    let m1 = continuum_modes(1, &g).unwrap();
    assert!(m1.iter().all(|&x| x > 0.0));
    assert!(continuum_modes(0, &g).is_err());
    assert!(continuum_modes(21, &g).is_err());
}

#[test]
fn bstar_examples() {
    let g = Grid1D::new(41).unwrap();
    for c in configs(&g) {
        let z = apply_bstar(&c, &g, &vec![0.0; 41]);
        assert!(z.iter().all(|&x| x == 0.0));
    }
    let p = DampingConfig::pointwise(0.5).unwrap();
    let m2 = continuum_modes(2, &g).unwrap();
    assert!(apply_bstar(&p, &g, &m2)[0].abs() < 1e-14);
    let one = DampingConfig::internal(&g, Profile::Constant { a0: 1.0 }).unwrap();
    let v: Vec<f64> = (0..41).map(|i| (i as f64).cos()).collect();
    assert_eq!(apply_bstar(&one, &g, &v), v);
    assert_eq!(apply_b(&one, &g, &v), v);
}

#[test]
fn pointwise_observes_mode_iff_sine_nonzero() {
    let g = Grid1D::new(199).unwrap();
    let p = DampingConfig::pointwise(0.25).unwrap();
    for k in 1..=12 {
        let m = continuum_modes(k, &g).unwrap();
        let b = apply_bstar(&p, &g, &m)[0].abs();
        let exact = (k as f64 * PI * 0.25).sin().abs() * (2.0f64).sqrt();
        assert!((b - exact).abs() < 1e-3, "k {k}");
    }
}

#[test]
fn kv_b_is_minus_divergence() {
    let g = Grid1D::new(10).unwrap();
    let kv = DampingConfig::kelvin_voigt(&g, Profile::Constant { a0: 4.0 }).unwrap();
    let w: Vec<f64> = (0..11).map(|i| (i * i) as f64).collect();
    let b = apply_b(&kv, &g, &w);
    for i in 0..10 {
        assert_relative_eq!(b[i], -2.0 * (w[i + 1] - w[i]) / g.h(), max_relative = 1e-14);
    }
}

#[test]
fn bbstar_matches_composition_and_is_psd() {
    let g = Grid1D::new(15).unwrap();
    for c in configs(&g) {
        let t = c.bbstar(&g).unwrap();
        let m = dense(&t);
        for k in 0..15 {
            let mut e = vec![0.0; 15];
            e[k] = 1.0;
            let col = apply_b(&c, &g, &apply_bstar(&c, &g, &e));
            for i in 0..15 {
                assert!((col[i] - m[(i, k)]).abs() < 1e-10 * (1.0 + m[(i, k)].abs()));
            }
        }
        assert_eq!(m, m.transpose());
        assert!(m.symmetric_eigenvalues().iter().all(|&e| e > -1e-9));
    }
}

#[test]
fn rejects_invalid_configs() {
    let g = Grid1D::new(10).unwrap();
    assert!(DampingConfig::pointwise(0.0).is_err());
    assert!(DampingConfig::pointwise(1.0).is_err());
    assert!(DampingConfig::internal(&g, Profile::Indicator { lo: 0.5, hi: 0.4, a0: 1.0 }).is_err());
    assert!(DampingConfig::internal(&g, Profile::Indicator { lo: 0.91, hi: 0.95, a0: 1.0 }).is_err());
    assert!(DampingConfig::internal(&g, Profile::Constant { a0: -1.0 }).is_err());
}

#[test]
fn control_dims() {
    let g = Grid1D::new(10).unwrap();
    let c = configs(&g);
    assert_eq!(c[0].control_dim(&g), 10);
    assert_eq!(c[2].control_dim(&g), 11);
    assert_eq!(c[3].control_dim(&g), 1);
}

proptest! {
    #[test]
    fn adjointness(seed in proptest::collection::vec(-1.0f64..1.0, 40), which in 0usize..6) {
        let g = Grid1D::new(19).unwrap();
        let c = configs(&g).remove(which);
        let m = c.control_dim(&g);
        let v = &seed[..19];
        let w: Vec<f64> = seed[19..].iter().cycle().take(m).copied().collect();
        let lhs = g.inner(&apply_b(&c, &g, &w), v);
        let bs = apply_bstar(&c, &g, v);
        let rhs = c.control_weight(&g) * bs.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()) * 100.0);
    }

    #[test]
    fn stiffness_energy_is_quadratic_form(u in proptest::collection::vec(-1.0f64..1.0, 12)) {
        let g = Grid1D::new(12).unwrap();
        let mut lu = vec![0.0; 12];
        apply_laplacian(&g, &u, &mut lu);
        let q = g.inner(&u, &lu);
        prop_assert!((q - stiffness_energy(&g, &u)).abs() <= 1e-12 * (1.0 + q));
    }
}
