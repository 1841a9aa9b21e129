//! Gauss rules and adaptive Gauss–Kronrod integration.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use statrs::function::gamma::ln_gamma;

/// Gauss–Jacobi rule on [-1, 1] for the weight (1-x)^a (1+x)^b, via Golub–Welsch.
/// Nodes are returned in increasing order.
pub fn gauss_jacobi(n: usize, a: f64, b: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 {
        return Err(Error::Domain("gauss_jacobi needs n >= 1".into()));
    }
    if a <= -1.0 || b <= -1.0 {
        return Err(Error::Domain(format!("jacobi parameters must exceed -1, got ({a}, {b})")));
    }
    let ab = a + b;
    let mut j = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        let kf = k as f64;
        let diag = if k == 0 {
            (b - a) / (ab + 2.0)
        } else {
            (b * b - a * a) / ((2.0 * kf + ab) * (2.0 * kf + ab + 2.0))
        };
        j[(k, k)] = diag;
        if k + 1 < n {
            let m = kf + 1.0;
            let s = 2.0 * m + ab;
            let num = 4.0 * m * (m + a) * (m + b) * (m + ab);
            let den = s * s * (s + 1.0) * (s - 1.0);
            let off = (num / den).sqrt();
            j[(k, k + 1)] = off;
            j[(k + 1, k)] = off;
        }
    }
    let mu0 = ((ab + 1.0) * std::f64::consts::LN_2 + ln_gamma(a + 1.0) + ln_gamma(b + 1.0)
        - ln_gamma(ab + 2.0))
    .exp();
    let eig = SymmetricEigen::new(j);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|k| (eig.eigenvalues[k], mu0 * eig.eigenvectors[(0, k)].powi(2)))
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    Ok(pairs.into_iter().unzip())
}

pub fn gauss_legendre(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    gauss_jacobi(n, 0.0, 0.0)
}

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for k in 0..7 {
        let dx = h * XGK[k];
        let s = f(c - dx) + f(c + dx);
        kron += s * WGK[k];
        if k % 2 == 1 {
            gauss += s * WG[k / 2];
        }
    }
    (kron * h, ((kron - gauss) * h).norm())
}

/// Adaptive Gauss–Kronrod (7/15) integration of a complex integrand on [a, b].
/// Endpoints are never evaluated, so integrable endpoint singularities are allowed.
pub fn integrate_adaptive<F: Fn(f64) -> Complex64>(
    f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    max_intervals: usize,
) -> Result<Complex64> {
    let (v, e) = gk15(&f, a, b);
    let mut intervals = vec![(a, b, v, e)];
    loop {
        let total: Complex64 = intervals.iter().map(|x| x.2).sum();
        let err: f64 = intervals.iter().map(|x| x.3).sum();
        if err <= rel_tol * total.norm().max(1e-300) {
            return Ok(total);
        }
        if intervals.len() >= max_intervals {
            return Err(Error::NoConvergence(format!(
                "adaptive quadrature: error {err:.3e} for |I| = {:.3e}",
                total.norm()
            )));
        }
        let (idx, _) = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("nonempty");
        let (lo, hi, _, _) = intervals.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        intervals.push((lo, mid, v1, e1));
        intervals.push((mid, hi, v2, e2));
    }
}
