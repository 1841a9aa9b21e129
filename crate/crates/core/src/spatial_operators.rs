//! Dirichlet Laplacian on (0, 1) and the three damping couplings B, B*.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tridiag::Tridiag;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    n: usize,
    h: f64,
}

impl Grid1D {
    pub fn new(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::Domain(format!("grid needs n >= 3 interior points, got {n}")));
        }
        Ok(Self { n, h: 1.0 / (n as f64 + 1.0) })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// x_i = i h, i = 1..=n.
    pub fn x(&self) -> Vec<f64> {
        (1..=self.n).map(|i| i as f64 * self.h).collect()
    }

    /// Cell midpoints (i + 1/2) h, i = 0..=n.
    pub fn midpoints(&self) -> Vec<f64> {
        (0..=self.n).map(|i| (i as f64 + 0.5) * self.h).collect()
    }

    /// Stencil eigenvalue (4/h^2) sin^2(k pi h / 2).
    pub fn eigenvalue(&self, k: usize) -> f64 {
        let s = (k as f64 * PI * self.h / 2.0).sin();
        4.0 * s * s / (self.h * self.h)
    }

    pub fn frequency(&self, k: usize) -> f64 {
        self.eigenvalue(k).sqrt()
    }

    pub fn nyquist(&self) -> f64 {
        PI / self.h
    }

    pub fn inner<T: Scalar>(&self, a: &[T], b: &[T]) -> f64 {
        self.h * a.iter().zip(b).map(|(&x, &y)| x.re_dot(y)).sum::<f64>()
    }
}

/// (1/h^2) tridiag(-1, 2, -1).
pub fn laplacian_dirichlet(grid: &Grid1D) -> Tridiag<f64> {
    let n = grid.n();
    let s = 1.0 / (grid.h() * grid.h());
    Tridiag { lower: vec![-s; n - 1], diag: vec![2.0 * s; n], upper: vec![-s; n - 1] }
}

/// Difference of first differences; smooth u loses far less to cancellation
/// than 2 u_i - u_{i-1} - u_{i+1}.
pub fn apply_laplacian<T: Scalar>(grid: &Grid1D, u: &[T], out: &mut [T]) {
    let n = grid.n();
    let s = 1.0 / (grid.h() * grid.h());
    // backward difference u_i - u_{i-1}, with zero boundary values
    let mut back = u[0];
    for i in 0..n {
        let next = if i + 1 < n { u[i + 1] - u[i] } else { -u[i] };
        out[i] = (back - next) * s;
        back = next;
    }
}

/// h u^T L u computed as sum of squared differences, so it is exactly nonnegative.
pub fn stiffness_energy<T: Scalar>(grid: &Grid1D, u: &[T]) -> f64 {
    let n = grid.n();
    let mut acc = 0.0;
    for i in 0..=n {
        let left = if i == 0 { T::zero() } else { u[i - 1] };
        let right = if i == n { T::zero() } else { u[i] };
        let d = right - left;
        acc += d.re_dot(d);
    }
    acc / grid.h()
}

/// sin(k pi x_i), normalized to unit h-weighted norm.
pub fn continuum_modes(k: usize, grid: &Grid1D) -> Result<Vec<f64>> {
    if k == 0 || k > grid.n() {
        return Err(Error::IndexOutOfRange { index: k, max: grid.n() });
    }
    let mut v: Vec<f64> = grid.x().iter().map(|x| (k as f64 * PI * x).sin()).collect();
    let norm = grid.inner(&v, &v).sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    Ok(v)
}

/// Damping coefficient profile on (0, 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Profile {
    /// a0 on [lo, hi], zero elsewhere.
    Indicator { lo: f64, hi: f64, a0: f64 },
    /// a0 on [lo, hi], falling to zero over `ramp` by a quintic smoothstep.
    Smooth { lo: f64, hi: f64, a0: f64, ramp: f64 },
    Constant { a0: f64 },
}

fn smoothstep(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
}

impl Profile {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Profile::Indicator { lo, hi, a0 } => {
                if (lo..=hi).contains(&x) {
                    a0
                } else {
                    0.0
                }
            }
            Profile::Smooth { lo, hi, a0, ramp } => {
                if x < lo {
                    a0 * smoothstep((x - (lo - ramp)) / ramp)
                } else if x > hi {
                    a0 * smoothstep(((hi + ramp) - x) / ramp)
                } else {
                    a0
                }
            }
            Profile::Constant { a0 } => a0,
        }
    }

    /// Subinterval on which a >= a0.
    pub fn support(&self) -> (f64, f64, f64) {
        match *self {
            Profile::Indicator { lo, hi, a0 } | Profile::Smooth { lo, hi, a0, .. } => (lo, hi, a0),
            Profile::Constant { a0 } => (0.0, 1.0, a0),
        }
    }

    fn validate(&self) -> Result<()> {
        let (lo, hi, a0) = self.support();
        if !(a0 > 0.0 && 0.0 <= lo && lo < hi && hi <= 1.0) {
            return Err(Error::Domain(format!(
                "damping profile needs a0 > 0 and 0 <= lo < hi <= 1, got a0={a0}, [{lo}, {hi}]"
            )));
        }
        if let Profile::Smooth { ramp, .. } = *self {
            if !(ramp > 0.0) {
                return Err(Error::Domain(format!("ramp width must be positive, got {ramp}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DampingConfig {
    /// a sampled at the grid nodes.
    Internal { a: Vec<f64>, support: (f64, f64, f64) },
    /// a sampled at the n + 1 cell midpoints.
    KelvinVoigt { a: Vec<f64>, support: (f64, f64, f64) },
    Pointwise { zeta: f64 },
}

impl DampingConfig {
    pub fn internal(grid: &Grid1D, profile: Profile) -> Result<Self> {
        profile.validate()?;
        let a = grid.x().iter().map(|&x| profile.eval(x)).collect();
        Self::check_samples(DampingConfig::Internal { a, support: profile.support() })
    }

    pub fn kelvin_voigt(grid: &Grid1D, profile: Profile) -> Result<Self> {
        profile.validate()?;
        let a = grid.midpoints().iter().map(|&x| profile.eval(x)).collect();
        Self::check_samples(DampingConfig::KelvinVoigt { a, support: profile.support() })
    }

    pub fn pointwise(zeta: f64) -> Result<Self> {
        if !(zeta > 0.0 && zeta < 1.0) {
            return Err(Error::Domain(format!("zeta must lie in (0, 1), got {zeta}")));
        }
        Ok(DampingConfig::Pointwise { zeta })
    }

    /// No damping at all; a is identically zero on the nodes.
    pub fn undamped(grid: &Grid1D) -> Self {
        DampingConfig::Internal { a: vec![0.0; grid.n()], support: (0.0, 0.0, 0.0) }
    }

    fn check_samples(c: Self) -> Result<Self> {
        if let DampingConfig::Internal { a, .. } | DampingConfig::KelvinVoigt { a, .. } = &c {
            if a.iter().any(|&v| !(v >= 0.0 && v.is_finite())) {
                return Err(Error::Domain("damping coefficient must be finite and >= 0".into()));
            }
            if a.iter().all(|&v| v == 0.0) {
                return Err(Error::Domain("damping coefficient has empty support on the grid".into()));
            }
        }
        Ok(c)
    }

    /// Dimension m of the discrete control space.
    pub fn control_dim(&self, grid: &Grid1D) -> usize {
        match self {
            DampingConfig::Internal { .. } => grid.n(),
            DampingConfig::KelvinVoigt { .. } => grid.n() + 1,
            DampingConfig::Pointwise { .. } => 1,
        }
    }

    /// Weight of the control-space inner product.
    pub fn control_weight(&self, grid: &Grid1D) -> f64 {
        match self {
            DampingConfig::Pointwise { .. } => 1.0,
            _ => grid.h(),
        }
    }

    fn check_grid(&self, grid: &Grid1D) -> Result<()> {
        let ok = match self {
            DampingConfig::Internal { a, .. } => a.len() == grid.n(),
            DampingConfig::KelvinVoigt { a, .. } => a.len() == grid.n() + 1,
            DampingConfig::Pointwise { .. } => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::DimensionMismatch("damping samples do not match the grid".into()))
        }
    }

    /// Interpolation cell of zeta: (i, theta) with zeta = x_i + theta h, x_0 = 0.
    fn cell(zeta: f64, grid: &Grid1D) -> (usize, f64) {
        let s = zeta / grid.h();
        let i = (s.floor() as usize).min(grid.n());
        (i, s - i as f64)
    }

    pub fn apply_bstar<T: Scalar>(&self, grid: &Grid1D, v: &[T], out: &mut [T]) {
        let n = grid.n();
        match self {
            DampingConfig::Internal { a, .. } => {
                for i in 0..n {
                    out[i] = v[i] * a[i].sqrt();
                }
            }
            DampingConfig::KelvinVoigt { a, .. } => {
                let h = grid.h();
                for m in 0..=n {
                    let right = if m < n { v[m] } else { T::zero() };
                    let left = if m > 0 { v[m - 1] } else { T::zero() };
                    out[m] = (right - left) * (a[m].sqrt() / h);
                }
            }
            DampingConfig::Pointwise { zeta } => {
                let (i, th) = Self::cell(*zeta, grid);
                // node i sits at vector index i - 1
                let left = if i >= 1 { v[i - 1] * (1.0 - th) } else { T::zero() };
                let right = if i < n { v[i] * th } else { T::zero() };
                out[0] = left + right;
            }
        }
    }

    pub fn apply_b<T: Scalar>(&self, grid: &Grid1D, w: &[T], out: &mut [T]) {
        let n = grid.n();
        match self {
            DampingConfig::Internal { a, .. } => {
                for i in 0..n {
                    out[i] = w[i] * a[i].sqrt();
                }
            }
            DampingConfig::KelvinVoigt { a, .. } => {
                let h = grid.h();
                for i in 0..n {
                    out[i] = (w[i] * a[i].sqrt() - w[i + 1] * a[i + 1].sqrt()) / h;
                }
            }
            DampingConfig::Pointwise { zeta } => {
                out.iter_mut().for_each(|x| *x = T::zero());
                let (i, th) = Self::cell(*zeta, grid);
                let s = 1.0 / grid.h();
                if i >= 1 {
                    out[i - 1] = w[0] * ((1.0 - th) * s);
                }
                if i < n {
                    out[i] = w[0] * (th * s);
                }
            }
        }
    }

    /// B B* as a tridiagonal matrix on the grid.
    pub fn bbstar(&self, grid: &Grid1D) -> Result<Tridiag<f64>> {
        self.check_grid(grid)?;
        let n = grid.n();
        let mut t = Tridiag::<f64>::zeros(n);
        match self {
            DampingConfig::Internal { a, .. } => t.diag.copy_from_slice(a),
            DampingConfig::KelvinVoigt { a, .. } => {
                let s = 1.0 / (grid.h() * grid.h());
                for i in 0..n {
                    t.diag[i] = (a[i] + a[i + 1]) * s;
                }
                for i in 0..n - 1 {
                    t.lower[i] = -a[i + 1] * s;
                    t.upper[i] = -a[i + 1] * s;
                }
            }
            DampingConfig::Pointwise { zeta } => {
                let (i, th) = Self::cell(*zeta, grid);
                let s = 1.0 / grid.h();
                if i >= 1 {
                    t.diag[i - 1] = (1.0 - th) * (1.0 - th) * s;
                }
                if i < n {
                    t.diag[i] = th * th * s;
                }
                if i >= 1 && i < n {
                    t.lower[i - 1] = th * (1.0 - th) * s;
                    t.upper[i - 1] = th * (1.0 - th) * s;
                }
            }
        }
        Ok(t)
    }
}

pub fn apply_bstar<T: Scalar>(config: &DampingConfig, grid: &Grid1D, v: &[T]) -> Vec<T> {
    let mut out = vec![T::zero(); config.control_dim(grid)];
    config.apply_bstar(grid, v, &mut out);
    out
}

pub fn apply_b<T: Scalar>(config: &DampingConfig, grid: &Grid1D, w: &[T]) -> Vec<T> {
    let mut out = vec![T::zero(); grid.n()];
    config.apply_b(grid, w, &mut out);
    out
}
