//! Quermassintegrals of star-shaped spacelike hypersurfaces in de Sitter
//! space, their radial-slice closed forms and the isoperimetric gap.
//!
//! ```text
//! A_{-1} = Vol        = int_{S^n} int_0^rho cosh^n r dr d sigma
//! A_0    = |M|
//! A_1    = int sigma_1 - n Vol
//! A_m    = int sigma_m - (n-m+1)/(m-1) A_{m-2},   2 <= m <= n
//! ```

use thiserror::Error;

use crate::geometry::{geometry_field, GeometryError, PointGeometry, RadialGraph};
use crate::quadrature::{gl16_integrate, sphere_area};
use crate::symfunc::binomial;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuermassError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("area {a} is below the smallest slice area {min}")]
    Domain { a: f64, min: f64 },
    #[error("index {m} outside {lo}..={hi}")]
    Index { m: isize, lo: isize, hi: isize },
}

/// `int_0^rho cosh^n r dr`, one GL16 panel per unit length.
pub fn cosh_power_integral(n: usize, rho: f64) -> f64 {
    let panels = rho.abs().ceil().max(1.0) as usize;
    let step = rho / panels as f64;
    let p = n as i32;
    (0..panels)
        .map(|i| {
            let a = i as f64 * step;
            gl16_integrate(a, a + step, |r| r.cosh().powi(p))
        })
        .sum()
}

/// Lorentzian volume between the equator slice `r = 0` and `M`.
pub fn enclosed_volume(m: &RadialGraph) -> f64 {
    let n = m.n();
    let inner: Vec<f64> = m.rho().iter().map(|&r| cosh_power_integral(n, r)).collect();
    m.grid().integrate(&inner)
}

fn integrate_points(
    m: &RadialGraph,
    pts: &[PointGeometry],
    f: impl Fn(&PointGeometry) -> f64,
) -> f64 {
    let vals: Vec<f64> = pts.iter().map(|p| f(p) * p.area_weight).collect();
    m.grid().integrate(&vals)
}

fn check_order(m: usize, n: usize) -> Result<(), QuermassError> {
    if m > n {
        return Err(QuermassError::Index {
            m: m as isize,
            lo: 0,
            hi: n as isize,
        });
    }
    Ok(())
}

/// `int_M sigma_m(kappa) d mu_g`.
pub fn curvature_integral(m: &RadialGraph, order: usize) -> Result<f64, QuermassError> {
    check_order(order, m.n())?;
    let pts = geometry_field(m)?;
    Ok(integrate_points(m, &pts, |p| p.sigma(order)))
}

/// `int u sigma_{m+1} - (n-m)/(m+1) int phi' sigma_m`, zero on closed `M`.
pub fn hsiung_minkowski_residual(m: &RadialGraph, order: usize) -> Result<f64, QuermassError> {
    let n = m.n();
    if order >= n {
        return Err(QuermassError::Index {
            m: order as isize,
            lo: 0,
            hi: n as isize - 1,
        });
    }
    let pts = geometry_field(m)?;
    Ok(hm_from_points(m, &pts, order))
}

fn hm_from_points(m: &RadialGraph, pts: &[PointGeometry], order: usize) -> f64 {
    let n = m.n();
    let c = (n - order) as f64 / (order + 1) as f64;
    integrate_points(m, pts, |p| {
        p.u * p.sigma(order + 1) - c * p.dphi * p.sigma(order)
    })
}

/// Applies the recursion to `int sigma_m` (index `m`) and `Vol`.
pub fn quermass_from_integrals(n: usize, volume: f64, sigma_integrals: &[f64]) -> Vec<f64> {
    assert_eq!(sigma_integrals.len(), n + 1);
    // a[m + 1] holds A_m
    let mut a = vec![0.0; n + 2];
    a[0] = volume;
    a[1] = sigma_integrals[0];
    a[2] = sigma_integrals[1] - n as f64 * volume;
    for m in 2..=n {
        let c = (n - m + 1) as f64 / (m - 1) as f64;
        a[m + 1] = sigma_integrals[m] - c * a[m - 1];
    }
    a
}

/// All quermassintegrals of `M` plus Hsiung-Minkowski residuals and the gap.
#[derive(Debug, Clone, PartialEq)]
pub struct QuermassReport {
    pub n: usize,
    /// `a[m + 1] = A_m` for `m = -1..=n`
    pub a: Vec<f64>,
    /// `hm_residual[m]` for `m = 0..n`
    pub hm_residual: Vec<f64>,
    /// `xi(A_0) - A_2`; `None` when `A_0` is below the slice minimum
    pub gap: Option<f64>,
}

impl QuermassReport {
    /// `A_m` for `-1 <= m <= n`.
    pub fn get(&self, m: isize) -> f64 {
        self.a[(m + 1) as usize]
    }

    pub fn volume(&self) -> f64 {
        self.a[0]
    }

    pub fn area(&self) -> f64 {
        self.a[1]
    }
}

pub fn quermass_all(m: &RadialGraph) -> Result<QuermassReport, QuermassError> {
    let pts = geometry_field(m)?;
    Ok(quermass_from_points(m, &pts))
}

/// As [`quermass_all`] with the geometry already evaluated.
pub fn quermass_from_points(m: &RadialGraph, pts: &[PointGeometry]) -> QuermassReport {
    let n = m.n();
    let sig: Vec<f64> = (0..=n)
        .map(|j| integrate_points(m, pts, |p| p.sigma(j)))
        .collect();
    let a = quermass_from_integrals(n, enclosed_volume(m), &sig);
    let hm_residual = (0..n).map(|j| hm_from_points(m, pts, j)).collect();
    let gap = xi(a[1], n).ok().map(|x| x - a[3]);
    QuermassReport {
        n,
        a,
        hm_residual,
        gap,
    }
}

/// `xi_{2,0}(A_0) - A_2(M)`.
pub fn inequality_gap(m: &RadialGraph) -> Result<f64, QuermassError> {
    let rep = quermass_all(m)?;
    Ok(xi(rep.area(), m.n())? - rep.get(2))
}

/// Radius of the slice with area `a`: `omega_n cosh^n r = a`, `r >= 0`.
pub fn slice_radius_for_area(a: f64, n: usize) -> Result<f64, QuermassError> {
    let min = sphere_area(n);
    // tolerate rounding of a slice at r = 0
    if !(a >= min * (1.0 - 1e-12)) {
        return Err(QuermassError::Domain { a, min });
    }
    Ok((a / min).max(1.0).powf(1.0 / n as f64).acosh())
}

/// `xi_{2,0}`: `A_2` of the radial slice whose area is `a`.
///
/// Closed form `(C(n,2) tanh^2 r - (n-1)) a` with `r` from
/// [`slice_radius_for_area`].
pub fn xi(a: f64, n: usize) -> Result<f64, QuermassError> {
    let r = slice_radius_for_area(a, n)?;
    Ok((binomial(n, 2) * r.tanh().powi(2) - (n as f64 - 1.0)) * a)
}

/// Closed forms on the slice `rho = r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SliceModel {
    pub n: usize,
    pub r: f64,
}

impl SliceModel {
    pub fn new(n: usize, r: f64) -> Self {
        Self { n, r }
    }

    /// Every principal curvature equals `tanh r`.
    pub fn kappa(&self) -> f64 {
        self.r.tanh()
    }

    pub fn area(&self) -> f64 {
        sphere_area(self.n) * self.r.cosh().powi(self.n as i32)
    }

    pub fn sigma(&self, m: usize) -> f64 {
        binomial(self.n, m) * self.kappa().powi(m as i32)
    }

    /// `omega_n int_0^r cosh^n` via `I_n = cosh^{n-1} sinh / n + (n-1)/n I_{n-2}`.
    pub fn volume(&self) -> f64 {
        let (c, s, r) = (self.r.cosh(), self.r.sinh(), self.r);
        let mut lower = if self.n.is_multiple_of(2) { r } else { s };
        let start = if self.n.is_multiple_of(2) { 2 } else { 3 };
        for j in (start..=self.n).step_by(2) {
            let jf = j as f64;
            lower = c.powi(j as i32 - 1) * s / jf + (jf - 1.0) / jf * lower;
        }
        sphere_area(self.n) * lower
    }

    /// `A_m` for `-1 <= m <= n`.
    pub fn quermass(&self, m: isize) -> f64 {
        self.quermass_all()[(m + 1) as usize]
    }

    pub fn quermass_all(&self) -> Vec<f64> {
        let area = self.area();
        let sig: Vec<f64> = (0..=self.n).map(|m| self.sigma(m) * area).collect();
        quermass_from_integrals(self.n, self.volume(), &sig)
    }
}

/// One row of a slice table.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceRow {
    pub r: f64,
    /// `A_0..=A_n`
    pub a: Vec<f64>,
    pub xi_gap: f64,
}

/// `steps + 1` equally spaced radii in `[r_min, r_max]`.
pub fn slice_table(
    n: usize,
    r_min: f64,
    r_max: f64,
    steps: usize,
) -> Result<Vec<SliceRow>, QuermassError> {
    let steps = steps.max(1);
    (0..=steps)
        .map(|i| {
            let r = r_min + (r_max - r_min) * i as f64 / steps as f64;
            let all = SliceModel::new(n, r).quermass_all();
            let a = all[1..].to_vec();
            let xi_gap = xi(a[0], n)? - a[2];
            Ok(SliceRow { r, a, xi_gap })
        })
        .collect()
}
