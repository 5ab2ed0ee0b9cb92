//! Extrinsic geometry of a spacelike radial graph `M = {(rho(xi), xi)}` in
//! de Sitter space, written as `-dr^2 + cosh^2(r) sigma` over the round sphere.
//!
//! All tensors are expressed in a sigma-orthonormal frame. With
//! `w^2 = cosh^2 rho - |grad rho|^2` the induced metric, its inverse and the
//! second fundamental form are
//!
//! ```text
//! g_ij   = -rho_i rho_j + cosh^2 rho delta_ij
//! g^ij   = (delta_ij + rho_i rho_j / w^2) / cosh^2 rho
//! h_ij   = (cosh rho / w) (Hess_ij rho - 2 rho_i rho_j tanh rho + sinh rho cosh rho delta_ij)
//! ```
//!
//! and `det g = cosh^{2n-2} rho * w^2`, so the area element against `d sigma`
//! is `cosh^{n-1} rho * w`.

use thiserror::Error;

use crate::grids::{Grid, GridError, SphereJet};
use crate::linalg::{generalized_eigenvalues, LinalgError, SmallMat, MAX_DIM};
use crate::symfunc::{b_nk, sigma_all, sigma_unchecked};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("node {node} is not spacelike (w^2 = {w2})")]
    Spacelike { node: usize, w2: f64 },
    #[error("node {node} leaves the cone Gamma_{k}: sigma_{order} = {value}")]
    Cone {
        node: usize,
        k: usize,
        order: usize,
        value: f64,
    },
    #[error("eigen solve failed at node {node}: {source}")]
    Linalg { node: usize, source: LinalgError },
    #[error("k = {k} is outside 1..={n}")]
    Order { k: usize, n: usize },
}

/// A star-shaped hypersurface given by its radial function on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGraph {
    grid: Grid,
    rho: Vec<f64>,
}

impl RadialGraph {
    pub fn new(grid: Grid, rho: Vec<f64>) -> Result<Self, GridError> {
        if rho.len() != grid.len() {
            return Err(GridError::LengthMismatch {
                expected: grid.len(),
                got: rho.len(),
            });
        }
        if let Some(node) = rho.iter().position(|r| !r.is_finite()) {
            return Err(GridError::NonFinite { node });
        }
        Ok(Self { grid, rho })
    }

    pub fn from_fn(grid: Grid, f: impl FnMut(f64, f64) -> f64) -> Result<Self, GridError> {
        let rho = grid.sample(f);
        Self::new(grid, rho)
    }

    /// Constant radius `r`: a radial coordinate slice.
    pub fn slice(grid: Grid, r: f64) -> Result<Self, GridError> {
        let rho = vec![r; grid.len()];
        Self::new(grid, rho)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    pub fn n(&self) -> usize {
        self.grid.n()
    }

    pub fn with_rho(&self, rho: Vec<f64>) -> Result<Self, GridError> {
        Self::new(self.grid.clone(), rho)
    }

    pub fn jets(&self) -> Vec<SphereJet> {
        // rho is validated at construction
        self.grid
            .jets(&self.rho)
            .expect("radial function validated on construction")
    }

    pub fn min_rho(&self) -> f64 {
        self.rho.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_rho(&self) -> f64 {
        self.rho.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `max rho - min rho`.
    pub fn oscillation(&self) -> f64 {
        self.max_rho() - self.min_rho()
    }

    /// Mean of `rho` against the round measure.
    pub fn mean_rho(&self) -> f64 {
        self.grid.integrate(&self.rho) / self.grid.weights().iter().sum::<f64>()
    }
}

/// Pointwise geometric data of `M` at one node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointGeometry {
    pub node: usize,
    pub n: usize,
    pub rho: f64,
    /// `|grad rho|^2_sigma`
    pub grad_rho_sq: f64,
    pub w: f64,
    /// support function `cosh^2 rho / w`
    pub u: f64,
    pub g: SmallMat,
    pub g_inv: SmallMat,
    pub h: SmallMat,
    kappa: [f64; MAX_DIM],
    /// density of `d mu_g` against `d sigma`
    pub area_weight: f64,
    /// `phi = cosh rho`
    pub phi: f64,
    /// `phi' = sinh rho`
    pub dphi: f64,
    /// `Phi = -sinh rho`
    pub big_phi: f64,
}

impl PointGeometry {
    /// Principal curvatures, non-increasing.
    pub fn kappa(&self) -> &[f64] {
        &self.kappa[..self.n]
    }

    pub fn sigma(&self, k: usize) -> f64 {
        sigma_unchecked(self.kappa(), k)
    }

    pub fn max_abs_kappa(&self) -> f64 {
        self.kappa().iter().fold(0.0_f64, |m, k| m.max(k.abs()))
    }

    /// `|grad Phi|^2_g = u^2 - cosh^2 rho`.
    pub fn grad_big_phi_sq(&self) -> f64 {
        self.u * self.u - self.phi * self.phi
    }
}

/// `(sinh x, cosh x)` from one exponential away from the origin.
#[inline]
fn sinh_cosh(x: f64) -> (f64, f64) {
    if x.abs() < 0.5 {
        (x.sinh(), x.cosh())
    } else {
        let e = x.exp();
        let inv = 1.0 / e;
        (0.5 * (e - inv), 0.5 * (e + inv))
    }
}

/// Scalar data at a node: everything except the tensors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct PointScalars {
    pub node: usize,
    pub n: usize,
    pub rho: f64,
    pub grad_rho_sq: f64,
    pub w: f64,
    pub u: f64,
    pub kappa: [f64; MAX_DIM],
    pub ch: f64,
    pub sh: f64,
}

impl PointScalars {
    pub fn kappa(&self) -> &[f64] {
        &self.kappa[..self.n]
    }

    pub fn max_abs_kappa(&self) -> f64 {
        self.kappa().iter().fold(0.0_f64, |m, k| m.max(k.abs()))
    }
}

struct Tensors {
    g: SmallMat,
    g_inv: SmallMat,
    h: SmallMat,
}

fn tensors(jet: &SphereJet, n: usize, ch: f64, sh: f64, w2: f64) -> Tensors {
    let grad = jet.grad();
    let ch2 = ch * ch;
    let (tanh, pref) = (sh / ch, ch / w2.sqrt());
    let delta = |i: usize, j: usize| if i == j { 1.0 } else { 0.0 };
    Tensors {
        g: SmallMat::from_fn(n, |i, j| -grad[i] * grad[j] + ch2 * delta(i, j)),
        g_inv: SmallMat::from_fn(n, |i, j| (delta(i, j) + grad[i] * grad[j] / w2) / ch2),
        h: SmallMat::from_fn(n, |i, j| {
            pref * (jet.hess.get(i, j) - 2.0 * grad[i] * grad[j] * tanh + sh * ch * delta(i, j))
        }),
    }
}

/// Principal curvatures and scalars; tensors are only built when the
/// frame does not diagonalize `g` and `h` already.
fn scalars_and_tensors(
    jet: &SphereJet,
    n: usize,
    want_tensors: bool,
) -> Result<(PointScalars, Option<Tensors>), GeometryError> {
    assert_eq!(jet.dim(), n, "jet dimension does not match n");
    let node = jet.node;
    let rho = jet.value;
    let (sh, ch) = sinh_cosh(rho);
    let ch2 = ch * ch;
    let grad = jet.grad();
    let grad_rho_sq = jet.grad_norm_sq();
    let w2 = ch2 - grad_rho_sq;
    if !(w2 > 0.0) {
        return Err(GeometryError::Spacelike { node, w2 });
    }
    let w = w2.sqrt();
    let along_axis = grad[1..].iter().all(|g| *g == 0.0);
    let diagonal = along_axis && jet.hess.is_diagonal();
    let mut kappa = [0.0; MAX_DIM];
    let mut built = None;
    if diagonal && !want_tensors {
        let pref = ch / w;
        let tanh = sh / ch;
        for (i, k) in kappa[..n].iter_mut().enumerate() {
            let gi = if i == 0 { w2 } else { ch2 };
            let extra = if i == 0 {
                -2.0 * grad[0] * grad[0] * tanh
            } else {
                0.0
            };
            *k = pref * (jet.hess.get(i, i) + extra + sh * ch) / gi;
        }
        kappa[..n].sort_by(|a, b| b.total_cmp(a));
    } else {
        let t = tensors(jet, n, ch, sh, w2);
        kappa = generalized_eigenvalues(&t.h, &t.g)
            .map_err(|source| GeometryError::Linalg { node, source })?;
        built = Some(t);
    }
    let scalars = PointScalars {
        node,
        n,
        rho,
        grad_rho_sq,
        w,
        u: ch2 / w,
        kappa,
        ch,
        sh,
    };
    Ok((scalars, built))
}

pub(crate) fn point_scalars(jet: &SphereJet, n: usize) -> Result<PointScalars, GeometryError> {
    scalars_and_tensors(jet, n, false).map(|(s, _)| s)
}

/// Builds [`PointGeometry`] from a jet of `rho`.
pub fn pointwise_geometry(jet: &SphereJet, n: usize) -> Result<PointGeometry, GeometryError> {
    let (p, t) = scalars_and_tensors(jet, n, true)?;
    let t = t.expect("tensors requested");
    Ok(PointGeometry {
        node: p.node,
        n,
        rho: p.rho,
        grad_rho_sq: p.grad_rho_sq,
        w: p.w,
        u: p.u,
        g: t.g,
        g_inv: t.g_inv,
        h: t.h,
        kappa: p.kappa,
        area_weight: p.ch.powi(n as i32 - 1) * p.w,
        phi: p.ch,
        dphi: p.sh,
        big_phi: -p.sh,
    })
}

/// Geometry at every node of `M`.
pub fn geometry_field(m: &RadialGraph) -> Result<Vec<PointGeometry>, GeometryError> {
    let n = m.n();
    m.jets()
        .iter()
        .map(|jet| pointwise_geometry(jet, n))
        .collect()
}

/// Checks `kappa` against the strict cone `Gamma_k`; returns `sigma_k`.
fn strict_cone_sigma(pt: &PointGeometry, k: usize) -> Result<f64, GeometryError> {
    let all = sigma_all(pt.kappa());
    for order in 1..=k {
        if !(all[order] > 0.0) {
            return Err(GeometryError::Cone {
                node: pt.node,
                k,
                order,
                value: all[order],
            });
        }
    }
    Ok(all[k])
}

/// Normal speed `S = u - b_{n,k} phi' sigma_k^{-1/k}`.
///
/// Where `phi' = sinh rho` vanishes exactly the curvature term drops out and
/// `S = u` without a cone requirement; elsewhere `kappa` must lie in `Gamma_k`.
pub fn normal_speed(pt: &PointGeometry, k: usize) -> Result<f64, GeometryError> {
    if k == 0 || k > pt.n {
        return Err(GeometryError::Order { k, n: pt.n });
    }
    if pt.dphi == 0.0 {
        return Ok(pt.u);
    }
    let sk = strict_cone_sigma(pt, k)?;
    Ok(pt.u - b_nk(pt.n, k) * pt.dphi * sk.powf(-1.0 / k as f64))
}

/// Result of [`validate_hypersurface`].
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub k: usize,
    /// minimum of `w^2` over all nodes
    pub min_w2: f64,
    /// `min_sigma[j-1]` is the minimum of `sigma_j(kappa)` over spacelike nodes
    pub min_sigma: Vec<f64>,
    pub max_abs_kappa: f64,
    pub spacelike: bool,
    pub strictly_convex: bool,
    /// first node that fails either test
    pub first_failure: Option<usize>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.spacelike && self.strictly_convex
    }
}

/// Spacelike and strict `k`-convexity test over all nodes.
pub fn validate_hypersurface(m: &RadialGraph, k: usize) -> ValidationReport {
    let n = m.n();
    let k = k.clamp(1, n);
    let mut report = ValidationReport {
        k,
        min_w2: f64::INFINITY,
        min_sigma: vec![f64::INFINITY; k],
        max_abs_kappa: 0.0,
        spacelike: true,
        strictly_convex: true,
        first_failure: None,
    };
    for jet in m.jets() {
        let w2 = jet.value.cosh().powi(2) - jet.grad_norm_sq();
        report.min_w2 = report.min_w2.min(w2);
        let ok = match pointwise_geometry(&jet, n) {
            Ok(pt) => {
                let all = sigma_all(pt.kappa());
                let mut convex = true;
                for j in 1..=k {
                    report.min_sigma[j - 1] = report.min_sigma[j - 1].min(all[j]);
                    convex &= all[j] > 0.0;
                }
                report.max_abs_kappa = report.max_abs_kappa.max(pt.max_abs_kappa());
                report.strictly_convex &= convex;
                convex
            }
            Err(_) => {
                report.spacelike = false;
                false
            }
        };
        if !ok && report.first_failure.is_none() {
            report.first_failure = Some(jet.node);
        }
    }
    report
}

/// Discrete residuals of the support-function and `Phi` identities on `M`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityReport {
    /// max over nodes/components of `grad u + h(g^{-1} grad Phi)`
    pub gradient: f64,
    /// max over nodes of `Delta_g Phi - (n phi' - sigma_1 u)`
    pub traced_hessian: f64,
    /// `int_M (Delta_g Phi - (n phi' - sigma_1 u)) d mu_g` over the
    /// finite-volume cells
    pub traced_hessian_integral: f64,
}

pub fn identity_residuals(m: &RadialGraph) -> Result<IdentityReport, GeometryError> {
    let grid = m.grid();
    let n = m.n();
    let pts = geometry_field(m)?;
    let u: Vec<f64> = pts.iter().map(|p| p.u).collect();
    let big_phi: Vec<f64> = pts.iter().map(|p| p.big_phi).collect();
    let density: Vec<f64> = pts.iter().map(|p| p.area_weight).collect();
    let g_inv: Vec<SmallMat> = pts.iter().map(|p| p.g_inv).collect();

    let u_jets = grid.jets(&u)?;
    let phi_jets = grid.jets(&big_phi)?;
    let mut gradient: f64 = 0.0;
    for ((pt, uj), pj) in pts.iter().zip(&u_jets).zip(&phi_jets) {
        let raised = pt.g_inv.mul_vec(pj.grad());
        let shape = pt.h.mul_vec(&raised);
        for i in 0..n {
            gradient = gradient.max((uj.grad[i] + shape[i]).abs());
        }
    }

    let lap = grid.weighted_laplacian(&big_phi, &density, &g_inv)?;
    let residual: Vec<f64> = pts
        .iter()
        .zip(&lap)
        .map(|(pt, l)| l - (n as f64 * pt.dphi - pt.sigma(1) * pt.u))
        .collect();
    let traced_hessian = residual.iter().fold(0.0_f64, |m, r| m.max(r.abs()));
    let traced_hessian_integral = residual
        .iter()
        .zip(&density)
        .zip(grid.cell_measures())
        .map(|((r, a), c)| r * a * c)
        .sum();
    Ok(IdentityReport {
        gradient,
        traced_hessian,
        traced_hessian_integral,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn axisym(n: usize, m: usize, f: impl Fn(f64) -> f64) -> RadialGraph {
        RadialGraph::from_fn(Grid::axisym(n, m).unwrap(), |t, _| f(t)).unwrap()
    }

    #[test]
    fn slice_geometry() {
        let m = axisym(3, 11, |_| 1.0);
        let pts = geometry_field(&m).unwrap();
        for p in &pts {
            for &k in p.kappa() {
                assert!((k - 1f64.tanh()).abs() < 1e-15);
            }
            assert!((p.u - 1f64.cosh()).abs() < 1e-15);
            assert!((p.w - 1f64.cosh()).abs() < 1e-15);
            assert!((p.area_weight - 1f64.cosh().powi(3)).abs() < 1e-14);
            assert_eq!(p.big_phi, -p.dphi);
        }
        assert!((pts[3].kappa()[0] - 0.761594155955765).abs() < 1e-14);
        assert!((pts[3].u - 1.5430806348152437).abs() < 1e-15);
    }

    #[test]
    fn equator_geometry() {
        let m = axisym(2, 11, |_| 0.0);
        for p in geometry_field(&m).unwrap() {
            assert!(p.kappa().iter().all(|k| *k == 0.0));
            assert_eq!(p.u, 1.0);
            assert_eq!(p.big_phi, 0.0);
            for i in 0..2 {
                for j in 0..2 {
                    assert_eq!(p.g.get(i, j), if i == j { 1.0 } else { 0.0 });
                }
            }
        }
    }

    #[test]
    fn normal_speed_on_slices() {
        let m = axisym(3, 11, |_| 1.0);
        let p = geometry_field(&m).unwrap()[4];
        assert!(normal_speed(&p, 2).unwrap().abs() < 1e-15);
        assert!(normal_speed(&p, 3).unwrap().abs() < 1e-15);
        for n in 2..=5 {
            let eq = axisym(n, 11, |_| 0.0);
            let p = geometry_field(&eq).unwrap()[2];
            for k in 1..=n {
                assert_eq!(normal_speed(&p, k).unwrap(), 1.0);
            }
        }
    }

    #[test]
    fn normal_speed_cone_violation() {
        // slice at negative radius has kappa = tanh r < 0
        let m = axisym(3, 11, |_| -0.5);
        let p = geometry_field(&m).unwrap()[0];
        assert!(matches!(
            normal_speed(&p, 2),
            Err(GeometryError::Cone { node: 0, .. })
        ));
    }

    #[test]
    fn diagonal_shortcut_matches_eigen_solve() {
        let m = axisym(4, 41, |t| 0.8 + 0.2 * (2.0 * t).cos() + 0.05 * t.cos());
        for jet in m.jets() {
            let fast = point_scalars(&jet, 4).unwrap();
            let full = pointwise_geometry(&jet, 4).unwrap();
            for (a, b) in fast.kappa().iter().zip(full.kappa()) {
                assert!((a - b).abs() < 1e-13 * b.abs().max(1.0));
            }
            assert_eq!(fast.u, full.u);
        }
    }

    #[test]
    fn validation_examples() {
        let rep = validate_hypersurface(&axisym(3, 21, |_| 1.0), 2);
        assert!(rep.passed());
        assert!((rep.min_sigma[1] - 3.0 * 1f64.tanh().powi(2)).abs() < 1e-14);
        assert!((rep.min_sigma[1] - 1.740077).abs() < 1e-6);

        let rep = validate_hypersurface(&axisym(3, 21, |_| 0.0), 2);
        assert!(!rep.passed());
        assert!(rep.spacelike && !rep.strictly_convex);

        // |rho'| = 3 > cosh(rho) = 1 on the equator
        let rep = validate_hypersurface(&axisym(3, 41, |t| 3.0 * t.cos()), 2);
        assert!(!rep.spacelike);
        assert!(rep.first_failure.is_some());
        assert!(rep.min_w2 <= 0.0);
    }

    #[test]
    fn area_weight_matches_determinant() {
        let m = axisym(4, 41, |t| 0.8 + 0.2 * (2.0 * t).cos() + 0.05 * t.cos());
        for p in geometry_field(&m).unwrap() {
            let det = p.g.spd_determinant().unwrap();
            assert!((det.sqrt() - p.area_weight).abs() <= 1e-12 * p.area_weight);
            let rel = (p.grad_big_phi_sq() - (p.u * p.u - p.phi * p.phi)).abs();
            assert!(rel <= 1e-10 * (p.u * p.u));
            assert!(p.u >= p.phi && p.phi >= 1.0);
        }
    }

    #[test]
    fn identities_vanish_on_slices() {
        for grid in [Grid::axisym(3, 21).unwrap(), Grid::latlong(16, 32).unwrap()] {
            let m = RadialGraph::slice(grid, 0.7).unwrap();
            let r = identity_residuals(&m).unwrap();
            assert!(r.gradient < 1e-14);
            assert!(r.traced_hessian < 1e-13, "{r:?}");
            assert!(r.traced_hessian_integral.abs() < 1e-12);
        }
    }
}
