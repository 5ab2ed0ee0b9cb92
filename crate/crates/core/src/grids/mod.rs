//! Scalar fields on the round sphere: stencils for the covariant jet
//! (gradient and Hessian in a sigma-orthonormal frame) and quadrature.
//!
//! Two discretizations are provided. [`AxisymGrid`] samples fields that only
//! depend on the polar angle and works for any dimension; [`LatLongGrid`]
//! covers general fields on `S^2`.

mod axisym;
mod latlong;

pub use axisym::AxisymGrid;
pub use latlong::LatLongGrid;

use thiserror::Error;

use crate::linalg::{SmallMat, MAX_DIM};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("invalid grid: {0}")]
    Invalid(String),
    #[error("field has {got} values but the grid has {expected} nodes")]
    LengthMismatch { expected: usize, got: usize },
    #[error("non-finite field value at node {node}")]
    NonFinite { node: usize },
}

/// Value, frame gradient and frame Hessian of a field at one node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereJet {
    pub node: usize,
    pub value: f64,
    pub grad: [f64; MAX_DIM],
    pub hess: SmallMat,
}

impl SphereJet {
    pub fn dim(&self) -> usize {
        self.hess.dim()
    }

    pub fn grad(&self) -> &[f64] {
        &self.grad[..self.dim()]
    }

    pub fn grad_norm_sq(&self) -> f64 {
        self.grad().iter().map(|g| g * g).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Grid {
    Axisym(AxisymGrid),
    LatLong(LatLongGrid),
}

impl Grid {
    pub fn axisym(n: usize, m: usize) -> Result<Self, GridError> {
        AxisymGrid::new(n, m).map(Grid::Axisym)
    }

    pub fn latlong(ntheta: usize, nphi: usize) -> Result<Self, GridError> {
        LatLongGrid::new(ntheta, nphi).map(Grid::LatLong)
    }

    /// Dimension of the sphere (= hypersurface dimension).
    pub fn n(&self) -> usize {
        match self {
            Grid::Axisym(g) => g.n(),
            Grid::LatLong(_) => 2,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Grid::Axisym(g) => g.len(),
            Grid::LatLong(g) => g.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Polar angle of a node.
    pub fn theta(&self, node: usize) -> f64 {
        match self {
            Grid::Axisym(g) => g.theta(node),
            Grid::LatLong(g) => g.theta(node / g.nphi()),
        }
    }

    /// Azimuth of a node (0 on the axisymmetric grid).
    pub fn phi(&self, node: usize) -> f64 {
        match self {
            Grid::Axisym(_) => 0.0,
            Grid::LatLong(g) => g.phi(node % g.nphi()),
        }
    }

    /// Smallest distance between neighbouring nodes on the unit sphere.
    pub fn min_spacing(&self) -> f64 {
        match self {
            Grid::Axisym(g) => g.spacing(),
            Grid::LatLong(g) => g.min_spacing(),
        }
    }

    pub fn weights(&self) -> &[f64] {
        match self {
            Grid::Axisym(g) => g.weights(),
            Grid::LatLong(g) => g.weights(),
        }
    }

    /// Finite-volume cell measures; [`Grid::weighted_laplacian`] telescopes
    /// against these.
    pub fn cell_measures(&self) -> &[f64] {
        match self {
            Grid::Axisym(g) => g.weights(),
            Grid::LatLong(g) => g.cell_measures(),
        }
    }

    /// `int_{S^n} f d sigma`.
    pub fn integrate(&self, field: &[f64]) -> f64 {
        debug_assert_eq!(field.len(), self.len());
        self.weights().iter().zip(field).map(|(w, f)| w * f).sum()
    }

    /// Samples `f(theta, phi)` at every node.
    pub fn sample(&self, mut f: impl FnMut(f64, f64) -> f64) -> Vec<f64> {
        (0..self.len())
            .map(|i| f(self.theta(i), self.phi(i)))
            .collect()
    }

    fn check_field(&self, field: &[f64]) -> Result<(), GridError> {
        if field.len() != self.len() {
            return Err(GridError::LengthMismatch {
                expected: self.len(),
                got: field.len(),
            });
        }
        match field.iter().position(|v| !v.is_finite()) {
            Some(node) => Err(GridError::NonFinite { node }),
            None => Ok(()),
        }
    }

    /// Jets at every node.
    pub fn jets(&self, field: &[f64]) -> Result<Vec<SphereJet>, GridError> {
        let mut out = Vec::with_capacity(self.len());
        self.visit_jets(field, |jet| out.push(*jet))?;
        Ok(out)
    }

    /// Calls `visit` with the jet of every node in node order, without
    /// collecting them.
    pub fn visit_jets(
        &self,
        field: &[f64],
        visit: impl FnMut(&SphereJet),
    ) -> Result<(), GridError> {
        self.check_field(field)?;
        match self {
            Grid::Axisym(g) => g.visit_jets(field, visit),
            Grid::LatLong(g) => g.visit_jets(field, visit),
        }
        Ok(())
    }

    /// Divergence-form operator `(1/(A sqrt sigma)) d_i (A sqrt sigma a^{ij} d_j f)`.
    ///
    /// `density` is `A` and `inv_metric` the frame components of `a^{ij}`.
    /// Finite-volume discretization: summed against [`Grid::cell_measures`]
    /// times `density` it telescopes to zero.
    pub fn weighted_laplacian(
        &self,
        field: &[f64],
        density: &[f64],
        inv_metric: &[SmallMat],
    ) -> Result<Vec<f64>, GridError> {
        self.check_field(field)?;
        self.check_field(density)?;
        Ok(match self {
            Grid::Axisym(g) => g.weighted_laplacian(field, density, inv_metric),
            Grid::LatLong(g) => g.weighted_laplacian(field, density, inv_metric),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_field_has_zero_jet_on_both_grids() {
        for grid in [Grid::axisym(4, 41).unwrap(), Grid::latlong(16, 32).unwrap()] {
            let field = vec![0.7; grid.len()];
            for jet in grid.jets(&field).unwrap() {
                assert_eq!(jet.value, 0.7);
                assert!(jet.grad().iter().all(|g| *g == 0.0));
                let n = jet.dim();
                for i in 0..n {
                    for j in 0..n {
                        assert_eq!(jet.hess.get(i, j), 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn jets_reject_nan_and_bad_length() {
        let grid = Grid::axisym(2, 11).unwrap();
        let mut f = vec![1.0; 11];
        f[4] = f64::NAN;
        assert_eq!(grid.jets(&f), Err(GridError::NonFinite { node: 4 }));
        assert!(matches!(
            grid.jets(&[1.0; 3]),
            Err(GridError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn latlong_matches_axisym_on_axisymmetric_field() {
        // compare at common theta nodes: latlong nodes are offset, so build
        // the axisym grid fine enough and interpolate the analytic jet instead
        let f = |t: f64| 1.0 + 0.2 * (2.0 * t).cos() + 0.1 * t.cos();
        let errors: Vec<f64> = [24usize, 48]
            .iter()
            .map(|&nt| {
                let ll = Grid::latlong(nt, 2 * nt).unwrap();
                // axisym grid whose nodes include every latlong theta
                let ax = Grid::axisym(2, 2 * nt + 1).unwrap();
                let ll_jets = ll.jets(&ll.sample(|t, _| f(t))).unwrap();
                let ax_jets = ax.jets(&ax.sample(|t, _| f(t))).unwrap();
                let mut err: f64 = 0.0;
                for j in 0..nt {
                    let a = &ax_jets[2 * j + 1];
                    let l = &ll_jets[j * 2 * nt + 3];
                    assert!((ll.theta(j * 2 * nt) - ax.theta(2 * j + 1)).abs() < 1e-14);
                    err = err.max((a.grad[0] - l.grad[0]).abs());
                    err = err.max((a.hess.get(0, 0) - l.hess.get(0, 0)).abs());
                    err = err.max((a.hess.get(1, 1) - l.hess.get(1, 1)).abs());
                    assert!(l.hess.get(0, 1).abs() < 1e-9);
                }
                err
            })
            .collect();
        // axisym spacing is half the latlong spacing, so both errors are O(h^2)
        assert!(errors[1] < errors[0] / 3.0, "{errors:?}");
        assert!(errors[1] < 1e-2);
    }
}
