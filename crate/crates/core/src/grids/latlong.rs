use std::f64::consts::PI;

use super::{GridError, SphereJet};
use crate::linalg::{SmallMat, MAX_DIM};

/// Weight of node `j` in Fejer's first rule for `int_{-1}^{1} g(x) dx`
/// with nodes `x_j = cos((j + 1/2) pi / nt)`.
fn fejer_weight(j: usize, nt: usize) -> f64 {
    let t = (j as f64 + 0.5) * PI / nt as f64;
    let tail: f64 = (1..=nt / 2)
        .map(|m| {
            let mf = m as f64;
            (2.0 * mf * t).cos() / (4.0 * mf * mf - 1.0)
        })
        .sum();
    2.0 / nt as f64 * (1.0 - 2.0 * tail)
}

/// Latitude-longitude grid on `S^2` with pole-offset rows
/// `theta_j = (j + 1/2) pi / ntheta` and periodic `phi_l = 2 pi l / nphi`.
///
/// Node `(j, l)` has index `j * nphi + l`. Neighbours across a pole are
/// taken from the same ring at longitude `phi + pi` (a grid node for even
/// `nphi`). Frame: `(e_theta, e_phi / sin theta)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatLongGrid {
    ntheta: usize,
    nphi: usize,
    dtheta: f64,
    dphi: f64,
    weights: Vec<f64>,
    /// exact areas of the cells `[theta_j -+ dtheta/2] x [phi_l -+ dphi/2]`
    cells: Vec<f64>,
}

impl LatLongGrid {
    pub fn new(ntheta: usize, nphi: usize) -> Result<Self, GridError> {
        if ntheta < 8 {
            return Err(GridError::Invalid(format!(
                "ntheta = {ntheta} must be >= 8"
            )));
        }
        if nphi < 16 || !nphi.is_multiple_of(2) {
            return Err(GridError::Invalid(format!(
                "nphi = {nphi} must be even and >= 16"
            )));
        }
        let dtheta = PI / ntheta as f64;
        let dphi = 2.0 * PI / nphi as f64;
        let mut cells = Vec::with_capacity(ntheta * nphi);
        let mut weights = Vec::with_capacity(ntheta * nphi);
        for j in 0..ntheta {
            let t = (j as f64 + 0.5) * dtheta;
            let c = 2.0 * t.sin() * (0.5 * dtheta).sin() * dphi;
            cells.extend(std::iter::repeat_n(c, nphi));
            let w = fejer_weight(j, ntheta) * dphi;
            weights.extend(std::iter::repeat_n(w, nphi));
        }
        Ok(Self {
            ntheta,
            nphi,
            dtheta,
            dphi,
            weights,
            cells,
        })
    }

    pub fn ntheta(&self) -> usize {
        self.ntheta
    }

    pub fn nphi(&self) -> usize {
        self.nphi
    }

    pub fn len(&self) -> usize {
        self.ntheta * self.nphi
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn theta(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.dtheta
    }

    pub fn phi(&self, l: usize) -> f64 {
        l as f64 * self.dphi
    }

    pub fn min_spacing(&self) -> f64 {
        self.dtheta.min(self.theta(0).sin() * self.dphi)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn cell_measures(&self) -> &[f64] {
        &self.cells
    }

    /// Value at row `j` in `-1..=ntheta`, any longitude index.
    #[inline]
    fn at(&self, f: &[f64], j: isize, l: isize) -> f64 {
        let (nt, np) = (self.ntheta as isize, self.nphi as isize);
        let (row, col) = if j < 0 {
            (-1 - j, l + np / 2)
        } else if j >= nt {
            (2 * nt - 1 - j, l + np / 2)
        } else {
            (j, l)
        };
        f[(row * np + col.rem_euclid(np)) as usize]
    }

    /// Coordinate derivatives `(f_theta, f_phi)` by centered differences.
    fn coord_gradient(&self, f: &[f64], j: isize, l: isize) -> (f64, f64) {
        let ft = (self.at(f, j + 1, l) - self.at(f, j - 1, l)) / (2.0 * self.dtheta);
        let fp = (self.at(f, j, l + 1) - self.at(f, j, l - 1)) / (2.0 * self.dphi);
        (ft, fp)
    }

    /// Fourth-order `d/dtheta` of row values `g(j)` (ghost rows allowed).
    #[inline]
    fn d1(g: impl Fn(isize) -> f64, j: isize, h: f64) -> f64 {
        (8.0 * (g(j + 1) - g(j - 1)) - (g(j + 2) - g(j - 2))) / (12.0 * h)
    }

    /// Fourth-order second derivative.
    #[inline]
    fn d2(g: impl Fn(isize) -> f64, j: isize, h: f64) -> f64 {
        (16.0 * (g(j + 1) + g(j - 1)) - (g(j + 2) + g(j - 2)) - 30.0 * g(j)) / (12.0 * h * h)
    }

    /// Jets use fourth-order stencils: the frame Hessian divides by
    /// `sin theta`, which costs one order on the rings next to the poles.
    pub(super) fn visit_jets(&self, f: &[f64], mut visit: impl FnMut(&SphereJet)) {
        let (dt, dp) = (self.dtheta, self.dphi);
        for j in 0..self.ntheta as isize {
            let t = self.theta(j as usize);
            let (s, c) = (t.sin(), t.cos());
            for l in 0..self.nphi as isize {
                let f0 = self.at(f, j, l);
                let ft = Self::d1(|r| self.at(f, r, l), j, dt);
                let fp = Self::d1(|q| self.at(f, j, q), l, dp);
                let ftt = Self::d2(|r| self.at(f, r, l), j, dt);
                let fpp = Self::d2(|q| self.at(f, j, q), l, dp);
                let ftp = Self::d1(|r| Self::d1(|q| self.at(f, r, q), l, dp), j, dt);
                // covariant Hessian of sigma = d theta^2 + sin^2 d phi^2
                let h_tt = ftt;
                let h_tp = ftp - c / s * fp;
                let h_pp = fpp + s * c * ft;
                let mut grad = [0.0; MAX_DIM];
                grad[0] = ft;
                grad[1] = fp / s;
                let mut hess = SmallMat::zeros(2);
                hess.set(0, 0, h_tt);
                hess.set(0, 1, h_tp / s);
                hess.set(1, 0, h_tp / s);
                hess.set(1, 1, h_pp / (s * s));
                visit(&SphereJet {
                    node: (j as usize) * self.nphi + l as usize,
                    value: f0,
                    grad,
                    hess,
                });
            }
        }
    }

    pub(super) fn weighted_laplacian(
        &self,
        f: &[f64],
        density: &[f64],
        inv_metric: &[SmallMat],
    ) -> Vec<f64> {
        let (nt, np) = (self.ntheta, self.nphi);
        let (dt, dp) = (self.dtheta, self.dphi);
        let idx = |j: usize, l: isize| j * np + l.rem_euclid(np as isize) as usize;
        let grads: Vec<(f64, f64)> = (0..nt as isize)
            .flat_map(|j| (0..np as isize).map(move |l| (j, l)))
            .map(|(j, l)| self.coord_gradient(f, j, l))
            .collect();

        // theta-faces: face j sits between rows j-1 and j; faces 0 and nt are the poles
        let mut theta_flux = vec![0.0; (nt + 1) * np];
        for j in 1..nt {
            let s = (j as f64 * dt).sin();
            for l in 0..np as isize {
                let (a, b) = (idx(j - 1, l), idx(j, l));
                let dens = 0.5 * (density[a] + density[b]);
                let gtt = 0.5 * (inv_metric[a].get(0, 0) + inv_metric[b].get(0, 0));
                let gtp = 0.5 * (inv_metric[a].get(0, 1) + inv_metric[b].get(0, 1));
                let f_t = (f[b] - f[a]) / dt;
                let f_p = 0.5 * (grads[a].1 + grads[b].1);
                theta_flux[j * np + l as usize] = dens * (s * gtt * f_t + gtp * f_p);
            }
        }

        let mut out = vec![0.0; nt * np];
        for j in 0..nt {
            let s = self.theta(j).sin();
            let cell = self.cells[j * np];
            // phi-face flux between l and l+1
            let phi_flux = |l: isize| {
                let (a, b) = (idx(j, l), idx(j, l + 1));
                let dens = 0.5 * (density[a] + density[b]);
                let gtp = 0.5 * (inv_metric[a].get(0, 1) + inv_metric[b].get(0, 1));
                let gpp = 0.5 * (inv_metric[a].get(1, 1) + inv_metric[b].get(1, 1));
                let f_p = (f[b] - f[a]) / dp;
                let f_t = 0.5 * (grads[a].0 + grads[b].0);
                dens * (gtp * f_t + gpp * f_p / s)
            };
            for l in 0..np as isize {
                let i = idx(j, l);
                let lu = l as usize;
                let dtheta_part = (theta_flux[(j + 1) * np + lu] - theta_flux[j * np + lu]) * dp;
                let dphi_part = (phi_flux(l) - phi_flux(l - 1)) * dt;
                out[i] = (dtheta_part + dphi_part) / (cell * density[i]);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grids::Grid;

    #[test]
    fn rejects_bad_sizes() {
        assert!(LatLongGrid::new(7, 16).is_err());
        assert!(LatLongGrid::new(8, 15).is_err());
        assert!(LatLongGrid::new(8, 17).is_err());
        assert!(LatLongGrid::new(8, 16).is_ok());
    }

    #[test]
    fn quadrature() {
        let g = Grid::latlong(16, 32).unwrap();
        assert!((g.integrate(&vec![1.0; g.len()]) - 4.0 * PI).abs() < 1e-12);
        let cells: f64 = g.cell_measures().iter().sum();
        assert!((cells - 4.0 * PI).abs() < 1e-12);
        // polynomials in cos(theta) of degree < ntheta are exact
        let p = g.integrate(&g.sample(|t, _| t.cos().powi(2) + t.cos().powi(8)));
        assert!((p - 4.0 * PI * (1.0 / 3.0 + 1.0 / 9.0)).abs() < 1e-13);
        // smooth non-polynomial data converges faster than any power of h
        let err = |nt: usize| {
            let g = Grid::latlong(nt, 2 * nt).unwrap();
            let f = g.sample(|t, p| (t.cos() + 0.3 * t.sin() * p.cos()).exp());
            // int_{S^2} exp(a . x) = 4 pi sinh|a| / |a|
            let a = (1.0f64 + 0.09).sqrt();
            (g.integrate(&f) - 4.0 * PI * a.sinh() / a).abs()
        };
        assert!(err(8) < 1e-6, "{}", err(8));
        assert!(err(16) < 1e-13, "{}", err(16));
    }

    #[test]
    fn jet_of_non_axisymmetric_field() {
        // f = x = sin(theta) cos(phi): grad_sigma f and Hess f = -f sigma
        let err = |nt: usize| {
            let g = Grid::latlong(nt, 2 * nt).unwrap();
            let f = g.sample(|t, p| t.sin() * p.cos());
            let jets = g.jets(&f).unwrap();
            let mut e: f64 = 0.0;
            for (i, jet) in jets.iter().enumerate() {
                let (t, p) = (g.theta(i), g.phi(i));
                e = e.max((jet.grad[0] - t.cos() * p.cos()).abs());
                e = e.max((jet.grad[1] + p.sin()).abs());
                e = e.max((jet.hess.get(0, 0) + f[i]).abs());
                e = e.max((jet.hess.get(1, 1) + f[i]).abs());
                e = e.max(jet.hess.get(0, 1).abs());
            }
            e
        };
        let (e1, e2) = (err(32), err(64));
        assert!(e2 < 2e-3, "{e2}");
        assert!((e1 / e2).log2() > 1.8, "{e1} {e2}");
    }

    #[test]
    fn weighted_laplacian_telescopes() {
        let g = LatLongGrid::new(16, 32).unwrap();
        let n = g.len();
        let node = |i: usize| (g.theta(i / g.nphi()), g.phi(i % g.nphi()));
        let f: Vec<f64> = (0..n)
            .map(|i| {
                let (t, p) = node(i);
                (t.cos() + t.sin() * p.sin()).exp()
            })
            .collect();
        let dens: Vec<f64> = (0..n)
            .map(|i| 1.0 + 0.3 * node(i).0.cos().powi(2))
            .collect();
        let ginv: Vec<SmallMat> = (0..n)
            .map(|i| {
                let (t, p) = node(i);
                let mut a = SmallMat::identity(2);
                a.set(0, 1, 0.1 * t.sin() * p.cos());
                a.set(1, 0, 0.1 * t.sin() * p.cos());
                a
            })
            .collect();
        let lap = g.weighted_laplacian(&f, &dens, &ginv);
        let total: f64 = (0..n)
            .map(|i| g.cell_measures()[i] * dens[i] * lap[i])
            .sum();
        assert!(total.abs() < 1e-12, "{total}");
    }

    #[test]
    fn weighted_laplacian_first_harmonic() {
        // Delta x = -2 x on S^2
        let err = |nt: usize| {
            let g = LatLongGrid::new(nt, 2 * nt).unwrap();
            let n = g.len();
            let f: Vec<f64> = (0..n)
                .map(|i| {
                    let (t, p) = (g.theta(i / g.nphi()), g.phi(i % g.nphi()));
                    t.sin() * p.cos() + 0.5 * t.cos()
                })
                .collect();
            let lap = g.weighted_laplacian(&f, &vec![1.0; n], &vec![SmallMat::identity(2); n]);
            // area-weighted rms: the pole rings are only first order pointwise
            let sq: f64 = (0..n)
                .map(|i| g.cell_measures()[i] * (lap[i] + 2.0 * f[i]).powi(2))
                .sum();
            (sq / (4.0 * PI)).sqrt()
        };
        let (e1, e2) = (err(32), err(64));
        assert!(e2 < 1e-3, "{e2}");
        assert!((e1 / e2).log2() > 1.8, "{e1} {e2}");
    }
}
