use std::f64::consts::PI;

use super::{GridError, SphereJet};
use crate::linalg::{SmallMat, MAX_DIM};
use crate::quadrature::{gl16_integrate, sphere_area};

/// Uniform polar grid `theta_j = j pi / (m-1)`, `j = 0..m`, for fields on
/// `S^n` depending on the polar angle only.
///
/// Frame at each node: `e_theta` followed by the `n-1` unit azimuthal
/// directions. Poles are handled with even reflection ghost nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisymGrid {
    n: usize,
    m: usize,
    h: f64,
    weights: Vec<f64>,
    /// cell measures `int_cell sin^{n-1}`, cells `[theta_j -+ h/2]` clipped to `[0, pi]`
    cells: Vec<f64>,
    /// `cot theta_j` at interior nodes, 0 at the poles
    cot: Vec<f64>,
}

impl AxisymGrid {
    pub fn new(n: usize, m: usize) -> Result<Self, GridError> {
        if !(2..=MAX_DIM).contains(&n) {
            return Err(GridError::Invalid(format!(
                "dimension n = {n} outside 2..={MAX_DIM}"
            )));
        }
        if m < 5 || m.is_multiple_of(2) {
            return Err(GridError::Invalid(format!(
                "node count m = {m} must be odd and >= 5"
            )));
        }
        let h = PI / (m - 1) as f64;
        let p = (n - 1) as i32;
        let cells: Vec<f64> = (0..m)
            .map(|j| {
                let t = j as f64 * h;
                let a = (t - 0.5 * h).max(0.0);
                let b = (t + 0.5 * h).min(PI);
                gl16_integrate(a, b, |x| x.sin().powi(p))
            })
            .collect();
        let omega = sphere_area(n - 1);
        let weights = cells.iter().map(|c| omega * c).collect();
        let cot = (0..m)
            .map(|j| {
                if j == 0 || j == m - 1 {
                    0.0
                } else {
                    let t = j as f64 * h;
                    t.cos() / t.sin()
                }
            })
            .collect();
        Ok(Self {
            n,
            m,
            h,
            weights,
            cells,
            cot,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn theta(&self, j: usize) -> f64 {
        if j == self.m - 1 {
            PI
        } else {
            j as f64 * self.h
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Value at index `j` in `-1..=m`, reflecting across the poles.
    #[inline]
    fn at(&self, f: &[f64], j: isize) -> f64 {
        let m = self.m as isize;
        let idx = if j < 0 {
            -j
        } else if j >= m {
            2 * (m - 1) - j
        } else {
            j
        };
        f[idx as usize]
    }

    /// `f'` by centered differences (zero at the poles).
    pub fn derivative(&self, f: &[f64]) -> Vec<f64> {
        let h = self.h;
        (0..self.m as isize)
            .map(|j| (self.at(f, j + 1) - self.at(f, j - 1)) / (2.0 * h))
            .collect()
    }

    pub(super) fn visit_jets(&self, f: &[f64], mut visit: impl FnMut(&SphereJet)) {
        let (n, m, h) = (self.n, self.m, self.h);
        let mut jet = SphereJet {
            node: 0,
            value: 0.0,
            grad: [0.0; MAX_DIM],
            hess: SmallMat::zeros(n),
        };
        for j in 0..m {
            let ji = j as isize;
            let (fm, f0, fp) = (self.at(f, ji - 1), f[j], self.at(f, ji + 1));
            let d1 = (fp - fm) / (2.0 * h);
            let d2 = (fp - 2.0 * f0 + fm) / (h * h);
            // cot(theta) f' -> f'' at the poles
            let angular = if j == 0 || j == m - 1 {
                d2
            } else {
                self.cot[j] * d1
            };
            jet.node = j;
            jet.value = f0;
            jet.grad[0] = d1;
            jet.hess.set(0, 0, d2);
            for a in 1..n {
                jet.hess.set(a, a, angular);
            }
            visit(&jet);
        }
    }

    pub(super) fn weighted_laplacian(
        &self,
        f: &[f64],
        density: &[f64],
        inv_metric: &[SmallMat],
    ) -> Vec<f64> {
        let (m, h) = (self.m, self.h);
        let p = (self.n - 1) as i32;
        // flux through the face between j and j+1
        let flux: Vec<f64> = (0..m - 1)
            .map(|j| {
                let s = (self.theta(j) + 0.5 * h).sin().powi(p);
                let a = 0.5 * (density[j] + density[j + 1]);
                let g = 0.5 * (inv_metric[j].get(0, 0) + inv_metric[j + 1].get(0, 0));
                s * a * g * (f[j + 1] - f[j]) / h
            })
            .collect();
        (0..m)
            .map(|j| {
                let right = if j + 1 < m { flux[j] } else { 0.0 };
                let left = if j > 0 { flux[j - 1] } else { 0.0 };
                (right - left) / (self.cells[j] * density[j])
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grids::Grid;

    #[test]
    fn rejects_bad_sizes() {
        assert!(AxisymGrid::new(3, 4).is_err());
        assert!(AxisymGrid::new(3, 6).is_err());
        assert!(AxisymGrid::new(1, 11).is_err());
        assert!(AxisymGrid::new(3, 5).is_ok());
    }

    #[test]
    fn quadrature_of_one_is_sphere_area() {
        let g2 = Grid::axisym(2, 21).unwrap();
        assert!((g2.integrate(&[1.0; 21]) - 4.0 * PI).abs() < 1e-10);
        let g3 = Grid::axisym(3, 21).unwrap();
        assert!((g3.integrate(&[1.0; 21]) - 2.0 * PI * PI).abs() < 1e-8);
        for n in 2..=8 {
            let g = Grid::axisym(n, 101).unwrap();
            let area = sphere_area(n);
            assert!((g.integrate(&vec![1.0; 101]) - area).abs() < 1e-12 * area);
        }
    }

    #[test]
    fn quadrature_is_second_order() {
        let exact = 4.0 * PI / 3.0;
        let err = |m: usize| {
            let g = Grid::axisym(2, m).unwrap();
            (g.integrate(&g.sample(|t, _| t.cos().powi(2))) - exact).abs()
        };
        let (e1, e2) = (err(101), err(201));
        let order = (e1 / e2).log2();
        assert!(e2 < 1e-3, "{e2}");
        assert!((order - 2.0).abs() < 0.1, "order {order}");
    }

    #[test]
    fn cos_theta_jet_is_second_order() {
        // rho = cos(theta) on S^2: rho'' = -cos, angular = cot * (-sin) = -cos
        let err = |m: usize| {
            let g = Grid::axisym(2, m).unwrap();
            let jets = g.jets(&g.sample(|t, _| t.cos())).unwrap();
            jets.iter()
                .enumerate()
                .map(|(j, jet)| {
                    let t = g.theta(j);
                    let e1 = (jet.grad[0] + t.sin()).abs();
                    let e2 = (jet.hess.get(0, 0) + t.cos()).abs();
                    let e3 = (jet.hess.get(1, 1) + t.cos()).abs();
                    e1.max(e2).max(e3)
                })
                .fold(0.0, f64::max)
        };
        let (e1, e2) = (err(51), err(101));
        assert!(e2 < 1e-3);
        let order = (e1 / e2).log2();
        assert!((order - 2.0).abs() < 0.15, "order {order}");
    }

    #[test]
    fn weighted_laplacian_of_first_harmonic() {
        // Delta cos = -n cos on S^n; unit density and metric
        for n in [2usize, 3, 5] {
            let err = |m: usize| {
                let g = AxisymGrid::new(n, m).unwrap();
                let f: Vec<f64> = (0..m).map(|j| g.theta(j).cos()).collect();
                let lap = g.weighted_laplacian(&f, &vec![1.0; m], &vec![SmallMat::identity(n); m]);
                lap.iter()
                    .zip(&f)
                    .map(|(l, v)| (l + n as f64 * v).abs())
                    .fold(0.0, f64::max)
            };
            let (e1, e2) = (err(101), err(201));
            assert!(e2 < 1e-3, "n={n} e={e2}");
            assert!((e1 / e2).log2() > 1.8, "n={n}: {e1} {e2}");
        }
    }

    #[test]
    fn weighted_laplacian_telescopes() {
        let n = 3;
        let g = AxisymGrid::new(n, 41).unwrap();
        let f: Vec<f64> = (0..41).map(|j| (2.0 * g.theta(j)).cos() + 0.3).collect();
        let dens: Vec<f64> = (0..41)
            .map(|j| 1.0 + 0.5 * g.theta(j).cos().powi(2))
            .collect();
        let ginv: Vec<SmallMat> = (0..41)
            .map(|j| {
                let mut a = SmallMat::identity(n);
                a.set(0, 0, 1.0 + 0.2 * g.theta(j).sin());
                a
            })
            .collect();
        let lap = g.weighted_laplacian(&f, &dens, &ginv);
        let total: f64 = (0..41).map(|j| g.weights()[j] * dens[j] * lap[j]).sum();
        assert!(total.abs() < 1e-12, "{total}");
    }
}
