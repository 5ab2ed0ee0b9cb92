//! Small dense symmetric matrices and the symmetric-definite generalized
//! eigenproblem `h v = kappa g v`.
//!
//! Dimensions are tiny (the hypersurface dimension), so everything lives on
//! the stack in fixed `MAX_DIM x MAX_DIM` arrays.

use thiserror::Error;

/// Largest supported hypersurface dimension.
pub const MAX_DIM: usize = 8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("matrix is not positive definite (pivot {pivot} = {value})")]
    NotPositiveDefinite { pivot: usize, value: f64 },
    #[error("Jacobi iteration did not converge")]
    NoConvergence,
}

/// Dense `n x n` matrix, `n <= MAX_DIM`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmallMat {
    n: usize,
    a: [[f64; MAX_DIM]; MAX_DIM],
}

impl SmallMat {
    pub fn zeros(n: usize) -> Self {
        assert!(n <= MAX_DIM, "dimension {n} exceeds MAX_DIM");
        Self {
            n,
            a: [[0.0; MAX_DIM]; MAX_DIM],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.a[i][i] = 1.0;
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.a[i][j] = f(i, j);
            }
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i][j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.a[i][j] = v;
    }

    pub fn mul(&self, other: &SmallMat) -> SmallMat {
        let n = self.n;
        SmallMat::from_fn(n, |i, j| (0..n).map(|k| self.a[i][k] * other.a[k][j]).sum())
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.a[i][j] * v[j]).sum())
            .collect()
    }

    pub fn transpose(&self) -> SmallMat {
        SmallMat::from_fn(self.n, |i, j| self.a[j][i])
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|j| i == j || self.a[i][j] == 0.0))
    }

    pub fn max_abs_asymmetry(&self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..self.n {
            for j in 0..i {
                m = m.max((self.a[i][j] - self.a[j][i]).abs());
            }
        }
        m
    }

    /// Lower Cholesky factor `L` with `self = L L^T`.
    pub fn cholesky(&self) -> Result<SmallMat, LinalgError> {
        let n = self.n;
        let mut l = SmallMat::zeros(n);
        for j in 0..n {
            let mut d = self.a[j][j];
            for k in 0..j {
                d -= l.a[j][k] * l.a[j][k];
            }
            if !(d > 0.0) {
                return Err(LinalgError::NotPositiveDefinite { pivot: j, value: d });
            }
            let d = d.sqrt();
            l.a[j][j] = d;
            for i in (j + 1)..n {
                let mut s = self.a[i][j];
                for k in 0..j {
                    s -= l.a[i][k] * l.a[j][k];
                }
                l.a[i][j] = s / d;
            }
        }
        Ok(l)
    }

    /// Determinant via Cholesky; only meaningful for SPD input.
    pub fn spd_determinant(&self) -> Result<f64, LinalgError> {
        let l = self.cholesky()?;
        Ok((0..self.n).map(|i| l.a[i][i] * l.a[i][i]).product())
    }

    /// Inverse of a lower-triangular matrix.
    fn lower_inverse(&self) -> SmallMat {
        let n = self.n;
        let mut inv = SmallMat::zeros(n);
        for j in 0..n {
            inv.a[j][j] = 1.0 / self.a[j][j];
            for i in (j + 1)..n {
                let mut s = 0.0;
                for k in j..i {
                    s -= self.a[i][k] * inv.a[k][j];
                }
                inv.a[i][j] = s / self.a[i][i];
            }
        }
        inv
    }

    /// Inverse of an SPD matrix.
    pub fn spd_inverse(&self) -> Result<SmallMat, LinalgError> {
        let linv = self.cholesky()?.lower_inverse();
        Ok(linv.transpose().mul(&linv))
    }
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, unsorted.
pub fn symmetric_eigenvalues(m: &SmallMat) -> Result<[f64; MAX_DIM], LinalgError> {
    let n = m.n;
    let mut a = m.a;
    let mut out = [0.0; MAX_DIM];
    let scale: f64 = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| a[i][j] * a[i][j])
        .sum::<f64>()
        .sqrt();
    for _sweep in 0..64 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum::<f64>();
        if off.sqrt() <= 1e-15 * scale || off == 0.0 {
            for i in 0..n {
                out[i] = a[i][i];
            }
            return Ok(out);
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p][q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    Err(LinalgError::NoConvergence)
}

/// Eigenvalues of `h v = kappa g v` for symmetric `h` and SPD `g`, sorted
/// non-increasing into the first `n` slots.
///
/// Reduces to the standard problem `L^{-1} h L^{-T}` with `g = L L^T`.
/// Diagonal inputs short-circuit to `h_ii / g_ii`.
pub fn generalized_eigenvalues(h: &SmallMat, g: &SmallMat) -> Result<[f64; MAX_DIM], LinalgError> {
    let n = h.n;
    let mut out = [0.0; MAX_DIM];
    if h.is_diagonal() && g.is_diagonal() {
        for i in 0..n {
            let gi = g.a[i][i];
            if !(gi > 0.0) {
                return Err(LinalgError::NotPositiveDefinite {
                    pivot: i,
                    value: gi,
                });
            }
            out[i] = h.a[i][i] / gi;
        }
    } else {
        let linv = g.cholesky()?.lower_inverse();
        let c = linv.mul(h).mul(&linv.transpose());
        // symmetrize away rounding
        let c = SmallMat::from_fn(n, |i, j| 0.5 * (c.a[i][j] + c.a[j][i]));
        out = symmetric_eigenvalues(&c)?;
    }
    out[..n].sort_by(|a, b| b.total_cmp(a));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cholesky_reconstructs() {
        let g = SmallMat::from_fn(3, |i, j| if i == j { 4.0 } else { 1.0 });
        let l = g.cholesky().unwrap();
        let back = l.mul(&l.transpose());
        for i in 0..3 {
            for j in 0..3 {
                assert!((back.get(i, j) - g.get(i, j)).abs() < 1e-14);
            }
        }
        let inv = g.spd_inverse().unwrap();
        let id = g.mul(&inv);
        for i in 0..3 {
            for j in 0..3 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((id.get(i, j) - e).abs() < 1e-14);
            }
        }
        // det of [[4,1,1],[1,4,1],[1,1,4]] = 54
        assert!((g.spd_determinant().unwrap() - 54.0).abs() < 1e-12);
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let g = SmallMat::from_fn(2, |i, j| if i == j { 1.0 } else { 2.0 });
        assert!(matches!(
            g.cholesky(),
            Err(LinalgError::NotPositiveDefinite { pivot: 1, .. })
        ));
    }

    #[test]
    fn jacobi_known_spectrum() {
        // [[2,1],[1,2]] -> 3, 1
        let m = SmallMat::from_fn(2, |i, j| if i == j { 2.0 } else { 1.0 });
        let mut ev = symmetric_eigenvalues(&m).unwrap();
        ev[..2].sort_by(|a, b| b.total_cmp(a));
        assert!((ev[0] - 3.0).abs() < 1e-14 && (ev[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn generalized_matches_characteristic_polynomial() {
        // det(h - k g) = 0 for 2x2, solved as a quadratic
        let h = SmallMat::from_fn(2, |i, j| [[1.5, 0.3], [0.3, -0.2]][i][j]);
        let g = SmallMat::from_fn(2, |i, j| [[2.0, -0.4], [-0.4, 1.1]][i][j]);
        let a = g.get(0, 0) * g.get(1, 1) - g.get(0, 1).powi(2);
        let b = -(h.get(0, 0) * g.get(1, 1) + h.get(1, 1) * g.get(0, 0)
            - 2.0 * h.get(0, 1) * g.get(0, 1));
        let c = h.get(0, 0) * h.get(1, 1) - h.get(0, 1).powi(2);
        let disc = (b * b - 4.0 * a * c).sqrt();
        let (r1, r2) = ((-b + disc) / (2.0 * a), (-b - disc) / (2.0 * a));
        let ev = generalized_eigenvalues(&h, &g).unwrap();
        assert!((ev[0] - r1.max(r2)).abs() < 1e-13);
        assert!((ev[1] - r1.min(r2)).abs() < 1e-13);
    }

    #[test]
    fn generalized_diagonal_fast_path_agrees() {
        let h = SmallMat::from_fn(3, |i, j| if i == j { [0.5, -1.0, 2.0][i] } else { 0.0 });
        let g = SmallMat::from_fn(3, |i, j| if i == j { [2.0, 1.0, 4.0][i] } else { 0.0 });
        let fast = generalized_eigenvalues(&h, &g).unwrap();
        assert_eq!(&fast[..3], &[0.5, 0.25, -1.0]);
        // perturb an off-diagonal by zero-ish to force the general path
        let mut h2 = h;
        h2.set(0, 1, 1e-300);
        h2.set(1, 0, 1e-300);
        let slow = generalized_eigenvalues(&h2, &g).unwrap();
        for i in 0..3 {
            assert!((fast[i] - slow[i]).abs() < 1e-14);
        }
    }
}
