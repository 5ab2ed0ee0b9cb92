//! Elementary symmetric functions of principal curvature vectors.
//!
//! Everything here works on plain `&[f64]` slices so the flow kernels can
//! call in without allocating; [`CurvatureVector`] is the checked wrapper
//! used at API boundaries.

use std::ops::Deref;

use thiserror::Error;

use crate::linalg::MAX_DIM;

/// Absolute tolerance used by the closure test of the Garding cone.
pub const CONE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SymError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("curvature vector outside the cone: sigma_{k} = {value}")]
    Cone { k: usize, value: f64 },
}

/// Ordered list of principal curvatures, `n >= 2`, all finite.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureVector(Vec<f64>);

impl CurvatureVector {
    pub fn new(entries: Vec<f64>) -> Result<Self, SymError> {
        if entries.len() < 2 {
            return Err(SymError::Domain(format!(
                "curvature vector needs n >= 2 entries, got {}",
                entries.len()
            )));
        }
        if let Some(i) = entries.iter().position(|x| !x.is_finite()) {
            return Err(SymError::Domain(format!("entry {i} is not finite")));
        }
        Ok(Self(entries))
    }

    /// Same entries, sorted non-increasing.
    pub fn sorted(mut self) -> Self {
        self.0.sort_by(|a, b| b.total_cmp(a));
        self
    }

    pub fn is_sorted(&self) -> bool {
        self.0.windows(2).all(|w| w[0] >= w[1])
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for CurvatureVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Binomial coefficient `C(n, k)` as a float.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut c = 1.0;
    for i in 0..k {
        c = c * (n - i) as f64 / (i + 1) as f64;
    }
    c.round()
}

/// `b_{n,k} = C(n,k)^{1/k}`, the value of `sigma_k^{1/k}` at `(1, ..., 1)`.
pub fn b_nk(n: usize, k: usize) -> f64 {
    binomial(n, k).powf(1.0 / k as f64)
}

/// Fills `out[j] = sigma_j(lambda)` for `j = 0..=kmax`, skipping entry `skip`.
///
/// Running-product recursion, O(n * kmax).
fn elementary_into(lambda: &[f64], kmax: usize, skip: Option<usize>, out: &mut [f64]) {
    out[..=kmax].iter_mut().for_each(|e| *e = 0.0);
    out[0] = 1.0;
    let mut seen = 0usize;
    for (i, &x) in lambda.iter().enumerate() {
        if Some(i) == skip {
            continue;
        }
        seen += 1;
        for j in (1..=kmax.min(seen)).rev() {
            out[j] += x * out[j - 1];
        }
    }
}

/// All elementary symmetric functions `sigma_0, ..., sigma_n`.
pub fn sigma_all(lambda: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; lambda.len() + 1];
    elementary_into(lambda, lambda.len(), None, &mut out);
    out
}

/// `sigma_k(lambda)`; `sigma_0 = 1`.
pub fn sigma(lambda: &[f64], k: usize) -> Result<f64, SymError> {
    let n = lambda.len();
    if k > n {
        return Err(SymError::Domain(format!("k = {k} exceeds n = {n}")));
    }
    Ok(sigma_unchecked(lambda, k))
}

pub(crate) fn sigma_unchecked(lambda: &[f64], k: usize) -> f64 {
    let mut buf = [0.0; 17];
    if k < buf.len() {
        elementary_into(lambda, k, None, &mut buf);
        buf[k]
    } else {
        let mut v = vec![0.0; k + 1];
        elementary_into(lambda, k, None, &mut v);
        v[k]
    }
}

/// `sigma_0..=sigma_n` on the stack, for `n <= MAX_DIM`.
pub(crate) fn sigma_stack(lambda: &[f64]) -> [f64; MAX_DIM + 1] {
    let mut out = [0.0; MAX_DIM + 1];
    elementary_into(lambda, lambda.len(), None, &mut out);
    out
}

/// `max_i sigma_k(lambda | i)`.
pub(crate) fn max_minor(lambda: &[f64], k: usize) -> f64 {
    (0..lambda.len())
        .map(|i| minor_unchecked(lambda, k, i))
        .fold(f64::NEG_INFINITY, f64::max)
}

fn minor_unchecked(lambda: &[f64], k: usize, i: usize) -> f64 {
    let mut buf = [0.0; 17];
    if k < buf.len() {
        elementary_into(lambda, k, Some(i), &mut buf);
        buf[k]
    } else {
        let mut v = vec![0.0; k + 1];
        elementary_into(lambda, k, Some(i), &mut v);
        v[k]
    }
}

/// `sigma_k(lambda | i)`: `sigma_k` with entry `i` removed.
///
/// `k = n` is accepted and yields 0 (empty sum).
pub fn sigma_minor(lambda: &[f64], k: usize, i: usize) -> Result<f64, SymError> {
    let n = lambda.len();
    if i >= n {
        return Err(SymError::Domain(format!(
            "index {i} out of range for n = {n}"
        )));
    }
    if k > n {
        return Err(SymError::Domain(format!("k = {k} exceeds n = {n}")));
    }
    if k == n {
        return Ok(0.0);
    }
    Ok(minor_unchecked(lambda, k, i))
}

/// `d sigma_k / d lambda_i = sigma_{k-1}(lambda | i)` for every `i`.
pub fn sigma_grad(lambda: &[f64], k: usize) -> Result<Vec<f64>, SymError> {
    let n = lambda.len();
    if k == 0 || k > n {
        return Err(SymError::Domain(format!("k = {k} must lie in 1..={n}")));
    }
    Ok((0..n).map(|i| minor_unchecked(lambda, k - 1, i)).collect())
}

/// Value and first derivatives of `sigma_k` and of `F = sigma_k^{1/k}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymDerivatives {
    pub value: f64,
    pub grad: Vec<f64>,
    pub power_value: f64,
    pub power_grad: Vec<f64>,
}

/// Requires `sigma_k(lambda) > 0`.
pub fn sym_derivatives(lambda: &[f64], k: usize) -> Result<SymDerivatives, SymError> {
    let grad = sigma_grad(lambda, k)?;
    let value = sigma_unchecked(lambda, k);
    if value <= 0.0 {
        return Err(SymError::Cone { k, value });
    }
    let kf = k as f64;
    let power_value = value.powf(1.0 / kf);
    let scale = power_value / (kf * value);
    let power_grad = grad.iter().map(|g| scale * g).collect();
    Ok(SymDerivatives {
        value,
        grad,
        power_value,
        power_grad,
    })
}

/// Membership in the Garding cone `Gamma_k`.
///
/// Strict: `sigma_j > 0` for `1 <= j <= k`. Closure: `sigma_j >= -CONE_TOL`.
/// `k` larger than `n` is clamped to `n`.
pub fn gamma_cone_test(lambda: &[f64], k: usize, strict: bool) -> bool {
    let kmax = k.min(lambda.len());
    let mut buf = vec![0.0; kmax + 1];
    elementary_into(lambda, kmax, None, &mut buf);
    buf[1..]
        .iter()
        .all(|&s| if strict { s > 0.0 } else { s >= -CONE_TOL })
}

/// `(sigma_k / C(n,k))^{1/k} - (sigma_l / C(n,l))^{1/l}` on `Gamma_k`, `k > l >= 1`.
///
/// Non-positive by the Newton-Maclaurin chain, zero iff `lambda = c(1,...,1)`.
pub fn maclaurin_gap(lambda: &[f64], k: usize, l: usize) -> Result<f64, SymError> {
    let n = lambda.len();
    if l == 0 || l >= k || k > n {
        return Err(SymError::Domain(format!(
            "need 1 <= l < k <= n, got k = {k}, l = {l}, n = {n}"
        )));
    }
    let all = sigma_all(lambda);
    if let Some(j) = (1..=k).find(|&j| all[j] <= 0.0) {
        return Err(SymError::Cone {
            k: j,
            value: all[j],
        });
    }
    let normalized = |j: usize| (all[j] / binomial(n, j)).powf(1.0 / j as f64);
    Ok(normalized(k) - normalized(l))
}

/// Absolute residuals of the classical identities for `sigma_k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityResiduals {
    /// `sum_i lambda_i sigma_{k-1}(lambda|i) - k sigma_k`
    pub euler: f64,
    /// `sum_i sigma_k(lambda|i) - (n-k) sigma_k`
    pub minor_sum: f64,
    /// `sum_i sigma_{k-1}(lambda|i) lambda_i^2 - (sigma_k sigma_1 - (k+1) sigma_{k+1})`
    pub square_sum: f64,
}

impl IdentityResiduals {
    pub fn max(&self) -> f64 {
        self.euler.max(self.minor_sum).max(self.square_sum)
    }
}

pub fn identity_suite(lambda: &[f64], k: usize) -> Result<IdentityResiduals, SymError> {
    let n = lambda.len();
    if k == 0 || k >= n {
        return Err(SymError::Domain(format!(
            "identity suite needs 1 <= k <= n-1, got {k}"
        )));
    }
    let all = sigma_all(lambda);
    let kf = k as f64;
    let (mut euler, mut minor, mut square) = (0.0, 0.0, 0.0);
    for (i, &x) in lambda.iter().enumerate() {
        let m_km1 = minor_unchecked(lambda, k - 1, i);
        euler += x * m_km1;
        minor += minor_unchecked(lambda, k, i);
        square += m_km1 * x * x;
    }
    Ok(IdentityResiduals {
        euler: (euler - kf * all[k]).abs(),
        minor_sum: (minor - (n - k) as f64 * all[k]).abs(),
        square_sum: (square - (all[k] * all[1] - (kf + 1.0) * all[k + 1])).abs(),
    })
}

/// Second derivative `d^2 sigma_2 / d a_pq d a_rs` at a diagonal matrix.
///
/// 1 for `p = q, r = s, p != r`; -1 for `p = s, q = r, p != q`; 0 otherwise.
/// Independent of the matrix (`sigma_2` is quadratic).
pub fn sigma2_second_derivative(p: usize, q: usize, r: usize, s: usize) -> f64 {
    if p == q && r == s && p != r {
        1.0
    } else if p == s && q == r && p != q {
        -1.0
    } else {
        0.0
    }
}
