//! Gauss-Legendre rules and sphere-area constants.

use std::f64::consts::PI;
use std::sync::OnceLock;

/// Nodes and weights of the `npts`-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(npts: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; npts];
    let mut weights = vec![0.0; npts];
    let nf = npts as f64;
    for i in 0..npts.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=npts {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if npts == 0 { 1.0 } else { p1 };
            let pnm1 = p0;
            dp = nf * (x * pn - pnm1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[npts - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[npts - 1 - i] = w;
    }
    (nodes, weights)
}

fn gl16() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(16))
}

/// `int_a^b f` with the 16-point Gauss-Legendre rule on one panel.
pub fn gl16_integrate(a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
    let (x, w) = gl16();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    x.iter()
        .zip(w)
        .map(|(xi, wi)| wi * f(mid + half * xi))
        .sum::<f64>()
        * half
}

/// Gamma function at positive integers and half-integers, exactly by recurrence.
pub fn gamma_half_integer(x: f64) -> f64 {
    let twice = (2.0 * x).round();
    assert!(
        (2.0 * x - twice).abs() < 1e-12 && twice >= 1.0,
        "gamma_half_integer needs x in {{1/2, 1, 3/2, ...}}, got {x}"
    );
    let (mut g, mut t) = if twice as i64 % 2 == 0 {
        (1.0, 1.0)
    } else {
        (PI.sqrt(), 0.5)
    };
    while t + 0.5 < x {
        g *= t;
        t += 1.0;
    }
    g
}

/// Area of the unit sphere `S^n`: `2 pi^{(n+1)/2} / Gamma((n+1)/2)`.
pub fn sphere_area(n: usize) -> f64 {
    let a = 0.5 * (n as f64 + 1.0);
    2.0 * PI.powf(a) / gamma_half_integer(a)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_is_exact_for_high_degree() {
        let (x, w) = gauss_legendre(16);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        // degree 30 monomial: int_{-1}^1 x^30 = 2/31
        let s: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(30)).sum();
        assert!((s - 2.0 / 31.0).abs() < 1e-14);
        assert!(x.windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn gl16_cosh_integral() {
        let v = gl16_integrate(0.0, 1.0, |r| r.cosh().powi(2));
        assert!((v - (2.0 + 2f64.sinh()) / 4.0).abs() < 1e-15);
    }

    #[test]
    fn sphere_areas() {
        assert!((sphere_area(0) - 2.0).abs() < 1e-15);
        assert!((sphere_area(1) - 2.0 * PI).abs() < 1e-14);
        assert!((sphere_area(2) - 4.0 * PI).abs() < 1e-14);
        assert!((sphere_area(3) - 2.0 * PI * PI).abs() < 1e-13);
        assert!((sphere_area(4) - 8.0 * PI * PI / 3.0).abs() < 1e-13);
        for n in 2..10 {
            // |S^n| = 2 pi |S^{n-2}| / (n-1)
            let rec = 2.0 * PI * sphere_area(n - 2) / (n as f64 - 1.0);
            assert!((sphere_area(n) - rec).abs() < 1e-12 * rec);
        }
    }
}
