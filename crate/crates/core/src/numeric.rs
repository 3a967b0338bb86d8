//! Shared numerical kernels: Gauss-Legendre rules, adaptive Simpson
//! quadrature, golden-section line search and finite-difference Hessians.

use nalgebra::DMatrix;

/// A Gauss-Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds the n-point rule by Newton iteration on the Legendre
    /// polynomial roots (Chebyshev initial guesses).
    pub fn new(n: usize) -> Self {
        assert!(n >= 1 && n <= 64, "rule order out of range");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let step = p / d;
                x -= step;
                if step.abs() < 1e-15 {
                    break;
                }
            }
            nodes[n - 1 - i] = x;
            weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        GaussLegendre { nodes, weights }
    }

    /// Integrates `f` over [a, b] with a single application of the rule.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        acc * half
    }
}

/// Value and derivative of the Legendre polynomial P_n at x.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Adaptive Simpson quadrature of `f` over [a, b] to absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
    }
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        m: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (lm, flm, left) = simpson(f, a, fa, m, fm);
        let (rm, frm, right) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1)
            + recurse(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1)
    }
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let (m, fm, whole) = simpson(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, m, fm, whole, tol, 48)
}

/// Golden-section minimization of a unimodal-ish `f` on [a, b].
/// Returns (argmin, min). The bracket endpoints are also candidates.
pub fn golden_section_min<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    xtol: f64,
    max_iter: usize,
) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let (mut lo, mut hi) = (a.min(b), a.max(b));
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut best = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    for _ in 0..max_iter {
        if (hi - lo).abs() <= xtol {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
        if f1 < best.1 {
            best = (x1, f1);
        }
        if f2 < best.1 {
            best = (x2, f2);
        }
    }
    let fa = f(a);
    let fb = f(b);
    if fa < best.1 {
        best = (a, fa);
    }
    if fb < best.1 {
        best = (b, fb);
    }
    best
}

/// Golden-section maximization; returns (argmax, max).
pub fn golden_section_max<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    xtol: f64,
    max_iter: usize,
) -> (f64, f64) {
    let (x, neg) = golden_section_min(|t| -f(t), a, b, xtol, max_iter);
    (x, -neg)
}

/// Central-difference gradient with per-axis step `h`.
pub fn central_gradient<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64], h: f64) -> Vec<f64> {
    let mut g = vec![0.0; x.len()];
    let mut xp = x.to_vec();
    for i in 0..x.len() {
        xp[i] = x[i] + h;
        let fp = f(&xp);
        xp[i] = x[i] - h;
        let fm = f(&xp);
        xp[i] = x[i];
        g[i] = (fp - fm) / (2.0 * h);
    }
    g
}

/// Central-difference Hessian (symmetrized).
pub fn central_hessian<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64], h: f64) -> DMatrix<f64> {
    let n = x.len();
    let mut m = DMatrix::zeros(n, n);
    let f0 = f(x);
    let mut xp = x.to_vec();
    for i in 0..n {
        xp[i] = x[i] + h;
        let fp = f(&xp);
        xp[i] = x[i] - h;
        let fm = f(&xp);
        xp[i] = x[i];
        m[(i, i)] = (fp - 2.0 * f0 + fm) / (h * h);
    }
    for i in 0..n {
        for j in (i + 1)..n {
            xp[i] = x[i] + h;
            xp[j] = x[j] + h;
            let fpp = f(&xp);
            xp[j] = x[j] - h;
            let fpm = f(&xp);
            xp[i] = x[i] - h;
            let fmm = f(&xp);
            xp[j] = x[j] + h;
            let fmp = f(&xp);
            xp[i] = x[i];
            xp[j] = x[j];
            let v = (fpp - fpm - fmp + fmm) / (4.0 * h * h);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    let sym = 0.5 * (m + m.transpose());
    sym.symmetric_eigen()
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gauss_legendre_is_exact_on_polynomials() {
        // n-point rule integrates degree 2n-1 exactly.
        let rule = GaussLegendre::new(3);
        let exact = |p: i32, a: f64, b: f64| (b.powi(p + 1) - a.powi(p + 1)) / (p + 1) as f64;
        for p in 0..=5 {
            let got = rule.integrate(-0.7, 1.3, |x| x.powi(p));
            assert_relative_eq!(got, exact(p, -0.7, 1.3), max_relative = 1e-13, epsilon = 1e-13);
        }
    }

    #[test]
    fn gauss_legendre_weights_sum_to_two() {
        for n in [1, 2, 5, 8, 16] {
            let rule = GaussLegendre::new(n);
            let s: f64 = rule.weights.iter().sum();
            assert_relative_eq!(s, 2.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn adaptive_simpson_arctan_integrand() {
        // integral of 1/(1+t^2) over [0,1] is pi/4
        let v = adaptive_simpson(&|t: f64| 1.0 / (1.0 + t * t), 0.0, 1.0, 1e-12);
        assert_relative_eq!(v, std::f64::consts::FRAC_PI_4, epsilon = 1e-11);
    }

    #[test]
    fn golden_section_finds_parabola_minimum() {
        let (x, v) = golden_section_min(|t: f64| (t - 0.3).powi(2) + 1.0, -1.0, 1.0, 1e-12, 200);
        assert!((x - 0.3).abs() < 1e-9);
        assert!((v - 1.0).abs() < 1e-15);
    }

    #[test]
    fn hessian_of_quadratic_is_its_matrix() {
        let f = |x: &[f64]| 2.0 * x[0] * x[0] + 3.0 * x[0] * x[1] + 5.0 * x[1] * x[1];
        let h = central_hessian(&f, &[0.4, -0.2], 1e-4);
        assert_relative_eq!(h[(0, 0)], 4.0, epsilon = 1e-5);
        assert_relative_eq!(h[(0, 1)], 3.0, epsilon = 1e-5);
        assert_relative_eq!(h[(1, 1)], 10.0, epsilon = 1e-5);
        let lo = min_eigenvalue(&h);
        assert!(lo > 0.0);
    }
}
