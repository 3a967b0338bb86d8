//! Registered scalar-field families with analytic derivative access.
//!
//! Fields are small expression trees over closed-form leaves, so sums,
//! products, scalings, reciprocals and compositions with registered maps
//! stay inside the family system (no arbitrary user code in configs).
//! Every C1 family carries an analytic gradient that is cross-checked
//! against central finite differences in the test suite.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::finsler::{phi, phi_prime};
use crate::isometry::SmoothMap;
use crate::numeric::central_gradient;

/// Step for the central finite-difference fallback/self-check.
pub const FD_STEP: f64 = 1e-6;
/// Relative agreement required between analytic and FD derivatives.
pub const FD_REL_TOL: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "kebab-case")]
pub enum ScalarField {
    Const(f64),
    /// `offset + <coeffs, x>`.
    Affine { coeffs: Vec<f64>, offset: f64 },
    /// `offset + scale * arctan(x_0)`.
    #[serde(alias = "arctan-based")]
    Arctan { scale: f64, offset: f64 },
    /// `phi(x_0) = x_0 - arctan(x_0)`.
    Phi,
    /// `-phi(x_0)`.
    NegPhi,
    /// Clamped-polynomial bump: `height * (1 - u^2)^2` with
    /// `u = (x_0 - center)/width` on the matching side, zero outside.
    /// C1, compactly supported, nonnegative.
    #[serde(alias = "polynomial-clamped")]
    Bump {
        center: f64,
        left_width: f64,
        right_width: f64,
        height: f64,
    },
    /// Piecewise-linear interpolant of a 1-D table, extended with the end
    /// slopes. Not C1.
    Tabulated1d { xs: Vec<f64>, ys: Vec<f64> },
    /// Quartic-kernel mollification of a 1-D table; the convolution is
    /// integrated in closed form per segment, so evaluation and derivative
    /// are exact. C1.
    Mollified1d { xs: Vec<f64>, ys: Vec<f64>, width: f64 },
    /// Smoothed truncated distance function of a translation-invariant
    /// Randers structure: a softened distance from `center` composed with a
    /// C1 ramp that levels off below 1, shifted by `delta` to stay
    /// nonnegative. Unit semi-Lipschitz bound by construction.
    SmoothTruncDist {
        center: Vec<f64>,
        drift: Vec<f64>,
        delta: f64,
        shoulder: f64,
    },
    Sum(Vec<ScalarField>),
    Scale(f64, Box<ScalarField>),
    Product(Box<ScalarField>, Box<ScalarField>),
    /// `1 / inner`; callers must keep the denominator away from zero.
    Recip(Box<ScalarField>),
    /// `inner(map(x))` for a registered smooth map.
    Compose {
        map: Box<SmoothMap>,
        inner: Box<ScalarField>,
    },
}

impl ScalarField {
    pub fn neg_phi() -> Self {
        ScalarField::NegPhi
    }

    pub fn arctan() -> Self {
        ScalarField::Arctan { scale: 1.0, offset: 0.0 }
    }

    /// `pi/2 + arctan(x_0)`: positive, bounded by pi, unit slip norm on the
    /// arctan line.
    pub fn shifted_arctan() -> Self {
        ScalarField::Arctan { scale: 1.0, offset: std::f64::consts::FRAC_PI_2 }
    }

    pub fn bump(center: f64, width: f64, height: f64) -> Self {
        ScalarField::Bump { center, left_width: width, right_width: width, height }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            ScalarField::Const(c) => *c,
            ScalarField::Affine { coeffs, offset } => {
                offset + coeffs.iter().zip(x).map(|(c, t)| c * t).sum::<f64>()
            }
            ScalarField::Arctan { scale, offset } => offset + scale * x[0].atan(),
            ScalarField::Phi => phi(x[0]),
            ScalarField::NegPhi => -phi(x[0]),
            ScalarField::Bump { center, left_width, right_width, height } => {
                let w = if x[0] < *center { left_width } else { right_width };
                let u = (x[0] - center) / w;
                if u.abs() >= 1.0 {
                    0.0
                } else {
                    let s = 1.0 - u * u;
                    height * s * s
                }
            }
            ScalarField::Tabulated1d { xs, ys } => interp_linear(xs, ys, x[0]).0,
            ScalarField::Mollified1d { xs, ys, width } => {
                mollified_eval(xs, ys, *width, x[0]).0
            }
            ScalarField::SmoothTruncDist { center, drift, delta, shoulder } => {
                let (rho, _) = softened_distance(center, drift, *delta, x);
                ramp(rho, *shoulder).0 + delta
            }
            ScalarField::Sum(parts) => parts.iter().map(|p| p.eval(x)).sum(),
            ScalarField::Scale(a, inner) => a * inner.eval(x),
            ScalarField::Product(a, b) => a.eval(x) * b.eval(x),
            ScalarField::Recip(inner) => 1.0 / inner.eval(x),
            ScalarField::Compose { map, inner } => inner.eval(&map.apply(x)),
        }
    }

    pub fn grad(&self, x: &[f64]) -> Vec<f64> {
        let dim = x.len();
        match self {
            ScalarField::Const(_) => vec![0.0; dim],
            ScalarField::Affine { coeffs, .. } => {
                (0..dim).map(|i| coeffs.get(i).copied().unwrap_or(0.0)).collect()
            }
            ScalarField::Arctan { scale, .. } => {
                one_d(dim, scale / (1.0 + x[0] * x[0]))
            }
            ScalarField::Phi => one_d(dim, phi_prime(x[0])),
            ScalarField::NegPhi => one_d(dim, -phi_prime(x[0])),
            ScalarField::Bump { center, left_width, right_width, height } => {
                let w = if x[0] < *center { left_width } else { right_width };
                let u = (x[0] - center) / w;
                if u.abs() >= 1.0 {
                    one_d(dim, 0.0)
                } else {
                    one_d(dim, height * 2.0 * (1.0 - u * u) * (-2.0 * u) / w)
                }
            }
            ScalarField::Tabulated1d { xs, ys } => one_d(dim, interp_linear(xs, ys, x[0]).1),
            ScalarField::Mollified1d { xs, ys, width } => {
                one_d(dim, mollified_eval(xs, ys, *width, x[0]).1)
            }
            ScalarField::SmoothTruncDist { center, drift, delta, shoulder } => {
                let (rho, drho) = softened_distance(center, drift, *delta, x);
                let slope = ramp(rho, *shoulder).1;
                drho.into_iter().map(|g| slope * g).collect()
            }
            ScalarField::Sum(parts) => {
                let mut g = vec![0.0; dim];
                for p in parts {
                    for (gi, pi) in g.iter_mut().zip(p.grad(x)) {
                        *gi += pi;
                    }
                }
                g
            }
            ScalarField::Scale(a, inner) => inner.grad(x).into_iter().map(|g| a * g).collect(),
            ScalarField::Product(a, b) => {
                let (fa, fb) = (a.eval(x), b.eval(x));
                a.grad(x)
                    .into_iter()
                    .zip(b.grad(x))
                    .map(|(ga, gb)| ga * fb + fa * gb)
                    .collect()
            }
            ScalarField::Recip(inner) => {
                let v = inner.eval(x);
                inner.grad(x).into_iter().map(|g| -g / (v * v)).collect()
            }
            ScalarField::Compose { map, inner } => {
                let y = map.apply(x);
                let gy = inner.grad(&y);
                let jac = map.jacobian(x);
                // J^T * grad
                (0..dim)
                    .map(|i| (0..gy.len()).map(|k| jac[k][i] * gy[k]).sum())
                    .collect()
            }
        }
    }

    /// Whether the field is C1 by construction.
    pub fn is_c1(&self) -> bool {
        match self {
            ScalarField::Tabulated1d { .. } => false,
            ScalarField::Sum(parts) => parts.iter().all(|p| p.is_c1()),
            ScalarField::Scale(_, inner) | ScalarField::Recip(inner) => inner.is_c1(),
            ScalarField::Product(a, b) => a.is_c1() && b.is_c1(),
            ScalarField::Compose { map, inner } => map.is_smooth() && inner.is_c1(),
            _ => true,
        }
    }

    /// Verifies the analytic gradient against central finite differences at
    /// the given points. Tabulated fields are exempt (their derivative
    /// contract is the interpolant slope, discontinuous at the knots).
    pub fn derivative_self_check(&self, samples: &[Vec<f64>]) -> Result<()> {
        if !self.is_c1() {
            return Ok(());
        }
        for x in samples {
            let analytic = self.grad(x);
            let fd = central_gradient(&|p: &[f64]| self.eval(p), x, FD_STEP);
            for (i, (a, d)) in analytic.iter().zip(&fd).enumerate() {
                let scale = a.abs().max(d.abs()).max(1.0);
                if (a - d).abs() > FD_REL_TOL * scale {
                    return Err(Error::InvalidStructure(format!(
                        "derivative self-check failed at {x:?} axis {i}: analytic {a}, fd {d}"
                    )));
                }
            }
        }
        Ok(())
    }
}

fn one_d(dim: usize, g: f64) -> Vec<f64> {
    let mut v = vec![0.0; dim];
    v[0] = g;
    v
}

/// Piecewise-linear interpolation with end-slope extension.
/// Returns (value, slope of the containing segment).
fn interp_linear(xs: &[f64], ys: &[f64], t: f64) -> (f64, f64) {
    debug_assert!(xs.len() >= 2 && xs.len() == ys.len());
    let n = xs.len();
    let seg = if t <= xs[0] {
        0
    } else if t >= xs[n - 1] {
        n - 2
    } else {
        match xs.binary_search_by(|v| v.partial_cmp(&t).unwrap()) {
            Ok(i) => i.min(n - 2),
            Err(i) => i - 1,
        }
    };
    let slope = (ys[seg + 1] - ys[seg]) / (xs[seg + 1] - xs[seg]);
    (ys[seg] + slope * (t - xs[seg]), slope)
}

// Quartic kernel K(t) = 15/16 (1 - (t/w)^2)^2 / w on [-w, w].
// P0 is its antiderivative, P1 the antiderivative of t K(t).
fn kernel_p0(t: f64, w: f64) -> f64 {
    let u = (t / w).clamp(-1.0, 1.0);
    15.0 / 16.0 * (u - 2.0 / 3.0 * u.powi(3) + 0.2 * u.powi(5))
}

fn kernel_p1(t: f64, w: f64) -> f64 {
    let u = (t / w).clamp(-1.0, 1.0);
    15.0 / 16.0 * w * (0.5 * u * u - 0.25 * u.powi(4) + u.powi(6) / 6.0)
}

/// Exact convolution of the piecewise-linear interpolant with the quartic
/// kernel, together with its derivative: per segment the integrand is a
/// polynomial, so both integrals have closed forms.
fn mollified_eval(xs: &[f64], ys: &[f64], w: f64, x: f64) -> (f64, f64) {
    let n = xs.len();
    // segment breakpoints extended to cover [x-w, x+w]
    let lo = x - w;
    let hi = x + w;
    let mut value = 0.0;
    let mut slope_acc = 0.0;
    // iterate over the (at most n+1) linear pieces: (-inf, xs[0]], the table
    // segments, and [xs[n-1], inf) with end-slope extension
    let mut piece = |s1: f64, s2: f64, a: f64, b: f64| {
        // f-hat(s) = a + b s on [s1, s2]
        let c1 = s1.max(lo);
        let c2 = s2.min(hi);
        if c1 >= c2 {
            return;
        }
        // substitute t = x - s: value integral over t in [x-c2, x-c1]
        let (t1, t2) = (x - c2, x - c1);
        let dp0 = kernel_p0(t2, w) - kernel_p0(t1, w);
        let dp1 = kernel_p1(t2, w) - kernel_p1(t1, w);
        value += (a + b * x) * dp0 - b * dp1;
        slope_acc += b * dp0;
    };
    let first_slope = (ys[1] - ys[0]) / (xs[1] - xs[0]);
    piece(
        f64::NEG_INFINITY,
        xs[0],
        ys[0] - first_slope * xs[0],
        first_slope,
    );
    for i in 0..n - 1 {
        let b = (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]);
        let a = ys[i] - b * xs[i];
        piece(xs[i], xs[i + 1], a, b);
    }
    let last_slope = (ys[n - 1] - ys[n - 2]) / (xs[n - 1] - xs[n - 2]);
    piece(
        xs[n - 1],
        f64::INFINITY,
        ys[n - 1] - last_slope * xs[n - 1],
        last_slope,
    );
    (value, slope_acc)
}

/// Softened distance `sqrt(|x-c|_A^2 + delta^2) - delta + <drift, x-c>`
/// for the identity base; returns the value and its gradient. Zero at the
/// center, dips at most O(delta) below zero near it.
fn softened_distance(center: &[f64], drift: &[f64], delta: f64, x: &[f64]) -> (f64, Vec<f64>) {
    let w: Vec<f64> = x.iter().zip(center).map(|(a, c)| a - c).collect();
    let r = (w.iter().map(|t| t * t).sum::<f64>() + delta * delta).sqrt();
    let value = r - delta + drift.iter().zip(&w).map(|(b, t)| b * t).sum::<f64>();
    let grad = w
        .iter()
        .zip(drift)
        .map(|(t, b)| t / r + b)
        .collect();
    (value, grad)
}

/// C1 ramp: identity below `1 - 2s`, levels off to the constant `1 - s`.
/// Slope stays in [0, 1]. Returns (value, slope).
fn ramp(t: f64, s: f64) -> (f64, f64) {
    let knee = 1.0 - 2.0 * s;
    if t <= knee {
        (t, 1.0)
    } else if t >= 1.0 {
        (1.0 - s, 0.0)
    } else {
        let r = 1.0 - t;
        (1.0 - s - r * r / (4.0 * s), r / (2.0 * s))
    }
}
