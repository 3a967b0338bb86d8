//! Verified C1 approximation of 1-D semi-Lipschitz functions.
//!
//! The construction mollifies the tabulated input with a compactly
//! supported quartic kernel and shrinks the width until two clauses are
//! verified on the grid: the pointwise deviation stays within the given
//! epsilon, and the empirical slip constant grows by at most r. The output
//! is certified, never assumed; if the width schedule bottoms out the
//! routine fails loudly instead of returning degraded output.

use crate::error::{Error, Result};
use crate::finsler::{DistanceMethod, FinslerChart};
use crate::quasimetric::SlipBound;
use crate::scalar::ScalarField;

use super::empirical_slip;

#[derive(Debug, Clone, Copy)]
pub struct SmoothApproxOptions {
    pub max_halvings: usize,
    pub initial_width: Option<f64>,
    /// Verification grid refinement factor over the input grid.
    pub verification_factor: usize,
}

impl Default for SmoothApproxOptions {
    fn default() -> Self {
        SmoothApproxOptions {
            max_halvings: 40,
            initial_width: None,
            verification_factor: 2,
        }
    }
}

/// Smooths a tabulated semi-Lipschitz function into a C1 field `g` with
/// `|g - f| <= epsilon` on the input grid and `slip(g) <= slip(f) + r` on
/// the verification grid. A field that is already C1 satisfies both clauses
/// with `g = f` and is returned unchanged.
pub fn smooth_approximate_1d(
    chart: &FinslerChart,
    f: &ScalarField,
    epsilon: &ScalarField,
    r: f64,
    opts: SmoothApproxOptions,
) -> Result<ScalarField> {
    if chart.dim() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, got: chart.dim() });
    }
    if !(r > 0.0) {
        return Err(Error::Precondition("r must be positive".into()));
    }
    if f.is_c1() {
        return Ok(f.clone());
    }
    let (xs, ys) = match f {
        ScalarField::Tabulated1d { xs, ys } => (xs.clone(), ys.clone()),
        _ => {
            return Err(Error::Precondition(
                "smoothing input must be tabulated or already C1".into(),
            ))
        }
    };
    if xs.len() < 2 || xs.len() != ys.len() {
        return Err(Error::MalformedInput("tabulated field needs matching xs/ys".into()));
    }
    if xs.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::MalformedInput("tabulated xs must be strictly increasing".into()));
    }
    for x in [xs[0], *xs.last().unwrap()] {
        if !chart.contains(&[x]) {
            return Err(Error::OutOfDomain { point: vec![x] });
        }
    }

    let mut eps_min = f64::INFINITY;
    for &x in &xs {
        let e = epsilon.eval(&[x]);
        if !(e > 0.0) {
            return Err(Error::Precondition(format!(
                "epsilon must be positive, got {e} at {x}"
            )));
        }
        eps_min = eps_min.min(e);
    }

    let grid_pairs = all_ordered_pairs(&xs);
    let slip_f = match empirical_slip(chart, f, &grid_pairs, DistanceMethod::Auto)? {
        (SlipBound::Finite(v), _) => v,
        (SlipBound::Infinite, w) => {
            return Err(Error::Precondition(format!(
                "input is not semi-Lipschitz on the grid (witness {w:?})"
            )))
        }
    };

    let span = xs.last().unwrap() - xs[0];
    let max_slope = xs
        .windows(2)
        .zip(ys.windows(2))
        .map(|(x, y)| ((y[1] - y[0]) / (x[1] - x[0])).abs())
        .fold(0.0f64, f64::max);
    let mut width = opts
        .initial_width
        .unwrap_or_else(|| (eps_min / (max_slope + 1e-12)).min(span / 8.0));

    let vxs = refined_grid(&xs, opts.verification_factor.max(1));
    let vpairs = all_ordered_pairs(&vxs);

    let mut last_failure = String::new();
    for _ in 0..opts.max_halvings {
        if width < 1e-14 * span {
            break;
        }
        let g = ScalarField::Mollified1d { xs: xs.clone(), ys: ys.clone(), width };

        let mut deviation_ok = true;
        for (&x, &y) in xs.iter().zip(&ys) {
            let dev = (g.eval(&[x]) - y).abs();
            if dev > epsilon.eval(&[x]) + 1e-12 {
                deviation_ok = false;
                last_failure = format!("|g - f| = {dev} at x = {x} exceeds epsilon");
                break;
            }
        }
        if deviation_ok {
            let (slip_g, witness) = empirical_slip(chart, &g, &vpairs, DistanceMethod::Auto)?;
            match slip_g {
                SlipBound::Finite(s) if s <= slip_f + r + 1e-12 => return Ok(g),
                SlipBound::Finite(s) => {
                    last_failure = format!(
                        "slip(g) = {s} exceeds slip(f) + r = {} (witness {witness:?})",
                        slip_f + r
                    );
                }
                SlipBound::Infinite => {
                    last_failure = "slip(g) infinite on the verification grid".into();
                }
            }
        }
        width *= 0.5;
    }
    Err(Error::ApproximationFailed(format!(
        "width schedule exhausted below {width}: {last_failure}"
    )))
}

fn all_ordered_pairs(xs: &[f64]) -> Vec<(Vec<f64>, Vec<f64>)> {
    let mut out = Vec::with_capacity(xs.len() * (xs.len() - 1));
    for &a in xs {
        for &b in xs {
            if a != b {
                out.push((vec![a], vec![b]));
            }
        }
    }
    out
}

fn refined_grid(xs: &[f64], factor: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(xs.len() * factor);
    for w in xs.windows(2) {
        for k in 0..factor {
            out.push(w[0] + (w[1] - w[0]) * k as f64 / factor as f64);
        }
    }
    out.push(*xs.last().unwrap());
    out
}
