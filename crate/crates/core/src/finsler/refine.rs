//! Derivative-free polyline refinement: coordinate descent over interior
//! node positions with a golden-section line search per coordinate. The
//! returned length never exceeds the initial one.

use crate::error::Result;
use crate::numeric::{golden_section_min, GaussLegendre};

use super::{path_length_with_rule, segment_length, FinslerChart, PiecewisePath};

/// Relative per-sweep improvement below which the descent stops.
pub const REL_IMPROVEMENT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy)]
pub struct RefineOptions {
    pub max_sweeps: usize,
    pub rel_tol: f64,
    pub quadrature: usize,
}

impl Default for RefineOptions {
    fn default() -> Self {
        RefineOptions {
            max_sweeps: 60,
            rel_tol: REL_IMPROVEMENT_TOL,
            quadrature: super::DEFAULT_PATH_QUADRATURE,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RefineResult {
    pub value: f64,
    pub path: PiecewisePath,
    /// False when the sweep cap was reached before the improvement dropped
    /// below tolerance.
    pub converged: bool,
    pub sweeps: usize,
}

pub fn refine_path(
    chart: &FinslerChart,
    path: &PiecewisePath,
    opts: RefineOptions,
) -> Result<RefineResult> {
    path.validate_in(chart)?;
    chart.field.structure_check()?;
    let rule = GaussLegendre::new(opts.quadrature.clamp(1, 16));
    let dim = chart.dim();
    let mut nodes = path.nodes.clone();
    let initial = path_length_with_rule(chart, &PiecewisePath { nodes: nodes.clone() }, &rule);
    let mut best_value = initial;
    let mut best_nodes = nodes.clone();
    let mut total = initial;
    let mut converged = nodes.len() <= 2;
    let mut sweeps = 0;
    let h_mean = (0..dim).map(|a| chart.spacing(a)).sum::<f64>() / dim as f64;

    while sweeps < opts.max_sweeps && !converged {
        sweeps += 1;
        let before = total;
        for i in 1..nodes.len() - 1 {
            for axis in 0..dim {
                let cur = nodes[i][axis];
                let reach = cheb(&nodes[i - 1], &nodes[i])
                    .max(cheb(&nodes[i], &nodes[i + 1]))
                    .max(h_mean);
                let lo = (cur - reach).max(chart.domain[axis][0]);
                let hi = (cur + reach).min(chart.domain[axis][1]);
                if !(lo < hi) {
                    continue;
                }
                let prev = nodes[i - 1].clone();
                let next = nodes[i + 1].clone();
                let mut probe = nodes[i].clone();
                let mut local = |c: f64| {
                    probe[axis] = c;
                    segment_length(chart, &prev, &probe, &rule)
                        + segment_length(chart, &probe, &next, &rule)
                };
                let current = local(cur);
                let (arg, val) = golden_section_min(&mut local, lo, hi, 1e-12 * (1.0 + cur.abs()), 60);
                if val < current {
                    nodes[i][axis] = arg;
                }
            }
        }
        total = path_length_with_rule(chart, &PiecewisePath { nodes: nodes.clone() }, &rule);
        if total < best_value {
            best_value = total;
            best_nodes = nodes.clone();
        }
        if before - total <= opts.rel_tol * total.abs().max(1.0) {
            converged = true;
        }
    }

    Ok(RefineResult {
        value: best_value,
        path: PiecewisePath { nodes: best_nodes },
        converged,
        sweeps,
    })
}

fn cheb(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
