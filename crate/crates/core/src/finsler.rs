//! Minkowski-norm fields on box domains and the quasi-distances they induce.
//!
//! A Minkowski norm is positively homogeneous and subadditive but not
//! necessarily symmetric, so the induced path-length infimum is a
//! quasi-metric: travelling with the drift is cheaper than against it.
//! Distances are computed three ways and cross-checked in the tests:
//! closed-form oracles for the registered families, a directed grid-graph
//! shortest path (upper bound), and derivative-free polyline refinement.

pub mod graph;
pub mod refine;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{central_hessian, min_eigenvalue, GaussLegendre};

/// Order of the per-edge Gauss-Legendre rule used for graph edge weights.
pub const DEFAULT_EDGE_QUADRATURE: usize = 3;
/// Default rule order for [`path_length`].
pub const DEFAULT_PATH_QUADRATURE: usize = 5;
/// Step scale for the finite-difference Hessian of F^2.
pub const HESSIAN_STEP_SCALE: f64 = 1e-4;
/// Eigenvalue threshold below which g_v is reported as not positive definite.
pub const EIGENVALUE_THRESHOLD: f64 = 1e-8;

/// `phi(t) = t - arctan t`, the potential of the arctan-line structure.
pub fn phi(t: f64) -> f64 {
    t - t.atan()
}

/// `phi'(t) = t^2 / (1 + t^2)`.
pub fn phi_prime(t: f64) -> f64 {
    t * t / (1.0 + t * t)
}

/// A field of Minkowski norms over a coordinate box.
///
/// All registered families admit closed-form geodesic distances, which the
/// numerical routes are checked against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum MinkowskiNormField {
    /// `F(x, v) = |v|`.
    Euclidean { dim: usize },
    /// `F(x, v) = sqrt(v' A v)` for a constant symmetric positive-definite A.
    Riemannian { matrix: Vec<Vec<f64>> },
    /// Randers structure `F(x, v) = sqrt(v' A v) + <drift, v>` with constant
    /// drift; positive exactly when the drift has A-dual norm below 1.
    Randers {
        drift: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        base: Option<Vec<Vec<f64>>>,
    },
    /// The 1-D non-reversible line `F(x, v) = |v| - phi'(x) v`.
    Example31,
}

impl MinkowskiNormField {
    pub fn dim(&self) -> usize {
        match self {
            MinkowskiNormField::Euclidean { dim } => *dim,
            MinkowskiNormField::Riemannian { matrix } => matrix.len(),
            MinkowskiNormField::Randers { drift, .. } => drift.len(),
            MinkowskiNormField::Example31 => 1,
        }
    }

    /// Evaluates `F(x, v)`. Invalid structures (drift of norm >= 1) may
    /// produce negative values; `structure_check` reports those up front.
    pub fn eval(&self, x: &[f64], v: &[f64]) -> f64 {
        match self {
            MinkowskiNormField::Euclidean { .. } => norm2(v),
            MinkowskiNormField::Riemannian { matrix } => quad_norm(matrix, v),
            MinkowskiNormField::Randers { drift, base } => {
                let b = match base {
                    Some(m) => quad_norm(m, v),
                    None => norm2(v),
                };
                b + dot(drift, v)
            }
            MinkowskiNormField::Example31 => {
                let v = v[0];
                v.abs() - phi_prime(x[0]) * v
            }
        }
    }

    /// True when `F(x, .)` does not depend on `x`.
    pub fn is_translation_invariant(&self) -> bool {
        !matches!(self, MinkowskiNormField::Example31)
    }

    /// Dual norm of the Randers drift in the base quadratic form, the
    /// quantity that must stay strictly below 1.
    pub fn drift_dual_norm(&self) -> Option<f64> {
        match self {
            MinkowskiNormField::Randers { drift, base } => {
                let beta = DVector::from_column_slice(drift);
                match base {
                    None => Some(beta.norm()),
                    Some(m) => {
                        let n = m.len();
                        let a = DMatrix::from_fn(n, n, |i, j| m[i][j]);
                        let chol = a.cholesky()?;
                        let w = chol.solve(&beta);
                        Some(beta.dot(&w).max(0.0).sqrt())
                    }
                }
            }
            _ => None,
        }
    }

    /// Cheap structural soundness check used before distance computations.
    pub fn structure_check(&self) -> Result<()> {
        match self {
            MinkowskiNormField::Euclidean { dim } => {
                if *dim == 0 {
                    return Err(Error::InvalidStructure("zero-dimensional field".into()));
                }
            }
            MinkowskiNormField::Riemannian { matrix } => {
                check_spd(matrix)?;
            }
            MinkowskiNormField::Randers { drift, base } => {
                if drift.is_empty() {
                    return Err(Error::InvalidStructure("empty drift".into()));
                }
                if let Some(m) = base {
                    check_spd(m)?;
                    if m.len() != drift.len() {
                        return Err(Error::DimensionMismatch {
                            expected: m.len(),
                            got: drift.len(),
                        });
                    }
                }
                let norm = self
                    .drift_dual_norm()
                    .ok_or_else(|| Error::InvalidStructure("base matrix is not SPD".into()))?;
                if norm >= 1.0 {
                    return Err(Error::InvalidStructure(format!(
                        "drift dual norm {norm} is not below 1"
                    )));
                }
            }
            MinkowskiNormField::Example31 => {}
        }
        Ok(())
    }
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|t| t * t).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn quad_norm(m: &[Vec<f64>], v: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (i, row) in m.iter().enumerate() {
        for (j, a) in row.iter().enumerate() {
            acc += a * v[i] * v[j];
        }
    }
    acc.max(0.0).sqrt()
}

fn check_spd(m: &[Vec<f64>]) -> Result<()> {
    let n = m.len();
    if m.iter().any(|r| r.len() != n) {
        return Err(Error::MalformedInput("non-square base matrix".into()));
    }
    let a = DMatrix::from_fn(n, n, |i, j| m[i][j]);
    if (&a - a.transpose()).abs().max() > 1e-12 {
        return Err(Error::InvalidStructure("base matrix is not symmetric".into()));
    }
    if a.cholesky().is_none() {
        return Err(Error::InvalidStructure(
            "base matrix is not positive definite".into(),
        ));
    }
    Ok(())
}

/// Per-axis node counts and the neighbor stencil radius of the grid graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub counts: Vec<usize>,
    pub stencil_radius: usize,
}

/// A box domain equipped with a Minkowski-norm field and a grid spec.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinslerChart {
    pub field: MinkowskiNormField,
    /// Axis-aligned box, one `[lo, hi]` per coordinate.
    pub domain: Vec<[f64; 2]>,
    pub grid: GridSpec,
}

impl FinslerChart {
    pub fn new(field: MinkowskiNormField, domain: Vec<[f64; 2]>, grid: GridSpec) -> Result<Self> {
        if domain.len() != field.dim() {
            return Err(Error::DimensionMismatch {
                expected: field.dim(),
                got: domain.len(),
            });
        }
        if domain.iter().any(|[lo, hi]| !(lo < hi)) {
            return Err(Error::MalformedInput("empty box side".into()));
        }
        if grid.counts.len() != domain.len() || grid.counts.iter().any(|&c| c < 2) {
            return Err(Error::MalformedInput(
                "grid needs at least two nodes per axis".into(),
            ));
        }
        if grid.stencil_radius < 1 {
            return Err(Error::MalformedInput("stencil radius must be >= 1".into()));
        }
        Ok(FinslerChart { field, domain, grid })
    }

    /// 1-D convenience constructor with the default stencil radius 1.
    pub fn line(field: MinkowskiNormField, lo: f64, hi: f64, count: usize) -> Result<Self> {
        FinslerChart::new(
            field,
            vec![[lo, hi]],
            GridSpec { counts: vec![count], stencil_radius: 1 },
        )
    }

    pub fn dim(&self) -> usize {
        self.domain.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && self
                .domain
                .iter()
                .zip(x)
                .all(|([lo, hi], &c)| c >= lo - 1e-12 && c <= hi + 1e-12)
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        let [lo, hi] = self.domain[axis];
        (hi - lo) / (self.grid.counts[axis] - 1) as f64
    }

    pub fn max_spacing(&self) -> f64 {
        (0..self.dim()).map(|a| self.spacing(a)).fold(0.0, f64::max)
    }

    /// All lattice nodes, row-major over the multi-index.
    pub fn grid_points(&self) -> Vec<Vec<f64>> {
        let dim = self.dim();
        let total: usize = self.grid.counts.iter().product();
        let mut out = Vec::with_capacity(total);
        let mut idx = vec![0usize; dim];
        loop {
            out.push(
                (0..dim)
                    .map(|a| self.domain[a][0] + idx[a] as f64 * self.spacing(a))
                    .collect(),
            );
            let mut axis = dim;
            loop {
                if axis == 0 {
                    return out;
                }
                axis -= 1;
                idx[axis] += 1;
                if idx[axis] < self.grid.counts[axis] {
                    break;
                }
                idx[axis] = 0;
            }
        }
    }

    /// Closed-form quasi-distance for the registered families.
    pub fn oracle_distance(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        self.check_points(x, y)?;
        self.field.structure_check()?;
        let v: Vec<f64> = y.iter().zip(x).map(|(b, a)| b - a).collect();
        Ok(match &self.field {
            MinkowskiNormField::Example31 => {
                (x[0] - y[0]).abs() + phi(x[0]) - phi(y[0])
            }
            // constant fields: straight segments are geodesics
            field => field.eval(x, &v),
        })
    }

    /// Distance from `x` to `y` by the requested method. `Auto` uses the
    /// closed-form oracle when the family has one and the refined graph
    /// otherwise.
    pub fn distance(&self, x: &[f64], y: &[f64], method: DistanceMethod) -> Result<DistanceResult> {
        match method {
            DistanceMethod::Oracle | DistanceMethod::Auto => {
                let value = self.oracle_distance(x, y)?;
                Ok(DistanceResult {
                    value,
                    method: DistanceMethod::Oracle,
                    error_estimate: 1e-12 * (1.0 + value.abs()),
                    path: None,
                })
            }
            DistanceMethod::Graph => {
                let g = graph::GridGraph::new(self)?;
                let (value, path) = g.distance(x, y)?;
                Ok(DistanceResult {
                    value,
                    method: DistanceMethod::Graph,
                    error_estimate: 0.5 * self.max_spacing() * (1.0 + value.abs()),
                    path: Some(path),
                })
            }
            DistanceMethod::Refined => {
                let g = graph::GridGraph::new(self)?;
                let (raw, path) = g.distance(x, y)?;
                let refined = refine::refine_path(self, &path, refine::RefineOptions::default())?;
                Ok(DistanceResult {
                    value: refined.value,
                    method: DistanceMethod::Refined,
                    error_estimate: (raw - refined.value).abs()
                        + self.max_spacing() * self.max_spacing() * (1.0 + refined.value.abs()),
                    path: Some(refined.path),
                })
            }
        }
    }

    fn check_points(&self, x: &[f64], y: &[f64]) -> Result<()> {
        for p in [x, y] {
            if !self.contains(p) {
                return Err(Error::OutOfDomain { point: p.to_vec() });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistanceMethod {
    Auto,
    Oracle,
    Graph,
    Refined,
}

/// A distance query result: `{x, y}` live with the caller, the record keeps
/// the value, the method actually used and an error heuristic.
#[derive(Debug, Clone, Serialize)]
pub struct DistanceResult {
    pub value: f64,
    pub method: DistanceMethod,
    pub error_estimate: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<PiecewisePath>,
}

/// A polyline with affine parameterization per segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewisePath {
    pub nodes: Vec<Vec<f64>>,
}

impl PiecewisePath {
    pub fn new(nodes: Vec<Vec<f64>>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::MalformedInput("path needs at least two nodes".into()));
        }
        Ok(PiecewisePath { nodes })
    }

    pub fn validate_in(&self, chart: &FinslerChart) -> Result<()> {
        for node in &self.nodes {
            if !chart.contains(node) {
                return Err(Error::OutOfDomain { point: node.clone() });
            }
        }
        Ok(())
    }

    /// Inserts the midpoint of every segment; an affine reparameterization
    /// of the same polyline.
    pub fn subdivide(&self) -> PiecewisePath {
        let mut nodes = Vec::with_capacity(self.nodes.len() * 2 - 1);
        for w in self.nodes.windows(2) {
            nodes.push(w[0].clone());
            nodes.push(
                w[0].iter()
                    .zip(&w[1])
                    .map(|(a, b)| 0.5 * (a + b))
                    .collect(),
            );
        }
        nodes.push(self.nodes.last().unwrap().clone());
        PiecewisePath { nodes }
    }
}

/// Composite Gauss-Legendre approximation of the length integral
/// `int F(sigma(t), sigma'(t)) dt`, segment by segment. Exact for constant
/// fields on straight segments.
pub fn path_length(chart: &FinslerChart, path: &PiecewisePath, order: usize) -> Result<f64> {
    path.validate_in(chart)?;
    let rule = GaussLegendre::new(order.clamp(1, 16));
    Ok(path_length_with_rule(chart, path, &rule))
}

pub(crate) fn path_length_with_rule(
    chart: &FinslerChart,
    path: &PiecewisePath,
    rule: &GaussLegendre,
) -> f64 {
    let mut total = 0.0;
    for w in path.nodes.windows(2) {
        total += segment_length(chart, &w[0], &w[1], rule);
    }
    total
}

pub(crate) fn segment_length(
    chart: &FinslerChart,
    a: &[f64],
    b: &[f64],
    rule: &GaussLegendre,
) -> f64 {
    let v: Vec<f64> = b.iter().zip(a).map(|(q, p)| q - p).collect();
    if chart.field.is_translation_invariant() {
        // integrand constant in t
        return chart.field.eval(a, &v);
    }
    let mut point = vec![0.0; a.len()];
    rule.integrate(0.0, 1.0, |t| {
        for (i, p) in point.iter_mut().enumerate() {
            *p = a[i] + t * v[i];
        }
        chart.field.eval(&point, &v)
    })
}

// ---------------------------------------------------------------------------
// Minkowski-norm validation
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MinkowskiViolation {
    Homogeneity { x: Vec<f64>, v: Vec<f64>, lambda: f64, defect: f64 },
    Subadditivity { x: Vec<f64>, u: Vec<f64>, v: Vec<f64>, defect: f64 },
    /// `F(x, v) <= 0` for a sampled `v != 0`.
    Positivity { x: Vec<f64>, v: Vec<f64>, value: f64 },
    /// The fundamental tensor `g_v = 1/2 d^2[F^2](v)` fails the eigenvalue
    /// lower bound at a sampled direction.
    FundamentalTensor { x: Vec<f64>, v: Vec<f64>, min_eigenvalue: f64 },
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct MinkowskiReport {
    pub violations: Vec<MinkowskiViolation>,
    pub notes: Vec<String>,
}

impl MinkowskiReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the Minkowski-norm axioms on sample points and vectors:
/// positive homogeneity, subadditivity, separation/positivity and positive
/// definiteness of the fundamental tensor via a central finite-difference
/// Hessian of `F^2`.
pub fn validate_minkowski(
    field: &MinkowskiNormField,
    x_samples: &[Vec<f64>],
    v_samples: &[Vec<f64>],
    tol: f64,
) -> Result<MinkowskiReport> {
    if x_samples.is_empty() || v_samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let mut report = MinkowskiReport::default();
    let lambdas = [0.0, 0.5, 2.0, 3.75];
    for x in x_samples {
        for v in v_samples {
            let fv = field.eval(x, v);
            let vnorm = norm2(v);
            if vnorm == 0.0 {
                report
                    .notes
                    .push(format!("zero vector skipped for tensor check at x={x:?}"));
                continue;
            }
            if fv <= 0.0 {
                report.violations.push(MinkowskiViolation::Positivity {
                    x: x.clone(),
                    v: v.clone(),
                    value: fv,
                });
                continue;
            }
            for &lambda in &lambdas {
                let scaled: Vec<f64> = v.iter().map(|t| lambda * t).collect();
                let defect = (field.eval(x, &scaled) - lambda * fv).abs();
                if defect > tol * (1.0 + lambda * fv.abs()) {
                    report.violations.push(MinkowskiViolation::Homogeneity {
                        x: x.clone(),
                        v: v.clone(),
                        lambda,
                        defect,
                    });
                }
            }
            let fsq = |w: &[f64]| {
                let val = field.eval(x, w);
                val * val
            };
            let h = HESSIAN_STEP_SCALE * vnorm;
            let hess = central_hessian(&fsq, v, h);
            let lo = 0.5 * min_eigenvalue(&hess);
            if lo <= EIGENVALUE_THRESHOLD {
                report.violations.push(MinkowskiViolation::FundamentalTensor {
                    x: x.clone(),
                    v: v.clone(),
                    min_eigenvalue: lo,
                });
            }
        }
        for u in v_samples {
            for v in v_samples {
                let sum: Vec<f64> = u.iter().zip(v).map(|(a, b)| a + b).collect();
                let lhs = field.eval(x, &sum);
                let rhs = field.eval(x, u) + field.eval(x, v);
                if lhs > rhs + tol * (1.0 + rhs.abs()) {
                    report.violations.push(MinkowskiViolation::Subadditivity {
                        x: x.clone(),
                        u: u.clone(),
                        v: v.clone(),
                        defect: lhs - rhs,
                    });
                }
            }
        }
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// 1-D Randers oracle
// ---------------------------------------------------------------------------

/// Drift-derivative specification for the 1-D Randers oracle. The norm field
/// is `F(t, v) = |v| - spec(t) * v`, so forward speed is `1 - spec` and
/// backward speed `1 + spec`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum DriftSpec {
    /// `phi'(t) = t^2/(1+t^2)`, with the exact antiderivative `t - arctan t`.
    Example31,
    Constant { value: f64 },
}

impl DriftSpec {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            DriftSpec::Example31 => phi_prime(t),
            DriftSpec::Constant { value } => *value,
        }
    }
}

/// Closed-form 1-D Randers quasi-distance: `int_x^y (1 - spec)` for `y >= x`
/// and `int_y^x (1 + spec)` for `y < x`. The arctan family uses its exact
/// antiderivative, other specs go through adaptive quadrature.
pub fn randers_1d_distance(spec: &DriftSpec, x: f64, y: f64) -> Result<f64> {
    let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
    // validity: |phi'| < 1 on the traversed range
    let steps = 64;
    for i in 0..=steps {
        let t = lo + (hi - lo) * i as f64 / steps as f64;
        if self_drift_invalid(spec, t) {
            return Err(Error::InvalidStructure(format!(
                "drift derivative has magnitude >= 1 at t = {t}"
            )));
        }
    }
    if let DriftSpec::Example31 = spec {
        return Ok((x - y).abs() + phi(x) - phi(y));
    }
    let value = if y >= x {
        crate::numeric::adaptive_simpson(&|t| 1.0 - spec.eval(t), x, y, 1e-12)
    } else {
        crate::numeric::adaptive_simpson(&|t| 1.0 + spec.eval(t), y, x, 1e-12)
    };
    Ok(value)
}

fn self_drift_invalid(spec: &DriftSpec, t: f64) -> bool {
    spec.eval(t).abs() >= 1.0
}

// ---------------------------------------------------------------------------
// Chart-level index of symmetry
// ---------------------------------------------------------------------------

/// Index-of-symmetry report for a chart, with coordinate witnesses.
#[derive(Debug, Clone, Serialize)]
pub struct ChartSymmetryReport {
    pub index: f64,
    pub witness: Option<(Vec<f64>, Vec<f64>)>,
    pub is_exact: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratios: Option<Vec<f64>>,
}

/// Upper estimate of the index of symmetry from sampled pairs: for each pair
/// both orientations are computed and the smaller ratio is kept.
pub fn chart_index_of_symmetry(
    chart: &FinslerChart,
    pairs: &[(Vec<f64>, Vec<f64>)],
    method: DistanceMethod,
) -> Result<ChartSymmetryReport> {
    if pairs.is_empty() {
        return Err(Error::EmptySamples);
    }
    let mut index = 1.0f64;
    let mut witness = None;
    let mut ratios = Vec::with_capacity(pairs.len());
    for (x, y) in pairs {
        let fwd = chart.distance(x, y, method)?.value;
        let bwd = chart.distance(y, x, method)?.value;
        if fwd <= 0.0 || bwd <= 0.0 {
            continue;
        }
        let ratio = (bwd / fwd).min(fwd / bwd);
        ratios.push(ratio);
        if witness.is_none() || ratio < index {
            index = index.min(ratio);
            witness = Some((x.clone(), y.clone()));
        }
    }
    if ratios.is_empty() {
        return Err(Error::DegenerateInput(
            "no sampled pair has positive distance".into(),
        ));
    }
    Ok(ChartSymmetryReport { index, witness, is_exact: false, ratios: Some(ratios) })
}

/// Exact index of symmetry for fields with closed forms: 1 for reversible
/// fields, `(1 - |b|*)/(1 + |b|*)` for constant Randers drift. The arctan
/// line has no chart-level closed form and returns None.
pub fn chart_index_exact(chart: &FinslerChart) -> Option<ChartSymmetryReport> {
    match &chart.field {
        MinkowskiNormField::Euclidean { .. } | MinkowskiNormField::Riemannian { .. } => {
            Some(ChartSymmetryReport {
                index: 1.0,
                witness: None,
                is_exact: true,
                ratios: None,
            })
        }
        MinkowskiNormField::Randers { .. } => {
            let b = chart.field.drift_dual_norm()?;
            if b >= 1.0 {
                return None;
            }
            Some(ChartSymmetryReport {
                index: (1.0 - b) / (1.0 + b),
                witness: None,
                is_exact: true,
                ratios: None,
            })
        }
        MinkowskiNormField::Example31 => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::FRAC_PI_4;

    pub(crate) fn example31_line() -> FinslerChart {
        FinslerChart::line(MinkowskiNormField::Example31, -2.0, 3.0, 501).unwrap()
    }

    #[test]
    fn example31_norm_values() {
        let f = MinkowskiNormField::Example31;
        // phi'(1) = 1/2
        assert_relative_eq!(f.eval(&[1.0], &[1.0]), 0.5, epsilon = 1e-15);
        assert_relative_eq!(f.eval(&[1.0], &[-1.0]), 1.5, epsilon = 1e-15);
        assert_relative_eq!(f.eval(&[0.0], &[1.0]), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn validate_minkowski_euclidean_clean() {
        let field = MinkowskiNormField::Euclidean { dim: 2 };
        let xs = vec![vec![0.0, 0.0], vec![1.0, -0.5]];
        let vs = vec![vec![1.0, 0.0], vec![0.3, -0.7], vec![-1.0, 2.0]];
        let report = validate_minkowski(&field, &xs, &vs, 1e-9).unwrap();
        assert!(report.is_valid(), "{:?}", report.violations);
    }

    #[test]
    fn validate_minkowski_flags_oversized_drift() {
        let field = MinkowskiNormField::Randers { drift: vec![1.2, 0.0], base: None };
        let xs = vec![vec![0.0, 0.0]];
        let vs = vec![vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 1.0]];
        let report = validate_minkowski(&field, &xs, &vs, 1e-9).unwrap();
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, MinkowskiViolation::Positivity { .. })));
        assert!(field.structure_check().is_err());
    }

    #[test]
    fn validate_minkowski_accepts_valid_randers_and_example31() {
        let randers = MinkowskiNormField::Randers { drift: vec![0.5, 0.0], base: None };
        let xs = vec![vec![0.0, 0.0]];
        let vs = vec![vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.4, 0.9], vec![-0.2, -1.1]];
        let report = validate_minkowski(&randers, &xs, &vs, 1e-9).unwrap();
        assert!(report.is_valid(), "{:?}", report.violations);

        let e31 = MinkowskiNormField::Example31;
        let xs = vec![vec![0.0], vec![1.0], vec![-2.0]];
        let vs = vec![vec![1.0], vec![-1.0], vec![0.35]];
        let report = validate_minkowski(&e31, &xs, &vs, 1e-9).unwrap();
        assert!(report.is_valid(), "{:?}", report.violations);
    }

    #[test]
    fn path_length_euclidean_segment() {
        let chart = FinslerChart::new(
            MinkowskiNormField::Euclidean { dim: 2 },
            vec![[-1.0, 4.0], [-1.0, 5.0]],
            GridSpec { counts: vec![6, 7], stencil_radius: 2 },
        )
        .unwrap();
        let path = PiecewisePath::new(vec![vec![0.0, 0.0], vec![3.0, 4.0]]).unwrap();
        let len = path_length(&chart, &path, DEFAULT_PATH_QUADRATURE).unwrap();
        assert_relative_eq!(len, 5.0, epsilon = 1e-14);
    }

    #[test]
    fn path_length_constant_randers_is_direction_dependent() {
        let chart = FinslerChart::new(
            MinkowskiNormField::Randers { drift: vec![0.5, 0.0], base: None },
            vec![[-1.0, 2.0], [-1.0, 1.0]],
            GridSpec { counts: vec![4, 3], stencil_radius: 2 },
        )
        .unwrap();
        let fwd = PiecewisePath::new(vec![vec![0.0, 0.0], vec![1.0, 0.0]]).unwrap();
        let bwd = PiecewisePath::new(vec![vec![1.0, 0.0], vec![0.0, 0.0]]).unwrap();
        assert_relative_eq!(path_length(&chart, &fwd, 5).unwrap(), 1.5, epsilon = 1e-14);
        assert_relative_eq!(path_length(&chart, &bwd, 5).unwrap(), 0.5, epsilon = 1e-14);
    }

    #[test]
    fn path_length_example31_monotone() {
        let chart = example31_line();
        let path = PiecewisePath::new(vec![vec![0.0], vec![1.0]]).unwrap();
        let len = path_length(&chart, &path, 8).unwrap();
        assert_relative_eq!(len, FRAC_PI_4, epsilon = 1e-12);
    }

    #[test]
    fn path_length_rejects_out_of_domain() {
        let chart = example31_line();
        let path = PiecewisePath::new(vec![vec![0.0], vec![10.0]]).unwrap();
        assert!(matches!(
            path_length(&chart, &path, 5),
            Err(Error::OutOfDomain { .. })
        ));
    }

    #[test]
    fn randers_oracle_example31() {
        let d01 = randers_1d_distance(&DriftSpec::Example31, 0.0, 1.0).unwrap();
        let d10 = randers_1d_distance(&DriftSpec::Example31, 1.0, 0.0).unwrap();
        assert_relative_eq!(d01, FRAC_PI_4, epsilon = 1e-15);
        assert_relative_eq!(d10, 2.0 - FRAC_PI_4, epsilon = 1e-15);
    }

    #[test]
    fn randers_oracle_constant_and_invalid() {
        let zero = DriftSpec::Constant { value: 0.0 };
        assert_relative_eq!(
            randers_1d_distance(&zero, -1.5, 2.0).unwrap(),
            3.5,
            epsilon = 1e-12
        );
        assert_relative_eq!(
            randers_1d_distance(&zero, 2.0, -1.5).unwrap(),
            3.5,
            epsilon = 1e-12
        );
        let bad = DriftSpec::Constant { value: 1.0 };
        assert!(matches!(
            randers_1d_distance(&bad, 0.0, 1.0),
            Err(Error::InvalidStructure(_))
        ));
    }

    #[test]
    fn quadrature_route_matches_antiderivative() {
        // same drift evaluated through the quadrature fallback
        let x = 0.25;
        let y = 2.5;
        let exact = randers_1d_distance(&DriftSpec::Example31, x, y).unwrap();
        let quad = crate::numeric::adaptive_simpson(&|t| 1.0 - phi_prime(t), x, y, 1e-13);
        assert_relative_eq!(exact, quad, epsilon = 1e-11);
    }

    #[test]
    fn oracle_distance_example31_chart() {
        let chart = example31_line();
        let d = chart.oracle_distance(&[0.0], &[1.0]).unwrap();
        assert_relative_eq!(d, FRAC_PI_4, epsilon = 1e-15);
        assert!(chart.oracle_distance(&[0.0], &[7.0]).is_err());
    }

    #[test]
    fn chart_index_exact_closed_forms() {
        let euclid = FinslerChart::line(MinkowskiNormField::Euclidean { dim: 1 }, 0.0, 1.0, 3)
            .unwrap();
        assert_eq!(chart_index_exact(&euclid).unwrap().index, 1.0);
        let randers = FinslerChart::new(
            MinkowskiNormField::Randers { drift: vec![0.5, 0.0], base: None },
            vec![[-1.0, 1.0], [-1.0, 1.0]],
            GridSpec { counts: vec![3, 3], stencil_radius: 2 },
        )
        .unwrap();
        let report = chart_index_exact(&randers).unwrap();
        assert_relative_eq!(report.index, 1.0 / 3.0, epsilon = 1e-15);
        assert!(chart_index_exact(&example31_line()).is_none());
    }

    #[test]
    fn chart_index_sampled_decays_on_example31() {
        let chart = FinslerChart::line(MinkowskiNormField::Example31, -1.0, 22.0, 24).unwrap();
        let pairs: Vec<_> = [0.0, 5.0, 20.0]
            .iter()
            .map(|&x| (vec![x], vec![x + 1.0]))
            .collect();
        let report = chart_index_of_symmetry(&chart, &pairs, DistanceMethod::Oracle).unwrap();
        let ratios = report.ratios.unwrap();
        let expected = [0.6466301464, 0.0163876668, 0.0011890584];
        for (got, want) in ratios.iter().zip(expected) {
            assert!((got - want).abs() < 1e-9, "{got} vs {want}");
        }
        assert!(!report.is_exact);
    }
}
