//! Finite and analytic quasi-metric spaces.
//!
//! A quasi-metric satisfies the triangle inequality and separation but not
//! symmetry: `d(x,y)` and `d(y,x)` may differ. In the hemi variant the
//! distance between distinct points may be 0 in one orientation as long as
//! the other orientation is positive. Finite spaces (a point list plus a
//! row-major distance matrix) are the ground truth here: every inequality
//! is checked exactly by brute force. Analytic families are adapters that
//! sample into finite sub-spaces.

use std::collections::BTreeMap;
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative triangle tolerance for floating-point analytic samples.
/// Finite matrices are checked exactly (tolerance zero).
pub const ANALYTIC_TRIANGLE_TOL: f64 = 1e-9;

/// The standard quasi-hemi-metric on the real line: `max(y - x, 0)`.
pub fn d_u(x: f64, y: f64) -> f64 {
    (y - x).max(0.0)
}

/// Separation axiom variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeparationMode {
    /// `d(x,y) = 0` implies `x = y`.
    QuasiMetric,
    /// `d(x,y) = 0` and `d(y,x) = 0` together imply `x = y`.
    QuasiHemiMetric,
}

/// A finite quasi-metric space: identifiers plus a square distance matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteSpace {
    pub points: Vec<String>,
    /// Row-major: `dist[i][j]` is the distance from point i to point j.
    pub dist: Vec<Vec<f64>>,
    #[serde(default = "default_mode")]
    pub mode: SeparationMode,
}

fn default_mode() -> SeparationMode {
    SeparationMode::QuasiMetric
}

/// One violated axiom together with its witness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "axiom", rename_all = "kebab-case")]
pub enum AxiomViolation {
    NonzeroDiagonal { point: String, value: f64 },
    Triangle { x: String, y: String, z: String, defect: f64 },
    Separation { x: String, y: String },
}

/// Result of [`FiniteSpace::validate`]: empty iff all axioms hold.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<AxiomViolation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Index of symmetry of a space: `inf d(y,x)/d(x,y)` over pairs with
/// positive forward distance. 1 means metric, 0 signals extreme asymmetry.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SymmetryReport {
    pub index: f64,
    /// Pair attaining (or approaching) the infimum, as point identifiers.
    pub witness: Option<(String, String)>,
    /// Exact on finite spaces, an upper estimate on sampled families.
    pub is_exact: bool,
    /// Ratio per sampled pair, in sample order (analytic families only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratios: Option<Vec<f64>>,
}

impl FiniteSpace {
    /// Builds a space from identifiers and a square matrix, rejecting
    /// malformed input (non-square matrix, negative entries, size mismatch).
    pub fn new(points: Vec<String>, dist: Vec<Vec<f64>>, mode: SeparationMode) -> Result<Self> {
        let n = points.len();
        if dist.len() != n {
            return Err(Error::MalformedInput(format!(
                "matrix has {} rows for {} points",
                dist.len(),
                n
            )));
        }
        for (i, row) in dist.iter().enumerate() {
            if row.len() != n {
                return Err(Error::MalformedInput(format!(
                    "row {} has {} entries, expected {}",
                    i,
                    row.len(),
                    n
                )));
            }
            for (j, &v) in row.iter().enumerate() {
                if v < 0.0 || v.is_nan() {
                    return Err(Error::MalformedInput(format!(
                        "negative or NaN entry d({},{}) = {}",
                        points[i], points[j], v
                    )));
                }
            }
        }
        Ok(FiniteSpace { points, dist, mode })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn d(&self, i: usize, j: usize) -> f64 {
        self.dist[i][j]
    }

    /// Loads `{"points": [...], "dist": [[...]]}` (optionally `"mode"`).
    pub fn from_json_str(s: &str) -> Result<Self> {
        let raw: FiniteSpace = serde_json::from_str(s)?;
        FiniteSpace::new(raw.points, raw.dist, raw.mode)
    }

    /// Loads a CSV file: header row of point ids, then the matrix.
    pub fn from_csv_path<P: AsRef<Path>>(path: P, mode: SeparationMode) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_csv_str(&text, mode)
    }

    pub fn from_csv_str(text: &str, mode: SeparationMode) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let mut rows = reader.records();
        let header = rows
            .next()
            .ok_or_else(|| Error::MalformedInput("empty CSV".into()))??;
        let points: Vec<String> = header.iter().map(|s| s.to_string()).collect();
        let mut dist = Vec::with_capacity(points.len());
        for rec in rows {
            let rec = rec?;
            let row: std::result::Result<Vec<f64>, _> =
                rec.iter().map(|s| s.parse::<f64>()).collect();
            dist.push(row.map_err(|e| Error::MalformedInput(format!("bad number: {e}")))?);
        }
        FiniteSpace::new(points, dist, mode)
    }

    /// Checks all axioms by exhaustive scan. The returned report lists every
    /// violated axiom with its witness and defect magnitude.
    pub fn validate(&self) -> ValidationReport {
        let n = self.len();
        let mut violations = Vec::new();
        for i in 0..n {
            if self.dist[i][i] != 0.0 {
                violations.push(AxiomViolation::NonzeroDiagonal {
                    point: self.points[i].clone(),
                    value: self.dist[i][i],
                });
            }
        }
        for x in 0..n {
            for z in 0..n {
                for y in 0..n {
                    let defect = self.dist[x][y] - (self.dist[x][z] + self.dist[z][y]);
                    if defect > 0.0 {
                        violations.push(AxiomViolation::Triangle {
                            x: self.points[x].clone(),
                            y: self.points[y].clone(),
                            z: self.points[z].clone(),
                            defect,
                        });
                    }
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let broken = match self.mode {
                    SeparationMode::QuasiMetric => self.dist[i][j] == 0.0,
                    SeparationMode::QuasiHemiMetric => {
                        self.dist[i][j] == 0.0 && self.dist[j][i] == 0.0
                    }
                };
                if broken {
                    violations.push(AxiomViolation::Separation {
                        x: self.points[i].clone(),
                        y: self.points[j].clone(),
                    });
                }
            }
        }
        ValidationReport { violations }
    }

    /// The symmetrized space `max(d(x,y), d(y,x))`, a genuine metric.
    pub fn symmetrize(&self) -> FiniteSpace {
        let n = self.len();
        let mut dist = self.dist.clone();
        for i in 0..n {
            for j in 0..n {
                dist[i][j] = self.dist[i][j].max(self.dist[j][i]);
            }
        }
        FiniteSpace { points: self.points.clone(), dist, mode: self.mode }
    }

    /// The reverse space `d(y,x)` (matrix transpose). An involution.
    pub fn reverse(&self) -> FiniteSpace {
        let n = self.len();
        let mut dist = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                dist[i][j] = self.dist[j][i];
            }
        }
        FiniteSpace { points: self.points.clone(), dist, mode: self.mode }
    }

    /// Exact index of symmetry: minimum of `d(y,x)/d(x,y)` over ordered
    /// pairs with `d(x,y) > 0`. Pairs at infinite distance force index 0.
    pub fn index_of_symmetry(&self) -> Result<SymmetryReport> {
        let n = self.len();
        if n < 2 {
            return Err(Error::DegenerateInput(
                "index of symmetry needs at least two points".into(),
            ));
        }
        let mut index = 1.0f64;
        let mut witness = None;
        for i in 0..n {
            for j in 0..n {
                let fwd = self.dist[i][j];
                if fwd > 0.0 {
                    if fwd.is_infinite() {
                        return Ok(SymmetryReport {
                            index: 0.0,
                            witness: Some((self.points[i].clone(), self.points[j].clone())),
                            is_exact: true,
                            ratios: None,
                        });
                    }
                    let ratio = self.dist[j][i] / fwd;
                    if witness.is_none() || ratio < index {
                        index = ratio.min(index);
                        witness = Some((self.points[i].clone(), self.points[j].clone()));
                    }
                }
            }
        }
        if witness.is_none() {
            // all distances zero: fully symmetric by convention
            index = 1.0;
        }
        Ok(SymmetryReport { index, witness, is_exact: true, ratios: None })
    }

    /// Exact semi-Lipschitz constant of a sampled function: the supremum of
    /// `max(f(y)-f(x), 0) / d(x,y)` over pairs with `d(x,y) > 0`. Returns
    /// `SlipBound::Infinite` when some pair has `d(x,y) = 0` with `f(y) > f(x)`.
    pub fn slip_constant(&self, f: &SampledFunction) -> Result<SlipBound> {
        if f.values.len() != self.len() {
            return Err(Error::MalformedInput(format!(
                "function defined on {} points, space has {}",
                f.values.len(),
                self.len()
            )));
        }
        let n = self.len();
        let mut sup = 0.0f64;
        for x in 0..n {
            for y in 0..n {
                if x == y {
                    continue;
                }
                let rise = f.values[y] - f.values[x];
                if rise <= 0.0 {
                    continue;
                }
                let d = self.dist[x][y];
                if d == 0.0 {
                    return Ok(SlipBound::Infinite);
                }
                sup = sup.max(rise / d);
            }
        }
        Ok(SlipBound::Finite(sup))
    }

    /// The distance function `d(base, .)` as a sampled function.
    pub fn distance_function(&self, base: usize) -> SampledFunction {
        SampledFunction { values: self.dist[base].clone() }
    }

    /// Decides whether the cone of base-point-normalized semi-Lipschitz
    /// functions is a linear space, which happens exactly when the index of
    /// symmetry is positive. When it is not, produces a witness with finite
    /// slip constant whose negation has infinite slip constant, found by
    /// brute force over distance-generated functions.
    pub fn slip0_linearity(&self) -> Result<LinearityVerdict> {
        let report = self.index_of_symmetry()?;
        if report.index > 0.0 {
            return Ok(LinearityVerdict::Linear);
        }
        for p in 0..self.len() {
            let f = self.distance_function(p);
            let neg = SampledFunction { values: f.values.iter().map(|v| -v).collect() };
            let slip_f = self.slip_constant(&f)?;
            let slip_neg = self.slip_constant(&neg)?;
            if let (SlipBound::Finite(_), SlipBound::Infinite) = (&slip_f, &slip_neg) {
                return Ok(LinearityVerdict::NotLinear { witness: f, slip: slip_f });
            }
        }
        Err(Error::DegenerateInput(
            "index is zero but no distance-generated witness was found".into(),
        ))
    }

    /// Seeded generator of valid quasi-metric spaces (mode (i)) with small
    /// integer distances, hence exact arithmetic. Uses a min-plus closure.
    pub fn random_quasi_metric(n: usize, seed: u64) -> FiniteSpace {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut dist = vec![vec![0.0f64; n]; n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    dist[i][j] = rng.gen_range(1..=16) as f64;
                }
            }
        }
        min_plus_closure(&mut dist);
        FiniteSpace {
            points: point_names(n),
            dist,
            mode: SeparationMode::QuasiMetric,
        }
    }

    /// Seeded generator of quasi-hemi-metric spaces: some forward distances
    /// collapse to zero along a fixed point order, so separation holds in
    /// the hemi sense only. Roughly half the outputs have index zero.
    pub fn random_quasi_hemi_metric(n: usize, seed: u64) -> FiniteSpace {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut dist = vec![vec![0.0f64; n]; n];
        let with_zeros = rng.gen_bool(0.5);
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                // zeros only "downhill" (i < j) so the opposite orientation
                // stays positive after the closure
                dist[i][j] = if with_zeros && i < j && rng.gen_bool(0.4) {
                    0.0
                } else {
                    rng.gen_range(1..=16) as f64
                };
            }
        }
        min_plus_closure(&mut dist);
        FiniteSpace {
            points: point_names(n),
            dist,
            mode: SeparationMode::QuasiHemiMetric,
        }
    }
}

fn point_names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("p{i}")).collect()
}

/// Floyd-Warshall min-plus closure; enforces the triangle inequality.
fn min_plus_closure(dist: &mut [Vec<f64>]) {
    let n = dist.len();
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = dist[i][k] + dist[k][j];
                if via < dist[i][j] {
                    dist[i][j] = via;
                }
            }
        }
    }
    for (i, row) in dist.iter_mut().enumerate() {
        row[i] = 0.0;
    }
}

/// A real-valued function given by its values on the points of a finite
/// space, aligned with the space's point order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledFunction {
    pub values: Vec<f64>,
}

impl SampledFunction {
    pub fn new(values: Vec<f64>) -> Self {
        SampledFunction { values }
    }

    /// Builds from a point-id map, requiring a value for every point.
    pub fn from_map(space: &FiniteSpace, map: &BTreeMap<String, f64>) -> Result<Self> {
        let mut values = Vec::with_capacity(space.len());
        for p in &space.points {
            match map.get(p) {
                Some(v) => values.push(*v),
                None => {
                    return Err(Error::MalformedInput(format!(
                        "function not defined on point {p}"
                    )))
                }
            }
        }
        Ok(SampledFunction { values })
    }
}

/// A semi-Lipschitz constant: finite or the supremum convention's infinity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SlipBound {
    Finite(f64),
    Infinite,
}

impl SlipBound {
    pub fn is_finite(&self) -> bool {
        matches!(self, SlipBound::Finite(_))
    }

    pub fn value(&self) -> f64 {
        match self {
            SlipBound::Finite(v) => *v,
            SlipBound::Infinite => f64::INFINITY,
        }
    }
}

/// Verdict of [`FiniteSpace::slip0_linearity`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum LinearityVerdict {
    Linear,
    NotLinear { witness: SampledFunction, slip: SlipBound },
}

impl LinearityVerdict {
    pub fn is_linear(&self) -> bool {
        matches!(self, LinearityVerdict::Linear)
    }
}

// ---------------------------------------------------------------------------
// Analytic families
// ---------------------------------------------------------------------------

/// Closed-form quasi-metrics on an interval of the real line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum AnalyticFamily {
    /// The line with the non-reversible structure built from
    /// `phi(t) = t - arctan t`: `d(x,y) = |x-y| + phi(x) - phi(y)`.
    ArctanLine,
    /// The upper quasi-hemi-metric `d_u(x,y) = max(y-x, 0)`.
    RealLineUpper,
    /// Constant-drift line: `d(x,y) = (1-beta)(y-x)` forward,
    /// `(1+beta)(x-y)` backward, for `|beta| < 1`.
    DriftLine { beta: f64 },
}

pub(crate) fn phi(t: f64) -> f64 {
    t - t.atan()
}

impl AnalyticFamily {
    pub fn dist(&self, x: f64, y: f64) -> f64 {
        match self {
            AnalyticFamily::ArctanLine => (x - y).abs() + phi(x) - phi(y),
            AnalyticFamily::RealLineUpper => d_u(x, y),
            AnalyticFamily::DriftLine { beta } => {
                if y >= x {
                    (1.0 - beta) * (y - x)
                } else {
                    (1.0 + beta) * (x - y)
                }
            }
        }
    }

    pub fn mode(&self) -> SeparationMode {
        match self {
            AnalyticFamily::RealLineUpper => SeparationMode::QuasiHemiMetric,
            _ => SeparationMode::QuasiMetric,
        }
    }
}

/// An analytic family paired with a sample-domain description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticSpace {
    pub family: AnalyticFamily,
    /// Sampling interval `[lo, hi]`.
    pub domain: [f64; 2],
    pub sample_count: usize,
}

impl AnalyticSpace {
    pub fn new(family: AnalyticFamily, domain: [f64; 2], sample_count: usize) -> Result<Self> {
        if !(domain[0] < domain[1]) || sample_count < 2 {
            return Err(Error::DegenerateInput(
                "analytic space needs an interval and at least two samples".into(),
            ));
        }
        if let AnalyticFamily::DriftLine { beta } = family {
            if beta.abs() >= 1.0 {
                return Err(Error::InvalidStructure(format!(
                    "drift magnitude {beta} is not below 1"
                )));
            }
        }
        Ok(AnalyticSpace { family, domain, sample_count })
    }

    pub fn sample_points(&self) -> Vec<f64> {
        let [lo, hi] = self.domain;
        let n = self.sample_count;
        (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect()
    }

    /// Samples the family into a finite sub-space (the checkable adapter).
    pub fn to_finite(&self) -> FiniteSpace {
        let xs = self.sample_points();
        let n = xs.len();
        let mut dist = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                dist[i][j] = self.family.dist(xs[i], xs[j]);
            }
        }
        FiniteSpace {
            points: xs.iter().map(|x| format!("{x}")).collect(),
            dist,
            mode: self.family.mode(),
        }
    }

    /// Validates the axioms on the sampled sub-space. Triangle defects up to
    /// [`ANALYTIC_TRIANGLE_TOL`] times the distance scale are treated as zero.
    pub fn validate(&self) -> ValidationReport {
        let finite = self.to_finite();
        let scale = finite
            .dist
            .iter()
            .flatten()
            .cloned()
            .fold(0.0f64, f64::max)
            .max(1.0);
        let tol = ANALYTIC_TRIANGLE_TOL * scale;
        let report = finite.validate();
        let violations = report
            .violations
            .into_iter()
            .filter(|v| match v {
                AxiomViolation::Triangle { defect, .. } => *defect > tol,
                AxiomViolation::NonzeroDiagonal { value, .. } => value.abs() > tol,
                AxiomViolation::Separation { .. } => true,
            })
            .collect();
        ValidationReport { violations }
    }

    /// Upper estimate of the index of symmetry over the given sample pairs:
    /// the infimum cannot be certified by sampling, so the report is flagged
    /// inexact and carries the per-pair ratio sequence.
    pub fn index_upper_estimate(&self, pairs: &[(f64, f64)]) -> Result<SymmetryReport> {
        if pairs.is_empty() {
            return Err(Error::EmptySamples);
        }
        let mut index = 1.0f64;
        let mut witness = None;
        let mut ratios = Vec::with_capacity(pairs.len());
        for &(x, y) in pairs {
            let fwd = self.family.dist(x, y);
            if fwd <= 0.0 {
                continue;
            }
            let ratio = self.family.dist(y, x) / fwd;
            let ratio = ratio.min(1.0 / ratio);
            ratios.push(ratio);
            if witness.is_none() || ratio < index {
                index = index.min(ratio);
                witness = Some((format!("{x}"), format!("{y}")));
            }
        }
        if ratios.is_empty() {
            return Err(Error::DegenerateInput(
                "no sampled pair has positive distance".into(),
            ));
        }
        Ok(SymmetryReport { index, witness, is_exact: false, ratios: Some(ratios) })
    }
}

/// A quasi-metric space of either kind, for config-driven dispatch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum QuasiMetricSpace {
    Finite(FiniteSpace),
    AnalyticFamily(AnalyticSpace),
}
