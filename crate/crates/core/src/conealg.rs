//! The normed cone of nonnegative bounded C1 semi-Lipschitz functions, its
//! span algebra, evaluation functionals and dual-norm bracketing.
//!
//! A cone element carries grid estimates of its sup norm and slip norm; the
//! hemi-norm is their maximum. Estimates are lower bounds of the true
//! suprema, and every inequality check in this module compares estimates on
//! both sides, so the directions stay meaningful. The span consists of
//! formal differences of cone elements with the extended norm that is
//! finite exactly on the cone.

use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::error::{Error, Result};
use crate::finsler::{DistanceMethod, FinslerChart, MinkowskiNormField};
use crate::quasimetric::SlipBound;
use crate::scalar::ScalarField;
use crate::semilip::smooth::{smooth_approximate_1d, SmoothApproxOptions};
use crate::semilip::sup_derivative_norm;

/// Sub-multiplicative constant of the cone product bound.
pub const PRODUCT_NORM_CONSTANT: f64 = 2.0;
/// Absolute dip below zero absorbed as round-off during certification.
pub const NONNEG_TOL: f64 = 1e-12;
/// Extra smoothed generators per dual-norm query.
pub const DICTIONARY_PERTURBATIONS: usize = 8;

/// Why a field failed cone certification, with the witness.
#[derive(Debug, Clone, Error, Serialize)]
#[serde(tag = "clause", rename_all = "kebab-case")]
pub enum ConeRejection {
    #[error("field is not C1 by construction")]
    NotC1,
    #[error("negative value {value} at {point:?}")]
    Negative { point: Vec<f64>, value: f64 },
    #[error("slip norm diverges (witness {witness:?})")]
    InfiniteSlip { witness: Option<Vec<f64>> },
    #[error("certification failed: {0}")]
    Invalid(String),
}

/// A certified member of the nonnegative smooth semi-Lipschitz cone with
/// cached hemi-norm data. Norms are grid estimates.
#[derive(Debug, Clone, Serialize)]
pub struct ConeElement {
    pub field: ScalarField,
    #[serde(skip)]
    pub chart: Arc<FinslerChart>,
    #[serde(skip)]
    pub grid: Arc<Vec<Vec<f64>>>,
    pub sup_norm: f64,
    pub slip_norm: f64,
    pub nonneg_certified: bool,
    /// `max(sup_norm, slip_norm)`.
    pub hemi_norm: f64,
}

impl ConeElement {
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.field.eval(x)
    }

    /// Nonnegative scaling stays in the cone.
    pub fn scale(&self, lambda: f64) -> Result<ConeElement> {
        if lambda < 0.0 {
            return Err(Error::Precondition("cone scaling needs lambda >= 0".into()));
        }
        let field = ScalarField::Scale(lambda, Box::new(self.field.clone()));
        cone_certify(field, &self.chart, &self.grid).map_err(Error::Rejected)
    }

    pub fn add(&self, other: &ConeElement) -> Result<ConeElement> {
        check_same_chart(self, other)?;
        let field = ScalarField::Sum(vec![self.field.clone(), other.field.clone()]);
        cone_certify(field, &self.chart, &self.grid).map_err(Error::Rejected)
    }
}

fn check_same_chart(a: &ConeElement, b: &ConeElement) -> Result<()> {
    let charts_match = Arc::ptr_eq(&a.chart, &b.chart) || *a.chart == *b.chart;
    let grids_match = Arc::ptr_eq(&a.grid, &b.grid) || *a.grid == *b.grid;
    if !charts_match || !grids_match {
        return Err(Error::ChartMismatch(
            "cone elements live on different charts or grids".into(),
        ));
    }
    Ok(())
}

/// Certifies membership in the cone: C1 by construction, nonnegative on the
/// grid, finite sup norm and finite slip norm. The rejection names the
/// violated clause and its witness.
pub fn cone_certify(
    field: ScalarField,
    chart: &Arc<FinslerChart>,
    grid: &Arc<Vec<Vec<f64>>>,
) -> std::result::Result<ConeElement, ConeRejection> {
    if !field.is_c1() {
        return Err(ConeRejection::NotC1);
    }
    if grid.is_empty() {
        return Err(ConeRejection::Invalid("empty certification grid".into()));
    }
    let mut sup = 0.0f64;
    for p in grid.iter() {
        let v = field.eval(p);
        if !v.is_finite() {
            return Err(ConeRejection::Invalid(format!("non-finite value at {p:?}")));
        }
        if v < -NONNEG_TOL {
            return Err(ConeRejection::Negative { point: p.clone(), value: v });
        }
        sup = sup.max(v.abs());
    }
    let profile = sup_derivative_norm(chart, &field, grid)
        .map_err(|e| ConeRejection::Invalid(e.to_string()))?;
    let slip = match profile.supremum {
        SlipBound::Finite(s) => s,
        SlipBound::Infinite => {
            return Err(ConeRejection::InfiniteSlip { witness: profile.maximizing_x })
        }
    };
    Ok(ConeElement {
        field,
        chart: Arc::clone(chart),
        grid: Arc::clone(grid),
        sup_norm: sup,
        slip_norm: slip,
        nonneg_certified: true,
        hemi_norm: sup.max(slip),
    })
}

/// Pointwise product of certified elements; the conic-semiring bound
/// `hemi(ab) <= 2 hemi(a) hemi(b)` is exercised by the test suite.
pub fn cone_product(a: &ConeElement, b: &ConeElement) -> Result<ConeElement> {
    check_same_chart(a, b)?;
    let field = ScalarField::Product(Box::new(a.field.clone()), Box::new(b.field.clone()));
    cone_certify(field, &a.chart, &a.grid).map_err(Error::Rejected)
}

/// Outcome of a bounded inversion `a >= 1 -> 1/a`: algebra membership is
/// certified through the negation (`-(1/a)` has finite slip norm), and the
/// reciprocal itself is returned as a cone element when it certifies too.
#[derive(Debug, Clone, Serialize)]
pub struct InversionCertificate {
    pub reciprocal: ScalarField,
    pub sup_norm: f64,
    pub negation_slip_norm: f64,
    pub element: Option<ConeElement>,
}

pub fn bounded_inversion(a: &ConeElement) -> Result<InversionCertificate> {
    let min = a
        .grid
        .iter()
        .map(|p| a.eval(p))
        .fold(f64::INFINITY, f64::min);
    if min < 1.0 - 1e-12 {
        return Err(Error::Precondition(format!(
            "bounded inversion needs grid minimum >= 1, got {min}"
        )));
    }
    let reciprocal = ScalarField::Recip(Box::new(a.field.clone()));
    let negation = ScalarField::Scale(-1.0, Box::new(reciprocal.clone()));
    let profile = sup_derivative_norm(&a.chart, &negation, &a.grid)?;
    let negation_slip = match profile.supremum {
        SlipBound::Finite(s) => s,
        SlipBound::Infinite => {
            return Err(Error::InvalidStructure(
                "negated reciprocal has divergent slip norm".into(),
            ))
        }
    };
    let sup = a
        .grid
        .iter()
        .map(|p| reciprocal.eval(p).abs())
        .fold(0.0f64, f64::max);
    let element = cone_certify(reciprocal.clone(), &a.chart, &a.grid).ok();
    Ok(InversionCertificate {
        reciprocal,
        sup_norm: sup,
        negation_slip_norm: negation_slip,
        element,
    })
}

/// A formal difference of cone elements, a member of the span algebra.
#[derive(Debug, Clone, Serialize)]
pub struct SpanElement {
    pub positive: ConeElement,
    pub negative: ConeElement,
}

impl SpanElement {
    pub fn new(positive: ConeElement, negative: ConeElement) -> Result<Self> {
        check_same_chart(&positive, &negative)?;
        Ok(SpanElement { positive, negative })
    }

    /// Embeds a cone element as `f - 0`.
    pub fn from_cone(element: ConeElement) -> Result<Self> {
        let zero = cone_certify(ScalarField::Const(0.0), &element.chart, &element.grid)
            .map_err(Error::Rejected)?;
        Ok(SpanElement { positive: element, negative: zero })
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.positive.eval(x) - self.negative.eval(x)
    }

    /// The represented function as a field (`positive - negative`).
    pub fn as_field(&self) -> ScalarField {
        ScalarField::Sum(vec![
            self.positive.field.clone(),
            ScalarField::Scale(-1.0, Box::new(self.negative.field.clone())),
        ])
    }

    pub fn add(&self, other: &SpanElement) -> Result<SpanElement> {
        SpanElement::new(
            self.positive.add(&other.positive)?,
            self.negative.add(&other.negative)?,
        )
    }

    /// Scaling by any real: a negative factor swaps the parts.
    pub fn scale(&self, lambda: f64) -> Result<SpanElement> {
        if lambda >= 0.0 {
            SpanElement::new(self.positive.scale(lambda)?, self.negative.scale(lambda)?)
        } else {
            SpanElement::new(
                self.negative.scale(-lambda)?,
                self.positive.scale(-lambda)?,
            )
        }
    }

    /// The extended asymmetric norm: the hemi-norm when the represented
    /// function itself certifies into the cone, `+infinity` otherwise.
    /// Representation-independent because certification only sees pointwise
    /// values and derivatives of the difference.
    pub fn extended_norm(&self) -> SlipBound {
        match cone_certify(self.as_field(), &self.positive.chart, &self.positive.grid) {
            Ok(e) => SlipBound::Finite(e.hemi_norm),
            Err(_) => SlipBound::Infinite,
        }
    }
}

/// Evaluates [`SpanElement::extended_norm`]; kept as a free function to
/// mirror the module's operation set.
pub fn extended_norm(s: &SpanElement) -> SlipBound {
    s.extended_norm()
}

/// A finite linear combination of evaluation functionals.
#[derive(Debug, Clone, Serialize)]
pub struct Functional {
    /// `(point, coefficient)` atoms.
    pub atoms: Vec<(Vec<f64>, f64)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bracket: Option<DualNormBracket>,
}

impl Functional {
    /// The evaluation functional `delta_x`.
    pub fn delta(x: &[f64]) -> Self {
        Functional { atoms: vec![(x.to_vec(), 1.0)], bracket: None }
    }

    /// `delta_y - delta_x`, the difference functional of a pair.
    pub fn delta_diff(y: &[f64], x: &[f64]) -> Self {
        Functional {
            atoms: vec![(y.to_vec(), 1.0), (x.to_vec(), -1.0)],
            bracket: None,
        }
    }

    pub fn apply(&self, s: &SpanElement) -> f64 {
        self.atoms.iter().map(|(p, c)| c * s.eval(p)).sum()
    }

    pub fn apply_field(&self, f: &ScalarField) -> f64 {
        self.atoms.iter().map(|(p, c)| c * f.eval(p)).sum()
    }

    /// `alpha * self + other` by atom concatenation.
    pub fn combine(&self, alpha: f64, other: &Functional) -> Functional {
        let mut atoms: Vec<(Vec<f64>, f64)> = self
            .atoms
            .iter()
            .map(|(p, c)| (p.clone(), alpha * c))
            .collect();
        atoms.extend(other.atoms.iter().cloned());
        Functional { atoms, bracket: None }
    }
}

/// Dual-norm bracket `[lower, upper]` for a difference functional.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DualNormBracket {
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct BracketOptions {
    pub perturbations: usize,
    pub method: DistanceMethod,
}

impl Default for BracketOptions {
    fn default() -> Self {
        BracketOptions {
            perturbations: DICTIONARY_PERTURBATIONS,
            method: DistanceMethod::Auto,
        }
    }
}

/// Brackets the dual norm of `delta_y - delta_x`.
///
/// The upper bound is the computed quasi-distance `d(x, y)`. The lower
/// bound maximizes the functional over a dictionary of certified elements
/// of hemi-norm at most 1: smoothed truncated distance functions around
/// `x` and perturbed centers. The construction guarantees
/// `lower >= min(d(x,y), 1) - 3 eps`.
pub fn dual_norm_bracket(
    chart: &Arc<FinslerChart>,
    x: &[f64],
    y: &[f64],
    eps: f64,
    opts: BracketOptions,
) -> Result<DualNormBracket> {
    if !(eps > 0.0) {
        return Err(Error::Precondition("eps must be positive".into()));
    }
    if x == y {
        return Ok(DualNormBracket { lower: 0.0, upper: 0.0 });
    }
    let upper = chart.distance(x, y, opts.method)?.value;
    let grid = Arc::new(chart.grid_points());

    let mut lower = 0.0f64;
    let centers = bracket_centers(chart, x, y, opts.perturbations);
    for (k, c) in centers.iter().enumerate() {
        let built = build_dictionary_element(chart, &grid, c, eps, opts.method);
        let field = match built {
            Ok(f) => f,
            // the primary center must succeed; perturbed ones may be skipped
            Err(e) if k == 0 => return Err(e),
            Err(_) => continue,
        };
        let element = match cone_certify(field, chart, &grid) {
            Ok(e) => e,
            Err(e) if k == 0 => return Err(Error::Rejected(e)),
            Err(_) => continue,
        };
        let scale = 1.0 / element.hemi_norm.max(1.0);
        let candidate = scale * (element.eval(y) - element.eval(x));
        lower = lower.max(candidate);
    }
    Ok(DualNormBracket { lower, upper })
}

fn bracket_centers(
    chart: &FinslerChart,
    x: &[f64],
    y: &[f64],
    perturbations: usize,
) -> Vec<Vec<f64>> {
    let mut centers = vec![x.to_vec()];
    let span: f64 = chart.domain[0][1] - chart.domain[0][0];
    let gap: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let sigma = gap.max(0.05 * span) / 10.0;
    let dim = chart.dim();
    let mut k = 0;
    while centers.len() < perturbations + 1 {
        let axis = k % dim;
        let magnitude = sigma * (1.0 + (k / (2 * dim)) as f64);
        let sign = if (k / dim) % 2 == 0 { 1.0 } else { -1.0 };
        let mut c = x.to_vec();
        c[axis] = (c[axis] + sign * magnitude)
            .clamp(chart.domain[axis][0], chart.domain[axis][1]);
        centers.push(c);
        k += 1;
    }
    centers
}

/// A certified unit-ball generator for the bracket dictionary: the smoothed
/// truncation of `d(center, .)` per the constructive lower-bound recipe.
fn build_dictionary_element(
    chart: &Arc<FinslerChart>,
    grid: &Arc<Vec<Vec<f64>>>,
    center: &[f64],
    eps: f64,
    method: DistanceMethod,
) -> Result<ScalarField> {
    if chart.dim() == 1 {
        let xs: Vec<f64> = grid.iter().map(|p| p[0]).collect();
        let mut ys = Vec::with_capacity(xs.len());
        for &u in &xs {
            let d = chart.distance(center, &[u], method)?.value;
            ys.push(d.min(1.0));
        }
        let tab = ScalarField::Tabulated1d { xs, ys };
        let half = ScalarField::Const(0.5 * eps);
        smooth_approximate_1d(chart, &tab, &half, 0.5 * eps, SmoothApproxOptions::default())
    } else {
        let drift = match &chart.field {
            MinkowskiNormField::Euclidean { dim } => vec![0.0; *dim],
            MinkowskiNormField::Randers { drift, base: None } => drift.clone(),
            _ => {
                return Err(Error::Precondition(
                    "multi-dimensional brackets need a Euclidean or identity-base Randers chart"
                        .into(),
                ))
            }
        };
        Ok(ScalarField::SmoothTruncDist {
            center: center.to_vec(),
            drift,
            delta: 0.5 * eps,
            shoulder: 0.5 * eps,
        })
    }
}

/// A default dictionary of certified cone elements on a chart: constants,
/// a bounded arctan shape in one dimension, and symmetric plus one-sided
/// steep bumps whose slip norms dominate their sup norms.
pub fn standard_dictionary(
    chart: &Arc<FinslerChart>,
    grid: &Arc<Vec<Vec<f64>>>,
) -> Vec<ConeElement> {
    let [lo, hi] = chart.domain[0];
    let span = hi - lo;
    let mid = 0.5 * (lo + hi);
    let mut fields = vec![ScalarField::Const(1.0), ScalarField::Const(0.5)];
    if chart.dim() == 1 {
        fields.push(ScalarField::shifted_arctan());
    }
    for frac in [0.3, 0.5, 0.7] {
        fields.push(ScalarField::bump(lo + frac * span, 0.2 * span, 1.0));
    }
    // steep rise / gentle fall and the mirror image
    fields.push(ScalarField::Bump {
        center: mid,
        left_width: span / 32.0,
        right_width: span / 4.0,
        height: 1.0,
    });
    fields.push(ScalarField::Bump {
        center: mid,
        left_width: span / 4.0,
        right_width: span / 32.0,
        height: 1.0,
    });
    fields
        .into_iter()
        .filter_map(|f| cone_certify(f, chart, grid).ok())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finsler::MinkowskiNormField;
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn example31(lo: f64, hi: f64, n: usize) -> (Arc<FinslerChart>, Arc<Vec<Vec<f64>>>) {
        let chart =
            Arc::new(FinslerChart::line(MinkowskiNormField::Example31, lo, hi, n).unwrap());
        let grid = Arc::new(chart.grid_points());
        (chart, grid)
    }

    #[test]
    fn shifted_arctan_certifies_with_unit_slip() {
        let (chart, grid) = example31(-50.0, 50.0, 401);
        let e = cone_certify(ScalarField::shifted_arctan(), &chart, &grid).unwrap();
        assert!(e.sup_norm < PI);
        assert!(e.sup_norm > FRAC_PI_2 + FRAC_PI_4);
        assert_relative_eq!(e.slip_norm, 1.0, epsilon = 1e-9);
        assert_relative_eq!(e.hemi_norm, e.sup_norm);
        assert!(e.nonneg_certified);
    }

    #[test]
    fn negative_function_is_rejected_with_witness() {
        let (chart, grid) = example31(-5.0, 5.0, 51);
        let err = cone_certify(ScalarField::arctan(), &chart, &grid).unwrap_err();
        match err {
            ConeRejection::Negative { point, value } => {
                assert!(point[0] < 0.0);
                assert!(value < 0.0);
            }
            other => panic!("expected sign rejection, got {other:?}"),
        }
    }

    #[test]
    fn phi_is_rejected_for_divergent_slip() {
        let (chart, grid) = example31(-1200.0, 1200.0, 241);
        let err = cone_certify(ScalarField::Phi, &chart, &grid).unwrap_err();
        assert!(matches!(err, ConeRejection::InfiniteSlip { .. }), "{err:?}");
    }

    #[test]
    fn tabulated_is_rejected_as_not_c1() {
        let (chart, grid) = example31(-1.0, 1.0, 11);
        let tab = ScalarField::Tabulated1d { xs: vec![-1.0, 1.0], ys: vec![0.0, 0.0] };
        assert!(matches!(
            cone_certify(tab, &chart, &grid),
            Err(ConeRejection::NotC1)
        ));
    }

    #[test]
    fn product_of_units_and_scalar_action() {
        let (chart, grid) = example31(-5.0, 5.0, 51);
        let one = cone_certify(ScalarField::Const(1.0), &chart, &grid).unwrap();
        let prod = cone_product(&one, &one).unwrap();
        assert_relative_eq!(prod.hemi_norm, 1.0);
        assert!(prod.hemi_norm <= PRODUCT_NORM_CONSTANT * one.hemi_norm * one.hemi_norm);

        let b = cone_certify(ScalarField::bump(0.0, 2.0, 1.5), &chart, &grid).unwrap();
        let c = cone_certify(ScalarField::Const(3.0), &chart, &grid).unwrap();
        let cb = cone_product(&c, &b).unwrap();
        assert_relative_eq!(cb.hemi_norm, 3.0 * b.hemi_norm, max_relative = 1e-12);
    }

    #[test]
    fn worked_product_pair_approaches_pi_squared() {
        // wide box so the grid sup of pi/2 + arctan reaches pi - 1e-7
        let (chart, grid) = example31(-1e7, 1e7, 2001);
        let f = cone_certify(ScalarField::shifted_arctan(), &chart, &grid).unwrap();
        let ff = cone_product(&f, &f).unwrap();
        assert!((ff.hemi_norm - PI * PI).abs() < 1e-6, "{}", ff.hemi_norm);
        assert!(
            ff.hemi_norm
                <= PRODUCT_NORM_CONSTANT * f.hemi_norm * f.hemi_norm + 1e-9
        );
        // slip route of the square is 2 f f' with asymmetric norm 2 f
        assert!((ff.slip_norm - 2.0 * PI).abs() < 0.1, "{}", ff.slip_norm);
    }

    #[test]
    fn bounded_inversion_cases() {
        let (chart, grid) = example31(-5.0, 5.0, 51);
        let two = cone_certify(ScalarField::Const(2.0), &chart, &grid).unwrap();
        let inv = bounded_inversion(&two).unwrap();
        assert_relative_eq!(inv.sup_norm, 0.5);
        assert_eq!(inv.negation_slip_norm, 0.0);
        assert!(inv.element.is_some());

        let a = cone_certify(
            ScalarField::Sum(vec![ScalarField::Const(1.0), ScalarField::shifted_arctan()]),
            &chart,
            &grid,
        )
        .unwrap();
        let inv = bounded_inversion(&a).unwrap();
        assert!(inv.sup_norm <= 1.0 + 1e-12);
        assert!(inv.negation_slip_norm.is_finite());
        assert!(inv.element.is_some());

        let small = cone_certify(ScalarField::Const(0.999), &chart, &grid).unwrap();
        assert!(matches!(
            bounded_inversion(&small),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn extended_norm_cases() {
        let (chart, grid) = example31(-5.0, 5.0, 51);
        let f = cone_certify(ScalarField::shifted_arctan(), &chart, &grid).unwrap();
        let hemi = f.hemi_norm;
        let s = SpanElement::from_cone(f.clone()).unwrap();
        assert_eq!(s.extended_norm(), SlipBound::Finite(hemi));

        // 0 - f is negative: infinite extended norm
        let zero = cone_certify(ScalarField::Const(0.0), &chart, &grid).unwrap();
        let neg = SpanElement::new(zero, f.clone()).unwrap();
        assert_eq!(neg.extended_norm(), SlipBound::Infinite);

        // (f + c) - c has the same extended norm as f - 0
        let c = cone_certify(ScalarField::Const(2.0), &chart, &grid).unwrap();
        let fc = f.add(&c).unwrap();
        let shifted = SpanElement::new(fc, c).unwrap();
        match (shifted.extended_norm(), SlipBound::Finite(hemi)) {
            (SlipBound::Finite(a), SlipBound::Finite(b)) => {
                assert_relative_eq!(a, b, max_relative = 1e-12)
            }
            _ => panic!("expected finite norms"),
        }
    }

    #[test]
    fn functionals_evaluate_and_combine() {
        let (chart, grid) = example31(-5.0, 5.0, 51);
        let f = cone_certify(ScalarField::shifted_arctan(), &chart, &grid).unwrap();
        let s = SpanElement::from_cone(f).unwrap();

        let d0 = Functional::delta(&[0.0]);
        assert_relative_eq!(d0.apply(&s), FRAC_PI_2, epsilon = 1e-15);

        let diff = Functional::delta_diff(&[1.0], &[0.0]);
        assert_relative_eq!(diff.apply(&s), FRAC_PI_4, epsilon = 1e-15);

        let one = ScalarField::Const(1.0);
        assert_relative_eq!(d0.apply_field(&one), 1.0);

        // linearity over atoms
        let combo = d0.combine(2.5, &diff);
        assert_relative_eq!(
            combo.apply(&s),
            2.5 * d0.apply(&s) + diff.apply(&s),
            max_relative = 1e-14
        );
    }

    #[test]
    fn bracket_example31_tight_below_one() {
        let (chart, _) = example31(-2.0, 3.0, 201);
        let eps = 1e-3;
        let b = dual_norm_bracket(&chart, &[0.0], &[1.0], eps, BracketOptions::default())
            .unwrap();
        assert!(b.lower <= b.upper + 1e-12);
        assert!(b.upper - b.lower <= 5e-3, "gap {}", b.upper - b.lower);
        assert!(b.lower <= FRAC_PI_4 + 1e-12 && FRAC_PI_4 <= b.upper + 1e-12);
        assert!(b.lower >= FRAC_PI_4.min(1.0) - 3.0 * eps, "lower {}", b.lower);
    }

    #[test]
    fn bracket_zero_functional() {
        let (chart, _) = example31(-2.0, 3.0, 101);
        let b = dual_norm_bracket(&chart, &[1.0], &[1.0], 1e-3, BracketOptions::default())
            .unwrap();
        assert_eq!((b.lower, b.upper), (0.0, 0.0));
    }

    #[test]
    fn bracket_euclidean_truncation_binds() {
        let chart = Arc::new(
            FinslerChart::line(MinkowskiNormField::Euclidean { dim: 1 }, -1.0, 6.0, 281)
                .unwrap(),
        );
        let eps = 1e-3;
        let b = dual_norm_bracket(&chart, &[0.0], &[5.0], eps, BracketOptions::default())
            .unwrap();
        assert_relative_eq!(b.upper, 5.0, epsilon = 1e-9);
        assert!(b.lower >= 1.0 - 3.0 * eps, "lower {}", b.lower);
        assert!(b.lower <= 1.0 + 1e-9);
    }

    #[test]
    fn bracket_2d_randers_unit_dictionary() {
        let chart = Arc::new(
            FinslerChart::new(
                MinkowskiNormField::Randers { drift: vec![0.5, 0.0], base: None },
                vec![[-2.0, 2.0], [-2.0, 2.0]],
                crate::finsler::GridSpec { counts: vec![41, 41], stencil_radius: 2 },
            )
            .unwrap(),
        );
        let eps = 1e-3;
        let x = [0.0, 0.0];
        let y = [0.4, 0.2];
        let d = chart.oracle_distance(&x, &y).unwrap();
        let b = dual_norm_bracket(&chart, &x, &y, eps, BracketOptions::default()).unwrap();
        assert_relative_eq!(b.upper, d, epsilon = 1e-12);
        assert!(b.lower >= d.min(1.0) - 3.0 * eps, "lower {}, d {d}", b.lower);
        assert!(b.lower <= b.upper + 1e-12);
    }

    #[test]
    fn standard_dictionary_is_nonempty_and_unit_certified() {
        let (chart, grid) = example31(-2.0, 3.0, 201);
        let dict = standard_dictionary(&chart, &grid);
        assert!(dict.len() >= 5);
        for e in &dict {
            assert!(e.nonneg_certified);
            assert!(e.hemi_norm.is_finite());
        }
    }
}
