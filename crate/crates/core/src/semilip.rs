//! Semi-Lipschitz constants of smooth functions via asymmetric derivative
//! norms.
//!
//! For a C1 function on a Finsler chart, the semi-Lipschitz constant equals
//! the supremum over x of `sup { df(x)(v) : F(x,v) = 1 }`. In one dimension
//! the forward unit sphere has exactly two points, so the norm is a closed
//! form; in higher dimensions it is maximized by dense directional sampling
//! plus a golden-section ascent, which yields certified lower bounds.

pub mod smooth;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::finsler::{DistanceMethod, FinslerChart};
use crate::numeric::golden_section_max;
use crate::quasimetric::SlipBound;
use crate::scalar::ScalarField;

/// Values above this cap along a sample sequence are reported as divergence.
pub const DIVERGENCE_CAP: f64 = 1e6;
/// Seed directions for the sphere maximization in dimension >= 2.
pub const SEED_DIRECTIONS: usize = 256;

/// `sup { df(x)(v) : F(x,v) = 1 }` at a single point.
///
/// One-dimensional charts use the two forward unit vectors exactly; higher
/// dimensions sample directions and refine by golden-section ascent, so the
/// result is a lower bound no smaller than the best sampled value.
pub fn derivative_asym_norm(chart: &FinslerChart, f: &ScalarField, x: &[f64]) -> Result<f64> {
    directional_sup(chart, f, x, false)
}

/// `sup { |df(x)(v)| : F(x,v) <= 1 }`, the symmetric dual quantity used by
/// the norm-comparison experiment.
pub fn derivative_asym_norm_abs(chart: &FinslerChart, f: &ScalarField, x: &[f64]) -> Result<f64> {
    directional_sup(chart, f, x, true)
}

fn directional_sup(chart: &FinslerChart, f: &ScalarField, x: &[f64], absolute: bool) -> Result<f64> {
    if !chart.contains(x) {
        return Err(Error::OutOfDomain { point: x.to_vec() });
    }
    let grad = f.grad(x);
    if chart.dim() == 1 {
        let fwd = chart.field.eval(x, &[1.0]);
        let bwd = chart.field.eval(x, &[-1.0]);
        if fwd <= 0.0 || bwd <= 0.0 {
            return Err(Error::InvalidStructure(format!(
                "norm is not positive at x = {x:?}"
            )));
        }
        let df = grad[0];
        return Ok(if absolute {
            (df / fwd).abs().max((df / bwd).abs())
        } else {
            (df / fwd).max(-df / bwd)
        });
    }

    let objective = |u: &[f64]| -> Result<f64> {
        let speed = chart.field.eval(x, u);
        if speed <= 0.0 {
            return Err(Error::InvalidStructure(format!(
                "norm is not positive at x = {x:?}"
            )));
        }
        let d: f64 = grad.iter().zip(u).map(|(g, c)| g * c).sum();
        Ok(if absolute { d.abs() / speed } else { d / speed })
    };

    match chart.dim() {
        2 => {
            let step = std::f64::consts::TAU / SEED_DIRECTIONS as f64;
            let eval_angle = |theta: f64| -> Result<f64> {
                objective(&[theta.cos(), theta.sin()])
            };
            let mut best = f64::NEG_INFINITY;
            let mut best_theta = 0.0;
            for k in 0..SEED_DIRECTIONS {
                let theta = k as f64 * step;
                let v = eval_angle(theta)?;
                if v > best {
                    best = v;
                    best_theta = theta;
                }
            }
            let (_, refined) = golden_section_max(
                |t| eval_angle(t).unwrap_or(f64::NEG_INFINITY),
                best_theta - step,
                best_theta + step,
                1e-12,
                80,
            );
            Ok(best.max(refined))
        }
        3 => {
            // Fibonacci sphere seeds, then coordinate ascent in the angles
            let golden = std::f64::consts::PI * (3.0 - 5.0f64.sqrt());
            let mut best = f64::NEG_INFINITY;
            let mut best_angles = (0.0, 0.0);
            for k in 0..SEED_DIRECTIONS {
                let z = 1.0 - 2.0 * (k as f64 + 0.5) / SEED_DIRECTIONS as f64;
                let polar = z.acos();
                let azimuth = golden * k as f64;
                let v = objective(&sphere_dir(polar, azimuth))?;
                if v > best {
                    best = v;
                    best_angles = (polar, azimuth);
                }
            }
            let (mut polar, mut azimuth) = best_angles;
            let width = 2.0 * (4.0 / SEED_DIRECTIONS as f64).sqrt();
            for _ in 0..3 {
                let (p, v) = golden_section_max(
                    |t| objective(&sphere_dir(t, azimuth)).unwrap_or(f64::NEG_INFINITY),
                    polar - width,
                    polar + width,
                    1e-12,
                    60,
                );
                polar = p;
                best = best.max(v);
                let (a, v) = golden_section_max(
                    |t| objective(&sphere_dir(polar, t)).unwrap_or(f64::NEG_INFINITY),
                    azimuth - width,
                    azimuth + width,
                    1e-12,
                    60,
                );
                azimuth = a;
                best = best.max(v);
            }
            Ok(best)
        }
        d => Err(Error::DimensionMismatch { expected: 3, got: d }),
    }
}

fn sphere_dir(polar: f64, azimuth: f64) -> [f64; 3] {
    [
        polar.sin() * azimuth.cos(),
        polar.sin() * azimuth.sin(),
        polar.cos(),
    ]
}

/// Sampled profile of the derivative norm over a point set.
#[derive(Debug, Clone, Serialize)]
pub struct DerivativeNormProfile {
    pub samples: Vec<(Vec<f64>, f64)>,
    pub supremum: SlipBound,
    pub maximizing_x: Option<Vec<f64>>,
}

pub fn sup_derivative_norm(
    chart: &FinslerChart,
    f: &ScalarField,
    xs: &[Vec<f64>],
) -> Result<DerivativeNormProfile> {
    sup_derivative_norm_with_cap(chart, f, xs, DIVERGENCE_CAP)
}

/// Profile with an explicit divergence cap: a sampled value above the cap
/// flags the supremum as infinite (with the witness sample).
pub fn sup_derivative_norm_with_cap(
    chart: &FinslerChart,
    f: &ScalarField,
    xs: &[Vec<f64>],
    cap: f64,
) -> Result<DerivativeNormProfile> {
    if xs.is_empty() {
        return Err(Error::EmptySamples);
    }
    let mut samples = Vec::with_capacity(xs.len());
    let mut sup = f64::NEG_INFINITY;
    let mut arg = None;
    for x in xs {
        let v = derivative_asym_norm(chart, f, x)?;
        if v > sup {
            sup = v;
            arg = Some(x.clone());
        }
        samples.push((x.clone(), v));
    }
    let supremum = if sup > cap {
        SlipBound::Infinite
    } else {
        SlipBound::Finite(sup.max(0.0))
    };
    Ok(DerivativeNormProfile { samples, supremum, maximizing_x: arg })
}

/// Two-route comparison of the semi-Lipschitz constant: the empirical pair
/// supremum [`empirical_slip`] against the sampled derivative supremum.
#[derive(Debug, Clone, Serialize)]
pub struct SlipEqualityReport {
    pub empirical_slip: SlipBound,
    pub derivative_sup: SlipBound,
    pub tol: f64,
    /// Slack granted to the derivative route for unsampled maximizers; both
    /// sides are sample lower bounds of the same supremum.
    pub coverage_slack: f64,
    pub pass: bool,
    pub witness_pair: Option<(Vec<f64>, Vec<f64>)>,
}

/// Empirical slip constant over sampled pairs: `sup max(f(y)-f(x), 0) / d(x,y)`,
/// infinite when a zero-distance pair carries an increase.
pub fn empirical_slip(
    chart: &FinslerChart,
    f: &ScalarField,
    pairs: &[(Vec<f64>, Vec<f64>)],
    method: DistanceMethod,
) -> Result<(SlipBound, Option<(Vec<f64>, Vec<f64>)>)> {
    let mut sup = 0.0f64;
    let mut witness = None;
    for (x, y) in pairs {
        let rise = f.eval(y) - f.eval(x);
        if rise <= 0.0 {
            continue;
        }
        let d = chart.distance(x, y, method)?.value;
        if d <= 0.0 {
            return Ok((SlipBound::Infinite, Some((x.clone(), y.clone()))));
        }
        let ratio = rise / d;
        if ratio > sup {
            sup = ratio;
            witness = Some((x.clone(), y.clone()));
        }
    }
    Ok((SlipBound::Finite(sup), witness))
}

pub fn verify_slip_equals_derivative_sup(
    chart: &FinslerChart,
    f: &ScalarField,
    xs: &[Vec<f64>],
    pairs: &[(Vec<f64>, Vec<f64>)],
    tol: f64,
    coverage_slack: f64,
) -> Result<SlipEqualityReport> {
    let (s1, witness) = empirical_slip(chart, f, pairs, DistanceMethod::Auto)?;
    let profile = sup_derivative_norm(chart, f, xs)?;
    let s2 = profile.supremum;
    let pass = match (s1, s2) {
        (SlipBound::Finite(a), SlipBound::Finite(b)) => {
            a <= b * (1.0 + tol) + 1e-12 && b <= a * (1.0 + tol) + coverage_slack
        }
        (SlipBound::Infinite, SlipBound::Infinite) => true,
        // an infinite empirical constant cannot match a finite derivative
        // supremum and vice versa
        _ => false,
    };
    Ok(SlipEqualityReport {
        empirical_slip: s1,
        derivative_sup: s2,
        tol,
        coverage_slack,
        pass,
        witness_pair: witness,
    })
}

/// Per-function entry of the norm-comparison experiment: the classical
/// derivative sup norm, the Finsler unit-ball sup, and the status of the
/// two-sided comparison. The reverse bound is recorded, never asserted.
#[derive(Debug, Clone, Serialize)]
pub struct NormComparisonEntry {
    pub label: String,
    pub classical_sup: SlipBound,
    pub finsler_sup: SlipBound,
    pub ratio: Option<f64>,
    /// `classical <= 2 * finsler`.
    pub forward_bound_holds: bool,
    /// `finsler <= 2 * classical`; false under a divergence flag.
    pub reverse_bound_holds: bool,
    pub finsler_diverges: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct NormComparisonReport {
    pub entries: Vec<NormComparisonEntry>,
}

/// Compares the classical and Finsler derivative norms over a sample set,
/// function by function.
pub fn example34_ratio_experiment(
    chart: &FinslerChart,
    fields: &[(String, ScalarField)],
    xs: &[Vec<f64>],
) -> Result<NormComparisonReport> {
    if xs.is_empty() {
        return Err(Error::EmptySamples);
    }
    let mut entries = Vec::with_capacity(fields.len());
    for (label, f) in fields {
        let mut classical = 0.0f64;
        let mut finsler = 0.0f64;
        for x in xs {
            let g = f.grad(x);
            classical = classical.max(g.iter().map(|t| t * t).sum::<f64>().sqrt());
            finsler = finsler.max(derivative_asym_norm_abs(chart, f, x)?);
        }
        let classical_b = cap_bound(classical);
        let finsler_b = cap_bound(finsler);
        let diverges = !finsler_b.is_finite();
        entries.push(NormComparisonEntry {
            label: label.clone(),
            classical_sup: classical_b,
            finsler_sup: finsler_b,
            ratio: match (classical_b, finsler_b) {
                (SlipBound::Finite(c), SlipBound::Finite(fv)) if c > 0.0 => Some(fv / c),
                _ => None,
            },
            forward_bound_holds: bound_holds(classical_b, finsler_b),
            reverse_bound_holds: bound_holds(finsler_b, classical_b),
            finsler_diverges: diverges,
        });
    }
    Ok(NormComparisonReport { entries })
}

fn cap_bound(v: f64) -> SlipBound {
    if v > DIVERGENCE_CAP {
        SlipBound::Infinite
    } else {
        SlipBound::Finite(v)
    }
}

/// `a <= 2 b` in the capped arithmetic.
fn bound_holds(a: SlipBound, b: SlipBound) -> bool {
    match (a, b) {
        (SlipBound::Finite(a), SlipBound::Finite(b)) => a <= 2.0 * b + 1e-12,
        (_, SlipBound::Infinite) => true,
        (SlipBound::Infinite, SlipBound::Finite(_)) => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finsler::{GridSpec, MinkowskiNormField};
    use approx::assert_relative_eq;

    fn example31_chart(lo: f64, hi: f64, n: usize) -> FinslerChart {
        FinslerChart::line(MinkowskiNormField::Example31, lo, hi, n).unwrap()
    }

    fn grid(lo: f64, hi: f64, n: usize) -> Vec<Vec<f64>> {
        (0..n)
            .map(|i| vec![lo + (hi - lo) * i as f64 / (n - 1) as f64])
            .collect()
    }

    #[test]
    fn neg_phi_norm_is_one_third_at_one() {
        let chart = example31_chart(-2.0, 3.0, 11);
        let v = derivative_asym_norm(&chart, &ScalarField::neg_phi(), &[1.0]).unwrap();
        assert_relative_eq!(v, 1.0 / 3.0, epsilon = 1e-14);
    }

    #[test]
    fn arctan_norm_is_identically_one() {
        let chart = example31_chart(-50.0, 50.0, 11);
        for x in [-50.0, -7.3, 0.0, 1.0, 12.0, 50.0] {
            let v = derivative_asym_norm(&chart, &ScalarField::arctan(), &[x]).unwrap();
            assert_relative_eq!(v, 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn euclidean_dual_norm_is_gradient_norm() {
        let chart = FinslerChart::new(
            MinkowskiNormField::Euclidean { dim: 2 },
            vec![[-1.0, 1.0], [-1.0, 1.0]],
            GridSpec { counts: vec![3, 3], stencil_radius: 1 },
        )
        .unwrap();
        let f = ScalarField::Affine { coeffs: vec![3.0, 4.0], offset: 0.0 };
        let v = derivative_asym_norm(&chart, &f, &[0.0, 0.0]).unwrap();
        assert_relative_eq!(v, 5.0, epsilon = 1e-9);
    }

    #[test]
    fn invalid_norm_errors() {
        let chart = FinslerChart::line(
            MinkowskiNormField::Randers { drift: vec![1.2], base: None },
            -1.0,
            1.0,
            5,
        )
        .unwrap();
        assert!(matches!(
            derivative_asym_norm(&chart, &ScalarField::arctan(), &[0.0]),
            Err(Error::InvalidStructure(_))
        ));
    }

    #[test]
    fn sup_profile_neg_phi_approaches_half() {
        let chart = example31_chart(-50.0, 50.0, 201);
        let profile =
            sup_derivative_norm(&chart, &ScalarField::neg_phi(), &grid(-50.0, 50.0, 201))
                .unwrap();
        match profile.supremum {
            SlipBound::Finite(v) => {
                assert!(v >= 0.499 && v < 0.5, "{v}");
            }
            SlipBound::Infinite => panic!("unexpected divergence"),
        }
        // monotone in |x|: max attained at an endpoint
        let arg = profile.maximizing_x.unwrap();
        assert!(arg[0].abs() >= 49.0);
    }

    #[test]
    fn sup_profile_phi_diverges() {
        let chart = example31_chart(-1200.0, 1200.0, 241);
        let profile =
            sup_derivative_norm(&chart, &ScalarField::Phi, &grid(-1200.0, 1200.0, 241)).unwrap();
        // forward norm of phi' is x^2, beyond the cap at |x| > 1000
        assert_eq!(profile.supremum, SlipBound::Infinite);

        let constant =
            sup_derivative_norm(&chart, &ScalarField::Const(4.0), &grid(-10.0, 10.0, 5)).unwrap();
        assert_eq!(constant.supremum, SlipBound::Finite(0.0));
    }

    #[test]
    fn slip_equality_arctan_is_tight() {
        let chart = example31_chart(-50.0, 50.0, 201);
        let xs = grid(-50.0, 50.0, 101);
        let pairs: Vec<_> = xs
            .iter()
            .flat_map(|x| xs.iter().map(move |y| (x.clone(), y.clone())))
            .filter(|(x, y)| x != y)
            .collect();
        let report = verify_slip_equals_derivative_sup(
            &chart,
            &ScalarField::arctan(),
            &xs,
            &pairs,
            1e-6,
            1e-6,
        )
        .unwrap();
        assert!(report.pass, "{report:?}");
        assert!((report.empirical_slip.value() - 1.0).abs() < 1e-6);
        assert!((report.derivative_sup.value() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn slip_equality_constant_function() {
        let chart = example31_chart(-5.0, 5.0, 41);
        let xs = grid(-5.0, 5.0, 21);
        let pairs = vec![(vec![-3.0], vec![2.0]), (vec![2.0], vec![-3.0])];
        let report = verify_slip_equals_derivative_sup(
            &chart,
            &ScalarField::Const(7.0),
            &xs,
            &pairs,
            1e-9,
            1e-9,
        )
        .unwrap();
        assert!(report.pass);
        assert_eq!(report.empirical_slip, SlipBound::Finite(0.0));
        assert_eq!(report.derivative_sup, SlipBound::Finite(0.0));
    }

    #[test]
    fn norm_comparison_experiment_entries() {
        let chart = example31_chart(-2000.0, 2000.0, 101);
        let xs = grid(-2000.0, 2000.0, 401);
        let fields = vec![
            ("arctan".to_string(), ScalarField::arctan()),
            (
                "affine".to_string(),
                ScalarField::Affine { coeffs: vec![1.0], offset: 0.0 },
            ),
            ("constant".to_string(), ScalarField::Const(1.0)),
        ];
        let report = example34_ratio_experiment(&chart, &fields, &xs).unwrap();
        let arctan = &report.entries[0];
        assert_relative_eq!(arctan.classical_sup.value(), 1.0, epsilon = 1e-9);
        assert_relative_eq!(arctan.finsler_sup.value(), 1.0, epsilon = 1e-9);
        assert!(arctan.forward_bound_holds && arctan.reverse_bound_holds);

        let affine = &report.entries[1];
        assert_relative_eq!(affine.classical_sup.value(), 1.0, epsilon = 1e-12);
        assert!(affine.finsler_diverges, "unit-ball endpoint grows as 1+x^2");
        assert!(affine.forward_bound_holds);
        assert!(!affine.reverse_bound_holds);

        let constant = &report.entries[2];
        assert_eq!(constant.classical_sup, SlipBound::Finite(0.0));
        assert_eq!(constant.finsler_sup, SlipBound::Finite(0.0));
        assert!(constant.forward_bound_holds && constant.reverse_bound_holds);
    }

    #[test]
    fn dimension_two_matches_closed_form_randers_dual() {
        // F(v) = |v| + <b, v>: the dual norm of a one-form w is
        // max over unit circle of <w,u>/(1 + <b,u>)
        let chart = FinslerChart::new(
            MinkowskiNormField::Randers { drift: vec![0.5, 0.0], base: None },
            vec![[-1.0, 1.0], [-1.0, 1.0]],
            GridSpec { counts: vec![3, 3], stencil_radius: 2 },
        )
        .unwrap();
        let f = ScalarField::Affine { coeffs: vec![1.0, 0.0], offset: 0.0 };
        let v = derivative_asym_norm(&chart, &f, &[0.0, 0.0]).unwrap();
        // maximizer is u = (1,0): 1/(1+0.5)
        assert_relative_eq!(v, 1.0 / 1.5, epsilon = 1e-10);
        let g = ScalarField::Affine { coeffs: vec![-1.0, 0.0], offset: 0.0 };
        let w = derivative_asym_norm(&chart, &g, &[0.0, 0.0]).unwrap();
        assert_relative_eq!(w, 2.0, epsilon = 1e-9);
    }
}
