//! Numerical evidence about the spectrum of `L_W`.
//!
//! * For real `lambda` the candidate eigenfunction `e^{i(A - lambda)(t-a)} f0`
//!   has constant norm, so it cannot be square integrable on a ray.
//! * For `Im lambda > 0` the witness `f*(lambda; t) = (0, e^{-i(conj lambda - A)t} f0)`
//!   gives `||R_lambda f*|| / ||f*|| >= 1 / (2 Im lambda)`, which blows up as
//!   `lambda` approaches any real point.

use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::halfline::{ExponentialAtom, HalfLineFunction, Side, TwoComponentFunction};
use crate::operator::{CVector, HermitianOperator, SpectralPoint};
use crate::resolvent::ExtensionLW;

/// Width of the sampling window `[a - 100, a]`.
pub const SAMPLE_WINDOW: f64 = 100.0;
/// Norms are clipped here when reporting growth.
pub const GROWTH_CLIP: f64 = 1e300;
const CONSTANT_NORM_TOL: f64 = 1e-10;
const BOUND_SLACK: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    NotEigenvalue,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointSpectrumReport {
    pub lambda: SpectralPoint,
    pub norm_variation: f64,
    pub verdict: Verdict,
}

/// Samples `||e^{i(A - lambda)(t - a)} f0||` on `samples` equispaced points of
/// `[a - 100, a]` and reports the spread. Only real `lambda` can earn a
/// `NotEigenvalue` verdict.
pub fn point_spectrum_test(
    ext: &ExtensionLW,
    lambda: &SpectralPoint,
    f0: &CVector,
    samples: usize,
) -> Result<PointSpectrumReport> {
    if f0.len() != ext.dim() {
        return Err(Error::DimensionMismatch {
            expected: ext.dim(),
            found: f0.len(),
        });
    }
    if f0.norm() == 0.0 {
        return Err(Error::ZeroVector);
    }
    if samples < 10 {
        return Err(Error::InvalidArgument(format!(
            "need at least 10 samples, got {samples}"
        )));
    }
    let op = ext.operator();
    let a = ext.a();
    let step = SAMPLE_WINDOW / (samples - 1) as f64;
    let norm_at = |t: f64| {
        let diag = op.propagator_diagonal(lambda.lambda, t - a);
        let n = f0
            .iter()
            .zip(&diag)
            .map(|(x, p)| (x * p).norm_sqr())
            .sum::<f64>()
            .sqrt();
        if n.is_finite() {
            n.min(GROWTH_CLIP)
        } else {
            GROWTH_CLIP
        }
    };
    let reference = norm_at(a);
    let norm_variation = (0..samples)
        .map(|j| a - SAMPLE_WINDOW + j as f64 * step)
        .map(|t| (norm_at(t) - reference).abs())
        .fold(0.0, f64::max);
    let verdict =
        if lambda.lambda_i == 0.0 && norm_variation < CONSTANT_NORM_TOL * f0.norm().max(1.0) {
            Verdict::NotEigenvalue
        } else {
            Verdict::Inconclusive
        };
    Ok(PointSpectrumReport {
        lambda: *lambda,
        norm_variation,
        verdict,
    })
}

/// `f*(lambda; t) = (0, e^{-i(conj lambda - A) t} f0)`, one atom per mode
/// anchored at `b`.
pub fn witness_function(
    lambda: &SpectralPoint,
    op: &HermitianOperator,
    f0: &CVector,
    a: f64,
    b: f64,
) -> Result<TwoComponentFunction> {
    if lambda.lambda_i <= 0.0 {
        return Err(Error::WrongHalfPlane {
            imag: lambda.lambda_i,
        });
    }
    if f0.len() != op.dim() {
        return Err(Error::DimensionMismatch {
            expected: op.dim(),
            found: f0.len(),
        });
    }
    if f0.norm() == 0.0 {
        return Err(Error::ZeroVector);
    }
    let dim = op.dim();
    let conj = lambda.lambda.conj();
    let atoms = op
        .eigenvalues()
        .iter()
        .enumerate()
        .filter(|(k, _)| f0[*k] != Complex64::new(0.0, 0.0))
        .map(|(k, &alpha)| {
            let rate = Complex64::i() * (alpha - conj);
            let mut coeff = CVector::zeros(dim);
            coeff[k] = f0[k] * (rate * b).exp();
            ExponentialAtom::new(rate, coeff)
        })
        .collect();
    TwoComponentFunction::new(
        HalfLineFunction::zero(Side::Left, a, dim),
        HalfLineFunction::new(Side::Right, b, dim, atoms)?,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormBoundReport {
    pub lambda: SpectralPoint,
    /// `||(R_lambda f*)_2|| / ||f*||`
    pub witness_ratio: f64,
    /// `1 / (2 Im lambda)`
    pub bound: f64,
    pub satisfied: bool,
}

pub fn norm_lower_bound(
    ext: &ExtensionLW,
    lambda: &SpectralPoint,
    f0: &CVector,
) -> Result<NormBoundReport> {
    let witness = witness_function(lambda, ext.operator(), f0, ext.a(), ext.b())?;
    let out = ext.resolve_upper(lambda, &witness)?;
    let witness_ratio = out.u.right.norm() / witness.norm();
    let bound = 1.0 / (2.0 * lambda.lambda_i);
    Ok(NormBoundReport {
        lambda: *lambda,
        witness_ratio,
        bound,
        satisfied: witness_ratio >= bound * (1.0 - BOUND_SLACK),
    })
}

/// `norm_lower_bound` over the grid `x + i eps`, x-major in input order.
pub fn continuous_spectrum_scan(
    ext: &ExtensionLW,
    real_points: &[f64],
    epsilons: &[f64],
    f0: &CVector,
) -> Result<Vec<NormBoundReport>> {
    if let Some(&eps) = epsilons.iter().find(|&&e| e.is_nan() || e < ext.min_imag()) {
        return Err(Error::TooCloseToRealAxis {
            imag: eps,
            min_imag: ext.min_imag(),
        });
    }
    let grid: Vec<SpectralPoint> = real_points
        .iter()
        .flat_map(|&x| {
            epsilons
                .iter()
                .map(move |&e| SpectralPoint::from_parts(x, e))
        })
        .collect();
    grid.par_iter()
        .map(|lam| norm_lower_bound(ext, lam, f0))
        .collect()
}

/// CSV with columns `x, epsilon, witness_ratio, bound, satisfied`.
pub fn scan_csv(reports: &[NormBoundReport]) -> String {
    let mut out = String::from("x,epsilon,witness_ratio,bound,satisfied\n");
    for r in reports {
        let _ = writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e},{}",
            r.lambda.lambda.re, r.lambda.lambda_i, r.witness_ratio, r.bound, r.satisfied
        );
    }
    out
}

pub fn point_spectrum_csv(reports: &[PointSpectrumReport]) -> String {
    let mut out = String::from("lambda_re,lambda_im,norm_variation,verdict\n");
    for r in reports {
        let verdict = match r.verdict {
            Verdict::NotEigenvalue => "not-eigenvalue",
            Verdict::Inconclusive => "inconclusive",
        };
        let _ = writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{}",
            r.lambda.lambda.re, r.lambda.lambda_i, r.norm_variation, verdict
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::UnitaryParameter;
    use crate::random;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn scalar_ext() -> ExtensionLW {
        let op = HermitianOperator::diagonal(&[0.0]).unwrap();
        ExtensionLW::new(op, UnitaryParameter::identity(1), -1.0, 1.0).unwrap()
    }

    #[test]
    fn constant_solution() {
        let ext = scalar_ext();
        let one = CVector::from_element(1, c(1.0, 0.0));
        let r = point_spectrum_test(&ext, &SpectralPoint::real(0.0), &one, 64).unwrap();
        assert_eq!(r.norm_variation, 0.0);
        assert_eq!(r.verdict, Verdict::NotEigenvalue);
    }

    #[test]
    fn off_axis_control_decays_into_the_window() {
        // ||u1(t)|| = e^{0.3 (t - a)} ||f0||, so the spread is ||f0|| (1 - e^{-30})
        let ext = scalar_ext();
        let f0 = CVector::from_element(1, c(0.6, 0.8));
        let r = point_spectrum_test(&ext, &SpectralPoint::from_parts(0.2, 0.3), &f0, 64).unwrap();
        let expected = 1.0 - (-30.0f64).exp();
        assert!((r.norm_variation - expected).abs() < 1e-12);
        assert_eq!(r.verdict, Verdict::Inconclusive);

        let r = point_spectrum_test(&ext, &SpectralPoint::from_parts(0.2, -0.3), &f0, 64).unwrap();
        assert!((r.norm_variation - ((30.0f64).exp() - 1.0)).abs() < 1e-12 * 30f64.exp());
    }

    #[test]
    fn point_spectrum_argument_errors() {
        let ext = scalar_ext();
        let zero = CVector::zeros(1);
        assert!(matches!(
            point_spectrum_test(&ext, &SpectralPoint::real(0.0), &zero, 64),
            Err(Error::ZeroVector)
        ));
        let one = CVector::from_element(1, c(1.0, 0.0));
        assert!(point_spectrum_test(&ext, &SpectralPoint::real(0.0), &one, 5).is_err());
    }

    #[test]
    fn huge_growth_is_clipped() {
        let ext = scalar_ext();
        let one = CVector::from_element(1, c(1.0, 0.0));
        let r =
            point_spectrum_test(&ext, &SpectralPoint::from_parts(0.0, -20.0), &one, 64).unwrap();
        assert!(r.norm_variation.is_finite());
        assert!(r.norm_variation >= GROWTH_CLIP * 0.99);
    }

    #[test]
    fn witness_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let op = random::hermitian(&mut rng, 4, 2.0);
        let f0 = random::vector(&mut rng, 4);
        let (b, li) = (1.5, 0.4);
        let w = witness_function(&SpectralPoint::from_parts(-0.3, li), &op, &f0, 0.0, b).unwrap();
        let expected = (-2.0 * li * b).exp() * f0.norm_squared() / (2.0 * li);
        assert!((w.norm_sq() - expected).abs() < 1e-13 * expected);
        assert_eq!(w.left.norm_sq(), 0.0);

        let doubled =
            witness_function(&SpectralPoint::from_parts(-0.3, 2.0 * li), &op, &f0, 0.0, b).unwrap();
        let ratio = doubled.norm_sq() / w.norm_sq();
        assert!((ratio - 0.5 * (-2.0 * li * b).exp()).abs() < 1e-13);

        assert!(matches!(
            witness_function(
                &SpectralPoint::from_parts(0.0, 1.0),
                &op,
                &CVector::zeros(4),
                0.0,
                b
            ),
            Err(Error::ZeroVector)
        ));
        assert!(matches!(
            witness_function(&SpectralPoint::from_parts(0.0, -1.0), &op, &f0, 0.0, b),
            Err(Error::WrongHalfPlane { .. })
        ));
    }

    #[test]
    fn scalar_hand_case() {
        // A = [0], W = [1], f0 = 1, lambda = i: ratio = 1/2
        let ext = scalar_ext();
        let one = CVector::from_element(1, c(1.0, 0.0));
        let r = norm_lower_bound(&ext, &SpectralPoint::from_parts(0.0, 1.0), &one).unwrap();
        assert!((r.witness_ratio - 0.5).abs() < 1e-12);
        assert!(r.satisfied);
        let witness = witness_function(
            &SpectralPoint::from_parts(0.0, 1.0),
            ext.operator(),
            &one,
            -1.0,
            1.0,
        )
        .unwrap();
        let out = ext
            .resolve_upper(&SpectralPoint::from_parts(0.0, 1.0), &witness)
            .unwrap();
        assert!((out.u.right.norm_sq() - (-2.0f64).exp() / 8.0).abs() < 1e-15);
    }

    #[test]
    fn scan_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let ext = ExtensionLW::new(
            random::hermitian(&mut rng, 3, 1.0),
            random::unitary(&mut rng, 3),
            0.0,
            2.0,
        )
        .unwrap();
        let f0 = random::vector(&mut rng, 3);
        let reports = continuous_spectrum_scan(&ext, &[-1.0, 0.0, 1.0], &[0.5], &f0).unwrap();
        assert_eq!(reports.len(), 3);
        assert!(reports.iter().all(|r| r.satisfied));

        let sweep = continuous_spectrum_scan(&ext, &[0.25], &[1.0, 0.1, 0.01], &f0).unwrap();
        assert!(sweep
            .windows(2)
            .all(|w| w[1].witness_ratio > w[0].witness_ratio));
        assert!(sweep
            .iter()
            .all(|r| r.witness_ratio >= r.bound * (1.0 - 1e-10)));

        assert!(continuous_spectrum_scan(&ext, &[], &[], &f0)
            .unwrap()
            .is_empty());
        assert!(continuous_spectrum_scan(&ext, &[0.0], &[1e-12], &f0).is_err());

        let csv = scan_csv(&reports);
        assert!(csv.starts_with("x,epsilon,witness_ratio,bound,satisfied\n"));
        assert_eq!(csv.lines().count(), 4);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn real_lambda_has_constant_norm(seed in any::<u64>(), dim in 1usize..=8, x in -10.0f64..10.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let ext = ExtensionLW::new(random::hermitian(&mut rng, dim, 3.0), random::unitary(&mut rng, dim), 0.0, 1.0).unwrap();
            let f0 = random::vector(&mut rng, dim);
            let r = point_spectrum_test(&ext, &SpectralPoint::real(x), &f0, 64).unwrap();
            prop_assert!(r.norm_variation < 1e-12 * f0.norm().max(1.0) * 10.0);
            prop_assert_eq!(r.verdict, Verdict::NotEigenvalue);
        }

        #[test]
        fn ratio_is_scale_and_endpoint_free(seed in any::<u64>(), dim in 1usize..=6, s in 0.1f64..10.0, shift in 0.1f64..5.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let op = random::hermitian(&mut rng, dim, 2.0);
            let w = random::unitary(&mut rng, dim);
            let f0 = random::vector(&mut rng, dim);
            let lam = SpectralPoint::from_parts(rng.gen_range(-2.0..2.0), 10f64.powf(rng.gen_range(-2.0..1.0)));
            let e1 = ExtensionLW::new(op.clone(), w.clone(), 0.0, 1.0).unwrap();
            let e2 = ExtensionLW::new(op, w, 0.0, 1.0 + shift).unwrap();
            let r1 = norm_lower_bound(&e1, &lam, &f0).unwrap();
            let r2 = norm_lower_bound(&e1, &lam, &f0.scale(s)).unwrap();
            let r3 = norm_lower_bound(&e2, &lam, &f0).unwrap();
            prop_assert!((r1.witness_ratio - r2.witness_ratio).abs() <= 1e-10 * r1.witness_ratio);
            prop_assert!((r1.witness_ratio - r3.witness_ratio).abs() <= 1e-10 * r1.witness_ratio);
            prop_assert!(r1.satisfied);
        }
    }
}
