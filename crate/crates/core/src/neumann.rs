//! The Neumann-Laplacian example
//!
//! ```text
//! i du/dt - d²u/dx² = f,   |t| > 1, x in [0, 1]
//! u(1, x) = e^{i phi} u(-1, x)
//! du/dx(t, 0) = du/dx(t, 1) = 0
//! ```
//!
//! realised on the first `n_modes` cosine modes, where `A = -d²/dx²` is
//! diagonal with eigenvalues `(k pi)²`.

use std::f64::consts::{PI, SQRT_2, TAU};
use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::halfline::{ExponentialAtom, HalfLineFunction, Side, TwoComponentFunction};
use crate::operator::{CVector, HermitianOperator, SpectralPoint, UnitaryParameter};
use crate::probe::{
    continuous_spectrum_scan, point_spectrum_test, NormBoundReport, PointSpectrumReport,
};
use crate::resolvent::ExtensionLW;

pub const EXAMPLE_A: f64 = -1.0;
pub const EXAMPLE_B: f64 = 1.0;
/// x-grid for field reconstruction.
pub const FIELD_X_POINTS: usize = 129;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NeumannConfig {
    pub n_modes: usize,
    pub phi: f64,
    pub a: f64,
    pub b: f64,
}

impl NeumannConfig {
    pub fn new(n_modes: usize, phi: f64) -> Result<Self> {
        if n_modes == 0 {
            return Err(Error::InvalidArgument("n_modes must be at least 1".into()));
        }
        if !phi.is_finite() {
            return Err(Error::InvalidArgument(format!("phi = {phi} is not finite")));
        }
        Ok(NeumannConfig {
            n_modes,
            phi: phi.rem_euclid(TAU),
            a: EXAMPLE_A,
            b: EXAMPLE_B,
        })
    }
}

pub fn build_neumann_operator(n_modes: usize) -> Result<HermitianOperator> {
    if n_modes == 0 {
        return Err(Error::InvalidArgument("n_modes must be at least 1".into()));
    }
    let eigenvalues: Vec<f64> = (0..n_modes).map(|k| (k as f64 * PI).powi(2)).collect();
    HermitianOperator::diagonal(&eigenvalues)
}

pub fn build_example_extension(cfg: &NeumannConfig) -> Result<ExtensionLW> {
    let op = build_neumann_operator(cfg.n_modes)?;
    ExtensionLW::new(
        op,
        UnitaryParameter::phase(cfg.n_modes, cfg.phi),
        cfg.a,
        cfg.b,
    )
}

/// Forcing used when none is supplied: one atom per side spread over all
/// modes with decaying weights. The decay rates 1.7 and 1.3 keep the kernel
/// nonresonant for |Im lambda| away from those values.
pub fn default_forcing(cfg: &NeumannConfig) -> TwoComponentFunction {
    let n = cfg.n_modes;
    let left = CVector::from_fn(n, |k, _| Complex64::new(1.0, 0.0) / (1.0 + k as f64));
    let right = CVector::from_fn(n, |k, _| {
        Complex64::new(if k % 2 == 0 { 1.0 } else { -1.0 }, 0.5) / (1.0 + k as f64)
    });
    TwoComponentFunction::new(
        HalfLineFunction::single(Side::Left, cfg.a, Complex64::new(1.7, 0.3), left)
            .expect("decaying"),
        HalfLineFunction::single(Side::Right, cfg.b, Complex64::new(-1.3, 0.2), right)
            .expect("decaying"),
    )
    .expect("compatible components")
}

/// Witness direction used when none is supplied: equal weight on every mode.
pub fn default_witness_vector(n_modes: usize) -> CVector {
    CVector::from_element(n_modes, Complex64::new(1.0 / (n_modes as f64).sqrt(), 0.0))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResolventCheck {
    pub lambda: SpectralPoint,
    pub residual: f64,
    pub bc_defect: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExampleResults {
    pub config: NeumannConfig,
    pub scan: Vec<NormBoundReport>,
    pub resolvents: Vec<ResolventCheck>,
    pub point_spectrum: Vec<PointSpectrumReport>,
}

impl ExampleResults {
    pub fn all_passed(&self) -> bool {
        self.scan.iter().all(|r| r.satisfied)
            && self.resolvents.iter().all(|r| r.passed)
            && self
                .point_spectrum
                .iter()
                .all(|r| r.verdict == crate::probe::Verdict::NotEigenvalue)
    }
}

/// Runs the norm-bound scan over `x + i eps`, resolvent checks at `x ± i eps`
/// with forcing `f`, and the point-spectrum test at every real `x`.
pub fn run_example(
    cfg: &NeumannConfig,
    real_points: &[f64],
    epsilons: &[f64],
    f: &TwoComponentFunction,
    f0: &CVector,
) -> Result<ExampleResults> {
    let ext = build_example_extension(cfg)?;
    let scan = continuous_spectrum_scan(&ext, real_points, epsilons, f0)?;
    let grid: Vec<SpectralPoint> = real_points
        .iter()
        .flat_map(|&x| {
            epsilons.iter().flat_map(move |&e| {
                [
                    SpectralPoint::from_parts(x, e),
                    SpectralPoint::from_parts(x, -e),
                ]
            })
        })
        .collect();
    let resolvents = grid
        .par_iter()
        .map(|lam| {
            let out = ext.resolve(lam, f)?;
            Ok(ResolventCheck {
                lambda: *lam,
                residual: out.residual,
                bc_defect: out.bc_defect,
                passed: out.passes(1e-10),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let point_spectrum = real_points
        .iter()
        .map(|&x| point_spectrum_test(&ext, &SpectralPoint::real(x), f0, 64))
        .collect::<Result<Vec<_>>>()?;
    Ok(ExampleResults {
        config: *cfg,
        scan,
        resolvents,
        point_spectrum,
    })
}

/// Orthonormal Neumann mode `cos(k pi x)`, normalised on `[0, 1]`.
pub fn cosine_mode(k: usize, x: f64) -> f64 {
    if k == 0 {
        1.0
    } else {
        SQRT_2 * (k as f64 * PI * x).cos()
    }
}

/// Samples `u(t, x) = Σ_k c_k(t) cos_k(x)` on `t_points` times per side
/// (spanning `window` from each endpoint) and 129 equispaced x-points.
pub fn field_samples(
    u: &TwoComponentFunction,
    t_points: usize,
    window: f64,
) -> Vec<(f64, f64, Complex64)> {
    let n = u.dim();
    let mut rows = Vec::new();
    for (part, dir) in [(&u.left, -1.0), (&u.right, 1.0)] {
        let anchor = part.anchor();
        let mut times: Vec<f64> = (0..t_points)
            .map(|j| anchor + dir * window * j as f64 / (t_points.max(2) - 1) as f64)
            .collect();
        if dir < 0.0 {
            times.reverse();
        }
        for t in times {
            let coeffs = part.evaluate(t).expect("sample lies on the half-line");
            for j in 0..FIELD_X_POINTS {
                let x = j as f64 / (FIELD_X_POINTS - 1) as f64;
                let value: Complex64 = (0..n).map(|k| coeffs[k] * cosine_mode(k, x)).sum();
                rows.push((t, x, value));
            }
        }
    }
    rows
}

pub fn field_csv(rows: &[(f64, f64, Complex64)]) -> String {
    let mut out = String::from("t,x,re_u,im_u\n");
    for (t, x, v) in rows {
        let _ = writeln!(out, "{:.16e},{:.16e},{:.16e},{:.16e}", t, x, v.re, v.im);
    }
    out
}

pub fn resolvent_csv(checks: &[ResolventCheck]) -> String {
    let mut out = String::from("lambda_re,lambda_im,residual,bc_defect,passed\n");
    for r in checks {
        let _ = writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e},{}",
            r.lambda.lambda.re, r.lambda.lambda_i, r.residual, r.bc_defect, r.passed
        );
    }
    out
}

/// Atom in mode `k` only, used for mode-decoupling checks.
pub fn single_mode_atom(n_modes: usize, k: usize, rate: Complex64) -> ExponentialAtom {
    let mut coeff = CVector::zeros(n_modes);
    coeff[k] = Complex64::new(1.0, 0.0);
    ExponentialAtom::new(rate, coeff)
}
