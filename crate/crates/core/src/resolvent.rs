//! Self-adjoint extensions `L_W` and their resolvents.
//!
//! `L_W` acts by `i u' + A u` on pairs `(u1, u2)` with `u2(b) = W u1(a)`.
//! For `Im lambda != 0` the problem `L_W u = lambda u + f` is solved in
//! closed form: every integral of an exponential atom against the kernel
//! `exp(-i(lambda - A)(t - s))` is again a sum of atoms, so the output is
//! exact up to rounding.
//!
//! Upper half-plane (`Im lambda > 0`):
//!
//! ```text
//! u1(t) = e^{-i(lambda-A)(t-a)} f* + i ∫_t^a   e^{-i(lambda-A)(t-s)} f1(s) ds
//! u2(t) =                            i ∫_t^inf e^{-i(lambda-A)(t-s)} f2(s) ds
//! f*    = W* u2(b)
//! ```
//!
//! Lower half-plane (`Im lambda < 0`):
//!
//! ```text
//! u1(t) =                            -i ∫_-inf^t e^{-i(lambda-A)(t-s)} f1(s) ds
//! u2(t) = e^{-i(lambda-A)(t-b)} g*   -i ∫_b^t    e^{-i(lambda-A)(t-s)} f2(s) ds
//! g*    = W u1(a)
//! ```

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::halfline::{
    option_cvector_serde, ExponentialAtom, HalfLineFunction, Side, TwoComponentFunction,
};
use crate::operator::{CMatrix, CVector, HermitianOperator, SpectralPoint, UnitaryParameter};
use crate::quadrature::{adaptive_integral, graded_breakpoints, PhaseNoise, PANEL_NODES};

pub const DEFAULT_MIN_IMAG: f64 = 1e-8;

/// Relative size below which a kernel denominator `mu + i(lambda - alpha)`
/// is treated as resonant.
const RESONANCE_TOL: f64 = 1e-13;

/// Guard in `residual = ||l(u) - lambda u - f|| / max(||f||, eps)`.
const NORM_GUARD: f64 = 1e-300;
/// Absolute quadrature tolerance per unit of forcing amplitude.
const ORACLE_INTEGRAL_TOL: f64 = 1e-13;

/// Self-adjoint extension `L_W` on `(-inf, a) ∪ (b, +inf)`.
#[derive(Debug, Clone)]
pub struct ExtensionLW {
    op: HermitianOperator,
    w: UnitaryParameter,
    /// `W` in the eigenbasis of `A`.
    w_eig: CMatrix,
    a: f64,
    b: f64,
    min_imag: f64,
}

impl ExtensionLW {
    pub fn new(op: HermitianOperator, w: UnitaryParameter, a: f64, b: f64) -> Result<Self> {
        if a.is_nan() || b.is_nan() || a >= b {
            return Err(Error::InvalidEndpoints { a, b });
        }
        if op.dim() != w.dim() {
            return Err(Error::DimensionMismatch {
                expected: op.dim(),
                found: w.dim(),
            });
        }
        let w_eig = op.conjugate_into_eigenbasis(w.matrix());
        Ok(ExtensionLW {
            op,
            w,
            w_eig,
            a,
            b,
            min_imag: DEFAULT_MIN_IMAG,
        })
    }

    pub fn with_min_imag(mut self, min_imag: f64) -> Self {
        self.min_imag = min_imag;
        self
    }

    pub fn operator(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn unitary(&self) -> &UnitaryParameter {
        &self.w
    }

    /// `W` expressed in the eigenbasis of `A`.
    pub fn unitary_eigenbasis(&self) -> &CMatrix {
        &self.w_eig
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn min_imag(&self) -> f64 {
        self.min_imag
    }

    fn check_function(&self, u: &TwoComponentFunction) -> Result<()> {
        if u.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: u.dim(),
            });
        }
        if u.a() != self.a {
            return Err(Error::AnchorMismatch {
                expected: self.a,
                found: u.a(),
            });
        }
        if u.b() != self.b {
            return Err(Error::AnchorMismatch {
                expected: self.b,
                found: u.b(),
            });
        }
        Ok(())
    }

    /// `||u2(b) - W u1(a)||`.
    pub fn boundary_defect(&self, u: &TwoComponentFunction) -> f64 {
        (u.right.trace() - &self.w_eig * u.left.trace()).norm()
    }

    pub fn apply(&self, u: &TwoComponentFunction) -> Result<TwoComponentFunction> {
        self.check_function(u)?;
        let defect = self.boundary_defect(u);
        if defect > 1e-10 * (1.0 + u.norm()) {
            return Err(Error::NotInDomain { defect });
        }
        u.apply_expression(&self.op)
    }

    fn check_half_plane(&self, lambda: &SpectralPoint, upper: bool) -> Result<()> {
        let imag = lambda.lambda_i;
        if imag.abs() < self.min_imag {
            return Err(Error::TooCloseToRealAxis {
                imag: imag.abs(),
                min_imag: self.min_imag,
            });
        }
        if (imag > 0.0) != upper {
            return Err(Error::WrongHalfPlane { imag });
        }
        Ok(())
    }

    pub fn resolve_upper(
        &self,
        lambda: &SpectralPoint,
        f: &TwoComponentFunction,
    ) -> Result<ResolventOutput> {
        self.check_half_plane(lambda, true)?;
        self.check_function(f)?;
        let lam = lambda.lambda;
        let alphas = self.op.eigenvalues();
        let dim = self.dim();

        let mut right = HalfLineFunction::zero(Side::Right, self.b, dim);
        for atom in f.right.atoms() {
            let (particular, _) = kernel_coefficients(atom, lam, alphas)?;
            right.push(ExponentialAtom::new(atom.rate, particular));
        }
        let f_star = self.w_eig.adjoint() * right.trace();

        let mut left = HalfLineFunction::zero(Side::Left, self.a, dim);
        let mut homogeneous = f_star.clone();
        for atom in f.left.atoms() {
            let (particular, hom) = kernel_coefficients(atom, lam, alphas)?;
            left.push(ExponentialAtom::new(atom.rate, particular));
            homogeneous += hom;
        }
        push_homogeneous(&mut left, &homogeneous, lam, alphas);

        let u = TwoComponentFunction::new(left, right)?;
        Ok(self.finish(*lambda, f, u, Some(f_star), None))
    }

    pub fn resolve_lower(
        &self,
        lambda: &SpectralPoint,
        f: &TwoComponentFunction,
    ) -> Result<ResolventOutput> {
        self.check_half_plane(lambda, false)?;
        self.check_function(f)?;
        let lam = lambda.lambda;
        let alphas = self.op.eigenvalues();
        let dim = self.dim();

        let mut left = HalfLineFunction::zero(Side::Left, self.a, dim);
        for atom in f.left.atoms() {
            let (particular, _) = kernel_coefficients(atom, lam, alphas)?;
            left.push(ExponentialAtom::new(atom.rate, particular));
        }
        let g_star = &self.w_eig * left.trace();

        let mut right = HalfLineFunction::zero(Side::Right, self.b, dim);
        let mut homogeneous = g_star.clone();
        for atom in f.right.atoms() {
            let (particular, hom) = kernel_coefficients(atom, lam, alphas)?;
            right.push(ExponentialAtom::new(atom.rate, particular));
            homogeneous += hom;
        }
        push_homogeneous(&mut right, &homogeneous, lam, alphas);

        let u = TwoComponentFunction::new(left, right)?;
        Ok(self.finish(*lambda, f, u, None, Some(g_star)))
    }

    /// Dispatches on the sign of `Im lambda`.
    pub fn resolve(
        &self,
        lambda: &SpectralPoint,
        f: &TwoComponentFunction,
    ) -> Result<ResolventOutput> {
        if lambda.lambda_i >= 0.0 {
            self.resolve_upper(lambda, f)
        } else {
            self.resolve_lower(lambda, f)
        }
    }

    fn finish(
        &self,
        lambda: SpectralPoint,
        f: &TwoComponentFunction,
        u: TwoComponentFunction,
        f_star: Option<CVector>,
        g_star: Option<CVector>,
    ) -> ResolventOutput {
        let residual = equation_residual(&self.op, lambda.lambda, &u, f) / f.norm().max(NORM_GUARD);
        let bc_defect = self.boundary_defect(&u);
        ResolventOutput {
            lambda,
            residual,
            bc_defect,
            f_norm: f.norm(),
            u,
            f_star,
            g_star,
        }
    }
}

/// For an atom `c e^{mu (s - anchor)}`, the kernel integral splits into a
/// particular atom with the same rate, coefficient `-i c_k / den_k`, and a
/// homogeneous contribution `+i c_k / den_k`, where
/// `den_k = mu + i(lambda - alpha_k)`.
fn kernel_coefficients(
    atom: &ExponentialAtom,
    lambda: Complex64,
    alphas: &[f64],
) -> Result<(CVector, CVector)> {
    let dim = alphas.len();
    let mut particular = CVector::zeros(dim);
    let mut homogeneous = CVector::zeros(dim);
    for k in 0..dim {
        let c = atom.coeff[k];
        if c == Complex64::new(0.0, 0.0) {
            continue;
        }
        let shift = lambda - alphas[k];
        let den = atom.rate + Complex64::i() * shift;
        let scale = 1.0 + atom.rate.norm() + shift.norm();
        if den.norm() <= RESONANCE_TOL * scale {
            return Err(Error::DegenerateKernel {
                modulus: den.norm(),
            });
        }
        let q = Complex64::i() * c / den;
        particular[k] = -q;
        homogeneous[k] = q;
    }
    Ok((particular, homogeneous))
}

/// Rate of the homogeneous solution in mode `k`: `i(alpha_k - lambda)`.
pub(crate) fn homogeneous_rate(alpha: f64, lambda: Complex64) -> Complex64 {
    Complex64::i() * (alpha - lambda)
}

fn push_homogeneous(
    target: &mut HalfLineFunction,
    coeffs: &CVector,
    lambda: Complex64,
    alphas: &[f64],
) {
    for (k, &h) in coeffs.iter().enumerate() {
        if h == Complex64::new(0.0, 0.0) {
            continue;
        }
        let mut coeff = CVector::zeros(alphas.len());
        coeff[k] = h;
        target.push(ExponentialAtom::new(
            homogeneous_rate(alphas[k], lambda),
            coeff,
        ));
    }
}

/// `||l(u) - lambda u - f||` in closed form.
pub fn equation_residual(
    op: &HermitianOperator,
    lambda: Complex64,
    u: &TwoComponentFunction,
    f: &TwoComponentFunction,
) -> f64 {
    u.apply_shifted(op, lambda)
        .and_then(|image| image.sub(f))
        .map(|defect| defect.compact().norm())
        .unwrap_or(f64::INFINITY)
}

/// Resolvent image together with its self-checks.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResolventOutput {
    pub lambda: SpectralPoint,
    pub residual: f64,
    pub bc_defect: f64,
    #[serde(skip)]
    pub f_norm: f64,
    pub u: TwoComponentFunction,
    #[serde(
        with = "option_cvector_serde",
        skip_serializing_if = "Option::is_none",
        default
    )]
    pub f_star: Option<CVector>,
    #[serde(
        with = "option_cvector_serde",
        skip_serializing_if = "Option::is_none",
        default
    )]
    pub g_star: Option<CVector>,
}

impl ResolventOutput {
    /// Relative residual below `tol` and `||u2(b) - W u1(a)|| <= tol ||f||`.
    pub fn passes(&self, tol: f64) -> bool {
        self.residual < tol && self.bc_defect <= tol * self.f_norm.max(NORM_GUARD)
    }
}

pub fn apply_lw(ext: &ExtensionLW, u: &TwoComponentFunction) -> Result<TwoComponentFunction> {
    ext.apply(u)
}

pub fn resolve_upper(
    ext: &ExtensionLW,
    lambda: &SpectralPoint,
    f: &TwoComponentFunction,
) -> Result<ResolventOutput> {
    ext.resolve_upper(lambda, f)
}

pub fn resolve_lower(
    ext: &ExtensionLW,
    lambda: &SpectralPoint,
    f: &TwoComponentFunction,
) -> Result<ResolventOutput> {
    ext.resolve_lower(lambda, f)
}

/// `||f*_lambda||²` for `Im lambda > 0`; bounded by `||f2||² / (2 Im lambda)`.
pub fn resolvent_bound_fstar(
    ext: &ExtensionLW,
    lambda: &SpectralPoint,
    f: &TwoComponentFunction,
) -> Result<f64> {
    let out = ext.resolve_upper(lambda, f)?;
    Ok(out.f_star.map(|v| v.norm_squared()).unwrap_or(0.0))
}

/// Independent evaluation of the resolvent integral formulas by adaptive
/// Gauss–Legendre quadrature, mode by mode in the eigenbasis. Semi-infinite
/// integrals are truncated at `truncation` (the kernel decays at least like
/// `e^{-|Im lambda| s}`) and start from `points` nodes on graded panels.
#[derive(Debug, Clone)]
pub struct IntegralFormula<'a> {
    ext: &'a ExtensionLW,
    lambda: Complex64,
    upper: bool,
    f: &'a TwoComponentFunction,
    truncation: f64,
    points: usize,
    /// `f*` (upper) or `g*` (lower), itself computed by quadrature.
    boundary_vector: CVector,
}

impl<'a> IntegralFormula<'a> {
    pub fn new(
        ext: &'a ExtensionLW,
        lambda: &SpectralPoint,
        f: &'a TwoComponentFunction,
        truncation: f64,
        points: usize,
    ) -> Result<Self> {
        ext.check_half_plane(lambda, lambda.lambda_i > 0.0)?;
        ext.check_function(f)?;
        let mut formula = IntegralFormula {
            ext,
            lambda: lambda.lambda,
            upper: lambda.lambda_i > 0.0,
            f,
            truncation,
            points: points.max(PANEL_NODES),
            boundary_vector: CVector::zeros(ext.dim()),
        };
        formula.boundary_vector = if formula.upper {
            ext.w_eig.adjoint() * formula.tail_integral(Side::Right, ext.b)
        } else {
            -(&ext.w_eig * formula.tail_integral(Side::Left, ext.a))
        };
        Ok(formula)
    }

    pub fn boundary_vector(&self) -> &CVector {
        &self.boundary_vector
    }

    fn alpha(&self, k: usize) -> f64 {
        self.ext.op.eigenvalues()[k]
    }

    /// `f_k(s) e^{-i(lambda - alpha_k)(t - s)}`.
    fn integrand(&self, side: Side, k: usize, t: f64, s: f64) -> Complex64 {
        let part = self.part(side);
        let offset = s - part.anchor();
        let kernel = Complex64::i() * (self.alpha(k) - self.lambda) * (t - s);
        part.atoms()
            .iter()
            .map(|atom| atom.coeff[k] * (atom.rate * offset + kernel).exp())
            .sum()
    }

    fn part(&self, side: Side) -> &HalfLineFunction {
        match side {
            Side::Left => &self.f.left,
            Side::Right => &self.f.right,
        }
    }

    fn tolerance(&self, side: Side, k: usize) -> f64 {
        let sup: f64 = self
            .part(side)
            .atoms()
            .iter()
            .map(|a| a.coeff[k].norm())
            .sum();
        ORACLE_INTEGRAL_TOL * sup.max(NORM_GUARD)
    }

    /// Rounding noise of the integrand when the integration variable is
    /// measured from a point at distance `offset` from the anchor.
    fn noise(&self, side: Side, k: usize, offset: f64) -> PhaseNoise {
        let rate = self
            .part(side)
            .atoms()
            .iter()
            .map(|a| a.rate.norm())
            .fold(0.0, f64::max)
            + (self.alpha(k) - self.lambda).norm();
        PhaseNoise {
            base: rate * offset,
            rate,
        }
    }

    /// Largest angular frequency of the integrand in mode `k`.
    fn frequency(&self, side: Side, k: usize) -> f64 {
        let kernel = (self.alpha(k) - self.lambda.re).abs();
        self.part(side)
            .atoms()
            .iter()
            .map(|a| (a.rate.im - kernel).abs().max((a.rate.im + kernel).abs()))
            .fold(kernel, f64::max)
    }

    /// `i ∫_t^{t+T}` (upper, right side) or `-i ∫_{t-T}^t` (lower, left side).
    fn tail_integral(&self, side: Side, t: f64) -> CVector {
        let direction = match side {
            Side::Left => -1.0,
            Side::Right => 1.0,
        };
        let breaks = graded_breakpoints(self.truncation, self.points / PANEL_NODES);
        let prefactor = Complex64::i();
        CVector::from_fn(self.ext.dim(), |k, _| {
            let tol = self.tolerance(side, k) / breaks.len() as f64;
            let noise = self.noise(side, k, (t - self.part(side).anchor()).abs());
            let mut g = |x: f64| self.integrand(side, k, t, t + direction * x);
            let total: Complex64 = breaks
                .windows(2)
                .map(|w| adaptive_integral(w[0], w[1], tol, noise, &mut g))
                .sum();
            prefactor * total
        })
    }

    /// `∫_lo^hi` of the kernel on a finite interval.
    fn finite_integral(&self, side: Side, t: f64, lo: f64, hi: f64) -> CVector {
        CVector::from_fn(self.ext.dim(), |k, _| {
            let panels = ((hi - lo) * self.frequency(side, k) / (4.0 * PI))
                .ceil()
                .max(1.0) as usize;
            let width = (hi - lo) / panels as f64;
            let tol = self.tolerance(side, k) / panels as f64;
            let noise = self.noise(side, k, t.abs() + self.part(side).anchor().abs());
            let mut g = |s: f64| self.integrand(side, k, t, s);
            (0..panels)
                .map(|j| {
                    let p = lo + j as f64 * width;
                    adaptive_integral(p, p + width, tol, noise, &mut g)
                })
                .sum()
        })
    }

    fn homogeneous(&self, t: f64, anchor: f64) -> CVector {
        CVector::from_fn(self.ext.dim(), |k, _| {
            self.boundary_vector[k]
                * (Complex64::i() * (self.alpha(k) - self.lambda) * (t - anchor)).exp()
        })
    }

    /// `u(t)` on the given side by quadrature.
    pub fn value(&self, side: Side, t: f64) -> Result<CVector> {
        let (a, b) = (self.ext.a, self.ext.b);
        let (anchor, inside) = match side {
            Side::Left => (a, t <= a),
            Side::Right => (b, t >= b),
        };
        if !inside {
            return Err(Error::OutOfDomain { t, side, anchor });
        }
        let i = Complex64::i();
        Ok(match (self.upper, side) {
            (true, Side::Right) => self.tail_integral(Side::Right, t),
            (true, Side::Left) => {
                self.homogeneous(t, a) + self.finite_integral(Side::Left, t, t, a) * i
            }
            (false, Side::Left) => -self.tail_integral(Side::Left, t),
            (false, Side::Right) => {
                self.homogeneous(t, b) - self.finite_integral(Side::Right, t, b, t) * i
            }
        })
    }
}

/// Outcome of checking a closed-form resolvent against quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleReport {
    /// `max |u_closed(t) - u_quad(t)| / max |u_quad(t)|` over the samples.
    pub pointwise: f64,
    /// `|u_quad2(b) - W u_quad1(a)|` relative to the trace sizes.
    pub bc_defect: f64,
    /// Five-point finite-difference residual of the closed form, relative
    /// to the size of the cancelling terms.
    pub ode_residual: f64,
}

impl OracleReport {
    pub fn worst(&self) -> f64 {
        self.pointwise.max(self.bc_defect).max(self.ode_residual)
    }
}

/// Distances from the endpoint at which the oracle samples each side.
pub const ORACLE_OFFSETS: [f64; 6] = [0.0, 0.25, 0.5, 1.0, 2.0, 4.0];

pub fn quadrature_check(
    ext: &ExtensionLW,
    out: &ResolventOutput,
    f: &TwoComponentFunction,
    truncation: f64,
    points: usize,
) -> Result<OracleReport> {
    quadrature_check_at(ext, out, f, truncation, points, &ORACLE_OFFSETS)
}

pub fn quadrature_check_at(
    ext: &ExtensionLW,
    out: &ResolventOutput,
    f: &TwoComponentFunction,
    truncation: f64,
    points: usize,
    offsets: &[f64],
) -> Result<OracleReport> {
    let formula = IntegralFormula::new(ext, &out.lambda, f, truncation, points)?;
    let mut max_err: f64 = 0.0;
    let mut max_val: f64 = 0.0;
    let mut traces = (CVector::zeros(ext.dim()), CVector::zeros(ext.dim()));
    for side in [Side::Left, Side::Right] {
        let (anchor, dir, closed) = match side {
            Side::Left => (ext.a, -1.0, &out.u.left),
            Side::Right => (ext.b, 1.0, &out.u.right),
        };
        for &off in offsets {
            let t = anchor + dir * off;
            let q = formula.value(side, t)?;
            let c = closed.evaluate(t)?;
            max_err = max_err.max((&c - &q).norm());
            max_val = max_val.max(q.norm());
            if off == 0.0 {
                match side {
                    Side::Left => traces.0 = q,
                    Side::Right => traces.1 = q,
                }
            }
        }
    }
    let bc_scale = traces.0.norm() + traces.1.norm();
    let bc = (&traces.1 - &ext.w_eig * &traces.0).norm() / bc_scale.max(NORM_GUARD);

    let ode = finite_difference_residual(ext, out, f, offsets)?;
    Ok(OracleReport {
        pointwise: max_err / max_val.max(NORM_GUARD),
        bc_defect: if bc_scale > 0.0 { bc } else { 0.0 },
        ode_residual: ode,
    })
}

fn finite_difference_residual(
    ext: &ExtensionLW,
    out: &ResolventOutput,
    f: &TwoComponentFunction,
    offsets: &[f64],
) -> Result<f64> {
    let lambda = out.lambda.lambda;
    let alphas = ext.op.eigenvalues();
    let max_rate = [&out.u.left, &out.u.right]
        .iter()
        .flat_map(|p| p.atoms().iter().map(|a| a.rate.norm()))
        .fold(1.0f64, f64::max);
    let h = (1e-2 / max_rate).min(1e-3);
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for (closed, source, anchor, dir) in [
        (&out.u.left, &f.left, ext.a, -1.0),
        (&out.u.right, &f.right, ext.b, 1.0),
    ] {
        for &off in offsets.iter().filter(|&&o| o >= 4.0 * h) {
            let t = anchor + dir * off;
            let at = |s: f64| closed.evaluate(s);
            let derivative = (at(t - 2.0 * h)? - at(t - h)?.scale(8.0) + at(t + h)?.scale(8.0)
                - at(t + 2.0 * h)?)
            .unscale(12.0 * h);
            let u = at(t)?;
            let ft = source.evaluate(t)?;
            let shifted = CVector::from_fn(ext.dim(), |k, _| (alphas[k] - lambda) * u[k]);
            let defect = &derivative * Complex64::i() + &shifted - &ft;
            worst = worst.max(defect.norm());
            scale = scale.max(shifted.norm() + ft.norm());
        }
    }
    Ok(if scale > 0.0 { worst / scale } else { 0.0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{self, AtomRecipe};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn recipe() -> AtomRecipe {
        AtomRecipe {
            atoms: 1..=3,
            decay: (0.5, 3.0),
            oscillation: 2.0,
        }
    }

    fn random_ext(rng: &mut ChaCha8Rng, dim: usize) -> ExtensionLW {
        ExtensionLW::new(
            random::hermitian(rng, dim, 2.0),
            random::unitary(rng, dim),
            -0.5,
            0.75,
        )
        .unwrap()
    }

    fn random_lambda(rng: &mut ChaCha8Rng, upper: bool) -> SpectralPoint {
        let mag = 10f64.powf(rng.gen_range(-3.0..1.0));
        SpectralPoint::from_parts(rng.gen_range(-3.0..3.0), if upper { mag } else { -mag })
    }

    fn scalar_ext(w: Complex64) -> ExtensionLW {
        let op = HermitianOperator::diagonal(&[0.0]).unwrap();
        let w = UnitaryParameter::new(CMatrix::from_element(1, 1, w)).unwrap();
        ExtensionLW::new(op, w, -1.0, 1.0).unwrap()
    }

    #[test]
    fn construction_errors() {
        let op = HermitianOperator::diagonal(&[0.0, 1.0]).unwrap();
        assert!(matches!(
            ExtensionLW::new(op.clone(), UnitaryParameter::identity(2), 1.0, 1.0),
            Err(Error::InvalidEndpoints { .. })
        ));
        assert!(matches!(
            ExtensionLW::new(op, UnitaryParameter::identity(3), 0.0, 1.0),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn zero_input_gives_zero_output() {
        let ext = scalar_ext(c(1.0, 0.0));
        let f = TwoComponentFunction::zero(-1.0, 1.0, 1).unwrap();
        let up = ext
            .resolve_upper(&SpectralPoint::from_parts(0.0, 1.0), &f)
            .unwrap();
        assert_eq!(up.u.norm(), 0.0);
        assert_eq!(up.f_star.unwrap().norm(), 0.0);
        assert!(up.g_star.is_none());
        let down = ext
            .resolve_lower(&SpectralPoint::from_parts(0.0, -1.0), &f)
            .unwrap();
        assert_eq!(down.u.norm(), 0.0);
        assert!(down.f_star.is_none());
    }

    #[test]
    fn half_plane_guards() {
        let ext = scalar_ext(c(1.0, 0.0));
        let f = TwoComponentFunction::zero(-1.0, 1.0, 1).unwrap();
        assert!(matches!(
            ext.resolve_upper(&SpectralPoint::from_parts(0.5, 1e-9), &f),
            Err(Error::TooCloseToRealAxis { .. })
        ));
        assert!(matches!(
            ext.resolve(&SpectralPoint::real(0.5), &f),
            Err(Error::TooCloseToRealAxis { .. })
        ));
        assert!(matches!(
            ext.resolve_upper(&SpectralPoint::from_parts(0.5, -1.0), &f),
            Err(Error::WrongHalfPlane { .. })
        ));
        assert!(matches!(
            ext.resolve_lower(&SpectralPoint::from_parts(0.5, 1.0), &f),
            Err(Error::WrongHalfPlane { .. })
        ));
        let shifted = TwoComponentFunction::zero(-2.0, 1.0, 1).unwrap();
        assert!(matches!(
            ext.resolve_upper(&SpectralPoint::from_parts(0.5, 1.0), &shifted),
            Err(Error::AnchorMismatch { .. })
        ));
    }

    #[test]
    fn resonant_kernel_is_reported() {
        // mu + i(lambda - alpha) = 0 for mu = 1, lambda = i, alpha = 0
        let ext = scalar_ext(c(1.0, 0.0));
        let f = TwoComponentFunction::new(
            HalfLineFunction::single(
                Side::Left,
                -1.0,
                c(1.0, 0.0),
                CVector::from_element(1, c(1.0, 0.0)),
            )
            .unwrap(),
            HalfLineFunction::zero(Side::Right, 1.0, 1),
        )
        .unwrap();
        assert!(matches!(
            ext.resolve_upper(&SpectralPoint::from_parts(0.0, 1.0), &f),
            Err(Error::DegenerateKernel { .. })
        ));
    }

    #[test]
    fn scalar_generic_atom_residual() {
        let ext = scalar_ext(c(1.0, 0.0));
        let one = CVector::from_element(1, c(1.0, 0.0));
        let f = TwoComponentFunction::new(
            HalfLineFunction::single(Side::Left, -1.0, c(2.0, 0.5), one.clone()).unwrap(),
            HalfLineFunction::single(Side::Right, 1.0, c(-1.5, -0.3), one).unwrap(),
        )
        .unwrap();
        let lam = SpectralPoint::from_parts(0.0, 1.0);
        let out = ext.resolve_upper(&lam, &f).unwrap();
        assert!(out.residual < 1e-10);
        assert!(out.bc_defect < 1e-10);
        let report = quadrature_check(&ext, &out, &f, 40.0, 2000).unwrap();
        assert!(report.worst() < 1e-6, "{report:?}");
    }

    #[test]
    fn witness_output_norm() {
        // right-component output norm² = e^{-2 li b} ||f0||² / (8 li³)
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let ext = random_ext(&mut rng, 3);
        let f0 = random::vector(&mut rng, 3);
        let lam = SpectralPoint::from_parts(0.4, 0.7);
        let witness =
            crate::probe::witness_function(&lam, ext.operator(), &f0, ext.a(), ext.b()).unwrap();
        let out = ext.resolve_upper(&lam, &witness).unwrap();
        let li = lam.lambda_i;
        let expected = (-2.0 * li * ext.b()).exp() * f0.norm_squared() / (8.0 * li.powi(3));
        assert!((out.u.right.norm_sq() - expected).abs() < 1e-12 * expected);

        // ||f*||² = e^{-2 li b} ||f0||² / (4 li²) = ||f2||² / (2 li)
        let fs = resolvent_bound_fstar(&ext, &lam, &witness).unwrap();
        let bound = witness.right.norm_sq() / (2.0 * li);
        assert!((fs - bound).abs() < 1e-10 * bound);
    }

    #[test]
    fn lw_domain_check() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let ext = random_ext(&mut rng, 2);
        let f = random::two_component(&mut rng, ext.a(), ext.b(), 2, &recipe());
        let out = ext
            .resolve(&SpectralPoint::from_parts(0.2, 0.8), &f)
            .unwrap();
        // L_W R f = f + lambda R f
        let image = apply_lw(&ext, &out.u).unwrap();
        let expected = f.add(&out.u.scale(c(0.2, 0.8))).unwrap();
        assert!(image.sub(&expected).unwrap().compact().norm() < 1e-10 * f.norm());

        assert!(matches!(apply_lw(&ext, &f), Err(Error::NotInDomain { .. })));
    }

    #[test]
    fn distinct_parameters_give_distinct_resolvents() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let op = random::hermitian(&mut rng, 3, 1.0);
        let w1 = random::unitary(&mut rng, 3);
        let w2 = random::unitary(&mut rng, 3);
        assert!((w1.matrix() - w2.matrix()).norm() > 1e-6);
        let e1 = ExtensionLW::new(op.clone(), w1, 0.0, 1.0).unwrap();
        let e2 = ExtensionLW::new(op, w2, 0.0, 1.0).unwrap();
        let lam = SpectralPoint::from_parts(0.0, 1.0);
        let differs = (0..3).any(|k| {
            let mut coeff = CVector::zeros(3);
            coeff[k] = c(1.0, 0.0);
            let f = TwoComponentFunction::new(
                HalfLineFunction::zero(Side::Left, 0.0, 3),
                HalfLineFunction::single(Side::Right, 1.0, c(-1.0, 0.0), coeff).unwrap(),
            )
            .unwrap();
            let u1 = e1.resolve_upper(&lam, &f).unwrap().u;
            let u2 = e2.resolve_upper(&lam, &f).unwrap().u;
            u1.sub(&u2).unwrap().compact().norm() > 1e-8
        });
        assert!(differs);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn residual_and_boundary_condition(seed in any::<u64>(), dim in 1usize..=6, upper in any::<bool>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let ext = random_ext(&mut rng, dim);
            let lam = random_lambda(&mut rng, upper);
            let f = random::two_component(&mut rng, ext.a(), ext.b(), dim, &recipe());
            let out = ext.resolve(&lam, &f).unwrap();
            prop_assert!(out.passes(1e-10), "residual {} bc {}", out.residual, out.bc_defect);
            prop_assert_eq!(out.f_star.is_some(), upper);
            prop_assert_eq!(out.g_star.is_some(), !upper);
        }

        #[test]
        fn lower_half_plane_left_bound(seed in any::<u64>(), dim in 1usize..=6) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let ext = random_ext(&mut rng, dim);
            let lam = random_lambda(&mut rng, false);
            let f = random::two_component(&mut rng, ext.a(), ext.b(), dim, &recipe());
            let out = ext.resolve_lower(&lam, &f).unwrap();
            let bound = f.left.norm_sq() / lam.lambda_i.powi(2);
            prop_assert!(out.u.left.norm_sq() <= bound * (1.0 + 1e-10));
        }

        #[test]
        fn resolvent_adjoint_pairing(seed in any::<u64>(), dim in 1usize..=6, upper in any::<bool>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let ext = random_ext(&mut rng, dim);
            let lam = random_lambda(&mut rng, upper);
            let f = random::two_component(&mut rng, ext.a(), ext.b(), dim, &recipe());
            let g = random::two_component(&mut rng, ext.a(), ext.b(), dim, &recipe());
            let rf = ext.resolve(&lam, &f).unwrap().u;
            let rg = ext.resolve(&lam.conj(), &g).unwrap().u;
            let lhs = rf.inner(&g).unwrap();
            let rhs = f.inner(&rg).unwrap();
            let scale = rf.norm() * g.norm() + f.norm() * rg.norm();
            prop_assert!((lhs - rhs).norm() <= 1e-10 * scale, "{lhs} vs {rhs}");
        }

        #[test]
        fn first_resolvent_identity(seed in any::<u64>(), dim in 1usize..=5, upper in any::<bool>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let ext = random_ext(&mut rng, dim);
            let lam = random_lambda(&mut rng, upper);
            let zeta = random_lambda(&mut rng, upper);
            let f = random::two_component(&mut rng, ext.a(), ext.b(), dim, &recipe());
            let rl = ext.resolve(&lam, &f).unwrap().u;
            let rz = ext.resolve(&zeta, &f).unwrap().u;
            let rlrz = ext.resolve(&lam, &rz).unwrap().u;
            let lhs = rl.sub(&rz).unwrap();
            let rhs = rlrz.scale(lam.lambda - zeta.lambda);
            let diff = lhs.sub(&rhs).unwrap().compact().norm();
            prop_assert!(diff <= 1e-9 * (rl.norm() + rz.norm()), "diff {diff}");
        }

        #[test]
        fn fstar_bound(seed in any::<u64>(), dim in 1usize..=6) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let ext = random_ext(&mut rng, dim);
            let lam = random_lambda(&mut rng, true);
            let f = random::two_component(&mut rng, ext.a(), ext.b(), dim, &recipe());
            let fs = resolvent_bound_fstar(&ext, &lam, &f).unwrap();
            prop_assert!(fs <= f.right.norm_sq() / (2.0 * lam.lambda_i) * (1.0 + 1e-12));
        }
    }
}
