//! Boundary values of the maximal operator and deficiency indices of the
//! half-line minimal operators.
//!
//! The boundary maps are
//!
//! ```text
//! gamma1(u) = (u1(a) + u2(b)) / (i sqrt 2)
//! gamma2(u) = (u1(a) - u2(b)) / sqrt 2
//! ```
//!
//! and for `u, v` in the maximal domain
//!
//! ```text
//! (Lu, v) - (u, Lv) = (gamma2 u, gamma1 v) - (gamma1 u, gamma2 v)
//!                   = i (<u1(a), v1(a)> - <u2(b), v2(b)>)
//! ```

use std::f64::consts::SQRT_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::halfline::{cvector_serde, hinner, HalfLineFunction, Side, TwoComponentFunction};
use crate::operator::{CVector, HermitianOperator};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPair {
    #[serde(with = "cvector_serde")]
    pub gamma1: CVector,
    #[serde(with = "cvector_serde")]
    pub gamma2: CVector,
}

impl BoundaryPair {
    /// Recovers `(u1(a), u2(b))`.
    pub fn traces(&self) -> (CVector, CVector) {
        let i_g1 = &self.gamma1 * Complex64::i();
        (
            (&i_g1 + &self.gamma2).unscale(SQRT_2),
            (&i_g1 - &self.gamma2).unscale(SQRT_2),
        )
    }
}

pub fn boundary_map(u: &TwoComponentFunction) -> BoundaryPair {
    let left = u.left.trace();
    let right = u.right.trace();
    let gamma1 = (&left + &right) / Complex64::new(0.0, SQRT_2);
    let gamma2 = (&left - &right).unscale(SQRT_2);
    BoundaryPair { gamma1, gamma2 }
}

/// The right-hand side of the Green identity for the pair `(u, v)`.
pub fn boundary_form(u: &BoundaryPair, v: &BoundaryPair) -> Complex64 {
    hinner(&u.gamma2, &v.gamma1) - hinner(&u.gamma1, &v.gamma2)
}

/// A function with prescribed boundary values: one decaying atom per side,
/// rate `1` on the left and `-1` on the right, scaled to the traces
/// `(i F1 + F2)/sqrt 2` and `(i F1 - F2)/sqrt 2`.
pub fn solve_boundary_targets(
    f1: &CVector,
    f2: &CVector,
    op: &HermitianOperator,
    a: f64,
    b: f64,
) -> Result<TwoComponentFunction> {
    let dim = op.dim();
    for v in [f1, f2] {
        if v.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: v.len(),
            });
        }
    }
    let target = BoundaryPair {
        gamma1: f1.clone(),
        gamma2: f2.clone(),
    };
    let (left_trace, right_trace) = target.traces();
    let left = HalfLineFunction::single(Side::Left, a, Complex64::new(1.0, 0.0), left_trace)?;
    let right = HalfLineFunction::single(Side::Right, b, Complex64::new(-1.0, 0.0), right_trace)?;
    TwoComponentFunction::new(left, right)
}

/// Both sides of the Green identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreenTerms {
    /// `(Lu, v) - (u, Lv)` from exact Gram sums.
    pub lhs: Complex64,
    /// Boundary form of `(gamma u, gamma v)`.
    pub rhs: Complex64,
}

impl GreenTerms {
    pub fn defect(&self) -> Complex64 {
        self.lhs - self.rhs
    }
}

pub fn green_terms(
    u: &TwoComponentFunction,
    v: &TwoComponentFunction,
    op: &HermitianOperator,
) -> Result<GreenTerms> {
    let lu = u.apply_expression(op)?;
    let lv = v.apply_expression(op)?;
    let lhs = lu.inner(v)? - u.inner(&lv)?;
    let rhs = boundary_form(&boundary_map(u), &boundary_map(v));
    Ok(GreenTerms { lhs, rhs })
}

/// `(Lu, v) - (u, Lv) - [(gamma2 u, gamma1 v) - (gamma1 u, gamma2 v)]`.
pub fn green_defect(
    u: &TwoComponentFunction,
    v: &TwoComponentFunction,
    op: &HermitianOperator,
) -> Result<Complex64> {
    Ok(green_terms(u, v, op)?.defect())
}

/// `|defect| / (1 + ||u|| ||v||)`.
pub fn relative_green_defect(
    u: &TwoComponentFunction,
    v: &TwoComponentFunction,
    op: &HermitianOperator,
) -> Result<f64> {
    Ok(green_defect(u, v, op)?.norm() / (1.0 + u.norm() * v.norm()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeficiencyReport {
    pub side: Side,
    /// `dim ker(B* + i)`
    pub m: usize,
    /// `dim ker(B* - i)`
    pub n: usize,
}

/// Growth rate of the solution of `i u' + alpha u = z u`.
fn mode_rate(alpha: f64, z: Complex64) -> Complex64 {
    -Complex64::i() * (z - alpha)
}

/// Counts, mode by mode, the solutions of `i u' + A u = ∓ i u` that are
/// square integrable on the given half-line.
pub fn deficiency_indices(side: Side, op: &HermitianOperator) -> DeficiencyReport {
    let count = |z: Complex64| {
        op.eigenvalues()
            .iter()
            .filter(|&&alpha| side.admits(mode_rate(alpha, z)))
            .count()
    };
    DeficiencyReport {
        side,
        m: count(-Complex64::i()),
        n: count(Complex64::i()),
    }
}
