//! Vector-valued L² functions on `(-inf, a)` and `(b, +inf)`.
//!
//! A function is a finite sum of exponential atoms `c e^{mu (t - anchor)}`
//! whose coefficient vectors live in the eigenbasis of the coefficient
//! operator. The family is closed under the differential expression and
//! under every integral operator of the resolvent, so inner products and
//! norms are exact Gram sums.
//!
//! Inner products are linear in the first slot and conjugate-linear in the
//! second: `(f, g) = ∫ <f(t), g(t)> dt` with `<x, y> = Σ x_k conj(y_k)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{CVector, HermitianOperator};

/// Atoms must decay with `|Re mu|` at least this large.
pub const MIN_DECAY: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    /// Whether `rate` gives an L² exponential on this half-line.
    pub fn admits(self, rate: Complex64) -> bool {
        match self {
            Side::Left => rate.re > MIN_DECAY,
            Side::Right => rate.re < -MIN_DECAY,
        }
    }

    fn contains(self, anchor: f64, t: f64) -> bool {
        match self {
            Side::Left => t <= anchor,
            Side::Right => t >= anchor,
        }
    }

    /// `+1` on the left, `-1` on the right: `∫ e^{s (t - anchor)} dt = sign / s`.
    fn integral_sign(self) -> f64 {
        match self {
            Side::Left => 1.0,
            Side::Right => -1.0,
        }
    }
}

/// `<x, y> = Σ x_k conj(y_k)`.
pub fn hinner(x: &CVector, y: &CVector) -> Complex64 {
    y.dotc(x)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentialAtom {
    pub rate: Complex64,
    #[serde(with = "cvector_serde")]
    pub coeff: CVector,
}

impl ExponentialAtom {
    pub fn new(rate: Complex64, coeff: CVector) -> Self {
        ExponentialAtom { rate, coeff }
    }

    fn value(&self, offset: f64) -> CVector {
        &self.coeff * (self.rate * offset).exp()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "HalfLineRepr")]
pub struct HalfLineFunction {
    side: Side,
    anchor: f64,
    dim: usize,
    atoms: Vec<ExponentialAtom>,
}

#[derive(Deserialize)]
struct HalfLineRepr {
    side: Side,
    anchor: f64,
    dim: usize,
    atoms: Vec<ExponentialAtom>,
}

impl TryFrom<HalfLineRepr> for HalfLineFunction {
    type Error = Error;
    fn try_from(r: HalfLineRepr) -> Result<Self> {
        HalfLineFunction::new(r.side, r.anchor, r.dim, r.atoms)
    }
}

impl HalfLineFunction {
    pub fn new(side: Side, anchor: f64, dim: usize, atoms: Vec<ExponentialAtom>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        if !anchor.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "anchor {anchor} is not finite"
            )));
        }
        for atom in &atoms {
            if atom.coeff.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: atom.coeff.len(),
                });
            }
            if !side.admits(atom.rate) {
                return Err(Error::InvalidRate {
                    re: atom.rate.re,
                    im: atom.rate.im,
                    side,
                });
            }
        }
        Ok(HalfLineFunction {
            side,
            anchor,
            dim,
            atoms,
        })
    }

    pub fn zero(side: Side, anchor: f64, dim: usize) -> Self {
        HalfLineFunction {
            side,
            anchor,
            dim,
            atoms: Vec::new(),
        }
    }

    pub fn single(side: Side, anchor: f64, rate: Complex64, coeff: CVector) -> Result<Self> {
        let dim = coeff.len();
        Self::new(side, anchor, dim, vec![ExponentialAtom::new(rate, coeff)])
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn anchor(&self) -> f64 {
        self.anchor
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn atoms(&self) -> &[ExponentialAtom] {
        &self.atoms
    }

    /// Appends an atom whose rate is already known to decay on this side.
    pub(crate) fn push(&mut self, atom: ExponentialAtom) {
        debug_assert!(self.side.admits(atom.rate));
        debug_assert_eq!(atom.coeff.len(), self.dim);
        self.atoms.push(atom);
    }

    pub fn evaluate(&self, t: f64) -> Result<CVector> {
        if !self.side.contains(self.anchor, t) {
            return Err(Error::OutOfDomain {
                t,
                side: self.side,
                anchor: self.anchor,
            });
        }
        Ok(self.value_unchecked(t - self.anchor))
    }

    pub(crate) fn value_unchecked(&self, offset: f64) -> CVector {
        self.atoms
            .iter()
            .fold(CVector::zeros(self.dim), |acc, atom| {
                acc + atom.value(offset)
            })
    }

    /// One-sided limit at the anchor.
    pub fn trace(&self) -> CVector {
        self.atoms
            .iter()
            .fold(CVector::zeros(self.dim), |acc, atom| acc + &atom.coeff)
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.side != other.side {
            return Err(Error::SideMismatch);
        }
        if self.anchor != other.anchor {
            return Err(Error::AnchorMismatch {
                expected: self.anchor,
                found: other.anchor,
            });
        }
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        Ok(())
    }

    /// Exact L² inner product as a Gram sum over atom pairs.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        self.check_compatible(other)?;
        let sign = self.side.integral_sign();
        let mut acc = Complex64::new(0.0, 0.0);
        for p in &self.atoms {
            for q in &other.atoms {
                let exponent = p.rate + q.rate.conj();
                acc += hinner(&p.coeff, &q.coeff) * sign / exponent;
            }
        }
        Ok(acc)
    }

    pub fn norm_sq(&self) -> f64 {
        self.inner(self).map(|z| z.re.max(0.0)).unwrap_or(0.0)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Image under `i d/dt + A`: each coefficient `c` becomes
    /// `(i mu + diag(alpha)) c`, rates unchanged.
    pub fn apply_expression(&self, op: &HermitianOperator) -> Result<Self> {
        self.apply_shifted(op, Complex64::new(0.0, 0.0))
    }

    /// Image under `i d/dt + A - lambda`. The shift is folded into
    /// `alpha_k - lambda` before the rate term is added, so atoms solving
    /// the homogeneous equation map to exact zeros.
    pub fn apply_shifted(&self, op: &HermitianOperator, lambda: Complex64) -> Result<Self> {
        if op.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: op.dim(),
            });
        }
        let alphas = op.eigenvalues();
        let atoms = self
            .atoms
            .iter()
            .map(|atom| {
                let i_mu = Complex64::i() * atom.rate;
                let coeff = CVector::from_fn(self.dim, |k, _| {
                    (i_mu + (alphas[k] - lambda)) * atom.coeff[k]
                });
                ExponentialAtom::new(atom.rate, coeff)
            })
            .collect();
        Ok(HalfLineFunction {
            atoms,
            ..self.clone_shell()
        })
    }

    fn clone_shell(&self) -> Self {
        HalfLineFunction::zero(self.side, self.anchor, self.dim)
    }

    pub fn scale(&self, z: Complex64) -> Self {
        let atoms = self
            .atoms
            .iter()
            .map(|a| ExponentialAtom::new(a.rate, &a.coeff * z))
            .collect();
        HalfLineFunction {
            atoms,
            ..self.clone_shell()
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        out.atoms.extend(other.atoms.iter().cloned());
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    /// Merges atoms with bitwise-identical rates and drops zero atoms.
    /// Cancellation then happens on coefficients rather than inside the
    /// Gram sum.
    pub fn compact(&self) -> Self {
        let mut merged: Vec<ExponentialAtom> = Vec::with_capacity(self.atoms.len());
        for atom in &self.atoms {
            match merged.iter_mut().find(|m| same_rate(m.rate, atom.rate)) {
                Some(m) => m.coeff += &atom.coeff,
                None => merged.push(atom.clone()),
            }
        }
        merged.retain(|a| a.coeff.iter().any(|z| *z != Complex64::new(0.0, 0.0)));
        HalfLineFunction {
            atoms: merged,
            ..self.clone_shell()
        }
    }
}

fn same_rate(x: Complex64, y: Complex64) -> bool {
    x.re.to_bits() == y.re.to_bits() && x.im.to_bits() == y.im.to_bits()
}

/// Element `(u1, u2)` of `L²(H,(-inf,a)) ⊕ L²(H,(b,+inf))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TwoComponentRepr")]
pub struct TwoComponentFunction {
    pub left: HalfLineFunction,
    pub right: HalfLineFunction,
}

#[derive(Deserialize)]
struct TwoComponentRepr {
    left: HalfLineFunction,
    right: HalfLineFunction,
}

impl TryFrom<TwoComponentRepr> for TwoComponentFunction {
    type Error = Error;
    fn try_from(r: TwoComponentRepr) -> Result<Self> {
        TwoComponentFunction::new(r.left, r.right)
    }
}

impl TwoComponentFunction {
    pub fn new(left: HalfLineFunction, right: HalfLineFunction) -> Result<Self> {
        if left.side != Side::Left || right.side != Side::Right {
            return Err(Error::SideMismatch);
        }
        if left.dim != right.dim {
            return Err(Error::DimensionMismatch {
                expected: left.dim,
                found: right.dim,
            });
        }
        if left.anchor >= right.anchor {
            return Err(Error::InvalidEndpoints {
                a: left.anchor,
                b: right.anchor,
            });
        }
        Ok(TwoComponentFunction { left, right })
    }

    pub fn zero(a: f64, b: f64, dim: usize) -> Result<Self> {
        Self::new(
            HalfLineFunction::zero(Side::Left, a, dim),
            HalfLineFunction::zero(Side::Right, b, dim),
        )
    }

    pub fn dim(&self) -> usize {
        self.left.dim
    }

    pub fn a(&self) -> f64 {
        self.left.anchor
    }

    pub fn b(&self) -> f64 {
        self.right.anchor
    }

    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        Ok(self.left.inner(&other.left)? + self.right.inner(&other.right)?)
    }

    pub fn norm_sq(&self) -> f64 {
        self.left.norm_sq() + self.right.norm_sq()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn apply_expression(&self, op: &HermitianOperator) -> Result<Self> {
        Ok(TwoComponentFunction {
            left: self.left.apply_expression(op)?,
            right: self.right.apply_expression(op)?,
        })
    }

    pub fn apply_shifted(&self, op: &HermitianOperator, lambda: Complex64) -> Result<Self> {
        Ok(TwoComponentFunction {
            left: self.left.apply_shifted(op, lambda)?,
            right: self.right.apply_shifted(op, lambda)?,
        })
    }

    pub fn scale(&self, z: Complex64) -> Self {
        TwoComponentFunction {
            left: self.left.scale(z),
            right: self.right.scale(z),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        Ok(TwoComponentFunction {
            left: self.left.add(&other.left)?,
            right: self.right.add(&other.right)?,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        Ok(TwoComponentFunction {
            left: self.left.sub(&other.left)?,
            right: self.right.sub(&other.right)?,
        })
    }

    pub fn compact(&self) -> Self {
        TwoComponentFunction {
            left: self.left.compact(),
            right: self.right.compact(),
        }
    }
}

pub fn evaluate(f: &HalfLineFunction, t: f64) -> Result<CVector> {
    f.evaluate(t)
}

pub fn l2_inner(f: &HalfLineFunction, g: &HalfLineFunction) -> Result<Complex64> {
    f.inner(g)
}

pub fn l2_norm_sq(u: &TwoComponentFunction) -> f64 {
    u.norm_sq()
}

pub fn apply_expression(f: &HalfLineFunction, op: &HermitianOperator) -> Result<HalfLineFunction> {
    f.apply_expression(op)
}

pub(crate) mod cvector_serde {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::operator::CVector;

    pub fn serialize<S: Serializer>(v: &CVector, s: S) -> Result<S::Ok, S::Error> {
        v.as_slice().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CVector, D::Error> {
        let raw = Vec::<Complex64>::deserialize(d)?;
        Ok(CVector::from_vec(raw))
    }
}

pub(crate) mod option_cvector_serde {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::operator::CVector;

    pub fn serialize<S: Serializer>(v: &Option<CVector>, s: S) -> Result<S::Ok, S::Error> {
        v.as_ref().map(|v| v.as_slice().to_vec()).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<CVector>, D::Error> {
        let raw = Option::<Vec<Complex64>>::deserialize(d)?;
        Ok(raw.map(CVector::from_vec))
    }
}
