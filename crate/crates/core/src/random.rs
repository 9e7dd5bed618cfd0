//! Seeded generators for randomized operators and atom functions.

use std::f64::consts::PI;
use std::ops::RangeInclusive;

use num_complex::Complex64;
use rand::Rng;

use crate::halfline::{ExponentialAtom, HalfLineFunction, Side, TwoComponentFunction};
use crate::operator::{CMatrix, CVector, HermitianOperator, UnitaryParameter};

fn unit_complex<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// Hermitian matrix with entries of modulus up to about `scale`.
pub fn hermitian<R: Rng + ?Sized>(rng: &mut R, dim: usize, scale: f64) -> HermitianOperator {
    let m = CMatrix::from_fn(dim, dim, |_, _| unit_complex(rng) * scale);
    let h = (&m + m.adjoint()).scale(0.5);
    HermitianOperator::new(h).expect("symmetrised matrix is Hermitian")
}

/// `exp(iH)` for a random Hermitian `H` with spectrum spread over a few
/// multiples of pi.
pub fn unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> UnitaryParameter {
    let h = hermitian(rng, dim, PI);
    let v = h.eigenvectors();
    let phases = CMatrix::from_fn(dim, dim, |r, c| {
        v[(r, c)] * Complex64::from_polar(1.0, h.eigenvalues()[c])
    });
    UnitaryParameter::new(phases * v.adjoint()).expect("exp(iH) is unitary")
}

/// Vector with entries uniform in the unit square; never exactly zero.
pub fn vector<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CVector {
    loop {
        let v = CVector::from_fn(dim, |_, _| unit_complex(rng));
        if v.norm() > 1e-3 {
            return v;
        }
    }
}

/// Parameters for random atom functions.
#[derive(Debug, Clone)]
pub struct AtomRecipe {
    pub atoms: RangeInclusive<usize>,
    /// Range of `|Re mu|`.
    pub decay: (f64, f64),
    /// `Im mu` is drawn from `[-oscillation, oscillation]`.
    pub oscillation: f64,
}

impl Default for AtomRecipe {
    fn default() -> Self {
        AtomRecipe {
            atoms: 1..=3,
            decay: (0.1, 5.0),
            oscillation: 2.0,
        }
    }
}

pub fn atom<R: Rng + ?Sized>(
    rng: &mut R,
    side: Side,
    dim: usize,
    recipe: &AtomRecipe,
) -> ExponentialAtom {
    let decay = rng.gen_range(recipe.decay.0..=recipe.decay.1);
    let re = match side {
        Side::Left => decay,
        Side::Right => -decay,
    };
    let im = if recipe.oscillation > 0.0 {
        rng.gen_range(-recipe.oscillation..=recipe.oscillation)
    } else {
        0.0
    };
    ExponentialAtom::new(Complex64::new(re, im), vector(rng, dim))
}

pub fn halfline<R: Rng + ?Sized>(
    rng: &mut R,
    side: Side,
    anchor: f64,
    dim: usize,
    recipe: &AtomRecipe,
) -> HalfLineFunction {
    let count = rng.gen_range(recipe.atoms.clone());
    let atoms = (0..count).map(|_| atom(rng, side, dim, recipe)).collect();
    HalfLineFunction::new(side, anchor, dim, atoms).expect("generated atoms decay")
}

pub fn two_component<R: Rng + ?Sized>(
    rng: &mut R,
    a: f64,
    b: f64,
    dim: usize,
    recipe: &AtomRecipe,
) -> TwoComponentFunction {
    let left = halfline(rng, Side::Left, a, dim, recipe);
    let right = halfline(rng, Side::Right, b, dim, recipe);
    TwoComponentFunction::new(left, right).expect("generated components are compatible")
}
