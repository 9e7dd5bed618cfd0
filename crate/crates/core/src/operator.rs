//! Finite-dimensional Hermitian and unitary operator algebra.
//!
//! The coefficient `A` is diagonalised once, at construction. Every later
//! computation (propagators, resolvent kernels, deficiency modes) works with
//! scalar exponentials in that eigenbasis.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type CVector = DVector<Complex64>;
pub type CMatrix = DMatrix<Complex64>;

/// Relative Frobenius tolerance for accepting Hermitian and unitary input.
pub const STRUCTURE_TOL: f64 = 1e-10;

/// Self-adjoint coefficient `A` together with its cached eigendecomposition
/// `A = V diag(alpha) V*`, eigenvalues ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    matrix: CMatrix,
    eigenvalues: Vec<f64>,
    eigenvectors: CMatrix,
}

impl HermitianOperator {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let (rows, cols) = matrix.shape();
        if rows != cols || rows == 0 {
            return Err(Error::NotSquare { rows, cols });
        }
        let norm = matrix.norm();
        let skew = (&matrix - matrix.adjoint()).norm();
        if skew > STRUCTURE_TOL * norm {
            return Err(Error::NotHermitian {
                defect: if norm > 0.0 { skew / norm } else { skew },
            });
        }
        let symmetric = (&matrix + matrix.adjoint()).scale(0.5);
        let eigen = symmetric.clone().symmetric_eigen();

        let mut order: Vec<usize> = (0..rows).collect();
        order.sort_by(|&i, &j| eigen.eigenvalues[i].total_cmp(&eigen.eigenvalues[j]));
        let eigenvalues: Vec<f64> = order.iter().map(|&i| eigen.eigenvalues[i]).collect();
        let eigenvectors = CMatrix::from_fn(rows, rows, |r, c| eigen.eigenvectors[(r, order[c])]);

        let op = HermitianOperator {
            matrix: symmetric,
            eigenvalues,
            eigenvectors,
        };
        let defect = (op.reconstruct() - &op.matrix).norm();
        if defect > STRUCTURE_TOL * norm {
            return Err(Error::EigenFailure {
                defect: defect / norm,
            });
        }
        Ok(op)
    }

    /// Diagonal operator with the given eigenvalues (sorted on construction).
    pub fn diagonal(eigenvalues: &[f64]) -> Result<Self> {
        if eigenvalues.is_empty() {
            return Err(Error::NotSquare { rows: 0, cols: 0 });
        }
        let mut sorted = eigenvalues.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len();
        let matrix = CMatrix::from_fn(n, n, |r, c| {
            if r == c {
                Complex64::new(sorted[r], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        Ok(HermitianOperator {
            matrix,
            eigenvalues: sorted,
            eigenvectors: CMatrix::identity(n, n),
        })
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &CMatrix {
        &self.eigenvectors
    }

    /// `V diag(alpha) V*`.
    pub fn reconstruct(&self) -> CMatrix {
        let scaled = CMatrix::from_fn(self.dim(), self.dim(), |r, c| {
            self.eigenvectors[(r, c)] * self.eigenvalues[c]
        });
        scaled * self.eigenvectors.adjoint()
    }

    /// Coordinates of `v` in the eigenbasis, `V* v`.
    pub fn to_eigenbasis(&self, v: &CVector) -> CVector {
        self.eigenvectors.adjoint() * v
    }

    pub fn from_eigenbasis(&self, v: &CVector) -> CVector {
        &self.eigenvectors * v
    }

    /// Matrix of a standard-basis operator in the eigenbasis, `V* M V`.
    pub fn conjugate_into_eigenbasis(&self, m: &CMatrix) -> CMatrix {
        self.eigenvectors.adjoint() * m * &self.eigenvectors
    }

    /// Diagonal of `exp(-i(lambda - A) tau)` in the eigenbasis.
    pub fn propagator_diagonal(&self, lambda: Complex64, tau: f64) -> Vec<Complex64> {
        self.eigenvalues
            .iter()
            .map(|&alpha| (Complex64::i() * (alpha - lambda) * tau).exp())
            .collect()
    }

    /// `exp(-i(lambda - A) tau)` in the standard basis.
    pub fn propagator(&self, lambda: &SpectralPoint, tau: f64) -> CMatrix {
        let diag = self.propagator_diagonal(lambda.lambda, tau);
        let scaled = CMatrix::from_fn(self.dim(), self.dim(), |r, c| {
            self.eigenvectors[(r, c)] * diag[c]
        });
        scaled * self.eigenvectors.adjoint()
    }
}

/// `exp(-i(lambda - A) tau)`, computed through the cached eigendecomposition.
pub fn propagator(op: &HermitianOperator, lambda: &SpectralPoint, tau: f64) -> CMatrix {
    op.propagator(lambda, tau)
}

pub fn make_hermitian(matrix: CMatrix) -> Result<HermitianOperator> {
    HermitianOperator::new(matrix)
}

pub fn make_unitary(matrix: CMatrix) -> Result<UnitaryParameter> {
    UnitaryParameter::new(matrix)
}

/// Unitary boundary parameter `W` of the coupling `u2(b) = W u1(a)`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryParameter {
    matrix: CMatrix,
}

impl UnitaryParameter {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let (rows, cols) = matrix.shape();
        if rows != cols || rows == 0 {
            return Err(Error::NotSquare { rows, cols });
        }
        let id = CMatrix::identity(rows, rows);
        let left = (matrix.adjoint() * &matrix - &id).norm();
        let right = (&matrix * matrix.adjoint() - &id).norm();
        let defect = left.max(right);
        if defect > STRUCTURE_TOL {
            return Err(Error::NotUnitary { defect });
        }
        Ok(UnitaryParameter { matrix })
    }

    pub fn identity(dim: usize) -> Self {
        UnitaryParameter {
            matrix: CMatrix::identity(dim, dim),
        }
    }

    /// `e^{i phi} I`.
    pub fn phase(dim: usize, phi: f64) -> Self {
        UnitaryParameter {
            matrix: CMatrix::identity(dim, dim) * Complex64::from_polar(1.0, phi),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }
}

/// Complex spectral parameter with its imaginary part cached.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "Complex64", into = "Complex64")]
pub struct SpectralPoint {
    pub lambda: Complex64,
    pub lambda_i: f64,
}

impl SpectralPoint {
    pub fn new(lambda: Complex64) -> Self {
        SpectralPoint {
            lambda,
            lambda_i: lambda.im,
        }
    }

    pub fn from_parts(re: f64, im: f64) -> Self {
        Self::new(Complex64::new(re, im))
    }

    pub fn real(x: f64) -> Self {
        Self::from_parts(x, 0.0)
    }

    pub fn conj(&self) -> Self {
        Self::new(self.lambda.conj())
    }
}

impl From<Complex64> for SpectralPoint {
    fn from(lambda: Complex64) -> Self {
        SpectralPoint::new(lambda)
    }
}

impl From<SpectralPoint> for Complex64 {
    fn from(p: SpectralPoint) -> Self {
        p.lambda
    }
}

/// JSON layout for square complex matrices: `dim` plus row-major
/// `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub dim: usize,
    pub entries: Vec<Complex64>,
}

impl MatrixJson {
    pub fn from_matrix(m: &CMatrix) -> Self {
        let dim = m.nrows();
        let entries = (0..dim)
            .flat_map(|r| (0..m.ncols()).map(move |c| (r, c)))
            .map(|(r, c)| m[(r, c)])
            .collect();
        MatrixJson { dim, entries }
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        if self.dim == 0 || self.entries.len() != self.dim * self.dim {
            return Err(Error::NotSquare {
                rows: self.dim,
                cols: self.entries.len().checked_div(self.dim).unwrap_or(0),
            });
        }
        Ok(CMatrix::from_row_slice(self.dim, self.dim, &self.entries))
    }
}

impl TryFrom<MatrixJson> for HermitianOperator {
    type Error = Error;
    fn try_from(json: MatrixJson) -> Result<Self> {
        HermitianOperator::new(json.to_matrix()?)
    }
}

impl TryFrom<MatrixJson> for UnitaryParameter {
    type Error = Error;
    fn try_from(json: MatrixJson) -> Result<Self> {
        UnitaryParameter::new(json.to_matrix()?)
    }
}

impl Serialize for HermitianOperator {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson::from_matrix(&self.matrix).serialize(s)
    }
}

impl<'de> Deserialize<'de> for HermitianOperator {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let json = MatrixJson::deserialize(d)?;
        HermitianOperator::try_from(json).map_err(serde::de::Error::custom)
    }
}

impl Serialize for UnitaryParameter {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson::from_matrix(&self.matrix).serialize(s)
    }
}

impl<'de> Deserialize<'de> for UnitaryParameter {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let json = MatrixJson::deserialize(d)?;
        UnitaryParameter::try_from(json).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn op_2norm(m: &CMatrix) -> f64 {
        m.clone().singular_values().max()
    }

    #[test]
    fn zero_operator_1x1() {
        let op = make_hermitian(CMatrix::from_element(1, 1, c(0.0, 0.0))).unwrap();
        assert_eq!(op.eigenvalues(), &[0.0]);
        assert!((op.eigenvectors()[(0, 0)].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pauli_x_eigenvalues() {
        // lambda^2 - 1 = 0
        let m = CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]);
        let op = make_hermitian(m).unwrap();
        assert!((op.eigenvalues()[0] + 1.0).abs() < 1e-14);
        assert!((op.eigenvalues()[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn skew_hermitian_rejected() {
        let m = CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0., 1.), c(0., 1.), c(0., 0.)]);
        assert!(matches!(make_hermitian(m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn non_square_rejected() {
        let json = MatrixJson {
            dim: 2,
            entries: vec![c(1.0, 0.0); 3],
        };
        assert!(matches!(
            HermitianOperator::try_from(json),
            Err(Error::NotSquare { .. })
        ));
        assert!(matches!(
            make_hermitian(CMatrix::zeros(2, 3)),
            Err(Error::NotSquare { .. })
        ));
    }

    #[test]
    fn unitary_examples() {
        assert!(make_unitary(UnitaryParameter::phase(2, PI / 2.0).matrix().clone()).is_ok());
        assert!(make_unitary(CMatrix::identity(3, 3)).is_ok());
        let m = CMatrix::from_row_slice(2, 2, &[c(2., 0.), c(0., 0.), c(0., 0.), c(1., 0.)]);
        assert!(matches!(make_unitary(m), Err(Error::NotUnitary { .. })));
    }

    #[test]
    fn propagator_examples() {
        let zero = HermitianOperator::diagonal(&[0.0]).unwrap();
        let p = propagator(&zero, &SpectralPoint::from_parts(0.0, -1.0), 1.0);
        assert!((p[(0, 0)] - c((-1.0f64).exp(), 0.0)).norm() < 1e-15);

        let two = HermitianOperator::diagonal(&[2.0]).unwrap();
        let p = propagator(&two, &SpectralPoint::real(0.0), PI);
        assert!((p[(0, 0)] - c(1.0, 0.0)).norm() < 1e-14);

        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random::hermitian(&mut rng, 4, 2.0);
        let p = propagator(&a, &SpectralPoint::from_parts(0.3, 0.7), 0.0);
        assert!((p - CMatrix::identity(4, 4)).norm() < 1e-14);
    }

    #[test]
    fn json_matrix_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random::hermitian(&mut rng, 3, 1.0);
        let text = serde_json::to_string(&a).unwrap();
        let back: HermitianOperator = serde_json::from_str(&text).unwrap();
        assert!((back.matrix() - a.matrix()).norm() < 1e-15);
        let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(parsed["dim"], 3);
        assert_eq!(parsed["entries"].as_array().unwrap().len(), 9);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn eigendecomposition_reconstructs(seed in any::<u64>(), dim in 1usize..=8) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random::hermitian(&mut rng, dim, 3.0);
            let v = a.eigenvectors();
            prop_assert!((v.adjoint() * v - CMatrix::identity(dim, dim)).norm() < 1e-12);
            prop_assert!((a.reconstruct() - a.matrix()).norm() <= 1e-10 * a.matrix().norm().max(1e-300));
            prop_assert!(a.eigenvalues().windows(2).all(|w| w[0] <= w[1]));
        }

        #[test]
        fn propagator_semigroup_and_adjoint(
            seed in any::<u64>(),
            dim in 1usize..=6,
            re in -3.0f64..3.0,
            im in -1.0f64..1.0,
            t1 in -2.0f64..2.0,
            t2 in -2.0f64..2.0,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random::hermitian(&mut rng, dim, 2.0);
            let lam = SpectralPoint::from_parts(re, im);
            let p12 = a.propagator(&lam, t1 + t2);
            let p1p2 = a.propagator(&lam, t1) * a.propagator(&lam, t2);
            prop_assert!((&p12 - &p1p2).norm() <= 1e-10 * p12.norm().max(1.0));

            let adj = a.propagator(&lam, t1).adjoint();
            let other = a.propagator(&lam.conj(), -t1);
            prop_assert!((&adj - &other).norm() <= 1e-10 * adj.norm().max(1.0));

            let expected = (im * t1).exp();
            let got = op_2norm(&a.propagator(&lam, t1));
            prop_assert!((got - expected).abs() <= 1e-10 * expected.max(1.0));
        }

        #[test]
        fn real_lambda_propagator_is_unitary(
            seed in any::<u64>(),
            dim in 1usize..=6,
            re in -5.0f64..5.0,
            tau in -50.0f64..50.0,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random::hermitian(&mut rng, dim, 3.0);
            let p = a.propagator(&SpectralPoint::real(re), tau);
            prop_assert!((p.adjoint() * &p - CMatrix::identity(dim, dim)).norm() < 1e-10);
        }
    }
}
