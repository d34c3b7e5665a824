//! Dense complex Hermitian operator algebra.
//!
//! Everything downstream (Gibbs states, generators, Fisher information,
//! bounds) is expressed through [`Hermitian`] and its [`Spectrum`]. The
//! eigensolver is nalgebra's Hermitian tridiagonal QR; its output is
//! accepted only after the orthonormality and reconstruction residuals
//! have been checked against fixed tolerances.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{QfiError, Result};

pub type ComplexMatrix = DMatrix<Complex64>;

/// Relative tolerance on `|A_ij - conj(A_ji)|` accepted by [`Hermitian::new`].
pub const HERMITIAN_TOLERANCE: f64 = 1e-12;
/// Maximum entry of `V^dagger V - I` accepted from the eigensolver.
pub const ORTHONORMALITY_TOLERANCE: f64 = 1e-10;
/// Maximum entry of `V diag(E) V^dagger - A`, relative to `max(1, ||A||)`.
pub const RECONSTRUCTION_TOLERANCE: f64 = 1e-10;
/// Maximum entry of `U U^dagger - I` accepted by [`Unitary::new`].
pub const UNITARY_TOLERANCE: f64 = 1e-10;

const EIGEN_MAX_ITERATIONS: usize = 100_000;
// ln(f64::MAX)
const MAX_EXPONENT: f64 = 709.78;

fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

fn check_square_finite(m: &ComplexMatrix) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(QfiError::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    if m.nrows() == 0 {
        return Err(QfiError::NotSquare { rows: 0, cols: 0 });
    }
    for c in 0..m.ncols() {
        for r in 0..m.nrows() {
            let z = m[(r, c)];
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(QfiError::NonFinite { row: r, col: c });
            }
        }
    }
    Ok(())
}

fn anti_hermitian_deviation(m: &ComplexMatrix) -> f64 {
    let n = m.nrows();
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

fn hermitian_part(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Largest entrywise deviation of `m` from the identity.
pub fn identity_deviation(m: &ComplexMatrix) -> f64 {
    let n = m.nrows();
    let mut dev: f64 = 0.0;
    for c in 0..m.ncols() {
        for r in 0..n {
            let target = if r == c {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            };
            dev = dev.max((m[(r, c)] - target).norm());
        }
    }
    dev
}

/// A dense, finite, self-adjoint matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Hermitian(ComplexMatrix);

impl Hermitian {
    /// Validates `m` and stores its exact Hermitian part.
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        check_square_finite(&m)?;
        let deviation = anti_hermitian_deviation(&m);
        let tolerance = HERMITIAN_TOLERANCE * max_abs(&m).max(1.0);
        if deviation > tolerance {
            return Err(QfiError::NotHermitian {
                deviation,
                tolerance,
            });
        }
        Ok(Hermitian(hermitian_part(&m)))
    }

    /// Projects a matrix that is Hermitian up to rounding (products and
    /// commutators of Hermitian operators) onto its Hermitian part. The
    /// discarded anti-Hermitian magnitude is logged.
    pub fn symmetrize(m: ComplexMatrix) -> Result<Self> {
        check_square_finite(&m)?;
        let deviation = anti_hermitian_deviation(&m);
        let scale = max_abs(&m).max(1.0);
        if deviation > HERMITIAN_TOLERANCE * scale {
            log::warn!(
                "symmetrization discarded anti-Hermitian part {deviation:e} (scale {scale:e})"
            );
        } else if deviation > 0.0 {
            log::trace!("symmetrization discarded anti-Hermitian part {deviation:e}");
        }
        Ok(Hermitian(hermitian_part(&m)))
    }

    /// Hermitian part of `m` without a deviation check, for approximations
    /// whose anti-Hermitian residue is truncation error.
    pub fn hermitian_part_of(m: ComplexMatrix) -> Result<Self> {
        check_square_finite(&m)?;
        Ok(Hermitian(hermitian_part(&m)))
    }

    pub fn from_real_diagonal(diagonal: &[f64]) -> Result<Self> {
        let n = diagonal.len();
        let m = ComplexMatrix::from_fn(n, n, |r, c| {
            if r == c {
                Complex64::new(diagonal[r], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        Hermitian::new(m)
    }

    pub fn zeros(dim: usize) -> Self {
        Hermitian(ComplexMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Hermitian(ComplexMatrix::identity(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.0)
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    pub fn scaled(&self, factor: f64) -> Hermitian {
        Hermitian(self.0.scale(factor))
    }

    pub fn add(&self, other: &Hermitian) -> Result<Hermitian> {
        check_dims(self.dim(), other.dim())?;
        Ok(Hermitian(&self.0 + &other.0))
    }

    pub fn sub(&self, other: &Hermitian) -> Result<Hermitian> {
        check_dims(self.dim(), other.dim())?;
        Ok(Hermitian(&self.0 - &other.0))
    }

    /// `A^2`, which is Hermitian.
    pub fn square(&self) -> Hermitian {
        Hermitian(hermitian_part(&(&self.0 * &self.0)))
    }

    /// Symmetrized Jordan product `AB + BA`.
    pub fn anticommutator(&self, other: &Hermitian) -> Result<Hermitian> {
        check_dims(self.dim(), other.dim())?;
        let ab = &self.0 * &other.0;
        Hermitian::symmetrize(&ab + ab.adjoint())
    }

    /// `U A U^dagger` for any square `u` of matching dimension.
    pub fn conjugated_by(&self, u: &ComplexMatrix) -> Result<Hermitian> {
        check_dims(self.dim(), u.nrows())?;
        Hermitian::symmetrize(u * &self.0 * u.adjoint())
    }

    /// Largest entrywise difference to `other`.
    pub fn max_abs_diff(&self, other: &Hermitian) -> f64 {
        max_abs(&(&self.0 - &other.0))
    }

    pub fn eigendecompose(&self) -> Result<Spectrum> {
        eigendecompose(self)
    }

    pub fn seminorm(&self) -> Result<f64> {
        seminorm(self)
    }
}

fn check_dims(left: usize, right: usize) -> Result<()> {
    if left != right {
        Err(QfiError::DimensionMismatch { left, right })
    } else {
        Ok(())
    }
}

/// Ascending eigenvalues with the matching orthonormal eigenvectors as
/// columns.
#[derive(Clone, Debug)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
    eigenvectors: ComplexMatrix,
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &ComplexMatrix {
        &self.eigenvectors
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues[self.eigenvalues.len() - 1]
    }

    /// Spectral width `E_max - E_min`.
    pub fn width(&self) -> f64 {
        (self.max() - self.min()).max(0.0)
    }

    /// `V^dagger A V`: the matrix of `a` in this eigenbasis.
    pub fn to_eigenbasis(&self, a: &ComplexMatrix) -> ComplexMatrix {
        self.eigenvectors.adjoint() * a * &self.eigenvectors
    }

    /// `V A V^dagger`: maps a matrix given in the eigenbasis back.
    pub fn from_eigenbasis(&self, a: &ComplexMatrix) -> ComplexMatrix {
        &self.eigenvectors * a * self.eigenvectors.adjoint()
    }

    /// `V f(E) V^dagger`.
    pub fn map_eigenvalues<F>(&self, f: F) -> ComplexMatrix
    where
        F: Fn(f64) -> Complex64,
    {
        self.map_eigenvalues_indexed(|i| f(self.eigenvalues[i]))
    }

    /// `V diag(f(0), ..., f(d-1)) V^dagger`.
    pub fn map_eigenvalues_indexed<F>(&self, f: F) -> ComplexMatrix
    where
        F: Fn(usize) -> Complex64,
    {
        let mut scaled = self.eigenvectors.clone();
        for c in 0..self.dim() {
            let fc = f(c);
            scaled.column_mut(c).iter_mut().for_each(|z| *z *= fc);
        }
        scaled * self.eigenvectors.adjoint()
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map_eigenvalues(|e| Complex64::new(e, 0.0))
    }

    pub fn orthonormality_error(&self) -> f64 {
        identity_deviation(&(self.eigenvectors.adjoint() * &self.eigenvectors))
    }

    pub fn reconstruction_error(&self, a: &Hermitian) -> f64 {
        max_abs(&(self.reconstruct() - a.matrix()))
    }

    /// `exp(scale * A)`.
    pub fn exp_scaled(&self, scale: Complex64) -> Result<ComplexMatrix> {
        let max_exponent = self
            .eigenvalues
            .iter()
            .map(|&e| scale.re * e)
            .fold(f64::NEG_INFINITY, f64::max);
        if max_exponent > MAX_EXPONENT {
            return Err(QfiError::ExpOverflow { max_exponent });
        }
        Ok(self.map_eigenvalues(|e| (scale * e).exp()))
    }
}

/// Full eigendecomposition with eigenvalues sorted ascending.
///
/// Ties keep the solver's order, so identical input bits give identical
/// output bits. The result is rejected when the orthonormality or
/// reconstruction residual exceeds its tolerance.
pub fn eigendecompose(a: &Hermitian) -> Result<Spectrum> {
    let dim = a.dim();
    let eig = SymmetricEigen::try_new(a.matrix().clone(), f64::EPSILON, EIGEN_MAX_ITERATIONS)
        .ok_or(QfiError::EigenNonConvergence {
            dim,
            residual: f64::NAN,
        })?;

    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let eigenvectors = ComplexMatrix::from_fn(dim, dim, |r, c| eig.eigenvectors[(r, order[c])]);
    let spectrum = Spectrum {
        eigenvalues,
        eigenvectors,
    };

    let orth = spectrum.orthonormality_error();
    if orth.is_nan() || orth > ORTHONORMALITY_TOLERANCE {
        return Err(QfiError::EigenNonConvergence {
            dim,
            residual: orth,
        });
    }
    let recon = spectrum.reconstruction_error(a);
    if recon.is_nan() || recon > RECONSTRUCTION_TOLERANCE * spectrum.width().max(1.0) {
        return Err(QfiError::EigenNonConvergence {
            dim,
            residual: recon,
        });
    }
    Ok(spectrum)
}

/// `exp(scale * A)` via the eigendecomposition of `A`.
pub fn matrix_exp_scaled(a: &Hermitian, scale: Complex64) -> Result<ComplexMatrix> {
    eigendecompose(a)?.exp_scaled(scale)
}

/// `exp(-i A t)`.
pub fn unitary_evolution(a: &Hermitian, t: f64) -> Result<Unitary> {
    Unitary::new(matrix_exp_scaled(a, Complex64::new(0.0, -t))?)
}

/// `i[A, B] = i(AB - BA)`.
pub fn commutator_i(a: &Hermitian, b: &Hermitian) -> Result<Hermitian> {
    check_dims(a.dim(), b.dim())?;
    let ab = a.matrix() * b.matrix();
    let ba = b.matrix() * a.matrix();
    Hermitian::symmetrize((ab - ba) * Complex64::new(0.0, 1.0))
}

/// Spectral width `E_max - E_min`.
pub fn seminorm(a: &Hermitian) -> Result<f64> {
    Ok(eigendecompose(a)?.width())
}

/// `Tr[X Y]` without forming the product.
pub(crate) fn trace_product(x: &ComplexMatrix, y: &ComplexMatrix) -> Complex64 {
    let n = x.nrows();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            acc += x[(i, k)] * y[(k, i)];
        }
    }
    acc
}

/// Clamps values in `[-tolerance, 0)` to zero.
pub(crate) fn clamp_small_negative(x: f64, tolerance: f64) -> f64 {
    if x < 0.0 && x >= -tolerance {
        0.0
    } else {
        x
    }
}

/// `Var[A]_rho = Tr[rho A^2] - Tr[rho A]^2`.
pub fn variance(a: &Hermitian, rho: &Hermitian) -> Result<f64> {
    check_dims(a.dim(), rho.dim())?;
    let trace = rho.trace();
    if (trace - 1.0).abs() > 1e-12 {
        return Err(QfiError::NotNormalized { trace });
    }
    let mean = trace_product(rho.matrix(), a.matrix()).re;
    let a2 = a.square();
    let second = trace_product(rho.matrix(), a2.matrix()).re;
    Ok(clamp_small_negative(second - mean * mean, 1e-12))
}

/// A matrix with `U U^dagger = I` to [`UNITARY_TOLERANCE`].
#[derive(Clone, Debug, PartialEq)]
pub struct Unitary(ComplexMatrix);

impl Unitary {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        check_square_finite(&m)?;
        let deviation = identity_deviation(&(&m * m.adjoint()));
        if deviation.is_nan() || deviation > UNITARY_TOLERANCE {
            return Err(QfiError::NotUnitary { deviation });
        }
        Ok(Unitary(m))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn adjoint(&self) -> Unitary {
        Unitary(self.0.adjoint())
    }
}
