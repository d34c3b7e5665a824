//! A complete sensing scenario: probe Hamiltonian, inverse temperature
//! and encoding. Evaluating it runs the whole pipeline.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::bounds::{bound_report, BoundReport};
use crate::error::Result;
use crate::generator::{EncodingScheme, LocalGenerator};
use crate::operator::{ComplexMatrix, Hermitian, Spectrum, Unitary};
use crate::qfi::{qfi_report, QfiReport};
use crate::thermal::GibbsState;

#[derive(Clone, Debug)]
pub struct Scenario {
    pub probe_hamiltonian: Hermitian,
    pub beta: f64,
    pub encoding: EncodingScheme,
    /// Eigendecomposition of `probe_hamiltonian`, when already known.
    pub probe_spectrum: Option<Spectrum>,
}

#[derive(Clone, Debug)]
pub struct Evaluation {
    pub generator: LocalGenerator,
    pub qfi: QfiReport,
    pub bounds: BoundReport,
}

impl Scenario {
    pub fn new(probe_hamiltonian: Hermitian, beta: f64, encoding: EncodingScheme) -> Self {
        Scenario {
            probe_hamiltonian,
            beta,
            encoding,
            probe_spectrum: None,
        }
    }

    pub fn gibbs_state(&self) -> Result<GibbsState> {
        match &self.probe_spectrum {
            Some(s) => {
                GibbsState::from_spectrum(self.probe_hamiltonian.clone(), s.clone(), self.beta)
            }
            None => crate::thermal::gibbs_state(&self.probe_hamiltonian, self.beta),
        }
    }

    pub fn evaluate(&self) -> Result<Evaluation> {
        let state = self.gibbs_state()?;
        let generator = self.encoding.generator()?;
        let qfi = qfi_report(&state, &generator.h)?;
        let bounds = bound_report(&state, &self.encoding, &generator.h, qfi.f_general)?;
        Ok(Evaluation {
            generator,
            qfi,
            bounds,
        })
    }
}

/// Dense Hermitian matrix with independent standard-normal real and
/// imaginary parts (GUE up to scale).
pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Hermitian {
    let mut m = ComplexMatrix::zeros(dim, dim);
    for i in 0..dim {
        m[(i, i)] = Complex64::new(rng.sample(StandardNormal), 0.0);
        for j in i + 1..dim {
            let z = Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
                / 2f64.sqrt();
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    Hermitian::new(m).expect("constructed Hermitian")
}

/// Random unitary from Gram-Schmidt on a complex Gaussian matrix.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Unitary {
    let mut columns: Vec<DVector<Complex64>> = Vec::with_capacity(dim);
    while columns.len() < dim {
        let mut v = DVector::<Complex64>::from_fn(dim, |_, _| {
            Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        for c in &columns {
            let overlap = c.dotc(&v);
            v -= c * overlap;
        }
        let n = v.norm();
        if n > 1e-6 {
            columns.push(v / Complex64::new(n, 0.0));
        }
    }
    Unitary::new(ComplexMatrix::from_columns(&columns)).expect("orthonormal columns")
}

/// Random probe Hamiltonian and explicit generator with
/// `dim in [2, max_dim]`, `beta in [0.05, 10]`, `t in [0.1, 3.5]`.
pub fn random_scenario<R: Rng + ?Sized>(rng: &mut R, max_dim: usize) -> Result<Scenario> {
    let dim = rng.random_range(2..=max_dim.max(2));
    let h = random_hermitian(rng, dim);
    let a = random_hermitian(rng, dim);
    let beta = rng.random_range(0.05..=10.0);
    let t = rng.random_range(0.1..=3.5);
    Ok(Scenario::new(h, beta, EncodingScheme::explicit(a, t)?))
}
