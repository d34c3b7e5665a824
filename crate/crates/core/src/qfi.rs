//! Dynamic quantum Fisher information of `rho = U rho_0 U^dagger`.
//!
//! Three independent evaluations are provided:
//!
//! * [`qfi_general`]: spectral form over the probe eigenbasis,
//!   `sum_i 4 p_i Var[h]_i - sum_{i != j} 8 p_i p_j / (p_i + p_j) |h_ij|^2`;
//! * [`qfi_thermal`]: for Gibbs probes, through the commutator
//!   `C = i[H, h]` and the weights `1 - tanhc^2(beta (E_i - E_j) / 2)`;
//! * [`qfi_sld`]: the symmetric-logarithmic-derivative form
//!   `sum_{i,j} 2 (p_i - p_j)^2 / (p_i + p_j) |h_ij|^2`.
//!
//! All double sums use compensated summation.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{QfiError, Result};
use crate::operator::{commutator_i, eigendecompose, ComplexMatrix, Hermitian};
use crate::sum::NeumaierSum;
use crate::thermal::GibbsState;

/// Pairs with `p_i + p_j` below this are outside the support of a generic probe.
pub const SUPPORT_TOLERANCE: f64 = 1e-14;
/// Results in `[-NEGATIVE_CLAMP, 0)` are reported as zero.
pub const NEGATIVE_CLAMP: f64 = 1e-10;
/// Required agreement between the three evaluations, relative to `max(1, F)`.
pub const AGREEMENT_TOLERANCE: f64 = 1e-8;

/// `tanh(x) / x`, with `tanhc(0) = 1`.
pub fn tanhc(x: f64) -> f64 {
    if x.abs() < 1e-5 {
        let x2 = x * x;
        1.0 - x2 / 3.0 + 2.0 * x2 * x2 / 15.0
    } else {
        x.tanh() / x
    }
}

/// A probe state given by its spectral decomposition.
pub trait Probe {
    fn probabilities(&self) -> &[f64];
    /// Columns are the eigenvectors matching [`Probe::probabilities`].
    fn eigenvectors(&self) -> &ComplexMatrix;
    /// Pairs with `p_i + p_j` below this threshold are skipped.
    fn support_tolerance(&self) -> f64 {
        SUPPORT_TOLERANCE
    }
}

impl Probe for GibbsState {
    fn probabilities(&self) -> &[f64] {
        GibbsState::probabilities(self)
    }

    fn eigenvectors(&self) -> &ComplexMatrix {
        self.spectrum().eigenvectors()
    }

    // Gibbs states are full rank by construction.
    fn support_tolerance(&self) -> f64 {
        0.0
    }
}

/// An arbitrary mixed or pure probe.
#[derive(Clone, Debug)]
pub struct SpectralProbe {
    probabilities: Vec<f64>,
    eigenvectors: ComplexMatrix,
}

impl SpectralProbe {
    pub fn new(probabilities: Vec<f64>, eigenvectors: ComplexMatrix) -> Result<Self> {
        if probabilities.len() != eigenvectors.ncols()
            || eigenvectors.nrows() != eigenvectors.ncols()
        {
            return Err(QfiError::DimensionMismatch {
                left: probabilities.len(),
                right: eigenvectors.ncols(),
            });
        }
        if let Some((index, &value)) = probabilities
            .iter()
            .enumerate()
            .find(|(_, &p)| p < 0.0 || !p.is_finite())
        {
            return Err(QfiError::NegativeProbability { index, value });
        }
        let trace: f64 = probabilities.iter().sum();
        if (trace - 1.0).abs() > 1e-12 {
            return Err(QfiError::NotNormalized { trace });
        }
        Ok(SpectralProbe {
            probabilities,
            eigenvectors,
        })
    }

    /// Decomposes a density matrix. Eigenvalues in `[-1e-12, 0)` are set to zero.
    pub fn from_density(rho: &Hermitian) -> Result<Self> {
        let spectrum = eigendecompose(rho)?;
        let probabilities = spectrum
            .eigenvalues()
            .iter()
            .map(|&p| if (-1e-12..0.0).contains(&p) { 0.0 } else { p })
            .collect();
        SpectralProbe::new(probabilities, spectrum.eigenvectors().clone())
    }

    /// `|psi><psi|` for a normalized state vector.
    pub fn pure(state: &DVector<Complex64>) -> Result<Self> {
        let d = state.len();
        let norm = state.norm();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(QfiError::NotNormalized { trace: norm * norm });
        }
        // complete `state` to an orthonormal basis with Gram-Schmidt
        let mut basis: Vec<DVector<Complex64>> = vec![state.clone()];
        for k in 0..d {
            if basis.len() == d {
                break;
            }
            let mut v = DVector::<Complex64>::zeros(d);
            v[k] = Complex64::new(1.0, 0.0);
            for b in &basis {
                let overlap = b.dotc(&v);
                v -= b * overlap;
            }
            let n = v.norm();
            if n > 1e-8 {
                basis.push(v / Complex64::new(n, 0.0));
            }
        }
        let eigenvectors = ComplexMatrix::from_columns(&basis);
        let mut probabilities = vec![0.0; d];
        probabilities[0] = 1.0;
        SpectralProbe::new(probabilities, eigenvectors)
    }

    pub fn is_pure(&self) -> bool {
        self.probabilities
            .iter()
            .filter(|&&p| p > SUPPORT_TOLERANCE)
            .count()
            == 1
    }
}

impl Probe for SpectralProbe {
    fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    fn eigenvectors(&self) -> &ComplexMatrix {
        &self.eigenvectors
    }
}

fn generator_in_probe_basis<P: Probe + ?Sized>(probe: &P, h: &Hermitian) -> Result<ComplexMatrix> {
    let v = probe.eigenvectors();
    if v.nrows() != h.dim() {
        return Err(QfiError::DimensionMismatch {
            left: v.nrows(),
            right: h.dim(),
        });
    }
    Ok(v.adjoint() * h.matrix() * v)
}

fn clamp(f: f64) -> f64 {
    crate::operator::clamp_small_negative(f, NEGATIVE_CLAMP)
}

/// Spectral mixed-state form over the probe eigenbasis.
///
/// Near `beta = 0` its two sums cancel to `O(beta^2)`, so the relative
/// error grows like `eps / beta^2`; [`qfi_sld`] has no such cancellation.
pub fn qfi_general<P: Probe + ?Sized>(probe: &P, h: &Hermitian) -> Result<f64> {
    let hb = generator_in_probe_basis(probe, h)?;
    let p = probe.probabilities();
    let tol = probe.support_tolerance();
    let d = p.len();
    let mut acc = NeumaierSum::new();
    for i in 0..d {
        if p[i] <= tol / 2.0 {
            continue;
        }
        // <psi_i|h^2|psi_i> - <psi_i|h|psi_i>^2
        let second: f64 = (0..d).map(|k| hb[(i, k)].norm_sqr()).sum();
        let mean = hb[(i, i)].re;
        acc.add(4.0 * p[i] * (second - mean * mean));
    }
    for i in 0..d {
        for j in 0..d {
            if i == j {
                continue;
            }
            let s = p[i] + p[j];
            if s < tol || s == 0.0 {
                continue;
            }
            acc.add(-8.0 * p[i] * p[j] / s * hb[(i, j)].norm_sqr());
        }
    }
    Ok(clamp(acc.value()))
}

/// SLD form `sum_{i,j} 2 (p_i - p_j)^2 / (p_i + p_j) |h_ij|^2`.
pub fn qfi_sld<P: Probe + ?Sized>(probe: &P, h: &Hermitian) -> Result<f64> {
    let hb = generator_in_probe_basis(probe, h)?;
    let p = probe.probabilities();
    let tol = probe.support_tolerance();
    let d = p.len();
    let mut acc = NeumaierSum::new();
    for i in 0..d {
        for j in 0..d {
            let s = p[i] + p[j];
            if s < tol || s == 0.0 {
                continue;
            }
            let diff = p[i] - p[j];
            acc.add(2.0 * diff * diff / s * hb[(i, j)].norm_sqr());
        }
    }
    Ok(clamp(acc.value()))
}

/// Thermal commutator form for a Gibbs probe.
pub fn qfi_thermal(state: &GibbsState, h: &Hermitian) -> Result<f64> {
    qfi_thermal_with(state, h, tanhc)
}

/// [`qfi_thermal`] with a substitute for `tanhc`; used by mutation checks.
#[doc(hidden)]
pub fn qfi_thermal_with(
    state: &GibbsState,
    h: &Hermitian,
    tanhc_fn: fn(f64) -> f64,
) -> Result<f64> {
    let beta = state.beta();
    let c = commutator_i(state.hamiltonian(), h)?;
    let variance = state.variance(&c)?;
    let cb = state.spectrum().to_eigenbasis(c.matrix());
    let e = state.energies();
    // exp(-beta E_i) / Z, ground-shifted
    let w = state.probabilities();
    let d = state.dim();
    let mut correction = NeumaierSum::new();
    for i in 0..d {
        for j in 0..d {
            if i == j {
                continue;
            }
            let x = beta * (e[i] - e[j]) / 2.0;
            let tc = tanhc_fn(x);
            correction.add(w[i] * (1.0 - tc * tc) * cb[(i, j)].norm_sqr());
        }
    }
    let beta2 = beta * beta;
    Ok(clamp(beta2 * variance - beta2 * correction.value()))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QfiReport {
    pub f_general: f64,
    pub f_thermal: f64,
    pub f_sld: f64,
    /// Largest pairwise difference divided by `max(1, f_general)`.
    pub max_pairwise_rel_diff: f64,
    pub pure_state_flag: bool,
}

impl QfiReport {
    pub fn agrees(&self) -> bool {
        self.max_pairwise_rel_diff <= AGREEMENT_TOLERANCE
    }
}

pub fn qfi_report(state: &GibbsState, h: &Hermitian) -> Result<QfiReport> {
    let f_general = qfi_general(state, h)?;
    let f_thermal = qfi_thermal(state, h)?;
    let f_sld = qfi_sld(state, h)?;
    let scale = f_general.abs().max(1.0);
    let max_pairwise_rel_diff = [
        (f_general - f_thermal).abs(),
        (f_general - f_sld).abs(),
        (f_thermal - f_sld).abs(),
    ]
    .into_iter()
    .fold(0.0, f64::max)
        / scale;
    Ok(QfiReport {
        f_general,
        f_thermal,
        f_sld,
        max_pairwise_rel_diff,
        pure_state_flag: state.is_effectively_pure(),
    })
}
