//! Gibbs probe states `rho_0 = exp(-beta H) / Z`.
//!
//! Boltzmann weights are always formed relative to the ground energy, so
//! `exp(-beta (E_i - E_0)) <= 1` and nothing overflows however large
//! `beta` or the spectral width gets. Weights that underflow are floored
//! at [`PROBABILITY_FLOOR`] to keep the state full rank.

use num_complex::Complex64;

use crate::error::{QfiError, Result};
use crate::operator::{
    clamp_small_negative, eigendecompose, trace_product, ComplexMatrix, Hermitian, Spectrum,
};
use crate::spin::Spin;
use crate::sum::neumaier_sum;

pub const PROBABILITY_FLOOR: f64 = 1e-300;

#[derive(Clone, Debug)]
pub struct GibbsState {
    beta: f64,
    hamiltonian: Hermitian,
    spectrum: Spectrum,
    probabilities: Vec<f64>,
    log_partition_shifted: f64,
    effectively_pure: bool,
}

/// Thermal state of `h` at inverse temperature `beta` (`k_B = 1`).
pub fn gibbs_state(h: &Hermitian, beta: f64) -> Result<GibbsState> {
    GibbsState::from_spectrum(h.clone(), eigendecompose(h)?, beta)
}

impl GibbsState {
    /// Builds the state from an already computed eigendecomposition of `h`.
    pub fn from_spectrum(hamiltonian: Hermitian, spectrum: Spectrum, beta: f64) -> Result<Self> {
        if !beta.is_finite() {
            return Err(QfiError::invalid("beta", beta, "must be finite"));
        }
        if beta < 0.0 {
            return Err(QfiError::invalid(
                "beta",
                beta,
                "negative temperatures are not supported",
            ));
        }
        if hamiltonian.dim() != spectrum.dim() {
            return Err(QfiError::DimensionMismatch {
                left: hamiltonian.dim(),
                right: spectrum.dim(),
            });
        }
        let ground = spectrum.min();
        let weights: Vec<f64> = spectrum
            .eigenvalues()
            .iter()
            .map(|&e| (-beta * (e - ground)).exp())
            .collect();
        let total = neumaier_sum(weights.iter().copied());
        let raw: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let surviving = raw.iter().filter(|&&p| p >= PROBABILITY_FLOOR).count();
        let probabilities = raw.iter().map(|&p| p.max(PROBABILITY_FLOOR)).collect();
        Ok(GibbsState {
            beta,
            hamiltonian,
            spectrum,
            probabilities,
            log_partition_shifted: total.ln(),
            effectively_pure: surviving <= 1,
        })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn hamiltonian(&self) -> &Hermitian {
        &self.hamiltonian
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn energies(&self) -> &[f64] {
        self.spectrum.eigenvalues()
    }

    pub fn dim(&self) -> usize {
        self.probabilities.len()
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn ground_energy(&self) -> f64 {
        self.spectrum.min()
    }

    /// `ln sum_i exp(-beta (E_i - E_0))`.
    pub fn log_partition_shifted(&self) -> f64 {
        self.log_partition_shifted
    }

    /// `ln Z = -beta E_0 + ln sum_i exp(-beta (E_i - E_0))`.
    pub fn log_partition(&self) -> f64 {
        -self.beta * self.ground_energy() + self.log_partition_shifted
    }

    /// `Z`; may overflow to infinity where [`Self::log_partition`] does not.
    pub fn partition(&self) -> f64 {
        self.log_partition().exp()
    }

    /// True when every excited-state weight underflowed below the floor.
    pub fn is_effectively_pure(&self) -> bool {
        self.effectively_pure
    }

    pub fn purity(&self) -> f64 {
        neumaier_sum(self.probabilities.iter().map(|p| p * p))
    }

    pub fn density_matrix(&self) -> Hermitian {
        let p = &self.probabilities;
        let rho: ComplexMatrix = self
            .spectrum
            .map_eigenvalues_indexed(|i| Complex64::new(p[i], 0.0));
        Hermitian::symmetrize(rho).expect("density matrix is finite")
    }

    /// `Var[A]_rho0`, evaluated in the energy eigenbasis.
    pub fn variance(&self, a: &Hermitian) -> Result<f64> {
        if a.dim() != self.dim() {
            return Err(QfiError::DimensionMismatch {
                left: a.dim(),
                right: self.dim(),
            });
        }
        let ab = self.spectrum.to_eigenbasis(a.matrix());
        let p = &self.probabilities;
        let mean = neumaier_sum((0..self.dim()).map(|i| p[i] * ab[(i, i)].re));
        let second = neumaier_sum(
            (0..self.dim())
                .map(|i| p[i] * (0..self.dim()).map(|k| ab[(i, k)].norm_sqr()).sum::<f64>()),
        );
        Ok(clamp_small_negative(second - mean * mean, 1e-12))
    }

    /// `Tr[rho0 A]`.
    pub fn expectation(&self, a: &Hermitian) -> f64 {
        trace_product(self.density_matrix().matrix(), a.matrix()).re
    }
}

/// `P = tanh(beta / 2)`.
pub fn polarization(beta: f64) -> f64 {
    (beta / 2.0).tanh()
}

/// Inverse of [`polarization`] on `[0, 1)`.
pub fn beta_from_polarization(p: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&p) {
        return Err(QfiError::invalid("P", p, "polarization must lie in [0, 1)"));
    }
    Ok(2.0 * p.atanh())
}

/// `Z = sum_M exp(-beta M)` and `Z2 = sum_M M^2 exp(-beta M)` for
/// `H = J_z`, stored with the factor `exp(beta J)` pulled out.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PartitionMoments {
    /// `beta J`
    pub log_scale: f64,
    /// `sum_M exp(-beta (M + J))`
    pub z_shifted: f64,
    /// `sum_M M^2 exp(-beta (M + J))`
    pub z2_shifted: f64,
}

impl PartitionMoments {
    pub fn z(&self) -> f64 {
        self.log_scale.exp() * self.z_shifted
    }

    pub fn z2(&self) -> f64 {
        self.log_scale.exp() * self.z2_shifted
    }

    pub fn ln_z(&self) -> f64 {
        self.log_scale + self.z_shifted.ln()
    }

    /// `<M^2> = Z2 / Z`, finite for every `beta`.
    pub fn mean_square(&self) -> f64 {
        self.z2_shifted / self.z_shifted
    }
}

pub fn partition_moments(spin: Spin, beta: f64) -> Result<PartitionMoments> {
    if !beta.is_finite() || beta < 0.0 {
        return Err(QfiError::invalid(
            "beta",
            beta,
            "must be finite and non-negative",
        ));
    }
    let j = spin.j();
    let weights: Vec<(f64, f64)> = spin
        .m_values()
        .map(|m| (m, (-beta * (m + j)).exp()))
        .collect();
    Ok(PartitionMoments {
        log_scale: beta * j,
        z_shifted: neumaier_sum(weights.iter().map(|&(_, w)| w)),
        z2_shifted: neumaier_sum(weights.iter().map(|&(m, w)| m * m * w)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{commutator_i, variance};
    use crate::scenario::{random_hermitian, random_unitary};
    use crate::spin::spin_operators;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn jz(twice_j: u32) -> Hermitian {
        spin_operators(Spin::from_twice_j(twice_j).unwrap()).z
    }

    #[test]
    fn infinite_temperature_is_maximally_mixed() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for d in [2, 3, 7] {
            let s = gibbs_state(&random_hermitian(&mut rng, d), 0.0).unwrap();
            assert!(s.probabilities().iter().all(|&p| p == 1.0 / d as f64));
        }
    }

    #[test]
    fn negative_or_nan_beta_rejected() {
        assert!(gibbs_state(&jz(1), -0.1).is_err());
        assert!(gibbs_state(&jz(1), f64::NAN).is_err());
        assert!(gibbs_state(&jz(1), f64::INFINITY).is_err());
    }

    #[test]
    fn qubit_partition_function() {
        let s = gibbs_state(&jz(1), 2.0).unwrap();
        assert_relative_eq!(s.partition(), 2.0 * 1f64.cosh(), max_relative = 1e-14);
        assert_relative_eq!(s.partition(), 3.0861612696304874, max_relative = 1e-14);
    }

    #[test]
    fn spin_one_partition_matches_geometric_sum() {
        let s = gibbs_state(&jz(2), 1.0).unwrap();
        let direct = 1f64.exp() + 1.0 + (-1f64).exp();
        assert_relative_eq!(s.partition(), direct, max_relative = 1e-14);
        assert_relative_eq!(direct, 1.5f64.sinh() / 0.5f64.sinh(), max_relative = 1e-14);
    }

    #[test]
    fn probabilities_sum_to_one_and_decrease_with_energy() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for beta in [0.1, 1.0, 10.0] {
            let s = gibbs_state(&random_hermitian(&mut rng, 6), beta).unwrap();
            let total: f64 = s.probabilities().iter().sum();
            assert!((total - 1.0).abs() <= 1e-12);
            assert!(s.probabilities().windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn huge_beta_keeps_full_rank_and_flags_purity() {
        let s = gibbs_state(&jz(100), 700.0).unwrap();
        assert!(s.probabilities().iter().all(|&p| p >= PROBABILITY_FLOOR));
        assert!(s.is_effectively_pure());
        assert!(s.log_partition().is_finite());
        let warm = gibbs_state(&jz(100), 1.0).unwrap();
        assert!(!warm.is_effectively_pure());
    }

    #[test]
    fn commutes_with_hamiltonian() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let h = random_hermitian(&mut rng, 5);
        let rho = gibbs_state(&h, 1.3).unwrap().density_matrix();
        assert!(commutator_i(&rho, &h).unwrap().max_abs() <= 1e-10);
    }

    #[test]
    fn unitary_covariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let h = random_hermitian(&mut rng, 5);
        let u = random_unitary(&mut rng, 5);
        let rotated = h.conjugated_by(u.matrix()).unwrap();
        let lhs = gibbs_state(&rotated, 0.9).unwrap().density_matrix();
        let rhs = gibbs_state(&h, 0.9)
            .unwrap()
            .density_matrix()
            .conjugated_by(u.matrix())
            .unwrap();
        assert!(lhs.max_abs_diff(&rhs) <= 1e-10);
        assert_relative_eq!(
            gibbs_state(&rotated, 0.9).unwrap().log_partition(),
            gibbs_state(&h, 0.9).unwrap().log_partition(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn purity_monotone_in_beta() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let h = random_hermitian(&mut rng, 6);
        let spectrum = eigendecompose(&h).unwrap();
        let mut last = 0.0;
        for k in 0..60 {
            let beta = 0.25 * k as f64;
            let p = GibbsState::from_spectrum(h.clone(), spectrum.clone(), beta)
                .unwrap()
                .purity();
            assert!(p >= last - 1e-15);
            last = p;
        }
    }

    #[test]
    fn eigenbasis_variance_matches_dense_variance() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let h = random_hermitian(&mut rng, 5);
        let a = random_hermitian(&mut rng, 5);
        let s = gibbs_state(&h, 0.7).unwrap();
        assert_relative_eq!(
            s.variance(&a).unwrap(),
            variance(&a, &s.density_matrix()).unwrap(),
            max_relative = 1e-10
        );
    }

    #[test]
    fn jy_variance_matches_partition_moments() {
        for twice_j in 1..=12 {
            let spin = Spin::from_twice_j(twice_j).unwrap();
            let ops = spin_operators(spin);
            for beta in [0.1, 1.0, 4.0] {
                let s = gibbs_state(&ops.z, beta).unwrap();
                let pm = partition_moments(spin, beta).unwrap();
                let j = spin.j();
                let want = 0.5 * (j * (j + 1.0) - pm.z2() / pm.z());
                assert_relative_eq!(s.variance(&ops.y).unwrap(), want, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn partition_moment_examples() {
        for twice_j in 1..=9 {
            let spin = Spin::from_twice_j(twice_j).unwrap();
            let j = spin.j();
            let pm = partition_moments(spin, 0.0).unwrap();
            assert_relative_eq!(pm.z(), 2.0 * j + 1.0, max_relative = 1e-15);
            assert_relative_eq!(
                pm.z2(),
                j * (j + 1.0) * (2.0 * j + 1.0) / 3.0,
                max_relative = 1e-14
            );
        }
        let half = Spin::from_twice_j(1).unwrap();
        for beta in [0.0, 0.5, 3.0, 40.0] {
            let pm = partition_moments(half, beta).unwrap();
            assert_relative_eq!(pm.z2(), pm.z() / 4.0, max_relative = 1e-15);
        }
        let one = partition_moments(Spin::from_twice_j(2).unwrap(), 1.0).unwrap();
        assert_relative_eq!(one.z2(), 1f64.exp() + (-1f64).exp(), max_relative = 1e-14);
        let big = partition_moments(Spin::from_twice_j(200).unwrap(), 50.0).unwrap();
        assert!(big.ln_z().is_finite());
        assert!(big.mean_square().is_finite());
        assert!(big.z() >= 201.0 * (-50.0f64 * 100.0).exp());
    }

    #[test]
    fn polarization_values() {
        assert_eq!(polarization(0.0), 0.0);
        assert_abs_diff_eq!(polarization(2.0), 0.7615941559557649, epsilon = 1e-15);
        assert!(polarization(40.0) <= 1.0);
        let beta = beta_from_polarization(0.3).unwrap();
        assert_abs_diff_eq!(polarization(beta), 0.3, epsilon = 1e-15);
        assert!(beta_from_polarization(1.0).is_err());
        assert!(beta_from_polarization(-0.1).is_err());
    }
}
