//! Upper bounds on the thermal dynamic QFI and their ordering.
//!
//! With `C = i[H, h]` and `rho_0` the Gibbs state of `H`:
//!
//! ```text
//! F <= beta^2 Var[C] <= beta^2 ||C||^2 / 4 <= beta^2 t^2 ||H||^2 ||dH~/dlambda||^2 / 4
//! F <= sum_i 4 p_i Var[h]_i <= 4 Var[C] / gap^2 <= ||C||^2 / gap^2
//! ```
//!
//! `||.||` is the seminorm (spectral width) and `gap` the smallest
//! non-zero spacing of the spectrum of `H`.

use serde::Serialize;

use crate::error::{QfiError, Result};
use crate::generator::EncodingScheme;
use crate::operator::{commutator_i, eigendecompose, ComplexMatrix, Hermitian, Spectrum};
use crate::sum::NeumaierSum;
use crate::thermal::GibbsState;

/// Relative slack used for every ordering comparison.
pub const ORDERING_SLACK: f64 = 1e-9;
/// Spacings at or below this fraction of the spectral width count as degenerate.
pub const DEGENERACY_THRESHOLD: f64 = 1e-9;

/// `lhs <= rhs` up to [`ORDERING_SLACK`] relative to `max(1, |rhs|)`.
pub fn within(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs + ORDERING_SLACK * rhs.abs().max(1.0)
}

/// `C = i[H, h]` with the quantities every bound needs.
#[derive(Clone, Debug)]
pub struct ThermalCommutator {
    pub operator: Hermitian,
    /// `Var[C]_rho0`
    pub variance: f64,
    /// `||C||`
    pub seminorm: f64,
}

impl ThermalCommutator {
    pub fn new(state: &GibbsState, h: &Hermitian) -> Result<Self> {
        let operator = commutator_i(state.hamiltonian(), h)?;
        let variance = state.variance(&operator)?;
        let seminorm = eigendecompose(&operator)?.width();
        Ok(ThermalCommutator {
            operator,
            variance,
            seminorm,
        })
    }
}

/// `beta^2 Var[i[H, h]]_rho0`.
pub fn variance_bound(state: &GibbsState, h: &Hermitian) -> Result<f64> {
    let c = ThermalCommutator::new(state, h)?;
    Ok(state.beta().powi(2) * c.variance)
}

/// `beta^2 ||i[H, h]||^2 / 4`.
pub fn seminorm_bound(state: &GibbsState, h: &Hermitian) -> Result<f64> {
    let c = ThermalCommutator::new(state, h)?;
    Ok(state.beta().powi(2) * c.seminorm.powi(2) / 4.0)
}

/// `beta^2 t^2 ||H||^2 ||dH~/dlambda||^2 / 4`.
pub fn product_bound(
    hamiltonian: &Hermitian,
    derivative: &Hermitian,
    beta: f64,
    t: f64,
) -> Result<f64> {
    let h_norm = eigendecompose(hamiltonian)?.width();
    let d_norm = eigendecompose(derivative)?.width();
    Ok((beta * t * h_norm * d_norm).powi(2) / 4.0)
}

/// [`product_bound`] for an encoding scheme; numeric unitaries have no
/// Hamiltonian derivative and are rejected.
pub fn product_bound_for(state: &GibbsState, encoding: &EncodingScheme) -> Result<f64> {
    match (encoding.hamiltonian_derivative(), encoding.time()) {
        (Some(derivative), Some(t)) => {
            let d_norm = eigendecompose(derivative)?.width();
            Ok((state.beta() * t * state.spectrum().width() * d_norm).powi(2) / 4.0)
        }
        _ => Err(QfiError::UnsupportedEncoding(encoding.kind())),
    }
}

/// Smallest `|E_i - E_j|` above `DEGENERACY_THRESHOLD * ||H||`.
pub fn min_gap(spectrum: &Spectrum) -> Result<f64> {
    let e = spectrum.eigenvalues();
    let threshold = DEGENERACY_THRESHOLD * spectrum.width();
    let mut gap = f64::INFINITY;
    for i in 0..e.len() {
        for j in i + 1..e.len() {
            let d = (e[j] - e[i]).abs();
            if d > threshold && d < gap {
                gap = d;
            }
        }
    }
    if gap.is_finite() {
        Ok(gap)
    } else {
        Err(QfiError::FullyDegenerate)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GapBounds {
    /// `sum_i 4 p_i Var[h]_i`
    pub convexity_bound: f64,
    /// `4 Var[i[H, h]]_rho0 / gap^2`
    pub gap_variance_bound: f64,
    /// `||i[H, h]||^2 / gap^2`
    pub gap_seminorm_bound: f64,
    pub min_gap: f64,
}

/// Blocks of consecutive eigenvalues closer than the degeneracy threshold.
fn degenerate_blocks(spectrum: &Spectrum) -> Vec<std::ops::Range<usize>> {
    let e = spectrum.eigenvalues();
    let threshold = DEGENERACY_THRESHOLD * spectrum.width();
    let mut blocks = Vec::new();
    let mut start = 0;
    for k in 1..=e.len() {
        if k == e.len() || e[k] - e[k - 1] > threshold {
            blocks.push(start..k);
            start = k;
        }
    }
    blocks
}

/// `sum_i 4 p_i Var[h]_{psi_i}` over the probe eigenbasis.
///
/// Inside a degenerate energy block the eigenbasis is not unique and the
/// sum depends on the choice; the block is rotated to diagonalize `h`
/// there, which gives the smallest value over all valid choices.
pub fn convexity_bound(state: &GibbsState, h: &Hermitian) -> Result<f64> {
    let spectrum = state.spectrum();
    let hb = spectrum.to_eigenbasis(h.matrix());
    let hb2 = &hb * &hb;
    let p = state.probabilities();
    let mut acc = NeumaierSum::new();
    for block in degenerate_blocks(spectrum) {
        if block.len() == 1 {
            let i = block.start;
            let mean = hb[(i, i)].re;
            acc.add(4.0 * p[i] * (hb2[(i, i)].re - mean * mean));
            continue;
        }
        let n = block.len();
        let sub = ComplexMatrix::from_fn(n, n, |r, c| hb[(block.start + r, block.start + c)]);
        let sub2 = ComplexMatrix::from_fn(n, n, |r, c| hb2[(block.start + r, block.start + c)]);
        let local = eigendecompose(&Hermitian::symmetrize(sub)?)?;
        let w = local.eigenvectors();
        let rotated2 = w.adjoint() * sub2 * w;
        for k in 0..n {
            let weight: f64 = (0..n)
                .map(|r| w[(r, k)].norm_sqr() * p[block.start + r])
                .sum();
            let mean = local.eigenvalues()[k];
            acc.add(4.0 * weight * (rotated2[(k, k)].re - mean * mean));
        }
    }
    Ok(acc.value().max(0.0))
}

pub fn gap_bounds(state: &GibbsState, h: &Hermitian) -> Result<GapBounds> {
    let c = ThermalCommutator::new(state, h)?;
    gap_bounds_with(state, h, &c)
}

fn gap_bounds_with(state: &GibbsState, h: &Hermitian, c: &ThermalCommutator) -> Result<GapBounds> {
    let gap = min_gap(state.spectrum())?;
    Ok(GapBounds {
        convexity_bound: convexity_bound(state, h)?,
        gap_variance_bound: 4.0 * c.variance / (gap * gap),
        gap_seminorm_bound: c.seminorm.powi(2) / (gap * gap),
        min_gap: gap,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub f: f64,
    pub variance_bound: f64,
    pub seminorm_bound: f64,
    pub product_bound: Option<f64>,
    pub convexity_bound: f64,
    pub gap_variance_bound: f64,
    pub gap_seminorm_bound: f64,
    pub min_gap: f64,
    /// `c = ||i[H, h]||`
    pub noncommutativity: f64,
    pub ordering_ok: bool,
}

impl BoundReport {
    /// The individual ordering checks, by name.
    pub fn ordering_checks(&self) -> Vec<(&'static str, bool)> {
        let mut checks = vec![
            ("F <= variance_bound", within(self.f, self.variance_bound)),
            ("F <= seminorm_bound", within(self.f, self.seminorm_bound)),
            ("F <= convexity_bound", within(self.f, self.convexity_bound)),
            (
                "F <= gap_variance_bound",
                within(self.f, self.gap_variance_bound),
            ),
            (
                "F <= gap_seminorm_bound",
                within(self.f, self.gap_seminorm_bound),
            ),
            (
                "variance_bound <= seminorm_bound",
                within(self.variance_bound, self.seminorm_bound),
            ),
            (
                "convexity_bound <= gap_variance_bound",
                within(self.convexity_bound, self.gap_variance_bound),
            ),
            (
                "gap_variance_bound <= gap_seminorm_bound",
                within(self.gap_variance_bound, self.gap_seminorm_bound),
            ),
        ];
        if let Some(product) = self.product_bound {
            checks.push(("F <= product_bound", within(self.f, product)));
            checks.push((
                "seminorm_bound <= product_bound",
                within(self.seminorm_bound, product),
            ));
        }
        checks
    }

    pub fn failed_checks(&self) -> Vec<&'static str> {
        self.ordering_checks()
            .into_iter()
            .filter(|(_, ok)| !ok)
            .map(|(name, _)| name)
            .collect()
    }
}

/// Every bound next to the QFI `f` of the same scenario.
pub fn bound_report(
    state: &GibbsState,
    encoding: &EncodingScheme,
    h: &Hermitian,
    f: f64,
) -> Result<BoundReport> {
    let c = ThermalCommutator::new(state, h)?;
    let beta2 = state.beta().powi(2);
    let gaps = gap_bounds_with(state, h, &c)?;
    let product = match product_bound_for(state, encoding) {
        Ok(v) => Some(v),
        Err(QfiError::UnsupportedEncoding(_)) => None,
        Err(e) => return Err(e),
    };
    let mut report = BoundReport {
        f,
        variance_bound: beta2 * c.variance,
        seminorm_bound: beta2 * c.seminorm.powi(2) / 4.0,
        product_bound: product,
        convexity_bound: gaps.convexity_bound,
        gap_variance_bound: gaps.gap_variance_bound,
        gap_seminorm_bound: gaps.gap_seminorm_bound,
        min_gap: gaps.min_gap,
        noncommutativity: c.seminorm,
        ordering_ok: false,
    };
    report.ordering_ok = report.ordering_checks().iter().all(|(_, ok)| *ok);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::generator_explicit;
    use crate::qfi::qfi_general;
    use crate::scenario::random_hermitian;
    use crate::spin::{oat_commutator, spin_operators, Spin};
    use crate::thermal::gibbs_state;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn spin(twice_j: u32) -> Spin {
        Spin::from_twice_j(twice_j).unwrap()
    }

    #[test]
    fn qubit_linear_bounds() {
        let o = spin_operators(spin(1));
        for (beta, t) in [(0.4, 1.0), (2.0, 2.5)] {
            let s = gibbs_state(&o.z, beta).unwrap();
            let h = o.x.scaled(t);
            assert_relative_eq!(
                variance_bound(&s, &h).unwrap(),
                beta * beta * t * t / 4.0,
                max_relative = 1e-12
            );
            let g = gap_bounds(&s, &h).unwrap();
            assert_relative_eq!(g.gap_seminorm_bound, t * t, max_relative = 1e-12);
            assert_eq!(g.min_gap, 1.0);
            let f = qfi_general(&s, &h).unwrap();
            assert!(f <= g.gap_seminorm_bound);
        }
    }

    #[test]
    fn linear_seminorm_bound_uses_jy() {
        for twice_j in [2, 5, 10] {
            let s_ = spin(twice_j);
            let o = spin_operators(s_);
            let (beta, t) = (1.3, 0.7);
            let s = gibbs_state(&o.z, beta).unwrap();
            let want = beta * beta * t * t * (2.0 * s_.j()).powi(2) / 4.0;
            assert_relative_eq!(
                seminorm_bound(&s, &o.x.scaled(t)).unwrap(),
                want,
                max_relative = 1e-12
            );
            assert_relative_eq!(
                product_bound(&o.z, &o.x, beta, t).unwrap(),
                4.0 * beta * beta * t * t * s_.j().powi(4),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn oat_spin_one_bounds() {
        let o = spin_operators(spin(2));
        let (beta, t) = (0.9, 1.0);
        let s = gibbs_state(&o.z, beta).unwrap();
        let h = o.x.square().scaled(t);
        assert_relative_eq!(
            seminorm_bound(&s, &h).unwrap(),
            beta * beta * t * t,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            gap_bounds(&s, &h).unwrap().gap_seminorm_bound,
            4.0,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            oat_commutator(spin(2)).seminorm().unwrap(),
            2.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn oat_product_bound_integer_spin() {
        for twice_j in [2u32, 4, 6, 10] {
            let j = f64::from(twice_j) / 2.0;
            let o = spin_operators(spin(twice_j));
            let (beta, t) = (0.6, 1.4);
            assert_relative_eq!(
                product_bound(&o.z, &o.x.square(), beta, t).unwrap(),
                beta * beta * t * t * j.powi(6),
                max_relative = 1e-10
            );
        }
    }

    #[test]
    fn zero_time_and_identity_generator() {
        let o = spin_operators(spin(4));
        assert_eq!(product_bound(&o.z, &o.x, 1.0, 0.0).unwrap(), 0.0);
        let s = gibbs_state(&o.z, 1.0).unwrap();
        assert_eq!(seminorm_bound(&s, &Hermitian::identity(5)).unwrap(), 0.0);
    }

    #[test]
    fn numeric_unitary_has_no_product_bound() {
        let o = spin_operators(spin(2));
        let s = gibbs_state(&o.z, 1.0).unwrap();
        let u: crate::generator::UnitaryFn =
            std::sync::Arc::new(|_| crate::operator::Unitary::new(ComplexMatrix::identity(3, 3)));
        let enc = EncodingScheme::numeric_unitary(u, 0.0, 1e-4).unwrap();
        assert_eq!(
            product_bound_for(&s, &enc),
            Err(QfiError::UnsupportedEncoding("numeric-unitary"))
        );
        let r = bound_report(&s, &enc, &o.x, 0.0).unwrap();
        assert_eq!(r.product_bound, None);
    }

    #[test]
    fn gap_of_jz_is_one() {
        for twice_j in 1..=10 {
            let o = spin_operators(spin(twice_j));
            assert_abs_diff_eq!(
                min_gap(&eigendecompose(&o.z).unwrap()).unwrap(),
                1.0,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn fully_degenerate_hamiltonian_rejected() {
        let s = gibbs_state(&Hermitian::identity(3).scaled(2.0), 1.0).unwrap();
        assert_eq!(
            gap_bounds(&s, &Hermitian::identity(3)),
            Err(QfiError::FullyDegenerate)
        );
    }

    #[test]
    fn degenerate_block_convexity_is_basis_independent() {
        // H = diag(0, 0, 1) with a generator that mixes the degenerate pair
        let hm = Hermitian::from_real_diagonal(&[0.0, 0.0, 1.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let h = random_hermitian(&mut rng, 3);
        let s = gibbs_state(&hm, 1.2).unwrap();
        let g = gap_bounds(&s, &h).unwrap();
        let f = qfi_general(&s, &h).unwrap();
        assert!(within(f, g.convexity_bound));
        assert!(within(g.convexity_bound, g.gap_variance_bound));
    }

    #[test]
    fn random_chain_holds() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..300 {
            let d = rng.random_range(2..=8);
            let hm = random_hermitian(&mut rng, d);
            let a = random_hermitian(&mut rng, d);
            let t = rng.random_range(0.1..3.0);
            let beta = rng.random_range(0.05..10.0);
            let s = gibbs_state(&hm, beta).unwrap();
            let enc = EncodingScheme::explicit(a.clone(), t).unwrap();
            let h = generator_explicit(&a, t).h;
            let f = qfi_general(&s, &h).unwrap();
            let r = bound_report(&s, &enc, &h, f).unwrap();
            assert!(r.ordering_ok, "{:?}: {:?}", r.failed_checks(), r);
        }
    }

    #[test]
    fn no_noncommutativity_no_information() {
        let o = spin_operators(spin(6));
        let s = gibbs_state(&o.z, 2.0).unwrap();
        let enc = EncodingScheme::explicit(o.z.clone(), 1.0).unwrap();
        let f = qfi_general(&s, &o.z).unwrap();
        let r = bound_report(&s, &enc, &o.z, f).unwrap();
        assert_eq!(r.noncommutativity, 0.0);
        assert!(r.f <= 1e-12);
        assert!(r.ordering_ok);
    }
}
