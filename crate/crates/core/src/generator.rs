//! Encoding unitaries and the transformed local generator
//! `h = i U^dagger dU/dlambda`.
//!
//! The canonical convention is `U = exp(-i H t)`. Three routes to `h`
//! are provided and cross-checked in the tests:
//!
//! * explicit: `U = exp(-i lambda A t)` gives `h = t A`;
//! * integral: `h = int_0^t exp(i H s) V exp(-i H s) ds` evaluated in the
//!   eigenbasis of `H`, with `V = dH/dlambda`;
//! * finite difference: a central difference of any unitary family.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{QfiError, Result};
use crate::operator::{eigendecompose, unitary_evolution, ComplexMatrix, Hermitian, Unitary};

pub type HamiltonianFn = Arc<dyn Fn(f64) -> Result<Hermitian> + Send + Sync>;
pub type UnitaryFn = Arc<dyn Fn(f64) -> Result<Unitary> + Send + Sync>;

pub const MAX_FD_STEP: f64 = 1e-2;

/// How the parameter `lambda` enters the evolution.
#[derive(Clone)]
pub enum EncodingScheme {
    /// `U = exp(-i lambda A t)`.
    ExplicitGenerator { generator: Hermitian, t: f64 },
    /// `U = exp(-i H(lambda) t)` with a `lambda`-independent derivative.
    HamiltonianFamily {
        hamiltonian: HamiltonianFn,
        derivative: Hermitian,
        lambda: f64,
        t: f64,
    },
    /// Any unitary-valued function of `lambda`.
    NumericUnitary {
        unitary: UnitaryFn,
        lambda: f64,
        fd_step: f64,
    },
}

impl fmt::Debug for EncodingScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EncodingScheme::ExplicitGenerator { generator, t } => f
                .debug_struct("ExplicitGenerator")
                .field("dim", &generator.dim())
                .field("t", t)
                .finish(),
            EncodingScheme::HamiltonianFamily {
                derivative,
                lambda,
                t,
                ..
            } => f
                .debug_struct("HamiltonianFamily")
                .field("dim", &derivative.dim())
                .field("lambda", lambda)
                .field("t", t)
                .finish(),
            EncodingScheme::NumericUnitary {
                lambda, fd_step, ..
            } => f
                .debug_struct("NumericUnitary")
                .field("lambda", lambda)
                .field("fd_step", fd_step)
                .finish(),
        }
    }
}

fn check_time(t: f64) -> Result<()> {
    if !t.is_finite() || t < 0.0 {
        return Err(QfiError::invalid(
            "t",
            t,
            "evolution time must be finite and non-negative",
        ));
    }
    Ok(())
}

impl EncodingScheme {
    pub fn explicit(generator: Hermitian, t: f64) -> Result<Self> {
        check_time(t)?;
        Ok(EncodingScheme::ExplicitGenerator { generator, t })
    }

    pub fn hamiltonian_family(
        hamiltonian: HamiltonianFn,
        derivative: Hermitian,
        lambda: f64,
        t: f64,
    ) -> Result<Self> {
        check_time(t)?;
        if !lambda.is_finite() {
            return Err(QfiError::invalid("lambda", lambda, "must be finite"));
        }
        let h = hamiltonian(lambda)?;
        if h.dim() != derivative.dim() {
            return Err(QfiError::DimensionMismatch {
                left: h.dim(),
                right: derivative.dim(),
            });
        }
        Ok(EncodingScheme::HamiltonianFamily {
            hamiltonian,
            derivative,
            lambda,
            t,
        })
    }

    pub fn numeric_unitary(unitary: UnitaryFn, lambda: f64, fd_step: f64) -> Result<Self> {
        if !(fd_step > 0.0 && fd_step <= MAX_FD_STEP) {
            return Err(QfiError::invalid(
                "fd_step",
                fd_step,
                "must lie in (0, 1e-2]",
            ));
        }
        if !lambda.is_finite() {
            return Err(QfiError::invalid("lambda", lambda, "must be finite"));
        }
        Ok(EncodingScheme::NumericUnitary {
            unitary,
            lambda,
            fd_step,
        })
    }

    /// Evolution time, when the scheme has one.
    pub fn time(&self) -> Option<f64> {
        match self {
            EncodingScheme::ExplicitGenerator { t, .. }
            | EncodingScheme::HamiltonianFamily { t, .. } => Some(*t),
            EncodingScheme::NumericUnitary { .. } => None,
        }
    }

    /// `dH/dlambda` of the encoding Hamiltonian, when the scheme has one.
    pub fn hamiltonian_derivative(&self) -> Option<&Hermitian> {
        match self {
            EncodingScheme::ExplicitGenerator { generator, .. } => Some(generator),
            EncodingScheme::HamiltonianFamily { derivative, .. } => Some(derivative),
            EncodingScheme::NumericUnitary { .. } => None,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            EncodingScheme::ExplicitGenerator { .. } => "explicit-generator",
            EncodingScheme::HamiltonianFamily { .. } => "hamiltonian-family",
            EncodingScheme::NumericUnitary { .. } => "numeric-unitary",
        }
    }

    /// The generator by the route natural to this scheme.
    pub fn generator(&self) -> Result<LocalGenerator> {
        match self {
            EncodingScheme::ExplicitGenerator { generator, t } => {
                Ok(generator_explicit(generator, *t))
            }
            EncodingScheme::HamiltonianFamily {
                hamiltonian,
                derivative,
                lambda,
                t,
            } => generator_integral(&hamiltonian(*lambda)?, derivative, *t),
            EncodingScheme::NumericUnitary {
                unitary,
                lambda,
                fd_step,
            } => generator_fd(unitary.as_ref(), *lambda, *fd_step),
        }
    }
}

/// `lambda -> exp(-i sign H(lambda) t)` for use with [`generator_fd`].
/// `sign = -1` gives the opposite convention `exp(+i H t)`.
pub fn family_unitary(hamiltonian: HamiltonianFn, t: f64, sign: f64) -> UnitaryFn {
    Arc::new(move |lambda| unitary_evolution(&hamiltonian(lambda)?, sign * t))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GeneratorMethod {
    Explicit,
    Integral,
    FiniteDifference,
}

#[derive(Clone, Debug)]
pub struct LocalGenerator {
    pub h: Hermitian,
    pub method: GeneratorMethod,
}

pub fn generator_explicit(a: &Hermitian, t: f64) -> LocalGenerator {
    LocalGenerator {
        h: a.scaled(t),
        method: GeneratorMethod::Explicit,
    }
}

/// `kappa(delta, t) = int_0^t exp(i delta s) ds = (exp(i delta t) - 1) / (i delta)`.
pub fn kappa(delta: f64, t: f64) -> Complex64 {
    let x = delta * t;
    if x.abs() < 1e-9 {
        // t (1 + i x / 2), truncation O(t x^2)
        return Complex64::new(t, t * x / 2.0);
    }
    let half = (x / 2.0).sin();
    Complex64::new(x.sin() / delta, 2.0 * half * half / delta)
}

/// `h_mn = V_mn kappa(E_m - E_n, t)` in the eigenbasis of `H(lambda)`.
pub fn generator_integral(
    hamiltonian: &Hermitian,
    derivative: &Hermitian,
    t: f64,
) -> Result<LocalGenerator> {
    check_time(t)?;
    if hamiltonian.dim() != derivative.dim() {
        return Err(QfiError::DimensionMismatch {
            left: hamiltonian.dim(),
            right: derivative.dim(),
        });
    }
    let spectrum = eigendecompose(hamiltonian)?;
    let degenerate = 1e-12 * spectrum.width();
    let e = spectrum.eigenvalues();
    let v = spectrum.to_eigenbasis(derivative.matrix());
    let d = spectrum.dim();
    let hb = ComplexMatrix::from_fn(d, d, |m, n| {
        let delta = e[m] - e[n];
        let k = if delta.abs() < degenerate {
            Complex64::new(t, 0.0)
        } else {
            kappa(delta, t)
        };
        v[(m, n)] * k
    });
    Ok(LocalGenerator {
        h: Hermitian::symmetrize(spectrum.from_eigenbasis(&hb))?,
        method: GeneratorMethod::Integral,
    })
}

/// Central difference `i U(lambda)^dagger (U(lambda + d) - U(lambda - d)) / (2 d)`.
pub fn generator_fd(
    unitary: &(dyn Fn(f64) -> Result<Unitary> + Send + Sync),
    lambda: f64,
    fd_step: f64,
) -> Result<LocalGenerator> {
    if !(fd_step > 0.0 && fd_step <= MAX_FD_STEP) {
        return Err(QfiError::invalid(
            "fd_step",
            fd_step,
            "must lie in (0, 1e-2]",
        ));
    }
    let u0 = unitary(lambda)?;
    let up = unitary(lambda + fd_step)?;
    let um = unitary(lambda - fd_step)?;
    let diff = (up.matrix() - um.matrix()).scale(1.0 / (2.0 * fd_step));
    let raw = u0.matrix().adjoint() * diff * Complex64::new(0.0, 1.0);
    let residue = (&raw - raw.adjoint())
        .iter()
        .fold(0.0f64, |a, z| a.max(z.norm()))
        / 2.0;
    log::debug!(
        "finite-difference generator: anti-Hermitian residue {residue:e} at step {fd_step:e}"
    );
    Ok(LocalGenerator {
        h: Hermitian::hermitian_part_of(raw)?,
        method: GeneratorMethod::FiniteDifference,
    })
}

#[cfg(test)]
#[allow(clippy::approx_constant)]
mod tests {
    use super::*;
    use crate::operator::seminorm;
    use crate::scenario::random_hermitian;
    use crate::spin::{spin_operators, Spin};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ops(twice_j: u32) -> crate::spin::SpinOperators {
        spin_operators(Spin::from_twice_j(twice_j).unwrap())
    }

    fn rel_diff(a: &Hermitian, b: &Hermitian) -> f64 {
        a.max_abs_diff(b) / b.max_abs().max(1e-300)
    }

    fn lmg(twice_j: u32) -> (HamiltonianFn, Hermitian) {
        let o = ops(twice_j);
        let x2 = o.x.square();
        let z = o.z.clone();
        let family: HamiltonianFn = Arc::new(move |lambda| x2.add(&z.scaled(lambda)));
        (family, o.z)
    }

    #[test]
    fn explicit_examples() {
        let o = ops(3);
        let g = generator_explicit(&o.x, 2.0);
        assert_eq!(g.h, o.x.scaled(2.0));
        assert_eq!(g.method, GeneratorMethod::Explicit);
        assert_eq!(generator_explicit(&o.x.square(), 1.0).h, o.x.square());
        assert_eq!(generator_explicit(&o.x, 0.0).h.max_abs(), 0.0);
    }

    #[test]
    fn kappa_limits() {
        assert_eq!(kappa(0.0, 2.5), Complex64::new(2.5, 0.0));
        // hermiticity of the kernel
        let k1 = kappa(0.7, 1.3);
        let k2 = kappa(-0.7, 1.3);
        assert_abs_diff_eq!(k1.re, k2.re, epsilon = 1e-15);
        assert_abs_diff_eq!(k1.im, -k2.im, epsilon = 1e-15);
        // both branches agree with t (1 + i x / 2) around the switch
        for delta in [0.999e-9, 1.001e-9] {
            let k = kappa(delta, 1.0);
            assert_abs_diff_eq!(k.re, 1.0, epsilon = 1e-15);
            assert_abs_diff_eq!(k.im, delta / 2.0, epsilon = 1e-22);
        }
    }

    #[test]
    fn kappa_matches_quadrature() {
        for &(delta, t) in &[(0.3, 2.0), (-4.0, 3.14), (17.0, 0.5)] {
            let n = 20_000;
            let ds = t / n as f64;
            // Simpson's rule on exp(i delta s)
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..=n {
                let w = if k == 0 || k == n {
                    1.0
                } else if k % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                acc += Complex64::new(0.0, delta * k as f64 * ds).exp() * w;
            }
            acc *= ds / 3.0;
            let k = kappa(delta, t);
            assert_abs_diff_eq!(k.re, acc.re, epsilon = 1e-10);
            assert_abs_diff_eq!(k.im, acc.im, epsilon = 1e-10);
        }
    }

    #[test]
    fn integral_commuting_case_is_t_times_derivative() {
        let o = ops(4);
        let h = generator_integral(&o.z.scaled(0.8), &o.z, 1.7).unwrap();
        assert!(h.h.max_abs_diff(&o.z.scaled(1.7)) <= 1e-12);
    }

    #[test]
    fn integral_matches_fd_on_lmg() {
        let (family, v) = lmg(2);
        let h_int = generator_integral(&family(1.0).unwrap(), &v, 1.0).unwrap();
        let u = family_unitary(family, 1.0, 1.0);
        let h_fd = generator_fd(u.as_ref(), 1.0, 1e-5).unwrap();
        assert!(rel_diff(&h_fd.h, &h_int.h) <= 1e-5);

        let (family, v) = lmg(4);
        let h_int = generator_integral(&family(0.5).unwrap(), &v, 3.14).unwrap();
        let u = family_unitary(family, 3.14, 1.0);
        let h_fd = generator_fd(u.as_ref(), 0.5, 1e-5).unwrap();
        assert!(rel_diff(&h_fd.h, &h_int.h) <= 1e-5);
    }

    #[test]
    fn fd_of_explicit_rotation() {
        let o = ops(5);
        let x = o.x.clone();
        let t = 1.3;
        let u: UnitaryFn = Arc::new(move |lambda| unitary_evolution(&x, lambda * t));
        let h = generator_fd(u.as_ref(), 0.4, 1e-5).unwrap();
        assert!(rel_diff(&h.h, &o.x.scaled(t)) <= 1e-8);
    }

    #[test]
    fn fd_of_constant_unitary_is_zero() {
        let o = ops(3);
        let fixed = unitary_evolution(&o.y, 0.9).unwrap();
        let u: UnitaryFn = Arc::new(move |_| Ok(fixed.clone()));
        assert!(generator_fd(u.as_ref(), 0.0, 1e-5).unwrap().h.max_abs() <= 1e-10);
    }

    #[test]
    fn fd_rejects_bad_step_and_non_unitary() {
        let u: UnitaryFn = Arc::new(|_| Ok(Unitary::new(ComplexMatrix::identity(2, 2)).unwrap()));
        assert!(generator_fd(u.as_ref(), 0.0, 0.0).is_err());
        assert!(generator_fd(u.as_ref(), 0.0, 0.1).is_err());
        assert!(EncodingScheme::numeric_unitary(u, 0.0, 1e-3).is_ok());
        let bad: UnitaryFn = Arc::new(|_| Unitary::new(ComplexMatrix::identity(2, 2).scale(2.0)));
        assert!(matches!(
            generator_fd(bad.as_ref(), 0.0, 1e-4),
            Err(QfiError::NotUnitary { .. })
        ));
    }

    #[test]
    fn opposite_sign_convention_on_real_family() {
        // H(lambda) is real here, so exp(+iHt) = conj(exp(-iHt)) and the
        // generator becomes -conj(h): same |h_mn|, negated spectrum.
        let (family, v) = lmg(4);
        let h_int = generator_integral(&family(0.5).unwrap(), &v, 2.0).unwrap();
        let u = family_unitary(family, 2.0, -1.0);
        let h_fd = generator_fd(u.as_ref(), 0.5, 1e-5).unwrap();
        let flipped = Hermitian::new(h_fd.h.matrix().map(|z| -z.conj())).unwrap();
        assert!(rel_diff(&flipped, &h_int.h) <= 1e-5);
        let a = eigendecompose(&h_fd.h).unwrap();
        let b = eigendecompose(&h_int.h).unwrap();
        for (x, y) in a.eigenvalues().iter().zip(b.eigenvalues().iter().rev()) {
            assert_abs_diff_eq!(*x, -*y, epsilon = 1e-6);
        }
    }

    #[test]
    fn seminorm_grows_at_most_linearly_in_time() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..50 {
            let d = rng.random_range(2..=7);
            let h0 = random_hermitian(&mut rng, d);
            let v = random_hermitian(&mut rng, d);
            let lambda: f64 = rng.random_range(-2.0..2.0);
            let t: f64 = rng.random_range(0.0..5.0);
            let h = h0.add(&v.scaled(lambda)).unwrap();
            let g = generator_integral(&h, &v, t).unwrap();
            assert!(seminorm(&g.h).unwrap() <= t * seminorm(&v).unwrap() + 1e-8);
        }
    }

    #[test]
    fn scheme_constructors_validate() {
        let o = ops(2);
        assert!(EncodingScheme::explicit(o.x.clone(), -1.0).is_err());
        let (family, v) = lmg(2);
        assert!(
            EncodingScheme::hamiltonian_family(family.clone(), v.clone(), 0.3, f64::NAN).is_err()
        );
        let s = EncodingScheme::hamiltonian_family(family, v, 0.3, 1.0).unwrap();
        assert_eq!(s.time(), Some(1.0));
        assert_eq!(s.generator().unwrap().method, GeneratorMethod::Integral);
        assert_eq!(s.kind(), "hamiltonian-family");
    }
}
