//! The three worked spin models with their closed-form results.
//!
//! All three use the probe `rho_0 = exp(-beta J_z) / Z`:
//!
//! * linear: `U = exp(-i lambda t J_axis)`, so `h = t J_axis`;
//! * one-axis twisting (OAT): `U = exp(-i lambda t J_x^2)`, so `h = t J_x^2`;
//! * LMG: `U = exp(-i (J_x^2 + lambda J_z) t)`, numeric only.
//!
//! Hyperbolic ratios such as `sinh(a) / sinh(b)` are evaluated as
//! `exp(ln sinh a - ln sinh b)` so large `beta J` cannot overflow.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{QfiError, Result};
use crate::generator::{
    family_unitary, generator_fd, EncodingScheme, HamiltonianFn, LocalGenerator,
};
use crate::operator::{eigendecompose, Hermitian};
use crate::scenario::Scenario;
use crate::spin::{spin_operators, Spin};
use crate::thermal::partition_moments;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        })
    }
}

/// `ln sinh x` for `x >= 0`; `-inf` at zero.
fn ln_sinh(x: f64) -> f64 {
    if x > 20.0 {
        x - std::f64::consts::LN_2 + (-(-2.0 * x).exp()).ln_1p()
    } else {
        x.sinh().ln()
    }
}

/// `ln cosh x`.
fn ln_cosh(x: f64) -> f64 {
    let a = x.abs();
    a - std::f64::consts::LN_2 + (-2.0 * a).exp().ln_1p()
}

/// `sinh(x) / x - 1`, accurate near zero.
fn sinhc_minus_one(x: f64) -> f64 {
    if x.abs() < 0.05 {
        let x2 = x * x;
        x2 / 6.0 + x2 * x2 / 120.0 + x2 * x2 * x2 / 5040.0 + x2 * x2 * x2 * x2 / 362880.0
    } else {
        x.sinh() / x - 1.0
    }
}

/// `x coth x - 1`, accurate near zero.
fn xcoth_minus_one(x: f64) -> f64 {
    if x.abs() < 0.05 {
        let x2 = x * x;
        x2 / 3.0 - x2 * x2 / 45.0 + 2.0 * x2 * x2 * x2 / 945.0 - x2 * x2 * x2 * x2 / 4725.0
    } else {
        x / x.tanh() - 1.0
    }
}

fn check_beta_t(beta: f64, t: f64) -> Result<()> {
    if !beta.is_finite() || beta < 0.0 {
        return Err(QfiError::invalid(
            "beta",
            beta,
            "must be finite and non-negative",
        ));
    }
    if !t.is_finite() || t < 0.0 {
        return Err(QfiError::invalid("t", t, "must be finite and non-negative"));
    }
    Ok(())
}

fn jz_probe(spin: Spin, beta: f64, encoding: EncodingScheme) -> Result<Scenario> {
    let jz = spin_operators(spin).z;
    let spectrum = eigendecompose(&jz)?;
    let mut scenario = Scenario::new(jz, beta, encoding);
    scenario.probe_spectrum = Some(spectrum);
    Ok(scenario)
}

/// Linear encoding `h = t J_axis`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub spin: Spin,
    pub beta: f64,
    pub t: f64,
    pub axis: Axis,
}

impl LinearModel {
    pub fn new(spin: Spin, beta: f64, t: f64, axis: Axis) -> Result<Self> {
        check_beta_t(beta, t)?;
        Ok(LinearModel {
            spin,
            beta,
            t,
            axis,
        })
    }

    pub fn scenario(&self) -> Result<Scenario> {
        let ops = spin_operators(self.spin);
        let a = match self.axis {
            Axis::X => ops.x,
            Axis::Y => ops.y,
            Axis::Z => ops.z,
        };
        jz_probe(self.spin, self.beta, EncodingScheme::explicit(a, self.t)?)
    }

    /// `F = 2 t^2 tanh(beta/2) [(J + 1/2) coth(beta (J + 1/2)) - coth(beta/2) / 2]`.
    ///
    /// The `y` axis is related to `x` by a rotation about `z`, which leaves
    /// the probe invariant, so both share this value; the `z` axis commutes
    /// with the probe and gives zero.
    pub fn qfi_closed(&self) -> f64 {
        if self.axis == Axis::Z || self.beta == 0.0 {
            return 0.0;
        }
        let (j, beta, t) = (self.spin.j(), self.beta, self.t);
        let bracket = (xcoth_minus_one(beta * (j + 0.5)) - xcoth_minus_one(beta / 2.0)) / beta;
        2.0 * t * t * (beta / 2.0).tanh() * bracket
    }

    /// Variance bound `beta^2 t^2 Var[J_y]`, from the hyperbolic closed form:
    ///
    /// `-beta^2 t^2 / 8 sinh(beta) csch^3(beta/2)
    ///  ((J+1) sinh(beta J) - J sinh(beta (J+1))) csch(beta (J+1/2))`.
    pub fn variance_closed(&self) -> f64 {
        if self.axis == Axis::Z || self.beta == 0.0 {
            return 0.0;
        }
        let (j, beta, t) = (self.spin.j(), self.beta, self.t);
        // sinh(beta) csch^3(beta/2) = 2 coth(beta/2) csch(beta/2)
        let lead = 2.0 / (beta / 2.0).tanh();
        let denom = ln_sinh(beta * (j + 0.5)) + ln_sinh(beta / 2.0);
        let a = (j + 1.0) * (ln_sinh(beta * j) - denom).exp();
        let b = j * (ln_sinh(beta * (j + 1.0)) - denom).exp();
        -beta * beta * t * t * lead * (a - b) / 8.0
    }

    /// Same bound through `Var[J_y] = (J(J+1) - Z2/Z) / 2`.
    pub fn variance_from_moments(&self) -> Result<f64> {
        if self.axis == Axis::Z {
            return Ok(0.0);
        }
        let j = self.spin.j();
        let pm = partition_moments(self.spin, self.beta)?;
        Ok(self.beta.powi(2) * self.t.powi(2) * 0.5 * (j * (j + 1.0) - pm.mean_square()))
    }

    /// `beta^2 t^2 ||J_y||^2 / 4 = beta^2 t^2 J^2`.
    pub fn seminorm_bound_closed(&self) -> f64 {
        if self.axis == Axis::Z {
            return 0.0;
        }
        (self.beta * self.t * self.spin.j()).powi(2)
    }

    /// `beta^2 t^2 ||J_z||^2 ||J_axis||^2 / 4 = 4 beta^2 t^2 J^4`.
    pub fn product_bound_closed(&self) -> f64 {
        let j = self.spin.j();
        4.0 * (self.beta * self.t).powi(2) * j.powi(4)
    }
}

/// Large-`J` form of `Var[J_y]` in the thermal `J_z` state:
/// `(2J+1) coth(beta/2) / 4 - coth^2(beta/2) / 4`.
pub fn large_j_variance(spin: Spin, beta: f64) -> f64 {
    let c = 1.0 / (beta / 2.0).tanh();
    (2.0 * spin.j() + 1.0) * c / 4.0 - c * c / 4.0
}

/// `t^2 (2J - 2 (2J+1) / (1 + e^beta))`, the large-`J` form of the linear
/// QFI. Only meaningful for `beta >= 1`; it goes negative near `beta = 0`.
pub fn large_j_linear_approx(spin: Spin, beta: f64, t: f64) -> f64 {
    let j = spin.j();
    t * t * (2.0 * j - 2.0 * (2.0 * j + 1.0) / (1.0 + beta.exp()))
}

/// One-axis-twisting encoding `h = t J_x^2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OatModel {
    pub spin: Spin,
    pub beta: f64,
    pub t: f64,
}

impl OatModel {
    pub fn new(spin: Spin, beta: f64, t: f64) -> Result<Self> {
        check_beta_t(beta, t)?;
        Ok(OatModel { spin, beta, t })
    }

    pub fn scenario(&self) -> Result<Scenario> {
        let x2 = spin_operators(self.spin).x.square();
        jz_probe(self.spin, self.beta, EncodingScheme::explicit(x2, self.t)?)
    }

    /// `eta * exp(log_weight(beta))` where `log_weight` is supplied by the
    /// caller so the prefactor can be absorbed before exponentiating.
    fn eta_weighted(&self, log_weight: f64) -> f64 {
        let (j, beta) = (self.spin.j(), self.beta);
        if beta < 1.0 {
            // eta = (4J^2+4J+3)(cosh b - 1) - 6[(sinh b / b - 1) x coth x + (x coth x - 1)],
            // x = b(J+1/2); leading terms cancel only at O(b^2)
            let x = beta * (j + 0.5);
            let xc1 = xcoth_minus_one(x);
            let half = (beta / 2.0).sinh();
            let eta = (4.0 * j * j + 4.0 * j + 3.0) * 2.0 * half * half
                - 6.0 * (sinhc_minus_one(beta) * (1.0 + xc1) + xc1);
            return eta * log_weight.exp();
        }
        let denom = ln_sinh(beta * (j + 0.5));
        let up = j * (2.0 * j - 1.0) * (ln_sinh(beta * (j + 1.5)) - denom + log_weight).exp();
        let down = if self.spin.twice_j() == 1 {
            0.0
        } else {
            (j + 1.0) * (2.0 * j + 3.0) * (ln_sinh(beta * (j - 0.5)) - denom + log_weight).exp()
        };
        (3.0 - 4.0 * j * (j + 1.0)) * log_weight.exp() + up + down
    }

    /// `eta = 3 - 4J(J+1) + csch[beta(J+1/2)] {J(2J-1) sinh[beta(J+3/2)]
    /// + (J+1)(2J+3) sinh[beta(J-1/2)]}`; zero at `beta = 0`.
    pub fn eta(&self) -> f64 {
        if self.beta == 0.0 {
            return 0.0;
        }
        self.eta_weighted(0.0)
    }

    /// `F = (t^2 / 2) coth^2(beta/2) sech(beta) eta`.
    pub fn qfi_closed(&self) -> f64 {
        if self.beta == 0.0 || self.spin.twice_j() == 1 {
            return 0.0;
        }
        let beta = self.beta;
        let coth = 1.0 / (beta / 2.0).tanh();
        self.t * self.t / 2.0 * coth * coth * self.eta_weighted(-ln_cosh(beta))
    }

    /// Variance bound `beta^2 t^2 cosh(beta) csch^4(beta/2) eta / 8`.
    pub fn variance_closed(&self) -> f64 {
        if self.beta == 0.0 || self.spin.twice_j() == 1 {
            return 0.0;
        }
        let beta = self.beta;
        let log_weight = ln_cosh(beta) - 4.0 * ln_sinh(beta / 2.0);
        beta * beta * self.t * self.t / 8.0 * self.eta_weighted(log_weight)
    }

    /// Semiclassical seminorm bound `beta^2 t^2 (2J^2)^2 / 4 = beta^2 t^2 J^4`.
    pub fn seminorm_bound_semiclassical(&self) -> f64 {
        (self.beta * self.t).powi(2) * self.spin.j().powi(4)
    }

    /// `beta^2 t^2 ||J_z||^2 ||J_x^2||^2 / 4`, with `||J_x^2|| = J^2` for
    /// integer `J` and `J^2 - 1/4` for half-integer `J`.
    pub fn product_bound_closed(&self) -> f64 {
        let j = self.spin.j();
        let width = if self.spin.twice_j().is_multiple_of(2) {
            j * j
        } else {
            j * j - 0.25
        };
        (self.beta * self.t * j * width).powi(2)
    }
}

/// `2 J^2`, the large-`J` estimate of `||J_x J_y + J_y J_x||`.
pub fn oat_seminorm_semiclassical(spin: Spin) -> f64 {
    2.0 * spin.j() * spin.j()
}

/// LMG encoding `H(lambda) = J_x^2 + lambda J_z` for time `t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LmgModel {
    pub spin: Spin,
    pub beta: f64,
    pub t: f64,
    pub lambda: f64,
}

impl LmgModel {
    pub fn new(spin: Spin, beta: f64, t: f64, lambda: f64) -> Result<Self> {
        check_beta_t(beta, t)?;
        if !lambda.is_finite() {
            return Err(QfiError::invalid("lambda", lambda, "must be finite"));
        }
        Ok(LmgModel {
            spin,
            beta,
            t,
            lambda,
        })
    }

    pub fn hamiltonian_family(&self) -> (HamiltonianFn, Hermitian) {
        let ops = spin_operators(self.spin);
        let x2 = ops.x.square();
        let z = ops.z.clone();
        let family: HamiltonianFn = Arc::new(move |lambda| x2.add(&z.scaled(lambda)));
        (family, ops.z)
    }

    pub fn encoding(&self) -> Result<EncodingScheme> {
        let (family, derivative) = self.hamiltonian_family();
        EncodingScheme::hamiltonian_family(family, derivative, self.lambda, self.t)
    }

    pub fn scenario(&self) -> Result<Scenario> {
        jz_probe(self.spin, self.beta, self.encoding()?)
    }

    /// Finite-difference generator of `exp(-i sign H(lambda) t)`.
    pub fn generator_fd(&self, fd_step: f64, sign: f64) -> Result<LocalGenerator> {
        let (family, _) = self.hamiltonian_family();
        let u = family_unitary(family, self.t, sign);
        generator_fd(u.as_ref(), self.lambda, fd_step)
    }
}
