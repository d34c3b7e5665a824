//! Spin-J angular momentum operators in the `J_z` eigenbasis, ordered
//! `M = -J, ..., +J`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{QfiError, Result};
use crate::operator::{ComplexMatrix, Hermitian};

/// Spin quantum number stored as `2J` so half-integers are exact.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct Spin {
    twice_j: u32,
}

impl Spin {
    pub fn from_twice_j(twice_j: u32) -> Result<Self> {
        if twice_j == 0 {
            return Err(QfiError::InvalidSpin { twice_j });
        }
        Ok(Spin { twice_j })
    }

    pub fn twice_j(self) -> u32 {
        self.twice_j
    }

    pub fn j(self) -> f64 {
        f64::from(self.twice_j) / 2.0
    }

    pub fn dim(self) -> usize {
        self.twice_j as usize + 1
    }

    /// Magnetic quantum numbers in basis order.
    pub fn m_values(self) -> impl Iterator<Item = f64> {
        let tj = i64::from(self.twice_j);
        (0..=tj).map(move |k| (2 * k - tj) as f64 / 2.0)
    }
}

impl TryFrom<u32> for Spin {
    type Error = QfiError;

    fn try_from(twice_j: u32) -> Result<Self> {
        Spin::from_twice_j(twice_j)
    }
}

impl From<Spin> for u32 {
    fn from(s: Spin) -> u32 {
        s.twice_j
    }
}

impl std::fmt::Display for Spin {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.twice_j.is_multiple_of(2) {
            write!(f, "{}", self.twice_j / 2)
        } else {
            write!(f, "{}/2", self.twice_j)
        }
    }
}

#[derive(Clone, Debug)]
pub struct SpinOperators {
    pub x: Hermitian,
    pub y: Hermitian,
    pub z: Hermitian,
}

/// `J_x`, `J_y`, `J_z` built from the ladder elements
/// `<M+1|J_+|M> = sqrt((J - M)(J + M + 1))`.
pub fn spin_operators(spin: Spin) -> SpinOperators {
    let d = spin.dim();
    let tj = i64::from(spin.twice_j);
    let mut raise = ComplexMatrix::zeros(d, d);
    for k in 0..d - 1 {
        let tm = 2 * k as i64 - tj;
        // (J - M)(J + M + 1) in units of 1/4, exact in integers
        let quarter = (tj - tm) * (tj + tm + 2);
        raise[(k + 1, k)] = Complex64::new((quarter as f64).sqrt() / 2.0, 0.0);
    }
    let lower = raise.adjoint();
    let x = (&raise + &lower).scale(0.5);
    let y = (&raise - &lower) * Complex64::new(0.0, -0.5);
    let z = ComplexMatrix::from_fn(d, d, |r, c| {
        if r == c {
            Complex64::new((2 * r as i64 - tj) as f64 / 2.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    SpinOperators {
        x: Hermitian::new(x).expect("J_x is Hermitian by construction"),
        y: Hermitian::new(y).expect("J_y is Hermitian by construction"),
        z: Hermitian::new(z).expect("J_z is Hermitian by construction"),
    }
}

/// `J_x J_y + J_y J_x`; `i[J_z, t J_x^2] = -t (J_x J_y + J_y J_x)`.
pub fn oat_commutator(spin: Spin) -> Hermitian {
    let ops = spin_operators(spin);
    ops.x
        .anticommutator(&ops.y)
        .expect("spin operators share a dimension")
}

/// `J_x^2 - J_y^2`, the rotation of [`oat_commutator`] by `exp(i pi J_z / 4)`.
pub fn rotated_oat_operator(spin: Spin) -> Hermitian {
    let ops = spin_operators(spin);
    ops.x
        .square()
        .sub(&ops.y.square())
        .expect("spin operators share a dimension")
}
