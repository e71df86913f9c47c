//! Pauli quotient groups.
//!
//! A one-qubit Pauli modulo phase is a [`PauliSymbol`] in `{0,1,2,3}` with
//! `I = 00`, `X = 01`, `Y = 10`, `Z = 11` written as `[u1, u2]` (`u2` least
//! significant). The group law is XOR of the two-bit encodings.
//!
//! The symplectic layer underneath uses the usual `(x, z)` bits per qubit.
//! The change of coordinates is linear: `x = u1 ^ u2`, `z = u1`.

use std::fmt;
use std::ops::BitXor;

use serde::{Deserialize, Serialize};

/// Element of the one-qubit Pauli group modulo phases.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PauliSymbol(u8);

impl PauliSymbol {
    pub const I: PauliSymbol = PauliSymbol(0);
    pub const X: PauliSymbol = PauliSymbol(1);
    pub const Y: PauliSymbol = PauliSymbol(2);
    pub const Z: PauliSymbol = PauliSymbol(3);

    pub const ALL: [PauliSymbol; 4] = [Self::I, Self::X, Self::Y, Self::Z];

    /// Builds a symbol from its two-bit code; panics if `value > 3`.
    pub fn new(value: u8) -> Self {
        assert!(value < 4, "Pauli symbol out of range: {value}");
        PauliSymbol(value)
    }

    pub fn try_new(value: u8) -> Option<Self> {
        (value < 4).then_some(PauliSymbol(value))
    }

    #[inline]
    pub fn value(self) -> u8 {
        self.0
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    /// Symplectic `(x, z)` bits of this symbol.
    #[inline]
    pub fn xz(self) -> (u8, u8) {
        let u1 = (self.0 >> 1) & 1;
        let u2 = self.0 & 1;
        (u1 ^ u2, u1)
    }

    #[inline]
    pub fn from_xz(x: u8, z: u8) -> Self {
        let u1 = z & 1;
        let u2 = (x ^ z) & 1;
        PauliSymbol((u1 << 1) | u2)
    }

    pub fn label(self) -> char {
        ['I', 'X', 'Y', 'Z'][self.index()]
    }
}

impl BitXor for PauliSymbol {
    type Output = PauliSymbol;

    #[inline]
    fn bitxor(self, rhs: PauliSymbol) -> PauliSymbol {
        PauliSymbol(self.0 ^ rhs.0)
    }
}

impl fmt::Display for PauliSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label())
    }
}

/// Group operation of `P̄₁`.
#[inline]
pub fn pauli_add(a: PauliSymbol, b: PauliSymbol) -> PauliSymbol {
    a ^ b
}

/// Bit position of symplectic coordinate `c` (0 = x1, 1 = z1, 2 = x2, 3 = z2)
/// inside a packed 4-bit vector.
#[inline]
pub(crate) const fn coord_bit(c: usize) -> u8 {
    1 << (3 - c)
}

/// Packs a pair of symbols into a symplectic vector ordered `(x1, z1, x2, z2)`.
#[inline]
pub fn pair_to_vec(p: (PauliSymbol, PauliSymbol)) -> u8 {
    let (x1, z1) = p.0.xz();
    let (x2, z2) = p.1.xz();
    (x1 << 3) | (z1 << 2) | (x2 << 1) | z2
}

#[inline]
pub fn vec_to_pair(v: u8) -> (PauliSymbol, PauliSymbol) {
    (
        PauliSymbol::from_xz((v >> 3) & 1, (v >> 2) & 1),
        PauliSymbol::from_xz((v >> 1) & 1, v & 1),
    )
}

/// Two-qubit Pauli operator `i^phase · X^x Z^z ⊗ X^x' Z^z'` (ordered product
/// form, one factor per qubit).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SignedPauli {
    pub vec: u8,
    pub phase: u8,
}

impl SignedPauli {
    /// The Hermitian representative of a symplectic vector, `Y = iXZ` on each qubit.
    pub fn hermitian(vec: u8) -> Self {
        SignedPauli {
            vec,
            phase: hermitian_phase(vec),
        }
    }

    pub fn negated(self) -> Self {
        SignedPauli {
            vec: self.vec,
            phase: (self.phase + 2) & 3,
        }
    }

    /// `self · rhs`
    pub fn mul(self, rhs: SignedPauli) -> SignedPauli {
        // Z^z X^x' = (-1)^{z·x'} X^x' Z^z on each qubit.
        let z_self = self.vec & 0b0101;
        let x_rhs = (rhs.vec & 0b1010) >> 1;
        let commute = (z_self & x_rhs).count_ones() as u8;
        SignedPauli {
            vec: self.vec ^ rhs.vec,
            phase: (self.phase + rhs.phase + 2 * commute) & 3,
        }
    }

    /// Sign relative to the Hermitian representative, if the operator is Hermitian.
    pub fn hermitian_sign(self) -> Option<bool> {
        match (self.phase + 4 - hermitian_phase(self.vec)) & 3 {
            0 => Some(false),
            2 => Some(true),
            _ => None,
        }
    }
}

#[inline]
fn hermitian_phase(vec: u8) -> u8 {
    let xz1 = ((vec >> 3) & (vec >> 2)) & 1;
    let xz2 = ((vec >> 1) & vec) & 1;
    (xz1 + xz2) & 3
}

/// Symplectic inner product over GF(2) in the `(x1, z1, x2, z2)` basis.
#[inline]
pub fn symplectic_product(a: u8, b: u8) -> u8 {
    let swapped = ((b & 0b1010) >> 1) | ((b & 0b0101) << 1);
    ((a & swapped).count_ones() & 1) as u8
}
