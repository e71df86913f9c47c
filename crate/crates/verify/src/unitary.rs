//! Unitary realizing a two-qubit Clifford action, up to global phase.

use qpolar_core::clifford::CliffordElement;
use qpolar_core::pauli::SignedPauli;

use crate::linalg::{c, kron, pauli, CMat};

/// Generator vectors X1, Z1, X2, Z2 in the packed `(x1, z1, x2, z2)` layout.
const GENERATORS: [u8; 4] = [0b1000, 0b0100, 0b0010, 0b0001];

/// Matrix of `i^phase (X^x1 Z^z1) ⊗ (X^x2 Z^z2)`; qubit 1 is the left factor.
pub fn signed_pauli_matrix(p: SignedPauli) -> CMat {
    let factor = |x: u8, z: u8| {
        let mut m = CMat::identity(2, 2);
        if x == 1 {
            m = &m * pauli(1);
        }
        if z == 1 {
            m = &m * pauli(3);
        }
        m
    };
    let v = p.vec;
    let m = kron(&factor((v >> 3) & 1, (v >> 2) & 1), &factor((v >> 1) & 1, v & 1));
    let phase = [c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)][(p.phase & 3) as usize];
    m * phase
}

/// Twirl construction: `Σ_P U P U† A P† = 4 tr(U†A) U` over the 16 Pauli operators,
/// so any `A` with `tr(U†A) ≠ 0` recovers `U` after normalization.
pub fn clifford_unitary(cl: &CliffordElement) -> CMat {
    let images: Vec<CMat> = GENERATORS
        .iter()
        .map(|&g| signed_pauli_matrix(cl.conjugate_signed(SignedPauli { vec: g, phase: 0 })))
        .collect();
    let terms: Vec<(CMat, CMat)> = (0u8..16)
        .map(|v| {
            let mut img = CMat::identity(4, 4);
            for (bit, m) in GENERATORS.iter().zip(&images) {
                if v & bit != 0 {
                    img = &img * m;
                }
            }
            (img, signed_pauli_matrix(SignedPauli { vec: v, phase: 0 }).adjoint())
        })
        .collect();
    let mut candidates = vec![CMat::identity(4, 4)];
    for i in 0..4 {
        for j in 0..4 {
            let mut e = CMat::zeros(4, 4);
            e[(i, j)] = c(1.0, 0.0);
            candidates.push(e);
        }
    }
    for a in candidates {
        let m = terms
            .iter()
            .fold(CMat::zeros(4, 4), |acc, (img, p_dag)| acc + img * &a * p_dag);
        let norm = m.norm();
        if norm > 1e-6 {
            // A unitary on C⁴ has Frobenius norm 2.
            return m * c(2.0 / norm, 0.0);
        }
    }
    unreachable!("the matrix units span all of M₄, so some tr(U†A) is non-zero")
}
