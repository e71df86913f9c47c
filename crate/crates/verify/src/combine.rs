//! Bad and good channels of a two-qubit combining unitary.

use crate::error::{Result, VerifyError};
use crate::kraus::KrausChannel;
use crate::linalg::{c, identity, kron, CMat};

fn check_inputs(n: &KrausChannel, m: &KrausChannel, u: &CMat) -> Result<()> {
    if n.in_dim() != 2 || m.in_dim() != 2 {
        return Err(VerifyError::Dimension("combining needs qubit-input channels".into()));
    }
    if u.shape() != (4, 4) {
        return Err(VerifyError::Dimension("combining unitary must be 4x4".into()));
    }
    Ok(())
}

/// `ρ ↦ (N ⊗ M)(U (ρ ⊗ 1/2) U†)`: input on wire 1, output `B₁B₂`.
pub fn bad_channel(n: &KrausChannel, m: &KrausChannel, u: &CMat) -> Result<KrausChannel> {
    check_inputs(n, m, u)?;
    let s = c(0.5f64.sqrt(), 0.0);
    let mut kraus = Vec::new();
    for a in n.kraus() {
        for b in m.kraus() {
            let nm_u = kron(a, b) * u;
            for e in 0..2 {
                // |j⟩ ↦ |j⟩|e⟩/√2 traces the second wire to 1/2.
                let embed = CMat::from_fn(4, 2, |r, j| if r == 2 * j + e { s } else { c(0.0, 0.0) });
                kraus.push(&nm_u * embed);
            }
        }
    }
    KrausChannel::new(kraus)
}

/// `ρ ↦ (id ⊗ N ⊗ M)((1 ⊗ U)(Φ_{R₁U₁} ⊗ ρ)(1 ⊗ U)†)`: input on wire 2, output `R₁B₁B₂`.
pub fn good_channel(n: &KrausChannel, m: &KrausChannel, u: &CMat) -> Result<KrausChannel> {
    check_inputs(n, m, u)?;
    let s = c(0.5f64.sqrt(), 0.0);
    // |j⟩ ↦ Σ_r |r⟩|r⟩|j⟩/√2 in the order R₁, U₁, U₂.
    let epr = CMat::from_fn(8, 2, |row, j| {
        let (r, u1, u2) = (row >> 2, (row >> 1) & 1, row & 1);
        if r == u1 && u2 == j {
            s
        } else {
            c(0.0, 0.0)
        }
    });
    let lifted = kron(&identity(2), u) * epr;
    let mut kraus = Vec::new();
    for a in n.kraus() {
        for b in m.kraus() {
            kraus.push(kron(&identity(2), &kron(a, b)) * &lifted);
        }
    }
    KrausChannel::new(kraus)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::{coherent_info, renyi_bhatt};
    use crate::kraus::{apply_channel, ket};
    use crate::linalg::max_abs_diff;
    use crate::state::DensityOperator;
    use crate::unitary::clifford_unitary;
    use qpolar_core::clifford::generators;
    use qpolar_core::rng::stream;

    #[test]
    fn identity_bad_channel_appends_mixed_qubit() {
        let id = KrausChannel::identity(2);
        let bad = bad_channel(&id, &id, &identity(4)).unwrap();
        let rho = DensityOperator::pure(&ket(&[0.6, 0.8]), vec![2]).unwrap();
        let out = apply_channel(&bad, &rho, 0).unwrap();
        let expect = kron(rho.matrix(), &(identity(2) * c(0.5, 0.0)));
        assert!(max_abs_diff(out.matrix(), &expect) < 1e-15);
    }

    #[test]
    fn identity_good_channel_is_second_channel_plus_epr() {
        let mut rng = stream(6, 0);
        let n = KrausChannel::random(&mut rng, 2, 2);
        let m = KrausChannel::random(&mut rng, 2, 2);
        let good = good_channel(&n, &m, &identity(4)).unwrap();
        assert!((renyi_bhatt(&good).unwrap() - renyi_bhatt(&m).unwrap()).abs() < 1e-10);
        assert!((coherent_info(&good).unwrap() - coherent_info(&m).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn swap_good_channel_keeps_r() {
        let mut rng = stream(6, 1);
        let w = KrausChannel::random(&mut rng, 2, 2);
        let s = clifford_unitary(&generators::swap());
        let good = good_channel(&w, &w, &s).unwrap();
        assert!((renyi_bhatt(&good).unwrap() - renyi_bhatt(&w).unwrap()).abs() < 1e-10);
    }
}
