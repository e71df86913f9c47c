use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Result, VerifyError};
use crate::linalg::{c, identity, kron_all, max_abs_diff, pauli, CMat};
use crate::state::{max_entangled, DensityOperator};

pub const COMPLETENESS_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct KrausChannel {
    kraus: Vec<CMat>,
    in_dim: usize,
    out_dim: usize,
}

impl KrausChannel {
    /// Checks shapes and `Σ K†K = I`.
    pub fn new(kraus: Vec<CMat>) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| VerifyError::NotChannel("no Kraus operators".into()))?;
        let (out_dim, in_dim) = first.shape();
        if kraus.iter().any(|k| k.shape() != (out_dim, in_dim)) {
            return Err(VerifyError::NotChannel("Kraus operators differ in shape".into()));
        }
        let sum = kraus.iter().fold(CMat::zeros(in_dim, in_dim), |acc, k| acc + k.adjoint() * k);
        let defect = max_abs_diff(&sum, &identity(in_dim));
        if defect > COMPLETENESS_TOL {
            return Err(VerifyError::NotChannel(format!("completeness defect {defect:e}")));
        }
        Ok(KrausChannel { kraus, in_dim, out_dim })
    }

    pub fn identity(d: usize) -> Self {
        KrausChannel {
            kraus: vec![identity(d)],
            in_dim: d,
            out_dim: d,
        }
    }

    /// Qubit Pauli channel `ρ ↦ Σ p_s σ_s ρ σ_s` in the order I, X, Y, Z.
    pub fn pauli(p: [f64; 4]) -> Result<Self> {
        if p.iter().any(|&x| x < 0.0) || (p.iter().sum::<f64>() - 1.0).abs() > COMPLETENESS_TOL {
            return Err(VerifyError::InvalidParameter(format!("not a distribution: {p:?}")));
        }
        let kraus = (0..4)
            .filter(|&s| p[s] > 0.0)
            .map(|s| pauli(s as u8) * c(p[s].sqrt(), 0.0))
            .collect();
        Self::new(kraus)
    }

    /// Classical mixture `ρ ↦ Σ λ_x |x⟩⟨x| ⊗ N_x(ρ)`; the flag is the first output factor.
    pub fn mixture(parts: &[(f64, KrausChannel)]) -> Result<Self> {
        let first = &parts
            .first()
            .ok_or_else(|| VerifyError::InvalidParameter("empty mixture".into()))?
            .1;
        if parts.iter().any(|(_, ch)| ch.in_dim != first.in_dim || ch.out_dim != first.out_dim) {
            return Err(VerifyError::Dimension("mixture parts differ in shape".into()));
        }
        let n = parts.len();
        let mut kraus = Vec::new();
        for (x, (lambda, ch)) in parts.iter().enumerate() {
            let flag = CMat::from_fn(n, 1, |r, _| c(if r == x { lambda.sqrt() } else { 0.0 }, 0.0));
            kraus.extend(ch.kraus.iter().map(|k| flag.kronecker(k)));
        }
        Self::new(kraus)
    }

    /// Qubit channel from a Haar-random isometry into output ⊗ environment.
    pub fn random<R: Rng>(rng: &mut R, out_dim: usize, env_dim: usize) -> Self {
        let rows = out_dim * env_dim;
        loop {
            let g = CMat::from_fn(rows, 2, |_, _| c(rng.sample(StandardNormal), rng.sample(StandardNormal)));
            let qr = g.qr();
            // Fix the phase of the diagonal of R so Q is Haar distributed.
            let r = qr.r();
            if (0..2).any(|i| r[(i, i)].norm() < 1e-12) {
                continue;
            }
            let mut v = qr.q();
            for j in 0..2 {
                let ph = r[(j, j)] / c(r[(j, j)].norm(), 0.0);
                for i in 0..rows {
                    v[(i, j)] *= ph;
                }
            }
            let kraus = (0..env_dim)
                .map(|e| CMat::from_fn(out_dim, 2, |b, j| v[(b * env_dim + e, j)]))
                .collect();
            return Self::new(kraus).expect("isometry slices are complete");
        }
    }

    pub fn kraus(&self) -> &[CMat] {
        &self.kraus
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    /// Same channel followed by `ρ ↦ UρU†` on the output.
    pub fn then_unitary(&self, u: &CMat) -> Result<Self> {
        if u.shape() != (self.out_dim, self.out_dim) {
            return Err(VerifyError::Dimension("unitary does not match output".into()));
        }
        Self::new(self.kraus.iter().map(|k| u * k).collect())
    }
}

/// Applies `ch` to factor `subsystem` of `rho`; the factor's dimension becomes `out_dim`.
pub fn apply_channel(ch: &KrausChannel, rho: &DensityOperator, subsystem: usize) -> Result<DensityOperator> {
    let dims = rho.dims();
    if subsystem >= dims.len() || dims[subsystem] != ch.in_dim {
        return Err(VerifyError::Dimension(format!(
            "channel input {} does not match factor {subsystem} of {dims:?}",
            ch.in_dim
        )));
    }
    let left: usize = dims[..subsystem].iter().product();
    let right: usize = dims[subsystem + 1..].iter().product();
    let mut out_dims = dims.to_vec();
    out_dims[subsystem] = ch.out_dim;
    let side: usize = out_dims.iter().product();
    let mut out = CMat::zeros(side, side);
    for k in &ch.kraus {
        let full = kron_all(&[identity(left), k.clone(), identity(right)]);
        out += &full * rho.matrix() * full.adjoint();
    }
    Ok(DensityOperator::from_parts_unchecked(out, out_dims))
}

/// Stinespring complement: environment dimension equals the number of Kraus operators.
pub fn complementary(ch: &KrausChannel) -> KrausChannel {
    let env = ch.kraus.len();
    let kraus = (0..ch.out_dim)
        .map(|b| CMat::from_fn(env, ch.in_dim, |k, j| ch.kraus[k][(b, j)]))
        .collect();
    KrausChannel {
        kraus,
        in_dim: ch.in_dim,
        out_dim: env,
    }
}

/// `(id_A ⊗ N)(Φ_{AA'})` with the reference as the first factor.
pub fn choi_state(ch: &KrausChannel) -> DensityOperator {
    let phi = max_entangled(ch.in_dim).expect("input dimension ≥ 2");
    apply_channel(ch, &phi, 1).expect("dimensions match by construction")
}

/// Output of `ch` on the maximally mixed input.
pub fn output_on_mixed(ch: &KrausChannel) -> CMat {
    let d = ch.in_dim as f64;
    ch.kraus
        .iter()
        .fold(CMat::zeros(ch.out_dim, ch.out_dim), |acc, k| acc + k * k.adjoint() * c(1.0 / d, 0.0))
}

/// Column vector helper for tests and builders.
pub fn ket(entries: &[f64]) -> DVector<crate::linalg::C64> {
    DVector::from_iterator(entries.len(), entries.iter().map(|&x| c(x, 0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{herm_eigenvalues, von_neumann};
    use qpolar_core::rng::stream;

    #[test]
    fn identity_channel_leaves_state() {
        let phi = max_entangled(2).unwrap();
        let out = apply_channel(&KrausChannel::identity(2), &phi, 1).unwrap();
        assert!(max_abs_diff(out.matrix(), phi.matrix()) < 1e-15);
        assert!(apply_channel(&KrausChannel::identity(3), &phi, 1).is_err());
    }

    #[test]
    fn depolarizing_gives_maximally_mixed_pair() {
        let ch = KrausChannel::pauli([0.25; 4]).unwrap();
        let out = choi_state(&ch);
        assert!(max_abs_diff(out.matrix(), &(identity(4) * c(0.25, 0.0))) < 1e-15);
    }

    #[test]
    fn pauli_channel_gives_bell_diagonal_state() {
        let p = [0.6, 0.2, 0.15, 0.05];
        let out = choi_state(&KrausChannel::pauli(p).unwrap());
        // Bell basis in the order Φ+, Ψ+, Ψ-, Φ- matches (I, X, Y, Z) acting on the second half.
        let s = 0.5f64.sqrt();
        let bell = [
            ket(&[s, 0.0, 0.0, s]),
            ket(&[0.0, s, s, 0.0]),
            ket(&[0.0, s, -s, 0.0]),
            ket(&[s, 0.0, 0.0, -s]),
        ];
        for i in 0..4 {
            for j in 0..4 {
                let v = (bell[i].adjoint() * out.matrix() * &bell[j])[(0, 0)];
                let expect = if i == j { p[i] } else { 0.0 };
                assert!((v.re - expect).abs() < 1e-14 && v.im.abs() < 1e-14);
            }
        }
    }

    #[test]
    fn complement_spectra() {
        let ch = KrausChannel::identity(2);
        let comp = complementary(&ch);
        assert_eq!(comp.out_dim(), 1);
        assert!(KrausChannel::new(comp.kraus().to_vec()).is_ok());

        // Pauli channel: the environment state for input I/2 has spectrum p.
        let p = [0.5, 0.3, 0.2, 0.0];
        let comp = complementary(&KrausChannel::pauli(p).unwrap());
        let mut vals = herm_eigenvalues(&output_on_mixed(&comp));
        vals.sort_by(|a, b| b.total_cmp(a));
        for (v, e) in vals.iter().zip([0.5, 0.3, 0.2]) {
            assert!((v - e).abs() < 1e-14);
        }
    }

    #[test]
    fn double_complement_preserves_output_spectra() {
        let mut rng = stream(8, 0);
        let ch = KrausChannel::random(&mut rng, 2, 2);
        let cc = complementary(&complementary(&ch));
        for input in [ket(&[1.0, 0.0]), ket(&[0.0, 1.0]), ket(&[0.6, 0.8])] {
            let rho = DensityOperator::pure(&input, vec![2]).unwrap();
            let a = apply_channel(&ch, &rho, 0).unwrap();
            let b = apply_channel(&cc, &rho, 0).unwrap();
            let mut sa = herm_eigenvalues(a.matrix());
            let mut sb = herm_eigenvalues(b.matrix());
            sa.sort_by(f64::total_cmp);
            sb.sort_by(f64::total_cmp);
            for (x, y) in sa.iter().zip(&sb) {
                assert!((x - y).abs() < 1e-12);
            }
            assert!((von_neumann(a.matrix()) - von_neumann(b.matrix())).abs() < 1e-12);
        }
    }

    #[test]
    fn random_channels_and_mixtures_are_complete() {
        let mut rng = stream(1, 2);
        let a = KrausChannel::random(&mut rng, 2, 2);
        let b = KrausChannel::random(&mut rng, 2, 3);
        let m = KrausChannel::mixture(&[(0.3, a), (0.7, b)]).unwrap();
        assert_eq!((m.in_dim(), m.out_dim()), (2, 4));
        assert!(KrausChannel::pauli([0.5, 0.5, 0.1, 0.0]).is_err());
    }
}
