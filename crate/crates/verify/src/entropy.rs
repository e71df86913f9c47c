//! Entropic quantities in bits. Conditional entropies condition the first
//! factor of a state on all remaining factors.

use serde::{Deserialize, Serialize};

use crate::error::{Result, VerifyError};
use crate::kraus::{choi_state, complementary, KrausChannel};
use crate::linalg::{identity, kron, partial_trace, pinv_sqrt, psd_sqrt, trace, von_neumann};
use crate::state::DensityOperator;

fn split(rho: &DensityOperator) -> (usize, usize) {
    rho.first_and_rest()
}

/// `H(A|B) = H(AB) − H(B)`.
pub fn conditional_entropy(rho: &DensityOperator) -> f64 {
    let (a, b) = split(rho);
    let rho_b = partial_trace(rho.matrix(), &[a, b], &[1]);
    von_neumann(rho.matrix()) - von_neumann(&rho_b)
}

/// `−log tr[ρ_B^{-1/2} ρ_AB ρ_B^{-1/2} ρ_AB]`, inverse taken on the support of `ρ_B`.
pub fn renyi2_down(rho: &DensityOperator) -> f64 {
    let (a, b) = split(rho);
    let rho_b = partial_trace(rho.matrix(), &[a, b], &[1]);
    let m = kron(&identity(a), &pinv_sqrt(&rho_b));
    let t = trace(&(&m * rho.matrix() * &m * rho.matrix()));
    -t.re.log2()
}

/// Petz order-½ entropy through its closed-form optimizer:
/// `sup_σ tr[√ρ_AB (1 ⊗ √σ_B)] = ‖tr_A √ρ_AB‖₂` (Cauchy–Schwarz, attained at `√σ ∝ tr_A √ρ_AB`).
pub fn renyi_half_up(rho: &DensityOperator) -> f64 {
    let (a, b) = split(rho);
    let reduced = partial_trace(&psd_sqrt(rho.matrix()), &[a, b], &[1]);
    2.0 * reduced.norm().log2()
}

/// Symmetric coherent information `−H(A|B)` of the Choi state.
pub fn coherent_info(ch: &KrausChannel) -> Result<f64> {
    require_qubit(ch)?;
    Ok(-conditional_entropy(&choi_state(ch)))
}

/// `2^{−H̃₂↓(A|E)}` on the complementary Choi state.
pub fn renyi_bhatt(ch: &KrausChannel) -> Result<f64> {
    require_qubit(ch)?;
    Ok(2f64.powf(-renyi2_down(&choi_state(&complementary(ch)))))
}

/// `2^{H↑_{1/2}(A|B)}` on the Choi state; an independent route to [`renyi_bhatt`].
pub fn renyi_bhatt_petz(ch: &KrausChannel) -> Result<f64> {
    require_qubit(ch)?;
    Ok(2f64.powf(renyi_half_up(&choi_state(ch))))
}

fn require_qubit(ch: &KrausChannel) -> Result<()> {
    if ch.in_dim() != 2 {
        return Err(VerifyError::Dimension(format!("qubit input required, got {}", ch.in_dim())));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelStats {
    pub coherent_info: f64,
    pub renyi_bhatt: f64,
}

/// Slack allowed on the range checks `I ∈ [−1, 1]` and `R ∈ [1/2, 2]`.
pub const RANGE_TOL: f64 = 1e-9;

impl ChannelStats {
    pub fn of(ch: &KrausChannel) -> Result<Self> {
        let s = ChannelStats {
            coherent_info: coherent_info(ch)?,
            renyi_bhatt: renyi_bhatt(ch)?,
        };
        if s.coherent_info.abs() > 1.0 + RANGE_TOL || !(0.5 - RANGE_TOL..=2.0 + RANGE_TOL).contains(&s.renyi_bhatt) {
            return Err(VerifyError::NotChannel(format!("statistics out of range: {s:?}")));
        }
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, CMat};
    use crate::state::{max_entangled, random_pure_state};
    use qpolar_core::rng::stream;

    fn h(p: &[f64]) -> f64 {
        p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.log2()).sum()
    }

    #[test]
    fn endpoints() {
        let id = KrausChannel::identity(2);
        assert!((coherent_info(&id).unwrap() - 1.0).abs() < 1e-12);
        assert!((renyi_bhatt(&id).unwrap() - 0.5).abs() < 1e-12);
        assert!((renyi_bhatt_petz(&id).unwrap() - 0.5).abs() < 1e-12);
        let dep = KrausChannel::pauli([0.25; 4]).unwrap();
        assert!((coherent_info(&dep).unwrap() + 1.0).abs() < 1e-12);
        assert!((renyi_bhatt(&dep).unwrap() - 2.0).abs() < 1e-12);
        assert!((renyi_bhatt_petz(&dep).unwrap() - 2.0).abs() < 1e-12);
        assert!(coherent_info(&KrausChannel::identity(3)).is_err());
    }

    #[test]
    fn pauli_coherent_info_is_one_minus_entropy() {
        for p in [[0.9, 0.0, 0.0, 0.1], [0.7, 0.1, 0.1, 0.1], [0.4, 0.3, 0.2, 0.1]] {
            let ch = KrausChannel::pauli(p).unwrap();
            assert!((coherent_info(&ch).unwrap() - (1.0 - h(&p))).abs() < 1e-12);
        }
    }

    #[test]
    fn dephasing_routes_agree() {
        let ch = KrausChannel::pauli([0.9, 0.0, 0.0, 0.1]).unwrap();
        let r1 = renyi_bhatt(&ch).unwrap();
        let r2 = renyi_bhatt_petz(&ch).unwrap();
        assert!(r1 > 0.5 && r1 < 2.0);
        assert!((r1 - r2).abs() < 1e-9);
        // For a Pauli channel R = (Σ √p_s)²/2.
        let s: f64 = [0.9f64, 0.1].iter().map(|x| x.sqrt()).sum();
        assert!((r1 - s * s / 2.0).abs() < 1e-12);
    }

    #[test]
    fn renyi2_examples() {
        assert!((renyi2_down(&max_entangled(2).unwrap()) + 1.0).abs() < 1e-12);
        let sigma = CMat::from_row_slice(3, 3, &[
            c(0.5, 0.0), c(0.1, 0.1), c(0.0, 0.0),
            c(0.1, -0.1), c(0.3, 0.0), c(0.0, 0.0),
            c(0.0, 0.0), c(0.0, 0.0), c(0.2, 0.0),
        ]);
        let prod = DensityOperator::new(kron(&(identity(2) * c(0.5, 0.0)), &sigma), vec![2, 3]).unwrap();
        assert!((renyi2_down(&prod) - 1.0).abs() < 1e-12);
    }

    /// Direct maximization of `tr[√ρ_AB (1 ⊗ √σ_B)]` over a grid of qubit states σ.
    fn petz_by_grid(rho: &DensityOperator) -> f64 {
        let s = psd_sqrt(rho.matrix());
        let eval = |r: f64, th: f64, ph: f64| {
            let (x, y, z) = (r * th.sin() * ph.cos(), r * th.sin() * ph.sin(), r * th.cos());
            let sigma = CMat::from_row_slice(2, 2, &[
                c((1.0 + z) / 2.0, 0.0), c(x / 2.0, -y / 2.0),
                c(x / 2.0, y / 2.0), c((1.0 - z) / 2.0, 0.0),
            ]);
            trace(&(&s * kron(&identity(2), &psd_sqrt(&sigma)))).re
        };
        let (mut best, mut arg) = (f64::NEG_INFINITY, (0.0, 0.0, 0.0));
        let n = 24;
        for i in 0..=n {
            for j in 0..=n {
                for k in 0..2 * n {
                    let p = (i as f64 / n as f64, std::f64::consts::PI * j as f64 / n as f64, std::f64::consts::PI * k as f64 / n as f64);
                    let v = eval(p.0, p.1, p.2);
                    if v > best {
                        best = v;
                        arg = p;
                    }
                }
            }
        }
        // Coordinate refinement around the best grid point.
        let mut step = [1.0 / n as f64, std::f64::consts::PI / n as f64, std::f64::consts::PI / n as f64];
        for _ in 0..60 {
            for d in 0..3 {
                for sign in [-1.0, 1.0] {
                    let mut q = [arg.0, arg.1, arg.2];
                    q[d] += sign * step[d];
                    q[0] = q[0].clamp(0.0, 1.0);
                    let v = eval(q[0], q[1], q[2]);
                    if v > best {
                        best = v;
                        arg = (q[0], q[1], q[2]);
                    }
                }
            }
            step.iter_mut().for_each(|s| *s *= 0.7);
        }
        2.0 * best.log2()
    }

    #[test]
    fn petz_closed_form_matches_grid_optimization() {
        let mut rng = stream(42, 0);
        for _ in 0..4 {
            let psi = random_pure_state(&mut rng, vec![2, 2, 2]).unwrap();
            let rho = psi.reduce(&[0, 1]);
            let closed = renyi_half_up(&rho);
            let grid = petz_by_grid(&rho);
            assert!(grid <= closed + 1e-12, "grid {grid} exceeds closed form {closed}");
            assert!(closed - grid < 1e-6, "closed {closed} grid {grid}");
        }
    }

    #[test]
    fn stats_ranges() {
        let mut rng = stream(5, 0);
        for _ in 0..20 {
            let ch = KrausChannel::random(&mut rng, 2, 2);
            assert!(ChannelStats::of(&ch).is_ok());
        }
    }
}
