//! Randomized numerical checks of the channel-combining identities.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use qpolar_core::clifford::{classify_cosets, enumerate_clifford_actions, local_group, CliffordElement, Gate, GateSet};
use qpolar_core::rng::{stream, StreamRng};

use crate::combine::{bad_channel, good_channel};
use crate::entropy::{coherent_info, renyi2_down, renyi_bhatt, renyi_bhatt_petz, renyi_half_up};
use crate::error::{Result, VerifyError};
use crate::kraus::KrausChannel;
use crate::linalg::CMat;
use crate::state::random_pure_state;
use crate::unitary::clifford_unitary;

/// Largest deviation a check may show and still pass.
pub const LEMMA_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Lemma {
    /// I and R are linear over classical mixtures.
    Mixture,
    /// `I(bad) + I(good) = I(N) + I(M)` for every C.
    Martingale,
    /// Mean of `R(good)` over the 20 representatives is `2/5 + 2/5·R(N)R(M)`.
    GoodAverage,
    /// R near an endpoint forces I near the same endpoint.
    Implications,
    /// R of both split channels is constant on local cosets.
    CosetInvariance,
    /// Means over the two 9-gate sets equal `4/9 − R/9 + 4R²/9`.
    NineGateAverage,
    /// Prefixing the swap leaves R unchanged for identical channels.
    Swap,
    /// `H̃₂↓(A|B) = −H↑_{1/2}(A|C)` on pure states, and the two R routes agree.
    Duality,
}

impl Lemma {
    pub const ALL: [Lemma; 8] = [
        Lemma::Mixture,
        Lemma::Martingale,
        Lemma::GoodAverage,
        Lemma::Implications,
        Lemma::CosetInvariance,
        Lemma::NineGateAverage,
        Lemma::Swap,
        Lemma::Duality,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Lemma::Mixture => "2",
            Lemma::Martingale => "3",
            Lemma::GoodAverage => "4",
            Lemma::Implications => "5",
            Lemma::CosetInvariance => "6",
            Lemma::NineGateAverage => "7",
            Lemma::Swap => "swap",
            Lemma::Duality => "duality",
        }
    }
}

impl fmt::Display for Lemma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Lemma {
    type Err = VerifyError;

    fn from_str(s: &str) -> Result<Self> {
        Lemma::ALL
            .into_iter()
            .find(|l| l.name() == s)
            .ok_or_else(|| VerifyError::InvalidParameter(format!("unknown lemma {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaCheck {
    pub lemma: String,
    pub trials: usize,
    pub max_abs_dev: f64,
    pub pass: bool,
    /// Sampled inputs at the worst deviation.
    pub worst: String,
}

impl LemmaCheck {
    pub fn into_result(self) -> Result<Self> {
        if self.pass {
            Ok(self)
        } else {
            Err(VerifyError::LemmaViolated {
                lemma: self.lemma,
                deviation: self.max_abs_dev,
                inputs: self.worst,
            })
        }
    }
}

/// Group data shared by the checks.
pub struct GroupContext {
    pub all: Vec<CliffordElement>,
    pub local: Vec<CliffordElement>,
    pub representatives: Vec<Gate>,
}

impl GroupContext {
    pub fn new() -> Self {
        let all = enumerate_clifford_actions();
        let representatives = classify_cosets(&all)
            .expect("built-in gates form a transversal")
            .representative_gates;
        GroupContext {
            all,
            local: local_group(),
            representatives,
        }
    }

    fn random_element(&self, rng: &mut StreamRng) -> CliffordElement {
        self.all[rng.random_range(0..self.all.len())]
    }
}

impl Default for GroupContext {
    fn default() -> Self {
        Self::new()
    }
}

pub fn gate_unitary(g: Gate) -> CMat {
    clifford_unitary(&g.element())
}

fn r_good(n: &KrausChannel, m: &KrausChannel, u: &CMat) -> Result<f64> {
    renyi_bhatt(&good_channel(n, m, u)?)
}

fn r_bad(n: &KrausChannel, m: &KrausChannel, u: &CMat) -> Result<f64> {
    renyi_bhatt(&bad_channel(n, m, u)?)
}

fn random_channel(rng: &mut StreamRng) -> KrausChannel {
    KrausChannel::random(rng, 2, 2)
}

fn binary_entropy(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        0.0
    } else {
        -x * x.log2() - (1.0 - x) * (1.0 - x).log2()
    }
}

/// Channels spread toward both endpoints so the implications are not vacuous.
fn implications_channel(rng: &mut StreamRng, t: usize) -> Result<KrausChannel> {
    match t % 3 {
        0 => {
            let e: f64 = rng.random_range(0.0..0.05);
            KrausChannel::pauli([1.0 - e, e / 3.0, e / 3.0, e / 3.0])
        }
        1 => {
            let e: f64 = rng.random_range(0.0..0.05);
            KrausChannel::pauli([0.25 + e, 0.25 - e / 3.0, 0.25 - e / 3.0, 0.25 - e / 3.0])
        }
        _ => Ok(random_channel(rng)),
    }
}

/// Deviation of one trial and a description of its inputs.
fn trial(lemma: Lemma, ctx: &GroupContext, rng: &mut StreamRng, t: usize) -> Result<(f64, String)> {
    Ok(match lemma {
        Lemma::Mixture => {
            let k = rng.random_range(2..=3usize);
            let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
            let total: f64 = raw.iter().sum();
            let parts: Vec<(f64, KrausChannel)> =
                raw.iter().map(|&w| (w / total, random_channel(rng))).collect();
            let mix = KrausChannel::mixture(&parts)?;
            let mut i_mean = 0.0;
            let mut r_mean = 0.0;
            for (w, ch) in &parts {
                i_mean += w * coherent_info(ch)?;
                r_mean += w * renyi_bhatt(ch)?;
            }
            let dev = (coherent_info(&mix)? - i_mean)
                .abs()
                .max((renyi_bhatt(&mix)? - r_mean).abs());
            (dev, format!("trial {t}, {k}-part mixture"))
        }
        Lemma::Martingale => {
            let (n, m) = (random_channel(rng), random_channel(rng));
            let base = coherent_info(&n)? + coherent_info(&m)?;
            let mut worst = (0.0, String::new());
            let random = ctx.random_element(rng);
            let unitaries = ctx
                .representatives
                .iter()
                .map(|&g| (g.name(), gate_unitary(g)))
                .chain([("random group element".to_string(), clifford_unitary(&random))]);
            for (name, u) in unitaries {
                let s = coherent_info(&bad_channel(&n, &m, &u)?)? + coherent_info(&good_channel(&n, &m, &u)?)?;
                let dev = (s - base).abs();
                if dev >= worst.0 {
                    worst = (dev, format!("trial {t}, C = {name}"));
                }
            }
            worst
        }
        Lemma::GoodAverage => {
            let (n, m) = (random_channel(rng), random_channel(rng));
            let target = 0.4 + 0.4 * renyi_bhatt(&n)? * renyi_bhatt(&m)?;
            let mut sum = 0.0;
            for &g in &ctx.representatives {
                sum += r_good(&n, &m, &gate_unitary(g))?;
            }
            let mean = sum / ctx.representatives.len() as f64;
            ((mean - target).abs(), format!("trial {t}, mean {mean} target {target}"))
        }
        Lemma::Implications => {
            let ch = implications_channel(rng, t)?;
            let r = renyi_bhatt(&ch)?;
            let i = coherent_info(&ch)?;
            let low = (1.0 - (1.0 + 2.0 * (r - 0.5)).log2()) - i;
            let s = (2.0 * (2.0 - r).max(0.0)).sqrt();
            // Beyond s = 1 the upper bound exceeds 1 and holds trivially.
            let high = if s <= 1.0 {
                i - (-1.0 + 4.0 * s + 2.0 * binary_entropy(s))
            } else {
                0.0
            };
            (low.max(high).max(0.0), format!("trial {t}, R {r} I {i}"))
        }
        Lemma::CosetInvariance => {
            let (n, m) = (random_channel(rng), random_channel(rng));
            let base = ctx.random_element(rng);
            let (mut good, mut bad) = (Vec::new(), Vec::new());
            for _ in 0..5 {
                let k = ctx.local[rng.random_range(0..ctx.local.len())];
                let u = clifford_unitary(&base.compose(&k));
                good.push(r_good(&n, &m, &u)?);
                bad.push(r_bad(&n, &m, &u)?);
            }
            let spread = |v: &[f64]| {
                v.iter().copied().fold(f64::NEG_INFINITY, f64::max) - v.iter().copied().fold(f64::INFINITY, f64::min)
            };
            (spread(&good).max(spread(&bad)), format!("trial {t}, coset of {base:?}"))
        }
        Lemma::NineGateAverage => {
            let w = random_channel(rng);
            let r = renyi_bhatt(&w)?;
            let target = 4.0 / 9.0 - r / 9.0 + 4.0 * r * r / 9.0;
            let mean = |set: GateSet| -> Result<f64> {
                let gates = set.gates();
                let mut s = 0.0;
                for &g in &gates {
                    s += r_good(&w, &w, &gate_unitary(g))?;
                }
                Ok(s / gates.len() as f64)
            };
            let (ml, mr) = (mean(GateSet::L)?, mean(GateSet::R)?);
            let dev = (ml - target).abs().max((mr - target).abs()).max((ml - mr).abs());
            (dev, format!("trial {t}, R {r} mean_L {ml} mean_R {mr}"))
        }
        Lemma::Swap => {
            let w = random_channel(rng);
            let r = renyi_bhatt(&w)?;
            let swap = gate_unitary(Gate::Swap);
            let id = gate_unitary(Gate::Identity);
            let c = ctx.random_element(rng);
            let u = clifford_unitary(&c);
            let su = &swap * &u;
            let dev = [
                (r_good(&w, &w, &swap)? - r).abs(),
                (r_good(&w, &w, &id)? - r).abs(),
                (r_good(&w, &w, &su)? - r_good(&w, &w, &u)?).abs(),
                (r_bad(&w, &w, &su)? - r_bad(&w, &w, &u)?).abs(),
            ]
            .into_iter()
            .fold(0.0, f64::max);
            (dev, format!("trial {t}, C = {c:?}"))
        }
        Lemma::Duality => {
            let dims = if t.is_multiple_of(2) { vec![2, 2, 4] } else { vec![2, 4, 2] };
            let psi = random_pure_state(rng, dims.clone())?;
            let ab = psi.reduce(&[0, 1]);
            let ac = psi.reduce(&[0, 2]);
            let dual = (renyi2_down(&ab) + renyi_half_up(&ac)).abs();
            let ch = random_channel(rng);
            let routes = (renyi_bhatt(&ch)? - renyi_bhatt_petz(&ch)?).abs();
            (dual.max(routes), format!("trial {t}, dims {dims:?}"))
        }
    })
}

/// Runs `trials` independent trials of `lemma`; trial `t` draws from stream `(seed, t)`.
pub fn verify_lemma(lemma: Lemma, ctx: &GroupContext, seed: u64, trials: usize) -> Result<LemmaCheck> {
    if trials == 0 {
        return Err(VerifyError::InvalidParameter("trials must be at least 1".into()));
    }
    let mut worst = (f64::NEG_INFINITY, String::new());
    for t in 0..trials {
        let mut rng = stream(seed, t as u64);
        let (dev, what) = trial(lemma, ctx, &mut rng, t)?;
        // NaN must fail rather than vanish inside max.
        let dev = if dev.is_nan() { f64::INFINITY } else { dev };
        if dev > worst.0 {
            worst = (dev, what);
        }
    }
    Ok(LemmaCheck {
        lemma: lemma.name().to_string(),
        trials,
        max_abs_dev: worst.0,
        pass: worst.0 <= LEMMA_TOL,
        worst: worst.1,
    })
}

/// All checks in a fixed order.
pub fn verify_lemmas(seed: u64, trials: usize) -> Result<Vec<LemmaCheck>> {
    let ctx = GroupContext::new();
    Lemma::ALL
        .iter()
        .map(|&l| verify_lemma(l, &ctx, seed, trials))
        .collect()
}
