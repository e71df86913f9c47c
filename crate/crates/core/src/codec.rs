//! Quaternary polar encoding, successive-cancellation decoding and the
//! block-error harness, all in the Pauli frame.
//!
//! Layout: for a node at depth `k` covering `L` positions, the first `L/2`
//! positions carry copy 1 and the rest copy 2; `(x[j], x[j+L/2]) = Γ(a[j], b[j])`
//! where `a` encodes the bad half (lower indices) and `b` the good half.

use num_rational::Ratio;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::PauliProbVec;
use crate::clifford::Gate;
use crate::error::{CoreError, Result};
use crate::pauli::PauliSymbol;
use crate::polarization::{make_gate_tree, GatePolicy, GateTree};
use crate::rng::{stream, StreamRng};

/// Below this a leaf likelihood switches decoding to the log domain.
const LOG_DOMAIN_THRESHOLD: f64 = 1e-300;

/// Code description: tree, frozen/info partition and optional chaining subset.
#[derive(Clone, Debug, PartialEq)]
pub struct PolarCodeSpec {
    tree: GateTree,
    policy: String,
    seed: Option<u64>,
    frozen: Vec<usize>,
    info: Vec<usize>,
    chain_subset: Option<Vec<usize>>,
}

/// On-disk form of the gate tree.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GatesFile {
    pub policy: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tree: Option<Vec<String>>,
}

/// On-disk form of a [`PolarCodeSpec`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CodeSpecFile {
    pub n: usize,
    pub gates: GatesFile,
    pub frozen: Vec<usize>,
    pub info: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chain_subset: Option<Vec<usize>>,
}

impl PolarCodeSpec {
    pub fn new(tree: GateTree, info: Vec<usize>, chain_subset: Option<Vec<usize>>) -> Result<Self> {
        Self::with_policy(tree, "tree".into(), None, info, chain_subset)
    }

    fn with_policy(
        tree: GateTree,
        policy: String,
        seed: Option<u64>,
        mut info: Vec<usize>,
        chain_subset: Option<Vec<usize>>,
    ) -> Result<Self> {
        let n_len = 1usize << tree.depth();
        info.sort_unstable();
        if info.windows(2).any(|w| w[0] == w[1]) || info.last().is_some_and(|&i| i >= n_len) {
            return Err(CoreError::InvalidCodeSpec("info set has duplicates or out-of-range indices".into()));
        }
        let frozen: Vec<usize> = (0..n_len).filter(|i| info.binary_search(i).is_err()).collect();
        let chain_subset = match chain_subset {
            Some(mut c) => {
                c.sort_unstable();
                c.dedup();
                if c.len() != frozen.len() || c.iter().any(|i| info.binary_search(i).is_err()) {
                    return Err(CoreError::InvalidCodeSpec(
                        "chain subset must be a subset of info with |frozen| elements".into(),
                    ));
                }
                Some(c)
            }
            None => None,
        };
        Ok(PolarCodeSpec {
            tree,
            policy,
            seed,
            frozen,
            info,
            chain_subset,
        })
    }

    /// Builds the tree from `policy` and checks the partition.
    pub fn from_policy(n: usize, policy: &GatePolicy, info: Vec<usize>, chain_subset: Option<Vec<usize>>) -> Result<Self> {
        let tree = make_gate_tree(n, policy)?;
        let seed = match policy {
            GatePolicy::Random { seed, .. } => Some(*seed),
            _ => None,
        };
        Self::with_policy(tree, policy.label(), seed, info, chain_subset)
    }

    pub fn from_file(f: &CodeSpecFile) -> Result<Self> {
        let spec = if let Some(names) = &f.gates.tree {
            let gates = names.iter().map(|s| s.parse()).collect::<Result<Vec<Gate>>>()?;
            let tree = GateTree::from_gates(f.n, gates)?;
            Self::with_policy(tree, f.gates.policy.clone(), f.gates.seed, f.info.clone(), f.chain_subset.clone())?
        } else {
            let policy = GatePolicy::parse(&f.gates.policy, f.gates.seed.unwrap_or(0))?;
            Self::from_policy(f.n, &policy, f.info.clone(), f.chain_subset.clone())?
        };
        let mut frozen = f.frozen.clone();
        frozen.sort_unstable();
        if frozen != spec.frozen {
            return Err(CoreError::InvalidCodeSpec("frozen and info must partition 0..N".into()));
        }
        Ok(spec)
    }

    /// Always records the explicit tree so the file is self-contained.
    pub fn to_file(&self) -> CodeSpecFile {
        CodeSpecFile {
            n: self.tree.depth(),
            gates: GatesFile {
                policy: self.policy.clone(),
                seed: self.seed,
                tree: Some(self.tree.gates().iter().map(|g| g.name()).collect()),
            },
            frozen: self.frozen.clone(),
            info: self.info.clone(),
            chain_subset: self.chain_subset.clone(),
        }
    }

    pub fn n(&self) -> usize {
        self.tree.depth()
    }

    pub fn len(&self) -> usize {
        1 << self.tree.depth()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn tree(&self) -> &GateTree {
        &self.tree
    }

    pub fn info(&self) -> &[usize] {
        &self.info
    }

    pub fn frozen(&self) -> &[usize] {
        &self.frozen
    }

    pub fn chain_subset(&self) -> Option<&[usize]> {
        self.chain_subset.as_deref()
    }
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(CoreError::LengthMismatch { expected, got });
    }
    Ok(())
}

fn encode_rec(tree: &GateTree, k: usize, value: usize, u: &[PauliSymbol]) -> Vec<PauliSymbol> {
    if u.len() == 1 {
        return u.to_vec();
    }
    let half = u.len() / 2;
    let a = encode_rec(tree, k + 1, 2 * value, &u[..half]);
    let b = encode_rec(tree, k + 1, 2 * value + 1, &u[half..]);
    let g = tree.gamma(k, value);
    let mut x = vec![PauliSymbol::I; u.len()];
    for j in 0..half {
        let (xa, xb) = g.apply(a[j], b[j]);
        x[j] = xa;
        x[j + half] = xb;
    }
    x
}

fn encode_inverse_rec(tree: &GateTree, k: usize, value: usize, x: &[PauliSymbol]) -> Vec<PauliSymbol> {
    if x.len() == 1 {
        return x.to_vec();
    }
    let half = x.len() / 2;
    let inv = tree.gamma(k, value).inverse();
    let mut a = Vec::with_capacity(half);
    let mut b = Vec::with_capacity(half);
    for j in 0..half {
        let (aj, bj) = inv.apply(x[j], x[j + half]);
        a.push(aj);
        b.push(bj);
    }
    let mut u = encode_inverse_rec(tree, k + 1, 2 * value, &a);
    u.extend(encode_inverse_rec(tree, k + 1, 2 * value + 1, &b));
    u
}

pub fn encode(tree: &GateTree, u: &[PauliSymbol]) -> Result<Vec<PauliSymbol>> {
    check_len(1 << tree.depth(), u.len())?;
    Ok(encode_rec(tree, 0, 0, u))
}

pub fn encode_inverse(tree: &GateTree, x: &[PauliSymbol]) -> Result<Vec<PauliSymbol>> {
    check_len(1 << tree.depth(), x.len())?;
    Ok(encode_inverse_rec(tree, 0, 0, x))
}

/// Argmax with ties resolved toward the smaller symbol.
pub fn argmax(belief: &[f64; 4]) -> PauliSymbol {
    let mut best = 0;
    for s in 1..4 {
        if belief[s] > belief[best] {
            best = s;
        }
    }
    PauliSymbol::new(best as u8)
}

#[derive(Clone, Copy)]
enum Domain {
    Linear,
    Log,
}

impl Domain {
    #[inline]
    fn mul(self, a: f64, b: f64) -> f64 {
        match self {
            Domain::Linear => a * b,
            Domain::Log => a + b,
        }
    }

    #[inline]
    fn sum4(self, t: [f64; 4]) -> f64 {
        match self {
            Domain::Linear => t.iter().sum(),
            Domain::Log => {
                let m = t.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                if m == f64::NEG_INFINITY {
                    return m;
                }
                m + t.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
            }
        }
    }

    /// Rescales so the largest entry is 1 (or 0 in the log domain).
    /// Returns `false` when the belief has vanished.
    #[inline]
    fn normalize(self, v: &mut [f64; 4]) -> bool {
        let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        match self {
            Domain::Linear => {
                if !(m.is_finite() && m > 0.0) {
                    return false;
                }
                v.iter_mut().for_each(|x| *x /= m);
            }
            Domain::Log => {
                if !m.is_finite() {
                    return false;
                }
                v.iter_mut().for_each(|x| *x -= m);
            }
        }
        true
    }
}

struct Decoder<'a, F> {
    tree: &'a GateTree,
    domain: Domain,
    decide: F,
    u_hat: Vec<PauliSymbol>,
}

impl<F> Decoder<'_, F>
where
    F: FnMut(usize, &[f64; 4]) -> PauliSymbol,
{
    fn run(&mut self, k: usize, value: usize, base: usize, beliefs: &[[f64; 4]]) -> Result<Vec<PauliSymbol>> {
        if beliefs.len() == 1 {
            let mut b = beliefs[0];
            if !self.domain.normalize(&mut b) {
                return Err(CoreError::DecodeFailure { index: base });
            }
            let s = (self.decide)(base, &b);
            self.u_hat[base] = s;
            return Ok(vec![s]);
        }
        let half = beliefs.len() / 2;
        let g = *self.tree.gamma(k, value);
        let d = self.domain;
        let (left, right) = beliefs.split_at(half);

        let mut bad = Vec::with_capacity(half);
        for j in 0..half {
            let mut m = [0.0; 4];
            for (a, ma) in m.iter_mut().enumerate() {
                let a = PauliSymbol::new(a as u8);
                let mut terms = [0.0; 4];
                for (b, t) in terms.iter_mut().enumerate() {
                    let (xa, xb) = g.apply(a, PauliSymbol::new(b as u8));
                    *t = d.mul(left[j][xa.index()], right[j][xb.index()]);
                }
                *ma = d.sum4(terms);
            }
            if !d.normalize(&mut m) {
                return Err(CoreError::DecodeFailure { index: base });
            }
            bad.push(m);
        }
        let a_hat = self.run(k + 1, 2 * value, base, &bad)?;

        let mut good = Vec::with_capacity(half);
        for j in 0..half {
            let mut m = [0.0; 4];
            for (b, mb) in m.iter_mut().enumerate() {
                let (xa, xb) = g.apply(a_hat[j], PauliSymbol::new(b as u8));
                *mb = d.mul(left[j][xa.index()], right[j][xb.index()]);
            }
            if !d.normalize(&mut m) {
                return Err(CoreError::DecodeFailure { index: base + half });
            }
            good.push(m);
        }
        let b_hat = self.run(k + 1, 2 * value + 1, base + half, &good)?;

        let mut x = vec![PauliSymbol::I; beliefs.len()];
        for j in 0..half {
            let (xa, xb) = g.apply(a_hat[j], b_hat[j]);
            x[j] = xa;
            x[j + half] = xb;
        }
        Ok(x)
    }
}

/// Successive cancellation with a caller-supplied decision rule.
///
/// `decide(index, belief)` sees the normalized belief of synthesized input
/// `index` (linear, max 1; or log, max 0) and returns the symbol to feed back.
/// Returns the fed-back symbols in index order.
pub fn sc_decode_with<F>(tree: &GateTree, leaves: &[[f64; 4]], decide: F) -> Result<Vec<PauliSymbol>>
where
    F: FnMut(usize, &[f64; 4]) -> PauliSymbol,
{
    let n_len = 1usize << tree.depth();
    check_len(n_len, leaves.len())?;
    if leaves.iter().flatten().any(|&v| !(v.is_finite() && v >= 0.0)) {
        return Err(CoreError::InvalidParameter("leaf likelihoods must be finite and non-negative".into()));
    }
    let tiny = leaves.iter().flatten().any(|&v| v > 0.0 && v < LOG_DOMAIN_THRESHOLD);
    let (domain, beliefs): (Domain, Vec<[f64; 4]>) = if tiny {
        (Domain::Log, leaves.iter().map(|l| l.map(f64::ln)).collect())
    } else {
        (Domain::Linear, leaves.to_vec())
    };
    let mut dec = Decoder {
        tree,
        domain,
        decide,
        u_hat: vec![PauliSymbol::I; n_len],
    };
    dec.run(0, 0, 0, &beliefs)?;
    Ok(dec.u_hat)
}

/// Standard SC decoding: frozen indices take `frozen_values`, others argmax.
pub fn sc_decode(spec: &PolarCodeSpec, leaves: &[[f64; 4]], frozen_values: &[(usize, PauliSymbol)]) -> Result<Vec<PauliSymbol>> {
    let n_len = spec.len();
    let mut frozen: Vec<Option<PauliSymbol>> = vec![None; n_len];
    for &(i, s) in frozen_values {
        if i >= n_len {
            return Err(CoreError::InvalidParameter(format!("frozen index {i} out of range")));
        }
        frozen[i] = Some(s);
    }
    let covered: Vec<usize> = (0..n_len).filter(|&i| frozen[i].is_some()).collect();
    if covered != spec.frozen() {
        return Err(CoreError::InvalidParameter("frozen values must cover the frozen set exactly".into()));
    }
    sc_decode_with(spec.tree(), leaves, |i, b| frozen[i].unwrap_or_else(|| argmax(b)))
}

fn sample_symbol(p: &PauliProbVec, rng: &mut StreamRng) -> PauliSymbol {
    let r: f64 = rng.random();
    let mut acc = 0.0;
    for s in PauliSymbol::ALL {
        acc += p.get(s);
        if r < acc {
            return s;
        }
    }
    // Rounding can leave `acc` just under 1; fall back to the last supported symbol.
    PauliSymbol::ALL
        .into_iter()
        .rev()
        .find(|&s| p.get(s) > 0.0)
        .unwrap_or(PauliSymbol::I)
}

/// Error pattern drawn i.i.d. from `p`.
pub fn sample_errors(p: &PauliProbVec, n_len: usize, rng: &mut StreamRng) -> Vec<PauliSymbol> {
    (0..n_len).map(|_| sample_symbol(p, rng)).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct BlockOutcome {
    pub success: bool,
    pub true_u: Vec<PauliSymbol>,
    /// `None` when the decoder's belief vanished.
    pub decoded_u: Option<Vec<PauliSymbol>>,
}

/// Decodes the inverse-transformed error pattern `e` with genie frozen values.
pub fn decode_error_pattern(spec: &PolarCodeSpec, p: &PauliProbVec, e: &[PauliSymbol]) -> Result<BlockOutcome> {
    let true_u = encode_inverse(spec.tree(), e)?;
    let leaves = vec![*p.as_array(); spec.len()];
    let frozen: Vec<(usize, PauliSymbol)> = spec.frozen().iter().map(|&i| (i, true_u[i])).collect();
    let decoded = sc_decode(spec, &leaves, &frozen).ok();
    let success = decoded
        .as_ref()
        .is_some_and(|d| spec.info().iter().all(|&i| d[i] == true_u[i]));
    Ok(BlockOutcome {
        success,
        true_u,
        decoded_u: decoded,
    })
}

pub fn simulate_block(spec: &PolarCodeSpec, p: &PauliProbVec, rng: &mut StreamRng) -> Result<BlockOutcome> {
    let e = sample_errors(p, spec.len(), rng);
    decode_error_pattern(spec, p, &e)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McResult {
    pub trials: u64,
    pub errors: u64,
    pub bler: f64,
    pub stderr: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<f64>,
}

impl McResult {
    fn from_counts(trials: u64, errors: u64, bound: Option<f64>) -> Self {
        let bler = errors as f64 / trials as f64;
        McResult {
            trials,
            errors,
            bler,
            stderr: (bler * (1.0 - bler) / trials as f64).sqrt(),
            bound,
        }
    }

    /// `bler ≤ bound + 3σ`; vacuous without a bound.
    pub fn within_bound(&self) -> bool {
        self.bound.is_none_or(|b| self.bler <= b + 3.0 * self.stderr)
    }
}

/// Block-error rate over `trials` independent blocks; trial `t` uses stream `(seed, t)`.
pub fn monte_carlo(spec: &PolarCodeSpec, p: &PauliProbVec, trials: u64, seed: u64, bound: Option<f64>) -> Result<McResult> {
    if trials == 0 {
        return Err(CoreError::InvalidParameter("trials must be at least 1".into()));
    }
    let errors = (0..trials)
        .into_par_iter()
        .map(|t| simulate_block(spec, p, &mut stream(seed, t)).map(|o| u64::from(!o.success)))
        .collect::<Result<Vec<u64>>>()?
        .into_iter()
        .sum();
    Ok(McResult::from_counts(trials, errors, bound))
}

/// Per-index decision error rates with every earlier symbol fed back from the truth.
pub fn genie_channel_error_rates(tree: &GateTree, p: &PauliProbVec, trials: u64, seed: u64) -> Result<Vec<f64>> {
    if trials == 0 {
        return Err(CoreError::InvalidParameter("trials must be at least 1".into()));
    }
    let n_len = 1usize << tree.depth();
    let per_trial = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream(seed, t);
            let e = sample_errors(p, n_len, &mut rng);
            let u = encode_inverse(tree, &e)?;
            let leaves = vec![*p.as_array(); n_len];
            let mut wrong = vec![0u32; n_len];
            sc_decode_with(tree, &leaves, |i, b| {
                wrong[i] = u32::from(argmax(b) != u[i]);
                u[i]
            })?;
            Ok(wrong)
        })
        .collect::<Result<Vec<Vec<u32>>>>()?;
    let mut counts = vec![0u64; n_len];
    for w in per_trial {
        for (c, x) in counts.iter_mut().zip(w) {
            *c += u64::from(x);
        }
    }
    Ok(counts.into_iter().map(|c| c as f64 / trials as f64).collect())
}

/// Exact rates of a `k`-block chain.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ChainRates {
    pub rate: Ratio<u64>,
    pub entanglement: Ratio<u64>,
}

/// `R = ((k−1)(|I|−|J|) + |I|) / (kN)` and `E = |J| / (kN)`.
pub fn chain_rates(k: u64, n_len: u64, info: u64, frozen: u64) -> Result<ChainRates> {
    if k == 0 {
        return Err(CoreError::InvalidParameter("chain length must be at least 1".into()));
    }
    if info + frozen != n_len {
        return Err(CoreError::InvalidParameter(format!("|I| + |J| = {} != N = {n_len}", info + frozen)));
    }
    if info < frozen {
        return Err(CoreError::ChainUndefined {
            info: info as usize,
            frozen: frozen as usize,
        });
    }
    let denom = k * n_len;
    Ok(ChainRates {
        rate: Ratio::new((k - 1) * (info - frozen) + info, denom),
        entanglement: Ratio::new(frozen, denom),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainResult {
    pub k: usize,
    pub trials: u64,
    pub chain_bler: f64,
    pub per_block_bler: Vec<f64>,
    /// Fraction of trials where the last block's chain-subset symbols were recovered.
    pub catalyst_ok: f64,
}

/// One chained trial: `(per-block success, last block chain subset recovered)`.
fn chain_trial(spec: &PolarCodeSpec, subset: &[usize], p: &PauliProbVec, k: usize, rng: &mut StreamRng) -> Result<(Vec<bool>, bool)> {
    let n_len = spec.len();
    let leaves = vec![*p.as_array(); n_len];
    // Residual Pauli error carried into the next block's frozen positions.
    let mut carry = vec![PauliSymbol::I; spec.frozen().len()];
    let mut ok = Vec::with_capacity(k);
    let mut catalyst = true;
    for _ in 0..k {
        let e = sample_errors(p, n_len, rng);
        let u = encode_inverse(spec.tree(), &e)?;
        let frozen: Vec<(usize, PauliSymbol)> = spec
            .frozen()
            .iter()
            .zip(&carry)
            .map(|(&i, &c)| (i, u[i] ^ c))
            .collect();
        match sc_decode(spec, &leaves, &frozen) {
            Ok(d) => {
                ok.push(spec.info().iter().all(|&i| d[i] == u[i]));
                carry = subset.iter().map(|&i| d[i] ^ u[i]).collect();
            }
            Err(CoreError::DecodeFailure { .. }) => {
                ok.push(false);
                // Nothing was recovered; treat every carried symbol as unknown.
                carry = subset.iter().map(|_| sample_symbol(&PauliProbVec::uniform(), rng)).collect();
            }
            Err(e) => return Err(e),
        }
        catalyst = carry.iter().all(|&c| c == PauliSymbol::I);
    }
    Ok((ok, catalyst))
}

/// `k` sequential blocks; block `l` receives its frozen values through block
/// `l − 1`'s decoded chain-subset symbols, so decoding errors propagate.
pub fn simulate_chain(spec: &PolarCodeSpec, p: &PauliProbVec, k: usize, trials: u64, seed: u64) -> Result<ChainResult> {
    let subset = spec
        .chain_subset()
        .ok_or_else(|| CoreError::InvalidCodeSpec("chaining needs a chain subset".into()))?;
    if k == 0 || trials == 0 {
        return Err(CoreError::InvalidParameter("k and trials must be at least 1".into()));
    }
    let results = (0..trials)
        .into_par_iter()
        .map(|t| chain_trial(spec, subset, p, k, &mut stream(seed, t)))
        .collect::<Result<Vec<_>>>()?;
    let mut block_err = vec![0u64; k];
    let (mut chain_err, mut cat_ok) = (0u64, 0u64);
    for (ok, cat) in &results {
        for (c, &b) in block_err.iter_mut().zip(ok) {
            *c += u64::from(!b);
        }
        chain_err += u64::from(ok.iter().any(|b| !b));
        cat_ok += u64::from(*cat);
    }
    let tf = trials as f64;
    Ok(ChainResult {
        k,
        trials,
        chain_bler: chain_err as f64 / tf,
        per_block_bler: block_err.iter().map(|&c| c as f64 / tf).collect(),
        catalyst_ok: cat_ok as f64 / tf,
    })
}
