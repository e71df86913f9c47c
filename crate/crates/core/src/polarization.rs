//! Recursive synthesis of polarized channels.
//!
//! Index convention: a synthesized index `i` of depth `n` has bits
//! `i₁…iₙ` with `i₁` the most significant. Bit 0 selects the bad channel and
//! bit 1 the good channel at the corresponding tree node. The node for prefix
//! `b₁…b_k` sits at heap position `2^k − 1 + value(b₁…b_k)`.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{combine_bad_cmp_pruned, combine_good_cmp_pruned, CmpChannel, Overflow, Pruning};
use crate::clifford::{Gate, GateSet};
use crate::error::{CoreError, Result};
use crate::permutation::PairPermutation;
use crate::rng::stream;

/// Default per-channel component cap.
pub const DEFAULT_CAP: usize = 1 << 20;

/// Largest pre-merge candidate count accepted per unit of cap.
const CANDIDATE_SLACK: usize = 4;

/// How gates are assigned to tree nodes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GatePolicy {
    Fixed(Gate),
    /// One gate per level, root level first.
    PerLevel(Vec<Gate>),
    /// Independent uniform draw per node, in heap order.
    Random { set: GateSet, seed: u64 },
}

impl GatePolicy {
    /// Parses `L`, `R`, `S3`, `all20` (random, with `seed`), `fixed:<gate>` or
    /// `levels:<g1>,<g2>,…`.
    pub fn parse(s: &str, seed: u64) -> Result<Self> {
        if let Some(name) = s.strip_prefix("fixed:") {
            return Ok(GatePolicy::Fixed(name.parse()?));
        }
        if let Some(list) = s.strip_prefix("levels:") {
            let gates = list.split(',').map(|g| g.trim().parse()).collect::<Result<Vec<Gate>>>()?;
            return Ok(GatePolicy::PerLevel(gates));
        }
        Ok(GatePolicy::Random {
            set: s.parse()?,
            seed,
        })
    }

    /// Inverse of [`GatePolicy::parse`], without the seed.
    pub fn label(&self) -> String {
        match self {
            GatePolicy::Fixed(g) => format!("fixed:{g}"),
            GatePolicy::PerLevel(gs) => {
                format!("levels:{}", gs.iter().map(|g| g.name()).collect::<Vec<_>>().join(","))
            }
            GatePolicy::Random { set, .. } => set.name().to_string(),
        }
    }
}

/// Complete binary tree of channel-combining gates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GateTree {
    depth: usize,
    gates: Vec<Gate>,
    gammas: Vec<PairPermutation>,
}

#[inline]
pub fn node_index(prefix_len: usize, prefix_value: usize) -> usize {
    (1usize << prefix_len) - 1 + prefix_value
}

impl GateTree {
    /// Builds a tree from explicit heap-ordered gates.
    pub fn from_gates(depth: usize, gates: Vec<Gate>) -> Result<Self> {
        let expected = (1usize << depth) - 1;
        if gates.len() != expected {
            return Err(CoreError::LengthMismatch {
                expected,
                got: gates.len(),
            });
        }
        let gammas = gates.iter().map(|g| g.gamma()).collect();
        Ok(GateTree { depth, gates, gammas })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    #[inline]
    pub fn gamma(&self, prefix_len: usize, prefix_value: usize) -> &PairPermutation {
        &self.gammas[node_index(prefix_len, prefix_value)]
    }

    /// Subtree rooted at the child reached by `bit`.
    pub fn child(&self, bit: usize) -> GateTree {
        assert!(self.depth >= 1);
        let mut gates = Vec::with_capacity((1 << (self.depth - 1)) - 1);
        for k in 1..self.depth {
            let half = 1usize << (k - 1);
            let base = node_index(k, bit * half);
            gates.extend_from_slice(&self.gates[base..base + half]);
        }
        GateTree::from_gates(self.depth - 1, gates).expect("subtree size")
    }
}

pub fn make_gate_tree(n: usize, policy: &GatePolicy) -> Result<GateTree> {
    if n == 0 {
        return Err(CoreError::InvalidParameter("tree depth must be at least 1".into()));
    }
    let count = (1usize << n) - 1;
    let gates = match policy {
        GatePolicy::Fixed(g) => vec![*g; count],
        GatePolicy::PerLevel(levels) => {
            if levels.len() != n {
                return Err(CoreError::LengthMismatch {
                    expected: n,
                    got: levels.len(),
                });
            }
            (0..n).flat_map(|k| std::iter::repeat_n(levels[k], 1 << k)).collect()
        }
        GatePolicy::Random { set, seed } => {
            let choices = set.gates();
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            (0..count).map(|_| choices[rng.random_range(0..choices.len())]).collect()
        }
    };
    GateTree::from_gates(n, gates)
}

/// Resource and pruning settings for synthesis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SynthesisOptions {
    /// Component weight threshold; `0` disables weight pruning.
    pub epsilon: f64,
    pub cap: usize,
    /// Reduction applied above the cap; `None` makes overflow an error.
    pub overflow: Option<Overflow>,
}

impl Default for SynthesisOptions {
    fn default() -> Self {
        SynthesisOptions {
            epsilon: 0.0,
            cap: DEFAULT_CAP,
            overflow: None,
        }
    }
}

impl SynthesisOptions {
    /// Weight pruning plus truncation to the heaviest `cap` components.
    pub fn pruned(epsilon: f64, cap: usize) -> Self {
        SynthesisOptions {
            epsilon,
            cap,
            overflow: Some(Overflow::Truncate),
        }
    }

    /// Degrading merges down to `cap` components; no mass is dropped.
    pub fn merged(cap: usize) -> Self {
        SynthesisOptions {
            epsilon: 0.0,
            cap,
            overflow: Some(Overflow::Merge),
        }
    }

    pub fn is_exact(&self) -> bool {
        self.epsilon <= 0.0 && self.overflow.is_none()
    }

    fn pruning(&self) -> Pruning {
        Pruning {
            epsilon: self.epsilon.max(0.0),
            max_components: self.overflow.map(|_| self.cap),
            overflow: self.overflow.unwrap_or(Overflow::Truncate),
        }
    }

    fn cap_error(&self, count: usize, prefix: &[u8]) -> CoreError {
        CoreError::ComponentCap {
            prefix: prefix.iter().map(|b| char::from(b'0' + b)).collect(),
            count,
            cap: self.cap,
        }
    }

    fn check(&self, ch: &CmpChannel, prefix: &[u8]) -> Result<()> {
        if ch.len() > self.cap {
            return Err(self.cap_error(ch.len(), prefix));
        }
        Ok(())
    }
}

/// One self-combining step. `prefix` names the child for error reports.
pub fn polarize_step(
    w: &CmpChannel,
    g: &PairPermutation,
    bit: u8,
    opts: &SynthesisOptions,
    prefix: &[u8],
) -> Result<CmpChannel> {
    let pruning = opts.pruning();
    if opts.overflow.is_none() {
        // Merging cannot be relied on to shrink generic mixtures, so refuse
        // steps whose candidate list alone is far beyond the cap.
        let candidates = w.len().saturating_mul(w.len()).saturating_mul(if bit == 0 { 1 } else { 4 });
        if candidates > opts.cap.saturating_mul(CANDIDATE_SLACK) {
            return Err(opts.cap_error(candidates, prefix));
        }
    }
    let child = if bit == 0 {
        combine_bad_cmp_pruned(w, w, g, &pruning)
    } else {
        combine_good_cmp_pruned(w, w, g, &pruning)
    };
    if opts.is_exact() {
        debug_check_step(w, g, bit, &child);
    }
    opts.check(&child, prefix)?;
    Ok(child)
}

#[cfg(debug_assertions)]
fn debug_check_step(w: &CmpChannel, g: &PairPermutation, bit: u8, child: &CmpChannel) {
    use crate::pauli::PauliSymbol;
    if bit == 1 {
        for d in PauliSymbol::ALL {
            let expect = w.z_d(g.a(PauliSymbol::I, d)) * w.z_d(g.b(PauliSymbol::I, d));
            debug_assert!((child.z_d(d) - expect).abs() < 1e-9, "good-step factorization");
        }
    } else {
        debug_assert!(child.z_bar() <= 4.0 * w.z_bar() + 1e-9, "bad-step Z̄ bound");
        debug_assert!(child.z() <= 12.0 * w.z() + 1e-9, "bad-step Z bound");
    }
}

#[cfg(not(debug_assertions))]
fn debug_check_step(_: &CmpChannel, _: &PairPermutation, _: u8, _: &CmpChannel) {}

/// Folds the recursion along `bits` (root first).
pub fn synthesize(w: &CmpChannel, tree: &GateTree, bits: &[u8], opts: &SynthesisOptions) -> Result<CmpChannel> {
    if bits.len() != tree.depth() {
        return Err(CoreError::LengthMismatch {
            expected: tree.depth(),
            got: bits.len(),
        });
    }
    let mut ch = w.clone();
    let mut value = 0usize;
    for (k, &b) in bits.iter().enumerate() {
        if b > 1 {
            return Err(CoreError::InvalidParameter(format!("index bit {b}")));
        }
        ch = polarize_step(&ch, tree.gamma(k, value), b, opts, &bits[..=k])?;
        value = (value << 1) | b as usize;
    }
    Ok(ch)
}

/// Bits of `index` at depth `n`, most significant first.
pub fn index_bits(index: usize, n: usize) -> Vec<u8> {
    (0..n).map(|k| ((index >> (n - 1 - k)) & 1) as u8).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexRecord {
    pub index: usize,
    pub z_d: [f64; 3],
    pub z: f64,
    pub z_upper: f64,
    pub mutual_info: f64,
    pub components: usize,
    pub pruned_mass: f64,
}

impl IndexRecord {
    fn from_channel(index: usize, ch: &CmpChannel) -> Self {
        IndexRecord {
            index,
            z_d: ch.z_vec(),
            z: ch.z(),
            z_upper: ch.z_upper(),
            mutual_info: ch.mutual_info(),
            components: ch.len(),
            pruned_mass: ch.pruned_mass(),
        }
    }
}

/// Endpoint fractions for a threshold `δ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolarizationSummary {
    pub delta: f64,
    pub mean_mutual_info: f64,
    pub fraction_good: f64,
    pub fraction_middle: f64,
    pub fraction_bad: f64,
    pub max_pruned_mass: f64,
}

fn summarize(delta: f64, mi: impl Iterator<Item = (f64, f64)>) -> PolarizationSummary {
    let (mut n, mut sum, mut good, mut mid, mut bad, mut pm) = (0usize, 0.0, 0usize, 0usize, 0usize, 0.0f64);
    for (m, p) in mi {
        n += 1;
        sum += m;
        pm = pm.max(p);
        if m >= 1.0 - delta {
            good += 1;
        } else if m <= delta {
            bad += 1;
        } else {
            mid += 1;
        }
    }
    let nf = n.max(1) as f64;
    PolarizationSummary {
        delta,
        mean_mutual_info: sum / nf,
        fraction_good: good as f64 / nf,
        fraction_middle: mid as f64 / nf,
        fraction_bad: bad as f64 / nf,
        max_pruned_mass: pm,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolarizationReport {
    pub n: usize,
    pub records: Vec<IndexRecord>,
    pub summary: PolarizationSummary,
}

impl PolarizationReport {
    pub fn z_values(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.z).collect()
    }
}

/// Synthesizes every index of the tree, level by level.
pub fn polarization_histogram(
    w: &CmpChannel,
    tree: &GateTree,
    delta: f64,
    opts: &SynthesisOptions,
) -> Result<PolarizationReport> {
    let n = tree.depth();
    let mut level = vec![w.clone()];
    for k in 0..n {
        let next: Vec<Result<[CmpChannel; 2]>> = level
            .par_iter()
            .enumerate()
            .map(|(value, ch)| {
                let g = tree.gamma(k, value);
                let mut prefix = index_bits(value, k);
                prefix.push(0);
                let bad = polarize_step(ch, g, 0, opts, &prefix)?;
                *prefix.last_mut().expect("non-empty prefix") = 1;
                let good = polarize_step(ch, g, 1, opts, &prefix)?;
                Ok([bad, good])
            })
            .collect();
        level = Vec::with_capacity(level.len() * 2);
        for pair in next {
            level.extend(pair?);
        }
    }
    let records: Vec<IndexRecord> = level
        .iter()
        .enumerate()
        .map(|(i, ch)| IndexRecord::from_channel(i, ch))
        .collect();
    let summary = summarize(delta, records.iter().map(|r| (r.mutual_info, r.pruned_mass)));
    Ok(PolarizationReport { n, records, summary })
}

/// One sampled trajectory at the target depth.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub z: f64,
    pub z_upper: f64,
    pub mutual_info: f64,
    pub pruned_mass: f64,
    pub components: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryReport {
    pub n: usize,
    pub samples: Vec<TrajectorySample>,
    pub summary: PolarizationSummary,
    /// Standard error of the mean of the mutual information.
    pub stderr_mutual_info: f64,
}

impl TrajectoryReport {
    pub fn fraction_z_below(&self, threshold: f64) -> f64 {
        let hits = self.samples.iter().filter(|s| s.z_upper < threshold).count();
        hits as f64 / self.samples.len().max(1) as f64
    }
}

/// Random walk down the synthesis tree with a fresh uniform gate and bit per step.
pub fn sample_trajectory(
    w: &CmpChannel,
    gates: &[Gate],
    n: usize,
    seed: u64,
    index: u64,
    opts: &SynthesisOptions,
) -> Result<TrajectorySample> {
    let mut rng = stream(seed, index);
    let mut ch = w.clone();
    let mut bits = Vec::with_capacity(n);
    for _ in 0..n {
        let g = gates[rng.random_range(0..gates.len())].gamma();
        let bit: u8 = rng.random_range(0..2);
        bits.push(bit);
        ch = polarize_step(&ch, &g, bit, opts, &bits)?;
    }
    Ok(TrajectorySample {
        z: ch.z(),
        z_upper: ch.z_upper(),
        mutual_info: ch.mutual_info(),
        pruned_mass: ch.pruned_mass(),
        components: ch.len(),
    })
}

pub fn mc_trajectory_z(
    w: &CmpChannel,
    set: GateSet,
    n: usize,
    trajectories: usize,
    seed: u64,
    delta: f64,
    opts: &SynthesisOptions,
) -> Result<TrajectoryReport> {
    if trajectories == 0 {
        return Err(CoreError::InvalidParameter("trajectories must be at least 1".into()));
    }
    let gates = set.gates();
    let samples: Vec<TrajectorySample> = (0..trajectories as u64)
        .into_par_iter()
        .map(|t| sample_trajectory(w, &gates, n, seed, t, opts))
        .collect::<Result<_>>()?;
    let summary = summarize(delta, samples.iter().map(|s| (s.mutual_info, s.pruned_mass)));
    let mean = summary.mean_mutual_info;
    let var = samples.iter().map(|s| (s.mutual_info - mean).powi(2)).sum::<f64>() / (samples.len().max(2) - 1) as f64;
    Ok(TrajectoryReport {
        n,
        stderr_mutual_info: (var / samples.len() as f64).sqrt(),
        samples,
        summary,
    })
}

/// Good-set selection rule.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Selection {
    Count(usize),
    Threshold(f64),
}

/// Returns `(info, frozen)`, both ascending.
pub fn select_good_set(z: &[f64], rule: Selection) -> Result<(Vec<usize>, Vec<usize>)> {
    let n = z.len();
    let mut info: Vec<usize> = match rule {
        Selection::Count(k) => {
            if k > n {
                return Err(CoreError::SelectionTooLarge { k, n });
            }
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| z[a].partial_cmp(&z[b]).expect("finite Z").then(a.cmp(&b)));
            order.truncate(k);
            order
        }
        Selection::Threshold(t) => (0..n).filter(|&i| z[i] <= t).collect(),
    };
    info.sort_unstable();
    let frozen = (0..n).filter(|i| info.binary_search(i).is_err()).collect();
    Ok((info, frozen))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeRow {
    pub n: usize,
    pub rate_hat: f64,
    pub bound: f64,
}

/// Empirical fast-polarization probe: for each depth, the fraction of
/// sampled channels whose `Z` (upper estimate) is at most `N^{-(1+θ)}`, and the
/// corresponding union bound `3 Σ Z` scaled to block length.
pub fn fast_polarization_probe(
    w: &CmpChannel,
    set: GateSet,
    n_list: &[usize],
    trajectories: usize,
    seed: u64,
    theta: f64,
    opts: &SynthesisOptions,
) -> Result<Vec<ProbeRow>> {
    n_list
        .iter()
        .map(|&n| {
            let rep = mc_trajectory_z(w, set, n, trajectories, seed, 0.01, opts)?;
            let big_n = (1u64 << n) as f64;
            let threshold = big_n.powf(-(1.0 + theta));
            let hits: Vec<f64> = rep
                .samples
                .iter()
                .map(|s| s.z_upper)
                .filter(|&z| z <= threshold)
                .collect();
            let t = trajectories as f64;
            Ok(ProbeRow {
                n,
                rate_hat: hits.len() as f64 / t,
                bound: 3.0 * big_n * hits.iter().sum::<f64>() / t,
            })
        })
        .collect()
}

/// Gate family for trajectory sampling: a set, or a single fixed gate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GateSetOrFixed {
    Set(GateSet),
    Fixed(Gate),
}

impl GateSetOrFixed {
    pub fn gates(&self) -> Vec<Gate> {
        match self {
            GateSetOrFixed::Set(s) => s.gates(),
            GateSetOrFixed::Fixed(g) => vec![*g],
        }
    }
}

impl fmt::Display for GateSetOrFixed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GateSetOrFixed::Set(s) => f.write_str(s.name()),
            GateSetOrFixed::Fixed(g) => write!(f, "fixed:{g}"),
        }
    }
}

impl FromStr for GateSetOrFixed {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self> {
        match s.strip_prefix("fixed:") {
            Some(g) => Ok(GateSetOrFixed::Fixed(g.parse()?)),
            None => Ok(GateSetOrFixed::Set(s.parse()?)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::PauliProbVec;

    #[test]
    fn tree_shapes() {
        let t = make_gate_tree(1, &GatePolicy::Fixed(Gate::L(1, 1))).unwrap();
        assert_eq!(t.gates().len(), 1);
        let a = make_gate_tree(3, &GatePolicy::Random { set: GateSet::S3, seed: 7 }).unwrap();
        let b = make_gate_tree(3, &GatePolicy::Random { set: GateSet::S3, seed: 7 }).unwrap();
        assert_eq!(a.gates().len(), 7);
        assert_eq!(a, b);
        let c = make_gate_tree(3, &GatePolicy::PerLevel(vec![Gate::Identity, Gate::Swap, Gate::L(1, 1)])).unwrap();
        assert_eq!(c.gates()[0], Gate::Identity);
        assert_eq!(&c.gates()[1..3], &[Gate::Swap; 2]);
        assert_eq!(&c.gates()[3..], &[Gate::L(1, 1); 4]);
        assert!(make_gate_tree(0, &GatePolicy::Fixed(Gate::Identity)).is_err());
    }

    #[test]
    fn child_subtrees_follow_heap_layout() {
        let gates: Vec<Gate> = GateSet::All20.gates().into_iter().cycle().take(15).collect();
        let t = GateTree::from_gates(4, gates.clone()).unwrap();
        let c1 = t.child(1);
        assert_eq!(c1.gates()[0], gates[2]);
        assert_eq!(&c1.gates()[1..3], &gates[5..7]);
        assert_eq!(&c1.gates()[3..7], &gates[11..15]);
        let c0 = t.child(0);
        assert_eq!(&c0.gates()[3..7], &gates[7..11]);
    }

    #[test]
    fn policy_labels_roundtrip() {
        for s in ["S3", "all20", "fixed:R23", "levels:L11,S,I"] {
            assert_eq!(GatePolicy::parse(s, 1).unwrap().label(), s);
        }
        assert!(GatePolicy::parse("bogus", 1).is_err());
    }

    #[test]
    fn good_step_reproduces_table_row() {
        let w = CmpChannel::pauli(PauliProbVec::new([0.7, 0.15, 0.1, 0.05]).unwrap());
        let t = make_gate_tree(1, &GatePolicy::Fixed(Gate::L(1, 1))).unwrap();
        let g = synthesize(&w, &t, &[1], &SynthesisOptions::default()).unwrap();
        let z = w.z_vec();
        let zg = g.z_vec();
        assert!((zg[0] - z[0] * z[0]).abs() < 1e-12);
        assert!((zg[1] - z[0] * z[1]).abs() < 1e-12);
        assert!((zg[2] - z[2]).abs() < 1e-12);
    }

    #[test]
    fn cap_error_names_prefix() {
        let w = CmpChannel::pauli(PauliProbVec::new([0.6, 0.2, 0.15, 0.05]).unwrap());
        let t = make_gate_tree(3, &GatePolicy::Fixed(Gate::L(2, 2))).unwrap();
        let err = synthesize(&w, &t, &[1, 1, 1], &SynthesisOptions { cap: 8, ..Default::default() }).unwrap_err();
        match err {
            CoreError::ComponentCap { prefix, .. } => assert!(prefix.starts_with('1')),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn selection_rules() {
        let z = [0.5, 0.1, 0.1, 0.9];
        assert_eq!(select_good_set(&z, Selection::Count(2)).unwrap(), (vec![1, 2], vec![0, 3]));
        assert_eq!(select_good_set(&z, Selection::Count(0)).unwrap(), (vec![], vec![0, 1, 2, 3]));
        assert_eq!(select_good_set(&z, Selection::Threshold(0.5)).unwrap().0, vec![0, 1, 2]);
        assert!(select_good_set(&z, Selection::Count(5)).is_err());
    }

    #[test]
    fn noiseless_everything_good() {
        let t = make_gate_tree(3, &GatePolicy::Random { set: GateSet::All20, seed: 3 }).unwrap();
        let rep = polarization_histogram(&CmpChannel::noiseless(), &t, 0.01, &SynthesisOptions::default()).unwrap();
        assert!(rep.records.iter().all(|r| r.mutual_info == 1.0));
        let (info, frozen) = select_good_set(&rep.z_values(), Selection::Count(8)).unwrap();
        assert_eq!(info.len(), 8);
        assert!(frozen.is_empty());
    }
}
