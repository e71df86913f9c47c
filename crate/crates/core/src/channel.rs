//! Pauli channels, classical mixtures of Pauli channels and their quaternary
//! classical counterparts.
//!
//! A [`CmpChannel`] may carry total weight below one after pruning. The
//! missing mass is reported as [`CmpChannel::pruned_mass`]; normalized metrics
//! divide by the kept weight, and `*_upper` metrics charge the missing mass
//! at the worst value.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::pauli::PauliSymbol;
use crate::permutation::PairPermutation;

const PROB_TOL: f64 = 1e-12;
const QUANT: f64 = 1e12;

/// Binary-log Shannon entropy with `0 log 0 = 0`.
pub fn entropy(p: &[f64]) -> f64 {
    p.iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| -x * x.log2())
        .sum()
}

#[inline]
fn affinity(p: &[f64; 4], d: usize) -> f64 {
    (0..4).map(|s| (p[s] * p[s ^ d]).sqrt()).sum()
}

/// Probability vector of a Pauli channel, indexed by [`PauliSymbol`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PauliProbVec {
    p: [f64; 4],
}

impl PauliProbVec {
    pub fn new(p: [f64; 4]) -> Result<Self> {
        if p.iter().any(|&x| !x.is_finite() || x < 0.0) {
            return Err(CoreError::InvalidProbabilities(format!("negative or non-finite entry in {p:?}")));
        }
        let s: f64 = p.iter().sum();
        if (s - 1.0).abs() > PROB_TOL {
            return Err(CoreError::InvalidProbabilities(format!("entries sum to {s}")));
        }
        Ok(PauliProbVec { p })
    }

    pub fn noiseless() -> Self {
        PauliProbVec { p: [1.0, 0.0, 0.0, 0.0] }
    }

    pub fn uniform() -> Self {
        PauliProbVec { p: [0.25; 4] }
    }

    pub fn depolarizing(q: f64) -> Result<Self> {
        Self::new([1.0 - q, q / 3.0, q / 3.0, q / 3.0])
    }

    pub fn dephasing(q: f64) -> Result<Self> {
        Self::new([1.0 - q, 0.0, 0.0, q])
    }

    pub fn bitflip(q: f64) -> Result<Self> {
        Self::new([1.0 - q, q, 0.0, 0.0])
    }

    #[inline]
    pub fn get(&self, s: PauliSymbol) -> f64 {
        self.p[s.index()]
    }

    pub fn as_array(&self) -> &[f64; 4] {
        &self.p
    }

    pub fn z_d(&self, d: PauliSymbol) -> f64 {
        affinity(&self.p, d.index())
    }

    /// `1 - h(p)`.
    pub fn coherent_info(&self) -> f64 {
        1.0 - entropy(&self.p)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub weight: f64,
    pub p: [f64; 4],
}

/// Classical mixture of Pauli channels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CmpChannel {
    components: Vec<Component>,
}

/// What to do when a mixture has more than `max_components` components.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Overflow {
    /// Keep the heaviest components; the rest counts as pruned mass.
    Truncate,
    /// Greedily merge components with the smallest information loss. Merging
    /// degrades the channel, so `Z` can only go up and `I` only down.
    Merge,
}

/// Pruning policy applied after each combining step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pruning {
    /// Components (and candidate pairs) below this weight are dropped.
    pub epsilon: f64,
    pub max_components: Option<usize>,
    pub overflow: Overflow,
}

impl Pruning {
    pub const OFF: Pruning = Pruning {
        epsilon: 0.0,
        max_components: None,
        overflow: Overflow::Truncate,
    };

    pub fn is_off(&self) -> bool {
        self.epsilon <= 0.0 && self.max_components.is_none()
    }
}

impl Default for Pruning {
    fn default() -> Self {
        Pruning::OFF
    }
}

fn quantize(p: &[f64; 4]) -> [i64; 4] {
    p.map(|x| (x * QUANT).round() as i64)
}

#[inline]
fn translate(p: &[f64; 4], t: usize) -> [f64; 4] {
    [p[t], p[1 ^ t], p[2 ^ t], p[3 ^ t]]
}

/// Representative of `p` modulo output relabelling `σ ↦ σ ⊕ t`.
/// Every functional in this module is invariant under that relabelling.
fn canonical_translate(p: &[f64; 4]) -> ([i64; 4], [f64; 4]) {
    let mut best = (quantize(p), *p);
    for t in 1..4 {
        let q = translate(p, t);
        let k = quantize(&q);
        if k > best.0 {
            best = (k, q);
        }
    }
    best
}

impl CmpChannel {
    pub fn new(components: Vec<(f64, [f64; 4])>) -> Result<Self> {
        if components.is_empty() {
            return Err(CoreError::InvalidProbabilities("empty mixture".into()));
        }
        let mut out = Vec::with_capacity(components.len());
        for (w, p) in components {
            if !(w.is_finite() && w >= 0.0) {
                return Err(CoreError::InvalidProbabilities(format!("bad weight {w}")));
            }
            PauliProbVec::new(p)?;
            if w > 0.0 {
                out.push(Component { weight: w, p });
            }
        }
        let total: f64 = out.iter().map(|c| c.weight).sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(CoreError::InvalidProbabilities(format!("weights sum to {total}")));
        }
        Ok(CmpChannel { components: out }.canonical())
    }

    pub fn pauli(p: PauliProbVec) -> Self {
        CmpChannel {
            components: vec![Component {
                weight: 1.0,
                p: p.p,
            }],
        }
        .canonical()
    }

    pub fn noiseless() -> Self {
        Self::pauli(PauliProbVec::noiseless())
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Sum of kept weights; below one only after pruning.
    pub fn total_weight(&self) -> f64 {
        self.components.iter().map(|c| c.weight).sum()
    }

    pub fn pruned_mass(&self) -> f64 {
        (1.0 - self.total_weight()).max(0.0)
    }

    /// Canonical form: translate-reduce each vector, merge equal quantized
    /// vectors (weighted mean) and sort ascending by quantized vector.
    pub fn canonical(self) -> Self {
        let mut keyed: Vec<([i64; 4], Component)> = self
            .components
            .into_iter()
            .filter(|c| c.weight > 0.0)
            .map(|c| {
                let (k, p) = canonical_translate(&c.p);
                (k, Component { weight: c.weight, p })
            })
            .collect();
        keyed.sort_by_key(|a| a.0);
        let mut merged: Vec<Component> = Vec::with_capacity(keyed.len());
        let mut last: Option<[i64; 4]> = None;
        for (k, c) in keyed {
            if last == Some(k) {
                let m = merged.last_mut().expect("non-empty after first key");
                let w = m.weight + c.weight;
                for s in 0..4 {
                    m.p[s] = (m.p[s] * m.weight + c.p[s] * c.weight) / w;
                }
                m.weight = w;
            } else {
                merged.push(c);
                last = Some(k);
            }
        }
        CmpChannel { components: merged }
    }

    fn prune(mut self, pruning: &Pruning) -> Self {
        if pruning.epsilon > 0.0 {
            self.components.retain(|c| c.weight >= pruning.epsilon);
        }
        match pruning.max_components {
            Some(cap) if self.components.len() > cap => match pruning.overflow {
                Overflow::Truncate => self.truncate_heaviest(cap),
                Overflow::Merge => self.degrade_to(cap),
            },
            _ => self,
        }
    }

    fn truncate_heaviest(mut self, cap: usize) -> Self {
        // Ties resolve on the canonical order.
        let mut order: Vec<usize> = (0..self.components.len()).collect();
        order.sort_by(|&a, &b| {
            self.components[b]
                .weight
                .partial_cmp(&self.components[a].weight)
                .expect("finite weights")
                .then(a.cmp(&b))
        });
        let mut keep = order[..cap].to_vec();
        keep.sort_unstable();
        self.components = keep.into_iter().map(|i| self.components[i]).collect();
        self
    }

    /// Merges neighbours (in entropy order) until at most `cap` remain,
    /// always taking the pair whose merge loses the least coherent information.
    pub fn degrade_to(self, cap: usize) -> Self {
        let cap = cap.max(1);
        let mut items: Vec<(f64, Component)> = self
            .components
            .into_iter()
            .map(|c| (entropy(&c.p), c))
            .collect();
        if items.len() <= cap {
            return CmpChannel {
                components: items.into_iter().map(|(_, c)| c).collect(),
            };
        }
        items.sort_by(|a, b| {
            a.0.partial_cmp(&b.0)
                .expect("finite entropy")
                .then_with(|| quantize(&a.1.p).cmp(&quantize(&b.1.p)))
        });
        let len = items.len();
        let mut comps: Vec<Component> = items.iter().map(|(_, c)| *c).collect();
        let mut ent: Vec<f64> = items.iter().map(|(h, _)| *h).collect();
        let mut next: Vec<usize> = (1..=len).collect();
        let mut prev: Vec<usize> = (0..len).map(|i| i.wrapping_sub(1)).collect();
        let mut alive = vec![true; len];
        let mut version = vec![0u32; len];
        let mut heap = std::collections::BinaryHeap::new();

        let merged = |a: &Component, b: &Component| {
            let w = a.weight + b.weight;
            let mut p = [0.0; 4];
            for s in 0..4 {
                p[s] = (a.p[s] * a.weight + b.p[s] * b.weight) / w;
            }
            Component { weight: w, p }
        };
        let cost = |a: &Component, ha: f64, b: &Component, hb: f64| {
            let m = merged(a, b);
            (m.weight * entropy(&m.p) - a.weight * ha - b.weight * hb).max(0.0)
        };
        for i in 0..len - 1 {
            heap.push(MergeCandidate {
                cost: cost(&comps[i], ent[i], &comps[i + 1], ent[i + 1]),
                left: i,
                versions: (0, 0),
            });
        }
        let mut count = len;
        while count > cap {
            let cand = heap.pop().expect("candidates remain while count > cap");
            let l = cand.left;
            let r = next[l];
            if !alive[l] || r >= len || !alive[r] || cand.versions != (version[l], version[r]) {
                continue;
            }
            comps[l] = merged(&comps[l], &comps[r]);
            ent[l] = entropy(&comps[l].p);
            version[l] += 1;
            alive[r] = false;
            next[l] = next[r];
            if next[l] < len {
                prev[next[l]] = l;
            }
            count -= 1;
            let pl = prev[l];
            if pl < len {
                heap.push(MergeCandidate {
                    cost: cost(&comps[pl], ent[pl], &comps[l], ent[l]),
                    left: pl,
                    versions: (version[pl], version[l]),
                });
            }
            let nl = next[l];
            if nl < len {
                heap.push(MergeCandidate {
                    cost: cost(&comps[l], ent[l], &comps[nl], ent[nl]),
                    left: l,
                    versions: (version[l], version[nl]),
                });
            }
        }
        let kept: Vec<Component> = (0..len).filter(|&i| alive[i]).map(|i| comps[i]).collect();
        CmpChannel { components: kept }.canonical()
    }

    /// Unnormalized `Σ_x λ_x Z_d(p^x)`.
    fn z_d_raw(&self, d: usize) -> f64 {
        self.components.iter().map(|c| c.weight * affinity(&c.p, d)).sum()
    }

    pub fn z_d(&self, d: PauliSymbol) -> f64 {
        if d.value() == 0 {
            return 1.0;
        }
        self.z_d_raw(d.index()) / self.total_weight()
    }

    /// `(Z₁, Z₂, Z₃)`.
    pub fn z_vec(&self) -> [f64; 3] {
        let t = self.total_weight();
        [1, 2, 3].map(|d| self.z_d_raw(d) / t)
    }

    pub fn z(&self) -> f64 {
        self.z_vec().iter().sum::<f64>() / 3.0
    }

    pub fn z_bar(&self) -> f64 {
        self.z_vec().into_iter().fold(0.0, f64::max)
    }

    /// Upper bound on `Z` accounting for pruned mass at `Z = 1`.
    pub fn z_upper(&self) -> f64 {
        let raw: f64 = (1..4).map(|d| self.z_d_raw(d)).sum::<f64>() / 3.0;
        (raw + self.pruned_mass()).min(1.0)
    }

    pub fn coherent_info(&self) -> f64 {
        let raw: f64 = self
            .components
            .iter()
            .map(|c| c.weight * (1.0 - entropy(&c.p)))
            .sum();
        raw / self.total_weight()
    }

    /// Uniform-input mutual information of the classical counterpart, `(1 + I) / 2`.
    pub fn mutual_info(&self) -> f64 {
        (1.0 + self.coherent_info()) / 2.0
    }
}

/// Min-heap entry for [`CmpChannel::degrade_to`].
#[derive(Clone, Copy, Debug)]
struct MergeCandidate {
    cost: f64,
    left: usize,
    versions: (u32, u32),
}

impl PartialEq for MergeCandidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other).is_eq()
    }
}

impl Eq for MergeCandidate {}

impl PartialOrd for MergeCandidate {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for MergeCandidate {
    // Reversed so that `BinaryHeap` pops the cheapest, leftmost candidate.
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.left.cmp(&self.left))
    }
}

/// `Γ` as two 4×4 lookup tables.
fn split_tables(g: &PairPermutation) -> ([[usize; 4]; 4], [[usize; 4]; 4]) {
    let mut a = [[0usize; 4]; 4];
    let mut b = [[0usize; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            let code = g.apply_code(4 * i + j);
            a[i][j] = code >> 2;
            b[i][j] = code & 3;
        }
    }
    (a, b)
}

/// Bad channel `N ⊠_Γ M` of two CMP channels.
pub fn combine_bad_cmp(n: &CmpChannel, m: &CmpChannel, g: &PairPermutation) -> CmpChannel {
    combine_bad_cmp_pruned(n, m, g, &Pruning::OFF)
}

pub fn combine_bad_cmp_pruned(n: &CmpChannel, m: &CmpChannel, g: &PairPermutation, pruning: &Pruning) -> CmpChannel {
    let (ta, tb) = split_tables(g);
    let mut out = Vec::with_capacity(n.len() * m.len());
    for cx in &n.components {
        for cy in &m.components {
            let w = cx.weight * cy.weight;
            if w < pruning.epsilon || w == 0.0 {
                continue;
            }
            let mut s = [0.0; 4];
            for (i, si) in s.iter_mut().enumerate() {
                *si = (0..4).map(|j| cx.p[ta[i][j]] * cy.p[tb[i][j]]).sum();
            }
            out.push(Component { weight: w, p: s });
        }
    }
    CmpChannel { components: out }.canonical().prune(pruning)
}

/// Good channel `N ⊛_Γ M` of two CMP channels.
pub fn combine_good_cmp(n: &CmpChannel, m: &CmpChannel, g: &PairPermutation) -> CmpChannel {
    combine_good_cmp_pruned(n, m, g, &Pruning::OFF)
}

pub fn combine_good_cmp_pruned(n: &CmpChannel, m: &CmpChannel, g: &PairPermutation, pruning: &Pruning) -> CmpChannel {
    let (ta, tb) = split_tables(g);
    let mut out = Vec::with_capacity(4 * n.len() * m.len());
    for cx in &n.components {
        for cy in &m.components {
            let w = cx.weight * cy.weight;
            if w == 0.0 {
                continue;
            }
            for i in 0..4 {
                let mut t = [0.0; 4];
                for (j, tj) in t.iter_mut().enumerate() {
                    *tj = cx.p[ta[i][j]] * cy.p[tb[i][j]];
                }
                let s: f64 = t.iter().sum();
                let wi = w * s;
                if s <= 0.0 || wi < pruning.epsilon {
                    continue;
                }
                for tj in t.iter_mut() {
                    *tj /= s;
                }
                out.push(Component { weight: wi, p: t });
            }
        }
    }
    CmpChannel { components: out }.canonical().prune(pruning)
}

/// Quaternary discrete memoryless channel; `columns[y][x] = W(y | x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuaternaryDmc {
    columns: Vec<[f64; 4]>,
}

impl QuaternaryDmc {
    pub fn new(columns: Vec<[f64; 4]>) -> Result<Self> {
        for x in 0..4 {
            let s: f64 = columns.iter().map(|c| c[x]).sum();
            if (s - 1.0).abs() > 1e-10 {
                return Err(CoreError::InvalidProbabilities(format!("row {x} sums to {s}")));
            }
        }
        if columns.iter().flatten().any(|&v| v < 0.0 || !v.is_finite()) {
            return Err(CoreError::InvalidProbabilities("negative transition".into()));
        }
        Ok(QuaternaryDmc { columns })
    }

    pub fn columns(&self) -> &[[f64; 4]] {
        &self.columns
    }

    pub fn outputs(&self) -> usize {
        self.columns.len()
    }

    #[inline]
    pub fn w(&self, y: usize, x: PauliSymbol) -> f64 {
        self.columns[y][x.index()]
    }

    /// `Z_d(W) = 1/4 Σ_u Σ_y √(W(y|u) W(y|u⊕d))`.
    pub fn z_d(&self, d: PauliSymbol) -> f64 {
        let d = d.index();
        let mut acc = 0.0;
        for u in 0..4 {
            for col in &self.columns {
                acc += (col[u] * col[u ^ d]).sqrt();
            }
        }
        acc / 4.0
    }

    pub fn z(&self) -> f64 {
        (1..4).map(|d| self.z_d(PauliSymbol::new(d))).sum::<f64>() / 3.0
    }

    /// Uniform-input mutual information in units of `log 4`, so a noiseless
    /// channel scores 1.
    pub fn mutual_info(&self) -> f64 {
        let mut acc = 0.0;
        for col in &self.columns {
            let py: f64 = col.iter().sum::<f64>() / 4.0;
            for &w in col {
                if w > 0.0 {
                    acc += 0.125 * w * (w / py).log2();
                }
            }
        }
        acc
    }

    /// Canonical column multiset: zero columns dropped, proportional columns
    /// summed, then sorted.
    fn canonical_columns(&self, row_shift: usize) -> Vec<[f64; 4]> {
        const KEY: f64 = 1e9;
        let mut groups: HashMap<[i64; 4], [f64; 4]> = HashMap::new();
        for col in &self.columns {
            let col = translate(col, row_shift);
            let s: f64 = col.iter().sum();
            if s <= 1e-15 {
                continue;
            }
            let key = col.map(|v| (v / s * KEY).round() as i64);
            let e = groups.entry(key).or_insert([0.0; 4]);
            for x in 0..4 {
                e[x] += col[x];
            }
        }
        let mut cols: Vec<[f64; 4]> = groups.into_values().collect();
        cols.sort_by(|a, b| {
            a.iter()
                .zip(b)
                .map(|(x, y)| x.partial_cmp(y).expect("finite"))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        cols
    }
}

/// Classical counterpart: outputs `(x, i)` with `W(x, i | j) = λ_x p^x_{i⊕j}`.
pub fn classical_counterpart(ch: &CmpChannel) -> QuaternaryDmc {
    let total = ch.total_weight();
    let mut columns = Vec::with_capacity(4 * ch.len());
    for c in ch.components() {
        for i in 0..4 {
            let mut col = [0.0; 4];
            for (j, v) in col.iter_mut().enumerate() {
                *v = c.weight / total * c.p[i ^ j];
            }
            columns.push(col);
        }
    }
    QuaternaryDmc { columns }
}

/// Generic channel combining on transition tables.
///
/// Bad output `(a, b)`, good output `(a, b, u)`; indices are row-major.
pub fn combine_generic(n: &QuaternaryDmc, m: &QuaternaryDmc, g: &PairPermutation) -> (QuaternaryDmc, QuaternaryDmc) {
    let (ta, tb) = split_tables(g);
    let mut bad = Vec::with_capacity(n.outputs() * m.outputs());
    let mut good = Vec::with_capacity(4 * n.outputs() * m.outputs());
    for cn in &n.columns {
        for cm in &m.columns {
            let mut col = [0.0; 4];
            for (u, cu) in col.iter_mut().enumerate() {
                *cu = (0..4).map(|v| cn[ta[u][v]] * cm[tb[u][v]]).sum::<f64>() / 4.0;
            }
            bad.push(col);
            for u in 0..4 {
                let mut gcol = [0.0; 4];
                for (v, gv) in gcol.iter_mut().enumerate() {
                    *gv = cn[ta[u][v]] * cm[tb[u][v]] / 4.0;
                }
                good.push(gcol);
            }
        }
    }
    (QuaternaryDmc { columns: bad }, QuaternaryDmc { columns: good })
}

/// Equality up to output relabelling, merging of proportional outputs and
/// input translation.
pub fn channels_equivalent(a: &QuaternaryDmc, b: &QuaternaryDmc) -> bool {
    const TOL: f64 = 1e-9;
    let cb = b.canonical_columns(0);
    (0..4).any(|t| {
        let ca = a.canonical_columns(t);
        ca.len() == cb.len()
            && ca
                .iter()
                .zip(&cb)
                .all(|(x, y)| x.iter().zip(y).all(|(p, q)| (p - q).abs() <= TOL))
    })
}

/// Channel description accepted in configuration files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelLiteral {
    Pauli([f64; 4]),
    Cmp(Vec<(f64, [f64; 4])>),
}

impl ChannelLiteral {
    pub fn to_channel(&self) -> Result<CmpChannel> {
        match self {
            ChannelLiteral::Pauli(p) => Ok(CmpChannel::pauli(PauliProbVec::new(*p)?)),
            ChannelLiteral::Cmp(c) => CmpChannel::new(c.clone()),
        }
    }
}

/// Named single-parameter channel family, e.g. `depolarizing(0.05)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Preset {
    Depolarizing(f64),
    Dephasing(f64),
    Bitflip(f64),
}

impl Preset {
    pub fn vector(&self) -> Result<PauliProbVec> {
        match *self {
            Preset::Depolarizing(q) => PauliProbVec::depolarizing(q),
            Preset::Dephasing(q) => PauliProbVec::dephasing(q),
            Preset::Bitflip(q) => PauliProbVec::bitflip(q),
        }
    }
}

impl FromStr for Preset {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || CoreError::ChannelSyntax(s.to_string());
        let s = s.trim();
        let open = s.find('(').ok_or_else(bad)?;
        let arg = s[open + 1..].strip_suffix(')').ok_or_else(bad)?;
        let q: f64 = arg.trim().parse().map_err(|_| bad())?;
        if !(0.0..=1.0).contains(&q) {
            return Err(bad());
        }
        match &s[..open] {
            "depolarizing" => Ok(Preset::Depolarizing(q)),
            "dephasing" => Ok(Preset::Dephasing(q)),
            "bitflip" => Ok(Preset::Bitflip(q)),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Preset::Depolarizing(q) => write!(f, "depolarizing({q})"),
            Preset::Dephasing(q) => write!(f, "dephasing({q})"),
            Preset::Bitflip(q) => write!(f, "bitflip({q})"),
        }
    }
}
