use std::fs;
use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use serde::Serialize;

use qpolar_core::channel::{ChannelLiteral, CmpChannel, PauliProbVec, Preset};
use qpolar_core::clifford::{
    classify_cosets, enumerate_clifford_actions, enumerate_single_qubit_actions, local_group, Gate, GateSet,
};
use qpolar_core::codec::{chain_rates, genie_channel_error_rates, monte_carlo, simulate_chain, CodeSpecFile, PolarCodeSpec};
use qpolar_core::polarization::{
    fast_polarization_probe, make_gate_tree, mc_trajectory_z, polarization_histogram, select_good_set, GatePolicy,
    Selection, SynthesisOptions, DEFAULT_CAP,
};
use qpolar_verify::lemmas::{verify_lemma, verify_lemmas, GroupContext, Lemma};

use crate::output::Sink;
use crate::{
    BoundMode, ChainArgs, Cli, CliffordsAction, Command, ConstructArgs, Method, Mode, Outcome, PolarizeArgs, ProbeArgs,
    SimulateArgs, SynthArgs, VerifyArgs,
};

pub fn run(cli: &Cli) -> Result<Outcome> {
    let sink = Sink::new(cli.out.as_deref());
    match &cli.command {
        Command::Cliffords { action } => cliffords(action, &sink),
        Command::Verify(a) => verify(a, cli.seed, &sink),
        Command::Polarize(a) => polarize(a, cli.seed, &sink),
        Command::Construct(a) => construct(a, cli.seed, &sink),
        Command::Simulate(a) => simulate(a, cli.seed, &sink),
        Command::Chain(a) => chain(a, cli.seed, &sink),
        Command::ProbeFast(a) => probe(a, cli.seed, &sink),
    }
}

/// A preset such as `depolarizing(0.05)`, a JSON literal, or a file holding one.
pub fn parse_channel(s: &str) -> Result<CmpChannel> {
    let s = s.trim();
    if let Ok(preset) = s.parse::<Preset>() {
        return Ok(CmpChannel::pauli(preset.vector()?));
    }
    literal(s)?.to_channel().map_err(Into::into)
}

/// Like [`parse_channel`] but only single Pauli channels; the decoder needs one.
pub fn parse_pauli(s: &str) -> Result<PauliProbVec> {
    let s = s.trim();
    if let Ok(preset) = s.parse::<Preset>() {
        return Ok(preset.vector()?);
    }
    match literal(s)? {
        ChannelLiteral::Pauli(p) => Ok(PauliProbVec::new(p)?),
        ChannelLiteral::Cmp(c) if c.len() == 1 => Ok(PauliProbVec::new(c[0].1)?),
        ChannelLiteral::Cmp(_) => bail!("decoding needs a single Pauli channel, not a mixture"),
    }
}

fn literal(s: &str) -> Result<ChannelLiteral> {
    let text = if s.starts_with('{') {
        s.to_string()
    } else {
        fs::read_to_string(s).with_context(|| format!("channel `{s}` is neither a preset, JSON, nor a readable file"))?
    };
    serde_json::from_str(&text).with_context(|| format!("parsing channel `{s}`"))
}

fn synthesis_options(a: &SynthArgs, default_mode: Mode, default_cap: usize) -> Result<SynthesisOptions> {
    let cap = a.cap.unwrap_or(default_cap);
    ensure!(cap >= 1, "--cap must be at least 1");
    Ok(match a.mode.unwrap_or(default_mode) {
        Mode::Exact => SynthesisOptions {
            cap,
            ..SynthesisOptions::default()
        },
        Mode::Merged => SynthesisOptions::merged(cap),
        Mode::Pruned => SynthesisOptions::pruned(a.epsilon, cap),
    })
}

fn read_spec(path: &Path) -> Result<PolarCodeSpec> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let file: CodeSpecFile = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok(PolarCodeSpec::from_file(&file)?)
}

#[derive(Serialize)]
struct TableRow {
    index: usize,
    bits: [u8; 5],
}

#[derive(Serialize)]
struct Enumeration {
    one_qubit: usize,
    two_qubit: usize,
    local: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    table: Option<Vec<TableRow>>,
}

#[derive(Serialize)]
struct CosetCell {
    class: usize,
    size: usize,
    representative: String,
    representative_index: usize,
}

#[derive(Serialize)]
struct Classification {
    classes: usize,
    class_size: usize,
    cells: Vec<CosetCell>,
}

#[derive(Serialize)]
struct GammaRow {
    u: char,
    v: char,
    a: char,
    b: char,
}

fn cliffords(action: &CliffordsAction, sink: &Sink) -> Result<Outcome> {
    match action {
        CliffordsAction::Enumerate { table } => {
            let all = enumerate_clifford_actions();
            let e = Enumeration {
                one_qubit: enumerate_single_qubit_actions(0).len(),
                two_qubit: all.len(),
                local: local_group().len(),
                table: table.then(|| {
                    all.iter()
                        .enumerate()
                        .map(|(index, c)| TableRow { index, bits: c.to_bits() })
                        .collect()
                }),
            };
            sink.json(&e)?;
            sink.summary(format!("{} one-qubit, {} two-qubit, {} local actions", e.one_qubit, e.two_qubit, e.local));
        }
        CliffordsAction::Classify => {
            let all = enumerate_clifford_actions();
            let cls = classify_cosets(&all)?;
            let cells: Vec<CosetCell> = cls
                .classes
                .iter()
                .zip(&cls.representatives)
                .zip(&cls.representative_gates)
                .enumerate()
                .map(|(class, ((cell, rep), gate))| CosetCell {
                    class,
                    size: cell.len(),
                    representative: gate.name(),
                    representative_index: all.binary_search(rep).expect("representative is a group element"),
                })
                .collect();
            let size = cells.first().map_or(0, |c| c.size);
            ensure!(cells.iter().all(|c| c.size == size), "coset cells differ in size");
            sink.json(&Classification {
                classes: cells.len(),
                class_size: size,
                cells,
            })?;
            sink.summary(format!("{} classes × {size}", cls.classes.len()));
        }
        CliffordsAction::Gamma { set, name } => {
            let set: GateSet = set.parse()?;
            let gate: Gate = name.parse()?;
            ensure!(set.gates().contains(&gate), "gate {gate} is not in set {}", set.name());
            let g = gate.gamma();
            let rows = (0..16u8).map(|code| {
                let (u, v) = (qpolar_core::PauliSymbol::new(code >> 2), qpolar_core::PauliSymbol::new(code & 3));
                let (a, b) = g.apply(u, v);
                GammaRow {
                    u: u.label(),
                    v: v.label(),
                    a: a.label(),
                    b: b.label(),
                }
            });
            sink.csv(rows)?;
            sink.summary(format!("Γ of {gate}: 16 rows"));
        }
    }
    Ok(Outcome::Success)
}

fn verify(a: &VerifyArgs, seed: u64, sink: &Sink) -> Result<Outcome> {
    ensure!(a.trials >= 1, "--trials must be at least 1");
    let checks = if a.lemma == "all" {
        let checks = verify_lemmas(seed, a.trials)?;
        sink.json(&checks)?;
        checks
    } else {
        let lemma: Lemma = a.lemma.parse()?;
        let check = verify_lemma(lemma, &GroupContext::new(), seed, a.trials)?;
        sink.json(&check)?;
        vec![check]
    };
    for c in &checks {
        sink.summary(format!(
            "lemma {:<8} trials {:>4}  max |dev| {:.3e}  {}",
            c.lemma,
            c.trials,
            c.max_abs_dev,
            if c.pass { "PASS" } else { "FAIL" }
        ));
    }
    Ok(if checks.iter().all(|c| c.pass) {
        Outcome::Success
    } else {
        Outcome::VerificationFailed
    })
}

#[derive(Serialize)]
struct IndexRow {
    index: usize,
    #[serde(rename = "Z1")]
    z1: f64,
    #[serde(rename = "Z2")]
    z2: f64,
    #[serde(rename = "Z3")]
    z3: f64,
    #[serde(rename = "Z")]
    z: f64,
    #[serde(rename = "I")]
    mutual_info: f64,
    components: usize,
    pruned_mass: f64,
}

#[derive(Serialize)]
struct TrajectoryRow {
    trajectory: usize,
    #[serde(rename = "Z")]
    z: f64,
    #[serde(rename = "Z_upper")]
    z_upper: f64,
    #[serde(rename = "I")]
    mutual_info: f64,
    components: usize,
    pruned_mass: f64,
}

fn polarize(a: &PolarizeArgs, seed: u64, sink: &Sink) -> Result<Outcome> {
    let w = parse_channel(&a.channel)?;
    let summary = if let Some(t) = a.trajectories {
        let set: GateSet = a.gates.parse().context("trajectory sampling needs a gate set")?;
        let opts = synthesis_options(&a.synth, Mode::Merged, 16)?;
        let rep = mc_trajectory_z(&w, set, a.n, t, seed, a.delta, &opts)?;
        sink.csv(rep.samples.iter().enumerate().map(|(trajectory, s)| TrajectoryRow {
            trajectory,
            z: s.z,
            z_upper: s.z_upper,
            mutual_info: s.mutual_info,
            components: s.components,
            pruned_mass: s.pruned_mass,
        }))?;
        rep.summary
    } else {
        let tree = make_gate_tree(a.n, &GatePolicy::parse(&a.gates, seed)?)?;
        let opts = synthesis_options(&a.synth, Mode::Exact, DEFAULT_CAP)?;
        let rep = polarization_histogram(&w, &tree, a.delta, &opts)?;
        sink.csv(rep.records.iter().map(|r| IndexRow {
            index: r.index,
            z1: r.z_d[0],
            z2: r.z_d[1],
            z3: r.z_d[2],
            z: r.z,
            mutual_info: r.mutual_info,
            components: r.components,
            pruned_mass: r.pruned_mass,
        }))?;
        rep.summary
    };
    sink.summary(format!(
        "I(W) = {:.6}; n = {}: mean I {:.6}, good {:.4}, middle {:.4}, bad {:.4} (δ = {}), max pruned mass {:.3e}",
        w.mutual_info(),
        a.n,
        summary.mean_mutual_info,
        summary.fraction_good,
        summary.fraction_middle,
        summary.fraction_bad,
        summary.delta,
        summary.max_pruned_mass
    ));
    Ok(Outcome::Success)
}

fn construct(a: &ConstructArgs, seed: u64, sink: &Sink) -> Result<Outcome> {
    ensure!((0.0..=1.0).contains(&a.rate), "--rate must lie in [0, 1]");
    let policy = GatePolicy::parse(&a.gates, seed)?;
    let tree = make_gate_tree(a.n, &policy)?;
    let n_len = 1usize << a.n;
    let k = (n_len as f64 * a.rate).floor() as usize;
    // Lower score means more reliable.
    let scores: Vec<f64> = match a.method {
        Method::Report => {
            let opts = synthesis_options(&a.synth, Mode::Merged, 64)?;
            let rep = polarization_histogram(&parse_channel(&a.channel)?, &tree, 0.01, &opts)?;
            rep.records.iter().map(|r| r.z_upper).collect()
        }
        Method::Genie => genie_channel_error_rates(&tree, &parse_pauli(&a.channel)?, a.trials, seed)?,
    };
    let (info, frozen) = select_good_set(&scores, Selection::Count(k))?;
    let chain_subset = if a.chain {
        ensure!(info.len() >= frozen.len(), "chaining needs at least as many info as frozen indices");
        let mut by_score = info.clone();
        by_score.sort_by(|&x, &y| scores[x].total_cmp(&scores[y]).then(x.cmp(&y)));
        by_score.truncate(frozen.len());
        by_score.sort_unstable();
        Some(by_score)
    } else {
        None
    };
    let spec = PolarCodeSpec::from_policy(a.n, &policy, info, chain_subset)?;
    sink.json(&spec.to_file())?;
    let total: f64 = spec.info().iter().map(|&i| scores[i]).sum();
    sink.summary(format!(
        "N = {n_len}, |info| = {k}, |frozen| = {}; sum of {} scores over info = {total:.6e}",
        spec.frozen().len(),
        match a.method {
            Method::Report => "Z",
            Method::Genie => "genie error",
        }
    ));
    Ok(Outcome::Success)
}

fn simulate(a: &SimulateArgs, seed: u64, sink: &Sink) -> Result<Outcome> {
    let spec = read_spec(&a.code)?;
    let p = parse_pauli(&a.channel)?;
    let opts = match a.bound {
        BoundMode::None => None,
        BoundMode::Exact => Some(SynthesisOptions::default()),
        BoundMode::Merged => Some(SynthesisOptions::merged(a.bound_cap)),
    };
    let bound = match opts {
        None => None,
        Some(o) => {
            let rep = polarization_histogram(&CmpChannel::pauli(p), spec.tree(), 0.01, &o)?;
            Some(3.0 * spec.info().iter().map(|&i| rep.records[i].z_upper).sum::<f64>())
        }
    };
    let r = monte_carlo(&spec, &p, a.trials, seed, bound)?;
    sink.json(&r)?;
    let ok = r.within_bound();
    sink.summary(format!(
        "BLER {:.6e} ± {:.2e} over {} trials{}",
        r.bler,
        r.stderr,
        r.trials,
        match r.bound {
            Some(b) => format!("; bound 3ΣZ = {b:.6e} {}", if ok { "holds" } else { "VIOLATED" }),
            None => String::new(),
        }
    ));
    Ok(if ok { Outcome::Success } else { Outcome::VerificationFailed })
}

#[derive(Serialize)]
struct RateRow {
    k: u64,
    rate: f64,
    rate_exact: String,
    entanglement: f64,
    entanglement_exact: String,
}

#[derive(Serialize)]
struct BlockRow {
    block: usize,
    block_bler: f64,
    k: usize,
    rate: f64,
    entanglement: f64,
    trials: u64,
    chain_bler: f64,
    catalyst_ok: f64,
}

fn ratio_f64(r: num_rational::Ratio<u64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn chain(a: &ChainArgs, seed: u64, sink: &Sink) -> Result<Outcome> {
    let spec = read_spec(&a.code)?;
    let (n_len, info, frozen) = (spec.len() as u64, spec.info().len() as u64, spec.frozen().len() as u64);
    if a.sweep {
        let rows = (1..=a.k as u64)
            .map(|k| {
                let r = chain_rates(k, n_len, info, frozen)?;
                Ok(RateRow {
                    k,
                    rate: ratio_f64(r.rate),
                    rate_exact: r.rate.to_string(),
                    entanglement: ratio_f64(r.entanglement),
                    entanglement_exact: r.entanglement.to_string(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        sink.csv(&rows)?;
        if let (Some(first), Some(last)) = (rows.first(), rows.last()) {
            sink.summary(format!(
                "k = 1..{}: R {} → {}, E {} → {}",
                a.k, first.rate_exact, last.rate_exact, first.entanglement_exact, last.entanglement_exact
            ));
        }
        return Ok(Outcome::Success);
    }
    let channel = a.channel.as_deref().context("--channel is required unless --sweep is given")?;
    let p = parse_pauli(channel)?;
    let rates = chain_rates(a.k as u64, n_len, info, frozen)?;
    let r = simulate_chain(&spec, &p, a.k, a.trials, seed)?;
    sink.csv(r.per_block_bler.iter().enumerate().map(|(l, &b)| BlockRow {
        block: l + 1,
        block_bler: b,
        k: r.k,
        rate: ratio_f64(rates.rate),
        entanglement: ratio_f64(rates.entanglement),
        trials: r.trials,
        chain_bler: r.chain_bler,
        catalyst_ok: r.catalyst_ok,
    }))?;
    sink.summary(format!(
        "k = {}: R = {}, E = {}, chain BLER {:.6e}, catalyst recovered {:.6}",
        a.k, rates.rate, rates.entanglement, r.chain_bler, r.catalyst_ok
    ));
    Ok(Outcome::Success)
}

fn probe(a: &ProbeArgs, seed: u64, sink: &Sink) -> Result<Outcome> {
    let w = parse_channel(&a.channel)?;
    let set: GateSet = a.gates.parse()?;
    let opts = synthesis_options(&a.synth, Mode::Merged, 16)?;
    let rows = fast_polarization_probe(&w, set, &a.n_list, a.trajectories, seed, a.theta, &opts)?;
    sink.csv(&rows)?;
    for r in &rows {
        sink.summary(format!("n = {:>2}: rate estimate {:.4}, block bound {:.3e}", r.n, r.rate_hat, r.bound));
    }
    Ok(Outcome::Success)
}
