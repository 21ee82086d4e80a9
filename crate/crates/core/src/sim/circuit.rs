//! Adaptive circuit IR, execution and depth accounting.

use std::collections::BTreeMap;
use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use super::op::{OperatorHandle, SiteId};
use super::{MeasureSpec, StateVector, C64};
use crate::error::{Error, Result};

/// Classical values produced by measurements and classical compute nodes.
pub type OutcomeRecord = BTreeMap<String, i64>;

pub type ClassicalFn = Arc<dyn Fn(&OutcomeRecord) -> Vec<(String, i64)> + Send + Sync>;
pub type GateFn = Arc<dyn Fn(&OutcomeRecord) -> Option<OperatorHandle> + Send + Sync>;
pub type SpecFn = Arc<dyn Fn(&OutcomeRecord) -> MeasureSpec + Send + Sync>;

#[derive(Clone)]
pub enum MeasureChoice {
    Fixed(MeasureSpec),
    Adaptive { deps: Vec<String>, f: SpecFn },
}

#[derive(Debug, Clone)]
pub enum DiscardMode {
    /// Project onto this local state; fails unless the site was disentangled.
    Expect(Vec<C64>),
    /// The site is in some product state (after a measurement, for instance).
    Traced,
}

#[derive(Clone)]
pub enum Instruction {
    Unitary(OperatorHandle),
    Measure {
        key: String,
        sites: Vec<SiteId>,
        choice: MeasureChoice,
    },
    Classical {
        name: String,
        reads: Vec<String>,
        writes: Vec<String>,
        f: ClassicalFn,
    },
    /// Gate chosen from earlier outcomes; `support` bounds every possible choice.
    Adaptive {
        name: String,
        support: Vec<SiteId>,
        deps: Vec<String>,
        f: GateFn,
    },
    Alloc {
        site: SiteId,
        dim: usize,
        init: Vec<C64>,
    },
    Discard {
        site: SiteId,
        mode: DiscardMode,
    },
    Split {
        site: SiteId,
        into: Vec<(SiteId, usize)>,
    },
    Merge {
        parts: Vec<SiteId>,
        into: SiteId,
    },
}

fn sites_str(s: &[SiteId]) -> String {
    s.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

impl Instruction {
    fn listing(&self) -> String {
        match self {
            Instruction::Unitary(op) => format!("U {} [{}]", op.name, sites_str(&op.support)),
            Instruction::Measure { key, sites, choice } => match choice {
                MeasureChoice::Fixed(_) => format!("M {key} [{}]", sites_str(sites)),
                MeasureChoice::Adaptive { deps, .. } => {
                    format!("M {key} [{}] <- {{{}}}", sites_str(sites), deps.join(","))
                }
            },
            Instruction::Classical { name, reads, writes, .. } => {
                format!("C {name} {{{}}} -> {{{}}}", reads.join(","), writes.join(","))
            }
            Instruction::Adaptive { name, support, deps, .. } => {
                format!("CU {name} [{}] <- {{{}}}", sites_str(support), deps.join(","))
            }
            Instruction::Alloc { site, dim, .. } => format!("ALLOC {site} d={dim}"),
            Instruction::Discard { site, mode } => match mode {
                DiscardMode::Expect(_) => format!("DISCARD {site} expect"),
                DiscardMode::Traced => format!("DISCARD {site} traced"),
            },
            Instruction::Split { site, into } => format!(
                "SPLIT {site} -> [{}]",
                into.iter().map(|(s, d)| format!("{s}:{d}")).collect::<Vec<_>>().join(",")
            ),
            Instruction::Merge { parts, into } => format!("MERGE [{}] -> {into}", sites_str(parts)),
        }
    }
}

/// An instruction sequence plus a site-id allocator.
#[derive(Clone, Default)]
pub struct AdaptiveCircuit {
    pub instructions: Vec<Instruction>,
    next_id: u32,
}

impl AdaptiveCircuit {
    /// New circuit whose fresh site ids start at `first_free`.
    pub fn new(first_free: u32) -> AdaptiveCircuit {
        AdaptiveCircuit {
            instructions: Vec::new(),
            next_id: first_free,
        }
    }

    pub fn fresh(&mut self) -> SiteId {
        let s = SiteId(self.next_id);
        self.next_id += 1;
        s
    }

    pub fn next_id(&self) -> u32 {
        self.next_id
    }

    pub fn reserve_to(&mut self, n: u32) {
        self.next_id = self.next_id.max(n);
    }

    pub fn push(&mut self, i: Instruction) {
        self.instructions.push(i);
    }

    pub fn unitary(&mut self, op: OperatorHandle) {
        self.push(Instruction::Unitary(op));
    }

    pub fn alloc(&mut self, dim: usize, init: Vec<C64>) -> SiteId {
        let s = self.fresh();
        self.push(Instruction::Alloc { site: s, dim, init });
        s
    }

    pub fn alloc_basis(&mut self, dim: usize, k: usize) -> SiteId {
        let mut v = vec![C64::new(0.0, 0.0); dim];
        v[k] = C64::new(1.0, 0.0);
        self.alloc(dim, v)
    }

    pub fn alloc_plus(&mut self, dim: usize) -> SiteId {
        let a = 1.0 / (dim as f64).sqrt();
        self.alloc(dim, vec![C64::new(a, 0.0); dim])
    }

    pub fn discard(&mut self, site: SiteId, mode: DiscardMode) {
        self.push(Instruction::Discard { site, mode });
    }

    pub fn measure(&mut self, key: &str, sites: Vec<SiteId>, spec: MeasureSpec) {
        self.push(Instruction::Measure {
            key: key.to_string(),
            sites,
            choice: MeasureChoice::Fixed(spec),
        });
    }

    pub fn measure_adaptive(
        &mut self,
        key: &str,
        sites: Vec<SiteId>,
        deps: Vec<String>,
        f: impl Fn(&OutcomeRecord) -> MeasureSpec + Send + Sync + 'static,
    ) {
        self.push(Instruction::Measure {
            key: key.to_string(),
            sites,
            choice: MeasureChoice::Adaptive { deps, f: Arc::new(f) },
        });
    }

    pub fn classical(
        &mut self,
        name: &str,
        reads: Vec<String>,
        writes: Vec<String>,
        f: impl Fn(&OutcomeRecord) -> Vec<(String, i64)> + Send + Sync + 'static,
    ) {
        self.push(Instruction::Classical {
            name: name.to_string(),
            reads,
            writes,
            f: Arc::new(f),
        });
    }

    pub fn adaptive(
        &mut self,
        name: &str,
        support: Vec<SiteId>,
        deps: Vec<String>,
        f: impl Fn(&OutcomeRecord) -> Option<OperatorHandle> + Send + Sync + 'static,
    ) {
        self.push(Instruction::Adaptive {
            name: name.to_string(),
            support,
            deps,
            f: Arc::new(f),
        });
    }

    pub fn split(&mut self, site: SiteId, dims: &[usize]) -> Vec<SiteId> {
        let into: Vec<(SiteId, usize)> = dims.iter().map(|&d| (self.fresh(), d)).collect();
        let ids = into.iter().map(|s| s.0).collect();
        self.push(Instruction::Split { site, into });
        ids
    }

    pub fn merge(&mut self, parts: Vec<SiteId>) -> SiteId {
        let into = self.fresh();
        self.push(Instruction::Merge { parts, into });
        into
    }

    pub fn extend(&mut self, other: AdaptiveCircuit) {
        self.next_id = self.next_id.max(other.next_id);
        self.instructions.extend(other.instructions);
    }

    /// Line-oriented listing with supports and classical dependencies.
    pub fn listing(&self) -> String {
        let mut s = String::new();
        for (i, ins) in self.instructions.iter().enumerate() {
            let _ = writeln!(s, "{i:5} {}", ins.listing());
        }
        s
    }

    /// Depth report from the instruction stream alone. Every instruction executes
    /// unconditionally, so this equals the report of any run.
    pub fn depth_report(&self) -> DepthReport {
        let mut t = DepthTracker::default();
        for ins in &self.instructions {
            t.record(ins);
        }
        t.report
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DepthReport {
    pub quantum_depth: usize,
    pub adaptive_rounds: usize,
    pub gate_count: usize,
    pub max_support: usize,
}

#[derive(Default)]
struct DepthTracker {
    site: HashMap<SiteId, (usize, usize)>,
    key: HashMap<String, (usize, usize)>,
    report: DepthReport,
}

impl DepthTracker {
    fn quantum(&mut self, support: &[SiteId], deps: &[String]) -> (usize, usize) {
        let mut layer = 0;
        let mut round = 1;
        for s in support {
            let (l, r) = self.site.get(s).copied().unwrap_or((0, 1));
            layer = layer.max(l);
            round = round.max(r);
        }
        for k in deps {
            if let Some(&(l, r)) = self.key.get(k) {
                layer = layer.max(l);
                round = round.max(r + 1);
            }
        }
        let layer = layer + 1;
        for &s in support {
            self.site.insert(s, (layer, round));
        }
        let rep = &mut self.report;
        rep.quantum_depth = rep.quantum_depth.max(layer);
        rep.adaptive_rounds = rep.adaptive_rounds.max(round);
        rep.gate_count += 1;
        rep.max_support = rep.max_support.max(support.len());
        (layer, round)
    }

    fn record(&mut self, ins: &Instruction) {
        match ins {
            Instruction::Unitary(op) => {
                self.quantum(&op.support, &[]);
            }
            Instruction::Adaptive { support, deps, .. } => {
                self.quantum(support, deps);
            }
            Instruction::Measure { key, sites, choice } => {
                let deps = match choice {
                    MeasureChoice::Fixed(_) => Vec::new(),
                    MeasureChoice::Adaptive { deps, .. } => deps.clone(),
                };
                let lr = self.quantum(sites, &deps);
                self.key.insert(key.clone(), lr);
            }
            Instruction::Classical { reads, writes, .. } => {
                let lr = reads
                    .iter()
                    .filter_map(|k| self.key.get(k))
                    .fold((0, 0), |a, b| (a.0.max(b.0), a.1.max(b.1)));
                for w in writes {
                    self.key.insert(w.clone(), lr);
                }
            }
            Instruction::Alloc { site, .. } => {
                self.site.insert(*site, (0, 1));
            }
            Instruction::Discard { site, .. } => {
                self.site.remove(site);
            }
            Instruction::Split { site, into } => {
                let lr = self.site.remove(site).unwrap_or((0, 1));
                for (s, _) in into {
                    self.site.insert(*s, lr);
                }
            }
            Instruction::Merge { parts, into } => {
                let lr = parts
                    .iter()
                    .filter_map(|s| self.site.remove(s))
                    .fold((0, 1), |a, b| (a.0.max(b.0), a.1.max(b.1)));
                self.site.insert(*into, lr);
            }
        }
    }
}

/// How measurement outcomes are chosen.
pub enum Policy {
    /// Born-rule sampling; one uniform draw per measurement.
    Sample(ChaCha20Rng),
    /// Prescribed outcomes per key; missing keys fall back to sampling with the
    /// supplied generator, or fail if none is given.
    Forced(BTreeMap<String, usize>, Option<ChaCha20Rng>),
}

impl Policy {
    pub fn seeded(seed: u64) -> Policy {
        Policy::Sample(ChaCha20Rng::seed_from_u64(seed))
    }

    /// Independent substream `stream` of `seed`.
    pub fn substream(seed: u64, stream: u64) -> Policy {
        let mut r = ChaCha20Rng::seed_from_u64(seed);
        r.set_stream(stream);
        Policy::Sample(r)
    }
}

pub struct RunResult {
    pub state: StateVector,
    pub record: OutcomeRecord,
    pub report: DepthReport,
    /// Product of the Born probabilities of the realized outcomes.
    pub branch_probability: f64,
    /// Probability of every label at every measurement, in execution order.
    pub distributions: Vec<(String, Vec<f64>)>,
}

pub struct Runner;

impl Runner {
    pub fn run(circuit: &AdaptiveCircuit, state: StateVector, seed: u64) -> Result<RunResult> {
        Runner::run_with(circuit, state, Policy::seeded(seed))
    }

    /// Runs and returns the final state with its sites ordered as `outputs`,
    /// which must be exactly the surviving sites.
    pub fn run_onto(
        circuit: &AdaptiveCircuit,
        state: StateVector,
        outputs: &[SiteId],
        policy: Policy,
    ) -> Result<RunResult> {
        let mut r = Runner::run_with(circuit, state, policy)?;
        r.state.reorder(outputs)?;
        Ok(r)
    }

    /// Image of every basis state of `inputs` as a basis index over `outputs`,
    /// or `None` when the image is not a single basis state up to phase.
    pub fn basis_action(
        circuit: &AdaptiveCircuit,
        inputs: &[(SiteId, usize)],
        outputs: &[SiteId],
        seed: u64,
    ) -> Result<Vec<Option<usize>>> {
        let dims: Vec<usize> = inputs.iter().map(|s| s.1).collect();
        let total: usize = dims.iter().product();
        let mut digits = vec![0; dims.len()];
        let mut out = Vec::with_capacity(total);
        for i in 0..total {
            super::decode(i, &dims, &mut digits);
            let psi = StateVector::basis(inputs.to_vec(), &digits)?;
            let r = Runner::run_onto(circuit, psi, outputs, Policy::substream(seed, i as u64))?;
            let amps = r.state.amplitudes();
            let k = amps
                .iter()
                .enumerate()
                .fold((0, 0.0), |b, (j, a)| if a.norm_sqr() > b.1 { (j, a.norm_sqr()) } else { b });
            out.push(if (k.1 - 1.0).abs() < 1e-9 { Some(k.0) } else { None });
        }
        Ok(out)
    }

    pub fn run_with(circuit: &AdaptiveCircuit, mut state: StateVector, mut policy: Policy) -> Result<RunResult> {
        let mut record = OutcomeRecord::new();
        let mut tracker = DepthTracker::default();
        let mut branch = 1.0;
        let mut distributions = Vec::new();
        for ins in &circuit.instructions {
            tracker.record(ins);
            let Instruction::Measure { key, sites, choice } = ins else {
                execute_plain(ins, &mut state, &mut record)?;
                continue;
            };
            let spec = resolve_spec(choice, &record);
            let probs = state.measurement_probabilities(sites, &spec)?;
            let forced = match &policy {
                Policy::Forced(m, _) => m.get(key).copied(),
                Policy::Sample(_) => None,
            };
            let label = match forced {
                Some(l) => l,
                None => {
                    let rng = match &mut policy {
                        Policy::Sample(r) => r,
                        Policy::Forced(_, Some(r)) => r,
                        Policy::Forced(_, None) => {
                            return Err(Error::SupportOutOfRange(format!("no forced outcome for {key}")))
                        }
                    };
                    pick_label(&probs, rng.gen())
                }
            };
            let p = state.project(sites, &spec, label)?;
            branch *= p;
            distributions.push((key.clone(), probs));
            record.insert(key.clone(), label as i64);
        }
        Ok(RunResult {
            state,
            record,
            report: tracker.report,
            branch_probability: branch,
            distributions,
        })
    }

    /// Every measurement branch with probability above `min_prob`, by exhaustive
    /// enumeration of the outcome tree.
    pub fn branches(circuit: &AdaptiveCircuit, state: StateVector, min_prob: f64) -> Result<Vec<Branch>> {
        let mut out = Vec::new();
        explore(&circuit.instructions, 0, state, OutcomeRecord::new(), 1.0, min_prob, &mut out)?;
        Ok(out)
    }

    /// `shots` independent Born-rule runs from one generator, simulated once per
    /// distinct outcome path. Groups are returned in depth-first outcome order.
    pub fn run_shots(circuit: &AdaptiveCircuit, state: StateVector, shots: usize, seed: u64) -> Result<Vec<ShotGroup>> {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let mut out = Vec::new();
        sample_tree(&circuit.instructions, 0, state, OutcomeRecord::new(), shots, &mut rng, &mut out)?;
        Ok(out)
    }
}

/// One leaf of the outcome tree.
pub struct Branch {
    pub record: OutcomeRecord,
    pub probability: f64,
    /// Normalized post-measurement state.
    pub state: StateVector,
}

pub struct ShotGroup {
    pub record: OutcomeRecord,
    pub count: usize,
    pub state: StateVector,
}

fn pick_label(probs: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (l, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc && p > 1e-15 {
            return l;
        }
    }
    probs.iter().rposition(|&p| p > 1e-15).unwrap_or(0)
}

fn resolve_spec(choice: &MeasureChoice, record: &OutcomeRecord) -> MeasureSpec {
    match choice {
        MeasureChoice::Fixed(s) => s.clone(),
        MeasureChoice::Adaptive { f, .. } => f(record),
    }
}

/// Executes any instruction other than a measurement.
fn execute_plain(ins: &Instruction, state: &mut StateVector, record: &mut OutcomeRecord) -> Result<()> {
    match ins {
        Instruction::Unitary(op) => state.apply(op)?,
        Instruction::Adaptive { f, support, name, .. } => {
            if let Some(op) = f(record) {
                if op.support.iter().any(|s| !support.contains(s)) {
                    return Err(Error::SupportOutOfRange(format!(
                        "adaptive gate {name} acts outside its declared support"
                    )));
                }
                state.apply(&op)?;
            }
        }
        Instruction::Measure { .. } => unreachable!("measurements are handled by the runner"),
        Instruction::Classical { f, .. } => {
            for (k, v) in f(record) {
                record.insert(k, v);
            }
        }
        Instruction::Alloc { site, dim, init } => state.alloc(*site, *dim, init)?,
        Instruction::Discard { site, mode } => {
            match mode {
                DiscardMode::Expect(v) => state.discard_expect(*site, v)?,
                DiscardMode::Traced => state.discard_traced(*site)?,
            };
        }
        Instruction::Split { site, into } => state.split(*site, into)?,
        Instruction::Merge { parts, into } => state.merge(parts, *into)?,
    }
    Ok(())
}

/// Runs plain instructions from `pc`; returns the index of the next measurement.
fn run_until_measure(
    ins: &[Instruction],
    mut pc: usize,
    state: &mut StateVector,
    record: &mut OutcomeRecord,
) -> Result<usize> {
    while pc < ins.len() {
        if matches!(ins[pc], Instruction::Measure { .. }) {
            break;
        }
        execute_plain(&ins[pc], state, record)?;
        pc += 1;
    }
    Ok(pc)
}

fn explore(
    ins: &[Instruction],
    pc: usize,
    mut state: StateVector,
    mut record: OutcomeRecord,
    prob: f64,
    min_prob: f64,
    out: &mut Vec<Branch>,
) -> Result<()> {
    let pc = run_until_measure(ins, pc, &mut state, &mut record)?;
    let Some(Instruction::Measure { key, sites, choice }) = ins.get(pc) else {
        out.push(Branch {
            record,
            probability: prob,
            state,
        });
        return Ok(());
    };
    let spec = resolve_spec(choice, &record);
    let probs = state.measurement_probabilities(sites, &spec)?;
    let live: Vec<usize> = (0..probs.len()).filter(|&l| prob * probs[l] > min_prob).collect();
    for (n, &l) in live.iter().enumerate() {
        // the last branch reuses the parent state
        let mut s = if n + 1 == live.len() {
            std::mem::replace(&mut state, StateVector::from_parts(Vec::new(), vec![C64::new(1.0, 0.0)]))
        } else {
            state.clone()
        };
        let p = s.project(sites, &spec, l)?;
        let mut r = record.clone();
        r.insert(key.clone(), l as i64);
        explore(ins, pc + 1, s, r, prob * p, min_prob, out)?;
    }
    Ok(())
}

fn sample_tree(
    ins: &[Instruction],
    pc: usize,
    mut state: StateVector,
    mut record: OutcomeRecord,
    shots: usize,
    rng: &mut ChaCha20Rng,
    out: &mut Vec<ShotGroup>,
) -> Result<()> {
    let pc = run_until_measure(ins, pc, &mut state, &mut record)?;
    let Some(Instruction::Measure { key, sites, choice }) = ins.get(pc) else {
        out.push(ShotGroup {
            record,
            count: shots,
            state,
        });
        return Ok(());
    };
    let spec = resolve_spec(choice, &record);
    let probs = state.measurement_probabilities(sites, &spec)?;
    let mut counts = vec![0usize; probs.len()];
    for _ in 0..shots {
        counts[pick_label(&probs, rng.gen())] += 1;
    }
    let live: Vec<usize> = (0..probs.len()).filter(|&l| counts[l] > 0).collect();
    for (n, &l) in live.iter().enumerate() {
        let mut s = if n + 1 == live.len() {
            std::mem::replace(&mut state, StateVector::from_parts(Vec::new(), vec![C64::new(1.0, 0.0)]))
        } else {
            state.clone()
        };
        s.project(sites, &spec, l)?;
        let mut r = record.clone();
        r.insert(key.clone(), l as i64);
        sample_tree(ins, pc + 1, s, r, counts[l], rng, out)?;
    }
    Ok(())
}
