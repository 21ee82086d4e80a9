use anyhow::{anyhow, Result};
use qdouble::group::{build_group, FiniteGroup, GroupKind};
use qdouble::lattice::{closed_dual_loop, closed_region_boundary, plaquette_loop, square_lattice, Rect, Ribbon};
use qdouble::model::QuantumDouble;
use qdouble::rep::{AnyonLabel, AnyonModel};
use qdouble::sim::{amp_cap, SiteId, StateVector, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

/// Marks errors that come from the command line or the config (exit status 2).
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(UsageError(msg.into()))
}

pub fn group(spec: &str) -> Result<FiniteGroup> {
    let kind = GroupKind::parse(spec).map_err(|e| usage(e.to_string()))?;
    build_group(&kind).map_err(|e| usage(e.to_string()))
}

/// Parses `RxC`.
pub fn lattice(spec: &str) -> Result<(usize, usize)> {
    let bad = || usage(format!("bad lattice '{spec}', expected RxC"));
    let (r, c) = spec.split_once('x').ok_or_else(bad)?;
    let r: usize = r.trim().parse().map_err(|_| bad())?;
    let c: usize = c.trim().parse().map_err(|_| bad())?;
    if r == 0 || c == 0 {
        return Err(bad());
    }
    Ok((r, c))
}

pub fn model(g: FiniteGroup, (r, c): (usize, usize)) -> Result<QuantumDouble> {
    Ok(QuantumDouble::new(g, square_lattice(r, c)?))
}

/// Prints the memory estimate for a register of `amps` amplitudes and refuses it
/// above the amplitude cap.
pub fn reserve(what: &str, amps: u128) -> Result<()> {
    let mib = amps as f64 * 16.0 / (1u64 << 20) as f64;
    eprintln!("memory estimate ({what}): {amps} amplitudes, {mib:.1} MiB");
    let cap = amp_cap();
    if amps > cap as u128 {
        return Err(usage(format!(
            "{what} needs {amps} amplitudes, above the cap of {cap} (set QDOUBLE_AMP_CAP to raise it)"
        )));
    }
    Ok(())
}

/// Seed of shot `i`; shot 0 uses the config seed itself.
pub fn shot_seed(seed: u64, i: u64) -> u64 {
    seed.wrapping_add(i.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

pub fn random_sites(sites: Vec<(SiteId, usize)>, rng: &mut ChaCha20Rng) -> StateVector {
    let n: usize = sites.iter().map(|s| s.1).product();
    let amps = (0..n).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let mut s = StateVector::from_parts(sites, amps);
    s.normalize();
    s
}

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

fn squash(s: &str) -> String {
    s.chars().filter(|c| !c.is_whitespace()).collect()
}

/// Accepts a label index or its description, e.g. `(e, standard)`.
pub fn label(model: &AnyonModel, spec: &str) -> Result<AnyonLabel> {
    let labels = model.labels();
    if let Ok(i) = spec.trim().parse::<usize>() {
        return labels.get(i).copied().ok_or_else(|| usage(format!("label index {i} out of range")));
    }
    labels.iter().copied().find(|&a| squash(&model.describe(a)) == squash(spec)).ok_or_else(|| {
        let known: Vec<String> = labels.iter().map(|&a| model.describe(a)).collect();
        usage(format!("unknown label '{spec}'; known: {}", known.join(", ")))
    })
}

/// The three closed ribbons used by the charge suites, named `plaquette`, `vertex`
/// and `boundary`.
pub fn loops(qd: &QuantumDouble) -> Result<Vec<(&'static str, Ribbon)>> {
    let lat = &qd.lattice;
    Ok(vec![
        ("plaquette", plaquette_loop(lat, 0, lat.vertex(0, 0))?),
        ("vertex", closed_dual_loop(lat, lat.vertex(0, 1))?),
        ("boundary", closed_region_boundary(lat, Rect { r0: 0, c0: 0, r1: 1, c1: 1 })?),
    ])
}

pub fn find_loop(qd: &QuantumDouble, name: &str) -> Result<Ribbon> {
    loops(qd)?
        .into_iter()
        .find(|(n, _)| *n == name)
        .map(|(_, r)| r)
        .ok_or_else(|| anyhow!(UsageError(format!("unknown loop '{name}'; use plaquette, vertex or boundary"))))
}
