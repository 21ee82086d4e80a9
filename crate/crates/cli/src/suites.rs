//! Named verification suites for `qdouble verify`.

use anyhow::Result;
use qdouble::group::{solvable_chain, FiniteGroup};
use qdouble::lattice::standard_open_ribbon;
use qdouble::model::charge::ChargeFamily;
use qdouble::model::nogo::{kolemma_check, unitary_combination_search};
use qdouble::model::ribbon::{fxicpi, ribbon_op};
use qdouble::model::QuantumDouble;
use qdouble::protocols::ccu::{ccu_circuit, CcuSites};
use qdouble::protocols::charge::{adaptive_charge_distribution, charge_measurement_circuit, charge_peak_amplitudes};
use qdouble::protocols::depth::{depth_certificate, Protocol};
use qdouble::protocols::gadgets::{cyclic_gadget, peak_amplitudes, CyclicGadget, GadgetMode};
use qdouble::protocols::monotone::GroupGates;
use qdouble::protocols::prepare::{self, preparation_circuit, run_preparation, BaseCase};
use qdouble::rep::{max_abs, AnyonModel};
use qdouble::sim::{decode, encode, OperatorHandle, Policy, Runner, SiteId, StateVector, C64};
use rand::Rng;
use serde_json::json;

use crate::common::{self, usage};
use crate::report::Report;

pub const SUITES: [&str; 9] = [
    "ribbon-algebra",
    "charge-orthogonality",
    "kolemma",
    "appendix-b",
    "prep-fidelity",
    "gadget-teleport",
    "charge-adaptive-equivalence",
    "depth-certificates",
    "ground-space",
];

const KINDS: [CyclicGadget; 3] = [CyclicGadget::PartialSum, CyclicGadget::SuccessiveDifference, CyclicGadget::MultitargetCx];

pub struct SuiteArgs {
    pub group: Option<String>,
    pub lattice: Option<String>,
    pub seed: u64,
}

impl SuiteArgs {
    fn group_or(&self, default: &str) -> Result<FiniteGroup> {
        common::group(self.group.as_deref().unwrap_or(default))
    }

    fn lattice_or(&self, default: &str) -> Result<(usize, usize)> {
        common::lattice(self.lattice.as_deref().unwrap_or(default))
    }

    fn qd(&self, group: &str, lattice: &str) -> Result<QuantumDouble> {
        common::model(self.group_or(group)?, self.lattice_or(lattice)?)
    }
}

pub fn run(suite: &str, args: &SuiteArgs) -> Result<Report> {
    let config = json!({
        "suite": suite,
        "group": args.group,
        "lattice": args.lattice,
        "seed": args.seed,
    });
    let mut rep = Report::new("verify", config);
    match suite {
        "ribbon-algebra" => ribbon_algebra(args, &mut rep)?,
        "charge-orthogonality" => charge_orthogonality(args, &mut rep)?,
        "kolemma" => kolemma(args, &mut rep)?,
        "appendix-b" => appendix_b(args, &mut rep)?,
        "prep-fidelity" => prep_fidelity(args, &mut rep)?,
        "gadget-teleport" => gadget_teleport(args, &mut rep)?,
        "charge-adaptive-equivalence" => charge_equivalence(args, &mut rep)?,
        "depth-certificates" => depth_certificates(&mut rep)?,
        "ground-space" => ground_space(args, &mut rep)?,
        other => return Err(usage(format!("unknown suite '{other}'; known: {}", SUITES.join(", ")))),
    }
    Ok(rep)
}

fn dist(a: &StateVector, b: &StateVector) -> f64 {
    a.amplitudes().iter().zip(b.amplitudes()).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

fn apply_all(psi: &StateVector, ops: &[OperatorHandle]) -> Result<StateVector> {
    let mut s = psi.clone();
    for o in ops.iter().rev() {
        s.apply_unchecked(o)?;
    }
    Ok(s)
}

fn ribbon_algebra(args: &SuiteArgs, rep: &mut Report) -> Result<()> {
    let qd = args.qd("S3", "1x2")?;
    common::reserve("lattice register", qd.register_len())?;
    let g = qd.group.clone();
    let n = g.order();
    let r = standard_open_ribbon(&qd.lattice, 0, 0, qd.lattice.cols)?;
    let f = |h, k| ribbon_op(&qd, &r, h, k);
    let mut rng = common::rng(args.seed);
    let psi = common::random_sites(qd.register(), &mut rng);
    let (v0, v1) = (r.s0.vertex, r.s1.vertex);
    let mut worst = [0.0f64; 5];
    for _ in 0..16 {
        let (h, hp, a, b, k) =
            (rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n));
        let l = apply_all(&psi, &[f(h, a)?, f(hp, b)?])?;
        let want = if a == b { apply_all(&psi, &[f(g.mul(h, hp), a)?])? } else { psi.zeroed() };
        worst[0] = worst[0].max(dist(&l, &want));
        worst[1] = worst[1].max(max_abs(&(f(h, a)?.to_matrix().adjoint() - f(g.inv(h), a)?.to_matrix())));
        let l = apply_all(&psi, &[qd.vertex_op(v0, k)?, f(h, a)?])?;
        let rr = apply_all(&psi, &[f(g.conj(k, h), g.mul(k, a))?, qd.vertex_op(v0, k)?])?;
        worst[2] = worst[2].max(dist(&l, &rr));
        let kk = g.product(&[g.inv(a), g.inv(h), a, k]);
        let l = apply_all(&psi, &[qd.plaquette_op(r.s1, k)?, f(h, a)?])?;
        let rr = apply_all(&psi, &[f(h, a)?, qd.plaquette_op(r.s1, kk)?])?;
        worst[3] = worst[3].max(dist(&l, &rr));
        let l = apply_all(&psi, &[qd.vertex_op(v1, k)?, f(h, a)?])?;
        let rr = apply_all(&psi, &[f(h, g.mul(a, g.inv(k)))?, qd.vertex_op(v1, k)?])?;
        worst[4] = worst[4].max(dist(&l, &rr));
    }
    let names = ["multiplication", "adjoint", "start-vertex commutation", "end-plaquette commutation", "end-vertex commutation"];
    for (name, w) in names.iter().zip(worst) {
        rep.check_max(*name, 1e-9, w);
    }
    let gs = qd.ground_state_oracle()?;
    let mut worst_e: f64 = 0.0;
    for h in 0..n {
        for k in 0..n {
            let e = gs.inner(&apply_all(&gs, &[f(h, k)?])?)?;
            let want = if h == g.identity() { 1.0 / n as f64 } else { 0.0 };
            worst_e = worst_e.max((e - C64::new(want, 0.0)).norm());
        }
    }
    rep.check_max("ground-state expectation", 1e-12, worst_e);
    Ok(())
}

fn charge_orthogonality(args: &SuiteArgs, rep: &mut Report) -> Result<()> {
    let qd = args.qd("S3", "1x1")?;
    common::reserve("lattice register", qd.register_len())?;
    let model = AnyonModel::new(&qd.group, None)?;
    let mut rng = common::rng(args.seed);
    let vacuum = qd.ground_state_oracle()?;
    let states = vec![
        common::random_sites(qd.register(), &mut rng),
        common::random_sites(qd.register(), &mut rng),
        vacuum.clone(),
    ];
    for (name, sigma) in common::loops(&qd)? {
        let fam = ChargeFamily::new(&qd, &model, &sigma)?;
        rep.check_max(format!("{name}: projector identities"), 1e-9, fam.projector_violation(&states)?);
        let (p, _) = fam.distribution(&vacuum)?;
        let pt = fam.position(model.trivial()).map(|k| p[k]).unwrap_or(0.0);
        rep.check_max(format!("{name}: vacuum trivial probability"), 1e-12, (pt - 1.0).abs());
    }
    Ok(())
}

fn kolemma(args: &SuiteArgs, rep: &mut Report) -> Result<()> {
    let qd = args.qd("S3", "1x2")?;
    common::reserve("lattice register", qd.register_len())?;
    let model = AnyonModel::new(&qd.group, None)?;
    let r = standard_open_ribbon(&qd.lattice, 0, 0, qd.lattice.cols)?;
    let psi = qd.ground_state_oracle()?;
    let e = qd.group.identity();
    let label = model
        .labels()
        .into_iter()
        .filter(|&a| model.class(a).representative() == e)
        .max_by_key(|&a| model.irrep(a).dim)
        .expect("identity class has irreps");
    rep.stat("label", model.describe(label));
    let mut worst: f64 = 0.0;
    let mut overlaps = serde_json::Map::new();
    for &k in &model.class(label).centralizer {
        let kr = kolemma_check(&qd, &model, label, &r, &psi, k)?;
        worst = worst.max(kr.deviation());
        overlaps.insert(qd.group.label(k).to_string(), json!([kr.overlap.re, kr.overlap.im]));
    }
    rep.check_max("overlap and norms", 1e-9, worst);
    rep.stat("overlaps", overlaps);
    let dpi = model.irrep(label).dim as f64;
    let want = dpi / (model.class(label).centralizer.len() as f64 * qd.group.order() as f64);
    let (_, n2) = fxicpi(&qd, &model, &psi, label, &r)?;
    rep.check_max("anyonic norm squared", 1e-12, (n2 - want).abs());
    rep.stat("norm_squared", n2);
    if qd.group.name() == "S3" {
        let t = qd.group.find("(1 2)").expect("S3 transposition");
        let kr = kolemma_check(&qd, &model, label, &r, &psi, t)?;
        rep.check_max("overlap at (1 2) equals -1/2", 1e-9, (kr.overlap - C64::new(-0.5, 0.0)).norm());
    }
    Ok(())
}

fn appendix_b(args: &SuiteArgs, rep: &mut Report) -> Result<()> {
    let groups = match &args.group {
        Some(g) => vec![common::group(g)?],
        None => vec![FiniteGroup::cyclic(2)?, FiniteGroup::cyclic(3)?, FiniteGroup::cyclic(4)?, FiniteGroup::symmetric(3)?],
    };
    let lat = args.lattice_or("1x1")?;
    for g in groups {
        let qd = common::model(g, lat)?;
        common::reserve("lattice register", qd.register_len())?;
        let model = AnyonModel::new(&qd.group, None)?;
        for a in model.labels() {
            let name = format!("{} {}", qd.group.name(), model.describe(a));
            if qd.group.is_abelian() {
                let cr = unitary_combination_search(&qd, &model, a, 1, args.seed)?;
                rep.check_max(format!("{name}: residual"), 1e-12, cr.residual);
                rep.check_max(format!("{name}: F†F defect"), 1e-9, cr.simulator_defect.unwrap_or(f64::INFINITY));
            } else if model.irrep(a).dim > 1 {
                let cr = unitary_combination_search(&qd, &model, a, 1000, args.seed)?;
                rep.check_min(format!("{name}: best residual over 1000 restarts"), 0.1, cr.residual);
                if let Some(d) = cr.simulator_defect {
                    rep.stat(&format!("{name}: F†F defect of best"), d);
                }
            }
        }
    }
    Ok(())
}

fn prep_fidelity(args: &SuiteArgs, rep: &mut Report) -> Result<()> {
    let qd = args.qd("S3", "1x1")?;
    let chain = solvable_chain(&qd.group)?;
    for base in [BaseCase::AncillaSyndrome, BaseCase::VertexStage] {
        common::reserve("preparation", prepare::peak_amplitudes(&chain, &qd.lattice, base))?;
        let oracle = qd.ground_state_oracle()?;
        let pc = preparation_circuit(&qd, base)?;
        let (mut worst, mut bad_m): (f64, usize) = (0.0, 0);
        for i in 0..20 {
            let out = run_preparation(&qd, &pc, Policy::seeded(common::shot_seed(args.seed, i)))?;
            worst = worst.max(1.0 - out.state.fidelity(&oracle)?);
            bad_m += out.m_sums.iter().filter(|&&m| m != 0).count();
        }
        rep.check_max(format!("{base:?}: infidelity over 20 seeds"), 1e-9, worst);
        rep.check_max(format!("{base:?}: nonzero vertex-stage sums"), 0.0, bad_m as f64);
    }
    Ok(())
}

fn ccu_order(o: &CcuSites) -> Vec<SiteId> {
    let mut v = vec![o.a];
    v.extend(&o.c);
    v.extend(&o.b);
    v
}

fn gadget_teleport(args: &SuiteArgs, rep: &mut Report) -> Result<()> {
    let ds: Vec<usize> = match &args.group {
        Some(g) => {
            let g = common::group(g)?;
            if !g.is_abelian() || g.order() != (0..g.order()).map(|a| g.element_order(a)).max().unwrap_or(1) {
                return Err(usage("gadget-teleport takes a cyclic group Zd"));
            }
            vec![g.order()]
        }
        None => vec![2, 3],
    };
    let n = 4;
    let mut rng = common::rng(args.seed);
    for d in ds {
        for kind in KINDS {
            common::reserve("gadget", peak_amplitudes(kind, d, n, GadgetMode::Teleported))?;
            let dr = cyclic_gadget(kind, d, n, GadgetMode::Direct)?;
            let te = cyclic_gadget(kind, d, n, GadgetMode::Teleported)?;
            let ins: Vec<(SiteId, usize)> = dr.inputs.iter().copied().zip(dr.dims.iter().copied()).collect();
            let images = Runner::basis_action(&dr.circuit, &ins, &dr.outputs, args.seed)?;
            let mut x = vec![0; dr.dims.len()];
            let mut bad = 0;
            for (i, img) in images.iter().enumerate() {
                decode(i, &dr.dims, &mut x);
                bad += usize::from(*img != Some(encode(&kind.target(d, &x), &dr.dims)));
            }
            rep.check_max(format!("{} d={d} n={n}: basis mismatches", kind.name()), 0.0, bad as f64);
            let mut worst: f64 = 0.0;
            for t in 0..20 {
                let sites: Vec<(SiteId, usize)> = te.inputs.iter().map(|&s| (s, d)).collect();
                let psi = common::random_sites(sites, &mut rng);
                let a = Runner::run_onto(&te.circuit, psi.clone(), &te.outputs, Policy::seeded(common::shot_seed(args.seed, t)))?;
                let b = Runner::run_onto(&dr.circuit, psi, &dr.outputs, Policy::seeded(t))?;
                let f = StateVector::from_parts(b.state.sites().to_vec(), a.state.amplitudes().to_vec()).fidelity(&b.state)?;
                worst = worst.max(1.0 - f);
            }
            rep.check_max(format!("{} d={d} n={n}: teleported infidelity", kind.name()), 1e-9, worst);
        }
    }
    if args.group.is_none() {
        let g = FiniteGroup::symmetric(3)?;
        let chain = solvable_chain(&g)?;
        let (cd, ins, od) = ccu_circuit(&GroupGates::new(&chain, GadgetMode::Direct)?, 2)?;
        let (ct, _, ot) = ccu_circuit(&GroupGates::new(&chain, GadgetMode::Teleported)?, 2)?;
        let sites: Vec<(SiteId, usize)> = ccu_order(&ins).into_iter().map(|s| (s, 6)).collect();
        let mut worst: f64 = 0.0;
        for t in 0..20 {
            let psi = common::random_sites(sites.clone(), &mut rng);
            let a = Runner::run_onto(&cd, psi.clone(), &ccu_order(&od), Policy::seeded(t))?;
            let b = Runner::run_onto(&ct, psi, &ccu_order(&ot), Policy::seeded(common::shot_seed(args.seed, t)))?;
            let f = StateVector::from_parts(a.state.sites().to_vec(), b.state.amplitudes().to_vec()).fidelity(&a.state)?;
            worst = worst.max(1.0 - f);
        }
        rep.check_max("CCU S3 L=2: teleported infidelity", 1e-9, worst);
    }
    Ok(())
}

fn charge_equivalence(args: &SuiteArgs, rep: &mut Report) -> Result<()> {
    let qd = args.qd("S3", "1x1")?;
    common::reserve("charge measurement", charge_peak_amplitudes(&qd))?;
    let model = AnyonModel::new(&qd.group, None)?;
    let vacuum = qd.ground_state_oracle()?;
    let r = standard_open_ribbon(&qd.lattice, 0, 0, qd.lattice.cols)?;
    let mut states = vec![vacuum.clone()];
    for a in model.labels() {
        states.push(fxicpi(&qd, &model, &vacuum, a, &r)?.0);
    }
    let mut rng = common::rng(args.seed);
    while states.len() < 20 {
        states.push(common::random_sites(qd.register(), &mut rng));
    }
    states.truncate(20);
    for (name, sigma) in common::loops(&qd)? {
        let fam = ChargeFamily::new(&qd, &model, &sigma)?;
        let cc = charge_measurement_circuit(&qd, &model, &sigma, GadgetMode::Direct)?;
        let (mut worst_tv, mut worst_inf): (f64, f64) = (0.0, 0.0);
        for psi in &states {
            let (probs, images) = fam.distribution(psi)?;
            let mut adaptive = vec![0.0; probs.len()];
            for o in adaptive_charge_distribution(&qd, &cc, psi)? {
                let k = fam.position(o.label).expect("label in family");
                adaptive[k] += o.probability;
                let mut want = images[k].clone();
                want.normalize();
                worst_inf = worst_inf.max(1.0 - o.state.fidelity(&want)?);
            }
            let tv = 0.5 * probs.iter().zip(&adaptive).map(|(a, b)| (a - b).abs()).sum::<f64>();
            worst_tv = worst_tv.max(tv);
        }
        rep.check_max(format!("{name}: total variation"), 1e-9, worst_tv);
        rep.check_max(format!("{name}: posterior infidelity"), 1e-9, worst_inf);
    }
    rep.stat("states", states.len());
    Ok(())
}

pub fn certified_protocols() -> Result<Vec<Protocol>> {
    let s3 = FiniteGroup::symmetric(3)?;
    let mut v = vec![
        Protocol::Prepare { group: FiniteGroup::cyclic(2)?, base: BaseCase::AncillaSyndrome },
        Protocol::Prepare { group: FiniteGroup::cyclic(3)?, base: BaseCase::AncillaSyndrome },
        Protocol::Prepare { group: s3.clone(), base: BaseCase::AncillaSyndrome },
        Protocol::Ribbon { group: s3.clone() },
        Protocol::Charge { group: s3.clone() },
        Protocol::Ccu { group: s3, mode: GadgetMode::Teleported },
    ];
    for kind in KINDS {
        for d in [2, 3] {
            v.push(Protocol::Gadget { kind, d, mode: GadgetMode::Teleported });
        }
    }
    Ok(v)
}

fn depth_certificates(rep: &mut Report) -> Result<()> {
    for p in certified_protocols()? {
        let cert = depth_certificate(&p, &p.default_sweep())?;
        rep.add_depth(&cert);
    }
    let ladder = Protocol::Ladder { d: 2 };
    let cert = depth_certificate(&ladder, &ladder.default_sweep())?;
    rep.check_max("ladder baseline rejected", 0.0, if cert.passed() { 1.0 } else { 0.0 });
    rep.depth.push((&cert).into());
    Ok(())
}

fn ground_space(args: &SuiteArgs, rep: &mut Report) -> Result<()> {
    let groups = match &args.group {
        Some(g) => vec![common::group(g)?],
        None => vec![FiniteGroup::cyclic(2)?, FiniteGroup::cyclic(3)?, FiniteGroup::symmetric(3)?],
    };
    let lats = match &args.lattice {
        Some(l) => vec![common::lattice(l)?],
        None => vec![(1, 1), (1, 2)],
    };
    for g in groups {
        for &lat in &lats {
            let qd = common::model(g.clone(), lat)?;
            common::reserve("lattice register", qd.register_len())?;
            let name = format!("{} {}x{}", g.name(), lat.0, lat.1);
            rep.check_max(format!("{name}: projector trace - 1"), 1e-9, (qd.ground_space_dimension()? - 1.0).abs());
            let psi = qd.ground_state_oracle()?;
            rep.check_max(format!("{name}: oracle stabilizer violation"), 1e-9, qd.stabilizer_violation(&psi)?);
        }
    }
    Ok(())
}
