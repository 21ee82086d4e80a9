use qdouble::group::FiniteGroup;
use qdouble::lattice::{closed_dual_loop, square_lattice, standard_open_ribbon};
use qdouble::model::ribbon::{apply_anyonic, fxicpi, LocalIndices};
use qdouble::model::QuantumDouble;
use qdouble::protocols::gadgets::GadgetMode;
use qdouble::protocols::ribbon::{
    apply_ribbon_adaptive, deterministic_ribbon_circuit, lattice_state, probabilistic_ribbon_circuit, run_ribbon,
    I_KEY, J_KEY,
};
use qdouble::rep::{AnyonLabel, AnyonModel};
use qdouble::sim::{Policy, Runner, StateVector, C64};
use qdouble::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn s3_12() -> QuantumDouble {
    QuantumDouble::new(FiniteGroup::symmetric(3).unwrap(), square_lattice(1, 2).unwrap())
}

fn random_state(qd: &QuantumDouble, seed: u64) -> StateVector {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let n = qd.register_len() as usize;
    let amps = (0..n).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let mut s = StateVector::from_parts(qd.register(), amps);
    s.normalize();
    s
}

/// Born weight of outcome `(i, j)`: the Kraus operator is `(|E|/d_π) F^{((i,j),(1,1))}`.
fn born(qd: &QuantumDouble, model: &AnyonModel, psi: &StateVector, label: AnyonLabel, idx: LocalIndices) -> f64 {
    let r = standard_open_ribbon(&qd.lattice, 0, 0, qd.lattice.cols).unwrap();
    let s = (model.class(label).centralizer.len() as f64 / model.irrep(label).dim as f64).powi(2);
    s * apply_anyonic(qd, model, psi, label, idx, &r).unwrap().norm_sqr() / psi.norm_sqr()
}

/// Every branch of the probabilistic stage against the direct operator.
fn check_branches(qd: &QuantumDouble, model: &AnyonModel, label: AnyonLabel, psi: &StateVector) {
    let r = standard_open_ribbon(&qd.lattice, 0, 0, qd.lattice.cols).unwrap();
    let rc = probabilistic_ribbon_circuit(qd, model, label, &r, GadgetMode::Direct).unwrap();
    let branches = Runner::branches(&rc.circuit, psi.clone(), 1e-14).unwrap();
    let mut total = 0.0;
    for b in branches {
        let idx = LocalIndices {
            i: b.record[I_KEY] as usize,
            j: b.record[J_KEY] as usize,
            ip: 0,
            jp: 0,
        };
        let want_p = born(qd, model, psi, label, idx);
        assert!((b.probability - want_p).abs() < 1e-9, "{} {idx:?}: {} vs {want_p}", model.describe(label), b.probability);
        let mut want = apply_anyonic(qd, model, psi, label, idx, &r).unwrap();
        want.normalize();
        let out = lattice_state(qd, &rc, b.state).unwrap();
        let f = out.fidelity(&want).unwrap();
        assert!(f > 1.0 - 1e-9, "{} {idx:?}: fidelity {f}", model.describe(label));
        total += b.probability;
    }
    assert!((total - 1.0).abs() < 1e-9);
}

#[test]
fn probabilistic_branches_on_ground_state() {
    let qd = s3_12();
    let model = AnyonModel::new(&qd.group, None).unwrap();
    let psi = qd.ground_state_oracle().unwrap();
    for label in model.labels() {
        check_branches(&qd, &model, label, &psi);
    }
}

#[test]
fn probabilistic_branches_on_random_states() {
    let qd = QuantumDouble::new(FiniteGroup::symmetric(3).unwrap(), square_lattice(1, 1).unwrap());
    let model = AnyonModel::new(&qd.group, None).unwrap();
    for (seed, label) in model.labels().into_iter().enumerate() {
        check_branches(&qd, &model, label, &random_state(&qd, seed as u64));
    }
    let qd = QuantumDouble::new(FiniteGroup::cyclic(3).unwrap(), square_lattice(1, 2).unwrap());
    let model = AnyonModel::new(&qd.group, None).unwrap();
    for (seed, label) in model.labels().into_iter().enumerate() {
        check_branches(&qd, &model, label, &random_state(&qd, 100 + seed as u64));
    }
}

#[test]
fn abelian_protocol_lands_on_origin() {
    let qd = QuantumDouble::new(FiniteGroup::cyclic(3).unwrap(), square_lattice(1, 2).unwrap());
    let model = AnyonModel::new(&qd.group, None).unwrap();
    let r = standard_open_ribbon(&qd.lattice, 0, 0, 2).unwrap();
    let psi = qd.ground_state_oracle().unwrap();
    for label in model.labels() {
        for seed in 0..3 {
            let run = apply_ribbon_adaptive(&qd, &model, &psi, label, &r, seed).unwrap();
            assert_eq!(run.indices, LocalIndices::ORIGIN);
            let (want, _) = fxicpi(&qd, &model, &psi, label, &r).unwrap();
            assert!(run.state.fidelity(&want).unwrap() > 1.0 - 1e-9);
        }
    }
}

#[test]
fn deterministic_matches_direct_operator() {
    let qd = s3_12();
    let model = AnyonModel::new(&qd.group, None).unwrap();
    let r = standard_open_ribbon(&qd.lattice, 0, 0, 2).unwrap();
    let psi = qd.ground_state_oracle().unwrap();
    let depth = |label| {
        let rc = deterministic_ribbon_circuit(&qd, &model, label, &r, GadgetMode::Direct, &psi).unwrap();
        assert!(rc.residual < 1e-9);
        let (want, _) = fxicpi(&qd, &model, &psi, label, &r).unwrap();
        for b in Runner::branches(&rc.circuit, psi.clone(), 1e-14).unwrap() {
            let out = lattice_state(&qd, &rc, b.state).unwrap();
            let f = out.fidelity(&want).unwrap();
            assert!(f > 1.0 - 1e-9, "{} {:?}: fidelity {f}", model.describe(label), b.record);
        }
        rc.circuit.depth_report()
    };
    for label in model.labels() {
        depth(label);
    }
    let label = model.find(0, "standard").unwrap();
    let rc = deterministic_ribbon_circuit(&qd, &model, label, &r, GadgetMode::Direct, &psi).unwrap();
    let run = run_ribbon(&qd, &rc, &psi, Policy::seeded(7)).unwrap();
    assert_eq!(run.indices, LocalIndices::ORIGIN);
    assert_eq!(run.report, rc.circuit.depth_report());
}

#[test]
fn branch_frequencies_match_born_weights() {
    let qd = s3_12();
    let model = AnyonModel::new(&qd.group, None).unwrap();
    let r = standard_open_ribbon(&qd.lattice, 0, 0, 2).unwrap();
    let psi = qd.ground_state_oracle().unwrap();
    for label in model.labels() {
        let rc = probabilistic_ribbon_circuit(&qd, &model, label, &r, GadgetMode::Direct).unwrap();
        let shots = 1000;
        let groups = Runner::run_shots(&rc.circuit, psi.clone(), shots, 11).unwrap();
        assert_eq!(groups.iter().map(|g| g.count).sum::<usize>(), shots);
        let (nc, dp) = (model.class(label).size(), model.irrep(label).dim);
        let mut chi2 = 0.0;
        let mut cells = 0;
        for i in 0..nc {
            for j in 0..dp {
                let p = born(&qd, &model, &psi, label, LocalIndices { i, j, ip: 0, jp: 0 });
                let obs: usize = groups
                    .iter()
                    .filter(|g| g.record[I_KEY] == i as i64 && g.record[J_KEY] == j as i64)
                    .map(|g| g.count)
                    .sum();
                if p < 1e-12 {
                    assert_eq!(obs, 0);
                    continue;
                }
                let exp = p * shots as f64;
                chi2 += (obs as f64 - exp).powi(2) / exp;
                cells += 1;
            }
        }
        if cells > 1 {
            let pval = 1.0 - ChiSquared::new((cells - 1) as f64).unwrap().cdf(chi2);
            assert!(pval > 0.001, "{}: chi2 {chi2} p {pval}", model.describe(label));
        }
    }
}

#[test]
fn only_standard_open_ribbons() {
    let qd = s3_12();
    let model = AnyonModel::new(&qd.group, None).unwrap();
    let r = closed_dual_loop(&qd.lattice, 0).unwrap();
    assert!(matches!(
        probabilistic_ribbon_circuit(&qd, &model, model.trivial(), &r, GadgetMode::Direct),
        Err(Error::UnsupportedRibbon(_))
    ));
}

#[test]
fn depth_is_constant_in_ribbon_length() {
    let g = FiniteGroup::cyclic(2).unwrap();
    let model = AnyonModel::new(&g, None).unwrap();
    let reports: Vec<_> = (2..=5)
        .map(|l| {
            let qd = QuantumDouble::new(g.clone(), square_lattice(1, l).unwrap());
            let r = standard_open_ribbon(&qd.lattice, 0, 0, l).unwrap();
            let label = model.labels()[3];
            probabilistic_ribbon_circuit(&qd, &model, label, &r, GadgetMode::Teleported).unwrap().circuit.depth_report()
        })
        .collect();
    for rep in &reports {
        assert_eq!((rep.quantum_depth, rep.adaptive_rounds), (reports[0].quantum_depth, reports[0].adaptive_rounds));
    }
}
