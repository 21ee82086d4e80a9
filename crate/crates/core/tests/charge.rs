use qdouble::group::FiniteGroup;
use qdouble::lattice::{
    closed_dual_loop, closed_region_boundary, plaquette_loop, square_lattice, standard_open_ribbon, Rect, Ribbon,
};
use qdouble::model::charge::ChargeFamily;
use qdouble::model::ribbon::fxicpi;
use qdouble::model::QuantumDouble;
use qdouble::protocols::charge::{
    adaptive_charge_distribution, charge_measurement_circuit, measure_charge_adaptive,
};
use qdouble::protocols::gadgets::GadgetMode;
use qdouble::rep::AnyonModel;
use qdouble::sim::{StateVector, C64};
use qdouble::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

fn random_state(qd: &QuantumDouble, seed: u64) -> StateVector {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let n = qd.register_len() as usize;
    let amps = (0..n).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let mut s = StateVector::from_parts(qd.register(), amps);
    s.normalize();
    s
}

/// Total-variation distance and worst posterior infidelity against the direct measurement.
fn compare(qd: &QuantumDouble, model: &AnyonModel, sigma: &Ribbon, psi: &StateVector) -> (f64, f64) {
    let fam = ChargeFamily::new(qd, model, sigma).unwrap();
    let (probs, images) = fam.distribution(psi).unwrap();
    let cc = charge_measurement_circuit(qd, model, sigma, GadgetMode::Direct).unwrap();
    let outs = adaptive_charge_distribution(qd, &cc, psi).unwrap();
    let mut adaptive = vec![0.0; probs.len()];
    let mut worst: f64 = 0.0;
    for o in &outs {
        let k = fam.position(o.label).unwrap();
        adaptive[k] += o.probability;
        let mut want = images[k].clone();
        want.normalize();
        worst = worst.max(1.0 - o.state.fidelity(&want).unwrap());
    }
    let tv = 0.5 * probs.iter().zip(&adaptive).map(|(a, b)| (a - b).abs()).sum::<f64>();
    (tv, worst)
}

fn s3(r: usize, c: usize) -> QuantumDouble {
    QuantumDouble::new(FiniteGroup::symmetric(3).unwrap(), square_lattice(r, c).unwrap())
}

#[test]
fn matches_direct_measurement_on_small_lattice() {
    let qd = s3(1, 1);
    let model = AnyonModel::new(&qd.group, None).unwrap();
    let loops = [
        plaquette_loop(&qd.lattice, 0, qd.lattice.vertex(0, 0)).unwrap(),
        closed_dual_loop(&qd.lattice, qd.lattice.vertex(0, 1)).unwrap(),
        closed_region_boundary(&qd.lattice, Rect { r0: 0, c0: 0, r1: 1, c1: 1 }).unwrap(),
    ];
    let vacuum = qd.ground_state_oracle().unwrap();
    let r = standard_open_ribbon(&qd.lattice, 0, 0, 1).unwrap();
    let mut states = vec![vacuum.clone()];
    for a in model.labels() {
        states.push(fxicpi(&qd, &model, &vacuum, a, &r).unwrap().0);
    }
    for seed in 0..4 {
        states.push(random_state(&qd, seed));
    }
    for sigma in &loops {
        for psi in &states {
            let (tv, inf) = compare(&qd, &model, sigma, psi);
            assert!(tv < 1e-9 && inf < 1e-9, "{:?}: tv {tv} infidelity {inf}", sigma.kind);
        }
    }
}

#[test]
fn matches_direct_measurement_with_targets() {
    let qd = s3(1, 2);
    let model = AnyonModel::new(&qd.group, None).unwrap();
    let sigma = closed_region_boundary(&qd.lattice, Rect { r0: 0, c0: 0, r1: 1, c1: 1 }).unwrap();
    assert!(!sigma.x.is_empty());
    let vacuum = qd.ground_state_oracle().unwrap();
    let r = standard_open_ribbon(&qd.lattice, 0, 1, 2).unwrap();
    let label = model.find(0, "standard").unwrap();
    for psi in [fxicpi(&qd, &model, &vacuum, label, &r).unwrap().0, random_state(&qd, 9)] {
        let (tv, inf) = compare(&qd, &model, &sigma, &psi);
        assert!(tv < 1e-9 && inf < 1e-9, "tv {tv} infidelity {inf}");
    }
}

#[test]
fn vacuum_measures_trivial() {
    let qd = QuantumDouble::new(FiniteGroup::cyclic(3).unwrap(), square_lattice(1, 2).unwrap());
    let model = AnyonModel::new(&qd.group, None).unwrap();
    let sigma = closed_dual_loop(&qd.lattice, qd.lattice.vertex(0, 1)).unwrap();
    let vacuum = qd.ground_state_oracle().unwrap();
    for seed in 0..3 {
        let o = measure_charge_adaptive(&qd, &model, &vacuum, &sigma, seed).unwrap();
        assert_eq!(o.label, model.trivial());
        assert!((o.probability - 1.0).abs() < 1e-12);
        assert!(o.state.fidelity(&vacuum).unwrap() > 1.0 - 1e-12);
        assert_eq!(o.report, charge_measurement_circuit(&qd, &model, &sigma, GadgetMode::Direct).unwrap().circuit.depth_report());
    }
}

#[test]
fn open_ribbons_are_rejected() {
    let qd = s3(1, 1);
    let model = AnyonModel::new(&qd.group, None).unwrap();
    let r = standard_open_ribbon(&qd.lattice, 0, 0, 1).unwrap();
    assert!(matches!(charge_measurement_circuit(&qd, &model, &r, GadgetMode::Direct), Err(Error::NotClosed)));
}
