use qdouble::group::{solvable_chain, FiniteGroup};
use qdouble::lattice::square_lattice;
use qdouble::model::QuantumDouble;
use qdouble::protocols::prepare::{
    exact_form_merge, exact_form_split, prepare_ground_state, preparation_circuit, run_preparation, BaseCase,
};
use qdouble::sim::{Policy, SiteId};
use qdouble::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

fn qd(g: FiniteGroup, r: usize, c: usize) -> QuantumDouble {
    QuantumDouble::new(g, square_lattice(r, c).unwrap())
}

fn check_fidelity(q: &QuantumDouble, base: BaseCase, seeds: u64) {
    let oracle = q.ground_state_oracle().unwrap();
    let pc = preparation_circuit(q, base).unwrap();
    for seed in 0..seeds {
        let r = run_preparation(q, &pc, Policy::seeded(seed)).unwrap();
        let f = r.state.fidelity(&oracle).unwrap();
        assert!(f > 1.0 - 1e-9, "{} {}x{} {base:?} seed {seed}: fidelity {f}", q.group.name(), q.lattice.rows, q.lattice.cols);
        assert!((r.state.norm_sqr() - 1.0).abs() < 1e-9);
        assert_eq!(r.m_sums.len(), pc.vertex_stages.len());
        assert!(r.m_sums.iter().all(|&m| m == 0), "m sums {:?}", r.m_sums);
    }
}

#[test]
fn z2_single_plaquette_is_eight_term_superposition() {
    let q = qd(FiniteGroup::cyclic(2).unwrap(), 1, 1);
    let r = prepare_ground_state(&q, 3, BaseCase::AncillaSyndrome).unwrap();
    let nz: Vec<f64> = r.state.amplitudes().iter().map(|a| a.norm_sqr()).filter(|&p| p > 1e-12).collect();
    assert_eq!(nz.len(), 8);
    assert!(nz.iter().all(|p| (p - 0.125).abs() < 1e-12));
    assert!((r.state.fidelity(&q.ground_state_oracle().unwrap()).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn cyclic_fidelity_ancilla_syndrome() {
    for (r, c) in [(1, 1), (1, 2), (2, 2), (2, 3)] {
        check_fidelity(&qd(FiniteGroup::cyclic(2).unwrap(), r, c), BaseCase::AncillaSyndrome, 20);
    }
    for (r, c) in [(1, 1), (1, 2), (2, 2)] {
        check_fidelity(&qd(FiniteGroup::cyclic(3).unwrap(), r, c), BaseCase::AncillaSyndrome, 20);
    }
}

#[test]
fn cyclic_fidelity_other_base_cases() {
    for base in [BaseCase::DirectSyndrome, BaseCase::VertexStage] {
        for (r, c) in [(1, 1), (1, 2), (2, 2)] {
            check_fidelity(&qd(FiniteGroup::cyclic(2).unwrap(), r, c), base, 10);
            check_fidelity(&qd(FiniteGroup::cyclic(3).unwrap(), r, c), base, 5);
        }
    }
}

#[test]
fn s3_fidelity() {
    for (r, c) in [(1, 1), (1, 2)] {
        check_fidelity(&qd(FiniteGroup::symmetric(3).unwrap(), r, c), BaseCase::AncillaSyndrome, 20);
    }
    check_fidelity(&qd(FiniteGroup::symmetric(3).unwrap(), 1, 1), BaseCase::VertexStage, 10);
}

#[test]
fn composite_cyclic_and_dihedral_fidelity() {
    check_fidelity(&qd(FiniteGroup::cyclic(4).unwrap(), 1, 1), BaseCase::AncillaSyndrome, 5);
    check_fidelity(&qd(FiniteGroup::cyclic(6).unwrap(), 1, 1), BaseCase::VertexStage, 5);
    check_fidelity(&qd(FiniteGroup::dihedral(4).unwrap(), 1, 1), BaseCase::AncillaSyndrome, 5);
}

#[test]
fn output_is_stabilized() {
    for (g, r, c) in [
        (FiniteGroup::cyclic(3).unwrap(), 1, 2),
        (FiniteGroup::symmetric(3).unwrap(), 1, 1),
        (FiniteGroup::symmetric(3).unwrap(), 1, 2),
    ] {
        let q = qd(g, r, c);
        for seed in 0..3 {
            let s = prepare_ground_state(&q, seed, BaseCase::AncillaSyndrome).unwrap().state;
            let v = q.stabilizer_violation(&s).unwrap();
            assert!(v < 1e-9, "violation {v}");
        }
    }
}

#[test]
fn depth_is_constant_across_lattices() {
    for base in [BaseCase::AncillaSyndrome, BaseCase::VertexStage] {
        let reports: Vec<_> = [(1, 1), (1, 2), (2, 2), (2, 3)]
            .iter()
            .map(|&(r, c)| {
                preparation_circuit(&qd(FiniteGroup::cyclic(2).unwrap(), r, c), base)
                    .unwrap()
                    .circuit
                    .depth_report()
            })
            .collect();
        for rep in &reports {
            assert_eq!(rep.quantum_depth, reports[0].quantum_depth, "{base:?} {reports:?}");
            assert_eq!(rep.adaptive_rounds, reports[0].adaptive_rounds, "{base:?} {reports:?}");
            assert!(rep.max_support <= 2);
        }
    }
    let z3 = |r, c| {
        preparation_circuit(&qd(FiniteGroup::cyclic(3).unwrap(), r, c), BaseCase::AncillaSyndrome)
            .unwrap()
            .circuit
            .depth_report()
    };
    let (a, b) = (z3(1, 2), z3(2, 2));
    assert_eq!((a.quantum_depth, a.adaptive_rounds), (b.quantum_depth, b.adaptive_rounds));
}

#[test]
fn runtime_depth_matches_static() {
    let q = qd(FiniteGroup::symmetric(3).unwrap(), 1, 1);
    let pc = preparation_circuit(&q, BaseCase::AncillaSyndrome).unwrap();
    let r = run_preparation(&q, &pc, Policy::seeded(1)).unwrap();
    assert_eq!(r.report, pc.circuit.depth_report());
    assert_eq!(pc.vertex_stages.len(), 1);
}

#[test]
fn preparation_size_guard() {
    let q = qd(FiniteGroup::symmetric(3).unwrap(), 3, 3);
    assert!(matches!(preparation_circuit(&q, BaseCase::AncillaSyndrome), Err(Error::TooLarge(_, _))));
}

#[test]
fn exact_form_split_round_trip() {
    let g = FiniteGroup::symmetric(3).unwrap();
    let chain = solvable_chain(&g).unwrap();
    let split = &chain.stages[0].split;
    let mut rng = ChaCha20Rng::seed_from_u64(5);
    for (r, c) in [(1, 1), (1, 2)] {
        let q = qd(g.clone(), r, c);
        let nv = q.lattice.num_vertices();
        let trivial = vec![g.identity(); q.lattice.num_edges()];
        let (theta, eta) = exact_form_split(&q, split, &trivial).unwrap();
        assert!(theta.iter().all(|&t| t == 0));
        assert!(eta.iter().all(|&h| split.subgroup[h] == g.identity()));
        for _ in 0..50 {
            let phi: Vec<usize> = (0..nv).map(|_| rng.gen_range(0..6)).collect();
            let w = q.exterior_derivative(&phi);
            let (theta, eta) = exact_form_split(&q, split, &w).unwrap();
            assert_eq!(exact_form_merge(&q, split, &theta, &eta), w);
            assert!(theta.iter().all(|&t| t < split.quotient_order));
            // η is exact over H
            let hq = QuantumDouble::new(chain.stages[0].subgroup_group(), q.lattice.clone());
            hq.exactness_witness(&eta).unwrap();
        }
    }
    let q = qd(g.clone(), 1, 1);
    let mut bad = vec![g.identity(); q.lattice.num_edges()];
    bad[0] = 1;
    assert!(matches!(exact_form_split(&q, split, &bad), Err(Error::NotExact(_))));
}

#[test]
fn outputs_are_distinct_edge_qudits() {
    let q = qd(FiniteGroup::symmetric(3).unwrap(), 1, 2);
    let pc = preparation_circuit(&q, BaseCase::AncillaSyndrome).unwrap();
    let mut o: Vec<SiteId> = pc.outputs.clone();
    o.sort();
    o.dedup();
    assert_eq!(o.len(), q.lattice.num_edges());
}
