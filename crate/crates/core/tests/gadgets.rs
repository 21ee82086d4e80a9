use qdouble::group::{solvable_chain, FiniteGroup};
use qdouble::protocols::ccu::{ccu_circuit, ccu_target, cw_layer};
use qdouble::protocols::gadgets::{
    cyclic_gadget, cyclic_gadget_checked, prepare_resource, CyclicGadget, GadgetCircuit, GadgetMode, LinearMap,
};
use qdouble::protocols::monotone::{check_split, monotone_unitary, GroupGates, MonotoneMatrix};
use qdouble::sim::{decode, encode, omega, AdaptiveCircuit, OperatorHandle, Policy, Runner, SiteId, StateVector, C64};
use qdouble::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

const KINDS: [CyclicGadget; 3] = [
    CyclicGadget::PartialSum,
    CyclicGadget::SuccessiveDifference,
    CyclicGadget::MultitargetCx,
];

fn random_state(sites: Vec<(SiteId, usize)>, rng: &mut ChaCha20Rng) -> StateVector {
    let n: usize = sites.iter().map(|s| s.1).product();
    let amps = (0..n).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let mut s = StateVector::from_parts(sites, amps);
    s.normalize();
    s
}

fn check_exhaustive(gc: &GadgetCircuit, f: impl Fn(&[usize]) -> Vec<usize>) {
    let inputs: Vec<(SiteId, usize)> = gc.inputs.iter().copied().zip(gc.dims.iter().copied()).collect();
    let images = Runner::basis_action(&gc.circuit, &inputs, &gc.outputs, 3).unwrap();
    let mut x = vec![0; gc.dims.len()];
    for (i, img) in images.iter().enumerate() {
        decode(i, &gc.dims, &mut x);
        assert_eq!(*img, Some(encode(&f(&x), &gc.dims)), "input {x:?}");
    }
}

#[test]
fn generalized_pauli_relations() {
    for d in 2..=6 {
        let x = OperatorHandle::x_pow(SiteId(0), d, 1).to_matrix();
        let z = OperatorHandle::z_pow(SiteId(0), d, 1).to_matrix();
        let lhs = &x * &z;
        let rhs = &z * &x * omega(d, -1);
        assert!((lhs - rhs).norm() < 1e-12, "d={d}");
        let p = OperatorHandle::pauli(SiteId(0), d, 2, 1).to_matrix();
        let x2 = OperatorHandle::x_pow(SiteId(0), d, 2).to_matrix();
        assert!((p - x2 * z).norm() < 1e-12);
    }
}

#[test]
fn fourier_conjugates_paulis() {
    for d in 2..=5 {
        let s = SiteId(0);
        let f = OperatorHandle::fourier(s, d, false).to_matrix();
        let x = OperatorHandle::x_pow(s, d, 1).to_matrix();
        let z = OperatorHandle::z_pow(s, d, 1).to_matrix();
        let zi = OperatorHandle::x_pow(s, d, -1).to_matrix();
        assert!((&f * &x * f.adjoint() - &z).norm() < 1e-12);
        assert!((&f * &z * f.adjoint() - zi).norm() < 1e-12);
    }
}

#[test]
fn resource_states_satisfy_all_stabilizers() {
    for kind in [CyclicGadget::PartialSum, CyclicGadget::SuccessiveDifference] {
        for d in [2, 3] {
            for n in 1..=4 {
                for seed in 0..3 {
                    let mut circ = AdaptiveCircuit::new(0);
                    let res = prepare_resource(&mut circ, kind, d, n, "R").unwrap();
                    let empty = StateVector::from_parts(vec![], vec![C64::new(1.0, 0.0)]);
                    let out = Runner::run(&circ, empty, seed).unwrap().state;
                    assert_eq!(res.stabilizers.len(), 2 * n);
                    for t in &res.stabilizers {
                        let mut s = out.clone();
                        t.apply(&mut s).unwrap();
                        let ov = out.inner(&s).unwrap();
                        assert!((ov - C64::new(1.0, 0.0)).norm() < 1e-9, "{kind:?} d={d} n={n}: {t:?} -> {ov}");
                    }
                    // only local generators are measured
                    assert!(res.measured.iter().all(|t| t.factors.len() <= 3));
                }
            }
        }
    }
}

#[test]
fn partial_sum_resource_matches_paper_generators() {
    let mut circ = AdaptiveCircuit::new(0);
    let res = prepare_resource(&mut circ, CyclicGadget::PartialSum, 3, 3, "R").unwrap();
    let (a, b) = (&res.a, &res.b);
    // T^X_1 = X_{A_1} X_{B_1} X_{B_2} X_{B_3}; T^Z_2 = Z^{-1}_{A_2} Z^{-1}_{B_1} Z_{B_2}
    assert_eq!(res.stabilizers[0].factors, vec![(a[0], 1, 0), (b[0], 1, 0), (b[1], 1, 0), (b[2], 1, 0)]);
    assert_eq!(res.stabilizers[4].factors, vec![(a[1], 0, -1), (b[0], 0, -1), (b[1], 0, 1)]);
    let mut circ = AdaptiveCircuit::new(0);
    let res = prepare_resource(&mut circ, CyclicGadget::SuccessiveDifference, 3, 3, "R").unwrap();
    let (a, b) = (&res.a, &res.b);
    // T^X_1 = X_{A_1} X_{B_1} X^{-1}_{B_2}; T^X_3 = X_{A_3} X_{B_3}
    assert_eq!(res.stabilizers[0].factors, vec![(a[0], 1, 0), (b[0], 1, 0), (b[1], -1, 0)]);
    assert_eq!(res.stabilizers[2].factors, vec![(a[2], 1, 0), (b[2], 1, 0)]);
}

#[test]
fn direct_gadgets_exhaustive() {
    for kind in KINDS {
        for d in [2, 3] {
            for n in 1..=4 {
                let gc = cyclic_gadget(kind, d, n, GadgetMode::Direct).unwrap();
                check_exhaustive(&gc, |x| kind.target(d, x));
            }
        }
    }
}

#[test]
fn teleported_gadgets_exhaustive() {
    for kind in KINDS {
        for (d, nmax) in [(2, 4), (3, 3)] {
            for n in 1..=nmax {
                let gc = cyclic_gadget(kind, d, n, GadgetMode::Teleported).unwrap();
                check_exhaustive(&gc, |x| kind.target(d, x));
            }
        }
    }
}

#[test]
fn difference_inverts_partial_sum() {
    for d in [2usize, 3] {
        for n in 2..=4 {
            let u = LinearMap::partial_sum(n);
            let dl = LinearMap::successive_difference(n);
            let dims = vec![d; n];
            let mut x = vec![0; n];
            for i in 0..(d as usize).pow(n as u32) {
                decode(i, &dims, &mut x);
                assert_eq!(dl.apply(&u.apply(&x, d), d), x);
            }
        }
    }
}

#[test]
fn teleported_matches_direct_on_random_states() {
    let mut rng = ChaCha20Rng::seed_from_u64(11);
    for kind in KINDS {
        for d in [2, 3] {
            let n = 4;
            let tele = cyclic_gadget(kind, d, n, GadgetMode::Teleported).unwrap();
            let direct = cyclic_gadget(kind, d, n, GadgetMode::Direct).unwrap();
            for trial in 0..20 {
                let sites: Vec<(SiteId, usize)> = tele.inputs.iter().map(|&s| (s, d)).collect();
                let psi = random_state(sites, &mut rng);
                let a = Runner::run_onto(&tele.circuit, psi.clone(), &tele.outputs, Policy::seeded(trial)).unwrap();
                let b = Runner::run_onto(&direct.circuit, psi, &direct.outputs, Policy::seeded(trial)).unwrap();
                let f = StateVector::from_parts(b.state.sites().to_vec(), a.state.amplitudes().to_vec())
                    .fidelity(&b.state)
                    .unwrap();
                assert!(f > 1.0 - 1e-9, "{kind:?} d={d} trial {trial}: fidelity {f}");
            }
        }
    }
}

#[test]
fn gadget_depth_is_constant() {
    for kind in KINDS {
        for d in [2, 3] {
            let reports: Vec<_> = (2..=6)
                .map(|n| cyclic_gadget(kind, d, n, GadgetMode::Teleported).unwrap().circuit.depth_report())
                .collect();
            for r in &reports {
                assert_eq!(r.quantum_depth, reports[0].quantum_depth, "{kind:?} d={d}");
                assert_eq!(r.adaptive_rounds, reports[0].adaptive_rounds);
                assert!(r.max_support <= 3);
            }
        }
    }
}

#[test]
fn runtime_depth_matches_static() {
    let gc = cyclic_gadget(CyclicGadget::MultitargetCx, 2, 3, GadgetMode::Teleported).unwrap();
    let psi = StateVector::basis(gc.inputs.iter().map(|&s| (s, 2)).collect(), &[1, 0, 1, 1]).unwrap();
    let r = Runner::run(&gc.circuit, psi, 5).unwrap();
    assert_eq!(r.report, gc.circuit.depth_report());
}

#[test]
fn gadget_size_guard() {
    assert!(matches!(
        cyclic_gadget_checked(CyclicGadget::PartialSum, 7, 40, GadgetMode::Teleported),
        Err(Error::TooLarge(..))
    ));
}

fn check_monotone(g: &FiniteGroup, a: &MonotoneMatrix, mode: GadgetMode) {
    let chain = solvable_chain(g).unwrap();
    let gc = monotone_unitary(a, &chain, mode).unwrap();
    let inputs: Vec<(SiteId, usize)> = gc.inputs.iter().map(|&s| (s, g.order())).collect();
    let dims = vec![g.order(); a.n()];
    let images = Runner::basis_action(&gc.circuit, &inputs, &gc.outputs, 1).unwrap();
    let mut x = vec![0; a.n()];
    for (i, img) in images.iter().enumerate() {
        decode(i, &dims, &mut x);
        assert_eq!(*img, Some(encode(&a.gamma(g, &x), &dims)), "{} {:?} on {x:?}", g.name(), a.rows());
    }
}

#[test]
fn monotone_reduction_exhaustive() {
    for g in [FiniteGroup::cyclic(6).unwrap(), FiniteGroup::symmetric(3).unwrap()] {
        for n in 1..=3 {
            for a in [
                MonotoneMatrix::identity(n),
                MonotoneMatrix::partial_products(n),
                MonotoneMatrix::partial_products_inverse(n),
                MonotoneMatrix::right_fanout(n),
            ] {
                assert!(a.is_bijective(&g).unwrap());
                check_monotone(&g, &a, GadgetMode::Direct);
            }
        }
    }
}

#[test]
fn monotone_reduction_teleported() {
    let g = FiniteGroup::symmetric(3).unwrap();
    for n in 1..=2 {
        for a in [
            MonotoneMatrix::partial_products(n),
            MonotoneMatrix::partial_products_inverse(n),
            MonotoneMatrix::right_fanout(n),
        ] {
            check_monotone(&g, &a, GadgetMode::Teleported);
        }
    }
}

#[test]
fn monotone_examples() {
    let g = FiniteGroup::symmetric(3).unwrap();
    let (t, c) = (g.find("(1 2)").unwrap(), g.find("(1 2 3)").unwrap());
    let v = MonotoneMatrix::partial_products(3);
    assert_eq!(v.gamma(&g, &[t, c, t]), vec![t, g.mul(t, c), g.mul(g.mul(t, c), t)]);
    let cx = MonotoneMatrix::right_fanout(3);
    assert_eq!(cx.gamma(&g, &[t, c, c]), vec![g.mul(t, c), g.mul(c, c), c]);
}

#[test]
fn monotone_validation() {
    assert!(matches!(MonotoneMatrix::new(vec![vec![1, -1], vec![0, 1]]), Err(Error::NotMonotone(_))));
    assert!(matches!(MonotoneMatrix::new(vec![vec![2, 0], vec![0, 1]]), Err(Error::NotMonotone(_))));
    assert!(matches!(MonotoneMatrix::new(vec![vec![1, 0]]), Err(Error::NotMonotone(_))));
    let ok = MonotoneMatrix::new(vec![vec![-1, 1], vec![0, 1]]).unwrap();
    let chain = solvable_chain(&FiniteGroup::symmetric(3).unwrap()).unwrap();
    assert!(matches!(monotone_unitary(&ok, &chain, GadgetMode::Direct), Err(Error::UnsupportedMatrix(_))));
    let q8 = solvable_chain(&quaternion()).unwrap();
    let v = MonotoneMatrix::partial_products(2);
    assert!(matches!(monotone_unitary(&v, &q8, GadgetMode::Direct), Err(Error::NonSplitExtension(_))));
}

/// `Q_8` with elements `±1, ±i, ±j, ±k` indexed `2u + s` (`s = 1` for the negative sign).
fn quaternion() -> FiniteGroup {
    // unit products: (sign, unit) of u*w for u, w in 1, i, j, k
    let unit = |u: usize, w: usize| -> (usize, usize) {
        match (u, w) {
            (0, w) => (0, w),
            (u, 0) => (0, u),
            (u, w) if u == w => (1, 0),
            (1, 2) => (0, 3),
            (2, 3) => (0, 1),
            (3, 1) => (0, 2),
            (2, 1) => (1, 3),
            (3, 2) => (1, 1),
            (1, 3) => (1, 2),
            _ => unreachable!(),
        }
    };
    let rows = (0..8)
        .map(|x| {
            (0..8)
                .map(|y| {
                    let (s, u) = unit(x / 2, y / 2);
                    2 * u + (s + x % 2 + y % 2) % 2
                })
                .collect()
        })
        .collect();
    FiniteGroup::from_table(rows, None, "Q8").unwrap()
}

#[test]
fn dihedral_chain_is_split() {
    let g = FiniteGroup::dihedral(4).unwrap();
    let chain = solvable_chain(&g).unwrap();
    check_split(&chain).unwrap();
    let gg = g.clone();
    group_gate_action(&g, 2, |gt, c, s| gt.v(c, s, "V").unwrap(), move |x| vec![x[0], gg.mul(x[0], x[1])]);
}

fn group_gate_action(
    g: &FiniteGroup,
    n: usize,
    build: impl Fn(&GroupGates, &mut AdaptiveCircuit, &[SiteId]) -> Vec<SiteId>,
    f: impl Fn(&[usize]) -> Vec<usize>,
) {
    let chain = solvable_chain(g).unwrap();
    let gates = GroupGates::new(&chain, GadgetMode::Direct).unwrap();
    let inputs: Vec<SiteId> = (0..n as u32).map(SiteId).collect();
    let mut circ = AdaptiveCircuit::new(n as u32);
    let outputs = build(&gates, &mut circ, &inputs);
    let dims = vec![g.order(); n];
    let ins: Vec<(SiteId, usize)> = inputs.iter().map(|&s| (s, g.order())).collect();
    let images = Runner::basis_action(&circ, &ins, &outputs, 0).unwrap();
    let mut x = vec![0; n];
    for (i, img) in images.iter().enumerate() {
        decode(i, &dims, &mut x);
        assert_eq!(*img, Some(encode(&f(&x), &dims)), "input {x:?}");
    }
}

#[test]
fn multiplication_gate_identities() {
    for g in [FiniteGroup::symmetric(3).unwrap(), FiniteGroup::cyclic(3).unwrap(), FiniteGroup::cyclic(2).unwrap()] {
        for n in 2..=3 {
            let gg = g.clone();
            // CX^⇒_{C^L → C_{L+1}} = V† CX V
            group_gate_action(&g, n, |gt, c, s| gt.cx_product_into(c, s, "P").unwrap(), |x| {
                let (t, ys) = x.split_last().unwrap();
                let mut out = ys.to_vec();
                out.push(gg.mul(gg.product(ys), *t));
                out
            });
            let gg = g.clone();
            // CX^⇒_{C_{L+1} → C^L} = S CX^⇐ S
            group_gate_action(&g, n, |gt, c, s| gt.cx_left_fanout(c, s, "L").unwrap(), |x| {
                let (h, ys) = x.split_last().unwrap();
                ys.iter().map(|&y| gg.mul(*h, y)).chain([*h]).collect()
            });
            let gg = g.clone();
            // (CX^⇐)† = S_{C_{L+1}} CX^⇐ S_{C_{L+1}}
            group_gate_action(&g, n, |gt, c, s| gt.cx_right_fanout_dagger(c, s, "R").unwrap(), |x| {
                let (h, ys) = x.split_last().unwrap();
                ys.iter().map(|&y| gg.mul(y, gg.inv(*h))).chain([*h]).collect()
            });
            let gg = g.clone();
            group_gate_action(&g, n, |gt, c, s| gt.cx_left_fanout_dagger(c, s, "Q").unwrap(), |x| {
                let (h, ys) = x.split_last().unwrap();
                ys.iter().map(|&y| gg.mul(gg.inv(*h), y)).chain([*h]).collect()
            });
        }
    }
}

#[test]
fn ccu_exhaustive_s3() {
    let g = FiniteGroup::symmetric(3).unwrap();
    let chain = solvable_chain(&g).unwrap();
    let gates = GroupGates::new(&chain, GadgetMode::Direct).unwrap();
    for l in 1..=2 {
        let (circ, ins, outs) = ccu_circuit(&gates, l).unwrap();
        let mut in_sites = vec![(ins.a, 6)];
        in_sites.extend(ins.c.iter().map(|&s| (s, 6)));
        in_sites.extend(ins.b.iter().map(|&s| (s, 6)));
        let mut out_sites = vec![outs.a];
        out_sites.extend(&outs.c);
        out_sites.extend(&outs.b);
        let images = Runner::basis_action(&circ, &in_sites, &out_sites, 0).unwrap();
        let dims = vec![6; 2 * l + 1];
        let mut x = vec![0; 2 * l + 1];
        for (i, img) in images.iter().enumerate() {
            decode(i, &dims, &mut x);
            let (h, y, b) = (x[0], &x[1..=l], &x[l + 1..]);
            let mut want = vec![h];
            want.extend(y);
            want.extend(ccu_target(&g, h, y, b));
            assert_eq!(*img, Some(encode(&want, &dims)));
        }
    }
}

#[test]
fn ccu_example_and_cw_depth() {
    let g = FiniteGroup::symmetric(3).unwrap();
    let (t, c) = (g.find("(1 2)").unwrap(), g.find("(1 2 3)").unwrap());
    assert_eq!(ccu_target(&g, t, &[c, 0], &[0, 0]), vec![t, g.find("(1 3)").unwrap()]);
    assert_eq!(ccu_target(&g, 0, &[c, t], &[t, c]), vec![t, c]);
    for l in 1..=6u32 {
        let mut circ = AdaptiveCircuit::new(0);
        let cs: Vec<SiteId> = (0..l).map(SiteId).collect();
        let bs: Vec<SiteId> = (l..2 * l).map(SiteId).collect();
        for op in cw_layer(&g, &cs, &bs, false) {
            circ.unitary(op);
        }
        let r = circ.depth_report();
        assert_eq!(r.quantum_depth, usize::from(l > 1));
    }
}

#[test]
fn ccu_teleported_matches_direct() {
    let g = FiniteGroup::symmetric(3).unwrap();
    let chain = solvable_chain(&g).unwrap();
    let direct = GroupGates::new(&chain, GadgetMode::Direct).unwrap();
    let tele = GroupGates::new(&chain, GadgetMode::Teleported).unwrap();
    let (cd, ins, od) = ccu_circuit(&direct, 2).unwrap();
    let (ct, _, ot) = ccu_circuit(&tele, 2).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(5);
    let mut in_sites = vec![(ins.a, 6)];
    in_sites.extend(ins.c.iter().map(|&s| (s, 6)));
    in_sites.extend(ins.b.iter().map(|&s| (s, 6)));
    let order = |o: &qdouble::protocols::ccu::CcuSites| {
        let mut v = vec![o.a];
        v.extend(&o.c);
        v.extend(&o.b);
        v
    };
    for trial in 0..20 {
        let psi = random_state(in_sites.clone(), &mut rng);
        let a = Runner::run_onto(&cd, psi.clone(), &order(&od), Policy::seeded(trial)).unwrap();
        let b = Runner::run_onto(&ct, psi, &order(&ot), Policy::seeded(trial)).unwrap();
        let f = StateVector::from_parts(a.state.sites().to_vec(), b.state.amplitudes().to_vec())
            .fidelity(&a.state)
            .unwrap();
        assert!(f > 1.0 - 1e-9, "trial {trial}: {f}");
    }
}
