use qdouble::group::FiniteGroup;
use qdouble::lattice::{
    closed_dual_loop, closed_region_boundary, plaquette_loop, square_lattice, standard_open_ribbon, Face, Rect, Site,
};
use qdouble::model::charge::ChargeFamily;
use qdouble::model::nogo::{kolemma_check, unitary_combination_search};
use qdouble::model::ribbon::{fxicpi, label_change_terms, ribbon_factors, ribbon_op, apply_anyonic, LocalIndices};
use qdouble::model::QuantumDouble;
use qdouble::rep::{AnyonModel, CMatrix};
use qdouble::sim::{StateVector, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

fn random_state(qd: &QuantumDouble, rng: &mut ChaCha20Rng) -> StateVector {
    let n = qd.register_len() as usize;
    let amps = (0..n).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let mut s = StateVector::from_parts(qd.register(), amps);
    s.normalize();
    s
}

fn dist(a: &StateVector, b: &StateVector) -> f64 {
    a.amplitudes().iter().zip(b.amplitudes()).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

fn s3(rows: usize, cols: usize) -> QuantumDouble {
    QuantumDouble::new(FiniteGroup::symmetric(3).unwrap(), square_lattice(rows, cols).unwrap())
}

#[test]
fn vertex_ops_multiply() {
    let qd = s3(1, 1);
    let g = &qd.group;
    for v in 0..4 {
        for a in 0..6 {
            for b in 0..6 {
                let lhs = qd.vertex_op(v, a).unwrap().to_matrix() * qd.vertex_op(v, b).unwrap().to_matrix();
                let rhs = qd.vertex_op(v, g.mul(a, b)).unwrap().to_matrix();
                assert!(qdouble::rep::max_abs(&(lhs - rhs)) < 1e-12);
            }
        }
    }
}

#[test]
fn double_relation_dense() {
    // D_{(h,g)} ↦ B^h A^g satisfies D_{(h,g)} D_{(h',g')} = δ_{h, g h' g^{-1}} D_{(h, g g')}
    let qd = s3(1, 1);
    let g = &qd.group;
    let s = Site { vertex: 0, face: Face::Plaquette(0) };
    let mut rng = ChaCha20Rng::seed_from_u64(3);
    for _ in 0..3 {
        let psi = random_state(&qd, &mut rng);
        for h in 0..6 {
            for a in 0..6 {
                for hp in 0..6 {
                    for ap in [0usize, 1, 4] {
                        let mut l = psi.clone();
                        l.apply_unchecked(&qd.vertex_op(0, ap).unwrap()).unwrap();
                        l.apply_unchecked(&qd.plaquette_op(s, hp).unwrap()).unwrap();
                        l.apply_unchecked(&qd.vertex_op(0, a).unwrap()).unwrap();
                        l.apply_unchecked(&qd.plaquette_op(s, h).unwrap()).unwrap();
                        let mut r = psi.clone();
                        if h == g.conj(a, hp) {
                            r.apply_unchecked(&qd.vertex_op(0, g.mul(a, ap)).unwrap()).unwrap();
                            r.apply_unchecked(&qd.plaquette_op(s, h).unwrap()).unwrap();
                        } else {
                            r = r.zeroed();
                        }
                        assert!(dist(&l, &r) < 1e-12, "h={h} g={a} h'={hp} g'={ap}");
                    }
                }
            }
        }
    }
}

#[test]
fn ribbon_multiplication_and_adjoint() {
    let qd = s3(1, 2);
    let g = &qd.group;
    let r = standard_open_ribbon(&qd.lattice, 0, 0, 2).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(5);
    let psi = random_state(&qd, &mut rng);
    for _ in 0..12 {
        let (h, hp, gg, gp) = (rng.gen_range(0..6), rng.gen_range(0..6), rng.gen_range(0..6), rng.gen_range(0..6));
        let mut l = psi.clone();
        l.apply_unchecked(&ribbon_op(&qd, &r, hp, gp).unwrap()).unwrap();
        l.apply_unchecked(&ribbon_op(&qd, &r, h, gg).unwrap()).unwrap();
        let mut rr = psi.clone();
        if gg == gp {
            rr.apply_unchecked(&ribbon_op(&qd, &r, g.mul(h, hp), gg).unwrap()).unwrap();
        } else {
            rr = rr.zeroed();
        }
        assert!(dist(&l, &rr) < 1e-12);
        // F^{h^{-1},g} F^{h,g} = F^{e,g}
        let mut a = psi.clone();
        a.apply_unchecked(&ribbon_op(&qd, &r, h, gg).unwrap()).unwrap();
        a.apply_unchecked(&ribbon_op(&qd, &r, g.inv(h), gg).unwrap()).unwrap();
        let mut b = psi.clone();
        b.apply_unchecked(&ribbon_op(&qd, &r, 0, gg).unwrap()).unwrap();
        assert!(dist(&a, &b) < 1e-12);
        // adjoint of the permutation body equals F^{h^{-1},g}
        let f = ribbon_op(&qd, &r, h, gg).unwrap().to_matrix();
        let fi = ribbon_op(&qd, &r, g.inv(h), gg).unwrap().to_matrix();
        assert!(qdouble::rep::max_abs(&(f.adjoint() - fi)) < 1e-12);
    }
}

#[test]
fn ribbon_factorization() {
    let qd = s3(1, 2);
    let r = standard_open_ribbon(&qd.lattice, 0, 0, 2).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(8);
    let psi = random_state(&qd, &mut rng);
    for (h, gg) in [(1, 4), (3, 0), (5, 2)] {
        let (p, cu) = ribbon_factors(&qd, &r, h, gg).unwrap();
        let mut a = psi.clone();
        a.apply_unchecked(&cu).unwrap();
        a.apply_unchecked(&p).unwrap();
        let mut b = psi.clone();
        b.apply_unchecked(&ribbon_op(&qd, &r, h, gg).unwrap()).unwrap();
        assert!(dist(&a, &b) < 1e-12);
    }
}

#[test]
fn endpoint_commutation_relations() {
    let qd = s3(1, 2);
    let g = &qd.group;
    let r = standard_open_ribbon(&qd.lattice, 0, 0, 2).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(11);
    let psi = random_state(&qd, &mut rng);
    let (v0, v1) = (r.s0.vertex, r.s1.vertex);
    for _ in 0..10 {
        let (h, gg, k) = (rng.gen_range(0..6), rng.gen_range(0..6), rng.gen_range(0..6));
        let apply = |ops: &[qdouble::sim::OperatorHandle]| {
            let mut s = psi.clone();
            for o in ops.iter().rev() {
                s.apply_unchecked(o).unwrap();
            }
            s
        };
        // A^k_{s0} F^{h,g} = F^{khk^{-1}, kg} A^k_{s0}
        let l = apply(&[qd.vertex_op(v0, k).unwrap(), ribbon_op(&qd, &r, h, gg).unwrap()]);
        let rr = apply(&[ribbon_op(&qd, &r, g.conj(k, h), g.mul(k, gg)).unwrap(), qd.vertex_op(v0, k).unwrap()]);
        assert!(dist(&l, &rr) < 1e-9, "start A");
        // A^k_{s1} F^{h,g} = F^{h, g k^{-1}} A^k_{s1}
        let l = apply(&[qd.vertex_op(v1, k).unwrap(), ribbon_op(&qd, &r, h, gg).unwrap()]);
        let rr = apply(&[ribbon_op(&qd, &r, h, g.mul(gg, g.inv(k))).unwrap(), qd.vertex_op(v1, k).unwrap()]);
        assert!(dist(&l, &rr) < 1e-9, "end A");
        // B^k_{s1} F^{h,g} = F^{h,g} B^{g^{-1} h^{-1} g k}_{s1}
        let kk = g.product(&[g.inv(gg), g.inv(h), gg, k]);
        let l = apply(&[qd.plaquette_op(r.s1, k).unwrap(), ribbon_op(&qd, &r, h, gg).unwrap()]);
        let rr = apply(&[ribbon_op(&qd, &r, h, gg).unwrap(), qd.plaquette_op(r.s1, kk).unwrap()]);
        assert!(dist(&l, &rr) < 1e-9, "end B");
    }
}

#[test]
fn ribbon_commutes_with_distant_stabilizers() {
    let qd = s3(1, 2);
    let r = standard_open_ribbon(&qd.lattice, 0, 0, 2).unwrap();
    let psi = qd.ground_state_oracle().unwrap();
    let mut s = psi.clone();
    s.apply_unchecked(&ribbon_op(&qd, &r, 1, 4).unwrap()).unwrap();
    s.normalize();
    for v in 0..qd.lattice.num_vertices() {
        if v == r.s0.vertex || v == r.s1.vertex {
            continue;
        }
        for a in 0..6 {
            let mut t = s.clone();
            t.apply(&qd.vertex_op(v, a).unwrap()).unwrap();
            assert!(dist(&t, &s) < 1e-12, "vertex {v}");
        }
    }
}

#[test]
fn ground_state_expectations() {
    let qd = s3(1, 2);
    let r = standard_open_ribbon(&qd.lattice, 0, 0, 2).unwrap();
    let psi = qd.ground_state_oracle().unwrap();
    for h in 0..6 {
        for gg in 0..6 {
            let mut t = psi.clone();
            t.apply_unchecked(&ribbon_op(&qd, &r, h, gg).unwrap()).unwrap();
            let e = psi.inner(&t).unwrap();
            let want = if h == 0 { 1.0 / 6.0 } else { 0.0 };
            assert!((e - C64::new(want, 0.0)).norm() < 1e-12);
        }
    }
}

#[test]
fn closed_loops_match_site_operators() {
    let qd = s3(1, 2);
    let mut rng = ChaCha20Rng::seed_from_u64(2);
    let psi = random_state(&qd, &mut rng);
    for v in [0, 1, 4] {
        let d = closed_dual_loop(&qd.lattice, v).unwrap();
        for a in 0..6 {
            let mut x = psi.clone();
            x.apply_unchecked(&ribbon_op(&qd, &d, a, 0).unwrap()).unwrap();
            let mut y = psi.clone();
            y.apply_unchecked(&qd.vertex_op(v, a).unwrap()).unwrap();
            assert!(dist(&x, &y) < 1e-12);
        }
    }
    for &v in &qd.lattice.plaquettes[1].corners {
        let p = plaquette_loop(&qd.lattice, 1, v).unwrap();
        for h in 0..6 {
            let mut x = psi.clone();
            x.apply_unchecked(&ribbon_op(&qd, &p, 0, h).unwrap()).unwrap();
            let mut y = psi.clone();
            y.apply_unchecked(&qd.plaquette_op(Site { vertex: v, face: Face::Plaquette(1) }, h).unwrap()).unwrap();
            assert!(dist(&x, &y) < 1e-12);
        }
    }
}

#[test]
fn ground_space_is_one_dimensional() {
    for (g, r, c) in [
        (FiniteGroup::cyclic(2).unwrap(), 1, 1),
        (FiniteGroup::cyclic(3).unwrap(), 1, 2),
        (FiniteGroup::symmetric(3).unwrap(), 1, 1),
    ] {
        let qd = QuantumDouble::new(g, square_lattice(r, c).unwrap());
        let t = qd.ground_space_dimension().unwrap();
        let td = qd.ground_space_dimension_dense(4096).unwrap();
        assert!((t - 1.0).abs() < 1e-9 && (td - 1.0).abs() < 1e-9, "{t} {td}");
    }
}

#[test]
fn oracle_energy_and_counts() {
    let qd = s3(1, 1);
    let psi = qd.ground_state_oracle().unwrap();
    let nz = psi.amplitudes().iter().filter(|a| a.norm() > 1e-12).count();
    assert_eq!(nz, 216);
    assert!((qd.energy(&psi).unwrap() + 5.0).abs() < 1e-12);
    assert!(qd.stabilizer_violation(&psi).unwrap() < 1e-12);
    let triv = QuantumDouble::new(FiniteGroup::cyclic(1).unwrap(), square_lattice(2, 2).unwrap());
    let t = triv.ground_state_oracle().unwrap();
    assert_eq!(t.amplitudes().len(), 1);
}

#[test]
fn flat_forms_are_exact() {
    let qd = s3(1, 2);
    let mut rng = ChaCha20Rng::seed_from_u64(4);
    for _ in 0..20 {
        let theta: Vec<usize> = (0..6).map(|_| rng.gen_range(0..6)).collect();
        let mut w = qd.exterior_derivative(&theta);
        let t = qd.exactness_witness(&w).unwrap();
        assert_eq!(qd.exterior_derivative(&t), w);
        w[0] = qd.group.mul(w[0], 1);
        assert!(!qd.is_flat(&w));
        assert!(qd.exactness_witness(&w).is_err());
    }
}

#[test]
fn anyonic_norm_matches_formula() {
    let qd = s3(1, 2);
    let model = AnyonModel::new(&qd.group, None).unwrap();
    let r = standard_open_ribbon(&qd.lattice, 0, 0, 2).unwrap();
    let psi = qd.ground_state_oracle().unwrap();
    for a in model.labels() {
        let (_, n2) = fxicpi(&qd, &model, &psi, a, &r).unwrap();
        let want = model.irrep(a).dim as f64 / (model.class(a).centralizer.len() as f64 * 6.0);
        assert!((n2 - want).abs() < 1e-12, "{} {n2} {want}", model.describe(a));
    }
}

#[test]
fn kolemma_flagship() {
    let qd = s3(1, 2);
    let model = AnyonModel::new(&qd.group, None).unwrap();
    let r = standard_open_ribbon(&qd.lattice, 0, 0, 2).unwrap();
    let psi = qd.ground_state_oracle().unwrap();
    let label = model.find(0, "standard").unwrap();
    for k in 0..6 {
        let rep = kolemma_check(&qd, &model, label, &r, &psi, k).unwrap();
        assert!(rep.deviation() < 1e-9, "k={k} {rep:?}");
        assert!(rep.k_property);
    }
    let rep = kolemma_check(&qd, &model, label, &r, &psi, qd.group.find("(1 2)").unwrap()).unwrap();
    assert!((rep.overlap.re + 0.5).abs() < 1e-9);
}

#[test]
fn kolemma_abelian_unimodular() {
    let qd = QuantumDouble::new(FiniteGroup::cyclic(3).unwrap(), square_lattice(1, 2).unwrap());
    let model = AnyonModel::new(&qd.group, None).unwrap();
    let r = standard_open_ribbon(&qd.lattice, 0, 0, 2).unwrap();
    let psi = qd.ground_state_oracle().unwrap();
    for a in model.labels() {
        for k in 0..3 {
            let rep = kolemma_check(&qd, &model, a, &r, &psi, k).unwrap();
            assert!((rep.overlap.norm() - 1.0).abs() < 1e-9);
            assert!(!rep.k_property);
        }
    }
}

#[test]
fn label_change_action() {
    let qd = s3(1, 2);
    let model = AnyonModel::new(&qd.group, None).unwrap();
    let label = model.find(0, "standard").unwrap();
    let r = standard_open_ribbon(&qd.lattice, 0, 0, 2).unwrap();
    let psi = qd.ground_state_oracle().unwrap();
    for j in 0..2 {
        for jp in 0..2 {
            let st = apply_anyonic(&qd, &model, &psi, label, LocalIndices { i: 0, j, ip: 0, jp }, &r).unwrap();
            for x in 0..2 {
                for y in 0..2 {
                    let out = st.combination(&label_change_terms(&qd, &model, label, x, y, r.s0.vertex).unwrap()).unwrap();
                    let want = if x == jp {
                        apply_anyonic(&qd, &model, &psi, label, LocalIndices { i: 0, j, ip: 0, jp: y }, &r).unwrap()
                    } else {
                        psi.zeroed()
                    };
                    assert!(dist(&out, &want) < 1e-12, "j={j} j'={jp} x={x} y={y}");
                }
            }
        }
    }
}

#[test]
fn charge_family_is_projective() {
    let qd = s3(1, 2);
    let model = AnyonModel::new(&qd.group, None).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(9);
    let states: Vec<StateVector> = (0..2).map(|_| random_state(&qd, &mut rng)).collect();
    let loops = [
        plaquette_loop(&qd.lattice, 0, 0).unwrap(),
        closed_dual_loop(&qd.lattice, 1).unwrap(),
        closed_region_boundary(&qd.lattice, Rect { r0: 0, c0: 1, r1: 1, c1: 2 }).unwrap(),
    ];
    let psi = qd.ground_state_oracle().unwrap();
    for sigma in &loops {
        let fam = ChargeFamily::new(&qd, &model, sigma).unwrap();
        assert!(fam.projector_violation(&states).unwrap() < 1e-9);
        let (p, _) = fam.distribution(&psi).unwrap();
        assert!((p[fam.position(model.trivial()).unwrap()] - 1.0).abs() < 1e-12);
    }
}

#[test]
fn endpoint_charge_after_pair_creation() {
    let qd = s3(1, 2);
    let model = AnyonModel::new(&qd.group, None).unwrap();
    let r = standard_open_ribbon(&qd.lattice, 0, 0, 2).unwrap();
    let sigma = closed_region_boundary(&qd.lattice, Rect { r0: 0, c0: 1, r1: 1, c1: 2 }).unwrap();
    let fam = ChargeFamily::new(&qd, &model, &sigma).unwrap();
    let psi = qd.ground_state_oracle().unwrap();
    for a in model.labels() {
        let (st, _) = fxicpi(&qd, &model, &psi, a, &r).unwrap();
        let (p, _) = fam.distribution(&st).unwrap();
        let k = fam.position(a).unwrap();
        assert!((p[k] - 1.0).abs() < 1e-9, "{}: {:?}", model.describe(a), p);
    }
}

#[test]
fn abelian_unitary_combinations() {
    for d in [2, 3, 4] {
        let qd = QuantumDouble::new(FiniteGroup::cyclic(d).unwrap(), square_lattice(1, 1).unwrap());
        let model = AnyonModel::new(&qd.group, None).unwrap();
        for a in model.labels() {
            let rep = unitary_combination_search(&qd, &model, a, 1, 0).unwrap();
            assert!(rep.residual < 1e-12);
            assert!(rep.simulator_defect.unwrap() < 1e-9);
        }
    }
}

#[test]
fn s3_standard_irrep_admits_diagonal_unitary() {
    // For C = {e}, Σ m_{jj'} F^{(C,π);(j,j')} = Σ_k c_k F^{e,k} with c orthogonal to the
    // trivial and sign characters; c = (1, ω, ω²) on both cosets of A_3 is unimodular.
    let qd = s3(1, 1);
    let model = AnyonModel::new(&qd.group, None).unwrap();
    let label = model.find(0, "standard").unwrap();
    let rep = unitary_combination_search(&qd, &model, label, 50, 1).unwrap();
    assert!(rep.residual < 1e-12, "{}", rep.residual);
    assert!(rep.simulator_defect.unwrap() < 1e-9);
    let _ = CMatrix::identity(2, 2);
}
