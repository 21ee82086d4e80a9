use proptest::prelude::*;
use qdouble::group::{solvable_chain, FiniteGroup};
use qdouble::rep::{builtin_irreps, conjugacy_classes, max_abs, CMatrix};
use qdouble::sim::{omega, OperatorHandle, SiteId, StateVector, C64};

fn groups() -> Vec<FiniteGroup> {
    vec![
        FiniteGroup::cyclic(2).unwrap(),
        FiniteGroup::cyclic(5).unwrap(),
        FiniteGroup::cyclic(6).unwrap(),
        FiniteGroup::symmetric(3).unwrap(),
        FiniteGroup::dihedral(4).unwrap(),
        FiniteGroup::symmetric(4).unwrap(),
    ]
}

fn group_and_elems(k: usize) -> impl Strategy<Value = (FiniteGroup, Vec<usize>)> {
    (0..groups().len()).prop_flat_map(move |i| {
        let g = groups()[i].clone();
        let n = g.order();
        (Just(g), prop::collection::vec(0..n, k))
    })
}

fn state(dims: Vec<usize>) -> impl Strategy<Value = StateVector> {
    let n: usize = dims.iter().product();
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n).prop_map(move |v| {
        let sites = dims.iter().enumerate().map(|(i, &d)| (SiteId(i as u32), d)).collect();
        let mut s = StateVector::from_parts(sites, v.into_iter().map(|(a, b)| C64::new(a, b)).collect());
        s.normalize();
        s
    })
}

fn dist(a: &StateVector, b: &StateVector) -> f64 {
    a.amplitudes().iter().zip(b.amplitudes()).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn group_axioms((g, x) in group_and_elems(3)) {
        let (a, b, c) = (x[0], x[1], x[2]);
        prop_assert_eq!(g.mul(g.mul(a, b), c), g.mul(a, g.mul(b, c)));
        prop_assert_eq!(g.mul(g.identity(), a), a);
        prop_assert_eq!(g.mul(a, g.inv(a)), g.identity());
        prop_assert_eq!(g.pow(a, g.element_order(a) as i64), g.identity());
        prop_assert_eq!(g.conj(a, g.mul(b, c)), g.mul(g.conj(a, b), g.conj(a, c)));
    }

    #[test]
    fn class_positions_factor((g, x) in group_and_elems(1)) {
        let cd = conjugacy_classes(&g);
        for c in &cd.classes {
            let (j, k) = c.position(&g, x[0]);
            prop_assert!(c.in_centralizer(k));
            prop_assert_eq!(g.mul(c.transversal[j], k), x[0]);
        }
        let (ci, j) = cd.class_of(x[0]);
        prop_assert_eq!(cd.classes[ci].elements[j], x[0]);
    }

    #[test]
    fn coset_splits_round_trip((g, x) in group_and_elems(1)) {
        let chain = solvable_chain(&g).unwrap();
        for st in &chain.stages {
            let y = x[0] % st.group.order();
            let (j, h) = st.split.split(y);
            prop_assert!(j < st.d());
            prop_assert_eq!(st.split.merge(j, h), y);
        }
    }

    #[test]
    fn irreps_are_unitary_homomorphisms((g, x) in group_and_elems(2)) {
        prop_assume!(g.order() <= 8);
        for pi in builtin_irreps(&g).unwrap() {
            let (a, b) = (pi.gamma(x[0]), pi.gamma(x[1]));
            let ab = pi.gamma(g.mul(x[0], x[1]));
            prop_assert!(max_abs(&(a * b - ab)) < 1e-12);
            let id = CMatrix::identity(pi.dim, pi.dim);
            prop_assert!(max_abs(&(a.adjoint() * a - id)) < 1e-12);
            prop_assert!(max_abs(&(pi.gamma_inv(x[0]) - a.adjoint())) < 1e-12);
        }
    }

    #[test]
    fn operator_then_adjoint_is_identity(psi in state(vec![2, 3, 4]), a in 0i64..6, b in 0i64..6) {
        let ops = [
            OperatorHandle::pauli(SiteId(1), 3, a, b),
            OperatorHandle::fourier(SiteId(2), 4, a % 2 == 0),
            OperatorHandle::perm_fn("shift", &[(SiteId(0), 2), (SiteId(2), 4)], |x| vec![x[0], (x[1] + x[0] + 1) % 4]),
        ];
        for op in ops {
            prop_assert!(op.unitarity_defect() < 1e-12);
            let mut s = psi.clone();
            s.apply(&op).unwrap();
            prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
            s.apply(&op.adjoint()).unwrap();
            prop_assert!(dist(&s, &psi) < 1e-12);
        }
    }

    #[test]
    fn pauli_commutation((d, psi) in (2usize..=5).prop_flat_map(|d| (Just(d), state(vec![d])))) {
        let x = OperatorHandle::x_pow(SiteId(0), d, 1);
        let z = OperatorHandle::z_pow(SiteId(0), d, 1);
        // XZ = ω^{-1} ZX
        let mut xz = psi.clone();
        xz.apply(&z).unwrap();
        xz.apply(&x).unwrap();
        let mut zx = psi.clone();
        zx.apply(&x).unwrap();
        zx.apply(&z).unwrap();
        zx.scale(omega(d, -1));
        prop_assert!(dist(&xz, &zx) < 1e-12);
    }

    #[test]
    fn reorder_split_merge_round_trip(psi in state(vec![2, 6, 3])) {
        let mut s = psi.clone();
        s.reorder(&[SiteId(2), SiteId(0), SiteId(1)]).unwrap();
        s.reorder(&[SiteId(0), SiteId(1), SiteId(2)]).unwrap();
        prop_assert!(dist(&s, &psi) < 1e-15);
        s.split(SiteId(1), &[(SiteId(7), 2), (SiteId(8), 3)]).unwrap();
        s.merge(&[SiteId(7), SiteId(8)], SiteId(1)).unwrap();
        prop_assert_eq!(s.sites(), psi.sites());
        prop_assert!(dist(&s, &psi) < 1e-15);
    }

    #[test]
    fn fidelity_is_symmetric_and_bounded(a in state(vec![3, 3]), b in state(vec![3, 3])) {
        let f = a.fidelity(&b).unwrap();
        prop_assert!((f - b.fidelity(&a).unwrap()).abs() < 1e-12);
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&f));
        prop_assert!((a.fidelity(&a).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn uhlmann_maps_locally_related_states(psi in state(vec![3, 4]), a in 0i64..4, b in 0i64..4) {
        let mut phi = psi.clone();
        phi.apply(&OperatorHandle::pauli(SiteId(1), 4, a, b)).unwrap();
        let (w, res) = psi.uhlmann_unitary(&phi, &[SiteId(1)]).unwrap();
        prop_assert!(res < 1e-9);
        let mut out = psi.clone();
        out.apply(&w).unwrap();
        prop_assert!(out.fidelity(&phi).unwrap() > 1.0 - 1e-9);
    }
}
