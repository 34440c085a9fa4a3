use super::*;
use crate::cyclotomic::e_of;
use crate::fqm::DEFAULT_ENUM_BUDGET;
use crate::linalg::express_in_span;

fn r(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

fn budget() -> RepBudget {
    RepBudget::default()
}

fn unit_vec(dim: usize, i: usize) -> Vec<Cyc> {
    let mut v = vec![Cyc::from_integer(0); dim];
    v[i] = Cyc::from_integer(1);
    v
}

#[test]
fn weil_rep_d1() {
    let m = Fqm::standard_d(1, 1).unwrap();
    let rep = weil_rep(&m, &budget()).unwrap();
    assert_eq!(rep.dim, 2);
    assert!(rep.t_entry(0, 0).is_one());
    assert!(rep.t_entry(1, 1).eq_value(&e_of(&r(1, 4))));
    assert!(rep.t_entry(0, 1).is_zero());
    // S entries: sigma/sqrt(2) e(-B(y,x)) with sigma = e_8(-1):
    // gamma = (1 - i)/2
    let gamma = Cyc::from_integer(1)
        .add(&e_of(&r(-1, 4)))
        .scale(&r(1, 2));
    assert!(rep.s_entry(0, 0).eq_value(&gamma));
    assert!(rep.s_entry(1, 1).eq_value(&gamma.mul(&e_of(&r(1, 2)))));
}

#[test]
fn weil_rep_l3_s_squared() {
    let m = Fqm::standard_l(3, 1).unwrap();
    let rep = weil_rep(&m, &budget()).unwrap();
    // S^2 delta_1 = sigma^2 delta_{-1} = -delta_2
    let v = unit_vec(3, 1);
    let s2 = rep.apply_s(&rep.apply_s(&v));
    assert!(s2[0].is_zero());
    assert!(s2[1].is_zero());
    assert!(s2[2].eq_value(&Cyc::from_integer(-1)));
}

#[test]
fn weil_rep_trivial() {
    let rep = weil_rep(&Fqm::trivial(), &budget()).unwrap();
    assert_eq!(rep.dim, 1);
    assert!(rep.t_entry(0, 0).is_one());
    assert!(rep.s_entry(0, 0).is_one());
}

#[test]
fn tensor_matches_orthogonal_sum() {
    let a = Fqm::standard_d(1, 1).unwrap();
    let b = Fqm::standard_l(3, 1).unwrap();
    let ra = weil_rep(&a, &budget()).unwrap();
    let rb = weil_rep(&b, &budget()).unwrap();
    let tensor = ra.tensor(&rb, &budget()).unwrap();
    let sum = weil_rep(&a.orth_sum(&b), &budget()).unwrap();
    assert_eq!(tensor.dim, sum.dim);
    for i in 0..tensor.dim {
        for j in 0..tensor.dim {
            assert!(tensor.t_entry(i, j).eq_value(&sum.t_entry(i, j)));
            assert!(tensor.s_entry(i, j).eq_value(&sum.s_entry(i, j)));
        }
    }
    // tensoring with the trivial representation changes nothing
    let triv = weil_rep(&Fqm::trivial(), &budget()).unwrap();
    let same = ra.tensor(&triv, &budget()).unwrap();
    for i in 0..ra.dim {
        for j in 0..ra.dim {
            assert!(same.t_entry(i, j).eq_value(&ra.t_entry(i, j)));
            assert!(same.s_entry(i, j).eq_value(&ra.s_entry(i, j)));
        }
    }
}

#[test]
fn char_twist_of_trivial() {
    let rep = weil_rep(&Fqm::trivial(), &budget()).unwrap();
    let tw = rep.char_twist(8).unwrap();
    assert!(tw.t_entry(0, 0).eq_value(&e_of(&r(1, 3))));
    assert!(tw.s_entry(0, 0).is_one());
    // eps^24 = 1
    let full = rep.char_twist(24).unwrap();
    assert!(full.t_entry(0, 0).is_one());
    assert!(full.s_entry(0, 0).is_one());
}

#[test]
fn antisymmetric_piece_of_l3_affords_eps8() {
    let m = Fqm::standard_l(3, 1).unwrap();
    let rep = weil_rep(&m, &budget()).unwrap();
    // span(delta_1 - delta_2) is T- and S-invariant
    let mut v = vec![Cyc::from_integer(0); 3];
    v[1] = Cyc::from_integer(1);
    v[2] = Cyc::from_integer(-1);
    let sub = rep.restrict(&[v]).unwrap();
    assert_eq!(sub.dim, 1);
    assert!(sub.t_entry(0, 0).eq_value(&e_of(&r(1, 3))));
    // and equals the twist of the trivial representation by eps^8
    let eps8 = weil_rep(&Fqm::trivial(), &budget()).unwrap().char_twist(8).unwrap();
    assert!(sub.t_entry(0, 0).eq_value(&eps8.t_entry(0, 0)));
    assert!(sub.s_entry(0, 0).eq_value(&eps8.s_entry(0, 0)));
}

#[test]
fn orthogonal_action_intertwines() {
    for m in 1..=6i64 {
        let dm = Fqm::standard_d(m, 1).unwrap();
        let rep = weil_rep(&dm, &budget()).unwrap();
        let neg = FqmAutomorphism::negation(&dm);
        let perm = orth_action(&dm, &neg).unwrap();
        assert!(check_intertwines(&rep, &perm), "negation fails on D_{m}");
        let id = FqmAutomorphism::identity(&dm);
        let perm = orth_action(&dm, &id).unwrap();
        assert!(check_intertwines(&rep, &perm));
    }
    // a permutation that is not an isometry does not intertwine
    let d5 = Fqm::standard_d(5, 1).unwrap();
    let rep = weil_rep(&d5, &budget()).unwrap();
    let mut perm: Vec<usize> = (0..10).collect();
    perm.swap(0, 1);
    assert!(!check_intertwines(&rep, &perm));
}

#[test]
fn invariants_examples() {
    // Hyp(n): I_U for U = (Z/n) x 0 lies in the invariant space
    for n in [2i64, 3, 4] {
        let h = Fqm::standard_hyp(n).unwrap();
        let rep = weil_rep(&h, &budget()).unwrap();
        let inv = invariants(&rep).unwrap();
        assert!(!inv.vectors.is_empty());
        let u = h.subgroup_from_generators(&[h.element(&[1, 0])]);
        let mut iu = vec![Cyc::from_integer(0); h.element_count()];
        for &i in &u.element_indices {
            iu[i] = Cyc::from_integer(1);
        }
        assert!(
            express_in_span(&inv.vectors, &iu).unwrap().is_some(),
            "I_U not in Inv(Hyp({n}))"
        );
    }
    // D_3 + neg(D_1) has no invariants (order 12 is not a square)
    let m = Fqm::standard_d(3, 1).unwrap().orth_sum(&Fqm::standard_d(1, 1).unwrap().neg());
    let rep = weil_rep(&m, &budget()).unwrap();
    assert!(invariants(&rep).unwrap().vectors.is_empty());
    // L_3(1) + L_3(-1): two invariants (divisors of 3)
    let m = Fqm::standard_l(3, 1).unwrap().orth_sum(&Fqm::standard_l(3, -1).unwrap());
    let rep = weil_rep(&m, &budget()).unwrap();
    assert_eq!(invariants(&rep).unwrap().vectors.len(), 2);
}

#[test]
fn selfdual_span_equals_solver() {
    // modules satisfying the simple-invariants hypotheses
    let mods = [
        Fqm::standard_hyp(3).unwrap(),
        Fqm::standard_l(3, 1).unwrap().orth_sum(&Fqm::standard_l(3, -1).unwrap()),
        Fqm::standard_hyp(2).unwrap(),
    ];
    for m in &mods {
        let span = invariants_from_selfdual(m, DEFAULT_ENUM_BUDGET).unwrap();
        let solver = invariants(&weil_rep(m, &budget()).unwrap()).unwrap();
        assert_eq!(span.vectors.len(), solver.vectors.len());
        for v in &span.vectors {
            assert!(express_in_span(&solver.vectors, v).unwrap().is_some());
        }
    }
    // D_1 has no isotropic self-dual subgroup
    let d1 = Fqm::standard_d(1, 1).unwrap();
    assert!(invariants_from_selfdual(&d1, DEFAULT_ENUM_BUDGET).unwrap().vectors.is_empty());
}

#[test]
fn embed_subquotient_examples() {
    // U = {0}: the identity embedding
    let l9 = Fqm::standard_l(9, 1).unwrap();
    let zero = l9.subgroup_from_generators(&[]);
    let (sq, map) = embed_subquotient(&l9, &zero, &budget()).unwrap();
    assert_eq!(sq.module, l9);
    assert!(map.is_identity());

    // U = 3 L_9: the image of the trivial module is I_U, which is fixed
    let u = l9.subgroup_from_generators(&[l9.element(&[3])]);
    let (sq, map) = embed_subquotient(&l9, &u, &budget()).unwrap();
    assert_eq!(sq.module.order(), 1);
    let img = map.apply(&unit_vec(1, 0));
    let rep = weil_rep(&l9, &budget()).unwrap();
    let timg = rep.apply_t(&img);
    let simg = rep.apply_s(&img);
    assert!(timg.iter().zip(&img).all(|(a, b)| a.eq_value(b)));
    assert!(simg.iter().zip(&img).all(|(a, b)| a.eq_value(b)));

    // Hyp(4) with U = <(2,0)>: invariants of the Hyp(2) quotient embed to
    // fixed vectors
    let h4 = Fqm::standard_hyp(4).unwrap();
    let u = h4.subgroup_from_generators(&[h4.element(&[2, 0])]);
    let (sq, map) = embed_subquotient(&h4, &u, &budget()).unwrap();
    let small_inv = invariants(&weil_rep(&sq.module, &budget()).unwrap()).unwrap();
    assert!(!small_inv.vectors.is_empty());
    let rep = weil_rep(&h4, &budget()).unwrap();
    for v in &small_inv.vectors {
        let img = map.apply(v);
        let t = rep.apply_t(&img);
        let s = rep.apply_s(&img);
        assert!(t.iter().zip(&img).all(|(a, b)| a.eq_value(b)));
        assert!(s.iter().zip(&img).all(|(a, b)| a.eq_value(b)));
    }

    // image vectors are all fixed iff U is self-dual; U here is not, so some
    // basis image must move under T or S
    let mut all_fixed = true;
    for i in 0..sq.module.element_count() {
        let img = map.apply(&unit_vec(sq.module.element_count(), i));
        let t = rep.apply_t(&img);
        let s = rep.apply_s(&img);
        if !(t.iter().zip(&img).all(|(a, b)| a.eq_value(b))
            && s.iter().zip(&img).all(|(a, b)| a.eq_value(b)))
        {
            all_fixed = false;
        }
    }
    assert!(!all_fixed);
}

#[test]
fn module_invariants_match_direct_twisted_solver() {
    let cases: Vec<(Fqm, i64)> = vec![
        (Fqm::standard_l(3, 1).unwrap().orth_sum(&Fqm::standard_l(3, -1).unwrap()), 0),
        (Fqm::standard_hyp(2).unwrap(), 0),
        (
            Fqm::standard_d(1, 1).unwrap().neg().orth_sum(&Fqm::standard_d(3, 1).unwrap().neg()),
            8,
        ),
        (Fqm::standard_hyp(3).unwrap(), 8),
        (Fqm::standard_hyp(6).unwrap(), 16),
        (Fqm::standard_hyp(6).unwrap(), 4),
        (Fqm::standard_d(2, 1).unwrap().orth_sum(&Fqm::standard_d(2, 1).unwrap().neg()), 12),
    ];
    for (m, a) in cases {
        let direct = {
            let rep = weil_rep(&m, &budget()).unwrap();
            let rep = if a != 0 { rep.char_twist(a).unwrap() } else { rep };
            invariants(&rep).unwrap()
        };
        let split = invariants_of_module(&m, a, &budget()).unwrap();
        assert_eq!(
            direct.vectors.len(),
            split.vectors.len(),
            "dim mismatch for twist {a} on {m:?}"
        );
        for v in &split.vectors {
            assert!(
                express_in_span(&direct.vectors, v).unwrap().is_some(),
                "split invariant outside direct space"
            );
        }
    }
}

#[test]
fn eigenspace_z_examples() {
    // D_1: Z = -i, so X(e(-1/4)) is everything and X(e(1/4)) is zero
    let rep = weil_rep(&Fqm::standard_d(1, 1).unwrap(), &budget()).unwrap();
    assert_eq!(eigenspace_z(&rep, &r(-1, 4)).unwrap().len(), 2);
    assert_eq!(eigenspace_z(&rep, &r(1, 4)).unwrap().len(), 0);
    // trivial: Z = 1
    let rep = weil_rep(&Fqm::trivial(), &budget()).unwrap();
    assert_eq!(eigenspace_z(&rep, &r(0, 1)).unwrap().len(), 1);
    // L_3(1): Z delta_x = -delta_{-x}; X(-1) = span(d0, d1+d2), X(1) = span(d1-d2)
    let rep = weil_rep(&Fqm::standard_l(3, 1).unwrap(), &budget()).unwrap();
    let xm = eigenspace_z(&rep, &r(1, 2)).unwrap();
    let xp = eigenspace_z(&rep, &r(0, 1)).unwrap();
    assert_eq!(xm.len(), 2);
    assert_eq!(xp.len(), 1);
    assert!(xp[0][0].is_zero());
    assert!(xp[0][1].neg().eq_value(&xp[0][2]));
}

#[test]
fn ind_gamma0_dimensions() {
    assert_eq!(ind_gamma0(1).unwrap().dim, 1);
    assert_eq!(ind_gamma0(2).unwrap().dim, 3);
    assert_eq!(ind_gamma0(5).unwrap().dim, 6);
    assert_eq!(ind_gamma0(6).unwrap().dim, 12);
    assert_eq!(ind_gamma0(7).unwrap().dim, 8);
    // the index formula l prod_{p|l} (1 + 1/p)
    for l in 1..=12i64 {
        let mut expect = l;
        for p in crate::cyclotomic::prime_factors(l as u64) {
            expect = expect / p as i64 * (p as i64 + 1);
        }
        assert_eq!(ind_gamma0(l).unwrap().dim as i64, expect, "index at l={l}");
    }
}

#[test]
fn rank1_decomposition_dims() {
    // m = 1: a single piece of dimension 2
    let pieces = decompose_rank1(1, 1).unwrap();
    assert_eq!(pieces.len(), 1);
    assert_eq!(pieces[0].basis.len(), 2);
    // m = p: dims p+1 and p-1
    for p in [3i64, 5] {
        let pieces = decompose_rank1(p, 1).unwrap();
        let mut dims: Vec<(i64, i64, usize)> =
            pieces.iter().map(|pc| (pc.f, pc.d, pc.basis.len())).collect();
        dims.sort();
        assert_eq!(dims, vec![(1, 1, (p + 1) as usize), (p, 1, (p - 1) as usize)]);
    }
    // dimensions always add up to 2m
    for m in 1..=12i64 {
        let pieces = decompose_rank1(m, 1).unwrap();
        let total: usize = pieces.iter().map(|p| p.basis.len()).sum();
        assert_eq!(total, (2 * m) as usize, "dimension sum at m={m}");
    }
}

#[test]
fn tensor_factorization_of_invariants() {
    // dim Inv(W(M)) = prod_p dim Inv(W(M(p))) on mixed-order modules
    let mods = [
        Fqm::standard_hyp(6).unwrap(),
        Fqm::standard_hyp(2).unwrap().orth_sum(
            &Fqm::standard_l(3, 1).unwrap().orth_sum(&Fqm::standard_l(3, -1).unwrap()),
        ),
        Fqm::standard_d(3, 1).unwrap().orth_sum(&Fqm::standard_d(3, 1).unwrap().neg()),
    ];
    for m in &mods {
        let whole = invariants(&weil_rep(m, &budget()).unwrap()).unwrap().vectors.len();
        let mut prod = 1usize;
        for p in m.primes() {
            let part = m.p_part(p);
            prod *= invariants(&weil_rep(&part, &budget()).unwrap()).unwrap().vectors.len();
        }
        assert_eq!(whole, prod, "tensor factorization on {m:?}");
    }
}

#[test]
fn s4_scalar_equals_sigma_fourth() {
    for spec in ["D:1", "D:3", "L:5:2", "H:2", "XY3:1"] {
        let m = crate::fqm::parse::fqm_from_spec(spec, 10_000).unwrap();
        let rep = weil_rep(&m, &budget()).unwrap();
        // S^4 = sigma^4 I: apply S four times to delta_0
        let mut v = unit_vec(rep.dim, 0);
        for _ in 0..4 {
            v = rep.apply_s(&v);
        }
        let sigma = m.sigma(None).unwrap();
        let expect = e_of(&(&(&sigma + &sigma) + &(&sigma + &sigma)));
        assert!(v[0].eq_value(&expect), "S^4 != sigma^4 on {spec}");
        for i in 1..rep.dim {
            assert!(v[i].is_zero());
        }
    }
}

#[test]
fn dual_via_neg_is_weil_of_negated_module() {
    let m = Fqm::standard_l(3, 1).unwrap();
    let rep = weil_rep(&m, &budget()).unwrap();
    let dual = rep.dual_via_neg(&budget()).unwrap();
    let expect = weil_rep(&m.neg(), &budget()).unwrap();
    for i in 0..rep.dim {
        for j in 0..rep.dim {
            assert!(dual.t_entry(i, j).eq_value(&expect.t_entry(i, j)));
            assert!(dual.s_entry(i, j).eq_value(&expect.s_entry(i, j)));
        }
    }
    // entries of the dual are the conjugates of the original
    for i in 0..rep.dim {
        for j in 0..rep.dim {
            assert!(dual.s_entry(i, j).eq_value(&rep.s_entry(i, j).conj()));
        }
    }
    // twisted representations dualize with the opposite twist
    let tw = rep.char_twist(8).unwrap();
    let dtw = tw.dual_via_neg(&budget()).unwrap();
    assert_eq!(dtw.meta.twist, 16);
}

#[test]
fn corrupted_relations_are_detected() {
    let m = Fqm::standard_d(1, 1).unwrap();
    let rep = weil_rep(&m, &budget()).unwrap();
    // corrupt one S entry and re-run the checks on a dense copy
    let mut s = rep.mat_s();
    s.set(0, 0, s.get(0, 0).add(&Cyc::from_integer(1)));
    let bad = GenRep {
        dim: rep.dim,
        conductor: rep.conductor,
        kind: RepKind::Dense { t: rep.mat_t(), s },
        labels: rep.labels.clone(),
        meta: RepMeta { source: None, twist: 0, description: "corrupted".into() },
    };
    let err = bad.verify_relations();
    assert!(matches!(err, Err(crate::error::Error::Internal(_))));
}

#[test]
fn module_solver_handles_twisted_trivial_parts() {
    // a module with no 3-part tensored with a 3-primary character has no
    // invariants at all
    let m = Fqm::standard_l(5, 1).unwrap().orth_sum(&Fqm::standard_l(5, -1).unwrap());
    assert_eq!(invariants_of_module(&m, 0, &budget()).unwrap().vectors.len(), 2);
    assert_eq!(invariants_of_module(&m, 8, &budget()).unwrap().vectors.len(), 0);
    assert_eq!(invariants_of_module(&m, 16, &budget()).unwrap().vectors.len(), 0);
}
