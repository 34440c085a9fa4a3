use super::*;
use crate::rational::Rational;

fn r(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

/// The 8x8 Gram matrix `2G` of the E8 lattice from which the rank-7
/// counterexample index is cut (delete the last row and column).
pub fn e8_two_g() -> Vec<Vec<i64>> {
    vec![
        vec![4, -2, 0, 0, 0, 0, 0, 1],
        vec![-2, 2, -1, 0, 0, 0, 0, 0],
        vec![0, -1, 2, -1, 0, 0, 0, 0],
        vec![0, 0, -1, 2, -1, 0, 0, 0],
        vec![0, 0, 0, -1, 2, -1, 0, 0],
        vec![0, 0, 0, 0, -1, 2, -1, 0],
        vec![0, 0, 0, 0, 0, -1, 2, 0],
        vec![1, 0, 0, 0, 0, 0, 0, 2],
    ]
}

pub fn e8_two_f() -> Vec<Vec<i64>> {
    e8_two_g()[..7].iter().map(|row| row[..7].to_vec()).collect()
}

#[test]
fn from_gram_validation() {
    // D_1 presented directly
    let d1 = Fqm::from_gram(vec![2], vec![r(1, 4)], vec![vec![r(1, 2)]]).unwrap();
    assert_eq!(d1, Fqm::standard_d(1, 1).unwrap());
    // L_3(1)
    let l3 = Fqm::from_gram(vec![3], vec![r(1, 3)], vec![vec![r(2, 3)]]).unwrap();
    assert_eq!(l3, Fqm::standard_l(3, 1).unwrap());
    // ill-defined: u^2 Q not integral
    assert!(Fqm::from_gram(vec![2], vec![r(1, 3)], vec![vec![r(2, 3)]]).is_err());
    // B(g,g) != 2Q(g)
    assert!(Fqm::from_gram(vec![2], vec![r(1, 4)], vec![vec![r(1, 4)]]).is_err());
}

#[test]
fn standard_modules() {
    let l3 = Fqm::standard_l(3, 1).unwrap();
    assert_eq!(l3.order(), 3);
    assert_eq!(l3.q_value(&l3.element(&[1])), r(1, 3));

    let d1 = Fqm::standard_d(1, 1).unwrap();
    assert_eq!(d1.order(), 2);
    assert_eq!(d1.q_value(&d1.element(&[1])), r(1, 4));

    let h4 = Fqm::standard_hyp(4).unwrap();
    assert_eq!(h4.order(), 16);
    assert_eq!(h4.q_value(&h4.element(&[1, 1])), r(1, 4));
    assert_eq!(h4.q_value(&h4.element(&[2, 0])), r(0, 1));

    assert!(Fqm::standard_d(3, 3).is_err());
    assert!(Fqm::standard_l(4, 1).is_err());
    assert!(Fqm::standard_l(15, 1).is_err());
}

#[test]
fn eval_form_examples() {
    let d1 = Fqm::standard_d(1, 1).unwrap();
    assert_eq!(d1.q_value(&d1.element(&[1])), r(1, 4));
    let l3 = Fqm::standard_l(3, 1).unwrap();
    // B(1,2) = 2*1*2/3 = 1/3 mod 1
    assert_eq!(l3.b_value(&l3.element(&[1]), &l3.element(&[2])), r(1, 3));
    let h4 = Fqm::standard_hyp(4).unwrap();
    assert!(h4.q_value(&h4.zero_element()).is_zero());
}

#[test]
fn polarization_identity_holds() {
    let modules = [
        Fqm::standard_d(6, 5).unwrap(),
        Fqm::standard_l(9, 2).unwrap(),
        Fqm::standard_xy3(2).unwrap(),
        Fqm::standard_hyp(3).unwrap().orth_sum(&Fqm::standard_d(2, 1).unwrap()),
    ];
    for m in &modules {
        for x in m.elements() {
            for y in m.elements() {
                let lhs = m.b_value(&x, &y);
                let rhs = (&(&m.q_value(&m.add(&x, &y)) - &m.q_value(&x)) - &m.q_value(&y)).mod1();
                assert_eq!(lhs, rhs, "B != polarization on {m:?}");
            }
            for a in 0..7i64 {
                let lhs = m.q_value(&m.scale_element(a, &x));
                let rhs = (&Rational::from_integer(a * a) * &m.q_value(&x)).mod1();
                assert_eq!(lhs, rhs, "Q(ax) != a^2 Q(x)");
            }
        }
    }
}

#[test]
fn from_matrix_examples() {
    // F = (1): 2F = (2), module of order 2 with Q(g) = 1/4
    let f1 = HalfIntegralMatrix::scalar(1);
    let d = discriminant_module(&f1).unwrap();
    assert_eq!(d.module.order(), 2);
    assert_eq!(d.module.q_value(&d.module.element(&[1])), r(1, 4));

    // the 7x7 footnote matrix: cyclic of order 4
    let f = HalfIntegralMatrix::from_two_f(e8_two_f()).unwrap();
    let d = discriminant_module(&f).unwrap();
    assert_eq!(d.elementary_divisors, vec![BigInt::from(4)]);
    assert_eq!(d.module.order(), 4);

    // E8 itself is unimodular
    let g = HalfIntegralMatrix::from_two_f(e8_two_g()).unwrap();
    assert_eq!(g.det_two_f(), BigInt::one());
    assert!(g.is_positive_definite());
    let dg = discriminant_module(&g).unwrap();
    assert_eq!(dg.module.order(), 1);

    // F = diag(1,1): divisors (2,2), Q(x,y) = (x^2+y^2)/4
    let f2 = HalfIntegralMatrix::from_two_f(vec![vec![2, 0], vec![0, 2]]).unwrap();
    let d2 = discriminant_module(&f2).unwrap();
    assert_eq!(d2.module.orders(), &[2, 2]);
    let q = d2.module.q_value(&d2.module.element(&[1, 1]));
    assert_eq!(q, r(1, 2));
}

#[test]
fn discriminant_project_lift_roundtrip() {
    let f = HalfIntegralMatrix::from_two_f(e8_two_f()).unwrap();
    let d = discriminant_module(&f).unwrap();
    for x in d.module.elements() {
        let lift = d.lift(&x);
        assert_eq!(d.project(&lift), x);
    }
    // Q agrees with F^{-1}[r]/4 on lifts
    let finv = f.f_inverse().unwrap();
    for x in d.module.elements() {
        let lift = d.lift(&x);
        let qv = (&linalg::quadratic_value(&finv, &lift, &lift) * &r(1, 4)).mod1();
        assert_eq!(qv, d.module.q_value(&x));
    }
}

#[test]
fn combine_examples() {
    let sum = Fqm::standard_l(3, 1).unwrap().orth_sum(&Fqm::standard_l(3, -1).unwrap());
    assert_eq!(sum.order(), 9);
    assert_eq!(sum.q_value(&sum.element(&[1, 1])), r(0, 1));
    assert_eq!(sum.q_value(&sum.element(&[1, 2])), (&r(1, 3) - &r(4, 3)).mod1());

    let nd1 = Fqm::standard_d(1, 1).unwrap().neg();
    assert_eq!(nd1.q_value(&nd1.element(&[1])), r(3, 4));

    let d6 = Fqm::standard_d(6, 1).unwrap();
    let p3 = d6.p_part(3);
    assert_eq!(p3.order(), 3);
    assert_eq!(p3.q_value(&p3.element(&[1])), r(2, 3));
}

#[test]
fn level_and_nondegeneracy() {
    for m in 1..=3i64 {
        assert_eq!(Fqm::standard_d(m, 1).unwrap().level(), 4 * m);
    }
    for (q, a) in [(3, 1), (9, 2), (25, 1), (27, 1)] {
        assert_eq!(Fqm::standard_l(q, a).unwrap().level(), q);
    }
    let h4 = Fqm::standard_hyp(4).unwrap();
    assert_eq!(h4.level(), 4);
    assert!(h4.is_nondegenerate());
    assert!(Fqm::standard_d(5, 1).unwrap().is_nondegenerate());
    // a degenerate presentation: Z/2 with Q = 0
    let deg = Fqm::from_gram(vec![2], vec![r(0, 1)], vec![vec![r(0, 1)]]).unwrap();
    assert!(!deg.is_nondegenerate());
    assert_eq!(
        Fqm::standard_d(2, 1).unwrap().orth_sum(&Fqm::standard_l(3, 1).unwrap()).level(),
        24
    );
}

#[test]
fn sigma_examples() {
    // sigma(D_1) = e_8(-1)
    assert_eq!(Fqm::standard_d(1, 1).unwrap().sigma(None).unwrap(), r(-1, 8));
    // sigma(Hyp(n)) = 1
    for n in 2..=6i64 {
        assert_eq!(Fqm::standard_hyp(n).unwrap().sigma(None).unwrap(), r(0, 1));
    }
    // sigma_3(L_3(1)) = -i
    assert_eq!(Fqm::standard_l(3, 1).unwrap().sigma(Some(3)).unwrap(), r(-1, 4));
    // sigma(XY3(alpha)) = (-1)^alpha
    assert_eq!(Fqm::standard_xy3(1).unwrap().sigma(None).unwrap(), r(1, 2));
    assert_eq!(Fqm::standard_xy3(2).unwrap().sigma(None).unwrap(), r(0, 1));
}

#[test]
fn sigma_multiplicative_and_dual() {
    let mods = [
        Fqm::standard_d(1, 1).unwrap(),
        Fqm::standard_d(3, 1).unwrap(),
        Fqm::standard_l(5, 2).unwrap(),
        Fqm::standard_hyp(2).unwrap(),
    ];
    for a in &mods {
        for b in &mods {
            let lhs = a.orth_sum(b).sigma(None).unwrap();
            let rhs = (a.sigma(None).unwrap() + b.sigma(None).unwrap()).mod1_centered();
            assert_eq!(lhs, rhs, "sigma not multiplicative");
        }
        let dual = (a.sigma(None).unwrap() + a.neg().sigma(None).unwrap()).mod1_centered();
        assert_eq!(dual, r(0, 1), "sigma(M) sigma(-M) != 1");
        assert_eq!(a.order(), a.neg().order());
    }
}

#[test]
fn milgram_for_small_definite_matrices() {
    let mats = [
        vec![vec![2]],
        vec![vec![4]],
        vec![vec![2, 1], vec![1, 2]],
        vec![vec![2, 0], vec![0, 6]],
        vec![vec![4, 1], vec![1, 4]],
        vec![vec![2, -1, 0], vec![-1, 2, -1], vec![0, -1, 2]],
        vec![vec![2, 0, 0, 0], vec![0, 2, 0, 0], vec![0, 0, 2, 0], vec![0, 0, 0, 2]],
    ];
    for m in mats {
        let f = HalfIntegralMatrix::from_two_f(m).unwrap();
        assert!(f.is_positive_definite());
        let n = f.size() as i64;
        let d = discriminant_module(&f).unwrap();
        let expected = Rational::new(-n, 8).mod1_centered();
        assert_eq!(d.module.sigma(None).unwrap(), expected, "Milgram failed");
    }
}

#[test]
fn sigma_scalar_formula_matches_gauss_sums_smoke() {
    // the full n <= 200 sweep is an acceptance criterion; spot-check here
    for n in [1i64, 3, 25, 12, 16, 18] {
        let d = Fqm::standard_d(n, 1).unwrap();
        let mut ps: Vec<u64> = prime_factors(2 * n as u64);
        ps.sort();
        for p in ps {
            assert_eq!(
                sigma_p_scalar_formula(n, p),
                d.sigma(Some(p)).unwrap(),
                "scalar formula mismatch at n={n}, p={p}"
            );
        }
    }
    // the spec's worked cases
    assert_eq!(sigma_p_scalar_formula(1, 2), r(-1, 8));
    assert_eq!(sigma_p_scalar_formula(25, 5), r(0, 1));
}

#[test]
fn isotropic_subgroup_examples() {
    // Hyp(n): U = (Z/n) x 0 is isotropic self-dual
    for n in [2i64, 3, 4] {
        let h = Fqm::standard_hyp(n).unwrap();
        let line = h.subgroup_from_generators(&[h.element(&[1, 0])]);
        let sd = h.isotropic_subgroups(SubgroupMode::SelfDual, DEFAULT_ENUM_BUDGET).unwrap();
        assert!(
            sd.iter().any(|u| u.element_indices == line.element_indices),
            "x-axis not found among self-dual subgroups of Hyp({n})"
        );
    }
    // L_3(1) + L_3(-1): exactly two self-dual isotropic subgroups
    let m = Fqm::standard_l(3, 1).unwrap().orth_sum(&Fqm::standard_l(3, -1).unwrap());
    let sd = m.isotropic_subgroups(SubgroupMode::SelfDual, DEFAULT_ENUM_BUDGET).unwrap();
    assert_eq!(sd.len(), 2);
    // D_1: only the trivial subgroup is isotropic, nothing self-dual
    let d1 = Fqm::standard_d(1, 1).unwrap();
    let all = d1.isotropic_subgroups(SubgroupMode::All, DEFAULT_ENUM_BUDGET).unwrap();
    assert_eq!(all.len(), 1);
    assert_eq!(all[0].element_indices.len(), 1);
    let sd = d1.isotropic_subgroups(SubgroupMode::SelfDual, DEFAULT_ENUM_BUDGET).unwrap();
    assert!(sd.is_empty());
}

#[test]
fn subquotient_examples() {
    // Hyp(4) with U = {(0,0),(2,0)}: U*/U = Hyp(2)
    let h4 = Fqm::standard_hyp(4).unwrap();
    let u = h4.subgroup_from_generators(&[h4.element(&[2, 0])]);
    assert!(h4.is_isotropic(&u));
    let sq = h4.subquotient(&u).unwrap();
    assert_eq!(sq.module.order(), 4);
    let h2 = Fqm::standard_hyp(2).unwrap();
    assert!(!quadratic_isomorphisms(&sq.module, &h2, 100, true).unwrap().is_empty());

    // while the diagonal {(0,0),(2,2)} quotients to D_1 + (-D_1)
    let udiag = h4.subgroup_from_generators(&[h4.element(&[2, 2])]);
    let sqd = h4.subquotient(&udiag).unwrap();
    let split = Fqm::standard_d(1, 1).unwrap().orth_sum(&Fqm::standard_d(1, 1).unwrap().neg());
    assert!(!quadratic_isomorphisms(&sqd.module, &split, 100, true).unwrap().is_empty());
    assert!(quadratic_isomorphisms(&sqd.module, &h2, 100, true).unwrap().is_empty());

    // U = {0} gives back M
    let l9 = Fqm::standard_l(9, 1).unwrap();
    let zero = l9.subgroup_from_generators(&[]);
    let sq = l9.subquotient(&zero).unwrap();
    assert_eq!(sq.module, l9);

    // L_9(1) with U = 3 L_9: trivial quotient
    let u = l9.subgroup_from_generators(&[l9.element(&[3])]);
    assert!(l9.is_isotropic(&u));
    let sq = l9.subquotient(&u).unwrap();
    assert_eq!(sq.module.order(), 1);

    // non-isotropic input is rejected
    let bad = l9.subgroup_from_generators(&[l9.element(&[1])]);
    assert!(l9.subquotient(&bad).is_err());
}

#[test]
fn subquotient_witt_invariants() {
    // |U*/U| = |M|/|U|^2 and sigma_p(U*/U) = sigma_p(M)
    let modules = [
        Fqm::standard_hyp(4).unwrap(),
        Fqm::standard_l(9, 1).unwrap(),
        Fqm::standard_l(3, 1).unwrap().orth_sum(&Fqm::standard_l(3, -1).unwrap()),
    ];
    for m in &modules {
        for u in m.isotropic_subgroups(SubgroupMode::All, DEFAULT_ENUM_BUDGET).unwrap() {
            let sq = m.subquotient(&u).unwrap();
            let usize_ = u.element_indices.len() as i64;
            assert_eq!(sq.module.order() * usize_ * usize_, m.order());
            for p in m.primes() {
                assert_eq!(
                    sq.module.sigma(Some(p)).unwrap(),
                    m.sigma(Some(p)).unwrap(),
                    "sigma_p not Witt invariant"
                );
            }
        }
    }
}

#[test]
fn orthogonal_group_examples() {
    let d6 = Fqm::standard_d(6, 1).unwrap();
    let units = d6.orthogonal_group(OrthStrategy::DmUnits, DEFAULT_ISO_BUDGET).unwrap();
    let mut avals: Vec<i64> = units.iter().map(|a| a.images[0].coords[0]).collect();
    avals.sort();
    assert_eq!(avals, vec![1, 5, 7, 11]);
    let brute = d6.orthogonal_group(OrthStrategy::BruteForce, DEFAULT_ISO_BUDGET).unwrap();
    assert_eq!(brute.len(), units.len());
    for a in &units {
        assert!(a.preserves_form(&d6));
    }

    let l3 = Fqm::standard_l(3, 1).unwrap();
    let o = l3.orthogonal_group(OrthStrategy::BruteForce, DEFAULT_ISO_BUDGET).unwrap();
    assert_eq!(o.len(), 2);

    let t = Fqm::trivial();
    let o = t.orthogonal_group(OrthStrategy::BruteForce, DEFAULT_ISO_BUDGET).unwrap();
    assert_eq!(o.len(), 1);
}

#[test]
fn witt_equivalence_examples() {
    let triv = Fqm::trivial();
    for n in [2i64, 3, 4, 5] {
        let h = Fqm::standard_hyp(n).unwrap();
        assert!(h.witt_equivalent(&triv, WittMethod::Invariants, 100).unwrap());
        assert!(h.witt_equivalent(&triv, WittMethod::Reduction, 100).unwrap());
    }
    let l3 = Fqm::standard_l(3, 1).unwrap();
    assert!(l3.witt_equivalent(&l3, WittMethod::Invariants, 100).unwrap());
    assert!(l3.witt_equivalent(&l3, WittMethod::Reduction, 100).unwrap());
    let d1 = Fqm::standard_d(1, 1).unwrap();
    assert!(!d1.witt_equivalent(&triv, WittMethod::Invariants, 100).unwrap());
    assert!(!d1.witt_equivalent(&triv, WittMethod::Reduction, 100).unwrap());
    // and a pair that differs only at an odd place
    let l5 = Fqm::standard_l(5, 1).unwrap();
    let l5b = Fqm::standard_l(5, 2).unwrap();
    assert!(!l5.witt_equivalent(&l5b, WittMethod::Invariants, 100).unwrap());
    assert!(!l5.witt_equivalent(&l5b, WittMethod::Reduction, 100).unwrap());
}

#[test]
fn prime_split_roundtrip() {
    let m = Fqm::standard_d(6, 1).unwrap().orth_sum(&Fqm::standard_l(5, 1).unwrap());
    let split = m.prime_split();
    assert_eq!(split.parts.len(), 3);
    let orders: Vec<i64> = split.parts.iter().map(|(_, m, _)| m.order()).collect();
    assert_eq!(orders.iter().product::<i64>(), m.order());
    for i in 0..m.element_count() {
        assert_eq!(split.parent_to_tensor[split.tensor_to_parent[i]], i);
    }
    // Q decomposes as the sum of Q on the p-components
    for t in 0..m.element_count() {
        let parent = m.element_by_index(split.tensor_to_parent[t]);
        let mut qsum = Rational::zero();
        let mut rest = t;
        let sizes: Vec<usize> = split.parts.iter().map(|(_, pm, _)| pm.element_count()).collect();
        for (k, (_, pm, _)) in split.parts.iter().enumerate() {
            let stride: usize = sizes[k + 1..].iter().product();
            let idx = (rest / stride) % pm.element_count();
            rest %= stride;
            qsum += &pm.q_value(&pm.element_by_index(idx));
        }
        assert_eq!(qsum.mod1(), m.q_value(&parent));
    }
}

#[test]
fn level_lcm_property() {
    let pairs = [
        (Fqm::standard_d(2, 1).unwrap(), Fqm::standard_l(9, 1).unwrap()),
        (Fqm::standard_hyp(4).unwrap(), Fqm::standard_l(3, 2).unwrap()),
    ];
    for (a, b) in pairs {
        assert_eq!(
            a.orth_sum(&b).level(),
            crate::rational::lcm_i64(a.level(), b.level())
        );
    }
}
