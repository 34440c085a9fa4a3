use super::*;
use crate::cyclotomic::e_of;

fn r(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

fn one() -> Cyc {
    Cyc::from_integer(1)
}

#[test]
fn eta_pentagonal_expansion() {
    let eta = eta_qexp(&r(13, 1));
    // q^{1/24} (1 - q - q^2 + q^5 + q^7 - q^12 - ...)
    assert!(eta.coefficient(&r(1, 24), &[]).is_one());
    for (k, c) in [(1, -1i64), (2, -1), (5, 1), (7, 1), (12, -1), (3, 0), (4, 0), (6, 0)] {
        let q = &r(1, 24) + &Rational::from_integer(k);
        assert!(
            eta.coefficient(&q, &[]).eq_value(&Cyc::from_integer(c)),
            "eta coefficient at q^{k}+1/24"
        );
    }
    assert_eq!(eta.meta.weight, r(1, 2));
    assert_eq!(eta.meta.char_exp, 1);
}

#[test]
fn eta_times_inverse_is_one() {
    let eta = eta_qexp(&r(10, 1));
    let inv = eta.invert_unit().unwrap();
    let prod = eta.mul(&inv);
    let one_series = JacobiQExp::constant(one(), prod.trunc.clone());
    assert!(prod.eq_to_common_trunc(&one_series));
    assert!(&prod.trunc >= &r(9, 1));
}

#[test]
fn eta_power_24_is_integral() {
    let d = eta_power(24, &r(4, 1));
    assert_eq!(d.meta.char_exp, 0);
    // Delta = q - 24 q^2 + 252 q^3 - 1472 q^4 + ...
    assert!(d.coefficient(&r(1, 1), &[]).is_one());
    assert!(d.coefficient(&r(2, 1), &[]).eq_value(&Cyc::from_integer(-24)));
    assert!(d.coefficient(&r(3, 1), &[]).eq_value(&Cyc::from_integer(252)));
}

#[test]
fn theta_odd_triple_product() {
    // product form must match sum_{r in Z + 1/2} (-1)^{r - 1/2} q^{r^2/2} zeta^r
    let trunc = r(20, 1);
    let th = theta_odd(1, &trunc);
    assert_eq!(th.zeta_den, 2);
    let mut sum_form = JacobiQExp {
        n_vars: 1,
        q_den: 8,
        zeta_den: 2,
        trunc: trunc.clone(),
        coeffs: std::collections::BTreeMap::new(),
        meta: th.meta.clone(),
    };
    // r = m + 1/2: q-exponent (2m+1)^2/8, zeta exponent doubled = 2m+1
    for m in -10i64..=10 {
        let t = 2 * m + 1;
        let sign = if m.rem_euclid(2) == 0 { 1 } else { -1 };
        sum_form.insert_term(t * t, vec![t], Cyc::from_integer(sign));
    }
    assert!(th.eq_to_common_trunc(&sum_form), "Jacobi triple product failed");
    // oddness: zeta -> zeta^{-1} negates
    assert!(th.flip_zeta().eq_to_common_trunc(&th.neg()));
    // a = 2: integral zeta exponents
    let th2 = theta_odd(2, &r(6, 1));
    assert_eq!(th2.zeta_den, 1);
    assert_eq!(th2.meta.index, IndexMeta::Scalar(r(2, 1)));
}

#[test]
fn theta_block_metadata() {
    let b = theta_block(-1, &[2, 1, 3], &r(4, 1));
    assert_eq!(b.meta.weight, r(1, 1));
    assert_eq!(b.meta.index, IndexMeta::Scalar(r(7, 1)));
    assert_eq!(b.meta.char_exp, 8);
    let half = theta_block(-1, &[1, 1, 1], &r(3, 1));
    assert_eq!(half.meta.index, IndexMeta::Scalar(r(3, 2)));
    // block(24, []) has integer exponents and trivial character
    let delta = theta_block(24, &[], &r(3, 1));
    assert_eq!(delta.meta.char_exp, 0);
    assert!(delta.coefficient(&r(1, 1), &[]).is_one());
}

#[test]
fn meta_multiplicativity() {
    let a = theta_odd(1, &r(4, 1));
    let b = theta_odd(2, &r(4, 1));
    let p = a.mul(&b);
    assert_eq!(p.meta.weight, r(1, 1));
    assert_eq!(p.meta.index, IndexMeta::Scalar(r(5, 2)));
    assert_eq!(p.meta.char_exp, 6);
}

#[test]
fn theta_lattice_scalar_cosets() {
    let f = HalfIntegralMatrix::scalar(1);
    // x = 0: sum over even r of q^{r^2/4} zeta^r = 1 + q(zeta^2 + zeta^-2) + ...
    let t0 = theta_lattice(&f, &[0], &r(5, 1), false).unwrap();
    assert!(t0.coefficient(&r(0, 1), &[0]).is_one());
    assert!(t0.coefficient(&r(1, 1), &[2]).is_one());
    assert!(t0.coefficient(&r(1, 1), &[-2]).is_one());
    assert!(t0.coefficient(&r(4, 1), &[4]).is_one());
    // x = 1: q^{1/4}(zeta + zeta^{-1}) + q^{9/4}(...)
    let t1 = theta_lattice(&f, &[1], &r(5, 1), false).unwrap();
    assert!(t1.coefficient(&r(1, 4), &[1]).is_one());
    assert!(t1.coefficient(&r(1, 4), &[-1]).is_one());
    assert!(t1.coefficient(&r(9, 4), &[3]).is_one());
    // at z = 0 the +-r fold together: coefficient of q^{1/4} is 2
    let z0 = theta_lattice(&f, &[1], &r(5, 1), true).unwrap();
    assert!(z0.coefficient(&r(1, 4), &[]).eq_value(&Cyc::from_integer(2)));
}

#[test]
fn theta_rho_degenerate_and_factorization() {
    // rho = (1 + sqrt(-3))/2 has q = |p|: the series vanishes identically
    let z = theta_rho(1, (1, 1), &r(12, 1)).unwrap();
    assert!(z.is_zero_series());
    // norm mismatch is rejected
    assert!(theta_rho(2, (1, 1), &r(4, 1)).is_err());

    // N = 7, rho = (1 + 3 sqrt(-3))/2: equals -theta(2z) theta(z) theta(3z) / eta
    let trunc = r(10, 1);
    let t = theta_rho(7, (1, 3), &trunc).unwrap();
    let block = theta_block(-1, &[2, 1, 3], &trunc);
    assert!(!t.is_zero_series());
    assert!(
        t.eq_to_common_trunc(&block.neg()),
        "theta_rho(7) != -theta(2z)theta(z)theta(3z)/eta"
    );

    // multiplying rho by a sixth root of unity leaves the series unchanged:
    // (1+3sqrt(-3))/2 * omega = (-5 - sqrt(-3))/2
    let t2 = theta_rho(7, (-5, -1), &trunc).unwrap();
    assert!(t.eq_to_common_trunc(&t2));
}

#[test]
fn pullback_examples() {
    let f = HalfIntegralMatrix::scalar(1);
    let th = theta_lattice(&f, &[1], &r(5, 1), false).unwrap();
    // zero map = specialization at z = 0
    let z = pullback_index(&th, &[vec![0]]).unwrap();
    let direct = theta_lattice(&f, &[1], &r(5, 1), true).unwrap();
    // compare keys: z has n_vars 1 -> 1, with r = [0]
    for ((q, _), c) in &direct.coeffs {
        let qr = Rational::new(*q, direct.q_den);
        assert!(z.coefficient(&qr, &[0]).eq_value(c));
    }
    // pullback is linear
    let th0 = theta_lattice(&f, &[0], &r(5, 1), false).unwrap();
    let s = th.add(&th0);
    let ps = pullback_index(&s, &[vec![0]]).unwrap();
    let p1 = pullback_index(&th, &[vec![0]]).unwrap();
    let p2 = pullback_index(&th0, &[vec![0]]).unwrap();
    assert!(ps.eq_to_common_trunc(&p1.add(&p2)));
}

#[test]
fn decompose_basis_case_and_roundtrip() {
    let f = HalfIntegralMatrix::scalar(1);
    let th = theta_lattice(&f, &[1], &r(5, 1), false).unwrap();
    let parts = theta_decompose(&th, &f).unwrap();
    // h_x = delta_{x, coset(1)}: one component is the constant 1
    let disc = discriminant_module(&f).unwrap();
    let target = disc.module.index_of(&disc.project(&[num_bigint::BigInt::from(1)]));
    for (xi, h) in &parts {
        if *xi == target {
            assert!(h.coefficient(&r(0, 1), &[]).is_one());
            assert_eq!(h.coeffs.len(), 1);
        } else {
            assert!(h.is_zero_series());
        }
    }
    // round trip on a genuine Jacobi form of index 7
    let f7 = HalfIntegralMatrix::scalar(7);
    let trunc = r(6, 1);
    let block = theta_block(-1, &[2, 1, 3], &trunc);
    let parts = theta_decompose(&block, &f7).unwrap();
    let rec = theta_reconstruct(&parts, &f7, &trunc).unwrap();
    assert!(rec.eq_to_common_trunc(&block), "theta decomposition roundtrip failed");
}

#[test]
fn decompose_rejects_cusp_violation() {
    let f = HalfIntegralMatrix::scalar(1);
    let mut bad = JacobiQExp::zero(
        1,
        r(4, 1),
        SeriesMeta {
            weight: r(1, 1),
            index: IndexMeta::Matrix(f.clone()),
            char_exp: 0,
        },
    );
    // 4l - F^{-1}[r] = 0 - 4 < 0
    bad.insert_term(0, vec![2], one());
    assert!(theta_decompose(&bad, &f).is_err());
}

#[test]
fn phi_from_invariant_parity() {
    // lambda odd in x gives the zero series (theta_{l,x} = theta_{l,-x})
    let f = HalfIntegralMatrix::scalar(1);
    let l = 2i64;
    let df = 2usize;
    let mut v = vec![Cyc::from_integer(0); (2 * l) as usize * df];
    v[df] = one(); // lambda(1, 0) = 1
    v[3 * df] = one().neg(); // lambda(3, 0) = -1
    let phi = phi_from_invariant(&v, l, &f, &r(4, 1)).unwrap();
    assert!(phi.is_zero_series());
    // zero vector gives the zero series
    let z = vec![Cyc::from_integer(0); (2 * l) as usize * df];
    assert!(phi_from_invariant(&z, l, &f, &r(4, 1)).unwrap().is_zero_series());
}

#[test]
fn theta_rho_is_odd_in_z() {
    // the conjugate ideal gives theta at -z, and these forms are odd, so the
    // two series are negatives of each other
    let trunc = r(8, 1);
    let a = theta_rho(7, (1, 3), &trunc).unwrap();
    let b = theta_rho(7, (1, -3), &trunc).unwrap();
    assert!(b.eq_to_common_trunc(&a.flip_zeta()));
    assert!(b.eq_to_common_trunc(&a.neg()));
    assert_eq!(series_rank(&[a, b]).unwrap(), 1);
}

#[test]
fn series_linear_algebra() {
    let trunc = r(8, 1);
    let a = theta_odd(1, &trunc);
    let b = theta_odd(2, &trunc);
    assert_eq!(series_rank(&[a.clone(), b.clone()]).unwrap(), 2);
    assert_eq!(series_rank(&[a.clone(), a.clone()]).unwrap(), 1);
    let zero = JacobiQExp::zero(
        1,
        trunc.clone(),
        SeriesMeta::scalar(r(1, 1), r(7, 1), 8),
    );
    assert_eq!(series_rank(&[zero.clone()]).unwrap(), 0);
    // kernel of (a, a) is spanned by (1, -1)
    let k = series_kernel(&[a.clone(), a.clone()]).unwrap();
    assert_eq!(k.len(), 1);
    assert!(k[0][0].add(&k[0][1]).is_zero());
    // express a + 2b in span
    let target = a.add(&b.scale(&Cyc::from_integer(2)));
    let c = series_express(&[a.clone(), b.clone()], &target).unwrap().unwrap();
    assert!(c[0].is_one());
    assert!(c[1].eq_value(&Cyc::from_integer(2)));
    assert!(series_express(&[a.clone()], &b).unwrap().is_none());
}

#[test]
fn cusp_condition_on_constructed_forms() {
    // every coefficient of a genuine weight-one index-7 form satisfies
    // 4l - r^2/7 >= 0
    let block = theta_block(-1, &[2, 1, 3], &r(5, 1));
    let f7 = HalfIntegralMatrix::scalar(7);
    let finv = f7.f_inverse().unwrap();
    for ((qn, rr), _) in &block.coeffs {
        let l = Rational::new(*qn, block.q_den);
        let rb = vec![num_bigint::BigInt::from(rr[0])];
        let bound = &(&l * &Rational::from_integer(4)) - &quadratic_value(&finv, &rb, &rb);
        assert!(!bound.is_negative(), "cusp condition violated at {l}, {rr:?}");
    }
}

#[test]
fn eisenstein_like_unit_invariance_more_norms() {
    // every unit multiple of rho gives the same series; exercised on N = 13
    let trunc = r(8, 1);
    // (p,q) = (-2,4)? wait: norms: (u,v) with u^2+3v^2 = 52: (7,1),(5,3),(2,4),(1,...)
    let t1 = theta_rho(13, (7, 1), &trunc).unwrap();
    // (7 + sqrt(-3))/2 * omega = (-5 + 3 sqrt(-3))/2... |.|^2 = (25+27)/4 = 13
    let t2 = theta_rho(13, (-5, 3), &trunc).unwrap();
    assert!(t1.eq_to_common_trunc(&t2));
    assert!(!t1.is_zero_series());
}
