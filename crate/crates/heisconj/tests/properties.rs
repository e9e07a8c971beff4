//! Property tests: algebraic laws on randomized inputs, and the
//! cross-route check that the general coset machinery and the closed-form
//! integer-model decision agree on the same elements.

use proptest::prelude::*;

use heisconj::abelian::CyclicProduct;
use heisconj::congruence::ext_gcd;
use heisconj::conj::ConjContext;
use heisconj::heis::ExtGroup;
use heisconj::zheis::{is_conjugate_z, ZExtElement};

fn moduli_strategy() -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(prop_oneof![Just(0i64), 1..=12i64], 1..=3)
}

proptest! {
    #[test]
    fn reduce_is_idempotent_and_addition_is_abelian(
        moduli in moduli_strategy(),
        raw_a in prop::collection::vec(-100..=100i64, 3),
        raw_b in prop::collection::vec(-100..=100i64, 3),
        raw_c in prop::collection::vec(-100..=100i64, 3),
    ) {
        let g = CyclicProduct::new(moduli).unwrap();
        let s = g.rank();
        let a = g.reduce(&raw_a[..s]).unwrap();
        let b = g.reduce(&raw_b[..s]).unwrap();
        let c = g.reduce(&raw_c[..s]).unwrap();
        prop_assert_eq!(g.reduce(a.coords()).unwrap(), a.clone());
        prop_assert_eq!(a.add(&b).unwrap(), b.add(&a).unwrap());
        prop_assert_eq!(
            a.add(&b).unwrap().add(&c).unwrap(),
            a.add(&b.add(&c).unwrap()).unwrap()
        );
        prop_assert_eq!(a.add(&g.zero()).unwrap(), a.clone());
        prop_assert!(a.sub(&a).unwrap().is_zero());
    }

    #[test]
    fn ext_gcd_bezout_identity(a in -10_000..=10_000i64, b in -10_000..=10_000i64) {
        let (g, u, v) = ext_gcd(a, b).unwrap();
        prop_assert!(g >= 0);
        prop_assert_eq!(a * u + b * v, g);
        if g != 0 {
            prop_assert_eq!(a % g, 0);
            prop_assert_eq!(b % g, 0);
        }
    }

    #[test]
    fn integer_model_group_axioms(
        xs in prop::collection::vec(-30..=30i64, 12),
    ) {
        let g = ExtGroup::integer_model();
        let el = |v: &[i64]| g.element(&[v[0]], &[v[1]], &[v[2]], &[v[3]]).unwrap();
        let x = el(&xs[0..4]);
        let y = el(&xs[4..8]);
        let z = el(&xs[8..12]);
        // associativity
        prop_assert_eq!(
            g.mul(&g.mul(&x, &y).unwrap(), &z).unwrap(),
            g.mul(&x, &g.mul(&y, &z).unwrap()).unwrap()
        );
        // inverses
        let e = g.identity();
        prop_assert_eq!(g.mul(&x, &g.inv(&x).unwrap()).unwrap(), e.clone());
        prop_assert_eq!(g.mul(&g.inv(&x).unwrap(), &x).unwrap(), e);
        // conjugation preserves n and k
        let c = g.conjugate(&y, &x).unwrap();
        prop_assert_eq!(c.n, x.n);
        prop_assert_eq!(c.k, x.k);
    }

    #[test]
    fn closed_forms_match_generic_model(
        xs in prop::collection::vec(-20..=20i64, 8),
    ) {
        let g = ExtGroup::integer_model();
        let zx = ZExtElement::new(xs[0], xs[1], xs[2], xs[3]);
        let zy = ZExtElement::new(xs[4], xs[5], xs[6], xs[7]);
        let lift = |z: &ZExtElement| g.element(&[z.p], &[z.c], &[z.n], &[z.k]).unwrap();
        prop_assert_eq!(lift(&zx.mul(&zy).unwrap()), g.mul(&lift(&zx), &lift(&zy)).unwrap());
        prop_assert_eq!(lift(&zx.inv().unwrap()), g.inv(&lift(&zx)).unwrap());
        prop_assert_eq!(
            lift(&zy.conjugate_by(&zx).unwrap()),
            g.conjugate(&lift(&zx), &lift(&zy)).unwrap()
        );
    }

    /// The general R/S machinery, run on the integer model through the
    /// Hermite-form path, must agree with the closed-form decision.
    #[test]
    fn general_machinery_decides_the_integer_model(
        n in -4..=4i64,
        k in -3..=3i64,
        p1 in -4..=4i64,
        c1 in -4..=4i64,
        p2 in -4..=4i64,
        c2 in -4..=4i64,
    ) {
        let g = ExtGroup::integer_model();
        let ctx = ConjContext::new(
            &g,
            &g.heis().n_group().reduce(&[n]).unwrap(),
            &g.kgroup().group().reduce(&[k]).unwrap(),
        )
        .unwrap();
        let x1 = g.element(&[p1], &[c1], &[n], &[k]).unwrap();
        let x2 = g.element(&[p2], &[c2], &[n], &[k]).unwrap();
        let general = ctx.are_conjugate_finite(&x1, &x2).unwrap();
        let closed = is_conjugate_z(
            &ZExtElement::new(p1, c1, n, k),
            &ZExtElement::new(p2, c2, n, k),
        )
        .unwrap();
        prop_assert_eq!(general, closed.conjugate);
    }
}
