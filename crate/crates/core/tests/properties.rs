use proptest::prelude::*;

use tracepp::families::{k_orbit, TraceForm};
use tracepp::permcheck::{self, Domain, Total};
use tracepp::poly::Poly;
use tracepp::reductions;
use tracepp::{Elem, FieldCtx};

/// `(q, n, p, s)` with q = p^s, q^n <= 343.
const FIELDS: [(u64, u32, u64, u32); 6] = [
    (3, 2, 3, 1),
    (5, 2, 5, 1),
    (3, 3, 3, 1),
    (7, 2, 7, 1),
    (9, 2, 3, 2),
    (7, 3, 7, 1),
];

fn ctx_of(i: usize) -> (u64, u32, u32, FieldCtx) {
    let (q, n, p, s) = FIELDS[i];
    (q, n, s, FieldCtx::new(p, s * n).unwrap())
}

fn elem(ctx: &FieldCtx, raw: u32) -> Elem {
    ctx.elem(raw as u64 % ctx.order() as u64).unwrap()
}

fn nonzero(ctx: &FieldCtx, raw: u32) -> Elem {
    ctx.elem(1 + raw as u64 % (ctx.order() as u64 - 1)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn field_laws(i in 0..FIELDS.len(), a in any::<u32>(), b in any::<u32>(), c in any::<u32>()) {
        let (_, _, s, f) = ctx_of(i);
        let (a, b, c) = (elem(&f, a), elem(&f, b), elem(&f, c));
        prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
        prop_assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
        prop_assert_eq!(f.add(f.sub(a, b), b), a);
        if !a.is_zero() {
            prop_assert_eq!(f.mul(a, f.inv(a).unwrap()), Elem::ONE);
        }
        prop_assert_eq!(f.frobenius(f.add(a, b), 1), f.add(f.frobenius(a, 1), f.frobenius(b, 1)));
        // trace is F_q-linear into F_q
        let u = f.subfield_elements(s).unwrap()[(c.index() as usize) % (f.p() as usize).pow(s)];
        let t = f.trace(f.add(f.mul(u, a), b), s).unwrap();
        prop_assert!(f.in_subfield(t, s).unwrap());
        prop_assert_eq!(t, f.add(f.mul(u, f.trace(a, s).unwrap()), f.trace(b, s).unwrap()));
    }

    #[test]
    fn early_abort_agrees_with_exhaustive(i in 0..FIELDS.len(), k in any::<u32>(), g in any::<u32>()) {
        let (q, n, _, f) = ctx_of(i);
        let k = 1 + k as u128 % (f.order() as u128 - 1);
        let form = TraceForm::new(&f, q, n, k, nonzero(&f, g)).unwrap();
        let map = form.as_map(&f);
        prop_assert_eq!(
            permcheck::is_permutation(&f, &map, Domain::Field).unwrap(),
            permcheck::is_permutation_exhaustive(&f, &map, Domain::Field).unwrap()
        );
    }

    #[test]
    fn k_orbit_members_give_the_same_function(i in 0..FIELDS.len(), k in any::<u32>(), g in any::<u32>()) {
        let (q, n, _, f) = ctx_of(i);
        let k = 1 + k as u128 % (f.order() as u128 - 1);
        let gamma = nonzero(&f, g);
        let base = TraceForm::new(&f, q, n, k, gamma).unwrap().trace_table(&f);
        for other in k_orbit(k, q, n) {
            prop_assert_eq!(&TraceForm::new(&f, q, n, other as u128, gamma).unwrap().trace_table(&f), &base);
        }
    }

    #[test]
    fn scaling_preserves_permutation(i in 0..FIELDS.len(), k in any::<u32>(), g in any::<u32>(), c in any::<u32>()) {
        // F(cx) = c (x + gamma c^{k-1} Tr(x^k)) for c in F_q^*
        let (q, n, s, f) = ctx_of(i);
        let k = 1 + k as u64 % (f.order() as u64 - 1);
        let gamma = nonzero(&f, g);
        let sub = f.subfield_elements(s).unwrap();
        let c = sub[1 + c as usize % (sub.len() - 1)];
        let scaled = f.mul(gamma, f.pow_u(c, k - 1));
        let a = TraceForm::new(&f, q, n, k as u128, gamma).unwrap().is_permutation(&f).unwrap();
        let b = TraceForm::new(&f, q, n, k as u128, scaled).unwrap().is_permutation(&f).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn line_criterion_three_way(i in 0..FIELDS.len(), k in any::<u32>(), g in any::<u32>()) {
        let (_, _, s, f) = ctx_of(i);
        let k = 1 + k as u64 % (f.order() as u64 - 1);
        let (b, c, d) = reductions::surj_three_way(&f, s, k, nonzero(&f, g)).unwrap();
        prop_assert!(b == c && c == d);
    }

    #[test]
    fn zlem_sides_agree(coeffs in prop::collection::vec(any::<u32>(), 1..7), which in 0..2usize) {
        let (p, m) = [(3, 2), (5, 2)][which];
        let f = FieldCtx::new(p, m).unwrap();
        let h = Poly::new(coeffs.iter().map(|&c| elem(&f, c)).collect());
        let (left, right) = reductions::zlem_check(&f, 1, &h).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn rational_map_evaluation_matches_quotient(num in prop::collection::vec(any::<u32>(), 1..5), den in prop::collection::vec(any::<u32>(), 1..4), x in any::<u32>()) {
        let f = FieldCtx::new(7, 2).unwrap();
        let num = Poly::new(num.iter().map(|&c| elem(&f, c)).collect());
        let den = Poly::new(den.iter().map(|&c| elem(&f, c)).collect());
        prop_assume!(!den.is_zero());
        let x = elem(&f, x);
        let map = tracepp::ratmaps::RationalMap::new(&f, num.clone(), den.clone()).unwrap();
        let d = den.eval(&f, x);
        let expected = (!d.is_zero()).then(|| f.div(num.eval(&f, x), d).unwrap());
        prop_assert_eq!(map.eval(x), expected);
    }
}

#[test]
fn homogeneous_n2_criterion_matches_direct_check() {
    for q in [5, 7, 9] {
        let rep = reductions::red_sq1_suite(q, 100, q).unwrap();
        assert!(rep.passed(), "{:?}", rep.failures);
    }
}

#[test]
fn mu_permutation_by_power_maps() {
    let f = FieldCtx::new(5, 2).unwrap();
    for d in [2u64, 3, 4, 6, 8, 12, 24] {
        for e in 1..=30u64 {
            let map = Total(|x: Elem| f.pow_u(x, e));
            let v = permcheck::permutes_mu(&f, &map, d).unwrap();
            assert_eq!(
                v.is_permutation(),
                tracepp::numtheory::gcd(e, d) == 1,
                "d={d} e={e}"
            );
        }
    }
}
