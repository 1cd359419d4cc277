use bordism_core::borel::{euler_class, loc_divide, try_integralize, BorelSeries, LocalizedBorel, Weight};
use bordism_core::fixedring::{FixedDatum, FixedMonomial};
use bordism_core::lazard::{compose, FormalSeries};
use bordism_core::realizability::{localize, realizable};
use bordism_core::{MuElement, PowerSeries1, RingContext};
use proptest::prelude::*;

const N: u32 = 5;

fn weight(r: usize) -> impl Strategy<Value = Weight> {
    prop::collection::vec(-2i64..=2, r).prop_filter_map("nonzero weight", |v| Weight::new(v).ok())
}

#[derive(Clone, Debug)]
enum Factor {
    E(Weight, i32),
    Y(Weight, u32, u32),
}

fn factor(r: usize, cone_only: bool) -> impl Strategy<Value = Factor> {
    let ks: Vec<i32> = if cone_only { vec![-2, -1] } else { vec![-2, -1, 1, 2] };
    prop_oneof![
        (weight(r), prop::sample::select(ks)).prop_map(|(w, k)| Factor::E(w, k)),
        (weight(r), 2u32..=3, 1u32..=2).prop_map(|(w, d, k)| Factor::Y(w, d, k)),
    ]
}

fn datum(r: usize, cone_only: bool) -> impl Strategy<Value = FixedDatum> {
    prop::collection::vec((prop::collection::vec(factor(r, cone_only), 1..=2), -3i64..=3, 0usize..=2), 1..=3).prop_map(
        move |terms| {
            let mut x = FixedDatum::zero(r, N);
            for (fs, c, g) in terms {
                let m = fs.iter().fold(FixedMonomial::one(), |m, f| match f {
                    Factor::E(w, k) => m.mul(&FixedMonomial::euler(w.clone(), *k)),
                    Factor::Y(w, d, k) => m.mul(&FixedMonomial::y(w.clone(), *d, *k).unwrap()),
                });
                let coef = match g {
                    0 => MuElement::from_int(c, N),
                    g => MuElement::generator(g, N).scale_int(c),
                };
                x = x.add(&FixedDatum::term(r, m, coef).unwrap()).unwrap();
            }
            x
        },
    )
}

/// Zero as far as the numerator is known (products of fractions with poles
/// can carry less precision than their factors).
fn vanishes(x: &LocalizedBorel) -> bool {
    (0..=x.numerator().trunc()).all(|s| x.numerator().c_component(s).is_empty())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn fgl_axioms(n in 1u32..=6) {
        let ctx = RingContext::new(n).unwrap();
        let t = n + 1;
        let c = |r: usize, i: usize| BorelSeries::variable(r, i, t, n);
        let f = |a: &BorelSeries, b: &BorelSeries| ctx.fgl_add(a, b).unwrap();
        prop_assert_eq!(f(&c(2, 0), &BorelSeries::zero(2, t, n)), c(2, 0));
        prop_assert_eq!(f(&c(2, 0), &c(2, 1)), f(&c(2, 1), &c(2, 0)));
        prop_assert_eq!(f(&f(&c(3, 0), &c(3, 1)), &c(3, 2)), f(&c(3, 0), &f(&c(3, 1), &c(3, 2))));
    }

    #[test]
    fn n_series_is_a_homomorphism(n in 1u32..=6, a in -4i64..=4, b in -4i64..=4) {
        let ctx = RingContext::new(n).unwrap();
        let x = PowerSeries1::x(n + 1, n);
        let s = |k: i64| ctx.n_series(k, &x).unwrap();
        prop_assert_eq!(s(a + b), ctx.fgl_add(&s(a), &s(b)).unwrap());
        prop_assert_eq!(s(a * b), compose(&s(a), &s(b)).unwrap());
    }

    #[test]
    fn involution_is_an_involutive_ring_map(
        (x, y) in (1usize..=2).prop_flat_map(|r| (datum(r, false), datum(r, false)))
    ) {
        prop_assert_eq!(x.antipode().antipode(), x.clone());
        prop_assert_eq!(x.mul(&y).unwrap().antipode(), x.antipode().mul(&y.antipode()).unwrap());
        prop_assert_eq!(x.add(&y).unwrap().antipode(), x.antipode().add(&y.antipode()).unwrap());
    }

    #[test]
    fn cone_is_a_subring(x in datum(2, true), y in datum(2, true)) {
        prop_assert!(x.in_cone() && y.in_cone());
        prop_assert!(x.mul(&y).unwrap().in_cone());
        prop_assert!(x.add(&y).unwrap().in_cone());
    }

    #[test]
    fn localize_is_a_ring_map(x in datum(1, true), y in datum(1, true)) {
        let ctx = RingContext::new(N).unwrap();
        let d = 2;
        let (lx, ly) = (localize(&ctx, &x, d).unwrap(), localize(&ctx, &y, d).unwrap());
        prop_assert!(lx.precision() == d as i64 && ly.precision() == d as i64);
        let lxy = localize(&ctx, &x.mul(&y).unwrap(), d).unwrap();
        prop_assert!(vanishes(&lxy.add(&ctx, &lx.mul(&ly).unwrap().neg()).unwrap()));
        let lsum = localize(&ctx, &x.add(&y).unwrap(), d).unwrap();
        prop_assert!(vanishes(&lsum.add(&ctx, &lx.add(&ctx, &ly).unwrap().neg()).unwrap()));
    }

    #[test]
    fn localize_preserves_degree(x in datum(2, false)) {
        let ctx = RingContext::new(N).unwrap();
        for (deg, part) in x.homogeneous_components() {
            let loc = localize(&ctx, &part, 2).unwrap();
            if !loc.numerator().is_empty() {
                prop_assert_eq!(loc.homogeneous_degree(), Some(deg));
            }
        }
    }

    #[test]
    fn division_round_trip(
        r in 1usize..=2,
        den in prop::collection::vec((weight(2), 1u32..=2), 1..=3),
        coeffs in prop::collection::vec((0u32..=2, 0u32..=2, -4i64..=4, 0usize..=1), 1..=5),
    ) {
        let ctx = RingContext::new(N).unwrap();
        let den: Vec<(Weight, u32)> = den
            .into_iter()
            .filter_map(|(w, k)| Weight::new(w.entries()[..r].to_vec()).ok().map(|w| (w, k)))
            .collect();
        let d = 3;
        let t = d + den.iter().map(|(_, k)| k).sum::<u32>();
        let mut g = BorelSeries::zero(r, t, N);
        for (a, b, c, gen) in coeffs {
            let alpha = if r == 1 { vec![a + b] } else { vec![a, b] };
            let coef = if gen == 0 { MuElement::from_int(c, N) } else { ctx.lattice_basis(1)[0].scale_int(c) };
            g.add_term(alpha, coef);
        }
        let mut num = g.clone();
        for (w, k) in &den {
            let e = euler_class(&ctx, w, t).unwrap();
            for _ in 0..*k {
                num = FormalSeries::mul(&num, &e);
            }
        }
        let got = try_integralize(&ctx, &loc_divide(&ctx, &num, &den).unwrap()).unwrap();
        let got = got.series().expect("integral").clone();
        for s in 0..=d {
            prop_assert_eq!(got.c_component(s), g.c_component(s));
        }
    }

    #[test]
    fn negative_certificates_are_stable(x in datum(1, false)) {
        let ctx = RingContext::new(N).unwrap();
        let Ok(low) = realizable(&ctx, &x, 2) else { return Ok(()) };
        if let Some((deg, w)) = low.witness() {
            for d in 3..=4 {
                let high = realizable(&ctx, &x, d).unwrap();
                let comp = high.components.iter().find(|c| c.degree == deg).expect("component");
                let w2 = comp.witness().expect("witness persists");
                prop_assert_eq!((w2.kind, w2.degree), (w.kind, w.degree));
            }
        }
        if !low.cone_ok() {
            prop_assert!(!realizable(&ctx, &x, 4).unwrap().cone_ok());
        }
    }
}
