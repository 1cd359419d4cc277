//! Acceptance suite: one pass/fail line per criterion, exit status nonzero
//! if any criterion fails.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::Instant;

use bordism_core::borel::{euler_class, loc_divide, try_integralize, BorelSeries, ObstructionKind, Weight};
use bordism_core::fixedring::{FixedDatum, FixedMonomial};
use bordism_core::geometry::{catalog, phi_omega, CatalogBounds, ManifoldExpr};
use bordism_core::lazard::{compose, FormalSeries};
use bordism_core::realizability::{augmentation_check, realizable};
use bordism_core::{MuElement, PowerSeries1, RingContext};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Coefficient half-degree for every check.
const N: u32 = 6;
/// Borel degree for every integrality check.
const D: u32 = 5;
/// Weight box for calibration identities: `|μ_i| <= MAX_WEIGHT`.
const MAX_WEIGHT: i64 = 3;
/// Range of `m, n` in the n-series homomorphism law.
const MAX_N_SERIES: i64 = 4;
const LAZARD_RANKS: [usize; 5] = [1, 2, 3, 5, 7];
const MIN_CATALOG_R1: usize = 50;
const MIN_CATALOG_R2: usize = 30;
const INVOLUTION_SAMPLES: usize = 200;
const DIVISION_SAMPLES: usize = 100;
const SEED: u64 = 0x5eed_b0d1;

type Check = std::result::Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Check + 'a>);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn weights(r: usize, max: i64) -> Vec<Weight> {
    let mut out: Vec<Vec<i64>> = vec![Vec::new()];
    for _ in 0..r {
        out = out.into_iter().flat_map(|p| (-max..=max).map(move |x| [p.clone(), vec![x]].concat())).collect();
    }
    out.into_iter().filter(|w| w.iter().any(|&x| x != 0)).map(|w| Weight::new(w).unwrap()).collect()
}

/// 1. FGL axioms and the n-series homomorphism law, exact through half-degree N.
fn fgl_axioms(ctx: &RingContext) -> Check {
    let t = N + 1;
    let c = |r: usize, i: usize| BorelSeries::variable(r, i, t, N);
    let zero = BorelSeries::zero(2, t, N);
    ensure(ctx.fgl_add(&c(2, 0), &zero).map_err(err)? == c(2, 0), || "F(x, 0) != x".into())?;
    ensure(ctx.fgl_add(&zero, &c(2, 1)).map_err(err)? == c(2, 1), || "F(0, y) != y".into())?;
    ensure(ctx.fgl_add(&c(2, 0), &c(2, 1)).map_err(err)? == ctx.fgl_add(&c(2, 1), &c(2, 0)).map_err(err)?, || {
        "F not commutative".into()
    })?;
    let left = ctx.fgl_add(&ctx.fgl_add(&c(3, 0), &c(3, 1)).map_err(err)?, &c(3, 2)).map_err(err)?;
    let right = ctx.fgl_add(&c(3, 0), &ctx.fgl_add(&c(3, 1), &c(3, 2)).map_err(err)?).map_err(err)?;
    ensure(left == right, || "F not associative".into())?;

    let x = PowerSeries1::x(t, N);
    let ns = |k: i64| ctx.n_series(k, &x).map_err(err);
    let mut laws = 0;
    for m in -MAX_N_SERIES..=MAX_N_SERIES {
        for n in -MAX_N_SERIES..=MAX_N_SERIES {
            ensure(ns(m + n)? == ctx.fgl_add(&ns(m)?, &ns(n)?).map_err(err)?, || format!("[{}+{}] law", m, n))?;
            ensure(ns(m * n)? == compose(&ns(m)?, &ns(n)?).map_err(err)?, || format!("[{}*{}] law", m, n))?;
            laws += 2;
        }
    }
    let inv = ctx.formal_inverse(&x).map_err(err)?;
    ensure(ctx.fgl_add(&x, &inv).map_err(err)?.is_zero(), || "F(x, i(x)) != 0".into())?;
    Ok(format!("unit, commutativity, associativity, inverse, {} n-series laws", laws))
}

/// 2. Lattice ranks are partition numbers.
fn lazard_ranks(ctx: &RingContext) -> Check {
    let ranks: Vec<usize> = (1..=LAZARD_RANKS.len() as u32).map(|k| ctx.lattice_rank(k)).collect();
    ensure(ranks == LAZARD_RANKS, || format!("ranks {:?}", ranks))?;
    Ok(format!("ranks {:?}", ranks))
}

/// 3. `a_11 = -[CP^1]` and additivity of Euler classes in the weights.
fn calibration(ctx: &RingContext) -> Check {
    ensure(ctx.a(1, 1) == -ctx.cp_class(1).map_err(err)?, || format!("a11 = {}", ctx.a(1, 1)))?;
    let t = N + 1;
    let mut count = 0;
    for r in 1..=2 {
        let ws = weights(r, MAX_WEIGHT);
        let es: BTreeMap<&Weight, BorelSeries> = ws.iter().map(|w| (w, euler_class(ctx, w, t).unwrap())).collect();
        for v in &ws {
            for w in &ws {
                if v > w {
                    continue;
                }
                let sum: Vec<i64> = v.entries().iter().zip(w.entries()).map(|(a, b)| a + b).collect();
                let lhs = match Weight::new(sum) {
                    Ok(s) => euler_class(ctx, &s, t).map_err(err)?,
                    Err(_) => BorelSeries::zero(r, t, N),
                };
                let rhs = ctx.fgl_add(&es[v], &es[w]).map_err(err)?;
                ensure(lhs == rhs, || format!("e({} + {})", v, w))?;
                count += 1;
            }
        }
    }
    Ok(format!("a11 = -[CP^1]; {} Euler additivity pairs", count))
}

/// 4. `φ(P(C^d ⊕ V)) = Y_{V,d} + e_{V*}^{-d}`.
fn projective_anchor(ctx: &RingContext) -> Check {
    let mut count = 0;
    for r in 1..=2 {
        for w in weights(r, MAX_WEIGHT) {
            for d in 2..=4u32 {
                let mut lines = vec![vec![0; r]; d as usize];
                lines.push(w.entries().to_vec());
                let phi = phi_omega(ctx, &ManifoldExpr::Proj(lines), r).map_err(err)?;
                let expect = FixedDatum::y(&w, d, N)
                    .map_err(err)?
                    .add(&FixedDatum::euler(&w.dual(), -(d as i32), N))
                    .map_err(err)?;
                ensure(phi == expect, || format!("d = {}, V = {}: got {}", d, w, phi))?;
                count += 1;
            }
        }
    }
    Ok(format!("{} (d, V) pairs", count))
}

fn catalogs() -> Vec<(usize, Vec<ManifoldExpr>)> {
    (1..=2).map(|r| (r, catalog(r, &CatalogBounds::default_for_rank(r)))).collect()
}

/// 5. Every catalog manifold lands in the cone.
fn cone_containment(ctx: &RingContext, cats: &[(usize, Vec<ManifoldExpr>)]) -> Check {
    let mut counts = Vec::new();
    for (r, cat) in cats {
        let min = if *r == 1 { MIN_CATALOG_R1 } else { MIN_CATALOG_R2 };
        ensure(cat.len() >= min, || format!("rank {} catalog has {} < {}", r, cat.len(), min))?;
        for m in cat {
            ensure(phi_omega(ctx, m, *r).map_err(err)?.in_cone(), || format!("{} leaves the cone", m))?;
        }
        counts.push(format!("r={}: {}", r, cat.len()));
    }
    Ok(counts.join(", "))
}

/// 6. Every catalog manifold has an integral localized image.
fn integrality(ctx: &RingContext, cats: &[(usize, Vec<ManifoldExpr>)]) -> Check {
    let mut n = 0;
    for (r, cat) in cats {
        for m in cat {
            let v = realizable(ctx, &phi_omega(ctx, m, *r).map_err(err)?, D).map_err(err)?;
            ensure(v.realizable(), || format!("{}: {}", m, v))?;
            n += 1;
        }
    }
    Ok(format!("{} manifolds, zero failures", n))
}

/// 7. Constant term equals the underlying class.
fn augmentation(ctx: &RingContext, cats: &[(usize, Vec<ManifoldExpr>)]) -> Check {
    let s1 = ManifoldExpr::proj(&[&[0], &[1]]);
    let p2 = ManifoldExpr::proj(&[&[0], &[0], &[1]]);
    for (m, k) in [(&s1, 1), (&p2, 2)] {
        let v = realizable(ctx, &phi_omega(ctx, m, 1).map_err(err)?, D).map_err(err)?;
        ensure(v.constant_term(N) == Some(ctx.cp_class(k).map_err(err)?), || format!("{}", m))?;
    }
    let mut n = 0;
    for (r, cat) in cats {
        for m in cat {
            ensure(augmentation_check(ctx, m, *r, D).map_err(err)?, || format!("{}", m))?;
            n += 1;
        }
    }
    Ok(format!("{} manifolds", n))
}

/// 8. `e_V` fails the cone, `e_V^{-1}` has a pole; both stable in `D`.
fn certified_negatives(ctx: &RingContext) -> Check {
    let v = Weight::new(vec![1]).map_err(err)?;
    for d in 3..=6 {
        let a = realizable(ctx, &FixedDatum::euler(&v, 1, N), d).map_err(err)?;
        ensure(!a.cone_ok() && !a.realizable(), || format!("e_V accepted at D = {}", d))?;
        let b = realizable(ctx, &FixedDatum::euler(&v, -1, N), d).map_err(err)?;
        let (_, w) = b.witness().ok_or_else(|| format!("e_V^-1 accepted at D = {}", d))?;
        ensure(w.kind == ObstructionKind::Pole && w.degree == 0, || format!("witness {}", w))?;
        ensure(b.recheck(ctx).map_err(err)?, || "witness does not recheck".into())?;
    }
    Ok("cone failure and pole witness for D = 3..6".into())
}

fn random_weight(rng: &mut ChaCha8Rng, r: usize) -> Weight {
    loop {
        let v: Vec<i64> = (0..r).map(|_| rng.gen_range(-2..=2)).collect();
        if let Ok(w) = Weight::new(v) {
            return w;
        }
    }
}

fn random_datum(rng: &mut ChaCha8Rng, r: usize) -> FixedDatum {
    let mut x = FixedDatum::zero(r, N);
    for _ in 0..rng.gen_range(1..=3) {
        let mut m = FixedMonomial::one();
        for _ in 0..rng.gen_range(1..=2) {
            let w = random_weight(rng, r);
            m = if rng.gen_bool(0.5) {
                let k = [-2, -1, 1, 2][rng.gen_range(0..4)];
                m.mul(&FixedMonomial::euler(w, k))
            } else {
                m.mul(&FixedMonomial::y(w, rng.gen_range(2..=4), rng.gen_range(1..=2)).unwrap())
            };
        }
        let c = match rng.gen_range(0..3) {
            0 => MuElement::from_int(rng.gen_range(-3..=3), N),
            1 => MuElement::generator(1, N).scale_int(rng.gen_range(-2..=2)),
            _ => MuElement::generator(2, N),
        };
        x = x.add(&FixedDatum::term(r, m, c).unwrap()).unwrap();
    }
    x
}

/// 9. The involution.
fn involution(_ctx: &RingContext) -> Check {
    let v = Weight::new(vec![1]).map_err(err)?;
    let e = FixedDatum::euler(&v, 1, N);
    ensure(e.antipode() == e, || "ι(e_V) != e_V".into())?;
    let y2 = FixedDatum::y(&v, 2, N).map_err(err)?;
    ensure(y2.antipode() == y2.neg(), || "ι(Y_2) != -Y_2".into())?;
    let y3 = FixedDatum::y(&v, 3, N).map_err(err)?;
    let expect = y3.neg().add(&e.mul(&y2.pow(2)).map_err(err)?).map_err(err)?;
    ensure(y3.antipode() == expect, || format!("ι(Y_3) = {}", y3.antipode()))?;

    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    for i in 0..INVOLUTION_SAMPLES {
        let r = 1 + i % 2;
        let x = random_datum(&mut rng, r);
        let y = random_datum(&mut rng, r);
        ensure(x.antipode().antipode() == x, || format!("ι² != id on {}", x))?;
        let lhs = x.mul(&y).map_err(err)?.antipode();
        let rhs = x.antipode().mul(&y.antipode()).map_err(err)?;
        ensure(lhs == rhs, || format!("ι not multiplicative on {} , {}", x, y))?;
    }
    Ok(format!("anchors and {} random pairs", INVOLUTION_SAMPLES))
}

/// 10. `try_integralize(g·Πe / Πe) = g`.
fn division_round_trip(ctx: &RingContext) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 0xd1);
    for i in 0..DIVISION_SAMPLES {
        let r = 1 + i % 2;
        let den: Vec<(Weight, u32)> =
            (0..rng.gen_range(1..=3)).map(|_| (random_weight(&mut rng, r), rng.gen_range(1..=2))).collect();
        let pole: u32 = den.iter().map(|(_, k)| k).sum();
        let t = D + pole;
        let mut g = BorelSeries::zero(r, t, N);
        for _ in 0..rng.gen_range(1..=6) {
            let alpha: Vec<u32> = (0..r).map(|_| rng.gen_range(0..=2)).collect();
            let k = rng.gen_range(0..=3u32);
            let c = if k == 0 {
                MuElement::from_int(rng.gen_range(-4..=4), N)
            } else {
                let basis = ctx.lattice_basis(k);
                basis.iter().fold(MuElement::zero(N), |acc, b| &acc + &b.scale_int(rng.gen_range(-3..=3)))
            };
            g.add_term(alpha, c);
        }
        let mut num = g.clone();
        for (w, k) in &den {
            let e = euler_class(ctx, w, t).map_err(err)?;
            for _ in 0..*k {
                num = FormalSeries::mul(&num, &e);
            }
        }
        let loc = loc_divide(ctx, &num, &den).map_err(err)?;
        let got = try_integralize(ctx, &loc).map_err(err)?;
        let got = got.series().ok_or_else(|| format!("sample {}: obstructed", i))?;
        for s in 0..=D {
            ensure(got.c_component(s) == g.c_component(s), || format!("sample {}: degree {} differs", i, s))?;
        }
    }
    Ok(format!("{} samples", DIVISION_SAMPLES))
}

fn main() -> ExitCode {
    let ctx = RingContext::new(N).expect("context");
    let cats = catalogs();
    let criteria: Vec<Criterion> = vec![
        ("FGL axioms", Box::new(|| fgl_axioms(&ctx))),
        ("Lazard ranks", Box::new(|| lazard_ranks(&ctx))),
        ("calibration identities", Box::new(|| calibration(&ctx))),
        ("projective anchor", Box::new(|| projective_anchor(&ctx))),
        ("cone containment", Box::new(|| cone_containment(&ctx, &cats))),
        ("integrality of manifolds", Box::new(|| integrality(&ctx, &cats))),
        ("augmentation", Box::new(|| augmentation(&ctx, &cats))),
        ("certified non-realizability", Box::new(|| certified_negatives(&ctx))),
        ("involution", Box::new(|| involution(&ctx))),
        ("division round trip", Box::new(|| division_round_trip(&ctx))),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let res = run();
        let secs = start.elapsed().as_secs_f64();
        match res {
            Ok(detail) => println!("criterion {:>2} PASS  {} ({}) [{:.1}s]", i + 1, name, detail, secs),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {}: {} [{:.1}s]", i + 1, name, why, secs);
            }
        }
    }
    println!("acceptance: {} passed, {} failed", criteria.len() - failed, failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
