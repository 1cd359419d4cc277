//! Localization of fixed-point data into Borel cobordism, and the
//! realizability decision.
//!
//! Every weight factors as `w = c·ℓ` with `ℓ` a primitive line, so every
//! generator localizes to a power series in the single Euler class
//! `y = e(ℓ)`, divided by a power of `y`:
//!
//! - `e_w ↦ [c](y)`,
//! - `e_w^{-1} ↦ v_c(y) / y` with `v_c(y) = y / [c](y)`,
//! - `Y_{w,d} ↦ Ψ_d([c](y)) · v_c(y)^d / y^d`,
//!
//! where `Ψ_d(e) / e^d` is the pushforward over `CP^{d-1}` of
//! `(x +_F e)^{-1}`. A monomial is then a product over lines of
//! `y^{s} · W(y)`, and a datum is put over the common denominator
//! `Π_ℓ e(ℓ)^{L_ℓ}`.

use std::collections::BTreeMap;
use std::fmt;

use crate::borel::{try_integralize, BorelSeries, EulerCache, Integralization, LocalizedBorel, Obstruction, Weight};
use crate::error::{Error, Result};
use crate::fixedring::{FixedDatum, FixedMonomial};
use crate::geometry::{phi_omega, underlying_class, ManifoldExpr};
use crate::lazard::{compose, power, FormalSeries, MuElement, PowerSeries1, RingContext};

/// Univariate building blocks in `y = e(ℓ)`, memoized per call.
struct LineSeries<'a> {
    ctx: &'a RingContext,
    trunc: u32,
    n_series: BTreeMap<i64, PowerSeries1>,
    unit: BTreeMap<i64, PowerSeries1>,
    unit_inv: BTreeMap<i64, PowerSeries1>,
    psi: BTreeMap<u32, PowerSeries1>,
    y_image: BTreeMap<(i64, u32), PowerSeries1>,
}

impl<'a> LineSeries<'a> {
    fn new(ctx: &'a RingContext, trunc: u32) -> Self {
        LineSeries {
            ctx,
            trunc: trunc.max(ctx.n() + 1),
            n_series: BTreeMap::new(),
            unit: BTreeMap::new(),
            unit_inv: BTreeMap::new(),
            psi: BTreeMap::new(),
            y_image: BTreeMap::new(),
        }
    }

    fn widen(&self, s: &PowerSeries1) -> PowerSeries1 {
        PowerSeries1::from_coeffs(s.coeffs().to_vec(), self.trunc, self.ctx.n())
    }

    fn one(&self) -> PowerSeries1 {
        PowerSeries1::one(self.trunc, self.ctx.n())
    }

    fn y_pow(&self, k: u32) -> PowerSeries1 {
        PowerSeries1::monomial(k, MuElement::one(self.ctx.n()), self.trunc, self.ctx.n())
    }

    /// `[c](y)`.
    fn n_series(&mut self, c: i64) -> PowerSeries1 {
        if let Some(s) = self.n_series.get(&c) {
            return s.clone();
        }
        let s = self.widen(&self.ctx.n_series_1(c));
        self.n_series.insert(c, s.clone());
        s
    }

    /// `[c](y) / y`.
    fn unit(&mut self, c: i64) -> Result<PowerSeries1> {
        if let Some(s) = self.unit.get(&c) {
            return Ok(s.clone());
        }
        let shifted = self.n_series(c).shift_down()?;
        let s = self.widen(&shifted);
        self.unit.insert(c, s.clone());
        Ok(s)
    }

    /// `y / [c](y)`.
    fn unit_inv(&mut self, c: i64) -> Result<PowerSeries1> {
        if let Some(s) = self.unit_inv.get(&c) {
            return Ok(s.clone());
        }
        let s = self.unit(c)?.inverse()?;
        self.unit_inv.insert(c, s.clone());
        Ok(s)
    }

    /// `Ψ_d(e) = Σ_{k<d} [CP^{d-1-k}] e^{d-1-k} N_k(e)`, where `N_k(e) / e^{k+1}`
    /// is the coefficient of `x^k` in `(x +_F e)^{-1}`.
    fn psi(&mut self, d: u32) -> PowerSeries1 {
        if let Some(s) = self.psi.get(&d) {
            return s.clone();
        }
        let ctx = self.ctx;
        let n = ctx.n();
        // F(x, e) = e + Σ_j x^j F_j(e).
        let f: Vec<PowerSeries1> = (0..d)
            .map(|j| {
                let coeffs = (0..=self.trunc).map(|i| ctx.a(j, i)).collect();
                PowerSeries1::from_coeffs(coeffs, self.trunc, n)
            })
            .collect();
        let mut nk: Vec<PowerSeries1> = vec![self.one()];
        for k in 1..d {
            let mut acc = PowerSeries1::zero(self.trunc, n);
            for j in 1..=k {
                let t = f[j as usize].mul(&nk[(k - j) as usize]).mul(&self.y_pow(j - 1));
                acc = FormalSeries::add(&acc, &t);
            }
            nk.push(acc.neg());
        }
        let mut out = PowerSeries1::zero(self.trunc, n);
        for (k, nkk) in nk.iter().enumerate() {
            let e = d - 1 - k as u32;
            let cp = ctx.cp_class(e).unwrap_or_else(|_| MuElement::zero(n));
            out = FormalSeries::add(&out, &nkk.mul(&self.y_pow(e)).scale(&cp));
        }
        self.psi.insert(d, out.clone());
        out
    }

    /// `Ψ_d([c](y)) · v_c(y)^d`.
    fn y_image(&mut self, c: i64, d: u32) -> Result<PowerSeries1> {
        if let Some(s) = self.y_image.get(&(c, d)) {
            return Ok(s.clone());
        }
        let psi = self.psi(d);
        let s = compose(&psi, &self.n_series(c))?.mul(&power(&self.unit_inv(c)?, d));
        self.y_image.insert((c, d), s.clone());
        Ok(s)
    }
}

/// Per-line factor `y^{shift} · w(y)` of one monomial.
struct LineFactor {
    shift: i64,
    w: PowerSeries1,
}

fn monomial_factors(ls: &mut LineSeries, m: &FixedMonomial) -> Result<BTreeMap<Weight, LineFactor>> {
    let mut out: BTreeMap<Weight, LineFactor> = BTreeMap::new();
    for (w, &k) in m.e_exponents() {
        let (line, c) = w.primitive_line();
        let f = out.entry(line).or_insert_with(|| LineFactor { shift: 0, w: ls.one() });
        f.shift += k as i64;
        let base = if k > 0 { ls.unit(c)? } else { ls.unit_inv(c)? };
        f.w = f.w.mul(&power(&base, k.unsigned_abs()));
    }
    for ((w, d), &p) in m.y_exponents() {
        let (line, c) = w.primitive_line();
        let img = ls.y_image(c, *d)?;
        let f = out.entry(line).or_insert_with(|| LineFactor { shift: 0, w: ls.one() });
        f.shift -= (*d as i64) * p as i64;
        f.w = f.w.mul(&power(&img, p));
    }
    Ok(out)
}

/// The localized Borel image of a fixed-point datum, determined through
/// `C`-degree `d` (the fraction's precision is exactly `d`).
pub fn localize(ctx: &RingContext, x: &FixedDatum, d: u32) -> Result<LocalizedBorel> {
    let rank = x.rank();
    let n = ctx.n();
    let mut ls = LineSeries::new(ctx, 0);
    let mut per_term = Vec::with_capacity(x.len());
    let mut den: BTreeMap<Weight, u32> = BTreeMap::new();
    // First pass only needs the shifts; series are rebuilt at the final truncation.
    for (m, _) in x.terms() {
        for w in m.weights() {
            if w.rank() != rank {
                return Err(Error::RankMismatch(w.rank(), rank));
            }
        }
        let mut shifts: BTreeMap<Weight, i64> = BTreeMap::new();
        for (w, &k) in m.e_exponents() {
            *shifts.entry(w.primitive_line().0).or_insert(0) += k as i64;
        }
        for ((w, dd), &p) in m.y_exponents() {
            *shifts.entry(w.primitive_line().0).or_insert(0) -= (*dd as i64) * p as i64;
        }
        for (line, s) in shifts {
            if s < 0 {
                let e = den.entry(line).or_insert(0);
                *e = (*e).max((-s) as u32);
            }
        }
    }
    let pole: u32 = den.values().sum();
    let trunc = d + pole;
    ls.trunc = ls.trunc.max(trunc);
    for (m, c) in x.terms() {
        per_term.push((monomial_factors(&mut ls, m)?, c.clone()));
    }

    let mut cache = EulerCache::new();
    let mut num = BorelSeries::zero(rank, trunc, n);
    for (factors, c) in per_term {
        let mut lines: Vec<&Weight> = factors.keys().chain(den.keys()).collect();
        lines.sort();
        lines.dedup();
        let mut t = BorelSeries::constant(rank, c, trunc);
        for line in lines {
            let lift = den.get(line).copied().unwrap_or(0) as i64;
            let (shift, w) = match factors.get(line) {
                Some(f) => (f.shift, f.w.clone()),
                None => (0, ls.one()),
            };
            let exp = shift + lift;
            debug_assert!(exp >= 0);
            let u = ls.y_pow(exp as u32).mul(&w);
            let e = cache.get(ctx, line, trunc)?;
            t = FormalSeries::mul(&t, &compose(&u, &e)?);
        }
        num = FormalSeries::add(&num, &t);
    }
    LocalizedBorel::from_parts(num, den)
}

/// Integrality outcome of one homogeneous component.
#[derive(Clone, Debug, PartialEq)]
pub enum IntegralityStatus {
    /// No obstruction through the stated precision.
    Pass { series: BorelSeries },
    /// A certified obstruction.
    Fail(Obstruction),
}

/// Verdict on one homogeneous component.
#[derive(Clone, Debug, PartialEq)]
pub struct ComponentVerdict {
    /// Homological degree.
    pub degree: i64,
    pub cone_ok: bool,
    /// `C`-degree through which integrality was checked.
    pub precision: i64,
    pub integrality: IntegralityStatus,
    pub localized: LocalizedBorel,
}

impl ComponentVerdict {
    pub fn integrality_ok(&self) -> bool {
        matches!(self.integrality, IntegralityStatus::Pass { .. })
    }

    pub fn realizable(&self) -> bool {
        self.cone_ok && self.integrality_ok()
    }

    pub fn constant_term(&self) -> Option<MuElement> {
        match &self.integrality {
            IntegralityStatus::Pass { series } => Some(series.coefficient(&vec![0; series.rank()])),
            IntegralityStatus::Fail(_) => None,
        }
    }

    pub fn witness(&self) -> Option<&Obstruction> {
        match &self.integrality {
            IntegralityStatus::Fail(o) => Some(o),
            IntegralityStatus::Pass { .. } => None,
        }
    }
}

/// Realizability verdict, judged one homogeneous component at a time.
///
/// A negative verdict is a certificate. A positive one only says that no
/// obstruction exists through the reported precision.
#[derive(Clone, Debug, PartialEq)]
pub struct Verdict {
    pub components: Vec<ComponentVerdict>,
    /// Requested `C`-degree.
    pub requested: u32,
}

impl Verdict {
    pub fn cone_ok(&self) -> bool {
        self.components.iter().all(|c| c.cone_ok)
    }

    pub fn integrality_ok(&self) -> bool {
        self.components.iter().all(|c| c.integrality_ok())
    }

    pub fn realizable(&self) -> bool {
        self.cone_ok() && self.integrality_ok()
    }

    /// Smallest precision over components (the requested degree if there are none).
    pub fn precision(&self) -> i64 {
        self.components.iter().map(|c| c.precision).min().unwrap_or(self.requested as i64)
    }

    pub fn witness(&self) -> Option<(i64, &Obstruction)> {
        self.components.iter().find_map(|c| c.witness().map(|w| (c.degree, w)))
    }

    /// Sum of the constant `C`-terms, if every component passed.
    pub fn constant_term(&self, n: u32) -> Option<MuElement> {
        self.components.iter().try_fold(MuElement::zero(n), |acc, c| c.constant_term().map(|t| &acc + &t))
    }

    pub fn is_heterogeneous(&self) -> bool {
        self.components.len() > 1
    }

    /// Re-derive any integrality witness from the stored localization.
    pub fn recheck(&self, ctx: &RingContext) -> Result<bool> {
        for c in &self.components {
            if let Some(w) = c.witness() {
                if !w.recheck(ctx, &c.localized)? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let yes_no = |b: bool| if b { "yes" } else { "no" };
        writeln!(f, "realizable: {}", yes_no(self.realizable()))?;
        writeln!(f, "cone: {}", if self.cone_ok() { "pass" } else { "fail" })?;
        match self.witness() {
            None => writeln!(f, "integrality: pass through C-degree {}", self.precision())?,
            Some((deg, w)) => writeln!(f, "integrality: fail in degree {}: {}", deg, w)?,
        }
        if self.is_heterogeneous() {
            let degs: Vec<String> = self.components.iter().map(|c| c.degree.to_string()).collect();
            writeln!(f, "note: input split into degrees {}", degs.join(", "))?;
        }
        let n = self.components.first().map(|c| c.localized.numerator().coeff_trunc()).unwrap_or(0);
        match self.constant_term(n) {
            Some(t) => write!(f, "constant term: {}", t)?,
            None => write!(f, "constant term: none")?,
        }
        if self.realizable() {
            write!(f, "\nclaim: no obstruction through the stated precision")?;
        }
        Ok(())
    }
}

/// `C`-degree through which a component of homological degree `degree` can
/// be checked: the requested `d`, capped by the coefficient truncation.
pub fn effective_precision(ctx: &RingContext, degree: i64, d: u32) -> Result<u32> {
    let half = degree.div_euclid(2);
    let room = ctx.n() as i64 - half;
    if room < 0 {
        return Err(Error::Precision {
            message: format!("degree {} exceeds the coefficient truncation N = {}", degree, ctx.n()),
            needed: format!("N >= {}", half),
        });
    }
    Ok((d as i64).min(room) as u32)
}

/// Decide realizability of `x` through `C`-degree `d`.
pub fn realizable(ctx: &RingContext, x: &FixedDatum, d: u32) -> Result<Verdict> {
    let mut components = Vec::new();
    for (degree, part) in x.homogeneous_components() {
        let prec = effective_precision(ctx, degree, d)?;
        let localized = localize(ctx, &part, prec)?;
        let integrality = match try_integralize(ctx, &localized)? {
            Integralization::Integral { series, .. } => IntegralityStatus::Pass { series },
            Integralization::Obstructed(o) => IntegralityStatus::Fail(o),
        };
        components.push(ComponentVerdict {
            degree,
            cone_ok: part.in_cone(),
            precision: prec as i64,
            integrality,
            localized,
        });
    }
    Ok(Verdict { components, requested: d })
}

/// Forgetting the action: the constant term of the integralized image of
/// `φ_Ω(m)` must be the underlying bordism class of `m`.
pub fn augmentation_check(ctx: &RingContext, m: &ManifoldExpr, rank: usize, d: u32) -> Result<bool> {
    let v = realizable(ctx, &phi_omega(ctx, m, rank)?, d)?;
    let expected = underlying_class(ctx, m)?;
    Ok(v.constant_term(ctx.n()) == Some(expected))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::borel::{euler_class, ObstructionKind};

    const N: u32 = 6;

    fn w(v: &[i64]) -> Weight {
        Weight::new(v.to_vec()).unwrap()
    }

    #[test]
    fn inverse_euler_class() {
        let ctx = RingContext::new(N).unwrap();
        let x = FixedDatum::euler(&w(&[1]), -1, N);
        let loc = localize(&ctx, &x, 4).unwrap();
        assert_eq!(loc.denominator(), &BTreeMap::from([(w(&[1]), 1)]));
        assert_eq!(loc.numerator(), &BorelSeries::one(1, 5, N));
        assert_eq!(loc.precision(), 4);
    }

    #[test]
    fn two_fixed_points_give_cp1() {
        let ctx = RingContext::new(N).unwrap();
        let x = FixedDatum::euler(&w(&[1]), -1, N).add(&FixedDatum::euler(&w(&[-1]), -1, N)).unwrap();
        let g = try_integralize(&ctx, &localize(&ctx, &x, 4).unwrap()).unwrap();
        let g = g.series().unwrap().clone();
        assert_eq!(g.coefficient(&[0]), ctx.cp_class(1).unwrap());
    }

    #[test]
    fn calibration_datum_is_integral() {
        let ctx = RingContext::new(N).unwrap();
        let x = FixedDatum::y(&w(&[1]), 2, N).unwrap().add(&FixedDatum::euler(&w(&[-1]), -2, N)).unwrap();
        let v = realizable(&ctx, &x, 5).unwrap();
        assert!(v.realizable(), "{}", v);
        assert_eq!(v.constant_term(N), Some(ctx.cp_class(2).unwrap()));
    }

    /// `Y_{V,2} ↦ [CP^1]/e - 1/(e^2 log'(e))`, computed from the logarithm.
    #[test]
    fn y2_against_logarithm() {
        let ctx = RingContext::new(N).unwrap();
        for c in [1i64, 2, -3] {
            let v = w(&[c]);
            let d = 4;
            let loc = localize(&ctx, &FixedDatum::y(&v, 2, N).unwrap(), d).unwrap();
            let t = loc.numerator().trunc();
            let e = euler_class(&ctx, &v, t).unwrap();
            let times_e2 = loc.mul(&LocalizedBorel::from_series(power(&e, 2))).unwrap();
            let g = try_integralize(&ctx, &times_e2).unwrap();
            let dlog_inv = ctx.log_series().derivative().inverse().unwrap();
            let expect = e.scale(&ctx.cp_class(1).unwrap()).sub(&compose(&dlog_inv, &e).unwrap());
            let got = g.series().unwrap();
            for k in 0..=d {
                assert_eq!(got.c_component(k), expect.c_component(k), "c = {}, degree {}", c, k);
            }
        }
    }

    #[test]
    fn ring_map_on_samples() {
        let ctx = RingContext::new(N).unwrap();
        let a = FixedDatum::y(&w(&[1, 1]), 2, N).unwrap().add(&FixedDatum::euler(&w(&[2, 0]), -1, N)).unwrap();
        let b = FixedDatum::euler(&w(&[0, 1]), -2, N).add(&FixedDatum::euler(&w(&[1, -1]), 1, N)).unwrap();
        let d = 3;
        let la = localize(&ctx, &a, d).unwrap();
        let lb = localize(&ctx, &b, d).unwrap();
        let lab = localize(&ctx, &a.mul(&b).unwrap(), d).unwrap();
        let vanishes = |x: &LocalizedBorel| {
            assert!(x.precision() >= 0);
            (0..=x.numerator().trunc()).all(|s| x.numerator().c_component(s).is_empty())
        };
        assert!(vanishes(&lab.add(&ctx, &la.mul(&lb).unwrap().neg()).unwrap()));
        let sum = localize(&ctx, &a.add(&b).unwrap(), d).unwrap();
        assert!(vanishes(&sum.add(&ctx, &la.add(&ctx, &lb).unwrap().neg()).unwrap()));
    }

    #[test]
    fn certified_negatives() {
        let ctx = RingContext::new(N).unwrap();
        let e = FixedDatum::euler(&w(&[1]), 1, N);
        let v = realizable(&ctx, &e, 3).unwrap();
        assert!(!v.cone_ok() && !v.realizable());
        let einv = FixedDatum::euler(&w(&[1]), -1, N);
        for d in 3..=6 {
            let v = realizable(&ctx, &einv, d).unwrap();
            assert!(v.cone_ok());
            let (_, o) = v.witness().unwrap();
            assert_eq!(o.kind, ObstructionKind::Pole);
            assert_eq!(o.degree, 0);
            assert!(v.recheck(&ctx).unwrap());
        }
    }

    #[test]
    fn heterogeneous_input_is_split() {
        let ctx = RingContext::new(N).unwrap();
        let x = FixedDatum::one(1, N)
            .add(&FixedDatum::euler(&w(&[1]), -1, N).add(&FixedDatum::euler(&w(&[-1]), -1, N)).unwrap())
            .unwrap();
        let v = realizable(&ctx, &x, 4).unwrap();
        assert_eq!(v.components.len(), 2);
        assert!(v.realizable());
        assert_eq!(v.constant_term(N), Some(&MuElement::one(N) + &ctx.cp_class(1).unwrap()));
    }

    #[test]
    fn precision_is_capped_by_coefficients() {
        let ctx = RingContext::new(3).unwrap();
        let p3 = ManifoldExpr::Proj(vec![vec![0], vec![1], vec![2], vec![3]]);
        let v = realizable(&ctx, &phi_omega(&ctx, &p3, 1).unwrap(), 5).unwrap();
        assert_eq!(v.precision(), 0);
        let p4 = ManifoldExpr::Proj(vec![vec![0], vec![1], vec![2], vec![3], vec![1]]);
        assert!(matches!(realizable(&ctx, &phi_omega(&ctx, &p4, 1).unwrap(), 5), Err(Error::Precision { .. })));
    }

    #[test]
    fn augmentation_examples() {
        let ctx = RingContext::new(N).unwrap();
        assert!(augmentation_check(&ctx, &ManifoldExpr::Point, 1, 5).unwrap());
        assert!(augmentation_check(&ctx, &ManifoldExpr::proj(&[&[0], &[1]]), 1, 5).unwrap());
        assert!(augmentation_check(&ctx, &ManifoldExpr::proj(&[&[0], &[0], &[1]]), 1, 5).unwrap());
        assert!(augmentation_check(&ctx, &ManifoldExpr::proj(&[&[0, 0], &[1, 0], &[0, 1]]), 2, 5).unwrap());
    }
}
