//! Borel cobordism of a torus, `MU^*[[C_1, ..., C_r]]`, truncated at a
//! total `C`-degree, together with Euler classes of characters and the
//! localization at Euler classes.
//!
//! Grading is homological: `C_i` has degree `-2` and `m_k` degree `2k`, so a
//! term `c · C^α` has degree `2·deg(c) - 2|α|`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_integer::Integer;

use crate::error::{Error, Result};
use crate::lazard::{compose, power, FormalSeries, MuElement, PowerSeries1, RingContext};

/// A nontrivial character `ρ_1^{μ_1} ⊗ ... ⊗ ρ_r^{μ_r}` of `(S^1)^r`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Weight(Vec<i64>);

impl Weight {
    pub fn new(mu: Vec<i64>) -> Result<Self> {
        if mu.is_empty() {
            return Err(Error::Malformed("weight of rank 0".into()));
        }
        if mu.iter().all(|&x| x == 0) {
            return Err(Error::TrivialCharacter);
        }
        Ok(Weight(mu))
    }

    pub fn entries(&self) -> &[i64] {
        &self.0
    }

    pub fn rank(&self) -> usize {
        self.0.len()
    }

    /// The conjugate character.
    pub fn dual(&self) -> Weight {
        Weight(self.0.iter().map(|x| -x).collect())
    }

    /// `(ℓ, k)` with `self = k·ℓ`, `ℓ` primitive and its first nonzero entry positive.
    pub fn primitive_line(&self) -> (Weight, i64) {
        let g = self.0.iter().fold(0i64, |acc, &x| acc.gcd(&x));
        let first = *self.0.iter().find(|&&x| x != 0).expect("weights are nonzero");
        let k = if first < 0 { -g } else { g };
        (Weight(self.0.iter().map(|x| x / k).collect()), k)
    }

    pub fn is_primitive_line(&self) -> bool {
        self.primitive_line().1 == 1
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", x)?;
        }
        write!(f, ")")
    }
}

impl FromStr for Weight {
    type Err = Error;

    /// Accepts `(1,-2)`, `[1,-2]` or `1,-2`.
    fn from_str(s: &str) -> Result<Self> {
        let inner = s.trim().trim_start_matches(['(', '[']).trim_end_matches([')', ']']);
        let mu = inner
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<i64>()
                    .map_err(|_| Error::Parse { pos: 0, msg: format!("bad weight entry {:?} in {:?}", t, s) })
            })
            .collect::<Result<Vec<_>>>()?;
        Weight::new(mu)
    }
}

/// Exponent vector over `C_1..C_r`.
pub type CMonomial = Vec<u32>;

fn c_degree(m: &[u32]) -> u32 {
    m.iter().sum()
}

/// `Σ c_α C^α` over `|α| <= trunc`, coefficients in `MU_*` truncated at `N`.
#[derive(Clone, Debug)]
pub struct BorelSeries {
    rank: usize,
    trunc: u32,
    n: u32,
    terms: BTreeMap<CMonomial, MuElement>,
}

impl PartialEq for BorelSeries {
    fn eq(&self, other: &Self) -> bool {
        self.rank == other.rank && self.terms == other.terms
    }
}

impl BorelSeries {
    pub fn zero(rank: usize, trunc: u32, n: u32) -> Self {
        BorelSeries { rank, trunc, n, terms: BTreeMap::new() }
    }

    pub fn constant(rank: usize, c: MuElement, trunc: u32) -> Self {
        let n = c.trunc();
        let mut s = Self::zero(rank, trunc, n);
        s.add_term(vec![0; rank], c);
        s
    }

    pub fn one(rank: usize, trunc: u32, n: u32) -> Self {
        Self::constant(rank, MuElement::one(n), trunc)
    }

    /// The coordinate `C_i` (`0 <= i < rank`).
    pub fn variable(rank: usize, i: usize, trunc: u32, n: u32) -> Self {
        let mut m = vec![0; rank];
        m[i] = 1;
        let mut s = Self::zero(rank, trunc, n);
        s.add_term(m, MuElement::one(n));
        s
    }

    pub fn from_terms<I>(rank: usize, trunc: u32, n: u32, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (CMonomial, MuElement)>,
    {
        let mut s = Self::zero(rank, trunc, n);
        for (m, c) in terms {
            if m.len() != rank {
                return Err(Error::RankMismatch(m.len(), rank));
            }
            s.add_term(m, c.with_trunc(n));
        }
        Ok(s)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn trunc(&self) -> u32 {
        self.trunc
    }

    pub fn coeff_trunc(&self) -> u32 {
        self.n
    }

    pub fn terms(&self) -> impl Iterator<Item = (&CMonomial, &MuElement)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, m: &[u32]) -> MuElement {
        self.terms.get(m).cloned().unwrap_or_else(|| MuElement::zero(self.n))
    }

    pub fn add_term(&mut self, m: CMonomial, c: MuElement) {
        if c.is_zero() || c_degree(&m) > self.trunc {
            return;
        }
        let s = match self.terms.remove(&m) {
            Some(old) => &old + &c,
            None => c,
        };
        if !s.is_zero() {
            self.terms.insert(m, s);
        }
    }

    /// Lower the truncation (never raises it).
    pub fn with_trunc(&self, trunc: u32) -> Self {
        let trunc = trunc.min(self.trunc);
        let terms =
            self.terms.iter().filter(|(m, _)| c_degree(m) <= trunc).map(|(m, c)| (m.clone(), c.clone())).collect();
        BorelSeries { rank: self.rank, trunc, n: self.n, terms }
    }

    /// Lowest `C`-degree carrying a nonzero term; `trunc + 1` for zero.
    pub fn valuation(&self) -> u32 {
        self.terms.keys().map(|m| c_degree(m)).min().unwrap_or(self.trunc + 1)
    }

    /// Homogeneous part of `C`-degree `t`.
    pub fn c_component(&self, t: u32) -> BTreeMap<CMonomial, MuElement> {
        self.terms.iter().filter(|(m, _)| c_degree(m) == t).map(|(m, c)| (m.clone(), c.clone())).collect()
    }

    /// Homological degrees `2·deg(c) - 2|α|` occurring, ascending.
    pub fn degrees(&self) -> Vec<i64> {
        let mut d: Vec<i64> = self
            .terms
            .iter()
            .flat_map(|(m, c)| {
                let t = c_degree(m) as i64;
                c.half_degrees().into_iter().map(move |k| 2 * k as i64 - 2 * t)
            })
            .collect();
        d.sort_unstable();
        d.dedup();
        d
    }

    pub fn homogeneous_degree(&self) -> Option<i64> {
        match self.degrees().as_slice() {
            [d] => Some(*d),
            _ => None,
        }
    }

    /// Product whose truncation uses the valuations of the factors:
    /// `min(t_a + v_b, t_b + v_a)`. Plain `mul` keeps `min(t_a, t_b)`.
    pub fn mul_with_valuation(&self, other: &Self) -> Self {
        let trunc = (self.trunc + other.valuation()).min(other.trunc + self.valuation());
        self.mul_into(other, trunc)
    }

    fn mul_into(&self, other: &Self, trunc: u32) -> Self {
        assert_eq!(self.rank, other.rank, "rank mismatch in series product");
        let n = self.n.min(other.n);
        let mut out = Self::zero(self.rank, trunc, n);
        for (ma, ca) in &self.terms {
            let da = c_degree(ma);
            for (mb, cb) in &other.terms {
                if da + c_degree(mb) > trunc {
                    continue;
                }
                let m = ma.iter().zip(mb).map(|(a, b)| a + b).collect();
                out.add_term(m, ca * cb);
            }
        }
        out
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check_rank(other)?;
        Ok(FormalSeries::add(self, other))
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.check_rank(other)?;
        Ok(FormalSeries::mul(self, other))
    }

    fn check_rank(&self, other: &Self) -> Result<()> {
        if self.rank != other.rank {
            return Err(Error::RankMismatch(self.rank, other.rank));
        }
        Ok(())
    }
}

impl FormalSeries for BorelSeries {
    fn zero_like(&self) -> Self {
        Self::zero(self.rank, self.trunc, self.n)
    }
    fn one_like(&self) -> Self {
        Self::one(self.rank, self.trunc, self.n)
    }
    fn add(&self, other: &Self) -> Self {
        assert_eq!(self.rank, other.rank, "rank mismatch in series sum");
        let mut out = self.with_trunc(self.trunc.min(other.trunc));
        out.n = self.n.min(other.n);
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
    fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&MuElement::from_int(-1, other.n)))
    }
    fn mul(&self, other: &Self) -> Self {
        self.mul_into(other, self.trunc.min(other.trunc))
    }
    fn scale(&self, c: &MuElement) -> Self {
        let mut out = Self::zero(self.rank, self.trunc, self.n.min(c.trunc()));
        for (m, a) in &self.terms {
            out.add_term(m.clone(), a * c);
        }
        out
    }
    fn constant_term(&self) -> MuElement {
        self.coefficient(&vec![0; self.rank])
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    fn truncation(&self) -> u32 {
        self.trunc
    }
}

fn fmt_c_monomial(f: &mut fmt::Formatter<'_>, m: &[u32]) -> fmt::Result {
    let mut first = true;
    for (i, &e) in m.iter().enumerate() {
        if e == 0 {
            continue;
        }
        if !first {
            write!(f, "*")?;
        }
        first = false;
        write!(f, "C{}", i + 1)?;
        if e > 1 {
            write!(f, "^{}", e)?;
        }
    }
    Ok(())
}

fn fmt_terms(f: &mut fmt::Formatter<'_>, terms: &mut dyn Iterator<Item = (&CMonomial, &MuElement)>) -> fmt::Result {
    let mut items: Vec<_> = terms.collect();
    items.sort_by(|a, b| c_degree(a.0).cmp(&c_degree(b.0)).then(b.0.cmp(a.0)));
    if items.is_empty() {
        return write!(f, "0");
    }
    for (i, (m, c)) in items.into_iter().enumerate() {
        if i > 0 {
            write!(f, " + ")?;
        }
        let is_const = c_degree(m) == 0;
        match c.as_rational() {
            Some(_) if is_const => write!(f, "{}", c)?,
            Some(_) if c.is_one() => {}
            Some(_) => write!(f, "{}*", c)?,
            None if is_const => write!(f, "({})", c)?,
            None => write!(f, "({})*", c)?,
        }
        fmt_c_monomial(f, m)?;
    }
    Ok(())
}

impl fmt::Display for BorelSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_terms(f, &mut self.terms.iter())?;
        write!(f, " + O(C^{})", self.trunc + 1)
    }
}

/// `e(V) = [μ_1]_F(C_1) +_F ... +_F [μ_r]_F(C_r)`, truncated at `C`-degree `trunc`.
pub fn euler_class(ctx: &RingContext, w: &Weight, trunc: u32) -> Result<BorelSeries> {
    let rank = w.rank();
    let n = ctx.n();
    let mut acc = BorelSeries::zero(rank, trunc, n);
    for (i, &mu) in w.entries().iter().enumerate() {
        if mu == 0 {
            continue;
        }
        let ci = BorelSeries::variable(rank, i, trunc, n);
        let term = compose(&ctx.n_series_1(mu), &ci)?;
        acc = if acc.is_zero() { term } else { ctx.fgl_add(&acc, &term)? };
    }
    debug_assert!(acc.homogeneous_degree().is_none_or(|d| d == -2));
    Ok(acc)
}

/// `y / [k]_F(y)`: the unit relating `e(kℓ)^{-1}` to `e(ℓ)^{-1}`.
pub fn line_unit_inverse(ctx: &RingContext, k: i64) -> Result<PowerSeries1> {
    if k == 0 {
        return Err(Error::TrivialCharacter);
    }
    ctx.n_series_1(k).shift_down()?.inverse()
}

/// Euler classes of primitive lines, computed once per truncation.
#[derive(Debug, Default)]
pub struct EulerCache {
    cache: BTreeMap<(Weight, u32), BorelSeries>,
}

impl EulerCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&mut self, ctx: &RingContext, w: &Weight, trunc: u32) -> Result<BorelSeries> {
        if let Some(s) = self.cache.get(&(w.clone(), trunc)) {
            return Ok(s.clone());
        }
        let s = euler_class(ctx, w, trunc)?;
        self.cache.insert((w.clone(), trunc), s.clone());
        Ok(s)
    }

    /// `Π e(ℓ)^k` over a denominator.
    pub fn product(
        &mut self,
        ctx: &RingContext,
        den: &BTreeMap<Weight, u32>,
        rank: usize,
        trunc: u32,
    ) -> Result<BorelSeries> {
        let mut acc = BorelSeries::one(rank, trunc, ctx.n());
        for (w, &k) in den {
            let e = self.get(ctx, w, trunc)?;
            acc = FormalSeries::mul(&acc, &power(&e, k));
        }
        Ok(acc)
    }
}

/// `num / Π e(ℓ)^k`, an element of `S^{-1} MU^*[[C]]` with denominators
/// normalized to primitive lines.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalizedBorel {
    num: BorelSeries,
    den: BTreeMap<Weight, u32>,
}

impl LocalizedBorel {
    pub fn from_series(s: BorelSeries) -> Self {
        LocalizedBorel { num: s, den: BTreeMap::new() }
    }

    /// Build from a numerator and a denominator already on primitive lines.
    pub fn from_parts(num: BorelSeries, den: BTreeMap<Weight, u32>) -> Result<Self> {
        for w in den.keys() {
            if !w.is_primitive_line() {
                return Err(Error::Precondition(format!("denominator weight {} is not a primitive line", w)));
            }
            if w.rank() != num.rank() {
                return Err(Error::RankMismatch(w.rank(), num.rank()));
            }
        }
        let den = den.into_iter().filter(|(_, k)| *k > 0).collect();
        Ok(LocalizedBorel { num, den })
    }

    pub fn numerator(&self) -> &BorelSeries {
        &self.num
    }

    pub fn denominator(&self) -> &BTreeMap<Weight, u32> {
        &self.den
    }

    pub fn rank(&self) -> usize {
        self.num.rank()
    }

    /// Each Euler class has a simple zero, so the pole order is the total exponent.
    pub fn pole_order(&self) -> u32 {
        self.den.values().sum()
    }

    /// `C`-degree through which the fraction is determined.
    pub fn precision(&self) -> i64 {
        self.num.trunc() as i64 - self.pole_order() as i64
    }

    /// Homological degree, if homogeneous (`e` contributes `-2` per factor).
    pub fn homogeneous_degree(&self) -> Option<i64> {
        self.num.homogeneous_degree().map(|d| d + 2 * self.pole_order() as i64)
    }

    pub fn scale(&self, c: &MuElement) -> Self {
        LocalizedBorel { num: self.num.scale(c), den: self.den.clone() }
    }

    pub fn neg(&self) -> Self {
        LocalizedBorel { num: self.num.neg(), den: self.den.clone() }
    }

    /// Rewrite over a larger denominator; the numerator gains exactly the
    /// extra pole order in truncation, so precision is unchanged.
    fn lift_to(
        &self,
        ctx: &RingContext,
        cache: &mut EulerCache,
        den: &BTreeMap<Weight, u32>,
    ) -> Result<LocalizedBorel> {
        let mut extra = BTreeMap::new();
        for (w, &k) in den {
            let have = self.den.get(w).copied().unwrap_or(0);
            if have < k {
                extra.insert(w.clone(), k - have);
            }
        }
        if extra.is_empty() {
            return Ok(self.clone());
        }
        let gain: u32 = extra.values().sum();
        let factor = cache.product(ctx, &extra, self.rank(), self.num.trunc() + gain)?;
        Ok(LocalizedBorel { num: self.num.mul_with_valuation(&factor), den: den.clone() })
    }

    pub fn add(&self, ctx: &RingContext, other: &Self) -> Result<Self> {
        if self.rank() != other.rank() {
            return Err(Error::RankMismatch(self.rank(), other.rank()));
        }
        let mut cache = EulerCache::new();
        let mut den = self.den.clone();
        for (w, &k) in &other.den {
            let e = den.entry(w.clone()).or_insert(0);
            *e = (*e).max(k);
        }
        let a = self.lift_to(ctx, &mut cache, &den)?;
        let b = other.lift_to(ctx, &mut cache, &den)?;
        Ok(LocalizedBorel { num: FormalSeries::add(&a.num, &b.num), den })
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.rank() != other.rank() {
            return Err(Error::RankMismatch(self.rank(), other.rank()));
        }
        let mut den = self.den.clone();
        for (w, &k) in &other.den {
            *den.entry(w.clone()).or_insert(0) += k;
        }
        Ok(LocalizedBorel { num: self.num.mul_with_valuation(&other.num), den })
    }
}

impl fmt::Display for LocalizedBorel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_empty() {
            return write!(f, "{}", self.num);
        }
        write!(f, "(")?;
        fmt_terms(f, &mut self.num.terms())?;
        write!(f, ") / (")?;
        for (i, (w, k)) in self.den.iter().enumerate() {
            if i > 0 {
                write!(f, "*")?;
            }
            write!(f, "e{}", w)?;
            if *k > 1 {
                write!(f, "^{}", k)?;
            }
        }
        write!(f, ") + O(C^{})", self.precision() + 1)
    }
}

/// `n / Π e(w)^k` for arbitrary nonzero weights.
pub fn loc_divide(ctx: &RingContext, num: &BorelSeries, den: &[(Weight, u32)]) -> Result<LocalizedBorel> {
    let mut out_num = num.clone();
    let mut out_den: BTreeMap<Weight, u32> = BTreeMap::new();
    let mut cache = EulerCache::new();
    for (w, k) in den {
        if w.rank() != num.rank() {
            return Err(Error::RankMismatch(w.rank(), num.rank()));
        }
        if *k == 0 {
            continue;
        }
        let (line, mult) = w.primitive_line();
        if mult != 1 {
            let e = cache.get(ctx, &line, num.trunc())?;
            let unit = compose(&line_unit_inverse(ctx, mult)?, &e)?;
            out_num = FormalSeries::mul(&out_num, &power(&unit, *k));
        }
        *out_den.entry(line).or_insert(0) += k;
    }
    Ok(LocalizedBorel { num: out_num, den: out_den })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ObstructionKind {
    /// The fraction has a genuine pole: a numerator term below the pole order.
    Pole,
    /// The degree-`t` residual is not divisible by the leading form of the denominator.
    NotDivisible,
    /// The unique rational quotient has a coefficient outside the Lazard lattice.
    NonIntegral,
}

impl fmt::Display for ObstructionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ObstructionKind::Pole => "pole",
            ObstructionKind::NotDivisible => "not-divisible",
            ObstructionKind::NonIntegral => "non-integral",
        })
    }
}

/// Why a localized class is not in the image of `MU^*[[C]]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Obstruction {
    pub kind: ObstructionKind,
    /// `C`-degree of the quotient at which the obstruction appears.
    pub degree: u32,
    pub monomial: CMonomial,
    pub coefficient: MuElement,
    /// The quotient as far as it could be computed.
    pub partial: BorelSeries,
}

impl Obstruction {
    /// Re-derive the obstruction from `x` and the partial quotient, without
    /// the incremental solver.
    pub fn recheck(&self, ctx: &RingContext, x: &LocalizedBorel) -> Result<bool> {
        let p = x.pole_order();
        let mut cache = EulerCache::new();
        let e = cache.product(ctx, &x.den, x.rank(), x.num.trunc())?;
        let residual = x.num.sub(&FormalSeries::mul(&self.partial, &e));
        let lead = leading_forms(&x.den);
        Ok(match self.kind {
            ObstructionKind::Pole => {
                (0..p).any(|s| residual.c_component(s).get(&self.monomial) == Some(&self.coefficient))
            }
            ObstructionKind::NotDivisible => {
                let below_clean = (0..self.degree + p).all(|s| residual.c_component(s).is_empty());
                let h = residual.c_component(self.degree + p);
                let (_, rem) = divide_by_forms(&h, &lead);
                below_clean && !rem.is_empty()
            }
            ObstructionKind::NonIntegral => {
                let clean = (0..=self.degree + p).all(|s| residual.c_component(s).is_empty());
                clean
                    && self.partial.coefficient(&self.monomial) == self.coefficient
                    && !ctx.is_integral(&self.coefficient)
            }
        })
    }
}

impl fmt::Display for Obstruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at C-degree {}: ", self.kind, self.degree)?;
        let mono: BTreeMap<CMonomial, MuElement> = BTreeMap::from([(self.monomial.clone(), self.coefficient.clone())]);
        fmt_terms(f, &mut mono.iter())
    }
}

/// Outcome of the membership test in the image of `MU^*[[C]]`.
#[derive(Clone, Debug, PartialEq)]
pub enum Integralization {
    /// The quotient exists with lattice-valued coefficients through `precision`.
    Integral {
        series: BorelSeries,
        precision: i64,
    },
    Obstructed(Obstruction),
}

impl Integralization {
    pub fn is_integral(&self) -> bool {
        matches!(self, Integralization::Integral { .. })
    }

    pub fn series(&self) -> Option<&BorelSeries> {
        match self {
            Integralization::Integral { series, .. } => Some(series),
            Integralization::Obstructed(_) => None,
        }
    }
}

fn leading_forms(den: &BTreeMap<Weight, u32>) -> Vec<Weight> {
    den.iter().flat_map(|(w, &k)| std::iter::repeat_n(w.clone(), k as usize)).collect()
}

/// Divide a homogeneous polynomial by the linear form `Σ ℓ_i C_i`.
/// Returns `(quotient, remainder)`; the remainder is free of the chosen
/// main variable.
fn divide_by_linear(
    h: &BTreeMap<CMonomial, MuElement>,
    l: &Weight,
) -> (BTreeMap<CMonomial, MuElement>, BTreeMap<CMonomial, MuElement>) {
    let j = l.entries().iter().rposition(|&x| x != 0).expect("nonzero form");
    let lead = num_rational::BigRational::from_integer(l.entries()[j].into());
    let mut rem = h.clone();
    let mut quot: BTreeMap<CMonomial, MuElement> = BTreeMap::new();
    while let Some(m) = rem
        .iter()
        .filter(|(m, _)| m[j] > 0)
        .max_by(|a, b| a.0[j].cmp(&b.0[j]).then(a.0.cmp(b.0)))
        .map(|(m, _)| m.clone())
    {
        let c = rem.remove(&m).expect("present");
        let q = c.scale(&(num_rational::BigRational::from_integer(1.into()) / &lead));
        let mut qm = m.clone();
        qm[j] -= 1;
        for (i, &li) in l.entries().iter().enumerate() {
            if li == 0 || i == j {
                continue;
            }
            let mut t = qm.clone();
            t[i] += 1;
            let sub = q.scale_int(-li);
            let s = match rem.remove(&t) {
                Some(old) => &old + &sub,
                None => sub,
            };
            if !s.is_zero() {
                rem.insert(t, s);
            }
        }
        let s = match quot.remove(&qm) {
            Some(old) => &old + &q,
            None => q,
        };
        if !s.is_zero() {
            quot.insert(qm, s);
        }
    }
    (quot, rem)
}

/// Divide by a product of linear forms; the remainder is the first nonzero
/// remainder met (empty on success).
fn divide_by_forms(
    h: &BTreeMap<CMonomial, MuElement>,
    forms: &[Weight],
) -> (BTreeMap<CMonomial, MuElement>, BTreeMap<CMonomial, MuElement>) {
    let mut cur = h.clone();
    for l in forms {
        let (q, r) = divide_by_linear(&cur, l);
        if !r.is_empty() {
            return (q, r);
        }
        cur = q;
    }
    (cur, BTreeMap::new())
}

/// Decide whether `x = num / Π e(ℓ)^k` lies in `MU^*[[C]]` with integral
/// coefficients, through the fraction's precision.
///
/// The quotient `g` is solved for one total `C`-degree at a time: the
/// degree-`t` part of `g` times the leading form of the denominator must
/// equal the current residual in degree `t + P`. Since the ring is a domain
/// the solution is unique when it exists.
pub fn try_integralize(ctx: &RingContext, x: &LocalizedBorel) -> Result<Integralization> {
    let p = x.pole_order();
    let prec = x.precision();
    if prec < 0 {
        return Err(Error::Precision {
            message: format!("pole order {} exceeds numerator truncation {}", p, x.num.trunc()),
            needed: format!("D >= {}", p),
        });
    }
    let prec = prec as u32;
    let rank = x.rank();
    let mut cache = EulerCache::new();
    let e = cache.product(ctx, &x.den, rank, x.num.trunc())?;
    let lead = leading_forms(&x.den);
    let mut residual = x.num.clone();
    let mut g = BorelSeries::zero(rank, prec, x.num.coeff_trunc());

    for s in 0..p {
        let comp = residual.c_component(s);
        if let Some((m, c)) = comp.into_iter().next() {
            return Ok(Integralization::Obstructed(Obstruction {
                kind: ObstructionKind::Pole,
                degree: 0,
                monomial: m,
                coefficient: c,
                partial: g,
            }));
        }
    }
    for t in 0..=prec {
        let h = residual.c_component(t + p);
        let (q, rem) = divide_by_forms(&h, &lead);
        if let Some((m, c)) = rem.into_iter().next() {
            return Ok(Integralization::Obstructed(Obstruction {
                kind: ObstructionKind::NotDivisible,
                degree: t,
                monomial: m,
                coefficient: c,
                partial: g,
            }));
        }
        let q_series = BorelSeries::from_terms(rank, x.num.trunc(), x.num.coeff_trunc(), q.clone())?;
        residual = residual.sub(&FormalSeries::mul(&q_series, &e));
        for (m, c) in q {
            g.add_term(m, c);
        }
        if let Some((m, c)) = g.c_component(t).into_iter().find(|(_, c)| !ctx.is_integral(c)) {
            return Ok(Integralization::Obstructed(Obstruction {
                kind: ObstructionKind::NonIntegral,
                degree: t,
                monomial: m,
                coefficient: c,
                partial: g,
            }));
        }
    }
    Ok(Integralization::Integral { series: g, precision: prec as i64 })
}

/// `π_*` over `CP^n`: `Σ_{k=0}^{n} f_k · [CP^{n-k}]`, where `f_k` is the
/// coefficient of `x^k` and `x` is the Euler class of the hyperplane bundle.
pub fn cp_pushforward<S: FormalSeries>(ctx: &RingContext, coeffs: &[S], n: u32) -> Result<S> {
    if coeffs.len() <= n as usize {
        return Err(Error::Truncation(format!(
            "pushforward over CP^{} needs x-coefficients through x^{}, have {}",
            n,
            n,
            coeffs.len()
        )));
    }
    let mut acc = coeffs[0].zero_like();
    for (k, f) in coeffs.iter().enumerate().take(n as usize + 1) {
        acc = acc.add(&f.scale(&ctx.cp_class(n - k as u32)?));
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(v: &[i64]) -> Weight {
        Weight::new(v.to_vec()).unwrap()
    }

    #[test]
    fn weights() {
        assert!(matches!(Weight::new(vec![0, 0]), Err(Error::TrivialCharacter)));
        assert_eq!(w(&[1, -2]).dual(), w(&[-1, 2]));
        assert_eq!(w(&[-4, 6]).primitive_line(), (w(&[2, -3]), -2));
        assert_eq!(w(&[0, -3]).primitive_line(), (w(&[0, 1]), -3));
        assert_eq!("(1,-2)".parse::<Weight>().unwrap(), w(&[1, -2]));
        assert_eq!(w(&[1, -2]).to_string(), "(1,-2)");
        assert!("(0)".parse::<Weight>().is_err());
    }

    #[test]
    fn euler_rank_one() {
        let ctx = RingContext::new(4).unwrap();
        let c = BorelSeries::variable(1, 0, 4, 4);
        assert_eq!(euler_class(&ctx, &w(&[1]), 4).unwrap(), c);
        let e2 = euler_class(&ctx, &w(&[2]), 2).unwrap();
        let m1 = MuElement::generator(1, 4);
        let expect =
            BorelSeries::from_terms(1, 2, 4, [(vec![1], MuElement::from_int(2, 4)), (vec![2], m1.scale_int(-2))])
                .unwrap();
        assert_eq!(e2, expect);
        assert_eq!(e2.homogeneous_degree(), Some(-2));
    }

    #[test]
    fn euler_linear_part() {
        let ctx = RingContext::new(3).unwrap();
        let e = euler_class(&ctx, &w(&[2, -3]), 3).unwrap();
        assert_eq!(e.coefficient(&[1, 0]), MuElement::from_int(2, 3));
        assert_eq!(e.coefficient(&[0, 1]), MuElement::from_int(-3, 3));
        assert_eq!(e.homogeneous_degree(), Some(-2));
    }

    #[test]
    fn series_arith_basics() {
        let ctx = RingContext::new(3).unwrap();
        let e = euler_class(&ctx, &w(&[1, 1]), 4).unwrap();
        let zero = e.zero_like();
        assert_eq!(FormalSeries::add(&e, &zero), e);
        assert_eq!(FormalSeries::mul(&e, &e.one_like()), e);
        let f = euler_class(&ctx, &w(&[2, -1]), 4).unwrap();
        let g = euler_class(&ctx, &w(&[0, 3]), 4).unwrap();
        let lhs = FormalSeries::mul(&FormalSeries::add(&e, &f), &g);
        let rhs = FormalSeries::add(&FormalSeries::mul(&e, &g), &FormalSeries::mul(&f, &g));
        assert_eq!(lhs, rhs);
        let other_rank = BorelSeries::one(1, 4, 3);
        assert!(matches!(e.checked_add(&other_rank), Err(Error::RankMismatch(2, 1))));
    }

    #[test]
    fn inverse_pair_has_no_pole() {
        // 1/C + 1/[-1](C) = 2 m_1 + O(C)
        let ctx = RingContext::new(4).unwrap();
        let d = 4;
        let one = BorelSeries::one(1, d, 4);
        let a = loc_divide(&ctx, &one, &[(w(&[1]), 1)]).unwrap();
        let b = loc_divide(&ctx, &one, &[(w(&[-1]), 1)]).unwrap();
        let sum = a.add(&ctx, &b).unwrap();
        assert_eq!(sum.precision(), d as i64 - 1);
        match try_integralize(&ctx, &sum).unwrap() {
            Integralization::Integral { series, .. } => {
                assert_eq!(series.constant_term(), ctx.cp_class(1).unwrap());
            }
            other => panic!("expected integral, got {:?}", other),
        }
        assert_eq!(a.add(&ctx, &LocalizedBorel::from_series(one.zero_like())).unwrap(), a);
    }

    #[test]
    fn genuine_pole() {
        let ctx = RingContext::new(3).unwrap();
        let one = BorelSeries::one(1, 3, 3);
        let x = loc_divide(&ctx, &one, &[(w(&[1]), 1)]).unwrap();
        match try_integralize(&ctx, &x).unwrap() {
            Integralization::Obstructed(o) => {
                assert_eq!(o.kind, ObstructionKind::Pole);
                assert_eq!(o.degree, 0);
                assert!(o.recheck(&ctx, &x).unwrap());
            }
            other => panic!("expected obstruction, got {:?}", other),
        }
    }

    #[test]
    fn exact_cancellation() {
        let ctx = RingContext::new(3).unwrap();
        let e = euler_class(&ctx, &w(&[1, 2]), 5).unwrap();
        let x = loc_divide(&ctx, &e, &[(w(&[1, 2]), 1)]).unwrap();
        let r = try_integralize(&ctx, &x).unwrap();
        assert!(r.series().unwrap().constant_term().is_one());
        let sq = FormalSeries::mul(&e, &e);
        let x = loc_divide(&ctx, &sq, &[(w(&[1, 2]), 1)]).unwrap();
        let r = try_integralize(&ctx, &x).unwrap();
        assert_eq!(r.series().unwrap(), &e.with_trunc(4));
    }

    #[test]
    fn non_divisible_in_rank_two() {
        // C_1 / e(0,1) has no pole in C-degree 0 but is not a power series.
        let ctx = RingContext::new(3).unwrap();
        let c1 = BorelSeries::variable(2, 0, 4, 3);
        let x = loc_divide(&ctx, &c1, &[(w(&[0, 1]), 1)]).unwrap();
        match try_integralize(&ctx, &x).unwrap() {
            Integralization::Obstructed(o) => {
                assert_eq!(o.kind, ObstructionKind::NotDivisible);
                assert_eq!(o.degree, 0);
                assert!(o.recheck(&ctx, &x).unwrap());
            }
            other => panic!("expected obstruction, got {:?}", other),
        }
    }

    #[test]
    fn non_integral_quotient() {
        let ctx = RingContext::new(3).unwrap();
        let c = BorelSeries::variable(1, 0, 4, 3);
        let x = LocalizedBorel::from_series(c.scale(&MuElement::generator(1, 3)));
        match try_integralize(&ctx, &x).unwrap() {
            Integralization::Obstructed(o) => {
                assert_eq!(o.kind, ObstructionKind::NonIntegral);
                assert_eq!(o.degree, 1);
                assert!(o.recheck(&ctx, &x).unwrap());
            }
            other => panic!("expected obstruction, got {:?}", other),
        }
    }

    #[test]
    fn precision_exhaustion_is_an_error() {
        let ctx = RingContext::new(3).unwrap();
        let one = BorelSeries::one(1, 1, 3);
        let x = loc_divide(&ctx, &one, &[(w(&[1]), 2)]).unwrap();
        assert_eq!(x.precision(), -1);
        assert!(matches!(try_integralize(&ctx, &x), Err(Error::Precision { .. })));
    }

    #[test]
    fn pushforward_conventions() {
        let ctx = RingContext::new(4).unwrap();
        let one = BorelSeries::one(1, 3, 4);
        let zero = one.zero_like();
        // π_*(1) over CP^1
        assert_eq!(
            cp_pushforward(&ctx, &[one.clone(), zero.clone()], 1).unwrap().constant_term(),
            ctx.cp_class(1).unwrap()
        );
        // π_*(x^n) over CP^n is a point
        let top = cp_pushforward(&ctx, &[zero.clone(), zero.clone(), one.clone()], 2).unwrap();
        assert!(top.constant_term().is_one());
        // x^{n+1} does not contribute
        let over = cp_pushforward(&ctx, &[zero.clone(), zero.clone(), one.clone()], 1).unwrap();
        assert!(over.is_zero());
        assert!(cp_pushforward(&ctx, &[one], 1).is_err());
    }
}
