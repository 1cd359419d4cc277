//! Graded elements of `MU_* ⊗ Q = Q[m_1, m_2, ...]`, where `m_n` is the
//! logarithm coefficient of the universal formal group law (so that
//! `[CP^n] = (n+1) m_n`).
//!
//! Every element carries the half-degree bound `N` of the ring it lives in;
//! products drop monomials above that bound, which is the quotient by the
//! ideal of elements of half-degree `> N`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Exponent vector of a monomial in `m_1, m_2, ...`; trailing zeros are trimmed.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct MuMonomial(Vec<u32>);

impl MuMonomial {
    pub fn one() -> Self {
        MuMonomial(Vec::new())
    }

    pub fn new(mut exps: Vec<u32>) -> Self {
        while exps.last() == Some(&0) {
            exps.pop();
        }
        MuMonomial(exps)
    }

    /// The single generator `m_i` (`i >= 1`).
    pub fn generator(i: usize) -> Self {
        assert!(i >= 1, "generators are indexed from 1");
        let mut v = vec![0; i];
        v[i - 1] = 1;
        MuMonomial(v)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    /// Exponent of `m_i`.
    pub fn exponent(&self, i: usize) -> u32 {
        self.0.get(i - 1).copied().unwrap_or(0)
    }

    pub fn half_degree(&self) -> u32 {
        self.0.iter().enumerate().map(|(i, e)| (i as u32 + 1) * e).sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn mul(&self, other: &MuMonomial) -> MuMonomial {
        let len = self.0.len().max(other.0.len());
        let v = (0..len).map(|i| self.0.get(i).copied().unwrap_or(0) + other.0.get(i).copied().unwrap_or(0)).collect();
        MuMonomial::new(v)
    }

    /// All monomials of half-degree exactly `k`, one per partition of `k`,
    /// in a fixed (lexicographic) order.
    pub fn of_half_degree(k: u32) -> Vec<MuMonomial> {
        fn rec(rem: u32, max_part: u32, acc: &mut Vec<u32>, out: &mut Vec<MuMonomial>) {
            if rem == 0 {
                out.push(MuMonomial::new(acc.clone()));
                return;
            }
            for part in (1..=max_part.min(rem)).rev() {
                if acc.len() < part as usize {
                    acc.resize(part as usize, 0);
                }
                acc[part as usize - 1] += 1;
                rec(rem - part, part, acc, out);
                acc[part as usize - 1] -= 1;
            }
        }
        let mut out = Vec::new();
        rec(k, k, &mut Vec::new(), &mut out);
        out.sort();
        out
    }
}

impl fmt::Display for MuMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_monomial(f, &self.0, &mischenko_name)
    }
}

pub(crate) fn mischenko_name(i: usize) -> String {
    format!("m{}", i)
}

pub(crate) fn fmt_monomial(f: &mut fmt::Formatter<'_>, exps: &[u32], name: &dyn Fn(usize) -> String) -> fmt::Result {
    let mut first = true;
    for (i, &e) in exps.iter().enumerate() {
        if e == 0 {
            continue;
        }
        if !first {
            write!(f, "*")?;
        }
        first = false;
        write!(f, "{}", name(i + 1))?;
        if e > 1 {
            write!(f, "^{}", e)?;
        }
    }
    if first {
        write!(f, "1")?;
    }
    Ok(())
}

/// A (possibly inhomogeneous) element of `Q[m_1, ..., m_N]` modulo half-degree `> N`.
#[derive(Clone, Debug)]
pub struct MuElement {
    terms: BTreeMap<MuMonomial, BigRational>,
    trunc: u32,
}

impl PartialEq for MuElement {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms
    }
}

impl Eq for MuElement {}

impl MuElement {
    pub fn zero(trunc: u32) -> Self {
        MuElement { terms: BTreeMap::new(), trunc }
    }

    pub fn one(trunc: u32) -> Self {
        Self::from_rational(BigRational::one(), trunc)
    }

    pub fn from_int(n: i64, trunc: u32) -> Self {
        Self::from_rational(BigRational::from_integer(BigInt::from(n)), trunc)
    }

    pub fn from_rational(q: BigRational, trunc: u32) -> Self {
        let mut e = Self::zero(trunc);
        e.add_term(MuMonomial::one(), q);
        e
    }

    /// The generator `m_i`; zero when `i` exceeds the truncation.
    pub fn generator(i: usize, trunc: u32) -> Self {
        let mut e = Self::zero(trunc);
        e.add_term(MuMonomial::generator(i), BigRational::one());
        e
    }

    pub fn from_terms<I>(terms: I, trunc: u32) -> Self
    where
        I: IntoIterator<Item = (MuMonomial, BigRational)>,
    {
        let mut e = Self::zero(trunc);
        for (m, c) in terms {
            e.add_term(m, c);
        }
        e
    }

    pub fn trunc(&self) -> u32 {
        self.trunc
    }

    /// Same value viewed in a ring with a different bound; terms above it are dropped.
    pub fn with_trunc(&self, trunc: u32) -> Self {
        let terms =
            self.terms.iter().filter(|(m, _)| m.half_degree() <= trunc).map(|(m, c)| (m.clone(), c.clone())).collect();
        MuElement { terms, trunc }
    }

    pub fn add_term(&mut self, m: MuMonomial, c: BigRational) {
        if c.is_zero() || m.half_degree() > self.trunc {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = o.get() + c;
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MuMonomial, &BigRational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &MuMonomial) -> BigRational {
        self.terms.get(m).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// The rational number this element equals, if it lies in half-degree 0.
    pub fn as_rational(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => self.terms.get(&MuMonomial::one()).cloned(),
            _ => None,
        }
    }

    pub fn is_one(&self) -> bool {
        self.as_rational().is_some_and(|q| q.is_one())
    }

    pub fn scale(&self, q: &BigRational) -> Self {
        if q.is_zero() {
            return Self::zero(self.trunc);
        }
        MuElement { terms: self.terms.iter().map(|(m, c)| (m.clone(), c * q)).collect(), trunc: self.trunc }
    }

    pub fn scale_int(&self, n: i64) -> Self {
        self.scale(&BigRational::from_integer(BigInt::from(n)))
    }

    /// Half-degrees present, ascending.
    pub fn half_degrees(&self) -> Vec<u32> {
        let mut d: Vec<u32> = self.terms.keys().map(|m| m.half_degree()).collect();
        d.sort_unstable();
        d.dedup();
        d
    }

    /// `Some(k)` if every monomial has half-degree `k`; `None` for zero or mixed.
    pub fn homogeneous_degree(&self) -> Option<u32> {
        match self.half_degrees().as_slice() {
            [k] => Some(*k),
            _ => None,
        }
    }

    pub fn component(&self, k: u32) -> Self {
        MuElement {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.half_degree() == k)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
            trunc: self.trunc,
        }
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one(self.trunc);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Least common multiple of the coefficient denominators.
    pub fn denominator_lcm(&self) -> BigInt {
        use num_integer::Integer;
        self.terms.values().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()))
    }

    /// Render with a custom name for the `i`-th polynomial generator.
    pub fn render_with(&self, name: &dyn Fn(usize) -> String) -> String {
        struct R<'a>(&'a MuElement, &'a dyn Fn(usize) -> String);
        impl fmt::Display for R<'_> {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                self.0.fmt_with(f, self.1)
            }
        }
        R(self, name).to_string()
    }

    fn fmt_with(&self, f: &mut fmt::Formatter<'_>, name: &dyn Fn(usize) -> String) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        // Low degree first; within a degree, higher powers of m_1 first.
        let mut items: Vec<_> = self.terms.iter().collect();
        items.sort_by(|a, b| a.0.half_degree().cmp(&b.0.half_degree()).then(b.0.cmp(a.0)));
        for (i, (m, c)) in items.into_iter().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            if m.is_one() {
                write!(f, "{}", abs)?;
            } else {
                if !abs.is_one() {
                    write!(f, "{}*", abs)?;
                }
                fmt_monomial(f, m.exponents(), name)?;
            }
        }
        Ok(())
    }
}

impl fmt::Display for MuElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_with(f, &mischenko_name)
    }
}

impl Add for &MuElement {
    type Output = MuElement;
    fn add(self, rhs: &MuElement) -> MuElement {
        let trunc = self.trunc.min(rhs.trunc);
        let mut out = if trunc == self.trunc { self.clone() } else { self.with_trunc(trunc) };
        out.trunc = trunc;
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Sub for &MuElement {
    type Output = MuElement;
    fn sub(self, rhs: &MuElement) -> MuElement {
        self + &(-rhs)
    }
}

impl Neg for &MuElement {
    type Output = MuElement;
    fn neg(self) -> MuElement {
        MuElement { terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(), trunc: self.trunc }
    }
}

impl Mul for &MuElement {
    type Output = MuElement;
    fn mul(self, rhs: &MuElement) -> MuElement {
        let trunc = self.trunc.min(rhs.trunc);
        let mut out = MuElement::zero(trunc);
        for (ma, ca) in &self.terms {
            let da = ma.half_degree();
            for (mb, cb) in &rhs.terms {
                if da + mb.half_degree() > trunc {
                    continue;
                }
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for MuElement {
            type Output = MuElement;
            fn $m(self, rhs: MuElement) -> MuElement {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for MuElement {
    type Output = MuElement;
    fn neg(self) -> MuElement {
        -&self
    }
}
