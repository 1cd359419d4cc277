//! The fixed-point ring `MU_*[e_V, e_V^{-1}, Y_{V,d}]` for a torus.
//!
//! `e_V` has degree `-2` and `Y_{V,d}` (`d >= 2`) degree `2d`. A generator
//! `Y_{V,k+1}` is `X_k ⊗ e_V^{-1}`, where `X_k` is the `k`-th polynomial
//! generator of the `V`-th copy of `MU_*(BU)`.

use std::collections::BTreeMap;
use std::fmt;

use crate::borel::Weight;
use crate::error::{Error, Result};
use crate::lazard::MuElement;

/// `Π e_V^{a_V} · Π Y_{V,d}^{k}`; exponents of `e_V` may be negative.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FixedMonomial {
    e: BTreeMap<Weight, i32>,
    y: BTreeMap<(Weight, u32), u32>,
}

impl FixedMonomial {
    pub fn one() -> Self {
        Self::default()
    }

    pub fn euler(w: Weight, k: i32) -> Self {
        let mut m = Self::one();
        if k != 0 {
            m.e.insert(w, k);
        }
        m
    }

    pub fn y(w: Weight, d: u32, k: u32) -> Result<Self> {
        if d < 2 {
            return Err(Error::Malformed(format!("Y_{{{},{}}}: levels start at 2 (level 1 is e_V^{{-1}})", w, d)));
        }
        let mut m = Self::one();
        if k > 0 {
            m.y.insert((w, d), k);
        }
        Ok(m)
    }

    pub fn e_exponents(&self) -> &BTreeMap<Weight, i32> {
        &self.e
    }

    pub fn y_exponents(&self) -> &BTreeMap<(Weight, u32), u32> {
        &self.y
    }

    pub fn is_one(&self) -> bool {
        self.e.is_empty() && self.y.is_empty()
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (w, k) in &other.e {
            let v = out.e.entry(w.clone()).or_insert(0);
            *v += k;
            if *v == 0 {
                out.e.remove(w);
            }
        }
        for (key, k) in &other.y {
            *out.y.entry(key.clone()).or_insert(0) += k;
        }
        out
    }

    /// Homological degree: `-2` per `e_V`, `2d` per `Y_{V,d}`.
    pub fn degree(&self) -> i64 {
        let e: i64 = self.e.values().map(|&k| -2 * k as i64).sum();
        let y: i64 = self.y.iter().map(|((_, d), &k)| 2 * (*d as i64) * k as i64).sum();
        e + y
    }

    pub fn in_cone(&self) -> bool {
        self.e.values().all(|&k| k <= 0)
    }

    /// All weights that occur, ascending.
    pub fn weights(&self) -> Vec<Weight> {
        let mut ws: Vec<Weight> = self.e.keys().cloned().chain(self.y.keys().map(|(w, _)| w.clone())).collect();
        ws.sort();
        ws.dedup();
        ws
    }
}

impl fmt::Display for FixedMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (w, k) in &self.e {
            parts.push(if *k == 1 { format!("e_{{{}}}", w) } else { format!("e_{{{}}}^{{{}}}", w, k) });
        }
        for ((w, d), k) in &self.y {
            parts.push(if *k == 1 { format!("Y_{{{},{}}}", w, d) } else { format!("Y_{{{},{}}}^{}", w, d, k) });
        }
        if parts.is_empty() {
            write!(f, "1")
        } else {
            write!(f, "{}", parts.join("*"))
        }
    }
}

/// A sparse element of the fixed-point ring with `MU_*` coefficients.
#[derive(Clone, Debug)]
pub struct FixedDatum {
    rank: usize,
    n: u32,
    terms: BTreeMap<FixedMonomial, MuElement>,
}

impl PartialEq for FixedDatum {
    fn eq(&self, other: &Self) -> bool {
        self.rank == other.rank && self.terms == other.terms
    }
}

impl FixedDatum {
    pub fn zero(rank: usize, n: u32) -> Self {
        FixedDatum { rank, n, terms: BTreeMap::new() }
    }

    pub fn one(rank: usize, n: u32) -> Self {
        Self::constant(rank, MuElement::one(n))
    }

    pub fn constant(rank: usize, c: MuElement) -> Self {
        let n = c.trunc();
        Self::term(rank, FixedMonomial::one(), c).unwrap_or_else(|_| Self::zero(rank, n))
    }

    /// `c · m`; the weights in `m` must have rank `rank`.
    pub fn term(rank: usize, m: FixedMonomial, c: MuElement) -> Result<Self> {
        for w in m.weights() {
            if w.rank() != rank {
                return Err(Error::RankMismatch(w.rank(), rank));
            }
        }
        let mut out = Self::zero(rank, c.trunc());
        out.add_term(m, c);
        Ok(out)
    }

    /// `e_V^k`.
    pub fn euler(w: &Weight, k: i32, n: u32) -> Self {
        let rank = w.rank();
        Self::term(rank, FixedMonomial::euler(w.clone(), k), MuElement::one(n)).expect("rank matches")
    }

    /// `Y_{V,d}`.
    pub fn y(w: &Weight, d: u32, n: u32) -> Result<Self> {
        Self::term(w.rank(), FixedMonomial::y(w.clone(), d, 1)?, MuElement::one(n))
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn coeff_trunc(&self) -> u32 {
        self.n
    }

    pub fn terms(&self) -> impl Iterator<Item = (&FixedMonomial, &MuElement)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, m: &FixedMonomial) -> MuElement {
        self.terms.get(m).cloned().unwrap_or_else(|| MuElement::zero(self.n))
    }

    pub fn add_term(&mut self, m: FixedMonomial, c: MuElement) {
        if c.is_zero() {
            return;
        }
        let c = c.with_trunc(self.n);
        let s = match self.terms.remove(&m) {
            Some(old) => &old + &c,
            None => c,
        };
        if !s.is_zero() {
            self.terms.insert(m, s);
        }
    }

    fn check_rank(&self, other: &Self) -> Result<()> {
        if self.rank != other.rank {
            return Err(Error::RankMismatch(self.rank, other.rank));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_rank(other)?;
        let mut out = self.clone();
        out.n = self.n.min(other.n);
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        FixedDatum { rank: self.rank, n: self.n, terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect() }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_rank(other)?;
        let mut out = Self::zero(self.rank, self.n.min(other.n));
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &MuElement) -> Self {
        let mut out = Self::zero(self.rank, self.n.min(c.trunc()));
        for (m, a) in &self.terms {
            out.add_term(m.clone(), a * c);
        }
        out
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one(self.rank, self.n);
        for _ in 0..k {
            acc = acc.mul(self).expect("same rank");
        }
        acc
    }

    /// Membership in the geometric cone `MU_*[e_V^{-1}, Y_{V,d}]`.
    pub fn in_cone(&self) -> bool {
        self.terms.keys().all(FixedMonomial::in_cone)
    }

    /// Homological degrees present, ascending.
    pub fn degrees(&self) -> Vec<i64> {
        let mut d: Vec<i64> = self
            .terms
            .iter()
            .flat_map(|(m, c)| {
                let base = m.degree();
                c.half_degrees().into_iter().map(move |k| base + 2 * k as i64)
            })
            .collect();
        d.sort_unstable();
        d.dedup();
        d
    }

    pub fn homogeneous_check(&self, degree: i64) -> bool {
        self.degrees().iter().all(|&d| d == degree)
    }

    pub fn homogeneous_degree(&self) -> Option<i64> {
        match self.degrees().as_slice() {
            [d] => Some(*d),
            _ => None,
        }
    }

    /// Split into homogeneous components, keyed by degree.
    pub fn homogeneous_components(&self) -> BTreeMap<i64, FixedDatum> {
        let mut out: BTreeMap<i64, FixedDatum> = BTreeMap::new();
        for (m, c) in &self.terms {
            for k in c.half_degrees() {
                let d = m.degree() + 2 * k as i64;
                out.entry(d).or_insert_with(|| Self::zero(self.rank, self.n)).add_term(m.clone(), c.component(k));
            }
        }
        out
    }

    /// The involution `ι`: the Hopf antipode on each `MU_*(BU)` factor,
    /// identity on the `e_V`.
    pub fn antipode(&self) -> Self {
        let max_level = self.terms.keys().flat_map(|m| m.y.keys().map(|(_, d)| *d)).max().unwrap_or(1);
        let chi = antipode_table(max_level.saturating_sub(1));
        let mut images: BTreeMap<(Weight, u32), FixedDatum> = BTreeMap::new();
        let mut out = Self::zero(self.rank, self.n);
        for (m, c) in &self.terms {
            let mut acc = Self::term(self.rank, FixedMonomial { e: m.e.clone(), y: BTreeMap::new() }, c.clone())
                .expect("rank already checked");
            for ((w, d), &k) in &m.y {
                let img = images.entry((w.clone(), *d)).or_insert_with(|| y_antipode(w, *d, &chi, self.n));
                acc = acc.mul(&img.pow(k)).expect("same rank");
            }
            out = out.add(&acc).expect("same rank");
        }
        out
    }
}

/// `χ(β_k)` for `k = 0..=max` as integer polynomials in `β_1, β_2, ...`
/// (stored with `m_i` standing for `β_i`), from `Σ_{i=0}^{k} χ(β_i) β_{k-i} = 0`.
pub fn antipode_table(max: u32) -> Vec<MuElement> {
    let t = max.max(1);
    let mut chi = vec![MuElement::one(t)];
    for k in 1..=max {
        let mut acc = MuElement::zero(t);
        for i in 0..k {
            acc = &acc + &(&chi[i as usize] * &MuElement::generator((k - i) as usize, t));
        }
        chi.push(-&acc);
    }
    chi
}

/// `ι(Y_{V,d})`: each `β_{k_1}···β_{k_m}` in `χ(β_{d-1})` becomes
/// `e_V^{m-1} · Π Y_{V,k_j+1}`.
fn y_antipode(w: &Weight, d: u32, chi: &[MuElement], n: u32) -> FixedDatum {
    let mut out = FixedDatum::zero(w.rank(), n);
    for (beta, c) in chi[(d - 1) as usize].terms() {
        let factors: u32 = beta.exponents().iter().sum();
        let mut m = FixedMonomial::euler(w.clone(), factors as i32 - 1);
        for (i, &e) in beta.exponents().iter().enumerate() {
            if e > 0 {
                m = m.mul(&FixedMonomial::y(w.clone(), i as u32 + 2, e).expect("level >= 2"));
            }
        }
        out.add_term(m, MuElement::from_rational(c.clone(), n));
    }
    out
}

impl fmt::Display for FixedDatum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            let (neg, body) = match c.as_rational() {
                Some(q) => {
                    let neg = q < num_rational::BigRational::from_integer(0.into());
                    let abs = if neg { -q } else { q };
                    let body = match (m.is_one(), abs == num_rational::BigRational::from_integer(1.into())) {
                        (true, _) => abs.to_string(),
                        (false, true) => m.to_string(),
                        (false, false) => format!("{}*{}", abs, m),
                    };
                    (neg, body)
                }
                None if m.is_one() => (false, format!("({})", c)),
                None => (false, format!("({})*{}", c, m)),
            };
            match (i, neg) {
                (0, true) => write!(f, "-{}", body)?,
                (0, false) => write!(f, "{}", body)?,
                (_, true) => write!(f, " - {}", body)?,
                (_, false) => write!(f, " + {}", body)?,
            }
        }
        Ok(())
    }
}
