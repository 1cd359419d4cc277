//! Truncated power series with `MuElement` coefficients.

use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::mu::MuElement;
use crate::error::{Error, Result};

/// The arithmetic the formal group law needs from a series ring: a truncated
/// commutative `MU_*`-algebra in which elements without constant term are
/// topologically nilpotent.
pub trait FormalSeries: Clone + PartialEq + fmt::Debug {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn scale(&self, c: &MuElement) -> Self;
    fn constant_term(&self) -> MuElement;
    fn is_zero(&self) -> bool;
    /// Highest degree that is tracked; powers of a series without constant
    /// term vanish beyond it.
    fn truncation(&self) -> u32;

    fn neg(&self) -> Self {
        self.zero_like().sub(self)
    }

    fn has_zero_constant_term(&self) -> bool {
        self.constant_term().is_zero()
    }
}

/// `Σ_{k=0}^{T} c_k x^k`; coefficients above `T` are unknown.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerSeries1 {
    coeffs: Vec<MuElement>,
    trunc: u32,
    n: u32,
}

impl PowerSeries1 {
    pub fn zero(trunc: u32, n: u32) -> Self {
        PowerSeries1 { coeffs: vec![MuElement::zero(n); trunc as usize + 1], trunc, n }
    }

    pub fn one(trunc: u32, n: u32) -> Self {
        Self::monomial(0, MuElement::one(n), trunc, n)
    }

    /// The variable `x` itself.
    pub fn x(trunc: u32, n: u32) -> Self {
        Self::monomial(1, MuElement::one(n), trunc, n)
    }

    pub fn monomial(k: u32, c: MuElement, trunc: u32, n: u32) -> Self {
        let mut s = Self::zero(trunc, n);
        if k <= trunc {
            s.coeffs[k as usize] = c.with_trunc(n);
        }
        s
    }

    pub fn from_coeffs(coeffs: Vec<MuElement>, trunc: u32, n: u32) -> Self {
        let mut s = Self::zero(trunc, n);
        for (k, c) in coeffs.into_iter().enumerate().take(trunc as usize + 1) {
            s.coeffs[k] = c.with_trunc(n);
        }
        s
    }

    pub fn coeff(&self, k: u32) -> &MuElement {
        &self.coeffs[k as usize]
    }

    pub fn coeffs(&self) -> &[MuElement] {
        &self.coeffs
    }

    pub fn coeff_trunc(&self) -> u32 {
        self.n
    }

    /// Restrict to a smaller truncation.
    pub fn truncate(&self, trunc: u32) -> Self {
        let trunc = trunc.min(self.trunc);
        PowerSeries1 { coeffs: self.coeffs[..=trunc as usize].to_vec(), trunc, n: self.n }
    }

    /// Divide by `x`; the constant term must vanish.
    pub fn shift_down(&self) -> Result<Self> {
        if !self.coeffs[0].is_zero() {
            return Err(Error::Precondition("series not divisible by x".into()));
        }
        let trunc = self.trunc.saturating_sub(1);
        Ok(PowerSeries1 { coeffs: self.coeffs[1..].to_vec(), trunc, n: self.n }.truncate(trunc))
    }

    /// Multiplicative inverse; the constant term must be a nonzero rational.
    pub fn inverse(&self) -> Result<Self> {
        let c0 = self.coeffs[0]
            .as_rational()
            .filter(|q| !q.is_zero())
            .ok_or_else(|| Error::Precondition("constant term is not a unit".into()))?;
        let inv0 = BigRational::one() / c0;
        let mut out = Self::zero(self.trunc, self.n);
        out.coeffs[0] = MuElement::from_rational(inv0.clone(), self.n);
        for k in 1..=self.trunc as usize {
            let mut acc = MuElement::zero(self.n);
            for j in 1..=k {
                acc = &acc + &(&self.coeffs[j] * &out.coeffs[k - j]);
            }
            out.coeffs[k] = (-&acc).scale(&inv0);
        }
        Ok(out)
    }

    /// Derivative `d/dx`; the truncation drops by one.
    pub fn derivative(&self) -> Self {
        let trunc = self.trunc.saturating_sub(1);
        let coeffs = (1..=self.trunc as usize).map(|k| self.coeffs[k].scale_int(k as i64)).collect::<Vec<_>>();
        Self::from_coeffs(coeffs, trunc, self.n)
    }

    /// Highest nonzero degree, if any.
    pub fn degree(&self) -> Option<u32> {
        self.coeffs.iter().rposition(|c| !c.is_zero()).map(|k| k as u32)
    }
}

impl FormalSeries for PowerSeries1 {
    fn zero_like(&self) -> Self {
        Self::zero(self.trunc, self.n)
    }
    fn one_like(&self) -> Self {
        Self::one(self.trunc, self.n)
    }
    fn add(&self, other: &Self) -> Self {
        let trunc = self.trunc.min(other.trunc);
        let coeffs = (0..=trunc as usize).map(|k| &self.coeffs[k] + &other.coeffs[k]).collect();
        PowerSeries1 { coeffs, trunc, n: self.n.min(other.n) }
    }
    fn sub(&self, other: &Self) -> Self {
        let trunc = self.trunc.min(other.trunc);
        let coeffs = (0..=trunc as usize).map(|k| &self.coeffs[k] - &other.coeffs[k]).collect();
        PowerSeries1 { coeffs, trunc, n: self.n.min(other.n) }
    }
    fn mul(&self, other: &Self) -> Self {
        let trunc = self.trunc.min(other.trunc);
        let n = self.n.min(other.n);
        let mut out = Self::zero(trunc, n);
        for i in 0..=trunc as usize {
            if self.coeffs[i].is_zero() {
                continue;
            }
            for j in 0..=(trunc as usize - i) {
                if other.coeffs[j].is_zero() {
                    continue;
                }
                out.coeffs[i + j] = &out.coeffs[i + j] + &(&self.coeffs[i] * &other.coeffs[j]);
            }
        }
        out
    }
    fn scale(&self, c: &MuElement) -> Self {
        PowerSeries1 {
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
            trunc: self.trunc,
            n: self.n.min(c.trunc()),
        }
    }
    fn constant_term(&self) -> MuElement {
        self.coeffs[0].clone()
    }
    fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }
    fn truncation(&self) -> u32 {
        self.trunc
    }
}

impl fmt::Display for PowerSeries1 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut wrote = false;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let q = c.as_rational().filter(|_| c.len() == 1);
            let neg = q.as_ref().is_some_and(|q| q < &BigRational::zero());
            match (wrote, neg) {
                (false, true) => write!(f, "-")?,
                (true, true) => write!(f, " - ")?,
                (true, false) => write!(f, " + ")?,
                (false, false) => {}
            }
            wrote = true;
            match (k, q) {
                (0, Some(q)) => write!(f, "{}", q.abs())?,
                (0, None) => write!(f, "{}", c)?,
                (_, Some(q)) if q.abs().is_one() => {}
                (_, Some(q)) => write!(f, "{}*", q.abs())?,
                (_, None) => write!(f, "({})*", c)?,
            }
            match k {
                0 => {}
                1 => write!(f, "x")?,
                _ => write!(f, "x^{}", k)?,
            }
        }
        if !wrote {
            write!(f, "0")?;
        }
        write!(f, " + O(x^{})", self.trunc + 1)
    }
}

/// Evaluate `Σ c_k y^k` at a series `s` without constant term (Horner).
pub fn compose<S: FormalSeries>(f: &PowerSeries1, s: &S) -> Result<S> {
    if !s.has_zero_constant_term() {
        return Err(Error::Precondition("substituted series must have zero constant term".into()));
    }
    let top = f.degree().map_or(0, |d| d.min(s.truncation()));
    let one = s.one_like();
    let mut acc = one.scale(f.coeff(top));
    for k in (0..top).rev() {
        acc = acc.mul(s).add(&one.scale(f.coeff(k)));
    }
    Ok(acc)
}

/// `s^e` by repeated squaring.
pub fn power<S: FormalSeries>(s: &S, mut e: u32) -> S {
    let mut acc = s.one_like();
    let mut base = s.clone();
    while e > 0 {
        if e & 1 == 1 {
            acc = acc.mul(&base);
        }
        e >>= 1;
        if e > 0 {
            base = base.mul(&base);
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_of_one_minus_x() {
        let n = 3;
        let s = PowerSeries1::one(5, n).sub(&PowerSeries1::x(5, n));
        let inv = s.inverse().unwrap();
        for k in 0..=5 {
            assert!(inv.coeff(k).is_one());
        }
        assert!(s.mul(&inv).sub(&s.one_like()).is_zero());
    }

    #[test]
    fn compose_with_polynomial() {
        let n = 2;
        // f(y) = 1 + y + y^2 at y = 2x  ->  1 + 2x + 4x^2
        let f = PowerSeries1::from_coeffs(vec![MuElement::one(n); 3], 4, n);
        let s = PowerSeries1::x(4, n).scale(&MuElement::from_int(2, n));
        let g = compose(&f, &s).unwrap();
        assert_eq!(g.coeff(1), &MuElement::from_int(2, n));
        assert_eq!(g.coeff(2), &MuElement::from_int(4, n));
        assert!(g.coeff(3).is_zero());
        assert!(compose(&f, &PowerSeries1::one(4, n)).is_err());
    }

    #[test]
    fn power_matches_repeated_multiplication() {
        let n = 4;
        let s = PowerSeries1::x(6, n).add(&PowerSeries1::monomial(2, MuElement::generator(1, n), 6, n));
        let p = power(&s, 3);
        assert_eq!(p, s.mul(&s).mul(&s));
    }
}
