//! S-expression wire format, plus a reader for `MU_*` polynomials written
//! the way they print (`2*m1^2 - m2`, `3/2*m1`).
//!
//! ```text
//! point
//! (proj (0) (0) (1))
//! (prod (proj (0) (1)) (proj (0) (2)))
//! (union A B ...)
//! (sum (term (coef "3*m2") (e (1) -1) (y (1 0) 2 1)) ...)
//! ```

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::borel::Weight;
use crate::error::{Error, Result};
use crate::fixedring::{FixedDatum, FixedMonomial};
use crate::geometry::ManifoldExpr;
use crate::lazard::{MuElement, MuMonomial};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Sexp {
    Atom { text: String, pos: usize },
    Str { text: String, pos: usize },
    List { items: Vec<Sexp>, pos: usize },
}

impl Sexp {
    pub fn pos(&self) -> usize {
        match self {
            Sexp::Atom { pos, .. } | Sexp::Str { pos, .. } | Sexp::List { pos, .. } => *pos,
        }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse { pos: self.pos(), msg: msg.into() })
    }

    fn head(&self) -> Option<(&str, &[Sexp])> {
        match self {
            Sexp::List { items, .. } => match items.first() {
                Some(Sexp::Atom { text, .. }) => Some((text.as_str(), &items[1..])),
                _ => None,
            },
            _ => None,
        }
    }

    fn int(&self) -> Result<i64> {
        match self {
            Sexp::Atom { text, .. } => {
                text.parse().or_else(|_| self.err(format!("expected an integer, got '{}'", text)))
            }
            _ => self.err("expected an integer"),
        }
    }
}

pub fn read(src: &str) -> Result<Sexp> {
    let mut p = Reader { src: src.as_bytes(), pos: 0 };
    let v = p.value()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(Error::Parse { pos: p.pos, msg: "trailing input".into() });
    }
    Ok(v)
}

struct Reader<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() {
            match self.src[self.pos] {
                b';' => {
                    while self.pos < self.src.len() && self.src[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                c if c.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn value(&mut self) -> Result<Sexp> {
        self.skip_ws();
        let start = self.pos;
        match self.src.get(self.pos) {
            None => Err(Error::Parse { pos: start, msg: "unexpected end of input".into() }),
            Some(b'(') => {
                self.pos += 1;
                let mut items = Vec::new();
                loop {
                    self.skip_ws();
                    match self.src.get(self.pos) {
                        None => return Err(Error::Parse { pos: start, msg: "unclosed '('".into() }),
                        Some(b')') => {
                            self.pos += 1;
                            return Ok(Sexp::List { items, pos: start });
                        }
                        _ => items.push(self.value()?),
                    }
                }
            }
            Some(b')') => Err(Error::Parse { pos: start, msg: "unexpected ')'".into() }),
            Some(b'"') => {
                self.pos += 1;
                let s = self.pos;
                while self.pos < self.src.len() && self.src[self.pos] != b'"' {
                    self.pos += 1;
                }
                if self.pos >= self.src.len() {
                    return Err(Error::Parse { pos: start, msg: "unterminated string".into() });
                }
                let text = String::from_utf8_lossy(&self.src[s..self.pos]).into_owned();
                self.pos += 1;
                Ok(Sexp::Str { text, pos: start })
            }
            Some(_) => {
                while self.pos < self.src.len() {
                    let c = self.src[self.pos];
                    if c.is_ascii_whitespace() || c == b'(' || c == b')' || c == b'"' {
                        break;
                    }
                    self.pos += 1;
                }
                let text = String::from_utf8_lossy(&self.src[start..self.pos]).into_owned();
                Ok(Sexp::Atom { text, pos: start })
            }
        }
    }
}

fn int_list(s: &Sexp) -> Result<Vec<i64>> {
    match s {
        Sexp::List { items, .. } => items.iter().map(Sexp::int).collect(),
        _ => s.err("expected a parenthesized integer list"),
    }
}

pub fn manifold_from_sexp(s: &Sexp) -> Result<ManifoldExpr> {
    if let Sexp::Atom { text, .. } = s {
        return match text.as_str() {
            "point" => Ok(ManifoldExpr::Point),
            _ => s.err(format!("unknown manifold '{}'", text)),
        };
    }
    let Some((head, args)) = s.head() else {
        return s.err("expected point, (proj ...), (prod ...) or (union ...)");
    };
    match head {
        "proj" => Ok(ManifoldExpr::Proj(args.iter().map(int_list).collect::<Result<_>>()?)),
        "prod" => {
            let mut parts = args.iter().map(manifold_from_sexp);
            let first = parts.next().ok_or(Error::Parse { pos: s.pos(), msg: "prod needs factors".into() })??;
            parts.try_fold(first, |acc, p| Ok(ManifoldExpr::product(acc, p?)))
        }
        "union" => Ok(ManifoldExpr::DisjointUnion(args.iter().map(manifold_from_sexp).collect::<Result<_>>()?)),
        other => s.err(format!("unknown manifold constructor '{}'", other)),
    }
}

pub fn parse_manifold(src: &str) -> Result<ManifoldExpr> {
    manifold_from_sexp(&read(src)?)
}

/// `ManifoldExpr`'s `Display` is already the s-expression form.
pub fn manifold_to_sexpr(m: &ManifoldExpr) -> String {
    m.to_string()
}

fn weight_from_sexp(s: &Sexp) -> Result<Weight> {
    Weight::new(int_list(s)?).or_else(|e| s.err(e.to_string()))
}

fn coef_from_sexp(s: &Sexp, n: u32) -> Result<MuElement> {
    match s {
        Sexp::Atom { text, pos } | Sexp::Str { text, pos } => {
            parse_mu(text, n).map_err(|e| shift_pos(e, *pos + matches!(s, Sexp::Str { .. }) as usize))
        }
        _ => s.err("expected a coefficient"),
    }
}

fn shift_pos(e: Error, by: usize) -> Error {
    match e {
        Error::Parse { pos, msg } => Error::Parse { pos: pos + by, msg },
        other => other,
    }
}

fn term_from_sexp(s: &Sexp, rank: usize, n: u32) -> Result<FixedDatum> {
    let Some(("term", clauses)) = s.head() else {
        return s.err("expected (term ...)");
    };
    let mut coef = MuElement::one(n);
    let mut m = FixedMonomial::one();
    for c in clauses {
        match c.head() {
            Some(("coef", [v])) => coef = coef_from_sexp(v, n)?,
            Some(("e", [w, k])) => m = m.mul(&FixedMonomial::euler(weight_from_sexp(w)?, k.int()? as i32)),
            Some(("e", [w])) => m = m.mul(&FixedMonomial::euler(weight_from_sexp(w)?, 1)),
            Some(("y", [w, d, rest @ ..])) if rest.len() <= 1 => {
                let k = match rest {
                    [k] => k.int()?,
                    _ => 1,
                };
                let (d, k) = (d.int()?, k);
                if d < 2 || k < 0 {
                    return c.err("Y needs level d >= 2 and a nonnegative exponent");
                }
                m = m.mul(
                    &FixedMonomial::y(weight_from_sexp(w)?, d as u32, k as u32).or_else(|e| c.err(e.to_string()))?,
                );
            }
            _ => return c.err("expected (coef ...), (e W k) or (y W d [k])"),
        }
    }
    FixedDatum::term(rank, m, coef).or_else(|e| s.err(e.to_string()))
}

pub fn datum_from_sexp(s: &Sexp, rank: usize, n: u32) -> Result<FixedDatum> {
    match s.head() {
        Some(("sum", terms)) => {
            terms.iter().try_fold(FixedDatum::zero(rank, n), |acc, t| acc.add(&term_from_sexp(t, rank, n)?))
        }
        Some(("term", _)) => term_from_sexp(s, rank, n),
        _ => s.err("expected (sum ...) or (term ...)"),
    }
}

pub fn parse_datum(src: &str, rank: usize, n: u32) -> Result<FixedDatum> {
    datum_from_sexp(&read(src)?, rank, n)
}

fn weight_sexpr(w: &Weight) -> String {
    let parts: Vec<String> = w.entries().iter().map(|x| x.to_string()).collect();
    format!("({})", parts.join(" "))
}

pub fn datum_to_sexpr(x: &FixedDatum) -> String {
    let mut out = String::from("(sum");
    for (m, c) in x.terms() {
        write!(out, " (term (coef \"{}\")", c).unwrap();
        for (w, k) in m.e_exponents() {
            write!(out, " (e {} {})", weight_sexpr(w), k).unwrap();
        }
        for ((w, d), k) in m.y_exponents() {
            write!(out, " (y {} {} {})", weight_sexpr(w), d, k).unwrap();
        }
        out.push(')');
    }
    out.push(')');
    out
}

/// Parse `Σ ± q * m_i^k * ...` with rational `q`.
pub fn parse_mu(src: &str, n: u32) -> Result<MuElement> {
    let b = src.as_bytes();
    let mut pos = 0;
    let skip = |pos: &mut usize| {
        while *pos < b.len() && b[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
    };
    let number = |pos: &mut usize| -> Option<BigInt> {
        let s = *pos;
        while *pos < b.len() && b[*pos].is_ascii_digit() {
            *pos += 1;
        }
        (*pos > s).then(|| src[s..*pos].parse().expect("digits"))
    };
    let perr = |pos: usize, msg: &str| Error::Parse { pos, msg: msg.into() };

    let mut out = MuElement::zero(n);
    let mut first = true;
    loop {
        skip(&mut pos);
        if pos >= b.len() {
            if first {
                return Err(perr(pos, "empty coefficient"));
            }
            break;
        }
        let mut sign = BigRational::one();
        match b[pos] {
            b'+' if !first => pos += 1,
            b'-' => {
                sign = -sign;
                pos += 1;
            }
            _ if !first => return Err(perr(pos, "expected '+' or '-'")),
            _ => {}
        }
        first = false;
        skip(&mut pos);
        let mut coef = sign;
        let mut exps: Vec<u32> = Vec::new();
        let mut factors = 0;
        loop {
            skip(&mut pos);
            if let Some(num) = number(&mut pos) {
                let mut q = BigRational::from_integer(num);
                skip(&mut pos);
                if pos < b.len() && b[pos] == b'/' {
                    pos += 1;
                    skip(&mut pos);
                    let den = number(&mut pos).ok_or_else(|| perr(pos, "expected a denominator"))?;
                    if den.is_zero() {
                        return Err(perr(pos, "zero denominator"));
                    }
                    q /= BigRational::from_integer(den);
                }
                coef *= q;
            } else if pos < b.len() && b[pos] == b'm' {
                pos += 1;
                let at = pos;
                let i = number(&mut pos).ok_or_else(|| perr(at, "expected a generator index after 'm'"))?;
                let i: usize = i.try_into().map_err(|_| perr(at, "generator index too large"))?;
                if i == 0 {
                    return Err(perr(at, "generators start at m1"));
                }
                skip(&mut pos);
                let mut k = 1u32;
                if pos < b.len() && b[pos] == b'^' {
                    pos += 1;
                    skip(&mut pos);
                    let at = pos;
                    k = number(&mut pos)
                        .and_then(|x| u32::try_from(x).ok())
                        .ok_or_else(|| perr(at, "expected an exponent"))?;
                }
                if exps.len() < i {
                    exps.resize(i, 0);
                }
                exps[i - 1] += k;
            } else {
                return Err(perr(pos, "expected a number or a generator m<i>"));
            }
            factors += 1;
            skip(&mut pos);
            if pos < b.len() && b[pos] == b'*' {
                pos += 1;
            } else {
                break;
            }
        }
        debug_assert!(factors > 0);
        out.add_term(MuMonomial::new(exps), coef);
    }
    Ok(out)
}
