//! A small language of `(S^1)^r`-manifolds and their geometric fixed-point data.

use std::collections::BTreeMap;
use std::fmt;

use crate::borel::Weight;
use crate::error::{Error, Result};
use crate::fixedring::{FixedDatum, FixedMonomial};
use crate::lazard::{power, MuElement, RingContext};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ManifoldExpr {
    Point,
    /// `P(L_{λ_0} ⊕ ... ⊕ L_{λ_n})`; a zero weight is a trivial summand.
    Proj(Vec<Vec<i64>>),
    Product(Box<ManifoldExpr>, Box<ManifoldExpr>),
    DisjointUnion(Vec<ManifoldExpr>),
}

impl ManifoldExpr {
    pub fn proj(lines: &[&[i64]]) -> Self {
        ManifoldExpr::Proj(lines.iter().map(|l| l.to_vec()).collect())
    }

    pub fn product(a: ManifoldExpr, b: ManifoldExpr) -> Self {
        ManifoldExpr::Product(Box::new(a), Box::new(b))
    }

    /// Torus rank, if the expression pins one down (`Point` does not).
    /// Errors on malformed or rank-inconsistent trees.
    pub fn rank(&self) -> Result<Option<usize>> {
        match self {
            ManifoldExpr::Point => Ok(None),
            ManifoldExpr::Proj(lines) => {
                let r = lines.first().ok_or_else(|| Error::Malformed("proj needs at least one line".into()))?.len();
                if r == 0 {
                    return Err(Error::Malformed("proj line of rank 0".into()));
                }
                if let Some(bad) = lines.iter().find(|l| l.len() != r) {
                    return Err(Error::RankMismatch(bad.len(), r));
                }
                Ok(Some(r))
            }
            ManifoldExpr::Product(a, b) => merge_rank(a.rank()?, b.rank()?),
            ManifoldExpr::DisjointUnion(parts) => {
                if parts.is_empty() {
                    return Err(Error::Malformed("empty disjoint union".into()));
                }
                parts.iter().try_fold(None, |acc, p| merge_rank(acc, p.rank()?))
            }
        }
    }

    pub fn validate(&self, rank: usize) -> Result<()> {
        match self.rank()? {
            Some(r) if r != rank => Err(Error::RankMismatch(r, rank)),
            _ => Ok(()),
        }
    }

    /// Real dimension of each summand (a union may mix dimensions).
    pub fn dimensions(&self) -> Vec<u32> {
        let mut d = match self {
            ManifoldExpr::Point => vec![0],
            ManifoldExpr::Proj(lines) => vec![2 * (lines.len() as u32 - 1)],
            ManifoldExpr::Product(a, b) => {
                let (da, db) = (a.dimensions(), b.dimensions());
                da.iter().flat_map(|x| db.iter().map(move |y| x + y)).collect()
            }
            ManifoldExpr::DisjointUnion(parts) => parts.iter().flat_map(|p| p.dimensions()).collect(),
        };
        d.sort_unstable();
        d.dedup();
        d
    }

    pub fn max_dimension(&self) -> u32 {
        self.dimensions().into_iter().max().unwrap_or(0)
    }

    /// Does the torus act trivially (every fixed component is everything)?
    pub fn has_trivial_action(&self) -> bool {
        match self {
            ManifoldExpr::Point => true,
            ManifoldExpr::Proj(lines) => lines.iter().all(|l| l == &lines[0]),
            ManifoldExpr::Product(a, b) => a.has_trivial_action() && b.has_trivial_action(),
            ManifoldExpr::DisjointUnion(parts) => parts.iter().all(|p| p.has_trivial_action()),
        }
    }
}

fn merge_rank(a: Option<usize>, b: Option<usize>) -> Result<Option<usize>> {
    match (a, b) {
        (Some(x), Some(y)) if x != y => Err(Error::RankMismatch(x, y)),
        (Some(x), _) | (_, Some(x)) => Ok(Some(x)),
        _ => Ok(None),
    }
}

impl fmt::Display for ManifoldExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ManifoldExpr::Point => write!(f, "point"),
            ManifoldExpr::Proj(lines) => {
                write!(f, "(proj")?;
                for l in lines {
                    let s: Vec<String> = l.iter().map(|x| x.to_string()).collect();
                    write!(f, " ({})", s.join(" "))?;
                }
                write!(f, ")")
            }
            ManifoldExpr::Product(a, b) => write!(f, "(prod {} {})", a, b),
            ManifoldExpr::DisjointUnion(parts) => {
                write!(f, "(union")?;
                for p in parts {
                    write!(f, " {}", p)?;
                }
                write!(f, ")")
            }
        }
    }
}

/// One fixed component `F_λ ≅ CP^{m-1}` of a projectivization, with normal
/// bundle `⊕_j O(1)^{s_j} ⊗ V_j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FixedComponent {
    pub weight: Vec<i64>,
    pub multiplicity: u32,
    pub normal: Vec<(Weight, u32)>,
}

impl FixedComponent {
    /// Complex dimension of the component itself.
    pub fn dim(&self) -> u32 {
        self.multiplicity - 1
    }

    /// Complex rank of the normal bundle.
    pub fn normal_rank(&self) -> u32 {
        self.normal.iter().map(|(_, s)| s).sum()
    }
}

/// Fixed components of `P(⊕ L_{λ_i})`: one per distinct weight.
pub fn fixed_components(lines: &[Vec<i64>]) -> Result<Vec<FixedComponent>> {
    let mut mult: BTreeMap<&Vec<i64>, u32> = BTreeMap::new();
    for l in lines {
        *mult.entry(l).or_insert(0) += 1;
    }
    let mut out = Vec::new();
    for (&lam, &m) in &mult {
        let mut normal = Vec::new();
        for (&other, &s) in &mult {
            if other == lam {
                continue;
            }
            let diff = other.iter().zip(lam).map(|(a, b)| a - b).collect();
            normal.push((Weight::new(diff)?, s));
        }
        out.push(FixedComponent { weight: lam.clone(), multiplicity: m, normal });
    }
    Ok(out)
}

/// Class of one fixed component in `MU_*(B) ⊗ A_*(G)`.
///
/// The fundamental class of `CP^n` in `MU_*(CP^∞)` is `Σ_k [CP^{n-k}] β_k`
/// (`β_k` dual to `x^k`). The Whitney-sum map sends `β_k` to the coproduct
/// spread `Σ β_{k_1}···β_{k_S}` over the `S` normal line summands, and
/// `β(t) = X(t) / P(t)` with `P(t) = Σ [CP^i] t^i` converts back to the
/// generators `X_j ↦ Y_{V,j+1} e_V`. Altogether the class is the coefficient
/// of `t^n` in `P(t)^{1-S} · Π_j X^{(V_j)}(t)^{s_j}`, times `Π e_{V_j}^{-s_j}`.
pub fn component_class(ctx: &RingContext, comp: &FixedComponent, rank: usize) -> Result<FixedDatum> {
    let nn = ctx.n();
    let top = comp.dim();
    let s_total = comp.normal_rank();
    let p = ctx.cp_series(top);
    let scalar = if s_total == 0 { p } else { power(&p.inverse()?, s_total - 1) };
    let mut poly: Vec<FixedDatum> = scalar.coeffs().iter().map(|c| FixedDatum::constant(rank, c.clone())).collect();
    let mut a_part = FixedMonomial::one();
    for (w, s) in &comp.normal {
        let x_series: Vec<FixedDatum> = (0..=top)
            .map(|k| match k {
                0 => Ok(FixedDatum::one(rank, nn)),
                _ => FixedDatum::y(w, k + 1, nn)?.mul(&FixedDatum::euler(w, 1, nn)),
            })
            .collect::<Result<_>>()?;
        for _ in 0..*s {
            poly = poly_mul(&poly, &x_series, top as usize)?;
        }
        a_part = a_part.mul(&FixedMonomial::euler(w.clone(), -(*s as i32)));
    }
    let coeff = poly.get(top as usize).cloned().unwrap_or_else(|| FixedDatum::zero(rank, nn));
    coeff.mul(&FixedDatum::term(rank, a_part, MuElement::one(nn))?)
}

fn poly_mul(a: &[FixedDatum], b: &[FixedDatum], top: usize) -> Result<Vec<FixedDatum>> {
    let rank = a[0].rank();
    let n = a[0].coeff_trunc();
    let mut out = vec![FixedDatum::zero(rank, n); top + 1];
    for (i, x) in a.iter().enumerate().take(top + 1) {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(top + 1 - i) {
            if y.is_zero() {
                continue;
            }
            out[i + j] = out[i + j].add(&x.mul(y)?)?;
        }
    }
    Ok(out)
}

/// The geometric fixed-point map `φ_Ω`: sum over fixed components of the
/// class of the normal data.
pub fn phi_omega(ctx: &RingContext, m: &ManifoldExpr, rank: usize) -> Result<FixedDatum> {
    m.validate(rank)?;
    phi_rec(ctx, m, rank)
}

fn phi_rec(ctx: &RingContext, m: &ManifoldExpr, rank: usize) -> Result<FixedDatum> {
    match m {
        ManifoldExpr::Point => Ok(FixedDatum::one(rank, ctx.n())),
        ManifoldExpr::Proj(lines) => {
            let mut acc = FixedDatum::zero(rank, ctx.n());
            for comp in fixed_components(lines)? {
                acc = acc.add(&component_class(ctx, &comp, rank)?)?;
            }
            Ok(acc)
        }
        ManifoldExpr::Product(a, b) => phi_rec(ctx, a, rank)?.mul(&phi_rec(ctx, b, rank)?),
        ManifoldExpr::DisjointUnion(parts) => {
            parts.iter().try_fold(FixedDatum::zero(rank, ctx.n()), |acc, p| acc.add(&phi_rec(ctx, p, rank)?))
        }
    }
}

/// The nonequivariant bordism class, forgetting the action.
pub fn underlying_class(ctx: &RingContext, m: &ManifoldExpr) -> Result<MuElement> {
    m.rank()?;
    underlying_rec(ctx, m)
}

fn underlying_rec(ctx: &RingContext, m: &ManifoldExpr) -> Result<MuElement> {
    Ok(match m {
        ManifoldExpr::Point => MuElement::one(ctx.n()),
        ManifoldExpr::Proj(lines) => ctx.cp_class(lines.len() as u32 - 1)?,
        ManifoldExpr::Product(a, b) => &underlying_rec(ctx, a)? * &underlying_rec(ctx, b)?,
        ManifoldExpr::DisjointUnion(parts) => {
            parts.iter().try_fold(MuElement::zero(ctx.n()), |acc, p| Ok::<_, Error>(&acc + &underlying_rec(ctx, p)?))?
        }
    })
}

/// Enumeration limits for [`catalog`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CatalogBounds {
    /// Most line summands in a projectivization.
    pub max_lines: usize,
    /// Largest `|μ_i|` among the (translated) weights.
    pub max_entry: i64,
    /// Largest complex dimension of any entry.
    pub max_complex_dim: u32,
    /// Products are formed from projectivizations with at most this many lines.
    pub factor_max_lines: usize,
    /// Number of disjoint unions to add.
    pub unions: usize,
}

impl CatalogBounds {
    /// Desk-scale defaults: up to five lines and weights in `[-3, 3]` in
    /// rank 1, three lines and weights in `[-2, 2]` in rank 2.
    pub fn default_for_rank(r: usize) -> Self {
        match r {
            1 => CatalogBounds { max_lines: 5, max_entry: 3, max_complex_dim: 4, factor_max_lines: 3, unions: 12 },
            2 => CatalogBounds { max_lines: 3, max_entry: 2, max_complex_dim: 3, factor_max_lines: 2, unions: 8 },
            _ => CatalogBounds { max_lines: 2, max_entry: 1, max_complex_dim: 2, factor_max_lines: 2, unions: 4 },
        }
    }
}

/// Deterministic, duplicate-free list of test manifolds.
///
/// Projectivizations are listed up to translation of all weights (which does
/// not change the `G`-manifold): the lexicographically smallest weight is
/// zero and the others lie in the box `[-max_entry, max_entry]^r`. Pairwise
/// products and a few unions of equal-dimensional entries follow.
pub fn catalog(r: usize, bounds: &CatalogBounds) -> Vec<ManifoldExpr> {
    let e = bounds.max_entry;
    let mut box_weights: Vec<Vec<i64>> = vec![Vec::new()];
    for _ in 0..r {
        box_weights =
            box_weights.into_iter().flat_map(|p| (-e..=e).map(move |x| [p.clone(), vec![x]].concat())).collect();
    }
    let zero = vec![0; r];
    let mut nonneg: Vec<Vec<i64>> = box_weights.into_iter().filter(|w| *w >= zero).collect();
    nonneg.sort();

    let mut projs = Vec::new();
    let max_lines = bounds.max_lines.min(bounds.max_complex_dim as usize + 1);
    for lines in 2..=max_lines {
        for rest in multisets(&nonneg, lines - 1) {
            let mut ls = vec![zero.clone()];
            ls.extend(rest);
            projs.push(ManifoldExpr::Proj(ls));
        }
    }

    let factors: Vec<&ManifoldExpr> = projs
        .iter()
        .filter(|m| matches!(m, ManifoldExpr::Proj(l) if l.len() <= bounds.factor_max_lines))
        .filter(|m| !m.has_trivial_action())
        .collect();
    let mut products = Vec::new();
    for (i, a) in factors.iter().enumerate() {
        for b in &factors[i..] {
            if a.max_dimension() + b.max_dimension() <= 2 * bounds.max_complex_dim {
                products.push(ManifoldExpr::product((*a).clone(), (*b).clone()));
            }
        }
    }

    let mut unions = Vec::new();
    for pair in projs.windows(2) {
        if unions.len() >= bounds.unions {
            break;
        }
        if pair[0].dimensions() == pair[1].dimensions() {
            unions.push(ManifoldExpr::DisjointUnion(vec![pair[0].clone(), pair[1].clone()]));
        }
    }

    let mut out = vec![ManifoldExpr::Point];
    out.extend(projs);
    out.extend(products);
    out.extend(unions);
    out
}

/// Multisets of size `k` from `items`, as nondecreasing index sequences.
fn multisets(items: &[Vec<i64>], k: usize) -> Vec<Vec<Vec<i64>>> {
    fn rec(items: &[Vec<i64>], start: usize, k: usize, acc: &mut Vec<Vec<i64>>, out: &mut Vec<Vec<Vec<i64>>>) {
        if k == 0 {
            out.push(acc.clone());
            return;
        }
        for i in start..items.len() {
            acc.push(items[i].clone());
            rec(items, i, k - 1, acc, out);
            acc.pop();
        }
    }
    let mut out = Vec::new();
    rec(items, 0, k, &mut Vec::new(), &mut out);
    out
}
