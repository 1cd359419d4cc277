//! The Lazard ring `MU_*` and its universal formal group law, truncated to
//! half-degree `N`.
//!
//! Arithmetic happens rationally in the Mischenko basis `Q[m_1, ..., m_N]`.
//! Integrality is recovered from the lattice spanned by monomials in the
//! FGL coefficients `a_ij`, which is exactly the image of `MU_*`.

mod lattice;
mod mu;
mod series;

use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;

pub use lattice::{hermite_normal_form, Lattice};
pub use mu::{MuElement, MuMonomial};
pub use series::{compose, power, FormalSeries, PowerSeries1};

use crate::error::{Error, Result};

pub const DEFAULT_MAX_HALF_DEGREE: u32 = 12;

/// Immutable, thread-shareable cache of everything that depends only on `N`.
#[derive(Clone, Debug)]
pub struct RingContext {
    n: u32,
    log: PowerSeries1,
    exp: PowerSeries1,
    /// `a_ij` for `i, j >= 1`, `i + j - 1 <= N`.
    fgl: BTreeMap<(u32, u32), MuElement>,
    /// `A_i(y) = Σ_j a_ij y^j`, indexed by `i >= 1`.
    fgl_rows: Vec<PowerSeries1>,
    /// Index `k` holds the lattice in half-degree `k` (index 0 unused).
    lattices: Vec<Lattice>,
    lattice_coords: Vec<Vec<MuMonomial>>,
    lattice_basis: Vec<Vec<MuElement>>,
    /// `m_k` expressed as a polynomial in the `a_{1j}`.
    a1_images: Vec<MuElement>,
}

impl RingContext {
    pub fn new(n: u32) -> Result<Self> {
        Self::with_max(n, DEFAULT_MAX_HALF_DEGREE)
    }

    pub fn with_max(n: u32, max: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::Precondition("coefficient half-degree N must be at least 1".into()));
        }
        if n > max {
            return Err(Error::Resource { requested: n, max });
        }
        let t = n + 1;
        let log = PowerSeries1::from_coeffs(
            (0..=t)
                .map(|k| match k {
                    0 => MuElement::zero(n),
                    1 => MuElement::one(n),
                    _ => MuElement::generator(k as usize - 1, n),
                })
                .collect(),
            t,
            n,
        );
        let exp = compositional_inverse(&log);

        let x = Bivariate::var(0, t, n);
        let y = Bivariate::var(1, t, n);
        let sum = compose(&log, &x)?.add(&compose(&log, &y)?);
        let f = compose(&exp, &sum)?;
        let mut fgl = BTreeMap::new();
        for i in 1..=n {
            for j in 1..=(n + 1 - i) {
                fgl.insert((i, j), f.coeff(i, j));
            }
        }
        let fgl_rows = (0..=n)
            .map(|i| {
                let coeffs =
                    (0..=t).map(|j| if i == 0 || j == 0 { MuElement::zero(n) } else { f.coeff(i, j) }).collect();
                PowerSeries1::from_coeffs(coeffs, t, n)
            })
            .collect();

        let mut ctx = RingContext {
            n,
            log,
            exp,
            fgl,
            fgl_rows,
            lattices: Vec::new(),
            lattice_coords: Vec::new(),
            lattice_basis: Vec::new(),
            a1_images: Vec::new(),
        };
        ctx.build_lattices();
        ctx.build_a1_images();
        Ok(ctx)
    }

    /// Coefficient half-degree bound `N`.
    pub fn n(&self) -> u32 {
        self.n
    }

    /// `a_ij` with `F(x, y) = x + y + Σ_{i,j>=1} a_ij x^i y^j`; `a_10 = a_01 = 1`.
    pub fn a(&self, i: u32, j: u32) -> MuElement {
        match (i, j) {
            (1, 0) | (0, 1) => MuElement::one(self.n),
            _ => self.fgl.get(&(i, j)).cloned().unwrap_or_else(|| MuElement::zero(self.n)),
        }
    }

    pub fn fgl_table(&self) -> &BTreeMap<(u32, u32), MuElement> {
        &self.fgl
    }

    /// `log(x) = x + Σ_{i=1}^{N} m_i x^{i+1}`.
    pub fn log_series(&self) -> &PowerSeries1 {
        &self.log
    }

    pub fn exp_series(&self) -> &PowerSeries1 {
        &self.exp
    }

    /// `[CP^n] = (n+1) m_n`.
    pub fn cp_class(&self, n: u32) -> Result<MuElement> {
        if n > self.n {
            return Err(Error::Truncation(format!("[CP^{}] needs half-degree {} but N = {}", n, n, self.n)));
        }
        Ok(match n {
            0 => MuElement::one(self.n),
            _ => MuElement::generator(n as usize, self.n).scale_int(n as i64 + 1),
        })
    }

    /// `Σ_k [CP^k] t^k`, truncated at `t^trunc`.
    pub fn cp_series(&self, trunc: u32) -> PowerSeries1 {
        let coeffs = (0..=trunc).map(|k| self.cp_class(k).unwrap_or_else(|_| MuElement::zero(self.n))).collect();
        PowerSeries1::from_coeffs(coeffs, trunc, self.n)
    }

    /// `F(p, q)`; both arguments must have zero constant term.
    pub fn fgl_add<S: FormalSeries>(&self, p: &S, q: &S) -> Result<S> {
        if !p.has_zero_constant_term() || !q.has_zero_constant_term() {
            return Err(Error::Precondition("formal group law arguments need zero constant term".into()));
        }
        let mut acc = p.add(q);
        let top = self.n.min(p.truncation());
        let mut p_pow = p.clone();
        for i in 1..=top {
            if p_pow.is_zero() {
                break;
            }
            let row = compose(&self.fgl_rows[i as usize], q)?;
            acc = acc.add(&p_pow.mul(&row));
            p_pow = p_pow.mul(p);
        }
        Ok(acc)
    }

    /// `[n]_F(x)`: `[0] = 0`, `[n+1] = F([n], x)`, `[-n] = i([n])`.
    pub fn n_series<S: FormalSeries>(&self, n: i64, x: &S) -> Result<S> {
        if !x.has_zero_constant_term() {
            return Err(Error::Precondition("n-series argument needs zero constant term".into()));
        }
        if n < 0 {
            return self.formal_inverse(&self.n_series(-n, x)?);
        }
        let mut acc = x.zero_like();
        for _ in 0..n {
            acc = self.fgl_add(&acc, x)?;
        }
        Ok(acc)
    }

    /// `i(x)` with `F(x, i(x)) = 0`, computed as `exp(-log x)`.
    pub fn formal_inverse<S: FormalSeries>(&self, x: &S) -> Result<S> {
        let l = compose(&self.log, x)?;
        compose(&self.exp, &l.neg())
    }

    /// Univariate `[n]_F(x)` over `MU_*`, exact in the truncated ring.
    pub fn n_series_1(&self, n: i64) -> PowerSeries1 {
        self.n_series(n, &PowerSeries1::x(self.n + 1, self.n)).expect("x has zero constant term")
    }

    /// Rank of the integral lattice in half-degree `k` (`1 <= k <= N`).
    pub fn lattice_rank(&self, k: u32) -> usize {
        self.lattices[k as usize].rank()
    }

    pub fn lattice(&self, k: u32) -> &Lattice {
        &self.lattices[k as usize]
    }

    /// An integral basis of `MU_{2k}` as elements of `Q[m]`.
    pub fn lattice_basis(&self, k: u32) -> &[MuElement] {
        &self.lattice_basis[k as usize]
    }

    /// True iff every homogeneous component lies in the Lazard lattice.
    pub fn is_integral(&self, x: &MuElement) -> bool {
        x.half_degrees().into_iter().all(|k| {
            let c = x.component(k);
            if k == 0 {
                return c.as_rational().is_some_and(|q| q.is_integer());
            }
            if k > self.n {
                return false;
            }
            let v: Vec<BigRational> = self.lattice_coords[k as usize].iter().map(|m| c.coefficient(m)).collect();
            self.lattices[k as usize].contains(&v)
        })
    }

    /// Rewrite `x` as a rational polynomial in the generators `a_{1j}`
    /// (the `j`-th variable of the result stands for `a_{1j}`).
    pub fn to_a1_basis(&self, x: &MuElement) -> MuElement {
        substitute(x, &self.a1_images, self.n)
    }

    pub fn render_a1_basis(&self, x: &MuElement) -> String {
        self.to_a1_basis(x).render_with(&|j| format!("a(1,{})", j))
    }

    fn build_lattices(&mut self) {
        let n = self.n;
        self.lattices = vec![Lattice::spanned_by(&[], 0)];
        self.lattice_coords = vec![vec![MuMonomial::one()]];
        self.lattice_basis = vec![vec![MuElement::one(n)]];
        for k in 1..=n {
            let coords = MuMonomial::of_half_degree(k);
            let mut gens = Vec::new();
            for ((i, j), a) in &self.fgl {
                let s = i + j - 1;
                if i > j || s > k {
                    continue;
                }
                for b in &self.lattice_basis[(k - s) as usize] {
                    let prod = a * b;
                    gens.push(coords.iter().map(|m| prod.coefficient(m)).collect::<Vec<_>>());
                }
            }
            let lattice = Lattice::spanned_by(&gens, coords.len());
            let basis = lattice
                .basis()
                .into_iter()
                .map(|row| MuElement::from_terms(coords.iter().cloned().zip(row), n))
                .collect();
            self.lattices.push(lattice);
            self.lattice_coords.push(coords);
            self.lattice_basis.push(basis);
        }
    }

    fn build_a1_images(&mut self) {
        let n = self.n;
        // a_{1k} = -(k+1) m_k + (terms in m_1..m_{k-1}), so m_k is solved
        // for recursively.
        let mut images: Vec<MuElement> = Vec::with_capacity(n as usize);
        for k in 1..=n {
            let lower = &self.a(1, k) + &MuElement::generator(k as usize, n).scale_int(k as i64 + 1);
            let lower_img = substitute(&lower, &images, n);
            let a_k = MuElement::generator(k as usize, n);
            let img = (&lower_img - &a_k).scale(&BigRational::new(1.into(), (k as i64 + 1).into()));
            images.push(img);
        }
        self.a1_images = images;
    }
}

/// Evaluate a polynomial in `m_1, m_2, ...` at `m_i = images[i-1]`.
pub(crate) fn substitute(x: &MuElement, images: &[MuElement], n: u32) -> MuElement {
    let mut out = MuElement::zero(n);
    for (m, c) in x.terms() {
        let mut term = MuElement::from_rational(c.clone(), n);
        for (i, &e) in m.exponents().iter().enumerate() {
            if e > 0 {
                let img = images.get(i).cloned().unwrap_or_else(|| MuElement::zero(n));
                term = &term * &img.pow(e);
            }
        }
        out = &out + &term;
    }
    out
}

/// Compositional inverse of a series `x + O(x^2)` by fixed-point iteration
/// `e <- x - (f(e) - e)`; each pass fixes one more coefficient.
fn compositional_inverse(f: &PowerSeries1) -> PowerSeries1 {
    let t = f.truncation();
    let n = f.coeff_trunc();
    let x = PowerSeries1::x(t, n);
    let nonlinear = f.sub(&x);
    let mut e = x.clone();
    for _ in 0..t {
        e = x.sub(&compose(&nonlinear, &e).expect("e has zero constant term"));
    }
    e
}

/// Power series in two variables, used to expand `F(x, y)`.
#[derive(Clone, Debug, PartialEq)]
struct Bivariate {
    terms: BTreeMap<(u32, u32), MuElement>,
    trunc: u32,
    n: u32,
}

impl Bivariate {
    fn var(which: usize, trunc: u32, n: u32) -> Self {
        let key = if which == 0 { (1, 0) } else { (0, 1) };
        Bivariate { terms: BTreeMap::from([(key, MuElement::one(n))]), trunc, n }
    }

    fn coeff(&self, i: u32, j: u32) -> MuElement {
        self.terms.get(&(i, j)).cloned().unwrap_or_else(|| MuElement::zero(self.n))
    }

    fn insert(&mut self, k: (u32, u32), c: MuElement) {
        if k.0 + k.1 > self.trunc || c.is_zero() {
            return;
        }
        let s = match self.terms.remove(&k) {
            Some(old) => &old + &c,
            None => c,
        };
        if !s.is_zero() {
            self.terms.insert(k, s);
        }
    }
}

impl FormalSeries for Bivariate {
    fn zero_like(&self) -> Self {
        Bivariate { terms: BTreeMap::new(), trunc: self.trunc, n: self.n }
    }
    fn one_like(&self) -> Self {
        Bivariate { terms: BTreeMap::from([((0, 0), MuElement::one(self.n))]), trunc: self.trunc, n: self.n }
    }
    fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.trunc = self.trunc.min(other.trunc);
        out.terms.retain(|k, _| k.0 + k.1 <= out.trunc);
        for (k, c) in &other.terms {
            out.insert(*k, c.clone());
        }
        out
    }
    fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&MuElement::from_int(-1, self.n)))
    }
    fn mul(&self, other: &Self) -> Self {
        let mut out = self.zero_like();
        out.trunc = self.trunc.min(other.trunc);
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                out.insert((a.0 + b.0, a.1 + b.1), ca * cb);
            }
        }
        out
    }
    fn scale(&self, c: &MuElement) -> Self {
        let mut out = self.zero_like();
        for (k, a) in &self.terms {
            out.insert(*k, a * c);
        }
        out
    }
    fn constant_term(&self) -> MuElement {
        self.coeff(0, 0)
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    fn truncation(&self) -> u32 {
        self.trunc
    }
}

impl fmt::Display for RingContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MU_* truncated at half-degree {}", self.n)
    }
}
