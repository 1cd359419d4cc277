//! Integer lattices inside `Q^p`, kept in Hermite normal form.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Row-style Hermite normal form of the integer span of `rows`.
///
/// Output rows are in echelon form with strictly increasing pivot columns,
/// positive pivots, and entries above each pivot reduced into `[0, pivot)`.
pub fn hermite_normal_form(rows: &[Vec<BigInt>], ncols: usize) -> Vec<Vec<BigInt>> {
    let mut rows: Vec<Vec<BigInt>> = rows.iter().filter(|r| r.iter().any(|x| !x.is_zero())).cloned().collect();
    let mut pivot_row = 0;
    for col in 0..ncols {
        if pivot_row >= rows.len() {
            break;
        }
        let mut found = false;
        loop {
            let best = (pivot_row..rows.len())
                .filter(|&i| !rows[i][col].is_zero())
                .min_by(|&a, &b| rows[a][col].abs().cmp(&rows[b][col].abs()));
            let Some(best) = best else { break };
            found = true;
            rows.swap(pivot_row, best);
            let mut clean = true;
            for i in pivot_row + 1..rows.len() {
                if rows[i][col].is_zero() {
                    continue;
                }
                let q = rows[i][col].div_floor(&rows[pivot_row][col]);
                let pivot = rows[pivot_row].clone();
                axpy(&mut rows[i], &(-q), &pivot);
                if !rows[i][col].is_zero() {
                    clean = false;
                }
            }
            if clean {
                break;
            }
        }
        if !found {
            continue;
        }
        if rows[pivot_row][col].is_negative() {
            for x in rows[pivot_row].iter_mut() {
                *x = -&*x;
            }
        }
        let pivot = rows[pivot_row].clone();
        for row in rows.iter_mut().take(pivot_row) {
            let q = row[col].div_floor(&pivot[col]);
            if !q.is_zero() {
                axpy(row, &(-q), &pivot);
            }
        }
        pivot_row += 1;
    }
    rows.truncate(pivot_row);
    rows
}

fn axpy(target: &mut [BigInt], a: &BigInt, x: &[BigInt]) {
    for (t, v) in target.iter_mut().zip(x) {
        if !v.is_zero() {
            *t += a * v;
        }
    }
}

/// A lattice `(1/scale) · span_Z(rows)` in `Q^ncols`.
#[derive(Clone, Debug)]
pub struct Lattice {
    ncols: usize,
    scale: BigInt,
    rows: Vec<Vec<BigInt>>,
}

impl Lattice {
    /// Lattice spanned over `Z` by rational generators.
    pub fn spanned_by(generators: &[Vec<BigRational>], ncols: usize) -> Self {
        let scale = generators.iter().flatten().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
        let int_rows: Vec<Vec<BigInt>> =
            generators.iter().map(|g| g.iter().map(|q| (q * &scale).to_integer()).collect()).collect();
        Lattice { ncols, rows: hermite_normal_form(&int_rows, ncols), scale }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    /// HNF basis vectors as rationals.
    pub fn basis(&self) -> Vec<Vec<BigRational>> {
        self.rows.iter().map(|r| r.iter().map(|x| BigRational::new(x.clone(), self.scale.clone())).collect()).collect()
    }

    /// Exact membership test: clear the common denominator, then peel off HNF
    /// rows pivot by pivot; every multiplier must be an integer and nothing
    /// may remain.
    pub fn contains(&self, v: &[BigRational]) -> bool {
        assert_eq!(v.len(), self.ncols);
        let mut w = Vec::with_capacity(v.len());
        for q in v {
            let s = q * &self.scale;
            if !s.is_integer() {
                return false;
            }
            w.push(s.to_integer());
        }
        let mut col = 0;
        for row in &self.rows {
            let p = row.iter().position(|x| !x.is_zero()).expect("HNF rows are nonzero");
            if w[col..p].iter().any(|x| !x.is_zero()) {
                return false;
            }
            let (q, r) = w[p].div_rem(&row[p]);
            if !r.is_zero() {
                return false;
            }
            if !q.is_zero() {
                axpy(&mut w, &(-q), row);
            }
            col = p + 1;
        }
        w.iter().all(|x| x.is_zero())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }
    fn rats(v: &[(i64, i64)]) -> Vec<BigRational> {
        v.iter().map(|&(a, b)| BigRational::new(a.into(), b.into())).collect()
    }

    #[test]
    fn hnf_small() {
        let h = hermite_normal_form(&[ints(&[2, 4]), ints(&[3, 5]), ints(&[0, 0])], 2);
        // span{(2,4),(3,5)} has determinant -2: HNF is [[1,1],[0,2]]
        assert_eq!(h, vec![ints(&[1, 1]), ints(&[0, 2])]);
    }

    #[test]
    fn rank_deficient() {
        let h = hermite_normal_form(&[ints(&[1, 2, 3]), ints(&[2, 4, 6])], 3);
        assert_eq!(h.len(), 1);
    }

    #[test]
    fn membership_with_denominators() {
        // span of (1/2, 0) and (0, 3)
        let l = Lattice::spanned_by(&[rats(&[(1, 2), (0, 1)]), rats(&[(0, 1), (3, 1)])], 2);
        assert_eq!(l.rank(), 2);
        assert!(l.contains(&rats(&[(3, 2), (-6, 1)])));
        assert!(!l.contains(&rats(&[(1, 4), (0, 1)])));
        assert!(!l.contains(&rats(&[(0, 1), (1, 1)])));
        assert!(l.contains(&rats(&[(0, 1), (0, 1)])));
    }
}
