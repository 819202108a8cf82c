//! Exact sparse row reduction and generalized inverses over the rationals.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::rational::Rational;

/// Sparse matrix stored by rows.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SparseMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<BTreeMap<usize, Rational>>,
}

impl SparseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        SparseMatrix { rows, cols, data: (0..rows).map(|_| BTreeMap::new()).collect() }
    }

    pub fn set(&mut self, r: usize, c: usize, v: Rational) {
        if v.is_zero() {
            self.data[r].remove(&c);
        } else {
            self.data[r].insert(c, v);
        }
    }

    pub fn get(&self, r: usize, c: usize) -> Rational {
        self.data[r].get(&c).cloned().unwrap_or_else(Rational::zero)
    }

    /// `A x` for any vector type with the needed linear operations.
    pub fn apply<T: Clone>(&self, x: &[T], zero: impl Fn() -> T, axpy: impl Fn(&T, &Rational, &T) -> T) -> Vec<T> {
        assert_eq!(x.len(), self.cols);
        self.data.iter().map(|row| row.iter().fold(zero(), |acc, (c, v)| axpy(&acc, v, &x[*c]))).collect()
    }

    pub fn apply_rational(&self, x: &[Rational]) -> Vec<Rational> {
        self.apply(x, Rational::zero, |acc, a, v| acc + &(a * v))
    }

    pub fn mul(&self, other: &SparseMatrix) -> SparseMatrix {
        assert_eq!(self.cols, other.rows);
        let mut out = SparseMatrix::zeros(self.rows, other.cols);
        for (r, row) in self.data.iter().enumerate() {
            let mut acc: BTreeMap<usize, Rational> = BTreeMap::new();
            for (k, a) in row {
                for (c, b) in &other.data[*k] {
                    let e = acc.entry(*c).or_insert_with(Rational::zero);
                    *e += &(a * b);
                }
            }
            out.data[r] = acc.into_iter().filter(|(_, v)| !v.is_zero()).collect();
        }
        out
    }
}

fn row_axpy(target: &mut BTreeMap<usize, Rational>, factor: &Rational, src: &BTreeMap<usize, Rational>) {
    for (c, v) in src {
        let prod = factor * v;
        match target.get_mut(c) {
            Some(t) => {
                *t += &prod;
                if t.is_zero() {
                    target.remove(c);
                }
            }
            None => {
                target.insert(*c, prod);
            }
        }
    }
}

/// Generalized inverse `T` of a matrix `B`, satisfying `B T B = B`.
///
/// Built from the reduced row echelon form `E B = R`: the solution puts
/// `(E y)_i` at the `i`-th pivot column and zeros elsewhere.
#[derive(Clone, Debug)]
pub struct GeneralizedInverse {
    pub rows: usize,
    pub cols: usize,
    /// `(pivot column, row i of E)` for each pivot.
    pivots: Vec<(usize, BTreeMap<usize, Rational>)>,
}

impl GeneralizedInverse {
    /// Gauss-Jordan elimination with the first available pivot in column order.
    pub fn new(b: &SparseMatrix) -> Self {
        let m = b.rows;
        let mut rows: Vec<BTreeMap<usize, Rational>> = b.data.clone();
        let mut ops: Vec<BTreeMap<usize, Rational>> =
            (0..m).map(|i| core::iter::once((i, Rational::one())).collect()).collect();
        // column index -> rows having an entry there
        let mut pivots: Vec<(usize, usize)> = Vec::new();
        let mut used = alloc::vec![false; m];
        for col in 0..b.cols {
            let pr = (0..m).filter(|&r| !used[r] && rows[r].contains_key(&col)).min_by_key(|&r| rows[r].len());
            let pr = match pr {
                Some(r) => r,
                None => continue,
            };
            used[pr] = true;
            let inv = rows[pr][&col].recip();
            if !inv.is_one() {
                for v in rows[pr].values_mut() {
                    *v *= &inv;
                }
                for v in ops[pr].values_mut() {
                    *v *= &inv;
                }
            }
            let prow = rows[pr].clone();
            let pops = ops[pr].clone();
            for r in 0..m {
                if r == pr {
                    continue;
                }
                if let Some(f) = rows[r].get(&col).cloned() {
                    let nf = -f;
                    row_axpy(&mut rows[r], &nf, &prow);
                    row_axpy(&mut ops[r], &nf, &pops);
                }
            }
            pivots.push((col, pr));
        }
        GeneralizedInverse {
            rows: b.cols,
            cols: b.rows,
            pivots: pivots.into_iter().map(|(c, r)| (c, core::mem::take(&mut ops[r]))).collect(),
        }
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// `T y` for any vector type.
    pub fn apply<T: Clone>(&self, y: &[T], zero: impl Fn() -> T, axpy: impl Fn(&T, &Rational, &T) -> T) -> Vec<T> {
        assert_eq!(y.len(), self.cols);
        let mut out: Vec<T> = (0..self.rows).map(|_| zero()).collect();
        for (col, erow) in &self.pivots {
            out[*col] = erow.iter().fold(zero(), |acc, (j, v)| axpy(&acc, v, &y[*j]));
        }
        out
    }

    pub fn apply_rational(&self, y: &[Rational]) -> Vec<Rational> {
        self.apply(y, Rational::zero, |acc, a, v| acc + &(a * v))
    }

    pub fn to_matrix(&self) -> SparseMatrix {
        let mut t = SparseMatrix::zeros(self.rows, self.cols);
        for (col, erow) in &self.pivots {
            for (j, v) in erow {
                t.set(*col, *j, v.clone());
            }
        }
        t
    }
}

/// Checks `B T B = B` exactly.
pub fn verify_generalized_inverse(b: &SparseMatrix, t: &GeneralizedInverse) -> bool {
    b.mul(&t.to_matrix()).mul(b) == *b
}
