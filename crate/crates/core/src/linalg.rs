//! Dense matrices over a prime field and the handful of elimination routines
//! the code needs: rank, unique solves and greedy column-basis selection.

use crate::field::Field;

/// Row-major dense matrix of residues. The modulus is supplied by the caller.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<u64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(size: usize) -> Self {
        let mut m = Self::zeros(size, size);
        for i in 0..size {
            m.set(i, i, 1);
        }
        m
    }

    /// Builds a matrix from rows; returns `None` on ragged input.
    pub fn from_rows(rows: &[Vec<u64>]) -> Option<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return None;
        }
        Some(Matrix {
            rows: rows.len(),
            cols,
            data: rows.concat(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: u64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[u64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<u64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<u64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    /// The submatrix made of the given columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Matrix {
        let mut out = Matrix::zeros(self.rows, cols.len());
        for i in 0..self.rows {
            for (k, &j) in cols.iter().enumerate() {
                out.set(i, k, self.get(i, j));
            }
        }
        out
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j));
            }
        }
        out
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// Reduces in place to reduced row echelon form and returns the pivot
    /// columns. Pivots are the first nonzero entry scanning columns left to
    /// right.
    fn rref(&mut self, field: &Field) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..self.cols {
            if row == self.rows {
                break;
            }
            let Some(p) = (row..self.rows).find(|&i| self.get(i, col) != 0) else {
                continue;
            };
            self.swap_rows(row, p);
            let inv = field.inv(self.get(row, col)).expect("pivot is nonzero");
            for j in col..self.cols {
                let v = field.mul(self.get(row, j), inv);
                self.set(row, j, v);
            }
            for i in 0..self.rows {
                let factor = self.get(i, col);
                if i == row || factor == 0 {
                    continue;
                }
                for j in col..self.cols {
                    let v = field.sub(self.get(i, j), field.mul(factor, self.get(row, j)));
                    self.set(i, j, v);
                }
            }
            pivots.push(col);
            row += 1;
        }
        pivots
    }
}

/// Rank by Gaussian elimination.
pub fn rank(field: &Field, m: &Matrix) -> usize {
    m.clone().rref(field).len()
}

/// Solves `a · x = b` when the solution exists and is unique.
///
/// Returns `None` if the system is inconsistent or `a` has a nontrivial
/// kernel.
pub fn solve_unique(field: &Field, a: &Matrix, b: &[u64]) -> Option<Vec<u64>> {
    assert_eq!(a.rows(), b.len(), "right-hand side has the wrong length");
    let mut aug = Matrix::zeros(a.rows(), a.cols() + 1);
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            aug.set(i, j, a.get(i, j));
        }
        aug.set(i, a.cols(), b[i] % field.modulus());
    }
    let pivots = aug.rref(field);
    if pivots.last() == Some(&a.cols()) || pivots.len() != a.cols() {
        return None;
    }
    Some((0..a.cols()).map(|i| aug.get(i, a.cols())).collect())
}

/// Incrementally built set of linearly independent vectors, kept in echelon
/// form so membership tests are a single reduction.
#[derive(Debug, Clone)]
pub struct EchelonBasis {
    dim: usize,
    // (pivot index, vector normalized so the pivot entry is 1)
    rows: Vec<(usize, Vec<u64>)>,
}

impl EchelonBasis {
    pub fn new(dim: usize) -> Self {
        EchelonBasis {
            dim,
            rows: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn is_full(&self) -> bool {
        self.rows.len() == self.dim
    }

    fn reduce(&self, field: &Field, v: &[u64]) -> Vec<u64> {
        let mut v = v.to_vec();
        for (p, row) in &self.rows {
            let factor = v[*p];
            if factor != 0 {
                for (x, &y) in v.iter_mut().zip(row) {
                    *x = field.sub(*x, field.mul(factor, y));
                }
            }
        }
        v
    }

    /// Adds `v` if it is independent of the current span; reports whether it
    /// was added.
    pub fn insert(&mut self, field: &Field, v: &[u64]) -> bool {
        assert_eq!(v.len(), self.dim);
        let mut v = self.reduce(field, v);
        let Some(p) = v.iter().position(|&x| x != 0) else {
            return false;
        };
        let inv = field.inv(v[p]).expect("nonzero");
        for x in v.iter_mut() {
            *x = field.mul(*x, inv);
        }
        // Keep earlier rows reduced against the new pivot.
        for (_, row) in self.rows.iter_mut() {
            let factor = row[p];
            if factor != 0 {
                for (x, &y) in row.iter_mut().zip(&v) {
                    *x = field.sub(*x, field.mul(factor, y));
                }
            }
        }
        self.rows.push((p, v));
        true
    }
}

/// Greedy left-to-right choice of independent columns among `candidates`,
/// stopping once `limit` columns have been found.
pub fn greedy_independent_columns(
    field: &Field,
    m: &Matrix,
    candidates: impl IntoIterator<Item = usize>,
    limit: usize,
) -> Vec<usize> {
    let mut basis = EchelonBasis::new(m.rows());
    let mut chosen = Vec::new();
    for j in candidates {
        if chosen.len() == limit {
            break;
        }
        if basis.insert(field, &m.column(j)) {
            chosen.push(j);
        }
    }
    chosen
}
