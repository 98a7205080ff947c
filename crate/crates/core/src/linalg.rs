//! Small dense helpers used by the sparse solvers.

use crate::scalar::Real;

/// Lower-triangular Cholesky factor of a growing Gram submatrix.
///
/// Columns are appended one at a time, as in orthogonal matching pursuit.
#[derive(Debug, Clone)]
pub(crate) struct IncrementalCholesky<T> {
    n: usize,
    // row-major, row i holds i + 1 entries
    rows: Vec<Vec<T>>,
}

impl<T: Real> IncrementalCholesky<T> {
    pub fn new() -> Self {
        Self { n: 0, rows: Vec::new() }
    }

    /// Appends a column with cross-products `cross` against the existing atoms
    /// and self-product `diag`. Returns `false` (leaving the factor unchanged)
    /// when the new atom is numerically dependent on the existing ones.
    pub fn push(&mut self, cross: &[T], diag: T, rel_tol: T) -> bool {
        debug_assert_eq!(cross.len(), self.n);
        let w = self.forward(cross);
        let d2 = diag - w.iter().fold(T::zero(), |a, &v| a + v * v);
        if d2 <= rel_tol * diag.max(T::min_positive_value()) {
            return false;
        }
        let mut row = w;
        row.push(d2.sqrt());
        self.rows.push(row);
        self.n += 1;
        true
    }

    /// Solves `L z = b`.
    fn forward(&self, b: &[T]) -> Vec<T> {
        let mut z = Vec::with_capacity(self.n);
        for i in 0..self.n {
            let row = &self.rows[i];
            let mut acc = b[i];
            for (k, &zk) in z.iter().enumerate() {
                acc -= row[k] * zk;
            }
            z.push(acc / row[i]);
        }
        z
    }

    /// Solves `L Lᵀ x = b`.
    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let mut x = self.forward(b);
        for i in (0..self.n).rev() {
            let mut acc = x[i];
            for k in i + 1..self.n {
                acc -= self.rows[k][i] * x[k];
            }
            x[i] = acc / self.rows[i][i];
        }
        x
    }
}

/// Least squares over the listed columns of a column-major `rows × cols` matrix.
///
/// Columns that are numerically dependent on earlier ones are dropped (their
/// coefficient is zero). Returns the coefficients in `support` order and
/// whether any column was dropped.
pub(crate) fn least_squares_on_support<T: Real>(
    gram: impl Fn(usize, usize) -> T,
    rhs: &[T],
    support: &[usize],
) -> (Vec<T>, bool) {
    let mut chol = IncrementalCholesky::new();
    let mut kept = Vec::with_capacity(support.len());
    let mut dropped = false;
    for &j in support {
        let cross: Vec<T> = kept.iter().map(|&k| gram(k, j)).collect();
        if chol.push(&cross, gram(j, j), T::lit(1e-10)) {
            kept.push(j);
        } else {
            dropped = true;
        }
    }
    let b: Vec<T> = kept.iter().map(|&j| rhs[j]).collect();
    let sol = chol.solve(&b);
    let mut out = vec![T::zero(); support.len()];
    for (pos, &j) in support.iter().enumerate() {
        if let Some(k) = kept.iter().position(|&c| c == j) {
            out[pos] = sol[k];
        }
    }
    (out, dropped)
}
