use crate::error::{Error, Result};
use crate::scalar::{dot, l2_norm, Real};

/// Column-normalized, class-labeled training matrix.
///
/// Atoms are stored column-major. The Gram matrix `DᵀD` is precomputed since
/// every solver works from inner products.
#[derive(Debug, Clone)]
pub struct Dictionary<T> {
    rows: usize,
    cols: usize,
    atoms: Vec<T>,
    column_class: Vec<usize>,
    class_columns: Vec<Vec<usize>>,
    norms: Vec<T>,
    gram: Vec<T>,
}

/// Divides every column by its ℓ2 norm. `column_class[j]` labels column `j`
/// with a class in `0..num_classes`.
pub fn normalize_columns<T: Real>(
    columns: &[Vec<T>],
    column_class: &[usize],
    num_classes: usize,
) -> Result<Dictionary<T>> {
    Dictionary::from_columns(columns, column_class, num_classes)
}

impl<T: Real> Dictionary<T> {
    pub fn from_columns(columns: &[Vec<T>], column_class: &[usize], num_classes: usize) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::invalid("dictionary needs at least one column"));
        }
        if column_class.len() != columns.len() {
            return Err(Error::DimensionMismatch {
                expected: columns.len(),
                found: column_class.len(),
            });
        }
        let rows = columns[0].len();
        if rows == 0 {
            return Err(Error::invalid("dictionary columns must be non-empty"));
        }
        let mut class_columns = vec![Vec::new(); num_classes];
        let mut atoms = Vec::with_capacity(rows * columns.len());
        let mut norms = Vec::with_capacity(columns.len());
        for (j, (col, &cls)) in columns.iter().zip(column_class).enumerate() {
            if col.len() != rows {
                return Err(Error::DimensionMismatch {
                    expected: rows,
                    found: col.len(),
                });
            }
            if cls >= num_classes {
                return Err(Error::UnknownClass(cls));
            }
            if col.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("dictionary column"));
            }
            let norm = l2_norm(col);
            if !(norm > T::zero()) {
                return Err(Error::ZeroColumn { sample: j, block: None });
            }
            atoms.extend(col.iter().map(|&v| v / norm));
            norms.push(norm);
            class_columns[cls].push(j);
        }
        Ok(Self::assemble(rows, atoms, column_class.to_vec(), class_columns, norms))
    }

    /// Rebuilds a dictionary from atoms that are already unit norm, stored
    /// column-major. The Gram matrix is recomputed exactly as
    /// [`Dictionary::from_columns`] would.
    pub(crate) fn from_atoms(
        rows: usize,
        atoms: Vec<T>,
        norms: Vec<T>,
        column_class: &[usize],
        num_classes: usize,
    ) -> Result<Self> {
        let cols = column_class.len();
        if rows == 0 || cols == 0 {
            return Err(Error::invalid("dictionary needs at least one row and column"));
        }
        if atoms.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: atoms.len(),
            });
        }
        if norms.len() != cols {
            return Err(Error::DimensionMismatch {
                expected: cols,
                found: norms.len(),
            });
        }
        if atoms.iter().chain(&norms).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("dictionary atom"));
        }
        let mut class_columns = vec![Vec::new(); num_classes];
        for (j, &cls) in column_class.iter().enumerate() {
            if cls >= num_classes {
                return Err(Error::UnknownClass(cls));
            }
            let n = l2_norm(&atoms[j * rows..(j + 1) * rows]);
            if (n - T::one()).abs() > T::lit(1e-6) {
                return Err(Error::invalid(format!("atom {j} has norm {n}, expected 1")));
            }
            class_columns[cls].push(j);
        }
        Ok(Self::assemble(rows, atoms, column_class.to_vec(), class_columns, norms))
    }

    fn assemble(
        rows: usize,
        atoms: Vec<T>,
        column_class: Vec<usize>,
        class_columns: Vec<Vec<usize>>,
        norms: Vec<T>,
    ) -> Self {
        let cols = column_class.len();
        let mut gram = vec![T::zero(); cols * cols];
        for i in 0..cols {
            let ai = &atoms[i * rows..(i + 1) * rows];
            gram[i * cols + i] = dot(ai, ai);
            for j in 0..i {
                let g = dot(ai, &atoms[j * rows..(j + 1) * rows]);
                gram[i * cols + j] = g;
                gram[j * cols + i] = g;
            }
        }
        Self {
            rows,
            cols,
            atoms,
            column_class,
            class_columns,
            norms,
            gram,
        }
    }

    /// Signal dimension `l`.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Atom count `s`.
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn num_classes(&self) -> usize {
        self.class_columns.len()
    }

    #[inline]
    pub fn atom(&self, j: usize) -> &[T] {
        &self.atoms[j * self.rows..(j + 1) * self.rows]
    }

    pub fn column_class(&self) -> &[usize] {
        &self.column_class
    }

    /// Column indices belonging to each class.
    pub fn class_columns(&self) -> &[Vec<usize>] {
        &self.class_columns
    }

    /// Norms of the raw columns before normalization.
    pub fn norms(&self) -> &[T] {
        &self.norms
    }

    #[inline]
    pub fn gram(&self, i: usize, j: usize) -> T {
        self.gram[i * self.cols + j]
    }

    pub fn gram_row(&self, i: usize) -> &[T] {
        &self.gram[i * self.cols..(i + 1) * self.cols]
    }

    /// `Dᵀy`.
    pub fn correlate(&self, y: &[T]) -> Vec<T> {
        (0..self.cols).map(|j| dot(self.atom(j), y)).collect()
    }

    /// `Dx`.
    pub fn reconstruct(&self, x: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.rows];
        for (j, &xj) in x.iter().enumerate() {
            if xj != T::zero() {
                for (o, &a) in out.iter_mut().zip(self.atom(j)) {
                    *o += xj * a;
                }
            }
        }
        out
    }

    /// `‖y − Dx‖₂`.
    pub fn residual_norm(&self, x: &[T], y: &[T]) -> T {
        let rec = self.reconstruct(x);
        rec.iter()
            .zip(y)
            .fold(T::zero(), |acc, (&a, &b)| acc + (b - a) * (b - a))
            .sqrt()
    }

    /// Pairs of columns that coincide after normalization.
    pub fn duplicate_columns(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        let tol = T::lit(1e-12);
        for i in 0..self.cols {
            for j in i + 1..self.cols {
                if self.gram(i, j) >= T::one() - tol {
                    out.push((i, j));
                }
            }
        }
        out
    }
}
