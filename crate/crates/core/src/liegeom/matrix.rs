use nalgebra::DMatrix;

use crate::bounds::BracketMode;
use crate::error::{Error, Result};

use super::brackets::{enumerate_brackets, BracketEvaluator, BracketTerm};
use super::family::VectorFieldFamily;

/// `A_k(z)`: one column per bracket, in enumeration order.
#[derive(Debug, Clone, PartialEq)]
pub struct BracketMatrix {
    pub z: Vec<f64>,
    d: usize,
    columns: Vec<Vec<f64>>,
}

impl BracketMatrix {
    pub fn from_columns(z: Vec<f64>, d: usize, columns: Vec<Vec<f64>>) -> Result<Self> {
        if let Some(c) = columns.iter().find(|c| c.len() != d) {
            return Err(Error::Shape(format!(
                "column of length {} in a {d}-row matrix",
                c.len()
            )));
        }
        if columns.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("bracket matrix has non-finite entries".into()));
        }
        Ok(Self { z, d, columns })
    }

    pub fn rows(&self) -> usize {
        self.d
    }

    pub fn cols(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j]
    }

    pub fn entry(&self, row: usize, col: usize) -> f64 {
        self.columns[col][row]
    }

    /// The first `cols` columns.
    pub fn prefix(&self, cols: usize) -> BracketMatrix {
        BracketMatrix {
            z: self.z.clone(),
            d: self.d,
            columns: self.columns[..cols.min(self.columns.len())].to_vec(),
        }
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.d, self.cols(), |r, c| self.columns[c][r])
    }

    /// Singular values, largest first.
    pub fn singular_values(&self) -> Vec<f64> {
        if self.cols() == 0 {
            return Vec::new();
        }
        let mut s: Vec<f64> = self.to_dmatrix().singular_values().iter().copied().collect();
        s.sort_by(|a, b| b.total_cmp(a));
        s
    }
}

/// Evaluates `A_k(z)` for the given bracket list.
pub fn bracket_matrix_for(family: &VectorFieldFamily, terms: &[BracketTerm], z: &[f64]) -> Result<BracketMatrix> {
    let max_len = terms.iter().map(BracketTerm::length).max().unwrap_or(1);
    let mut eval = BracketEvaluator::new(family, z, max_len)?;
    let columns = terms.iter().map(|t| eval.value(t)).collect::<Result<Vec<_>>>()?;
    BracketMatrix::from_columns(z.to_vec(), family.dim(), columns)
}

/// `A_k(z)` with columns in the order of [`enumerate_brackets`].
pub fn bracket_matrix(family: &VectorFieldFamily, k: usize, z: &[f64], mode: BracketMode) -> Result<BracketMatrix> {
    let terms = enumerate_brackets(family.num_fields(), k, mode);
    bracket_matrix_for(family, &terms, z)
}

/// Lexicographic `size`-subsets of `0..n`.
pub fn subsets(n: usize, size: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if size > n {
        return out;
    }
    let mut cur: Vec<usize> = (0..size).collect();
    loop {
        out.push(cur.clone());
        let mut i = size;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] < n - size + i {
                break;
            }
        }
        cur[i] += 1;
        for j in i + 1..size {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

/// Determinant of a square row-major matrix: cofactor expansion up to
/// size 4, LU with partial pivoting beyond.
pub fn determinant(a: &[f64], n: usize) -> f64 {
    debug_assert_eq!(a.len(), n * n);
    match n {
        0 => 1.0,
        1 => a[0],
        2 => a[0] * a[3] - a[1] * a[2],
        3 => {
            a[0] * (a[4] * a[8] - a[5] * a[7]) - a[1] * (a[3] * a[8] - a[5] * a[6]) + a[2] * (a[3] * a[7] - a[4] * a[6])
        }
        4 => {
            let mut acc = 0.0;
            let mut minor = [0.0; 9];
            for c in 0..4 {
                let mut k = 0;
                for r in 1..4 {
                    for cc in (0..4).filter(|&cc| cc != c) {
                        minor[k] = a[r * 4 + cc];
                        k += 1;
                    }
                }
                let sign = if c % 2 == 0 { 1.0 } else { -1.0 };
                acc += sign * a[c] * determinant(&minor, 3);
            }
            acc
        }
        _ => {
            let mut m = a.to_vec();
            let mut det = 1.0;
            for col in 0..n {
                let pivot = (col..n)
                    .max_by(|&i, &j| m[i * n + col].abs().total_cmp(&m[j * n + col].abs()))
                    .unwrap();
                if m[pivot * n + col] == 0.0 {
                    return 0.0;
                }
                if pivot != col {
                    for c in 0..n {
                        m.swap(pivot * n + c, col * n + c);
                    }
                    det = -det;
                }
                let p = m[col * n + col];
                det *= p;
                for r in col + 1..n {
                    let f = m[r * n + col] / p;
                    for c in col..n {
                        m[r * n + c] -= f * m[col * n + c];
                    }
                }
            }
            det
        }
    }
}

/// Row and column subsets of every `size × size` minor, row subsets
/// outermost.
pub fn minor_index(rows: usize, cols: usize, size: usize) -> Vec<(Vec<usize>, Vec<usize>)> {
    let row_sets = subsets(rows, size);
    let col_sets = subsets(cols, size);
    let mut out = Vec::with_capacity(row_sets.len() * col_sets.len());
    for r in &row_sets {
        for c in &col_sets {
            out.push((r.clone(), c.clone()));
        }
    }
    out
}

/// All `(ρ+1) × (ρ+1)` minors. Empty when `ρ + 1` exceeds either
/// dimension.
pub fn minors(a: &BracketMatrix, rho: usize) -> Vec<f64> {
    let size = rho + 1;
    if size > a.rows() || size > a.cols() {
        return Vec::new();
    }
    let mut buf = vec![0.0; size * size];
    minor_index(a.rows(), a.cols(), size)
        .iter()
        .map(|(rs, cs)| {
            for (i, &r) in rs.iter().enumerate() {
                for (j, &c) in cs.iter().enumerate() {
                    buf[i * size + j] = a.entry(r, c);
                }
            }
            determinant(&buf, size)
        })
        .collect()
}

/// Singular values above `tol · (reference + ε_machine)`.
pub fn rank_with_reference(singular_values: &[f64], tol: f64, reference: f64) -> usize {
    let threshold = tol * (reference + f64::EPSILON);
    singular_values.iter().filter(|&&s| s > threshold).count()
}

/// Numerical rank relative to the largest singular value.
pub fn rank_at(a: &BracketMatrix, tol: f64) -> usize {
    let s = a.singular_values();
    let reference = s.first().copied().unwrap_or(0.0);
    rank_with_reference(&s, tol, reference)
}

/// `κ` with `rank_at(a, tol) ≤ ρ ⇒ max |minor| ≤ κ · tol`: every
/// `(ρ+1)`-minor is bounded by `σ_1^ρ · σ_{ρ+1}`.
pub fn rank_minor_kappa(a: &BracketMatrix, rho: usize) -> f64 {
    let s1 = a.singular_values().first().copied().unwrap_or(0.0);
    s1.powi(rho as i32) * (s1 + f64::EPSILON)
}
