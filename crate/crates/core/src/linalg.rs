//! Exact rank, span membership and squared distances over a quadratic field.

use num_traits::{One, Zero};
use thiserror::Error;

use crate::scalar::{QuadScalar, ScalarError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinalgError {
    #[error("vector {index} has length {got}, expected {expected}")]
    Ragged {
        index: usize,
        expected: usize,
        got: usize,
    },
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

/// Checks that every vector has `len` entries and that all irrational parts
/// share one radicand.
fn check_shape<'a, I>(vs: I, len: usize) -> Result<(), LinalgError>
where
    I: IntoIterator<Item = &'a [QuadScalar]>,
{
    let mut radicand: Option<u32> = None;
    for (index, v) in vs.into_iter().enumerate() {
        if v.len() != len {
            return Err(LinalgError::Ragged {
                index,
                expected: len,
                got: v.len(),
            });
        }
        for x in v {
            if let Some(m) = x.radicand() {
                match radicand {
                    Some(r) if r != m => return Err(ScalarError::RadicandMismatch(r, m).into()),
                    _ => radicand = Some(m),
                }
            }
        }
    }
    Ok(())
}

pub fn dot(a: &[QuadScalar], b: &[QuadScalar]) -> QuadScalar {
    a.iter()
        .zip(b)
        .fold(QuadScalar::zero(), |acc, (x, y)| &acc + &(x * y))
}

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScalarMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<QuadScalar>,
}

impl ScalarMatrix {
    pub fn from_rows(rows: &[Vec<QuadScalar>]) -> Result<Self, LinalgError> {
        let cols = rows.first().map_or(0, Vec::len);
        check_shape(rows.iter().map(Vec::as_slice), cols)?;
        Ok(ScalarMatrix {
            rows: rows.len(),
            cols,
            entries: rows.iter().flatten().cloned().collect(),
        })
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[Vec<QuadScalar>], len: usize) -> Result<Self, LinalgError> {
        check_shape(cols.iter().map(Vec::as_slice), len)?;
        let mut entries = Vec::with_capacity(len * cols.len());
        for i in 0..len {
            for c in cols {
                entries.push(c[i].clone());
            }
        }
        Ok(ScalarMatrix {
            rows: len,
            cols: cols.len(),
            entries,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &QuadScalar {
        &self.entries[i * self.cols + j]
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.entries.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    /// Rank by Bareiss fraction-free elimination.
    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        let mut prev = QuadScalar::one();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| !m.get(i, c).is_zero()) else {
                continue;
            };
            m.swap_rows(r, p);
            let pivot = m.get(r, c).clone();
            for i in r + 1..m.rows {
                let lead = m.get(i, c).clone();
                for j in c..m.cols {
                    let v = &(&(&pivot * m.get(i, j)) - &(&lead * m.get(r, j))) / &prev;
                    m.entries[i * m.cols + j] = v;
                }
            }
            prev = pivot;
            r += 1;
        }
        r
    }

    /// Reduced row echelon form in place; returns the pivot columns.
    pub fn rref(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| !self.get(i, c).is_zero()) else {
                continue;
            };
            self.swap_rows(r, p);
            let inv = self.get(r, c).inv().expect("nonzero pivot");
            for j in c..self.cols {
                let v = self.get(r, j) * &inv;
                self.entries[r * self.cols + j] = v;
            }
            for i in 0..self.rows {
                if i == r || self.get(i, c).is_zero() {
                    continue;
                }
                let f = self.get(i, c).clone();
                for j in c..self.cols {
                    let v = self.get(i, j) - &(&f * self.get(r, j));
                    self.entries[i * self.cols + j] = v;
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }
}

/// Exact rank of a list of vectors (0 for an empty list).
pub fn rank(vs: &[Vec<QuadScalar>]) -> Result<usize, LinalgError> {
    if vs.is_empty() {
        return Ok(0);
    }
    Ok(ScalarMatrix::from_rows(vs)?.rank())
}

/// Coefficients `c` with `sum c_i basis_i = target`, or `None` when the
/// target lies outside the span. When the basis is dependent, coefficients
/// of later dependent vectors are set to zero.
pub fn solve_membership(
    target: &[QuadScalar],
    basis: &[Vec<QuadScalar>],
) -> Result<Option<Vec<QuadScalar>>, LinalgError> {
    let mut cols = basis.to_vec();
    cols.push(target.to_vec());
    let mut m = ScalarMatrix::from_columns(&cols, target.len())?;
    let pivots = m.rref();
    let k = basis.len();
    if pivots.last() == Some(&k) {
        return Ok(None);
    }
    let mut coeffs = vec![QuadScalar::zero(); k];
    for (row, &c) in pivots.iter().enumerate() {
        coeffs[c] = m.get(row, k).clone();
    }
    Ok(Some(coeffs))
}

/// Indices of a maximal independent prefix-greedy subset of `basis`.
fn independent_subset(basis: &[Vec<QuadScalar>], len: usize) -> Result<Vec<usize>, LinalgError> {
    if basis.is_empty() {
        return Ok(Vec::new());
    }
    let mut m = ScalarMatrix::from_columns(basis, len)?;
    Ok(m.rref())
}

/// Squared Euclidean distance from `target` to the span of `basis`, through
/// the normal equations on an independent subset.
pub fn residual_norm_sq(
    target: &[QuadScalar],
    basis: &[Vec<QuadScalar>],
) -> Result<QuadScalar, LinalgError> {
    check_shape(
        std::iter::once(target).chain(basis.iter().map(Vec::as_slice)),
        target.len(),
    )?;
    let keep = independent_subset(basis, target.len())?;
    let b: Vec<&Vec<QuadScalar>> = keep.iter().map(|&i| &basis[i]).collect();
    let k = b.len();
    let rhs: Vec<QuadScalar> = b.iter().map(|v| dot(v, target)).collect();
    // augmented Gram system [G | B^T t]
    let rows: Vec<Vec<QuadScalar>> = (0..k)
        .map(|i| {
            let mut row: Vec<QuadScalar> = (0..k).map(|j| dot(b[i], b[j])).collect();
            row.push(rhs[i].clone());
            row
        })
        .collect();
    let mut projected = QuadScalar::zero();
    if k > 0 {
        let mut g = ScalarMatrix::from_rows(&rows)?;
        let pivots = g.rref();
        debug_assert_eq!(pivots.len(), k);
        for i in 0..k {
            projected = &projected + &(g.get(i, k) * &rhs[i]);
        }
    }
    Ok(&dot(target, target) - &projected)
}

/// Orthogonal (unnormalized) basis of a span, built by Gram-Schmidt.
#[derive(Debug, Clone)]
pub struct SpanProjector {
    len: usize,
    ortho: Vec<(Vec<QuadScalar>, QuadScalar)>,
}

impl SpanProjector {
    pub fn new(basis: &[Vec<QuadScalar>], len: usize) -> Result<Self, LinalgError> {
        check_shape(basis.iter().map(Vec::as_slice), len)?;
        let mut proj = SpanProjector {
            len,
            ortho: Vec::new(),
        };
        for v in basis {
            let r = proj.residual_vector(v);
            if r.iter().any(|x| !x.is_zero()) {
                let n = dot(&r, &r);
                proj.ortho.push((r, n));
            }
        }
        Ok(proj)
    }

    pub fn dim(&self) -> usize {
        self.ortho.len()
    }

    pub fn ambient_len(&self) -> usize {
        self.len
    }

    /// Component of `t` orthogonal to the span.
    pub fn residual_vector(&self, t: &[QuadScalar]) -> Vec<QuadScalar> {
        let mut r = t.to_vec();
        for (u, n) in &self.ortho {
            let f = &dot(&r, u) / n;
            if f.is_zero() {
                continue;
            }
            for (ri, ui) in r.iter_mut().zip(u) {
                *ri = &*ri - &(&f * ui);
            }
        }
        r
    }

    pub fn residual_norm_sq(&self, t: &[QuadScalar]) -> QuadScalar {
        let r = self.residual_vector(t);
        dot(&r, &r)
    }
}
