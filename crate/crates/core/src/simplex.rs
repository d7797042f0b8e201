//! Full-dimensional simplices with integer vertices.
//!
//! Geometry here is deliberately split between two arithmetic worlds: volume
//! questions are answered exactly over the integers (fraction-free Gaussian
//! elimination), while barycentric coordinates for membership checks use
//! floating point.

use crate::error::{Error, Result};

/// `dim + 1` vertices in `Z^dim`, stored row major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Simplex {
    dim: usize,
    verts: Vec<i8>,
}

impl Simplex {
    /// Builds from a flat row-major vertex buffer of `(dim + 1) * dim`
    /// entries.
    pub fn from_flat(dim: usize, verts: Vec<i8>) -> Result<Self> {
        if verts.len() != (dim + 1) * dim {
            return Err(Error::LengthMismatch {
                expected: (dim + 1) * dim,
                found: verts.len(),
            });
        }
        Ok(Simplex { dim, verts })
    }

    pub fn from_rows(rows: &[Vec<i8>]) -> Result<Self> {
        let dim = rows.len().saturating_sub(1);
        let mut verts = Vec::with_capacity(rows.len() * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::LengthMismatch { expected: dim, found: row.len() });
            }
            verts.extend_from_slice(row);
        }
        Simplex::from_flat(dim, verts)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertex_count(&self) -> usize {
        self.dim + 1
    }

    pub fn vertex(&self, i: usize) -> &[i8] {
        &self.verts[i * self.dim..(i + 1) * self.dim]
    }

    pub fn vertices(&self) -> impl Iterator<Item = &[i8]> {
        self.verts.chunks_exact(self.dim.max(1))
    }

    /// Absolute determinant of the edge matrix (rows `v_i - v_0`), computed
    /// exactly. The Euclidean volume is this value divided by `dim!`.
    pub fn volume_determinant(&self) -> Result<i128> {
        let n = self.dim;
        let mut m: Vec<Vec<i128>> = (1..=n)
            .map(|i| {
                (0..n)
                    .map(|j| i128::from(self.vertex(i)[j]) - i128::from(self.vertex(0)[j]))
                    .collect()
            })
            .collect();
        Ok(bareiss_determinant(&mut m)?.abs())
    }

    /// Barycentric coordinates of `point` with respect to the vertices.
    pub fn barycentric(&self, point: &[f64]) -> Result<Vec<f64>> {
        let n = self.dim;
        if point.len() != n {
            return Err(Error::LengthMismatch { expected: n, found: point.len() });
        }
        // Solve [V^T; 1…1] λ = [point; 1].
        let size = n + 1;
        let mut a = vec![vec![0f64; size + 1]; size];
        for row in 0..n {
            for (col, vert) in self.vertices().enumerate() {
                a[row][col] = f64::from(vert[row]);
            }
            a[row][size] = point[row];
        }
        for col in 0..size {
            a[n][col] = 1.0;
        }
        a[n][size] = 1.0;
        solve_in_place(&mut a)
    }
}

/// Fraction-free (Bareiss) determinant over `i128`; every intermediate value
/// is an exact minor determinant. Overflow is reported, never wrapped.
pub fn bareiss_determinant(m: &mut [Vec<i128>]) -> Result<i128> {
    let n = m.len();
    if n == 0 {
        return Ok(1);
    }
    let mul = |a: i128, b: i128| a.checked_mul(b).ok_or(Error::ExactOverflow("determinant"));
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if m[k][k] == 0 {
            let Some(swap) = (k + 1..n).find(|&r| m[r][k] != 0) else {
                return Ok(0);
            };
            m.swap(k, swap);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = mul(m[i][j], m[k][k])?
                    .checked_sub(mul(m[i][k], m[k][j])?)
                    .ok_or(Error::ExactOverflow("determinant"))?;
                debug_assert_eq!(num % prev, 0);
                m[i][j] = num / prev;
            }
            m[i][k] = 0;
        }
        prev = m[k][k];
    }
    Ok(sign * m[n - 1][n - 1])
}

/// Gaussian elimination with partial pivoting on an augmented matrix
/// (`rows x (rows + 1)`); returns the solution vector.
fn solve_in_place(a: &mut [Vec<f64>]) -> Result<Vec<f64>> {
    let n = a.len();
    for k in 0..n {
        let pivot = (k..n)
            .max_by(|&r, &s| a[r][k].abs().total_cmp(&a[s][k].abs()))
            .expect("non-empty range");
        if a[pivot][k].abs() < 1e-12 {
            return Err(Error::InvalidParameter("degenerate simplex".into()));
        }
        a.swap(k, pivot);
        for i in k + 1..n {
            let factor = a[i][k] / a[k][k];
            for j in k..=n {
                a[i][j] -= factor * a[k][j];
            }
        }
    }
    let mut x = vec![0f64; n];
    for k in (0..n).rev() {
        let mut acc = a[k][n];
        for j in k + 1..n {
            acc -= a[k][j] * x[j];
        }
        x[k] = acc / a[k][k];
    }
    Ok(x)
}
