//! Prime-field arithmetic and dense Gaussian elimination.
//!
//! Homology here is always taken with coefficients in `Z/p` for a prime `p`
//! (default 2). The matrices involved are small — the persistent-Betti-number
//! oracle works on complexes of a few dozen simplices — so a dense
//! representation with explicit elimination is the simplest exact route.

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FieldError {
    #[error("field characteristic {0} is not prime")]
    NotPrime(u64),
}

/// The coefficient field `Z/p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrimeField {
    p: u64,
}

impl PrimeField {
    pub fn new(p: u64) -> Result<Self, FieldError> {
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        Ok(Self { p })
    }

    /// `Z/2`, the default coefficient field.
    pub fn z2() -> Self {
        Self { p: 2 }
    }

    pub fn characteristic(&self) -> u64 {
        self.p
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        // p < 2^32 keeps the product in range.
        (a * b) % self.p
    }

    /// Multiplicative inverse by Fermat's little theorem.
    pub fn inv(&self, a: u64) -> u64 {
        debug_assert!(a != 0, "inverse of zero");
        self.pow(a, self.p - 2)
    }

    fn pow(&self, mut base: u64, mut exp: u64) -> u64 {
        let mut acc = 1 % self.p;
        base %= self.p;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Reduce a signed integer into `[0, p)`.
    pub fn from_i64(&self, v: i64) -> u64 {
        v.rem_euclid(self.p as i64) as u64
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Dense row-major matrix over a prime field.
#[derive(Debug, Clone)]
pub struct DenseMatrix {
    pub rows: usize,
    pub cols: usize,
    data: Vec<u64>,
    field: PrimeField,
}

impl DenseMatrix {
    pub fn zeros(field: PrimeField, rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0; rows * cols],
            field,
        }
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: u64) {
        self.data[r * self.cols + c] = v % self.field.p.max(1);
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    /// Append the columns of `other` on the right. Row counts must agree.
    pub fn hstack(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.rows, other.rows);
        let mut out = DenseMatrix::zeros(self.field, self.rows, self.cols + other.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(r, c, self.get(r, c));
            }
            for c in 0..other.cols {
                out.set(r, self.cols + c, other.get(r, c));
            }
        }
        out
    }

    /// Rank by in-place forward elimination on a working copy.
    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        m.echelonize().len()
    }

    /// Bring the matrix to row echelon form; returns the pivot columns.
    fn echelonize(&mut self) -> Vec<usize> {
        let f = self.field;
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..self.cols {
            if row == self.rows {
                break;
            }
            let mut pivot_row = None;
            for r in row..self.rows {
                if self.get(r, col) != 0 {
                    pivot_row = Some(r);
                    break;
                }
            }
            let Some(pr) = pivot_row else { continue };
            self.swap_rows(row, pr);
            let inv = f.inv(self.get(row, col));
            for c in col..self.cols {
                let v = self.get(row, c);
                self.set_raw(row, c, f.mul(v, inv));
            }
            for r in 0..self.rows {
                if r != row && self.get(r, col) != 0 {
                    let factor = self.get(r, col);
                    for c in col..self.cols {
                        let v = f.sub(self.get(r, c), f.mul(factor, self.get(row, c)));
                        self.set_raw(r, c, v);
                    }
                }
            }
            pivots.push(col);
            row += 1;
        }
        pivots
    }

    #[inline]
    fn set_raw(&mut self, r: usize, c: usize, v: u64) {
        self.data[r * self.cols + c] = v;
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            let (va, vb) = (self.get(a, c), self.get(b, c));
            self.set_raw(a, c, vb);
            self.set_raw(b, c, va);
        }
    }

    /// A basis of the null space, one column vector per basis element.
    pub fn kernel_basis(&self) -> Vec<Vec<u64>> {
        let f = self.field;
        let mut m = self.clone();
        let pivots = m.echelonize();
        let pivot_set: Vec<Option<usize>> = {
            // pivot column -> row containing its leading 1
            let mut map = vec![None; self.cols];
            for (row, &col) in pivots.iter().enumerate() {
                map[col] = Some(row);
            }
            map
        };
        let mut basis = Vec::new();
        for free_col in 0..self.cols {
            if pivot_set[free_col].is_some() {
                continue;
            }
            let mut v = vec![0u64; self.cols];
            v[free_col] = 1;
            for (col, row_opt) in pivot_set.iter().enumerate() {
                if let Some(row) = row_opt {
                    // pivot entry is normalized to 1
                    v[col] = f.neg(m.get(*row, free_col));
                }
            }
            basis.push(v);
        }
        basis
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_arithmetic_mod_5() {
        let f = PrimeField::new(5).unwrap();
        assert_eq!(f.add(3, 4), 2);
        assert_eq!(f.sub(1, 3), 3);
        assert_eq!(f.mul(3, 4), 2);
        assert_eq!(f.mul(f.inv(3), 3), 1);
        assert_eq!(f.from_i64(-1), 4);
    }

    #[test]
    fn rejects_composite_characteristic() {
        assert_eq!(PrimeField::new(6), Err(FieldError::NotPrime(6)));
        assert_eq!(PrimeField::new(1), Err(FieldError::NotPrime(1)));
        assert!(PrimeField::new(7).is_ok());
    }

    #[test]
    fn rank_of_boundary_like_matrix() {
        // Boundary of a triangle's edge set over Z/2: rank 2.
        let f = PrimeField::z2();
        let mut m = DenseMatrix::zeros(f, 3, 3);
        // columns: edges 01, 02, 12; rows: vertices 0,1,2
        m.set(0, 0, 1);
        m.set(1, 0, 1);
        m.set(0, 1, 1);
        m.set(2, 1, 1);
        m.set(1, 2, 1);
        m.set(2, 2, 1);
        assert_eq!(m.rank(), 2);
        let kernel = m.kernel_basis();
        assert_eq!(kernel.len(), 1);
        // the kernel vector is the full cycle
        assert_eq!(kernel[0], vec![1, 1, 1]);
    }

    #[test]
    fn kernel_dimension_plus_rank_is_cols() {
        let f = PrimeField::new(3).unwrap();
        let mut m = DenseMatrix::zeros(f, 2, 4);
        m.set(0, 0, 1);
        m.set(0, 1, 2);
        m.set(1, 2, 1);
        assert_eq!(m.rank() + m.kernel_basis().len(), 4);
        for v in m.kernel_basis() {
            for r in 0..m.rows {
                let mut acc = 0;
                for c in 0..m.cols {
                    acc = f.add(acc, f.mul(m.get(r, c), v[c]));
                }
                assert_eq!(acc, 0);
            }
        }
    }
}
