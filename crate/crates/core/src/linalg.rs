//! Dense exact linear algebra over a small finite field.
//!
//! Matrices act on row vectors from the right (`x ↦ x·M`); every kernel in
//! this module is a left kernel.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf::Gf;

/// Row-major matrix of `F_q` codes. The field is passed to each operation.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<u32>,
}

/// Wire form: `{"rows":r,"cols":c,"q":q,"entries":[[...],...]}`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub q: u32,
    pub entries: Vec<Vec<u32>>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    pub fn scalar(n: usize, c: u32) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = c;
        }
        m
    }

    pub fn new(rows: usize, cols: usize, data: Vec<u32>) -> Self {
        assert_eq!(rows * cols, data.len(), "matrix data has wrong length");
        Matrix { rows, cols, data }
    }

    /// Panics on ragged input.
    pub fn from_rows(rows: Vec<Vec<u32>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend(row);
        }
        Matrix { rows: r, cols: c, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }
    pub fn data(&self) -> &[u32] {
        &self.data
    }
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: u32) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[u32] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn add(&self, other: &Matrix, f: &Gf) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f.add(a, b)).collect();
        Matrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, other: &Matrix, f: &Gf) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f.sub(a, b)).collect();
        Matrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn neg(&self, f: &Gf) -> Matrix {
        let data = self.data.iter().map(|&a| f.neg(a)).collect();
        Matrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn scale(&self, c: u32, f: &Gf) -> Matrix {
        let data = self.data.iter().map(|&a| f.mul(c, a)).collect();
        Matrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn mul(&self, other: &Matrix, f: &Gf) -> Matrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch in product");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    let v = f.add(out.get(i, j), f.mul(a, other.get(k, j)));
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    /// Row vector times matrix.
    pub fn apply_row(&self, x: &[u32], f: &Gf) -> Vec<u32> {
        assert_eq!(x.len(), self.rows);
        let mut out = vec![0; self.cols];
        for (k, &a) in x.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, o) in out.iter_mut().enumerate() {
                *o = f.add(*o, f.mul(a, self.get(k, j)));
            }
        }
        out
    }

    pub fn vstack(&self, other: &Matrix) -> Matrix {
        if self.rows == 0 {
            return other.clone();
        }
        if other.rows == 0 {
            return self.clone();
        }
        assert_eq!(self.cols, other.cols);
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Matrix { rows: self.rows + other.rows, cols: self.cols, data }
    }

    pub fn hstack(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.rows, other.rows);
        let cols = self.cols + other.cols;
        let mut data = Vec::with_capacity(self.rows * cols);
        for i in 0..self.rows {
            data.extend_from_slice(self.row(i));
            data.extend_from_slice(other.row(i));
        }
        Matrix { rows: self.rows, cols, data }
    }

    /// Concatenates square blocks horizontally: `[B_1 | B_2 | ...]`.
    pub fn hcat(blocks: &[Matrix]) -> Matrix {
        let mut it = blocks.iter();
        let first = it.next().expect("at least one block").clone();
        it.fold(first, |acc, b| acc.hstack(b))
    }

    pub fn submatrix(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Matrix {
        let mut m = Matrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.set(i, j, self.get(r0 + i, c0 + j));
            }
        }
        m
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, block: &Matrix) {
        for i in 0..block.rows {
            for j in 0..block.cols {
                self.set(r0 + i, c0 + j, block.get(i, j));
            }
        }
    }

    /// Block-diagonal matrix.
    pub fn block_diag(blocks: &[Matrix]) -> Matrix {
        let r: usize = blocks.iter().map(|b| b.rows).sum();
        let c: usize = blocks.iter().map(|b| b.cols).sum();
        let mut m = Matrix::zeros(r, c);
        let (mut i, mut j) = (0, 0);
        for b in blocks {
            m.set_block(i, j, b);
            i += b.rows;
            j += b.cols;
        }
        m
    }

    /// Reduced row echelon form and rank. Zero rows are moved to the bottom.
    pub fn rref(&self, f: &Gf) -> (Matrix, usize) {
        let mut m = self.clone();
        let mut rank = 0;
        for col in 0..m.cols {
            if rank == m.rows {
                break;
            }
            let Some(piv) = (rank..m.rows).find(|&r| m.get(r, col) != 0) else {
                continue;
            };
            if piv != rank {
                for j in 0..m.cols {
                    m.data.swap(piv * m.cols + j, rank * m.cols + j);
                }
            }
            let inv = f.inv(m.get(rank, col)).expect("pivot is nonzero");
            for j in col..m.cols {
                let v = f.mul(inv, m.get(rank, j));
                m.set(rank, j, v);
            }
            for r in 0..m.rows {
                if r == rank {
                    continue;
                }
                let factor = m.get(r, col);
                if factor == 0 {
                    continue;
                }
                for j in col..m.cols {
                    let v = f.sub(m.get(r, j), f.mul(factor, m.get(rank, j)));
                    m.set(r, j, v);
                }
            }
            rank += 1;
        }
        (m, rank)
    }

    pub fn rank(&self, f: &Gf) -> usize {
        self.rref(f).1
    }

    /// Pivot column of each nonzero row of a matrix already in RREF.
    pub fn pivots(&self) -> Vec<usize> {
        (0..self.rows)
            .filter_map(|i| self.row(i).iter().position(|&x| x != 0))
            .collect()
    }

    /// Basis (as rows) of the left kernel `{x : x·m = 0}`.
    pub fn kernel(&self, f: &Gf) -> Matrix {
        // x·m = 0  <=>  mᵀ·xᵀ = 0; solve the right kernel of mᵀ.
        let t = self.transpose();
        let (r, rank) = t.rref(f);
        let pivots = r.pivots();
        let nvars = t.cols;
        let free: Vec<usize> = (0..nvars).filter(|c| !pivots.contains(c)).collect();
        let mut basis = Matrix::zeros(free.len(), nvars);
        for (k, &fc) in free.iter().enumerate() {
            basis.set(k, fc, 1);
            for (i, &pc) in pivots.iter().enumerate().take(rank) {
                basis.set(k, pc, f.neg(r.get(i, fc)));
            }
        }
        basis
    }

    pub fn det(&self, f: &Gf) -> u32 {
        assert!(self.is_square(), "determinant of a non-square matrix");
        let n = self.rows;
        let mut m = self.clone();
        let mut det = 1u32;
        for col in 0..n {
            let Some(piv) = (col..n).find(|&r| m.get(r, col) != 0) else {
                return 0;
            };
            if piv != col {
                for j in 0..n {
                    m.data.swap(piv * n + j, col * n + j);
                }
                det = f.neg(det);
            }
            let p = m.get(col, col);
            det = f.mul(det, p);
            let inv = f.inv(p).expect("pivot is nonzero");
            for r in col + 1..n {
                let factor = f.mul(m.get(r, col), inv);
                if factor == 0 {
                    continue;
                }
                for j in col..n {
                    let v = f.sub(m.get(r, j), f.mul(factor, m.get(col, j)));
                    m.set(r, j, v);
                }
            }
        }
        det
    }

    pub fn is_invertible(&self, f: &Gf) -> bool {
        self.is_square() && self.rank(f) == self.rows
    }

    pub fn inverse(&self, f: &Gf) -> Result<Matrix> {
        if !self.is_square() {
            return Err(Error::Domain("inverse of a non-square matrix".into()));
        }
        let n = self.rows;
        let aug = self.hstack(&Matrix::identity(n));
        let (r, _) = aug.rref(f);
        if (0..n).any(|i| r.get(i, i) != 1) || r.submatrix(0, 0, n, n) != Matrix::identity(n) {
            let k = self.kernel(f);
            return Err(Error::Singular { witness: k.row(0).to_vec() });
        }
        Ok(r.submatrix(0, n, n, n))
    }

    pub fn to_json(&self, q: u32) -> MatrixJson {
        MatrixJson {
            rows: self.rows,
            cols: self.cols,
            q,
            entries: (0..self.rows).map(|i| self.row(i).to_vec()).collect(),
        }
    }

    pub fn from_json(j: &MatrixJson) -> Result<Matrix> {
        if j.entries.len() != j.rows || j.entries.iter().any(|r| r.len() != j.cols) {
            return Err(Error::Domain("matrix JSON shape mismatch".into()));
        }
        if j.entries.iter().flatten().any(|&x| x >= j.q) {
            return Err(Error::Domain("matrix entry outside the field".into()));
        }
        Ok(Matrix {
            rows: j.rows,
            cols: j.cols,
            data: j.entries.iter().flatten().copied().collect(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn f3() -> Gf {
        Gf::new(3, 1).unwrap()
    }

    #[test]
    fn rref_examples() {
        let f = f3();
        let (r, k) = Matrix::identity(3).rref(&f);
        assert_eq!((r, k), (Matrix::identity(3), 3));
        assert_eq!(Matrix::from_rows(vec![vec![1, 2], vec![2, 1]]).rref(&f).1, 1);
        assert_eq!(Matrix::zeros(3, 4).rref(&f).1, 0);
    }

    #[test]
    fn det_and_kernel_examples() {
        let f = f3();
        let m = Matrix::from_rows(vec![vec![1, 2], vec![2, 1]]);
        assert_eq!(m.det(&f), 0);
        assert_eq!(Matrix::identity(2).inverse(&f).unwrap(), Matrix::identity(2));
        assert_eq!(Matrix::zeros(4, 4).kernel(&f).rows(), 4);
        match m.inverse(&f) {
            Err(Error::Singular { witness }) => {
                assert!(witness.iter().any(|&x| x != 0));
                assert!(m.apply_row(&witness, &f).iter().all(|&x| x == 0));
            }
            other => panic!("expected singular error, got {other:?}"),
        }
    }

    #[test]
    fn det_matches_leibniz_for_all_2x2_over_f4() {
        let f = Gf::new(2, 2).unwrap();
        for code in 0..256u32 {
            let d: Vec<u32> = (0..4).map(|i| (code >> (2 * i)) & 3).collect();
            let m = Matrix::new(2, 2, d.clone());
            let leibniz = f.sub(f.mul(d[0], d[3]), f.mul(d[1], d[2]));
            assert_eq!(m.det(&f), leibniz);
            assert_eq!(m.is_invertible(&f), leibniz != 0);
        }
    }

    #[test]
    fn json_round_trip() {
        let m = Matrix::from_rows(vec![vec![1, 2, 0], vec![0, 1, 1]]);
        let j = m.to_json(3);
        assert_eq!(Matrix::from_json(&j).unwrap(), m);
        let text = serde_json::to_string(&j).unwrap();
        assert_eq!(text, r#"{"rows":2,"cols":3,"q":3,"entries":[[1,2,0],[0,1,1]]}"#);
    }

    fn arb_matrix(q: u32, r: usize, c: usize) -> impl Strategy<Value = Matrix> {
        prop::collection::vec(0..q, r * c).prop_map(move |d| Matrix::new(r, c, d))
    }

    fn arb_invertible(f: Gf, n: usize) -> impl Strategy<Value = Matrix> {
        arb_matrix(f.order(), n, n).prop_filter("invertible", move |m| m.is_invertible(&f))
    }

    proptest! {
        #[test]
        fn rref_is_idempotent_and_row_space_invariant(
            m in arb_matrix(5, 3, 5),
            p in arb_invertible(Gf::new(5, 1).unwrap(), 3),
        ) {
            let f = Gf::new(5, 1).unwrap();
            let (r, k) = m.rref(&f);
            prop_assert_eq!(r.rref(&f), (r.clone(), k));
            prop_assert_eq!(p.mul(&m, &f).rref(&f).0, r);
        }

        #[test]
        fn inverse_of_product_reverses(
            a in arb_invertible(Gf::new(2, 2).unwrap(), 3),
            b in arb_invertible(Gf::new(2, 2).unwrap(), 3),
        ) {
            let f = Gf::new(2, 2).unwrap();
            let ab = a.mul(&b, &f);
            let lhs = ab.inverse(&f).unwrap();
            let rhs = b.inverse(&f).unwrap().mul(&a.inverse(&f).unwrap(), &f);
            prop_assert_eq!(lhs, rhs);
            prop_assert_eq!(a.inverse(&f).unwrap().mul(&a, &f), Matrix::identity(3));
        }

        #[test]
        fn kernel_vectors_annihilate(m in arb_matrix(3, 4, 3)) {
            let f = f3();
            let k = m.kernel(&f);
            prop_assert_eq!(k.rows() + m.rank(&f), 4);
            for i in 0..k.rows() {
                prop_assert!(m.apply_row(k.row(i), &f).iter().all(|&x| x == 0));
            }
        }
    }
}
