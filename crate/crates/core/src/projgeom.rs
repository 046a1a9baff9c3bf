//! Projective space `PG(m, q)` over the vector space `F_q^{m+1}`.
//!
//! A subspace is stored as its canonical RREF basis, so equality, hashing and
//! ordering of subspaces are those of the basis matrices.

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf::Gf;
use crate::linalg::{Matrix, MatrixJson};

/// Packs a coordinate vector over `F_q` as the integer `Σ v_i q^i`.
pub fn vec_index(v: &[u32], q: u32) -> u32 {
    v.iter().rev().fold(0, |acc, &d| acc * q + d)
}

pub fn vec_from_index(mut idx: u32, q: u32, dim: usize) -> Vec<u32> {
    (0..dim)
        .map(|_| {
            let d = idx % q;
            idx /= q;
            d
        })
        .collect()
}

/// Number of points of `PG(k-1, q)`.
pub fn gaussian_points(k: u32, q: u32) -> u64 {
    ((q as u64).pow(k) - 1) / (q as u64 - 1)
}

/// A point with its first nonzero coordinate scaled to 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ProjPoint {
    coords: Vec<u32>,
}

impl ProjPoint {
    pub fn new(f: &Gf, coords: Vec<u32>) -> Result<Self> {
        let Some(lead) = coords.iter().copied().find(|&x| x != 0) else {
            return Err(Error::Domain("the zero vector is not a projective point".into()));
        };
        let inv = f.inv(lead)?;
        Ok(ProjPoint { coords: coords.into_iter().map(|x| f.mul(inv, x)).collect() })
    }

    pub fn coords(&self) -> &[u32] {
        &self.coords
    }

    pub fn index(&self, q: u32) -> u32 {
        vec_index(&self.coords, q)
    }

    pub fn to_subspace(&self, f: &Gf) -> Subspace {
        Subspace::from_rows(f, self.coords.len(), Matrix::from_rows(vec![self.coords.clone()]))
    }
}

/// A subspace of `F_q^dim`, i.e. a projective subspace of `PG(dim-1, q)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subspace {
    dim: usize,
    basis: Matrix,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct SubspaceJson {
    /// Projective dimension `m` of the ambient space `PG(m, q)`.
    pub m: usize,
    pub q: u32,
    pub basis: MatrixJson,
}

impl Subspace {
    /// Row space of `rows` (any number of rows, possibly dependent).
    pub fn from_rows(f: &Gf, dim: usize, rows: Matrix) -> Self {
        if rows.rows() == 0 {
            return Subspace::empty(dim);
        }
        assert_eq!(rows.cols(), dim, "basis width must equal the ambient dimension");
        let (r, rank) = rows.rref(f);
        Subspace { dim, basis: r.submatrix(0, 0, rank, dim) }
    }

    /// The subspace `(A_1, ..., A_r) = {(x A_1, ..., x A_r)}`.
    pub fn from_blocks(f: &Gf, blocks: &[Matrix]) -> Self {
        let m = Matrix::hcat(blocks);
        Subspace::from_rows(f, m.cols(), m)
    }

    pub fn empty(dim: usize) -> Self {
        Subspace { dim, basis: Matrix::zeros(0, dim) }
    }

    pub fn full(dim: usize) -> Self {
        Subspace { dim, basis: Matrix::identity(dim) }
    }

    /// Vector-space dimension of the ambient space.
    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.basis.rows()
    }

    /// Projective dimension; `-1` for the empty subspace.
    pub fn proj_dim(&self) -> isize {
        self.rank() as isize - 1
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn is_empty(&self) -> bool {
        self.rank() == 0
    }

    pub fn span(&self, other: &Subspace, f: &Gf) -> Subspace {
        assert_eq!(self.dim, other.dim, "subspaces of different ambient spaces");
        Subspace::from_rows(f, self.dim, self.basis.vstack(&other.basis))
    }

    pub fn span_all<'a>(f: &Gf, dim: usize, items: impl IntoIterator<Item = &'a Subspace>) -> Subspace {
        let mut m = Matrix::zeros(0, dim);
        for s in items {
            m = m.vstack(&s.basis);
        }
        Subspace::from_rows(f, dim, m)
    }

    pub fn meet(&self, other: &Subspace, f: &Gf) -> Subspace {
        assert_eq!(self.dim, other.dim, "subspaces of different ambient spaces");
        if self.is_empty() || other.is_empty() {
            return Subspace::empty(self.dim);
        }
        // (u, v) with u·A = v·B  <=>  (u, -v) in the left kernel of [A; B].
        let stacked = self.basis.vstack(&other.basis);
        let k = stacked.kernel(f);
        let a = self.rank();
        let mut rows = Matrix::zeros(k.rows(), self.dim);
        for i in 0..k.rows() {
            let u = &k.row(i)[..a];
            let v = self.basis.apply_row(u, f);
            for (j, x) in v.into_iter().enumerate() {
                rows.set(i, j, x);
            }
        }
        Subspace::from_rows(f, self.dim, rows)
    }

    pub fn contains(&self, other: &Subspace, f: &Gf) -> bool {
        self.span(other, f).rank() == self.rank()
    }

    pub fn contains_vector(&self, v: &[u32], f: &Gf) -> bool {
        let m = self.basis.vstack(&Matrix::from_rows(vec![v.to_vec()]));
        m.rank(f) == self.rank()
    }

    pub fn is_disjoint(&self, other: &Subspace, f: &Gf) -> bool {
        self.span(other, f).rank() == self.rank() + other.rank()
    }

    /// All `q^k` vectors of the subspace as flat coordinate rows (`k` = rank).
    pub fn vectors(&self, f: &Gf) -> Vec<Vec<u32>> {
        let mut out = vec![vec![0u32; self.dim]];
        for i in 0..self.rank() {
            let row = self.basis.row(i);
            let base_len = out.len();
            for c in 1..f.order() {
                for j in 0..base_len {
                    let v: Vec<u32> =
                        out[j].iter().zip(row).map(|(&a, &b)| f.add(a, f.mul(c, b))).collect();
                    out.push(v);
                }
            }
        }
        out
    }

    /// Packed indices (see [`vec_index`]) of all vectors of the subspace.
    pub fn vector_indices(&self, f: &Gf) -> Vec<u32> {
        let q = f.order();
        self.vectors(f).iter().map(|v| vec_index(v, q)).collect()
    }

    /// The `(q^k - 1)/(q - 1)` points of the subspace.
    ///
    /// Because the basis is in RREF, a combination is normalized exactly when
    /// its first nonzero coefficient is 1.
    pub fn points(&self, f: &Gf) -> Vec<ProjPoint> {
        let k = self.rank();
        let mut out = Vec::new();
        for lead in 0..k {
            // coefficient 1 at `lead`, 0 before, arbitrary after
            let mut partial = vec![self.basis.row(lead).to_vec()];
            for i in lead + 1..k {
                let row = self.basis.row(i);
                let base_len = partial.len();
                for c in 1..f.order() {
                    for j in 0..base_len {
                        let v: Vec<u32> = partial[j]
                            .iter()
                            .zip(row)
                            .map(|(&a, &b)| f.add(a, f.mul(c, b)))
                            .collect();
                        partial.push(v);
                    }
                }
            }
            out.extend(partial.into_iter().map(|coords| ProjPoint { coords }));
        }
        out
    }

    /// Image under the collineation `x ↦ x·T`.
    pub fn apply(&self, t: &Matrix, f: &Gf) -> Subspace {
        Subspace::from_rows(f, self.dim, self.basis.mul(t, f))
    }

    pub fn to_json(&self, q: u32) -> SubspaceJson {
        SubspaceJson { m: self.dim - 1, q, basis: self.basis.to_json(q) }
    }

    pub fn from_json(j: &SubspaceJson, f: &Gf) -> Result<Subspace> {
        let basis = Matrix::from_json(&j.basis)?;
        if basis.rows() > 0 && basis.cols() != j.m + 1 {
            return Err(Error::Domain("subspace basis width does not match ambient".into()));
        }
        Ok(Subspace::from_rows(f, j.m + 1, basis))
    }
}

/// Coordinates `c` with `c·basis = v`, if `v` lies in the row space of `basis`
/// (whose rows must be independent).
pub fn solve_in_basis(f: &Gf, basis: &Matrix, v: &[u32]) -> Option<Vec<u32>> {
    let k = basis.rows();
    // [basisᵀ | vᵀ] in RREF gives the unique solution when consistent.
    let aug = basis.transpose().hstack(&Matrix::from_rows(v.iter().map(|&x| vec![x]).collect()));
    let (r, _) = aug.rref(f);
    let pivots = r.pivots();
    if pivots.contains(&k) || pivots.len() != k {
        return None;
    }
    Some((0..k).map(|i| r.get(i, k)).collect())
}

/// The standard element `(0, ..., I, ..., 0)` with `I` in block `i` of `k`.
pub fn standard_element(f: &Gf, k: usize, n: usize, i: usize) -> Subspace {
    let blocks: Vec<Matrix> =
        (0..k).map(|j| if j == i { Matrix::identity(n) } else { Matrix::zeros(n, n) }).collect();
    Subspace::from_blocks(f, &blocks)
}

/// The unit element `(I, I, ..., I)`.
pub fn unit_element(f: &Gf, k: usize, n: usize) -> Subspace {
    Subspace::from_blocks(f, &vec![Matrix::identity(n); k])
}

/// True iff every `k`-subset of `list` spans `PG(kn-1, q)`; all members must
/// have rank `n` and `list` must have `k` or `k+1` members.
pub fn in_general_position(f: &Gf, list: &[Subspace], k: usize) -> bool {
    let Some(first) = list.first() else { return false };
    let n = first.rank();
    let dim = first.ambient_dim();
    if n == 0 || dim != k * n || list.iter().any(|s| s.rank() != n || s.ambient_dim() != dim) {
        return false;
    }
    if list.len() < k {
        return false;
    }
    list.iter()
        .combinations(k)
        .all(|c| Subspace::span_all(f, dim, c).rank() == dim)
}

/// Collineation `T` (acting as `x ↦ x·T`) sending `list = [S_1, ..., S_k, S_0]`
/// onto the standard frame `(I,0,...,0), ..., (0,...,0,I), (I,...,I)`.
pub fn frame_normalization(f: &Gf, list: &[Subspace]) -> Result<Matrix> {
    if list.len() < 3 {
        return Err(Error::Domain("a frame needs at least three subspaces".into()));
    }
    let k = list.len() - 1;
    if !in_general_position(f, list, k) {
        return Err(Error::NotGeneralPosition);
    }
    let n = list[0].rank();
    let stacked = list[..k].iter().fold(Matrix::zeros(0, k * n), |acc, s| acc.vstack(s.basis()));
    let t1 = stacked.inverse(f)?;
    let w = list[k].basis().mul(&t1, f);
    let blocks: Vec<Matrix> = (0..k).map(|i| w.submatrix(0, i * n, n, n)).collect();
    let d1_inv = blocks[0].inverse(f).map_err(|_| Error::NotGeneralPosition)?;
    let mut diag = Vec::with_capacity(k);
    for b in &blocks {
        let normalized = d1_inv.mul(b, f);
        diag.push(normalized.inverse(f).map_err(|_| Error::NotGeneralPosition)?);
    }
    Ok(t1.mul(&Matrix::block_diag(&diag), f))
}

pub fn apply_collineation(f: &Gf, t: &Matrix, s: &Subspace) -> Result<Subspace> {
    if !t.is_invertible(f) {
        let k = t.kernel(f);
        let witness = if k.rows() > 0 { k.row(0).to_vec() } else { Vec::new() };
        return Err(Error::Singular { witness });
    }
    Ok(s.apply(t, f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pt(f: &Gf, c: &[u32]) -> Subspace {
        ProjPoint::new(f, c.to_vec()).unwrap().to_subspace(f)
    }

    #[test]
    fn span_examples() {
        let f = Gf::new(3, 1).unwrap();
        let a = pt(&f, &[1, 0, 0]);
        let b = pt(&f, &[0, 1, 0]);
        let l = a.span(&b, &f);
        assert_eq!(l.span(&l, &f), l);
        assert_eq!(l.points(&f).len(), 4);
        let e1 = standard_element(&f, 2, 2, 0);
        let e2 = standard_element(&f, 2, 2, 1);
        assert_eq!(e1.span(&e2, &f).rank(), 4);
    }

    #[test]
    fn meet_examples() {
        let f = Gf::new(3, 1).unwrap();
        let l1 = pt(&f, &[1, 0, 0]).span(&pt(&f, &[0, 1, 0]), &f);
        let l2 = pt(&f, &[1, 1, 1]).span(&pt(&f, &[0, 0, 1]), &f);
        let m = l1.meet(&l2, &f);
        assert_eq!(m.rank(), 1);
        assert_eq!(l1.meet(&Subspace::full(3), &f), l1);
        let e1 = standard_element(&f, 2, 2, 0);
        let e2 = standard_element(&f, 2, 2, 1);
        assert!(e1.meet(&e2, &f).is_empty());
        assert_eq!(e1.meet(&e2, &f).proj_dim(), -1);
    }

    #[test]
    fn point_counts() {
        let f = Gf::new(3, 1).unwrap();
        assert_eq!(pt(&f, &[0, 2, 1]).points(&f).len(), 1);
        let full = Subspace::full(6);
        let pts = full.points(&f);
        assert_eq!(pts.len(), 364);
        let mut sorted = pts.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), 364);
        assert_eq!(standard_element(&f, 3, 2, 1).points(&f).len(), 4);
    }

    #[test]
    fn general_position_examples() {
        let f = Gf::new(3, 1).unwrap();
        let n = 2;
        let s: Vec<Subspace> = (0..3).map(|i| standard_element(&f, 3, n, i)).collect();
        let mut frame = s.clone();
        frame.push(unit_element(&f, 3, n));
        assert!(in_general_position(&f, &frame, 3));
        let bad = vec![
            s[0].clone(),
            s[1].clone(),
            Subspace::from_blocks(&f, &[Matrix::identity(2), Matrix::identity(2), Matrix::zeros(2, 2)]),
        ];
        assert!(!in_general_position(&f, &bad, 3));
        let two = vec![standard_element(&f, 2, 2, 0), standard_element(&f, 2, 2, 1)];
        assert!(in_general_position(&f, &two, 2));
    }

    #[test]
    fn frame_normalization_standard_and_block_diag() {
        let f = Gf::new(3, 1).unwrap();
        let mut frame: Vec<Subspace> = (0..3).map(|i| standard_element(&f, 3, 2, i)).collect();
        frame.push(unit_element(&f, 3, 2));
        let t = frame_normalization(&f, &frame).unwrap();
        for s in &frame {
            assert_eq!(&s.apply(&t, &f), s);
        }

        let m = Matrix::from_rows(vec![vec![0, 1], vec![1, 1]]);
        let list = vec![
            standard_element(&f, 2, 2, 0),
            standard_element(&f, 2, 2, 1),
            Subspace::from_blocks(&f, &[Matrix::identity(2), m.clone()]),
        ];
        let t = frame_normalization(&f, &list).unwrap();
        assert_eq!(list[2].apply(&t, &f), unit_element(&f, 2, 2));
        let expected = Matrix::block_diag(&[Matrix::identity(2), m.inverse(&f).unwrap()]);
        assert_eq!(list[2].apply(&expected, &f), unit_element(&f, 2, 2));
    }

    #[test]
    fn frame_normalization_rejects_degenerate_input() {
        let f = Gf::new(3, 1).unwrap();
        let list = vec![
            standard_element(&f, 2, 2, 0),
            standard_element(&f, 2, 2, 1),
            standard_element(&f, 2, 2, 0),
        ];
        assert_eq!(frame_normalization(&f, &list), Err(Error::NotGeneralPosition));
    }

    #[test]
    fn random_frames_normalize_exactly() {
        let f = Gf::new(3, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut done = 0;
        while done < 20 {
            let list: Vec<Subspace> = (0..4)
                .map(|_| {
                    let data = (0..12).map(|_| rng.gen_range(0..3)).collect();
                    Subspace::from_rows(&f, 6, Matrix::new(2, 6, data))
                })
                .collect();
            if !in_general_position(&f, &list, 3) {
                continue;
            }
            let t = frame_normalization(&f, &list).unwrap();
            for (i, e) in list.iter().take(3).enumerate() {
                assert_eq!(e.apply(&t, &f), standard_element(&f, 3, 2, i));
            }
            assert_eq!(list[3].apply(&t, &f), unit_element(&f, 3, 2));
            done += 1;
        }
    }

    #[test]
    fn collineation_round_trip_and_singular() {
        let f = Gf::new(3, 1).unwrap();
        let s = standard_element(&f, 2, 2, 0);
        assert_eq!(apply_collineation(&f, &Matrix::identity(4), &s).unwrap(), s);
        let t = Matrix::from_rows(vec![
            vec![1, 2, 0, 1],
            vec![0, 1, 1, 0],
            vec![0, 0, 1, 2],
            vec![1, 0, 0, 1],
        ]);
        let ti = t.inverse(&f).unwrap();
        assert_eq!(s.apply(&ti, &f).apply(&t, &f), s);
        assert!(matches!(
            apply_collineation(&f, &Matrix::zeros(4, 4), &s),
            Err(Error::Singular { .. })
        ));
    }

    proptest! {
        #[test]
        fn modular_law(a in prop::collection::vec(0u32..3, 12), b in prop::collection::vec(0u32..3, 18)) {
            let f = Gf::new(3, 1).unwrap();
            let sa = Subspace::from_rows(&f, 6, Matrix::new(2, 6, a));
            let sb = Subspace::from_rows(&f, 6, Matrix::new(3, 6, b));
            let s = sa.span(&sb, &f);
            let m = sa.meet(&sb, &f);
            prop_assert_eq!(s.rank() + m.rank(), sa.rank() + sb.rank());
            prop_assert!(sa.contains(&m, &f) && sb.contains(&m, &f));
            prop_assert!(s.contains(&sa, &f) && s.contains(&sb, &f));
        }
    }
}
