//! Field reduction `PG(r-1, q^n) → PG(rn-1, q)`, Desarguesian spreads, and
//! the images of subfield sublines (`R_{q0}`) and subplanes (`V_{q0}`).

use crate::error::{Error, Result};
use crate::gf::{FieldTower, Gf};
use crate::linalg::Matrix;
use crate::projgeom::{frame_normalization, Subspace};
use crate::spreads::Spread;

/// The `(n-1)`-space `{(a_1 x, ..., a_r x) : x ∈ F_{q^n}}` of `PG(rn-1, q)`.
///
/// `point` holds the coordinates `a_i` as codes of `F_{q^n}`.
pub fn field_reduce_point(tower: &FieldTower, point: &[u32]) -> Result<Subspace> {
    if point.iter().all(|&a| a == 0) {
        return Err(Error::Domain("the zero vector is not a point".into()));
    }
    let blocks: Vec<Matrix> = point.iter().map(|&a| tower.mult_matrix(a)).collect();
    Ok(Subspace::from_blocks(tower.base(), &blocks))
}

/// Normalized points of `PG(r-1, q^n)` (first nonzero coordinate 1).
pub fn ext_points(tower: &FieldTower, r: usize) -> Vec<Vec<u32>> {
    let order = tower.ext().order();
    let mut out = Vec::new();
    for lead in 0..r {
        let tail = r - lead - 1;
        let count = (order as u64).pow(tail as u32);
        for mut code in 0..count {
            let mut v = vec![0u32; r];
            v[lead] = 1;
            for slot in v.iter_mut().skip(lead + 1) {
                *slot = (code % order as u64) as u32;
                code /= order as u64;
            }
            out.push(v);
        }
    }
    out
}

/// The Desarguesian `(n-1)`-spread of `PG(rn-1, q)`.
pub fn desarguesian_spread(tower: &FieldTower, r: usize) -> Result<Spread> {
    if r == 0 {
        return Err(Error::Domain("r must be positive".into()));
    }
    let elements = ext_points(tower, r)
        .iter()
        .map(|p| field_reduce_point(tower, p))
        .collect::<Result<Vec<_>>>()?;
    Spread::checked(tower.base(), r, tower.n() as usize, elements, "desarguesian")
}

fn check_q0(f: &Gf, q0: u32) -> Result<Vec<u32>> {
    f.subfield_elements(q0 as u64)
}

/// `R_{q0}(A, B, C)`: the `q0 + 1` elements `{(aI, bI)}`, `(a, b) ∈ F_{q0}^2`,
/// pulled back through the frame normalization of `(A, B, C)`.
pub fn regulus(f: &Gf, a: &Subspace, b: &Subspace, c: &Subspace, q0: u32) -> Result<Vec<Subspace>> {
    let sub = check_q0(f, q0)?;
    let n = a.rank();
    if a.ambient_dim() != 2 * n || b.rank() != n || c.rank() != n {
        return Err(Error::Domain("regulus needs three (n-1)-spaces of PG(2n-1, q)".into()));
    }
    for (x, y) in [(a, b), (a, c), (b, c)] {
        if !x.is_disjoint(y, f) {
            return Err(Error::Domain("regulus needs mutually disjoint subspaces".into()));
        }
    }
    let t = frame_normalization(f, &[a.clone(), b.clone(), c.clone()])?;
    let tinv = t.inverse(f)?;
    let mut coords: Vec<(u32, u32)> = vec![(0, 1)];
    coords.extend(sub.iter().map(|&s| (1, s)));
    let mut out: Vec<Subspace> = coords
        .into_iter()
        .map(|(x, y)| {
            Subspace::from_blocks(f, &[Matrix::scalar(n, x), Matrix::scalar(n, y)]).apply(&tinv, f)
        })
        .collect();
    out.sort();
    Ok(out)
}

/// `V_{q0}(A, B, C, D)`: the `q0² + q0 + 1` elements `{(aI, bI, cI)}` pulled back
/// through the frame normalization sending `A, B, C` to the coordinate blocks
/// and `D` to `(I, I, I)`.
pub fn subplane_v(
    f: &Gf,
    a: &Subspace,
    b: &Subspace,
    c: &Subspace,
    d: &Subspace,
    q0: u32,
) -> Result<Vec<Subspace>> {
    let sub = check_q0(f, q0)?;
    let n = a.rank();
    if a.ambient_dim() != 3 * n {
        return Err(Error::Domain("V needs (n-1)-spaces of PG(3n-1, q)".into()));
    }
    let t = frame_normalization(f, &[a.clone(), b.clone(), c.clone(), d.clone()])?;
    let tinv = t.inverse(f)?;
    let mut triples = vec![(0, 0, 1)];
    for &y in &sub {
        triples.push((0, 1, y));
    }
    for &y in &sub {
        for &z in &sub {
            triples.push((1, y, z));
        }
    }
    let mut out: Vec<Subspace> = triples
        .into_iter()
        .map(|(x, y, z)| {
            Subspace::from_blocks(
                f,
                &[Matrix::scalar(n, x), Matrix::scalar(n, y), Matrix::scalar(n, z)],
            )
            .apply(&tinv, f)
        })
        .collect();
    out.sort();
    Ok(out)
}
