//! Spreads of `PG(rn-1, q)`: validation, normal elements, and the
//! constructions `S_r(M)`, `T_3(M, M_0)` and `U_r(M, M_1, ..., M_{r-1})`.

use std::collections::HashSet;
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::fieldreduction::regulus;
use crate::gf::Gf;
use crate::linalg::Matrix;
use crate::projgeom::{
    frame_normalization, in_general_position, solve_in_basis, standard_element, vec_from_index, ProjPoint,
    Subspace, SubspaceJson,
};
use crate::spreadsets::SpreadSet;

const NONE: u32 = u32::MAX;

/// Arithmetic on packed vector indices of `F_q^dim` (see [`crate::projgeom::vec_index`]).
#[derive(Clone, Debug)]
pub struct PackedSpace {
    q: u32,
    dim: usize,
    size: u32,
}

impl PackedSpace {
    pub fn new(q: u32, dim: usize) -> Self {
        PackedSpace { q, dim, size: q.pow(dim as u32) }
    }

    pub fn size(&self) -> u32 {
        self.size
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn add(&self, f: &Gf, mut a: u32, mut b: u32) -> u32 {
        let mut out = 0;
        let mut pw = 1;
        for _ in 0..self.dim {
            out += f.add(a % self.q, b % self.q) * pw;
            a /= self.q;
            b /= self.q;
            pw *= self.q;
        }
        out
    }

    #[inline]
    pub fn sub(&self, f: &Gf, mut a: u32, mut b: u32) -> u32 {
        let mut out = 0;
        let mut pw = 1;
        for _ in 0..self.dim {
            out += f.sub(a % self.q, b % self.q) * pw;
            a /= self.q;
            b /= self.q;
            pw *= self.q;
        }
        out
    }

    #[inline]
    pub fn scale(&self, f: &Gf, c: u32, mut a: u32) -> u32 {
        let mut out = 0;
        let mut pw = 1;
        for _ in 0..self.dim {
            out += f.mul(c, a % self.q) * pw;
            a /= self.q;
            pw *= self.q;
        }
        out
    }
}

/// Owner table: for each nonzero packed vector, the index of the element containing it.
#[derive(Clone, Debug)]
pub struct SpreadIndex {
    pub owner: Vec<u32>,
    pub element_vectors: Vec<Vec<u32>>,
}

#[derive(Debug)]
pub struct Spread {
    field: Gf,
    r: usize,
    n: usize,
    elements: Vec<Subspace>,
    provenance: String,
    index: OnceLock<SpreadIndex>,
}

impl Clone for Spread {
    fn clone(&self) -> Self {
        Spread {
            field: self.field.clone(),
            r: self.r,
            n: self.n,
            elements: self.elements.clone(),
            provenance: self.provenance.clone(),
            index: self.index.clone(),
        }
    }
}

impl PartialEq for Spread {
    fn eq(&self, other: &Self) -> bool {
        self.q() == other.q() && self.r == other.r && self.n == other.n && self.elements == other.elements
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SpreadCheck {
    pub valid: bool,
    pub reason: Option<String>,
    pub expected_count: u64,
    pub count: usize,
    pub meeting_pair: Option<(usize, usize)>,
    pub uncovered_point: Option<Vec<u32>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Desarguesian {
    Yes,
    No,
    Unknown,
}

impl Serialize for Desarguesian {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Desarguesian::Yes => s.serialize_bool(true),
            Desarguesian::No => s.serialize_bool(false),
            Desarguesian::Unknown => s.serialize_str("unknown"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GeneralPosition {
    pub size: usize,
    /// Element indices of one largest set found.
    pub witness: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RegulusClosure {
    pub holds: bool,
    /// `(E_1, E_2)` element indices whose regulus with `E` leaves the spread.
    pub witness_pair: Option<(usize, usize)>,
    pub missing: Option<SubspaceJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpreadJson {
    pub r: usize,
    pub n: usize,
    pub q: u32,
    /// Little-endian coefficients of the monic modulus defining `F_q`.
    pub modulus: Vec<u32>,
    pub provenance: String,
    pub elements: Vec<SubspaceJson>,
}

/// Outcome of normalizing the spread induced in the span of some elements.
#[derive(Clone, Debug)]
pub struct InducedForm {
    /// Induced spread, in span coordinates, after frame normalization.
    pub normalized: Vec<Subspace>,
    /// Spread set read off from the elements with leading block `I`.
    pub spread_set: SpreadSet,
    /// Element index used as the unit of the frame.
    pub unit: usize,
    pub spread_set_valid: bool,
    pub nearfield: bool,
    /// The normalized induced spread coincides with `S_k` of the extracted set.
    pub matches_s_k: bool,
}

impl Spread {
    /// Stores the elements in canonical order; no validation.
    pub fn new(f: &Gf, r: usize, n: usize, mut elements: Vec<Subspace>, provenance: &str) -> Self {
        elements.sort();
        elements.dedup();
        Spread {
            field: f.clone(),
            r,
            n,
            elements,
            provenance: provenance.to_string(),
            index: OnceLock::new(),
        }
    }

    /// [`Spread::new`] followed by [`Spread::validate`].
    pub fn checked(f: &Gf, r: usize, n: usize, elements: Vec<Subspace>, provenance: &str) -> Result<Self> {
        let s = Spread::new(f, r, n, elements, provenance);
        let c = s.validate();
        if !c.valid {
            return Err(Error::InvalidSpread(c.reason.unwrap_or_default()));
        }
        Ok(s)
    }

    pub fn field(&self) -> &Gf {
        &self.field
    }
    pub fn q(&self) -> u32 {
        self.field.order()
    }
    pub fn r(&self) -> usize {
        self.r
    }
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn dim(&self) -> usize {
        self.r * self.n
    }
    pub fn provenance(&self) -> &str {
        &self.provenance
    }
    pub fn elements(&self) -> &[Subspace] {
        &self.elements
    }
    pub fn len(&self) -> usize {
        self.elements.len()
    }
    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn to_json(&self) -> SpreadJson {
        SpreadJson {
            r: self.r,
            n: self.n,
            q: self.q(),
            modulus: self.field.modulus().to_vec(),
            provenance: self.provenance.clone(),
            elements: self.elements.iter().map(|e| e.to_json(self.q())).collect(),
        }
    }

    /// Rebuilds a spread from [`SpreadJson`]; the result is not validated.
    pub fn from_json(j: &SpreadJson) -> Result<Self> {
        let f = Gf::of_order(j.q as u64)?;
        if f.modulus() != j.modulus.as_slice() {
            return Err(Error::Domain(format!("modulus {:?} differs from the canonical {:?}", j.modulus, f.modulus())));
        }
        let elements = j.elements.iter().map(|e| Subspace::from_json(e, &f)).collect::<Result<Vec<_>>>()?;
        Ok(Spread::new(&f, j.r, j.n, elements, &j.provenance))
    }

    pub fn position(&self, e: &Subspace) -> Option<usize> {
        self.elements.binary_search(e).ok()
    }

    pub fn contains(&self, e: &Subspace) -> bool {
        self.position(e).is_some()
    }

    pub fn packed(&self) -> PackedSpace {
        PackedSpace::new(self.q(), self.dim())
    }

    pub fn expected_count(&self) -> u64 {
        let q = self.q() as u64;
        (q.pow(self.dim() as u32) - 1) / (q.pow(self.n as u32) - 1)
    }

    /// Owner table, built on first use. Meaningful only for valid spreads.
    pub fn index(&self) -> &SpreadIndex {
        self.index.get_or_init(|| {
            let size = self.packed().size() as usize;
            let mut owner = vec![NONE; size];
            let element_vectors: Vec<Vec<u32>> =
                self.elements.iter().map(|e| e.vector_indices(&self.field)).collect();
            for (i, vs) in element_vectors.iter().enumerate() {
                for &v in vs.iter().filter(|&&v| v != 0) {
                    if owner[v as usize] == NONE {
                        owner[v as usize] = i as u32;
                    }
                }
            }
            SpreadIndex { owner, element_vectors }
        })
    }

    /// Count, shape, pairwise disjointness and coverage, with witnesses.
    pub fn validate(&self) -> SpreadCheck {
        let f = &self.field;
        let mut check = SpreadCheck {
            valid: false,
            reason: None,
            expected_count: self.expected_count(),
            count: self.elements.len(),
            meeting_pair: None,
            uncovered_point: None,
        };
        if let Some(i) = self.elements.iter().position(|e| e.rank() != self.n || e.ambient_dim() != self.dim()) {
            check.reason = Some(format!("element {i} is not an (n-1)-space of PG(rn-1, q)"));
            return check;
        }
        let size = self.packed().size() as usize;
        let mut owner = vec![NONE; size];
        for (i, e) in self.elements.iter().enumerate() {
            for v in e.vector_indices(f).into_iter().filter(|&v| v != 0) {
                let o = owner[v as usize];
                if o != NONE && check.meeting_pair.is_none() {
                    check.meeting_pair = Some((o as usize, i));
                }
                owner[v as usize] = i as u32;
            }
        }
        if let Some(v) = (1..size).find(|&v| owner[v] == NONE) {
            let coords = vec_from_index(v as u32, self.q(), self.dim());
            check.uncovered_point = ProjPoint::new(f, coords).ok().map(|p| p.coords().to_vec());
        }
        check.reason = if let Some((a, b)) = check.meeting_pair {
            Some(format!("elements {a} and {b} meet"))
        } else if check.uncovered_point.is_some() {
            Some("some point is not covered".into())
        } else if check.count as u64 != check.expected_count {
            Some(format!("{} elements, expected {}", check.count, check.expected_count))
        } else {
            None
        };
        check.valid = check.reason.is_none();
        check
    }

    /// Whether `<E, F>` is partitioned by spread elements for every `F ≠ E`.
    pub fn is_normal_index(&self, e: usize) -> bool {
        let f = &self.field;
        let idx = self.index();
        let packed = self.packed();
        let full = self.q().pow(self.n as u32) - 1;
        let mut counts = vec![0u32; self.elements.len()];
        let mut done = vec![false; self.elements.len()];
        done[e] = true;
        let mut touched = Vec::new();
        for other in 0..self.elements.len() {
            if done[other] {
                continue;
            }
            touched.clear();
            // <E, F> is the direct sum E ⊕ F
            for &a in &idx.element_vectors[e] {
                for &b in &idx.element_vectors[other] {
                    let v = packed.add(f, a, b);
                    if v == 0 {
                        continue;
                    }
                    let o = idx.owner[v as usize] as usize;
                    if counts[o] == 0 {
                        touched.push(o);
                    }
                    counts[o] += 1;
                }
            }
            let partitioned = touched.iter().all(|&o| counts[o] == full);
            for &o in &touched {
                counts[o] = 0;
                done[o] = true;
            }
            if !partitioned {
                return false;
            }
        }
        true
    }

    pub fn is_normal_element(&self, e: &Subspace) -> Result<bool> {
        let i = self
            .position(e)
            .ok_or_else(|| Error::Precondition("subspace is not an element of the spread".into()))?;
        Ok(self.is_normal_index(i))
    }

    /// Indices of all normal elements, ascending.
    pub fn normal_indices(&self) -> Vec<usize> {
        self.index();
        (0..self.elements.len())
            .into_par_iter()
            .filter(|&i| self.is_normal_index(i))
            .collect()
    }

    pub fn normal_elements(&self) -> Vec<Subspace> {
        self.normal_indices().into_iter().map(|i| self.elements[i].clone()).collect()
    }

    /// Largest `k ≤ r + 1` such that `k` of the given elements are in general
    /// position (independent for `k ≤ r`; every `r` of them spanning for `k = r + 1`).
    pub fn max_general_position(&self, candidates: &[usize]) -> GeneralPosition {
        let mut best = Vec::new();
        let mut cur = Vec::new();
        self.gp_search(candidates, 0, &mut cur, &Subspace::empty(self.dim()), &mut best);
        GeneralPosition { size: best.len(), witness: best }
    }

    pub fn max_normal_general_position(&self) -> GeneralPosition {
        self.max_general_position(&self.normal_indices())
    }

    fn gp_search(&self, cands: &[usize], start: usize, cur: &mut Vec<usize>, span: &Subspace, best: &mut Vec<usize>) {
        let f = &self.field;
        let r = self.r;
        if cur.len() > best.len() {
            *best = cur.clone();
        }
        if best.len() == r + 1 {
            return;
        }
        for (pos, &c) in cands.iter().enumerate().skip(start) {
            // remaining candidates cannot beat the best
            if cur.len() + (cands.len() - pos) <= best.len() {
                return;
            }
            let e = &self.elements[c];
            if cur.len() < r {
                let next = span.span(e, f);
                if next.rank() != (cur.len() + 1) * self.n {
                    continue;
                }
                cur.push(c);
                self.gp_search(cands, pos + 1, cur, &next, best);
                cur.pop();
            } else {
                let spans_all = (0..r).all(|skip| {
                    let others = cur.iter().enumerate().filter(|&(j, _)| j != skip).map(|(_, &i)| &self.elements[i]);
                    Subspace::span_all(f, self.dim(), others.chain(std::iter::once(e))).rank() == self.dim()
                });
                if spans_all {
                    cur.push(c);
                    *best = cur.clone();
                    cur.pop();
                    return;
                }
            }
            if best.len() == r + 1 {
                return;
            }
        }
    }

    /// `r > 2`: all elements normal. `r = 2, q > 2`: every regulus of three
    /// elements lies in the spread. `r = 2, q = 2`: undecided by this test.
    pub fn is_desarguesian(&self) -> Desarguesian {
        let f = &self.field;
        match self.r {
            0 | 1 => Desarguesian::Yes,
            2 if self.q() == 2 => Desarguesian::Unknown,
            2 => {
                let m = self.elements.len();
                for a in 0..m {
                    for b in a + 1..m {
                        for c in b + 1..m {
                            let (ea, eb, ec) = (&self.elements[a], &self.elements[b], &self.elements[c]);
                            match regulus(f, ea, eb, ec, self.q()) {
                                Ok(reg) if reg.iter().all(|x| self.contains(x)) => {}
                                _ => return Desarguesian::No,
                            }
                        }
                    }
                }
                Desarguesian::Yes
            }
            _ => {
                self.index();
                if (0..self.elements.len()).into_par_iter().all(|i| self.is_normal_index(i)) {
                    Desarguesian::Yes
                } else {
                    Desarguesian::No
                }
            }
        }
    }

    /// Whether `R_{q0}(E, E_1, E_2) ⊆ S` for all `E_1, E_2 ∈ S`; requires
    /// `r = 2` and a subfield order `q0 > 2`.
    pub fn regulus_closure_at(&self, e: &Subspace, q0: u32) -> Result<RegulusClosure> {
        let f = &self.field;
        if self.r != 2 {
            return Err(Error::Precondition("regulus closure needs a spread of PG(2n-1, q)".into()));
        }
        if q0 <= 2 {
            return Err(Error::Domain(format!("q0 = {q0} must exceed 2")));
        }
        f.subfield_elements(q0 as u64)?;
        let ei = self
            .position(e)
            .ok_or_else(|| Error::Precondition("E is not an element of the spread".into()))?;
        let m = self.elements.len();
        for a in 0..m {
            for b in a + 1..m {
                if a == ei || b == ei {
                    continue;
                }
                let reg = regulus(f, e, &self.elements[a], &self.elements[b], q0)?;
                if let Some(x) = reg.into_iter().find(|x| !self.contains(x)) {
                    return Ok(RegulusClosure {
                        holds: false,
                        witness_pair: Some((a, b)),
                        missing: Some(x.to_json(self.q())),
                    });
                }
            }
        }
        Ok(RegulusClosure { holds: true, witness_pair: None, missing: None })
    }

    /// Elements contained in `pi`.
    pub fn induced(&self, pi: &Subspace) -> Vec<usize> {
        (0..self.elements.len())
            .filter(|&i| pi.contains(&self.elements[i], &self.field))
            .collect()
    }

    /// Normalizes the spread induced in the span of `designated` (at least two
    /// independent elements): the designated elements become the coordinate
    /// blocks, and the first induced element completing a frame becomes the
    /// unit. The spread set is then read off from the elements `(I, A_2, ...)`.
    pub fn induced_normal_form(&self, designated: &[usize]) -> Result<InducedForm> {
        let f = &self.field;
        let k = designated.len();
        let n = self.n;
        if k < 2 {
            return Err(Error::Precondition("need at least two designated elements".into()));
        }
        let basis = designated
            .iter()
            .fold(Matrix::zeros(0, self.dim()), |acc, &i| acc.vstack(self.elements[i].basis()));
        if basis.rank(f) != k * n {
            return Err(Error::NotGeneralPosition);
        }
        let pi = Subspace::from_rows(f, self.dim(), basis.clone());
        let induced = self.induced(&pi);
        let local = |s: &Subspace| -> Result<Subspace> {
            let rows = (0..s.rank())
                .map(|i| solve_in_basis(f, &basis, s.basis().row(i)).ok_or_else(|| Error::Internal("not in span".into())))
                .collect::<Result<Vec<_>>>()?;
            Ok(Subspace::from_rows(f, k * n, Matrix::from_rows(rows)))
        };
        let local_all: Vec<Subspace> = induced.iter().map(|&i| local(&self.elements[i])).collect::<Result<_>>()?;
        let frame_base: Vec<Subspace> = (0..k).map(|i| standard_element(f, k, n, i)).collect();
        let (unit_pos, unit) = local_all
            .iter()
            .enumerate()
            .find(|(_, u)| {
                let mut l = frame_base.clone();
                l.push((*u).clone());
                in_general_position(f, &l, k)
            })
            .ok_or(Error::NotGeneralPosition)?;
        let mut frame = frame_base;
        frame.push(unit.clone());
        let t = frame_normalization(f, &frame)?;
        let mut normalized: Vec<Subspace> = local_all.iter().map(|s| s.apply(&t, f)).collect();
        normalized.sort();
        let identity = Matrix::identity(n);
        let mut mats: HashSet<Matrix> = HashSet::new();
        for s in &normalized {
            if s.basis().submatrix(0, 0, n, n) == identity {
                for j in 1..k {
                    mats.insert(s.basis().submatrix(0, j * n, n, n));
                }
            }
        }
        let spread_set = SpreadSet::new(self.q(), n, mats.into_iter().collect());
        let spread_set_valid = spread_set.validate(f).valid && spread_set.contains_zero() && spread_set.contains_identity();
        let nearfield = spread_set_valid && spread_set.is_nearfield_set(f);
        let matches_s_k = spread_set_valid
            && construct_s_r(f, &spread_set, k).map(|s| s.elements() == normalized.as_slice()).unwrap_or(false);
        Ok(InducedForm {
            normalized,
            spread_set,
            unit: induced[unit_pos],
            spread_set_valid,
            nearfield,
            matches_s_k,
        })
    }
}

fn require_spread_set(f: &Gf, m: &SpreadSet, identity: bool, what: &str) -> Result<()> {
    let c = m.validate(f);
    if !c.valid {
        return Err(Error::InvalidSpreadSet(format!("{what}: {}", c.reason.unwrap_or_default())));
    }
    if !c.contains_zero || (identity && !c.contains_identity) {
        return Err(Error::InvalidSpreadSet(format!(
            "{what} must contain 0{}",
            if identity { " and I" } else { "" }
        )));
    }
    Ok(())
}

/// All `(A_1, ..., A_k)` over `M` whose first nonzero block is `I`.
fn leading_identity_tuples(m: &SpreadSet, k: usize) -> Vec<Vec<Matrix>> {
    let n = m.n();
    let zero = Matrix::zeros(n, n);
    let mut out = Vec::new();
    for lead in 0..k {
        let mut partial: Vec<Vec<Matrix>> = vec![vec![Matrix::identity(n)]];
        for _ in lead + 1..k {
            partial = partial
                .into_iter()
                .flat_map(|p| {
                    m.matrices().iter().map(move |a| {
                        let mut v = p.clone();
                        v.push(a.clone());
                        v
                    })
                })
                .collect();
        }
        for tail in partial {
            let mut v = vec![zero.clone(); lead];
            v.extend(tail);
            out.push(v);
        }
    }
    out
}

/// `S_r(M) = {(A_1, ..., A_r) : A_i ∈ M, first nonzero A_k = I}`; for `r = 2`
/// this is `S(M) = {(I, A)} ∪ {(0, I)}`.
pub fn construct_s_r(f: &Gf, m: &SpreadSet, r: usize) -> Result<Spread> {
    require_spread_set(f, m, true, "M")?;
    if r < 2 {
        return Err(Error::Domain("r must be at least 2".into()));
    }
    let elements = leading_identity_tuples(m, r).iter().map(|b| Subspace::from_blocks(f, b)).collect();
    Spread::checked(f, r, m.n(), elements, "s-r")
}

/// `S(M)` in `PG(2n-1, q)`.
pub fn spread_from_spread_set(f: &Gf, m: &SpreadSet) -> Result<Spread> {
    construct_s_r(f, m, 2)
}

/// `T_3(M, M_0) = {(A, B, I)} ∪ {(I, C, 0)} ∪ {(0, I, 0)}`.
pub fn construct_t3(f: &Gf, m: &SpreadSet, m0: &SpreadSet) -> Result<Spread> {
    require_spread_set(f, m, true, "M")?;
    require_spread_set(f, m0, true, "M_0")?;
    if m.n() != m0.n() {
        return Err(Error::Domain("M and M_0 have different sizes".into()));
    }
    let n = m.n();
    let (i, z) = (Matrix::identity(n), Matrix::zeros(n, n));
    let mut elements = Vec::new();
    for a in m.matrices() {
        for b in m.matrices() {
            elements.push(Subspace::from_blocks(f, &[a.clone(), b.clone(), i.clone()]));
        }
    }
    for c in m0.matrices() {
        elements.push(Subspace::from_blocks(f, &[i.clone(), c.clone(), z.clone()]));
    }
    elements.push(Subspace::from_blocks(f, &[z.clone(), i.clone(), z]));
    Spread::checked(f, 3, n, elements, "t3")
}

/// The elements `(I, 0, 0)`, `(I, I, 0)`, `(0, I, 0)` of `T_3`.
pub fn t3_designated(f: &Gf, n: usize) -> [Subspace; 3] {
    let (i, z) = (Matrix::identity(n), Matrix::zeros(n, n));
    [
        Subspace::from_blocks(f, &[i.clone(), z.clone(), z.clone()]),
        Subspace::from_blocks(f, &[i.clone(), i.clone(), z.clone()]),
        Subspace::from_blocks(f, &[z.clone(), i, z]),
    ]
}

/// `U_r(M, M_1, ..., M_{r-1}) = {(0, A_1, ..., A_{r-1}) : A_i ∈ M} ∪ {(I, B_1, ..., B_{r-1}) : B_i ∈ M_i}`.
pub fn construct_u_r(f: &Gf, m: &SpreadSet, ms: &[SpreadSet]) -> Result<Spread> {
    require_spread_set(f, m, true, "M")?;
    if !m.is_nearfield_set(f) {
        return Err(Error::Precondition("M must be closed under multiplication".into()));
    }
    if ms.is_empty() {
        return Err(Error::Domain("need at least one M_i".into()));
    }
    for (i, mi) in ms.iter().enumerate() {
        require_spread_set(f, mi, false, &format!("M_{}", i + 1))?;
        if mi.n() != m.n() {
            return Err(Error::Domain("spread sets have different sizes".into()));
        }
    }
    let n = m.n();
    let r = ms.len() + 1;
    let z = Matrix::zeros(n, n);
    let mut elements = Vec::new();
    for tuple in leading_identity_tuples(m, r - 1) {
        let mut blocks = vec![z.clone()];
        blocks.extend(tuple);
        elements.push(Subspace::from_blocks(f, &blocks));
    }
    let mut tuples: Vec<Vec<Matrix>> = vec![vec![Matrix::identity(n)]];
    for mi in ms {
        tuples = tuples
            .into_iter()
            .flat_map(|t| {
                mi.matrices().iter().map(move |b| {
                    let mut v = t.clone();
                    v.push(b.clone());
                    v
                })
            })
            .collect();
    }
    elements.extend(tuples.iter().map(|b| Subspace::from_blocks(f, b)));
    Spread::checked(f, r, n, elements, "u-r")
}

/// The standard elements in blocks `1..r` of `U_r`.
pub fn u_r_designated(f: &Gf, r: usize, n: usize) -> Vec<Subspace> {
    (1..r).map(|i| standard_element(f, r, n, i)).collect()
}
