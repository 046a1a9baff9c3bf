//! Matrix spread sets and the quasifields they coordinatize.
//!
//! A spread set over `F_q` is a family of `q^n` matrices of size `n×n` whose
//! pairwise differences are invertible. Fixing `e = (1, 0, ..., 0)` turns a
//! spread set containing `0` and `I` into a right quasifield on `F_q^n` with
//! `x * y = x·M_y`, where `M_y` is the unique member with `e·M_y = y`.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::sync::Mutex;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gf::{prime_factors, prime_power, FieldTower, Gf};
use crate::linalg::{Matrix, MatrixJson};
use crate::projgeom::{vec_from_index, vec_index};

/// Parameters `(q, n)` of the seven nearfields that are not Dickson
/// nearfields; `(11, 2)` carries two of them.
pub const EXCEPTIONAL_NEARFIELDS: [(u32, u32); 7] =
    [(5, 2), (7, 2), (11, 2), (11, 2), (23, 2), (29, 2), (59, 2)];

pub const DEFAULT_SEARCH_BUDGET: u64 = 1 << 16;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpreadSet {
    q: u32,
    n: usize,
    matrices: Vec<Matrix>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SpreadSetCheck {
    pub valid: bool,
    pub reason: Option<String>,
    /// Indices (into the sorted matrix list) of the first offending pair.
    pub violating_pair: Option<(usize, usize)>,
    pub contains_zero: bool,
    pub contains_identity: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpreadSetFlags {
    pub contains_zero: bool,
    pub contains_identity: bool,
    pub nearfield: bool,
    pub semifield: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpreadSetJson {
    pub q: u32,
    pub n: usize,
    pub flags: SpreadSetFlags,
    pub matrices: Vec<MatrixJson>,
}

impl SpreadSet {
    /// Stores the matrices in canonical (sorted) order; no validation.
    pub fn new(q: u32, n: usize, mut matrices: Vec<Matrix>) -> Self {
        matrices.sort();
        SpreadSet { q, n, matrices }
    }

    /// `{ x ↦ x·a : a ∈ F_{q^n} }`, the spread set of the field `F_{q^n}`.
    pub fn field(tower: &FieldTower) -> Self {
        let m = tower.ext().elements().map(|a| tower.mult_matrix(a)).collect();
        SpreadSet::new(tower.q(), tower.n() as usize, m)
    }

    pub fn q(&self) -> u32 {
        self.q
    }
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn matrices(&self) -> &[Matrix] {
        &self.matrices
    }
    pub fn len(&self) -> usize {
        self.matrices.len()
    }
    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    pub fn contains(&self, m: &Matrix) -> bool {
        self.matrices.binary_search(m).is_ok()
    }

    pub fn contains_zero(&self) -> bool {
        self.contains(&Matrix::zeros(self.n, self.n))
    }

    pub fn contains_identity(&self) -> bool {
        self.contains(&Matrix::identity(self.n))
    }

    /// Checks size `q^n`, shape, distinctness and invertible differences.
    pub fn validate(&self, f: &Gf) -> SpreadSetCheck {
        let mut check = SpreadSetCheck {
            valid: false,
            reason: None,
            violating_pair: None,
            contains_zero: self.contains_zero(),
            contains_identity: self.contains_identity(),
        };
        let expected = (self.q as usize).pow(self.n as u32);
        if f.order() != self.q {
            check.reason = Some(format!("field of order {} given for q = {}", f.order(), self.q));
            return check;
        }
        if self.matrices.len() != expected {
            check.reason = Some(format!("{} matrices, expected {expected}", self.matrices.len()));
            return check;
        }
        if let Some(i) = self.matrices.iter().position(|m| m.rows() != self.n || m.cols() != self.n) {
            check.reason = Some(format!("matrix {i} is not {0}x{0}", self.n));
            return check;
        }
        for i in 0..self.matrices.len() {
            for j in i + 1..self.matrices.len() {
                if self.matrices[i].sub(&self.matrices[j], f).det(f) == 0 {
                    check.reason = Some(if self.matrices[i] == self.matrices[j] {
                        "repeated matrix".into()
                    } else {
                        "singular difference".into()
                    });
                    check.violating_pair = Some((i, j));
                    return check;
                }
            }
        }
        check.valid = true;
        check
    }

    fn require_valid_with_identity(&self, f: &Gf) -> Result<()> {
        let c = self.validate(f);
        if !c.valid {
            return Err(Error::InvalidSpreadSet(c.reason.unwrap_or_default()));
        }
        if !c.contains_zero || !c.contains_identity {
            return Err(Error::InvalidSpreadSet("spread set must contain 0 and I".into()));
        }
        Ok(())
    }

    /// Closed under products (the multiplicative criterion for nearfields).
    pub fn is_nearfield_set(&self, f: &Gf) -> bool {
        let set: HashSet<&Matrix> = self.matrices.iter().collect();
        self.matrices
            .iter()
            .all(|a| self.matrices.iter().all(|b| set.contains(&a.mul(b, f))))
    }

    /// Closed under sums (the additive criterion for semifields).
    pub fn is_semifield_set(&self, f: &Gf) -> bool {
        let set: HashSet<&Matrix> = self.matrices.iter().collect();
        self.matrices
            .iter()
            .all(|a| self.matrices.iter().all(|b| set.contains(&a.add(b, f))))
    }

    /// `{X ∈ M : X = 0 or M·X = M}`.
    pub fn right_nucleus(&self, f: &Gf) -> Vec<Matrix> {
        let set: HashSet<&Matrix> = self.matrices.iter().collect();
        self.matrices
            .iter()
            .filter(|x| x.is_zero() || self.matrices.iter().all(|m| set.contains(&m.mul(x, f))))
            .cloned()
            .collect()
    }

    /// `{X ∈ M : X = 0 or X·M = M}`.
    pub fn middle_nucleus(&self, f: &Gf) -> Vec<Matrix> {
        let set: HashSet<&Matrix> = self.matrices.iter().collect();
        self.matrices
            .iter()
            .filter(|x| x.is_zero() || self.matrices.iter().all(|m| set.contains(&x.mul(m, f))))
            .cloned()
            .collect()
    }

    /// Elements of both nuclei commuting with every member.
    pub fn center(&self, f: &Gf) -> Vec<Matrix> {
        let mid: HashSet<Matrix> = self.middle_nucleus(f).into_iter().collect();
        self.right_nucleus(f)
            .into_iter()
            .filter(|x| mid.contains(x))
            .filter(|x| self.matrices.iter().all(|y| y.mul(x, f) == x.mul(y, f)))
            .collect()
    }

    pub fn flags(&self, f: &Gf) -> SpreadSetFlags {
        SpreadSetFlags {
            contains_zero: self.contains_zero(),
            contains_identity: self.contains_identity(),
            nearfield: self.is_nearfield_set(f),
            semifield: self.is_semifield_set(f),
        }
    }

    pub fn to_json(&self, f: &Gf) -> SpreadSetJson {
        SpreadSetJson {
            q: self.q,
            n: self.n,
            flags: self.flags(f),
            matrices: self.matrices.iter().map(|m| m.to_json(self.q)).collect(),
        }
    }
}

/// Vector addition table of `F_q^n` on packed indices.
fn vector_add_table(f: &Gf, n: usize) -> Vec<u32> {
    let q = f.order();
    let order = q.pow(n as u32);
    let vecs: Vec<Vec<u32>> = (0..order).map(|i| vec_from_index(i, q, n)).collect();
    let mut t = vec![0u32; (order * order) as usize];
    for a in 0..order as usize {
        for b in 0..order as usize {
            let s: Vec<u32> = vecs[a].iter().zip(&vecs[b]).map(|(&x, &y)| f.add(x, y)).collect();
            t[a * order as usize + b] = vec_index(&s, q);
        }
    }
    t
}

/// A finite structure `(F_q^n, +, *)` given by its multiplication table.
/// Elements are packed vector indices; the quasifield axioms are checked by
/// [`Quasifield::axioms`], not assumed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Quasifield {
    q: u32,
    n: usize,
    order: u32,
    unit: u32,
    mul: Vec<u32>,
    add: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AxiomCheck {
    pub pass: bool,
    /// Offending elements, when `pass` is false.
    pub witness: Option<Vec<u32>>,
}

impl AxiomCheck {
    fn ok() -> Self {
        AxiomCheck { pass: true, witness: None }
    }
    fn fail(w: Vec<u32>) -> Self {
        AxiomCheck { pass: false, witness: Some(w) }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AxiomReport {
    pub additive_group: AxiomCheck,
    pub multiplicative_loop: AxiomCheck,
    pub right_distributive: AxiomCheck,
    pub unique_solutions: AxiomCheck,
    pub associative: AxiomCheck,
    pub left_distributive: AxiomCheck,
    pub commutative: AxiomCheck,
}

impl AxiomReport {
    /// Axioms (i)-(iv) of a right quasifield.
    pub fn is_quasifield(&self) -> bool {
        self.additive_group.pass
            && self.multiplicative_loop.pass
            && self.right_distributive.pass
            && self.unique_solutions.pass
    }
    pub fn is_nearfield(&self) -> bool {
        self.is_quasifield() && self.associative.pass
    }
    pub fn is_semifield(&self) -> bool {
        self.is_quasifield() && self.left_distributive.pass
    }
    pub fn is_field(&self) -> bool {
        self.is_nearfield() && self.left_distributive.pass && self.commutative.pass
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct QuasifieldJson {
    pub q: u32,
    pub n: usize,
    pub order: u32,
    pub unit: u32,
    /// Row-major: entry `x*order + y` is `x * y`.
    pub mul: Vec<u32>,
}

impl Quasifield {
    /// Wraps a raw multiplication table without checking any axiom.
    pub fn from_table(f: &Gf, n: usize, mul: Vec<u32>, unit: u32) -> Result<Self> {
        let q = f.order();
        let order = q.pow(n as u32);
        if mul.len() != (order as usize) * (order as usize) || mul.iter().any(|&x| x >= order) {
            return Err(Error::Domain("multiplication table has the wrong shape".into()));
        }
        Ok(Quasifield { q, n, order, unit, mul, add: vector_add_table(f, n) })
    }

    /// `Q_e(M)` with `e = (1, 0, ..., 0)`; the axioms are verified exhaustively.
    pub fn from_spread_set(f: &Gf, m: &SpreadSet) -> Result<Self> {
        m.require_valid_with_identity(f)?;
        let qf = Self::from_spread_set_unchecked(f, m)?;
        let report = qf.axioms();
        if !report.is_quasifield() {
            return Err(Error::Internal(format!("Q_e(M) failed the quasifield axioms: {report:?}")));
        }
        Ok(qf)
    }

    /// `Q_e(M)` without validating `M` or the resulting axioms.
    pub fn from_spread_set_unchecked(f: &Gf, m: &SpreadSet) -> Result<Self> {
        let q = f.order();
        let n = m.n();
        let order = q.pow(n as u32);
        let mut by_first_row: HashMap<u32, &Matrix> = HashMap::new();
        for mat in m.matrices() {
            if by_first_row.insert(vec_index(mat.row(0), q), mat).is_some() {
                return Err(Error::InvalidSpreadSet("two members share e·M".into()));
            }
        }
        let vecs: Vec<Vec<u32>> = (0..order).map(|i| vec_from_index(i, q, n)).collect();
        let mut mul = vec![0u32; (order * order) as usize];
        for y in 0..order {
            let my = by_first_row
                .get(&y)
                .ok_or_else(|| Error::InvalidSpreadSet(format!("no member with e·M = {y}")))?;
            for x in 0..order {
                mul[(x * order + y) as usize] = vec_index(&my.apply_row(&vecs[x as usize], f), q);
            }
        }
        Self::from_table(f, n, mul, 1)
    }

    pub fn order(&self) -> u32 {
        self.order
    }
    pub fn unit(&self) -> u32 {
        self.unit
    }
    pub fn q(&self) -> u32 {
        self.q
    }
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn mul(&self, x: u32, y: u32) -> u32 {
        self.mul[(x * self.order + y) as usize]
    }

    #[inline]
    pub fn add(&self, x: u32, y: u32) -> u32 {
        self.add[(x * self.order + y) as usize]
    }

    pub fn table(&self) -> &[u32] {
        &self.mul
    }

    /// Exhaustive check of axioms (i)-(iv) plus associativity, left
    /// distributivity and commutativity.
    pub fn axioms(&self) -> AxiomReport {
        let o = self.order;
        let all = || 0..o;

        // (i): addition is vector addition; verify identity, inverses and associativity.
        let additive_group = 'chk: {
            for a in all() {
                if self.add(a, 0) != a || !all().any(|b| self.add(a, b) == 0) {
                    break 'chk AxiomCheck::fail(vec![a]);
                }
                for b in all() {
                    for c in all() {
                        if self.add(self.add(a, b), c) != self.add(a, self.add(b, c)) {
                            break 'chk AxiomCheck::fail(vec![a, b, c]);
                        }
                    }
                }
            }
            AxiomCheck::ok()
        };

        // (ii): unit and unique solvability of a*x = b and y*a = b on nonzero elements.
        let multiplicative_loop = 'chk: {
            for a in all() {
                if self.mul(self.unit, a) != a || self.mul(a, self.unit) != a {
                    break 'chk AxiomCheck::fail(vec![a]);
                }
            }
            let mut seen = vec![false; o as usize];
            for a in 1..o {
                seen.iter_mut().for_each(|s| *s = false);
                for x in 1..o {
                    let v = self.mul(a, x);
                    if v == 0 || seen[v as usize] {
                        break 'chk AxiomCheck::fail(vec![a, x]);
                    }
                    seen[v as usize] = true;
                }
                seen.iter_mut().for_each(|s| *s = false);
                for y in 1..o {
                    let v = self.mul(y, a);
                    if v == 0 || seen[v as usize] {
                        break 'chk AxiomCheck::fail(vec![y, a]);
                    }
                    seen[v as usize] = true;
                }
            }
            AxiomCheck::ok()
        };

        let right_distributive = 'chk: {
            for a in all() {
                for b in all() {
                    let s = self.add(a, b);
                    for c in all() {
                        if self.mul(s, c) != self.add(self.mul(a, c), self.mul(b, c)) {
                            break 'chk AxiomCheck::fail(vec![a, b, c]);
                        }
                    }
                }
            }
            AxiomCheck::ok()
        };

        // (iv): for a != b, x ↦ x*a - x*b is a bijection.
        let neg: Vec<u32> = all().map(|a| all().find(|&b| self.add(a, b) == 0).unwrap_or(0)).collect();
        let unique_solutions = 'chk: {
            let mut seen = vec![false; o as usize];
            for a in all() {
                for b in all() {
                    if a == b {
                        continue;
                    }
                    seen.iter_mut().for_each(|s| *s = false);
                    for x in all() {
                        let d = self.add(self.mul(x, a), neg[self.mul(x, b) as usize]);
                        if seen[d as usize] {
                            break 'chk AxiomCheck::fail(vec![a, b, x]);
                        }
                        seen[d as usize] = true;
                    }
                }
            }
            AxiomCheck::ok()
        };

        let associative = 'chk: {
            for a in all() {
                for b in all() {
                    let ab = self.mul(a, b);
                    for c in all() {
                        if self.mul(ab, c) != self.mul(a, self.mul(b, c)) {
                            break 'chk AxiomCheck::fail(vec![a, b, c]);
                        }
                    }
                }
            }
            AxiomCheck::ok()
        };

        let left_distributive = 'chk: {
            for a in all() {
                for b in all() {
                    for c in all() {
                        if self.mul(a, self.add(b, c)) != self.add(self.mul(a, b), self.mul(a, c)) {
                            break 'chk AxiomCheck::fail(vec![a, b, c]);
                        }
                    }
                }
            }
            AxiomCheck::ok()
        };

        let commutative = 'chk: {
            for a in all() {
                for b in a + 1..o {
                    if self.mul(a, b) != self.mul(b, a) {
                        break 'chk AxiomCheck::fail(vec![a, b]);
                    }
                }
            }
            AxiomCheck::ok()
        };

        AxiomReport {
            additive_group,
            multiplicative_loop,
            right_distributive,
            unique_solutions,
            associative,
            left_distributive,
            commutative,
        }
    }

    /// `K(Q)`: all `k` with `k*(x*y) = (k*x)*y` and `k*(x+y) = k*x + k*y`.
    pub fn kernel(&self) -> Vec<u32> {
        let o = self.order;
        (0..o)
            .filter(|&k| {
                (0..o).all(|x| {
                    let kx = self.mul(k, x);
                    (0..o).all(|y| {
                        self.mul(k, self.mul(x, y)) == self.mul(kx, y)
                            && self.mul(k, self.add(x, y)) == self.add(kx, self.mul(k, y))
                    })
                })
            })
            .collect()
    }

    /// `M(Q) = {M_y}` with `x·M_y = x * y`. Requires `x ↦ x * y` to be `F_q`-linear.
    pub fn to_spread_set(&self, f: &Gf) -> Result<SpreadSet> {
        let q = self.q;
        let n = self.n;
        let vecs: Vec<Vec<u32>> = (0..self.order).map(|i| vec_from_index(i, q, n)).collect();
        for lambda in 0..q {
            for x in 0..self.order {
                let lx: Vec<u32> = vecs[x as usize].iter().map(|&c| f.mul(lambda, c)).collect();
                let lx = vec_index(&lx, q);
                for y in 0..self.order {
                    let lhs = self.mul(lx, y);
                    let xy = &vecs[self.mul(x, y) as usize];
                    let rhs: Vec<u32> = xy.iter().map(|&c| f.mul(lambda, c)).collect();
                    if lhs != vec_index(&rhs, q) || self.mul(x, y) != self.mul(x, y) {
                        return Err(Error::Precondition(format!(
                            "F_{q} is not in the kernel: ({lambda}·{x})*{y} != {lambda}·({x}*{y})"
                        )));
                    }
                }
            }
        }
        let mut mats = Vec::with_capacity(self.order as usize);
        for y in 0..self.order {
            let rows: Vec<Vec<u32>> =
                (0..n).map(|i| vecs[self.mul(q.pow(i as u32), y) as usize].clone()).collect();
            mats.push(Matrix::from_rows(rows));
        }
        let s = SpreadSet::new(q, n, mats);
        let c = s.validate(f);
        if !c.valid {
            return Err(Error::InvalidSpreadSet(c.reason.unwrap_or_default()));
        }
        Ok(s)
    }

    pub fn to_json(&self) -> QuasifieldJson {
        QuasifieldJson { q: self.q, n: self.n, order: self.order, unit: self.unit, mul: self.mul.clone() }
    }
}

/// `(q, n)` with every prime divisor of `n` dividing `q - 1`, and
/// `n ≢ 0 (mod 4)` whenever `q ≡ 3 (mod 4)`.
pub fn is_dickson_pair(q: u64, n: u64) -> bool {
    if prime_power(q).is_none() || n == 0 {
        return false;
    }
    if !prime_factors(n).iter().all(|&l| (q - 1).is_multiple_of(l)) {
        return false;
    }
    !(q % 4 == 3 && n.is_multiple_of(4))
}

pub fn is_exceptional_nearfield_order(q: u32, n: u32) -> bool {
    EXCEPTIONAL_NEARFIELDS.contains(&(q, n))
}

/// For each residue `m mod n`, the index `j` with `(q^j - 1)/(q - 1) ≡ m`.
fn dickson_exponents(q: u64, n: u64) -> Result<Vec<u32>> {
    let mut map = vec![u32::MAX; n as usize];
    let mut s = 0u64; // (q^j - 1)/(q - 1) mod n
    let mut qj = 1u64; // q^j mod n
    for j in 0..n {
        let r = (s % n) as usize;
        if map[r] != u32::MAX {
            return Err(Error::Precondition(format!("({q}, {n}) does not give distinct Dickson residues")));
        }
        map[r] = j as u32;
        s = (s + qj) % n;
        qj = (qj * q) % n;
    }
    Ok(map)
}

/// Spread set of the Dickson nearfield `x ∘ y = x^{q^j}·y`, where `j` is fixed by
/// `dlog(y) ≡ (q^j - 1)/(q - 1) (mod n)`.
pub fn dickson_spread_set(tower: &FieldTower) -> Result<SpreadSet> {
    let q = tower.q() as u64;
    let n = tower.n() as u64;
    if !is_dickson_pair(q, n) {
        return Err(Error::Precondition(format!("({q}, {n}) is not a Dickson number pair")));
    }
    let exps = dickson_exponents(q, n)?;
    let e = tower.ext();
    let nn = n as usize;
    let mut mats = vec![Matrix::zeros(nn, nn)];
    for y in 1..e.order() {
        let m = e.dlog(y)? as u64 % n;
        let j = exps[m as usize];
        let frob = q.pow(j);
        let rows: Vec<Vec<u32>> = (0..nn)
            .map(|i| tower.to_coords(e.mul(e.pow(e.exp(i as u64), frob), y)))
            .collect();
        mats.push(Matrix::from_rows(rows));
    }
    Ok(SpreadSet::new(tower.q(), nn, mats))
}

/// The Dickson nearfield of order `q^n`, validated exhaustively (quasifield
/// axioms and associativity). If the construction ever failed validation the
/// first non-field multiplicatively closed set from the exhaustive search is
/// used instead.
pub fn dickson_nearfield(tower: &FieldTower, budget: u64) -> Result<(SpreadSet, Quasifield)> {
    let f = tower.base();
    let n = tower.n() as usize;
    let set = dickson_spread_set(tower)?;
    // small orders are also cross-checked against the exhaustive search,
    // which is skipped when it does not fit the budget
    let small = (tower.q() as u64).pow(n as u32) <= 81;
    let searched = match small {
        true => match search_closed_spread_sets(f, n, Closure::Multiplication, budget) {
            Ok(found) => Some(found),
            Err(Error::Budget { .. }) => None,
            Err(e) => return Err(e),
        },
        false => None,
    };
    if set.validate(f).valid && searched.as_ref().is_none_or(|found| found.contains(&set)) {
        let qf = Quasifield::from_spread_set(f, &set)?;
        if qf.axioms().is_nearfield() {
            return Ok((set, qf));
        }
    }
    let found = match searched {
        Some(found) => found,
        None => search_closed_spread_sets(f, n, Closure::Multiplication, budget)?,
    };
    let fallback = found
        .into_iter()
        .find(|s| !s.is_semifield_set(f))
        .ok_or_else(|| Error::Internal("no proper nearfield spread set found".into()))?;
    let qf = Quasifield::from_spread_set(f, &fallback)?;
    Ok((fallback, qf))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Closure {
    Multiplication,
    Addition,
}

impl std::str::FromStr for Closure {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "multiplication" | "mul" => Ok(Closure::Multiplication),
            "addition" | "add" => Ok(Closure::Addition),
            _ => Err(Error::Domain(format!("unknown closure '{s}'"))),
        }
    }
}

/// `n x n` matrices over `F_q` packed as integers (row-major, little-endian
/// digits), with the arithmetic the searches need.
struct MatrixCodes {
    q: u32,
    n: usize,
    add: Vec<u32>,
    sub: Vec<u32>,
    mul: Vec<u32>,
    invertible: Vec<bool>,
}

impl MatrixCodes {
    fn new(f: &Gf, n: usize) -> Self {
        let q = f.order();
        let table = |op: &dyn Fn(u32, u32) -> u32| -> Vec<u32> {
            (0..q * q).map(|i| op(i / q, i % q)).collect()
        };
        let count = q.pow((n * n) as u32);
        let invertible = (0..count).map(|c| Matrix::new(n, n, vec_from_index(c, q, n * n)).is_invertible(f)).collect();
        MatrixCodes {
            q,
            n,
            add: table(&|a, b| f.add(a, b)),
            sub: table(&|a, b| f.sub(a, b)),
            mul: table(&|a, b| f.mul(a, b)),
            invertible,
        }
    }

    fn count(&self) -> u32 {
        self.invertible.len() as u32
    }

    fn digits(&self, mut c: u32) -> [u32; 16] {
        let mut d = [0u32; 16];
        for x in d.iter_mut().take(self.n * self.n) {
            *x = c % self.q;
            c /= self.q;
        }
        d
    }

    fn encode(&self, d: &[u32]) -> u32 {
        d[..self.n * self.n].iter().rev().fold(0, |acc, &x| acc * self.q + x)
    }

    fn entrywise(&self, table: &[u32], a: u32, b: u32) -> u32 {
        let (da, db) = (self.digits(a), self.digits(b));
        let mut out = [0u32; 16];
        for i in 0..self.n * self.n {
            out[i] = table[(da[i] * self.q + db[i]) as usize];
        }
        self.encode(&out)
    }

    fn add(&self, a: u32, b: u32) -> u32 {
        self.entrywise(&self.add, a, b)
    }

    fn sub(&self, a: u32, b: u32) -> u32 {
        self.entrywise(&self.sub, a, b)
    }

    fn scale(&self, c: u32, a: u32) -> u32 {
        let da = self.digits(a);
        let mut out = [0u32; 16];
        for i in 0..self.n * self.n {
            out[i] = self.mul[(c * self.q + da[i]) as usize];
        }
        self.encode(&out)
    }

    fn mul(&self, a: u32, b: u32) -> u32 {
        let (da, db, n, q) = (self.digits(a), self.digits(b), self.n, self.q);
        let mut out = [0u32; 16];
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0;
                for k in 0..n {
                    let p = self.mul[(da[i * n + k] * q + db[k * n + j]) as usize];
                    acc = self.add[(acc * q + p) as usize];
                }
                out[i * n + j] = acc;
            }
        }
        self.encode(&out)
    }

    fn invertible(&self, a: u32) -> bool {
        self.invertible[a as usize]
    }

    fn matrix(&self, c: u32) -> Matrix {
        Matrix::new(self.n, self.n, vec_from_index(c, self.q, self.n * self.n))
    }
}

/// A group or subspace reached by the search: sorted member codes plus the
/// generators added along the way.
#[derive(Clone)]
struct SearchState {
    members: Vec<u32>,
    gens: Vec<u32>,
}

/// Every spread set containing `0` and `I` that is closed under the given
/// operation, deduplicated as sets and returned in canonical order.
///
/// Multiplicatively closed sets are `{0} ∪ G` for a subgroup `G ≤ GL(n, q)`
/// of order `q^n - 1` with invertible differences; additively closed ones are
/// `F_p`-subspaces of size `q^n` whose nonzero members are invertible. Both are
/// enumerated by growing the generated group/subspace one generator at a time,
/// skipping intermediate structures already visited. The subtrees below the
/// first generator run as parallel tasks sharing the visited set.
pub fn search_closed_spread_sets(f: &Gf, n: usize, closure: Closure, budget: u64) -> Result<Vec<SpreadSet>> {
    let q = f.order();
    let needed = (q as u64).saturating_pow((n * n) as u32);
    if needed > budget {
        return Err(Error::Budget { needed, budget });
    }
    let codes = MatrixCodes::new(f, n);
    let target = (q as usize).pow(n as u32);
    let candidates: Vec<u32> = (0..codes.count()).filter(|&c| codes.invertible(c)).collect();
    let identity = codes.encode(Matrix::identity(n).data());
    let group_target = match closure {
        Closure::Multiplication => target - 1,
        Closure::Addition => target,
    };
    let mut members: Vec<u32> = match closure {
        Closure::Multiplication => vec![identity],
        Closure::Addition => (0..f.p()).map(|c| codes.scale(c, identity)).collect(),
    };
    members.sort_unstable();
    let root = SearchState { members, gens: vec![] };

    let visited: Mutex<HashSet<Vec<u32>>> = Mutex::new(HashSet::new());
    let children = |cur: &SearchState| -> Vec<SearchState> {
        let mut out = Vec::new();
        for &x in &candidates {
            if cur.members.binary_search(&x).is_ok() {
                continue;
            }
            if closure == Closure::Multiplication && cur.members.iter().any(|&g| !codes.invertible(codes.sub(x, g))) {
                continue;
            }
            let next = match closure {
                Closure::Multiplication => grow_group(&codes, cur, x, group_target),
                Closure::Addition => grow_subspace(&codes, f.p(), cur, x, group_target),
            };
            let Some(next) = next else { continue };
            if closure == Closure::Multiplication && group_target % next.members.len() != 0 {
                continue;
            }
            if visited.lock().expect("visited set").insert(next.members.clone()) {
                out.push(next);
            }
        }
        out
    };
    let explore = |start: SearchState| -> Vec<Vec<u32>> {
        let mut found = Vec::new();
        let mut stack = vec![start];
        while let Some(cur) = stack.pop() {
            if cur.members.len() == group_target {
                found.push(cur.members);
                continue;
            }
            stack.extend(children(&cur));
        }
        found
    };
    let first = if root.members.len() == group_target { vec![root] } else { children(&root) };
    let found: BTreeSet<Vec<Matrix>> = first
        .into_par_iter()
        .flat_map_iter(explore)
        .collect::<Vec<_>>()
        .into_iter()
        .map(|members| {
            let mut all: Vec<Matrix> = members.iter().map(|&c| codes.matrix(c)).collect();
            if closure == Closure::Multiplication {
                all.push(Matrix::zeros(n, n));
            }
            all.sort();
            all
        })
        .collect();
    Ok(found.into_iter().map(|m| SpreadSet::new(q, n, m)).collect())
}

/// Group generated by the state's generators and `x`, if it stays within
/// `limit` elements and all pairwise differences stay invertible.
fn grow_group(codes: &MatrixCodes, cur: &SearchState, x: u32, limit: usize) -> Option<SearchState> {
    let mut gens = cur.gens.clone();
    gens.push(x);
    let mut member = HashSet::new();
    let mut list = cur.members.clone();
    member.extend(list.iter().copied());
    // right multiplication by the generators closes any finite set to the
    // generated group, starting from the current group
    let mut frontier = list.clone();
    while let Some(a) = frontier.pop() {
        for &g in &gens {
            let p = codes.mul(a, g);
            if member.contains(&p) {
                continue;
            }
            if list.len() >= limit || list.iter().any(|&s| !codes.invertible(codes.sub(s, p))) {
                return None;
            }
            member.insert(p);
            list.push(p);
            frontier.push(p);
        }
    }
    list.sort_unstable();
    Some(SearchState { members: list, gens })
}

/// `F_p`-span of the state and `x`, if all its nonzero members are invertible.
fn grow_subspace(codes: &MatrixCodes, p: u32, cur: &SearchState, x: u32, limit: usize) -> Option<SearchState> {
    if cur.members.len() * p as usize > limit {
        return None;
    }
    let mut out = cur.members.clone();
    for c in 1..p {
        let cx = codes.scale(c, x);
        for &g in &cur.members {
            let s = codes.add(g, cx);
            if !codes.invertible(s) {
                return None;
            }
            out.push(s);
        }
    }
    out.sort_unstable();
    let mut gens = cur.gens.clone();
    gens.push(x);
    Some(SearchState { members: out, gens })
}

/// A random spread set containing `0` (and `I` when `with_identity`), found by
/// randomized backtracking over the invertible `n×n` matrices grouped by first row.
pub fn random_spread_set<R: Rng>(f: &Gf, n: usize, with_identity: bool, rng: &mut R, budget: u64) -> Result<SpreadSet> {
    let q = f.order();
    let needed = (q as u64).saturating_pow((n * n) as u32);
    if needed > budget {
        return Err(Error::Budget { needed, budget });
    }
    let codes = MatrixCodes::new(f, n);
    let rows = q.pow(n as u32);
    // members have pairwise distinct first rows: one slot per nonzero first row
    let mut slots: Vec<Vec<u32>> = vec![Vec::new(); rows as usize];
    for c in 0..codes.count() {
        if codes.invertible(c) {
            slots[(c % rows) as usize].push(c);
        }
    }
    for s in slots.iter_mut() {
        s.shuffle(rng);
    }
    slots[0].clear();
    let mut chosen = vec![0u32];
    if with_identity {
        let id = codes.encode(Matrix::identity(n).data());
        chosen.push(id);
        slots[(id % rows) as usize].clear();
        for s in slots.iter_mut() {
            s.retain(|&c| codes.invertible(codes.sub(c, id)));
        }
    }
    let open: Vec<usize> = (1..rows as usize).filter(|&i| !chosen.iter().any(|&c| c % rows == i as u32)).collect();
    let mut steps = 0u64;
    let limit = budget.saturating_mul(64);
    if fill_slots(&codes, &slots, &open, &mut chosen, &mut steps, limit) {
        Ok(SpreadSet::new(q, n, chosen.into_iter().map(|c| codes.matrix(c)).collect()))
    } else {
        Err(Error::Budget { needed: steps, budget })
    }
}

/// Backtracking over first-row slots, always filling the slot with the fewest
/// remaining candidates.
fn fill_slots(codes: &MatrixCodes, slots: &[Vec<u32>], open: &[usize], chosen: &mut Vec<u32>, steps: &mut u64, limit: u64) -> bool {
    let Some((pos, &slot)) = open.iter().enumerate().min_by_key(|(_, &s)| slots[s].len()) else {
        return true;
    };
    let rest: Vec<usize> = open.iter().enumerate().filter(|&(i, _)| i != pos).map(|(_, &s)| s).collect();
    for &c in &slots[slot] {
        *steps += 1;
        if *steps > limit {
            return false;
        }
        let mut next = slots.to_vec();
        let mut dead = false;
        for &s in &rest {
            next[s].retain(|&d| codes.invertible(codes.sub(d, c)));
            dead |= next[s].is_empty();
        }
        if dead {
            continue;
        }
        chosen.push(c);
        if fill_slots(codes, &next, &rest, chosen, steps, limit) {
            return true;
        }
        chosen.pop();
    }
    false
}
