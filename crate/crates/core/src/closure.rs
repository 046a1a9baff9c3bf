//! Closure and restricted closure of point sets of `PG(2, q)`, and the
//! subplane lemmas built on them.

use std::collections::BTreeSet;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fieldreduction::subplane_v;
use crate::gf::Gf;
use crate::projgeom::{Subspace, SubspaceJson};
use crate::spreads::Spread;

/// A point (or line, dually) of `PG(2, q)` with first nonzero coordinate 1.
pub type Point = [u32; 3];

pub fn normalize(f: &Gf, v: [u32; 3]) -> Option<Point> {
    let lead = v.iter().copied().find(|&x| x != 0)?;
    let inv = f.inv(lead).ok()?;
    Some([f.mul(inv, v[0]), f.mul(inv, v[1]), f.mul(inv, v[2])])
}

fn cross(f: &Gf, a: &Point, b: &Point) -> [u32; 3] {
    let m = |x: u32, y: u32| f.mul(x, y);
    [
        f.sub(m(a[1], b[2]), m(a[2], b[1])),
        f.sub(m(a[2], b[0]), m(a[0], b[2])),
        f.sub(m(a[0], b[1]), m(a[1], b[0])),
    ]
}

/// Line through two distinct points, or intersection of two distinct lines.
pub fn join(f: &Gf, a: &Point, b: &Point) -> Option<Point> {
    normalize(f, cross(f, a, b))
}

pub fn incident(f: &Gf, p: &Point, l: &Point) -> bool {
    let d = f.add(f.add(f.mul(p[0], l[0]), f.mul(p[1], l[1])), f.mul(p[2], l[2]));
    d == 0
}

pub fn collinear(f: &Gf, a: &Point, b: &Point, c: &Point) -> bool {
    match join(f, a, b) {
        Some(l) => incident(f, c, &l),
        None => true,
    }
}

/// Some four points of `s`, no three collinear.
pub fn find_frame(f: &Gf, s: &[Point]) -> Option<[Point; 4]> {
    let m = s.len();
    for a in 0..m {
        for b in a + 1..m {
            for c in b + 1..m {
                if collinear(f, &s[a], &s[b], &s[c]) {
                    continue;
                }
                for d in c + 1..m {
                    if !collinear(f, &s[a], &s[b], &s[d])
                        && !collinear(f, &s[a], &s[c], &s[d])
                        && !collinear(f, &s[b], &s[c], &s[d])
                    {
                        return Some([s[a], s[b], s[c], s[d]]);
                    }
                }
            }
        }
    }
    None
}

/// Repeats: lines from `lines_of(S)`, then `S ∪ {ℓ ∩ ℓ' : ℓ ≠ ℓ'}`, until stable.
/// Keeping `S` in the union makes every step non-decreasing.
fn fixpoint(f: &Gf, start: &[Point], lines_of: impl Fn(&BTreeSet<Point>) -> BTreeSet<Point>) -> BTreeSet<Point> {
    let mut s: BTreeSet<Point> = start.iter().copied().collect();
    loop {
        let lines: Vec<Point> = lines_of(&s).into_iter().collect();
        let mut next = s.clone();
        for i in 0..lines.len() {
            for j in i + 1..lines.len() {
                if let Some(p) = join(f, &lines[i], &lines[j]) {
                    next.insert(p);
                }
            }
        }
        if next.len() == s.len() {
            return s;
        }
        s = next;
    }
}

fn normalize_all(f: &Gf, s: &[Point]) -> Result<Vec<Point>> {
    s.iter()
        .map(|p| normalize(f, *p).ok_or_else(|| Error::Domain("the zero vector is not a point".into())))
        .collect()
}

/// Points of the smallest subgeometry containing `s`, which must contain a frame.
pub fn closure(f: &Gf, s: &[Point]) -> Result<BTreeSet<Point>> {
    let s = normalize_all(f, s)?;
    if find_frame(f, &s).is_none() {
        return Err(Error::Precondition("the point set contains no frame".into()));
    }
    Ok(fixpoint(f, &s, |cur| {
        let pts: Vec<&Point> = cur.iter().collect();
        let mut lines = BTreeSet::new();
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                lines.extend(join(f, pts[i], pts[j]));
            }
        }
        lines
    }))
}

/// Closure using only the lines `<P_i, Q>` with `P_i` a pivot and `Q ∈ S`.
///
/// When the pivots are all of `S`, they are taken to be all points of the
/// current set at every step, which makes the result the ordinary closure.
pub fn restricted_closure(f: &Gf, s: &[Point], pivots: &[Point]) -> Result<BTreeSet<Point>> {
    let s = normalize_all(f, s)?;
    let pivots: BTreeSet<Point> = normalize_all(f, pivots)?.into_iter().collect();
    if let Some(p) = pivots.iter().find(|p| !s.contains(p)) {
        return Err(Error::Precondition(format!("pivot {p:?} is not in the point set")));
    }
    let all = pivots == s.iter().copied().collect::<BTreeSet<Point>>();
    Ok(fixpoint(f, &s, |cur| {
        let mut lines = BTreeSet::new();
        for p in if all { cur } else { &pivots } {
            for q in cur {
                lines.extend(join(f, p, q));
            }
        }
        lines
    }))
}

pub fn random_point<R: Rng>(f: &Gf, rng: &mut R) -> Point {
    loop {
        let v = [rng.gen_range(0..f.order()), rng.gen_range(0..f.order()), rng.gen_range(0..f.order())];
        if let Some(p) = normalize(f, v) {
            return p;
        }
    }
}

/// Four random points, no three collinear.
pub fn random_frame<R: Rng>(f: &Gf, rng: &mut R) -> [Point; 4] {
    loop {
        let pts: Vec<Point> = (0..4).map(|_| random_point(f, rng)).collect();
        if let Some(fr) = find_frame(f, &pts) {
            return fr;
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SubplaneTrial {
    /// `P_1, P_2, Q_1, Q_2`.
    pub frame: [Point; 4],
    pub p3: Point,
    pub restricted_off_line: usize,
    pub closure_off_line: usize,
    pub equal: bool,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SubplaneReport {
    pub q: u32,
    pub p: u32,
    pub seed: u64,
    pub trials: usize,
    pub passed: usize,
    pub pass: bool,
    pub first_failure: Option<SubplaneTrial>,
}

/// For the frame `P_1, P_2, Q_1, Q_2` and `P_3 = P_1P_2 ∩ Q_1Q_2`: the restricted
/// closure of `S = {P_1, P_2, Q_1, Q_2, P_3}` with pivots `{P_1, P_2, P_3}`,
/// off the line `P_1P_2`, is compared with the closure of `S` off that line.
pub fn subplane_trial(f: &Gf, frame: [Point; 4]) -> Result<SubplaneTrial> {
    let [p1, p2, q1, q2] = frame;
    let l12 = join(f, &p1, &p2).ok_or_else(|| Error::Domain("P_1 = P_2".into()))?;
    let m12 = join(f, &q1, &q2).ok_or_else(|| Error::Domain("Q_1 = Q_2".into()))?;
    let p3 = join(f, &l12, &m12).ok_or_else(|| Error::Domain("P_1P_2 = Q_1Q_2".into()))?;
    let s = [p1, p2, q1, q2, p3];
    let off = |set: BTreeSet<Point>| -> BTreeSet<Point> { set.into_iter().filter(|x| !incident(f, x, &l12)).collect() };
    let rest = off(restricted_closure(f, &s, &[p1, p2, p3])?);
    let clo = off(closure(f, &s)?);
    let p = f.p() as usize;
    let equal = rest == clo;
    Ok(SubplaneTrial {
        frame,
        p3,
        restricted_off_line: rest.len(),
        closure_off_line: clo.len(),
        equal,
        pass: equal && rest.len() == p * p,
    })
}

pub fn verify_subplane_lemma(f: &Gf, trials: usize, seed: u64) -> Result<SubplaneReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut passed = 0;
    let mut first_failure = None;
    for _ in 0..trials {
        let t = subplane_trial(f, random_frame(f, &mut rng))?;
        if t.pass {
            passed += 1;
        } else if first_failure.is_none() {
            first_failure = Some(t);
        }
    }
    Ok(SubplaneReport { q: f.order(), p: f.p(), seed, trials, passed, pass: passed == trials, first_failure })
}

#[derive(Clone, Debug, Serialize)]
pub struct SubplaneFieldReductionReport {
    pub holds: bool,
    /// Elements of `V_p(S_1, S_2, R_1, R_2)` outside `<S_1, S_2>`.
    pub checked: usize,
    pub witness: Option<SubspaceJson>,
}

/// Checks that every element of `V_p(S_1, S_2, R_1, R_2)` off `<S_1, S_2>` lies in
/// the spread, after confirming the hypotheses: `r = 3`; all five are spread
/// elements; `S_1, S_2, S_3` are normal with `S_3 ⊂ <S_1, S_2>`; and
/// `<R_1, R_2> ∩ <S_1, S_2> = S_3`.
pub fn verify_subplane_in_spread(
    spread: &Spread,
    s: [&Subspace; 3],
    r1: &Subspace,
    r2: &Subspace,
) -> Result<SubplaneFieldReductionReport> {
    let f = spread.field();
    if spread.r() != 3 {
        return Err(Error::Precondition("the spread must live in PG(3n-1, q)".into()));
    }
    for (name, e) in [("S_1", s[0]), ("S_2", s[1]), ("S_3", s[2]), ("R_1", r1), ("R_2", r2)] {
        if !spread.contains(e) {
            return Err(Error::Precondition(format!("{name} is not a spread element")));
        }
    }
    for (name, e) in [("S_1", s[0]), ("S_2", s[1]), ("S_3", s[2])] {
        if !spread.is_normal_element(e)? {
            return Err(Error::Precondition(format!("{name} is not a normal element")));
        }
    }
    let pi0 = s[0].span(s[1], f);
    if pi0.rank() != 2 * spread.n() || !pi0.contains(s[2], f) {
        return Err(Error::Precondition("S_1, S_2, S_3 do not lie in one (2n-1)-space".into()));
    }
    if r1 == r2 || r1.span(r2, f).meet(&pi0, f) != *s[2] {
        return Err(Error::Precondition("<R_1, R_2> does not meet <S_1, S_2> exactly in S_3".into()));
    }
    subplane_membership(spread, s[0], s[1], r1, r2)
}

/// Membership of `V_p(S_1, S_2, R_1, R_2) \ <S_1, S_2>` in the spread, with no
/// hypothesis checks beyond those of `V_p` itself.
pub fn subplane_membership(
    spread: &Spread,
    s1: &Subspace,
    s2: &Subspace,
    r1: &Subspace,
    r2: &Subspace,
) -> Result<SubplaneFieldReductionReport> {
    let f = spread.field();
    let pi0 = s1.span(s2, f);
    let v = subplane_v(f, s1, s2, r1, r2, f.p())?;
    let off: Vec<&Subspace> = v.iter().filter(|x| !pi0.contains(x, f)).collect();
    let witness = off.iter().find(|x| !spread.contains(x)).map(|x| x.to_json(spread.q()));
    Ok(SubplaneFieldReductionReport { holds: witness.is_none(), checked: off.len(), witness })
}

/// Pairs `(R_1, R_2)` of element indices with `<R_1, R_2> ∩ <S_1, S_2> = S_3`.
pub fn admissible_pairs(spread: &Spread, s1: &Subspace, s2: &Subspace, s3: &Subspace) -> Vec<(usize, usize)> {
    let f = spread.field();
    let pi0 = s1.span(s2, f);
    let els = spread.elements();
    let mut out = Vec::new();
    for a in 0..els.len() {
        if pi0.contains(&els[a], f) {
            continue;
        }
        for b in a + 1..els.len() {
            if !pi0.contains(&els[b], f) && els[a].span(&els[b], f).meet(&pi0, f) == *s3 {
                out.push((a, b));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn std_frame() -> [Point; 4] {
        [[1, 0, 0], [0, 0, 1], [0, 1, 0], [1, 1, 1]]
    }

    fn subplane_points(f: &Gf, q0: u32) -> BTreeSet<Point> {
        let sub = f.subfield_elements(q0 as u64).unwrap();
        let mut out = BTreeSet::new();
        for &a in &sub {
            for &b in &sub {
                for &c in &sub {
                    out.extend(normalize(f, [a, b, c]));
                }
            }
        }
        out
    }

    #[test]
    fn prime_plane_closure_is_everything() {
        for p in [2, 3, 5] {
            let f = Gf::new(p, 1).unwrap();
            let c = closure(&f, &std_frame()).unwrap();
            assert_eq!(c.len() as u32, p * p + p + 1);
        }
    }

    #[test]
    fn closure_in_pg29_is_the_base_subplane() {
        let f = Gf::new(3, 2).unwrap();
        let c = closure(&f, &std_frame()).unwrap();
        assert_eq!(c.len(), 13);
        assert_eq!(c, subplane_points(&f, 3));
        let v: Vec<Point> = c.iter().copied().collect();
        assert_eq!(closure(&f, &v).unwrap(), c);
    }

    #[test]
    fn frameless_sets_are_rejected() {
        let f = Gf::new(3, 1).unwrap();
        assert!(closure(&f, &[[1, 0, 0], [0, 1, 0], [1, 1, 0], [0, 0, 1]]).is_err());
    }

    #[test]
    fn restricted_with_all_pivots_equals_closure() {
        let f = Gf::new(5, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..5 {
            let fr = random_frame(&f, &mut rng);
            assert_eq!(restricted_closure(&f, &fr, &fr).unwrap(), closure(&f, &fr).unwrap());
        }
    }

    #[test]
    fn restricted_degenerate_cases() {
        let f = Gf::new(3, 1).unwrap();
        let s = [[1, 0, 0], [0, 1, 0]];
        assert_eq!(restricted_closure(&f, &s, &[[1, 0, 0]]).unwrap().len(), 2);
        assert!(restricted_closure(&f, &s, &[[0, 0, 1]]).is_err());
    }

    #[test]
    fn restricted_is_inside_closure() {
        let f = Gf::new(3, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..10 {
            let fr = random_frame(&f, &mut rng);
            let extra = random_point(&f, &mut rng);
            let mut s = fr.to_vec();
            s.push(extra);
            let c = closure(&f, &s).unwrap();
            let r = restricted_closure(&f, &s, &fr[..2]).unwrap();
            assert!(r.is_subset(&c));
        }
    }

    #[test]
    fn subplane_trial_on_standard_frame() {
        let f = Gf::new(3, 2).unwrap();
        let t = subplane_trial(&f, std_frame()).unwrap();
        assert_eq!(t.p3, [1, 0, 1]);
        assert_eq!(t.restricted_off_line, 9);
        assert!(t.pass);
    }

    #[test]
    fn subplane_lemma_small_batch() {
        let f = Gf::new(3, 2).unwrap();
        let rep = verify_subplane_lemma(&f, 10, 0).unwrap();
        assert!(rep.pass);
    }
}
