//! The translation Sperner space `T(S)` of a spread: affine points of
//! `F_q^{rn}`, lines `v + E` for `E ∈ S`, and one parallel class per element.

use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::spreads::{PackedSpace, Spread};

const UNSET: u32 = u32::MAX;

/// A finite incidence structure with a partition of its lines into classes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Design {
    pub num_points: usize,
    pub lines: Vec<Vec<u32>>,
    pub classes: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DesignReport {
    pub pass: bool,
    pub line_size: Option<usize>,
    /// Two points not joined by exactly one line, with the number of joining lines.
    pub pair_witness: Option<(u32, u32, u32)>,
    /// A class and a point it covers other than once, with the cover count.
    pub parallel_witness: Option<(usize, u32, u32)>,
}

/// Every two points on exactly one line; each class partitions the points.
pub fn validate_design(d: &Design) -> DesignReport {
    let v = d.num_points;
    let line_size = d.lines.first().map(|l| l.len()).filter(|&k| d.lines.iter().all(|l| l.len() == k));
    let mut counts = vec![0u8; v * v];
    for l in &d.lines {
        for (i, &a) in l.iter().enumerate() {
            for &b in &l[i + 1..] {
                let (a, b) = (a.min(b) as usize, a.max(b) as usize);
                counts[a * v + b] = counts[a * v + b].saturating_add(1);
            }
        }
    }
    let mut pair_witness = None;
    'outer: for a in 0..v {
        for b in a + 1..v {
            if counts[a * v + b] != 1 {
                pair_witness = Some((a as u32, b as u32, counts[a * v + b] as u32));
                break 'outer;
            }
        }
    }
    let mut parallel_witness = None;
    let mut cover = vec![0u32; v];
    'classes: for (ci, class) in d.classes.iter().enumerate() {
        cover.iter_mut().for_each(|c| *c = 0);
        for &li in class {
            for &p in &d.lines[li] {
                cover[p as usize] += 1;
            }
        }
        for (p, &c) in cover.iter().enumerate() {
            if c != 1 {
                parallel_witness = Some((ci, p as u32, c));
                break 'classes;
            }
        }
    }
    // a design given without classes is checked as a plain 2-design
    let classes_cover_lines = d.classes.is_empty() || {
        let mut seen = vec![0u32; d.lines.len()];
        d.classes.iter().flatten().for_each(|&l| seen[l] += 1);
        seen.iter().all(|&c| c == 1)
    };
    DesignReport {
        pass: line_size.is_some() && pair_witness.is_none() && parallel_witness.is_none() && classes_cover_lines,
        line_size,
        pair_witness,
        parallel_witness,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LineMode {
    /// One pseudo-plane per orbit of points under the line stabilizer.
    Optimized,
    /// Every point off the line.
    Oracle,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NormalLineReport {
    pub line: usize,
    pub class: usize,
    pub normal: bool,
    pub pseudo_planes_checked: usize,
    /// A point whose pseudo-plane with the line is not an affine plane.
    pub witness_point: Option<u32>,
    pub witness_size: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct SpernerSpace {
    spread: Spread,
    packed: PackedSpace,
    cosets: usize,
    coset_of: Vec<u32>,
    lines: Vec<Vec<u32>>,
}

impl SpernerSpace {
    /// Builds `T(S)` and verifies the design and parallelism properties.
    pub fn build(spread: &Spread) -> Result<Self> {
        let check = spread.validate();
        if !check.valid {
            return Err(Error::InvalidSpread(check.reason.unwrap_or_default()));
        }
        let t = Self::build_unchecked(spread);
        let rep = validate_design(&t.design());
        if !rep.pass {
            return Err(Error::Internal(format!("T(S) is not a Sperner space: {rep:?}")));
        }
        Ok(t)
    }

    fn build_unchecked(spread: &Spread) -> Self {
        let f = spread.field();
        let packed = spread.packed();
        let v = packed.size() as usize;
        let idx = spread.index();
        let k = idx.element_vectors.first().map_or(1, |e| e.len());
        let cosets = v / k;
        let mut coset_of = vec![UNSET; spread.len() * v];
        let mut lines = Vec::with_capacity(spread.len() * cosets);
        for (ei, evecs) in idx.element_vectors.iter().enumerate() {
            let table = &mut coset_of[ei * v..(ei + 1) * v];
            let mut c = 0u32;
            for p in 0..v as u32 {
                if table[p as usize] != UNSET {
                    continue;
                }
                let mut pts: Vec<u32> = evecs.iter().map(|&e| packed.add(f, p, e)).collect();
                pts.sort_unstable();
                for &x in &pts {
                    table[x as usize] = c;
                }
                lines.push(pts);
                c += 1;
            }
        }
        SpernerSpace { spread: spread.clone(), packed, cosets, coset_of, lines }
    }

    pub fn spread(&self) -> &Spread {
        &self.spread
    }
    pub fn num_points(&self) -> usize {
        self.packed.size() as usize
    }
    pub fn num_lines(&self) -> usize {
        self.lines.len()
    }
    pub fn num_classes(&self) -> usize {
        self.spread.len()
    }
    pub fn line_points(&self, line: usize) -> &[u32] {
        &self.lines[line]
    }
    pub fn class_of(&self, line: usize) -> usize {
        line / self.cosets
    }
    /// `q^n`, the number of points on a line.
    pub fn line_size(&self) -> usize {
        self.lines[0].len()
    }

    /// The line through the origin with direction element `e`.
    pub fn origin_line(&self, e: usize) -> usize {
        e * self.cosets + self.coset_of[e * self.num_points()] as usize
    }

    pub fn line_through(&self, a: u32, b: u32) -> Option<usize> {
        if a == b {
            return None;
        }
        let d = self.packed.sub(self.spread.field(), b, a);
        let e = self.spread.index().owner[d as usize] as usize;
        Some(e * self.cosets + self.coset_of[e * self.num_points() + a as usize] as usize)
    }

    pub fn design(&self) -> Design {
        Design {
            num_points: self.num_points(),
            lines: self.lines.clone(),
            classes: (0..self.num_classes()).map(|c| (c * self.cosets..(c + 1) * self.cosets).collect()).collect(),
        }
    }

    /// Smallest line-closed point set containing `pts`, in discovery order.
    /// Stops early once more than `cap` points are reached.
    pub fn linear_manifold_capped(&self, pts: &[u32], cap: usize) -> Vec<u32> {
        let f = self.spread.field();
        let owner = &self.spread.index().owner;
        let v = self.num_points();
        let mut member = vec![false; v];
        let mut list: Vec<u32> = Vec::new();
        for &p in pts {
            if !member[p as usize] {
                member[p as usize] = true;
                list.push(p);
            }
        }
        let mut dir_done = vec![false; self.num_classes()];
        let mut touched = Vec::new();
        let mut i = 0;
        while i < list.len() {
            let a = list[i];
            for &e in &touched {
                dir_done[e] = false;
            }
            touched.clear();
            let mut j = 0;
            while j < i {
                let b = list[j];
                j += 1;
                let e = owner[self.packed.sub(f, b, a) as usize] as usize;
                if dir_done[e] {
                    continue;
                }
                dir_done[e] = true;
                touched.push(e);
                let line = &self.lines[e * self.cosets + self.coset_of[e * v + a as usize] as usize];
                for &x in line {
                    if !member[x as usize] {
                        member[x as usize] = true;
                        list.push(x);
                    }
                }
                if list.len() > cap {
                    return list;
                }
            }
            i += 1;
        }
        list
    }

    pub fn linear_manifold(&self, pts: &[u32]) -> Vec<u32> {
        let mut m = self.linear_manifold_capped(pts, usize::MAX);
        m.sort_unstable();
        m
    }

    pub fn is_collinear(&self, a: u32, b: u32, c: u32) -> bool {
        match self.line_through(a, b) {
            Some(l) => self.lines[l].binary_search(&c).is_ok(),
            None => true,
        }
    }

    /// Linear manifold of three non-collinear points.
    pub fn pseudo_plane(&self, a: u32, b: u32, c: u32) -> Result<Vec<u32>> {
        if self.is_collinear(a, b, c) {
            return Err(Error::Precondition("pseudo-plane needs three non-collinear points".into()));
        }
        Ok(self.linear_manifold(&[a, b, c]))
    }

    /// `q^{2n}` points whose induced lines form a 2-(k², k, 1) design.
    pub fn is_affine_plane(&self, pts: &[u32]) -> bool {
        let k = self.line_size();
        if pts.len() != k * k {
            return false;
        }
        let mut sorted = pts.to_vec();
        sorted.sort_unstable();
        let local = |x: u32| sorted.binary_search(&x).ok().map(|i| i as u32);
        let mut line_ids: Vec<usize> = Vec::new();
        for i in 0..sorted.len() {
            for j in i + 1..sorted.len() {
                if let Some(l) = self.line_through(sorted[i], sorted[j]) {
                    line_ids.push(l);
                }
            }
        }
        line_ids.sort_unstable();
        line_ids.dedup();
        let mut lines = Vec::with_capacity(line_ids.len());
        for &l in &line_ids {
            let Some(mapped) = self.lines[l].iter().map(|&x| local(x)).collect::<Option<Vec<u32>>>() else {
                return false;
            };
            lines.push(mapped);
        }
        if lines.len() != k * k + k {
            return false;
        }
        let d = Design { num_points: k * k, lines, classes: Vec::new() };
        validate_design(&d).pass
    }

    /// Whether every pseudo-plane containing `line` is an affine plane.
    pub fn is_normal_line(&self, line: usize, mode: LineMode) -> Result<NormalLineReport> {
        if line >= self.lines.len() {
            return Err(Error::Precondition(format!("line {line} does not exist")));
        }
        let class = self.class_of(line);
        let k = self.line_size();
        let cap = k * k;
        let (base, candidates): (Vec<u32>, Vec<u32>) = match mode {
            LineMode::Oracle => {
                let pts = self.lines[line].clone();
                let off = (0..self.num_points() as u32).filter(|p| pts.binary_search(p).is_err()).collect();
                (pts, off)
            }
            LineMode::Optimized => {
                let origin = self.lines[self.origin_line(class)].clone();
                (origin.clone(), self.orbit_representatives(&origin))
            }
        };
        let mut checked = 0;
        for &qp in &candidates {
            checked += 1;
            let m = self.linear_manifold_capped(&[base[0], base[1], qp], cap);
            if m.len() > cap || !self.is_affine_plane(&m) {
                let full = self.linear_manifold(&[base[0], base[1], qp]).len();
                return Ok(NormalLineReport {
                    line,
                    class,
                    normal: false,
                    pseudo_planes_checked: checked,
                    witness_point: Some(qp),
                    witness_size: Some(full),
                });
            }
        }
        Ok(NormalLineReport { line, class, normal: true, pseudo_planes_checked: checked, witness_point: None, witness_size: None })
    }

    /// One point per orbit of `{x ↦ λx + e : λ ∈ F_q^*, e ∈ E}` off the origin line `E`.
    fn orbit_representatives(&self, origin: &[u32]) -> Vec<u32> {
        let f = self.spread.field();
        let v = self.num_points();
        let mut seen = vec![false; v];
        for &x in origin {
            seen[x as usize] = true;
        }
        let mut reps = Vec::new();
        for p in 0..v as u32 {
            if seen[p as usize] {
                continue;
            }
            reps.push(p);
            for lambda in 1..self.spread.q() {
                let lp = self.packed.scale(f, lambda, p);
                for &e in origin {
                    seen[self.packed.add(f, lp, e) as usize] = true;
                }
            }
        }
        reps
    }

    /// Normality of the origin line of every class, in class order.
    pub fn normal_classes(&self, mode: LineMode) -> Vec<NormalLineReport> {
        (0..self.num_classes())
            .into_par_iter()
            .map(|c| self.is_normal_line(self.origin_line(c), mode).expect("origin line exists"))
            .collect()
    }

    /// Incidences as CSV rows `point,line,class` under a header naming the
    /// parameters and the SHA-256 of the source spread's canonical JSON.
    pub fn export_csv(&self) -> String {
        let mut out = format!(
            "# sperner q={} n={} r={} spread_sha256={}\npoint,line,class\n",
            self.spread.q(),
            self.spread.n(),
            self.spread.r(),
            spread_hash(&self.spread)
        );
        for (li, pts) in self.lines.iter().enumerate() {
            let c = self.class_of(li);
            for p in pts {
                out.push_str(&format!("{p},{li},{c}\n"));
            }
        }
        out
    }
}

pub fn spread_hash(s: &Spread) -> String {
    let json = serde_json::to_vec(&s.to_json()).expect("spread JSON serializes");
    hex::encode(Sha256::digest(&json))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fieldreduction::desarguesian_spread;
    use crate::gf::FieldTower;

    fn des(q: u32, n: u32, r: usize) -> Spread {
        desarguesian_spread(&FieldTower::new(q, 1, n).unwrap(), r).unwrap()
    }

    #[test]
    fn counts_for_pg52() {
        let t = SpernerSpace::build(&des(2, 2, 3)).unwrap();
        assert_eq!(t.num_points(), 64);
        assert_eq!(t.num_lines(), 336);
        assert_eq!(t.num_classes(), 21);
        assert_eq!(t.line_size(), 4);
    }

    #[test]
    fn manifolds() {
        let t = SpernerSpace::build(&des(2, 2, 3)).unwrap();
        let l = t.line_through(0, 5).unwrap();
        assert_eq!(t.linear_manifold(&[0, 5]), t.line_points(l).to_vec());
        let pts = t.line_points(l).to_vec();
        assert_eq!(t.linear_manifold(&pts[..3]), pts);
        let off = (0..64).find(|p| pts.binary_search(p).is_err()).unwrap();
        let plane = t.pseudo_plane(pts[0], pts[1], off).unwrap();
        assert_eq!(plane.len(), 16);
        assert!(t.is_affine_plane(&plane));
        assert!(t.pseudo_plane(pts[0], pts[1], pts[2]).is_err());
    }

    #[test]
    fn origin_line_is_element() {
        let s = des(2, 2, 3);
        let t = SpernerSpace::build(&s).unwrap();
        for e in 0..s.len() {
            let mut v = s.index().element_vectors[e].clone();
            v.sort_unstable();
            assert_eq!(t.line_points(t.origin_line(e)), v.as_slice());
        }
    }

    #[test]
    fn design_damage_is_detected() {
        let t = SpernerSpace::build(&des(2, 2, 3)).unwrap();
        let mut d = t.design();
        assert!(validate_design(&d).pass);
        d.lines[0] = vec![d.lines[0][0], d.lines[0][1], d.lines[0][2], d.lines[1][0]];
        let rep = validate_design(&d);
        assert!(!rep.pass && rep.pair_witness.is_some());
        let mut d = t.design();
        let moved = d.classes[1].pop().unwrap();
        d.classes[0].push(moved);
        let rep = validate_design(&d);
        assert!(!rep.pass && rep.parallel_witness.is_some());
    }

    #[test]
    fn desarguesian_lines_are_normal_in_both_modes() {
        let t = SpernerSpace::build(&des(2, 2, 3)).unwrap();
        for c in [0, 7, 20] {
            let l = t.origin_line(c);
            assert!(t.is_normal_line(l, LineMode::Optimized).unwrap().normal);
            assert!(t.is_normal_line(l + 3, LineMode::Oracle).unwrap().normal);
        }
    }

    #[test]
    fn csv_header_and_rows() {
        let t = SpernerSpace::build(&des(2, 2, 3)).unwrap();
        let csv = t.export_csv();
        let mut lines = csv.lines();
        assert!(lines.next().unwrap().starts_with("# sperner q=2 n=2 r=3 spread_sha256="));
        assert_eq!(lines.next().unwrap(), "point,line,class");
        assert_eq!(csv.lines().count(), 2 + 336 * 4);
    }
}
