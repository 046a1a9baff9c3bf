//! Finite fields of small order and the tower `F_p ⊆ F_q ⊆ F_{q^n}`.
//!
//! Elements are `u32` codes: the coefficient vector of the element in the
//! power basis of the defining polynomial, packed little-endian in base `p`
//! (`code = Σ c_i p^i`). In particular the prime field is `0..p` with its
//! natural integer codes, and `0`/`1` are the zero and unit of every field.

use serde::Serialize;

use crate::error::{domain, Error, Result};

/// Largest field order accepted by the table-driven implementation.
pub const DEFAULT_ORDER_CAP: u64 = 1 << 20;

const ADD_TABLE_MAX: u32 = 256;

/// A finite field `F_{p^k}` with full exp/log tables.
#[derive(Clone, Debug)]
pub struct Gf {
    p: u32,
    degree: u32,
    order: u32,
    modulus: Vec<u32>,
    generator: u32,
    exp: Vec<u32>,
    log: Vec<u32>,
    add_table: Option<Vec<u32>>,
}

fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

pub(crate) fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Splits a prime power `q = p^h` into `(p, h)`.
pub fn prime_power(q: u64) -> Option<(u32, u32)> {
    if q < 2 {
        return None;
    }
    let fs = prime_factors(q);
    if fs.len() != 1 {
        return None;
    }
    let p = fs[0];
    let mut h = 0;
    let mut m = q;
    while m > 1 {
        m /= p;
        h += 1;
    }
    Some((p as u32, h))
}

fn code_to_coeffs(mut code: u32, p: u32, len: usize) -> Vec<u32> {
    let mut out = vec![0; len];
    for c in out.iter_mut() {
        *c = code % p;
        code /= p;
    }
    out
}

fn coeffs_to_code(coeffs: &[u32], p: u32) -> u32 {
    coeffs.iter().rev().fold(0, |acc, &c| acc * p + c)
}

/// Remainder of `a` modulo the monic polynomial `m` (both little-endian).
fn poly_rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    let dm = m.len() - 1;
    let mut r: Vec<u32> = a.to_vec();
    while r.len() > dm {
        let lead = r.pop().unwrap();
        if lead != 0 {
            let shift = r.len() - dm;
            for i in 0..dm {
                r[shift + i] = (r[shift + i] + p - (lead * m[i]) % p) % p;
            }
        }
    }
    r.resize(dm, 0);
    r
}

/// Product of two residues modulo the monic `m`; inputs have length `deg m`.
fn poly_mulmod(a: &[u32], b: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    let mut prod = vec![0u32; a.len() + b.len()];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x * y) % p;
        }
    }
    poly_rem(&prod, m, p)
}

fn poly_powmod(base: &[u32], mut e: u64, m: &[u32], p: u32) -> Vec<u32> {
    let k = m.len() - 1;
    let mut result = vec![0; k];
    result[0] = 1 % p;
    let mut b = base.to_vec();
    while e > 0 {
        if e & 1 == 1 {
            result = poly_mulmod(&result, &b, m, p);
        }
        b = poly_mulmod(&b, &b, m, p);
        e >>= 1;
    }
    result
}

/// Trial division by every monic polynomial of degree `1..=deg/2`.
pub fn is_irreducible(modulus: &[u32], p: u32) -> bool {
    let k = modulus.len() - 1;
    if k == 0 {
        return false;
    }
    for d in 1..=k / 2 {
        let count = (p as u64).pow(d as u32);
        for low in 0..count {
            let mut f = code_to_coeffs(low as u32, p, d);
            f.push(1);
            if poly_rem(modulus, &f, p).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

impl Gf {
    /// The field of order `p^degree` defined by the lexicographically smallest
    /// monic irreducible polynomial (smallest packed code of its lower
    /// coefficients), generated by its smallest-code primitive element.
    pub fn new(p: u32, degree: u32) -> Result<Self> {
        if !is_prime(p) {
            return domain(format!("{p} is not prime"));
        }
        if degree == 0 {
            return domain("field degree must be positive");
        }
        let order = (p as u64).checked_pow(degree).unwrap_or(u64::MAX);
        if order > DEFAULT_ORDER_CAP {
            return domain(format!("field order {order} exceeds cap {DEFAULT_ORDER_CAP}"));
        }
        let order = order as u32;
        let k = degree as usize;
        for low in 0..order {
            let mut m = code_to_coeffs(low, p, k);
            m.push(1);
            if is_irreducible(&m, p) {
                return Self::with_modulus(p, m);
            }
        }
        Err(Error::Internal(format!("no irreducible polynomial of degree {degree} over F_{p}")))
    }

    /// Field of order `p^q` from a given monic irreducible modulus (little-endian).
    pub fn with_modulus(p: u32, modulus: Vec<u32>) -> Result<Self> {
        if !is_prime(p) {
            return domain(format!("{p} is not prime"));
        }
        if modulus.len() < 2 || *modulus.last().unwrap() != 1 {
            return domain("modulus must be monic of positive degree");
        }
        if modulus.iter().any(|&c| c >= p) {
            return domain("modulus coefficients must be reduced mod p");
        }
        if !is_irreducible(&modulus, p) {
            return domain("modulus is reducible");
        }
        let k = modulus.len() - 1;
        let order = (p as u64).pow(k as u32);
        if order > DEFAULT_ORDER_CAP {
            return domain(format!("field order {order} exceeds cap {DEFAULT_ORDER_CAP}"));
        }
        let order = order as u32;
        let group = (order - 1) as u64;
        let factors = prime_factors(group);
        let mut generator = None;
        for g in 1..order {
            let gc = code_to_coeffs(g, p, k);
            let is_primitive = factors.iter().all(|&l| {
                let r = poly_powmod(&gc, group / l, &modulus, p);
                coeffs_to_code(&r, p) != 1
            });
            if is_primitive {
                generator = Some(g);
                break;
            }
        }
        let generator = generator
            .ok_or_else(|| Error::Internal("no primitive element found".into()))?;

        let n = (order - 1) as usize;
        let mut exp = vec![0u32; 2 * n.max(1)];
        let mut log = vec![u32::MAX; order as usize];
        let gc = code_to_coeffs(generator, p, k);
        let mut cur = code_to_coeffs(1, p, k);
        for i in 0..n {
            let c = coeffs_to_code(&cur, p);
            if log[c as usize] != u32::MAX {
                return Err(Error::Internal("generator order too small".into()));
            }
            exp[i] = c;
            exp[i + n] = c;
            log[c as usize] = i as u32;
            cur = poly_mulmod(&cur, &gc, &modulus, p);
        }
        let mut f = Gf { p, degree: k as u32, order, modulus, generator, exp, log, add_table: None };
        if order <= ADD_TABLE_MAX {
            let mut t = vec![0u32; (order * order) as usize];
            for a in 0..order {
                for b in 0..order {
                    t[(a * order + b) as usize] = f.add_digits(a, b);
                }
            }
            f.add_table = Some(t);
        }
        Ok(f)
    }

    /// Field of prime-power order `q`.
    pub fn of_order(q: u64) -> Result<Self> {
        let (p, h) = prime_power(q).ok_or_else(|| Error::Domain(format!("{q} is not a prime power")))?;
        Gf::new(p, h)
    }

    pub fn p(&self) -> u32 {
        self.p
    }
    pub fn degree(&self) -> u32 {
        self.degree
    }
    pub fn order(&self) -> u32 {
        self.order
    }
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }
    pub fn generator(&self) -> u32 {
        self.generator
    }

    fn add_digits(&self, mut a: u32, mut b: u32) -> u32 {
        if self.p == 2 {
            return a ^ b;
        }
        let p = self.p;
        let (mut out, mut pw) = (0, 1);
        while a > 0 || b > 0 {
            out += ((a % p + b % p) % p) * pw;
            a /= p;
            b /= p;
            pw *= p;
        }
        out
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        match &self.add_table {
            Some(t) => t[(a * self.order + b) as usize],
            None => self.add_digits(a, b),
        }
    }

    pub fn neg(&self, mut a: u32) -> u32 {
        if self.p == 2 {
            return a;
        }
        let p = self.p;
        let (mut out, mut pw) = (0, 1);
        while a > 0 {
            out += ((p - a % p) % p) * pw;
            a /= p;
            pw *= p;
        }
        out
    }

    #[inline]
    pub fn sub(&self, a: u32, b: u32) -> u32 {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        if a == 0 || b == 0 {
            return 0;
        }
        self.exp[(self.log[a as usize] + self.log[b as usize]) as usize]
    }

    pub fn inv(&self, a: u32) -> Result<u32> {
        if a == 0 {
            return domain("inverse of zero");
        }
        let n = self.order - 1;
        Ok(self.exp[((n - self.log[a as usize]) % n) as usize])
    }

    pub fn div(&self, a: u32, b: u32) -> Result<u32> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn pow(&self, a: u32, e: u64) -> u32 {
        if e == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        let n = (self.order - 1) as u64;
        self.exp[((self.log[a as usize] as u64 * (e % n)) % n) as usize]
    }

    /// `g^i` for the fixed generator `g`.
    pub fn exp(&self, i: u64) -> u32 {
        self.exp[(i % (self.order as u64 - 1)) as usize]
    }

    /// Discrete logarithm to the base of the fixed generator, in `[0, order-2]`.
    pub fn dlog(&self, a: u32) -> Result<u32> {
        if a == 0 {
            return domain("discrete log of zero");
        }
        Ok(self.log[a as usize])
    }

    /// Embeds an integer into the prime field.
    pub fn from_int(&self, x: i64) -> u32 {
        x.rem_euclid(self.p as i64) as u32
    }

    pub fn coeffs(&self, a: u32) -> Vec<u32> {
        code_to_coeffs(a, self.p, self.degree as usize)
    }

    pub fn from_coeffs(&self, c: &[u32]) -> Result<u32> {
        if c.len() != self.degree as usize || c.iter().any(|&x| x >= self.p) {
            return domain("coefficient vector has wrong length or unreduced entries");
        }
        Ok(coeffs_to_code(c, self.p))
    }

    pub fn frobenius(&self, a: u32) -> u32 {
        self.pow(a, self.p as u64)
    }

    fn check_subfield_order(&self, order: u64) -> Result<()> {
        match prime_power(order) {
            Some((p, d)) if p == self.p && self.degree.is_multiple_of(d) => Ok(()),
            _ => domain(format!("{order} is not the order of a subfield of F_{}", self.order)),
        }
    }

    /// True iff `a^order = a`, for `order` the size of a subfield.
    pub fn is_in_subfield(&self, a: u32, order: u64) -> Result<bool> {
        self.check_subfield_order(order)?;
        Ok(self.pow(a, order) == a)
    }

    /// Elements of the subfield of the given order, sorted by code.
    pub fn subfield_elements(&self, order: u64) -> Result<Vec<u32>> {
        self.check_subfield_order(order)?;
        let mut v: Vec<u32> = (0..self.order).filter(|&a| self.pow(a, order) == a).collect();
        v.sort_unstable();
        Ok(v)
    }

    pub fn elements(&self) -> impl Iterator<Item = u32> {
        0..self.order
    }
}

/// The tower `F_p ⊆ F_q ⊆ F_{q^n}` with `q = p^h`.
///
/// `F_q` is kept as its own [`Gf`] (small codes `0..q`, used for matrix
/// entries); `F_{q^n}` is a second [`Gf`] of degree `h·n` over `F_p`, and the
/// two are tied together by an embedding of `F_q` and the coordinate map of
/// `F_{q^n}` in the `F_q`-basis `1, g, ..., g^{n-1}` (`g` the generator of
/// `F_{q^n}`).
#[derive(Clone, Debug)]
pub struct FieldTower {
    h: u32,
    n: u32,
    base: Gf,
    ext: Gf,
    embed: Vec<u32>,
    restrict: Vec<u32>,
    to_vec: Vec<u32>,
    from_vec: Vec<u32>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TowerInfo {
    pub p: u32,
    pub h: u32,
    pub n: u32,
    pub q: u32,
    pub order: u32,
    /// Defining polynomial of `F_{q^n}` over `F_p`, little-endian.
    pub modulus: Vec<u32>,
    /// Generator of `F_{q^n}` as a coefficient vector.
    pub generator: Vec<u32>,
    /// Defining polynomial of `F_q` over `F_p`, little-endian.
    pub base_modulus: Vec<u32>,
    /// Image in `F_{q^n}` of the root of `base_modulus`, as a coefficient vector.
    pub base_root: Vec<u32>,
    /// Minimal polynomial of the generator over `F_q` (coefficients are `F_q` codes).
    pub basis_polynomial: Vec<u32>,
}

impl FieldTower {
    pub fn new(p: u32, h: u32, n: u32) -> Result<Self> {
        if n == 0 {
            return domain("extension degree must be positive");
        }
        let base = Gf::new(p, h)?;
        let ext = Gf::new(p, h * n)?;
        let q = base.order();

        // Smallest-code root of the base modulus inside the extension.
        let eval = |x: u32| -> u32 {
            base.modulus().iter().rev().fold(0, |acc, &c| ext.add(ext.mul(acc, x), c))
        };
        let root = (0..ext.order())
            .find(|&x| eval(x) == 0)
            .ok_or_else(|| Error::Internal("base modulus has no root in extension".into()))?;
        let mut embed = vec![0u32; q as usize];
        for (a, slot) in embed.iter_mut().enumerate() {
            let c = base.coeffs(a as u32);
            *slot = c.iter().rev().fold(0, |acc, &ci| ext.add(ext.mul(acc, root), ci));
        }
        let mut restrict = vec![u32::MAX; ext.order() as usize];
        for (a, &e) in embed.iter().enumerate() {
            restrict[e as usize] = a as u32;
        }

        let g = ext.generator();
        let powers: Vec<u32> = (0..n).map(|i| ext.exp(i as u64)).collect();
        let mut to_vec = vec![u32::MAX; ext.order() as usize];
        let mut from_vec = vec![0u32; ext.order() as usize];
        for idx in 0..ext.order() {
            let mut rest = idx;
            let mut val = 0;
            for &pw in &powers {
                let a = rest % q;
                rest /= q;
                val = ext.add(val, ext.mul(embed[a as usize], pw));
            }
            if to_vec[val as usize] != u32::MAX {
                return Err(Error::Internal(format!("powers of generator {g} are not an F_q-basis")));
            }
            to_vec[val as usize] = idx;
            from_vec[idx as usize] = val;
        }
        Ok(FieldTower { h, n, base, ext, embed, restrict, to_vec, from_vec })
    }

    /// Tower with `F_q`, `q` a prime power.
    pub fn for_q(q: u64, n: u32) -> Result<Self> {
        let (p, h) = prime_power(q).ok_or_else(|| Error::Domain(format!("{q} is not a prime power")))?;
        FieldTower::new(p, h, n)
    }

    pub fn p(&self) -> u32 {
        self.base.p()
    }
    pub fn h(&self) -> u32 {
        self.h
    }
    pub fn n(&self) -> u32 {
        self.n
    }
    pub fn q(&self) -> u32 {
        self.base.order()
    }
    /// `F_q`.
    pub fn base(&self) -> &Gf {
        &self.base
    }
    /// `F_{q^n}`.
    pub fn ext(&self) -> &Gf {
        &self.ext
    }

    pub fn embed(&self, a: u32) -> u32 {
        self.embed[a as usize]
    }

    /// The `F_q` code of an element of the subfield, if it lies there.
    pub fn restrict(&self, a: u32) -> Option<u32> {
        match self.restrict[a as usize] {
            u32::MAX => None,
            x => Some(x),
        }
    }

    /// Coordinates of `a ∈ F_{q^n}` over `F_q` packed as a vector index `Σ a_i q^i`.
    pub fn to_index(&self, a: u32) -> u32 {
        self.to_vec[a as usize]
    }

    pub fn from_index(&self, idx: u32) -> u32 {
        self.from_vec[idx as usize]
    }

    pub fn to_coords(&self, a: u32) -> Vec<u32> {
        let q = self.q();
        let mut idx = self.to_index(a);
        (0..self.n)
            .map(|_| {
                let d = idx % q;
                idx /= q;
                d
            })
            .collect()
    }

    pub fn from_coords(&self, c: &[u32]) -> u32 {
        let q = self.q();
        let idx = c.iter().rev().fold(0, |acc, &d| acc * q + d);
        self.from_index(idx)
    }

    /// The matrix of `x ↦ x·a` acting on coordinate row vectors from the right.
    pub fn mult_matrix(&self, a: u32) -> crate::linalg::Matrix {
        let n = self.n as usize;
        let mut m = crate::linalg::Matrix::zeros(n, n);
        for i in 0..n {
            let row = self.to_coords(self.ext.mul(self.ext.exp(i as u64), a));
            for (j, v) in row.into_iter().enumerate() {
                m.set(i, j, v);
            }
        }
        m
    }

    pub fn info(&self) -> TowerInfo {
        let gn = self.ext.exp(self.n as u64);
        let c = self.to_coords(gn);
        let mut poly: Vec<u32> = c.iter().map(|&x| self.base.neg(x)).collect();
        poly.push(1);
        TowerInfo {
            p: self.p(),
            h: self.h,
            n: self.n,
            q: self.q(),
            order: self.ext.order(),
            modulus: self.ext.modulus().to_vec(),
            generator: self.ext.coeffs(self.ext.generator()),
            base_modulus: self.base.modulus().to_vec(),
            base_root: self.ext.coeffs(self.base_root_code()),
            basis_polynomial: poly,
        }
    }

    fn base_root_code(&self) -> u32 {
        // The variable `x` of the base field has code `p` when h > 1, otherwise
        // the base modulus is linear and its root is the constant it encodes.
        if self.h > 1 {
            self.embed(self.base.p())
        } else {
            self.embed(self.base.neg(self.base.modulus()[0]))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f9_is_f3_mod_t2_plus_1_with_generator_t_plus_1() {
        let f = Gf::new(3, 2).unwrap();
        assert_eq!(f.modulus(), &[1, 0, 1]);
        // t + 1 has code 1 + 3 = 4
        assert_eq!(f.generator(), 4);
    }

    #[test]
    fn f9_arithmetic_examples() {
        let f = Gf::new(3, 2).unwrap();
        let t = f.from_coeffs(&[0, 1]).unwrap();
        let t1 = f.from_coeffs(&[1, 1]).unwrap();
        let two_t = f.from_coeffs(&[0, 2]).unwrap();
        assert_eq!(f.mul(t1, t1), two_t);
        assert_eq!(f.dlog(1).unwrap(), 0);
        assert_eq!(f.dlog(f.generator()).unwrap(), 1);
        assert_eq!(f.dlog(two_t).unwrap(), 2);
        assert!(f.is_in_subfield(2, 3).unwrap());
        assert!(!f.is_in_subfield(t, 3).unwrap());
        for a in f.elements() {
            assert!(f.is_in_subfield(a, 9).unwrap());
            assert_eq!(f.mul(a, 1), a);
        }
        assert!(f.is_in_subfield(1, 27).is_err());
        assert!(f.is_in_subfield(1, 5).is_err());
    }

    #[test]
    fn prime_field_inverse() {
        let f = Gf::new(3, 1).unwrap();
        assert_eq!(f.inv(2).unwrap(), 2);
        assert!(f.inv(0).is_err());
        assert!(f.dlog(0).is_err());
    }

    #[test]
    fn field_axioms_and_dlog_homomorphism() {
        for (p, k) in [(2, 1), (2, 2), (2, 3), (2, 4), (3, 1), (3, 2), (3, 3), (5, 1), (5, 2), (7, 1), (3, 4)] {
            let f = Gf::new(p, k).unwrap();
            let o = f.order();
            for a in 0..o {
                assert_eq!(f.add(a, f.neg(a)), 0);
                if a != 0 {
                    assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
                    assert_eq!(f.exp(f.dlog(a).unwrap() as u64), a);
                }
                // Frobenius is additive and multiplicative.
                for b in 0..o {
                    assert_eq!(f.frobenius(f.add(a, b)), f.add(f.frobenius(a), f.frobenius(b)));
                    assert_eq!(f.frobenius(f.mul(a, b)), f.mul(f.frobenius(a), f.frobenius(b)));
                    if a != 0 && b != 0 {
                        let lhs = f.dlog(f.mul(a, b)).unwrap();
                        let rhs = (f.dlog(a).unwrap() + f.dlog(b).unwrap()) % (o - 1);
                        assert_eq!(lhs, rhs);
                    }
                }
            }
        }
    }

    #[test]
    fn distributivity_exhaustive_small() {
        let f = Gf::new(2, 3).unwrap();
        for a in 0..8 {
            for b in 0..8 {
                for c in 0..8 {
                    assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                }
            }
        }
    }

    #[test]
    fn subfield_is_fixed_set_of_frobenius_power() {
        let t = FieldTower::new(2, 2, 2).unwrap();
        let ext = t.ext();
        let sub: Vec<u32> = ext.elements().filter(|&a| ext.pow(a, 4) == a).collect();
        let mut emb: Vec<u32> = (0..4).map(|a| t.embed(a)).collect();
        emb.sort_unstable();
        assert_eq!(sub, emb);
        for a in 0..4 {
            assert_eq!(t.restrict(t.embed(a)), Some(a));
        }
    }

    #[test]
    fn embedding_is_a_ring_homomorphism() {
        let t = FieldTower::new(2, 2, 3).unwrap();
        let (b, e) = (t.base(), t.ext());
        for x in 0..4 {
            for y in 0..4 {
                assert_eq!(t.embed(b.add(x, y)), e.add(t.embed(x), t.embed(y)));
                assert_eq!(t.embed(b.mul(x, y)), e.mul(t.embed(x), t.embed(y)));
            }
        }
    }

    #[test]
    fn mult_matrix_is_ring_homomorphism() {
        let t = FieldTower::new(3, 1, 2).unwrap();
        let f = t.base();
        let e = t.ext();
        assert_eq!(t.mult_matrix(1), crate::linalg::Matrix::identity(2));
        assert_eq!(t.mult_matrix(0), crate::linalg::Matrix::zeros(2, 2));
        for a in e.elements() {
            for b in e.elements() {
                let lhs = t.mult_matrix(a).mul(&t.mult_matrix(b), f);
                assert_eq!(lhs, t.mult_matrix(e.mul(a, b)));
                assert_eq!(
                    t.mult_matrix(a).add(&t.mult_matrix(b), f),
                    t.mult_matrix(e.add(a, b))
                );
            }
            // x · M_a = x a
            for x in e.elements() {
                let row = t.to_coords(x);
                let img = crate::linalg::Matrix::from_rows(vec![row]).mul(&t.mult_matrix(a), f);
                assert_eq!(img.row(0), t.to_coords(e.mul(x, a)).as_slice());
            }
        }
    }

    #[test]
    fn info_reports_basis_polynomial() {
        let t = FieldTower::new(3, 1, 2).unwrap();
        let info = t.info();
        assert_eq!(info.modulus, vec![1, 0, 1]);
        assert_eq!(info.basis_polynomial.len(), 3);
        // g = t+1 satisfies g^2 = 2t = 2g - 2  =>  x^2 - 2x + 2 = x^2 + x + 2
        assert_eq!(info.basis_polynomial, vec![2, 1, 1]);
    }
}
