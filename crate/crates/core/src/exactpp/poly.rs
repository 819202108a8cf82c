//! Sparse multivariate polynomials with rational coefficients.
//!
//! Monomials pack one exponent byte per variable into a `u64`, so at most
//! [`MAX_VARS`] variables and per-variable degree 255 are supported.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::rational::Rational;

pub const MAX_VARS: usize = 8;

/// Packed exponent vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Mono(pub u64);

impl Mono {
    pub const ONE: Mono = Mono(0);

    pub fn var(v: usize, e: u8) -> Mono {
        Mono((e as u64) << (8 * v))
    }

    #[inline]
    pub fn exp(self, v: usize) -> u32 {
        ((self.0 >> (8 * v)) & 0xff) as u32
    }

    pub fn from_exps(exps: &[u32]) -> Mono {
        let mut m = 0u64;
        for (v, &e) in exps.iter().enumerate() {
            assert!(e < 256, "exponent overflow");
            m |= (e as u64) << (8 * v);
        }
        Mono(m)
    }

    #[inline]
    fn with_exp(self, v: usize, e: u32) -> Mono {
        debug_assert!(e < 256);
        let mask = !(0xffu64 << (8 * v));
        Mono((self.0 & mask) | ((e as u64) << (8 * v)))
    }

    #[inline]
    fn mul(self, other: Mono) -> Mono {
        let s = self.0.wrapping_add(other.0);
        let carries = (self.0 ^ other.0 ^ s) & 0x0101_0101_0101_0100;
        assert!(carries == 0 && s >= self.0, "exponent overflow");
        Mono(s)
    }

    pub fn total_degree(self) -> u32 {
        (0..MAX_VARS).map(|v| self.exp(v)).sum()
    }

    /// Drops variable `v`, shifting higher variables down.
    fn remove_var(self, v: usize) -> Mono {
        let low_mask = if v == 0 { 0 } else { (1u64 << (8 * v)) - 1 };
        let low = self.0 & low_mask;
        let high = if v + 1 >= MAX_VARS { 0 } else { self.0 >> (8 * (v + 1)) };
        Mono(low | (high << (8 * v)))
    }

    /// Opens a zero-exponent slot at `v`, shifting variables `>= v` up.
    fn insert_var(self, v: usize) -> Mono {
        assert!(self.exp(MAX_VARS - 1) == 0, "too many variables");
        let low_mask = if v == 0 { 0 } else { (1u64 << (8 * v)) - 1 };
        let low = self.0 & low_mask;
        let high = self.0 >> (8 * v);
        Mono(low | (high << (8 * (v + 1))))
    }
}

/// A polynomial as a sorted list of monomials with nonzero coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Poly {
    terms: Vec<(Mono, Rational)>,
}

fn binom_row(n: u32) -> Vec<Rational> {
    let mut row = alloc::vec![Rational::one()];
    for k in 1..=n {
        let prev = &row[(k - 1) as usize];
        row.push(prev * &Rational::new((n - k + 1) as i64, k as i64));
    }
    row
}

impl Poly {
    pub fn zero() -> Self {
        Poly { terms: Vec::new() }
    }

    pub fn constant(c: Rational) -> Self {
        if c.is_zero() {
            Poly::zero()
        } else {
            Poly { terms: alloc::vec![(Mono::ONE, c)] }
        }
    }

    pub fn one() -> Self {
        Poly::constant(Rational::one())
    }

    /// The monomial `c * x_v^e`.
    pub fn monomial(v: usize, e: u8, c: Rational) -> Self {
        if c.is_zero() {
            Poly::zero()
        } else {
            Poly { terms: alloc::vec![(Mono::var(v, e), c)] }
        }
    }

    /// `x_v`.
    pub fn var(v: usize) -> Self {
        Poly::monomial(v, 1, Rational::one())
    }

    pub fn from_terms<I: IntoIterator<Item = (Mono, Rational)>>(it: I) -> Self {
        let mut acc: BTreeMap<Mono, Rational> = BTreeMap::new();
        for (m, c) in it {
            if c.is_zero() {
                continue;
            }
            let slot = acc.entry(m).or_insert_with(Rational::zero);
            *slot += &c;
        }
        Poly { terms: acc.into_iter().filter(|(_, c)| !c.is_zero()).collect() }
    }

    /// Univariate polynomial in variable `v` from ascending coefficients.
    pub fn univariate(v: usize, coeffs: &[Rational]) -> Self {
        Poly::from_terms(coeffs.iter().enumerate().map(|(e, c)| (Mono::var(v, e as u8), c.clone())))
    }

    pub fn terms(&self) -> &[(Mono, Rational)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree_in(&self, v: usize) -> u32 {
        self.terms.iter().map(|(m, _)| m.exp(v)).max().unwrap_or(0)
    }

    /// True if no monomial involves `x_v`.
    pub fn is_const_in(&self, v: usize) -> bool {
        self.terms.iter().all(|(m, _)| m.exp(v) == 0)
    }

    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.as_slice() {
            [] => Some(Rational::zero()),
            [(m, c)] if *m == Mono::ONE => Some(c.clone()),
            _ => None,
        }
    }

    pub fn scale(&self, c: &Rational) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        if c.is_one() {
            return self.clone();
        }
        Poly { terms: self.terms.iter().map(|(m, a)| (*m, a * c)).collect() }
    }

    pub fn neg(&self) -> Poly {
        Poly { terms: self.terms.iter().map(|(m, a)| (*m, -a)).collect() }
    }

    fn merge(&self, other: &Poly, sign: bool) -> Poly {
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.terms, &other.terms);
        while i < a.len() || j < b.len() {
            if j >= b.len() || (i < a.len() && a[i].0 < b[j].0) {
                out.push(a[i].clone());
                i += 1;
            } else if i >= a.len() || b[j].0 < a[i].0 {
                let c = if sign { -&b[j].1 } else { b[j].1.clone() };
                out.push((b[j].0, c));
                j += 1;
            } else {
                let c = if sign { &a[i].1 - &b[j].1 } else { &a[i].1 + &b[j].1 };
                if !c.is_zero() {
                    out.push((a[i].0, c));
                }
                i += 1;
                j += 1;
            }
        }
        Poly { terms: out }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        if other.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return other.clone();
        }
        self.merge(other, false)
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        if other.is_zero() {
            return self.clone();
        }
        self.merge(other, true)
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        if let Some(c) = other.as_constant() {
            return self.scale(&c);
        }
        if let Some(c) = self.as_constant() {
            return other.scale(&c);
        }
        let mut acc: BTreeMap<Mono, Rational> = BTreeMap::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let m = ma.mul(*mb);
                let p = ca * cb;
                match acc.get_mut(&m) {
                    Some(slot) => *slot += &p,
                    None => {
                        acc.insert(m, p);
                    }
                }
            }
        }
        Poly { terms: acc.into_iter().filter(|(_, c)| !c.is_zero()).collect() }
    }

    /// Partial derivative in `x_v`.
    pub fn derivative(&self, v: usize) -> Poly {
        let terms = self
            .terms
            .iter()
            .filter(|(m, _)| m.exp(v) > 0)
            .map(|(m, c)| {
                let e = m.exp(v);
                (m.with_exp(v, e - 1), c * &Rational::from_int(e as i64))
            })
            .collect::<Vec<_>>();
        Poly::from_terms(terms)
    }

    /// Antiderivative in `x_v` with zero constant term.
    pub fn antiderivative(&self, v: usize) -> Poly {
        let terms = self
            .terms
            .iter()
            .map(|(m, c)| {
                let e = m.exp(v);
                (m.with_exp(v, e + 1), c / &Rational::from_int(e as i64 + 1))
            })
            .collect::<Vec<_>>();
        Poly::from_terms(terms)
    }

    /// Substitutes `x_v = a`; the result no longer depends on `x_v`.
    pub fn substitute(&self, v: usize, a: &Rational) -> Poly {
        if self.is_const_in(v) {
            return self.clone();
        }
        let deg = self.degree_in(v);
        let mut pows = Vec::with_capacity(deg as usize + 1);
        pows.push(Rational::one());
        for k in 1..=deg as usize {
            let next = &pows[k - 1] * a;
            pows.push(next);
        }
        Poly::from_terms(self.terms.iter().map(|(m, c)| {
            let e = m.exp(v) as usize;
            (m.with_exp(v, 0), c * &pows[e])
        }))
    }

    /// `p(x_v + a)`.
    pub fn shift(&self, v: usize, a: &Rational) -> Poly {
        if a.is_zero() || self.is_const_in(v) {
            return self.clone();
        }
        let deg = self.degree_in(v);
        let mut pows = Vec::with_capacity(deg as usize + 1);
        pows.push(Rational::one());
        for k in 1..=deg as usize {
            let next = &pows[k - 1] * a;
            pows.push(next);
        }
        let mut out = Vec::new();
        for (m, c) in &self.terms {
            let e = m.exp(v);
            let row = binom_row(e);
            for (k, b) in row.iter().enumerate() {
                // x^e -> sum_k C(e,k) x^k a^(e-k)
                let coef = c * &(b * &pows[(e as usize) - k]);
                out.push((m.with_exp(v, k as u32), coef));
            }
        }
        Poly::from_terms(out)
    }

    /// Removes variable `v` (which must not occur), renumbering the rest.
    pub fn remove_var(&self, v: usize) -> Poly {
        assert!(self.is_const_in(v), "remove_var on a polynomial depending on the variable");
        Poly::from_terms(self.terms.iter().map(|(m, c)| (m.remove_var(v), c.clone())))
    }

    /// Inserts a fresh variable at index `v`, renumbering variables `>= v`.
    pub fn insert_var(&self, v: usize) -> Poly {
        Poly::from_terms(self.terms.iter().map(|(m, c)| (m.insert_var(v), c.clone())))
    }

    /// Renames variable `from` to `to` (which must not occur).
    pub fn rename_var(&self, from: usize, to: usize) -> Poly {
        if from == to {
            return self.clone();
        }
        assert!(self.is_const_in(to));
        Poly::from_terms(self.terms.iter().map(|(m, c)| {
            let e = m.exp(from);
            (m.with_exp(from, 0).with_exp(to, e), c.clone())
        }))
    }

    pub fn eval(&self, x: &[Rational]) -> Rational {
        let mut acc = Rational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (v, xv) in x.iter().enumerate() {
                let e = m.exp(v);
                if e > 0 {
                    t = &t * &xv.pow(e);
                }
            }
            acc += &t;
        }
        acc
    }

    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (m, c) in &self.terms {
            let mut t = c.to_f64();
            for (v, xv) in x.iter().enumerate() {
                let e = m.exp(v);
                for _ in 0..e {
                    t *= *xv;
                }
            }
            acc += t;
        }
        acc
    }
}
