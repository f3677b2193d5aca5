//! Truncated discrete valuation ring `O_N = F_p[ε]/(ε^N)` and its residue field.
//!
//! Both rings implement [`Ring`], so the linear algebra in [`matrix`],
//! [`snf`] and [`sparse`] is written once and runs over either. The residue
//! field behaves like `O_1`: every nonzero element is a unit of valuation 0.

pub mod algebra;
pub mod dense;
pub mod gf;
pub mod idempotent;
pub mod intertwine;
pub mod matrix;
pub mod poly;
pub mod snf;
pub mod sparse;

use std::fmt;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use matrix::Mat;

/// Largest supported precision `N`.
pub const MAX_PREC: usize = 32;
/// Largest supported characteristic (coefficients are stored in a byte).
pub const MAX_P: u32 = 251;

/// Residue in `[0, p)`.
pub type FieldElem = u32;

/// A commutative local ring whose maximal ideal is generated by `ε`.
pub trait Ring: Clone + fmt::Debug + Send + Sync {
    type E: Copy + PartialEq + Eq + Hash + fmt::Debug + Send + Sync;

    fn p(&self) -> u32;
    /// Number of meaningful ε-adic digits (1 for the residue field).
    fn prec(&self) -> usize;
    /// Largest tolerated pivot valuation plus one.
    fn budget(&self) -> usize;
    /// The same ring at a (smaller) working precision.
    fn with_prec(&self, prec: usize) -> Self;

    fn zero(&self) -> Self::E;
    fn one(&self) -> Self::E;
    fn from_i64(&self, v: i64) -> Self::E;
    fn add(&self, a: Self::E, b: Self::E) -> Self::E;
    fn sub(&self, a: Self::E, b: Self::E) -> Self::E;
    fn neg(&self, a: Self::E) -> Self::E;
    fn mul(&self, a: Self::E, b: Self::E) -> Self::E;
    fn is_zero(&self, a: Self::E) -> bool;
    /// ε-adic valuation; `None` for zero.
    fn val(&self, a: Self::E) -> Option<usize>;
    fn unit_inv(&self, a: Self::E) -> Result<Self::E>;
    /// Exact division by `ε^k`; the caller guarantees `val(a) >= k`.
    fn shift_down(&self, a: Self::E, k: usize) -> Self::E;
    /// Image in the residue field.
    fn residue(&self, a: Self::E) -> FieldElem;
    /// Constant (Teichmüller-free) lift of a residue.
    fn lift(&self, c: FieldElem) -> Self::E;
    /// Reduce an element to this ring's precision (drops digits beyond it).
    fn truncate(&self, a: Self::E) -> Self::E;

    fn is_unit(&self, a: Self::E) -> bool {
        self.val(a) == Some(0)
    }

    /// `a / b` for `val(a) >= val(b)`; the top `val(b)` digits of the
    /// quotient are not determined and are returned as zero.
    fn div_exact(&self, a: Self::E, b: Self::E) -> Result<Self::E> {
        let vb = self.val(b).ok_or(Error::NotAUnit)?;
        match self.val(a) {
            None => Ok(self.zero()),
            Some(va) if va >= vb => {
                let u = self.unit_inv(self.shift_down(b, vb))?;
                Ok(self.mul(self.shift_down(a, vb), u))
            }
            Some(_) => Err(Error::NotAUnit),
        }
    }
}

/// The prime field `F_p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Fp {
    p: u32,
}

pub fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

impl Fp {
    pub fn new(p: u32) -> Result<Self> {
        if !is_prime(p) || p > MAX_P {
            return Err(Error::InvalidInput(format!(
                "characteristic must be a prime <= {MAX_P}, got {p}"
            )));
        }
        Ok(Fp { p })
    }

    pub fn inv(&self, a: u32) -> Result<u32> {
        if a % self.p == 0 {
            return Err(Error::NotAUnit);
        }
        Ok(self.pow(a, self.p - 2))
    }

    pub fn pow(&self, a: u32, mut e: u32) -> u32 {
        let p = self.p as u64;
        let mut base = a as u64 % p;
        let mut acc = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base % p;
            }
            base = base * base % p;
            e >>= 1;
        }
        acc as u32
    }

    /// Normalizes an arbitrary integer into `[0, p)`.
    pub fn norm(&self, v: i64) -> u32 {
        v.rem_euclid(self.p as i64) as u32
    }
}

impl Ring for Fp {
    type E = u32;

    fn p(&self) -> u32 {
        self.p
    }
    fn prec(&self) -> usize {
        1
    }
    fn budget(&self) -> usize {
        1
    }
    fn with_prec(&self, _prec: usize) -> Self {
        *self
    }
    fn zero(&self) -> u32 {
        0
    }
    fn one(&self) -> u32 {
        1
    }
    fn from_i64(&self, v: i64) -> u32 {
        self.norm(v)
    }
    #[inline]
    fn add(&self, a: u32, b: u32) -> u32 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }
    #[inline]
    fn sub(&self, a: u32, b: u32) -> u32 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }
    #[inline]
    fn neg(&self, a: u32) -> u32 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }
    #[inline]
    fn mul(&self, a: u32, b: u32) -> u32 {
        a * b % self.p
    }
    fn is_zero(&self, a: u32) -> bool {
        a == 0
    }
    fn val(&self, a: u32) -> Option<usize> {
        if a == 0 {
            None
        } else {
            Some(0)
        }
    }
    fn unit_inv(&self, a: u32) -> Result<u32> {
        self.inv(a)
    }
    fn shift_down(&self, a: u32, k: usize) -> u32 {
        if k == 0 {
            a
        } else {
            0
        }
    }
    fn residue(&self, a: u32) -> u32 {
        a
    }
    fn lift(&self, c: u32) -> u32 {
        c % self.p
    }
    fn truncate(&self, a: u32) -> u32 {
        a
    }
}

/// Element of `O_N`: coefficient `i` is the coefficient of `ε^i`.
///
/// Digits at or beyond the ring's precision are always zero, so plain
/// equality is ring equality.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct DvrElem {
    c: [u8; MAX_PREC],
}

impl DvrElem {
    pub const ZERO: DvrElem = DvrElem { c: [0; MAX_PREC] };

    pub fn coeffs(&self) -> &[u8; MAX_PREC] {
        &self.c
    }

    pub fn coeff(&self, i: usize) -> u32 {
        self.c[i] as u32
    }
}

impl fmt::Debug for DvrElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for DvrElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .c
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(i, &c)| match i {
                0 => format!("{c}"),
                1 => format!("{c}e"),
                _ => format!("{c}e^{i}"),
            })
            .collect();
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join("+"))
        }
    }
}

/// The ring `O_N = F_p[ε]/(ε^N)` together with its precision budget `B`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Dvr {
    p: u32,
    prec: usize,
    budget: usize,
    /// Barrett constant `⌈2^40 / p⌉`.
    bm: u64,
}

#[inline(always)]
fn barrett(x: u32, p: u32, bm: u64) -> u32 {
    // Exact for x < 2^20.
    x - ((x as u64 * bm) >> 40) as u32 * p
}

impl Dvr {
    /// `O_N` with the default budget `B = N / 2`.
    pub fn new(p: u32, prec: usize) -> Result<Self> {
        Self::with_budget(p, prec, prec / 2)
    }

    pub fn with_budget(p: u32, prec: usize, budget: usize) -> Result<Self> {
        Fp::new(p)?;
        if prec == 0 || prec > MAX_PREC {
            return Err(Error::InvalidInput(format!(
                "precision must lie in 1..={MAX_PREC}, got {prec}"
            )));
        }
        if budget == 0 || budget > prec {
            return Err(Error::InvalidInput(format!(
                "budget must lie in 1..={prec}, got {budget}"
            )));
        }
        Ok(Dvr {
            p,
            prec,
            budget,
            bm: ((1u64 << 40) + p as u64 - 1) / p as u64,
        })
    }

    pub fn field(&self) -> Fp {
        Fp { p: self.p }
    }

    /// Builds an element from its low-order coefficients (integers reduced mod p).
    pub fn elem(&self, coeffs: &[i64]) -> DvrElem {
        let mut c = [0u8; MAX_PREC];
        for (i, &v) in coeffs.iter().enumerate().take(self.prec) {
            c[i] = v.rem_euclid(self.p as i64) as u8;
        }
        DvrElem { c }
    }

    /// `c · ε^k`.
    pub fn monomial(&self, c: i64, k: usize) -> DvrElem {
        let mut out = DvrElem::ZERO;
        if k < self.prec {
            out.c[k] = c.rem_euclid(self.p as i64) as u8;
        }
        out
    }

    pub fn eps(&self) -> DvrElem {
        self.monomial(1, 1)
    }

    pub fn eps_pow(&self, k: usize) -> DvrElem {
        self.monomial(1, k)
    }

    /// Coefficients as a length-N integer list (serialization form).
    pub fn to_vec(&self, a: DvrElem) -> Vec<u32> {
        a.c[..self.prec].iter().map(|&c| c as u32).collect()
    }

    pub fn from_vec(&self, v: &[u32]) -> Result<DvrElem> {
        if v.len() != self.prec {
            return Err(Error::InvalidInput(format!(
                "element has {} coefficients, expected {}",
                v.len(),
                self.prec
            )));
        }
        let mut c = [0u8; MAX_PREC];
        for (i, &x) in v.iter().enumerate() {
            if x >= self.p {
                return Err(Error::InvalidInput(format!("coefficient {x} not reduced mod {}", self.p)));
            }
            c[i] = x as u8;
        }
        Ok(DvrElem { c })
    }
}

impl Ring for Dvr {
    type E = DvrElem;

    fn p(&self) -> u32 {
        self.p
    }
    fn prec(&self) -> usize {
        self.prec
    }
    fn budget(&self) -> usize {
        self.budget
    }
    fn with_prec(&self, prec: usize) -> Self {
        Dvr {
            p: self.p,
            prec,
            budget: self.budget.min(prec),
            bm: self.bm,
        }
    }
    fn zero(&self) -> DvrElem {
        DvrElem::ZERO
    }
    fn one(&self) -> DvrElem {
        self.monomial(1, 0)
    }
    fn from_i64(&self, v: i64) -> DvrElem {
        self.monomial(v, 0)
    }
    #[inline]
    fn add(&self, a: DvrElem, b: DvrElem) -> DvrElem {
        let p = self.p as u8;
        let mut c = a.c;
        for i in 0..self.prec {
            let s = c[i] as u16 + b.c[i] as u16;
            c[i] = if s >= p as u16 { (s - p as u16) as u8 } else { s as u8 };
        }
        DvrElem { c }
    }
    #[inline]
    fn sub(&self, a: DvrElem, b: DvrElem) -> DvrElem {
        let p = self.p as u16;
        let mut c = a.c;
        for i in 0..self.prec {
            let s = c[i] as u16 + p - b.c[i] as u16;
            c[i] = if s >= p { (s - p) as u8 } else { s as u8 };
        }
        DvrElem { c }
    }
    #[inline]
    fn neg(&self, a: DvrElem) -> DvrElem {
        let p = self.p as u8;
        let mut c = a.c;
        for x in c.iter_mut().take(self.prec) {
            if *x != 0 {
                *x = p - *x;
            }
        }
        DvrElem { c }
    }
    #[inline]
    fn mul(&self, a: DvrElem, b: DvrElem) -> DvrElem {
        let n = self.prec;
        // Constant fast paths: most matrix entries are scalars.
        if b.c[1..n].iter().all(|&x| x == 0) {
            return self.scale(a, b.c[0] as u32);
        }
        if a.c[1..n].iter().all(|&x| x == 0) {
            return self.scale(b, a.c[0] as u32);
        }
        let va = a.c[..n].iter().position(|&x| x != 0).unwrap_or(n);
        let vb = b.c[..n].iter().position(|&x| x != 0).unwrap_or(n);
        let mut c = [0u8; MAX_PREC];
        if va + vb >= n {
            return DvrElem { c };
        }
        let mut acc = [0u32; MAX_PREC];
        for i in va..n - vb {
            let ai = a.c[i] as u32;
            if ai == 0 {
                continue;
            }
            for j in vb..n - i {
                acc[i + j] += ai * b.c[j] as u32;
            }
        }
        for k in va + vb..n {
            c[k] = barrett(acc[k], self.p, self.bm) as u8;
        }
        DvrElem { c }
    }
    fn is_zero(&self, a: DvrElem) -> bool {
        a.c == [0; MAX_PREC]
    }
    fn val(&self, a: DvrElem) -> Option<usize> {
        a.c[..self.prec].iter().position(|&x| x != 0)
    }
    fn unit_inv(&self, a: DvrElem) -> Result<DvrElem> {
        let f = self.field();
        let a0 = a.c[0] as u32;
        if a0 == 0 {
            return Err(Error::NotAUnit);
        }
        let b0 = f.inv(a0)?;
        let p = self.p;
        let mut b = [0u32; MAX_PREC];
        b[0] = b0;
        for k in 1..self.prec {
            let mut s = 0u32;
            for i in 1..=k {
                s = (s + a.c[i] as u32 * b[k - i]) % p;
            }
            b[k] = (p - s) % p * b0 % p;
        }
        let mut c = [0u8; MAX_PREC];
        for k in 0..self.prec {
            c[k] = b[k] as u8;
        }
        Ok(DvrElem { c })
    }
    fn shift_down(&self, a: DvrElem, k: usize) -> DvrElem {
        let mut c = [0u8; MAX_PREC];
        if k < self.prec {
            c[..self.prec - k].copy_from_slice(&a.c[k..self.prec]);
        }
        DvrElem { c }
    }
    fn residue(&self, a: DvrElem) -> u32 {
        a.c[0] as u32
    }
    fn lift(&self, c: u32) -> DvrElem {
        self.monomial(c as i64, 0)
    }
    fn truncate(&self, a: DvrElem) -> DvrElem {
        let mut c = a.c;
        for x in c.iter_mut().skip(self.prec) {
            *x = 0;
        }
        DvrElem { c }
    }
}

impl Dvr {
    #[inline]
    fn scale(&self, a: DvrElem, s: u32) -> DvrElem {
        match s {
            0 => DvrElem::ZERO,
            1 => a,
            _ => {
                let mut c = [0u8; MAX_PREC];
                for k in 0..self.prec {
                    c[k] = barrett(a.c[k] as u32 * s, self.p, self.bm) as u8;
                }
                DvrElem { c }
            }
        }
    }

    /// `ε^k · a`.
    pub fn shift_up(&self, a: DvrElem, k: usize) -> DvrElem {
        let mut c = [0u8; MAX_PREC];
        if k < self.prec {
            c[k..self.prec].copy_from_slice(&a.c[..self.prec - k]);
        }
        DvrElem { c }
    }
}
