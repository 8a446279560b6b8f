//! Finite field towers `F_p ⊆ F_{p^e} ⊆ F_{p^d}` with table-driven arithmetic.
//!
//! An element of the level of degree `d` is a code in `[0, p^d)`: the base-`p`
//! digits of the code are the coordinates in the power basis of the defining
//! polynomial's root `x`, least significant first.  The root is always a
//! generator of the multiplicative group, and the generators of nested levels
//! are compatible: `g_e = g_d^((p^d-1)/(p^e-1))`.

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

const MAX_FIELD: u64 = 1 << 22;
const ADD_TABLE_LIMIT: u32 = 1024;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("{0} is not prime")]
    NotPrime(u32),
    #[error("degree list is empty or contains zero")]
    BadDegrees,
    #[error("degree {small} does not divide degree {big}")]
    NotNested { small: u32, big: u32 },
    #[error("degree {0} is not a level of this tower")]
    MissingLevel(u32),
    #[error("field of size {0} exceeds the table limit")]
    TooLarge(u64),
    #[error("no polynomial of degree {0} satisfies the selection rule")]
    NoPolynomial(u32),
    #[error("element {code} is not a valid code at degree {deg}")]
    BadCode { deg: u32, code: u32 },
}

pub fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut i = 2u32;
    while (i as u64) * (i as u64) <= n as u64 {
        if n.is_multiple_of(i) {
            return false;
        }
        i += 1;
    }
    true
}

/// One level `F_{p^d}` of a tower.
pub struct Field {
    p: u32,
    d: u32,
    q: u32,
    poly: Vec<u32>,
    exp: Vec<u32>,
    log: Vec<u32>,
    add_table: Option<Vec<u32>>,
    neg: Vec<u32>,
    abs_trace: Vec<u32>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}^{} poly={:?}", self.p, self.d, self.poly)
    }
}

fn digits(code: u32, p: u32, d: u32) -> Vec<u32> {
    let mut c = code;
    (0..d)
        .map(|_| {
            let r = c % p;
            c /= p;
            r
        })
        .collect()
}

fn undigits(ds: &[u32], p: u32) -> u32 {
    ds.iter().rev().fold(0, |acc, &x| acc * p + x)
}

/// Powers of `x` modulo the monic polynomial `x^d + sum low[i] x^i`.
/// Returns `None` when `x` does not have order exactly `p^d - 1`.
fn primitive_powers(p: u32, d: u32, low: &[u32]) -> Option<Vec<u32>> {
    let q = p.pow(d);
    let n = (q - 1) as usize;
    let mut exp = Vec::with_capacity(n);
    let mut cur = vec![0u32; d as usize];
    cur[0] = 1;
    for i in 0..n {
        let code = undigits(&cur, p);
        if i > 0 && code == 1 {
            return None;
        }
        exp.push(code);
        let top = cur[d as usize - 1];
        for j in (1..d as usize).rev() {
            cur[j] = cur[j - 1];
        }
        cur[0] = 0;
        if top != 0 {
            for j in 0..d as usize {
                cur[j] = (cur[j] + (p - top) * low[j]) % p;
            }
        }
    }
    if undigits(&cur, p) != 1 {
        return None;
    }
    Some(exp)
}

impl Field {
    fn from_powers(p: u32, d: u32, poly: Vec<u32>, exp: Vec<u32>) -> Field {
        let q = p.pow(d);
        let mut log = vec![u32::MAX; q as usize];
        for (i, &c) in exp.iter().enumerate() {
            log[c as usize] = i as u32;
        }
        let neg: Vec<u32> = (0..q)
            .map(|c| {
                let ds: Vec<u32> = digits(c, p, d).iter().map(|&x| (p - x) % p).collect();
                undigits(&ds, p)
            })
            .collect();
        let mut f = Field {
            p,
            d,
            q,
            poly,
            exp,
            log,
            add_table: None,
            neg,
            abs_trace: Vec::new(),
        };
        if q <= ADD_TABLE_LIMIT {
            let mut t = vec![0u32; (q as usize) * (q as usize)];
            for a in 0..q {
                for b in 0..q {
                    t[(a * q + b) as usize] = f.add_digits(a, b);
                }
            }
            f.add_table = Some(t);
        }
        let tr: Vec<u32> = (0..q)
            .map(|c| {
                let mut acc = 0u32;
                let mut y = c;
                for _ in 0..d {
                    acc = f.add(acc, y);
                    y = f.pow(y, p as u64);
                }
                acc
            })
            .collect();
        f.abs_trace = tr;
        f
    }

    fn add_digits(&self, a: u32, b: u32) -> u32 {
        let (mut a, mut b) = (a, b);
        let mut out = 0u32;
        let mut place = 1u32;
        for _ in 0..self.d {
            out += ((a % self.p + b % self.p) % self.p) * place;
            a /= self.p;
            b /= self.p;
            place = place.wrapping_mul(self.p);
        }
        out
    }

    pub fn p(&self) -> u32 {
        self.p
    }
    pub fn degree(&self) -> u32 {
        self.d
    }
    /// Number of elements.
    pub fn size(&self) -> u32 {
        self.q
    }
    /// Defining polynomial, low coefficient first, monic.
    pub fn poly(&self) -> &[u32] {
        &self.poly
    }
    pub fn generator(&self) -> u32 {
        self.exp[if self.q > 2 { 1 } else { 0 }]
    }
    pub fn zero(&self) -> u32 {
        0
    }
    pub fn one(&self) -> u32 {
        1
    }
    /// Image of the integer `k` in the prime field.
    pub fn from_int(&self, k: i64) -> u32 {
        k.rem_euclid(self.p as i64) as u32
    }
    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        match &self.add_table {
            Some(t) => t[(a * self.q + b) as usize],
            None => self.add_digits(a, b),
        }
    }
    #[inline]
    pub fn neg(&self, a: u32) -> u32 {
        self.neg[a as usize]
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
        let n = self.q - 1;
        let s = self.log[a as usize] + self.log[b as usize];
        self.exp[if s >= n { s - n } else { s } as usize]
    }
    pub fn inv(&self, a: u32) -> Option<u32> {
        if a == 0 {
            return None;
        }
        let n = self.q - 1;
        let l = self.log[a as usize];
        Some(self.exp[((n - l) % n) as usize])
    }
    pub fn pow(&self, a: u32, e: u64) -> u32 {
        if e == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        let n = (self.q - 1) as u64;
        let l = self.log[a as usize] as u64;
        self.exp[((l * (e % n)) % n) as usize]
    }
    /// Discrete logarithm to the fixed generator; `None` at zero.
    #[inline]
    pub fn log(&self, a: u32) -> Option<u32> {
        let l = self.log[a as usize];
        (l != u32::MAX).then_some(l)
    }
    #[inline]
    pub fn exp(&self, k: u64) -> u32 {
        self.exp[(k % (self.q as u64 - 1)) as usize]
    }
    /// Trace down to the prime field, as an integer in `[0, p)`.
    #[inline]
    pub fn abs_trace(&self, a: u32) -> u32 {
        self.abs_trace[a as usize]
    }
    /// Base-`p` coordinates in the power basis.
    pub fn coords(&self, a: u32) -> Vec<u32> {
        digits(a, self.p, self.d)
    }
    pub fn from_coords(&self, c: &[u32]) -> u32 {
        undigits(c, self.p)
    }
    pub fn elements(&self) -> std::ops::Range<u32> {
        0..self.q
    }
    pub fn units(&self) -> impl Iterator<Item = u32> + '_ {
        self.exp.iter().copied()
    }
    pub fn is_square(&self, a: u32) -> bool {
        match self.log(a) {
            None => true,
            Some(l) => self.p == 2 || l % 2 == 0,
        }
    }
}

/// An element tagged with the degree of the level it lives in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FieldElem {
    pub deg: u32,
    pub code: u32,
}

pub struct FieldTower {
    p: u32,
    levels: Vec<Field>,
}

impl fmt::Debug for FieldTower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.levels.iter()).finish()
    }
}

impl FieldTower {
    /// Builds the tower for the given degrees over `F_p`.
    ///
    /// For each degree the defining polynomial is the lexicographically
    /// smallest monic polynomial (comparing from the top coefficient down)
    /// whose root generates the multiplicative group and whose norm to every
    /// dividing lower level is that level's generator.
    pub fn build(p: u32, degrees: &[u32]) -> Result<FieldTower, FieldError> {
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        if degrees.is_empty() || degrees.contains(&0) {
            return Err(FieldError::BadDegrees);
        }
        let mut degs: Vec<u32> = degrees.to_vec();
        degs.sort_unstable();
        degs.dedup();
        let mut levels: Vec<Field> = Vec::new();
        for &d in &degs {
            let size = (p as u64).checked_pow(d).unwrap_or(u64::MAX);
            if size > MAX_FIELD {
                return Err(FieldError::TooLarge(size));
            }
            let q = size as u32;
            let mut found = None;
            for k in 0..q {
                let low = digits(k, p, d);
                let Some(exp) = primitive_powers(p, d, &low) else {
                    continue;
                };
                let mut poly = low.clone();
                poly.push(1);
                let cand = Field::from_powers(p, d, poly, exp);
                let compatible = levels
                    .iter()
                    .filter(|lv| d % lv.d == 0)
                    .all(|lv| {
                        let r = ((q - 1) / (lv.q - 1)) as u64;
                        let beta = cand.pow(cand.generator(), r);
                        let mut acc = 0u32;
                        let mut pw = 1u32;
                        for &c in lv.poly.iter() {
                            acc = cand.add(acc, cand.mul(cand.from_int(c as i64), pw));
                            pw = cand.mul(pw, beta);
                        }
                        acc == 0
                    });
                if compatible {
                    found = Some(cand);
                    break;
                }
            }
            levels.push(found.ok_or(FieldError::NoPolynomial(d))?);
        }
        Ok(FieldTower { p, levels })
    }

    pub fn p(&self) -> u32 {
        self.p
    }
    pub fn degrees(&self) -> Vec<u32> {
        self.levels.iter().map(|l| l.d).collect()
    }
    pub fn top_degree(&self) -> u32 {
        self.levels.last().map(|l| l.d).unwrap_or(1)
    }
    pub fn level(&self, deg: u32) -> Result<&Field, FieldError> {
        self.levels
            .iter()
            .find(|l| l.d == deg)
            .ok_or(FieldError::MissingLevel(deg))
    }
    pub fn elem(&self, deg: u32, code: u32) -> Result<FieldElem, FieldError> {
        let f = self.level(deg)?;
        if code >= f.q {
            return Err(FieldError::BadCode { deg, code });
        }
        Ok(FieldElem { deg, code })
    }
    pub fn gen(&self, deg: u32) -> Result<FieldElem, FieldError> {
        Ok(FieldElem {
            deg,
            code: self.level(deg)?.generator(),
        })
    }

    fn nested(&self, small: u32, big: u32) -> Result<(&Field, &Field), FieldError> {
        if !big.is_multiple_of(small) {
            return Err(FieldError::NotNested { small, big });
        }
        Ok((self.level(small)?, self.level(big)?))
    }

    /// Inclusion of level `from` into level `to`.
    pub fn embed(&self, x: FieldElem, to: u32) -> Result<FieldElem, FieldError> {
        let (lo, hi) = self.nested(x.deg, to)?;
        let code = match lo.log(x.code) {
            None => 0,
            Some(l) => hi.exp(l as u64 * ((hi.q - 1) / (lo.q - 1)) as u64),
        };
        Ok(FieldElem { deg: to, code })
    }

    /// Inverse of [`FieldTower::embed`], failing if `x` does not lie in the subfield.
    pub fn restrict(&self, x: FieldElem, to: u32) -> Result<Option<FieldElem>, FieldError> {
        let (lo, hi) = self.nested(to, x.deg)?;
        let r = (hi.q - 1) / (lo.q - 1);
        Ok(match hi.log(x.code) {
            None => Some(FieldElem { deg: to, code: 0 }),
            Some(l) if l % r == 0 => Some(FieldElem {
                deg: to,
                code: lo.exp((l / r) as u64),
            }),
            Some(_) => None,
        })
    }

    pub fn frobenius(&self, x: FieldElem, base: u32, i: u32) -> Result<FieldElem, FieldError> {
        let (lo, hi) = self.nested(base, x.deg)?;
        let mut e = 1u64;
        for _ in 0..i {
            e = e * lo.q as u64 % (hi.q as u64 - 1);
        }
        let code = match hi.log(x.code) {
            None => 0,
            Some(l) => hi.exp(l as u64 * e),
        };
        Ok(FieldElem { deg: x.deg, code })
    }

    /// `sum_{i < d/e} x^{(p^e)^i}`, returned at level `e`.
    pub fn relative_trace(&self, x: FieldElem, to: u32) -> Result<FieldElem, FieldError> {
        let (lo, hi) = self.nested(to, x.deg)?;
        let mut acc = 0u32;
        let mut y = x.code;
        for _ in 0..(x.deg / to) {
            acc = hi.add(acc, y);
            y = hi.pow(y, lo.q as u64);
        }
        self.restrict(FieldElem { deg: x.deg, code: acc }, to)?
            .ok_or(FieldError::BadCode { deg: to, code: acc })
    }

    /// `prod_{i < d/e} x^{(p^e)^i}`, returned at level `e`.
    pub fn relative_norm(&self, x: FieldElem, to: u32) -> Result<FieldElem, FieldError> {
        let (lo, hi) = self.nested(to, x.deg)?;
        let e = ((hi.q - 1) / (lo.q - 1)) as u64;
        let y = hi.pow(x.code, e);
        self.restrict(FieldElem { deg: x.deg, code: y }, to)?
            .ok_or(FieldError::BadCode { deg: to, code: y })
    }

    /// The nonzero trace-zero element of smallest discrete log in a quadratic step.
    pub fn trace_zero_element(&self, n_deg: u32, m_deg: u32) -> Result<FieldElem, FieldError> {
        if n_deg != 2 * m_deg {
            return Err(FieldError::NotNested {
                small: m_deg,
                big: n_deg,
            });
        }
        let hi = self.level(n_deg)?;
        for k in 0..(hi.q - 1) {
            let x = FieldElem {
                deg: n_deg,
                code: hi.exp(k as u64),
            };
            if self.relative_trace(x, m_deg)?.code == 0 {
                return Ok(x);
            }
        }
        Err(FieldError::NoPolynomial(n_deg))
    }

    /// The element `θ` whose powers form the basis used by [`FieldTower::embed_regular`].
    ///
    /// For an odd quadratic step this is the square root of smallest log of the
    /// base generator `α`; otherwise it is the generator of the top level.
    pub fn regular_basis_root(&self, deg: u32, base: u32) -> Result<FieldElem, FieldError> {
        let (lo, hi) = self.nested(base, deg)?;
        if deg == 2 * base && self.p != 2 {
            let alpha = self.embed(
                FieldElem {
                    deg: base,
                    code: lo.generator(),
                },
                deg,
            )?;
            for k in 0..(hi.q - 1) {
                let c = hi.exp(k as u64);
                if hi.mul(c, c) == alpha.code {
                    return Ok(FieldElem { deg, code: c });
                }
            }
        }
        Ok(FieldElem {
            deg,
            code: hi.generator(),
        })
    }

    /// Coordinates of every element of level `deg` in the basis `θ^i` over `base`.
    pub fn regular_coords(&self, deg: u32, base: u32) -> Result<Vec<Vec<u32>>, FieldError> {
        let (lo, hi) = self.nested(base, deg)?;
        let k = (deg / base) as usize;
        let theta = self.regular_basis_root(deg, base)?;
        let mut powers = vec![1u32; k];
        for i in 1..k {
            powers[i] = hi.mul(powers[i - 1], theta.code);
        }
        let mut table = vec![Vec::new(); hi.q as usize];
        let total = (lo.q as u64).pow(k as u32);
        for idx in 0..total {
            let mut c = idx;
            let mut coords = Vec::with_capacity(k);
            let mut acc = 0u32;
            for pw in powers.iter() {
                let a = (c % lo.q as u64) as u32;
                c /= lo.q as u64;
                coords.push(a);
                let emb = self.embed(FieldElem { deg: base, code: a }, deg)?.code;
                acc = hi.add(acc, hi.mul(emb, *pw));
            }
            table[acc as usize] = coords;
        }
        Ok(table)
    }

    /// Matrix of multiplication by `x` over the subfield of degree `base`:
    /// row `i` holds the coordinates of `x·θ^i`.
    pub fn embed_regular(&self, x: FieldElem, base: u32) -> Result<Vec<Vec<u32>>, FieldError> {
        let table = self.regular_coords(x.deg, base)?;
        self.embed_regular_with(&table, x, base)
    }

    pub fn embed_regular_with(
        &self,
        table: &[Vec<u32>],
        x: FieldElem,
        base: u32,
    ) -> Result<Vec<Vec<u32>>, FieldError> {
        let hi = self.level(x.deg)?;
        let theta = self.regular_basis_root(x.deg, base)?;
        let k = (x.deg / base) as usize;
        let mut rows = Vec::with_capacity(k);
        let mut y = x.code;
        for _ in 0..k {
            rows.push(table[y as usize].clone());
            y = hi.mul(y, theta.code);
        }
        Ok(rows)
    }

    /// Field spec as used on the command line: `p=3,deg=2`.
    pub fn spec(&self) -> String {
        format!("p={},deg={}", self.p, self.top_degree())
    }

    /// Human-readable defining polynomials.
    pub fn describe(&self) -> Vec<String> {
        self.levels
            .iter()
            .map(|l| {
                let terms: Vec<String> = l
                    .poly
                    .iter()
                    .enumerate()
                    .rev()
                    .filter(|(_, &c)| c != 0)
                    .map(|(i, &c)| match (i, c) {
                        (0, c) => format!("{c}"),
                        (1, 1) => "x".to_string(),
                        (1, c) => format!("{c}x"),
                        (i, 1) => format!("x^{i}"),
                        (i, c) => format!("{c}x^{i}"),
                    })
                    .collect();
                format!("F_{}^{}: {}", l.p, l.d, terms.join(" + "))
            })
            .collect()
    }
}

/// Parses `p=3,deg=2` into `(p, deg)`.
pub fn parse_field_spec(s: &str) -> Option<(u32, u32)> {
    let mut p = None;
    let mut d = None;
    for part in s.split(',') {
        let (k, v) = part.split_once('=')?;
        match k.trim() {
            "p" => p = v.trim().parse().ok(),
            "deg" => d = v.trim().parse().ok(),
            _ => {}
        }
    }
    Some((p?, d.unwrap_or(1)))
}
