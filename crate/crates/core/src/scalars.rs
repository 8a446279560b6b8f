//! Coefficient rings: the cyclotomic field `Q(ζ_N)` and finite fields `F_{ℓ^m}`.
//!
//! Both rings expose a distinguished `N`-th root of unity `ζ_N`.  In `F_{ℓ^m}`
//! it is the image of the cyclotomic `ζ_N` under the reduction map, so
//! evaluating the same integer combination of roots in either ring commutes
//! with [`reduce_mod_ell`].

use crate::fields::{is_prime, Field, FieldTower};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value};
use std::fmt::Debug;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScalarError {
    #[error("division by zero")]
    DivByZero,
    #[error("root of unity of order {0} is not available in this ring")]
    MissingRoot(u64),
    #[error("denominator divisible by {0}: reduction undefined")]
    NotIntegral(u64),
    #[error("characteristic {0} equals the residue characteristic")]
    SameCharacteristic(u64),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("no square root of {0} in this ring")]
    NoSqrt(u64),
    #[error("ring too large: {0}")]
    TooLarge(String),
    #[error("malformed scalar: {0}")]
    Malformed(String),
}

pub trait CoeffRing: Send + Sync + Debug {
    type E: Clone + PartialEq + Eq + Debug + Send + Sync;

    /// Order `N` of the distinguished root of unity.
    fn order(&self) -> u64;
    fn characteristic(&self) -> u64;
    fn zero(&self) -> Self::E;
    fn one(&self) -> Self::E;
    fn from_int(&self, k: i64) -> Self::E;
    fn from_bigint(&self, k: &BigInt) -> Self::E;
    fn add(&self, a: &Self::E, b: &Self::E) -> Self::E;
    fn neg(&self, a: &Self::E) -> Self::E;
    fn mul(&self, a: &Self::E, b: &Self::E) -> Self::E;
    fn inv(&self, a: &Self::E) -> Result<Self::E, ScalarError>;
    fn is_zero(&self, a: &Self::E) -> bool;
    /// `ζ_N^j`.
    fn root(&self, j: i64) -> Self::E;
    /// `sum_k counts[k] ζ_N^k`.
    fn eval_counts(&self, counts: &[i64]) -> Self::E;
    fn to_json(&self, a: &Self::E) -> Value;
    fn from_json(&self, v: &Value) -> Result<Self::E, ScalarError>;
    fn describe(&self) -> String;

    fn sub(&self, a: &Self::E, b: &Self::E) -> Self::E {
        self.add(a, &self.neg(b))
    }
    fn div(&self, a: &Self::E, b: &Self::E) -> Result<Self::E, ScalarError> {
        Ok(self.mul(a, &self.inv(b)?))
    }
    fn from_ratio(&self, num: i64, den: i64) -> Result<Self::E, ScalarError> {
        let d = self.inv(&self.from_int(den))?;
        Ok(self.mul(&self.from_int(num), &d))
    }
    fn pow(&self, a: &Self::E, e: i64) -> Result<Self::E, ScalarError> {
        let base = if e < 0 { self.inv(a)? } else { a.clone() };
        let mut k = e.unsigned_abs();
        let mut acc = self.one();
        let mut b = base;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.mul(&acc, &b);
            }
            b = self.mul(&b, &b);
            k >>= 1;
        }
        Ok(acc)
    }
    /// `ζ_u^j` for `u | N`.
    fn root_of_unity(&self, u: u64, j: i64) -> Result<Self::E, ScalarError> {
        let n = self.order();
        if u == 0 || !n.is_multiple_of(u) {
            return Err(ScalarError::MissingRoot(u));
        }
        Ok(self.root((n / u) as i64 * j.rem_euclid(u as i64)))
    }
    fn sum<'a, I: IntoIterator<Item = &'a Self::E>>(&self, it: I) -> Self::E
    where
        Self::E: 'a,
    {
        it.into_iter().fold(self.zero(), |acc, x| self.add(&acc, x))
    }
    /// The fixed square root of the prime `p` (see [`sqrt_p_counts`]).
    fn sqrt_p(&self, p: u64) -> Result<Self::E, ScalarError> {
        let c = sqrt_p_counts(p, self.order()).ok_or(ScalarError::NoSqrt(p))?;
        let v = self.eval_counts(&c);
        if self.mul(&v, &v) != self.from_int(p as i64) {
            return Err(ScalarError::NoSqrt(p));
        }
        Ok(v)
    }
}

/// Integer root combination giving the fixed `√p`.
///
/// For odd `p` this is the quadratic Gauss sum `G = sum η(x) ζ_p^x`, divided by
/// `ζ_4` when `p ≡ 3 mod 4`; for `p = 2` it is `ζ_8 + ζ_8^{-1}`.
pub fn sqrt_p_counts(p: u64, n: u64) -> Option<Vec<i64>> {
    let mut c = vec![0i64; n as usize];
    if p == 2 {
        if !n.is_multiple_of(8) {
            return None;
        }
        let s = n / 8;
        c[s as usize] += 1;
        c[(7 * s) as usize] += 1;
        return Some(c);
    }
    if !n.is_multiple_of(p) {
        return None;
    }
    let shift = if p % 4 == 3 {
        if !n.is_multiple_of(4) {
            return None;
        }
        n - n / 4
    } else {
        0
    };
    let step = n / p;
    for x in 1..p {
        let eta = if legendre(x, p) == 1 { 1 } else { -1 };
        c[((step * x + shift) % n) as usize] += eta;
    }
    Some(c)
}

fn legendre(a: u64, p: u64) -> i64 {
    let mut r = 1u64;
    let mut b = a % p;
    let mut e = (p - 1) / 2;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    if r == 1 {
        1
    } else if r == 0 {
        0
    } else {
        -1
    }
}

pub fn gcd(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

pub fn lcm(a: u64, b: u64) -> u64 {
    a.lcm(&b)
}

pub fn euler_phi(n: u64) -> u64 {
    let mut m = n;
    let mut r = n;
    let mut p = 2;
    while p * p <= m {
        if m.is_multiple_of(p) {
            while m.is_multiple_of(p) {
                m /= p;
            }
            r -= r / p;
        }
        p += 1;
    }
    if m > 1 {
        r -= r / m;
    }
    r
}

fn poly_divexact(a: &[i64], b: &[i64]) -> Vec<i64> {
    let mut r = a.to_vec();
    let db = b.len() - 1;
    let mut q = vec![0i64; a.len() - db];
    for i in (0..q.len()).rev() {
        let c = r[i + db];
        q[i] = c;
        for j in 0..=db {
            r[i + j] -= c * b[j];
        }
    }
    debug_assert!(r.iter().all(|&x| x == 0));
    q
}

/// `Φ_N`, low coefficient first.
pub fn cyclotomic_poly(n: u64) -> Vec<i64> {
    let mut num = vec![0i64; n as usize + 1];
    num[0] = -1;
    num[n as usize] = 1;
    for d in 1..n {
        if n.is_multiple_of(d) {
            num = poly_divexact(&num, &cyclotomic_poly(d));
        }
    }
    num
}

/// Element of `Q(ζ_N)` as `(num_0 + num_1 x + ... ) / den` reduced mod `Φ_N`.
#[derive(Clone, PartialEq, Eq, Debug, Hash)]
pub struct CycloElem {
    num: Vec<BigInt>,
    den: BigInt,
}

impl CycloElem {
    pub fn numerators(&self) -> &[BigInt] {
        &self.num
    }
    pub fn denominator(&self) -> &BigInt {
        &self.den
    }
    /// The rational value if the element lies in `Q`.
    pub fn as_rational(&self) -> Option<(BigInt, BigInt)> {
        if self.num.iter().skip(1).all(|c| c.is_zero()) {
            Some((self.num[0].clone(), self.den.clone()))
        } else {
            None
        }
    }
}

#[derive(Debug)]
pub struct Cyclo {
    n: u64,
    phi: usize,
    poly: Vec<i64>,
    red: Vec<Vec<i64>>,
}

impl Cyclo {
    pub fn new(n: u64) -> Result<Cyclo, ScalarError> {
        if n == 0 || n > 20000 {
            return Err(ScalarError::TooLarge(format!("N={n}")));
        }
        let poly = cyclotomic_poly(n);
        let phi = poly.len() - 1;
        let mut red = Vec::with_capacity(n as usize);
        let mut cur = vec![0i64; phi];
        cur[0] = 1;
        for _ in 0..n {
            red.push(cur.clone());
            let top = cur[phi - 1];
            for j in (1..phi).rev() {
                cur[j] = cur[j - 1];
            }
            cur[0] = 0;
            if top != 0 {
                for j in 0..phi {
                    cur[j] = cur[j]
                        .checked_sub(top.checked_mul(poly[j]).expect("reduction table overflow"))
                        .expect("reduction table overflow");
                }
            }
        }
        Ok(Cyclo { n, phi, poly, red })
    }

    pub fn phi(&self) -> usize {
        self.phi
    }

    fn normalize(&self, mut num: Vec<BigInt>, mut den: BigInt) -> CycloElem {
        if den.is_negative() {
            den = -den;
            for c in num.iter_mut() {
                *c = -&*c;
            }
        }
        let mut g = den.clone();
        for c in num.iter() {
            if g.is_one() {
                break;
            }
            g = g.gcd(c);
        }
        if !g.is_one() && !g.is_zero() {
            for c in num.iter_mut() {
                *c = &*c / &g;
            }
            den /= &g;
        }
        if num.iter().all(|c| c.is_zero()) {
            den = BigInt::one();
        }
        CycloElem { num, den }
    }

    fn reduce_poly(&self, mut v: Vec<BigInt>) -> Vec<BigInt> {
        let phi = self.phi;
        while v.len() > phi {
            let top = v.pop().unwrap();
            if top.is_zero() {
                continue;
            }
            let off = v.len() - phi;
            for j in 0..phi {
                if self.poly[j] != 0 {
                    v[off + j] -= &top * self.poly[j];
                }
            }
        }
        v.resize(phi, BigInt::zero());
        v
    }

    /// Rational matrix of multiplication by `a`, as integer columns over `a.den`.
    fn mult_matrix(&self, a: &CycloElem) -> Vec<Vec<BigInt>> {
        let phi = self.phi;
        let mut cols = Vec::with_capacity(phi);
        let mut cur = a.num.clone();
        for _ in 0..phi {
            cols.push(cur.clone());
            let mut shifted = vec![BigInt::zero()];
            shifted.extend(cur);
            cur = self.reduce_poly(shifted);
        }
        cols
    }

    pub fn from_coeffs(&self, num: Vec<BigInt>, den: BigInt) -> Result<CycloElem, ScalarError> {
        if den.is_zero() {
            return Err(ScalarError::DivByZero);
        }
        let v = self.reduce_poly(num);
        Ok(self.normalize(v, den))
    }
}

fn parse_ratio(s: &str) -> Result<(BigInt, BigInt), ScalarError> {
    let bad = || ScalarError::Malformed(s.to_string());
    match s.split_once('/') {
        Some((a, b)) => Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?)),
        None => Ok((s.trim().parse().map_err(|_| bad())?, BigInt::one())),
    }
}

impl CoeffRing for Cyclo {
    type E = CycloElem;

    fn order(&self) -> u64 {
        self.n
    }
    fn characteristic(&self) -> u64 {
        0
    }
    fn zero(&self) -> CycloElem {
        CycloElem {
            num: vec![BigInt::zero(); self.phi],
            den: BigInt::one(),
        }
    }
    fn one(&self) -> CycloElem {
        self.from_int(1)
    }
    fn from_int(&self, k: i64) -> CycloElem {
        self.from_bigint(&BigInt::from(k))
    }
    fn from_bigint(&self, k: &BigInt) -> CycloElem {
        let mut num = vec![BigInt::zero(); self.phi];
        num[0] = k.clone();
        CycloElem {
            num,
            den: BigInt::one(),
        }
    }
    fn add(&self, a: &CycloElem, b: &CycloElem) -> CycloElem {
        if a.den == b.den {
            let num = a.num.iter().zip(&b.num).map(|(x, y)| x + y).collect();
            self.normalize(num, a.den.clone())
        } else {
            let num = a
                .num
                .iter()
                .zip(&b.num)
                .map(|(x, y)| x * &b.den + y * &a.den)
                .collect();
            self.normalize(num, &a.den * &b.den)
        }
    }
    fn neg(&self, a: &CycloElem) -> CycloElem {
        CycloElem {
            num: a.num.iter().map(|x| -x).collect(),
            den: a.den.clone(),
        }
    }
    fn mul(&self, a: &CycloElem, b: &CycloElem) -> CycloElem {
        let phi = self.phi;
        let mut prod = vec![BigInt::zero(); 2 * phi - 1];
        for (i, x) in a.num.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.num.iter().enumerate() {
                if !y.is_zero() {
                    prod[i + j] += x * y;
                }
            }
        }
        let v = self.reduce_poly(prod);
        self.normalize(v, &a.den * &b.den)
    }
    fn inv(&self, a: &CycloElem) -> Result<CycloElem, ScalarError> {
        if self.is_zero(a) {
            return Err(ScalarError::DivByZero);
        }
        if let Some((p, q)) = a.as_rational() {
            return Ok(self.normalize(
                {
                    let mut v = vec![BigInt::zero(); self.phi];
                    v[0] = q;
                    v
                },
                p,
            ));
        }
        let nonzero: Vec<usize> = (0..self.phi).filter(|&i| !a.num[i].is_zero()).collect();
        if nonzero.len() == 1 && a.num[nonzero[0]].abs().is_one() {
            let k = nonzero[0] as i64;
            let s = if a.num[nonzero[0]].is_negative() { -1 } else { 1 };
            let mut r = self.root(-k);
            if s < 0 {
                r = self.neg(&r);
            }
            return Ok(self.mul(&r, &self.from_bigint(&a.den)));
        }
        // Solve (a.num as multiplication matrix) · x = den·e_0 by fraction-free elimination.
        let phi = self.phi;
        let cols = self.mult_matrix(a);
        let mut m: Vec<Vec<BigInt>> = (0..phi)
            .map(|r| {
                let mut row: Vec<BigInt> = (0..phi).map(|c| cols[c][r].clone()).collect();
                row.push(if r == 0 { a.den.clone() } else { BigInt::zero() });
                row
            })
            .collect();
        let mut prev = BigInt::one();
        for k in 0..phi {
            let piv = (k..phi).find(|&r| !m[r][k].is_zero()).ok_or(ScalarError::DivByZero)?;
            m.swap(k, piv);
            for r in (k + 1)..phi {
                for c in (k + 1)..=phi {
                    let v = (&m[r][c] * &m[k][k] - &m[r][k] * &m[k][c]) / &prev;
                    m[r][c] = v;
                }
                m[r][k] = BigInt::zero();
            }
            prev = m[k][k].clone();
        }
        let det = m[phi - 1][phi - 1].clone();
        let mut x = vec![BigInt::zero(); phi];
        for k in (0..phi).rev() {
            let mut s = &m[k][phi] * &det;
            for c in (k + 1)..phi {
                s -= &m[k][c] * &x[c];
            }
            x[k] = s / &m[k][k];
        }
        Ok(self.normalize(x, det))
    }
    fn is_zero(&self, a: &CycloElem) -> bool {
        a.num.iter().all(|c| c.is_zero())
    }
    fn root(&self, j: i64) -> CycloElem {
        let k = j.rem_euclid(self.n as i64) as usize;
        CycloElem {
            num: self.red[k].iter().map(|&c| BigInt::from(c)).collect(),
            den: BigInt::one(),
        }
    }
    fn eval_counts(&self, counts: &[i64]) -> CycloElem {
        let n = self.n as usize;
        let mut acc = vec![0i128; self.phi];
        let mut ok = true;
        'outer: for (k, &c) in counts.iter().enumerate() {
            if c == 0 {
                continue;
            }
            for (a, &r) in acc.iter_mut().zip(&self.red[k % n]) {
                match (c as i128).checked_mul(r as i128).and_then(|t| a.checked_add(t)) {
                    Some(v) => *a = v,
                    None => {
                        ok = false;
                        break 'outer;
                    }
                }
            }
        }
        if ok {
            return CycloElem {
                num: acc.into_iter().map(BigInt::from).collect(),
                den: BigInt::one(),
            };
        }
        let mut big = vec![BigInt::zero(); self.phi];
        for (k, &c) in counts.iter().enumerate() {
            if c != 0 {
                for (a, &r) in big.iter_mut().zip(&self.red[k % n]) {
                    *a += BigInt::from(c) * r;
                }
            }
        }
        CycloElem {
            num: big,
            den: BigInt::one(),
        }
    }
    fn to_json(&self, a: &CycloElem) -> Value {
        let coeffs: Vec<String> = a
            .num
            .iter()
            .map(|c| {
                let (nn, dd) = (c.clone(), a.den.clone());
                let g = nn.gcd(&dd);
                let (nn, dd) = if g.is_zero() { (nn, dd) } else { (&nn / &g, &dd / &g) };
                format!("{nn}/{dd}")
            })
            .collect();
        json!({"N": self.n, "coeffs": coeffs})
    }
    fn from_json(&self, v: &Value) -> Result<CycloElem, ScalarError> {
        let bad = || ScalarError::Malformed(v.to_string());
        if v.get("N").and_then(Value::as_u64) != Some(self.n) {
            return Err(bad());
        }
        let coeffs = v.get("coeffs").and_then(Value::as_array).ok_or_else(bad)?;
        if coeffs.len() != self.phi {
            return Err(bad());
        }
        let mut acc = self.zero();
        for (i, c) in coeffs.iter().enumerate() {
            let (p, q) = parse_ratio(c.as_str().ok_or_else(bad)?)?;
            let mut num = vec![BigInt::zero(); self.phi];
            num[i] = p;
            acc = self.add(&acc, &self.from_coeffs(num, q)?);
        }
        Ok(acc)
    }
    fn describe(&self) -> String {
        format!("cyclo(N={})", self.n)
    }
}

/// `F_{ℓ^m}` whose distinguished root is the image of the cyclotomic `ζ_N`.
pub struct ModF {
    ell: u64,
    m: u32,
    n: u64,
    step: u64,
    tower: FieldTower,
}

impl Debug for ModF {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "ModF(l={}, m={}, N={})", self.ell, self.m, self.n)
    }
}

/// Splits `n = u · ℓ^v` with `gcd(u, ℓ) = 1`.
pub fn prime_to_part(n: u64, ell: u64) -> (u64, u32) {
    let mut u = n;
    let mut v = 0;
    while u.is_multiple_of(ell) {
        u /= ell;
        v += 1;
    }
    (u, v)
}

impl ModF {
    /// Smallest `m` such that the prime-to-`ℓ` part of `N` divides `ℓ^m - 1`.
    pub fn new(ell: u64, n: u64) -> Result<ModF, ScalarError> {
        if ell > u32::MAX as u64 || !is_prime(ell as u32) {
            return Err(ScalarError::NotPrime(ell));
        }
        let (u, _) = prime_to_part(n, ell);
        let mut m = 1u32;
        let mut pw = ell % u.max(1);
        while u > 1 && !(pw + u - 1).is_multiple_of(u) {
            pw = pw * ell % u;
            m += 1;
            if m > 64 {
                return Err(ScalarError::TooLarge(format!("l={ell}, N={n}")));
            }
        }
        Self::with_degree(ell, m, n)
    }

    pub fn with_degree(ell: u64, m: u32, n: u64) -> Result<ModF, ScalarError> {
        let size = (ell as u128).checked_pow(m).unwrap_or(u128::MAX);
        if size > (1 << 22) {
            return Err(ScalarError::TooLarge(format!("{ell}^{m}")));
        }
        let (u, _) = prime_to_part(n, ell);
        let order = size as u64 - 1;
        if !order.is_multiple_of(u) {
            return Err(ScalarError::MissingRoot(u));
        }
        let tower = FieldTower::build(ell as u32, &[m])
            .map_err(|e| ScalarError::TooLarge(e.to_string()))?;
        Ok(ModF {
            ell,
            m,
            n,
            step: order / u,
            tower,
        })
    }

    pub fn ell(&self) -> u64 {
        self.ell
    }
    pub fn degree(&self) -> u32 {
        self.m
    }
    pub fn field(&self) -> &Field {
        self.tower.level(self.m).expect("level present")
    }
}

impl CoeffRing for ModF {
    type E = u32;

    fn order(&self) -> u64 {
        self.n
    }
    fn characteristic(&self) -> u64 {
        self.ell
    }
    fn zero(&self) -> u32 {
        0
    }
    fn one(&self) -> u32 {
        1
    }
    fn from_int(&self, k: i64) -> u32 {
        self.field().from_int(k)
    }
    fn from_bigint(&self, k: &BigInt) -> u32 {
        let r = k.mod_floor(&BigInt::from(self.ell));
        r.to_u32().unwrap_or(0)
    }
    fn add(&self, a: &u32, b: &u32) -> u32 {
        self.field().add(*a, *b)
    }
    fn neg(&self, a: &u32) -> u32 {
        self.field().neg(*a)
    }
    fn mul(&self, a: &u32, b: &u32) -> u32 {
        self.field().mul(*a, *b)
    }
    fn inv(&self, a: &u32) -> Result<u32, ScalarError> {
        self.field().inv(*a).ok_or(ScalarError::DivByZero)
    }
    fn is_zero(&self, a: &u32) -> bool {
        *a == 0
    }
    fn root(&self, j: i64) -> u32 {
        let k = j.rem_euclid(self.n as i64) as u64;
        self.field().exp(k * self.step)
    }
    fn eval_counts(&self, counts: &[i64]) -> u32 {
        let f = self.field();
        let mut acc = 0u32;
        for (k, &c) in counts.iter().enumerate() {
            let c = c.rem_euclid(self.ell as i64);
            if c != 0 {
                acc = f.add(acc, f.mul(f.from_int(c), self.root(k as i64)));
            }
        }
        acc
    }
    fn to_json(&self, a: &u32) -> Value {
        match self.field().log(*a) {
            None => json!({"l": self.ell, "m": self.m, "log": "zero"}),
            Some(l) => json!({"l": self.ell, "m": self.m, "log": l}),
        }
    }
    fn from_json(&self, v: &Value) -> Result<u32, ScalarError> {
        let bad = || ScalarError::Malformed(v.to_string());
        if v.get("l").and_then(Value::as_u64) != Some(self.ell)
            || v.get("m").and_then(Value::as_u64) != Some(self.m as u64)
        {
            return Err(bad());
        }
        match v.get("log") {
            Some(Value::String(s)) if s == "zero" => Ok(0),
            Some(x) => Ok(self.field().exp(x.as_u64().ok_or_else(bad)?)),
            None => Err(bad()),
        }
    }
    fn describe(&self) -> String {
        format!("modf(l={},m={},N={})", self.ell, self.m, self.n)
    }
}

/// The reduction `r_ℓ: Z_(ℓ)[ζ_N] -> F_{ℓ^m}` sending `ζ_N` to the ring's root.
pub fn reduce_mod_ell(src: &Cyclo, x: &CycloElem, target: &ModF) -> Result<u32, ScalarError> {
    if src.order() != target.order() {
        return Err(ScalarError::MissingRoot(src.order()));
    }
    let ell = BigInt::from(target.ell);
    if (&x.den % &ell).is_zero() {
        return Err(ScalarError::NotIntegral(target.ell));
    }
    let den = target.inv(&target.from_bigint(&x.den))?;
    let mut acc = 0u32;
    for (i, c) in x.num.iter().enumerate() {
        if !c.is_zero() {
            let t = target.mul(&target.from_bigint(c), &target.root(i as i64));
            acc = target.add(&acc, &t);
        }
    }
    Ok(target.mul(&acc, &den))
}

/// Which ring to build, independent of `N`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum RingKind {
    Cyclo,
    ModF { ell: u64 },
}

impl RingKind {
    /// Parses `cyclo`, `modf:l=5`.
    pub fn parse(s: &str) -> Option<RingKind> {
        let s = s.trim();
        if s == "cyclo" {
            return Some(RingKind::Cyclo);
        }
        let rest = s.strip_prefix("modf:")?;
        let (k, v) = rest.split_once('=')?;
        if k.trim() != "l" {
            return None;
        }
        Some(RingKind::ModF { ell: v.trim().parse().ok()? })
    }
}

/// The order `N` needed for characteristic `p`, the given character orders, and
/// an optional irrational `√p`.
pub fn required_order(p: u64, orders: &[u64], need_sqrt: bool) -> u64 {
    let mut n = p;
    for &o in orders {
        n = lcm(n, o.max(1));
    }
    if need_sqrt {
        n = lcm(n, if p == 2 { 8 } else { 4 * p });
    }
    n
}

pub fn cyclo_ring(n: u64) -> Result<Arc<Cyclo>, ScalarError> {
    Ok(Arc::new(Cyclo::new(n)?))
}

pub fn modf_ring(ell: u64, p: u64, n: u64) -> Result<Arc<ModF>, ScalarError> {
    if ell == p {
        return Err(ScalarError::SameCharacteristic(ell));
    }
    Ok(Arc::new(ModF::new(ell, n)?))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum SqrtTag {
    IntegerPower,
    GaussSum,
}

/// A fixed `|𝒢|^{1/2}` for `|𝒢| = p^e`, with its inverse.
#[derive(Clone, Debug)]
pub struct SqrtConvention<E> {
    pub p: u64,
    pub e: u32,
    pub value: E,
    pub inverse: E,
    pub tag: SqrtTag,
}

/// `p^{e/2}` for even `e`, otherwise `p^{(e-1)/2}·√p`.
pub fn sqrt_group_order<R: CoeffRing>(
    ring: &R,
    p: u64,
    e: u32,
) -> Result<SqrtConvention<R::E>, ScalarError> {
    let half = ring.pow(&ring.from_int(p as i64), (e / 2) as i64)?;
    let (value, tag) = if e.is_multiple_of(2) {
        (half, SqrtTag::IntegerPower)
    } else {
        (ring.mul(&half, &ring.sqrt_p(p)?), SqrtTag::GaussSum)
    };
    let inverse = ring.inv(&value)?;
    Ok(SqrtConvention {
        p,
        e,
        value,
        inverse,
        tag,
    })
}

/// The pair convention `|𝒢|^{1/2} := |𝓗|` where `|𝓗| = p^h`.
pub fn sqrt_from_subspace<R: CoeffRing>(
    ring: &R,
    p: u64,
    e: u32,
    h: u32,
) -> Result<SqrtConvention<R::E>, ScalarError> {
    if 2 * h != e {
        return Err(ScalarError::NoSqrt(p));
    }
    sqrt_group_order(ring, p, e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn cyclotomic_examples() {
        assert_eq!(cyclotomic_poly(1), vec![-1, 1]);
        assert_eq!(cyclotomic_poly(8), vec![1, 0, 0, 0, 1]);
        assert_eq!(cyclotomic_poly(12), vec![1, 0, -1, 0, 1]);
        for n in 1..60u64 {
            assert_eq!(cyclotomic_poly(n).len() as u64 - 1, euler_phi(n));
        }
    }

    #[test]
    fn roots_examples() {
        let r = Cyclo::new(24).unwrap();
        assert_eq!(r.root(0), r.one());
        assert_eq!(r.root_of_unity(2, 1).unwrap(), r.from_int(-1));
        let z = r.mul(&r.root_of_unity(3, 1).unwrap(), &r.root_of_unity(8, 1).unwrap());
        let mut order = 0;
        let mut acc = z.clone();
        for k in 1..=24 {
            if acc == r.one() {
                order = k;
                break;
            }
            acc = r.mul(&acc, &z);
        }
        assert_eq!(order, 24);
        assert!(r.root_of_unity(5, 1).is_err());
    }

    #[test]
    fn sqrt_three() {
        let r = Cyclo::new(12).unwrap();
        let s = r.sqrt_p(3).unwrap();
        assert_eq!(r.mul(&s, &s), r.from_int(3));
        for (p, n) in [(2u64, 8u64), (5, 20), (7, 28), (13, 52)] {
            let r = Cyclo::new(n).unwrap();
            let s = r.sqrt_p(p).unwrap();
            assert_eq!(r.mul(&s, &s), r.from_int(p as i64));
        }
    }

    #[test]
    fn sqrt_conventions() {
        let r = Cyclo::new(12).unwrap();
        let c = sqrt_group_order(&r, 3, 8).unwrap();
        assert_eq!(c.value, r.from_int(81));
        assert_eq!(c.tag, SqrtTag::IntegerPower);
        let c = sqrt_group_order(&r, 3, 1).unwrap();
        assert_eq!(r.mul(&c.value, &c.value), r.from_int(3));
        assert_eq!(r.mul(&c.value, &c.inverse), r.one());
        let c = sqrt_from_subspace(&r, 3, 8, 4).unwrap();
        assert_eq!(c.value, r.from_int(81));
        let m = ModF::new(5, 12).unwrap();
        let c = sqrt_group_order(&m, 3, 3).unwrap();
        assert_eq!(m.mul(&c.value, &c.value), m.from_int(27));
    }

    #[test]
    fn modf_degree_selection() {
        let m = ModF::new(5, 24).unwrap();
        assert_eq!(m.degree(), 2);
        let m = ModF::new(2, 12).unwrap();
        assert_eq!(m.degree(), 2);
        assert_eq!(m.root(3), 1);
        assert!(modf_ring(3, 3, 12).is_err());
    }

    #[test]
    fn reduction_examples() {
        let c = Cyclo::new(24).unwrap();
        let m = ModF::new(5, 24).unwrap();
        for k in [-7i64, 0, 3, 12] {
            assert_eq!(reduce_mod_ell(&c, &c.from_int(k), &m).unwrap(), m.from_int(k));
        }
        let c2 = Cyclo::new(12).unwrap();
        let m2 = ModF::new(2, 12).unwrap();
        assert_eq!(reduce_mod_ell(&c2, &c2.root_of_unity(4, 1).unwrap(), &m2).unwrap(), 1);
        let half = c.from_ratio(1, 5).unwrap();
        assert_eq!(reduce_mod_ell(&c, &half, &m), Err(ScalarError::NotIntegral(5)));
    }

    #[test]
    fn inverse_general() {
        let r = Cyclo::new(15).unwrap();
        let a = r.add(&r.add(&r.root(1), &r.from_int(2)), &r.root(4));
        let ai = r.inv(&a).unwrap();
        assert_eq!(r.mul(&a, &ai), r.one());
        assert_eq!(r.inv(&r.zero()), Err(ScalarError::DivByZero));
    }

    #[test]
    fn json_roundtrip() {
        let r = Cyclo::new(12).unwrap();
        let a = r.add(&r.root(5), &r.from_ratio(-3, 7).unwrap());
        let v = r.to_json(&a);
        assert_eq!(v["N"], 12);
        assert_eq!(r.from_json(&v).unwrap(), a);
        let m = ModF::new(5, 24).unwrap();
        for x in [0u32, 1, 7] {
            assert_eq!(m.from_json(&m.to_json(&x)).unwrap(), x);
        }
    }

    #[test]
    fn ring_kind_parse() {
        assert_eq!(RingKind::parse("cyclo"), Some(RingKind::Cyclo));
        assert_eq!(RingKind::parse("modf:l=5"), Some(RingKind::ModF { ell: 5 }));
        assert_eq!(RingKind::parse("modf:k=5"), None);
    }

    fn elem_strategy() -> impl Strategy<Value = (Vec<i64>, i64)> {
        (prop::collection::vec(-4i64..5, 24), 1i64..6)
    }

    fn build(r: &Cyclo, (c, d): &(Vec<i64>, i64)) -> CycloElem {
        let v = r.eval_counts(c);
        r.mul(&v, &r.from_ratio(1, *d).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn ring_axioms(a in elem_strategy(), b in elem_strategy(), c in elem_strategy()) {
            let r = Cyclo::new(24).unwrap();
            let (x, y, z) = (build(&r, &a), build(&r, &b), build(&r, &c));
            prop_assert_eq!(r.add(&r.add(&x, &y), &z), r.add(&x, &r.add(&y, &z)));
            prop_assert_eq!(r.mul(&r.mul(&x, &y), &z), r.mul(&x, &r.mul(&y, &z)));
            prop_assert_eq!(r.mul(&x, &r.add(&y, &z)), r.add(&r.mul(&x, &y), &r.mul(&x, &z)));
            if !r.is_zero(&x) {
                prop_assert_eq!(r.mul(&x, &r.inv(&x).unwrap()), r.one());
            }
        }

        #[test]
        fn reduction_is_a_ring_map(a in elem_strategy(), b in elem_strategy()) {
            let r = Cyclo::new(24).unwrap();
            let m = ModF::new(5, 24).unwrap();
            let (x, y) = (build(&r, &(a.0.clone(), 1)), build(&r, &(b.0.clone(), 1)));
            let rx = reduce_mod_ell(&r, &x, &m).unwrap();
            let ry = reduce_mod_ell(&r, &y, &m).unwrap();
            prop_assert_eq!(reduce_mod_ell(&r, &r.add(&x, &y), &m).unwrap(), m.add(&rx, &ry));
            prop_assert_eq!(reduce_mod_ell(&r, &r.mul(&x, &y), &m).unwrap(), m.mul(&rx, &ry));
            prop_assert_eq!(m.eval_counts(&a.0), rx);
        }
    }
}
