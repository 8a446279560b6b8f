//! Additive and multiplicative characters, the normalized Fourier transform on
//! a matrix algebra, convolution, Poisson summation and abelian Gauss sums.

use crate::exec::Exec;
use crate::fields::{FieldElem, FieldError, FieldTower};
use crate::matspace::{nullspace, Algebra};
use crate::scalars::{gcd, sqrt_group_order, CoeffRing, ScalarError, SqrtConvention};
use rand::Rng;
use serde_json::{json, Value};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarmonicError {
    #[error(transparent)]
    Scalar(#[from] ScalarError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("functions live on different algebras")]
    AmbientMismatch,
    #[error("additive character is trivial")]
    TrivialCharacter,
    #[error("bilinear form is degenerate on the subspace")]
    Degenerate,
    #[error("element is not invertible")]
    NotInvertible,
    #[error("malformed function: {0}")]
    Malformed(String),
}

/// `ψ_t(x) = ζ_p^{tr_{k/F_p}(t x)}` on the level `deg` of a tower.
#[derive(Clone, Debug)]
pub struct AddChar {
    tower: Arc<FieldTower>,
    deg: u32,
    t: u32,
    p: u32,
}

impl AddChar {
    pub fn new(tower: Arc<FieldTower>, deg: u32, t: u32) -> Result<AddChar, FieldError> {
        let f = tower.level(deg)?;
        if t >= f.size() {
            return Err(FieldError::BadCode { deg, code: t });
        }
        let p = tower.p();
        Ok(AddChar { tower, deg, t, p })
    }

    pub fn standard(tower: Arc<FieldTower>, deg: u32) -> Result<AddChar, FieldError> {
        Self::new(tower, deg, 1)
    }

    /// `ψ_t ∘ tr_{k_deg/k_base}` for `ψ_t` on the base level `t.deg`.
    pub fn lifted(tower: Arc<FieldTower>, t: FieldElem, deg: u32) -> Result<AddChar, FieldError> {
        let up = tower.embed(t, deg)?;
        Self::new(tower, deg, up.code)
    }

    pub fn lift(&self, deg: u32) -> Result<AddChar, FieldError> {
        Self::lifted(self.tower.clone(), FieldElem { deg: self.deg, code: self.t }, deg)
    }

    pub fn tower(&self) -> &Arc<FieldTower> {
        &self.tower
    }
    pub fn deg(&self) -> u32 {
        self.deg
    }
    pub fn t(&self) -> u32 {
        self.t
    }
    pub fn p(&self) -> u32 {
        self.p
    }
    pub fn is_trivial(&self) -> bool {
        self.t == 0
    }

    /// `ψ_t ψ_s = ψ_{t+s}`.
    pub fn product(&self, other: &AddChar) -> AddChar {
        let f = self.tower.level(self.deg).unwrap();
        AddChar {
            t: f.add(self.t, other.t),
            ..self.clone()
        }
    }

    pub fn inverse(&self) -> AddChar {
        let f = self.tower.level(self.deg).unwrap();
        AddChar {
            t: f.neg(self.t),
            ..self.clone()
        }
    }

    /// `x ↦ ψ(s x)`.
    pub fn twist(&self, s: u32) -> AddChar {
        let f = self.tower.level(self.deg).unwrap();
        AddChar {
            t: f.mul(self.t, s),
            ..self.clone()
        }
    }

    /// The exponent of `ζ_p` in `ψ(x)`.
    pub fn exponent(&self, x: u32) -> u32 {
        let f = self.tower.level(self.deg).unwrap();
        f.abs_trace(f.mul(self.t, x))
    }

    pub fn value<R: CoeffRing>(&self, ring: &R, x: u32) -> Result<R::E, ScalarError> {
        ring.root_of_unity(self.p as u64, self.exponent(x) as i64)
    }

    /// Table of `exponent(x y)` indexed by `x·q + y`.
    pub fn pair_table(&self) -> Vec<u8> {
        let f = self.tower.level(self.deg).unwrap();
        let q = f.size();
        let mut t = vec![0u8; (q * q) as usize];
        for x in 0..q {
            for y in 0..q {
                t[(x * q + y) as usize] = self.exponent(f.mul(x, y)) as u8;
            }
        }
        t
    }

    /// `Ψ(a) = ψ(tr a)` on an algebra over the same level.
    pub fn algebra_exponent(&self, alg: &Algebra, a: &[u32]) -> u32 {
        self.exponent(alg.trace(a))
    }
}

/// `ξ(g^j) = ζ_{q-1}^{a j}` on `k_deg^×`.
#[derive(Clone, Debug)]
pub struct MultChar {
    tower: Arc<FieldTower>,
    deg: u32,
    a: u64,
    modulus: u64,
}

impl MultChar {
    pub fn new(tower: Arc<FieldTower>, deg: u32, a: i64) -> Result<MultChar, FieldError> {
        let modulus = tower.level(deg)?.size() as u64 - 1;
        let a = a.rem_euclid(modulus as i64) as u64;
        Ok(MultChar {
            tower,
            deg,
            a,
            modulus,
        })
    }

    pub fn trivial(tower: Arc<FieldTower>, deg: u32) -> Result<MultChar, FieldError> {
        Self::new(tower, deg, 0)
    }

    pub fn deg(&self) -> u32 {
        self.deg
    }
    pub fn exponent_param(&self) -> u64 {
        self.a
    }
    pub fn modulus(&self) -> u64 {
        self.modulus
    }
    pub fn tower(&self) -> &Arc<FieldTower> {
        &self.tower
    }
    pub fn order(&self) -> u64 {
        self.modulus / gcd(self.a, self.modulus)
    }
    pub fn is_trivial(&self) -> bool {
        self.a == 0
    }

    /// `ξ(x) = ζ_{modulus}^{exponent}`; `None` at zero.
    pub fn exponent(&self, x: u32) -> Option<u64> {
        let f = self.tower.level(self.deg).unwrap();
        f.log(x).map(|l| self.a * l as u64 % self.modulus)
    }

    /// Index `k` with `ξ(x) = ζ_N^k`; needs `order | N`.
    pub fn root_index(&self, n: u64, x: u32) -> Option<u64> {
        let o = self.order();
        debug_assert!(n.is_multiple_of(o));
        let e = self.exponent(x)?;
        Some(e / (self.modulus / o) * (n / o) % n)
    }

    pub fn value<R: CoeffRing>(&self, ring: &R, x: u32) -> Result<R::E, ScalarError> {
        match self.exponent(x) {
            None => Ok(ring.zero()),
            Some(e) => {
                let o = self.order();
                ring.root_of_unity(o, (e / (self.modulus / o)) as i64)
            }
        }
    }

    pub fn pow(&self, k: i64) -> MultChar {
        let a = (self.a as i128 * k as i128).rem_euclid(self.modulus as i128) as u64;
        MultChar { a, ..self.clone() }
    }

    pub fn inverse(&self) -> MultChar {
        self.pow(-1)
    }

    /// `ξ ∘ ι` for the inclusion of the level `to`.
    pub fn restrict(&self, to: u32) -> Result<MultChar, FieldError> {
        let lo = self.tower.level(to)?.size() as u64 - 1;
        if !self.modulus.is_multiple_of(lo) {
            return Err(FieldError::NotNested {
                small: to,
                big: self.deg,
            });
        }
        Self::new(self.tower.clone(), to, (self.a * (self.modulus / lo) % lo) as i64)
    }

    /// `ξ ∘ N_{k_to/k_deg}`.
    pub fn compose_norm(&self, to: u32) -> Result<MultChar, FieldError> {
        let hi = self.tower.level(to)?.size() as u64 - 1;
        if !hi.is_multiple_of(self.modulus) {
            return Err(FieldError::NotNested {
                small: self.deg,
                big: to,
            });
        }
        Self::new(self.tower.clone(), to, self.a as i64)
    }
}

/// A function `Φ: 𝒢 → R` stored densely by matrix code.
#[derive(Clone, Debug)]
pub struct GFun<E> {
    alg: Arc<Algebra>,
    values: Vec<E>,
}

impl<E: Clone + PartialEq> GFun<E> {
    pub fn from_values(alg: Arc<Algebra>, values: Vec<E>) -> GFun<E> {
        assert_eq!(values.len() as u64, alg.size());
        GFun { alg, values }
    }

    pub fn constant(alg: Arc<Algebra>, c: E) -> GFun<E> {
        let n = alg.size() as usize;
        GFun {
            alg,
            values: vec![c; n],
        }
    }

    pub fn from_fn<F: FnMut(u32) -> E>(alg: Arc<Algebra>, f: F) -> GFun<E> {
        let values = alg.codes().map(f).collect();
        GFun { alg, values }
    }

    pub fn algebra(&self) -> &Arc<Algebra> {
        &self.alg
    }
    pub fn get(&self, code: u32) -> &E {
        &self.values[code as usize]
    }
    pub fn values(&self) -> &[E] {
        &self.values
    }
    pub fn set(&mut self, code: u32, v: E) {
        self.values[code as usize] = v;
    }

    fn same_ambient(&self, other: &GFun<E>) -> Result<(), HarmonicError> {
        if Arc::ptr_eq(&self.alg, &other.alg)
            || (self.alg.q() == other.alg.q() && self.alg.blocks() == other.alg.blocks())
        {
            Ok(())
        } else {
            Err(HarmonicError::AmbientMismatch)
        }
    }
}

impl<E: Clone + PartialEq> PartialEq for GFun<E> {
    fn eq(&self, other: &Self) -> bool {
        self.same_ambient(other).is_ok() && self.values == other.values
    }
}

pub fn delta<R: CoeffRing>(ring: &R, alg: Arc<Algebra>, m: u32) -> GFun<R::E> {
    let mut f = GFun::constant(alg, ring.zero());
    f.set(m, ring.one());
    f
}

/// Uniform random integer values in `[-bound, bound]`.
pub fn random_gfun<R: CoeffRing, G: Rng>(ring: &R, alg: Arc<Algebra>, rng: &mut G, bound: i64) -> GFun<R::E> {
    GFun::from_fn(alg, |_| ring.from_int(rng.gen_range(-bound..=bound)))
}

/// Sparse wire form `{"entries": [[code, scalar], ...], "default": scalar}`.
pub fn gfun_to_json<R: CoeffRing>(ring: &R, f: &GFun<R::E>) -> Value {
    let zero = ring.zero();
    let entries: Vec<Value> = f
        .values
        .iter()
        .enumerate()
        .filter(|(_, v)| **v != zero)
        .map(|(c, v)| json!([c, ring.to_json(v)]))
        .collect();
    json!({"entries": entries, "default": ring.to_json(&zero)})
}

pub fn gfun_from_json<R: CoeffRing>(ring: &R, alg: Arc<Algebra>, v: &Value) -> Result<GFun<R::E>, HarmonicError> {
    let bad = || HarmonicError::Malformed(v.to_string());
    let default = ring.from_json(v.get("default").ok_or_else(bad)?)?;
    let mut f = GFun::constant(alg.clone(), default);
    for e in v.get("entries").and_then(Value::as_array).ok_or_else(bad)? {
        let code = e.get(0).and_then(Value::as_u64).ok_or_else(bad)?;
        if code >= alg.size() {
            return Err(bad());
        }
        f.set(code as u32, ring.from_json(e.get(1).ok_or_else(bad)?)?);
    }
    Ok(f)
}

/// The fixed `|𝒢|^{1/2}` of an algebra.
pub fn algebra_sqrt<R: CoeffRing>(ring: &R, alg: &Algebra) -> Result<SqrtConvention<R::E>, ScalarError> {
    sqrt_group_order(ring, alg.tower().p() as u64, alg.size_exponent())
}

/// Precomputed decodings and the `ψ`-exponent table shared by transforms.
pub struct FourierKernel {
    alg: Arc<Algebra>,
    p: u32,
    q: u32,
    n_entries: usize,
    decoded: Vec<u32>,
    table: Vec<u8>,
    transpose: Vec<usize>,
}

impl FourierKernel {
    pub fn new(alg: Arc<Algebra>, psi: &AddChar) -> Result<FourierKernel, HarmonicError> {
        if psi.is_trivial() {
            return Err(HarmonicError::TrivialCharacter);
        }
        if psi.deg() != alg.deg() {
            return Err(HarmonicError::AmbientMismatch);
        }
        let e = alg.entries();
        let mut decoded = vec![0u32; alg.size() as usize * e];
        for c in alg.codes() {
            alg.decode_into(c, &mut decoded[c as usize * e..(c as usize + 1) * e]);
        }
        let mut transpose = vec![0usize; e];
        for (b, &n) in alg.blocks().iter().enumerate() {
            let o = alg.block_offset(b);
            for i in 0..n {
                for j in 0..n {
                    transpose[o + i * n + j] = o + j * n + i;
                }
            }
        }
        Ok(FourierKernel {
            p: psi.p(),
            q: alg.q(),
            n_entries: e,
            decoded,
            table: psi.pair_table(),
            transpose,
            alg,
        })
    }

    pub fn entries(&self, code: u32) -> &[u32] {
        let e = self.n_entries;
        &self.decoded[code as usize * e..(code as usize + 1) * e]
    }

    /// Exponent of `ζ_p` in `Ψ(g a) = ψ(Σ g_ij a_ji)`.
    pub fn pair_exponent(&self, g: &[u32], a: &[u32]) -> u32 {
        let mut s = 0u32;
        for k in 0..self.n_entries {
            s += self.table[(g[k] * self.q + a[self.transpose[k]]) as usize] as u32;
        }
        s % self.p
    }

    /// `|𝒢|^{-1/2} Σ_g Φ(g) Ψ(g a)` at one point, bucketing by `ψ`-value.
    pub fn transform_at<R: CoeffRing>(
        &self,
        ring: &R,
        phi: &GFun<R::E>,
        conv: &SqrtConvention<R::E>,
        a: &[u32],
    ) -> Result<R::E, ScalarError> {
        let mut buckets = vec![ring.zero(); self.p as usize];
        let zero = ring.zero();
        for c in self.alg.codes() {
            let v = phi.get(c);
            if *v == zero {
                continue;
            }
            let j = self.pair_exponent(self.entries(c), a) as usize;
            buckets[j] = ring.add(&buckets[j], v);
        }
        let mut acc = ring.zero();
        for (j, b) in buckets.iter().enumerate() {
            if *b != zero {
                acc = ring.add(&acc, &ring.mul(b, &ring.root_of_unity(self.p as u64, j as i64)?));
            }
        }
        Ok(ring.mul(&acc, &conv.inverse))
    }
}

/// `F_ψ(Φ)(a) = |𝒢|^{-1/2} Σ_g Φ(g) Ψ(g a)` at every point.
pub fn fourier<R: CoeffRing>(
    ring: &R,
    phi: &GFun<R::E>,
    psi: &AddChar,
    conv: &SqrtConvention<R::E>,
    exec: Exec,
) -> Result<GFun<R::E>, HarmonicError> {
    let k = FourierKernel::new(phi.alg.clone(), psi)?;
    let vals = exec.map(phi.alg.size() as usize, |a| k.transform_at(ring, phi, conv, k.entries(a as u32)));
    let values = vals.into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok(GFun::from_values(phi.alg.clone(), values))
}

/// `(Φ ⋆ Φ')(x) = |𝒢|^{-1/2} Σ_y Φ(y) Φ'(x - y)`.
pub fn convolve<R: CoeffRing>(
    ring: &R,
    a: &GFun<R::E>,
    b: &GFun<R::E>,
    conv: &SqrtConvention<R::E>,
    exec: Exec,
) -> Result<GFun<R::E>, HarmonicError> {
    a.same_ambient(b)?;
    let alg = a.alg.clone();
    let zero = ring.zero();
    let vals = exec.map(alg.size() as usize, |x| {
        let xe = alg.decode(x as u32);
        let mut acc = ring.zero();
        for y in alg.codes() {
            let v = a.get(y);
            if *v == zero {
                continue;
            }
            let d = alg.encode(&alg.add(&xe, &alg.neg(&alg.decode(y))));
            let w = b.get(d);
            if *w != zero {
                acc = ring.add(&acc, &ring.mul(v, w));
            }
        }
        ring.mul(&acc, &conv.inverse)
    });
    Ok(GFun::from_values(alg, vals))
}

/// `Σ Φ Φ'`.
pub fn pairing<R: CoeffRing>(ring: &R, a: &GFun<R::E>, b: &GFun<R::E>) -> Result<R::E, HarmonicError> {
    a.same_ambient(b)?;
    let mut acc = ring.zero();
    for (x, y) in a.values.iter().zip(&b.values) {
        acc = ring.add(&acc, &ring.mul(x, y));
    }
    Ok(acc)
}

pub fn pointwise_mul<R: CoeffRing>(ring: &R, a: &GFun<R::E>, b: &GFun<R::E>) -> Result<GFun<R::E>, HarmonicError> {
    a.same_ambient(b)?;
    let values = a.values.iter().zip(&b.values).map(|(x, y)| ring.mul(x, y)).collect();
    Ok(GFun::from_values(a.alg.clone(), values))
}

/// An `F_p`-subspace of an algebra.
///
/// The `F_p`-coordinates of a matrix are the base-`p` digits of its code, so
/// addition is digitwise.
#[derive(Clone, Debug)]
pub struct Subspace {
    alg: Arc<Algebra>,
    basis: Vec<Vec<u32>>,
    members: Vec<u32>,
    member_flags: Vec<bool>,
}

fn prime_field(p: u32) -> FieldTower {
    FieldTower::build(p, &[1]).expect("prime field")
}

impl Subspace {
    fn digits(alg: &Algebra) -> usize {
        alg.size_exponent() as usize
    }

    pub fn code_to_digits(alg: &Algebra, code: u32) -> Vec<u32> {
        let p = alg.tower().p();
        let mut c = code;
        (0..Self::digits(alg))
            .map(|_| {
                let r = c % p;
                c /= p;
                r
            })
            .collect()
    }

    pub fn digits_to_code(alg: &Algebra, d: &[u32]) -> u32 {
        let p = alg.tower().p();
        d.iter().rev().fold(0u32, |acc, &x| acc * p + x)
    }

    /// The `F_p`-span of the given matrices.
    pub fn span_of(alg: Arc<Algebra>, gens: &[Vec<u32>]) -> Subspace {
        let p = alg.tower().p();
        let pf = prime_field(p);
        let f = pf.level(1).unwrap();
        let dim = Self::digits(&alg);
        let rows: Vec<Vec<u32>> = gens
            .iter()
            .map(|g| Self::code_to_digits(&alg, alg.encode(g)))
            .collect();
        let basis = row_basis(f, &rows, dim);
        Self::from_digit_basis(alg, basis)
    }

    fn from_digit_basis(alg: Arc<Algebra>, basis: Vec<Vec<u32>>) -> Subspace {
        let p = alg.tower().p();
        let pf = prime_field(p);
        let f = pf.level(1).unwrap();
        let dim = Self::digits(&alg);
        let mut members = vec![0u32];
        for b in &basis {
            let mut next = Vec::with_capacity(members.len() * p as usize);
            for &m in &members {
                let md = Self::code_to_digits(&alg, m);
                for c in 0..p {
                    let v: Vec<u32> = (0..dim).map(|i| f.add(md[i], f.mul(c, b[i]))).collect();
                    next.push(Self::digits_to_code(&alg, &v));
                }
            }
            members = next;
        }
        members.sort_unstable();
        let mut member_flags = vec![false; alg.size() as usize];
        for &m in &members {
            member_flags[m as usize] = true;
        }
        Subspace {
            alg,
            basis,
            members,
            member_flags,
        }
    }

    /// The `k_base`-span of matrices, as an `F_p`-space.
    pub fn base_span(alg: Arc<Algebra>, base_deg: u32, gens: &[Vec<u32>]) -> Result<Subspace, FieldError> {
        let tower = alg.tower().clone();
        let p = tower.p();
        let f = alg.field();
        let scalars: Vec<u32> = (0..base_deg)
            .map(|j| tower.embed(FieldElem { deg: base_deg, code: p.pow(j) }, alg.deg()).map(|e| e.code))
            .collect::<Result<_, _>>()?;
        let mut all = Vec::new();
        for g in gens {
            for &s in &scalars {
                all.push(g.iter().map(|&x| f.mul(s, x)).collect::<Vec<u32>>());
            }
        }
        Ok(Self::span_of(alg, &all))
    }

    pub fn whole(alg: Arc<Algebra>) -> Subspace {
        let dim = Self::digits(&alg);
        let basis = (0..dim)
            .map(|i| (0..dim).map(|j| (i == j) as u32).collect())
            .collect();
        Self::from_digit_basis(alg, basis)
    }

    pub fn zero(alg: Arc<Algebra>) -> Subspace {
        Self::from_digit_basis(alg, Vec::new())
    }

    /// A random subspace spanned by `k` random vectors.
    pub fn random<G: Rng>(alg: Arc<Algebra>, rng: &mut G, k: usize) -> Subspace {
        let gens: Vec<Vec<u32>> = (0..k)
            .map(|_| alg.decode(rng.gen_range(0..alg.size() as u32)))
            .collect();
        Self::span_of(alg, &gens)
    }

    pub fn algebra(&self) -> &Arc<Algebra> {
        &self.alg
    }
    pub fn dim(&self) -> usize {
        self.basis.len()
    }
    pub fn members(&self) -> &[u32] {
        &self.members
    }
    pub fn len(&self) -> usize {
        self.members.len()
    }
    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
    pub fn contains(&self, code: u32) -> bool {
        self.member_flags[code as usize]
    }

    /// `𝓗^⊥ = {b : Ψ(ab) = 1 for all a ∈ 𝓗}`, by elimination on the `F_p`-form
    /// `b ↦ tr_{k/F_p}(t·tr(a_i b))`.
    pub fn perp(&self, psi: &AddChar) -> Result<Subspace, HarmonicError> {
        let alg = &self.alg;
        let p = alg.tower().p();
        let pf = prime_field(p);
        let f = pf.level(1).unwrap();
        let dim = Self::digits(alg);
        let unit: Vec<Vec<u32>> = (0..dim)
            .map(|d| alg.decode(p.pow(d as u32)))
            .collect();
        let rows: Vec<Vec<u32>> = self
            .basis
            .iter()
            .map(|a| {
                let ae = alg.decode(Self::digits_to_code(alg, a));
                unit.iter()
                    .map(|e| psi.algebra_exponent(alg, &alg.mul(&ae, e)))
                    .collect()
            })
            .collect();
        let ns = nullspace(f, &rows, dim);
        if ns.len() + self.dim() != dim {
            return Err(HarmonicError::Degenerate);
        }
        Ok(Self::from_digit_basis(alg.clone(), ns))
    }

    /// `{w h : h ∈ 𝓗}` as sorted codes.
    pub fn left_translate(&self, w: &[u32]) -> Vec<u32> {
        let mut v: Vec<u32> = self
            .members
            .iter()
            .map(|&h| self.alg.encode(&self.alg.mul(w, &self.alg.decode(h))))
            .collect();
        v.sort_unstable();
        v
    }
}

fn row_basis(f: &crate::fields::Field, rows: &[Vec<u32>], n: usize) -> Vec<Vec<u32>> {
    let mut a: Vec<Vec<u32>> = rows.to_vec();
    let mut out = Vec::new();
    let mut r = 0;
    for c in 0..n {
        let Some(p) = (r..a.len()).find(|&i| a[i][c] != 0) else {
            continue;
        };
        a.swap(p, r);
        let inv = f.inv(a[r][c]).unwrap();
        for k in 0..n {
            a[r][k] = f.mul(a[r][k], inv);
        }
        for i in 0..a.len() {
            if i != r && a[i][c] != 0 {
                let t = a[i][c];
                for k in 0..n {
                    let s = f.mul(t, a[r][k]);
                    a[i][k] = f.sub(a[i][k], s);
                }
            }
        }
        out.push(a[r].clone());
        r += 1;
    }
    out
}

#[derive(Clone, Debug)]
pub struct PoissonReport<E> {
    pub lhs: E,
    pub rhs: E,
    pub equal: bool,
    pub perp_size: usize,
}

/// `Σ_{a∈𝓗} Φ(a x)` against `|𝓗|·|𝒢|^{-1/2}·Σ_{b∈𝓗^⊥} F_ψ(Φ)(x^{-1} b)`.
pub fn poisson_check<R: CoeffRing>(
    ring: &R,
    phi: &GFun<R::E>,
    h: &Subspace,
    x: &[u32],
    psi: &AddChar,
    conv: &SqrtConvention<R::E>,
    exec: Exec,
) -> Result<PoissonReport<R::E>, HarmonicError> {
    let alg = phi.alg.clone();
    let xinv = alg.inverse(x).ok_or(HarmonicError::NotInvertible)?;
    let mut lhs = ring.zero();
    for &a in h.members() {
        let ax = alg.encode(&alg.mul(&alg.decode(a), x));
        lhs = ring.add(&lhs, phi.get(ax));
    }
    let perp = h.perp(psi)?;
    let k = FourierKernel::new(alg.clone(), psi)?;
    let terms = exec.map(perp.len(), |i| {
        let b = alg.decode(perp.members()[i]);
        k.transform_at(ring, phi, conv, &alg.mul(&xinv, &b))
    });
    let mut s = ring.zero();
    for t in terms {
        s = ring.add(&s, &t?);
    }
    let rhs = ring.mul(&ring.mul(&ring.from_int(h.len() as i64), &conv.inverse), &s);
    Ok(PoissonReport {
        equal: lhs == rhs,
        lhs,
        rhs,
        perp_size: perp.len(),
    })
}

/// Histogram over `ζ_N` exponents of `Σ_{x≠0} ξ^{-1}(x) ψ(x)` on one level.
pub fn gauss_sum_counts(xi: &MultChar, psi: &AddChar, n: u64) -> Vec<i64> {
    let f = xi.tower().level(xi.deg()).unwrap();
    let mut c = vec![0i64; n as usize];
    let step = n / psi.p() as u64;
    for x in f.units() {
        let k = (psi.exponent(x) as u64 * step + n - xi.root_index(n, x).unwrap()) % n;
        c[k as usize] += 1;
    }
    c
}

/// `γ(ξ, ψ) = |k_d|^{-1/2} Σ_{x ∈ k_d^×} ξ^{-1}(x) ψ(x)`, where `ψ` is already
/// composed with the trace down to its base.
pub fn gauss_sum_gamma<R: CoeffRing>(ring: &R, xi: &MultChar, psi: &AddChar) -> Result<R::E, HarmonicError> {
    if psi.is_trivial() {
        return Err(HarmonicError::TrivialCharacter);
    }
    if psi.deg() != xi.deg() {
        return Err(HarmonicError::AmbientMismatch);
    }
    let n = ring.order();
    if !n.is_multiple_of(xi.order()) || !n.is_multiple_of(psi.p() as u64) {
        return Err(ScalarError::MissingRoot(xi.order()).into());
    }
    let s = ring.eval_counts(&gauss_sum_counts(xi, psi, n));
    let conv = sqrt_group_order(ring, psi.p() as u64, xi.deg())?;
    Ok(ring.mul(&s, &conv.inverse))
}

/// `Π_Φ(x_1, x_2) = Σ_x Φ((x_1 x; 0 x_2))` on `M_{n_1} × M_{n_2}`.
pub fn block_restrict<R: CoeffRing>(
    ring: &R,
    phi: &GFun<R::E>,
    target: Arc<Algebra>,
) -> Result<GFun<R::E>, HarmonicError> {
    let src = phi.alg.clone();
    let n = src.is_square_single().ok_or(HarmonicError::AmbientMismatch)?;
    let (n1, n2) = match target.blocks() {
        [a, b] if a + b == n => (*a, *b),
        _ => return Err(HarmonicError::AmbientMismatch),
    };
    let q = src.q() as u64;
    let corner = q.pow((n1 * n2) as u32);
    let o2 = target.block_offset(1);
    let out = GFun::from_fn(target.clone(), |c| {
        let t = target.decode(c);
        let mut m = src.zero();
        for i in 0..n1 {
            for j in 0..n1 {
                m[i * n + j] = t[i * n1 + j];
            }
        }
        for i in 0..n2 {
            for j in 0..n2 {
                m[(n1 + i) * n + n1 + j] = t[o2 + i * n2 + j];
            }
        }
        let mut acc = ring.zero();
        for mut k in 0..corner {
            for i in 0..n1 {
                for j in 0..n2 {
                    m[i * n + n1 + j] = (k % q) as u32;
                    k /= q;
                }
            }
            acc = ring.add(&acc, phi.get(src.encode(&m)));
        }
        acc
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matspace::Budget;
    use crate::scalars::Cyclo;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setup(p: u32, d: u32, n: usize) -> (Arc<Algebra>, AddChar) {
        let t = Arc::new(FieldTower::build(p, &[1, d]).unwrap());
        let a = Algebra::matrices(t.clone(), d, n, &Budget::default()).unwrap();
        (a, AddChar::standard(t, d).unwrap())
    }

    #[test]
    fn addchar_group_law() {
        let (a, psi) = setup(3, 2, 1);
        let f = a.field();
        let tw = a.tower().clone();
        let mut seen = std::collections::HashSet::new();
        for t in f.elements() {
            let ps = AddChar::new(tw.clone(), 2, t).unwrap();
            let sig: Vec<u32> = f.elements().map(|x| ps.exponent(x)).collect();
            assert!(seen.insert(sig));
            for s in f.elements() {
                let pt = AddChar::new(tw.clone(), 2, s).unwrap();
                let prod = ps.product(&pt);
                for x in f.elements() {
                    assert_eq!((ps.exponent(x) + pt.exponent(x)) % 3, prod.exponent(x));
                }
            }
        }
        assert_eq!(seen.len(), 9);
        let total: Vec<u32> = f.elements().map(|x| psi.exponent(x)).collect();
        for j in 0..3 {
            assert_eq!(total.iter().filter(|&&e| e == j).count(), 3);
        }
    }

    #[test]
    fn multchar_homomorphism() {
        let t = Arc::new(FieldTower::build(3, &[1, 2]).unwrap());
        let r = Cyclo::new(8).unwrap();
        let xi = MultChar::new(t.clone(), 2, 3).unwrap();
        let f = t.level(2).unwrap();
        for x in f.units() {
            for y in f.units() {
                assert_eq!(
                    xi.value(&r, f.mul(x, y)).unwrap(),
                    r.mul(&xi.value(&r, x).unwrap(), &xi.value(&r, y).unwrap())
                );
            }
        }
        assert_eq!(xi.order(), 8);
        assert_eq!(MultChar::new(t.clone(), 2, 2).unwrap().restrict(1).unwrap().exponent_param(), 0);
        assert_eq!(MultChar::new(t, 2, 1).unwrap().restrict(1).unwrap().exponent_param(), 0);
    }

    #[test]
    fn delta_and_constant() {
        let (a, psi) = setup(3, 1, 2);
        let r = Cyclo::new(3).unwrap();
        let conv = algebra_sqrt(&r, &a).unwrap();
        let d = delta(&r, a.clone(), 0);
        let fd = fourier(&r, &d, &psi, &conv, Exec::Parallel).unwrap();
        assert_eq!(fd, GFun::constant(a.clone(), conv.inverse.clone()));
        let one = GFun::constant(a.clone(), r.one());
        let f1 = fourier(&r, &one, &psi, &conv, Exec::Parallel).unwrap();
        let mut expect = GFun::constant(a.clone(), r.zero());
        expect.set(0, conv.value.clone());
        assert_eq!(f1, expect);
    }

    #[test]
    fn inversion_convolution_parseval() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (p, n) in [(3, 1), (5, 1), (3, 2)] {
            let (a, psi) = setup(p, 1, n);
            let r = Cyclo::new(if a.size_exponent() % 2 == 0 { p as u64 } else { 4 * p as u64 }).unwrap();
            let conv = algebra_sqrt(&r, &a).unwrap();
            for _ in 0..3 {
                let f = random_gfun(&r, a.clone(), &mut rng, 3);
                let g = random_gfun(&r, a.clone(), &mut rng, 3);
                let ff = fourier(&r, &f, &psi, &conv, Exec::Parallel).unwrap();
                assert_eq!(fourier(&r, &ff, &psi.inverse(), &conv, Exec::Parallel).unwrap(), f);
                let c = convolve(&r, &f, &g, &conv, Exec::Parallel).unwrap();
                let fc = fourier(&r, &c, &psi, &conv, Exec::Parallel).unwrap();
                let fg = fourier(&r, &g, &psi, &conv, Exec::Parallel).unwrap();
                assert_eq!(fc, pointwise_mul(&r, &ff, &fg).unwrap());
                let gi = fourier(&r, &g, &psi.inverse(), &conv, Exec::Parallel).unwrap();
                assert_eq!(pairing(&r, &f, &g).unwrap(), pairing(&r, &ff, &gi).unwrap());
            }
        }
    }

    #[test]
    fn delta_convolution_scales() {
        let (a, _) = setup(5, 1, 1);
        let r = Cyclo::new(20).unwrap();
        let conv = algebra_sqrt(&r, &a).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = random_gfun(&r, a.clone(), &mut rng, 4);
        let c = convolve(&r, &delta(&r, a.clone(), 0), &f, &conv, Exec::Sequential).unwrap();
        let expect = GFun::from_fn(a, |x| r.mul(f.get(x), &conv.inverse));
        assert_eq!(c, expect);
    }

    #[test]
    fn perp_dimensions_and_poisson() {
        let (a, psi) = setup(3, 1, 2);
        let r = Cyclo::new(3).unwrap();
        let conv = algebra_sqrt(&r, &a).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = vec![1, 1, 0, 2];
        for k in 0..5 {
            let h = Subspace::random(a.clone(), &mut rng, k);
            let hp = h.perp(&psi).unwrap();
            assert_eq!(h.dim() + hp.dim(), 4);
            let f = random_gfun(&r, a.clone(), &mut rng, 2);
            let rep = poisson_check(&r, &f, &h, &x, &psi, &conv, Exec::Parallel).unwrap();
            assert!(rep.equal);
        }
        let whole = Subspace::whole(a.clone());
        assert_eq!(whole.perp(&psi).unwrap().len(), 1);
        assert_eq!(Subspace::zero(a).perp(&psi).unwrap().len(), 81);
    }

    #[test]
    fn galois_perp_is_delta_translate() {
        let (a, psi) = setup(3, 2, 2);
        let tw = a.tower().clone();
        let id = a.identity();
        let units: Vec<Vec<u32>> = (0..4)
            .map(|k| {
                let mut e = a.zero();
                e[k] = 1;
                e
            })
            .collect();
        let h = Subspace::base_span(a.clone(), 1, &units).unwrap();
        assert_eq!(h.len(), 81);
        let delta_el = tw.trace_zero_element(2, 1).unwrap();
        let w = a.scalar(delta_el.code);
        let psi0 = AddChar::lift(&AddChar::standard(tw.clone(), 1).unwrap(), 2).unwrap();
        let hp = h.perp(&psi0).unwrap();
        assert_eq!(hp.members().to_vec(), h.left_translate(&w));
        let _ = (psi, id);
    }

    #[test]
    fn gauss_sums() {
        let t = Arc::new(FieldTower::build(3, &[1, 2]).unwrap());
        let r = Cyclo::new(24).unwrap();
        let psi1 = AddChar::standard(t.clone(), 1).unwrap();
        let triv = MultChar::trivial(t.clone(), 1).unwrap();
        let g = gauss_sum_gamma(&r, &triv, &psi1).unwrap();
        let s3 = r.sqrt_p(3).unwrap();
        assert_eq!(g, r.neg(&r.inv(&s3).unwrap()));
        let eta = MultChar::new(t.clone(), 1, 1).unwrap();
        let ge = gauss_sum_gamma(&r, &eta, &psi1).unwrap();
        assert_eq!(r.mul(&ge, &ge), r.from_int(-1));
        let xi = MultChar::new(t.clone(), 2, 2).unwrap();
        let psi2 = psi1.lift(2).unwrap();
        let d = t.trace_zero_element(2, 1).unwrap();
        assert_eq!(gauss_sum_gamma(&r, &xi, &psi2).unwrap(), xi.value(&r, d.code).unwrap());
        assert_eq!(xi.value(&r, d.code).unwrap(), r.from_int(-1));
    }

    #[test]
    fn block_restriction_commutes() {
        let (a, psi) = setup(3, 1, 2);
        let tw = a.tower().clone();
        let prod = Algebra::new(tw, 1, &[1, 1], &Budget::default()).unwrap();
        let r = Cyclo::new(3).unwrap();
        let conv = algebra_sqrt(&r, &a).unwrap();
        let conv_p = algebra_sqrt(&r, &prod).unwrap();
        let d = block_restrict(&r, &delta(&r, a.clone(), 0), prod.clone()).unwrap();
        assert_eq!(d, delta(&r, prod.clone(), 0));
        let c = block_restrict(&r, &GFun::constant(a.clone(), r.one()), prod.clone()).unwrap();
        assert_eq!(c, GFun::constant(prod.clone(), r.from_int(3)));
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let f = random_gfun(&r, a.clone(), &mut rng, 3);
        let lhs = fourier(&r, &block_restrict(&r, &f, prod.clone()).unwrap(), &psi, &conv_p, Exec::Parallel).unwrap();
        let rhs = block_restrict(&r, &fourier(&r, &f, &psi, &conv, Exec::Parallel).unwrap(), prod).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn json_roundtrip() {
        let (a, _) = setup(3, 1, 1);
        let r = Cyclo::new(12).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let f = random_gfun(&r, a.clone(), &mut rng, 2);
        let back = gfun_from_json(&r, a, &gfun_to_json(&r, &f)).unwrap();
        assert_eq!(back, f);
    }
}
