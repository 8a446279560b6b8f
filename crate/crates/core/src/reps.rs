//! Representation models with root-of-unity entries, class functions, induced
//! characters, and character sums over subgroups.
//!
//! Model entries are integer combinations of `ζ_N^k` over a per-matrix
//! denominator, so they can be evaluated in any coefficient ring of order `N`.

use crate::exec::Exec;
use crate::fields::{FieldElem, FieldError, FieldTower};
use crate::harmonic::{AddChar, MultChar};
use crate::matspace::{gl_order, Algebra, Budget, ClassMap, GroupTable, MatError};
use crate::scalars::{CoeffRing, ScalarError};
use serde_json::{json, Value};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RepError {
    #[error(transparent)]
    Mat(#[from] MatError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
    #[error("character {0} is not regular")]
    NotRegular(String),
    #[error("character is not irreducible")]
    NotIrreducible,
    #[error("invariant dimension is not an integer")]
    NotInteger,
    #[error("invariant space has dimension {0}, expected 1")]
    NotOneDimensional(String),
    #[error("groups do not match")]
    GroupMismatch,
    #[error("ring order {ring} lacks roots of order {needed}")]
    RingTooSmall { ring: u64, needed: u64 },
}

/// `GL_n(k)` with its table and conjugacy classes.
pub struct GlGroup {
    pub tower: Arc<FieldTower>,
    pub deg: u32,
    pub n: usize,
    pub alg: Arc<Algebra>,
    pub group: Arc<GroupTable>,
    pub classes: Arc<ClassMap>,
}

impl std::fmt::Debug for GlGroup {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.label())
    }
}

impl GlGroup {
    pub fn new(
        tower: Arc<FieldTower>,
        deg: u32,
        n: usize,
        budget: &Budget,
        exec: Exec,
    ) -> Result<Arc<GlGroup>, MatError> {
        Self::with_blocks(tower, deg, &[n], budget, exec)
    }

    /// `GL_{n_1} × ... × GL_{n_k}` as the units of a product algebra; `n = Σ n_i`.
    pub fn with_blocks(
        tower: Arc<FieldTower>,
        deg: u32,
        blocks: &[usize],
        budget: &Budget,
        exec: Exec,
    ) -> Result<Arc<GlGroup>, MatError> {
        let n = blocks.iter().sum();
        let alg = Algebra::new(tower.clone(), deg, blocks, budget)?;
        let group = GroupTable::build(alg.clone(), exec)?;
        let classes = ClassMap::build(&group, budget, exec)?;
        Ok(Arc::new(GlGroup {
            tower,
            deg,
            n,
            alg,
            group,
            classes,
        }))
    }

    pub fn q(&self) -> u32 {
        self.alg.q()
    }
    pub fn order(&self) -> usize {
        self.group.order()
    }
    pub fn label(&self) -> String {
        let q = self.q();
        let parts: Vec<String> = self.alg.blocks().iter().map(|b| format!("GL_{}(F_{})", b, q)).collect();
        parts.join("x")
    }
    pub fn is_single(&self) -> bool {
        self.alg.blocks().len() == 1
    }
    pub fn field(&self) -> &crate::fields::Field {
        self.alg.field()
    }
    /// Index of `z·1`.
    pub fn scalar_index(&self, z: u32) -> u32 {
        self.group.index_of_entries(&self.alg.scalar(z)).unwrap()
    }
    pub fn det(&self, g: u32) -> u32 {
        self.alg.block_det(self.group.entries(g), 0)
    }
}

/// A sparse combination `Σ c ζ_N^k`.
pub type RootSum = Vec<(u32, i64)>;

/// A matrix with `RootSum` entries over a common denominator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootMatrix {
    pub dim: usize,
    pub den: i64,
    pub entries: Vec<RootSum>,
}

impl RootMatrix {
    pub fn entry(&self, i: usize, j: usize) -> &RootSum {
        &self.entries[i * self.dim + j]
    }

    /// Dense counts of `den_other · self·other` entry `(i,j)`'s numerator.
    pub fn product_counts(&self, other: &RootMatrix, n: u64, i: usize, j: usize, out: &mut [i64]) {
        for k in 0..self.dim {
            let a = self.entry(i, k);
            if a.is_empty() {
                continue;
            }
            let b = other.entry(k, j);
            for &(ea, ca) in a {
                for &(eb, cb) in b {
                    out[((ea as u64 + eb as u64) % n) as usize] += ca * cb;
                }
            }
        }
    }

    pub fn trace_counts(&self, n: u64) -> Vec<i64> {
        let mut c = vec![0i64; n as usize];
        for i in 0..self.dim {
            for &(e, v) in self.entry(i, i) {
                c[e as usize] += v;
            }
        }
        c
    }

    pub fn evaluate<R: CoeffRing>(&self, ring: &R) -> Result<Vec<R::E>, ScalarError> {
        let n = ring.order() as usize;
        let dinv = ring.inv(&ring.from_int(self.den))?;
        Ok(self
            .entries
            .iter()
            .map(|e| {
                let mut c = vec![0i64; n];
                for &(k, v) in e {
                    c[k as usize] += v;
                }
                ring.mul(&ring.eval_counts(&c), &dinv)
            })
            .collect())
    }
}

/// A representation given by explicit root-sum matrices.
pub trait RootRep: Send + Sync {
    fn gl(&self) -> &Arc<GlGroup>;
    fn dim(&self) -> usize;
    /// The `N` of the exponents.
    fn order(&self) -> u64;
    fn matrix(&self, g: u32) -> RootMatrix;
    fn label(&self) -> String;

    /// `(counts, den)` with `trace ρ(g) = Σ counts_k ζ^k / den`.
    fn trace_counts(&self, g: u32) -> (Vec<i64>, i64) {
        let m = self.matrix(g);
        (m.trace_counts(self.order()), m.den)
    }
}

fn merge(mut v: RootSum) -> RootSum {
    v.sort_unstable_by_key(|t| t.0);
    let mut out: RootSum = Vec::with_capacity(v.len());
    for (k, c) in v {
        match out.last_mut() {
            Some(l) if l.0 == k => l.1 += c,
            _ => out.push((k, c)),
        }
    }
    out.retain(|t| t.1 != 0);
    out
}

/// A character `ξ` of `GL_1(k) = k^×`.
pub struct Gl1Model {
    gl: Arc<GlGroup>,
    xi: MultChar,
    n: u64,
}

impl Gl1Model {
    pub fn new(gl: Arc<GlGroup>, xi: MultChar, n: u64) -> Result<Gl1Model, RepError> {
        if gl.alg.blocks() != [1] || xi.deg() != gl.deg {
            return Err(RepError::GroupMismatch);
        }
        if !n.is_multiple_of(xi.order()) {
            return Err(RepError::RingTooSmall {
                ring: n,
                needed: xi.order(),
            });
        }
        Ok(Gl1Model { gl, xi, n })
    }
}

impl RootRep for Gl1Model {
    fn gl(&self) -> &Arc<GlGroup> {
        &self.gl
    }
    fn dim(&self) -> usize {
        1
    }
    fn order(&self) -> u64 {
        self.n
    }
    fn matrix(&self, g: u32) -> RootMatrix {
        let x = self.gl.group.entries(g)[0];
        RootMatrix {
            dim: 1,
            den: 1,
            entries: vec![vec![(self.xi.root_index(self.n, x).unwrap() as u32, 1)]],
        }
    }
    fn label(&self) -> String {
        format!("char(q={},xi={})", self.gl.q(), self.xi.exponent_param())
    }
}

/// Kirillov-type model of the cuspidal `π(ξ)` of `GL_2(k)` on functions on `k^×`.
///
/// Upper triangular `(a b; 0 d)` sends `e_x` to `ξ(d) ψ(b x / d) e_{a x / d}`.
/// Other elements factor as `(1 x; 0 1) · W · (α β; 0 δ)` with
/// `W[x,y] = -q^{-1} ξ(y)^{-1} Σ_{N(t) = x y} ψ(tr t) ξ(t)`.
pub struct KirillovModel {
    gl: Arc<GlGroup>,
    xi: MultChar,
    n: u64,
    psi_idx: Vec<u32>,
    xi_low: Vec<u32>,
    log: Vec<u32>,
    units: Vec<u32>,
    bessel: Vec<RootSum>,
}

impl KirillovModel {
    /// `ξ` lives on the level `2·deg`; `N` must contain `p` and the order of `ξ`.
    pub fn new(gl: Arc<GlGroup>, xi: MultChar, n: u64) -> Result<KirillovModel, RepError> {
        let d = gl.deg;
        if gl.alg.blocks() != [2] || xi.deg() != 2 * d {
            return Err(RepError::GroupMismatch);
        }
        let tower = gl.tower.clone();
        let f = tower.level(d)?;
        let q = f.size() as u64;
        let p = tower.p() as u64;
        if xi.pow(q as i64).exponent_param() == xi.exponent_param() {
            return Err(RepError::NotRegular(format!("a={}", xi.exponent_param())));
        }
        if !n.is_multiple_of(xi.order()) || !n.is_multiple_of(p) {
            return Err(RepError::RingTooSmall {
                ring: n,
                needed: xi.order() * p,
            });
        }
        let psi = AddChar::standard(tower.clone(), d)?;
        let step = n / p;
        let psi_idx: Vec<u32> = f.elements().map(|x| (psi.exponent(x) as u64 * step) as u32).collect();
        let mut xi_low = vec![0u32; q as usize];
        for x in f.units() {
            let up = tower.embed(FieldElem { deg: d, code: x }, 2 * d)?;
            xi_low[x as usize] = xi.root_index(n, up.code).unwrap() as u32;
        }
        let mut log = vec![u32::MAX; q as usize];
        let units: Vec<u32> = (0..q - 1).map(|k| f.exp(k)).collect();
        for (i, &u) in units.iter().enumerate() {
            log[u as usize] = i as u32;
        }
        let hi = tower.level(2 * d)?;
        let mut bessel: Vec<RootSum> = vec![Vec::new(); q as usize];
        for t in hi.units() {
            let te = FieldElem { deg: 2 * d, code: t };
            let nm = tower.relative_norm(te, d)?.code;
            let tr = tower.relative_trace(te, d)?.code;
            let k = (psi_idx[tr as usize] as u64 + xi.root_index(n, t).unwrap()) % n;
            bessel[nm as usize].push((k as u32, 1));
        }
        let bessel = bessel.into_iter().map(merge).collect();
        Ok(KirillovModel {
            gl,
            xi,
            n,
            psi_idx,
            xi_low,
            log,
            units,
            bessel,
        })
    }

    pub fn xi(&self) -> &MultChar {
        &self.xi
    }

    fn borel(&self, a: u32, b: u32, d: u32) -> RootMatrix {
        let f = self.gl.field();
        let q = f.size() as i64;
        let dim = self.units.len();
        let mut entries = vec![Vec::new(); dim * dim];
        let dinv = f.inv(d).unwrap();
        for (i, &x) in self.units.iter().enumerate() {
            let y = f.mul(f.mul(a, x), dinv);
            let j = self.log[y as usize] as usize;
            let k = (self.xi_low[d as usize] as u64 + self.psi_idx[f.mul(f.mul(b, x), dinv) as usize] as u64) % self.n;
            entries[i * dim + j] = vec![(k as u32, q)];
        }
        RootMatrix { dim, den: q, entries }
    }
}

impl RootRep for KirillovModel {
    fn gl(&self) -> &Arc<GlGroup> {
        &self.gl
    }
    fn dim(&self) -> usize {
        self.units.len()
    }
    fn order(&self) -> u64 {
        self.n
    }
    fn label(&self) -> String {
        format!("cuspidal(q={},xi={})", self.gl.q(), self.xi.exponent_param())
    }

    fn matrix(&self, g: u32) -> RootMatrix {
        let f = self.gl.field();
        let e = self.gl.group.entries(g);
        let (a, b, c, d) = (e[0], e[1], e[2], e[3]);
        if c == 0 {
            return self.borel(a, b, d);
        }
        let q = f.size() as i64;
        let n = self.n;
        let cinv = f.inv(c).unwrap();
        let x0 = f.mul(a, cinv);
        let alpha = f.neg(c);
        let beta = f.neg(d);
        let det = f.sub(f.mul(a, d), f.mul(b, c));
        let delta = f.neg(f.mul(det, cinv));
        let dinv = f.inv(delta).unwrap();
        let ainv = f.inv(alpha).unwrap();
        let dim = self.units.len();
        let mut entries = vec![Vec::new(); dim * dim];
        for (i, &x) in self.units.iter().enumerate() {
            let left = self.psi_idx[f.mul(x0, x) as usize] as u64;
            for (j, &z) in self.units.iter().enumerate() {
                let y = f.mul(f.mul(z, delta), ainv);
                let right = self.xi_low[delta as usize] as u64
                    + self.psi_idx[f.mul(f.mul(beta, y), dinv) as usize] as u64;
                let shift = left + right + n - self.xi_low[y as usize] as u64;
                entries[i * dim + j] = self.bessel[f.mul(x, y) as usize]
                    .iter()
                    .map(|&(k, v)| (((k as u64 + shift) % n) as u32, -v))
                    .collect();
            }
        }
        RootMatrix { dim, den: q, entries }
    }

    fn trace_counts(&self, g: u32) -> (Vec<i64>, i64) {
        let f = self.gl.field();
        let e = self.gl.group.entries(g);
        let (a, b, c, d) = (e[0], e[1], e[2], e[3]);
        let q = f.size() as i64;
        let n = self.n;
        let mut counts = vec![0i64; n as usize];
        if c == 0 {
            if a == d {
                let dinv = f.inv(d).unwrap();
                for &x in &self.units {
                    let k = (self.xi_low[d as usize] as u64 + self.psi_idx[f.mul(f.mul(b, x), dinv) as usize] as u64) % n;
                    counts[k as usize] += 1;
                }
            }
            return (counts, 1);
        }
        let cinv = f.inv(c).unwrap();
        let x0 = f.mul(a, cinv);
        let alpha = f.neg(c);
        let beta = f.neg(d);
        let det = f.sub(f.mul(a, d), f.mul(b, c));
        let delta = f.neg(f.mul(det, cinv));
        let dinv = f.inv(delta).unwrap();
        let ainv = f.inv(alpha).unwrap();
        for &x in &self.units {
            let y = f.mul(f.mul(x, delta), ainv);
            let shift = self.psi_idx[f.mul(x0, x) as usize] as u64
                + self.xi_low[delta as usize] as u64
                + self.psi_idx[f.mul(f.mul(beta, y), dinv) as usize] as u64
                + n
                - self.xi_low[y as usize] as u64;
            for &(k, v) in &self.bessel[f.mul(x, y) as usize] {
                counts[((k as u64 + shift) % n) as usize] -= v;
            }
        }
        (counts, q)
    }
}

/// `ρ(g)ρ(h) = ρ(gh)` for the given pairs; returns the first failing pair.
pub fn check_homomorphism<R: CoeffRing, M: RootRep + ?Sized>(
    ring: &R,
    model: &M,
    pairs: &[(u32, u32)],
    exec: Exec,
) -> Option<(u32, u32)> {
    let n = model.order();
    let g = model.gl().group.clone();
    let bad = exec.map(pairs.len(), |i| {
        let (x, y) = pairs[i];
        let a = model.matrix(x);
        let b = model.matrix(y);
        let c = model.matrix(g.mul(x, y));
        let dim = a.dim;
        let mut buf = vec![0i64; n as usize];
        for r in 0..dim {
            for s in 0..dim {
                buf.iter_mut().for_each(|v| *v = 0);
                a.product_counts(&b, n, r, s, &mut buf);
                buf.iter_mut().for_each(|v| *v *= c.den);
                for &(k, v) in c.entry(r, s) {
                    buf[k as usize] -= v * a.den * b.den;
                }
                if buf.iter().any(|&v| v != 0) && !ring.is_zero(&ring.eval_counts(&buf)) {
                    return true;
                }
            }
        }
        false
    });
    bad.iter().position(|&b| b).map(|i| pairs[i])
}

/// A class function, stored per conjugacy class.
#[derive(Clone, Debug)]
pub struct ClassFun<E> {
    gl: Arc<GlGroup>,
    values: Vec<E>,
}

impl<E: Clone + PartialEq> PartialEq for ClassFun<E> {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.gl, &other.gl) && self.values == other.values
    }
}

impl<E: Clone + PartialEq> ClassFun<E> {
    pub fn from_class_values(gl: Arc<GlGroup>, values: Vec<E>) -> ClassFun<E> {
        assert_eq!(values.len(), gl.classes.count());
        ClassFun { gl, values }
    }

    /// Evaluates `f` at each class representative.
    pub fn from_rep_fn<F: Fn(u32) -> E + Sync + Send>(gl: Arc<GlGroup>, f: F, exec: Exec) -> ClassFun<E>
    where
        E: Send,
    {
        let classes = gl.classes.clone();
        let values = exec.map(classes.count(), |c| f(classes.rep(c)));
        ClassFun { gl, values }
    }

    pub fn gl(&self) -> &Arc<GlGroup> {
        &self.gl
    }
    pub fn at(&self, g: u32) -> &E {
        &self.values[self.gl.classes.class_of(g)]
    }
    pub fn at_class(&self, c: usize) -> &E {
        &self.values[c]
    }
    pub fn class_values(&self) -> &[E] {
        &self.values
    }
    pub fn degree(&self) -> &E {
        self.at(self.gl.group.identity())
    }

    /// `g ↦ χ(g^{-1})`.
    pub fn dual(&self) -> ClassFun<E> {
        let c = &self.gl.classes;
        let values = (0..c.count()).map(|k| self.values[c.inverse(k)].clone()).collect();
        ClassFun {
            gl: self.gl.clone(),
            values,
        }
    }

    pub fn map<F: Fn(&E) -> E>(&self, f: F) -> ClassFun<E> {
        ClassFun {
            gl: self.gl.clone(),
            values: self.values.iter().map(f).collect(),
        }
    }

    pub fn zip<F: Fn(&E, &E) -> E>(&self, other: &ClassFun<E>, f: F) -> Result<ClassFun<E>, RepError> {
        if !Arc::ptr_eq(&self.gl, &other.gl) {
            return Err(RepError::GroupMismatch);
        }
        Ok(ClassFun {
            gl: self.gl.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| f(a, b)).collect(),
        })
    }
}

/// Trace character of a model.
pub fn character_of<R: CoeffRing, M: RootRep + ?Sized>(ring: &R, model: &M, exec: Exec) -> Result<ClassFun<R::E>, RepError> {
    if ring.order() != model.order() {
        return Err(RepError::RingTooSmall {
            ring: ring.order(),
            needed: model.order(),
        });
    }
    let gl = model.gl().clone();
    let vals = exec.map(gl.classes.count(), |c| {
        let (counts, den) = model.trace_counts(gl.classes.rep(c));
        ring.div(&ring.eval_counts(&counts), &ring.from_int(den))
    });
    let values = vals.into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok(ClassFun::from_class_values(gl, values))
}

pub fn trivial_character<R: CoeffRing>(ring: &R, gl: Arc<GlGroup>) -> ClassFun<R::E> {
    let n = gl.classes.count();
    ClassFun::from_class_values(gl, vec![ring.one(); n])
}

/// `χ ∘ det` for a character `χ` of `k^×`.
pub fn det_character<R: CoeffRing>(ring: &R, gl: Arc<GlGroup>, chi: &MultChar) -> Result<ClassFun<R::E>, RepError> {
    let g2 = gl.clone();
    let vals = ClassFun::from_rep_fn(gl, move |g| chi.value(ring, g2.det(g)), Exec::Sequential);
    let values = vals.values.into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok(ClassFun::from_class_values(vals.gl, values))
}

/// `(1/|G|) Σ_g a(g) b(g^{-1})`.
pub fn inner<R: CoeffRing>(ring: &R, a: &ClassFun<R::E>, b: &ClassFun<R::E>) -> Result<R::E, RepError> {
    if !Arc::ptr_eq(&a.gl, &b.gl) {
        return Err(RepError::GroupMismatch);
    }
    let c = &a.gl.classes;
    let mut acc = ring.zero();
    for k in 0..c.count() {
        let t = ring.mul(&a.values[k], &b.values[c.inverse(k)]);
        acc = ring.add(&acc, &ring.mul(&ring.from_int(c.size(k) as i64), &t));
    }
    Ok(ring.div(&acc, &ring.from_int(c.group_order() as i64))?)
}

/// `(1/|H|) Σ_{h ∈ H} χ(w h)`, with `w` the identity when absent.
pub fn subgroup_average<R: CoeffRing>(
    ring: &R,
    chi: &ClassFun<R::E>,
    h: &[u32],
    w: Option<u32>,
) -> Result<R::E, RepError> {
    let g = &chi.gl.group;
    let mut acc = ring.zero();
    for &x in h {
        let y = match w {
            Some(w) => g.mul(w, x),
            None => x,
        };
        acc = ring.add(&acc, chi.at(y));
    }
    Ok(ring.div(&acc, &ring.from_int(h.len() as i64))?)
}

/// `dim Hom_H(π, 1)` as a ring element (its residue in positive characteristic).
pub fn hom_dim<R: CoeffRing>(ring: &R, chi: &ClassFun<R::E>, h: &[u32]) -> Result<R::E, RepError> {
    subgroup_average(ring, chi, h, None)
}

/// The scalar by which `w` acts on the line of `H`-invariant forms.
pub fn period_sign<R: CoeffRing>(ring: &R, chi: &ClassFun<R::E>, h: &[u32], w: u32) -> Result<R::E, RepError> {
    let d = hom_dim(ring, chi, h)?;
    if d != ring.one() {
        return Err(RepError::NotOneDimensional(format!("{:?}", d)));
    }
    subgroup_average(ring, chi, h, Some(w))
}

/// Nonnegative integer value of a characteristic-zero ring element, if any.
pub fn as_small_integer(ring: &crate::scalars::Cyclo, x: &crate::scalars::CycloElem) -> Option<i64> {
    let _ = ring;
    let (n, d) = x.as_rational()?;
    if d != 1.into() {
        return None;
    }
    i64::try_from(&n).ok()
}

/// `dim V^U` for every standard maximal unipotent radical.
pub fn coinvariant_dims<R: CoeffRing>(ring: &R, chi: &ClassFun<R::E>) -> Result<Vec<R::E>, RepError> {
    chi.gl
        .group
        .maximal_radicals()
        .iter()
        .map(|u| subgroup_average(ring, chi, u, None))
        .collect()
}

pub fn is_cuspidal<R: CoeffRing>(ring: &R, chi: &ClassFun<R::E>) -> Result<bool, RepError> {
    Ok(coinvariant_dims(ring, chi)?.iter().all(|d| ring.is_zero(d)))
}

/// `ω(z) = χ(z·1)/χ(1)`.
pub fn central_character<R: CoeffRing>(ring: &R, chi: &ClassFun<R::E>, z: u32) -> Result<R::E, RepError> {
    let gl = &chi.gl;
    Ok(ring.div(chi.at(gl.scalar_index(z)), chi.degree())?)
}

/// Character of `Ind_P^G (χ_1 ⊗ ... ⊗ χ_k)` for the standard parabolic of the composition.
pub fn induced_character<R: CoeffRing>(
    ring: &R,
    gl: Arc<GlGroup>,
    levi: &[&ClassFun<R::E>],
    budget: &Budget,
    exec: Exec,
) -> Result<ClassFun<R::E>, RepError> {
    let comp: Vec<usize> = levi.iter().map(|c| c.gl.n).collect();
    if !gl.is_single() || comp.iter().sum::<usize>() != gl.n || levi.iter().any(|c| c.gl.q() != gl.q()) {
        return Err(RepError::GroupMismatch);
    }
    let g = gl.group.clone();
    budget.check(
        "induced character",
        (gl.classes.count() as u64) * g.order() as u64,
        budget.max_pairs,
    )?;
    let q = gl.q() as u64;
    let mut p_order: u64 = comp.iter().map(|&m| gl_order(q, m as u32)).product();
    for i in 0..comp.len() {
        for j in (i + 1)..comp.len() {
            p_order *= q.pow((comp[i] * comp[j]) as u32);
        }
    }
    let vals = exec.map(gl.classes.count(), |c| {
        let x = gl.classes.rep(c);
        let mut acc = ring.zero();
        for y in 0..g.order() as u32 {
            let z = g.conj(y, x);
            if let Some(blocks) = g.levi_part(z, &comp) {
                let mut v = ring.one();
                for (chi, b) in levi.iter().zip(&blocks) {
                    let idx = chi.gl.group.index_of_entries(b).expect("Levi block is invertible");
                    v = ring.mul(&v, chi.at(idx));
                }
                acc = ring.add(&acc, &v);
            }
        }
        ring.div(&acc, &ring.from_int(p_order as i64))
    });
    let values = vals.into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok(ClassFun::from_class_values(gl, values))
}

/// `g ↦ e_π(x^{-1} g y^{-1})` with `e_π(g) = (dim/|G|) χ(g^{-1})`, indexed by group index.
pub fn e_pi_translate<R: CoeffRing>(ring: &R, chi: &ClassFun<R::E>, x: u32, y: u32) -> Result<Vec<R::E>, RepError> {
    if inner(ring, chi, chi)? != ring.one() {
        return Err(RepError::NotIrreducible);
    }
    let g = &chi.gl.group;
    let scale = ring.div(chi.degree(), &ring.from_int(g.order() as i64))?;
    let xi = g.inv(x);
    let yi = g.inv(y);
    Ok((0..g.order() as u32)
        .map(|h| {
            let t = g.mul(g.mul(xi, h), yi);
            ring.mul(&scale, chi.at(g.inv(t)))
        })
        .collect())
}

/// `{"group": spec, "values": [scalar per group index]}`.
pub fn character_to_json<R: CoeffRing>(ring: &R, chi: &ClassFun<R::E>) -> Value {
    let g = &chi.gl.group;
    let values: Vec<Value> = (0..g.order() as u32).map(|i| ring.to_json(chi.at(i))).collect();
    json!({"group": chi.gl.label(), "field": chi.gl.tower.spec(), "values": values})
}

/// Regular exponents modulo `q^2 - 1`, one per Frobenius orbit `{a, a q}`.
pub fn cuspidal_orbit_reps(q: u64) -> Vec<u64> {
    let m = q * q - 1;
    let mut seen = vec![false; m as usize];
    let mut out = Vec::new();
    for a in 0..m {
        let b = a * q % m;
        if seen[a as usize] || a == b {
            continue;
        }
        seen[a as usize] = true;
        seen[b as usize] = true;
        out.push(a);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::{lcm, Cyclo};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn gl(p: u32, d: u32, n: usize) -> Arc<GlGroup> {
        let degs: Vec<u32> = if d == 1 { vec![1, 2] } else { vec![1, d, 2 * d] };
        let t = Arc::new(FieldTower::build(p, &degs).unwrap());
        GlGroup::new(t, d, n, &Budget::default(), Exec::Parallel).unwrap()
    }

    fn cusp(g: &Arc<GlGroup>, a: i64) -> (Cyclo, KirillovModel) {
        let q = g.q() as u64;
        let xi = MultChar::new(g.tower.clone(), 2 * g.deg, a).unwrap();
        let n = lcm(g.tower.p() as u64, xi.order());
        (Cyclo::new(n).unwrap(), KirillovModel::new(g.clone(), xi, n).map_err(|e| format!("{e} {q}")).unwrap())
    }

    #[test]
    fn kirillov_is_homomorphism() {
        for (p, a) in [(3u32, 1i64), (3, 2), (5, 1), (5, 4), (2, 1)] {
            let g = gl(p, 1, 2);
            let (r, m) = cusp(&g, a);
            let n = g.order() as u32;
            let mut rng = ChaCha8Rng::seed_from_u64(5);
            let mut pairs: Vec<(u32, u32)> = (0..1000).map(|_| (rng.gen_range(0..n), rng.gen_range(0..n))).collect();
            let f = g.field();
            let gens = [
                vec![f.generator(), 0, 0, 1],
                vec![1, 0, 0, f.generator()],
                vec![1, 1, 0, 1],
                vec![0, 1, 1, 0],
            ];
            for s in gens.iter() {
                let si = g.group.index_of_entries(s).unwrap();
                pairs.extend((0..n).map(|h| (si, h)));
            }
            assert_eq!(check_homomorphism(&r, &m, &pairs, Exec::Parallel), None, "p={p} a={a}");
            let id = m.matrix(g.group.identity()).evaluate(&r).unwrap();
            for i in 0..m.dim() {
                for j in 0..m.dim() {
                    assert_eq!(id[i * m.dim() + j], if i == j { r.one() } else { r.zero() });
                }
            }
        }
    }

    #[test]
    fn trace_counts_match_matrices() {
        let g = gl(5, 1, 2);
        let (r, m) = cusp(&g, 3);
        for x in (0..g.order() as u32).step_by(13) {
            let (c, d) = m.trace_counts(x);
            let mat = m.matrix(x);
            let lhs = r.div(&r.eval_counts(&c), &r.from_int(d)).unwrap();
            let rhs = r.div(&r.eval_counts(&mat.trace_counts(m.order())), &r.from_int(mat.den)).unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn cuspidal_postconditions_gl2_f3() {
        let g = gl(3, 1, 2);
        let reps = cuspidal_orbit_reps(3);
        assert_eq!(reps, vec![1, 2, 5]);
        let mut chars = Vec::new();
        for &a in &reps {
            let (_, m) = cusp(&g, a as i64);
            let r = Cyclo::new(24).unwrap();
            let m = KirillovModel::new(g.clone(), m.xi().clone(), 24).unwrap();
            let chi = character_of(&r, &m, Exec::Parallel).unwrap();
            assert_eq!(*chi.degree(), r.from_int(2));
            assert_eq!(inner(&r, &chi, &chi).unwrap(), r.one());
            assert!(is_cuspidal(&r, &chi).unwrap());
            let f = g.field();
            for z in f.units() {
                let zz = g.tower.embed(FieldElem { deg: 1, code: z }, 2).unwrap();
                assert_eq!(central_character(&r, &chi, z).unwrap(), m.xi().value(&r, zz.code).unwrap());
            }
            chars.push(chi);
        }
        let r = Cyclo::new(24).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let ip = inner(&r, &chars[i], &chars[j]).unwrap();
                assert_eq!(ip, if i == j { r.one() } else { r.zero() });
            }
        }
        let m3 = KirillovModel::new(g.clone(), MultChar::new(g.tower.clone(), 2, 3).unwrap(), 24).unwrap();
        assert_eq!(character_of(&r, &m3, Exec::Parallel).unwrap(), chars[0]);
        assert_eq!(chars[1].dual(), chars[1]);
        let m7 = KirillovModel::new(g.clone(), MultChar::new(g.tower.clone(), 2, 7).unwrap(), 24).unwrap();
        assert_eq!(character_of(&r, &m7, Exec::Parallel).unwrap(), chars[0].dual());
        assert!(KirillovModel::new(g.clone(), MultChar::new(g.tower.clone(), 2, 4).unwrap(), 24).is_err());
    }

    #[test]
    fn principal_series_and_steinberg() {
        let g = gl(3, 1, 2);
        let g1 = gl(3, 1, 1);
        let r = Cyclo::new(24).unwrap();
        let triv1 = trivial_character(&r, g1.clone());
        let eta = det_character(&r, g1.clone(), &MultChar::new(g1.tower.clone(), 1, 1).unwrap()).unwrap();
        let ind = induced_character(&r, g.clone(), &[&triv1, &triv1], &Budget::default(), Exec::Parallel).unwrap();
        assert_eq!(*ind.degree(), r.from_int(4));
        let ps = induced_character(&r, g.clone(), &[&triv1, &eta], &Budget::default(), Exec::Parallel).unwrap();
        assert_eq!(inner(&r, &ps, &ps).unwrap(), r.one());
        let triv = trivial_character(&r, g.clone());
        let st = ind.zip(&triv, |a, b| r.sub(a, b)).unwrap();
        assert_eq!(inner(&r, &st, &st).unwrap(), r.one());
        assert!(!is_cuspidal(&r, &st).unwrap());
    }

    #[test]
    fn character_sums_over_subgroups() {
        let g = gl(3, 1, 2);
        let r = Cyclo::new(24).unwrap();
        let m = KirillovModel::new(g.clone(), MultChar::new(g.tower.clone(), 2, 2).unwrap(), 24).unwrap();
        let chi = character_of(&r, &m, Exec::Parallel).unwrap();
        assert_eq!(hom_dim(&r, &chi, &[g.group.identity()]).unwrap(), r.from_int(2));
        let triv = trivial_character(&r, g.clone());
        let all: Vec<u32> = (0..48).collect();
        assert_eq!(hom_dim(&r, &triv, &all).unwrap(), r.one());
        let e = e_pi_translate(&r, &chi, g.group.identity(), g.group.identity()).unwrap();
        assert_eq!(e[g.group.identity() as usize], r.from_ratio(4, 48).unwrap());
        let et = e_pi_translate(&r, &triv, 3, 7).unwrap();
        assert!(et.iter().all(|v| *v == r.from_ratio(1, 48).unwrap()));
        for x in [0u32, 5, 17] {
            let conv: Vec<_> = (0..48u32)
                .map(|h| {
                    let mut acc = r.zero();
                    for y in 0..48u32 {
                        acc = r.add(&acc, &r.mul(&e[y as usize], &e[g.group.mul(g.group.inv(y), h) as usize]));
                    }
                    acc
                })
                .collect();
            assert_eq!(conv[x as usize], e[x as usize]);
        }
    }

    #[test]
    fn gl1_model_character() {
        let g1 = gl(5, 1, 1);
        let r = Cyclo::new(20).unwrap();
        let xi = MultChar::new(g1.tower.clone(), 1, 1).unwrap();
        let m = Gl1Model::new(g1.clone(), xi.clone(), 20).unwrap();
        let chi = character_of(&r, &m, Exec::Sequential).unwrap();
        for i in 0..4u32 {
            assert_eq!(*chi.at(i), xi.value(&r, g1.group.entries(i)[0]).unwrap());
        }
    }
}
