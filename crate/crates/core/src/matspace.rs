//! Matrix algebras `M_{n_1}(k) × ... × M_{n_r}(k)`, their unit groups, and
//! subgroup bookkeeping.
//!
//! An algebra element is a flat list of entries: the blocks in order, each
//! block row-major.  Its code is the base-`q` number whose `i`-th digit (least
//! significant first) is the `i`-th entry's field code.

use crate::exec::Exec;
use crate::fields::{Field, FieldElem, FieldError, FieldTower};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::collections::HashSet;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MatError {
    #[error("budget exceeded: {what} needs {needed}, cap is {cap}")]
    Budget { what: String, needed: u64, cap: u64 },
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("invalid block split {0:?}")]
    BadSplit(Vec<usize>),
    #[error("element is invertible; no stabilizer witness is needed")]
    NotApplicable,
    #[error("witness verification failed")]
    WitnessFailed,
    #[error("element is not in the group")]
    NotInGroup,
}

/// Caps applied before any enumeration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    pub max_algebra: u64,
    pub max_pairs: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_algebra: 20_000_000,
            max_pairs: 2_000_000_000,
        }
    }
}

impl Budget {
    pub fn check(&self, what: &str, needed: u64, cap: u64) -> Result<(), MatError> {
        if needed > cap {
            return Err(MatError::Budget {
                what: what.to_string(),
                needed,
                cap,
            });
        }
        Ok(())
    }
}

pub struct Algebra {
    tower: Arc<FieldTower>,
    deg: u32,
    q: u32,
    blocks: Vec<usize>,
    offsets: Vec<usize>,
    entries: usize,
    size: u64,
    pows: Vec<u32>,
}

impl std::fmt::Debug for Algebra {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Algebra(q={}, blocks={:?})", self.q, self.blocks)
    }
}

impl Algebra {
    pub fn new(
        tower: Arc<FieldTower>,
        deg: u32,
        blocks: &[usize],
        budget: &Budget,
    ) -> Result<Arc<Algebra>, MatError> {
        if blocks.is_empty() || blocks.contains(&0) {
            return Err(MatError::BadSplit(blocks.to_vec()));
        }
        let q = tower.level(deg)?.size();
        let entries: usize = blocks.iter().map(|n| n * n).sum();
        let size = (q as u64).checked_pow(entries as u32).unwrap_or(u64::MAX);
        budget.check("algebra size", size, budget.max_algebra.min(u32::MAX as u64))?;
        let mut offsets = Vec::with_capacity(blocks.len());
        let mut off = 0;
        for n in blocks {
            offsets.push(off);
            off += n * n;
        }
        let pows = (0..entries).map(|i| q.pow(i as u32)).collect();
        Ok(Arc::new(Algebra {
            tower,
            deg,
            q,
            blocks: blocks.to_vec(),
            offsets,
            entries,
            size,
            pows,
        }))
    }

    pub fn matrices(tower: Arc<FieldTower>, deg: u32, n: usize, budget: &Budget) -> Result<Arc<Algebra>, MatError> {
        Self::new(tower, deg, &[n], budget)
    }

    pub fn tower(&self) -> &Arc<FieldTower> {
        &self.tower
    }
    pub fn deg(&self) -> u32 {
        self.deg
    }
    pub fn field(&self) -> &Field {
        self.tower.level(self.deg).expect("level checked at construction")
    }
    pub fn q(&self) -> u32 {
        self.q
    }
    pub fn blocks(&self) -> &[usize] {
        &self.blocks
    }
    pub fn entries(&self) -> usize {
        self.entries
    }
    pub fn size(&self) -> u64 {
        self.size
    }
    /// `log_p |𝒢|`.
    pub fn size_exponent(&self) -> u32 {
        self.entries as u32 * self.deg
    }
    pub fn is_square_single(&self) -> Option<usize> {
        (self.blocks.len() == 1).then(|| self.blocks[0])
    }
    pub fn block_offset(&self, b: usize) -> usize {
        self.offsets[b]
    }

    pub fn decode(&self, code: u32) -> Vec<u32> {
        let mut c = code;
        (0..self.entries)
            .map(|_| {
                let r = c % self.q;
                c /= self.q;
                r
            })
            .collect()
    }

    pub fn decode_into(&self, code: u32, out: &mut [u32]) {
        let mut c = code;
        for o in out.iter_mut() {
            *o = c % self.q;
            c /= self.q;
        }
    }

    pub fn encode(&self, e: &[u32]) -> u32 {
        e.iter().zip(&self.pows).map(|(&x, &p)| x * p).sum()
    }

    pub fn zero(&self) -> Vec<u32> {
        vec![0; self.entries]
    }

    pub fn identity(&self) -> Vec<u32> {
        let mut e = self.zero();
        for (b, &n) in self.blocks.iter().enumerate() {
            for i in 0..n {
                e[self.offsets[b] + i * n + i] = 1;
            }
        }
        e
    }

    pub fn scalar(&self, c: u32) -> Vec<u32> {
        let f = self.field();
        self.identity().into_iter().map(|x| f.mul(x, c)).collect()
    }

    pub fn add(&self, a: &[u32], b: &[u32]) -> Vec<u32> {
        let f = self.field();
        a.iter().zip(b).map(|(&x, &y)| f.add(x, y)).collect()
    }

    pub fn neg(&self, a: &[u32]) -> Vec<u32> {
        let f = self.field();
        a.iter().map(|&x| f.neg(x)).collect()
    }

    pub fn scale(&self, c: u32, a: &[u32]) -> Vec<u32> {
        let f = self.field();
        a.iter().map(|&x| f.mul(c, x)).collect()
    }

    pub fn mul(&self, a: &[u32], b: &[u32]) -> Vec<u32> {
        let mut out = vec![0; self.entries];
        self.mul_into(a, b, &mut out);
        out
    }

    pub fn mul_into(&self, a: &[u32], b: &[u32], out: &mut [u32]) {
        let f = self.field();
        for (bi, &n) in self.blocks.iter().enumerate() {
            let o = self.offsets[bi];
            for i in 0..n {
                for j in 0..n {
                    let mut acc = 0;
                    for k in 0..n {
                        acc = f.add(acc, f.mul(a[o + i * n + k], b[o + k * n + j]));
                    }
                    out[o + i * n + j] = acc;
                }
            }
        }
    }

    /// Sum of the block traces, at the entry level.
    pub fn trace(&self, a: &[u32]) -> u32 {
        let f = self.field();
        let mut t = 0;
        for (bi, &n) in self.blocks.iter().enumerate() {
            for i in 0..n {
                t = f.add(t, a[self.offsets[bi] + i * n + i]);
            }
        }
        t
    }

    pub fn block<'a>(&self, a: &'a [u32], b: usize) -> &'a [u32] {
        let n = self.blocks[b];
        &a[self.offsets[b]..self.offsets[b] + n * n]
    }

    pub fn block_det(&self, a: &[u32], b: usize) -> u32 {
        let n = self.blocks[b];
        let rows: Vec<Vec<u32>> = self.block(a, b).chunks(n).map(|r| r.to_vec()).collect();
        det(self.field(), rows)
    }

    pub fn is_unit(&self, a: &[u32]) -> bool {
        (0..self.blocks.len()).all(|b| self.block_det(a, b) != 0)
    }

    /// Blockwise Gauss-Jordan inverse.
    pub fn inverse(&self, a: &[u32]) -> Option<Vec<u32>> {
        let f = self.field();
        let mut out = self.zero();
        for (bi, &n) in self.blocks.iter().enumerate() {
            let o = self.offsets[bi];
            let mut m: Vec<Vec<u32>> = (0..n)
                .map(|i| {
                    let mut r = a[o + i * n..o + (i + 1) * n].to_vec();
                    r.extend((0..n).map(|j| (i == j) as u32));
                    r
                })
                .collect();
            for c in 0..n {
                let p = (c..n).find(|&r| m[r][c] != 0)?;
                m.swap(p, c);
                let inv = f.inv(m[c][c])?;
                for k in 0..2 * n {
                    m[c][k] = f.mul(m[c][k], inv);
                }
                for r in 0..n {
                    if r != c && m[r][c] != 0 {
                        let t = m[r][c];
                        for k in 0..2 * n {
                            let s = f.mul(t, m[c][k]);
                            m[r][k] = f.sub(m[r][k], s);
                        }
                    }
                }
            }
            for i in 0..n {
                for j in 0..n {
                    out[o + i * n + j] = m[i][n + j];
                }
            }
        }
        Some(out)
    }

    /// `tr_{k/k_base}` of the algebra trace: the argument fed to additive characters.
    pub fn trace_char_arg(&self, a: &[u32], base: u32) -> Result<FieldElem, FieldError> {
        let t = FieldElem {
            deg: self.deg,
            code: self.trace(a),
        };
        self.tower.relative_trace(t, base)
    }

    /// Iterates every element code in index order.
    pub fn codes(&self) -> std::ops::Range<u32> {
        0..self.size as u32
    }

    pub fn to_json(&self, code: u32) -> Value {
        let f = self.field();
        let entries: Vec<String> = self
            .decode(code)
            .into_iter()
            .map(|x| match f.log(x) {
                None => "0".to_string(),
                Some(l) => format!("g{l}"),
            })
            .collect();
        json!({"n": self.blocks, "q": self.q, "code": code, "entries": entries})
    }
}

/// Determinant by elimination.
pub fn det(f: &Field, mut m: Vec<Vec<u32>>) -> u32 {
    let n = m.len();
    let mut d = 1u32;
    for c in 0..n {
        let Some(p) = (c..n).find(|&r| m[r][c] != 0) else {
            return 0;
        };
        if p != c {
            m.swap(p, c);
            d = f.neg(d);
        }
        let piv = m[c][c];
        d = f.mul(d, piv);
        let inv = f.inv(piv).unwrap();
        for r in (c + 1)..n {
            if m[r][c] != 0 {
                let t = f.mul(m[r][c], inv);
                for k in c..n {
                    let s = f.mul(t, m[c][k]);
                    m[r][k] = f.sub(m[r][k], s);
                }
            }
        }
    }
    d
}

/// Basis of `{v : m·v = 0}` for an `r × n` matrix.
pub fn nullspace(f: &Field, m: &[Vec<u32>], n: usize) -> Vec<Vec<u32>> {
    let mut a: Vec<Vec<u32>> = m.to_vec();
    let rows = a.len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..n {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| a[i][c] != 0) else {
            continue;
        };
        a.swap(p, r);
        let inv = f.inv(a[r][c]).unwrap();
        for k in 0..n {
            a[r][k] = f.mul(a[r][k], inv);
        }
        for i in 0..rows {
            if i != r && a[i][c] != 0 {
                let t = a[i][c];
                for k in 0..n {
                    let s = f.mul(t, a[r][k]);
                    a[i][k] = f.sub(a[i][k], s);
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&fc| {
            let mut v = vec![0u32; n];
            v[fc] = 1;
            for (i, &pc) in pivots.iter().enumerate() {
                v[pc] = f.neg(a[i][fc]);
            }
            v
        })
        .collect()
}

/// All `F`-linear combinations of `basis`, as vectors.
pub fn span(f: &Field, basis: &[Vec<u32>], n: usize) -> Vec<Vec<u32>> {
    let mut out = vec![vec![0u32; n]];
    for b in basis {
        let mut next = Vec::with_capacity(out.len() * f.size() as usize);
        for v in &out {
            for c in f.elements() {
                next.push(v.iter().zip(b).map(|(&x, &y)| f.add(x, f.mul(c, y))).collect());
            }
        }
        out = next;
    }
    out
}

/// The unit group of an algebra, indexed in increasing code order.
pub struct GroupTable {
    alg: Arc<Algebra>,
    codes: Vec<u32>,
    index: Vec<u32>,
    elems: Vec<u32>,
    inv: Vec<u32>,
    identity: u32,
}

impl std::fmt::Debug for GroupTable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "GroupTable({:?}, order {})", self.alg, self.codes.len())
    }
}

/// `prod_{i<n} (q^n - q^i)`.
pub fn gl_order(q: u64, n: u32) -> u64 {
    (0..n).map(|i| q.pow(n) - q.pow(i)).product()
}

impl GroupTable {
    pub fn build(alg: Arc<Algebra>, exec: Exec) -> Result<Arc<GroupTable>, MatError> {
        let size = alg.size() as usize;
        let e = alg.entries();
        let flags = exec.map(size, |c| alg.is_unit(&alg.decode(c as u32)));
        let codes: Vec<u32> = (0..size as u32).filter(|&c| flags[c as usize]).collect();
        let mut index = vec![u32::MAX; size];
        for (i, &c) in codes.iter().enumerate() {
            index[c as usize] = i as u32;
        }
        let mut elems = vec![0u32; codes.len() * e];
        for (i, &c) in codes.iter().enumerate() {
            alg.decode_into(c, &mut elems[i * e..(i + 1) * e]);
        }
        let identity = index[alg.encode(&alg.identity()) as usize];
        let mut g = GroupTable {
            alg,
            codes,
            index,
            elems,
            inv: Vec::new(),
            identity,
        };
        let n = g.order();
        let inv = exec.map(n, |i| {
            (0..n)
                .find(|&j| g.mul(i as u32, j as u32) == g.identity)
                .unwrap() as u32
        });
        g.inv = inv;
        Ok(Arc::new(g))
    }

    pub fn algebra(&self) -> &Arc<Algebra> {
        &self.alg
    }
    pub fn order(&self) -> usize {
        self.codes.len()
    }
    pub fn code(&self, i: u32) -> u32 {
        self.codes[i as usize]
    }
    pub fn codes(&self) -> &[u32] {
        &self.codes
    }
    pub fn index_of(&self, code: u32) -> Option<u32> {
        let i = *self.index.get(code as usize)?;
        (i != u32::MAX).then_some(i)
    }
    pub fn entries(&self, i: u32) -> &[u32] {
        let e = self.alg.entries();
        &self.elems[i as usize * e..(i as usize + 1) * e]
    }
    pub fn identity(&self) -> u32 {
        self.identity
    }
    pub fn inv(&self, i: u32) -> u32 {
        self.inv[i as usize]
    }
    pub fn mul(&self, i: u32, j: u32) -> u32 {
        let c = self.alg.encode(&self.alg.mul(self.entries(i), self.entries(j)));
        self.index[c as usize]
    }
    pub fn conj(&self, g: u32, x: u32) -> u32 {
        self.mul(self.mul(g, x), self.inv(g))
    }
    pub fn index_of_entries(&self, e: &[u32]) -> Option<u32> {
        self.index_of(self.alg.encode(e))
    }
    /// Indices of the centre `k^× · 1`.
    pub fn scalars(&self) -> Vec<u32> {
        let f = self.alg.field();
        f.units()
            .map(|c| self.index_of_entries(&self.alg.scalar(c)).unwrap())
            .collect()
    }

    /// Indices of a subgroup given by membership in a set of codes.
    pub fn subgroup_from_codes(&self, codes: &HashSet<u32>) -> Vec<u32> {
        (0..self.order() as u32)
            .filter(|&i| codes.contains(&self.code(i)))
            .collect()
    }

    /// Unipotent radical `U_{(n1,n2)}` of the standard parabolic of block `b`.
    pub fn unipotent_radical(&self, b: usize, n1: usize) -> Result<Vec<u32>, MatError> {
        let alg = &self.alg;
        let n = alg.blocks()[b];
        if n1 == 0 || n1 >= n {
            return Err(MatError::BadSplit(vec![n1, n - n1.min(n)]));
        }
        let positions: Vec<usize> = (0..n1)
            .flat_map(|i| (n1..n).map(move |j| i * n + j))
            .collect();
        let q = alg.q() as u64;
        let total = q.pow(positions.len() as u32);
        let base = alg.identity();
        let off = alg.block_offset(b);
        Ok((0..total)
            .map(|mut t| {
                let mut e = base.clone();
                for &pos in &positions {
                    e[off + pos] = (t % q) as u32;
                    t /= q;
                }
                self.index_of_entries(&e).unwrap()
            })
            .collect())
    }

    /// Every standard maximal unipotent radical, over all blocks.
    pub fn maximal_radicals(&self) -> Vec<Vec<u32>> {
        let mut out = Vec::new();
        for (b, &n) in self.alg.blocks().iter().enumerate() {
            for n1 in 1..n {
                out.push(self.unipotent_radical(b, n1).unwrap());
            }
        }
        out
    }

    /// Levi blocks of `x` in the standard parabolic of the composition, or `None`
    /// if `x` is not block upper triangular.  Single-block algebras only.
    pub fn levi_part(&self, x: u32, comp: &[usize]) -> Option<Vec<Vec<u32>>> {
        let n = self.alg.blocks()[0];
        let e = self.entries(x);
        let mut starts = Vec::with_capacity(comp.len());
        let mut s = 0;
        for &c in comp {
            starts.push(s);
            s += c;
        }
        let block_of = |i: usize| starts.iter().rposition(|&st| st <= i).unwrap();
        for i in 0..n {
            for j in 0..n {
                if block_of(i) > block_of(j) && e[i * n + j] != 0 {
                    return None;
                }
            }
        }
        Some(
            comp.iter()
                .zip(&starts)
                .map(|(&c, &st)| {
                    (0..c)
                        .flat_map(|i| (0..c).map(move |j| (i, j)))
                        .map(|(i, j)| e[(st + i) * n + st + j])
                        .collect()
                })
                .collect(),
        )
    }
}

/// Conjugacy classes of a group table.
pub struct ClassMap {
    class_of: Vec<u32>,
    reps: Vec<u32>,
    sizes: Vec<usize>,
    inverse_class: Vec<u32>,
}

impl ClassMap {
    pub fn build(g: &GroupTable, budget: &Budget, exec: Exec) -> Result<Arc<ClassMap>, MatError> {
        let n = g.order();
        budget.check("conjugacy orbits", (n as u64) * (n as u64), budget.max_pairs)?;
        let mut class_of = vec![u32::MAX; n];
        let mut reps = Vec::new();
        let mut sizes = Vec::new();
        for x in 0..n as u32 {
            if class_of[x as usize] != u32::MAX {
                continue;
            }
            let c = reps.len() as u32;
            let orbit = exec.map(n, |gi| g.conj(gi as u32, x));
            let mut size = 0;
            for y in orbit {
                if class_of[y as usize] == u32::MAX {
                    class_of[y as usize] = c;
                    size += 1;
                }
            }
            reps.push(x);
            sizes.push(size);
        }
        let inverse_class = reps.iter().map(|&r| class_of[g.inv(r) as usize]).collect();
        Ok(Arc::new(ClassMap {
            class_of,
            reps,
            sizes,
            inverse_class,
        }))
    }

    pub fn count(&self) -> usize {
        self.reps.len()
    }
    pub fn class_of(&self, g: u32) -> usize {
        self.class_of[g as usize] as usize
    }
    pub fn rep(&self, c: usize) -> u32 {
        self.reps[c]
    }
    pub fn size(&self, c: usize) -> usize {
        self.sizes[c]
    }
    pub fn inverse(&self, c: usize) -> usize {
        self.inverse_class[c] as usize
    }
    pub fn group_order(&self) -> usize {
        self.class_of.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    /// Stabilizer `{g : g·a = a}`.
    Left,
    /// Stabilizer `{g : a·g = a}`.
    Right,
}

/// A full unipotent radical inside the stabilizer of a singular element.
#[derive(Clone, Debug)]
pub struct A4Witness {
    pub block: usize,
    /// A nonzero `u` with `u·a = 0` (left) or `a·u = 0` (right).
    pub u: Vec<u32>,
    /// Codes of the radical `{1 + w⊗φ}` of a maximal parabolic of the block.
    pub radical: Vec<u32>,
}

/// Finds a proper parabolic unipotent radical fixing `a` on the given side.
///
/// Left: with `φ` a nonzero row vector and `φ·a_b = 0`, the group
/// `{1 + w φ : φ(w) = 0}` fixes `a`.  Right: with `a_b v = 0`, the group
/// `{1 + v φ : φ(v) = 0}` does.  Every element is checked exhaustively.
pub fn a4_witness(alg: &Algebra, a: &[u32], side: Side) -> Result<A4Witness, MatError> {
    let f = alg.field();
    let Some(b) = (0..alg.blocks().len()).find(|&b| alg.block_det(a, b) == 0) else {
        return Err(MatError::NotApplicable);
    };
    let n = alg.blocks()[b];
    let ab: Vec<Vec<u32>> = alg.block(a, b).chunks(n).map(|r| r.to_vec()).collect();
    let transpose = |m: &[Vec<u32>]| -> Vec<Vec<u32>> {
        (0..n).map(|j| (0..n).map(|i| m[i][j]).collect()).collect()
    };
    let (fixed, others): (Vec<u32>, Vec<Vec<u32>>) = match side {
        Side::Left => {
            let phi = nullspace(f, &transpose(&ab), n)[0].clone();
            let ws = nullspace(f, std::slice::from_ref(&phi), n);
            (phi, ws)
        }
        Side::Right => {
            let v = nullspace(f, &ab, n)[0].clone();
            let phis = nullspace(f, std::slice::from_ref(&v), n);
            (v, phis)
        }
    };
    let combos = span(f, &others, n);
    let off = alg.block_offset(b);
    let one = alg.identity();
    let mut radical = Vec::with_capacity(combos.len());
    let mut u_gen = None;
    for c in combos {
        let mut u = alg.zero();
        for i in 0..n {
            for j in 0..n {
                let (col, row) = match side {
                    Side::Left => (c[i], fixed[j]),
                    Side::Right => (fixed[i], c[j]),
                };
                u[off + i * n + j] = f.mul(col, row);
            }
        }
        let g = alg.add(&one, &u);
        let moved = match side {
            Side::Left => alg.mul(&g, a),
            Side::Right => alg.mul(a, &g),
        };
        if moved != a || alg.mul(&u, &u) != alg.zero() || !alg.is_unit(&g) {
            return Err(MatError::WitnessFailed);
        }
        if u_gen.is_none() && u.iter().any(|&x| x != 0) {
            u_gen = Some(u);
        }
        radical.push(alg.encode(&g));
    }
    if radical.len() as u64 != (alg.q() as u64).pow(n as u32 - 1) {
        return Err(MatError::WitnessFailed);
    }
    Ok(A4Witness {
        block: b,
        u: u_gen.ok_or(MatError::WitnessFailed)?,
        radical,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct DoubleCoset {
    pub rep: u32,
    pub size: usize,
    pub inversion_stable: bool,
}

/// Partition of `G` into `H\G/H` classes by orbit closure.
pub fn double_cosets(g: &GroupTable, h: &[u32], budget: &Budget) -> Result<Vec<DoubleCoset>, MatError> {
    let n = g.order();
    budget.check(
        "double coset orbits",
        (n as u64) * (h.len() as u64),
        budget.max_pairs,
    )?;
    let mut class_of = vec![u32::MAX; n];
    let mut out = Vec::new();
    for x in 0..n as u32 {
        if class_of[x as usize] != u32::MAX {
            continue;
        }
        let c = out.len() as u32;
        let mut size = 0;
        for &h1 in h {
            let hx = g.mul(h1, x);
            for &h2 in h {
                let y = g.mul(hx, h2);
                if class_of[y as usize] == u32::MAX {
                    class_of[y as usize] = c;
                    size += 1;
                }
            }
        }
        out.push(DoubleCoset {
            rep: x,
            size,
            inversion_stable: false,
        });
    }
    for dc in out.iter_mut() {
        let ci = class_of[dc.rep as usize];
        dc.inversion_stable = class_of[g.inv(dc.rep) as usize] == ci;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn alg(p: u32, d: u32, n: usize) -> Arc<Algebra> {
        let t = Arc::new(FieldTower::build(p, &[1, d]).unwrap());
        Algebra::matrices(t, d, n, &Budget::default()).unwrap()
    }

    #[test]
    fn enumeration_counts() {
        let a = alg(3, 1, 1);
        assert_eq!(a.size(), 3);
        let a = alg(3, 1, 2);
        assert_eq!(a.size(), 81);
        let g = GroupTable::build(a, Exec::Parallel).unwrap();
        assert_eq!(g.order(), 48);
        let a = alg(3, 2, 2);
        assert_eq!(a.size(), 6561);
        let g = GroupTable::build(a, Exec::Parallel).unwrap();
        assert_eq!(g.order() as u64, gl_order(9, 2));
        assert_eq!(g.order(), 5760);
    }

    #[test]
    fn budget_guard() {
        let t = Arc::new(FieldTower::build(3, &[1]).unwrap());
        let b = Budget {
            max_algebra: 80,
            max_pairs: 10,
        };
        assert!(matches!(Algebra::matrices(t, 1, 2, &b), Err(MatError::Budget { .. })));
    }

    #[test]
    fn code_roundtrip() {
        let a = alg(3, 1, 2);
        for c in a.codes() {
            assert_eq!(a.encode(&a.decode(c)), c);
        }
        let v = a.to_json(a.encode(&a.identity()));
        assert_eq!(v["entries"][0], "g0");
        assert_eq!(v["entries"][1], "0");
    }

    #[test]
    fn trace_args() {
        let a = alg(3, 1, 2);
        assert_eq!(a.trace(&a.identity()), 2);
        assert_eq!(a.trace(&[0, 1, 0, 0]), 0);
        let b = alg(3, 2, 2);
        let f = b.field();
        let x = vec![f.generator(), 0, 1, f.exp(3)];
        let t = b.trace_char_arg(&x, 1).unwrap();
        let direct = b
            .tower()
            .relative_trace(FieldElem { deg: 2, code: f.add(x[0], x[3]) }, 1)
            .unwrap();
        assert_eq!(t, direct);
    }

    #[test]
    fn closure_and_inverse() {
        let g = GroupTable::build(alg(5, 1, 2), Exec::Sequential).unwrap();
        for i in (0..g.order() as u32).step_by(7) {
            assert_eq!(g.mul(i, g.inv(i)), g.identity());
            let a = g.algebra();
            assert_eq!(a.inverse(g.entries(i)).unwrap(), g.entries(g.inv(i)));
            for j in (0..g.order() as u32).step_by(11) {
                assert!(g.mul(i, j) != u32::MAX);
            }
        }
    }

    #[test]
    fn classes_of_gl2() {
        let g = GroupTable::build(alg(3, 1, 2), Exec::Parallel).unwrap();
        let c = ClassMap::build(&g, &Budget::default(), Exec::Parallel).unwrap();
        assert_eq!(c.count(), 8);
        assert_eq!((0..c.count()).map(|k| c.size(k)).sum::<usize>(), 48);
        let g = GroupTable::build(alg(2, 1, 3), Exec::Parallel).unwrap();
        let c = ClassMap::build(&g, &Budget::default(), Exec::Parallel).unwrap();
        assert_eq!(g.order(), 168);
        assert_eq!(c.count(), 6);
    }

    #[test]
    fn radicals_and_levi() {
        let g = GroupTable::build(alg(3, 1, 3), Exec::Parallel).unwrap();
        assert_eq!(g.unipotent_radical(0, 1).unwrap().len(), 9);
        assert_eq!(g.unipotent_radical(0, 2).unwrap().len(), 9);
        let id = g.identity();
        let l = g.levi_part(id, &[2, 1]).unwrap();
        assert_eq!(l, vec![vec![1, 0, 0, 1], vec![1]]);
        let low = g.index_of_entries(&[1, 0, 0, 0, 1, 0, 0, 1, 1]).unwrap();
        assert!(g.levi_part(low, &[2, 1]).is_none());
        assert!(g.levi_part(low, &[1, 2]).is_some());
    }

    #[test]
    fn a4_examples() {
        let a = alg(3, 1, 2);
        let w = a4_witness(&a, &a.zero(), Side::Left).unwrap();
        assert_eq!(w.radical.len(), 3);
        let d = vec![1, 0, 0, 0];
        let w = a4_witness(&a, &d, Side::Left).unwrap();
        assert_eq!(a.mul(&w.u, &d), a.zero());
        let e22 = vec![0, 0, 0, 1];
        assert_eq!(a.mul(&e22, &d), a.zero());
        let w = a4_witness(&a, &d, Side::Right).unwrap();
        assert_eq!(a.mul(&d, &w.u), a.zero());
        assert!(matches!(a4_witness(&a, &a.identity(), Side::Left), Err(MatError::NotApplicable)));
        for c in a.codes() {
            let x = a.decode(c);
            if !a.is_unit(&x) {
                a4_witness(&a, &x, Side::Left).unwrap();
                a4_witness(&a, &x, Side::Right).unwrap();
            }
        }
    }

    #[test]
    fn double_coset_extremes() {
        let g = GroupTable::build(alg(3, 1, 2), Exec::Parallel).unwrap();
        let all: Vec<u32> = (0..g.order() as u32).collect();
        let dc = double_cosets(&g, &all, &Budget::default()).unwrap();
        assert_eq!(dc.len(), 1);
        let dc = double_cosets(&g, &[g.identity()], &Budget::default()).unwrap();
        assert_eq!(dc.len(), 48);
    }

    #[test]
    fn nullspace_dims() {
        let t = FieldTower::build(5, &[1]).unwrap();
        let f = t.level(1).unwrap();
        let ns = nullspace(f, &[vec![1, 2, 3]], 3);
        assert_eq!(ns.len(), 2);
        for v in ns {
            assert_eq!(f.add(f.add(v[0], f.mul(2, v[1])), f.mul(3, v[2])), 0);
        }
        assert_eq!(span(f, &[vec![1, 0], vec![0, 1]], 2).len(), 25);
    }
}
