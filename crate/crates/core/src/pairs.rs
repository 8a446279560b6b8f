//! Symmetric pairs `(G, H)` with their subspace `𝓗`, normalizer element `w`
//! and additive character `Ψ`; the conditions (A1)–(A5), distinction data and
//! the double-coset involution check.

use crate::exec::Exec;
use crate::fields::{is_prime, FieldElem, FieldError, FieldTower};
use crate::gamma::{gamma_via_trace, GammaError};
use crate::harmonic::{AddChar, HarmonicError, Subspace};
use crate::matspace::{a4_witness, double_cosets, Budget, DoubleCoset, MatError, Side};
use crate::reps::{hom_dim, is_cuspidal, period_sign, ClassFun, GlGroup, RepError};
use crate::scalars::{sqrt_from_subspace, CoeffRing, ScalarError, SqrtConvention};
use serde::Serialize;
use std::collections::HashSet;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PairError {
    #[error("malformed pair spec: {0}")]
    Spec(String),
    #[error("pair {0} requires odd characteristic")]
    EvenCharacteristic(String),
    #[error(transparent)]
    Mat(#[from] MatError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Harmonic(#[from] HarmonicError),
    #[error(transparent)]
    Rep(#[from] RepError),
    #[error(transparent)]
    Gamma(#[from] GammaError),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PairKind {
    GroupCase,
    Galois,
    Linear,
    TwistedLinear,
}

/// Parsed pair parameters: `n` is the matrix size of one factor of `G`,
/// `p^d` the field of the entries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairSpec {
    pub kind: PairKind,
    pub n: usize,
    pub p: u32,
    pub d: u32,
}

/// `q = p^d` with `p` prime.
pub fn prime_power(q: u32) -> Option<(u32, u32)> {
    let p = (2..=q).find(|&p| q.is_multiple_of(p))?;
    if !is_prime(p) {
        return None;
    }
    let mut d = 0;
    let mut r = q;
    while r.is_multiple_of(p) {
        r /= p;
        d += 1;
    }
    (r == 1).then_some((p, d))
}

impl PairSpec {
    /// `"galois:n=2,p=3"`, `"linear:m=1,q=3"`, `"twisted:m=1,q=3"`, `"group:n=2,q=3"`.
    pub fn parse(s: &str) -> Result<PairSpec, PairError> {
        let bad = || PairError::Spec(s.to_string());
        let (kind, rest) = s.split_once(':').ok_or_else(bad)?;
        let mut kv = std::collections::HashMap::new();
        for part in rest.split(',') {
            let (k, v) = part.split_once('=').ok_or_else(bad)?;
            kv.insert(k.trim(), v.trim().parse::<u32>().map_err(|_| bad())?);
        }
        let field = |kv: &std::collections::HashMap<&str, u32>| -> Result<(u32, u32), PairError> {
            let q = kv.get("q").or(kv.get("p")).copied().ok_or_else(bad)?;
            prime_power(q).ok_or_else(bad)
        };
        let (kind, n) = match kind.trim() {
            "galois" => (PairKind::Galois, *kv.get("n").ok_or_else(bad)? as usize),
            "group" => (PairKind::GroupCase, *kv.get("n").ok_or_else(bad)? as usize),
            "linear" => (PairKind::Linear, 2 * *kv.get("m").ok_or_else(bad)? as usize),
            "twisted" => (PairKind::TwistedLinear, 2 * *kv.get("m").ok_or_else(bad)? as usize),
            _ => return Err(bad()),
        };
        let (p, d0) = field(&kv)?;
        if n == 0 {
            return Err(bad());
        }
        let d = if kind == PairKind::Galois { 2 * d0 } else { d0 };
        Ok(PairSpec { kind, n, p, d })
    }

    pub fn to_spec_string(&self) -> String {
        let q = self.p.pow(self.d);
        match self.kind {
            PairKind::Galois => format!("galois:n={},p={}", self.n, self.p.pow(self.d / 2)),
            PairKind::GroupCase => format!("group:n={},q={}", self.n, q),
            PairKind::Linear => format!("linear:m={},q={}", self.n / 2, q),
            PairKind::TwistedLinear => format!("twisted:m={},q={}", self.n / 2, q),
        }
    }

    /// Field degree of the traces' base.
    pub fn base_deg(&self) -> u32 {
        if self.kind == PairKind::Galois {
            self.d / 2
        } else {
            self.d
        }
    }
}

/// A symmetric pair with everything the abstract functional equation needs.
pub struct SymmetricPair {
    pub spec: PairSpec,
    /// The group `G`; in the group case the product `GL_n × GL_n`.
    pub gl: Arc<GlGroup>,
    /// `Ψ` on `𝒢`, at the entry level.
    pub psi: AddChar,
    /// The subspace `𝓗`.
    pub hh: Subspace,
    /// `H = 𝓗 ∩ G` as sorted group indices.
    pub h: Vec<u32>,
    pub w: u32,
    /// Trace-zero `δ` of the Galois case.
    pub delta: Option<FieldElem>,
    /// `α` with `l = k[√α]` in the twisted case.
    pub alpha: Option<u32>,
}

impl std::fmt::Debug for SymmetricPair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "SymmetricPair({})", self.spec.to_spec_string())
    }
}

/// Tower holding the entries, the trace base and the levels needed by cuspidal `GL_2` models.
pub fn pair_tower(spec: &PairSpec) -> Result<Arc<FieldTower>, FieldError> {
    let mut degs = vec![1, spec.base_deg(), spec.d, 2 * spec.d];
    degs.sort_unstable();
    degs.dedup();
    Ok(Arc::new(FieldTower::build(spec.p, &degs)?))
}

fn elementary(dim: usize, i: usize, j: usize, v: u32) -> Vec<u32> {
    let mut m = vec![0u32; dim * dim];
    m[i * dim + j] = v;
    m
}

fn add_into(a: &mut [u32], b: &[u32], f: &crate::fields::Field) {
    for (x, y) in a.iter_mut().zip(b) {
        *x = f.add(*x, *y);
    }
}

pub fn build_pair(spec: &PairSpec, budget: &Budget, exec: Exec) -> Result<SymmetricPair, PairError> {
    let odd_needed = matches!(spec.kind, PairKind::Galois | PairKind::Linear | PairKind::TwistedLinear);
    if odd_needed && spec.p == 2 {
        return Err(PairError::EvenCharacteristic(spec.to_spec_string()));
    }
    if matches!(spec.kind, PairKind::Linear | PairKind::TwistedLinear) && !spec.n.is_multiple_of(2) {
        return Err(PairError::Spec(spec.to_spec_string()));
    }
    let tower = pair_tower(spec)?;
    let d = spec.d;
    let n = spec.n;
    let blocks: Vec<usize> = if spec.kind == PairKind::GroupCase { vec![n, n] } else { vec![n] };
    let gl = GlGroup::with_blocks(tower.clone(), d, &blocks, budget, exec)?;
    let alg = gl.alg.clone();
    let f = tower.level(d)?;
    let base = spec.base_deg();
    let psi = AddChar::standard(tower.clone(), base)?.lift(d)?;
    let one = f.one();
    let minus = f.neg(one);
    let m = n / 2;
    let mut delta = None;
    let mut alpha = None;
    let (gens, w): (Vec<Vec<u32>>, Vec<u32>) = match spec.kind {
        PairKind::GroupCase => {
            let gens = (0..n)
                .flat_map(|i| (0..n).map(move |j| (i, j)))
                .map(|(i, j)| {
                    let e = elementary(n, i, j, one);
                    [e.clone(), e].concat()
                })
                .collect();
            let w = [alg.block(&alg.identity(), 0).to_vec(), elementary_scalar(n, minus)].concat();
            (gens, w)
        }
        PairKind::Galois => {
            let gens = (0..n)
                .flat_map(|i| (0..n).map(move |j| (i, j)))
                .map(|(i, j)| elementary(n, i, j, one))
                .collect();
            let dl = tower.trace_zero_element(d, base)?;
            delta = Some(dl);
            (gens, alg.scalar(dl.code))
        }
        PairKind::Linear => {
            let mut gens = Vec::new();
            for o in [0, m] {
                for i in 0..m {
                    for j in 0..m {
                        gens.push(elementary(n, o + i, o + j, one));
                    }
                }
            }
            let mut w = vec![0u32; n * n];
            for i in 0..m {
                w[i * n + m + i] = one;
                w[(m + i) * n + i] = one;
            }
            (gens, w)
        }
        PairKind::TwistedLinear => {
            let a = f.units().find(|&x| !f.is_square(x)).expect("odd q has non-squares");
            alpha = Some(a);
            let mut gens = Vec::new();
            for i in 0..m {
                for j in 0..m {
                    let mut x = elementary(n, i, j, one);
                    add_into(&mut x, &elementary(n, m + i, m + j, one), f);
                    gens.push(x);
                    let mut y = elementary(n, i, m + j, one);
                    add_into(&mut y, &elementary(n, m + i, j, a), f);
                    gens.push(y);
                }
            }
            let mut w = vec![0u32; n * n];
            for i in 0..m {
                w[i * n + i] = one;
                w[(m + i) * n + m + i] = minus;
            }
            (gens, w)
        }
    };
    let hh = Subspace::base_span(alg.clone(), base, &gens)?;
    let g = &gl.group;
    let h: Vec<u32> = hh.members().iter().filter_map(|&c| g.index_of(c)).collect::<Vec<_>>();
    let mut h = h;
    h.sort_unstable();
    let w = g.index_of_entries(&w).ok_or(MatError::NotInGroup)?;
    Ok(SymmetricPair {
        spec: spec.clone(),
        gl,
        psi,
        hh,
        h,
        w,
        delta,
        alpha,
    })
}

fn elementary_scalar(n: usize, c: u32) -> Vec<u32> {
    let mut m = vec![0u32; n * n];
    for i in 0..n {
        m[i * n + i] = c;
    }
    m
}

impl SymmetricPair {
    /// `|𝒢|^{1/2} := |𝓗|`.
    pub fn sqrt_convention<R: CoeffRing>(&self, ring: &R) -> Result<SqrtConvention<R::E>, ScalarError> {
        sqrt_from_subspace(
            ring,
            self.gl.tower.p() as u64,
            self.gl.alg.size_exponent(),
            self.hh.dim() as u32,
        )
    }

    pub fn h_codes(&self) -> HashSet<u32> {
        self.h.iter().map(|&i| self.gl.group.code(i)).collect()
    }

    pub fn w_normalizes_h(&self) -> bool {
        let g = &self.gl.group;
        let set: HashSet<u32> = self.h.iter().copied().collect();
        self.h.iter().all(|&x| set.contains(&g.conj(self.w, x)))
    }
}

/// Character of `π ⊗ π^∨` on `GL_n × GL_n`, for the group case.
pub fn group_case_character<R: CoeffRing>(
    pair: &SymmetricPair,
    chi: &ClassFun<R::E>,
    ring: &R,
) -> Result<ClassFun<R::E>, PairError> {
    if pair.spec.kind != PairKind::GroupCase || chi.gl().q() != pair.gl.q() || chi.gl().n != pair.spec.n {
        return Err(RepError::GroupMismatch.into());
    }
    let small = chi.gl().clone();
    let alg = pair.gl.alg.clone();
    let gr = pair.gl.group.clone();
    let f = move |x: u32| {
        let e = gr.entries(x);
        let a = small.group.index_of_entries(alg.block(e, 0)).unwrap();
        let b = small.group.index_of_entries(alg.block(e, 1)).unwrap();
        ring.mul(chi.at(a), chi.at(small.group.inv(b)))
    };
    Ok(ClassFun::from_rep_fn(pair.gl.clone(), f, Exec::Sequential))
}

#[derive(Clone, Debug, Serialize)]
pub struct AxiomReport {
    pub pair: String,
    pub a1_dual_cuspidal: bool,
    pub a2_hom_dim_one: bool,
    /// Printed form of `dim Hom_H(π, 1)`.
    pub hom_dim: String,
    pub a3_stable: bool,
    pub a4_witnesses: bool,
    pub a5_perp: bool,
    pub size_identity: bool,
    pub w_normalizes: bool,
}

impl AxiomReport {
    pub fn all(&self) -> bool {
        self.a1_dual_cuspidal
            && self.a2_hom_dim_one
            && self.a3_stable
            && self.a4_witnesses
            && self.a5_perp
            && self.size_identity
            && self.w_normalizes
    }
}

/// (A1)–(A5) for a character of `G`, plus `w ∈ N(H)`.
pub fn verify_axioms<R: CoeffRing>(
    ring: &R,
    pair: &SymmetricPair,
    chi: &ClassFun<R::E>,
    exec: Exec,
) -> Result<AxiomReport, PairError> {
    if !Arc::ptr_eq(chi.gl(), &pair.gl) {
        return Err(RepError::GroupMismatch.into());
    }
    let alg = pair.gl.alg.clone();
    let g = &pair.gl.group;
    let a1 = is_cuspidal(ring, &chi.dual())?;
    let hd = hom_dim(ring, chi, &pair.h)?;
    let a2 = hd == ring.one();
    let members = pair.hh.members().to_vec();
    let stable = exec.map(pair.h.len(), |i| {
        let he = g.entries(pair.h[i]);
        members.iter().all(|&a| {
            let ae = alg.decode(a);
            pair.hh.contains(alg.encode(&alg.mul(he, &ae))) && pair.hh.contains(alg.encode(&alg.mul(&ae, he)))
        })
    });
    let a3 = stable.iter().all(|&b| b);
    let singular: Vec<u32> = members.iter().copied().filter(|&c| g.index_of(c).is_none()).collect();
    let wit = exec.map(singular.len(), |i| {
        let a = alg.decode(singular[i]);
        a4_witness(&alg, &a, Side::Left).is_ok() && a4_witness(&alg, &a, Side::Right).is_ok()
    });
    let a4 = wit.iter().all(|&b| b);
    let perp = pair.hh.perp(&pair.psi)?;
    let a5 = perp.members() == pair.hh.left_translate(g.entries(pair.w)).as_slice();
    let size_identity = (pair.hh.len() as u64).pow(2) == alg.size();
    Ok(AxiomReport {
        pair: pair.spec.to_spec_string(),
        a1_dual_cuspidal: a1,
        a2_hom_dim_one: a2,
        hom_dim: ring.to_json(&hd).to_string(),
        a3_stable: a3,
        a4_witnesses: a4,
        a5_perp: a5,
        size_identity,
        w_normalizes: pair.w_normalizes_h(),
    })
}

/// Distinction data of one representation for a pair.
#[derive(Clone, Debug)]
pub struct DistinctionRow<E> {
    pub label: String,
    pub hom_dim: E,
    pub distinguished: bool,
    pub period_sign: Option<E>,
    pub gamma: E,
    /// `γ = χ_π(w)` when distinguished.
    pub sign_matches: Option<bool>,
}

pub fn distinction_row<R: CoeffRing>(
    ring: &R,
    pair: &SymmetricPair,
    label: &str,
    chi: &ClassFun<R::E>,
) -> Result<DistinctionRow<R::E>, PairError> {
    let hd = hom_dim(ring, chi, &pair.h)?;
    let distinguished = hd == ring.one();
    let conv = pair.sqrt_convention(ring)?;
    let gamma = gamma_via_trace(ring, chi, &pair.psi, &conv)?;
    let sign = if distinguished {
        Some(period_sign(ring, chi, &pair.h, pair.w)?)
    } else {
        None
    };
    Ok(DistinctionRow {
        label: label.to_string(),
        sign_matches: sign.as_ref().map(|s| *s == gamma),
        hom_dim: hd,
        distinguished,
        period_sign: sign,
        gamma,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct DoubleCosetReport {
    pub pair: String,
    pub count: usize,
    pub total: usize,
    pub all_stable: bool,
    pub cosets: Vec<DoubleCoset>,
}

/// Inversion stability of every `H x H`.
pub fn doublecoset_inversion_check(pair: &SymmetricPair, budget: &Budget) -> Result<DoubleCosetReport, PairError> {
    let cosets = double_cosets(&pair.gl.group, &pair.h, budget)?;
    Ok(DoubleCosetReport {
        pair: pair.spec.to_spec_string(),
        count: cosets.len(),
        total: cosets.iter().map(|c| c.size).sum(),
        all_stable: cosets.iter().all(|c| c.inversion_stable),
        cosets,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonic::MultChar;
    use crate::reps::{character_of, inner, KirillovModel};
    use crate::scalars::Cyclo;

    fn pair(s: &str) -> SymmetricPair {
        build_pair(&PairSpec::parse(s).unwrap(), &Budget::default(), Exec::Parallel).unwrap()
    }

    #[test]
    fn spec_parsing() {
        let s = PairSpec::parse("galois:n=2,p=3").unwrap();
        assert_eq!((s.kind, s.n, s.p, s.d), (PairKind::Galois, 2, 3, 2));
        assert_eq!(PairSpec::parse("twisted:m=1,q=9").unwrap().d, 2);
        assert_eq!(PairSpec::parse("linear:m=1,q=5").unwrap().to_spec_string(), "linear:m=1,q=5");
        assert!(PairSpec::parse("linear:m=1,q=6").is_err());
        assert!(PairSpec::parse("bogus:n=1,q=3").is_err());
        assert!(build_pair(&PairSpec::parse("linear:m=1,q=2").unwrap(), &Budget::default(), Exec::Sequential).is_err());
        assert_eq!(prime_power(81), Some((3, 4)));
    }

    #[test]
    fn pair_shapes() {
        let g = pair("galois:n=2,p=3");
        assert_eq!((g.h.len(), g.hh.len()), (48, 81));
        let l = pair("linear:m=1,q=3");
        assert_eq!(l.h.len(), 4);
        assert_eq!(l.gl.group.entries(l.w), &[0, 1, 1, 0]);
        let t = pair("twisted:m=1,q=3");
        assert_eq!(t.h.len(), 8);
        assert_eq!(t.gl.group.entries(t.w), &[1, 0, 0, 2]);
        let gc = pair("group:n=2,q=3");
        assert_eq!((gc.h.len(), gc.hh.len(), gc.gl.order()), (48, 81, 2304));
        for p in [&g, &l, &t, &gc] {
            assert!(p.w_normalizes_h());
            let perp = p.hh.perp(&p.psi).unwrap();
            assert_eq!(perp.members(), p.hh.left_translate(p.gl.group.entries(p.w)).as_slice(), "{:?}", p);
        }
    }

    #[test]
    fn axioms_and_distinction_gl2_f3() {
        let r = Cyclo::new(24).unwrap();
        let t = pair("twisted:m=1,q=3");
        let l = pair("linear:m=1,q=3");
        for a in [1i64, 2, 5] {
            let xi = MultChar::new(t.gl.tower.clone(), 2, a).unwrap();
            let chi_t = character_of(&r, &KirillovModel::new(t.gl.clone(), xi.clone(), 24).unwrap(), Exec::Parallel).unwrap();
            let rep = verify_axioms(&r, &t, &chi_t, Exec::Parallel).unwrap();
            assert!(rep.a1_dual_cuspidal && rep.a3_stable && rep.a4_witnesses && rep.a5_perp && rep.size_identity);
            assert_eq!(rep.a2_hom_dim_one, a == 2);
            let row = distinction_row(&r, &t, "c", &chi_t).unwrap();
            if row.distinguished {
                assert_eq!(row.sign_matches, Some(true));
                assert_eq!(chi_t.dual(), chi_t);
            }
            let xi_l = MultChar::new(l.gl.tower.clone(), 2, a).unwrap();
            let chi_l = character_of(&r, &KirillovModel::new(l.gl.clone(), xi_l, 24).unwrap(), Exec::Parallel).unwrap();
            let row = distinction_row(&r, &l, "c", &chi_l).unwrap();
            assert!(!row.distinguished || row.sign_matches == Some(true));
        }
    }

    #[test]
    fn group_case_axioms() {
        let r = Cyclo::new(24).unwrap();
        let gc = pair("group:n=2,q=3");
        let small = GlGroup::new(gc.gl.tower.clone(), 1, 2, &Budget::default(), Exec::Parallel).unwrap();
        let xi = MultChar::new(small.tower.clone(), 2, 1).unwrap();
        let chi = character_of(&r, &KirillovModel::new(small.clone(), xi, 24).unwrap(), Exec::Parallel).unwrap();
        assert_eq!(inner(&r, &chi, &chi).unwrap(), r.one());
        let big = group_case_character(&gc, &chi, &r).unwrap();
        let rep = verify_axioms(&r, &gc, &big, Exec::Parallel).unwrap();
        assert!(rep.all(), "{rep:?}");
    }

    #[test]
    fn double_cosets_twisted() {
        for s in ["twisted:m=1,q=3", "twisted:m=1,q=5"] {
            let p = pair(s);
            let rep = doublecoset_inversion_check(&p, &Budget::default()).unwrap();
            assert!(rep.all_stable);
            assert_eq!(rep.total, p.gl.order());
        }
    }
}
