//! Godement–Jacquet sums, trace-form gamma factors, operator-form functional
//! equation checks, Kondo's formula, multiplicativity, twisting and duality.

use crate::exec::Exec;
use crate::harmonic::{fourier, gauss_sum_gamma, AddChar, FourierKernel, GFun, HarmonicError, MultChar};
use crate::reps::{inner, ClassFun, GlGroup, RepError, RootRep};
use crate::scalars::{CoeffRing, ScalarError, SqrtConvention};
use rand::Rng;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GammaError {
    #[error(transparent)]
    Rep(#[from] RepError),
    #[error(transparent)]
    Harmonic(#[from] HarmonicError),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
    #[error(transparent)]
    Field(#[from] crate::fields::FieldError),
    #[error("character is not irreducible")]
    NotIrreducible,
    #[error("additive character level {0} does not match the algebra level {1}")]
    LevelMismatch(u32, u32),
    #[error("ring order {0} lacks p-th roots")]
    MissingRoots(u64),
}

/// `Σ_{g∈G} Φ(g) f(g)`, with `f` indexed by group index.
pub fn gj_sum<R: CoeffRing>(ring: &R, gl: &GlGroup, phi: &GFun<R::E>, f: &[R::E]) -> R::E {
    let g = &gl.group;
    let mut acc = ring.zero();
    for i in 0..g.order() as u32 {
        let v = phi.get(g.code(i));
        if !ring.is_zero(v) {
            acc = ring.add(&acc, &ring.mul(v, &f[i as usize]));
        }
    }
    acc
}

fn check_psi<R: CoeffRing>(ring: &R, gl: &GlGroup, psi: &AddChar) -> Result<(), GammaError> {
    if psi.deg() != gl.deg {
        return Err(GammaError::LevelMismatch(psi.deg(), gl.deg));
    }
    if psi.is_trivial() {
        return Err(HarmonicError::TrivialCharacter.into());
    }
    if !ring.order().is_multiple_of(psi.p() as u64) {
        return Err(GammaError::MissingRoots(ring.order()));
    }
    Ok(())
}

/// Per class, the histogram of `ψ(tr g)` exponents over the class.
pub fn class_psi_histogram(gl: &GlGroup, psi: &AddChar) -> Vec<Vec<u64>> {
    let p = psi.p() as usize;
    let mut h = vec![vec![0u64; p]; gl.classes.count()];
    for g in 0..gl.order() as u32 {
        let e = psi.algebra_exponent(&gl.alg, gl.group.entries(g)) as usize;
        h[gl.classes.class_of(g)][e] += 1;
    }
    h
}

fn class_sums<R: CoeffRing>(ring: &R, hist: &[Vec<u64>]) -> Vec<R::E> {
    let n = ring.order() as usize;
    hist.iter()
        .map(|row| {
            let step = n / row.len();
            let mut c = vec![0i64; n];
            for (j, &v) in row.iter().enumerate() {
                c[j * step] += v as i64;
            }
            ring.eval_counts(&c)
        })
        .collect()
}

/// `|𝒢|^{-1/2} χ(1)^{-1} Σ_g Ψ(g) χ(g^{-1})`.
pub fn gamma_via_trace<R: CoeffRing>(
    ring: &R,
    chi: &ClassFun<R::E>,
    psi: &AddChar,
    conv: &SqrtConvention<R::E>,
) -> Result<R::E, GammaError> {
    let gl = chi.gl();
    check_psi(ring, gl, psi)?;
    if inner(ring, chi, chi)? != ring.one() {
        return Err(GammaError::NotIrreducible);
    }
    let sums = class_sums(ring, &class_psi_histogram(gl, psi));
    let c = &gl.classes;
    let mut acc = ring.zero();
    for k in 0..c.count() {
        acc = ring.add(&acc, &ring.mul(&sums[k], chi.at_class(c.inverse(k))));
    }
    let d = ring.inv(chi.degree())?;
    Ok(ring.mul(&ring.mul(&acc, &d), &conv.inverse))
}

/// Outcome of the operator-form functional equation.
#[derive(Clone, Debug)]
pub struct GammaReport<E> {
    pub label: String,
    pub psi_twist: u32,
    pub gamma: E,
    /// `γ` read off the operator at `m = 1`.
    pub extracted: E,
    /// The operator at `m = 1` is scalar.
    pub scalar: bool,
    pub weak: bool,
    /// `None` when only the weak equation was requested.
    pub strong: Option<bool>,
    /// First failing `(matrix code, entry index)`.
    pub counterexample: Option<(u32, usize)>,
    pub checked: usize,
}

/// Checks `|𝒢|^{-1/2} Σ_g Ψ(m g) ρ(g^{-1}) = γ·[m ∈ G]·ρ(m)` for every `m` in `G`
/// (weak) or in `𝒢` (strong), as matrices.
pub fn gjfe_operator_check<R: CoeffRing, M: RootRep + ?Sized>(
    ring: &R,
    model: &M,
    gamma: &R::E,
    psi: &AddChar,
    conv: &SqrtConvention<R::E>,
    strong: bool,
    exec: Exec,
) -> Result<GammaReport<R::E>, GammaError> {
    let gl = model.gl().clone();
    check_psi(ring, &gl, psi)?;
    let n = model.order();
    if ring.order() != n {
        return Err(GammaError::MissingRoots(ring.order()));
    }
    let g = gl.group.clone();
    let alg = gl.alg.clone();
    let kernel = FourierKernel::new(alg.clone(), psi)?;
    let mats: Vec<_> = exec.map(g.order(), |i| model.matrix(g.inv(i as u32)));
    let den = mats.iter().fold(1i64, |a, m| crate::scalars::lcm(a as u64, m.den as u64) as i64);
    let dim = model.dim();
    let step = n / psi.p() as u64;
    let scale = ring.mul(&ring.inv(&ring.from_int(den))?, &conv.inverse);
    let codes: Vec<u32> = if strong {
        alg.codes().collect()
    } else {
        g.codes().to_vec()
    };
    let zero = ring.zero();
    let one_idx = g.identity();
    let eval_m = |m: u32| -> Result<(Vec<R::E>, Option<usize>), GammaError> {
        let me = kernel.entries(m).to_vec();
        let mut buf = vec![0i64; dim * dim * n as usize];
        for (gi, mat) in mats.iter().enumerate() {
            let shift = kernel.pair_exponent(&me, g.entries(gi as u32)) as u64 * step;
            let f = den / mat.den;
            for (idx, e) in mat.entries.iter().enumerate() {
                let row = &mut buf[idx * n as usize..(idx + 1) * n as usize];
                for &(k, c) in e {
                    row[((k as u64 + shift) % n) as usize] += c * f;
                }
            }
        }
        let vals: Vec<R::E> = (0..dim * dim)
            .map(|idx| ring.mul(&ring.eval_counts(&buf[idx * n as usize..(idx + 1) * n as usize]), &scale))
            .collect();
        let expected: Vec<R::E> = match g.index_of(m) {
            Some(i) => model
                .matrix(i)
                .evaluate(ring)?
                .iter()
                .map(|v| ring.mul(v, gamma))
                .collect(),
            None => vec![zero.clone(); dim * dim],
        };
        let bad = (0..dim * dim).find(|&i| vals[i] != expected[i]);
        Ok((vals, bad))
    };
    let (op1, _) = eval_m(g.code(one_idx))?;
    let extracted = op1[0].clone();
    let scalar = (0..dim * dim).all(|i| op1[i] == if i % (dim + 1) == 0 { extracted.clone() } else { zero.clone() });
    let results = exec.map(codes.len(), |i| eval_m(codes[i]).map(|r| r.1));
    let mut weak = true;
    let mut strong_ok = true;
    let mut counterexample = None;
    for (i, r) in results.into_iter().enumerate() {
        if let Some(idx) = r? {
            if g.index_of(codes[i]).is_some() {
                weak = false;
            }
            strong_ok = false;
            if counterexample.is_none() {
                counterexample = Some((codes[i], idx));
            }
        }
    }
    Ok(GammaReport {
        label: model.label(),
        psi_twist: psi.t(),
        gamma: gamma.clone(),
        extracted,
        scalar,
        weak,
        strong: if strong { Some(strong_ok) } else { None },
        counterexample,
        checked: codes.len(),
    })
}

/// Character-level form: first `m` at which
/// `|𝒢|^{-1/2} Σ_g Ψ(m g) χ(g^{-1}) = γ·[m ∈ G]·χ(m)` fails.
/// A failure is a witness that the operator identity fails.
pub fn trace_fe_witness<R: CoeffRing>(
    ring: &R,
    chi: &ClassFun<R::E>,
    gamma: &R::E,
    psi: &AddChar,
    conv: &SqrtConvention<R::E>,
    strong: bool,
    exec: Exec,
) -> Result<Option<u32>, GammaError> {
    let gl = chi.gl().clone();
    check_psi(ring, &gl, psi)?;
    let g = gl.group.clone();
    let alg = gl.alg.clone();
    let kernel = FourierKernel::new(alg.clone(), psi)?;
    let p = psi.p() as usize;
    let codes: Vec<u32> = if strong {
        alg.codes().collect()
    } else {
        g.codes().to_vec()
    };
    let roots: Vec<R::E> = (0..p).map(|j| ring.root_of_unity(p as u64, j as i64)).collect::<Result<_, _>>()?;
    let dual = chi.dual();
    let bad = exec.map(codes.len(), |i| {
        let m = codes[i];
        let me = kernel.entries(m);
        let mut buckets = vec![ring.zero(); p];
        for gi in 0..g.order() as u32 {
            let j = kernel.pair_exponent(me, g.entries(gi)) as usize;
            buckets[j] = ring.add(&buckets[j], dual.at(gi));
        }
        let mut lhs = ring.zero();
        for (b, r) in buckets.iter().zip(&roots) {
            lhs = ring.add(&lhs, &ring.mul(b, r));
        }
        lhs = ring.mul(&lhs, &conv.inverse);
        let rhs = match g.index_of(m) {
            Some(x) => ring.mul(gamma, chi.at(x)),
            None => ring.zero(),
        };
        lhs != rhs
    });
    Ok(bad.iter().position(|&b| b).map(|i| codes[i]))
}

/// `Z(F_ψΦ, f^∨) = γ Z(Φ, f)` for random `Φ` (on `G` when `weak_only`, else on
/// `𝒢`) and random coefficients `f` of `π`, taken as translates of the projector
/// of `π^∨`; returns the number of failures.
#[allow(clippy::too_many_arguments)]
pub fn z_sum_spot_check<R: CoeffRing, G: Rng>(
    ring: &R,
    chi: &ClassFun<R::E>,
    gamma: &R::E,
    psi: &AddChar,
    conv: &SqrtConvention<R::E>,
    weak_only: bool,
    trials: usize,
    rng: &mut G,
    exec: Exec,
) -> Result<usize, GammaError> {
    let gl = chi.gl().clone();
    let g = gl.group.clone();
    let alg = gl.alg.clone();
    let mut failures = 0;
    for _ in 0..trials {
        let phi = GFun::from_fn(alg.clone(), |c| {
            if weak_only && g.index_of(c).is_none() {
                ring.zero()
            } else {
                ring.from_int(rng.gen_range(-3..=3))
            }
        });
        let x = rng.gen_range(0..g.order() as u32);
        let y = rng.gen_range(0..g.order() as u32);
        let f = crate::reps::e_pi_translate(ring, &chi.dual(), x, y)?;
        let fv: Vec<R::E> = (0..g.order() as u32).map(|h| f[g.inv(h) as usize].clone()).collect();
        let hat = fourier(ring, &phi, psi, conv, exec)?;
        let lhs = gj_sum(ring, &gl, &hat, &fv);
        let rhs = ring.mul(gamma, &gj_sum(ring, &gl, &phi, &f));
        if lhs != rhs {
            failures += 1;
        }
    }
    Ok(failures)
}

/// Both sides of `Z(F_ψΦ, χ^{-1}) = γ(χ,ψ) Z(Φ,χ) + q^{-1/2} Φ(0) Σ_x χ^{-1}(x)` on `k`.
#[derive(Clone, Debug)]
pub struct Gl1Report<E> {
    pub lhs: E,
    pub rhs: E,
    pub correction: E,
    pub equal: bool,
}

pub fn gl1_fe_full<R: CoeffRing>(
    ring: &R,
    chi: &MultChar,
    phi: &GFun<R::E>,
    psi: &AddChar,
    conv: &SqrtConvention<R::E>,
) -> Result<Gl1Report<R::E>, GammaError> {
    let alg = phi.algebra().clone();
    let f = alg.field();
    let hat = fourier(ring, phi, psi, conv, Exec::Sequential)?;
    let s = gauss_sum_gamma(ring, chi, psi)?;
    let mut lhs = ring.zero();
    let mut z = ring.zero();
    let mut csum = ring.zero();
    for x in f.units() {
        let c = chi.value(ring, x)?;
        let ci = ring.inv(&c)?;
        lhs = ring.add(&lhs, &ring.mul(hat.get(x), &ci));
        z = ring.add(&z, &ring.mul(phi.get(x), &c));
        csum = ring.add(&csum, &ci);
    }
    let correction = ring.mul(&ring.mul(&conv.inverse, phi.get(0)), &csum);
    let rhs = ring.add(&ring.mul(&s, &z), &correction);
    Ok(Gl1Report {
        equal: lhs == rhs,
        lhs,
        rhs,
        correction,
    })
}

/// `(-1)^{n-1} γ(ξ, ψ∘tr)` for `ξ` on `k_n^×` and `ψ` on `k`.
pub fn kondo_gamma<R: CoeffRing>(ring: &R, xi: &MultChar, n: u32, psi: &AddChar) -> Result<R::E, GammaError> {
    if xi.deg() != n * psi.deg() {
        return Err(GammaError::LevelMismatch(xi.deg(), n * psi.deg()));
    }
    let g = gauss_sum_gamma(ring, xi, &psi.lift(xi.deg())?)?;
    Ok(if n.is_multiple_of(2) { ring.neg(&g) } else { g })
}

#[derive(Clone, Debug)]
pub struct MultReport<E> {
    pub gamma: E,
    pub product: E,
    pub equal: bool,
}

/// `γ(π, ψ)` against `Π γ(π_i, ψ)`.
pub fn multiplicativity_check<R: CoeffRing>(
    ring: &R,
    levi_gammas: &[R::E],
    chi: &ClassFun<R::E>,
    psi: &AddChar,
    conv: &SqrtConvention<R::E>,
) -> Result<MultReport<R::E>, GammaError> {
    let gamma = gamma_via_trace(ring, chi, psi, conv)?;
    let product = levi_gammas.iter().fold(ring.one(), |a, b| ring.mul(&a, b));
    Ok(MultReport {
        equal: gamma == product,
        gamma,
        product,
    })
}

#[derive(Clone, Debug)]
pub struct TwistReport<E> {
    /// `(t, γ(ψ_t), ω(t)^{-1} γ(ψ))` per `t ∈ k^×`.
    pub twists: Vec<(u32, E, E)>,
    pub twist_ok: bool,
    /// `γ(π, ψ) γ(π^∨, ψ^{-1})`.
    pub duality_product: E,
}

pub fn twist_and_duality_checks<R: CoeffRing>(
    ring: &R,
    chi: &ClassFun<R::E>,
    psi: &AddChar,
    conv: &SqrtConvention<R::E>,
) -> Result<TwistReport<R::E>, GammaError> {
    let gl: Arc<GlGroup> = chi.gl().clone();
    let base = gamma_via_trace(ring, chi, psi, conv)?;
    let mut twists = Vec::new();
    let mut ok = true;
    for t in gl.field().units() {
        let gt = gamma_via_trace(ring, chi, &psi.twist(t), conv)?;
        let w = crate::reps::central_character(ring, chi, t)?;
        let pred = ring.mul(&ring.inv(&w)?, &base);
        ok &= gt == pred;
        twists.push((t, gt, pred));
    }
    let dual = gamma_via_trace(ring, &chi.dual(), &psi.inverse(), conv)?;
    Ok(TwistReport {
        twists,
        twist_ok: ok,
        duality_product: ring.mul(&base, &dual),
    })
}
