//! Cuspidal parameters as exponents of characters of `k_n^×`, their
//! ℓ-decomposition, `st_r` bookkeeping, self-duality predicates, and
//! closed-form gamma values of self-dual and distinguished representations.
//!
//! A character of `k_n^×` is the exponent `a` modulo `q^n - 1` with respect to
//! the fixed generator; generators of the levels are norm-compatible, so
//! `ξ'∘N_{k_n/k_f}` has exponent `a'·(q^n - 1)/(q^f - 1)`.

use crate::fields::{FieldElem, FieldTower};
use crate::harmonic::MultChar;
use crate::scalars::{gcd, prime_to_part, CoeffRing, ScalarError};
use serde::Serialize;
use serde_json::{json, Value};
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ParamError {
    #[error("malformed parameter spec: {0}")]
    Spec(String),
    #[error("no modular target ring set")]
    NoModular,
    #[error("twist length {r} is not 1 or e·ℓ^a with e = {e}")]
    BadTwistLength { r: u64, e: u64 },
    #[error("parameter is not self-dual")]
    NotSelfDual,
    #[error("closed form requires odd q and even n ≥ 2")]
    Hypothesis,
    #[error("multiplicity of the trivial character must be even, got {0}")]
    OddTrivialMultiplicity(u32),
    #[error("distinguished cuspidal factor does not contribute 1")]
    GaloisFactor,
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

/// Multiplicative order of `x` modulo `m`, for `gcd(x, m) = 1`.
pub fn mult_order(x: u64, m: u64) -> u64 {
    if m == 1 {
        return 1;
    }
    let mut k = 1;
    let mut y = x % m;
    while y != 1 {
        y = ((y as u128 * x as u128) % m as u128) as u64;
        k += 1;
    }
    k
}

/// `e(x) = o(x)` when the order of `x` in `F_ℓ^×` is not 1, else `ℓ`.
pub fn e_of(x: u64, ell: u64) -> u64 {
    let o = mult_order(x % ell, ell);
    if o != 1 {
        o
    } else {
        ell
    }
}

/// Orbit `{a q^i}` modulo `q^n - 1`, sorted.
pub fn orbit(q: u64, n: u32, a: u64) -> Vec<u64> {
    let m = q.pow(n) - 1;
    let mut s = BTreeSet::new();
    let mut x = a % m;
    for _ in 0..n {
        s.insert(x);
        x = ((x as u128 * q as u128) % m as u128) as u64;
    }
    s.into_iter().collect()
}

/// ℓ-regular (prime-to-ℓ order) and ℓ-power parts of the exponent `a` mod `m`.
pub fn ell_split(a: u64, m: u64, ell: u64) -> (u64, u64) {
    let (u, _) = prime_to_part(m, ell);
    let lp = m / u;
    // idempotents of Z/m = Z/u × Z/lp
    let e_u = if u == 1 {
        0
    } else {
        let inv = modinv(lp % u, u);
        (lp as u128 * inv as u128 % m as u128) as u64
    };
    let reg = (a as u128 * e_u as u128 % m as u128) as u64;
    let sing = (a + m - reg) % m;
    (reg, sing)
}

fn modinv(a: u64, m: u64) -> u64 {
    let (mut t, mut nt) = (0i128, 1i128);
    let (mut r, mut nr) = (m as i128, a as i128);
    while nr != 0 {
        let qq = r / nr;
        (t, nt) = (nt, t - qq * nt);
        (r, nr) = (nr, r - qq * nr);
    }
    t.rem_euclid(m as i128) as u64
}

/// Parsed `"xi:q=3,n=2,a=2"`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ParamSpec {
    pub q: u64,
    pub n: u32,
    pub a: u64,
}

impl ParamSpec {
    pub fn parse(s: &str) -> Result<ParamSpec, ParamError> {
        let bad = || ParamError::Spec(s.to_string());
        let rest = s.strip_prefix("xi:").ok_or_else(bad)?;
        let (mut q, mut n, mut a) = (None, None, None);
        for part in rest.split(',') {
            let (k, v) = part.split_once('=').ok_or_else(bad)?;
            let v: u64 = v.trim().parse().map_err(|_| bad())?;
            match k.trim() {
                "q" => q = Some(v),
                "n" => n = Some(v as u32),
                "a" => a = Some(v),
                _ => return Err(bad()),
            }
        }
        let (q, n, a) = (q.ok_or_else(bad)?, n.ok_or_else(bad)?, a.ok_or_else(bad)?);
        if q < 2 || n == 0 || crate::pairs::prime_power(q as u32).is_none() {
            return Err(bad());
        }
        Ok(ParamSpec {
            q,
            n,
            a: a % (q.pow(n) - 1),
        })
    }

    pub fn to_spec_string(&self) -> String {
        format!("xi:q={},n={},a={}", self.q, self.n, self.a)
    }
}

/// Modular data of a parameter.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ModularData {
    pub ell: u64,
    /// Exponent of `ξ_ℓ`.
    pub regular_part: u64,
    /// Exponent of `ξ^ℓ`.
    pub singular_part: u64,
    pub ell_regular: bool,
    pub reduced_orbit: Vec<u64>,
    pub supercuspidal: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CuspParam {
    pub q: u64,
    pub n: u32,
    pub a: u64,
    pub modulus: u64,
    pub orbit: Vec<u64>,
    pub regular: bool,
    pub modular: Option<ModularData>,
}

pub fn classify_param(spec: ParamSpec, ell: Option<u64>) -> CuspParam {
    let m = spec.q.pow(spec.n) - 1;
    let a = spec.a % m;
    let orb = orbit(spec.q, spec.n, a);
    let modular = ell.map(|ell| {
        let (reg, sing) = ell_split(a, m, ell);
        let ro = orbit(spec.q, spec.n, reg);
        ModularData {
            ell,
            regular_part: reg,
            singular_part: sing,
            ell_regular: sing == 0,
            supercuspidal: ro.len() == spec.n as usize,
            reduced_orbit: ro,
        }
    });
    CuspParam {
        q: spec.q,
        n: spec.n,
        a,
        modulus: m,
        regular: orb.len() == spec.n as usize,
        orbit: orb,
        modular,
    }
}

/// `π(ξ) = st_r(π(ξ'))` with `ξ_ℓ = ξ'∘N_{k_n/k_f}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StRParam {
    pub f: u32,
    pub r: u64,
    /// Exponent of `ξ'` modulo `q^f - 1`.
    pub a_prime: u64,
    pub e: u64,
}

/// `r ∈ {1} ∪ {e(q^f) ℓ^a}`.
pub fn valid_twist_length(r: u64, e: u64, ell: u64) -> bool {
    if r == 1 {
        return true;
    }
    if !r.is_multiple_of(e) {
        return false;
    }
    let mut s = r / e;
    while s.is_multiple_of(ell) {
        s /= ell;
    }
    s == 1
}

pub fn st_r_decompose(p: &CuspParam) -> Result<StRParam, ParamError> {
    let md = p.modular.as_ref().ok_or(ParamError::NoModular)?;
    let f = md.reduced_orbit.len() as u32;
    let r = (p.n / f) as u64;
    let qf = p.q.pow(f) - 1;
    let c = p.modulus / qf;
    debug_assert_eq!(md.regular_part % c, 0);
    let a_prime = md.regular_part / c;
    let e = e_of(p.q.pow(f), md.ell);
    if !valid_twist_length(r, e, md.ell) {
        return Err(ParamError::BadTwistLength { r, e });
    }
    Ok(StRParam { f, r, a_prime, e })
}

/// Same James class: `ξ'_ℓ` lies in the Frobenius orbit of `ξ_ℓ`.
pub fn same_james_class(a: &CuspParam, b: &CuspParam) -> bool {
    match (&a.modular, &b.modular) {
        (Some(x), Some(y)) => a.q == b.q && a.n == b.n && x.ell == y.ell && x.reduced_orbit == y.reduced_orbit,
        _ => false,
    }
}

/// `ξ` is trivial on `k_m^×`, tested on the generator `g^{(q^n-1)/(q^m-1)}`.
pub fn trivial_on_subfield(q: u64, n: u32, a: u64, m: u32) -> bool {
    let big = q.pow(n) - 1;
    let c = big / (q.pow(m) - 1);
    (a as u128 * c as u128).is_multiple_of(big as u128)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DualityFlags {
    /// `-a` in the orbit of `a`.
    pub self_dual: bool,
    /// `n = 2m` and `ξ|_{k_m^×} = 1` (or `ξ^2 = 1` when `n = 1`).
    pub criterion: bool,
    pub criterion_agrees: bool,
    /// With `q = q_0^2`: `-a q_0` in the orbit of `a`.
    pub sigma_self_dual: Option<bool>,
}

pub fn self_duality_tests(p: &CuspParam) -> DualityFlags {
    let m = p.modulus;
    let neg = (m - p.a % m) % m;
    let self_dual = p.orbit.contains(&neg);
    let criterion = if p.n == 1 {
        (2 * p.a).is_multiple_of(m)
    } else {
        p.n.is_multiple_of(2) && trivial_on_subfield(p.q, p.n, p.a, p.n / 2)
    };
    let q0 = (p.q as f64).sqrt().round() as u64;
    let sigma_self_dual = (q0 * q0 == p.q && crate::pairs::prime_power(q0 as u32).is_some()).then(|| {
        let t = (neg as u128 * q0 as u128 % m as u128) as u64;
        p.orbit.contains(&t)
    });
    DualityFlags {
        self_dual,
        criterion,
        criterion_agrees: !p.regular || p.q.is_multiple_of(2) || self_dual == criterion,
        sigma_self_dual,
    }
}

/// `sign · q^{half/2}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Monomial {
    pub sign: i8,
    pub half: i32,
}

impl Monomial {
    pub const ONE: Monomial = Monomial { sign: 1, half: 0 };
    pub fn sign(s: i8) -> Monomial {
        Monomial { sign: s, half: 0 }
    }
    /// `-q^{-1/2}`.
    pub fn gamma_trivial() -> Monomial {
        Monomial { sign: -1, half: -1 }
    }
    pub fn mul(self, o: Monomial) -> Monomial {
        Monomial {
            sign: self.sign * o.sign,
            half: self.half + o.half,
        }
    }
    pub fn pow(self, k: u64) -> Monomial {
        Monomial {
            sign: if k % 2 == 1 { self.sign } else { 1 },
            half: self.half * k as i32,
        }
    }
    pub fn neg(self) -> Monomial {
        Monomial {
            sign: -self.sign,
            half: self.half,
        }
    }

    /// Value in a ring, with `q = p^d` and the fixed `√p`.
    pub fn to_ring<R: CoeffRing>(&self, ring: &R, p: u64, d: u32) -> Result<R::E, ScalarError> {
        let e = self.half as i64 * d as i64;
        let mut v = ring.pow(&ring.from_int(p as i64), e.div_euclid(2))?;
        if e.rem_euclid(2) == 1 {
            v = ring.mul(&v, &ring.sqrt_p(p)?);
        }
        Ok(if self.sign < 0 { ring.neg(&v) } else { v })
    }

    pub fn pretty(&self) -> String {
        let s = if self.sign < 0 { "-" } else { "" };
        match self.half {
            0 => format!("{s}1"),
            2 => format!("{s}q"),
            h if h % 2 == 0 => format!("{s}q^{{{}}}", h / 2),
            h => format!("{s}q^{{{}/2}}", h),
        }
    }
}

/// `ξ(δ)` in `{±1}` for `ξ` trivial on `k_m^×`, `n = 2m`, and `δ` of trace zero to `k_m`.
///
/// With `ξ = (q^m - 1)·b`, `δ = g^{(q^m+1)/2}` gives `ξ(δ) = (-1)^b`.
pub fn xi_at_trace_zero(q: u64, n: u32, a: u64) -> Option<i8> {
    if !n.is_multiple_of(2) || q.is_multiple_of(2) || !trivial_on_subfield(q, n, a, n / 2) {
        return None;
    }
    let qm = q.pow(n / 2);
    let b = (a / (qm - 1)) % 2;
    Some(if b == 0 { 1 } else { -1 })
}

/// Which case of the self-dual cuspidal formula applied.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SelfDualCase {
    Supercuspidal,
    RodOdd,
    RodEven,
    SteinbergTrivial,
    SteinbergQuadratic,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SelfDualValue {
    pub case: SelfDualCase,
    pub value: Monomial,
    pub decomposition: Option<StRParam>,
}

/// Closed form for a self-dual cuspidal `π(ξ)`, `q` odd, `n = 2m`; in characteristic
/// zero (no modular data) the parameter must be regular and `r = 1`.
pub fn eval_self_dual_gamma(p: &CuspParam) -> Result<SelfDualValue, ParamError> {
    if p.q.is_multiple_of(2) || !p.n.is_multiple_of(2) {
        return Err(ParamError::Hypothesis);
    }
    let m = p.n / 2;
    let Some(md) = &p.modular else {
        if !p.regular {
            return Err(ParamError::NotSelfDual);
        }
        let s = xi_at_trace_zero(p.q, p.n, p.a).ok_or(ParamError::NotSelfDual)?;
        return Ok(SelfDualValue {
            case: SelfDualCase::Supercuspidal,
            value: Monomial::sign(-s),
            decomposition: None,
        });
    };
    let st = st_r_decompose(p)?;
    let a = md.regular_part;
    if st.f >= 2 {
        xi_at_trace_zero(p.q, st.f, st.a_prime).ok_or(ParamError::NotSelfDual)?;
        let (case, value) = if st.r % 2 == 1 {
            let full = xi_at_trace_zero(p.q, p.n, a).ok_or(ParamError::NotSelfDual)?;
            (
                if st.r == 1 { SelfDualCase::Supercuspidal } else { SelfDualCase::RodOdd },
                Monomial::sign(-full),
            )
        } else {
            (SelfDualCase::RodEven, Monomial::ONE)
        };
        return Ok(SelfDualValue {
            case,
            value,
            decomposition: Some(st),
        });
    }
    let qm1 = p.q - 1;
    if st.a_prime % qm1 == 0 {
        return Ok(SelfDualValue {
            case: SelfDualCase::SteinbergTrivial,
            value: Monomial {
                sign: 1,
                half: -2 * m as i32,
            },
            decomposition: Some(st),
        });
    }
    if 2 * st.a_prime % qm1 == 0 && md.ell != 2 {
        // η(-1) = (-1)^{(q-1)/2}
        let eta_minus_one: i8 = if (qm1 / 2).is_multiple_of(2) { 1 } else { -1 };
        return Ok(SelfDualValue {
            case: SelfDualCase::SteinbergQuadratic,
            value: Monomial::sign(eta_minus_one).pow(m as u64),
            decomposition: Some(st),
        });
    }
    Err(ParamError::NotSelfDual)
}

/// `γ(ρ)^r` from the supercuspidal values, the other side of the `st_r` power rule.
pub fn power_rule_value(q: u64, st: &StRParam) -> Option<Monomial> {
    if st.f >= 2 {
        let s = xi_at_trace_zero(q, st.f, st.a_prime)?;
        return Some(Monomial::sign(-s).pow(st.r));
    }
    let qm1 = q - 1;
    if st.a_prime.is_multiple_of(qm1) {
        return Some(Monomial::gamma_trivial().pow(st.r));
    }
    if (2 * st.a_prime).is_multiple_of(qm1) && st.r.is_multiple_of(2) {
        // γ(η)^2 = η(-1)
        let eta_minus_one: i8 = if (qm1 / 2).is_multiple_of(2) { 1 } else { -1 };
        return Some(Monomial::sign(eta_minus_one).pow(st.r / 2));
    }
    None
}

/// Every valid `(f, r, ξ')` with `ρ = π(ξ')` self-dual supercuspidal and `f r = n`,
/// presented as parameters `ξ = ξ'∘N` of `k_n^×`.
pub fn self_dual_decompositions(q: u64, n: u32, ell: u64) -> Vec<(StRParam, CuspParam)> {
    let mut out = Vec::new();
    let big = q.pow(n) - 1;
    for f in (1..=n).filter(|f| n.is_multiple_of(*f)) {
        let r = (n / f) as u64;
        let e = e_of(q.pow(f), ell);
        if !valid_twist_length(r, e, ell) {
            continue;
        }
        let qf = q.pow(f) - 1;
        let (u, _) = prime_to_part(qf, ell);
        let mut seen = BTreeSet::new();
        for ap in 0..qf {
            // ℓ-regular: order prime to ℓ
            let ord = qf / gcd(ap, qf);
            if gcd(ord, ell) != 1 || u % ord != 0 {
                continue;
            }
            let orb = orbit(q, f, ap);
            if orb.len() != f as usize || !seen.insert(orb[0]) {
                continue;
            }
            let sd = if f == 1 {
                (2 * ap) % qf == 0
            } else {
                f % 2 == 0 && trivial_on_subfield(q, f, ap, f / 2)
            };
            if !sd {
                continue;
            }
            let a = ap * (big / qf);
            let p = classify_param(ParamSpec { q, n, a }, Some(ell));
            out.push((
                StRParam {
                    f,
                    r,
                    a_prime: ap,
                    e,
                },
                p,
            ));
        }
    }
    out
}

/// `ξ(δ_0)` for `ξ` on `k_n^×` and `δ_0` trace zero in `k` over `k_0`; the predicted
/// `γ(π(ξ), ψ_0∘tr)` of a distinguished cuspidal.  For `ψ` trivial on `k_0` the prediction is 1.
pub fn eval_galois_gamma<R: CoeffRing>(
    ring: &R,
    xi: &MultChar,
    delta0: FieldElem,
) -> Result<R::E, ParamError> {
    let tower: &FieldTower = xi.tower();
    let up = tower
        .embed(delta0, xi.deg())
        .map_err(|e| ParamError::Spec(e.to_string()))?;
    Ok(xi.value(ring, up.code)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ModelKind {
    Galois,
    Linear,
}

/// `(-q^{-1/2})^c Π γ(ρ_i) Π ω_{τ_j}(-1)` (linear and twisted linear) or
/// `(-q^{-1/2})^c` (Galois), with the involution's roles as input.
pub fn eval_period_product<R: CoeffRing>(
    ring: &R,
    p: u64,
    d: u32,
    rho_gammas: &[R::E],
    tau_signs: &[R::E],
    c: u32,
    kind: ModelKind,
) -> Result<R::E, ParamError> {
    let base = Monomial::gamma_trivial().pow(c as u64).to_ring(ring, p, d)?;
    match kind {
        ModelKind::Linear => {
            if !c.is_multiple_of(2) {
                return Err(ParamError::OddTrivialMultiplicity(c));
            }
            let mut v = base;
            for x in rho_gammas.iter().chain(tau_signs) {
                v = ring.mul(&v, x);
            }
            Ok(v)
        }
        ModelKind::Galois => {
            if rho_gammas.iter().any(|g| *g != ring.one()) {
                return Err(ParamError::GaloisFactor);
            }
            Ok(base)
        }
    }
}

/// `{param, rule, predicted_gamma}` for the CLI.
pub fn predict(spec: ParamSpec, ell: Option<u64>) -> Result<Value, ParamError> {
    let p = classify_param(spec, ell);
    let flags = self_duality_tests(&p);
    let (rule, value) = if spec.n == 1 {
        if spec.a == 0 {
            ("trivial character", Monomial::gamma_trivial().pretty())
        } else {
            ("abelian gauss sum", "gauss sum".to_string())
        }
    } else {
        let v = eval_self_dual_gamma(&p)?;
        let name = match v.case {
            SelfDualCase::Supercuspidal => "self-dual supercuspidal: -xi(delta)",
            SelfDualCase::RodOdd => "st_r, r odd: -xi(delta)",
            SelfDualCase::RodEven => "st_r, r even: 1",
            SelfDualCase::SteinbergTrivial => "st_n(1): q^{-m}",
            SelfDualCase::SteinbergQuadratic => "st_n(eta): eta(-1)^m",
        };
        (name, v.value.pretty())
    };
    Ok(json!({
        "param": spec.to_spec_string(),
        "rule": rule,
        "predicted_gamma": value,
        "classification": p,
        "duality": flags,
    }))
}
