use gjfe::exec::Exec;
use gjfe::fields::FieldTower;
use gjfe::gamma::{
    gamma_via_trace, gjfe_operator_check, gl1_fe_full, kondo_gamma, multiplicativity_check, trace_fe_witness,
};
use gjfe::harmonic::{
    algebra_sqrt, convolve, delta, fourier, gauss_sum_gamma, pairing, pointwise_mul, poisson_check, random_gfun,
    AddChar, MultChar, Subspace,
};
use gjfe::matspace::{Algebra, Budget};
use gjfe::pairs::{build_pair, distinction_row, doublecoset_inversion_check, PairSpec, SymmetricPair};
use gjfe::params::{
    classify_param, eval_galois_gamma, eval_self_dual_gamma, power_rule_value, self_dual_decompositions,
    self_duality_tests, xi_at_trace_zero, Monomial, ParamSpec,
};
use gjfe::reps::{
    central_character, character_of, cuspidal_orbit_reps, det_character, hom_dim, induced_character, inner,
    is_cuspidal, trivial_character, ClassFun, GlGroup, KirillovModel,
};
use gjfe::scalars::{lcm, reduce_mod_ell, CoeffRing, Cyclo, CycloElem, ModF};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::Instant;

type Outcome = Result<String, String>;

const EX: Exec = Exec::Parallel;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e<T: std::fmt::Display>(x: T) -> String {
    x.to_string()
}

fn gl(p: u32, degs: &[u32], d: u32, n: usize) -> Arc<GlGroup> {
    let t = Arc::new(FieldTower::build(p, degs).unwrap());
    GlGroup::new(t, d, n, &Budget::default(), EX).unwrap()
}

fn pair(s: &str) -> SymmetricPair {
    build_pair(&PairSpec::parse(s).unwrap(), &Budget::default(), EX).unwrap()
}

fn cusp_char<R: CoeffRing>(ring: &R, g: &Arc<GlGroup>, a: u64) -> (MultChar, KirillovModel, ClassFun<R::E>) {
    let xi = MultChar::new(g.tower.clone(), 2 * g.deg, a as i64).unwrap();
    let m = KirillovModel::new(g.clone(), xi.clone(), ring.order()).unwrap();
    let chi = character_of(ring, &m, EX).unwrap();
    (xi, m, chi)
}

fn c1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut funs = 0;
    for (p, n) in [(3u32, 1usize), (5, 1), (3, 2)] {
        let t = Arc::new(FieldTower::build(p, &[1]).unwrap());
        let a = Algebra::matrices(t.clone(), 1, n, &Budget::default()).map_err(e)?;
        let psi = AddChar::standard(t, 1).map_err(e)?;
        let r = Cyclo::new(if a.size_exponent() % 2 == 0 { p as u64 } else { 4 * p as u64 }).map_err(e)?;
        let conv = algebra_sqrt(&r, &a).map_err(e)?;
        for _ in 0..100 {
            let f = random_gfun(&r, a.clone(), &mut rng, 4);
            let g = random_gfun(&r, a.clone(), &mut rng, 4);
            let ff = fourier(&r, &f, &psi, &conv, EX).map_err(e)?;
            ensure(fourier(&r, &ff, &psi.inverse(), &conv, EX).map_err(e)? == f, || format!("inversion p={p} n={n}"))?;
            let c = convolve(&r, &f, &g, &conv, EX).map_err(e)?;
            let fg = fourier(&r, &g, &psi, &conv, EX).map_err(e)?;
            ensure(
                fourier(&r, &c, &psi, &conv, EX).map_err(e)? == pointwise_mul(&r, &ff, &fg).map_err(e)?,
                || format!("convolution p={p} n={n}"),
            )?;
            let gi = fourier(&r, &g, &psi.inverse(), &conv, EX).map_err(e)?;
            ensure(
                pairing(&r, &f, &g).map_err(e)? == pairing(&r, &ff, &gi).map_err(e)?,
                || format!("parseval p={p} n={n}"),
            )?;
            funs += 1;
        }
    }
    let t = Arc::new(FieldTower::build(3, &[1]).unwrap());
    let a = Algebra::matrices(t.clone(), 1, 2, &Budget::default()).map_err(e)?;
    let psi = AddChar::standard(t, 1).map_err(e)?;
    let r = Cyclo::new(3).map_err(e)?;
    let conv = algebra_sqrt(&r, &a).map_err(e)?;
    let random_unit = |rng: &mut ChaCha8Rng, alg: &Algebra| loop {
        let x = alg.decode(rng.gen_range(0..alg.size() as u32));
        if alg.inverse(&x).is_some() {
            return x;
        }
    };
    let mut subspaces = 0;
    for k in 0..25 {
        let h = Subspace::random(a.clone(), &mut rng, k % 5);
        let f = random_gfun(&r, a.clone(), &mut rng, 3);
        let x = random_unit(&mut rng, &a);
        ensure(poisson_check(&r, &f, &h, &x, &psi, &conv, EX).map_err(e)?.equal, || {
            format!("poisson random subspace {k}")
        })?;
        subspaces += 1;
    }
    for s in ["galois:n=2,p=3", "linear:m=1,q=3", "twisted:m=1,q=3"] {
        let pr = pair(s);
        let alg = pr.gl.alg.clone();
        let conv = pr.sqrt_convention(&r).map_err(e)?;
        for _ in 0..2 {
            let f = random_gfun(&r, alg.clone(), &mut rng, 3);
            let x = random_unit(&mut rng, &alg);
            ensure(poisson_check(&r, &f, &pr.hh, &x, &pr.psi, &conv, EX).map_err(e)?.equal, || {
                format!("poisson {s}")
            })?;
        }
    }
    Ok(format!("{funs} random functions, {subspaces} random subspaces, 3 pair subspaces"))
}

fn c2() -> Outcome {
    let mut checks = 0;
    for p in [3u32, 5, 7] {
        let t = Arc::new(FieldTower::build(p, &[1]).unwrap());
        let a = Algebra::matrices(t.clone(), 1, 1, &Budget::default()).map_err(e)?;
        let r = Cyclo::new(lcm(4 * p as u64, (p - 1) as u64)).map_err(e)?;
        let psi = AddChar::standard(t.clone(), 1).map_err(e)?;
        let conv = algebra_sqrt(&r, &a).map_err(e)?;
        for k in 0..(p - 1) as i64 {
            let xi = MultChar::new(t.clone(), 1, k).map_err(e)?;
            for m in 0..p {
                let rep = gl1_fe_full(&r, &xi, &delta(&r, a.clone(), m), &psi, &conv).map_err(e)?;
                ensure(rep.equal, || format!("p={p} chi={k} m={m}"))?;
                checks += 1;
            }
        }
    }
    Ok(format!("{checks} (character, delta) pairs"))
}

fn c3() -> Outcome {
    let mut reps = Vec::new();
    for (p, n) in [(3u32, 24u64), (5, 120)] {
        let g = gl(p, &[1, 2], 1, 2);
        let r = Cyclo::new(n).map_err(e)?;
        let psi = AddChar::standard(g.tower.clone(), 1).map_err(e)?;
        let conv = algebra_sqrt(&r, &g.alg).map_err(e)?;
        let orbits = cuspidal_orbit_reps(p as u64);
        for &a in &orbits {
            let (xi, m, chi) = cusp_char(&r, &g, a);
            let gm = gamma_via_trace(&r, &chi, &psi, &conv).map_err(e)?;
            let rep = gjfe_operator_check(&r, &m, &gm, &psi, &conv, true, EX).map_err(e)?;
            ensure(rep.strong == Some(true) && rep.weak && rep.scalar, || {
                format!("q={p} a={a} operator check {:?}", rep.counterexample)
            })?;
            ensure(rep.extracted == gm, || format!("q={p} a={a} extracted gamma"))?;
            let lifted = psi.lift(2).map_err(e)?;
            let abelian = gauss_sum_gamma(&r, &xi, &lifted).map_err(e)?;
            ensure(r.neg(&abelian) == gm, || format!("q={p} a={a} Kondo"))?;
            ensure(kondo_gamma(&r, &xi, 2, &psi).map_err(e)? == gm, || format!("q={p} a={a} kondo_gamma"))?;
        }
        reps.push(format!("GL_2(F_{p}): {}", orbits.len()));
    }
    ensure(reps == ["GL_2(F_3): 3", "GL_2(F_5): 10"], || format!("orbit counts {reps:?}"))?;
    Ok(reps.join(", ") + " cuspidals, every m in M_2")
}

fn c4() -> Outcome {
    let g = gl(3, &[1, 2], 1, 2);
    let g1 = gl(3, &[1, 2], 1, 1);
    let r = Cyclo::new(24).map_err(e)?;
    let psi = AddChar::standard(g.tower.clone(), 1).map_err(e)?;
    let psi1 = AddChar::standard(g1.tower.clone(), 1).map_err(e)?;
    let conv = algebra_sqrt(&r, &g.alg).map_err(e)?;
    let conv1 = algebra_sqrt(&r, &g1.alg).map_err(e)?;
    let chars: Vec<ClassFun<CycloElem>> = (0..2)
        .map(|k| det_character(&r, g1.clone(), &MultChar::new(g1.tower.clone(), 1, k).unwrap()).unwrap())
        .collect();
    let gammas: Vec<CycloElem> = chars
        .iter()
        .map(|c| gamma_via_trace(&r, c, &psi1, &conv1).unwrap())
        .collect();
    let mut ps = 0;
    for (i, j) in [(0usize, 1usize), (1, 0)] {
        let ind = induced_character(&r, g.clone(), &[&chars[i], &chars[j]], &Budget::default(), EX).map_err(e)?;
        let rep = multiplicativity_check(&r, &[gammas[i].clone(), gammas[j].clone()], &ind, &psi, &conv).map_err(e)?;
        ensure(rep.equal, || format!("principal series ({i},{j})"))?;
        ps += 1;
    }
    let triv = &chars[0];
    let ind = induced_character(&r, g.clone(), &[triv, triv], &Budget::default(), EX).map_err(e)?;
    let st = ind.zip(&trivial_character(&r, g.clone()), |a, b| r.sub(a, b)).map_err(e)?;
    let gs = gamma_via_trace(&r, &st, &psi, &conv).map_err(e)?;
    ensure(gs == r.from_ratio(1, 3).map_err(e)?, || "Steinberg gamma".into())?;
    ensure(gs == r.mul(&gammas[0], &gammas[0]), || "Steinberg product".into())?;

    let t2 = Arc::new(FieldTower::build(2, &[1, 2]).unwrap());
    let g3 = GlGroup::new(t2.clone(), 1, 3, &Budget::default(), EX).map_err(e)?;
    let g2 = GlGroup::new(t2.clone(), 1, 2, &Budget::default(), EX).map_err(e)?;
    let g21 = GlGroup::new(t2.clone(), 1, 1, &Budget::default(), EX).map_err(e)?;
    let r2 = Cyclo::new(24).map_err(e)?;
    let psi2 = AddChar::standard(t2.clone(), 1).map_err(e)?;
    let (_, _, cusp) = cusp_char(&r2, &g2, 1);
    let one = trivial_character(&r2, g21.clone());
    let levi = [
        gamma_via_trace(&r2, &cusp, &psi2, &algebra_sqrt(&r2, &g2.alg).map_err(e)?).map_err(e)?,
        gamma_via_trace(&r2, &one, &psi2, &algebra_sqrt(&r2, &g21.alg).map_err(e)?).map_err(e)?,
    ];
    let ind3 = induced_character(&r2, g3.clone(), &[&cusp, &one], &Budget::default(), EX).map_err(e)?;
    let rep = multiplicativity_check(&r2, &levi, &ind3, &psi2, &algebra_sqrt(&r2, &g3.alg).map_err(e)?).map_err(e)?;
    ensure(rep.equal, || "GL_3(F_2) induced".into())?;
    Ok(format!("{ps} principal series, Steinberg = 1/3, GL_3(F_2) cuspidal x 1"))
}

fn c5(gal: &SymmetricPair) -> Outcome {
    let r = Cyclo::new(240).map_err(e)?;
    let conv = gal.sqrt_convention(&r).map_err(e)?;
    let dl = gal.delta.ok_or("no delta")?;
    let psi_triv = gal.psi.twist(dl.code);
    let mut dist = 0;
    let orbits = cuspidal_orbit_reps(9);
    for &a in &orbits {
        let (xi, _, chi) = cusp_char(&r, &gal.gl, a);
        let row = distinction_row(&r, gal, "", &chi).map_err(e)?;
        let flags = self_duality_tests(&classify_param(ParamSpec { q: 9, n: 2, a }, None));
        ensure(flags.sigma_self_dual == Some(row.distinguished), || {
            format!("a={a}: distinguished {} vs sigma-self-dual {:?}", row.distinguished, flags.sigma_self_dual)
        })?;
        if !row.distinguished {
            continue;
        }
        dist += 1;
        let omega = central_character(&r, &chi, dl.code).map_err(e)?;
        let xd = eval_galois_gamma(&r, &xi, dl).map_err(e)?;
        ensure(row.gamma == omega && omega == xd, || format!("a={a}: gamma vs omega(delta) vs xi(delta)"))?;
        ensure(gamma_via_trace(&r, &chi, &psi_triv, &conv).map_err(e)? == r.one(), || {
            format!("a={a}: gamma for psi trivial on F_3")
        })?;
    }
    let g1 = pair("galois:n=1,p=3");
    let r1 = Cyclo::new(24).map_err(e)?;
    let conv1 = g1.sqrt_convention(&r1).map_err(e)?;
    let d1 = g1.delta.ok_or("no delta")?;
    let mut dist1 = 0;
    for a in 1..8i64 {
        let xi = MultChar::new(g1.gl.tower.clone(), 2, a).map_err(e)?;
        let chi = det_character(&r1, g1.gl.clone(), &xi).map_err(e)?;
        let row = distinction_row(&r1, &g1, "", &chi).map_err(e)?;
        if row.distinguished {
            dist1 += 1;
            ensure(row.gamma == eval_galois_gamma(&r1, &xi, d1).map_err(e)?, || format!("GL_1 a={a}"))?;
            ensure(gamma_via_trace(&r1, &chi, &g1.psi.twist(d1.code), &conv1).map_err(e)? == r1.one(), || {
                format!("GL_1 a={a}: psi trivial on F_3")
            })?;
        }
    }
    ensure(dist1 == 3, || format!("GL_1(F_9): {dist1} distinguished"))?;
    Ok(format!(
        "{} cuspidals, {dist} distinguished = sigma-self-dual (vacuous at GL_2); GL_1(F_9) nontrivial distinguished: {dist1}",
        orbits.len()
    ))
}

fn c6() -> Outcome {
    let mut parts = Vec::new();
    for (q, n) in [(3u64, 24u64), (5, 120)] {
        let r = Cyclo::new(n).map_err(e)?;
        for kind in ["linear", "twisted"] {
            let pr = pair(&format!("{kind}:m=1,q={q}"));
            let mut dist = 0;
            for &a in &cuspidal_orbit_reps(q) {
                let (_, _, chi) = cusp_char(&r, &pr.gl, a);
                let row = distinction_row(&r, &pr, "", &chi).map_err(e)?;
                if row.distinguished {
                    dist += 1;
                    ensure(row.sign_matches == Some(true), || format!("{kind} q={q} a={a}"))?;
                }
            }
            ensure(dist > 0, || format!("{kind} q={q}: none distinguished"))?;
            parts.push(format!("{kind} q={q}: {dist}"));
        }
    }
    Ok(parts.join(", "))
}

fn c7(gal: &SymmetricPair) -> Outcome {
    let mut params = 0;
    for (q, p, d) in [(3u64, 3u32, 1u32), (5, 5, 1), (9, 3, 2)] {
        let shared;
        let g = if q == 9 {
            gal.gl.clone()
        } else {
            shared = gl(p, &[1, 2], 1, 2);
            shared
        };
        let t = g.tower.clone();
        let dl = t.trace_zero_element(2 * d, d).map_err(e)?;
        let psi = AddChar::standard(t.clone(), d).map_err(e)?;
        let r = Cyclo::new(lcm(p as u64, q * q - 1)).map_err(e)?;
        let conv = algebra_sqrt(&r, &g.alg).map_err(e)?;
        for a in 0..(q * q - 1) {
            let c = classify_param(ParamSpec { q, n: 2, a }, None);
            if !c.regular || !self_duality_tests(&c).self_dual || c.orbit[0] != a {
                continue;
            }
            let xi = MultChar::new(t.clone(), 2 * d, a as i64).map_err(e)?;
            let xd = xi.value(&r, dl.code).map_err(e)?;
            let abelian = gauss_sum_gamma(&r, &xi, &psi.lift(2 * d).map_err(e)?).map_err(e)?;
            ensure(abelian == xd, || format!("q={q} a={a}: gauss sum vs xi(delta)"))?;
            let (_, _, chi) = cusp_char(&r, &g, a);
            let gm = gamma_via_trace(&r, &chi, &psi, &conv).map_err(e)?;
            ensure(gm == r.neg(&xd), || format!("q={q} a={a}: -xi(delta)"))?;
            let closed = eval_self_dual_gamma(&c).map_err(e)?.value.to_ring(&r, p as u64, d).map_err(e)?;
            ensure(closed == gm, || format!("q={q} a={a}: closed form"))?;
            let s = xi_at_trace_zero(q, 2, a).ok_or("sign")?;
            ensure(r.from_int(s as i64) == xd, || format!("q={q} a={a}: sign arithmetic"))?;
            params += 1;
        }
    }
    let mut decomps = 0;
    for q in [3u64, 5, 7, 9] {
        for ell in [2u64, 3, 5, 7, 11, 13] {
            if q % ell == 0 {
                continue;
            }
            for n in [2u32, 4] {
                for (st, p) in self_dual_decompositions(q, n, ell) {
                    let v = eval_self_dual_gamma(&p).map_err(e)?;
                    let pw: Option<Monomial> = power_rule_value(q, &st);
                    ensure(Some(v.value) == pw && v.decomposition.as_ref() == Some(&st), || {
                        format!("q={q} l={ell} n={n} {st:?}: {:?} vs {pw:?}", v.value)
                    })?;
                    decomps += 1;
                }
            }
        }
    }
    Ok(format!("{params} self-dual parameters, {decomps} (f, r) decompositions"))
}

fn c8() -> Outcome {
    let g = gl(3, &[1, 2], 1, 2);
    let g1 = gl(3, &[1, 2], 1, 1);
    let r0 = Cyclo::new(24).map_err(e)?;
    let rl = ModF::new(5, 24).map_err(e)?;
    ensure(rl.degree() == 2, || format!("F_5^{}", rl.degree()))?;

    fn all_irreps<R: CoeffRing>(ring: &R, g: &Arc<GlGroup>, g1: &Arc<GlGroup>) -> Vec<(String, ClassFun<R::E>)> {
        let mut out = Vec::new();
        for &a in &cuspidal_orbit_reps(3) {
            out.push((format!("cusp a={a}"), cusp_char(ring, g, a).2));
        }
        let lin: Vec<_> = (0..2)
            .map(|k| det_character(ring, g1.clone(), &MultChar::new(g1.tower.clone(), 1, k).unwrap()).unwrap())
            .collect();
        out.push((
            "ps(1,eta)".into(),
            induced_character(ring, g.clone(), &[&lin[0], &lin[1]], &Budget::default(), EX).unwrap(),
        ));
        for k in 0..2 {
            let one_dim = det_character(ring, g.clone(), &MultChar::new(g.tower.clone(), 1, k).unwrap()).unwrap();
            let ind = induced_character(ring, g.clone(), &[&lin[k as usize], &lin[k as usize]], &Budget::default(), EX)
                .unwrap();
            out.push((format!("st x eta^{k}"), ind.zip(&one_dim, |a, b| ring.sub(a, b)).unwrap()));
            out.push((format!("eta^{k} o det"), one_dim));
        }
        out
    }

    let psi = AddChar::standard(g.tower.clone(), 1).map_err(e)?;
    let c0 = algebra_sqrt(&r0, &g.alg).map_err(e)?;
    let cl = algebra_sqrt(&rl, &g.alg).map_err(e)?;
    let zero = all_irreps(&r0, &g, &g1);
    let modl = all_irreps(&rl, &g, &g1);
    for ((name, x0), (_, xl)) in zero.iter().zip(&modl) {
        let g0 = gamma_via_trace(&r0, x0, &psi, &c0).map_err(e)?;
        let gl_ = gamma_via_trace(&rl, xl, &psi, &cl).map_err(e)?;
        ensure(reduce_mod_ell(&r0, &g0, &rl).map_err(e)? == gl_, || format!("{name}: reduction"))?;
    }

    let mut rows = 0;
    for kind in ["linear", "twisted"] {
        let pr = pair(&format!("{kind}:m=1,q=3"));
        for &a in &cuspidal_orbit_reps(3) {
            let param = classify_param(ParamSpec { q: 3, n: 2, a }, Some(5));
            let sc = param.modular.as_ref().map(|m| m.supercuspidal).unwrap_or(false);
            let sd = self_duality_tests(&param).self_dual;
            let x0 = cusp_char(&r0, &pr.gl, a).2;
            let xl = cusp_char(&rl, &pr.gl, a).2;
            let d0 = hom_dim(&r0, &x0, &pr.h).map_err(e)? == r0.one();
            let dl = hom_dim(&rl, &xl, &pr.h).map_err(e)? == rl.one();
            ensure(is_cuspidal(&rl, &xl).map_err(e)?, || format!("a={a}: cuspidal mod 5"))?;
            ensure(d0 == dl, || format!("{kind} a={a}: distinction differs between rings"))?;
            ensure((x0.dual() == x0) == sd && (xl.dual() == xl) == sd, || format!("{kind} a={a}: self-duality"))?;
            ensure(!dl || sd, || format!("{kind} a={a}: distinguished but not self-dual"))?;
            ensure(!(sc && sd) || dl, || format!("{kind} a={a}: self-dual supercuspidal not distinguished"))?;
            rows += 1;
        }
    }
    Ok(format!("{} gammas reduced to F_25, {rows} distinction rows", zero.len()))
}

fn c9() -> Outcome {
    let mut parts = Vec::new();
    for q in [3u64, 5] {
        let pr = pair(&format!("twisted:m=1,q={q}"));
        let rep = doublecoset_inversion_check(&pr, &Budget::default()).map_err(e)?;
        ensure(rep.all_stable && rep.total == pr.gl.order(), || format!("q={q} double cosets"))?;
        parts.push(format!("q={q}: {} cosets", rep.count));
        let r = Cyclo::new(lcm(q, q * q - 1)).map_err(e)?;
        for kind in ["linear", "twisted"] {
            let pr = pair(&format!("{kind}:m=1,q={q}"));
            for &a in &cuspidal_orbit_reps(q) {
                let (_, _, chi) = cusp_char(&r, &pr.gl, a);
                if hom_dim(&r, &chi, &pr.h).map_err(e)? == r.one() {
                    ensure(chi.dual() == chi, || format!("{kind} q={q} a={a} not self-dual"))?;
                }
            }
        }
    }
    Ok(parts.join(", ") + ", distinguished cuspidals self-dual")
}

fn c10() -> Outcome {
    let g = gl(3, &[1], 1, 1);
    let r = Cyclo::new(12).map_err(e)?;
    let psi = AddChar::standard(g.tower.clone(), 1).map_err(e)?;
    let conv = algebra_sqrt(&r, &g.alg).map_err(e)?;
    let triv = trivial_character(&r, g.clone());
    let gm = gamma_via_trace(&r, &triv, &psi, &conv).map_err(e)?;
    ensure(gm == r.neg(&r.inv(&r.sqrt_p(3).map_err(e)?).map_err(e)?), || "gamma(1)".into())?;
    let model = gjfe::reps::Gl1Model::new(g.clone(), MultChar::trivial(g.tower.clone(), 1).map_err(e)?, 12).map_err(e)?;
    let rep = gjfe_operator_check(&r, &model, &gm, &psi, &conv, true, EX).map_err(e)?;
    ensure(rep.weak && rep.strong == Some(false) && rep.counterexample.map(|c| c.0) == Some(0), || {
        format!("trivial GL_1(F_3): weak {} strong {:?} at {:?}", rep.weak, rep.strong, rep.counterexample)
    })?;
    ensure(trace_fe_witness(&r, &triv, &gm, &psi, &conv, false, EX).map_err(e)?.is_none(), || "weak witness".into())?;
    let mut cusp = 0;
    for (p, n) in [(2u32, 24u64), (3, 24)] {
        let g2 = gl(p, &[1, 2], 1, 2);
        let r2 = Cyclo::new(n).map_err(e)?;
        let psi2 = AddChar::standard(g2.tower.clone(), 1).map_err(e)?;
        let conv2 = algebra_sqrt(&r2, &g2.alg).map_err(e)?;
        for &a in &cuspidal_orbit_reps(p as u64) {
            let (_, m, chi) = cusp_char(&r2, &g2, a);
            ensure(inner(&r2, &chi, &chi).map_err(e)? == r2.one(), || "irreducible".into())?;
            let gm = gamma_via_trace(&r2, &chi, &psi2, &conv2).map_err(e)?;
            let rep = gjfe_operator_check(&r2, &m, &gm, &psi2, &conv2, true, EX).map_err(e)?;
            ensure(rep.strong == Some(true), || format!("q={p} a={a} strong"))?;
            cusp += 1;
        }
    }
    Ok(format!("trivial GL_1(F_3): strong fails at m=0, weak holds; {cusp} cuspidals strong"))
}

fn main() {
    let start = Instant::now();
    let gal = pair("galois:n=2,p=3");
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("fourier toolkit", Box::new(c1)),
        ("GL_1 equation with correction term", Box::new(c2)),
        ("cuspidal strong equation and Kondo", Box::new(c3)),
        ("multiplicativity", Box::new(c4)),
        ("Galois distinguished gamma", Box::new(|| c5(&gal))),
        ("linear and twisted period signs", Box::new(c6)),
        ("parameter closed forms", Box::new(|| c7(&gal))),
        ("reduction mod 5", Box::new(c8)),
        ("double cosets and self-duality", Box::new(c9)),
        ("strong/weak dichotomy", Box::new(c10)),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let out = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into()))
        });
        let secs = t.elapsed().as_secs_f64();
        match out {
            Ok(msg) => println!("criterion {:>2} PASS  {name}: {msg} [{secs:.1}s]", i + 1),
            Err(msg) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {msg} [{secs:.1}s]", i + 1)
            }
        }
    }
    println!("acceptance: {} of {} passed in {:.1}s", criteria.len() - failed, criteria.len(), start.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
