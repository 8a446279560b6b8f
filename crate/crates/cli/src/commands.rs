use crate::config::{config_err, CliError, FieldSpec, RunConfig};
use gjfe::exec::Exec;
use gjfe::fields::FieldTower;
use gjfe::gamma::{gamma_via_trace, gjfe_operator_check, gl1_fe_full, kondo_gamma, multiplicativity_check};
use gjfe::harmonic::{
    algebra_sqrt, convolve, delta, fourier, pairing, pointwise_mul, poisson_check, random_gfun, AddChar, MultChar,
    Subspace,
};
use gjfe::matspace::Algebra;
use gjfe::pairs::{
    build_pair, distinction_row, doublecoset_inversion_check, group_case_character, PairKind, PairSpec,
    SymmetricPair,
};
use gjfe::params::{
    classify_param, eval_galois_gamma, eval_self_dual_gamma, predict, same_james_class, self_duality_tests,
    st_r_decompose, Monomial, ParamSpec,
};
use gjfe::reps::{
    central_character, character_of, cuspidal_orbit_reps, det_character, induced_character,
    ClassFun, GlGroup, Gl1Model, KirillovModel,
};
use gjfe::scalars::{reduce_mod_ell, required_order, CoeffRing, Cyclo, ModF, RingKind};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use std::sync::Arc;

pub struct Report {
    pub pass: bool,
    pub body: Value,
    pub csv: Option<String>,
}

impl Report {
    fn json(pass: bool, body: Value) -> Report {
        Report { pass, body, csv: None }
    }
}

macro_rules! with_ring {
    ($cfg:expr, $p:expr, $n:expr, |$r:ident| $body:expr) => {
        match $cfg.ring_kind()? {
            RingKind::Cyclo => {
                let owned = Cyclo::new($n)?;
                let $r = &owned;
                $body
            }
            RingKind::ModF { ell } => {
                let owned = gjfe::scalars::modf_ring(ell, $p as u64, $n).map_err(|e| config_err(e.to_string()))?;
                let $r = &*owned;
                $body
            }
        }
    };
}

fn tower(p: u32, degs: &[u32]) -> Result<Arc<FieldTower>, CliError> {
    let mut d = degs.to_vec();
    d.sort_unstable();
    d.dedup();
    Ok(Arc::new(FieldTower::build(p, &d)?))
}

fn s<R: CoeffRing>(ring: &R, x: &R::E) -> Value {
    ring.to_json(x)
}

/// Human-readable form when the value is `±q^{k/2}`.
fn pretty<R: CoeffRing>(ring: &R, x: &R::E, p: u64, d: u32) -> Option<String> {
    for half in -8..=8 {
        for sign in [1i8, -1] {
            let m = Monomial { sign, half };
            if m.to_ring(ring, p, d).ok().as_ref() == Some(x) {
                return Some(m.pretty());
            }
        }
    }
    None
}

fn need_sqrt(deg: u32, n: usize) -> bool {
    (deg as usize * n * n) % 2 == 1
}

fn rng(cfg: &RunConfig) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(cfg.seed)
}

fn random_unit(rng: &mut ChaCha8Rng, alg: &Algebra) -> Vec<u32> {
    use rand::Rng;
    loop {
        let x = alg.decode(rng.gen_range(0..alg.size() as u32));
        if alg.inverse(&x).is_some() {
            return x;
        }
    }
}

pub fn verify_fourier(cfg: &RunConfig, _exec: Exec) -> Result<Report, CliError> {
    let fs = cfg.field_spec()?;
    let n = required_order(fs.p as u64, &[], need_sqrt(fs.deg, fs.n));
    with_ring!(cfg, fs.p, n, |r| fourier_suite(r, cfg, fs, _exec))
}

fn fourier_suite<R: CoeffRing>(ring: &R, cfg: &RunConfig, fs: FieldSpec, exec: Exec) -> Result<Report, CliError> {
    let half = fs.deg.is_multiple_of(2).then_some(fs.deg / 2);
    let t = tower(fs.p, &[1, half.unwrap_or(1), fs.deg])?;
    let alg = Algebra::matrices(t.clone(), fs.deg, fs.n, &cfg.budget())?;
    let psi = AddChar::standard(t.clone(), fs.deg)?;
    let conv = algebra_sqrt(ring, &alg)?;
    let mut rng = rng(cfg);
    let (mut inv_ok, mut conv_ok, mut pars_ok) = (0, 0, 0);
    for _ in 0..cfg.trials {
        let f = random_gfun(ring, alg.clone(), &mut rng, 3);
        let g = random_gfun(ring, alg.clone(), &mut rng, 3);
        let ff = fourier(ring, &f, &psi, &conv, exec)?;
        inv_ok += (fourier(ring, &ff, &psi.inverse(), &conv, exec)? == f) as usize;
        let c = convolve(ring, &f, &g, &conv, exec)?;
        let fg = fourier(ring, &g, &psi, &conv, exec)?;
        conv_ok += (fourier(ring, &c, &psi, &conv, exec)? == pointwise_mul(ring, &ff, &fg)?) as usize;
        let gi = fourier(ring, &g, &psi.inverse(), &conv, exec)?;
        pars_ok += (pairing(ring, &f, &g)? == pairing(ring, &ff, &gi)?) as usize;
    }
    let dim = alg.size_exponent() as usize;
    let mut poisson_ok = 0;
    for k in 0..cfg.trials {
        let h = Subspace::random(alg.clone(), &mut rng, k % (dim + 1));
        let f = random_gfun(ring, alg.clone(), &mut rng, 3);
        let x = random_unit(&mut rng, &alg);
        poisson_ok += poisson_check(ring, &f, &h, &x, &psi, &conv, exec)?.equal as usize;
    }
    let mut galois = Value::Null;
    let mut galois_ok = true;
    if let Some(h0) = half {
        let gens: Vec<Vec<u32>> = (0..alg.entries())
            .map(|k| {
                let mut e = alg.zero();
                e[k] = 1;
                e
            })
            .collect();
        let hh = Subspace::base_span(alg.clone(), h0, &gens)?;
        let psi0 = AddChar::standard(t.clone(), h0)?.lift(fs.deg)?;
        let dl = t.trace_zero_element(fs.deg, h0)?;
        let perp_ok = hh.perp(&psi0)?.members() == hh.left_translate(&alg.scalar(dl.code)).as_slice();
        let mut ok = 0;
        for _ in 0..cfg.trials.min(5) {
            let f = random_gfun(ring, alg.clone(), &mut rng, 3);
            let x = random_unit(&mut rng, &alg);
            ok += poisson_check(ring, &f, &hh, &x, &psi0, &conv, exec)?.equal as usize;
        }
        galois_ok = perp_ok && ok == cfg.trials.min(5);
        galois = json!({"subspace_size": hh.len(), "perp_is_delta_translate": perp_ok, "poisson_pass": ok});
    }
    let t_ = cfg.trials;
    let pass = inv_ok == t_ && conv_ok == t_ && pars_ok == t_ && poisson_ok == t_ && galois_ok;
    Ok(Report::json(
        pass,
        json!({
            "field": fs.to_spec_string(),
            "ring": ring.describe(),
            "trials": t_,
            "inversion_pass": inv_ok,
            "convolution_pass": conv_ok,
            "parseval_pass": pars_ok,
            "poisson_random_subspaces_pass": poisson_ok,
            "poisson_fixed_points": galois,
        }),
    ))
}

pub fn verify_gl1(cfg: &RunConfig, exec: Exec) -> Result<Report, CliError> {
    let fs = cfg.field_spec()?;
    if fs.n != 1 {
        return Err(config_err("verify-gl1 needs n=1"));
    }
    let q = fs.q();
    let n = required_order(fs.p as u64, &[q - 1], need_sqrt(fs.deg, 1));
    with_ring!(cfg, fs.p, n, |r| gl1_suite(r, cfg, fs, exec))
}

fn gl1_suite<R: CoeffRing>(ring: &R, cfg: &RunConfig, fs: FieldSpec, exec: Exec) -> Result<Report, CliError> {
    let t = tower(fs.p, &[1, fs.deg])?;
    let gl = GlGroup::new(t.clone(), fs.deg, 1, &cfg.budget(), exec)?;
    let psi = AddChar::standard(t.clone(), fs.deg)?;
    let conv = algebra_sqrt(ring, &gl.alg)?;
    let q = fs.q();
    let ell = ring.characteristic();
    let mut rows = Vec::new();
    let mut pass = true;
    for a in 0..(q - 1) {
        let xi = MultChar::new(t.clone(), fs.deg, a as i64)?;
        let mut full = 0;
        for m in gl.alg.codes() {
            full += gl1_fe_full(ring, &xi, &delta(ring, gl.alg.clone(), m), &psi, &conv)?.equal as usize;
        }
        let gm = kondo_gamma(ring, &xi, 1, &psi)?;
        let model = Gl1Model::new(gl.clone(), xi, ring.order())?;
        let rep = gjfe_operator_check(ring, &model, &gm, &psi, &conv, true, exec)?;
        let predicted_strong = a != 0 || (ell != 0 && (q - 1).is_multiple_of(ell));
        let ok = full == q as usize && rep.weak && rep.strong == Some(predicted_strong) && rep.extracted == gm;
        pass &= ok;
        rows.push(json!({
            "xi_exponent": a,
            "gamma": s(ring, &gm),
            "pretty": pretty(ring, &gm, fs.p as u64, fs.deg),
            "full_equation_pass": full,
            "weak": rep.weak,
            "strong": rep.strong,
            "predicted_strong": predicted_strong,
            "counterexample": rep.counterexample,
            "ok": ok,
        }));
    }
    Ok(Report::json(pass, json!({"group": gl.label(), "ring": ring.describe(), "characters": rows})))
}

pub fn verify_cuspidal(cfg: &RunConfig, exec: Exec) -> Result<Report, CliError> {
    let fs = cfg.field_spec()?;
    if fs.n != 2 {
        return Err(config_err("verify-cuspidal-gjfe needs n=2"));
    }
    let q = fs.q();
    let n = required_order(fs.p as u64, &[q * q - 1], false);
    with_ring!(cfg, fs.p, n, |r| cuspidal_suite(r, cfg, fs, exec))
}

fn gl2(cfg: &RunConfig, fs: FieldSpec, exec: Exec) -> Result<Arc<GlGroup>, CliError> {
    let t = tower(fs.p, &[1, fs.deg, 2 * fs.deg])?;
    Ok(GlGroup::new(t, fs.deg, 2, &cfg.budget(), exec)?)
}

fn cuspidal_suite<R: CoeffRing>(ring: &R, cfg: &RunConfig, fs: FieldSpec, exec: Exec) -> Result<Report, CliError> {
    let gl = gl2(cfg, fs, exec)?;
    let psi = AddChar::standard(gl.tower.clone(), fs.deg)?;
    let conv = algebra_sqrt(ring, &gl.alg)?;
    let mut rows = Vec::new();
    let mut pass = true;
    for a in cuspidal_orbit_reps(fs.q()) {
        let xi = MultChar::new(gl.tower.clone(), 2 * fs.deg, a as i64)?;
        let model = KirillovModel::new(gl.clone(), xi.clone(), ring.order())?;
        let kondo = kondo_gamma(ring, &xi, 2, &psi)?;
        let trace = character_of(ring, &model, exec)
            .ok()
            .and_then(|chi| gamma_via_trace(ring, &chi, &psi, &conv).ok());
        let rep = gjfe_operator_check(ring, &model, &kondo, &psi, &conv, true, exec)?;
        let ok = rep.strong == Some(true) && rep.scalar && rep.extracted == kondo && trace.as_ref().is_none_or(|t| *t == kondo);
        pass &= ok;
        rows.push(json!({
            "rep_label": rep.label,
            "xi_exponent": a,
            "gamma_extracted": s(ring, &rep.extracted),
            "gamma_trace": trace.as_ref().map(|t| s(ring, t)),
            "kondo_gamma": s(ring, &kondo),
            "pretty": pretty(ring, &kondo, fs.p as u64, fs.deg),
            "scalar": rep.scalar,
            "weak": rep.weak,
            "strong": rep.strong,
            "checked": rep.checked,
            "counterexample": rep.counterexample,
            "ok": ok,
        }));
    }
    Ok(Report::json(pass, json!({"group": gl.label(), "ring": ring.describe(), "basis_reduced": true, "cuspidals": rows})))
}

pub fn verify_multiplicativity(cfg: &RunConfig, exec: Exec) -> Result<Report, CliError> {
    let fs = cfg.field_spec()?;
    if !(2..=3).contains(&fs.n) {
        return Err(config_err("verify-multiplicativity needs n=2 or n=3"));
    }
    let q = fs.q();
    let n = required_order(fs.p as u64, &[q * q - 1, q - 1], fs.deg % 2 == 1);
    with_ring!(cfg, fs.p, n, |r| mult_suite(r, cfg, fs, exec))
}

fn mult_suite<R: CoeffRing>(ring: &R, cfg: &RunConfig, fs: FieldSpec, exec: Exec) -> Result<Report, CliError> {
    let t = tower(fs.p, &[1, fs.deg, 2 * fs.deg])?;
    let b = cfg.budget();
    let g = GlGroup::new(t.clone(), fs.deg, fs.n, &b, exec)?;
    let g1 = GlGroup::new(t.clone(), fs.deg, 1, &b, exec)?;
    let psi = AddChar::standard(t.clone(), fs.deg)?;
    let conv = algebra_sqrt(ring, &g.alg)?;
    let q = fs.q();
    let lin: Vec<(MultChar, ClassFun<R::E>, R::E)> = (0..q - 1)
        .map(|k| -> Result<_, CliError> {
            let xi = MultChar::new(t.clone(), fs.deg, k as i64)?;
            let chi = det_character(ring, g1.clone(), &xi)?;
            let gm = kondo_gamma(ring, &xi, 1, &psi)?;
            Ok((xi, chi, gm))
        })
        .collect::<Result<_, _>>()?;
    let mut rows = Vec::new();
    let mut pass = true;
    let mut push = |label: String, levi: &[R::E], chi: &ClassFun<R::E>| -> Result<(), CliError> {
        let rep = multiplicativity_check(ring, levi, chi, &psi, &conv)?;
        pass &= rep.equal;
        rows.push(json!({
            "rep_label": label,
            "gamma": s(ring, &rep.gamma),
            "product": s(ring, &rep.product),
            "pretty": pretty(ring, &rep.gamma, fs.p as u64, fs.deg),
            "equal": rep.equal,
        }));
        Ok(())
    };
    if fs.n == 2 {
        for i in 0..lin.len() {
            for j in (i + 1)..lin.len() {
                let ind = induced_character(ring, g.clone(), &[&lin[i].1, &lin[j].1], &b, exec)?;
                push(format!("ps({i},{j})"), &[lin[i].2.clone(), lin[j].2.clone()], &ind)?;
            }
        }
        for (k, (xi, chi, gm)) in lin.iter().enumerate() {
            let ind = induced_character(ring, g.clone(), &[chi, chi], &b, exec)?;
            let one_dim = det_character(ring, g.clone(), xi)?;
            let st = ind.zip(&one_dim, |a, c| ring.sub(a, c))?;
            push(format!("st x xi^{k}"), &[gm.clone(), gm.clone()], &st)?;
        }
    } else {
        let g2 = GlGroup::new(t.clone(), fs.deg, 2, &b, exec)?;
        for a in cuspidal_orbit_reps(q) {
            let xi = MultChar::new(t.clone(), 2 * fs.deg, a as i64)?;
            let cusp = character_of(ring, &KirillovModel::new(g2.clone(), xi.clone(), ring.order())?, exec)?;
            let gc = kondo_gamma(ring, &xi, 2, &psi)?;
            for (k, (_, chi, gm)) in lin.iter().enumerate() {
                let ind = induced_character(ring, g.clone(), &[&cusp, chi], &b, exec)?;
                push(format!("cusp({a}) x xi^{k}"), &[gc.clone(), gm.clone()], &ind)?;
            }
        }
    }
    Ok(Report::json(pass, json!({"group": g.label(), "ring": ring.describe(), "rows": rows})))
}

struct TableRow {
    group: String,
    label: String,
    a: u64,
    twist: u32,
    gamma: Value,
    kondo: Value,
    matched: bool,
    predicted: Option<String>,
    pretty: Option<String>,
    omega_delta: Option<Value>,
}

pub fn gamma_table(cfg: &RunConfig, exec: Exec, twists: bool) -> Result<Report, CliError> {
    let pairs = cfg.pair_specs()?;
    if let Some(ps) = pairs.first() {
        let q = ps.p.pow(ps.d) as u64;
        let orders = [q * q - 1, q - 1];
        let n = required_order(ps.p as u64, &orders, false);
        return with_ring!(cfg, ps.p, n, |r| table_rows(r, cfg, None, Some(ps), exec, twists));
    }
    let fs = cfg.field_spec()?;
    if fs.n > 2 {
        return Err(config_err("gamma-table needs n=1 or n=2"));
    }
    let q = fs.q();
    let n = required_order(fs.p as u64, &[q * q - 1], need_sqrt(fs.deg, fs.n));
    with_ring!(cfg, fs.p, n, |r| table_rows(r, cfg, Some(fs), None, exec, twists))
}

fn table_rows<R: CoeffRing>(
    ring: &R,
    cfg: &RunConfig,
    fs: Option<FieldSpec>,
    ps: Option<&PairSpec>,
    exec: Exec,
    twists: bool,
) -> Result<Report, CliError> {
    let pair = match ps {
        Some(ps) => Some(build_pair(ps, &cfg.budget(), exec)?),
        None => None,
    };
    let (gl, psi, conv) = match &pair {
        Some(pr) => {
            if pr.spec.kind == PairKind::GroupCase || pr.gl.n > 2 {
                return Err(config_err("gamma-table pairs must have a single GL_1 or GL_2 factor"));
            }
            (pr.gl.clone(), pr.psi.clone(), pr.sqrt_convention(ring)?)
        }
        None => {
            let fs = fs.unwrap();
            let t = tower(fs.p, &[1, fs.deg, 2 * fs.deg])?;
            let gl = GlGroup::new(t.clone(), fs.deg, fs.n, &cfg.budget(), exec)?;
            let conv = algebra_sqrt(ring, &gl.alg)?;
            (gl, AddChar::standard(t, fs.deg)?, conv)
        }
    };
    let p = gl.tower.p() as u64;
    let (d, nn) = (gl.deg, gl.n as u32);
    let q = p.pow(d);
    let delta_el = pair.as_ref().and_then(|pr| pr.delta);
    let field = gl.field();
    let ts: Vec<u32> = if twists { field.units().collect() } else { vec![1] };
    let reps: Vec<u64> = if nn == 1 { (0..q - 1).collect() } else { cuspidal_orbit_reps(q) };
    let mut rows = Vec::new();
    for a in reps {
        let xi = MultChar::new(gl.tower.clone(), nn * d, a as i64)?;
        let (label, chi) = if nn == 1 {
            (format!("char(q={q},xi={a})"), det_character(ring, gl.clone(), &xi)?)
        } else {
            let m = KirillovModel::new(gl.clone(), xi.clone(), ring.order())?;
            (gjfe::reps::RootRep::label(&m), character_of(ring, &m, exec)?)
        };
        let param = classify_param(ParamSpec { q, n: nn, a }, None);
        let predicted = if p % 2 == 1 && nn == 2 && self_duality_tests(&param).self_dual {
            eval_self_dual_gamma(&param).ok().map(|v| v.value.pretty())
        } else if nn == 1 && a == 0 {
            Some(Monomial::gamma_trivial().pretty())
        } else {
            None
        };
        for &t in &ts {
            let psi_t = psi.twist(t);
            let gm = gamma_via_trace(ring, &chi, &psi_t, &conv)?;
            let kd = kondo_gamma(ring, &xi, nn, &psi_t)?;
            let omega_delta = match delta_el {
                Some(dl) => Some(json!({
                    "omega": s(ring, &central_character(ring, &chi, dl.code)?),
                    "xi_delta": s(ring, &eval_galois_gamma(ring, &xi, dl)?),
                })),
                None => None,
            };
            rows.push(TableRow {
                group: gl.label(),
                label: label.clone(),
                a,
                twist: t,
                matched: gm == kd,
                pretty: pretty(ring, &gm, p, d),
                gamma: s(ring, &gm),
                kondo: s(ring, &kd),
                predicted: predicted.clone(),
                omega_delta,
            });
        }
    }
    let mut w = csv_writer();
    for r in &rows {
        w.write_record([
            r.group.clone(),
            r.label.clone(),
            r.a.to_string(),
            r.twist.to_string(),
            r.gamma.to_string(),
            r.kondo.to_string(),
            r.matched.to_string(),
            r.predicted.clone().unwrap_or_default(),
            r.pretty.clone().unwrap_or_default(),
            r.omega_delta.as_ref().map(|v| v.to_string()).unwrap_or_default(),
        ])?;
    }
    let csv = String::from_utf8(w.into_inner().map_err(|e| CliError::Compute(e.to_string()))?)
        .map_err(|e| CliError::Compute(e.to_string()))?;
    let pass = rows.iter().all(|r| r.matched);
    Ok(Report {
        pass,
        body: json!({"group": gl.label(), "ring": ring.describe(), "rows": rows.len(), "all_match": pass}),
        csv: Some(csv),
    })
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "group",
        "rep_label",
        "xi_exponent",
        "psi_twist",
        "gamma",
        "kondo_gamma",
        "match_flag",
        "predicted",
        "pretty",
        "omega_delta",
    ])
    .expect("in-memory write");
    w
}

pub fn distinction(cfg: &RunConfig, exec: Exec) -> Result<Report, CliError> {
    let pairs = cfg.pair_specs()?;
    if pairs.is_empty() {
        return Err(config_err("--pair is required"));
    }
    let mut pass = true;
    let mut out = Vec::new();
    for ps in &pairs {
        let q = ps.p.pow(ps.d) as u64;
        let n = required_order(ps.p as u64, &[q * q - 1, q - 1], false);
        let rep = with_ring!(cfg, ps.p, n, |r| distinction_one(r, cfg, ps, exec))?;
        pass &= rep.pass;
        out.push(rep.body);
    }
    Ok(Report::json(pass, json!({"pairs": out})))
}

fn pair_reps<R: CoeffRing>(
    ring: &R,
    pr: &SymmetricPair,
    exec: Exec,
) -> Result<Vec<(String, u64, ClassFun<R::E>)>, CliError> {
    let small = if pr.spec.kind == PairKind::GroupCase {
        GlGroup::new(pr.gl.tower.clone(), pr.gl.deg, pr.spec.n, &gjfe::matspace::Budget::default(), exec)?
    } else {
        pr.gl.clone()
    };
    let q = (small.tower.p() as u64).pow(small.deg);
    let mut out = Vec::new();
    match small.n {
        1 => {
            for a in 0..q - 1 {
                let xi = MultChar::new(small.tower.clone(), small.deg, a as i64)?;
                out.push((format!("char(q={q},xi={a})"), a, det_character(ring, small.clone(), &xi)?));
            }
        }
        2 => {
            for a in cuspidal_orbit_reps(q) {
                let xi = MultChar::new(small.tower.clone(), 2 * small.deg, a as i64)?;
                let m = KirillovModel::new(small.clone(), xi, ring.order())?;
                out.push((gjfe::reps::RootRep::label(&m), a, character_of(ring, &m, exec)?));
            }
        }
        _ => return Err(config_err("models exist for n <= 2 only")),
    }
    if pr.spec.kind == PairKind::GroupCase {
        out = out
            .into_iter()
            .map(|(l, a, c)| Ok((format!("{l} x dual"), a, group_case_character(pr, &c, ring)?)))
            .collect::<Result<_, CliError>>()?;
    }
    Ok(out)
}

fn distinction_one<R: CoeffRing>(ring: &R, cfg: &RunConfig, ps: &PairSpec, exec: Exec) -> Result<Report, CliError> {
    let pr = build_pair(ps, &cfg.budget(), exec)?;
    let ell = match ring.characteristic() {
        0 => None,
        l => Some(l),
    };
    let q = (ps.p as u64).pow(ps.d);
    let n_small = if ps.kind == PairKind::GroupCase { ps.n } else { pr.gl.n } as u32;
    let mut rows = Vec::new();
    let mut pass = true;
    for (label, a, chi) in pair_reps(ring, &pr, exec)? {
        let row = distinction_row(ring, &pr, &label, &chi)?;
        let param = classify_param(ParamSpec { q, n: n_small, a }, ell);
        let flags = self_duality_tests(&param);
        let supercuspidal = param.modular.as_ref().map(|m| m.supercuspidal).unwrap_or(param.regular || n_small == 1);
        let sign_rule_applies = !(n_small == 1 && a == 0);
        let sign_ok = !row.distinguished || !sign_rule_applies || row.sign_matches == Some(true);
        let cross_ok = match ps.kind {
            PairKind::GroupCase => row.distinguished,
            PairKind::Galois => {
                let ssd = flags.sigma_self_dual.unwrap_or(false);
                (!row.distinguished || ssd) && (!(supercuspidal && ssd) || row.distinguished)
            }
            PairKind::Linear | PairKind::TwistedLinear => {
                (!row.distinguished || flags.self_dual) && (!(supercuspidal && flags.self_dual) || row.distinguished)
            }
        };
        pass &= sign_ok && cross_ok;
        rows.push(json!({
            "rep_label": label,
            "xi_exponent": a,
            "hom_dim": s(ring, &row.hom_dim),
            "distinguished": row.distinguished,
            "period_sign": row.period_sign.as_ref().map(|x| s(ring, x)),
            "gamma": s(ring, &row.gamma),
            "pretty": pretty(ring, &row.gamma, ps.p as u64, ps.d),
            "sign_matches": row.sign_matches,
            "sign_rule_applies": sign_rule_applies,
            "self_dual": flags.self_dual,
            "sigma_self_dual": flags.sigma_self_dual,
            "supercuspidal": supercuspidal,
            "cross_table_ok": cross_ok,
        }));
    }
    Ok(Report::json(
        pass,
        json!({
            "pair": ps.to_spec_string(),
            "group": pr.gl.label(),
            "ring": ring.describe(),
            "h_size": pr.h.len(),
            "rows": rows,
        }),
    ))
}

pub fn double_cosets(cfg: &RunConfig, exec: Exec) -> Result<Report, CliError> {
    let pairs = cfg.pair_specs()?;
    if pairs.is_empty() {
        return Err(config_err("--pair is required"));
    }
    let mut pass = true;
    let mut out = Vec::new();
    for ps in &pairs {
        let pr = build_pair(ps, &cfg.budget(), exec)?;
        let rep = doublecoset_inversion_check(&pr, &cfg.budget())?;
        pass &= rep.all_stable;
        out.push(serde_json::to_value(&rep).map_err(|e| CliError::Compute(e.to_string()))?);
    }
    Ok(Report::json(pass, json!({"pairs": out})))
}

pub fn verify_modular(cfg: &RunConfig, exec: Exec) -> Result<Report, CliError> {
    let fs = cfg.field_spec()?;
    let RingKind::ModF { ell } = cfg.ring_kind()? else {
        return Err(config_err("verify-modular needs --ring modf:l=..."));
    };
    if ell == fs.p as u64 {
        return Err(config_err("l must differ from p"));
    }
    if fs.n > 2 {
        return Err(config_err("verify-modular needs n=1 or n=2"));
    }
    let q = fs.q();
    let orders = if fs.n == 1 { vec![q - 1] } else { vec![q * q - 1] };
    let n = required_order(fs.p as u64, &orders, need_sqrt(fs.deg, fs.n));
    let zero = Cyclo::new(n)?;
    let modl = gjfe::scalars::modf_ring(ell, fs.p as u64, n).map_err(|e| config_err(e.to_string()))?;
    let t = tower(fs.p, &[1, fs.deg, 2 * fs.deg])?;
    let gl = GlGroup::new(t.clone(), fs.deg, fs.n, &cfg.budget(), exec)?;
    let psi = AddChar::standard(t.clone(), fs.deg)?;
    let c0 = algebra_sqrt(&zero, &gl.alg)?;
    let cl = algebra_sqrt(&*modl, &gl.alg)?;
    let reps: Vec<u64> = if fs.n == 1 { (0..q - 1).collect() } else { cuspidal_orbit_reps(q) };
    let mut rows = Vec::new();
    let mut pass = true;
    for &a in &reps {
        let xi = MultChar::new(t.clone(), fs.n as u32 * fs.deg, a as i64)?;
        let row = modular_row(&zero, &modl, &gl, &xi, fs, &psi, &c0, &cl, exec)?;
        pass &= row["ok"].as_bool().unwrap_or(false);
        rows.push(row);
    }
    let table = james_table(q, fs.n as u32, ell);
    Ok(Report::json(
        pass,
        json!({
            "group": gl.label(),
            "ring_zero": zero.describe(),
            "ring_ell": modl.describe(),
            "rows": rows,
            "james": table,
        }),
    ))
}

#[allow(clippy::too_many_arguments)]
fn modular_row(
    zero: &Cyclo,
    modl: &ModF,
    gl: &Arc<GlGroup>,
    xi: &MultChar,
    fs: FieldSpec,
    psi: &AddChar,
    c0: &gjfe::scalars::SqrtConvention<gjfe::scalars::CycloElem>,
    cl: &gjfe::scalars::SqrtConvention<u32>,
    exec: Exec,
) -> Result<Value, CliError> {
    let nn = fs.n as u32;
    let model: Box<dyn gjfe::reps::RootRep> = if nn == 1 {
        Box::new(Gl1Model::new(gl.clone(), xi.clone(), zero.order())?)
    } else {
        Box::new(KirillovModel::new(gl.clone(), xi.clone(), zero.order())?)
    };
    let chi0 = character_of(zero, model.as_ref(), exec)?;
    let g0 = gamma_via_trace(zero, &chi0, psi, c0)?;
    let reduced = reduce_mod_ell(zero, &g0, modl)?;
    let strong0 = gjfe_operator_check(zero, model.as_ref(), &g0, psi, c0, true, exec)?;
    let native = gjfe_operator_check(modl, model.as_ref(), &reduced, psi, cl, true, exec)?;
    let chil = character_of(modl, model.as_ref(), exec)?;
    let native_trace = gamma_via_trace(modl, &chil, psi, cl).ok();
    let ell = modl.ell();
    let q = fs.q();
    let trivial = xi.is_trivial();
    let predicted0 = !trivial;
    let predicted_l = !trivial || (q - 1).is_multiple_of(ell);
    let ok = native.extracted == reduced
        && native_trace.as_ref().is_none_or(|t| *t == reduced)
        && strong0.strong == Some(predicted0)
        && native.strong == Some(predicted_l);
    Ok(json!({
        "rep_label": model.label(),
        "xi_exponent": xi.exponent_param(),
        "gamma_zero": zero.to_json(&g0),
        "pretty": pretty(zero, &g0, fs.p as u64, fs.deg),
        "gamma_reduced": modl.to_json(&reduced),
        "gamma_native_operator": modl.to_json(&native.extracted),
        "gamma_native_trace": native_trace.as_ref().map(|t| modl.to_json(t)),
        "strong_zero": strong0.strong,
        "strong_ell": native.strong,
        "predicted_strong_ell": predicted_l,
        "ok": ok,
    }))
}

fn james_table(q: u64, n: u32, ell: u64) -> Vec<Value> {
    let m = q.pow(n) - 1;
    let mut seen = vec![false; m as usize];
    let mut params = Vec::new();
    for a in 0..m {
        if seen[a as usize] {
            continue;
        }
        let p = classify_param(ParamSpec { q, n, a }, Some(ell));
        for &b in &p.orbit {
            seen[b as usize] = true;
        }
        if p.regular {
            params.push(p);
        }
    }
    params
        .iter()
        .map(|p| {
            let md = p.modular.as_ref().unwrap();
            let class: Vec<u64> = params.iter().filter(|o| same_james_class(p, o)).map(|o| o.a).collect();
            json!({
                "xi_exponent": p.a,
                "orbit": p.orbit,
                "regular_part": md.regular_part,
                "singular_part": md.singular_part,
                "ell_regular": md.ell_regular,
                "supercuspidal": md.supercuspidal,
                "st_r": st_r_decompose(p).ok(),
                "james_class": class,
            })
        })
        .collect()
}

pub fn predict_cmd(cfg: &RunConfig) -> Result<Report, CliError> {
    let spec = cfg.param_spec()?;
    let ell = match cfg.ring_kind()? {
        RingKind::Cyclo => None,
        RingKind::ModF { ell } => Some(ell),
    };
    let v = predict(spec, ell).map_err(|e| CliError::Compute(e.to_string()))?;
    Ok(Report::json(true, v))
}
