//! Acceptance suite. Every criterion is its own test and prints one line
//! `criterion NN: PASS|FAIL  <detail>`; run with `-- --nocapture` to see them.
//! All comparisons are exact equalities of forms or scalars.

use std::collections::HashMap;
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use g2het::circlefam::{
    self, build_phi_t, heisenberg_display, heisenberg_family, heisenberg_quadratics, lift_solution, n32_su2_field,
    torsion_family,
};
use g2het::exterior::{Coframe, DiffTable, Form};
use g2het::g2core::{instanton_check, metric_from_phi, standard_phi, torsion_forms, G2Structure};
use g2het::gauge::torsion_factor;
use g2het::liecat::{lookup, omega_plus, sasakian_coframe, sigma_minus, sigma_plus, CATALOG};
use g2het::nilansatz::{
    abelian_residual, bianchi_catalog, bianchi_parts, build_phi, catalog_scenario, cayley_rotation, diag3, mat_mul,
    rational_matrix, scale_matrix, sl2_supplement, solve_abelian_pairing, transpose, AbelianPairing,
    CharacteristicCase, Matrix, NilScenario, Signature,
};
use g2het::ring::{rat, ParamSet, Rational, Scalar};
use g2het::sasakian::{
    ansatz_block, build_structure, characteristic_block, composite_bianchi, dt_identity, solve_block_scale,
    solve_instanton_eigenvalues, structure_torsion, unit_pairing_square, BlockSpec, GaugeClass, SasKind,
};
use g2het_cli::expr::{parse_form, Context};
use num_traits::Signed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn verdict(n: u32, ok: bool, detail: impl AsRef<str>) {
    println!("criterion {n:02}: {}  {}", if ok { "PASS" } else { "FAIL" }, detail.as_ref());
    assert!(ok, "criterion {n} failed: {}", detail.as_ref());
}

fn e(d: u64) -> Form {
    Form::e(7, d)
}

fn s(n: i64) -> Scalar {
    Scalar::from_int(n)
}

fn q(n: i64, d: i64) -> Scalar {
    Scalar::from_frac(n, d)
}

fn parse_with(cf: &Coframe, params: &Arc<ParamSet>, src: &str) -> Form {
    let forms = HashMap::new();
    parse_form(src, &Context { coframe: cf, params, forms: &forms }, None).expect("display parses")
}

fn symbolic() -> (Scalar, [Scalar; 3]) {
    let p = ParamSet::builder().free("delta").free("eps1").free("eps2").free("eps3").build().unwrap();
    let v = |n: &str| p.var(n).unwrap();
    (v("delta"), [v("eps1"), v("eps2"), v("eps3")])
}

fn random_rotation(rng: &mut ChaCha8Rng) -> Vec<Vec<Rational>> {
    loop {
        let qv: [i64; 4] = std::array::from_fn(|_| rng.gen_range(-4..=4));
        if qv.iter().any(|&x| x != 0) {
            return cayley_rotation(qv);
        }
    }
}

fn random_rational(rng: &mut ChaCha8Rng) -> Rational {
    rat(rng.gen_range(-6..=6), rng.gen_range(1..=4))
}

fn random_nonzero(rng: &mut ChaCha8Rng) -> Rational {
    loop {
        let r = random_rational(rng);
        if r != rat(0, 1) {
            return r;
        }
    }
}

fn random_form(rng: &mut ChaCha8Rng, dim: usize, k: usize) -> Form {
    let mut f = Form::zero(dim);
    for _ in 0..rng.gen_range(1..=5) {
        let mut idx: Vec<usize> = (0..dim).collect();
        for i in 0..k {
            let j = rng.gen_range(i..dim);
            idx.swap(i, j);
        }
        let mono = Form::mono(dim, &idx[..k]);
        f = f + mono.scale_rat(&random_rational(rng));
    }
    f
}

// ---------------------------------------------------------------------------------------------

#[test]
fn criterion_01_ansatz_metric() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (d, eps) = symbolic();
    let mut bad = Vec::new();
    for k in 0..25 {
        let b = rational_matrix(&random_rotation(&mut rng));
        let sc = NilScenario::new(d.clone(), eps.clone()).with_b(b);
        let phi = build_phi(&sc).expect("ansatz 3-form is definite").phi().clone();
        let g = metric_from_phi(&phi).expect("metric");
        if !(g.is_identity() && g.vol_form() == e(1234567)) {
            bad.push(k);
        }
    }
    verdict(
        1,
        bad.is_empty(),
        format!("25 random rational B in SO(3): identity metric and vol = e1234567; failures {bad:?}"),
    );
}

/// `A+ = delta D B^T` keeps `C = -2 A+ B = -2 delta D` diagonal.
fn rotated_instance(d: &Scalar, eps: &[Scalar; 3], b: Matrix, dm: Matrix) -> NilScenario {
    let aplus = scale_matrix(&mat_mul(&dm, &transpose(&b)), d);
    NilScenario::new(d.clone(), eps.clone()).with_structure(aplus, diag3(eps.clone())).with_b(b)
}

#[test]
fn criterion_02_instanton_and_coclosed() {
    let (d, eps) = symbolic();
    let mut lines = Vec::new();
    let mut ok = true;
    let dm = diag3([s(1), s(2), q(-1, 3)]);
    let instances = [
        ("B = Id", NilScenario::new(d.clone(), eps.clone())),
        ("B = diag(1,-1,-1)", NilScenario::new(d.clone(), eps.clone()).with_b(diag3([s(1), s(-1), s(-1)]))),
        ("B rotated, C diagonal", rotated_instance(&d, &eps, rational_matrix(&cayley_rotation([1, 2, 3, 4])), dm)),
    ];
    for (name, sc) in &instances {
        let st = build_phi(sc).unwrap();
        let curv = sc.curvature().unwrap();
        let fpsi = curv.iter().all(|f| f.wedge(st.psi()).is_zero());
        let dpsi = sc.table().d(st.psi()).unwrap().is_zero();
        ok &= fpsi && dpsi;
        lines.push(format!("{name}: F^psi = 0 {fpsi}, d psi = 0 {dpsi}"));
    }
    let mut pert = NilScenario::new(d.clone(), eps.clone());
    pert.c[1][2] = &pert.c[1][2] + &Scalar::one();
    let st = build_phi(&pert).unwrap();
    let nonzero = pert.curvature().unwrap().iter().any(|f| !f.wedge(st.psi()).is_zero());
    ok &= nonzero;
    lines.push(format!("perturbed C: F^psi != 0 {nonzero}"));
    verdict(2, ok, lines.join("; "));
}

#[test]
fn criterion_03_bianchi_catalog() {
    let sc = catalog_scenario();
    let p = sc.delta.params().expect("symbolic").clone();
    let v = |n: &str| p.var(n).unwrap();
    let (d, e1, e2, e3, a, g, al) = (v("delta"), v("eps1"), v("eps2"), v("eps3"), v("a"), v("gamma"), v("alpha"));
    let eps = [e1.clone(), e2.clone(), e3.clone()];
    let planes = [e(67), -e(57), e(56)];
    let x: Vec<Form> =
        (0..3).map(|i| (&d * &sigma_plus(i + 1) + &eps[i] * &sigma_minus(i + 1)).wedge(&planes[i])).collect();
    let sq = |t: &Scalar| t * t;
    let two_a_1 = a.scale(&rat(2, 1)) + s(1);

    let dt_display = (&d * &two_a_1).scale(&rat(-4, 3)) * (&(&x[0] + &x[1]) + &x[2])
        + ((sq(&d) * (a.scale(&rat(8, 1)) + s(1))).scale(&rat(1, 3)) - sq(&e1) - sq(&e2) - sq(&e3)).scale(&rat(2, 1))
            * e(1234);
    let ff_display = (&d * &al).scale(&rat(-4, 1)) * (&(&g * &x[0] + &a * &x[1]) + &a * &x[2])
        + (&al * (sq(&d) * (&g + s(2)) - &g * sq(&e1) - sq(&e2) - sq(&e3))).scale(&rat(2, 1)) * e(1234);
    let k1 = &two_a_1 - (&al * &g).scale(&rat(3, 1));
    let k2 = &two_a_1 - (&al * &a).scale(&rat(3, 1));
    let bans = (sq(&d) * (a.scale(&rat(8, 1)) + s(1) - (&al * (&g + s(2))).scale(&rat(3, 1))).scale(&rat(1, 3))
        - sq(&e1) * (s(1) - &g * &al)
        - (sq(&e2) + sq(&e3)) * (s(1) - al.clone()))
    .scale(&rat(2, 1))
        * e(1234)
        - d.scale(&rat(4, 3))
            * (&k1 * (&(&d + &e1) * &e(1367) + &(&e1 - &d) * &e(2467))
                + &k2
                    * (&(&(&(&e2 - &d) * &-e(1457) + &(-(&d + &e2)) * &-e(2357)) + &(&d + &e3) * &e(1256))
                        + &(&d - &e3) * &e(3456)));
    let simplified = ((a.clone() - s(1)).scale(&rat(2, 3))
        * ((a.scale(&rat(2, 1)) + s(6)) * sq(&d) + sq(&e1).scale(&rat(2, 1)) - &a * &(sq(&e2) + sq(&e3))))
        * e(1234);

    let (gi, ai) = (p.index("gamma").unwrap(), p.index("alpha").unwrap());
    // alpha = (2a+1)/(3a) = a(2a+1)/3 because a^2 = 1.
    let alpha_val = (&a * &two_a_1).scale(&rat(1, 3));
    let at_branch = |f: &Form| f.map_coeffs(|c| c.substitute(gi, &a).substitute(ai, &alpha_val));

    let parts = bianchi_catalog().unwrap();
    let dt_ok = parts.dt == dt_display;
    let ff_ok = parts.ff == ff_display;
    let bans_ok = parts.residual == bans;
    let simp_ok = at_branch(&parts.residual) == simplified && at_branch(&bans) == simplified;
    verdict(
        3,
        dt_ok && ff_ok && bans_ok && simp_ok,
        format!("dT display {dt_ok}; <F^F> display {ff_ok}; difference display {bans_ok}; simplified at (a, (2a+1)/(3a)) {simp_ok}"),
    );
}

#[test]
fn criterion_04_abelian_pairings() {
    let one = || s(1);
    let zero = || s(0);
    let mut ok = true;
    let mut lines = Vec::new();
    for eps in [[one(), zero(), zero()], [one(), one(), zero()], [one(), one(), one()]] {
        let mut row = Vec::new();
        for sig in Signature::all() {
            let res = solve_abelian_pairing(&eps, sig).unwrap();
            let good = match (&res, sig) {
                (AbelianPairing::Impossible { witness }, Signature::NegDef) => !witness.is_empty(),
                (AbelianPairing::Pairing(p), sig) if sig != Signature::NegDef => {
                    let neg = p.iter().filter(|x| x.is_negative()).count();
                    let nonzero = p.iter().all(|x| *x != rat(0, 1));
                    nonzero && neg == sig.negative_count() && abelian_residual(&eps, p).unwrap().is_zero()
                }
                _ => false,
            };
            ok &= good;
            row.push(format!("{sig} {good}"));
        }
        let shown: Vec<String> = eps.iter().map(Scalar::render).collect();
        lines.push(format!("eps=({}): {}", shown.join(","), row.join(", ")));
    }
    verdict(4, ok, lines.join("; "));
}

#[test]
fn criterion_05_su2_and_sl2_u1() {
    let (d, eps) = symbolic();
    let su2 = bianchi_parts(&NilScenario::su2(d.clone(), eps.clone())).unwrap().residual.is_zero();
    let qf =
        (&d * &d).scale(&rat(4, 1)) + (&eps[0] * &eps[0]).scale(&rat(2, 1)) + &eps[1] * &eps[1] + &eps[2] * &eps[2];
    let sup = sl2_supplement(&NilScenario::sl2(d, eps)).unwrap();
    let with = sup.residual.is_zero();
    let y0 = sup.y0_squared == qf.scale(&rat(2, 3));
    // The simplified difference at a = -1.
    let without = sup.residual_without == qf.scale(&rat(-4, 3)) * e(1234);
    verdict(
        5,
        su2 && with && y0 && without,
        format!(
            "SU(2) residual 0 {su2}; U(1) x SL(2,R) residual 0 {with}; |Y0|^2 = {} {y0}; without U(1): {} {without}",
            sup.y0_squared.render(),
            sup.residual_without.render_std()
        ),
    );
}

#[test]
fn criterion_06_matrix_connections() {
    let mut ok = true;
    let mut lines = Vec::new();
    for c in [CharacteristicCase::RN32, CharacteristicCase::HH] {
        let r = c.check().unwrap();
        ok &= r.skew && r.preserves_phi && r.torsion_matches && r.curvature_instanton;
        lines.push(format!(
            "{c:?}: skew {}, nabla phi = 0 {}, torsion {}, instanton {}",
            r.skew, r.preserves_phi, r.torsion_matches, r.curvature_instanton
        ));
    }
    lines.push(format!("torsion factor {}", torsion_factor()));
    verdict(6, ok, lines.join("; "));
}

#[test]
fn criterion_07_instanton_eigenvalues() {
    let r = |n, d| rat(n, d);
    let stated = [
        (SasKind::Ts, [r(-6, 1), r(-6, 1), r(2, 1)], GaugeClass::Sl2),
        (SasKind::Np, [r(-6, 5), r(-6, 5), r(-6, 5)], GaugeClass::Su2),
        (SasKind::TsHat, [r(2, 1), r(2, 1), r(2, 1)], GaugeClass::Su2),
        (SasKind::NpHat, [r(14, 5), r(14, 5), r(6, 5)], GaugeClass::Su2),
    ];
    let mut ok = true;
    let mut lines = Vec::new();
    for (kind, lambda, class) in stated {
        let sol = solve_instanton_eigenvalues(kind).unwrap();
        let good = sol.lambda == lambda && sol.class == class;
        ok &= good;
        let got: Vec<String> = sol.lambda.iter().map(|x| x.to_string()).collect();
        lines.push(format!("{kind}: ({}) {} {good}", got.join(", "), sol.class));
    }
    verdict(7, ok, lines.join("; "));
}

#[test]
fn criterion_08_sasakian_identities() {
    let cf = sasakian_coframe();
    let none = ParamSet::empty();
    let mut ok = true;
    let mut lines = Vec::new();
    for kind in [SasKind::Ts, SasKind::Np] {
        let (st, _, t) = structure_torsion(kind).unwrap();
        let good = t == st.phi().scale_rat(&rat(2, 3));
        ok &= good;
        lines.push(format!("T_{kind} = 2/3 phi {good}"));
    }
    let ts = build_structure(SasKind::Ts).unwrap();
    let np = build_structure(SasKind::Np).unwrap();
    let ratio = np.metric().vol_coeff().as_rational().unwrap() / ts.metric().vol_coeff().as_rational().unwrap();
    let vol_ok = ratio == rat(-2187, 25);
    ok &= vol_ok;
    lines.push(format!("vol_np/vol_ts = {ratio} (stated -2187/25) {vol_ok}"));
    let psi = parse_with(&cf, &none, "81/50*w1p^w1p - 81/125*e6^e7^w1p + 81/125*e5^e7^w2p - 81/125*e5^e6^w3p");
    let psi_ok = np.psi() == &psi;
    ok &= psi_ok;
    lines.push(format!("psi_np display {psi_ok}"));
    let w1sq = omega_plus(1).wedge(&omega_plus(1));
    let ts_ff =
        unit_pairing_square(SasKind::Ts).unwrap() == ts.psi().scale_rat(&rat(-16, 1)) + w1sq.scale_rat(&rat(20, 1));
    let np_ff =
        unit_pairing_square(SasKind::Np).unwrap() == np.psi().scale_rat(&rat(-400, 81)) + w1sq.scale_rat(&rat(20, 1));
    ok &= ts_ff && np_ff;
    lines.push(format!("r<F_ts^F_ts> {ts_ff}; r<F_np^F_np> {np_ff}"));
    let p = ParamSet::builder().free("t").build().unwrap();
    let t = p.var("t").unwrap();
    let fam = [SasKind::Ts, SasKind::Np].iter().all(|&k| dt_identity(k, &t, &s(1)).unwrap().is_zero());
    ok &= fam;
    lines.push(format!("dT identity in t {fam}"));
    verdict(8, ok, lines.join("; "));
}

#[test]
fn criterion_09_composite_bianchi() {
    let p = ParamSet::builder().free("t").build().unwrap();
    let t = p.var("t").unwrap();
    let mut ok = true;
    let mut lines = Vec::new();
    let mut check = |name: &str, kind: SasKind, blocks: Vec<BlockSpec>| {
        let res = composite_bianchi(kind, &blocks).unwrap();
        ok &= res.is_zero();
        lines.push(format!("{name} {}", res.is_zero()));
    };
    check(
        "S7 ts family in t",
        SasKind::Ts,
        vec![
            ansatz_block(SasKind::Ts, s(1), t.scale(&rat(-1, 6))).unwrap(),
            BlockSpec::Asd { scale: t.scale(&rat(-10, 3)) },
            characteristic_block((s(1) - t.clone()).scale(&rat(-9, 4))).unwrap(),
        ],
    );
    check("S7 t=0", SasKind::Ts, vec![characteristic_block(q(-9, 4)).unwrap()]);
    check(
        "S7 np SU(2)xSU(2)",
        SasKind::Np,
        vec![ansatz_block(SasKind::Np, s(1), q(-27, 50)).unwrap(), BlockSpec::Asd { scale: q(-54, 5) }],
    );
    check(
        "S7 ts_hat",
        SasKind::TsHat,
        vec![ansatz_block(SasKind::TsHat, q(1, 2), s(1)).unwrap(), BlockSpec::Asd { scale: s(-6) }],
    );
    let n11 = [
        ("N11 ts", SasKind::Ts, ansatz_block(SasKind::Ts, s(1), q(-1, 6)).unwrap()),
        ("N11 np", SasKind::Np, ansatz_block(SasKind::Np, s(1), q(-27, 50)).unwrap()),
        ("N11 ts_hat", SasKind::TsHat, ansatz_block(SasKind::TsHat, q(1, 2), s(1)).unwrap()),
    ];
    for (name, kind, base) in n11 {
        let mut products = Vec::new();
        let mut good = true;
        for k in [1i64, 2, 3] {
            let blocks = vec![base.clone(), BlockSpec::Fs { k: s(k), scale: s(0) }];
            match solve_block_scale(kind, &blocks, 1).unwrap() {
                Some(x) => {
                    let solved = vec![base.clone(), blocks[1].with_scale(x.clone())];
                    good &= composite_bianchi(kind, &solved).unwrap().is_zero();
                    products.push(x.scale(&rat(k * k, 1)));
                }
                None => good = false,
            }
        }
        good &= products.len() == 3 && products.windows(2).all(|w| w[0] == w[1]);
        ok &= good;
        lines.push(format!("{name} with FS(k), scale*k^2 constant {good}"));
    }
    verdict(9, ok, lines.join("; "));
}

#[test]
fn criterion_10_circle_torsion() {
    let mut ok = true;
    let mut lines = Vec::new();
    for cs in [circlefam::s3s3_scenario(), circlefam::n32_scenario(), circlefam::heisenberg_scenario()] {
        let fam = torsion_family(&cs).unwrap();
        let good = fam.t_matches && fam.tau0_matches && fam.tau1_matches;
        ok &= good;
        lines.push(format!("{}: T_t {}, tau0 {}, tau1 {}", cs.name, fam.t_matches, fam.tau0_matches, fam.tau1_matches));
    }
    let cs = circlefam::n32_scenario();
    let fam = torsion_family(&cs).unwrap();
    let tau0 = fam.torsion.tau0 == cs.cos().scale(&rat(12, 7));
    let stated_tau1 = cs.eta().scale(&cs.sin().scale(&rat(-1, 2)));
    let tau1 = fam.torsion.tau1 == stated_tau1;
    let t_omega = fam.t_omega
        == parse_with(&Coframe::standard(7), &ParamSet::empty(), "-2*e2^e3^e6 - 2*e2^e4^e5 + 2*e3^e4^e7 - 4*e5^e6^e7");
    ok &= tau0 && tau1 && t_omega;
    lines.push(format!(
        "n32: tau0 = 12/7 cos t {tau0}; tau1 = {} (stated -1/2 sin t eta) {tau1}; T_omega {t_omega}",
        fam.torsion.tau1.render_std()
    ));
    verdict(10, ok, lines.join("; "));
}

#[test]
fn criterion_11_lifts() {
    let s3 = circlefam::s3s3_scenario();
    let l1 = lift_solution(&s3, &[]).unwrap();
    let n32 = circlefam::n32_scenario();
    let field = n32_su2_field().unwrap();
    let st = build_phi_t(&n32).unwrap();
    let curv: Vec<Form> = field.curvature().unwrap().iter().map(|f| n32.lift(f)).collect();
    let inst = instanton_check(&curv, &st).is_ok();
    let l2 = lift_solution(&n32, &[field]).unwrap();
    let ok = l1.is_solution() && l2.is_solution() && inst;
    verdict(
        11,
        ok,
        format!("s3s3 lift {}; n32 lift {}; F^psi_t = 0 for all t {inst}", l1.is_solution(), l2.is_solution()),
    );
}

#[test]
fn criterion_12_heisenberg_family() {
    let cs = circlefam::heisenberg_scenario();
    let rep = heisenberg_family(&cs).unwrap();
    let v = |n: &str| cs.params.var(n).unwrap();
    let (a, b, c) = (v("a"), v("b"), v("c"));
    let display = cs.table().unwrap().d(&torsion_family(&cs).unwrap().t_form).unwrap()
        == cs.lift(&heisenberg_display(&a, &b, &c));
    let quads = heisenberg_quadratics(&a, &b, &c);
    let prop = match &rep.factor {
        Some(f) => rep.pairing.iter().zip(&quads).all(|(p, qd)| *p == qd.scale(f)),
        None => false,
    };
    let res = rep.residual.is_zero();
    let factor = rep.factor.as_ref().map(|f| f.to_string()).unwrap_or_else(|| "none".into());
    verdict(
        12,
        display && rep.dt_matches_display && prop && res,
        format!("dT_t display {display}; pairing = {factor} x quadratics {prop}; residual 0 in (a,b,c,t) {res}"),
    );
}

// ------------------------------------------------------------------ engine properties

fn random_g2(rng: &mut ChaCha8Rng) -> G2Structure {
    loop {
        let p: Vec<Vec<Rational>> = (0..7).map(|_| (0..7).map(|_| rat(rng.gen_range(-2..=2), 1)).collect()).collect();
        let images: Vec<Form> = p
            .iter()
            .map(|row| row.iter().enumerate().fold(Form::zero(7), |acc, (j, x)| acc + Form::gen(7, j).scale_rat(x)))
            .collect();
        let phi = standard_phi().pullback(&images);
        if let Ok(st) = G2Structure::from_phi(phi) {
            return st;
        }
    }
}

fn random_ansatz(rng: &mut ChaCha8Rng) -> NilScenario {
    let d = Scalar::from_rational(random_nonzero(rng));
    let eps: [Scalar; 3] = std::array::from_fn(|_| Scalar::from_rational(random_rational(rng)));
    let b = rational_matrix(&random_rotation(rng));
    let dm = diag3(std::array::from_fn(|_| Scalar::from_rational(random_nonzero(rng))));
    let sc = rotated_instance(&d, &eps, b, dm);
    let aminus: Matrix =
        (0..3).map(|_| (0..3).map(|_| Scalar::from_rational(random_rational(rng))).collect()).collect();
    let aplus = sc.aplus.clone();
    sc.with_structure(aplus, aminus)
}

fn catalog_tables() -> Vec<(String, DiffTable)> {
    CATALOG.iter().filter(|n| **n != "sasakian_local").map(|n| (n.to_string(), lookup(n).unwrap().table)).collect()
}

#[test]
fn criterion_13_engine_properties() {
    const N: usize = 200;
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut lines = Vec::new();
    let mut ok = true;

    let mut star = 0;
    for _ in 0..N {
        let st = random_g2(&mut rng);
        let k = rng.gen_range(0..=7);
        let a = random_form(&mut rng, 7, k);
        star += (st.star(&st.star(&a)) == a) as usize;
    }
    lines.push(format!("** = 1 in dim 7 {star}/{N}"));
    ok &= star == N;

    let tables = catalog_tables();
    let (mut anti, mut dd) = (0, 0);
    for _ in 0..N {
        let (_, t) = &tables[rng.gen_range(0..tables.len())];
        let n = t.dim();
        let (k, l) = (rng.gen_range(0..n), rng.gen_range(0..n));
        let (a, b) = (random_form(&mut rng, n, k), random_form(&mut rng, n, l));
        let lhs = t.d(&a.wedge(&b)).unwrap();
        let sign = if k % 2 == 0 { 1 } else { -1 };
        let rhs = t.d(&a).unwrap().wedge(&b) + a.wedge(&t.d(&b).unwrap()).scale_rat(&rat(sign, 1));
        anti += (lhs == rhs) as usize;
        dd += t.d(&t.d(&a).unwrap()).unwrap().is_zero() as usize;
    }
    lines.push(format!("antiderivation {anti}/{N}; d^2 = 0 {dd}/{N}"));
    ok &= anti == N && dd == N;

    let (mut recon, mut two_t) = (0, 0);
    for _ in 0..N {
        let sc = random_ansatz(&mut rng);
        let table = sc.table();
        let st = build_phi(&sc).unwrap();
        let Ok(tor) = torsion_forms(&st, &table) else { continue };
        let dphi = table.d(st.phi()).unwrap();
        let dpsi = table.d(st.psi()).unwrap();
        let r1 = st.psi().scale(&tor.tau0) + tor.tau1.scale_rat(&rat(3, 1)).wedge(st.phi()) + st.star(&tor.tau3);
        let r2 = tor.tau1.scale_rat(&rat(4, 1)).wedge(st.psi()) + tor.tau2.wedge(st.phi());
        recon += (r1 == dphi && r2 == dpsi) as usize;

        // The integrable part of the sample: make tau2 vanish by using the instanton ansatz.
        let inst = rotated_instance(&sc.delta, &sc.eps, sc.b.clone(), diag3([s(1), s(1), s(1)]));
        let t2 = inst.table();
        let s2 = build_phi(&inst).unwrap();
        let tor2 = torsion_forms(&s2, &t2).unwrap();
        if tor2.is_integrable() {
            let dphi2 = t2.d(s2.phi()).unwrap();
            let c = s2.star(&dphi2.wedge(s2.phi())).coeff(0).scale(&rat(1, 6));
            let first =
                s2.phi().scale(&c) - s2.star(&dphi2) + s2.star(&tor2.tau1.scale_rat(&rat(4, 1)).wedge(s2.phi()));
            let second =
                s2.phi().scale(&tor2.tau0.scale(&rat(1, 6))) + s2.star(&tor2.tau1.wedge(s2.phi())) - &tor2.tau3;
            two_t += (first == second) as usize;
        }
    }
    lines.push(format!("torsion reconstruction {recon}/{N}; two formulas for T {two_t}/{N}"));
    ok &= recon == N && two_t == N;
    verdict(13, ok, lines.join("; "));
}

#[test]
fn criterion_14_reproduce_all() {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_g2het")).args(["reproduce", "--all"]).output().expect("binary runs");
    let took = start.elapsed();
    let text = String::from_utf8_lossy(&out.stdout);
    let summary = text.lines().last().unwrap_or("").to_string();
    let failing: Vec<&str> = text
        .lines()
        .filter(|l| l.starts_with("fail") || l.starts_with("error"))
        .filter_map(|l| l.split_whitespace().nth(1))
        .collect();
    let code = out.status.code();
    verdict(
        14,
        code == Some(0) && took < Duration::from_secs(60),
        format!("exit {code:?} in {:.2} s; {summary}; failing: {}", took.as_secs_f64(), failing.join(", ")),
    );
}
