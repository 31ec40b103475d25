//! Circle bundles over SU(3)-structures and the rotating family
//! `phi_t = eta ^ omega + Re(e^{it} (Up + i Um))`.
//!
//! The angle enters through a circle pair `(cos_t, sin_t)` so that every
//! statement is checked for all `t` at once.

use std::collections::HashMap;
use std::sync::Arc;

use thiserror::Error;

use crate::exterior::{subsets, Coframe, DiffTable, ExtError, Form, FrameMetric};
use crate::g2core::{instanton_check, torsion_forms, torsion_threeform, G2Error, G2Structure, Torsion};
use crate::gauge::{total_pairing_wedge, GaugeAlgebra, GaugeError, GaugeField};
use crate::ring::{linear_rows, rat, LinearSolution, LinearSystem, ParamSet, Rational, RingError, Scalar};
use crate::su3core::{
    bismut_torsion, flat_su3, n32_su3, s3s3_su3, su3_bianchi_residual, su3_instanton_check, su3_torsion, su3_validate,
    SUThreeStructure, SUTorsion, SuError,
};

pub const COS: &str = "cos_t";
pub const SIN: &str = "sin_t";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CircleError {
    #[error("invalid SU(3)-structure: {0}")]
    Invalid(String),
    #[error("parameter set lacks the circle pair ({COS}, {SIN})")]
    NoCircle,
    #[error("the base metric must be the identity in the chosen coframe")]
    NotOrthonormal,
    #[error("d eta has a component along eta")]
    EtaInCurvature,
    #[error("integrability condition fails: {0}")]
    Integrability(&'static str),
    #[error("lift precondition fails: {0}")]
    Precondition(String),
    #[error("identity check failed: {0}")]
    Identity(&'static str),
    #[error(transparent)]
    Su(#[from] SuError),
    #[error(transparent)]
    G2(#[from] G2Error),
    #[error(transparent)]
    Gauge(#[from] GaugeError),
    #[error(transparent)]
    Ext(#[from] ExtError),
    #[error(transparent)]
    Ring(#[from] RingError),
}

/// A principal circle bundle over a 6-dimensional base with SU(3)-structure.
#[derive(Clone, Debug)]
pub struct CircleScenario {
    pub name: String,
    pub base: SUThreeStructure,
    pub base_table: DiffTable,
    /// Position of `eta` in the 7-dimensional coframe; the base fills the rest in order.
    pub eta_index: usize,
    /// Curvature of `eta`, a 2-form on the base.
    pub deta: Form,
    pub params: Arc<ParamSet>,
}

impl CircleScenario {
    pub fn new(
        name: &str,
        base: SUThreeStructure,
        base_table: DiffTable,
        eta_index: usize,
        deta: Form,
        params: Arc<ParamSet>,
    ) -> Result<CircleScenario, CircleError> {
        let circle = params.circle_pairs().iter().any(|(c, s)| c == COS && s == SIN);
        if !circle {
            return Err(CircleError::NoCircle);
        }
        if deta.dim() != 6 || !deta.is_homogeneous_of(2) {
            return Err(CircleError::EtaInCurvature);
        }
        Ok(CircleScenario { name: name.into(), base, base_table, eta_index, deta, params })
    }

    pub fn cos(&self) -> Scalar {
        self.params.var(COS).expect("checked at construction")
    }

    pub fn sin(&self) -> Scalar {
        self.params.var(SIN).expect("checked at construction")
    }

    fn positions(&self) -> Vec<usize> {
        (0..7).filter(|&i| i != self.eta_index).collect()
    }

    /// Pullback of a base form to the total space.
    pub fn lift(&self, f: &Form) -> Form {
        f.embed(7, &self.positions())
    }

    pub fn eta(&self) -> Form {
        Form::gen(7, self.eta_index)
    }

    pub fn table(&self) -> Result<DiffTable, CircleError> {
        let pos = self.positions();
        let mut entries = vec![Form::zero(7); 7];
        for (k, e) in self.base_table.entries().iter().enumerate() {
            let e = e.as_ref().ok_or(CircleError::Identity("base table must be complete"))?;
            entries[pos[k]] = self.lift(e);
        }
        entries[self.eta_index] = self.lift(&self.deta);
        Ok(DiffTable::complete(Arc::new(Coframe::standard(7)), entries)?)
    }

    /// `Re(e^{it} Upsilon)` and `Im(e^{it} Upsilon)` on the base.
    pub fn rotated_upsilon(&self) -> (Form, Form) {
        let (c, s) = (self.cos(), self.sin());
        let (up, um) = (&self.base.upsilon_plus, &self.base.upsilon_minus);
        (up.scale(&c) - um.scale(&s), up.scale(&s) + um.scale(&c))
    }

    pub fn phi_t(&self) -> Form {
        let (re, _) = self.rotated_upsilon();
        (self.eta() ^ self.lift(&self.base.omega)) + self.lift(&re)
    }

    pub fn psi_t(&self) -> Form {
        let w = &self.base.omega;
        let (_, im) = self.rotated_upsilon();
        self.lift(&w.wedge(w).scale_rat(&rat(1, 2))) - (self.eta() ^ self.lift(&im))
    }

    /// `(d eta)_0`, defined by `d eta ^ omega^2 = 6 (d eta)_0 vol`.
    pub fn deta_trace(&self) -> Scalar {
        let w = &self.base.omega;
        let top = self.deta.wedge(w).wedge(w).top_coeff();
        let vol = self.base.volume_form().top_coeff();
        let q = top.div_exact(&vol).expect("volume coefficient is a nonzero constant");
        q.scale(&rat(1, 6))
    }
}

/// Builds `phi_t` with the metric `eta^2 + g_omega` and checks the defining
/// identity, the stated `psi_t` and the splitting of the Hodge star.
pub fn build_phi_t(cs: &CircleScenario) -> Result<G2Structure, CircleError> {
    su3_validate(&cs.base).map_err(CircleError::Invalid)?;
    if !cs.base.metric.is_identity() {
        return Err(CircleError::NotOrthonormal);
    }
    let s = G2Structure::with_metric(cs.phi_t(), FrameMetric::identity(7))?;
    if *s.psi() != cs.psi_t() {
        return Err(CircleError::Identity("star phi_t = psi_t"));
    }
    hodge_splitting_check(cs, s.metric())?;
    Ok(s)
}

/// `*7 a = *6 a ^ eta` and `*7 (a ^ eta) = (-1)^k *6 a` on every base monomial.
pub fn hodge_splitting_check(cs: &CircleScenario, m7: &FrameMetric) -> Result<(), CircleError> {
    let eta = cs.eta();
    for k in 0..=6 {
        for mask in subsets(6, k) {
            let a = Form::from_terms(6, [(mask, Scalar::one())]);
            let s6 = cs.lift(&cs.base.metric.hodge(&a)?);
            let la = cs.lift(&a);
            if m7.hodge(&la)? != s6.wedge(&eta) {
                return Err(CircleError::Identity("*7 a = *6 a ^ eta"));
            }
            let sign = if k % 2 == 0 { Scalar::one() } else { -Scalar::one() };
            if m7.hodge(&la.wedge(&eta))? != s6.scale(&sign) {
                return Err(CircleError::Identity("*7 (a ^ eta) = (-1)^k *6 a"));
            }
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct IntegrabilityReport {
    pub sigma2_zero: bool,
    pub pi2_zero: bool,
    pub pi1_eq_2nu1: bool,
    pub deta_j_invariant: bool,
    pub deta_traceless: bool,
    pub deta_trace: Scalar,
}

impl IntegrabilityReport {
    /// The conditions for `tau_2 = 0` at every angle.
    pub fn integrable(&self) -> bool {
        self.sigma2_zero && self.pi2_zero && self.pi1_eq_2nu1 && self.deta_j_invariant
    }
}

pub fn base_torsion(cs: &CircleScenario) -> Result<SUTorsion, CircleError> {
    Ok(su3_torsion(&cs.base, &cs.base_table)?)
}

pub fn integrability_test(cs: &CircleScenario) -> Result<IntegrabilityReport, CircleError> {
    let tor = base_torsion(cs)?;
    let trace = cs.deta_trace();
    Ok(IntegrabilityReport {
        sigma2_zero: tor.sigma2.is_zero(),
        pi2_zero: tor.pi2.is_zero(),
        pi1_eq_2nu1: tor.pi1 == tor.nu1.scale_rat(&rat(2, 1)),
        deta_j_invariant: cs.base.j_form(&cs.deta) == cs.deta,
        deta_traceless: trace.is_zero(),
        deta_trace: trace,
    })
}

/// `2 (d eta)_6 ^ Um~ - 2 nu1 ^ omega^2 + pi1 ^ omega^2`, where `(d eta)_6` is
/// the J-anti-invariant part of `d eta`.
pub fn cond1_form(cs: &CircleScenario) -> Result<Form, CircleError> {
    let tor = base_torsion(cs)?;
    let w2 = cs.base.omega.wedge(&cs.base.omega);
    let anti = (&cs.deta - &cs.base.j_form(&cs.deta)).scale_rat(&rat(1, 2));
    let (_, im) = cs.rotated_upsilon();
    Ok(anti.wedge(&im).scale_rat(&rat(2, 1)) - tor.nu1.wedge(&w2).scale_rat(&rat(2, 1)) + tor.pi1.wedge(&w2))
}

#[derive(Clone, Debug)]
pub struct FamilyTorsion {
    pub structure: G2Structure,
    pub torsion: Torsion,
    pub t_form: Form,
    pub t_omega: Form,
    /// `eta ^ (d eta - 2 (d eta)_0 omega) + T_omega + (d eta)_0 Re(e^{it} Upsilon)`.
    pub t_formula: Form,
    pub tau0_formula: Scalar,
    pub tau1_formula: Form,
    pub t_matches: bool,
    pub tau0_matches: bool,
    pub tau1_matches: bool,
    /// No coefficient of `T_t` depends on the angle.
    pub t_independent: bool,
}

pub fn torsion_family(cs: &CircleScenario) -> Result<FamilyTorsion, CircleError> {
    let rep = integrability_test(cs)?;
    if !rep.sigma2_zero || !rep.pi2_zero {
        return Err(CircleError::Integrability("pi2 = sigma2 = 0"));
    }
    if !rep.pi1_eq_2nu1 {
        return Err(CircleError::Integrability("pi1 = 2 nu1"));
    }
    if !rep.deta_j_invariant {
        return Err(CircleError::Integrability("d eta of type (1,1)"));
    }
    let tor6 = base_torsion(cs)?;
    let s = build_phi_t(cs)?;
    let table = cs.table()?;
    let torsion = torsion_forms(&s, &table)?;
    if !torsion.is_integrable() {
        return Err(CircleError::Integrability("tau2 = 0 on the total space"));
    }
    let t_form = torsion_threeform(&s, &torsion)?;
    let t_omega = cs.lift(&bismut_torsion(&cs.base, &tor6)?);

    let (c, sn) = (cs.cos(), cs.sin());
    let d0 = rep.deta_trace.clone();
    let (re, _) = cs.rotated_upsilon();
    let eta = cs.eta();
    let inner = cs.lift(&(&cs.deta - &cs.base.omega.scale(&d0.scale(&rat(2, 1)))));
    let t_formula = eta.wedge(&inner) + t_omega.clone() + cs.lift(&re).scale(&d0);
    let tau0_formula = (&c * &tor6.pi0 - &sn * &tor6.sigma0).scale(&rat(12, 7)) + d0.scale(&rat(6, 7));
    let tau1_formula =
        eta.scale(&(&c * &tor6.sigma0 - &sn * &tor6.pi0).scale(&rat(1, 2))) + cs.lift(&tor6.nu1).scale_rat(&rat(1, 2));

    let angle = [cs.params.index(COS).expect("circle"), cs.params.index(SIN).expect("circle")];
    let t_independent = t_form.terms().all(|(_, x)| angle.iter().all(|&v| !x.depends_on(v)));
    Ok(FamilyTorsion {
        t_matches: t_form == t_formula,
        tau0_matches: torsion.tau0 == tau0_formula,
        tau1_matches: torsion.tau1 == tau1_formula,
        t_independent,
        structure: s,
        torsion,
        t_form,
        t_omega,
        t_formula,
        tau0_formula,
        tau1_formula,
    })
}

#[derive(Clone, Debug)]
pub struct LiftReport {
    pub tau2_zero: bool,
    /// Blocks whose curvature fails `F ^ psi_t = 0`, with the offending 6-form.
    pub instanton_failures: Vec<(String, Form)>,
    /// Pairing scale on the `eta` block; `None` when `d eta ^ d eta = 0` leaves it free.
    pub u1_scale: Option<Scalar>,
    pub residual: Form,
}

impl LiftReport {
    pub fn is_solution(&self) -> bool {
        self.tau2_zero && self.instanton_failures.is_empty() && self.residual.is_zero()
    }
}

/// Lifts a base solution `(omega, Up, A)` to `(phi_t, eta + A)` and verifies
/// the three equations with the `eta` pairing solved.
pub fn lift_solution(cs: &CircleScenario, blocks: &[GaugeField]) -> Result<LiftReport, CircleError> {
    let rep = integrability_test(cs)?;
    if !rep.integrable() {
        return Err(CircleError::Precondition("base torsion or d eta type".into()));
    }
    if !rep.deta_traceless {
        return Err(CircleError::Precondition("d eta must be traceless".into()));
    }
    let tor6 = base_torsion(cs)?;
    let t_omega = bismut_torsion(&cs.base, &tor6)?;
    for b in blocks {
        if let Err((i, _)) = su3_instanton_check(b.curvature()?, &cs.base) {
            return Err(CircleError::Precondition(format!("{} component {i} is not an SU(3)-instanton", b.label)));
        }
    }
    if !su3_bianchi_residual(&t_omega, blocks, &cs.base_table)?.is_zero() {
        return Err(CircleError::Precondition("base Bianchi identity".into()));
    }

    let fam = torsion_family(cs)?;
    let s = &fam.structure;
    let table = cs.table()?;
    let mut lifted = Vec::with_capacity(blocks.len());
    let mut failures = Vec::new();
    for b in blocks {
        let alg = b.algebra().ok_or(CircleError::Precondition("declared blocks cannot be lifted".into()))?;
        let curv: Vec<Form> = b.curvature()?.iter().map(|f| cs.lift(f)).collect();
        if let Err((i, r)) = instanton_check(&curv, s) {
            failures.push((format!("{}[{i}]", b.label), r));
        }
        lifted.push(GaugeField::from_curvature(&b.label, alg.clone(), curv)?);
    }
    let f_eta = cs.lift(&cs.deta);
    if let Err((_, r)) = instanton_check(std::slice::from_ref(&f_eta), s) {
        failures.push(("eta".into(), r));
    }

    let dt = table.d(&fam.t_form)?;
    let r0 = &dt - &total_pairing_wedge(&lifted, 7);
    let ff = f_eta.wedge(&f_eta);
    let (u1_scale, residual) = if ff.is_zero() {
        (None, r0)
    } else {
        match solve_scalar_multiple(&r0, &ff, &cs.params)? {
            Some(x) => {
                let res = &r0 - &ff.scale(&x);
                (Some(x), res)
            }
            None => (None, r0),
        }
    };
    Ok(LiftReport { tau2_zero: fam.torsion.is_integrable(), instanton_failures: failures, u1_scale, residual })
}

/// Solves `target = x basis` for a scalar `x` by a one-unknown linear solve.
fn solve_scalar_multiple(target: &Form, basis: &Form, params: &Arc<ParamSet>) -> Result<Option<Scalar>, CircleError> {
    let name = "u1_scale".to_string();
    let ext = params.extend_free(std::slice::from_ref(&name))?;
    let x = ext.var(&name)?;
    let idx = ext.index(&name).expect("extended");
    let diff = target - &basis.scale(&x);
    let polys: Vec<Scalar> = diff.terms().map(|(_, c)| c.lift(&ext)).collect::<Result<_, _>>()?;
    let mut sys = LinearSystem::new(vec![name]);
    sys.rows = linear_rows(&polys, &[idx])?;
    match sys.solve()? {
        LinearSolution::Unique { values, .. } => Ok(Some(values[0].restrict(&Some(params.clone()))?)),
        _ => Ok(None),
    }
}

pub fn circle_params(extra: &[&str]) -> Arc<ParamSet> {
    let mut b = ParamSet::builder();
    for n in extra {
        b = b.free(n);
    }
    b.circle(COS, SIN).build().expect("distinct names")
}

/// `S^3 x S^3 x S^1` with `d eta = f13 + f24`.
pub fn s3s3_scenario() -> CircleScenario {
    let (base, table) = s3s3_su3();
    let deta = Form::e(6, 13) + Form::e(6, 24);
    CircleScenario::new("s3s3", base, table, 6, deta, circle_params(&[])).expect("catalog scenario")
}

/// `R + n_{3,2}` with `eta = e1` and the trivial bundle.
pub fn n32_scenario() -> CircleScenario {
    let (base, table) = n32_su3();
    CircleScenario::new("n32", base, table, 0, Form::zero(6), circle_params(&[])).expect("catalog scenario")
}

/// The flat torus with a flat connection.
pub fn flat_scenario() -> CircleScenario {
    let (base, table) = flat_su3();
    CircleScenario::new("flat", base, table, 6, Form::zero(6), circle_params(&[])).expect("catalog scenario")
}

/// The flat torus with `d eta = a e12 + b e34 + c e56`, symbolic in `a, b, c`.
pub fn heisenberg_scenario() -> CircleScenario {
    let p = circle_params(&["a", "b", "c"]);
    let [a, b, c] = ["a", "b", "c"].map(|n| p.var(n).expect("declared"));
    heisenberg_with(p, a, b, c, "heis")
}

/// `d eta = a e12 + b e34 - (a + b) e56`, the traceless slice.
pub fn heisenberg_traceless() -> CircleScenario {
    let p = circle_params(&["a", "b"]);
    let [a, b] = ["a", "b"].map(|n| p.var(n).expect("declared"));
    let c = -(&a + &b);
    heisenberg_with(p, a, b, c, "heis.traceless")
}

fn heisenberg_with(p: Arc<ParamSet>, a: Scalar, b: Scalar, c: Scalar, name: &str) -> CircleScenario {
    let (base, table) = flat_su3();
    let deta = Form::e(6, 12).scale(&a) + Form::e(6, 34).scale(&b) + Form::e(6, 56).scale(&c);
    CircleScenario::new(name, base, table, 6, deta, p).expect("catalog scenario")
}

/// The SU(2) connection on `n_{3,2}` with `C = -2 Id` and unit pairing, in the base frame.
pub fn n32_su2_field() -> Result<GaugeField, CircleError> {
    let (_, table) = n32_su3();
    let m2 = Scalar::from_int(-2);
    let id: Vec<Vec<Scalar>> =
        (0..3).map(|i| (0..3).map(|j| if i == j { Scalar::one() } else { Scalar::zero() }).collect()).collect();
    let alg = GaugeAlgebra::diagonal([m2.clone(), m2.clone(), m2], id)?;
    // Base index k is e_{k+2}, so e5, e6, e7 sit at 3, 4, 5.
    let conn = (3..6).map(|i| Form::gen(6, i)).collect();
    Ok(GaugeField::from_connection("A", alg, conn, &table)?)
}

/// `(1/3) (Q1 sh1^2 + Q2 sh2^2 + Q3 sh3^2)` with the displayed quadratics.
pub fn heisenberg_display(a: &Scalar, b: &Scalar, c: &Scalar) -> Form {
    let q = heisenberg_quadratics(a, b, c);
    let sh = sigma_hat_base();
    (0..3).fold(Form::zero(6), |acc, i| acc + sh[i].wedge(&sh[i]).scale(&q[i].scale(&rat(1, 3))))
}

/// `(a^2 + b^2 - ab + ac + bc, b^2 + c^2 + ab + ac - bc, a^2 + c^2 + ab - ac + bc)`.
pub fn heisenberg_quadratics(a: &Scalar, b: &Scalar, c: &Scalar) -> [Scalar; 3] {
    let (ab, ac, bc) = (a * b, a * c, b * c);
    let (a2, b2, c2) = (a * a, b * b, c * c);
    [&a2 + &b2 - &ab + &ac + &bc, &b2 + &c2 + &ab + &ac - &bc, &a2 + &c2 + &ab - &ac + &bc]
}

/// `(e12 - e34, e34 - e56, e15 + e26)` on the base.
pub fn sigma_hat_base() -> [Form; 3] {
    let f = |d| Form::e(6, d);
    [f(12) - f(34), f(34) - f(56), f(15) + f(26)]
}

#[derive(Clone, Debug)]
pub struct HeisenbergReport {
    pub sigma_hat_instantons: bool,
    pub dt: Form,
    pub dt_matches_display: bool,
    /// Diagonal pairing on `u(1)^3` from the linear solve.
    pub pairing: [Scalar; 3],
    /// `pairing = factor * (Q1, Q2, Q3)`, if such a constant exists.
    pub factor: Option<Rational>,
    pub residual: Form,
}

pub fn heisenberg_family(cs: &CircleScenario) -> Result<HeisenbergReport, CircleError> {
    let fam = torsion_family(cs)?;
    let s = &fam.structure;
    let table = cs.table()?;
    let sh: Vec<Form> = sigma_hat_base().iter().map(|f| cs.lift(f)).collect();
    let sigma_hat_instantons = instanton_check(&sh, s).is_ok();
    let dt = table.d(&fam.t_form)?;
    let coeff = |k: u64| cs.deta.coeff(crate::exterior::mask_of(&digits(k)));
    let (a, b, c) = (coeff(12), coeff(34), coeff(56));
    let display = cs.lift(&heisenberg_display(&a, &b, &c));

    let names: Vec<String> = ["p1", "p2", "p3"].iter().map(|x| x.to_string()).collect();
    let ext = cs.params.extend_free(&names)?;
    let p: Vec<Scalar> = names.iter().map(|n| ext.var(n)).collect::<Result<_, _>>()?;
    let mut diff = dt.map_coeffs(|x| x.lift(&ext).expect("prefix"));
    for i in 0..3 {
        diff = diff - sh[i].wedge(&sh[i]).scale(&p[i]);
    }
    let idx: Vec<usize> = names.iter().map(|n| ext.index(n).expect("extended")).collect();
    let polys: Vec<Scalar> = diff.terms().map(|(_, x)| x.clone()).collect();
    let mut sys = LinearSystem::new(names.clone());
    sys.rows = linear_rows(&polys, &idx)?;
    let LinearSolution::Unique { values, .. } = sys.solve()? else {
        return Err(CircleError::Identity("diagonal u(1)^3 pairing is not unique"));
    };
    let back = Some(cs.params.clone());
    let pairing: [Scalar; 3] = std::array::from_fn(|i| values[i].restrict(&back).expect("unknowns eliminated"));
    let residual = (0..3).fold(dt.clone(), |acc, i| acc - sh[i].wedge(&sh[i]).scale(&pairing[i]));

    let q = heisenberg_quadratics(&a, &b, &c);
    let factor = pairing[0]
        .div_exact(&q[0])
        .and_then(|f| f.as_rational())
        .filter(|f| (0..3).all(|i| q[i].scale(f) == pairing[i]));
    Ok(HeisenbergReport { sigma_hat_instantons, dt_matches_display: dt == display, dt, pairing, factor, residual })
}

fn digits(k: u64) -> Vec<usize> {
    k.to_string().bytes().map(|b| (b - b'1') as usize).collect()
}

/// Evaluates a family object at a rational point of the circle.
pub fn at_angle(f: &Form, c: Rational, s: Rational) -> Result<Form, CircleError> {
    let a: HashMap<String, Rational> = [(COS.to_string(), c), (SIN.to_string(), s)].into_iter().collect();
    Ok(f.eval(&a)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::rint;

    #[test]
    fn n32_at_angle_zero_is_the_ansatz_form() {
        let cs = n32_scenario();
        let s = build_phi_t(&cs).unwrap();
        let ansatz = Form::e(7, 135) - Form::e(7, 245) - Form::e(7, 146) - Form::e(7, 236)
            + Form::e(7, 127)
            + Form::e(7, 347)
            + Form::e(7, 567);
        assert_eq!(at_angle(s.phi(), rint(1), rint(0)).unwrap(), ansatz);
    }

    #[test]
    fn integrability_reports() {
        let r = integrability_test(&s3s3_scenario()).unwrap();
        assert!(r.integrable() && r.deta_traceless);
        let r = integrability_test(&n32_scenario()).unwrap();
        assert!(r.integrable() && r.deta_traceless);
        let cs = heisenberg_scenario();
        let r = integrability_test(&cs).unwrap();
        assert!(r.deta_j_invariant);
        let [a, b, c] = ["a", "b", "c"].map(|n| cs.params.var(n).unwrap());
        assert_eq!(r.deta_trace, (a + b + c).scale(&rat(1, 3)));
    }

    #[test]
    fn n32_family() {
        let cs = n32_scenario();
        let fam = torsion_family(&cs).unwrap();
        assert!(fam.t_matches && fam.t_independent && fam.tau0_matches);
        assert_eq!(fam.torsion.tau0, cs.cos().scale(&rat(12, 7)));
        // The computed tau1 is +1/2 sin t eta.
        assert_eq!(fam.torsion.tau1, cs.eta().scale(&cs.sin().scale(&rat(1, 2))));
        assert!(!fam.tau1_matches);
        let f = |d: u64| Form::e(7, d);
        assert_eq!(
            fam.t_omega,
            -f(236).scale_rat(&rint(2)) - f(245).scale_rat(&rint(2)) + f(347).scale_rat(&rint(2))
                - f(567).scale_rat(&rint(4))
        );
    }

    #[test]
    fn s3s3_family_and_lift() {
        let cs = s3s3_scenario();
        let fam = torsion_family(&cs).unwrap();
        assert!(fam.t_matches && fam.t_independent && fam.tau0_matches && fam.tau1_matches);
        let lift = lift_solution(&cs, &[]).unwrap();
        assert!(lift.is_solution());
        assert_eq!(lift.u1_scale, Some(Scalar::one()));
    }

    #[test]
    fn n32_lift_with_su2() {
        let cs = n32_scenario();
        let lift = lift_solution(&cs, &[n32_su2_field().unwrap()]).unwrap();
        assert!(lift.is_solution());
        assert_eq!(lift.u1_scale, None);
        assert!(lift_solution(&flat_scenario(), &[]).unwrap().is_solution());
    }

    #[test]
    fn heisenberg() {
        let cs = heisenberg_scenario();
        let fam = torsion_family(&cs).unwrap();
        assert!(fam.t_matches && fam.tau0_matches && fam.tau1_matches && !fam.t_independent);
        let rep = heisenberg_family(&cs).unwrap();
        assert!(rep.sigma_hat_instantons && rep.dt_matches_display);
        assert!(rep.residual.is_zero());
        assert_eq!(rep.factor, Some(rat(1, 3)));
        let tl = heisenberg_traceless();
        assert!(torsion_family(&tl).unwrap().t_independent);
        let lift = lift_solution(&tl, &[]).unwrap();
        assert!(lift.is_solution());
        assert_eq!(lift.u1_scale, Some(Scalar::one()));
    }

    #[test]
    fn cond1_vanishes_exactly_on_integrable_data() {
        for cs in [s3s3_scenario(), n32_scenario(), heisenberg_scenario()] {
            assert!(cond1_form(&cs).unwrap().is_zero());
        }
        let (base, table) = flat_su3();
        let bad = CircleScenario::new("bad", base, table, 6, Form::e(6, 13), circle_params(&[])).unwrap();
        assert!(!cond1_form(&bad).unwrap().is_zero());
        assert!(!integrability_test(&bad).unwrap().deta_j_invariant);
        assert!(matches!(torsion_family(&bad), Err(CircleError::Integrability(_))));
    }
}
