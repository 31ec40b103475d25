//! SU(3)-structures on 6-dimensional coframes.

use std::sync::Arc;

use thiserror::Error;

use crate::exterior::{subsets, Coframe, DiffTable, ExtError, Form, FrameMetric};
use crate::gauge::{bianchi_residual, GaugeError, GaugeField};
use crate::liecat::s3s3_f_table;
use crate::ring::{linear_rows, rat, LinearSolution, LinearSystem, ParamSet, RingError, Scalar};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SuError {
    #[error("incompatible SU(3) data: {0}")]
    Invalid(String),
    #[error("torsion system is inconsistent (residual {0})")]
    Inconsistent(String),
    #[error("torsion system does not determine the components uniquely")]
    NotUnique,
    #[error("no Bismut connection: {0}")]
    NoBismut(&'static str),
    #[error("internal identity failed: {0}")]
    Identity(&'static str),
    #[error(transparent)]
    Ext(#[from] ExtError),
    #[error(transparent)]
    Ring(#[from] RingError),
    #[error(transparent)]
    Gauge(#[from] GaugeError),
}

/// `(omega, Upsilon_+, Upsilon_-)` with metric and the induced almost complex structure.
#[derive(Clone, Debug)]
pub struct SUThreeStructure {
    pub omega: Form,
    pub upsilon_plus: Form,
    pub upsilon_minus: Form,
    pub metric: FrameMetric,
    /// `J e_a = sum_b j[a][b] e_b`.
    pub j: Vec<Vec<Scalar>>,
}

impl SUThreeStructure {
    /// Derives `J` from `omega(X, Y) = g(JX, Y)`.
    pub fn new(omega: Form, upsilon_plus: Form, upsilon_minus: Form, metric: FrameMetric) -> SUThreeStructure {
        let n = omega.dim();
        let w: Vec<Vec<Scalar>> = (0..n)
            .map(|a| {
                (0..n)
                    .map(|b| {
                        if a == b {
                            return Scalar::zero();
                        }
                        let c = omega.coeff((1 << a) | (1 << b));
                        if a < b {
                            c
                        } else {
                            -c
                        }
                    })
                    .collect()
            })
            .collect();
        let gi = metric.ginv();
        let j = (0..n)
            .map(|a| (0..n).map(|b| (0..n).fold(Scalar::zero(), |acc, c| acc + &w[a][c] * &gi[c][b])).collect())
            .collect();
        SUThreeStructure { omega, upsilon_plus, upsilon_minus, metric, j }
    }

    pub fn orthonormal(omega: Form, upsilon_plus: Form, upsilon_minus: Form) -> SUThreeStructure {
        let n = omega.dim();
        SUThreeStructure::new(omega, upsilon_plus, upsilon_minus, FrameMetric::identity(n))
    }

    pub fn dim(&self) -> usize {
        self.omega.dim()
    }

    /// `J` acting on a 1-form by pullback: `(J alpha)(X) = alpha(J X)`.
    pub fn j_one(&self, alpha: &Form) -> Form {
        alpha.pullback(&self.j_images())
    }

    /// Slotwise extension of [`Self::j_one`] to forms of any degree.
    pub fn j_form(&self, a: &Form) -> Form {
        a.pullback(&self.j_images())
    }

    fn j_images(&self) -> Vec<Form> {
        let n = self.dim();
        (0..n).map(|k| (0..n).fold(Form::zero(n), |acc, a| acc + Form::gen(n, a).scale(&self.j[a][k]))).collect()
    }

    pub fn volume_form(&self) -> Form {
        let w = &self.omega;
        w.wedge(w).wedge(w).scale_rat(&rat(1, 6))
    }
}

/// Checks the compatibility and normalization identities; `Err` names the first failure.
pub fn su3_validate(s: &SUThreeStructure) -> Result<(), String> {
    let n = s.dim();
    if n != 6 {
        return Err(format!("dimension {n}, expected 6"));
    }
    let w = &s.omega;
    if !s.upsilon_plus.is_homogeneous_of(3) || !s.upsilon_minus.is_homogeneous_of(3) || !w.is_homogeneous_of(2) {
        return Err("degree".into());
    }
    if !w.wedge(&s.upsilon_plus).is_zero() || !w.wedge(&s.upsilon_minus).is_zero() {
        return Err("omega ^ Upsilon != 0".into());
    }
    let w3 = w.wedge(w).wedge(w);
    if s.upsilon_plus.wedge(&s.upsilon_minus) != w3.scale_rat(&rat(2, 3)) {
        return Err("normalization: Upsilon_+ ^ Upsilon_- != 2/3 omega^3".into());
    }
    if w3.top_coeff() != s.metric.vol_coeff().scale(&crate::ring::rint(6)) {
        return Err("normalization: omega^3 != 6 vol_g".into());
    }
    for a in 0..n {
        for b in 0..n {
            let sq = (0..n).fold(Scalar::zero(), |acc, c| acc + &s.j[a][c] * &s.j[c][b]);
            let target = if a == b { Scalar::from_int(-1) } else { Scalar::zero() };
            if sq != target {
                return Err("J^2 != -Id".into());
            }
        }
    }
    if s.j_form(&s.upsilon_plus) != s.upsilon_minus {
        return Err("Upsilon_+ + i Upsilon_- is not of type (3,0)".into());
    }
    Ok(())
}

/// Intrinsic torsion components of an SU(3)-structure.
#[derive(Clone, Debug, PartialEq)]
pub struct SUTorsion {
    pub pi0: Scalar,
    pub sigma0: Scalar,
    pub pi1: Form,
    pub nu1: Form,
    pub pi2: Form,
    pub sigma2: Form,
    pub nu3: Form,
}

impl SUTorsion {
    /// Names of the nonzero components.
    pub fn nonzero(&self) -> Vec<&'static str> {
        let mut v = Vec::new();
        if !self.pi0.is_zero() {
            v.push("pi0");
        }
        if !self.sigma0.is_zero() {
            v.push("sigma0");
        }
        for (name, f) in
            [("pi1", &self.pi1), ("nu1", &self.nu1), ("pi2", &self.pi2), ("sigma2", &self.sigma2), ("nu3", &self.nu3)]
        {
            if !f.is_zero() {
                v.push(name);
            }
        }
        v
    }
}

fn common_params(forms: &[&Form]) -> Option<Arc<ParamSet>> {
    let mut best: Option<Arc<ParamSet>> = None;
    for f in forms {
        for (_, c) in f.terms() {
            if let Some(p) = c.params() {
                if best.as_ref().map(|b| p.len() > b.len()).unwrap_or(true) {
                    best = Some(p.clone());
                }
            }
        }
    }
    best
}

struct Unknowns {
    params: Arc<ParamSet>,
    names: Vec<String>,
}

impl Unknowns {
    fn scalar(&mut self, name: &str) -> Scalar {
        self.names.push(name.to_string());
        self.params.var(name).expect("declared unknown")
    }

    fn form(&mut self, n: usize, k: usize, prefix: &str) -> Form {
        let mut f = Form::zero(n);
        for m in subsets(n, k) {
            let v = self.scalar(&format!("{prefix}_{m}"));
            f.add_term(m, v);
        }
        f
    }
}

fn unknown_names(n: usize) -> Vec<String> {
    let mut names = vec!["pi0".to_string(), "sigma0".to_string()];
    for (prefix, k) in [("pi1", 1), ("nu1", 1), ("pi2", 2), ("sigma2", 2), ("nu3", 3)] {
        for m in subsets(n, k) {
            names.push(format!("{prefix}_{m}"));
        }
    }
    names
}

/// All seven torsion components from one linear solve of the structure equations
/// `d omega = -3/2 sigma0 Up + 3/2 pi0 Um + nu1 ^ omega + nu3`,
/// `d Up = pi0 omega^2 + pi1 ^ Up - pi2 ^ omega`,
/// `d Um = sigma0 omega^2 + pi1 ^ Um - sigma2 ^ omega`,
/// with `pi2, sigma2` J-invariant and primitive and `nu3` primitive of type 12.
pub fn su3_torsion(s: &SUThreeStructure, t: &DiffTable) -> Result<SUTorsion, SuError> {
    su3_validate(s).map_err(SuError::Invalid)?;
    let n = s.dim();
    let (w, up, um) = (&s.omega, &s.upsilon_plus, &s.upsilon_minus);
    let dw = t.d(w)?;
    let dup = t.d(up)?;
    let dum = t.d(um)?;

    let mut sources: Vec<&Form> = vec![w, up, um, &dw, &dup, &dum];
    sources.extend(t.entries().iter().flatten());
    let base = common_params(&sources).unwrap_or_else(ParamSet::empty);
    let all = unknown_names(n);
    let params = base.extend_free(&all)?;
    let mut u = Unknowns { params: params.clone(), names: Vec::new() };
    let pi0 = u.scalar("pi0");
    let sigma0 = u.scalar("sigma0");
    let pi1 = u.form(n, 1, "pi1");
    let nu1 = u.form(n, 1, "nu1");
    let pi2 = u.form(n, 2, "pi2");
    let sigma2 = u.form(n, 2, "sigma2");
    let nu3 = u.form(n, 3, "nu3");
    debug_assert_eq!(u.names, all);

    let w2 = w.wedge(w);
    let h = rat(3, 2);
    let mut residuals = vec![
        &dw - &(up.scale(&sigma0.scale(&-h.clone())) + um.scale(&pi0.scale(&h)) + nu1.wedge(w) + nu3.clone()),
        &dup - &(w2.scale(&pi0) + pi1.wedge(up) - pi2.wedge(w)),
        &dum - &(w2.scale(&sigma0) + pi1.wedge(um) - sigma2.wedge(w)),
    ];
    for x in [&pi2, &sigma2] {
        residuals.push(&s.j_form(x) - x);
        residuals.push(x.wedge(&w2));
    }
    residuals.push(nu3.wedge(w));
    residuals.push(nu3.wedge(up));
    residuals.push(nu3.wedge(um));

    let polys: Vec<Scalar> =
        residuals.iter().flat_map(|r| r.terms().map(|(_, c)| c.clone()).collect::<Vec<_>>()).collect();
    let idx: Vec<usize> = all.iter().map(|n| params.index(n).expect("extended")).collect();
    let mut sys = LinearSystem::new(all.clone());
    sys.rows = linear_rows(&polys, &idx)?;
    let values = match sys.solve()? {
        LinearSolution::Unique { values, .. } => values,
        LinearSolution::NoSolution { residual } => return Err(SuError::Inconsistent(residual.render())),
        LinearSolution::Underdetermined { .. } => return Err(SuError::NotUnique),
    };
    let subs: std::collections::HashMap<usize, Scalar> = idx.iter().copied().zip(values).collect();
    // Solved values involve only the structure's own parameters.
    let back = (!base.is_empty()).then(|| base.clone());
    let sub_s = |c: &Scalar| c.substitute_many(&subs).restrict(&back).expect("unknowns eliminated");
    let sub = |f: &Form| f.map_coeffs(sub_s);
    let tor = SUTorsion {
        pi0: sub_s(&pi0),
        sigma0: sub_s(&sigma0),
        pi1: sub(&pi1),
        nu1: sub(&nu1),
        pi2: sub(&pi2),
        sigma2: sub(&sigma2),
        nu3: sub(&nu3),
    };
    verify_reconstruction(s, t, &tor)?;
    Ok(tor)
}

/// Substitutes the components back into the three structure equations and the type conditions.
pub fn verify_reconstruction(s: &SUThreeStructure, t: &DiffTable, tor: &SUTorsion) -> Result<(), SuError> {
    let (w, up, um) = (&s.omega, &s.upsilon_plus, &s.upsilon_minus);
    let w2 = w.wedge(w);
    let h = rat(3, 2);
    let rw =
        up.scale(&tor.sigma0.scale(&-h.clone())) + um.scale(&tor.pi0.scale(&h)) + tor.nu1.wedge(w) + tor.nu3.clone();
    if t.d(w)? != rw {
        return Err(SuError::Identity("d omega reconstruction"));
    }
    if t.d(up)? != w2.scale(&tor.pi0) + tor.pi1.wedge(up) - tor.pi2.wedge(w) {
        return Err(SuError::Identity("d Upsilon_+ reconstruction"));
    }
    if t.d(um)? != w2.scale(&tor.sigma0) + tor.pi1.wedge(um) - tor.sigma2.wedge(w) {
        return Err(SuError::Identity("d Upsilon_- reconstruction"));
    }
    for x in [&tor.pi2, &tor.sigma2] {
        if s.j_form(x) != *x || !x.wedge(&w2).is_zero() {
            return Err(SuError::Identity("pi2, sigma2 in the 8-dimensional type"));
        }
    }
    if !tor.nu3.wedge(w).is_zero() || !tor.nu3.wedge(up).is_zero() || !tor.nu3.wedge(um).is_zero() {
        return Err(SuError::Identity("nu3 in the 12-dimensional type"));
    }
    Ok(())
}

/// `T = pi0/2 Up + sigma0/2 Um + J nu1 ^ omega + J nu3`, defined when
/// `pi2 = sigma2 = 0` and `pi1 = 2 nu1`.
pub fn bismut_torsion(s: &SUThreeStructure, tor: &SUTorsion) -> Result<Form, SuError> {
    if !tor.pi2.is_zero() || !tor.sigma2.is_zero() {
        return Err(SuError::NoBismut("pi2 = sigma2 = 0"));
    }
    if tor.pi1 != tor.nu1.scale_rat(&rat(2, 1)) {
        return Err(SuError::NoBismut("pi1 = 2 nu1"));
    }
    let half = rat(1, 2);
    Ok(s.upsilon_plus.scale(&tor.pi0.scale(&half))
        + s.upsilon_minus.scale(&tor.sigma0.scale(&half))
        + s.j_one(&tor.nu1).wedge(&s.omega)
        + s.j_form(&tor.nu3))
}

/// `Ok` when every component satisfies `F ^ omega^2 = 0` and `F ^ Upsilon_+ = 0`.
pub fn su3_instanton_check(f: &[Form], s: &SUThreeStructure) -> Result<(), (usize, Form)> {
    let w2 = s.omega.wedge(&s.omega);
    for (i, fi) in f.iter().enumerate() {
        for r in [fi.wedge(&w2), fi.wedge(&s.upsilon_plus)] {
            if !r.is_zero() {
                return Err((i, r));
            }
        }
    }
    Ok(())
}

/// `dT - sum <F ^ F>`.
pub fn su3_bianchi_residual(torsion: &Form, blocks: &[GaugeField], t: &DiffTable) -> Result<Form, SuError> {
    Ok(bianchi_residual(torsion, blocks, t)?)
}

/// `(Upsilon_+, Upsilon_-)` rotated by the circle pair `(c, s)`:
/// `(c Up - s Um, s Up + c Um)`.
pub fn rotate_upsilon(s: &SUThreeStructure, c: &Scalar, sn: &Scalar) -> SUThreeStructure {
    let up = s.upsilon_plus.scale(c) - s.upsilon_minus.scale(sn);
    let um = s.upsilon_plus.scale(sn) + s.upsilon_minus.scale(c);
    SUThreeStructure { upsilon_plus: up, upsilon_minus: um, ..s.clone() }
}

/// The 6-dimensional coframe `e2..e7` of `R + n_{3,2}` with its SU(3)-structure.
pub fn n32_su3() -> (SUThreeStructure, DiffTable) {
    let names: Vec<String> = (2..=7).map(|i| format!("e{i}")).collect();
    // Index k in this frame is e_{k+2}; digits below use the 7-dimensional names.
    let f = |d: u64| -> Form {
        let idx: Vec<usize> = d.to_string().bytes().map(|b| (b - b'0') as usize - 2).collect();
        Form::mono(6, &idx)
    };
    let mut entries = vec![Form::zero(6); 6];
    entries[3] = f(24).scale_rat(&rat(-2, 1));
    entries[4] = f(23).scale_rat(&rat(-2, 1));
    entries[5] = f(34).scale_rat(&rat(2, 1));
    let t = DiffTable::complete(Arc::new(Coframe::new(&names)), entries).expect("n32 table");
    let omega = f(27) + f(35) - f(46);
    let up = f(347) + f(567) - f(236) - f(245);
    let um = -(f(234) + f(256) + f(457) + f(367));
    (SUThreeStructure::orthonormal(omega, up, um), t)
}

/// `S^3 x S^3` in the `f` coframe with `Upsilon = (f1 + i f2)(f3 + i f4)(f5 + i f6)`.
pub fn s3s3_su3() -> (SUThreeStructure, DiffTable) {
    let f = |d: u64| Form::e(6, d);
    let omega = f(12) + f(34) + f(56);
    let up = f(135) - f(146) - f(236) - f(245);
    let um = f(136) + f(145) + f(235) - f(246);
    (SUThreeStructure::orthonormal(omega, up, um), s3s3_f_table())
}

/// The flat torus `T^6` with the standard structure.
pub fn flat_su3() -> (SUThreeStructure, DiffTable) {
    let (s, _) = s3s3_su3();
    (s, DiffTable::abelian(6))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauge::GaugeAlgebra;
    use crate::ring::rint;

    #[test]
    fn catalog_structures_validate() {
        for (s, _) in [n32_su3(), s3s3_su3(), flat_su3()] {
            assert_eq!(su3_validate(&s), Ok(()));
        }
        let (s, _) = s3s3_su3();
        let bad = SUThreeStructure::orthonormal(s.omega.scale_rat(&rint(2)), s.upsilon_plus, s.upsilon_minus);
        assert!(su3_validate(&bad).unwrap_err().contains("normalization"));
    }

    #[test]
    fn flat_torsion_vanishes() {
        let (s, t) = flat_su3();
        let tor = su3_torsion(&s, &t).unwrap();
        assert!(tor.nonzero().is_empty());
        assert!(bismut_torsion(&s, &tor).unwrap().is_zero());
    }

    #[test]
    fn n32_torsion_and_bismut() {
        let (s, t) = n32_su3();
        let tor = su3_torsion(&s, &t).unwrap();
        assert_eq!(tor.nonzero(), vec!["pi0", "nu3"]);
        assert!(tor.pi0.is_one());
        let tt = bismut_torsion(&s, &tor).unwrap();
        let f = |d: u64| {
            let idx: Vec<usize> = d.to_string().bytes().map(|b| (b - b'0') as usize - 2).collect();
            Form::mono(6, &idx)
        };
        let expected = f(236).scale_rat(&rint(-2)) - f(245).scale_rat(&rint(2)) + f(347).scale_rat(&rint(2))
            - f(567).scale_rat(&rint(4));
        assert_eq!(tt, expected);
        let dt = f(2357).scale_rat(&rint(-8)) + f(2467).scale_rat(&rint(8)) - f(3456).scale_rat(&rint(8));
        assert_eq!(t.d(&tt).unwrap(), dt);
    }

    #[test]
    fn s3s3_torsion() {
        let (s, t) = s3s3_su3();
        let tor = su3_torsion(&s, &t).unwrap();
        assert_eq!(tor.nonzero(), vec!["sigma0", "nu3"]);
        assert_eq!(tor.sigma0, Scalar::from_int(-2));
        let tt = bismut_torsion(&s, &tor).unwrap();
        assert!(t.d(&tt).unwrap().is_zero());
        let f = |d: u64| Form::e(6, d);
        assert_eq!(tt, (f(136) + f(145) + f(235) + f(246)).scale_rat(&rint(-2)));
    }

    #[test]
    fn instanton_and_bianchi() {
        let (s, t) = s3s3_su3();
        let f = |d: u64| Form::e(6, d);
        let x = f(13) + f(24);
        assert!(su3_instanton_check(std::slice::from_ref(&x), &s).is_ok());
        assert!(su3_instanton_check(std::slice::from_ref(&s.omega), &s).is_err());
        let tt = bismut_torsion(&s, &su3_torsion(&s, &t).unwrap()).unwrap();
        let r = Scalar::from_int(3);
        let alg = GaugeAlgebra::abelian(vec!["X".into()], vec![vec![r.clone()]]).unwrap();
        let u1 = GaugeField::from_curvature("U1", alg, vec![x.clone()]).unwrap();
        let res = su3_bianchi_residual(&tt, &[u1], &t).unwrap();
        assert_eq!(res, -x.wedge(&x).scale(&r));
    }

    #[test]
    fn rotation_covariance() {
        let p = ParamSet::builder().circle("c", "s").build().unwrap();
        let c = p.var("c").unwrap();
        let sn = p.var("s").unwrap();
        for (s, t) in [n32_su3(), s3s3_su3()] {
            let tor = su3_torsion(&s, &t).unwrap();
            let rot = su3_torsion(&rotate_upsilon(&s, &c, &sn), &t).unwrap();
            assert_eq!(rot.pi0, &c * &tor.pi0 - &sn * &tor.sigma0);
            assert_eq!(rot.sigma0, &sn * &tor.pi0 + &c * &tor.sigma0);
            assert_eq!(rot.pi1, tor.pi1);
        }
    }
}
