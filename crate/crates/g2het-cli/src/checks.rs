//! Check execution for scenario files and the generic pairing solve.

use std::fmt;
use std::str::FromStr;

use g2het::circlefam::{lift_solution, torsion_family};
use g2het::exec;
use g2het::exterior::Form;
use g2het::g2core::{instanton_check, torsion_forms, torsion_threeform, G2Structure, Torsion};
use g2het::gauge::{bianchi_residual, matrix_connection_check, GaugeField};
use g2het::ring::{identity_rows, LinearSolution, LinearSystem, Scalar};
use g2het::su3core::{bismut_torsion, su3_bianchi_residual, su3_instanton_check, su3_torsion, verify_reconstruction};

use crate::report::{Entry, Status};
use crate::scenario::Scenario;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CheckId {
    G2Metric,
    G2Torsion,
    G2Integrable,
    G2Coclosed,
    G2Instanton,
    G2Bianchi,
    Su3Torsion,
    Su3Instanton,
    Su3Bianchi,
    S1Family,
    MatrixConnCharacteristic,
}

const ALL: [(CheckId, &str); 11] = [
    (CheckId::G2Metric, "g2.metric"),
    (CheckId::G2Torsion, "g2.torsion"),
    (CheckId::G2Integrable, "g2.integrable"),
    (CheckId::G2Coclosed, "g2.coclosed"),
    (CheckId::G2Instanton, "g2.instanton"),
    (CheckId::G2Bianchi, "g2.bianchi"),
    (CheckId::Su3Torsion, "su3.torsion"),
    (CheckId::Su3Instanton, "su3.instanton"),
    (CheckId::Su3Bianchi, "su3.bianchi"),
    (CheckId::S1Family, "s1.family"),
    (CheckId::MatrixConnCharacteristic, "matrixconn.characteristic"),
];

impl CheckId {
    pub fn all() -> impl Iterator<Item = CheckId> {
        ALL.iter().map(|(c, _)| *c)
    }

    pub fn name(self) -> &'static str {
        ALL.iter().find(|(c, _)| *c == self).map(|(_, n)| *n).expect("listed")
    }

    /// Checks that apply to the sections present in a file.
    pub fn defaults(g2: bool, su3: bool, circle: bool, gauge: bool, matrix: bool) -> Vec<CheckId> {
        use CheckId::*;
        let mut v = Vec::new();
        if g2 {
            v.extend([G2Metric, G2Torsion, G2Integrable, G2Coclosed]);
            if gauge {
                v.extend([G2Instanton, G2Bianchi]);
            }
            if matrix {
                v.push(MatrixConnCharacteristic);
            }
        }
        if su3 {
            v.push(Su3Torsion);
            if gauge {
                v.extend([Su3Instanton, Su3Bianchi]);
            }
        }
        if circle {
            v.push(S1Family);
        }
        v
    }
}

impl fmt::Display for CheckId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CheckId {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ALL.iter().find(|(_, n)| *n == s).map(|(c, _)| *c).ok_or_else(|| {
            let known: Vec<&str> = ALL.iter().map(|(_, n)| *n).collect();
            format!("unknown check `{s}` (known: {})", known.join(", "))
        })
    }
}

/// Verdict of a single check before it is stamped with an id.
pub struct Verdict {
    pub pass: bool,
    pub detail: String,
    pub residual: Option<Form>,
}

impl Verdict {
    pub fn zero(residual: Form, detail: impl Into<String>) -> Verdict {
        let pass = residual.is_zero();
        Verdict { pass, detail: detail.into(), residual: (!pass).then_some(residual) }
    }

    pub fn flag(pass: bool, detail: impl Into<String>) -> Verdict {
        Verdict { pass, detail: detail.into(), residual: None }
    }
}

type CheckResult = Result<Verdict, String>;

fn structure(sc: &Scenario) -> Result<G2Structure, String> {
    let phi = sc.phi.clone().ok_or("scenario has no g2 section")?;
    G2Structure::from_phi(phi).map_err(|e| e.to_string())
}

fn g2_torsion(sc: &Scenario) -> Result<(G2Structure, Torsion), String> {
    let s = structure(sc)?;
    let t = torsion_forms(&s, &sc.table).map_err(|e| e.to_string())?;
    Ok((s, t))
}

/// Why a `"solve"` pairing could not be substituted.
pub enum Unresolved {
    /// The linear system is inconsistent: a genuine failure of the Bianchi identity.
    NoSolution(String),
    /// Anything else, including an underdetermined solve.
    Error(String),
}

/// The gauge blocks with every `"solve"` pairing replaced by its unique solution.
pub fn resolved_blocks(sc: &Scenario) -> Result<Vec<GaugeField>, Unresolved> {
    if !sc.gauge.iter().any(|g| g.solve_pairing) {
        return Ok(sc.gauge.iter().map(|g| g.field.clone()).collect());
    }
    let sol = solve_pairing(sc).map_err(Unresolved::Error)?;
    let err = |e: String| Unresolved::Error(e);
    match sol.solution {
        LinearSolution::Unique { values, .. } => {
            let mut out = Vec::new();
            let mut k = 0;
            for g in &sc.gauge {
                if !g.solve_pairing {
                    out.push(g.field.clone());
                    continue;
                }
                let n = g.field.algebra().expect("solvable blocks have an algebra").dim();
                let mut p = vec![vec![Scalar::zero(); n]; n];
                for i in 0..n {
                    for j in i..n {
                        let v = values[k].restrict(&Some(sc.params.clone())).map_err(|e| err(e.to_string()))?;
                        p[i][j] = v.clone();
                        p[j][i] = v;
                        k += 1;
                    }
                }
                out.push(g.field.with_pairing(p).map_err(|e| err(e.to_string()))?);
            }
            Ok(out)
        }
        LinearSolution::NoSolution { residual } => Err(Unresolved::NoSolution(format!(
            "no pairing solves the Bianchi identity (inconsistent row {} = 0)",
            residual.render()
        ))),
        LinearSolution::Underdetermined { .. } => {
            Err(err("the pairing solve is underdetermined; fix a pairing by hand".into()))
        }
    }
}

/// Blocks for a Bianchi check. An empty list is allowed and means `dT = 0`.
fn bianchi_blocks(sc: &Scenario) -> Result<Result<Vec<GaugeField>, Verdict>, String> {
    match resolved_blocks(sc) {
        Ok(b) => Ok(Ok(b)),
        Err(Unresolved::NoSolution(why)) => Ok(Err(Verdict::flag(false, why))),
        Err(Unresolved::Error(e)) => Err(e),
    }
}

/// Blocks for an instanton check; the pairing plays no role there.
fn instanton_blocks(sc: &Scenario) -> Result<Vec<&GaugeField>, String> {
    if sc.gauge.is_empty() {
        return Err("scenario has no gauge blocks".into());
    }
    Ok(sc.gauge.iter().map(|g| &g.field).filter(|f| !f.is_declared()).collect())
}

fn render(sc: &Scenario, f: &Form) -> String {
    if f.dim() == sc.coframe.dim() {
        f.render(&sc.coframe)
    } else {
        f.render_std()
    }
}

fn run_one(sc: &Scenario, id: CheckId) -> CheckResult {
    let r = |f: &Form| render(sc, f);
    match id {
        CheckId::G2Metric => {
            let s = structure(sc)?;
            let m = s.metric();
            let detail = if m.is_identity() {
                format!("identity metric, vol coefficient {}", m.vol_coeff().render())
            } else {
                let diag: Vec<String> = (0..m.dim()).map(|i| m.g()[i][i].render()).collect();
                format!("metric diagonal ({}), vol coefficient {}", diag.join(", "), m.vol_coeff().render())
            };
            Ok(Verdict::flag(true, detail))
        }
        CheckId::G2Torsion => {
            let (_, t) = g2_torsion(sc)?;
            let mut parts = vec![format!("tau0 = {}", t.tau0.render())];
            for (n, f) in [("tau1", &t.tau1), ("tau2", &t.tau2), ("tau3", &t.tau3)] {
                parts.push(format!("{n} = {}", r(f)));
            }
            Ok(Verdict::flag(true, parts.join("; ")))
        }
        CheckId::G2Integrable => {
            let (_, t) = g2_torsion(sc)?;
            Ok(Verdict::zero(t.tau2.clone(), "tau2 = 0"))
        }
        CheckId::G2Coclosed => {
            let (_, t) = g2_torsion(sc)?;
            Ok(Verdict::zero(t.dpsi.clone(), "d psi = 0"))
        }
        CheckId::G2Instanton => {
            let s = structure(sc)?;
            for b in instanton_blocks(sc)? {
                let curv = b.curvature().map_err(|e| e.to_string())?;
                if let Err((i, res)) = instanton_check(curv, &s) {
                    return Ok(Verdict::zero(res, format!("F ^ psi = 0 fails on {}[{i}]", b.label)));
                }
            }
            Ok(Verdict::flag(true, "F ^ psi = 0 for every block"))
        }
        CheckId::G2Bianchi => {
            let (s, t) = g2_torsion(sc)?;
            if !t.is_integrable() {
                return Err("tau2 != 0: no characteristic torsion".into());
            }
            let tt = torsion_threeform(&s, &t).map_err(|e| e.to_string())?;
            let blocks = match bianchi_blocks(sc)? {
                Ok(b) => b,
                Err(v) => return Ok(v),
            };
            let res = bianchi_residual(&tt, &blocks, &sc.table).map_err(|e| e.to_string())?;
            Ok(Verdict::zero(res, format!("dT = <F ^ F> with T = {}", r(&tt))))
        }
        CheckId::Su3Torsion => {
            let s = sc.su3.as_ref().ok_or("scenario has no su3 section")?;
            let tor = su3_torsion(s, &sc.table).map_err(|e| e.to_string())?;
            verify_reconstruction(s, &sc.table, &tor).map_err(|e| e.to_string())?;
            let nz = tor.nonzero();
            let detail =
                if nz.is_empty() { "torsion-free".to_string() } else { format!("nonzero classes: {}", nz.join(", ")) };
            Ok(Verdict::flag(true, detail))
        }
        CheckId::Su3Instanton => {
            let s = sc.su3.as_ref().ok_or("scenario has no su3 section")?;
            for b in instanton_blocks(sc)? {
                let curv = b.curvature().map_err(|e| e.to_string())?;
                if let Err((i, res)) = su3_instanton_check(curv, s) {
                    return Ok(Verdict::zero(res, format!("SU(3)-instanton condition fails on {}[{i}]", b.label)));
                }
            }
            Ok(Verdict::flag(true, "every block is an SU(3)-instanton"))
        }
        CheckId::Su3Bianchi => {
            let s = sc.su3.as_ref().ok_or("scenario has no su3 section")?;
            let tor = su3_torsion(s, &sc.table).map_err(|e| e.to_string())?;
            let tt = bismut_torsion(s, &tor).map_err(|e| e.to_string())?;
            let blocks = match bianchi_blocks(sc)? {
                Ok(b) => b,
                Err(v) => return Ok(v),
            };
            let res = su3_bianchi_residual(&tt, &blocks, &sc.table).map_err(|e| e.to_string())?;
            Ok(Verdict::zero(res, format!("dT = <F ^ F> with T = {}", r(&tt))))
        }
        CheckId::S1Family => {
            let cs = sc.circle.as_ref().ok_or("scenario has no circle section")?;
            let fam = torsion_family(cs).map_err(|e| e.to_string())?;
            let mut detail = format!(
                "T_t formula {}, tau0 formula {}, tau1 formula {}; tau0 = {}, tau1 = {}",
                yes(fam.t_matches),
                yes(fam.tau0_matches),
                yes(fam.tau1_matches),
                fam.torsion.tau0.render(),
                fam.torsion.tau1.render_std()
            );
            let mut pass = fam.t_matches && fam.tau0_matches && fam.tau1_matches;
            let mut residual = None;
            if sc.lift {
                let blocks = match bianchi_blocks(sc)? {
                    Ok(b) => b,
                    Err(v) => return Ok(v),
                };
                let lift = lift_solution(cs, &blocks).map_err(|e| e.to_string())?;
                let scale = lift.u1_scale.as_ref().map(Scalar::render).unwrap_or_else(|| "free".into());
                detail.push_str(&format!(
                    "; lift {} (eta pairing {scale})",
                    if lift.is_solution() { "solves" } else { "fails" }
                ));
                pass &= lift.is_solution();
                if !lift.residual.is_zero() {
                    residual = Some(lift.residual.clone());
                }
            }
            Ok(Verdict { pass, detail, residual })
        }
        CheckId::MatrixConnCharacteristic => {
            let g = sc.matrix.as_ref().ok_or("scenario has no matrix_connection section")?;
            let (s, t) = g2_torsion(sc)?;
            let tt = torsion_threeform(&s, &t).map_err(|e| e.to_string())?;
            let rep = matrix_connection_check(g, &s, &sc.table, &tt).map_err(|e| e.to_string())?;
            let detail = format!(
                "skew {}, preserves phi {}, torsion matches {}, curvature instanton {}",
                yes(rep.skew),
                yes(rep.preserves_phi),
                yes(rep.torsion_matches),
                yes(rep.curvature_instanton)
            );
            let residual = (!rep.torsion_matches).then(|| &rep.torsion - &tt);
            Ok(Verdict { pass: rep.all_pass(), detail, residual })
        }
    }
}

fn yes(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

/// Runs the requested checks; entries come back sorted by id.
pub fn run_checks(sc: &Scenario, timings: bool) -> Vec<Entry> {
    let mut out = exec::map(sc.checks.clone(), |id| {
        let start = std::time::Instant::now();
        let res = run_one(sc, id);
        let ms = start.elapsed().as_secs_f64() * 1e3;
        let mut e = match res {
            Ok(v) => Entry {
                id: id.name().to_string(),
                anchor: None,
                status: if v.pass { Status::Pass } else { Status::Fail },
                detail: v.detail,
                residual: v.residual.map(|f| render(sc, &f)),
                wall_ms: None,
            },
            Err(msg) => Entry {
                id: id.name().to_string(),
                anchor: None,
                status: Status::Error,
                detail: msg,
                residual: None,
                wall_ms: None,
            },
        };
        if timings {
            e.wall_ms = Some(ms);
        }
        e
    });
    out.sort_by(|a, b| a.id.cmp(&b.id));
    out
}

/// Unknown pairing entries and the outcome of their linear solve.
pub struct PairingSolve {
    pub unknowns: Vec<String>,
    pub solution: LinearSolution,
    pub torsion: Form,
}

/// Solves for symmetric ad-invariant pairings on the blocks marked `"solve"`
/// so that the Bianchi identity holds identically in the parameters.
pub fn solve_pairing(sc: &Scenario) -> Result<PairingSolve, String> {
    let targets: Vec<usize> = (0..sc.gauge.len()).filter(|&k| sc.gauge[k].solve_pairing).collect();
    if targets.is_empty() {
        return Err("no gauge block asks for \"pairing\": \"solve\"".into());
    }
    let (torsion, table) = if let Some(phi) = &sc.phi {
        let s = G2Structure::from_phi(phi.clone()).map_err(|e| e.to_string())?;
        let t = torsion_forms(&s, &sc.table).map_err(|e| e.to_string())?;
        if !t.is_integrable() {
            return Err("tau2 != 0: no characteristic torsion".into());
        }
        (torsion_threeform(&s, &t).map_err(|e| e.to_string())?, &sc.table)
    } else if let Some(s) = &sc.su3 {
        let tor = su3_torsion(s, &sc.table).map_err(|e| e.to_string())?;
        (bismut_torsion(s, &tor).map_err(|e| e.to_string())?, &sc.table)
    } else {
        return Err("pairing solve needs a g2 or su3 section".into());
    };

    let mut names = Vec::new();
    for &k in &targets {
        let g = &sc.gauge[k].field;
        let n = g.algebra().ok_or("declared blocks have no pairing")?.dim();
        for i in 0..n {
            for j in i..n {
                names.push(format!("p_{}_{}{}", g.label, i + 1, j + 1));
            }
        }
    }
    for n in &names {
        if sc.params.index(n).is_some() {
            return Err(format!("parameter `{n}` clashes with a pairing unknown"));
        }
    }
    let ext = sc.params.extend_free(&names).map_err(|e| e.to_string())?;
    let unknowns: Vec<usize> = names.iter().map(|n| ext.index(n).expect("extended")).collect();

    let dt = table.d(&torsion).map_err(|e| e.to_string())?;
    let mut rest = dt.map_coeffs(|x| x.lift(&ext).expect("prefix"));
    let mut polys = Vec::new();
    let mut next = 0;
    for (k, blk) in sc.gauge.iter().enumerate() {
        if !targets.contains(&k) {
            rest = rest - blk.field.pairing_wedge();
            continue;
        }
        let alg = blk.field.algebra().expect("checked");
        let n = alg.dim();
        let mut p = vec![vec![Scalar::zero(); n]; n];
        for i in 0..n {
            for j in i..n {
                let v = ext.var(&names[next]).map_err(|e| e.to_string())?;
                next += 1;
                p[i][j] = v.clone();
                p[j][i] = v;
            }
        }
        let f = blk.field.curvature().map_err(|e| e.to_string())?;
        for a in 0..n {
            for b in 0..n {
                rest = rest - f[a].wedge(&f[b]).scale(&p[a][b]);
            }
        }
        for z in 0..n {
            for x in 0..n {
                for y in x..n {
                    let mut acc = Scalar::zero();
                    for c in 0..n {
                        acc = acc + alg.bracket(z, x, c) * &p[c][y] + alg.bracket(z, y, c) * &p[x][c];
                    }
                    polys.push(acc);
                }
            }
        }
    }
    polys.extend(rest.terms().map(|(_, c)| c.clone()));
    let polys: Vec<Scalar> =
        polys.into_iter().map(|p| p.lift(&ext)).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
    let mut sys = LinearSystem::new(names.clone());
    sys.rows = identity_rows(&polys, &unknowns).map_err(|e| e.to_string())?;
    let solution = sys.solve().map_err(|e| e.to_string())?;
    Ok(PairingSolve { unknowns: names, solution, torsion })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::parse_scenario;

    fn su2(pairing: &str) -> String {
        format!(
            r#"{{
            "model": "coframe",
            "parameters": ["delta", "eps1", "eps2", "eps3"],
            "g2": {{"ansatz": {{"delta": "delta", "eps": ["eps1", "eps2", "eps3"]}}}},
            "gauge": {{
                "brackets": {{"diagonalC": ["-2*delta", "-2*delta", "-2*delta"]}},
                "connection": {{"Y1": "e5", "Y2": "e6", "Y3": "e7"}},
                "pairing": {pairing}
            }}
        }}"#
        )
    }

    #[test]
    fn su2_scenario_passes_everything() {
        let sc = parse_scenario(&su2("[[1,0,0],[0,1,0],[0,0,1]]"), "su2").unwrap();
        let res = run_checks(&sc, false);
        assert_eq!(res.len(), 6);
        for e in &res {
            assert_eq!(e.status, Status::Pass, "{}: {}", e.id, e.detail);
        }
    }

    #[test]
    fn wrong_pairing_shows_a_residual() {
        let sc = parse_scenario(&su2("[[-1,0,0],[0,1,0],[0,0,1]]"), "bad").unwrap();
        let res = run_checks(&sc, false);
        let b = res.iter().find(|e| e.id == "g2.bianchi").unwrap();
        assert_eq!(b.status, Status::Fail);
        assert!(b.residual.as_deref().is_some_and(|r| r.contains("e1^e2^e3^e4")));
    }

    #[test]
    fn solve_recovers_the_unit_pairing() {
        let sc = parse_scenario(&su2("\"solve\""), "solve").unwrap();
        let sol = solve_pairing(&sc).unwrap();
        let vals: Vec<String> = sol.solution.unique().unwrap().iter().map(Scalar::render).collect();
        assert_eq!(vals, ["1", "0", "0", "1", "0", "1"]);
        assert!(run_checks(&sc, false).iter().all(|e| e.status == Status::Pass));
    }
}
