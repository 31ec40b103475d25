//! SO(3)-rotated G2-structures on 2-step nilpotent algebras with a 3-dimensional
//! gauge connection built from the vertical coframe.
//!
//! The base table is `d e^{4+k} = sum_j A+[k][j] sigma_j^+ + A-[k][j] sigma_j^-`
//! over a flat 4-torus. The structure is
//! `phi = sum_i sigma_i^+ ^ E^{4+i} + E^{567}` with `E = B e`, and the
//! connection `A = Y5 e5 + Y6 e6 + Y7 e7` has curvature `F = de + C e^2`.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::exterior::{DiffTable, ExtError, Form};
use crate::g2core::{torsion_forms, torsion_threeform, G2Error, G2Structure};
use crate::gauge::{bianchi_residual, GaugeAlgebra, GaugeError, GaugeField, MatrixConnection, MatrixConnectionReport};
use crate::liecat::{build_general_table, sigma_minus, sigma_plus};
use crate::ring::{
    determinant, identity_rows, rat, rint, LinearSolution, LinearSystem, ParamSet, Rational, RingError, Scalar,
};

pub type Matrix = Vec<Vec<Scalar>>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NilError {
    #[error("B is not in SO(3)")]
    NotRotation,
    #[error("C is not diagonal")]
    NotDiagonal,
    #[error("scenario is not on the sl(2) branch: {0}")]
    WrongBranch(&'static str),
    #[error("numeric value required, found `{0}`")]
    Symbolic(String),
    #[error("internal identity failed: {0}")]
    Identity(&'static str),
    #[error(transparent)]
    G2(#[from] G2Error),
    #[error(transparent)]
    Gauge(#[from] GaugeError),
    #[error(transparent)]
    Ext(#[from] ExtError),
    #[error(transparent)]
    Ring(#[from] RingError),
}

fn e(d: u64) -> Form {
    Form::e(7, d)
}

pub fn identity3() -> Matrix {
    diag3([Scalar::one(), Scalar::one(), Scalar::one()])
}

pub fn diag3(v: [Scalar; 3]) -> Matrix {
    let [a, b, c] = v;
    let z = Scalar::zero;
    vec![vec![a, z(), z()], vec![z(), b, z()], vec![z(), z(), c]]
}

pub fn mat_mul(x: &[Vec<Scalar>], y: &[Vec<Scalar>]) -> Matrix {
    let n = x.len();
    let m = y[0].len();
    (0..n)
        .map(|i| (0..m).map(|j| (0..y.len()).fold(Scalar::zero(), |acc, k| acc + &x[i][k] * &y[k][j])).collect())
        .collect()
}

pub fn transpose(x: &[Vec<Scalar>]) -> Matrix {
    (0..x[0].len()).map(|j| x.iter().map(|r| r[j].clone()).collect()).collect()
}

pub fn scale_matrix(x: &[Vec<Scalar>], s: &Scalar) -> Matrix {
    x.iter().map(|r| r.iter().map(|v| v * s).collect()).collect()
}

pub fn is_diagonal(x: &[Vec<Scalar>]) -> bool {
    x.iter().enumerate().all(|(i, r)| r.iter().enumerate().all(|(j, v)| i == j || v.is_zero()))
}

pub fn rational_matrix(x: &[Vec<Rational>]) -> Matrix {
    x.iter().map(|r| r.iter().cloned().map(Scalar::from_rational).collect()).collect()
}

/// Rotation matrix of the integer quaternion `(w, x, y, z)`, scaled by its norm
/// so that all entries are rational.
pub fn cayley_rotation(q: [i64; 4]) -> Vec<Vec<Rational>> {
    let [w, x, y, z] = q;
    let n = w * w + x * x + y * y + z * z;
    assert!(n != 0, "zero quaternion");
    let raw = [
        [w * w + x * x - y * y - z * z, 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), w * w - x * x + y * y - z * z, 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), w * w - x * x - y * y + z * z],
    ];
    raw.iter().map(|r| r.iter().map(|&v| rat(v, n)).collect()).collect()
}

/// One instance of the ansatz: base table data, rotation, gauge matrix and pairing.
#[derive(Clone, Debug)]
pub struct NilScenario {
    pub delta: Scalar,
    pub eps: [Scalar; 3],
    pub aplus: Matrix,
    pub aminus: Matrix,
    pub b: Matrix,
    pub c: Matrix,
    pub pairing: Matrix,
}

impl NilScenario {
    /// Defaults: `A+ = delta Id`, `A- = diag(eps)`, `B = Id`, `C = -2 A+ B`, unit pairing.
    pub fn new(delta: Scalar, eps: [Scalar; 3]) -> NilScenario {
        let aplus = scale_matrix(&identity3(), &delta);
        let aminus = diag3(eps.clone());
        let mut sc = NilScenario { delta, eps, aplus, aminus, b: identity3(), c: identity3(), pairing: identity3() };
        sc.c = sc.instanton_c();
        sc
    }

    /// `B = diag(1, a, a)`, `C = -2 delta diag(1, a, a)`, pairing `alpha diag(gamma, 1, 1)`.
    pub fn branch(delta: Scalar, eps: [Scalar; 3], a: Scalar, gamma: Scalar, alpha: Scalar) -> NilScenario {
        let b = diag3([Scalar::one(), a.clone(), a]);
        let pairing = scale_matrix(&diag3([gamma, Scalar::one(), Scalar::one()]), &alpha);
        NilScenario::new(delta, eps).with_b(b).with_pairing(pairing)
    }

    /// The `SU(2)` solution: `B = Id`, `C = -2 delta Id`, unit pairing.
    pub fn su2(delta: Scalar, eps: [Scalar; 3]) -> NilScenario {
        NilScenario::branch(delta, eps, Scalar::one(), Scalar::one(), Scalar::one())
    }

    /// The `SL(2)` branch: `B = diag(1,-1,-1)`, `C = 2 delta diag(-1,1,1)`, pairing `1/3 diag(-1,1,1)`.
    pub fn sl2(delta: Scalar, eps: [Scalar; 3]) -> NilScenario {
        let m1 = Scalar::from_int(-1);
        NilScenario::branch(delta, eps, m1.clone(), m1, Scalar::from_frac(1, 3))
    }

    /// Replaces `B` and resets `C` to `-2 A+ B`.
    pub fn with_b(mut self, b: Matrix) -> NilScenario {
        self.b = b;
        self.c = self.instanton_c();
        self
    }

    pub fn with_c(mut self, c: Matrix) -> NilScenario {
        self.c = c;
        self
    }

    pub fn with_pairing(mut self, p: Matrix) -> NilScenario {
        self.pairing = p;
        self
    }

    /// Replaces `A+` and `A-`, keeping `B` and `C`.
    pub fn with_structure(mut self, aplus: Matrix, aminus: Matrix) -> NilScenario {
        self.aplus = aplus;
        self.aminus = aminus;
        self
    }

    /// `-2 A+ B`.
    pub fn instanton_c(&self) -> Matrix {
        scale_matrix(&mat_mul(&self.aplus, &self.b), &Scalar::from_int(-2))
    }

    pub fn table(&self) -> DiffTable {
        build_general_table(&self.aplus, &self.aminus)
    }

    /// `E = B e` on the vertical directions.
    pub fn big_e(&self) -> [Form; 3] {
        std::array::from_fn(|k| (0..3).fold(Form::zero(7), |acc, j| acc + Form::gen(7, 4 + j).scale(&self.b[k][j])))
    }

    fn is_rotation(&self) -> bool {
        mat_mul(&transpose(&self.b), &self.b) == identity3() && determinant(&self.b).is_one()
    }

    /// `F_k = d e^{4+k} + (C e^2)_k` with `e^2 = (e67, e75, e56)`.
    pub fn curvature(&self) -> Result<Vec<Form>, NilError> {
        let t = self.table();
        let e2 = [e(67), -e(57), e(56)];
        (0..3)
            .map(|k| {
                let mut f = t.d(&Form::gen(7, 4 + k))?;
                for (j, ej) in e2.iter().enumerate() {
                    f = f + ej.scale(&self.c[k][j]);
                }
                Ok(f)
            })
            .collect()
    }

    /// The connection as a gauge field; requires diagonal `C` (Milnor basis).
    pub fn gauge_field(&self) -> Result<GaugeField, NilError> {
        if !is_diagonal(&self.c) {
            return Err(NilError::NotDiagonal);
        }
        let lambda = [self.c[0][0].clone(), self.c[1][1].clone(), self.c[2][2].clone()];
        let alg = GaugeAlgebra::diagonal(lambda, self.pairing.clone())?;
        let conn = (4..7).map(|i| Form::gen(7, i)).collect();
        Ok(GaugeField::from_connection("A", alg, conn, &self.table())?)
    }
}

/// Builds the rotated structure and checks the identity metric, the dual
/// 4-form and `E^2 = B e^2`.
pub fn build_phi(sc: &NilScenario) -> Result<G2Structure, NilError> {
    if !sc.is_rotation() {
        return Err(NilError::NotRotation);
    }
    let big = sc.big_e();
    let mut phi = &(&big[0] ^ &big[1]) ^ &big[2];
    for (i, ei) in big.iter().enumerate() {
        phi = phi + (sigma_plus(i + 1) ^ ei);
    }
    let s = G2Structure::from_phi(phi)?;
    if !s.metric().is_identity() || !s.metric().vol_coeff().is_one() {
        return Err(NilError::Identity("metric of the rotated structure is the identity"));
    }
    let big2 = [&big[1] ^ &big[2], &big[2] ^ &big[0], &big[0] ^ &big[1]];
    let e2 = [e(67), -e(57), e(56)];
    for (k, b2) in big2.iter().enumerate() {
        let rhs = (0..3).fold(Form::zero(7), |acc, j| acc + e2[j].scale(&sc.b[k][j]));
        if *b2 != rhs {
            return Err(NilError::Identity("E^2 = B e^2"));
        }
    }
    let psi = (0..3).fold(e(1234), |acc, i| acc + (sigma_plus(i + 1) ^ &big2[i]));
    if s.psi() != &psi {
        return Err(NilError::Identity("psi = e1234 + sum sigma_i^+ ^ E^2_i"));
    }
    Ok(s)
}

/// Outcome of the instanton test, computed two independent ways.
#[derive(Clone, Debug)]
pub struct InstantonVerdict {
    /// `C == -2 A+ B` as a polynomial identity.
    pub matrix_test: bool,
    /// `F_k ^ psi == 0` for every component.
    pub wedge_test: bool,
    pub residuals: Vec<Form>,
}

impl InstantonVerdict {
    pub fn agree(&self) -> bool {
        self.matrix_test == self.wedge_test
    }

    pub fn is_instanton(&self) -> bool {
        self.wedge_test
    }
}

pub fn instanton_equivalence(sc: &NilScenario) -> Result<InstantonVerdict, NilError> {
    let s = build_phi(sc)?;
    let residuals: Vec<Form> = sc.curvature()?.iter().map(|f| f.wedge(s.psi())).collect();
    Ok(InstantonVerdict {
        matrix_test: sc.c == sc.instanton_c(),
        wedge_test: residuals.iter().all(Form::is_zero),
        residuals,
    })
}

#[derive(Clone, Debug)]
pub struct CoclosedVerdict {
    pub instanton: bool,
    pub coclosed: bool,
    pub dpsi: Form,
}

/// Reports `d psi` alongside the instanton test.
pub fn coclosed_consequence(sc: &NilScenario) -> Result<CoclosedVerdict, NilError> {
    let s = build_phi(sc)?;
    let inst = instanton_equivalence(sc)?;
    let dpsi = sc.table().d(s.psi())?;
    Ok(CoclosedVerdict { instanton: inst.is_instanton(), coclosed: dpsi.is_zero(), dpsi })
}

/// Torsion 3-form of the characteristic connection for the scenario's structure.
pub fn characteristic_torsion(sc: &NilScenario) -> Result<Form, NilError> {
    let s = build_phi(sc)?;
    let tor = torsion_forms(&s, &sc.table())?;
    Ok(torsion_threeform(&s, &tor)?)
}

/// `dT`, `<F ^ F>` and their difference.
#[derive(Clone, Debug)]
pub struct BianchiParts {
    pub dt: Form,
    pub ff: Form,
    pub residual: Form,
}

pub fn bianchi_parts(sc: &NilScenario) -> Result<BianchiParts, NilError> {
    let t = characteristic_torsion(sc)?;
    let table = sc.table();
    let dt = table.d(&t)?;
    let field = sc.gauge_field()?;
    let residual = bianchi_residual(&t, std::slice::from_ref(&field), &table)?;
    Ok(BianchiParts { ff: &dt - &residual, dt, residual })
}

/// Parameters of the symbolic branch catalog, in this order.
pub const CATALOG_PARAMS: [&str; 7] = ["delta", "eps1", "eps2", "eps3", "a", "gamma", "alpha"];

/// The branch scenario over symbolic `(delta, eps, a, gamma, alpha)` with `a`, `gamma` signs.
pub fn catalog_scenario() -> NilScenario {
    let p = ParamSet::builder()
        .free("delta")
        .free("eps1")
        .free("eps2")
        .free("eps3")
        .sign("a")
        .sign("gamma")
        .free("alpha")
        .build()
        .expect("distinct names");
    let v = |n: &str| p.var(n).expect("declared");
    NilScenario::branch(v("delta"), [v("eps1"), v("eps2"), v("eps3")], v("a"), v("gamma"), v("alpha"))
}

/// `dT - <F ^ F>` over the full symbolic branch family.
pub fn bianchi_catalog() -> Result<BianchiParts, NilError> {
    bianchi_parts(&catalog_scenario())
}

/// Sign branch `(a, gamma)` and the value of `alpha` (if any) making the
/// catalog residual vanish identically in `(delta, eps)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BranchSolution {
    pub a: i64,
    pub gamma: i64,
    pub alpha: Option<Rational>,
}

pub fn catalog_branches() -> Result<Vec<BranchSolution>, NilError> {
    let parts = bianchi_catalog()?;
    let (ia, ig, ial) = (4, 5, 6);
    let mut out = Vec::new();
    for a in [1i64, -1] {
        for gamma in [1i64, -1] {
            let subs: HashMap<usize, Scalar> = [(ia, Scalar::from_int(a)), (ig, Scalar::from_int(gamma))].into();
            let polys: Vec<Scalar> = parts.residual.terms().map(|(_, c)| c.substitute_many(&subs)).collect();
            let mut sys = LinearSystem::new(vec!["alpha".into()]);
            sys.rows = identity_rows(&polys, &[ial])?;
            let alpha = match sys.solve()? {
                LinearSolution::Unique { values, .. } => values[0].as_rational(),
                _ => None,
            };
            out.push(BranchSolution { a, gamma, alpha });
        }
    }
    Ok(out)
}

/// Solves for a general symmetric pairing `p` on the gauge algebra such that
/// `p` is ad-invariant and `dT = <F ^ F>_p` identically in the scenario's parameters.
pub fn solve_general_pairing(sc: &NilScenario) -> Result<(Vec<String>, LinearSolution), NilError> {
    let base = [&sc.delta, &sc.eps[0], &sc.eps[1], &sc.eps[2]]
        .iter()
        .find_map(|s| s.params().cloned())
        .unwrap_or_else(ParamSet::empty);
    let pairs: Vec<(usize, usize)> = (0..3).flat_map(|i| (i..3).map(move |j| (i, j))).collect();
    let names: Vec<String> = pairs.iter().map(|(i, j)| format!("p{}{}", i + 5, j + 5)).collect();
    let ext = base.extend_free(&names)?;
    let unknowns: Vec<usize> = names.iter().map(|n| ext.index(n).expect("extended")).collect();
    let mut p = vec![vec![Scalar::zero(); 3]; 3];
    for ((i, j), n) in pairs.iter().zip(&names) {
        let v = ext.var(n)?;
        p[*i][*j] = v.clone();
        p[*j][*i] = v;
    }
    let t = characteristic_torsion(sc)?;
    let dt = sc.table().d(&t)?;
    let f = sc.curvature()?;
    let mut ff = Form::zero(7);
    for a in 0..3 {
        for b in 0..3 {
            ff = ff + f[a].wedge(&f[b]).scale(&p[a][b]);
        }
    }
    let mut polys: Vec<Scalar> = (&dt - &ff).terms().map(|(_, c)| c.clone()).collect();
    if !is_diagonal(&sc.c) {
        return Err(NilError::NotDiagonal);
    }
    let alg = GaugeAlgebra::diagonal([sc.c[0][0].clone(), sc.c[1][1].clone(), sc.c[2][2].clone()], identity3())?;
    for z in 0..3 {
        for x in 0..3 {
            for y in x..3 {
                let mut acc = Scalar::zero();
                for k in 0..3 {
                    acc = acc + alg.bracket(z, x, k) * &p[k][y] + alg.bracket(z, y, k) * &p[x][k];
                }
                polys.push(acc);
            }
        }
    }
    let mut sys = LinearSystem::new(names.clone());
    sys.rows = identity_rows(&polys, &unknowns)?;
    Ok((names, sys.solve()?))
}

/// Requested signature of a diagonal pairing on the abelian algebra, as
/// `(positive, negative)` counts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Signature {
    PosDef,
    Mixed12,
    Mixed21,
    NegDef,
}

impl Signature {
    pub fn negative_count(self) -> usize {
        match self {
            Signature::PosDef => 0,
            Signature::Mixed21 => 1,
            Signature::Mixed12 => 2,
            Signature::NegDef => 3,
        }
    }

    pub fn all() -> [Signature; 4] {
        [Signature::PosDef, Signature::Mixed12, Signature::Mixed21, Signature::NegDef]
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Signature::PosDef => "posdef",
            Signature::Mixed12 => "mixed12",
            Signature::Mixed21 => "mixed21",
            Signature::NegDef => "negdef",
        })
    }
}

impl FromStr for Signature {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "posdef" => Ok(Signature::PosDef),
            "mixed12" => Ok(Signature::Mixed12),
            "mixed21" => Ok(Signature::Mixed21),
            "negdef" => Ok(Signature::NegDef),
            other => Err(format!("unknown signature `{other}` (posdef|mixed12|mixed21|negdef)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum AbelianPairing {
    /// Diagonal entries `r a_ii`.
    Pairing([Rational; 3]),
    /// No pairing of this signature exists; the witness explains why.
    Impossible { witness: String },
    /// All `eps` vanish: the torus is flat and every pairing works.
    FlatTorus,
}

/// Diagonal pairing of the requested signature with
/// `sum p_i eps_i^2 = sum eps_i^2`, which is the abelian Bianchi condition.
pub fn solve_abelian_pairing(eps: &[Scalar; 3], sig: Signature) -> Result<AbelianPairing, NilError> {
    let eps: Vec<Rational> =
        eps.iter().map(|x| x.as_rational().ok_or_else(|| NilError::Symbolic(x.render()))).collect::<Result<_, _>>()?;
    let sq: Vec<Rational> = eps.iter().map(|x| x * x).collect();
    let total: Rational = sq.iter().sum();
    if total.is_zero() {
        return Ok(AbelianPairing::FlatTorus);
    }
    let q = sig.negative_count();
    if q == 3 {
        return Ok(AbelianPairing::Impossible {
            witness: format!(
                "all p_i < 0 give sum p_i eps_i^2 <= 0 < {} = sum eps_i^2",
                crate::ring::render_rational(&total)
            ),
        });
    }
    // Positive slots go to the nonzero eps first so the positive part can absorb the target.
    let mut order: Vec<usize> = (0..3).collect();
    order.sort_by_key(|&i| sq[i].is_zero());
    let (pos, neg) = order.split_at(3 - q);
    let mut p = [rint(1), rint(1), rint(1)];
    let mut target = total.clone();
    for &i in neg {
        p[i] = rint(-1);
        target += &sq[i];
    }
    let pos_mass: Rational = pos.iter().map(|&i| sq[i].clone()).sum();
    for &i in pos {
        if !sq[i].is_zero() {
            p[i] = &target / &pos_mass;
        }
    }
    let lhs: Rational = (0..3).map(|i| &p[i] * &sq[i]).sum();
    let negatives = p.iter().filter(|x| x.is_negative()).count();
    if lhs != total || negatives != q {
        return Err(NilError::Identity("abelian pairing substitution"));
    }
    Ok(AbelianPairing::Pairing(p))
}

/// Full Bianchi residual of the abelian scenario `delta = 0` with a diagonal pairing.
pub fn abelian_residual(eps: &[Scalar; 3], pairing: &[Rational; 3]) -> Result<Form, NilError> {
    let z = Scalar::zero();
    let p = diag3(pairing.clone().map(Scalar::from_rational));
    let sc = NilScenario::new(z, eps.clone()).with_pairing(p);
    Ok(bianchi_parts(&sc)?.residual)
}

/// The `SL(2)` branch completed by a `U(1)` factor with curvature `sigma_1^-`.
#[derive(Clone, Debug)]
pub struct Supplement {
    pub field: GaugeField,
    pub u1: GaugeField,
    /// `|Y0|^2`, solved from the leftover `e1234` term.
    pub y0_squared: Scalar,
    pub residual_without: Form,
    pub residual: Form,
}

pub fn sl2_supplement(sc: &NilScenario) -> Result<Supplement, NilError> {
    let m1 = Scalar::from_int(-1);
    let one = Scalar::one();
    if sc.b != diag3([one.clone(), m1.clone(), m1.clone()]) {
        return Err(NilError::WrongBranch("B = diag(1,-1,-1)"));
    }
    let two_d = sc.delta.scale(&rint(2));
    if sc.c != diag3([-&two_d, two_d.clone(), two_d]) {
        return Err(NilError::WrongBranch("C = 2 delta diag(-1,1,1)"));
    }
    let third = Scalar::from_frac(1, 3);
    if sc.pairing != diag3([-&third, third.clone(), third]) {
        return Err(NilError::WrongBranch("pairing = 1/3 diag(-1,1,1)"));
    }
    let parts = bianchi_parts(sc)?;
    let r = parts.residual.coeff(0b1111);
    if parts.residual != e(1234).scale(&r) {
        return Err(NilError::Identity("sl(2) residual is a multiple of e1234"));
    }
    // sigma_1^- ^ sigma_1^- = -2 e1234.
    let y0_squared = r.scale(&rat(-1, 2));
    let alg = GaugeAlgebra::abelian(vec!["Y0".into()], vec![vec![y0_squared.clone()]])?;
    let u1 = GaugeField::from_curvature("U1", alg, vec![sigma_minus(1)])?;
    let field = sc.gauge_field()?;
    let t = characteristic_torsion(sc)?;
    let residual = bianchi_residual(&t, &[field.clone(), u1.clone()], &sc.table())?;
    Ok(Supplement { field, u1, y0_squared, residual_without: parts.residual, residual })
}

/// Characteristic connections written as tangent-bundle matrices on two ansatz algebras.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CharacteristicCase {
    /// `R + n_{3,2}`: `delta = 1`, `eps = (-1, 1, -1)`.
    RN32,
    /// Quaternionic Heisenberg: `delta = 1`, `eps = 0`.
    HH,
}

fn block1() -> [[Form; 3]; 3] {
    let z = || Form::zero(7);
    [[z(), e(6), e(5)], [-e(6), z(), -e(7)], [-e(5), e(7), z()]]
}

fn block2() -> [[Form; 3]; 3] {
    let z = || Form::zero(7);
    [[z(), e(7), -e(6)], [-e(7), z(), e(5)], [e(6), -e(5), z()]]
}

impl CharacteristicCase {
    pub fn scenario(self) -> NilScenario {
        let i = Scalar::from_int;
        match self {
            CharacteristicCase::RN32 => NilScenario::new(i(1), [i(-1), i(1), i(-1)]),
            CharacteristicCase::HH => NilScenario::new(i(1), [i(0), i(0), i(0)]),
        }
    }

    pub fn connection(self) -> MatrixConnection {
        let mut g = MatrixConnection::zero(7);
        let two = rint(2);
        let b2 = block2();
        for i in 0..3 {
            for j in 0..3 {
                g.gamma[4 + i][4 + j] = b2[i][j].scale_rat(&two);
            }
        }
        match self {
            CharacteristicCase::RN32 => {
                let b1 = block1();
                for i in 0..3 {
                    for j in 0..3 {
                        g.gamma[1 + i][1 + j] = b1[i][j].scale_rat(&two);
                    }
                }
            }
            CharacteristicCase::HH => {
                let z = || Form::zero(7);
                let h = [
                    [z(), -e(7), -e(5), e(6)],
                    [e(7), z(), e(6), e(5)],
                    [e(5), -e(6), z(), -e(7)],
                    [-e(6), -e(5), e(7), z()],
                ];
                for (i, row) in h.into_iter().enumerate() {
                    for (j, f) in row.into_iter().enumerate() {
                        g.gamma[i][j] = f;
                    }
                }
            }
        }
        g
    }

    /// All four matrix-connection checks against the structure's torsion 3-form.
    pub fn check(self) -> Result<MatrixConnectionReport, NilError> {
        let sc = self.scenario();
        let s = build_phi(&sc)?;
        let t = characteristic_torsion(&sc)?;
        Ok(crate::gauge::matrix_connection_check(&self.connection(), &s, &sc.table(), &t)?)
    }
}
