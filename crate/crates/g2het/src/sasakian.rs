//! G2-structures on the local 3-Sasakian model and their instantons.
//!
//! The vertical coframe `e5, e6, e7` is dual to the Reeb fields and
//! `e1..e4` is a transverse orthonormal coframe on which only the
//! self-dual forms `w_i^+` have known differentials.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::exterior::{DiffTable, ExtError, Form};
use crate::g2core::{instanton_check, torsion_forms, torsion_threeform, G2Error, G2Structure, Torsion};
use crate::gauge::{bianchi_residual, GaugeAlgebra, GaugeError, GaugeField};
use crate::liecat::{omega_minus, omega_plus, sasakian_local};
use crate::ring::{linear_rows, rat, LinearSolution, LinearSystem, ParamSet, Rational, RingError, Scalar};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SasError {
    #[error("block `{0}` is not an instanton for this structure")]
    NotInstanton(String),
    #[error("instanton system has no unique solution")]
    NoUniqueSolution,
    #[error("numeric value required, found `{0}`")]
    Symbolic(String),
    #[error(transparent)]
    G2(#[from] G2Error),
    #[error(transparent)]
    Gauge(#[from] GaugeError),
    #[error(transparent)]
    Ext(#[from] ExtError),
    #[error(transparent)]
    Ring(#[from] RingError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SasKind {
    /// The 3-Sasakian nearly parallel structure.
    Ts,
    /// The squashed nearly parallel structure.
    Np,
    /// `Ts` with the vertical frame rotated by `diag(-1,-1,1)`.
    TsHat,
    /// `Np` with the vertical frame rotated by `diag(-1,-1,1)`.
    NpHat,
}

impl SasKind {
    pub fn all() -> [SasKind; 4] {
        [SasKind::Ts, SasKind::Np, SasKind::TsHat, SasKind::NpHat]
    }
}

impl fmt::Display for SasKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SasKind::Ts => "ts",
            SasKind::Np => "np",
            SasKind::TsHat => "ts_hat",
            SasKind::NpHat => "np_hat",
        })
    }
}

impl FromStr for SasKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ts" => Ok(SasKind::Ts),
            "np" => Ok(SasKind::Np),
            "ts_hat" | "tshat" => Ok(SasKind::TsHat),
            "np_hat" | "nphat" => Ok(SasKind::NpHat),
            other => Err(format!("unknown structure kind `{other}` (ts|np|ts_hat|np_hat)")),
        }
    }
}

fn e(d: u64) -> Form {
    Form::e(7, d)
}

/// `e^{4+i} ^ w_i^+`.
fn ew(i: usize) -> Form {
    Form::gen(7, 3 + i) ^ omega_plus(i)
}

/// Pullback by the vertical rotation `e5 -> -e5, e6 -> -e6`.
fn hat(phi: &Form) -> Form {
    let images: Vec<Form> = (0..7).map(|i| if i == 4 || i == 5 { -Form::gen(7, i) } else { Form::gen(7, i) }).collect();
    phi.pullback(&images)
}

pub fn model() -> DiffTable {
    sasakian_local()
}

pub fn phi_of(kind: SasKind) -> Form {
    match kind {
        SasKind::Ts => e(567) + ew(1) + ew(2) - ew(3),
        SasKind::Np => e(567).scale_rat(&rat(-27, 125)) + (ew(1) + ew(2) + ew(3)).scale_rat(&rat(27, 25)),
        SasKind::TsHat => hat(&phi_of(SasKind::Ts)),
        SasKind::NpHat => hat(&phi_of(SasKind::Np)),
    }
}

pub fn build_structure(kind: SasKind) -> Result<G2Structure, SasError> {
    Ok(G2Structure::from_phi(phi_of(kind))?)
}

/// Torsion forms and the characteristic torsion 3-form.
pub fn structure_torsion(kind: SasKind) -> Result<(G2Structure, Torsion, Form), SasError> {
    let s = build_structure(kind)?;
    let tor = torsion_forms(&s, &model())?;
    let t = torsion_threeform(&s, &tor)?;
    Ok((s, tor, t))
}

/// `(e67, e75, e56)`.
pub fn vertical_squares() -> [Form; 3] {
    [e(67), -e(57), e(56)]
}

/// Curvature of `A = Y5 e5 + Y6 e6 + Y7 e7` for diagonal `C = diag(lambda)`.
pub fn ansatz_curvature(lambda: &[Scalar; 3]) -> Result<Vec<Form>, SasError> {
    let t = model();
    let sq = vertical_squares();
    (0..3).map(|k| Ok(t.d(&Form::gen(7, 4 + k))? + sq[k].scale(&lambda[k]))).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GaugeClass {
    Abelian,
    Su2,
    Sl2,
    /// Some but not all eigenvalues vanish.
    Degenerate,
}

impl fmt::Display for GaugeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GaugeClass::Abelian => "abelian",
            GaugeClass::Su2 => "su(2)",
            GaugeClass::Sl2 => "sl(2,R)",
            GaugeClass::Degenerate => "degenerate",
        })
    }
}

/// Isomorphism class of the Milnor-diagonal algebra `[Y6,Y7] = l5 Y5` (cyclic).
pub fn classify(lambda: &[Rational; 3]) -> GaugeClass {
    use num_traits::{Signed, Zero};
    let zeros = lambda.iter().filter(|x| x.is_zero()).count();
    match zeros {
        3 => GaugeClass::Abelian,
        0 => {
            let pos = lambda.iter().filter(|x| x.is_positive()).count();
            if pos == 0 || pos == 3 {
                GaugeClass::Su2
            } else {
                GaugeClass::Sl2
            }
        }
        _ => GaugeClass::Degenerate,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EigenSolution {
    pub lambda: [Rational; 3],
    pub class: GaugeClass,
}

/// Solves `(de^{4+k} + lambda_k e^2_k) ^ psi = 0` for the diagonal `C`.
pub fn solve_instanton_eigenvalues(kind: SasKind) -> Result<EigenSolution, SasError> {
    let s = build_structure(kind)?;
    let names = ["l5", "l6", "l7"];
    let p = ParamSet::builder().free(names[0]).free(names[1]).free(names[2]).build()?;
    let lambda: [Scalar; 3] = std::array::from_fn(|k| p.var(names[k]).expect("declared"));
    let f = ansatz_curvature(&lambda)?;
    let polys: Vec<Scalar> =
        f.iter().flat_map(|fk| fk.wedge(s.psi()).terms().map(|(_, c)| c.clone()).collect::<Vec<_>>()).collect();
    let mut sys = LinearSystem::new(names.iter().map(|n| n.to_string()).collect());
    sys.rows = linear_rows(&polys, &[0, 1, 2])?;
    let LinearSolution::Unique { values, .. } = sys.solve()? else { return Err(SasError::NoUniqueSolution) };
    let vals: Vec<Rational> = values
        .iter()
        .map(|v| v.as_rational().ok_or_else(|| SasError::Symbolic(v.render())))
        .collect::<Result<_, _>>()?;
    let lambda = [vals[0].clone(), vals[1].clone(), vals[2].clone()];
    Ok(EigenSolution { class: classify(&lambda), lambda })
}

/// `sum_k F_k ^ F_k` for the solved instanton, i.e. `r <F ^ F>` with pairing `r^-1 Id`.
pub fn unit_pairing_square(kind: SasKind) -> Result<Form, SasError> {
    let sol = solve_instanton_eigenvalues(kind)?;
    let f = ansatz_curvature(&sol.lambda.clone().map(Scalar::from_rational))?;
    Ok(f.iter().fold(Form::zero(7), |acc, fk| acc + fk.wedge(fk)))
}

/// `dT - [ -c r t <F^F>_{r^-1} + k t w1p^2 + 8/3 (1 - t) psi ]` with
/// `(c, k) = (1/6, 20/6)` for `ts` and `(27/50, 54/5)` for `np`.
pub fn dt_identity(kind: SasKind, t: &Scalar, r: &Scalar) -> Result<Form, SasError> {
    let (c, k) = match kind {
        SasKind::Ts => (rat(1, 6), rat(20, 6)),
        SasKind::Np => (rat(27, 50), rat(54, 5)),
        _ => return Err(SasError::Symbolic(format!("no t-identity for {kind}"))),
    };
    let rr = r.as_rational().filter(|x| *x != rat(0, 1)).ok_or_else(|| SasError::Symbolic(r.render()))?;
    let (s, _, tt) = structure_torsion(kind)?;
    let dt = model().d(&tt)?;
    // <F ^ F> with pairing r^-1 Id.
    let ff = unit_pairing_square(kind)?.scale_rat(&rr.recip());
    let w1 = omega_plus(1);
    let one_minus_t = Scalar::one() - t.clone();
    let rhs = ff.scale(&(r * t).scale(&-c))
        + w1.wedge(&w1).scale(&t.scale(&k))
        + s.psi().scale(&one_minus_t.scale(&rat(8, 3)));
    Ok(dt - rhs)
}

/// One gauge block of a product connection, with a scale applied to its pairing.
#[derive(Clone, Debug)]
pub enum BlockSpec {
    /// The vertical connection with `C = diag(lambda)` and the given pairing.
    Ansatz { lambda: [Scalar; 3], pairing: Vec<Vec<Scalar>>, scale: Scalar },
    /// The `SU(2)` block with curvature `(w1m, w2m, w3m)` and pairing `1/3 Id`.
    Asd { scale: Scalar },
    /// The `U(1)` block with curvature `k w1m` and unit pairing.
    Fs { k: Scalar, scale: Scalar },
    /// A block known only through its `<F ^ F>`.
    Declared { label: String, ff: Form, scale: Scalar },
}

impl BlockSpec {
    pub fn label(&self) -> String {
        match self {
            BlockSpec::Ansatz { .. } => "A".into(),
            BlockSpec::Asd { .. } => "ASD".into(),
            BlockSpec::Fs { k, .. } => format!("FS(k={})", k.render()),
            BlockSpec::Declared { label, .. } => label.clone(),
        }
    }

    pub fn scale(&self) -> &Scalar {
        match self {
            BlockSpec::Ansatz { scale, .. }
            | BlockSpec::Asd { scale }
            | BlockSpec::Fs { scale, .. }
            | BlockSpec::Declared { scale, .. } => scale,
        }
    }

    pub fn with_scale(&self, s: Scalar) -> BlockSpec {
        let mut b = self.clone();
        match &mut b {
            BlockSpec::Ansatz { scale, .. }
            | BlockSpec::Asd { scale }
            | BlockSpec::Fs { scale, .. }
            | BlockSpec::Declared { scale, .. } => *scale = s,
        }
        b
    }

    /// The unscaled gauge field.
    pub fn field(&self) -> Result<GaugeField, SasError> {
        let id = |x: Scalar| -> Vec<Vec<Scalar>> {
            (0..3).map(|i| (0..3).map(|j| if i == j { x.clone() } else { Scalar::zero() }).collect()).collect()
        };
        Ok(match self {
            BlockSpec::Ansatz { lambda, pairing, .. } => {
                let alg = GaugeAlgebra::diagonal(lambda.clone(), pairing.clone())?;
                let conn = (4..7).map(|i| Form::gen(7, i)).collect();
                GaugeField::from_connection("A", alg, conn, &model())?
            }
            BlockSpec::Asd { .. } => {
                let one = Scalar::one();
                let alg = GaugeAlgebra::diagonal([one.clone(), one.clone(), one], id(Scalar::from_frac(1, 3)))?;
                GaugeField::from_curvature("ASD", alg, (1..=3).map(omega_minus).collect())?
            }
            BlockSpec::Fs { k, .. } => {
                let alg = GaugeAlgebra::abelian(vec!["Y_FS".into()], vec![vec![Scalar::one()]])?;
                GaugeField::from_curvature(&self.label(), alg, vec![omega_minus(1).scale(k)])?
            }
            BlockSpec::Declared { label, ff, .. } => GaugeField::declared(label, ff.clone()),
        })
    }
}

/// The instanton connection of [`solve_instanton_eigenvalues`] with pairing `p Id`.
pub fn ansatz_block(kind: SasKind, p: Scalar, scale: Scalar) -> Result<BlockSpec, SasError> {
    let sol = solve_instanton_eigenvalues(kind)?;
    let pairing = (0..3).map(|i| (0..3).map(|j| if i == j { p.clone() } else { Scalar::zero() }).collect()).collect();
    Ok(BlockSpec::Ansatz { lambda: sol.lambda.map(Scalar::from_rational), pairing, scale })
}

/// The characteristic connection on the round sphere, through its stated `<F ^ F> = -32/27 psi_ts`.
pub fn characteristic_block(scale: Scalar) -> Result<BlockSpec, SasError> {
    let s = build_structure(SasKind::Ts)?;
    Ok(BlockSpec::Declared { label: "nabla_c".into(), ff: s.psi().scale_rat(&rat(-32, 27)), scale })
}

/// `dT - sum_b scale_b <F_b ^ F_b>` after checking each computable block is an instanton.
pub fn composite_bianchi(kind: SasKind, blocks: &[BlockSpec]) -> Result<Form, SasError> {
    let (s, _, t) = structure_torsion(kind)?;
    let mut fields = Vec::with_capacity(blocks.len());
    for b in blocks {
        let f = b.field()?;
        if !f.is_declared() && instanton_check(f.curvature()?, &s).is_err() {
            return Err(SasError::NotInstanton(b.label()));
        }
        fields.push(f.scaled(b.scale()));
    }
    Ok(bianchi_residual(&t, &fields, &model())?)
}

/// Solves for the scale of block `which` (its current scale is ignored) so
/// that the composite residual vanishes; `None` if no scalar works.
pub fn solve_block_scale(kind: SasKind, blocks: &[BlockSpec], which: usize) -> Result<Option<Scalar>, SasError> {
    let mut rest: Vec<BlockSpec> = blocks.to_vec();
    rest[which] = rest[which].with_scale(Scalar::zero());
    let r0 = composite_bianchi(kind, &rest)?;
    let ff = blocks[which].field()?.pairing_wedge();
    let Some((m, c)) = ff.terms().next() else { return Ok(r0.is_zero().then(Scalar::zero)) };
    let Some(x) = r0.coeff(m).div_exact(c) else { return Ok(None) };
    Ok((ff.scale(&x) == r0).then_some(x))
}
