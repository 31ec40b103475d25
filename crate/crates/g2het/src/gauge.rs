//! Gauge algebras, gauge fields and their curvature pairings, plus matrix
//! connections on the tangent frame.

use thiserror::Error;

use crate::exterior::{mask_indices, DiffTable, ExtError, Form};
use crate::g2core::G2Structure;
use crate::ring::{rat, Rational, Scalar};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GaugeError {
    #[error("pairing is not symmetric")]
    AsymmetricPairing,
    #[error("bracket is not antisymmetric")]
    AsymmetricBracket,
    #[error("connection data missing: field only declares curvature pairings")]
    DeclaredOnly,
    #[error("expected {expected} components, found {found}")]
    Arity { expected: usize, found: usize },
    #[error(transparent)]
    Ext(#[from] ExtError),
}

/// Lie algebra with structure constants `[Y_a, Y_b] = sum_c c[a][b][c] Y_c` and a pairing.
#[derive(Clone, Debug)]
pub struct GaugeAlgebra {
    names: Vec<String>,
    brackets: Vec<Vec<Vec<Scalar>>>,
    pairing: Vec<Vec<Scalar>>,
}

impl GaugeAlgebra {
    pub fn new(
        names: Vec<String>,
        brackets: Vec<Vec<Vec<Scalar>>>,
        pairing: Vec<Vec<Scalar>>,
    ) -> Result<GaugeAlgebra, GaugeError> {
        let n = names.len();
        if brackets.len() != n || pairing.len() != n {
            return Err(GaugeError::Arity { expected: n, found: brackets.len().min(pairing.len()) });
        }
        for a in 0..n {
            for b in 0..n {
                if pairing[a][b] != pairing[b][a] {
                    return Err(GaugeError::AsymmetricPairing);
                }
                for c in 0..n {
                    if brackets[a][b][c] != -&brackets[b][a][c] {
                        return Err(GaugeError::AsymmetricBracket);
                    }
                }
            }
        }
        Ok(GaugeAlgebra { names, brackets, pairing })
    }

    /// Abelian algebra of dimension `n`.
    pub fn abelian(names: Vec<String>, pairing: Vec<Vec<Scalar>>) -> Result<GaugeAlgebra, GaugeError> {
        let n = names.len();
        GaugeAlgebra::new(names, vec![vec![vec![Scalar::zero(); n]; n]; n], pairing)
    }

    /// Three-dimensional algebra in a Milnor basis:
    /// `[Y2,Y3] = l1 Y1`, `[Y3,Y1] = l2 Y2`, `[Y1,Y2] = l3 Y3`.
    pub fn diagonal(lambda: [Scalar; 3], pairing: Vec<Vec<Scalar>>) -> Result<GaugeAlgebra, GaugeError> {
        let mut c = vec![vec![vec![Scalar::zero(); 3]; 3]; 3];
        for k in 0..3 {
            let (i, j) = ((k + 1) % 3, (k + 2) % 3);
            c[i][j][k] = lambda[k].clone();
            c[j][i][k] = -&lambda[k];
        }
        let names = (1..=3).map(|i| format!("Y{i}")).collect();
        GaugeAlgebra::new(names, c, pairing)
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn pairing(&self) -> &[Vec<Scalar>] {
        &self.pairing
    }

    pub fn bracket(&self, a: usize, b: usize, c: usize) -> &Scalar {
        &self.brackets[a][b][c]
    }

    pub fn is_abelian(&self) -> bool {
        self.brackets.iter().flatten().flatten().all(Scalar::is_zero)
    }

    pub fn with_pairing(&self, pairing: Vec<Vec<Scalar>>) -> Result<GaugeAlgebra, GaugeError> {
        GaugeAlgebra::new(self.names.clone(), self.brackets.clone(), pairing)
    }

    pub fn scale_pairing(&self, s: &Scalar) -> GaugeAlgebra {
        let pairing = self.pairing.iter().map(|r| r.iter().map(|x| x * s).collect()).collect();
        GaugeAlgebra { names: self.names.clone(), brackets: self.brackets.clone(), pairing }
    }

    /// First triple `(z, x, y)` with `<[Z,X],Y> + <X,[Z,Y]> != 0`, if any.
    pub fn ad_invariance_check(&self) -> Result<(), (usize, usize, usize)> {
        let n = self.dim();
        for z in 0..n {
            for x in 0..n {
                for y in 0..n {
                    let mut acc = Scalar::zero();
                    for c in 0..n {
                        acc = acc + &self.brackets[z][x][c] * &self.pairing[c][y];
                        acc = acc + &self.brackets[z][y][c] * &self.pairing[x][c];
                    }
                    if !acc.is_zero() {
                        return Err((z, x, y));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn jacobi_check(&self) -> bool {
        let n = self.dim();
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for out in 0..n {
                        let mut acc = Scalar::zero();
                        for (x, y, z) in [(a, b, c), (b, c, a), (c, a, b)] {
                            // [[x,y],z]
                            for m in 0..n {
                                acc = acc + &self.brackets[x][y][m] * &self.brackets[m][z][out];
                            }
                        }
                        if !acc.is_zero() {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }
}

/// Connection (or bare curvature) valued in a gauge algebra.
#[derive(Clone, Debug)]
pub struct GaugeField {
    pub label: String,
    algebra: Option<GaugeAlgebra>,
    connection: Option<Vec<Form>>,
    curvature: Vec<Form>,
    declared_ff: Option<Form>,
}

impl GaugeField {
    /// Curvature `F_a = d alpha_a + 1/2 sum c_bc^a alpha_b ^ alpha_c`.
    pub fn from_connection(
        label: &str,
        algebra: GaugeAlgebra,
        connection: Vec<Form>,
        t: &DiffTable,
    ) -> Result<GaugeField, GaugeError> {
        let n = algebra.dim();
        if connection.len() != n {
            return Err(GaugeError::Arity { expected: n, found: connection.len() });
        }
        let half = rat(1, 2);
        let mut curvature = Vec::with_capacity(n);
        for a in 0..n {
            let mut f = t.d(&connection[a])?;
            for b in 0..n {
                for c in 0..n {
                    let k = algebra.bracket(b, c, a);
                    if !k.is_zero() {
                        f = f + connection[b].wedge(&connection[c]).scale(&k.scale(&half));
                    }
                }
            }
            curvature.push(f);
        }
        Ok(GaugeField {
            label: label.to_string(),
            algebra: Some(algebra),
            connection: Some(connection),
            curvature,
            declared_ff: None,
        })
    }

    /// Abstract block given by its curvature components only.
    pub fn from_curvature(label: &str, algebra: GaugeAlgebra, curvature: Vec<Form>) -> Result<GaugeField, GaugeError> {
        if curvature.len() != algebra.dim() {
            return Err(GaugeError::Arity { expected: algebra.dim(), found: curvature.len() });
        }
        Ok(GaugeField {
            label: label.to_string(),
            algebra: Some(algebra),
            connection: None,
            curvature,
            declared_ff: None,
        })
    }

    /// Block known only through its curvature pairing `<F ^ F>`.
    pub fn declared(label: &str, ff: Form) -> GaugeField {
        GaugeField {
            label: label.to_string(),
            algebra: None,
            connection: None,
            curvature: Vec::new(),
            declared_ff: Some(ff),
        }
    }

    pub fn algebra(&self) -> Option<&GaugeAlgebra> {
        self.algebra.as_ref()
    }

    pub fn connection(&self) -> Option<&[Form]> {
        self.connection.as_deref()
    }

    pub fn is_declared(&self) -> bool {
        self.declared_ff.is_some()
    }

    pub fn curvature(&self) -> Result<&[Form], GaugeError> {
        if self.declared_ff.is_some() {
            return Err(GaugeError::DeclaredOnly);
        }
        Ok(&self.curvature)
    }

    /// Same field with the pairing (or declared 4-form) multiplied by `s`.
    pub fn scaled(&self, s: &Scalar) -> GaugeField {
        let mut out = self.clone();
        out.algebra = self.algebra.as_ref().map(|a| a.scale_pairing(s));
        out.declared_ff = self.declared_ff.as_ref().map(|f| f.scale(s));
        out
    }

    pub fn with_pairing(&self, pairing: Vec<Vec<Scalar>>) -> Result<GaugeField, GaugeError> {
        let mut out = self.clone();
        if let Some(a) = &self.algebra {
            out.algebra = Some(a.with_pairing(pairing)?);
        }
        Ok(out)
    }

    /// `sum_{a,b} <Y_a, Y_b> F_a ^ F_b`, or the declared 4-form.
    pub fn pairing_wedge(&self) -> Form {
        if let Some(ff) = &self.declared_ff {
            return ff.clone();
        }
        let alg = self.algebra.as_ref().expect("non-declared field has an algebra");
        let n = alg.dim();
        let dim = self.curvature.first().map(|f| f.dim()).unwrap_or(7);
        let mut acc = Form::zero(dim);
        for a in 0..n {
            for b in 0..n {
                let p = &alg.pairing()[a][b];
                if !p.is_zero() {
                    acc = acc + self.curvature[a].wedge(&self.curvature[b]).scale(p);
                }
            }
        }
        acc
    }
}

/// `<F ^ F>` summed over a direct sum of blocks.
pub fn total_pairing_wedge(blocks: &[GaugeField], dim: usize) -> Form {
    blocks.iter().fold(Form::zero(dim), |acc, b| acc + b.pairing_wedge())
}

/// `dT - sum_blocks <F ^ F>`.
pub fn bianchi_residual(torsion: &Form, blocks: &[GaugeField], t: &DiffTable) -> Result<Form, GaugeError> {
    Ok(t.d(torsion)? - total_pairing_wedge(blocks, torsion.dim()))
}

/// Square matrix of 1-forms `Gamma[i][j]` acting by `e^i -> Gamma^i_j ^ e^j`.
#[derive(Clone, Debug)]
pub struct MatrixConnection {
    pub gamma: Vec<Vec<Form>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MatrixConnectionReport {
    pub skew: bool,
    pub preserves_phi: bool,
    pub torsion_matches: bool,
    pub curvature_instanton: bool,
    pub torsion: Form,
}

impl MatrixConnectionReport {
    pub fn all_pass(&self) -> bool {
        self.skew && self.preserves_phi && self.torsion_matches && self.curvature_instanton
    }
}

/// Factor `c` in `T = c * sum_i (de^i + Gamma^i_j ^ e^j) ^ e^i`; fixed on the
/// `R + n_{3,2}` characteristic connection (see the matrix connection tests).
pub fn torsion_factor() -> Rational {
    rat(1, 3)
}

impl MatrixConnection {
    pub fn zero(n: usize) -> MatrixConnection {
        MatrixConnection { gamma: vec![vec![Form::zero(n); n]; n] }
    }

    pub fn dim(&self) -> usize {
        self.gamma.len()
    }

    pub fn is_skew(&self) -> bool {
        let n = self.dim();
        (0..n).all(|i| (0..n).all(|j| (&self.gamma[i][j] + &self.gamma[j][i]).is_zero()))
    }

    /// `sum_i (de^i + Gamma^i_j ^ e^j) ^ e^i` before normalization.
    pub fn raw_torsion(&self, t: &DiffTable) -> Result<Form, GaugeError> {
        let n = self.dim();
        let mut acc = Form::zero(n);
        for i in 0..n {
            let mut ti = t.d(&Form::gen(n, i))?;
            for j in 0..n {
                ti = ti + self.gamma[i][j].wedge(&Form::gen(n, j));
            }
            acc = acc + ti.wedge(&Form::gen(n, i));
        }
        Ok(acc)
    }

    /// `R^i_j = d Gamma^i_j + sum_k Gamma^i_k ^ Gamma^k_j`.
    pub fn curvature(&self, t: &DiffTable) -> Result<Vec<Vec<Form>>, GaugeError> {
        let n = self.dim();
        let mut out = vec![vec![Form::zero(n); n]; n];
        for i in 0..n {
            for j in 0..n {
                let mut r = t.d(&self.gamma[i][j])?;
                for k in 0..n {
                    r = r + self.gamma[i][k].wedge(&self.gamma[k][j]);
                }
                out[i][j] = r;
            }
        }
        Ok(out)
    }

    /// Derivation action of `Gamma(e_k)` on a form: each slot `e^i` becomes `sum_j Gamma^i_j(e_k) e^j`.
    pub fn act(&self, k: usize, a: &Form) -> Form {
        let n = self.dim();
        let images: Vec<Form> = (0..n)
            .map(|i| {
                let mut f = Form::zero(n);
                for j in 0..n {
                    let c = self.gamma[i][j].coeff(1 << k);
                    if !c.is_zero() {
                        f = f + Form::gen(n, j).scale(&c);
                    }
                }
                f
            })
            .collect();
        let mut out = Form::zero(n);
        for (m, c) in a.terms() {
            let idx = mask_indices(m);
            for p in 0..idx.len() {
                let mut term = Form::constant(n, c.clone());
                for (q, &i) in idx.iter().enumerate() {
                    term = if q == p { term.wedge(&images[i]) } else { term.wedge(&Form::gen(n, i)) };
                }
                out = out + term;
            }
        }
        out
    }
}

/// Checks metric compatibility, `nabla phi = 0`, the torsion identity and the curvature instanton condition.
pub fn matrix_connection_check(
    g: &MatrixConnection,
    s: &G2Structure,
    t: &DiffTable,
    expected_torsion: &Form,
) -> Result<MatrixConnectionReport, GaugeError> {
    let n = g.dim();
    let skew = g.is_skew();
    let preserves_phi = (0..n).all(|k| g.act(k, s.phi()).is_zero());
    let torsion = g.raw_torsion(t)?.scale_rat(&torsion_factor());
    let torsion_matches = &torsion == expected_torsion;
    let curv = g.curvature(t)?;
    let curvature_instanton = curv.iter().flatten().all(|r| r.wedge(s.psi()).is_zero());
    Ok(MatrixConnectionReport { skew, preserves_phi, torsion_matches, curvature_instanton, torsion })
}

/// The scalar `c` with `c * raw_torsion = expected`, when one exists.
pub fn calibrate_torsion_factor(
    g: &MatrixConnection,
    t: &DiffTable,
    expected: &Form,
) -> Result<Option<Rational>, GaugeError> {
    let raw = g.raw_torsion(t)?;
    let Some((m, c)) = raw.terms().next() else { return Ok(None) };
    let Some(rc) = c.as_rational() else { return Ok(None) };
    let Some(re) = expected.coeff(m).as_rational() else { return Ok(None) };
    let factor = re / rc;
    Ok((raw.scale_rat(&factor) == *expected).then_some(factor))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::g2core::{standard_phi, torsion_forms, torsion_threeform};
    use crate::liecat::build_ansatz_table;
    use crate::ring::{rint, ParamSet};

    fn diag(v: [i64; 3]) -> Vec<Vec<Scalar>> {
        (0..3).map(|i| (0..3).map(|j| if i == j { Scalar::from_int(v[i]) } else { Scalar::zero() }).collect()).collect()
    }

    #[test]
    fn ad_invariance_examples() {
        let su2 = GaugeAlgebra::diagonal([1.into(), 1.into(), 1.into()], diag([1, 1, 1])).unwrap();
        assert!(su2.ad_invariance_check().is_ok());
        assert!(su2.jacobi_check());
        let sl2 = GaugeAlgebra::diagonal([(-6).into(), (-6).into(), 2.into()], diag([1, 1, 1])).unwrap();
        assert!(sl2.ad_invariance_check().is_err());
        let ab = GaugeAlgebra::abelian(
            vec!["X".into(), "Y".into()],
            vec![vec![2.into(), 1.into()], vec![1.into(), Scalar::from_int(-5)]],
        )
        .unwrap();
        assert!(ab.ad_invariance_check().is_ok());
    }

    #[test]
    fn milnor_pairing_is_invariant_symbolically() {
        let p = ParamSet::builder().free("l5").free("l6").free("l7").build().unwrap();
        let l: Vec<Scalar> = ["l5", "l6", "l7"].iter().map(|n| p.var(n).unwrap()).collect();
        let mut pairing = vec![vec![Scalar::zero(); 3]; 3];
        pairing[0][0] = &l[1] * &l[2];
        pairing[1][1] = &l[0] * &l[2];
        pairing[2][2] = &l[0] * &l[1];
        let alg = GaugeAlgebra::diagonal([l[0].clone(), l[1].clone(), l[2].clone()], pairing).unwrap();
        assert!(alg.ad_invariance_check().is_ok());
        assert!(alg.jacobi_check());
    }

    #[test]
    fn abelian_curvature_is_differential() {
        let t = build_ansatz_table(&Scalar::one(), &[Scalar::zero(), Scalar::zero(), Scalar::zero()]);
        let alg = GaugeAlgebra::abelian(vec!["Y".into()], vec![vec![Scalar::one()]]).unwrap();
        let f = GaugeField::from_connection("u1", alg, vec![Form::gen(7, 4)], &t).unwrap();
        assert_eq!(f.curvature().unwrap()[0], t.entry(4).unwrap().clone());
    }

    #[test]
    fn pairing_scales_linearly() {
        let t = build_ansatz_table(&Scalar::one(), &[Scalar::one(), Scalar::zero(), Scalar::zero()]);
        let alg = GaugeAlgebra::diagonal([(-2).into(), (-2).into(), (-2).into()], diag([1, 1, 1])).unwrap();
        let conn: Vec<Form> = (4..7).map(|i| Form::gen(7, i)).collect();
        let f = GaugeField::from_connection("su2", alg, conn, &t).unwrap();
        let ff = f.pairing_wedge();
        assert_eq!(f.scaled(&Scalar::from_int(3)).pairing_wedge(), ff.scale_rat(&rint(3)));
        let decl = GaugeField::declared("c", ff.clone());
        assert!(decl.curvature().is_err());
        assert_eq!(decl.scaled(&Scalar::from_int(-1)).pairing_wedge(), -ff);
    }

    #[test]
    fn flat_zero_connection_passes() {
        let s = G2Structure::from_phi(standard_phi()).unwrap();
        let t = DiffTable::abelian(7);
        let tor = torsion_forms(&s, &t).unwrap();
        let tt = torsion_threeform(&s, &tor).unwrap();
        let r = matrix_connection_check(&MatrixConnection::zero(7), &s, &t, &tt).unwrap();
        assert!(r.all_pass());
    }
}
