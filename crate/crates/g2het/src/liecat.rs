//! Named Lie algebras and frame models as differential tables.

use std::sync::Arc;

use thiserror::Error;

use crate::exterior::{Coframe, DiffTable, ExtError, Form, TransverseModel};
use crate::ring::{rat, rint, ParamSet, Rational, Scalar};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LieError {
    #[error("unknown catalog entry `{0}`")]
    Unknown(String),
    #[error("table has parametric coefficients")]
    Parametric,
    #[error("d^2 != 0 on `{0}`")]
    Jacobi(String),
    #[error(transparent)]
    Ext(#[from] ExtError),
}

#[derive(Clone, Debug)]
pub struct AlgebraEntry {
    pub name: String,
    pub dim: usize,
    pub table: DiffTable,
    pub label: &'static str,
}

pub const CATALOG: &[&str] =
    &["R7", "R2_h5", "R_h3C", "hH", "R_n32", "n73A", "n73B1", "n73C", "s3s3", "heisenberg_T6", "sasakian_local"];

fn e(d: u64) -> Form {
    Form::e(7, d)
}

/// Self-dual 2-forms on `e1..e4` (i = 1, 2, 3).
pub fn sigma_plus(i: usize) -> Form {
    match i {
        1 => e(13) - e(24),
        2 => -e(14) - e(23),
        3 => e(12) + e(34),
        _ => panic!("sigma index {i}"),
    }
}

/// Anti-self-dual 2-forms on `e1..e4` (i = 1, 2, 3).
pub fn sigma_minus(i: usize) -> Form {
    match i {
        1 => e(13) + e(24),
        2 => e(14) - e(23),
        3 => e(12) - e(34),
        _ => panic!("sigma index {i}"),
    }
}

/// Table in Salamon notation: `rows[k]` lists `(coefficient, digits)` terms of `d e^{k+1}`.
fn salamon(dim: usize, rows: &[&[(i64, u64)]]) -> DiffTable {
    let entries = rows
        .iter()
        .map(|row| row.iter().fold(Form::zero(dim), |acc, &(c, d)| acc + Form::e(dim, d).scale_rat(&rint(c))))
        .collect();
    DiffTable::complete(Arc::new(Coframe::standard(dim)), entries).expect("catalog table")
}

/// `d e^{4+i} = delta sigma_i^+ + eps_i sigma_i^-`, all other differentials zero.
pub fn build_ansatz_table(delta: &Scalar, eps: &[Scalar; 3]) -> DiffTable {
    let mut entries = vec![Form::zero(7); 7];
    for i in 0..3 {
        entries[4 + i] = sigma_plus(i + 1).scale(delta) + sigma_minus(i + 1).scale(&eps[i]);
    }
    DiffTable::complete(Arc::new(Coframe::standard(7)), entries).expect("ansatz table")
}

/// General nilpotent ansatz `d e^{4+k} = sum_j A+[k][j] sigma_j^+ + A-[k][j] sigma_j^-`.
pub fn build_general_table(aplus: &[Vec<Scalar>], aminus: &[Vec<Scalar>]) -> DiffTable {
    let mut entries = vec![Form::zero(7); 7];
    for k in 0..3 {
        for j in 0..3 {
            entries[4 + k] = &entries[4 + k] + &sigma_plus(j + 1).scale(&aplus[k][j]);
            entries[4 + k] = &entries[4 + k] + &sigma_minus(j + 1).scale(&aminus[k][j]);
        }
    }
    DiffTable::complete(Arc::new(Coframe::standard(7)), entries).expect("ansatz table")
}

/// `d e7 = a e12 + b e34 + c e56` over the torus `e1..e6`.
pub fn heisenberg_t6(a: &Scalar, b: &Scalar, c: &Scalar) -> DiffTable {
    let mut entries = vec![Form::zero(7); 7];
    entries[6] = e(12).scale(a) + e(34).scale(b) + e(56).scale(c);
    DiffTable::complete(Arc::new(Coframe::standard(7)), entries).expect("heisenberg table")
}

/// Left-invariant coframe of `S^3 x S^3` in the product basis `e1..e6`.
pub fn s3s3_table() -> DiffTable {
    salamon(6, &[&[(-2, 23)], &[(2, 13)], &[(-2, 12)], &[(-2, 56)], &[(2, 46)], &[(-2, 45)]])
}

/// Change of basis `f^{2i-1} = (e^i - e^{i+3})/2`, `f^{2i} = (e^i + e^{i+3})/2`.
pub fn s3s3_f_matrix() -> Vec<Vec<Rational>> {
    let mut m = vec![vec![rint(0); 6]; 6];
    for i in 0..3 {
        m[2 * i][i] = rat(1, 2);
        m[2 * i][i + 3] = rat(-1, 2);
        m[2 * i + 1][i] = rat(1, 2);
        m[2 * i + 1][i + 3] = rat(1, 2);
    }
    m
}

/// The `S^3 x S^3` table rewritten in the `f` coframe.
pub fn s3s3_f_table() -> DiffTable {
    let names: Vec<String> = (1..=6).map(|i| format!("f{i}")).collect();
    s3s3_table().change_basis(&s3s3_f_matrix(), Arc::new(Coframe::new(&names))).expect("invertible change of basis")
}

/// Sasakian auxiliary 2-forms on the transverse block `e1..e4`.
pub fn omega_plus(i: usize) -> Form {
    match i {
        1 => e(12) + e(34),
        2 => e(13) - e(24),
        3 => e(14) + e(23),
        _ => panic!("omega index {i}"),
    }
}

pub fn omega_minus(i: usize) -> Form {
    match i {
        1 => e(12) - e(34),
        2 => e(13) + e(24),
        3 => e(14) - e(23),
        _ => panic!("omega index {i}"),
    }
}

pub fn sasakian_coframe() -> Coframe {
    let mut cf = Coframe::standard(7);
    for i in 1..=3 {
        cf = cf.with_alias(&format!("w{i}p"), omega_plus(i));
        cf = cf.with_alias(&format!("w{i}m"), omega_minus(i));
    }
    cf.with_alias("nu4", e(1234))
}

/// Local model of a 3-Sasakian 7-manifold: `e5, e6, e7` vertical, `e1..e4` transverse.
pub fn sasakian_local() -> DiffTable {
    let two = |f: Form| f.scale_rat(&rint(2));
    let (w1, w2, w3) = (omega_plus(1), omega_plus(2), omega_plus(3));
    let mut entries: Vec<Option<Form>> = vec![None; 7];
    entries[4] = Some(two(e(67) + &w1));
    entries[5] = Some(two(-e(57) + &w2));
    entries[6] = Some(two(e(56) + &w3));
    let dw1 = two((e(6) ^ &w3) - (e(7) ^ &w2));
    let dw2 = two((e(7) ^ &w1) - (e(5) ^ &w3));
    let dw3 = two((e(5) ^ &w2) - (e(6) ^ &w1));
    let mut basis = vec![
        ("w1p".to_string(), w1, Some(dw1)),
        ("w2p".to_string(), w2, Some(dw2)),
        ("w3p".to_string(), w3, Some(dw3)),
    ];
    for i in 1..=3 {
        basis.push((format!("w{i}m"), omega_minus(i), None));
    }
    let tm = TransverseModel::new(&[0, 1, 2, 3], basis, vec![4]).expect("omega basis");
    DiffTable::new(Arc::new(sasakian_coframe()), entries).expect("sasakian table").with_transverse(tm)
}

/// Catalog lookup; `heisenberg_T6` is returned with symbolic `a, b, c`.
pub fn lookup(name: &str) -> Result<AlgebraEntry, LieError> {
    let (table, label) = match name {
        "R7" => (DiffTable::abelian(7), "abelian R^7"),
        "R2_h5" => (salamon(7, &[&[], &[], &[], &[], &[], &[], &[(1, 12), (1, 34)]]), "R^2 + h_5"),
        "R_h3C" => (
            salamon(7, &[&[], &[], &[], &[], &[], &[(1, 12), (-1, 34)], &[(1, 13), (1, 24)]]),
            "R + complex Heisenberg h_3^C",
        ),
        "hH" => (
            salamon(7, &[&[], &[], &[], &[], &[(1, 12), (-1, 34)], &[(1, 13), (1, 24)], &[(1, 14), (-1, 23)]]),
            "quaternionic Heisenberg h_H",
        ),
        "R_n32" => (salamon(7, &[&[], &[], &[], &[], &[(1, 12)], &[(1, 13)], &[(1, 23)]]), "n_{6,3} + R = n_{3,2} + R"),
        "n73A" => (salamon(7, &[&[], &[], &[], &[], &[(1, 12)], &[(1, 23)], &[(1, 24)]]), "n_{7,3,A}"),
        "n73B1" => {
            (salamon(7, &[&[], &[], &[], &[], &[(1, 13), (1, 23)], &[(1, 12), (-1, 34)], &[(1, 14)]]), "n_{7,3,B1}")
        }
        "n73C" => (salamon(7, &[&[], &[], &[], &[], &[(1, 12), (1, 34)], &[(1, 23)], &[(1, 24)]]), "n_{7,3,C}"),
        "s3s3" => (s3s3_table(), "S^3 x S^3 left-invariant coframe"),
        "heisenberg_T6" => {
            let p = ParamSet::builder().free("a").free("b").free("c").build().expect("params");
            let v = |n: &str| p.var(n).expect("param");
            (heisenberg_t6(&v("a"), &v("b"), &v("c")), "circle bundle over T^6 with d eta = a e12 + b e34 + c e56")
        }
        "sasakian_local" => (sasakian_local(), "3-Sasakian local structure equations"),
        other => return Err(LieError::Unknown(other.to_string())),
    };
    if let Err((g, _)) = table.d_squared_check() {
        return Err(LieError::Jacobi(g));
    }
    Ok(AlgebraEntry { name: name.to_string(), dim: table.dim(), table, label })
}

/// Whether a parameter-free table has rational structure constants.
pub fn rationality_check(t: &DiffTable) -> Result<bool, LieError> {
    if !t.is_rational() {
        return Err(LieError::Parametric);
    }
    Ok(true)
}
