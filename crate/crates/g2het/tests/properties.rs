//! Randomized identities of the engine, 200 cases each.

use g2het::exterior::{DiffTable, Form};
use g2het::g2core::{standard_phi, torsion_forms, torsion_threeform, G2Structure};
use g2het::liecat::{lookup, CATALOG};
use g2het::nilansatz::{
    build_phi, cayley_rotation, diag3, mat_mul, rational_matrix, scale_matrix, transpose, NilScenario,
};
use g2het::ring::{rat, Rational, Scalar};
use proptest::prelude::*;
use proptest::sample::subsequence;

fn config() -> ProptestConfig {
    ProptestConfig { cases: 200, ..ProptestConfig::default() }
}

fn rational() -> impl Strategy<Value = Rational> {
    (-6i64..=6, 1i64..=4).prop_map(|(n, d)| rat(n, d))
}

fn nonzero_rational() -> impl Strategy<Value = Rational> {
    (prop_oneof![-6i64..=-1, 1i64..=6], 1i64..=4).prop_map(|(n, d)| rat(n, d))
}

fn form(dim: usize, k: usize) -> impl Strategy<Value = Form> {
    prop::collection::vec((subsequence((0..dim).collect::<Vec<_>>(), k), rational()), 1..5).prop_map(move |terms| {
        terms.into_iter().fold(Form::zero(dim), |acc, (idx, c)| acc + Form::mono(dim, &idx).scale_rat(&c))
    })
}

fn any_form(dim: usize) -> impl Strategy<Value = Form> {
    (0..=dim).prop_flat_map(move |k| form(dim, k))
}

fn quaternion() -> impl Strategy<Value = [i64; 4]> {
    prop::array::uniform4(-4i64..=4).prop_filter("nonzero", |q| q.iter().any(|&x| x != 0))
}

/// A generic `G2`-structure: the standard 3-form pulled back by an invertible integer matrix.
fn g2_structure() -> impl Strategy<Value = G2Structure> {
    prop::collection::vec(prop::collection::vec(-2i64..=2, 7), 7).prop_filter_map("degenerate", |p| {
        let images: Vec<Form> = p
            .iter()
            .map(|row| {
                row.iter().enumerate().fold(Form::zero(7), |acc, (j, &x)| acc + Form::gen(7, j).scale_rat(&rat(x, 1)))
            })
            .collect();
        G2Structure::from_phi(standard_phi().pullback(&images)).ok()
    })
}

fn catalog_tables() -> Vec<DiffTable> {
    CATALOG.iter().filter(|n| **n != "sasakian_local").map(|n| lookup(n).unwrap().table).collect()
}

/// Ansatz with `A+ = delta D B^T`, so that `C = -2 delta D` is diagonal, and a full `A-`.
fn ansatz(full_aminus: bool) -> impl Strategy<Value = NilScenario> {
    (
        nonzero_rational(),
        prop::array::uniform3(rational()),
        quaternion(),
        prop::array::uniform3(nonzero_rational()),
        prop::collection::vec(rational(), 9),
    )
        .prop_map(move |(d, eps, q, dd, am)| {
            let d = Scalar::from_rational(d);
            let eps = eps.map(Scalar::from_rational);
            let b = rational_matrix(&cayley_rotation(q));
            let dm = diag3(dd.map(Scalar::from_rational));
            let aplus = scale_matrix(&mat_mul(&dm, &transpose(&b)), &d);
            let aminus = if full_aminus {
                am.chunks(3).map(|r| r.iter().cloned().map(Scalar::from_rational).collect()).collect()
            } else {
                diag3(eps.clone())
            };
            NilScenario::new(d, eps).with_structure(aplus, aminus).with_b(b)
        })
}

fn table_with_forms() -> impl Strategy<Value = (DiffTable, Form, Form)> {
    prop::sample::select(catalog_tables()).prop_flat_map(|t| {
        let n = t.dim();
        (Just(t), any_form(n), any_form(n))
    })
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn hodge_star_is_an_involution_in_dim_7(s in g2_structure(), a in any_form(7)) {
        prop_assert_eq!(s.star(&s.star(&a)), a);
    }

    #[test]
    fn hodge_star_squares_to_sign_in_dim_6(k in 0usize..=6, seed in any::<u64>()) {
        use g2het::exterior::FrameMetric;
        let diag: Vec<i64> = (0..6).map(|i| 1 + ((seed >> (4 * i)) % 5) as i64).collect();
        let g: Vec<Vec<Scalar>> = (0..6)
            .map(|i| (0..6).map(|j| if i == j { Scalar::from_int(diag[i] * diag[i]) } else { Scalar::zero() }).collect())
            .collect();
        let vol = Scalar::from_int(diag.iter().product());
        let m = FrameMetric::new(g, vol).unwrap();
        let a = Form::mono(6, &(0..k).collect::<Vec<_>>()).scale_rat(&rat((seed % 7) as i64 + 1, 1));
        let sign = if (k * (6 - k)) % 2 == 0 { 1 } else { -1 };
        prop_assert_eq!(m.hodge(&m.hodge(&a).unwrap()).unwrap(), a.scale_rat(&rat(sign, 1)));
    }

    #[test]
    fn d_is_an_antiderivation((t, a, b) in table_with_forms()) {
        let ka = a.degree().unwrap_or(0);
        let sign = if ka % 2 == 0 { rat(1, 1) } else { rat(-1, 1) };
        let lhs = t.d(&a.wedge(&b)).unwrap();
        let rhs = t.d(&a).unwrap().wedge(&b) + a.wedge(&t.d(&b).unwrap()).scale_rat(&sign);
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn d_squared_vanishes_on_catalog_tables((t, a, _) in table_with_forms()) {
        prop_assert!(t.d(&t.d(&a).unwrap()).unwrap().is_zero());
    }

    #[test]
    fn torsion_forms_rebuild_d_phi_and_d_psi(sc in ansatz(true)) {
        let table = sc.table();
        let s = build_phi(&sc).unwrap();
        let tor = torsion_forms(&s, &table).unwrap();
        let dphi = table.d(s.phi()).unwrap();
        let dpsi = table.d(s.psi()).unwrap();
        prop_assert_eq!(
            s.psi().scale(&tor.tau0) + tor.tau1.scale_rat(&rat(3, 1)).wedge(s.phi()) + s.star(&tor.tau3),
            dphi
        );
        prop_assert_eq!(tor.tau1.scale_rat(&rat(4, 1)).wedge(s.psi()) + tor.tau2.wedge(s.phi()), dpsi);
    }

    #[test]
    fn torsion_threeform_formulas_agree(sc in ansatz(false)) {
        let table = sc.table();
        let s = build_phi(&sc).unwrap();
        let tor = torsion_forms(&s, &table).unwrap();
        prop_assert!(tor.is_integrable());
        // Errors out if the two expressions differ.
        let t = torsion_threeform(&s, &tor).unwrap();
        let dphi = table.d(s.phi()).unwrap();
        let c = s.star(&dphi.wedge(s.phi())).coeff(0).scale(&rat(1, 6));
        let first = s.phi().scale(&c) - s.star(&dphi) + s.star(&tor.tau1.scale_rat(&rat(4, 1)).wedge(s.phi()));
        prop_assert_eq!(t, first);
    }
}
