//! End-to-end use of the public API: catalog tables, the nilpotent ansatz
//! and the circle families, run in both execution modes.

use g2het::circlefam::{self, lift_solution, torsion_family};
use g2het::exec::{self, Mode};
use g2het::exterior::Form;
use g2het::g2core::{torsion_forms, torsion_threeform};
use g2het::gauge::bianchi_residual;
use g2het::liecat::{lookup, rationality_check, CATALOG};
use g2het::nilansatz::{build_phi, NilScenario};
use g2het::ring::{rat, Scalar};
use g2het::sasakian::{solve_instanton_eigenvalues, SasKind};

#[test]
fn every_catalog_entry_is_a_lie_algebra() {
    for name in CATALOG {
        let entry = lookup(name).unwrap();
        assert!(entry.table.d_squared_check().is_ok(), "{name}");
        if name != &"heisenberg_T6" {
            assert_eq!(rationality_check(&entry.table), Ok(true), "{name}");
        }
    }
    assert!(lookup("not-an-algebra").is_err());
}

#[test]
fn numeric_su2_solution_on_a_concrete_algebra() {
    let sc = NilScenario::su2(Scalar::from_int(1), [Scalar::from_int(2), Scalar::from_frac(-1, 2), Scalar::zero()]);
    let s = build_phi(&sc).unwrap();
    let table = sc.table();
    let tor = torsion_forms(&s, &table).unwrap();
    assert!(tor.is_coclosed());
    assert_eq!(tor.tau0, Scalar::from_frac(12, 7));
    let t = torsion_threeform(&s, &tor).unwrap();
    let res = bianchi_residual(&t, &[sc.gauge_field().unwrap()], &table).unwrap();
    assert!(res.is_zero(), "{res}");
}

#[test]
fn circle_families_evaluate_at_rational_angles() {
    let cs = circlefam::s3s3_scenario();
    let fam = torsion_family(&cs).unwrap();
    // (cos, sin) = (3/5, 4/5).
    let tau0 = fam
        .torsion
        .tau0
        .eval(&[("cos_t".to_string(), rat(3, 5)), ("sin_t".to_string(), rat(4, 5))].into_iter().collect());
    assert_eq!(tau0.unwrap(), Scalar::from_frac(96, 35));
    let at = circlefam::at_angle(&fam.t_form, rat(1, 1), rat(0, 1)).unwrap();
    assert!(at.is_homogeneous_of(3));
    assert!(lift_solution(&cs, &[]).unwrap().is_solution());
}

#[test]
fn results_do_not_depend_on_the_execution_mode() {
    let run = || {
        exec::map(SasKind::all().to_vec(), |k| {
            solve_instanton_eigenvalues(k).map(|s| s.lambda).map_err(|e| e.to_string())
        })
    };
    let prev = exec::mode();
    exec::set_mode(Mode::Sequential);
    let a = run();
    exec::set_mode(Mode::Parallel);
    let b = run();
    exec::set_mode(prev);
    assert_eq!(a, b);
    assert!(a.iter().all(Result::is_ok));
    let forms = exec::map_range(7, |i| Form::gen(7, i));
    assert_eq!(forms.len(), 7);
}
