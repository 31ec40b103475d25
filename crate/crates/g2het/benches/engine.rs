use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use g2het::exec::{self, Mode};
use g2het::g2core::torsion_forms;
use g2het::nilansatz::{build_phi, cayley_rotation, rational_matrix, NilScenario};
use g2het::ring::Scalar;
use g2het::sasakian::{solve_instanton_eigenvalues, SasKind};

/// Torsion of the ansatz for a batch of rotations `B`.
fn torsion_batch(n: usize) -> usize {
    let qs: Vec<[i64; 4]> = (0..n as i64).map(|k| [1 + k % 3, k % 5 - 2, k % 4, 1]).collect();
    exec::map(qs, |q| {
        let sc = NilScenario::new(Scalar::from_int(1), [Scalar::from_int(2), Scalar::from_int(-1), Scalar::zero()])
            .with_b(rational_matrix(&cayley_rotation(q)));
        let s = build_phi(&sc).expect("definite");
        torsion_forms(&s, &sc.table()).expect("identities hold").tau3.num_terms()
    })
    .into_iter()
    .sum()
}

fn eigen_batch() -> usize {
    exec::map(SasKind::all().to_vec(), |k| solve_instanton_eigenvalues(k).is_ok() as usize).into_iter().sum()
}

fn modes(c: &mut Criterion) {
    let mut g = c.benchmark_group("engine");
    g.sample_size(10);
    for (name, mode) in [("sequential", Mode::Sequential), ("parallel", Mode::Parallel)] {
        g.bench_with_input(BenchmarkId::new("ansatz_torsion_x32", name), &mode, |b, &m| {
            exec::set_mode(m);
            b.iter(|| torsion_batch(32));
        });
        g.bench_with_input(BenchmarkId::new("sasakian_eigenvalues", name), &mode, |b, &m| {
            exec::set_mode(m);
            b.iter(eigen_batch);
        });
    }
    g.finish();
}

criterion_group!(benches, modes);
criterion_main!(benches);
