use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use normgroup::freeproduct::{conjugation_family, step1_merge, MatchOracle};
use normgroup::group::FreeGroup;
use normgroup::moc::{ball_lookup, minimal_moc};
use normgroup::norms::{check_ball_axioms, PartialPreNorm};
use normgroup::words::{Signature, Word};
use normgroup::{Caps, Execution, Q};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn unit(rank: usize) -> PartialPreNorm {
    let sig = Signature::free(rank);
    let gens: Vec<(Word, Q)> = sig.generators().into_iter().map(|l| (Word::letter(l), Q::one())).collect();
    PartialPreNorm::symmetric(sig, gens).unwrap()
}

fn match_oracle_table(c: &mut Criterion) {
    let factors = vec![unit(1), unit(1)];
    let caps = Caps::default();
    let budget = Q::int(3);
    let merged = step1_merge(&factors).unwrap();
    let g = merged.group();
    let sigma = merged.engine(&g, caps.ball).ball(&budget).unwrap();
    let gamma = conjugation_family(&factors, &budget, &caps, Execution::Sequential).unwrap();
    let oracle = MatchOracle { sigma: &sigma, gamma: &gamma, budget };
    let mut group = c.benchmark_group("match_oracle_table");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::new(name, 6), |b| {
            b.iter(|| oracle.table(&merged.signature, 6, caps.matches, exec).unwrap())
        });
    }
    group.finish();
}

fn minimal_moc_f2(c: &mut Criterion) {
    let seed = unit(2);
    let g = FreeGroup::new(seed.signature.clone());
    let eng = seed.engine(&g, Caps::default().ball);
    let r = Q::int(5);
    let ball = eng.ball(&r).unwrap();
    let big = eng.ball(&Q::int(7)).unwrap();
    let x = Word::letter(seed.signature.generators()[0]);
    let mut group = c.benchmark_group("minimal_moc_f2");
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::new(name, 5), |b| {
            b.iter(|| minimal_moc(&g, &x, &ball, &r, ball_lookup(&big), exec).unwrap())
        });
    }
    group.finish();
}

fn ball_axioms(c: &mut Criterion) {
    let seed = unit(2);
    let g = FreeGroup::new(seed.signature.clone());
    let ball = seed.engine(&g, Caps::default().ball).ball(&Q::int(6)).unwrap();
    let mut group = c.benchmark_group("ball_axioms_f2");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::new(name, 6), |b| b.iter(|| black_box(check_ball_axioms(&g, &ball, exec))));
    }
    group.finish();
}

criterion_group!(benches, match_oracle_table, minimal_moc_f2, ball_axioms);
criterion_main!(benches);
