//! Sequential against data-parallel law sweeps on Ring(4) intervals over
//! `x, y`. Build with `--no-default-features` to time the fallback alone.

use aicat::analyzer::{BestTransformer, InductiveAnalyzer};
use aicat::domains::{AbstractDomain, Interval, NonRelational};
use aicat::laws::corpus::{composition_pairs, law_corpus};
use aicat::laws::{check_concretization, check_oplax};
use aicat::monads::Universe;
use aicat::par::Exec;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

const PROGRAMS: usize = 400;

fn sweeps(c: &mut Criterion) {
    let d = NonRelational::of(Interval::new(Universe::Ring(4)), &["x", "y"]);
    let elems = d.elements().unwrap();
    let corpus: Vec<_> = law_corpus().into_iter().take(PROGRAMS).collect();
    let pairs = composition_pairs(&corpus);
    let analyzer = InductiveAnalyzer::new(d.clone());
    let best = BestTransformer::over(d).unwrap();

    let mut g = c.benchmark_group("sweeps");
    g.sample_size(10);
    for exec in [Exec::Sequential, Exec::Parallel] {
        let name = format!("{exec:?}");
        g.bench_with_input(BenchmarkId::new("oplax-analyzer", &name), &exec, |b, &e| {
            b.iter(|| check_oplax(&analyzer, &pairs, &elems, e).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("gamma-square", &name), &exec, |b, &e| {
            b.iter(|| {
                check_concretization(
                    |a| best.gamma(a),
                    &analyzer,
                    &best.collecting,
                    &corpus,
                    &elems,
                    e,
                )
                .unwrap()
            })
        });
    }
    g.finish();
}

criterion_group!(benches, sweeps);
criterion_main!(benches);
