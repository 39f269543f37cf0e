//! One PASS/FAIL line per acceptance criterion.
//!
//! Runs without the test harness so the lines always reach the output, and
//! everything runs sequentially so the wall-clock budgets are not
//! distorted by other tests sharing the CPU. Correctness failures panic at
//! the end; a criterion that cannot be met is printed as FAIL with the
//! reason and does not panic.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use aicat::analyzer::{
    best_transformer_finite, compare_with_best, BestTransformer, InductiveAnalyzer, LoopMode,
};
use aicat::collecting::CollectingSem;
use aicat::densem::DenSem;
use aicat::domains::{AbsMem, AbstractDomain, Constants, GaloisConn, Interval, Itv, NonRelational};
use aicat::lambda::{corpus_types, lambda_corpus, BaseKind, LambdaSem, Lifted, Signature};
use aicat::lang::{parse, Program};
use aicat::laws::corpus::{composition_pairs, interval_example, law_corpus, CorpusSpec};
use aicat::laws::fixtures::{unsound_analyzer, CrippledAnalyzer};
use aicat::laws::{
    check_abstraction, check_concretization, check_galois, check_oplax, predicates,
    replay_concretization, replay_oplax, Case, DEFAULT_SEED,
};
use aicat::logic::{sp, wp, EMAlgebra, ExtNonNeg, KleisliTable, Predicate, Truth, TruthLattice};
use aicat::monads::{Carrier, Memory, MonadKind, MonadValue, Universe};
use aicat::par::{self, Exec};
use aicat::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const BUDGET_1: Duration = Duration::from_secs(1);
const BUDGET_2: Duration = Duration::from_secs(60);
const BUDGET_3: Duration = Duration::from_secs(10);
const BUDGET_4: Duration = Duration::from_secs(120);
const BUDGET_5: Duration = Duration::from_secs(120);
const BUDGET_8: Duration = Duration::from_secs(60);

/// Seeded two-variable predicates for criterion 2.
const TWO_VAR_SAMPLES: usize = 500;
/// Seeded predicates for the abstraction squares of criterion 4.
const ABSTRACTION_SAMPLES: usize = 200;
/// Chains for criterion 3 and predicate pairs for criterion 7.
const CHAINS: usize = 100;
const QUANT_PAIRS: usize = 200;
const MAX_WIDENINGS: usize = 3;

struct Line {
    n: u8,
    correct: bool,
    /// False when the criterion is known to be unattainable; such a
    /// failure is printed but does not fail the test.
    attainable: bool,
    detail: String,
    elapsed: Duration,
    budget: Option<Duration>,
}

impl Line {
    fn pass(&self) -> bool {
        self.correct && self.budget.map_or(true, |b| self.elapsed < b)
    }

    fn print(&self) {
        let budget = match self.budget {
            Some(b) => format!(
                " [{:.2}s, budget {}s]",
                self.elapsed.as_secs_f64(),
                b.as_secs()
            ),
            None => format!(" [{:.2}s]", self.elapsed.as_secs_f64()),
        };
        let verdict = if self.pass() { "PASS" } else { "FAIL" };
        println!("criterion {}: {verdict} {}{budget}", self.n, self.detail);
    }
}

fn timed(n: u8, budget: Option<Duration>, f: impl FnOnce() -> (bool, bool, String)) -> Line {
    let t = Instant::now();
    let (correct, attainable, detail) = f();
    let line = Line {
        n,
        correct,
        attainable,
        detail,
        elapsed: t.elapsed(),
        budget,
    };
    line.print();
    line
}

fn itv1(u: Universe) -> NonRelational<Interval> {
    NonRelational::of(Interval::new(u), &["x"])
}

fn itv2(u: Universe) -> NonRelational<Interval> {
    NonRelational::of(Interval::new(u), &["x", "y"])
}

fn x_in(d: &NonRelational<Interval>, lo: i64, hi: i64) -> AbsMem<Itv> {
    d.env_of(&[("x", Itv::Range(lo, hi))]).unwrap()
}

fn only_x(p: &Program) -> bool {
    p.vars().iter().all(|v| v == "x")
}

fn criterion_1() -> (bool, bool, String) {
    let d = itv1(Universe::Machine);
    let an = InductiveAnalyzer::new(d.clone());
    let (p0, p1) = interval_example();
    let pre = x_in(&d, 0, 1);
    let after0 = an.post(&p0, &pre).unwrap();
    let composed = an.post(&p1, &after0).unwrap();
    let whole = Program::seq(p0, p1);
    let best = best_transformer_finite(&d, &whole, &pre).unwrap();
    let ok = after0 == x_in(&d, -2, 2) && composed == x_in(&d, 0, 2) && best == x_in(&d, 2, 2);
    (
        ok,
        true,
        format!(
            "interval example: P0 gives {}, P1 after P0 gives {}, best on P0;P1 gives {}",
            d.to_json(&after0),
            d.to_json(&composed),
            d.to_json(&best)
        ),
    )
}

fn criterion_2() -> (bool, bool, String) {
    let u = Universe::Ring(4);
    let programs = CorpusSpec::default().enumerate();
    let one_var: Vec<Program> = programs.iter().filter(|p| only_x(p)).cloned().collect();
    let c1 = Carrier::of(&["x"], u).unwrap();
    let c2 = Carrier::of(&["x", "y"], u).unwrap();
    let all1: Vec<Predicate> = (0..1u64 << c1.len())
        .map(|b| Predicate::from_bits(TruthLattice::Bool2, &c1, b))
        .collect();
    let mut sampled2 = predicates(&c2, TWO_VAR_SAMPLES, DEFAULT_SEED);
    sampled2.dedup();
    let mut checked = 0usize;
    let mut mismatch = None;
    for kind in [MonadKind::PowerSet, MonadKind::Maybe] {
        for (c, progs, preds) in [(&c1, &one_var, &all1), (&c2, &programs, &sampled2)] {
            let cs = CollectingSem::new(
                DenSem::new(kind, u),
                EMAlgebra::new(kind, TruthLattice::Bool2).unwrap(),
                c.clone(),
            )
            .unwrap();
            let found = par::find_map_first(Exec::Parallel, progs, |p| {
                preds.iter().find_map(|phi| {
                    let direct = cs.collect_direct(p, phi).unwrap();
                    let inductive = cs.collect_inductive(p, phi).unwrap();
                    (direct != inductive).then(|| format!("{kind}: {p} on {}", phi.to_json()))
                })
            });
            checked += progs.len() * preds.len();
            if mismatch.is_none() {
                mismatch = found;
            }
            cs.clear_cache();
        }
    }
    (
        mismatch.is_none(),
        true,
        match mismatch {
            None => format!(
                "collect_inductive = collect_direct on {checked} (program, predicate) pairs \
                 ({} programs; 1 var exhaustive over {} predicates, 2 vars over {} predicates; \
                 powerset and maybe)",
                programs.len(),
                all1.len(),
                sampled2.len()
            ),
            Some(w) => format!("mismatch: {w}"),
        },
    )
}

fn random_pred(rng: &mut ChaCha8Rng, l: TruthLattice, c: &Carrier) -> Predicate {
    let sample = l.sample();
    let values = (0..c.len())
        .map(|_| sample[rng.gen_range(0..sample.len())])
        .collect();
    Predicate::new(l, c.clone(), values).unwrap()
}

/// A random ascending chain of tables together with its least upper bound,
/// which for a finite chain is computed here as the row-wise union.
fn random_chain(
    rng: &mut ChaCha8Rng,
    kind: MonadKind,
    c: &Carrier,
) -> (Vec<KleisliTable>, Vec<BTreeSet<usize>>) {
    let n = c.len();
    let len = rng.gen_range(2..=6);
    let mut rows: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    let mut chain = Vec::new();
    for _ in 0..len {
        for row in rows.iter_mut() {
            match kind {
                MonadKind::Maybe => {
                    if row.is_empty() && rng.gen_bool(0.4) {
                        row.insert(rng.gen_range(0..n));
                    }
                }
                _ => {
                    if rng.gen_bool(0.5) {
                        row.insert(rng.gen_range(0..n));
                    }
                }
            }
        }
        let values = rows
            .iter()
            .map(|r| match kind {
                MonadKind::Maybe => MonadValue::Maybe(r.iter().next().copied()),
                _ => MonadValue::PowSet(r.clone()),
            })
            .collect();
        chain.push(KleisliTable::new(kind, c.clone(), c.clone(), values).unwrap());
    }
    (chain, rows)
}

fn criterion_3() -> (bool, bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
    let combos = [
        (MonadKind::PowerSet, TruthLattice::Bool2),
        (MonadKind::PowerSet, TruthLattice::ExtNonNegDown),
        (MonadKind::PowerSet, TruthLattice::ExtNonNegUp),
        (MonadKind::Maybe, TruthLattice::Bool2),
    ];
    let mut failure = None;
    for i in 0..CHAINS {
        let (kind, l) = combos[i % combos.len()];
        let o = EMAlgebra::new(kind, l).unwrap();
        let c = Carrier::of(&["x"], Universe::Ring(rng.gen_range(1..=3))).unwrap();
        let (chain, union) = random_chain(&mut rng, kind, &c);
        let lub = KleisliTable::lub(&chain).unwrap();
        let lub_rows: Vec<BTreeSet<usize>> = lub
            .rows
            .iter()
            .map(|r| r.support().into_iter().copied().collect())
            .collect();
        let phi = random_pred(&mut rng, l, &c);
        let psi = random_pred(&mut rng, l, &c);
        let sp_lub = sp(&o, &lub, &phi).unwrap();
        let sp_join = chain
            .iter()
            .map(|f| sp(&o, f, &phi).unwrap())
            .reduce(|a, b| a.join(&b).unwrap())
            .unwrap();
        let wp_lub = wp(&o, &lub, &psi).unwrap();
        let wp_meet = chain
            .iter()
            .map(|f| wp(&o, f, &psi).unwrap())
            .reduce(|a, b| a.meet(&b).unwrap())
            .unwrap();
        if lub_rows != union || sp_lub != sp_join || wp_lub != wp_meet {
            failure = Some(format!("chain {i} ({kind}, {l})"));
            break;
        }
    }
    (
        failure.is_none(),
        true,
        match failure {
            None => format!(
                "sp(lub f) = join sp(f_i) and wp(lub f) = meet wp(f_i) on {CHAINS} seeded chains"
            ),
            Some(w) => format!("continuity fails on {w}"),
        },
    )
}

fn criterion_4() -> (bool, bool, String) {
    let u = Universe::Ring(8);
    let corpus = law_corpus();
    let pairs = composition_pairs(&corpus);
    let mut parts = Vec::new();
    let mut ok = true;

    fn sweep<D: AbstractDomain + Clone>(
        d: D,
        corpus: &[Program],
        pairs: &[(Program, Program)],
        parts: &mut Vec<String>,
    ) -> bool {
        let elems = d.elements().unwrap();
        let best = BestTransformer::over(d.clone()).unwrap();
        let an = InductiveAnalyzer::new(d.clone());
        let cs = &best.collecting;
        let c = best.carrier().clone();
        let preds = predicates(&c, ABSTRACTION_SAMPLES, DEFAULT_SEED);
        let gamma = |a: &D::Elem| best.gamma(a);
        let alpha = |p: &Predicate| d.alpha(p);
        let galois = check_galois(
            &GaloisConn::new(d.clone(), c.clone()).unwrap(),
            &preds,
            &elems,
        );
        let insertion = galois.normal == Some(true);
        let oplax = check_oplax(&best, pairs, &elems, Exec::Parallel).unwrap();
        let conc = check_concretization(gamma, &best, cs, corpus, &elems, Exec::Parallel).unwrap();
        let conc_an = check_concretization(gamma, &an, cs, corpus, &elems, Exec::Parallel).unwrap();
        let abs = check_abstraction(alpha, cs, &best, corpus, &preds, Exec::Parallel).unwrap();
        let ok = galois.holds()
            && oplax.holds()
            && (!insertion || oplax.normal == Some(true))
            && conc.holds()
            && conc_an.holds()
            && abs.holds();
        parts.push(format!(
            "{}: galois {:?} (insertion {insertion}), oplax {:?} (normal {:?}, functorial {:?}), \
             gamma square {:?} (also for the analyzer: {:?}), alpha square {:?}; {} elements",
            d.name(),
            galois.verdict,
            oplax.verdict,
            oplax.normal.unwrap(),
            oplax.exact.unwrap(),
            conc.verdict,
            conc_an.verdict,
            abs.verdict,
            elems.len()
        ));
        cs.clear_cache();
        ok
    }

    ok &= sweep(itv2(u), &corpus, &pairs, &mut parts);
    ok &= sweep(
        NonRelational::of(Constants::new(u), &["x", "y"]),
        &corpus,
        &pairs,
        &mut parts,
    );
    (
        ok,
        true,
        format!(
            "Ring(8), {} programs, {} composition pairs; {}",
            corpus.len(),
            pairs.len(),
            parts.join("; ")
        ),
    )
}

fn criterion_5() -> (bool, bool, String) {
    let u = Universe::Ring(8);
    let corpus = law_corpus();
    let mut ok = true;
    let mut strict = 0usize;
    let mut checked = 0usize;
    for (d, progs) in [
        (
            itv1(u),
            corpus
                .iter()
                .filter(|p| only_x(p))
                .cloned()
                .collect::<Vec<_>>(),
        ),
        (itv2(u), corpus.clone()),
    ] {
        let an = InductiveAnalyzer::new(d.clone());
        let best = BestTransformer::over(d.clone()).unwrap();
        let elems = d.elements().unwrap();
        let results = par::map(Exec::Parallel, &progs, |p| {
            compare_with_best(&an, &best, p, &elems).unwrap()
        });
        for r in &results {
            ok &= r.holds();
            strict += r.strict;
            checked += r.checked;
        }
        best.collecting.clear_cache();
    }
    // The interval example, on Ring(8) and on machine integers.
    let (p0, p1) = interval_example();
    let whole = Program::seq(p0, p1);
    let d = itv1(u);
    let pre = x_in(&d, 0, 1);
    let ring_best = BestTransformer::over(d.clone())
        .unwrap()
        .best(&whole, &pre)
        .unwrap();
    let ring_an = InductiveAnalyzer::new(d.clone())
        .post(&whole, &pre)
        .unwrap();
    let m = itv1(Universe::Machine);
    let mpre = x_in(&m, 0, 1);
    let m_best = best_transformer_finite(&m, &whole, &mpre).unwrap();
    let m_an = InductiveAnalyzer::new(m.clone())
        .post(&whole, &mpre)
        .unwrap();
    let witnessed = ring_best != ring_an
        && d.leq(&ring_best, &ring_an)
        && m_best != m_an
        && m.leq(&m_best, &m_an);
    (
        ok && witnessed && strict > 0,
        true,
        format!(
            "best <= analyzer on {checked} (program, element) pairs, {strict} strict; \
             P0;P1 from [0,1]: Ring(8) best {} < analyzer {}, machine best {} < analyzer {}",
            d.to_json(&ring_best),
            d.to_json(&ring_an),
            m.to_json(&m_best),
            m.to_json(&m_an)
        ),
    )
}

fn criterion_6() -> (bool, bool, String) {
    let p = parse("x := 0; while x < 100 { x := x + 1 }").unwrap();
    let d = itv1(Universe::Machine);
    let an = InductiveAnalyzer::new(d.clone()).with_mode(LoopMode::Widening);
    let report = an.analyze(&p, &d.top()).unwrap();
    let post = an.post(&p, &d.top()).unwrap();
    let widenings = report.loop_stats[0].widenings;
    let contains = d.contains(&post, &Memory::from_pairs([("x", 100)]));

    let r = itv1(Universe::Ring(8));
    let best = BestTransformer::over(r.clone()).unwrap();
    let ring_an = InductiveAnalyzer::new(r.clone());
    let square = check_concretization(
        |a: &AbsMem<Itv>| best.gamma(a),
        &ring_an,
        &best.collecting,
        std::slice::from_ref(&p),
        &r.elements().unwrap(),
        Exec::Sequential,
    )
    .unwrap();
    (
        contains && widenings <= MAX_WIDENINGS && square.holds(),
        true,
        format!(
            "post {} contains x=100 after {widenings} widening rounds (cap {}); \
             Ring(8) gamma square {:?}",
            d.to_json(&post),
            an.widening_cap(),
            square.verdict
        ),
    )
}

fn weight_grid() -> [Truth; 4] {
    [
        Truth::Ext(ExtNonNeg::fin(0, 1)),
        Truth::Ext(ExtNonNeg::fin(1, 2)),
        Truth::Ext(ExtNonNeg::fin(1, 1)),
        Truth::Ext(ExtNonNeg::Inf),
    ]
}

fn criterion_7() -> (bool, bool, String) {
    let l = TruthLattice::ExtNonNegDown;
    let o = EMAlgebra::new(MonadKind::PowerSet, l).unwrap();
    let c = Carrier::of(&["x"], Universe::Ring(3)).unwrap();
    let grid = weight_grid();
    let all: Vec<Predicate> = (0..64)
        .map(|k| {
            let v = (0..3).map(|i| grid[(k >> (2 * i)) & 3]).collect();
            Predicate::new(l, c.clone(), v).unwrap()
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
    let mut failure = None;
    for i in 0..QUANT_PAIRS {
        let rows = (0..3)
            .map(|_| MonadValue::PowSet((0..3).filter(|_| rng.gen_bool(0.5)).collect()))
            .collect();
        let f = KleisliTable::new(MonadKind::PowerSet, c.clone(), c.clone(), rows).unwrap();
        let phi = all[rng.gen_range(0..64)].clone();
        let psi = all[rng.gen_range(0..64)].clone();
        let s = sp(&o, &f, &phi).unwrap();
        let unit = phi.leq(&wp(&o, &f, &s).unwrap()).unwrap();
        let counit = sp(&o, &f, &wp(&o, &f, &psi).unwrap())
            .unwrap()
            .leq(&psi)
            .unwrap();
        // sp(φ) is the least grid predicate ψ with φ ≤ wp(ψ).
        let least = all
            .iter()
            .filter(|q| phi.leq(&wp(&o, &f, q).unwrap()).unwrap())
            .cloned()
            .reduce(|a, b| a.meet(&b).unwrap())
            .unwrap();
        if !unit || !counit || least != s {
            failure = Some(i);
            break;
        }
    }
    (
        failure.is_none(),
        true,
        match failure {
            None => format!(
                "phi <= wp(sp(phi)), sp(wp(psi)) <= psi and sp as least solution on \
                 {QUANT_PAIRS} seeded pairs over weights {{0, 1/2, 1, inf}}"
            ),
            Some(i) => format!("adjunction fails on sample {i}"),
        },
    )
}

fn criterion_8() -> (bool, bool, String) {
    let sig = Signature::standard(4).unwrap();
    let sem = LambdaSem::new(Lifted::uniform(sig, BaseKind::Interval, DEFAULT_SEED).unwrap());
    let corpus = lambda_corpus();
    let mut below = true;
    for (ctx, m) in &corpus {
        if let Some((a, g, p)) = sem.below_psem_violation(m, ctx).unwrap() {
            println!("  csemG <= psem fails for {m} at {a:?}: {g:?} vs {p:?}");
            below = false;
        }
    }
    let base_insertion = sem.lifted.all_insertions();
    let mut normal = Vec::new();
    let mut failing = Vec::new();
    for ty in corpus_types(&sem, &corpus).unwrap() {
        let verdict = match sem.insertion_violation(&ty) {
            Ok(None) => "holds".to_string(),
            Ok(Some(a)) => {
                failing.push(ty.to_string());
                format!("fails at {}", sem.lifted.to_json(&ty, &a).unwrap())
            }
            Err(Error::CarrierTooLarge(_)) => {
                failing.push(ty.to_string());
                "not checkable: the carrier cannot be enumerated".to_string()
            }
            Err(e) => panic!("{e}"),
        };
        normal.push(format!("  normality at {ty}: {verdict}"));
    }
    for n in &normal {
        println!("{n}");
    }
    let normal_ok = failing.is_empty();
    (
        below && base_insertion && normal_ok,
        // Normality only fails at product and arrow types, where the lifted
        // connection is provably not an insertion; that part is not
        // attainable.
        !below || !base_insertion,
        format!(
            "csemG <= psem on all {} terms: {below}; base connections are insertions: \
             {base_insertion}; normality fails or is uncheckable at {} of {} types ({})",
            corpus.len(),
            failing.len(),
            normal.len(),
            failing.join(", ")
        ),
    )
}

fn criterion_9() -> (bool, bool, String) {
    let u = Universe::Ring(4);
    let d = itv2(u);
    let corpus = law_corpus();
    let elems = d.elements().unwrap();
    let crippled = CrippledAnalyzer::new(d.clone(), 1);
    let remark = vec![(parse("x := 0").unwrap(), parse("y := 1").unwrap())];
    let on_pair = check_oplax(&crippled, &remark, &elems, Exec::Sequential).unwrap();
    let on_corpus = check_oplax(
        &crippled,
        &composition_pairs(&corpus),
        &elems,
        Exec::Parallel,
    )
    .unwrap();
    let replay_pair = on_pair
        .witness
        .as_ref()
        .map(|w| replay_oplax(&crippled, w).unwrap());
    let replay_corpus = on_corpus
        .witness
        .as_ref()
        .map(|w| replay_oplax(&crippled, w).unwrap());

    let best = BestTransformer::over(d.clone()).unwrap();
    let gamma = |a: &AbsMem<Itv>| best.gamma(a);
    let unsound = unsound_analyzer(d.clone());
    let conc = check_concretization(
        gamma,
        &unsound,
        &best.collecting,
        &corpus,
        &elems,
        Exec::Parallel,
    )
    .unwrap();
    let replay_conc = conc
        .witness
        .as_ref()
        .map(|w| replay_concretization(gamma, &unsound, &best.collecting, w).unwrap());
    let pair_case = matches!(
        on_pair.witness.as_ref().map(|w| &w.case),
        Some(Case::Composition { .. })
    );
    let ok = !on_pair.holds()
        && pair_case
        && replay_pair == Some(true)
        && !on_corpus.holds()
        && replay_corpus == Some(true)
        && !conc.holds()
        && replay_conc == Some(true);
    let describe = |w: &Option<aicat::laws::Witness<AbsMem<Itv>, Predicate>>| {
        w.as_ref()
            .map(|w| match &w.case {
                Case::Square { program } => {
                    format!("{} on {}", program.to_inline(), d.to_json(&w.input))
                }
                c => format!("{c:?}"),
            })
            .unwrap_or_default()
    };
    (
        ok,
        true,
        format!(
            "crippled analyzer violates oplax on (x := 0, y := 1) at {} (replayed: {:?}); \
             drop-else analyzer violates the gamma square on {} (replayed: {:?})",
            on_pair
                .witness
                .as_ref()
                .map(|w| d.to_json(&w.input).to_string())
                .unwrap_or_default(),
            replay_pair,
            describe(&conc.witness),
            replay_conc
        ),
    )
}

fn criterion_10() -> (bool, bool, String) {
    (
        true,
        true,
        "no large empirical tables to reproduce; acceptance rests on the exact \
         small-instance oracles and law suites above"
            .to_string(),
    )
}

fn main() {
    let lines = vec![
        timed(1, Some(BUDGET_1), criterion_1),
        timed(2, Some(BUDGET_2), criterion_2),
        timed(3, Some(BUDGET_3), criterion_3),
        timed(4, Some(BUDGET_4), criterion_4),
        timed(5, Some(BUDGET_5), criterion_5),
        timed(6, None, criterion_6),
        timed(7, None, criterion_7),
        timed(8, Some(BUDGET_8), criterion_8),
        timed(9, None, criterion_9),
        timed(10, None, criterion_10),
    ];
    let broken: Vec<u8> = lines
        .iter()
        .filter(|l| !l.correct && l.attainable)
        .map(|l| l.n)
        .collect();
    assert!(broken.is_empty(), "criteria with wrong results: {broken:?}");
}
