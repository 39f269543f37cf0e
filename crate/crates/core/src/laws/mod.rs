//! Checkers for the laws relating interpretations, and the program corpus
//! they are swept over.
//!
//! Every check is pointwise over supplied inputs: a law holds when no input
//! and program in the sweep violates it. A violation comes with a
//! [`Witness`] that the `replay_*` functions re-evaluate from scratch.

mod check;
pub mod corpus;
pub mod fixtures;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use check::{
    check_abstraction, check_concretization, check_oplax, check_order, replay_concretization,
    replay_oplax, Case, LawReport, Verdict, Witness,
};

use crate::domains::{AbstractDomain, GaloisConn};
use crate::logic::{Predicate, TruthLattice};
use crate::monads::Carrier;

/// Carriers up to this size get every predicate enumerated.
pub const EXHAUSTIVE_PREDICATES: usize = 8;

/// Default seed for sampled sweeps.
pub const DEFAULT_SEED: u64 = 0x5eed;

/// All two-valued predicates on `c` when `c` is small; otherwise the empty
/// and full predicates, every singleton and `samples` seeded random ones.
pub fn predicates(c: &Carrier, samples: usize, seed: u64) -> Vec<Predicate> {
    let l = TruthLattice::Bool2;
    if c.len() <= EXHAUSTIVE_PREDICATES {
        return (0..1u64 << c.len())
            .map(|bits| Predicate::from_bits(l, c, bits))
            .collect();
    }
    let mut out = vec![Predicate::bottom(l, c), Predicate::top(l, c)];
    out.extend((0..c.len()).map(|i| Predicate::from_indices(l, c, &[i])));
    out.extend(sampled_predicates(c, samples, seed));
    out
}

/// `n` seeded random two-valued predicates, each memory kept with
/// probability one half.
pub fn sampled_predicates(c: &Carrier, n: usize, seed: u64) -> Vec<Predicate> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let idx: Vec<usize> = (0..c.len()).filter(|_| rng.gen_bool(0.5)).collect();
            Predicate::from_indices(TruthLattice::Bool2, c, &idx)
        })
        .collect()
}

/// Galois laws for `g`: the adjunction `α(c) ≤ a ⟺ c ≤ γ(a)` for every
/// supplied predicate and element, then the insertion equation
/// `α(γ(a)) = a`. The insertion verdict is reported in `normal`; a
/// non-insertion is not a violation.
///
/// When `preds` contains every singleton the adjunction check is complete:
/// `α` is the join of singleton images, so `α(c) ≤ a` holds iff every
/// singleton of `c` satisfies it.
pub fn check_galois<D: AbstractDomain>(
    g: &GaloisConn<D>,
    preds: &[Predicate],
    elems: &[D::Elem],
) -> LawReport<Predicate, D::Elem> {
    let d = &g.domain;
    let mut report = LawReport {
        law: "galois",
        subject: d.name(),
        verdict: Verdict::Holds,
        checked: preds.len() * elems.len() + elems.len(),
        normal: None,
        exact: None,
        witness: None,
    };
    if let Some((c, a)) = g.adjunction_violation(preds, elems) {
        report.verdict = Verdict::Violated;
        report.witness = Some(Witness {
            case: Case::Adjunction,
            lhs: g.alpha(&c),
            input: c,
            rhs: a,
        });
        return report;
    }
    report.normal = Some(g.insertion_violation(elems).is_none());
    report
}
