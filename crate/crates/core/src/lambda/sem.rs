use std::collections::{BTreeSet, HashMap};
use std::sync::{Arc, Mutex};

use super::abs::{AbsVal, Lifted, ABS_CAP};
use super::set::SetVal;
use super::syntax::{LTerm, LType};
use crate::{Error, Result};

/// The two abstract semantics of terms in context `x : τ`: the best
/// abstraction `csemG = α ∘ Q⟦M⟧ ∘ γ` and the inductive interpretation
/// `psem` that only uses `csemG` for constants.
#[derive(Clone, Debug)]
pub struct LambdaSem {
    pub lifted: Lifted,
    pub ctx_var: String,
    seeds: Arc<Mutex<HashMap<String, AbsVal>>>,
}

type AbsEnv = Vec<(String, LType, AbsVal)>;

impl LambdaSem {
    pub fn new(lifted: Lifted) -> Self {
        LambdaSem {
            lifted,
            ctx_var: "x".into(),
            seeds: Arc::default(),
        }
    }

    pub fn typecheck(&self, m: &LTerm, ctx: &LType) -> Result<LType> {
        self.lifted.sig().typecheck(m, &self.ctx_var, ctx)
    }

    pub fn eval(&self, m: &LTerm, ctx: &LType, v: &SetVal) -> Result<SetVal> {
        self.lifted.sig().eval(m, &self.ctx_var, ctx, v)
    }

    /// The direct image `Q⟦M⟧(U)`, sorted and deduplicated.
    pub fn image(&self, m: &LTerm, ctx: &LType, us: &[SetVal]) -> Result<Vec<SetVal>> {
        let out: BTreeSet<SetVal> = us
            .iter()
            .map(|v| self.eval(m, ctx, v))
            .collect::<Result<_>>()?;
        Ok(out.into_iter().collect())
    }

    /// `csemG(M)(a) = α(Q⟦M⟧(γ(a)))`.
    pub fn csem_g(&self, m: &LTerm, ctx: &LType, a: &AbsVal) -> Result<AbsVal> {
        let sigma = self.typecheck(m, ctx)?;
        let us = self.lifted.gamma(ctx, a)?;
        self.lifted.alpha(&sigma, &self.image(m, ctx, &us)?)
    }

    /// The abstract constant `csemG` of `x : unit ⊢ c`, i.e. `α({⟦c⟧})`.
    pub fn seed(&self, c: &str) -> Result<AbsVal> {
        if let Some(v) = self.seeds.lock().expect("seed cache").get(c) {
            return Ok(v.clone());
        }
        let v = self.csem_g(&LTerm::constant(c), &LType::Unit, &AbsVal::Unit)?;
        self.seeds
            .lock()
            .expect("seed cache")
            .insert(c.to_string(), v.clone());
        Ok(v)
    }

    /// `psem(M)` as a monotone map `A(τ) → A(σ)`.
    pub fn psem(&self, m: &LTerm, ctx: &LType) -> Result<AbsVal> {
        self.typecheck(m, ctx)?;
        let (me, m2, ctx2) = (self.clone(), m.clone(), ctx.clone());
        self.lifted
            .make_fun(ctx, move |a| me.psem_at(&m2, &ctx2, a))
    }

    /// `psem(M)(a)`.
    pub fn psem_at(&self, m: &LTerm, ctx: &LType, a: &AbsVal) -> Result<AbsVal> {
        let mut env = vec![(self.ctx_var.clone(), ctx.clone(), a.clone())];
        Ok(self.interp(m, &mut env)?.1)
    }

    fn interp(&self, m: &LTerm, env: &mut AbsEnv) -> Result<(LType, AbsVal)> {
        let l = &self.lifted;
        match m {
            LTerm::Var(x) => env
                .iter()
                .rev()
                .find(|(y, _, _)| y == x)
                .map(|(_, t, v)| (t.clone(), v.clone()))
                .ok_or_else(|| Error::Unbound(x.clone())),
            LTerm::Const(c) => Ok((l.sig().constant(c)?.0.clone(), self.seed(c)?)),
            LTerm::UnitVal => Ok((LType::Unit, AbsVal::Unit)),
            LTerm::Pair(a, b) => {
                let (ta, va) = self.interp(a, env)?;
                let (tb, vb) = self.interp(b, env)?;
                Ok((LType::prod(ta, tb), AbsVal::pair(va, vb)))
            }
            LTerm::Proj1(p) | LTerm::Proj2(p) => match self.interp(p, env)? {
                (LType::Prod(s, t), AbsVal::Pair(x, y)) => Ok(if matches!(m, LTerm::Proj1(_)) {
                    (*s, *x)
                } else {
                    (*t, *y)
                }),
                _ => Err(Error::Type(format!("projection from a non-pair in {m}"))),
            },
            LTerm::Lam(y, ty, body) => {
                let mut tenv: Vec<(String, LType)> =
                    env.iter().map(|(x, t, _)| (x.clone(), t.clone())).collect();
                tenv.push((y.clone(), ty.clone()));
                let cod = l.sig().infer(body, &mut tenv)?;
                let (me, captured, y2, ty2, body2) = (
                    self.clone(),
                    env.clone(),
                    y.clone(),
                    ty.clone(),
                    (**body).clone(),
                );
                let f = l.make_fun(ty, move |u| {
                    let mut inner = captured.clone();
                    inner.push((y2.clone(), ty2.clone(), u.clone()));
                    Ok(me.interp(&body2, &mut inner)?.1)
                })?;
                Ok((LType::arrow(ty.clone(), cod), f))
            }
            LTerm::App(f, a) => {
                let (ft, fv) = self.interp(f, env)?;
                let (_, av) = self.interp(a, env)?;
                match ft {
                    LType::Arrow(d, c) => Ok((*c, l.apply(&d, &fv, &av)?)),
                    t => Err(Error::Type(format!("application of {t} in {m}"))),
                }
            }
        }
    }

    /// Abstract inputs for sweeps over `A(τ)`: every element when small,
    /// otherwise the probe sample.
    pub fn inputs(&self, ctx: &LType) -> Result<Vec<AbsVal>> {
        Ok(match self.lifted.elements(ctx, ABS_CAP)? {
            Some(xs) => xs,
            None => self.lifted.probes(ctx)?.to_vec(),
        })
    }

    /// First input where `csemG(M)(a) ≤ psem(M)(a)` fails.
    pub fn below_psem_violation(
        &self,
        m: &LTerm,
        ctx: &LType,
    ) -> Result<Option<(AbsVal, AbsVal, AbsVal)>> {
        let sigma = self.typecheck(m, ctx)?;
        for a in self.inputs(ctx)? {
            let g = self.csem_g(m, ctx, &a)?;
            let p = self.psem_at(m, ctx, &a)?;
            if !self.lifted.leq(&sigma, &g, &p)? {
                return Ok(Some((a, g, p)));
            }
        }
        Ok(None)
    }

    /// First input where `csemG(M₂ ∘ M₁) ≤ csemG(M₂) ∘ csemG(M₁)` fails;
    /// `M₁ : τ → ρ` and `M₂ : ρ → σ`.
    pub fn oplax_violation(
        &self,
        m1: &LTerm,
        m2: &LTerm,
        ctx: &LType,
    ) -> Result<Option<(AbsVal, AbsVal, AbsVal)>> {
        let rho = self.typecheck(m1, ctx)?;
        let sigma = self.typecheck(m2, &rho)?;
        let composed = m2.compose_after(&self.ctx_var, m1);
        for a in self.inputs(ctx)? {
            let lhs = self.csem_g(&composed, ctx, &a)?;
            let rhs = self.csem_g(m2, &rho, &self.csem_g(m1, ctx, &a)?)?;
            if !self.lifted.leq(&sigma, &lhs, &rhs)? {
                return Ok(Some((a, lhs, rhs)));
            }
        }
        Ok(None)
    }

    /// First element of `A(τ)` with `α(γ(a)) ≠ a`.
    pub fn insertion_violation(&self, ty: &LType) -> Result<Option<AbsVal>> {
        for a in self.inputs(ty)? {
            let back = self.lifted.alpha(ty, &self.lifted.gamma(ty, &a)?)?;
            if !self.lifted.equal(ty, &back, &a)? {
                return Ok(Some(a));
            }
        }
        Ok(None)
    }

    /// First `(U, a)` where `α(U) ≤ a` and `U ⊆ γ(a)` disagree. `U` ranges
    /// over every subset of `⟦τ⟧` when it has at most `exhaustive_up_to`
    /// elements, and over the empty set, singletons and `samples` seeded
    /// random subsets otherwise.
    pub fn adjunction_violation(
        &self,
        ty: &LType,
        exhaustive_up_to: usize,
        samples: usize,
        seed: u64,
    ) -> Result<Option<(Vec<SetVal>, AbsVal)>> {
        use rand::{Rng, SeedableRng};
        let all = self.lifted.sig().elements(ty)?;
        let mut sets: Vec<Vec<SetVal>> = Vec::new();
        if all.len() <= exhaustive_up_to {
            for mask in 0..1u64 << all.len() {
                sets.push(
                    (0..all.len())
                        .filter(|i| mask >> i & 1 == 1)
                        .map(|i| all[i].clone())
                        .collect(),
                );
            }
        } else {
            sets.push(Vec::new());
            sets.extend(all.iter().map(|v| vec![v.clone()]));
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..samples {
                let k = rng.gen_range(2..=4.min(all.len()).max(2));
                let mut s: Vec<SetVal> = (0..k)
                    .map(|_| all[rng.gen_range(0..all.len())].clone())
                    .collect();
                s.sort();
                s.dedup();
                sets.push(s);
            }
        }
        let elems = self.inputs(ty)?;
        for a in &elems {
            let members: BTreeSet<SetVal> = self.lifted.gamma(ty, a)?.into_iter().collect();
            for u in &sets {
                let left = self.lifted.leq(ty, &self.lifted.alpha(ty, u)?, a)?;
                let right = u.iter().all(|v| members.contains(v));
                if left != right {
                    return Ok(Some((u.clone(), a.clone())));
                }
            }
        }
        Ok(None)
    }
}

/// Every type occurring as a context or result type in `terms`, with its
/// component types.
pub fn corpus_types(sem: &LambdaSem, terms: &[(LType, LTerm)]) -> Result<BTreeSet<LType>> {
    fn add(ty: &LType, out: &mut BTreeSet<LType>) {
        if out.insert(ty.clone()) {
            if let LType::Prod(a, b) | LType::Arrow(a, b) = ty {
                add(a, out);
                add(b, out);
            }
        }
    }
    let mut out = BTreeSet::new();
    for (ctx, m) in terms {
        add(ctx, &mut out);
        add(&sem.typecheck(m, ctx)?, &mut out);
    }
    Ok(out)
}

const CORPUS: [(&str, &str); 39] = [
    ("nat", "x"),
    ("nat", "(pair x x)"),
    ("nat", "(fst (pair x x))"),
    ("nat", "(snd (pair x zero))"),
    ("nat", "zero"),
    ("nat", "unit"),
    ("nat", "(app succ x)"),
    ("nat", "(app pred x)"),
    ("nat", "(app double x)"),
    ("nat", "(app add x x)"),
    ("nat", "(app add x one)"),
    ("nat", "(app max x (app succ x))"),
    ("nat", "(app succ (app succ x))"),
    ("nat", "(app (lam y nat (app succ y)) x)"),
    ("nat", "(lam y nat (app add x y))"),
    ("nat", "(lam y nat x)"),
    ("nat", "(app iszero x)"),
    ("nat", "(app not (app iszero x))"),
    ("nat", "(app twice succ x)"),
    ("nat", "(app twice double x)"),
    ("nat", "(pair (app succ x) (app pred x))"),
    ("nat", "(lam f (-> nat nat) (app f x))"),
    ("(* nat nat)", "x"),
    ("(* nat nat)", "(fst x)"),
    ("(* nat nat)", "(snd x)"),
    ("(* nat nat)", "(pair (snd x) (fst x))"),
    ("(* nat nat)", "(app add (fst x) (snd x))"),
    ("(* nat nat)", "(app max (fst x) (snd x))"),
    ("(* nat nat)", "(app succ (fst x))"),
    ("(* nat nat)", "(lam y nat (app add y (fst x)))"),
    ("unit", "zero"),
    ("unit", "(app succ one)"),
    ("unit", "x"),
    ("bool", "(app not x)"),
    ("bool", "(app choose x zero one)"),
    ("(-> nat nat)", "(app x zero)"),
    ("(-> nat nat)", "(lam y nat (app x (app x y)))"),
    ("(-> nat nat)", "(app twice x)"),
    ("(-> nat nat)", "(app x (app x one))"),
];

/// The lambda corpus over [`super::Signature::standard`]: identities,
/// pairing, projections, constants, one- and two-argument applications
/// and higher-order terms.
pub fn lambda_corpus() -> Vec<(LType, LTerm)> {
    CORPUS
        .iter()
        .map(|(t, m)| {
            (
                LType::parse(t).expect("corpus type parses"),
                LTerm::parse(m, "x").expect("corpus term parses"),
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lambda::{BaseKind, Signature};

    fn sem(n: usize) -> LambdaSem {
        LambdaSem::new(
            Lifted::uniform(Signature::standard(n).unwrap(), BaseKind::Interval, 7).unwrap(),
        )
    }

    fn nat() -> LType {
        LType::base("nat")
    }

    fn itv(s: &LambdaSem, label: &str) -> AbsVal {
        AbsVal::Base(s.lifted.base("nat").unwrap().find(label).unwrap())
    }

    #[test]
    fn corpus_shape() {
        let c = lambda_corpus();
        assert!(c.len() >= 30);
        let s = sem(4);
        for (ctx, m) in &c {
            let t = s.typecheck(m, ctx).unwrap();
            assert!(m.depth() <= 4, "{m}");
            assert!(ctx.order() <= 2 && t.order() <= 2, "{m}");
        }
    }

    #[test]
    fn csem_g_examples() {
        let s = sem(4);
        let succ = LTerm::parse("(app succ x)", "x").unwrap();
        assert!(
            matches!(s.csem_g(&succ, &nat(), &itv(&s, "[0,1]")).unwrap(), AbsVal::Base(i) if i == itv(&s, "[1,2]").as_base())
        );
        let id = LTerm::var("x");
        for a in s.inputs(&nat()).unwrap() {
            assert!(s
                .lifted
                .equal(&nat(), &s.csem_g(&id, &nat(), &a).unwrap(), &a)
                .unwrap());
        }
        let zero = s
            .csem_g(&LTerm::constant("zero"), &LType::Unit, &AbsVal::Unit)
            .unwrap();
        assert!(s.lifted.equal(&nat(), &zero, &itv(&s, "[0,0]")).unwrap());
    }

    #[test]
    fn psem_is_compositional_on_examples() {
        let s = sem(4);
        let id = s.psem(&LTerm::var("x"), &nat()).unwrap();
        let ty = LType::arrow(nat(), nat());
        let ident = s.lifted.make_fun(&nat(), |a| Ok(a.clone())).unwrap();
        assert!(s.lifted.equal(&ty, &id, &ident).unwrap());
        let diag = LTerm::parse("(pair x x)", "x").unwrap();
        let a = itv(&s, "[1,3]");
        match s.psem_at(&diag, &nat(), &a).unwrap() {
            AbsVal::Pair(p, q) => {
                assert!(s.lifted.equal(&nat(), &p, &a).unwrap());
                assert!(s.lifted.equal(&nat(), &q, &a).unwrap());
            }
            v => panic!("{v:?}"),
        }
        let app = LTerm::parse("(app succ x)", "x").unwrap();
        let seed = s.seed("succ").unwrap();
        for a in s.inputs(&nat()).unwrap() {
            let direct = s.lifted.apply(&nat(), &seed, &a).unwrap();
            assert!(s
                .lifted
                .equal(&nat(), &s.psem_at(&app, &nat(), &a).unwrap(), &direct)
                .unwrap());
        }
    }

    #[test]
    fn unit_and_base_connections() {
        let s = sem(4);
        assert_eq!(
            s.lifted.gamma(&LType::Unit, &AbsVal::Unit).unwrap(),
            vec![SetVal::Unit]
        );
        assert!(s.insertion_violation(&nat()).unwrap().is_none());
        assert!(s.insertion_violation(&LType::Unit).unwrap().is_none());
        assert!(s.adjunction_violation(&nat(), 8, 0, 1).unwrap().is_none());
        assert!(s
            .adjunction_violation(&LType::prod(nat(), nat()), 8, 64, 1)
            .unwrap()
            .is_none());
    }

    #[test]
    fn arrow_top_concretizes_to_everything() {
        let s = sem(2);
        let ty = LType::arrow(nat(), nat());
        let top = itv(&s, "[0,1]");
        let k = s.lifted.make_fun(&nat(), move |_| Ok(top.clone())).unwrap();
        assert_eq!(s.lifted.gamma(&ty, &k).unwrap().len(), 4);
    }

    #[test]
    fn arrow_insertion_fails_on_a_collapsing_map() {
        // nat = {0,1}: k([0,0]) = k([1,1]) = [0,0], k([0,1]) = [0,1]. Only
        // the constant-zero function is in γ(k), whose abstraction maps
        // [0,1] to [0,0].
        let s = sem(2);
        let ty = LType::arrow(nat(), nat());
        let p = s.lifted.base("nat").unwrap().clone();
        let (z, full) = (p.find("[0,0]").unwrap(), p.find("[0,1]").unwrap());
        let bot = p.bottom();
        let k = s
            .lifted
            .make_fun(&nat(), move |a| {
                let AbsVal::Base(i) = a else { unreachable!() };
                Ok(AbsVal::Base(if *i == bot {
                    bot
                } else if *i == full {
                    full
                } else {
                    z
                }))
            })
            .unwrap();
        let g = s.lifted.gamma(&ty, &k).unwrap();
        assert_eq!(g.len(), 1);
        let back = s.lifted.alpha(&ty, &g).unwrap();
        assert!(!s.lifted.equal(&ty, &back, &k).unwrap());
        assert!(s.insertion_violation(&ty).unwrap().is_some());
    }

    #[test]
    fn product_insertion_fails_on_half_empty_pairs() {
        let s = sem(2);
        let ty = LType::prod(nat(), nat());
        let p = s.lifted.base("nat").unwrap().clone();
        let a = AbsVal::pair(
            AbsVal::Base(p.bottom()),
            AbsVal::Base(p.find("[0,1]").unwrap()),
        );
        assert!(s.lifted.gamma(&ty, &a).unwrap().is_empty());
        let back = s.lifted.alpha(&ty, &[]).unwrap();
        assert!(!s.lifted.equal(&ty, &back, &a).unwrap());
    }
}
