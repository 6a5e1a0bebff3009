//! Generators and checks for the randomized suites.

use std::collections::HashMap;

use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

use cpl_core::env::Environment;
use cpl_core::expr::{Atom, Expr};
use cpl_core::fexpr::{apply_substitution, is_instance, unify, ClosedFExpr, FExpr};
use cpl_core::infer::infer;

/// Terms over `c/0`, `f/1`, `g/2` and `vars` variables, of depth at most `depth`.
pub fn term(vars: usize, depth: u32) -> BoxedStrategy<FExpr> {
    let leaf = if vars == 0 {
        Just(FExpr::constant("c")).boxed()
    } else {
        prop_oneof![Just(FExpr::constant("c")), (0..vars).prop_map(FExpr::Var)].boxed()
    };
    leaf.prop_recursive(depth, 16, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|a| FExpr::app("f", vec![a])),
            (inner.clone(), inner).prop_map(|(a, b)| FExpr::app("g", vec![a, b])),
        ]
    })
    .boxed()
}

pub fn closed(arity: usize, depth: u32) -> BoxedStrategy<ClosedFExpr> {
    term(arity, depth)
        .prop_map(move |body| ClosedFExpr::new(arity, body).unwrap())
        .boxed()
}

/// Ground terms used to enumerate unifiers.
pub fn ground_terms() -> Vec<FExpr> {
    let c = FExpr::constant("c");
    let f = |a: FExpr| FExpr::app("f", vec![a]);
    let g = |a: FExpr, b: FExpr| FExpr::app("g", vec![a, b]);
    vec![
        c.clone(),
        f(c.clone()),
        g(c.clone(), c.clone()),
        f(f(c.clone())),
        g(f(c.clone()), c.clone()),
    ]
}

/// Every assignment of `ground_terms()` to `n` variables.
pub fn ground_assignments(n: usize) -> Vec<Vec<FExpr>> {
    let ts = ground_terms();
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|v| {
                ts.iter().map(move |t| {
                    let mut w = v.clone();
                    w.push(t.clone());
                    w
                })
            })
            .collect();
    }
    out
}

/// A textbook Robinson unifier over named variables.
pub mod robinson {
    use std::collections::BTreeMap;

    #[derive(Clone, Debug, PartialEq, Eq)]
    pub enum T {
        V(String),
        F(String, Vec<T>),
    }

    pub type Subst = BTreeMap<String, T>;

    pub fn apply(s: &Subst, t: &T) -> T {
        match t {
            T::V(x) => match s.get(x) {
                Some(u) => apply(s, u),
                None => t.clone(),
            },
            T::F(n, args) => T::F(n.clone(), args.iter().map(|a| apply(s, a)).collect()),
        }
    }

    fn occurs(x: &str, t: &T) -> bool {
        match t {
            T::V(y) => x == y,
            T::F(_, args) => args.iter().any(|a| occurs(x, a)),
        }
    }

    pub fn mgu(pairs: Vec<(T, T)>) -> Option<Subst> {
        let mut s = Subst::new();
        let mut work = pairs;
        while let Some((a, b)) = work.pop() {
            let (a, b) = (apply(&s, &a), apply(&s, &b));
            match (a, b) {
                (T::V(x), T::V(y)) if x == y => {}
                (T::V(x), t) | (t, T::V(x)) => {
                    if occurs(&x, &t) {
                        return None;
                    }
                    s.insert(x, t);
                }
                (T::F(n, xs), T::F(m, ys)) => {
                    if n != m || xs.len() != ys.len() {
                        return None;
                    }
                    work.extend(xs.into_iter().zip(ys));
                }
            }
        }
        Some(s)
    }
}

pub fn to_named(e: &FExpr, prefix: &str) -> robinson::T {
    match e {
        FExpr::Var(i) => robinson::T::V(format!("{prefix}{i}")),
        FExpr::App(n, args) => robinson::T::F(
            n.to_string(),
            args.iter().map(|a| to_named(a, prefix)).collect(),
        ),
    }
}

pub fn from_named(t: &robinson::T, names: &mut Vec<String>) -> FExpr {
    match t {
        robinson::T::V(x) => {
            let i = names.iter().position(|n| n == x).unwrap_or_else(|| {
                names.push(x.clone());
                names.len() - 1
            });
            FExpr::Var(i)
        }
        robinson::T::F(n, args) => {
            FExpr::app(n, args.iter().map(|a| from_named(a, names)).collect())
        }
    }
}

fn config(cases: u32) -> Config {
    Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    }
}

/// Checks one unification problem: agreement with the Robinson oracle,
/// soundness, and generality against every enumerated ground unifier.
pub fn check_unifier(k: &ClosedFExpr, l: &ClosedFExpr) -> Result<(), TestCaseError> {
    let result = unify(k, l);
    let vars: Vec<robinson::T> = (0..k.arity)
        .map(|i| robinson::T::V(format!("k{i}")))
        .chain((0..l.arity).map(|i| robinson::T::V(format!("l{i}"))))
        .collect();
    let oracle = robinson::mgu(vec![(to_named(&k.body, "k"), to_named(&l.body, "l"))]);
    prop_assert_eq!(result.is_ok(), oracle.is_some());

    let unifiers: Vec<Vec<FExpr>> = ground_assignments(k.arity + l.arity)
        .into_iter()
        .filter(|g| k.body.subst(&g[..k.arity]) == l.body.subst(&g[k.arity..]))
        .collect();
    match result {
        Err(_) => prop_assert!(unifiers.is_empty()),
        Ok((sk, sl)) => {
            let bk = apply_substitution(k, &sk).unwrap();
            let bl = apply_substitution(l, &sl).unwrap();
            prop_assert_eq!(&bk.body, &bl.body);
            let mgu: Vec<FExpr> = sk.images.iter().chain(&sl.images).cloned().collect();
            for g in &unifiers {
                prop_assert!(
                    is_instance(&mgu, g),
                    "{:?} is not an instance of {:?}",
                    g,
                    mgu
                );
            }
            let s = oracle.unwrap();
            let mut names = Vec::new();
            let theirs: Vec<FExpr> = vars
                .iter()
                .map(|v| from_named(&robinson::apply(&s, v), &mut names))
                .collect();
            prop_assert!(is_instance(&mgu, &theirs) && is_instance(&theirs, &mgu));
            prop_assert_eq!(
                sk.target_arity,
                mgu.iter().map(FExpr::var_bound).max().unwrap_or(0)
            );
        }
    }
    Ok(())
}

/// Runs [`check_unifier`] on `cases` random pairs of depth at most 3.
pub fn unifier_suite(cases: u32) -> Result<(), String> {
    let mut runner = TestRunner::new(config(cases));
    let strategy = (1usize..=2, 1usize..=2).prop_flat_map(|(a, b)| (closed(a, 3), closed(b, 3)));
    runner
        .run(&strategy, |(k, l)| check_unifier(&k, &l))
        .map_err(|e| e.to_string())
}

// Random morphism expressions over the objects of the bundled prelude.

pub const NATURALS: &[&str] = &[
    "pi1", "pi2", "eval", "0", "s", "in1", "in2", "nil", "cons", "head", "tail",
];
pub const FACTORIZERS: &[(&str, usize)] = &[
    ("pair", 2),
    ("curry", 1),
    ("pr", 2),
    ("case", 2),
    ("prl", 2),
    ("fold", 2),
];
pub const FUNCTORS: &[(&str, usize)] = &[
    ("prod", 2),
    ("coprod", 2),
    ("exp", 2),
    ("list", 1),
    ("inflist", 1),
];

pub fn morphism() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        4 => prop::sample::select(NATURALS).prop_map(|n| Expr::atom(Atom::nat(n))),
        1 => Just(Expr::atom(Atom::fact("!", vec![]))),
        1 => prop::sample::select(vec!["1", "nat"]).prop_map(|n| Expr::atom(Atom::func(n, vec![]))),
        1 => Just(Expr::id()),
    ];
    leaf.prop_recursive(3, 24, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 2..=3).prop_map(|es| Expr::compose_all(&es)),
            (
                prop::sample::select(FACTORIZERS),
                prop::collection::vec(inner.clone(), 2)
            )
                .prop_map(|((n, k), args)| Expr::atom(Atom::fact(n, args[..k].to_vec()))),
            (
                prop::sample::select(FUNCTORS),
                prop::collection::vec(inner, 2)
            )
                .prop_map(|((n, k), args)| Expr::atom(Atom::func(n, args[..k].to_vec()))),
        ]
    })
}

/// Prints a composition with random parenthesization.
pub fn grouped(e: &Expr, cuts: &mut impl Iterator<Item = bool>) -> String {
    let parts: Vec<String> = e
        .atoms()
        .iter()
        .map(|a| match a {
            Atom::Fact(n, args) | Atom::Func(n, args) if !args.is_empty() => {
                let inner: Vec<String> = args.iter().map(|x| grouped(x, cuts)).collect();
                format!("{n}({})", inner.join(","))
            }
            other => other.name().to_string(),
        })
        .collect();
    if parts.is_empty() {
        return "id".into();
    }
    let mut out = parts[0].clone();
    for p in &parts[1..] {
        out = if cuts.next().unwrap_or(false) {
            format!("({out}).{p}")
        } else {
            format!("{out}.{p}")
        };
    }
    if cuts.next().unwrap_or(false) {
        format!("id.{out}.id")
    } else {
        out
    }
}

pub fn ground_object() -> impl Strategy<Value = FExpr> {
    let leaf = prop_oneof![Just(FExpr::constant("1")), Just(FExpr::constant("nat"))];
    leaf.prop_recursive(2, 6, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| FExpr::app("prod", vec![a, b])),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| FExpr::app("exp", vec![a, b])),
            inner.prop_map(|a| FExpr::app("list", vec![a])),
        ]
    })
}

/// Checks inference properties of one expression and reports whether it was
/// typeable.
pub fn check_inference(
    env: &Environment,
    e: &Expr,
    sigma: &[FExpr],
    cuts: Vec<bool>,
) -> Result<bool, TestCaseError> {
    // Printing and parsing back gives the same expression.
    prop_assert_eq!(&super::expr(env, &e.to_string()), e);
    let regrouped = super::expr(env, &grouped(e, &mut cuts.into_iter()));
    prop_assert_eq!(&regrouped, e);
    let Ok(t) = infer(e, env) else {
        return Ok(false);
    };
    prop_assert_eq!(&t.expr.skeleton(), e);
    prop_assert_eq!(&infer(&regrouped, env).unwrap(), &t);
    // Any ground instance of the annotations is a derivable typing.
    prop_assert!(t.ty.arity <= sigma.len());
    let want = (t.ty.dom.subst(sigma), t.ty.cod.subst(sigma));
    let got = super::check_typing(env, &t.expr, sigma, &HashMap::new());
    prop_assert_eq!(got, Some(want), "{}", e);
    Ok(true)
}

/// Runs [`check_inference`] on random expressions until at least
/// `min_typed` typeable ones have been checked, and returns that number.
pub fn inference_suite(env: &Environment, min_typed: usize) -> Result<usize, String> {
    let strategy = (
        morphism(),
        prop::collection::vec(ground_object(), 64),
        prop::collection::vec(any::<bool>(), 64),
    );
    let counter = std::cell::Cell::new(0usize);
    for _ in 0..32 {
        if counter.get() >= min_typed {
            break;
        }
        TestRunner::new(config(1000))
            .run(&strategy, |(e, sigma, cuts)| {
                if check_inference(env, &e, &sigma, cuts)? {
                    counter.set(counter.get() + 1);
                }
                Ok(())
            })
            .map_err(|e| e.to_string())?;
    }
    Ok(counter.get())
}
