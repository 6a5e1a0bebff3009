//! Helpers shared by the integration test targets.

#![allow(dead_code)]

pub mod checks;
pub mod props;

use std::collections::HashMap;

use cpl_core::env::{Environment, Side};
use cpl_core::expr::{Atom, Expr};
use cpl_core::fexpr::FExpr;
use cpl_core::infer::{expand_functors, AAtom, AExpr, MorphismType};
use cpl_core::prelude::TRANSCRIPT;
use cpl_core::reduce::{reduce_full, reduce_lazy, Canonical, DEFAULT_FUEL};
use cpl_core::session::Session;
use cpl_core::syntax::{parse_expr, resolve};
use cpl_core::variance::Variance;

/// The morphisms defined during the reference session.
pub const LETS: &str = "\
let add=eval.pair(pr(curry(pi2),curry(s.eval)).pi1,pi2)
let mult=eval.prod(pr(curry(0.!),curry(add.pair(eval,pi2))),id)
let fact=pi1.pr(pair(s.0,0),pair(mult.pair(s.pi2,pi1),s.pi2))
let append=eval.prod(prl(curry(pi2),curry(cons.pair(pi1.pi1,eval.pair(pi2.pi1,pi2)))),id)
let reverse=prl(nil,append.pair(pi2,cons.pair(pi1,nil.!)))
let hd=prl(in2,in1.pi1)
let hdp=case(hd,in2)
let tl=case(in1.pi2,in2).prl(in2,in1.pair(pi1,case(cons,nil).pi2))
let tlp=case(tl,in2)
let seq=pi2.pr(pair(0,nil),pair(s.pi1,cons))
let incseq=fold(id,s).0
let alt=fold(head.pi1,pair(pi2,tail.pi1))
let infseq=fold(id,id).0
";

/// Elements used by the reduction invariants.
pub const CORPUS: &[&str] = &[
    "0",
    "s.0",
    "s.s.0",
    "eval.pair(pr(curry(pi2),curry(s.eval)).pi1,pi2).pair(s.0,s.0)",
    "add.pair(s.0,s.s.0)",
    "add.pair(0,0)",
    "mult.pair(s.s.0,s.s.s.0)",
    "mult.pair(0,s.0)",
    "fact.s.s.s.0",
    "fact.s.s.s.s.0",
    "pr(0,add.pair(s.s.0.!,id)).s.s.0",
    "pi1.pair(s.0,0)",
    "pi2.pair(0,s.s.0)",
    "eval.pair(curry(s.pi2),0)",
    "case(0,s).in1.!",
    "case(0,s).in2.s.0",
    "nat.s.0",
    "head.incseq",
    "head.tail.tail.tail.incseq",
    "head.tail.tail.alt.pair(incseq,infseq)",
    "head.tail.alt.pair(infseq,incseq)",
    "head.inflist(s).incseq",
    "nil",
    "cons.pair(0,nil)",
    "seq.s.s.s.0",
    "append.pair(seq.s.s.0,seq.s.s.s.0)",
    "reverse.seq.s.s.s.0",
    "reverse.append.pair(seq.s.s.0,seq.s.s.s.0)",
    "list(s).seq.s.s.0",
    "list(add.pair(id,id)).seq.s.s.s.0",
    "pi2.pair(0,seq.s.0)",
    "hd.seq.s.s.s.0",
    "hd.nil",
    "hdp.tl.seq.s.s.s.0",
    "tlp.tl.seq.s.s.0",
    "tl.nil",
    "coprod(s,id).in1.0",
    "coprod(s,s.s).in2.0",
    "pair(s.0,nil)",
    "prod(s,s).pair(0,s.0)",
    "curry(pi2).0",
    "exp(id,s).curry(pi2).!",
    "eval.pair(exp(id,s).curry(pi2).!,s.0)",
    "incseq",
    "alt.pair(incseq,infseq)",
    "!",
    "!.s.0",
];

/// A session with the bundled prelude and [`LETS`] loaded.
pub fn session() -> Session {
    let mut s = Session::new();
    let (mut out, mut err) = (Vec::new(), Vec::new());
    s.run_script(TRANSCRIPT, "prelude", &mut out, &mut err);
    s.run_script(LETS, "lets", &mut out, &mut err);
    assert_eq!(s.diagnostics(), 0, "{}", String::from_utf8_lossy(&err));
    s
}

pub fn env() -> Environment {
    session().env().clone()
}

/// Runs a script, returning standard output and standard error.
pub fn run(s: &mut Session, script: &str) -> (String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    s.run_script(script, "input", &mut out, &mut err);
    (
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

/// Parses and resolves an expression.
pub fn expr(env: &Environment, text: &str) -> Expr {
    resolve(&parse_expr(text).unwrap(), env, None).unwrap()
}

/// Expands functor applications, then runs the lazy machine from `id`.
pub fn lazy(env: &Environment, e: &Expr) -> Canonical {
    let e = expand_functors(e, env).unwrap();
    reduce_lazy(&e, Canonical::id(), env, DEFAULT_FUEL).unwrap()
}

/// Expands functor applications, then runs the full machine from `id`.
pub fn full(env: &Environment, e: &Expr) -> Canonical {
    let e = expand_functors(e, env).unwrap();
    reduce_full(&e, Canonical::id(), env, DEFAULT_FUEL).unwrap()
}

/// `s.s...s.0` with `n` successors.
pub fn numeral(n: usize) -> String {
    format!("{}0", "s.".repeat(n))
}

/// Renames `*x` variables in order of first occurrence within one line.
pub fn normalize_vars(line: &str) -> String {
    let mut names: HashMap<String, usize> = HashMap::new();
    let mut out = String::new();
    let mut chars = line.chars().peekable();
    while let Some(c) = chars.next() {
        if c != '*' || !chars.peek().is_some_and(|d| d.is_ascii_lowercase()) {
            out.push(c);
            continue;
        }
        let mut name = String::new();
        while let Some(&d) = chars.peek() {
            if !d.is_ascii_alphanumeric() {
                break;
            }
            name.push(d);
            chars.next();
        }
        let next = names.len();
        let k = *names.entry(name).or_insert(next);
        out.push_str(&format!("*v{k}"));
    }
    out
}

/// Removes every `!` factor, turning emptied compositions into `id`.
pub fn erase_bang(e: &Expr) -> Expr {
    Expr::from_atoms(
        e.atoms()
            .iter()
            .filter(|a| !(matches!(a, Atom::Fact(n, args) if &**n == "!" && args.is_empty())))
            .map(|a| match a {
                Atom::Fact(n, args) => Atom::Fact(n.clone(), args.iter().map(erase_bang).collect()),
                Atom::Func(n, args) => Atom::Func(n.clone(), args.iter().map(erase_bang).collect()),
                other => other.clone(),
            })
            .collect(),
    )
}

/// Mutual instance: equality of types up to renaming.
pub fn same_type(a: &MorphismType, b: &MorphismType) -> bool {
    use cpl_core::fexpr::is_instance;
    is_instance(&a.ends(), &b.ends()) && is_instance(&b.ends(), &a.ends())
}

/// Checks a ground typing rule by rule and returns the derived type.
///
/// `sigma` maps the object variables of the annotations to ground objects
/// and `rho` gives the (ground) types of morphism variables.
pub fn check_typing(
    env: &Environment,
    e: &AExpr,
    sigma: &[FExpr],
    rho: &HashMap<String, (FExpr, FExpr)>,
) -> Option<(FExpr, FExpr)> {
    if e.atoms.is_empty() {
        let k = e.identity.as_ref()?.subst(sigma);
        return Some((k.clone(), k));
    }
    let mut types = Vec::new();
    for a in &e.atoms {
        types.push(check_atom(env, a, sigma, rho)?);
    }
    for w in types.windows(2) {
        if w[1].1 != w[0].0 {
            return None;
        }
    }
    Some((types.last()?.0.clone(), types[0].1.clone()))
}

fn check_atom(
    env: &Environment,
    a: &AAtom,
    sigma: &[FExpr],
    rho: &HashMap<String, (FExpr, FExpr)>,
) -> Option<(FExpr, FExpr)> {
    match a {
        AAtom::Nat { name, anno } => {
            let (o, j) = env.natural(name)?;
            let xs: Vec<FExpr> = anno.iter().map(|t| t.subst(sigma)).collect();
            if xs.len() != o.arity() {
                return None;
            }
            let obj = FExpr::App(o.name.clone(), xs.clone());
            let c = &o.components[j];
            Some((
                o.instantiate(&c.dom, &obj, &xs),
                o.instantiate(&c.cod, &obj, &xs),
            ))
        }
        AAtom::Fact { name, anno, args } => {
            let o = env.factorizer(name)?;
            let all: Vec<FExpr> = anno.iter().map(|t| t.subst(sigma)).collect();
            let (z, xs) = all.split_first()?;
            if xs.len() != o.arity() || args.len() != o.components.len() {
                return None;
            }
            for (arg, c) in args.iter().zip(&o.components) {
                let want = (o.instantiate(&c.dom, z, xs), o.instantiate(&c.cod, z, xs));
                if check_typing(env, arg, sigma, rho)? != want {
                    return None;
                }
            }
            let obj = FExpr::App(o.name.clone(), xs.to_vec());
            Some(match o.side {
                Side::Left => (obj, z.clone()),
                Side::Right => (z.clone(), obj),
            })
        }
        AAtom::Func { name, args } => {
            let o = env.object(name)?;
            let (mut doms, mut cods) = (Vec::new(), Vec::new());
            for (i, arg) in args.iter().enumerate() {
                let (d, c) = check_typing(env, arg, sigma, rho)?;
                match o.varity.get(i) {
                    Variance::Contravariant => {
                        doms.push(c);
                        cods.push(d);
                    }
                    Variance::Fixed if !arg.atoms.is_empty() => return None,
                    _ => {
                        doms.push(d);
                        cods.push(c);
                    }
                }
            }
            Some((
                FExpr::App(o.name.clone(), doms),
                FExpr::App(o.name.clone(), cods),
            ))
        }
        AAtom::Var { name } => rho.get(&**name).cloned(),
    }
}
