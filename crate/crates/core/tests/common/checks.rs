//! Reduction invariants over [`CORPUS`](super::CORPUS).

use cpl_core::env::{Environment, Side};
use cpl_core::expr::Atom;
use cpl_core::fexpr::{is_instance, FExpr};
use cpl_core::infer::expand_functors;
use cpl_core::reduce::{Canonical, Reducer, DEFAULT_FUEL};
use cpl_core::session::element_type;

use super::{erase_bang, expr, full, lazy, same_type, CORPUS};

type Check = Result<(), String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Check {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Both machines finish within the default fuel and never find two
/// applicable rules.
pub fn determinism_and_termination(env: &Environment) -> Check {
    for src in CORPUS {
        let e = expand_functors(&expr(env, src), env).map_err(|e| e.to_string())?;
        for is_full in [false, true] {
            let mut r = Reducer::new(env).with_fuel(DEFAULT_FUEL);
            let res = if is_full {
                r.full(&e, Canonical::id())
            } else {
                r.lazy(&e, Canonical::id())
            };
            res.map_err(|err| format!("{src} (full: {is_full}): {err}"))?;
            ensure(r.stats().ambiguous == 0, || {
                format!("{src}: ambiguous step")
            })?;
        }
    }
    Ok(())
}

/// The result of either machine can be given the input's type; when its own
/// most general type is ground, the two coincide.
pub fn type_preservation(env: &Environment) -> Check {
    for src in CORPUS {
        let e = expr(env, src);
        let before = element_type(&e, env).map_err(|e| e.to_string())?;
        for c in [lazy(env, &e), full(env, &e)] {
            let after = element_type(&c.to_expr(), env).map_err(|e| e.to_string())?;
            let msg = || format!("{src} ~> {c}: {before} vs {after}");
            ensure(is_instance(&after.ends(), &before.ends()), msg)?;
            ensure(after.arity > 0 || same_type(&before, &after), msg)?;
        }
    }
    Ok(())
}

/// Lazy results are headed by a natural of a left object or a factorizer of
/// a right object, matching the codomain.
pub fn canonical_heads(env: &Environment) -> Check {
    for src in CORPUS {
        let e = expr(env, src);
        let ty = element_type(&e, env).map_err(|e| e.to_string())?;
        let FExpr::App(obj, _) = &ty.cod else {
            continue;
        };
        let o = env
            .object(obj)
            .ok_or_else(|| format!("{src}: unknown {obj}"))?;
        let c = lazy(env, &e);
        let head = c.head().ok_or_else(|| format!("{src}: empty result"))?;
        let builds = match (o.side, head) {
            (Side::Left, Atom::Nat(n)) => env.natural(n).is_some_and(|(p, _)| p.name == o.name),
            (Side::Right, Atom::Fact(n, _)) => env.factorizer(n).is_some_and(|p| p.name == o.name),
            _ => false,
        };
        ensure(builds, || {
            format!("{src}: head {head} does not build {obj}")
        })?;
    }
    Ok(())
}

/// Fully reducing the lazy result gives the full result, for every element
/// of type `nat` or `list(nat)`. Returns the number of elements checked.
pub fn lazy_full_agreement(env: &Environment) -> Result<usize, String> {
    let mut checked = 0;
    for src in CORPUS {
        let e = expr(env, src);
        let cod = element_type(&e, env)
            .map_err(|e| e.to_string())?
            .cod
            .to_string();
        if cod != "nat" && cod != "list(nat)" {
            continue;
        }
        let via_lazy = full(env, &lazy(env, &e).to_expr());
        let direct = full(env, &e);
        ensure(via_lazy == direct, || {
            format!("{src}: {via_lazy} vs {direct}")
        })?;
        checked += 1;
    }
    Ok(checked)
}

/// `case(0,s)` and its inverse compose to identities on the sample inputs,
/// comparing full normal forms with `!` factors erased.
pub fn fixed_point_round_trips(env: &Environment) -> Check {
    let f = "case(0,s)";
    let g = "pr(in1,in2.case(0,s))";
    let round_trips = [
        (format!("{f}.{g}"), ["0", "s.0", "s.s.0"]),
        (format!("{g}.{f}"), ["in1.!", "in2.0", "in2.s.0"]),
    ];
    for (iso, inputs) in &round_trips {
        for x in inputs {
            let there = erase_bang(&full(env, &expr(env, &format!("{iso}.{x}"))).to_expr());
            let here = erase_bang(&full(env, &expr(env, x)).to_expr());
            ensure(there == here, || format!("{iso}.{x}: {there} vs {here}"))?;
        }
    }
    Ok(())
}

/// Printing then parsing corpus expressions and their results is the identity.
pub fn print_parse_round_trip(env: &Environment) -> Check {
    for src in CORPUS {
        let e = expr(env, src);
        ensure(expr(env, &e.to_string()) == e, || src.to_string())?;
        let c = full(env, &e).to_expr();
        ensure(expr(env, &c.to_string()) == c, || format!("{src} ~> {c}"))?;
    }
    Ok(())
}
