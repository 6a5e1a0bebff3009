//! The lazy and full reduction machines.
//!
//! A machine state is a pending expression and a canonical element. The
//! rightmost atom of the expression is examined at every step; composition and
//! identity are handled by the flat representation itself. Every state is
//! reported to the trace sink before the rule is applied, and the final state
//! of every (sub)run is reported with an empty expression.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::env::{Environment, ObjectInfo, Side};
use crate::expr::{Atom, Expr};
use crate::fexpr::FExpr;
use crate::infer::{instantiate_morphism, TypeError};
use crate::Name;

/// Default step budget.
pub const DEFAULT_FUEL: u64 = 1_000_000;

/// A canonical element: naturals of left objects and factorizers of right
/// objects, ending in the identity.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Canonical {
    /// Factors with the head (outermost) last.
    rev: Vec<Atom>,
    /// Set when the identity tail was exposed by splitting off a head; such a
    /// state prints its canonical side as `id` in traces.
    explicit_id: bool,
}

impl Canonical {
    pub fn id() -> Canonical {
        Canonical::default()
    }

    /// Reads an expression as a canonical element, if every atom is a natural
    /// or a factorizer application.
    pub fn from_expr(e: &Expr) -> Option<Canonical> {
        e.atoms()
            .iter()
            .all(|a| matches!(a, Atom::Nat(_) | Atom::Fact(..)))
            .then(|| Canonical {
                rev: e.atoms().iter().rev().cloned().collect(),
                explicit_id: false,
            })
    }

    pub fn to_expr(&self) -> Expr {
        Expr::from_atoms(self.rev.iter().rev().cloned().collect())
    }

    pub fn is_id(&self) -> bool {
        self.rev.is_empty()
    }

    pub fn len(&self) -> usize {
        self.rev.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rev.is_empty()
    }

    pub fn head(&self) -> Option<&Atom> {
        self.rev.last()
    }

    /// Factors, head first.
    pub fn factors(&self) -> impl Iterator<Item = &Atom> {
        self.rev.iter().rev()
    }

    pub fn push(&mut self, a: Atom) {
        self.explicit_id = false;
        self.rev.push(a);
    }

    fn pop(&mut self) -> Option<Atom> {
        self.explicit_id = false;
        self.rev.pop()
    }

    fn single(a: Atom) -> Canonical {
        Canonical {
            rev: vec![a],
            explicit_id: false,
        }
    }

    /// The trace rendering: factors joined by `.`, `id` only when the identity
    /// tail was exposed by a split.
    pub fn trace_string(&self) -> String {
        if self.rev.is_empty() {
            return if self.explicit_id {
                "id".into()
            } else {
                String::new()
            };
        }
        self.to_expr().to_bare_string()
    }
}

impl fmt::Display for Canonical {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_expr())
    }
}

/// One reported machine state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceLine {
    pub step: usize,
    pub depth: usize,
    pub expr: Expr,
    pub canon: Canonical,
}

impl fmt::Display for TraceLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.step)?;
        if self.depth > 0 {
            write!(f, "[{}]", self.depth)?;
        }
        write!(
            f,
            ":{}*{}",
            self.expr.to_bare_string(),
            self.canon.trace_string()
        )
    }
}

/// The rules of both machines.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rule {
    LNat,
    RFact,
    LFact,
    RNat,
    RNatV,
    RNatF,
    FullLNat,
    FullRFact,
    FullCFact,
    FullLFact,
    FullRNat,
}

/// Ways a reduction can fail.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReduceError {
    #[error("reduction exceeded {0} steps")]
    FuelExhausted(u64),
    #[error("no reduction rule applies to `{atom}` against `{canon}`: {reason}")]
    Stuck {
        atom: String,
        canon: String,
        reason: &'static str,
    },
    #[error("several reduction rules apply to `{atom}`: {rules:?}")]
    Ambiguous { atom: String, rules: Vec<Rule> },
    #[error(
        "cannot reduce `{0}`: functor applications and morphism variables must be removed first"
    )]
    Precondition(String),
    #[error(transparent)]
    Type(#[from] TypeError),
}

/// Counts of rule applications.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RuleStats {
    pub counts: BTreeMap<Rule, usize>,
    /// Steps at which more than one rule matched.
    pub ambiguous: usize,
}

impl RuleStats {
    pub fn get(&self, r: Rule) -> usize {
        self.counts.get(&r).copied().unwrap_or(0)
    }
}

type Sink<'a> = Box<dyn FnMut(&TraceLine) + 'a>;

/// A configured reducer over one environment snapshot.
pub struct Reducer<'a> {
    env: &'a Environment,
    fuel: u64,
    used: u64,
    step: usize,
    sink: Option<Sink<'a>>,
    stats: RuleStats,
}

impl<'a> Reducer<'a> {
    pub fn new(env: &'a Environment) -> Reducer<'a> {
        Reducer {
            env,
            fuel: DEFAULT_FUEL,
            used: 0,
            step: 0,
            sink: None,
            stats: RuleStats::default(),
        }
    }

    pub fn with_fuel(mut self, fuel: u64) -> Reducer<'a> {
        self.fuel = fuel;
        self
    }

    pub fn with_trace(mut self, sink: impl FnMut(&TraceLine) + 'a) -> Reducer<'a> {
        self.sink = Some(Box::new(sink));
        self
    }

    pub fn stats(&self) -> &RuleStats {
        &self.stats
    }

    /// Machine states visited so far.
    pub fn steps(&self) -> usize {
        self.step
    }

    /// `⟨e, c⟩ ⟹ c'` in the lazy machine.
    pub fn lazy(&mut self, e: &Expr, c: Canonical) -> Result<Canonical, ReduceError> {
        check_reducible(e)?;
        self.run(e, c, 0, false)
    }

    /// `⟨e, p⟩ ⇛ p'` in the full machine.
    pub fn full(&mut self, e: &Expr, p: Canonical) -> Result<Canonical, ReduceError> {
        check_reducible(e)?;
        self.run(e, p, 0, true)
    }

    /// `⟨c, E, R⟩ ⤳ ⟨ψ_R(..), c''⟩` where `E` ranges over the binder of `r`.
    pub fn project(
        &mut self,
        c: Canonical,
        e: &FExpr,
        r: &ObjectInfo,
    ) -> Result<(Atom, Canonical), ReduceError> {
        self.project_at(c, e, r, 0)
    }

    fn emit(&mut self, depth: usize, stack: &[Atom], c: &Canonical) -> Result<(), ReduceError> {
        if self.used >= self.fuel {
            return Err(ReduceError::FuelExhausted(self.fuel));
        }
        self.used += 1;
        if let Some(sink) = self.sink.as_mut() {
            sink(&TraceLine {
                step: self.step,
                depth,
                expr: Expr::from_atoms(stack.to_vec()),
                canon: c.clone(),
            });
        }
        self.step += 1;
        Ok(())
    }

    fn owner_of_nat(&self, name: &str) -> Option<(&'a ObjectInfo, usize)> {
        self.env.natural(name)
    }

    /// Every rule whose premises match, checked independently.
    fn matching_rules(&self, atom: &Atom, c: &Canonical, full: bool) -> Vec<Rule> {
        let env = self.env;
        let nat = match atom {
            Atom::Nat(n) => env.natural(n).map(|(o, _)| o),
            _ => None,
        };
        let fact = match atom {
            Atom::Fact(n, _) => env.factorizer(n),
            _ => None,
        };
        let head_owner = match c.head() {
            Some(Atom::Nat(n)) => env.natural(n).map(|(o, _)| o.name.clone()),
            _ => None,
        };
        let left_nat = nat.is_some_and(|o| o.side == Side::Left);
        let right_nat = nat.is_some_and(|o| o.side == Side::Right);
        let right_fact = fact.filter(|o| o.side == Side::Right);
        let left_fact =
            fact.is_some_and(|o| o.side == Side::Left && head_owner.as_ref() == Some(&o.name));
        let mut rules = Vec::new();
        if full {
            if left_nat {
                rules.push(Rule::FullLNat);
            }
            if right_fact.is_some_and(|o| !o.unconditioned) {
                rules.push(Rule::FullRFact);
            }
            if right_fact.is_some_and(|o| o.unconditioned) {
                rules.push(Rule::FullCFact);
            }
            if left_fact {
                rules.push(Rule::FullLFact);
            }
            if right_nat {
                rules.push(Rule::FullRNat);
            }
        } else {
            if left_nat {
                rules.push(Rule::LNat);
            }
            if right_fact.is_some() {
                rules.push(Rule::RFact);
            }
            if left_fact {
                rules.push(Rule::LFact);
            }
            if right_nat {
                rules.push(Rule::RNat);
            }
        }
        rules
    }

    fn select(&mut self, atom: &Atom, c: &Canonical, full: bool) -> Result<Rule, ReduceError> {
        let rules = self.matching_rules(atom, c, full);
        match rules[..] {
            [r] => {
                *self.stats.counts.entry(r).or_default() += 1;
                Ok(r)
            }
            [] => Err(ReduceError::Stuck {
                atom: atom.to_string(),
                canon: c.to_string(),
                reason: "the canonical element does not match",
            }),
            _ => {
                self.stats.ambiguous += 1;
                Err(ReduceError::Ambiguous {
                    atom: atom.to_string(),
                    rules,
                })
            }
        }
    }

    fn run(
        &mut self,
        e: &Expr,
        mut c: Canonical,
        depth: usize,
        full: bool,
    ) -> Result<Canonical, ReduceError> {
        let env = self.env;
        let mut stack: Vec<Atom> = e.atoms().to_vec();
        loop {
            self.emit(depth, &stack, &c)?;
            let Some(atom) = stack.pop() else {
                return Ok(c);
            };
            match self.select(&atom, &c, full)? {
                Rule::LNat | Rule::RFact | Rule::FullLNat | Rule::FullRFact => c.push(atom),
                Rule::LFact | Rule::FullLFact => {
                    let Atom::Fact(psi, args) = &atom else {
                        unreachable!("selected for a factorizer")
                    };
                    let o = env
                        .factorizer(psi)
                        .expect("selected for a known factorizer");
                    let Some(Atom::Nat(alpha)) = c.pop() else {
                        unreachable!("selected for a natural head")
                    };
                    let j = o
                        .component_index(&alpha)
                        .expect("head owned by the same object");
                    let me = Expr::atom(atom.clone());
                    let body = instantiate_morphism(env, &o.components[j].dom, &me, &[])?;
                    stack.extend(args[j].clone().then(&body).into_atoms());
                }
                Rule::RNat | Rule::FullRNat => {
                    let Atom::Nat(alpha) = &atom else {
                        unreachable!("selected for a natural")
                    };
                    let (o, j) = self
                        .owner_of_nat(alpha)
                        .expect("selected for a known natural");
                    let comp = &o.components[j];
                    let (psi, rest) = if full {
                        self.locate(c, &comp.dom, o)?
                    } else {
                        self.project_at(c, &comp.dom, o, depth)?
                    };
                    let Atom::Fact(_, args) = &psi else {
                        unreachable!("projection yields a factorizer")
                    };
                    let post = instantiate_morphism(env, &comp.cod, &Expr::atom(psi.clone()), &[])?;
                    stack.extend(post.then(&args[j]).into_atoms());
                    c = rest;
                }
                Rule::FullCFact => {
                    let Atom::Fact(psi, args) = &atom else {
                        unreachable!("selected for a factorizer")
                    };
                    let o = env
                        .factorizer(psi)
                        .expect("selected for a known factorizer");
                    let tail = c.to_expr();
                    let mut saturated = Vec::with_capacity(args.len());
                    for (arg, comp) in args.iter().zip(&o.components) {
                        if comp.dom == FExpr::Var(0) {
                            saturated.push(self.run(arg, c.clone(), depth + 1, true)?.to_expr());
                        } else {
                            let pushed = instantiate_morphism(env, &comp.dom, &tail, &[])?;
                            saturated.push(arg.clone().then(&pushed));
                        }
                    }
                    c = Canonical::single(Atom::Fact(psi.clone(), saturated.into()));
                }
                r @ (Rule::RNatV | Rule::RNatF) => {
                    unreachable!("{r:?} is selected inside projection")
                }
            }
        }
    }

    fn project_at(
        &mut self,
        mut c: Canonical,
        e: &FExpr,
        r: &ObjectInfo,
        depth: usize,
    ) -> Result<(Atom, Canonical), ReduceError> {
        let env = self.env;
        match e {
            FExpr::Var(0) => {
                let head = c.pop();
                match head {
                    Some(h @ Atom::Fact(..)) if h.name() == &r.factorizer => {
                        *self.stats.counts.entry(Rule::RNatV).or_default() += 1;
                        c.explicit_id = c.is_empty();
                        Ok((h, c))
                    }
                    other => Err(stuck_head(other, &r.factorizer)),
                }
            }
            FExpr::App(p, args) => {
                let po = env.object(p).expect("declared functor");
                let (slot, j) = productive_path(po, args)?;
                let head = c.pop();
                let Some(Atom::Fact(psi, eh)) = head.clone().filter(|h| h.name() == &po.factorizer)
                else {
                    return Err(stuck_head(head, &po.factorizer));
                };
                *self.stats.counts.entry(Rule::RNatF).or_default() += 1;
                let chat = c;
                let c1 = self.run(&eh[j], chat.clone(), depth + 1, false)?;
                let inner = path_expr(po, j, args);
                debug_assert!(inner.mentions(0) && args[slot].mentions(0));
                let (found, c2) = self.project_at(c1, &inner, r, depth)?;
                let tail = chat.to_expr();
                let mut residual = Vec::with_capacity(eh.len());
                for (k, comp) in po.components.iter().enumerate() {
                    if k == j {
                        residual.push(c2.to_expr());
                    } else {
                        let pushed = instantiate_morphism(env, &comp.dom, &tail, &[])?;
                        residual.push(eh[k].clone().then(&pushed));
                    }
                }
                Ok((found, Canonical::single(Atom::Fact(psi, residual.into()))))
            }
            FExpr::Var(_) => Err(ReduceError::Stuck {
                atom: r.render(e),
                canon: c.to_string(),
                reason: "the domain is not productive",
            }),
        }
    }

    /// Finds `ψ_R(..)` along the occurrence path of `R` in `e` inside a full
    /// canonical element, and returns it together with the element in which
    /// it has been replaced by its tail.
    fn locate(
        &mut self,
        mut c: Canonical,
        e: &FExpr,
        r: &ObjectInfo,
    ) -> Result<(Atom, Canonical), ReduceError> {
        let env = self.env;
        match e {
            FExpr::Var(0) => match c.pop() {
                Some(h @ Atom::Fact(..)) if h.name() == &r.factorizer => Ok((h, c)),
                other => Err(stuck_head(other, &r.factorizer)),
            },
            FExpr::App(p, args) => {
                let po = env.object(p).expect("declared functor");
                let (_, j) = productive_path(po, args)?;
                let head = c.pop();
                let Some(Atom::Fact(psi, eh)) = head.clone().filter(|h| h.name() == &po.factorizer)
                else {
                    return Err(stuck_head(head, &po.factorizer));
                };
                let Some(sub) = Canonical::from_expr(&eh[j]) else {
                    return Err(ReduceError::Stuck {
                        atom: eh[j].to_string(),
                        canon: c.to_string(),
                        reason: "the component is not canonical",
                    });
                };
                let (found, sub) = self.locate(sub, &path_expr(po, j, args), r)?;
                let mut rebuilt: Vec<Expr> = eh.to_vec();
                rebuilt[j] = sub.to_expr();
                c.push(Atom::Fact(psi, Arc::from(rebuilt)));
                Ok((found, c))
            }
            FExpr::Var(_) => Err(ReduceError::Stuck {
                atom: r.render(e),
                canon: c.to_string(),
                reason: "the domain is not productive",
            }),
        }
    }
}

/// The argument slot of `args` holding the self-reference and the component
/// of `po` projecting onto it.
fn productive_path(po: &ObjectInfo, args: &[FExpr]) -> Result<(usize, usize), ReduceError> {
    let slot = args.iter().position(|a| a.mentions(0));
    match slot.and_then(|i| po.productive.get(i).copied().flatten().map(|j| (i, j))) {
        Some(sj) => Ok(sj),
        None => Err(ReduceError::Stuck {
            atom: po.name.to_string(),
            canon: String::new(),
            reason: "the functor is not productive in the required slot",
        }),
    }
}

/// `E'_{P,j}[E1..En/Y1..Yn]`, the type of the `j`-th projection of `P(E..)`.
fn path_expr(po: &ObjectInfo, j: usize, args: &[FExpr]) -> FExpr {
    let placeholder = FExpr::App(Name::from("?"), Vec::new());
    po.instantiate(&po.components[j].cod, &placeholder, args)
}

fn stuck_head(head: Option<Atom>, expected: &Name) -> ReduceError {
    ReduceError::Stuck {
        atom: expected.to_string(),
        canon: head.map_or_else(|| "id".to_string(), |h| h.to_string()),
        reason: "expected a factorizer of this object at the head",
    }
}

fn check_reducible(e: &Expr) -> Result<(), ReduceError> {
    if e.has_functors() || e.has_vars() {
        return Err(ReduceError::Precondition(e.to_string()));
    }
    Ok(())
}

/// Lazy reduction with default settings and no trace.
pub fn reduce_lazy(
    e: &Expr,
    c: Canonical,
    env: &Environment,
    fuel: u64,
) -> Result<Canonical, ReduceError> {
    Reducer::new(env).with_fuel(fuel).lazy(e, c)
}

/// Full reduction with default settings and no trace.
pub fn reduce_full(
    e: &Expr,
    p: Canonical,
    env: &Environment,
    fuel: u64,
) -> Result<Canonical, ReduceError> {
    Reducer::new(env).with_fuel(fuel).full(e, p)
}
