//! Most general type inference for morphism expressions, and expansion of
//! functor applications into factorizer form.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::env::{Environment, ObjectInfo};
use crate::expr::{Atom, Expr};
use crate::fexpr::{FExpr, Unifier, UnifyError};
use crate::variance::Variance;
use crate::Name;

/// The type `dom -> cod` of a morphism, with the types of its morphism
/// variables, all over one binder of `arity` object variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MorphismType {
    pub arity: usize,
    pub dom: FExpr,
    pub cod: FExpr,
    pub rho: Vec<(Name, FExpr, FExpr)>,
}

impl MorphismType {
    /// Unifies the domain with `obj` and renumbers the result.
    pub fn with_domain(&self, obj: &FExpr) -> Result<MorphismType, UnifyError> {
        let mut u = Unifier::with_vars(self.arity);
        let shift = self.arity;
        let obj = obj.map_vars(&mut |v| v + shift);
        for _ in 0..obj.var_bound().saturating_sub(shift) {
            u.fresh();
        }
        u.unify(&self.dom, &obj)?;
        Ok(close_type(&u, &self.dom, &self.cod, &self.rho, &[]).0)
    }

    /// The domain and codomain as a pair, for instance checks.
    pub fn ends(&self) -> [FExpr; 2] {
        [self.dom.clone(), self.cod.clone()]
    }
}

impl fmt::Display for MorphismType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", self.dom, self.cod)
    }
}

/// An expression whose identities, naturals and factorizers carry the
/// functorial expressions instantiating their schemas.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AExpr {
    pub atoms: Vec<AAtom>,
    /// The object an identity is taken at; set exactly when `atoms` is empty.
    pub identity: Option<FExpr>,
}

/// An annotated atom.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AAtom {
    Nat {
        name: Name,
        anno: Vec<FExpr>,
    },
    Fact {
        name: Name,
        anno: Vec<FExpr>,
        args: Vec<AExpr>,
    },
    Func {
        name: Name,
        args: Vec<AExpr>,
    },
    Var {
        name: Name,
    },
}

impl AExpr {
    /// Erases the annotations.
    pub fn skeleton(&self) -> Expr {
        Expr::from_atoms(
            self.atoms
                .iter()
                .map(|a| match a {
                    AAtom::Nat { name, .. } => Atom::Nat(name.clone()),
                    AAtom::Fact { name, args, .. } => {
                        Atom::Fact(name.clone(), args.iter().map(AExpr::skeleton).collect())
                    }
                    AAtom::Func { name, args } => {
                        Atom::Func(name.clone(), args.iter().map(AExpr::skeleton).collect())
                    }
                    AAtom::Var { name } => Atom::Var(name.clone()),
                })
                .collect(),
        )
    }

    fn map_types(&self, f: &mut impl FnMut(&FExpr) -> FExpr) -> AExpr {
        AExpr {
            atoms: self
                .atoms
                .iter()
                .map(|a| match a {
                    AAtom::Nat { name, anno } => AAtom::Nat {
                        name: name.clone(),
                        anno: anno.iter().map(&mut *f).collect(),
                    },
                    AAtom::Fact { name, anno, args } => AAtom::Fact {
                        name: name.clone(),
                        anno: anno.iter().map(&mut *f).collect(),
                        args: args.iter().map(|e| e.map_types(f)).collect(),
                    },
                    AAtom::Func { name, args } => AAtom::Func {
                        name: name.clone(),
                        args: args.iter().map(|e| e.map_types(f)).collect(),
                    },
                    AAtom::Var { name } => AAtom::Var { name: name.clone() },
                })
                .collect(),
            identity: self.identity.as_ref().map(f),
        }
    }

    fn collect_types<'a>(&'a self, out: &mut Vec<&'a FExpr>) {
        out.extend(self.identity.iter());
        for a in &self.atoms {
            match a {
                AAtom::Nat { anno, .. } => out.extend(anno.iter()),
                AAtom::Fact { anno, args, .. } => {
                    out.extend(anno.iter());
                    args.iter().for_each(|e| e.collect_types(out));
                }
                AAtom::Func { args, .. } => args.iter().for_each(|e| e.collect_types(out)),
                AAtom::Var { .. } => {}
            }
        }
    }
}

/// The result of inference: the most general annotation and type.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Typing {
    pub expr: AExpr,
    pub ty: MorphismType,
}

/// Why an expression has no type.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TypeError {
    #[error("ill-typed composition: `{outer}` expects {expected} but `{inner}` produces {found}")]
    Composition {
        outer: String,
        inner: String,
        expected: String,
        found: String,
    },
    #[error("argument {index} of `{name}` should have type {expected} but has type {found}")]
    Argument {
        name: Name,
        index: usize,
        expected: String,
        found: String,
    },
    #[error("argument {index} of functor `{name}` is in a fixed slot and must be id")]
    FixedSlot { name: Name, index: usize },
    #[error("`{name}` takes {expected} argument(s), given {got}")]
    Arity {
        name: Name,
        expected: usize,
        got: usize,
    },
    #[error("unknown {what} `{name}`")]
    Unknown { what: &'static str, name: Name },
    #[error("morphism variable `{name}` is used at incompatible types")]
    Variable { name: Name },
}

/// Infers the most general annotated expression and type of `e`.
pub fn infer(e: &Expr, env: &Environment) -> Result<Typing, TypeError> {
    let mut cx = Inferer {
        env,
        u: Unifier::new(),
        rho: Vec::new(),
    };
    let (ae, dom, cod) = cx.expr(e)?;
    let mut annos = Vec::new();
    ae.collect_types(&mut annos);
    let annos: Vec<FExpr> = annos.into_iter().cloned().collect();
    let (ty, rank) = close_type(&cx.u, &dom, &cod, &cx.rho, &annos);
    let expr = ae.map_types(&mut |t| cx.u.resolve(t).map_vars(&mut |v| rank[&v]));
    Ok(Typing { expr, ty })
}

/// Resolves a type and renumbers its variables: those of the domain and
/// codomain first, then those only in `rho`, then those only in `extra`, each
/// group in creation order.
fn close_type(
    u: &Unifier,
    dom: &FExpr,
    cod: &FExpr,
    rho: &[(Name, FExpr, FExpr)],
    extra: &[FExpr],
) -> (MorphismType, HashMap<usize, usize>) {
    let dom = u.resolve(dom);
    let cod = u.resolve(cod);
    let rho: Vec<(Name, FExpr, FExpr)> = rho
        .iter()
        .map(|(n, a, b)| (n.clone(), u.resolve(a), u.resolve(b)))
        .collect();
    let extra: Vec<FExpr> = extra.iter().map(|t| u.resolve(t)).collect();
    let mut rank = HashMap::new();
    let groups: [Vec<&FExpr>; 3] = [
        vec![&dom, &cod],
        rho.iter().flat_map(|(_, a, b)| [a, b]).collect(),
        extra.iter().collect(),
    ];
    for group in groups {
        let mut vs = Vec::new();
        group.iter().for_each(|t| t.vars_in_order(&mut vs));
        vs.sort_unstable();
        for v in vs {
            let next = rank.len();
            rank.entry(v).or_insert(next);
        }
    }
    let ren = |t: &FExpr| t.map_vars(&mut |v| rank[&v]);
    let ty = MorphismType {
        arity: rank.len(),
        dom: ren(&dom),
        cod: ren(&cod),
        rho: rho
            .iter()
            .map(|(n, a, b)| (n.clone(), ren(a), ren(b)))
            .collect(),
    };
    (ty, rank)
}

/// Renumbers the variables of a group of types from zero, for messages.
fn tidy(ts: &[FExpr]) -> Vec<FExpr> {
    let mut vs = Vec::new();
    ts.iter().for_each(|t| t.vars_in_order(&mut vs));
    ts.iter()
        .map(|t| t.map_vars(&mut |v| vs.iter().position(|w| *w == v).expect("collected")))
        .collect()
}

struct Inferer<'a> {
    env: &'a Environment,
    u: Unifier,
    rho: Vec<(Name, FExpr, FExpr)>,
}

impl Inferer<'_> {
    fn expr(&mut self, e: &Expr) -> Result<(AExpr, FExpr, FExpr), TypeError> {
        if e.is_empty() {
            let x = self.u.fresh_var();
            return Ok((
                AExpr {
                    atoms: Vec::new(),
                    identity: Some(x.clone()),
                },
                x.clone(),
                x,
            ));
        }
        let mut typed = Vec::with_capacity(e.len());
        for a in e.atoms() {
            typed.push(self.atom(a)?);
        }
        for k in (1..typed.len()).rev() {
            let (inner_cod, outer_dom) = (typed[k].2.clone(), typed[k - 1].1.clone());
            if self.u.unify(&inner_cod, &outer_dom).is_err() {
                let t = tidy(&[self.u.resolve(&outer_dom), self.u.resolve(&inner_cod)]);
                return Err(TypeError::Composition {
                    outer: Expr::from_atoms(e.atoms()[..k].to_vec()).to_string(),
                    inner: Expr::from_atoms(e.atoms()[k..].to_vec()).to_string(),
                    expected: t[0].to_string(),
                    found: t[1].to_string(),
                });
            }
        }
        let dom = typed.last().expect("nonempty").1.clone();
        let cod = typed[0].2.clone();
        Ok((
            AExpr {
                atoms: typed.into_iter().map(|t| t.0).collect(),
                identity: None,
            },
            dom,
            cod,
        ))
    }

    fn fresh_params(&mut self, o: &ObjectInfo) -> Vec<FExpr> {
        (0..o.arity()).map(|_| self.u.fresh_var()).collect()
    }

    fn atom(&mut self, a: &Atom) -> Result<(AAtom, FExpr, FExpr), TypeError> {
        let env = self.env;
        match a {
            Atom::Nat(name) => {
                let (o, j) = env.natural(name).ok_or_else(|| TypeError::Unknown {
                    what: "natural transformation",
                    name: name.clone(),
                })?;
                let xs = self.fresh_params(o);
                let obj = FExpr::App(o.name.clone(), xs.clone());
                let c = &o.components[j];
                let dom = o.instantiate(&c.dom, &obj, &xs);
                let cod = o.instantiate(&c.cod, &obj, &xs);
                Ok((
                    AAtom::Nat {
                        name: name.clone(),
                        anno: xs,
                    },
                    dom,
                    cod,
                ))
            }
            Atom::Fact(name, args) => {
                let o = env.factorizer(name).ok_or_else(|| TypeError::Unknown {
                    what: "factorizer",
                    name: name.clone(),
                })?;
                if args.len() != o.components.len() {
                    return Err(TypeError::Arity {
                        name: name.clone(),
                        expected: o.components.len(),
                        got: args.len(),
                    });
                }
                let z = self.u.fresh_var();
                let xs = self.fresh_params(o);
                let mut aargs = Vec::with_capacity(args.len());
                for (i, (arg, c)) in args.iter().zip(&o.components).enumerate() {
                    let (ae, d, k) = self.expr(arg)?;
                    let want_d = o.instantiate(&c.dom, &z, &xs);
                    let want_k = o.instantiate(&c.cod, &z, &xs);
                    let saved = self.u.clone();
                    if self
                        .u
                        .unify(&d, &want_d)
                        .and_then(|_| self.u.unify(&k, &want_k))
                        .is_err()
                    {
                        self.u = saved;
                        let t = tidy(&[
                            self.u.resolve(&want_d),
                            self.u.resolve(&want_k),
                            self.u.resolve(&d),
                            self.u.resolve(&k),
                        ]);
                        return Err(TypeError::Argument {
                            name: name.clone(),
                            index: i + 1,
                            expected: format!("{} -> {}", t[0], t[1]),
                            found: format!("{} -> {}", t[2], t[3]),
                        });
                    }
                    aargs.push(ae);
                }
                let obj = FExpr::App(o.name.clone(), xs.clone());
                let (dom, cod) = match o.side {
                    crate::env::Side::Left => (obj, z.clone()),
                    crate::env::Side::Right => (z.clone(), obj),
                };
                let mut anno = vec![z];
                anno.extend(xs);
                Ok((
                    AAtom::Fact {
                        name: name.clone(),
                        anno,
                        args: aargs,
                    },
                    dom,
                    cod,
                ))
            }
            Atom::Func(name, args) => {
                let o = env.object(name).ok_or_else(|| TypeError::Unknown {
                    what: "functor",
                    name: name.clone(),
                })?;
                if args.len() != o.arity() {
                    return Err(TypeError::Arity {
                        name: name.clone(),
                        expected: o.arity(),
                        got: args.len(),
                    });
                }
                let mut aargs = Vec::with_capacity(args.len());
                let (mut doms, mut cods) = (Vec::new(), Vec::new());
                for (i, arg) in args.iter().enumerate() {
                    let (ae, d, k) = self.expr(arg)?;
                    match o.varity.get(i) {
                        Variance::Covariant | Variance::Free => {
                            doms.push(d);
                            cods.push(k);
                        }
                        Variance::Contravariant => {
                            doms.push(k);
                            cods.push(d);
                        }
                        Variance::Fixed => {
                            if !arg.is_id() {
                                return Err(TypeError::FixedSlot {
                                    name: name.clone(),
                                    index: i + 1,
                                });
                            }
                            doms.push(d);
                            cods.push(k);
                        }
                    }
                    aargs.push(ae);
                }
                Ok((
                    AAtom::Func {
                        name: name.clone(),
                        args: aargs,
                    },
                    FExpr::App(o.name.clone(), doms),
                    FExpr::App(o.name.clone(), cods),
                ))
            }
            Atom::Var(name) => {
                let x = self.u.fresh_var();
                let y = self.u.fresh_var();
                if let Some((_, a, b)) = self.rho.iter().find(|(n, _, _)| n == name).cloned() {
                    if self
                        .u
                        .unify(&x, &a)
                        .and_then(|_| self.u.unify(&y, &b))
                        .is_err()
                    {
                        return Err(TypeError::Variable { name: name.clone() });
                    }
                } else {
                    self.rho.push((name.clone(), x.clone(), y.clone()));
                }
                Ok((AAtom::Var { name: name.clone() }, x, y))
            }
        }
    }
}

/// Rewrites every functor application into factorizer form.
///
/// `F(h1..hn)` becomes `ψ_F(.., E'_i[I/F,h/X] ∘ α_i ∘ E_i[I/F,h/X], ..)`;
/// an application to identities only (with `n ≥ 1`) becomes the identity.
pub fn expand_functors(e: &Expr, env: &Environment) -> Result<Expr, TypeError> {
    let mut out = Vec::with_capacity(e.len());
    for a in e.atoms() {
        match a {
            Atom::Nat(_) | Atom::Var(_) => out.push(a.clone()),
            Atom::Fact(name, args) => {
                let args = args
                    .iter()
                    .map(|x| expand_functors(x, env))
                    .collect::<Result<Vec<_>, _>>()?;
                out.push(Atom::Fact(name.clone(), args.into()));
            }
            Atom::Func(name, args) => {
                let args = args
                    .iter()
                    .map(|x| expand_functors(x, env))
                    .collect::<Result<Vec<_>, _>>()?;
                out.extend(functor_morphism(env, name, &args)?.into_atoms());
            }
        }
    }
    Ok(Expr::from_atoms(out))
}

/// The factorizer form of `F(h1..hn)` for already expanded `h`.
pub fn functor_morphism(env: &Environment, name: &str, hs: &[Expr]) -> Result<Expr, TypeError> {
    let o = env.object(name).ok_or_else(|| TypeError::Unknown {
        what: "functor",
        name: Name::from(name),
    })?;
    if hs.len() != o.arity() {
        return Err(TypeError::Arity {
            name: Name::from(name),
            expected: o.arity(),
            got: hs.len(),
        });
    }
    if !hs.is_empty() && hs.iter().all(Expr::is_id) {
        return Ok(Expr::id());
    }
    let me = Expr::id();
    let args = o
        .components
        .iter()
        .map(|c| {
            let pre = instantiate_morphism(env, &c.dom, &me, hs)?;
            let post = instantiate_morphism(env, &c.cod, &me, hs)?;
            Ok(post.then(&Expr::atom(Atom::Nat(c.name.clone()))).then(&pre))
        })
        .collect::<Result<Vec<_>, TypeError>>()?;
    Ok(Expr::atom(Atom::Fact(o.factorizer.clone(), args.into())))
}

/// Reads a component expression as a morphism: the declared object (variable
/// 0) becomes `self_image`, parameter `k` becomes `params[k]` and every functor
/// application is expanded.
pub fn instantiate_morphism(
    env: &Environment,
    e: &FExpr,
    self_image: &Expr,
    params: &[Expr],
) -> Result<Expr, TypeError> {
    match e {
        FExpr::Var(0) => Ok(self_image.clone()),
        FExpr::Var(k) => Ok(params.get(k - 1).cloned().unwrap_or_default()),
        FExpr::App(g, args) => {
            let hs = args
                .iter()
                .map(|a| instantiate_morphism(env, a, self_image, params))
                .collect::<Result<Vec<_>, _>>()?;
            functor_morphism(env, g, &hs)
        }
    }
}
