//! Functorial expressions: the terms built from functor names and variables
//! that serve as object types.
//!
//! A [`ClosedFExpr`] `λ(X0..Xn-1).E` denotes an n-ary functor. Variables are
//! binder indices; they print as `*a`, `*b`, … in index order. This module also
//! hosts the first-order unifier shared by closed-expression unification and by
//! type inference.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::variance::{varity_product, Varity};
use crate::Name;

/// An open functorial expression.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FExpr {
    Var(usize),
    App(Name, Vec<FExpr>),
}

impl FExpr {
    pub fn app(name: &str, args: Vec<FExpr>) -> FExpr {
        FExpr::App(Name::from(name), args)
    }

    /// A nullary application, i.e. a constant object.
    pub fn constant(name: &str) -> FExpr {
        FExpr::App(Name::from(name), Vec::new())
    }

    /// Whether variable `i` occurs.
    pub fn mentions(&self, i: usize) -> bool {
        match self {
            FExpr::Var(j) => *j == i,
            FExpr::App(_, args) => args.iter().any(|a| a.mentions(i)),
        }
    }

    /// Largest variable index plus one, or zero for a ground expression.
    pub fn var_bound(&self) -> usize {
        match self {
            FExpr::Var(j) => j + 1,
            FExpr::App(_, args) => args.iter().map(FExpr::var_bound).max().unwrap_or(0),
        }
    }

    /// Variables in first-occurrence order, without repetition.
    pub fn vars_in_order(&self, out: &mut Vec<usize>) {
        match self {
            FExpr::Var(j) => {
                if !out.contains(j) {
                    out.push(*j)
                }
            }
            FExpr::App(_, args) => args.iter().for_each(|a| a.vars_in_order(out)),
        }
    }

    /// Nesting depth: variables and constants have depth 0.
    pub fn depth(&self) -> usize {
        match self {
            FExpr::Var(_) => 0,
            FExpr::App(_, args) => args.iter().map(|a| a.depth() + 1).max().unwrap_or(0),
        }
    }

    /// Replaces every variable `i` by `images[i]`.
    ///
    /// Panics if a variable is out of range; callers check arities first.
    pub fn subst(&self, images: &[FExpr]) -> FExpr {
        match self {
            FExpr::Var(j) => images[*j].clone(),
            FExpr::App(n, args) => {
                FExpr::App(n.clone(), args.iter().map(|a| a.subst(images)).collect())
            }
        }
    }

    /// Renames variables through `f`.
    pub fn map_vars(&self, f: &mut impl FnMut(usize) -> usize) -> FExpr {
        match self {
            FExpr::Var(j) => FExpr::Var(f(*j)),
            FExpr::App(n, args) => {
                FExpr::App(n.clone(), args.iter().map(|a| a.map_vars(f)).collect())
            }
        }
    }

    /// Every functor name used, with the argument count it is applied to.
    pub fn applications(&self, out: &mut Vec<(Name, usize)>) {
        if let FExpr::App(n, args) = self {
            out.push((n.clone(), args.len()));
            args.iter().for_each(|a| a.applications(out));
        }
    }
}

/// Name of the `i`-th object variable: `a`..`z`, then `a1`, `b1`, ….
pub fn var_name(i: usize) -> String {
    let letter = (b'a' + (i % 26) as u8) as char;
    if i < 26 {
        letter.to_string()
    } else {
        format!("{letter}{}", i / 26)
    }
}

impl fmt::Display for FExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FExpr::Var(i) => write!(f, "*{}", var_name(*i)),
            FExpr::App(n, args) => {
                write!(f, "{n}")?;
                if !args.is_empty() {
                    write!(f, "(")?;
                    for (k, a) in args.iter().enumerate() {
                        if k > 0 {
                            write!(f, ",")?;
                        }
                        write!(f, "{a}")?;
                    }
                    write!(f, ")")?;
                }
                Ok(())
            }
        }
    }
}

/// Structural errors on functorial expressions.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FExprError {
    #[error("variable index {index} out of range for a binder of {arity}")]
    UnboundVariable { index: usize, arity: usize },
    #[error("substitution arity mismatch: expected {expected} images, got {got}")]
    SubstitutionArity { expected: usize, got: usize },
    #[error("substitution images disagree on binder size ({first} vs {other})")]
    MixedTargetArity { first: usize, other: usize },
    #[error("unknown functor `{0}`")]
    UnknownFunctor(Name),
    #[error("functor `{name}` takes {expected} argument(s), applied to {got}")]
    FunctorArity {
        name: Name,
        expected: usize,
        got: usize,
    },
}

/// A closed functorial expression `λ(X0..Xn-1).body`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ClosedFExpr {
    pub arity: usize,
    pub body: FExpr,
}

impl ClosedFExpr {
    pub fn new(arity: usize, body: FExpr) -> Result<ClosedFExpr, FExprError> {
        let bound = body.var_bound();
        if bound > arity {
            return Err(FExprError::UnboundVariable {
                index: bound - 1,
                arity,
            });
        }
        Ok(ClosedFExpr { arity, body })
    }

    /// `λ(X0..Xn-1).Xi`.
    pub fn projection(arity: usize, i: usize) -> ClosedFExpr {
        ClosedFExpr {
            arity,
            body: FExpr::Var(i),
        }
    }

    /// Renumbers variables in first-occurrence order, unused binders last.
    ///
    /// Two expressions are equivalent up to renaming iff their canonical forms
    /// are equal.
    pub fn canonical(&self) -> ClosedFExpr {
        let mut order = Vec::new();
        self.body.vars_in_order(&mut order);
        for i in 0..self.arity {
            if !order.contains(&i) {
                order.push(i);
            }
        }
        let mut rank = vec![0; self.arity];
        for (r, v) in order.iter().enumerate() {
            rank[*v] = r;
        }
        ClosedFExpr {
            arity: self.arity,
            body: self.body.map_vars(&mut |i| rank[i]),
        }
    }

    /// Equality up to renaming of bound variables.
    pub fn equiv(&self, other: &ClosedFExpr) -> bool {
        self.canonical() == other.canonical()
    }
}

impl fmt::Display for ClosedFExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "λ(")?;
        for i in 0..self.arity {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "*{}", var_name(i))?;
        }
        write!(f, ").{}", self.body)
    }
}

/// A substitution from the variables of a closed expression to expressions
/// over a common binder of `target_arity` variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Substitution {
    pub target_arity: usize,
    pub images: Vec<FExpr>,
}

impl Substitution {
    pub fn from_closed(images: &[ClosedFExpr]) -> Result<Substitution, FExprError> {
        let target_arity = images.first().map_or(0, |c| c.arity);
        if let Some(c) = images.iter().find(|c| c.arity != target_arity) {
            return Err(FExprError::MixedTargetArity {
                first: target_arity,
                other: c.arity,
            });
        }
        Ok(Substitution {
            target_arity,
            images: images.iter().map(|c| c.body.clone()).collect(),
        })
    }
}

/// `K[L1..Ln]`: replaces each bound variable of `k` by the matching `l`.
pub fn substitute(k: &ClosedFExpr, ls: &[ClosedFExpr]) -> Result<ClosedFExpr, FExprError> {
    if ls.len() != k.arity {
        return Err(FExprError::SubstitutionArity {
            expected: k.arity,
            got: ls.len(),
        });
    }
    let sigma = Substitution::from_closed(ls)?;
    apply_substitution(k, &sigma)
}

/// Applies a [`Substitution`] to a closed expression.
pub fn apply_substitution(
    k: &ClosedFExpr,
    sigma: &Substitution,
) -> Result<ClosedFExpr, FExprError> {
    if sigma.images.len() != k.arity {
        return Err(FExprError::SubstitutionArity {
            expected: k.arity,
            got: sigma.images.len(),
        });
    }
    ClosedFExpr::new(sigma.target_arity, k.body.subst(&sigma.images))
}

/// Source of declared functor varities.
pub trait FunctorTable {
    fn functor_varity(&self, name: &str) -> Option<Varity>;
}

impl FunctorTable for HashMap<String, Varity> {
    fn functor_varity(&self, name: &str) -> Option<Varity> {
        self.get(name).cloned()
    }
}

/// Varity of an open expression over a binder of `arity` variables.
pub fn varity_in(e: &FExpr, arity: usize, table: &dyn FunctorTable) -> Result<Varity, FExprError> {
    match e {
        FExpr::Var(i) => {
            if *i >= arity {
                return Err(FExprError::UnboundVariable { index: *i, arity });
            }
            Ok(Varity::projection(arity, *i))
        }
        FExpr::App(name, args) => {
            let declared = table
                .functor_varity(name)
                .ok_or_else(|| FExprError::UnknownFunctor(name.clone()))?;
            if declared.len() != args.len() {
                return Err(FExprError::FunctorArity {
                    name: name.clone(),
                    expected: declared.len(),
                    got: args.len(),
                });
            }
            let rows = args
                .iter()
                .map(|a| varity_in(a, arity, table))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(varity_product(&declared, &rows, arity).expect("dimensions checked above"))
        }
    }
}

/// Varity of the functor denoted by a closed expression.
pub fn variance_of(k: &ClosedFExpr, table: &dyn FunctorTable) -> Result<Varity, FExprError> {
    varity_in(&k.body, k.arity, table)
}

/// A failed unification.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UnifyError {
    #[error("cannot unify {left} with {right}")]
    Clash { left: FExpr, right: FExpr },
    #[error("cyclic type: {var} occurs in {term}")]
    Occurs { var: FExpr, term: FExpr },
}

/// First-order unifier over a growing pool of metavariables.
///
/// Variables are `FExpr::Var` indices allocated with [`Unifier::fresh`].
/// When two unbound variables meet, the one on the left is bound to the one
/// on the right.
#[derive(Clone, Debug, Default)]
pub struct Unifier {
    bindings: Vec<Option<FExpr>>,
}

impl Unifier {
    pub fn new() -> Unifier {
        Unifier::default()
    }

    /// A unifier that already owns variables `0..n`.
    pub fn with_vars(n: usize) -> Unifier {
        Unifier {
            bindings: vec![None; n],
        }
    }

    pub fn fresh(&mut self) -> usize {
        self.bindings.push(None);
        self.bindings.len() - 1
    }

    pub fn fresh_var(&mut self) -> FExpr {
        FExpr::Var(self.fresh())
    }

    /// Number of variables allocated so far.
    pub fn var_count(&self) -> usize {
        self.bindings.len()
    }

    fn walk<'a>(&'a self, mut t: &'a FExpr) -> &'a FExpr {
        while let FExpr::Var(i) = t {
            match &self.bindings[*i] {
                Some(b) => t = b,
                None => break,
            }
        }
        t
    }

    /// Applies the current bindings completely.
    pub fn resolve(&self, t: &FExpr) -> FExpr {
        match self.walk(t) {
            FExpr::Var(i) => FExpr::Var(*i),
            FExpr::App(n, args) => {
                FExpr::App(n.clone(), args.iter().map(|a| self.resolve(a)).collect())
            }
        }
    }

    fn occurs(&self, v: usize, t: &FExpr) -> bool {
        match self.walk(t) {
            FExpr::Var(i) => *i == v,
            FExpr::App(_, args) => args.iter().any(|a| self.occurs(v, a)),
        }
    }

    /// Unifies `a` with `b`. On failure the bindings made so far are rolled back.
    pub fn unify(&mut self, a: &FExpr, b: &FExpr) -> Result<(), UnifyError> {
        let saved = self.bindings.clone();
        let r = self.unify_inner(a, b);
        if r.is_err() {
            self.bindings = saved;
        }
        r
    }

    fn unify_inner(&mut self, a: &FExpr, b: &FExpr) -> Result<(), UnifyError> {
        let a = self.walk(a).clone();
        let b = self.walk(b).clone();
        match (&a, &b) {
            (FExpr::Var(i), FExpr::Var(j)) if i == j => Ok(()),
            (FExpr::Var(i), _) => self.bind(*i, &b),
            (_, FExpr::Var(j)) => self.bind(*j, &a),
            (FExpr::App(n, xs), FExpr::App(m, ys)) => {
                if n != m || xs.len() != ys.len() {
                    return Err(UnifyError::Clash {
                        left: self.resolve(&a),
                        right: self.resolve(&b),
                    });
                }
                for (x, y) in xs.iter().zip(ys) {
                    self.unify_inner(x, y)?;
                }
                Ok(())
            }
        }
    }

    fn bind(&mut self, v: usize, t: &FExpr) -> Result<(), UnifyError> {
        if self.occurs(v, t) {
            return Err(UnifyError::Occurs {
                var: FExpr::Var(v),
                term: self.resolve(t),
            });
        }
        self.bindings[v] = Some(t.clone());
        Ok(())
    }
}

/// Most general unifier of two closed expressions with disjoint binders.
///
/// Returns substitutions for `k` and `l` into one common binder whose
/// variables are numbered in first-occurrence order across the images of
/// `k`'s variables followed by those of `l`'s.
pub fn unify(k: &ClosedFExpr, l: &ClosedFExpr) -> Result<(Substitution, Substitution), UnifyError> {
    let n = k.arity;
    let mut u = Unifier::with_vars(n + l.arity);
    let lb = l.body.map_vars(&mut |j| j + n);
    u.unify(&k.body, &lb)?;
    let raw: Vec<FExpr> = (0..n + l.arity)
        .map(|i| u.resolve(&FExpr::Var(i)))
        .collect();
    let mut order = Vec::new();
    raw.iter().for_each(|t| t.vars_in_order(&mut order));
    let rank: HashMap<usize, usize> = order.iter().enumerate().map(|(r, v)| (*v, r)).collect();
    let renamed: Vec<FExpr> = raw.iter().map(|t| t.map_vars(&mut |v| rank[&v])).collect();
    let target_arity = order.len();
    let (sk, sl) = renamed.split_at(n);
    Ok((
        Substitution {
            target_arity,
            images: sk.to_vec(),
        },
        Substitution {
            target_arity,
            images: sl.to_vec(),
        },
    ))
}

/// One-way matching: extends `sigma` so that `pattern[sigma] == target`.
///
/// Variables of `pattern` index into `sigma`; variables of `target` are rigid.
pub fn match_into(pattern: &FExpr, target: &FExpr, sigma: &mut Vec<Option<FExpr>>) -> bool {
    match pattern {
        FExpr::Var(i) => {
            if *i >= sigma.len() {
                sigma.resize(i + 1, None);
            }
            match &sigma[*i] {
                Some(t) => t == target,
                None => {
                    sigma[*i] = Some(target.clone());
                    true
                }
            }
        }
        FExpr::App(n, xs) => match target {
            FExpr::App(m, ys) if n == m && xs.len() == ys.len() => {
                xs.iter().zip(ys).all(|(x, y)| match_into(x, y, sigma))
            }
            _ => false,
        },
    }
}

/// Whether the tuple `specific` is a substitution instance of `general`.
pub fn is_instance(general: &[FExpr], specific: &[FExpr]) -> bool {
    let mut sigma = Vec::new();
    general.len() == specific.len()
        && general
            .iter()
            .zip(specific)
            .all(|(g, s)| match_into(g, s, &mut sigma))
}
