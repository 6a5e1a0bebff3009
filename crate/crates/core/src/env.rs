//! Object declarations and the environment that registers them.
//!
//! Inside a registered declaration, component expressions range over one
//! binder: variable 0 is the declared object itself and variable `k + 1` is
//! parameter `k`. Declarations are validated in a fixed order (names, variance
//! restriction, computability, varity) and registration is transactional:
//! [`Environment::declare_object`] returns a new environment or an error.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::expr::Expr;
use crate::fexpr::{varity_in, FExpr, FExprError, FunctorTable};
use crate::infer::MorphismType;
use crate::variance::{Variance, Varity};
use crate::Name;

/// Which kind of universal property a declaration states.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Left => "left",
            Side::Right => "right",
        })
    }
}

/// A natural transformation `name : dom -> cod` of a declaration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Component {
    pub name: Name,
    pub dom: FExpr,
    pub cod: FExpr,
}

/// A declaration as written: every name in the component expressions is an
/// unresolved [`FExpr::App`], the object itself and parameters included.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObjectDecl {
    pub side: Side,
    pub name: Name,
    pub params: Vec<Name>,
    pub factorizer: Name,
    pub components: Vec<Component>,
}

/// A validated declaration together with its derived tables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObjectInfo {
    pub side: Side,
    pub name: Name,
    pub params: Vec<Name>,
    pub factorizer: Name,
    /// Components over the binder (self, params…).
    pub components: Vec<Component>,
    pub varity: Varity,
    /// Right objects whose self-reference occurs in no codomain.
    pub unconditioned: bool,
    /// For each parameter, the component projecting onto it when the functor
    /// is productive in that parameter.
    pub productive: Vec<Option<usize>>,
}

impl ObjectInfo {
    pub fn arity(&self) -> usize {
        self.params.len()
    }

    /// Index of the component named `name`.
    pub fn component_index(&self, name: &str) -> Option<usize> {
        self.components.iter().position(|c| &*c.name == name)
    }

    /// Productive slot table as `(parameter, component)` pairs.
    pub fn productive_slots(&self) -> Vec<(usize, usize)> {
        self.productive
            .iter()
            .enumerate()
            .filter_map(|(i, j)| j.map(|j| (i, j)))
            .collect()
    }

    /// Substitutes `self_image` for the object and `params` for its parameters.
    pub fn instantiate(&self, e: &FExpr, self_image: &FExpr, params: &[FExpr]) -> FExpr {
        let mut images = Vec::with_capacity(params.len() + 1);
        images.push(self_image.clone());
        images.extend(params.iter().cloned());
        e.subst(&images)
    }

    /// Renders a component expression with the declared names.
    pub fn render(&self, e: &FExpr) -> String {
        let mut names = vec![FExpr::App(self.name.clone(), Vec::new())];
        names.extend(
            self.params
                .iter()
                .map(|p| FExpr::App(p.clone(), Vec::new())),
        );
        e.subst(&names).to_string()
    }

    /// The echo line printed when the object is registered.
    pub fn defined_message(&self) -> String {
        format!("{} object {}{} defined", self.side, self.name, self.varity)
    }
}

/// A `let`-bound morphism.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LetBinding {
    pub name: Name,
    pub expr: Expr,
    pub ty: MorphismType,
}

/// Ways a declaration or binding can be rejected.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DeclError {
    #[error("name `{0}` is already defined")]
    Duplicate(Name),
    #[error("name `{0}` is used twice in the declaration")]
    DuplicateInDecl(Name),
    #[error("`{name}` is {what} and cannot be applied to arguments")]
    NotAFunctor { name: Name, what: &'static str },
    #[error(transparent)]
    Functor(#[from] FExprError),
    #[error("in component `{component}`: `{object}` is {variance} in the {position}; it must be covariant or free")]
    VarianceRestriction {
        component: Name,
        object: Name,
        position: &'static str,
        variance: &'static str,
    },
    #[error(
        "in component `{component}`: `{object}` must be covariant in the domain or the codomain"
    )]
    NotCovariant { component: Name, object: Name },
    #[error("left object `{object}` is not computable: codomain of `{component}` is {cod}, not `{object}`")]
    LeftNotComputable {
        object: Name,
        component: Name,
        cod: String,
    },
    #[error("right object `{object}` is not computable: domain of `{component}` is {dom}, which is not productive in `{object}`")]
    RightNotComputable {
        object: Name,
        component: Name,
        dom: String,
    },
    #[error("`it` is reserved for the last result")]
    Reserved,
}

fn variance_word(v: Variance) -> &'static str {
    match v {
        Variance::Free => "free",
        Variance::Covariant => "covariant",
        Variance::Contravariant => "contravariant",
        Variance::Fixed => "fixed",
    }
}

/// The registry of objects and `let` bindings.
#[derive(Clone, Debug, Default)]
pub struct Environment {
    objects: Vec<Arc<ObjectInfo>>,
    functors: HashMap<Name, usize>,
    naturals: HashMap<Name, (usize, usize)>,
    factorizers: HashMap<Name, usize>,
    lets: HashMap<Name, Arc<LetBinding>>,
}

impl FunctorTable for Environment {
    fn functor_varity(&self, name: &str) -> Option<Varity> {
        self.object(name).map(|o| o.varity.clone())
    }
}

impl Environment {
    pub fn new() -> Environment {
        Environment::default()
    }

    /// Registered objects in declaration order.
    pub fn objects(&self) -> impl Iterator<Item = &ObjectInfo> {
        self.objects.iter().map(|o| &**o)
    }

    pub fn object(&self, name: &str) -> Option<&ObjectInfo> {
        self.functors.get(name).map(|i| &*self.objects[*i])
    }

    /// The owner of a natural transformation and its component index.
    pub fn natural(&self, name: &str) -> Option<(&ObjectInfo, usize)> {
        self.naturals
            .get(name)
            .map(|(i, j)| (&*self.objects[*i], *j))
    }

    /// The owner of a factorizer.
    pub fn factorizer(&self, name: &str) -> Option<&ObjectInfo> {
        self.factorizers.get(name).map(|i| &*self.objects[*i])
    }

    pub fn let_binding(&self, name: &str) -> Option<&LetBinding> {
        self.lets.get(name).map(|b| &**b)
    }

    /// The terminal object: the first right object with no parameters and no
    /// components.
    pub fn terminal(&self) -> Option<&ObjectInfo> {
        self.objects()
            .find(|o| o.side == Side::Right && o.params.is_empty() && o.components.is_empty())
    }

    pub fn name_in_use(&self, name: &str) -> bool {
        name == "it"
            || self.functors.contains_key(name)
            || self.naturals.contains_key(name)
            || self.factorizers.contains_key(name)
            || self.lets.contains_key(name)
    }

    /// Whether `e` is productive in variable `target`.
    ///
    /// The bare target is productive; `P(..E_k..)` is productive when `P` is
    /// productive in slot `k`, `E_k` is productive in the target and no other
    /// argument mentions it.
    pub fn is_productive(&self, e: &FExpr, target: usize) -> bool {
        match e {
            FExpr::Var(v) => *v == target,
            FExpr::App(p, args) => {
                let holders: Vec<usize> = (0..args.len())
                    .filter(|k| args[*k].mentions(target))
                    .collect();
                let [k] = holders[..] else {
                    return false;
                };
                self.object(p)
                    .and_then(|o| o.productive.get(k).copied().flatten())
                    .is_some()
                    && self.is_productive(&args[k], target)
            }
        }
    }

    /// Validates and registers a declaration.
    pub fn declare_object(&self, decl: &ObjectDecl) -> Result<Environment, DeclError> {
        let info = self.validate(decl)?;
        let mut env = self.clone();
        let idx = env.objects.len();
        env.functors.insert(info.name.clone(), idx);
        env.factorizers.insert(info.factorizer.clone(), idx);
        for (j, c) in info.components.iter().enumerate() {
            env.naturals.insert(c.name.clone(), (idx, j));
        }
        env.objects.push(Arc::new(info));
        Ok(env)
    }

    /// Validates a declaration without registering it.
    pub fn validate(&self, decl: &ObjectDecl) -> Result<ObjectInfo, DeclError> {
        self.check_names(decl)?;
        let components = decl
            .components
            .iter()
            .map(|c| {
                Ok(Component {
                    name: c.name.clone(),
                    dom: self.resolve_fexpr(decl, &c.dom)?,
                    cod: self.resolve_fexpr(decl, &c.cod)?,
                })
            })
            .collect::<Result<Vec<_>, DeclError>>()?;
        let width = decl.params.len() + 1;
        let mut varities = Vec::with_capacity(components.len());
        for c in &components {
            let d = varity_in(&c.dom, width, self)?;
            let k = varity_in(&c.cod, width, self)?;
            for (v, position) in [(d.get(0), "domain"), (k.get(0), "codomain")] {
                if !matches!(v, Variance::Covariant | Variance::Free) {
                    return Err(DeclError::VarianceRestriction {
                        component: c.name.clone(),
                        object: decl.name.clone(),
                        position,
                        variance: variance_word(v),
                    });
                }
            }
            if d.get(0) != Variance::Covariant && k.get(0) != Variance::Covariant {
                return Err(DeclError::NotCovariant {
                    component: c.name.clone(),
                    object: decl.name.clone(),
                });
            }
            varities.push((d, k));
        }
        let mut info = ObjectInfo {
            side: decl.side,
            name: decl.name.clone(),
            params: decl.params.clone(),
            factorizer: decl.factorizer.clone(),
            components,
            varity: Varity::free(decl.params.len()),
            unconditioned: false,
            productive: vec![None; decl.params.len()],
        };
        self.check_computable(&info)?;
        for (d, k) in &varities {
            let s = Varity(d.0[1..].to_vec());
            let s2 = Varity(k.0[1..].to_vec());
            let contribution = match decl.side {
                Side::Left => s.lub(&s2.scale(Variance::Contravariant)),
                Side::Right => s.scale(Variance::Contravariant).lub(&s2),
            };
            info.varity = info.varity.lub(&contribution);
        }
        if info.side == Side::Right {
            info.unconditioned = info.components.iter().all(|c| !c.cod.mentions(0));
            if info.unconditioned {
                info.productive = (0..info.arity())
                    .map(|i| self.projection_of(&info, i + 1))
                    .collect();
            }
        }
        Ok(info)
    }

    fn check_names(&self, decl: &ObjectDecl) -> Result<(), DeclError> {
        let mut seen: Vec<&Name> = Vec::new();
        let globals = std::iter::once(&decl.name)
            .chain(std::iter::once(&decl.factorizer))
            .chain(decl.components.iter().map(|c| &c.name));
        for n in globals {
            if &**n == "it" {
                return Err(DeclError::Reserved);
            }
            if self.name_in_use(n) {
                return Err(DeclError::Duplicate(n.clone()));
            }
            if seen.contains(&n) {
                return Err(DeclError::DuplicateInDecl(n.clone()));
            }
            seen.push(n);
        }
        let mut params: Vec<&Name> = Vec::new();
        for p in &decl.params {
            if p == &decl.name || params.contains(&p) {
                return Err(DeclError::DuplicateInDecl(p.clone()));
            }
            params.push(p);
        }
        Ok(())
    }

    fn resolve_fexpr(&self, decl: &ObjectDecl, e: &FExpr) -> Result<FExpr, DeclError> {
        let FExpr::App(name, args) = e else {
            return Ok(e.clone());
        };
        let local = if name == &decl.name {
            Some((0, "the declared object"))
        } else {
            decl.params
                .iter()
                .position(|p| p == name)
                .map(|k| (k + 1, "a parameter"))
        };
        if let Some((v, what)) = local {
            if !args.is_empty() {
                return Err(DeclError::NotAFunctor {
                    name: name.clone(),
                    what,
                });
            }
            return Ok(FExpr::Var(v));
        }
        let o = self
            .object(name)
            .ok_or_else(|| FExprError::UnknownFunctor(name.clone()))?;
        if o.arity() != args.len() {
            return Err(FExprError::FunctorArity {
                name: name.clone(),
                expected: o.arity(),
                got: args.len(),
            }
            .into());
        }
        let args = args
            .iter()
            .map(|a| self.resolve_fexpr(decl, a))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(FExpr::App(name.clone(), args))
    }

    fn check_computable(&self, info: &ObjectInfo) -> Result<(), DeclError> {
        for c in &info.components {
            match info.side {
                Side::Left if c.cod != FExpr::Var(0) => {
                    return Err(DeclError::LeftNotComputable {
                        object: info.name.clone(),
                        component: c.name.clone(),
                        cod: info.render(&c.cod),
                    })
                }
                Side::Right if !self.is_productive(&c.dom, 0) => {
                    return Err(DeclError::RightNotComputable {
                        object: info.name.clone(),
                        component: c.name.clone(),
                        dom: info.render(&c.dom),
                    })
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// The component projecting an unconditioned right object onto binder
    /// variable `y`, if the object is productive there.
    fn projection_of(&self, info: &ObjectInfo, y: usize) -> Option<usize> {
        if info.components.iter().any(|c| c.dom.mentions(y)) {
            return None;
        }
        let holders: Vec<usize> = (0..info.components.len())
            .filter(|j| info.components[*j].cod.mentions(y))
            .collect();
        let [j] = holders[..] else {
            return None;
        };
        let c = &info.components[j];
        (c.dom == FExpr::Var(0) && self.is_productive(&c.cod, y)).then_some(j)
    }

    /// Registers a `let` binding whose type has already been inferred.
    pub fn bind_let(
        &self,
        name: &str,
        expr: Expr,
        ty: MorphismType,
    ) -> Result<Environment, DeclError> {
        if name == "it" {
            return Err(DeclError::Reserved);
        }
        if self.name_in_use(name) {
            return Err(DeclError::Duplicate(Name::from(name)));
        }
        let mut env = self.clone();
        let name = Name::from(name);
        env.lets
            .insert(name.clone(), Arc::new(LetBinding { name, expr, ty }));
        Ok(env)
    }
}
