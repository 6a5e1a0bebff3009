//! Morphism expressions.
//!
//! Composition is stored flattened: an [`Expr`] is a sequence of atoms with the
//! outermost (last applied) atom first, exactly as it is written with `.`.
//! The empty sequence is the identity.

use std::fmt;
use std::sync::Arc;

use crate::Name;

/// A non-composite morphism expression.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Atom {
    /// A natural transformation such as `pi1` or `s`.
    Nat(Name),
    /// A factorizer application `ψ(e1,..,em)`; `m` may be zero, as for `!`.
    Fact(Name, Arc<[Expr]>),
    /// A functor applied to morphisms, `F(e1,..,en)`.
    Func(Name, Arc<[Expr]>),
    /// A morphism variable.
    Var(Name),
}

impl Atom {
    pub fn nat(name: &str) -> Atom {
        Atom::Nat(Name::from(name))
    }

    pub fn fact(name: &str, args: Vec<Expr>) -> Atom {
        Atom::Fact(Name::from(name), args.into())
    }

    pub fn func(name: &str, args: Vec<Expr>) -> Atom {
        Atom::Func(Name::from(name), args.into())
    }

    pub fn var(name: &str) -> Atom {
        Atom::Var(Name::from(name))
    }

    pub fn name(&self) -> &Name {
        match self {
            Atom::Nat(n) | Atom::Fact(n, _) | Atom::Func(n, _) | Atom::Var(n) => n,
        }
    }

    /// Arguments of a factorizer or functor application.
    pub fn args(&self) -> &[Expr] {
        match self {
            Atom::Fact(_, a) | Atom::Func(_, a) => a,
            _ => &[],
        }
    }

    fn any(&self, p: &impl Fn(&Atom) -> bool) -> bool {
        p(self) || self.args().iter().any(|e| e.any_atom(p))
    }
}

/// A composition `a1.a2. … .an` of atoms, outermost first.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Expr {
    atoms: Vec<Atom>,
}

impl Expr {
    pub fn id() -> Expr {
        Expr::default()
    }

    pub fn from_atoms(atoms: Vec<Atom>) -> Expr {
        Expr { atoms }
    }

    pub fn atom(a: Atom) -> Expr {
        Expr { atoms: vec![a] }
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn into_atoms(self) -> Vec<Atom> {
        self.atoms
    }

    pub fn is_id(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// `self ∘ inner`.
    pub fn then(mut self, inner: &Expr) -> Expr {
        self.atoms.extend(inner.atoms.iter().cloned());
        self
    }

    /// Composes a sequence of expressions, outermost first.
    pub fn compose_all<'a>(parts: impl IntoIterator<Item = &'a Expr>) -> Expr {
        Expr {
            atoms: parts
                .into_iter()
                .flat_map(|p| p.atoms.iter().cloned())
                .collect(),
        }
    }

    /// Whether some atom, at any nesting depth, satisfies `p`.
    pub fn any_atom(&self, p: &impl Fn(&Atom) -> bool) -> bool {
        self.atoms.iter().any(|a| a.any(p))
    }

    /// Whether the expression contains functor applications.
    pub fn has_functors(&self) -> bool {
        self.any_atom(&|a| matches!(a, Atom::Func(..)))
    }

    /// Whether the expression contains morphism variables.
    pub fn has_vars(&self) -> bool {
        self.any_atom(&|a| matches!(a, Atom::Var(_)))
    }

    /// Total number of atoms, counting nested arguments.
    pub fn size(&self) -> usize {
        self.atoms
            .iter()
            .map(|a| 1 + a.args().iter().map(Expr::size).sum::<usize>())
            .sum()
    }

    /// Writes the atoms joined by `.`, writing nothing for the identity.
    pub fn write_bare(&self, f: &mut impl fmt::Write) -> fmt::Result {
        for (i, a) in self.atoms.iter().enumerate() {
            if i > 0 {
                f.write_char('.')?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }

    /// Like `to_string`, but the identity renders as the empty string.
    pub fn to_bare_string(&self) -> String {
        let mut s = String::new();
        self.write_bare(&mut s).expect("writing to a String");
        s
    }
}

impl From<Atom> for Expr {
    fn from(a: Atom) -> Expr {
        Expr::atom(a)
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())?;
        let args = self.args();
        if !args.is_empty() {
            write!(f, "(")?;
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{a}")?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.atoms.is_empty() {
            return write!(f, "id");
        }
        self.write_bare(f)
    }
}
